#ifndef EDCNET_EDC_FILE_HPP
#define EDCNET_EDC_FILE_HPP

#include <string>

#include "edcnet/edc.hpp"

namespace edcnet {

// Predicted/analyzed EDC matrix on disk: framed JSON header (edc_length,
// frame_dt, bands, stamp) followed by one 24 x L float32 blob.
constexpr char kEdcFileMagic[9] = "EDCNETE1";

void write_edc_file(const std::string& path, const EdcMatrix& m, std::uint64_t seed);
EdcMatrix read_edc_file(const std::string& path);

}  // namespace edcnet

#endif
