#include "edcnet/edc_file.hpp"

#include "edcnet/error.hpp"
#include "edcnet/io.hpp"
#include "edcnet/roomgen.hpp"

namespace edcnet {

void write_edc_file(const std::string& path, const EdcMatrix& m, std::uint64_t seed) {
  if (m.curves.size() != static_cast<std::size_t>(kNumBands) * m.length)
    throw ShapeError("write_edc_file: matrix is not 24 x L");
  nlohmann::json header;
  header["format_version"] = 1;
  header["edc_length"] = m.length;
  header["frame_dt"] = m.frame_dt;
  header["bands"] = kBandCenters;
  header["stamp"] = stamp_to_json(
      make_stamp({{"edc_length", m.length}, {"frame_dt", m.frame_dt}}, seed));
  std::vector<float> blob(m.curves.size());
  for (std::size_t i = 0; i < blob.size(); ++i) blob[i] = static_cast<float>(m.curves[i]);
  write_framed(path, kEdcFileMagic, header, {blob});
}

EdcMatrix read_edc_file(const std::string& path) {
  std::vector<std::vector<float>> blobs;
  nlohmann::json header = read_framed(path, kEdcFileMagic, blobs, {});
  EdcMatrix m;
  try {
    if (header.at("format_version").get<int>() != 1)
      throw VersionError("unsupported EDC file format_version");
    m.length = header.at("edc_length").get<int>();
    m.frame_dt = header.at("frame_dt").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed EDC file header: ") + e.what());
  }
  std::uint64_t n = static_cast<std::uint64_t>(kNumBands) * m.length;
  read_framed(path, kEdcFileMagic, blobs, {n});
  m.curves.assign(blobs[0].begin(), blobs[0].end());
  return m;
}

}  // namespace edcnet
