#ifndef EDCNET_IO_HPP
#define EDCNET_IO_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace edcnet {

// All binary artifacts are little-endian. Numeric payloads are float32,
// row-major, preceded by an 8-byte magic and three u64 dims.
constexpr char kBlobMagic[9] = "EDCNET01";

struct BlobDims {
  std::uint64_t d0 = 0, d1 = 0, d2 = 0;
  std::uint64_t total() const { return d0 * d1 * d2; }
};

void write_blob(const std::string& path, const BlobDims& dims,
                const std::vector<float>& data);
// Throws FormatError / TruncatedError / ShapeError on malformed files.
std::vector<float> read_blob(const std::string& path, BlobDims& dims);

// Framed JSON header followed by raw float32 blobs, used by checkpoints and
// EDC prediction files: magic(8) + u64 json length + json + payload.
void write_framed(const std::string& path, const char magic[9],
                  const nlohmann::json& header,
                  const std::vector<std::vector<float>>& blobs);
nlohmann::json read_framed(const std::string& path, const char magic[9],
                           std::vector<std::vector<float>>& blobs,
                           const std::vector<std::uint64_t>& blob_sizes);

// Reproducibility stamp embedded in every JSON artifact.
struct RunStamp {
  std::string tool_version;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string created_utc;
};

RunStamp make_stamp(const nlohmann::json& config, std::uint64_t seed);
nlohmann::json stamp_to_json(const RunStamp& s);

// FNV-1a over the canonical (sorted-key, no-whitespace) JSON encoding.
std::string config_digest(const nlohmann::json& config);

std::string tool_version();

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

// 16-bit PCM mono RIFF
void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate);
std::vector<double> read_wav(const std::string& path, int& sample_rate);

}  // namespace edcnet

#endif
