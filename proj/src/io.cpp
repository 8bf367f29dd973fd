#include "edcnet/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "edcnet/error.hpp"

namespace edcnet {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

namespace {

void write_u64(std::ofstream& f, std::uint64_t v) {
  f.write(reinterpret_cast<const char*>(&v), 8);
}

std::uint64_t read_u64(std::ifstream& f, const std::string& path) {
  std::uint64_t v = 0;
  f.read(reinterpret_cast<char*>(&v), 8);
  if (!f) throw TruncatedError("truncated file: " + path);
  return v;
}

void check_magic(std::ifstream& f, const char magic[9], const std::string& path) {
  char got[8];
  f.read(got, 8);
  if (!f) throw TruncatedError("truncated file: " + path);
  if (std::memcmp(got, magic, 8) != 0)
    throw FormatError("bad magic in " + path + " (expected " +
                      std::string(magic, 8) + ")");
}

}  // namespace

void write_blob(const std::string& path, const BlobDims& dims,
                const std::vector<float>& data) {
  if (data.size() != dims.total())
    throw ShapeError("blob payload size " + std::to_string(data.size()) +
                     " does not match dims product " + std::to_string(dims.total()));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(kBlobMagic, 8);
  write_u64(f, dims.d0);
  write_u64(f, dims.d1);
  write_u64(f, dims.d2);
  f.write(reinterpret_cast<const char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!f) throw IoError("write failed: " + path);
}

std::vector<float> read_blob(const std::string& path, BlobDims& dims) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  check_magic(f, kBlobMagic, path);
  dims.d0 = read_u64(f, path);
  dims.d1 = read_u64(f, path);
  dims.d2 = read_u64(f, path);
  std::vector<float> data(dims.total());
  f.read(reinterpret_cast<char*>(data.data()),
         static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (static_cast<std::uint64_t>(f.gcount()) != data.size() * sizeof(float))
    throw TruncatedError("truncated payload in " + path);
  return data;
}

void write_framed(const std::string& path, const char magic[9],
                  const nlohmann::json& header,
                  const std::vector<std::vector<float>>& blobs) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  std::string js = header.dump();
  f.write(magic, 8);
  write_u64(f, js.size());
  f.write(js.data(), static_cast<std::streamsize>(js.size()));
  for (const auto& b : blobs)
    f.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size() * sizeof(float)));
  if (!f) throw IoError("write failed: " + path);
}

nlohmann::json read_framed(const std::string& path, const char magic[9],
                           std::vector<std::vector<float>>& blobs,
                           const std::vector<std::uint64_t>& blob_sizes) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  check_magic(f, magic, path);
  std::uint64_t jlen = read_u64(f, path);
  std::string js(jlen, '\0');
  f.read(js.data(), static_cast<std::streamsize>(jlen));
  if (static_cast<std::uint64_t>(f.gcount()) != jlen)
    throw TruncatedError("truncated header in " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("unparseable header in " + path + ": " + e.what());
  }
  blobs.clear();
  for (std::uint64_t sz : blob_sizes) {
    std::vector<float> b(sz);
    f.read(reinterpret_cast<char*>(b.data()),
           static_cast<std::streamsize>(sz * sizeof(float)));
    if (static_cast<std::uint64_t>(f.gcount()) != sz * sizeof(float))
      throw TruncatedError("truncated blob in " + path);
    blobs.push_back(std::move(b));
  }
  return header;
}

std::string config_digest(const nlohmann::json& config) {
  std::string canon = config.dump();  // nlohmann keeps keys sorted
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string tool_version() { return "0.1.0"; }

RunStamp make_stamp(const nlohmann::json& config, std::uint64_t seed) {
  RunStamp s;
  s.tool_version = tool_version();
  s.config_digest = config_digest(config);
  s.seed = seed;
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  s.created_utc = buf;
  return s;
}

nlohmann::json stamp_to_json(const RunStamp& s) {
  return {{"tool_version", s.tool_version},
          {"config_digest", s.config_digest},
          {"seed", s.seed},
          {"created_utc", s.created_utc}};
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

nlohmann::json read_json_file(const std::string& path) {
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid JSON in " + path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

namespace {

void put_u32(std::ofstream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), 4);
}
void put_u16(std::ofstream& f, std::uint16_t v) {
  f.write(reinterpret_cast<const char*>(&v), 2);
}

}  // namespace

void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  f.write("RIFF", 4);
  put_u32(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(f, 16);
  put_u16(f, 1);  // PCM
  put_u16(f, 1);  // mono
  put_u32(f, static_cast<std::uint32_t>(sample_rate));
  put_u32(f, static_cast<std::uint32_t>(sample_rate * 2));
  put_u16(f, 2);   // block align
  put_u16(f, 16);  // bits per sample
  f.write("data", 4);
  put_u32(f, data_bytes);
  for (double s : samples) {
    double c = s < -1.0 ? -1.0 : (s > 1.0 ? 1.0 : s);
    auto v = static_cast<std::int16_t>(std::lround(c * 32767.0));
    f.write(reinterpret_cast<const char*>(&v), 2);
  }
  if (!f) throw IoError("write failed: " + path);
}

std::vector<double> read_wav(const std::string& path, int& sample_rate) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  char riff[4], wave[4];
  std::uint32_t sz;
  f.read(riff, 4);
  f.read(reinterpret_cast<char*>(&sz), 4);
  f.read(wave, 4);
  if (!f || std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0)
    throw FormatError("not a RIFF/WAVE file: " + path);
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::vector<double> out;
  while (f) {
    char id[4];
    std::uint32_t len;
    f.read(id, 4);
    f.read(reinterpret_cast<char*>(&len), 4);
    if (!f) break;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      std::uint16_t fmt;
      std::uint32_t byterate;
      std::uint16_t align;
      f.read(reinterpret_cast<char*>(&fmt), 2);
      f.read(reinterpret_cast<char*>(&channels), 2);
      f.read(reinterpret_cast<char*>(&rate), 4);
      f.read(reinterpret_cast<char*>(&byterate), 4);
      f.read(reinterpret_cast<char*>(&align), 2);
      f.read(reinterpret_cast<char*>(&bits), 2);
      if (len > 16) f.seekg(len - 16, std::ios::cur);
      if (fmt != 1 || channels != 1 || bits != 16)
        throw FormatError("expected 16-bit PCM mono: " + path);
    } else if (std::memcmp(id, "data", 4) == 0) {
      std::size_t n = len / 2;
      out.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::int16_t v;
        f.read(reinterpret_cast<char*>(&v), 2);
        out[i] = static_cast<double>(v) / 32767.0;
      }
      if (!f) throw TruncatedError("truncated wav data: " + path);
      break;
    } else {
      f.seekg(len, std::ios::cur);
    }
  }
  if (out.empty()) throw FormatError("no data chunk in " + path);
  sample_rate = static_cast<int>(rate);
  return out;
}

}  // namespace edcnet
