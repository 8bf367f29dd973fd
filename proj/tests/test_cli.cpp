#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "edcnet/edc_file.hpp"
#include "edcnet/io.hpp"
#include "edcnet/roomgen.hpp"

using namespace edcnet;
namespace fs = std::filesystem;

namespace {

const std::string kBin = EDCNET_BIN;

fs::path work_dir() {
  static fs::path dir = [] {
    auto p = fs::temp_directory_path() / "edcnet_cli_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

int run(const std::string& args, const std::string& out_file = "") {
  std::string cmd = kBin + " " + args;
  if (!out_file.empty()) cmd += " > " + out_file + " 2>&1";
  else cmd += " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  return read_text_file(a.string()) == read_text_file(b.string());
}

nlohmann::json manifest_sans_time(const fs::path& dir) {
  auto j = read_json_file((dir / "manifest.json").string());
  j["stamp"].erase("created_utc");
  return j;
}

}  // namespace

TEST_CASE("help and version exit cleanly") {
  CHECK(run("--help") == 0);
  CHECK(run("gen --help") == 0);
  CHECK(run("--version") == 0);
}

TEST_CASE("unknown flags produce a usage error with a suggestion") {
  auto log = (work_dir() / "usage.txt").string();
  int rc = run("gen --count 2 --seed 1 --out /tmp/x --edc-lenth 100", log);
  CHECK(rc == 1);
  auto text = read_text_file(log);
  CHECK(text.find("--edc-length") != std::string::npos);
}

TEST_CASE("gen is deterministic across runs") {
  auto d1 = work_dir() / "gen1";
  auto d2 = work_dir() / "gen2";
  CHECK(run("gen --count 6 --seed 3 --out " + d1.string() + " --edc-length 120") == 0);
  CHECK(run("gen --count 6 --seed 3 --out " + d2.string() + " --edc-length 120") == 0);
  CHECK(same_bytes(d1 / "features.bin", d2 / "features.bin"));
  CHECK(same_bytes(d1 / "edcs.bin", d2 / "edcs.bin"));
  CHECK(manifest_sans_time(d1) == manifest_sans_time(d2));
}

TEST_CASE("simulate then analyze produces parameter JSON") {
  auto room = work_dir() / "room.json";
  write_json_file(room.string(), {{"length", 4.0},
                                  {"width", 5.0},
                                  {"height", 3.0},
                                  {"source", {1.0, 1.0, 1.0}},
                                  {"receiver", {3.0, 2.0, 1.5}},
                                  {"absorption", {0.3}}});
  auto rir = work_dir() / "room_rir.bin";
  CHECK(run("simulate --room " + room.string() + " --out " + rir.string()) == 0);

  auto out = (work_dir() / "params.json").string();
  CHECK(run("analyze --rir " + rir.string() + " --fs 16000 --json --out " + out) == 0);
  auto j = read_json_file(out);
  REQUIRE(j.at("bands").size() == 24);
  CHECK(j.at("bands")[10].contains("t30_s"));
  CHECK(j.contains("stamp"));
}

TEST_CASE("train, predict, eval and report round trip") {
  auto data = work_dir() / "data";
  CHECK(run("gen --count 12 --seed 5 --out " + data.string() + " --edc-length 200") == 0);

  auto ckpt = work_dir() / "ckpt";
  CHECK(run("train --data " + data.string() + " --out " + ckpt.string() +
            " --preset tiny --epochs 3 --seed 1 --stride-k 10") == 0);
  CHECK(fs::exists(ckpt / "best.ckpt"));
  CHECK(fs::exists(ckpt / "log.json"));

  // predict from raw features
  auto feats = work_dir() / "features.json";
  Dataset ds = read_dataset(data.string());
  nlohmann::json fj;
  fj["features"] = nlohmann::json::array();
  for (int j = 0; j < kNumFeatures; ++j) fj["features"].push_back(ds.feature_row(0)[j]);
  write_json_file(feats.string(), fj);
  auto pred = work_dir() / "pred.edc";
  CHECK(run("predict --ckpt " + (ckpt / "best.ckpt").string() + " --features " +
            feats.string() + " --out " + pred.string()) == 0);
  EdcMatrix m = read_edc_file(pred.string());
  CHECK(m.length == 200);
  CHECK(m.frame_dt > 0);
  for (double v : m.curves) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }

  // reconstruct the prediction into audio
  auto wav = work_dir() / "pred.wav";
  CHECK(run("reconstruct --edc " + pred.string() + " --fs 16000 --seed 2 --out " +
            wav.string()) == 0);
  int wav_fs = 0;
  auto audio = read_wav(wav.string(), wav_fs);
  CHECK(wav_fs == 16000);
  CHECK(!audio.empty());

  // model evaluation end to end
  auto report = (work_dir() / "report.json").string();
  auto plots = (work_dir() / "plots").string();
  CHECK(run("eval --data " + data.string() + " --ckpt " + (ckpt / "best.ckpt").string() +
            " --out " + report + " --plots " + plots) == 0);
  CHECK(fs::exists(plots + "/edc_error.csv"));
  CHECK(fs::exists(plots + "/t30_scatter.csv"));
  CHECK(fs::exists(plots + "/edt_scatter.csv"));
  CHECK(fs::exists(plots + "/edc_examples.csv"));
  CHECK(run("report --in " + report + " --format md") == 0);
}

TEST_CASE("self-oracle eval reports perfect scores through the CLI") {
  auto data = work_dir() / "data_oracle";
  CHECK(run("gen --count 12 --seed 9 --out " + data.string() + " --edc-length 150") == 0);
  auto report = (work_dir() / "oracle_report.json").string();
  CHECK(run("eval --data " + data.string() + " --self-oracle --out " + report) == 0);
  auto j = read_json_file(report);
  CHECK(j.at("self_oracle").get<bool>());
  CHECK(j.at("t30_jnd_fraction").get<double>() == 1.0);
  for (const auto& p : j.at("params")) {
    CHECK(p.at("aggregate").at("rmse").get<double>() == 0.0);
    if (!p.at("aggregate").at("r2").is_null())
      CHECK(p.at("aggregate").at("r2").get<double>() == 1.0);
  }
}

TEST_CASE("predict + reconstruct + analyze compose within tolerance") {
  // uniform-band exponential EDC, T60 = 0.5 s
  EdcMatrix m;
  m.length = 200;
  m.frame_dt = 0.0025;
  m.curves.resize(static_cast<std::size_t>(kNumBands) * m.length);
  for (int b = 0; b < kNumBands; ++b)
    for (int n = 0; n < m.length; ++n)
      m.row(b)[n] = std::pow(10.0, -6.0 * n * m.frame_dt / 0.5);
  auto edc_path = (work_dir() / "uniform.edc").string();
  write_edc_file(edc_path, m, 0);

  auto wav = (work_dir() / "uniform.wav").string();
  CHECK(run("reconstruct --edc " + edc_path + " --fs 16000 --seed 7 --out " + wav) == 0);
  auto out = (work_dir() / "uniform_params.json").string();
  CHECK(run("analyze --rir " + wav + " --json --out " + out) == 0);
  auto j = read_json_file(out);
  double t30 = j.at("bands")[0].at("t30_s").get<double>();
  CHECK(std::fabs(t30 - 0.5) / 0.5 < 0.10);
}

TEST_CASE("missing files and bad data exit with code 2") {
  CHECK(run("analyze --rir /nonexistent.bin") == 2);
  CHECK(run("train --data /nonexistent --out /tmp/ckpt_x") == 2);
  auto bad = work_dir() / "bad.bin";
  std::ofstream(bad.string()) << "not a rir";
  CHECK(run("analyze --rir " + bad.string()) == 2);
}
