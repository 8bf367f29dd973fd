#include "edcnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "edcnet/edc.hpp"
#include "edcnet/error.hpp"

namespace edcnet {

double r_squared(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size())
    throw ShapeError("r_squared: size mismatch");
  if (pred.size() < 2) throw ArgumentError("r_squared: need at least 2 points");
  double mean = 0;
  for (double t : target) mean += t;
  mean /= static_cast<double>(target.size());
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double r = target[i] - pred[i];
    double d = target[i] - mean;
    ss_res += r * r;
    ss_tot += d * d;
  }
  if (ss_tot <= 0) throw DomainError("r_squared: target variance is zero");
  return 1.0 - ss_res / ss_tot;
}

bool jnd_pass(double pred_t30, double true_t30) {
  if (true_t30 <= 0) throw DomainError("jnd_pass: reference T30 must be positive");
  return std::fabs(pred_t30 - true_t30) / true_t30 <= 0.05;
}

namespace {

// Everything the report needs from one EDC row.
struct RowParams {
  DecayEstimate edt, t20, t30;
  double c50 = 0;
  bool c50_ok = false;
};

RowParams extract_row_params(std::span<const float> row, double frame_dt, int fs,
                             int band) {
  std::vector<double> lin(row.begin(), row.end());
  RowParams p;
  auto db = to_db(lin);
  p.edt = edt(db, frame_dt);
  p.t20 = t20(db, frame_dt);
  p.t30 = t30(db, frame_dt);
  // Sub-frame early/late split needs a waveform; a fixed-seed reconstruction
  // keeps pred and target on one code path.
  double head = lin[0];
  if (head > 0) {
    for (double& v : lin) v /= head;
    RssConfig cfg{0.9, derive_seed(0, static_cast<std::uint64_t>(band))};
    try {
      auto sig = reconstruct_band(lin, frame_dt, fs, cfg);
      auto c = clarity_c50(sig, fs);
      if (!c.clamped) {
        p.c50 = c.db;
        p.c50_ok = true;
      }
    } catch (const Error&) {
      // zero-energy or too-short reconstruction; band stays excluded
    }
  }
  return p;
}

MetricBlock make_block(const std::vector<double>& pred, const std::vector<double>& target) {
  MetricBlock b;
  b.n = pred.size();
  if (pred.empty()) return b;
  double se = 0, ae = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - target[i];
    se += d * d;
    ae += std::fabs(d);
  }
  b.rmse = std::sqrt(se / static_cast<double>(pred.size()));
  b.mae = ae / static_cast<double>(pred.size());
  if (pred.size() >= 2) {
    double mean = 0;
    for (double t : target) mean += t;
    mean /= static_cast<double>(target.size());
    double ss_tot = 0;
    for (double t : target) ss_tot += (t - mean) * (t - mean);
    if (ss_tot > 0) b.r2 = 1.0 - se / ss_tot;
  }
  return b;
}

struct PairAccum {
  // [band] -> paired values
  std::vector<std::vector<double>> pred{kNumBands}, target{kNumBands};
  std::vector<ScatterPoint> scatter;
  std::size_t excluded = 0;

  void add(std::size_t room, int band, double p, double t) {
    pred[static_cast<std::size_t>(band)].push_back(p);
    target[static_cast<std::size_t>(band)].push_back(t);
    scatter.push_back({room, band, t, p});
  }

  ParamReport finalize(const std::string& name) const {
    ParamReport r;
    r.name = name;
    std::vector<double> all_p, all_t;
    for (int b = 0; b < kNumBands; ++b) {
      r.per_band.push_back(make_block(pred[b], target[b]));
      all_p.insert(all_p.end(), pred[b].begin(), pred[b].end());
      all_t.insert(all_t.end(), target[b].begin(), target[b].end());
    }
    r.aggregate = make_block(all_p, all_t);
    r.headline = r.per_band[kHeadlineBand];
    r.excluded = excluded;
    r.scatter = scatter;
    return r;
  }
};

}  // namespace

EvalReport evaluate_predictions(const std::vector<std::vector<float>>& predictions,
                                const std::vector<std::size_t>& rooms,
                                const Dataset& ds, int fs) {
  if (predictions.size() != rooms.size())
    throw ShapeError("evaluate: one prediction block per room required");
  if (rooms.empty()) throw ArgumentError("evaluate: empty test set");
  const int L = ds.manifest.edc_length;
  const std::size_t n_out = static_cast<std::size_t>(kNumBands) * L;

  PairAccum edt_acc, t20_acc, t30_acc, c50_acc;
  std::size_t jnd_total = 0, jnd_passed = 0;
  std::vector<double> mae_t(static_cast<std::size_t>(L), 0.0);
  std::vector<double> mse_t(static_cast<std::size_t>(L), 0.0);
  std::size_t curves = 0;

  for (std::size_t i = 0; i < rooms.size(); ++i) {
    std::size_t room = rooms[i];
    const auto& pred = predictions[i];
    if (pred.size() != n_out)
      throw ShapeError("evaluate: prediction block " + std::to_string(i) +
                       " has size " + std::to_string(pred.size()) + ", expected " +
                       std::to_string(n_out));
    double frame_dt = ds.manifest.frame_dt(room);
    for (int b = 0; b < kNumBands; ++b) {
      std::span<const float> prow(pred.data() + static_cast<std::size_t>(b) * L,
                                  static_cast<std::size_t>(L));
      std::span<const float> trow(ds.edc_row(room, b), static_cast<std::size_t>(L));
      RowParams pp = extract_row_params(prow, frame_dt, fs, b);
      RowParams tp = extract_row_params(trow, frame_dt, fs, b);

      auto pair_in = [&](PairAccum& acc, const DecayEstimate& p, const DecayEstimate& t) {
        if (p.valid() && t.valid())
          acc.add(room, b, p.seconds, t.seconds);
        else
          ++acc.excluded;
      };
      pair_in(edt_acc, pp.edt, tp.edt);
      pair_in(t20_acc, pp.t20, tp.t20);
      pair_in(t30_acc, pp.t30, tp.t30);
      if (pp.t30.valid() && tp.t30.valid()) {
        ++jnd_total;
        if (jnd_pass(pp.t30.seconds, tp.t30.seconds)) ++jnd_passed;
      }
      if (pp.c50_ok && tp.c50_ok)
        c50_acc.add(room, b, pp.c50, tp.c50);
      else
        ++c50_acc.excluded;

      // dB error curves with the training epsilon
      for (int t = 0; t < L; ++t) {
        double pd = 10.0 * std::log10(static_cast<double>(prow[t]) + kDbEpsilon);
        double td = 10.0 * std::log10(static_cast<double>(trow[t]) + kDbEpsilon);
        double d = pd - td;
        mae_t[static_cast<std::size_t>(t)] += std::fabs(d);
        mse_t[static_cast<std::size_t>(t)] += d * d;
      }
      ++curves;
    }
  }

  EvalReport rep;
  rep.rooms_evaluated = rooms.size();
  rep.params.push_back(edt_acc.finalize("edt"));
  rep.params.push_back(t20_acc.finalize("t20"));
  rep.params.push_back(t30_acc.finalize("t30"));
  rep.params.push_back(c50_acc.finalize("c50"));
  rep.t30_jnd_fraction =
      jnd_total > 0 ? static_cast<double>(jnd_passed) / static_cast<double>(jnd_total) : 0.0;
  rep.edc_mae_db.resize(static_cast<std::size_t>(L));
  rep.edc_rmse_db.resize(static_cast<std::size_t>(L));
  for (int t = 0; t < L; ++t) {
    rep.edc_mae_db[static_cast<std::size_t>(t)] = mae_t[static_cast<std::size_t>(t)] / static_cast<double>(curves);
    rep.edc_rmse_db[static_cast<std::size_t>(t)] =
        std::sqrt(mse_t[static_cast<std::size_t>(t)] / static_cast<double>(curves));
  }
  validate_report(rep);
  return rep;
}

EvalReport evaluate(Model<float>& model, const Dataset& ds, int fs) {
  std::vector<std::vector<float>> preds;
  preds.reserve(ds.manifest.test.size());
  for (std::size_t room : ds.manifest.test) {
    auto feats = ds.scaled_features(room);
    auto out = model.forward(std::span<const float>(feats.data(), feats.size()));
    preds.emplace_back(out.begin(), out.end());
  }
  return evaluate_predictions(preds, ds.manifest.test, ds, fs);
}

EvalReport evaluate_self_oracle(const Dataset& ds, int fs) {
  const std::size_t n_out = static_cast<std::size_t>(kNumBands) * ds.manifest.edc_length;
  std::vector<std::vector<float>> preds;
  for (std::size_t room : ds.manifest.test)
    preds.emplace_back(ds.edc_block(room), ds.edc_block(room) + n_out);
  auto rep = evaluate_predictions(preds, ds.manifest.test, ds, fs);
  rep.self_oracle = true;
  return rep;
}

const ParamReport& EvalReport::param(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return p;
  throw ArgumentError("report has no parameter " + name);
}

namespace {

nlohmann::json block_to_json(const MetricBlock& b) {
  nlohmann::json j{{"rmse", b.rmse}, {"mae", b.mae}, {"n", b.n}};
  if (b.r2)
    j["r2"] = *b.r2;
  else
    j["r2"] = nullptr;
  return j;
}

MetricBlock block_from_json(const nlohmann::json& j) {
  MetricBlock b;
  b.rmse = j.at("rmse").get<double>();
  b.mae = j.at("mae").get<double>();
  b.n = j.at("n").get<std::size_t>();
  if (!j.at("r2").is_null()) b.r2 = j.at("r2").get<double>();
  return b;
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["rooms_evaluated"] = rooms_evaluated;
  j["self_oracle"] = self_oracle;
  j["t30_jnd_fraction"] = t30_jnd_fraction;
  j["edc_mae_db"] = edc_mae_db;
  j["edc_rmse_db"] = edc_rmse_db;
  j["params"] = nlohmann::json::array();
  for (const auto& p : params) {
    nlohmann::json pj;
    pj["name"] = p.name;
    pj["aggregate"] = block_to_json(p.aggregate);
    pj["headline_1khz"] = block_to_json(p.headline);
    pj["excluded"] = p.excluded;
    pj["per_band"] = nlohmann::json::array();
    for (int b = 0; b < kNumBands; ++b) {
      nlohmann::json bj = block_to_json(p.per_band[static_cast<std::size_t>(b)]);
      bj["band_hz"] = kBandCenters[static_cast<std::size_t>(b)];
      pj["per_band"].push_back(bj);
    }
    nlohmann::json sc = nlohmann::json::array();
    for (const auto& s : p.scatter)
      sc.push_back({{"room", s.room}, {"band", s.band}, {"target", s.target}, {"pred", s.pred}});
    pj["scatter"] = sc;
    j["params"].push_back(pj);
  }
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    if (j.at("format_version").get<int>() != 1)
      throw VersionError("unsupported report format_version");
    r.rooms_evaluated = j.at("rooms_evaluated").get<std::size_t>();
    r.self_oracle = j.at("self_oracle").get<bool>();
    r.t30_jnd_fraction = j.at("t30_jnd_fraction").get<double>();
    r.edc_mae_db = j.at("edc_mae_db").get<std::vector<double>>();
    r.edc_rmse_db = j.at("edc_rmse_db").get<std::vector<double>>();
    for (const auto& pj : j.at("params")) {
      ParamReport p;
      p.name = pj.at("name").get<std::string>();
      p.aggregate = block_from_json(pj.at("aggregate"));
      p.headline = block_from_json(pj.at("headline_1khz"));
      p.excluded = pj.at("excluded").get<std::size_t>();
      for (const auto& bj : pj.at("per_band")) p.per_band.push_back(block_from_json(bj));
      for (const auto& sj : pj.at("scatter"))
        p.scatter.push_back({sj.at("room").get<std::size_t>(), sj.at("band").get<int>(),
                             sj.at("target").get<double>(), sj.at("pred").get<double>()});
      r.params.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
  validate_report(r);
  return r;
}

void validate_report(const EvalReport& r) {
  if (r.t30_jnd_fraction < 0 || r.t30_jnd_fraction > 1)
    throw ValidationError("report: JND fraction outside [0,1]");
  for (const auto& p : r.params) {
    auto check = [&](const MetricBlock& b) {
      if (b.n == 0) return;
      if (b.rmse < 0 || b.mae < 0 || b.rmse + 1e-12 < b.mae)
        throw ValidationError("report: " + p.name + " violates RMSE >= MAE >= 0");
      if (b.r2 && *b.r2 > 1.0 + 1e-12)
        throw ValidationError("report: " + p.name + " has R^2 > 1");
    };
    check(p.aggregate);
    check(p.headline);
    for (const auto& b : p.per_band) check(b);
  }
}

void write_plot_data(const EvalReport& r, const std::vector<std::vector<float>>& predictions,
                     const std::vector<std::size_t>& rooms, const Dataset& ds,
                     const std::string& dir) {
  std::filesystem::create_directories(dir);
  const int L = ds.manifest.edc_length;
  {
    std::ofstream f(dir + "/edc_error.csv");
    f << "sample_index,mae_db,rmse_db\n";
    for (int t = 0; t < L; ++t)
      f << t << "," << r.edc_mae_db[static_cast<std::size_t>(t)] << ","
        << r.edc_rmse_db[static_cast<std::size_t>(t)] << "\n";
  }
  auto write_scatter = [&](const std::string& name, const ParamReport& p) {
    std::ofstream f(dir + "/" + name);
    f << "room,band_hz,target,pred\n";
    for (const auto& s : p.scatter)
      f << s.room << "," << kBandCenters[static_cast<std::size_t>(s.band)] << ","
        << s.target << "," << s.pred << "\n";
  };
  write_scatter("t30_scatter.csv", r.param("t30"));
  write_scatter("edt_scatter.csv", r.param("edt"));
  {
    std::ofstream f(dir + "/edc_examples.csv");
    f << "room,band_hz,sample_index,target_db,pred_db\n";
    std::size_t n_examples = std::min<std::size_t>(3, rooms.size());
    const int example_bands[3] = {0, kHeadlineBand, 19};  // 100 Hz, 1 kHz, 8 kHz
    for (std::size_t i = 0; i < n_examples; ++i) {
      for (int b : example_bands) {
        const float* prow = predictions[i].data() + static_cast<std::size_t>(b) * L;
        const float* trow = ds.edc_row(rooms[i], b);
        for (int t = 0; t < L; ++t) {
          double pd = 10.0 * std::log10(static_cast<double>(prow[t]) + kDbEpsilon);
          double td = 10.0 * std::log10(static_cast<double>(trow[t]) + kDbEpsilon);
          f << rooms[i] << "," << kBandCenters[static_cast<std::size_t>(b)] << "," << t
            << "," << td << "," << pd << "\n";
        }
      }
    }
  }
}

std::string report_markdown(const EvalReport& r) {
  std::ostringstream os;
  os.precision(3);
  os << "# Evaluation summary (" << r.rooms_evaluated << " test rooms)\n\n";
  os << "Headline values use the 1 kHz band.\n\n";
  os << "| Parameter | RMSE | MAE | R^2 |\n|---|---|---|---|\n";
  struct RowDef {
    const char* label;
    const char* name;
  };
  const RowDef rows[] = {{"EDT (s)", "edt"}, {"T20 (s)", "t20"}, {"T30 (s)", "t30"},
                         {"C50 (dB)", "c50"}};
  for (const auto& row : rows) {
    const auto& h = r.param(row.name).headline;
    os << "| " << row.label << " | " << h.rmse << " | " << h.mae << " | ";
    if (h.r2)
      os << *h.r2;
    else
      os << "n/a";
    os << " |\n";
  }
  os << "\nT30 within 5% JND: " << 100.0 * r.t30_jnd_fraction << "% of band/room pairs\n";
  os << "\n## Aggregate over all 24 bands\n\n";
  os << "| Parameter | RMSE | MAE | R^2 | pairs | excluded |\n|---|---|---|---|---|---|\n";
  for (const auto& row : rows) {
    const auto& p = r.param(row.name);
    os << "| " << row.label << " | " << p.aggregate.rmse << " | " << p.aggregate.mae
       << " | ";
    if (p.aggregate.r2)
      os << *p.aggregate.r2;
    else
      os << "n/a";
    os << " | " << p.aggregate.n << " | " << p.excluded << " |\n";
  }
  return os.str();
}

}  // namespace edcnet
