#ifndef EDCNET_EVAL_HPP
#define EDCNET_EVAL_HPP

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edcnet/nn.hpp"
#include "edcnet/recon.hpp"
#include "edcnet/roomgen.hpp"

namespace edcnet {

// 1 kHz, the headline band for single-row summaries.
constexpr int kHeadlineBand = 10;

double r_squared(std::span<const double> pred, std::span<const double> target);

// 5% just-noticeable-difference criterion on reverberation time.
bool jnd_pass(double pred_t30, double true_t30);

struct MetricBlock {
  double rmse = 0, mae = 0;
  std::optional<double> r2;  // empty when target variance is zero
  std::size_t n = 0;
};

struct ScatterPoint {
  std::size_t room;
  int band;
  double target, pred;
};

struct ParamReport {
  std::string name;
  std::vector<MetricBlock> per_band;  // 24 entries
  MetricBlock aggregate;              // pooled over bands
  MetricBlock headline;               // 1 kHz band
  std::size_t excluded = 0;           // pairs dropped for flagged fits
  std::vector<ScatterPoint> scatter;
};

struct EvalReport {
  std::vector<ParamReport> params;  // edt, t20, t30, c50
  double t30_jnd_fraction = 0;
  std::size_t rooms_evaluated = 0;
  std::vector<double> edc_mae_db, edc_rmse_db;  // per EDC sample
  bool self_oracle = false;

  const ParamReport& param(const std::string& name) const;
  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

// Throws ValidationError when invariants (R^2 <= 1, RMSE >= MAE >= 0,
// JND fraction in [0,1]) do not hold.
void validate_report(const EvalReport& r);

// Core evaluation: predictions[i] is a 24 x L block for test room rooms[i].
// Parameters are extracted from predicted and target EDCs through the same
// estimator; C50 comes from an RSS reconstruction with a fixed seed on both
// sides.
EvalReport evaluate_predictions(const std::vector<std::vector<float>>& predictions,
                                const std::vector<std::size_t>& rooms,
                                const Dataset& ds, int fs);

EvalReport evaluate(Model<float>& model, const Dataset& ds, int fs);

// Targets-as-predictions determinism check; must come out exact.
EvalReport evaluate_self_oracle(const Dataset& ds, int fs);

// Plot data for the figure analogues (edc_error.csv, t30_scatter.csv,
// edt_scatter.csv, edc_examples.csv).
void write_plot_data(const EvalReport& r, const std::vector<std::vector<float>>& predictions,
                     const std::vector<std::size_t>& rooms, const Dataset& ds,
                     const std::string& dir);

// Table-2-style markdown summary.
std::string report_markdown(const EvalReport& r);

}  // namespace edcnet

#endif
