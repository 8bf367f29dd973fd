// edcnet command-line front end: gen, simulate, analyze, train, predict,
// reconstruct, eval, report.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "edcnet/acoustics.hpp"
#include "edcnet/edc.hpp"
#include "edcnet/edc_file.hpp"
#include "edcnet/error.hpp"
#include "edcnet/eval.hpp"
#include "edcnet/io.hpp"
#include "edcnet/recon.hpp"
#include "edcnet/roomgen.hpp"
#include "edcnet/trainer.hpp"

namespace {

using namespace edcnet;

RoomConfig room_from_json(const nlohmann::json& j) {
  RoomConfig cfg;
  try {
    cfg.length_m = j.at("length").get<double>();
    cfg.width_m = j.at("width").get<double>();
    cfg.height_m = j.at("height").get<double>();
    auto s = j.at("source").get<std::vector<double>>();
    auto r = j.at("receiver").get<std::vector<double>>();
    if (s.size() != 3 || r.size() != 3)
      throw FormatError("room json: source/receiver must have 3 coordinates");
    cfg.source = {s[0], s[1], s[2]};
    cfg.receiver = {r[0], r[1], r[2]};
    if (j.contains("absorption")) {
      auto a = j.at("absorption").get<std::vector<double>>();
      if (a.size() == 1)
        cfg.absorption.fill(a[0]);
      else if (a.size() == kNumBands)
        std::copy(a.begin(), a.end(), cfg.absorption.begin());
      else
        throw FormatError("room json: absorption needs 1 or 24 values");
    } else {
      cfg.absorption.fill(0.3);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed room json: ") + e.what());
  }
  return cfg;
}

nlohmann::json band_params_json(const BandAcousticParams& p) {
  auto est = [](const DecayEstimate& e) -> nlohmann::json {
    switch (e.status) {
      case DecayStatus::ok:
        return e.seconds;
      case DecayStatus::insufficient_range:
        return "insufficient_range";
      default:
        return "degenerate_fit";
    }
  };
  return {{"band_hz", p.band_hz},
          {"edt_s", est(p.edt)},
          {"t20_s", est(p.t20)},
          {"t30_s", est(p.t30)},
          {"c50_db", p.c50.db},
          {"c50_clamped", p.c50.clamped}};
}

int cmd_gen(std::size_t count, std::uint64_t seed, const std::string& out, int fs,
            int edc_length, int max_order, unsigned threads) {
  Dataset ds = build_dataset(count, seed, fs, edc_length, max_order, threads);
  write_dataset(ds, out);
  std::cout << "wrote " << count << " rooms to " << out << " (L=" << edc_length
            << ", fs=" << fs << ")\n";
  return 0;
}

int cmd_simulate(const std::string& room_path, const std::string& out, int fs,
                 int max_order) {
  RoomConfig cfg = room_from_json(read_json_file(room_path));
  BandRirSet rirs = simulate_band_rirs(cfg, fs, max_order);
  std::vector<float> blob(rirs.signals.size());
  for (std::size_t i = 0; i < blob.size(); ++i)
    blob[i] = static_cast<float>(rirs.signals[i]);
  write_blob(out, {kNumBands, rirs.length, 1}, blob);
  std::cout << "simulated " << rirs.length << " samples x " << kNumBands
            << " bands (order " << rirs.max_order << ") -> " << out << "\n";
  return 0;
}

int cmd_analyze(const std::string& rir_path, int fs, bool as_json,
                const std::string& out) {
  nlohmann::json result;
  result["bands"] = nlohmann::json::array();
  if (rir_path.size() > 4 && rir_path.substr(rir_path.size() - 4) == ".wav") {
    int wav_fs = 0;
    auto sig = read_wav(rir_path, wav_fs);
    if (fs <= 0) fs = wav_fs;
    result["bands"].push_back(band_params_json(analyze_band(sig, fs, 0.0)));
    result["broadband"] = true;
  } else {
    BlobDims dims;
    auto blob = read_blob(rir_path, dims);
    if (dims.d0 != kNumBands || dims.d2 != 1)
      throw ShapeError("analyze: expected a (24, N, 1) band RIR file");
    std::vector<double> sig(dims.d1);
    for (int b = 0; b < kNumBands; ++b) {
      for (std::size_t i = 0; i < dims.d1; ++i)
        sig[i] = blob[static_cast<std::size_t>(b) * dims.d1 + i];
      result["bands"].push_back(band_params_json(analyze_band(sig, fs, kBandCenters[b])));
    }
    result["broadband"] = false;
  }
  result["sample_rate"] = fs;
  result["stamp"] = stamp_to_json(make_stamp({{"rir", rir_path}}, 0));
  if (!out.empty()) write_json_file(out, result);
  if (as_json || out.empty()) std::cout << result.dump(2) << "\n";
  return 0;
}

ModelConfig resolve_model_config(const std::string& preset, const std::string& file,
                                 int dataset_L) {
  ModelConfig mc;
  if (!file.empty())
    mc = ModelConfig::from_json(read_json_file(file));
  else
    mc = ModelConfig::preset(preset);
  if (dataset_L > 0 && mc.edc_length != dataset_L)
    throw ArgumentError("model edc_length " + std::to_string(mc.edc_length) +
                        " does not match dataset L=" + std::to_string(dataset_L) +
                        "; pick a matching preset or config");
  return mc;
}

int cmd_train(const std::string& data_dir, const std::string& out_dir,
              const std::string& config_file, const std::string& preset,
              const std::string& model_file, const std::string& resume_path,
              const CLI::App* sub) {
  Dataset ds = read_dataset(data_dir);
  TrainConfig tc;
  if (!config_file.empty()) tc = TrainConfig::from_json(read_json_file(config_file));
  // flags win over the config file
  auto over_i = [&](const char* name, int& dst) {
    if (sub->count(name)) dst = sub->get_option(name)->as<int>();
  };
  auto over_d = [&](const char* name, double& dst) {
    if (sub->count(name)) dst = sub->get_option(name)->as<double>();
  };
  over_i("--epochs", tc.epochs);
  over_i("--batch-size", tc.batch_size);
  over_d("--lr", tc.learning_rate);
  over_i("--patience", tc.patience);
  over_d("--alpha", tc.loss.alpha);
  over_i("--stride-k", tc.loss.stride_k);
  over_d("--epsilon", tc.loss.epsilon);
  if (sub->count("--seed")) tc.seed = sub->get_option("--seed")->as<std::uint64_t>();
  if (tc.loss.epsilon <= 0) throw ArgumentError("train: epsilon must be positive");
  tc.checkpoint_dir = out_dir;

  Checkpoint resume;
  bool has_resume = !resume_path.empty();
  if (has_resume) resume = load_checkpoint(resume_path);
  ModelConfig mc = has_resume ? resume.config
                              : resolve_model_config(preset, model_file, ds.manifest.edc_length);

  TrainResult res = train(ds, mc, tc, has_resume ? &resume : nullptr);
  std::cout << "trained " << res.log.train_loss.size() << " epochs, best epoch "
            << res.log.best_epoch << " (val loss " << res.log.best_val << "), "
            << "params " << res.best.params.size() << "\n"
            << "checkpoints in " << out_dir << "\n";
  return 0;
}

int cmd_predict(const std::string& ckpt_path, const std::string& features_path,
                const std::string& out) {
  Checkpoint ck = load_checkpoint(ckpt_path);
  Model<float> model = Model<float>::from_checkpoint(ck);
  nlohmann::json fj = read_json_file(features_path);

  FeatureVector raw{};
  double frame_dt = 0.0;
  int fs = ck.sample_rate > 0 ? ck.sample_rate : 16000;
  if (fj.contains("room")) {
    RoomConfig cfg = room_from_json(fj.at("room"));
    raw = featurize(cfg);
    frame_dt = static_cast<double>(rir_length_for(cfg, fs)) /
               (static_cast<double>(fs) * model.config().edc_length);
  } else if (fj.contains("features")) {
    auto v = fj.at("features").get<std::vector<double>>();
    if (v.size() != kNumFeatures)
      throw FormatError("features json: expected 16 raw feature values");
    std::copy(v.begin(), v.end(), raw.begin());
  } else {
    throw FormatError("features json: need a \"features\" array or a \"room\" object");
  }

  if (!ck.has_scaler)
    throw ValidationError("checkpoint carries no feature scaler; retrain with this tool");
  MinMaxScaler sc;
  std::copy(ck.scaler_min.begin(), ck.scaler_min.end(), sc.min.begin());
  std::copy(ck.scaler_max.begin(), ck.scaler_max.end(), sc.max.begin());
  FeatureVector scaled = sc.scale(raw);
  std::array<float, kNumFeatures> x{};
  for (int j = 0; j < kNumFeatures; ++j) x[j] = static_cast<float>(scaled[j]);

  if (frame_dt <= 0.0) {
    // Estimate the time axis from the features themselves: worst band-group
    // Eyring decay over the geometry they describe.
    double V = raw[0] * raw[1] * raw[2];
    double S = 2.0 * (raw[0] * raw[1] + raw[0] * raw[2] + raw[1] * raw[2]);
    double t60 = 0.0;
    for (int g = 0; g < 6; ++g) {
      double a = std::clamp(raw[10 + g], 1e-3, 0.999);
      t60 = std::max(t60, 0.161 * V / (-S * std::log(1.0 - a)));
    }
    double seconds = std::max(0.5, 1.5 * t60);
    frame_dt = seconds / model.config().edc_length;
  }

  auto pred = model.forward(std::span<const float>(x.data(), x.size()));
  EdcMatrix m;
  m.length = model.config().edc_length;
  m.frame_dt = frame_dt;
  m.curves.assign(pred.begin(), pred.end());
  write_edc_file(out, m, ck.seed);
  std::cout << "wrote " << kNumBands << " x " << m.length << " EDC prediction to "
            << out << "\n";
  return 0;
}

int cmd_reconstruct(const std::string& edc_path, int fs, std::uint64_t seed,
                    double stickiness, const std::string& out) {
  EdcMatrix m = read_edc_file(edc_path);
  RssConfig cfg{stickiness, seed};
  auto rir = reconstruct_rir(m, fs, cfg);
  write_wav(out, rir, fs);
  std::cout << "reconstructed " << rir.size() << " samples at " << fs << " Hz -> "
            << out << "\n";
  return 0;
}

int cmd_eval(const std::string& data_dir, const std::string& ckpt_path,
             const std::string& out, const std::string& plots_dir, bool self_oracle) {
  Dataset ds = read_dataset(data_dir);
  int fs = ds.manifest.sample_rate;
  EvalReport rep;
  std::vector<std::vector<float>> preds;
  if (self_oracle) {
    const std::size_t n_out =
        static_cast<std::size_t>(kNumBands) * ds.manifest.edc_length;
    for (std::size_t room : ds.manifest.test)
      preds.emplace_back(ds.edc_block(room), ds.edc_block(room) + n_out);
    rep = evaluate_predictions(preds, ds.manifest.test, ds, fs);
    rep.self_oracle = true;
  } else {
    if (ckpt_path.empty()) throw ArgumentError("eval: --ckpt required unless --self-oracle");
    Checkpoint ck = load_checkpoint(ckpt_path);
    Model<float> model = Model<float>::from_checkpoint(ck);
    for (std::size_t room : ds.manifest.test) {
      auto feats = ds.scaled_features(room);
      auto p = model.forward(std::span<const float>(feats.data(), feats.size()));
      preds.emplace_back(p.begin(), p.end());
    }
    rep = evaluate_predictions(preds, ds.manifest.test, ds, fs);
  }
  nlohmann::json j = rep.to_json();
  j["stamp"] = stamp_to_json(make_stamp({{"data", data_dir}, {"ckpt", ckpt_path}},
                                        ds.manifest.seed));
  write_json_file(out, j);
  if (!plots_dir.empty()) write_plot_data(rep, preds, ds.manifest.test, ds, plots_dir);
  const auto& t30 = rep.param("t30");
  std::cout << "evaluated " << rep.rooms_evaluated << " rooms; T30 headline RMSE "
            << t30.headline.rmse << " s, JND pass "
            << 100.0 * rep.t30_jnd_fraction << "%\n"
            << "report: " << out << "\n";
  return 0;
}

int cmd_report(const std::string& in, const std::string& format, const std::string& out) {
  nlohmann::json j = read_json_file(in);
  EvalReport rep = EvalReport::from_json(j);
  if (format != "md") throw ArgumentError("report: unsupported format " + format);
  std::string text = report_markdown(rep);
  if (out.empty())
    std::cout << text;
  else
    write_text_file(out, text);
  return 0;
}

// Close-match suggestion for mistyped flags, searched across all subcommands.
std::string suggest_flag(const CLI::App& app, const std::string& bad) {
  auto dist = [](const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      cur[0] = i;
      for (std::size_t j = 1; j <= b.size(); ++j)
        cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                           prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
      std::swap(prev, cur);
    }
    return prev[b.size()];
  };
  std::string best;
  std::size_t best_d = 4;  // only suggest close matches
  auto consider = [&](const CLI::App* scope) {
    for (const auto* opt : scope->get_options()) {
      for (const auto& name : opt->get_lnames()) {
        std::size_t d = dist(bad, "--" + name);
        if (d < best_d) {
          best_d = d;
          best = "--" + name;
        }
      }
    }
  };
  consider(&app);
  for (const auto* sub : app.get_subcommands(
           [](const CLI::App*) { return true; }))
    consider(sub);
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edcnet: shoebox EDC datasets, decay-curve prediction and RIR synthesis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", edcnet::tool_version());

  // gen
  auto* gen = app.add_subcommand("gen", "generate a room/EDC dataset");
  std::size_t gen_count = 100;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  int gen_fs = 16000, gen_L = 1000, gen_order = -1;
  unsigned gen_threads = 0;
  gen->add_option("--count", gen_count, "number of rooms")->required();
  gen->add_option("--seed", gen_seed, "global seed")->required();
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--fs", gen_fs, "sample rate (Hz)");
  gen->add_option("--edc-length", gen_L, "EDC samples per band");
  gen->add_option("--max-order", gen_order, "reflection order (-1 = auto)");
  gen->add_option("--threads", gen_threads, "worker threads (0 = auto)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate band RIRs for one room");
  std::string sim_room, sim_out;
  int sim_fs = 16000, sim_order = -1;
  sim->add_option("--room", sim_room, "room config JSON")->required();
  sim->add_option("--out", sim_out, "output band RIR file")->required();
  sim->add_option("--fs", sim_fs, "sample rate (Hz)");
  sim->add_option("--max-order", sim_order, "reflection order (-1 = auto)");

  // analyze
  auto* ana = app.add_subcommand("analyze", "acoustic parameters from a RIR file");
  std::string ana_rir, ana_out;
  int ana_fs = 16000;
  bool ana_json = false;
  ana->add_option("--rir", ana_rir, "band RIR .bin or mono .wav")->required();
  ana->add_option("--fs", ana_fs, "sample rate (Hz)");
  ana->add_flag("--json", ana_json, "print JSON to stdout");
  ana->add_option("--out", ana_out, "write JSON to file");

  // train
  auto* tr = app.add_subcommand("train", "train the EDC prediction model");
  std::string tr_data, tr_out, tr_config, tr_preset = "desk", tr_model, tr_resume;
  tr->add_option("--data", tr_data, "dataset directory")->required();
  tr->add_option("--out", tr_out, "checkpoint directory")->required();
  tr->add_option("--config", tr_config, "train config JSON");
  tr->add_option("--preset", tr_preset, "model preset: desk|tiny|gradcheck|paper9m");
  tr->add_option("--model-config", tr_model, "explicit model config JSON");
  tr->add_option("--resume", tr_resume, "resume from last.ckpt");
  tr->add_option("--epochs", "max epochs");
  tr->add_option("--batch-size", "mini-batch size");
  tr->add_option("--lr", "learning rate");
  tr->add_option("--patience", "early-stop patience (epochs)");
  tr->add_option("--seed", "training seed");
  tr->add_option("--alpha", "slope-penalty weight");
  tr->add_option("--stride-k", "slope stride in EDC samples");
  tr->add_option("--epsilon", "log floor");

  // predict
  auto* pr = app.add_subcommand("predict", "predict an EDC matrix from features");
  std::string pr_ckpt, pr_features, pr_out;
  pr->add_option("--ckpt", pr_ckpt, "checkpoint file")->required();
  pr->add_option("--features", pr_features, "features JSON")->required();
  pr->add_option("--out", pr_out, "output EDC file")->required();

  // reconstruct
  auto* rc = app.add_subcommand("reconstruct", "synthesize a RIR from an EDC file");
  std::string rc_edc, rc_out;
  int rc_fs = 16000;
  std::uint64_t rc_seed = 0;
  double rc_p = 0.9;
  rc->add_option("--edc", rc_edc, "EDC file")->required();
  rc->add_option("--fs", rc_fs, "audio sample rate (Hz)");
  rc->add_option("--seed", rc_seed, "sign-sequence seed");
  rc->add_option("--stickiness", rc_p, "RSS stickiness p");
  rc->add_option("--out", rc_out, "output wav")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  std::string ev_data, ev_ckpt, ev_out = "report.json", ev_plots;
  bool ev_self = false;
  ev->add_option("--data", ev_data, "dataset directory")->required();
  ev->add_option("--ckpt", ev_ckpt, "checkpoint file");
  ev->add_option("--out", ev_out, "report JSON path");
  ev->add_option("--plots", ev_plots, "directory for plot CSVs");
  ev->add_flag("--self-oracle", ev_self, "evaluate targets against themselves");

  // report
  auto* rp = app.add_subcommand("report", "render a report JSON");
  std::string rp_in, rp_format = "md", rp_out;
  rp->add_option("--in", rp_in, "report JSON")->required();
  rp->add_option("--format", rp_format, "output format (md)");
  rp->add_option("--out", rp_out, "output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ExtrasError& e) {
    std::cerr << e.what() << "\n";
    // pull the first unrecognized --flag out of the message and suggest
    std::string msg = e.what();
    std::size_t pos = msg.find("--");
    if (pos != std::string::npos) {
      std::size_t end = msg.find_first_of(" \n", pos);
      std::string hint = suggest_flag(app, msg.substr(pos, end - pos));
      if (!hint.empty()) std::cerr << "did you mean " << hint << "?\n";
    }
    std::cerr << "run with --help for usage\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\nrun with --help for usage\n";
    return 1;
  }

  try {
    if (gen->parsed())
      return cmd_gen(gen_count, gen_seed, gen_out, gen_fs, gen_L, gen_order, gen_threads);
    if (sim->parsed()) return cmd_simulate(sim_room, sim_out, sim_fs, sim_order);
    if (ana->parsed()) return cmd_analyze(ana_rir, ana_fs, ana_json, ana_out);
    if (tr->parsed())
      return cmd_train(tr_data, tr_out, tr_config, tr_preset, tr_model, tr_resume, tr);
    if (pr->parsed()) return cmd_predict(pr_ckpt, pr_features, pr_out);
    if (rc->parsed()) return cmd_reconstruct(rc_edc, rc_fs, rc_seed, rc_p, rc_out);
    if (ev->parsed()) return cmd_eval(ev_data, ev_ckpt, ev_out, ev_plots, ev_self);
    if (rp->parsed()) return cmd_report(rp_in, rp_format, rp_out);
  } catch (const edcnet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
