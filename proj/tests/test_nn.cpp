#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "edcnet/loss.hpp"
#include "edcnet/nn.hpp"
#include "edcnet/rng.hpp"

using namespace edcnet;
namespace fs = std::filesystem;

namespace {

// Central-difference derivative of a scalar function of one buffer entry.
template <typename F>
double central_diff(std::vector<double>& x, std::size_t i, F&& f, double h = 1e-4) {
  double keep = x[i];
  x[i] = keep + h;
  double up = f();
  x[i] = keep - h;
  double dn = f();
  x[i] = keep;
  return (up - dn) / (2 * h);
}

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-6});
}

}  // namespace

TEST_CASE("dense forward: identity and a hand example") {
  std::vector<double> w{1, 0, 0, 1}, b{0, 0}, x{3, -2}, y(2);
  layers::dense_forward<double>(x, w, b, y, 2, 2);
  CHECK(y[0] == 3.0);
  CHECK(y[1] == -2.0);

  std::vector<double> w2{1, 1, 0, 1}, b2{0, 1}, x2{1, 2};
  layers::dense_forward<double>(x2, w2, b2, y, 2, 2);
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 3.0);
}

TEST_CASE("dense shape mismatch names both shapes") {
  std::vector<double> w(6), b(3), x(4), y(3);
  try {
    layers::dense_forward<double>(x, w, b, y, 2, 3);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    std::string msg = e.what();
    CHECK(msg.find("x[4]") != std::string::npos);
    CHECK(msg.find("3x2") != std::string::npos);
  }
}

TEST_CASE("dense backward matches finite differences") {
  Rng rng(3);
  int in = 5, out = 4;
  std::vector<double> w(in * out), b(out), x(in);
  for (auto& v : w) v = rng.uniform(-1, 1);
  for (auto& v : b) v = rng.uniform(-1, 1);
  for (auto& v : x) v = rng.uniform(-1, 1);
  std::vector<double> c(out);
  for (auto& v : c) v = rng.uniform(-1, 1);

  // scalar objective L = sum_i c_i y_i + 0.5 sum_i y_i^2
  auto objective = [&]() {
    std::vector<double> y(out);
    layers::dense_forward<double>(x, w, b, y, in, out);
    double L = 0;
    for (int i = 0; i < out; ++i) L += c[i] * y[i] + 0.5 * y[i] * y[i];
    return L;
  };
  std::vector<double> y(out);
  layers::dense_forward<double>(x, w, b, y, in, out);
  std::vector<double> gy(out);
  for (int i = 0; i < out; ++i) gy[i] = c[i] + y[i];
  std::vector<double> gx(in), gw(in * out, 0.0), gb(out, 0.0);
  layers::dense_backward<double>(gy, x, w, gx, gw, gb, in, out);

  for (std::size_t i = 0; i < w.size(); ++i)
    CHECK(rel_err(gw[i], central_diff(w, i, objective)) < 1e-6);
  for (std::size_t i = 0; i < b.size(); ++i)
    CHECK(rel_err(gb[i], central_diff(b, i, objective)) < 1e-6);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(rel_err(gx[i], central_diff(x, i, objective)) < 1e-6);
}

TEST_CASE("conv1d forward: delta kernel id and a hand example") {
  std::vector<double> x{1, 2, 3}, y(3);
  std::vector<double> delta{0, 1, 0}, b{0};
  layers::conv1d_forward<double>(x, delta, b, y, 1, 1, 3, 3);
  CHECK(y == std::vector<double>{1, 2, 3});

  std::vector<double> box{1, 1, 1};
  layers::conv1d_forward<double>(x, box, b, y, 1, 1, 3, 3);
  CHECK(y == std::vector<double>{3, 6, 5});
}

TEST_CASE("conv1d backward matches finite differences") {
  Rng rng(9);
  int cin = 3, cout = 2, k = 5, t = 7;
  std::vector<double> x(cin * t), kw(cout * cin * k), b(cout);
  for (auto& v : x) v = rng.uniform(-1, 1);
  for (auto& v : kw) v = rng.uniform(-1, 1);
  for (auto& v : b) v = rng.uniform(-1, 1);
  auto objective = [&]() {
    std::vector<double> y(cout * t);
    layers::conv1d_forward<double>(x, kw, b, y, cin, cout, k, t);
    double L = 0;
    for (double v : y) L += 0.5 * v * v;
    return L;
  };
  std::vector<double> y(cout * t);
  layers::conv1d_forward<double>(x, kw, b, y, cin, cout, k, t);
  std::vector<double> gx(x.size()), gk(kw.size(), 0.0), gb(b.size(), 0.0);
  layers::conv1d_backward<double>(y, x, kw, gx, gk, gb, cin, cout, k, t);

  for (std::size_t i = 0; i < kw.size(); ++i)
    CHECK(rel_err(gk[i], central_diff(kw, i, objective)) < 1e-6);
  for (std::size_t i = 0; i < b.size(); ++i)
    CHECK(rel_err(gb[i], central_diff(b, i, objective)) < 1e-6);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(rel_err(gx[i], central_diff(x, i, objective)) < 1e-6);
}

TEST_CASE("interpolation: midpoint, identity, endpoints") {
  std::vector<double> x{0, 1}, y3(3);
  layers::interp_upsample<double>(x, y3, 1, 2, 3);
  CHECK(y3 == std::vector<double>{0, 0.5, 1});

  std::vector<double> x5{3, 1, 4, 1, 5}, same(5);
  layers::interp_upsample<double>(x5, same, 1, 5, 5);
  CHECK(same == x5);

  std::vector<double> big(11);
  layers::interp_upsample<double>(x5, big, 1, 5, 11);
  CHECK(big.front() == 3.0);
  CHECK(big.back() == 5.0);

  std::vector<double> bad(1);
  CHECK_THROWS_AS(layers::interp_upsample<double>(x5, bad, 1, 5, 1), ArgumentError);
}

TEST_CASE("interpolation backward is the exact transpose") {
  Rng rng(17);
  int c = 2, tin = 6, tout = 13;
  std::vector<double> x(c * tin);
  for (auto& v : x) v = rng.uniform(-1, 1);
  auto objective = [&]() {
    std::vector<double> y(c * tout);
    layers::interp_upsample<double>(x, y, c, tin, tout);
    double L = 0;
    for (double v : y) L += 0.5 * v * v;
    return L;
  };
  std::vector<double> y(c * tout);
  layers::interp_upsample<double>(x, y, c, tin, tout);
  std::vector<double> gx(x.size());
  layers::InterpPlan<double> plan(tin, tout);
  plan.backward(y, gx, c);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(rel_err(gx[i], central_diff(x, i, objective)) < 1e-6);
}

TEST_CASE("activations") {
  std::vector<double> x{0.0, -1.0, 2.0}, y(3);
  layers::sigmoid_forward<double>(x, y);
  CHECK(y[0] == 0.5);
  layers::relu_forward<double>(x, y);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.0);
  CHECK(y[2] == 2.0);
}

TEST_CASE("sigmoid output stays strictly inside (0,1)") {
  std::vector<float> x{-200.0f, -50.0f, 0.0f, 50.0f, 200.0f}, y(5);
  layers::sigmoid_forward<float>(x, y);
  for (float v : y) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }
}

TEST_CASE("sigmoid backward matches finite differences") {
  Rng rng(23);
  std::vector<double> x(9);
  for (auto& v : x) v = rng.uniform(-3, 3);
  auto objective = [&]() {
    std::vector<double> y(x.size());
    layers::sigmoid_forward<double>(x, y);
    double L = 0;
    for (double v : y) L += 0.5 * v * v;
    return L;
  };
  std::vector<double> y(x.size()), gx(x.size());
  layers::sigmoid_forward<double>(x, y);
  layers::sigmoid_backward<double>(y, y, gx);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(rel_err(gx[i], central_diff(x, i, objective)) < 1e-6);
}

TEST_CASE("parameter counts match hand counts") {
  CHECK(Model<float>(ModelConfig::gradcheck()).count_params() == 880);
  // 4352 + 131584 + 4104000 + 20544 + 10272 + 3864
  CHECK(Model<float>(ModelConfig::desk()).count_params() == 4274616);
  std::size_t paper = Model<float>(ModelConfig::paper9m()).count_params();
  CHECK(paper == 8918942);  // ~9e6, the full-scale operating point
  CHECK(paper > 8000000);
  CHECK(paper < 10000000);
}

TEST_CASE("model forward is deterministic and bounded") {
  ModelConfig cfg = ModelConfig::gradcheck();
  cfg.init_seed = 7;
  Model<float> m1(cfg), m2(cfg);
  std::vector<float> x(16);
  Rng rng(2);
  for (auto& v : x) v = static_cast<float>(rng.uniform(0, 1));
  auto y1 = m1.forward(x);
  auto y2 = m2.forward(x);
  REQUIRE(y1.size() == 24 * 20);
  for (std::size_t i = 0; i < y1.size(); ++i) {
    CHECK(y1[i] == y2[i]);
    CHECK(y1[i] > 0.0f);
    CHECK(y1[i] < 1.0f);
  }
  auto again = m1.forward(x);
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i] == y2[i]);
}

TEST_CASE("output shape follows the config over random variants") {
  Rng rng(41);
  for (int trial = 0; trial < 8; ++trial) {
    ModelConfig cfg;
    cfg.edc_length = 16 + static_cast<int>(rng.next_below(48));
    cfg.encoder_hidden = {4 + static_cast<int>(rng.next_below(12))};
    cfg.latent_channels = 2 + static_cast<int>(rng.next_below(6));
    cfg.latent_length = 2 + static_cast<int>(rng.next_below(6));
    int mid = cfg.latent_length + static_cast<int>(rng.next_below(
                  static_cast<std::uint64_t>(cfg.edc_length - cfg.latent_length)));
    cfg.conv_channels = {3 + static_cast<int>(rng.next_below(5)),
                         3 + static_cast<int>(rng.next_below(5)), 24};
    cfg.upsample_lengths = {mid, cfg.edc_length, cfg.edc_length};
    cfg.kernel_size = 3;
    cfg.init_seed = rng.next_u64();
    Model<double> m(cfg);
    std::vector<double> x(16);
    for (auto& v : x) v = rng.uniform(0, 1);
    auto t = m.predict(x);
    CHECK(t.shape == std::vector<std::size_t>{24, static_cast<std::size_t>(cfg.edc_length)});
    for (double v : t.data) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("non-finite activations raise a diagnostic naming the layer") {
  Model<float> m(ModelConfig::gradcheck());
  m.params()[0] = std::numeric_limits<float>::quiet_NaN();
  std::vector<float> x(16, 0.5f);
  try {
    m.forward(x);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("dense0") != std::string::npos);
  }
}

TEST_CASE("checkpoint round trip preserves parameters and predictions") {
  ModelConfig cfg = ModelConfig::gradcheck();
  cfg.init_seed = 99;
  Model<float> m(cfg);
  std::vector<float> x(16, 0.25f);
  auto before = m.forward(x);
  std::vector<float> ref(before.begin(), before.end());

  auto path = (fs::temp_directory_path() / "edcnet_nn_ckpt.bin").string();
  save_checkpoint(m.to_checkpoint(), path);
  Checkpoint ck = load_checkpoint(path);
  Model<float> loaded = Model<float>::from_checkpoint(ck);
  CHECK(std::equal(m.params().begin(), m.params().end(), loaded.params().begin()));
  auto after = loaded.forward(x);
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(after[i] == ref[i]);
}

TEST_CASE("corrupt checkpoints raise distinct errors") {
  ModelConfig cfg = ModelConfig::gradcheck();
  Model<float> m(cfg);
  auto dir = fs::temp_directory_path();
  auto path = (dir / "edcnet_nn_bad.bin").string();
  save_checkpoint(m.to_checkpoint(), path);

  {  // bad magic
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXXXXXX", 8);
  }
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);

  save_checkpoint(m.to_checkpoint(), path);
  fs::resize_file(path, fs::file_size(path) - 12);
  CHECK_THROWS_AS(load_checkpoint(path), TruncatedError);

  // config/params disagreement
  Checkpoint ck = m.to_checkpoint();
  ck.params.pop_back();
  save_checkpoint(ck, (dir / "edcnet_nn_short.bin").string());
  Checkpoint shorter = load_checkpoint((dir / "edcnet_nn_short.bin").string());
  CHECK_THROWS_AS(Model<float>::from_checkpoint(shorter), ShapeError);
}

TEST_CASE("end-to-end gradients on the gradcheck preset") {
  ModelConfig cfg = ModelConfig::gradcheck();
  cfg.init_seed = 5;
  Model<double> m(cfg);
  Rng rng(6);
  std::vector<double> x(16);
  for (auto& v : x) v = rng.uniform(0, 1);
  const std::size_t n_out = 24 * 20;
  std::vector<double> target(n_out);
  for (auto& v : target) v = rng.uniform(1e-6, 1.0);
  LossConfig lc;
  lc.stride_k = 5;

  auto objective = [&]() {
    auto y = m.forward(x);
    return static_cast<double>(composite_loss<double>(y, target, 24, 20, lc).total);
  };

  auto y = m.forward(x);
  std::vector<double> g(n_out);
  composite_loss<double>(y, target, 24, 20, lc, g);
  m.zero_grad();
  m.backward(g);

  std::vector<double> analytic(m.grads().begin(), m.grads().end());
  std::span<double> params = m.params();
  double worst = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    double keep = params[i];
    params[i] = keep + 1e-4;
    double up = objective();
    params[i] = keep - 1e-4;
    double dn = objective();
    params[i] = keep;
    double fd = (up - dn) / 2e-4;
    worst = std::max(worst, rel_err(analytic[i], fd));
  }
  CHECK(worst < 1e-3);
}
