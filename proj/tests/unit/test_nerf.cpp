/*
 * Copyright 2026 The texnerf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <cstring>
#include <numbers>

#include "doctest.h"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "test_util.hpp"
#include "texnerf/nerf.hpp"

using namespace texnerf;
using namespace texnerf::nerf;
using Eigen::Vector3d;

namespace {

FieldConfig thousand_param_config() {
  FieldConfig cfg;
  cfg.trunk_depth = 2;
  cfg.trunk_width = 16;
  cfg.hue_tap = 1;
  cfg.sv_width = 16;
  cfg.encoding.l_pos = 4;
  cfg.encoding.l_dir = 2;
  return cfg;
}

std::vector<double> outputs_of(const RadianceField& f, const Vector3d& x, const Vector3d& d) {
  const auto s = field_forward(f, x, d);
  return {s.sigma, s.h, s.s, s.v};
}

}  // namespace

TEST_CASE("positional encoding layout") {
  CHECK(encoded_size(10, true) == 63);
  CHECK(encoded_size(4, true) == 27);
  CHECK(encoded_size(4, false) == 24);
  CHECK(encoded_size(0, true) == 3);
  const auto z = positional_encoding(Vector3d(Vector3d::Zero()), 2, true);
  REQUIRE(z.size() == 15);
  for (int c = 0; c < 3; ++c) CHECK(z(c) == 0.0);
  // Per component: x, then sin/cos pairs for each level.
  int sin_count = 0, cos_count = 0;
  for (int i = 3; i < 15; ++i) {
    if (z(i) == 0.0) ++sin_count;
    if (z(i) == 1.0) ++cos_count;
  }
  CHECK(sin_count == 6);
  CHECK(cos_count == 6);
}

TEST_CASE("positional encoding matches the direct formula") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector3d x(4 * uniform01(rng) - 2, 4 * uniform01(rng) - 2, 4 * uniform01(rng) - 2);
    const auto enc = positional_encoding(x, 10, true);
    // Collect expected values independent of the layout, then compare as multisets per level.
    for (int j = 0; j < 10; ++j) {
      for (int c = 0; c < 3; ++c) {
        const double arg = std::ldexp(std::numbers::pi, j) * x(c);
        bool found_sin = false, found_cos = false;
        for (int i = 0; i < enc.size(); ++i) {
          found_sin |= std::abs(enc(i) - std::sin(arg)) < 1e-11;
          found_cos |= std::abs(enc(i) - std::cos(arg)) < 1e-11;
        }
        CHECK(found_sin);
        CHECK(found_cos);
      }
    }
    Eigen::Matrix3Xd pts(3, 2);
    pts.col(0) = x;
    pts.col(1) = -x;
    const auto batch = positional_encoding(pts, 10, true);
    CHECK((batch.col(0) - enc).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("positional encoding Jacobian vs central differences") {
  Rng rng(2);
  for (int levels : {0, 1, 4, 10}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vector3d x(2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1);
      const auto jac = positional_encoding_jacobian(x, levels, true);
      const double h = 1e-7;
      for (int c = 0; c < 3; ++c) {
        Vector3d up = x, down = x;
        up(c) += h;
        down(c) -= h;
        const Eigen::VectorXd fd =
            (positional_encoding(up, levels, true) - positional_encoding(down, levels, true)) / (2 * h);
        for (int i = 0; i < fd.size(); ++i) {
          // Derivatives of level j scale with 2^j pi; compare relative to that scale.
          const double scale = std::max(1.0, std::abs(jac(i, c)));
          const double bound = std::ldexp(std::numbers::pi, std::max(levels - 1, 0));
          CHECK(std::abs(jac(i, c) - fd(i)) <= 1e-6 * std::max(scale, bound));
        }
      }
    }
  }
}

TEST_CASE("field parameter layout") {
  RadianceField f(thousand_param_config());
  std::size_t total = 0;
  for (const auto& t : f.tensors()) {
    CHECK(t.offset == total);
    total += t.size();
  }
  CHECK(total == f.parameter_count());
  CHECK(f.parameter_count() > 1000);
  CHECK(f.parameter_count() < 1500);
  CHECK(f.info("trunk.0.weight").cols == encoded_size(4, true));
  CHECK(RadianceField().parameter_count() == RadianceField(FieldConfig{}).parameter_count());

  FieldConfig bad;
  bad.hue_tap = 5;
  CHECK_THROWS_CODE(RadianceField{bad}, ErrorCode::kInvalidArgument);
  bad = {};
  bad.encoding.l_pos = -1;
  CHECK_THROWS_CODE(RadianceField{bad}, ErrorCode::kInvalidArgument);
}

TEST_CASE("initialization is seeded fan-in uniform") {
  RadianceField a(thousand_param_config()), b(thousand_param_config());
  a.initialize(5);
  b.initialize(5);
  CHECK(a.parameters() == b.parameters());
  b.initialize(6);
  CHECK(a.parameters() != b.parameters());
  for (const auto& t : a.tensors()) {
    const auto m = a.tensor(t.name);
    if (t.name.find("bias") != std::string::npos) {
      CHECK(m.cwiseAbs().maxCoeff() == 0.0);
    } else {
      CHECK(m.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / t.cols));
      CHECK(m.cwiseAbs().maxCoeff() > 0.5 * std::sqrt(6.0 / t.cols));
    }
  }
}

TEST_CASE("zero-initialized output layers give H = S = V = 0.5 and sigma = ln 2") {
  RadianceField f(thousand_param_config());
  f.initialize(3);
  f.zero_output_layers();
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto s = field_forward(f, Vector3d(uniform01(rng), uniform01(rng), uniform01(rng)),
                                 testsupport::random_direction(rng));
    CHECK(s.h == 0.5);
    CHECK(s.s == 0.5);
    CHECK(s.v == 0.5);
    CHECK(s.sigma == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
}

TEST_CASE("hue depends on position only and outputs are bounded") {
  RadianceField f(thousand_param_config());
  f.initialize(4);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const Vector3d x(2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1);
    const auto a = field_forward(f, x, testsupport::random_direction(rng));
    const auto b = field_forward(f, x, testsupport::random_direction(rng));
    CHECK(a.h == b.h);
    CHECK(a.sigma == b.sigma);
    for (const auto& s : {a, b}) {
      CHECK(s.sigma >= 0.0);
      CHECK(s.h > 0.0);
      CHECK(s.h < 1.0);
      CHECK(s.s > 0.0);
      CHECK(s.s < 1.0);
      CHECK(s.v > 0.0);
      CHECK(s.v < 1.0);
    }
  }
}

TEST_CASE("non-finite parameters are reported by name") {
  RadianceField f(thousand_param_config());
  f.initialize(1);
  f.tensor("density.weight")(0, 3) = std::nan("");
  try {
    field_forward(f, Vector3d(0, 0, 0), Vector3d(0, 0, 1));
    FAIL("expected kNonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonFinite);
    CHECK(std::string(e.what()).find("density.weight") != std::string::npos);
  }
  const auto batch = testsupport::random_batch(1, 4, 4);
  CHECK_THROWS_CODE(backward(f, batch), ErrorCode::kNonFinite);
}

TEST_CASE("field Jacobian vs central differences on a ~1e3-parameter instance") {
  RadianceField f(thousand_param_config());
  f.initialize(11);
  Rng rng(11);
  for (Eigen::Index i = 0; i < f.parameters().size(); ++i) f.parameters()(i) += 0.1 * (uniform01(rng) - 0.5);
  const Vector3d x(0.3, -0.2, 0.4);
  const Vector3d d = Vector3d(0.2, 0.5, -0.8).normalized();

  FieldCache cache;
  const auto out = field_forward(f, Eigen::Matrix3Xd(x), Eigen::Matrix3Xd(d), &cache);
  const double h = 1e-5;
  double worst = 0.0;
  for (int o = 0; o < 4; ++o) {
    FieldOutputs d_out{Eigen::RowVectorXd::Zero(1), Eigen::RowVectorXd::Zero(1), Eigen::RowVectorXd::Zero(1),
                       Eigen::RowVectorXd::Zero(1)};
    (o == 0 ? d_out.sigma : o == 1 ? d_out.h : o == 2 ? d_out.s : d_out.v)(0) = 1.0;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(f.parameters().size());
    field_backward(f, cache, out, d_out, grad);
    double row_scale = grad.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      const double saved = f.parameters()(i);
      f.parameters()(i) = saved + h;
      const double up = outputs_of(f, x, d)[o];
      f.parameters()(i) = saved - h;
      const double down = outputs_of(f, x, d)[o];
      f.parameters()(i) = saved;
      const double fd = (up - down) / (2 * h);
      const double scale = std::max({std::abs(fd), std::abs(grad(i)), 1e-3 * row_scale});
      worst = std::max(worst, std::abs(fd - grad(i)) / scale);
    }
  }
  MESSAGE("worst Jacobian relative error " << worst);
  CHECK(worst < 1e-5);
}

TEST_CASE("stratified sampling") {
  Rng rng(5);
  const auto one = stratified_sample(1.0, 2.0, 1, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0] >= 1.0);
  CHECK(one[0] < 2.0);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r(seed);
    const int n = 1 + static_cast<int>(seed % 17);
    const auto t = stratified_sample(0.5, 3.7, n, r);
    const double step = (3.7 - 0.5) / n;
    for (int i = 0; i < n; ++i) {
      CHECK(t[i] >= 0.5 + i * step - 1e-12);
      CHECK(t[i] < 0.5 + (i + 1) * step + 1e-12);
      if (i > 0) CHECK(t[i] > t[i - 1]);
    }
    Rng again(seed);
    CHECK(stratified_sample(0.5, 3.7, n, again) == t);
  }

  SUBCASE("per-bin means over 1e5 draws sit at the bin centres") {
    const int n = 8, draws = 100000;
    const double near = 1.0, far = 3.0, width = (far - near) / n;
    std::vector<double> sum(n, 0.0);
    Rng r(6);
    for (int k = 0; k < draws; ++k) {
      const auto t = stratified_sample(near, far, n, r);
      for (int i = 0; i < n; ++i) sum[i] += t[i];
    }
    const double sigma_mean = width / std::sqrt(12.0 * draws);
    for (int i = 0; i < n; ++i) {
      const double centre = near + (i + 0.5) * width;
      CHECK(std::abs(sum[i] / draws - centre) < 3.0 * sigma_mean);
    }
  }
  CHECK_THROWS_CODE(stratified_sample(2.0, 1.0, 4, rng), ErrorCode::kInvalidArgument);
  CHECK_THROWS_CODE(stratified_sample(1.0, 2.0, 0, rng), ErrorCode::kInvalidArgument);
  const auto mid = midpoint_sample(0.0, 1.0, 4);
  CHECK(mid == std::vector<double>{0.125, 0.375, 0.625, 0.875});
}

TEST_CASE("volume rendering examples") {
  SUBCASE("empty space") {
    const std::vector<double> sigma(5, 0.0), delta(5, 0.3);
    const std::vector<Vector3d> c(5, Vector3d(0.9, 0.8, 0.7));
    const auto r = volume_render_hsv(sigma, c, delta);
    CHECK(r.hsv == Vector3d::Zero());
    CHECK(r.opacity == 0.0);
    CHECK(r.transmittance.back() == 1.0);
  }
  SUBCASE("one sample with sigma delta = ln 2") {
    const std::vector<double> sigma{std::log(2.0) / 0.25}, delta{0.25};
    const std::vector<Vector3d> c{Vector3d(0.8, 0.6, 0.4)};
    const auto r = volume_render_hsv(sigma, c, delta);
    CHECK(r.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(r.hsv(0) - 0.4) < 1e-15);
    CHECK(std::abs(r.hsv(1) - 0.3) < 1e-15);
    CHECK(std::abs(r.hsv(2) - 0.2) < 1e-15);
  }
  SUBCASE("N = 4 random samples vs term-by-term oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> sigma(4), delta(4);
      std::vector<Vector3d> c(4);
      std::vector<std::array<double, 3>> ca(4);
      for (int i = 0; i < 4; ++i) {
        sigma[i] = 5.0 * uniform01(rng);
        delta[i] = 0.01 + 0.5 * uniform01(rng);
        c[i] = Vector3d(uniform01(rng), uniform01(rng), uniform01(rng));
        ca[i] = {c[i](0), c[i](1), c[i](2)};
      }
      const auto r = volume_render_hsv(sigma, c, delta);
      const auto ref = oracle::composite(sigma, ca, delta);
      for (int ch = 0; ch < 3; ++ch) CHECK(std::abs(r.hsv(ch) - ref.color[ch]) < 1e-12);
      for (int i = 0; i < 4; ++i) CHECK(std::abs(r.weights[i] - ref.weights[i]) < 1e-12);
      CHECK(std::abs(r.transmittance.back() - ref.escape) < 1e-12);
    }
  }
}

TEST_CASE("volume rendering invariants on random instances") {
  Rng rng(8);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 1 + static_cast<int>(uniform_index(rng, 64));
    std::vector<double> sigma(n), delta(n);
    std::vector<Vector3d> c(n);
    for (int i = 0; i < n; ++i) {
      sigma[i] = trial % 3 == 0 ? 100.0 * uniform01(rng) : 3.0 * uniform01(rng);
      delta[i] = 1e-3 + uniform01(rng);
      c[i] = Vector3d(uniform01(rng), uniform01(rng), uniform01(rng));
    }
    const auto r = volume_render_hsv(sigma, c, delta);
    double sum = 0.0;
    for (double w : r.weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(std::abs(sum + r.transmittance.back() - 1.0) < 1e-6);
    for (int ch = 0; ch < 3; ++ch) {
      CHECK(r.hsv(ch) >= 0.0);
      CHECK(r.hsv(ch) <= 1.0);
    }
  }
}

TEST_CASE("splitting an interval leaves the render unchanged") {
  Rng rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 10));
    std::vector<double> sigma(n), delta(n);
    std::vector<Vector3d> c(n);
    for (int i = 0; i < n; ++i) {
      sigma[i] = 4.0 * uniform01(rng);
      delta[i] = 0.05 + 0.3 * uniform01(rng);
      c[i] = Vector3d(uniform01(rng), uniform01(rng), uniform01(rng));
    }
    const auto k = static_cast<std::size_t>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    const double frac = 0.1 + 0.8 * uniform01(rng);
    auto s2 = sigma;
    auto d2 = delta;
    auto c2 = c;
    s2.insert(s2.begin() + static_cast<std::ptrdiff_t>(k) + 1, sigma[k]);
    c2.insert(c2.begin() + static_cast<std::ptrdiff_t>(k) + 1, c[k]);
    d2[k] = frac * delta[k];
    d2.insert(d2.begin() + static_cast<std::ptrdiff_t>(k) + 1, (1.0 - frac) * delta[k]);
    const auto a = volume_render_hsv(sigma, c, delta);
    const auto b = volume_render_hsv(s2, c2, d2);
    CHECK((a.hsv - b.hsv).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(a.transmittance.back() - b.transmittance.back()) < 1e-9);
  }
}

TEST_CASE("hue loss") {
  CHECK(hue_loss(0.3, 0.3) == 0.0);
  CHECK(std::abs(hue_loss(0.95, 0.05) - 0.1) < 1e-12);
  CHECK(hue_loss(0.0, 0.5) == 0.5);
  Rng rng(10);
  for (int i = 0; i < 10000; ++i) {
    const double a = uniform01(rng), b = uniform01(rng), k = 10.0 * uniform01(rng) - 5.0;
    const double l = hue_loss(a, b);
    CHECK(l >= 0.0);
    CHECK(l <= 0.5);
    CHECK(std::abs(l - hue_loss(b, a)) < 1e-12);
    const double as = a + k - std::floor(a + k), bs = b + k - std::floor(b + k);
    CHECK(std::abs(l - hue_loss(as, bs)) < 1e-12);
    CHECK(std::abs(l - oracle::cyclic(a, b)) < 1e-12);
  }
}

TEST_CASE("hue loss gradient branches") {
  // d/d(pred) is +1 on the direct branch for pred > gt, so d/d(gt) is -1.
  CHECK(hue_loss_grad(0.5, 0.2) == 1.0);
  CHECK(-hue_loss_grad(0.5, 0.2) == -1.0);
  // Delta = 0.7 wraps around: the sign flips.
  CHECK(hue_loss_grad(0.8, 0.1) == -1.0);
  CHECK(hue_loss_grad(0.1, 0.8) == 1.0);
  // Tie at |Delta| = 0.5 takes the unwrapped branch.
  CHECK(hue_loss_grad(0.75, 0.25) == 1.0);
  CHECK(hue_loss_grad(0.25, 0.75) == -1.0);
  CHECK(hue_loss_grad(0.4, 0.4) == 0.0);
}

TEST_CASE("total loss") {
  Eigen::Matrix3Xd a(3, 1), b(3, 1);
  a << 0.3, 0.5, 0.6;
  CHECK(total_loss(a, a).total == 0.0);
  b << 0.3, 0.4, 0.4;
  const auto t = total_loss(a, b);
  CHECK(std::abs(t.total - 0.05) < 1e-15);
  CHECK(t.hue == 0.0);
  CHECK(std::abs(t.sat - 0.01) < 1e-15);
  CHECK(std::abs(t.val - 0.04) < 1e-15);

  Rng rng(12);
  Eigen::Matrix3Xd p(3, 7), g(3, 7);
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 3; ++c) {
      p(c, r) = uniform01(rng);
      g(c, r) = uniform01(rng);
    }
  double ref = 0.0;
  for (int r = 0; r < 7; ++r) {
    ref += oracle::cyclic(p(0, r), g(0, r)) + (p(1, r) - g(1, r)) * (p(1, r) - g(1, r)) +
           (p(2, r) - g(2, r)) * (p(2, r) - g(2, r));
  }
  ref /= 7.0;
  const auto lt = total_loss(p, g);
  CHECK(std::abs(lt.total - ref) < 1e-12);
  CHECK(std::abs(lt.hue + lt.sat + lt.val - lt.total) < 1e-15);
  CHECK_THROWS_CODE(total_loss(Eigen::Matrix3Xd(3, 0), Eigen::Matrix3Xd(3, 0)), ErrorCode::kDimensionMismatch);
}

TEST_CASE("batch rendering agrees with single-ray compositing") {
  auto f = testsupport::tiny_field(3);
  const auto batch = testsupport::random_batch(3, 6, 12);
  const auto br = render_batch(f, batch);
  const auto step = backward(f, batch);
  for (int r = 0; r < batch.rays(); ++r) {
    std::vector<double> sigma, delta;
    std::vector<Vector3d> c;
    for (int i = 0; i < batch.samples(); ++i) {
      const Vector3d x = batch.origins.col(r) + batch.t_vals(i, r) * batch.directions.col(r);
      const auto s = field_forward(f, x, batch.directions.col(r));
      sigma.push_back(s.sigma);
      delta.push_back(batch.deltas(i, r));
      c.emplace_back(s.h, s.s, s.v);
    }
    const auto single = volume_render_hsv(sigma, c, delta);
    CHECK((single.hsv - br.hsv.col(r)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(single.opacity - br.opacity(r)) < 1e-12);
    CHECK((step.rendered.col(r) - br.hsv.col(r)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("backward at a zero-loss point is zero") {
  auto f = testsupport::tiny_field(4);
  auto batch = testsupport::random_batch(4, 16, 8);
  batch.gt_hsv = render_batch(f, batch).hsv;
  const auto step = backward(f, batch);
  CHECK(step.loss.total == 0.0);
  CHECK(step.gradient.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("full-model gradient check on tiny fields") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = testsupport::check_gradients(seed);
    CAPTURE(seed);
    MESSAGE("seed " << seed << ": max rel error " << r.max_rel_error << " (" << r.worst_tensor << "), "
                    << r.compared << "/" << r.parameters << " entries above floor");
    CHECK(r.max_rel_error < 1e-3);
    CHECK(r.compared > r.parameters / 2);
  }
}

TEST_CASE("ray batch validation") {
  auto batch = testsupport::random_batch(5, 4, 6);
  CHECK_NOTHROW(batch.validate());
  batch.directions(0, 1) += 1e-6;
  CHECK_THROWS_CODE(batch.validate(), ErrorCode::kInvariant);
  batch = testsupport::random_batch(5, 4, 6);
  batch.t_vals(3, 2) = batch.t_vals(2, 2);
  CHECK_THROWS_CODE(batch.validate(), ErrorCode::kInvariant);
  batch = testsupport::random_batch(5, 4, 6);
  for (int r = 0; r < 4; ++r) CHECK(batch.deltas(5, r) == doctest::Approx(2.5 - batch.t_vals(5, r)));
}

TEST_CASE("checkpoint round trip is bit exact") {
  testutil::TempDir dir("ckpt");
  Checkpoint ck;
  ck.field = thousand_param_config();
  RadianceField f(ck.field);
  f.initialize(9);
  ck.parameters = f.parameters();
  ck.parameters(0) = -0.0;
  ck.parameters(1) = 1e-310;
  ck.extra.push_back({"adam_m", 3, 2, {1, 2, 3, 4, 5, std::nextafter(1.0, 2.0)}});
  Rng rng(77);
  rng();
  ck.rng_state = rng_state(rng);
  ck.run_config = R"({"iterations": 5})";
  ck.iteration = 1234567;
  save_checkpoint(dir.path() / "a.bin", ck);
  const auto back = load_checkpoint(dir.path() / "a.bin");
  save_checkpoint(dir.path() / "b.bin", back);
  CHECK(testutil::read_file(dir.path() / "a.bin") == testutil::read_file(dir.path() / "b.bin"));
  CHECK(back.parameters.size() == ck.parameters.size());
  CHECK(std::memcmp(back.parameters.data(), ck.parameters.data(), sizeof(double) * ck.parameters.size()) == 0);
  CHECK(back.iteration == ck.iteration);
  CHECK(back.rng_state == ck.rng_state);
  CHECK(back.run_config == ck.run_config);
  REQUIRE(back.extra.size() == 1);
  CHECK(back.extra[0].values == ck.extra[0].values);
  const auto field = field_from_checkpoint(back);
  CHECK(field.parameters() == back.parameters);

  auto wrong = back;
  wrong.parameters.conservativeResize(10);
  CHECK_THROWS(field_from_checkpoint(wrong));
  testutil::write_file(dir.path() / "junk.bin", "not a checkpoint");
  CHECK_THROWS(load_checkpoint(dir.path() / "junk.bin"));
  CHECK_THROWS(load_checkpoint(dir.path() / "missing.bin"));
}
