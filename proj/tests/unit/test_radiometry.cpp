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
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"
#include "texnerf/radiometry.hpp"

using namespace texnerf;
using namespace texnerf::radiometry;

namespace {

SpectralLibrary parse(const std::string& text) {
  std::istringstream in(text);
  return parse_spectral_library(in, "mem.csv");
}

std::string error_text(const std::string& csv) {
  try {
    parse(csv);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("constants are the CODATA 2018 exact values") {
  CHECK(PhysicalConstants::h == 6.62607015e-34);
  CHECK(PhysicalConstants::c == 2.99792458e8);
  CHECK(PhysicalConstants::k_B == 1.380649e-23);
}

TEST_CASE("wavenumber grid invariants") {
  CHECK_THROWS_CODE(WavenumberGrid({1e5}), ErrorCode::kInvariant);
  CHECK_THROWS_CODE(WavenumberGrid({1e5, 1e5}), ErrorCode::kInvariant);
  CHECK_THROWS_CODE(WavenumberGrid({2e5, 1e5}), ErrorCode::kInvariant);
  CHECK_THROWS_CODE(WavenumberGrid({-1.0, 1e5}), ErrorCode::kInvariant);
  const auto g = WavenumberGrid::uniform(8e4, 1.4e5, 101);
  CHECK(g.size() == 101);
  CHECK(g.front() == 8e4);
  CHECK(g.back() == 1.4e5);
  const std::vector<double> cm = {800.0, 1400.0};
  const auto si = WavenumberGrid::from_per_cm(cm);
  CHECK(si[0] == doctest::Approx(8e4));
  CHECK(si[1] == doctest::Approx(1.4e5));
}

TEST_CASE("planck_radiance at T -> 0+ vanishes") {
  CHECK(planck_radiance(1e5, 1e-3) == 0.0);
  CHECK(planck_radiance(1e5, 1.0) < 1e-20);
}

TEST_CASE("planck_radiance is monotone in T") {
  CHECK(planck_radiance(1e5, 310.0) > planck_radiance(1e5, 300.0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> nu(1e4, 5e5), t(1.0, 5000.0);
  for (int i = 0; i < 2000; ++i) {
    const double n = nu(rng);
    double t1 = t(rng), t2 = t(rng);
    if (t1 == t2) continue;
    if (t1 > t2) std::swap(t1, t2);
    if (planck_radiance(n, t1) == 0.0) continue;
    CHECK(planck_radiance(n, t2) > planck_radiance(n, t1));
  }
}

TEST_CASE("planck_radiance matches 50-digit evaluation to 12 significant digits") {
  const double ours = planck_radiance(1e5, 300.0);
  const double ref = oracle::planck_d(1e5, 300.0);
  CHECK(std::abs(ours - ref) / ref < 5e-13);
  for (double nu : {8e4, 1e5, 1.2e5, 1.4e5, 3e5}) {
    for (double t : {77.0, 250.0, 300.0, 1000.0, 4000.0}) {
      const double r = oracle::planck_d(nu, t);
      CHECK(std::abs(planck_radiance(nu, t) - r) / r < 5e-13);
    }
  }
}

TEST_CASE("planck_radiance domain errors") {
  CHECK_THROWS_CODE(planck_radiance(0.0, 300.0), ErrorCode::kDomain);
  CHECK_THROWS_CODE(planck_radiance(-1.0, 300.0), ErrorCode::kDomain);
  CHECK_THROWS_CODE(planck_radiance(1e5, 0.0), ErrorCode::kDomain);
  CHECK_THROWS_CODE(planck_radiance(1e5, -5.0), ErrorCode::kDomain);
}

TEST_CASE("planck_radiance_dt matches the analytic derivative of the oracle") {
  for (double t : {200.0, 300.0, 700.0}) {
    const oracle::Real h("1e-6");
    const oracle::Real tt(t);
    const auto fd = (oracle::planck(oracle::Real(1e5), tt + h) - oracle::planck(oracle::Real(1e5), tt - h)) / (2 * h);
    const double ref = static_cast<double>(fd);
    CHECK(std::abs(planck_radiance_dt(1e5, t) - ref) / ref < 1e-10);
  }
}

TEST_CASE("planck_inverse round trips") {
  CHECK(std::abs(planck_inverse(1e5, planck_radiance(1e5, 300.0)) - 300.0) < 1e-9);
  CHECK(std::abs(planck_inverse(1.2e5, oracle::planck_d(1.2e5, 350.0)) - 350.0) < 1e-9);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> nu(1e4, 5e5), logt(std::log(10.0), std::log(5000.0));
  for (int i = 0; i < 5000; ++i) {
    const double n = nu(rng), t = std::exp(logt(rng));
    const double b = planck_radiance(n, t);
    if (b == 0.0 || b < 1e-290) continue;
    CHECK(std::abs(planck_inverse(n, b) - t) / t < 1e-9);
    CHECK(std::abs(planck_radiance(n, planck_inverse(n, b)) - b) / b < 1e-12 * 100);
  }
}

TEST_CASE("planck_inverse as B -> 0+ tends to 0 K") {
  double prev = planck_inverse(1e5, 1e-3);
  for (double b : {1e-10, 1e-30, 1e-100, 1e-300}) {
    const double t = planck_inverse(1e5, b);
    CHECK(t < prev);
    CHECK(t > 0.0);
    prev = t;
  }
  CHECK(prev < 3.0);
  CHECK_THROWS_CODE(planck_inverse(1e5, 0.0), ErrorCode::kDomain);
  CHECK_THROWS_CODE(planck_inverse(1e5, -1.0), ErrorCode::kDomain);
  CHECK_THROWS_CODE(planck_inverse(0.0, 1.0), ErrorCode::kDomain);
}

TEST_CASE("band_radiance: trapezoid over the grid") {
  const auto g = WavenumberGrid::uniform(8e4, 1.4e5, 101);
  const std::vector<double> nu(g.values().begin(), g.values().end());
  const double ours = band_radiance(300.0, g);

  SUBCASE("equals the high-precision trapezoid sum") {
    const double ref = static_cast<double>(oracle::trapezoid_planck(nu, 300.0));
    CHECK(std::abs(ours - ref) / ref < 1e-12);
  }
  SUBCASE("continuous quadrature oracle agrees to 1e-6 after the trapezoid end correction") {
    const oracle::Real exact = oracle::integral_planck(8e4, 1.4e5, 300.0);
    const double h = nu[1] - nu[0];
    const oracle::Real correction = oracle::Real(h * h / 12.0) * (oracle::planck_dnu(oracle::Real(1.4e5), oracle::Real(300)) -
                                                                  oracle::planck_dnu(oracle::Real(8e4), oracle::Real(300)));
    const double ref = static_cast<double>(exact + correction);
    CHECK(std::abs(ours - ref) / ref < 1e-6);
    // Raw truncation error of the K=101 trapezoid, for the record.
    const double raw = std::abs(ours - static_cast<double>(exact)) / static_cast<double>(exact);
    CHECK(raw < 5e-6);
    MESSAGE("trapezoid vs continuous integral relative difference: " << raw);
  }
}

TEST_CASE("band_radiance: monotone in T and vanishing with band width") {
  const auto g = WavenumberGrid::uniform(8e4, 1.4e5, 16);
  CHECK(band_radiance(310.0, g) > band_radiance(300.0, g));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lo(2e4, 2e5), span(1.0, 1e5), t(50.0, 3000.0);
  for (int i = 0; i < 300; ++i) {
    const double a = lo(rng);
    const auto grid = WavenumberGrid::uniform(a, a + span(rng), 2 + i % 20);
    double t1 = t(rng), t2 = t(rng);
    if (t1 > t2) std::swap(t1, t2);
    if (t1 == t2) continue;
    CHECK(band_radiance(t2, grid) > band_radiance(t1, grid));
  }
  // Collapsing a two-sample band onto one wavenumber drives the integral to 0.
  double prev = band_radiance(300.0, WavenumberGrid({1e5, 1.1e5}));
  for (double w : {1e3, 1.0, 1e-3, 1e-4}) {
    const double v = band_radiance(300.0, WavenumberGrid({1e5, 1e5 + w}));
    CHECK(v < prev);
    CHECK(v == doctest::Approx(0.5 * w * (planck_radiance(1e5, 300.0) + planck_radiance(1e5 + w, 300.0))));
    prev = v;
  }
  CHECK(prev < 1e-3);
  CHECK_THROWS_CODE(WavenumberGrid({1e5, 1e5}), ErrorCode::kInvariant);
}

TEST_CASE("band_inverse round trips and brackets") {
  const auto g = WavenumberGrid::uniform(8e4, 1.4e5, 16);
  CHECK(std::abs(band_inverse(band_radiance(300.0, g), g) - 300.0) < 1e-5);
  for (double t = 100.0; t <= 1000.0; t += 7.3) {
    CHECK(std::abs(band_inverse(band_radiance(t, g), g) - t) < 1e-5);
  }
  const std::vector<double> nu(g.values().begin(), g.values().end());
  const double l77 = static_cast<double>(oracle::trapezoid_planck(nu, 77.0));
  CHECK(std::abs(band_inverse(l77, g) - 77.0) < 1e-5);
  CHECK_THROWS_CODE(band_inverse(band_radiance(5000.0, g) * 10.0, g), ErrorCode::kOutOfBracket);
  // At 1 K the LWIR band radiance underflows to 0, so probe the lower edge on a band it resolves.
  const WavenumberGrid low({1.0, 50.0, 100.0});
  CHECK(band_radiance(1.0, low) > 0.0);
  CHECK_THROWS_CODE(band_inverse(band_radiance(1.0, low) * 0.5, low), ErrorCode::kOutOfBracket);
  CHECK_THROWS_CODE(band_inverse(0.0, g), ErrorCode::kDomain);
}

TEST_CASE("spectral library parsing") {
  SUBCASE("empty file is a parse error") {
    CHECK_THROWS_CODE(parse(""), ErrorCode::kParse);
    CHECK_THROWS_CODE(parse("# only a comment\n"), ErrorCode::kParse);
    CHECK_THROWS_CODE(parse("material,wavenumber_cm1,emissivity\n"), ErrorCode::kParse);
  }
  SUBCASE("one material, two bands, constant 0.95") {
    const auto lib = parse("material,wavenumber_cm1,emissivity\nsteel,800,0.95\nsteel,1400,0.95\n");
    REQUIRE(lib.size() == 1);
    const auto& c = lib.at("steel");
    CHECK(c.grid().size() == 2);
    CHECK(c.grid()[0] == doctest::Approx(8e4));
    CHECK(c.emissivity()[0] == 0.95);
    CHECK(c.emissivity()[1] == 0.95);
    CHECK(c.at(1.1e5) == doctest::Approx(0.95));
  }
  SUBCASE("out-of-range emissivity names the material and line") {
    const std::string msg = error_text("material,wavenumber_cm1,emissivity\nsteel,800,0.9\nsteel,1400,1.3\n");
    CHECK(msg.find("steel") != std::string::npos);
    CHECK(msg.find(":3") != std::string::npos);
    CHECK_THROWS_CODE(parse("material,wavenumber_cm1,emissivity\nsteel,800,0.9\nsteel,1400,1.3\n"),
                      ErrorCode::kInvariant);
  }
  SUBCASE("malformed rows report their line") {
    const std::string msg = error_text("material,wavenumber_cm1,emissivity\n# c\nsteel,800\n");
    CHECK(msg.find(":3") != std::string::npos);
    CHECK_THROWS_CODE(parse("material,wavenumber_cm1,emissivity\nsteel,abc,0.9\nsteel,900,0.9\n"), ErrorCode::kParse);
    CHECK_THROWS_CODE(parse("wrong,header\nsteel,800,0.9\n"), ErrorCode::kParse);
  }
  SUBCASE("rows must ascend per material") {
    CHECK_THROWS_CODE(parse("material,wavenumber_cm1,emissivity\nsteel,900,0.9\nsteel,800,0.9\n"), ErrorCode::kParse);
  }
  SUBCASE("duplicate material rows are merged by grid") {
    const auto lib = parse(
        "material,wavenumber_cm1,emissivity\n"
        "a,800,0.5\nb,800,0.7\na,1000,0.6\nb,1400,0.8\na,1000,0.6\na,1400,0.9\n");
    REQUIRE(lib.size() == 2);
    CHECK(lib.at("a").grid().size() == 3);
    CHECK(lib.at("a").emissivity()[2] == 0.9);
    CHECK(lib.at("b").grid().size() == 2);
    CHECK_THROWS_CODE(parse("material,wavenumber_cm1,emissivity\na,800,0.5\na,1000,0.6\na,1000,0.7\n"),
                      ErrorCode::kParse);
  }
  SUBCASE("single-sample material is an invariant violation") {
    CHECK_THROWS_CODE(parse("material,wavenumber_cm1,emissivity\na,800,0.5\n"), ErrorCode::kInvariant);
  }
}

TEST_CASE("spectral library write/parse round trip") {
  SpectralLibrary lib;
  lib.emplace("plaster", SpectralCurve("plaster", WavenumberGrid::uniform(7e4, 1.5e5, 9),
                                       {0.9, 0.91, 0.92, 0.93, 0.925, 0.92, 0.91, 0.9, 0.89}));
  lib.emplace("metal", SpectralCurve("metal", WavenumberGrid::uniform(7e4, 1.5e5, 3), {0.2, 0.25, 0.3}));
  std::ostringstream out;
  write_spectral_library(out, lib);
  const auto back = parse(out.str());
  REQUIRE(back.size() == 2);
  for (const auto& [name, curve] : lib) {
    const auto& other = back.at(name);
    REQUIRE(other.grid().size() == curve.grid().size());
    for (std::size_t i = 0; i < curve.grid().size(); ++i) {
      CHECK(other.grid()[i] == doctest::Approx(curve.grid()[i]).epsilon(1e-14));
      CHECK(other.emissivity()[i] == curve.emissivity()[i]);
    }
  }
  testutil::TempDir dir("radiometry");
  save_spectral_library(dir.path() / "lib.csv", lib);
  CHECK(load_spectral_library(dir.path() / "lib.csv").size() == 2);
  CHECK_THROWS_CODE(load_spectral_library(dir.path() / "missing.csv"), ErrorCode::kIo);
}

TEST_CASE("band_average_emissivity") {
  SUBCASE("constant curve") {
    const SpectralCurve c("c", WavenumberGrid::uniform(7e4, 1.5e5, 5), {0.9, 0.9, 0.9, 0.9, 0.9});
    CHECK(band_average_emissivity(c, WavenumberGrid::uniform(8e4, 1.1e5, 7)) == doctest::Approx(0.9).epsilon(1e-14));
  }
  SUBCASE("linear 0.8 -> 1.0 over the full band averages to 0.9") {
    const SpectralCurve c("lin", WavenumberGrid({8e4, 1.4e5}), {0.8, 1.0});
    CHECK(band_average_emissivity(c, WavenumberGrid::uniform(8e4, 1.4e5, 16)) ==
          doctest::Approx(0.9).epsilon(1e-14));
  }
  SUBCASE("piecewise curve vs dense-sampling oracle") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> x{7e4}, y{u(rng)};
      while (x.size() < 12) {
        x.push_back(x.back() + 1e3 + 1e4 * u(rng));
        y.push_back(u(rng));
      }
      const SpectralCurve c("p", WavenumberGrid(x), y);
      const double lo = x[1] + 0.37 * (x[2] - x[1]);
      const double hi = x[9] + 0.61 * (x[10] - x[9]);
      const auto band = WavenumberGrid::uniform(lo, hi, 7);
      const double ours = band_average_emissivity(c, band);
      CHECK(std::abs(ours - oracle::dense_average(x, y, lo, hi)) < 1e-9);
      CHECK(ours >= 0.0);
      CHECK(ours <= 1.0);
    }
  }
  SUBCASE("band beyond the curve span is an extrapolation error") {
    const SpectralCurve c("c", WavenumberGrid({8e4, 1.2e5}), {0.5, 0.6});
    CHECK_THROWS_CODE(band_average_emissivity(c, WavenumberGrid({7e4, 1e5})), ErrorCode::kExtrapolation);
    CHECK_THROWS_CODE(band_average_emissivity(c, WavenumberGrid({9e4, 1.3e5})), ErrorCode::kExtrapolation);
  }
}

TEST_CASE("spectral curve invariants") {
  CHECK_THROWS_CODE(SpectralCurve("x", WavenumberGrid({1e5, 2e5}), {0.5}), ErrorCode::kInvariant);
  CHECK_THROWS_CODE(SpectralCurve("x", WavenumberGrid({1e5, 2e5}), {0.5, -0.1}), ErrorCode::kInvariant);
  const SpectralCurve c("x", WavenumberGrid({1e5, 2e5}), {0.2, 0.4});
  CHECK(c.at(1.5e5) == doctest::Approx(0.3));
  CHECK_THROWS_CODE(c.at(5e4), ErrorCode::kExtrapolation);
  const auto r = c.resample(WavenumberGrid({1e5, 1.25e5, 2e5}));
  CHECK(r[1] == doctest::Approx(0.25));
}
