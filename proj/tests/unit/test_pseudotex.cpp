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

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"
#include "texnerf/image.hpp"
#include "texnerf/pseudotex.hpp"

using namespace texnerf;
using namespace texnerf::pseudotex;
using texdecomp::MaterialMask;
using texdecomp::TeXImage;

namespace {

MappingMetadata meta_for(Palette palette) {
  MappingMetadata m;
  m.t_min = 290.0;
  m.t_max = 340.0;
  m.x_min = 10.0;
  m.x_max = 30.0;
  m.palette = std::move(palette);
  return m;
}

TeXImage random_tex(int w, int h, std::uint64_t seed, const std::vector<std::string>& names) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> t(290.5, 339.5), x(10.5, 29.5);
  MaterialMask mask{Image<std::uint16_t>(w, h), {}};
  for (std::size_t i = 0; i < names.size(); ++i) mask.legend[static_cast<std::uint16_t>(10 + i)] = names[i];
  TeXImage tex{ImageD(w, h), mask, ImageD(w, h), ImageD(w, h, 1, 1.0), 0, 0};
  for (int y = 0; y < h; ++y) {
    for (int x0 = 0; x0 < w; ++x0) {
      tex.material.labels(x0, y) = static_cast<std::uint16_t>(10 + rng() % names.size());
      tex.temperature(x0, y) = t(rng);
      tex.texture(x0, y) = x(rng);
    }
  }
  return tex;
}

}  // namespace

TEST_CASE("build_palette") {
  const auto one = build_palette({"steel"});
  REQUIRE(one.size() == 1);
  CHECK(one[0].first == "steel");
  CHECK(one[0].second == 0.0);

  const auto two = build_palette({"b", "a"});
  REQUIRE(two.size() == 2);
  CHECK(two[0] == std::pair<std::string, double>{"a", 0.0});
  CHECK(two[1] == std::pair<std::string, double>{"b", 0.5});

  std::vector<std::string> ten;
  for (int i = 9; i >= 0; --i) ten.push_back("m" + std::to_string(i));
  const auto p = build_palette(ten);
  double min_gap = 1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p[i].second == doctest::Approx(0.1 * static_cast<double>(i)).epsilon(1e-15));
    for (std::size_t j = i + 1; j < p.size(); ++j) min_gap = std::min(min_gap, hue_distance(p[i].second, p[j].second));
  }
  CHECK(min_gap == doctest::Approx(0.1));
  CHECK(build_palette(ten) == p);

  CHECK_THROWS_CODE(build_palette({"a", "b", "a"}), ErrorCode::kDuplicateId);
  CHECK_THROWS_CODE(build_palette({}), ErrorCode::kInvalidArgument);
}

TEST_CASE("metadata validation") {
  auto m = meta_for(build_palette({"a", "b"}));
  CHECK_NOTHROW(m.validate());
  m.t_max = m.t_min;
  CHECK_THROWS(m.validate());
  m = meta_for(build_palette({"a", "b"}));
  m.x_min = 50.0;
  CHECK_THROWS(m.validate());
  m = meta_for({{"a", 0.0}, {"b", 0.4}});
  CHECK_THROWS_CODE(m.validate(), ErrorCode::kInvariant);
}

TEST_CASE("tex_to_hsv endpoints and midpoints") {
  const auto meta = meta_for(build_palette({"a", "b"}));
  TeXImage tex = random_tex(3, 1, 1, {"a", "b"});
  tex.temperature(0, 0) = meta.t_min;
  tex.temperature(1, 0) = meta.t_max;
  tex.temperature(2, 0) = 500.0;
  tex.texture(0, 0) = 0.5 * (meta.x_min + meta.x_max);
  tex.material.labels(0, 0) = 11;
  const auto out = tex_to_hsv(tex, meta);
  CHECK(out.hsv(0, 0, 1) == 0.0);
  CHECK(out.hsv(1, 0, 1) == 1.0);
  CHECK(out.hsv(2, 0, 1) == 1.0);
  CHECK(out.hsv(0, 0, 2) == 0.5);
  CHECK(out.hsv(0, 0, 0) == 0.5);
  CHECK(out.invalid_count == 0);
}

TEST_CASE("tex_to_hsv flags NaN temperatures with zero saturation") {
  const auto meta = meta_for(build_palette({"a"}));
  TeXImage tex = random_tex(2, 2, 2, {"a"});
  tex.temperature(1, 1) = std::nan("");
  const auto out = tex_to_hsv(tex, meta);
  CHECK(out.invalid_count == 1);
  CHECK(out.hsv(1, 1, 1) == 0.0);
}

TEST_CASE("tex_to_hsv rejects unknown materials") {
  const auto meta = meta_for(build_palette({"a"}));
  const TeXImage tex = random_tex(2, 2, 3, {"a", "zz"});
  CHECK_THROWS_CODE(tex_to_hsv(tex, meta), ErrorCode::kUnknownMaterial);
}

TEST_CASE("tex -> hsv -> tex round trip") {
  const std::vector<std::string> names = {"brick", "glass", "metal", "paint", "wood"};
  const auto meta = meta_for(build_palette(names));
  const TeXImage tex = random_tex(17, 13, 4, names);
  const auto hsv = tex_to_hsv(tex, meta);
  const auto back = hsv_to_tex(hsv.hsv, meta);
  for (int y = 0; y < 13; ++y) {
    for (int x = 0; x < 17; ++x) {
      CHECK(std::abs(back.temperature(x, y) - tex.temperature(x, y)) < 1e-10);
      CHECK(std::abs(back.texture(x, y) - tex.texture(x, y)) < 1e-12);
      CHECK(meta.palette[back.material(x, y)].first == tex.material.material_at(x, y));
    }
  }
  for (double v : hsv.hsv.data()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("hsv channels stay in [0,1] for any finite TeX image") {
  const auto meta = meta_for(build_palette({"a", "b", "c"}));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> wide(-1e6, 1e6);
  TeXImage tex = random_tex(8, 8, 6, {"a", "b", "c"});
  for (double& t : tex.temperature.data()) t = wide(rng);
  for (double& x : tex.texture.data()) x = wide(rng);
  for (double v : tex_to_hsv(tex, meta).hsv.data()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("hsv_to_tex inverse examples") {
  const auto meta = meta_for({{"a", 0.0}, {"b", 0.5}});
  HsvImage img(3, 1, 3, 0.0);
  img(0, 0, 0) = 0.49;
  img(1, 0, 0) = 0.99;
  img(2, 0, 0) = 0.51;
  const auto out = hsv_to_tex(img, meta);
  CHECK(out.temperature(0, 0) == meta.t_min);
  CHECK(out.material(0, 0) == 1);
  CHECK(out.material(1, 0) == 0);
  CHECK(out.material(2, 0) == 1);
}

TEST_CASE("nearest-hue recovery tolerates noise below 1/(2M)") {
  for (int m : {1, 2, 3, 7, 10}) {
    std::vector<std::string> names;
    for (int i = 0; i < m; ++i) names.push_back("m" + std::to_string(i));
    const auto meta = meta_for(build_palette(names));
    std::mt19937_64 rng(static_cast<std::uint64_t>(m));
    const double bound = 0.5 / m;
    std::uniform_real_distribution<double> noise(-0.999 * bound, 0.999 * bound);
    for (int trial = 0; trial < 2000; ++trial) {
      const std::size_t i = rng() % m;
      double h = meta.palette[i].second + noise(rng);
      h -= std::floor(h);
      CHECK(meta.nearest_index(h) == i);
    }
  }
}

TEST_CASE("hue_distance is the cyclic distance") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng);
    CHECK(std::abs(hue_distance(a, b) - oracle::cyclic(a, b)) < 1e-15);
  }
}

TEST_CASE("hsv_to_rgb") {
  double r, g, b;
  hsv_to_rgb(0.0, 1.0, 1.0, r, g, b);
  CHECK(r == 1.0);
  CHECK(g == 0.0);
  CHECK(b == 0.0);
  for (double h : {0.0, 0.13, 0.5, 0.77, 0.999}) {
    hsv_to_rgb(h, 0.0, 0.37, r, g, b);
    CHECK(r == 0.37);
    CHECK(g == 0.37);
    CHECK(b == 0.37);
  }

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SUBCASE("matches the closed-form oracle") {
    for (int i = 0; i < 1000; ++i) {
      const double h = u(rng), s = u(rng), v = u(rng);
      hsv_to_rgb(h, s, v, r, g, b);
      const auto ref = oracle::hsv_to_rgb(h, s, v);
      CHECK(std::abs(r - ref[0]) < 1e-12);
      CHECK(std::abs(g - ref[1]) < 1e-12);
      CHECK(std::abs(b - ref[2]) < 1e-12);
    }
  }
  SUBCASE("rgb -> hsv -> rgb identity on 1000 random triples") {
    for (int i = 0; i < 1000; ++i) {
      const double r0 = u(rng), g0 = u(rng), b0 = u(rng);
      double h, s, v;
      rgb_to_hsv(r0, g0, b0, h, s, v);
      CHECK(h >= 0.0);
      CHECK(h < 1.0);
      hsv_to_rgb(h, s, v, r, g, b);
      CHECK(std::abs(r - r0) < 1e-6);
      CHECK(std::abs(g - g0) < 1e-6);
      CHECK(std::abs(b - b0) < 1e-6);
    }
  }
  SUBCASE("hsv -> rgb -> hsv identity where s > 0") {
    for (int i = 0; i < 1000; ++i) {
      const double h0 = u(rng), s0 = 0.05 + 0.95 * u(rng), v0 = 0.05 + 0.95 * u(rng);
      double h, s, v;
      hsv_to_rgb(h0, s0, v0, r, g, b);
      rgb_to_hsv(r, g, b, h, s, v);
      CHECK(oracle::cyclic(h, h0) < 1e-9);
      CHECK(std::abs(s - s0) < 1e-9);
      CHECK(std::abs(v - v0) < 1e-9);
    }
  }
  SUBCASE("image conversion agrees with the scalar form") {
    HsvImage img(4, 3, 3);
    for (double& x : img.data()) x = u(rng);
    const auto rgb = hsv_to_rgb(img);
    const auto hsv = rgb_to_hsv(rgb);
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 4; ++x) {
        hsv_to_rgb(img(x, y, 0), img(x, y, 1), img(x, y, 2), r, g, b);
        CHECK(rgb(x, y, 0) == r);
        CHECK(rgb(x, y, 1) == g);
        CHECK(rgb(x, y, 2) == b);
        CHECK(oracle::cyclic(hsv(x, y, 0), img(x, y, 0)) < 1e-9);
      }
  }
}

TEST_CASE("percentile metadata defaults") {
  const std::vector<std::string> names = {"a", "b"};
  TeXImage tex = random_tex(10, 10, 10, names);
  tex.temperature(0, 0) = 1e6;  // hot pixel outlier
  const auto meta = metadata_from_percentiles(tex, build_palette(names));
  std::vector<double> t(tex.temperature.data().begin(), tex.temperature.data().end());
  CHECK(meta.t_min == doctest::Approx(oracle::percentile(t, 2.0)));
  CHECK(meta.t_max == doctest::Approx(oracle::percentile(t, 98.0)));
  CHECK(meta.t_max < 1e3);
}

TEST_CASE("metadata sidecar and HSV image round trip") {
  testutil::TempDir dir("pseudotex");
  const auto meta = meta_for(build_palette({"paint", "metal", "plaster"}));
  HsvImage img(5, 4, 3);
  std::mt19937_64 rng(11);
  for (double& v : img.data()) v = static_cast<float>(std::uniform_real_distribution<double>(0, 1)(rng));
  save_hsv(dir.path() / "r_000.pfm", img, meta);
  CHECK(metadata_path(dir.path() / "r_000.pfm") == dir.path() / "r_000.meta.json");
  const auto back = load_metadata(dir.path() / "r_000.meta.json");
  CHECK(back.t_min == meta.t_min);
  CHECK(back.t_max == meta.t_max);
  CHECK(back.x_min == meta.x_min);
  CHECK(back.x_max == meta.x_max);
  CHECK(back.palette == meta.palette);
  CHECK(read_pfm(dir.path() / "r_000.pfm") == img);
  const std::string json = testutil::read_file(dir.path() / "r_000.meta.json");
  for (const char* key : {"t_min_K", "t_max_K", "x_min", "x_max", "palette"}) CHECK(json.find(key) != std::string::npos);
}
