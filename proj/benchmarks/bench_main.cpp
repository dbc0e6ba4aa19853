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

#include <benchmark/benchmark.h>
#include <malloc.h>

#include "texnerf/eval.hpp"
#include "texnerf/nerf.hpp"
#include "texnerf/radiometry.hpp"
#include "texnerf/scenesynth.hpp"
#include "texnerf/texdecomp.hpp"

using namespace texnerf;

namespace {

nerf::FieldConfig bench_field(int width) {
  nerf::FieldConfig cfg;
  cfg.trunk_depth = 4;
  cfg.trunk_width = width;
  cfg.hue_tap = 2;
  cfg.sv_width = width / 2;
  cfg.encoding.l_pos = 10;
  cfg.encoding.l_dir = 4;
  return cfg;
}

nerf::RaySampleBatch bench_batch(int rays, int samples, Rng& rng) {
  nerf::RaySampleBatch b;
  b.origins.resize(3, rays);
  b.directions.resize(3, rays);
  b.gt_hsv.resize(3, rays);
  for (int r = 0; r < rays; ++r) {
    b.origins.col(r) = Eigen::Vector3d(0.0, -2.0, 1.5) + 0.1 * Eigen::Vector3d(uniform01(rng), uniform01(rng), 0.0);
    b.directions.col(r) = (-b.origins.col(r) + Eigen::Vector3d(uniform01(rng) - 0.5, uniform01(rng) - 0.5, 0)).normalized();
    b.gt_hsv.col(r) = Eigen::Vector3d(uniform01(rng), uniform01(rng), uniform01(rng));
  }
  nerf::assign_samples(b, 1.0, 3.6, samples, &rng);
  return b;
}

void BM_PlanckRadiance(benchmark::State& state) {
  double t = 250.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(radiometry::planck_radiance(1.1e5, t));
    t = t > 400.0 ? 250.0 : t + 0.01;
  }
}
BENCHMARK(BM_PlanckRadiance);

void BM_PlanckInverse(benchmark::State& state) {
  const double l = radiometry::planck_radiance(1.1e5, 310.0);
  for (auto _ : state) benchmark::DoNotOptimize(radiometry::planck_inverse(1.1e5, l));
}
BENCHMARK(BM_PlanckInverse);

void BM_DecomposeReferenceView(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const auto scene = scenesynth::reference_scene();
  const auto lib = scenesynth::reference_library();
  const auto cam = scenesynth::generate_orbit_poses(1, 2.0, 55.0, Eigen::Vector3d(0, 0, 0.15), size, size, 0.7)[0];
  const auto view = scenesynth::raytrace_thermal(scene, cam, lib);
  for (auto _ : state) benchmark::DoNotOptimize(texdecomp::decompose_cube(view.cube, view.truth.material, lib, {}));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_DecomposeReferenceView)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FieldForward(benchmark::State& state) {
  nerf::RadianceField field(bench_field(static_cast<int>(state.range(0))));
  field.initialize(1);
  Rng rng(2);
  const auto batch = bench_batch(256, 32, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nerf::render_batch(field, batch));
  state.SetItemsProcessed(state.iterations() * 256 * 32);
}
BENCHMARK(BM_FieldForward)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  nerf::RadianceField field(bench_field(static_cast<int>(state.range(0))));
  field.initialize(1);
  Rng rng(3);
  const auto batch = bench_batch(256, 32, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nerf::backward(field, batch));
  state.SetItemsProcessed(state.iterations() * 256 * 32);
}
BENCHMARK(BM_ForwardBackward)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_RenderView(benchmark::State& state) {
  nerf::RadianceField field(bench_field(64));
  field.initialize(4);
  const auto cam = scenesynth::generate_orbit_poses(1, 2.0, 55.0, Eigen::Vector3d(0, 0, 0.15), 64, 64, 0.7)[0];
  const eval::RenderConfig cfg{1.0, 3.6, 32, 2048};
  for (auto _ : state) benchmark::DoNotOptimize(eval::render_view(field, cam, cfg));
  state.SetItemsProcessed(state.iterations() * 64 * 64);
}
BENCHMARK(BM_RenderView)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
