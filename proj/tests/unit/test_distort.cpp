// Copyright 2026 The dualgate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <vector>

#include "dualgate/distort.hpp"
#include "dualgate/error.hpp"
#include "dualgate/random.hpp"

using namespace dualgate;

namespace {

PixelBuffer random_image(int w, int h, std::uint64_t seed) {
  rng::Engine e(seed);
  std::vector<double> s(static_cast<std::size_t>(w) * h * 3);
  for (auto& v : s) v = rng::uniform01(e);
  return PixelBuffer(w, h, std::move(s));
}

PixelBuffer smooth_image(int w, int h) {
  PixelBuffer b(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        b.at(x, y, c) = 0.5 + 0.4 * std::sin(0.2 * x + c) * std::cos(0.15 * y);
  return b;
}

double mad(const PixelBuffer& a, const PixelBuffer& b) {
  double sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a.samples()[i] - b.samples()[i]);
  return sum / static_cast<double>(a.size());
}

bool in_range(const PixelBuffer& b) {
  for (double v : b.samples()) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("pixel buffer construction") {
  CHECK_THROWS_AS(PixelBuffer(0, 4), InputError);
  CHECK_THROWS_AS(PixelBuffer(2, 2, std::vector<double>(5)), InputError);
  CHECK_THROWS_AS(PixelBuffer(1, 1, std::vector<double>{0, NAN, 0}), InputError);
  PixelBuffer b(1, 1, std::vector<double>{-1, 0.5, 3});
  CHECK(b.at(0, 0, 0) == 0.0);
  CHECK(b.at(0, 0, 1) == 0.5);
  CHECK(b.at(0, 0, 2) == 1.0);
  CHECK(PixelBuffer(3, 2, 0.25).mean() == doctest::Approx(0.25));
}

TEST_CASE("identity operations") {
  const auto img = random_image(31, 17, 1);
  CHECK(apply_blur(img, 0.0) == img);
  const auto r = apply_resize(img, 1.0);
  REQUIRE(r.width() == img.width());
  REQUIRE(r.height() == img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(std::abs(r.samples()[i] - img.samples()[i]) < 1e-9);
  }
  CHECK(apply_noise(img, 0.0, 5) == img);
  CHECK(apply_brightness(img, 0.0) == img);
  CHECK(apply_contrast(img, 1.0) == img);
  CHECK(apply_color_shift(img, {0, 0, 0}) == img);
  CHECK(apply_spatial(img, {}) == img);

  const PixelBuffer mid(8, 8, 0.5);
  for (double g : {0.0, 0.6, 1.0, 1.4, 3.0}) CHECK(apply_contrast(mid, g) == mid);
}

TEST_CASE("operations clamp and stay deterministic") {
  const auto img = random_image(24, 24, 2);
  CHECK(in_range(apply_brightness(img, 0.8)));
  CHECK(in_range(apply_brightness(img, -0.8)));
  CHECK(in_range(apply_contrast(img, 4.0)));
  CHECK(in_range(apply_color_shift(img, {0.9, -0.9, 0.3})));
  CHECK(in_range(apply_noise(img, 0.5, 3)));
  CHECK(in_range(apply_blur(img, 2.0)));
  CHECK(in_range(apply_spatial(img, {0.02, -0.02, 2.0})));
  CHECK(apply_noise(img, 0.1, 42) == apply_noise(img, 0.1, 42));
  CHECK_FALSE(apply_noise(img, 0.1, 42) == apply_noise(img, 0.1, 43));
  CHECK(apply_brightness(PixelBuffer(2, 2, 0.5), 0.1) == PixelBuffer(2, 2, 0.6));
}

TEST_CASE("parameter errors") {
  const PixelBuffer img(4, 4, 0.5);
  CHECK_THROWS_AS(apply_blur(img, -1), InputError);
  CHECK_THROWS_AS(apply_resize(img, 0.0), InputError);
  CHECK_THROWS_AS(apply_resize(img, NAN), InputError);
  CHECK_THROWS_AS(apply_spatial(img, {0.05, 0, 0}), InputError);
  CHECK_THROWS_AS(apply_spatial(img, {0, 0, 3.0}), InputError);
  CHECK_THROWS_AS(severity_to_params(DistortionGroup::Blur, 0, 3), InputError);
  CHECK_THROWS_AS(severity_to_params(DistortionGroup::Blur, 4, 3), InputError);
  CHECK_THROWS_AS(parse_group("sharpen"), InputError);
}

TEST_CASE("blur preserves constant interiors and the global mean") {
  const PixelBuffer flat(40, 40, 0.3);
  const auto b = apply_blur(flat, 1.7);
  for (double v : b.samples()) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));

  const auto img = random_image(256, 256, 7);
  for (double s : {0.4, 1.0, 2.0}) {
    CHECK(std::abs(apply_blur(img, s).mean() - img.mean()) < 1e-3);
  }
}

TEST_CASE("resize dimensions") {
  const auto img = random_image(33, 20, 3);
  const auto up = apply_resize(img, 2.0);
  CHECK(up.width() == 66);
  CHECK(up.height() == 40);
  const auto back = apply_resize(up, 0.5);
  CHECK(back.width() == 33);
  CHECK(back.height() == 20);
  const auto tiny = apply_resize(PixelBuffer(3, 3, 0.2), 0.01);
  CHECK(tiny.width() == 1);
  CHECK(tiny.height() == 1);
  CHECK(tiny.at(0, 0, 0) == doctest::Approx(0.2));
  const auto r = apply_resize(img, 0.9);
  CHECK(r.width() == 30);
  CHECK(r.height() == 18);
}

TEST_CASE("severity monotonicity for blur and noise") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto img = random_image(16, 16, 100 + seed);
    double prev_blur = 0, prev_noise = 0;
    for (int s = 1; s <= 5; ++s) {
      const double sigma = severity_to_params(DistortionGroup::Blur, s, 5).magnitude;
      const double sd = severity_to_params(DistortionGroup::Noise, s, 5).magnitude;
      const double mb = mad(apply_blur(img, sigma), img);
      const double mn = mad(apply_noise(img, sd, seed), img);
      CHECK(mb >= prev_blur);
      CHECK(mn >= prev_noise);
      prev_blur = mb;
      prev_noise = mn;
    }
  }
}

TEST_CASE("severity to parameters") {
  CHECK(severity_to_params(DistortionGroup::Blur, 1, 5).magnitude == doctest::Approx(0.4));
  CHECK(severity_to_params(DistortionGroup::Blur, 3, 5).magnitude == doctest::Approx(1.2));
  CHECK(severity_to_params(DistortionGroup::Blur, 5, 5).magnitude == doctest::Approx(2.0));
  CHECK(severity_to_params(DistortionGroup::Jpeg, 5, 5).quality == 40);
  CHECK(severity_to_params(DistortionGroup::Jpeg, 1, 5).quality == 90);
  CHECK(severity_to_params(DistortionGroup::Jpeg, 1, 1).quality == 90);
  CHECK(severity_to_params(DistortionGroup::Noise, 3, 3).magnitude == doctest::Approx(0.1));
  CHECK(severity_to_params(DistortionGroup::Spatial, 3, 3).magnitude == doctest::Approx(0.02));
  CHECK(resize_factor_for_severity(1, 3) == doctest::Approx(0.9));
  CHECK(resize_factor_for_severity(3, 3) == doctest::Approx(0.5));
  for (auto g : kAllGroups) {
    double prev = -1;
    for (int s = 1; s <= 4; ++s) {
      const auto p = severity_to_params(g, s, 4);
      const double strength = g == DistortionGroup::Jpeg ? 100 - p.quality : p.magnitude;
      CHECK(strength > prev);
      prev = strength;
    }
    CHECK(parse_group(to_string(g)) == g);
  }
}

TEST_CASE("severity weights") {
  AugParams p;
  p.num_levels = 5;
  const auto w = severity_weights(p);
  const std::vector<double> expected{0.09242116269661457, 0.24137602468441247,
                                     0.33240562523794576, 0.24137602468441247,
                                     0.09242116269661457};
  REQUIRE(w.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(w[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  p.num_levels = 1;
  CHECK(severity_weights(p) == std::vector<double>{1.0});
}

TEST_CASE("plan sampling") {
  rng::Engine e(1);
  AugParams p;
  p.aug_prob = 0.0;
  for (int i = 0; i < 200; ++i) CHECK_FALSE(sample_plan(p, e).has_value());

  p = AugParams{};
  p.max_distortions = 1;
  p.num_levels = 1;
  for (int i = 0; i < 200; ++i) {
    const auto plan = sample_plan(p, e);
    REQUIRE(plan.has_value());
    REQUIRE(plan->steps.size() == 1);
    CHECK(plan->steps[0].severity == 1);
  }

  p = AugParams{};
  p.max_distortions = 7;
  std::set<std::size_t> sizes;
  for (int i = 0; i < 2000; ++i) {
    const auto plan = sample_plan(p, e);
    REQUIRE(plan.has_value());
    sizes.insert(plan->steps.size());
    std::set<DistortionGroup> groups;
    for (const auto& s : plan->steps) {
      groups.insert(s.group);
      CHECK(s.severity >= 1);
      CHECK(s.severity <= 3);
    }
    CHECK(groups.size() == plan->steps.size());
  }
  CHECK(sizes.size() == 7);

  rng::Engine a(99), b(99);
  for (int i = 0; i < 50; ++i) CHECK(sample_plan(AugParams{}, a) == sample_plan(AugParams{}, b));

  AugParams bad;
  bad.aug_prob = 1.5;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = AugParams{};
  bad.max_distortions = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("plan application") {
  const auto img = smooth_image(20, 20);
  DistortionPlan empty;
  CHECK(apply_plan(img, empty, nullptr) == img);

  DistortionPlan blur{7, 5, {{DistortionGroup::Blur, 3}}};
  CHECK(apply_plan(img, blur, nullptr) ==
        apply_blur(img, severity_to_params(DistortionGroup::Blur, 3, 5).magnitude));

  DistortionPlan mixed{11, 3,
                       {{DistortionGroup::Noise, 2}, {DistortionGroup::Spatial, 3},
                        {DistortionGroup::ColorShift, 1}, {DistortionGroup::Contrast, 2},
                        {DistortionGroup::Brightness, 3}}};
  const auto once = apply_plan(img, mixed, nullptr);
  CHECK(once == apply_plan(img, mixed, nullptr));
  CHECK(in_range(once));

  const auto realized = realize_plan(mixed);
  REQUIRE(realized.size() == 5);
  CHECK(std::abs(realized[1].spatial.rotation_deg) == doctest::Approx(2.0));
  CHECK(std::abs(realized[4].value) == doctest::Approx(0.25));
  CHECK(std::abs(realized[3].value - 1.0) == doctest::Approx(0.225));

  DistortionPlan jpeg{1, 3, {{DistortionGroup::Jpeg, 1}}};
  CHECK_THROWS_AS(apply_plan(img, jpeg, nullptr), DegradationError);
}

TEST_CASE("chain degradation") {
  const auto codec = make_default_codec();
  if (!codec) {
    MESSAGE("no jpeg codec adapter; skipping");
    return;
  }
  const auto img = smooth_image(32, 24);
  AugParams p;
  rng::Engine e1(5), e2(5);
  const auto a = chain_degrade(img, 4, p, e1, codec.get());
  const auto b = chain_degrade(img, 4, p, e2, codec.get());
  REQUIRE(a.hops.size() == 4);
  CHECK(a.hops == b.hops);
  CHECK(a.image == b.image);
  std::size_t total = 0;
  for (const auto& hop : a.hops) {
    total += hop.steps.size();
    CHECK(hop.steps.size() <= 3);
    CHECK(std::any_of(hop.steps.begin(), hop.steps.end(),
                      [](const auto& s) { return s.group == DistortionGroup::Jpeg; }));
  }
  CHECK(a.step_count() == total);

  // With augmentation off each hop is a single jpeg round trip.
  p.aug_prob = 0.0;
  p.num_levels = 1;
  rng::Engine e3(8);
  const auto c = chain_degrade(img, 1, p, e3, codec.get());
  REQUIRE(c.step_count() == 1);
  CHECK(c.image == apply_jpeg(img, 90, *codec));

  CHECK_THROWS_AS(chain_degrade(img, 0, p, e3, codec.get()), InputError);
}

TEST_CASE("jpeg round trip") {
  const auto codec = make_default_codec();
  if (!codec) {
    MESSAGE("no jpeg codec adapter; skipping");
    return;
  }
  const auto img = smooth_image(48, 40);
  const auto q100 = apply_jpeg(img, 100, *codec);
  const auto q40 = apply_jpeg(img, 40, *codec);
  CHECK(q100.width() == 48);
  CHECK(q100.height() == 40);
  CHECK(mad(q100, img) < mad(q40, img));
  CHECK(mad(q100, img) < 0.01);
  CHECK(apply_jpeg(img, 70, *codec) == apply_jpeg(img, 70, *codec));
  CHECK_THROWS_AS(apply_jpeg(img, 0, *codec), InputError);
}

TEST_CASE("codec failures become degradation errors") {
  struct Broken : ImageCodec {
    std::string name() const override { return "broken"; }
    PixelBuffer jpeg_round_trip(const PixelBuffer&, int) const override {
      throw std::runtime_error("encoder exploded");
    }
  };
  try {
    apply_jpeg(PixelBuffer(2, 2, 0.5), 90, Broken{});
    FAIL("expected an error");
  } catch (const DegradationError& e) {
    CHECK(std::string(e.what()).find("encoder exploded") != std::string::npos);
  }
}

TEST_CASE("sweeps") {
  CHECK(sweep_grid(SweepKind::Jpeg).size() == 7);
  CHECK(sweep_grid(SweepKind::Resize).size() == 7);
  CHECK(sweep_grid(SweepKind::Blur).size() == 6);
  CHECK(sweep_tag(SweepKind::Jpeg, 90) == "jpeg_qf90");
  CHECK(sweep_tag(SweepKind::Resize, 0.9) == "resize_0.9");
  CHECK(sweep_tag(SweepKind::Resize, 1.0) == "resize_1.0");
  CHECK(sweep_tag(SweepKind::Blur, 0.0) == "blur_0.0");
  CHECK(parse_sweep_kind("blur") == SweepKind::Blur);
  CHECK_THROWS_AS(parse_sweep_kind("jitter"), InputError);

  const auto img = smooth_image(10, 10);
  const auto blur = sweep(img, SweepKind::Blur, nullptr);
  REQUIRE(blur.size() == 6);
  CHECK(blur.front().intensity == 0.0);
  CHECK(blur.front().image == img);
  const auto resize = sweep(img, SweepKind::Resize, nullptr);
  REQUIRE(resize.size() == 7);
  CHECK(resize.back().image.width() == 20);
  CHECK(std::find(kResizeSweepFactors.begin(), kResizeSweepFactors.end(), 0.9) !=
        kResizeSweepFactors.end());
  if (make_default_codec() == nullptr) {
    CHECK_THROWS_AS(sweep(img, SweepKind::Jpeg, nullptr), DegradationError);
  }
}

TEST_CASE("image files round trip") {
  const auto dir = std::filesystem::temp_directory_path();
  PixelBuffer img(5, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = ((x * 7 + y * 13 + c * 29) % 256) / 255.0;

  const auto ppm = (dir / "dualgate_rt.ppm").string();
  write_image(ppm, img);
  const auto back = read_image(ppm);
  REQUIRE(back.width() == 5);
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(back.samples()[i] == doctest::Approx(img.samples()[i]).epsilon(1e-12));
  }
  std::remove(ppm.c_str());

  if (png_supported()) {
    const auto png = (dir / "dualgate_rt.png").string();
    write_image(png, img);
    CHECK(read_image(png) == back);
    std::remove(png.c_str());
  }
  CHECK_THROWS_AS(read_image((dir / "does_not_exist.ppm").string()), IoError);
}
