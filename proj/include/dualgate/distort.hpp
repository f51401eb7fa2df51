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

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dualgate/random.hpp"

namespace dualgate {

// RGB image with samples in [0, 1], row-major, channel-interleaved.
class PixelBuffer {
 public:
  static constexpr int kChannels = 3;

  PixelBuffer() = default;
  // Zero-filled. InputError on non-positive dimensions.
  PixelBuffer(int width, int height);
  // Takes ownership of `samples`; InputError on size mismatch or non-finite
  // values. Values are clamped to [0, 1].
  PixelBuffer(int width, int height, std::vector<double> samples);
  PixelBuffer(int width, int height, double fill);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return samples_.size(); }

  std::span<const double> samples() const { return samples_; }
  std::span<double> samples() { return samples_; }

  double at(int x, int y, int c) const { return samples_[index(x, y, c)]; }
  double& at(int x, int y, int c) { return samples_[index(x, y, c)]; }

  void clamp();
  double mean() const;

  bool operator==(const PixelBuffer& other) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * kChannels + static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> samples_;
};

// JPEG encode/decode boundary. Implementations quantize to 8 bits.
class ImageCodec {
 public:
  virtual ~ImageCodec() = default;
  virtual std::string name() const = 0;
  // Throws on failure; apply_jpeg rethrows as DegradationError.
  virtual PixelBuffer jpeg_round_trip(const PixelBuffer& buf, int quality) const = 0;
};

// The built-in libjpeg adapter, or nullptr when built without libjpeg.
std::unique_ptr<ImageCodec> make_default_codec();

// ---------------------------------------------------------------------------
// Single ops
// ---------------------------------------------------------------------------

struct SpatialParams {
  double dx_frac = 0.0;       // translation as a fraction of width
  double dy_frac = 0.0;       // translation as a fraction of height
  double rotation_deg = 0.0;
};

inline constexpr double kMaxSpatialTranslation = 0.02;
inline constexpr double kMaxSpatialRotationDeg = 2.0;

// Separable Gaussian, reflect padding; sigma == 0 returns the input.
PixelBuffer apply_blur(const PixelBuffer& buf, double sigma);
// Bilinear to round(dim * factor), at least 1 pixel per side.
PixelBuffer apply_resize(const PixelBuffer& buf, double factor);
PixelBuffer apply_jpeg(const PixelBuffer& buf, int quality, const ImageCodec& codec);
// Additive zero-mean Gaussian noise drawn from `seed`.
PixelBuffer apply_noise(const PixelBuffer& buf, double stddev, std::uint64_t seed);
PixelBuffer apply_brightness(const PixelBuffer& buf, double offset);
// (v - 0.5) * gain + 0.5
PixelBuffer apply_contrast(const PixelBuffer& buf, double gain);
PixelBuffer apply_color_shift(const PixelBuffer& buf, const std::array<double, 3>& offsets);
// Rotation about the image center plus translation, bilinear with reflect
// padding.
PixelBuffer apply_spatial(const PixelBuffer& buf, const SpatialParams& params);

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

enum class DistortionGroup { Blur, ColorShift, Jpeg, Noise, Brightness, Spatial, Contrast };

inline constexpr std::array<DistortionGroup, 7> kAllGroups = {
    DistortionGroup::Blur,       DistortionGroup::ColorShift, DistortionGroup::Jpeg,
    DistortionGroup::Noise,      DistortionGroup::Brightness, DistortionGroup::Spatial,
    DistortionGroup::Contrast};

std::string_view to_string(DistortionGroup group);
DistortionGroup parse_group(std::string_view text);

struct DistortionStep {
  DistortionGroup group = DistortionGroup::Blur;
  int severity = 1;

  bool operator==(const DistortionStep&) const = default;
};

struct DistortionPlan {
  std::uint64_t seed = 0;
  int num_levels = 1;
  std::vector<DistortionStep> steps;

  bool operator==(const DistortionPlan&) const = default;
};

struct AugParams {
  int max_distortions = 3;
  int num_levels = 3;
  double aug_prob = 1.0;
  // Severity weights are exp(-(s - mu)^2 / (2 sigma^2)); defaults are
  // mu = (num_levels + 1) / 2 and sigma = num_levels / 4.
  std::optional<double> severity_mu;
  std::optional<double> severity_sigma;
};

void validate(const AugParams& params);

// Normalized weights of severities 1..num_levels (index 0 is severity 1).
std::vector<double> severity_weights(const AugParams& params);

// No plan with probability 1 - aug_prob; otherwise 1..max_distortions
// distinct groups, each with a Gaussian-weighted severity.
std::optional<DistortionPlan> sample_plan(const AugParams& params, rng::Engine& engine);

// Magnitudes behind each severity. Linear between the mildest level (1) and
// the strongest (num_levels).
struct StepParams {
  DistortionGroup group = DistortionGroup::Blur;
  double magnitude = 0.0;  // sigma, stddev, |offset|, |gain - 1|, shift, or spatial fraction
  int quality = 0;         // jpeg only
};

StepParams severity_to_params(DistortionGroup group, int severity, int num_levels);
// Down-scale factor for a resize severity: 0.9 at level 1 to 0.5 at the top.
double resize_factor_for_severity(int severity, int num_levels);

// A step with its random choices (signs, offsets, noise seed) resolved.
struct RealizedStep {
  DistortionGroup group = DistortionGroup::Blur;
  int severity = 1;
  double value = 0.0;  // sigma, stddev, offset, gain, or quality
  std::array<double, 3> channel_offsets{};
  SpatialParams spatial;
  std::uint64_t noise_seed = 0;
};

std::vector<RealizedStep> realize_plan(const DistortionPlan& plan);

PixelBuffer apply_step(const PixelBuffer& buf, const RealizedStep& step,
                       const ImageCodec* codec);

// Applies the steps in order. A jpeg step without a codec raises
// DegradationError.
PixelBuffer apply_plan(const PixelBuffer& buf, const DistortionPlan& plan,
                       const ImageCodec* codec);

struct ChainResult {
  PixelBuffer image;
  std::vector<DistortionPlan> hops;

  std::size_t step_count() const;
};

// `hops` independent plans, each ending in a re-encoding jpeg step.
ChainResult chain_degrade(const PixelBuffer& buf, int hops, const AugParams& params,
                          rng::Engine& engine, const ImageCodec* codec);

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SweepKind { Jpeg, Resize, Blur };

std::string_view to_string(SweepKind kind);
SweepKind parse_sweep_kind(std::string_view text);

inline constexpr std::array<double, 7> kJpegSweepQualities = {100, 90, 80, 70, 60, 50, 40};
inline constexpr std::array<double, 7> kResizeSweepFactors = {0.5, 0.75, 0.9, 1.0, 1.25, 1.5, 2.0};
inline constexpr std::array<double, 6> kBlurSweepSigmas = {0.0, 0.4, 0.8, 1.2, 1.6, 2.0};

std::span<const double> sweep_grid(SweepKind kind);

// Perturbation tag for one sweep point: jpeg_qf90, resize_0.9, blur_1.2.
std::string sweep_tag(SweepKind kind, double intensity);

struct SweepPoint {
  double intensity = 0.0;
  PixelBuffer image;
};

std::vector<SweepPoint> sweep(const PixelBuffer& buf, SweepKind kind, const ImageCodec* codec);

// ---------------------------------------------------------------------------
// Image files
// ---------------------------------------------------------------------------

// 8-bit RGB. PPM (P6) is always supported; PNG when built with libpng.
PixelBuffer read_image(const std::string& path);
void write_image(const std::string& path, const PixelBuffer& buf);
bool png_supported();

}  // namespace dualgate
