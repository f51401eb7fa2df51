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

#include "dualgate/distort.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "dualgate/error.hpp"

namespace dualgate {

namespace {

// Reflect-101 padding for integer indices: -1 -> 1, n -> n - 2.
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i >= n ? period - i : i;
}

// Same reflection for continuous coordinates in [0, n - 1].
double reflect_coord(double x, int n) {
  if (n == 1) return 0.0;
  const double period = 2.0 * (n - 1);
  x = std::fmod(std::abs(x), period);
  return x > n - 1 ? period - x : x;
}

double sample_bilinear(const PixelBuffer& buf, double x, double y, int c) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, buf.width() - 1);
  const int y1 = std::min(y0 + 1, buf.height() - 1);
  const double tx = x - x0;
  const double ty = y - y0;
  const double top = buf.at(x0, y0, c) * (1.0 - tx) + buf.at(x1, y0, c) * tx;
  const double bottom = buf.at(x0, y1, c) * (1.0 - tx) + buf.at(x1, y1, c) * tx;
  return top * (1.0 - ty) + bottom * ty;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[i + radius] = w;
    total += w;
  }
  for (double& w : k) w /= total;
  return k;
}

template <typename F>
PixelBuffer map_samples(const PixelBuffer& buf, F&& f) {
  PixelBuffer out = buf;
  auto s = out.samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = f(s[i], static_cast<int>(i % PixelBuffer::kChannels));
  }
  out.clamp();
  return out;
}

double lerp_levels(double mild, double strong, int severity, int num_levels) {
  if (num_levels <= 1) return mild;
  const double t = static_cast<double>(severity - 1) / static_cast<double>(num_levels - 1);
  return mild + (strong - mild) * t;
}

void check_severity(int severity, int num_levels) {
  if (num_levels < 1 || severity < 1 || severity > num_levels) {
    throw InputError("severity " + std::to_string(severity) + " outside [1, " +
                     std::to_string(num_levels) + "]");
  }
}

std::string format_intensity(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  std::string s = os.str();
  if (s.find('.') == std::string::npos) s += ".0";
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// PixelBuffer
// ---------------------------------------------------------------------------

PixelBuffer::PixelBuffer(int width, int height) : PixelBuffer(width, height, 0.0) {}

PixelBuffer::PixelBuffer(int width, int height, double fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw InputError("image dimensions must be positive, got " + std::to_string(width) +
                     "x" + std::to_string(height));
  }
  if (!std::isfinite(fill)) throw InputError("non-finite fill value");
  samples_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * kChannels,
                  std::clamp(fill, 0.0, 1.0));
}

PixelBuffer::PixelBuffer(int width, int height, std::vector<double> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (width <= 0 || height <= 0) {
    throw InputError("image dimensions must be positive");
  }
  if (samples_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * kChannels) {
    throw InputError("sample count does not match " + std::to_string(width) + "x" +
                     std::to_string(height) + "x3");
  }
  for (double v : samples_) {
    if (!std::isfinite(v)) throw InputError("non-finite pixel sample");
  }
  clamp();
}

void PixelBuffer::clamp() {
  for (double& v : samples_) v = std::clamp(v, 0.0, 1.0);
}

double PixelBuffer::mean() const {
  if (samples_.empty()) return 0.0;
  return std::accumulate(samples_.begin(), samples_.end(), 0.0) /
         static_cast<double>(samples_.size());
}

// ---------------------------------------------------------------------------
// Ops
// ---------------------------------------------------------------------------

PixelBuffer apply_blur(const PixelBuffer& buf, double sigma) {
  if (!std::isfinite(sigma) || sigma < 0.0) throw InputError("blur sigma must be >= 0");
  if (sigma == 0.0) return buf;
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = buf.width();
  const int h = buf.height();

  PixelBuffer horizontal(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < PixelBuffer::kChannels; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += kernel[k + radius] * buf.at(reflect_index(x + k, w), y, c);
        }
        horizontal.at(x, y, c) = acc;
      }
    }
  }
  PixelBuffer out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < PixelBuffer::kChannels; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += kernel[k + radius] * horizontal.at(x, reflect_index(y + k, h), c);
        }
        out.at(x, y, c) = acc;
      }
    }
  }
  out.clamp();
  return out;
}

PixelBuffer apply_resize(const PixelBuffer& buf, double factor) {
  if (!std::isfinite(factor) || factor <= 0.0) {
    throw InputError("resize factor must be positive and finite");
  }
  const int nw = std::max(1, static_cast<int>(std::lround(buf.width() * factor)));
  const int nh = std::max(1, static_cast<int>(std::lround(buf.height() * factor)));
  const double sx = static_cast<double>(buf.width()) / nw;
  const double sy = static_cast<double>(buf.height()) / nh;

  PixelBuffer out(nw, nh);
  for (int y = 0; y < nh; ++y) {
    const double src_y = std::clamp((y + 0.5) * sy - 0.5, 0.0, buf.height() - 1.0);
    for (int x = 0; x < nw; ++x) {
      const double src_x = std::clamp((x + 0.5) * sx - 0.5, 0.0, buf.width() - 1.0);
      for (int c = 0; c < PixelBuffer::kChannels; ++c) {
        out.at(x, y, c) = sample_bilinear(buf, src_x, src_y, c);
      }
    }
  }
  out.clamp();
  return out;
}

PixelBuffer apply_jpeg(const PixelBuffer& buf, int quality, const ImageCodec& codec) {
  if (quality < 1 || quality > 100) throw InputError("jpeg quality must lie in [1, 100]");
  try {
    PixelBuffer out = codec.jpeg_round_trip(buf, quality);
    out.clamp();
    return out;
  } catch (const DegradationError&) {
    throw;
  } catch (const std::exception& e) {
    throw DegradationError("jpeg", codec.name() + ": " + e.what());
  }
}

PixelBuffer apply_noise(const PixelBuffer& buf, double stddev, std::uint64_t seed) {
  if (!std::isfinite(stddev) || stddev < 0.0) throw InputError("noise stddev must be >= 0");
  rng::Engine engine(seed);
  return map_samples(buf, [&](double v, int) { return v + stddev * rng::standard_normal(engine); });
}

PixelBuffer apply_brightness(const PixelBuffer& buf, double offset) {
  if (!std::isfinite(offset)) throw InputError("brightness offset must be finite");
  return map_samples(buf, [&](double v, int) { return v + offset; });
}

PixelBuffer apply_contrast(const PixelBuffer& buf, double gain) {
  if (!std::isfinite(gain) || gain < 0.0) throw InputError("contrast gain must be >= 0");
  return map_samples(buf, [&](double v, int) { return (v - 0.5) * gain + 0.5; });
}

PixelBuffer apply_color_shift(const PixelBuffer& buf, const std::array<double, 3>& offsets) {
  for (double o : offsets) {
    if (!std::isfinite(o)) throw InputError("color shift offsets must be finite");
  }
  return map_samples(buf, [&](double v, int c) { return v + offsets[static_cast<std::size_t>(c)]; });
}

PixelBuffer apply_spatial(const PixelBuffer& buf, const SpatialParams& p) {
  constexpr double kSlack = 1e-12;
  if (!(std::abs(p.dx_frac) <= kMaxSpatialTranslation + kSlack) ||
      !(std::abs(p.dy_frac) <= kMaxSpatialTranslation + kSlack) ||
      !(std::abs(p.rotation_deg) <= kMaxSpatialRotationDeg + kSlack)) {
    throw InputError("spatial warp limited to 2% translation and 2 degrees rotation");
  }
  const int w = buf.width();
  const int h = buf.height();
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  const double dx = p.dx_frac * w;
  const double dy = p.dy_frac * h;
  const double theta = p.rotation_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);

  PixelBuffer out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Inverse map: undo translation, then rotate by -theta about the center.
      const double u = x - cx - dx;
      const double v = y - cy - dy;
      const double src_x = reflect_coord(cs * u + sn * v + cx, w);
      const double src_y = reflect_coord(-sn * u + cs * v + cy, h);
      for (int c = 0; c < PixelBuffer::kChannels; ++c) {
        out.at(x, y, c) = sample_bilinear(buf, src_x, src_y, c);
      }
    }
  }
  out.clamp();
  return out;
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

std::string_view to_string(DistortionGroup group) {
  switch (group) {
    case DistortionGroup::Blur: return "blur";
    case DistortionGroup::ColorShift: return "color_shift";
    case DistortionGroup::Jpeg: return "jpeg";
    case DistortionGroup::Noise: return "noise";
    case DistortionGroup::Brightness: return "brightness";
    case DistortionGroup::Spatial: return "spatial";
    case DistortionGroup::Contrast: return "contrast";
  }
  return "?";
}

DistortionGroup parse_group(std::string_view text) {
  for (DistortionGroup g : kAllGroups) {
    if (to_string(g) == text) return g;
  }
  throw InputError("unknown distortion group '" + std::string(text) + "'");
}

void validate(const AugParams& params) {
  if (params.max_distortions < 1 ||
      params.max_distortions > static_cast<int>(kAllGroups.size())) {
    throw ConfigError("max_distortions must lie in [1, 7]");
  }
  if (params.num_levels < 1) throw ConfigError("num_levels must be positive");
  if (!(params.aug_prob >= 0.0 && params.aug_prob <= 1.0)) {
    throw ConfigError("aug_prob must lie in [0, 1]");
  }
  if (params.severity_sigma && !(*params.severity_sigma > 0.0)) {
    throw ConfigError("severity_sigma must be positive");
  }
  if (params.severity_mu && !std::isfinite(*params.severity_mu)) {
    throw ConfigError("severity_mu must be finite");
  }
}

std::vector<double> severity_weights(const AugParams& params) {
  validate(params);
  const double levels = params.num_levels;
  const double mu = params.severity_mu.value_or((levels + 1.0) / 2.0);
  const double sigma = params.severity_sigma.value_or(levels / 4.0);
  std::vector<double> w(static_cast<std::size_t>(params.num_levels));
  double total = 0.0;
  for (int s = 1; s <= params.num_levels; ++s) {
    const double z = (s - mu) / sigma;
    w[static_cast<std::size_t>(s - 1)] = std::exp(-0.5 * z * z);
    total += w[static_cast<std::size_t>(s - 1)];
  }
  for (double& x : w) x /= total;
  return w;
}

std::optional<DistortionPlan> sample_plan(const AugParams& params, rng::Engine& engine) {
  const auto weights = severity_weights(params);
  if (!(rng::uniform01(engine) < params.aug_prob)) return std::nullopt;

  DistortionPlan plan;
  plan.seed = engine();
  plan.num_levels = params.num_levels;
  const auto k = 1 + rng::uniform_index(engine, static_cast<std::uint64_t>(params.max_distortions));

  // Partial Fisher-Yates over the seven groups.
  auto groups = kAllGroups;
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + rng::uniform_index(engine, groups.size() - i);
    std::swap(groups[i], groups[j]);
    const int severity = static_cast<int>(rng::weighted_index(engine, weights)) + 1;
    plan.steps.push_back(DistortionStep{groups[i], severity});
  }
  return plan;
}

StepParams severity_to_params(DistortionGroup group, int severity, int num_levels) {
  check_severity(severity, num_levels);
  StepParams p;
  p.group = group;
  switch (group) {
    case DistortionGroup::Blur:
      p.magnitude = lerp_levels(0.4, 2.0, severity, num_levels);
      break;
    case DistortionGroup::Jpeg:
      p.quality = static_cast<int>(std::lround(lerp_levels(90.0, 40.0, severity, num_levels)));
      p.magnitude = p.quality;
      break;
    case DistortionGroup::Noise:
      p.magnitude = lerp_levels(0.01, 0.1, severity, num_levels);
      break;
    case DistortionGroup::Brightness:
      p.magnitude = lerp_levels(0.05, 0.25, severity, num_levels);
      break;
    case DistortionGroup::Contrast:
      p.magnitude = lerp_levels(0.05, 0.4, severity, num_levels);
      break;
    case DistortionGroup::ColorShift:
      p.magnitude = lerp_levels(0.02, 0.1, severity, num_levels);
      break;
    case DistortionGroup::Spatial:
      p.magnitude = lerp_levels(0.005, 0.02, severity, num_levels);
      break;
  }
  return p;
}

double resize_factor_for_severity(int severity, int num_levels) {
  check_severity(severity, num_levels);
  return lerp_levels(0.9, 0.5, severity, num_levels);
}

std::vector<RealizedStep> realize_plan(const DistortionPlan& plan) {
  rng::Engine engine(plan.seed);
  std::vector<RealizedStep> out;
  out.reserve(plan.steps.size());
  for (const auto& step : plan.steps) {
    const StepParams p = severity_to_params(step.group, step.severity, plan.num_levels);
    RealizedStep r;
    r.group = step.group;
    r.severity = step.severity;
    switch (step.group) {
      case DistortionGroup::Blur:
        r.value = p.magnitude;
        break;
      case DistortionGroup::Noise:
        r.value = p.magnitude;
        r.noise_seed = engine();
        break;
      case DistortionGroup::Jpeg:
        r.value = p.quality;
        break;
      case DistortionGroup::Brightness:
        r.value = rng::random_sign(engine) * p.magnitude;
        break;
      case DistortionGroup::Contrast:
        r.value = 1.0 + rng::random_sign(engine) * p.magnitude;
        break;
      case DistortionGroup::ColorShift:
        for (double& o : r.channel_offsets) o = rng::random_sign(engine) * p.magnitude;
        break;
      case DistortionGroup::Spatial: {
        // Translation at the full magnitude, rotation scaled so that the top
        // magnitude maps to the 2 degree limit.
        r.spatial.dx_frac = rng::random_sign(engine) * p.magnitude;
        r.spatial.dy_frac = rng::random_sign(engine) * p.magnitude;
        r.spatial.rotation_deg = rng::random_sign(engine) * kMaxSpatialRotationDeg *
                                 (p.magnitude / kMaxSpatialTranslation);
        break;
      }
    }
    out.push_back(r);
  }
  return out;
}

PixelBuffer apply_step(const PixelBuffer& buf, const RealizedStep& step, const ImageCodec* codec) {
  switch (step.group) {
    case DistortionGroup::Blur: return apply_blur(buf, step.value);
    case DistortionGroup::Noise: return apply_noise(buf, step.value, step.noise_seed);
    case DistortionGroup::Brightness: return apply_brightness(buf, step.value);
    case DistortionGroup::Contrast: return apply_contrast(buf, step.value);
    case DistortionGroup::ColorShift: return apply_color_shift(buf, step.channel_offsets);
    case DistortionGroup::Spatial: return apply_spatial(buf, step.spatial);
    case DistortionGroup::Jpeg:
      if (codec == nullptr) throw DegradationError("jpeg", "no codec adapter configured");
      return apply_jpeg(buf, static_cast<int>(step.value), *codec);
  }
  return buf;
}

PixelBuffer apply_plan(const PixelBuffer& buf, const DistortionPlan& plan, const ImageCodec* codec) {
  PixelBuffer out = buf;
  for (const auto& step : realize_plan(plan)) out = apply_step(out, step, codec);
  return out;
}

std::size_t ChainResult::step_count() const {
  std::size_t n = 0;
  for (const auto& hop : hops) n += hop.steps.size();
  return n;
}

ChainResult chain_degrade(const PixelBuffer& buf, int hops, const AugParams& params,
                          rng::Engine& engine, const ImageCodec* codec) {
  if (hops < 1) throw InputError("chain_degrade needs at least one hop");
  const auto weights = severity_weights(params);
  ChainResult result{buf, {}};
  for (int hop = 0; hop < hops; ++hop) {
    auto sampled = sample_plan(params, engine);
    DistortionPlan plan;
    if (sampled) {
      plan = std::move(*sampled);
    } else {
      plan.seed = engine();
      plan.num_levels = params.num_levels;
    }
    // Every hop re-encodes. Keep an existing jpeg step, otherwise make room
    // for one at the end.
    const bool has_jpeg = std::any_of(plan.steps.begin(), plan.steps.end(), [](const auto& s) {
      return s.group == DistortionGroup::Jpeg;
    });
    if (!has_jpeg) {
      if (static_cast<int>(plan.steps.size()) >= params.max_distortions) plan.steps.pop_back();
      const int severity = static_cast<int>(rng::weighted_index(engine, weights)) + 1;
      plan.steps.push_back(DistortionStep{DistortionGroup::Jpeg, severity});
    }
    result.image = apply_plan(result.image, plan, codec);
    result.hops.push_back(std::move(plan));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

std::string_view to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::Jpeg: return "jpeg";
    case SweepKind::Resize: return "resize";
    case SweepKind::Blur: return "blur";
  }
  return "?";
}

SweepKind parse_sweep_kind(std::string_view text) {
  for (SweepKind k : {SweepKind::Jpeg, SweepKind::Resize, SweepKind::Blur}) {
    if (to_string(k) == text) return k;
  }
  throw InputError("unknown sweep kind '" + std::string(text) + "'");
}

std::span<const double> sweep_grid(SweepKind kind) {
  switch (kind) {
    case SweepKind::Jpeg: return kJpegSweepQualities;
    case SweepKind::Resize: return kResizeSweepFactors;
    case SweepKind::Blur: return kBlurSweepSigmas;
  }
  return {};
}

std::string sweep_tag(SweepKind kind, double intensity) {
  if (kind == SweepKind::Jpeg) {
    return "jpeg_qf" + std::to_string(static_cast<int>(std::lround(intensity)));
  }
  return std::string(to_string(kind)) + "_" + format_intensity(intensity);
}

std::vector<SweepPoint> sweep(const PixelBuffer& buf, SweepKind kind, const ImageCodec* codec) {
  std::vector<SweepPoint> out;
  for (double intensity : sweep_grid(kind)) {
    switch (kind) {
      case SweepKind::Jpeg:
        if (codec == nullptr) throw DegradationError("jpeg", "no codec adapter configured");
        out.push_back({intensity, apply_jpeg(buf, static_cast<int>(intensity), *codec)});
        break;
      case SweepKind::Resize:
        out.push_back({intensity, apply_resize(buf, intensity)});
        break;
      case SweepKind::Blur:
        out.push_back({intensity, apply_blur(buf, intensity)});
        break;
    }
  }
  return out;
}

}  // namespace dualgate
