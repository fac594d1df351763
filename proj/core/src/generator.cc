// Copyright 2026 The launchsim Authors
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

// Synthetic launch profiles. Only the mt19937_64 bit stream is taken from
// the standard library; the distributions are written out here so that
// output does not depend on the library implementation.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "launchsim/workload.h"

namespace launchsim {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1)
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Inclusive.
  std::int64_t UniformInt(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  double Normal() {
    const double u1 = 1.0 - Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double LogNormal(double median, double sigma) {
    return median * std::exp(sigma * Normal());
  }

 private:
  std::mt19937_64 engine_;
};

struct ClassShape {
  std::int64_t small_min, small_max;     // small file count
  double ratio_min, ratio_max;           // small / large count
  double small_median;                   // bytes
  double small_sigma;
  double large_median;
  double large_sigma;
  double small_share_min, small_share_max;  // small bytes / large bytes
  double split;                          // anonymous share of total_alloc
};

constexpr Bytes kSmallCeiling = 124 * kKiB;
constexpr Bytes kLargeFloor = 128 * kKiB;
constexpr Bytes kLargeCeiling = 256 * kMiB;
constexpr Bytes kHeaderMax = 64 * kKiB;
constexpr Bytes kSegmentMax = 8 * kMiB;
constexpr double kCpuShare = 0.3;
constexpr double kSmallHotShare = 0.2;
constexpr double kSettledAnonShare = 0.25;  // anonymous bytes kept after launch
constexpr Bytes kLowAllocCap = 300 * kMiB;

ClassShape ShapeFor(AppClass c) {
  if (c == AppClass::kGbScale) {
    return {900, 1100, 5.0, 7.5, 24.0 * kKiB, 0.7, 2.0 * kMiB, 1.2,
            0.028, 0.042, 0.66};
  }
  return {150, 400, 4.5, 7.5, 16.0 * kKiB, 0.8, 1.0 * kMiB, 1.0,
          0.08, 0.14, 0.60};
}

Bytes Align4K(double v, Bytes lo, Bytes hi) {
  const auto pages = std::llround(v / static_cast<double>(kPageSize));
  return std::clamp<Bytes>(pages * kPageSize, lo, hi);
}

// Draws `n` sizes and scales them to roughly `target` bytes.
std::vector<Bytes> DrawSizes(Rng& rng, std::int64_t n, double median,
                             double sigma, double target, Bytes lo, Bytes hi) {
  std::vector<double> raw(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (auto& v : raw) {
    v = std::clamp(rng.LogNormal(median, sigma), static_cast<double>(lo),
                   static_cast<double>(hi));
    sum += v;
  }
  const double scale = target / sum;
  std::vector<Bytes> out;
  out.reserve(raw.size());
  for (double v : raw) out.push_back(Align4K(v * scale, lo, hi));
  return out;
}

Bytes Sum(const std::vector<Bytes>& v) {
  Bytes s = 0;
  for (Bytes b : v) s += b;
  return s;
}

struct IoItem {
  double key;
  std::string file_id;
  Bytes offset;
  Bytes length;
};

}  // namespace

LaunchProfile GenerateProfile(std::uint64_t seed, AppClass app_class) {
  Rng rng(seed);
  const ClassShape shape = ShapeFor(app_class);

  std::vector<Bytes> small;
  std::vector<Bytes> large;
  Bytes alloc_target = 0;
  for (;;) {
    const std::int64_t n_small = rng.UniformInt(shape.small_min, shape.small_max);
    const double ratio = rng.Uniform(shape.ratio_min, shape.ratio_max);
    const std::int64_t n_large =
        std::max<std::int64_t>(1, std::llround(n_small / ratio));
    const double share = rng.Uniform(shape.small_share_min, shape.small_share_max);
    double large_target;
    if (app_class == AppClass::kGbScale) {
      large_target = rng.Uniform(1.0, 1.15) * static_cast<double>(kGiB);
    } else {
      alloc_target = static_cast<Bytes>(rng.Uniform(140.0, 290.0) * kMiB);
      const double file_target = (1.0 - shape.split) * alloc_target;
      large_target = file_target / (1.0 + share);
    }
    small = DrawSizes(rng, n_small, shape.small_median, shape.small_sigma,
                      share * large_target, kPageSize, kSmallCeiling);
    large = DrawSizes(rng, n_large, shape.large_median, shape.large_sigma,
                      large_target, kLargeFloor, kLargeCeiling);
    const double count_ratio =
        static_cast<double>(small.size()) / static_cast<double>(large.size());
    const double byte_ratio =
        static_cast<double>(Sum(small)) / static_cast<double>(Sum(large));
    bool ok = count_ratio >= 4.0 && count_ratio <= 8.0;
    if (app_class == AppClass::kGbScale) {
      ok = ok && byte_ratio >= 0.02 && byte_ratio <= 0.05 &&
           Sum(small) + Sum(large) >= kGiB;
    } else {
      ok = ok && Sum(small) + Sum(large) <=
                     static_cast<Bytes>((1.0 - shape.split) * kLowAllocCap);
    }
    if (ok) break;
  }

  LaunchProfile p;
  p.app_id = std::string(app_class == AppClass::kGbScale ? "gb-" : "low-") +
             std::to_string(seed % 100000);
  p.app_class = app_class;

  std::vector<IoItem> items;
  for (std::size_t i = 0; i < small.size(); ++i) {
    FileRecord f;
    f.file_id = "s" + std::to_string(i);
    f.size = small[i];
    f.access_count =
        rng.Uniform() < kSmallHotShare ? static_cast<int>(rng.UniformInt(2, 8)) : 1;
    f.segments.push_back({0, f.size, f.access_count});
    items.push_back({rng.Uniform(), f.file_id, 0, f.size});
    p.files.push_back(std::move(f));
  }
  for (std::size_t i = 0; i < large.size(); ++i) {
    FileRecord f;
    f.file_id = "l" + std::to_string(i);
    f.size = large[i];
    const Bytes header =
        std::max(kPageSize, std::min(kHeaderMax, AlignDown(f.size / 4, kPageSize)));
    const int header_count =
        rng.Uniform() < 0.5 ? static_cast<int>(rng.UniformInt(2, 8)) : 1;
    f.segments.push_back({0, header, header_count});
    for (Bytes off = header; off < f.size; off += kSegmentMax) {
      f.segments.push_back({off, std::min(kSegmentMax, f.size - off), 1});
    }
    f.access_count = header_count;
    std::vector<double> keys;
    for (std::size_t k = 0; k < f.segments.size(); ++k) keys.push_back(rng.Uniform());
    std::sort(keys.begin(), keys.end());
    for (std::size_t k = 0; k < f.segments.size(); ++k) {
      items.push_back({keys[k], f.file_id, f.segments[k].offset,
                       f.segments[k].length});
    }
    p.files.push_back(std::move(f));
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const IoItem& a, const IoItem& b) { return a.key < b.key; });

  // Uncontended read time on the default device sizes the CPU work.
  const IoModel io(DefaultBandwidthCurve());
  double io_seconds = 0.0;
  for (const auto& item : items) {
    io_seconds += static_cast<double>(item.length) /
                  io.Bandwidth(io.BlockFor(item.length, 128 * kKiB));
  }
  const double cpu_us_total =
      io_seconds * kCpuShare / (1.0 - kCpuShare) * kMicrosPerSecond;

  std::vector<std::size_t> cpu_slots;
  std::vector<double> weights;
  auto add_cpu = [&] {
    cpu_slots.push_back(p.phases.size());
    weights.push_back(rng.Uniform(0.5, 1.5));
    p.phases.push_back(CpuPhase{0});
  };
  add_cpu();
  std::size_t next = 0;
  while (next < items.size()) {
    const auto burst = static_cast<std::size_t>(rng.UniformInt(1, 6));
    for (std::size_t k = 0; k < burst && next < items.size(); ++k, ++next) {
      p.phases.push_back(
          IoPhase{items[next].file_id, items[next].offset, items[next].length});
      p.total_file_bytes += items[next].length;
    }
    add_cpu();
  }
  double weight_sum = 0.0;
  for (double w : weights) weight_sum += w;
  Micros assigned = 0;
  const auto cpu_total = static_cast<Micros>(std::llround(cpu_us_total));
  for (std::size_t k = 0; k < cpu_slots.size(); ++k) {
    Micros d = k + 1 == cpu_slots.size()
                   ? cpu_total - assigned
                   : static_cast<Micros>(cpu_us_total * weights[k] / weight_sum);
    assigned += d;
    std::get<CpuPhase>(p.phases[cpu_slots[k]]).duration_us = d;
  }

  if (app_class == AppClass::kGbScale) {
    p.total_alloc = AlignUp(
        static_cast<Bytes>(std::ceil(p.total_file_bytes / (1.0 - shape.split))),
        kPageSize);
  } else {
    p.total_alloc = std::min(
        kLowAllocCap,
        std::max(p.total_file_bytes,
                 AlignUp(static_cast<Bytes>(p.total_file_bytes / (1.0 - shape.split)),
                         kPageSize)));
  }
  p.anon_file_split = static_cast<double>(p.total_alloc - p.total_file_bytes) /
                      static_cast<double>(p.total_alloc);
  p.baseline_footprint =
      p.total_file_bytes +
      AlignDown(static_cast<Bytes>(kSettledAnonShare *
                                   static_cast<double>(p.AnonBytes())),
                kPageSize);
  return p;
}

}  // namespace launchsim
