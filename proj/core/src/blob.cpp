#include "towscan/blob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "towscan/error.hpp"

namespace towscan {

std::vector<double> default_blob_scales() { return {1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0}; }

std::vector<double> gaussian_smooth(std::span<const double> signal, double sigma) {
  const long n = static_cast<long>(signal.size());
  const long radius = std::max(1L, static_cast<long>(std::ceil(4.0 * sigma)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (long k = -radius; k <= radius; ++k) {
    kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
  }
  const double sum = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (double& k : kernel) k /= sum;

  std::vector<double> out(signal.size(), 0.0);
  for (long x = 0; x < n; ++x) {
    double acc = 0.0;
    for (long k = -radius; k <= radius; ++k) {
      const long i = std::clamp(x + k, 0L, n - 1);
      acc += kernel[static_cast<std::size_t>(k + radius)] * signal[static_cast<std::size_t>(i)];
    }
    out[static_cast<std::size_t>(x)] = acc;
  }
  return out;
}

ScaleSpace scale_space_response(std::span<const double> signal, std::span<const double> sigmas) {
  if (signal.size() < 3) {
    fail(ErrorCode::SignalTooShort, "blob detection needs at least 3 samples, got " + std::to_string(signal.size()));
  }
  if (sigmas.empty()) fail(ErrorCode::InvalidArgument, "scale list is empty");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] >= 0.5) || (i > 0 && !(sigmas[i] > sigmas[i - 1]))) {
      fail(ErrorCode::InvalidArgument, "scales must be ascending and at least 0.5");
    }
  }

  // Responses are invariant to a constant offset; removing the minimum keeps
  // flat signals exactly at zero.
  const double base = *std::min_element(signal.begin(), signal.end());
  std::vector<double> centered(signal.begin(), signal.end());
  for (double& v : centered) v -= base;

  std::vector<double> ladder(sigmas.begin(), sigmas.end());
  const double last_ratio = sigmas.size() > 1 ? sigmas.back() / sigmas[sigmas.size() - 2] : 1.6;
  ladder.push_back(sigmas.back() * last_ratio);

  std::vector<std::vector<double>> smoothed;
  smoothed.reserve(ladder.size());
  for (double s : ladder) smoothed.push_back(gaussian_smooth(centered, s));

  ScaleSpace space;
  space.sigmas.assign(sigmas.begin(), sigmas.end());
  space.length = signal.size();
  space.response.resize(sigmas.size() * signal.size());
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const double norm = ladder[i + 1] / ladder[i] - 1.0;
    for (std::size_t x = 0; x < signal.size(); ++x) {
      space.response[i * signal.size() + x] = (smoothed[i][x] - smoothed[i + 1][x]) / norm;
    }
  }
  return space;
}

double max_response(std::span<const double> signal, std::span<const double> sigmas) {
  const auto space = scale_space_response(signal, sigmas);
  return *std::max_element(space.response.begin(), space.response.end());
}

std::vector<Blob> detect_blobs(std::span<const double> signal, std::span<const double> sigmas, double response_floor) {
  const auto space = scale_space_response(signal, sigmas);
  const long scales = static_cast<long>(space.sigmas.size());
  const long n = static_cast<long>(space.length);

  std::vector<Blob> candidates;
  for (long s = 0; s < scales; ++s) {
    for (long x = 0; x < n; ++x) {
      const double v = space.at(static_cast<std::size_t>(s), static_cast<std::size_t>(x));
      if (!(v > response_floor) || !(v > 0.0)) continue;
      bool is_max = true;
      for (long ds = -1; ds <= 1 && is_max; ++ds) {
        for (long dx = -1; dx <= 1; ++dx) {
          const long ss = s + ds, xx = x + dx;
          if ((ds == 0 && dx == 0) || ss < 0 || ss >= scales || xx < 0 || xx >= n) continue;
          if (space.at(static_cast<std::size_t>(ss), static_cast<std::size_t>(xx)) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (!is_max) continue;

      double offset = 0.0;
      if (x > 0 && x + 1 < n) {
        const double l = space.at(static_cast<std::size_t>(s), static_cast<std::size_t>(x - 1));
        const double r = space.at(static_cast<std::size_t>(s), static_cast<std::size_t>(x + 1));
        const double curvature = l - 2.0 * v + r;
        if (curvature < 0.0) offset = std::clamp(0.5 * (l - r) / curvature, -0.5, 0.5);
      }
      Blob blob;
      blob.position = static_cast<double>(x) + offset;
      blob.sigma = space.sigmas[static_cast<std::size_t>(s)];
      blob.response = v;
      candidates.push_back(blob);
    }
  }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Blob& a, const Blob& b) { return a.response > b.response; });
  std::vector<Blob> kept;
  for (const auto& c : candidates) {
    const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const Blob& k) {
      return std::abs(k.position - c.position) < std::max(k.sigma, c.sigma);
    });
    if (!overlaps) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(), [](const Blob& a, const Blob& b) { return a.position < b.position; });
  return kept;
}

}  // namespace towscan
