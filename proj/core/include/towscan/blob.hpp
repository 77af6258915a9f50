#pragma once

#include <span>
#include <vector>

namespace towscan {

/// Default scale ladder in signal samples.
std::vector<double> default_blob_scales();

/// g(sigma_i, x) for every scale, row-major [scales x samples].
struct ScaleSpace {
  std::vector<double> sigmas;
  std::size_t length = 0;
  std::vector<double> response;

  double at(std::size_t scale, std::size_t x) const noexcept { return response[scale * length + x]; }
};

/// Gaussian smoothing with a sampled kernel truncated at 4 sigma and edge
/// replication at the borders.
std::vector<double> gaussian_smooth(std::span<const double> signal, double sigma);

/// Scale-normalized negative second derivative of the smoothed signal,
/// approximated by differences of Gaussians at successive scales:
///   g(s_i) = (L(s_i) - L(s_{i+1})) / (s_{i+1} / s_i - 1).
/// The scale after the last one continues the last ratio. Bright bumps give
/// positive responses. Throws SignalTooShort below 3 samples.
ScaleSpace scale_space_response(std::span<const double> signal, std::span<const double> sigmas);

struct Blob {
  int tow_index = 0;
  /// Position in signal samples, refined to sub-sample precision.
  double position = 0.0;
  /// Image column after mapping through the tow's sampling grid.
  double center_x = 0.0;
  double sigma = 0.0;
  double response = 0.0;
};

/// Local maxima over the 3x3 (scale, x) neighbourhood above `response_floor`.
/// Overlapping detections (|x1 - x2| < max(sigma1, sigma2)) keep the
/// stronger one. Position is refined by parabolic interpolation; sigma stays
/// on the ladder.
/// Returned sorted by position.
std::vector<Blob> detect_blobs(std::span<const double> signal, std::span<const double> sigmas, double response_floor);

/// Largest response anywhere in the scale space (for floor calibration).
double max_response(std::span<const double> signal, std::span<const double> sigmas);

}  // namespace towscan
