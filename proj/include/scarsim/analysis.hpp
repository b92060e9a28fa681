#pragma once

// Post-processing of quench results: imbalance, damped-cosine fits, the
// decay-rate plane, normalized in-phase spectra and microstate matrices.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "scarsim/common.hpp"
#include "scarsim/hilbert.hpp"
#include "scarsim/quench_result.hpp"

namespace scarsim {

/// <n>_A - <n>_B per snapshot.
std::vector<double> imbalance(const QuenchResult& result);

/// y0 + C cos(omega_tilde t) exp(-t / tau)
struct DampedCosineFit {
  double y0 = 0.0;
  double c = 0.0;
  double omega_tilde = 0.0;  // rad/us
  double tau = 0.0;          // us
  /// Standard errors in the order y0, C, omega_tilde, tau.
  std::array<double, 4> stderr_{};
  /// Covariance of (y0, C, omega_tilde, 1/tau).
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;

  double operator()(double t) const;
  nlohmann::json to_json() const;
};

/// Levenberg-Marquardt fit. Needs at least 20 samples covering two
/// oscillation periods; a constant series returns converged = false.
DampedCosineFit fit_damped_cosine(std::span<const double> times,
                                  std::span<const double> series);

struct PlanePoint {
  double x;        // MHz
  double y;        // MHz
  double inv_tau;  // MHz
};

/// 1/tau = alpha x + beta y + inv_tau0
struct PlaneFit {
  double alpha = 0.0;
  double beta = 0.0;
  double inv_tau0 = 0.0;
  double se_alpha = 0.0;
  double se_beta = 0.0;
  double se_inv_tau0 = 0.0;
  double rss = 0.0;
  double r_squared = 0.0;
  std::size_t n_points = 0;

  nlohmann::json to_json() const;
};

/// Ordinary least squares; rank-deficient designs raise InvalidArgument.
/// Standard errors are NaN when there are no residual degrees of freedom.
PlaneFit fit_decay_plane(std::span<const PlanePoint> points);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Normalized in-phase intensity |S(omega)|^2.
struct Spectrum {
  std::vector<double> omegas;   // rad per time unit, 0 .. Nyquist
  std::vector<double> s_tilde;  // mean-subtracted in-phase transform
  std::vector<double> s2;       // calibrated intensity
  double window = 0.0;          // T
  double reference_omega = 0.0;
  /// Intensity of the reference cosine at reference_omega before scaling.
  double calibration = 1.0;
  /// Total-intensity normalization denominator, 2 (T / 2 pi) int |S~|^2.
  double denominator = 0.0;
  /// Sample times, kept so the calibration can be redone at another
  /// reference frequency.
  std::vector<double> times;

  double grid_step() const;
  /// Linear interpolation of s2; out-of-range frequencies are an error.
  double at(double omega) const;
};

/// Frequency grid spacing used by fourier_spectrum: 2 pi / (8 T).
inline constexpr int kGridRefinement = 8;

/// Mean-subtracted in-phase transform by trapezoidal quadrature, normalized
/// by the total integrated intensity and scaled so that cos(w_ref t) sampled
/// on the same times peaks at exactly 1 at w_ref. Without an explicit
/// reference the spectrum's own strongest grid frequency is used.
Spectrum fourier_spectrum(std::span<const double> times,
                          std::span<const double> series,
                          std::optional<double> reference_omega = std::nullopt);

/// Same spectrum, recalibrated against cos(w_ref t).
Spectrum recalibrated(const Spectrum& spectrum, double reference_omega);

/// |S(omega_m / 2)|^2 with the calibration taken at omega_m / 2.
double subharmonic_weight(const Spectrum& spectrum, double omegam);
/// |S(omega_m / 4)|^2 with the calibration taken at omega_m / 4.
double fourth_subharmonic_weight(const Spectrum& spectrum, double omegam);

/// Grid frequency with the largest intensity at or above min_omega.
double dominant_peak(const Spectrum& spectrum, double min_omega = 0.0);

/// (1/T) int y dt by the trapezoid rule, T = t.back() - t.front().
double time_average(std::span<const double> t, std::span<const double> y);

/// omega_m / Omega = 0.75, 0.85, ..., 1.75
std::vector<double> rigidity_grid();

/// Sum of subharmonic weights. The drive grid must be rigidity_grid()
/// to within 1e-9.
double subharmonic_rigidity(std::span<const double> omegam_over_omega,
                            std::span<const double> weights);

/// Rows are snapshots, columns microstate classes in ordering order. Each
/// row is checked to sum to one within 1e-9.
Eigen::MatrixXd microstate_matrix(const QuenchResult& result,
                                  const MicrostateOrdering& ordering);

}  // namespace scarsim
