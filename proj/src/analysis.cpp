#include "scarsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace scarsim {

double time_average(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size() || t.size() < 2)
    throw InvalidArgument("time_average needs matching series of length >= 2");
  const double span = t.back() - t.front();
  if (!(span > 0.0)) throw InvalidArgument("time_average needs increasing times");
  double s = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k)
    s += 0.5 * (y[k] + y[k - 1]) * (t[k] - t[k - 1]);
  return s / span;
}

std::vector<double> imbalance(const QuenchResult& result) {
  std::vector<double> out(result.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = result.n_a[k] - result.n_b[k];
  return out;
}

namespace {

void check_lengths(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size())
    throw InvalidArgument("time and value series differ in length (" +
                          std::to_string(t.size()) + " vs " +
                          std::to_string(y.size()) + ")");
}

double uniform_step(std::span<const double> t) {
  if (t.size() < 2) throw InvalidArgument("need at least two samples");
  const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(h > 0.0)) throw InvalidArgument("sample times must increase");
  for (std::size_t k = 1; k < t.size(); ++k)
    if (std::abs(t[k] - t[k - 1] - h) > 1e-9 * std::max(1.0, h))
      throw InvalidArgument("spectra need uniformly spaced samples");
  return h;
}

// Trapezoid weights for a uniform grid.
std::vector<double> trapezoid_weights(std::size_t n, double h) {
  std::vector<double> w(n, h);
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

// sum_k w_k f_k cos(omega t_k), cosines from a rotation recurrence.
double cosine_sum(std::span<const double> t, std::span<const double> wf,
                  double omega, double h) {
  cplx z = std::polar(1.0, omega * t.front());
  const cplx r = std::polar(1.0, omega * h);
  double acc = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    acc += wf[k] * z.real();
    z *= r;
    if ((k & 1023u) == 1023u) z /= std::abs(z);
  }
  return acc;
}

struct RawSpectrum {
  std::vector<double> omegas;
  std::vector<double> s_tilde;
  std::vector<double> s11;
  double denominator = 0.0;
  double window = 0.0;
};

std::vector<double> frequency_grid(double window, double h) {
  const double step = kTwoPi / (kGridRefinement * window);
  const double nyquist = kPi / h;
  const auto n = static_cast<std::size_t>(std::floor(nyquist / step + 1e-9));
  std::vector<double> g(n + 1);
  for (std::size_t j = 0; j <= n; ++j) g[j] = static_cast<double>(j) * step;
  return g;
}

RawSpectrum raw_spectrum(std::span<const double> t, std::span<const double> y) {
  const double h = uniform_step(t);
  const double window = t.back() - t.front();
  const auto w = trapezoid_weights(t.size(), h);
  double mean = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) mean += w[k] * y[k];
  mean /= window;
  double spread = 0.0, scale = 0.0;
  for (double v : y) {
    spread = std::max(spread, std::abs(v - mean));
    scale = std::max(scale, std::abs(v));
  }
  // A series flat to rounding has no spectrum.
  const bool flat = spread <= 1e-13 * scale;
  std::vector<double> wf(t.size(), 0.0);
  if (!flat)
    for (std::size_t k = 0; k < t.size(); ++k) wf[k] = w[k] * (y[k] - mean);

  RawSpectrum r;
  r.window = window;
  r.omegas = frequency_grid(window, h);
  r.s_tilde.resize(r.omegas.size());
  for (std::size_t j = 0; j < r.omegas.size(); ++j)
    r.s_tilde[j] = 2.0 / window * cosine_sum(t, wf, r.omegas[j], h);

  double integral = 0.0;
  for (std::size_t j = 1; j < r.omegas.size(); ++j)
    integral += 0.5 * (r.omegas[j] - r.omegas[j - 1]) *
                (r.s_tilde[j] * r.s_tilde[j] + r.s_tilde[j - 1] * r.s_tilde[j - 1]);
  r.denominator = 2.0 * integral * window / kTwoPi;
  r.s11.assign(r.omegas.size(), 0.0);
  if (r.denominator > 0.0)
    for (std::size_t j = 0; j < r.omegas.size(); ++j)
      r.s11[j] = r.s_tilde[j] * r.s_tilde[j] / r.denominator;
  return r;
}

double interpolate(const std::vector<double>& x, const std::vector<double>& y,
                   double at) {
  if (x.empty()) throw InvalidArgument("empty spectrum");
  const double tol = 1e-12 * std::max(1.0, x.back());
  if (at < x.front() - tol || at > x.back() + tol)
    throw InvalidArgument("frequency " + std::to_string(at) +
                          " lies outside the spectrum grid [0, " +
                          std::to_string(x.back()) + "]");
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), at);
  const auto j = static_cast<std::size_t>(it - x.begin());
  const double f = (at - x[j - 1]) / (x[j] - x[j - 1]);
  return (1.0 - f) * y[j - 1] + f * y[j];
}

// Intensity the reference cosine reaches at its own frequency.
double calibration_at(std::span<const double> t, double omega) {
  std::vector<double> ref(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) ref[k] = std::cos(omega * t[k]);
  const auto r = raw_spectrum(t, ref);
  const double c = interpolate(r.omegas, r.s11, omega);
  if (!(c > 0.0))
    throw NumericalError("reference cosine has no intensity at omega = " +
                         std::to_string(omega));
  return c;
}

}  // namespace

double Spectrum::grid_step() const {
  return omegas.size() > 1 ? omegas[1] - omegas[0] : 0.0;
}

double Spectrum::at(double omega) const { return interpolate(omegas, s2, omega); }

Spectrum fourier_spectrum(std::span<const double> times,
                          std::span<const double> series,
                          std::optional<double> reference_omega) {
  check_lengths(times, series);
  if (times.size() < 3) throw InvalidArgument("spectra need at least 3 samples");
  auto raw = raw_spectrum(times, series);

  Spectrum s;
  s.omegas = std::move(raw.omegas);
  s.s_tilde = std::move(raw.s_tilde);
  s.window = raw.window;
  s.denominator = raw.denominator;
  s.times.assign(times.begin(), times.end());
  if (reference_omega) {
    if (!(*reference_omega > 0.0))
      throw InvalidArgument("reference frequency must be positive");
    s.reference_omega = *reference_omega;
  } else {
    const auto it = std::max_element(raw.s11.begin() + 1, raw.s11.end());
    s.reference_omega = s.omegas[static_cast<std::size_t>(it - raw.s11.begin())];
  }
  s.calibration = calibration_at(times, s.reference_omega);
  s.s2.resize(raw.s11.size());
  for (std::size_t j = 0; j < s.s2.size(); ++j)
    s.s2[j] = raw.s11[j] / s.calibration;
  return s;
}

Spectrum recalibrated(const Spectrum& spectrum, double reference_omega) {
  if (!(reference_omega > 0.0))
    throw InvalidArgument("reference frequency must be positive");
  interpolate(spectrum.omegas, spectrum.s2, reference_omega);  // range check
  Spectrum s = spectrum;
  s.reference_omega = reference_omega;
  s.calibration = calibration_at(spectrum.times, reference_omega);
  const double scale = spectrum.calibration / s.calibration;
  for (double& v : s.s2) v *= scale;
  return s;
}

namespace {

double weight_at(const Spectrum& spectrum, double omega) {
  if (std::abs(spectrum.reference_omega - omega) <= 1e-12 * omega)
    return spectrum.at(omega);
  return recalibrated(spectrum, omega).at(omega);
}

}  // namespace

double subharmonic_weight(const Spectrum& spectrum, double omegam) {
  if (!(omegam > 0.0)) throw InvalidArgument("omega_m must be positive");
  return weight_at(spectrum, omegam / 2.0);
}

double fourth_subharmonic_weight(const Spectrum& spectrum, double omegam) {
  if (!(omegam > 0.0)) throw InvalidArgument("omega_m must be positive");
  return weight_at(spectrum, omegam / 4.0);
}

double dominant_peak(const Spectrum& spectrum, double min_omega) {
  std::size_t best = spectrum.omegas.size();
  for (std::size_t j = 0; j < spectrum.omegas.size(); ++j) {
    if (spectrum.omegas[j] < min_omega) continue;
    if (best == spectrum.omegas.size() || spectrum.s2[j] > spectrum.s2[best])
      best = j;
  }
  if (best == spectrum.omegas.size())
    throw InvalidArgument("no grid frequency above the requested minimum");
  return spectrum.omegas[best];
}

std::vector<double> rigidity_grid() {
  std::vector<double> g(11);
  for (int k = 0; k < 11; ++k) g[static_cast<std::size_t>(k)] = 0.75 + 0.1 * k;
  return g;
}

double subharmonic_rigidity(std::span<const double> omegam_over_omega,
                            std::span<const double> weights) {
  const auto grid = rigidity_grid();
  if (omegam_over_omega.size() != grid.size() || weights.size() != grid.size())
    throw InvalidArgument("rigidity needs exactly the 11 drive frequencies "
                          "0.75, 0.85, ..., 1.75 Omega");
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (std::abs(omegam_over_omega[k] - grid[k]) > 1e-9)
      throw InvalidArgument("rigidity grid point " + std::to_string(k) +
                            " is " + std::to_string(omegam_over_omega[k]) +
                            ", expected " + std::to_string(grid[k]));
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

Eigen::MatrixXd microstate_matrix(const QuenchResult& result,
                                  const MicrostateOrdering& ordering) {
  if (result.microstate_probs.size() != result.size())
    throw InvalidArgument("result carries no microstate probabilities");
  const auto n = static_cast<Eigen::Index>(ordering.classes.size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(result.size()), n);
  for (std::size_t k = 0; k < result.size(); ++k) {
    const auto& row = result.microstate_probs[k];
    if (static_cast<Eigen::Index>(row.size()) != n)
      throw InvalidArgument("microstate row has " + std::to_string(row.size()) +
                            " entries, ordering has " + std::to_string(n));
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double p = row[static_cast<std::size_t>(j)];
      if (p < -1e-12 || p > 1.0 + 1e-12)
        throw InvalidArgument("microstate probability outside [0, 1]");
      m(static_cast<Eigen::Index>(k), j) = p;
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw NumericalError("microstate probabilities sum to " +
                           std::to_string(total));
  }
  return m;
}

double DampedCosineFit::operator()(double t) const {
  return y0 + c * std::cos(omega_tilde * t) * std::exp(-t / tau);
}

nlohmann::json DampedCosineFit::to_json() const {
  return {{"y0", y0},
          {"C", c},
          {"omega_tilde", omega_tilde},
          {"tau", tau},
          {"stderr",
           {{"y0", stderr_[0]},
            {"C", stderr_[1]},
            {"omega_tilde", stderr_[2]},
            {"tau", stderr_[3]}}},
          {"rss", rss},
          {"iterations", iterations},
          {"converged", converged}};
}

namespace {

struct Model {
  std::span<const double> t;
  std::span<const double> y;

  // Residuals y - f and Jacobian of f for p = (y0, C, omega, gamma).
  double evaluate(const Eigen::Vector4d& p, Eigen::VectorXd& r,
                  Eigen::MatrixXd* jac) const {
    const auto n = static_cast<Eigen::Index>(t.size());
    r.resize(n);
    if (jac) jac->resize(n, 4);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double tk = t[static_cast<std::size_t>(k)];
      const double e = std::exp(-p(3) * tk);
      const double cs = std::cos(p(2) * tk);
      const double sn = std::sin(p(2) * tk);
      r(k) = y[static_cast<std::size_t>(k)] - (p(0) + p(1) * cs * e);
      if (jac) {
        (*jac)(k, 0) = 1.0;
        (*jac)(k, 1) = cs * e;
        (*jac)(k, 2) = -p(1) * tk * sn * e;
        (*jac)(k, 3) = -p(1) * tk * cs * e;
      }
    }
    return r.squaredNorm();
  }
};

// Frequency of the strongest component of the mean-subtracted series.
double initial_frequency(std::span<const double> t, std::span<const double> y,
                         double h) {
  const double window = t.back() - t.front();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) /
                      static_cast<double>(y.size());
  const double step = kTwoPi / (kGridRefinement * window);
  const double nyquist = kPi / h;
  std::vector<double> omegas, power;
  for (double w = kTwoPi / window; w <= nyquist; w += step) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
      acc += (y[k] - mean) * std::polar(1.0, -w * t[k]);
    omegas.push_back(w);
    power.push_back(std::norm(acc));
  }
  if (omegas.empty()) return kTwoPi / window;
  const auto j = static_cast<std::size_t>(
      std::max_element(power.begin(), power.end()) - power.begin());
  if (j == 0 || j + 1 == power.size()) return omegas[j];
  // Parabolic refinement of the peak.
  const double a = power[j - 1], b = power[j], c = power[j + 1];
  const double denom = a - 2 * b + c;
  const double shift = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
  return omegas[j] + std::clamp(shift, -0.5, 0.5) * step;
}

// Decay rate from a regression of log half-period maxima of |y - mean|.
double initial_rate(std::span<const double> t, std::span<const double> y,
                    double omega) {
  const double window = t.back() - t.front();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) /
                      static_cast<double>(y.size());
  const double half = kPi / omega;
  std::vector<double> xs, ls;
  std::size_t k = 0;
  while (k < t.size()) {
    const double end = t[k] + half;
    double best = 0.0, when = t[k];
    for (; k < t.size() && t[k] < end; ++k) {
      const double d = std::abs(y[k] - mean);
      if (d > best) {
        best = d;
        when = t[k];
      }
    }
    if (best > 0.0) {
      xs.push_back(when);
      ls.push_back(std::log(best));
    }
  }
  if (xs.size() >= 2) {
    const auto line = fit_line(xs, ls);
    if (line.slope < 0.0) return -line.slope;
  }
  return 0.1 / window;
}

}  // namespace

DampedCosineFit fit_damped_cosine(std::span<const double> times,
                                  std::span<const double> series) {
  check_lengths(times, series);
  if (times.size() < 20)
    throw InvalidArgument("damped-cosine fit needs at least 20 samples, got " +
                          std::to_string(times.size()));
  const double h = uniform_step(times);
  const auto n = static_cast<Eigen::Index>(times.size());

  DampedCosineFit fit;
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) /
                      static_cast<double>(series.size());
  double tss = 0.0;
  for (double v : series) tss += (v - mean) * (v - mean);
  if (tss <= 1e-28 * static_cast<double>(series.size()) *
                 std::max(1.0, mean * mean)) {
    fit.y0 = mean;
    fit.converged = false;
    return fit;
  }

  const double omega0 = initial_frequency(times, series, h);
  const double window = times.back() - times.front();
  if (omega0 * window < 2.0 * kTwoPi)
    throw InvalidArgument("series spans fewer than two oscillation periods");
  const double gamma0 = initial_rate(times, series, omega0);

  // Linear solve for y0 and C at the initial frequency and rate.
  Eigen::MatrixXd basis(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double tk = times[static_cast<std::size_t>(k)];
    basis(k, 0) = 1.0;
    basis(k, 1) = std::cos(omega0 * tk) * std::exp(-gamma0 * tk);
    rhs(k) = series[static_cast<std::size_t>(k)];
  }
  const Eigen::Vector2d lin = basis.colPivHouseholderQr().solve(rhs);

  Model model{times, series};
  Eigen::Vector4d p(lin(0), lin(1), omega0, gamma0);
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  double rss = model.evaluate(p, r, &jac);
  double lambda = 1e-3;
  bool stalled = false;
  int it = 0;
  for (; it < 200; ++it) {
    const Eigen::Matrix4d a = jac.transpose() * jac;
    const Eigen::Vector4d g = jac.transpose() * r;
    // Nothing left to gain: the Gauss-Newton model predicts a reduction
    // below rounding of the residual sum.
    const double predicted = g.dot(a.ldlt().solve(g));
    if (!(predicted > 1e-14 * rss)) {
      fit.converged = true;
      break;
    }
    Eigen::Vector4d step;
    double rss_new = 0.0;
    Eigen::VectorXd r_new;
    for (;;) {
      Eigen::Matrix4d damped = a;
      for (int d = 0; d < 4; ++d)
        damped(d, d) += lambda * std::max(a(d, d), 1e-300);
      step = damped.ldlt().solve(g);
      rss_new = model.evaluate(p + step, r_new, nullptr);
      if (std::isfinite(rss_new) && rss_new < rss) break;
      lambda *= 10.0;
      if (lambda > 1e16) {
        stalled = true;
        break;
      }
    }
    if (stalled) break;
    p += step;
    rss = model.evaluate(p, r, &jac);
    lambda = std::max(lambda / 10.0, 1e-12);
    double rel = 0.0;
    for (int d = 0; d < 4; ++d)
      rel = std::max(rel, std::abs(step(d)) / std::max(std::abs(p(d)), 1e-12));
    if (rel < 1e-8) {
      fit.converged = true;
      ++it;
      break;
    }
  }
  // An exact model leaves nothing to reduce; that is convergence, not a
  // stall.
  if (stalled && rss <= 1e-20 * tss) fit.converged = true;

  if (p(2) < 0.0) p(2) = -p(2);
  fit.y0 = p(0);
  fit.c = p(1);
  fit.omega_tilde = p(2);
  fit.tau = 1.0 / p(3);
  fit.rss = rss;
  fit.iterations = it;
  if (!(p(3) > 0.0)) fit.converged = false;

  const double dof = static_cast<double>(n) - 4.0;
  const Eigen::Matrix4d a = jac.transpose() * jac;
  Eigen::FullPivLU<Eigen::Matrix4d> lu(a);
  if (dof > 0 && lu.isInvertible()) {
    fit.covariance = (rss / dof) * lu.inverse();
    for (int d = 0; d < 3; ++d)
      fit.stderr_[static_cast<std::size_t>(d)] = std::sqrt(fit.covariance(d, d));
    fit.stderr_[3] = std::sqrt(fit.covariance(3, 3)) / (p(3) * p(3));
  } else {
    fit.stderr_.fill(std::numeric_limits<double>::quiet_NaN());
  }
  return fit;
}

PlaneFit fit_decay_plane(std::span<const PlanePoint> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 3)
    throw InvalidArgument("decay-plane fit needs at least 3 points, got " +
                          std::to_string(n));
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& pt = points[static_cast<std::size_t>(k)];
    x(k, 0) = pt.x;
    x(k, 1) = pt.y;
    x(k, 2) = 1.0;
    y(k) = pt.inv_tau;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3)
    throw InvalidArgument("decay-plane design matrix is rank deficient "
                          "(points are collinear or predictors constant)");
  const Eigen::Vector3d beta = qr.solve(y);
  const Eigen::VectorXd res = y - x * beta;

  PlaneFit f;
  f.alpha = beta(0);
  f.beta = beta(1);
  f.inv_tau0 = beta(2);
  f.rss = res.squaredNorm();
  f.n_points = points.size();
  const double tss = (y.array() - y.mean()).square().sum();
  f.r_squared = tss > 0.0 ? 1.0 - f.rss / tss : 1.0;
  const double dof = static_cast<double>(n) - 3.0;
  if (dof > 0) {
    const Eigen::Matrix3d cov =
        (f.rss / dof) * (x.transpose() * x).inverse();
    f.se_alpha = std::sqrt(cov(0, 0));
    f.se_beta = std::sqrt(cov(1, 1));
    f.se_inv_tau0 = std::sqrt(cov(2, 2));
  } else {
    f.se_alpha = f.se_beta = f.se_inv_tau0 =
        std::numeric_limits<double>::quiet_NaN();
  }
  return f;
}

nlohmann::json PlaneFit::to_json() const {
  return {{"alpha", alpha},         {"beta", beta},
          {"inv_tau0", inv_tau0},   {"se_alpha", se_alpha},
          {"se_beta", se_beta},     {"se_inv_tau0", se_inv_tau0},
          {"rss", rss},             {"r_squared", r_squared},
          {"n_points", n_points}};
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) throw InvalidArgument("line fit needs two points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx <= 0.0) throw InvalidArgument("line fit needs distinct x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

}  // namespace scarsim
