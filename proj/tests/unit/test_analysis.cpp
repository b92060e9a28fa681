#include "doctest.h"

#include <cmath>
#include <random>

#include "scarsim/analysis.hpp"

using namespace scarsim;

namespace {

std::vector<double> grid(double t_end, double dt) {
  std::vector<double> t;
  const auto n = static_cast<int>(std::lround(t_end / dt));
  for (int k = 0; k <= n; ++k) t.push_back(k * dt);
  return t;
}

template <class F>
std::vector<double> sample(const std::vector<double>& t, F f) {
  std::vector<double> y;
  for (double x : t) y.push_back(f(x));
  return y;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("imbalance of product states") {
  QuenchResult r;
  r.times = {0.0, 1.0, 2.0};
  r.n_a = {1.0, 0.0, 0.0};
  r.n_b = {0.0, 1.0, 0.0};
  CHECK(imbalance(r) == std::vector<double>{1.0, -1.0, 0.0});
}

TEST_CASE("damped cosine fit recovers its own model") {
  const auto t = grid(2.0, 0.01);
  const double w = kTwoPi * 2.5;
  const auto y = sample(t, [&](double x) {
    return 0.1 + 0.8 * std::cos(w * x) * std::exp(-x / 0.5);
  });
  auto f = fit_damped_cosine(t, y);
  CHECK(f.converged);
  CHECK(rel(f.y0, 0.1) < 1e-6);
  CHECK(rel(f.c, 0.8) < 1e-6);
  CHECK(rel(f.omega_tilde, w) < 1e-6);
  CHECK(rel(f.tau, 0.5) < 1e-6);
  CHECK(f(0.3) == doctest::Approx(y[30]).epsilon(1e-9));

  SUBCASE("shifting the time origin by whole periods") {
    const double period = kTwoPi / w;
    std::vector<double> shifted;
    for (double x : t) shifted.push_back(x + 3 * period);
    auto g = fit_damped_cosine(shifted, y);
    // Same curve in shifted time has the same frequency and lifetime.
    auto h = fit_damped_cosine(
        shifted, sample(shifted, [&](double x) {
          return 0.1 + 0.8 * std::cos(w * x) * std::exp(-x / 0.5);
        }));
    CHECK(rel(h.tau, f.tau) < 1e-6);
    CHECK(rel(h.omega_tilde, f.omega_tilde) < 1e-6);
    CHECK(g.converged);
  }
}

TEST_CASE("damped cosine fit under noise") {
  const auto t = grid(2.0, 0.01);
  const double w = kTwoPi * 2.5;
  int within = 0;
  double worst = 0.0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.02);
    const auto y = sample(t, [&](double x) {
      return 0.1 + 0.8 * std::cos(w * x) * std::exp(-x / 0.5) + noise(rng);
    });
    auto f = fit_damped_cosine(t, y);
    CHECK(f.converged);
    const double e = rel(f.tau, 0.5);
    worst = std::max(worst, e);
    within += e < 0.10;
  }
  CHECK(within == 100);
  MESSAGE("worst relative tau error over 100 seeds: " << worst);
}

TEST_CASE("damped cosine fit input checks") {
  const auto t = grid(2.0, 0.01);
  auto flat = fit_damped_cosine(t, std::vector<double>(t.size(), 0.3));
  CHECK_FALSE(flat.converged);
  const auto few = grid(0.1, 0.01);
  CHECK_THROWS_AS(fit_damped_cosine(few, sample(few, [](double x) {
                                      return std::cos(x);
                                    })),
                  InvalidArgument);
  // Less than two periods in the window.
  CHECK_THROWS_AS(fit_damped_cosine(t, sample(t, [](double x) {
                                      return std::cos(2.0 * x);
                                    })),
                  InvalidArgument);
}

TEST_CASE("decay plane") {
  const std::vector<PlanePoint> exact{{0.1, 0.2, 0.0},
                                      {0.5, 0.1, 0.0},
                                      {0.3, 0.9, 0.0},
                                      {0.8, 0.6, 0.0},
                                      {1.2, 0.3, 0.0}};
  auto pts = exact;
  for (auto& p : pts) p.inv_tau = 0.72 * p.x + 0.58 * p.y + 0.4;
  auto f = fit_decay_plane(pts);
  CHECK(f.alpha == doctest::Approx(0.72).epsilon(1e-12));
  CHECK(f.beta == doctest::Approx(0.58).epsilon(1e-12));
  CHECK(f.inv_tau0 == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));

  // Three points: exact interpolation.
  std::vector<PlanePoint> three{{0.0, 0.0, 1.0}, {1.0, 0.0, 3.0},
                                {0.0, 1.0, -2.0}};
  auto g = fit_decay_plane(three);
  CHECK(g.alpha == doctest::Approx(2.0));
  CHECK(g.beta == doctest::Approx(-3.0));
  CHECK(g.inv_tau0 == doctest::Approx(1.0));
  CHECK(g.rss < 1e-24);

  std::vector<PlanePoint> collinear{{0, 0, 1}, {1, 1, 2}, {2, 2, 3}, {3, 3, 4}};
  CHECK_THROWS_AS(fit_decay_plane(collinear), InvalidArgument);
  CHECK_THROWS_AS(fit_decay_plane(std::span(three).first(2)), InvalidArgument);
}

TEST_CASE("spectrum calibration") {
  const double T = 2.0, dt = 0.002;
  const auto t = grid(T, dt);
  const double step = kTwoPi / (8 * T);
  const double w0 = 40 * step;  // a grid frequency

  SUBCASE("pure in-phase cosine peaks at one") {
    const auto y = sample(t, [&](double x) { return std::cos(w0 * x); });
    auto s = fourier_spectrum(t, y);
    CHECK(std::abs(*std::max_element(s.s2.begin(), s.s2.end()) - 1.0) < 1e-6);
    CHECK(std::abs(dominant_peak(s) - w0) <= step);
    auto pinned = fourier_spectrum(t, y, w0);
    CHECK(std::abs(pinned.at(w0) - 1.0) < 1e-6);
    CHECK(s.grid_step() == doctest::Approx(step));
  }
  SUBCASE("constant series is zero") {
    auto s = fourier_spectrum(t, std::vector<double>(t.size(), 0.7), w0);
    for (double v : s.s_tilde) CHECK(std::abs(v) < 1e-12);
    for (double v : s.s2) CHECK(v == 0.0);
  }
  SUBCASE("sine is out of phase") {
    const auto y = sample(t, [&](double x) { return std::sin(w0 * x); });
    auto s = fourier_spectrum(t, y, w0);
    CHECK(s.at(w0) <= 2.0 / (w0 * T));
  }
  SUBCASE("amplitude does not matter") {
    const auto y = sample(t, [&](double x) {
      return 0.2 + std::cos(w0 * x) * std::exp(-x) + 0.3 * std::cos(3 * x);
    });
    auto y3 = y;
    for (double& v : y3) v *= 3.0;
    auto a = fourier_spectrum(t, y, w0);
    auto b = fourier_spectrum(t, y3, w0);
    for (std::size_t j = 0; j < a.s2.size(); ++j)
      CHECK(a.s2[j] == doctest::Approx(b.s2[j]).epsilon(1e-10));
  }
  SUBCASE("total intensity matches the time-domain energy") {
    // int_0^inf S~^2 dw = (2 pi / T^2) int f^2 dt for the cosine transform.
    const auto y = sample(t, [&](double x) {
      return std::cos(w0 * x) * std::exp(-0.5 * x) + 0.4 * std::cos(17.0 * x);
    });
    auto s = fourier_spectrum(t, y);
    double mean = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
      mean += (k == 0 || k + 1 == t.size() ? 0.5 : 1.0) * dt * y[k];
    mean /= T;
    double energy = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
      energy += (k == 0 || k + 1 == t.size() ? 0.5 : 1.0) * dt *
                (y[k] - mean) * (y[k] - mean);
    const double expect = 2.0 * (kTwoPi / (T * T)) * energy * T / kTwoPi;
    CHECK(s.denominator == doctest::Approx(expect).epsilon(1e-3));
  }
  SUBCASE("non-uniform sampling is rejected") {
    auto bad = t;
    bad[5] += 1e-4;
    CHECK_THROWS_AS(fourier_spectrum(bad, std::vector<double>(t.size(), 1.0)),
                    InvalidArgument);
  }
}

TEST_CASE("subharmonic weights") {
  const double T = 2.5, dt = 0.002;
  const auto t = grid(T, dt);
  const double wm = 1.2 * kTwoPi * 4.2;
  auto sub = sample(t, [&](double x) { return std::cos(0.5 * wm * x); });
  auto harm = sample(t, [&](double x) { return std::cos(wm * x); });
  CHECK(subharmonic_weight(fourier_spectrum(t, sub), wm) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(subharmonic_weight(fourier_spectrum(t, harm), wm) < 0.05);
  auto fourth = sample(t, [&](double x) { return std::cos(0.25 * wm * x); });
  CHECK(fourth_subharmonic_weight(fourier_spectrum(t, fourth), wm) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(subharmonic_weight(fourier_spectrum(t, sub), 1e6),
                  InvalidArgument);

  // Stroboscopic series with unit period: alternation sits at Nyquist.
  std::vector<double> n, alt;
  for (int k = 0; k <= 100; ++k) {
    n.push_back(k);
    alt.push_back(k % 2 ? -1.0 : 1.0);
  }
  CHECK(subharmonic_weight(fourier_spectrum(n, alt), kTwoPi) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("subharmonic rigidity") {
  const auto g = rigidity_grid();
  REQUIRE(g.size() == 11);
  CHECK(g.front() == doctest::Approx(0.75));
  CHECK(g.back() == doctest::Approx(1.75));
  CHECK(subharmonic_rigidity(g, std::vector<double>(11, 1.0)) == 11.0);
  CHECK(subharmonic_rigidity(g, std::vector<double>(11, 0.0)) == 0.0);
  auto shifted = g;
  shifted[3] += 0.01;
  CHECK_THROWS_AS(subharmonic_rigidity(shifted, std::vector<double>(11, 1.0)),
                  InvalidArgument);
  CHECK_THROWS_AS(subharmonic_rigidity(std::span(g).first(10),
                                       std::vector<double>(10, 1.0)),
                  InvalidArgument);
}

TEST_CASE("microstate matrix") {
  MicrostateOrdering o;
  o.n_sites = 2;
  o.classes.resize(3);
  QuenchResult r;
  r.times = {0.0, 0.1};
  r.n_a = r.n_b = {0.0, 0.0};
  r.microstate_probs = {{1.0, 0.0, 0.0}, {0.25, 0.5, 0.25}};
  auto m = microstate_matrix(r, o);
  CHECK(m(0, 0) == 1.0);
  CHECK(m.rowwise().sum().isApproxToConstant(1.0));
  r.microstate_probs[1][2] = 0.3;
  CHECK_THROWS_AS(microstate_matrix(r, o), NumericalError);
  o.classes.resize(4);
  CHECK_THROWS_AS(microstate_matrix(r, o), InvalidArgument);
}

TEST_CASE("line fit") {
  std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
}
