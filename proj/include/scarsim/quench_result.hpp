#pragma once

#include <vector>

#include <Eigen/Dense>

namespace scarsim {

/// Snapshot series recorded by run_quench. Times are in microseconds.
struct QuenchResult {
  std::vector<double> times;
  /// site_populations[k][i] = <n_i> at times[k]
  std::vector<std::vector<double>> site_populations;
  std::vector<double> n_a;
  std::vector<double> n_b;
  /// Class probabilities per snapshot, in MicrostateOrdering order. Empty
  /// unless microstates were requested.
  std::vector<std::vector<double>> microstate_probs;
  /// Cut sizes k (the first k sites form the subsystem) and, per cut, the
  /// entropy series in nats.
  std::vector<int> entropy_cuts;
  std::vector<std::vector<double>> entropies;
  Eigen::VectorXcd final_state;

  std::size_t size() const { return times.size(); }
  /// Throws InvalidArgument unless times are strictly increasing and
  /// uniformly spaced and all series have matching lengths.
  void validate() const;
};

}  // namespace scarsim
