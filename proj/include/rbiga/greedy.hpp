#pragma once

#include "rbiga/reduction.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rbiga {

/// lattice=KxKxK (or a single K for every parameter), random:n,seed, or explicit points.
struct TrainingSpec {
  enum class Kind { Lattice, Random, Explicit };
  Kind kind = Kind::Random;
  std::vector<int> lattice;
  int count = 0;
  std::uint64_t seed = 1;
  std::vector<std::vector<double>> points;

  static TrainingSpec parse(const std::string& text);
  std::string to_string() const;
};

std::vector<std::vector<double>> sample_training_set(const ParameterDomain& domain,
                                                     const TrainingSpec& spec);

/// centroid: training point closest to the box centroid; random:seed: seeded pick.
struct FirstRule {
  bool random = false;
  std::uint64_t seed = 0;

  static FirstRule parse(const std::string& text);
  std::string to_string() const;
};

struct GreedyConfig {
  TrainingSpec training;
  double tol = 1e-6;
  int n_max = 200;
  FirstRule first;
  Estimator estimator = Estimator::Energy;
  int threads = 0; ///< training-set sweep workers; 0 = hardware concurrency
};

struct GreedyStep {
  int n = 0;                 ///< basis size after this step
  std::vector<double> mu;    ///< parameter whose snapshot was added
  int training_index = -1;
  double max_delta = 0.0;    ///< max over the training set of Delta_n
  double seconds = 0.0;      ///< wall time since the start (not archived)
};

struct GreedyHistory {
  std::vector<GreedyStep> steps;
  /// Training indices whose snapshots were rejected as collinear.
  std::vector<int> collinear;
  bool converged = false;
  bool exact_space = false;
};

struct GreedyResult {
  RBSpace space;
  OnlineModel model;
  GreedyHistory history;
  std::vector<std::vector<double>> training;
  std::vector<double> final_deltas;
};

/// Calls body(i) for i in [0, count), split into contiguous chunks over
/// `threads` workers (0 = hardware concurrency). Each index is visited once,
/// so results written per index do not depend on the thread count.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// mu^N = argmax over the training set of Delta_{N-1}; stops when the maximum
/// is at most tol or N = n_max. Ties go to the lowest training index.
GreedyResult greedy_build(const TruthProblem& truth, const GreedyConfig& config,
                          CoercivityModel coercivity);

/// (N, max Delta, mu) rows.
std::string convergence_csv(const GreedyHistory& history);
std::string convergence_json(const GreedyHistory& history);

} // namespace rbiga
