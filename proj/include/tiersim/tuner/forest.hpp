#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tiersim {

enum class Exec { Serial, Parallel };

struct ForestOptions {
  std::size_t tree_count = 50;
  // Features tried per split; 0 selects ceil(sqrt(dims)).
  std::size_t max_features = 0;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  bool bootstrap = true;
};

struct Prediction {
  double mean;
  double stdev;
};

/// CART regression tree in flat array form.
class RegressionTree {
 public:
  void fit(const std::vector<std::vector<double>>& x, std::span<const double> y,
           std::span<const std::size_t> rows, std::size_t max_features,
           std::size_t min_samples_split, std::size_t min_samples_leaf, std::uint64_t seed);
  double predict(std::span<const double> x) const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    int feature;  // -1 for a leaf
    double threshold;
    double value;
    std::uint32_t left;
    std::uint32_t right;
  };
  std::vector<Node> nodes_;
};

/// Bagged regression trees. Predictive mean and stdev are taken across the
/// per-tree predictions. Serial and parallel execution give identical results:
/// tree t is always grown from its own seed.
class RandomForest {
 public:
  explicit RandomForest(ForestOptions options = {}) : options_(options) {}

  void fit(const std::vector<std::vector<double>>& x, std::span<const double> y, std::uint64_t seed,
           Exec exec = Exec::Parallel);
  bool fitted() const { return !trees_.empty(); }
  std::size_t dims() const { return dims_; }
  const ForestOptions& options() const { return options_; }

  Prediction predict(std::span<const double> x) const;
  std::vector<Prediction> predict(const std::vector<std::vector<double>>& xs, Exec exec = Exec::Parallel) const;

 private:
  ForestOptions options_;
  std::size_t dims_ = 0;
  std::vector<RegressionTree> trees_;
};

}  // namespace tiersim
