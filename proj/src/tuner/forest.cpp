#include "tiersim/tuner/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tiersim/error.hpp"

namespace tiersim {

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // weighted SSE after the split
  std::size_t left_count = 0;
};

double mean_of(std::span<const double> y, std::span<const std::size_t> rows) {
  double s = 0.0;
  for (auto r : rows) s += y[r];
  return s / static_cast<double>(rows.size());
}

}  // namespace

void RegressionTree::fit(const std::vector<std::vector<double>>& x, std::span<const double> y,
                         std::span<const std::size_t> rows_in, std::size_t max_features,
                         std::size_t min_samples_split, std::size_t min_samples_leaf, std::uint64_t seed) {
  nodes_.clear();
  if (rows_in.empty()) throw Error(ErrorKind::InvalidArgument, "cannot fit a tree on zero rows");
  const std::size_t dims = x.front().size();
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> rows(rows_in.begin(), rows_in.end());
  std::vector<std::size_t> features(dims);
  std::iota(features.begin(), features.end(), 0);

  struct Pending {
    std::uint32_t node;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Pending> stack;
  nodes_.push_back({-1, 0.0, 0.0, 0, 0});
  stack.push_back({0, 0, rows.size()});

  std::vector<std::pair<double, double>> sorted;
  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    const std::span<const std::size_t> span(rows.data() + p.begin, p.end - p.begin);
    const double m = mean_of(y, span);
    nodes_[p.node].value = m;
    const std::size_t n = span.size();
    if (n < min_samples_split || n < 2 * min_samples_leaf) continue;

    double sse = 0.0;
    for (auto r : span) sse += (y[r] - m) * (y[r] - m);
    if (sse <= 0.0) continue;

    // Partial Fisher-Yates: the first max_features entries are the draw.
    for (std::size_t i = 0; i < max_features; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, dims - 1);
      std::swap(features[i], features[pick(rng)]);
    }

    Split best;
    best.score = sse;
    for (std::size_t fi = 0; fi < max_features; ++fi) {
      const std::size_t f = features[fi];
      sorted.clear();
      for (auto r : span) sorted.emplace_back(x[r][f], y[r]);
      std::sort(sorted.begin(), sorted.end());
      double total = 0.0, total_sq = 0.0;
      for (const auto& [xv, yv] : sorted) {
        total += yv;
        total_sq += yv * yv;
      }
      double left = 0.0, left_sq = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left += sorted[i].second;
        left_sq += sorted[i].second * sorted[i].second;
        if (sorted[i].first == sorted[i + 1].first) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < min_samples_leaf || nr < min_samples_leaf) continue;
        const double right = total - left, right_sq = total_sq - left_sq;
        const double score = (left_sq - left * left / static_cast<double>(nl)) +
                             (right_sq - right * right / static_cast<double>(nr));
        if (score < best.score - 1e-12 * sse) {
          best = {static_cast<int>(f), 0.5 * (sorted[i].first + sorted[i + 1].first), score, nl};
        }
      }
    }
    if (best.feature < 0) continue;

    auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(p.begin),
                              rows.begin() + static_cast<std::ptrdiff_t>(p.end),
                              [&](std::size_t r) { return x[r][static_cast<std::size_t>(best.feature)] <= best.threshold; });
    const std::size_t split_at = static_cast<std::size_t>(mid - rows.begin());
    const auto left_id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({-1, 0.0, 0.0, 0, 0});
    nodes_.push_back({-1, 0.0, 0.0, 0, 0});
    nodes_[p.node].feature = best.feature;
    nodes_[p.node].threshold = best.threshold;
    nodes_[p.node].left = left_id;
    nodes_[p.node].right = left_id + 1;
    stack.push_back({left_id + 1, split_at, p.end});
    stack.push_back({left_id, p.begin, split_at});
  }
}

double RegressionTree::predict(std::span<const double> x) const {
  std::uint32_t i = 0;
  while (nodes_[i].feature >= 0)
    i = x[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  return nodes_[i].value;
}

void RandomForest::fit(const std::vector<std::vector<double>>& x, std::span<const double> y, std::uint64_t seed,
                       Exec exec) {
  if (x.empty() || x.size() != y.size())
    throw Error(ErrorKind::InvalidArgument, "forest needs matching, non-empty inputs and targets");
  dims_ = x.front().size();
  for (const auto& row : x)
    if (row.size() != dims_) throw Error(ErrorKind::InvalidArgument, "ragged training matrix");
  const std::size_t max_features =
      options_.max_features == 0 ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dims_))))
                                 : std::min(options_.max_features, dims_);

  std::vector<RegressionTree> trees(options_.tree_count);
  const auto count = static_cast<std::int64_t>(trees.size());
  const std::size_t n = x.size();
  auto grow = [&](std::int64_t t) {
    std::seed_seq sseq{seed, static_cast<std::uint64_t>(t), std::uint64_t{0x5eed}};
    std::mt19937_64 rng(sseq);
    std::vector<std::size_t> rows(n);
    if (options_.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    trees[static_cast<std::size_t>(t)].fit(x, y, rows, max_features, options_.min_samples_split,
                                           options_.min_samples_leaf, rng());
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t t = 0; t < count; ++t) grow(t);
  } else {
    for (std::int64_t t = 0; t < count; ++t) grow(t);
  }
  trees_ = std::move(trees);
}

Prediction RandomForest::predict(std::span<const double> x) const {
  if (!fitted()) throw Error(ErrorKind::NotFitted, "surrogate has not been fit");
  if (x.size() != dims_) throw Error(ErrorKind::InvalidArgument, "query has the wrong dimensionality");
  const double k = static_cast<double>(trees_.size());
  double mean = 0.0;
  for (const auto& t : trees_) mean += t.predict(x);
  mean /= k;
  double var = 0.0;
  for (const auto& t : trees_) {
    const double d = t.predict(x) - mean;
    var += d * d;
  }
  return {mean, std::sqrt(var / k)};
}

std::vector<Prediction> RandomForest::predict(const std::vector<std::vector<double>>& xs, Exec exec) const {
  if (!fitted()) throw Error(ErrorKind::NotFitted, "surrogate has not been fit");
  for (const auto& x : xs)
    if (x.size() != dims_) throw Error(ErrorKind::InvalidArgument, "query has the wrong dimensionality");
  std::vector<Prediction> out(xs.size());
  const auto n = static_cast<std::int64_t>(xs.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = predict(xs[static_cast<std::size_t>(i)]);
  } else {
    for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = predict(xs[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace tiersim
