#include "dctfhe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dctfhe/rng.hpp"

namespace dctfhe {

SubsetAccuracies subset_accuracies(const CorrectnessVector& v, int n_subsets, int subset_size,
                                   uint64_t seed) {
  if (v.correct.empty()) throw std::invalid_argument("subset_accuracies: empty vector");
  if (n_subsets < 1 || subset_size < 1) {
    throw std::invalid_argument("subset_accuracies: subset shape must be positive");
  }
  const size_t n = v.correct.size();
  const size_t need = static_cast<size_t>(n_subsets) * subset_size;
  const CounterRng rng(seed, 0x5u);

  SubsetAccuracies out;
  out.accuracies.reserve(n_subsets);
  if (n >= need) {
    // partial Fisher-Yates gives `need` distinct indices; chunks are disjoint
    std::vector<uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    for (size_t i = 0; i < need; ++i) {
      const size_t j = i + rng.below(n - i, i);
      std::swap(idx[i], idx[j]);
    }
    for (int s = 0; s < n_subsets; ++s) {
      int64_t hits = 0;
      for (int k = 0; k < subset_size; ++k) {
        hits += v.correct[idx[static_cast<size_t>(s) * subset_size + k]];
      }
      out.accuracies.push_back(static_cast<double>(hits) / subset_size);
    }
  } else {
    out.with_replacement = true;
    uint64_t counter = 0;
    for (int s = 0; s < n_subsets; ++s) {
      int64_t hits = 0;
      for (int k = 0; k < subset_size; ++k) {
        hits += v.correct[rng.below(n, counter++)];
      }
      out.accuracies.push_back(static_cast<double>(hits) / subset_size);
    }
  }
  return out;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

BootstrapResult bootstrap_ci(const std::vector<double>& subset_accs, int resamples,
                             double level, uint64_t seed) {
  if (subset_accs.size() < 2) {
    throw std::invalid_argument("bootstrap_ci: need at least two subset accuracies");
  }
  if (resamples < 1) throw std::invalid_argument("bootstrap_ci: resamples must be positive");
  if (level <= 0.0 || level >= 1.0) {
    throw std::invalid_argument("bootstrap_ci: level must be in (0,1)");
  }
  const size_t n = subset_accs.size();
  const CounterRng rng(seed, 0xb00ull);

  std::vector<double> means(static_cast<size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      // counters are (resample, position)-addressed so a parallel evaluation
      // would reproduce the serial draw for every cell
      sum += subset_accs[rng.below(n, static_cast<uint64_t>(r) * n + i)];
    }
    means[static_cast<size_t>(r)] = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());

  BootstrapResult res;
  res.estimate =
      100.0 * std::accumulate(subset_accs.begin(), subset_accs.end(), 0.0) / static_cast<double>(n);
  const double tail = (1.0 - level) / 2.0;
  res.ci_low = 100.0 * quantile_sorted(means, tail);
  res.ci_high = 100.0 * quantile_sorted(means, 1.0 - tail);
  res.resamples = resamples;
  res.level = level;
  res.n_subsets = static_cast<int>(n);
  return res;
}

}  // namespace dctfhe
