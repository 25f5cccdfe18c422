#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dctfhe {

struct CorrectnessVector {
  std::vector<uint8_t> correct;  // 0/1 per image
  std::string dataset_id;
  std::string model_id;
};

struct SubsetAccuracies {
  std::vector<double> accuracies;   // fraction correct per subset
  bool with_replacement = false;    // set when the vector was too small for disjoint subsets
};

// n_subsets disjoint uniformly random subsets of subset_size images (sampling
// with replacement, flagged, when the vector is too small). Deterministic in
// the seed.
SubsetAccuracies subset_accuracies(const CorrectnessVector& v, int n_subsets, int subset_size,
                                   uint64_t seed);

struct BootstrapResult {
  double estimate = 0.0;  // percent
  double ci_low = 0.0;    // percent
  double ci_high = 0.0;   // percent
  int resamples = 0;
  double level = 0.0;
  int n_subsets = 0;
};

// Percentile bootstrap over subset accuracies: each resample redraws the
// subsets with replacement and averages; the CI is the empirical
// ((1-level)/2, 1-(1-level)/2) percentile interval of the resample means.
BootstrapResult bootstrap_ci(const std::vector<double>& subset_accs, int resamples,
                             double level, uint64_t seed);

}  // namespace dctfhe
