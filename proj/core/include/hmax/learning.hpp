#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hmax/layers.hpp"
#include "hmax/prototype.hpp"

namespace hmax {

using PatchTensor = std::vector<float>;

/// sqrt(sum (a_i - b_i)^2) over all entries; shapes must match.
double frobenius_distance(std::span<const float> a, std::span<const float> b);

/// Copies the n x n x 4 C1 patch with top-left corner (row, col) of `band0`.
Prototype extract_patch(const C1Response& c1, int band0, int row, int col, int n);

/// Default: all eight bands (1-based band numbers).
std::vector<int> all_bands();

struct SamplingOptions {
  std::vector<int> bands = all_bands();  ///< 1-based bands eligible as sources
  int max_attempts_per_prototype = 100;  ///< redraw budget for all-zero patches
};

/// Uniform over (image, band, position) for every size class; all-zero
/// patches are redrawn. Output order: size classes in the given order, then
/// draw order.
PrototypeSet sample_random_prototypes(std::span<const C1Response> c1_per_image, int count_per_size,
                                      std::span<const int> sizes, std::uint64_t seed,
                                      const SamplingOptions& opts = {});

struct PamOptions {
  /// Consecutive rejected proposals that end the search; 0 means one full
  /// pass over every (slot, non-medoid) pair, which makes the result
  /// stable under any single swap.
  std::size_t patience = 0;
};

struct PamState {
  std::vector<std::size_t> medoids;     ///< indices into the input, one per cluster
  std::vector<std::size_t> assignment;  ///< input index -> cluster index
  double total_cost = 0.0;
  std::vector<double> cost_history;     ///< initial cost, then cost after every accepted swap
  std::size_t proposals = 0;
  bool converged = false;               ///< false when max_iter stopped the search
};

/// Sum of distances from every point to its nearest medoid, ties to the lower
/// cluster index. Fills `assignment` when given.
double pam_total_cost(std::span<const PatchTensor> patches, std::span<const std::size_t> medoids,
                      std::vector<std::size_t>* assignment = nullptr);

/// k-medoids by randomized swap search. `max_iter` bounds the number of swap
/// proposals.
PamState pam_cluster(std::span<const PatchTensor> patches, std::size_t k, std::size_t max_iter, std::uint64_t seed,
                     const PamOptions& opts = {});

enum class DropRule {
  weakest,  ///< drop medoids with the largest mean within-cluster distance
  random,   ///< seeded uniform drop
};

struct PamConfig {
  int medoids_per_size = 5;
  std::vector<int> sizes{4, 8, 12, 16};
  int drop_per_size = 10;
  std::size_t pool_budget = 2000;  ///< candidate patches per (category, size)
  std::size_t max_iter = 200000;
  DropRule drop_rule = DropRule::weakest;
  std::vector<int> bands = all_bands();

  void validate() const;
};

struct PamPrototypeResult {
  PrototypeSet prototypes;
  std::size_t pooled = 0;  ///< medoids before dropping
};

/// Per category and size: candidate pool from the category's C1 maps, PAM
/// with k = medoids_per_size, medoids pooled in (category, size) order, then
/// drop_per_size removed from each size class.
PamPrototypeResult pam_prototypes(std::span<const std::vector<C1Response>> per_category, const PamConfig& cfg,
                                  std::uint64_t seed);

}  // namespace hmax
