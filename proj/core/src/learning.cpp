#include "hmax/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hmax/error.hpp"
#include "hmax/random.hpp"

namespace hmax {

double frobenius_distance(std::span<const float> a, std::span<const float> b) {
  require(a.size() == b.size(), ErrorKind::invalid_argument, "frobenius_distance: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

Prototype extract_patch(const C1Response& c1, int band0, int row, int col, int n) {
  require(band0 >= 0 && band0 < kBands, ErrorKind::invalid_argument, "band out of range");
  require(row >= 0 && col >= 0 && row + n <= c1.rows(band0) && col + n <= c1.cols(band0), ErrorKind::invalid_argument,
          "patch does not fit in band " + std::to_string(band0 + 1));
  Prototype p;
  p.size = n;
  p.band = band0 + 1;
  p.row = row;
  p.col = col;
  p.tensor.resize(static_cast<std::size_t>(n) * n * kOrientations);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int o = 0; o < kOrientations; ++o)
        p.tensor[static_cast<std::size_t>((i * n + j) * kOrientations + o)] =
            static_cast<float>(c1.map(band0, o)(row + i, col + j));
  return p;
}

std::vector<int> all_bands() { return {1, 2, 3, 4, 5, 6, 7, 8}; }

namespace {

void check_bands(std::span<const int> bands) {
  require(!bands.empty(), ErrorKind::invalid_argument, "at least one source band is required");
  for (int b : bands) require(b >= 1 && b <= kBands, ErrorKind::invalid_argument, "band must lie in 1..8");
}

void check_size(int n) {
  require(std::find(std::begin(kPrototypeSizes), std::end(kPrototypeSizes), n) != std::end(kPrototypeSizes),
          ErrorKind::invalid_argument, "prototype size must be 4, 8, 12 or 16; got " + std::to_string(n));
}

}  // namespace

PrototypeSet sample_random_prototypes(std::span<const C1Response> c1_per_image, int count_per_size,
                                      std::span<const int> sizes, std::uint64_t seed, const SamplingOptions& opts) {
  require(count_per_size >= 0, ErrorKind::invalid_argument, "count_per_size must be non-negative");
  require(opts.max_attempts_per_prototype >= 1, ErrorKind::invalid_argument, "attempt budget must be positive");
  check_bands(opts.bands);
  Rng rng(seed);

  PrototypeSet set;
  set.origin = PrototypeOrigin::random;
  set.seed = seed;
  for (int n : sizes) {
    check_size(n);
    // Images with at least one band large enough, and those bands.
    std::vector<std::pair<std::size_t, std::vector<int>>> eligible;
    for (std::size_t img = 0; img < c1_per_image.size(); ++img) {
      std::vector<int> bands;
      for (int b : opts.bands) {
        const C1Response& c1 = c1_per_image[img];
        if (c1.rows(b - 1) >= n && c1.cols(b - 1) >= n) bands.push_back(b - 1);
      }
      if (!bands.empty()) eligible.emplace_back(img, std::move(bands));
    }
    require(!eligible.empty(), ErrorKind::data,
            "no training image has C1 maps large enough for " + std::to_string(n) + "x" + std::to_string(n) +
                " prototypes");

    for (int k = 0; k < count_per_size; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < opts.max_attempts_per_prototype && !placed; ++attempt) {
        const auto& [img, bands] = eligible[uniform_index(rng, eligible.size())];
        const int band0 = bands[uniform_index(rng, bands.size())];
        const C1Response& c1 = c1_per_image[img];
        const int row = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(c1.rows(band0) - n + 1)));
        const int col = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(c1.cols(band0) - n + 1)));
        Prototype p = extract_patch(c1, band0, row, col, n);
        if (p.all_zero()) continue;
        p.origin = PrototypeOrigin::random;
        set.prototypes.push_back(std::move(p));
        placed = true;
      }
      require(placed, ErrorKind::data,
              "could not draw a non-zero " + std::to_string(n) + "x" + std::to_string(n) + " patch after " +
                  std::to_string(opts.max_attempts_per_prototype) + " attempts; the training set is degenerate");
    }
  }
  return set;
}

// --- PAM ---------------------------------------------------------------------

namespace {

void check_patches(std::span<const PatchTensor> patches) {
  require(!patches.empty(), ErrorKind::invalid_argument, "PAM needs at least one patch");
  for (const PatchTensor& p : patches)
    require(p.size() == patches.front().size(), ErrorKind::invalid_argument, "PAM patches must share one shape");
}

class DistanceTable {
 public:
  explicit DistanceTable(std::span<const PatchTensor> patches) : n_(patches.size()), d_(n_ * n_, 0.0) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double v = frobenius_distance(patches[i], patches[j]);
        d_[i * n_ + j] = v;
        d_[j * n_ + i] = v;
      }
    }
  }

  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

  double cost(std::span<const std::size_t> medoids, std::vector<std::size_t>* assignment = nullptr) const {
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      std::size_t best_k = 0;
      double best = (*this)(i, medoids[0]);
      for (std::size_t k = 1; k < medoids.size(); ++k) {
        const double d = (*this)(i, medoids[k]);
        if (d < best) {
          best = d;
          best_k = k;
        }
      }
      if (assignment) (*assignment)[i] = best_k;
      total += best;
    }
    return total;
  }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

}  // namespace

double pam_total_cost(std::span<const PatchTensor> patches, std::span<const std::size_t> medoids,
                      std::vector<std::size_t>* assignment) {
  check_patches(patches);
  require(!medoids.empty(), ErrorKind::invalid_argument, "at least one medoid is required");
  if (assignment) assignment->assign(patches.size(), 0);
  double total = 0.0;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    std::size_t best_k = 0;
    double best = frobenius_distance(patches[i], patches[medoids[0]]);
    for (std::size_t k = 1; k < medoids.size(); ++k) {
      const double d = frobenius_distance(patches[i], patches[medoids[k]]);
      if (d < best) {
        best = d;
        best_k = k;
      }
    }
    if (assignment) (*assignment)[i] = best_k;
    total += best;
  }
  return total;
}

PamState pam_cluster(std::span<const PatchTensor> patches, std::size_t k, std::size_t max_iter, std::uint64_t seed,
                     const PamOptions& opts) {
  check_patches(patches);
  const std::size_t n = patches.size();
  require(k >= 1 && k <= n, ErrorKind::invalid_argument,
          "cluster count " + std::to_string(k) + " must lie in 1.." + std::to_string(n));
  Rng rng(seed);
  const DistanceTable dist(patches);

  // Initial medoids: uniform without replacement.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(order[i], order[i + uniform_index(rng, n - i)]);

  PamState state;
  state.medoids.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  double current = dist.cost(state.medoids);
  state.cost_history.push_back(current);

  std::vector<bool> is_medoid(n, false);
  for (std::size_t m : state.medoids) is_medoid[m] = true;

  // Proposals are (slot, candidate) pairs visited in a fresh random order
  // after every accepted swap.
  const std::size_t pair_count = k * (n - k);
  const std::size_t patience = opts.patience == 0 ? pair_count : opts.patience;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  auto reshuffle = [&] {
    pairs.clear();
    for (std::size_t slot = 0; slot < k; ++slot)
      for (std::size_t x = 0; x < n; ++x)
        if (!is_medoid[x]) pairs.emplace_back(slot, x);
    shuffle(pairs, rng);
  };
  reshuffle();

  std::size_t rejected = 0;
  std::size_t cursor = 0;
  std::vector<std::size_t> trial = state.medoids;
  state.converged = pair_count == 0;
  while (!state.converged && state.proposals < max_iter) {
    if (cursor == pairs.size()) {
      shuffle(pairs, rng);
      cursor = 0;
    }
    const auto [slot, candidate] = pairs[cursor++];
    ++state.proposals;

    trial = state.medoids;
    trial[slot] = candidate;
    const double proposed = dist.cost(trial);
    if (proposed - current < 0.0) {
      is_medoid[state.medoids[slot]] = false;
      is_medoid[candidate] = true;
      state.medoids = trial;
      current = proposed;
      state.cost_history.push_back(current);
      rejected = 0;
      cursor = 0;
      reshuffle();
    } else if (++rejected >= patience) {
      state.converged = true;
    }
  }

  state.assignment.assign(n, 0);
  state.total_cost = dist.cost(state.medoids, &state.assignment);
  return state;
}

// --- PAM prototype generation --------------------------------------------------

void PamConfig::validate() const {
  require(medoids_per_size >= 1, ErrorKind::invalid_argument, "medoids_per_size must be positive");
  require(drop_per_size >= 0, ErrorKind::invalid_argument, "drop_per_size must be non-negative");
  require(pool_budget >= 1, ErrorKind::invalid_argument, "pool_budget must be positive");
  require(!sizes.empty(), ErrorKind::invalid_argument, "at least one prototype size is required");
  for (int n : sizes) check_size(n);
  check_bands(bands);
}

namespace {

struct Candidate {
  std::size_t image;
  int band0;
  int row;
  int col;
};

struct ScoredPrototype {
  Prototype proto;
  double spread;  // mean distance from cluster members to the medoid
};

}  // namespace

PamPrototypeResult pam_prototypes(std::span<const std::vector<C1Response>> per_category, const PamConfig& cfg,
                                  std::uint64_t seed) {
  cfg.validate();
  require(!per_category.empty(), ErrorKind::invalid_argument, "at least one category is required");

  std::vector<ScoredPrototype> pooled;
  for (std::size_t cat = 0; cat < per_category.size(); ++cat) {
    const std::vector<C1Response>& images = per_category[cat];
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      const int n = cfg.sizes[si];
      Rng rng(mix_seed(seed, cat * 64 + si));

      std::vector<Candidate> positions;
      for (std::size_t img = 0; img < images.size(); ++img) {
        for (int b : cfg.bands) {
          const C1Response& c1 = images[img];
          for (int r = 0; r + n <= c1.rows(b - 1); ++r)
            for (int c = 0; c + n <= c1.cols(b - 1); ++c) positions.push_back({img, b - 1, r, c});
        }
      }
      if (positions.size() > cfg.pool_budget) {
        for (std::size_t i = 0; i < cfg.pool_budget; ++i)
          std::swap(positions[i], positions[i + uniform_index(rng, positions.size() - i)]);
        positions.resize(cfg.pool_budget);
      }

      std::vector<Prototype> candidates;
      std::vector<PatchTensor> tensors;
      for (const Candidate& pos : positions) {
        Prototype p = extract_patch(images[pos.image], pos.band0, pos.row, pos.col, n);
        if (p.all_zero()) continue;
        tensors.push_back(p.tensor);
        candidates.push_back(std::move(p));
      }
      require(candidates.size() >= static_cast<std::size_t>(cfg.medoids_per_size), ErrorKind::data,
              "category " + std::to_string(cat) + " has " + std::to_string(candidates.size()) + " valid " +
                  std::to_string(n) + "x" + std::to_string(n) + " patches; " +
                  std::to_string(cfg.medoids_per_size) + " are needed");

      const PamState state =
          pam_cluster(tensors, static_cast<std::size_t>(cfg.medoids_per_size), cfg.max_iter, rng());

      std::vector<double> spread(state.medoids.size(), 0.0);
      std::vector<std::size_t> members(state.medoids.size(), 0);
      for (std::size_t i = 0; i < tensors.size(); ++i) {
        const std::size_t cl = state.assignment[i];
        spread[cl] += frobenius_distance(tensors[i], tensors[state.medoids[cl]]);
        ++members[cl];
      }
      for (std::size_t cl = 0; cl < state.medoids.size(); ++cl) {
        Prototype p = candidates[state.medoids[cl]];
        p.origin = PrototypeOrigin::pam;
        if (p.all_zero()) continue;
        pooled.push_back({std::move(p), spread[cl] / static_cast<double>(members[cl])});
      }
    }
  }

  PamPrototypeResult result;
  result.pooled = pooled.size();
  result.prototypes.origin = PrototypeOrigin::pam;
  result.prototypes.seed = seed;

  std::vector<bool> dropped(pooled.size(), false);
  Rng drop_rng(mix_seed(seed, 0xd809));
  for (int n : cfg.sizes) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pooled.size(); ++i)
      if (pooled[i].proto.size == n) idx.push_back(i);
    require(idx.size() >= static_cast<std::size_t>(cfg.drop_per_size), ErrorKind::data,
            "cannot drop " + std::to_string(cfg.drop_per_size) + " of " + std::to_string(idx.size()) + " " +
                std::to_string(n) + "x" + std::to_string(n) + " prototypes");
    if (cfg.drop_rule == DropRule::weakest) {
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (pooled[a].spread != pooled[b].spread) return pooled[a].spread > pooled[b].spread;
        return a > b;
      });
    } else {
      shuffle(idx, drop_rng);
    }
    for (int d = 0; d < cfg.drop_per_size; ++d) dropped[idx[static_cast<std::size_t>(d)]] = true;
  }
  for (std::size_t i = 0; i < pooled.size(); ++i)
    if (!dropped[i]) result.prototypes.prototypes.push_back(std::move(pooled[i].proto));
  return result;
}

}  // namespace hmax
