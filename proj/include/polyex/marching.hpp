#pragma once

// Hamming-distance search over activation signatures.
//
// Flipping a bit of an early layer moves every later hyperplane, so each
// candidate region is rebuilt from its own signature rather than reusing the
// origin's rows.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <future>
#include <optional>
#include <variant>
#include <vector>

#include "polyex/combinatorics.hpp"
#include "polyex/errors.hpp"
#include "polyex/geometry.hpp"
#include "polyex/model.hpp"

namespace polyex {

inline constexpr std::uint64_t kDefaultMarchBudget = 1'000'000;

struct MarchOptions {
  /// Maximum number of candidate signatures examined.
  std::uint64_t budget = kDefaultMarchBudget;
  /// Largest Hamming distance tried; defaults to the number of hidden neurons.
  std::optional<std::size_t> max_distance;
  /// Worker threads per distance ring. The answer does not depend on it.
  unsigned threads = 1;
};

/// Search state: how far the march got and how much of the budget it used.
struct MarchFrontier {
  ActivationSignature origin;
  std::size_t current_distance = 1;
  /// Next flipped-position set to try in the current ring; empty means the
  /// start of the ring.
  std::vector<std::size_t> next_flip;
  std::uint64_t examined = 0;
  std::uint64_t budget = kDefaultMarchBudget;
  std::size_t max_distance = 0;
};

struct MarchFound {
  ActivationSignature signature;
  Polytope region;          // region_hrep of `signature`
  Polytope counterfactual;  // region ∩ target-class dominance
  Vector witness;
  double margin = 0.0;
  std::size_t distance = 0;
  std::uint64_t examined = 0;
};

struct MarchExhausted {
  std::uint64_t examined = 0;
  std::size_t reached_distance = 0;
  /// Every signature up to the full bit count was examined.
  bool complete = false;
};

using MarchResult = std::variant<MarchFound, MarchExhausted>;

/// Every signature at Hamming distance `d` from `s`, ordered by the
/// lexicographic order of the flipped position sets.
inline std::vector<ActivationSignature> neighbors_at_distance(const ActivationSignature& s, std::size_t d) {
  const std::size_t n = s.size();
  if (d < 1 || d > n) {
    throw RangeError("Hamming distance " + std::to_string(d) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<ActivationSignature> out;
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(binomial(n, d), 1u << 20)));
  auto idx = first_combination(d);
  do {
    out.push_back(s.flipped(idx));
  } while (next_combination(idx, n));
  return out;
}

/// Region of `s` and its subset where class `c` wins, if both are open.
inline std::optional<MarchFound> counterfactual_region(const Network& net, const ActivationSignature& s,
                                                       std::size_t c) {
  Polytope region = region_hrep(net, s);
  if (!open_feasibility(region).open()) return std::nullopt;
  const auto maps = effective_preactivation_maps(net, s);
  Polytope sub = with_constraints(region, class_dominance_constraints(maps.back(), c));
  const auto margin = open_feasibility(sub);
  if (!margin.open()) return std::nullopt;
  MarchFound f;
  f.signature = s;
  f.region = std::move(region);
  f.counterfactual = std::move(sub);
  f.witness = margin.witness;
  f.margin = margin.margin;
  return f;
}

namespace detail {

// Index of the first hit in `batch` and its result.
inline std::optional<std::pair<std::size_t, MarchFound>> scan_batch(const Network& net,
                                                                    const std::vector<ActivationSignature>& batch,
                                                                    std::size_t begin, std::size_t end,
                                                                    std::size_t target) {
  for (std::size_t i = begin; i < end; ++i) {
    if (auto hit = counterfactual_region(net, batch[i], target)) return std::make_pair(i, std::move(*hit));
  }
  return std::nullopt;
}

inline std::optional<std::pair<std::size_t, MarchFound>> scan_parallel(const Network& net,
                                                                       const std::vector<ActivationSignature>& batch,
                                                                       std::size_t target, unsigned threads) {
  if (threads <= 1 || batch.size() < 2) return scan_batch(net, batch, 0, batch.size(), target);
  const std::size_t workers = std::min<std::size_t>(threads, batch.size());
  const std::size_t step = (batch.size() + workers - 1) / workers;
  std::vector<std::future<std::optional<std::pair<std::size_t, MarchFound>>>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * step;
    const std::size_t end = std::min(batch.size(), begin + step);
    if (begin >= end) break;
    jobs.push_back(std::async(std::launch::async, [&net, &batch, begin, end, target] {
      return scan_batch(net, batch, begin, end, target);
    }));
  }
  // Chunks are contiguous, so the first chunk with a hit holds the
  // sequential answer.
  std::optional<std::pair<std::size_t, MarchFound>> best;
  for (auto& j : jobs) {
    auto r = j.get();
    if (r && !best) best = std::move(r);
  }
  return best;
}

}  // namespace detail

/// Walks outward from `frontier.origin` one Hamming ring at a time and returns
/// the first signature (lexicographic within the ring) whose region contains
/// an open set where class `target` wins.
inline MarchResult march_to_counterfactual(const Network& net, std::size_t target, MarchFrontier& frontier,
                                           unsigned threads = 1) {
  net.check_class(target);
  net.check_signature(frontier.origin);
  const std::size_t n = frontier.origin.size();
  const std::size_t max_d = std::min(frontier.max_distance, n);
  constexpr std::size_t kBatch = 512;

  for (std::size_t d = std::max<std::size_t>(frontier.current_distance, 1); d <= max_d; ++d) {
    if (d != frontier.current_distance || frontier.next_flip.size() != d) frontier.next_flip = first_combination(d);
    frontier.current_distance = d;
    auto& idx = frontier.next_flip;
    bool more = true;
    while (more) {
      std::vector<std::vector<std::size_t>> flips;
      while (more && flips.size() < kBatch && frontier.examined + flips.size() < frontier.budget) {
        flips.push_back(idx);
        more = next_combination(idx, n);
      }
      if (flips.empty()) return MarchExhausted{frontier.examined, d, false};
      std::vector<ActivationSignature> batch;
      batch.reserve(flips.size());
      for (const auto& f : flips) batch.push_back(frontier.origin.flipped(f));

      auto hit = detail::scan_parallel(net, batch, target, threads);
      if (hit) {
        frontier.examined += hit->first + 1;
        // Resuming continues after the hit.
        idx = flips[hit->first];
        if (!next_combination(idx, n)) {
          idx.clear();
          frontier.current_distance = d + 1;
        }
        MarchFound f = std::move(hit->second);
        f.distance = d;
        f.examined = frontier.examined;
        return f;
      }
      frontier.examined += batch.size();
      if (more && frontier.examined >= frontier.budget) return MarchExhausted{frontier.examined, d, false};
    }
    idx.clear();
  }
  return MarchExhausted{frontier.examined, max_d, max_d == n};
}

inline MarchResult march_to_counterfactual(const Network& net, const ActivationSignature& origin,
                                           std::size_t target, const MarchOptions& opts = {}) {
  MarchFrontier frontier;
  frontier.origin = origin;
  frontier.budget = opts.budget;
  frontier.max_distance = opts.max_distance.value_or(origin.size());
  return march_to_counterfactual(net, target, frontier, opts.threads);
}

// ---------------------------------------------------------------------------
// Region collection for visualisation.

struct RegionPiece {
  std::size_t class_index = 0;
  std::vector<Vector> vertices;
};

struct MarchedRegion {
  ActivationSignature signature;
  std::size_t distance = 0;
  /// Class at the region's Chebyshev centre.
  std::size_t class_index = 0;
  Vector witness;
  std::vector<Vector> vertices;
  /// Sub-polygons where each class wins.
  std::vector<RegionPiece> pieces;
};

/// Feasible regions in Hamming order around `origin`, up to `max_regions`.
/// Vertices are counterclockwise, so this is meant for 2-D inputs.
inline std::vector<MarchedRegion> collect_regions(const Network& net, const ActivationSignature& origin,
                                                  std::size_t max_regions,
                                                  std::uint64_t budget = kDefaultMarchBudget) {
  net.check_signature(origin);
  std::vector<MarchedRegion> out;
  std::uint64_t examined = 0;
  const std::size_t n = origin.size();

  auto visit = [&](const ActivationSignature& s, std::size_t d) {
    ++examined;
    Polytope region = region_hrep(net, s);
    const auto margin = open_feasibility(region);
    if (!margin.open()) return;
    MarchedRegion r;
    r.signature = s;
    r.distance = d;
    r.witness = margin.witness;
    r.class_index = forward(net, margin.witness).class_index;
    r.vertices = enumerate_vertices(region).vertices;
    if (net.input_dim() == 2) r.vertices = order_counterclockwise(std::move(r.vertices));
    const auto maps = effective_preactivation_maps(net, s);
    for (std::size_t c = 0; c < net.num_classes(); ++c) {
      Polytope sub = with_constraints(region, class_dominance_constraints(maps.back(), c));
      if (!open_feasibility(sub).open()) continue;
      RegionPiece piece{c, enumerate_vertices(sub).vertices};
      if (net.input_dim() == 2) piece.vertices = order_counterclockwise(std::move(piece.vertices));
      r.pieces.push_back(std::move(piece));
    }
    out.push_back(std::move(r));
  };

  visit(origin, 0);
  for (std::size_t d = 1; d <= n && out.size() < max_regions && examined < budget; ++d) {
    auto idx = first_combination(d);
    do {
      visit(origin.flipped(idx), d);
    } while (out.size() < max_regions && examined < budget && next_combination(idx, n));
  }
  return out;
}

}  // namespace polyex
