#pragma once

// Brute-force reference procedures: enumerate every activation signature.
// Exponential by construction; used to check the marching search.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <future>
#include <iterator>
#include <optional>
#include <vector>

#include "polyex/errors.hpp"
#include "polyex/geometry.hpp"
#include "polyex/model.hpp"

namespace polyex::oracle {

inline constexpr std::size_t kMaxNeurons = 16;

struct Region {
  ActivationSignature signature;
  Polytope region;
  double margin = 0.0;
  Vector witness;
};

struct Decomposition {
  /// Open-feasible regions only, ordered by signature.
  std::vector<Region> regions;
  /// Signatures tried; always 2^n.
  std::uint64_t examined = 0;
};

/// Signature whose flat bits spell `value` in binary, most significant bit
/// first, so numeric order equals lexicographic bit order.
inline ActivationSignature signature_from_index(const std::vector<std::size_t>& widths, std::uint64_t value) {
  auto s = ActivationSignature::zeros(widths);
  const std::size_t n = s.size();
  std::vector<std::size_t> ones;
  for (std::size_t i = 0; i < n; ++i) {
    if ((value >> (n - 1 - i)) & 1u) ones.push_back(i);
  }
  return s.flipped(ones);
}

inline Decomposition full_decompose(const Network& net, unsigned threads = 1) {
  const std::size_t n = net.total_hidden_neurons();
  if (n > kMaxNeurons) {
    throw CapExceededError("full decomposition limited to " + std::to_string(kMaxNeurons) + " hidden neurons, got " +
                           std::to_string(n));
  }
  const std::uint64_t total = std::uint64_t{1} << n;
  const auto widths = net.hidden_widths();

  auto scan = [&](std::uint64_t begin, std::uint64_t end) {
    std::vector<Region> found;
    for (std::uint64_t v = begin; v < end; ++v) {
      auto s = signature_from_index(widths, v);
      Polytope p = region_hrep(net, s);
      const auto m = open_feasibility(p);
      if (m.open()) found.push_back({std::move(s), std::move(p), m.margin, m.witness});
    }
    return found;
  };

  Decomposition d;
  d.examined = total;
  const std::uint64_t workers = std::max<std::uint64_t>(1, std::min<std::uint64_t>(threads, total));
  if (workers == 1) {
    d.regions = scan(0, total);
    return d;
  }
  const std::uint64_t step = (total + workers - 1) / workers;
  std::vector<std::future<std::vector<Region>>> jobs;
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t begin = w * step;
    const std::uint64_t end = std::min(total, begin + step);
    if (begin < end) jobs.push_back(std::async(std::launch::async, scan, begin, end));
  }
  for (auto& j : jobs) {
    auto part = j.get();
    std::move(part.begin(), part.end(), std::back_inserter(d.regions));
  }
  return d;
}

struct WhyNotAnswer {
  std::size_t min_distance = 0;
  std::vector<ActivationSignature> minimizers;
};

/// Minimal Hamming distance from the signature of `x` to any region where
/// `target` wins on an open set, scanning the whole decomposition.
inline std::optional<WhyNotAnswer> oracle_why_not(const Network& net, const Decomposition& dec, const Vector& x,
                                                  std::size_t target) {
  net.check_class(target);
  const auto origin = forward(net, x).signature;
  std::optional<WhyNotAnswer> best;
  for (const auto& r : dec.regions) {
    const auto maps = effective_preactivation_maps(net, r.signature);
    const Polytope sub = with_constraints(r.region, class_dominance_constraints(maps.back(), target));
    if (!open_feasibility(sub).open()) continue;
    const std::size_t d = origin.hamming(r.signature);
    if (!best || d < best->min_distance) {
      best = WhyNotAnswer{d, {r.signature}};
    } else if (d == best->min_distance) {
      best->minimizers.push_back(r.signature);
    }
  }
  return best;
}

inline std::optional<WhyNotAnswer> oracle_why_not(const Network& net, const Vector& x, std::size_t target) {
  return oracle_why_not(net, full_decompose(net), x, target);
}

}  // namespace polyex::oracle
