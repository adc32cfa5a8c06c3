#pragma once

// "Why" and "why not" explanations built from the local polytope of a query.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "polyex/errors.hpp"
#include "polyex/geometry.hpp"
#include "polyex/marching.hpp"
#include "polyex/model.hpp"

namespace polyex {

struct WhyVrep {
  VRepresentation region;  // the whole linear region
  VRepresentation output;  // the part of it where the chosen class wins
};

struct WhyExplanation {
  Vector input;
  Vector logits;
  std::size_t class_index = 0;
  std::optional<std::string> class_name;
  ActivationSignature signature;
  /// Irredundant rows of the decision region, domain box excluded.
  std::vector<LinearConstraint> minimal_constraints;
  std::size_t removed_count = 0;
  /// Constraints of the decision region before reduction (box included).
  std::size_t pre_removal_count = 0;
  std::size_t lp_count = 0;
  std::vector<RemovalCertificate> certificates;
  /// The unreduced decision region and its reduction (box kept in both).
  Polytope output_region;
  Polytope reduced_region;
  std::optional<WhyVrep> vrep;
  bool on_boundary = false;
  bool inside_bounds = true;
};

struct WhyOptions {
  bool want_vrep = false;
  std::size_t vertex_dim_cap = kDefaultVertexDimCap;
};

struct ConstraintPair {
  LinearConstraint origin_side;
  LinearConstraint target_side;
};

/// The counterfactual class also wins somewhere in the input's own region.
struct SameRegion {
  /// (g_c - g_c')·x + (v_c - v_c') > 0 written as a·x < b.
  LinearConstraint delta_constraint;
  Vector delta_weights;  // g_c - g_c'
  double delta_bias = 0.0;  // v_c - v_c'
  Vector witness;        // a point of the region where c' wins
};

struct DifferentRegion {
  std::size_t distance = 0;
  std::vector<ConstraintPair> differing_constraints;
  Vector witness;
  ActivationSignature target_signature;
  std::uint64_t examined = 0;
};

struct ClassUnreachable {
  std::uint64_t examined = 0;
  std::size_t reached_distance = 0;
  /// All signatures were tried; false when the budget or distance cap cut
  /// the search short.
  bool exhaustive = false;
};

struct WhyNotVrep {
  VRepresentation origin;
  VRepresentation target;
};

struct WhyNotExplanation {
  Vector input;
  std::size_t factual_class = 0;
  std::size_t counterfactual_class = 0;
  std::optional<std::string> factual_name;
  std::optional<std::string> counterfactual_name;
  ActivationSignature signature;
  std::variant<SameRegion, DifferentRegion, ClassUnreachable> outcome;
  std::optional<WhyNotVrep> vrep;
};

struct WhyNotOptions {
  MarchOptions march;
  bool want_vrep = false;
  std::size_t vertex_dim_cap = kDefaultVertexDimCap;
};

/// Minimal H-representation of the region around `x` where the network's
/// decision is constant.
inline WhyExplanation explain_why(const Network& net, const Vector& x, const WhyOptions& opts = {}) {
  const ForwardResult fr = forward(net, x);
  const auto maps = effective_preactivation_maps(net, fr.signature);
  const Polytope region = region_hrep(net, fr.signature);
  const Polytope output = with_constraints(region, class_dominance_constraints(maps.back(), fr.class_index));

  const RedundancyResult red = remove_redundant(output, x);

  WhyExplanation e;
  e.input = x;
  e.logits = fr.logits;
  e.class_index = fr.class_index;
  e.class_name = net.class_name(fr.class_index);
  e.signature = fr.signature;
  e.minimal_constraints = red.reduced.without_box();
  e.removed_count = red.removed.size();
  e.pre_removal_count = output.constraints.size();
  e.lp_count = red.lp_count;
  e.certificates = red.removed;
  e.output_region = output;
  e.reduced_region = red.reduced;
  e.on_boundary = fr.on_boundary;
  e.inside_bounds = fr.inside_bounds;
  if (opts.want_vrep) {
    e.vrep = WhyVrep{enumerate_vertices(region, opts.vertex_dim_cap),
                     enumerate_vertices(red.reduced, opts.vertex_dim_cap)};
  }
  return e;
}

/// Why the network at `x` did not choose `counterfactual`.
inline WhyNotExplanation explain_why_not(const Network& net, const Vector& x, std::size_t counterfactual,
                                         const WhyNotOptions& opts = {}) {
  net.check_class(counterfactual);
  const ForwardResult fr = forward(net, x);
  if (counterfactual == fr.class_index) {
    throw FactualClassError("class " + std::to_string(counterfactual) + " is already the network's decision");
  }
  const auto maps = effective_preactivation_maps(net, fr.signature);
  const Polytope region = region_hrep(net, fr.signature);
  const Polytope cf = with_constraints(region, class_dominance_constraints(maps.back(), counterfactual));

  WhyNotExplanation e;
  e.input = x;
  e.factual_class = fr.class_index;
  e.counterfactual_class = counterfactual;
  e.factual_name = net.class_name(fr.class_index);
  e.counterfactual_name = net.class_name(counterfactual);
  e.signature = fr.signature;

  const auto margin = open_feasibility(cf);
  if (margin.open()) {
    const auto& out = maps.back();
    const auto c = static_cast<Eigen::Index>(fr.class_index);
    const auto cp = static_cast<Eigen::Index>(counterfactual);
    SameRegion same;
    same.delta_weights = (out.M.row(c) - out.M.row(cp)).transpose();
    same.delta_bias = out.v[c] - out.v[cp];
    same.delta_constraint = {-same.delta_weights, same.delta_bias, true, OutputPairTag{fr.class_index, counterfactual}};
    same.witness = margin.witness;
    e.outcome = std::move(same);
    if (opts.want_vrep) {
      const auto v = enumerate_vertices(region, opts.vertex_dim_cap);
      e.vrep = WhyNotVrep{v, v};
    }
    return e;
  }

  const MarchResult res = march_to_counterfactual(net, fr.signature, counterfactual, opts.march);
  if (const auto* found = std::get_if<MarchFound>(&res)) {
    DifferentRegion diff;
    diff.distance = found->distance;
    diff.witness = found->witness;
    diff.target_signature = found->signature;
    diff.examined = found->examined;
    for (std::size_t i = 0; i < fr.signature.size(); ++i) {
      if (fr.signature[i] == found->signature[i]) continue;
      // Neuron rows come first and in flat signature order.
      diff.differing_constraints.push_back({region.constraints[i], found->region.constraints[i]});
    }
    if (opts.want_vrep) {
      e.vrep = WhyNotVrep{enumerate_vertices(region, opts.vertex_dim_cap),
                          enumerate_vertices(found->region, opts.vertex_dim_cap)};
    }
    e.outcome = std::move(diff);
    return e;
  }
  const auto& ex = std::get<MarchExhausted>(res);
  e.outcome = ClassUnreachable{ex.examined, ex.reached_distance, ex.complete};
  return e;
}

}  // namespace polyex
