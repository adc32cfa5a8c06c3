#pragma once

// JSON forms of explanations, predictions and decompositions. Reals are
// written as shortest round-trip decimal doubles.

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "polyex/explain.hpp"
#include "polyex/geometry.hpp"
#include "polyex/model.hpp"
#include "polyex/oracle.hpp"
#include "polyex/render.hpp"

namespace polyex::serial {

using nlohmann::json;

inline json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json points(const std::vector<Vector>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(vec(p));
  return out;
}

inline json signature(const ActivationSignature& s) {
  json out = json::array();
  for (auto b : s.flat()) out.push_back(static_cast<int>(b));
  return out;
}

inline json provenance(const Provenance& p) {
  if (const auto* n = std::get_if<NeuronTag>(&p)) {
    return {{"kind", "neuron"}, {"layer", n->layer}, {"index", n->index},
            {"orientation", n->active ? "active" : "inactive"}};
  }
  if (const auto* o = std::get_if<OutputPairTag>(&p)) {
    return {{"kind", "output_pair"}, {"winner", o->winner}, {"loser", o->loser}};
  }
  const auto& b = std::get<DomainBoxTag>(p);
  return {{"kind", "domain_box"}, {"dim", b.dim}, {"side", b.side == DomainBoxTag::Side::kLower ? "lower" : "upper"}};
}

inline json constraint(const LinearConstraint& c) {
  return {{"a", vec(c.a)}, {"b", c.b}, {"strict", c.strict}, {"provenance", provenance(c.provenance)}};
}

inline json constraints(const std::vector<LinearConstraint>& cs) {
  json out = json::array();
  for (const auto& c : cs) out.push_back(constraint(c));
  return out;
}

inline json optional_name(const std::optional<std::string>& n) { return n ? json(*n) : json(nullptr); }

inline json box(const Box& b) {
  json out = json::array();
  for (const auto& iv : b) out.push_back({iv.lo, iv.hi});
  return out;
}

inline json vrep(const VRepresentation& v) {
  return {{"vertices", points(v.vertices)}, {"ranges", box(v.ranges())}};
}

inline json predict(const Network& net, const ForwardResult& fr) {
  return {{"logits", vec(fr.logits)},
          {"class_index", fr.class_index},
          {"class_name", optional_name(net.class_name(fr.class_index))},
          {"signature", signature(fr.signature)},
          {"inside_bounds", fr.inside_bounds},
          {"on_boundary", fr.on_boundary}};
}

inline json model_info(const Network& net) {
  return {{"input_dim", net.input_dim()},
          {"bounds", box(net.input_bounds())},
          {"class_names", net.class_names()},
          {"layer_widths", net.layer_widths()},
          {"output_activation", to_string(net.output_activation())}};
}

inline json why(const WhyExplanation& e) {
  json out = {{"input", vec(e.input)},
              {"logits", vec(e.logits)},
              {"class_index", e.class_index},
              {"class_name", optional_name(e.class_name)},
              {"signature", signature(e.signature)},
              {"minimal_constraints", constraints(e.minimal_constraints)},
              {"removed_count", e.removed_count},
              {"pre_removal_count", e.pre_removal_count},
              {"lp_count", e.lp_count},
              {"on_boundary", e.on_boundary},
              {"inside_bounds", e.inside_bounds},
              {"text", render(e, Style::kText)}};
  out["vrep"] = e.vrep ? json{{"region", vrep(e.vrep->region)}, {"output", vrep(e.vrep->output)}} : json(nullptr);
  return out;
}

inline json why_not(const WhyNotExplanation& e) {
  json out = {{"input", vec(e.input)},
              {"factual_class", e.factual_class},
              {"factual_name", optional_name(e.factual_name)},
              {"counterfactual_class", e.counterfactual_class},
              {"counterfactual_name", optional_name(e.counterfactual_name)},
              {"signature", signature(e.signature)},
              {"text", render(e, Style::kText)}};
  if (const auto* s = std::get_if<SameRegion>(&e.outcome)) {
    out["kind"] = "same_region";
    out["delta_constraint"] = constraint(s->delta_constraint);
    out["delta_weights"] = vec(s->delta_weights);
    out["delta_bias"] = s->delta_bias;
    out["witness"] = vec(s->witness);
  } else if (const auto* d = std::get_if<DifferentRegion>(&e.outcome)) {
    out["kind"] = "different_region";
    out["distance"] = d->distance;
    json pairs = json::array();
    for (const auto& p : d->differing_constraints) {
      pairs.push_back({{"origin_side", constraint(p.origin_side)}, {"target_side", constraint(p.target_side)}});
    }
    out["differing_constraints"] = pairs;
    out["witness"] = vec(d->witness);
    out["target_signature"] = signature(d->target_signature);
    out["examined"] = d->examined;
  } else {
    const auto& u = std::get<ClassUnreachable>(e.outcome);
    out["kind"] = "class_unreachable";
    out["examined"] = u.examined;
    out["reached_distance"] = u.reached_distance;
    out["exhaustive"] = u.exhaustive;
  }
  out["vrep"] = e.vrep ? json{{"origin", vrep(e.vrep->origin)}, {"target", vrep(e.vrep->target)}} : json(nullptr);
  return out;
}

inline json decomposition(const oracle::Decomposition& d) {
  json regions = json::array();
  for (const auto& r : d.regions) {
    regions.push_back({{"signature", signature(r.signature)},
                       {"margin", r.margin},
                       {"witness", vec(r.witness)},
                       {"constraints", constraints(r.region.without_box())}});
  }
  return {{"examined", d.examined}, {"feasible_count", d.regions.size()}, {"regions", regions}};
}

inline json regions(const std::vector<MarchedRegion>& rs) {
  json out = json::array();
  for (const auto& r : rs) {
    json pieces = json::array();
    for (const auto& p : r.pieces) pieces.push_back({{"class_index", p.class_index}, {"vertices", points(p.vertices)}});
    out.push_back({{"signature", signature(r.signature)},
                   {"distance", r.distance},
                   {"class_index", r.class_index},
                   {"witness", vec(r.witness)},
                   {"vertices", points(r.vertices)},
                   {"pieces", pieces}});
  }
  return out;
}

}  // namespace polyex::serial
