#pragma once

// Plain-text rendering of explanations. Output is a pure function of the
// explanation, so repeated renders are byte-identical.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <variant>

#include "polyex/errors.hpp"
#include "polyex/explain.hpp"
#include "polyex/geometry.hpp"

namespace polyex {

enum class Style { kHrep, kVrep, kText };

inline Style parse_style(const std::string& s) {
  if (s == "hrep") return Style::kHrep;
  if (s == "vrep") return Style::kVrep;
  if (s == "text") return Style::kText;
  throw ParseError("unknown style `" + s + "` (expected hrep, vrep or text)");
}

/// Six significant digits, no negative zero.
inline std::string fmt_real(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

inline std::string fmt_point(const Vector& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i > 0) s += ", ";
    s += fmt_real(x[i]);
  }
  return s + ")";
}

/// `x1 - 0.5·x2`; unit coefficients are left implicit.
inline std::string fmt_linear(const Vector& a) {
  std::string s;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double c = a[i];
    if (c == 0.0) continue;
    const double mag = std::abs(c);
    const std::string var = "x" + std::to_string(i + 1);
    const std::string term = fmt_real(mag) == "1" ? var : fmt_real(mag) + "·" + var;
    if (s.empty()) {
      s = c < 0 ? "-" + term : term;
    } else {
      s += c < 0 ? " - " + term : " + " + term;
    }
  }
  return s.empty() ? "0" : s;
}

inline std::string fmt_class(std::size_t c, const std::optional<std::string>& name) {
  std::string s = "class " + std::to_string(c);
  if (name) s += " (" + *name + ")";
  return s;
}

inline std::string describe(const Provenance& p) {
  if (const auto* n = std::get_if<NeuronTag>(&p)) {
    return "hidden layer " + std::to_string(n->layer + 1) + ", neuron " + std::to_string(n->index + 1) +
           (n->active ? " active" : " inactive");
  }
  if (const auto* o = std::get_if<OutputPairTag>(&p)) {
    return "class " + std::to_string(o->winner) + " beats class " + std::to_string(o->loser);
  }
  const auto& b = std::get<DomainBoxTag>(p);
  return "input bound x" + std::to_string(b.dim + 1) + (b.side == DomainBoxTag::Side::kLower ? " lower" : " upper");
}

/// Standard form: `a·x {<,≤} b`.
inline std::string fmt_standard(const LinearConstraint& c) {
  return fmt_linear(c.a) + (c.strict ? " < " : " ≤ ") + fmt_real(c.b);
}

/// Reading form: strict rows are flipped to `> `, so `-x1 < 0` reads `x1 > 0`.
inline std::string fmt_natural(const LinearConstraint& c) {
  if (c.strict) return fmt_linear(-c.a) + " > " + fmt_real(-c.b);
  return fmt_linear(c.a) + " ≤ " + fmt_real(c.b);
}

namespace detail {

inline void render_vrep_block(std::ostringstream& os, const std::string& title, const VRepresentation& v) {
  os << title << ": " << v.vertices.size() << " vertices\n";
  const Box r = v.ranges();
  for (std::size_t d = 0; d < r.size(); ++d) {
    os << "  x" << d + 1 << " in [" << fmt_real(r[d].lo) << ", " << fmt_real(r[d].hi) << "]\n";
  }
  for (const auto& p : v.vertices) os << "  vertex " << fmt_point(p) << "\n";
}

}  // namespace detail

inline std::string render(const WhyExplanation& e, Style style) {
  std::ostringstream os;
  switch (style) {
    case Style::kHrep:
      os << fmt_class(e.class_index, e.class_name) << " at x = " << fmt_point(e.input) << "\n";
      os << "signature " << e.signature.str() << "\n";
      if (e.on_boundary) os << "note: boundary point (a hidden pre-activation is exactly 0)\n";
      os << e.minimal_constraints.size() << " constraints (" << e.removed_count << " of " << e.pre_removal_count
         << " redundant, box excluded):\n";
      for (const auto& c : e.minimal_constraints) os << "  " << fmt_standard(c) << "    [" << describe(c.provenance) << "]\n";
      break;
    case Style::kVrep:
      if (!e.vrep) throw MissingDataError("vrep style needs an explanation computed with vertices");
      os << fmt_class(e.class_index, e.class_name) << " at x = " << fmt_point(e.input) << "\n";
      detail::render_vrep_block(os, "region", e.vrep->region);
      detail::render_vrep_block(os, "decision region", e.vrep->output);
      break;
    case Style::kText:
      os << "The network chose " << fmt_class(e.class_index, e.class_name) << " at x = " << fmt_point(e.input)
         << ".\n";
      for (const auto& c : e.minimal_constraints) {
        os << "because " << fmt_natural(c) << " (" << describe(c.provenance) << ").\n";
      }
      break;
  }
  return os.str();
}

inline std::string render(const WhyNotExplanation& e, Style style) {
  std::ostringstream os;
  const std::string fact = fmt_class(e.factual_class, e.factual_name);
  const std::string cf = fmt_class(e.counterfactual_class, e.counterfactual_name);

  if (style == Style::kVrep) {
    if (!e.vrep) throw MissingDataError("vrep style needs an explanation computed with vertices");
    os << fact << " at x = " << fmt_point(e.input) << ", not " << cf << "\n";
    detail::render_vrep_block(os, "origin region", e.vrep->origin);
    detail::render_vrep_block(os, "nearest region where " + cf + " wins", e.vrep->target);
    return os.str();
  }

  if (const auto* same = std::get_if<SameRegion>(&e.outcome)) {
    if (style == Style::kText) {
      os << "The network chose " << fact << " over " << cf << " at x = " << fmt_point(e.input) << " because "
         << fmt_natural(same->delta_constraint) << " there; " << cf << " wins elsewhere in the same region, e.g. at "
         << fmt_point(same->witness) << ".\n";
    } else {
      os << fact << " over " << cf << " at x = " << fmt_point(e.input) << ": same region\n";
      os << "signature " << e.signature.str() << "\n";
      os << "  " << fmt_standard(same->delta_constraint) << "    [" << describe(same->delta_constraint.provenance)
         << "]\n";
      os << "witness for " << cf << ": " << fmt_point(same->witness) << "\n";
    }
    return os.str();
  }

  if (const auto* diff = std::get_if<DifferentRegion>(&e.outcome)) {
    if (style == Style::kText) {
      os << "The network chose " << fact << " and not " << cf << " at x = " << fmt_point(e.input) << ".\n";
      for (const auto& pr : diff->differing_constraints) {
        os << "because " << fmt_natural(pr.origin_side) << " (" << describe(pr.origin_side.provenance) << "); " << cf
           << " needs " << fmt_natural(pr.target_side) << " (" << describe(pr.target_side.provenance) << ").\n";
      }
      os << "The nearest point found where " << cf << " wins is " << fmt_point(diff->witness) << ".\n";
    } else {
      os << fact << " not " << cf << " at x = " << fmt_point(e.input) << ": distance " << diff->distance << "\n";
      os << "signature " << e.signature.str() << " -> " << diff->target_signature.str() << "\n";
      for (const auto& pr : diff->differing_constraints) {
        os << "  origin " << fmt_standard(pr.origin_side) << "    [" << describe(pr.origin_side.provenance) << "]\n";
        os << "  target " << fmt_standard(pr.target_side) << "    [" << describe(pr.target_side.provenance) << "]\n";
      }
      os << "witness for " << cf << ": " << fmt_point(diff->witness) << "\n";
      os << "examined " << diff->examined << " signatures\n";
    }
    return os.str();
  }

  const auto& un = std::get<ClassUnreachable>(e.outcome);
  os << cf << " was not found near x = " << fmt_point(e.input) << " after examining " << un.examined
     << " signatures up to distance " << un.reached_distance
     << (un.exhaustive ? " (exhaustive: unreachable inside the input box)" : " (search budget exhausted)") << ".\n";
  return os.str();
}

}  // namespace polyex
