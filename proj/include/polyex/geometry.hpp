#pragma once

// Linear regions of a ReLU network as convex polytopes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "polyex/combinatorics.hpp"
#include "polyex/errors.hpp"
#include "polyex/lp.hpp"
#include "polyex/model.hpp"

namespace polyex {

/// Hidden neuron `index` of hidden layer `layer` (both zero-based).
struct NeuronTag {
  std::size_t layer = 0;
  std::size_t index = 0;
  bool active = false;
  friend bool operator==(const NeuronTag&, const NeuronTag&) = default;
};

/// `winner` beats `loser` at the output layer.
struct OutputPairTag {
  std::size_t winner = 0;
  std::size_t loser = 0;
  friend bool operator==(const OutputPairTag&, const OutputPairTag&) = default;
};

struct DomainBoxTag {
  enum class Side { kLower, kUpper };
  std::size_t dim = 0;
  Side side = Side::kLower;
  friend bool operator==(const DomainBoxTag&, const DomainBoxTag&) = default;
};

using Provenance = std::variant<NeuronTag, OutputPairTag, DomainBoxTag>;

/// a·x <= b, or a·x < b when strict.
struct LinearConstraint {
  Vector a;
  double b = 0.0;
  bool strict = false;
  Provenance provenance;

  double slack(const Vector& x) const { return b - a.dot(x); }

  bool is_box() const { return std::holds_alternative<DomainBoxTag>(provenance); }

  /// All coefficients vanish; the row reduces to 0 <= b (or 0 < b).
  bool degenerate() const { return a.size() == 0 || a.cwiseAbs().maxCoeff() <= lp::kZeroRowTol; }

  /// Arithmetic truth value of a degenerate row.
  bool degenerate_holds() const { return strict ? b > lp::kStrictMargin : b >= -lp::kFeasibilityTol; }

  /// Strict rows need positive slack, closed rows slack >= -tol.
  bool satisfied(const Vector& x, double tol = 0.0) const {
    const double s = slack(x);
    return strict ? s > -tol : s >= -tol;
  }
};

struct AffineMap {
  Matrix M;
  Vector v;

  Vector apply(const Vector& x) const { return M * x + v; }
};

/// H-representation intersected with the domain box. `box` always bounds the
/// point set, whether or not DomainBox rows are present in `constraints`.
struct Polytope {
  std::size_t dim = 0;
  std::vector<LinearConstraint> constraints;
  std::optional<ActivationSignature> signature;
  Box box;

  bool contains(const Vector& x, double tol = 0.0) const {
    for (std::size_t d = 0; d < box.size(); ++d) {
      const double xd = x[static_cast<Eigen::Index>(d)];
      if (xd < box[d].lo - tol || xd > box[d].hi + tol) return false;
    }
    return std::all_of(constraints.begin(), constraints.end(),
                       [&](const LinearConstraint& c) { return c.satisfied(x, tol); });
  }

  /// Smallest slack over all constraints and box faces.
  double min_slack(const Vector& x) const {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& c : constraints) {
      if (!c.degenerate()) s = std::min(s, c.slack(x));
    }
    for (std::size_t d = 0; d < box.size(); ++d) {
      const double xd = x[static_cast<Eigen::Index>(d)];
      s = std::min({s, xd - box[d].lo, box[d].hi - xd});
    }
    return s;
  }

  std::vector<LinearConstraint> without_box() const {
    std::vector<LinearConstraint> out;
    for (const auto& c : constraints) {
      if (!c.is_box()) out.push_back(c);
    }
    return out;
  }
};

struct VRepresentation {
  std::vector<Vector> vertices;

  /// Per-dimension range covered by the vertices.
  Box ranges() const {
    Box out;
    if (vertices.empty()) return out;
    const auto dim = static_cast<std::size_t>(vertices.front().size());
    out.assign(dim, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    for (const auto& v : vertices) {
      for (std::size_t d = 0; d < dim; ++d) {
        out[d].lo = std::min(out[d].lo, v[static_cast<Eigen::Index>(d)]);
        out[d].hi = std::max(out[d].hi, v[static_cast<Eigen::Index>(d)]);
      }
    }
    return out;
  }
};

inline constexpr double kRedundancyTol = 1e-9;
inline constexpr double kVertexTol = 1e-7;
inline constexpr std::size_t kDefaultVertexDimCap = 6;

// ---------------------------------------------------------------------------

/// Two rows per dimension: -x_d <= -lo, then x_d <= hi.
inline std::vector<LinearConstraint> box_constraints(const Box& box) {
  std::vector<LinearConstraint> out;
  const auto dim = static_cast<Eigen::Index>(box.size());
  for (Eigen::Index d = 0; d < dim; ++d) {
    const auto& iv = box[static_cast<std::size_t>(d)];
    Vector lo = Vector::Zero(dim);
    lo[d] = -1.0;
    out.push_back({lo, -iv.lo, false, DomainBoxTag{static_cast<std::size_t>(d), DomainBoxTag::Side::kLower}});
    Vector hi = Vector::Zero(dim);
    hi[d] = 1.0;
    out.push_back({hi, iv.hi, false, DomainBoxTag{static_cast<std::size_t>(d), DomainBoxTag::Side::kUpper}});
  }
  return out;
}

/// Pre-activation of every layer as an affine function of the input, valid
/// inside the region of `s`. The last entry is the logit map.
inline std::vector<AffineMap> effective_preactivation_maps(const Network& net, const ActivationSignature& s) {
  net.check_signature(s);
  const auto& layers = net.layers();
  std::vector<AffineMap> maps;
  maps.reserve(layers.size());
  maps.push_back({layers[0].weights, layers[0].bias});
  for (std::size_t k = 1; k < layers.size(); ++k) {
    const auto bits = s.layer(k - 1);
    Vector mask(static_cast<Eigen::Index>(bits.size()));
    for (std::size_t j = 0; j < bits.size(); ++j) mask[static_cast<Eigen::Index>(j)] = bits[j];
    const AffineMap& prev = maps.back();
    const Matrix masked = layers[k].weights * mask.asDiagonal();
    maps.push_back({masked * prev.M, masked * prev.v + layers[k].bias});
  }
  return maps;
}

inline std::vector<LinearConstraint> neuron_constraints(const std::vector<AffineMap>& maps,
                                                        const ActivationSignature& s) {
  std::vector<LinearConstraint> out;
  out.reserve(s.size());
  for (std::size_t layer = 0; layer < s.num_layers(); ++layer) {
    const auto bits = s.layer(layer);
    const AffineMap& m = maps[layer];
    for (std::size_t j = 0; j < bits.size(); ++j) {
      const auto row = static_cast<Eigen::Index>(j);
      const Vector w = m.M.row(row).transpose();
      const double off = m.v[row];
      if (bits[j]) {
        // w·x + off > 0
        out.push_back({-w, off, true, NeuronTag{layer, j, true}});
      } else {
        // w·x + off <= 0
        out.push_back({w, -off, false, NeuronTag{layer, j, false}});
      }
    }
  }
  return out;
}

/// Region of `s`: one row per hidden neuron, then the domain box.
inline Polytope region_hrep(const Network& net, const ActivationSignature& s) {
  const auto maps = effective_preactivation_maps(net, s);
  Polytope p;
  p.dim = net.input_dim();
  p.constraints = neuron_constraints(maps, s);
  for (auto& c : box_constraints(net.input_bounds())) p.constraints.push_back(std::move(c));
  p.signature = s;
  p.box = net.input_bounds();
  return p;
}

/// Strict rows g_c·x + v_c > g_j·x + v_j for every j != c, in j order.
inline std::vector<LinearConstraint> class_dominance_constraints(const AffineMap& output, std::size_t c) {
  const auto k = static_cast<std::size_t>(output.M.rows());
  if (c >= k) throw InvalidClassError("class index " + std::to_string(c) + " out of range");
  std::vector<LinearConstraint> out;
  const auto ci = static_cast<Eigen::Index>(c);
  for (std::size_t j = 0; j < k; ++j) {
    if (j == c) continue;
    const auto ji = static_cast<Eigen::Index>(j);
    Vector a = (output.M.row(ji) - output.M.row(ci)).transpose();
    out.push_back({std::move(a), output.v[ci] - output.v[ji], true, OutputPairTag{c, j}});
  }
  return out;
}

inline std::vector<LinearConstraint> class_dominance_constraints(const Network& net, const ActivationSignature& s,
                                                                 std::size_t c) {
  net.check_class(c);
  return class_dominance_constraints(effective_preactivation_maps(net, s).back(), c);
}

/// Inserts `extra` after the neuron/output rows and before any box rows.
inline Polytope with_constraints(const Polytope& p, const std::vector<LinearConstraint>& extra) {
  Polytope out = p;
  out.constraints.clear();
  for (const auto& c : p.constraints) {
    if (!c.is_box()) out.constraints.push_back(c);
  }
  for (const auto& c : extra) out.constraints.push_back(c);
  for (const auto& c : p.constraints) {
    if (c.is_box()) out.constraints.push_back(c);
  }
  return out;
}

/// Points of the region of `s` where class `c` wins.
inline Polytope output_polytope(const Network& net, const ActivationSignature& s, std::size_t c) {
  net.check_class(c);
  const auto maps = effective_preactivation_maps(net, s);
  return with_constraints(region_hrep(net, s), class_dominance_constraints(maps.back(), c));
}

/// Interior-margin test of the polytope (box included). Degenerate rows are
/// decided arithmetically and never reach the LP.
inline lp::MarginOutcome open_feasibility(const Polytope& p) {
  std::vector<const LinearConstraint*> rows;
  for (const auto& c : p.constraints) {
    if (c.is_box()) continue;
    if (c.degenerate()) {
      if (!c.degenerate_holds()) return {};
      continue;
    }
    rows.push_back(&c);
  }
  Matrix A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p.dim));
  Vector b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    A.row(static_cast<Eigen::Index>(i)) = rows[i]->a.transpose();
    b[static_cast<Eigen::Index>(i)] = rows[i]->b;
  }
  return lp::interior_margin(A, b, p.box);
}

// ---------------------------------------------------------------------------
// Redundancy removal.

struct RemovalCertificate {
  std::size_t index = 0;  // position in the input polytope
  /// max a_i·x over the other retained rows; NaN for degenerate rows decided
  /// without an LP.
  double lp_value = std::numeric_limits<double>::quiet_NaN();
  double bound = 0.0;
};

struct RedundancyResult {
  Polytope reduced;
  std::vector<std::size_t> kept;  // positions in the input polytope
  std::vector<RemovalCertificate> removed;
  std::size_t lp_count = 0;
  /// An LP found the retained system empty; `reduced` is the input unchanged.
  bool infeasible = false;
};

/// Scans constraints in order, dropping each one the remaining retained rows
/// (plus the box) already imply. One LP per non-degenerate constraint.
///
/// Emptiness is not visible from those LPs alone, so without `member` (a
/// point of the closed polytope) one extra LP checks feasibility first.
inline RedundancyResult remove_redundant(const Polytope& p, const std::optional<Vector>& member = std::nullopt) {
  const std::size_t m = p.constraints.size();
  std::vector<bool> retained(m, true);
  RedundancyResult res;

  auto as_is = [&] {
    res.infeasible = true;
    res.reduced = p;
    res.kept.resize(m);
    std::iota(res.kept.begin(), res.kept.end(), std::size_t{0});
    res.removed.clear();
    return res;
  };

  if (!member || !p.contains(*member, kRedundancyTol)) {
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < m; ++k) {
      const auto& c = p.constraints[k];
      if (c.is_box()) continue;
      if (c.degenerate()) {
        if (!c.degenerate_holds()) return as_is();
        continue;
      }
      rows.push_back(k);
    }
    lp::Problem prob;
    prob.objective = Vector::Zero(static_cast<Eigen::Index>(p.dim));
    prob.box = p.box;
    prob.A.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p.dim));
    prob.b.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      prob.A.row(static_cast<Eigen::Index>(r)) = p.constraints[rows[r]].a.transpose();
      prob.b[static_cast<Eigen::Index>(r)] = p.constraints[rows[r]].b;
    }
    ++res.lp_count;
    if (lp::solve(prob).status == lp::Status::kInfeasible) return as_is();
  }

  for (std::size_t i = 0; i < m; ++i) {
    const auto& ci = p.constraints[i];
    if (ci.degenerate()) {
      if (!ci.degenerate_holds()) return as_is();
      retained[i] = false;
      res.removed.push_back({i, std::numeric_limits<double>::quiet_NaN(), ci.b});
      continue;
    }

    lp::Problem prob;
    prob.objective = ci.a;
    prob.box = p.box;
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == i || !retained[k] || p.constraints[k].is_box() || p.constraints[k].degenerate()) continue;
      rows.push_back(k);
    }
    prob.A.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p.dim));
    prob.b.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      prob.A.row(static_cast<Eigen::Index>(r)) = p.constraints[rows[r]].a.transpose();
      prob.b[static_cast<Eigen::Index>(r)] = p.constraints[rows[r]].b;
    }

    const lp::Outcome out = lp::solve(prob);
    ++res.lp_count;
    if (out.status == lp::Status::kInfeasible) return as_is();
    if (out.optimal() && out.value <= ci.b + kRedundancyTol) {
      retained[i] = false;
      res.removed.push_back({i, out.value, ci.b});
    }
  }

  res.reduced = p;
  res.reduced.constraints.clear();
  for (std::size_t i = 0; i < m; ++i) {
    if (retained[i]) {
      res.reduced.constraints.push_back(p.constraints[i]);
      res.kept.push_back(i);
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Vertex enumeration.

/// Vertices of the polytope intersected with its box, by solving every
/// dim-subset of boundary equalities. Exponential in dim; guarded by `dim_cap`.
inline VRepresentation enumerate_vertices(const Polytope& p, std::size_t dim_cap = kDefaultVertexDimCap) {
  if (p.dim > dim_cap) {
    throw CapExceededError("vertex enumeration limited to " + std::to_string(dim_cap) + " dimensions, got " +
                           std::to_string(p.dim));
  }
  std::vector<LinearConstraint> rows;
  for (const auto& c : p.constraints) {
    if (c.is_box()) continue;
    if (c.degenerate()) {
      if (!c.degenerate_holds()) return {};
      continue;
    }
    rows.push_back(c);
  }
  for (auto& c : box_constraints(p.box)) rows.push_back(std::move(c));

  const std::size_t dim = p.dim;
  const auto di = static_cast<Eigen::Index>(dim);
  VRepresentation out;
  if (rows.size() < dim) return out;

  auto idx = first_combination(dim);
  Matrix A(di, di);
  Vector b(di);
  do {
    for (std::size_t k = 0; k < dim; ++k) {
      A.row(static_cast<Eigen::Index>(k)) = rows[idx[k]].a.transpose();
      b[static_cast<Eigen::Index>(k)] = rows[idx[k]].b;
    }
    Eigen::FullPivLU<Matrix> lu(A);
    if (lu.rank() < di) continue;
    const Vector x = lu.solve(b);
    if (!x.allFinite()) continue;
    bool ok = true;
    for (const auto& r : rows) {
      if (r.slack(x) < -kVertexTol) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    const bool dup = std::any_of(out.vertices.begin(), out.vertices.end(), [&](const Vector& v) {
      return (v - x).cwiseAbs().maxCoeff() <= kVertexTol;
    });
    if (!dup) out.vertices.push_back(x);
  } while (next_combination(idx, rows.size()));

  std::sort(out.vertices.begin(), out.vertices.end(), [](const Vector& a, const Vector& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  return out;
}

/// Counterclockwise order around the centroid (2-D only).
inline std::vector<Vector> order_counterclockwise(std::vector<Vector> pts) {
  if (pts.empty()) return pts;
  Vector centre = Vector::Zero(pts.front().size());
  for (const auto& p : pts) centre += p;
  centre /= static_cast<double>(pts.size());
  std::stable_sort(pts.begin(), pts.end(), [&](const Vector& a, const Vector& b) {
    return std::atan2(a[1] - centre[1], a[0] - centre[0]) < std::atan2(b[1] - centre[1], b[0] - centre[0]);
  });
  return pts;
}

}  // namespace polyex
