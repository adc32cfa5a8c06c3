#pragma once

// Small dense linear programs over a bounded box.
//
// Two-phase tableau simplex with Bland's rule. Every problem carries a box on
// its variables; the box is appended as explicit rows, so Unbounded can only
// come back if the box itself is malformed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "polyex/errors.hpp"
#include "polyex/model.hpp"

namespace polyex::lp {

inline constexpr double kFeasibilityTol = 1e-7;
inline constexpr double kStrictMargin = 1e-7;
/// Rows whose coefficients are all below this magnitude are constant rows.
inline constexpr double kZeroRowTol = 1e-12;

/// maximize objective·x  s.t.  A x <= b,  box.lo <= x <= box.hi
struct Problem {
  Vector objective;
  Matrix A;
  Vector b;
  Box box;
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Outcome {
  Status status = Status::kInfeasible;
  Vector x;
  double value = 0.0;

  bool optimal() const { return status == Status::kOptimal; }
};

/// Number of `solve` calls made on this thread. Used to assert LP budgets.
inline std::uint64_t& solve_calls() {
  thread_local std::uint64_t calls = 0;
  return calls;
}

/// Counts solves made on this thread while alive.
class SolveCounter {
 public:
  SolveCounter() : start_(solve_calls()) {}
  std::uint64_t count() const { return solve_calls() - start_; }

 private:
  std::uint64_t start_;
};

namespace detail {

inline bool is_zero_row(const Matrix& A, Eigen::Index i) {
  return A.cols() == 0 || A.row(i).cwiseAbs().maxCoeff() <= kZeroRowTol;
}

class Tableau {
 public:
  // Standard form: maximize c·y, M y <= r, y >= 0.
  Tableau(const Matrix& M, const Vector& r) : rows_(M.rows()), structural_(M.cols()) {
    std::size_t artificial = 0;
    for (Eigen::Index i = 0; i < rows_; ++i) artificial += r[i] < 0.0 ? 1 : 0;
    first_art_ = structural_ + rows_;
    cols_ = first_art_ + static_cast<Eigen::Index>(artificial);
    T_ = Matrix::Zero(rows_ + 1, cols_ + 1);
    basis_.assign(static_cast<std::size_t>(rows_), 0);

    Eigen::Index next_art = first_art_;
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double sign = r[i] < 0.0 ? -1.0 : 1.0;
      T_.row(i).head(structural_) = sign * M.row(i);
      T_(i, structural_ + i) = sign;
      T_(i, cols_) = sign * r[i];
      if (r[i] < 0.0) {
        T_(i, next_art) = 1.0;
        basis_[static_cast<std::size_t>(i)] = next_art++;
      } else {
        basis_[static_cast<std::size_t>(i)] = structural_ + i;
      }
    }
  }

  bool has_artificials() const { return cols_ > first_art_; }

  // Returns the minimum total artificial value (0 when feasible).
  double phase_one() {
    T_.row(rows_).setZero();
    for (Eigen::Index j = first_art_; j < cols_; ++j) T_(rows_, j) = 1.0;
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] >= first_art_) T_.row(rows_) -= T_.row(i);
    }
    run(cols_);
    const double infeasibility = -T_(rows_, cols_);
    // Pivot remaining zero-valued artificials out of the basis where possible.
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < first_art_) continue;
      for (Eigen::Index j = 0; j < first_art_; ++j) {
        if (std::abs(T_(i, j)) > kPivotTol) {
          pivot(i, j);
          break;
        }
      }
    }
    return infeasibility;
  }

  // Returns false when unbounded.
  bool phase_two(const Vector& c) {
    T_.row(rows_).setZero();
    T_.row(rows_).head(structural_) = -c.transpose();
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const auto bj = basis_[static_cast<std::size_t>(i)];
      if (bj < structural_ && c[bj] != 0.0) T_.row(rows_) += c[bj] * T_.row(i);
    }
    return run(first_art_);
  }

  Vector solution() const {
    Vector y = Vector::Zero(structural_);
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const auto bj = basis_[static_cast<std::size_t>(i)];
      if (bj < structural_) y[bj] = T_(i, cols_);
    }
    return y;
  }

 private:
  static constexpr double kPivotTol = 1e-11;
  static constexpr double kCostTol = 1e-11;
  static constexpr double kRatioTieTol = 1e-14;
  static constexpr int kMaxIterations = 200000;

  // Bland's rule: lowest-index improving column, lowest-index leaving variable
  // among ratio ties. Columns at or past `col_limit` never enter.
  bool run(Eigen::Index col_limit) {
    for (int iter = 0; iter < kMaxIterations; ++iter) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < col_limit; ++j) {
        if (T_(rows_, j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;

      Eigen::Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows_; ++i) {
        const double coef = T_(i, enter);
        if (coef <= kPivotTol) continue;
        const double ratio = std::max(T_(i, cols_), 0.0) / coef;
        if (leave < 0 || ratio < best_ratio - kRatioTieTol) {
          best_ratio = ratio;
          leave = i;
        } else if (ratio <= best_ratio + kRatioTieTol &&
                   basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]) {
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw Error("simplex iteration limit reached");
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    T_.row(row) /= T_(row, col);
    for (Eigen::Index i = 0; i <= rows_; ++i) {
      if (i == row) continue;
      const double f = T_(i, col);
      if (f != 0.0) T_.row(i) -= f * T_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  Eigen::Index rows_;
  Eigen::Index structural_;
  Eigen::Index first_art_ = 0;
  Eigen::Index cols_ = 0;
  Matrix T_;
  std::vector<Eigen::Index> basis_;
};

inline void check_box(const Box& box) {
  for (const auto& iv : box) {
    if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
      throw DomainError("LP box must satisfy lo < hi with finite ends");
    }
  }
}

}  // namespace detail

inline void check_problem(const Problem& p) {
  const auto dim = static_cast<Eigen::Index>(p.box.size());
  if (dim < 1) throw DimensionError("LP needs at least one variable");
  if (p.objective.size() != dim) throw DimensionError("objective length does not match the box");
  if (p.A.rows() > 0 && p.A.cols() != dim) throw DimensionError("constraint matrix width does not match the box");
  if (p.A.rows() != p.b.size()) throw DimensionError("constraint matrix and bound vector disagree");
  detail::check_box(p.box);
}

inline Outcome solve(const Problem& p) {
  check_problem(p);
  ++solve_calls();

  const auto dim = static_cast<Eigen::Index>(p.box.size());
  Vector lo(dim), width(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    lo[j] = p.box[static_cast<std::size_t>(j)].lo;
    width[j] = p.box[static_cast<std::size_t>(j)].width();
  }

  // Constant rows are decided directly.
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < p.A.rows(); ++i) {
    if (detail::is_zero_row(p.A, i)) {
      if (p.b[i] < -kFeasibilityTol) return {Status::kInfeasible, {}, 0.0};
      continue;
    }
    kept.push_back(i);
  }

  // Shift to y = x - lo >= 0 and append y <= width.
  const auto m = static_cast<Eigen::Index>(kept.size());
  Matrix M = Matrix::Zero(m + dim, dim);
  Vector r(m + dim);
  for (Eigen::Index k = 0; k < m; ++k) {
    M.row(k) = p.A.row(kept[static_cast<std::size_t>(k)]);
    r[k] = p.b[kept[static_cast<std::size_t>(k)]] - p.A.row(kept[static_cast<std::size_t>(k)]).dot(lo);
  }
  for (Eigen::Index j = 0; j < dim; ++j) {
    M(m + j, j) = 1.0;
    r[m + j] = width[j];
  }

  detail::Tableau tab(M, r);
  if (tab.has_artificials() && tab.phase_one() > kFeasibilityTol) {
    return {Status::kInfeasible, {}, 0.0};
  }
  if (!tab.phase_two(p.objective)) return {Status::kUnbounded, {}, 0.0};

  Vector x = lo + tab.solution();
  for (Eigen::Index j = 0; j < dim; ++j) {
    x[j] = std::clamp(x[j], p.box[static_cast<std::size_t>(j)].lo, p.box[static_cast<std::size_t>(j)].hi);
  }
  return {Status::kOptimal, x, p.objective.dot(x)};
}

struct MarginOutcome {
  bool feasible = false;
  double margin = 0.0;
  Vector witness;

  /// The system admits a point with every row slack above the strict margin.
  bool open() const { return feasible && margin > kStrictMargin; }
};

/// Largest t such that some x in the box satisfies every row of A x <= b and
/// every box face with slack t, rows measured in Euclidean distance. The
/// witness is the corresponding Chebyshev centre.
inline MarginOutcome interior_margin(const Matrix& A, const Vector& b, const Box& box) {
  const auto dim = static_cast<Eigen::Index>(box.size());
  if (dim < 1) throw DimensionError("margin LP needs at least one variable");
  if (A.rows() > 0 && A.cols() != dim) throw DimensionError("constraint matrix width does not match the box");
  if (A.rows() != b.size()) throw DimensionError("constraint matrix and bound vector disagree");
  detail::check_box(box);

  std::vector<Eigen::Index> kept;
  double max_rhs = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (detail::is_zero_row(A, i)) {
      if (b[i] < -kFeasibilityTol) return {};
      continue;
    }
    kept.push_back(i);
    max_rhs = std::max(max_rhs, std::abs(b[i]) / A.row(i).norm());
  }

  double diameter_sq = 0.0;
  double radius_sq = 0.0;
  for (const auto& iv : box) {
    diameter_sq += iv.width() * iv.width();
    radius_sq += std::max(iv.lo * iv.lo, iv.hi * iv.hi);
  }
  const double diameter = std::sqrt(diameter_sq);
  // Low enough that the auxiliary program is always feasible.
  const double t_floor = -(max_rhs + std::sqrt(radius_sq) + diameter + 1.0);

  const auto m = static_cast<Eigen::Index>(kept.size());
  Problem aux;
  aux.A = Matrix::Zero(m + 2 * dim, dim + 1);
  aux.b = Vector(m + 2 * dim);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = kept[static_cast<std::size_t>(k)];
    const double norm = A.row(i).norm();
    aux.A.row(k).head(dim) = A.row(i) / norm;
    aux.A(k, dim) = 1.0;
    aux.b[k] = b[i] / norm;
  }
  for (Eigen::Index j = 0; j < dim; ++j) {
    const auto& iv = box[static_cast<std::size_t>(j)];
    aux.A(m + 2 * j, j) = 1.0;
    aux.A(m + 2 * j, dim) = 1.0;
    aux.b[m + 2 * j] = iv.hi;
    aux.A(m + 2 * j + 1, j) = -1.0;
    aux.A(m + 2 * j + 1, dim) = 1.0;
    aux.b[m + 2 * j + 1] = -iv.lo;
  }
  aux.objective = Vector::Zero(dim + 1);
  aux.objective[dim] = 1.0;
  aux.box = box;
  aux.box.push_back({t_floor, diameter});

  const Outcome out = solve(aux);
  if (!out.optimal() || out.value < -kFeasibilityTol) return {};
  return {true, out.value, out.x.head(dim)};
}

}  // namespace polyex::lp
