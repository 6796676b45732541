#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lurk/rational.hpp"

namespace lurk {

/// Base-dimension label sets.
namespace base_dimensions {
std::vector<std::string> mlt();
/// Full SI set: mass, length, time, current, temperature, amount, luminosity.
std::vector<std::string> si();
} // namespace base_dimensions

/// Exponents of a single quantity over a labelled set of base dimensions.
struct DimVector {
  RationalVector exponents;
  std::vector<std::string> basis;

  DimVector() = default;
  DimVector(RationalVector exps, std::vector<std::string> labels);

  [[nodiscard]] Eigen::Index size() const { return exponents.size(); }
  [[nodiscard]] bool is_dimensionless() const;
  [[nodiscard]] std::string str() const;
};

/// Dimension matrix: column j holds the base-dimension exponents of variable j.
class DimMatrix {
public:
  DimMatrix() = default;
  /// An empty (d x 0) matrix over `basis`.
  explicit DimMatrix(std::vector<std::string> basis);
  DimMatrix(RationalMatrix exponents, std::vector<std::string> basis,
            std::vector<std::string> variable_names);

  [[nodiscard]] const RationalMatrix& exponents() const { return exps_; }
  [[nodiscard]] const std::vector<std::string>& basis() const { return basis_; }
  [[nodiscard]] const std::vector<std::string>& variable_names() const { return names_; }
  [[nodiscard]] Eigen::Index dims() const { return exps_.rows(); }
  [[nodiscard]] Eigen::Index vars() const { return exps_.cols(); }

  [[nodiscard]] DimVector column(Eigen::Index j) const;
  [[nodiscard]] Eigen::Index index_of(std::string_view name) const;
  [[nodiscard]] DimMatrix select(const std::vector<Eigen::Index>& columns) const;
  [[nodiscard]] DimMatrix select(const std::vector<std::string>& names) const;
  [[nodiscard]] Eigen::MatrixXd to_double() const { return lurk::to_double(exps_); }

  void append(std::string name, const DimVector& column);

private:
  RationalMatrix exps_{RationalMatrix(0, 0)};
  std::vector<std::string> basis_;
  std::vector<std::string> names_;
};

struct HomogeneityVerdict {
  bool homogeneous = true;
  /// Base dimensions the qoi carries but no exposed variable does.
  std::vector<std::string> missing_dimensions;
};

// ---------------------------------------------------------------------------
// Row reduction, generic over the scalar type.
//
// For `Rational` every zero test is exact and the pivot is the first nonzero
// entry in declared row order. For floating types the pivot is the largest
// magnitude entry and values below `tol` count as zero.

template <typename Scalar>
struct Echelon {
  MatrixX<Scalar> reduced;
  std::vector<Eigen::Index> pivot_columns;

  [[nodiscard]] Eigen::Index rank() const {
    return static_cast<Eigen::Index>(pivot_columns.size());
  }
};

namespace detail {

template <typename Scalar>
bool is_zero(const Scalar& x, double tol) {
  if constexpr (std::is_floating_point_v<Scalar>) {
    return std::abs(x) <= tol;
  } else {
    (void)tol;
    return x == Scalar(0);
  }
}

} // namespace detail

template <typename Derived>
Echelon<typename Derived::Scalar> row_echelon(const Eigen::MatrixBase<Derived>& a,
                                              double tol = 1e-12) {
  using Scalar = typename Derived::Scalar;
  using Eigen::Index;
  Echelon<Scalar> out{a.eval(), {}};
  auto& m = out.reduced;
  Index row = 0;
  for (Index col = 0; col < m.cols() && row < m.rows(); ++col) {
    Index pivot = -1;
    if constexpr (std::is_floating_point_v<Scalar>) {
      Scalar best = Scalar(0);
      for (Index r = row; r < m.rows(); ++r) {
        if (std::abs(m(r, col)) > best) {
          best = std::abs(m(r, col));
          pivot = r;
        }
      }
      if (best <= tol) pivot = -1;
    } else {
      for (Index r = row; r < m.rows(); ++r) {
        if (!detail::is_zero(m(r, col), tol)) {
          pivot = r;
          break;
        }
      }
    }
    if (pivot < 0) continue;
    if (pivot != row) m.row(pivot).swap(m.row(row));
    const Scalar lead = m(row, col);
    for (Index c = col; c < m.cols(); ++c) m(row, c) /= lead;
    for (Index r = 0; r < m.rows(); ++r) {
      if (r == row || detail::is_zero(m(r, col), 0.0)) continue;
      const Scalar factor = m(r, col);
      for (Index c = col; c < m.cols(); ++c) m(r, c) -= factor * m(row, c);
    }
    out.pivot_columns.push_back(col);
    ++row;
  }
  return out;
}

template <typename Derived>
Eigen::Index rank(const Eigen::MatrixBase<Derived>& a, double tol = 1e-12) {
  return row_echelon(a, tol).rank();
}

/// Columns span the nullspace of `a`; one column per free variable, with the
/// free variable set to 1 and the other free variables set to 0.
template <typename Derived>
MatrixX<typename Derived::Scalar> nullspace(const Eigen::MatrixBase<Derived>& a,
                                            double tol = 1e-12) {
  using Scalar = typename Derived::Scalar;
  using Eigen::Index;
  const auto ech = row_echelon(a, tol);
  std::vector<bool> is_pivot(static_cast<std::size_t>(a.cols()), false);
  for (Index c : ech.pivot_columns) is_pivot[static_cast<std::size_t>(c)] = true;
  MatrixX<Scalar> basis = MatrixX<Scalar>::Zero(a.cols(), a.cols() - ech.rank());
  Index k = 0;
  for (Index f = 0; f < a.cols(); ++f) {
    if (is_pivot[static_cast<std::size_t>(f)]) continue;
    basis(f, k) = Scalar(1);
    for (Index i = 0; i < ech.rank(); ++i) {
      basis(ech.pivot_columns[static_cast<std::size_t>(i)], k) = -ech.reduced(i, f);
    }
    ++k;
  }
  return basis;
}

// ---------------------------------------------------------------------------
// Dimensional analysis proper.

Eigen::Index rank(const DimMatrix& d);

/// p - rank(d) exact nullspace vectors (the pi subspace), in free-column order.
std::vector<RationalVector> nullspace_basis(const DimMatrix& d);

/// Whether `dq` lies in the column space of `d_ex`.
HomogeneityVerdict check_homogeneity(const DimMatrix& d_ex, const DimVector& dq);

/// The unique u with d_ex * u = dq that is orthogonal to the nullspace of d_ex.
/// Throws NotHomogeneous when no solution exists.
RationalVector nondim_vector(const DimMatrix& d_ex, const DimVector& dq);

/// Solves the stacked system [d_ex; V^T] u = [dq; 0] for a caller-chosen
/// nullspace basis V (columns). Any basis of the nullspace yields the same u.
RationalVector nondim_vector(const DimMatrix& d_ex, const DimVector& dq,
                             const RationalMatrix& nullspace_columns);

/// Orthonormal basis W (d x (d - rank)) of the orthogonal complement of the
/// column space of `d_pin`. The identity when there are no pinned variables.
/// Throws FullRankPinned when the pinned variables span every base dimension.
Eigen::MatrixXd pinned_complement(const DimMatrix& d_pin);

} // namespace lurk
