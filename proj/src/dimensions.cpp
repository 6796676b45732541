#include "lurk/dimensions.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/QR>

#include "lurk/errors.hpp"

namespace lurk {

namespace base_dimensions {
std::vector<std::string> mlt() { return {"M", "L", "T"}; }
std::vector<std::string> si() { return {"M", "L", "T", "I", "Theta", "N", "J"}; }
} // namespace base_dimensions

namespace {

void require_same_basis(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a != b) throw DimensionMismatch("base-dimension labels differ");
}

} // namespace

DimVector::DimVector(RationalVector exps, std::vector<std::string> labels)
    : exponents(std::move(exps)), basis(std::move(labels)) {
  if (static_cast<std::size_t>(exponents.size()) != basis.size()) {
    throw DimensionMismatch("dimension vector has " + std::to_string(exponents.size()) +
                            " exponents for " + std::to_string(basis.size()) + " base dimensions");
  }
}

bool DimVector::is_dimensionless() const {
  return std::all_of(exponents.begin(), exponents.end(),
                     [](const Rational& r) { return r.is_zero(); });
}

std::string DimVector::str() const {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < exponents.size(); ++i) {
    if (i > 0) os << ", ";
    os << exponents(i);
  }
  os << ')';
  return os.str();
}

DimMatrix::DimMatrix(std::vector<std::string> basis)
    : exps_(RationalMatrix(static_cast<Eigen::Index>(basis.size()), 0)), basis_(std::move(basis)) {}

DimMatrix::DimMatrix(RationalMatrix exponents, std::vector<std::string> basis,
                     std::vector<std::string> variable_names)
    : exps_(std::move(exponents)), basis_(std::move(basis)), names_(std::move(variable_names)) {
  if (static_cast<std::size_t>(exps_.rows()) != basis_.size()) {
    throw DimensionMismatch("dimension matrix rows do not match base-dimension count");
  }
  if (static_cast<std::size_t>(exps_.cols()) != names_.size()) {
    throw DimensionMismatch("dimension matrix columns do not match variable count");
  }
}

DimVector DimMatrix::column(Eigen::Index j) const { return DimVector(exps_.col(j), basis_); }

Eigen::Index DimMatrix::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DimensionMismatch("unknown variable '" + std::string(name) + "'");
  return static_cast<Eigen::Index>(it - names_.begin());
}

DimMatrix DimMatrix::select(const std::vector<Eigen::Index>& columns) const {
  RationalMatrix sub(dims(), static_cast<Eigen::Index>(columns.size()));
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto j = columns[k];
    if (j < 0 || j >= vars()) throw DimensionMismatch("column index out of range");
    sub.col(static_cast<Eigen::Index>(k)) = exps_.col(j);
    names.push_back(names_[static_cast<std::size_t>(j)]);
  }
  return DimMatrix(std::move(sub), basis_, std::move(names));
}

DimMatrix DimMatrix::select(const std::vector<std::string>& names) const {
  std::vector<Eigen::Index> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(index_of(n));
  return select(idx);
}

void DimMatrix::append(std::string name, const DimVector& column) {
  require_same_basis(basis_, column.basis);
  RationalMatrix grown(dims(), vars() + 1);
  grown.leftCols(vars()) = exps_;
  grown.col(vars()) = column.exponents;
  exps_ = std::move(grown);
  names_.push_back(std::move(name));
}

Eigen::Index rank(const DimMatrix& d) { return rank(d.exponents()); }

std::vector<RationalVector> nullspace_basis(const DimMatrix& d) {
  const RationalMatrix v = nullspace(d.exponents());
  std::vector<RationalVector> out;
  out.reserve(static_cast<std::size_t>(v.cols()));
  for (Eigen::Index k = 0; k < v.cols(); ++k) out.emplace_back(v.col(k));
  return out;
}

HomogeneityVerdict check_homogeneity(const DimMatrix& d_ex, const DimVector& dq) {
  require_same_basis(d_ex.basis(), dq.basis);
  RationalMatrix augmented(d_ex.dims(), d_ex.vars() + 1);
  augmented.leftCols(d_ex.vars()) = d_ex.exponents();
  augmented.col(d_ex.vars()) = dq.exponents;

  HomogeneityVerdict verdict;
  verdict.homogeneous = rank(augmented) == rank(d_ex.exponents());
  if (!verdict.homogeneous) {
    for (Eigen::Index i = 0; i < d_ex.dims(); ++i) {
      const bool row_empty = std::all_of(d_ex.exponents().row(i).begin(),
                                         d_ex.exponents().row(i).end(),
                                         [](const Rational& r) { return r.is_zero(); });
      if (row_empty && !dq.exponents(i).is_zero()) {
        verdict.missing_dimensions.push_back(d_ex.basis()[static_cast<std::size_t>(i)]);
      }
    }
  }
  return verdict;
}

RationalVector nondim_vector(const DimMatrix& d_ex, const DimVector& dq) {
  return nondim_vector(d_ex, dq, nullspace(d_ex.exponents()));
}

RationalVector nondim_vector(const DimMatrix& d_ex, const DimVector& dq,
                             const RationalMatrix& nullspace_columns) {
  require_same_basis(d_ex.basis(), dq.basis);
  const auto& d = d_ex.exponents();
  const Eigen::Index p = d_ex.vars();
  const Eigen::Index k = nullspace_columns.cols();
  if (nullspace_columns.rows() != p) {
    throw DimensionMismatch("nullspace basis has wrong row count");
  }
  if (!(d * nullspace_columns).isZero() || rank(nullspace_columns) != k ||
      k != p - rank(d)) {
    throw DimensionMismatch("supplied vectors are not a basis of the nullspace");
  }

  // [D; V^T | dq; 0]
  RationalMatrix system = RationalMatrix::Zero(d.rows() + k, p + 1);
  system.topLeftCorner(d.rows(), p) = d;
  system.bottomLeftCorner(k, p) = nullspace_columns.transpose();
  system.topRightCorner(d.rows(), 1) = dq.exponents;

  const auto ech = row_echelon(system);
  // A pivot in the right-hand column means the system is inconsistent.
  if (!ech.pivot_columns.empty() && ech.pivot_columns.back() == p) {
    throw NotHomogeneous("qoi dimensions " + dq.str() +
                         " are not reachable from the exposed variables");
  }
  RationalVector u(p);
  for (Eigen::Index i = 0; i < p; ++i) u(i) = ech.reduced(i, p);
  return u;
}

Eigen::MatrixXd pinned_complement(const DimMatrix& d_pin) {
  const Eigen::Index d = d_pin.dims();
  if (d_pin.vars() == 0) return Eigen::MatrixXd::Identity(d, d);

  const auto ech = row_echelon(d_pin.exponents());
  const Eigen::Index r = ech.rank();
  if (r == d) {
    throw FullRankPinned("pinned variables span all " + std::to_string(d) +
                         " base dimensions; lurking variables cannot be detected");
  }

  // QR of [independent pinned columns | I]: the trailing Q columns are
  // orthonormal and orthogonal to the pinned column space.
  Eigen::MatrixXd a(d, r + d);
  for (Eigen::Index i = 0; i < r; ++i) {
    a.col(i) = to_double(d_pin.exponents().col(ech.pivot_columns[static_cast<std::size_t>(i)]));
  }
  a.rightCols(d) = Eigen::MatrixXd::Identity(d, d);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd w = q.rightCols(d - r);

  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    Eigen::Index lead = 0;
    w.col(c).cwiseAbs().maxCoeff(&lead);
    if (w(lead, c) < 0) w.col(c) = -w.col(c);
  }
  return w;
}

} // namespace lurk
