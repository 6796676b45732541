#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "lurk/dimensions.hpp"

namespace lurk::testing {

inline RationalMatrix rmat(std::initializer_list<std::initializer_list<int>> rows) {
  RationalMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (int v : row) m(i, j++) = Rational(v);
    ++i;
  }
  return m;
}

inline RationalVector rvec(std::initializer_list<Rational> values) {
  RationalVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const auto& x : values) v(i++) = x;
  return v;
}

inline DimVector mlt_vec(std::initializer_list<Rational> values) {
  return DimVector(rvec(values), base_dimensions::mlt());
}

inline DimMatrix mlt_matrix(RationalMatrix m, std::vector<std::string> names) {
  return DimMatrix(std::move(m), base_dimensions::mlt(), std::move(names));
}

/// The 3x5 rough-pipe dimension matrix in (rho_F, U_F, d_P, mu_F, eps_P) order.
inline DimMatrix pipe_matrix() {
  return mlt_matrix(rmat({{1, 0, 0, 1, 0}, {-3, 1, 1, -1, 1}, {0, -1, 0, -1, 0}}),
                    {"rho_F", "U_F", "d_P", "mu_F", "eps_P"});
}

/// True when the columns of `a` and `b` span the same rational subspace.
inline bool same_span(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.rows() != b.rows()) return false;
  RationalMatrix both(a.rows(), a.cols() + b.cols());
  both << a, b;
  const auto r = rank(both);
  return r == rank(a) && r == rank(b);
}

inline RationalMatrix as_columns(const std::vector<RationalVector>& vectors, Eigen::Index rows) {
  RationalMatrix m(rows, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = vectors[k];
  return m;
}

} // namespace lurk::testing
