#pragma once

#include <cstdint>
#include <random>

#include "qsl/numerics.hpp"

namespace qsl::testing {

inline CMatrix random_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

inline CMatrix random_hermitian(int dim, std::mt19937_64& rng, double scale = 1.0) {
  const CMatrix a = random_complex(dim, dim, rng);
  return scale * 0.5 * (a + a.adjoint());
}

inline RMatrix random_symmetric(int dim, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n;
  RMatrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = n(rng);
  return scale * 0.5 * (a + a.transpose());
}

inline CMatrix random_unitary(int dim, std::mt19937_64& rng) {
  Eigen::HouseholderQR<CMatrix> qr(random_complex(dim, dim, rng));
  return qr.householderQ();
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// exp(-i dt H) by scaling and squaring of a truncated Taylor series; shares
// no code with the eigendecomposition route.
inline CMatrix taylor_exp(const CMatrix& h, double dt) {
  const CMatrix a = Complex(0.0, -dt) * h;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::ldexp(1.0, squarings) > 0.1) ++squarings;
  const CMatrix s = a / std::ldexp(1.0, squarings);
  CMatrix term = CMatrix::Identity(h.rows(), h.cols());
  CMatrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * s / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace qsl::testing
