#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qsl {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

/// Raised when an iterative numerical procedure produces non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest elementwise |H - H^dagger|.
double hermitian_defect(const CMatrix& h);

/// True when every imaginary part is exactly zero.
bool is_real(const CMatrix& m);

struct EigenSystem {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // columns, first nonzero component real positive
};

/// Eigendecomposition of a Hermitian matrix. Throws std::invalid_argument when
/// the input deviates from Hermitian by more than `tol` (the message carries
/// the measured defect).
EigenSystem herm_eigendecompose(const CMatrix& h, double tol = 1e-12);

/// exp(-i dt H) for Hermitian H.
CMatrix propagator_exp(const CMatrix& h, double dt, double tol = 1e-12);

/// Cached spectral form of exp(-i dt H). All Hamiltonians built by this library
/// are real symmetric, so a real eigenbasis is used whenever the input allows
/// it; complex Hermitian input falls back to a complex basis.
class SpectralExp {
 public:
  SpectralExp() = default;
  SpectralExp(const CMatrix& h, double dt);
  /// Real symmetric generator; no Hermitian check.
  SpectralExp(const RMatrix& h, double dt);

  Eigen::Index dim() const { return values_.size(); }
  double dt() const { return dt_; }
  const RVector& eigenvalues() const { return values_; }

  /// block <- U * block
  void apply(CMatrix& block) const;
  /// block <- U^dagger * block
  void apply_adjoint(CMatrix& block) const;
  CMatrix dense() const;

  /// Eigenbasis change: returns V^dagger * block.
  CMatrix to_eigenbasis(const CMatrix& block) const;
  /// Returns V * block.
  CMatrix from_eigenbasis(const CMatrix& block) const;
  /// V^dagger A V for a (generally Hermitian) operator A.
  CMatrix rotate(const CMatrix& a) const;

  bool real_basis() const { return real_; }
  /// Eigenvectors when real_basis() holds.
  const RMatrix& real_vectors() const { return vr_; }

 private:
  bool real_ = true;
  RMatrix vr_;
  CMatrix vc_;
  RVector values_;
  double dt_ = 0.0;
};

/// Frequencies in units of the reference angular frequency, coefficients
/// normalized by 1/N (forward). Standard FFT ordering: non-negative
/// frequencies first, then negative ones.
struct Spectrum {
  std::vector<double> frequencies;
  std::vector<Complex> coefficients;
};

/// Discrete Fourier transform of a real, uniformly sampled signal.
Spectrum dft(std::span<const double> signal, double dt);

/// Inverse of dft(). Returns the real part; the imaginary residue is reported
/// through `max_imag` when non-null.
std::vector<double> inverse_dft(const Spectrum& spectrum, double* max_imag = nullptr);

/// Kronecker product a (x) b.
CMatrix kron(const CMatrix& a, const CMatrix& b);

}  // namespace qsl
