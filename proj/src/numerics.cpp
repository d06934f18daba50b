#include "qsl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/FFT>

namespace qsl {

double hermitian_defect(const CMatrix& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  if (h.size() == 0) return 0.0;
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

bool is_real(const CMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (m.data()[i].imag() != 0.0) return false;
  }
  return true;
}

namespace {

void require_hermitian(const CMatrix& h, double tol, const char* who) {
  if (h.rows() != h.cols()) {
    std::ostringstream os;
    os << who << ": matrix is " << h.rows() << "x" << h.cols() << ", not square";
    throw std::invalid_argument(os.str());
  }
  const double defect = hermitian_defect(h);
  if (!(defect <= tol)) {
    std::ostringstream os;
    os << who << ": input not Hermitian, max|H - H^dagger| = " << defect;
    throw std::invalid_argument(os.str());
  }
}

Eigen::Index first_nonzero(const CVector& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-10 * scale) return i;
  }
  return 0;
}

}  // namespace

EigenSystem herm_eigendecompose(const CMatrix& h, double tol) {
  require_hermitian(h, tol, "herm_eigendecompose");
  const Eigen::Index n = h.rows();
  EigenSystem out;
  if (is_real(h)) {
    // Symmetrize so round-off in the lower triangle cannot leak in.
    const RMatrix hr = 0.5 * (h.real() + h.real().transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(hr);
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors().cast<Complex>();
  } else {
    const CMatrix hs = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hs);
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
  }

  for (Eigen::Index c = 0; c < n; ++c) {
    auto col = out.eigenvectors.col(c);
    const Complex lead = col(first_nonzero(col));
    col *= std::conj(lead) / std::abs(lead);
  }

  // Degenerate eigenvalues: order by position of the leading component.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<Eigen::Index> lead(order.size());
  for (Eigen::Index c = 0; c < n; ++c) lead[c] = first_nonzero(out.eigenvectors.col(c));
  const RVector& ev = out.eigenvalues;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double tie = 1e-12 * std::max(1.0, std::max(std::abs(ev(a)), std::abs(ev(b))));
    if (std::abs(ev(a) - ev(b)) > tie) return ev(a) < ev(b);
    return lead[a] < lead[b];
  });
  EigenSystem sorted;
  sorted.eigenvalues.resize(n);
  sorted.eigenvectors.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    sorted.eigenvalues(c) = ev(order[c]);
    sorted.eigenvectors.col(c) = out.eigenvectors.col(order[c]);
  }
  return sorted;
}

CMatrix propagator_exp(const CMatrix& h, double dt, double tol) {
  if (dt < 0.0) throw std::invalid_argument("propagator_exp: dt must be >= 0");
  require_hermitian(h, tol, "propagator_exp");
  return SpectralExp(h, dt).dense();
}

SpectralExp::SpectralExp(const CMatrix& h, double dt) : dt_(dt) {
  if (is_real(h)) {
    const RMatrix hr = 0.5 * (h.real() + h.real().transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(hr);
    real_ = true;
    vr_ = es.eigenvectors();
    values_ = es.eigenvalues();
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
    real_ = false;
    vc_ = es.eigenvectors();
    values_ = es.eigenvalues();
  }
}

SpectralExp::SpectralExp(const RMatrix& h, double dt) : real_(true), dt_(dt) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
  vr_ = es.eigenvectors();
  values_ = es.eigenvalues();
}

CMatrix SpectralExp::to_eigenbasis(const CMatrix& block) const {
  if (real_) return vr_.transpose() * block;
  return vc_.adjoint() * block;
}

CMatrix SpectralExp::from_eigenbasis(const CMatrix& block) const {
  if (real_) return vr_ * block;
  return vc_ * block;
}

CMatrix SpectralExp::rotate(const CMatrix& a) const {
  if (real_) return vr_.transpose() * a * vr_;
  return vc_.adjoint() * a * vc_;
}

void SpectralExp::apply(CMatrix& block) const {
  CMatrix tmp = to_eigenbasis(block);
  for (Eigen::Index i = 0; i < tmp.rows(); ++i) {
    tmp.row(i) *= std::polar(1.0, -values_(i) * dt_);
  }
  block = from_eigenbasis(tmp);
}

void SpectralExp::apply_adjoint(CMatrix& block) const {
  CMatrix tmp = to_eigenbasis(block);
  for (Eigen::Index i = 0; i < tmp.rows(); ++i) {
    tmp.row(i) *= std::polar(1.0, values_(i) * dt_);
  }
  block = from_eigenbasis(tmp);
}

CMatrix SpectralExp::dense() const {
  CMatrix id = CMatrix::Identity(dim(), dim());
  apply(id);
  return id;
}

Spectrum dft(std::span<const double> signal, double dt) {
  const std::size_t n = signal.size();
  if (n < 2) throw std::invalid_argument("dft: signal needs at least 2 samples");
  if (!(dt > 0.0)) throw std::invalid_argument("dft: dt must be positive");
  Eigen::FFT<double> fft;
  std::vector<double> in(signal.begin(), signal.end());
  std::vector<Complex> out;
  fft.fwd(out, in);
  Spectrum s;
  s.frequencies.resize(n);
  s.coefficients.resize(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double dw = 2.0 * kPi / (static_cast<double>(n) * dt);
  for (std::size_t k = 0; k < n; ++k) {
    const auto signed_k = (k <= (n - 1) / 2) ? static_cast<double>(k)
                                             : static_cast<double>(k) - static_cast<double>(n);
    s.frequencies[k] = signed_k * dw;
    s.coefficients[k] = out[k] * inv_n;
  }
  // Nyquist bin of an even-length transform sits at -n/2; place it at +n/2 so
  // the positive half carries it.
  if (n % 2 == 0) s.frequencies[n / 2] = 0.5 * static_cast<double>(n) * dw;
  return s;
}

std::vector<double> inverse_dft(const Spectrum& spectrum, double* max_imag) {
  const std::size_t n = spectrum.coefficients.size();
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<Complex> in(spectrum.coefficients.begin(), spectrum.coefficients.end());
  std::vector<Complex> out;
  fft.inv(out, in);
  std::vector<double> re(n);
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    re[k] = out[k].real();
    worst = std::max(worst, std::abs(out[k].imag()));
  }
  if (max_imag != nullptr) *max_imag = worst;
  return re;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace qsl
