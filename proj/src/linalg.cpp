#include "qsynth/linalg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace qsynth {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("Matrix: dimensions must be positive");
  }
}

Matrix Matrix::identity(std::size_t dim) {
  Matrix out(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) out(i, i) = 1.0;
  return out;
}

Matrix Matrix::diagonal(std::span<const Complex> entries) {
  Matrix out(entries.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) out(i, i) = entries[i];
  return out;
}

Matrix Matrix::adjoint() const {
  Matrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("Matrix product: dimension mismatch");
  Matrix out(rows_, rhs.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const Complex a = (*this)(r, k);
      if (a == Complex{}) continue;
      for (std::size_t c = 0; c < rhs.cols_; ++c) out(r, c) += a * rhs(k, c);
    }
  }
  return out;
}

Matrix Matrix::operator*(Complex s) const {
  Matrix out = *this;
  for (auto& v : out.data_) v *= s;
  return out;
}

Matrix Matrix::operator+(const Matrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) {
    throw std::invalid_argument("Matrix sum: dimension mismatch");
  }
  Matrix out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
  return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const { return *this + rhs * Complex{-1.0}; }

StateVector::StateVector(std::vector<Complex> amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.empty() || !std::has_single_bit(amps_.size()) || amps_.size() > kMaxDim) {
    throw std::invalid_argument("StateVector: dimension must be a power of two <= 2^5");
  }
}

StateVector StateVector::zero(int n) { return basis(n, 0); }

StateVector StateVector::basis(int n, std::size_t index) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("StateVector: qubit count out of range");
  std::vector<Complex> amps(std::size_t{1} << n);
  if (index >= amps.size()) throw std::out_of_range("StateVector: basis index out of range");
  amps[index] = 1.0;
  return StateVector(std::move(amps));
}

int StateVector::qubits() const { return std::countr_zero(amps_.size()); }

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return std::sqrt(s);
}

void StateVector::normalize() {
  const double nrm = norm();
  if (nrm == 0.0) throw std::domain_error("StateVector: cannot normalise the zero vector");
  for (auto& a : amps_) a /= nrm;
}

Su2 Su2::operator*(const Su2& rhs) const {
  const auto& a = m;
  const auto& b = rhs.m;
  return Su2{{a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
              a[2] * b[1] + a[3] * b[3]}};
}

Su2 Su2::adjoint() const {
  return Su2{{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}};
}

Matrix Su2::to_matrix() const {
  Matrix out(2, 2);
  for (int i = 0; i < 4; ++i) out.data()[i] = m[i];
  return out;
}

void Su2::reunitarize() {
  // SU(2) elements have the form [[a, -b*], [b, a*]] with |a|^2 + |b|^2 = 1.
  Complex a = 0.5 * (m[0] + std::conj(m[3]));
  Complex b = 0.5 * (m[2] - std::conj(m[1]));
  const double nrm = std::sqrt(std::norm(a) + std::norm(b));
  a /= nrm;
  b /= nrm;
  m = {a, -std::conj(b), b, std::conj(a)};
}

Matrix pauli_x() {
  Matrix out(2, 2);
  out(0, 1) = 1.0;
  out(1, 0) = 1.0;
  return out;
}

Matrix pauli_y() {
  Matrix out(2, 2);
  out(0, 1) = Complex{0.0, -1.0};
  out(1, 0) = Complex{0.0, 1.0};
  return out;
}

Matrix pauli_z() {
  Matrix out(2, 2);
  out(0, 0) = 1.0;
  out(1, 1) = -1.0;
  return out;
}

Matrix hadamard() {
  const double s = 1.0 / std::sqrt(2.0);
  Matrix out(2, 2);
  out(0, 0) = s;
  out(0, 1) = s;
  out(1, 0) = s;
  out(1, 1) = -s;
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  const std::size_t rows = a.rows() * b.rows();
  const std::size_t cols = a.cols() * b.cols();
  if (rows > kMaxDim || cols > kMaxDim) {
    throw std::length_error("kron: result exceeds the configured qubit limit");
  }
  Matrix out(rows, cols);
  for (std::size_t ar = 0; ar < a.rows(); ++ar)
    for (std::size_t ac = 0; ac < a.cols(); ++ac)
      for (std::size_t br = 0; br < b.rows(); ++br)
        for (std::size_t bc = 0; bc < b.cols(); ++bc)
          out(ar * b.rows() + br, ac * b.cols() + bc) = a(ar, ac) * b(br, bc);
  return out;
}

Matrix embed_single(const Matrix& op2x2, int qubit, int n) {
  if (op2x2.rows() != 2 || op2x2.cols() != 2) {
    throw std::invalid_argument("embed_single: operator must be 2x2");
  }
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("embed_single: qubit count out of range");
  if (qubit < 0 || qubit >= n) throw std::out_of_range("embed_single: qubit index out of range");
  Matrix out(1, 1);
  out(0, 0) = 1.0;
  for (int q = 0; q < n; ++q) out = kron(out, q == qubit ? op2x2 : Matrix::identity(2));
  return out;
}

Matrix embed_single(const Su2& op, int qubit, int n) { return embed_single(op.to_matrix(), qubit, n); }

Su2 su2_exp(double x, double y, double z) {
  const double theta = std::sqrt(x * x + y * y + z * z);
  if (theta == 0.0) return Su2::identity();
  const double c = std::cos(theta);
  const double s = std::sin(theta) / theta;
  // cos(t) I - i sin(t)/t (x sx + y sy + z sz)
  return Su2{{Complex{c, -s * z}, Complex{-s * y, -s * x}, Complex{s * y, -s * x},
              Complex{c, s * z}}};
}

Complex trace_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("trace_inner: dimension mismatch");
  }
  Complex acc{};
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) acc += std::conj(da[i]) * db[i];
  return acc;
}

Complex inner(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("inner: dimension mismatch");
  Complex acc{};
  for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

StateVector operator*(const Matrix& u, const StateVector& psi) {
  if (u.cols() != psi.dim()) throw std::invalid_argument("Matrix * StateVector: dimension mismatch");
  std::vector<Complex> out(u.rows());
  for (std::size_t r = 0; r < u.rows(); ++r)
    for (std::size_t c = 0; c < u.cols(); ++c) out[r] += u(r, c) * psi[c];
  return StateVector(std::move(out));
}

double unitarity_defect(const Matrix& u) {
  if (u.rows() != u.cols()) return INFINITY;
  return max_abs_diff(u.adjoint() * u, Matrix::identity(u.rows()));
}

double unitarity_defect(const Su2& u) { return unitarity_defect(u.to_matrix()); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_abs_diff: dimension mismatch");
  }
  double out = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    out = std::max(out, std::abs(a.data()[i] - b.data()[i]));
  }
  return out;
}

double max_abs_diff(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("max_abs_diff: dimension mismatch");
  double out = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) out = std::max(out, std::abs(a[i] - b[i]));
  return out;
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](const Complex& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

Complex determinant(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("determinant: matrix must be square");
  // Gaussian elimination with partial pivoting.
  Matrix w = a;
  const std::size_t n = w.rows();
  Complex det{1.0};
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(w(r, k)) > std::abs(w(piv, k))) piv = r;
    if (w(piv, k) == Complex{}) return Complex{};
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(w(k, c), w(piv, c));
      det = -det;
    }
    det *= w(k, k);
    for (std::size_t r = k + 1; r < n; ++r) {
      const Complex f = w(r, k) / w(k, k);
      for (std::size_t c = k; c < n; ++c) w(r, c) -= f * w(k, c);
    }
  }
  return det;
}

void apply_single(std::span<Complex> block, std::size_t cols, int n, int qubit, const Su2& u) {
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t bit = qubit_bit(qubit, n);
  const Complex u00 = u.m[0], u01 = u.m[1], u10 = u.m[2], u11 = u.m[3];
  for (std::size_t r0 = 0; r0 < dim; ++r0) {
    if (r0 & bit) continue;
    Complex* a = block.data() + r0 * cols;
    Complex* b = block.data() + (r0 | bit) * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      const Complex x = a[c];
      const Complex y = b[c];
      a[c] = u00 * x + u01 * y;
      b[c] = u10 * x + u11 * y;
    }
  }
}

void apply_controlled(std::span<Complex> block, std::size_t cols, int n, int control, int target,
                      const Su2& u) {
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t cbit = qubit_bit(control, n);
  const std::size_t tbit = qubit_bit(target, n);
  const Complex u00 = u.m[0], u01 = u.m[1], u10 = u.m[2], u11 = u.m[3];
  for (std::size_t r0 = 0; r0 < dim; ++r0) {
    if ((r0 & tbit) || !(r0 & cbit)) continue;
    Complex* a = block.data() + r0 * cols;
    Complex* b = block.data() + (r0 | tbit) * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      const Complex x = a[c];
      const Complex y = b[c];
      a[c] = u00 * x + u01 * y;
      b[c] = u10 * x + u11 * y;
    }
  }
}

void apply_phase_flip(std::span<Complex> block, std::size_t cols, std::size_t mask) {
  const std::size_t dim = block.size() / cols;
  for (std::size_t r = 0; r < dim; ++r) {
    if ((r & mask) != mask) continue;
    Complex* row = block.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] = -row[c];
  }
}

}  // namespace qsynth
