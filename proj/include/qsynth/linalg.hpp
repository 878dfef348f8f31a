#pragma once

// Dense complex linear algebra for few-qubit operators (dimension <= 2^kMaxQubits).
//
// Qubit ordering: qubit 0 is the most significant bit of a basis index, i.e.
// the leftmost tensor factor.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qsynth {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 5;
inline constexpr std::size_t kMaxDim = std::size_t{1} << kMaxQubits;

/// Bit of `qubit` inside a basis index of an `n`-qubit register.
constexpr std::size_t qubit_bit(int qubit, int n) {
  return std::size_t{1} << (n - 1 - qubit);
}

/// Row-major dense complex matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);

  static Matrix identity(std::size_t dim);
  static Matrix diagonal(std::span<const Complex> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  Matrix adjoint() const;
  Matrix operator*(const Matrix& rhs) const;
  Matrix operator*(Complex s) const;
  Matrix operator+(const Matrix& rhs) const;
  Matrix operator-(const Matrix& rhs) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Unit-norm amplitude vector of length 2^n.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::vector<Complex> amplitudes);

  /// |0...0> on n qubits.
  static StateVector zero(int n);
  static StateVector basis(int n, std::size_t index);

  std::size_t dim() const { return amps_.size(); }
  int qubits() const;

  Complex& operator[](std::size_t i) { return amps_[i]; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  std::span<Complex> data() { return amps_; }
  std::span<const Complex> data() const { return amps_; }

  double norm() const;
  void normalize();

  bool operator==(const StateVector&) const = default;

 private:
  std::vector<Complex> amps_;
};

/// 2x2 single-qubit unitary, stored row-major: {m00, m01, m10, m11}.
struct Su2 {
  std::array<Complex, 4> m{Complex{1.0}, Complex{}, Complex{}, Complex{1.0}};

  static Su2 identity() { return {}; }

  Complex operator()(int r, int c) const { return m[2 * r + c]; }

  Su2 operator*(const Su2& rhs) const;
  Su2 adjoint() const;
  Matrix to_matrix() const;

  /// Project onto the nearest SU(2) element (quaternion renormalisation).
  void reunitarize();
};

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix hadamard();

Matrix kron(const Matrix& a, const Matrix& b);
Matrix embed_single(const Matrix& op2x2, int qubit, int n);
Matrix embed_single(const Su2& op, int qubit, int n);

/// exp(-i (x sx + y sy + z sz)), evaluated in closed form.
Su2 su2_exp(double x, double y, double z);

/// Tr{a^dagger b}.
Complex trace_inner(const Matrix& a, const Matrix& b);
Complex inner(const StateVector& a, const StateVector& b);

StateVector operator*(const Matrix& u, const StateVector& psi);

/// max |(U^dagger U - I)_ij|.
double unitarity_defect(const Matrix& u);
double unitarity_defect(const Su2& u);
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs_diff(const StateVector& a, const StateVector& b);
bool all_finite(const Matrix& a);

Complex determinant(const Matrix& a);

// In-place kernels on a block of `dim` rows by `cols` columns stored
// row-major (cols = 1 for a state vector, cols = dim for an operator).
// They left-multiply the block by the embedded operator.

void apply_single(std::span<Complex> block, std::size_t cols, int n, int qubit, const Su2& u);
/// Left-multiply by |0><0|_c (x) I + |1><1|_c (x) u on (control, target).
void apply_controlled(std::span<Complex> block, std::size_t cols, int n, int control, int target,
                      const Su2& u);
/// Negate every row whose index has all bits of `mask` set.
void apply_phase_flip(std::span<Complex> block, std::size_t cols, std::size_t mask);

}  // namespace qsynth
