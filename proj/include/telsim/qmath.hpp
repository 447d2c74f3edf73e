#ifndef TELSIM_QMATH_HPP
#define TELSIM_QMATH_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace telsim {

using cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Centralized tolerances. tol_alg covers algebraic identities (unitarity,
// completeness, POVM sums), tol_norm covers state normalization.
inline constexpr double tol_alg = 1e-10;
inline constexpr double tol_norm = 1e-12;

// Largest entry magnitude; the deviation norm used throughout.
double max_abs(const Matrix& m);

//---------------------------------------------------------------------------
// Operator: dense complex square matrix on a single N-level system.
//---------------------------------------------------------------------------
class Operator {
 public:
  Operator() = default;
  explicit Operator(Matrix m);  // throws std::invalid_argument if not square

  static Operator identity(int dim);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Matrix& matrix() const { return mat_; }

  Operator adjoint() const { return Operator(mat_.adjoint()); }

  bool is_unitary(double tol = tol_alg) const;
  bool is_hermitian(double tol = tol_alg) const;
  bool is_psd(double tol = tol_alg) const;

 private:
  Matrix mat_;
};

Operator operator*(const Operator& a, const Operator& b);

//---------------------------------------------------------------------------
// PureState: complex amplitude vector over one or more N-level subsystems.
//
// Subsystem ordering is fixed as A, R, B throughout, with the first-listed
// subsystem varying slowest (row-major index flattening):
//   flat index = ((i_A * N_R) + i_R) * N_B + i_B.
//---------------------------------------------------------------------------
class PureState {
 public:
  PureState() = default;
  PureState(std::vector<int> dims, Vector amplitudes);

  // Computational basis vector |n> on a single dim-level system.
  static PureState basis(int dim, int n);

  int total_dim() const { return static_cast<int>(amps_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  const Vector& amplitudes() const { return amps_; }

  // <psi|psi>; may be anything >= 0 for unnormalized protocol branches.
  double norm2() const { return amps_.squaredNorm(); }
  bool is_normalized(double tol = tol_norm) const;
  PureState normalized() const;  // throws on (numerically) zero norm

  bool empty() const { return amps_.size() == 0; }

 private:
  std::vector<int> dims_;
  Vector amps_;
};

//---------------------------------------------------------------------------
// DensityMatrix: Hermitian PSD matrix over one or more subsystems.
//---------------------------------------------------------------------------
class DensityMatrix {
 public:
  DensityMatrix() = default;
  DensityMatrix(std::vector<int> dims, Matrix entries);

  static DensityMatrix from_pure(const PureState& psi);
  static DensityMatrix maximally_mixed(int dim);

  int total_dim() const { return static_cast<int>(mat_.rows()); }
  const std::vector<int>& dims() const { return dims_; }
  const Matrix& matrix() const { return mat_; }

  double trace_real() const { return mat_.trace().real(); }

  // Hermitian within hermitian_tol, eigenvalues >= -psd_tol, trace within
  // trace_tol of 1.
  bool is_valid_state(double hermitian_tol = tol_norm, double psd_tol = 1e-10,
                      double trace_tol = 1e-10) const;

 private:
  std::vector<int> dims_;
  Matrix mat_;
};

//---------------------------------------------------------------------------
// Operations
//---------------------------------------------------------------------------

// Kronecker products; result dims are the concatenation of the input dims.
Operator tensor(const Operator& a, const Operator& b);
PureState tensor(const PureState& a, const PureState& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

// Entrywise transpose in the fixed computational basis:
// <n'|F|n> = <n|F^T|n'>.
Operator transpose_in_basis(const Operator& a);

// Trace out the subsystems not listed in `keep`. The kept subsystems stay in
// their original relative order. Throws on out-of-range or duplicate indices.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

// Fidelity, squared-overlap convention: pure-pure |<a|b>|^2, pure-mixed
// <a|rho|a>, mixed-mixed Uhlmann (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 so
// that F(rho, rho) = 1. Inputs must be normalized and of equal total
// dimension.
double fidelity(const PureState& a, const PureState& b);
double fidelity(const PureState& a, const DensityMatrix& b);
double fidelity(const DensityMatrix& a, const PureState& b);
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace telsim

#endif  // TELSIM_QMATH_HPP
