#include "telsim/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace telsim {

double max_abs(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

//---------------------------------------------------------------------------
// Operator
//---------------------------------------------------------------------------

Operator::Operator(Matrix m) : mat_(std::move(m)) {
  if (mat_.rows() != mat_.cols()) {
    throw std::invalid_argument("Operator: matrix must be square");
  }
}

Operator Operator::identity(int dim) {
  if (dim < 1) throw std::invalid_argument("Operator::identity: dim must be >= 1");
  return Operator(Matrix::Identity(dim, dim));
}

bool Operator::is_unitary(double tol) const {
  const Matrix d = mat_.adjoint() * mat_ - Matrix::Identity(dim(), dim());
  return max_abs(d) < tol;
}

bool Operator::is_hermitian(double tol) const {
  return max_abs(Matrix(mat_ - mat_.adjoint())) < tol;
}

bool Operator::is_psd(double tol) const {
  if (!is_hermitian(tol)) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

Operator operator*(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("Operator product: dimension mismatch");
  }
  return Operator(a.matrix() * b.matrix());
}

//---------------------------------------------------------------------------
// PureState
//---------------------------------------------------------------------------

namespace {

int product_of(const std::vector<int>& dims) {
  int p = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("subsystem dimensions must be >= 1");
    p *= d;
  }
  return p;
}

}  // namespace

PureState::PureState(std::vector<int> dims, Vector amplitudes)
    : dims_(std::move(dims)), amps_(std::move(amplitudes)) {
  if (product_of(dims_) != static_cast<int>(amps_.size())) {
    throw std::invalid_argument("PureState: amplitude length != product of dims");
  }
}

PureState PureState::basis(int dim, int n) {
  if (n < 0 || n >= dim) throw std::invalid_argument("PureState::basis: index out of range");
  Vector v = Vector::Zero(dim);
  v(n) = 1.0;
  return PureState({dim}, std::move(v));
}

bool PureState::is_normalized(double tol) const {
  return std::abs(norm2() - 1.0) < tol;
}

PureState PureState::normalized() const {
  const double n2 = norm2();
  if (n2 <= 0.0 || std::sqrt(n2) < 1e-150) {
    throw std::runtime_error("PureState::normalized: zero-norm state");
  }
  return PureState(dims_, amps_ / std::sqrt(n2));
}

//---------------------------------------------------------------------------
// DensityMatrix
//---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(std::vector<int> dims, Matrix entries)
    : dims_(std::move(dims)), mat_(std::move(entries)) {
  if (mat_.rows() != mat_.cols()) {
    throw std::invalid_argument("DensityMatrix: matrix must be square");
  }
  if (product_of(dims_) != static_cast<int>(mat_.rows())) {
    throw std::invalid_argument("DensityMatrix: size != product of dims");
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  const Vector& v = psi.amplitudes();
  return DensityMatrix(psi.dims(), v * v.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix({dim}, Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

bool DensityMatrix::is_valid_state(double hermitian_tol, double psd_tol,
                                   double trace_tol) const {
  if (max_abs(Matrix(mat_ - mat_.adjoint())) >= hermitian_tol) return false;
  if (std::abs(trace_real() - 1.0) >= trace_tol) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -psd_tol;
}

//---------------------------------------------------------------------------
// tensor / transpose / partial trace
//---------------------------------------------------------------------------

namespace {

std::vector<int> concat(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

Operator tensor(const Operator& a, const Operator& b) {
  return Operator(Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval());
}

PureState tensor(const PureState& a, const PureState& b) {
  Matrix prod = Eigen::kroneckerProduct(Matrix(a.amplitudes()), Matrix(b.amplitudes())).eval();
  return PureState(concat(a.dims(), b.dims()), Vector(prod.col(0)));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(concat(a.dims(), b.dims()),
                       Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval());
}

Operator transpose_in_basis(const Operator& a) {
  return Operator(a.matrix().transpose());
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  const auto& dims = rho.dims();
  const int k = static_cast<int>(dims.size());

  std::vector<bool> kept(k, false);
  for (int idx : keep) {
    if (idx < 0 || idx >= k) {
      throw std::invalid_argument("partial_trace: subsystem index out of range");
    }
    if (kept[idx]) throw std::invalid_argument("partial_trace: duplicate subsystem index");
    kept[idx] = true;
  }

  std::vector<int> keep_sorted, trace_sorted;
  for (int i = 0; i < k; ++i) (kept[i] ? keep_sorted : trace_sorted).push_back(i);

  // Strides for the row-major flattening (first subsystem slowest).
  std::vector<long> stride(k, 1);
  for (int i = k - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];

  std::vector<int> out_dims;
  long out_size = 1, trace_size = 1;
  for (int i : keep_sorted) {
    out_dims.push_back(dims[i]);
    out_size *= dims[i];
  }
  for (int i : trace_sorted) trace_size *= dims[i];

  auto flat_index = [&](long keep_combo, long trace_combo) {
    long idx = 0;
    for (int pos = static_cast<int>(keep_sorted.size()) - 1; pos >= 0; --pos) {
      const int sub = keep_sorted[pos];
      idx += (keep_combo % dims[sub]) * stride[sub];
      keep_combo /= dims[sub];
    }
    for (int pos = static_cast<int>(trace_sorted.size()) - 1; pos >= 0; --pos) {
      const int sub = trace_sorted[pos];
      idx += (trace_combo % dims[sub]) * stride[sub];
      trace_combo /= dims[sub];
    }
    return idx;
  };

  Matrix out = Matrix::Zero(out_size, out_size);
  for (long i = 0; i < out_size; ++i) {
    for (long j = 0; j < out_size; ++j) {
      cxd sum = 0.0;
      for (long t = 0; t < trace_size; ++t) {
        sum += rho.matrix()(flat_index(i, t), flat_index(j, t));
      }
      out(i, j) = sum;
    }
  }
  if (out_dims.empty()) out_dims.push_back(1);
  return DensityMatrix(out_dims, std::move(out));
}

//---------------------------------------------------------------------------
// fidelity
//---------------------------------------------------------------------------

namespace {

void check_fidelity_inputs(int dim_a, int dim_b, double norm_a, double norm_b) {
  if (dim_a != dim_b) throw std::invalid_argument("fidelity: dimension mismatch");
  if (std::abs(norm_a - 1.0) > 1e-8 || std::abs(norm_b - 1.0) > 1e-8) {
    throw std::invalid_argument("fidelity: inputs must be normalized");
  }
}

// Hermitian square root with eigenvalues clipped at 0 (numerical PSD drift;
// anything below -1e-10 is a genuine invariant violation upstream). Noise
// eigenvalues near zero are floored relative to the largest one: sqrt would
// otherwise inflate 1e-16-level noise into 1e-8-level trace contributions.
Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Eigen::VectorXd ev = es.eigenvalues();
  const double floor = std::max(0.0, ev.maxCoeff()) * 1e-13;
  for (int i = 0; i < ev.size(); ++i) ev(i) = ev(i) > floor ? std::sqrt(ev(i)) : 0.0;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const PureState& a, const PureState& b) {
  check_fidelity_inputs(a.total_dim(), b.total_dim(), a.norm2(), b.norm2());
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

double fidelity(const PureState& a, const DensityMatrix& b) {
  check_fidelity_inputs(a.total_dim(), b.total_dim(), a.norm2(), b.trace_real());
  const cxd v = a.amplitudes().adjoint() * b.matrix() * a.amplitudes();
  return v.real();
}

double fidelity(const DensityMatrix& a, const PureState& b) { return fidelity(b, a); }

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  check_fidelity_inputs(a.total_dim(), b.total_dim(), a.trace_real(), b.trace_real());
  const Matrix sa = psd_sqrt(a.matrix());
  const Matrix inner = psd_sqrt(sa * b.matrix() * sa);
  const double root_sum = inner.trace().real();
  return root_sum * root_sum;
}

}  // namespace telsim
