#include "telsim/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/QR>

#include "telsim/channels.hpp"

namespace telsim {

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

PureState haar_state(int dim, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("haar_state: dim must be >= 1");
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.complex_gaussian();
  return PureState({dim}, std::move(v)).normalized();
}

Operator haar_unitary(int dim, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("haar_unitary: dim must be >= 1");
  Matrix z(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) z(i, j) = rng.complex_gaussian();
  }
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    const cxd d = r(i, i);
    q.col(i) *= std::abs(d) > 1e-300 ? d / std::abs(d) : cxd(1.0, 0.0);
  }
  return Operator(std::move(q));
}

KrausChannel random_kraus_channel(int dim, int rank, Rng& rng) {
  if (dim < 1 || rank < 1) {
    throw std::invalid_argument("random_kraus_channel: dim and rank must be >= 1");
  }
  const Operator big = haar_unitary(dim * rank, rng);
  KrausChannel c;
  c.dim = dim;
  c.kraus.reserve(static_cast<std::size_t>(rank));
  for (int x = 0; x < rank; ++x) {
    c.kraus.emplace_back(Matrix(big.matrix().block(x * dim, 0, dim, dim)));
    c.labels.push_back("F" + std::to_string(x));
  }
  return c;
}

}  // namespace telsim
