#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "telsim/channels.hpp"
#include "telsim/random.hpp"
#include "telsim/teleport.hpp"

using namespace telsim;

namespace {

DensityMatrix random_density(int dim, Rng& rng) {
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.complex_gaussian();
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix({dim}, std::move(rho));
}

DensityMatrix plus_state(int dim) {
  Vector v = Vector::Constant(dim, cxd(1.0 / std::sqrt(double(dim)), 0.0));
  return DensityMatrix::from_pure(PureState({dim}, std::move(v)));
}

std::vector<double> sorted_eigen_magnitudes(const Matrix& m) {
  Eigen::ComplexEigenSolver<Matrix> es(m, false);
  std::vector<cxd> ev(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
  std::sort(ev.begin(), ev.end(), [](cxd a, cxd b) {
    if (std::abs(a.real() - b.real()) > 1e-12) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  std::vector<double> flat;
  for (cxd e : ev) {
    flat.push_back(e.real());
    flat.push_back(e.imag());
  }
  return flat;
}

}  // namespace

TEST_CASE("validate_channel") {
  CHECK(validate_channel(make_identity_channel(3)).ok);

  KrausChannel half_dephase;
  half_dephase.dim = 2;
  Matrix z(2, 2);
  z << 1, 0, 0, -1;
  half_dephase.kraus.emplace_back(Matrix(std::sqrt(0.5) * Matrix::Identity(2, 2)));
  half_dephase.kraus.emplace_back(Matrix(std::sqrt(0.5) * z));
  CHECK(validate_channel(half_dephase).ok);

  KrausChannel doubled;
  doubled.dim = 2;
  doubled.kraus = {Operator::identity(2), Operator::identity(2)};
  const ChannelValidation v = validate_channel(doubled);
  CHECK_FALSE(v.ok);
  CHECK(v.deviation == doctest::Approx(1.0));
}

TEST_CASE("apply_channel") {
  Rng rng(21);

  SUBCASE("identity") {
    const DensityMatrix rho = random_density(3, rng);
    CHECK(max_abs(Matrix(apply_channel(make_identity_channel(3), rho).matrix() -
                         rho.matrix())) < 1e-15);
  }

  SUBCASE("full dephasing sends |+><+| to I/2") {
    const DensityMatrix out = apply_channel(make_dephasing_channel(2, 0.5), plus_state(2));
    CHECK(max_abs(Matrix(out.matrix() - Matrix::Identity(2, 2) / 2.0)) < 1e-15);
  }

  SUBCASE("uniform depolarizing against the brute-force Weyl sum") {
    for (int dim : {2, 3}) {
      const DensityMatrix rho = random_density(dim, rng);

      // Independent route: sum the N^2 Weyl conjugations explicitly.
      Matrix twirl = Matrix::Zero(dim, dim);
      for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
          const Matrix w = weyl_unitary(dim, a, b).matrix();
          twirl += w * rho.matrix() * w.adjoint();
        }
      }
      twirl /= double(dim * dim);
      CHECK(max_abs(Matrix(twirl - Matrix::Identity(dim, dim) / double(dim))) < 1e-12);

      const double p = 0.7;
      const DensityMatrix out =
          apply_channel(make_uniform_depolarizing_channel(dim, p), rho);
      const Matrix expected = (1.0 - p) * rho.matrix() + p * twirl;
      CHECK(max_abs(Matrix(out.matrix() - expected)) < 1e-12);
    }
    const DensityMatrix rho2 = random_density(2, rng);
    const DensityMatrix out =
        apply_channel(make_uniform_depolarizing_channel(2, 1.0), rho2);
    CHECK(max_abs(Matrix(out.matrix() - Matrix::Identity(2, 2) / 2.0)) < 1e-12);
  }

  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(
        (void)apply_channel(make_identity_channel(2), random_density(3, rng)),
        std::invalid_argument);
  }

  SUBCASE("preserves trace, hermiticity, positivity") {
    for (int dim : {2, 3, 4}) {
      KrausChannel c = random_kraus_channel(dim, dim, rng);
      for (int trial = 0; trial < 34; ++trial) {
        const DensityMatrix out = apply_channel(c, random_density(dim, rng));
        CHECK(std::abs(out.trace_real() - 1.0) < 1e-10);
        CHECK(max_abs(Matrix(out.matrix() - out.matrix().adjoint())) < 1e-10);
        Eigen::SelfAdjointEigenSolver<Matrix> es(out.matrix(), Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= -1e-9);
      }
    }
  }
}

TEST_CASE("transpose_channel") {
  SUBCASE("dephasing is its own transpose") {
    const KrausChannel c = make_dephasing_channel(2, 0.3);
    const KrausChannel t = transpose_channel(c);
    CHECK_FALSE(t.flagged_non_trace_preserving);
    for (int x = 0; x < c.size(); ++x) {
      CHECK(max_abs(Matrix(t.kraus[x].matrix() - c.kraus[x].matrix())) == 0.0);
    }
  }

  SUBCASE("amplitude damping transposes entrywise and loses trace preservation") {
    const double gamma = 0.4;
    const KrausChannel c = make_amplitude_damping_channel(gamma);
    const KrausChannel t = transpose_channel(c);
    Matrix expected(2, 2);
    expected << 0, 0, std::sqrt(gamma), 0;
    CHECK(max_abs(Matrix(t.kraus[1].matrix() - expected)) == 0.0);
    CHECK(t.flagged_non_trace_preserving);
    CHECK(t.completeness_deviation == doctest::Approx(gamma));
  }

  SUBCASE("weyl channel transposes to the mirrored weight pattern") {
    const int dim = 3;
    std::vector<double> weights(9, 0.0);
    weights[1 * dim + 2] = 0.6;  // (a,b) = (1,2)
    weights[0 * dim + 0] = 0.4;
    const KrausChannel c = make_weyl_channel(dim, weights);
    const KrausChannel t = transpose_channel(c);
    CHECK_FALSE(t.flagged_non_trace_preserving);
    // (X^1 Z^2)^T is proportional to X^{-1} Z^2 = X^2 Z^2.
    const Matrix target = std::sqrt(0.6) * weyl_unitary(dim, 2, 2).matrix();
    const Matrix got = t.kraus[1].matrix();
    const cxd inner = (target.adjoint() * got).trace();
    const cxd phase = inner / std::abs(inner);
    CHECK(max_abs(Matrix(got - phase * target)) < 1e-14);
  }

  SUBCASE("involution and eigenvalue preservation") {
    Rng rng(22);
    const KrausChannel c = random_kraus_channel(3, 4, rng);
    const KrausChannel tt = transpose_channel(transpose_channel(c));
    for (int x = 0; x < c.size(); ++x) {
      CHECK(max_abs(Matrix(tt.kraus[x].matrix() - c.kraus[x].matrix())) == 0.0);
      const auto ev = sorted_eigen_magnitudes(c.kraus[x].matrix());
      const auto ev_t = sorted_eigen_magnitudes(c.kraus[x].matrix().transpose());
      for (std::size_t i = 0; i < ev.size(); ++i) CHECK(std::abs(ev[i] - ev_t[i]) < 1e-10);
    }
  }
}

TEST_CASE("unitary homogeneity") {
  std::vector<Operator> weyl_ops;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) weyl_ops.push_back(weyl_unitary(2, a, b));

  SUBCASE("uniform depolarizing is weyl covariant") {
    const HomogeneityReport r =
        check_unitary_homogeneity(make_uniform_depolarizing_channel(2, 0.8), weyl_ops);
    CHECK(r.covariant_under_weyl);
    CHECK(r.residual < 1e-8);
    CHECK(r.witnesses.size() == 4);
  }

  SUBCASE("identity channel is covariant under anything") {
    Rng rng(23);
    const std::vector<Operator> us = {haar_unitary(2, rng), haar_unitary(2, rng)};
    CHECK(check_unitary_homogeneity(make_identity_channel(2), us).covariant_under_weyl);
  }

  SUBCASE("amplitude damping is not weyl covariant") {
    const HomogeneityReport r =
        check_unitary_homogeneity(make_amplitude_damping_channel(0.3), weyl_ops);
    CHECK_FALSE(r.covariant_under_weyl);
  }

  SUBCASE("trivial unitary set always passes") {
    Rng rng(24);
    const KrausChannel c = random_kraus_channel(3, 5, rng);
    CHECK(check_unitary_homogeneity(c, {Operator::identity(3)}).covariant_under_weyl);
  }

  SUBCASE("non-unitary input throws") {
    Matrix bad(2, 2);
    bad << 1, 0, 0, 0.5;
    CHECK_THROWS_AS(
        (void)check_unitary_homogeneity(make_identity_channel(2), {Operator(bad)}),
        std::invalid_argument);
  }
}

TEST_CASE("transpose homogeneity") {
  CHECK(check_transpose_homogeneity(make_dephasing_channel(2, 0.3)).transpose_homogeneous);
  CHECK(check_transpose_homogeneity(make_uniform_depolarizing_channel(2, 0.5))
            .transpose_homogeneous);
  CHECK(check_transpose_homogeneity(make_uniform_depolarizing_channel(3, 0.5))
            .transpose_homogeneous);
  CHECK_FALSE(
      check_transpose_homogeneity(make_amplitude_damping_channel(0.3)).transpose_homogeneous);
}

TEST_CASE("builders") {
  SUBCASE("identity N=3") {
    const KrausChannel c = make_identity_channel(3);
    CHECK(c.size() == 1);
    CHECK(max_abs(Matrix(c.kraus[0].matrix() - Matrix::Identity(3, 3))) == 0.0);
  }

  SUBCASE("dephasing(0.5) is the half/half set") {
    const KrausChannel c = make_dephasing_channel(2, 0.5);
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    CHECK(max_abs(Matrix(c.kraus[0].matrix() - std::sqrt(0.5) * Matrix::Identity(2, 2))) <
          1e-15);
    CHECK(max_abs(Matrix(c.kraus[1].matrix() - std::sqrt(0.5) * z)) < 1e-15);
  }

  SUBCASE("every builder output validates") {
    Rng rng(25);
    std::vector<KrausChannel> channels = {
        make_identity_channel(4),
        make_dephasing_channel(3, 0.2),
        make_uniform_depolarizing_channel(4, 0.9),
        make_weyl_channel(2, {0.25, 0.25, 0.25, 0.25}),
        make_unitary_error_channel(haar_unitary(3, rng), 0.4),
        make_amplitude_damping_channel(0.7),
    };
    for (const auto& c : channels) {
      const ChannelValidation v = validate_channel(c);
      CHECK(v.ok);
      CHECK(v.deviation < 1e-12);
    }
  }

  SUBCASE("invalid parameters") {
    CHECK_THROWS_AS((void)make_dephasing_channel(2, 1.5), std::invalid_argument);
    CHECK_THROWS_AS((void)make_uniform_depolarizing_channel(2, -0.1), std::invalid_argument);
    CHECK_THROWS_AS((void)make_amplitude_damping_channel(1.2), std::invalid_argument);
    CHECK_THROWS_AS((void)make_weyl_channel(2, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS((void)make_weyl_channel(2, {0.5, 0.2, 0.2, 0.2}), std::invalid_argument);
    ChannelSpec damping;
    damping.kind = ChannelKind::amplitude_damping;
    damping.gamma = 0.3;
    CHECK_THROWS_AS((void)build_standard_channel(damping, 3), std::invalid_argument);
    CHECK_THROWS_AS((void)make_custom_channel(2, {Operator::identity(2), Operator::identity(2)}),
                    std::invalid_argument);
  }
}
