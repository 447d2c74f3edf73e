#include <doctest.h>

#include <cmath>

#include "telsim/qmath.hpp"
#include "telsim/random.hpp"
#include "telsim/teleport.hpp"

using namespace telsim;

TEST_CASE("weyl_unitary") {
  CHECK(max_abs(Matrix(weyl_unitary(2, 0, 0).matrix() - Matrix::Identity(2, 2))) == 0.0);

  Matrix xz(2, 2);
  xz << 0, -1, 1, 0;
  CHECK(max_abs(Matrix(weyl_unitary(2, 1, 1).matrix() - xz)) == 0.0);

  Matrix shift = Matrix::Zero(3, 3);
  for (int n = 0; n < 3; ++n) shift((n + 1) % 3, n) = 1.0;
  CHECK(max_abs(Matrix(weyl_unitary(3, 1, 0).matrix() - shift)) == 0.0);

  for (int dim = 2; dim <= 5; ++dim) {
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) CHECK(weyl_unitary(dim, a, b).is_unitary());
    }
  }
  CHECK_THROWS_AS((void)weyl_unitary(3, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)weyl_unitary(3, 0, -1), std::invalid_argument);
}

TEST_CASE("max_entangled") {
  const PureState e2 = max_entangled(2);
  CHECK(e2.amplitudes()(0).real() == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(e2.amplitudes()(3).real() == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(std::abs(e2.amplitudes()(1)) == 0.0);
  CHECK(e2.is_normalized());

  const PureState e3 = max_entangled(3);
  for (int n = 0; n < 3; ++n) {
    CHECK(e3.amplitudes()(n * 3 + n).real() == doctest::Approx(1 / std::sqrt(3.0)));
  }

  for (int dim : {2, 3, 4}) {
    const DensityMatrix rho = DensityMatrix::from_pure(max_entangled(dim));
    for (int keep : {0, 1}) {
      CHECK(max_abs(Matrix(partial_trace(rho, {keep}).matrix() -
                           Matrix::Identity(dim, dim) / double(dim))) < 1e-14);
    }
  }
  CHECK_THROWS_AS((void)max_entangled(1), std::invalid_argument);
}

TEST_CASE("bell_state") {
  const BellMeasurement meas = BellMeasurement::standard(2);
  const double s = 1 / std::sqrt(2.0);

  Vector expect(4);
  expect << s, 0, 0, s;
  CHECK(max_abs(Matrix(bell_state(meas, {0, 0}).amplitudes() - expect)) < 1e-15);

  expect << 0, s, s, 0;
  CHECK(max_abs(Matrix(bell_state(meas, {1, 0}).amplitudes() - expect)) < 1e-15);

  expect << s, 0, 0, -s;
  CHECK(max_abs(Matrix(bell_state(meas, {0, 1}).amplitudes() - expect)) < 1e-15);

  CHECK_THROWS_AS((void)bell_state(meas, {2, 0}), std::invalid_argument);
}

TEST_CASE("povm completeness") {
  CHECK(check_povm_completeness(BellMeasurement::standard(2)) < 1e-12);
  CHECK(check_povm_completeness(BellMeasurement::standard(5)) < 1e-12);

  SUBCASE("bell basis is orthonormal") {
    for (int dim : {2, 3, 4}) {
      const BellMeasurement meas = BellMeasurement::standard(dim);
      for (const auto& oi : meas.outcomes) {
        for (const auto& oj : meas.outcomes) {
          const cxd g = bell_state(meas, oi.m)
                            .amplitudes()
                            .dot(bell_state(meas, oj.m).amplitudes());
          const double expected = oi.m == oj.m ? 1.0 : 0.0;
          CHECK(std::abs(g - expected) < 1e-10);
        }
      }
    }
  }

  SUBCASE("single-outcome measurement is flagged by its deviation") {
    BellMeasurement single;
    single.dim = 2;
    single.outcomes.push_back({OutcomeLabel{0, 0}, 1.0, weyl_unitary(2, 0, 0)});
    CHECK(check_povm_completeness(single) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("ideal_teleport_outcome") {
  Rng rng(31);

  SUBCASE("teleports exactly for every outcome") {
    for (int dim : {2, 3, 4}) {
      const BellMeasurement meas = BellMeasurement::standard(dim);
      for (int trial = 0; trial < 10; ++trial) {
        const PureState psi = haar_state(dim, rng);
        double total = 0.0;
        for (const auto& o : meas.outcomes) {
          const IdealOutcome out = ideal_teleport_outcome(psi, meas, o.m);
          CHECK(std::abs(out.prob - 1.0 / (dim * dim)) < 1e-12);
          CHECK(fidelity(out.corrected, psi) > 1.0 - 1e-12);
          total += out.prob;
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
      }
    }
  }

  SUBCASE("pre-correction state for m=(1,0) is the shifted input") {
    const BellMeasurement meas = BellMeasurement::standard(2);
    const IdealOutcome out = ideal_teleport_outcome(PureState::basis(2, 0), meas, {1, 0});
    CHECK(fidelity(out.pre_correction, PureState::basis(2, 1)) > 1.0 - 1e-12);
  }

  SUBCASE("pre-correction marginal averaged over m is maximally mixed") {
    for (int dim : {2, 3}) {
      const BellMeasurement meas = BellMeasurement::standard(dim);
      const PureState psi = haar_state(dim, rng);
      Matrix marginal = Matrix::Zero(dim, dim);
      for (const auto& o : meas.outcomes) {
        const IdealOutcome out = ideal_teleport_outcome(psi, meas, o.m);
        marginal += out.prob * (out.pre_correction.amplitudes() *
                                out.pre_correction.amplitudes().adjoint());
      }
      CHECK(max_abs(Matrix(marginal - Matrix::Identity(dim, dim) / double(dim))) < 1e-10);
    }
  }

  SUBCASE("unnormalized input is rejected") {
    const BellMeasurement meas = BellMeasurement::standard(2);
    PureState bad({2}, Vector(2.0 * PureState::basis(2, 0).amplitudes()));
    CHECK_THROWS_AS((void)ideal_teleport_outcome(bad, meas, {0, 0}), std::invalid_argument);
  }
}
