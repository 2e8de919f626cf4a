#include <doctest.h>

#include <cmath>

#include "corrmon/errors.hpp"
#include "corrmon/kalman.hpp"
#include "support.hpp"

using namespace corrmon;
using testing_support::Gen;
using testing_support::ref_step;
using testing_support::unit;

namespace {

CovarianceMatrix mat2(double a, double b, double c) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, b, c;
  return CovarianceMatrix(m);
}

double max_diff(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  return (x - y).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("covariance step examples") {
  const SystemModel model(CovarianceMatrix::identity(2));

  const auto p1 = covariance_step(CovarianceMatrix::identity(2), Index{0}, model);
  CHECK(max_diff(p1.matrix(), Eigen::Vector2d(1.0, 2.0).asDiagonal().toDenseMatrix()) < 1e-15);

  Eigen::MatrixXd expected(2, 2);
  expected << 1, 0, 0, 2.5;
  const auto p = mat2(2, 1, 2);
  CHECK(max_diff(covariance_step(p, Index{0}, model).matrix(), expected) < 1e-14);
  CHECK(max_diff(covariance_step(p, unit(2, 0), model).matrix(), expected) < 1e-14);

  const SystemModel scalar(CovarianceMatrix::diagonal(Eigen::VectorXd::Constant(1, 0.7)));
  const auto big = CovarianceMatrix::diagonal(Eigen::VectorXd::Constant(1, 123.0));
  CHECK(covariance_step(big, Index{0}, scalar)(0, 0) == 0.7);
}

TEST_CASE("covariance step matches the dense reference") {
  Gen gen(3);
  for (int k = 0; k < 200; ++k) {
    const int m = gen.integer(1, 6);
    const Eigen::MatrixXd q = gen.spd(m);
    Eigen::VectorXd a = Eigen::VectorXd::Ones(m);
    if (k % 2) for (int i = 0; i < m; ++i) a(i) = gen.uniform(1.0, 1.5);
    const SystemModel model(a, CovarianceMatrix(q));
    const Eigen::MatrixXd p = gen.spd(m, 0.5);
    const int j = gen.integer(0, m - 1);
    const Eigen::MatrixXd want = ref_step(p, unit(m, j), a, q);
    const double scale = std::max(1.0, want.cwiseAbs().maxCoeff());
    CHECK(max_diff(covariance_step(CovarianceMatrix(p), Index{j}, model).matrix(), want) <= 1e-12 * scale);

    Eigen::VectorXd c(m);
    for (int i = 0; i < m; ++i) c(i) = gen.normal();
    const Eigen::MatrixXd want_c = ref_step(p, c, a, q);
    CHECK(max_diff(covariance_step(CovarianceMatrix(p), c, model).matrix(), want_c) <= 1e-11 * scale);

    CHECK(std::abs(successor_trace(CovarianceMatrix(p), j, model) - want.trace()) <= 1e-11 * scale * m);
  }
}

TEST_CASE("covariance step errors") {
  const SystemModel model(CovarianceMatrix::identity(2));
  const auto p = CovarianceMatrix::diagonal(Eigen::Vector2d(0.0, 1.0));
  CHECK_THROWS_AS(covariance_step(p, Index{0}, model), SingularPivot);
  CHECK_THROWS_AS(covariance_step(p, unit(2, 0), model), SingularPivot);
  CHECK_THROWS_AS(covariance_step(p, Eigen::Vector2d::Zero().eval(), model), DomainError);
  CHECK_THROWS_AS(covariance_step(p, Index{2}, model), IndexError);
  CHECK_THROWS_AS(covariance_step(p, Index{-1}, model), IndexError);
  CHECK_THROWS_AS(covariance_step(CovarianceMatrix::identity(3), Index{0}, model), DomainError);
}

TEST_CASE("kalman update examples") {
  const SystemModel scalar(CovarianceMatrix::identity(1));
  KalmanState s1 = initial_kalman_state(scalar, true);
  s1.p = CovarianceMatrix::identity(1);
  CHECK(kalman_update(s1, 0, 3.7, scalar).xhat->coeff(0) == doctest::Approx(3.7));

  const SystemModel model(CovarianceMatrix::identity(2));
  KalmanState s2 = initial_kalman_state(model, true);
  const KalmanState n2 = kalman_update(s2, 0, 5.0, model);
  CHECK(n2.xhat->isApprox(Eigen::Vector2d(5.0, 0.0)));
  CHECK(n2.t == 1);

  KalmanState s3{0, mat2(2, 1, 2), Eigen::VectorXd::Zero(2)};
  const KalmanState n3 = kalman_update(s3, 0, 4.0, model);
  CHECK(n3.xhat->isApprox(Eigen::Vector2d(4.0, 2.0)));
  Eigen::MatrixXd expected(2, 2);
  expected << 1, 0, 0, 2.5;
  CHECK(max_diff(n3.p.matrix(), expected) < 1e-14);

  CHECK_THROWS_AS(kalman_update(initial_kalman_state(model), 0, 1.0, model), DomainError);
}

TEST_CASE("initial state") {
  const SystemModel model(make_symmetric_q(3, 0.4));
  const KalmanState s = initial_kalman_state(model);
  CHECK(s.p.matrix() == model.q().matrix());
  CHECK_FALSE(s.track_estimate());
  CHECK(initial_kalman_state(model, true).xhat->isZero(0.0));
}

TEST_CASE("expected error examples") {
  const SystemModel model(CovarianceMatrix::identity(2));
  const auto e = expected_error(CovarianceMatrix::diagonal(Eigen::Vector2d(1.0, 2.5)), model);
  CHECK(e(0) == 0.0);
  CHECK(e(1) == doctest::Approx(1.5));

  const SystemModel scalar(CovarianceMatrix::diagonal(Eigen::VectorXd::Constant(1, 2.0)));
  CHECK(expected_error(scalar.q(), scalar)(0) == 0.0);

  const SystemModel grow(Eigen::VectorXd::Constant(1, 2.0),
                         CovarianceMatrix::diagonal(Eigen::VectorXd::Constant(1, 1.0)));
  // p_prev = 3 unobserved: p_next = 4 * 3 + 1, error = (13 - 1) / 4 = 3.
  const auto p_next = CovarianceMatrix::diagonal(Eigen::VectorXd::Constant(1, 13.0));
  CHECK(expected_error(p_next, grow)(0) == doctest::Approx(3.0));

  // Roundoff negatives are clamped.
  const auto below = CovarianceMatrix::unchecked(Eigen::Vector2d(1.0 - 1e-12, 1.0).asDiagonal());
  CHECK(expected_error(below, model)(0) == 0.0);
}

TEST_CASE("recursion invariants along random schedules") {
  Gen gen(17);
  for (int k = 0; k < 40; ++k) {
    const int m = gen.integer(2, 8);
    const CovarianceMatrix q(gen.spd(m));
    const SystemModel model(q);
    const double lmin_q = testing_support::min_eig(q.matrix());
    CovarianceMatrix p = q;
    const auto schedule = gen.schedule(m, 500);
    for (std::size_t t = 0; t < schedule.size(); ++t) {
      const CovarianceMatrix next = covariance_step(p, schedule[t], model);
      // Exact symmetry after symmetrization.
      CHECK((next.matrix() - next.matrix().transpose()).cwiseAbs().maxCoeff() == 0.0);
      // Domination P_t >= Q.
      CHECK(testing_support::min_eig(next.matrix() - q.matrix()) >= -1e-9);
      // Monotone diagonal bound.
      for (int i = 0; i < m; ++i) CHECK(next(i, i) <= p(i, i) + q(i, i) + 1e-9);
      // Eigenvalue and trace floors once every sensor could have aged.
      if (t + 1 >= static_cast<std::size_t>(m)) {
        const Eigen::VectorXd ev = testing_support::eig_desc(next.matrix());
        for (int i = 0; i < m; ++i) CHECK(ev(i) >= (m - i) * lmin_q - 1e-9);
        CHECK(next.trace() >= m * (m + 1) / 2.0 * lmin_q - 1e-9);
      }
      p = next;
    }
  }
}

TEST_CASE("geometric eigenvalue floor for growing dynamics") {
  Gen gen(23);
  for (int k = 0; k < 40; ++k) {
    const int m = gen.integer(2, 5);
    const CovarianceMatrix q(gen.spd(m));
    const SystemModel model(Eigen::VectorXd::Constant(m, 2.0), q);
    const double lmin_q = testing_support::min_eig(q.matrix());
    const double l = 4.0;
    CovarianceMatrix p = q;
    const auto schedule = gen.schedule(m, m + 8);
    for (std::size_t t = 0; t < schedule.size(); ++t) {
      const CovarianceMatrix next = covariance_step(p, schedule[t], model);
      for (int i = 0; i < m; ++i) CHECK(next(i, i) <= l * p(i, i) + q(i, i) + 1e-9);
      if (t + 1 >= static_cast<std::size_t>(m)) {
        const Eigen::VectorXd ev = testing_support::eig_desc(next.matrix());
        for (int i = 0; i < m; ++i) {
          const double floor = lmin_q * (std::pow(l, m - i) - 1.0) / (l - 1.0);
          CHECK(ev(i) >= floor - 1e-9);
        }
      }
      p = next;
    }
  }
}
