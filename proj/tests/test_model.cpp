#include <doctest.h>

#include <cmath>

#include "corrmon/errors.hpp"
#include "corrmon/model.hpp"
#include "support.hpp"

using namespace corrmon;
using testing_support::Gen;

TEST_CASE("symmetric scenario matrix") {
  CHECK(make_symmetric_q(2, 0.0).matrix().isApprox(Eigen::MatrixXd::Identity(2, 2)));

  const auto q = make_symmetric_q(3, 0.8);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(q(i, j) == (i == j ? 1.0 : 0.8));

  CHECK_THROWS_AS(make_symmetric_q(2, -2.0), DomainError);
  CHECK_THROWS_AS(make_symmetric_q(3, -0.5), DomainError);  // 1 + rho (m-1) = 0
  CHECK_THROWS_AS(make_symmetric_q(3, 1.5), DomainError);
  CHECK_NOTHROW(make_symmetric_q(4, 1.0));
  CHECK(make_symmetric_q(1, 0.3)(0, 0) == 1.0);
  CHECK_THROWS_AS(make_symmetric_q(0, 0.1), DomainError);
}

TEST_CASE("symmetric matrices pass the covariance invariants over a grid") {
  for (int m = 2; m <= 10; ++m) {
    for (int k = 0; k <= 9; ++k) {
      const double rho = 0.1 * k;
      CHECK_NOTHROW(validate_covariance(make_symmetric_q(m, rho).matrix()));
    }
  }
}

TEST_CASE("block scenario matrix") {
  const auto q0 = make_block_q(2, 0.0);
  CHECK(q0.matrix().isApprox(Eigen::Vector2d(1.0, 100.0).asDiagonal().toDenseMatrix()));

  const auto q = make_block_q(4, 0.8);
  Eigen::MatrixXd expected(4, 4);
  expected << 1, .8, 8, 8,
              .8, 1, 8, 8,
              8, 8, 100, 80,
              8, 8, 80, 100;
  CHECK((q.matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(make_block_q(3, 0.5), DomainError);

  // Near-singular case: classify with an independent eigendecomposition.
  Eigen::MatrixXd near(4, 4);
  const double r = 0.999;
  near << 1, r, 10 * r, 10 * r,
          r, 1, 10 * r, 10 * r,
          10 * r, 10 * r, 100, 100 * r,
          10 * r, 10 * r, 100 * r, 100;
  const Eigen::VectorXd ev = testing_support::eig_desc(near);
  if (ev(3) >= -1e-9 * ev.cwiseAbs().maxCoeff()) {
    CHECK_NOTHROW(make_block_q(4, r));
  } else {
    CHECK_THROWS_AS(make_block_q(4, r), DomainError);
  }
}

TEST_CASE("paired scenario has rank m/2") {
  const auto q = make_paired_q(6, 0.5);
  CHECK(q.matrix().fullPivLu().rank() == 3);
  CHECK(q(0, 1) == 1.0);
  CHECK(q(0, 2) == 0.5);
  CHECK_THROWS_AS(make_paired_q(5, 0.5), DomainError);
}

TEST_CASE("covariance invariants are enforced") {
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(CovarianceMatrix{asym}, DomainError);

  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK_THROWS_AS(CovarianceMatrix{indefinite}, DomainError);

  Eigen::MatrixXd neg_diag(1, 1);
  neg_diag << -1;
  CHECK_THROWS_AS(CovarianceMatrix{neg_diag}, DomainError);

  Eigen::MatrixXd nan_entry = Eigen::MatrixXd::Identity(2, 2);
  nan_entry(0, 0) = std::nan("");
  CHECK_THROWS_AS(CovarianceMatrix{nan_entry}, DomainError);

  CHECK_THROWS_AS(CovarianceMatrix{Eigen::MatrixXd(2, 3)}, DomainError);
  CHECK_NOTHROW(CovarianceMatrix{Eigen::MatrixXd::Zero(2, 2)});

  // Roundoff-level negative eigenvalue is tolerated.
  Eigen::MatrixXd almost(2, 2);
  almost << 1, 1 + 1e-13, 1 + 1e-13, 1;
  CHECK_NOTHROW(CovarianceMatrix{almost});
}

TEST_CASE("system model validation") {
  const auto q = CovarianceMatrix::identity(2);
  CHECK(SystemModel(q).identity_dynamics());
  CHECK_FALSE(SystemModel(Eigen::Vector2d(1.0, 2.0), q).identity_dynamics());
  CHECK(SystemModel(Eigen::Vector2d(1.0, 1.0), q).identity_dynamics());
  CHECK_THROWS_AS(SystemModel(Eigen::Vector2d(0.5, 1.0), q), DomainError);
  CHECK_THROWS_AS(SystemModel(Eigen::Vector3d(1.0, 1.0, 1.0), q), DomainError);
}

TEST_CASE("noise factor reproduces Q") {
  const auto f_id = noise_factor(CovarianceMatrix::identity(2));
  CHECK((f_id * f_id.transpose() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  const auto f_ones = noise_factor(CovarianceMatrix(Eigen::MatrixXd::Ones(2, 2)));
  REQUIRE(f_ones.cols() == 1);
  CHECK(std::abs(std::abs(f_ones(0, 0)) - 1.0) < 1e-12);
  CHECK(std::abs(f_ones(0, 0) - f_ones(1, 0)) < 1e-12);

  const auto q = make_symmetric_q(3, 0.5);
  const auto f = noise_factor(q);
  CHECK((f * f.transpose() - q.matrix()).cwiseAbs().maxCoeff() < 1e-12);

  CHECK(noise_factor(CovarianceMatrix(Eigen::MatrixXd::Zero(3, 3))).cols() == 0);
}

TEST_CASE("noise factor roundtrip on random PSD matrices") {
  Gen gen(11);
  for (int k = 0; k < 100; ++k) {
    const int m = gen.integer(1, 10);
    const int r = gen.integer(1, m);
    const Eigen::MatrixXd q = (k % 2 == 0) ? gen.spd(m) : gen.psd_rank(m, r);
    const auto f = noise_factor(CovarianceMatrix(q));
    CHECK((f * f.transpose() - q).cwiseAbs().maxCoeff() <= 1e-9);
    if (k % 2 == 1) CHECK(f.cols() == r);
  }
}

TEST_CASE("step_process without noise is deterministic") {
  RandomSource rng(1);
  const SystemModel still(CovarianceMatrix(Eigen::MatrixXd::Zero(2, 2)));
  ProcessState s{0, Eigen::Vector2d(1.0, 2.0)};
  const ProcessState n1 = step_process(s, still, rng);
  CHECK(n1.t == 1);
  CHECK(n1.x == Eigen::Vector2d(1.0, 2.0));

  const SystemModel scaled(Eigen::Vector2d(2.0, 3.0), CovarianceMatrix(Eigen::MatrixXd::Zero(2, 2)));
  const ProcessState n2 = step_process(ProcessState{0, Eigen::Vector2d(1.0, 1.0)}, scaled, rng);
  CHECK(n2.x == Eigen::Vector2d(2.0, 3.0));

  CHECK_THROWS_AS(step_process(ProcessState{0, Eigen::Vector3d::Zero()}, still, rng), DomainError);
  CHECK(initial_state(still).x == Eigen::Vector2d::Zero());
}

TEST_CASE("identity noise increments have identity sample covariance") {
  const SystemModel model(CovarianceMatrix::identity(2));
  const Eigen::MatrixXd f = noise_factor(model.q());
  RandomSource rng(42);
  const int n = 100000;
  ProcessState s = initial_state(model);
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  for (int k = 0; k < n; ++k) {
    const ProcessState next = step_process(s, model, f, rng);
    const Eigen::Vector2d w = next.x - s.x;
    acc += w * w.transpose();
    s = next;
  }
  acc /= n;
  // Standard errors: sqrt(2/n) for variances, sqrt(1/n) for covariances.
  CHECK(std::abs(acc(0, 0) - 1.0) <= 3.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(acc(1, 1) - 1.0) <= 3.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(acc(0, 1)) <= 3.0 * std::sqrt(1.0 / n));
}

TEST_CASE("correlated increment covariance converges to Q") {
  Gen gen(5);
  for (int trial = 0; trial < 3; ++trial) {
    const int m = 2 + trial;
    const CovarianceMatrix q(gen.spd(m));
    const SystemModel model(q);
    const Eigen::MatrixXd f = noise_factor(q);
    RandomSource rng(100 + trial);
    const int n = 20000;
    ProcessState s = initial_state(model);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < n; ++k) {
      const ProcessState next = step_process(s, model, f, rng);
      const Eigen::VectorXd w = next.x - s.x;
      acc += w * w.transpose();
      s = next;
    }
    acc /= n;
    const double scale = q.diag().maxCoeff();
    CHECK((acc - q.matrix()).cwiseAbs().maxCoeff() <= 5.0 * std::sqrt(scale * scale / n));
  }
}

TEST_CASE("random source streams") {
  RandomSource a(9);
  RandomSource b(9);
  for (int k = 0; k < 10; ++k) CHECK(a.normal() == b.normal());

  const RandomSource root(3);
  RandomSource s1 = root.split({1, 2});
  RandomSource s2 = root.split({1, 2});
  RandomSource s3 = root.split({2, 1});
  const double v1 = s1.uniform();
  CHECK(v1 == s2.uniform());
  CHECK(v1 != s3.uniform());
  CHECK(v1 >= 0.0);
  CHECK(v1 < 1.0);
}
