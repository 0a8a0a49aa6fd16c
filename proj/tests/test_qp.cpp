#include <doctest.h>

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "cablelift/qp.hpp"
#include "support.hpp"

using namespace cablelift;
using namespace cablelift::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Enumerate every subset of the bounded coordinates as a candidate active
/// set; solve the resulting equality problem and keep the feasible candidate
/// with correctly signed multipliers.
VecXd active_set_enumeration_oracle(const DenseQp& qp) {
  const int n = static_cast<int>(qp.H.rows());
  std::vector<std::pair<int, bool>> bounds;  // (var, upper)
  for (int i = 0; i < n; ++i) {
    if (qp.lb(i) > -kInf) bounds.push_back({i, false});
    if (qp.ub(i) < kInf) bounds.push_back({i, true});
  }
  const int m = static_cast<int>(bounds.size());
  REQUIRE(m <= 12);

  VecXd best;
  double best_obj = kInf;
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<std::pair<int, bool>> act;
    for (int b = 0; b < m; ++b) {
      if (mask & (1 << b)) act.push_back(bounds[b]);
    }
    const int me = static_cast<int>(qp.A.rows());
    const int ma = static_cast<int>(act.size());
    MatXd kkt = MatXd::Zero(n + me + ma, n + me + ma);
    VecXd rhs(n + me + ma);
    kkt.topLeftCorner(n, n) = qp.H;
    rhs.head(n) = -qp.g;
    if (me) {
      kkt.block(n, 0, me, n) = qp.A;
      kkt.block(0, n, n, me) = qp.A.transpose();
      rhs.segment(n, me) = qp.b;
    }
    for (int a = 0; a < ma; ++a) {
      kkt(n + me + a, act[a].first) = 1.0;
      kkt(act[a].first, n + me + a) = 1.0;
      rhs(n + me + a) = act[a].second ? qp.ub(act[a].first) : qp.lb(act[a].first);
    }
    Eigen::FullPivLU<MatXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const VecXd sol = lu.solve(rhs);
    const VecXd z = sol.head(n);

    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      ok = z(i) >= qp.lb(i) - 1e-9 && z(i) <= qp.ub(i) + 1e-9;
    }
    for (int a = 0; a < ma && ok; ++a) {
      const double mu = sol(n + me + a);
      ok = act[a].second ? mu >= -1e-9 : mu <= 1e-9;
    }
    if (!ok) continue;
    const double obj = 0.5 * z.dot(qp.H * z) + qp.g.dot(z);
    if (obj < best_obj - 1e-12) {
      best_obj = obj;
      best = z;
    }
  }
  REQUIRE(best.size() == n);
  return best;
}

DenseQp random_bounded_qp(int n, int n_bounds) {
  DenseQp qp;
  MatXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = uniform(-1.0, 1.0);
  }
  qp.H = m.transpose() * m + 0.5 * MatXd::Identity(n, n);
  qp.g = VecXd::NullaryExpr(n, [](int) { return uniform(-2.0, 2.0); });
  qp.A.resize(0, n);
  qp.b.resize(0);
  qp.lb = VecXd::Constant(n, -kInf);
  qp.ub = VecXd::Constant(n, kInf);
  for (int b = 0; b < n_bounds; ++b) {
    const int var = static_cast<int>(uniform(0.0, n)) % n;
    if (uniform(0.0, 1.0) < 0.5) {
      qp.lb(var) = uniform(-1.0, 0.5);
    } else {
      qp.ub(var) = uniform(-0.5, 1.0);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (qp.lb(i) > qp.ub(i)) std::swap(qp.lb(i), qp.ub(i));
  }
  return qp;
}

OcpQp random_ocp_qp(int nx, int nu, int horizon) {
  OcpQp qp;
  const auto psd = [](int d) {
    MatXd m(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) m(i, j) = uniform(-1.0, 1.0);
    }
    return MatXd(m.transpose() * m + 0.1 * MatXd::Identity(d, d));
  };
  const auto rand_mat = [](int r, int c) {
    MatXd m(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) m(i, j) = uniform(-0.5, 0.5);
    }
    return m;
  };
  for (int k = 0; k < horizon; ++k) {
    OcpQpStage s;
    s.Qxx = psd(nx);
    s.Ruu = psd(nu);
    s.Qxu = 0.1 * rand_mat(nx, nu);
    s.qx = rand_mat(nx, 1);
    s.ru = rand_mat(nu, 1);
    s.A = MatXd::Identity(nx, nx) + 0.1 * rand_mat(nx, nx);
    s.B = rand_mat(nx, nu);
    s.d = rand_mat(nx, 1);
    qp.stages.push_back(std::move(s));
  }
  qp.QN = psd(nx);
  qp.qN = rand_mat(nx, 1);
  qp.x0_shift = rand_mat(nx, 1);
  return qp;
}

}  // namespace

TEST_CASE("unconstrained 2-variable closed form") {
  DenseQp qp;
  qp.H = Vec3d(2, 4, 0).head<2>().asDiagonal();
  qp.g = -Eigen::Vector2d(2, 4);
  qp.A.resize(0, 2);
  qp.b.resize(0);
  const auto res = qp_solve(qp);
  CHECK(res.status == QpStatus::Solved);
  CHECK((res.z - Eigen::Vector2d(1, 1)).norm() < 1e-10);
  CHECK(res.kkt_residual < 1e-10);
}

TEST_CASE("active upper bound with multiplier 2") {
  // min (x-2)^2 s.t. x <= 1  ->  x = 1, bound multiplier 2.
  DenseQp qp;
  qp.H = MatXd::Constant(1, 1, 2.0);
  qp.g = VecXd::Constant(1, -4.0);
  qp.A.resize(0, 1);
  qp.b.resize(0);
  qp.lb = VecXd::Constant(1, -kInf);
  qp.ub = VecXd::Constant(1, 1.0);
  const auto res = qp_solve(qp);
  CHECK(res.status == QpStatus::Solved);
  CHECK(res.z(0) == doctest::Approx(1.0));
  CHECK(res.bound_multipliers(0) == doctest::Approx(2.0));
}

TEST_CASE("equality-constrained solve") {
  // min |z|^2 s.t. z_0 + z_1 = 2  ->  z = [1, 1].
  DenseQp qp;
  qp.H = 2.0 * MatXd::Identity(2, 2);
  qp.g = VecXd::Zero(2);
  qp.A = MatXd::Constant(1, 2, 1.0);
  qp.b = VecXd::Constant(1, 2.0);
  const auto res = qp_solve(qp);
  CHECK((res.z - Eigen::Vector2d(1, 1)).norm() < 1e-10);
}

TEST_CASE("inconsistent equalities raise QpInfeasible") {
  DenseQp qp;
  qp.H = MatXd::Identity(2, 2);
  qp.g = VecXd::Zero(2);
  qp.A = MatXd::Ones(2, 2);
  qp.b.resize(2);
  qp.b << 1.0, 3.0;  // same row, different right-hand sides
  CHECK_THROWS_AS(qp_solve(qp), QpInfeasible);
}

TEST_CASE("random bounded QPs match the active-set enumeration oracle") {
  for (int trial = 0; trial < 100; ++trial) {
    const DenseQp qp = random_bounded_qp(10, 6);
    const auto res = qp_solve(qp);
    REQUIRE(res.status == QpStatus::Solved);
    const VecXd want = active_set_enumeration_oracle(qp);
    CHECK((res.z - want).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(res.kkt_residual < 1e-8);
  }
}

TEST_CASE("qp_solve is deterministic") {
  const DenseQp qp = random_bounded_qp(10, 6);
  const auto a = qp_solve(qp);
  const auto b = qp_solve(qp);
  CHECK((a.z.array() == b.z.array()).all());
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("riccati sweep matches the dense KKT solve") {
  for (int trial = 0; trial < 10; ++trial) {
    const OcpQp qp = random_ocp_qp(7, 3, 6);
    const auto ric = qp_solve(qp, 1e-10);
    CHECK(ric.kkt_residual < 1e-8);

    const auto dense = qp_solve(to_dense(qp));
    REQUIRE(dense.status == QpStatus::Solved);
    const int nx = 7, nu = 3, n_stage = 6;
    for (int k = 0; k <= n_stage; ++k) {
      CHECK((ric.dx[k] - dense.z.segment(nx * k, nx)).lpNorm<Eigen::Infinity>() < 1e-7);
    }
    for (int k = 0; k < n_stage; ++k) {
      CHECK((ric.du[k] - dense.z.segment(nx * (n_stage + 1) + nu * k, nu))
                .lpNorm<Eigen::Infinity>() < 1e-7);
    }
  }
}

TEST_CASE("riccati handles the zero-horizon-cost degenerate stage") {
  // One stage, no state cost beyond the terminal block.
  OcpQp qp = random_ocp_qp(4, 2, 1);
  qp.stages[0].Qxx.setZero();
  qp.stages[0].qx.setZero();
  const auto ric = qp_solve(qp, 1e-10);
  CHECK(ric.kkt_residual < 1e-8);
}

TEST_CASE("max iteration budget reports MaxIterations") {
  DenseQp qp = random_bounded_qp(10, 6);
  QpSettings s;
  s.max_iterations = 1;
  const auto res = qp_solve(qp, s);
  // Either it solved in one pass or it reports hitting the budget.
  CHECK((res.status == QpStatus::Solved || res.status == QpStatus::MaxIterations));
  CHECK(res.z.size() == 10);
}
