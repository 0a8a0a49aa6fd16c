#include <doctest.h>

#include <cmath>

#include "cablelift/model.hpp"
#include "cablelift/ocp.hpp"
#include "cablelift/simloop.hpp"
#include "support.hpp"

using namespace cablelift;
using namespace cablelift::testing;

namespace {

OcpProblem demo_problem() {
  Scenario s = Scenario::demo_quad();
  return s.build_ocp();
}

OcpProblem equilibrium_problem() {
  Scenario s = Scenario::demo_quad();
  OcpProblem p = s.build_ocp();
  LoadCableState x_eq(4);
  ControlInput u_eq(4);
  for (int i = 0; i < 4; ++i) u_eq.tension(i) = 9.81;
  p.x0 = x_eq;
  p.reference = ReferenceTrajectory::constant(x_eq.raw(), u_eq.raw(), p.horizon);
  return p;
}

VecXd stack_trajectory(const OcpNlp& nlp, const std::vector<VecXd>& xs,
                       const std::vector<VecXd>& us) {
  VecXd z(nlp.num_primal());
  for (int k = 0; k <= nlp.horizon(); ++k) z.segment(nlp.x_offset(k), nlp.nx()) = xs[k];
  for (int k = 0; k < nlp.horizon(); ++k) z.segment(nlp.u_offset(k), nlp.nu()) = us[k];
  return z;
}

}  // namespace

TEST_CASE("stage_cost basics") {
  const auto p = demo_problem();
  const VecXd x_r = p.reference.x_nodes[0];
  const VecXd u_r = p.reference.u_nodes[0];
  CHECK(stage_cost(x_r, u_r, x_r, u_r, p.weights) == 0.0);

  VecXd x = x_r;
  x.segment<3>(0) += Vec3d(1, 0, 0);
  CHECK(stage_cost(x, u_r, x_r, u_r, p.weights) == doctest::Approx(200.0));

  // Small yaw offset: cost ~ Q_q_zz (theta/2)^2.
  const double theta = 1e-3;
  VecXd x_rot = x_r;
  x_rot.segment<4>(6) = quat_multiply<double>(
      Quatd(x_r.segment<4>(6)), quat_from_axis_angle<double>(Vec3d::UnitZ(), theta));
  CHECK(stage_cost(x_rot, u_r, x_r, u_r, p.weights) ==
        doctest::Approx(500.0 * theta * theta / 4.0).epsilon(1e-5));
}

TEST_CASE("terminal weights default to stage weights") {
  OcpWeights w;
  CHECK((w.q_p_e - w.q_p).norm() == 0.0);
  CHECK((w.q_q_e - w.q_q).norm() == 0.0);
}

TEST_CASE("shooting_residual basics") {
  const auto p = demo_problem();
  const LoadCableState x = random_state(p.cfg);
  const ControlInput u = random_input(p.cfg);
  const LoadCableState next = rk4_step(x, u, p.cfg, p.dt);

  // Consistent pair: zero residual.
  CHECK(shooting_residual(x.raw(), u.raw(), next.raw(), p.cfg, p.dt)
            .lpNorm<Eigen::Infinity>() < 1e-12);

  // Hover equilibrium at both nodes.
  const auto pe = equilibrium_problem();
  CHECK(shooting_residual(pe.x0.raw(), pe.reference.u_nodes[0], pe.x0.raw(), pe.cfg,
                          pe.dt)
            .lpNorm<Eigen::Infinity>() < 1e-12);

  // Perturbing one coordinate of x_{k+1} moves exactly that residual entry.
  for (int coord : {0, 4, 12, 20, 40}) {
    VecXd x1 = next.raw();
    x1(coord) += 1e-3;
    const VecXd r = shooting_residual(x.raw(), u.raw(), x1, p.cfg, p.dt);
    CHECK(r(coord) == doctest::Approx(-1e-3).epsilon(1e-9));
    VecXd r_zeroed = r;
    r_zeroed(coord) = 0.0;
    CHECK(r_zeroed.lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("shooting_residual aligns quaternion hemispheres") {
  const auto p = demo_problem();
  const LoadCableState x = random_state(p.cfg);
  const ControlInput u = random_input(p.cfg);
  VecXd next = rk4_step(x, u, p.cfg, p.dt).raw();
  next.segment<4>(6) *= -1.0;  // same attitude, opposite sign
  CHECK(shooting_residual(x.raw(), u.raw(), next, p.cfg, p.dt)
            .lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("soft_constraint_terms") {
  const auto p = equilibrium_problem();
  const LoadCableState x = p.x0;
  ControlInput u = ControlInput::from_raw(p.reference.u_nodes[0]);

  // Fully feasible hover: no slack, no penalty.
  const auto feasible = soft_constraint_terms(x, u, p.cfg, p.weights);
  CHECK(feasible.penalty == 0.0);
  for (const double s : feasible.slacks) CHECK(s == 0.0);

  // A unit tension violation and nothing else: slack 1, penalty l1 + l2.
  // (Raising t_min isolates the tension family; changing the tension itself
  // would also move the thrust and interference margins through the
  // dynamics.)
  OcpProblem tight = p;
  tight.cfg.bounds.t_min(0) = u.tension(0) + 1.0;
  const auto violated = soft_constraint_terms(x, u, tight.cfg, tight.weights);
  const auto& sw = p.weights.slack[static_cast<int>(ConstraintFamily::Tension)];
  CHECK(violated.penalty == doctest::Approx(sw.l1 + sw.l2));
  double max_slack = 0.0;
  for (const double s : violated.slacks) max_slack = std::max(max_slack, s);
  CHECK(max_slack == doctest::Approx(1.0));

  // Monotone in violation depth.
  double prev = 0.0;
  for (double dt_min = 0.0; dt_min < 5.0; dt_min += 0.5) {
    OcpProblem sweep = p;
    sweep.cfg.bounds.t_min(0) = u.tension(0) + dt_min;
    const double pen = soft_constraint_terms(x, u, sweep.cfg, sweep.weights).penalty;
    CHECK(pen >= prev);
    prev = pen;
  }
}

TEST_CASE("build_nlp layout arithmetic") {
  const auto p = demo_problem();
  const OcpNlp nlp = build_nlp(p);
  CHECK(nlp.nx() == 49);   // 13 + 36
  CHECK(nlp.nu() == 16);
  CHECK(nlp.num_primal() == 21 * 49 + 20 * 16);  // 1349
  CHECK(nlp.num_eq() == 21 * 49);
  CHECK(nlp.sparsity().defect_cols(0) == 2 * 49 + 16);

  OcpProblem tiny = p;
  tiny.horizon = 1;
  tiny.reference = ReferenceTrajectory::constant(p.reference.x_nodes[0],
                                                 p.reference.u_nodes[0], 1);
  const OcpNlp nlp1 = build_nlp(tiny);
  CHECK(nlp1.num_eq() == 2 * 49);  // IC + one defect
}

TEST_CASE("objective is zero on a feasible reference trajectory") {
  const auto p = equilibrium_problem();
  const OcpNlp nlp = build_nlp(p);
  const VecXd z = stack_trajectory(
      nlp, std::vector<VecXd>(p.horizon + 1, p.reference.x_nodes[0]),
      std::vector<VecXd>(p.horizon, p.reference.u_nodes[0]));
  CHECK(nlp.objective(z) == 0.0);
  CHECK(nlp.equality_residuals(z).lpNorm<Eigen::Infinity>() < 1e-12);
  for (const double s : VecXd(nlp.eliminate_slacks(z))) CHECK(s == 0.0);
}

TEST_CASE("objective is invariant under per-node quaternion sign flips") {
  const auto p = demo_problem();
  const OcpNlp nlp = build_nlp(p);

  std::vector<VecXd> xs, us;
  for (int k = 0; k <= p.horizon; ++k) xs.push_back(random_state(p.cfg).raw());
  for (int k = 0; k < p.horizon; ++k) us.push_back(random_input(p.cfg).raw());
  const VecXd z = stack_trajectory(nlp, xs, us);
  const double j0 = nlp.objective(z);

  for (int flip_node : {0, 3, 20}) {
    VecXd zf = z;
    zf.segment<4>(nlp.x_offset(flip_node) + 6) *= -1.0;
    CHECK(nlp.objective(zf) == doctest::Approx(j0).epsilon(1e-12));
  }
}

TEST_CASE("analytic objective gradient matches finite differences") {
  const auto p = demo_problem();
  const OcpNlp nlp = build_nlp(p);

  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<VecXd> xs, us;
    for (int k = 0; k <= p.horizon; ++k) xs.push_back(random_state(p.cfg).raw());
    for (int k = 0; k < p.horizon; ++k) us.push_back(random_input(p.cfg).raw());
    const VecXd z = stack_trajectory(nlp, xs, us);

    const VecXd analytic = nlp.objective_gradient(z);
    const auto f = [&](const VecXd& zz) { return nlp.objective(zz); };
    const VecXd fd = fd_gradient(f, z, 1e-6);
    const double scale = std::max(1.0, fd.lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (analytic - fd).lpNorm<Eigen::Infinity>() / scale);
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("reference validation catches inconsistent node counts") {
  auto p = demo_problem();
  p.reference.u_nodes.pop_back();
  CHECK_THROWS_AS(p.validate(), InvalidConfiguration);
}
