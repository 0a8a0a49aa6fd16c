#include "cablelift/solver.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "cablelift/geometry.hpp"
#include "cablelift/model.hpp"

namespace cablelift {

namespace {

constexpr int kQ = 6;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

VecXd state_weights(int n, const Vec3d& q_p, const Vec3d& q_v, const Vec3d& q_q,
                    const Vec3d& q_w, const Vec3d& q_s, const Vec3d& q_r,
                    const Vec3d& q_rdot) {
  VecXd w(12 + 9 * n);
  w.segment<3>(0) = q_p;
  w.segment<3>(3) = q_v;
  w.segment<3>(6) = q_q;
  w.segment<3>(9) = q_w;
  for (int i = 0; i < n; ++i) {
    w.segment<3>(12 + 9 * i) = q_s;
    w.segment<3>(15 + 9 * i) = q_r;
    w.segment<3>(18 + 9 * i) = q_rdot;
  }
  return w;
}

VecXd input_weights(int n, const Vec3d& r_c, double r_t) {
  VecXd w(4 * n);
  for (int i = 0; i < n; ++i) {
    w.segment<3>(4 * i) = r_c;
    w(4 * i + 3) = r_t;
  }
  return w;
}

/// Gauss-Newton blocks of the weighted tracking residual at one node:
/// H = 2 scale J' W J, g = 2 scale J' W r. J is identity except for the
/// attitude block, where the error quaternion is linear in q with Jacobian
/// rows 1..3 of Q(q_r^-1).
void tracking_terms(const VecXd& x, const VecXd& x_r, const VecXd& w, double scale,
                    MatXd& h, VecXd& g) {
  const int nx = static_cast<int>(x.size());
  h.setZero(nx, nx);
  g.setZero(nx);

  VecXd r(nx - 1);
  r.segment<6>(0) = x.segment<6>(0) - x_r.segment<6>(0);
  const Quatd q_ref = x_r.segment<4>(kQ);
  const Quatd err =
      quat_multiply<double>(quat_conjugate<double>(q_ref), Quatd(x.segment<4>(kQ)));
  r.segment<3>(6) = err.tail<3>();
  r.tail(nx - 10) = x.tail(nx - 10) - x_r.tail(nx - 10);

  const Eigen::Matrix<double, 3, 4> jq =
      quat_product_matrix<double>(quat_conjugate<double>(q_ref)).bottomRows<3>();

  for (int i = 0; i < 6; ++i) {
    h(i, i) = 2.0 * scale * w(i);
    g(i) = 2.0 * scale * w(i) * r(i);
  }
  const Vec3d wq = w.segment<3>(6);
  h.block<4, 4>(kQ, kQ) = jq.transpose() * (2.0 * scale * wq).asDiagonal() * jq;
  g.segment<4>(kQ) = jq.transpose() * (2.0 * scale * wq.cwiseProduct(r.segment<3>(6)));
  for (int i = 9; i < nx - 1; ++i) {
    h(i + 1, i + 1) = 2.0 * scale * w(i);
    g(i + 1) = 2.0 * scale * w(i) * r(i);
  }
}

}  // namespace

struct SqpSolver::Linearization {
  struct Stage {
    MatXd A, B;
    VecXd d;
    MatXd Qxx, Qxu, Ruu;
    VecXd qx, ru;
    std::vector<StageMargin> margins;
  };
  std::vector<Stage> stages;
  MatXd QN;
  VecXd qN;
  std::vector<StageMargin> terminal_margins;
  VecXd x0_shift;
};

SqpSolver::SqpSolver(OcpProblem problem, SolverSettings settings)
    : problem_(std::move(problem)), settings_(settings), nlp_(problem_) {
  settings_.validate();
}

void SqpSolver::cold_start(const LoadCableState& x0) {
  const int n_nodes = problem_.horizon;
  x_guess_.assign(n_nodes + 1, VecXd());
  u_guess_.assign(n_nodes, VecXd());
  LoadCableState x = x0;
  x_guess_[0] = x.raw();
  for (int k = 0; k < n_nodes; ++k) {
    u_guess_[k] = problem_.reference.u_nodes[k];
    try {
      x = rk4_step(x, ControlInput::from_raw(u_guess_[k]), problem_.cfg, problem_.dt);
    } catch (const IntegrationFailure& e) {
      has_guess_ = false;
      throw LinearizationFailure(std::string("cold_start: ") + e.what(), k);
    }
    x_guess_[k + 1] = x.raw();
  }
  has_guess_ = true;
}

void SqpSolver::shift_guess() {
  const int n_nodes = problem_.horizon;
  for (int k = 0; k < n_nodes; ++k) x_guess_[k] = x_guess_[k + 1];
  for (int k = 0; k + 1 < n_nodes; ++k) u_guess_[k] = u_guess_[k + 1];
  // tail duplicated
}

bool SqpSolver::linearize(Linearization& lin) const {
  const auto& p = problem_;
  const int n_nodes = p.horizon;
  const int nx = nlp_.nx();
  const int nu = nlp_.nu();

  const VecXd wx = state_weights(p.cfg.n, p.weights.q_p, p.weights.q_v, p.weights.q_q,
                                 p.weights.q_w, p.weights.q_s, p.weights.q_r,
                                 p.weights.q_rdot);
  const VecXd wx_e = state_weights(p.cfg.n, p.weights.q_p_e, p.weights.q_v_e,
                                   p.weights.q_q_e, p.weights.q_w_e, p.weights.q_s_e,
                                   p.weights.q_r_e, p.weights.q_rdot_e);
  const VecXd wu = input_weights(p.cfg.n, p.weights.r_c, p.weights.r_t);

  lin.stages.resize(n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    auto& st = lin.stages[k];
    const LoadCableState xk = LoadCableState::from_raw(x_guess_[k]);
    const ControlInput uk = ControlInput::from_raw(u_guess_[k]);

    StepWithSensitivity step = [&] {
      try {
        return rk4_step_with_sensitivity(xk, uk, p.cfg, p.dt);
      } catch (const IntegrationFailure& e) {
        throw LinearizationFailure(std::string("linearize: ") + e.what(), k);
      }
    }();
    st.A = std::move(step.sens.A);
    st.B = std::move(step.sens.B);
    st.d = step.next.raw() - x_guess_[k + 1];
    if (step.next.raw().segment<4>(kQ).dot(x_guess_[k + 1].segment<4>(kQ)) < 0.0) {
      st.d.segment<4>(kQ) =
          -step.next.raw().segment<4>(kQ) - x_guess_[k + 1].segment<4>(kQ);
      st.A.middleRows<4>(kQ) *= -1.0;
      st.B.middleRows<4>(kQ) *= -1.0;
    }
    if (!st.A.allFinite() || !st.B.allFinite() || !st.d.allFinite()) {
      throw LinearizationFailure("linearize: non-finite defect Jacobian", k);
    }

    tracking_terms(x_guess_[k], p.reference.x_nodes[k], wx, p.dt, st.Qxx, st.qx);
    st.Ruu = (2.0 * p.dt * wu).asDiagonal();
    st.ru = 2.0 * p.dt * wu.cwiseProduct(u_guess_[k] - p.reference.u_nodes[k]);
    st.Qxu = MatXd::Zero(nx, nu);

    st.margins = stage_margins(xk, &uk, p.cfg, /*with_gradients=*/true);
  }

  tracking_terms(x_guess_[n_nodes], p.reference.x_nodes[n_nodes], wx_e, 1.0, lin.QN,
                 lin.qN);
  lin.terminal_margins = stage_margins(LoadCableState::from_raw(x_guess_[n_nodes]),
                                       nullptr, p.cfg, /*with_gradients=*/true);

  lin.x0_shift = problem_.x0.raw() - x_guess_[0];
  return true;
}

OcpSolution SqpSolver::package_solution() const {
  OcpSolution sol;
  const int n_nodes = problem_.horizon;
  sol.states.reserve(n_nodes + 1);
  sol.inputs.reserve(n_nodes);
  for (int k = 0; k <= n_nodes; ++k) {
    sol.states.push_back(LoadCableState::from_raw(x_guess_[k]));
  }
  for (int k = 0; k < n_nodes; ++k) {
    sol.inputs.push_back(ControlInput::from_raw(u_guess_[k]));
  }

  VecXd z(nlp_.num_primal());
  for (int k = 0; k <= n_nodes; ++k) z.segment(nlp_.x_offset(k), nlp_.nx()) = x_guess_[k];
  for (int k = 0; k < n_nodes; ++k) z.segment(nlp_.u_offset(k), nlp_.nu()) = u_guess_[k];
  sol.objective = nlp_.objective(z);

  sol.node_slacks.resize(n_nodes + 1);
  sol.node_reports.resize(n_nodes + 1);
  for (int k = 0; k <= n_nodes; ++k) {
    const bool has_u = k < n_nodes;
    const auto margins = stage_margins(sol.states[k], has_u ? &sol.inputs[k] : nullptr,
                                       problem_.cfg, false);
    sol.node_slacks[k].reserve(margins.size());
    for (const auto& m : margins) sol.node_slacks[k].push_back(std::max(0.0, -m.value));
    // Node N report reuses the last input (zero-order-hold extension).
    sol.node_reports[k] =
        evaluate_all(sol.states[k], has_u ? sol.inputs[k] : sol.inputs[n_nodes - 1],
                     problem_.cfg);
  }
  return sol;
}

bool SqpSolver::sqp_iteration(const LoadCableState& x0, SolveStats& stats) {
  const int n_nodes = problem_.horizon;
  const int nx = nlp_.nx();
  const int nu = nlp_.nu();

  const auto t_lin = Clock::now();
  Linearization lin;
  linearize(lin);
  stats.linearize_ms += ms_since(t_lin);

  // --- penalty QP with slack variables, solved by an interior point method --
  // Each margin row m0 + a'dz + s >= 0 carries a slack s >= 0 priced
  // l1 s + l2 s^2; the IPM eliminates the stage-local (s, duals) triples onto
  // the state-input blocks and runs one Riccati sweep per iteration.
  const auto t_qp = Clock::now();

  OcpQp qp;
  qp.x0_shift = lin.x0_shift;
  qp.stages.resize(n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    auto& st = lin.stages[k];
    auto& qs = qp.stages[k];
    qs.A = st.A;
    qs.B = st.B;
    qs.d = st.d;
    qs.Qxx = st.Qxx;
    qs.Qxu = st.Qxu;
    qs.Ruu = st.Ruu;
    qs.qx = st.qx;
    qs.ru = st.ru;
  }
  qp.QN = lin.QN;
  qp.qN = lin.qN;

  std::vector<SoftMargin> soft;
  soft.reserve((n_nodes + 1) * lin.stages[0].margins.size());
  for (int k = 0; k < n_nodes; ++k) {
    for (const auto& m : lin.stages[k].margins) {
      const auto& sw = problem_.weights.slack[static_cast<int>(m.family)];
      SoftMargin row;
      row.node = k;
      row.value = m.value;
      row.grad_x = m.grad.head(nx);
      row.grad_u = m.grad.tail(nu);
      row.l1 = sw.l1;
      row.l2 = sw.l2;
      soft.push_back(std::move(row));
    }
  }
  for (const auto& m : lin.terminal_margins) {
    const auto& sw = problem_.weights.slack[static_cast<int>(m.family)];
    SoftMargin row;
    row.node = n_nodes;
    row.value = m.value;
    row.grad_x = m.grad;
    row.l1 = sw.l1;
    row.l2 = sw.l2;
    soft.push_back(std::move(row));
  }

  SoftQpSettings qp_settings;
  qp_settings.tolerance = settings_.qp_tolerance;
  qp_settings.max_iterations = settings_.max_qp_iterations;
  qp_settings.eps_reg = settings_.eps_reg;

  SoftQpSolution qp_sol;
  bool qp_ok = true;
  try {
    qp_sol = qp_solve(qp, soft, qp_settings);
    stats.qp_iterations += qp_sol.iterations;
    for (const auto& v : qp_sol.dx) qp_ok = qp_ok && v.allFinite();
    for (const auto& v : qp_sol.du) qp_ok = qp_ok && v.allFinite();
  } catch (const Error&) {
    qp_ok = false;
  }
  stats.qp_ms += ms_since(t_qp);
  if (!qp_ok) return false;

  // NLP KKT residual at the linearization point: Lagrangian gradient with the
  // QP inequality duals as multiplier estimates for the slacked path
  // constraints (the penalty subgradient is set-valued at the boundary, so
  // the duals are the consistent choice), checked against the QP costates.
  double kkt = lin.x0_shift.lpNorm<Eigen::Infinity>();
  double defect_norm = 0.0;
  for (int k = 0; k < n_nodes; ++k) {
    defect_norm = std::max(defect_norm, lin.stages[k].d.lpNorm<Eigen::Infinity>());
  }
  {
    std::vector<VecXd> gx(n_nodes + 1);
    std::vector<VecXd> gu(n_nodes);
    for (int k = 0; k < n_nodes; ++k) {
      gx[k] = lin.stages[k].qx;
      gu[k] = lin.stages[k].ru;
    }
    gx[n_nodes] = lin.qN;
    for (size_t j = 0; j < soft.size(); ++j) {
      const double dual = qp_sol.ineq_dual.size() > 0 ? qp_sol.ineq_dual(j) : 0.0;
      const int k = soft[j].node;
      gx[k] -= dual * soft[j].grad_x;
      if (k < n_nodes) gu[k] -= dual * soft[j].grad_u;
    }
    for (int k = 1; k < n_nodes; ++k) {
      const VecXd r = gx[k] + lin.stages[k].A.transpose() * qp_sol.lam[k + 1] -
                      qp_sol.lam[k];
      kkt = std::max(kkt, r.lpNorm<Eigen::Infinity>());
    }
    for (int k = 0; k < n_nodes; ++k) {
      const VecXd r = gu[k] + lin.stages[k].B.transpose() * qp_sol.lam[k + 1];
      kkt = std::max(kkt, r.lpNorm<Eigen::Infinity>());
    }
    kkt = std::max(kkt, (gx[n_nodes] - qp_sol.lam[n_nodes]).lpNorm<Eigen::Infinity>());
    kkt = std::max(kkt, defect_norm);
  }
  stats.kkt_residual = kkt;
  stats.defect_norm = defect_norm;

  // Full step (optionally Armijo-damped on an L1 merit).
  double alpha = 1.0;
  if (settings_.line_search) {
    VecXd z0(nlp_.num_primal());
    for (int k = 0; k <= n_nodes; ++k) z0.segment(nlp_.x_offset(k), nx) = x_guess_[k];
    for (int k = 0; k < n_nodes; ++k) z0.segment(nlp_.u_offset(k), nu) = u_guess_[k];
    double lam_max = 0.0;
    for (const auto& l : qp_sol.lam) {
      lam_max = std::max(lam_max, l.lpNorm<Eigen::Infinity>());
    }
    const double mu = 10.0 * (1.0 + lam_max);
    const auto merit = [&](const VecXd& z) {
      return nlp_.objective(z) + mu * nlp_.equality_residuals(z).lpNorm<1>();
    };
    const double phi0 = merit(z0);
    double a = 1.0;
    for (int it = 0; it < 8; ++it) {
      VecXd z = z0;
      for (int k = 0; k <= n_nodes; ++k) {
        z.segment(nlp_.x_offset(k), nx) += a * qp_sol.dx[k];
      }
      for (int k = 0; k < n_nodes; ++k) {
        z.segment(nlp_.u_offset(k), nu) += a * qp_sol.du[k];
      }
      if (merit(z) < phi0) break;
      a *= 0.5;
    }
    alpha = a;
  }

  double step_norm = 0.0;
  for (int k = 0; k <= n_nodes; ++k) {
    x_guess_[k] += alpha * qp_sol.dx[k];
    step_norm = std::max(step_norm, qp_sol.dx[k].lpNorm<Eigen::Infinity>());
  }
  for (int k = 0; k < n_nodes; ++k) {
    u_guess_[k] += alpha * qp_sol.du[k];
    step_norm = std::max(step_norm, qp_sol.du[k].lpNorm<Eigen::Infinity>());
  }
  stats.step_norm = alpha * step_norm;

  // Renormalize the manifold blocks; pin node 0 to the measured state.
  x_guess_[0] = x0.raw();
  for (int k = 1; k <= n_nodes; ++k) {
    LoadCableState x = LoadCableState::from_raw(std::move(x_guess_[k]));
    x.renormalize();
    x_guess_[k] = std::move(x.raw());
  }
  return true;
}

std::pair<OcpSolution, SolveStats> SqpSolver::rti_step(const LoadCableState& x0) {
  const auto t_total = Clock::now();
  SolveStats stats;

  if (x0.n_uav() != problem_.cfg.n) {
    throw InvalidArgument("rti_step: x0 size does not match config");
  }
  problem_.x0 = x0;

  if (!has_guess_) {
    cold_start(x0);
    stats.warm_started = false;
  } else {
    if (settings_.warm_start) shift_guess();
    stats.warm_started = true;
  }

  // Keep the guess on x0's quaternion hemisphere; q and -q are the same
  // attitude, and the defect alignment keeps the shooting chain consistent.
  if (x_guess_[0].segment<4>(kQ).dot(x0.raw().segment<4>(kQ)) < 0.0) {
    for (auto& xg : x_guess_) xg.segment<4>(kQ) *= -1.0;
  }

  bool ok = true;
  const int iterations = std::max(1, settings_.max_sqp_iterations);
  for (int it = 0; it < iterations && ok; ++it) {
    ok = sqp_iteration(x0, stats);
    stats.sqp_iterations = it + 1;
  }

  OcpSolution sol = package_solution();
  for (int k = 0; k <= problem_.horizon; ++k) {
    for (size_t j = 0; j < sol.node_slacks[k].size(); ++j) {
      const auto fam = stage_margin_family(problem_.cfg.n, static_cast<int>(j),
                                           k == problem_.horizon);
      stats.slack_sum[static_cast<int>(fam)] += sol.node_slacks[k][j];
    }
  }
  stats.objective = sol.objective;
  stats.status = ok ? SolveStatus::Success : SolveStatus::QpFailure;
  stats.total_ms = ms_since(t_total);
  return {std::move(sol), stats};
}

std::pair<OcpSolution, SolveStats> SqpSolver::solve(const LoadCableState& x0,
                                                    int max_iterations, double kkt_tol) {
  const bool saved_warm = settings_.warm_start;
  settings_.warm_start = false;  // iterate in place, no shifting
  if (!has_guess_) cold_start(x0);

  std::pair<OcpSolution, SolveStats> out = rti_step(x0);
  int iters = 1;
  while (iters < max_iterations && out.second.status == SolveStatus::Success &&
         out.second.kkt_residual > kkt_tol) {
    out = rti_step(x0);
    ++iters;
  }
  out.second.sqp_iterations = iters;
  settings_.warm_start = saved_warm;
  return out;
}

std::pair<LoadCableState, ControlInput> hover_equilibrium(const SystemConfig& cfg,
                                                          const Vec3d& position) {
  LoadCableState x(cfg.n);
  x.position() = position;
  ControlInput u(cfg.n);
  const double t = cfg.load_mass * cfg.gravity.norm() / cfg.n;
  for (int i = 0; i < cfg.n; ++i) u.tension(i) = t;
  return {x, u};
}

}  // namespace cablelift
