#include "cablelift/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>

#include <Eigen/Dense>

namespace cablelift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BoundRef {
  int var;
  bool upper;
};

/// Solve the equality KKT system with the working set of bounds pinned.
/// Returns false when the system is singular beyond recovery.
bool solve_kkt(const DenseQp& qp, const std::vector<BoundRef>& working, double eps_reg,
               VecXd& z, VecXd& lam_eq, VecXd& mu_w) {
  const int n = static_cast<int>(qp.H.rows());
  const int me = static_cast<int>(qp.A.rows());
  const int mw = static_cast<int>(working.size());
  const int dim = n + me + mw;

  MatXd kkt = MatXd::Zero(dim, dim);
  kkt.topLeftCorner(n, n) = qp.H;
  kkt.topLeftCorner(n, n).diagonal().array() += eps_reg;
  if (me > 0) {
    kkt.block(n, 0, me, n) = qp.A;
    kkt.block(0, n, n, me) = qp.A.transpose();
  }
  for (int i = 0; i < mw; ++i) {
    kkt(n + me + i, working[i].var) = 1.0;
    kkt(working[i].var, n + me + i) = 1.0;
  }

  VecXd rhs(dim);
  rhs.head(n) = -qp.g;
  if (me > 0) rhs.segment(n, me) = qp.b;
  for (int i = 0; i < mw; ++i) {
    rhs(n + me + i) = working[i].upper ? qp.ub(working[i].var) : qp.lb(working[i].var);
  }

  Eigen::FullPivLU<MatXd> lu(kkt);
  if (!lu.isInvertible()) return false;
  const VecXd sol = lu.solve(rhs);
  z = sol.head(n);
  lam_eq = sol.segment(n, me);
  mu_w = sol.tail(mw);
  return true;
}

double kkt_residual(const DenseQp& qp, const VecXd& z, const VecXd& lam_eq,
                    const VecXd& mu) {
  VecXd grad = qp.H * z + qp.g;
  if (qp.A.rows() > 0) grad += qp.A.transpose() * lam_eq;
  grad += mu;  // mu holds the signed bound multiplier per variable
  double r = grad.lpNorm<Eigen::Infinity>();
  if (qp.A.rows() > 0) r = std::max(r, (qp.A * z - qp.b).lpNorm<Eigen::Infinity>());
  for (int i = 0; i < z.size(); ++i) {
    if (qp.lb(i) > -kInf) r = std::max(r, std::max(0.0, qp.lb(i) - z(i)));
    if (qp.ub(i) < kInf) r = std::max(r, std::max(0.0, z(i) - qp.ub(i)));
  }
  return r;
}

}  // namespace

QpResult qp_solve(const DenseQp& qp, const QpSettings& settings) {
  const int n = static_cast<int>(qp.H.rows());
  if (qp.g.size() != n || qp.H.cols() != n) {
    throw InvalidArgument("qp_solve: inconsistent objective dimensions");
  }
  if (qp.A.rows() > 0 && (qp.A.cols() != n || qp.b.size() != qp.A.rows())) {
    throw InvalidArgument("qp_solve: inconsistent equality dimensions");
  }
  DenseQp prob = qp;
  if (prob.lb.size() == 0) prob.lb = VecXd::Constant(n, -kInf);
  if (prob.ub.size() == 0) prob.ub = VecXd::Constant(n, kInf);

  // Inconsistent equality system: check minimum-norm residual first.
  if (prob.A.rows() > 0) {
    const VecXd ls = prob.A.colPivHouseholderQr().solve(prob.b);
    if ((prob.A * ls - prob.b).lpNorm<Eigen::Infinity>() > 1e-8 * (1.0 + prob.b.norm())) {
      throw QpInfeasible("qp_solve: equality constraints are inconsistent");
    }
  }

  std::vector<BoundRef> working;
  QpResult best;
  best.kkt_residual = kInf;

  VecXd z, lam_eq, mu_w;
  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    // Regularize only when the unmodified KKT system is singular.
    bool ok = solve_kkt(prob, working, 0.0, z, lam_eq, mu_w);
    for (double reg = settings.eps_reg; !ok && reg < 1.0; reg *= 100.0) {
      ok = solve_kkt(prob, working, reg, z, lam_eq, mu_w);
    }
    if (!ok) throw QpInfeasible("qp_solve: KKT system is singular");

    VecXd mu = VecXd::Zero(n);
    for (int i = 0; i < static_cast<int>(working.size()); ++i) {
      // Convention: gradient + mu = 0 at an active bound, so an upper bound
      // carries mu >= 0 and a lower bound mu <= 0.
      mu(working[i].var) = mu_w(i);
    }

    QpResult res;
    res.z = z;
    res.eq_multipliers = lam_eq;
    res.bound_multipliers = mu;
    res.iterations = iter;
    res.kkt_residual = kkt_residual(prob, z, lam_eq, mu);
    if (res.kkt_residual < best.kkt_residual) best = res;

    // Drop a bound whose multiplier has the wrong sign.
    int drop = -1;
    double worst = -settings.tolerance;
    for (int i = 0; i < static_cast<int>(working.size()); ++i) {
      const double signed_mu = working[i].upper ? mu_w(i) : -mu_w(i);
      if (signed_mu < worst) {
        worst = signed_mu;
        drop = i;
      }
    }
    if (drop >= 0) {
      working.erase(working.begin() + drop);
      continue;
    }

    // Add the most violated bound.
    int add_var = -1;
    bool add_upper = false;
    double viol = settings.tolerance;
    for (int i = 0; i < n; ++i) {
      if (prob.lb(i) - z(i) > viol) {
        viol = prob.lb(i) - z(i);
        add_var = i;
        add_upper = false;
      }
      if (z(i) - prob.ub(i) > viol) {
        viol = z(i) - prob.ub(i);
        add_var = i;
        add_upper = true;
      }
    }
    if (add_var < 0) {
      best = res;
      best.status = QpStatus::Solved;
      return best;
    }
    working.push_back({add_var, add_upper});
  }

  best.status = QpStatus::MaxIterations;
  return best;
}

OcpQpSolution qp_solve(const OcpQp& qp, double eps_reg) {
  const int n_stage = qp.horizon();
  const int nx = static_cast<int>(qp.QN.rows());

  std::vector<MatXd> gain_k(n_stage);
  std::vector<VecXd> gain_ff(n_stage);

  MatXd p = qp.QN;
  VecXd pv = qp.qN;
  for (int k = n_stage - 1; k >= 0; --k) {
    const auto& s = qp.stages[k];
    const MatXd pa = p * s.A;
    const MatXd pb = p * s.B;
    const VecXd pd = p * s.d + pv;

    MatXd f = s.Qxx + s.A.transpose() * pa;
    MatXd e = s.Qxu.transpose() + s.B.transpose() * pa;
    MatXd g = s.Ruu + s.B.transpose() * pb;
    const VecXd fx = s.qx + s.A.transpose() * pd;
    const VecXd fu = s.ru + s.B.transpose() * pd;

    Eigen::LLT<MatXd> llt(g);
    double reg = eps_reg;
    while (llt.info() != Eigen::Success && reg < 1.0) {
      g.diagonal().array() += reg;
      llt.compute(g);
      reg *= 100.0;
    }
    if (llt.info() != Eigen::Success) {
      throw QpInfeasible("qp_solve(OcpQp): input Hessian block not factorizable");
    }
    gain_k[k] = -llt.solve(e);
    gain_ff[k] = -llt.solve(fu);

    p = f + e.transpose() * gain_k[k];
    p = 0.5 * (p + p.transpose()).eval();
    pv = fx + e.transpose() * gain_ff[k];
  }

  OcpQpSolution sol;
  sol.dx.resize(n_stage + 1);
  sol.du.resize(n_stage);
  sol.lam.resize(n_stage + 1);
  sol.dx[0] = qp.x0_shift;
  sol.lam[0] = p * sol.dx[0] + pv;
  for (int k = 0; k < n_stage; ++k) {
    const auto& s = qp.stages[k];
    sol.du[k] = gain_k[k] * sol.dx[k] + gain_ff[k];
    sol.dx[k + 1] = s.A * sol.dx[k] + s.B * sol.du[k] + s.d;
  }

  // Costates: lam[k+1] = P_{k+1} dx_{k+1} + p_{k+1}; recompute by a second
  // backward pass storing P would double memory, so roll them from the
  // stationarity condition instead: lam_k = Qxx dx + Qxu du + qx + A' lam_{k+1}.
  sol.lam[n_stage] = qp.QN * sol.dx[n_stage] + qp.qN;
  for (int k = n_stage - 1; k >= 1; --k) {
    const auto& s = qp.stages[k];
    sol.lam[k] = s.Qxx * sol.dx[k] + s.Qxu * sol.du[k] + s.qx +
                 s.A.transpose() * sol.lam[k + 1];
  }

  // KKT residual: stationarity in du (dx stationarity holds by construction
  // of the costates) plus the dynamics defects, which are zero by the forward
  // roll-out; report the du stationarity norm.
  double kkt = 0.0;
  for (int k = 0; k < n_stage; ++k) {
    const auto& s = qp.stages[k];
    const VecXd su = s.Qxu.transpose() * sol.dx[k] + s.Ruu * sol.du[k] + s.ru +
                     s.B.transpose() * sol.lam[k + 1];
    kkt = std::max(kkt, su.lpNorm<Eigen::Infinity>());
  }
  // dx_0 stationarity is absorbed by the free IC multiplier; check interior
  // nodes against the rolled costates.
  for (int k = 1; k < n_stage; ++k) {
    const auto& s = qp.stages[k];
    const VecXd sx = s.Qxx * sol.dx[k] + s.Qxu * sol.du[k] + s.qx +
                     s.A.transpose() * sol.lam[k + 1] - sol.lam[k];
    kkt = std::max(kkt, sx.lpNorm<Eigen::Infinity>());
  }
  sol.kkt_residual = kkt;
  (void)nx;
  return sol;
}

SoftQpSolution qp_solve(const OcpQp& qp, const std::vector<SoftMargin>& soft,
                        const SoftQpSettings& settings) {
  const int n_stage = qp.horizon();
  const int nx = static_cast<int>(qp.QN.rows());
  const int nm = static_cast<int>(soft.size());

  SoftQpSolution sol;
  sol.dx.assign(n_stage + 1, VecXd::Zero(nx));
  for (int k = 0; k < n_stage; ++k) {
    sol.du.push_back(VecXd::Zero(qp.stages[k].Ruu.rows()));
  }
  sol.slack.resize(nm);
  sol.ineq_dual.resize(nm);

  // Interior starting point: slacks large enough that every constraint row
  // starts strictly feasible, duals exactly on the slack-pricing stationarity
  // l1 + 2 l2 s = lam + mu so the dual residual starts at zero (it is linear,
  // so damped Newton steps keep it there).
  VecXd s(nm), lam_i(nm), mu_d(nm);
  double tau = 0.0;
  for (int j = 0; j < nm; ++j) {
    s(j) = std::max(0.5, -soft[j].value + 0.5);
    const double price = soft[j].l1 + 2.0 * soft[j].l2 * s(j);
    mu_d(j) = 0.5 * price;
    lam_i(j) = 0.5 * price;
    tau += lam_i(j) * (soft[j].value + s(j)) + mu_d(j) * s(j);
  }
  if (nm > 0) tau = 0.1 * tau / (2.0 * nm);

  // Per-iteration workspace.
  std::vector<MatXd> h_qxx(n_stage), h_qxu(n_stage), h_ruu(n_stage);
  std::vector<VecXd> g_qx(n_stage), g_ru(n_stage);
  MatXd h_qn;
  VecXd g_qn;
  VecXd mhat(nm), c(nm), r_s(nm), r_clam(nm), r_smu(nm), q2(nm), dcap(nm), kappa(nm);
  VecXd dlam(nm), ds(nm), dmu(nm);

  OcpQp newton;
  newton.stages.resize(n_stage);

  const auto margin_dir = [&](int j, const std::vector<VecXd>& xs,
                              const std::vector<VecXd>& us) {
    const auto& m = soft[j];
    double v = m.grad_x.dot(xs[m.node]);
    if (m.node < n_stage) v += m.grad_u.dot(us[m.node]);
    return v;
  };

  int it = 0;
  for (it = 1; it <= settings.max_iterations; ++it) {
    // Residuals of the perturbed KKT system and the stage-local elimination
    // coefficients: eliminating (ds, dmu, dlam) per margin leaves a rank-1
    // theta * g g' Hessian update and a gradient shift on its stage.
    for (int j = 0; j < nm; ++j) {
      mhat(j) = soft[j].value + margin_dir(j, sol.dx, sol.du);
      c(j) = mhat(j) + s(j);
      r_s(j) = soft[j].l1 + 2.0 * soft[j].l2 * s(j) - lam_i(j) - mu_d(j);
      r_clam(j) = lam_i(j) * c(j) - tau;
      r_smu(j) = mu_d(j) * s(j) - tau;
      q2(j) = 2.0 * soft[j].l2 + mu_d(j) / s(j);
      dcap(j) = c(j) + lam_i(j) / q2(j);
      kappa(j) = (-r_clam(j) + lam_i(j) * (r_s(j) + r_smu(j) / s(j)) / q2(j)) / dcap(j);
    }

    // Stage blocks: base cost plus the margin eliminations; gradient is the
    // stationarity residual at the current iterate.
    for (int k = 0; k < n_stage; ++k) {
      const auto& st = qp.stages[k];
      h_qxx[k] = st.Qxx;
      h_qxu[k] = st.Qxu;
      h_ruu[k] = st.Ruu;
      g_qx[k] = st.Qxx * sol.dx[k] + st.Qxu * sol.du[k] + st.qx;
      g_ru[k] = st.Qxu.transpose() * sol.dx[k] + st.Ruu * sol.du[k] + st.ru;
    }
    h_qn = qp.QN;
    g_qn = qp.QN * sol.dx[n_stage] + qp.qN;

    for (int j = 0; j < nm; ++j) {
      const auto& m = soft[j];
      const double theta = lam_i(j) / dcap(j);
      const double gshift = lam_i(j) + kappa(j);
      if (m.node < n_stage) {
        h_qxx[m.node].selfadjointView<Eigen::Lower>().rankUpdate(m.grad_x, theta);
        h_qxu[m.node] += theta * m.grad_x * m.grad_u.transpose();
        h_ruu[m.node].selfadjointView<Eigen::Lower>().rankUpdate(m.grad_u, theta);
        g_qx[m.node] -= gshift * m.grad_x;
        g_ru[m.node] -= gshift * m.grad_u;
      } else {
        h_qn.selfadjointView<Eigen::Lower>().rankUpdate(m.grad_x, theta);
        g_qn -= gshift * m.grad_x;
      }
    }

    // Newton step on the equality-constrained reduced system via Riccati,
    // in increment form (defects carry the current equality residuals).
    for (int k = 0; k < n_stage; ++k) {
      auto& ns = newton.stages[k];
      const auto& st = qp.stages[k];
      ns.Qxx = h_qxx[k].selfadjointView<Eigen::Lower>();
      ns.Qxu = h_qxu[k];
      ns.Ruu = h_ruu[k].selfadjointView<Eigen::Lower>();
      ns.qx = g_qx[k];
      ns.ru = g_ru[k];
      ns.A = st.A;
      ns.B = st.B;
      ns.d = st.A * sol.dx[k] + st.B * sol.du[k] + st.d - sol.dx[k + 1];
    }
    newton.QN = h_qn.selfadjointView<Eigen::Lower>();
    newton.qN = g_qn;
    newton.x0_shift = qp.x0_shift - sol.dx[0];

    const OcpQpSolution step = qp_solve(newton, settings.eps_reg);
    sol.lam = step.lam;

    // Recover the eliminated directions and the largest interior steps,
    // primal and dual separately.
    double alpha_p = 1.0, alpha_d = 1.0;
    const double ftb = settings.fraction_to_boundary;
    for (int j = 0; j < nm; ++j) {
      const double gdx = margin_dir(j, step.dx, step.du);
      dlam(j) = kappa(j) - (lam_i(j) / dcap(j)) * gdx;
      ds(j) = (dlam(j) - r_s(j) - r_smu(j) / s(j)) / q2(j);
      dmu(j) = (-r_smu(j) - mu_d(j) * ds(j)) / s(j);
      const double dc = gdx + ds(j);
      if (ds(j) < 0.0) alpha_p = std::min(alpha_p, -ftb * s(j) / ds(j));
      if (dc < 0.0) alpha_p = std::min(alpha_p, -ftb * c(j) / dc);
      if (dlam(j) < 0.0) alpha_d = std::min(alpha_d, -ftb * lam_i(j) / dlam(j));
      if (dmu(j) < 0.0) alpha_d = std::min(alpha_d, -ftb * mu_d(j) / dmu(j));
    }
    const double alpha = std::min(alpha_p, alpha_d);

    for (int k = 0; k <= n_stage; ++k) sol.dx[k] += alpha_p * step.dx[k];
    for (int k = 0; k < n_stage; ++k) sol.du[k] += alpha_p * step.du[k];
    s += alpha_p * ds;
    lam_i += alpha_d * dlam;
    mu_d += alpha_d * dmu;

    double comp = 0.0;
    for (int j = 0; j < nm; ++j) {
      comp += lam_i(j) * (soft[j].value + margin_dir(j, sol.dx, sol.du) + s(j)) +
              mu_d(j) * s(j);
    }
    sol.mu = nm > 0 ? comp / (2.0 * nm) : 0.0;

    double r_eq = (qp.x0_shift - sol.dx[0]).lpNorm<Eigen::Infinity>();
    for (int k = 0; k < n_stage; ++k) {
      const auto& st = qp.stages[k];
      r_eq = std::max(r_eq, (st.A * sol.dx[k] + st.B * sol.du[k] + st.d - sol.dx[k + 1])
                                .lpNorm<Eigen::Infinity>());
    }
    double r_dual = 0.0;
    for (int j = 0; j < nm; ++j) {
      r_dual = std::max(r_dual, std::abs(soft[j].l1 + 2.0 * soft[j].l2 * s(j) -
                                         lam_i(j) - mu_d(j)));
    }
    sol.kkt_residual = std::max({sol.mu, r_eq, r_dual});
    if (std::getenv("CABLELIFT_DEBUG_IPM")) {
      std::fprintf(stderr, "    ipm %2d: alpha=%8.2e mu=%9.3e r_eq=%9.3e r_dual=%9.3e tau=%9.3e\n",
                   it, alpha, sol.mu, r_eq, r_dual, tau);
    }
    if (sol.kkt_residual < settings.tolerance) {
      sol.converged = true;
      break;
    }
    // Aggressive centering after long steps, cautious after blocked ones.
    const double sigma = std::clamp(std::pow(1.0 - alpha, 3.0), 1e-3, settings.sigma);
    tau = std::max(settings.tau_min, sigma * sol.mu);
  }

  sol.iterations = std::min(it, settings.max_iterations);
  sol.slack = s;
  sol.ineq_dual = lam_i;
  return sol;
}

DenseQp to_dense(const OcpQp& qp) {
  const int n_stage = qp.horizon();
  const int nx = static_cast<int>(qp.QN.rows());
  const int nu = n_stage > 0 ? static_cast<int>(qp.stages[0].Ruu.rows()) : 0;
  const int nv = nx * (n_stage + 1) + nu * n_stage;
  const int ne = nx * (n_stage + 1);

  DenseQp d;
  d.H = MatXd::Zero(nv, nv);
  d.g = VecXd::Zero(nv);
  d.A = MatXd::Zero(ne, nv);
  d.b = VecXd::Zero(ne);

  const auto xo = [&](int k) { return nx * k; };
  const auto uo = [&](int k) { return nx * (n_stage + 1) + nu * k; };

  for (int k = 0; k < n_stage; ++k) {
    const auto& s = qp.stages[k];
    d.H.block(xo(k), xo(k), nx, nx) += s.Qxx;
    d.H.block(xo(k), uo(k), nx, nu) += s.Qxu;
    d.H.block(uo(k), xo(k), nu, nx) += s.Qxu.transpose();
    d.H.block(uo(k), uo(k), nu, nu) += s.Ruu;
    d.g.segment(xo(k), nx) += s.qx;
    d.g.segment(uo(k), nu) += s.ru;

    d.A.block(nx * (k + 1), xo(k), nx, nx) = s.A;
    d.A.block(nx * (k + 1), uo(k), nx, nu) = s.B;
    d.A.block(nx * (k + 1), xo(k + 1), nx, nx) = -MatXd::Identity(nx, nx);
    d.b.segment(nx * (k + 1), nx) = -s.d;
  }
  d.H.block(xo(n_stage), xo(n_stage), nx, nx) += qp.QN;
  d.g.segment(xo(n_stage), nx) += qp.qN;

  d.A.block(0, 0, nx, nx).setIdentity();
  d.b.segment(0, nx) = qp.x0_shift;
  return d;
}

}  // namespace cablelift
