#include "cablelift/ocp.hpp"

#include <cmath>

#include "cablelift/geometry.hpp"
#include "cablelift/model.hpp"

namespace cablelift {

namespace {

constexpr int kQ = 6;

void require(bool ok, const char* what) {
  if (!ok) throw InvalidConfiguration(what);
}

}  // namespace

void OcpWeights::validate(int) const {
  const auto nonneg = [](const Vec3d& v) { return (v.array() >= 0.0).all(); };
  require(nonneg(q_p) && nonneg(q_v) && nonneg(q_q) && nonneg(q_w) && nonneg(q_s) &&
              nonneg(q_r) && nonneg(q_rdot) && nonneg(r_c) && r_t >= 0.0,
          "weights: diagonal entries must be >= 0");
  require(nonneg(q_p_e) && nonneg(q_v_e) && nonneg(q_q_e) && nonneg(q_w_e) &&
              nonneg(q_s_e) && nonneg(q_r_e) && nonneg(q_rdot_e),
          "weights: terminal entries must be >= 0");
  for (const auto& s : slack) {
    require(s.l1 >= 0.0 && s.l2 >= 0.0, "weights.slack: coefficients must be >= 0");
  }
}

void ReferenceTrajectory::validate(int nx, int nu) const {
  require(x_nodes.size() == u_nodes.size() + 1,
          "reference: need one more state node than input nodes");
  require(!u_nodes.empty(), "reference: need at least one interval");
  for (const auto& x : x_nodes) require(x.size() == nx, "reference: state node size");
  for (const auto& u : u_nodes) require(u.size() == nu, "reference: input node size");
}

void OcpProblem::validate() const {
  require(horizon >= 1, "ocp.horizon: need N >= 1");
  require(dt > 0.0, "ocp.dt: must be > 0");
  require(x0.n_uav() == cfg.n, "ocp.x0: size does not match config");
  weights.validate(cfg.n);
  reference.validate(LoadCableState::dim(cfg.n), ControlInput::dim(cfg.n));
  require(reference.horizon() == horizon, "reference: node count must match horizon");
}

namespace {

/// Tracking residual r(x) with the attitude block replaced by the error
/// quaternion's vector part; 12 + 9n entries.
VecXd tracking_residual(const VecXd& x, const VecXd& x_r) {
  VecXd r(x.size() - 1);
  r.segment<6>(0) = x.segment<6>(0) - x_r.segment<6>(0);
  const Quatd q_ref = x_r.segment<4>(kQ);
  const Quatd err = quat_multiply<double>(quat_conjugate<double>(q_ref),
                                          Quatd(x.segment<4>(kQ)));
  r.segment<3>(6) = err.tail<3>();
  r.tail(x.size() - 10) = x.tail(x.size() - 10) - x_r.tail(x.size() - 10);
  return r;
}

VecXd state_weight_diag(int n, const Vec3d& q_p, const Vec3d& q_v, const Vec3d& q_q,
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

VecXd input_weight_diag(int n, const Vec3d& r_c, double r_t) {
  VecXd w(4 * n);
  for (int i = 0; i < n; ++i) {
    w.segment<3>(4 * i) = r_c;
    w(4 * i + 3) = r_t;
  }
  return w;
}

double penalty_of_slack(double s, const SlackWeights& w) {
  return w.l1 * s + w.l2 * s * s;
}

}  // namespace

double stage_cost(const VecXd& x, const VecXd& u, const VecXd& x_r, const VecXd& u_r,
                  const OcpWeights& w) {
  const int n = static_cast<int>(u.size()) / 4;
  const VecXd rx = tracking_residual(x, x_r);
  const VecXd wx = state_weight_diag(n, w.q_p, w.q_v, w.q_q, w.q_w, w.q_s, w.q_r, w.q_rdot);
  const VecXd ru = u - u_r;
  const VecXd wu = input_weight_diag(n, w.r_c, w.r_t);
  return rx.dot(wx.cwiseProduct(rx)) + ru.dot(wu.cwiseProduct(ru));
}

double terminal_cost(const VecXd& x, const VecXd& x_r, const OcpWeights& w) {
  const int n = (static_cast<int>(x.size()) - 13) / 9;
  const VecXd rx = tracking_residual(x, x_r);
  const VecXd wx =
      state_weight_diag(n, w.q_p_e, w.q_v_e, w.q_q_e, w.q_w_e, w.q_s_e, w.q_r_e, w.q_rdot_e);
  return rx.dot(wx.cwiseProduct(rx));
}

VecXd shooting_residual(const VecXd& x_k, const VecXd& u_k, const VecXd& x_k1,
                        const SystemConfig& cfg, double dt) {
  const LoadCableState next =
      rk4_step(LoadCableState::from_raw(x_k), ControlInput::from_raw(u_k), cfg, dt);
  VecXd r = next.raw() - x_k1;
  if (next.raw().segment<4>(kQ).dot(x_k1.segment<4>(kQ)) < 0.0) {
    r.segment<4>(kQ) = -next.raw().segment<4>(kQ) - x_k1.segment<4>(kQ);
  }
  return r;
}

SoftConstraintTerms soft_constraint_terms(const LoadCableState& x, const ControlInput& u,
                                          const SystemConfig& cfg, const OcpWeights& w) {
  SoftConstraintTerms out;
  const auto margins = stage_margins(x, &u, cfg, /*with_gradients=*/false);
  out.slacks.reserve(margins.size());
  for (const auto& m : margins) {
    const double s = std::max(0.0, -m.value);
    out.slacks.push_back(s);
    out.penalty += penalty_of_slack(s, w.slack[static_cast<int>(m.family)]);
  }
  return out;
}

OcpNlp::OcpNlp(const OcpProblem& problem) : problem_(&problem) {
  problem.validate();
  const int n = problem.cfg.n;
  nx_ = LoadCableState::dim(n);
  nu_ = ControlInput::dim(n);
  n_ = problem.horizon;
  // Families per node: thrust 2n, tension 2n, cable_load n, cable_uav n,
  // distance n(n-1), input box 6n. Terminal node keeps only the state-only
  // families.
  stage_margin_count_ = 12 * n + n * (n - 1);
  terminal_margin_count_ = n + n * (n - 1);
  num_slack_ = n_ * stage_margin_count_ + terminal_margin_count_;
}

OcpNlp build_nlp(const OcpProblem& problem) { return OcpNlp(problem); }

VecXd OcpNlp::eliminate_slacks(const VecXd& z) const {
  VecXd s(num_slack_);
  int at = 0;
  for (int k = 0; k <= n_; ++k) {
    const LoadCableState x = LoadCableState::from_raw(z.segment(x_offset(k), nx_));
    ControlInput u(problem_->cfg.n);
    const bool has_u = k < n_;
    if (has_u) u.raw() = z.segment(u_offset(k), nu_);
    const auto margins =
        stage_margins(x, has_u ? &u : nullptr, problem_->cfg, /*with_gradients=*/false);
    for (const auto& m : margins) s(at++) = std::max(0.0, -m.value);
  }
  return s;
}

double OcpNlp::objective(const VecXd& z) const {
  const auto& p = *problem_;
  double cost = 0.0;
  for (int k = 0; k < n_; ++k) {
    cost += p.dt * stage_cost(z.segment(x_offset(k), nx_), z.segment(u_offset(k), nu_),
                              p.reference.x_nodes[k], p.reference.u_nodes[k], p.weights);
  }
  cost += terminal_cost(z.segment(x_offset(n_), nx_), p.reference.x_nodes[n_], p.weights);

  for (int k = 0; k <= n_; ++k) {
    const LoadCableState x = LoadCableState::from_raw(z.segment(x_offset(k), nx_));
    ControlInput u(p.cfg.n);
    const bool has_u = k < n_;
    if (has_u) u.raw() = z.segment(u_offset(k), nu_);
    const auto margins = stage_margins(x, has_u ? &u : nullptr, p.cfg, false);
    for (const auto& m : margins) {
      const double s = std::max(0.0, -m.value);
      cost += penalty_of_slack(s, p.weights.slack[static_cast<int>(m.family)]);
    }
  }
  return cost;
}

VecXd OcpNlp::equality_residuals(const VecXd& z) const {
  const auto& p = *problem_;
  VecXd c(num_eq());
  c.segment(0, nx_) = p.x0.raw() - z.segment(x_offset(0), nx_);
  for (int k = 0; k < n_; ++k) {
    c.segment(nx_ * (k + 1), nx_) =
        shooting_residual(z.segment(x_offset(k), nx_), z.segment(u_offset(k), nu_),
                          z.segment(x_offset(k + 1), nx_), p.cfg, p.dt);
  }
  return c;
}

VecXd OcpNlp::objective_gradient(const VecXd& z) const {
  const auto& p = *problem_;
  const int n = p.cfg.n;
  VecXd g = VecXd::Zero(num_primal());

  const VecXd wx = state_weight_diag(n, p.weights.q_p, p.weights.q_v, p.weights.q_q,
                                     p.weights.q_w, p.weights.q_s, p.weights.q_r,
                                     p.weights.q_rdot);
  const VecXd wx_e =
      state_weight_diag(n, p.weights.q_p_e, p.weights.q_v_e, p.weights.q_q_e,
                        p.weights.q_w_e, p.weights.q_s_e, p.weights.q_r_e,
                        p.weights.q_rdot_e);
  const VecXd wu = input_weight_diag(n, p.weights.r_c, p.weights.r_t);

  for (int k = 0; k <= n_; ++k) {
    const VecXd x = z.segment(x_offset(k), nx_);
    const VecXd& x_r = p.reference.x_nodes[k];
    const bool terminal = k == n_;
    const double scale = terminal ? 1.0 : p.dt;
    const VecXd& w = terminal ? wx_e : wx;

    const VecXd rx = tracking_residual(x, x_r);
    VecXd gx = 2.0 * scale * w.cwiseProduct(rx);
    // Pull the attitude part back through d e_q / d q = rows 1..3 of Q(q_r^-1).
    const Mat4d q_l =
        quat_product_matrix<double>(quat_conjugate<double>(Quatd(x_r.segment<4>(kQ))));
    VecXd gfull(nx_);
    gfull.segment<6>(0) = gx.segment<6>(0);
    gfull.segment<4>(kQ) = q_l.bottomRows<3>().transpose() * gx.segment<3>(6);
    gfull.tail(nx_ - 10) = gx.tail(nx_ - 10);
    g.segment(x_offset(k), nx_) += gfull;

    if (!terminal) {
      const VecXd u = z.segment(u_offset(k), nu_);
      g.segment(u_offset(k), nu_) +=
          2.0 * scale * wu.cwiseProduct(u - p.reference.u_nodes[k]);
    }

    const LoadCableState xs = LoadCableState::from_raw(x);
    ControlInput us(n);
    if (!terminal) us.raw() = z.segment(u_offset(k), nu_);
    const auto margins = stage_margins(xs, terminal ? nullptr : &us, p.cfg, true);
    for (const auto& m : margins) {
      if (m.value >= 0.0) continue;
      const auto& sw = p.weights.slack[static_cast<int>(m.family)];
      const double s = -m.value;
      const double dpenalty_dm = -(sw.l1 + 2.0 * sw.l2 * s);
      g.segment(x_offset(k), nx_) += dpenalty_dm * m.grad.head(nx_);
      if (!terminal) g.segment(u_offset(k), nu_) += dpenalty_dm * m.grad.tail(nu_);
    }
  }
  return g;
}

}  // namespace cablelift
