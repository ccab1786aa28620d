#include "condenser/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace condenser {

Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, const Eigen::VectorXd& caps,
                                       double mass, double* shift_out) {
  const int n = static_cast<int>(v.size());
  const bool capped = caps.size() > 0;
  if (capped && caps.size() != n)
    throw std::invalid_argument("project: caps size mismatch");
  if (!(mass >= 0.0) || !std::isfinite(mass))
    throw std::invalid_argument("project: mass must be finite and nonnegative");
  if (capped) {
    if (caps.minCoeff() < 0.0) throw std::invalid_argument("project: negative cap");
    if (caps.sum() < mass * (1.0 - 1e-12))
      throw std::invalid_argument("project: caps hold less than the requested mass");
  }

  const double mass_tol = 1e-12 * std::max(1.0, mass);
  auto eval = [&](double tau, Eigen::VectorXd& w) {
    if (capped)
      w = (v.array() - tau).cwiseMax(0.0).cwiseMin(caps.array());
    else
      w = (v.array() - tau).cwiseMax(0.0);
    return w.sum();
  };

  double hi = v.maxCoeff();  // mass(hi) = 0 <= mass
  double lo = capped ? (v - caps).minCoeff() : v.minCoeff() - mass;
  if (!capped) lo = std::min(lo, (v.sum() - mass) / n - 1.0);

  Eigen::VectorXd w(n);
  double tau = hi;
  for (int it = 0; it < 240; ++it) {
    tau = 0.5 * (lo + hi);
    const double m = eval(tau, w);
    if (std::abs(m - mass) <= mass_tol) break;
    if (m > mass)
      lo = tau;
    else
      hi = tau;
    if (hi - lo <= 1e-18 * (1.0 + std::abs(lo) + std::abs(hi))) break;
  }
  eval(tau, w);
  if (shift_out) *shift_out = tau;
  return w;
}

namespace {

// One dense view serves both solver entry points: variables with bounds
// [0, caps], optionally tied into equality groups (sum over group = mass).
// The quadratic is reached through mult(w) = H w plus an entrywise accessor,
// so block-structured problems avoid materializing H.
struct ProblemView {
  int n = 0;
  std::function<double(int, int)> hess;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> mult;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> project;
  Eigen::VectorXd c;     // objective w^T H w + 2 c^T w
  Eigen::VectorXd caps;  // size 0 = unbounded above
  std::vector<int> group;      // -1 = no equality tie
  std::vector<double> masses;  // per group
  double step_hint = 1.0;      // ~ max diagonal of H
};

double objective_of(const ProblemView& p, const Eigen::VectorXd& w, const Eigen::VectorXd& hw) {
  return w.dot(hw) + 2.0 * p.c.dot(w);
}

double kkt_residual_of(const ProblemView& p, const Eigen::VectorXd& w, const Eigen::VectorXd& g) {
  return (w - p.project(w - g)).lpNorm<1>();
}

struct RefineOutcome {
  Eigen::VectorXd w;
  std::vector<double> tau;  // per group, on the (H w + c) scale
  bool usable = false;
  bool exact = false;  // exact stationarity on the final face
};

// Primal active-set refinement from a warm iterate: solve the equality-
// reduced system on the current free face, clamp primal violators to their
// bounds, free dual violators, repeat until the face is optimal. Finite for
// PD Hessians; a repeat guard drops to single moves if block reclassification
// cycles. Deterministic.
RefineOutcome refine_active_set(const ProblemView& p, const Eigen::VectorXd& start,
                                int max_moves) {
  enum : uint8_t { kLo, kUp, kFree };
  const int n = p.n;
  const int n_groups = static_cast<int>(p.masses.size());
  const bool capped = p.caps.size() > 0;

  RefineOutcome out;
  Eigen::VectorXd w = start;
  std::vector<uint8_t> state(n, kFree);
  const double wscale = std::max(1.0, w.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i) {
    const double cap = capped ? p.caps(i) : std::numeric_limits<double>::infinity();
    const double eps = 1e-11 * std::max(wscale, std::isfinite(cap) ? cap : 0.0);
    if (std::isfinite(cap) && cap - w(i) <= eps) {
      state[i] = kUp;
      w(i) = cap;
    } else if (w(i) <= eps) {
      state[i] = kLo;
      w(i) = 0.0;
    }
  }

  std::unordered_set<uint64_t> seen;
  bool single_moves = false;
  auto face_hash = [&]() {
    uint64_t h = 1469598103934665603ull;
    for (int i = 0; i < n; ++i) {
      h ^= state[i];
      h *= 1099511628211ull;
    }
    return h;
  };

  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int moves = 0; moves < max_moves; ++moves) {
    if (!seen.insert(face_hash()).second) single_moves = true;

    std::vector<int> free;
    free.reserve(n);
    for (int i = 0; i < n; ++i)
      if (state[i] == kFree) free.push_back(i);
    const int m = static_cast<int>(free.size());

    // equality rows only for groups that still have free variables
    std::vector<int> grow(n_groups, -1);
    std::vector<int> active_groups;
    for (int i : free)
      if (p.group[i] >= 0 && grow[p.group[i]] < 0) {
        grow[p.group[i]] = static_cast<int>(active_groups.size());
        active_groups.push_back(p.group[i]);
      }
    const int ng = static_cast<int>(active_groups.size());

    Eigen::VectorXd wf(m);
    Eigen::VectorXd tau = Eigen::VectorXd::Zero(std::max(ng, 1));
    if (m > 0) {
      Eigen::MatrixXd H(m, m);
      for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
          const double v = p.hess(free[a], free[b]);
          H(a, b) = v;
          H(b, a) = v;
        }
      Eigen::VectorXd h(m);
      for (int a = 0; a < m; ++a) {
        double acc = p.c(free[a]);
        for (int i = 0; i < n; ++i)
          if (state[i] == kUp) acc += p.hess(free[a], i) * w(i);
        h(a) = acc;
      }
      llt.compute(H);
      if (llt.info() != Eigen::Success) return out;

      const Eigen::VectorXd d = llt.solve(-h);
      if (ng > 0) {
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(m, ng);
        for (int a = 0; a < m; ++a)
          if (p.group[free[a]] >= 0) E(a, grow[p.group[free[a]]]) = 1.0;
        const Eigen::MatrixXd S = llt.solve(E);
        Eigen::VectorXd rhs(ng);
        for (int k = 0; k < ng; ++k) {
          double mass_free = p.masses[active_groups[k]];
          for (int i = 0; i < n; ++i)
            if (state[i] != kFree && p.group[i] == active_groups[k]) mass_free -= w(i);
          rhs(k) = mass_free - E.col(k).dot(d);
        }
        const Eigen::MatrixXd M = E.transpose() * S;
        const Eigen::VectorXd lam = M.fullPivLu().solve(rhs);
        wf = d + S * lam;
        tau = lam;  // stationarity: (H w + c)_i = tau_k on free variables of group k
      } else {
        wf = d;
      }
    }

    // primal feasibility of the proposed face solution
    const double ptol = 1e-13 * wscale;
    std::vector<int> clamp_lo, clamp_up;
    for (int a = 0; a < m; ++a) {
      if (wf(a) < -ptol)
        clamp_lo.push_back(a);
      else if (capped && std::isfinite(p.caps(free[a])) && wf(a) > p.caps(free[a]) + ptol)
        clamp_up.push_back(a);
    }
    if (!clamp_lo.empty() || !clamp_up.empty()) {
      if (single_moves) {  // clamp only the worst violator
        int worst = -1;
        double amount = -1.0;
        bool up = false;
        for (int a : clamp_lo)
          if (-wf(a) > amount) amount = -wf(a), worst = a, up = false;
        for (int a : clamp_up)
          if (wf(a) - p.caps(free[a]) > amount)
            amount = wf(a) - p.caps(free[a]), worst = a, up = true;
        state[free[worst]] = up ? kUp : kLo;
        w(free[worst]) = up ? p.caps(free[worst]) : 0.0;
      } else {
        for (int a : clamp_lo) {
          state[free[a]] = kLo;
          w(free[a]) = 0.0;
        }
        for (int a : clamp_up) {
          state[free[a]] = kUp;
          w(free[a]) = p.caps(free[a]);
        }
      }
      continue;
    }
    for (int a = 0; a < m; ++a) w(free[a]) = std::max(0.0, wf(a));

    // dual feasibility of the bound variables against the group multipliers
    const Eigen::VectorXd grad = p.mult(w) + p.c;  // half the gradient
    const double dtol = 1e-10 * std::max(1.0, grad.cwiseAbs().maxCoeff());

    // groups with no free variable admit any multiplier inside a window;
    // take the midpoint, and let the worst-violator pass free someone when
    // the window is empty
    std::vector<double> tau_of(n_groups, 0.0);
    for (int k = 0; k < ng; ++k) tau_of[active_groups[k]] = tau(k);
    for (int gidx = 0; gidx < n_groups; ++gidx) {
      if (grow[gidx] >= 0) continue;
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (p.group[i] != gidx) continue;
        if (state[i] == kLo) hi = std::min(hi, grad(i));
        if (state[i] == kUp) lo = std::max(lo, grad(i));
      }
      tau_of[gidx] = (std::isfinite(lo) && std::isfinite(hi)) ? 0.5 * (lo + hi)
                     : std::isfinite(lo)                      ? lo
                     : std::isfinite(hi)                      ? hi
                                                              : 0.0;
    }

    int worst = -1;
    double violation = dtol;
    for (int i = 0; i < n; ++i) {
      if (state[i] == kFree) continue;
      const double ref = p.group[i] >= 0 ? tau_of[p.group[i]] : 0.0;
      const double v = state[i] == kLo ? ref - grad(i) : grad(i) - ref;
      if (v > violation) {
        violation = v;
        worst = i;
      }
    }
    if (worst < 0) {
      out.w = w;
      out.tau.assign(tau_of.begin(), tau_of.end());
      out.usable = true;
      out.exact = true;
      return out;
    }
    state[worst] = kFree;
  }

  out.w = w;  // ran out of moves; still a feasible candidate
  out.usable = true;
  return out;
}

struct EngineResult {
  Eigen::VectorXd w, g;  // g = 2(H w + c)
  std::vector<double> tau;
  double objective = 0.0;
  double kkt_residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Projected gradient with Barzilai-Borwein steps and a monotone safeguard,
// run in phases; between phases the active-set refiner tries to land the
// exact optimal face. Deterministic throughout.
EngineResult run_engine(const ProblemView& p, const Eigen::VectorXd& start,
                        const QpOptions& opts) {
  EngineResult r;
  Eigen::VectorXd w = p.project(start);
  Eigen::VectorXd hw = p.mult(w);
  double obj = objective_of(p, w, hw);
  Eigen::VectorXd g = 2.0 * (hw + p.c);
  double res = kkt_residual_of(p, w, g);

  double t = 1.0 / std::max(1e-300, 2.0 * p.step_hint);
  const double t_min = t * 1e-12, t_max = t * 1e12;
  int used = 0;

  auto try_refine = [&]() {
    if (!opts.polish) return false;
    const RefineOutcome ro = refine_active_set(p, w, 40 + p.n / 4);
    if (!ro.usable) return false;
    const Eigen::VectorXd hc = p.mult(ro.w);
    const double objc = objective_of(p, ro.w, hc);
    Eigen::VectorXd gc = 2.0 * (hc + p.c);
    const double resc = kkt_residual_of(p, ro.w, gc);
    if (resc < res || objc < obj - 1e-12 * std::abs(obj)) {
      w = ro.w;
      g.swap(gc);
      obj = objc;
      res = resc;
      r.tau = ro.tau;
      return true;
    }
    return false;
  };

  for (int phase = 0; res > opts.tol && used < opts.max_iter; ++phase) {
    const int budget = std::min(opts.max_iter - used, 400 << std::min(phase, 4));
    int it = 0;
    for (; it < budget && res > opts.tol; ++it) {
      Eigen::VectorXd wn = p.project(w - t * g);
      Eigen::VectorXd d = wn - w;
      double gd = g.dot(d);
      if (d.lpNorm<1>() <= 1e-17 * std::max(1.0, w.lpNorm<1>())) break;
      Eigen::VectorXd hwn = p.mult(wn);
      double objn = objective_of(p, wn, hwn);
      int backtracks = 0;
      while (objn > obj + 1e-4 * gd && backtracks < 60) {
        t *= 0.5;
        wn = p.project(w - t * g);
        d = wn - w;
        gd = g.dot(d);
        hwn = p.mult(wn);
        objn = objective_of(p, wn, hwn);
        ++backtracks;
      }
      if (objn > obj) break;  // numerically stationary
      Eigen::VectorXd gn = 2.0 * (hwn + p.c);
      const Eigen::VectorXd y = gn - g;
      const double sy = d.dot(y), ss = d.dot(d);
      t = (sy > 1e-300) ? std::clamp(ss / sy, t_min, t_max) : std::min(t * 2.0, t_max);
      w.swap(wn);
      g.swap(gn);
      obj = objn;
      res = kkt_residual_of(p, w, g);
    }
    used += it;
    if (res <= opts.tol) break;
    const bool moved = try_refine();
    if (it == 0 && !moved) break;  // neither pass can make progress
  }
  if (res > opts.tol) try_refine();

  r.w = w;
  r.g = g;
  r.objective = obj;
  r.kkt_residual = res;
  r.iterations = used;
  r.converged = res <= opts.tol;
  return r;
}

double multiplier_from(const Eigen::VectorXd& w, const Eigen::VectorXd& g,
                       const Eigen::VectorXd& caps) {
  // fallback estimate: mean of (H w + c) over strictly free coordinates
  const double scale = std::max(1e-300, w.cwiseAbs().maxCoeff());
  const double eps = 1e-8 * scale;
  double acc = 0.0;
  int count = 0;
  for (int i = 0; i < w.size(); ++i) {
    if (w(i) <= eps) continue;
    if (caps.size() > 0 && caps(i) - w(i) <= eps) continue;
    acc += 0.5 * g(i);
    ++count;
  }
  return count ? acc / count : 0.0;
}

}  // namespace

QpSolution solve(const QpProblem& p, const QpOptions& opts, const Eigen::VectorXd* start) {
  if (!p.Q) throw std::invalid_argument("qp solve: missing matrix");
  const int n = static_cast<int>(p.Q->rows());
  if (p.Q->cols() != n) throw std::invalid_argument("qp solve: matrix must be square");
  if (p.c.size() && p.c.size() != n) throw std::invalid_argument("qp solve: c size mismatch");
  if (p.caps.size() && p.caps.size() != n)
    throw std::invalid_argument("qp solve: caps size mismatch");

  const Eigen::MatrixXd& Q = *p.Q;
  ProblemView v;
  v.n = n;
  v.hess = [&Q](int i, int j) { return Q(i, j); };
  v.mult = [&Q](const Eigen::VectorXd& w) { return Eigen::VectorXd(Q * w); };
  v.c = p.c.size() ? p.c : Eigen::VectorXd::Zero(n);
  v.caps = p.caps;
  v.group.assign(n, p.mass ? 0 : -1);
  if (p.mass) v.masses = {*p.mass};
  v.step_hint = Q.diagonal().maxCoeff();
  if (p.mass) {
    const double mass = *p.mass;
    v.project = [&p, mass](const Eigen::VectorXd& x) {
      return project_capped_simplex(x, p.caps, mass);
    };
  } else {
    v.project = [&p](const Eigen::VectorXd& x) {
      Eigen::VectorXd w = x.cwiseMax(0.0);
      if (p.caps.size()) w = w.cwiseMin(p.caps);
      return w;
    };
  }

  Eigen::VectorXd s0;
  if (start) {
    s0 = *start;
    if (s0.size() != n) throw std::invalid_argument("qp solve: start size mismatch");
  } else {
    s0 = p.mass ? Eigen::VectorXd::Constant(n, *p.mass / n) : Eigen::VectorXd::Zero(n);
  }

  const EngineResult r = run_engine(v, s0, opts);
  QpSolution out;
  out.w = r.w;
  out.objective = r.objective;
  out.kkt_residual = r.kkt_residual;
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.multiplier = !p.mass          ? 0.0
                   : !r.tau.empty() ? r.tau[0]
                                    : multiplier_from(r.w, r.g, p.caps);
  return out;
}

TwoBlockSolution solve_two_block(Eigen::Ref<const Eigen::MatrixXd> A,
                                 Eigen::Ref<const Eigen::MatrixXd> C,
                                 Eigen::Ref<const Eigen::MatrixXd> B, const Eigen::VectorXd& f,
                                 double mass_p, double mass_m, const Eigen::VectorXd& caps_p,
                                 const QpOptions& opts, const Eigen::VectorXd* start_p,
                                 const Eigen::VectorXd* start_m) {
  const int np = static_cast<int>(A.rows());
  const int nm = static_cast<int>(B.rows());
  if (C.rows() != np || C.cols() != nm)
    throw std::invalid_argument("two-block: coupling block has wrong shape");
  if (f.size() && f.size() != np) throw std::invalid_argument("two-block: f size mismatch");
  if (caps_p.size() && caps_p.size() != np)
    throw std::invalid_argument("two-block: caps size mismatch");

  ProblemView v;
  v.n = np + nm;
  v.c = Eigen::VectorXd::Zero(np + nm);
  if (f.size()) v.c.head(np) = f;
  v.step_hint = std::max(A.diagonal().maxCoeff(), B.diagonal().maxCoeff());
  v.hess = [&A, &B, &C, np](int i, int j) {
    const bool ip = i < np, jp = j < np;
    if (ip && jp) return A(i, j);
    if (!ip && !jp) return B(i - np, j - np);
    if (ip) return -C(i, j - np);
    return -C(j, i - np);
  };
  v.mult = [&A, &B, &C, np, nm](const Eigen::VectorXd& z) {
    Eigen::VectorXd out(np + nm);
    out.head(np) = A * z.head(np) - C * z.tail(nm);
    out.tail(nm) = B * z.tail(nm) - C.transpose() * z.head(np);
    return out;
  };
  if (caps_p.size()) {
    v.caps.resize(np + nm);
    v.caps.head(np) = caps_p;
    v.caps.tail(nm).setConstant(std::numeric_limits<double>::infinity());
  }
  v.group.resize(np + nm);
  for (int i = 0; i < np + nm; ++i) v.group[i] = i < np ? 0 : 1;
  v.masses = {mass_p, mass_m};
  v.project = [caps_p, mass_p, mass_m, np, nm](const Eigen::VectorXd& z) {
    static const Eigen::VectorXd no_caps;
    Eigen::VectorXd out(np + nm);
    out.head(np) = project_capped_simplex(z.head(np), caps_p, mass_p);
    out.tail(nm) = project_capped_simplex(z.tail(nm), no_caps, mass_m);
    return out;
  };

  Eigen::VectorXd s0(np + nm);
  s0.head(np) = start_p ? *start_p : Eigen::VectorXd::Constant(np, mass_p / np);
  s0.tail(nm) = start_m ? *start_m : Eigen::VectorXd::Constant(nm, mass_m / nm);

  const EngineResult r = run_engine(v, s0, opts);
  TwoBlockSolution out;
  out.wp = r.w.head(np);
  out.wm = r.w.tail(nm);
  out.objective = r.objective;
  out.kkt_residual = r.kkt_residual;
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.multiplier_p =
      r.tau.size() == 2 ? r.tau[0] : multiplier_from(out.wp, r.g.head(np), caps_p);
  out.multiplier_m = r.tau.size() == 2 ? r.tau[1]
                                       : multiplier_from(out.wm, r.g.tail(nm), Eigen::VectorXd());
  return out;
}

}  // namespace condenser
