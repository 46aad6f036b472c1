#include "homlab/cell_solver.hh"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace homlab {

namespace {

void zero_pinned(Vector & v, const std::vector<int> & pinned) {
  for (const int i : pinned) v(i) = 0.0;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double smoothing_gap(const CellProblem & pb, double delta) {
  const auto * pp = std::get_if<PurePower>(&pb.integrand.form());
  if (pp == nullptr || pp->exponent != 1.0 || delta <= 0.0) return 0.0;
  double wmax = 0.0;
  for (const auto & [r, w] : pb.integrand.region_weights()) wmax = std::max(wmax, w);
  const double measure =
      std::visit([](const auto & c) { return c.measure_per_unit_cell(); }, *pb.structure);
  return delta * measure * wmax * pp->weight;
}

/* ---------------------------------------------------------------------- */
SolveReport solve_quadratic(const CellProblem & pb, const SolverOptions & opt) {
  SolveReport rep;
  rep.method = "conjugate-gradient";
  const auto pinned = pb.pinned_dofs();

  // with a zero datum the energy is a homogeneous quadratic, so its gradient is H·v exactly
  CellProblem homogeneous = pb;
  homogeneous.strain = SymMatrix(pb.dim());
  homogeneous.frame_rotation = SkewMatrix(pb.dim());
  DofVector probe = pb.zero_dofs();
  auto apply_h = [&](const Vector & v) {
    probe.values = v;
    Vector hv = assemble_energy(homogeneous, probe).gradient;
    zero_pinned(hv, pinned);
    return hv;
  };

  DofVector x = pb.zero_dofs();
  Vector b = -assemble_energy(pb, x).gradient;
  zero_pinned(b, pinned);
  const double bnorm = b.norm();
  auto energy_at = [&](const DofVector & u) { return assemble_energy(pb, u).energy; };

  if (opt.record_history) rep.energy_history.push_back(energy_at(x));
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.g = energy_at(x);
    rep.minimizer = x;
    return rep;
  }

  const double tol = opt.cg_relative_residual * bnorm;
  const int max_it = std::min(opt.max_iterations, 10 * pb.dof_count() + 100);
  Vector r = b;
  Vector p = r;
  double rr = r.squaredNorm();
  int it = 0;
  bool converged = false;
  while (it < max_it) {
    const Vector Ap = apply_h(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) {
      rep.message = "conjugate gradient hit a non-positive curvature direction";
      break;
    }
    const double step = rr / pAp;
    x.values += step * p;
    r -= step * Ap;
    ++it;
    if (opt.record_history) rep.energy_history.push_back(energy_at(x));
    double rr_new = r.squaredNorm();
    if (std::sqrt(rr_new) <= tol) {
      // confirm against the true residual, restarting if the recurrence drifted
      r = b - apply_h(x.values);
      rr_new = r.squaredNorm();
      if (std::sqrt(rr_new) <= tol) {
        converged = true;
        break;
      }
      p = r;
      rr = rr_new;
      continue;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  rep.iterations = it;
  rep.residual = (b - apply_h(x.values)).norm() / bnorm;
  rep.converged = converged;
  if (!converged && rep.message.empty()) {
    std::ostringstream os;
    os << "conjugate gradient stopped after " << it << " iterations at relative residual " << rep.residual;
    rep.message = os.str();
  }
  rep.g = energy_at(x);
  rep.minimizer = std::move(x);
  return rep;
}

/* ---------------------------------------------------------------------- */
SolveReport solve_descent(const CellProblem & pb, const SolverOptions & opt, double delta, double tolerance,
                          DofVector x) {
  SolveReport rep;
  rep.method = "l-bfgs";
  const auto pinned = pb.pinned_dofs();

  auto evaluate = [&](const DofVector & u) {
    auto ev = assemble_energy(pb, u, delta);
    zero_pinned(ev.gradient, pinned);
    return ev;
  };

  auto cur = evaluate(x);
  if (opt.record_history) rep.energy_history.push_back(cur.energy);

  constexpr std::size_t memory = 10;
  std::deque<std::pair<Vector, Vector>> pairs;  // (s, y)
  int it = 0;
  bool converged = cur.gradient.norm() < tolerance;
  while (!converged && it < opt.max_iterations) {
    // two-loop recursion
    Vector d = -cur.gradient;
    std::vector<double> alphas(pairs.size());
    for (std::size_t i = pairs.size(); i-- > 0;) {
      const auto & [s, y] = pairs[i];
      alphas[i] = s.dot(d) / y.dot(s);
      d -= alphas[i] * y;
    }
    if (!pairs.empty()) {
      const auto & [s, y] = pairs.back();
      d *= s.dot(y) / y.squaredNorm();
    } else {
      d /= std::max(1.0, cur.gradient.norm());
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto & [s, y] = pairs[i];
      const double beta = y.dot(d) / y.dot(s);
      d += (alphas[i] - beta) * s;
    }
    double slope = cur.gradient.dot(d);
    if (!(slope < 0.0)) {
      pairs.clear();
      d = -cur.gradient / std::max(1.0, cur.gradient.norm());
      slope = cur.gradient.dot(d);
    }

    double t = 1.0;
    bool accepted = false;
    DofVector trial = x;
    EnergyEvaluation next;
    for (int ls = 0; ls < 60; ++ls) {
      trial.values = x.values + t * d;
      next = evaluate(trial);
      if (next.energy <= cur.energy + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      // near the roundoff floor of the energy, fall back to approximate Wolfe conditions on the slope
      const double trial_slope = next.gradient.dot(d);
      if (next.energy <= cur.energy + 1e-14 * std::abs(cur.energy) && trial_slope <= -0.8 * slope &&
          trial_slope >= 0.9 * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!pairs.empty()) {
        pairs.clear();
        continue;
      }
      rep.message = "line search failed to decrease the energy";
      break;
    }
    Vector s = trial.values - x.values;
    Vector y = next.gradient - cur.gradient;
    if (s.dot(y) > 1e-16 * s.norm() * y.norm()) {
      pairs.emplace_back(std::move(s), std::move(y));
      if (pairs.size() > memory) pairs.pop_front();
    }
    x = std::move(trial);
    cur = std::move(next);
    ++it;
    if (opt.record_history) rep.energy_history.push_back(cur.energy);
    converged = cur.gradient.norm() < tolerance;
  }
  rep.iterations = it;
  rep.residual = cur.gradient.norm();
  rep.converged = converged;
  if (!converged && rep.message.empty()) {
    std::ostringstream os;
    os << "descent stopped after " << it << " iterations with gradient norm " << rep.residual;
    rep.message = os.str();
  } else if (!converged) {
    std::ostringstream os;
    os << rep.message << " (gradient norm " << rep.residual << ")";
    rep.message = os.str();
  }
  rep.g = cur.energy;
  rep.minimizer = std::move(x);
  return rep;
}

}  // namespace

SolveReport solve(const CellProblem & problem, const SolverOptions & options) {
  if (!problem.integrand.is_convex()) throw std::invalid_argument("solve: integrand is not convex");
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport rep;
  if (problem.integrand.is_quadratic()) {
    rep = solve_quadratic(problem, options);
  } else if (problem.integrand.exponent() == 1.0 && options.huber_delta > 0.0) {
    // continuation in the smoothing parameter, warm-starting each stage
    DofVector x = problem.zero_dofs();
    std::vector<double> history;
    int iterations = 0;
    for (double delta = 1e-1;; delta *= 0.1) {
      const bool last = delta <= options.huber_delta * (1.0 + 1e-12);
      const double d = last ? options.huber_delta : delta;
      rep = solve_descent(problem, options, d, last ? options.gradient_tolerance : 1e-6, std::move(x));
      iterations += rep.iterations;
      history.insert(history.end(), rep.energy_history.begin(), rep.energy_history.end());
      x = rep.minimizer;
      if (last) break;
    }
    rep.iterations = iterations;
    rep.energy_history = std::move(history);
  } else {
    rep = solve_descent(problem, options, options.huber_delta, options.gradient_tolerance, problem.zero_dofs());
  }
  rep.smoothing_gap_bound = smoothing_gap(problem, options.huber_delta);
  rep.wall_time = seconds_since(t0);
  return rep;
}

/* ---------------------------------------------------------------------- */
FhomEstimate f_hom_estimate(const StructureSpec & spec, const Integrand & f, const SymMatrix & A,
                            const std::vector<int> & ks, const SolverOptions & options) {
  if (ks.empty()) throw std::invalid_argument("f_hom_estimate: empty k list");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1 || (i > 0 && ks[i] <= ks[i - 1])) {
      throw std::invalid_argument("f_hom_estimate: k list must be positive and increasing");
    }
  }
  FhomEstimate est;
  est.ks = ks;
  est.estimate = std::numeric_limits<double>::infinity();
  std::ostringstream msg;
  for (const int k : ks) {
    CellProblem pb(spec.build(k), f, A, spec.face_quadrature);
    est.reports.push_back(solve(pb, options));
    const auto & r = est.reports.back();
    if (!r.converged) {
      est.flagged = true;
      msg << "k=" << k << ": " << r.message << "; ";
    }
    est.estimate = std::min(est.estimate, r.g);
  }
  // a k-periodic competitor is also jk-periodic, so g_{jk} <= g_k
  for (std::size_t i = 0; i < ks.size(); ++i) {
    for (std::size_t j = i + 1; j < ks.size(); ++j) {
      if (ks[j] % ks[i] != 0) continue;
      const double gi = est.reports[i].g;
      const double gj = est.reports[j].g;
      if (gj > gi + options.subadditivity_slack) {
        est.subadditive = false;
        est.flagged = true;
        msg << "subadditivity violated: g_" << ks[j] << " - g_" << ks[i] << " = " << gj - gi << "; ";
      }
    }
  }
  est.last_decrement = ks.size() > 1 ? est.reports[ks.size() - 2].g - est.reports.back().g : 0.0;
  est.message = msg.str();
  return est;
}

}  // namespace homlab
