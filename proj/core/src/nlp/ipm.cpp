#include "hgbd/nlp/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hgbd {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::MaxIter:
      return "max-iter";
    case SolveStatus::NumericalFailure:
      return "numerical-failure";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::span<const double> span_of(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// Inequalities c(x) <= 0 in multiplier order [g | lower | finite upper].
class SubproblemView {
 public:
  SubproblemView(const MinlpInstance& inst, const BinaryAssignment& y, double relax)
      : inst_(inst), relax_(relax) {
    const Vector yv = y.to_vector();
    by_ = inst.B() * yv;
    ay_ = inst.A() * yv;
    n_ = inst.n();
    q_ = inst.q();
    mi_ = inst.inequality_count();
    p_ = inst.p();
  }

  std::size_t n() const { return n_; }
  std::size_t mi() const { return mi_; }
  std::size_t p() const { return p_; }

  // c(x) - relax
  Vector ineq(const Vector& x) const {
    Vector c(static_cast<Eigen::Index>(mi_));
    const auto xs = span_of(x);
    for (std::size_t i = 0; i < q_; ++i) c[idx(i)] = inst_.g()[i].eval(xs) + by_[idx(i)];
    for (std::size_t j = 0; j < n_; ++j) c[idx(q_ + j)] = inst_.lower()[idx(j)] - x[idx(j)];
    const auto& fu = inst_.finite_upper();
    for (std::size_t k = 0; k < fu.size(); ++k) {
      c[idx(q_ + n_ + k)] = x[idx(fu[k])] - inst_.upper()[idx(fu[k])];
    }
    c.array() -= relax_;
    return c;
  }

  Vector eq(const Vector& x) const {
    Vector h(static_cast<Eigen::Index>(p_));
    for (std::size_t j = 0; j < p_; ++j) h[idx(j)] = inst_.h()[j].eval(span_of(x)) + ay_[idx(j)];
    return h;
  }

  Vector grad_f(const Vector& x) const { return eval_grad(inst_.f_derivatives(), x); }

  Matrix ineq_jacobian(const Vector& x) const {
    Matrix J = Matrix::Zero(static_cast<Eigen::Index>(mi_), static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < q_; ++i) J.row(idx(i)) = eval_grad(inst_.g_derivatives()[i], x).transpose();
    for (std::size_t j = 0; j < n_; ++j) J(idx(q_ + j), idx(j)) = -1.0;
    const auto& fu = inst_.finite_upper();
    for (std::size_t k = 0; k < fu.size(); ++k) J(idx(q_ + n_ + k), idx(fu[k])) = 1.0;
    return J;
  }

  Matrix eq_jacobian(const Vector& x) const {
    Matrix J(static_cast<Eigen::Index>(p_), static_cast<Eigen::Index>(n_));
    for (std::size_t j = 0; j < p_; ++j) J.row(idx(j)) = eval_grad(inst_.h_derivatives()[j], x).transpose();
    return J;
  }

  // Hessian of f + z_g' g + lambda' h.
  Matrix lagrangian_hessian(const Vector& x, const Vector& z, const Vector& lambda) const {
    Matrix W = Matrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    add_hessian(W, inst_.f_derivatives(), x, 1.0);
    for (std::size_t i = 0; i < q_; ++i) add_hessian(W, inst_.g_derivatives()[i], x, z[idx(i)]);
    for (std::size_t j = 0; j < p_; ++j) add_hessian(W, inst_.h_derivatives()[j], x, lambda[idx(j)]);
    return W;
  }

 private:
  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

  Vector eval_grad(const FunctionDerivatives& d, const Vector& x) const {
    Vector gvec(static_cast<Eigen::Index>(n_));
    const auto xs = span_of(x);
    for (std::size_t j = 0; j < n_; ++j) gvec[idx(j)] = d.grad[j].eval(xs);
    return gvec;
  }

  void add_hessian(Matrix& W, const FunctionDerivatives& d, const Vector& x, double w) const {
    if (d.linear || w == 0.0) return;
    const auto xs = span_of(x);
    for (const auto& entry : d.hessian) {
      const double v = w * entry.value.eval(xs);
      W(idx(entry.row), idx(entry.col)) += v;
      if (entry.row != entry.col) W(idx(entry.col), idx(entry.row)) += v;
    }
  }

  const MinlpInstance& inst_;
  double relax_;
  Vector by_, ay_;
  std::size_t n_ = 0, q_ = 0, mi_ = 0, p_ = 0;
};

struct Iterate {
  Vector x, s, z, lambda;
};

struct Residuals {
  Vector dual, primal, eq, comp;
  double merit() const {
    return dual.squaredNorm() + primal.squaredNorm() + eq.squaredNorm() + comp.squaredNorm();
  }
  double max_abs() const {
    double m = 0.0;
    for (const Vector* v : {&dual, &primal, &eq, &comp}) {
      if (v->size()) m = std::max(m, v->cwiseAbs().maxCoeff());
    }
    return m;
  }
};

Residuals residuals(const SubproblemView& view, const Iterate& it, double barrier) {
  Residuals r;
  const Matrix J = view.ineq_jacobian(it.x);
  r.dual = view.grad_f(it.x) + J.transpose() * it.z;
  if (view.p()) r.dual += view.eq_jacobian(it.x).transpose() * it.lambda;
  r.primal = view.ineq(it.x) + it.s;
  r.eq = view.eq(it.x);
  r.comp = it.s.cwiseProduct(it.z).array() - barrier;
  return r;
}

double max_step(const Vector& v, const Vector& dv, double tau) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -tau * v[i] / dv[i]);
  }
  return alpha;
}

}  // namespace

SubproblemSolution SubproblemSolver::solve(const MinlpInstance& inst, const BinaryAssignment& y) {
  if (y.size() != inst.m()) throw DimensionError("y has wrong length");
  const IpmOptions& opt = options_;
  SubproblemView view(inst, y, opt.relax);
  const auto n = static_cast<Eigen::Index>(view.n());
  const auto mi = static_cast<Eigen::Index>(view.mi());
  const auto p = static_cast<Eigen::Index>(view.p());

  Iterate it;
  it.x = Vector(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lo = inst.lower()[j], hi = inst.upper()[j];
    it.x[j] = std::isfinite(hi) ? 0.5 * (lo + hi) : lo + 1.0;
  }
  double barrier = opt.barrier_init;
  it.s = (-view.ineq(it.x)).cwiseMax(1.0);
  it.z = it.s.cwiseInverse() * barrier;
  it.lambda = Vector::Zero(p);

  SubproblemSolution sol;
  sol.status = SolveStatus::MaxIter;
  sol.merit_trace.emplace_back();

  double reg = opt.regularization;
  int iter = 0;
  for (;;) {
    Residuals r;
    try {
      r = residuals(view, it, barrier);
    } catch (const DomainError&) {
      sol.status = SolveStatus::NumericalFailure;
      break;
    }
    if (r.max_abs() <= opt.barrier_tol_factor * barrier) {
      const ResidualTriple kkt = kkt_residuals(inst, y, it.x, it.lambda, it.z);
      if (kkt.stationarity <= opt.tol && kkt.primal_feasibility <= opt.tol &&
          kkt.complementarity <= opt.tol) {
        sol.status = SolveStatus::Optimal;
        break;
      }
      if (barrier > opt.barrier_min) {
        barrier = std::max(opt.barrier_min, barrier * opt.barrier_factor);
        sol.merit_trace.emplace_back();
        continue;
      }
    }
    if (iter >= opt.max_iter) {
      sol.status = SolveStatus::MaxIter;
      break;
    }

    // Newton direction on the perturbed KKT system (slacks and z eliminated).
    const Matrix J = view.ineq_jacobian(it.x);
    const Vector sigma = it.z.cwiseQuotient(it.s);
    Matrix M = view.lagrangian_hessian(it.x, it.z, it.lambda) +
               J.transpose() * sigma.asDiagonal() * J;
    const Vector rhs_x =
        -r.dual + J.transpose() * (r.comp.cwiseQuotient(it.s) - sigma.cwiseProduct(r.primal));

    Vector dx, dlambda;
    bool factored = false;
    for (int attempt = 0; attempt <= opt.max_regularization_retries && !factored; ++attempt) {
      if (p == 0) {
        Eigen::LLT<Matrix> llt(M + reg * Matrix::Identity(n, n));
        if (llt.info() == Eigen::Success) {
          dx = llt.solve(rhs_x);
          dlambda = Vector::Zero(0);
          factored = dx.allFinite();
        }
      } else {
        Matrix KKT = Matrix::Zero(n + p, n + p);
        const Matrix Jh = view.eq_jacobian(it.x);
        KKT.topLeftCorner(n, n) = M + reg * Matrix::Identity(n, n);
        KKT.topRightCorner(n, p) = Jh.transpose();
        KKT.bottomLeftCorner(p, n) = Jh;
        KKT.bottomRightCorner(p, p) = -reg * Matrix::Identity(p, p);
        Vector rhs(n + p);
        rhs << rhs_x, -r.eq;
        Eigen::FullPivLU<Matrix> lu(KKT);
        if (lu.isInvertible()) {
          const Vector sol_vec = lu.solve(rhs);
          dx = sol_vec.head(n);
          dlambda = sol_vec.tail(p);
          factored = sol_vec.allFinite();
        }
      }
      if (!factored) reg *= opt.regularization_growth;
    }
    if (!factored) {
      sol.status = SolveStatus::NumericalFailure;
      break;
    }
    reg = std::max(opt.regularization, reg / opt.regularization_growth);

    const Vector ds = -r.primal - J * dx;
    const Vector dz = -r.comp.cwiseQuotient(it.s) + sigma.cwiseProduct(r.primal + J * dx);

    const double tau = opt.fraction_to_boundary;
    double alpha = std::min(max_step(it.s, ds, tau), max_step(it.z, dz, tau));
    const double merit0 = r.merit();
    bool accepted = false;
    Iterate trial;
    double merit_new = kInf;
    for (int bt = 0; bt < 60; ++bt) {
      trial.x = it.x + alpha * dx;
      trial.s = it.s + alpha * ds;
      trial.z = it.z + alpha * dz;
      trial.lambda = p ? Vector(it.lambda + alpha * dlambda) : it.lambda;
      try {
        merit_new = residuals(view, trial, barrier).merit();
      } catch (const DomainError&) {
        merit_new = kInf;
      }
      if (merit_new <= (1.0 - 2e-4 * alpha) * merit0) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++iter;
    if (!accepted) {
      sol.status = SolveStatus::NumericalFailure;
      break;
    }
    it = std::move(trial);
    sol.merit_trace.back().push_back(merit_new);
  }

  sol.x = it.x;
  sol.lambda = it.lambda;
  sol.mu = it.z;
  sol.iterations = iter;
  try {
    sol.Z = evaluate_objective(inst, sol.x, y);
  } catch (const DomainError&) {
    sol.Z = kInf;
    sol.status = SolveStatus::NumericalFailure;
  }
  (void)mi;
  return sol;
}

SubproblemSolution solve_subproblem(const MinlpInstance& inst, const BinaryAssignment& y,
                                    const IpmOptions& options) {
  SubproblemSolver solver(options);
  return solver.solve(inst, y);
}

}  // namespace hgbd
