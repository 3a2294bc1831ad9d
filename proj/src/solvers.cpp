#include "ratkryl/solvers.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "ratkryl/linops.hpp"

namespace ratkryl {

namespace {

constexpr double kDenomGuard = 1e-14;   // relative floor for every scalar denominator
constexpr double kStagnationFactor = 10.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Appends a row and evaluates the configured rule plus the stagnation guard
// (residual above kStagnationFactor times its running minimum). Returns true when
// the solver should stop, with trace.stop_reason set.
class TraceRecorder {
 public:
  TraceRecorder(SolverTrace& trace, const DenseMatrix& A, const RealVector& y,
                const StoppingRule& stop, const RealVector* x_exact, DiagnosticsSink* diag)
      : trace_(trace), A_(A), y_(y), stop_(stop), x_exact_(x_exact), diag_(diag),
        t0_(Clock::now()) {}

  bool record(IterationState& st) {
    TraceRow row;
    row.n = st.n;
    row.ls_residual = (A_ * st.x - y_).norm();
    st.ls_residual_norm = row.ls_residual;
    if (x_exact_ != nullptr) row.error = (st.x - *x_exact_).norm();
    row.t_wall = seconds_since(t0_);
    row.x = st.x;
    trace_.rows.push_back(std::move(row));
    if (diag_ != nullptr) {
      diag_->p.push_back(st.p);
      diag_->r.push_back(st.r);
    }
    min_residual_ = std::min(min_residual_, trace_.rows.back().ls_residual);
    const StopDecision d = should_stop(stop_, trace_);
    if (d.stop) {
      trace_.stop_reason = d.reason;
      return true;
    }
    if (trace_.rows.back().ls_residual > kStagnationFactor * min_residual_) {
      trace_.stop_reason = StopReason::stagnation;
      return true;
    }
    return false;
  }

 private:
  SolverTrace& trace_;
  const DenseMatrix& A_;
  const RealVector& y_;
  const StoppingRule& stop_;
  const RealVector* x_exact_;
  DiagnosticsSink* diag_;
  Clock::time_point t0_;
  double min_residual_ = std::numeric_limits<double>::infinity();
};

bool denom_ok(double denom, double scale) {
  return std::abs(denom) > kDenomGuard * scale && std::isfinite(denom);
}

}  // namespace

// ---------------------------------------------------------------------------
// AlphaSchedule
// ---------------------------------------------------------------------------

AlphaSchedule AlphaSchedule::standard() {
  AlphaSchedule s;
  s.kind_ = Kind::standard;
  return s;
}

AlphaSchedule AlphaSchedule::geometric(double a, double q, int s) {
  if (!(a > 0.0)) throw ContractViolation("AlphaSchedule::geometric: a must be positive");
  if (!(q > 1.0)) throw ContractViolation("AlphaSchedule::geometric: q must exceed 1");
  AlphaSchedule out;
  out.kind_ = Kind::geometric;
  out.a_ = a;
  out.q_ = q;
  out.s_ = s;
  return out;
}

double AlphaSchedule::alpha(int i) const {
  if (i < 1) throw ContractViolation("AlphaSchedule::alpha: index is 1-based");
  const double v = kind_ == Kind::standard ? std::pow(10.0, -i - 1)
                                           : a_ * std::pow(q_, s_ - i);
  if (!(v > 0.0)) {
    std::ostringstream os;
    os << "AlphaSchedule::alpha: alpha_" << i << " underflowed to " << v;
    throw ContractViolation(os.str());
  }
  return v;
}

std::vector<double> AlphaSchedule::first(int k) const {
  std::vector<double> out;
  out.reserve(k);
  for (int i = 1; i <= k; ++i) out.push_back(alpha(i));
  return out;
}

std::string AlphaSchedule::describe() const {
  if (kind_ == Kind::standard) return "default";
  std::ostringstream os;
  os << "geometric(a=" << a_ << ";q=" << q_ << ";s=" << s_ << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// Direct methods
// ---------------------------------------------------------------------------

RealVector tikhonov(const DenseMatrix& A, const RealVector& y, double alpha) {
  const TikhonovFactorization F(A, alpha);
  return F.solve(A.transpose() * y);
}

AggregateResult aggregate(const DenseMatrix& A, const RealVector& y,
                          const std::vector<double>& alphas) {
  if (alphas.empty()) throw ContractViolation("aggregate: needs at least one alpha");
  const int N = static_cast<int>(alphas.size());
  std::vector<RealVector> xs;
  xs.reserve(N);
  DenseMatrix W(y.size(), N);  // columns A x_{alpha_i}
  for (int i = 0; i < N; ++i) {
    xs.push_back(tikhonov(A, y, alphas[i]));
    W.col(i) = A * xs.back();
  }
  RealVector c;
  try {
    c = dense_least_squares(W, y);
  } catch (const NearSingularError& e) {
    // Identify the most collinear pair of aggregated columns for the error report.
    int ca = 0, cb = 1;
    double worst = -1.0;
    for (int i = 0; i < N; ++i) {
      for (int j = i + 1; j < N; ++j) {
        const double denom = W.col(i).norm() * W.col(j).norm();
        const double cosij = denom > 0.0 ? std::abs(W.col(i).dot(W.col(j))) / denom : 1.0;
        if (cosij > worst) {
          worst = cosij;
          ca = i;
          cb = j;
        }
      }
    }
    std::ostringstream os;
    os << "aggregate: Gramian numerically singular (pivot ratio " << e.pivot_ratio
       << "); most collinear columns are " << ca + 1 << " and " << cb + 1
       << " (|cos| = " << worst << ")";
    NearSingularError out(e.pivot_ratio, os.str());
    out.col_a = ca;
    out.col_b = cb;
    throw out;
  }
  AggregateResult res;
  res.coefficients = c;
  res.x = RealVector::Zero(A.cols());
  for (int i = 0; i < N; ++i) res.x += c[i] * xs[i];
  return res;
}

// ---------------------------------------------------------------------------
// CGNE
// ---------------------------------------------------------------------------

SolverTrace cgne(const DenseMatrix& A, const RealVector& y, const StoppingRule& stop,
                 const RealVector* x_exact, DiagnosticsSink* diag) {
  SolverTrace trace;
  TraceRecorder rec(trace, A, y, stop, x_exact, diag);
  IterationState st;
  st.x = RealVector::Zero(A.cols());
  RealVector s = y;
  RealVector rbar = A.transpose() * s;
  if (rbar.norm() == 0.0) {
    st.n = 1;
    st.r = -rbar;
    st.p = rbar;
    rec.record(st);
    trace.stop_reason = StopReason::stagnation;
    return trace;
  }
  st.p = rbar;
  double gamma = rbar.squaredNorm();
  for (;;) {
    ++st.n;
    const RealVector q = A * st.p;
    const double d = q.squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) {
      trace.stop_reason = StopReason::breakdown;
      break;
    }
    const double a = gamma / d;
    st.x += a * st.p;
    s -= a * q;
    rbar = A.transpose() * s;
    st.r = -rbar;  // normal-equation residual (A^T A) x - A^T y
    const double g2 = rbar.squaredNorm();
    const RealVector p_prev = st.p;
    st.p = rbar + (g2 / gamma) * st.p;
    gamma = g2;
    // Record with the direction that produced x_n, matching the other solvers.
    IterationState snap = st;
    snap.p = p_prev;
    if (rec.record(snap)) break;
    if (!(gamma > 0.0)) {
      trace.stop_reason = StopReason::breakdown;
      break;
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Arnoldi process for the mixed space
// ---------------------------------------------------------------------------

KrylovBasis arnoldi_kr(const DenseMatrix& A, const RealVector& y,
                       const AlphaSchedule& alphas, int n_max) {
  if (n_max < 1) throw ContractViolation("arnoldi_kr: n_max must be at least 1");
  const RealVector ybar = A.transpose() * y;
  if (ybar.norm() == 0.0) throw ContractViolation("arnoldi_kr: A^T y is zero");
  std::vector<RealVector> basis;
  basis.push_back(ybar / ybar.norm());
  KrylovBasis out;
  for (int i = 2; i <= n_max; ++i) {
    RealVector v;
    if (i % 2 == 0) {
      const int k = i / 2;
      try {
        const TikhonovFactorization F(A, alphas.alpha(k));
        v = F.solve(basis.back());
      } catch (const FactorizationError&) {
        // Extreme shifts can defeat the factorization; growth stops, no crash.
        out.breakdown = true;
        out.breakdown_index = i;
        break;
      }
      out.alphas_used.push_back(alphas.alpha(k));
    } else {
      v = gram_apply(A, basis.back());
    }
    const OrthoResult o = orthonormalize_against(v, basis);
    if (o.breakdown()) {
      out.breakdown = true;
      out.breakdown_index = i;
      break;
    }
    basis.push_back(*o.q);
  }
  const int n = static_cast<int>(basis.size());
  out.Q.resize(A.cols(), n);
  for (int j = 0; j < n; ++j) out.Q.col(j) = basis[j];
  const DenseMatrix W = A * out.Q;
  out.T = W.transpose() * W;
  return out;
}

// ---------------------------------------------------------------------------
// Short-recurrence iteration (coupled to the Arnoldi basis)
// ---------------------------------------------------------------------------

SolverTrace lanczos_kr(const DenseMatrix& A, const RealVector& y,
                       const AlphaSchedule& alphas, const StoppingRule& stop,
                       const RealVector* x_exact, DiagnosticsSink* diag) {
  SolverTrace trace;
  TraceRecorder rec(trace, A, y, stop, x_exact, diag);
  const RealVector ybar = A.transpose() * y;
  if (ybar.norm() == 0.0) throw ContractViolation("lanczos_kr: A^T y is zero");
  const RealVector Ay = gram_apply(A, ybar);
  const double init_denom = Ay.dot(ybar);
  if (!denom_ok(init_denom, Ay.norm() * ybar.norm())) {
    trace.stop_reason = StopReason::breakdown;
    return trace;
  }

  std::vector<RealVector> Q;
  Q.push_back(ybar / ybar.norm());
  IterationState st;
  double tau = ybar.squaredNorm() / init_denom;
  st.n = 1;
  st.p = tau * Q[0];
  st.x = tau * ybar;
  st.r = gram_apply(A, st.x) - ybar;
  if (rec.record(st)) return trace;

  double sigma = 0.0, beta = 0.0, beta_old = 0.0, tau_old = 0.0;
  for (;;) {
    const int n = st.n + 1;
    if (n % 2 == 0) {
      // Rational step: extend the basis with a shifted solve, then the rank-one
      // direction update with scalars from the new projected column.
      const int k = n / 2;
      RealVector v;
      try {
        const TikhonovFactorization F(A, alphas.alpha(k));
        v = F.solve(Q.back());
      } catch (const FactorizationError&) {
        trace.stop_reason = StopReason::breakdown;
        break;
      }
      const OrthoResult o = orthonormalize_against(v, Q);
      if (o.breakdown()) {
        trace.stop_reason = StopReason::breakdown;
        break;
      }
      Q.push_back(*o.q);
      const RealVector Aq = gram_apply(A, Q.back());
      const double kap = Q.back().dot(Aq);
      beta = Q[Q.size() - 2].dot(Aq);
      const double denom = kap - tau * beta * beta;
      if (!denom_ok(denom, std::abs(kap) + std::abs(tau * beta * beta))) {
        trace.stop_reason = StopReason::breakdown;
        break;
      }
      tau_old = tau;
      tau = 1.0 / denom;
      sigma = -tau * beta;
      st.p_old = st.p;
      st.p = sigma * st.p + tau * Q.back();
      const double xi = -beta * st.x.dot(Q[Q.size() - 2]);
      st.x += xi * st.p;
    } else {
      // Power step: three-term recurrence; the new direction's coefficients solve a
      // 3x3 system assembled from the current projected entries and carried scalars.
      const RealVector v = gram_apply(A, Q.back());
      const OrthoResult o = orthonormalize_against(v, Q);
      if (o.breakdown()) {
        trace.stop_reason = StopReason::breakdown;
        break;
      }
      Q.push_back(*o.q);
      beta_old = beta;
      const RealVector Aq = gram_apply(A, Q.back());
      const double kap = Q.back().dot(Aq);
      beta = Q[Q.size() - 2].dot(Aq);
      const double gam = Q[Q.size() - 3].dot(Aq);
      Eigen::Matrix3d M;
      M << 0.0, gam, 1.0,
           1.0, beta, tau_old * beta_old,
           beta * tau + gam * sigma * tau_old, kap, tau_old * gam;
      const double det = M.determinant();
      if (std::abs(det) < kDenomGuard * M.norm() || !std::isfinite(det)) {
        trace.stop_reason = StopReason::breakdown;
        break;
      }
      tau_old = tau;
      const Eigen::Vector3d sol = M.fullPivLu().solve(Eigen::Vector3d(0.0, 0.0, 1.0));
      sigma = sol[0];
      tau = sol[1];
      const double eta = sol[2];
      const RealVector p_new = sigma * st.p + eta * st.p_old + tau * Q.back();
      st.p_old = st.p;
      st.p = p_new;
      const double xi =
          -gam * st.x.dot(Q[Q.size() - 3]) - beta * st.x.dot(Q[Q.size() - 2]);
      st.x += xi * st.p;
    }
    st.n = n;
    st.r = gram_apply(A, st.x) - ybar;
    if (rec.record(st)) break;
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Rational CG
// ---------------------------------------------------------------------------

namespace {

// Shared init and x/r update tail; the even-step direction update is the only part
// that differs between the real and complex-step variants.
template <typename EvenStep>
SolverTrace rational_cg_impl(const DenseMatrix& A, const RealVector& y,
                             const StoppingRule& stop, const RealVector* x_exact,
                             DiagnosticsSink* diag, EvenStep even_step) {
  SolverTrace trace;
  TraceRecorder rec(trace, A, y, stop, x_exact, diag);
  const RealVector ybar = A.transpose() * y;
  if (ybar.norm() == 0.0) throw ContractViolation("rational_cg: A^T y is zero");
  const RealVector Ay = gram_apply(A, ybar);
  const double init_denom = Ay.dot(ybar);
  if (!denom_ok(init_denom, Ay.norm() * ybar.norm())) {
    trace.stop_reason = StopReason::breakdown;
    return trace;
  }
  const double normA2 = A.squaredNorm();  // Frobenius bound on ||A^T A||

  IterationState st;
  st.n = 1;
  st.x = (ybar.squaredNorm() / init_denom) * ybar;
  st.r = gram_apply(A, st.x) - ybar;
  st.p = st.x;
  st.p_old = RealVector::Zero(st.p.size());
  if (rec.record(st)) return trace;

  for (;;) {
    const int n = st.n + 1;
    if (n % 2 == 0) {
      bool ok = false;
      try {
        ok = even_step(n / 2, st);
      } catch (const FactorizationError&) {
        ok = false;  // extreme shifts defeat the factorization: breakdown, not a crash
      }
      if (!ok) {
        trace.stop_reason = StopReason::breakdown;
        break;
      }
    } else {
      // Both coefficients are quotients of forward-image inner products: <A u, A v>
      // in place of <(A^T A) u, v>.
      const RealVector Ap = A * st.p;
      const RealVector Apo = A * st.p_old;
      const RealVector Ar = A * st.r;
      const double d1 = Ap.squaredNorm();
      const double d2 = Apo.squaredNorm();
      if (!denom_ok(d1, d1) || !denom_ok(d2, d2)) {  // trips only at exact zero
        trace.stop_reason = StopReason::breakdown;
        break;
      }
      const double c1 = Ar.dot(Ap) / d1;
      const double c2 = Ar.dot(Apo) / d2;
      st.p = (-c1 * st.p - c2 * st.p_old + st.r).eval();
    }
    const RealVector Apv = gram_apply(A, st.p);
    if (Apv.norm() <= kDenomGuard * normA2 * st.p.norm()) {
      trace.stop_reason = StopReason::breakdown;
      break;
    }
    const double eta_denom = st.p.dot(Apv);
    if (!denom_ok(eta_denom, st.p.norm() * Apv.norm())) {
      trace.stop_reason = StopReason::breakdown;
      break;
    }
    const double eta = st.r.dot(st.p) / eta_denom;
    st.x -= eta * st.p;
    st.r -= eta * Apv;
    st.n = n;
    if (rec.record(st)) break;
  }
  return trace;
}

}  // namespace

SolverTrace rational_cg(const DenseMatrix& A, const RealVector& y,
                        const AlphaSchedule& alphas, const StoppingRule& stop,
                        const RealVector* x_exact, DiagnosticsSink* diag) {
  auto even_step = [&A, &alphas](int k, IterationState& st) -> bool {
    const TikhonovFactorization F(A, alphas.alpha(k));
    const std::vector<RealVector> st2 = F.solve_multi({st.p, st.r});
    const RealVector& s = st2[0];
    const RealVector& t = st2[1];
    const RealVector As = A * s;
    const RealVector Ar = A * st.r;
    const RealVector Ap = A * st.p;
    const double denom = Ap.dot(As);
    if (!denom_ok(denom, Ap.norm() * As.norm())) return false;
    const double zeta = -Ar.dot(As) / denom;
    st.p_old = st.p;
    st.p = zeta * s + t;
    return true;
  };
  return rational_cg_impl(A, y, stop, x_exact, diag, even_step);
}

SolverTrace rational_cg_complex_step(const DenseMatrix& A, const RealVector& y,
                                     const AlphaSchedule& alphas, const StoppingRule& stop,
                                     const RealVector* x_exact, DiagnosticsSink* diag) {
  // Real shifted system, complex right-hand side p + i r, single solve.
  auto even_step_cs = [&A, &alphas](int k, IterationState& st) -> bool {
    using Cplx = std::complex<double>;
    DenseMatrix N = A.transpose() * A;
    N.diagonal().array() += alphas.alpha(k);
    Eigen::MatrixXcd Nc = N.cast<Cplx>();
    Eigen::VectorXcd rhs = st.p.cast<Cplx>() + Cplx(0.0, 1.0) * st.r.cast<Cplx>();
    Eigen::LLT<Eigen::MatrixXcd> llt(Nc);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::VectorXcd u = llt.solve(rhs);
    const RealVector Ap = gram_apply(A, st.p);
    // z = sum_i (A^T A p)_i u_i; the direction Im[conj(z) u] matches the real
    // variant's zeta s + t up to a scalar factor, which every later quotient absorbs.
    const Cplx z = Ap.cast<Cplx>().transpose() * u;
    st.p_old = st.p;
    st.p = (std::conj(z) * u.array()).imag().matrix();
    if (st.p.norm() == 0.0) return false;
    return true;
  };
  return rational_cg_impl(A, y, stop, x_exact, diag, even_step_cs);
}

}  // namespace ratkryl
