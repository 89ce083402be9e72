#include "cgl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "cgl/error.hpp"

namespace cgl {

void SolverParams::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, what);
  };
  require(gamma1 > 0.0 && gamma1 != 1.0, "gamma1 must be positive and different from 1");
  require(gamma2 > 1.0, "gamma2 must exceed 1");
  require(theta >= 0.0, "theta must be non-negative");
  require(mu > 0.0, "mu must be positive");
  require(lambda1 > 0.0, "lambda1 must be positive");
  require(epsilon > 0.0, "epsilon must be positive");
  require(max_iters >= 1, "max_iters must be at least 1");
}

Eigen::MatrixXd SolverState::graph() const { return project_graph(W); }

Eigen::MatrixXd squared_differences(const Eigen::VectorXd& s) {
  const Eigen::Index n = s.size();
  Eigen::MatrixXd S(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    S.col(j) = (s.array() - s(j)).square().matrix();
  }
  return S;
}

Eigen::MatrixXd combined_laplacian(const GraphStack& stack, const Eigen::VectorXd& alpha,
                                   const Eigen::MatrixXd& beta, const SolverParams& params) {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(stack.n, stack.n);
  for (int m = 0; m < stack.M; ++m) {
    const double am = std::pow(alpha(m), params.gamma1);
    for (int k = 0; k < stack.K; ++k) {
      const double c = am * std::pow(beta(m, k), params.gamma2);
      if (c == 0.0) continue;
      // Accumulate from the edge list; L is sparse in practice.
      for (const auto& e : stack.edges[stack.index(m, k)]) {
        const double w = c * e.weight;
        C(e.i, e.j) -= w;
        C(e.j, e.i) -= w;
        C(e.i, e.i) += w;
        C(e.j, e.j) += w;
      }
    }
  }
  return C;
}

Eigen::MatrixXd update_W(const GraphStack& stack, const Eigen::VectorXd& alpha,
                         const Eigen::MatrixXd& beta, const Eigen::VectorXd& s,
                         const SolverParams& params) {
  const int n = stack.n;
  if (s.size() != n) throw Error(ErrorCode::DimensionMismatch, "saliency length differs from n");
  if (!s.allFinite()) throw Error(ErrorCode::NonFinite, "saliency vector is not finite");
  Eigen::MatrixXd system = combined_laplacian(stack, alpha, beta, params);
  system.diagonal().array() += params.mu;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "W-step system is not positive definite");
  }
  Eigen::MatrixXd rhs = (-0.25 * params.theta) * squared_differences(s);
  rhs.diagonal().array() += params.mu;
  Eigen::MatrixXd W = llt.solve(rhs);
  if (!W.allFinite()) throw Error(ErrorCode::SingularSystem, "W-step produced non-finite values");
  return W;
}

Eigen::MatrixXd traces(const GraphStack& stack, const Eigen::MatrixXd& W) {
  Eigen::MatrixXd T(stack.M, stack.K);
  for (int m = 0; m < stack.M; ++m) {
    for (int k = 0; k < stack.K; ++k) T(m, k) = stack.trace_form(m, k, W);
  }
  return T;
}

Eigen::VectorXd power_simplex_weights(const Eigen::VectorXd& values, double gamma) {
  const double exponent = 1.0 / (1.0 - gamma);
  // Work in log space so large exponents cannot overflow.
  Eigen::VectorXd logw(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    logw(i) = exponent * std::log(std::max(values(i), kTraceFloor));
  }
  const double top = logw.maxCoeff();
  Eigen::VectorXd w = (logw.array() - top).exp().matrix();
  return w / w.sum();
}

Eigen::MatrixXd beta_from_traces(const Eigen::MatrixXd& T, double gamma2) {
  Eigen::MatrixXd beta(T.rows(), T.cols());
  for (Eigen::Index m = 0; m < T.rows(); ++m) {
    beta.row(m) = power_simplex_weights(T.row(m).transpose(), gamma2).transpose();
  }
  return beta;
}

Eigen::MatrixXd update_beta(const GraphStack& stack, const Eigen::MatrixXd& W, double gamma2) {
  if (!(gamma2 > 1.0)) throw Error(ErrorCode::InvalidArgument, "gamma2 must exceed 1");
  return beta_from_traces(traces(stack, W), gamma2);
}

Eigen::VectorXd modality_energies(const Eigen::MatrixXd& T, const Eigen::MatrixXd& beta,
                                  double gamma2) {
  return (beta.array().pow(gamma2) * T.array()).rowwise().sum().matrix();
}

Eigen::VectorXd alpha_from_energies(const Eigen::VectorXd& H, double gamma1) {
  if (!(gamma1 > 0.0) || gamma1 == 1.0) {
    throw Error(ErrorCode::InvalidArgument, "gamma1 must be positive and different from 1");
  }
  return power_simplex_weights(H, gamma1);
}

Eigen::VectorXd update_alpha(const GraphStack& stack, const Eigen::MatrixXd& W,
                             const Eigen::MatrixXd& beta, double gamma1, double gamma2) {
  return alpha_from_energies(modality_energies(traces(stack, W), beta, gamma2), gamma1);
}

Eigen::MatrixXd project_graph(const Eigen::MatrixXd& W) {
  Eigen::MatrixXd G = (0.5 * (W + W.transpose())).cwiseMax(0.0);
  G.diagonal().setZero();
  return G;
}

Eigen::VectorXd update_s(const Eigen::MatrixXd& W, const Eigen::VectorXd& y, double lambda1) {
  if (W.rows() != W.cols() || W.rows() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "graph and query sizes differ");
  }
  if (lambda1 < 0.0) throw Error(ErrorCode::InvalidArgument, "lambda1 must be non-negative");
  if (lambda1 == 0.0) return y;
  const Eigen::MatrixXd G = project_graph(W);
  Eigen::MatrixXd system = (-lambda1) * G;
  system.diagonal().array() += 1.0 + lambda1 * G.rowwise().sum().array();
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "s-step system is not positive definite");
  }
  Eigen::VectorXd s = llt.solve(y);
  if (!s.allFinite()) throw Error(ErrorCode::SingularSystem, "s-step produced non-finite values");
  return s;
}

double objective(const GraphStack& stack, const Eigen::MatrixXd& W, const Eigen::VectorXd& alpha,
                 const Eigen::MatrixXd& beta, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                 const SolverParams& params, GraphView view) {
  const Eigen::MatrixXd S = squared_differences(s);
  const double smooth = view == GraphView::Raw ? W.cwiseProduct(S).sum()
                                               : project_graph(W).cwiseProduct(S).sum();
  const double lambda = params.theta / params.lambda1;
  double collab = 0.0;
  for (int m = 0; m < stack.M; ++m) {
    const double am = std::pow(alpha(m), params.gamma1);
    for (int k = 0; k < stack.K; ++k) {
      collab += am * std::pow(beta(m, k), params.gamma2) * stack.trace_form(m, k, W);
    }
  }
  const Eigen::Index n = W.rows();
  const double fit = (W - Eigen::MatrixXd::Identity(n, n)).squaredNorm();
  return 0.5 * params.theta * smooth + lambda * (s - y).squaredNorm() + collab + params.mu * fit;
}

namespace {

double max_abs_change(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

SolverState solve(const GraphStack& stack, const Eigen::VectorXd& y, const SolverParams& params,
                  const std::optional<SolverState>& init) {
  params.validate();
  const int n = stack.n;
  if (y.size() != n) throw Error(ErrorCode::DimensionMismatch, "query length differs from n");
  if ((y.array() != 0.0 && y.array() != 1.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "query indicator must be binary");
  }
  if (y.sum() < 1.0) throw Error(ErrorCode::InvalidArgument, "query indicator has no query");

  SolverState state;
  state.y = y;
  if (init) {
    state.W = init->W;
    state.alpha = init->alpha;
    state.beta = init->beta;
    state.s = init->s;
    if (state.W.rows() != n || state.alpha.size() != stack.M || state.beta.rows() != stack.M ||
        state.beta.cols() != stack.K || state.s.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "initial state does not match the graph stack");
    }
  } else {
    state.W = Eigen::MatrixXd::Identity(n, n);
    state.alpha = Eigen::VectorXd::Constant(stack.M, 1.0 / stack.M);
    state.beta = Eigen::MatrixXd::Constant(stack.M, stack.K, 1.0 / stack.K);
    state.s = y;
  }

  for (int iter = 1; iter <= params.max_iters; ++iter) {
    IterationRecord rec;
    rec.iter = iter;

    rec.w_before = objective(stack, state.W, state.alpha, state.beta, state.s, y, params);
    Eigen::MatrixXd W = update_W(stack, state.alpha, state.beta, state.s, params);
    rec.w_after = objective(stack, W, state.alpha, state.beta, state.s, y, params);

    Eigen::MatrixXd beta = update_beta(stack, W, params.gamma2);
    Eigen::VectorXd alpha = update_alpha(stack, W, beta, params.gamma1, params.gamma2);

    rec.s_before =
        objective(stack, W, alpha, beta, state.s, y, params, GraphView::Projected);
    Eigen::VectorXd s = update_s(W, y, params.lambda1);
    rec.s_after = objective(stack, W, alpha, beta, s, y, params, GraphView::Projected);

    rec.max_delta = std::max({max_abs_change(W, state.W), max_abs_change(alpha, state.alpha),
                              max_abs_change(beta, state.beta), max_abs_change(s, state.s)});
    state.W = std::move(W);
    state.alpha = std::move(alpha);
    state.beta = std::move(beta);
    state.s = std::move(s);
    rec.objective = objective(stack, state.W, state.alpha, state.beta, state.s, y, params);
    rec.alpha = state.alpha;
    rec.beta = state.beta;
    state.trace.push_back(std::move(rec));
    state.iterations = iter;
    if (state.trace.back().max_delta < params.epsilon) {
      state.converged = true;
      break;
    }
  }
  return state;
}

void write_trace_csv(std::ostream& out, const SolverState& state) {
  if (state.trace.empty()) return;
  const auto& first = state.trace.front();
  out << "iter,objective,max_delta";
  for (Eigen::Index m = 0; m < first.alpha.size(); ++m) out << ",alpha_" << m;
  for (Eigen::Index m = 0; m < first.beta.rows(); ++m) {
    for (Eigen::Index k = 0; k < first.beta.cols(); ++k) out << ",beta_" << m << k;
  }
  out << '\n' << std::setprecision(10);
  for (const auto& rec : state.trace) {
    out << rec.iter << ',' << rec.objective << ',' << rec.max_delta;
    for (Eigen::Index m = 0; m < rec.alpha.size(); ++m) out << ',' << rec.alpha(m);
    for (Eigen::Index m = 0; m < rec.beta.rows(); ++m) {
      for (Eigen::Index k = 0; k < rec.beta.cols(); ++k) out << ',' << rec.beta(m, k);
    }
    out << '\n';
  }
}

}  // namespace cgl
