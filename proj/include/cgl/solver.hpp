#pragma once

#include <Eigen/Dense>

#include <optional>
#include <ostream>
#include <vector>

#include "cgl/graphbuild.hpp"

namespace cgl {

struct SolverParams {
  double gamma1 = 0.5;     // modality weight exponent
  double gamma2 = 8.0;     // feature weight exponent
  double theta = 1e-4;     // saliency smoothness on the learnt graph
  double mu = 1e-3;        // self-fitting of W towards I
  double lambda1 = 0.004;  // ranking regularizer of the s-step
  double epsilon = 1e-4;
  int max_iters = 50;

  /// Throws InvalidArgument when a field is outside its admissible range.
  void validate() const;
};

/// Traces below this floor are raised to it before exponentiation.
inline constexpr double kTraceFloor = 1e-12;

struct IterationRecord {
  int iter = 0;
  // Objective before/after the W-step, with the raw learnt graph.
  double w_before = 0.0;
  double w_after = 0.0;
  // Objective before/after the s-step, with the projected graph.
  double s_before = 0.0;
  double s_after = 0.0;
  double objective = 0.0;  // raw-graph objective at the end of the iteration
  double max_delta = 0.0;
  Eigen::VectorXd alpha;
  Eigen::MatrixXd beta;
};

struct SolverState {
  Eigen::MatrixXd W;      // learnt affinity (raw closed-form output)
  Eigen::VectorXd alpha;  // length M
  Eigen::MatrixXd beta;   // M x K
  Eigen::VectorXd s;      // saliency
  Eigen::VectorXd y;      // query indicator
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;

  /// max(0, (W + W')/2) with zero diagonal; the graph used for ranking.
  Eigen::MatrixXd graph() const;
};

/// S_ij = (s_i - s_j)^2.
Eigen::MatrixXd squared_differences(const Eigen::VectorXd& s);

/// Weighted Laplacian sum_m alpha_m^g1 sum_k beta_mk^g2 L^(m,k).
Eigen::MatrixXd combined_laplacian(const GraphStack& stack, const Eigen::VectorXd& alpha,
                                   const Eigen::MatrixXd& beta, const SolverParams& params);

/// W = (sum c_mk L^(m,k) + mu I)^{-1} (mu I - theta/4 S).
Eigen::MatrixXd update_W(const GraphStack& stack, const Eigen::VectorXd& alpha,
                         const Eigen::MatrixXd& beta, const Eigen::VectorXd& s,
                         const SolverParams& params);

/// T_mk = Tr(W' L^(m,k) W) for every pair, M x K.
Eigen::MatrixXd traces(const GraphStack& stack, const Eigen::MatrixXd& W);

/// Closed-form simplex weights w_i ∝ v_i^{1/(1-gamma)} after flooring v.
Eigen::VectorXd power_simplex_weights(const Eigen::VectorXd& values, double gamma);

Eigen::MatrixXd update_beta(const GraphStack& stack, const Eigen::MatrixXd& W, double gamma2);
Eigen::MatrixXd beta_from_traces(const Eigen::MatrixXd& T, double gamma2);

Eigen::VectorXd update_alpha(const GraphStack& stack, const Eigen::MatrixXd& W,
                             const Eigen::MatrixXd& beta, double gamma1, double gamma2);
/// H_m = sum_k beta_mk^gamma2 T_mk.
Eigen::VectorXd modality_energies(const Eigen::MatrixXd& T, const Eigen::MatrixXd& beta,
                                  double gamma2);
Eigen::VectorXd alpha_from_energies(const Eigen::VectorXd& H, double gamma1);

/// max(0, (W + W')/2) with zero diagonal.
Eigen::MatrixXd project_graph(const Eigen::MatrixXd& W);

/// s = (lambda1 F + I)^{-1} y with F the Laplacian of project_graph(W).
Eigen::VectorXd update_s(const Eigen::MatrixXd& W, const Eigen::VectorXd& y, double lambda1);

enum class GraphView { Raw, Projected };

/// Full objective: theta/2 sum w_ij (s_i-s_j)^2 + lambda ||s-y||^2
///   + sum_m alpha^g1 sum_k beta^g2 Tr(W'LW) + mu ||W-I||^2, lambda = theta/lambda1.
/// The smoothness sum uses W itself (Raw) or project_graph(W) (Projected).
double objective(const GraphStack& stack, const Eigen::MatrixXd& W, const Eigen::VectorXd& alpha,
                 const Eigen::MatrixXd& beta, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                 const SolverParams& params, GraphView view = GraphView::Raw);

/// Alternating W -> beta -> alpha -> s until the largest element change is
/// below epsilon or max_iters is reached. `init` resumes from a prior state.
SolverState solve(const GraphStack& stack, const Eigen::VectorXd& y, const SolverParams& params,
                  const std::optional<SolverState>& init = std::nullopt);

/// CSV `iter,objective,max_delta,alpha_0..,beta_00..`.
void write_trace_csv(std::ostream& out, const SolverState& state);

}  // namespace cgl
