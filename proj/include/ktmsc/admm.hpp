#pragma once

#include "ktmsc/kernel.hpp"
#include "ktmsc/parallel.hpp"
#include "ktmsc/tensor.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace ktmsc {

/// Parameters of the alternating-direction solver. Defaults are the
/// published initialization constants.
struct SolverConfig {
    double lambda = 1.0;
    double mu0 = 1e-5;
    double rho0 = 1e-5;
    double eta = 2.0;
    double mu_max = 1e13;
    double rho_max = 1e13;
    double epsilon = 1e-7;
    int max_iter = 200;
    double bisect_tol = 1e-10;
    double rank_tol = kDefaultRankTolerance;
    std::uint64_t seed = 0;

    // Throws ArgumentError when an invariant does not hold.
    void validate() const;
};

/// The ADMM iterate. G and W live in the rotated (N, V, N) layout.
struct SolverState {
    std::vector<MatrixXd> Z;
    std::vector<MatrixXd> P;
    std::vector<MatrixXd> Y;
    Tensor3 G;
    Tensor3 W;
    double mu = 0.0;
    double rho = 0.0;
    int iter = 0;

    // Z = Y = 0, P = I, G = W = 0, penalties at their initial values.
    static SolverState initial(Index n, Index views, const SolverConfig& config);

    Index n() const { return Z.empty() ? 0 : Z.front().rows(); }
    Index views() const { return static_cast<Index>(Z.size()); }
};

struct IterationRecord {
    int iteration = 0;
    double recon_error = 0.0;
    double match_error = 0.0;
    double objective = 0.0;
    double mu = 0.0;
    double rho = 0.0;
};

struct SolveTrace {
    std::vector<IterationRecord> records;

    std::size_t size() const { return records.size(); }
    // Columns: iteration,recon_error,match_error,objective,mu,rho
    void write_csv(std::ostream& out) const;
};

/// recon/match errors are means over views of the max-abs constraint
/// violations; the *_max fields are the per-view maxima used for stopping.
struct Residuals {
    double recon_error = 0.0;
    double match_error = 0.0;
    double recon_max = 0.0;
    double match_max = 0.0;

    bool converged(double epsilon) const { return recon_max < epsilon && match_max < epsilon; }
};

struct SolveResult {
    std::vector<MatrixXd> Z;
    SolveTrace trace;
    bool converged = false;
    SolverState state;
};

// Stationary point of the Z-subproblem:
// (mu I + Y + rho G - mu P - W) / (mu + rho).
MatrixXd solve_z(const MatrixXd& y, const MatrixXd& p, const MatrixXd& g, const MatrixXd& w,
                 double mu, double rho);

// True when ||t_u ./ sigmas|| > 1 / tau, i.e. the column prox shrinks.
bool shrinkage_branch(const VectorXd& t_u, const VectorXd& sigmas, double tau);

/// Unique positive root of sum_i sigma_i^2 t_i^2 / (alpha + sigma_i^2)^2 = 1 / tau^2.
/// Requires shrinkage_branch(t_u, sigmas, tau); throws ContractError otherwise.
double bisect_alpha(const VectorXd& t_u, const VectorXd& sigmas, double tau, double tol);

/// argmin_p sqrt(p^T K p) + (tau / 2) ||p - c||^2 for the kernel held in
/// `factor`, via the closed form with one scalar root.
VectorXd prox_weighted_l2_column(const VectorXd& c, const KernelFactor& factor, double tau,
                                 double tol = 1e-10);

/// Column-wise prox of lambda * h(P) + (mu / 2) ||P - C||_F^2 with
/// C = I - Z + Y / mu.
MatrixXd solve_p(const MatrixXd& z, const MatrixXd& y, const KernelFactor& factor, double mu,
                 double lambda, double tol = 1e-10, Exec exec = Exec::parallel);

// tnn_prox(Z + W / rho, n3 / rho).
Tensor3 solve_g(const Tensor3& z_tensor, const Tensor3& w, double rho, Exec exec = Exec::parallel);

/// Y_v += mu (I - Z_v - P_v), W += rho (rotate(Z) - G), then both penalties
/// grow by eta up to their caps.
SolverState update_multipliers(SolverState state, const SolverConfig& config);

Residuals residuals(const SolverState& state);

// lambda * sum_v h(P_v) + tnn(rotate(Z)).
double objective(const SolverState& state, std::span<const KernelFactor> factors, double lambda,
                 Exec exec = Exec::parallel);

using IterationObserver = std::function<void(const SolverState&, const IterationRecord&)>;

/// Runs the kernelized tensor-multi-rank ADMM until every view's constraint
/// violations fall below epsilon or max_iter is reached. Throws
/// NumericalError when an iterate becomes non-finite.
SolveResult solve(std::span<const KernelFactor> factors, const SolverConfig& config,
                  Exec exec = Exec::parallel, const IterationObserver& observer = {});

}  // namespace ktmsc
