#include "ktmsc/admm.hpp"

#include "ktmsc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace ktmsc {

namespace {

void require_same_shape(const MatrixXd& a, const MatrixXd& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ArgumentError(std::string(what) + ": dimension mismatch");
    }
}

double root_function(const VectorXd& t_u, const VectorXd& sigma2, double alpha) {
    double f = 0.0;
    for (Index i = 0; i < t_u.size(); ++i) {
        const double d = alpha + sigma2(i);
        f += sigma2(i) * t_u(i) * t_u(i) / (d * d);
    }
    return f;
}

bool iterate_finite(const SolverState& s) {
    const auto finite = [](const std::vector<MatrixXd>& ms) {
        return std::all_of(ms.begin(), ms.end(), [](const MatrixXd& m) { return m.allFinite(); });
    };
    return finite(s.Z) && finite(s.P) && finite(s.Y) && s.G.all_finite() && s.W.all_finite();
}

}  // namespace

void SolverConfig::validate() const {
    if (!(lambda > 0.0)) throw ArgumentError("lambda must be positive");
    if (!(mu0 > 0.0) || !(rho0 > 0.0)) throw ArgumentError("initial penalties must be positive");
    if (!(eta > 1.0)) throw ArgumentError("eta must exceed 1");
    if (mu0 > mu_max) throw ArgumentError("mu0 exceeds mu_max");
    if (rho0 > rho_max) throw ArgumentError("rho0 exceeds rho_max");
    if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
    if (max_iter < 1) throw ArgumentError("max_iter must be positive");
    if (!(bisect_tol > 0.0)) throw ArgumentError("bisect_tol must be positive");
    if (!(rank_tol > 0.0)) throw ArgumentError("rank_tol must be positive");
}

SolverState SolverState::initial(Index n, Index views, const SolverConfig& config) {
    if (n < 1 || views < 1) throw ArgumentError("solver needs N >= 1 and V >= 1");
    SolverState s;
    s.Z.assign(static_cast<std::size_t>(views), MatrixXd::Zero(n, n));
    s.P.assign(static_cast<std::size_t>(views), MatrixXd::Identity(n, n));
    s.Y.assign(static_cast<std::size_t>(views), MatrixXd::Zero(n, n));
    s.G = Tensor3::zeros(n, views, n);
    s.W = Tensor3::zeros(n, views, n);
    s.mu = config.mu0;
    s.rho = config.rho0;
    return s;
}

void SolveTrace::write_csv(std::ostream& out) const {
    const auto old_precision = out.precision(17);
    out << "iteration,recon_error,match_error,objective,mu,rho\n";
    for (const auto& r : records) {
        out << r.iteration << ',' << r.recon_error << ',' << r.match_error << ',' << r.objective
            << ',' << r.mu << ',' << r.rho << '\n';
    }
    out.precision(old_precision);
}

MatrixXd solve_z(const MatrixXd& y, const MatrixXd& p, const MatrixXd& g, const MatrixXd& w,
                 double mu, double rho) {
    if (!(mu > 0.0) || !(rho > 0.0)) throw ArgumentError("solve_z: penalties must be positive");
    if (y.rows() != y.cols()) throw ArgumentError("solve_z: matrices must be square");
    require_same_shape(y, p, "solve_z");
    require_same_shape(y, g, "solve_z");
    require_same_shape(y, w, "solve_z");
    MatrixXd z = y + rho * g - mu * p - w;
    z.diagonal().array() += mu;
    return z / (mu + rho);
}

bool shrinkage_branch(const VectorXd& t_u, const VectorXd& sigmas, double tau) {
    return t_u.cwiseQuotient(sigmas).norm() > 1.0 / tau;
}

double bisect_alpha(const VectorXd& t_u, const VectorXd& sigmas, double tau, double tol) {
    if (t_u.size() != sigmas.size()) throw ArgumentError("bisect_alpha: length mismatch");
    if (!(tau > 0.0) || !(tol > 0.0)) throw ArgumentError("bisect_alpha: tau and tol must be positive");
    if ((sigmas.array() <= 0.0).any()) throw ArgumentError("bisect_alpha: sigmas must be positive");
    if (!shrinkage_branch(t_u, sigmas, tau)) {
        throw ContractError("bisect_alpha: ||t_u ./ sigma|| <= 1/tau, no positive root exists");
    }
    const VectorXd sigma2 = sigmas.cwiseAbs2();
    const double target = 1.0 / (tau * tau);

    // f decreases strictly from f(0) > target to 0, so doubling finds a bracket.
    double lo = 0.0, hi = 1.0;
    while (root_function(t_u, sigma2, hi) >= target) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NumericalError("bisect_alpha: bracket overflow");
    }
    double mid = 0.5 * (lo + hi);
    for (int step = 0; step < 2200; ++step) {
        mid = 0.5 * (lo + hi);
        const double f = root_function(t_u, sigma2, mid);
        if (std::abs(f - target) <= tol * target && hi - lo <= tol * mid) break;
        if (mid <= lo || mid >= hi) break;  // bracket exhausted at machine precision
        if (f > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return mid;
}

VectorXd prox_weighted_l2_column(const VectorXd& c, const KernelFactor& factor, double tau,
                                 double tol) {
    if (c.size() != factor.n) throw ArgumentError("prox column: length does not match kernel size");
    if (!(tau > 0.0)) throw ArgumentError("prox column: tau must be positive");
    if (factor.rank() == 0) return c;
    const VectorXd t_u = factor.eigvecs.transpose() * c;
    if (!shrinkage_branch(t_u, factor.sigmas, tau)) {
        return c - factor.eigvecs * t_u;
    }
    const double alpha = bisect_alpha(t_u, factor.sigmas, tau, tol);
    const VectorXd sigma2 = factor.sigmas.cwiseAbs2();
    const VectorXd weights = sigma2.array() / (alpha + sigma2.array());
    return c - factor.eigvecs * weights.cwiseProduct(t_u);
}

MatrixXd solve_p(const MatrixXd& z, const MatrixXd& y, const KernelFactor& factor, double mu,
                 double lambda, double tol, Exec exec) {
    if (!(mu > 0.0) || !(lambda > 0.0)) throw ArgumentError("solve_p: mu and lambda must be positive");
    require_same_shape(z, y, "solve_p");
    if (z.rows() != z.cols() || z.rows() != factor.n) {
        throw ArgumentError("solve_p: matrices must be N x N with N matching the kernel");
    }
    MatrixXd c = MatrixXd::Identity(z.rows(), z.cols()) - z + y / mu;
    const double tau = mu / lambda;
    MatrixXd p(c.rows(), c.cols());
    parallel_for(exec, c.cols(), [&](Index i) {
        p.col(i) = prox_weighted_l2_column(c.col(i), factor, tau, tol);
    });
    return p;
}

Tensor3 solve_g(const Tensor3& z_tensor, const Tensor3& w, double rho, Exec exec) {
    if (!(rho > 0.0)) throw ArgumentError("solve_g: rho must be positive");
    if (z_tensor.dims() != w.dims()) throw ArgumentError("solve_g: dimension mismatch");
    Tensor3 f = w;
    f *= 1.0 / rho;
    f += z_tensor;
    return tnn_prox(f, static_cast<double>(f.n3()) / rho, exec);
}

SolverState update_multipliers(SolverState state, const SolverConfig& config) {
    for (Index v = 0; v < state.views(); ++v) {
        const auto idx = static_cast<std::size_t>(v);
        MatrixXd violation = -state.Z[idx] - state.P[idx];
        violation.diagonal().array() += 1.0;
        state.Y[idx] += state.mu * violation;
    }
    Tensor3 gap = rotate(state.Z);
    gap -= state.G;
    gap *= state.rho;
    state.W += gap;
    state.mu = std::min(config.eta * state.mu, config.mu_max);
    state.rho = std::min(config.eta * state.rho, config.rho_max);
    return state;
}

Residuals residuals(const SolverState& state) {
    Residuals r;
    const std::vector<MatrixXd> g = unrotate(state.G);
    const Index views = state.views();
    for (Index v = 0; v < views; ++v) {
        const auto idx = static_cast<std::size_t>(v);
        MatrixXd violation = -state.Z[idx] - state.P[idx];
        violation.diagonal().array() += 1.0;
        const double recon = violation.cwiseAbs().maxCoeff();
        const double match = (state.Z[idx] - g[idx]).cwiseAbs().maxCoeff();
        r.recon_error += recon;
        r.match_error += match;
        r.recon_max = std::max(r.recon_max, recon);
        r.match_max = std::max(r.match_max, match);
    }
    r.recon_error /= static_cast<double>(views);
    r.match_error /= static_cast<double>(views);
    return r;
}

double objective(const SolverState& state, std::span<const KernelFactor> factors, double lambda,
                 Exec exec) {
    if (static_cast<Index>(factors.size()) != state.views()) {
        throw ArgumentError("objective: one kernel factor per view required");
    }
    double fit = 0.0;
    for (std::size_t v = 0; v < factors.size(); ++v) fit += h_value(state.P[v], factors[v]);
    return lambda * fit + tnn(rotate(state.Z), exec);
}

SolveResult solve(std::span<const KernelFactor> factors, const SolverConfig& config, Exec exec,
                  const IterationObserver& observer) {
    config.validate();
    if (factors.empty()) throw ArgumentError("solve needs at least one view");
    const Index n = factors.front().n;
    for (const auto& f : factors) {
        if (f.n != n) throw ArgumentError("all kernel factors must share N");
    }
    const Index views = static_cast<Index>(factors.size());

    SolveResult result;
    SolverState state = SolverState::initial(n, views, config);
    for (int it = 0; it < config.max_iter; ++it) {
        const std::vector<MatrixXd> g_views = unrotate(state.G);
        const std::vector<MatrixXd> w_views = unrotate(state.W);
        for (Index v = 0; v < views; ++v) {
            const auto idx = static_cast<std::size_t>(v);
            state.Z[idx] = solve_z(state.Y[idx], state.P[idx], g_views[idx], w_views[idx],
                                   state.mu, state.rho);
        }
        for (Index v = 0; v < views; ++v) {
            const auto idx = static_cast<std::size_t>(v);
            state.P[idx] = solve_p(state.Z[idx], state.Y[idx], factors[idx], state.mu,
                                   config.lambda, config.bisect_tol, exec);
        }
        // The Y-updates read only Z and P, so folding them into the
        // multiplier step after the G-update preserves the published order.
        state.G = solve_g(rotate(state.Z), state.W, state.rho, exec);
        state = update_multipliers(std::move(state), config);
        state.iter = it + 1;

        if (!iterate_finite(state)) {
            throw NumericalError("non-finite iterate at iteration " + std::to_string(it));
        }

        const Residuals res = residuals(state);
        IterationRecord record;
        record.iteration = it;
        record.recon_error = res.recon_error;
        record.match_error = res.match_error;
        record.objective = objective(state, factors, config.lambda, exec);
        record.mu = state.mu;
        record.rho = state.rho;
        result.trace.records.push_back(record);
        if (observer) observer(state, record);

        if (res.converged(config.epsilon)) {
            result.converged = true;
            break;
        }
    }
    result.Z = state.Z;
    result.state = std::move(state);
    return result;
}

}  // namespace ktmsc
