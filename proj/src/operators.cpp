#include "fde/operators.hpp"

#include <cmath>
#include <stdexcept>

#include "fde/errors.hpp"
#include "fde/kernels.hpp"

namespace fde {

NegLaplacian::NegLaplacian(DomainPtr dom) : dom_(std::move(dom)) {
    invh2_[0] = 1.0 / (dom_->spacing[0] * dom_->spacing[0]);
    invh2_[1] = dom_->dim == 2 ? 1.0 / (dom_->spacing[1] * dom_->spacing[1]) : 0.0;
}

void NegLaplacian::apply(const ScalarField& f, ScalarField& out) const {
    if (f.domain.get() != dom_.get())
        throw std::invalid_argument("apply_laplacian: domain mismatch");
    if (out.domain.get() != dom_.get()) out = ScalarField(dom_);
    if (dom_->dim == 1)
        kern::neg_laplacian_1d(f.data(), out.data(), dom_->nodes[0], invh2_[0]);
    else
        kern::neg_laplacian_2d(f.data(), out.data(), dom_->nodes[0], dom_->nodes[1], invh2_[0],
                               invh2_[1]);
    out.dirichlet_zero = true;
}

ScalarField NegLaplacian::apply(const ScalarField& f) const {
    ScalarField out(dom_);
    apply(f, out);
    return out;
}

ScalarField apply_laplacian(const NegLaplacian& op, const ScalarField& f) {
    ScalarField out = op.apply(f);
    kern::scale(out.data(), -1.0, out.size());
    out.require_finite("apply_laplacian");
    return out;
}

namespace {

// Tridiagonal solve for the 1D interior unknowns of (diag + c*A) x = b.
// The matrix rows are [-c/h^2, d_i + 2c/h^2, -c/h^2]; a vanishing pivot
// aborts with SolverError.
ScalarField solve_thomas(const NegLaplacian& op, const double* d, double c, const ScalarField& b,
                         const char* what) {
    const Domain& dom = *op.domain();
    const std::size_t nn = dom.nodes[0];
    const std::size_t m = nn - 2;
    const double invh2 = 1.0 / (dom.spacing[0] * dom.spacing[0]);
    const double off = -c * invh2;

    std::vector<double> diag(m), rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
        diag[i] = (d ? d[i + 1] : 0.0) + 2.0 * c * invh2;
        rhs[i] = b.values[i + 1];
    }
    std::vector<double> cprime(m), dprime(m);
    {
        double piv = diag[0];
        if (std::fabs(piv) < 1e-300)
            throw SolverError(std::string(what) + ": zero pivot in tridiagonal solve", "thomas", 0,
                              piv);
        cprime[0] = off / piv;
        dprime[0] = rhs[0] / piv;
        for (std::size_t i = 1; i < m; ++i) {
            piv = diag[i] - off * cprime[i - 1];
            if (std::fabs(piv) < 1e-300)
                throw SolverError(std::string(what) + ": zero pivot in tridiagonal solve",
                                  "thomas", (long long)i, piv);
            cprime[i] = off / piv;
            dprime[i] = (rhs[i] - off * dprime[i - 1]) / piv;
        }
    }
    ScalarField x(op.domain());
    x.values[m] = dprime[m - 1];
    for (std::size_t i = m - 1; i-- > 0;)
        x.values[i + 1] = dprime[i] - cprime[i] * x.values[i + 2];
    return x;
}

struct ShiftedOp {
    const NegLaplacian& A;
    const double* d;
    double c;

    void apply(const ScalarField& x, ScalarField& out) const {
        A.apply(x, out);
        kern::scale(out.data(), c, out.size());
        if (d) {
            const Domain& dom = *A.domain();
            for (std::size_t k = 0; k < out.size(); ++k)
                if (dom.is_interior(k)) out.values[k] += d[k] * x.values[k];
        }
    }
};

ScalarField solve_pcg(const NegLaplacian& op, const double* d, double c, const ScalarField& b,
                      double rel_tol, const char* what) {
    const Domain& dom = *op.domain();
    const std::size_t n = dom.total_nodes;
    const ShiftedOp M{op, d, c};

    const double diag_lap = c * 2.0 * (1.0 / (dom.spacing[0] * dom.spacing[0]) +
                                       (dom.dim == 2 ? 1.0 / (dom.spacing[1] * dom.spacing[1])
                                                     : 0.0));
    std::vector<double> invdiag(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        if (dom.is_interior(k)) invdiag[k] = 1.0 / (diag_lap + (d ? d[k] : 0.0));

    ScalarField x(op.domain()), r = b, z(op.domain()), p(op.domain()), Ap(op.domain());
    r.zero_boundary();
    // Quadratic forms flush to zero once entries drop below ~1e-154, which a
    // collapsing Newton iterate can reach while still normal. Running CG on a
    // max-normalized right-hand side keeps every inner product in range; the
    // system is linear, so rescaling the solution afterward is exact.
    const double bmax = kern::max_abs(r.data(), n);
    if (bmax == 0.0) return x;
    kern::scale(r.data(), 1.0 / bmax, n);
    const double bnorm = std::sqrt(kern::dot(r.data(), r.data(), n));
    if (bnorm == 0.0) return x;

    kern::mul(invdiag.data(), r.data(), z.data(), n);
    kern::copy(z.data(), p.data(), n);
    double rz = kern::dot(r.data(), z.data(), n);

    const long long maxit = 10 * (long long)n;
    for (long long it = 0; it < maxit; ++it) {
        M.apply(p, Ap);
        const double pAp = kern::dot(p.data(), Ap.data(), n);
        if (!(pAp > 0.0))
            throw SolverError(std::string(what) + ": CG breakdown (non-positive curvature)", "cg",
                              it, pAp);
        const double alpha = rz / pAp;
        kern::axpy(alpha, p.data(), x.data(), n);
        kern::axpy(-alpha, Ap.data(), r.data(), n);
        const double rnorm = std::sqrt(kern::dot(r.data(), r.data(), n));
        if (rnorm <= rel_tol * bnorm) {
            kern::scale(x.data(), bmax, n);
            return x;
        }
        kern::mul(invdiag.data(), r.data(), z.data(), n);
        const double rz_new = kern::dot(r.data(), z.data(), n);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) p.values[k] = z.values[k] + beta * p.values[k];
    }
    throw SolverError(std::string(what) + ": CG failed to converge", "cg", maxit,
                      std::sqrt(kern::dot(r.data(), r.data(), n)) / bnorm);
}

// MINRES for the symmetric (possibly indefinite) shifted system.
ScalarField solve_minres(const NegLaplacian& op, const double* d, double c, const ScalarField& b,
                         double rel_tol, const char* what) {
    const Domain& dom = *op.domain();
    const std::size_t n = dom.total_nodes;
    const ShiftedOp M{op, d, c};

    ScalarField x(op.domain());
    ScalarField v_prev(op.domain()), v = b, v_next(op.domain());
    v.zero_boundary();
    double beta = std::sqrt(kern::dot(v.data(), v.data(), n));
    const double bnorm = beta;
    if (bnorm == 0.0) return x;
    kern::scale(v.data(), 1.0 / beta, n);

    ScalarField w(op.domain()), w_prev(op.domain()), w_prev2(op.domain());
    double eta = beta;
    double gamma = 1.0, gamma_old = 1.0, sigma = 0.0, sigma_old = 0.0;

    const long long maxit = 20 * (long long)n;
    for (long long it = 0; it < maxit; ++it) {
        M.apply(v, v_next);
        const double alpha = kern::dot(v.data(), v_next.data(), n);
        kern::axpy(-alpha, v.data(), v_next.data(), n);
        if (it > 0) kern::axpy(-beta, v_prev.data(), v_next.data(), n);
        const double beta_next = std::sqrt(kern::dot(v_next.data(), v_next.data(), n));

        const double delta = gamma * alpha - gamma_old * sigma * beta;
        const double rho1 = std::sqrt(delta * delta + beta_next * beta_next);
        const double rho2 = sigma * alpha + gamma_old * gamma * beta;
        const double rho3 = sigma_old * beta;
        if (rho1 < 1e-300)
            throw SolverError(std::string(what) + ": MINRES breakdown", "minres", it, rho1);

        gamma_old = gamma;
        sigma_old = sigma;
        gamma = delta / rho1;
        sigma = beta_next / rho1;

        for (std::size_t k = 0; k < n; ++k)
            w.values[k] =
                (v.values[k] - rho3 * w_prev2.values[k] - rho2 * w_prev.values[k]) / rho1;
        kern::axpy(gamma * eta, w.data(), x.data(), n);
        eta = -sigma * eta;

        std::swap(w_prev2.values, w_prev.values);
        std::swap(w_prev.values, w.values);
        std::swap(v_prev.values, v.values);
        std::swap(v.values, v_next.values);
        if (beta_next > 0.0) kern::scale(v.data(), 1.0 / beta_next, n);
        beta = beta_next;

        // |eta| is the current residual norm.
        if (std::fabs(eta) <= rel_tol * bnorm) {
            x.zero_boundary();
            return x;
        }
    }
    throw SolverError(std::string(what) + ": MINRES failed to converge", "minres", maxit,
                      std::fabs(eta) / bnorm);
}

} // namespace

ScalarField solve_shifted(const NegLaplacian& op, const double* d, double c, const ScalarField& b,
                          bool spd, double rel_tol, const char* what) {
    if (b.domain.get() != op.domain().get())
        throw std::invalid_argument("solve_shifted: domain mismatch");
    ScalarField x = op.domain()->dim == 1 ? solve_thomas(op, d, c, b, what)
                    : spd                 ? solve_pcg(op, d, c, b, rel_tol, what)
                                          : solve_minres(op, d, c, b, rel_tol, what);
    x.require_finite(what);
    return x;
}

ScalarField solve_poisson(const NegLaplacian& op, const ScalarField& rhs) {
    ScalarField x = solve_shifted(op, nullptr, 1.0, rhs, true, 1e-12, "solve_poisson");
    // Verify the contract independently of the solver's own stopping rule.
    ScalarField r = op.apply(x);
    kern::axpy(-1.0, rhs.data(), r.data(), r.size());
    r.zero_boundary();
    const double rn = std::sqrt(kern::dot(r.data(), r.data(), r.size()));
    ScalarField b = rhs;
    b.zero_boundary();
    const double bn = std::sqrt(kern::dot(b.data(), b.data(), b.size()));
    if (rn > 1e-10 * bn)
        throw SolverError("solve_poisson: residual above contract", "poisson", 0, rn);
    return x;
}

ScalarField green_column(const NegLaplacian& op, std::size_t source_node) {
    const Domain& dom = *op.domain();
    if (source_node >= dom.total_nodes || !dom.is_interior(source_node))
        throw std::invalid_argument("green_column: source must be an interior node");
    ScalarField rhs(op.domain());
    rhs.values[source_node] = 1.0 / dom.quad_weights[source_node];
    return solve_poisson(op, rhs);
}

std::vector<std::size_t> sample_interior_nodes(const Domain& dom, std::size_t count) {
    std::vector<std::size_t> interior;
    interior.reserve(dom.total_nodes);
    for (std::size_t k = 0; k < dom.total_nodes; ++k)
        if (dom.is_interior(k)) interior.push_back(k);
    if (count == 0 || count >= interior.size()) return interior;
    std::vector<std::size_t> picked;
    picked.reserve(count);
    // Spread evenly, offset by half a stride to avoid clustering at the edge.
    const double stride = (double)interior.size() / (double)count;
    for (std::size_t j = 0; j < count; ++j)
        picked.push_back(interior[(std::size_t)((j + 0.5) * stride)]);
    return picked;
}

double green_kernel_floor(const NegLaplacian& op, const ScalarField& phi1, std::size_t samples) {
    const Domain& dom = *op.domain();
    if (phi1.domain.get() != op.domain().get())
        throw std::invalid_argument("green_kernel_floor: domain mismatch");
    const auto sources = sample_interior_nodes(dom, samples);
    const auto targets = sources;
    double floor_val = HUGE_VAL;
    for (std::size_t y : sources) {
        const ScalarField col = green_column(op, y);
        for (std::size_t x : targets) {
            const double denom = phi1.values[x] * phi1.values[y];
            if (!(denom > 0.0))
                throw SolverError("green_kernel_floor: phi1 not positive at sample node",
                                  "green_floor", (long long)x, denom);
            floor_val = std::min(floor_val, col.values[x] / denom);
        }
    }
    if (!std::isfinite(floor_val) || !(floor_val > 0.0))
        throw SolverError("green_kernel_floor: kernel lower bound not positive", "green_floor", 0,
                          floor_val);
    return floor_val;
}

} // namespace fde
