#include "fde/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fde/errors.hpp"
#include "fde/kernels.hpp"

namespace fde {

EigenPair principal_eigenpair(const NegLaplacian& op) {
    const DomainPtr dom = op.domain();
    ScalarField x(dom, 1.0);
    ScalarField Ax(dom);

    // Applying the stencil to a max-normalized field rounds at the scale of
    // the row sum 4/h^2, which exceeds 1e-12 lambda1 on fine grids.
    double row_sum = 0.0;
    for (int a = 0; a < dom->dim; ++a) row_sum += 4.0 / (dom->spacing[a] * dom->spacing[a]);
    const double floor_tol = 16.0 * std::numeric_limits<double>::epsilon() * row_sum;

    double lambda = 0.0;
    const long long maxit = 1000;
    for (long long it = 1; it <= maxit; ++it) {
        ScalarField y = solve_shifted(op, nullptr, 1.0, x, true, 1e-13, "principal_eigenpair");
        const double m = kern::max_val(y.data(), y.size());
        if (!(m > 0.0))
            throw SolverError("principal_eigenpair: iterate lost positivity",
                              "inverse_iteration", it, m);
        kern::scale(y.data(), 1.0 / m, y.size());
        x = std::move(y);

        op.apply(x, Ax);
        lambda = quad_inner(Ax, x) / quad_inner(x, x);
        ScalarField r = Ax;
        kern::axpy(-lambda, x.data(), r.data(), r.size());
        const double rn = kern::max_abs(r.data(), r.size());
        if (rn <= std::max(1e-12 * lambda, floor_tol)) {
            for (std::size_t k = 0; k < x.size(); ++k)
                if (dom->is_interior(k) && !(x.values[k] > 0.0))
                    throw SolverError("principal_eigenpair: eigenfield not positive",
                                      "inverse_iteration", it, x.values[k]);
            // Backward error: sup residual per unit of operator norm, so the
            // contract stays grid-independent (raw sup residual rounds at
            // eps * row_sum no matter how converged the pair is).
            return EigenPair{lambda, std::move(x), rn / row_sum, it};
        }
    }
    op.apply(x, Ax);
    ScalarField r = Ax;
    kern::axpy(-lambda, x.data(), r.data(), r.size());
    throw SolverError("principal_eigenpair: stagnation", "inverse_iteration", maxit,
                      kern::max_abs(r.data(), r.size()));
}

std::pair<double, double> hopf_ratio(const ScalarField& phi1) {
    ScalarField dist(phi1.domain);
    dist.values = phi1.domain->boundary_distance;
    return ratio_envelope(phi1, dist);
}

double weighted_inner(const ScalarField& f, const ScalarField& g, const ScalarField& weight) {
    require_same_domain(f, g, "weighted_inner");
    require_same_domain(f, weight, "weighted_inner");
    std::vector<double> t(f.size());
    kern::mul(f.domain->quad_weights.data(), weight.data(), t.data(), f.size());
    return kern::wdot(t.data(), f.data(), g.data(), f.size());
}

void jacobi_eigensolve(std::vector<double> mat, std::size_t k, std::vector<double>& evals,
                       std::vector<double>& evecs) {
    evecs.assign(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) evecs[i * k + i] = 1.0;

    auto off = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) s += mat[i * k + j] * mat[i * k + j];
        return s;
    };
    double scale = 0.0;
    for (std::size_t i = 0; i < k * k; ++i) scale = std::max(scale, std::fabs(mat[i]));
    const double tol = std::max(1e-300, 1e-28 * scale * scale);

    for (int sweep = 0; sweep < 100 && off() > tol; ++sweep) {
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                const double apq = mat[p * k + q];
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (mat[q * k + q] - mat[p * k + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < k; ++i) {
                    const double aip = mat[i * k + p];
                    const double aiq = mat[i * k + q];
                    mat[i * k + p] = c * aip - s * aiq;
                    mat[i * k + q] = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < k; ++j) {
                    const double apj = mat[p * k + j];
                    const double aqj = mat[q * k + j];
                    mat[p * k + j] = c * apj - s * aqj;
                    mat[q * k + j] = s * apj + c * aqj;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double vip = evecs[i * k + p];
                    const double viq = evecs[i * k + q];
                    evecs[i * k + p] = c * vip - s * viq;
                    evecs[i * k + q] = s * vip + c * viq;
                }
            }
        }
    }

    evals.resize(k);
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(k);
    for (std::size_t i = 0; i < k; ++i) diag[i] = mat[i * k + i];
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return diag[a] < diag[b]; });
    std::vector<double> v_sorted(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        evals[i] = diag[order[i]];
        for (std::size_t j = 0; j < k; ++j) v_sorted[j * k + i] = evecs[j * k + order[i]];
    }
    evecs = std::move(v_sorted);
}

namespace {

// Deterministic low-mode starting block: tensor sine patterns enumerated by
// increasing total wavenumber.
std::vector<ScalarField> starting_block(const DomainPtr& dom, std::size_t k) {
    std::vector<ScalarField> X;
    X.reserve(k);
    if (dom->dim == 1) {
        for (std::size_t j = 1; j <= k; ++j) {
            ScalarField f(dom);
            for (std::size_t ix = 1; ix < dom->cells[0]; ++ix)
                f.values[ix] = std::sin((double)j * M_PI * dom->x_of(ix) / dom->extents[0]);
            X.push_back(std::move(f));
        }
    } else {
        for (std::size_t total = 2; X.size() < k; ++total) {
            for (std::size_t jx = 1; jx < total && X.size() < k; ++jx) {
                const std::size_t jy = total - jx;
                ScalarField f(dom);
                for (std::size_t iy = 1; iy < dom->cells[1]; ++iy)
                    for (std::size_t ix = 1; ix < dom->cells[0]; ++ix)
                        f.values[dom->index(ix, iy)] =
                            std::sin((double)jx * M_PI * dom->x_of(ix) / dom->extents[0]) *
                            std::sin((double)jy * M_PI * dom->y_of(iy) / dom->extents[1]);
                X.push_back(std::move(f));
            }
        }
    }
    return X;
}

} // namespace

SpectrumSet linearized_spectrum(const NegLaplacian& op, const ScalarField& S, double p,
                                std::size_t k) {
    if (S.domain.get() != op.domain().get())
        throw std::invalid_argument("linearized_spectrum: domain mismatch");
    if (!(p > 1.0)) throw std::invalid_argument("linearized_spectrum: requires p > 1");
    if (k == 0) throw std::invalid_argument("linearized_spectrum: k must be positive");
    const DomainPtr dom = op.domain();

    SpectrumSet out;
    out.p = p;
    out.weight = ScalarField(dom);
    kern::pow_nonneg(S.data(), p - 1.0, out.weight.data(), S.size());
    out.weight.zero_boundary();
    const ScalarField& B = out.weight;

    // A e = lambda B e with A = -Delta_h - p B. Shifting by -p gives
    // (A + p B) e = (lambda + p) B e, and A + p B is the plain negative
    // Laplacian, so one Poisson solve inverts the shifted pencil exactly.
    const std::size_t kw = std::min<std::size_t>(k + 2, (std::size_t)32);
    std::vector<ScalarField> X = starting_block(dom, kw);

    auto b_inner = [&](const ScalarField& u, const ScalarField& v) {
        return weighted_inner(u, v, B);
    };
    auto apply_A = [&](const ScalarField& u, ScalarField& Au) {
        op.apply(u, Au);
        for (std::size_t i = 0; i < Au.size(); ++i)
            if (dom->is_interior(i)) Au.values[i] -= p * B.values[i] * u.values[i];
    };

    std::vector<double> evals, small_evecs;
    ScalarField tmp(dom), Au(dom);
    const long long maxit = 500;
    double worst = HUGE_VAL;
    for (long long it = 0; it < maxit; ++it) {
        // One block step of shifted inverse iteration.
        std::vector<ScalarField> Y;
        Y.reserve(kw);
        for (std::size_t j = 0; j < kw; ++j) {
            kern::mul(B.data(), X[j].data(), tmp.data(), tmp.size());
            tmp.zero_boundary();
            Y.push_back(solve_shifted(op, nullptr, 1.0, tmp, true, 1e-13,
                                      "linearized_spectrum"));
        }
        // B-orthonormalize (modified Gram-Schmidt).
        for (std::size_t j = 0; j < kw; ++j) {
            for (std::size_t i = 0; i < j; ++i) {
                const double c = b_inner(Y[i], Y[j]);
                kern::axpy(-c, Y[i].data(), Y[j].data(), Y[j].size());
            }
            const double nrm = std::sqrt(b_inner(Y[j], Y[j]));
            if (!(nrm > 1e-200))
                throw SolverError("linearized_spectrum: block became degenerate",
                                  "subspace_iteration", it, nrm);
            kern::scale(Y[j].data(), 1.0 / nrm, Y[j].size());
        }
        // Rayleigh-Ritz on the B-orthonormal block.
        std::vector<double> Ahat(kw * kw, 0.0);
        std::vector<ScalarField> AY;
        AY.reserve(kw);
        for (std::size_t j = 0; j < kw; ++j) {
            apply_A(Y[j], Au);
            AY.push_back(Au);
        }
        for (std::size_t i = 0; i < kw; ++i)
            for (std::size_t j = i; j < kw; ++j) {
                const double v = quad_inner(Y[i], AY[j]);
                Ahat[i * kw + j] = v;
                Ahat[j * kw + i] = v;
            }
        jacobi_eigensolve(Ahat, kw, evals, small_evecs);

        std::vector<ScalarField> Z;
        Z.reserve(kw);
        for (std::size_t j = 0; j < kw; ++j) {
            ScalarField z(dom);
            for (std::size_t i = 0; i < kw; ++i)
                kern::axpy(small_evecs[i * kw + j], Y[i].data(), z.data(), z.size());
            Z.push_back(std::move(z));
        }
        X = std::move(Z);

        // Residuals of the first k Ritz pairs decide convergence.
        worst = 0.0;
        std::vector<double> res(k);
        for (std::size_t j = 0; j < k; ++j) {
            apply_A(X[j], Au);
            double denom = std::sqrt(quad_inner(Au, Au));
            kern::mul(B.data(), X[j].data(), tmp.data(), tmp.size());
            tmp.zero_boundary();
            denom += std::fabs(evals[j]) * std::sqrt(quad_inner(tmp, tmp));
            kern::axpy(-evals[j], tmp.data(), Au.data(), Au.size());
            res[j] = std::sqrt(quad_inner(Au, Au)) / std::max(denom, 1e-300);
            worst = std::max(worst, res[j]);
        }
        if (worst <= 1e-10) {
            out.eigenvalues.assign(evals.begin(), evals.begin() + (long)k);
            out.residuals = std::move(res);
            out.fields.assign(std::make_move_iterator(X.begin()),
                              std::make_move_iterator(X.begin() + (long)k));
            for (auto& f : out.fields) f.require_finite("linearized_spectrum");
            return out;
        }
    }
    throw SolverError("linearized_spectrum: subspace iteration did not converge",
                      "subspace_iteration", maxit, worst);
}

std::vector<ScalarField> to_relative_basis(const SpectrumSet& spec, const ScalarField& S) {
    std::vector<ScalarField> basis;
    basis.reserve(spec.fields.size());
    for (const ScalarField& e : spec.fields) {
        require_same_domain(e, S, "to_relative_basis");
        ScalarField g(e.domain);
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!g.domain->is_interior(k)) continue;
            if (!(S.values[k] > 0.0))
                throw std::invalid_argument("to_relative_basis: S not positive on interior");
            g.values[k] = e.values[k] / S.values[k];
        }
        basis.push_back(std::move(g));
    }
    return basis;
}

} // namespace fde
