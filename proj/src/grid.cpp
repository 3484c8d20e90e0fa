#include "fde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fde/kernels.hpp"

namespace fde {

DomainPtr build_domain(int dim, const std::vector<double>& extents,
                       const std::vector<std::size_t>& cells) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("build_domain: dim must be 1 or 2");
    if (extents.size() != (std::size_t)dim || cells.size() != (std::size_t)dim)
        throw std::invalid_argument("build_domain: extents/cells size must match dim");
    for (int a = 0; a < dim; ++a) {
        if (!(extents[a] > 0.0))
            throw std::invalid_argument("build_domain: extents must be positive");
        if (cells[a] < 4)
            throw std::invalid_argument("build_domain: need at least 4 cells per axis, got " +
                                        std::to_string(cells[a]));
    }

    auto dom = std::make_shared<Domain>();
    dom->dim = dim;
    for (int a = 0; a < dim; ++a) {
        dom->extents[a] = extents[a];
        dom->cells[a] = cells[a];
        dom->nodes[a] = cells[a] + 1;
        dom->spacing[a] = extents[a] / (double)cells[a];
    }
    if (dim == 1) {
        dom->nodes[1] = 1;
        dom->cells[1] = 0;
        dom->extents[1] = 0.0;
        dom->spacing[1] = 0.0;
    }
    dom->total_nodes = dom->nodes[0] * dom->nodes[1];

    dom->interior_mask.assign(dom->total_nodes, 0);
    dom->quad_weights.assign(dom->total_nodes, 0.0);
    dom->boundary_distance.assign(dom->total_nodes, 0.0);

    const double hx = dom->spacing[0];
    const double hy = dom->spacing[1];
    for (std::size_t iy = 0; iy < dom->nodes[1]; ++iy) {
        for (std::size_t ix = 0; ix < dom->nodes[0]; ++ix) {
            const std::size_t k = dom->index(ix, iy);
            const bool bx = (ix == 0 || ix == dom->cells[0]);
            const bool by = dim == 2 && (iy == 0 || iy == dom->cells[1]);
            dom->interior_mask[k] = (!bx && !by) ? 1 : 0;

            double w = bx ? 0.5 * hx : hx;
            if (dim == 2) w *= by ? 0.5 * hy : hy;
            dom->quad_weights[k] = w;

            const double x = dom->x_of(ix);
            double d = std::min(x, dom->extents[0] - x);
            if (dim == 2) {
                const double y = dom->y_of(iy);
                d = std::min(d, std::min(y, dom->extents[1] - y));
            }
            dom->boundary_distance[k] = d;
        }
    }
    return dom;
}

ScalarField::ScalarField(DomainPtr dom, double init, bool dirichlet)
    : domain(std::move(dom)), dirichlet_zero(dirichlet) {
    values.assign(domain->total_nodes, init);
    if (dirichlet_zero) zero_boundary();
}

void ScalarField::zero_boundary() {
    for (std::size_t k = 0; k < values.size(); ++k)
        if (!domain->is_interior(k)) values[k] = 0.0;
}

void ScalarField::require_finite(const char* where) const {
    for (double v : values)
        if (!std::isfinite(v))
            throw std::runtime_error(std::string(where) + ": non-finite field value");
}

void require_same_domain(const ScalarField& a, const ScalarField& b, const char* where) {
    if (a.domain.get() != b.domain.get())
        throw std::invalid_argument(std::string(where) + ": domain mismatch");
}

double weighted_norm(const ScalarField& f, double r, const ScalarField& weight) {
    require_same_domain(f, weight, "weighted_norm");
    if (!(r > 0.0)) throw std::invalid_argument("weighted_norm: r must be positive");
    std::vector<double> w(f.size());
    kern::mul(f.domain->quad_weights.data(), weight.data(), w.data(), f.size());
    const double s = kern::wpow_sum(w.data(), f.data(), r, f.size());
    return std::pow(s, 1.0 / r);
}

double lp_norm(const ScalarField& f, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("lp_norm: r must be positive");
    const double s = kern::wpow_sum(f.domain->quad_weights.data(), f.data(), r, f.size());
    return std::pow(s, 1.0 / r);
}

double quad_inner(const ScalarField& f, const ScalarField& g) {
    require_same_domain(f, g, "quad_inner");
    return kern::wdot(f.domain->quad_weights.data(), f.data(), g.data(), f.size());
}

double quad_integral(const ScalarField& f) {
    return kern::dot(f.domain->quad_weights.data(), f.data(), f.size());
}

double sup_norm(const ScalarField& f) { return kern::max_abs(f.data(), f.size()); }

std::pair<double, double> ratio_envelope(const ScalarField& f, const ScalarField& g) {
    require_same_domain(f, g, "ratio_envelope");
    const Domain& dom = *f.domain;
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (!dom.is_interior(k)) continue;
        if (!(g.values[k] > 0.0))
            throw std::invalid_argument("ratio_envelope: denominator not positive on interior");
        const double q = f.values[k] / g.values[k];
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    return {lo, hi};
}

double gradient_energy(const ScalarField& f, const ScalarField* weight) {
    if (weight) require_same_domain(f, *weight, "gradient_energy");
    const Domain& dom = *f.domain;
    const double* v = f.data();
    double total = 0.0;
    if (dom.dim == 1) {
        const double h = dom.spacing[0];
        for (std::size_t i = 0; i + 1 < dom.nodes[0]; ++i) {
            const double df = (v[i + 1] - v[i]) / h;
            const double wbar =
                weight ? 0.5 * (weight->values[i] + weight->values[i + 1]) : 1.0;
            total += df * df * wbar * h;
        }
    } else {
        const double hx = dom.spacing[0];
        const double hy = dom.spacing[1];
        const std::size_t nnx = dom.nodes[0];
        for (std::size_t iy = 0; iy < dom.nodes[1]; ++iy) {
            for (std::size_t ix = 0; ix + 1 < nnx; ++ix) {
                const std::size_t k = dom.index(ix, iy);
                const double df = (v[k + 1] - v[k]) / hx;
                const double wbar = weight ? 0.5 * (weight->values[k] + weight->values[k + 1]) : 1.0;
                // Edge volume clipped at the y-boundary, matching the node cells.
                const double vol = hx * ((iy == 0 || iy == dom.cells[1]) ? 0.5 * hy : hy);
                total += df * df * wbar * vol;
            }
        }
        for (std::size_t iy = 0; iy + 1 < dom.nodes[1]; ++iy) {
            for (std::size_t ix = 0; ix < nnx; ++ix) {
                const std::size_t k = dom.index(ix, iy);
                const double df = (v[k + nnx] - v[k]) / hy;
                const double wbar =
                    weight ? 0.5 * (weight->values[k] + weight->values[k + nnx]) : 1.0;
                const double vol = hy * ((ix == 0 || ix == dom.cells[0]) ? 0.5 * hx : hx);
                total += df * df * wbar * vol;
            }
        }
    }
    return total;
}

} // namespace fde
