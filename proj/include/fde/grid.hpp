#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

namespace fde {

// Uniform tensor grid on a 1D interval or 2D rectangle with zero Dirichlet
// boundary. Nodes include the boundary and are stored row-major
// (index = iy * nodes[0] + ix). Quadrature weights are node-centered cell
// volumes clipped to the domain: h^d on interior nodes, halved per boundary
// axis, so they sum to the domain measure exactly while every zero-Dirichlet
// integrand still sees only the interior.
struct Domain {
    int dim = 1;
    std::array<double, 2> extents{1.0, 1.0};
    std::array<std::size_t, 2> cells{0, 0};
    std::array<std::size_t, 2> nodes{0, 0};
    std::array<double, 2> spacing{0.0, 0.0};
    std::size_t total_nodes = 0;

    std::vector<unsigned char> interior_mask;
    std::vector<double> quad_weights;
    std::vector<double> boundary_distance;

    std::size_t index(std::size_t ix, std::size_t iy = 0) const { return iy * nodes[0] + ix; }
    double x_of(std::size_t ix) const { return (double)ix * spacing[0]; }
    double y_of(std::size_t iy) const { return (double)iy * spacing[1]; }
    bool is_interior(std::size_t k) const { return interior_mask[k] != 0; }
    double measure() const { return dim == 1 ? extents[0] : extents[0] * extents[1]; }
};

using DomainPtr = std::shared_ptr<const Domain>;

// Requires at least 4 cells per axis; throws std::invalid_argument otherwise.
DomainPtr build_domain(int dim, const std::vector<double>& extents,
                       const std::vector<std::size_t>& cells);

// Nodal scalar field bound to a domain. If dirichlet_zero is set, boundary
// values are exactly 0 and kept that way by every operation.
struct ScalarField {
    DomainPtr domain;
    std::vector<double> values;
    bool dirichlet_zero = true;

    ScalarField() = default;
    explicit ScalarField(DomainPtr dom, double init = 0.0, bool dirichlet = true);

    std::size_t size() const { return values.size(); }
    double* data() { return values.data(); }
    const double* data() const { return values.data(); }

    void zero_boundary();
    // Throws if any value is NaN or infinite.
    void require_finite(const char* where) const;
};

// Throws std::invalid_argument unless both fields live on the same Domain
// object.
void require_same_domain(const ScalarField& a, const ScalarField& b, const char* where);

// (sum_k quad_k * weight_k * |f_k|^r)^(1/r); requires r > 0.
double weighted_norm(const ScalarField& f, double r, const ScalarField& weight);
// Unweighted L^r norm: (sum_k quad_k * |f_k|^r)^(1/r).
double lp_norm(const ScalarField& f, double r);
// sum_k quad_k * f_k * g_k
double quad_inner(const ScalarField& f, const ScalarField& g);
// sum_k quad_k * f_k
double quad_integral(const ScalarField& f);

double sup_norm(const ScalarField& f);

// (min, max) of f/g over interior nodes; requires g > 0 on the interior.
std::pair<double, double> ratio_envelope(const ScalarField& f, const ScalarField& g);

// sum over grid edges of |df|^2/h^2 * wbar * (edge volume), with wbar the mean
// of the weight at the edge endpoints. Weight ignored when null.
double gradient_energy(const ScalarField& f, const ScalarField* weight = nullptr);

} // namespace fde
