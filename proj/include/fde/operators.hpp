#pragma once

#include <cstddef>
#include <vector>

#include "fde/grid.hpp"

namespace fde {

// Second-order 3/5-point discrete negative Laplacian with zero Dirichlet
// boundary. Symmetric positive definite on interior nodes.
class NegLaplacian {
public:
    explicit NegLaplacian(DomainPtr dom);

    const DomainPtr& domain() const { return dom_; }

    // out = (-Delta_h) f on interior nodes, 0 on the boundary.
    void apply(const ScalarField& f, ScalarField& out) const;
    ScalarField apply(const ScalarField& f) const;

private:
    DomainPtr dom_;
    double invh2_[2];
};

// Delta_h f, i.e. the negative of NegLaplacian::apply. Exact on quadratics.
ScalarField apply_laplacian(const NegLaplacian& op, const ScalarField& f);

// Solves (diag(d) + c * (-Delta_h)) x = b for the interior unknowns, zero
// boundary. d == nullptr means a zero diagonal. 1D systems go through the
// Thomas algorithm; 2D systems use Jacobi-preconditioned CG when spd is set
// and MINRES otherwise. rel_tol bounds the final 2-norm residual relative to
// ||b||. Throws SolverError on breakdown or non-convergence.
ScalarField solve_shifted(const NegLaplacian& op, const double* d, double c,
                          const ScalarField& b, bool spd, double rel_tol, const char* what);

// Solves (-Delta_h) f = rhs; the returned field satisfies
// ||A f - rhs||_2 <= 1e-10 ||rhs||_2.
ScalarField solve_poisson(const NegLaplacian& op, const ScalarField& rhs);

// Discrete Green kernel column: K(x) = G_h(x, y) for the source node y,
// obtained from a point load scaled by the inverse quadrature weight.
ScalarField green_column(const NegLaplacian& op, std::size_t source_node);

// min over sampled interior pairs (x, y) of G_h(x, y) / (phi1(x) phi1(y)).
// samples bounds the number of source nodes, spread evenly over the interior.
// Throws SolverError if the floor is not strictly positive.
double green_kernel_floor(const NegLaplacian& op, const ScalarField& phi1, std::size_t samples);

// Evenly spread interior node indices (at most count of them), used for
// sampling kernels and envelopes deterministically.
std::vector<std::size_t> sample_interior_nodes(const Domain& dom, std::size_t count);

} // namespace fde
