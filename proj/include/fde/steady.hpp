#pragma once

#include <utility>

#include "fde/grid.hpp"
#include "fde/operators.hpp"
#include "fde/spectral.hpp"

namespace fde {

// Positive solution of the discrete Lane-Emden problem (-Delta_h) S = S^p
// with zero Dirichlet boundary.
struct SteadyState {
    ScalarField S;
    double p = 2.0;
    double residual_norm = 0.0;                  // ||Delta_h S + S^p||_inf / ||S^p||_inf
    std::pair<double, double> hopf_envelope{0.0, 0.0}; // (min, max) of S/phi1
    double lambda1 = 0.0;
    ScalarField phi1;
};

// Amplitude c of the one-mode Galerkin balance c lambda1 = c^p <phi1^(p+1)> / <phi1^2>,
// used to place the Newton initial guess c * phi1 inside the basin.
double galerkin_amplitude(const EigenPair& eig, double p);

// Damped Newton for the Lane-Emden equation from init_amplitude * phi1.
// init_amplitude <= 0 selects the Galerkin amplitude automatically.
SteadyState solve_lane_emden(const NegLaplacian& op, double p, double init_amplitude = 0.0);

// u(x, t) = ((p-1)(T* - t)/p)^(1/(p-1)) * S(x); requires t < T*.
ScalarField separable_solution(const SteadyState& ss, double t_star, double t);

// F[v] = <(-Delta_h) v, v> - 2/(p+1) * integral |v|^(p+1); the Dirichlet term
// uses the summation-by-parts pairing, exact for the stencil.
double energy_F(const NegLaplacian& op, const ScalarField& v, double p);

// Q[u] = <(-Delta_h) u, u> / ||u||_(p+1)^2 (unweighted L^(p+1) norm).
double rayleigh_Q(const NegLaplacian& op, const ScalarField& u, double p);

} // namespace fde
