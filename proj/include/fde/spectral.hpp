#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "fde/grid.hpp"
#include "fde/operators.hpp"

namespace fde {

// Principal Dirichlet eigenpair of (-Delta_h): lambda1 > 0 simple, phi1 > 0 on
// the interior, normalized to max phi1 = 1.
struct EigenPair {
    double lambda = 0.0;
    ScalarField phi;
    double residual = 0.0; // backward error: ||(A - lambda) phi||_inf / ||A||_inf
    long long iterations = 0;
};

EigenPair principal_eigenpair(const NegLaplacian& op);

// (min, max) over interior nodes of phi1 / boundary_distance. Bounded above
// and below by positive constants (discrete Hopf estimate).
std::pair<double, double> hopf_ratio(const ScalarField& phi1);

// sum_k quad_k * weight_k * f_k * g_k
double weighted_inner(const ScalarField& f, const ScalarField& g, const ScalarField& weight);

// Eigenpairs of the linearized generalized problem
//   (-Delta_h - p S^(p-1)) e~ = lambda S^(p-1) e~
// on interior nodes. Fields are orthonormal in the S^(p-1)-weighted quadrature
// product; eigenvalues ascend and the lowest one equals 1 - p with eigenfield
// parallel to S.
struct SpectrumSet {
    double p = 2.0;
    std::vector<double> eigenvalues;
    std::vector<ScalarField> fields;
    std::vector<double> residuals; // relative residual per pair
    ScalarField weight;            // nodal S^(p-1)
};

SpectrumSet linearized_spectrum(const NegLaplacian& op, const ScalarField& S, double p,
                                std::size_t k);

// e_i = e~_i / S on the interior (0 on the boundary); orthonormal in the
// S^(p+1)-weighted product.
std::vector<ScalarField> to_relative_basis(const SpectrumSet& spec, const ScalarField& S);

// Jacobi rotation eigensolver for a dense symmetric matrix (row-major k x k).
// Returns ascending eigenvalues; evecs column i (evecs[j * k + i]) is the
// eigenvector for eigenvalue i.
void jacobi_eigensolve(std::vector<double> mat, std::size_t k, std::vector<double>& evals,
                       std::vector<double>& evecs);

} // namespace fde
