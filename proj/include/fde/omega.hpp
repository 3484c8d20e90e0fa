#pragma once

#include <cstddef>
#include <vector>

namespace fde {

// Positive symmetric solution of the angular profile problem
//   -omega'' = gamma^2 omega + omega^p on (0, pi),  omega(0) = omega(pi) = 0,
// with gamma = 2/(p-1). Requires p > 3 so that gamma < 1.
struct OmegaProfile {
    double p = 0.0;
    double gamma = 0.0;
    double sigma = 0.0; // omega'(0)
    std::vector<double> theta;
    std::vector<double> omega;
    // Max relative drift of the first integral
    // E = omega'^2/2 + gamma^2 omega^2/2 + |omega|^(p+1)/(p+1) along the profile.
    double residual = 0.0;
    double symmetry_defect = 0.0; // max |omega(theta) - omega(pi - theta)|
};

// Shooting by bisection on omega'(pi/2) with fixed-step 4th-order integration
// (step pi/4096). Throws std::invalid_argument for p <= 3 and SolverError if
// no bracket is found.
OmegaProfile shoot_omega(double p);

// Sign changes of the shooting function sigma -> omega'(pi/2; sigma) on a
// geometric scan of (0, sigma_max], counted only between scan points whose
// profiles stay positive on (0, pi/2] (candidates for a positive solution).
// Exactly one for admissible p.
std::size_t count_shooting_roots(double p, std::size_t scan_points = 64);

// Upper end of the scanned sigma range: 10x the sigma matching the amplitude
// lower bound (1 - gamma^2)^(1/(p-1)) through the first integral.
double shooting_sigma_max(double p);

} // namespace fde
