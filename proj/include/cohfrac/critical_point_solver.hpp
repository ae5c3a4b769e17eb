#ifndef COHFRAC_CRITICAL_POINT_SOLVER_HPP
#define COHFRAC_CRITICAL_POINT_SOLVER_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "cohfrac/material_law.hpp"

// Construction of critical points (u_eps, v_eps) of the regularized energy
// by shooting on the midpoint value of the phase field.
//
// The phase profile obeys (v')^2 = H(v; m, eps) with
//   H(v) = [phi(v) - phi_min(m)] / eps^2,
//   phi(v) = (1-v)^2/4 - eps c^2 / f_eps^2(v).
// Writing W(v) = phi(v) + eps c^2 (so W(1) = 0 and W > 0 on (m,1)) and
// delta = -phi_min(m) - eps c^2, the boundary gap delta at the shooting root
// scales like exp(-L/(2 eps)), far below double precision in m.  The solver
// therefore shoots on log(delta) directly; m then follows from delta where
// representable and saturates at m_hat otherwise.

namespace cohfrac {

struct ShootingProblem {
    RegularizedLaw reg;
    double c = 0.0;  // stress constant in (0, sigma_c/2)
    double L = 1.0;

    ShootingProblem(RegularizedLaw r, double c_, double L_);
};

// First-integral energy H(v; m, eps) of the profile equation.
double shooting_energy(const ShootingProblem& p, double m, double v);

// inf over (s_eps, 1) of (1-s)^2/4 - eps c^2/f_eps^2(s); lies in
// [-eps c^2 / f_eps^2(s_eps), -eps c^2].
double i_eps(const ShootingProblem& p);

// Unique m in (0, z_c) with (1-m)^2/4 - c^2/f^2(m) = i_eps; the shooting
// roots live in (0, m_hat).
double m_hat(const ShootingProblem& p);

// x-distance from the midpoint to the point where v reaches 1, for the
// profile with midpoint value m.  Diverges (returns +inf past the cap) as
// m -> m_hat.
double half_width(const ShootingProblem& p, double m);

struct ShootResult {
    double m_eps = 0.0;      // midpoint minimum (= m_hat up to rounding for small eps)
    double log_delta = 0.0;  // log of the boundary gap parameter at the root
    double achieved_half_width = 0.0;
    double residual = 0.0;   // |half_width - L/2|
    int iterations = 0;
};

// Solve half_width = L/2.  The root is unique: the half width is strictly
// decreasing in delta.  Throws if the junction region fails its positivity
// check (eps outside the admissible range for this c).
ShootResult shoot(const ShootingProblem& p, double tol = 1e-10);

struct PairDiagnostics {
    double first_integral_rel = 0.0;  // max |first integral - d_eps| / |d_eps|
    double symmetry = 0.0;            // max |v(L/2-x) - v(L/2+x)|
    double el_weak = 0.0;             // max weak Euler-Lagrange residual, default battery
    double v_min = 0.0, v_max = 0.0;
    double u_monotone_min = 0.0;      // min of u' over samples
    double energy_identity_rel = 0.0; // |int f_eps^2 u'^2 - c a_eps| / (c a_eps)
};

struct CriticalPointPair {
    double eps = 0.0, c = 0.0, L = 0.0;
    double m = 0.0;          // v(L/2)
    double log_delta = 0.0;
    double a_eps = 0.0;      // u(L)
    double d_eps = 0.0;      // first-integral constant, = -c^2 - delta/eps
    double energy = 0.0;     // F_eps(u,v)
    std::vector<double> x, u, v, vp;
    // interior quadrature weights over the samples (Simpson in the build
    // parameter); zero on the far-tail nodes which are handled analytically
    std::vector<double> quad_w;
    double tail_slope = 0.0;   // |v'| where the analytic tail takes over
    double tail_x_right = 0.0; // start of the analytic tail on the right half
    PairDiagnostics diag;
};

struct SamplingSpec {
    int n_inner = 1200;     // square-root clustered across the well
    int n_junction = 400;   // log-spaced through the junction region
    int n_tail = 400;       // uniform in x through the outer region
};

// Assemble the full pair from a shooting result: v by inverting the first
// integral, u from u' = c/f_eps^2(v), energies and diagnostics by quadrature
// in the v parametrization.
CriticalPointPair build_pair(const ShootingProblem& p, const ShootResult& root,
                             const SamplingSpec& spec = {});

// Convenience overload shooting on a caller-supplied midpoint value (only
// meaningful when m is far enough from m_hat that delta is representable).
CriticalPointPair build_pair(const ShootingProblem& p, double m,
                             const SamplingSpec& spec = {});

// Weak Euler-Lagrange residual of the pair against a smooth test function
// vanishing at the endpoints, evaluated from the stored samples.
double weak_el_residual(const CriticalPointPair& pair,
                        const std::function<double(double)>& phi,
                        const std::function<double(double)>& phi_prime,
                        const RegularizedLaw& reg);

// Largest normalized weak residual over n random trigonometric test functions.
double weak_el_residual_max(const CriticalPointPair& pair, const RegularizedLaw& reg,
                            int n_tests = 50, std::uint64_t seed = 0x5eed);

// The trivial elastic critical point u = (a/L)x, v = 1.
CriticalPointPair elastic_pair(double a, double L, const RegularizedLaw& reg,
                               int n_samples = 201);

}  // namespace cohfrac

#endif
