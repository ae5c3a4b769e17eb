#ifndef COHFRAC_PROFILE_ODE_HPP
#define COHFRAC_PROFILE_ODE_HPP

#include <optional>
#include <vector>

#include "cohfrac/material_law.hpp"

// Analysis of the profile Cauchy problem y'' = h(y), y(0)=m, y'(0)=0 with
// h(y) = (1-y)/4 [ (2 alpha)^2 f'(y)/((1-y) f^3(y)) - 1 ].
// The trajectory either reaches 1 in finite time, connects to 1 at infinity,
// or oscillates periodically, depending on the sign of (1-m)f(m) - 2 alpha.

namespace cohfrac {

enum class ProfileClass { ReachesOne, Heteroclinic, Periodic, SupercriticalReachesOne };

struct OdeParams {
    MaterialLaw law;
    double alpha = 0.0;  // stress parameter, positive
    double m = 0.0;      // initial value in (0,1)
};

struct ProfileSample {
    double t, y, yp;
};

struct ProfileSolution {
    OdeParams params;
    ProfileClass classification;
    ProfileClass observed;            // behaviour actually seen by the integrator
    std::vector<ProfileSample> samples;
    std::optional<double> t0;         // first time y = z_alpha
    std::optional<double> t1;         // hitting time of 1
    std::optional<double> t2;         // half period (first maximum)
    std::optional<double> max_value;  // M for periodic orbits
    double z_alpha = 0.0;             // 0 when alpha >= sigma_c/2
    double first_integral_residual = 0.0;  // max |y'^2 - Psi(y)| over samples
    bool reached_t_max = false;       // capped before any terminal event
};

// f'(s) / ((1-s) f^3(s)); strictly decreasing from +inf to 1/sigma_c^2.
double fbar(const MaterialLaw& law, double s);

// Unique root of fbar(z) = 1/(2 alpha)^2 for alpha in (0, sigma_c/2).
double z_alpha(const MaterialLaw& law, double alpha);

ProfileClass classify(const OdeParams& params);

// Energy balance Psi(y) = y'(t)^2 along the trajectory through (m, 0):
// Psi(y) = (1-y)^2/4 [1 - (2a/((1-y)f(y)))^2] - (1-m)^2/4 [1 - (2a/((1-m)f(m)))^2].
double psi_first_integral(const OdeParams& params, double y);

// Maximum M in (z_alpha, 1) of a periodic orbit, from the amplitude equation
// (1-M)^2 - (2a)^2/f^2(M) = (1-m)^2 - (2a)^2/f^2(m).
double max_amplitude(const OdeParams& params);

struct TimeOfFlight {
    double t = 0.0;
    bool divergent = false;  // exceeded the reporting cap
};

// First time y reaches eta, computed as int_m^eta ds/sqrt(Psi(s)) with
// square-root endpoint handling (at s=m always, at s=eta when eta = M).
TimeOfFlight time_of_flight(const OdeParams& params, double eta, double cap = 1e3);

struct IvpConfig {
    double t_max = 1e3;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
};

// Adaptive integration with event detection for y = z_alpha, y' = 0 and
// y = 1; fills landmarks and the classification tag.
ProfileSolution solve_profile_ivp(const OdeParams& params, const IvpConfig& cfg = {});

struct OptimalProfile {
    ProfileSolution profile;          // the connecting orbit beta_s, t >= 0
    std::vector<double> alpha_s;      // slip coordinate along the samples, alpha_s(0)=0
    double sigma_s = 0.0;             // constant stress (1-m)f(m)/2
    double total_increment = 0.0;     // 2 * lim alpha_s = opening s(m)
};

// Connecting orbit through (m,0) for alpha = traction(m)/2, sampled by
// quadrature of the first integral on t in [0, half_width], together with
// the slip alpha_s obtained from f^2(beta) alpha_s' = sigma_s.
OptimalProfile optimal_profile(const MaterialLaw& law, double m, double half_width = 40.0,
                               int n_samples = 800);

}  // namespace cohfrac

#endif
