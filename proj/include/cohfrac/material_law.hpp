#ifndef COHFRAC_MATERIAL_LAW_HPP
#define COHFRAC_MATERIAL_LAW_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cohfrac {

enum class LawFamily { PrototypeQ, PrototypeP, Custom };

// Dissipation function f of a cohesive phase-field model.  f is defined on
// [0,1) with f(0)=0 and (1-s)f(s) -> sigma_c as s -> 1.  Immutable after
// construction; all closures are pure.
struct MaterialLaw {
    double sigma_c = 1.0;
    LawFamily family = LawFamily::Custom;
    double family_param = 0.0;       // q or p for the prototype families
    bool f6_warning = false;         // set when the convexity condition is known to fail

    std::function<double(double)> eval;      // f(s)
    std::function<double(double)> eval_d1;   // f'(s)
    std::function<double(double)> eval_d2;   // f''(s)

    // Traction (1-s) f(s) evaluated at s = 1-w.  Stable for w -> 0.
    std::function<double(double)> traction_of_gap;
    // traction_of_gap(w1) - traction_of_gap(w2) for 0 <= w1 <= w2, computed
    // without cancellation.  Used by the small-opening quadratures.
    std::function<double(double, double)> traction_gap_diff;

    double f(double s) const { return eval(s); }
    double f_d1(double s) const { return eval_d1(s); }
    double f_d2(double s) const { return eval_d2(s); }
    double traction(double s) const { return traction_of_gap(1.0 - s); }

    std::string family_name() const;
};

// f_q(s) = sigma_c (1-(1-s)^q)/(1-s).  Full assumption set for q in (0,2];
// q in (2,4) is accepted with f6_warning set.  q <= 0 or q >= 4 is rejected.
MaterialLaw make_prototype_q(double sigma_c, double q);

// f^p(s) = (sigma_c + p(1-s)) s^2/(1-s) for p in (-sigma_c, 2 sigma_c).
MaterialLaw make_prototype_p(double sigma_c, double p);

// User-supplied law; derivatives must be provided by the caller.  The
// cancellation-free traction hooks fall back to direct evaluation.
MaterialLaw make_custom(double sigma_c, std::function<double(double)> f,
                        std::function<double(double)> f_d1,
                        std::function<double(double)> f_d2);

// Parse {"family":"prototype_q","sigma_c":1.0,"q":1.0} and friends.
MaterialLaw law_from_json(const nlohmann::json& spec);
nlohmann::json law_to_json(const MaterialLaw& law);

// ---------------------------------------------------------------------------
// Assumption validation

struct AssumptionCheck {
    std::string id;            // "f1" ... "f6"
    bool pass = false;
    double worst_margin = 0.0; // most negative margin seen (>=0 means pass)
    double worst_location = 0.0;
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;     // f1..f6 in order
    bool traction_limit_ok = false;          // (1-s) f(s) -> sigma_c
    double traction_limit_value = 0.0;
    bool derivative_limit_ok = false;        // (1-s)^2 f'(s) -> sigma_c
    double derivative_limit_value = 0.0;
    bool log_derivative_limit_ok = false;    // f'/f -> +inf as s -> 0
    double log_derivative_limit_value = 0.0;
    double f5_growth_exponent = 0.0;         // observed exponent of [(1-s)f]'/(1-s)^3
    bool all_pass = false;

    const AssumptionCheck& check(const std::string& id) const;
};

// Grid-based verification of the six structural assumptions plus the two
// endpoint limits.  grid_size >= 100.  Monotonicity and convexity are tested
// with tolerance 1e-9 on (second) differences; the limits by Richardson
// extrapolation over a geometric endpoint grid with ratio 1/2.
ValidationReport validate_assumptions(const MaterialLaw& law, int grid_size = 2000);

nlohmann::json report_to_json(const ValidationReport& report);

// ---------------------------------------------------------------------------
// Truncated density f_eps

// f_eps equals sqrt(eps) f below s_eps and an exponential junction
// psi_eps(s) = 1 - alpha_eps exp(-beta_eps/(1-s)) above, glued C^1 at s_eps.
// s_eps is fixed by sqrt(eps) f(s_eps) = 1 - sqrt(eps), which keeps the
// junction coefficients finite and positive.
struct RegularizedLaw {
    MaterialLaw base;
    double eps = 0.0;
    double sqrt_eps = 0.0;
    double s_eps = 0.0;
    double alpha_eps = 0.0;   // may overflow to +inf for extreme eps; never used raw
    double beta_eps = 0.0;
    double junction_gap = 0.0;  // 1 - sqrt(eps) f(s_eps) = sqrt(eps)

    // alpha_eps exp(-beta_eps/(1-s)), evaluated in log space; s in (s_eps, 1].
    double junction_tail(double s) const;
    double eval(double s) const;     // f_eps(s), extended below 0 and above 1
    double eval_d1(double s) const;  // f_eps'(s)
};

// Errors if the truncation equation has no root in (0,1) or the junction
// would violate its monotonicity requirement (eps too large for the law).
RegularizedLaw regularize(const MaterialLaw& law, double eps);

}  // namespace cohfrac

#endif
