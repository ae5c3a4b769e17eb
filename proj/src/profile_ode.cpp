#include "cohfrac/profile_ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cohfrac/numerics.hpp"
#include "cohfrac/ode45.hpp"

namespace cohfrac {

double fbar(const MaterialLaw& law, double s) {
    if (!(s > 0.0) || !(s < 1.0))
        throw std::invalid_argument("fbar: s must lie in (0,1)");
    const double fs = law.f(s);
    return law.f_d1(s) / ((1.0 - s) * fs * fs * fs);
}

double z_alpha(const MaterialLaw& law, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 0.5 * law.sigma_c))
        throw std::invalid_argument("z_alpha: alpha must lie in (0, sigma_c/2)");
    const double target = 1.0 / (4.0 * alpha * alpha);
    // fbar decreases from +inf to 1/sigma_c^2 < target
    double lo = 0.5;
    while (fbar(law, lo) < target) lo *= 0.5;
    double hi = 0.5;
    while (fbar(law, hi) > target) hi = 0.5 * (1.0 + hi);
    const double z = brent_root([&](double s) { return fbar(law, s) - target; }, lo, hi, 1e-14);
    if (!(law.traction(z) > 2.0 * alpha))
        throw std::runtime_error("z_alpha: stationary value violates traction bound");
    return z;
}

ProfileClass classify(const OdeParams& p) {
    if (!(p.m > 0.0) || !(p.m < 1.0))
        throw std::invalid_argument("classify: m must lie in (0,1)");
    if (p.alpha >= 0.5 * p.law.sigma_c) return ProfileClass::SupercriticalReachesOne;
    const double delta = p.law.traction(p.m) - 2.0 * p.alpha;
    if (std::abs(delta) < 1e-10) return ProfileClass::Heteroclinic;
    return delta < 0.0 ? ProfileClass::ReachesOne : ProfileClass::Periodic;
}

namespace {

// (1-v)^2/4 - alpha^2/f(v)^2; Psi(y) = well(y) - well(m)
double well(const MaterialLaw& law, double alpha, double v) {
    const double fv = law.f(v);
    return 0.25 * (1.0 - v) * (1.0 - v) - alpha * alpha / (fv * fv);
}

double rhs_h(const MaterialLaw& law, double alpha, double y) {
    if (y >= 1.0) return 0.0;
    const double fy = law.f(y);
    return alpha * alpha * law.f_d1(y) / (fy * fy * fy) - 0.25 * (1.0 - y);
}

}  // namespace

double psi_first_integral(const OdeParams& p, double y) {
    if (y < p.m) throw std::invalid_argument("psi_first_integral: y below the initial value");
    if (y >= 1.0) {
        // continuous extension using traction(1^-) = sigma_c
        const double r = 2.0 * p.alpha / p.law.sigma_c;
        (void)r;
        return -well(p.law, p.alpha, p.m);
    }
    return well(p.law, p.alpha, y) - well(p.law, p.alpha, p.m);
}

double max_amplitude(const OdeParams& p) {
    if (classify(p) != ProfileClass::Periodic)
        throw std::invalid_argument("max_amplitude: orbit is not periodic");
    const double za = z_alpha(p.law, p.alpha);
    const double base = well(p.law, p.alpha, p.m);
    auto eq = [&](double x) { return well(p.law, p.alpha, x) - base; };
    return brent_root(eq, za, 1.0 - 1e-14, 1e-15);
}

TimeOfFlight time_of_flight(const OdeParams& p, double eta, double cap) {
    const ProfileClass cls = classify(p);
    if (!(eta > p.m) || !(eta < 1.0))
        throw std::invalid_argument("time_of_flight: eta must lie in (m,1)");
    double M = 1.0;
    if (cls == ProfileClass::Periodic) {
        M = max_amplitude(p);
        if (eta > M + 1e-12)
            throw std::invalid_argument("time_of_flight: eta above the orbit maximum");
    }
    auto integrand = [&](double s) {
        return 1.0 / std::sqrt(std::max(psi_first_integral(p, s), 0.0));
    };
    QuadResult q;
    if (cls == ProfileClass::Periodic && std::abs(eta - M) < 1e-12) {
        q = integrate_sqrt_both(integrand, p.m, M, 1e-12, 1e-11);
    } else {
        q = integrate_sqrt_left(integrand, p.m, eta, 1e-12, 1e-11);
    }
    TimeOfFlight out;
    out.t = q.value;
    out.divergent = !(q.value < cap);
    return out;
}

ProfileSolution solve_profile_ivp(const OdeParams& p, const IvpConfig& cfg) {
    ProfileSolution sol;
    sol.params = p;
    sol.classification = classify(p);
    const bool supercritical = p.alpha >= 0.5 * p.law.sigma_c;
    sol.z_alpha = supercritical ? 0.0 : z_alpha(p.law, p.alpha);

    auto rhs = [&](double, const OdeVec<2>& y) -> OdeVec<2> {
        return {y[1], rhs_h(p.law, p.alpha, y[0])};
    };
    IvpOptions opts;
    opts.rel_tol = cfg.rel_tol;
    opts.abs_tol = cfg.abs_tol;
    opts.t_max = cfg.t_max;

    Dopri5<2, decltype(rhs)> stepper(rhs, 0.0, {p.m, 0.0}, opts);
    sol.samples.push_back({0.0, p.m, 0.0});
    int turn_count = 0;
    double prev_yp = 0.0, prev_y = p.m, prev_t = 0.0;
    bool hit_one = false;

    auto locate = [&](auto&& event_value, double lo, double hi) {
        double flo = event_value(lo, stepper.interpolate(lo));
        for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = event_value(mid, stepper.interpolate(mid));
            if ((fm > 0.0) == (flo > 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return hi;
    };

    long steps = 0;
    while (stepper.t() < cfg.t_max) {
        if (steps++ > opts.max_steps) break;
        if (!stepper.step(cfg.t_max))
            throw std::runtime_error("solve_profile_ivp: step size underflow at t=" +
                                     std::to_string(stepper.t()));
        const double t = stepper.t(), y = stepper.y()[0], yp = stepper.y()[1];

        if (!sol.t0 && !supercritical && prev_y < sol.z_alpha && y >= sol.z_alpha) {
            sol.t0 = locate([&](double, const OdeVec<2>& v) { return v[0] - sol.z_alpha; },
                            prev_t, t);
        }
        if (prev_yp > 0.0 && yp <= 0.0) {
            const double tc =
                locate([&](double, const OdeVec<2>& v) { return v[1]; }, prev_t, t);
            ++turn_count;
            if (turn_count == 1) {
                sol.t2 = tc;
                sol.max_value = stepper.interpolate(tc)[0];
            }
        }
        if (prev_yp < 0.0 && yp >= 0.0) {
            // completed a full period; stop here
            const double tc =
                locate([&](double, const OdeVec<2>& v) { return v[1]; }, prev_t, t);
            sol.samples.push_back({tc, stepper.interpolate(tc)[0], 0.0});
            break;
        }
        if (y >= 1.0) {
            const double tc =
                locate([&](double, const OdeVec<2>& v) { return v[0] - 1.0; }, prev_t, t);
            const auto v = stepper.interpolate(tc);
            sol.t1 = tc;
            sol.samples.push_back({tc, v[0], v[1]});
            hit_one = true;
            break;
        }
        sol.samples.push_back({t, y, yp});
        prev_t = t;
        prev_y = y;
        prev_yp = yp;
    }

    if (hit_one) {
        sol.observed = supercritical ? ProfileClass::SupercriticalReachesOne
                                     : ProfileClass::ReachesOne;
    } else if (turn_count > 0) {
        sol.observed = ProfileClass::Periodic;
    } else {
        sol.observed = ProfileClass::Heteroclinic;
        sol.reached_t_max = true;
    }

    double worst = 0.0;
    for (const auto& sm : sol.samples) {
        if (sm.y >= 1.0) continue;
        const double r = sm.yp * sm.yp - psi_first_integral(p, std::max(sm.y, p.m));
        worst = std::max(worst, std::abs(r));
    }
    sol.first_integral_residual = worst;
    return sol;
}

OptimalProfile optimal_profile(const MaterialLaw& law, double m, double half_width,
                               int n_samples) {
    if (!(m > 0.0) || !(m < 1.0))
        throw std::invalid_argument("optimal_profile: m must lie in (0,1)");
    OptimalProfile out;
    out.sigma_s = 0.5 * law.traction(m);
    OdeParams p{law, out.sigma_s, m};

    auto psi = [&](double s) { return std::max(well(law, p.alpha, s) - well(law, p.alpha, m), 0.0); };
    auto dt = [&](double s) { return 1.0 / std::sqrt(psi(s)); };
    auto dslip = [&](double s) {
        const double fs = law.f(s);
        return 1.0 / (fs * fs * std::sqrt(psi(s)));
    };

    // time to reach y, with the left square-root endpoint removed
    auto t_of = [&](double y) {
        return integrate_sqrt_left(dt, m, y, 1e-12, 1e-11).value;
    };
    const double za = z_alpha(law, p.alpha);
    // y_max with t(y_max) = half_width; t grows like -2 log(1-y) near 1
    double y_hi = 1.0 - 1e-13;
    if (t_of(y_hi) < half_width)
        throw std::invalid_argument("optimal_profile: half_width too large to resolve");
    const double y_max =
        brent_root([&](double y) { return t_of(y) - half_width; }, m + 1e-12, y_hi, 1e-15);

    // grid: square-root clustering on [m, z_a], geometric gap decay above
    std::vector<double> ys;
    ys.push_back(m);
    const int n1 = n_samples / 3;
    const double ymid = std::min(za, y_max);
    for (int i = 1; i <= n1; ++i) {
        const double u = static_cast<double>(i) / n1;
        ys.push_back(m + (ymid - m) * u * u);
    }
    if (y_max > ymid) {
        const int n2 = n_samples - n1;
        const double g0 = 1.0 - ymid, g1 = 1.0 - y_max;
        for (int i = 1; i <= n2; ++i) {
            ys.push_back(1.0 - g0 * std::pow(g1 / g0, static_cast<double>(i) / n2));
        }
    }

    ProfileSolution& prof = out.profile;
    prof.params = p;
    prof.classification = ProfileClass::Heteroclinic;
    prof.observed = ProfileClass::Heteroclinic;
    prof.z_alpha = za;
    prof.samples.push_back({0.0, m, 0.0});
    out.alpha_s.push_back(0.0);

    double t_acc = 0.0, slip_acc = 0.0;
    for (std::size_t k = 1; k < ys.size(); ++k) {
        const double a = ys[k - 1], b = ys[k];
        if (k == 1) {
            t_acc += integrate_sqrt_left(dt, a, b, 1e-13, 1e-12).value;
            slip_acc += integrate_sqrt_left(dslip, a, b, 1e-13, 1e-12).value;
        } else {
            t_acc += integrate(dt, a, b, 1e-13, 1e-12).value;
            slip_acc += integrate(dslip, a, b, 1e-13, 1e-12).value;
        }
        prof.samples.push_back({t_acc, b, std::sqrt(psi(b))});
        out.alpha_s.push_back(out.sigma_s * slip_acc);
    }
    // tail of the slip integral beyond y_max (integrand is regular there)
    const double tail = integrate(dslip, y_max, 1.0 - 1e-15, 1e-14, 1e-12).value;
    out.total_increment = 2.0 * (out.sigma_s * slip_acc + out.sigma_s * tail);
    return out;
}

}  // namespace cohfrac
