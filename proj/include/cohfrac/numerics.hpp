#ifndef COHFRAC_NUMERICS_HPP
#define COHFRAC_NUMERICS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

// Scalar quadrature and root-finding kernels used throughout the library.
// All routines are deterministic and allocation-light.

namespace cohfrac {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1,1] (positive half).
inline constexpr double gk_nodes[8] = {
    0.0,
    0.207784955007898467601, 0.405845151377397166907, 0.586087235467691130295,
    0.741531185599394439864, 0.864864423359769072789, 0.949107912342758524526,
    0.991455371120812639207};
inline constexpr double gk_wk[8] = {
    0.209482141084727828013,
    0.204432940075298892414, 0.190350578064785409913, 0.169004726639267902827,
    0.140653259715525918745, 0.104790010322250183839, 0.063092092629978553291,
    0.022935322010529224964};
inline constexpr double gk_wg[4] = {
    0.417959183673469387755, 0.381830050505118944950,
    0.279705391489276667901, 0.129484966168869693271};

template <class F>
inline void gk15_panel(F&& f, double a, double b, double& value, double& error) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double f0 = f(c);
    double k = gk_wk[0] * f0;
    double g = gk_wg[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = h * gk_nodes[i];
        const double fi = f(c + dx) + f(c - dx);
        k += gk_wk[i] * fi;
        if (i % 2 == 0) g += gk_wg[i / 2] * fi;
    }
    value = k * h;
    const double diff = (k - g) * h;
    error = std::pow(200.0 * std::abs(diff), 1.5);
    if (error > std::abs(diff)) error = std::abs(diff);
    // keep a floor so identical halves still add up sensibly
    error = std::max(error, std::abs(value) * 1e-16);
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration with a fixed subdivision budget.
// Panels are bisected worst-first until the summed error estimate meets
// max(abs_tol, rel_tol*|I|).
template <class F>
QuadResult integrate(F&& f, double a, double b, double abs_tol = 1e-12,
                     double rel_tol = 1e-12, int max_panels = 4000) {
    QuadResult res;
    if (a == b) {
        res.converged = true;
        return res;
    }
    struct Panel {
        double a, b, value, error;
    };
    std::vector<Panel> panels;
    panels.reserve(256);
    double v, e;
    detail::gk15_panel(f, a, b, v, e);
    panels.push_back({a, b, v, e});
    res.evaluations = 15;
    while (static_cast<int>(panels.size()) < max_panels) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].value;
            err += panels[i].error;
            if (panels[i].error > panels[worst].error) worst = i;
        }
        const double tol = std::max(abs_tol, rel_tol * std::abs(total));
        if (err <= tol) {
            res.value = total;
            res.error = err;
            res.converged = true;
            return res;
        }
        Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        if (mid <= p.a || mid >= p.b) break;  // panel width at rounding limit
        double v1, e1, v2, e2;
        detail::gk15_panel(f, p.a, mid, v1, e1);
        detail::gk15_panel(f, mid, p.b, v2, e2);
        res.evaluations += 30;
        panels[worst] = {p.a, mid, v1, e1};
        panels.push_back({mid, p.b, v2, e2});
    }
    double total = 0.0, err = 0.0;
    for (const auto& p : panels) {
        total += p.value;
        err += p.error;
    }
    res.value = total;
    res.error = err;
    res.converged = err <= std::max(abs_tol, rel_tol * std::abs(total));
    return res;
}

// Integral of f over (a,b) where f ~ C/sqrt(x-a) near a.  The substitution
// x = a + (b-a) u^2 renders the integrand bounded.
template <class F>
QuadResult integrate_sqrt_left(F&& f, double a, double b, double abs_tol = 1e-12,
                               double rel_tol = 1e-12, int max_panels = 4000) {
    const double len = b - a;
    auto sub = [&](double u) { return 2.0 * len * u * f(a + len * u * u); };
    return integrate(sub, 0.0, 1.0, abs_tol, rel_tol, max_panels);
}

// Same for f ~ C/sqrt(b-x) near b.
template <class F>
QuadResult integrate_sqrt_right(F&& f, double a, double b, double abs_tol = 1e-12,
                                double rel_tol = 1e-12, int max_panels = 4000) {
    const double len = b - a;
    auto sub = [&](double u) { return 2.0 * len * u * f(b - len * u * u); };
    return integrate(sub, 0.0, 1.0, abs_tol, rel_tol, max_panels);
}

// Inverse-square-root endpoint singularities at both ends.
template <class F>
QuadResult integrate_sqrt_both(F&& f, double a, double b, double abs_tol = 1e-12,
                               double rel_tol = 1e-12, int max_panels = 4000) {
    const double mid = 0.5 * (a + b);
    QuadResult l = integrate_sqrt_left(f, a, mid, 0.5 * abs_tol, rel_tol, max_panels);
    QuadResult r = integrate_sqrt_right(f, mid, b, 0.5 * abs_tol, rel_tol, max_panels);
    QuadResult res;
    res.value = l.value + r.value;
    res.error = l.error + r.error;
    res.evaluations = l.evaluations + r.evaluations;
    res.converged = l.converged && r.converged;
    return res;
}

// Brent's method on a sign-changing bracket [a,b].
template <class F>
double brent_root(F&& f, double a, double b, double xtol = 1e-14,
                  int max_iter = 200) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw std::invalid_argument("brent_root: endpoints do not bracket a root");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) return b;
        if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
            d = e = m;  // bisection
        } else {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = e = m;
            }
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
    }
    return b;
}

// Golden-section minimization of a unimodal function on [a,b].
template <class F>
double golden_min(F&& f, double a, double b, double xtol = 1e-12) {
    constexpr double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > xtol) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

// Walk a bracket downward/upward in geometric steps until f changes sign.
// Returns {lo, hi} with f(lo)*f(hi) <= 0.
template <class F>
std::pair<double, double> expand_bracket_geometric(F&& f, double x0, double factor,
                                                   double limit, int max_steps = 200) {
    double a = x0;
    double fa = f(a);
    for (int i = 0; i < max_steps; ++i) {
        double b = a * factor;
        if ((factor < 1.0 && b < limit) || (factor > 1.0 && b > limit)) b = limit;
        const double fb = f(b);
        if ((fa > 0.0) != (fb > 0.0) || fb == 0.0) return {std::min(a, b), std::max(a, b)};
        a = b;
        fa = fb;
        if (a == limit) break;
    }
    throw std::runtime_error("expand_bracket_geometric: no sign change found");
}

}  // namespace cohfrac

#endif
