#include "cohfrac/critical_point_solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "cohfrac/numerics.hpp"
#include "cohfrac/profile_ode.hpp"

namespace cohfrac {

ShootingProblem::ShootingProblem(RegularizedLaw r, double c_, double L_)
    : reg(std::move(r)), c(c_), L(L_) {
    if (!(c > 0.0) || !(c < 0.5 * reg.base.sigma_c))
        throw std::invalid_argument("ShootingProblem: c must lie in (0, sigma_c/2)");
    if (!(L > 0.0)) throw std::invalid_argument("ShootingProblem: L must be positive");
}

namespace {

// Internal view of a shooting problem with the shifted potential
// W(v) = (1-v)^2/4 - eps c^2/f_eps^2(v) + eps c^2, W(1) = 0.
struct Core {
    const RegularizedLaw& reg;
    double c, eps, s_eps, L;
    double z_c;    // upper end of the midpoint bracket
    double w_tail; // gap below which the junction correction is at rounding level

    Core(const ShootingProblem& p)
        : reg(p.reg), c(p.c), eps(p.reg.eps), s_eps(p.reg.s_eps), L(p.L) {
        z_c = z_alpha(reg.base, c);
        w_tail = pick_tail_gap();
    }

    double well(double v) const {  // (1-v)^2/4 - c^2/f^2(v), base branch
        const double fv = reg.base.f(v);
        return 0.25 * (1.0 - v) * (1.0 - v) - c * c / (fv * fv);
    }

    double W(double v) const {
        if (v <= s_eps) return well(v) + eps * c * c;
        const double E = reg.junction_tail(v);
        const double omE = 1.0 - E;
        return 0.25 * (1.0 - v) * (1.0 - v) - eps * c * c * E * (2.0 - E) / (omE * omE);
    }

    double dwell(double v) const {  // d/dv of the base-branch well
        const double fv = reg.base.f(v);
        return -0.5 * (1.0 - v) + 2.0 * c * c * reg.base.f_d1(v) / (fv * fv * fv);
    }

    double pick_tail_gap() const {
        double w = 0.5 * (1.0 - s_eps);
        for (int i = 0; i < 200; ++i) {
            const double E = reg.junction_tail(1.0 - w);
            const double corr = eps * c * c * E * (2.0 - E) / ((1.0 - E) * (1.0 - E));
            if (corr <= 1e-19 * 0.25 * w * w) return w;
            w /= 1.5;
        }
        throw std::runtime_error("shooting: junction tail never reaches rounding level");
    }

    double m_of_delta(double delta) const {
        const double target = -(eps * c * c + delta);
        double lo = 0.5 * z_c;
        while (well(lo) > target) {
            lo *= 0.5;
            if (lo < 1e-250)
                throw std::runtime_error("shooting: midpoint bracket collapsed");
        }
        return brent_root([&](double m) { return well(m) - target; }, lo, z_c, 1e-16);
    }

    // asinh(w/(2 sqrt(delta))) as a function of log(delta), stable for
    // delta far below the double range.
    static double asinh_scaled(double w, double log_delta) {
        const double log_x = std::log(0.5 * w) - 0.5 * log_delta;
        if (log_x > 18.0) return log_x + 0.6931471805599453;  // log(2x)
        return std::asinh(std::exp(log_x));
    }

    struct Interior {
        double m = 0.0, delta = 0.0;
        double I_h = 0.0, I_u = 0.0, J2 = 0.0, J3 = 0.0;
    };

    Interior interior(double log_delta) const {
        Interior r;
        r.delta = log_delta > -700.0 ? std::exp(log_delta) : 0.0;
        r.m = m_of_delta(r.delta);
        const double hi = 1.0 - w_tail;
        auto Hd = [&](double v) { return std::max(W(v) + r.delta, 0.0); };
        auto inv_sqrt = [&](double v) { return 1.0 / std::sqrt(Hd(v)); };
        auto u_weight_in = [&](double v) {
            const double fv = reg.base.f(v);
            return 1.0 / (eps * fv * fv * std::sqrt(Hd(v)));
        };
        auto u_weight_mid = [&](double v) {
            const double fe = reg.eval(v);
            return 1.0 / (fe * fe * std::sqrt(Hd(v)));
        };
        auto w2 = [&](double v) { return (1.0 - v) * (1.0 - v) / std::sqrt(Hd(v)); };
        auto sq = [&](double v) { return std::sqrt(Hd(v)); };

        r.I_h = integrate_sqrt_left(inv_sqrt, r.m, s_eps, 1e-13, 1e-11).value +
                integrate(inv_sqrt, s_eps, hi, 1e-13, 1e-11).value;
        r.I_u = integrate_sqrt_left(u_weight_in, r.m, s_eps, 1e-13, 1e-11).value +
                integrate(u_weight_mid, s_eps, hi, 1e-13, 1e-11).value;
        r.J2 = integrate_sqrt_left(w2, r.m, s_eps, 1e-14, 1e-11).value +
               integrate(w2, s_eps, hi, 1e-14, 1e-11).value;
        r.J3 = integrate(sq, r.m, s_eps, 1e-14, 1e-11).value +
               integrate(sq, s_eps, hi, 1e-14, 1e-11).value;
        return r;
    }

    double tail_T(double log_delta) const { return 2.0 * asinh_scaled(w_tail, log_delta); }

    double tail_J2(double log_delta) const {
        if (log_delta <= -700.0) return w_tail * w_tail;
        const double q2 = 4.0 * std::exp(log_delta);
        const double q = std::sqrt(q2);
        return w_tail * std::sqrt(w_tail * w_tail + q2) - q2 * std::asinh(w_tail / q);
    }

    double tail_J3(double log_delta) const {
        if (log_delta <= -700.0) return 0.25 * w_tail * w_tail;
        const double q2 = 4.0 * std::exp(log_delta);
        const double q = std::sqrt(q2);
        return 0.25 * (w_tail * std::sqrt(w_tail * w_tail + q2) + q2 * std::asinh(w_tail / q));
    }

    double half_width_of(double log_delta, const Interior& r) const {
        return eps * (r.I_h + tail_T(log_delta));
    }
};

}  // namespace

double shooting_energy(const ShootingProblem& p, double m, double v) {
    if (v < m) throw std::invalid_argument("shooting_energy: v below the midpoint value");
    const double eps = p.reg.eps;
    const double fe = p.reg.eval(v);
    const double fm = p.reg.base.f(m);
    const double top = 0.25 * (1.0 - v) * (1.0 - v) - eps * p.c * p.c / (fe * fe);
    const double bot = 0.25 * (1.0 - m) * (1.0 - m) - p.c * p.c / (fm * fm);
    return (top - bot) / (eps * eps);
}

double i_eps(const ShootingProblem& p) {
    const Core core(p);
    auto phi = [&](double s) { return core.W(s) - p.reg.eps * p.c * p.c; };
    const double interior =
        phi(golden_min(phi, p.reg.s_eps + 1e-15, 1.0 - 1e-15, 1e-13));
    const double at_one = -p.reg.eps * p.c * p.c;  // f_eps(1) = 1
    const double value = std::min(interior, at_one);
    const double fse = p.reg.eval(p.reg.s_eps);
    if (value < -p.reg.eps * p.c * p.c / (fse * fse) - 1e-15 || value > at_one + 1e-15)
        throw std::runtime_error("i_eps: infimum outside its admissible band");
    return value;
}

double m_hat(const ShootingProblem& p) {
    const Core core(p);
    const double delta_hat = -i_eps(p) - p.reg.eps * p.c * p.c;  // >= 0
    return core.m_of_delta(std::max(delta_hat, 0.0));
}

double half_width(const ShootingProblem& p, double m) {
    const Core core(p);
    const double delta = -core.well(m) - p.reg.eps * p.c * p.c;
    if (!(m > 0.0) || !(m < core.z_c) || !(delta > 0.0))
        throw std::invalid_argument("half_width: m must lie in (0, m_hat)");
    const double ld = std::log(delta);
    return core.half_width_of(ld, core.interior(ld));
}

ShootResult shoot(const ShootingProblem& p, double tol) {
    const Core core(p);
    // admissibility: W must stay positive across the junction, otherwise the
    // profile stalls before reaching 1 (eps too large for this c)
    for (int i = 1; i < 256; ++i) {
        const double v = p.reg.s_eps + (1.0 - p.reg.s_eps) * i / 256.0;
        if (core.W(v) <= 0.0)
            throw std::runtime_error(
                "shoot: junction potential not positive; eps exceeds the admissible "
                "threshold for this c");
    }
    const double target = 0.5 * p.L;
    auto resid = [&](double ld) { return core.half_width_of(ld, core.interior(ld)) - target; };

    // residual is strictly decreasing in log(delta); walk until bracketed
    double a = std::log(p.reg.eps * p.c * p.c);
    double fa = resid(a);
    int iters = 1;
    double b = a, fb = fa;
    const double step0 = std::max(2.0, std::abs(fa) / p.reg.eps);
    for (int i = 0; i < 300 && (fa > 0.0) == (fb > 0.0); ++i) {
        a = b;
        fa = fb;
        b = a + ((fa > 0.0) ? step0 : -step0) * (1 << std::min(i / 8, 8));
        fb = resid(b);
        ++iters;
    }
    if ((fa > 0.0) == (fb > 0.0))
        throw std::runtime_error("shoot: failed to bracket the boundary gap");
    if (a > b) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    // guarded secant on [a,b]
    double ld = a, r = fa;
    for (int i = 0; i < 120; ++i) {
        double trial = (std::abs(fb - fa) > 0.0) ? a - fa * (b - a) / (fb - fa)
                                                 : 0.5 * (a + b);
        if (!(trial > a) || !(trial < b)) trial = 0.5 * (a + b);
        const double ft = resid(trial);
        ++iters;
        if (std::abs(ft) < std::abs(r)) {
            ld = trial;
            r = ft;
        }
        if (std::abs(ft) <= tol * p.L) {
            ld = trial;
            r = ft;
            break;
        }
        if ((ft > 0.0) == (fa > 0.0)) {
            a = trial;
            fa = ft;
        } else {
            b = trial;
            fb = ft;
        }
    }
    ShootResult out;
    out.log_delta = ld;
    out.m_eps = core.m_of_delta(ld > -700.0 ? std::exp(ld) : 0.0);
    out.achieved_half_width = target + r;
    out.residual = std::abs(r);
    out.iterations = iters;
    if (out.residual > 10.0 * tol * p.L)
        throw std::runtime_error("shoot: half-width residual did not converge");
    return out;
}

namespace {

// log(sinh z) and log(cosh z), stable for large z
double log_sinh(double z) { return z + std::log1p(-std::exp(-2.0 * z)) - 0.6931471805599453; }
double log_cosh(double z) { return z + std::log1p(std::exp(-2.0 * z)) - 0.6931471805599453; }

struct SimpsonGroup {
    // nodes of one build parameter group with jacobians dx/dparam
    std::vector<double> param, jac;
    double h = 0.0;
    double weight(std::size_t j) const {
        const std::size_t n = param.size();
        double chat = (j == 0 || j + 1 == n) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        return chat * h / 3.0 * jac[j];
    }
};

}  // namespace

CriticalPointPair build_pair(const ShootingProblem& p, const ShootResult& root,
                             const SamplingSpec& spec) {
    const Core core(p);
    const double eps = p.reg.eps, c = p.c, L = p.L;
    const double ld = root.log_delta;
    const Core::Interior intr = core.interior(ld);
    const double delta = intr.delta;
    const double m = intr.m;

    CriticalPointPair pair;
    pair.eps = eps;
    pair.c = c;
    pair.L = L;
    pair.m = m;
    pair.log_delta = ld;
    pair.a_eps = 2.0 * eps * c * (intr.I_u + core.tail_T(ld));
    const double delta_over_eps = (ld - std::log(eps) > -700.0) ? delta / eps : 0.0;
    pair.d_eps = -c * c - delta_over_eps;
    pair.energy = c * pair.a_eps + 0.5 * (intr.J2 + core.tail_J2(ld)) +
                  2.0 * (intr.J3 + core.tail_J3(ld));

    auto Hd = [&](double v) { return std::max(core.W(v) + delta, 0.0); };
    auto inv_sqrt = [&](double v) { return 1.0 / std::sqrt(Hd(v)); };
    auto u_rate = [&](double v) {
        const double fe = p.reg.eval(v);
        return c / (fe * fe);
    };

    // ---- right half samples ----
    struct Node {
        double x, u, v, vp, w;
    };
    std::vector<Node> right;
    const int nA = spec.n_inner + (spec.n_inner % 2);        // even panel count
    const int nB = spec.n_junction + (spec.n_junction % 2);
    const double s_eps = p.reg.s_eps;

    SimpsonGroup gA;  // param u in [0,1], v = m + (s_eps - m) u^2
    gA.h = 1.0 / nA;
    double x_acc = 0.5 * L, u_acc = 0.5 * pair.a_eps;
    const double span = s_eps - m;
    for (int j = 0; j <= nA; ++j) {
        const double uu = static_cast<double>(j) / nA;
        const double v = m + span * uu * uu;
        if (j > 0) {
            const double v_prev = m + span * (uu - gA.h) * (uu - gA.h);
            auto dx_du = [&](double t) {
                const double vv = m + span * t * t;
                return 2.0 * eps * span * t * inv_sqrt(vv);
            };
            auto du_disp = [&](double t) {
                const double vv = m + span * t * t;
                return 2.0 * eps * span * t * inv_sqrt(vv) * u_rate(vv);
            };
            x_acc += integrate(dx_du, uu - gA.h, uu, 1e-15, 1e-12).value;
            u_acc += integrate(du_disp, uu - gA.h, uu, 1e-15, 1e-12).value;
            (void)v_prev;
        }
        double jac;
        if (j == 0) {
            jac = 2.0 * eps * std::sqrt(span / core.dwell(m));  // limit of dx/du
            if (delta > 0.0) jac = 0.0;  // exact value when the gap is representable
        } else {
            jac = 2.0 * eps * span * uu * inv_sqrt(v);
        }
        gA.param.push_back(uu);
        gA.jac.push_back(jac);
        right.push_back({x_acc, u_acc, v, std::sqrt(Hd(v)) / eps, 0.0});
    }
    for (int j = 0; j <= nA; ++j) right[j].w = gA.weight(j);

    SimpsonGroup gB;  // param z = log(1-v) from log(1-s_eps) down to log(w_tail)
    const double z0 = std::log(1.0 - s_eps), z1 = std::log(core.w_tail);
    gB.h = (z0 - z1) / nB;
    for (int j = 1; j <= nB; ++j) {
        const double z = z0 - gB.h * j;
        const double v = 1.0 - std::exp(z);
        auto dx_dz = [&](double t) { return eps * std::exp(t) * inv_sqrt(1.0 - std::exp(t)); };
        auto du_dz = [&](double t) {
            const double vv = 1.0 - std::exp(t);
            return eps * std::exp(t) * inv_sqrt(vv) * u_rate(vv);
        };
        x_acc += integrate(dx_dz, z, z + gB.h, 1e-15, 1e-12).value;
        u_acc += integrate(du_dz, z, z + gB.h, 1e-15, 1e-12).value;
        gB.param.push_back(z);
        gB.jac.push_back(eps * std::exp(z) * inv_sqrt(v));
        right.push_back({x_acc, u_acc, v, std::sqrt(Hd(v)) / eps, 0.0});
    }
    // close group B Simpson including its junction with the last A node
    {
        // treat the chain (s_eps node, B nodes) as one Simpson family
        std::vector<double> jj;
        jj.push_back(eps * std::exp(z0) * inv_sqrt(1.0 - std::exp(z0)));
        for (double v : gB.jac) jj.push_back(v);
        for (int j = 0; j <= nB; ++j) {
            const double chat = (j == 0 || j == nB) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
            const double wj = chat * gB.h / 3.0 * jj[j];
            right[nA + j].w += wj;
        }
    }

    pair.tail_x_right = x_acc;
    pair.tail_slope = std::sqrt(Hd(1.0 - core.w_tail)) / eps;

    // ---- analytic outer region: v(x) = 1 - 2 sqrt(delta) sinh((L-x)/(2 eps))
    const int nC = std::max(spec.n_tail, 2);
    for (int j = 1; j <= nC; ++j) {
        const double x = x_acc + (L - x_acc) * j / nC;
        double v = 1.0, vp = 0.0;
        const double z = (L - x) / (2.0 * eps);
        if (z > 0.0) {
            const double lw = 0.5 * ld + log_sinh(std::max(z, 1e-300)) + 0.6931471805599453;
            if (lw > -700.0) v = 1.0 - std::exp(lw);
            const double lvp = 0.5 * ld + log_cosh(z) - std::log(eps);
            if (lvp > -700.0) vp = std::exp(lvp);
        }
        right.push_back({x, pair.a_eps - c * (L - x), v, vp, 0.0});
    }
    right.back().v = 1.0;
    right.back().vp = (ld > -700.0) ? std::exp(0.5 * ld) / eps : 0.0;

    // ---- mirror to the full bar ----
    const std::size_t nR = right.size();
    pair.x.reserve(2 * nR - 1);
    for (std::size_t k = nR; k-- > 1;) {
        const Node& n = right[k];
        pair.x.push_back(L - n.x);
        pair.u.push_back(pair.a_eps - n.u);
        pair.v.push_back(n.v);
        pair.vp.push_back(-n.vp);
        pair.quad_w.push_back(n.w);
    }
    for (std::size_t k = 0; k < nR; ++k) {
        const Node& n = right[k];
        pair.x.push_back(n.x);
        pair.u.push_back(n.u);
        pair.v.push_back(n.v);
        pair.vp.push_back(n.vp);
        pair.quad_w.push_back(k == 0 ? 2.0 * n.w : n.w);
    }

    // ---- diagnostics ----
    PairDiagnostics& d = pair.diag;
    d.v_min = 1.0;
    d.v_max = 0.0;
    d.u_monotone_min = std::numeric_limits<double>::infinity();
    double worst_fi = 0.0, worst_sym = 0.0;
    for (std::size_t k = 0; k < pair.x.size(); ++k) {
        const double v = pair.v[k];
        d.v_min = std::min(d.v_min, v);
        d.v_max = std::max(d.v_max, v);
        const double fe = p.reg.eval(v);
        d.u_monotone_min = std::min(d.u_monotone_min, c / (fe * fe));
        const double fi =
            0.25 * (1.0 - v) * (1.0 - v) / eps - c * c / (fe * fe) - eps * pair.vp[k] * pair.vp[k];
        worst_fi = std::max(worst_fi, std::abs(fi - pair.d_eps));
        const std::size_t mirror = pair.x.size() - 1 - k;
        worst_sym = std::max(worst_sym, std::abs(pair.v[k] - pair.v[mirror]));
    }
    d.first_integral_rel = worst_fi / std::abs(pair.d_eps);
    d.symmetry = worst_sym;

    double stress_work = 0.0;  // int f_eps^2 u'^2 dx over the sampled interior
    for (std::size_t k = 0; k < pair.x.size(); ++k) {
        const double fe = p.reg.eval(pair.v[k]);
        stress_work += pair.quad_w[k] * c * c / (fe * fe);
    }
    stress_work += 2.0 * c * c * (L - pair.tail_x_right);  // outer region, f_eps = 1
    d.energy_identity_rel = std::abs(stress_work - c * pair.a_eps) / (c * pair.a_eps);

    d.el_weak = weak_el_residual_max(pair, p.reg, 50);
    return pair;
}

CriticalPointPair build_pair(const ShootingProblem& p, double m, const SamplingSpec& spec) {
    const Core core(p);
    const double delta = -core.well(m) - p.reg.eps * p.c * p.c;
    if (!(delta > 0.0))
        throw std::invalid_argument("build_pair: m not below m_hat at double precision");
    ShootResult r;
    r.m_eps = m;
    r.log_delta = std::log(delta);
    return build_pair(p, r, spec);
}

double weak_el_residual(const CriticalPointPair& pair,
                        const std::function<double(double)>& phi,
                        const std::function<double(double)>& phi_prime,
                        const RegularizedLaw& reg) {
    const double eps = pair.eps, c = pair.c;
    double acc = 0.0;
    for (std::size_t k = 0; k < pair.x.size(); ++k) {
        if (pair.quad_w[k] == 0.0) continue;
        const double v = pair.v[k];
        const double fe = reg.eval(v);
        const double G = c * c * reg.eval_d1(v) / (fe * fe * fe) + (v - 1.0) / (4.0 * eps);
        acc += pair.quad_w[k] *
               (eps * pair.vp[k] * phi_prime(pair.x[k]) + G * phi(pair.x[k]));
    }
    // outer regions contribute only their boundary terms (the strong equation
    // holds exactly there)
    const double xtr = pair.tail_x_right;
    const double xtl = pair.L - xtr;
    acc -= eps * pair.tail_slope * (phi(xtl) + phi(xtr));
    return acc;
}

double weak_el_residual_max(const CriticalPointPair& pair, const RegularizedLaw& reg,
                            int n_tests, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double L = pair.L;
    double worst = 0.0;
    for (int t = 0; t < n_tests; ++t) {
        std::array<double, 8> a{};
        double norm = 0.0;
        for (int k = 0; k < 8; ++k) {
            a[k] = gauss(rng) / (k + 1.0);
            norm += std::abs(a[k]);
        }
        for (auto& ak : a) ak /= norm;
        auto phi = [&](double x) {
            double s = 0.0;
            for (int k = 0; k < 8; ++k) s += a[k] * std::sin((k + 1) * M_PI * x / L);
            return s;
        };
        auto phip = [&](double x) {
            double s = 0.0;
            for (int k = 0; k < 8; ++k)
                s += a[k] * (k + 1) * M_PI / L * std::cos((k + 1) * M_PI * x / L);
            return s;
        };
        worst = std::max(worst, std::abs(weak_el_residual(pair, phi, phip, reg)));
    }
    return worst;
}

CriticalPointPair elastic_pair(double a, double L, const RegularizedLaw& reg, int n_samples) {
    if (!(a > 0.0) || !(L > 0.0))
        throw std::invalid_argument("elastic_pair: a and L must be positive");
    CriticalPointPair pair;
    pair.eps = reg.eps;
    pair.c = a / L;
    pair.L = L;
    pair.m = 1.0;
    pair.log_delta = -std::numeric_limits<double>::infinity();
    pair.a_eps = a;
    pair.d_eps = -(a / L) * (a / L);
    pair.energy = (a / L) * (a / L) * L;
    for (int i = 0; i < n_samples; ++i) {
        const double x = L * i / (n_samples - 1.0);
        pair.x.push_back(x);
        pair.u.push_back(a / L * x);
        pair.v.push_back(1.0);
        pair.vp.push_back(0.0);
        pair.quad_w.push_back(0.0);
    }
    pair.tail_x_right = L;
    pair.diag.v_min = pair.diag.v_max = 1.0;
    pair.diag.u_monotone_min = a / L;
    // f_eps'(1) = 0, so the phase equation holds identically
    pair.diag.el_weak = 0.0;
    return pair;
}

}  // namespace cohfrac
