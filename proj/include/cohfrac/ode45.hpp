#ifndef COHFRAC_ODE45_HPP
#define COHFRAC_ODE45_HPP

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

// Embedded Dormand-Prince 5(4) integrator for small fixed-size systems,
// with 4th-order dense output and event localization by bisection on the
// continuous extension.

namespace cohfrac {

template <std::size_t N>
using OdeVec = std::array<double, N>;

enum class IvpStop { TMax, Event, StepUnderflow, MaxSteps };

struct IvpOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double t_max = 1e3;
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 5'000'000;
    bool store_steps = true;
};

template <std::size_t N>
struct OdeEvent {
    std::function<double(double, const OdeVec<N>&)> value;
    int direction = 0;    // +1 rising, -1 falling, 0 any
    bool terminal = false;
};

template <std::size_t N>
struct EventHit {
    std::size_t index;    // which event fired
    double t;
    OdeVec<N> y;
};

template <std::size_t N>
struct IvpSolution {
    std::vector<double> t;
    std::vector<OdeVec<N>> y;
    std::vector<EventHit<N>> events;
    IvpStop stop = IvpStop::TMax;
    long steps = 0;
};

namespace detail {

// Dormand-Prince coefficients.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
inline constexpr double dp_e[7] = {
    // b5 - b4, used for the embedded error estimate
    35.0 / 384 - 5179.0 / 57600, 0.0, 500.0 / 1113 - 7571.0 / 16695,
    125.0 / 192 - 393.0 / 640, -2187.0 / 6784 + 92097.0 / 339200,
    11.0 / 84 - 187.0 / 2100, -1.0 / 40};
// Dense-output weights (Hairer's contd5).
inline constexpr double dp_d[7] = {
    -12715105075.0 / 11282082432.0, 0.0, 87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0, 701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0, 69997945.0 / 29380423.0};

}  // namespace detail

template <std::size_t N, class RHS>
class Dopri5 {
public:
    Dopri5(RHS rhs, double t0, const OdeVec<N>& y0, const IvpOptions& opts)
        : rhs_(std::move(rhs)), opts_(opts), t_(t0), y_(y0) {
        k_[0] = rhs_(t_, y_);
        h_ = initial_step();
    }

    double t() const { return t_; }
    double t_prev() const { return tp_; }
    const OdeVec<N>& y() const { return y_; }
    const OdeVec<N>& y_prev() const { return yp_; }

    // One accepted step; returns false on step-size underflow.
    bool step(double t_limit) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            double h = std::min(h_, opts_.h_max);
            if (t_ + h > t_limit) h = t_limit - t_;
            if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::abs(t_) &&
                t_ + h == t_) {
                return false;
            }
            OdeVec<N> ytmp;
            for (int s = 1; s < 7; ++s) {
                for (std::size_t i = 0; i < N; ++i) {
                    double acc = 0.0;
                    for (int j = 0; j < s; ++j) acc += detail::dp_a[s][j] * k_[j][i];
                    ytmp[i] = y_[i] + h * acc;
                }
                k_[s] = rhs_(t_ + detail::dp_c[s] * h, ytmp);
            }
            // stage 7 state equals the 5th-order solution
            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                double e = 0.0;
                for (int s = 0; s < 7; ++s) e += detail::dp_e[s] * k_[s][i];
                e *= h;
                const double sc = opts_.abs_tol +
                                  opts_.rel_tol * std::max(std::abs(y_[i]), std::abs(ytmp[i]));
                err += (e / sc) * (e / sc);
            }
            err = std::sqrt(err / N);
            if (err <= 1.0) {
                tp_ = t_;
                yp_ = y_;
                kp_ = k_;
                hp_ = h;
                t_ += h;
                y_ = ytmp;
                k_[0] = k_[6];  // FSAL
                const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
                h_ = h * fac;
                prepare_dense();
                return true;
            }
            h_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        }
        return false;
    }

    // Dense output on the last accepted step [t_prev, t].
    OdeVec<N> interpolate(double t) const {
        const double th = (t - tp_) / hp_;
        const double th1 = 1.0 - th;
        OdeVec<N> out;
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = r1_[i] + th * (r2_[i] + th1 * (r3_[i] + th * (r4_[i] + th1 * r5_[i])));
        }
        return out;
    }

private:
    double initial_step() const {
        double ny = 0.0, nf = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            ny = std::max(ny, std::abs(y_[i]));
            nf = std::max(nf, std::abs(k_[0][i]));
        }
        double h = (nf > 1e-12) ? 0.01 * (ny + opts_.abs_tol) / nf : 1e-6;
        return std::min(h, opts_.h_max);
    }

    void prepare_dense() {
        for (std::size_t i = 0; i < N; ++i) {
            const double dy = y_[i] - yp_[i];
            const double bspl = hp_ * kp_[0][i] - dy;
            r1_[i] = yp_[i];
            r2_[i] = dy;
            r3_[i] = bspl;
            r4_[i] = dy - hp_ * k_[0][i] - bspl;
            double acc = 0.0;
            for (int s = 0; s < 7; ++s) acc += detail::dp_d[s] * kp_[s][i];
            r5_[i] = hp_ * acc;
        }
    }

    RHS rhs_;
    IvpOptions opts_;
    double t_, tp_ = 0.0, h_ = 1e-6, hp_ = 0.0;
    OdeVec<N> y_, yp_{};
    std::array<OdeVec<N>, 7> k_{}, kp_{};
    OdeVec<N> r1_{}, r2_{}, r3_{}, r4_{}, r5_{};
};

// Integrate y' = rhs(t,y) from (t0,y0) until t_max or a terminal event.
template <std::size_t N, class RHS>
IvpSolution<N> solve_ivp(RHS rhs, double t0, const OdeVec<N>& y0,
                         const std::vector<OdeEvent<N>>& events, const IvpOptions& opts) {
    IvpSolution<N> sol;
    Dopri5<N, RHS> stepper(rhs, t0, y0, opts);
    std::vector<double> ev_prev(events.size());
    for (std::size_t j = 0; j < events.size(); ++j) ev_prev[j] = events[j].value(t0, y0);
    if (opts.store_steps) {
        sol.t.push_back(t0);
        sol.y.push_back(y0);
    }
    while (stepper.t() < opts.t_max) {
        if (sol.steps++ >= opts.max_steps) {
            sol.stop = IvpStop::MaxSteps;
            return sol;
        }
        if (!stepper.step(opts.t_max)) {
            sol.stop = IvpStop::StepUnderflow;
            return sol;
        }
        bool terminal = false;
        for (std::size_t j = 0; j < events.size(); ++j) {
            const double e1 = events[j].value(stepper.t(), stepper.y());
            const double e0 = ev_prev[j];
            const bool crossed = (e0 < 0.0 && e1 >= 0.0 && events[j].direction >= 0) ||
                                 (e0 > 0.0 && e1 <= 0.0 && events[j].direction <= 0);
            if (crossed) {
                double lo = stepper.t_prev(), hi = stepper.t();
                double flo = e0;
                for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi));
                     ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = events[j].value(mid, stepper.interpolate(mid));
                    if ((fm > 0.0) == (flo > 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                EventHit<N> hit{j, hi, stepper.interpolate(hi)};
                sol.events.push_back(hit);
                if (events[j].terminal) {
                    terminal = true;
                    if (opts.store_steps) {
                        sol.t.push_back(hit.t);
                        sol.y.push_back(hit.y);
                    }
                }
            }
            ev_prev[j] = e1;
        }
        if (terminal) {
            sol.stop = IvpStop::Event;
            return sol;
        }
        if (opts.store_steps) {
            sol.t.push_back(stepper.t());
            sol.y.push_back(stepper.y());
        }
    }
    sol.stop = IvpStop::TMax;
    return sol;
}

}  // namespace cohfrac

#endif
