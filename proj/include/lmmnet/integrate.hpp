#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "spatial.hpp"
#include "types.hpp"

namespace lmmnet {

template <class F>
concept RhsFunction = requires(const F& f, double t, std::span<const double> y, std::span<double> dy) {
    f(t, y, dy);
};

// ---------------------------------------------------------------------------
// linear multistep step

// Oldest level first: states[0] = v^{n-k+1}, ..., states[k-1] = v^n.
struct HistoryBuffer {
    std::deque<std::vector<double>> states;
    std::deque<std::vector<double>> rhs;
    double dt = 0.0;
    double t_now = 0.0;

    std::size_t depth() const { return states.size(); }

    void push(std::vector<double> v, std::vector<double> f) {
        states.push_back(std::move(v));
        rhs.push_back(std::move(f));
    }
    void shift(std::vector<double> v, std::vector<double> f) {
        states.pop_front();
        rhs.pop_front();
        push(std::move(v), std::move(f));
        t_now += dt;
    }
};

// v^{n+1} = -sum alpha_i v^{n+i-k+1} + dt sum beta_i F_{n+i-k+1}
inline void lmm_step(const SchemeCoefficients& s, const HistoryBuffer& h, std::span<double> out) {
    const std::size_t k = s.k();
    if (s.beta.size() != k || h.states.size() != k || h.rhs.size() != k)
        throw std::invalid_argument("lmm_step: history depth does not match scheme");
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < k; ++i)
        if (h.states[i].size() != n || h.rhs[i].size() != n)
            throw std::invalid_argument("lmm_step: cell count mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const double a = s.alpha[i], b = h.dt * s.beta[i];
        const auto& v = h.states[i];
        const auto& f = h.rhs[i];
        for (std::size_t j = 0; j < n; ++j) out[j] += -a * v[j] + b * f[j];
    }
}

inline std::vector<double> lmm_step(const SchemeCoefficients& s, const HistoryBuffer& h) {
    if (h.states.empty()) throw std::invalid_argument("lmm_step: empty history");
    std::vector<double> out(h.states.back().size());
    lmm_step(s, h, out);
    return out;
}

inline SchemeCoefficients adams_bashforth(int k) {
    SchemeCoefficients s;
    switch (k) {
    case 3: s.beta = {5.0 / 12, -16.0 / 12, 23.0 / 12}; break;
    case 4: s.beta = {-9.0 / 24, 37.0 / 24, -59.0 / 24, 55.0 / 24}; break;
    case 5: s.beta = {251.0 / 720, -1274.0 / 720, 2616.0 / 720, -2774.0 / 720, 1901.0 / 720}; break;
    default: throw std::invalid_argument("adams_bashforth: k must be 3, 4 or 5");
    }
    s.alpha.assign(static_cast<std::size_t>(k), 0.0);
    s.alpha.back() = -1.0;
    return s;
}

// ---------------------------------------------------------------------------
// Bogacki-Shampine 3(2)

struct Rk23Options {
    double rtol = 1e-6;
    double atol = 1e-9;
    bool fixed_step = false;
    int fixed_substeps = 1;  // fixed mode: steps per output interval
    std::size_t max_steps = 50'000'000;
};

struct Rk23Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

// Integrates y' = f(t, y) and calls emit(i, y) at t0 + i*output_dt for
// i = 0..n_out. Steps are clipped so each output time is hit exactly.
template <RhsFunction F, class Emit>
Rk23Stats rk23_solve(const F& f, std::vector<double> y, double t0, double output_dt, std::size_t n_out,
                     const Rk23Options& opt, Emit&& emit) {
    const std::size_t n = y.size();
    Rk23Stats st;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n), ynew(n);
    auto eval = [&](double t, const std::vector<double>& yy, std::vector<double>& out) {
        f(t, std::span<const double>(yy), std::span<double>(out));
        ++st.rhs_evals;
    };
    emit(std::size_t{0}, std::as_const(y));
    if (n_out == 0) return st;

    double t = t0;
    eval(t, y, k1);

    auto bs_step = [&](double h) {
        for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
        eval(t + 0.5 * h, tmp, k2);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.75 * h * k2[j];
        eval(t + 0.75 * h, tmp, k3);
        for (std::size_t j = 0; j < n; ++j)
            ynew[j] = y[j] + h * (2.0 / 9 * k1[j] + 1.0 / 3 * k2[j] + 4.0 / 9 * k3[j]);
        eval(t + h, ynew, k4);
    };

    if (opt.fixed_step) {
        const int sub = std::max(1, opt.fixed_substeps);
        for (std::size_t i = 1; i <= n_out; ++i) {
            const double t_target = t0 + static_cast<double>(i) * output_dt;
            for (int s = 0; s < sub; ++s) {
                const double t_end = (s + 1 == sub) ? t_target : t0 + (static_cast<double>(i - 1) + double(s + 1) / sub) * output_dt;
                bs_step(t_end - t);
                y.swap(ynew);
                k1.swap(k4);
                t = t_end;
                ++st.accepted;
            }
            if (!all_finite(y)) throw NonFiniteState(i);
            emit(i, std::as_const(y));
        }
        return st;
    }

    auto scale = [&](std::size_t, double a, double b) {
        return opt.atol + opt.rtol * std::max(std::abs(a), std::abs(b));
    };

    // Initial step, Hairer-Norsett-Wanner II.4.
    double h;
    {
        double d0 = 0, d1 = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const double sc = scale(j, y[j], y[j]);
            d0 += (y[j] / sc) * (y[j] / sc);
            d1 += (k1[j] / sc) * (k1[j] / sc);
        }
        d0 = std::sqrt(d0 / std::max<std::size_t>(n, 1));
        d1 = std::sqrt(d1 / std::max<std::size_t>(n, 1));
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, output_dt * static_cast<double>(n_out));
        for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + h0 * k1[j];
        eval(t + h0, tmp, k2);
        double d2 = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const double sc = scale(j, y[j], y[j]);
            const double e = (k2[j] - k1[j]) / sc;
            d2 += e * e;
        }
        d2 = std::sqrt(d2 / std::max<std::size_t>(n, 1)) / h0;
        const double h1 = (std::max(d1, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                      : std::pow(0.01 / std::max(d1, d2), 1.0 / 3.0);
        h = std::min(100 * h0, h1);
    }

    constexpr double safety = 0.9, fac_min = 0.2, fac_max = 5.0;
    constexpr double k_i = 0.7 / 3.0, k_p = 0.4 / 3.0;
    double err_prev = 1.0;
    std::size_t next = 1;
    while (next <= n_out) {
        const double t_target = t0 + static_cast<double>(next) * output_dt;
        const double eps_t = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_target));
        bool clipped = false;
        double h_step = h;
        if (t + h_step >= t_target - eps_t) {
            h_step = t_target - t;
            clipped = true;
        }
        if (h_step < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
            throw StepSizeUnderflow(t, h_step);
        if (st.accepted + st.rejected >= opt.max_steps) throw StepSizeUnderflow(t, h_step);

        bs_step(h_step);
        double err = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double e = h_step * (-5.0 / 72 * k1[j] + 1.0 / 12 * k2[j] + 1.0 / 9 * k3[j] - 1.0 / 8 * k4[j]);
            const double r = e / scale(j, y[j], ynew[j]);
            err += r * r;
        }
        err = std::sqrt(err / std::max<std::size_t>(n, 1));
        if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();

        if (err <= 1.0) {
            ++st.accepted;
            y.swap(ynew);
            k1.swap(k4);
            t = clipped ? t_target : t + h_step;
            double fac = err == 0.0 ? fac_max
                                    : safety * std::pow(err, -k_i) * std::pow(std::max(err_prev, 1e-4), k_p);
            fac = std::clamp(fac, fac_min, fac_max);
            const double proposal = h_step * fac;
            h = clipped ? std::max(proposal, h) : proposal;
            err_prev = std::max(err, 1e-4);
            if (clipped) {
                if (!all_finite(y)) throw NonFiniteState(next);
                emit(next, std::as_const(y));
                ++next;
            }
        } else {
            ++st.rejected;
            const double fac = std::isfinite(err) ? std::max(fac_min, safety * std::pow(err, -1.0 / 3.0)) : fac_min;
            h = h_step * fac;
        }
    }
    return st;
}

// Sampled integration of a spatial operator into a FieldSeries.
inline FieldSeries rk23_integrate(const SpatialOperator& op, std::span<const double> v0, double t0, double t1,
                                  double output_dt, const Rk23Options& opt = {}) {
    if (!(t1 > t0)) throw std::invalid_argument("rk23_integrate: t1 must exceed t0");
    const double ratio = (t1 - t0) / output_dt;
    const auto n_out = static_cast<std::size_t>(std::llround(ratio));
    if (n_out == 0 || std::abs(ratio - static_cast<double>(n_out)) > 1e-9 * ratio)
        throw std::invalid_argument("rk23_integrate: output_dt must divide t1 - t0");
    FieldSeries s(op.grid(), output_dt, t0, n_out + 1);
    rk23_solve(op, std::vector<double>(v0.begin(), v0.end()), t0, output_dt, n_out, opt,
               [&](std::size_t i, const std::vector<double>& y) { std::copy(y.begin(), y.end(), s.row(i).begin()); });
    return s;
}

// ---------------------------------------------------------------------------
// simulation driver

// Supplies the coefficients for the step from t_n (index n) given v^n.
using CoefficientProvider =
    std::function<SchemeCoefficients(std::size_t n, double t_n, std::span<const double> v_n)>;

struct SimulationResult {
    FieldSeries series;
    std::vector<SchemeCoefficients> coefficients;  // one per multistep step
    Rk23Stats rk_stats;
};

struct SimulationOptions {
    Rk23Options rk;
    double startup_tightening = 10.0;
    bool record_coefficients = true;
    int provider_depth = 3;  // step count of a learned/fixed provider
};

// Advances an existing history with a multistep scheme, writing rows
// first_row..last_row of `out`. The history must end at row first_row-1.
template <RhsFunction F>
void lmm_advance(const F& f, HistoryBuffer& hist, const CoefficientProvider& provider, FieldSeries& out,
                 std::size_t first_row, std::vector<SchemeCoefficients>* record) {
    const std::size_t n = out.n_cells();
    std::vector<double> next(n);
    for (std::size_t row = first_row; row < out.n_times; ++row) {
        const std::size_t step = row - 1;
        const auto scheme = provider(step, hist.t_now, hist.states.back());
        if (record) record->push_back(scheme);
        lmm_step(scheme, hist, next);
        if (!all_finite(next)) throw NonFiniteState(row);
        std::copy(next.begin(), next.end(), out.row(row).begin());
        if (row + 1 < out.n_times) {
            std::vector<double> fn(n);
            f(out.time(row), std::span<const double>(next), std::span<double>(fn));
            hist.shift(next, std::move(fn));
        }
    }
}

inline CoefficientProvider fixed_provider(SchemeCoefficients s) {
    return [s = std::move(s)](std::size_t, double, std::span<const double>) { return s; };
}

// RK startup for the first k-1 levels, then the multistep scheme.
inline SimulationResult run_simulation(const RunConfig& cfg, std::span<const double> v0,
                                       const CoefficientProvider& provider = {}, const SimulationOptions& opt = {}) {
    const auto problems = validate(cfg);
    if (!problems.empty()) throw std::invalid_argument("run_simulation: " + problems.front());
    if (v0.size() != static_cast<std::size_t>(cfg.grid.n_cells))
        throw std::invalid_argument("run_simulation: initial state length mismatch");

    const SpatialOperator op(cfg.pde, cfg.grid);
    const std::size_t steps = cfg.n_steps();
    SimulationResult res;
    res.series = FieldSeries(cfg.grid, cfg.dt, 0.0, steps + 1);

    if (cfg.integrator == IntegratorKind::Rk23Adaptive || cfg.integrator == IntegratorKind::Rk23Fixed) {
        Rk23Options rk = opt.rk;
        rk.fixed_step = cfg.integrator == IntegratorKind::Rk23Fixed;
        res.rk_stats = rk23_solve(op, std::vector<double>(v0.begin(), v0.end()), 0.0, cfg.dt, steps, rk,
                                  [&](std::size_t i, const std::vector<double>& y) {
                                      std::copy(y.begin(), y.end(), res.series.row(i).begin());
                                  });
        return res;
    }

    CoefficientProvider prov;
    int k = 3;
    if (cfg.integrator == IntegratorKind::AdamsBashforth) {
        k = cfg.ab_order;
        prov = fixed_provider(adams_bashforth(k));
    } else {
        if (!provider) throw std::invalid_argument("run_simulation: scheme needs a coefficient provider");
        prov = provider;
        k = opt.provider_depth;
    }
    if (steps < static_cast<std::size_t>(k - 1)) throw std::invalid_argument("run_simulation: run too short");

    Rk23Options rk = opt.rk;
    rk.rtol /= opt.startup_tightening;
    rk.atol /= opt.startup_tightening;
    rk.fixed_step = false;
    res.rk_stats = rk23_solve(op, std::vector<double>(v0.begin(), v0.end()), 0.0, cfg.dt,
                              static_cast<std::size_t>(k - 1), rk, [&](std::size_t i, const std::vector<double>& y) {
                                  std::copy(y.begin(), y.end(), res.series.row(i).begin());
                              });

    HistoryBuffer hist;
    hist.dt = cfg.dt;
    hist.t_now = res.series.time(static_cast<std::size_t>(k - 1));
    for (int i = 0; i < k; ++i) {
        auto row = res.series.row(static_cast<std::size_t>(i));
        std::vector<double> v(row.begin(), row.end());
        hist.push(v, op(res.series.time(static_cast<std::size_t>(i)), v));
    }
    lmm_advance(op, hist, prov, res.series, static_cast<std::size_t>(k),
                opt.record_coefficients ? &res.coefficients : nullptr);
    return res;
}

inline SimulationResult run_simulation(const RunConfig& cfg, const SchemeCoefficients& fixed,
                                       const SimulationOptions& opt = {}) {
    SimulationOptions o = opt;
    o.provider_depth = static_cast<int>(fixed.k());
    RunConfig c = cfg;
    c.integrator = IntegratorKind::FixedCoefficients;
    const auto v0 = initial_state(cfg.pde, cfg.grid);
    return run_simulation(c, v0, fixed_provider(fixed), o);
}

// ---------------------------------------------------------------------------
// scalar multistep runs (order checks)

// Integrates a scalar ODE to t_end with exact startup values.
inline double lmm_scalar_final(const SchemeCoefficients& s, const std::function<double(double, double)>& f,
                               const std::function<double(double)>& exact, double dt, double t_end) {
    const std::size_t k = s.k();
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    std::vector<double> v(k), fv(k);
    for (std::size_t i = 0; i < k; ++i) {
        v[i] = exact(static_cast<double>(i) * dt);
        fv[i] = f(static_cast<double>(i) * dt, v[i]);
    }
    for (std::size_t n = k - 1; n < steps; ++n) {
        double next = 0.0;
        for (std::size_t i = 0; i < k; ++i) next += -s.alpha[i] * v[i] + dt * s.beta[i] * fv[i];
        for (std::size_t i = 0; i + 1 < k; ++i) {
            v[i] = v[i + 1];
            fv[i] = fv[i + 1];
        }
        v[k - 1] = next;
        fv[k - 1] = f(static_cast<double>(n + 1) * dt, next);
    }
    return v[k - 1];
}

}  // namespace lmmnet
