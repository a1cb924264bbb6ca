#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "integrate.hpp"
#include "types.hpp"

namespace lmmnet {

// ---------------------------------------------------------------------------
// error curves

struct ErrorReport {
    std::vector<double> times;
    std::vector<double> mse_instant;  // spatial mean at each level
    std::vector<double> mae_instant;
    std::vector<double> mse_cumulative;  // mean over cells and levels in [0, t]
    std::vector<double> mae_cumulative;
    double mse_total = 0.0;
    double mae_total = 0.0;
    double max_mse = 0.0;
    double max_mae = 0.0;

    std::size_t index_at(double t) const {
        if (times.size() < 2) return 0;
        const double dt = times[1] - times[0];
        const auto i = static_cast<long long>(std::llround((t - times.front()) / dt));
        return static_cast<std::size_t>(std::clamp<long long>(i, 0, static_cast<long long>(times.size()) - 1));
    }
    double mse_until(double t) const { return mse_cumulative.at(index_at(t)); }
    double mae_until(double t) const { return mae_cumulative.at(index_at(t)); }
};

inline ErrorReport error_report(const FieldSeries& pred, const FieldSeries& truth) {
    if (pred.n_times != truth.n_times || pred.n_cells() != truth.n_cells())
        throw std::invalid_argument("error_report: series shapes differ");
    ErrorReport r;
    const std::size_t T = pred.n_times, n = pred.n_cells();
    r.times.resize(T);
    r.mse_instant.resize(T);
    r.mae_instant.resize(T);
    r.mse_cumulative.resize(T);
    r.mae_cumulative.resize(T);
    double s2 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
        const auto a = pred.row(i), b = truth.row(i);
        double e2 = 0.0, e1 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = a[j] - b[j];
            e2 += d * d;
            e1 += std::abs(d);
        }
        r.times[i] = pred.time(i);
        r.mse_instant[i] = e2 / static_cast<double>(n);
        r.mae_instant[i] = e1 / static_cast<double>(n);
        s2 += r.mse_instant[i];
        s1 += r.mae_instant[i];
        r.mse_cumulative[i] = s2 / static_cast<double>(i + 1);
        r.mae_cumulative[i] = s1 / static_cast<double>(i + 1);
    }
    r.mse_total = T ? r.mse_cumulative.back() : 0.0;
    r.mae_total = T ? r.mae_cumulative.back() : 0.0;
    r.max_mse = T ? *std::max_element(r.mse_cumulative.begin(), r.mse_cumulative.end()) : 0.0;
    r.max_mae = T ? *std::max_element(r.mae_cumulative.begin(), r.mae_cumulative.end()) : 0.0;
    return r;
}

// One row of the tabular report layout.
struct TableRow {
    double mse_half = 0, mse_full = 0, mae_half = 0, mae_full = 0, max_mse = 0, max_mae = 0;
};

inline TableRow table_row(const ErrorReport& r, double t_half, double t_full) {
    return {r.mse_until(t_half), r.mse_until(t_full), r.mae_until(t_half),
            r.mae_until(t_full), r.max_mse,            r.max_mae};
}

// ---------------------------------------------------------------------------
// phase analysis of a 3-step scheme with the central wave operator

struct PhaseReport {
    double amplitude = 0.0;
    double displacement = 0.0;
    double gamma = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
    bool time_averaged = false;
};

inline double spatial_phase_lag(double alpha_angle, double c, double dt) {
    if (alpha_angle == 0.0) return 0.0;
    return (1.0 - std::sin(alpha_angle) / alpha_angle) * c * dt;
}

// Exact history sin(k(x - ct)) at levels n-2, n-1, n pushed through one step:
// nine sinusoids with amplitudes (beta r, -alpha, -beta r) per level and
// offsets Gamma = k(l dx + m c dt), m the age of the level.
inline PhaseReport phase_displacement(const SchemeCoefficients& s, double dx, double dt, double c, double k) {
    if (s.k() != 3) throw std::invalid_argument("phase_displacement: 3-step scheme required");
    const double r = c * dt / (2.0 * dx);
    double S = 0.0, C = 0.0, S2 = 0.0, C2 = 0.0;
    for (int lvl = 0; lvl < 3; ++lvl) {
        const int age = 2 - lvl;
        const double amp[3] = {s.beta[lvl] * r, -s.alpha[lvl], -s.beta[lvl] * r};
        for (int l = -1; l <= 1; ++l) {
            const double G = k * (l * dx + age * c * dt);
            const double a = amp[l + 1];
            S += a * std::sin(G);
            C += a * std::cos(G);
            S2 += a * std::sin(std::numbers::pi / 2 - G);
            C2 += a * std::cos(std::numbers::pi / 2 - G);
        }
    }
    PhaseReport p;
    p.b1 = std::hypot(S, C);
    p.b2 = std::hypot(S2, C2);
    if (p.b1 == 0.0) throw std::domain_error("phase_displacement: vanishing amplitude");
    p.amplitude = p.b1;
    p.gamma = std::atan2(S, C);
    // reduce into [-half wavelength, half wavelength)
    const double half = std::numbers::pi / k;
    double d = -p.gamma / k;
    d = std::fmod(d + half, 2.0 * half);
    if (d < 0) d += 2.0 * half;
    p.displacement = d - half;
    return p;
}

inline PhaseReport mean_phase_displacement(const std::vector<SchemeCoefficients>& per_step, double dx, double dt,
                                           double c, double k) {
    if (per_step.empty()) throw std::invalid_argument("mean_phase_displacement: no steps");
    PhaseReport m;
    for (const auto& s : per_step) {
        const auto p = phase_displacement(s, dx, dt, c, k);
        m.amplitude += p.amplitude;
        m.displacement += p.displacement;
        m.gamma += p.gamma;
        m.b1 += p.b1;
        m.b2 += p.b2;
        if (!(s == per_step.front())) m.time_averaged = true;
    }
    const double n = static_cast<double>(per_step.size());
    m.amplitude /= n;
    m.displacement /= n;
    m.gamma /= n;
    m.b1 /= n;
    m.b2 /= n;
    return m;
}

// Least-squares slope of y = k x.
inline double fit_slope_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) throw std::invalid_argument("fit_slope: bad input");
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
    }
    return sxy / sxx;
}

// ---------------------------------------------------------------------------
// statistics

namespace detail {
// Modified Lentz continued fraction for the incomplete beta function.
inline double betacf(double a, double b, double x) {
    constexpr int max_it = 500;
    constexpr double eps = 1e-16, fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_it; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}
}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(lbt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * detail::betacf(a, b, x) / a;
    return 1.0 - bt * detail::betacf(b, a, 1.0 - x) / b;
}

// Two-sided tail P(|T| >= |t|) for Student t with nu degrees of freedom.
inline double student_t_two_sided(double t, double nu) {
    return incomplete_beta(0.5 * nu, 0.5, nu / (nu + t * t));
}

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double mean_difference = 0.0;
    std::size_t n = 0;
};

inline TTestResult paired_ttest(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("paired_ttest: lengths differ");
    if (xs.size() < 2) throw std::invalid_argument("paired_ttest: need at least 2 pairs");
    const std::size_t n = xs.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = xs[i] - ys[i];
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    TTestResult r;
    r.n = n;
    r.mean_difference = mean;
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) {
        // all differences equal: zero gives p = 1 by convention
        r.t = mean == 0.0 ? 0.0 : std::copysign(INFINITY, mean);
        r.p = mean == 0.0 ? 1.0 : 0.0;
        return r;
    }
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    r.p = student_t_two_sided(r.t, static_cast<double>(n - 1));
    return r;
}

struct SampleSummary {
    std::vector<double> reduction_pct;  // 100 (rk - method) / rk
    double mean_method = 0.0;
    double mean_reference = 0.0;
    double mean_reduction_pct = 0.0;
};

inline SampleSummary summarize_samples(const std::vector<double>& method, const std::vector<double>& reference) {
    if (method.size() != reference.size() || method.empty())
        throw std::invalid_argument("summarize_samples: columns must be paired and non-empty");
    SampleSummary s;
    const double n = static_cast<double>(method.size());
    for (std::size_t i = 0; i < method.size(); ++i) {
        const double red = reference[i] == 0.0 ? 0.0 : 100.0 * (reference[i] - method[i]) / reference[i];
        s.reduction_pct.push_back(red);
        s.mean_method += method[i];
        s.mean_reference += reference[i];
        s.mean_reduction_pct += red;
    }
    s.mean_method /= n;
    s.mean_reference /= n;
    s.mean_reduction_pct /= n;
    return s;
}

// ---------------------------------------------------------------------------
// convergence order

struct OrderFit {
    double order = 0.0;
    bool degenerate = false;  // errors at round-off level; slope meaningless
};

// Least-squares slope of log(error) against log(dt).
inline OrderFit convergence_order(const std::function<double(double)>& error_at, const std::vector<double>& dts,
                                  double floor = 1e-14) {
    if (dts.size() < 3) throw std::invalid_argument("convergence_order: need at least 3 step sizes");
    std::vector<double> lx, ly;
    OrderFit f;
    for (double dt : dts) {
        const double e = std::abs(error_at(dt));
        if (!(e > floor)) f.degenerate = true;
        lx.push_back(std::log(dt));
        ly.push_back(std::log(std::max(e, std::numeric_limits<double>::min())));
    }
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    f.order = sxy / sxx;
    return f;
}

// Empirical order of a fixed scheme on dv/dt = -v, v(0) = 1, error at t = 1.
inline OrderFit scheme_order_on_decay(const SchemeCoefficients& s, const std::vector<double>& dts) {
    auto f = [](double, double v) { return -v; };
    auto exact = [](double t) { return std::exp(-t); };
    return convergence_order([&](double dt) { return lmm_scalar_final(s, f, exact, dt, 1.0) - std::exp(-1.0); },
                             dts);
}

}  // namespace lmmnet
