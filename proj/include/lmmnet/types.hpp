#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmmnet {

// ---------------------------------------------------------------------------
// errors

struct StepSizeUnderflow : std::runtime_error {
    double t;
    StepSizeUnderflow(double t_fail, double h)
        : std::runtime_error("step size underflow at t=" + std::to_string(t_fail) +
                             " (h=" + std::to_string(h) + ")"),
          t(t_fail) {}
};

struct NonFiniteState : std::runtime_error {
    std::size_t step;
    explicit NonFiniteState(std::size_t s)
        : std::runtime_error("non-finite state at step " + std::to_string(s)), step(s) {}
};

struct InfeasibleBarrier : std::domain_error {
    double margin;
    InfeasibleBarrier(int index, double g)
        : std::domain_error("barrier margin g" + std::to_string(index) +
                            " = " + std::to_string(g) + " is not positive"),
          margin(g) {}
};

struct RetryCapExhausted : std::runtime_error {
    int attempts;
    std::size_t violating_samples;
    std::size_t total_samples;
    double worst_margin;
    RetryCapExhausted(int n, std::size_t bad, std::size_t total, double worst)
        : std::runtime_error(message(n, bad, total, worst)),
          attempts(n), violating_samples(bad), total_samples(total), worst_margin(worst) {}

private:
    static std::string message(int n, std::size_t bad, std::size_t total, double worst) {
        std::ostringstream os;
        os << "root condition still violated after " << n << " attempts: " << bad << "/"
           << total << " samples infeasible, worst margin " << worst;
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// grid and scheme

enum class Boundary { Periodic };

struct Grid1D {
    int n_cells = 0;
    double domain_length = 1.0;
    Boundary boundary = Boundary::Periodic;

    double dx() const { return domain_length / n_cells; }
    double center(int j) const { return (j + 0.5) * dx(); }
};

// alpha_k = 1 and beta_k = 0 are implicit.
struct SchemeCoefficients {
    std::vector<double> alpha;
    std::vector<double> beta;

    std::size_t k() const { return alpha.size(); }
    bool operator==(const SchemeCoefficients&) const = default;
};

// ---------------------------------------------------------------------------
// PDE description

enum class PdeKind { Heat, Wave, Burgers };
enum class InitialCondition { Sin2Pi, Sin4Pi, Zero };

struct ForcingTerm {
    double A = 0.0;
    double omega = 0.0;
    double phi = 0.0;
    int l = 3;
    bool operator==(const ForcingTerm&) const = default;
};

struct ForcingSpec {
    static constexpr std::size_t n_terms = 20;
    std::vector<ForcingTerm> terms;
    double domain_length = 2.0 * std::numbers::pi;

    // Uniform draw in the admissible ranges; l uniform over {3,4,5,6}.
    static ForcingSpec sample(std::uint64_t seed, double L = 2.0 * std::numbers::pi) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> amp(-0.5, 0.5), freq(-0.4, 0.4),
            phase(0.0, 2.0 * std::numbers::pi);
        std::uniform_int_distribution<int> wn(3, 6);
        ForcingSpec f;
        f.domain_length = L;
        f.terms.resize(n_terms);
        for (auto& t : f.terms) {
            t.A = amp(rng);
            t.omega = freq(rng);
            t.phi = phase(rng);
            t.l = wn(rng);
        }
        return f;
    }
    bool operator==(const ForcingSpec&) const = default;
};

struct PdeSpec {
    PdeKind kind = PdeKind::Heat;
    double lambda = 0.0;
    double c = 0.0;
    double eta = 0.01;
    std::optional<ForcingSpec> forcing;
    InitialCondition initial_condition = InitialCondition::Sin2Pi;

    static PdeSpec heat(double lambda) {
        PdeSpec p;
        p.kind = PdeKind::Heat;
        p.lambda = lambda;
        p.initial_condition = InitialCondition::Sin2Pi;
        return p;
    }
    static PdeSpec wave(double c) {
        PdeSpec p;
        p.kind = PdeKind::Wave;
        p.c = c;
        p.initial_condition = InitialCondition::Sin4Pi;
        return p;
    }
    static PdeSpec burgers(double eta, std::optional<ForcingSpec> f) {
        PdeSpec p;
        p.kind = PdeKind::Burgers;
        p.eta = eta;
        p.forcing = std::move(f);
        p.initial_condition = InitialCondition::Zero;
        return p;
    }
};

// ---------------------------------------------------------------------------
// space-time record, row-major (time, cell)

struct FieldSeries {
    Grid1D grid;
    double dt = 0.0;
    double t0 = 0.0;
    std::size_t n_times = 0;
    std::vector<double> values;

    FieldSeries() = default;
    FieldSeries(Grid1D g, double dt_, double t0_, std::size_t n)
        : grid(g), dt(dt_), t0(t0_), n_times(n), values(n * static_cast<std::size_t>(g.n_cells)) {}

    std::size_t n_cells() const { return static_cast<std::size_t>(grid.n_cells); }
    double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }

    std::span<double> row(std::size_t i) { return {values.data() + i * n_cells(), n_cells()}; }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * n_cells(), n_cells()};
    }
};

// ---------------------------------------------------------------------------
// run configuration

enum class IntegratorKind { Rk23Adaptive, Rk23Fixed, AdamsBashforth, LearnedScheme, FixedCoefficients };

struct RunConfig {
    PdeSpec pde;
    Grid1D grid;
    double dt = 1e-4;
    double t_end = 1.0;
    IntegratorKind integrator = IntegratorKind::Rk23Adaptive;
    int ab_order = 3;

    std::size_t n_steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }
};

// ---------------------------------------------------------------------------
// validation: report, never throw

inline void validate_into(const Grid1D& g, std::vector<std::string>& out) {
    if (g.n_cells < 3) out.push_back("grid: n_cells must be >= 3 (got " + std::to_string(g.n_cells) + ")");
    if (!(g.domain_length > 0.0) || !std::isfinite(g.domain_length))
        out.push_back("grid: domain_length must be positive and finite");
    else if (g.n_cells > 0 &&
             std::abs(g.dx() * g.n_cells - g.domain_length) > 1e-12 * g.domain_length)
        out.push_back("grid: dx * n_cells differs from domain_length");
}

inline void validate_into(const ForcingSpec& f, std::vector<std::string>& out) {
    if (f.terms.size() != ForcingSpec::n_terms)
        out.push_back("forcing: expected 20 terms, got " + std::to_string(f.terms.size()));
    if (!(f.domain_length > 0.0)) out.push_back("forcing: domain_length must be positive");
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
        const auto& t = f.terms[i];
        const std::string tag = "forcing term " + std::to_string(i) + ": ";
        if (!(std::abs(t.A) <= 0.5)) out.push_back(tag + "A outside [-0.5, 0.5]");
        if (!(std::abs(t.omega) <= 0.4)) out.push_back(tag + "omega outside [-0.4, 0.4]");
        if (!(t.phi >= 0.0 && t.phi <= 2.0 * std::numbers::pi)) out.push_back(tag + "phi outside [0, 2pi]");
        if (t.l < 3 || t.l > 6) out.push_back(tag + "l outside {3,4,5,6}");
    }
}

inline void validate_into(const PdeSpec& p, std::vector<std::string>& out) {
    switch (p.kind) {
    case PdeKind::Heat:
        if (!(p.lambda > 0.0)) out.push_back("pde: lambda must be > 0 for heat");
        break;
    case PdeKind::Wave:
        if (!(p.c > 0.0)) out.push_back("pde: c must be > 0 for wave");
        break;
    case PdeKind::Burgers:
        if (!(p.eta > 0.0)) out.push_back("pde: eta must be > 0 for burgers");
        if (p.forcing) validate_into(*p.forcing, out);
        break;
    }
    if (p.kind != PdeKind::Burgers && p.forcing) out.push_back("pde: forcing only applies to burgers");
}

inline void validate_into(const SchemeCoefficients& s, std::vector<std::string>& out) {
    if (s.alpha.empty()) out.push_back("scheme: no coefficients");
    if (s.alpha.size() != s.beta.size()) out.push_back("scheme: alpha and beta lengths differ");
    if (!s.alpha.empty() && !s.beta.empty() && s.alpha[0] == 0.0 && s.beta[0] == 0.0)
        out.push_back("scheme: alpha_0 and beta_0 both zero");
    for (double v : s.alpha)
        if (!std::isfinite(v)) out.push_back("scheme: non-finite alpha");
    for (double v : s.beta)
        if (!std::isfinite(v)) out.push_back("scheme: non-finite beta");
}

inline void validate_into(const FieldSeries& s, std::vector<std::string>& out) {
    validate_into(s.grid, out);
    if (s.values.size() != s.n_times * s.n_cells()) out.push_back("series: values shape mismatch");
    for (double v : s.values)
        if (!std::isfinite(v)) {
            out.push_back("series: non-finite value");
            break;
        }
}

inline std::vector<std::string> validate(const RunConfig& cfg) {
    std::vector<std::string> out;
    validate_into(cfg.grid, out);
    validate_into(cfg.pde, out);
    if (!(cfg.dt > 0.0)) out.push_back("run: dt must be > 0");
    if (!(cfg.t_end > 0.0)) out.push_back("run: t_end must be > 0");
    if (cfg.dt > 0.0 && cfg.t_end > 0.0) {
        const double ratio = cfg.t_end / cfg.dt;
        // a few ulp of slack: 0.3 / 0.1 is 2.9999999999999996
        const double nearest = std::round(ratio);
        if (nearest < 1.0 || std::abs(ratio - nearest) > 1e-9 * nearest)
            out.push_back("run: t_end is not an integer multiple of dt");
    }
    if (cfg.integrator == IntegratorKind::AdamsBashforth && (cfg.ab_order < 3 || cfg.ab_order > 5))
        out.push_back("run: Adams-Bashforth order must be 3, 4 or 5");
    return out;
}

template <class T>
std::vector<std::string> validate(const T& obj) {
    std::vector<std::string> out;
    validate_into(obj, out);
    return out;
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace lmmnet
