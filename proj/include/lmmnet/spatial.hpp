#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "types.hpp"

namespace lmmnet {

using RhsField = std::vector<double>;

namespace detail {
inline void check_len(std::span<const double> v, const Grid1D& g) {
    if (v.size() != static_cast<std::size_t>(g.n_cells))
        throw std::invalid_argument("state length does not match grid");
}
}  // namespace detail

// lambda (v_{j+1} - 2 v_j + v_{j-1}) / dx^2, periodic.
inline void heat_rhs(std::span<const double> v, double lambda, const Grid1D& g, std::span<double> out) {
    detail::check_len(v, g);
    const int n = g.n_cells;
    const double s = lambda / (g.dx() * g.dx());
    for (int j = 0; j < n; ++j) {
        const double l = v[(j + n - 1) % n], r = v[(j + 1) % n];
        out[j] = s * ((r - v[j]) - (v[j] - l));
    }
}

// -c (v_{j+1} - v_{j-1}) / (2 dx), periodic.
inline void wave_rhs(std::span<const double> v, double c, const Grid1D& g, std::span<double> out) {
    detail::check_len(v, g);
    const int n = g.n_cells;
    const double s = -c / (2.0 * g.dx());
    for (int j = 0; j < n; ++j) out[j] = s * (v[(j + 1) % n] - v[(j + n - 1) % n]);
}

inline double forcing_eval(const ForcingSpec& f, double x, double t) {
    double acc = 0.0;
    for (const auto& term : f.terms)
        acc += term.A * std::sin(term.omega * t + 2.0 * std::numbers::pi * term.l * x / f.domain_length + term.phi);
    return acc;
}

// Forcing sampled at cell centers, with per-term spatial tables so a time
// level costs 2 * n_terms trig calls instead of n_terms * n_cells.
class ForcingField {
public:
    ForcingField() = default;
    ForcingField(const ForcingSpec& f, const Grid1D& g) : spec_(&f), n_(g.n_cells) {
        sx_.resize(f.terms.size() * n_);
        cx_.resize(f.terms.size() * n_);
        for (std::size_t i = 0; i < f.terms.size(); ++i)
            for (int j = 0; j < n_; ++j) {
                const double a = 2.0 * std::numbers::pi * f.terms[i].l * g.center(j) / f.domain_length;
                sx_[i * n_ + j] = std::sin(a);
                cx_[i * n_ + j] = std::cos(a);
            }
    }

    bool active() const { return spec_ != nullptr; }

    void add_to(double t, std::span<double> out) const {
        if (!spec_) return;
        for (std::size_t i = 0; i < spec_->terms.size(); ++i) {
            const auto& term = spec_->terms[i];
            const double ph = term.omega * t + term.phi;
            const double s = term.A * std::sin(ph), c = term.A * std::cos(ph);
            const double* sx = &sx_[i * n_];
            const double* cx = &cx_[i * n_];
            for (int j = 0; j < n_; ++j) out[j] += s * cx[j] + c * sx[j];
        }
    }

private:
    const ForcingSpec* spec_ = nullptr;
    int n_ = 0;
    std::vector<double> sx_, cx_;
};

// -(J_{j+1/2} - J_{j-1/2}) / dx + f, J = ((v_j+v_{j+1})/2)^2/2 - eta (v_{j+1}-v_j)/dx.
inline void burgers_rhs(std::span<const double> v, double eta, const Grid1D& g, const ForcingField& forcing,
                        double t, std::span<double> out) {
    detail::check_len(v, g);
    const int n = g.n_cells;
    const double dx = g.dx();
    auto flux = [&](int j) {
        const double a = v[j], b = v[(j + 1) % n];
        const double m = 0.5 * (a + b);
        return 0.5 * m * m - eta * (b - a) / dx;
    };
    double left = flux(n - 1);
    for (int j = 0; j < n; ++j) {
        const double right = flux(j);
        out[j] = -(right - left) / dx;
        left = right;
    }
    forcing.add_to(t, out);
}

inline void burgers_rhs(std::span<const double> v, double eta, const Grid1D& g, const ForcingSpec& f, double t,
                        std::span<double> out) {
    burgers_rhs(v, eta, g, ForcingField(f, g), t, out);
}

// Spatial operator bound to one PDE and grid; the unit every integrator uses.
class SpatialOperator {
public:
    SpatialOperator(const PdeSpec& pde, const Grid1D& g) : pde_(pde), grid_(g) {
        if (pde_.kind == PdeKind::Burgers && pde_.forcing) forcing_ = ForcingField(*pde_.forcing, grid_);
    }
    SpatialOperator(const SpatialOperator& o) : SpatialOperator(o.pde_, o.grid_) {}
    SpatialOperator& operator=(const SpatialOperator&) = delete;

    const Grid1D& grid() const { return grid_; }
    const PdeSpec& pde() const { return pde_; }

    void operator()(double t, std::span<const double> v, std::span<double> out) const {
        switch (pde_.kind) {
        case PdeKind::Heat: heat_rhs(v, pde_.lambda, grid_, out); break;
        case PdeKind::Wave: wave_rhs(v, pde_.c, grid_, out); break;
        case PdeKind::Burgers: burgers_rhs(v, pde_.eta, grid_, forcing_, t, out); break;
        }
    }

    RhsField operator()(double t, std::span<const double> v) const {
        RhsField out(v.size());
        (*this)(t, v, out);
        return out;
    }

private:
    PdeSpec pde_;
    Grid1D grid_;
    ForcingField forcing_;
};

inline double initial_wavenumber(const PdeSpec& pde, double L) {
    switch (pde.initial_condition) {
    case InitialCondition::Sin2Pi: return 2.0 * std::numbers::pi / L;
    case InitialCondition::Sin4Pi: return 4.0 * std::numbers::pi / L;
    case InitialCondition::Zero: return 0.0;
    }
    return 0.0;
}

// Closed forms: heat e^{-k^2 lambda t} sin(kx), wave sin(k(x - ct)).
inline double exact_solution(const PdeSpec& pde, double x, double t, double L = 1.0) {
    const double k = initial_wavenumber(pde, L);
    switch (pde.kind) {
    case PdeKind::Heat: return std::exp(-k * k * pde.lambda * t) * std::sin(k * x);
    case PdeKind::Wave: return std::sin(k * (x - pde.c * t));
    case PdeKind::Burgers: break;
    }
    throw std::invalid_argument("exact_solution: no closed form for Burgers");
}

// sin(kx) averaged over [x - dx/2, x + dx/2].
inline double sine_cell_factor(double k, double dx) {
    const double h = 0.5 * k * dx;
    return h == 0.0 ? 1.0 : std::sin(h) / h;
}

// Exact cell averages of the closed-form solution.
inline std::vector<double> exact_cell_averages(const PdeSpec& pde, const Grid1D& g, double t) {
    std::vector<double> out(g.n_cells);
    const double f = sine_cell_factor(initial_wavenumber(pde, g.domain_length), g.dx());
    for (int j = 0; j < g.n_cells; ++j) out[j] = f * exact_solution(pde, g.center(j), t, g.domain_length);
    return out;
}

// Initial cell averages. Sine data is averaged exactly; Zero is zero.
inline std::vector<double> initial_state(const PdeSpec& pde, const Grid1D& g) {
    std::vector<double> out(g.n_cells, 0.0);
    const double k = initial_wavenumber(pde, g.domain_length);
    if (k == 0.0) return out;
    const double f = sine_cell_factor(k, g.dx());
    for (int j = 0; j < g.n_cells; ++j) out[j] = f * std::sin(k * g.center(j));
    return out;
}

// Pointwise samples at cell centers (the cruder alternative).
inline std::vector<double> initial_state_pointwise(const PdeSpec& pde, const Grid1D& g) {
    std::vector<double> out(g.n_cells, 0.0);
    const double k = initial_wavenumber(pde, g.domain_length);
    for (int j = 0; j < g.n_cells && k != 0.0; ++j) out[j] = std::sin(k * g.center(j));
    return out;
}

}  // namespace lmmnet
