#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coarsen.hpp"
#include "integrate.hpp"
#include "stability.hpp"
#include "types.hpp"

namespace lmmnet {

enum class ConstraintMode { Unconstrained, SemiConstrained, FullyConstrained };

inline int output_arity(ConstraintMode m) { return m == ConstraintMode::FullyConstrained ? 4 : 6; }

inline const char* mode_name(ConstraintMode m) {
    switch (m) {
    case ConstraintMode::Unconstrained: return "un";
    case ConstraintMode::SemiConstrained: return "semi";
    case ConstraintMode::FullyConstrained: return "full";
    }
    return "?";
}

inline ConstraintMode parse_mode(const std::string& s) {
    if (s == "un" || s == "unconstrained") return ConstraintMode::Unconstrained;
    if (s == "semi" || s == "semiconstrained") return ConstraintMode::SemiConstrained;
    if (s == "full" || s == "fullyconstrained") return ConstraintMode::FullyConstrained;
    throw std::invalid_argument("unknown constraint mode: " + s);
}

constexpr int hidden_width = 20;

// W1 is n_input x 20 and W2 is 20 x n_out, both row-major.
struct MlpParams {
    ConstraintMode mode = ConstraintMode::SemiConstrained;
    int n_input = 0;
    std::vector<double> W1, b1, W2, b2;

    int n_out() const { return output_arity(mode); }
    std::size_t size() const { return W1.size() + b1.size() + W2.size() + b2.size(); }

    static MlpParams zeros(ConstraintMode m, int n_input) {
        MlpParams p;
        p.mode = m;
        p.n_input = n_input;
        p.W1.assign(static_cast<std::size_t>(n_input) * hidden_width, 0.0);
        p.b1.assign(hidden_width, 0.0);
        p.W2.assign(static_cast<std::size_t>(hidden_width) * p.n_out(), 0.0);
        p.b2.assign(static_cast<std::size_t>(p.n_out()), 0.0);
        return p;
    }

    template <class Fn>
    void for_each_block(Fn&& fn) {
        fn(W1);
        fn(b1);
        fn(W2);
        fn(b2);
    }
    bool operator==(const MlpParams&) const = default;
};

inline std::vector<double> flatten(const MlpParams& p) {
    std::vector<double> out;
    out.reserve(p.size());
    for (const auto* v : {&p.W1, &p.b1, &p.W2, &p.b2}) out.insert(out.end(), v->begin(), v->end());
    return out;
}

inline void unflatten(MlpParams& p, std::span<const double> flat) {
    if (flat.size() != p.size()) throw std::invalid_argument("unflatten: size mismatch");
    std::size_t off = 0;
    p.for_each_block([&](std::vector<double>& v) {
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
                  flat.begin() + static_cast<std::ptrdiff_t>(off + v.size()), v.begin());
        off += v.size();
    });
}

// (x - min) / (max - min); a constant input maps to zeros.
inline std::vector<double> normalize(std::span<const double> x) {
    std::vector<double> out(x.size(), 0.0);
    if (x.empty()) return out;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double mn = *lo, range = *hi - *lo;
    if (range == 0.0) return out;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mn) / range;
    return out;
}

struct ForwardCache {
    std::vector<double> x;  // normalized input
    std::vector<double> z;  // pre-activation
    std::vector<double> h;  // relu(z)
    std::vector<double> out;
};

// Uses the first n_input cells of `state` (wider domains feed a prefix).
inline void mlp_forward(const MlpParams& p, std::span<const double> state, ForwardCache& c) {
    if (state.size() < static_cast<std::size_t>(p.n_input))
        throw std::invalid_argument("mlp_forward: state shorter than network input");
    const int H = hidden_width, O = p.n_out(), N = p.n_input;
    c.x = normalize(state.first(static_cast<std::size_t>(N)));
    c.z.assign(p.b1.begin(), p.b1.end());
    for (int i = 0; i < N; ++i) {
        const double xi = c.x[i];
        if (xi == 0.0) continue;
        const double* w = &p.W1[static_cast<std::size_t>(i) * H];
        for (int k = 0; k < H; ++k) c.z[k] += w[k] * xi;
    }
    c.h.resize(H);
    for (int k = 0; k < H; ++k) c.h[k] = c.z[k] > 0.0 ? c.z[k] : 0.0;
    c.out.assign(p.b2.begin(), p.b2.end());
    for (int k = 0; k < H; ++k) {
        const double hk = c.h[k];
        if (hk == 0.0) continue;
        const double* w = &p.W2[static_cast<std::size_t>(k) * O];
        for (int o = 0; o < O; ++o) c.out[o] += w[o] * hk;
    }
}

inline std::vector<double> mlp_forward(const MlpParams& p, std::span<const double> state) {
    ForwardCache c;
    mlp_forward(p, state, c);
    return c.out;
}

inline SchemeCoefficients map_outputs(ConstraintMode m, std::span<const double> raw) {
    if (raw.size() != static_cast<std::size_t>(output_arity(m)))
        throw std::invalid_argument("map_outputs: arity does not match mode");
    if (m == ConstraintMode::FullyConstrained)
        return coefficients_from_pq({raw[0], raw[1]}, {raw[2], raw[3]});
    return {{raw[0], raw[1], raw[2]}, {raw[3], raw[4], raw[5]}};
}

// ---------------------------------------------------------------------------
// barriers

// B1 = sum 1/(|g_i| + eps) over the cubic margins.
inline double barrier_semi(std::span<const double> alpha, double eps) {
    const auto g = cubic_margins(alpha.data());
    double b = 0.0;
    for (double gi : g) b += 1.0 / (std::abs(gi) + eps);
    return b;
}

// B2 = sum 1/g_i over the quadratic margins; infeasible points throw.
inline double barrier_full(double p, double q) {
    const auto g = quadratic_margins(p, q);
    double b = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (!(g[i] > 0.0)) throw InfeasibleBarrier(i + 1, g[i]);
        b += 1.0 / g[i];
    }
    return b;
}

// Mode-dispatching barrier on raw network outputs.
inline double barrier(ConstraintMode m, std::span<const double> raw, double eps) {
    switch (m) {
    case ConstraintMode::Unconstrained: return 0.0;
    case ConstraintMode::SemiConstrained: return barrier_semi(raw.first(3), eps);
    case ConstraintMode::FullyConstrained: return barrier_full(raw[0], raw[1]);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// loss and gradient

enum class HiddenBiasInit {
    OutputBias,  // b1 = output biases, padded with the last output bias
    Zero,
};

struct LossConfig {
    double gamma = 0.0;
    double epsilon = 1e-8;
    double learning_rate = 1e-7;
    std::size_t n_steps = 8000;
    std::uint64_t seed = 0;
    double init_low = -5e-4;
    double init_high = 5e-4;
    std::vector<double> bias = {0.0, 0.0, -1.0, 5.0 / 12, -4.0 / 3, 23.0 / 12};
    HiddenBiasInit hidden_bias = HiddenBiasInit::Zero;
    int retry_cap = 10;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t log_every = 1;
};

struct LossTerms {
    double mse = 0.0;
    double barrier = 0.0;
    double loss = 0.0;
};

// Forward pass, prediction and (optionally) the exact gradient.
inline LossTerms loss(const MlpParams& p, const TrainingSample& s, const LossConfig& cfg, MlpParams* grad = nullptr) {
    const ConstraintMode m = p.mode;
    ForwardCache c;
    mlp_forward(p, s.input_state(), c);
    const auto sc = map_outputs(m, c.out);
    const std::size_t n = s.target.size();

    std::vector<double> e(n);
    double mse = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double pred = 0.0;
        for (int i = 0; i < 3; ++i) pred += -sc.alpha[i] * s.history[i][j] + s.dt * sc.beta[i] * s.rhs[i][j];
        e[j] = pred - s.target[j];
        mse += e[j] * e[j];
    }
    mse /= static_cast<double>(n);

    const double gamma = m == ConstraintMode::Unconstrained ? 0.0 : cfg.gamma;
    LossTerms t;
    t.mse = mse;
    t.barrier = barrier(m, c.out, cfg.epsilon);
    t.loss = mse + gamma * t.barrier;
    if (!grad) return t;

    // d loss / d (alpha, beta)
    std::array<double, 3> da{}, db{};
    for (std::size_t j = 0; j < n; ++j) {
        const double dp = 2.0 * e[j] / static_cast<double>(n);
        for (int i = 0; i < 3; ++i) {
            da[i] += -s.history[i][j] * dp;
            db[i] += s.dt * s.rhs[i][j] * dp;
        }
    }

    std::vector<double> dout(static_cast<std::size_t>(p.n_out()), 0.0);
    if (m == ConstraintMode::FullyConstrained) {
        const double P = c.out[0], Q = c.out[1];
        double dP = -da[1] + da[2] + db[2];
        double dQ = -da[0] + da[1] + db[2];
        const auto g = quadratic_margins(P, Q);
        constexpr std::array<double, 3> gp{-1.0, 0.0, 1.0}, gq{1.0, -1.0, 1.0};
        for (int i = 0; i < 3; ++i) {
            const double w = -gamma / (g[i] * g[i]);
            dP += w * gp[i];
            dQ += w * gq[i];
        }
        dout = {dP, dQ, db[0] - db[2], db[1] - db[2]};
    } else {
        if (m == ConstraintMode::SemiConstrained && gamma != 0.0) {
            const double a0 = sc.alpha[0], a2 = sc.alpha[2];
            const auto g = cubic_margins(sc.alpha.data());
            const double J[5][3] = {{-1, 1, -1}, {1, 1, 1}, {a2 - 2 * a0, -1, a0}, {-1, 0, 0}, {1, 0, 0}};
            for (int i = 0; i < 5; ++i) {
                const double sgn = (g[i] > 0.0) - (g[i] < 0.0);
                const double d = std::abs(g[i]) + cfg.epsilon;
                const double w = -gamma * sgn / (d * d);
                for (int r = 0; r < 3; ++r) da[r] += w * J[i][r];
            }
        }
        dout = {da[0], da[1], da[2], db[0], db[1], db[2]};
    }

    // backprop through the two layers
    const int H = hidden_width, O = p.n_out(), N = p.n_input;
    *grad = MlpParams::zeros(m, N);
    grad->b2 = dout;
    std::vector<double> dz(H, 0.0);
    for (int k = 0; k < H; ++k) {
        double dh = 0.0;
        for (int o = 0; o < O; ++o) {
            grad->W2[static_cast<std::size_t>(k) * O + o] = c.h[k] * dout[o];
            dh += p.W2[static_cast<std::size_t>(k) * O + o] * dout[o];
        }
        dz[k] = c.z[k] > 0.0 ? dh : 0.0;
    }
    grad->b1 = dz;
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < H; ++k) grad->W1[static_cast<std::size_t>(i) * H + k] = c.x[i] * dz[k];
    return t;
}

// ---------------------------------------------------------------------------
// initialization and training

inline MlpParams initialize(ConstraintMode m, int n_input, const LossConfig& cfg, std::uint64_t seed) {
    MlpParams p = MlpParams::zeros(m, n_input);
    if (cfg.bias.size() != static_cast<std::size_t>(p.n_out()))
        throw std::invalid_argument("initialize: bias length does not match mode arity");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(cfg.init_low, cfg.init_high);
    for (auto& w : p.W1) w = u(rng);
    for (auto& w : p.W2) w = u(rng);
    p.b2 = cfg.bias;
    if (cfg.hidden_bias == HiddenBiasInit::OutputBias)
        for (int k = 0; k < hidden_width; ++k)
            p.b1[k] = k < p.n_out() ? cfg.bias[static_cast<std::size_t>(k)] : cfg.bias.back();
    return p;
}

struct TrainLogEntry {
    std::size_t step;
    LossTerms terms;
};

struct FeasibilityReport {
    std::size_t violations = 0;
    std::size_t total = 0;
    double worst_margin = INFINITY;
};

// Root-condition margins of the emitted coefficients over a set of inputs.
inline FeasibilityReport feasibility(const MlpParams& p, const TrainingSet& data) {
    FeasibilityReport r;
    ForwardCache c;
    for (std::size_t i = 0; i < data.size(); ++i) {
        mlp_forward(p, data[i].input_state(), c);
        double worst;
        if (p.mode == ConstraintMode::FullyConstrained) {
            const auto g = quadratic_margins(c.out[0], c.out[1]);
            worst = *std::min_element(g.begin(), g.end());
        } else {
            const auto g = cubic_margins(map_outputs(p.mode, c.out).alpha.data());
            worst = *std::min_element(g.begin(), g.end());
        }
        ++r.total;
        if (!(worst > 0.0)) ++r.violations;
        r.worst_margin = std::min(r.worst_margin, worst);
    }
    return r;
}

struct TrainResult {
    MlpParams params;
    int attempts = 1;
    std::uint64_t seed_used = 0;
    std::vector<TrainLogEntry> log;
    FeasibilityReport feasibility;
};

// Plain Adam with bias correction, one sample per iteration in time order.
inline MlpParams train_once(ConstraintMode m, const TrainingSet& data, const LossConfig& cfg, std::uint64_t seed,
                            std::vector<TrainLogEntry>* log) {
    if (data.empty()) throw std::invalid_argument("train: empty dataset");
    MlpParams p = initialize(m, static_cast<int>(data.n_cells()), cfg, seed);
    std::vector<double> theta = flatten(p), mom(theta.size(), 0.0), vel(theta.size(), 0.0);
    MlpParams g;
    double b1t = 1.0, b2t = 1.0;
    for (std::size_t it = 0; it < cfg.n_steps; ++it) {
        const LossTerms t = loss(p, data[it % data.size()], cfg, &g);
        if (!std::isfinite(t.loss)) throw NonFiniteState(it);
        if (log && (it % std::max<std::size_t>(cfg.log_every, 1) == 0 || it + 1 == cfg.n_steps))
            log->push_back({it, t});
        const auto gf = flatten(g);
        b1t *= cfg.adam_beta1;
        b2t *= cfg.adam_beta2;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            mom[i] = cfg.adam_beta1 * mom[i] + (1.0 - cfg.adam_beta1) * gf[i];
            vel[i] = cfg.adam_beta2 * vel[i] + (1.0 - cfg.adam_beta2) * gf[i] * gf[i];
            const double mh = mom[i] / (1.0 - b1t), vh = vel[i] / (1.0 - b2t);
            theta[i] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.adam_eps);
        }
        unflatten(p, theta);
    }
    return p;
}

// Semi-constrained runs are redrawn (seed + 1) until every training input
// yields a scheme satisfying the cubic root-condition inequalities.
inline TrainResult train(ConstraintMode m, const TrainingSet& data, const LossConfig& cfg) {
    TrainResult r;
    const int cap = m == ConstraintMode::SemiConstrained ? std::max(cfg.retry_cap, 1) : 1;
    for (int attempt = 0; attempt < cap; ++attempt) {
        r.log.clear();
        r.seed_used = cfg.seed + static_cast<std::uint64_t>(attempt);
        r.attempts = attempt + 1;
        r.params = train_once(m, data, cfg, r.seed_used, &r.log);
        r.feasibility = feasibility(r.params, data);
        if (m != ConstraintMode::SemiConstrained || r.feasibility.violations == 0) return r;
    }
    throw RetryCapExhausted(cap, r.feasibility.violations, r.feasibility.total, r.feasibility.worst_margin);
}

// ---------------------------------------------------------------------------
// inference helpers

inline SchemeCoefficients scheme_for(const MlpParams& p, std::span<const double> state) {
    return map_outputs(p.mode, mlp_forward(p, state));
}

inline CoefficientProvider learned_provider(MlpParams p) {
    return [p = std::move(p)](std::size_t, double, std::span<const double> v) { return scheme_for(p, v); };
}

inline double round_to(double x, int decimals) {
    if (decimals < 0) return x;
    const double s = std::pow(10.0, decimals);
    return std::round(x * s) / s;
}

// Sample-averaged coefficients rounded to `decimals` places (negative: no
// rounding). A running mean keeps identical samples bit-exact.
inline SchemeCoefficients extract_constant_coefficients(const MlpParams& p, const TrainingSet& data,
                                                        int decimals = 6) {
    SchemeCoefficients acc{{0, 0, 0}, {0, 0, 0}};
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto s = scheme_for(p, data[i].input_state());
        const double w = 1.0 / static_cast<double>(i + 1);
        for (int k = 0; k < 3; ++k) {
            acc.alpha[k] += (s.alpha[k] - acc.alpha[k]) * w;
            acc.beta[k] += (s.beta[k] - acc.beta[k]) * w;
        }
    }
    for (int k = 0; k < 3; ++k) {
        acc.alpha[k] = round_to(acc.alpha[k], decimals);
        acc.beta[k] = round_to(acc.beta[k], decimals);
    }
    return acc;
}

}  // namespace lmmnet
