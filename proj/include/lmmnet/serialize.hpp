#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "coarsen.hpp"
#include "learner.hpp"
#include "types.hpp"

namespace lmmnet {

using json = nlohmann::json;

NLOHMANN_JSON_SERIALIZE_ENUM(Boundary, {{Boundary::Periodic, "periodic"}})
NLOHMANN_JSON_SERIALIZE_ENUM(PdeKind, {{PdeKind::Heat, "heat"}, {PdeKind::Wave, "wave"}, {PdeKind::Burgers, "burgers"}})
NLOHMANN_JSON_SERIALIZE_ENUM(InitialCondition, {{InitialCondition::Sin2Pi, "sin2pi"},
                                                {InitialCondition::Sin4Pi, "sin4pi"},
                                                {InitialCondition::Zero, "zero"}})
NLOHMANN_JSON_SERIALIZE_ENUM(IntegratorKind, {{IntegratorKind::Rk23Adaptive, "rk23_adaptive"},
                                              {IntegratorKind::Rk23Fixed, "rk23_fixed"},
                                              {IntegratorKind::AdamsBashforth, "adams_bashforth"},
                                              {IntegratorKind::LearnedScheme, "learned"},
                                              {IntegratorKind::FixedCoefficients, "fixed"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ConstraintMode, {{ConstraintMode::Unconstrained, "un"},
                                              {ConstraintMode::SemiConstrained, "semi"},
                                              {ConstraintMode::FullyConstrained, "full"}})

inline void to_json(json& j, const Grid1D& g) {
    j = {{"n_cells", g.n_cells}, {"domain_length", g.domain_length}, {"dx", g.dx()}, {"boundary", g.boundary}};
}
inline void from_json(const json& j, Grid1D& g) {
    j.at("n_cells").get_to(g.n_cells);
    g.domain_length = j.value("domain_length", 1.0);
    g.boundary = j.value("boundary", Boundary::Periodic);
}

inline void to_json(json& j, const SchemeCoefficients& s) {
    j = {{"k", s.k()}, {"alpha", s.alpha}, {"beta", s.beta}};
}
inline void from_json(const json& j, SchemeCoefficients& s) {
    j.at("alpha").get_to(s.alpha);
    j.at("beta").get_to(s.beta);
}

inline void to_json(json& j, const ForcingTerm& t) {
    j = {{"A", t.A}, {"omega", t.omega}, {"phi", t.phi}, {"l", t.l}};
}
inline void from_json(const json& j, ForcingTerm& t) {
    j.at("A").get_to(t.A);
    j.at("omega").get_to(t.omega);
    j.at("phi").get_to(t.phi);
    j.at("l").get_to(t.l);
}

inline void to_json(json& j, const ForcingSpec& f) { j = {{"terms", f.terms}, {"domain_length", f.domain_length}}; }
inline void from_json(const json& j, ForcingSpec& f) {
    j.at("terms").get_to(f.terms);
    j.at("domain_length").get_to(f.domain_length);
}

inline void to_json(json& j, const PdeSpec& p) {
    j = {{"kind", p.kind},  {"lambda", p.lambda}, {"c", p.c},
         {"eta", p.eta},    {"initial_condition", p.initial_condition}};
    j["forcing"] = p.forcing ? json(*p.forcing) : json(nullptr);
}
inline void from_json(const json& j, PdeSpec& p) {
    j.at("kind").get_to(p.kind);
    p.lambda = j.value("lambda", 0.0);
    p.c = j.value("c", 0.0);
    p.eta = j.value("eta", 0.01);
    p.initial_condition = j.value("initial_condition", InitialCondition::Sin2Pi);
    if (j.contains("forcing") && !j["forcing"].is_null()) p.forcing = j["forcing"].get<ForcingSpec>();
    else p.forcing.reset();
}

inline void to_json(json& j, const FieldSeries& s) {
    json rows = json::array();
    for (std::size_t i = 0; i < s.n_times; ++i) {
        const auto r = s.row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    j = {{"grid", s.grid}, {"dt", s.dt}, {"t0", s.t0}, {"n_times", s.n_times}, {"values", rows}};
}
inline void from_json(const json& j, FieldSeries& s) {
    s = FieldSeries(j.at("grid").get<Grid1D>(), j.at("dt").get<double>(), j.value("t0", 0.0),
                    j.at("n_times").get<std::size_t>());
    const auto& rows = j.at("values");
    if (rows.size() != s.n_times) throw std::invalid_argument("series: row count mismatch");
    for (std::size_t i = 0; i < s.n_times; ++i) {
        const auto& r = rows[i];
        if (r.size() != s.n_cells()) throw std::invalid_argument("series: row length mismatch");
        for (std::size_t c = 0; c < s.n_cells(); ++c) s.row(i)[c] = r[c].get<double>();
    }
}

inline void to_json(json& j, const RunConfig& r) {
    j = {{"pde", r.pde}, {"grid", r.grid}, {"dt", r.dt}, {"t_end", r.t_end}, {"integrator", r.integrator},
         {"ab_order", r.ab_order}};
}
inline void from_json(const json& j, RunConfig& r) {
    j.at("pde").get_to(r.pde);
    j.at("grid").get_to(r.grid);
    j.at("dt").get_to(r.dt);
    j.at("t_end").get_to(r.t_end);
    r.integrator = j.value("integrator", IntegratorKind::Rk23Adaptive);
    r.ab_order = j.value("ab_order", 3);
}

inline void to_json(json& j, const MlpParams& p) {
    j = {{"mode", p.mode},
         {"n_input", p.n_input},
         {"hidden", hidden_width},
         {"n_out", p.n_out()},
         {"W1", p.W1},
         {"b1", p.b1},
         {"W2", p.W2},
         {"b2", p.b2}};
}
inline void from_json(const json& j, MlpParams& p) {
    p = MlpParams::zeros(j.at("mode").get<ConstraintMode>(), j.at("n_input").get<int>());
    auto load = [&](const char* key, std::vector<double>& v) {
        auto src = j.at(key).get<std::vector<double>>();
        if (src.size() != v.size()) throw std::invalid_argument(std::string("checkpoint: bad shape for ") + key);
        v = std::move(src);
    };
    load("W1", p.W1);
    load("b1", p.b1);
    load("W2", p.W2);
    load("b2", p.b2);
}

// ---------------------------------------------------------------------------
// files

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(1) + "\n"); }

// Shortest round-trip text for a double.
inline std::string fmt(double v) {
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline std::string series_csv(const FieldSeries& s) {
    std::ostringstream os;
    os << "t";
    for (std::size_t c = 0; c < s.n_cells(); ++c) os << ",c" << c;
    os << "\n";
    for (std::size_t i = 0; i < s.n_times; ++i) {
        os << fmt(s.time(i));
        for (double v : s.row(i)) os << "," << fmt(v);
        os << "\n";
    }
    return os.str();
}

// JSON lines: one {history, rhs, target, t_n, dt} object per sample.
inline std::string training_set_jsonl(const TrainingSet& set) {
    std::ostringstream os;
    auto vec = [](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto s = set[i];
        json j = {{"history", {vec(s.history[0]), vec(s.history[1]), vec(s.history[2])}},
                  {"rhs", {vec(s.rhs[0]), vec(s.rhs[1]), vec(s.rhs[2])}},
                  {"target", vec(s.target)},
                  {"t_n", s.t_n},
                  {"dt", s.dt}};
        os << j.dump() << "\n";
    }
    return os.str();
}

// Minimal CSV reader: header row plus numeric/text cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::invalid_argument("csv: no column " + name);
    }
    std::vector<double> numbers(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(std::stod(r.at(c)));
        return out;
    }
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

}  // namespace lmmnet
