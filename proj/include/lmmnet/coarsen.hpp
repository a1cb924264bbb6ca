#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "spatial.hpp"
#include "types.hpp"

namespace lmmnet {

inline std::vector<double> cell_average_coarsen(std::span<const double> fine, int factor) {
    if (factor <= 0 || fine.size() % static_cast<std::size_t>(factor) != 0)
        throw std::invalid_argument("cell_average_coarsen: factor must divide the fine cell count");
    const std::size_t f = static_cast<std::size_t>(factor);
    std::vector<double> out(fine.size() / f, 0.0);
    for (std::size_t j = 0; j < out.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < f; ++i) s += fine[j * f + i];
        out[j] = s / static_cast<double>(f);
    }
    return out;
}

inline FieldSeries coarsen_series(const FieldSeries& fine, int factor) {
    if (factor <= 0 || fine.grid.n_cells % factor != 0)
        throw std::invalid_argument("coarsen_series: factor must divide the fine cell count");
    Grid1D g = fine.grid;
    g.n_cells /= factor;
    FieldSeries out(g, fine.dt, fine.t0, fine.n_times);
    for (std::size_t i = 0; i < fine.n_times; ++i) {
        const auto c = cell_average_coarsen(fine.row(i), factor);
        std::copy(c.begin(), c.end(), out.row(i).begin());
    }
    return out;
}

// One training example; spans point into the owning TrainingSet.
struct TrainingSample {
    std::array<std::span<const double>, 3> history;  // v^{n-2}, v^{n-1}, v^n
    std::array<std::span<const double>, 3> rhs;      // F at the same levels
    std::span<const double> target;                  // v^{n+1}
    double t_n = 0.0;
    double dt = 0.0;

    std::span<const double> input_state() const { return history[2]; }
};

// Coarse trajectories plus their coarse-grid RHS, flattened per series.
class TrainingSet {
public:
    struct Track {
        FieldSeries series;
        std::vector<double> rhs;
        PdeSpec pde;
    };

    void add(FieldSeries coarse, const PdeSpec& pde) {
        if (coarse.n_times < 4) throw std::invalid_argument("build_training_set: series needs at least 4 levels");
        if (!tracks_.empty() && coarse.n_cells() != n_cells())
            throw std::invalid_argument("build_training_set: cell counts differ between series");
        Track tr{std::move(coarse), {}, pde};
        const SpatialOperator op(pde, tr.series.grid);
        const std::size_t n = tr.series.n_cells();
        tr.rhs.resize(tr.series.values.size());
        for (std::size_t i = 0; i < tr.series.n_times; ++i)
            op(tr.series.time(i), tr.series.row(i), std::span<double>(tr.rhs.data() + i * n, n));
        tracks_.push_back(std::move(tr));
        index_.clear();
        for (std::size_t s = 0; s < tracks_.size(); ++s)
            for (std::size_t t = 2; t + 1 < tracks_[s].series.n_times; ++t) index_.push_back({s, t});
    }

    std::size_t size() const { return index_.size(); }
    bool empty() const { return index_.empty(); }
    std::size_t n_cells() const { return tracks_.empty() ? 0 : tracks_.front().series.n_cells(); }
    const std::vector<Track>& tracks() const { return tracks_; }

    TrainingSample operator[](std::size_t i) const {
        const auto [s, n] = index_.at(i);
        const Track& tr = tracks_[s];
        const std::size_t m = tr.series.n_cells();
        auto rhs_row = [&](std::size_t lvl) { return std::span<const double>(tr.rhs.data() + lvl * m, m); };
        TrainingSample out;
        out.history = {tr.series.row(n - 2), tr.series.row(n - 1), tr.series.row(n)};
        out.rhs = {rhs_row(n - 2), rhs_row(n - 1), rhs_row(n)};
        out.target = tr.series.row(n + 1);
        out.t_n = tr.series.time(n);
        out.dt = tr.series.dt;
        return out;
    }

private:
    struct Ref {
        std::size_t series;
        std::size_t level;
    };
    std::vector<Track> tracks_;
    std::vector<Ref> index_;
};

// One sample per level n with n-2 >= 0 and n+1 available: n_times - 3 samples.
inline TrainingSet build_training_set(const FieldSeries& fine, int factor, const PdeSpec& pde) {
    TrainingSet set;
    set.add(factor == 1 ? fine : coarsen_series(fine, factor), pde);
    return set;
}

}  // namespace lmmnet
