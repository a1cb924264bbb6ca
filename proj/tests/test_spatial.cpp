#include <numeric>

#include <gtest/gtest.h>

#include "lmmnet/coarsen.hpp"
#include "lmmnet/spatial.hpp"

using namespace lmmnet;
constexpr double pi = std::numbers::pi;

namespace {
std::vector<double> sample(const Grid1D& g, auto f) {
    std::vector<double> v(g.n_cells);
    for (int j = 0; j < g.n_cells; ++j) v[j] = f(g.center(j));
    return v;
}
double max_err(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}
}  // namespace

TEST(HeatRhs, LaplacianOfSine) {
    const Grid1D g{64, 1.0};
    const auto v = sample(g, [](double x) { return std::sin(2 * pi * x); });
    std::vector<double> out(64);
    heat_rhs(v, 1.0, g, out);
    const auto exact = sample(g, [](double x) { return -4 * pi * pi * std::sin(2 * pi * x); });
    EXPECT_LT(max_err(out, exact), 4 * pi * pi * (2 * pi * g.dx()) * (2 * pi * g.dx()) / 12 * 1.01);
    EXPECT_NEAR(std::accumulate(out.begin(), out.end(), 0.0), 0.0, 1e-10);
}

TEST(HeatRhs, SecondOrder) {
    double prev = 0;
    for (int n : {32, 64, 128, 256}) {
        const Grid1D g{n, 1.0};
        std::vector<double> out(n);
        heat_rhs(sample(g, [](double x) { return std::sin(2 * pi * x); }), 1.0, g, out);
        const double e = max_err(out, sample(g, [](double x) { return -4 * pi * pi * std::sin(2 * pi * x); }));
        if (prev > 0) {
            EXPECT_NEAR(std::log2(prev / e), 2.0, 0.02);
        }
        prev = e;
    }
}

TEST(WaveRhs, CentralDifferenceIdentity) {
    const Grid1D g{16, 1.0};
    const double c = 0.7;
    std::vector<double> out(16);
    wave_rhs(sample(g, [](double x) { return std::sin(4 * pi * x); }), c, g, out);
    const auto exact =
        sample(g, [&](double x) { return -(c / g.dx()) * std::sin(4 * pi * g.dx()) * std::cos(4 * pi * x); });
    EXPECT_LT(max_err(out, exact), 1e-12);
}

TEST(WaveRhs, SecondOrder) {
    double prev = 0;
    for (int n : {64, 128, 256, 512}) {
        const Grid1D g{n, 1.0};
        std::vector<double> out(n);
        wave_rhs(sample(g, [](double x) { return std::sin(4 * pi * x); }), 1.0, g, out);
        const double e = max_err(out, sample(g, [](double x) { return -4 * pi * std::cos(4 * pi * x); }));
        if (prev > 0) {
            EXPECT_NEAR(std::log2(prev / e), 2.0, 0.05);
        }
        prev = e;
    }
}

TEST(BurgersRhs, ConservativeWithoutForcing) {
    const Grid1D g{64, 2 * pi};
    const auto v = sample(g, [](double x) { return std::sin(x) + 0.3 * std::cos(3 * x); });
    std::vector<double> out(64);
    const SpatialOperator op(PdeSpec::burgers(0.01, std::nullopt), g);
    op(0.0, v, out);
    EXPECT_NEAR(std::accumulate(out.begin(), out.end(), 0.0), 0.0, 1e-12);
}

TEST(BurgersRhs, ForcingTableMatchesDirectSum) {
    const Grid1D g{32, 2 * pi};
    const auto f = ForcingSpec::sample(4);
    const std::vector<double> zero(32, 0.0);
    std::vector<double> out(32);
    burgers_rhs(zero, 0.01, g, f, 1.7, out);
    for (int j = 0; j < 32; ++j) EXPECT_NEAR(out[j], forcing_eval(f, g.center(j), 1.7), 1e-13);
}

TEST(BurgersRhs, ConstantStateOnlyFeelsForcing) {
    const Grid1D g{16, 2 * pi};
    const std::vector<double> v(16, 0.8);
    std::vector<double> out(16);
    burgers_rhs(v, 0.05, g, ForcingSpec{{}, 2 * pi}, 0.0, out);
    for (double x : out) EXPECT_NEAR(x, 0.0, 1e-14);
}

TEST(Spatial, LengthMismatchThrows) {
    std::vector<double> v(5), out(5);
    EXPECT_THROW(heat_rhs(v, 1.0, Grid1D{6, 1.0}, out), std::invalid_argument);
}

TEST(Exact, HeatDecay) {
    const auto pde = PdeSpec::heat(0.1);
    EXPECT_NEAR(exact_solution(pde, 0.25, 1.0), 0.01929630291101678, 1e-15);
    EXPECT_THROW(exact_solution(PdeSpec::burgers(0.01, std::nullopt), 0.0, 0.0), std::invalid_argument);
}

TEST(Exact, CellAveragesMatchQuadrature) {
    const Grid1D g{16, 1.0};
    const auto pde = PdeSpec::wave(0.6);
    const auto avg = exact_cell_averages(pde, g, 0.3);
    for (int j = 0; j < 16; ++j) {
        // 64-point midpoint rule over the cell
        double q = 0;
        for (int m = 0; m < 64; ++m) q += exact_solution(pde, j * g.dx() + (m + 0.5) * g.dx() / 64, 0.3);
        EXPECT_NEAR(avg[j], q / 64, 1e-4);
    }
    EXPECT_EQ(initial_state(pde, g), exact_cell_averages(pde, g, 0.0));
    EXPECT_NE(initial_state_pointwise(pde, g), initial_state(pde, g));
}

TEST(Coarsen, Examples) {
    EXPECT_EQ(cell_average_coarsen(std::vector<double>{0, 1, 2, 3}, 2), (std::vector<double>{0.5, 2.5}));
    const std::vector<double> c(12, 0.7);
    EXPECT_EQ(cell_average_coarsen(c, 4), std::vector<double>(3, 0.7));
    const std::vector<double> f{1, 2, 3};
    EXPECT_EQ(cell_average_coarsen(f, 1), f);
    EXPECT_THROW(cell_average_coarsen(std::vector<double>(10), 4), std::invalid_argument);
}

TEST(Coarsen, PreservesMeanAndLinearAverages) {
    const Grid1D fine{64, 1.0}, coarse{16, 1.0};
    const auto v = sample(fine, [](double x) { return std::sin(2 * pi * x) + x * x; });
    const auto cv = cell_average_coarsen(v, 4);
    EXPECT_NEAR(std::accumulate(v.begin(), v.end(), 0.0) / 64, std::accumulate(cv.begin(), cv.end(), 0.0) / 16,
                1e-14);
    const auto lin = cell_average_coarsen(sample(fine, [](double x) { return 3 * x - 1; }), 4);
    for (int j = 0; j < 16; ++j) EXPECT_NEAR(lin[j], 3 * coarse.center(j) - 1, 1e-14);
}

TEST(TrainingSetTest, SamplesAndRhs) {
    const Grid1D fine{64, 1.0};
    const auto pde = PdeSpec::heat(0.5);
    FieldSeries s(fine, 1e-3, 0.0, 10);
    for (std::size_t i = 0; i < 10; ++i) {
        const auto v = exact_cell_averages(pde, fine, s.time(i));
        std::copy(v.begin(), v.end(), s.row(i).begin());
    }
    const auto set = build_training_set(s, 4, pde);
    EXPECT_EQ(set.size(), 7u);
    EXPECT_EQ(set.n_cells(), 16u);
    const auto smp = set[0];
    EXPECT_EQ(smp.history[0].size(), 16u);
    EXPECT_DOUBLE_EQ(smp.t_n, 2e-3);
    const auto coarse_now = cell_average_coarsen(s.row(2), 4);
    for (int j = 0; j < 16; ++j) EXPECT_EQ(smp.input_state()[j], coarse_now[j]);
    std::vector<double> f(16);
    heat_rhs(coarse_now, 0.5, Grid1D{16, 1.0}, f);
    for (int j = 0; j < 16; ++j) EXPECT_EQ(smp.rhs[2][j], f[j]);
    FieldSeries tiny(fine, 1e-3, 0.0, 3);
    EXPECT_THROW(build_training_set(tiny, 4, pde), std::invalid_argument);
}
