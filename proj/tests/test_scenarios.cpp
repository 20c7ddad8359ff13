// test_scenarios.cpp — configuration, seeding, cell cache and sweep tables

#include "mqc/scenarios.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace mqc;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("mqc_test_" + name);
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

std::filesystem::path write_ini(const std::filesystem::path& dir, const std::string& body) {
    const auto path = dir / "cfg.ini";
    std::ofstream(path) << body;
    return path;
}

ExperimentConfig tiny_classical(const std::filesystem::path& out, std::vector<double> phis) {
    ExperimentConfig c = default_config(Profile::Smoke);
    c.scenario = "tiny";
    c.phis = std::move(phis);
    c.protocol.total_cycles = 20;
    c.protocol.discard_cycles = 2;
    c.protocol.n_realizations = 3;
    c.out_dir = out.string();
    return c;
}

}  // namespace

TEST(Parse, PiExpressions) {
    EXPECT_DOUBLE_EQ(parse_number("pi"), pi);
    EXPECT_DOUBLE_EQ(parse_number(" 3*pi/4 "), 3 * pi / 4);
    EXPECT_DOUBLE_EQ(parse_number("-pi/2"), -pi / 2);
    EXPECT_DOUBLE_EQ(parse_number("2pi"), 2 * pi);
    EXPECT_DOUBLE_EQ(parse_number("0.25"), 0.25);
    EXPECT_THROW(parse_number("pi/0"), std::invalid_argument);
    EXPECT_THROW(parse_number("0.3x"), std::invalid_argument);
    const auto l = parse_list("0, pi/2, pi");
    ASSERT_EQ(l.size(), 3u);
    EXPECT_DOUBLE_EQ(l[1], pi / 2);
}

TEST(Config, ProfilesAndBasisRule) {
    const auto smoke = default_config(Profile::Smoke);
    const auto paper = default_config(Profile::Paper);
    EXPECT_EQ(smoke.protocol.total_cycles, 100);
    EXPECT_EQ(smoke.protocol.n_realizations, 5);
    EXPECT_EQ(paper.protocol.total_cycles, 500);
    EXPECT_EQ(paper.protocol.n_realizations, 20);
    EXPECT_EQ(smoke.basis_for(0.3), 65);
    EXPECT_EQ(paper.basis_for(0.3), 67);
    EXPECT_EQ(paper.basis_for(1.0), 35);
    EXPECT_EQ(parse_profile("paper"), Profile::Paper);
    EXPECT_THROW(parse_profile("huge"), std::invalid_argument);
}

TEST(Config, LoadsIniOverProfile) {
    const auto dir = temp_dir("cfg");
    const auto path = write_ini(dir,
                                "[experiment]\nscenario = demo\nseed = 77\n"
                                "[params]\ngamma = 0.05\nbasis_size = 40\n"
                                "[sweep]\nphi = 0, pi/2, pi\nbeta = 0.3, 0.5\n"
                                "[protocol]\ntotal_cycles = 40\nresync_distance = 0.2\n");
    const auto c = load_config(path.string(), Profile::Smoke);
    EXPECT_EQ(c.scenario, "demo");
    EXPECT_EQ(c.master_seed, 77u);
    EXPECT_DOUBLE_EQ(c.params.gamma, 0.05);
    EXPECT_EQ(c.basis_for(0.3), 40);
    EXPECT_EQ(c.phis.size(), 3u);
    EXPECT_EQ(c.betas.size(), 2u);
    EXPECT_EQ(c.protocol.total_cycles, 40);
    EXPECT_EQ(c.protocol.n_realizations, 5);  // smoke default kept
    EXPECT_DOUBLE_EQ(c.protocol.resync_distance, 0.2);
}

TEST(Config, RejectsInvalidInput) {
    const auto dir = temp_dir("bad");
    EXPECT_THROW(load_config(write_ini(dir, "[params]\ndt = -0.01\n").string(), Profile::Smoke), std::invalid_argument);
    EXPECT_THROW(load_config(write_ini(dir, "[params]\ngamma = -1\n").string(), Profile::Smoke), std::invalid_argument);
    EXPECT_THROW(load_config(write_ini(dir, "[params]\ngama = 0.1\n").string(), Profile::Smoke), std::invalid_argument);
    EXPECT_THROW(load_config(write_ini(dir, "[extras]\nx = 1\n").string(), Profile::Smoke), std::invalid_argument);
    EXPECT_THROW(load_config(write_ini(dir, "[params]\nu_abs = 1.5\n").string(), Profile::Smoke), std::invalid_argument);
}

TEST(Seeding, DependsOnValuesNotPositions) {
    ExperimentConfig a = default_config();
    a.phis = {0.0, pi};
    ExperimentConfig b = a;
    b.phis = {pi};
    EXPECT_EQ(cell_seed(a, "quantum", pi, 0.3), cell_seed(b, "quantum", pi, 0.3));
    EXPECT_NE(cell_seed(a, "quantum", pi, 0.3), cell_seed(a, "classical", pi, 0.3));
    b.master_seed = 2;
    EXPECT_NE(cell_seed(a, "quantum", pi, 0.3), cell_seed(b, "quantum", pi, 0.3));
}

TEST(Sweep, HalfSweepsConcatenateToFullSweep) {
    const auto full = run_sweep(tiny_classical(temp_dir("full"), {0.0, pi / 2, pi}),
                                {{ProcessKind::Classical, 0.0, 0.3}, {ProcessKind::Classical, pi / 2, 0.3}, {ProcessKind::Classical, pi, 0.3}});
    const auto h1 = run_sweep(tiny_classical(temp_dir("h1"), {0.0}), {{ProcessKind::Classical, 0.0, 0.3}});
    const auto h2 = run_sweep(tiny_classical(temp_dir("h2"), {pi / 2, pi}), {{ProcessKind::Classical, pi / 2, 0.3}, {ProcessKind::Classical, pi, 0.3}});
    EXPECT_EQ(full[0].lambda_mean, h1[0].lambda_mean);
    EXPECT_EQ(full[1].lambda_mean, h2[0].lambda_mean);
    EXPECT_EQ(full[2].lambda_mean, h2[1].lambda_mean);
}

TEST(Cache, ReusesCellsAndInvalidatesOnChange) {
    const auto dir = temp_dir("cache");
    auto c = tiny_classical(dir, {pi});
    const auto first = run_sweep(c, {{ProcessKind::Classical, pi, 0.3}});
    const auto file = cell_path(c, "classical", pi, 0.3, 0);
    ASSERT_TRUE(std::filesystem::exists(file));
    EXPECT_TRUE(load_cell(file, cell_fingerprint(c, "classical", pi, 0.3)).has_value());
    const auto second = run_sweep(c, {{ProcessKind::Classical, pi, 0.3}});
    EXPECT_EQ(first[0].lambda_mean, second[0].lambda_mean);
    c.protocol.d0 = 2e-3;
    EXPECT_FALSE(load_cell(file, cell_fingerprint(c, "classical", pi, 0.3)).has_value());
}

TEST(Tables, SweepCsvHeaderAndCorrelation) {
    const auto dir = temp_dir("csv");
    std::vector<SweepRow> rows(4);
    for (int k = 0; k < 4; ++k) {
        rows[k].process = "quantum";
        rows[k].phi = k;
        rows[k].lambda_mean = k;
        rows[k].delta_mean = 3.0 - k;
    }
    EXPECT_NEAR(lambda_delta_correlation(rows), -1.0, 1e-12);
    write_sweep_csv(dir / "t.csv", rows);
    std::ifstream in(dir / "t.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "phi,beta,lambda_mean,sem,n,delta_mean,delta_sem,delta_n,process,basis_size,n_excluded,status,diagnostic");
}

TEST(CatModel, PerpendicularFreezesParallelCollapses) {
    CatOptions o;
    o.model_paths = 200;
    double drift = 1.0;
    const auto perp = cat_model_visibility(o, pi / 2, 1e-3, 3, &drift);
    EXPECT_LT(drift, 1e-9);
    EXPECT_NEAR(perp.mean.back(), 1.0, 1e-9);
    const auto par = cat_model_visibility(o, 0.0, 1e-3, 3);
    EXPECT_LT(par.mean.back(), 0.5);
}

TEST(Grid, NegativityGridCoversBasis) {
    const auto g = negativity_grid(35, 128);
    EXPECT_NEAR(g.q_max, std::sqrt(70.0) + 3.0, 1e-12);
    EXPECT_EQ(g.n_q, 128);
}
