#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "kinetax/config_io.hpp"
#include "kinetax/output.hpp"

using namespace kinetax;
using nlohmann::json;

namespace {

json toy_document() {
    return json::parse(R"({
        "schema_version": 1,
        "model": {"n": 3, "r_linear": {"base": 10, "step": 10}, "S": 0.1,
                  "tau_linear": {"first": 0.2, "last": 0.4},
                  "theta_ev": [1, 0.5], "sector_weights": [0.5, 0.5]},
        "initial": {"mu": 20},
        "enforcement": {"sigma": 0.1, "xi": 1.5},
        "output": {"directory": "out", "formats": ["csv"]}
    })");
}

std::string error_of(const json& doc) {
    try {
        parse_config(doc);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "kinetax_test_config_io";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST(Presets, PaperDefault) {
    const RunConfig cfg = preset_config("paper.default");
    ASSERT_EQ(cfg.model.n(), 9u);
    for (std::size_t j = 0; j < 9; ++j) {
        EXPECT_DOUBLE_EQ(cfg.model.r[j], 10.0 * (j + 1));
        EXPECT_NEAR(cfg.model.tau[j], 0.23 + 0.025 * j, 1e-15);
    }
    EXPECT_EQ(cfg.model.S, 0.1);
    EXPECT_EQ(cfg.model.theta_ev, (std::vector<double>{1.0, 0.5, 0.25}));
    EXPECT_EQ(cfg.mu, kTableMeanIncome);
    EXPECT_EQ(cfg.enforcement.sigma, 0.0);
    EXPECT_TRUE(cfg.warnings.empty());

    EXPECT_EQ(preset_config("scenario2").model.theta_ev, (std::vector<double>{1.0, 0.75, 0.625}));
    EXPECT_EQ(preset_config("paper.no-evasion").model.theta_ev, (std::vector<double>{1, 1, 1}));
    EXPECT_THROW(preset_config("scenario3"), ConfigError);
    for (const auto& name : preset_names()) EXPECT_EQ(load_config(name), preset_config(name));
}

TEST(ParseConfig, LinearShorthands) {
    const RunConfig cfg = parse_config(toy_document());
    EXPECT_EQ(cfg.model.r, (std::vector<double>{10, 20, 30}));
    EXPECT_NEAR(cfg.model.tau[1], 0.3, 1e-15);
    EXPECT_EQ(cfg.integrator, IntegratorSettings{});
    EXPECT_TRUE(cfg.output.wants("csv"));
    EXPECT_FALSE(cfg.output.wants("json"));
}

TEST(ParseConfig, ErrorsNameTheOffendingKey) {
    json doc = toy_document();
    doc["model"]["colour"] = 1;
    EXPECT_NE(error_of(doc).find("model.colour"), std::string::npos);

    doc = toy_document();
    doc.erase("schema_version");
    EXPECT_NE(error_of(doc).find("schema_version"), std::string::npos);

    doc = toy_document();
    doc["schema_version"] = 2;
    EXPECT_NE(error_of(doc).find("schema_version"), std::string::npos);

    doc = toy_document();
    doc["enforcement"].erase("xi");
    EXPECT_NE(error_of(doc).find("enforcement.xi"), std::string::npos);

    doc = toy_document();
    doc["model"]["r"] = {10, 20, 30};
    EXPECT_NE(error_of(doc).find("r_linear"), std::string::npos);

    doc = toy_document();
    doc["integrator"] = {{"record_every", 0}};
    EXPECT_NE(error_of(doc).find("integrator.record_every"), std::string::npos);

    doc = toy_document();
    doc["output"]["formats"] = {"xml"};
    EXPECT_NE(error_of(doc).find("xml"), std::string::npos);
}

TEST(ParseConfig, ModelConstraints) {
    json doc = toy_document();
    doc["enforcement"]["xi"] = 2.5;
    EXPECT_THROW(parse_config(doc), ConstraintError);

    doc = toy_document();
    doc["model"].erase("tau_linear");
    doc["model"]["tau"] = {0.2, 0.3, 0.6};
    EXPECT_THROW(parse_config(doc), ConstraintError);

    doc = toy_document();
    doc["model"].erase("r_linear");
    doc["model"]["r"] = {10, 20, 15};
    const std::string msg = error_of(doc);
    EXPECT_NE(msg.find("increasing"), std::string::npos) << msg;

    doc = toy_document();
    doc["model"]["sector_weights"] = {0.5, 0.6};
    EXPECT_THROW(parse_config(doc), ConfigError);

    doc = toy_document();
    doc["initial"]["mu"] = 35;
    EXPECT_THROW(parse_config(doc), ConfigError);

    doc = toy_document();
    doc["enforcement"]["sigma"] = 1.5;
    EXPECT_THROW(parse_config(doc), ConfigError);
}

TEST(ParseConfig, LargeExchangeIsAWarning) {
    json doc = toy_document();
    doc["model"]["S"] = 2.0;
    const RunConfig cfg = parse_config(doc);
    EXPECT_FALSE(cfg.warnings.empty());
    doc["model"]["S"] = 10.0;
    EXPECT_THROW(parse_config(doc), ConfigError);
}

TEST(ConfigFile, RoundTrip) {
    for (const RunConfig& cfg : {parse_config(toy_document()), preset_config("scenario2")}) {
        const auto path = scratch("round_trip.json").string();
        save_config(cfg, path);
        const RunConfig back = load_config(path);
        EXPECT_EQ(back, cfg);
        EXPECT_EQ(to_json(back).dump(), to_json(cfg).dump());
    }
    EXPECT_THROW(load_config(scratch("missing.json").string()), ConfigError);

    const auto bad = scratch("bad.json");
    std::ofstream(bad) << "{ not json";
    EXPECT_THROW(load_config(bad.string()), ConfigError);
}

TEST(Output, NineSignificantDigits) {
    EXPECT_EQ(fmt9(1.0 / 3), "0.333333333");
    EXPECT_EQ(fmt9(1.789e-3), "0.001789");
    EXPECT_EQ(fmt9(2.0), "2");
    EXPECT_EQ(round9(0.1234567891234), 0.123456789);
}

TEST(Output, SweepCsvRoundTrip) {
    SweepTable t;
    t.sigmas = {0.1, 0.2};
    t.xis = {1.5};
    t.rows = {{0.1, 1.5, 0.38, 1.1e-3, true, 3e-12}, {0.2, 1.5, 0.37, 1.2e-3, false, 4e-9}};
    std::ostringstream os;
    write_sweep_csv(os, t);
    EXPECT_EQ(os.str(), "sigma,xi,gini,tax_revenue,converged,residual\n"
                        "0.1,1.5,0.38,0.0011,true,3e-12\n"
                        "0.2,1.5,0.37,0.0012,false,4e-09\n");
    std::istringstream is(os.str());
    const SweepTable back = read_sweep_csv(is);
    ASSERT_EQ(back.rows.size(), 2u);
    EXPECT_EQ(back.sigmas, t.sigmas);
    EXPECT_EQ(back.rows[1].tax_revenue, 1.2e-3);
    EXPECT_FALSE(back.rows[1].converged);
    EXPECT_FALSE(back.fit_eligible());
}

TEST(Output, SweepCsvWithoutOptionalColumns) {
    std::istringstream is("xi,sigma,tax_revenue\n1.25,0.5,1e-3\n1.5,0.5,2e-3\n");
    const SweepTable t = read_sweep_csv(is);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[0].sigma, 0.5);
    EXPECT_EQ(t.rows[1].xi, 1.5);
    EXPECT_TRUE(t.fit_eligible());

    std::istringstream no_sigma("xi,gini\n1.5,0.3\n");
    EXPECT_THROW(read_sweep_csv(no_sigma), ConfigError);
    std::istringstream ragged("sigma,xi,gini\n0.1,1.5\n");
    EXPECT_THROW(read_sweep_csv(ragged), ConfigError);
    std::istringstream garbage("sigma,xi\n0.1,abc\n");
    EXPECT_THROW(read_sweep_csv(garbage), ConfigError);
}

TEST(Output, FitJson) {
    const FitCoefficients f{"tax_revenue", 9.5e-4, 1.0 / 3, -2e-6, 8.5e-4, 7e-7};
    const auto j = fit_json(f);
    EXPECT_EQ(j.dump(), R"({"metric":"tax_revenue","a0":0.00095,"a10":0.333333333,"a01":-2e-06,"a11":0.00085,)"
                        R"("fit_residual_max":7e-07})");
    const FitCoefficients back = parse_fit_json(json::parse(j.dump()));
    EXPECT_EQ(back.a11, 8.5e-4);
    EXPECT_EQ(back.a10, 0.333333333);
    EXPECT_THROW(parse_fit_json(json::parse(R"({"metric":"gini"})")), ConfigError);
}

TEST(Output, TrajectoryAndLorenzCsv) {
    Trajectory traj;
    traj.times = {0, 10};
    traj.states = {PopulationState(2, 1, {0.5, 0.5}), PopulationState(2, 1, {0.25, 0.75})};
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    EXPECT_EQ(os.str(), "t,x_1_1,x_2_1\n0,0.5,0.5\n10,0.25,0.75\n");

    std::ostringstream lc;
    write_lorenz_csv(lc, lorenz(traj.states[0], std::vector<double>{10, 30}));
    EXPECT_EQ(lc.str(), "population_share,income_share\n0,0\n0.5,0.25\n1,1\n");
}
