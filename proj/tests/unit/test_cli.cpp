#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "nonlocalqm/experiments.hpp"

namespace fs = std::filesystem;
using namespace nonlocalqm::cli;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("nonlocalqm_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

struct ExeResult {
    int code;
    std::string out, err;
};

ExeResult run_exe(const std::string& args, const fs::path& dir) {
    const std::string cmd = std::string(NONLOCALQM_EXE) + " " + args + " >" + (dir / "stdout").string() + " 2>" +
                            (dir / "stderr").string();
    const int status = std::system(cmd.c_str());
    return {WEXITSTATUS(status), slurp(dir / "stdout"), slurp(dir / "stderr")};
}

std::string config(const std::string& name) { return std::string(NONLOCALQM_CONFIG_DIR) + "/" + name; }

std::string error_of(const std::string& sub, const std::string& yaml) {
    try {
        run_experiment(sub, Config::parse(yaml, "cfg.yaml"), std::nullopt);
    } catch (const ConfigError& e) {
        return e.what();
    }
    ADD_FAILURE() << "no config error";
    return {};
}

const char* small_spectrum = R"(model:
  l_P: 0.2
  beta: 5.0
grid:
  n_points: 64
  x_min: -8.0
  x_max: 8.0
potential:
  kind: harmonic
  omega: 1.0
variant:
  name: gaussian_simple
spectrum:
  n_levels: 3
)";

}  // namespace

TEST(Json, SortedKeysAndRoundTripPrecision) {
    Json j = Json::object();
    j["zeta"] = 0.1;
    j["alpha"] = 1.0 / 3.0;
    j["mid"] = Json::array({1, 2.5});
    const std::string text = to_json_text(j);
    EXPECT_LT(text.find("\"alpha\""), text.find("\"mid\""));
    EXPECT_LT(text.find("\"mid\""), text.find("\"zeta\""));
    EXPECT_NE(text.find("0.10000000000000001"), std::string::npos);
    EXPECT_NE(text.find("0.33333333333333331"), std::string::npos);
    EXPECT_EQ(format_double(std::nan("")), "null");
}

TEST(Csv, EmptyCellForNonFinite) {
    Csv c{{"a[L]", "b[E]"}, {{1.0, std::nan("")}}};
    EXPECT_EQ(c.text(), "a[L],b[E]\n1,\n");
}

TEST(Config, EmptyConfigNamesMissingBlock) {
    const std::string msg = error_of("spectrum", "");
    EXPECT_NE(msg.find("missing required block 'model'"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyIsRejectedWithLocation) {
    std::string yaml = small_spectrum;
    yaml.replace(yaml.find("  omega"), 0, "  omgea: 2.0\n");
    const std::string msg = error_of("spectrum", yaml);
    EXPECT_NE(msg.find("cfg.yaml:10:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("unknown key 'potential.omgea'"), std::string::npos) << msg;
}

TEST(Config, BadValueIsReportedAtItsLine) {
    std::string yaml = small_spectrum;
    yaml.replace(yaml.find("n_points: 64"), 12, "n_points: many");
    const std::string msg = error_of("spectrum", yaml);
    EXPECT_NE(msg.find("cfg.yaml:5:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("grid.n_points"), std::string::npos) << msg;
}

TEST(Config, LibraryArgumentErrorsBecomeConfigErrors) {
    std::string yaml = small_spectrum;
    yaml.replace(yaml.find("n_points: 64"), 12, "n_points: 100");
    EXPECT_NE(error_of("spectrum", yaml).find("cfg.yaml:5:"), std::string::npos);
}

TEST(Config, ModelNeedsExactlyOneScale) {
    std::string yaml = small_spectrum;
    yaml.replace(yaml.find("  beta"), 0, "  planck_momentum: 5.0\n");
    EXPECT_NE(error_of("spectrum", yaml).find("exactly one of 'l_P' or 'planck_momentum'"), std::string::npos);
}

TEST(Config, PlanckMomentumSetsLength) {
    std::string yaml = small_spectrum;
    yaml.replace(yaml.find("l_P: 0.2"), 8, "planck_momentum: 5.0");
    const Outputs o = run_experiment("spectrum", Config::parse(yaml, "cfg.yaml"), std::nullopt);
    EXPECT_DOUBLE_EQ(o.summary["model"]["l_P"].get<double>(), 0.2);
}

TEST(Config, YamlSyntaxErrorHasLocation) {
    const std::string msg = error_of("spectrum", "model:\n  l_P: [1, 2\n");
    EXPECT_NE(msg.find("cfg.yaml:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("YAML syntax error"), std::string::npos) << msg;
}

TEST(Summary, EchoesInputsAndTolerances) {
    std::string yaml = small_spectrum;
    yaml += "  uniform_shift_tolerance: 1.0e-6\n";
    const Outputs o = run_experiment("spectrum", Config::parse(yaml, "cfg.yaml"), std::nullopt);
    EXPECT_EQ(o.summary["inputs"]["grid"]["n_points"].get<double>(), 64.0);
    EXPECT_EQ(o.summary["inputs"]["variant"]["name"], "gaussian_simple");
    for (const auto& [name, c] : o.summary["checks"].items()) {
        EXPECT_TRUE(c.contains("tolerance")) << name;
        EXPECT_TRUE(c.contains("pass")) << name;
    }
    EXPECT_TRUE(o.summary["checks"].contains("uniform_shift"));
    EXPECT_EQ(o.tables.at("levels.csv").header.at(1), "E_standard[E]");
}

TEST(Sweep, KeepsDeclaredOrderWithWorkers) {
    std::string yaml = small_spectrum;
    yaml += "sweep:\n  subcommand: spectrum\n  parameter: model.l_P\n  values: [0.4, 0.1, 0.3, 0.2, 0.05]\n"
            "  outputs: [levels.0.shift]\n  workers: 3\n";
    const Outputs o = run_experiment("sweep", Config::parse(yaml, "cfg.yaml"), std::nullopt);
    const Csv& t = o.tables.at("sweep.csv");
    const std::vector<double> expect{0.4, 0.1, 0.3, 0.2, 0.05};
    ASSERT_EQ(t.rows.size(), expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
        EXPECT_DOUBLE_EQ(std::get<double>(t.rows[i][0]), expect[i]);
        // Shift grows like l^2, so it follows the declared order of l.
        EXPECT_NEAR(std::get<double>(t.rows[i][1]), expect[i] * expect[i] / 4.0, 1e-6);
    }
}

TEST(Sweep, UnknownOutputPathIsAConfigError) {
    std::string yaml = small_spectrum;
    yaml += "sweep:\n  subcommand: spectrum\n  parameter: model.l_P\n  values: [0.2]\n  outputs: [levels.9.shift]\n";
    EXPECT_NE(error_of("sweep", yaml).find("levels.9.shift"), std::string::npos);
}

TEST(Sweep, UnknownParameterIsAConfigError) {
    std::string yaml = small_spectrum;
    yaml += "sweep:\n  subcommand: spectrum\n  parameter: model.nope\n  values: [0.2]\n  outputs: [seed]\n";
    EXPECT_NE(error_of("sweep", yaml).find("model.nope"), std::string::npos);
}

TEST(Executable, EmptyConfigExitsTwoNamingTheBlock) {
    const fs::path d = scratch("empty");
    std::ofstream(d / "empty.yaml") << "";
    const ExeResult r = run_exe("evolve --config " + (d / "empty.yaml").string() + " --outdir " + d.string(), d);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("'model'"), std::string::npos) << r.err;
}

TEST(Executable, UnknownSubcommandExitsTwo) {
    const fs::path d = scratch("badsub");
    EXPECT_EQ(run_exe("frobnicate --config " + config("evolve.yaml"), d).code, 2);
}

TEST(Executable, NumericalFailureExitsThreeNamingTheOperation) {
    const fs::path d = scratch("numerical");
    std::string yaml = small_spectrum;
    yaml.replace(yaml.find("gaussian_simple"), 15, "erste");
    yaml.replace(yaml.find("spectrum:"), std::string::npos,
                 "evolve:\n  initial:\n    sigma: 1.0\n  dt: 0.01\n  n_steps: 10\n");
    std::ofstream(d / "cfg.yaml") << yaml;
    const ExeResult r = run_exe("evolve --config " + (d / "cfg.yaml").string() + " --outdir " + d.string(), d);
    EXPECT_EQ(r.code, 3) << r.err;
    EXPECT_NE(r.err.find("error in propagate"), std::string::npos) << r.err;
}

TEST(Executable, TimestampedLayout) {
    const fs::path d = scratch("layout");
    const ExeResult r = run_exe("deconvolve --config " + config("deconvolve.yaml") + " --outdir " + d.string(), d);
    ASSERT_EQ(r.code, 0) << r.err;
    std::size_t runs = 0;
    for (const auto& e : fs::directory_iterator(d / "deconvolve")) {
        ++runs;
        EXPECT_TRUE(std::regex_match(e.path().filename().string(), std::regex(R"(\d{8}T\d{6}Z)")));
        EXPECT_TRUE(fs::exists(e.path() / "summary.json"));
        EXPECT_TRUE(fs::exists(e.path() / "series.csv"));
    }
    EXPECT_EQ(runs, 1u);
}

TEST(Executable, SameConfigAndSeedGiveIdenticalJson) {
    const fs::path d = scratch("determinism");
    std::string yaml = slurp(config("bandlimit-audit.yaml"));
    yaml = std::regex_replace(yaml, std::regex("states: 1000"), "states: 50");
    std::ofstream(d / "cfg.yaml") << yaml;
    const std::string base = "bandlimit-audit --config " + (d / "cfg.yaml").string() + " --no-timestamp --outdir ";
    ASSERT_EQ(run_exe(base + (d / "a").string(), d).code, 0);
    ASSERT_EQ(run_exe(base + (d / "b").string(), d).code, 0);
    ASSERT_EQ(run_exe(base + (d / "c").string() + " --seed 7", d).code, 0);
    const std::string a = slurp(d / "a" / "bandlimit-audit" / "summary.json");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(d / "b" / "bandlimit-audit" / "summary.json"));
    EXPECT_EQ(slurp(d / "a" / "bandlimit-audit" / "uncertainty.csv"),
              slurp(d / "b" / "bandlimit-audit" / "uncertainty.csv"));
    EXPECT_NE(a, slurp(d / "c" / "bandlimit-audit" / "summary.json"));
}

// Every shipped config is valid and passes its own checks, except the stated
// sin-map commutator, which is known not to hold.
TEST(ShippedConfigs, RunAndPass) {
    const std::map<std::string, std::string> files{
        {"spectrum.yaml", "spectrum"},           {"spectrum-simple.yaml", "spectrum"},
        {"spectrum-erste.yaml", "spectrum"},     {"spectrum-cutoff-well.yaml", "spectrum"},
        {"spectrum-hybrid.yaml", "spectrum"},    {"evolve.yaml", "evolve"},
        {"bandlimit-audit.yaml", "bandlimit-audit"}, {"deconvolve.yaml", "deconvolve"},
        {"algebra-check.yaml", "algebra-check"}, {"orbit.yaml", "orbit"},
        {"orbit-theta.yaml", "orbit"},           {"orbit-earth.yaml", "orbit"},
        {"sweep.yaml", "sweep"},                 {"sweep-wall.yaml", "sweep"}};
    std::size_t seen = 0;
    for (const auto& e : fs::directory_iterator(NONLOCALQM_CONFIG_DIR))
        if (e.path().extension() == ".yaml") ++seen;
    EXPECT_EQ(seen, files.size());
    for (const auto& [file, sub] : files) {
        SCOPED_TRACE(file);
        const Outputs o = run_experiment(sub, Config::load(config(file)), std::nullopt);
        for (const auto& [name, c] : o.summary["checks"].items()) {
            if (name == "commutator_stated_sin") EXPECT_FALSE(c["pass"].get<bool>());
            else EXPECT_TRUE(c["pass"].get<bool>()) << name;
        }
    }
}
