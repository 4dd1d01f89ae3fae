#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

using nlohmann::json;

namespace {

struct CliRun {
    int code = -1;
    std::string out, err;
    json report() const { return json::parse(out); }
};

std::filesystem::path scratch() {
    auto d = std::filesystem::temp_directory_path() / "fractrace_cli_test";
    std::filesystem::create_directories(d);
    return d;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// The inherited FRACTRACE_SEED is cleared; `env` sets variables for this run ("FRACTRACE_SEED=42").
CliRun cli(const std::string& args, const std::string& env = "") {
    const auto errf = scratch() / "stderr.txt";
    const std::string cmd = "env -u FRACTRACE_SEED " + env + " " + std::string(FRACTRACE_CLI_PATH) + " " + args +
                            " 2>" + errf.string();
    CliRun r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
    const int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.err = slurp(errf);
    return r;
}

std::filesystem::path write_config(const std::string& name, const std::string& text) {
    const auto p = scratch() / name;
    std::ofstream(p) << text;
    return p;
}

} // namespace

TEST(CliConstant, CAlpha2FixtureByThreeRoutes) {
    const auto r = cli("constant --formula C_alpha2 --n 1 --alphas 1,1");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = r.report();
    EXPECT_NEAR(j["value"].get<double>(), 0.5, 1e-12);
    EXPECT_NEAR(j["routes"]["plancherel"].get<double>(), 0.5, 1e-10);
    EXPECT_NEAR(j["routes"]["kernel_quadrature"].get<double>(), 0.5, 1e-8);
}

TEST(CliConstant, CpAtTwoIsOne) {
    const auto r = cli("constant --formula C_p --n 2 --p 2");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.report()["value"].get<double>(), 1.0);
}

TEST(CliConstant, CBetaBothVariantsWithChainWinner) {
    const auto r = cli("constant --formula C_beta --n 1 --m 2 --alphas 0.9,0.9 --variant both");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = r.report();
    EXPECT_EQ(j["winner"], "statement");
    const double s = j["statement"]["value"], d = j["derivation"]["value"], chain = j["chain"]["value"];
    EXPECT_NEAR(s, chain, 1e-12 * chain);
    // The two displays differ by π^{(m-1)n/2}.
    EXPECT_NEAR(s / d, std::sqrt(std::numbers::pi), 1e-12);
    EXPECT_EQ(j["value"].get<double>(), s);
    EXPECT_EQ(j["statement"]["variant"], "statement");
    EXPECT_EQ(j["derivation"]["variant"], "derivation");
}

TEST(CliConstant, SphereConstantAdjudicatedByConstantFunction) {
    const auto r = cli("constant --formula F_alpha_S --n 1 --alphas 0.75,0.75 --variant both");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = r.report();
    EXPECT_EQ(j["winner"], "derivation");
    EXPECT_NEAR(j["constant_function_ratio"]["derivation"].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(j["constant_function_ratio"]["statement"].get<double>(), std::tgamma(0.5) / std::tgamma(0.25), 1e-12);
}

TEST(CliConstant, RejectsEstimatesUnknownIdsAndStrayVariants) {
    EXPECT_EQ(cli("constant --formula D_alpha_q --n 1").code, 2);
    EXPECT_EQ(cli("constant --formula E_T --n 1").code, 2);
    EXPECT_EQ(cli("constant --formula C_gamma --n 1").code, 2);
    const auto r = cli("constant --formula C_p --n 1 --p 2 --variant both");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("has no variants"), std::string::npos);
}

TEST(CliConstant, RegimeViolationIsDiagnosed) {
    const auto r = cli("constant --formula F_alpha --n 1 --alphas 0.3,0.3");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("regime error"), std::string::npos);
    EXPECT_TRUE(r.out.empty());
}

TEST(CliVerify, Theorem2ExampleAggregatePass) {
    const auto r = cli("verify --theorem 2 --n 1 --m 2 --alphas 0.8,0.8 --grid 128 --L 8 --family gaussian_mixture "
                       "--count 20 --seed 7");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = r.report();
    EXPECT_TRUE(j["aggregate"]["all_pass"].get<bool>());
    ASSERT_EQ(j["reports"].size(), 20u);
    double top = 0.0, low = 1e300;
    for (std::size_t i = 0; i < 20; ++i) {
        const auto& rep = j["reports"][i];
        EXPECT_EQ(rep["seed"].get<std::uint64_t>(), 7 + i);
        EXPECT_EQ(rep["theorem_id"], "theorem2");
        EXPECT_TRUE(rep["runtime_ms"].is_null());
        top = std::max(top, rep["ratio"].get<double>());
        low = std::min(low, rep["margin"].get<double>());
    }
    EXPECT_EQ(j["aggregate"]["max_ratio"].get<double>(), top);
    EXPECT_EQ(j["aggregate"]["min_margin"].get<double>(), low);
    EXPECT_EQ(j["grid"]["N"], 128);
}

TEST(CliVerify, Sphere6PassesWithVariantNote) {
    const auto r = cli("verify --theorem sphere6 --n 1 --m 2 --q 4");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = r.report();
    EXPECT_TRUE(j["aggregate"]["all_pass"].get<bool>());
    const auto& adj = j["variant_adjudication"];
    EXPECT_EQ(adj["winner"], "derivation");
    EXPECT_NEAR(adj["constant_function_ratio"]["derivation"].get<double>(), 1.0, 1e-6);
    EXPECT_NEAR(adj["constant_function_ratio"]["statement"].get<double>(), std::tgamma(0.5) / std::tgamma(0.25), 1e-6);
    EXPECT_NE(adj["note"].get<std::string>().find("adjudication"), std::string::npos);
    // q = 4 on two circles: α_k = (2 - 1/2)/2.
    EXPECT_EQ(j["params"]["alphas"], json::array({0.75, 0.75}));
}

TEST(CliVerify, SphereSubcommandIsAnAlias) {
    const auto a = cli("sphere --theorem sphere6 --n 1 --m 2 --q 4 --count 3");
    const auto b = cli("verify --theorem sphere6 --n 1 --m 2 --q 4 --count 3");
    ASSERT_EQ(a.code, 0) << a.err;
    auto ja = a.report(), jb = b.report();
    ja.erase("command");
    jb.erase("command");
    EXPECT_EQ(ja, jb);
    EXPECT_EQ(cli("sphere --theorem 2").code, 2);
}

TEST(CliVerify, BetaZeroRejected) {
    const auto r = cli("verify --theorem 1 --beta 0");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("β must be strictly positive"), std::string::npos) << r.err;
}

TEST(CliVerify, GridBudgetEnforcedBeforeWork) {
    const auto r = cli("verify --theorem 1 --n 2 --m 2 --grid 128");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("exceeds the budget 2^24"), std::string::npos) << r.err;
    EXPECT_EQ(cli("verify --theorem 2 --grid 100").code, 2);
}

TEST(CliVerify, NonSmoothingFamilyIsAViolation) {
    const auto r = cli("verify --theorem 7 --operator identity --count 2 --grid 64");
    EXPECT_EQ(r.code, 1) << r.err;
    EXPECT_FALSE(r.report()["aggregate"]["all_pass"].get<bool>());
}

TEST(CliVerify, ToleranceOverrideIsRecorded) {
    const auto r = cli("verify --theorem 4 --count 3 --tol 0.05");
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto& rep : r.report()["reports"]) EXPECT_EQ(rep["tol"].get<double>(), 0.05);
    EXPECT_EQ(cli("verify --theorem 4 --count 3 --tol -1").code, 2);
}

TEST(CliVerify, UnknownTheoremAndFamily) {
    EXPECT_EQ(cli("verify --theorem 9").code, 2);
    EXPECT_EQ(cli("verify --theorem 2 --family sinc").code, 2);
    EXPECT_EQ(cli("verify").code, 2);
}

TEST(CliConfig, FileValuesAndFlagPrecedence) {
    const auto cfg = write_config("v.cfg", "# Theorem 2 run\n[verify]\ntheorem = \"2\"\nalphas = 0.8,0.8\ngrid = 64\n"
                                           "L = 8\ncount = 4\nseed = 7\n");
    const auto a = cli("verify --config " + cfg.string());
    ASSERT_EQ(a.code, 0) << a.err;
    auto j = a.report();
    EXPECT_EQ(j["grid"]["N"], 64);
    EXPECT_EQ(j["family"]["base_seed"], 7);
    EXPECT_EQ(j["params"]["alphas"], json::array({0.8, 0.8}));

    const auto b = cli("verify --config " + cfg.string() + " --grid 128 --alphas 0.75,0.75");
    ASSERT_EQ(b.code, 0) << b.err;
    j = b.report();
    EXPECT_EQ(j["grid"]["N"], 128);
    EXPECT_EQ(j["grid"]["L"], 8.0);
    EXPECT_EQ(j["params"]["alphas"], json::array({0.75, 0.75}));

    // Same run, config given before the subcommand.
    EXPECT_EQ(cli("--config " + cfg.string() + " verify").out, a.out);
}

TEST(CliConfig, UnknownKeysAndMissingFilesRejected) {
    const auto bad = write_config("bad.cfg", "[verify]\ntheorem = 2\nbogus = 3\n");
    const auto r = cli("verify --config " + bad.string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("bogus"), std::string::npos) << r.err;
    const auto wrong = write_config("wrong.cfg", "[verify]\ntheorem = 2\nsamples = 10\n");
    EXPECT_EQ(cli("verify --config " + wrong.string()).code, 2);
    EXPECT_EQ(cli("verify --theorem 2 --config /nonexistent/x.cfg").code, 2);
}

TEST(CliConfig, SeedFromEnvironment) {
    auto seed_of = [](const CliRun& r) { return r.report()["family"]["base_seed"].get<std::uint64_t>(); };
    EXPECT_EQ(seed_of(cli("verify --theorem 2 --count 2")), 1u);
    EXPECT_EQ(seed_of(cli("verify --theorem 2 --count 2", "FRACTRACE_SEED=42")), 42u);
    EXPECT_EQ(seed_of(cli("verify --theorem 2 --count 2 --seed 5", "FRACTRACE_SEED=42")), 5u);
    const auto cfg = write_config("s.cfg", "[verify]\nseed = 9\n");
    EXPECT_EQ(seed_of(cli("verify --theorem 2 --count 2 --config " + cfg.string(), "FRACTRACE_SEED=42")), 9u);
}

TEST(CliSw, SameSeedIsByteIdentical) {
    const auto a = cli("sw --mode riesz --samples 50000 --seed 11 --jobs 1");
    const auto b = cli("sw --mode riesz --samples 50000 --seed 11 --jobs 3");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, cli("sw --mode riesz --samples 50000 --seed 12").out);
}

TEST(CliSw, RieszAgainstClosedForm) {
    const auto r = cli("sw --mode riesz --n 1 --sigma 0.7,0.7 --beta 0.2 --samples 200000 --seed 4");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = r.report();
    const auto c = cli("constant --formula A_sigma --n 1 --sigma 0.7,0.7 --beta 0.2").report();
    EXPECT_EQ(j["comparison"]["reference"].get<double>(), c["value"].get<double>());
    EXPECT_TRUE(j["comparison"]["within_3_stderr"].get<bool>());
    const double z = (j["estimate"]["mean"].get<double>() - c["value"].get<double>()) / j["estimate"]["stderr"].get<double>();
    EXPECT_DOUBLE_EQ(j["comparison"]["z"].get<double>(), z);
    EXPECT_EQ(j["estimate"]["n_samples"], 200000);
    EXPECT_EQ(j["estimate"]["seed"], 4);
}

TEST(CliSw, RegimeDiagnostic) {
    const auto r = cli("sw --mode riesz --n 1 --sigma 0.7,0.7 --beta 0.3");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("2σ + β - mn = n violated"), std::string::npos) << r.err;
}

TEST(CliSw, DivergenceExitsThree) {
    const auto r = cli("sw --mode factor --alpha 0.9 --rho 0.95 --x 0.5");
    ASSERT_EQ(r.code, 0) << r.err; // |0.45 - 0.95| < 1 - 0.45
    const auto d = cli("sw --mode factor --alpha 0.9 --rho 2.5 --x 0.5");
    EXPECT_EQ(d.code, 3);
    EXPECT_NE(d.err.find("must be < n - alpha_k/2"), std::string::npos) << d.err;
    EXPECT_EQ(cli("sw --mode B --x 0 --eta1 1 --eta2 1 --samples 1000").code, 3);
}

TEST(CliSw, IteratedBMatchesQuadrature) {
    const auto r = cli("sw --mode B --samples 100000 --x 0.5");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.report()["comparison"]["within_3_stderr"].get<bool>());
}

TEST(CliSharpness, Theorem6ConstantFunction) {
    const auto r = cli("sharpness --theorem 6");
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto& row : r.report()["table"]) EXPECT_NEAR(row["ratio"].get<double>(), 1.0, 1e-6);
}

TEST(CliSharpness, Theorem1IsTrendOnly) {
    const auto r = cli("sharpness --theorem 1");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = r.report();
    EXPECT_EQ(j["flag"], "no extremals exist");
    EXPECT_TRUE(j["trend_only"].get<bool>());
    EXPECT_FALSE(j.contains("threshold"));
}

TEST(CliSharpness, Theorem2TableAndVerdict) {
    // Small boxes: the trend holds but the ratio is far from the threshold.
    const auto r = cli("sharpness --theorem 2 --grids 32,64 --L 8 --scales 0.5,1");
    EXPECT_EQ(r.code, 1);
    const auto j = r.report();
    EXPECT_TRUE(j["monotone"].get<bool>());
    EXPECT_FALSE(j["meets_threshold"].get<bool>());
    EXPECT_EQ(j["verdict"], "fail");
    ASSERT_EQ(j["table"].size(), 2u);
    EXPECT_EQ(j["table"][0]["N"], 32);
    const auto lowered = cli("sharpness --theorem 2 --grids 32,64 --L 8 --scales 0.5,1 --threshold 0.01");
    EXPECT_EQ(lowered.code, 0);
}

TEST(CliSharpness, NoProbeRejected) { EXPECT_EQ(cli("sharpness --theorem 4").code, 2); }

TEST(CliOutput, OutFileAndCsv) {
    const auto out = scratch() / "rep.json", csv = scratch() / "rep.csv";
    std::filesystem::remove(out);
    std::filesystem::remove(csv);
    const auto r = cli("verify --theorem 2 --count 3 --out " + out.string() + " --csv " + csv.string());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    const auto j = json::parse(slurp(out));
    EXPECT_EQ(j["reports"].size(), 3u);
    std::istringstream rows(slurp(csv));
    std::string line;
    std::getline(rows, line);
    EXPECT_EQ(line, "lhs,margin,pass,ratio,rhs,seed");
    int n = 0;
    while (std::getline(rows, line)) ++n;
    EXPECT_EQ(n, 3);
}

TEST(CliOutput, TimingOnlyWhenAsked) {
    EXPECT_FALSE(cli("constant --formula C_p --n 1 --p 2").report().contains("runtime_ms"));
    const auto j = cli("verify --theorem 2 --count 2 --timing").report();
    EXPECT_TRUE(j["runtime_ms"].is_number());
    EXPECT_TRUE(j["reports"][0]["runtime_ms"].is_number());
}

TEST(CliOutput, HelpExitsZero) {
    const auto r = cli("--help");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("sharpness"), std::string::npos);
}
