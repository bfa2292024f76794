#include "support.hpp"

#include "commands.hpp"
#include "config.hpp"

#include "vsense/csv.hpp"
#include "vsense/format.hpp"
#include "vsense/metrics.hpp"
#include "vsense/regularize.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace vsense;
using vsense::testing::code_of;
using vsense::testing::fresh_dir;
namespace fs = std::filesystem;

namespace {

const char* kChainConfig = R"(
[model]
source = chain
n_masses = 3

[partition]
masters = 2:x, 0:x
measured = 2:x

[reduction]
n_modes = 1
damping_a = 0.05
damping_b = 1e-3

[integrator]
dt = 1e-3
input_kind = displacement

[regularization]
alpha = 0

[excitation]
type = chirp
profiles = f1x
scale = 1e-3
duration = 1

[noise]
fraction = 0.0
seed = 5
)";

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome vsense_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "case.ini";
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void run_ok(const std::string& cmd, const fs::path& cfg, const fs::path& work,
            const std::vector<std::string>& extra = {}) {
    std::vector<std::string> args = {cmd, "--config", cfg.string(), "--out", work.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const Outcome o = vsense_cli(args);
    ASSERT_EQ(o.code, 0) << cmd << ": " << o.err;
}

void pipeline(const fs::path& cfg, const fs::path& work, const std::vector<std::string>& extra = {}) {
    for (const char* cmd : {"build", "reduce", "simulate", "identify"}) run_ok(cmd, cfg, work, extra);
}

}  // namespace

TEST(Cli, ChainPipelineAtZeroAlphaReproducesForce) {
    const fs::path dir = fresh_dir("cli_pipeline");
    const fs::path cfg = write_config(dir, kChainConfig);
    const fs::path work = dir / "work";
    pipeline(cfg, work);
    const SignalSeries truth = csv::read_series(work / "truth_forces.csv", SignalKind::Force);
    const SignalSeries got = csv::read_series(work / "identify_forces.csv", SignalKind::Force);
    ASSERT_EQ(got.n_samples(), 1000);
    EXPECT_EQ(got.channels, truth.channels);
    const Vector a = truth.channel("2:x"), b = got.channel("2:x");
    EXPECT_LT(fde(as_span(a), as_span(b), truth.dt).value, 1e-6);

    run_ok("metrics", cfg, work);
    const std::string report = slurp(work / "identify_metrics.csv");
    EXPECT_EQ(report.rfind("case_id,channel,metric,value\n", 0), 0u);
    EXPECT_NE(report.find("identify,2:x,force_fde,"), std::string::npos);
}

TEST(Cli, MismatchedSampleIntervalFails) {
    const fs::path dir = fresh_dir("cli_dt");
    const fs::path cfg = write_config(dir, kChainConfig);
    const fs::path work = dir / "work";
    pipeline(cfg, work);
    const Outcome o = vsense_cli({"identify", "--config", cfg.string(), "--out", work.string(), "--set",
                                  "integrator.dt=2e-3"});
    EXPECT_NE(o.code, 0);
    EXPECT_NE(o.err.find("SampleRateMismatch"), std::string::npos) << o.err;
}

TEST(Cli, SimulateIsDeterministicForFixedSeed) {
    const fs::path dir = fresh_dir("cli_determinism");
    const fs::path cfg = write_config(dir, kChainConfig);
    for (const char* w : {"a", "b"}) {
        run_ok("build", cfg, dir / w);
        run_ok("reduce", cfg, dir / w);
        run_ok("simulate", cfg, dir / w, {"--seed", "42", "--set", "noise.fraction=0.02"});
    }
    for (const char* f : {"truth_forces.csv", "truth_displacements.csv", "measured_displacement.csv",
                          "measured_acceleration.csv"}) {
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
    run_ok("simulate", cfg, dir / "b", {"--seed", "43", "--set", "noise.fraction=0.02"});
    EXPECT_NE(slurp(dir / "a" / "measured_displacement.csv"), slurp(dir / "b" / "measured_displacement.csv"));
}

TEST(Cli, StagesRerunFromArtifactsGiveIdenticalOutputs) {
    const fs::path dir = fresh_dir("cli_isolation");
    const fs::path cfg = write_config(dir, kChainConfig);
    const fs::path first = dir / "first";
    pipeline(cfg, first);

    // A fresh directory holding only the earlier stages' artifacts.
    const fs::path second = dir / "second";
    fs::create_directories(second);
    fs::copy(first / "model", second / "model", fs::copy_options::recursive);
    run_ok("reduce", cfg, second);
    EXPECT_EQ(slurp(first / "reduced" / "k_hat.mtx"), slurp(second / "reduced" / "k_hat.mtx"));
    fs::copy_file(first / "measured_displacement.csv", second / "measured_displacement.csv");
    run_ok("identify", cfg, second);
    for (const char* f : {"identify_forces.csv", "identify_displacements.csv"}) {
        EXPECT_EQ(slurp(first / f), slurp(second / f)) << f;
    }
    run_ok("identify", cfg, first);
    EXPECT_EQ(slurp(first / "identify_forces.csv"), slurp(second / "identify_forces.csv"));
}

TEST(Cli, AkfOutputsShareSchemaAndScore) {
    const fs::path dir = fresh_dir("cli_akf");
    const fs::path cfg = write_config(dir, kChainConfig);
    const fs::path work = dir / "work";
    pipeline(cfg, work);
    run_ok("akf", cfg, work, {"--set", "akf.measurement_noise=1e-10"});
    for (const char* kind : {"forces", "displacements", "timing"}) {
        std::ifstream a(work / ("identify_" + std::string(kind) + ".csv")), b(work / ("akf_" + std::string(kind) + ".csv"));
        std::string ha, hb;
        std::getline(a, ha);
        std::getline(b, hb);
        EXPECT_EQ(ha, hb) << kind;
    }
    run_ok("metrics", cfg, work, {"--candidate", "akf"});
    EXPECT_NE(slurp(work / "akf_metrics.csv").find("akf,2:x,force_fde,"), std::string::npos);
}

TEST(Cli, StreamingEmitsOneRowPerMeasurement) {
    const fs::path dir = fresh_dir("cli_stream");
    const fs::path cfg = write_config(dir, kChainConfig);
    const fs::path work = dir / "work";
    pipeline(cfg, work);
    // Hand-written three-row input with a different column order.
    const fs::path input = dir / "short.csv";
    std::ofstream(input) << "t,extra,2:x\n0.001,9,0\n0.002,9,1e-6\n0.003,9,2e-6\n";
    run_ok("identify", cfg, work, {"--input", input.string()});
    const SignalSeries f = csv::read_series(work / "identify_forces.csv", SignalKind::Force);
    EXPECT_EQ(f.n_samples(), 3);
    EXPECT_EQ(f.t0, 0.001);
    EXPECT_EQ(f.samples(0, 0), 0.0);
    std::ofstream(input) << "t,1:x\n0.001,0\n";
    const Outcome o = vsense_cli({"identify", "--config", cfg.string(), "--out", work.string(), "--input", input.string()});
    EXPECT_NE(o.code, 0);
    EXPECT_NE(o.err.find("UnknownLabel"), std::string::npos);
}

TEST(Cli, FullFieldExpansionMatchesMasters) {
    const fs::path dir = fresh_dir("cli_field");
    const fs::path cfg = write_config(dir, kChainConfig);
    const fs::path work = dir / "work";
    pipeline(cfg, work, {"--set", "identify.full_field=true"});
    const SignalSeries field = csv::read_series(work / "identify_field.csv", SignalKind::Displacement);
    const SignalSeries disp = csv::read_series(work / "identify_displacements.csv", SignalKind::Displacement);
    EXPECT_EQ(field.channels, (std::vector<std::string>{"0:x", "1:x", "2:x"}));
    EXPECT_EQ(field.channel("2:x"), disp.channel("2:x"));
    EXPECT_EQ(field.channel("0:x"), disp.channel("0:x"));
}

TEST(Cli, CalibrateWritesGridAndChosenAlpha) {
    const fs::path dir = fresh_dir("cli_calibrate");
    const fs::path cfg = write_config(dir, kChainConfig);
    const fs::path work = dir / "work";
    pipeline(cfg, work);
    run_ok("calibrate", cfg, work, {"--set", "regularization.grid_count=12"});
    std::ifstream lc(work / "lcurve.csv");
    std::string line;
    std::vector<double> alphas;
    std::getline(lc, line);
    while (std::getline(lc, line)) alphas.push_back(parse_double(csv::split_record(line)[0]));
    ASSERT_EQ(alphas.size(), 12u);
    std::ifstream a(work / "alpha.txt");
    std::getline(a, line);
    EXPECT_NE(std::find(alphas.begin(), alphas.end(), parse_double(line)), alphas.end());
    run_ok("identify", cfg, work, {"--set", "regularization.alpha=lcurve"});
}

TEST(Cli, BenchCasesAreOrderedAndThreadIndependent) {
    const fs::path dir = fresh_dir("cli_bench");
    const fs::path cfg = write_config(dir, kChainConfig);
    const fs::path work = dir / "work";
    pipeline(cfg, work);
    const auto fde_column = [&](const std::string& threads) {
        run_ok("bench", cfg, work,
               {"--set", "bench.cases=5", "--set", "bench.threads=" + threads, "--set", "noise.fraction=1e-4"});
        std::ifstream in(work / "bench_summary.csv");
        std::string line;
        std::getline(in, line);
        EXPECT_EQ(line, "case,seed,steps,total_s,mean_s,p99_s,max_s,force_fde");
        std::vector<std::string> out;
        int i = 0;
        while (std::getline(in, line)) {
            const auto f = csv::split_record(line);
            EXPECT_EQ(f[0], std::to_string(i));
            EXPECT_EQ(f[1], std::to_string(5 + i));
            EXPECT_EQ(f[2], "1000");
            out.push_back(f[7]);
            ++i;
        }
        EXPECT_EQ(i, 5);
        return out;
    };
    EXPECT_EQ(fde_column("1"), fde_column("3"));
}

TEST(Cli, ConfigErrorsNameTheKey) {
    const fs::path dir = fresh_dir("cli_config");
    const fs::path cfg = write_config(dir, kChainConfig);
    const fs::path work = dir / "work";
    auto o = vsense_cli({"build", "--config", cfg.string(), "--out", work.string(), "--set", "model.colour=red"});
    EXPECT_NE(o.code, 0);
    EXPECT_NE(o.err.find("model.colour"), std::string::npos);
    o = vsense_cli({"build", "--config", cfg.string(), "--out", work.string(), "--set", "model.n_masses=three"});
    EXPECT_NE(o.code, 0);
    EXPECT_NE(o.err.find("model.n_masses"), std::string::npos);
    o = vsense_cli({"build", "--config", cfg.string(), "--out", work.string(), "--set", "model.source=plate"});
    EXPECT_NE(o.code, 0);
    EXPECT_NE(o.err.find("model.source"), std::string::npos);
    run_ok("build", cfg, work);
    o = vsense_cli({"reduce", "--config", cfg.string(), "--out", work.string(), "--set", "partition.measured=1:x"});
    EXPECT_NE(o.code, 0);
    EXPECT_NE(o.err.find("partition.measured"), std::string::npos);
    o = vsense_cli({"identify", "--out", work.string()});
    EXPECT_NE(o.code, 0);
    o = vsense_cli({"nonsense"});
    EXPECT_NE(o.code, 0);
    o = vsense_cli({"build", "--config", (dir / "missing.ini").string()});
    EXPECT_NE(o.code, 0);
}

TEST(Cli, MatrixSourceCarriesDamping) {
    const fs::path dir = fresh_dir("cli_matrices");
    ChainSpec spec;
    spec.n_masses = 4;
    const FullModel model = rayleigh_damping(build_spring_chain(spec), 0.1, 0.01);
    export_matrices(model, dir / "src");
    const FullModel back = cli::load_model_dir(dir / "src");
    EXPECT_EQ(back.c.dense(), model.c.dense());
    EXPECT_EQ(back.labels, model.labels);
    const fs::path cfg = write_config(dir, "[model]\nsource = matrices\nmatrices = " + (dir / "src").string() + "\n");
    run_ok("build", cfg, dir / "work");
    EXPECT_EQ(slurp(dir / "src" / "c.mtx"), slurp(dir / "work" / "model" / "c.mtx"));
}

TEST(Config, ParsingAndOverrides) {
    cli::Config c = cli::Config::from_string("[a]\nx = 1.5\nlist = p, q ,r\nflag = yes\n");
    EXPECT_EQ(c.get_double("a.x"), 1.5);
    EXPECT_EQ(c.get_list("a.list"), (std::vector<std::string>{"p", "q", "r"}));
    EXPECT_TRUE(c.get_bool("a.flag", false));
    EXPECT_EQ(c.get_int("a.missing", 7), 7);
    c.set("a.x = 2");
    EXPECT_EQ(c.get_int("a.x"), 2);
    EXPECT_EQ(code_of([&] { c.get_double("a.nothere"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([&] { c.set("novalue"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([&] { c.set("nosection=1"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([&] { c.get_int("a.list"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([] { cli::Config::from_string("[a\nx=1"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([&] { c.check_known_keys(); }), Errc::ConfigError);
    EXPECT_NO_THROW(cli::Config::from_string(kChainConfig).check_known_keys());
}
