#pragma once

#include "config.hpp"

#include "vsense/identify.hpp"
#include "vsense/model.hpp"
#include "vsense/partition.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace vsense::cli {

// Every stage reads its inputs from and writes its outputs to `out`:
//   build     -> model/ (m.mtx, k.mtx, c.mtx when damped, labels.txt)
//   reduce    -> reduced/ archive, eigenvalue_error.csv
//   simulate  -> truth_{forces,displacements,accelerations}.csv,
//                measured_{displacement,acceleration}.csv
//   calibrate -> lcurve.csv, alpha.txt
//   identify  -> identify_{forces,displacements,timing}.csv
//   akf       -> akf_{forces,displacements,timing}.csv
//   metrics   -> <candidate>_metrics.csv
//   bench     -> bench.csv, bench_summary.csv
struct Context {
    Config config;
    std::filesystem::path out;
    std::ostream* log = nullptr;
};

void cmd_build(const Context& ctx);
void cmd_reduce(const Context& ctx);
void cmd_simulate(const Context& ctx);
void cmd_calibrate(const Context& ctx);
void cmd_identify(const Context& ctx);
void cmd_akf(const Context& ctx);
void cmd_metrics(const Context& ctx);
void cmd_bench(const Context& ctx);

// Loads m.mtx, k.mtx, optional c.mtx and optional labels.txt from `dir`.
FullModel load_model_dir(const std::filesystem::path& dir);

NewmarkParams newmark_params(const Config& cfg);
InputKind input_kind(const Config& cfg);

// Parses the command line, runs one subcommand and returns the process exit
// code: 0 on success, 1 on a library or configuration error, CLI11's code on
// a usage error. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vsense::cli
