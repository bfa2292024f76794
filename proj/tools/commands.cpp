#include "commands.hpp"

#include "vsense/akf.hpp"
#include "vsense/csv.hpp"
#include "vsense/error.hpp"
#include "vsense/format.hpp"
#include "vsense/matrix_market.hpp"
#include "vsense/metrics.hpp"
#include "vsense/regularize.hpp"
#include "vsense/rom.hpp"
#include "vsense/signals.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

namespace vsense::cli {

namespace fs = std::filesystem;

namespace {

std::ostream& log_of(const Context& ctx) { return ctx.log ? *ctx.log : std::cout; }

fs::path model_dir(const Context& ctx) { return ctx.out / "model"; }
fs::path reduced_dir(const Context& ctx) { return ctx.out / "reduced"; }

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw Error(Errc::IoError, "cannot write " + path.string());
    f.precision(17);
    return f;
}

SignalKind signal_kind_of(InputKind k) {
    return k == InputKind::Displacement ? SignalKind::Displacement : SignalKind::Acceleration;
}

fs::path measured_path(const Context& ctx, InputKind k) {
    return ctx.out / ("measured_" + std::string(input_kind_name(k)) + ".csv");
}

fs::path truth_path(const Context& ctx, InputKind k) {
    return ctx.out / (k == InputKind::Displacement ? "truth_displacements.csv" : "truth_accelerations.csv");
}

// Reduced model from the reduce stage, reordered for the configured sensors.
struct LoadedModel {
    ReducedModel reduced;
    PartitionedModel partitioned;
};

LoadedModel load_partitioned(const Context& ctx) {
    LoadedModel lm;
    lm.reduced = load_reduced(reduced_dir(ctx));
    lm.partitioned = reorder(lm.reduced, ctx.config.get_list("partition.measured"));
    return lm;
}

double resolve_alpha(const Context& ctx) {
    const std::string text = ctx.config.get_string("regularization.alpha", std::string("lcurve"));
    if (text == "lcurve") {
        const fs::path path = ctx.out / "alpha.txt";
        std::ifstream f(path);
        std::string line;
        if (!f || !std::getline(f, line)) {
            throw Error(Errc::IoError, path.string() + " not found; run calibrate or set regularization.alpha");
        }
        return parse_double(trim(line));
    }
    const double alpha = ctx.config.get_double("regularization.alpha");
    if (!(alpha >= 0.0)) throw Error(Errc::ConfigError, "regularization.alpha: must be >= 0 or 'lcurve'");
    return alpha;
}

std::uint64_t seed_of(const Config& cfg) { return cfg.get_seed("noise.seed", 1); }

// Streams measurement rows through `step` and writes the per-sample outputs
// as each row is processed. The sample interval is checked against `dt`
// before the row that starts the interval is consumed.
std::vector<double> stream_run(const Context& ctx, const fs::path& input, const PartitionedModel& pm, double dt,
                               const std::string& prefix, const std::function<StepResult(const Vector&)>& step,
                               const ReducedModel* field_model) {
    std::ifstream in(input);
    if (!in) throw Error(Errc::IoError, "cannot read " + input.string());
    csv::RowReader reader(in);

    const auto measured = pm.measured_labels();
    std::vector<Index> columns;
    for (const auto& label : measured) {
        const auto& ch = reader.channels();
        const auto it = std::find(ch.begin(), ch.end(), label);
        if (it == ch.end()) {
            throw Error(Errc::UnknownLabel, input.string() + " has no channel '" + label + "'");
        }
        columns.push_back(static_cast<Index>(it - ch.begin()));
    }

    std::ofstream force_file = open_out(ctx.out / (prefix + "_forces.csv"));
    std::ofstream disp_file = open_out(ctx.out / (prefix + "_displacements.csv"));
    std::ofstream timing_file = open_out(ctx.out / (prefix + "_timing.csv"));
    csv::RowWriter forces(force_file, measured, true);
    csv::RowWriter displacements(disp_file, pm.labels(), true);
    timing_file << "step,seconds\n";
    std::ofstream field_file;
    std::optional<csv::RowWriter> field;
    if (field_model) {
        field_file = open_out(ctx.out / (prefix + "_field.csv"));
        field.emplace(field_file, field_model->full_labels, true);
    }

    const auto check_interval = [&](double t_from, double t_to) {
        if (std::abs((t_to - t_from) - dt) > 1e-6 * dt) {
            throw Error(Errc::SampleRateMismatch, "measurement interval " + format_double(t_to - t_from) +
                                                      " s at t = " + format_double(t_from) +
                                                      " does not match integrator dt " + format_double(dt));
        }
    };

    std::vector<double> seconds;
    double t = 0.0, t_next = 0.0;
    Vector row, row_next, meas(static_cast<Index>(columns.size()));
    bool have = reader.next(t, row);
    bool have_next = have && reader.next(t_next, row_next);
    if (have_next) check_interval(t, t_next);
    while (have) {
        for (std::size_t j = 0; j < columns.size(); ++j) meas(static_cast<Index>(j)) = row(columns[j]);
        const StepResult r = step(meas);
        forces.write(t, r.force);
        displacements.write(t, r.displacement);
        if (field) field->write(t, field_model->expand(pm.to_source(r.displacement)));
        timing_file << seconds.size() << ',' << format_double(r.elapsed) << '\n';
        seconds.push_back(r.elapsed);
        if (!have_next) break;
        t = t_next;
        row = row_next;
        have_next = reader.next(t_next, row_next);
        if (have_next) check_interval(t, t_next);
    }
    return seconds;
}

void log_timing(const Context& ctx, const std::string& name, const std::vector<double>& seconds) {
    const TimingStats s = timing_stats(seconds);
    log_of(ctx) << name << ": " << s.count << " steps, mean " << format_double(s.mean) << " s, p99 "
                << format_double(s.p99) << " s, max " << format_double(s.max) << " s\n";
}

// Reads the step,seconds file written by stream_run.
std::vector<double> read_timing(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<double> out;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = csv::split_record(line);
        if (fields.size() != 2) throw Error(Errc::ParseError, path.string() + ": malformed timing row");
        out.push_back(parse_double(fields[1]));
    }
    return out;
}

std::vector<std::string> common_labels(const SignalSeries& a, const SignalSeries& b) {
    std::vector<std::string> out;
    for (const auto& label : a.channels) {
        if (std::find(b.channels.begin(), b.channels.end(), label) != b.channels.end()) out.push_back(label);
    }
    return out;
}

}  // namespace

FullModel load_model_dir(const fs::path& dir) {
    const fs::path labels = dir / "labels.txt";
    FullModel model = import_matrices(dir / "m.mtx", dir / "k.mtx",
                                      fs::exists(labels) ? std::optional<fs::path>(labels) : std::nullopt);
    const fs::path c_path = dir / "c.mtx";
    if (fs::exists(c_path)) {
        const Matrix c = mm::read(c_path).matrix;
        if (c.rows() != model.m.size() || c.cols() != model.m.size()) {
            throw Error(Errc::DimensionMismatch, c_path.string() + " does not match M");
        }
        if (asymmetry(c) > 1e-9) throw Error(Errc::AsymmetricInput, c_path.string() + " is not symmetric");
        model.c = SymMatrix(c);
    }
    model.validate();
    return model;
}

NewmarkParams newmark_params(const Config& cfg) {
    NewmarkParams p;
    p.beta = cfg.get_double("integrator.beta", p.beta);
    p.delta = cfg.get_double("integrator.delta", p.delta);
    p.dt = cfg.get_double("integrator.dt", p.dt);
    try {
        p.validate();
    } catch (const Error& e) {
        throw Error(Errc::ConfigError, std::string("integrator: ") + e.what());
    }
    return p;
}

InputKind input_kind(const Config& cfg) {
    const std::string text = cfg.get_string("integrator.input_kind", std::string("displacement"));
    try {
        return parse_input_kind(text);
    } catch (const Error&) {
        throw Error(Errc::ConfigError, "integrator.input_kind: expected displacement or acceleration, got '" +
                                           text + "'");
    }
}

void cmd_build(const Context& ctx) {
    const Config& cfg = ctx.config;
    const std::string source = cfg.get_string("model.source", std::string("beam"));
    FullModel model;
    if (source == "beam") {
        BeamSpec spec;
        spec.length = cfg.get_double("beam.length", spec.length);
        spec.width = cfg.get_double("beam.width", spec.width);
        spec.thickness = cfg.get_double("beam.thickness", spec.thickness);
        spec.youngs_modulus = cfg.get_double("beam.youngs_modulus", spec.youngs_modulus);
        spec.density = cfg.get_double("beam.density", spec.density);
        spec.n_elements = cfg.get_int("beam.n_elements", spec.n_elements);
        model = build_cantilever_beam(spec);
    } else if (source == "chain") {
        ChainSpec spec;
        spec.n_masses = cfg.get_int("model.n_masses", spec.n_masses);
        spec.mass = cfg.get_double("model.mass", spec.mass);
        spec.stiffness = cfg.get_double("model.stiffness", spec.stiffness);
        spec.fixed_right = cfg.get_bool("model.fixed_right", spec.fixed_right);
        model = build_spring_chain(spec);
    } else if (source == "matrices") {
        model = load_model_dir(cfg.get_string("model.matrices"));
    } else {
        throw Error(Errc::ConfigError, "model.source: expected beam, chain or matrices, got '" + source + "'");
    }
    export_matrices(model, model_dir(ctx));
    log_of(ctx) << "build: " << model.size() << " DOFs -> " << model_dir(ctx).string() << "\n";
}

void cmd_reduce(const Context& ctx) {
    const Config& cfg = ctx.config;
    const FullModel model = load_model_dir(model_dir(ctx));
    const auto masters = cfg.get_list("partition.masters");
    for (const auto& label : cfg.get_list("partition.measured")) {
        if (std::find(masters.begin(), masters.end(), label) == masters.end()) {
            throw Error(Errc::ConfigError, "partition.measured: '" + label + "' is not listed in partition.masters");
        }
    }
    const Partition p = Partition::from_labels(model, masters);
    const ReducedModel red = reduce(model, p, cfg.get_int("reduction.n_modes", 20),
                                    cfg.get_double("reduction.damping_a", 0.0),
                                    cfg.get_double("reduction.damping_b", 0.0));
    save_reduced(red, reduced_dir(ctx));

    const Index count = std::min<Index>(cfg.get_int("reduction.check_modes", 10), red.size());
    const auto err = eigenvalue_error(model, red, count);
    std::ofstream f = open_out(ctx.out / "eigenvalue_error.csv");
    f << "mode,error_pct\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < err.size(); ++i) {
        f << i + 1 << ',' << format_double(err[i]) << '\n';
        worst = std::max(worst, std::abs(err[i]));
    }
    log_of(ctx) << "reduce: " << model.size() << " -> " << red.size() << " coordinates (" << red.n_master
                << " masters, " << red.n_modes << " modes), max eigenvalue error " << format_double(worst)
                << " % over " << count << " modes\n";
}

void cmd_simulate(const Context& ctx) {
    const Config& cfg = ctx.config;
    const LoadedModel lm = load_partitioned(ctx);
    const PartitionedModel& pm = lm.partitioned;
    const NewmarkParams params = newmark_params(cfg);
    const int substeps = cfg.get_int("excitation.substeps", 1);
    if (substeps < 1) throw Error(Errc::ConfigError, "excitation.substeps: must be >= 1");
    const double duration = cfg.get_double("excitation.duration", 0.1);
    const Index n = static_cast<Index>(std::llround(duration / params.dt));
    if (n < 1) throw Error(Errc::ConfigError, "excitation.duration: shorter than one sample");
    NewmarkParams fine = params;
    fine.dt = params.dt / substeps;
    const Index n_fine = n * substeps;
    const Index nm = pm.n_measured();
    const auto measured = pm.measured_labels();
    const double scale = cfg.get_double("excitation.scale", 1.0);
    const std::uint64_t seed = seed_of(cfg);

    // Load history on the fine grid; row k is applied at (k + 1) * fine.dt.
    Matrix load = Matrix::Zero(n_fine, nm);
    const std::string type = cfg.get_string("excitation.type", std::string("chirp"));
    if (type == "chirp") {
        const auto names = cfg.get_list("excitation.profiles");
        if (static_cast<Index>(names.size()) != nm) {
            throw Error(Errc::ConfigError, "excitation.profiles: expected one profile per measured DOF (" +
                                               std::to_string(nm) + ")");
        }
        std::vector<ForceProfile> profiles;
        for (const auto& name : names) profiles.push_back(parse_force_profile(name));
        load = scale * chirp_tone_force(profiles, measured, fine.dt, fine.dt, n_fine).samples;
    } else if (type == "bandlimited") {
        const double f_lo = cfg.get_double("excitation.f_lo", 5.0);
        const double f_hi = cfg.get_double("excitation.f_hi", 0.2 / params.dt);
        for (Index j = 0; j < nm; ++j) {
            const SignalSeries s = bandlimited_random_force(f_lo, f_hi, scale, static_cast<double>(n_fine) * fine.dt,
                                                            fine.dt, seed + 7919 * static_cast<std::uint64_t>(j + 1));
            load.col(j) = s.samples.col(0).head(n_fine);
        }
    } else if (type != "zero") {
        throw Error(Errc::ConfigError, "excitation.type: expected chirp, bandlimited or zero, got '" + type + "'");
    }

    const ForwardIntegrator integrator(pm, fine);
    State s = State::zero(pm.size());
    Matrix forces(n, nm), u(n, pm.size()), a(n, pm.size());
    Vector f = Vector::Zero(pm.size());
    for (Index k = 0; k < n_fine; ++k) {
        f.head(nm) = load.row(k).transpose();
        s = integrator.step(s, f);
        if ((k + 1) % substeps == 0) {
            const Index i = (k + 1) / substeps - 1;
            forces.row(i) = load.row(k);
            u.row(i) = s.u.transpose();
            a.row(i) = s.a.transpose();
        }
    }

    const double t0 = params.dt;
    csv::write_series(ctx.out / "truth_forces.csv", SignalSeries(params.dt, t0, measured, forces, SignalKind::Force));
    const SignalSeries u_series(params.dt, t0, pm.labels(), u, SignalKind::Displacement);
    const SignalSeries a_series(params.dt, t0, pm.labels(), a, SignalKind::Acceleration);
    csv::write_series(ctx.out / "truth_displacements.csv", u_series);
    csv::write_series(ctx.out / "truth_accelerations.csv", a_series);

    const double fraction = cfg.get_double("noise.fraction", 0.0);
    if (fraction < 0.0) throw Error(Errc::ConfigError, "noise.fraction: must be >= 0");
    const auto noisy = [&](const SignalSeries& clean, std::uint64_t stream) {
        const SignalSeries sel = clean.select(measured);
        return fraction > 0.0 ? add_noise(sel, fraction, seed + stream) : sel;
    };
    csv::write_series(measured_path(ctx, InputKind::Displacement), noisy(u_series, 0));
    csv::write_series(measured_path(ctx, InputKind::Acceleration), noisy(a_series, 1));
    log_of(ctx) << "simulate: " << n << " samples at dt " << format_double(params.dt) << " (" << substeps
                << " substeps), noise fraction " << format_double(fraction) << "\n";
}

void cmd_calibrate(const Context& ctx) {
    const Config& cfg = ctx.config;
    const LoadedModel lm = load_partitioned(ctx);
    const NewmarkParams params = newmark_params(cfg);
    const InputKind kind = input_kind(cfg);
    SignalSeries meas = csv::read_series(measured_path(ctx, kind), signal_kind_of(kind), params.dt);
    const int window = cfg.get_int("regularization.calibration_samples", 0);
    if (window < 0) throw Error(Errc::ConfigError, "regularization.calibration_samples: must be >= 0");
    if (window > 0 && window < meas.n_samples()) {
        meas = SignalSeries(meas.dt, meas.t0, meas.channels, meas.samples.topRows(window), meas.kind);
    }
    const Matrix map = make_identify_setup(lm.partitioned, params, 0.0, kind)->measured_map;
    const auto grid = default_alpha_grid(map, cfg.get_int("regularization.grid_count", 50),
                                         cfg.get_double("regularization.grid_lo", 1e-12),
                                         cfg.get_double("regularization.grid_hi", 1e2));
    const LCurveResult r = lcurve_select(lm.partitioned, params, kind, meas, grid);
    write_lcurve_csv(ctx.out / "lcurve.csv", r);
    std::ofstream f = open_out(ctx.out / "alpha.txt");
    f << format_double(r.alpha) << '\n';
    if (!r.warning.empty()) log_of(ctx) << "warning: " << r.warning << "\n";
    log_of(ctx) << "calibrate: alpha = " << format_double(r.alpha) << " (grid index " << r.index << " of "
                << grid.size() << (r.degenerate ? ", degenerate curve" : "") << ")\n";
}

void cmd_identify(const Context& ctx) {
    const Config& cfg = ctx.config;
    const LoadedModel lm = load_partitioned(ctx);
    const NewmarkParams params = newmark_params(cfg);
    const InputKind kind = input_kind(cfg);
    const double alpha = resolve_alpha(ctx);
    IdentifySession session(make_identify_setup(lm.partitioned, params, alpha, kind));
    const fs::path input = cfg.get_string("identify.input", measured_path(ctx, kind).string());
    const bool field = cfg.get_bool("identify.full_field", false);
    const auto seconds = stream_run(
        ctx, input, lm.partitioned, params.dt, "identify", [&](const Vector& y) { return session.step(y); },
        field ? &lm.reduced : nullptr);
    log_timing(ctx, "identify", seconds);
}

void cmd_akf(const Context& ctx) {
    const Config& cfg = ctx.config;
    const LoadedModel lm = load_partitioned(ctx);
    AkfConfig ac;
    ac.dt = newmark_params(cfg).dt;
    ac.process_noise_state = cfg.get_double("akf.process_noise_state", ac.process_noise_state);
    ac.process_noise_force = cfg.get_double("akf.process_noise_force", ac.process_noise_force);
    ac.measurement_noise = cfg.get_double("akf.measurement_noise", ac.measurement_noise);
    ac.initial_covariance = cfg.get_double("akf.initial_covariance", ac.initial_covariance);
    ac.initial_state_covariance = cfg.get_double("akf.initial_state_covariance", ac.initial_state_covariance);
    try {
        ac.validate();
    } catch (const Error& e) {
        throw Error(Errc::ConfigError, std::string("akf: ") + e.what());
    }
    AugmentedKalmanFilter filter = akf_setup(lm.partitioned, ac);
    const fs::path input = cfg.get_string("akf.input", measured_path(ctx, InputKind::Acceleration).string());
    const auto seconds = stream_run(
        ctx, input, lm.partitioned, ac.dt, "akf", [&](const Vector& y) { return filter.step(y); }, nullptr);
    log_timing(ctx, "akf", seconds);
}

void cmd_metrics(const Context& ctx) {
    const Config& cfg = ctx.config;
    const std::string candidate = cfg.get_string("metrics.candidate", std::string("identify"));
    const std::string case_id = cfg.get_string("metrics.case_id", candidate);
    const double f0 = cfg.get_double("metrics.f0", 0.0);
    const std::optional<double> fmax =
        cfg.has("metrics.fmax") ? std::optional<double>(cfg.get_double("metrics.fmax")) : std::nullopt;
    std::vector<MetricRow> rows;

    const auto compare = [&](const std::string& truth_file, const std::string& cand_file, SignalKind kind,
                             const std::string& prefix) {
        const SignalSeries ref = csv::read_series(ctx.out / truth_file, kind);
        const SignalSeries cand = csv::read_series(ctx.out / cand_file, kind, ref.dt);
        if (ref.n_samples() != cand.n_samples()) {
            throw Error(Errc::GridMismatch, cand_file + " has " + std::to_string(cand.n_samples()) +
                                                " samples, " + truth_file + " has " +
                                                std::to_string(ref.n_samples()));
        }
        for (const auto& label : common_labels(ref, cand)) {
            const Vector r = ref.channel(label), c = cand.channel(label);
            const double nyquist = 0.5 / ref.dt;
            const double e = fde(as_span(r), as_span(c), ref.dt, f0, fmax.value_or(nyquist)).value;
            rows.push_back({case_id, label, prefix + "_fde", e});
            const double scale = r.cwiseAbs().maxCoeff();
            if (scale > 0.0) rows.push_back({case_id, label, prefix + "_max_rel_err", (r - c).cwiseAbs().maxCoeff() / scale});
        }
    };
    compare("truth_forces.csv", candidate + "_forces.csv", SignalKind::Force, "force");
    compare("truth_displacements.csv", candidate + "_displacements.csv", SignalKind::Displacement, "displacement");

    for (InputKind k : {InputKind::Displacement, InputKind::Acceleration}) {
        if (!fs::exists(measured_path(ctx, k)) || !fs::exists(truth_path(ctx, k))) continue;
        const SignalSeries noisy = csv::read_series(measured_path(ctx, k), signal_kind_of(k));
        const SignalSeries clean = csv::read_series(truth_path(ctx, k), signal_kind_of(k)).select(noisy.channels);
        const auto snr = snr_db(noisy, clean);
        for (std::size_t j = 0; j < snr.size(); ++j) {
            rows.push_back({case_id, noisy.channels[j], "snr_" + std::string(input_kind_name(k)) + "_db", snr[j]});
        }
    }

    const fs::path timing = ctx.out / (candidate + "_timing.csv");
    if (fs::exists(timing)) {
        const auto seconds = read_timing(timing);
        const TimingStats s = timing_stats(seconds);
        rows.push_back({case_id, "step", "time_total_s", s.total});
        rows.push_back({case_id, "step", "time_mean_s", s.mean});
        rows.push_back({case_id, "step", "time_p99_s", s.p99});
        rows.push_back({case_id, "step", "time_max_s", s.max});
    }

    const fs::path eig = ctx.out / "eigenvalue_error.csv";
    if (fs::exists(eig)) {
        std::ifstream in(eig);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            const auto fields = csv::split_record(line);
            if (fields.size() != 2) throw Error(Errc::ParseError, eig.string() + ": malformed row");
            rows.push_back({case_id, "mode:" + fields[0], "eigenvalue_error_pct", parse_double(fields[1])});
        }
    }

    const fs::path out = ctx.out / (candidate + "_metrics.csv");
    write_metrics_csv(out, rows);
    for (const auto& r : rows) {
        if (r.metric == "force_fde") log_of(ctx) << "metrics: " << r.channel << " force FDE " << format_double(r.value) << "\n";
    }
}

void cmd_bench(const Context& ctx) {
    const Config& cfg = ctx.config;
    const LoadedModel lm = load_partitioned(ctx);
    const NewmarkParams params = newmark_params(cfg);
    const InputKind kind = input_kind(cfg);
    const auto setup = make_identify_setup(lm.partitioned, params, resolve_alpha(ctx), kind);
    const auto measured = lm.partitioned.measured_labels();
    const SignalSeries clean = csv::read_series(truth_path(ctx, kind), signal_kind_of(kind)).select(measured);
    check_sample_rate(clean.dt, params.dt);
    const SignalSeries truth = csv::read_series(ctx.out / "truth_forces.csv", SignalKind::Force, clean.dt);
    const double fraction = cfg.get_double("noise.fraction", 0.0);
    const std::uint64_t seed = seed_of(cfg);
    const int cases = cfg.get_int("bench.cases", 1);
    if (cases < 1) throw Error(Errc::ConfigError, "bench.cases: must be >= 1");
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int threads = std::clamp(cfg.get_int("bench.threads", static_cast<int>(hw)), 1, cases);

    struct CaseResult {
        std::uint64_t seed = 0;
        std::vector<double> seconds;
        double fde = 0.0;
        std::exception_ptr error;
    };
    std::vector<CaseResult> results(static_cast<std::size_t>(cases));
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int i = next++; i < cases; i = next++) {
            CaseResult& cr = results[static_cast<std::size_t>(i)];
            try {
                cr.seed = seed + static_cast<std::uint64_t>(i);
                const SignalSeries meas = fraction > 0.0 ? add_noise(clean, fraction, cr.seed) : clean;
                IdentifySession session(setup);
                const RunOutput out = run_session(session, meas);
                cr.seconds = out.step_seconds;
                for (Index j = 0; j < truth.n_channels(); ++j) {
                    const Vector ref = truth.samples.col(j), got = out.forces.channel(truth.channels[j]);
                    cr.fde += fde(as_span(ref), as_span(got), truth.dt).value / static_cast<double>(truth.n_channels());
                }
            } catch (...) {
                cr.error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (const auto& cr : results) {
        if (cr.error) std::rethrow_exception(cr.error);
    }

    std::ofstream dist = open_out(ctx.out / "bench.csv");
    std::ofstream summary = open_out(ctx.out / "bench_summary.csv");
    dist << "case,step,seconds\n";
    summary << "case,seed,steps,total_s,mean_s,p99_s,max_s,force_fde\n";
    std::vector<double> all;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const CaseResult& cr = results[i];
        for (std::size_t k = 0; k < cr.seconds.size(); ++k) dist << i << ',' << k << ',' << format_double(cr.seconds[k]) << '\n';
        const TimingStats s = timing_stats(cr.seconds);
        summary << i << ',' << cr.seed << ',' << s.count << ',' << format_double(s.total) << ','
                << format_double(s.mean) << ',' << format_double(s.p99) << ',' << format_double(s.max) << ','
                << format_double(cr.fde) << '\n';
        all.insert(all.end(), cr.seconds.begin(), cr.seconds.end());
    }
    log_timing(ctx, "bench (" + std::to_string(cases) + " cases, " + std::to_string(threads) + " threads)", all);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Virtual sensing: reduced-order modelling and real-time inverse force identification", "vsense"};
    app.require_subcommand(1, 1);

    struct Flags {
        std::string config;
        std::string out;
        std::optional<std::uint64_t> seed;
        std::vector<std::string> sets;
        std::string input;
        std::string candidate;
    } flags;

    using Command = void (*)(const Context&);
    const std::vector<std::tuple<std::string, std::string, Command>> commands = {
        {"build", "Assemble the full model and export its matrices", cmd_build},
        {"reduce", "Reduce the exported model and write the eigenvalue-error report", cmd_reduce},
        {"simulate", "Simulate truth responses and measurement channels", cmd_simulate},
        {"calibrate", "Select the regularization parameter from the L-curve", cmd_calibrate},
        {"identify", "Stream measurements through the inverse force identifier", cmd_identify},
        {"akf", "Run the augmented Kalman filter baseline", cmd_akf},
        {"metrics", "Compare identified outputs against the truth", cmd_metrics},
        {"bench", "Measure per-step identification latency over independent cases", cmd_bench},
    };
    Command selected = nullptr;
    for (const auto& [name, help, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "INI run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", flags.out, "Working directory for stage artifacts (paths.out)");
        sub->add_option("--seed", flags.seed, "Noise seed (noise.seed)");
        sub->add_option("--set", flags.sets, "Override a configuration key: section.key=value");
        if (name == "identify" || name == "akf") {
            sub->add_option("--input", flags.input, "Measurement CSV (" + name + ".input)");
        }
        if (name == "metrics") sub->add_option("--candidate", flags.candidate, "Output prefix to score (metrics.candidate)");
        sub->callback([&selected, fn = fn] { selected = fn; });
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        Context ctx;
        if (!flags.config.empty()) ctx.config = Config::from_file(flags.config);
        for (const auto& s : flags.sets) ctx.config.set(s);
        if (!flags.out.empty()) ctx.config.put("paths.out", flags.out);
        if (flags.seed) ctx.config.put("noise.seed", std::to_string(*flags.seed));
        if (!flags.input.empty()) {
            ctx.config.put(app.get_subcommands().front()->get_name() + ".input", flags.input);
        }
        if (!flags.candidate.empty()) ctx.config.put("metrics.candidate", flags.candidate);
        ctx.config.check_known_keys();
        ctx.out = ctx.config.get_string("paths.out", std::string("vsense_out"));
        fs::create_directories(ctx.out);
        ctx.log = &out;
        selected(ctx);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace vsense::cli
