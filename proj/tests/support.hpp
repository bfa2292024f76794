#pragma once

#include "vsense/error.hpp"
#include "vsense/identify.hpp"
#include "vsense/model.hpp"
#include "vsense/numerics.hpp"
#include "vsense/partition.hpp"
#include "vsense/rom.hpp"
#include "vsense/signals.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace vsense::testing {

// Error code thrown by `fn`; records a test failure when nothing is thrown.
inline Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an exception";
    return Errc::InvalidArgument;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("vsense_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix a(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) a(i, j) = nd(rng);
    return a;
}

inline Vector random_vector(Index n, std::uint64_t seed) { return random_matrix(n, 1, seed).col(0); }

// Well-conditioned SPD matrix: B^T B / n + I.
inline SymMatrix random_spd(Index n, std::uint64_t seed) {
    const Matrix b = random_matrix(n, n, seed);
    Matrix a = b.transpose() * b / static_cast<double>(n);
    a.diagonal().array() += 1.0;
    return SymMatrix(symmetrize(a));
}

inline double rel_err(const Matrix& a, const Matrix& b) {
    const double scale = std::max(b.norm(), 1e-300);
    return (a - b).norm() / scale;
}

// Grounded spring chain with light Rayleigh damping and the given measured DOFs.
inline PartitionedModel chain_model(int n, const std::vector<std::string>& measured, double a = 0.0,
                                    double b = 0.0) {
    ChainSpec spec;
    spec.n_masses = n;
    FullModel full = rayleigh_damping(build_spring_chain(spec), a, b);
    return partition_full(full, measured);
}

// Forward-simulates `model` under forces applied on the measured DOFs and
// returns the breve trajectories (row i is the state after step i + 1).
struct Trajectory {
    Matrix u, v, a;
};

inline Trajectory simulate_measured_forces(const PartitionedModel& model, const NewmarkParams& p,
                                           const Matrix& forces) {
    ForwardIntegrator fwd(model, p);
    State s = State::zero(model.size());
    Trajectory tr{Matrix(forces.rows(), model.size()), Matrix(forces.rows(), model.size()),
                  Matrix(forces.rows(), model.size())};
    Vector f = Vector::Zero(model.size());
    for (Index i = 0; i < forces.rows(); ++i) {
        f.head(model.n_measured()) = forces.row(i).transpose();
        s = fwd.step(s, f);
        tr.u.row(i) = s.u.transpose();
        tr.v.row(i) = s.v.transpose();
        tr.a.row(i) = s.a.transpose();
    }
    return tr;
}

inline SignalSeries measured_series(const PartitionedModel& model, const Matrix& breve, double dt,
                                    SignalKind kind) {
    return SignalSeries(dt, dt, model.measured_labels(), Matrix(breve.leftCols(model.n_measured())), kind);
}

}  // namespace vsense::testing
