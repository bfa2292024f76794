#pragma once

#include "vsense/model.hpp"
#include "vsense/numerics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace vsense {

struct Partition {
    IndexList master_dofs;  // user order
    IndexList slave_dofs;   // ascending

    // Validates disjointness/coverage; slaves are the ascending complement.
    static Partition from_masters(Index n, const IndexList& masters);
    static Partition from_labels(const FullModel& model, const std::vector<std::string>& master_labels);

    Index n_master() const { return static_cast<Index>(master_dofs.size()); }
    Index n_slave() const { return static_cast<Index>(slave_dofs.size()); }
};

// Generalized coordinates are [u_m; q_s]: the first n_master are physical
// master DOFs, the remaining n_modes are slave modal amplitudes.
struct ReducedModel {
    SymMatrix m_hat;
    SymMatrix c_hat;
    SymMatrix k_hat;
    Matrix t_hat;  // N x (n_master + n_modes), rows in the full model's DOF order
    Index n_master = 0;
    Index n_modes = 0;
    Partition partition;
    Matrix upsilon;   // constraint modes, N_s x N_m
    Matrix psi_d;     // mass-orthonormal slave modes, N_s x N_d
    Vector gamma_d;   // slave eigenvalues, ascending
    double rayleigh_a = 0.0;
    double rayleigh_b = 0.0;
    std::vector<std::string> full_labels;

    Index size() const { return n_master + n_modes; }
    std::vector<std::string> master_labels() const;
    // Master labels followed by "q:1" ... "q:N_d".
    std::vector<std::string> coordinate_labels() const;
    // Physical displacement field u = T_hat * u_hat.
    Vector expand(const Vector& u_hat) const;
};

// Upsilon = -K_ss^{-1} K_sm.
Matrix constraint_modes(const FullModel& model, const Partition& p);

// Residual flexibility F_rs = K_ss^{-1} - Psi_d Gamma_d^{-1} Psi_d^T, formed
// explicitly (diagnostics only; reduce() applies it without forming it).
Matrix residual_flexibility(const FullModel& model, const Partition& p,
                            const Matrix& psi_d, const Vector& gamma_d);

ReducedModel reduce(const FullModel& model, const Partition& p, Index n_modes,
                    double a = 0.0, double b = 0.0);

// Percentage errors 100 * (lambda_i - lambda_hat_i) / lambda_i for the lowest
// `count` modes, full-model eigenvalues as reference.
std::vector<double> eigenvalue_error(const FullModel& full, const ReducedModel& red, Index count);

// Archive directory: m_hat/c_hat/k_hat (symmetric), t_hat/upsilon/psi_d
// (array), gamma_d and manifest.json.
void save_reduced(const ReducedModel& red, const std::filesystem::path& dir);
ReducedModel load_reduced(const std::filesystem::path& dir);

}  // namespace vsense
