#pragma once

#include "vsense/numerics.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vsense {

// DOF labels are `node:direction` strings, e.g. "12:z" or "q:3".
std::string make_label(const std::string& node, const std::string& direction);
bool is_valid_label(const std::string& label);

struct FullModel {
    SymMatrix m;
    SymMatrix c;
    SymMatrix k;
    std::vector<std::string> labels;
    // Indices (in the pre-elimination numbering) removed by boundary conditions.
    IndexList constrained_dofs;

    Index size() const { return m.size(); }
    std::optional<Index> index_of(const std::string& label) const;
    void validate() const;
};

struct BeamSpec {
    double length = 0.17;            // m
    double width = 0.013;            // m
    double thickness = 0.0012;       // m
    double youngs_modulus = 69e9;    // Pa
    double density = 2700.0;         // kg/m^3
    int n_elements = 50;
    int clamped_node = 0;

    double area() const { return width * thickness; }
    double second_moment() const { return width * thickness * thickness * thickness / 12.0; }
    void validate() const;
};

// Unconstrained Euler-Bernoulli beam, 2 DOFs per node ("z" deflection,
// "ry" rotation), cubic Hermite stiffness and consistent mass.
FullModel assemble_beam(const BeamSpec& spec);

// assemble_beam followed by elimination of both DOFs at the clamped node.
FullModel build_cantilever_beam(const BeamSpec& spec);

// Closed-form element matrices (DOF order w1, th1, w2, th2).
Eigen::Matrix4d beam_element_stiffness(double ei, double le);
Eigen::Matrix4d beam_element_mass(double rho_a, double le);

struct ChainSpec {
    int n_masses = 3;
    double mass = 1.0;         // kg
    double stiffness = 1.0;    // N/m
    bool fixed_left = true;    // spring to ground before the first mass
    bool fixed_right = false;  // spring to ground after the last mass
};

// Masses connected by identical springs, optionally grounded at either end.
// Labels are "i:x".
FullModel build_spring_chain(const ChainSpec& spec);

// Free-free chain with all masses unconstrained (singular K).
FullModel assemble_spring_chain(int n_masses, double mass, double stiffness);

// Row/column deletion of `dofs` (indices into `model`).
FullModel eliminate_dofs(const FullModel& model, const IndexList& dofs);

// c = a*m + b*k.
FullModel rayleigh_damping(const FullModel& model, double a, double b);

FullModel import_matrices(const std::filesystem::path& m_path,
                          const std::filesystem::path& k_path,
                          const std::optional<std::filesystem::path>& labels_path = std::nullopt);

// Writes m.mtx, k.mtx (and c.mtx when nonzero) plus labels.txt into `dir`.
void export_matrices(const FullModel& model, const std::filesystem::path& dir);

std::vector<std::string> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<std::string>& labels);

}  // namespace vsense
