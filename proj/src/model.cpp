#include "vsense/model.hpp"

#include "vsense/error.hpp"
#include "vsense/format.hpp"
#include "vsense/matrix_market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace vsense {

std::string make_label(const std::string& node, const std::string& direction) {
    return node + ":" + direction;
}

bool is_valid_label(const std::string& label) {
    const auto colon = label.find(':');
    return colon != std::string::npos && colon > 0 && colon + 1 < label.size() &&
           label.find(':', colon + 1) == std::string::npos &&
           label.find_first_of(" \t\r\n,") == std::string::npos;
}

std::optional<Index> FullModel::index_of(const std::string& label) const {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::nullopt;
    return static_cast<Index>(it - labels.begin());
}

void FullModel::validate() const {
    const Index n = m.size();
    if (n < 1 || k.size() != n || c.size() != n) {
        throw Error(Errc::DimensionMismatch, "M, C, K must share a positive dimension");
    }
    if (static_cast<Index>(labels.size()) != n) {
        throw Error(Errc::DimensionMismatch, "label count does not match matrix dimension");
    }
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (!is_valid_label(l)) throw Error(Errc::InvalidSpec, "malformed DOF label '" + l + "'");
        if (!seen.insert(l).second) throw Error(Errc::InvalidSpec, "duplicate DOF label '" + l + "'");
    }
}

void BeamSpec::validate() const {
    const bool ok = length > 0 && width > 0 && thickness > 0 && youngs_modulus > 0 &&
                    density > 0 && n_elements >= 1 && clamped_node >= 0 &&
                    clamped_node <= n_elements && std::isfinite(length * width * thickness) &&
                    std::isfinite(youngs_modulus * density);
    if (!ok) throw Error(Errc::InvalidSpec, "beam parameters must be positive and finite");
}

Eigen::Matrix4d beam_element_stiffness(double ei, double le) {
    const double l2 = le * le;
    Eigen::Matrix4d k;
    k << 12, 6 * le, -12, 6 * le,
         6 * le, 4 * l2, -6 * le, 2 * l2,
         -12, -6 * le, 12, -6 * le,
         6 * le, 2 * l2, -6 * le, 4 * l2;
    return (ei / (l2 * le)) * k;
}

Eigen::Matrix4d beam_element_mass(double rho_a, double le) {
    const double l2 = le * le;
    Eigen::Matrix4d m;
    m << 156, 22 * le, 54, -13 * le,
         22 * le, 4 * l2, 13 * le, -3 * l2,
         54, 13 * le, 156, -22 * le,
         -13 * le, -3 * l2, -22 * le, 4 * l2;
    return (rho_a * le / 420.0) * m;
}

FullModel assemble_beam(const BeamSpec& spec) {
    spec.validate();
    const int n_nodes = spec.n_elements + 1;
    const Index n = 2 * n_nodes;
    const double le = spec.length / spec.n_elements;
    const Eigen::Matrix4d ke = beam_element_stiffness(spec.youngs_modulus * spec.second_moment(), le);
    const Eigen::Matrix4d me = beam_element_mass(spec.density * spec.area(), le);

    Matrix k = Matrix::Zero(n, n);
    Matrix m = Matrix::Zero(n, n);
    for (int e = 0; e < spec.n_elements; ++e) {
        const Index o = 2 * e;
        k.block<4, 4>(o, o) += ke;
        m.block<4, 4>(o, o) += me;
    }

    FullModel model;
    model.k = SymMatrix(k);
    model.m = SymMatrix(m);
    model.c = SymMatrix::zero(n);
    model.labels.reserve(n);
    for (int node = 0; node < n_nodes; ++node) {
        model.labels.push_back(make_label(std::to_string(node), "z"));
        model.labels.push_back(make_label(std::to_string(node), "ry"));
    }
    return model;
}

FullModel build_cantilever_beam(const BeamSpec& spec) {
    const FullModel free = assemble_beam(spec);
    const Index node = spec.clamped_node;
    return eliminate_dofs(free, {2 * node, 2 * node + 1});
}

FullModel assemble_spring_chain(int n_masses, double mass, double stiffness) {
    if (n_masses < 1 || !(mass > 0) || !(stiffness > 0)) {
        throw Error(Errc::InvalidSpec, "chain needs at least one mass and positive parameters");
    }
    const Index n = n_masses;
    Matrix k = Matrix::Zero(n, n);
    for (Index i = 0; i + 1 < n; ++i) {
        k(i, i) += stiffness;
        k(i + 1, i + 1) += stiffness;
        k(i, i + 1) -= stiffness;
        k(i + 1, i) -= stiffness;
    }
    FullModel model;
    model.k = SymMatrix(k);
    model.m = SymMatrix::diagonal(Vector::Constant(n, mass));
    model.c = SymMatrix::zero(n);
    for (Index i = 0; i < n; ++i) model.labels.push_back(make_label(std::to_string(i), "x"));
    return model;
}

FullModel build_spring_chain(const ChainSpec& spec) {
    FullModel chain = assemble_spring_chain(spec.n_masses, spec.mass, spec.stiffness);
    Matrix k = chain.k.dense();
    if (spec.fixed_left) k(0, 0) += spec.stiffness;
    if (spec.fixed_right) k(spec.n_masses - 1, spec.n_masses - 1) += spec.stiffness;
    chain.k = SymMatrix(k);
    return chain;
}

FullModel eliminate_dofs(const FullModel& model, const IndexList& dofs) {
    const Index n = model.size();
    std::set<Index> drop(dofs.begin(), dofs.end());
    for (Index d : drop) {
        if (d < 0 || d >= n) throw Error(Errc::InvalidArgument, "constrained DOF out of range");
    }
    IndexList keep;
    for (Index i = 0; i < n; ++i)
        if (!drop.count(i)) keep.push_back(i);
    if (keep.empty()) throw Error(Errc::InvalidArgument, "cannot constrain every DOF");

    FullModel out;
    out.m = model.m.principal(keep);
    out.k = model.k.principal(keep);
    out.c = model.c.principal(keep);
    for (Index i : keep) out.labels.push_back(model.labels[i]);
    out.constrained_dofs = model.constrained_dofs;
    for (Index d : drop) out.constrained_dofs.push_back(d);
    return out;
}

FullModel rayleigh_damping(const FullModel& model, double a, double b) {
    if (!(a >= 0) || !(b >= 0)) {
        throw Error(Errc::InvalidArgument, "Rayleigh coefficients must be nonnegative");
    }
    FullModel out = model;
    out.c = SymMatrix(a * model.m.dense() + b * model.k.dense());
    return out;
}

std::vector<std::string> read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty()) continue;
        labels.emplace_back(t);
        if (!is_valid_label(labels.back())) {
            throw Error(Errc::ParseError, "malformed label '" + labels.back() + "' in " + path.string());
        }
    }
    return labels;
}

void write_labels(const std::filesystem::path& path, const std::vector<std::string>& labels) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    for (const auto& l : labels) out << l << '\n';
}

FullModel import_matrices(const std::filesystem::path& m_path,
                          const std::filesystem::path& k_path,
                          const std::optional<std::filesystem::path>& labels_path) {
    const auto load = [](const std::filesystem::path& p) {
        Matrix a = mm::read(p).matrix;
        if (a.rows() != a.cols()) {
            throw Error(Errc::ParseError, p.string() + " is not square");
        }
        if (asymmetry(a) > 1e-9) {
            throw Error(Errc::AsymmetricInput, p.string() + " is not symmetric");
        }
        return SymMatrix(a);
    };
    FullModel model;
    model.m = load(m_path);
    model.k = load(k_path);
    if (model.m.size() != model.k.size()) {
        throw Error(Errc::DimensionMismatch, "M and K have different dimensions");
    }
    model.c = SymMatrix::zero(model.m.size());
    if (labels_path) {
        model.labels = read_labels(*labels_path);
    } else {
        for (Index i = 0; i < model.m.size(); ++i) {
            model.labels.push_back(make_label(std::to_string(i), "u"));
        }
    }
    model.validate();
    return model;
}

void export_matrices(const FullModel& model, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    mm::write_symmetric(dir / "m.mtx", model.m);
    mm::write_symmetric(dir / "k.mtx", model.k);
    if (model.c.dense().cwiseAbs().maxCoeff() > 0.0) mm::write_symmetric(dir / "c.mtx", model.c);
    write_labels(dir / "labels.txt", model.labels);
}

}  // namespace vsense
