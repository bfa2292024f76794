#include "vsense/rom.hpp"

#include "vsense/error.hpp"
#include "vsense/matrix_market.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>

namespace vsense {

Partition Partition::from_masters(Index n, const IndexList& masters) {
    if (masters.empty()) throw Error(Errc::InvalidPartition, "at least one master DOF is required");
    std::vector<bool> is_master(static_cast<std::size_t>(n), false);
    for (Index d : masters) {
        if (d < 0 || d >= n) throw Error(Errc::InvalidPartition, "master DOF out of range");
        if (is_master[d]) throw Error(Errc::InvalidPartition, "duplicate master DOF");
        is_master[d] = true;
    }
    Partition p;
    p.master_dofs = masters;
    for (Index i = 0; i < n; ++i)
        if (!is_master[i]) p.slave_dofs.push_back(i);
    return p;
}

Partition Partition::from_labels(const FullModel& model, const std::vector<std::string>& master_labels) {
    IndexList masters;
    for (const auto& l : master_labels) {
        const auto idx = model.index_of(l);
        if (!idx) throw Error(Errc::UnknownLabel, "master label '" + l + "' not in model");
        masters.push_back(*idx);
    }
    return from_masters(model.size(), masters);
}

std::vector<std::string> ReducedModel::master_labels() const {
    std::vector<std::string> out;
    for (Index d : partition.master_dofs) out.push_back(full_labels[d]);
    return out;
}

std::vector<std::string> ReducedModel::coordinate_labels() const {
    auto out = master_labels();
    for (Index i = 0; i < n_modes; ++i) out.push_back(make_label("q", std::to_string(i + 1)));
    return out;
}

Vector ReducedModel::expand(const Vector& u_hat) const {
    if (u_hat.size() != size()) throw Error(Errc::DimensionMismatch, "reduced vector length");
    return t_hat * u_hat;
}

namespace {

Factorization factorize_slave_block(const SymMatrix& kss) {
    try {
        return Factorization(kss);
    } catch (const Error& e) {
        throw Error(Errc::SingularSlaveBlock, e.what());
    }
}

}  // namespace

Matrix constraint_modes(const FullModel& model, const Partition& p) {
    const SymMatrix kss = model.k.principal(p.slave_dofs);
    const Matrix ksm = model.k.dense()(p.slave_dofs, p.master_dofs);
    return -factorize_slave_block(kss).solve(ksm);
}

Matrix residual_flexibility(const FullModel& model, const Partition& p,
                            const Matrix& psi_d, const Vector& gamma_d) {
    const SymMatrix kss = model.k.principal(p.slave_dofs);
    const Matrix flex = factorize_slave_block(kss).inverse();
    return flex - psi_d * gamma_d.cwiseInverse().asDiagonal() * psi_d.transpose();
}

ReducedModel reduce(const FullModel& model, const Partition& p, Index n_modes, double a, double b) {
    const Index n = model.size();
    const Index nm = p.n_master();
    const Index ns = p.n_slave();
    if (nm + ns != n) throw Error(Errc::InvalidPartition, "partition does not cover the model");
    if (n_modes < 1 || n_modes > ns) {
        throw Error(Errc::InvalidArgument, "n_modes must be in [1, number of slave DOFs]");
    }
    if (!(a >= 0) || !(b >= 0)) {
        throw Error(Errc::InvalidArgument, "Rayleigh coefficients must be nonnegative");
    }
    const Matrix& mfull = model.m.dense();
    const Matrix& kfull = model.k.dense();
    const IndexList& mi = p.master_dofs;
    const IndexList& si = p.slave_dofs;

    const SymMatrix kss = model.k.principal(si);
    const SymMatrix mss = model.m.principal(si);
    const Factorization kss_f = factorize_slave_block(kss);

    ReducedModel red;
    red.partition = p;
    red.n_master = nm;
    red.n_modes = n_modes;
    red.rayleigh_a = a;
    red.rayleigh_b = b;
    red.full_labels = model.labels;
    red.upsilon = -kss_f.solve(Matrix(kfull(si, mi)));

    const GeneralizedEigen eig = sym_generalized_eig(kss, mss, n_modes);
    red.psi_d = eig.vectors;
    red.gamma_d = eig.values;

    const Index nr = nm + n_modes;
    Matrix t0 = Matrix::Zero(n, nr);
    for (Index j = 0; j < nm; ++j) t0(mi[j], j) = 1.0;
    for (Index r = 0; r < ns; ++r) {
        t0.row(si[r]).head(nm) = red.upsilon.row(r);
        t0.row(si[r]).tail(n_modes) = red.psi_d.row(r);
    }

    const Matrix m0 = symmetrize(t0.transpose() * mfull * t0);
    const Matrix k0 = symmetrize(t0.transpose() * kfull * t0);

    // Residual-flexibility correction, F_rs applied without forming it.
    const Matrix coupling = Matrix(mfull(si, mi)) + mss.dense() * red.upsilon;
    const Matrix flex_coupling =
        kss_f.solve(coupling) -
        red.psi_d * (red.gamma_d.cwiseInverse().asDiagonal() * (red.psi_d.transpose() * coupling));
    const Matrix dyn = Factorization(SymMatrix(m0)).solve(k0);  // M0^{-1} K0
    const Matrix tr_slave = flex_coupling * dyn.topRows(nm);

    red.t_hat = t0;
    for (Index r = 0; r < ns; ++r) red.t_hat.row(si[r]) += tr_slave.row(r);

    red.m_hat = SymMatrix(symmetrize(red.t_hat.transpose() * mfull * red.t_hat));
    red.k_hat = SymMatrix(symmetrize(red.t_hat.transpose() * kfull * red.t_hat));
    red.c_hat = SymMatrix(a * red.m_hat.dense() + b * red.k_hat.dense());
    return red;
}

std::vector<double> eigenvalue_error(const FullModel& full, const ReducedModel& red, Index count) {
    if (count < 1 || count > std::min(full.size(), red.size())) {
        throw Error(Errc::InvalidArgument, "eigenvalue count exceeds model dimensions");
    }
    const Vector lam = sym_generalized_eigenvalues(full.k, full.m, count);
    const Vector lam_hat = sym_generalized_eigenvalues(red.k_hat, red.m_hat, count);
    std::vector<double> err(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) err[i] = 100.0 * (lam(i) - lam_hat(i)) / lam(i);
    return err;
}

namespace {

constexpr const char* kArchiveFormat = "vsense-reduced-model";

Matrix read_matrix(const std::filesystem::path& p) { return mm::read(p).matrix; }

}  // namespace

void save_reduced(const ReducedModel& red, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    mm::write_symmetric(dir / "m_hat.mtx", red.m_hat);
    mm::write_symmetric(dir / "c_hat.mtx", red.c_hat);
    mm::write_symmetric(dir / "k_hat.mtx", red.k_hat);
    mm::write_general(dir / "t_hat.mtx", red.t_hat);
    mm::write_general(dir / "upsilon.mtx", red.upsilon);
    mm::write_general(dir / "psi_d.mtx", red.psi_d);
    mm::write_general(dir / "gamma_d.mtx", Matrix(red.gamma_d));

    nlohmann::json manifest;
    manifest["format"] = kArchiveFormat;
    manifest["version"] = 1;
    manifest["n_master"] = red.n_master;
    manifest["n_modes"] = red.n_modes;
    manifest["master_dofs"] = red.partition.master_dofs;
    manifest["slave_dofs"] = red.partition.slave_dofs;
    manifest["rayleigh_a"] = red.rayleigh_a;
    manifest["rayleigh_b"] = red.rayleigh_b;
    manifest["labels"] = red.full_labels;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw Error(Errc::IoError, "cannot write manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

ReducedModel load_reduced(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw Error(Errc::IoError, "no reduced-model manifest in " + dir.string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("manifest: ") + e.what());
    }
    if (manifest.value("format", std::string{}) != kArchiveFormat) {
        throw Error(Errc::ParseError, "not a reduced-model archive: " + dir.string());
    }
    ReducedModel red;
    try {
        red.n_master = manifest.at("n_master").get<Index>();
        red.n_modes = manifest.at("n_modes").get<Index>();
        red.partition.master_dofs = manifest.at("master_dofs").get<IndexList>();
        red.partition.slave_dofs = manifest.at("slave_dofs").get<IndexList>();
        red.rayleigh_a = manifest.at("rayleigh_a").get<double>();
        red.rayleigh_b = manifest.at("rayleigh_b").get<double>();
        red.full_labels = manifest.at("labels").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("manifest: ") + e.what());
    }
    red.m_hat = SymMatrix(read_matrix(dir / "m_hat.mtx"));
    red.c_hat = SymMatrix(read_matrix(dir / "c_hat.mtx"));
    red.k_hat = SymMatrix(read_matrix(dir / "k_hat.mtx"));
    red.t_hat = read_matrix(dir / "t_hat.mtx");
    red.upsilon = read_matrix(dir / "upsilon.mtx");
    red.psi_d = read_matrix(dir / "psi_d.mtx");
    red.gamma_d = read_matrix(dir / "gamma_d.mtx").col(0);

    const Index nr = red.n_master + red.n_modes;
    const Index n = static_cast<Index>(red.full_labels.size());
    if (red.m_hat.size() != nr || red.k_hat.size() != nr || red.c_hat.size() != nr ||
        red.t_hat.rows() != n || red.t_hat.cols() != nr ||
        red.n_master != static_cast<Index>(red.partition.master_dofs.size())) {
        throw Error(Errc::DimensionMismatch, "reduced-model archive blocks are inconsistent");
    }
    return red;
}

}  // namespace vsense
