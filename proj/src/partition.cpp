#include "vsense/partition.hpp"

#include "vsense/error.hpp"

#include <algorithm>

namespace vsense {

namespace {

SymMatrix permute(const SymMatrix& a, const IndexList& order) {
    return a.principal(order);
}

}  // namespace

PartitionedModel::PartitionedModel(const SymMatrix& m, const SymMatrix& c, const SymMatrix& k,
                                   IndexList order, Index n_measured,
                                   std::vector<std::string> source_labels)
    : order_(std::move(order)), n_measured_(n_measured) {
    const Index n = m.size();
    if (c.size() != n || k.size() != n || static_cast<Index>(order_.size()) != n ||
        static_cast<Index>(source_labels.size()) != n) {
        throw Error(Errc::DimensionMismatch, "partitioned model inputs have inconsistent sizes");
    }
    if (n_measured < 1 || n_measured > n) {
        throw Error(Errc::InvalidPartition, "need at least one measured DOF");
    }
    inverse_.assign(static_cast<std::size_t>(n), -1);
    for (Index b = 0; b < n; ++b) {
        const Index s = order_[b];
        if (s < 0 || s >= n || inverse_[s] != -1) {
            throw Error(Errc::InvalidPartition, "breve ordering is not a permutation");
        }
        inverse_[s] = b;
    }
    m_ = permute(m, order_);
    c_ = permute(c, order_);
    k_ = permute(k, order_);
    labels_.reserve(n);
    for (Index s : order_) labels_.push_back(source_labels[s]);
}

std::vector<std::string> PartitionedModel::measured_labels() const {
    return {labels_.begin(), labels_.begin() + n_measured_};
}

std::optional<Index> PartitionedModel::index_of(const std::string& label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<Index>(it - labels_.begin());
}

PartitionedModel::ConstBlock PartitionedModel::measured(const SymMatrix& a) const {
    return a.dense().topLeftCorner(n_measured_, n_measured_);
}

PartitionedModel::ConstBlock PartitionedModel::coupling(const SymMatrix& a) const {
    return a.dense().topRightCorner(n_measured_, n_unmeasured());
}

PartitionedModel::ConstBlock PartitionedModel::unmeasured(const SymMatrix& a) const {
    return a.dense().bottomRightCorner(n_unmeasured(), n_unmeasured());
}

Vector PartitionedModel::to_source(const Vector& breve) const {
    if (breve.size() != size()) throw Error(Errc::DimensionMismatch, "vector length");
    Vector out(size());
    for (Index b = 0; b < size(); ++b) out(order_[b]) = breve(b);
    return out;
}

Vector PartitionedModel::to_breve(const Vector& source) const {
    if (source.size() != size()) throw Error(Errc::DimensionMismatch, "vector length");
    Vector out(size());
    for (Index b = 0; b < size(); ++b) out(b) = source(order_[b]);
    return out;
}

PartitionedModel reorder(const ReducedModel& red, const std::vector<std::string>& measured_labels) {
    if (measured_labels.empty()) throw Error(Errc::InvalidPartition, "need at least one measured DOF");
    const auto coords = red.coordinate_labels();
    const Index nm = red.n_master;

    IndexList order;
    std::vector<bool> used(coords.size(), false);
    for (const auto& label : measured_labels) {
        const auto it = std::find(coords.begin(), coords.end(), label);
        if (it == coords.end()) {
            const bool is_slave = std::find(red.full_labels.begin(), red.full_labels.end(), label) !=
                                  red.full_labels.end();
            if (is_slave) {
                throw Error(Errc::MeasuredModalCoordinate,
                            "'" + label + "' is a slave DOF represented only by modal coordinates");
            }
            throw Error(Errc::UnknownLabel, "'" + label + "' is not a DOF of the reduced model");
        }
        const Index idx = it - coords.begin();
        if (idx >= nm) {
            throw Error(Errc::MeasuredModalCoordinate, "'" + label + "' is a modal coordinate");
        }
        if (used[idx]) throw Error(Errc::InvalidPartition, "duplicate measured label '" + label + "'");
        used[idx] = true;
        order.push_back(idx);
    }
    const Index n_measured = static_cast<Index>(order.size());
    for (Index i = 0; i < red.size(); ++i)
        if (!used[i]) order.push_back(i);
    return PartitionedModel(red.m_hat, red.c_hat, red.k_hat, std::move(order), n_measured, coords);
}

PartitionedModel partition_matrices(const SymMatrix& m, const SymMatrix& c, const SymMatrix& k,
                                    const std::vector<std::string>& labels,
                                    const std::vector<std::string>& measured_labels) {
    if (measured_labels.empty()) throw Error(Errc::InvalidPartition, "need at least one measured DOF");
    IndexList order;
    std::vector<bool> used(labels.size(), false);
    for (const auto& label : measured_labels) {
        const auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) throw Error(Errc::UnknownLabel, "'" + label + "' not in model");
        const Index idx = it - labels.begin();
        if (used[idx]) throw Error(Errc::InvalidPartition, "duplicate measured label '" + label + "'");
        used[idx] = true;
        order.push_back(idx);
    }
    const Index n_measured = static_cast<Index>(order.size());
    for (Index i = 0; i < static_cast<Index>(labels.size()); ++i)
        if (!used[i]) order.push_back(i);
    return PartitionedModel(m, c, k, std::move(order), n_measured, labels);
}

PartitionedModel partition_full(const FullModel& model, const std::vector<std::string>& measured_labels) {
    return partition_matrices(model.m, model.c, model.k, model.labels, measured_labels);
}

SourceMatrices inverse_permute(const PartitionedModel& pm) {
    const IndexList& inv = pm.source_to_breve();
    return {pm.m().principal(inv), pm.c().principal(inv), pm.k().principal(inv)};
}

}  // namespace vsense
