#pragma once

#include "vsense/numerics.hpp"
#include "vsense/rom.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vsense {

// Reduced model reordered so measured DOFs come first:
// [measured (user order); unmeasured masters (original order); modal coords].
// Block views alias the stored matrices.
class PartitionedModel {
public:
    using ConstBlock = Eigen::Block<const Matrix>;

    PartitionedModel() = default;

    // `order[b]` is the source index placed at breve position b; the first
    // `n_measured` entries are the measured DOFs.
    PartitionedModel(const SymMatrix& m, const SymMatrix& c, const SymMatrix& k,
                     IndexList order, Index n_measured, std::vector<std::string> source_labels);

    const SymMatrix& m() const { return m_; }
    const SymMatrix& c() const { return c_; }
    const SymMatrix& k() const { return k_; }

    Index size() const { return m_.size(); }
    Index n_measured() const { return n_measured_; }
    Index n_unmeasured() const { return size() - n_measured_; }

    // breve index -> source (reduced) index and inverse.
    const IndexList& breve_to_source() const { return order_; }
    const IndexList& source_to_breve() const { return inverse_; }

    // Labels in breve order.
    const std::vector<std::string>& labels() const { return labels_; }
    std::vector<std::string> measured_labels() const;
    std::optional<Index> index_of(const std::string& label) const;

    ConstBlock measured(const SymMatrix& a) const;    // A^m
    ConstBlock coupling(const SymMatrix& a) const;    // A^c
    ConstBlock unmeasured(const SymMatrix& a) const;  // A^u

    // Permute a breve-ordered vector back to source order and vice versa.
    Vector to_source(const Vector& breve) const;
    Vector to_breve(const Vector& source) const;

private:
    SymMatrix m_, c_, k_;
    IndexList order_;
    IndexList inverse_;
    Index n_measured_ = 0;
    std::vector<std::string> labels_;
};

// Breve reordering of a reduced model. Measured labels must name master DOFs.
PartitionedModel reorder(const ReducedModel& red, const std::vector<std::string>& measured_labels);

// Breve reordering of arbitrary matrices whose coordinates are all physical
// (no reduction), e.g. small testbeds or a full model used as truth.
PartitionedModel partition_matrices(const SymMatrix& m, const SymMatrix& c, const SymMatrix& k,
                                    const std::vector<std::string>& labels,
                                    const std::vector<std::string>& measured_labels);
PartitionedModel partition_full(const FullModel& model, const std::vector<std::string>& measured_labels);

struct SourceMatrices {
    SymMatrix m, c, k;
};

// Inverse permutation back to the source ordering.
SourceMatrices inverse_permute(const PartitionedModel& pm);

}  // namespace vsense
