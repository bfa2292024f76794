#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vsense {

enum class Errc {
    InvalidArgument,
    DimensionMismatch,
    NotPositiveDefinite,
    NoConvergence,
    SingularBlock,
    InvalidSpec,
    ParseError,
    AsymmetricInput,
    IoError,
    SingularSlaveBlock,
    InvalidPartition,
    UnknownLabel,
    MeasuredModalCoordinate,
    SingularEffectiveStiffness,
    SingularUnmeasuredBlock,
    NonFiniteMeasurement,
    SampleRateMismatch,
    SingularNormalMatrix,
    DivergedFilter,
    UnknownProfile,
    InvalidBand,
    GridMismatch,
    EmptyBand,
    ConfigError,
};

std::string_view errc_name(Errc code);

// Every library failure is reported through this type; code() identifies the
// failure class, what() carries the detail.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace vsense
