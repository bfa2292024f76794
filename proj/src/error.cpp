#include "vsense/error.hpp"

namespace vsense {

std::string_view errc_name(Errc code) {
    switch (code) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
        case Errc::NoConvergence: return "NoConvergence";
        case Errc::SingularBlock: return "SingularBlock";
        case Errc::InvalidSpec: return "InvalidSpec";
        case Errc::ParseError: return "ParseError";
        case Errc::AsymmetricInput: return "AsymmetricInput";
        case Errc::IoError: return "IoError";
        case Errc::SingularSlaveBlock: return "SingularSlaveBlock";
        case Errc::InvalidPartition: return "InvalidPartition";
        case Errc::UnknownLabel: return "UnknownLabel";
        case Errc::MeasuredModalCoordinate: return "MeasuredModalCoordinate";
        case Errc::SingularEffectiveStiffness: return "SingularEffectiveStiffness";
        case Errc::SingularUnmeasuredBlock: return "SingularUnmeasuredBlock";
        case Errc::NonFiniteMeasurement: return "NonFiniteMeasurement";
        case Errc::SampleRateMismatch: return "SampleRateMismatch";
        case Errc::SingularNormalMatrix: return "SingularNormalMatrix";
        case Errc::DivergedFilter: return "DivergedFilter";
        case Errc::UnknownProfile: return "UnknownProfile";
        case Errc::InvalidBand: return "InvalidBand";
        case Errc::GridMismatch: return "GridMismatch";
        case Errc::EmptyBand: return "EmptyBand";
        case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

}  // namespace vsense
