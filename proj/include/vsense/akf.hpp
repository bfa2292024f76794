#pragma once

#include "vsense/identify.hpp"
#include "vsense/numerics.hpp"
#include "vsense/partition.hpp"
#include "vsense/signals.hpp"

namespace vsense {

// Noise levels are rates per second for the process terms and plain
// variances for the measurement. With acceleration-only observations a
// static deflection balanced by a constant force is unobservable, so the
// initial state covariance should reflect how well the starting state is
// known (a structure at rest is known exactly).
struct AkfConfig {
    double dt = 1e-4;
    double process_noise_state = 1e-12;
    double process_noise_force = 1e6;
    double measurement_noise = 1e-6;
    double initial_covariance = 1.0;         // force block
    double initial_state_covariance = 1e-12;  // displacement and velocity blocks

    void validate() const;
};

// Mean [u; v; f] and covariance, with u and v in breve order and f on the
// measured DOFs.
struct AkfState {
    Vector mean;
    Matrix covariance;
};

class AugmentedKalmanFilter {
public:
    AugmentedKalmanFilter(const PartitionedModel& model, const AkfConfig& cfg);

    // Predicts to the next sample and assimilates the measured accelerations.
    StepResult step(const Vector& measured_acceleration);
    void reset();

    const AkfState& state() const { return state_; }
    const PartitionedModel& model() const { return model_; }
    const AkfConfig& config() const { return cfg_; }
    const Matrix& transition() const { return phi_; }
    const Matrix& observation() const { return obs_; }
    const Matrix& process_noise() const { return q_; }
    Index state_size() const { return phi_.rows(); }

private:
    PartitionedModel model_;
    AkfConfig cfg_;
    Matrix phi_;
    Matrix accel_;  // maps the augmented state to accelerations of every DOF
    Matrix obs_;
    Matrix q_;
    Matrix r_;
    AkfState state_;
};

AugmentedKalmanFilter akf_setup(const PartitionedModel& model, const AkfConfig& cfg);

// Same output layout as run_session. Measurements must be accelerations.
RunOutput akf_run(AugmentedKalmanFilter& filter, const SignalSeries& measurements);

}  // namespace vsense
