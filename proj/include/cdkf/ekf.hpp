#pragma once

// Continuous-discrete extended Kalman filter.

#include "cdkf/filter_state.hpp"
#include "cdkf/matrix.hpp"
#include "cdkf/schedule.hpp"
#include "cdkf/sde.hpp"

namespace cdkf {

/// Forward-Euler co-integration over [t, t + Ts] with substep dt of
///   dx/dt = f(x, u, d),  dP/dt = A P + P A^T + sigma sigma^T,
/// where A = df/dx is re-evaluated at the current mean on every substep.
/// P is symmetrized after each substep. Throws IntegrationError on non-finite values.
FilterState ekf_predict(const FilterState& state, const SdeModel& model, const InputSchedule& sched,
                        double Ts, double dt);

struct EkfUpdate {
  FilterState state;
  Innovation innovation;
};

/// Linearized measurement update with the Joseph covariance form.
EkfUpdate ekf_update(const FilterState& state, const Matrix& y, const SdeModel& model,
                     const Matrix& R);

}  // namespace cdkf
