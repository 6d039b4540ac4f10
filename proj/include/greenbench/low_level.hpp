#pragma once

#include <functional>
#include <vector>

#include "greenbench/physics.hpp"
#include "greenbench/world.hpp"

namespace greenbench::low_level
{

/// PID gains plus the reference-filter constants of the per-motor loop.
struct PidGains
{
	double kp = 70.0;	   // [N m s]
	double ki = 40.0;	   // [N m]
	double kd = 0.0;	   // [N m s^2]
	double n_filter = 10.0;	 // derivative filter constant N (>= 1)
	double kaw = 70.0 / 40.0;  // anti-windup tracking constant, K_P/K_I
	double tau_f = 70.0 / 40.0;	 // reference filter time constant [s]
	int n_f = 1;				 // reference filter order
};

struct FeedforwardConfig
{
	double k_ff = 0.0;	// dimensionless; -k_s/K_m when identified
	double k_s = 0.0;	// static disturbance gain [rad s^-1 N^-1 m^-1]
	bool enabled = false;
};

struct LowLevelState
{
	double integral = 0.0;		 // I accumulator [N m]
	double deriv_state = 0.0;	 // filtered derivative tau_d [N m]
	double prev_error = 0.0;	 // e[k-1] for trapezoid + derivative
	std::vector<double> filter_states;	// one per cascaded lag stage
	double last_tau_unsat = 0.0;
	double last_tau_sat = 0.0;
};

/// n_f cascaded first-order lags, each ZOH-discretized exactly.
/// tau_f = 0 is a pass-through. Unit DC gain by construction.
double reference_filter_step(
	LowLevelState& state, double omega_ref, double tau_f, int n_f, double dt);

/// PID output for the current sample: proportional + provisional trapezoidal
/// integral + backward-Euler filtered derivative. The integral commit is
/// deferred to antiwindup_update.
double pid_step(
	LowLevelState& state, const PidGains& gains, double omega_fil,
	double omega_meas, double dt);

/// Back-calculation integral update: I += dt * (K_I e_trapz + (tau_sat -
/// tau_unsat)/K_aw). Also commits prev_error.
void antiwindup_update(
	LowLevelState& state, const PidGains& gains, double tau_unsat,
	double tau_sat, double error, double dt);

/// Estimated slope/rolling-resistance torque from the measurable disturbances
/// (sector coefficients, slope angle) at the given per-wheel mass.
double estimate_slope_torque(
	const world::TerrainSample& terrain, double mass_per_wheel, double omega,
	const physics::RobotParams& params);

/// Full per-motor control step of the inner loop: reference filter, PID,
/// slope feedforward, saturation, anti-windup. |result| <= tau_max always.
double low_level_step(
	LowLevelState& state, const PidGains& gains, const FeedforwardConfig& ff,
	double omega_ref, double omega_meas, const world::TerrainSample& terrain,
	const physics::RobotParams& params, double dt);

/// Closed-loop poles of the linearized loop: plant K_m/(tau_m s + 1) under a
/// PI controller; roots of tau_m s^2 + (1 + K_m K_P) s + K_m K_I.
/// Returned as (dominant, fast), both real for the reference tuning.
std::pair<double, double> closed_loop_poles(
	double k_m, double tau_motor, double kp, double ki);

struct IdentificationConfig
{
	double omega_ref = 0.75;	 // steady-state operating point [rad/s]
	double settle_time = 40.0;	 // time allowed before the slope step [s]
	double observe_time = 30.0;	 // window after the step [s]
	double control_dt = 0.01;
	double physics_dt = 0.005;
	double steady_tol = 1e-3;  // max |omega - ref| accepted as steady
};

/// Identify the static disturbance gain K_s = dOmega / dTau_slope by running
/// the closed single-wheel loop to steady state and applying a slope step
/// from phi1 to phi2 on the given terrain. Throws on a degenerate pair
/// (phi1 == phi2) or when the loop fails to settle.
double identify_static_gain(
	const world::TerrainSample& base_terrain, double phi1_deg, double phi2_deg,
	const PidGains& gains, const physics::RobotParams& params,
	const IdentificationConfig& cfg = {});

}  // namespace greenbench::low_level
