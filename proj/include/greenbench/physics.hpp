#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "greenbench/geometry.hpp"
#include "greenbench/rng.hpp"
#include "greenbench/world.hpp"

namespace greenbench::physics
{

inline constexpr double kGravity = 9.81;  // m/s^2

/// A non-finite value showed up inside the integrator; the trial must halt
/// with a diagnosable cause instead of propagating NaNs.
class PhysicsError : public std::runtime_error
{
	using std::runtime_error::runtime_error;
};

struct RobotParams
{
	double wheel_radius = 0.165;	  // r [m]
	double wheel_separation = 0.555;  // L_w [m]
	double chassis_mass = 60.0;		  // m_v [kg]
	double wheel_mass = 3.75;		  // m_w per wheel [kg]
	double robot_mass = 75.0;		  // m_robot [kg]
	int num_wheels = 4;				  // nW in {1..4}
	double motor_inertia = 2.22;	  // J [kg m^2]
	double viscous_friction = 0.75;	  // b [N m s/rad]
	double torque_constant = 1.0;	  // k_tau [N m]
	double wheel_rot_inertia = 2.22;  // I_yy [kg m^2]
	double tau_max = 400.0;			  // [N m]
	double v_max = 1.0;				  // [m/s]
	double omega_max = 3.2;			  // [rad/s]
	double payload_mass = 0.0;		  // m_pl [kg]

	/// Effective mass per wheel, payload included.
	double mass_per_wheel() const
	{
		return (robot_mass + payload_mass) / num_wheels;
	}
	/// Per-wheel mass at nominal (zero) payload, for measurable-only
	/// feedforward estimates.
	double nominal_mass_per_wheel() const { return robot_mass / num_wheels; }
};

enum Side : int
{
	kRight = 0,
	kLeft = 1
};

struct WheelState
{
	double omega = 0.0;			  // [rad/s]
	double omega_ref = 0.0;		  // commanded [rad/s]
	double omega_ref_rate = 0.0;  // finite-difference d(omega_ref)/dt
	double lateral_accel = 0.0;	  // a_wy [m/s^2]
	double applied_torque = 0.0;  // tau_m [N m]
	double slope_torque_actual = 0.0;  // tau_slope evaluated on true terrain

	/// Record a new reference and its finite-difference rate over the
	/// control period that produced it.
	void set_reference(double new_ref, double control_dt)
	{
		omega_ref_rate = (control_dt > 0) ? (new_ref - omega_ref) / control_dt : 0.0;
		omega_ref = new_ref;
	}
};

struct RobotState
{
	Vec2 position{};
	double heading = 0.0;  // theta in (-pi, pi]
	std::array<WheelState, 2> wheels{};	 // [kRight, kLeft]
	double v = 0.0;		 // [m/s]
	double omega = 0.0;	 // [rad/s]
	double time = 0.0;	 // [s]
};

struct EncoderModel
{
	double sigma = 0.02;  // [rad/s]
	bool enabled = false;
	RandomStream stream_right;
	RandomStream stream_left;
};

/// Wheel references for a chassis (v, omega) command: v = r/2 (wR + wL),
/// omega = r/L_w (wR - wL), solved for (wR, wL).
std::pair<double, double> inverse_kinematics(
	double v, double omega, const RobotParams& p);

/// Chassis (v, omega) from wheel speeds; exact inverse of the above.
std::pair<double, double> forward_kinematics(
	double omega_right, double omega_left, const RobotParams& p);

/// Maximum admissible friction per wheel: mu * m_pw * g.
double max_friction(double mu, double mass_per_wheel);

/// Resistive torque from rolling resistance, slope and damping:
/// (C_rr m_pw g cos(phi) + m_pw g sin(phi)) r - C_D omega.
double slope_torque(
	const world::TerrainSample& terrain, double mass_per_wheel, double omega,
	const RobotParams& p);

struct WheelStepResult
{
	WheelState wheel;
	double f_long = 0.0;  // [N], after the friction clamp
	double f_lat = 0.0;	  // [N], after the friction clamp
};

/// One friction-model update of a single wheel under commanded torque.
/// The lateral force is clamped to +-F_rmax; the longitudinal force demand
/// is derived from the torque balance and clamped likewise; the clamp
/// residual drives the wheel's angular acceleration.
WheelStepResult step_wheel(
	const WheelState& wheel, double tau_cmd, const world::TerrainSample& terrain,
	const RobotParams& p, double dt);

/// One explicit-Euler step of the whole robot: both wheels, then the
/// unicycle pose integration with the heading renormalized.
RobotState step_robot(
	const RobotState& state, double tau_right, double tau_left,
	const world::World& w, const RobotParams& p, double dt);

/// Encoder measurement, optionally corrupted by white Gaussian noise drawn
/// from the per-wheel streams.
std::pair<double, double> measure_encoders(
	const RobotState& state, EncoderModel& model);

/// First-order motor model constants (K_m, tau_motor) = (k_tau/b, J/b).
std::pair<double, double> motor_first_order(const RobotParams& p);

}  // namespace greenbench::physics
