#include "greenbench/physics.hpp"

#include <cmath>

namespace greenbench::physics
{

std::pair<double, double> inverse_kinematics(
	double v, double omega, const RobotParams& p)
{
	const double sum = 2.0 * v / p.wheel_radius;  // wR + wL
	const double dif = omega * p.wheel_separation / p.wheel_radius;	 // wR - wL
	return {(sum + dif) / 2.0, (sum - dif) / 2.0};
}

std::pair<double, double> forward_kinematics(
	double omega_right, double omega_left, const RobotParams& p)
{
	const double v = p.wheel_radius / 2.0 * (omega_right + omega_left);
	const double om =
		p.wheel_radius / p.wheel_separation * (omega_right - omega_left);
	return {v, om};
}

double max_friction(double mu, double mass_per_wheel)
{
	return mu * mass_per_wheel * kGravity;
}

double slope_torque(
	const world::TerrainSample& terrain, double mass_per_wheel, double omega,
	const RobotParams& p)
{
	const double phi = terrain.slope_rad();
	const double f_crr = terrain.crr * mass_per_wheel * kGravity * std::cos(phi);
	const double f_g = mass_per_wheel * kGravity * std::sin(phi);
	const double tau_damp = terrain.cd * omega;
	return (f_crr + f_g) * p.wheel_radius - tau_damp;
}

WheelStepResult step_wheel(
	const WheelState& wheel, double tau_cmd, const world::TerrainSample& terrain,
	const RobotParams& p, double dt)
{
	const double m_pw = p.mass_per_wheel();
	const double f_rmax = max_friction(terrain.mu, m_pw);

	const double f_lat_raw = wheel.lateral_accel * m_pw;
	const double f_lat = std::clamp(f_lat_raw, -f_rmax, f_rmax);

	const double tau_slope = slope_torque(terrain, m_pw, wheel.omega, p);
	// Only the slope/rolling-resistance force torque F_slope * r loads the
	// wheel here; the damping part of tau_slope is already represented by
	// the C_D omega terms below, and double-counting it would cancel the
	// damping out of the dynamics entirely. Rolling resistance opposes the
	// wheel's own direction of rotation (zero at rest), which keeps the
	// plant symmetric under (omega, tau) -> (-omega, -tau).
	const double phi = terrain.slope_rad();
	const double sgn = (wheel.omega > 0.0) - (wheel.omega < 0.0);
	const double f_slope_torque =
		(terrain.crr * m_pw * kGravity * std::cos(phi) * sgn +
		 m_pw * kGravity * std::sin(phi)) *
		p.wheel_radius;
	const double tau_eff = tau_cmd - f_slope_torque;

	const double f_long_raw =
		(tau_eff - p.wheel_rot_inertia * wheel.omega_ref_rate -
		 terrain.cd * wheel.omega) /
		p.wheel_radius;
	const double f_long = std::clamp(f_long_raw, -f_rmax, f_rmax);

	// The clamp residual drives the wheel: no slip (unclamped) freezes the
	// wheel speed; past the friction limit the excess torque accelerates it
	// as a first-order lag with time constant I_yy / C_D.
	const double alpha =
		p.wheel_radius * (f_long_raw - f_long) / p.wheel_rot_inertia;

	WheelStepResult out;
	out.wheel = wheel;
	out.wheel.omega = wheel.omega + alpha * dt;
	out.wheel.applied_torque = tau_cmd;
	out.wheel.slope_torque_actual = tau_slope;
	out.f_long = f_long;
	out.f_lat = f_lat;

	if (!std::isfinite(out.wheel.omega) || !std::isfinite(f_long) ||
		!std::isfinite(f_lat))
		throw PhysicsError(
			"non-finite wheel state (tau_cmd=" + std::to_string(tau_cmd) +
			", omega=" + std::to_string(wheel.omega) + ")");
	return out;
}

RobotState step_robot(
	const RobotState& state, double tau_right, double tau_left,
	const world::World& w, const RobotParams& p, double dt)
{
	const world::TerrainSample terrain = world::sector_at(w, state.position);

	RobotState next = state;
	next.wheels[kRight] =
		step_wheel(state.wheels[kRight], tau_right, terrain, p, dt).wheel;
	next.wheels[kLeft] =
		step_wheel(state.wheels[kLeft], tau_left, terrain, p, dt).wheel;

	const auto [v, om] = forward_kinematics(
		next.wheels[kRight].omega, next.wheels[kLeft].omega, p);
	next.v = v;
	next.omega = om;

	next.position.x = state.position.x + dt * v * std::cos(state.heading);
	next.position.y = state.position.y + dt * v * std::sin(state.heading);
	next.heading = wrap_angle(state.heading + dt * om);
	next.time = state.time + dt;

	// centripetal estimate feeding the next lateral-friction clamp
	const double a_wy = om * v;
	next.wheels[kRight].lateral_accel = a_wy;
	next.wheels[kLeft].lateral_accel = a_wy;

	if (!std::isfinite(next.position.x) || !std::isfinite(next.position.y) ||
		!std::isfinite(next.heading))
		throw PhysicsError("non-finite pose at t=" + std::to_string(state.time));
	return next;
}

std::pair<double, double> measure_encoders(
	const RobotState& state, EncoderModel& model)
{
	double right = state.wheels[kRight].omega;
	double left = state.wheels[kLeft].omega;
	if (model.enabled)
	{
		right += model.stream_right.gaussian(model.sigma);
		left += model.stream_left.gaussian(model.sigma);
	}
	return {right, left};
}

std::pair<double, double> motor_first_order(const RobotParams& p)
{
	if (p.viscous_friction == 0.0)
		throw std::invalid_argument("viscous friction b must be nonzero");
	return {p.torque_constant / p.viscous_friction,
			p.motor_inertia / p.viscous_friction};
}

}  // namespace greenbench::physics
