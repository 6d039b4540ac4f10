#include "greenbench/low_level.hpp"

#include <cmath>
#include <stdexcept>

namespace greenbench::low_level
{

double reference_filter_step(
	LowLevelState& state, double omega_ref, double tau_f, int n_f, double dt)
{
	if (tau_f < 0.0 || n_f < 1 || dt <= 0.0)
		throw std::invalid_argument("reference filter: bad tau_f/n_f/dt");
	if (tau_f == 0.0)
	{
		state.filter_states.assign(static_cast<size_t>(n_f), omega_ref);
		return omega_ref;
	}
	if (static_cast<int>(state.filter_states.size()) != n_f)
		state.filter_states.assign(static_cast<size_t>(n_f), 0.0);
	const double a = 1.0 - std::exp(-dt / tau_f);
	double u = omega_ref;
	for (double& y : state.filter_states)
	{
		y += a * (u - y);
		u = y;
	}
	return u;
}

double pid_step(
	LowLevelState& state, const PidGains& gains, double omega_fil,
	double omega_meas, double dt)
{
	if (dt <= 0.0) throw std::invalid_argument("pid_step: dt must be > 0");
	const double e = omega_fil - omega_meas;

	// backward-Euler discretization of tau_d' + N tau_d = N e'
	const double n = gains.n_filter;
	const double tau_d =
		(state.deriv_state + n * (e - state.prev_error)) / (1.0 + n * dt);
	state.deriv_state = tau_d;

	const double integral_provisional =
		state.integral + gains.ki * dt * (e + state.prev_error) / 2.0;
	return gains.kp * e + integral_provisional + gains.kd * tau_d;
}

void antiwindup_update(
	LowLevelState& state, const PidGains& gains, double tau_unsat,
	double tau_sat, double error, double dt)
{
	if (dt <= 0.0) throw std::invalid_argument("antiwindup_update: dt must be > 0");
	state.integral += gains.ki * dt * (error + state.prev_error) / 2.0;
	if (gains.kaw > 0.0)
		state.integral += dt * (tau_sat - tau_unsat) / gains.kaw;
	state.prev_error = error;
	state.last_tau_unsat = tau_unsat;
	state.last_tau_sat = tau_sat;
}

double estimate_slope_torque(
	const world::TerrainSample& terrain, double mass_per_wheel, double omega,
	const physics::RobotParams& params)
{
	return physics::slope_torque(terrain, mass_per_wheel, omega, params);
}

double low_level_step(
	LowLevelState& state, const PidGains& gains, const FeedforwardConfig& ff,
	double omega_ref, double omega_meas, const world::TerrainSample& terrain,
	const physics::RobotParams& params, double dt)
{
	const double omega_fil =
		reference_filter_step(state, omega_ref, gains.tau_f, gains.n_f, dt);
	const double error = omega_fil - omega_meas;
	const double tau_pid = pid_step(state, gains, omega_fil, omega_meas, dt);

	double tau_mff = tau_pid;
	if (ff.enabled)
	{
		// payload is unmeasurable: the feedforward sees the nominal mass
		const double tau_slope = estimate_slope_torque(
			terrain, params.nominal_mass_per_wheel(), omega_meas, params);
		tau_mff += ff.k_ff * tau_slope;
	}

	const double tau_out = std::clamp(tau_mff, -params.tau_max, params.tau_max);
	antiwindup_update(state, gains, tau_mff, tau_out, error, dt);
	return tau_out;
}

std::pair<double, double> closed_loop_poles(
	double k_m, double tau_motor, double kp, double ki)
{
	if (tau_motor <= 0.0)
		throw std::invalid_argument("closed_loop_poles: tau_motor must be > 0");
	const double a = tau_motor;
	const double b = 1.0 + k_m * kp;
	const double c = k_m * ki;
	const double disc = b * b - 4.0 * a * c;
	if (disc < 0.0)
		throw std::invalid_argument("closed_loop_poles: complex pole pair");
	const double sq = std::sqrt(disc);
	// numerically stable quadratic roots
	const double q = -0.5 * (b + (b >= 0 ? sq : -sq));
	const double r1 = q / a;
	const double r2 = c / q;
	return (std::abs(r1) < std::abs(r2)) ? std::make_pair(r1, r2)
										 : std::make_pair(r2, r1);
}

namespace
{

struct WheelTrace
{
	std::vector<double> t;
	std::vector<double> omega;
};

/// Closed single-wheel loop on a fixed terrain whose slope angle is supplied
/// per time step. Noise-free.
WheelTrace run_single_wheel(
	const world::TerrainSample& base_terrain,
	const std::function<double(double)>& phi_deg_of_t, double omega_ref,
	const PidGains& gains, const physics::RobotParams& params,
	double duration, double control_dt, double physics_dt)
{
	LowLevelState ctl;
	physics::WheelState wheel;
	WheelTrace trace;
	double tau = 0.0;
	const int phys_per_ctl =
		std::max(1, static_cast<int>(std::llround(control_dt / physics_dt)));
	const int n_ctl = static_cast<int>(std::llround(duration / control_dt));
	double t = 0.0;
	for (int k = 0; k < n_ctl; ++k)
	{
		world::TerrainSample terrain = base_terrain;
		terrain.slope_deg = phi_deg_of_t(t);
		wheel.set_reference(omega_ref, control_dt);
		tau = low_level_step(
			ctl, gains, FeedforwardConfig{}, omega_ref, wheel.omega, terrain,
			params, control_dt);
		for (int s = 0; s < phys_per_ctl; ++s)
		{
			wheel = physics::step_wheel(wheel, tau, terrain, params, physics_dt)
						.wheel;
			t += physics_dt;
		}
		trace.t.push_back(t);
		trace.omega.push_back(wheel.omega);
	}
	return trace;
}

}  // namespace

double identify_static_gain(
	const world::TerrainSample& base_terrain, double phi1_deg, double phi2_deg,
	const PidGains& gains, const physics::RobotParams& params,
	const IdentificationConfig& cfg)
{
	if (phi1_deg == phi2_deg)
		throw std::invalid_argument(
			"identify_static_gain: degenerate slope pair (phi1 == phi2)");

	const double duration = cfg.settle_time + cfg.observe_time;
	const auto baseline = run_single_wheel(
		base_terrain, [&](double) { return phi1_deg; }, cfg.omega_ref, gains,
		params, duration, cfg.control_dt, cfg.physics_dt);
	const auto disturbed = run_single_wheel(
		base_terrain,
		[&](double t) { return t < cfg.settle_time ? phi1_deg : phi2_deg; },
		cfg.omega_ref, gains, params, duration, cfg.control_dt, cfg.physics_dt);

	// steady-state check right before the slope step
	size_t i_step = 0;
	while (i_step < baseline.t.size() && baseline.t[i_step] < cfg.settle_time)
		++i_step;
	if (i_step == 0 || i_step >= baseline.t.size())
		throw std::runtime_error("identify_static_gain: bad timing setup");
	const double omega_ss = baseline.omega[i_step - 1];
	if (std::abs(omega_ss - cfg.omega_ref) > cfg.steady_tol)
		throw std::runtime_error(
			"identify_static_gain: loop did not reach steady state (omega=" +
			std::to_string(omega_ss) + ")");

	// peak deviation of the disturbed run relative to the baseline; with
	// integral action the asymptotic difference is zero, so the static gain
	// is taken from the transient extremum
	double peak = 0.0;
	for (size_t i = i_step; i < baseline.omega.size(); ++i)
	{
		const double d = disturbed.omega[i] - baseline.omega[i];
		if (std::abs(d) > std::abs(peak)) peak = d;
	}

	world::TerrainSample t1 = base_terrain;
	t1.slope_deg = phi1_deg;
	world::TerrainSample t2 = base_terrain;
	t2.slope_deg = phi2_deg;
	const double m_pw = params.mass_per_wheel();
	const double dtau = physics::slope_torque(t2, m_pw, omega_ss, params) -
						physics::slope_torque(t1, m_pw, omega_ss, params);
	if (dtau == 0.0)
		throw std::runtime_error(
			"identify_static_gain: zero disturbance torque change");
	return peak / dtau;
}

}  // namespace greenbench::low_level
