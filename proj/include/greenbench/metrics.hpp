#pragma once

#include <stdexcept>
#include <vector>

#include "greenbench/geometry.hpp"

namespace greenbench::metrics
{

class MetricError : public std::runtime_error
{
	using std::runtime_error::runtime_error;
};

/// One logged sample. Wheel-level fields are always present; the trajectory
/// fields (teb prediction, plan point) only when the category provides them.
struct LogRow
{
	double t = 0.0;
	double omega_ref[2] = {0.0, 0.0};	// raw references, [right, left]
	double omega_meas[2] = {0.0, 0.0};	// encoder measurements
	double omega_true[2] = {0.0, 0.0};	// noise-free wheel speeds
	double tau[2] = {0.0, 0.0};			// applied torques
	double v_cmd = 0.0;					// chassis command from the tracker
	double omega_cmd = 0.0;
	double x = 0.0, y = 0.0, theta = 0.0;
	double x_teb = 0.0, y_teb = 0.0;  // tracker's one-step-ahead prediction
	double plan_x = 0.0, plan_y = 0.0;	// closest point on the current plan
	double slope_deg = 0.0;
	int sector = 0;
	int waypoint_index = 0;
};

struct TrialLog
{
	int category = 1;
	double dt_log = 0.01;  // logging period [s]
	double dt_mid = 0.1;   // mid-level control period, normalizes e_k2 [s]
	double v_max = 1.0;
	double omega_max = 3.2;
	double tau_max = 400.0;
	bool has_teb = false;
	bool has_plan = false;
	std::vector<LogRow> rows;
};

struct MetricReport
{
	double sae1 = 0.0, sci1 = 0.0;
	double sae2 = 0.0, sci2 = 0.0;
	double sae3 = 0.0;
	double j1 = 0.0, j2 = 0.0, j3 = 0.0;
	double jt2 = 0.0, jt3 = 0.0;
	size_t n_samples = 0;
};

/// Sum of absolute errors.
double sae(const std::vector<double>& errors);

/// Sum of squared input increments.
double sci(const std::vector<double>& inputs);

/// Normalized wheel-level tracking error and torque effort:
/// e_k1 = (|e_R| + |e_L|)/(2 omega_max), u_k1 = (|tau_R| + |tau_L|)/(2 tau_max).
std::pair<std::vector<double>, std::vector<double>> category1_signals(
	const TrialLog& log);

/// Normalized chassis-level deviation from the tracker prediction and input
/// magnitude: e_k2 = dist(robot, teb)/(v_max dt_mid),
/// u_k2 = sqrt(v^2/v_max^2 + omega^2/omega_max^2).
std::pair<std::vector<double>, std::vector<double>> category2_signals(
	const TrialLog& log);

/// Distance from the robot to the closest point on the planned polyline,
/// as logged per sample.
std::vector<double> category3_error(const TrialLog& log);

/// Composite indices for the log's category:
/// J1 = SAE_1 + SCI_1; J2 = SAE_2 + SCI_2; J3 = SAE_3;
/// JT2 = (J1+J2)/2; JT3 = (J1+J2+J3)/3.
MetricReport composite(const TrialLog& log);

/// Distance from a point to a polyline (closest point over all segments);
/// used when logging plan_x/plan_y and exposed for the test oracles.
double polyline_distance(const std::vector<Vec2>& polyline, const Vec2& p);

}  // namespace greenbench::metrics
