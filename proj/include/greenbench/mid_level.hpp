#pragma once

#include <stdexcept>
#include <vector>

#include "greenbench/geometry.hpp"
#include "greenbench/rng.hpp"
#include "greenbench/world.hpp"

namespace greenbench::mid_level
{

class MidLevelError : public std::runtime_error
{
	using std::runtime_error::runtime_error;
};

struct Pose
{
	double x = 0.0;
	double y = 0.0;
	double theta = 0.0;
};

/// One elastic-band node: predicted state, the input applied over the
/// interval that follows it, and the elastic interval length itself.
struct BandNode
{
	Pose state{};
	double v = 0.0;		 // [m/s]
	double omega = 0.0;	 // [rad/s]
	double dt = 0.1;	 // elastic interval [s]
};

struct ElasticBand
{
	std::vector<BandNode> nodes;  // length P >= 2; node 0 pinned to the robot
	Vec2 reference{};			  // active goal / waypoint
};

struct MidLevelConfig
{
	double q_diag[2] = {50.0, 50.0};  // positional tracking weights
	double r_diag[2] = {0.5, 1.0};	  // input weights (v, omega)
	double lambda_t = 1.0;			  // temporal weight on dt_k
	double d_safe = 0.5;			  // [m]
	double r_robot = 0.3;			  // footprint radius [m]
	double v_max = 1.0;				  // [m/s]
	double omega_max = 3.2;			  // [rad/s]
	double max_node_spacing = 0.4;	  // [m]
	double success_tolerance = 0.2;	  // waypoint acceptance radius [m]
	int iteration_budget = 50;		  // solver iterations per control step
	double dt_min = 0.05;			  // elastic interval bounds [s]
	double dt_max = 1.0;
	double control_period = 0.1;  // receding-horizon period [s]
	int max_nodes = 64;
};

/// A lidar return: which obstacle, the measured clearance from the robot
/// center to its surface, and the measurement bias (range - true clearance)
/// that the collision constraints inherit.
struct ObstacleObservation
{
	world::Obstacle obstacle;
	double range = 0.0;
	double bias = 0.0;
};

/// Discretized unicycle dynamics, Euler, heading renormalized.
Pose propagate(const Pose& state, double v, double omega, double dt);

struct CostBreakdown
{
	double tracking = 0.0;
	double input = 0.0;
	double temporal = 0.0;
	double defect = 0.0;	 // penalty-weighted dynamics violation
	double bounds = 0.0;	 // penalty-weighted velocity-bound violation
	double collision = 0.0;	 // penalty-weighted clearance violation

	double total() const
	{
		return tracking + input + temporal + defect + bounds + collision;
	}
};

/// Full band objective: tracking + effort + temporal terms plus quadratic
/// penalties (weight `penalty_weight`) for dynamics defects, velocity-bound
/// and clearance violations.
CostBreakdown band_cost(
	const ElasticBand& band, const std::vector<ObstacleObservation>& obstacles,
	const MidLevelConfig& config, double penalty_weight);

struct OptimizeResult
{
	ElasticBand band;
	bool converged = false;		// dynamics defect within tolerance
	double max_defect = 0.0;	// [m] worst node-to-node defect
	double final_penalty_weight = 0.0;
	// accepted penalized cost per iteration, one trace per penalty ramp
	// (cost is only comparable while the penalty weight is fixed)
	std::vector<std::vector<double>> cost_traces;
};

/// Penalty-method damped Gauss-Newton on the band. The returned band's
/// penalized cost never exceeds the input band's; a final hard projection
/// clamps |v| <= v_max, |omega| <= omega_max and dt into bounds.
OptimizeResult optimize_band(
	const ElasticBand& band, const std::vector<ObstacleObservation>& obstacles,
	const MidLevelConfig& config);

struct MpcCommand
{
	double v = 0.0;
	double omega = 0.0;
	Vec2 predicted{};  // pose forecast one control period ahead
	bool done = false;
	bool converged = true;
	ElasticBand band;
	size_t waypoint_index = 0;
};

/// One receding-horizon step: advance the active waypoint when inside the
/// success tolerance, warm-start from the previous band (node 0 re-pinned to
/// the measured state), optimize, and emit the first input. All waypoints
/// consumed -> zero command with done = true.
MpcCommand mpc_step(
	const Pose& measured, const std::vector<Vec2>& waypoints,
	const std::vector<ObstacleObservation>& obstacles,
	const MidLevelConfig& config, const ElasticBand* previous_band,
	size_t waypoint_index);

/// Simulated rangefinder: per-obstacle clearance from the robot center, with
/// range-dependent Gaussian noise (sigma 10 mm under 1 m, 1% of range from
/// 1 to 4 m); obstacles beyond 4 m are not observed.
std::vector<ObstacleObservation> lidar_ranges(
	const Pose& state, const std::vector<world::Obstacle>& obstacles,
	bool noise, RandomStream& rng);

}  // namespace greenbench::mid_level
