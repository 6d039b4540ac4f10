#pragma once

#include <stdexcept>
#include <vector>

#include "greenbench/geometry.hpp"
#include "greenbench/world.hpp"

namespace greenbench::planner
{

class PlannerError : public std::runtime_error
{
	using std::runtime_error::runtime_error;
};

/// Goal unreachable, expansion cap hit, or no free cell near start/goal.
class NoPathError : public PlannerError
{
	using PlannerError::PlannerError;
};

struct Cell
{
	int col = 0;
	int row = 0;

	bool operator==(const Cell& o) const = default;
};

struct PlannerConfig
{
	int how_many_corners = 8;  // graph connectivity, 4 or 8
	double w_euc = 1.0;		   // Euclidean edge-cost weight
	double w_traversal = 1.0;  // obstacle-proximity penalty weight
	int n_max = 200000;		   // node expansion cap
};

struct Path
{
	std::vector<Vec2> nodes;  // world coordinates, start..goal
	double cost = 0.0;		  // total weighted cost
};

/// Optional search diagnostics for property tests.
struct PlannerStats
{
	std::vector<double> popped_f;  // f = g + h of every expanded node, in order
	int expansions = 0;
};

/// All cells touched by the segment between the centers of a and b
/// (corner-inclusive supercover; passing exactly through a corner reports
/// both adjacent cells).
std::vector<Cell> supercover(const Cell& a, const Cell& b);

/// True iff no cell of the supercover of a--b is occupied.
bool line_of_sight(const world::OccupancyGrid& grid, const Cell& a, const Cell& b);

/// Euclidean distance between cell centers in world units.
double heuristic(const world::OccupancyGrid& grid, const Cell& n, const Cell& goal);

/// Per-cell proximity penalty: (3 - d) for cells within Chebyshev distance
/// d <= 3 of an occupied cell, 0 elsewhere. Scaled by w_traversal when used.
std::vector<double> traversal_cost_field(const world::OccupancyGrid& grid);

/// Lazy Theta* between free cells. Deferred line-of-sight validation: an
/// expanded node whose any-angle parent fails the check is re-parented to
/// its best closed grid neighbor. Throws NoPathError when the goal is
/// unreachable or n_max expansions are exceeded.
Path lazy_theta_star(
	const world::OccupancyGrid& grid, const Cell& start, const Cell& goal,
	const PlannerConfig& config, PlannerStats* stats = nullptr);

/// World-coordinate front end: snaps start/goal to the nearest free cell
/// within 0.5 m (NoPathError otherwise) and plans between them.
Path plan(
	const world::OccupancyGrid& grid, const Vec2& start, const Vec2& goal,
	const PlannerConfig& config, PlannerStats* stats = nullptr);

/// Periodic replanning wrapper: re-invokes the planner from the current pose
/// every `period` seconds of simulated time, keeping the last plan otherwise.
class Replanner
{
public:
	Replanner(const Vec2& goal, const PlannerConfig& config, double period = 2.0);

	/// Returns the active plan, replanning first when the period elapsed
	/// (and always on the first call).
	const Path& update(
		const world::OccupancyGrid& grid, const Vec2& pose, double time);

	const Path& current() const { return path_; }
	bool has_plan() const { return has_plan_; }

private:
	Vec2 goal_;
	PlannerConfig config_;
	double period_;
	double last_plan_time_ = 0.0;
	bool has_plan_ = false;
	Path path_;
};

}  // namespace greenbench::planner
