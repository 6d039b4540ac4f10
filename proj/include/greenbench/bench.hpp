#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "greenbench/low_level.hpp"
#include "greenbench/metrics.hpp"
#include "greenbench/mid_level.hpp"
#include "greenbench/physics.hpp"
#include "greenbench/planner.hpp"
#include "greenbench/world.hpp"

namespace greenbench::bench
{

class BenchError : public std::runtime_error
{
	using std::runtime_error::runtime_error;
};

struct ScenarioConfig
{
	int category = 1;
	double payload = 0.0;  // [kg], 0..70
	bool terrain_slope = false;
	bool change_terrain = false;
	bool noise = true;
	int trials = 1;
	uint64_t seed = 0;
	std::string out_dir = ".";
	std::string params_file;  // optional per-category parameter file
	std::string world_file;	  // optional world override

	// resolved at load time from params_file (or the documented defaults)
	low_level::PidGains gains{};
	low_level::FeedforwardConfig feedforward{};
	mid_level::MidLevelConfig mid{};
	planner::PlannerConfig plan{};
	std::vector<Vec2> waypoints = {{10.2, 13.7}, {15.0, 13.7}, {18.0, 17.4}};
	Vec2 goal{18.0, 17.4};
	double encoder_sigma = 0.02;  // [rad/s]
	double duration_cat1 = 60.0;  // [s]
	double timeout_cat2 = 160.0;  // [s]
	double timeout_cat3 = 200.0;  // [s]
	double replan_period = 2.0;	  // [s]
};

/// Per-wheel inner-loop plugin: wheel speed references and measurements in,
/// torques out, called at 100 Hz.
class LowLevelController
{
public:
	virtual ~LowLevelController() = default;
	virtual void reset() = 0;
	virtual std::pair<double, double> step(
		double ref_right, double ref_left, double meas_right, double meas_left,
		const world::TerrainSample& terrain, const physics::RobotParams& params,
		double dt) = 0;
};

/// Trajectory-tracker plugin, called at 10 Hz.
class MidLevelController
{
public:
	virtual ~MidLevelController() = default;
	virtual void reset() = 0;
	virtual mid_level::MpcCommand step(
		const mid_level::Pose& measured, const std::vector<Vec2>& waypoints,
		const std::vector<mid_level::ObstacleObservation>& obstacles) = 0;
};

/// Global-planner plugin, called every replan period.
class GlobalPlanner
{
public:
	virtual ~GlobalPlanner() = default;
	virtual planner::Path plan(
		const world::OccupancyGrid& grid, const Vec2& start,
		const Vec2& goal) = 0;
};

struct PluginSet
{
	std::shared_ptr<LowLevelController> low_level;
	std::shared_ptr<MidLevelController> mid_level;
	std::shared_ptr<GlobalPlanner> global;

	/// The reference implementations, configured from `config`.
	static PluginSet baseline(const ScenarioConfig& config);
};

struct TrialResult
{
	metrics::TrialLog log;
	metrics::MetricReport report;
	bool failed = false;
	bool goal_reached = false;
	std::string failure_cause;
	/// Smallest robot-surface-to-obstacle-surface distance seen (categories 2
	/// and 3; +inf for category 1 and empty missions).
	double min_clearance = std::numeric_limits<double>::infinity();
};

/// Category 1: open-loop wheel-speed reference profile through the inner
/// loop only (ramp at t = 4 s, hold, 180 deg rotation, forward leg, stop).
TrialResult run_category1(const ScenarioConfig& config, PluginSet& plugins);

/// Category 2: fixed waypoint list tracked by the mid-level controller over
/// the inner loop; ends at the last waypoint or the timeout.
TrialResult run_category2(const ScenarioConfig& config, PluginSet& plugins);

/// Category 3: global planner replans every 2 s toward the goal; the
/// mid-level tracks the plan's nodes.
TrialResult run_category3(const ScenarioConfig& config, PluginSet& plugins);

/// Dispatch on config.category.
TrialResult run_trial(const ScenarioConfig& config, PluginSet& plugins);

struct AggregateCell
{
	bool slope = false;
	bool change = false;
	double payload = 0.0;
	int trials_ok = 0;
	int trials_failed = 0;
	metrics::MetricReport mean;
	metrics::MetricReport stddev;
};

struct AggregateTable
{
	int category = 1;
	std::vector<AggregateCell> cells;
};

/// {slope off/on} x {terrain change off/on} x {payload 0, 70} x trials, with
/// derived per-trial seeds. Failed trials are excluded from the aggregates.
AggregateTable run_matrix(const ScenarioConfig& config, PluginSet& plugins);

/// Mean and sample standard deviation over per-trial reports.
std::pair<metrics::MetricReport, metrics::MetricReport> aggregate(
	const std::vector<metrics::MetricReport>& reports);

/// Writes <out_dir>/result/category_<nc>/<timestamp>.csv and returns the
/// path. `timestamp` empty -> wall clock, formatted yyyy_mm_dd_hh_mm_ss;
/// tests inject a fixed value for byte-determinism.
std::string export_csv(
	const metrics::TrialLog& log, const metrics::MetricReport& report,
	const std::string& out_dir, const std::string& timestamp = "");

std::string format_table(const AggregateTable& table);

/// Full command-line front end. Exit codes: 0 success, 1 trial failure,
/// 2 usage/config error.
int cli_main(int argc, const char* const* argv);

/// Parameter-file loader (same structured-text dialect as the world config);
/// unknown keys are rejected, missing keys keep the documented defaults.
void load_params(ScenarioConfig& config, const std::string& text);

/// The world for a scenario: `world_file` when set, the built-in greenhouse
/// otherwise, with payload/slope/terrain-change flags applied.
world::World make_world(const ScenarioConfig& config);

}  // namespace greenbench::bench
