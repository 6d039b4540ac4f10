// Acceptance gate: one check per release criterion, [PASS]/[FAIL] per line,
// nonzero exit code when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "greenbench/bench.hpp"
#include "greenbench/low_level.hpp"
#include "greenbench/metrics.hpp"
#include "greenbench/mid_level.hpp"
#include "greenbench/physics.hpp"
#include "greenbench/planner.hpp"
#include "greenbench/rng.hpp"
#include "greenbench/world.hpp"

using namespace greenbench;
namespace fs = std::filesystem;

namespace
{

int g_failures = 0;
int g_checks = 0;

void report(const std::string& name, bool ok, const std::string& detail = "")
{
	++g_checks;
	std::printf(
		"[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
		detail.empty() ? "" : ": ", detail.c_str());
	if (!ok) ++g_failures;
}

class Stopwatch
{
public:
	Stopwatch() : start_(std::chrono::steady_clock::now()) {}
	double seconds() const
	{
		return std::chrono::duration<double>(
				   std::chrono::steady_clock::now() - start_)
			.count();
	}

private:
	std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v)
{
	char buf[64];
	std::snprintf(buf, sizeof(buf), "%.6g", v);
	return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: inner-loop pole placement
// ---------------------------------------------------------------------------

void criterion1_poles()
{
	Stopwatch sw;
	const auto [dominant, fast] =
		low_level::closed_loop_poles(1.33, 2.97, 70.0, 40.0);
	const bool dominant_ok = std::abs(dominant - (-0.576)) / 0.576 <= 1e-3;
	const bool fast_ok = std::abs(fast - (-31.11)) / 31.11 <= 1e-3;
	const bool placement_ok = std::abs(dominant - (-0.6)) <= 0.1 * 0.6 &&
							  std::abs(fast - (-31.25)) <= 0.1 * 31.25;
	report(
		"criterion 1: closed-loop poles {-0.576, -31.11} (rel 1e-3) and "
		"within 10% of the {-0.6, -31.25} placement",
		dominant_ok && fast_ok && placement_ok && sw.seconds() < 1.0,
		"poles " + fmt(dominant) + ", " + fmt(fast) + " in " +
			fmt(sw.seconds()) + " s");
}

// ---------------------------------------------------------------------------
// criterion 2: first-order motor constants
// ---------------------------------------------------------------------------

void criterion2_motor()
{
	physics::RobotParams p;	 // J = 2.22, b = 0.75, k_tau = 1
	const auto [k_m, tau_m] = physics::motor_first_order(p);
	report(
		"criterion 2: motor constants K_m = 1.333 +- 0.005, tau = 2.96 +- 0.01",
		std::abs(k_m - 1.333) <= 0.005 && std::abs(tau_m - 2.96) <= 0.01,
		"K_m " + fmt(k_m) + ", tau " + fmt(tau_m));
}

// ---------------------------------------------------------------------------
// criterion 3: category-1 condition trends
// ---------------------------------------------------------------------------

const bench::AggregateCell& find_cell(
	const bench::AggregateTable& table, bool change, bool slope, double payload)
{
	for (const bench::AggregateCell& c : table.cells)
		if (c.change == change && c.slope == slope && c.payload == payload)
			return c;
	throw std::logic_error("matrix cell missing");
}

void criterion3_category1_trends()
{
	Stopwatch sw;
	bench::ScenarioConfig config;
	config.category = 1;
	config.trials = 3;
	config.noise = true;
	config.seed = 2024;
	bench::PluginSet plugins = bench::PluginSet::baseline(config);
	const bench::AggregateTable table = bench::run_matrix(config, plugins);

	int orderings = 0;
	for (const bool change : {false, true})
		for (const bool slope : {false, true})
			if (find_cell(table, change, slope, 0.0).mean.sae1 <
				find_cell(table, change, slope, 70.0).mean.sae1)
				++orderings;
	for (const bool change : {false, true})
		for (const double payload : {0.0, 70.0})
			if (find_cell(table, change, false, payload).mean.sae1 <
				find_cell(table, change, true, payload).mean.sae1)
				++orderings;
	report(
		"criterion 3a: payload and slope each degrade SAE_1 in every matrix "
		"condition (8 orderings, 3 noisy trials per cell)",
		orderings == 8 && sw.seconds() < 30.0,
		std::to_string(orderings) + "/8 orderings in " + fmt(sw.seconds()) +
			" s");

	const double sae1_flat = find_cell(table, false, false, 0.0).mean.sae1;
	report(
		"criterion 3b: baseline-cell SAE_1 within [0.01, 1.0]",
		sae1_flat >= 0.01 && sae1_flat <= 1.0, "measured " + fmt(sae1_flat));
}

// ---------------------------------------------------------------------------
// criterion 4: category-2 waypoint mission
// ---------------------------------------------------------------------------

void criterion4_category2()
{
	Stopwatch sw;
	bench::ScenarioConfig config;
	config.category = 2;
	config.noise = true;
	config.seed = 42;
	bench::PluginSet plugins = bench::PluginSet::baseline(config);
	const bench::TrialResult r = bench::run_category2(config, plugins);

	bool waypoints_ok = true;
	double worst_pass = 0.0;
	for (const Vec2& wp : config.waypoints)
	{
		double closest = std::numeric_limits<double>::infinity();
		for (const metrics::LogRow& row : r.log.rows)
			closest = std::min(closest, distance({row.x, row.y}, wp));
		worst_pass = std::max(worst_pass, closest);
		if (closest > 0.2) waypoints_ok = false;
	}
	bool bounds_ok = true;
	for (const metrics::LogRow& row : r.log.rows)
		if (std::abs(row.v_cmd) > 1.0 + 1e-9 ||
			std::abs(row.omega_cmd) > 3.2 + 1e-9)
			bounds_ok = false;

	report(
		"criterion 4: category 2 visits all waypoints within 0.2 m, bounded "
		"commands, min clearance >= 0.49 m, under 60 s",
		!r.failed && r.goal_reached && waypoints_ok && bounds_ok &&
			r.min_clearance >= 0.49 && sw.seconds() < 60.0,
		"worst waypoint pass " + fmt(worst_pass) + " m, min clearance " +
			fmt(r.min_clearance) + " m, " + fmt(sw.seconds()) + " s");
}

// ---------------------------------------------------------------------------
// criterion 5: category-3 planning
// ---------------------------------------------------------------------------

/// Edge cost oracle identical in spirit to the planner's: weighted Euclidean
/// length plus per-cell proximity penalties over the supercover, source
/// excluded.
double oracle_edge_cost(
	const world::OccupancyGrid& g, const std::vector<double>& field,
	const planner::PlannerConfig& cfg, const planner::Cell& a,
	const planner::Cell& b)
{
	double cost = cfg.w_euc * g.resolution *
				  std::hypot(double(b.col - a.col), double(b.row - a.row));
	for (const planner::Cell& c : planner::supercover(a, b))
	{
		if (c == a) continue;
		cost += cfg.w_traversal *
				field[static_cast<size_t>(c.row) * g.width + c.col];
	}
	return cost;
}

/// Plain 8-connected A* over the same edge-cost model; returns the optimal
/// grid-path cost (an upper bound for any-angle planning).
double astar8_cost(
	const world::OccupancyGrid& g, const planner::Cell& start,
	const planner::Cell& goal, const planner::PlannerConfig& cfg)
{
	const std::vector<double> field = planner::traversal_cost_field(g);
	const size_t n = static_cast<size_t>(g.width) * g.height;
	std::vector<double> dist(n, std::numeric_limits<double>::infinity());
	using Item = std::pair<double, size_t>;
	std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
	const auto index = [&](const planner::Cell& c) {
		return static_cast<size_t>(c.row) * g.width + c.col;
	};
	dist[index(start)] = 0.0;
	open.push({planner::heuristic(g, start, goal), index(start)});
	while (!open.empty())
	{
		const auto [f, i] = open.top();
		open.pop();
		const planner::Cell c{static_cast<int>(i % g.width),
							  static_cast<int>(i / g.width)};
		if (c == goal) return dist[i];
		if (f > dist[i] + planner::heuristic(g, c, goal) + 1e-12) continue;
		for (int dc = -1; dc <= 1; ++dc)
			for (int dr = -1; dr <= 1; ++dr)
			{
				if (dc == 0 && dr == 0) continue;
				const planner::Cell m{c.col + dc, c.row + dr};
				if (!g.in_grid(m.col, m.row)) continue;
				bool passable = true;
				for (const planner::Cell& s : planner::supercover(c, m))
					if (g.occupied(s.col, s.row)) passable = false;
				if (!passable) continue;
				const double nd =
					dist[i] + oracle_edge_cost(g, field, cfg, c, m);
				if (nd < dist[index(m)] - 1e-15)
				{
					dist[index(m)] = nd;
					open.push({nd + planner::heuristic(g, m, goal), index(m)});
				}
			}
	}
	return std::numeric_limits<double>::infinity();
}

void criterion5_category3()
{
	Stopwatch sw;
	bench::ScenarioConfig config;
	config.category = 3;
	config.noise = true;
	config.seed = 1;
	const world::World w = bench::make_world(config);
	const world::OccupancyGrid grid = world::rasterize(w, 0.1, 0.3);
	const planner::PlannerConfig pcfg;

	const Vec2 start{10.1, 3.0};
	const planner::Path path = planner::plan(grid, start, config.goal, pcfg);

	bool los_ok = !path.nodes.empty();
	for (size_t i = 0; i + 1 < path.nodes.size(); ++i)
	{
		const auto [c0, r0] = grid.cell_of(path.nodes[i]);
		const auto [c1, r1] = grid.cell_of(path.nodes[i + 1]);
		if (!planner::line_of_sight(grid, {c0, r0}, {c1, r1})) los_ok = false;
	}

	// any-angle dominance is a uniform-cost property: compare without the
	// traversal penalty, against the identically weighted grid optimum
	planner::PlannerConfig uniform = pcfg;
	uniform.w_traversal = 0.0;
	const planner::Path upath =
		planner::plan(grid, start, config.goal, uniform);
	const auto [sc, sr] = grid.cell_of(upath.nodes.front());
	const auto [gc, gr] = grid.cell_of(upath.nodes.back());
	const double grid_optimum = astar8_cost(grid, {sc, sr}, {gc, gr}, uniform);
	const bool cost_ok = upath.cost <= grid_optimum + 1e-9;

	report(
		"criterion 5a: greenhouse plan exists, every consecutive node pair "
		"keeps line of sight, cost <= the 8-connected grid optimum",
		los_ok && cost_ok,
		"uniform cost " + fmt(upath.cost) + " vs grid " + fmt(grid_optimum));

	bench::PluginSet plugins = bench::PluginSet::baseline(config);
	const bench::TrialResult r = bench::run_category3(config, plugins);
	const bool identity =
		r.report.jt3 == (r.report.j1 + r.report.j2 + r.report.j3) / 3.0;
	report(
		"criterion 5b: category 3 reaches the goal and JT_3 is the exact "
		"three-level mean",
		!r.failed && r.goal_reached && identity,
		"jt3 " + fmt(r.report.jt3) + ", " + fmt(sw.seconds()) + " s");
}

// ---------------------------------------------------------------------------
// criterion 6: physics invariants
// ---------------------------------------------------------------------------

void criterion6_physics()
{
	physics::RobotParams params;
	RandomStream rng(99, "acceptance_physics");

	bool clamp_ok = true;
	for (int i = 0; i < 10000; ++i)
	{
		world::TerrainSample terrain;
		terrain.sector = 1;
		terrain.mu = 0.1 + rng.uniform01() * 0.9;
		terrain.crr = rng.uniform01() * 0.1;
		terrain.cd = 0.5 + rng.uniform01();
		terrain.slope_deg = (rng.uniform01() - 0.5) * 8.0;
		physics::WheelState wheel;
		wheel.omega = (rng.uniform01() - 0.5) * 10.0;
		wheel.lateral_accel = (rng.uniform01() - 0.5) * 4.0;
		const double tau = (rng.uniform01() - 0.5) * 800.0;
		const physics::WheelStepResult res =
			physics::step_wheel(wheel, tau, terrain, params, 0.005);
		const double f_rmax =
			physics::max_friction(terrain.mu, params.mass_per_wheel());
		if (std::abs(res.f_long) > f_rmax + 1e-9 ||
			std::abs(res.f_lat) > f_rmax + 1e-9 ||
			!std::isfinite(res.wheel.omega))
			clamp_ok = false;
	}
	report(
		"criterion 6a: 10000 randomized wheel steps keep both tyre forces "
		"inside the friction clamp",
		clamp_ok);

	const world::World w = world::load_world(
		"bounds 0 0 20 20\nslope off\nsector 1 0.5 0.05 1.0\n"
		"poly 0 0 20 0 20 20 0 20\n");
	bool heading_ok = true;
	physics::RobotState state;
	state.position = {10.0, 10.0};
	for (int i = 0; i < 1000; ++i)
	{
		const double tr = (rng.uniform01() - 0.5) * 800.0;
		const double tl = (rng.uniform01() - 0.5) * 800.0;
		state = physics::step_robot(state, tr, tl, w, params, 0.005);
		if (!(state.heading > -M_PI && state.heading <= M_PI) ||
			!std::isfinite(state.v))
			heading_ok = false;
		if (!w.contains(state.position) ||
			distance(state.position, {10.0, 10.0}) > 8.0)
		{
			state.position = {10.0, 10.0};	// stay inside the world
			state.wheels = {};
			state.v = state.omega = 0.0;
		}
	}
	report(
		"criterion 6b: 1000 randomized robot steps keep the heading "
		"normalized to (-pi, pi]",
		heading_ok);

	// step-size oracle: once the constant-torque response has converged the
	// coarse integration agrees with a 10x finer one
	world::TerrainSample sand{3, 0.5, 0.05, 1.00, 0.0};
	physics::WheelState coarse, fine;
	for (int i = 0; i < 4000; ++i)	// 20 s, ~9 time constants
		coarse = physics::step_wheel(coarse, 50.0, sand, params, 0.005).wheel;
	for (int i = 0; i < 40000; ++i)
		fine = physics::step_wheel(fine, 50.0, sand, params, 0.0005).wheel;
	report(
		"criterion 6c: coarse vs 10x finer wheel integration within 1e-3 "
		"rad/s at constant-torque convergence",
		std::abs(coarse.omega - fine.omega) <= 1e-3,
		"difference " + fmt(std::abs(coarse.omega - fine.omega)));
}

// ---------------------------------------------------------------------------
// criterion 7: metric identities
// ---------------------------------------------------------------------------

void criterion7_metrics()
{
	RandomStream rng(7, "acceptance_metrics");
	bool ok = true;
	for (int trial = 0; trial < 1000 && ok; ++trial)
	{
		metrics::TrialLog log;
		log.category = 1 + static_cast<int>(rng.uniform01() * 3);
		log.category = std::min(log.category, 3);
		log.has_teb = log.category >= 2;
		log.has_plan = log.category == 3;
		const size_t n = 5 + static_cast<size_t>(rng.uniform01() * 40);
		for (size_t i = 0; i < n; ++i)
		{
			metrics::LogRow row;
			row.t = static_cast<double>(i) * log.dt_log;
			for (int s = 0; s < 2; ++s)
			{
				row.omega_ref[s] = (rng.uniform01() - 0.5) * 2.0;
				row.omega_meas[s] = (rng.uniform01() - 0.5) * 2.0;
				row.tau[s] = (rng.uniform01() - 0.5) * 800.0;
			}
			row.v_cmd = (rng.uniform01() - 0.5) * 2.0;
			row.omega_cmd = (rng.uniform01() - 0.5) * 6.0;
			row.x = rng.uniform01() * 20.0;
			row.y = rng.uniform01() * 20.0;
			row.x_teb = row.x + (rng.uniform01() - 0.5);
			row.y_teb = row.y + (rng.uniform01() - 0.5);
			row.plan_x = row.x + (rng.uniform01() - 0.5);
			row.plan_y = row.y + (rng.uniform01() - 0.5);
			log.rows.push_back(row);
		}
		const metrics::MetricReport r = metrics::composite(log);
		if (r.j1 != r.sae1 + r.sci1) ok = false;
		if (log.category >= 2 && r.jt2 != (r.j1 + r.j2) / 2.0) ok = false;
		if (log.category == 3 && r.jt3 != (r.j1 + r.j2 + r.j3) / 3.0)
			ok = false;

		// invariances of the underlying indices
		std::vector<double> e, neg, u, shifted;
		for (int i = 0; i < 20; ++i)
		{
			e.push_back((rng.uniform01() - 0.5) * 4.0);
			neg.push_back(-e.back());
			u.push_back((rng.uniform01() - 0.5) * 4.0);
			shifted.push_back(u.back() + 3.75);
		}
		if (metrics::sae(e) != metrics::sae(neg)) ok = false;
		if (std::abs(metrics::sci(u) - metrics::sci(shifted)) > 1e-9)
			ok = false;
	}
	report(
		"criterion 7: composite-metric identities and index invariances on "
		"1000 random logs",
		ok);
}

// ---------------------------------------------------------------------------
// criterion 8: slope feedforward benefit
// ---------------------------------------------------------------------------

std::vector<double> ff_closed_loop(
	const low_level::PidGains& gains, const low_level::FeedforwardConfig& ff,
	double omega_ref, double duration, double step_time, double step_deg)
{
	const physics::RobotParams params;
	low_level::LowLevelState ctl;
	physics::WheelState wheel;
	std::vector<double> omega;
	double tau = 0.0;
	const long n = std::lround(duration / 0.005);
	for (long k = 0; k < n; ++k)
	{
		const double t = k * 0.005;
		world::TerrainSample terrain{3, 0.5, 0.05, 1.00, 0.0};
		if (t >= step_time) terrain.slope_deg = step_deg;
		if (k % 2 == 0)
		{
			wheel.set_reference(omega_ref, 0.01);
			tau = low_level::low_level_step(
				ctl, gains, ff, omega_ref, wheel.omega, terrain, params, 0.01);
			omega.push_back(wheel.omega);
		}
		wheel = physics::step_wheel(wheel, tau, terrain, params, 0.005).wheel;
	}
	return omega;
}

void criterion8_feedforward()
{
	Stopwatch sw;
	const physics::RobotParams params;
	const low_level::PidGains gains;
	const world::TerrainSample sand{3, 0.5, 0.05, 1.00, 0.0};
	const double ks =
		low_level::identify_static_gain(sand, 0.0, -4.0, gains, params);
	const auto [km, tau_m] = physics::motor_first_order(params);
	(void)tau_m;

	low_level::FeedforwardConfig ff;
	ff.enabled = true;
	ff.k_s = ks;
	ff.k_ff = -ks / km;

	const auto peak = [](const std::vector<double>& omega) {
		double p = 0.0;
		for (size_t i = 3000; i < omega.size(); ++i)
			p = std::max(p, std::abs(omega[i] - 0.75));
		return p;
	};
	const auto baseline = ff_closed_loop(
		gains, low_level::FeedforwardConfig{}, 0.75, 45.0, 30.0, -4.0);
	const auto assisted = ff_closed_loop(gains, ff, 0.75, 45.0, 30.0, -4.0);
	const double dev_without = peak(baseline);
	const double dev_with = peak(assisted);

	report(
		"criterion 8: identified K_s is finite and the feedforward strictly "
		"shrinks the slope-entry transient, under 20 s",
		std::isfinite(ks) && ks != 0.0 && dev_with < dev_without &&
			dev_without > 0.0 && sw.seconds() < 20.0,
		"K_s " + fmt(ks) + ", transient " + fmt(dev_without) + " -> " +
			fmt(dev_with) + " in " + fmt(sw.seconds()) + " s");
}

// ---------------------------------------------------------------------------
// criterion 9: command-line reproducibility
// ---------------------------------------------------------------------------

std::string read_file(const fs::path& p)
{
	std::ifstream in(p, std::ios::binary);
	std::ostringstream os;
	os << in.rdbuf();
	return os.str();
}

void criterion9_reproducibility()
{
	const fs::path base = fs::temp_directory_path() / "greenbench_acceptance";
	fs::remove_all(base);
	const fs::path dir_a = base / "a";
	const fs::path dir_b = base / "b";
	fs::create_directories(dir_a);
	fs::create_directories(dir_b);

	const auto run = [](const fs::path& dir) {
		const std::string out = dir.string();
		const char* argv[] = {"greenbench",	 "--category", "1",
							  "--seed",		 "42",		   "--out-dir",
							  out.c_str(),	 "--timestamp",
							  "2000_01_01_00_00_00"};
		return bench::cli_main(9, argv);
	};
	const int code_a = run(dir_a);
	const int code_b = run(dir_b);
	const fs::path csv_a =
		dir_a / "result" / "category_1" / "2000_01_01_00_00_00.csv";
	const fs::path csv_b =
		dir_b / "result" / "category_1" / "2000_01_01_00_00_00.csv";
	const std::string a = read_file(csv_a);
	const std::string b = read_file(csv_b);
	report(
		"criterion 9: two identical seeded CLI runs produce byte-identical "
		"CSV exports",
		code_a == 0 && code_b == 0 && !a.empty() && a == b,
		fmt(double(a.size())) + " bytes");
}

// ---------------------------------------------------------------------------
// criterion 10: mid-level solver descent
// ---------------------------------------------------------------------------

void criterion10_solver()
{
	RandomStream rng(10, "acceptance_solver");
	bool monotone = true, converged = true;
	double worst_defect = 0.0;
	for (int trial = 0; trial < 100; ++trial)
	{
		mid_level::ElasticBand band;
		const double x0 = (rng.uniform01() - 0.5) * 4.0;
		const double y0 = (rng.uniform01() - 0.5) * 4.0;
		const double heading = (rng.uniform01() - 0.5) * 2.0 * M_PI;
		const double length = 1.0 + rng.uniform01() * 1.5;
		const double bearing = (rng.uniform01() - 0.5) * 2.0 * M_PI;
		const Vec2 goal{x0 + length * std::cos(bearing),
						y0 + length * std::sin(bearing)};
		band.reference = goal;
		const int n = 6 + static_cast<int>(rng.uniform01() * 6);
		for (int k = 0; k < n; ++k)
		{
			mid_level::BandNode node;
			const double t = static_cast<double>(k) / (n - 1);
			node.state.x = x0 + (goal.x - x0) * t;
			node.state.y = y0 + (goal.y - y0) * t;
			node.state.theta = k == 0 ? heading : bearing;
			node.v = length / (n - 1) / 0.2;
			node.dt = 0.2;
			band.nodes.push_back(node);
		}
		const mid_level::OptimizeResult res =
			mid_level::optimize_band(band, {}, mid_level::MidLevelConfig{});
		for (const auto& trace : res.cost_traces)
			for (size_t i = 1; i < trace.size(); ++i)
				if (trace[i] > trace[i - 1] + 1e-9) monotone = false;
		if (!res.converged || res.max_defect > 1e-3) converged = false;
		worst_defect = std::max(worst_defect, res.max_defect);
	}
	report(
		"criterion 10: 100 random band optimizations descend monotonically "
		"per penalty ramp and converge below the 1e-3 defect",
		monotone && converged, "worst defect " + fmt(worst_defect));
}

}  // namespace

int main()
{
	criterion1_poles();
	criterion2_motor();
	criterion3_category1_trends();
	criterion4_category2();
	criterion5_category3();
	criterion6_physics();
	criterion7_metrics();
	criterion8_feedforward();
	criterion9_reproducibility();
	criterion10_solver();

	std::printf("%d/%d checks passed\n", g_checks - g_failures, g_checks);
	return g_failures == 0 ? 0 : 1;
}
