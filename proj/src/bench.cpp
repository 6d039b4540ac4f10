#include "greenbench/bench.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "greenbench/config_text.hpp"
#include "greenbench/rng.hpp"

namespace greenbench::bench
{

namespace
{

constexpr double kPhysicsDt = 0.005;  // [s]
constexpr double kControlDt = 0.01;	  // low-level period [s]
constexpr double kMidDt = 0.1;		  // mid-level period [s]
constexpr double kLogDt = 0.01;		  // logging period [s]
const Vec2 kStartPos{10.1, 3.0};
constexpr double kStartHeading = 0.78;	// [rad]

class BaselineLowLevel : public LowLevelController
{
public:
	BaselineLowLevel(
		const low_level::PidGains& gains, const low_level::FeedforwardConfig& ff)
		: gains_(gains), ff_(ff)
	{
	}

	void reset() override
	{
		states_[0] = {};
		states_[1] = {};
	}

	std::pair<double, double> step(
		double ref_right, double ref_left, double meas_right, double meas_left,
		const world::TerrainSample& terrain, const physics::RobotParams& params,
		double dt) override
	{
		const double tau_r = low_level::low_level_step(
			states_[0], gains_, ff_, ref_right, meas_right, terrain, params, dt);
		const double tau_l = low_level::low_level_step(
			states_[1], gains_, ff_, ref_left, meas_left, terrain, params, dt);
		return {tau_r, tau_l};
	}

private:
	low_level::PidGains gains_;
	low_level::FeedforwardConfig ff_;
	low_level::LowLevelState states_[2];  // [right, left]
};

class BaselineMidLevel : public MidLevelController
{
public:
	explicit BaselineMidLevel(const mid_level::MidLevelConfig& config)
		: config_(config)
	{
		// The band is tracked imperfectly (inner-loop lag), so the optimizer
		// plans against a padded clearance margin; the configured d_safe
		// remains the margin the executed trajectory is judged by.
		config_.d_safe += kSafetyPadding;
	}

	void reset() override
	{
		has_band_ = false;
		waypoint_index_ = 0;
		// the commanded chassis velocities persist across replans: the robot
		// does not stop moving just because the plan was refreshed
	}

	mid_level::MpcCommand step(
		const mid_level::Pose& measured, const std::vector<Vec2>& waypoints,
		const std::vector<mid_level::ObstacleObservation>& obstacles) override
	{
		mid_level::MpcCommand cmd = mid_level::mpc_step(
			measured, waypoints, obstacles, config_,
			has_band_ ? &band_ : nullptr, waypoint_index_);
		band_ = cmd.band;
		has_band_ = !cmd.done;
		waypoint_index_ = cmd.waypoint_index;

		// The inner velocity loop has a ~2 s dominant time constant, so
		// applying the band's raw first input excites a limit cycle through
		// the plant lag. The baseline instead executes the optimized band as
		// a path: a pure-pursuit point tracker aims at a short-lookahead
		// point on the band, turns in place when badly misaligned, tapers
		// speed on waypoint approach, and acceleration-limits both channels.
		// The one-step prediction uses the command actually sent.
		if (!cmd.done)
		{
			const Vec2 target = lookahead_point(cmd.band, measured, kLookahead);
			const Vec2 far = lookahead_point(cmd.band, measured, 2.5 * kLookahead);
			const double heading_err = wrap_angle(
				std::atan2(target.y - measured.y, target.x - measured.x) -
				measured.theta);
			// slow down when the path bends ahead, so turns stay tight
			const double far_err = wrap_angle(
				std::atan2(far.y - measured.y, far.x - measured.x) -
				measured.theta);
			const double dist_wp = std::hypot(
				cmd.band.reference.x - measured.x,
				cmd.band.reference.y - measured.y);
			const double align = std::max(0.0, std::cos(heading_err));
			const double align_far = std::max(0.0, std::cos(far_err));
			const double v_des =
				std::min(kCruise, kApproachGain * dist_wp + 0.1);
			// turn in place until roughly facing the path
			const double v_target =
				std::abs(heading_err) > kTurnInPlace
					? 0.0
					: v_des * align * align * align_far * align_far;
			const double w_target =
				std::clamp(kHeadingGain * heading_err, -kTurnRate, kTurnRate);
			const double dv = kAccelV * config_.control_period;
			const double dw = kAccelW * config_.control_period;
			v_out_ = std::clamp(v_target, v_out_ - dv, v_out_ + dv);
			w_out_ = std::clamp(w_target, w_out_ - dw, w_out_ + dw);
		}
		else
		{
			v_out_ = 0.0;
			w_out_ = 0.0;
		}
		cmd.v = v_out_;
		cmd.omega = w_out_;
		const mid_level::Pose pred = mid_level::propagate(
			measured, cmd.v, cmd.omega, config_.control_period);
		cmd.predicted = {pred.x, pred.y};
		return cmd;
	}

private:
	static constexpr double kAccelV = 0.5;		   // [m/s^2]
	static constexpr double kAccelW = 1.5;		   // [rad/s^2]
	static constexpr double kLookahead = 1.2;	   // [m] along the band
	static constexpr double kSafetyPadding = 0.3;  // [m] planning margin
	static constexpr double kHeadingGain = 0.6;	   // [1/s]
	static constexpr double kTurnRate = 1.5;	   // [rad/s] commanded cap
	static constexpr double kApproachGain = 0.8;   // [1/s] waypoint taper
	static constexpr double kCruise = 0.8;		   // [m/s] cruise speed cap
	static constexpr double kTurnInPlace = 0.5;	   // [rad] drive/turn threshold

	/// Point on the band polyline `ahead` metres ahead of the robot; falls
	/// back to the active reference when the band is too short.
	Vec2 lookahead_point(
		const mid_level::ElasticBand& band, const mid_level::Pose& measured,
		double ahead) const
	{
		Vec2 prev{measured.x, measured.y};
		double remaining = ahead;
		for (size_t i = 1; i < band.nodes.size(); ++i)
		{
			const Vec2 node{band.nodes[i].state.x, band.nodes[i].state.y};
			const double seg = distance(prev, node);
			if (seg >= remaining && seg > 1e-9)
			{
				const double f = remaining / seg;
				return {prev.x + f * (node.x - prev.x),
						prev.y + f * (node.y - prev.y)};
			}
			remaining -= seg;
			prev = node;
		}
		return band.reference;
	}

	mid_level::MidLevelConfig config_;
	mid_level::ElasticBand band_;
	bool has_band_ = false;
	size_t waypoint_index_ = 0;
	double v_out_ = 0.0;
	double w_out_ = 0.0;
};

class BaselinePlanner : public GlobalPlanner
{
public:
	explicit BaselinePlanner(const planner::PlannerConfig& config)
		: config_(config)
	{
	}

	planner::Path plan(
		const world::OccupancyGrid& grid, const Vec2& start,
		const Vec2& goal) override
	{
		return planner::plan(grid, start, goal, config_);
	}

private:
	planner::PlannerConfig config_;
};

std::string read_file(const std::string& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in) throw BenchError("cannot open file: " + path);
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

/// Category-1 wheel-speed reference profile (right, left).
std::pair<double, double> category1_reference(
	double t, const physics::RobotParams& p)
{
	const double w = 0.75;	// [rad/s]
	// in-place 180-degree rotation time at opposed wheel speeds
	const double rot_rate = p.wheel_radius / p.wheel_separation * 2.0 * w;
	const double t_rot = M_PI / rot_rate;
	const double t_rot_end = 34.0 + t_rot;
	const double t_fwd_end = std::min(t_rot_end + 8.0, 50.0);
	if (t < 4.0) return {0.0, 0.0};
	if (t < 5.0) return {w * (t - 4.0), w * (t - 4.0)};	 // 1 s ramp
	if (t < 34.0) return {w, w};
	if (t < t_rot_end) return {-w, w};
	if (t < t_fwd_end) return {w, w};
	return {0.0, 0.0};
}

struct SimContext
{
	world::World w;
	physics::RobotParams params;
	physics::RobotState state;
	physics::EncoderModel encoders;
	RandomStream lidar_rng;
};

SimContext make_context(const ScenarioConfig& config, uint64_t seed)
{
	SimContext ctx;
	ctx.w = make_world(config);
	ctx.params.payload_mass = ctx.w.payload_mass;
	ctx.state.position = kStartPos;
	ctx.state.heading = kStartHeading;
	ctx.encoders.sigma = config.encoder_sigma;
	ctx.encoders.enabled = config.noise;
	ctx.encoders.stream_right = RandomStream(seed, "encoder_right");
	ctx.encoders.stream_left = RandomStream(seed, "encoder_left");
	ctx.lidar_rng = RandomStream(seed, "lidar");
	return ctx;
}

metrics::TrialLog make_log(const ScenarioConfig& config)
{
	metrics::TrialLog log;
	log.category = config.category;
	log.dt_log = kLogDt;
	log.dt_mid = kMidDt;
	log.v_max = config.mid.v_max;
	log.omega_max = config.mid.omega_max;
	log.tau_max = 400.0;
	log.has_teb = config.category >= 2;
	log.has_plan = config.category == 3;
	return log;
}

void append_row(
	metrics::TrialLog& log, const SimContext& ctx, double ref_r, double ref_l,
	double meas_r, double meas_l, double tau_r, double tau_l, double v_cmd,
	double omega_cmd, const Vec2& teb, const Vec2& plan_pt, int waypoint_index)
{
	metrics::LogRow row;
	row.t = ctx.state.time;
	row.omega_ref[0] = ref_r;
	row.omega_ref[1] = ref_l;
	row.omega_meas[0] = meas_r;
	row.omega_meas[1] = meas_l;
	row.omega_true[0] = ctx.state.wheels[physics::kRight].omega;
	row.omega_true[1] = ctx.state.wheels[physics::kLeft].omega;
	row.tau[0] = tau_r;
	row.tau[1] = tau_l;
	row.v_cmd = v_cmd;
	row.omega_cmd = omega_cmd;
	row.x = ctx.state.position.x;
	row.y = ctx.state.position.y;
	row.theta = ctx.state.heading;
	row.x_teb = teb.x;
	row.y_teb = teb.y;
	row.plan_x = plan_pt.x;
	row.plan_y = plan_pt.y;
	const world::TerrainSample terrain =
		world::sector_at(ctx.w, ctx.state.position);
	row.slope_deg = terrain.slope_deg;
	row.sector = terrain.sector;
	row.waypoint_index = waypoint_index;
	log.rows.push_back(row);
}

void finalize(TrialResult& result)
{
	if (!result.log.rows.empty())
		result.report = metrics::composite(result.log);
}

}  // namespace

world::World make_world(const ScenarioConfig& config)
{
	const std::string text = config.world_file.empty()
								 ? world::default_world_config()
								 : read_file(config.world_file);
	world::World w = world::load_world(text);
	w.payload_mass = config.payload;
	w.slope.enabled = config.terrain_slope;
	w.terrain_change_enabled = config.change_terrain;
	if (!config.change_terrain) w.make_uniform();
	return w;
}

PluginSet PluginSet::baseline(const ScenarioConfig& config)
{
	PluginSet set;
	set.low_level =
		std::make_shared<BaselineLowLevel>(config.gains, config.feedforward);
	set.mid_level = std::make_shared<BaselineMidLevel>(config.mid);
	set.global = std::make_shared<BaselinePlanner>(config.plan);
	return set;
}

TrialResult run_category1(const ScenarioConfig& config, PluginSet& plugins)
{
	if (config.duration_cat1 <= 0.0)
		throw BenchError("run_category1: zero-length simulation");
	SimContext ctx = make_context(config, config.seed);
	TrialResult result;
	result.log = make_log(config);
	plugins.low_level->reset();

	const int phys_per_ctl = static_cast<int>(std::llround(kControlDt / kPhysicsDt));
	const int phys_per_log = static_cast<int>(std::llround(kLogDt / kPhysicsDt));
	const long n_steps = std::lround(config.duration_cat1 / kPhysicsDt);

	double ref_r = 0.0, ref_l = 0.0, meas_r = 0.0, meas_l = 0.0;
	double tau_r = 0.0, tau_l = 0.0;
	try
	{
		for (long k = 0; k < n_steps; ++k)
		{
			if (k % phys_per_ctl == 0)
			{
				std::tie(ref_r, ref_l) =
					category1_reference(ctx.state.time, ctx.params);
				std::tie(meas_r, meas_l) =
					physics::measure_encoders(ctx.state, ctx.encoders);
				ctx.state.wheels[physics::kRight].set_reference(ref_r, kControlDt);
				ctx.state.wheels[physics::kLeft].set_reference(ref_l, kControlDt);
				const world::TerrainSample terrain =
					world::sector_at(ctx.w, ctx.state.position);
				std::tie(tau_r, tau_l) = plugins.low_level->step(
					ref_r, ref_l, meas_r, meas_l, terrain, ctx.params,
					kControlDt);
			}
			ctx.state = physics::step_robot(
				ctx.state, tau_r, tau_l, ctx.w, ctx.params, kPhysicsDt);
			if ((k + 1) % phys_per_log == 0)
				append_row(
					result.log, ctx, ref_r, ref_l, meas_r, meas_l, tau_r,
					tau_l, 0.0, 0.0, kStartPos, kStartPos, 0);
		}
		result.goal_reached = true;
	}
	catch (const std::exception& e)
	{
		result.failed = true;
		result.failure_cause = e.what();
	}
	finalize(result);
	return result;
}

namespace
{

/// Shared closed-loop core of categories 2 and 3. `get_waypoints` supplies
/// the active waypoint list per mid-level tick (and may replan); returns
/// true while the trial should continue.
TrialResult run_tracking(
	const ScenarioConfig& config, PluginSet& plugins, double timeout,
	const std::function<std::vector<Vec2>(SimContext&, double)>& get_waypoints,
	const std::function<Vec2(const Vec2&)>& plan_point, const Vec2& goal)
{
	SimContext ctx = make_context(config, config.seed);
	TrialResult result;
	result.log = make_log(config);
	plugins.low_level->reset();
	plugins.mid_level->reset();

	const int phys_per_ctl = static_cast<int>(std::llround(kControlDt / kPhysicsDt));
	const int phys_per_mid = static_cast<int>(std::llround(kMidDt / kPhysicsDt));
	const int phys_per_log = static_cast<int>(std::llround(kLogDt / kPhysicsDt));
	const long n_steps = std::lround(timeout / kPhysicsDt);

	double ref_r = 0.0, ref_l = 0.0, meas_r = 0.0, meas_l = 0.0;
	double tau_r = 0.0, tau_l = 0.0;
	double v_cmd = 0.0, omega_cmd = 0.0;
	Vec2 teb = ctx.state.position;
	int waypoint_index = 0;
	bool done = false;

	try
	{
		for (long k = 0; k < n_steps && !done; ++k)
		{
			if (k % phys_per_mid == 0)
			{
				const std::vector<Vec2> waypoints =
					get_waypoints(ctx, ctx.state.time);
				const mid_level::Pose pose{ctx.state.position.x,
										   ctx.state.position.y,
										   ctx.state.heading};
				const auto observations = mid_level::lidar_ranges(
					pose, ctx.w.obstacles, config.noise, ctx.lidar_rng);
				const mid_level::MpcCommand cmd =
					plugins.mid_level->step(pose, waypoints, observations);
				v_cmd = cmd.v;
				omega_cmd = cmd.omega;
				teb = cmd.predicted;
				waypoint_index = static_cast<int>(cmd.waypoint_index);
				if (cmd.done) done = true;
			}
			if (k % phys_per_ctl == 0)
			{
				std::tie(ref_r, ref_l) =
					physics::inverse_kinematics(v_cmd, omega_cmd, ctx.params);
				std::tie(meas_r, meas_l) =
					physics::measure_encoders(ctx.state, ctx.encoders);
				ctx.state.wheels[physics::kRight].set_reference(ref_r, kControlDt);
				ctx.state.wheels[physics::kLeft].set_reference(ref_l, kControlDt);
				const world::TerrainSample terrain =
					world::sector_at(ctx.w, ctx.state.position);
				std::tie(tau_r, tau_l) = plugins.low_level->step(
					ref_r, ref_l, meas_r, meas_l, terrain, ctx.params,
					kControlDt);
			}
			ctx.state = physics::step_robot(
				ctx.state, tau_r, tau_l, ctx.w, ctx.params, kPhysicsDt);
			if ((k + 1) % phys_per_log == 0)
			{
				const auto [clearance, id] =
					world::obstacle_clearance(ctx.w, ctx.state.position);
				result.min_clearance = std::min(
					result.min_clearance, clearance - config.mid.r_robot);
				if (clearance < config.mid.r_robot)
					throw BenchError(
						"contact with obstacle " + std::to_string(id) +
						" at t=" + std::to_string(ctx.state.time));
				append_row(
					result.log, ctx, ref_r, ref_l, meas_r, meas_l, tau_r,
					tau_l, v_cmd, omega_cmd, teb,
					plan_point(ctx.state.position), waypoint_index);
			}
		}
		result.goal_reached =
			done || distance(ctx.state.position, goal) <
						config.mid.success_tolerance;
		if (!result.goal_reached)
		{
			result.failed = true;
			result.failure_cause = "timeout before reaching the goal";
		}
	}
	catch (const std::exception& e)
	{
		result.failed = true;
		result.failure_cause = e.what();
	}
	finalize(result);
	return result;
}

}  // namespace

TrialResult run_category2(const ScenarioConfig& config, PluginSet& plugins)
{
	if (config.waypoints.empty())
	{
		// empty mission: immediately done, no motion
		TrialResult result;
		result.log = make_log(config);
		result.goal_reached = true;
		return result;
	}
	const Vec2 goal = config.waypoints.back();
	return run_tracking(
		config, plugins, config.timeout_cat2,
		[&](SimContext&, double) { return config.waypoints; },
		[](const Vec2& p) { return p; }, goal);
}

TrialResult run_category3(const ScenarioConfig& config, PluginSet& plugins)
{
	const world::World w = make_world(config);
	const world::OccupancyGrid grid =
		world::rasterize(w, 0.1, config.mid.r_robot);

	// replan state shared by the two callbacks below
	auto path = std::make_shared<planner::Path>();
	auto last_plan = std::make_shared<double>(-1.0);

	return run_tracking(
		config, plugins, config.timeout_cat3,
		[&, path, last_plan](SimContext& ctx, double t) {
			if (*last_plan < 0.0 ||
				t - *last_plan >= config.replan_period - 1e-9)
			{
				*path = plugins.global->plan(
					grid, ctx.state.position, config.goal);
				*last_plan = t;
				// fresh plan: restart waypoint tracking from its first node
				plugins.mid_level->reset();
			}
			std::vector<Vec2> waypoints(
				path->nodes.begin() + (path->nodes.size() > 1 ? 1 : 0),
				path->nodes.end());
			return waypoints;
		},
		[path](const Vec2& p) {
			if (path->nodes.empty()) return p;
			return closest_point_on_polyline(p, path->nodes);
		},
		config.goal);
}

TrialResult run_trial(const ScenarioConfig& config, PluginSet& plugins)
{
	switch (config.category)
	{
		case 1:
			return run_category1(config, plugins);
		case 2:
			return run_category2(config, plugins);
		case 3:
			return run_category3(config, plugins);
		default:
			throw BenchError("run_trial: category must be 1, 2 or 3");
	}
}

std::pair<metrics::MetricReport, metrics::MetricReport> aggregate(
	const std::vector<metrics::MetricReport>& reports)
{
	metrics::MetricReport mean, stddev;
	if (reports.empty()) return {mean, stddev};
	const double n = static_cast<double>(reports.size());

	const auto fields = [](metrics::MetricReport& r) {
		return std::array<double*, 10>{&r.sae1, &r.sci1, &r.sae2, &r.sci2,
									   &r.sae3, &r.j1,	 &r.j2,	  &r.j3,
									   &r.jt2,	&r.jt3};
	};
	for (const metrics::MetricReport& rep : reports)
	{
		auto src = fields(const_cast<metrics::MetricReport&>(rep));
		auto dst = fields(mean);
		for (size_t i = 0; i < src.size(); ++i) *dst[i] += *src[i] / n;
		mean.n_samples += rep.n_samples;
	}
	if (reports.size() > 1)
	{
		for (const metrics::MetricReport& rep : reports)
		{
			auto src = fields(const_cast<metrics::MetricReport&>(rep));
			auto mu = fields(mean);
			auto acc = fields(stddev);
			for (size_t i = 0; i < src.size(); ++i)
			{
				const double d = *src[i] - *mu[i];
				*acc[i] += d * d / (n - 1.0);
			}
		}
		auto acc = fields(stddev);
		for (double* p : acc) *p = std::sqrt(*p);
	}
	return {mean, stddev};
}

AggregateTable run_matrix(const ScenarioConfig& config, PluginSet& plugins)
{
	if (config.trials < 1) throw BenchError("run_matrix: trials must be >= 1");
	AggregateTable table;
	table.category = config.category;
	int cell_index = 0;
	for (const bool change : {false, true})
		for (const bool slope : {false, true})
			for (const double payload : {0.0, 70.0})
			{
				AggregateCell cell;
				cell.slope = slope;
				cell.change = change;
				cell.payload = payload;
				std::vector<metrics::MetricReport> reports;
				for (int t = 0; t < config.trials; ++t)
				{
					ScenarioConfig c = config;
					c.terrain_slope = slope;
					c.change_terrain = change;
					c.payload = payload;
					c.seed = trial_seed(
						config.seed,
						static_cast<uint64_t>(cell_index) * 1000 + t);
					PluginSet set = PluginSet::baseline(c);
					const TrialResult r = run_trial(c, set);
					if (r.failed)
						cell.trials_failed++;
					else
					{
						cell.trials_ok++;
						reports.push_back(r.report);
					}
				}
				std::tie(cell.mean, cell.stddev) = aggregate(reports);
				table.cells.push_back(cell);
				++cell_index;
			}
	(void)plugins;	// matrix cells rebuild baselines with per-cell configs
	return table;
}

namespace
{

std::string fmt6(double v)
{
	char buf[32];
	std::snprintf(buf, sizeof(buf), "%.6g", v);
	return buf;
}

std::string wall_clock_timestamp()
{
	const std::time_t now = std::time(nullptr);
	std::tm tm{};
#if defined(_WIN32)
	localtime_s(&tm, &now);
#else
	localtime_r(&now, &tm);
#endif
	char buf[80];
	std::snprintf(
		buf, sizeof(buf), "%04d_%02d_%02d_%02d_%02d_%02d", tm.tm_year + 1900,
		tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
	return buf;
}

}  // namespace

std::string export_csv(
	const metrics::TrialLog& log, const metrics::MetricReport& report,
	const std::string& out_dir, const std::string& timestamp)
{
	namespace fs = std::filesystem;
	const fs::path dir =
		fs::path(out_dir) / "result" /
		("category_" + std::to_string(log.category));
	std::error_code ec;
	fs::create_directories(dir, ec);
	if (ec)
		throw BenchError(
			"export_csv: cannot create " + dir.string() + ": " + ec.message());

	const std::string stamp =
		timestamp.empty() ? wall_clock_timestamp() : timestamp;
	const fs::path file = dir / (stamp + ".csv");
	std::ofstream out(file, std::ios::binary);
	if (!out) throw BenchError("export_csv: cannot open " + file.string());

	std::string header =
		"t,omega_ref_r,omega_ref_l,omega_meas_r,omega_meas_l,"
		"omega_true_r,omega_true_l,tau_r,tau_l,x,y,theta,slope_deg,sector";
	if (log.category >= 2) header += ",v_cmd,omega_cmd,x_teb,y_teb,waypoint";
	if (log.category == 3) header += ",plan_x,plan_y";
	out << header << "\n";

	for (const metrics::LogRow& r : log.rows)
	{
		out << fmt6(r.t) << ',' << fmt6(r.omega_ref[0]) << ','
			<< fmt6(r.omega_ref[1]) << ',' << fmt6(r.omega_meas[0]) << ','
			<< fmt6(r.omega_meas[1]) << ',' << fmt6(r.omega_true[0]) << ','
			<< fmt6(r.omega_true[1]) << ',' << fmt6(r.tau[0]) << ','
			<< fmt6(r.tau[1]) << ',' << fmt6(r.x) << ',' << fmt6(r.y) << ','
			<< fmt6(r.theta) << ',' << fmt6(r.slope_deg) << ',' << r.sector;
		if (log.category >= 2)
			out << ',' << fmt6(r.v_cmd) << ',' << fmt6(r.omega_cmd) << ','
				<< fmt6(r.x_teb) << ',' << fmt6(r.y_teb) << ','
				<< r.waypoint_index;
		if (log.category == 3)
			out << ',' << fmt6(r.plan_x) << ',' << fmt6(r.plan_y);
		out << "\n";
	}

	out << "# n_samples " << report.n_samples << "\n";
	out << "# sae1 " << fmt6(report.sae1) << "\n";
	out << "# sci1 " << fmt6(report.sci1) << "\n";
	out << "# j1 " << fmt6(report.j1) << "\n";
	if (log.category >= 2)
	{
		out << "# sae2 " << fmt6(report.sae2) << "\n";
		out << "# sci2 " << fmt6(report.sci2) << "\n";
		out << "# j2 " << fmt6(report.j2) << "\n";
		out << "# jt2 " << fmt6(report.jt2) << "\n";
	}
	if (log.category == 3)
	{
		out << "# sae3 " << fmt6(report.sae3) << "\n";
		out << "# j3 " << fmt6(report.j3) << "\n";
		out << "# jt3 " << fmt6(report.jt3) << "\n";
	}
	if (!out) throw BenchError("export_csv: write failed: " + file.string());
	return file.string();
}

std::string format_table(const AggregateTable& table)
{
	std::ostringstream os;
	os << "category " << table.category << " aggregate (mean +- std)\n";
	os << "slope,change,payload,trials_ok,trials_failed,"
		  "sae1,sae1_std,sci1,sci1_std,j1,j1_std";
	if (table.category >= 2) os << ",sae2,sae2_std,sci2,sci2_std,j2,j2_std,jt2,jt2_std";
	if (table.category == 3) os << ",sae3,sae3_std,j3,j3_std,jt3,jt3_std";
	os << "\n";
	for (const AggregateCell& c : table.cells)
	{
		os << (c.slope ? "on" : "off") << ',' << (c.change ? "on" : "off")
		   << ',' << fmt6(c.payload) << ',' << c.trials_ok << ','
		   << c.trials_failed << ',' << fmt6(c.mean.sae1) << ','
		   << fmt6(c.stddev.sae1) << ',' << fmt6(c.mean.sci1) << ','
		   << fmt6(c.stddev.sci1) << ',' << fmt6(c.mean.j1) << ','
		   << fmt6(c.stddev.j1);
		if (table.category >= 2)
			os << ',' << fmt6(c.mean.sae2) << ',' << fmt6(c.stddev.sae2) << ','
			   << fmt6(c.mean.sci2) << ',' << fmt6(c.stddev.sci2) << ','
			   << fmt6(c.mean.j2) << ',' << fmt6(c.stddev.j2) << ','
			   << fmt6(c.mean.jt2) << ',' << fmt6(c.stddev.jt2);
		if (table.category == 3)
			os << ',' << fmt6(c.mean.sae3) << ',' << fmt6(c.stddev.sae3) << ','
			   << fmt6(c.mean.j3) << ',' << fmt6(c.stddev.j3) << ','
			   << fmt6(c.mean.jt3) << ',' << fmt6(c.stddev.jt3);
		os << "\n";
	}
	return os.str();
}

void load_params(ScenarioConfig& config, const std::string& text)
{
	const ConfigText cfg = ConfigText::parse(text);
	static const std::vector<std::string> known = {
		"kp", "ki", "kd", "n_filter", "kaw", "tau_f", "n_f", "k_ff",
		"ff_enabled", "encoder_sigma", "q_diag", "r_diag", "lambda_t",
		"d_safe", "r_robot", "v_max", "omega_max", "max_node_spacing",
		"success_tolerance", "iteration_budget", "waypoints",
		"how_many_corners", "w_euc_cost", "w_traversal_cost", "n_max", "goal"};
	for (const ConfigEntry& e : cfg.entries())
	{
		if (std::find(known.begin(), known.end(), e.key) == known.end())
			throw ConfigError(e.line, "unknown parameter key: " + e.key);
	}

	config.gains.kp = cfg.get_double("kp", config.gains.kp);
	config.gains.ki = cfg.get_double("ki", config.gains.ki);
	config.gains.kd = cfg.get_double("kd", config.gains.kd);
	config.gains.n_filter = cfg.get_double("n_filter", config.gains.n_filter);
	config.gains.kaw = cfg.get_double("kaw", config.gains.kaw);
	config.gains.tau_f = cfg.get_double("tau_f", config.gains.tau_f);
	config.gains.n_f = cfg.get_int("n_f", config.gains.n_f);
	config.feedforward.k_ff =
		cfg.get_double("k_ff", config.feedforward.k_ff);
	config.feedforward.enabled =
		cfg.get_bool("ff_enabled", config.feedforward.enabled);
	config.encoder_sigma = cfg.get_double("encoder_sigma", config.encoder_sigma);

	if (cfg.has("q_diag"))
	{
		const auto q = cfg.get_doubles("q_diag");
		if (q.size() != 2) throw BenchError("q_diag needs two values");
		config.mid.q_diag[0] = q[0];
		config.mid.q_diag[1] = q[1];
	}
	if (cfg.has("r_diag"))
	{
		const auto r = cfg.get_doubles("r_diag");
		if (r.size() != 2) throw BenchError("r_diag needs two values");
		config.mid.r_diag[0] = r[0];
		config.mid.r_diag[1] = r[1];
	}
	config.mid.lambda_t = cfg.get_double("lambda_t", config.mid.lambda_t);
	config.mid.d_safe = cfg.get_double("d_safe", config.mid.d_safe);
	config.mid.r_robot = cfg.get_double("r_robot", config.mid.r_robot);
	config.mid.v_max = cfg.get_double("v_max", config.mid.v_max);
	config.mid.omega_max = cfg.get_double("omega_max", config.mid.omega_max);
	config.mid.max_node_spacing =
		cfg.get_double("max_node_spacing", config.mid.max_node_spacing);
	config.mid.success_tolerance =
		cfg.get_double("success_tolerance", config.mid.success_tolerance);
	config.mid.iteration_budget =
		cfg.get_int("iteration_budget", config.mid.iteration_budget);
	if (cfg.has("waypoints"))
	{
		const auto w = cfg.get_doubles("waypoints");
		if (w.size() < 2 || w.size() % 2 != 0)
			throw BenchError("waypoints needs an even number of coordinates");
		config.waypoints.clear();
		for (size_t i = 0; i + 1 < w.size(); i += 2)
			config.waypoints.push_back({w[i], w[i + 1]});
	}

	config.plan.how_many_corners =
		cfg.get_int("how_many_corners", config.plan.how_many_corners);
	config.plan.w_euc = cfg.get_double("w_euc_cost", config.plan.w_euc);
	config.plan.w_traversal =
		cfg.get_double("w_traversal_cost", config.plan.w_traversal);
	config.plan.n_max = cfg.get_int("n_max", config.plan.n_max);
	if (cfg.has("goal"))
	{
		const auto g = cfg.get_doubles("goal");
		if (g.size() != 2) throw BenchError("goal needs two values");
		config.goal = {g[0], g[1]};
	}
}

int cli_main(int argc, const char* const* argv)
{
	ScenarioConfig config;
	bool matrix = false;
	bool no_noise = false;
	std::string timestamp;

	CLI::App app{"Greenhouse mobile-robot control benchmark"};
	app.add_option("--category", config.category, "Test category (1, 2 or 3)")
		->check(CLI::Range(1, 3));
	app.add_option("--payload", config.payload, "Payload mass in kg (0..70)")
		->check(CLI::Range(0.0, 70.0));
	app.add_flag("--terrain-slope", config.terrain_slope, "Enable ground slope");
	app.add_flag(
		"--change-terrain", config.change_terrain, "Enable terrain sectors");
	app.add_option("--trials", config.trials, "Trials per condition")
		->check(CLI::PositiveNumber);
	app.add_option("--seed", config.seed, "Scenario seed");
	app.add_option("--out-dir", config.out_dir, "Result directory root");
	app.add_option("--params", config.params_file, "Parameter file");
	app.add_option("--world", config.world_file, "World file override");
	app.add_flag("--matrix", matrix, "Run the full condition sweep");
	app.add_flag("--no-noise", no_noise, "Disable all measurement noise");
	app.add_option(
		"--timestamp", timestamp,
		"Fixed yyyy_mm_dd_hh_mm_ss stamp for the CSV name (reproducible runs)");

	try
	{
		app.parse(argc, argv);
	}
	catch (const CLI::ParseError& e)
	{
		return app.exit(e) == 0 ? 0 : 2;
	}

	try
	{
		config.noise = !no_noise;
		if (!config.params_file.empty())
			load_params(config, read_file(config.params_file));

		if (matrix)
		{
			PluginSet plugins = PluginSet::baseline(config);
			const AggregateTable table = run_matrix(config, plugins);
			std::printf("%s", format_table(table).c_str());
			for (const AggregateCell& c : table.cells)
				if (c.trials_failed > 0) return 1;
			return 0;
		}

		bool any_failed = false;
		std::vector<metrics::MetricReport> reports;
		for (int t = 0; t < config.trials; ++t)
		{
			ScenarioConfig c = config;
			c.seed = trial_seed(config.seed, static_cast<uint64_t>(t));
			if (config.trials == 1) c.seed = config.seed;
			PluginSet plugins = PluginSet::baseline(c);
			const TrialResult r = run_trial(c, plugins);
			if (r.failed)
			{
				any_failed = true;
				std::fprintf(
					stderr, "trial %d failed: %s\n", t,
					r.failure_cause.c_str());
				continue;
			}
			const std::string stamp =
				timestamp.empty()
					? std::string()
					: (config.trials == 1
						   ? timestamp
						   : timestamp + "_trial" + std::to_string(t));
			const std::string path =
				export_csv(r.log, r.report, config.out_dir, stamp);
			std::printf(
				"trial %d: %s (n=%zu, j1=%s%s%s)\n", t, path.c_str(),
				r.report.n_samples, fmt6(r.report.j1).c_str(),
				config.category >= 2
					? (", jt2=" + fmt6(r.report.jt2)).c_str()
					: "",
				config.category == 3
					? (", jt3=" + fmt6(r.report.jt3)).c_str()
					: "");
			reports.push_back(r.report);
		}
		if (reports.size() > 1)
		{
			const auto [mean, stddev] = aggregate(reports);
			std::printf(
				"mean j1 %s +- %s\n", fmt6(mean.j1).c_str(),
				fmt6(stddev.j1).c_str());
		}
		return any_failed ? 1 : 0;
	}
	catch (const BenchError& e)
	{
		std::fprintf(stderr, "error: %s\n", e.what());
		return 2;
	}
	catch (const std::exception& e)
	{
		std::fprintf(stderr, "error: %s\n", e.what());
		return 2;
	}
}

}  // namespace greenbench::bench
