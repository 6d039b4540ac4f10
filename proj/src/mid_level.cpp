#include "greenbench/mid_level.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace greenbench::mid_level
{

namespace
{

constexpr double kDefectTol = 1e-4;	 // [m] target defect after penalty ramps
constexpr int kMaxRamps = 4;
constexpr double kLidarMaxRange = 4.0;	// [m]

struct SparseRow
{
	double r = 0.0;
	int cols[9];
	double vals[9];
	int nnz = 0;

	void add(int col, double val)
	{
		if (col < 0) return;  // derivative w.r.t. the pinned node 0
		cols[nnz] = col;
		vals[nnz] = val;
		++nnz;
	}
};

/// Variable layout: states of nodes 1..P-1 first (x, y, theta), then the
/// per-interval inputs (v, omega, dt) for k = 0..P-2. Node 0 is pinned.
struct Layout
{
	int p;	// node count

	int n_vars() const { return 6 * (p - 1); }
	int state(int k, int comp) const
	{
		return k == 0 ? -1 : 3 * (k - 1) + comp;
	}
	int input(int k, int comp) const { return 3 * (p - 1) + 3 * k + comp; }
};

/// Gradient of the obstacle surface distance w.r.t. the query point.
Vec2 surface_gradient(const world::Obstacle& o, const Vec2& p)
{
	Vec2 anchor = o.a;
	if (o.kind == world::Obstacle::Kind::Segment)
		anchor = closest_point_on_segment(p, o.a, o.b);
	const Vec2 d = p - anchor;
	const double n = d.norm();
	if (n <= 1e-12) return {1.0, 0.0};
	return {d.x / n, d.y / n};
}

/// Assemble every residual (and optionally the sparse Jacobian rows) of the
/// penalized least-squares objective. The squared norm of the residual
/// vector is exactly band_cost(...).total().
void assemble(
	const ElasticBand& band, const std::vector<ObstacleObservation>& obstacles,
	const MidLevelConfig& cfg, double w_pen, std::vector<SparseRow>* rows,
	CostBreakdown* breakdown, bool with_jacobian)
{
	const Layout lay{static_cast<int>(band.nodes.size())};
	const double sq[2] = {std::sqrt(cfg.q_diag[0]), std::sqrt(cfg.q_diag[1])};
	const double sr[2] = {std::sqrt(cfg.r_diag[0]), std::sqrt(cfg.r_diag[1])};
	const double sl = std::sqrt(cfg.lambda_t);
	const double sw = std::sqrt(w_pen);
	const double clearance_req = cfg.r_robot + cfg.d_safe;

	const auto emit = [&](const SparseRow& row, double* bucket) {
		if (rows)
		{
			SparseRow out = row;
			if (!with_jacobian) out.nnz = 0;
			rows->push_back(out);
		}
		if (breakdown && bucket) *bucket += row.r * row.r;
	};

	// tracking: every free node pulled toward the reference
	for (int k = 1; k < lay.p; ++k)
	{
		const Pose& s = band.nodes[k].state;
		SparseRow rx;
		rx.r = sq[0] * (s.x - band.reference.x);
		rx.add(lay.state(k, 0), sq[0]);
		emit(rx, breakdown ? &breakdown->tracking : nullptr);
		SparseRow ry;
		ry.r = sq[1] * (s.y - band.reference.y);
		ry.add(lay.state(k, 1), sq[1]);
		emit(ry, breakdown ? &breakdown->tracking : nullptr);
	}

	for (int k = 0; k + 1 < lay.p; ++k)
	{
		const BandNode& nk = band.nodes[k];
		const Pose& s0 = nk.state;
		const Pose& s1 = band.nodes[k + 1].state;
		const double c = std::cos(s0.theta), si = std::sin(s0.theta);

		// input effort and temporal terms
		SparseRow rv;
		rv.r = sr[0] * nk.v;
		rv.add(lay.input(k, 0), sr[0]);
		emit(rv, breakdown ? &breakdown->input : nullptr);
		SparseRow rw;
		rw.r = sr[1] * nk.omega;
		rw.add(lay.input(k, 1), sr[1]);
		emit(rw, breakdown ? &breakdown->input : nullptr);
		SparseRow rt;
		rt.r = sl * nk.dt;
		rt.add(lay.input(k, 2), sl);
		emit(rt, breakdown ? &breakdown->temporal : nullptr);

		// dynamics defect against the Euler model
		SparseRow dx;
		dx.r = sw * (s1.x - s0.x - nk.dt * nk.v * c);
		dx.add(lay.state(k + 1, 0), sw);
		dx.add(lay.state(k, 0), -sw);
		dx.add(lay.state(k, 2), sw * nk.dt * nk.v * si);
		dx.add(lay.input(k, 0), -sw * nk.dt * c);
		dx.add(lay.input(k, 2), -sw * nk.v * c);
		emit(dx, breakdown ? &breakdown->defect : nullptr);
		SparseRow dy;
		dy.r = sw * (s1.y - s0.y - nk.dt * nk.v * si);
		dy.add(lay.state(k + 1, 1), sw);
		dy.add(lay.state(k, 1), -sw);
		dy.add(lay.state(k, 2), -sw * nk.dt * nk.v * c);
		dy.add(lay.input(k, 0), -sw * nk.dt * si);
		dy.add(lay.input(k, 2), -sw * nk.v * si);
		emit(dy, breakdown ? &breakdown->defect : nullptr);
		SparseRow dth;
		dth.r = sw * wrap_angle(s1.theta - s0.theta - nk.dt * nk.omega);
		dth.add(lay.state(k + 1, 2), sw);
		dth.add(lay.state(k, 2), -sw);
		dth.add(lay.input(k, 1), -sw * nk.dt);
		dth.add(lay.input(k, 2), -sw * nk.omega);
		emit(dth, breakdown ? &breakdown->defect : nullptr);

		// one-sided velocity and interval bounds
		SparseRow bv;
		if (std::abs(nk.v) > cfg.v_max)
		{
			bv.r = sw * (std::abs(nk.v) - cfg.v_max);
			bv.add(lay.input(k, 0), sw * (nk.v >= 0 ? 1.0 : -1.0));
		}
		emit(bv, breakdown ? &breakdown->bounds : nullptr);
		SparseRow bw;
		if (std::abs(nk.omega) > cfg.omega_max)
		{
			bw.r = sw * (std::abs(nk.omega) - cfg.omega_max);
			bw.add(lay.input(k, 1), sw * (nk.omega >= 0 ? 1.0 : -1.0));
		}
		emit(bw, breakdown ? &breakdown->bounds : nullptr);
		SparseRow bt;
		if (nk.dt < cfg.dt_min)
		{
			bt.r = sw * (cfg.dt_min - nk.dt);
			bt.add(lay.input(k, 2), -sw);
		}
		else if (nk.dt > cfg.dt_max)
		{
			bt.r = sw * (nk.dt - cfg.dt_max);
			bt.add(lay.input(k, 2), sw);
		}
		emit(bt, breakdown ? &breakdown->bounds : nullptr);
	}

	// clearance penalties on the free nodes
	for (int k = 1; k < lay.p; ++k)
	{
		const Vec2 p{band.nodes[k].state.x, band.nodes[k].state.y};
		for (const ObstacleObservation& obs : obstacles)
		{
			SparseRow rc;
			const double d = obs.obstacle.surface_distance(p) + obs.bias;
			if (d < clearance_req)
			{
				const Vec2 grad = surface_gradient(obs.obstacle, p);
				rc.r = sw * (clearance_req - d);
				rc.add(lay.state(k, 0), -sw * grad.x);
				rc.add(lay.state(k, 1), -sw * grad.y);
			}
			emit(rc, breakdown ? &breakdown->collision : nullptr);
		}
	}
}

double penalized_cost(
	const ElasticBand& band, const std::vector<ObstacleObservation>& obstacles,
	const MidLevelConfig& cfg, double w_pen)
{
	CostBreakdown bd;
	assemble(band, obstacles, cfg, w_pen, nullptr, &bd, false);
	return bd.total();
}

void apply_step(
	ElasticBand& band, const Eigen::VectorXd& delta, const Layout& lay)
{
	for (int k = 1; k < lay.p; ++k)
	{
		Pose& s = band.nodes[k].state;
		s.x += delta[lay.state(k, 0)];
		s.y += delta[lay.state(k, 1)];
		s.theta = wrap_angle(s.theta + delta[lay.state(k, 2)]);
	}
	for (int k = 0; k + 1 < lay.p; ++k)
	{
		BandNode& n = band.nodes[k];
		n.v += delta[lay.input(k, 0)];
		n.omega += delta[lay.input(k, 1)];
		n.dt += delta[lay.input(k, 2)];
	}
}

double max_dynamics_defect(const ElasticBand& band)
{
	double worst = 0.0;
	for (size_t k = 0; k + 1 < band.nodes.size(); ++k)
	{
		const BandNode& n = band.nodes[k];
		const Pose pred = propagate(n.state, n.v, n.omega, n.dt);
		const Pose& next = band.nodes[k + 1].state;
		const double dth = wrap_angle(next.theta - pred.theta);
		const double d = std::sqrt(
			(next.x - pred.x) * (next.x - pred.x) +
			(next.y - pred.y) * (next.y - pred.y) + dth * dth);
		worst = std::max(worst, d);
	}
	return worst;
}

/// Damped Gauss-Newton at a fixed penalty weight; strict-improvement accept,
/// so the appended cost trace is non-increasing. Returns iterations spent.
int levenberg_pass(
	ElasticBand& band, const std::vector<ObstacleObservation>& obstacles,
	const MidLevelConfig& cfg, double w_pen, int budget,
	std::vector<double>& trace)
{
	const Layout lay{static_cast<int>(band.nodes.size())};
	const int n = lay.n_vars();
	double cost = penalized_cost(band, obstacles, cfg, w_pen);
	trace.push_back(cost);
	double mu = 1e-4;
	int used = 0;
	std::vector<SparseRow> rows;

	while (used < budget)
	{
		rows.clear();
		CostBreakdown bd;
		assemble(band, obstacles, cfg, w_pen, &rows, &bd, true);

		Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
		Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
		for (const SparseRow& row : rows)
		{
			for (int i = 0; i < row.nnz; ++i)
			{
				g[row.cols[i]] += row.vals[i] * row.r;
				for (int j = 0; j < row.nnz; ++j)
					h(row.cols[i], row.cols[j]) += row.vals[i] * row.vals[j];
			}
		}
		// stationary point: warm starts return the band bit-identically
		if (g.lpNorm<Eigen::Infinity>() <= 1e-9 * (1.0 + cost)) break;

		bool accepted = false;
		while (used < budget)
		{
			++used;
			Eigen::MatrixXd damped = h;
			for (int i = 0; i < n; ++i) damped(i, i) += mu * (1.0 + h(i, i));
			const Eigen::VectorXd delta = damped.ldlt().solve(-g);
			ElasticBand trial = band;
			apply_step(trial, delta, lay);
			const double trial_cost =
				penalized_cost(trial, obstacles, cfg, w_pen);
			if (std::isfinite(trial_cost) &&
				trial_cost < cost * (1.0 - 1e-14))
			{
				const double gain = cost - trial_cost;
				band = std::move(trial);
				cost = trial_cost;
				trace.push_back(cost);
				mu = std::max(mu * 0.3, 1e-12);
				accepted = true;
				// plateau: stop polishing so the remaining budget can fund
				// the next penalty ramp
				if (gain <= 1e-10 * (1.0 + cost)) return used;
				break;
			}
			mu *= 10.0;
			if (mu > 1e12) return used;	 // numerically stuck
		}
		if (!accepted) break;
	}
	return used;
}

ElasticBand make_initial_band(
	const Pose& measured, const Vec2& reference, const MidLevelConfig& cfg)
{
	const Vec2 start{measured.x, measured.y};
	const double dist = distance(start, reference);
	const int p = std::clamp(
		2 + static_cast<int>(std::ceil(dist / cfg.max_node_spacing)), 2,
		cfg.max_nodes);
	const double heading =
		dist > 1e-9 ? std::atan2(reference.y - start.y, reference.x - start.x)
					: measured.theta;
	const double segment = dist / (p - 1);
	const double dt0 =
		std::clamp(segment / (0.8 * cfg.v_max), cfg.dt_min, cfg.dt_max);

	ElasticBand band;
	band.reference = reference;
	band.nodes.resize(static_cast<size_t>(p));
	for (int k = 0; k < p; ++k)
	{
		BandNode& n = band.nodes[static_cast<size_t>(k)];
		const double t = (p > 1) ? double(k) / (p - 1) : 0.0;
		n.state.x = start.x + (reference.x - start.x) * t;
		n.state.y = start.y + (reference.y - start.y) * t;
		n.state.theta = heading;
		n.v = segment / dt0;
		n.omega = 0.0;
		n.dt = dt0;
	}
	band.nodes.front().state = measured;
	return band;
}

}  // namespace

Pose propagate(const Pose& state, double v, double omega, double dt)
{
	Pose next;
	next.x = state.x + dt * v * std::cos(state.theta);
	next.y = state.y + dt * v * std::sin(state.theta);
	next.theta = wrap_angle(state.theta + dt * omega);
	return next;
}

CostBreakdown band_cost(
	const ElasticBand& band, const std::vector<ObstacleObservation>& obstacles,
	const MidLevelConfig& config, double penalty_weight)
{
	if (band.nodes.size() < 2)
		throw MidLevelError("band_cost: band needs at least two nodes");
	CostBreakdown bd;
	assemble(band, obstacles, config, penalty_weight, nullptr, &bd, false);
	return bd;
}

OptimizeResult optimize_band(
	const ElasticBand& band, const std::vector<ObstacleObservation>& obstacles,
	const MidLevelConfig& config)
{
	if (band.nodes.size() < 2)
		throw MidLevelError("optimize_band: band needs at least two nodes");
	if (config.iteration_budget < 1)
		throw MidLevelError("optimize_band: iteration_budget must be >= 1");

	OptimizeResult result;
	result.band = band;
	const double max_q = std::max(config.q_diag[0], config.q_diag[1]);
	double w_pen = 1e3 * max_q;
	int budget = config.iteration_budget;

	for (int ramp = 0; ramp < kMaxRamps; ++ramp)
	{
		// even split so a stalled early ramp cannot starve the later, more
		// strongly penalized ones; leftovers roll forward
		const int pass_budget = std::max(1, budget / (kMaxRamps - ramp));
		result.cost_traces.emplace_back();
		budget -= levenberg_pass(
			result.band, obstacles, config, w_pen, pass_budget,
			result.cost_traces.back());
		result.final_penalty_weight = w_pen;
		result.max_defect = max_dynamics_defect(result.band);
		if (result.max_defect <= kDefectTol || budget <= 0) break;
		w_pen *= 10.0;
	}
	result.converged = result.max_defect <= kDefectTol * 10.0;

	// hard projection: emitted commands must respect the bounds exactly
	for (BandNode& n : result.band.nodes)
	{
		n.v = std::clamp(n.v, -config.v_max, config.v_max);
		n.omega = std::clamp(n.omega, -config.omega_max, config.omega_max);
		n.dt = std::clamp(n.dt, config.dt_min, config.dt_max);
	}
	return result;
}

MpcCommand mpc_step(
	const Pose& measured, const std::vector<Vec2>& waypoints,
	const std::vector<ObstacleObservation>& obstacles,
	const MidLevelConfig& config, const ElasticBand* previous_band,
	size_t waypoint_index)
{
	MpcCommand cmd;
	const Vec2 pos{measured.x, measured.y};
	while (waypoint_index < waypoints.size() &&
		   distance(pos, waypoints[waypoint_index]) < config.success_tolerance)
		++waypoint_index;
	cmd.waypoint_index = waypoint_index;
	if (waypoint_index >= waypoints.size())
	{
		cmd.done = true;
		cmd.predicted = pos;
		return cmd;
	}
	const Vec2 ref = waypoints[waypoint_index];

	ElasticBand warm;
	const bool reuse = previous_band && previous_band->nodes.size() >= 2 &&
					   distance(previous_band->reference, ref) < 1e-12;
	if (reuse)
	{
		warm = *previous_band;
		// Receding horizon: shift the band past nodes the robot has already
		// overtaken (or sits on) so the head always leads the measured state;
		// shifting unconditionally would drain the band faster than the robot
		// advances along it.
		while (warm.nodes.size() > 2)
		{
			const Pose& n1 = warm.nodes[1].state;
			const Pose& n2 = warm.nodes[2].state;
			const double ahead = (n1.x - measured.x) * (n2.x - measured.x) +
								 (n1.y - measured.y) * (n2.y - measured.y);
			const double near =
				std::hypot(n1.x - measured.x, n1.y - measured.y);
			if (ahead > 0.0 && near > 0.05) break;
			warm.nodes.erase(warm.nodes.begin() + 1);
		}
		warm.nodes.front().state = measured;
	}
	else
		warm = make_initial_band(measured, ref, config);

	OptimizeResult opt = optimize_band(warm, obstacles, config);
	cmd.v = opt.band.nodes.front().v;
	cmd.omega = opt.band.nodes.front().omega;
	const Pose pred = propagate(measured, cmd.v, cmd.omega, config.control_period);
	cmd.predicted = {pred.x, pred.y};
	cmd.converged = opt.converged;
	cmd.band = std::move(opt.band);
	return cmd;
}

std::vector<ObstacleObservation> lidar_ranges(
	const Pose& state, const std::vector<world::Obstacle>& obstacles,
	bool noise, RandomStream& rng)
{
	const Vec2 pos{state.x, state.y};
	std::vector<ObstacleObservation> out;
	for (const world::Obstacle& o : obstacles)
	{
		const double clearance = o.surface_distance(pos);
		if (clearance > kLidarMaxRange) continue;
		ObstacleObservation obs;
		obs.obstacle = o;
		obs.range = clearance;
		if (noise)
		{
			const double sigma =
				clearance < 1.0 ? 0.01 : 0.01 * std::abs(clearance);
			obs.range += rng.gaussian(sigma);
			obs.bias = obs.range - clearance;
		}
		out.push_back(obs);
	}
	return out;
}

}  // namespace greenbench::mid_level
