#include "greenbench/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace greenbench::planner
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

struct OpenEntry
{
	double f;
	double h;
	Cell cell;
	double g;  // snapshot for staleness detection

	bool operator<(const OpenEntry& o) const
	{
		// std::priority_queue is a max-heap; invert for min-f, then lower h,
		// then lexicographic cell order, for a deterministic pop sequence
		if (f != o.f) return f > o.f;
		if (h != o.h) return h > o.h;
		if (cell.col != o.cell.col) return cell.col > o.cell.col;
		return cell.row > o.cell.row;
	}
};

size_t index_of(const world::OccupancyGrid& grid, const Cell& c)
{
	return static_cast<size_t>(c.row) * grid.width + c.col;
}

/// Weighted edge cost: Euclidean length plus the proximity penalties of
/// every cell entered along the segment (source cell excluded).
double edge_cost(
	const world::OccupancyGrid& grid, const std::vector<double>& field,
	const PlannerConfig& cfg, const Cell& a, const Cell& b)
{
	const double dist =
		grid.resolution * std::hypot(double(b.col - a.col), double(b.row - a.row));
	double penalty = 0.0;
	if (cfg.w_traversal > 0.0)
	{
		for (const Cell& c : supercover(a, b))
			if (!(c == a)) penalty += field[index_of(grid, c)];
	}
	return cfg.w_euc * dist + cfg.w_traversal * penalty;
}

std::vector<Cell> neighbors_of(
	const world::OccupancyGrid& grid, const Cell& c, int connectivity)
{
	static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
	static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
	std::vector<Cell> out;
	out.reserve(8);
	for (int i = 0; i < connectivity; ++i)
	{
		const Cell n{c.col + kDx[i], c.row + kDy[i]};
		if (!grid.in_grid(n.col, n.row) || grid.occupied(n.col, n.row))
			continue;
		// diagonal steps cross the shared corner: both adjacent cells must
		// be free, matching the corner-inclusive supercover convention
		if (i >= 4 && (grid.occupied(c.col + kDx[i], c.row) ||
					   grid.occupied(c.col, c.row + kDy[i])))
			continue;
		out.push_back(n);
	}
	return out;
}

}  // namespace

std::vector<Cell> supercover(const Cell& a, const Cell& b)
{
	std::vector<Cell> cells;
	int x = a.col, y = a.row;
	int dx = b.col - a.col, dy = b.row - a.row;
	const int xstep = (dx > 0) - (dx < 0);
	const int ystep = (dy > 0) - (dy < 0);
	dx = std::abs(dx);
	dy = std::abs(dy);
	cells.push_back(a);
	const int ddx = 2 * dx, ddy = 2 * dy;
	if (ddx >= ddy)
	{
		int error = dx, errorprev = dx;
		for (int i = 0; i < dx; ++i)
		{
			x += xstep;
			error += ddy;
			if (error > ddx)
			{
				y += ystep;
				error -= ddx;
				if (error + errorprev < ddx)
					cells.push_back({x, y - ystep});
				else if (error + errorprev > ddx)
					cells.push_back({x - xstep, y});
				else  // exact corner crossing: both adjacent cells
				{
					cells.push_back({x, y - ystep});
					cells.push_back({x - xstep, y});
				}
			}
			cells.push_back({x, y});
			errorprev = error;
		}
	}
	else
	{
		int err = dy, errprev = dy;
		for (int i = 0; i < dy; ++i)
		{
			y += ystep;
			err += ddx;
			if (err > ddy)
			{
				x += xstep;
				err -= ddy;
				if (err + errprev < ddy)
					cells.push_back({x - xstep, y});
				else if (err + errprev > ddy)
					cells.push_back({x, y - ystep});
				else
				{
					cells.push_back({x - xstep, y});
					cells.push_back({x, y - ystep});
				}
			}
			cells.push_back({x, y});
			errprev = err;
		}
	}
	return cells;
}

bool line_of_sight(const world::OccupancyGrid& grid, const Cell& a, const Cell& b)
{
	if (!grid.in_grid(a.col, a.row) || !grid.in_grid(b.col, b.row))
		throw PlannerError("line_of_sight: cell outside the grid");
	for (const Cell& c : supercover(a, b))
		if (grid.occupied(c.col, c.row)) return false;
	return true;
}

double heuristic(const world::OccupancyGrid& grid, const Cell& n, const Cell& goal)
{
	return grid.resolution *
		   std::hypot(double(goal.col - n.col), double(goal.row - n.row));
}

std::vector<double> traversal_cost_field(const world::OccupancyGrid& grid)
{
	constexpr int kRange = 3;
	std::vector<double> field(
		static_cast<size_t>(grid.width) * grid.height, 0.0);
	for (int row = 0; row < grid.height; ++row)
		for (int col = 0; col < grid.width; ++col)
		{
			int best = kRange + 1;
			for (int dr = -kRange; dr <= kRange && best > 0; ++dr)
				for (int dc = -kRange; dc <= kRange; ++dc)
				{
					const int r = row + dr, c = col + dc;
					if (!grid.in_grid(c, r) || !grid.occupied(c, r)) continue;
					const int d = std::max(std::abs(dr), std::abs(dc));
					best = std::min(best, d);
					if (best == 0) break;
				}
			if (best <= kRange)
				field[static_cast<size_t>(row) * grid.width + col] =
					double(kRange - best);
		}
	return field;
}

Path lazy_theta_star(
	const world::OccupancyGrid& grid, const Cell& start, const Cell& goal,
	const PlannerConfig& config, PlannerStats* stats)
{
	if (config.how_many_corners != 4 && config.how_many_corners != 8)
		throw PlannerError("lazy_theta_star: how_many_corners must be 4 or 8");
	if (config.n_max < 1) throw PlannerError("lazy_theta_star: n_max must be >= 1");
	if (!grid.in_grid(start.col, start.row) || !grid.in_grid(goal.col, goal.row))
		throw PlannerError("lazy_theta_star: start/goal outside the grid");
	if (grid.occupied(start.col, start.row))
		throw NoPathError("lazy_theta_star: start cell occupied");
	if (grid.occupied(goal.col, goal.row))
		throw NoPathError("lazy_theta_star: goal cell occupied");

	const std::vector<double> field =
		config.w_traversal > 0.0 ? traversal_cost_field(grid)
								 : std::vector<double>(
									   size_t(grid.width) * grid.height, 0.0);

	const size_t n_cells = static_cast<size_t>(grid.width) * grid.height;
	std::vector<double> g(n_cells, kInf);
	std::vector<int> parent(n_cells, -1);
	std::vector<uint8_t> closed(n_cells, 0);

	const size_t i_start = index_of(grid, start);
	const size_t i_goal = index_of(grid, goal);
	g[i_start] = 0.0;
	parent[i_start] = static_cast<int>(i_start);

	std::priority_queue<OpenEntry> open;
	open.push({heuristic(grid, start, goal), heuristic(grid, start, goal),
			   start, 0.0});
	int expansions = 0;

	const auto cell_at = [&](size_t idx) {
		return Cell{static_cast<int>(idx % grid.width),
					static_cast<int>(idx / grid.width)};
	};

	while (!open.empty())
	{
		const OpenEntry top = open.top();
		open.pop();
		const size_t i_s = index_of(grid, top.cell);
		if (closed[i_s] || top.g != g[i_s]) continue;  // stale entry
		const Cell s = top.cell;

		// deferred line-of-sight validation of the any-angle parent
		const Cell par = cell_at(static_cast<size_t>(parent[i_s]));
		if (!(par == s) && !line_of_sight(grid, par, s))
		{
			double best_g = kInf;
			int best_parent = -1;
			for (const Cell& n : neighbors_of(grid, s, config.how_many_corners))
			{
				const size_t i_n = index_of(grid, n);
				if (!closed[i_n]) continue;
				const double cand = g[i_n] + edge_cost(grid, field, config, n, s);
				if (cand < best_g)
				{
					best_g = cand;
					best_parent = static_cast<int>(i_n);
				}
			}
			if (best_parent < 0)
				throw PlannerError(
					"lazy_theta_star: no closed neighbor to re-parent to");
			g[i_s] = best_g;
			parent[i_s] = best_parent;
			// g increased: requeue at the corrected priority instead of
			// expanding now, keeping the popped-f sequence monotone
			open.push(
				{std::max(best_g + top.h, top.f), top.h, s, best_g});
			continue;
		}

		if (stats)
		{
			stats->popped_f.push_back(top.f);
			stats->expansions++;
		}
		if (i_s == i_goal) break;
		closed[i_s] = 1;
		if (++expansions > config.n_max)
			throw NoPathError("lazy_theta_star: expansion cap n_max exceeded");

		for (const Cell& n : neighbors_of(grid, s, config.how_many_corners))
		{
			const size_t i_n = index_of(grid, n);
			if (closed[i_n]) continue;
			// lazy any-angle relaxation through parent(s), validated on pop
			const Cell p = cell_at(static_cast<size_t>(parent[i_s]));
			const size_t i_p = index_of(grid, p);
			const double cand = g[i_p] + edge_cost(grid, field, config, p, n);
			if (cand < g[i_n])
			{
				g[i_n] = cand;
				parent[i_n] = static_cast<int>(i_p);
				const double h = heuristic(grid, n, goal);
				// pathmax: the any-angle shortcut can undercut the expanded
				// f; floor the priority at the popped f so the frontier
				// stays monotone
				open.push({std::max(cand + h, top.f), h, n, cand});
			}
		}
	}

	if (!std::isfinite(g[i_goal]))
		throw NoPathError("lazy_theta_star: goal unreachable");

	Path path;
	path.cost = g[i_goal];
	std::vector<size_t> chain;
	for (size_t i = i_goal;; i = static_cast<size_t>(parent[i]))
	{
		chain.push_back(i);
		if (i == i_start) break;
	}
	std::reverse(chain.begin(), chain.end());
	for (size_t i : chain)
	{
		const Cell c = cell_at(i);
		path.nodes.push_back(grid.cell_center(c.col, c.row));
	}
	return path;
}

namespace
{

Cell snap_to_free(
	const world::OccupancyGrid& grid, const Vec2& p, double max_dist)
{
	const auto [c0, r0] = grid.cell_of(p);
	const int radius =
		static_cast<int>(std::ceil(max_dist / grid.resolution)) + 1;
	double best_d = kInf;
	Cell best{};
	bool found = false;
	for (int dr = -radius; dr <= radius; ++dr)
		for (int dc = -radius; dc <= radius; ++dc)
		{
			const int c = c0 + dc, r = r0 + dr;
			if (!grid.in_grid(c, r) || grid.occupied(c, r)) continue;
			const double d = distance(p, grid.cell_center(c, r));
			if (d > max_dist) continue;
			if (d < best_d ||
				(d == best_d && (c < best.col || (c == best.col && r < best.row))))
			{
				best_d = d;
				best = {c, r};
				found = true;
			}
		}
	if (!found)
		throw NoPathError(
			"plan: no free cell within " + std::to_string(max_dist) +
			" m of (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
	return best;
}

}  // namespace

Path plan(
	const world::OccupancyGrid& grid, const Vec2& start, const Vec2& goal,
	const PlannerConfig& config, PlannerStats* stats)
{
	const Cell s = snap_to_free(grid, start, 0.5);
	const Cell t = snap_to_free(grid, goal, 0.5);
	return lazy_theta_star(grid, s, t, config, stats);
}

Replanner::Replanner(const Vec2& goal, const PlannerConfig& config, double period)
	: goal_(goal), config_(config), period_(period)
{
	if (period <= 0.0) throw PlannerError("Replanner: period must be > 0");
}

const Path& Replanner::update(
	const world::OccupancyGrid& grid, const Vec2& pose, double time)
{
	if (!has_plan_ || time - last_plan_time_ >= period_ - 1e-9)
	{
		path_ = plan(grid, pose, goal_, config_);
		last_plan_time_ = time;
		has_plan_ = true;
	}
	return path_;
}

}  // namespace greenbench::planner
