#include "greenbench/world.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "greenbench/config_text.hpp"

namespace greenbench::world
{

double SlopeField::angle_deg_at(const Vec2& p) const
{
	if (!enabled || profile.empty()) return 0.0;
	const double s = (p - origin).dot(direction);
	double ang;
	if (s <= profile.front().first)
		ang = profile.front().second;
	else if (s >= profile.back().first)
		ang = profile.back().second;
	else
	{
		ang = profile.back().second;
		for (size_t i = 0; i + 1 < profile.size(); ++i)
		{
			if (s <= profile[i + 1].first)
			{
				const auto [s0, a0] = profile[i];
				const auto [s1, a1] = profile[i + 1];
				const double t = (s1 > s0) ? (s - s0) / (s1 - s0) : 0.0;
				ang = a0 + t * (a1 - a0);
				break;
			}
		}
	}
	return std::clamp(ang, -max_abs_deg, max_abs_deg);
}

double Obstacle::surface_distance(const Vec2& p) const
{
	if (kind == Kind::Disc) return distance(p, a) - radius;
	return point_segment_distance(p, a, b) - radius;
}

void World::make_uniform()
{
	TerrainSector uni;
	for (const auto& s : sectors)
		if (s.id == uniform_sector_id) uni = s;
	if (uni.region.empty() && !sectors.empty()) uni = sectors.front();
	uni.region = {bounds_min,
				  {bounds_max.x, bounds_min.y},
				  bounds_max,
				  {bounds_min.x, bounds_max.y}};
	sectors = {uni};
	terrain_change_enabled = false;
}

std::string default_world_config()
{
	// Three vertical terrain bands, perimeter walls, plant rows 4 m apart
	// modeled as disc chains, and a slope ramp along the category-1 stroke.
	return R"(# default 20x20 m greenhouse
bounds 0 0 20 20
payload 0
terrain_change on
uniform_sector 3
slope off
slope_axis 10.1 3.0 0.710914 0.703279
slope_profile 0 0  1.8 4  3.6 -4

sector 1 0.2 0.10 1.25   # gravel sand
poly 0 0 6 0 6 20 0 20
sector 2 0.8 0.01 0.75   # concrete
poly 6 0 13 0 13 20 6 20
sector 3 0.5 0.05 1.00   # compact sand
poly 13 0 20 0 20 20 13 20

wall 0 0 20 0 0.1
wall 20 0 20 20 0.1
wall 20 20 0 20 0.1
wall 0 20 0 0 0.1

plant_row 4 2 4 12.5 0.5 0.15
plant_row 8 2 8 12.5 0.5 0.15
plant_row 12 2 12 12.5 0.5 0.15
plant_row 16 2 16 12.5 0.5 0.15
)";
}

static void check_invariants(const World& w)
{
	if (w.payload_mass < 0.0 || w.payload_mass > 70.0)
		throw std::invalid_argument(
			"payload out of range [0, 70]: " + std::to_string(w.payload_mass));
	if (w.sectors.empty()) throw std::invalid_argument("no terrain sectors");
	for (const auto& s : w.sectors)
	{
		if (s.region.size() < 3)
			throw std::invalid_argument(
				"sector " + std::to_string(s.id) + ": degenerate polygon");
		if (s.mu <= 0.0 || s.crr < 0.0 || s.cd < 0.0)
			throw std::invalid_argument(
				"sector " + std::to_string(s.id) + ": bad coefficients");
	}
	for (const auto& o : w.obstacles)
		if (o.radius <= 0.0)
			throw std::invalid_argument(
				"obstacle " + std::to_string(o.id) + ": non-positive radius");

	// Coverage / overlap check on a sample lattice: every interior point must
	// lie in at least one sector and strictly inside at most one.
	const double step = 0.25;
	for (double y = w.bounds_min.y + step / 2; y < w.bounds_max.y; y += step)
	{
		for (double x = w.bounds_min.x + step / 2; x < w.bounds_max.x; x += step)
		{
			int hits = 0, strict_hits = 0;
			for (const auto& s : w.sectors)
			{
				bool strict = false;
				if (point_in_polygon({x, y}, s.region, &strict)) ++hits;
				if (strict) ++strict_hits;
			}
			if (hits == 0)
				throw std::invalid_argument(
					"sectors do not cover the world near (" +
					std::to_string(x) + ", " + std::to_string(y) + ")");
			if (strict_hits > 1)
				throw std::invalid_argument(
					"overlapping sectors near (" + std::to_string(x) + ", " +
					std::to_string(y) + ")");
		}
	}
}

World load_world(const std::string& config_text)
{
	const ConfigText cfg = ConfigText::parse(config_text);
	World w;
	w.bounds_min = {0, 0};
	w.bounds_max = {20, 20};
	TerrainSector* cur_sector = nullptr;
	int next_obstacle_id = 1;

	for (const auto& e : cfg.entries())
	{
		if (e.key == "bounds")
		{
			w.bounds_min = {e.as_double(0), e.as_double(1)};
			w.bounds_max = {e.as_double(2), e.as_double(3)};
			if (w.bounds_max.x <= w.bounds_min.x ||
				w.bounds_max.y <= w.bounds_min.y)
				throw ConfigError(e.line, "empty bounds");
		}
		else if (e.key == "payload")
			w.payload_mass = e.as_double(0);
		else if (e.key == "terrain_change")
			w.terrain_change_enabled = e.as_bool(0);
		else if (e.key == "uniform_sector")
			w.uniform_sector_id = e.as_int(0);
		else if (e.key == "slope")
			w.slope.enabled = e.as_bool(0);
		else if (e.key == "slope_axis")
		{
			w.slope.origin = {e.as_double(0), e.as_double(1)};
			Vec2 d{e.as_double(2), e.as_double(3)};
			const double n = d.norm();
			if (n <= 0.0) throw ConfigError(e.line, "zero slope axis");
			w.slope.direction = d * (1.0 / n);
		}
		else if (e.key == "slope_profile")
		{
			if (e.values.size() < 2 || e.values.size() % 2 != 0)
				throw ConfigError(e.line, "slope_profile needs (dist angle) pairs");
			w.slope.profile.clear();
			for (size_t i = 0; i < e.values.size(); i += 2)
				w.slope.profile.emplace_back(e.as_double(i), e.as_double(i + 1));
		}
		else if (e.key == "sector")
		{
			TerrainSector s;
			s.id = e.as_int(0);
			s.mu = e.as_double(1);
			s.crr = e.as_double(2);
			s.cd = e.as_double(3);
			w.sectors.push_back(s);
			cur_sector = &w.sectors.back();
		}
		else if (e.key == "poly")
		{
			if (!cur_sector) throw ConfigError(e.line, "poly before any sector");
			if (e.values.size() < 6 || e.values.size() % 2 != 0)
				throw ConfigError(e.line, "poly needs at least 3 (x y) pairs");
			for (size_t i = 0; i < e.values.size(); i += 2)
				cur_sector->region.push_back(
					{e.as_double(i), e.as_double(i + 1)});
		}
		else if (e.key == "disc")
		{
			Obstacle o;
			o.kind = Obstacle::Kind::Disc;
			o.id = next_obstacle_id++;
			o.a = {e.as_double(0), e.as_double(1)};
			o.radius = e.as_double(2);
			w.obstacles.push_back(o);
		}
		else if (e.key == "wall" || e.key == "segment")
		{
			Obstacle o;
			o.kind = Obstacle::Kind::Segment;
			o.id = next_obstacle_id++;
			o.a = {e.as_double(0), e.as_double(1)};
			o.b = {e.as_double(2), e.as_double(3)};
			o.radius = e.as_double(4) / 2.0;  // thickness -> half-width
			w.obstacles.push_back(o);
		}
		else if (e.key == "plant_row")
		{
			// x1 y1 x2 y2 spacing stem_radius -> chain of discs
			const Vec2 a{e.as_double(0), e.as_double(1)};
			const Vec2 b{e.as_double(2), e.as_double(3)};
			const double spacing = e.as_double(4);
			const double stem = e.as_double(5);
			if (spacing <= 0.0) throw ConfigError(e.line, "spacing must be > 0");
			const double len = distance(a, b);
			const int n = static_cast<int>(std::floor(len / spacing + 1e-9));
			for (int i = 0; i <= n; ++i)
			{
				Obstacle o;
				o.kind = Obstacle::Kind::Disc;
				o.id = next_obstacle_id++;
				const double t = (len > 0) ? (i * spacing) / len : 0.0;
				o.a = a + (b - a) * t;
				o.radius = stem;
				w.obstacles.push_back(o);
			}
		}
		else
			throw ConfigError(e.line, "unknown key '" + e.key + "'");
	}

	if (!w.terrain_change_enabled) w.make_uniform();

	std::sort(
		w.sectors.begin(), w.sectors.end(),
		[](const TerrainSector& a, const TerrainSector& b) { return a.id < b.id; });
	check_invariants(w);
	return w;
}

TerrainSample sector_at(const World& w, const Vec2& position)
{
	if (!w.contains(position))
		throw std::out_of_range(
			"position (" + std::to_string(position.x) + ", " +
			std::to_string(position.y) + ") outside world bounds");
	const TerrainSector* found = nullptr;
	for (const auto& s : w.sectors)	 // sorted by id: first hit = lowest id
	{
		if (point_in_polygon(position, s.region))
		{
			found = &s;
			break;
		}
	}
	if (!found)
	{
		// Numerical gap between polygons; take the nearest boundary.
		double best = std::numeric_limits<double>::infinity();
		for (const auto& s : w.sectors)
		{
			const double d = polygon_boundary_distance(position, s.region);
			if (d < best)
			{
				best = d;
				found = &s;
			}
		}
	}
	TerrainSample t;
	t.sector = found->id;
	t.mu = found->mu;
	t.crr = found->crr;
	t.cd = found->cd;
	t.slope_deg = w.slope.angle_deg_at(position);
	return t;
}

std::pair<double, int> obstacle_clearance(const World& w, const Vec2& position)
{
	double best = std::numeric_limits<double>::infinity();
	int best_id = -1;
	for (const auto& o : w.obstacles)
	{
		const double d = o.surface_distance(position);
		if (d < best)
		{
			best = d;
			best_id = o.id;
		}
	}
	return {best, best_id};
}

OccupancyGrid rasterize(
	const World& w, double resolution, double inflation_radius)
{
	if (resolution <= 0.0)
		throw std::invalid_argument("resolution must be > 0");
	const Vec2 span = w.bounds_max - w.bounds_min;
	if (resolution > span.x || resolution > span.y)
		throw std::invalid_argument("resolution larger than world bounds");

	OccupancyGrid g;
	g.resolution = resolution;
	g.origin = w.bounds_min;
	g.width = static_cast<int>(std::ceil(span.x / resolution - 1e-9));
	g.height = static_cast<int>(std::ceil(span.y / resolution - 1e-9));
	g.cells.assign(static_cast<size_t>(g.width) * g.height, 0);

	for (const auto& o : w.obstacles)
	{
		const double r = o.radius + inflation_radius;
		const Vec2 lo{std::min(o.a.x, o.b.x) - r, std::min(o.a.y, o.b.y) - r};
		const Vec2 hi{std::max(o.a.x, o.b.x) + r, std::max(o.a.y, o.b.y) + r};
		const bool disc = o.kind == Obstacle::Kind::Disc;
		const Vec2 seg_b = disc ? o.a : o.b;
		const auto [c0, r0] = g.cell_of(lo);
		const auto [c1, r1] = g.cell_of(hi);
		for (int row = std::max(0, r0); row <= std::min(g.height - 1, r1); ++row)
		{
			for (int col = std::max(0, c0); col <= std::min(g.width - 1, c1); ++col)
			{
				if (g.occupied(col, row)) continue;
				const Vec2 clo{g.origin.x + col * resolution,
							   g.origin.y + row * resolution};
				const Vec2 chi{clo.x + resolution, clo.y + resolution};
				// exact cell-square vs inflated primitive test
				double d;
				if (disc)
				{
					const Vec2 cp{std::clamp(o.a.x, clo.x, chi.x),
								  std::clamp(o.a.y, clo.y, chi.y)};
					d = distance(o.a, cp);
				}
				else
					d = box_segment_distance(clo, chi, o.a, seg_b);
				if (d <= r) g.set(col, row, true);
			}
		}
	}
	return g;
}

std::string grid_to_text(const OccupancyGrid& g)
{
	std::ostringstream os;
	char res[32];
	std::snprintf(res, sizeof(res), "%g", g.resolution);
	os << g.width << ' ' << g.height << ' ' << res << '\n';
	for (int row = 0; row < g.height; ++row)
	{
		for (int col = 0; col < g.width; ++col)
			os << (g.occupied(col, row) ? '1' : '0');
		os << '\n';
	}
	return os.str();
}

OccupancyGrid grid_from_text(const std::string& text)
{
	std::istringstream is(text);
	OccupancyGrid g;
	if (!(is >> g.width >> g.height >> g.resolution))
		throw std::invalid_argument("bad grid header");
	if (g.width <= 0 || g.height <= 0 || g.resolution <= 0)
		throw std::invalid_argument("bad grid header values");
	g.cells.assign(static_cast<size_t>(g.width) * g.height, 0);
	std::string row;
	std::getline(is, row);	// eat the header newline
	for (int r = 0; r < g.height; ++r)
	{
		if (!std::getline(is, row) || static_cast<int>(row.size()) < g.width)
			throw std::invalid_argument(
				"grid row " + std::to_string(r) + " truncated");
		for (int c = 0; c < g.width; ++c)
		{
			if (row[c] != '0' && row[c] != '1')
				throw std::invalid_argument("bad cell character");
			g.set(c, r, row[c] == '1');
		}
	}
	return g;
}

}  // namespace greenbench::world
