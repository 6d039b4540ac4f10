#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "greenbench/geometry.hpp"

namespace greenbench::world
{

/// Ground properties at a query position: sector id, friction, rolling
/// resistance, damping and local slope angle.
struct TerrainSample
{
	int sector = 0;
	double mu = 0.0;
	double crr = 0.0;
	double cd = 0.0;
	double slope_deg = 0.0;

	double slope_rad() const { return slope_deg * M_PI / 180.0; }
};

struct TerrainSector
{
	int id = 0;
	std::vector<Vec2> region;  // polygon, world coordinates [m]
	double mu = 0.0;
	double crr = 0.0;
	double cd = 0.0;
};

/// Piecewise-linear slope angle along a fixed axis; zero when disabled.
/// The profile maps the signed distance along `direction` from `origin`
/// to an angle in degrees, clamped to +-max_abs_deg.
struct SlopeField
{
	bool enabled = false;
	Vec2 origin{};
	Vec2 direction{1.0, 0.0};
	std::vector<std::pair<double, double>> profile;	 // (distance m, angle deg)
	double max_abs_deg = 4.0;

	double angle_deg_at(const Vec2& p) const;
};

struct Obstacle
{
	enum class Kind
	{
		Disc,
		Segment
	};
	Kind kind = Kind::Disc;
	int id = 0;
	Vec2 a{};		// disc center, or segment start
	Vec2 b{};		// segment end (unused for discs)
	double radius = 0.0;  // disc radius, or half the segment thickness

	/// Signed distance from p to the obstacle surface (negative inside).
	double surface_distance(const Vec2& p) const;
};

struct World
{
	Vec2 bounds_min{};
	Vec2 bounds_max{};
	std::vector<TerrainSector> sectors;	 // sorted by id
	SlopeField slope;
	std::vector<Obstacle> obstacles;
	double payload_mass = 0.0;	// m_pl, [0, 70] kg
	bool terrain_change_enabled = true;
	int uniform_sector_id = 3;	// sector kept when terrain change is disabled

	bool contains(const Vec2& p) const
	{
		return p.x >= bounds_min.x && p.x <= bounds_max.x &&
			   p.y >= bounds_min.y && p.y <= bounds_max.y;
	}

	/// Collapse to a single sector covering the bounds (terrain change off).
	void make_uniform();
};

struct OccupancyGrid
{
	double resolution = 0.1;
	int width = 0;
	int height = 0;
	Vec2 origin{};	// world position of the (0,0) cell corner
	std::vector<uint8_t> cells;	 // row-major, 1 = occupied

	bool occupied(int col, int row) const
	{
		return cells[static_cast<size_t>(row) * width + col] != 0;
	}
	void set(int col, int row, bool occ)
	{
		cells[static_cast<size_t>(row) * width + col] = occ ? 1 : 0;
	}
	bool in_grid(int col, int row) const
	{
		return col >= 0 && col < width && row >= 0 && row < height;
	}
	Vec2 cell_center(int col, int row) const
	{
		return {origin.x + (col + 0.5) * resolution,
				origin.y + (row + 0.5) * resolution};
	}
	std::pair<int, int> cell_of(const Vec2& p) const
	{
		return {static_cast<int>(std::floor((p.x - origin.x) / resolution)),
				static_cast<int>(std::floor((p.y - origin.y) / resolution))};
	}
};

/// The default 20x20 m greenhouse: five corridors separated by plant rows
/// 4 m apart, perimeter walls and three terrain sectors.
std::string default_world_config();

/// Parse a world config. Throws ConfigError on malformed input and
/// std::invalid_argument on invariant violations (overlapping sectors,
/// payload out of range, ...).
World load_world(const std::string& config_text);

/// Terrain lookup at a position. Boundary ties resolve to the lowest sector
/// id. Throws std::out_of_range outside the world bounds.
TerrainSample sector_at(const World& w, const Vec2& position);

/// Distance from `position` to the nearest obstacle surface and its id.
/// Empty obstacle list yields +infinity.
std::pair<double, int> obstacle_clearance(const World& w, const Vec2& position);

/// Rasterize obstacles (inflated by `inflation_radius`) onto a grid. A cell
/// is occupied iff its square intersects an inflated obstacle.
OccupancyGrid rasterize(
	const World& w, double resolution, double inflation_radius);

/// Plain-text grid exchange format: `width height resolution` header, then
/// one row of 0/1 characters per line (row 0 first). Bit-exact.
std::string grid_to_text(const OccupancyGrid& g);
OccupancyGrid grid_from_text(const std::string& text);

}  // namespace greenbench::world
