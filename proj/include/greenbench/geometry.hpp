#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace greenbench
{

struct Vec2
{
	double x = 0.0;
	double y = 0.0;

	Vec2() = default;
	Vec2(double x_, double y_) : x(x_), y(y_) {}

	Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
	Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
	Vec2 operator*(double s) const { return {x * s, y * s}; }
	double dot(const Vec2& o) const { return x * o.x + y * o.y; }
	double norm() const { return std::hypot(x, y); }
	double squaredNorm() const { return x * x + y * y; }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a)
{
	a = std::fmod(a, 2.0 * M_PI);
	if (a <= -M_PI) a += 2.0 * M_PI;
	if (a > M_PI) a -= 2.0 * M_PI;
	return a;
}

/// Closest point on segment [a,b] to p.
inline Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b)
{
	const Vec2 ab = b - a;
	const double len2 = ab.squaredNorm();
	if (len2 <= 0.0) return a;
	double t = (p - a).dot(ab) / len2;
	t = std::clamp(t, 0.0, 1.0);
	return a + ab * t;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b)
{
	return distance(p, closest_point_on_segment(p, a, b));
}

double segment_segment_distance(
	const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1);

/// Distance from an axis-aligned box [lo,hi] to a segment. Zero when they intersect.
double box_segment_distance(
	const Vec2& lo, const Vec2& hi, const Vec2& s0, const Vec2& s1);

/// Point-in-polygon (even-odd rule). Points on the boundary count as inside;
/// `strict` additionally reports whether p is strictly interior.
bool point_in_polygon(
	const Vec2& p, const std::vector<Vec2>& poly, bool* strict = nullptr);

/// Distance from p to the polygon boundary.
double polygon_boundary_distance(const Vec2& p, const std::vector<Vec2>& poly);

/// Closest point on a polyline to p; returns the point and writes the distance.
Vec2 closest_point_on_polyline(
	const Vec2& p, const std::vector<Vec2>& pts, double* dist_out = nullptr);

}  // namespace greenbench
