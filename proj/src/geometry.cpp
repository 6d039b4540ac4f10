#include "greenbench/geometry.hpp"

#include <algorithm>

namespace greenbench
{

static bool segments_intersect(
	const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2)
{
	const auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
		const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
		if (v > 0) return 1;
		if (v < 0) return -1;
		return 0;
	};
	const auto on_seg = [](const Vec2& a, const Vec2& b, const Vec2& c) {
		return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
			   std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
	};
	const int o1 = orient(p1, p2, q1);
	const int o2 = orient(p1, p2, q2);
	const int o3 = orient(q1, q2, p1);
	const int o4 = orient(q1, q2, p2);
	if (o1 != o2 && o3 != o4) return true;
	if (o1 == 0 && on_seg(p1, p2, q1)) return true;
	if (o2 == 0 && on_seg(p1, p2, q2)) return true;
	if (o3 == 0 && on_seg(q1, q2, p1)) return true;
	if (o4 == 0 && on_seg(q1, q2, p2)) return true;
	return false;
}

double segment_segment_distance(
	const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1)
{
	if (segments_intersect(a0, a1, b0, b1)) return 0.0;
	double d = point_segment_distance(a0, b0, b1);
	d = std::min(d, point_segment_distance(a1, b0, b1));
	d = std::min(d, point_segment_distance(b0, a0, a1));
	d = std::min(d, point_segment_distance(b1, a0, a1));
	return d;
}

double box_segment_distance(
	const Vec2& lo, const Vec2& hi, const Vec2& s0, const Vec2& s1)
{
	const auto inside = [&](const Vec2& p) {
		return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
	};
	if (inside(s0) || inside(s1)) return 0.0;
	const Vec2 c00{lo.x, lo.y}, c10{hi.x, lo.y}, c11{hi.x, hi.y}, c01{lo.x, hi.y};
	double d = segment_segment_distance(s0, s1, c00, c10);
	d = std::min(d, segment_segment_distance(s0, s1, c10, c11));
	d = std::min(d, segment_segment_distance(s0, s1, c11, c01));
	d = std::min(d, segment_segment_distance(s0, s1, c01, c00));
	return d;
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly, bool* strict)
{
	const size_t n = poly.size();
	bool inside = false;
	bool on_boundary = false;
	for (size_t i = 0, j = n - 1; i < n; j = i++)
	{
		const Vec2& a = poly[j];
		const Vec2& b = poly[i];
		if (point_segment_distance(p, a, b) < 1e-12) on_boundary = true;
		if ((a.y > p.y) != (b.y > p.y))
		{
			const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
			if (p.x < xint) inside = !inside;
		}
	}
	if (strict) *strict = inside && !on_boundary;
	return inside || on_boundary;
}

double polygon_boundary_distance(const Vec2& p, const std::vector<Vec2>& poly)
{
	double d = std::numeric_limits<double>::infinity();
	const size_t n = poly.size();
	for (size_t i = 0, j = n - 1; i < n; j = i++)
		d = std::min(d, point_segment_distance(p, poly[j], poly[i]));
	return d;
}

Vec2 closest_point_on_polyline(
	const Vec2& p, const std::vector<Vec2>& pts, double* dist_out)
{
	Vec2 best = pts.empty() ? p : pts.front();
	double best_d = pts.empty() ? 0.0 : distance(p, best);
	for (size_t i = 0; i + 1 < pts.size(); ++i)
	{
		const Vec2 c = closest_point_on_segment(p, pts[i], pts[i + 1]);
		const double d = distance(p, c);
		if (d < best_d)
		{
			best_d = d;
			best = c;
		}
	}
	if (dist_out) *dist_out = best_d;
	return best;
}

}  // namespace greenbench
