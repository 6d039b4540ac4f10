#include "greenbench/metrics.hpp"

#include <cmath>

namespace greenbench::metrics
{

double sae(const std::vector<double>& errors)
{
	if (errors.empty()) throw MetricError("sae: empty error sequence");
	double sum = 0.0;
	for (double e : errors) sum += std::abs(e);
	return sum;
}

double sci(const std::vector<double>& inputs)
{
	if (inputs.size() < 2)
		throw MetricError("sci: need at least two input samples");
	double sum = 0.0;
	for (size_t k = 1; k < inputs.size(); ++k)
	{
		const double d = inputs[k] - inputs[k - 1];
		sum += d * d;
	}
	return sum;
}

std::pair<std::vector<double>, std::vector<double>> category1_signals(
	const TrialLog& log)
{
	if (log.rows.empty()) throw MetricError("category1_signals: empty log");
	if (log.omega_max <= 0.0 || log.tau_max <= 0.0)
		throw MetricError("category1_signals: omega_max and tau_max must be > 0");
	std::vector<double> e, u;
	e.reserve(log.rows.size());
	u.reserve(log.rows.size());
	for (const LogRow& r : log.rows)
	{
		const double e_r = r.omega_ref[0] - r.omega_meas[0];
		const double e_l = r.omega_ref[1] - r.omega_meas[1];
		e.push_back((std::abs(e_r) + std::abs(e_l)) / (2.0 * log.omega_max));
		u.push_back((std::abs(r.tau[0]) + std::abs(r.tau[1])) /
					(2.0 * log.tau_max));
	}
	return {std::move(e), std::move(u)};
}

std::pair<std::vector<double>, std::vector<double>> category2_signals(
	const TrialLog& log)
{
	if (log.rows.empty()) throw MetricError("category2_signals: empty log");
	if (!log.has_teb)
		throw MetricError("category2_signals: log carries no tracker prediction");
	if (log.v_max <= 0.0 || log.omega_max <= 0.0 || log.dt_mid <= 0.0)
		throw MetricError("category2_signals: bad normalization constants");
	std::vector<double> e, u;
	e.reserve(log.rows.size());
	u.reserve(log.rows.size());
	for (const LogRow& r : log.rows)
	{
		const double d = std::hypot(r.x - r.x_teb, r.y - r.y_teb);
		e.push_back(d / (log.v_max * log.dt_mid));
		const double nv = r.v_cmd / log.v_max;
		const double nw = r.omega_cmd / log.omega_max;
		u.push_back(std::sqrt(nv * nv + nw * nw));
	}
	return {std::move(e), std::move(u)};
}

std::vector<double> category3_error(const TrialLog& log)
{
	if (log.rows.empty()) throw MetricError("category3_error: empty log");
	if (!log.has_plan)
		throw MetricError("category3_error: log carries no plan points");
	std::vector<double> e;
	e.reserve(log.rows.size());
	for (const LogRow& r : log.rows)
		e.push_back(std::hypot(r.x - r.plan_x, r.y - r.plan_y));
	return e;
}

MetricReport composite(const TrialLog& log)
{
	if (log.category < 1 || log.category > 3)
		throw MetricError("composite: category must be 1, 2 or 3");
	MetricReport rep;
	rep.n_samples = log.rows.size();

	const auto [e1, u1] = category1_signals(log);
	rep.sae1 = sae(e1);
	rep.sci1 = sci(u1);
	rep.j1 = rep.sae1 + rep.sci1;

	if (log.category >= 2)
	{
		const auto [e2, u2] = category2_signals(log);
		rep.sae2 = sae(e2);
		rep.sci2 = sci(u2);
		rep.j2 = rep.sae2 + rep.sci2;
		rep.jt2 = (rep.j1 + rep.j2) / 2.0;
	}
	if (log.category == 3)
	{
		rep.sae3 = sae(category3_error(log));
		rep.j3 = rep.sae3;
		rep.jt3 = (rep.j1 + rep.j2 + rep.j3) / 3.0;
	}
	return rep;
}

double polyline_distance(const std::vector<Vec2>& polyline, const Vec2& p)
{
	if (polyline.empty())
		throw MetricError("polyline_distance: empty polyline");
	double d = 0.0;
	closest_point_on_polyline(p, polyline, &d);
	return d;
}

}  // namespace greenbench::metrics
