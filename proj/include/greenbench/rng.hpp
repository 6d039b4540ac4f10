#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace greenbench
{

/// splitmix64 step; used both for stream seeding and sample generation so that
/// results are identical across platforms (std:: distributions are not).
inline uint64_t splitmix64(uint64_t& state)
{
	uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
	z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
	z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
	return z ^ (z >> 31);
}

inline uint64_t fnv1a(std::string_view s)
{
	uint64_t h = 0xcbf29ce484222325ULL;
	for (const char c : s)
	{
		h ^= static_cast<uint8_t>(c);
		h *= 0x100000001b3ULL;
	}
	return h;
}

/// Derive the seed of trial `index` from the scenario seed.
inline uint64_t trial_seed(uint64_t scenario_seed, uint64_t index)
{
	uint64_t s = scenario_seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
	(void)splitmix64(s);
	return s;
}

/// Named deterministic random stream. Each noise source (encoder R, encoder L,
/// lidar, ...) owns its stream so adding one source never perturbs another.
class RandomStream
{
   public:
	RandomStream() = default;
	RandomStream(uint64_t seed, std::string_view name)
	{
		state_ = seed ^ fnv1a(name);
		(void)splitmix64(state_);  // decorrelate nearby seeds
	}

	uint64_t next_u64() { return splitmix64(state_); }

	/// Uniform in [0, 1) with 53 random bits.
	double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

	/// Zero-mean Gaussian via Box-Muller; caches the spare value.
	double gaussian(double sigma)
	{
		if (has_spare_)
		{
			has_spare_ = false;
			return spare_ * sigma;
		}
		double u1 = uniform01();
		while (u1 <= 0.0) u1 = uniform01();
		const double u2 = uniform01();
		const double r = std::sqrt(-2.0 * std::log(u1));
		const double a = 2.0 * M_PI * u2;
		spare_ = r * std::sin(a);
		has_spare_ = true;
		return r * std::cos(a) * sigma;
	}

   private:
	uint64_t state_ = 0x853c49e6748fea9bULL;
	double spare_ = 0.0;
	bool has_spare_ = false;
};

}  // namespace greenbench
