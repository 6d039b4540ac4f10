#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace greenbench
{

/// Error with a line diagnostic, thrown by the structured-text parsers.
class ConfigError : public std::runtime_error
{
   public:
	ConfigError(int line, const std::string& msg)
		: std::runtime_error("line " + std::to_string(line) + ": " + msg),
		  line_(line)
	{
	}
	int line() const { return line_; }

   private:
	int line_;
};

/// One `key value value ...` line of a config file.
struct ConfigEntry
{
	std::string key;
	std::vector<std::string> values;
	int line = 0;

	double as_double(size_t i) const;
	int as_int(size_t i) const;
	bool as_bool(size_t i) const;
};

/// Whitespace-separated key/value dialect shared by world and parameter files.
/// Lines are `key v1 v2 ...`; `#` starts a comment; order is preserved.
class ConfigText
{
   public:
	static ConfigText parse(const std::string& text);

	const std::vector<ConfigEntry>& entries() const { return entries_; }
	bool has(const std::string& key) const;

	/// Last entry for `key`, or nullptr.
	const ConfigEntry* find(const std::string& key) const;

	double get_double(const std::string& key, double fallback) const;
	int get_int(const std::string& key, int fallback) const;
	bool get_bool(const std::string& key, bool fallback) const;
	std::vector<double> get_doubles(const std::string& key) const;

   private:
	std::vector<ConfigEntry> entries_;
};

}  // namespace greenbench
