#include "greenbench/config_text.hpp"

#include <sstream>

namespace greenbench
{

double ConfigEntry::as_double(size_t i) const
{
	if (i >= values.size())
		throw ConfigError(line, "'" + key + "' needs more values");
	try
	{
		size_t pos = 0;
		const double v = std::stod(values[i], &pos);
		if (pos != values[i].size()) throw std::invalid_argument("");
		return v;
	}
	catch (const std::exception&)
	{
		throw ConfigError(line, "'" + key + "': not a number: " + values[i]);
	}
}

int ConfigEntry::as_int(size_t i) const
{
	const double v = as_double(i);
	const int iv = static_cast<int>(v);
	if (static_cast<double>(iv) != v)
		throw ConfigError(line, "'" + key + "': not an integer: " + values[i]);
	return iv;
}

bool ConfigEntry::as_bool(size_t i) const
{
	if (i >= values.size())
		throw ConfigError(line, "'" + key + "' needs more values");
	const std::string& v = values[i];
	if (v == "on" || v == "true" || v == "1") return true;
	if (v == "off" || v == "false" || v == "0") return false;
	throw ConfigError(line, "'" + key + "': expected on/off, got " + v);
}

ConfigText ConfigText::parse(const std::string& text)
{
	ConfigText out;
	std::istringstream is(text);
	std::string line;
	int lineno = 0;
	while (std::getline(is, line))
	{
		++lineno;
		const size_t hash = line.find('#');
		if (hash != std::string::npos) line.erase(hash);
		std::istringstream ls(line);
		ConfigEntry e;
		e.line = lineno;
		if (!(ls >> e.key)) continue;
		std::string tok;
		while (ls >> tok) e.values.push_back(tok);
		out.entries_.push_back(std::move(e));
	}
	return out;
}

bool ConfigText::has(const std::string& key) const { return find(key) != nullptr; }

const ConfigEntry* ConfigText::find(const std::string& key) const
{
	const ConfigEntry* found = nullptr;
	for (const auto& e : entries_)
		if (e.key == key) found = &e;
	return found;
}

double ConfigText::get_double(const std::string& key, double fallback) const
{
	const ConfigEntry* e = find(key);
	return e ? e->as_double(0) : fallback;
}

int ConfigText::get_int(const std::string& key, int fallback) const
{
	const ConfigEntry* e = find(key);
	return e ? e->as_int(0) : fallback;
}

bool ConfigText::get_bool(const std::string& key, bool fallback) const
{
	const ConfigEntry* e = find(key);
	return e ? e->as_bool(0) : fallback;
}

std::vector<double> ConfigText::get_doubles(const std::string& key) const
{
	std::vector<double> out;
	const ConfigEntry* e = find(key);
	if (!e) return out;
	for (size_t i = 0; i < e->values.size(); ++i) out.push_back(e->as_double(i));
	return out;
}

}  // namespace greenbench
