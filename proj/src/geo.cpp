#include "adgraph/geo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "adgraph/error.hpp"
#include "adgraph/io.hpp"

namespace adgraph {

namespace {

constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

void check_coordinates(double lat, double lon) {
  if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
    throw std::invalid_argument("coordinates out of range");
  }
}

}  // namespace

double haversine_miles(double lat1, double lon1, double lat2, double lon2) {
  check_coordinates(lat1, lon1);
  check_coordinates(lat2, lon2);
  const double phi1 = deg2rad(lat1);
  const double phi2 = deg2rad(lat2);
  const double dphi = deg2rad(lat2 - lat1);
  const double dlambda = deg2rad(lon2 - lon1);
  const double s1 = std::sin(dphi / 2);
  const double s2 = std::sin(dlambda / 2);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusMiles * std::asin(std::sqrt(std::min(1.0, h)));
}

std::string location_key(std::string_view name) {
  while (!name.empty() && std::isspace(static_cast<unsigned char>(name.front()))) name.remove_prefix(1);
  while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.remove_suffix(1);
  std::string key(name);
  for (auto& c : key) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  return key;
}

Gazetteer::Gazetteer(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    check_coordinates(entries_[i].point.lat, entries_[i].point.lon);
    index_.try_emplace(location_key(entries_[i].name), i);
  }
}

Gazetteer Gazetteer::parse(std::string_view csv) {
  std::vector<Entry> entries;
  bool header = true;
  io::for_each_line(csv, [&](std::string_view line, std::size_t line_no) {
    if (line.empty()) return;
    if (header) {
      header = false;
      if (location_key(line) != "name,lat,lon") {
        throw InputError("gazetteer header must be name,lat,lon");
      }
      return;
    }
    const auto c2 = line.rfind(',');
    const auto c1 = c2 == std::string_view::npos ? c2 : line.rfind(',', c2 - 1);
    if (c1 == std::string_view::npos) {
      throw InputError("gazetteer line " + std::to_string(line_no) + ": expected name,lat,lon");
    }
    try {
      const std::string lat_s(line.substr(c1 + 1, c2 - c1 - 1));
      const std::string lon_s(line.substr(c2 + 1));
      const double lat = std::stod(lat_s);
      const double lon = std::stod(lon_s);
      entries.push_back({std::string(line.substr(0, c1)), {lat, lon}});
      check_coordinates(lat, lon);
    } catch (const std::exception&) {
      throw InputError("gazetteer line " + std::to_string(line_no) + ": invalid coordinates");
    }
  });
  return Gazetteer(std::move(entries));
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) {
  try {
    return parse(io::read_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::optional<GeoPoint> Gazetteer::lookup(std::string_view name) const {
  const auto it = index_.find(location_key(name));
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].point;
}

std::optional<std::string_view> Gazetteer::canonical_name(std::string_view name) const {
  const auto it = index_.find(location_key(name));
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].name;
}

}  // namespace adgraph
