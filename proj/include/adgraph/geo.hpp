#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace adgraph {

inline constexpr double kEarthRadiusMiles = 3958.7613;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const GeoPoint&) const = default;
};

/// Great-circle distance in miles. Throws std::invalid_argument for
/// latitudes outside [-90, 90] or longitudes outside [-180, 180].
double haversine_miles(double lat1, double lon1, double lat2, double lon2);
inline double haversine_miles(const GeoPoint& a, const GeoPoint& b) {
  return haversine_miles(a.lat, a.lon, b.lat, b.lon);
}

/// Location name -> coordinates, matched case-insensitively after
/// whitespace trimming.
class Gazetteer {
 public:
  struct Entry {
    std::string name;
    GeoPoint point;
  };

  Gazetteer() = default;
  explicit Gazetteer(std::vector<Entry> entries);

  /// CSV with header `name,lat,lon`. Throws IoError or InputError.
  static Gazetteer load(const std::filesystem::path& path);
  static Gazetteer parse(std::string_view csv);

  std::optional<GeoPoint> lookup(std::string_view name) const;
  /// Display name of the matching entry.
  std::optional<std::string_view> canonical_name(std::string_view name) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Key used for gazetteer matching: trimmed, ASCII-lowercased.
std::string location_key(std::string_view name);

}  // namespace adgraph
