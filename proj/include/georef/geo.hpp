#pragma once

#include <span>
#include <stdexcept>
#include <string>

namespace georef {

/// Mean Earth radius (IUGG) used for every great-circle distance.
inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfCircumferenceKm = kPi * kEarthRadiusKm;

class GeoError : public std::runtime_error {
public:
    enum class Kind { OutOfRange, NotFinite, EmptyInput };

    GeoError(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/**
 * @brief Latitude/longitude in decimal degrees.
 *
 * Only constructible through validate_point(), so every instance satisfies
 * lat in [-90, 90], lon in [-180, 180], both finite.
 */
class GeoPoint {
public:
    double lat() const noexcept { return lat_; }
    double lon() const noexcept { return lon_; }

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
    GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {}
    friend GeoPoint validate_point(double lat, double lon);

    double lat_;
    double lon_;
};

/// Throws GeoError(OutOfRange | NotFinite). Never clamps or wraps.
GeoPoint validate_point(double lat, double lon);

/// Non-negative great-circle distance, bounded by half the circumference.
class DistanceKm {
public:
    explicit DistanceKm(double km);
    double value() const noexcept { return km_; }

    friend auto operator<=>(const DistanceKm&, const DistanceKm&) = default;

private:
    double km_;
};

/// Haversine distance (atan2 form) on a sphere of radius kEarthRadiusKm.
DistanceKm haversine_distance(const GeoPoint& a, const GeoPoint& b) noexcept;

/**
 * Arithmetic mean of latitudes and of longitudes. No antimeridian
 * unwrapping: points at 179.9 and -179.9 average to 0.
 * Throws GeoError(EmptyInput) on an empty span.
 */
GeoPoint centroid(std::span<const GeoPoint> points);

/// True when the longitudes span more than 180 degrees, i.e. the naive
/// centroid is likely on the wrong side of the globe.
bool spans_antimeridian(std::span<const GeoPoint> points) noexcept;

}  // namespace georef
