#include "georef/geo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace georef {

namespace {

double to_radians(double deg) { return deg * kPi / 180.0; }

std::string describe(const char* which, double value) {
    std::ostringstream out;
    out.precision(17);
    out << which << " out of range: " << value;
    return out.str();
}

}  // namespace

GeoPoint validate_point(double lat, double lon) {
    if (!std::isfinite(lat) || !std::isfinite(lon)) {
        throw GeoError(GeoError::Kind::NotFinite, "coordinate is not finite");
    }
    if (lat < -90.0 || lat > 90.0) {
        throw GeoError(GeoError::Kind::OutOfRange, describe("latitude", lat));
    }
    if (lon < -180.0 || lon > 180.0) {
        throw GeoError(GeoError::Kind::OutOfRange, describe("longitude", lon));
    }
    return GeoPoint(lat, lon);
}

DistanceKm::DistanceKm(double km) : km_(km) {
    // small slack for rounding at exact antipodes
    if (!std::isfinite(km) || km < 0.0 || km > kHalfCircumferenceKm * (1.0 + 1e-12)) {
        throw GeoError(GeoError::Kind::OutOfRange, describe("distance", km));
    }
}

DistanceKm haversine_distance(const GeoPoint& a, const GeoPoint& b) noexcept {
    const double phi1 = to_radians(a.lat());
    const double phi2 = to_radians(b.lat());
    const double dphi = phi2 - phi1;
    const double dlambda = to_radians(b.lon() - a.lon());

    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    h = std::clamp(h, 0.0, 1.0);
    const double c = 2.0 * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
    return DistanceKm(std::min(kEarthRadiusKm * c, kHalfCircumferenceKm));
}

GeoPoint centroid(std::span<const GeoPoint> points) {
    if (points.empty()) {
        throw GeoError(GeoError::Kind::EmptyInput, "centroid of an empty point set");
    }
    double lat_sum = 0.0;
    double lon_sum = 0.0;
    for (const auto& p : points) {
        lat_sum += p.lat();
        lon_sum += p.lon();
    }
    const auto n = static_cast<double>(points.size());
    // a mean of in-range values is in range, up to rounding
    return validate_point(std::clamp(lat_sum / n, -90.0, 90.0),
                          std::clamp(lon_sum / n, -180.0, 180.0));
}

bool spans_antimeridian(std::span<const GeoPoint> points) noexcept {
    if (points.empty()) return false;
    auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                        [](const GeoPoint& x, const GeoPoint& y) {
                                            return x.lon() < y.lon();
                                        });
    return hi->lon() - lo->lon() > 180.0;
}

}  // namespace georef
