#include <doctest.h>

#include "georef/geo.hpp"
#include "support.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace georef;

namespace {

// Frozen from tests/oracles/derive_values.py (chord geometry, 40 digits).
constexpr double kWellingtonAucklandKm = 493.4960263490581;
constexpr double kAntipodalKm = 20015.114442035924;
constexpr double kTenthDegreeLatitudeKm = 11.119508023353291;

}  // namespace

TEST_CASE("identical points are zero apart") {
    const auto p = validate_point(-41.2866, 174.7756);
    CHECK(haversine_distance(p, p).value() == 0.0);
    const auto pole = validate_point(90.0, 0.0);
    CHECK(haversine_distance(pole, pole).value() == 0.0);
}

TEST_CASE("Wellington to Auckland matches the chord oracle") {
    const auto wlg = validate_point(-41.2866, 174.7756);
    const auto akl = validate_point(-36.8485, 174.7633);
    CHECK(haversine_distance(wlg, akl).value() == doctest::Approx(kWellingtonAucklandKm).epsilon(1e-12));
}

TEST_CASE("antipodal points are half a circumference apart") {
    CHECK(kHalfCircumferenceKm == doctest::Approx(kAntipodalKm).epsilon(1e-15));
    const auto a = validate_point(0.0, 0.0);
    const auto b = validate_point(0.0, 180.0);
    CHECK(haversine_distance(a, b).value() == doctest::Approx(kAntipodalKm).epsilon(1e-12));
    const auto n = validate_point(90.0, 0.0);
    const auto s = validate_point(-90.0, 0.0);
    CHECK(haversine_distance(n, s).value() == doctest::Approx(kAntipodalKm).epsilon(1e-12));
}

TEST_CASE("a tenth of a degree of latitude at the equator") {
    const auto a = validate_point(0.0, 0.0);
    const auto b = validate_point(0.1, 0.0);
    CHECK(haversine_distance(a, b).value() == doctest::Approx(kTenthDegreeLatitudeKm).epsilon(1e-10));
}

TEST_CASE("distance is symmetric and bounded") {
    std::mt19937_64 gen(11);
    for (int i = 0; i < 500; ++i) {
        const auto a = testing::random_point(gen);
        const auto b = testing::random_point(gen);
        const double ab = haversine_distance(a, b).value();
        CHECK(ab == haversine_distance(b, a).value());
        CHECK(ab >= 0.0);
        CHECK(ab <= kHalfCircumferenceKm * (1 + 1e-12));
    }
}

TEST_CASE("validate_point rejects bad input and never clamps") {
    auto kind_of = [](double lat, double lon) {
        try {
            validate_point(lat, lon);
        } catch (const GeoError& e) {
            return static_cast<int>(e.kind());
        }
        return -1;
    };
    CHECK(kind_of(90.0001, 0) == static_cast<int>(GeoError::Kind::OutOfRange));
    CHECK(kind_of(0, -180.5) == static_cast<int>(GeoError::Kind::OutOfRange));
    CHECK(kind_of(std::nan(""), 0) == static_cast<int>(GeoError::Kind::NotFinite));
    CHECK(kind_of(0, std::numeric_limits<double>::infinity()) == static_cast<int>(GeoError::Kind::NotFinite));
    CHECK(kind_of(-90, 180) == -1);
    const auto p = validate_point(-90, -180);
    CHECK(p.lat() == -90);
    CHECK(p.lon() == -180);
}

TEST_CASE("DistanceKm rejects negative and oversized values") {
    CHECK_THROWS_AS(DistanceKm(-0.001), GeoError);
    CHECK_THROWS_AS(DistanceKm(kHalfCircumferenceKm * 1.01), GeoError);
    CHECK(DistanceKm(0.0).value() == 0.0);
}

TEST_CASE("centroid is the arithmetic mean") {
    std::vector<GeoPoint> pts{validate_point(-41.05, 174.45), validate_point(-40.95, 174.55),
                              validate_point(-41.0, 174.5)};
    const auto c = centroid(pts);
    CHECK(c.lat() == doctest::Approx(-41.0).epsilon(1e-14));
    CHECK(c.lon() == doctest::Approx(174.5).epsilon(1e-14));
    CHECK_THROWS_AS(centroid(std::span<const GeoPoint>{}), GeoError);
}

TEST_CASE("antimeridian spans are detected, not unwrapped") {
    std::vector<GeoPoint> pts{validate_point(-17.0, 179.9), validate_point(-17.1, -179.9)};
    CHECK(spans_antimeridian(pts));
    CHECK(centroid(pts).lon() == doctest::Approx(0.0));
    std::vector<GeoPoint> local{validate_point(-41.0, 174.0), validate_point(-41.1, 175.0)};
    CHECK_FALSE(spans_antimeridian(local));
}
