#pragma once

#include "georef/dataset.hpp"
#include "georef/geo.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <unistd.h>

namespace georef::testing {

inline std::string test_path(const std::string& relative) { return std::string(GEOREF_TEST_DIR) + "/" + relative; }
inline std::string asset_path(const std::string& relative) { return std::string(GEOREF_ASSET_DIR) + "/" + relative; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("georef_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline OccurrenceRecord make_record(std::string id, std::string locality, double lat, double lon,
                                    std::string country = "NZ", std::string state = "") {
    return OccurrenceRecord{std::move(id), std::move(locality), validate_point(lat, lon), std::move(country),
                            std::move(state), "fixture"};
}

inline GeoPoint random_point(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> lat(-90.0, 90.0);
    std::uniform_real_distribution<double> lon(-180.0, 180.0);
    return validate_point(lat(gen), lon(gen));
}

}  // namespace georef::testing
