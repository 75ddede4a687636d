#include "georef/baseline.hpp"

#include <deque>
#include <stdexcept>

namespace georef {

void DbscanParams::validate() const {
    if (!(eps_km > 0.0)) throw std::invalid_argument("dbscan eps must be > 0");
    if (min_pts < 1) throw std::invalid_argument("dbscan min_pts must be >= 1");
}

std::vector<int> dbscan(std::span<const GeoPoint> points, const DbscanParams& params) {
    params.validate();
    const std::size_t n = points.size();

    std::vector<std::vector<std::size_t>> neighbours(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (haversine_distance(points[i], points[j]).value() <= params.eps_km) neighbours[i].push_back(j);
        }
    }
    auto is_core = [&](std::size_t i) { return static_cast<int>(neighbours[i].size()) >= params.min_pts; };

    constexpr int kUnassigned = -2;
    std::vector<int> labels(n, kUnassigned);
    int next_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != kUnassigned) continue;
        if (!is_core(i)) {
            labels[i] = -1;  // may still become a border point later
            continue;
        }
        const int label = next_label++;
        labels[i] = label;
        std::deque<std::size_t> frontier{i};
        while (!frontier.empty()) {
            const auto p = frontier.front();
            frontier.pop_front();
            for (auto q : neighbours[p]) {
                if (labels[q] >= 0) continue;
                labels[q] = label;
                if (is_core(q)) frontier.push_back(q);
            }
        }
    }
    return labels;
}

ClusterResult cluster_and_select(std::span<const GeoPoint> points, const DbscanParams& params) {
    ClusterResult r;
    r.labels = dbscan(points, params);
    std::vector<std::size_t> sizes;
    for (int l : r.labels) {
        if (l < 0) continue;
        if (static_cast<std::size_t>(l) >= sizes.size()) sizes.resize(l + 1, 0);
        ++sizes[l];
    }
    for (std::size_t l = 0; l < sizes.size(); ++l) {
        if (!r.chosen_cluster || sizes[l] > sizes[*r.chosen_cluster]) r.chosen_cluster = static_cast<int>(l);
    }
    if (r.chosen_cluster) {
        std::vector<GeoPoint> members;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (r.labels[i] == *r.chosen_cluster) members.push_back(points[i]);
        }
        r.centroid = centroid(members);
    }
    return r;
}

}  // namespace georef
