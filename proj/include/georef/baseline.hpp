#pragma once

#include "georef/dataset.hpp"
#include "georef/gazetteer.hpp"
#include "georef/geo.hpp"
#include "georef/prediction.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace georef {

struct DbscanParams {
    double eps_km = 25.0;
    int min_pts = 2;

    /// Throws std::invalid_argument unless eps_km > 0 and min_pts >= 1.
    void validate() const;
};

/**
 * @brief DBSCAN with the haversine metric.
 *
 * A point is core when at least min_pts points (itself included) lie
 * within eps_km. Clusters are grown from core points in input order, so
 * a border point joins the first cluster that reaches it. Noise is -1.
 */
std::vector<int> dbscan(std::span<const GeoPoint> points, const DbscanParams& params);

struct ClusterResult {
    std::vector<int> labels;
    std::optional<int> chosen_cluster;  // largest cluster; ties go to the lowest label
    std::optional<GeoPoint> centroid;
};

/// Clusters the points and picks the largest cluster.
ClusterResult cluster_and_select(std::span<const GeoPoint> points, const DbscanParams& params);

struct BaselineConfig {
    DbscanParams dbscan;
    int max_rows = 10;           // candidates requested per entity
    bool use_state = true;       // pass stateProvince to the gazetteer
    std::size_t lookup_parallelism = 1;  // concurrent lookups per record
    bool record_latency = false;  // off keeps prediction logs byte-reproducible
};

/**
 * Gazetteer-matching georeferencer: extract place names, pool every
 * candidate of every entity, cluster, and answer the centroid of the
 * largest cluster. When every candidate is noise the first entity's
 * rank-0 candidate is used; no entities or no candidates yield a
 * NoCoordinates failure. raw_response holds a JSON trace of the run.
 *
 * Gazetteer and NER errors propagate.
 */
Prediction georeference_by_gazetteer(const OccurrenceRecord& record, const PlaceNameExtractor& ner,
                                     Gazetteer& gazetteer, const BaselineConfig& config);

/// Runs the baseline over all records (input order kept) with up to
/// `parallelism` records in flight. The first gazetteer error aborts the batch.
std::vector<Prediction> batch_georeference(const std::vector<OccurrenceRecord>& records,
                                           const PlaceNameExtractor& ner, Gazetteer& gazetteer,
                                           const BaselineConfig& config, std::size_t parallelism);

}  // namespace georef
