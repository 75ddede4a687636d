#include "georef/baseline.hpp"

#include "georef/parallel.hpp"

#include <json.hpp>

#include <chrono>

namespace georef {

using Json = nlohmann::ordered_json;

Prediction georeference_by_gazetteer(const OccurrenceRecord& record, const PlaceNameExtractor& ner,
                                     Gazetteer& gazetteer, const BaselineConfig& config) {
    config.dbscan.validate();
    const auto start = std::chrono::steady_clock::now();

    Prediction pred;
    pred.record_id = record.id;
    pred.method = Method{Method::Kind::GazetteerBaseline, PromptPattern::ContextControl,
                         std::string(to_string(gazetteer.source()))};
    pred.attempts = 1;

    const auto entities = ner.extract(record.locality);
    const std::string state = config.use_state ? record.state_province : std::string();

    std::vector<std::vector<GazetteerCandidate>> per_entity(entities.size());
    parallel_for(entities.size(), config.lookup_parallelism, [&](std::size_t i) {
        per_entity[i] = gazetteer.lookup(entities[i].text, state, record.country_code, config.max_rows);
    });

    std::vector<GeoPoint> pool;
    Json trace;
    trace["entities"] = Json::array();
    for (std::size_t i = 0; i < entities.size(); ++i) {
        trace["entities"].push_back({{"text", entities[i].text}, {"candidates", per_entity[i].size()}});
        for (const auto& c : per_entity[i]) pool.push_back(c.point);
    }

    std::optional<GeoPoint> answer;
    std::string path;
    if (pool.empty()) {
        path = entities.empty() ? "no_entities" : "no_candidates";
    } else {
        const auto cluster = cluster_and_select(pool, config.dbscan);
        trace["labels"] = cluster.labels;
        if (cluster.centroid) {
            answer = cluster.centroid;
            path = "cluster";
            trace["chosen_cluster"] = *cluster.chosen_cluster;
            std::vector<GeoPoint> members;
            for (std::size_t i = 0; i < pool.size(); ++i) {
                if (cluster.labels[i] == *cluster.chosen_cluster) members.push_back(pool[i]);
            }
            trace["antimeridian"] = spans_antimeridian(members);
        } else {
            for (const auto& cands : per_entity) {
                if (!cands.empty()) {
                    answer = cands.front().point;
                    break;
                }
            }
            path = "fallback_rank0";
        }
    }
    trace["path"] = path;

    pred.parsed.raw = trace.dump();
    pred.parsed.point = answer;
    pred.parsed.failure = answer ? ParseFailure::None : ParseFailure::NoCoordinates;
    if (config.record_latency) {
        pred.latency_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    }
    return pred;
}

std::vector<Prediction> batch_georeference(const std::vector<OccurrenceRecord>& records,
                                           const PlaceNameExtractor& ner, Gazetteer& gazetteer,
                                           const BaselineConfig& config, std::size_t parallelism) {
    std::vector<Prediction> out(records.size());
    parallel_for(records.size(), parallelism,
                 [&](std::size_t i) { out[i] = georeference_by_gazetteer(records[i], ner, gazetteer, config); });
    return out;
}

}  // namespace georef
