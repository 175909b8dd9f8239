#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "roadtwin/ingest.hpp"
#include "roadtwin/lift.hpp"

namespace roadtwin {

using Json = nlohmann::ordered_json;

enum class RecordKind { PlaneLike, Guardrail, PoleLike };

/// Front/back multipolygons in one-to-one correspondence (guardrail segment
/// or panel part).
struct PairRecord {
    MultiPolygon3D front;
    MultiPolygon3D back;
};

/// The per-instance storage unit. Exactly one payload is populated per kind.
struct GeometryRecord {
    RecordKind kind = RecordKind::PlaneLike;

    MultiPolygon3D plane;                // PlaneLike
    std::vector<PairRecord> guardrails;  // Guardrail_0..
    std::vector<MultiPolygon3D> poles;   // Poles/Pole_0..
    std::vector<PairRecord> panels;      // Panels/Panel_0..
    std::vector<MultiPolygon3D> lights;  // Lights/Light_0..

    // metadata envelope
    std::string semantic;    // label name
    int instance_id = 0;
    std::string segment_id;
    Json extras = Json::object();  // unknown keys preserved for forward compat

    void validate() const;  // throws DataError naming the violated path
};

/// Serialize to the canonical nested key structure; byte-deterministic.
std::string to_json(const GeometryRecord& record);

/// Structural inverse of to_json; schema violations carry JSON-path diagnostics.
GeometryRecord from_json(const std::string& bytes);

std::string record_filename(const GeometryRecord& record);

struct SizeRow {
    std::string asset;
    uint64_t json_bytes = 0;
    uint64_t mesh_bytes = 0;
};

struct SizeReport {
    std::vector<SizeRow> rows;
    uint64_t json_total = 0;
    uint64_t mesh_total = 0;

    double ratio() const { return json_total ? double(mesh_total) / double(json_total) : 0.0; }
    std::string to_text() const;
    Json to_json_table() const;
};

/// Byte sizes per asset type for the two storage strategies. Asset type is
/// taken from the <segment>_<semantic>_<index>.<ext> naming convention.
SizeReport size_report(const std::vector<std::string>& json_paths,
                       const std::vector<std::string>& mesh_paths);

}  // namespace roadtwin
