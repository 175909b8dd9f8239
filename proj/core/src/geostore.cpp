#include "roadtwin/geostore.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace roadtwin {

namespace {

void validate_multipolygon(const MultiPolygon3D& mp, const std::string& path) {
    if (mp.empty()) throw DataError(path + ": empty MultiPolygon");
    for (size_t i = 0; i < mp.size(); ++i) {
        const std::string ppath = path + ".Polygon_" + std::to_string(i);
        if (mp[i].shell.vertices.size() < 3)
            throw DataError(ppath + ".Shell: fewer than 3 vertices");
        for (size_t h = 0; h < mp[i].holes.size(); ++h)
            if (mp[i].holes[h].vertices.size() < 3)
                throw DataError(ppath + ".Holes[" + std::to_string(h) + "]: fewer than 3 vertices");
    }
}

void validate_pair(const PairRecord& pair, const std::string& path) {
    validate_multipolygon(pair.front, path + ".Front");
    validate_multipolygon(pair.back, path + ".Back");
    if (pair.front.size() != pair.back.size())
        throw DataError(path + ": Front/Back polygon counts differ");
    for (size_t i = 0; i < pair.front.size(); ++i) {
        const auto& f = pair.front[i];
        const auto& b = pair.back[i];
        if (f.shell.vertices.size() != b.shell.vertices.size() || f.holes.size() != b.holes.size())
            throw DataError(path + ".Polygon_" + std::to_string(i) +
                            ": Front/Back vertex correspondence broken");
        for (size_t h = 0; h < f.holes.size(); ++h)
            if (f.holes[h].vertices.size() != b.holes[h].vertices.size())
                throw DataError(path + ".Polygon_" + std::to_string(i) + ".Holes[" +
                                std::to_string(h) + "]: Front/Back vertex correspondence broken");
    }
}

Json vertices_to_json(const std::vector<Vec3>& verts) {
    Json arr = Json::array();
    for (const Vec3& v : verts) arr.push_back(Json::array({v.x, v.y, v.z}));
    return arr;
}

Json multipolygon_to_json(const MultiPolygon3D& mp) {
    Json polys = Json::object();
    for (size_t i = 0; i < mp.size(); ++i) {
        Json poly = Json::object();
        poly["Shell"] = Json{{"Vertices", vertices_to_json(mp[i].shell.vertices)}};
        Json holes = Json::array();
        for (const auto& h : mp[i].holes) holes.push_back(vertices_to_json(h.vertices));
        poly["Holes"] = Json{{"Vertices", holes}};
        polys["Polygon_" + std::to_string(i)] = std::move(poly);
    }
    return Json{{"MultiPolygon", std::move(polys)}};
}

Json pair_to_json(const PairRecord& pair) {
    return Json{{"Front", multipolygon_to_json(pair.front)},
                {"Back", multipolygon_to_json(pair.back)}};
}

std::vector<Vec3> vertices_from_json(const Json& arr, const std::string& path) {
    if (!arr.is_array()) throw DataError(path + ": Vertices must be an array");
    std::vector<Vec3> out;
    out.reserve(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) {
        const Json& v = arr[i];
        if (!v.is_array() || v.size() != 3)
            throw DataError(path + "[" + std::to_string(i) + "]: vertex must be [x, y, z]");
        out.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>()});
    }
    return out;
}

MultiPolygon3D multipolygon_from_json(const Json& node, const std::string& path) {
    if (!node.is_object() || !node.contains("MultiPolygon"))
        throw DataError(path + ": missing MultiPolygon");
    const Json& polys = node["MultiPolygon"];
    MultiPolygon3D mp;
    for (size_t i = 0;; ++i) {
        const std::string key = "Polygon_" + std::to_string(i);
        if (!polys.contains(key)) break;
        const Json& p = polys[key];
        const std::string ppath = path + ".MultiPolygon." + key;
        if (!p.contains("Shell") || !p["Shell"].contains("Vertices"))
            throw DataError(ppath + ": missing Shell.Vertices");
        Polygon3D poly;
        poly.shell.vertices = vertices_from_json(p["Shell"]["Vertices"], ppath + ".Shell.Vertices");
        if (p.contains("Holes") && p["Holes"].contains("Vertices")) {
            const Json& holes = p["Holes"]["Vertices"];
            if (!holes.is_array()) throw DataError(ppath + ".Holes.Vertices: must be an array");
            for (size_t h = 0; h < holes.size(); ++h) {
                Ring3D ring;
                ring.vertices = vertices_from_json(
                    holes[h], ppath + ".Holes.Vertices[" + std::to_string(h) + "]");
                poly.holes.push_back(std::move(ring));
            }
        }
        mp.push_back(std::move(poly));
    }
    if (mp.empty()) throw DataError(path + ".MultiPolygon: no Polygon_0 entry");
    return mp;
}

PairRecord pair_from_json(const Json& node, const std::string& path) {
    if (!node.contains("Front") || !node.contains("Back"))
        throw DataError(path + ": missing Front/Back");
    PairRecord pair;
    pair.front = multipolygon_from_json(node["Front"], path + ".Front");
    pair.back = multipolygon_from_json(node["Back"], path + ".Back");
    return pair;
}

std::string kind_name(RecordKind k) {
    switch (k) {
        case RecordKind::PlaneLike: return "PlaneLike";
        case RecordKind::Guardrail: return "Guardrail";
        default: return "PoleLike";
    }
}

}  // namespace

void GeometryRecord::validate() const {
    switch (kind) {
        case RecordKind::PlaneLike:
            validate_multipolygon(plane, "MultiPolygon");
            break;
        case RecordKind::Guardrail:
            if (guardrails.empty()) throw DataError("Guardrail: no segments");
            for (size_t i = 0; i < guardrails.size(); ++i)
                validate_pair(guardrails[i], "Guardrail_" + std::to_string(i));
            break;
        case RecordKind::PoleLike:
            if (poles.empty()) throw DataError("Poles: pole-like record has no Pole");
            for (size_t i = 0; i < poles.size(); ++i)
                validate_multipolygon(poles[i], "Poles.Pole_" + std::to_string(i));
            for (size_t i = 0; i < panels.size(); ++i)
                validate_pair(panels[i], "Panels.Panel_" + std::to_string(i));
            for (size_t i = 0; i < lights.size(); ++i)
                validate_multipolygon(lights[i], "Lights.Light_" + std::to_string(i));
            break;
    }
}

std::string to_json(const GeometryRecord& record) {
    record.validate();
    Json meta = Json::object();
    meta["SchemaVersion"] = 1;
    meta["Kind"] = kind_name(record.kind);
    meta["Semantic"] = record.semantic;
    meta["InstanceId"] = record.instance_id;
    meta["SegmentId"] = record.segment_id;
    meta["Units"] = "m";

    Json data = Json::object();
    switch (record.kind) {
        case RecordKind::PlaneLike:
            data = multipolygon_to_json(record.plane);
            break;
        case RecordKind::Guardrail:
            for (size_t i = 0; i < record.guardrails.size(); ++i)
                data["Guardrail_" + std::to_string(i)] = pair_to_json(record.guardrails[i]);
            break;
        case RecordKind::PoleLike: {
            Json poles = Json::object();
            for (size_t i = 0; i < record.poles.size(); ++i)
                poles["Pole_" + std::to_string(i)] = multipolygon_to_json(record.poles[i]);
            data["Poles"] = std::move(poles);
            if (!record.panels.empty()) {
                Json panels = Json::object();
                for (size_t i = 0; i < record.panels.size(); ++i)
                    panels["Panel_" + std::to_string(i)] = pair_to_json(record.panels[i]);
                data["Panels"] = std::move(panels);
            }
            if (!record.lights.empty()) {
                Json lights = Json::object();
                for (size_t i = 0; i < record.lights.size(); ++i)
                    lights["Light_" + std::to_string(i)] = multipolygon_to_json(record.lights[i]);
                data["Lights"] = std::move(lights);
            }
            break;
        }
    }
    for (auto& [key, value] : record.extras.items()) meta[key] = value;

    Json root = Json::object();
    root["Meta"] = std::move(meta);
    root["Data"] = std::move(data);
    return root.dump() + "\n";
}

GeometryRecord from_json(const std::string& bytes) {
    Json root;
    try {
        root = Json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("JSON parse error: ") + e.what());
    }
    if (!root.contains("Data")) throw DataError("missing Data envelope");
    const Json& data = root["Data"];

    GeometryRecord record;
    if (root.contains("Meta")) {
        const Json& meta = root["Meta"];
        record.semantic = meta.value("Semantic", "");
        record.instance_id = meta.value("InstanceId", 0);
        record.segment_id = meta.value("SegmentId", "");
        for (auto& [key, value] : meta.items())
            if (key != "Semantic" && key != "InstanceId" && key != "SegmentId" &&
                key != "Units" && key != "SchemaVersion" && key != "Kind")
                record.extras[key] = value;
    }

    std::vector<std::string> known;
    if (data.contains("MultiPolygon")) {
        record.kind = RecordKind::PlaneLike;
        record.plane = multipolygon_from_json(data, "Data");
        known = {"MultiPolygon"};
    } else if (data.contains("Guardrail_0")) {
        record.kind = RecordKind::Guardrail;
        for (size_t i = 0;; ++i) {
            const std::string key = "Guardrail_" + std::to_string(i);
            if (!data.contains(key)) break;
            record.guardrails.push_back(pair_from_json(data[key], "Data." + key));
            known.push_back(key);
        }
    } else if (data.contains("Poles")) {
        record.kind = RecordKind::PoleLike;
        for (size_t i = 0;; ++i) {
            const std::string key = "Pole_" + std::to_string(i);
            if (!data["Poles"].contains(key)) break;
            record.poles.push_back(multipolygon_from_json(data["Poles"][key], "Data.Poles." + key));
        }
        if (data.contains("Panels"))
            for (size_t i = 0;; ++i) {
                const std::string key = "Panel_" + std::to_string(i);
                if (!data["Panels"].contains(key)) break;
                record.panels.push_back(
                    pair_from_json(data["Panels"][key], "Data.Panels." + key));
            }
        if (data.contains("Lights"))
            for (size_t i = 0;; ++i) {
                const std::string key = "Light_" + std::to_string(i);
                if (!data["Lights"].contains(key)) break;
                record.lights.push_back(
                    multipolygon_from_json(data["Lights"][key], "Data.Lights." + key));
            }
        known = {"Poles", "Panels", "Lights"};
    } else {
        throw DataError("Data: unrecognized record structure");
    }

    for (auto& [key, value] : data.items()) {
        bool is_known = false;
        for (const auto& k : known)
            if (key == k) is_known = true;
        if (record.kind == RecordKind::Guardrail && key.rfind("Guardrail_", 0) == 0) is_known = true;
        if (!is_known) record.extras[key] = value;
    }
    record.validate();
    return record;
}

std::string record_filename(const GeometryRecord& record) {
    return record.segment_id + "_" + record.semantic + "_" + std::to_string(record.instance_id) +
           ".json";
}

std::string SizeReport::to_text() const {
    std::ostringstream os;
    os << "Asset          JSON bytes    Mesh bytes    Mesh/JSON\n";
    char buf[128];
    for (const auto& row : rows) {
        const double r = row.json_bytes ? double(row.mesh_bytes) / double(row.json_bytes) : 0.0;
        std::snprintf(buf, sizeof buf, "%-12s %12llu %13llu %10.2f\n", row.asset.c_str(),
                      static_cast<unsigned long long>(row.json_bytes),
                      static_cast<unsigned long long>(row.mesh_bytes), r);
        os << buf;
    }
    char total[128];
    std::snprintf(total, sizeof total, "%-12s %12llu %13llu %10.2f\n", "Total",
                  static_cast<unsigned long long>(json_total),
                  static_cast<unsigned long long>(mesh_total), ratio());
    os << total;
    return os.str();
}

Json SizeReport::to_json_table() const {
    Json rows_json = Json::array();
    for (const auto& row : rows)
        rows_json.push_back(Json{{"Asset", row.asset},
                                 {"JsonBytes", row.json_bytes},
                                 {"MeshBytes", row.mesh_bytes}});
    return Json{{"Rows", rows_json},
                {"JsonTotal", json_total},
                {"MeshTotal", mesh_total},
                {"MeshToJsonRatio", ratio()}};
}

namespace {

std::string asset_from_filename(const std::string& path) {
    const std::string stem = std::filesystem::path(path).stem().string();
    // expected: <segment>_<semantic>_<index>
    const auto last = stem.find_last_of('_');
    if (last == std::string::npos) return "Other";
    const auto prev = stem.find_last_of('_', last - 1);
    const std::string sem = stem.substr(prev == std::string::npos ? 0 : prev + 1,
                                        last - (prev == std::string::npos ? 0 : prev + 1));
    return semantic_from_string(sem) ? sem : "Other";
}

}  // namespace

SizeReport size_report(const std::vector<std::string>& json_paths,
                       const std::vector<std::string>& mesh_paths) {
    SizeReport report;
    std::map<std::string, SizeRow> by_asset;
    auto add = [&](const std::string& path, bool is_json) {
        std::error_code ec;
        const uint64_t size = std::filesystem::file_size(path, ec);
        if (ec) throw DataError("size_report: missing file " + path);
        auto& row = by_asset[asset_from_filename(path)];
        if (is_json) row.json_bytes += size;
        else row.mesh_bytes += size;
    };
    for (const auto& p : json_paths) add(p, true);
    for (const auto& p : mesh_paths) add(p, false);
    for (auto& [asset, row] : by_asset) {
        row.asset = asset;
        report.json_total += row.json_bytes;
        report.mesh_total += row.mesh_bytes;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace roadtwin
