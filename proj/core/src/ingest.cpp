#include "roadtwin/ingest.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "roadtwin/spatial.hpp"

namespace roadtwin {

std::string to_string(Semantic s) {
    switch (s) {
        case Semantic::RoadSurface: return "RoadSurface";
        case Semantic::RoadSide: return "RoadSide";
        case Semantic::RoadLane: return "RoadLane";
        case Semantic::RoadSign: return "RoadSign";
        case Semantic::RoadLight: return "RoadLight";
        case Semantic::Guardrail: return "Guardrail";
    }
    return "Unknown";
}

std::string to_string(Part p) {
    switch (p) {
        case Part::Pole: return "Pole";
        case Part::Panel: return "Panel";
        case Part::Light: return "Light";
        default: return "None";
    }
}

std::optional<Semantic> semantic_from_string(const std::string& name) {
    for (int i = 0; i <= 5; ++i) {
        auto s = static_cast<Semantic>(i);
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

void LabeledCloud::append(const LabeledCloud& other) {
    points.insert(points.end(), other.points.begin(), other.points.end());
    semantic.insert(semantic.end(), other.semantic.begin(), other.semantic.end());
    part.insert(part.end(), other.part.begin(), other.part.end());
}

LabeledCloud LabeledCloud::select(const std::vector<uint32_t>& indices) const {
    LabeledCloud out;
    out.points.reserve(indices.size());
    for (uint32_t i : indices) out.push_back(points[i], semantic[i], part[i]);
    return out;
}

void LabeledCloud::validate() const {
    if (points.empty()) throw DataError("cloud is empty");
    if (points.size() != semantic.size() || points.size() != part.size())
        throw InternalError("cloud field sizes disagree");
    for (size_t i = 0; i < points.size(); ++i) {
        const Vec3& p = points[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            throw DataError("non-finite coordinate at point " + std::to_string(i));
        if (part[i] != Part::None && !pole_like(semantic[i]))
            throw DataError("part label on non-pole-like semantic at point " + std::to_string(i));
    }
}

namespace {

Semantic parse_semantic_code(int code, size_t row) {
    if (code < 0 || code > 5)
        throw DataError("unknown semantic code " + std::to_string(code) + " at row " +
                        std::to_string(row));
    return static_cast<Semantic>(code);
}

Part parse_part_code(int code, size_t row) {
    if (code == 255) return Part::None;
    if (code < 0 || code > 2)
        throw DataError("unknown part code " + std::to_string(code) + " at row " +
                        std::to_string(row));
    return static_cast<Part>(code);
}

LabeledCloud load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    LabeledCloud cloud;
    std::string line;
    size_t row = 0;
    bool header_checked = false;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        if (!header_checked) {
            header_checked = true;
            if (line.rfind("x,", 0) == 0 || line.rfind("x ,", 0) == 0) continue;  // header row
        }
        std::stringstream ss(line);
        std::string field;
        std::array<std::string, 5> fields;
        size_t n = 0;
        while (std::getline(ss, field, ',') && n < 5) fields[n++] = field;
        if (n < 4) throw DataError("malformed CSV row " + std::to_string(row) + " in " + path);
        try {
            Vec3 p{std::stod(fields[0]), std::stod(fields[1]), std::stod(fields[2])};
            Semantic sem = parse_semantic_code(std::stoi(fields[3]), row);
            Part part = Part::None;
            if (n == 5 && !fields[4].empty()) part = parse_part_code(std::stoi(fields[4]), row);
            if (part != Part::None && !pole_like(sem))
                throw DataError("part code on non-pole-like semantic at row " + std::to_string(row));
            cloud.push_back(p, sem, part);
        } catch (const std::invalid_argument&) {
            throw DataError("malformed CSV row " + std::to_string(row) + " in " + path);
        }
    }
    return cloud;
}

void save_csv(const LabeledCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "x,y,z,semantic,part\n";
    char buf[128];
    for (size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        int len = std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,", p.x, p.y, p.z,
                                static_cast<int>(cloud.semantic[i]));
        out.write(buf, len);
        if (cloud.part[i] != Part::None) out << static_cast<int>(cloud.part[i]);
        out << '\n';
    }
}

struct PlyProperty {
    std::string type;
    std::string name;
};

size_t ply_type_size(const std::string& t) {
    if (t == "float64" || t == "double") return 8;
    if (t == "float32" || t == "float") return 4;
    if (t == "uint8" || t == "uchar") return 1;
    if (t == "int32" || t == "int") return 4;
    throw DataError("unsupported PLY property type " + t);
}

LabeledCloud load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw DataError("not a PLY file: " + path);
    bool binary = false;
    size_t vertex_count = 0;
    std::vector<PlyProperty> props;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::stringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt == "binary_little_endian") binary = true;
            else if (fmt != "ascii") throw DataError("unsupported PLY format " + fmt);
        } else if (tok == "element") {
            std::string name;
            ss >> name >> vertex_count;
            if (name != "vertex") throw DataError("unexpected PLY element " + name);
        } else if (tok == "property") {
            PlyProperty p;
            ss >> p.type >> p.name;
            props.push_back(p);
        } else if (tok == "end_header") {
            break;
        }
    }
    int ix = -1, iy = -1, iz = -1, isem = -1, ipart = -1;
    for (size_t i = 0; i < props.size(); ++i) {
        if (props[i].name == "x") ix = static_cast<int>(i);
        else if (props[i].name == "y") iy = static_cast<int>(i);
        else if (props[i].name == "z") iz = static_cast<int>(i);
        else if (props[i].name == "semantic") isem = static_cast<int>(i);
        else if (props[i].name == "part") ipart = static_cast<int>(i);
    }
    if (ix < 0 || iy < 0 || iz < 0 || isem < 0)
        throw DataError("PLY missing required vertex properties in " + path);

    LabeledCloud cloud;
    cloud.points.reserve(vertex_count);
    std::vector<double> vals(props.size());
    for (size_t v = 0; v < vertex_count; ++v) {
        if (binary) {
            for (size_t i = 0; i < props.size(); ++i) {
                const size_t sz = ply_type_size(props[i].type);
                unsigned char raw[8];
                in.read(reinterpret_cast<char*>(raw), static_cast<std::streamsize>(sz));
                if (!in) throw DataError("truncated PLY body in " + path);
                if (sz == 8) {
                    double d;
                    std::memcpy(&d, raw, 8);
                    vals[i] = d;
                } else if (sz == 4 && (props[i].type == "float32" || props[i].type == "float")) {
                    float f;
                    std::memcpy(&f, raw, 4);
                    vals[i] = f;
                } else if (sz == 4) {
                    int32_t n;
                    std::memcpy(&n, raw, 4);
                    vals[i] = n;
                } else {
                    vals[i] = raw[0];
                }
            }
        } else {
            if (!std::getline(in, line)) throw DataError("truncated PLY body in " + path);
            std::stringstream ss(line);
            for (size_t i = 0; i < props.size(); ++i)
                if (!(ss >> vals[i])) throw DataError("malformed PLY vertex row in " + path);
        }
        Vec3 p{vals[ix], vals[iy], vals[iz]};
        Semantic sem = parse_semantic_code(static_cast<int>(vals[isem]), v);
        Part part = Part::None;
        if (ipart >= 0) part = parse_part_code(static_cast<int>(vals[ipart]), v);
        if (part != Part::None && !pole_like(sem))
            throw DataError("part label on non-pole-like semantic at vertex " + std::to_string(v));
        cloud.push_back(p, sem, part);
    }
    return cloud;
}

void save_ply(const LabeledCloud& cloud, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << cloud.size() << "\n"
        << "property float64 x\nproperty float64 y\nproperty float64 z\n"
        << "property uint8 semantic\nproperty uint8 part\n"
        << "end_header\n";
    for (size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        out.write(reinterpret_cast<const char*>(&p.x), 8);
        out.write(reinterpret_cast<const char*>(&p.y), 8);
        out.write(reinterpret_cast<const char*>(&p.z), 8);
        const uint8_t sem = static_cast<uint8_t>(cloud.semantic[i]);
        const uint8_t part = static_cast<uint8_t>(cloud.part[i]);
        out.write(reinterpret_cast<const char*>(&sem), 1);
        out.write(reinterpret_cast<const char*>(&part), 1);
    }
}

CloudFormat format_from_extension(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".ply" || ext == ".PLY") return CloudFormat::PLY;
    if (ext == ".csv" || ext == ".CSV") return CloudFormat::CSV;
    throw ConfigError("cannot infer cloud format from path " + path);
}

}  // namespace

LabeledCloud load_cloud(const std::string& path, CloudFormat format) {
    LabeledCloud cloud = format == CloudFormat::CSV ? load_csv(path) : load_ply(path);
    cloud.validate();
    return cloud;
}

void save_cloud(const LabeledCloud& cloud, const std::string& path, CloudFormat format) {
    if (format == CloudFormat::CSV) save_csv(cloud, path);
    else save_ply(cloud, path);
}

LabeledCloud load_cloud(const std::string& path) { return load_cloud(path, format_from_extension(path)); }
void save_cloud(const LabeledCloud& cloud, const std::string& path) {
    save_cloud(cloud, path, format_from_extension(path));
}

namespace {

LabeledCloud voxel_downsample(const LabeledCloud& cloud, double voxel) {
    struct Accum {
        Vec3 sum{};
        std::vector<uint32_t> members;
    };
    std::unordered_map<int64_t, Accum> voxels;
    auto coord = [voxel](double v) { return static_cast<int64_t>(std::floor(v / voxel)); };
    std::vector<int64_t> order;  // first-seen voxel order keeps output deterministic
    for (size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        const int64_t key = detail::cell_key(coord(p.x), coord(p.y), coord(p.z));
        auto [it, inserted] = voxels.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.sum = it->second.sum + p;
        it->second.members.push_back(static_cast<uint32_t>(i));
    }
    std::vector<uint32_t> keep;
    keep.reserve(order.size());
    for (int64_t key : order) {
        const Accum& acc = voxels.at(key);
        const Vec3 centroid = acc.sum * (1.0 / static_cast<double>(acc.members.size()));
        uint32_t best = acc.members.front();
        double best_d2 = std::numeric_limits<double>::max();
        for (uint32_t idx : acc.members) {
            const Vec3 d = cloud.points[idx] - centroid;
            const double d2 = d.dot(d);
            if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
                best_d2 = d2;
                best = idx;
            }
        }
        keep.push_back(best);
    }
    return cloud.select(keep);
}

LabeledCloud remove_outliers(const LabeledCloud& cloud, int k, double std_ratio) {
    const size_t n = cloud.size();
    if (n <= 1) return cloud;
    // Cell size tuned to expected neighbor distance; any value is correct.
    GridIndex3 index(cloud.points, 0.5);
    std::vector<double> mean_dist(n);
    for (size_t i = 0; i < n; ++i) {
        auto nn = index.knn(cloud.points[i], static_cast<size_t>(k) + 1);  // includes self
        double sum = 0;
        size_t cnt = 0;
        for (uint32_t j : nn) {
            if (j == i) continue;
            sum += (cloud.points[j] - cloud.points[i]).norm();
            ++cnt;
        }
        mean_dist[i] = cnt ? sum / static_cast<double>(cnt) : 0.0;
    }
    double mean = 0;
    for (double d : mean_dist) mean += d;
    mean /= static_cast<double>(n);
    double var = 0;
    for (double d : mean_dist) var += (d - mean) * (d - mean);
    const double stddev = std::sqrt(var / static_cast<double>(n));
    const double cutoff = mean + std_ratio * stddev;
    std::vector<uint32_t> keep;
    keep.reserve(n);
    for (size_t i = 0; i < n; ++i)
        if (mean_dist[i] <= cutoff) keep.push_back(static_cast<uint32_t>(i));
    return cloud.select(keep);
}

}  // namespace

LabeledCloud preprocess(const LabeledCloud& cloud, const PreprocessParams& params) {
    if (cloud.empty()) throw DataError("preprocess: empty input cloud");
    if (params.voxel_size < 0 || params.outlier_std_ratio < 0 || params.outlier_neighbors < 1)
        throw ConfigError("preprocess: invalid parameters");
    LabeledCloud out = cloud;
    if (params.voxel_size > 0) out = voxel_downsample(out, params.voxel_size);
    if (params.outlier_std_ratio > 0)
        out = remove_outliers(out, params.outlier_neighbors, params.outlier_std_ratio);
    if (out.empty()) throw DataError("preprocess removed all points");
    return out;
}

std::map<Semantic, LabeledCloud> partition_by_semantic(const LabeledCloud& cloud) {
    std::map<Semantic, LabeledCloud> out;
    for (size_t i = 0; i < cloud.size(); ++i)
        out[cloud.semantic[i]].push_back(cloud.points[i], cloud.semantic[i], cloud.part[i]);
    return out;
}

}  // namespace roadtwin
