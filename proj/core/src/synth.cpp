#include "roadtwin/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

namespace roadtwin {

SceneSpec preset_200m() {
    SceneSpec spec;
    const double edge_r = spec.carriageways * spec.width + spec.median_gap / 2.0;  // right edge y
    for (double x : {40.0, 100.0, 160.0}) {
        SignSpec sign;
        sign.pos = {x, edge_r + 2.5};
        sign.yaw = 0.0;
        spec.signs.push_back(sign);
    }
    // lights on the opposite side; arms reach toward the road (+y)
    for (double x : {60.0, 140.0}) {
        LightSpec light;
        light.pos = {x, -edge_r - 2.5};
        light.yaw = 1.5707963267948966;
        spec.lights.push_back(light);
    }
    for (int side : {-1, 1}) {
        GuardrailSpec rail;
        rail.start = {side < 0 ? 30.0 : 110.0, side * (edge_r + 0.4)};
        rail.heading = 0.0;
        rail.length = 60.0;
        spec.guardrails.push_back(rail);
    }
    return spec;
}

namespace {

struct Builder {
    const SceneSpec& spec;
    Scene scene;
    std::mt19937_64 rng;
    std::normal_distribution<double> noise;

    Builder(const SceneSpec& s) : spec(s), rng(s.seed), noise(0.0, s.sigma) {}

    double elev(double x) const {
        return spec.elev_amplitude * std::sin(2.0 * M_PI * x / spec.elev_wavelength);
    }
    double shear(double x) const { return 0.5 * spec.curvature * x * x; }

    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(rng);
    }

    void emit(size_t instance, const Vec3& p, Semantic sem, Part part = Part::None) {
        const Vec3 noisy{p.x + noise(rng), p.y + noise(rng), p.z + noise(rng)};
        scene.cloud.push_back(noisy, sem, part);
        scene.instance_of_point.push_back(static_cast<int32_t>(instance));
    }

    size_t begin_instance(Semantic sem, double length) {
        SceneInstance inst;
        inst.semantic = sem;
        inst.length = length;
        scene.instances.push_back(std::move(inst));
        return scene.instances.size() - 1;
    }

    // Triangulated height-field strip over [x0,x1] x [y0,y1] in the sheared
    // road frame; doubles as the GT mesh grid for sides and surfaces.
    Mesh strip_mesh(double x0, double x1, double y0, double y1,
                    const std::function<double(double, double)>& zfun) {
        const double step = 0.25;
        const int nx = std::max(1, static_cast<int>(std::ceil((x1 - x0) / step)));
        const int ny = std::max(1, static_cast<int>(std::ceil((y1 - y0) / step)));
        Mesh mesh;
        for (int i = 0; i <= nx; ++i) {
            const double x = x0 + (x1 - x0) * i / nx;
            for (int j = 0; j <= ny; ++j) {
                const double y = y0 + (y1 - y0) * j / ny;
                mesh.vertices.push_back({x, y + shear(x), zfun(x, y)});
            }
        }
        auto at = [&](int i, int j) { return static_cast<uint32_t>(i * (ny + 1) + j); };
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                mesh.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
                mesh.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
            }
        return mesh;
    }

    void sample_strip(size_t instance, Semantic sem, double x0, double x1, double y0, double y1,
                      const std::function<double(double, double)>& zfun) {
        const long n = std::lround((x1 - x0) * (y1 - y0) * spec.density);
        for (long k = 0; k < n; ++k) {
            const double x = uniform(x0, x1);
            const double y = uniform(y0, y1);
            emit(instance, {x, y + shear(x), zfun(x, y)}, sem);
        }
    }

    // Vertical cylinder side surface [z0, z1].
    void sample_pole(size_t instance, Semantic sem, Part part, const Vec2& c, double r, double z0,
                     double z1) {
        const long n = std::lround(2.0 * M_PI * r * (z1 - z0) * spec.density);
        for (long k = 0; k < n; ++k) {
            const double th = uniform(0, 2.0 * M_PI);
            emit(instance, {c.x + r * std::cos(th), c.y + r * std::sin(th), uniform(z0, z1)}, sem,
                 part);
        }
    }

    Mesh cylinder_mesh(const Vec3& p0, const Vec3& p1, double r) {
        const Vec3 axis = p1 - p0;
        const double len = axis.norm();
        const Vec3 d = axis * (1.0 / len);
        const Vec3 ref = std::abs(d.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
        Vec3 u{d.y * ref.z - d.z * ref.y, d.z * ref.x - d.x * ref.z, d.x * ref.y - d.y * ref.x};
        u = u * (1.0 / u.norm());
        const Vec3 v{d.y * u.z - d.z * u.y, d.z * u.x - d.x * u.z, d.x * u.y - d.y * u.x};
        std::vector<Polygon3D> rings(2);
        for (int k = 0; k < 2; ++k) {
            const Vec3 c = k == 0 ? p0 : p1;
            for (int i = 0; i < 32; ++i) {
                const double th = 2.0 * M_PI * i / 32;
                rings[k].shell.vertices.push_back(c + u * (r * std::cos(th)) +
                                                  v * (r * std::sin(th)));
            }
        }
        return mesh_ring_series(rings);
    }

    // Horizontal cylinder from p0 along (cos yaw, sin yaw, 0).
    void sample_arm(size_t instance, Semantic sem, Part part, const Vec3& p0, double yaw,
                    double len, double r) {
        const Vec3 d{std::cos(yaw), std::sin(yaw), 0};
        const Vec3 n{-std::sin(yaw), std::cos(yaw), 0};
        const long count = std::lround(2.0 * M_PI * r * len * spec.density);
        for (long k = 0; k < count; ++k) {
            const double th = uniform(0, 2.0 * M_PI);
            const Vec3 p = p0 + d * uniform(0, len) + n * (r * std::cos(th)) +
                           Vec3{0, 0, r * std::sin(th)};
            emit(instance, p, sem, part);
        }
    }

    // Thin box: two w x h faces offset by t/2 along the face normal.
    void sample_panel(size_t instance, Semantic sem, Part part, const Vec3& center, double yaw,
                      double w, double h, double t) {
        const Vec3 d{std::cos(yaw), std::sin(yaw), 0};
        const Vec3 n{-std::sin(yaw), std::cos(yaw), 0};
        const long count = std::lround(2.0 * w * h * spec.density);
        for (long k = 0; k < count; ++k) {
            const double side = rng() % 2 == 0 ? 0.5 : -0.5;
            const Vec3 p = center + d * uniform(-w / 2, w / 2) + n * (side * t) +
                           Vec3{0, 0, uniform(-h / 2, h / 2)};
            emit(instance, p, sem, part);
        }
    }

    Mesh panel_mesh(const Vec3& center, double yaw, double w, double h, double t) {
        const Vec3 d{std::cos(yaw), std::sin(yaw), 0};
        const Vec3 n{-std::sin(yaw), std::cos(yaw), 0};
        Polygon3D front, back;
        for (auto [su, sv] : {std::pair{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}) {
            const Vec3 base = center + d * (su * w) + Vec3{0, 0, sv * h};
            front.shell.vertices.push_back(base + n * (0.5 * t));
            back.shell.vertices.push_back(base - n * (0.5 * t));
        }
        return mesh_pair(front, back);
    }

    // --- guardrail --------------------------------------------------------------

    static std::vector<Vec2> cross_section(const std::string& kind) {
        if (kind == "#") {
            return {{-0.10, 0.30}, {0.10, 0.30}, {0.10, 0.70}, {-0.10, 0.70}};
        }
        // "T": 0.1 m stem capped by a 0.4 m wide top plate
        return {{-0.05, 0.05}, {0.05, 0.05},  {0.05, 0.55},  {0.20, 0.55},
                {0.20, 0.75},  {-0.20, 0.75}, {-0.20, 0.55}, {-0.05, 0.55}};
    }

    void guardrail(const GuardrailSpec& g) {
        const std::vector<Vec2> section = cross_section(g.cross_section);
        auto at = [&](double u) {
            double psi = g.heading, x, y;
            if (std::abs(g.curvature) < 1e-12) {
                x = g.start.x + std::cos(g.heading) * u;
                y = g.start.y + std::sin(g.heading) * u;
            } else {
                psi = g.heading + g.curvature * u;
                x = g.start.x + (std::sin(psi) - std::sin(g.heading)) / g.curvature;
                y = g.start.y - (std::cos(psi) - std::cos(g.heading)) / g.curvature;
            }
            return std::pair<Vec2, Vec2>{{x, y}, {-std::sin(psi), std::cos(psi)}};  // pos, normal
        };

        const size_t inst = begin_instance(Semantic::Guardrail, g.length);
        // perimeter-weighted surface sampling
        std::vector<double> cum{0};
        for (size_t i = 0; i < section.size(); ++i)
            cum.push_back(cum.back() + (section[(i + 1) % section.size()] - section[i]).norm());
        const double perimeter = cum.back();
        const long count = std::lround(perimeter * g.length * spec.density);
        for (long k = 0; k < count; ++k) {
            const double s = uniform(0, perimeter);
            const size_t e =
                static_cast<size_t>(std::upper_bound(cum.begin(), cum.end(), s) - cum.begin()) -
                1;
            const size_t ei = std::min(e, section.size() - 1);
            const Vec2 a = section[ei];
            const Vec2 b = section[(ei + 1) % section.size()];
            const double t = (s - cum[ei]) / std::max(1e-12, (b - a).norm());
            const Vec2 nz = a + (b - a) * t;
            auto [pos, nrm] = at(uniform(0, g.length));
            emit(inst, {pos.x + nz.x * nrm.x, pos.y + nz.x * nrm.y, nz.y}, Semantic::Guardrail);
        }

        std::vector<Polygon3D> rings;
        const int n_rings = std::max(2, static_cast<int>(std::ceil(g.length / 0.5)) + 1);
        for (int k = 0; k < n_rings; ++k) {
            auto [pos, nrm] = at(g.length * k / (n_rings - 1));
            Polygon3D ring;
            for (const Vec2& nz : section)
                ring.shell.vertices.push_back({pos.x + nz.x * nrm.x, pos.y + nz.x * nrm.y, nz.y});
            rings.push_back(std::move(ring));
        }
        scene.instances[inst].meshes.push_back(
            {"Guardrail", mesh_ring_series(rings)});
    }
};

}  // namespace

Scene generate(const SceneSpec& spec) {
    if (spec.density <= 0) throw ConfigError("scene: density must be > 0");
    if (spec.sigma < 0) throw ConfigError("scene: sigma must be >= 0");
    if (spec.length <= 0 || spec.width <= 0) throw ConfigError("scene: non-positive dimensions");
    {
        std::vector<Vec2> anchors;
        for (const auto& s : spec.signs) anchors.push_back(s.pos);
        for (const auto& l : spec.lights) anchors.push_back(l.pos);
        for (size_t i = 0; i < anchors.size(); ++i)
            for (size_t j = i + 1; j < anchors.size(); ++j)
                if ((anchors[i] - anchors[j]).norm() < 1.0)
                    throw ConfigError("scene: overlapping pole placements");
    }

    Builder b(spec);
    const double L = spec.length;
    const double half_gap = spec.median_gap / 2.0;

    // carriageway surfaces
    std::vector<std::pair<double, double>> lanes;
    for (int c = 0; c < spec.carriageways; ++c) {
        const int side = c % 2 == 0 ? 1 : -1;
        const double inner = half_gap + (c / 2) * spec.width;
        const double y0 = side > 0 ? inner : -(inner + spec.width);
        lanes.push_back({y0, y0 + spec.width});
    }
    auto road_z = [&](double x, double) { return b.elev(x); };
    for (auto [y0, y1] : lanes) {
        const size_t inst = b.begin_instance(Semantic::RoadSurface, L);
        b.sample_strip(inst, Semantic::RoadSurface, 0, L, y0, y1, road_z);
        b.scene.instances[inst].meshes.push_back({"Surface", b.strip_mesh(0, L, y0, y1, road_z)});
    }

    // sides: outer slopes and the median strip
    double ymin = 1e300, ymax = -1e300;
    for (auto [y0, y1] : lanes) {
        ymin = std::min(ymin, y0);
        ymax = std::max(ymax, y1);
    }
    std::vector<std::tuple<double, double, double>> sides;  // y0, y1, edge (grade anchor)
    if (spec.slopes >= 1) sides.push_back({ymax, ymax + spec.slope_width, ymax});
    if (spec.slopes >= 2) sides.push_back({ymin - spec.slope_width, ymin, ymin});
    if (spec.slopes >= 3 && spec.carriageways >= 2) sides.push_back({-half_gap, half_gap, 0.0});
    for (auto [y0, y1, edge] : sides) {
        auto zfun = [&b, &spec, edge](double x, double y) {
            return b.elev(x) - (edge == 0.0 ? 0.0 : spec.slope_grade * std::abs(y - edge));
        };
        const size_t inst = b.begin_instance(Semantic::RoadSide, L);
        b.sample_strip(inst, Semantic::RoadSide, 0, L, y0, y1, zfun);
        b.scene.instances[inst].meshes.push_back({"Side", b.strip_mesh(0, L, y0, y1, zfun)});
    }

    // lane dashes down the middle of each carriageway
    auto dash_z = [&](double x, double) { return b.elev(x) + 0.002; };
    for (auto [y0, y1] : lanes) {
        const double yc = (y0 + y1) / 2.0;
        for (double x = spec.dash_gap / 2.0; x + spec.dash_length <= L;
             x += spec.dash_length + spec.dash_gap) {
            const size_t inst = b.begin_instance(Semantic::RoadLane, spec.dash_length);
            b.sample_strip(inst, Semantic::RoadLane, x, x + spec.dash_length,
                           yc - spec.dash_width / 2.0, yc + spec.dash_width / 2.0, dash_z);
            b.scene.instances[inst].meshes.push_back(
                {"Lane", b.strip_mesh(x, x + spec.dash_length, yc - spec.dash_width / 2.0,
                                      yc + spec.dash_width / 2.0, dash_z)});
        }
    }

    for (const SignSpec& s : spec.signs) {
        const size_t inst = b.begin_instance(Semantic::RoadSign, s.pole_height);
        b.sample_pole(inst, Semantic::RoadSign, Part::Pole, s.pos, s.pole_radius, 0,
                      s.pole_height);
        const Vec3 center{s.pos.x, s.pos.y, s.panel_bottom + s.panel_height / 2.0};
        b.sample_panel(inst, Semantic::RoadSign, Part::Panel, center, s.yaw, s.panel_width,
                       s.panel_height, s.panel_thickness);
        b.scene.instances[inst].meshes.push_back(
            {"Pole", b.cylinder_mesh({s.pos.x, s.pos.y, 0}, {s.pos.x, s.pos.y, s.pole_height},
                                     s.pole_radius)});
        b.scene.instances[inst].meshes.push_back(
            {"Panel", b.panel_mesh(center, s.yaw, s.panel_width, s.panel_height,
                                   s.panel_thickness)});
    }

    for (const LightSpec& l : spec.lights) {
        const size_t inst = b.begin_instance(Semantic::RoadLight, l.pole_height);
        b.sample_pole(inst, Semantic::RoadLight, Part::Pole, l.pos, l.pole_radius, 0, l.pole_height);
        const Vec3 top{l.pos.x, l.pos.y, l.pole_height};
        b.sample_arm(inst, Semantic::RoadLight, Part::Light, top, l.yaw, l.arm_length, l.arm_radius);
        b.scene.instances[inst].meshes.push_back(
            {"Pole", b.cylinder_mesh({l.pos.x, l.pos.y, 0}, top, l.pole_radius)});
        const Vec3 arm_end = top + Vec3{std::cos(l.yaw), std::sin(l.yaw), 0} * l.arm_length;
        b.scene.instances[inst].meshes.push_back(
            {"Arm", b.cylinder_mesh(top, arm_end, l.arm_radius)});
    }

    for (const GuardrailSpec& g : spec.guardrails) b.guardrail(g);

    return std::move(b.scene);
}

Json Scene::census() const {
    Json counts = Json::object();
    Json detail = Json::array();
    std::map<std::string, int> by_type;
    for (const SceneInstance& inst : instances) by_type[to_string(inst.semantic)]++;
    for (Semantic sem : {Semantic::RoadSurface, Semantic::RoadSide, Semantic::RoadLane,
                         Semantic::RoadSign, Semantic::RoadLight, Semantic::Guardrail}) {
        auto it = by_type.find(to_string(sem));
        if (it != by_type.end()) counts[it->first] = it->second;
    }
    for (const SceneInstance& inst : instances) {
        Json j;
        j["Semantic"] = to_string(inst.semantic);
        j["Length"] = inst.length;
        detail.push_back(j);
    }
    Json root;
    root["Counts"] = counts;
    root["Instances"] = detail;
    root["Points"] = cloud.size();
    return root;
}

}  // namespace roadtwin
