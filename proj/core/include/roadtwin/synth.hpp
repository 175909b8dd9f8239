#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roadtwin/mesh.hpp"

namespace roadtwin {

struct SignSpec {
    Vec2 pos;            // pole base
    double yaw = 0.0;    // panel in-plane direction vs +X
    double pole_radius = 0.10;
    double pole_height = 3.0;
    double panel_width = 1.2;
    double panel_height = 0.9;
    double panel_thickness = 0.02;
    double panel_bottom = 2.2;  // z of the panel's lower edge
};

struct LightSpec {
    Vec2 pos;
    double yaw = 0.0;  // arm direction vs +X
    double pole_radius = 0.10;
    double pole_height = 6.0;
    double arm_length = 1.5;
    double arm_radius = 0.05;
};

struct GuardrailSpec {
    Vec2 start;
    double heading = 0.0;    // initial direction vs +X
    double length = 60.0;    // arc length
    double curvature = 0.0;  // 1/m, 0 = straight
    std::string cross_section = "T";  // "T" (capped stem) or "#" (box)
};

struct SceneSpec {
    double length = 200.0;
    double width = 7.0;          // per carriageway
    int carriageways = 2;
    double median_gap = 1.0;
    double curvature = 0.0;      // lateral shear 0.5*c*x^2 applied to the road frame
    double elev_amplitude = 0.1;
    double elev_wavelength = 40.0;

    double dash_length = 3.0;
    double dash_gap = 5.0;
    double dash_width = 0.15;

    int slopes = 3;              // left edge, right edge, median strip
    double slope_width = 2.0;
    double slope_grade = 0.25;

    std::vector<SignSpec> signs;
    std::vector<LightSpec> lights;
    std::vector<GuardrailSpec> guardrails;

    double density = 400.0;  // points per m^2 of sampled surface
    double sigma = 0.005;    // isotropic Gaussian noise, meters
    uint64_t seed = 1;
};

/// 200 m two-carriageway preset: ~50 lane dashes, 3 sides, 3 signs, 2 lights,
/// 2 guardrails.
SceneSpec preset_200m();

struct SceneInstance {
    Semantic semantic = Semantic::RoadSurface;
    std::vector<NamedMesh> meshes;  // ground-truth geometry
    double length = 0;              // longest OBB side
};

struct Scene {
    LabeledCloud cloud;
    std::vector<int32_t> instance_of_point;  // index into instances
    std::vector<SceneInstance> instances;

    Json census() const;  // per-type counts and lengths
};

Scene generate(const SceneSpec& spec);

}  // namespace roadtwin
