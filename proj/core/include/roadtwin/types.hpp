#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace roadtwin {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec2 xy(const Vec3& p) { return {p.x, p.y}; }

/// Projection plane for 3D -> 2D; names the two kept axes in order (u, v).
enum class Plane : uint8_t { XY, XZ, YZ };

inline Vec2 project(const Vec3& p, Plane plane) {
    switch (plane) {
        case Plane::XY: return {p.x, p.y};
        case Plane::XZ: return {p.x, p.z};
        default: return {p.y, p.z};
    }
}

/// Rebuild a 3D point from a projected (u, v) pair plus the missing-axis value w.
inline Vec3 unproject(const Vec2& uv, double w, Plane plane) {
    switch (plane) {
        case Plane::XY: return {uv.x, uv.y, w};
        case Plane::XZ: return {uv.x, w, uv.y};
        default: return {w, uv.x, uv.y};
    }
}

inline double missing_axis(const Vec3& p, Plane plane) {
    switch (plane) {
        case Plane::XY: return p.z;
        case Plane::XZ: return p.y;
        default: return p.x;
    }
}

/// Rotate (x, y) by angle about a center; z (when present) is untouched by callers.
inline Vec2 rotate2(const Vec2& p, double angle, const Vec2& center = {0, 0}) {
    const double c = std::cos(angle), s = std::sin(angle);
    const Vec2 d = p - center;
    return {center.x + c * d.x - s * d.y, center.y + s * d.x + c * d.y};
}

inline Vec3 rotate_z(const Vec3& p, double angle, const Vec2& center = {0, 0}) {
    const Vec2 r = rotate2({p.x, p.y}, angle, center);
    return {r.x, r.y, p.z};
}

inline Vec3 rotate_y(const Vec3& p, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * p.x + s * p.z, p.y, -s * p.x + c * p.z};
}

/// Configuration or CLI usage errors (exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or contract-violating input data (exit code 3).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Broken internal invariant (exit code 4).
struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace roadtwin
