#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "roadtwin/types.hpp"

namespace roadtwin {

namespace detail {
inline int64_t cell_key(int64_t i, int64_t j, int64_t k) {
    // 21 bits per axis; scenes are far smaller than 2^20 cells.
    return ((i & 0x1FFFFF) << 42) | ((j & 0x1FFFFF) << 21) | (k & 0x1FFFFF);
}
}  // namespace detail

/// Uniform hash grid over 3D points. Exact queries: candidates come from
/// covering cells and are distance-filtered.
class GridIndex3 {
public:
    GridIndex3() = default;
    GridIndex3(const std::vector<Vec3>& pts, double cell) : points_(&pts), cell_(cell) {
        for (size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(static_cast<uint32_t>(i));
    }

    void radius_query(const Vec3& q, double r, std::vector<uint32_t>& out) const {
        out.clear();
        const double r2 = r * r;
        const int64_t i0 = coord(q.x - r), i1 = coord(q.x + r);
        const int64_t j0 = coord(q.y - r), j1 = coord(q.y + r);
        const int64_t k0 = coord(q.z - r), k1 = coord(q.z + r);
        for (int64_t i = i0; i <= i1; ++i)
            for (int64_t j = j0; j <= j1; ++j)
                for (int64_t k = k0; k <= k1; ++k) {
                    auto it = cells_.find(detail::cell_key(i, j, k));
                    if (it == cells_.end()) continue;
                    for (uint32_t idx : it->second) {
                        const Vec3 d = (*points_)[idx] - q;
                        if (d.dot(d) <= r2) out.push_back(idx);
                    }
                }
    }

    /// Indices of the k nearest points to q (excluding nothing), sorted by distance
    /// then index for determinism.
    std::vector<uint32_t> knn(const Vec3& q, size_t k) const {
        std::vector<std::pair<double, uint32_t>> best;
        double r = cell_;
        const size_t n = points_->size();
        std::vector<uint32_t> cand;
        while (true) {
            radius_query(q, r, cand);
            if (cand.size() >= std::min(k, n) || r > max_extent_guess()) {
                best.reserve(cand.size());
                for (uint32_t idx : cand) {
                    const Vec3 d = (*points_)[idx] - q;
                    best.emplace_back(d.dot(d), idx);
                }
                if (best.size() >= std::min(k, n)) break;
            }
            r *= 2.0;
            cand.clear();
            best.clear();
        }
        std::sort(best.begin(), best.end());
        if (best.size() > k) best.resize(k);
        std::vector<uint32_t> out;
        out.reserve(best.size());
        for (auto& [d2, idx] : best) out.push_back(idx);
        return out;
    }

private:
    int64_t coord(double v) const { return static_cast<int64_t>(std::floor(v / cell_)); }
    int64_t key(const Vec3& p) const { return detail::cell_key(coord(p.x), coord(p.y), coord(p.z)); }
    double max_extent_guess() const { return 1e7; }

    const std::vector<Vec3>* points_ = nullptr;
    double cell_ = 1.0;
    std::unordered_map<int64_t, std::vector<uint32_t>> cells_;
};

/// Uniform hash grid over 2D points.
class GridIndex2 {
public:
    GridIndex2() = default;
    GridIndex2(const std::vector<Vec2>& pts, double cell) : points_(&pts), cell_(cell) {
        for (size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(static_cast<uint32_t>(i));
    }

    void radius_query(const Vec2& q, double r, std::vector<uint32_t>& out) const {
        out.clear();
        const double r2 = r * r;
        const int64_t i0 = coord(q.x - r), i1 = coord(q.x + r);
        const int64_t j0 = coord(q.y - r), j1 = coord(q.y + r);
        for (int64_t i = i0; i <= i1; ++i)
            for (int64_t j = j0; j <= j1; ++j) {
                auto it = cells_.find(detail::cell_key(i, j, 0));
                if (it == cells_.end()) continue;
                for (uint32_t idx : it->second) {
                    const Vec2 d = (*points_)[idx] - q;
                    if (d.dot(d) <= r2) out.push_back(idx);
                }
            }
    }

    std::vector<uint32_t> knn(const Vec2& q, size_t k) const {
        const size_t n = points_->size();
        double r = cell_;
        std::vector<uint32_t> cand;
        while (true) {
            radius_query(q, r, cand);
            if (cand.size() >= std::min(k, n)) break;
            if (r > 1e7) break;
            r *= 2.0;
        }
        std::vector<std::pair<double, uint32_t>> best;
        best.reserve(cand.size());
        for (uint32_t idx : cand) {
            const Vec2 d = (*points_)[idx] - q;
            best.emplace_back(d.dot(d), idx);
        }
        std::sort(best.begin(), best.end());
        if (best.size() > k) best.resize(k);
        std::vector<uint32_t> out;
        out.reserve(best.size());
        for (auto& [d2, idx] : best) out.push_back(idx);
        return out;
    }

private:
    int64_t coord(double v) const { return static_cast<int64_t>(std::floor(v / cell_)); }
    int64_t key(const Vec2& p) const { return detail::cell_key(coord(p.x), coord(p.y), 0); }

    const std::vector<Vec2>* points_ = nullptr;
    double cell_ = 1.0;
    std::unordered_map<int64_t, std::vector<uint32_t>> cells_;
};

}  // namespace roadtwin
