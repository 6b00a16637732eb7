// SPDX-License-Identifier: Apache-2.0
//
// raychannel - deterministic multipath radio simulation and LOS/NLOS scenario
// classification toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace raychannel {

// Physical constants (SI units)
constexpr double speed_of_light = 299792458.0;          // m/s
constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
constexpr double pi = 3.141592653589793238462643383279502884;

// Single geometric tolerance for meter-scale scenes in double precision.
constexpr double geom_eps = 1e-9; // m

// 3D point / vector, components in meters.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    friend constexpr Vec3 operator+(const Vec3 &a, const Vec3 &b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(const Vec3 &a, const Vec3 &b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator*(double s, const Vec3 &v) { return {s * v.x, s * v.y, s * v.z}; }
    friend constexpr Vec3 operator*(const Vec3 &v, double s) { return s * v; }
    friend constexpr Vec3 operator/(const Vec3 &v, double s) { return {v.x / s, v.y / s, v.z / s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 &operator+=(const Vec3 &o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3 &operator-=(const Vec3 &o) { x -= o.x; y -= o.y; z -= o.z; return *this; }

    friend constexpr bool operator==(const Vec3 &, const Vec3 &) = default;

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline constexpr Vec3 cross(const Vec3 &a, const Vec3 &b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3 &v) { return std::sqrt(dot(v, v)); }

inline double distance(const Vec3 &a, const Vec3 &b) { return norm(b - a); }

inline Vec3 normalized(const Vec3 &v) {
    double n = norm(v);
    if (n < geom_eps)
        throw std::invalid_argument("cannot normalize near-zero vector");
    return v / n;
}

// Axis-aligned bounding box.
struct Aabb {
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    bool empty() const { return lo.x > hi.x; }

    void expand(const Vec3 &p) {
        lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y); lo.z = std::min(lo.z, p.z);
        hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y); hi.z = std::max(hi.z, p.z);
    }

    double diagonal() const { return empty() ? 0.0 : distance(lo, hi); }

    // True if p lies strictly inside on every non-degenerate axis. Axes with
    // (near) zero extent are unconstrained so that open scenes, e.g. a single
    // ground plane, still admit receiver points above them.
    bool strictly_inside(const Vec3 &p, double margin = 0.0) const {
        if (empty())
            return true;
        auto inside_axis = [margin](double v, double lo_, double hi_) {
            if (hi_ - lo_ <= 2.0 * geom_eps)
                return true;
            return v > lo_ + margin && v < hi_ - margin;
        };
        return inside_axis(p.x, lo.x, hi.x) && inside_axis(p.y, lo.y, hi.y) && inside_axis(p.z, lo.z, hi.z);
    }
};

// Mirror a point across the plane n.p = d (n must be unit length).
inline Vec3 mirror_point(const Vec3 &p, const Vec3 &unit_normal, double plane_offset) {
    double signed_dist = dot(unit_normal, p) - plane_offset;
    return p - 2.0 * signed_dist * unit_normal;
}

} // namespace raychannel
