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

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "raychannel/geometry.hpp"

namespace raychannel {

// Electromagnetic surface material. Permeability is fixed at the vacuum value;
// cabin and building materials of interest are non-magnetic.
struct Material {
    std::string name;
    double rel_permittivity = 1.0; // >= 1
    double conductivity = 0.0;     // S/m, >= 0

    friend bool operator==(const Material &, const Material &) = default;
};

// Convex planar polygon with an outward normal defined by vertex winding.
struct Facet {
    int id = 0;
    std::vector<Vec3> vertices; // >= 3, coplanar, convex
    int material_index = 0;     // into Scene::materials

    // Derived plane data, filled by finalize().
    Vec3 normal;          // unit
    double plane_offset = 0.0; // normal . p = plane_offset on the plane

    friend bool operator==(const Facet &, const Facet &) = default;

    // Validates the polygon invariants and computes the plane. Throws with the
    // facet id on violation.
    void finalize() {
        const std::string ctx = "facet " + std::to_string(id);
        if (vertices.size() < 3)
            throw std::invalid_argument(ctx + ": needs at least 3 vertices");
        for (const Vec3 &v : vertices)
            if (!v.finite())
                throw std::invalid_argument(ctx + ": non-finite vertex");

        // Newell normal; magnitude is twice the polygon area.
        Vec3 n{0, 0, 0};
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            const Vec3 &a = vertices[i];
            const Vec3 &b = vertices[(i + 1) % vertices.size()];
            n.x += (a.y - b.y) * (a.z + b.z);
            n.y += (a.z - b.z) * (a.x + b.x);
            n.z += (a.x - b.x) * (a.y + b.y);
        }
        double two_area = norm(n);
        if (two_area <= 2e-12)
            throw std::invalid_argument(ctx + ": degenerate polygon (area <= 1e-12 m^2)");
        normal = n / two_area;

        double offset_sum = 0.0;
        for (const Vec3 &v : vertices)
            offset_sum += dot(normal, v);
        plane_offset = offset_sum / static_cast<double>(vertices.size());

        for (const Vec3 &v : vertices)
            if (std::abs(dot(normal, v) - plane_offset) > 1e-9)
                throw std::invalid_argument(ctx + ": vertices not coplanar within 1e-9 m");

        // Convexity: every corner must turn the same way as the normal.
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            const Vec3 &a = vertices[i];
            const Vec3 &b = vertices[(i + 1) % vertices.size()];
            const Vec3 &c = vertices[(i + 2) % vertices.size()];
            if (dot(cross(b - a, c - b), normal) < -1e-9)
                throw std::invalid_argument(ctx + ": polygon not convex");
        }
    }

    // True if a point already on the facet plane lies inside the polygon
    // (boundary counts as inside within a distance tolerance).
    bool contains_on_plane(const Vec3 &p) const {
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            const Vec3 &a = vertices[i];
            const Vec3 &b = vertices[(i + 1) % vertices.size()];
            Vec3 edge = b - a;
            double s = dot(cross(edge, p - a), normal);
            // s scales with |edge| * distance-from-edge; tolerance in meters.
            if (s < -geom_eps * norm(edge))
                return false;
        }
        return true;
    }

    // Distance from an arbitrary point to the polygon (interior projection or
    // nearest edge).
    double distance_to(const Vec3 &p) const {
        double plane_dist = dot(normal, p) - plane_offset;
        Vec3 proj = p - plane_dist * normal;
        if (contains_on_plane(proj))
            return std::abs(plane_dist);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            const Vec3 &a = vertices[i];
            const Vec3 &b = vertices[(i + 1) % vertices.size()];
            Vec3 edge = b - a;
            double len2 = dot(edge, edge);
            double t = len2 > 0.0 ? std::clamp(dot(p - a, edge) / len2, 0.0, 1.0) : 0.0;
            best = std::min(best, distance(p, a + t * edge));
        }
        return best;
    }
};

// Radio parameterization of a link.
struct RadioConfig {
    double center_frequency_hz = 3.5e9;
    double bandwidth_hz = 499.2e6;
    double tx_power_dbm = -16.0;
    int max_reflection_order = 3;
    double cir_window_s = 500e-9;
    int oversampling_factor = 4;

    friend bool operator==(const RadioConfig &, const RadioConfig &) = default;

    double wavelength_m() const { return speed_of_light / center_frequency_hz; }

    void validate() const {
        if (!(center_frequency_hz > 0.0))
            throw std::invalid_argument("radio: center frequency must be > 0");
        if (!(bandwidth_hz > 0.0))
            throw std::invalid_argument("radio: bandwidth must be > 0");
        if (!(bandwidth_hz < 2.0 * center_frequency_hz))
            throw std::invalid_argument("radio: bandwidth must be < 2 * center frequency");
        if (max_reflection_order < 0)
            throw std::invalid_argument("radio: max reflection order must be >= 0");
        if (!(cir_window_s > 0.0))
            throw std::invalid_argument("radio: CIR window must be > 0");
        if (oversampling_factor < 2)
            throw std::invalid_argument("radio: oversampling factor must be >= 2");
        if (!std::isfinite(tx_power_dbm))
            throw std::invalid_argument("radio: tx power must be finite");
    }
};

// Rectangular grid of receiver points at a fixed height, row-major order with
// x varying fastest.
struct GridPlan {
    Vec3 origin;
    double extent_x = 0.0;
    double extent_y = 0.0;
    double spacing = 0.25;
    double height = 1.0;

    friend bool operator==(const GridPlan &, const GridPlan &) = default;

    int nx() const { return static_cast<int>(std::floor(extent_x / spacing + 1e-9)) + 1; }
    int ny() const { return static_cast<int>(std::floor(extent_y / spacing + 1e-9)) + 1; }
};

// Receiver points resampled along a waypoint polyline at fixed arc-length
// steps, starting at the first waypoint.
struct TrajectoryPlan {
    std::vector<Vec3> waypoints;
    double sample_step = 0.1;

    friend bool operator==(const TrajectoryPlan &, const TrajectoryPlan &) = default;
};

using ReceiverPlan = std::variant<GridPlan, TrajectoryPlan>;

namespace detail {

inline std::vector<Vec3> grid_points(const GridPlan &g) {
    std::vector<Vec3> pts;
    int nx = g.nx(), ny = g.ny();
    pts.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            pts.push_back({g.origin.x + i * g.spacing, g.origin.y + j * g.spacing, g.height});
    return pts;
}

inline std::vector<Vec3> trajectory_points(const TrajectoryPlan &t) {
    std::vector<Vec3> pts;
    if (t.waypoints.empty())
        return pts;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < t.waypoints.size(); ++i)
        total += distance(t.waypoints[i], t.waypoints[i + 1]);
    std::size_t seg = 0;
    double seg_start = 0.0;
    double seg_len = t.waypoints.size() > 1 ? distance(t.waypoints[0], t.waypoints[1]) : 0.0;
    for (double s = 0.0; s <= total + geom_eps; s += t.sample_step) {
        double sc = std::min(s, total);
        while (seg + 2 < t.waypoints.size() && sc > seg_start + seg_len + geom_eps) {
            seg_start += seg_len;
            ++seg;
            seg_len = distance(t.waypoints[seg], t.waypoints[seg + 1]);
        }
        if (seg_len <= 0.0) {
            pts.push_back(t.waypoints[seg]);
        } else {
            double f = std::clamp((sc - seg_start) / seg_len, 0.0, 1.0);
            pts.push_back(t.waypoints[seg] + f * (t.waypoints[seg + 1] - t.waypoints[seg]));
        }
        if (t.waypoints.size() == 1)
            break;
    }
    return pts;
}

} // namespace detail

// Immutable 3D environment: facets, materials, transmitter, radio settings and
// the receiver sampling plan. Safe to share read-only across workers.
struct Scene {
    std::vector<Material> materials;
    std::vector<Facet> facets;
    Vec3 tx_position;
    RadioConfig radio;
    ReceiverPlan receivers = GridPlan{};
    std::int64_t seed = 0;

    friend bool operator==(const Scene &, const Scene &) = default;

    Aabb bounding_box() const {
        Aabb box;
        for (const Facet &f : facets)
            for (const Vec3 &v : f.vertices)
                box.expand(v);
        return box;
    }

    // Upper bound on the delay of any path with up to max_reflection_order
    // bounces: each segment is at most one scene diagonal long.
    double max_admissible_delay_s() const {
        double diag = bounding_box().diagonal();
        return (radio.max_reflection_order + 1) * diag / speed_of_light;
    }

    std::vector<Vec3> sample_points() const {
        if (std::holds_alternative<GridPlan>(receivers))
            return detail::grid_points(std::get<GridPlan>(receivers));
        return detail::trajectory_points(std::get<TrajectoryPlan>(receivers));
    }

    const Material &facet_material(const Facet &f) const { return materials[static_cast<std::size_t>(f.material_index)]; }

    // Finalizes facet planes and checks every scene invariant. Call once after
    // construction; the scene is treated as immutable afterwards.
    void validate() {
        if (materials.empty())
            throw std::invalid_argument("scene: at least one material required");
        std::set<std::string> names;
        for (const Material &m : materials) {
            if (m.name.empty())
                throw std::invalid_argument("scene: material with empty name");
            if (!names.insert(m.name).second)
                throw std::invalid_argument("scene: duplicate material name '" + m.name + "'");
            if (!(m.rel_permittivity >= 1.0))
                throw std::invalid_argument("material '" + m.name + "': relative permittivity must be >= 1");
            if (!(m.conductivity >= 0.0))
                throw std::invalid_argument("material '" + m.name + "': conductivity must be >= 0");
        }

        if (!tx_position.finite())
            throw std::invalid_argument("scene: non-finite tx position");

        std::set<int> ids;
        for (Facet &f : facets) {
            if (!ids.insert(f.id).second)
                throw std::invalid_argument("scene: duplicate facet id " + std::to_string(f.id));
            if (f.material_index < 0 || f.material_index >= static_cast<int>(materials.size()))
                throw std::invalid_argument("facet " + std::to_string(f.id) + ": material index out of range");
            f.finalize(); // throws with facet id on geometric violations
            if (std::abs(dot(f.normal, tx_position) - f.plane_offset) <= 1e-6)
                throw std::invalid_argument("scene: tx embedded in plane of facet " + std::to_string(f.id));
        }

        radio.validate();
        if (radio.cir_window_s < max_admissible_delay_s())
            throw std::invalid_argument("radio: CIR window shorter than the longest admissible path delay");

        if (std::holds_alternative<GridPlan>(receivers)) {
            const GridPlan &g = std::get<GridPlan>(receivers);
            if (!(g.spacing > 0.0))
                throw std::invalid_argument("receiver grid: spacing must be > 0");
            if (g.extent_x < 0.0 || g.extent_y < 0.0)
                throw std::invalid_argument("receiver grid: negative extent");
        } else {
            const TrajectoryPlan &t = std::get<TrajectoryPlan>(receivers);
            if (!(t.sample_step > 0.0))
                throw std::invalid_argument("receiver trajectory: sample step must be > 0");
            if (t.waypoints.empty())
                throw std::invalid_argument("receiver trajectory: needs at least one waypoint");
        }

        Aabb box = bounding_box();
        std::vector<Vec3> pts = sample_points();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!box.strictly_inside(pts[i]))
                throw std::invalid_argument("receiver point " + std::to_string(i) +
                                            " lies outside the scene bounding volume");
            for (const Facet &f : facets)
                if (f.distance_to(pts[i]) <= 1e-6)
                    throw std::invalid_argument("receiver point " + std::to_string(i) + " lies on facet " +
                                                std::to_string(f.id));
        }
    }
};

struct RayHit {
    double t = 0.0; // distance along the ray, meters
    Vec3 point;
};

// First intersection of the ray origin + t*direction with the facet polygon,
// for t > geom_eps. direction must be unit length. Total function: returns
// nullopt for parallel rays, back-side hits within eps or misses.
inline std::optional<RayHit> ray_facet_intersect(const Vec3 &origin, const Vec3 &direction, const Facet &facet) {
    double denom = dot(direction, facet.normal);
    if (std::abs(denom) < 1e-12)
        return std::nullopt; // parallel to the plane
    double t = (facet.plane_offset - dot(facet.normal, origin)) / denom;
    if (t <= geom_eps)
        return std::nullopt;
    Vec3 p = origin + t * direction;
    if (!facet.contains_on_plane(p))
        return std::nullopt;
    return RayHit{t, p};
}

// True iff any facet not in exclude_ids cuts the open segment (a, b), with
// geom_eps clearance at both ends. Symmetric in a and b.
inline bool segment_occluded(const Vec3 &a, const Vec3 &b, const Scene &scene, const std::set<int> &exclude_ids = {}) {
    double len = distance(a, b);
    if (len <= geom_eps)
        throw std::invalid_argument("segment_occluded: endpoints coincide");
    Vec3 dir = (b - a) / len;
    for (const Facet &f : scene.facets) {
        if (exclude_ids.count(f.id))
            continue;
        auto hit = ray_facet_intersect(a, dir, f);
        if (hit && hit->t < len - geom_eps)
            return true;
    }
    return false;
}

// Parametric aircraft-cabin stand-in: an axis-aligned metal hull plus
// n_seat_rows pairs of dielectric seat-back facets with a center aisle gap.
// The tx sits near mid-cabin just below the ceiling. Pure function of its
// arguments; the seed is carried into the scene for downstream RNG streams.
inline Scene make_cabin_scene(double length_m, double width_m, double height_m, int n_seat_rows,
                              std::int64_t seed) {
    if (!(length_m >= 4.0))
        throw std::invalid_argument("cabin: length must be >= 4 m");
    if (!(width_m >= 2.0))
        throw std::invalid_argument("cabin: width must be >= 2 m");
    if (!(height_m >= 1.8))
        throw std::invalid_argument("cabin: height must be >= 1.8 m");
    if (n_seat_rows < 0)
        throw std::invalid_argument("cabin: seat row count must be >= 0");
    double row_pitch = length_m / (n_seat_rows + 1);
    if (n_seat_rows > 0 && row_pitch < 0.5)
        throw std::invalid_argument("cabin: seat rows closer than 0.5 m");

    const double L = length_m, W = width_m, H = height_m;
    constexpr double aisle_width = 0.8;
    constexpr double seat_back_height = 1.2;

    Scene s;
    s.seed = seed;
    // The shell is lined with low-density composite trim panels, not bare
    // metal; a near-unity reflection coefficient there would let end-wall
    // bounces of the long tube dominate every delay profile.
    s.materials = {{"cabin trim", 2.2, 0.03}, {"seat", 3.0, 0.01}};

    auto add_facet = [&s](int id, std::initializer_list<Vec3> verts, int mat) {
        Facet f;
        f.id = id;
        f.vertices = verts;
        f.material_index = mat;
        f.finalize();
        s.facets.push_back(std::move(f));
    };

    // Hull, normals facing the interior.
    add_facet(0, {{0, 0, 0}, {L, 0, 0}, {L, W, 0}, {0, W, 0}}, 0);          // floor
    add_facet(1, {{0, 0, H}, {0, W, H}, {L, W, H}, {L, 0, H}}, 0);          // ceiling
    add_facet(2, {{0, 0, 0}, {0, W, 0}, {0, W, H}, {0, 0, H}}, 0);          // wall x=0
    add_facet(3, {{L, 0, 0}, {L, 0, H}, {L, W, H}, {L, W, 0}}, 0);          // wall x=L
    add_facet(4, {{0, 0, 0}, {0, 0, H}, {L, 0, H}, {L, 0, 0}}, 0);          // wall y=0
    add_facet(5, {{0, W, 0}, {L, W, 0}, {L, W, H}, {0, W, H}}, 0);          // wall y=W

    double seat_span = (W - aisle_width) / 2.0;
    for (int k = 0; k < n_seat_rows; ++k) {
        double x = (k + 1) * row_pitch;
        int id = 6 + 2 * k;
        add_facet(id, {{x, 0, 0}, {x, seat_span, 0}, {x, seat_span, seat_back_height}, {x, 0, seat_back_height}}, 1);
        add_facet(id + 1,
                  {{x, W - seat_span, 0}, {x, W, 0}, {x, W, seat_back_height}, {x, W - seat_span, seat_back_height}},
                  1);
    }

    // Mid-cabin tx, offset along the length so it never sits in a seat plane
    // (odd row counts place a row exactly at L/2).
    double tx_x = L / 2.0 + 0.1;
    auto near_seat_plane = [&](double x) {
        for (int k = 0; k < n_seat_rows; ++k)
            if (std::abs(x - (k + 1) * row_pitch) < 1e-3)
                return true;
        return false;
    };
    if (near_seat_plane(tx_x))
        tx_x = L / 2.0 + 0.05;
    s.tx_position = {tx_x, W / 2.0, H - 0.2};

    s.radio = RadioConfig{};
    double diag = std::sqrt(L * L + W * W + H * H);
    s.radio.cir_window_s = (s.radio.max_reflection_order + 1) * diag / speed_of_light + 100e-9;

    // Receiver grid with 0.5 m wall margin at 1 m height; origin shifted when
    // a quarter-meter lattice column would land exactly on a seat plane.
    double margin = 0.5;
    GridPlan grid;
    grid.spacing = 0.25;
    grid.height = 1.0;
    double gx = 0.0;
    for (double cand : {0.0, 0.06, 0.11}) {
        bool clear = true;
        for (int k = 0; k < n_seat_rows && clear; ++k) {
            double row_x = (k + 1) * row_pitch;
            double rel = (row_x - margin - cand) / grid.spacing;
            if (std::abs(rel - std::round(rel)) * grid.spacing < 1e-4)
                clear = false;
        }
        if (clear) {
            gx = cand;
            break;
        }
    }
    grid.origin = {margin + gx, margin, 0.0};
    grid.extent_x = L - 2.0 * margin - gx;
    grid.extent_y = W - 2.0 * margin;
    s.receivers = grid;

    s.validate();
    return s;
}

} // namespace raychannel
