// SPDX-License-Identifier: Apache-2.0
//
// Shared scene builders for tests.

#pragma once

#include <raychannel/raychannel.hpp>

namespace test_support {

using namespace raychannel;

// Scene with no facets at all: free space. The single receiver point sits at
// rx so trace_all and validate() exercise the same link.
inline Scene free_space_scene(const Vec3 &tx, const Vec3 &rx) {
    Scene s;
    s.materials = {{"vacuum", 1.0, 0.0}};
    s.tx_position = tx;
    GridPlan g;
    g.origin = {rx.x, rx.y, 0.0};
    g.extent_x = 0.0;
    g.extent_y = 0.0;
    g.height = rx.z;
    g.spacing = 0.25;
    s.receivers = g;
    s.validate();
    return s;
}

inline Facet make_facet(int id, std::initializer_list<Vec3> verts, int mat) {
    Facet f;
    f.id = id;
    f.vertices = verts;
    f.material_index = mat;
    f.finalize();
    return f;
}

// Single rectangular ground facet at z=0 spanning [x0,x1] x [y0,y1], normal +z.
inline Scene ground_scene(double x0, double x1, double y0, double y1, const Vec3 &tx, const Vec3 &rx,
                          double eps_r = 4.0, double sigma = 0.0, int max_order = 1) {
    Scene s;
    s.materials = {{"ground", eps_r, sigma}};
    s.facets.push_back(make_facet(0, {{x0, y0, 0}, {x1, y0, 0}, {x1, y1, 0}, {x0, y1, 0}}, 0));
    s.tx_position = tx;
    s.radio.max_reflection_order = max_order;
    GridPlan g;
    g.origin = {rx.x, rx.y, 0.0};
    g.height = rx.z;
    g.spacing = 0.25;
    s.receivers = g;
    s.validate();
    return s;
}

// Closed rectangular box [0,L]x[0,W]x[0,H] with interior-facing normals,
// hull facet ids 0..5, one material.
inline Scene box_scene(double L, double W, double H, const Vec3 &tx, const Vec3 &rx, double eps_r = 4.0,
                       double sigma = 0.01, int max_order = 2) {
    Scene s;
    s.materials = {{"wall", eps_r, sigma}};
    s.facets.push_back(make_facet(0, {{0, 0, 0}, {L, 0, 0}, {L, W, 0}, {0, W, 0}}, 0));
    s.facets.push_back(make_facet(1, {{0, 0, H}, {0, W, H}, {L, W, H}, {L, 0, H}}, 0));
    s.facets.push_back(make_facet(2, {{0, 0, 0}, {0, W, 0}, {0, W, H}, {0, 0, H}}, 0));
    s.facets.push_back(make_facet(3, {{L, 0, 0}, {L, 0, H}, {L, W, H}, {L, W, 0}}, 0));
    s.facets.push_back(make_facet(4, {{0, 0, 0}, {0, 0, H}, {L, 0, H}, {L, 0, 0}}, 0));
    s.facets.push_back(make_facet(5, {{0, W, 0}, {L, W, 0}, {L, W, H}, {0, W, H}}, 0));
    s.tx_position = tx;
    s.radio.max_reflection_order = max_order;
    s.radio.cir_window_s = (max_order + 1) * std::sqrt(L * L + W * W + H * H) / speed_of_light + 100e-9;
    GridPlan g;
    g.origin = {rx.x, rx.y, 0.0};
    g.height = rx.z;
    g.spacing = 0.25;
    s.receivers = g;
    s.validate();
    return s;
}

// Box with one full-height wall strip at x = wall_x covering y in [0, wall_y]:
// receivers behind the strip lose the direct path.
inline Scene blocked_box_scene(double L = 4.0, double W = 4.0, double H = 2.5, double wall_x = 2.0,
                               double wall_y = 2.6, int max_order = 1) {
    Scene s;
    s.materials = {{"wall", 4.0, 0.01}, {"divider", 6.0, 0.05}};
    s.facets.push_back(make_facet(0, {{0, 0, 0}, {L, 0, 0}, {L, W, 0}, {0, W, 0}}, 0));
    s.facets.push_back(make_facet(1, {{0, 0, H}, {0, W, H}, {L, W, H}, {L, 0, H}}, 0));
    s.facets.push_back(make_facet(2, {{0, 0, 0}, {0, W, 0}, {0, W, H}, {0, 0, H}}, 0));
    s.facets.push_back(make_facet(3, {{L, 0, 0}, {L, 0, H}, {L, W, H}, {L, W, 0}}, 0));
    s.facets.push_back(make_facet(4, {{0, 0, 0}, {0, 0, H}, {L, 0, H}, {L, 0, 0}}, 0));
    s.facets.push_back(make_facet(5, {{0, W, 0}, {L, W, 0}, {L, W, H}, {0, W, H}}, 0));
    s.facets.push_back(
        make_facet(6, {{wall_x, 0, 0}, {wall_x, wall_y, 0}, {wall_x, wall_y, H}, {wall_x, 0, H}}, 1));
    s.tx_position = {0.6, 3.2, 2.0};
    s.radio.max_reflection_order = max_order;
    s.radio.cir_window_s = (max_order + 1) * std::sqrt(L * L + W * W + H * H) / speed_of_light + 100e-9;
    GridPlan g;
    g.origin = {0.55, 0.55, 0.0};
    g.extent_x = L - 1.1;
    g.extent_y = W - 1.1;
    g.spacing = 0.5;
    g.height = 1.2;
    s.receivers = g;
    s.validate();
    return s;
}

// Randomized small scene for oracle-equivalence runs: a box hull plus up to
// two interior rectangles, 8 facets at most. tx and rx keep 0.4 m clearance
// from every facet.
inline Scene random_small_scene(std::uint64_t seed) {
    std::mt19937_64 rng = make_stream(seed, 0x5ce9e);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * hash_to_unit(rng());
    };

    double L = uniform(3.5, 4.5), W = uniform(2.5, 3.5), H = uniform(2.2, 3.0);
    Scene s;
    s.materials = {{"wall", uniform(2.0, 8.0), uniform(0.0, 0.05)}, {"panel", uniform(2.0, 8.0), 0.01}};
    s.facets.push_back(make_facet(0, {{0, 0, 0}, {L, 0, 0}, {L, W, 0}, {0, W, 0}}, 0));
    s.facets.push_back(make_facet(1, {{0, 0, H}, {0, W, H}, {L, W, H}, {L, 0, H}}, 0));
    s.facets.push_back(make_facet(2, {{0, 0, 0}, {0, W, 0}, {0, W, H}, {0, 0, H}}, 0));
    s.facets.push_back(make_facet(3, {{L, 0, 0}, {L, 0, H}, {L, W, H}, {L, W, 0}}, 0));
    s.facets.push_back(make_facet(4, {{0, 0, 0}, {0, 0, H}, {L, 0, H}, {L, 0, 0}}, 0));
    s.facets.push_back(make_facet(5, {{0, W, 0}, {L, W, 0}, {L, W, H}, {0, W, H}}, 0));

    int n_panels = static_cast<int>(rng() % 3); // 0, 1 or 2 interior panels
    for (int p = 0; p < n_panels; ++p) {
        double x = uniform(1.2, L - 1.2);
        double y0 = uniform(0.2, 0.6), y1 = y0 + uniform(0.8, W - y0 - 0.4);
        double h = uniform(1.0, H - 0.5);
        s.facets.push_back(make_facet(6 + p, {{x, y0, 0}, {x, y1, 0}, {x, y1, h}, {x, y0, h}}, 1));
    }

    auto clear_point = [&](const Vec3 &p) {
        for (const Facet &f : s.facets)
            if (f.distance_to(p) < 0.4)
                return false;
        return true;
    };
    auto draw_point = [&]() {
        for (int tries = 0; tries < 200; ++tries) {
            Vec3 p{uniform(0.5, L - 0.5), uniform(0.5, W - 0.5), uniform(0.5, H - 0.5)};
            if (clear_point(p))
                return p;
        }
        throw std::runtime_error("random_small_scene: no clear point found");
    };
    s.tx_position = draw_point();
    Vec3 rx = draw_point();
    while (distance(rx, s.tx_position) < 1.0)
        rx = draw_point();

    s.seed = static_cast<std::int64_t>(seed);
    s.radio.max_reflection_order = 2;
    s.radio.cir_window_s = 3.0 * std::sqrt(L * L + W * W + H * H) / speed_of_light + 100e-9;
    GridPlan g;
    g.origin = {rx.x, rx.y, 0.0};
    g.height = rx.z;
    s.receivers = g;
    s.validate();
    return s;
}

inline Vec3 single_rx(const Scene &s) { return s.sample_points().at(0); }

} // namespace test_support
