// SPDX-License-Identifier: Apache-2.0
//
// Brute-force ray-launching oracle, independent of the production solver.
// Rays leave the transmitter in Fibonacci-sphere directions and bounce
// specularly off facets. Whenever a ray passes within the capture radius of
// the receiver, its bounce sequence becomes a candidate; each candidate is
// then re-solved exactly from the mirror-image construction and kept only if
// the resulting path is geometrically valid and unobstructed. All geometry
// here is written from scratch on purpose and must not call into the solver.

#pragma once

#include <map>
#include <optional>
#include <vector>

#include <raychannel/raychannel.hpp>

namespace test_support {

namespace oracle {

using raychannel::Facet;
using raychannel::Scene;
using raychannel::Vec3;

inline Vec3 reflect_dir(const Vec3 &d, const Vec3 &n) { return d - 2.0 * raychannel::dot(d, n) * n; }

inline Vec3 mirror(const Vec3 &p, const Facet &f) {
    double s = raychannel::dot(f.normal, p) - f.plane_offset;
    return p - 2.0 * s * f.normal;
}

inline bool inside_polygon(const Facet &f, const Vec3 &p) {
    for (std::size_t i = 0; i < f.vertices.size(); ++i) {
        const Vec3 &a = f.vertices[i];
        const Vec3 &b = f.vertices[(i + 1) % f.vertices.size()];
        Vec3 edge = b - a;
        if (raychannel::dot(raychannel::cross(edge, p - a), f.normal) < -1e-9 * raychannel::norm(edge))
            return false;
    }
    return true;
}

struct Hit {
    double t = 0.0;
    Vec3 point;
    const Facet *facet = nullptr;
};

inline std::optional<Hit> nearest_hit(const Scene &scene, const Vec3 &origin, const Vec3 &dir,
                                      const Facet *skip = nullptr) {
    std::optional<Hit> best;
    for (const Facet &f : scene.facets) {
        if (&f == skip)
            continue;
        double denom = raychannel::dot(dir, f.normal);
        if (std::abs(denom) < 1e-12)
            continue;
        double t = (f.plane_offset - raychannel::dot(f.normal, origin)) / denom;
        if (t <= 1e-9)
            continue;
        Vec3 p = origin + t * dir;
        if (!inside_polygon(f, p))
            continue;
        if (!best || t < best->t)
            best = Hit{t, p, &f};
    }
    return best;
}

inline bool blocked(const Scene &scene, const Vec3 &a, const Vec3 &b, const Facet *skip_a, const Facet *skip_b) {
    double len = raychannel::distance(a, b);
    Vec3 dir = (b - a) / len;
    for (const Facet &f : scene.facets) {
        if (&f == skip_a || &f == skip_b)
            continue;
        double denom = raychannel::dot(dir, f.normal);
        if (std::abs(denom) < 1e-12)
            continue;
        double t = (f.plane_offset - raychannel::dot(f.normal, a)) / denom;
        if (t > 1e-9 && t < len - 1e-9 && inside_polygon(f, a + t * dir))
            return true;
    }
    return false;
}

// Solves one candidate facet-id sequence exactly: mirrors the tx across the
// sequence, back-traces from rx, and validates every reflection point and
// segment. Returns the path delay or nothing if the sequence is not a valid
// specular path.
inline std::optional<double> solve_sequence(const Scene &scene, const Vec3 &rx,
                                            const std::vector<const Facet *> &seq) {
    std::vector<Vec3> images;
    Vec3 img = scene.tx_position;
    for (const Facet *f : seq) {
        img = mirror(img, *f);
        images.push_back(img);
    }

    std::vector<Vec3> pts(seq.size());
    Vec3 p = rx;
    for (std::size_t j = seq.size(); j-- > 0;) {
        const Facet &f = *seq[j];
        Vec3 to_img = images[j] - p;
        double denom = raychannel::dot(f.normal, to_img);
        if (std::abs(denom) < 1e-15)
            return std::nullopt;
        double t = (f.plane_offset - raychannel::dot(f.normal, p)) / denom;
        if (t <= 1e-9 || t >= 1.0 - 1e-9)
            return std::nullopt;
        Vec3 q = p + t * to_img;
        if (!inside_polygon(f, q))
            return std::nullopt;
        pts[j] = q;
        p = q;
    }

    std::vector<Vec3> verts;
    verts.push_back(scene.tx_position);
    verts.insert(verts.end(), pts.begin(), pts.end());
    verts.push_back(rx);
    double length = 0.0;
    for (std::size_t j = 0; j + 1 < verts.size(); ++j) {
        if (raychannel::distance(verts[j], verts[j + 1]) <= 1e-9)
            return std::nullopt;
        const Facet *sa = j > 0 ? seq[j - 1] : nullptr;
        const Facet *sb = j < seq.size() ? seq[j] : nullptr;
        if (blocked(scene, verts[j], verts[j + 1], sa, sb))
            return std::nullopt;
        length += raychannel::distance(verts[j], verts[j + 1]);
    }
    return length / raychannel::speed_of_light;
}

} // namespace oracle

// Map of facet-id sequence to path delay, found by brute-force launching.
inline std::map<std::vector<int>, double> launch_oracle(const raychannel::Scene &scene, const raychannel::Vec3 &rx,
                                                        int n_directions, double capture_radius_m) {
    using oracle::nearest_hit;
    using raychannel::Vec3;

    std::vector<std::vector<const raychannel::Facet *>> candidates;
    candidates.push_back({}); // the direct path is always a candidate

    const double golden_angle = raychannel::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n_directions; ++i) {
        double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n_directions);
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double theta = golden_angle * static_cast<double>(i);
        Vec3 dir{r * std::cos(theta), r * std::sin(theta), z};

        Vec3 pos = scene.tx_position;
        const raychannel::Facet *last = nullptr;
        std::vector<const raychannel::Facet *> seq;
        for (int bounce = 0; bounce <= scene.radio.max_reflection_order; ++bounce) {
            auto hit = nearest_hit(scene, pos, dir, last);
            double t_rx = raychannel::dot(rx - pos, dir);
            double reach = hit ? hit->t : std::numeric_limits<double>::infinity();
            if (t_rx > 0.0 && t_rx < reach &&
                raychannel::distance(pos + t_rx * dir, rx) <= capture_radius_m)
                candidates.push_back(seq);
            if (!hit)
                break;
            seq.push_back(hit->facet);
            pos = hit->point;
            dir = oracle::reflect_dir(dir, hit->facet->normal);
            last = hit->facet;
        }
    }

    std::map<std::vector<int>, double> found;
    for (const auto &seq : candidates) {
        std::vector<int> key;
        for (const raychannel::Facet *f : seq)
            key.push_back(f->id);
        if (found.count(key))
            continue;
        if (auto delay = oracle::solve_sequence(scene, rx, seq))
            found[key] = *delay;
    }
    return found;
}

} // namespace test_support
