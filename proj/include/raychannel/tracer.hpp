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

#include <complex>
#include <vector>

#include "raychannel/parallel.hpp"
#include "raychannel/scene.hpp"

namespace raychannel {

// Specular reflection coefficient for perpendicular (s) polarization at a
// material half-space, with complex permittivity eps_r - j*sigma/(2*pi*f*eps0).
// |Gamma| <= 1 for any passive material.
inline std::complex<double> fresnel_reflection(double incidence_angle_rad, const Material &material,
                                               double frequency_hz) {
    if (!(incidence_angle_rad >= 0.0) || !(incidence_angle_rad < pi / 2.0))
        throw std::invalid_argument("fresnel: incidence angle must be in [0, pi/2)");
    if (!(frequency_hz > 0.0))
        throw std::invalid_argument("fresnel: frequency must be > 0");
    double cos_i = std::cos(incidence_angle_rad);
    double sin_i = std::sin(incidence_angle_rad);
    std::complex<double> eps(material.rel_permittivity,
                             -material.conductivity / (2.0 * pi * frequency_hz * vacuum_permittivity));
    std::complex<double> root = std::sqrt(eps - sin_i * sin_i);
    return (cos_i - root) / (cos_i + root);
}

// One specular reflection along a path.
struct Interaction {
    int facet_id = 0;
    Vec3 point;
    double incidence_angle_rad = 0.0; // from the facet normal, [0, pi/2)
    std::complex<double> fresnel_gamma;
};

// One resolved ray path from tx to rx. gain is the linear complex field
// amplitude relative to unit transmit field, including the carrier phase.
struct PropagationPath {
    std::vector<Vec3> vertices; // tx, reflection points..., rx
    std::vector<Interaction> interactions;
    double length_m = 0.0;
    double delay_s = 0.0;
    std::complex<double> gain;
    bool is_los = false;

    std::vector<int> facet_sequence() const {
        std::vector<int> seq;
        seq.reserve(interactions.size());
        for (const Interaction &i : interactions)
            seq.push_back(i.facet_id);
        return seq;
    }
};

enum class LosState { LOS, NLOS, DEAD };

inline const char *to_string(LosState s) {
    switch (s) {
    case LosState::LOS: return "LOS";
    case LosState::NLOS: return "NLOS";
    default: return "DEAD";
    }
}

// All paths for one tx-rx link, sorted by (delay, reflection order, facet
// sequence) so the order is strict and deterministic even when symmetric
// geometry produces exactly equal delays.
struct LinkResult {
    Vec3 rx_position;
    std::vector<PropagationPath> paths;
    LosState los_state = LosState::DEAD;
};

namespace detail {

struct PathAccumulator {
    const Scene &scene;
    Vec3 rx;
    std::vector<PropagationPath> paths;

    // Tries to realize the reflection sequence held in `facet_stack` given the
    // transmitter image mirrored across those facets in order.
    void try_sequence(const std::vector<const Facet *> &facet_stack, const std::vector<Vec3> &images) {
        std::size_t k = facet_stack.size();
        std::vector<Vec3> points(k); // reflection points, tx-to-rx order
        Vec3 p = rx;
        for (std::size_t j = k; j-- > 0;) {
            const Facet &f = *facet_stack[j];
            const Vec3 &image = images[j];
            double dist = distance(p, image);
            if (dist <= geom_eps)
                return;
            Vec3 dir = (image - p) / dist;
            auto hit = ray_facet_intersect(p, dir, f);
            if (!hit || hit->t >= dist - geom_eps)
                return; // segment p -> image does not cross this facet
            points[j] = hit->point;
            p = hit->point;
        }

        std::vector<Vec3> vertices;
        vertices.reserve(k + 2);
        vertices.push_back(scene.tx_position);
        for (std::size_t j = 0; j < k; ++j)
            vertices.push_back(points[j]);
        vertices.push_back(rx);

        // Occlusion per segment, excluding the facets reflecting at its ends.
        for (std::size_t j = 0; j + 1 < vertices.size(); ++j) {
            std::set<int> exclude;
            if (j > 0)
                exclude.insert(facet_stack[j - 1]->id);
            if (j < k)
                exclude.insert(facet_stack[j]->id);
            if (distance(vertices[j], vertices[j + 1]) <= geom_eps)
                return;
            if (segment_occluded(vertices[j], vertices[j + 1], scene, exclude))
                return;
        }

        PropagationPath path;
        path.vertices = vertices;
        path.is_los = (k == 0);
        double length = 0.0;
        for (std::size_t j = 0; j + 1 < vertices.size(); ++j)
            length += distance(vertices[j], vertices[j + 1]);
        path.length_m = length;
        path.delay_s = length / speed_of_light;

        double fc = scene.radio.center_frequency_hz;
        std::complex<double> gain = scene.radio.wavelength_m() / (4.0 * pi * length);
        for (std::size_t j = 0; j < k; ++j) {
            const Facet &f = *facet_stack[j];
            Vec3 incoming = normalized(vertices[j + 1] - vertices[j]);
            double cos_i = std::min(std::abs(dot(incoming, f.normal)), 1.0);
            double angle = std::acos(cos_i);
            angle = std::min(angle, std::nextafter(pi / 2.0, 0.0));
            Interaction ia;
            ia.facet_id = f.id;
            ia.point = vertices[j + 1];
            ia.incidence_angle_rad = angle;
            ia.fresnel_gamma = fresnel_reflection(angle, scene.facet_material(f), fc);
            gain *= ia.fresnel_gamma;
            path.interactions.push_back(std::move(ia));
        }
        double phase = -2.0 * pi * fc * length / speed_of_light;
        gain *= std::complex<double>(std::cos(phase), std::sin(phase));
        path.gain = gain;
        paths.push_back(std::move(path));
    }

    void recurse(std::vector<const Facet *> &facet_stack, std::vector<Vec3> &images, int remaining_order) {
        if (remaining_order <= 0)
            return;
        const Facet *last = facet_stack.empty() ? nullptr : facet_stack.back();
        Vec3 base_image = images.empty() ? scene.tx_position : images.back();
        for (const Facet &f : scene.facets) {
            if (&f == last)
                continue; // consecutive reflections off the same facet are degenerate
            facet_stack.push_back(&f);
            images.push_back(mirror_point(base_image, f.normal, f.plane_offset));
            try_sequence(facet_stack, images);
            recurse(facet_stack, images, remaining_order - 1);
            facet_stack.pop_back();
            images.pop_back();
        }
    }
};

} // namespace detail

// Deterministic multipath solve for one receiver position: the unobstructed
// direct path plus every valid specular path up to max_reflection_order,
// found by mirroring the transmitter across facet sequences (image-source
// method) and back-tracing from the receiver.
inline LinkResult trace_link(const Scene &scene, const Vec3 &rx) {
    if (distance(rx, scene.tx_position) <= geom_eps)
        throw std::invalid_argument("trace_link: rx coincides with tx");
    if (!rx.finite())
        throw std::invalid_argument("trace_link: non-finite rx");
    if (!scene.bounding_box().strictly_inside(rx, -geom_eps))
        throw std::invalid_argument("trace_link: rx outside scene bounds");

    LinkResult result;
    result.rx_position = rx;

    detail::PathAccumulator acc{scene, rx, {}};

    {
        // Direct path; try_sequence performs the occlusion test itself.
        std::vector<const Facet *> empty_stack;
        std::vector<Vec3> empty_images;
        acc.try_sequence(empty_stack, empty_images);
    }

    std::vector<const Facet *> facet_stack;
    std::vector<Vec3> images;
    facet_stack.reserve(static_cast<std::size_t>(scene.radio.max_reflection_order));
    images.reserve(static_cast<std::size_t>(scene.radio.max_reflection_order));
    acc.recurse(facet_stack, images, scene.radio.max_reflection_order);

    result.paths = std::move(acc.paths);

    // Dedup: facet sequences are enumerated exactly once, so equality of the
    // sequence is the duplicate key.
    std::sort(result.paths.begin(), result.paths.end(), [](const PropagationPath &a, const PropagationPath &b) {
        if (a.delay_s != b.delay_s)
            return a.delay_s < b.delay_s;
        if (a.interactions.size() != b.interactions.size())
            return a.interactions.size() < b.interactions.size();
        return a.facet_sequence() < b.facet_sequence();
    });
    result.paths.erase(std::unique(result.paths.begin(), result.paths.end(),
                                   [](const PropagationPath &a, const PropagationPath &b) {
                                       return a.facet_sequence() == b.facet_sequence();
                                   }),
                       result.paths.end());

    bool has_direct = std::any_of(result.paths.begin(), result.paths.end(),
                                  [](const PropagationPath &p) { return p.is_los; });
    result.los_state = has_direct ? LosState::LOS : (result.paths.empty() ? LosState::DEAD : LosState::NLOS);
    return result;
}

// One LinkResult per receiver-plan point, in plan order. Parallel over links;
// output is identical for any worker count.
inline std::vector<LinkResult> trace_all(const Scene &scene) {
    std::vector<Vec3> points = scene.sample_points();
    std::vector<LinkResult> results(points.size());
    parallel_for(points.size(), [&](std::size_t i) { results[i] = trace_link(scene, points[i]); });
    return results;
}

} // namespace raychannel
