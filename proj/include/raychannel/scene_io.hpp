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

#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "raychannel/scene.hpp"

namespace raychannel {

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json &obj, std::initializer_list<const char *> allowed,
                                const std::string &context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char *k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument("scene file: unknown key '" + it.key() + "' in " + context);
    }
    for (const char *k : allowed)
        if (!obj.contains(k))
            throw std::invalid_argument("scene file: missing key '" + std::string(k) + "' in " + context);
}

inline Vec3 parse_vec3(const json &j, const std::string &context) {
    if (!j.is_array() || j.size() != 3)
        throw std::invalid_argument("scene file: " + context + " must be a [x, y, z] array");
    Vec3 v{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    if (!v.finite())
        throw std::invalid_argument("scene file: non-finite coordinate in " + context);
    return v;
}

inline json vec3_to_json(const Vec3 &v) { return json::array({v.x, v.y, v.z}); }

} // namespace detail

inline nlohmann::json scene_to_json(const Scene &s) {
    using nlohmann::json;
    json j;
    j["materials"] = json::array();
    for (const Material &m : s.materials)
        j["materials"].push_back({{"name", m.name}, {"eps_r", m.rel_permittivity}, {"sigma", m.conductivity}});
    j["facets"] = json::array();
    for (const Facet &f : s.facets) {
        json verts = json::array();
        for (const Vec3 &v : f.vertices)
            verts.push_back(detail::vec3_to_json(v));
        j["facets"].push_back({{"id", f.id},
                               {"material", s.materials[static_cast<std::size_t>(f.material_index)].name},
                               {"vertices", verts}});
    }
    j["tx"] = detail::vec3_to_json(s.tx_position);
    j["radio"] = {{"fc_hz", s.radio.center_frequency_hz}, {"bw_hz", s.radio.bandwidth_hz},
                  {"tx_dbm", s.radio.tx_power_dbm},       {"max_order", s.radio.max_reflection_order},
                  {"window_s", s.radio.cir_window_s},     {"oversample", s.radio.oversampling_factor}};
    if (std::holds_alternative<GridPlan>(s.receivers)) {
        const GridPlan &g = std::get<GridPlan>(s.receivers);
        j["receivers"] = {{"grid",
                           {{"origin", detail::vec3_to_json(g.origin)},
                            {"extent_x", g.extent_x},
                            {"extent_y", g.extent_y},
                            {"spacing", g.spacing},
                            {"height", g.height}}}};
    } else {
        const TrajectoryPlan &t = std::get<TrajectoryPlan>(s.receivers);
        nlohmann::json wps = json::array();
        for (const Vec3 &w : t.waypoints)
            wps.push_back(detail::vec3_to_json(w));
        j["receivers"] = {{"trajectory", {{"waypoints", wps}, {"sample_step", t.sample_step}}}};
    }
    j["seed"] = s.seed;
    return j;
}

inline Scene scene_from_json(const nlohmann::json &j) {
    using detail::parse_vec3;
    using detail::reject_unknown_keys;

    if (!j.is_object())
        throw std::invalid_argument("scene file: top level must be a JSON object");
    reject_unknown_keys(j, {"materials", "facets", "tx", "radio", "receivers", "seed"}, "top level");

    Scene s;
    std::map<std::string, int> material_index;
    for (const auto &jm : j.at("materials")) {
        reject_unknown_keys(jm, {"name", "eps_r", "sigma"}, "material");
        Material m{jm.at("name").get<std::string>(), jm.at("eps_r").get<double>(), jm.at("sigma").get<double>()};
        material_index[m.name] = static_cast<int>(s.materials.size());
        s.materials.push_back(std::move(m));
    }

    for (const auto &jf : j.at("facets")) {
        reject_unknown_keys(jf, {"id", "material", "vertices"}, "facet");
        Facet f;
        f.id = jf.at("id").get<int>();
        std::string mat = jf.at("material").get<std::string>();
        auto it = material_index.find(mat);
        if (it == material_index.end())
            throw std::invalid_argument("scene file: facet " + std::to_string(f.id) + " references unknown material '" +
                                        mat + "'");
        f.material_index = it->second;
        for (const auto &jv : jf.at("vertices"))
            f.vertices.push_back(parse_vec3(jv, "facet " + std::to_string(f.id) + " vertex"));
        s.facets.push_back(std::move(f));
    }

    s.tx_position = parse_vec3(j.at("tx"), "tx");

    const auto &jr = j.at("radio");
    reject_unknown_keys(jr, {"fc_hz", "bw_hz", "tx_dbm", "max_order", "window_s", "oversample"}, "radio");
    s.radio.center_frequency_hz = jr.at("fc_hz").get<double>();
    s.radio.bandwidth_hz = jr.at("bw_hz").get<double>();
    s.radio.tx_power_dbm = jr.at("tx_dbm").get<double>();
    s.radio.max_reflection_order = jr.at("max_order").get<int>();
    s.radio.cir_window_s = jr.at("window_s").get<double>();
    s.radio.oversampling_factor = jr.at("oversample").get<int>();

    const auto &jrx = j.at("receivers");
    if (!jrx.is_object() || jrx.size() != 1)
        throw std::invalid_argument("scene file: receivers must hold exactly one of 'grid' or 'trajectory'");
    if (jrx.contains("grid")) {
        const auto &jg = jrx.at("grid");
        reject_unknown_keys(jg, {"origin", "extent_x", "extent_y", "spacing", "height"}, "receivers.grid");
        GridPlan g;
        g.origin = parse_vec3(jg.at("origin"), "receivers.grid.origin");
        g.extent_x = jg.at("extent_x").get<double>();
        g.extent_y = jg.at("extent_y").get<double>();
        g.spacing = jg.at("spacing").get<double>();
        g.height = jg.at("height").get<double>();
        s.receivers = g;
    } else if (jrx.contains("trajectory")) {
        const auto &jt = jrx.at("trajectory");
        reject_unknown_keys(jt, {"waypoints", "sample_step"}, "receivers.trajectory");
        TrajectoryPlan t;
        for (const auto &jw : jt.at("waypoints"))
            t.waypoints.push_back(parse_vec3(jw, "trajectory waypoint"));
        t.sample_step = jt.at("sample_step").get<double>();
        s.receivers = t;
    } else {
        throw std::invalid_argument("scene file: receivers must hold 'grid' or 'trajectory'");
    }

    s.seed = j.at("seed").get<std::int64_t>();
    s.validate();
    return s;
}

// Canonical serialization: sorted keys, shortest round-trip floats. Used for
// files and for the scene hash.
inline std::string scene_to_canonical_string(const Scene &s) { return scene_to_json(s).dump(2); }

inline void write_scene(const Scene &s, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open scene file for writing: " + path);
    out << scene_to_canonical_string(s) << "\n";
}

inline Scene load_scene(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open scene file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw std::invalid_argument("scene file '" + path + "': parse error: " + e.what());
    }
    try {
        return scene_from_json(j);
    } catch (const nlohmann::json::exception &e) {
        throw std::invalid_argument("scene file '" + path + "': " + e.what());
    }
}

// 64-bit FNV-1a over the canonical serialization.
inline std::uint64_t fnv1a64(const std::string &data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t scene_hash(const Scene &s) { return fnv1a64(scene_to_canonical_string(s)); }

} // namespace raychannel
