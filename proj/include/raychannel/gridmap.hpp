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

#include "raychannel/channel.hpp"
#include "raychannel/forest.hpp"
#include "raychannel/tracer.hpp"

namespace raychannel {

enum class CellState : unsigned char { Dead = 0, Nlos = 1, Los = 2 };

// Receiver-grid classification map, row-major with x varying fastest, same
// ordering as the grid receiver plan's sample points.
struct GridMap {
    int width = 0;
    int height = 0;
    Vec3 origin;
    double spacing = 0.0;
    std::vector<CellState> cells;

    CellState at(int ix, int iy) const { return cells.at(static_cast<std::size_t>(iy) * width + ix); }
};

namespace detail {

inline GridMap empty_map_for(const Scene &scene) {
    const auto *grid = std::get_if<GridPlan>(&scene.receivers);
    if (grid == nullptr)
        throw std::invalid_argument("grid map requires a grid receiver plan");
    GridMap map;
    map.width = grid->nx();
    map.height = grid->ny();
    map.origin = grid->origin;
    map.spacing = grid->spacing;
    map.cells.assign(static_cast<std::size_t>(map.width) * map.height, CellState::Dead);
    return map;
}

inline void check_link_count(const GridMap &map, std::size_t n_links) {
    if (n_links != map.cells.size())
        throw std::invalid_argument("grid map: link count does not match grid dimensions");
}

} // namespace detail

// Ground-truth map from the traced LOS/NLOS state of each grid link.
inline GridMap build_truth_map(const Scene &scene, const std::vector<LinkResult> &links) {
    GridMap map = detail::empty_map_for(scene);
    detail::check_link_count(map, links.size());
    for (std::size_t i = 0; i < links.size(); ++i) {
        switch (links[i].los_state) {
        case LosState::LOS: map.cells[i] = CellState::Los; break;
        case LosState::NLOS: map.cells[i] = CellState::Nlos; break;
        case LosState::DEAD: map.cells[i] = CellState::Dead; break;
        }
    }
    return map;
}

// Classifier map: noise-free band-limited features per link, then a forest
// vote. DEAD links and links whose reconstruction carries no signal stay
// DEAD.
inline GridMap build_estimate_map(const Scene &scene, const std::vector<LinkResult> &links,
                                  const ForestModel &model) {
    GridMap map = detail::empty_map_for(scene);
    detail::check_link_count(map, links.size());
    parallel_for(links.size(), [&](std::size_t i) {
        const LinkResult &link = links[i];
        if (link.los_state == LosState::DEAD)
            return;
        SampledCir sampled = band_limit(to_sparse_cir(link), scene.radio);
        FeatureVector fv;
        try {
            fv = extract_features(sampled, scene.radio.tx_power_dbm, Label::LOS, link.rx_position,
                                  static_cast<int>(i));
        } catch (const std::invalid_argument &) {
            return;
        }
        auto vals = feature_values(fv);
        Label predicted = predict(model, std::vector<double>(vals.begin(), vals.end()));
        map.cells[i] = predicted == Label::NLOS ? CellState::Nlos : CellState::Los;
    });
    return map;
}

// Binary PGM (P5), one byte per cell: LOS=255, NLOS=64, DEAD=0. Rows are
// written top to bottom in increasing y.
inline void write_pgm(const GridMap &map, const std::string &path) {
    if (map.width < 1 || map.height < 1 || map.cells.size() != static_cast<std::size_t>(map.width) * map.height)
        throw std::invalid_argument("write_pgm: inconsistent map dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open map file for writing: " + path);
    out << "P5\n" << map.width << " " << map.height << "\n255\n";
    for (CellState c : map.cells) {
        unsigned char byte = c == CellState::Los ? 255 : c == CellState::Nlos ? 64 : 0;
        out.put(static_cast<char>(byte));
    }
}

// Cell-wise agreement over cells that are non-DEAD in both maps.
inline double agreement(const GridMap &truth, const GridMap &estimate) {
    if (truth.width != estimate.width || truth.height != estimate.height)
        throw std::invalid_argument("agreement: map dimensions differ");
    std::size_t n = 0, same = 0;
    for (std::size_t i = 0; i < truth.cells.size(); ++i) {
        if (truth.cells[i] == CellState::Dead || estimate.cells[i] == CellState::Dead)
            continue;
        ++n;
        same += truth.cells[i] == estimate.cells[i];
    }
    if (n == 0)
        throw std::runtime_error("agreement: no cell is non-DEAD in both maps");
    return static_cast<double>(same) / static_cast<double>(n);
}

// Writes both maps and returns their agreement ratio.
inline double render_map(const GridMap &truth, const GridMap &estimate, const std::string &truth_path,
                         const std::string &estimate_path) {
    double ratio = agreement(truth, estimate);
    write_pgm(truth, truth_path);
    write_pgm(estimate, estimate_path);
    return ratio;
}

} // namespace raychannel
