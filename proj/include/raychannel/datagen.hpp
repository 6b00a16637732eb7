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

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "raychannel/features.hpp"
#include "raychannel/scene_io.hpp"
#include "raychannel/version.hpp"

namespace raychannel {

enum class SplitSide : int { Train = 0, Test = 1 };

struct DatasetRow {
    int link_index = 0;
    int replica = 0;
    double bandwidth_hz = 0.0;
    FeatureVector features;
    SplitSide split = SplitSide::Train;
};

struct DatasetMeta {
    std::uint64_t scene_hash = 0;
    RadioConfig radio;
    AugmentSpec augment;
    int total_links = 0;
    int dead_links = 0;
    int excluded_rows = 0;
    double split_test_fraction = 0.0; // 0 when unsplit
    double split_block_m = 0.0;
    std::uint64_t split_seed = 0;
    std::vector<std::string> warnings;
};

// Labeled feature rows in canonical (link, replica, bandwidth) order.
struct Dataset {
    std::vector<DatasetRow> rows;
    DatasetMeta meta;
};

// Full per-link pipeline: trace -> sparse CIR -> augmented reconstructions ->
// features, labeled with the ray-traced LOS/NLOS state. DEAD links are
// dropped and counted. Deterministic for a fixed spec and scene.
inline Dataset generate_dataset(const Scene &scene, const AugmentSpec &spec) {
    spec.validate();
    std::vector<LinkResult> links = trace_all(scene);

    Dataset ds;
    ds.meta.scene_hash = scene_hash(scene);
    ds.meta.radio = scene.radio;
    ds.meta.augment = spec;
    ds.meta.total_links = static_cast<int>(links.size());

    std::vector<std::vector<DatasetRow>> per_link(links.size());
    std::vector<int> excluded(links.size(), 0);
    parallel_for(links.size(), [&](std::size_t i) {
        const LinkResult &link = links[i];
        if (link.los_state == LosState::DEAD)
            return;
        Label label = link.los_state == LosState::LOS ? Label::LOS : Label::NLOS;
        SparseCir cir = to_sparse_cir(link);
        std::vector<SampledCir> replicas = augment(cir, spec, scene.radio, static_cast<int>(i));
        std::size_t idx = 0;
        for (int r = 0; r < spec.replicas_per_link; ++r) {
            for (double bw : spec.bandwidth_set_hz) {
                const SampledCir &s = replicas[idx++];
                try {
                    DatasetRow row;
                    row.link_index = static_cast<int>(i);
                    row.replica = r;
                    row.bandwidth_hz = bw;
                    row.features = extract_features(s, scene.radio.tx_power_dbm, label, link.rx_position,
                                                    static_cast<int>(i));
                    per_link[i].push_back(std::move(row));
                } catch (const std::invalid_argument &) {
                    ++excluded[i]; // uninformative all-below-threshold CIR
                }
            }
        }
    });

    for (std::size_t i = 0; i < links.size(); ++i) {
        if (links[i].los_state == LosState::DEAD)
            ++ds.meta.dead_links;
        ds.meta.excluded_rows += excluded[i];
        for (DatasetRow &row : per_link[i])
            ds.rows.push_back(std::move(row));
    }

    if (ds.rows.empty())
        throw std::runtime_error("generate_dataset: all links are DEAD, no rows produced");

    bool has_los = false, has_nlos = false;
    for (const DatasetRow &r : ds.rows) {
        has_los |= r.features.label == Label::LOS;
        has_nlos |= r.features.label == Label::NLOS;
    }
    if (!has_los || !has_nlos)
        ds.meta.warnings.push_back("dataset contains a single label class");
    return ds;
}

// Blocked spatial holdout: positions fall into square blocks of side block_m,
// whole blocks go to the test side with probability test_fraction via a
// seeded hash. All replicas of a position share its block, which keeps
// augmented copies of one point on one side of the split.
inline Dataset split_spatial(const Dataset &dataset, double test_fraction, double block_m, std::uint64_t seed) {
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0))
        throw std::invalid_argument("split_spatial: test fraction must be in (0, 1)");
    if (!(block_m > 0.0))
        throw std::invalid_argument("split_spatial: block size must be > 0");
    if (dataset.rows.empty())
        throw std::invalid_argument("split_spatial: empty dataset");

    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    for (const DatasetRow &r : dataset.rows) {
        min_x = std::min(min_x, r.features.position.x);
        min_y = std::min(min_y, r.features.position.y);
    }

    Dataset out = dataset;
    out.meta.split_test_fraction = test_fraction;
    out.meta.split_block_m = block_m;
    out.meta.split_seed = seed;

    std::size_t n_test = 0;
    for (DatasetRow &r : out.rows) {
        auto bi = static_cast<std::int64_t>(std::floor((r.features.position.x - min_x) / block_m));
        auto bj = static_cast<std::int64_t>(std::floor((r.features.position.y - min_y) / block_m));
        std::uint64_t h = mix_seed(mix_seed(splitmix64(seed), static_cast<std::uint64_t>(bi)),
                                   static_cast<std::uint64_t>(bj));
        r.split = hash_to_unit(h) < test_fraction ? SplitSide::Test : SplitSide::Train;
        n_test += r.split == SplitSide::Test;
    }
    if (n_test == 0 || n_test == out.rows.size())
        throw std::runtime_error("split_spatial: degenerate split (one side is empty)");

    bool train_los = false, train_nlos = false, any_nlos = false, any_los = false;
    for (const DatasetRow &r : out.rows) {
        any_los |= r.features.label == Label::LOS;
        any_nlos |= r.features.label == Label::NLOS;
        if (r.split == SplitSide::Train) {
            train_los |= r.features.label == Label::LOS;
            train_nlos |= r.features.label == Label::NLOS;
        }
    }
    if (any_los && any_nlos && (!train_los || !train_nlos))
        throw std::runtime_error("split_spatial: train split lacks a label class");
    return out;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace detail

inline const char *dataset_csv_header() {
    return "link_index,replica,bandwidth_hz,x,y,z,rssi_dbm,max_amplitude,total_energy,mean_excess_delay_ns,"
           "rms_delay_spread_ns,kurtosis,tof_ns,label,split";
}

inline void write_dataset_csv(const Dataset &ds, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open dataset file for writing: " + path);
    out << dataset_csv_header() << "\n";
    for (const DatasetRow &r : ds.rows) {
        const FeatureVector &f = r.features;
        out << r.link_index << ',' << r.replica << ',' << detail::format_double(r.bandwidth_hz) << ','
            << detail::format_double(f.position.x) << ',' << detail::format_double(f.position.y) << ','
            << detail::format_double(f.position.z) << ',';
        auto vals = feature_values(f);
        for (double v : vals)
            out << detail::format_double(v) << ',';
        out << static_cast<int>(f.label) << ',' << (r.split == SplitSide::Test ? "test" : "train") << "\n";
    }
}

inline nlohmann::json dataset_meta_to_json(const Dataset &ds) {
    char hash_hex[19];
    std::snprintf(hash_hex, sizeof(hash_hex), "0x%016llx", static_cast<unsigned long long>(ds.meta.scene_hash));
    nlohmann::json j;
    j["format_version"] = 1;
    j["tool_version"] = RAYCHANNEL_VERSION;
    j["scene_hash_fnv1a64"] = hash_hex;
    j["radio"] = {{"fc_hz", ds.meta.radio.center_frequency_hz}, {"bw_hz", ds.meta.radio.bandwidth_hz},
                  {"tx_dbm", ds.meta.radio.tx_power_dbm},       {"max_order", ds.meta.radio.max_reflection_order},
                  {"window_s", ds.meta.radio.cir_window_s},     {"oversample", ds.meta.radio.oversampling_factor}};
    j["augment"] = {{"bandwidths_hz", ds.meta.augment.bandwidth_set_hz},
                    {"snr_db", std::isfinite(ds.meta.augment.noise_snr_db)
                                   ? nlohmann::json(ds.meta.augment.noise_snr_db)
                                   : nlohmann::json("inf")},
                    {"skew", ds.meta.augment.skew},
                    {"replicas_per_link", ds.meta.augment.replicas_per_link},
                    {"seed", ds.meta.augment.rng_seed}};
    j["split"] = {{"test_fraction", ds.meta.split_test_fraction},
                  {"block_m", ds.meta.split_block_m},
                  {"seed", ds.meta.split_seed}};
    j["counts"] = {{"links", ds.meta.total_links},
                   {"dead_links", ds.meta.dead_links},
                   {"rows", ds.rows.size()},
                   {"excluded_rows", ds.meta.excluded_rows}};
    j["feature_names"] = feature_names();
    j["warnings"] = ds.meta.warnings;
    return j;
}

inline void write_dataset_meta(const Dataset &ds, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open meta file for writing: " + path);
    out << dataset_meta_to_json(ds).dump(2) << "\n";
}

// Flat numeric view of a dataset CSV, as consumed by the classifier: feature
// matrix in dataset units, labels, split sides and positions.
struct DatasetTable {
    std::vector<std::array<double, feature_count>> features;
    std::vector<Label> labels;
    std::vector<SplitSide> splits;
    std::vector<Vec3> positions;
    std::vector<int> link_indices;
};

inline DatasetTable read_dataset_csv(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("dataset file '" + path + "': empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != dataset_csv_header())
        throw std::invalid_argument("dataset file '" + path + "': unexpected header");

    DatasetTable table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (cells.size() != 15)
            throw std::invalid_argument("dataset file '" + path + "': wrong column count on line " +
                                        std::to_string(line_no));
        auto num = [&](std::size_t idx) {
            double v = 0.0;
            const std::string &c = cells[idx];
            auto res = std::from_chars(c.data(), c.data() + c.size(), v);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size())
                throw std::invalid_argument("dataset file '" + path + "': bad number '" + c + "' on line " +
                                            std::to_string(line_no));
            return v;
        };
        table.link_indices.push_back(static_cast<int>(num(0)));
        // Replica and bandwidth are not kept in the table but must still be
        // well-formed numbers.
        (void)num(1);
        (void)num(2);
        table.positions.push_back({num(3), num(4), num(5)});
        std::array<double, feature_count> row{};
        for (int k = 0; k < feature_count; ++k)
            row[static_cast<std::size_t>(k)] = num(6 + static_cast<std::size_t>(k));
        table.features.push_back(row);
        int label = static_cast<int>(num(13));
        if (label != 0 && label != 1)
            throw std::invalid_argument("dataset file '" + path + "': label must be 0 or 1 on line " +
                                        std::to_string(line_no));
        table.labels.push_back(static_cast<Label>(label));
        if (cells[14] == "train")
            table.splits.push_back(SplitSide::Train);
        else if (cells[14] == "test")
            table.splits.push_back(SplitSide::Test);
        else
            throw std::invalid_argument("dataset file '" + path + "': split must be train or test on line " +
                                        std::to_string(line_no));
    }
    return table;
}

} // namespace raychannel
