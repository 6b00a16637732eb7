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

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <raychannel/raychannel.hpp>

namespace {

using namespace raychannel;

Vec3 parse_xyz(const std::vector<double> &v, const char *flag) {
    if (v.size() != 3)
        throw std::invalid_argument(std::string(flag) + " needs exactly three comma-separated values");
    return {v[0], v[1], v[2]};
}

std::string meta_path_for(const std::string &csv_path) {
    std::string stem = csv_path;
    if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv")
        stem.resize(stem.size() - 4);
    return stem + ".meta.json";
}

void write_trace_csv(const std::vector<LinkResult> &links, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open trace file for writing: " + path);
    out << "rx_x,rx_y,rx_z,path_index,n_reflections,length_m,delay_ns,gain_re,gain_im,los_state\n";
    auto fmt = detail::format_double;
    for (const LinkResult &link : links) {
        std::string prefix = fmt(link.rx_position.x) + "," + fmt(link.rx_position.y) + "," +
                             fmt(link.rx_position.z) + ",";
        if (link.paths.empty()) {
            // DEAD links keep one row so every receiver point stays visible.
            out << prefix << "-1,0,0,0,0,0," << to_string(link.los_state) << "\n";
            continue;
        }
        for (std::size_t p = 0; p < link.paths.size(); ++p) {
            const PropagationPath &path_p = link.paths[p];
            out << prefix << p << ',' << path_p.interactions.size() << ',' << fmt(path_p.length_m) << ','
                << fmt(path_p.delay_s * 1e9) << ',' << fmt(path_p.gain.real()) << ',' << fmt(path_p.gain.imag())
                << ',' << to_string(link.los_state) << "\n";
        }
    }
}

void write_cir_csv(const SampledCir &cir, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open CIR file for writing: " + path);
    auto fmt = detail::format_double;
    out << "t_ns,re,im,abs\n";
    for (std::size_t k = 0; k < cir.samples.size(); ++k) {
        std::complex<double> s = cir.samples[k];
        out << fmt(cir.time_of(k) * 1e9) << ',' << fmt(s.real()) << ',' << fmt(s.imag()) << ','
            << fmt(std::abs(s)) << "\n";
    }
}

void table_to_matrix(const DatasetTable &table, SplitSide side, bool all_rows,
                     std::vector<std::vector<double>> &x, std::vector<Label> &y) {
    for (std::size_t i = 0; i < table.features.size(); ++i) {
        if (!all_rows && table.splits[i] != side)
            continue;
        x.emplace_back(table.features[i].begin(), table.features[i].end());
        y.push_back(table.labels[i]);
    }
}

void print_report(const EvalReport &report) {
    std::printf("n=%lld accuracy=%.4f\n", static_cast<long long>(report.n_test), report.accuracy);
    std::printf("confusion [actual x predicted], order LOS,NLOS:\n");
    std::printf("  %8lld %8lld\n", static_cast<long long>(report.confusion[0][0]),
                static_cast<long long>(report.confusion[0][1]));
    std::printf("  %8lld %8lld\n", static_cast<long long>(report.confusion[1][0]),
                static_cast<long long>(report.confusion[1][1]));
    std::printf("precision LOS=%.4f NLOS=%.4f recall LOS=%.4f NLOS=%.4f\n", report.precision[0],
                report.precision[1], report.recall[0], report.recall[1]);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"deterministic multipath radio simulation and LOS/NLOS classification toolkit"};
    app.set_version_flag("--version", RAYCHANNEL_VERSION);
    app.require_subcommand(1);

    // scene: generate a parametric cabin or validate and re-emit a scene file.
    auto *sc_scene = app.add_subcommand("scene", "generate or validate a scene file");
    std::string scene_cabin, scene_in, scene_out;
    int scene_rows = 10;
    std::uint64_t scene_seed = 0;
    sc_scene->add_option("--cabin", scene_cabin, "cabin dimensions as LxWxH in meters, e.g. 30x4x2.2");
    sc_scene->add_option("--rows", scene_rows, "number of seat rows for --cabin")->check(CLI::NonNegativeNumber);
    sc_scene->add_option("--scene", scene_in, "existing scene file to validate");
    sc_scene->add_option("--seed", scene_seed, "scene seed");
    sc_scene->add_option("-o,--output", scene_out, "output scene JSON path")->required();
    sc_scene->callback([&] {
        if (scene_cabin.empty() == scene_in.empty())
            throw std::invalid_argument("scene: give exactly one of --cabin or --scene");
        Scene scene;
        if (!scene_cabin.empty()) {
            double l = 0, w = 0, h = 0;
            if (std::sscanf(scene_cabin.c_str(), "%lfx%lfx%lf", &l, &w, &h) != 3)
                throw std::invalid_argument("scene: --cabin expects LxWxH, e.g. 30x4x2.2");
            scene = make_cabin_scene(l, w, h, scene_rows, scene_seed);
        } else {
            scene = load_scene(scene_in);
        }
        write_scene(scene, scene_out);
        std::printf("wrote %s (%zu facets, %zu receiver points, hash 0x%016llx)\n", scene_out.c_str(),
                    scene.facets.size(), scene.sample_points().size(),
                    static_cast<unsigned long long>(scene_hash(scene)));
    });

    // trace: per-link multipath tables.
    auto *sc_trace = app.add_subcommand("trace", "trace all links and write a path table CSV");
    std::string trace_scene, trace_out;
    sc_trace->add_option("--scene", trace_scene, "scene JSON path")->required();
    sc_trace->add_option("-o,--output", trace_out, "output CSV path")->required();
    sc_trace->callback([&] {
        Scene scene = load_scene(trace_scene);
        std::vector<LinkResult> links = trace_all(scene);
        write_trace_csv(links, trace_out);
        std::size_t dead = 0, nlos = 0;
        for (const LinkResult &l : links) {
            dead += l.los_state == LosState::DEAD;
            nlos += l.los_state == LosState::NLOS;
        }
        std::printf("wrote %s (%zu links: %zu LOS, %zu NLOS, %zu DEAD)\n", trace_out.c_str(), links.size(),
                    links.size() - nlos - dead, nlos, dead);
    });

    // cir: band-limited reconstruction for one receiver position.
    auto *sc_cir = app.add_subcommand("cir", "write the sampled CIR of one link as CSV");
    std::string cir_scene, cir_out;
    std::vector<double> cir_rx, cir_bw;
    sc_cir->add_option("--scene", cir_scene, "scene JSON path")->required();
    sc_cir->add_option("--rx", cir_rx, "receiver position x,y,z in meters")->delimiter(',')->expected(3)->required();
    sc_cir->add_option("--bandwidths", cir_bw, "override reconstruction bandwidth in Hz (single value)")
        ->delimiter(',');
    sc_cir->add_option("-o,--output", cir_out, "output CSV path")->required();
    sc_cir->callback([&] {
        Scene scene = load_scene(cir_scene);
        if (cir_bw.size() > 1)
            throw std::invalid_argument("cir: --bandwidths takes a single value here");
        if (cir_bw.size() == 1)
            scene.radio.bandwidth_hz = cir_bw[0];
        scene.radio.validate();
        LinkResult link = trace_link(scene, parse_xyz(cir_rx, "--rx"));
        if (link.los_state == LosState::DEAD)
            throw std::invalid_argument("cir: link is DEAD, no CIR exists");
        SampledCir sampled = band_limit(to_sparse_cir(link), scene.radio);
        write_cir_csv(sampled, cir_out);
        std::printf("wrote %s (%zu paths, %zu samples, state %s)\n", cir_out.c_str(), link.paths.size(),
                    sampled.samples.size(), to_string(link.los_state));
    });

    // dataset: full pipeline to labeled CSV plus meta sidecar.
    auto *sc_data = app.add_subcommand("dataset", "generate a labeled feature dataset from a scene");
    std::string data_scene, data_out;
    std::vector<double> data_bw;
    double data_snr = std::numeric_limits<double>::infinity();
    double data_skew = 0.0, data_test_frac = 0.3, data_block = 1.0;
    int data_replicas = 1;
    std::uint64_t data_seed = 0;
    bool data_no_split = false;
    sc_data->add_option("--scene", data_scene, "scene JSON path")->required();
    sc_data->add_option("--replicas", data_replicas, "augmentation replicas per link")->check(CLI::PositiveNumber);
    sc_data->add_option("--bandwidths", data_bw, "reconstruction bandwidths in Hz (comma separated)")
        ->delimiter(',');
    sc_data->add_option("--snr-db", data_snr, "additive noise SNR in dB (default: no noise)");
    sc_data->add_option("--skew", data_skew, "log-normal magnitude jitter strength");
    auto *data_seed_opt = sc_data->add_option("--seed", data_seed, "augmentation/split seed (default: scene seed)");
    sc_data->add_option("--test-frac", data_test_frac, "spatial test fraction");
    sc_data->add_option("--block-m", data_block, "spatial block side in meters");
    sc_data->add_flag("--no-split", data_no_split, "skip the spatial split (all rows marked train)");
    sc_data->add_option("-o,--output", data_out, "output CSV path")->required();
    sc_data->callback([&] {
        Scene scene = load_scene(data_scene);
        AugmentSpec spec;
        if (!data_bw.empty())
            spec.bandwidth_set_hz = data_bw;
        spec.noise_snr_db = data_snr;
        spec.skew = data_skew;
        spec.replicas_per_link = data_replicas;
        spec.rng_seed = data_seed_opt->count() > 0 ? data_seed : scene.seed;
        Dataset ds = generate_dataset(scene, spec);
        if (!data_no_split)
            ds = split_spatial(ds, data_test_frac, data_block, splitmix64(spec.rng_seed));
        write_dataset_csv(ds, data_out);
        write_dataset_meta(ds, meta_path_for(data_out));
        std::printf("wrote %s and %s (%zu rows, %d links, %d DEAD)\n", data_out.c_str(),
                    meta_path_for(data_out).c_str(), ds.rows.size(), ds.meta.total_links, ds.meta.dead_links);
        for (const std::string &w : ds.meta.warnings)
            std::printf("warning: %s\n", w.c_str());
    });

    // train: random forest on the train split of a dataset CSV.
    auto *sc_train = app.add_subcommand("train", "train a random forest on a dataset CSV");
    std::string train_data, train_out;
    ForestHyperparams train_hp;
    int train_rfe = 0;
    std::uint64_t train_seed = 0;
    sc_train->add_option("--data", train_data, "dataset CSV path")->required();
    sc_train->add_option("--trees", train_hp.n_trees, "number of trees")->check(CLI::PositiveNumber);
    sc_train->add_option("--max-depth", train_hp.max_depth, "maximum tree depth")->check(CLI::PositiveNumber);
    sc_train->add_option("--min-leaf", train_hp.min_leaf_samples, "minimum samples per leaf")
        ->check(CLI::PositiveNumber);
    sc_train->add_option("--features-per-split", train_hp.features_per_split,
                         "features tried per split (0 = ceil(sqrt(F)))");
    sc_train->add_option("--rfe", train_rfe, "run recursive feature elimination down to K features");
    sc_train->add_option("--seed", train_seed, "training seed");
    sc_train->add_option("-o,--output", train_out, "output model JSON path")->required();
    sc_train->callback([&] {
        DatasetTable table = read_dataset_csv(train_data);
        std::vector<std::vector<double>> x;
        std::vector<Label> y;
        table_to_matrix(table, SplitSide::Train, false, x, y);
        const auto &canonical = feature_names();
        std::vector<std::string> names(canonical.begin(), canonical.end());
        std::vector<bool> mask;
        if (train_rfe > 0) {
            RfeResult rfe = recursive_feature_elimination(x, y, names, train_hp, train_rfe, train_seed);
            mask = rfe.best_mask;
            for (const RfeStep &s : rfe.steps)
                std::printf("rfe step: %d features, validation accuracy %.4f\n", s.n_features,
                            s.validation_accuracy);
        }
        ForestModel model = train_forest(x, y, names, train_hp, train_seed, mask);
        save_model(model, train_out);
        std::printf("wrote %s (%zu train rows, %d trees)\n", train_out.c_str(), x.size(), train_hp.n_trees);
        for (std::size_t f = 0; f < names.size(); ++f)
            std::printf("importance %-20s %.4f%s\n", names[f].c_str(), model.importances[f],
                        model.active_features[f] ? "" : " (masked)");
    });

    // evaluate: metrics of a saved model on one side of a dataset.
    auto *sc_eval = app.add_subcommand("evaluate", "evaluate a model on a dataset CSV");
    std::string eval_model, eval_data, eval_split = "test", eval_out;
    sc_eval->add_option("--model", eval_model, "model JSON path")->required();
    sc_eval->add_option("--data", eval_data, "dataset CSV path")->required();
    sc_eval->add_option("--split", eval_split, "rows to evaluate: test, train, or all")
        ->check(CLI::IsMember({"test", "train", "all"}));
    sc_eval->add_option("-o,--output", eval_out, "optional report JSON path");
    sc_eval->callback([&] {
        ForestModel model = load_model(eval_model);
        const auto &canonical = feature_names();
        if (!std::equal(model.feature_names.begin(), model.feature_names.end(), canonical.begin(),
                        canonical.end()))
            throw std::invalid_argument("evaluate: model feature names do not match this tool's feature set");
        DatasetTable table = read_dataset_csv(eval_data);
        std::vector<std::vector<double>> x;
        std::vector<Label> y;
        table_to_matrix(table, eval_split == "train" ? SplitSide::Train : SplitSide::Test, eval_split == "all", x,
                        y);
        if (x.empty())
            throw std::invalid_argument("evaluate: no rows in the requested split");
        EvalReport report = evaluate(model, x, y);
        print_report(report);
        if (!eval_out.empty()) {
            nlohmann::json j;
            j["split"] = eval_split;
            j["n_test"] = report.n_test;
            j["accuracy"] = report.accuracy;
            j["confusion"] = report.confusion;
            j["precision"] = report.precision;
            j["recall"] = report.recall;
            std::ofstream out(eval_out, std::ios::binary);
            if (!out)
                throw std::runtime_error("cannot open report file for writing: " + eval_out);
            out << j.dump(2) << "\n";
        }
    });

    // map: ground-truth and classifier LOS/NLOS grid maps plus agreement.
    auto *sc_map = app.add_subcommand("map", "render truth and estimate LOS/NLOS maps as PGM");
    std::string map_scene, map_model, map_truth, map_out;
    sc_map->add_option("--scene", map_scene, "scene JSON path (grid receiver plan)")->required();
    sc_map->add_option("--model", map_model, "model JSON path")->required();
    sc_map->add_option("--truth", map_truth, "output truth PGM path")->required();
    sc_map->add_option("-o,--output", map_out, "output estimate PGM path")->required();
    sc_map->callback([&] {
        Scene scene = load_scene(map_scene);
        ForestModel model = load_model(map_model);
        const auto &canonical = feature_names();
        if (!std::equal(model.feature_names.begin(), model.feature_names.end(), canonical.begin(),
                        canonical.end()))
            throw std::invalid_argument("map: model feature names do not match this tool's feature set");
        std::vector<LinkResult> links = trace_all(scene);
        GridMap truth = build_truth_map(scene, links);
        GridMap estimate = build_estimate_map(scene, links, model);
        double ratio = render_map(truth, estimate, map_truth, map_out);
        std::printf("wrote %s and %s (%dx%d cells)\n", map_truth.c_str(), map_out.c_str(), truth.width,
                    truth.height);
        std::printf("agreement %.4f\n", ratio);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
