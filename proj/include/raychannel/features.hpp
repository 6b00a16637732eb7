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

#include <array>
#include <string>

#include "raychannel/channel.hpp"

namespace raychannel {

enum class Label : int { LOS = 0, NLOS = 1 };

// Delay moments use samples above this fraction of the peak magnitude, which
// keeps sinc sidelobes and the noise floor out of the power weighting.
constexpr double delay_moment_threshold = 0.05;
// Leading-edge first-path detector threshold, fraction of peak.
constexpr double tof_threshold = 0.2;

// Scalar feature set extracted from one sampled CIR, with the ray-traced
// LOS/NLOS ground truth attached.
struct FeatureVector {
    double rssi_dbm = 0.0;
    double max_amplitude = 0.0;       // peak |sample|, field units
    double total_energy = 0.0;        // dt * sum |s|^2, per unit tx field
    double mean_excess_delay_s = 0.0;
    double rms_delay_spread_s = 0.0;
    double kurtosis = 0.0;            // m4/m2^2 of |s| over the full window
    double tof_s = 0.0;               // leading-edge first-path delay
    Label label = Label::LOS;
    Vec3 position;
    int link_index = 0;
};

constexpr int feature_count = 7;

inline const std::array<std::string, feature_count> &feature_names() {
    static const std::array<std::string, feature_count> names = {
        "rssi_dbm",       "max_amplitude",       "total_energy", "mean_excess_delay_ns",
        "rms_delay_spread_ns", "kurtosis",       "tof_ns"};
    return names;
}

// Feature values in dataset units (delays in nanoseconds), fixed order.
inline std::array<double, feature_count> feature_values(const FeatureVector &f) {
    return {f.rssi_dbm,          f.max_amplitude,           f.total_energy, f.mean_excess_delay_s * 1e9,
            f.rms_delay_spread_s * 1e9, f.kurtosis,         f.tof_s * 1e9};
}

inline FeatureVector extract_features(const SampledCir &cir, double tx_power_dbm, Label label, const Vec3 &position,
                                      int link_index) {
    if (cir.samples.empty())
        throw std::invalid_argument("extract_features: empty CIR");

    const std::size_t n = cir.samples.size();
    std::vector<double> mag(n);
    double peak = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mag[k] = std::abs(cir.samples[k]);
        peak = std::max(peak, mag[k]);
    }
    if (!(peak > 0.0) || !std::isfinite(peak))
        throw std::invalid_argument("extract_features: all samples below threshold (no signal)");

    FeatureVector out;
    out.label = label;
    out.position = position;
    out.link_index = link_index;
    out.max_amplitude = peak;

    // Power-weighted delay moments over samples >= 5% of peak.
    double moment_floor = delay_moment_threshold * peak;
    double p_sum = 0.0, pt_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (mag[k] >= moment_floor) {
            double p = mag[k] * mag[k];
            p_sum += p;
            pt_sum += p * cir.time_of(k);
        }
    }
    double mean_delay = pt_sum / p_sum;
    double var_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (mag[k] >= moment_floor) {
            double d = cir.time_of(k) - mean_delay;
            var_sum += mag[k] * mag[k] * d * d;
        }
    }
    out.mean_excess_delay_s = mean_delay;
    out.rms_delay_spread_s = std::sqrt(var_sum / p_sum);

    // Pearson kurtosis of the full-window magnitude sequence.
    double mean_mag = 0.0;
    for (double m : mag)
        mean_mag += m;
    mean_mag /= static_cast<double>(n);
    double m2 = 0.0, m4 = 0.0;
    for (double m : mag) {
        double d = m - mean_mag;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    out.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 1.0;

    double energy = 0.0;
    for (double m : mag)
        energy += m * m;
    out.total_energy = cir.sample_interval_s * energy;

    // Link energy gain relative to a unit-amplitude path: a unity tap
    // reconstructs to a pulse of energy B, so total_energy / B is the
    // dimensionless sum of squared path gains.
    out.rssi_dbm = tx_power_dbm + 10.0 * std::log10(out.total_energy / cir.bandwidth_hz);

    double tof_floor = tof_threshold * peak;
    out.tof_s = cir.time_of(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        if (mag[k] >= tof_floor) {
            out.tof_s = cir.time_of(k);
            break;
        }
    }
    return out;
}

} // namespace raychannel
