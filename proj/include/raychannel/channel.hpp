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

#include "raychannel/rng.hpp"
#include "raychannel/tracer.hpp"

namespace raychannel {

// Sparse channel impulse response: one complex tap per multipath component,
// sorted ascending by delay.
struct CirTap {
    double delay_s = 0.0;
    std::complex<double> amplitude;
};

struct SparseCir {
    std::vector<CirTap> taps;

    std::size_t n_taps() const { return taps.size(); }
};

// Band-limited sampled reconstruction of a sparse CIR.
struct SampledCir {
    std::vector<std::complex<double>> samples;
    double sample_interval_s = 0.0; // 1 / (oversampling_factor * bandwidth)
    double t0_s = 0.0;              // time of samples[0]
    double bandwidth_hz = 0.0;

    double time_of(std::size_t k) const { return t0_s + static_cast<double>(k) * sample_interval_s; }
};

// Augmentation settings: bandwidth sweep, additive noise floor and skewed
// multiplicative magnitude jitter. rng streams are derived per (seed, link,
// replica) so output does not depend on processing order.
struct AugmentSpec {
    std::vector<double> bandwidth_set_hz{499.2e6};
    double noise_snr_db = std::numeric_limits<double>::infinity();
    double skew = 0.0;
    int replicas_per_link = 1;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (bandwidth_set_hz.empty())
            throw std::invalid_argument("augment: bandwidth set must not be empty");
        for (double b : bandwidth_set_hz)
            if (!(b > 0.0))
                throw std::invalid_argument("augment: bandwidths must be > 0");
        if (replicas_per_link < 1)
            throw std::invalid_argument("augment: replicas must be >= 1");
        if (!(skew >= 0.0))
            throw std::invalid_argument("augment: skew must be >= 0");
    }
};

// Copies the taps of a traced link; errors on DEAD links (no channel exists).
inline SparseCir to_sparse_cir(const LinkResult &link) {
    if (link.paths.empty())
        throw std::invalid_argument("to_sparse_cir: link has no propagation paths (DEAD)");
    SparseCir cir;
    cir.taps.reserve(link.paths.size());
    for (const PropagationPath &p : link.paths)
        cir.taps.push_back({p.delay_s, p.gain});
    std::sort(cir.taps.begin(), cir.taps.end(), [](const CirTap &a, const CirTap &b) { return a.delay_s < b.delay_s; });
    return cir;
}

inline double sinc(double x) {
    if (x == 0.0)
        return 1.0;
    double px = pi * x;
    return std::sin(px) / px;
}

// Ideal low-pass reconstruction at bandwidth B: each tap becomes a scaled
// sinc pulse a_i * B * sinc(B (t - tau_i)), giving main lobes of width ~2/B
// and range resolution c/B. Sampling starts 5/B before the first tap (clamped
// at zero) and the configured window must cover the last tap plus a 10/B
// guard.
inline SampledCir band_limit(const SparseCir &cir, const RadioConfig &radio) {
    if (cir.taps.empty())
        throw std::invalid_argument("band_limit: empty CIR");
    double bandwidth = radio.bandwidth_hz;
    double dt = 1.0 / (static_cast<double>(radio.oversampling_factor) * bandwidth);
    double first_delay = cir.taps.front().delay_s;
    double last_delay = cir.taps.back().delay_s;

    SampledCir out;
    out.bandwidth_hz = bandwidth;
    out.sample_interval_s = dt;
    out.t0_s = std::max(0.0, first_delay - 5.0 / bandwidth);

    std::size_t n = static_cast<std::size_t>(std::ceil(radio.cir_window_s / dt));
    if (n == 0)
        n = 1;
    if (out.t0_s + static_cast<double>(n) * dt < last_delay + 10.0 / bandwidth)
        throw std::invalid_argument("band_limit: CIR window too short for the last tap plus 10/B guard");

    out.samples.assign(n, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
        double t = out.time_of(k);
        std::complex<double> acc{0.0, 0.0};
        for (const CirTap &tap : cir.taps)
            acc += tap.amplitude * (bandwidth * sinc(bandwidth * (t - tap.delay_s)));
        out.samples[k] = acc;
    }
    return out;
}

// Generates replicas_per_link * |bandwidth_set| sampled CIRs from one sparse
// CIR: reconstruction at each bandwidth, then mean-one log-normal magnitude
// jitter exp(skew*g - skew^2/2), then a circular complex Gaussian floor sized
// so that sum|clean|^2 / sum E|noise|^2 matches the configured SNR. Output is
// replica-major, bandwidths in set order.
inline std::vector<SampledCir> augment(const SparseCir &cir, const AugmentSpec &spec, const RadioConfig &radio,
                                       int link_index) {
    spec.validate();
    std::vector<SampledCir> out;
    out.reserve(static_cast<std::size_t>(spec.replicas_per_link) * spec.bandwidth_set_hz.size());
    for (int r = 0; r < spec.replicas_per_link; ++r) {
        std::mt19937_64 rng = make_stream(spec.rng_seed, static_cast<std::uint64_t>(link_index),
                                          static_cast<std::uint64_t>(r));
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (double bw : spec.bandwidth_set_hz) {
            RadioConfig rc = radio;
            rc.bandwidth_hz = bw;
            SampledCir s = band_limit(cir, rc);

            double clean_energy = 0.0;
            for (const auto &v : s.samples)
                clean_energy += std::norm(v);

            if (spec.skew > 0.0) {
                double bias = spec.skew * spec.skew / 2.0;
                for (auto &v : s.samples)
                    v *= std::exp(spec.skew * gauss(rng) - bias);
            }

            if (std::isfinite(spec.noise_snr_db)) {
                double snr = std::pow(10.0, spec.noise_snr_db / 10.0);
                double noise_var = clean_energy / (static_cast<double>(s.samples.size()) * snr);
                double sigma = std::sqrt(noise_var / 2.0);
                for (auto &v : s.samples)
                    v += std::complex<double>(sigma * gauss(rng), sigma * gauss(rng));
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

} // namespace raychannel
