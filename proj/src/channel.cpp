// SPDX-License-Identifier: Apache-2.0
//
// kicsim: known-interference channel simulation and rate analysis
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

#include "kic/channel.hpp"

#include <cmath>
#include <numbers>

#include "kic/rng.hpp"

namespace kic {

namespace {

// Substream tags for generate_packet.
constexpr std::uint64_t kTagX = 1;
constexpr std::uint64_t kTagZ = 2;
constexpr std::uint64_t kTagH = 3;
constexpr std::uint64_t kTagN = 4;

cplx draw_from(const std::vector<cplx>& constellation, Rng& rng) {
    return constellation[rng.index(constellation.size())];
}

CVec draw_signal(const SignalSpec& spec, int n, Rng& rng) {
    CVec x(n);
    switch (spec.kind) {
    case SignalSpec::Kind::Gaussian:
        for (int k = 0; k < n; ++k) x[k] = rng.cgaussian(1.0);
        break;
    case SignalSpec::Kind::Psk: {
        const auto c = psk_constellation(spec.order);
        for (int k = 0; k < n; ++k) x[k] = draw_from(c, rng);
        break;
    }
    case SignalSpec::Kind::Qam: {
        const auto c = qam_constellation(spec.order);
        for (int k = 0; k < n; ++k) x[k] = draw_from(c, rng);
        break;
    }
    }
    return x;
}

CVec draw_interference(const InterferenceSpec& spec, const ChannelParams& params,
                       Rng& rng) {
    const int n = params.packet_len;
    CVec z(n);
    switch (spec.kind) {
    case InterferenceSpec::Kind::CpmPsk: {
        const auto c = psk_constellation(spec.order);
        for (int k = 0; k < n; ++k) z[k] = draw_from(c, rng);
        break;
    }
    case InterferenceSpec::Kind::Gaussian:
        for (int k = 0; k < n; ++k) z[k] = rng.cgaussian(1.0);
        break;
    case InterferenceSpec::Kind::Qam: {
        const auto c = qam_constellation(spec.order);
        for (int k = 0; k < n; ++k) z[k] = draw_from(c, rng);
        break;
    }
    case InterferenceSpec::Kind::Explicit:
        if (spec.sequence.size() != n)
            throw std::invalid_argument(
                "explicit interference sequence length must equal packet_len");
        z = spec.sequence;
        break;
    }
    if (spec.zero_tail > 0) {
        const int t = params.block_len;
        if (spec.zero_tail > t)
            throw std::invalid_argument("zero_tail exceeds block length");
        for (int b = 0; b < params.num_blocks(); ++b)
            z.segment(b * t + t - spec.zero_tail, spec.zero_tail).setZero();
    }
    return z;
}

CVec draw_fading(const FadingSpec& spec, const ChannelParams& params, Rng& rng) {
    const int n = params.packet_len;
    CVec h(n);
    if (spec.mode == FadingSpec::Mode::Block) {
        const int t = params.block_len;
        for (int b = 0; b < params.num_blocks(); ++b)
            h.segment(b * t, t).setConstant(rng.cgaussian(1.0));
    } else {
        if (spec.delta_var < 0.0)
            throw std::invalid_argument("delta_var must be nonnegative");
        h[0] = rng.cgaussian(1.0);
        for (int k = 1; k < n; ++k) h[k] = h[k - 1] + rng.cgaussian(spec.delta_var);
    }
    return h;
}

}  // namespace

void ChannelParams::validate() const {
    if (p_x < 0.0 || p_z < 0.0)
        throw std::invalid_argument("signal and interference powers must be nonnegative");
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("noise variance must be positive");
    if (block_len < 1 || packet_len < 1)
        throw std::invalid_argument("block and packet lengths must be positive");
    if (packet_len % block_len != 0)
        throw std::invalid_argument("packet_len must be a multiple of block_len");
}

std::vector<cplx> psk_constellation(int order) {
    if (order < 2) throw std::invalid_argument("PSK order must be at least 2");
    std::vector<cplx> c(order);
    for (int m = 0; m < order; ++m) {
        const double phase = 2.0 * std::numbers::pi * m / order;
        c[m] = {std::cos(phase), std::sin(phase)};
    }
    return c;
}

std::vector<cplx> qam_constellation(int order) {
    const int side = static_cast<int>(std::lround(std::sqrt(double(order))));
    if (side * side != order || side < 2)
        throw std::invalid_argument("QAM order must be a perfect square >= 4");
    // Odd-integer levels, normalized to unit average power:
    // E per dimension is (side^2 - 1)/3.
    const double norm = std::sqrt(2.0 * (side * side - 1) / 3.0);
    std::vector<cplx> c;
    c.reserve(order);
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j)
            c.emplace_back((2 * i - side + 1) / norm, (2 * j - side + 1) / norm);
    return c;
}

PacketRecord generate_packet(const ChannelParams& params, const SignalSpec& xspec,
                             const InterferenceSpec& zspec, const FadingSpec& fspec,
                             std::uint64_t seed) {
    params.validate();

    Rng rng_x(derive_seed(seed, kTagX));
    Rng rng_z(derive_seed(seed, kTagZ));
    Rng rng_h(derive_seed(seed, kTagH));
    Rng rng_n(derive_seed(seed, kTagN));

    PacketRecord p;
    p.block_len = params.block_len;
    p.x = draw_signal(xspec, params.packet_len, rng_x);
    p.z = draw_interference(zspec, params, rng_z);
    p.h = draw_fading(fspec, params, rng_h);
    p.n = CVec(params.packet_len);
    for (int k = 0; k < params.packet_len; ++k) p.n[k] = rng_n.cgaussian(params.sigma2);

    const double ax = std::sqrt(params.p_x);
    const double az = std::sqrt(params.p_z);
    p.r = CVec(params.packet_len);
    for (int k = 0; k < params.packet_len; ++k)
        p.r[k] = ax * p.x[k] + az * p.h[k] * p.z[k] + p.n[k];
    return p;
}

std::vector<BlockView> split_blocks(const PacketRecord& p, int block_len) {
    const auto n = p.r.size();
    if (block_len < 1 || n % block_len != 0)
        throw std::invalid_argument("packet length must be a multiple of block_len");
    std::vector<BlockView> blocks;
    blocks.reserve(static_cast<std::size_t>(n / block_len));
    for (Eigen::Index start = 0; start < n; start += block_len) {
        blocks.push_back(BlockView{p.r.segment(start, block_len),
                                   p.x.segment(start, block_len),
                                   p.z.segment(start, block_len),
                                   p.h.segment(start, block_len),
                                   p.n.segment(start, block_len)});
    }
    return blocks;
}

}  // namespace kic
