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

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace kic {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Scalar channel parameters. Powers are linear and relative to the same
/// reference as sigma2; sigma2 is the total variance of the complex noise
/// (both dimensions together).
struct ChannelParams {
    double p_x = 1.0;    ///< received target-signal power
    double p_z = 1.0;    ///< received interference power
    double sigma2 = 1.0; ///< complex noise variance (total)
    int block_len = 1;   ///< fading coherence length T, in symbols
    int packet_len = 1;  ///< packet length N, a multiple of block_len

    /// SNR of the target signal.
    double gamma() const { return p_x / sigma2; }

    /// Signal-to-interference power ratio; undefined when p_z = 0.
    double rho() const {
        if (p_z <= 0.0)
            throw std::invalid_argument("rho undefined: p_z is zero");
        return p_x / p_z;
    }

    int num_blocks() const { return packet_len / block_len; }

    /// Throws std::invalid_argument when any invariant is violated.
    void validate() const;
};

/// Target-signal source distribution.
struct SignalSpec {
    enum class Kind { Gaussian, Psk, Qam };
    Kind kind = Kind::Gaussian;
    int order = 4; // constellation size for Psk/Qam

    static SignalSpec gaussian() { return {Kind::Gaussian, 0}; }
    static SignalSpec psk(int order) { return {Kind::Psk, order}; }
    static SignalSpec qam(int order) { return {Kind::Qam, order}; }
};

/// Interference source distribution. All base kinds have unit per-symbol
/// power, exactly for CpmPsk and in expectation otherwise. zero_tail > 0
/// zeroes the last zero_tail symbols of every block (the zero-power-symbol
/// case of the cancellation analysis); the remaining symbols keep their
/// base-kind unit power.
struct InterferenceSpec {
    enum class Kind { CpmPsk, Gaussian, Qam, Explicit };
    Kind kind = Kind::CpmPsk;
    int order = 4;
    CVec sequence;     // Explicit: length must equal packet_len
    int zero_tail = 0; // zeroed symbols at the end of each block

    static InterferenceSpec cpm_psk(int order) {
        InterferenceSpec s;
        s.kind = Kind::CpmPsk;
        s.order = order;
        return s;
    }
    static InterferenceSpec gaussian() {
        InterferenceSpec s;
        s.kind = Kind::Gaussian;
        return s;
    }
    static InterferenceSpec qam(int order) {
        InterferenceSpec s;
        s.kind = Kind::Qam;
        s.order = order;
        return s;
    }
    static InterferenceSpec explicit_sequence(CVec z) {
        InterferenceSpec s;
        s.kind = Kind::Explicit;
        s.sequence = std::move(z);
        return s;
    }
    InterferenceSpec with_zero_tail(int m) const {
        InterferenceSpec s = *this;
        s.zero_tail = m;
        return s;
    }
};

/// Fading model for the interference channel gain. Block mode draws one
/// CN(0,1) gain per block; continuous mode starts at CN(0,1) and adds an
/// independent CN(0, delta_var) increment every symbol.
struct FadingSpec {
    enum class Mode { Block, Continuous };
    Mode mode = Mode::Block;
    double delta_var = 0.0;

    static FadingSpec block() { return {Mode::Block, 0.0}; }
    static FadingSpec continuous(double delta_var) {
        return {Mode::Continuous, delta_var};
    }
};

/// One simulated packet. Satisfies, exactly as written,
///   r[k] = sqrt(p_x) x[k] + sqrt(p_z) h[k] z[k] + n[k].
struct PacketRecord {
    CVec x, z, h, n, r;
    int block_len = 1;
};

/// Per-block view into a packet (length block_len each).
struct BlockView {
    Eigen::Ref<const CVec> r, x, z, h, n;
};

/// PSK constellation of the given order: exp(i 2 pi m / order), m ascending.
std::vector<cplx> psk_constellation(int order);

/// Square QAM of the given order (4, 16, 64, ...), unit average power,
/// lexicographic over (re level, im level).
std::vector<cplx> qam_constellation(int order);

/// Generates one packet. Deterministic: identical arguments and seed give
/// a bit-identical record. Independent substreams are derived from the seed
/// for x, z, h and n, so the draws of one component do not disturb another.
PacketRecord generate_packet(const ChannelParams& params, const SignalSpec& xspec,
                             const InterferenceSpec& zspec, const FadingSpec& fspec,
                             std::uint64_t seed);

/// Splits a packet into per-block views; block i covers symbols
/// [i*block_len, (i+1)*block_len).
std::vector<BlockView> split_blocks(const PacketRecord& p, int block_len);

}  // namespace kic
