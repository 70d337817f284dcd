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

#include "kic/bkic.hpp"
#include "kic/channel.hpp"

namespace kic {

/// Output of a reference canceller on one block: the per-block gain
/// estimate, per-symbol target estimates, and the analytic per-symbol SINR
/// decomposition of the post-cancellation signal.
struct CancellerReport {
    cplx h_hat{0.0, 0.0};

    /// Plain subtraction estimate, x_hat[k] = (r[k] - sqrt(p_z) h_hat z[k]) / sqrt(p_x).
    CVec x_hat;

    /// Unbiased rescaling of x_hat (factor A / (A - |z[k]|^2) with
    /// A = sum |z|^2): sqrt(p_x) * x_hat_rescaled[k] decomposes as the true
    /// sqrt(p_x) x[k] plus a zero-mean disturbance whose power the analytic
    /// fields below describe. Symbols with A = |z[k]|^2 keep the plain
    /// estimate and zero SINR.
    CVec x_hat_rescaled;

    Eigen::VectorXd sinr;           ///< per-symbol analytic SINR (linear)
    Eigen::VectorXd signal_power;   ///< p_x per symbol
    Eigen::VectorXd residual_power; ///< estimation-error leakage of other symbols
    Eigen::VectorXd noise_power;    ///< thermal noise incl. leaked noise

    bool passthrough = false; ///< no cancellation performed (zero interference)
};

/// Least-squares known-interference canceller: estimates the block gain as
/// h_hat = sum(conj(z) r) / (sqrt(p_z) sum |z|^2), subtracts the
/// reconstructed interference, and reports the per-symbol SINR
///   sinr[k] = p_x (A - |z[k]|^2) / (sigma2 A + p_x |z[k]|^2),
/// which for unit-modulus z reduces to (T-1) p_x / (p_x + T sigma2) at
/// every symbol. An all-zero z block (or p_z = 0) is passed through
/// unchanged with sinr = gamma.
CancellerReport traditional_kic(const CVec& r_block, const CVec& z_block,
                                const ChannelParams& params);

/// The difference matrix with an appended averaging row a_T = (1 .. 1)/T,
/// together with its closed-form inverse: column j < T of T*inverse holds
/// T-j on rows up to j and -j below; the last column is all T.
struct Q1System {
    CMat q1;
    CMat q1_inv;

    int block_len() const { return static_cast<int>(q1.rows()); }
};

Q1System build_q1(int block_len);

struct ZfRecovery {
    CVec x_hat;        ///< estimates of x' + n'
    cplx removed_mean; ///< the block mean subtracted from every symbol
};

/// Zero-forcing recovery through the augmented inverse:
/// x_hat = q1_inv * [q r_prime; 0]. Algebraically this removes the block
/// mean from r_prime, which is why it matches the least-squares canceller
/// exactly.
ZfRecovery bkic_zf(const Q1System& sys, const CVec& r_prime);

struct EquivalenceCheck {
    bool equivalent = false;
    double max_deviation = 0.0;
};

/// Feeds the same pre-equalized block to the least-squares canceller
/// (unit-modulus path: subtract the block mean) and to bkic_zf, and reports
/// the largest per-symbol deviation. Equivalent when the deviation is below
/// 1e-10 relative to the block's magnitude scale.
EquivalenceCheck assert_equivalence(const Q1System& sys, const CVec& r_prime);

struct OrthTrainingReport {
    cplx h_hat{0.0, 0.0};
    CVec x_hat;              ///< data-symbol estimates; pilot slot is zero
    Eigen::VectorXd delta;   ///< analytic estimation-error noise per symbol:
                             ///< sigma2 |z[k]|^2 / |z[pilot]|^2 (0 at the pilot)
    double rate_bits = 0.0;  ///< (1/T) sum_{k != pilot} log2(1 + p_x/(sigma2 + delta[k]))
};

/// Coordinated orthogonal-training canceller: the transmitter leaves the
/// pilot slot empty (x[pilot] = 0), the gain is estimated from that clean
/// symbol alone, and the interference is subtracted from the rest. Throws
/// std::invalid_argument when |z[pilot]| <= kZeroPowerEps.
OrthTrainingReport orthogonal_training_kic(const CVec& r_block, const CVec& z_block,
                                           const ChannelParams& params,
                                           int pilot_index = -1);

}  // namespace kic
