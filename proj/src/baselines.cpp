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

#include "kic/baselines.hpp"

#include <cmath>

namespace kic {

CancellerReport traditional_kic(const CVec& r_block, const CVec& z_block,
                                const ChannelParams& params) {
    if (r_block.size() != z_block.size())
        throw std::invalid_argument("received and interference blocks differ in length");
    const int t = static_cast<int>(r_block.size());
    const double total_z_power = z_block.squaredNorm();
    const double ax = std::sqrt(params.p_x);

    CancellerReport rep;
    rep.sinr.resize(t);
    rep.signal_power = Eigen::VectorXd::Constant(t, params.p_x);
    rep.residual_power.resize(t);
    rep.noise_power.resize(t);

    if (total_z_power <= 0.0 || params.p_z <= 0.0) {
        // Nothing to cancel: the received block already is point to point.
        rep.passthrough = true;
        rep.x_hat = (params.p_x > 0.0) ? CVec(r_block / ax) : CVec(r_block);
        rep.x_hat_rescaled = rep.x_hat;
        rep.sinr.setConstant(params.gamma());
        rep.residual_power.setZero();
        rep.noise_power.setConstant(params.sigma2);
        return rep;
    }

    const double az = std::sqrt(params.p_z);
    rep.h_hat = z_block.dot(r_block) / (az * total_z_power);

    rep.x_hat.resize(t);
    rep.x_hat_rescaled.resize(t);
    for (int k = 0; k < t; ++k) {
        const cplx subtracted = r_block[k] - az * rep.h_hat * z_block[k];
        rep.x_hat[k] = (params.p_x > 0.0) ? subtracted / ax : subtracted;

        const double zk2 = std::norm(z_block[k]);
        const double others = total_z_power - zk2;
        if (others > 0.0) {
            rep.x_hat_rescaled[k] = rep.x_hat[k] * (total_z_power / others);
            rep.residual_power[k] = params.p_x * zk2 / others;
            rep.noise_power[k] = params.sigma2 * total_z_power / others;
            rep.sinr[k] = params.p_x * others /
                          (params.sigma2 * total_z_power + params.p_x * zk2);
        } else {
            // All interference power sits on this symbol; the estimate
            // contains no usable signal component.
            rep.x_hat_rescaled[k] = rep.x_hat[k];
            rep.residual_power[k] = params.p_x;
            rep.noise_power[k] = params.sigma2;
            rep.sinr[k] = 0.0;
        }
    }
    return rep;
}

Q1System build_q1(int block_len) {
    const int t = block_len;
    Q1System sys;
    sys.q1 = CMat::Zero(t, t);
    sys.q1.topRows(t - 1) = build_q(t);
    sys.q1.row(t - 1).setConstant(1.0 / t);

    sys.q1_inv.resize(t, t);
    for (int i = 0; i < t; ++i) {
        for (int j = 0; j + 1 < t; ++j)
            sys.q1_inv(i, j) = (i <= j) ? double(t - 1 - j) / t : double(-(j + 1)) / t;
        sys.q1_inv(i, t - 1) = 1.0;
    }
    return sys;
}

ZfRecovery bkic_zf(const Q1System& sys, const CVec& r_prime) {
    const int t = sys.block_len();
    if (r_prime.size() != t)
        throw std::invalid_argument("block length does not match the Q1 system");

    CVec augmented(t);
    augmented.head(t - 1) = sys.q1.topRows(t - 1) * r_prime;
    augmented[t - 1] = 0.0;

    ZfRecovery out;
    out.x_hat = sys.q1_inv * augmented;
    out.removed_mean = r_prime.mean();
    return out;
}

EquivalenceCheck assert_equivalence(const Q1System& sys, const CVec& r_prime) {
    const CVec ls = r_prime.array() - r_prime.mean();
    const CVec zf = bkic_zf(sys, r_prime).x_hat;

    EquivalenceCheck chk;
    chk.max_deviation = (ls - zf).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, r_prime.cwiseAbs().maxCoeff());
    chk.equivalent = chk.max_deviation <= 1e-10 * scale;
    return chk;
}

OrthTrainingReport orthogonal_training_kic(const CVec& r_block, const CVec& z_block,
                                           const ChannelParams& params,
                                           int pilot_index) {
    if (r_block.size() != z_block.size())
        throw std::invalid_argument("received and interference blocks differ in length");
    const int t = static_cast<int>(r_block.size());
    const int pilot = (pilot_index < 0) ? t - 1 : pilot_index;
    if (pilot >= t) throw std::invalid_argument("pilot index out of range");
    if (std::abs(z_block[pilot]) <= kZeroPowerEps)
        throw std::invalid_argument("training symbol has (near-)zero interference power");
    if (!(params.p_z > 0.0))
        throw std::invalid_argument("orthogonal training requires p_z > 0");

    const double az = std::sqrt(params.p_z);
    const double ax = std::sqrt(params.p_x);
    const double pilot_z2 = std::norm(z_block[pilot]);

    OrthTrainingReport rep;
    rep.h_hat = r_block[pilot] / (az * z_block[pilot]);
    rep.x_hat = CVec::Zero(t);
    rep.delta = Eigen::VectorXd::Zero(t);

    double rate = 0.0;
    for (int k = 0; k < t; ++k) {
        if (k == pilot) continue;
        const cplx subtracted = r_block[k] - az * rep.h_hat * z_block[k];
        rep.x_hat[k] = (params.p_x > 0.0) ? subtracted / ax : subtracted;
        rep.delta[k] = params.sigma2 * std::norm(z_block[k]) / pilot_z2;
        rate += std::log2(1.0 + params.p_x / (params.sigma2 + rep.delta[k]));
    }
    rep.rate_bits = rate / t;
    return rep;
}

}  // namespace kic
