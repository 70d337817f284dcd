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

#include "kic/rates.hpp"

#include <cmath>

namespace kic {

namespace {

void require_valid_snr(double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
}

void require_valid_block(int block_len) {
    if (block_len < 1) throw std::invalid_argument("block_len must be positive");
}

}  // namespace

double rate_naive(double gamma) {
    require_valid_snr(gamma);
    return std::log2(1.0 + gamma);
}

UpperBound rate_upper_bound(const ChannelParams& params) {
    params.validate();
    const double t = params.block_len;

    if (params.p_z == 0.0)
        return {rate_naive(params.gamma()), true};

    const double power_form =
        (1.0 - 1.0 / t) * std::log2(1.0 + params.p_x / params.sigma2) +
        (1.0 / t) * std::log2(1.0 + params.p_x / (params.sigma2 + t * params.p_z));

    const double gamma = params.gamma();
    const double rho = params.rho();
    const double snr_form = (1.0 - 1.0 / t) * std::log2(1.0 + gamma) +
                            (1.0 / t) * std::log2(1.0 + rho * gamma / (rho + t * gamma));

    if (std::abs(power_form - snr_form) > 1e-12 * std::max(1.0, std::abs(power_form)))
        throw std::logic_error("upper-bound forms disagree beyond tolerance");
    return {power_form, false};
}

double rate_traditional(double gamma, int block_len) {
    require_valid_snr(gamma);
    require_valid_block(block_len);
    const double t = block_len;
    return std::log2(1.0 + (t - 1.0) * gamma / (t + gamma));
}

double rate_bkic(double gamma, int block_len) {
    require_valid_snr(gamma);
    require_valid_block(block_len);
    return (1.0 - 1.0 / block_len) * std::log2(1.0 + gamma);
}

double rate_gap(const ChannelParams& params) {
    params.validate();
    const double t = params.block_len;
    if (params.p_z == 0.0) return std::log2(1.0 + params.gamma()) / t;
    return (1.0 / t) * std::log2(1.0 + params.p_x / (params.sigma2 + t * params.p_z));
}

double rate_orth_cpm(double gamma, int block_len) {
    require_valid_snr(gamma);
    require_valid_block(block_len);
    return (1.0 - 1.0 / block_len) * std::log2(1.0 + gamma / 2.0);
}

double bound_blockwise(const ChannelParams& params, std::span<const double> block_powers) {
    params.validate();
    if (block_powers.empty())
        throw std::invalid_argument("at least one block power is required");
    const double t = params.block_len;

    double mean = 0.0;
    for (double w : block_powers) {
        if (w < 0.0) throw std::invalid_argument("block powers must be nonnegative");
        mean += w;
    }
    mean /= static_cast<double>(block_powers.size());
    if (std::abs(mean - t) > 1e-9 * std::max(1.0, t))
        throw std::invalid_argument(
            "block powers violate the packet power constraint (mean must be T)");

    double sum = 0.0;
    for (double w : block_powers)
        sum += std::log2(1.0 + params.p_x / (params.sigma2 + params.p_z * w));
    return (1.0 - 1.0 / t) * std::log2(1.0 + params.gamma()) +
           sum / (t * static_cast<double>(block_powers.size()));
}

double upper_bound_block_expansion(const ChannelParams& params) {
    params.validate();
    const double t = params.block_len;
    return t * std::log2(1.0 + params.p_x / params.sigma2) +
           std::log2(1.0 + t * params.p_z / (params.sigma2 + params.p_x)) -
           std::log2(1.0 + t * params.p_z / params.sigma2);
}

std::vector<DerivativeRow> rate_derivative_check(std::span<const double> gamma_grid,
                                                 int block_len) {
    require_valid_block(block_len);
    const double t = block_len;
    const auto diff_nats = [&](double g) {
        return std::log(1.0 + (t - 1.0) * g / (t + g)) -
               (1.0 - 1.0 / t) * std::log(1.0 + g);
    };

    std::vector<DerivativeRow> rows;
    rows.reserve(gamma_grid.size());
    for (double g : gamma_grid) {
        if (!(g > 0.0))
            throw std::invalid_argument("derivative grid requires gamma > 0");
        DerivativeRow row;
        row.gamma = g;
        row.alpha_closed_form = -(t - 1.0) * g / (t * (1.0 + g) * (t + g));
        const double h = 1e-5 * g;
        row.alpha_numeric = (diff_nats(g + h) - diff_nats(g - h)) / (2.0 * h);
        rows.push_back(row);
    }
    return rows;
}

RatePoint rate_point(const ChannelParams& params) {
    params.validate();
    RatePoint p;
    p.gamma = params.gamma();
    p.rho = (params.p_z > 0.0) ? params.rho() : 0.0;
    p.block_len = params.block_len;
    p.r_naive = rate_naive(p.gamma);
    p.c_u = rate_upper_bound(params).value;
    p.r_t = rate_traditional(p.gamma, p.block_len);
    p.r_bkic = rate_bkic(p.gamma, p.block_len);
    p.r_orth = rate_orth_cpm(p.gamma, p.block_len);
    p.gap = rate_gap(params);
    return p;
}

}  // namespace kic
