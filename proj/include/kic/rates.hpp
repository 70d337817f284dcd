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

#include <span>
#include <vector>

#include "kic/channel.hpp"

namespace kic {

// Closed-form rates and capacity bounds of the known-interference channel,
// in bits per channel use. Conversion to nats happens at the output layer.

/// Perfect-cancellation benchmark, log2(1 + gamma).
double rate_naive(double gamma);

struct UpperBound {
    double value = 0.0;
    /// p_z = 0: the bound degenerates to rate_naive (no interference to
    /// blind-cancel against).
    bool degenerate_no_interference = false;
};

/// Capacity upper bound
///   (1 - 1/T) log2(1 + p_x/sigma2) + (1/T) log2(1 + p_x/(sigma2 + T p_z)).
/// The equivalent (gamma, rho) form is evaluated as a cross-check; both must
/// agree to 1e-12 relative.
UpperBound rate_upper_bound(const ChannelParams& params);

/// Achievable rate of least-squares cancellation,
///   log2(1 + (T-1) gamma / (T + gamma)).
/// Approaches log2(T) as gamma grows: zero degrees of freedom.
double rate_traditional(double gamma, int block_len);

/// Achievable rate of blind cancellation, (1 - 1/T) log2(1 + gamma).
double rate_bkic(double gamma, int block_len);

/// Upper bound minus the blind-cancellation rate,
///   (1/T) log2(1 + p_x/(sigma2 + T p_z)).
double rate_gap(const ChannelParams& params);

/// Rate of the coordinated orthogonal-training scheme with unit-modulus
/// interference, where the pilot estimation error contributes exactly one
/// extra noise quantum: (1 - 1/T) log2(1 + gamma/2).
double rate_orth_cpm(double gamma, int block_len);

/// Pre-worst-case upper bound for realized per-block interference powers
/// w_i = ||z_i||^2 (their mean must equal T within 1e-9):
///   (1 - 1/T) log2(1+gamma) + mean_i (1/T) log2(1 + p_x/(sigma2 + p_z w_i)).
/// By convexity this is minimized by the uniform profile, where it equals
/// rate_upper_bound.
double bound_blockwise(const ChannelParams& params, std::span<const double> block_powers);

/// Auxiliary per-block mutual-information expansion (total over one block,
/// nats-free form in bits):
///   T log2(1+p_x/sigma2) + log2(1+T p_z/(sigma2+p_x)) - log2(1+T p_z/sigma2).
/// Documented companion to the packet-level bound; the two are not asserted
/// equal.
double upper_bound_block_expansion(const ChannelParams& params);

struct DerivativeRow {
    double gamma = 0.0;
    double alpha_closed_form = 0.0; ///< -(T-1) gamma / (T (1+gamma) (T+gamma)), nats
    double alpha_numeric = 0.0;     ///< central-difference value
};

/// Compares the closed-form slope difference
/// d/dgamma (R_t - R_bkic) against a central-difference evaluation, in nats.
std::vector<DerivativeRow> rate_derivative_check(std::span<const double> gamma_grid,
                                                 int block_len);

/// All analytic rates at one operating point.
struct RatePoint {
    double gamma = 0.0;
    double rho = 0.0; ///< 0 when p_z = 0
    int block_len = 1;
    double r_naive = 0.0;
    double c_u = 0.0;
    double r_t = 0.0;
    double r_bkic = 0.0;
    double r_orth = 0.0;
    double gap = 0.0;
};

RatePoint rate_point(const ChannelParams& params);

}  // namespace kic
