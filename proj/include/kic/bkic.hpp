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

#include <optional>
#include <stdexcept>
#include <vector>

#include "kic/channel.hpp"

namespace kic {

/// Amplitude threshold below which an interference symbol is treated as
/// zero power (relative to unit interference power).
inline constexpr double kZeroPowerEps = 1e-6;

/// Hypothesis cap for exhaustive ML detection.
inline constexpr std::uint64_t kMlEnumerationCap = 1u << 20;

/// Minimum admissible ratio of smallest to largest singular value before a
/// cancellation matrix is declared rank deficient.
inline constexpr double kRankRatioMin = 1e-9;

/// Condition-number cap for the pilot-assisted zero-forcing solve.
inline constexpr double kZfCondMax = 1e8;

/// A cancellation matrix turned out numerically rank deficient, or a solve
/// was too ill-conditioned to trust.
class degenerate_block_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Factored per-block cancellation pipeline.
///
/// q is the (T-1) x T cancellation matrix annihilating the block's
/// interference profile. Its SVD is stored in the q = u * [diag(s) | 0] * v
/// orientation: u is (T-1)x(T-1) unitary, s holds the T-1 singular values in
/// descending order, v is T x T unitary whose last row spans the null space
/// of q, and v1 is v with that last row removed. Row phases of v are pinned
/// (largest-magnitude entry real positive) so factorizations are unique.
/// Immutable once built; safe to share across threads.
struct BkicPipeline {
    CMat q;
    CMat u;
    Eigen::VectorXd s;
    CMat v;
    CMat v1;

    int block_len() const { return static_cast<int>(q.cols()); }
};

/// Pre-equalized block: r[k] divided by sqrt(p_z) z[k], which turns the
/// interference into the unknown gain times an all-one sequence. scale_map
/// records the induced per-symbol mapping of the target signal,
/// x'[k] = scale_map[k] * x[k] with scale_map[k] = sqrt(p_x/p_z) / z[k],
/// so recovery can invert it.
struct PreequalizedBlock {
    CVec r_prime;
    CVec scale_map;
};

/// Divides a received block by sqrt(p_z) z[k]. Requires p_z > 0 and every
/// |z[k]| > kZeroPowerEps; blocks with (near-)zero interference symbols must
/// go through cancel_with_zero_symbols instead.
PreequalizedBlock preequalize(const CVec& r_block, const CVec& z_block, double p_x,
                              double p_z);

/// The (T-1) x T adjacent-difference matrix with rows (.. 1, -1 ..). It
/// annihilates any constant sequence, hence the pre-equalized interference.
/// Requires block_len >= 2.
CMat build_q(int block_len);

/// Generalized cancellation matrix with rows (.. z[k+1], -z[k] ..), which
/// annihilates the interference profile itself so no pre-equalization is
/// needed. Requires block_len >= 2 and |z[k]| > kZeroPowerEps for all k.
CMat build_q_generalized(const CVec& z_block);

/// Factors a full-row-rank cancellation matrix into a BkicPipeline.
/// Throws degenerate_block_error when the smallest singular value is below
/// kRankRatioMin times the largest.
BkicPipeline factor_pipeline(const CMat& q);

/// Reduces one block to the effective (T-1)-antenna MIMO observation
///   y = inv(diag(s)) u^* q r_prime.
/// On block-fading input r_prime = x' + h e + n' the gain h is eliminated
/// and y = v1 x' + v1 n'.
CVec reduce_block(const BkicPipeline& pipe, const CVec& r_prime);

/// Rate of the effective MIMO channel, log2 det(I + gamma v1 v1^*), in bits
/// per block. Equals (T-1) log2(1+gamma) because the rows of v1 are
/// orthonormal.
double mimo_rate_bits(const BkicPipeline& pipe, double gamma);

/// Exhaustive-ML symbol decisions.
struct MlDecision {
    std::vector<int> indices; ///< chosen constellation index per symbol
    CVec symbols;             ///< the corresponding constellation points
};

/// Enumeration would exceed kMlEnumerationCap; use detect_zf_pilot.
class enumeration_cap_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Exhaustive maximum-likelihood detection over constellation^T:
/// minimizes || y - v1 * diag(scale_map) * c || over candidate symbol
/// vectors c. scale_map maps constellation points to the pipeline's signal
/// domain (use PreequalizedBlock::scale_map on the pre-equalized route, or a
/// constant sqrt(p_x) on the generalized-Q raw route).
///
/// Candidates are scanned in ascending lexicographic index order and an
/// incumbent is replaced only when its metric improves by more than a
/// 1e-9 relative margin, so exact mathematical ties resolve to the
/// lexicographically first candidate regardless of rounding.
MlDecision detect_ml(const CVec& y, const BkicPipeline& pipe,
                     const std::vector<cplx>& constellation, const CVec& scale_map);

struct ZfPilotResult {
    CVec x_prime;       ///< length-T estimates in the x' domain; pilot slot holds the pilot
    double cond = 0.0;  ///< condition number of the solved (T-1)x(T-1) system
};

/// Resolves the one-dimensional ambiguity of the reduced system with a
/// known pilot symbol: removes the pilot column's contribution from y and
/// solves the remaining square system by least squares. pilot_index is
/// zero-based. Throws degenerate_block_error when the condition number
/// exceeds kZfCondMax.
ZfPilotResult detect_zf_pilot(const CVec& y, const BkicPipeline& pipe, int pilot_index,
                              cplx pilot_value);

/// One maximal run of a block partitioned around zero-power interference
/// symbols.
struct CancellationSegment {
    enum class Kind {
        Passthrough,      ///< |z| ~ 0: plain point-to-point symbols, output = r
        BkicRun,          ///< nonzero run of length >= 2, reduced via its own pipeline
        SingletonFlagged, ///< nonzero run of length 1: no recoverable output
    };
    Kind kind;
    int start = 0; ///< first symbol index within the block
    int len = 0;
    CVec output;   ///< Passthrough: the r values; BkicRun: the reduced vector
    std::optional<BkicPipeline> pipeline; // BkicRun only
};

struct SegmentedCancellation {
    std::vector<CancellationSegment> segments;
    int total_symbols = 0; ///< always equals the block length
};

/// Splits a block around interference symbols with |z[k]| <= kZeroPowerEps
/// and cancels each nonzero run independently with its generalized matrix,
/// applied to the raw received symbols. Zero-interference symbols pass
/// through untouched. A nonzero run of length 1 is flagged: it carries no
/// cancellable structure, consistent with a length-1 block having zero rate.
SegmentedCancellation cancel_with_zero_symbols(const CVec& r_block, const CVec& z_block);

/// Reduction under continuous fading. The per-symbol gain increments leak
/// through the cancellation as inv(diag(s)) u^* Delta; with i.i.d.
/// CN(0, delta_var) increments that term has exact covariance
/// delta_var * diag(s)^-2, returned per component for SINR accounting.
struct ContinuousReduction {
    CVec y;
    Eigen::VectorXd extra_noise_var;
};

ContinuousReduction reduce_block_continuous(const BkicPipeline& pipe,
                                            const CVec& r_prime, double delta_var);

}  // namespace kic
