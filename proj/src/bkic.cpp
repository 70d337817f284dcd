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

#include "kic/bkic.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace kic {

namespace {

// Rotates row i of v so its leading near-maximal entry is real positive and
// compensates the paired column of u (none for the null row). Pins the
// factorization to a unique representative; the pivot is the first entry
// within 1e-9 of the row maximum so magnitude ties cannot flip the choice.
void canonicalize_factors(CMat& u, CMat& v) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        const double top = v.row(i).cwiseAbs().maxCoeff();
        if (top == 0.0) continue;
        Eigen::Index pivot_col = 0;
        while (std::abs(v(i, pivot_col)) < (1.0 - 1e-9) * top) ++pivot_col;
        const cplx pivot = v(i, pivot_col);
        const cplx phase = pivot / std::abs(pivot);
        v.row(i) *= std::conj(phase);
        if (i < u.cols()) u.col(i) *= phase;
    }
}

}  // namespace

PreequalizedBlock preequalize(const CVec& r_block, const CVec& z_block, double p_x,
                              double p_z) {
    if (r_block.size() != z_block.size())
        throw std::invalid_argument("received and interference blocks differ in length");
    if (!(p_z > 0.0))
        throw std::invalid_argument("preequalize requires p_z > 0");
    const double az = std::sqrt(p_z);
    const double ax_over_az = std::sqrt(p_x / p_z);
    PreequalizedBlock out;
    out.r_prime.resize(r_block.size());
    out.scale_map.resize(r_block.size());
    for (Eigen::Index k = 0; k < r_block.size(); ++k) {
        if (std::abs(z_block[k]) <= kZeroPowerEps)
            throw std::invalid_argument(
                "interference symbol has (near-)zero power; use the zero-split path");
        out.r_prime[k] = r_block[k] / (az * z_block[k]);
        out.scale_map[k] = ax_over_az / z_block[k];
    }
    return out;
}

CMat build_q(int block_len) {
    if (block_len < 2)
        throw std::invalid_argument(
            "cancellation needs block_len >= 2; a single symbol carries no "
            "recoverable information");
    CMat q = CMat::Zero(block_len - 1, block_len);
    for (int k = 0; k + 1 < block_len; ++k) {
        q(k, k) = 1.0;
        q(k, k + 1) = -1.0;
    }
    return q;
}

CMat build_q_generalized(const CVec& z_block) {
    const auto t = z_block.size();
    if (t < 2)
        throw std::invalid_argument(
            "cancellation needs block_len >= 2; a single symbol carries no "
            "recoverable information");
    for (Eigen::Index k = 0; k < t; ++k)
        if (std::abs(z_block[k]) <= kZeroPowerEps)
            throw std::invalid_argument(
                "interference symbol has (near-)zero power; use the zero-split path");
    CMat q = CMat::Zero(t - 1, t);
    for (Eigen::Index k = 0; k + 1 < t; ++k) {
        q(k, k) = z_block[k + 1];
        q(k, k + 1) = -z_block[k];
    }
    return q;
}

BkicPipeline factor_pipeline(const CMat& q) {
    if (q.rows() + 1 != q.cols() || q.rows() < 1)
        throw std::invalid_argument("cancellation matrix must be (T-1) x T");

    Eigen::JacobiSVD<CMat> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd s = svd.singularValues(); // descending
    if (!(s(s.size() - 1) > kRankRatioMin * s(0)))
        throw degenerate_block_error(
            "cancellation matrix is numerically rank deficient (singular value "
            "ratio " +
            std::to_string(s(s.size() - 1) / s(0)) + ")");

    BkicPipeline pipe;
    pipe.q = q;
    pipe.u = svd.matrixU();
    pipe.s = s;
    // Eigen returns q = U S V^adj; store v in the q = u [S|0] v orientation,
    // with the null-space direction as the last row.
    pipe.v = svd.matrixV().adjoint();
    canonicalize_factors(pipe.u, pipe.v);
    pipe.v1 = pipe.v.topRows(pipe.v.rows() - 1);
    return pipe;
}

CVec reduce_block(const BkicPipeline& pipe, const CVec& r_prime) {
    if (r_prime.size() != pipe.q.cols())
        throw std::invalid_argument("block length does not match the pipeline");
    CVec y = pipe.u.adjoint() * (pipe.q * r_prime);
    y.array() /= pipe.s.array().cast<cplx>();
    return y;
}

double mimo_rate_bits(const BkicPipeline& pipe, double gamma) {
    const auto m = pipe.v1.rows();
    CMat g = CMat::Identity(m, m) + gamma * (pipe.v1 * pipe.v1.adjoint());
    // Hermitian positive definite; accumulate the log determinant through
    // the Cholesky diagonal to avoid overflow at large T and gamma.
    Eigen::LLT<CMat> llt(g);
    if (llt.info() != Eigen::Success)
        throw degenerate_block_error("effective MIMO Gram matrix is not positive definite");
    double log2_det = 0.0;
    const CMat l = llt.matrixL();
    for (Eigen::Index i = 0; i < m; ++i) log2_det += 2.0 * std::log2(std::real(l(i, i)));
    return log2_det;
}

MlDecision detect_ml(const CVec& y, const BkicPipeline& pipe,
                     const std::vector<cplx>& constellation, const CVec& scale_map) {
    const int t = pipe.block_len();
    const int m = static_cast<int>(constellation.size());
    if (m < 1) throw std::invalid_argument("constellation is empty");
    if (scale_map.size() != t)
        throw std::invalid_argument("scale_map length does not match the pipeline");
    if (y.size() != t - 1)
        throw std::invalid_argument("observation length does not match the pipeline");

    double hypotheses = 1.0;
    for (int k = 0; k < t; ++k) hypotheses *= m;
    if (hypotheses > static_cast<double>(kMlEnumerationCap))
        throw enumeration_cap_error(
            "constellation^T exceeds the enumeration cap; use detect_zf_pilot");

    // candidate contribution of symbol k at index i: v1.col(k) * scale * point
    std::vector<CVec> contrib(static_cast<std::size_t>(t) * m);
    for (int k = 0; k < t; ++k)
        for (int i = 0; i < m; ++i)
            contrib[static_cast<std::size_t>(k) * m + i] =
                pipe.v1.col(k) * (scale_map[k] * constellation[i]);

    // Lexicographic odometer (last symbol fastest) over index tuples, with
    // partial residuals per prefix so each step touches one symbol.
    std::vector<int> idx(t, 0);
    std::vector<CVec> resid(t + 1);
    resid[0] = y;
    for (int k = 0; k < t; ++k)
        resid[k + 1] = resid[k] - contrib[static_cast<std::size_t>(k) * m + 0];

    std::vector<int> best = idx;
    double best_metric = resid[t].squaredNorm();
    for (;;) {
        // advance odometer
        int pos = t - 1;
        while (pos >= 0 && idx[pos] == m - 1) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int k = pos + 1; k < t; ++k) idx[k] = 0;
        for (int k = pos; k < t; ++k)
            resid[k + 1] = resid[k] - contrib[static_cast<std::size_t>(k) * m + idx[k]];

        const double metric = resid[t].squaredNorm();
        if (metric < best_metric - 1e-9 * (1.0 + best_metric)) {
            best_metric = metric;
            best = idx;
        }
    }

    MlDecision d;
    d.indices = std::move(best);
    d.symbols.resize(t);
    for (int k = 0; k < t; ++k) d.symbols[k] = constellation[d.indices[k]];
    return d;
}

ZfPilotResult detect_zf_pilot(const CVec& y, const BkicPipeline& pipe, int pilot_index,
                              cplx pilot_value) {
    const int t = pipe.block_len();
    if (pilot_index < 0 || pilot_index >= t)
        throw std::invalid_argument("pilot index out of range");
    if (y.size() != t - 1)
        throw std::invalid_argument("observation length does not match the pipeline");

    CMat m(t - 1, t - 1);
    int col = 0;
    for (int k = 0; k < t; ++k) {
        if (k == pilot_index) continue;
        m.col(col++) = pipe.v1.col(k);
    }
    const CVec rhs = y - pipe.v1.col(pilot_index) * pilot_value;

    Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (!(cond < kZfCondMax))
        throw degenerate_block_error("pilot-reduced system too ill-conditioned (cond " +
                                     std::to_string(cond) + ")");
    const CVec sol = svd.solve(rhs);

    ZfPilotResult out;
    out.cond = cond;
    out.x_prime.resize(t);
    col = 0;
    for (int k = 0; k < t; ++k)
        out.x_prime[k] = (k == pilot_index) ? pilot_value : sol[col++];
    return out;
}

SegmentedCancellation cancel_with_zero_symbols(const CVec& r_block, const CVec& z_block) {
    if (r_block.size() != z_block.size())
        throw std::invalid_argument("received and interference blocks differ in length");
    const int t = static_cast<int>(z_block.size());

    SegmentedCancellation out;
    out.total_symbols = t;
    int k = 0;
    while (k < t) {
        const bool zero = std::abs(z_block[k]) <= kZeroPowerEps;
        int end = k + 1;
        while (end < t && (std::abs(z_block[end]) <= kZeroPowerEps) == zero) ++end;
        const int len = end - k;

        CancellationSegment seg;
        seg.start = k;
        seg.len = len;
        if (zero) {
            seg.kind = CancellationSegment::Kind::Passthrough;
            seg.output = r_block.segment(k, len);
        } else if (len == 1) {
            seg.kind = CancellationSegment::Kind::SingletonFlagged;
        } else {
            seg.kind = CancellationSegment::Kind::BkicRun;
            try {
                seg.pipeline =
                    factor_pipeline(build_q_generalized(z_block.segment(k, len)));
            } catch (const degenerate_block_error& e) {
                throw degenerate_block_error("run starting at symbol " +
                                             std::to_string(k) + ": " + e.what());
            }
            seg.output = reduce_block(*seg.pipeline, r_block.segment(k, len));
        }
        out.segments.push_back(std::move(seg));
        k = end;
    }
    return out;
}

ContinuousReduction reduce_block_continuous(const BkicPipeline& pipe,
                                            const CVec& r_prime, double delta_var) {
    if (delta_var < 0.0)
        throw std::invalid_argument("delta_var must be nonnegative");
    ContinuousReduction out;
    out.y = reduce_block(pipe, r_prime);
    out.extra_noise_var = (delta_var * pipe.s.array().square().inverse()).matrix();
    return out;
}

}  // namespace kic
