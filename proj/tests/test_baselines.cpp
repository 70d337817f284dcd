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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kic/baselines.hpp"
#include "kic/rates.hpp"
#include "kic/rng.hpp"

using namespace kic;

namespace {

ChannelParams make_params(double p_x, double p_z, double sigma2, int t) {
    ChannelParams p;
    p.p_x = p_x;
    p.p_z = p_z;
    p.sigma2 = sigma2;
    p.block_len = t;
    p.packet_len = t;
    return p;
}

CVec random_cvec(int n, double var, Rng& rng) {
    CVec v(n);
    for (int k = 0; k < n; ++k) v[k] = rng.cgaussian(var);
    return v;
}

// Monte Carlo SINR of the least-squares canceller against the analytic
// per-symbol error power implied by the realized interference.
struct SinrProbe {
    double signal = 0.0;
    double error = 0.0;
    double analytic_error = 0.0;
    long symbols = 0;

    void add(const ChannelParams& params, const CVec& z, long blocks, Rng& rng) {
        const int t = params.block_len;
        const double ax = std::sqrt(params.p_x);
        const double az = std::sqrt(params.p_z);
        const double total_z_power = z.squaredNorm();
        for (long b = 0; b < blocks; ++b) {
            const CVec x = random_cvec(t, 1.0, rng);
            const cplx h = rng.cgaussian(1.0);
            const CVec n = random_cvec(t, params.sigma2, rng);
            const CVec r = ax * x + az * h * z + n;
            const auto rep = traditional_kic(r, z, params);
            for (int k = 0; k < t; ++k) {
                const double others = total_z_power - std::norm(z[k]);
                if (!(others > 0.0)) continue;
                signal += params.p_x * std::norm(x[k]);
                error += std::norm(ax * (rep.x_hat_rescaled[k] - x[k]));
                analytic_error += rep.residual_power[k] + rep.noise_power[k];
                ++symbols;
            }
        }
    }

    double empirical_db() const { return 10.0 * std::log10(signal / error); }
    double analytic_db(const ChannelParams& params) const {
        return 10.0 * std::log10(params.p_x / (analytic_error / double(symbols)));
    }
};

}  // namespace

TEST_CASE("augmented matrix and its closed-form inverse") {
    for (int t : {2, 5, 7}) {
        const auto sys = build_q1(t);

        // entrywise closed form: column j < T holds (T-1-j)/T on rows up to
        // j and -(j+1)/T below (zero-based); the last column is all ones
        for (int i = 0; i < t; ++i) {
            for (int j = 0; j + 1 < t; ++j) {
                const double expected = (i <= j) ? double(t - 1 - j) / t : -double(j + 1) / t;
                CHECK(std::abs(sys.q1_inv(i, j) - cplx(expected, 0)) < 1e-15);
            }
            CHECK(std::abs(sys.q1_inv(i, t - 1) - cplx(1, 0)) < 1e-15);
        }

        const CMat prod = sys.q1 * sys.q1_inv;
        CHECK((prod - CMat::Identity(t, t)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("least-squares canceller") {
    SUBCASE("unit-modulus interference gives the flat SINR 49.5") {
        // (T-1) p_x / (p_x + T sigma2) at T=100, p_x=100, sigma2=1
        const auto params = make_params(100, 100, 1, 100);
        Rng rng(1);
        CVec z(100);
        const auto qpsk = psk_constellation(4);
        for (int k = 0; k < 100; ++k) z[k] = qpsk[rng.index(4)];
        const auto rep = traditional_kic(random_cvec(100, 1.0, rng), z, params);
        for (int k = 0; k < 100; ++k)
            CHECK(rep.sinr[k] == doctest::Approx(49.5).epsilon(1e-12));
    }

    SUBCASE("noiseless estimation with silent target is exact") {
        const auto params = make_params(1, 2, 1, 16);
        Rng rng(2);
        CVec z(16);
        const auto psk = psk_constellation(8);
        for (int k = 0; k < 16; ++k) z[k] = psk[rng.index(8)];
        const cplx h = rng.cgaussian(1.0);
        const CVec r = std::sqrt(params.p_z) * h * z; // x = 0, n = 0
        const auto rep = traditional_kic(r, z, params);
        CHECK(std::abs(rep.h_hat - h) < 1e-12);
        CHECK(rep.x_hat.cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("all-zero interference passes through") {
        const auto params = make_params(4, 1, 1, 8);
        Rng rng(3);
        const CVec x = random_cvec(8, 1.0, rng);
        const CVec r = 2.0 * x; // sqrt(p_x) x, no noise
        const auto rep = traditional_kic(r, CVec::Zero(8), params);
        CHECK(rep.passthrough);
        CHECK((rep.x_hat - x).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(rep.sinr[0] == doctest::Approx(4.0));
    }

    SUBCASE("Monte Carlo SINR matches the formula for unit-modulus z") {
        const auto params = make_params(100, 100, 1, 100);
        Rng rng(4);
        CVec z(100);
        const auto qpsk = psk_constellation(4);
        for (int k = 0; k < 100; ++k) z[k] = qpsk[rng.index(4)];
        SinrProbe probe;
        probe.add(params, z, 100000, rng);
        CHECK(std::abs(probe.empirical_db() - probe.analytic_db(params)) < 0.2);
        CHECK(probe.analytic_db(params) == doctest::Approx(10.0 * std::log10(49.5)));
    }

    SUBCASE("Monte Carlo SINR matches the formula for Gaussian z") {
        const auto params = make_params(50, 20, 1, 16);
        Rng rng(5);
        SinrProbe probe;
        for (int rep = 0; rep < 40; ++rep) {
            const CVec z = random_cvec(16, 1.0, rng);
            probe.add(params, z, 1000, rng);
        }
        CHECK(std::abs(probe.empirical_db() - probe.analytic_db(params)) < 0.2);
    }

    SUBCASE("Monte Carlo SINR matches the formula with one dominant symbol") {
        const int t = 10;
        const auto params = make_params(20, 10, 1, t);
        CVec z(t);
        z.setConstant(std::sqrt(0.4 * t / (t - 1)));
        z[0] = std::sqrt(0.6 * t); // 60% of the block power on one symbol
        Rng rng(6);
        SinrProbe probe;
        probe.add(params, z, 60000, rng);
        CHECK(std::abs(probe.empirical_db() - probe.analytic_db(params)) < 0.2);
    }
}

TEST_CASE("zero-forcing recovery through the augmented inverse") {
    Rng rng(7);

    SUBCASE("constant blocks are annihilated") {
        const auto sys = build_q1(9);
        const cplx c(0.8, -1.1);
        const auto rec = bkic_zf(sys, c * CVec::Ones(9));
        CHECK(rec.x_hat.cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("zero-mean blocks come back exactly") {
        const auto sys = build_q1(8);
        CVec block = random_cvec(8, 1.0, rng);
        block.array() -= block.mean();
        const auto rec = bkic_zf(sys, block);
        CHECK((rec.x_hat - block).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("general blocks lose exactly their mean") {
        for (int t : {2, 5, 33}) {
            const auto sys = build_q1(t);
            const CVec block = random_cvec(t, 2.0, rng);
            const auto rec = bkic_zf(sys, block);
            const CVec expected = block.array() - block.mean();
            CHECK((rec.x_hat - expected).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("the least-squares canceller and zero forcing are the same map") {
    Rng rng(8);

    SUBCASE("randomized blocks at T in {2, 5, 100}") {
        for (int t : {2, 5, 100}) {
            const auto sys = build_q1(t);
            double worst = 0.0;
            for (int i = 0; i < 1000; ++i) {
                const auto chk = assert_equivalence(sys, random_cvec(t, 2.0, rng));
                CHECK(chk.equivalent);
                worst = std::max(worst, chk.max_deviation);
            }
            CHECK(worst < 1e-10);
        }
    }

    SUBCASE("huge-magnitude blocks stay equivalent relative to their scale") {
        const auto sys = build_q1(16);
        const CVec block = 1e8 * random_cvec(16, 1.0, rng);
        const auto chk = assert_equivalence(sys, block);
        CHECK(chk.equivalent);
        CHECK(chk.max_deviation < 1e-10 * block.cwiseAbs().maxCoeff());
    }

    SUBCASE("T = 2 hand algebra") {
        const auto sys = build_q1(2);
        const cplx s1(0.4, 0.3), s2(-1.2, 0.9); // x' + n' samples
        CVec block(2);
        block << s1, s2;
        const auto rec = bkic_zf(sys, block);
        CHECK(std::abs(rec.x_hat[0] - (s1 - s2) / 2.0) < 1e-14);
        CHECK(std::abs(rec.x_hat[1] - (s2 - s1) / 2.0) < 1e-14);
        CHECK(assert_equivalence(sys, block).equivalent);
    }
}

TEST_CASE("orthogonal-training canceller") {
    Rng rng(9);
    const auto psk = psk_constellation(8);

    SUBCASE("noiseless blocks give the exact gain and clean data symbols") {
        const auto params = make_params(4, 2, 1, 8);
        CVec z(8), x(8);
        for (int k = 0; k < 8; ++k) {
            z[k] = psk[rng.index(8)];
            x[k] = rng.cgaussian(1.0);
        }
        x[7] = 0.0; // pilot slot left empty by the transmitter
        const cplx h = rng.cgaussian(1.0);
        const CVec r = 2.0 * x + std::sqrt(2.0) * h * z;
        const auto rep = orthogonal_training_kic(r, z, params);
        CHECK(std::abs(rep.h_hat - h) < 1e-12);
        for (int k = 0; k < 7; ++k) CHECK(std::abs(rep.x_hat[k] - x[k]) < 1e-12);
    }

    SUBCASE("estimation error adds one noise quantum per data symbol") {
        // residual -z[k] n[pilot] / z[pilot] has power sigma2 for unit-|z|
        const auto params = make_params(4, 2, 0.8, 8);
        const double ax = std::sqrt(params.p_x), az = std::sqrt(params.p_z);
        double acc = 0.0;
        long count = 0;
        for (int b = 0; b < 20000; ++b) {
            CVec z(8), x(8);
            for (int k = 0; k < 8; ++k) {
                z[k] = psk[rng.index(8)];
                x[k] = rng.cgaussian(1.0);
            }
            x[7] = 0.0;
            const cplx h = rng.cgaussian(1.0);
            const CVec n = random_cvec(8, params.sigma2, rng);
            const CVec r = ax * x + az * h * z + n;
            const auto rep = orthogonal_training_kic(r, z, params);
            for (int k = 0; k < 7; ++k) {
                acc += std::norm(ax * rep.x_hat[k] - ax * x[k] - n[k]);
                ++count;
                CHECK(rep.delta[k] == doctest::Approx(params.sigma2));
            }
        }
        CHECK(acc / double(count) == doctest::Approx(params.sigma2).epsilon(0.03));
    }

    SUBCASE("its rate sits strictly below the blind-cancellation rate") {
        const auto params = make_params(10, 5, 1, 12);
        for (int trial = 0; trial < 50; ++trial) {
            CVec z(12), x = CVec::Zero(12);
            for (int k = 0; k < 12; ++k) z[k] = psk[rng.index(8)];
            const cplx h = rng.cgaussian(1.0);
            const CVec r = std::sqrt(params.p_z) * h * z + random_cvec(12, 1.0, rng);
            const auto rep = orthogonal_training_kic(r, z, params);
            CHECK(rep.rate_bits < rate_bkic(params.gamma(), params.block_len));
        }
    }

    SUBCASE("a dead training symbol is rejected") {
        const auto params = make_params(1, 1, 1, 4);
        CVec z = CVec::Ones(4);
        z[3] = 1e-9;
        CHECK_THROWS_AS(orthogonal_training_kic(CVec::Ones(4), z, params),
                        std::invalid_argument);
    }
}

TEST_CASE("equal interference power per symbol is the worst case") {
    // Over blocks with the same total interference power, the mean of
    // log2(1 + SINR_k) evaluated through the analytic formula is smallest
    // for the flat profile.
    const int t = 8;
    const auto params = make_params(5, 3, 1, t);
    const double flat =
        std::log2(1.0 + (t - 1.0) * params.p_x / (params.p_x + t * params.sigma2));

    Rng rng(10);
    for (int trial = 0; trial < 1000; ++trial) {
        Eigen::VectorXd power(t);
        double sum = 0.0;
        for (int k = 0; k < t; ++k) {
            power[k] = -std::log(rng.uniform_pos());
            sum += power[k];
        }
        power *= t / sum;

        CVec z(t);
        for (int k = 0; k < t; ++k) z[k] = std::sqrt(power[k]);
        const auto rep = traditional_kic(CVec::Zero(t), z, params);

        double mean_rate = 0.0;
        for (int k = 0; k < t; ++k) mean_rate += std::log2(1.0 + rep.sinr[k]);
        mean_rate /= t;
        CHECK(mean_rate >= flat - 1e-12);
    }
}
