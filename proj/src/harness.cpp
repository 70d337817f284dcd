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

#include "kic/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "kic/baselines.hpp"
#include "kic/bkic.hpp"
#include "kic/rng.hpp"

namespace kic {

namespace {

constexpr std::uint64_t kTagSimPacket = 0x53494d;  // simulate-point packets
constexpr std::uint64_t kTagValidation = 0x56414c; // validation draws

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double sample_std_error(const std::vector<double>& v) {
    const auto n = static_cast<double>(v.size());
    if (v.size() < 2) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

double convert_rate(double bits, LogBase base) {
    return base == LogBase::Bits ? bits : bits * std::numbers::ln2;
}

ZMod parse_zmod(const std::string& name) {
    if (name == "psk4") return ZMod::Psk4;
    if (name == "psk8") return ZMod::Psk8;
    if (name == "gauss") return ZMod::Gauss;
    if (name == "qam16") return ZMod::Qam16;
    throw std::invalid_argument("unknown zmod '" + name +
                                "' (expected psk4, psk8, gauss or qam16)");
}

std::string zmod_name(ZMod mod) {
    switch (mod) {
    case ZMod::Psk4: return "psk4";
    case ZMod::Psk8: return "psk8";
    case ZMod::Gauss: return "gauss";
    case ZMod::Qam16: return "qam16";
    }
    return {};
}

InterferenceSpec zmod_spec(ZMod mod) {
    switch (mod) {
    case ZMod::Psk4: return InterferenceSpec::cpm_psk(4);
    case ZMod::Psk8: return InterferenceSpec::cpm_psk(8);
    case ZMod::Gauss: return InterferenceSpec::gaussian();
    case ZMod::Qam16: return InterferenceSpec::qam(16);
    }
    return {};
}

std::vector<Scheme> all_schemes() {
    return {Scheme::Naive,  Scheme::Cu,
            Scheme::Rt,     Scheme::Rbkic,
            Scheme::Rorth,  Scheme::McTraditionalSinr,
            Scheme::McBkicResidual};
}

std::string scheme_name(Scheme s) {
    switch (s) {
    case Scheme::Naive: return "naive";
    case Scheme::Cu: return "c_u";
    case Scheme::Rt: return "r_t";
    case Scheme::Rbkic: return "r_bkic";
    case Scheme::Rorth: return "r_orth";
    case Scheme::McTraditionalSinr: return "mc_traditional_sinr";
    case Scheme::McBkicResidual: return "mc_bkic_residual";
    }
    return {};
}

std::vector<Scheme> parse_schemes(const std::string& comma_list) {
    std::vector<Scheme> out;
    std::stringstream ss(comma_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        bool found = false;
        for (Scheme s : all_schemes()) {
            if (scheme_name(s) == item) {
                out.push_back(s);
                found = true;
                break;
            }
        }
        if (!found) throw std::invalid_argument("unknown scheme '" + item + "'");
    }
    if (out.empty()) throw std::invalid_argument("scheme list is empty");
    return out;
}

std::string format_g9(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

void write_csv(const Curve& curve, std::ostream& os) {
    for (const auto& c : curve.comments) os << "# " << c << "\n";
    for (std::size_t i = 0; i < curve.columns.size(); ++i)
        os << curve.columns[i] << (i + 1 < curve.columns.size() ? "," : "");
    os << "\n";
    for (const auto& row : curve.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << format_g9(row[i]) << (i + 1 < row.size() ? "," : "");
        os << "\n";
    }
}

Curve run_fig3(double sigma2, int block_len, LogBase base) {
    Curve curve;
    curve.columns = {"px_db", "r_t", "r_bkic", "c_u"};
    for (int db = 1; db <= 30; ++db) {
        ChannelParams params;
        params.p_x = db_to_linear(db);
        params.p_z = params.p_x;
        params.sigma2 = sigma2;
        params.block_len = block_len;
        params.packet_len = block_len;
        const RatePoint p = rate_point(params);
        curve.rows.push_back({double(db), convert_rate(p.r_t, base),
                              convert_rate(p.r_bkic, base), convert_rate(p.c_u, base)});
    }
    return curve;
}

Curve run_fig4(double p_x, double p_z, double sigma2, LogBase base) {
    Curve curve;
    curve.columns = {"block_len", "r_t", "r_bkic", "c_u"};
    for (int t : {10, 20, 50, 100, 200, 500, 1000}) {
        ChannelParams params;
        params.p_x = p_x;
        params.p_z = p_z;
        params.sigma2 = sigma2;
        params.block_len = t;
        params.packet_len = t;
        const RatePoint p = rate_point(params);
        curve.rows.push_back({double(t), convert_rate(p.r_t, base),
                              convert_rate(p.r_bkic, base), convert_rate(p.c_u, base)});
    }
    return curve;
}

namespace {

// Accumulates the unbiased-rescaled traditional-KIC error power against the
// known transmitted symbols. Returns per-block (signal, error) power pairs.
struct SinrAccumulator {
    std::vector<double> signal;
    std::vector<double> error;
    std::vector<double> analytic_error; // expected per-symbol error power

    void add_block(const BlockView& blk, const ChannelParams& params) {
        const auto rep = traditional_kic(blk.r, blk.z, params);
        const double ax = std::sqrt(params.p_x);
        const double total_z_power = blk.z.squaredNorm();
        double sig = 0.0, err = 0.0, ana = 0.0;
        int used = 0;
        for (Eigen::Index k = 0; k < blk.r.size(); ++k) {
            if (!rep.passthrough && !(total_z_power - std::norm(blk.z[k]) > 0.0))
                continue; // all interference power on this symbol: nothing recoverable
            const cplx w = ax * (rep.x_hat_rescaled[k] - blk.x[k]);
            sig += params.p_x * std::norm(blk.x[k]);
            err += std::norm(w);
            ana += rep.residual_power[k] + rep.noise_power[k];
            ++used;
        }
        if (used == 0) return;
        signal.push_back(sig);
        error.push_back(err);
        analytic_error.push_back(ana / used);
    }

    // Aggregate-ratio estimate with a delta-method standard error.
    McStat sinr_db() const {
        if (signal.size() < 2)
            throw std::invalid_argument("too few usable blocks for a SINR estimate");
        const auto n = static_cast<double>(signal.size());
        const double mean_sig = std::accumulate(signal.begin(), signal.end(), 0.0) / n;
        const double mean_err = std::accumulate(error.begin(), error.end(), 0.0) / n;
        const double ratio = mean_sig / mean_err;
        double ss = 0.0;
        for (std::size_t i = 0; i < signal.size(); ++i) {
            const double d = signal[i] - ratio * error[i];
            ss += d * d;
        }
        const double var_lin = ss / (n - 1.0) / n / (mean_err * mean_err);
        McStat stat;
        stat.trials = static_cast<long>(signal.size());
        stat.mean = 10.0 * std::log10(ratio);
        stat.std_error = 10.0 / std::numbers::ln10 * std::sqrt(var_lin) / ratio;
        return stat;
    }

    double analytic_sinr_db(const ChannelParams& params) const {
        const double mean_err =
            std::accumulate(analytic_error.begin(), analytic_error.end(), 0.0) /
            static_cast<double>(analytic_error.size());
        return 10.0 * std::log10(params.p_x / mean_err);
    }
};

// Residual of the blind reduction against the ideal effective-MIMO
// observation built from the known x and n. Uses the pre-equalized route
// for unit-modulus interference and the generalized matrix otherwise.
struct ResidualAccumulator {
    std::vector<double> power;

    void add_block(const BlockView& blk, const ChannelParams& params, bool cpm_route,
                   const BkicPipeline* plain_pipe) {
        const auto t = blk.r.size();
        CVec residual;
        if (cpm_route) {
            const auto pre = preequalize(blk.r, blk.z, params.p_x, params.p_z);
            const CVec y = reduce_block(*plain_pipe, pre.r_prime);
            const double az = std::sqrt(params.p_z);
            CVec ideal(t);
            for (Eigen::Index k = 0; k < t; ++k)
                ideal[k] = pre.scale_map[k] * blk.x[k] + blk.n[k] / (az * blk.z[k]);
            residual = y - plain_pipe->v1 * ideal;
        } else {
            const auto pipe = factor_pipeline(build_q_generalized(blk.z));
            const CVec y = reduce_block(pipe, blk.r);
            const CVec ideal = std::sqrt(params.p_x) * blk.x + blk.n;
            residual = y - pipe.v1 * ideal;
        }
        power.push_back(residual.squaredNorm() / static_cast<double>(t - 1));
    }

    McStat stat() const {
        McStat s;
        s.trials = static_cast<long>(power.size());
        s.mean = std::accumulate(power.begin(), power.end(), 0.0) /
                 static_cast<double>(power.size());
        s.std_error = sample_std_error(power);
        return s;
    }
};

}  // namespace

SimulationResult simulate_point(const ChannelParams& params, ZMod zmod,
                                const FadingSpec& fading, long trials,
                                std::uint64_t seed, const std::vector<Scheme>& schemes) {
    params.validate();
    if (trials < 1) throw std::invalid_argument("trials must be positive");

    SimulationResult result;
    result.analytic = rate_point(params);

    const bool want_sinr =
        std::find(schemes.begin(), schemes.end(), Scheme::McTraditionalSinr) != schemes.end();
    const bool want_residual =
        std::find(schemes.begin(), schemes.end(), Scheme::McBkicResidual) != schemes.end();
    if (!want_sinr && !want_residual) return result;
    if (params.block_len < 2)
        throw std::invalid_argument("Monte Carlo schemes require block_len >= 2");

    const bool cpm_route =
        (zmod == ZMod::Psk4 || zmod == ZMod::Psk8) && params.p_z > 0.0;
    BkicPipeline plain_pipe;
    if (want_residual && cpm_route) plain_pipe = factor_pipeline(build_q(params.block_len));

    SinrAccumulator sinr;
    ResidualAccumulator residual;
    long done = 0;
    std::uint64_t packet_index = 0;
    while (done < trials) {
        const auto packet =
            generate_packet(params, SignalSpec::gaussian(), zmod_spec(zmod), fading,
                            derive_seed(seed, kTagSimPacket, packet_index++));
        for (const auto& blk : split_blocks(packet, params.block_len)) {
            if (done >= trials) break;
            if (want_sinr) sinr.add_block(blk, params);
            if (want_residual)
                residual.add_block(blk, params, cpm_route, cpm_route ? &plain_pipe : nullptr);
            ++done;
        }
    }

    if (want_sinr) result.traditional_sinr_db = sinr.sinr_db();
    if (want_residual) result.bkic_residual = residual.stat();
    return result;
}

Curve simulation_curve(const ChannelParams& params, const SimulationResult& result,
                       const std::vector<Scheme>& schemes, LogBase base) {
    Curve curve;
    curve.columns = {"px_db", "pz_db"};
    std::vector<double> row = {10.0 * std::log10(params.p_x),
                               params.p_z > 0.0
                                   ? 10.0 * std::log10(params.p_z)
                                   : -std::numeric_limits<double>::infinity()};
    const RatePoint& a = result.analytic;
    for (Scheme s : schemes) {
        switch (s) {
        case Scheme::Naive:
            curve.columns.push_back("naive");
            row.push_back(convert_rate(a.r_naive, base));
            break;
        case Scheme::Cu:
            curve.columns.push_back("c_u");
            row.push_back(convert_rate(a.c_u, base));
            break;
        case Scheme::Rt:
            curve.columns.push_back("r_t");
            row.push_back(convert_rate(a.r_t, base));
            break;
        case Scheme::Rbkic:
            curve.columns.push_back("r_bkic");
            row.push_back(convert_rate(a.r_bkic, base));
            break;
        case Scheme::Rorth:
            curve.columns.push_back("r_orth");
            row.push_back(convert_rate(a.r_orth, base));
            break;
        case Scheme::McTraditionalSinr: {
            const auto& st = result.traditional_sinr_db.value();
            curve.columns.insert(curve.columns.end(),
                                 {"mc_traditional_sinr_db_mean",
                                  "mc_traditional_sinr_db_stderr",
                                  "mc_traditional_sinr_trials"});
            row.insert(row.end(), {st.mean, st.std_error, double(st.trials)});
            break;
        }
        case Scheme::McBkicResidual: {
            const auto& st = result.bkic_residual.value();
            curve.columns.insert(curve.columns.end(),
                                 {"mc_bkic_residual_mean", "mc_bkic_residual_stderr",
                                  "mc_bkic_residual_trials"});
            row.insert(row.end(), {st.mean, st.std_error, double(st.trials)});
            break;
        }
        }
    }
    curve.rows.push_back(std::move(row));
    return curve;
}

// ---------------------------------------------------------------------------
// validation suites
// ---------------------------------------------------------------------------

std::vector<ValidationSuite> all_suites() {
    return {ValidationSuite::HInvariance,  ValidationSuite::ZfEquivalence,
            ValidationSuite::SinrMatch,    ValidationSuite::Jensen,
            ValidationSuite::MimoIdentity, ValidationSuite::ContinuousFadingCov};
}

std::string suite_name(ValidationSuite s) {
    switch (s) {
    case ValidationSuite::HInvariance: return "h_invariance";
    case ValidationSuite::ZfEquivalence: return "zf_equivalence";
    case ValidationSuite::SinrMatch: return "sinr_match";
    case ValidationSuite::Jensen: return "jensen";
    case ValidationSuite::MimoIdentity: return "mimo_identity";
    case ValidationSuite::ContinuousFadingCov: return "continuous_fading_cov";
    }
    return {};
}

std::vector<ValidationSuite> parse_suites(const std::string& comma_list) {
    std::vector<ValidationSuite> out;
    std::stringstream ss(comma_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        bool found = false;
        for (ValidationSuite s : all_suites()) {
            if (suite_name(s) == item) {
                out.push_back(s);
                found = true;
                break;
            }
        }
        if (!found) throw std::invalid_argument("unknown validation suite '" + item + "'");
    }
    if (out.empty()) throw std::invalid_argument("validation suite list is empty");
    return out;
}

namespace {

ValidationCheck check_h_invariance(const ChannelParams& params, long trials,
                                   std::uint64_t seed) {
    const int t = params.block_len;
    const auto pipe = factor_pipeline(build_q(t));
    Rng rng(derive_seed(seed, kTagValidation, 1));

    CVec x_prime(t), n_prime(t);
    for (int k = 0; k < t; ++k) {
        x_prime[k] = rng.cgaussian(1.0);
        n_prime[k] = rng.cgaussian(params.sigma2);
    }
    const CVec fixed = x_prime + n_prime;

    CVec reference;
    double spread = 0.0;
    for (long i = 0; i < std::max<long>(trials, 2); ++i) {
        const cplx h = rng.cgaussian(1.0);
        const CVec y = reduce_block(pipe, fixed + h * CVec::Ones(t));
        if (i == 0)
            reference = y;
        else
            spread = std::max(spread, (y - reference).cwiseAbs().maxCoeff());
    }
    return {"h_invariance", spread, 1e-10, spread < 1e-10};
}

ValidationCheck check_zf_equivalence(long trials, std::uint64_t seed) {
    Rng rng(derive_seed(seed, kTagValidation, 2));
    double worst = 0.0;
    for (int t : {2, 5, 100}) {
        const auto sys = build_q1(t);
        for (long i = 0; i < trials; ++i) {
            CVec r_prime(t);
            for (int k = 0; k < t; ++k) r_prime[k] = rng.cgaussian(2.0);
            worst = std::max(worst, assert_equivalence(sys, r_prime).max_deviation);
        }
    }
    return {"zf_equivalence", worst, 1e-10, worst < 1e-10};
}

ValidationCheck check_sinr_match(const ChannelParams& params, ZMod zmod, long trials,
                                 std::uint64_t seed) {
    SinrAccumulator acc;
    long done = 0;
    std::uint64_t packet_index = 0;
    while (done < trials) {
        const auto packet =
            generate_packet(params, SignalSpec::gaussian(), zmod_spec(zmod),
                            FadingSpec::block(),
                            derive_seed(seed, kTagValidation, 3, packet_index++));
        for (const auto& blk : split_blocks(packet, params.block_len)) {
            if (done >= trials) break;
            acc.add_block(blk, params);
            ++done;
        }
    }
    const double deviation_db =
        std::abs(acc.sinr_db().mean - acc.analytic_sinr_db(params));
    return {"sinr_match", deviation_db, 0.2, deviation_db < 0.2};
}

ValidationCheck check_jensen(const ChannelParams& params, long trials,
                             std::uint64_t seed) {
    Rng rng(derive_seed(seed, kTagValidation, 4));
    const int nblocks = 32;
    const double t = params.block_len;
    const double c_u = rate_upper_bound(params).value;

    // uniform profile must reproduce the bound
    std::vector<double> powers(nblocks, t);
    double metric = std::abs(bound_blockwise(params, powers) - c_u);

    for (long i = 0; i < trials; ++i) {
        double sum = 0.0;
        for (auto& w : powers) {
            w = -std::log(rng.uniform_pos());
            sum += w;
        }
        for (auto& w : powers) w *= t * nblocks / sum;
        const double bound = bound_blockwise(params, powers);
        metric = std::max(metric, c_u - bound); // negative when Jensen holds
    }
    return {"jensen", metric, 1e-9, metric < 1e-9};
}

ValidationCheck check_mimo_identity(std::uint64_t /*seed*/) {
    double worst = 0.0;
    for (int t : {2, 5, 10, 100}) {
        const auto pipe = factor_pipeline(build_q(t));
        for (double gamma : {0.1, 1.0, 10.0, 100.0}) {
            const double lhs = mimo_rate_bits(pipe, gamma);
            const double rhs = (t - 1) * std::log2(1.0 + gamma);
            worst = std::max(worst, std::abs(lhs - rhs) / rhs);
        }
    }
    return {"mimo_identity", worst, 1e-9, worst < 1e-9};
}

ValidationCheck check_continuous_fading_cov(const ChannelParams& params, double delta_var,
                                            long trials, std::uint64_t seed) {
    const int t = params.block_len;
    const double dv = delta_var > 0.0 ? delta_var : 0.01;
    const auto pipe = factor_pipeline(build_q(t));
    Rng rng(derive_seed(seed, kTagValidation, 5));

    Eigen::VectorXd emp = Eigen::VectorXd::Zero(t - 1);
    for (long i = 0; i < trials; ++i) {
        CVec h(t);
        h[0] = rng.cgaussian(1.0);
        for (int k = 1; k < t; ++k) h[k] = h[k - 1] + rng.cgaussian(dv);
        const auto red = reduce_block_continuous(pipe, h, dv);
        emp += red.y.cwiseAbs2();
    }
    emp /= static_cast<double>(trials);

    const Eigen::VectorXd analytic =
        reduce_block_continuous(pipe, CVec::Zero(t), dv).extra_noise_var;
    const double worst = ((emp - analytic).cwiseQuotient(analytic)).cwiseAbs().maxCoeff();
    return {"continuous_fading_cov", worst, 0.05, worst < 0.05};
}

}  // namespace

std::vector<ValidationCheck> run_validation(const std::vector<ValidationSuite>& suites,
                                            const ChannelParams& params, ZMod zmod,
                                            double delta_var, long trials,
                                            std::uint64_t seed) {
    params.validate();
    if (suites.empty()) throw std::invalid_argument("validation suite list is empty");
    if (trials < 2) throw std::invalid_argument("validation needs at least 2 trials");

    std::vector<ValidationCheck> checks;
    for (ValidationSuite s : suites) {
        switch (s) {
        case ValidationSuite::HInvariance:
            checks.push_back(check_h_invariance(params, trials, seed));
            break;
        case ValidationSuite::ZfEquivalence:
            checks.push_back(check_zf_equivalence(trials, seed));
            break;
        case ValidationSuite::SinrMatch:
            checks.push_back(check_sinr_match(params, zmod, trials, seed));
            break;
        case ValidationSuite::Jensen:
            checks.push_back(check_jensen(params, trials, seed));
            break;
        case ValidationSuite::MimoIdentity:
            checks.push_back(check_mimo_identity(seed));
            break;
        case ValidationSuite::ContinuousFadingCov:
            checks.push_back(check_continuous_fading_cov(params, delta_var, trials, seed));
            break;
        }
    }
    return checks;
}

void write_validation_report(const std::vector<ValidationCheck>& checks,
                             const std::vector<std::string>& comments, std::ostream& os) {
    for (const auto& c : comments) os << "# " << c << "\n";
    os << "check,metric,threshold,pass\n";
    for (const auto& c : checks)
        os << c.name << "," << format_g9(c.metric) << "," << format_g9(c.threshold) << ","
           << (c.pass ? 1 : 0) << "\n";
}

int validation_exit_code(const std::vector<ValidationCheck>& checks) {
    for (const auto& c : checks)
        if (!c.pass) return 1;
    return 0;
}

// ---------------------------------------------------------------------------
// command line
// ---------------------------------------------------------------------------

namespace {

struct CliOptions {
    double px_db = 20.0;
    double pz_db = 20.0;
    bool pz_db_given = false;
    double sigma2 = 1.0;
    int block_len = 100;
    int packet_len = 10000;
    long trials = 10000;
    std::uint64_t seed = 1;
    std::string zmod = "psk4";
    std::string fading = "block";
    double delta_var = 0.0;
    std::string out;
    std::string log_base = "2";
    std::string config_file;
    std::string schemes =
        "naive,c_u,r_t,r_bkic,r_orth,mc_traditional_sinr,mc_bkic_residual";
    std::string suites =
        "h_invariance,zf_equivalence,sinr_match,jensen,mimo_identity,"
        "continuous_fading_cov";
};

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    std::istringstream in(text);
    T value{};
    in >> value;
    if (in.fail() || !in.eof())
        throw std::invalid_argument("config key '" + key + "' has invalid value '" +
                                    text + "'");
    return value;
}

// Applies a flat key=value config file. Keys mirror the long flag names;
// a value is used only when the matching flag was not given on the command
// line, so explicit flags always win. Keys that do not belong to the active
// subcommand are accepted but ignored, unknown keys are rejected.
void apply_config_file(CLI::App* sub, CliOptions& opt) {
    std::ifstream in(opt.config_file);
    if (!in) throw std::invalid_argument("cannot read config file '" + opt.config_file + "'");

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r");
        line = line.substr(start, end - start + 1);
        if (line.empty() || line[0] == '#') continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        " is not key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);

        const bool flag_given = sub->get_option_no_throw("--" + key) != nullptr &&
                                sub->count("--" + key) > 0;
        if (flag_given) continue;
        const bool relevant = sub->get_option_no_throw("--" + key) != nullptr;

        if (key == "px-db") {
            if (relevant) opt.px_db = parse_number<double>(key, value);
        } else if (key == "pz-db") {
            if (relevant) {
                opt.pz_db = parse_number<double>(key, value);
                opt.pz_db_given = true;
            }
        } else if (key == "sigma2") {
            if (relevant) opt.sigma2 = parse_number<double>(key, value);
        } else if (key == "block-len") {
            if (relevant) opt.block_len = parse_number<int>(key, value);
        } else if (key == "packet-len") {
            if (relevant) opt.packet_len = parse_number<int>(key, value);
        } else if (key == "trials") {
            if (relevant) opt.trials = parse_number<long>(key, value);
        } else if (key == "seed") {
            if (relevant) opt.seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "zmod") {
            if (relevant) opt.zmod = value;
        } else if (key == "fading") {
            if (relevant) opt.fading = value;
        } else if (key == "delta-var") {
            if (relevant) opt.delta_var = parse_number<double>(key, value);
        } else if (key == "out") {
            if (relevant) opt.out = value;
        } else if (key == "log-base") {
            if (relevant) opt.log_base = value;
        } else if (key == "schemes") {
            if (relevant) opt.schemes = value;
        } else if (key == "suite") {
            if (relevant) opt.suites = value;
        } else {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
    }
}

// Every subcommand accepts the same flat key=value config file; explicit
// command-line flags win over file values.
void add_common_options(CLI::App* cmd, CliOptions& opt, bool with_powers,
                        bool with_packet, bool with_mc) {
    cmd->add_option("--config", opt.config_file, "flat key=value config file");
    if (with_powers) {
        cmd->add_option("--px-db", opt.px_db, "signal power in dB over sigma2 reference");
        cmd->add_option("--pz-db", opt.pz_db,
                        "interference power in dB (defaults to --px-db)");
    }
    cmd->add_option("--sigma2", opt.sigma2, "complex noise variance");
    cmd->add_option("--block-len", opt.block_len, "fading block length T");
    if (with_packet)
        cmd->add_option("--packet-len", opt.packet_len, "packet length N (multiple of T)");
    if (with_mc) {
        cmd->add_option("--trials", opt.trials, "Monte Carlo blocks per point");
        cmd->add_option("--zmod", opt.zmod, "interference modulation: psk4 psk8 gauss qam16");
        cmd->add_option("--fading", opt.fading, "fading model: block or continuous");
        cmd->add_option("--delta-var", opt.delta_var,
                        "per-symbol gain increment variance (continuous fading)");
    }
    cmd->add_option("--seed", opt.seed, "master seed");
    cmd->add_option("--out", opt.out, "output path (default: stdout)");
    cmd->add_option("--log-base", opt.log_base, "rate unit: 2 for bits, e for nats");
}

LogBase parse_log_base(const std::string& s) {
    if (s == "2") return LogBase::Bits;
    if (s == "e") return LogBase::Nats;
    throw std::invalid_argument("log-base must be 2 or e");
}

FadingSpec parse_fading(const std::string& mode, double delta_var) {
    if (mode == "block") return FadingSpec::block();
    if (mode == "continuous") {
        if (delta_var < 0.0) throw std::invalid_argument("delta-var must be nonnegative");
        return FadingSpec::continuous(delta_var);
    }
    throw std::invalid_argument("fading must be block or continuous");
}

ChannelParams params_from(const CliOptions& opt) {
    ChannelParams params;
    params.p_x = db_to_linear(opt.px_db);
    params.p_z = db_to_linear(opt.pz_db_given ? opt.pz_db : opt.px_db);
    params.sigma2 = opt.sigma2;
    params.block_len = opt.block_len;
    params.packet_len = opt.packet_len;
    params.validate();
    return params;
}

std::vector<std::string> resolved_config(const std::string& command, const CliOptions& opt,
                                         bool with_powers, bool with_packet, bool with_mc) {
    std::vector<std::string> lines;
    lines.push_back("command=" + command);
    if (with_powers) {
        lines.push_back("px-db=" + format_g9(opt.px_db));
        lines.push_back("pz-db=" +
                        format_g9(opt.pz_db_given ? opt.pz_db : opt.px_db));
    }
    lines.push_back("sigma2=" + format_g9(opt.sigma2));
    lines.push_back("block-len=" + std::to_string(opt.block_len));
    if (with_packet) lines.push_back("packet-len=" + std::to_string(opt.packet_len));
    if (with_mc) {
        lines.push_back("trials=" + std::to_string(opt.trials));
        lines.push_back("zmod=" + opt.zmod);
        lines.push_back("fading=" + opt.fading);
        lines.push_back("delta-var=" + format_g9(opt.delta_var));
    }
    lines.push_back("seed=" + std::to_string(opt.seed));
    lines.push_back("log-base=" + opt.log_base);
    return lines;
}

// Writes through to the chosen sink; throws on file errors.
void emit(const std::string& out_path, const std::function<void(std::ostream&)>& writer) {
    if (out_path.empty()) {
        writer(std::cout);
        return;
    }
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file '" + out_path + "'");
    writer(file);
    if (!file) throw std::runtime_error("failed writing output file '" + out_path + "'");
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"known-interference channel: blind cancellation, baselines and rate bounds"};
    app.require_subcommand(1);

    CliOptions opt;

    auto* rates_cmd = app.add_subcommand("rates", "print the analytic rates for one point");
    add_common_options(rates_cmd, opt, true, false, false);

    auto* fig3_cmd = app.add_subcommand(
        "fig3", "rate sweep over signal power, 1..30 dB, interference tracking signal");
    add_common_options(fig3_cmd, opt, false, false, false);

    auto* fig4_cmd =
        app.add_subcommand("fig4", "rate sweep over block length at fixed powers");
    add_common_options(fig4_cmd, opt, true, false, false);
    fig4_cmd->get_option("--block-len")->description("ignored: the sweep sets T");

    auto* sim_cmd =
        app.add_subcommand("simulate", "single-point Monte Carlo with full parameter control");
    add_common_options(sim_cmd, opt, true, true, true);
    sim_cmd->add_option("--schemes", opt.schemes, "comma list of schemes to evaluate");

    auto* val_cmd = app.add_subcommand("validate", "run consistency and equivalence checks");
    add_common_options(val_cmd, opt, true, true, true);
    val_cmd->add_option("--suite", opt.suites, "comma list of checks to run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        CLI::App* sub = nullptr;
        for (CLI::App* c : {rates_cmd, fig3_cmd, fig4_cmd, sim_cmd, val_cmd})
            if (c->parsed()) sub = c;
        opt.pz_db_given = (sub != fig3_cmd) && sub->count("--pz-db") > 0;
        if (!opt.config_file.empty()) apply_config_file(sub, opt);
        const LogBase base = parse_log_base(opt.log_base);

        if (rates_cmd->parsed()) {
            CliOptions o = opt;
            o.packet_len = o.block_len;
            const ChannelParams params = params_from(o);
            const RatePoint p = rate_point(params);
            emit(opt.out, [&](std::ostream& os) {
                for (const auto& line : resolved_config("rates", opt, true, false, false))
                    os << "# " << line << "\n";
                os << "gamma=" << format_g9(p.gamma) << "\n";
                os << "rho=" << format_g9(p.rho) << "\n";
                os << "r_naive=" << format_g9(convert_rate(p.r_naive, base)) << "\n";
                os << "c_u=" << format_g9(convert_rate(p.c_u, base)) << "\n";
                os << "r_t=" << format_g9(convert_rate(p.r_t, base)) << "\n";
                os << "r_bkic=" << format_g9(convert_rate(p.r_bkic, base)) << "\n";
                os << "r_orth=" << format_g9(convert_rate(p.r_orth, base)) << "\n";
                os << "gap=" << format_g9(convert_rate(p.gap, base)) << "\n";
            });
            return 0;
        }

        if (fig3_cmd->parsed()) {
            Curve curve = run_fig3(opt.sigma2, opt.block_len, base);
            curve.comments = resolved_config("fig3", opt, false, false, false);
            curve.comments.insert(curve.comments.begin() + 1,
                                  "pz-db tracks px-db pointwise");
            emit(opt.out, [&](std::ostream& os) { write_csv(curve, os); });
            return 0;
        }

        if (fig4_cmd->parsed()) {
            const double p_x = db_to_linear(opt.px_db);
            const double p_z = db_to_linear(opt.pz_db_given ? opt.pz_db : opt.px_db);
            Curve curve = run_fig4(p_x, p_z, opt.sigma2, base);
            curve.comments = resolved_config("fig4", opt, true, false, false);
            emit(opt.out, [&](std::ostream& os) { write_csv(curve, os); });
            return 0;
        }

        if (sim_cmd->parsed()) {
            const ChannelParams params = params_from(opt);
            const auto schemes = parse_schemes(opt.schemes);
            const auto fading = parse_fading(opt.fading, opt.delta_var);
            const auto result = simulate_point(params, parse_zmod(opt.zmod), fading,
                                               opt.trials, opt.seed, schemes);
            Curve curve = simulation_curve(params, result, schemes, base);
            curve.comments = resolved_config("simulate", opt, true, true, true);
            curve.comments.push_back("schemes=" + opt.schemes);
            emit(opt.out, [&](std::ostream& os) { write_csv(curve, os); });
            return 0;
        }

        // validate
        const ChannelParams params = params_from(opt);
        const auto suites = parse_suites(opt.suites);
        const auto checks = run_validation(suites, params, parse_zmod(opt.zmod),
                                           opt.delta_var, opt.trials, opt.seed);
        auto comments = resolved_config("validate", opt, true, true, true);
        comments.push_back("suite=" + opt.suites);
        emit(opt.out, [&](std::ostream& os) { write_validation_report(checks, comments, os); });
        if (!opt.out.empty()) write_validation_report(checks, comments, std::cout);
        return validation_exit_code(checks);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cli_main(const std::vector<std::string>& args) {
    std::vector<std::string> full = {"kicsim"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const auto& s : full) argv.push_back(s.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace kic
