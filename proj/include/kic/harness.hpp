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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kic/channel.hpp"
#include "kic/rates.hpp"

namespace kic {

/// Rates are computed in bits; Nats multiplies outputs by ln 2.
enum class LogBase { Bits, Nats };

double convert_rate(double bits, LogBase base);

/// Interference modulation choices exposed on the command line.
enum class ZMod { Psk4, Psk8, Gauss, Qam16 };

ZMod parse_zmod(const std::string& name);
std::string zmod_name(ZMod mod);
InterferenceSpec zmod_spec(ZMod mod);

/// Quantities a simulation point can evaluate. The first five are analytic
/// and trial-independent; the mc_ entries are Monte Carlo estimates.
enum class Scheme {
    Naive,
    Cu,
    Rt,
    Rbkic,
    Rorth,
    McTraditionalSinr,
    McBkicResidual,
};

std::vector<Scheme> parse_schemes(const std::string& comma_list);
std::string scheme_name(Scheme s);
std::vector<Scheme> all_schemes();

/// Numeric table plus header comments, written as CSV with 9 significant
/// digits per value.
struct Curve {
    std::vector<std::string> comments; ///< emitted as '# ' lines
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string format_g9(double value);
void write_csv(const Curve& curve, std::ostream& os);

/// Rate sweep over signal power, 1..30 dB in 1 dB steps, with the
/// interference power tracking the signal power and the columns
/// (px_db, r_t, r_bkic, c_u).
Curve run_fig3(double sigma2, int block_len, LogBase base);

/// Rate sweep over block length T in {10, 20, 50, 100, 200, 500, 1000} at
/// fixed powers, columns (block_len, r_t, r_bkic, c_u).
Curve run_fig4(double p_x, double p_z, double sigma2, LogBase base);

struct McStat {
    double mean = 0.0;
    double std_error = 0.0;
    long trials = 0;
};

struct SimulationResult {
    RatePoint analytic;
    std::optional<McStat> traditional_sinr_db; ///< post-cancellation SINR, dB
    std::optional<McStat> bkic_residual;       ///< per-symbol residual power after reduction
};

/// Evaluates one operating point: analytic rates always, Monte Carlo
/// estimates when requested. `trials` counts simulated blocks; packets are
/// seeded as derive_seed(seed, tag, packet_index), so results do not depend
/// on evaluation order.
SimulationResult simulate_point(const ChannelParams& params, ZMod zmod,
                                const FadingSpec& fading, long trials,
                                std::uint64_t seed, const std::vector<Scheme>& schemes);

/// One-row table for a simulation result restricted to the requested schemes.
Curve simulation_curve(const ChannelParams& params, const SimulationResult& result,
                       const std::vector<Scheme>& schemes, LogBase base);

enum class ValidationSuite {
    HInvariance,
    ZfEquivalence,
    SinrMatch,
    Jensen,
    MimoIdentity,
    ContinuousFadingCov,
};

std::vector<ValidationSuite> parse_suites(const std::string& comma_list);
std::vector<ValidationSuite> all_suites();
std::string suite_name(ValidationSuite s);

struct ValidationCheck {
    std::string name;
    double metric = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

/// Runs the requested consistency suites and reports one line per check.
/// delta_var <= 0 falls back to 0.01 for the continuous-fading check.
std::vector<ValidationCheck> run_validation(const std::vector<ValidationSuite>& suites,
                                            const ChannelParams& params, ZMod zmod,
                                            double delta_var, long trials,
                                            std::uint64_t seed);

void write_validation_report(const std::vector<ValidationCheck>& checks,
                             const std::vector<std::string>& comments, std::ostream& os);

int validation_exit_code(const std::vector<ValidationCheck>& checks);

/// Command-line entry point (subcommands rates, fig3, fig4, simulate,
/// validate). Returns 0 on success, 1 on failed validation or I/O error,
/// 2 on usage errors.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);

}  // namespace kic
