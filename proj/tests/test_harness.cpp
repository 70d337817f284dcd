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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kic/harness.hpp"

using namespace kic;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path tmp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

ChannelParams default_params() {
    ChannelParams p;
    p.p_x = 100.0;
    p.p_z = 100.0;
    p.sigma2 = 1.0;
    p.block_len = 100;
    p.packet_len = 10000;
    return p;
}

}  // namespace

TEST_CASE("CSV values carry 9 significant digits") {
    CHECK(format_g9(6.591772906571359) == "6.59177291");
    CHECK(format_g9(0.000143538647082584) == "0.000143538647");
    CHECK(format_g9(20.0) == "20");
    CHECK(format_g9(1.4419598e-6) == "1.4419598e-06");
}

TEST_CASE("write_csv layout") {
    Curve curve;
    curve.comments = {"command=demo", "seed=1"};
    curve.columns = {"a", "b"};
    curve.rows = {{1.0, 2.5}, {3.0, 4.0}};
    std::ostringstream os;
    write_csv(curve, os);
    CHECK(os.str() == "# command=demo\n# seed=1\na,b\n1,2.5\n3,4\n");
}

TEST_CASE("power sweep reproduces the frozen operating point") {
    const Curve curve = run_fig3(1.0, 100, LogBase::Bits);
    REQUIRE(curve.rows.size() == 30);
    REQUIRE(curve.columns == std::vector<std::string>{"px_db", "r_t", "r_bkic", "c_u"});

    // 20 dB row, values evaluated directly from the closed forms
    const auto& row = curve.rows[19];
    CHECK(row[0] == 20.0);
    CHECK(row[1] == doctest::Approx(5.65821148275179).epsilon(1e-12));
    CHECK(row[2] == doctest::Approx(6.59162936792428).epsilon(1e-12));
    CHECK(row[3] == doctest::Approx(6.59177290657136).epsilon(1e-12));

    double prev_rt = 0.0, prev_rb = 0.0, prev_cu = 0.0;
    for (const auto& r : curve.rows) {
        // strict ordering at every sweep point
        CHECK(r[1] < r[2]);
        CHECK(r[2] <= r[3]);
        // the blind rate hugs the bound across the sweep
        CHECK(r[3] - r[2] < 0.01);
        // monotone in the transmit power
        CHECK(r[1] > prev_rt);
        CHECK(r[2] > prev_rb);
        CHECK(r[3] > prev_cu);
        prev_rt = r[1];
        prev_rb = r[2];
        prev_cu = r[3];
    }
}

TEST_CASE("block-length sweep narrows toward the bound") {
    const double p = std::pow(10.0, 2.0); // 20 dB
    const Curve curve = run_fig4(p, p, 1.0, LogBase::Bits);
    REQUIRE(curve.rows.size() == 7);

    double prev_gap_rt = 1e9;
    for (const auto& row : curve.rows) {
        const int t = int(row[0]);
        // the c_u - r_bkic gap matches its closed form at every row
        ChannelParams params;
        params.p_x = p;
        params.p_z = p;
        params.sigma2 = 1.0;
        params.block_len = t;
        params.packet_len = t;
        CHECK(row[3] - row[2] == doctest::Approx(rate_gap(params)).epsilon(1e-9));

        // the traditional rate closes on the bound as T grows
        const double gap_rt = row[3] - row[1];
        CHECK(gap_rt < prev_gap_rt);
        prev_gap_rt = gap_rt;
    }
    CHECK(prev_gap_rt < 0.2); // T = 1000
}

TEST_CASE("nats output only rescales") {
    const Curve bits = run_fig3(1.0, 100, LogBase::Bits);
    const Curve nats = run_fig3(1.0, 100, LogBase::Nats);
    for (std::size_t i = 0; i < bits.rows.size(); ++i)
        for (std::size_t j = 1; j < 4; ++j)
            CHECK(nats.rows[i][j] ==
                  doctest::Approx(bits.rows[i][j] * std::numbers::ln2).epsilon(1e-12));
}

TEST_CASE("scheme and suite parsing") {
    CHECK(parse_schemes("naive,r_bkic") ==
          std::vector<Scheme>{Scheme::Naive, Scheme::Rbkic});
    CHECK_THROWS_AS(parse_schemes("bogus"), std::invalid_argument);
    CHECK_THROWS_AS(parse_schemes(""), std::invalid_argument);
    CHECK(parse_suites("jensen").size() == 1);
    CHECK_THROWS_AS(parse_suites("nope"), std::invalid_argument);
    CHECK_THROWS_AS(parse_zmod("qam4"), std::invalid_argument);
    CHECK(zmod_name(parse_zmod("qam16")) == "qam16");
}

TEST_CASE("Monte Carlo point estimates shrink as 1/sqrt(trials)") {
    const auto params = default_params();
    const auto schemes = std::vector<Scheme>{Scheme::McTraditionalSinr};
    const auto small = simulate_point(params, ZMod::Psk4, FadingSpec::block(), 2000, 7,
                                      schemes);
    const auto large = simulate_point(params, ZMod::Psk4, FadingSpec::block(), 8000, 7,
                                      schemes);
    const double ratio = large.traditional_sinr_db->std_error /
                         small.traditional_sinr_db->std_error;
    CHECK(ratio == doctest::Approx(0.5).epsilon(0.2));

    // both estimates sit on the analytic value
    const double expected_db = 10.0 * std::log10(49.5);
    CHECK(std::abs(small.traditional_sinr_db->mean - expected_db) < 0.2);
    CHECK(std::abs(large.traditional_sinr_db->mean - expected_db) < 0.2);
}

TEST_CASE("empirical log2(1+SINR) reproduces the traditional rate") {
    const auto params = default_params(); // 20 dB, T = 100
    const auto result = simulate_point(params, ZMod::Psk4, FadingSpec::block(), 10000,
                                       21, {Scheme::McTraditionalSinr});
    const double sinr = std::pow(10.0, result.traditional_sinr_db->mean / 10.0);
    const double empirical_rate = std::log2(1.0 + sinr);
    CHECK(std::abs(empirical_rate - rate_traditional(params.gamma(), 100)) < 0.05);
}

TEST_CASE("blind-cancellation residual is numerically zero under block fading") {
    const auto params = default_params();
    const auto result = simulate_point(params, ZMod::Psk4, FadingSpec::block(), 500, 3,
                                       {Scheme::McBkicResidual});
    CHECK(result.bkic_residual->mean < 1e-20);

    // under continuous fading the leak is visible and grows with delta_var
    const auto drift1 = simulate_point(params, ZMod::Psk4, FadingSpec::continuous(1e-4),
                                       500, 3, {Scheme::McBkicResidual});
    const auto drift2 = simulate_point(params, ZMod::Psk4, FadingSpec::continuous(2e-4),
                                       500, 3, {Scheme::McBkicResidual});
    CHECK(drift1.bkic_residual->mean > 1e-8);
    CHECK(drift2.bkic_residual->mean > drift1.bkic_residual->mean);
}

TEST_CASE("generalized route residual also vanishes for non-unit-modulus z") {
    auto params = default_params();
    params.block_len = 20;
    params.packet_len = 2000;
    const auto result = simulate_point(params, ZMod::Gauss, FadingSpec::block(), 300, 5,
                                       {Scheme::McBkicResidual});
    CHECK(result.bkic_residual->mean < 1e-18);
}

TEST_CASE("validation suites pass on a healthy build") {
    const auto checks = run_validation(all_suites(), default_params(), ZMod::Psk4, 0.01,
                                       10000, 11);
    REQUIRE(checks.size() == 6);
    for (const auto& c : checks) {
        INFO(c.name, " metric=", c.metric, " threshold=", c.threshold);
        CHECK(c.pass);
        CHECK(c.metric < c.threshold);
    }
    CHECK(validation_exit_code(checks) == 0);

    auto failing = checks;
    failing[2].pass = false;
    CHECK(validation_exit_code(failing) == 1);
}

TEST_CASE("validation report layout") {
    std::vector<ValidationCheck> checks = {{"demo", 1.5e-12, 1e-10, true}};
    std::ostringstream os;
    write_validation_report(checks, {"command=validate"}, os);
    CHECK(os.str() ==
          "# command=validate\ncheck,metric,threshold,pass\ndemo,1.5e-12,1e-10,1\n");
}

TEST_CASE("cli: rates prints the analytic point") {
    const auto out = tmp_file("kic_rates.txt");
    const int code = cli_main({"rates", "--px-db", "20", "--pz-db", "20", "--block-len",
                               "100", "--out", out.string()});
    CHECK(code == 0);
    const std::string text = slurp(out);
    CHECK(text.find("# command=rates") != std::string::npos);
    CHECK(text.find("# px-db=20") != std::string::npos);
    CHECK(text.find("r_naive=6.65821148") != std::string::npos);
    CHECK(text.find("c_u=6.59177291") != std::string::npos);
    CHECK(text.find("r_t=5.65821148") != std::string::npos);
    CHECK(text.find("r_bkic=6.59162937") != std::string::npos);
    std::filesystem::remove(out);
}

TEST_CASE("cli: identical seeds give byte-identical sweeps") {
    const auto a = tmp_file("kic_fig3_a.csv");
    const auto b = tmp_file("kic_fig3_b.csv");
    CHECK(cli_main({"fig3", "--seed", "9", "--out", a.string()}) == 0);
    CHECK(cli_main({"fig3", "--seed", "9", "--out", b.string()}) == 0);
    const std::string ta = slurp(a), tb = slurp(b);
    CHECK(ta == tb);
    CHECK(ta.find("# command=fig3") != std::string::npos);
    CHECK(ta.find("px_db,r_t,r_bkic,c_u") != std::string::npos);
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST_CASE("cli: simulate is deterministic and seed-sensitive") {
    const auto a = tmp_file("kic_sim_a.csv");
    const auto b = tmp_file("kic_sim_b.csv");
    const auto c = tmp_file("kic_sim_c.csv");
    const std::vector<std::string> base = {"simulate", "--trials", "300",
                                           "--schemes", "r_bkic,mc_traditional_sinr"};
    auto with_out = [&](const std::string& path, const std::string& seed) {
        auto args = base;
        args.insert(args.end(), {"--seed", seed, "--out", path});
        return args;
    };
    CHECK(cli_main(with_out(a.string(), "4")) == 0);
    CHECK(cli_main(with_out(b.string(), "4")) == 0);
    CHECK(cli_main(with_out(c.string(), "5")) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) != slurp(c));
    std::filesystem::remove(a);
    std::filesystem::remove(b);
    std::filesystem::remove(c);
}

TEST_CASE("cli: config file values are overridden by flags") {
    const auto cfg = tmp_file("kic_cfg.ini");
    {
        std::ofstream f(cfg);
        f << "px-db=10\npz-db=14\n";
    }
    const auto out = tmp_file("kic_rates_cfg.txt");

    CHECK(cli_main({"rates", "--config", cfg.string(), "--out", out.string()}) == 0);
    std::string text = slurp(out);
    CHECK(text.find("# px-db=10") != std::string::npos);
    CHECK(text.find("# pz-db=14") != std::string::npos);

    CHECK(cli_main({"rates", "--config", cfg.string(), "--px-db", "20", "--out",
                    out.string()}) == 0);
    text = slurp(out);
    CHECK(text.find("# px-db=20") != std::string::npos);
    CHECK(text.find("# pz-db=14") != std::string::npos);

    std::filesystem::remove(cfg);
    std::filesystem::remove(out);
}

TEST_CASE("cli: usage errors exit with 2") {
    CHECK(cli_main({"rates", "--definitely-not-a-flag"}) == 2);
    CHECK(cli_main({"unknown-subcommand"}) == 2);
    CHECK(cli_main(std::vector<std::string>{}) == 2);
    CHECK(cli_main({"simulate", "--zmod", "bogus", "--trials", "10"}) == 2);
    CHECK(cli_main({"simulate", "--block-len", "7", "--packet-len", "10"}) == 2);
}

TEST_CASE("cli: validate succeeds on a healthy build") {
    const auto out = tmp_file("kic_validate.csv");
    const int code = cli_main({"validate", "--trials", "4000", "--seed", "7",
                               "--suite", "h_invariance,zf_equivalence,mimo_identity,jensen",
                               "--out", out.string()});
    CHECK(code == 0);
    const std::string text = slurp(out);
    CHECK(text.find("check,metric,threshold,pass") != std::string::npos);
    CHECK(text.find("h_invariance") != std::string::npos);
    std::filesystem::remove(out);
}
