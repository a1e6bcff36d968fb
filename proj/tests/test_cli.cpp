#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "llad/cli.hpp"
#include "support.hpp"

using namespace llad;
using nlohmann::json;

namespace {

struct Captured {
    int code;
    std::string out;
};

Captured run(std::vector<std::string> args) {
    std::ostringstream sink;
    std::streambuf* old = std::cout.rdbuf(sink.rdbuf());
    int code = cli_run(args);
    std::cout.rdbuf(old);
    return {code, sink.str()};
}

const char* kG = "samples/g.lina";

bool have_samples() {
    std::ifstream in(kG);
    return bool(in);
}

}  // namespace

TEST_CASE("grad on the running example") {
    if (!have_samples()) return;  // run from the project root
    auto r = run({"grad", kG, "--args", "x=1.5707963267948966,y=2.0", "--json"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(std::abs(double(j["gradient"]["x"]) + 1.0) <= 1e-9);
    CHECK(std::abs(double(j["gradient"]["y"]) - 1.0) <= 1e-9);
    // skipping the unzip pass changes nothing observable
    auto r2 = run({"grad", kG, "--args", "x=0.3,y=-1.25", "--json"});
    auto r3 = run({"grad", kG, "--args", "x=0.3,y=-1.25", "--skip-unzip", "--json"});
    json a = json::parse(r2.out), b = json::parse(r3.out);
    CHECK(std::abs(double(a["gradient"]["x"]) - double(b["gradient"]["x"])) <= 1e-9);
    CHECK(std::abs(double(a["gradient"]["y"]) - double(b["gradient"]["y"])) <= 1e-9);
}

TEST_CASE("workload reports both cost measures") {
    if (!have_samples()) return;
    auto r = run({"workload", kG, "--json"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["jax_workload"] == 4);
    CHECK(j["translated_workload"] == 4);
    CHECK(j["safe"] == true);
}

TEST_CASE("check and eval on a lambdaLL file") {
    if (!have_samples()) return;
    auto r = run({"check", "samples/sum.llt", "--json"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["type"] == "R");
    CHECK(j["derivation"]["rule"].is_string());
    auto e = run({"eval", "samples/sum.llt", "--json"});
    REQUIRE(e.code == 0);
    json je = json::parse(e.out);
    CHECK(je["result"] == "7");
    CHECK(je["flops"] == 1);
    auto t = run({"eval", "samples/sum.llt", "--trace"});
    json jt = json::parse(t.out);
    REQUIRE(jt["trace"].is_array());
    CHECK(jt["trace"].size() >= 1);
    CHECK(jt["trace"][0]["kind"].is_string());
    CHECK(jt["trace"][0]["redex_path"].is_array());
}

TEST_CASE("translate emits parseable surface syntax") {
    if (!have_samples()) return;
    auto r = run({"translate", kG, "--delta-b"});
    REQUIRE(r.code == 0);
    TermPtr t = parse_term(r.out);
    CHECK(alpha_equal(t, llad::testing::g_translated()));
    auto rfull = run({"translate", kG});
    REQUIRE(rfull.code == 0);
    CHECK_NOTHROW(parse_term(rfull.out));
}

TEST_CASE("transform subcommands emit well-typed terms") {
    if (!have_samples()) return;
    for (auto sub : {"forward", "unzip", "transpose"}) {
        auto r = run({sub, kG});
        REQUIRE(r.code == 0);
        TermPtr t = parse_term(r.out);
        auto j = lina::jax_check(llad::testing::g_example());
        CHECK_NOTHROW(synth(delta_env(j), t));
    }
}

TEST_CASE("qcheck prints the index and degrees") {
    if (!have_samples()) return;
    auto r = run({"qcheck", kG, "--json"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["m"] == 4);
    CHECK(j["quantitatively_safe"] == true);
}

TEST_CASE("oracle-check passes on the running example") {
    if (!have_samples()) return;
    auto r = run({"oracle-check", kG, "--trials", "10", "--seed", "42", "--json"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["forward_vs_finite_differences"] == "equal_on_samples");
    CHECK(j["transpose_dot_product"] == "equal_on_samples");
    CHECK(j["skip_unzip"] == "equal_on_samples");
    CHECK(j["delta_vs_delta_b"] == "equal_on_samples");
}

TEST_CASE("exit codes distinguish user errors") {
    auto r = run({"check", "samples/no_such_file.lina"});
    CHECK(r.code == 1);
    // an ill-typed program is a user error
    std::ofstream bad("samples/.bad_test.llt");
    bad << "lam x : R . (x, x)";
    bad.close();
    auto r2 = run({"check", "samples/.bad_test.llt"});
    CHECK(r2.code == 1);
    std::remove("samples/.bad_test.llt");
}
