#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include <maval/json_io.hpp>

using namespace maval;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    std::string cmd = std::string(MAVAL_CLI_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string tmp_json(const std::string& name, const json& j) {
    std::string path = std::string("cli_tmp_") + name + ".json";
    std::ofstream out(path);
    out << j.dump();
    return path;
}

}  // namespace

TEST_CASE("cli eval: total-mass proxy pairing") {
    auto fn = tmp_json("fn_quad2",
                       function_to_json(ConvexFunction::quadratic(SymMatrix::identity(2), Vec(2), 0.0)));
    auto sp = tmp_json("sp_ma2", functional_to_json(FunctionalSpec::e_fam(2, 0, 0, 2)));
    auto rg = tmp_json("rg_unitbox", region_to_json(Region::box(Vec{0.0, 0.0}, Vec{1.0, 1.0})));
    auto r = run("eval " + fn + " " + sp + " " + rg + " --phi one");
    CHECK(r.exit_code == 0);
    CHECK(std::abs(std::stod(r.out) - 1.0) < 1e-12);
}

TEST_CASE("cli eval: discrete operator writes atoms") {
    auto fn = tmp_json("fn_abs", function_to_json(ConvexFunction::max_affine(
                                     {{Vec{1.0}, 0.0}, {Vec{-1.0}, 0.0}})));
    auto sp = tmp_json("sp_dma", functional_to_json(FunctionalSpec::discrete_ma(1)));
    auto rg = tmp_json("rg_sym1", region_to_json(Region::box(Vec{-1.0}, Vec{1.0})));
    auto r = run("eval " + fn + " " + sp + " " + rg + " --out cli_tmp_measure.json");
    CHECK(r.exit_code == 0);
    std::ifstream in("cli_tmp_measure.json");
    json j;
    in >> j;
    REQUIRE(j.at("atoms").size() == 1);
    CHECK(j.at("atoms")[0].at("x")[0] == 0.0);
    CHECK(j.at("atoms")[0].at("mass") == 2.0);
}

TEST_CASE("cli eval: disc anchor with an explicit bump") {
    auto fn = tmp_json("fn_quad2b",
                       function_to_json(ConvexFunction::quadratic(SymMatrix::identity(2), Vec(2), 0.0)));
    auto sp = tmp_json("sp_e110", functional_to_json(FunctionalSpec::e_fam(2, 1, 1, 0)));
    auto rg = tmp_json("rg_disc", region_to_json(Region::ball(Vec{0.0, 0.0}, 1.0)));
    auto r = run("eval " + fn + " " + sp + " " + rg + " --order 32 --phi one");
    CHECK(r.exit_code == 0);
    double want = std::numbers::pi / 6.0;
    CHECK(std::abs(std::stod(r.out) - want) < 2e-3 * want);
}

TEST_CASE("cli eval: exit codes for parse, dimension, precondition failures") {
    std::ofstream bad("cli_tmp_bad.json");
    bad << "{ not json";
    bad.close();
    auto sp = tmp_json("sp_ma2b", functional_to_json(FunctionalSpec::e_fam(2, 0, 0, 2)));
    auto rg = tmp_json("rg_unitbox2", region_to_json(Region::box(Vec{0.0, 0.0}, Vec{1.0, 1.0})));
    CHECK(run("eval cli_tmp_bad.json " + sp + " " + rg + " --phi one").exit_code == 2);

    auto fn1 = tmp_json("fn_quad1", function_to_json(ConvexFunction::quadratic(SymMatrix::identity(1),
                                                                               Vec(1), 0.0)));
    CHECK(run("eval " + fn1 + " " + sp + " " + rg + " --phi one").exit_code == 3);

    auto fn_abs2 = tmp_json("fn_abs2", function_to_json(ConvexFunction::max_affine(
                                           {{Vec{1.0, 0.0}, 0.0}, {Vec{-1.0, 0.0}, 0.0}})));
    CHECK(run("eval " + fn_abs2 + " " + sp + " " + rg + " --phi one").exit_code == 4);
}

TEST_CASE("cli decompose: homogeneous components with reconstruction residual") {
    auto fn = tmp_json("fn_rc2", function_to_json(ConvexFunction::sum(
                                     ConvexFunction::quadratic(SymMatrix::identity(2), Vec{0.2, -0.1}, 0.3),
                                     ConvexFunction::pnorm(2, 4, 0.2))));
    auto sp = tmp_json("sp_hess1", functional_to_json(FunctionalSpec::e_fam(2, 0, 0, 1)));
    auto rg = tmp_json("rg_box2", region_to_json(Region::box(Vec{-1.0, -1.0}, Vec{1.0, 1.0})));
    auto r = run("decompose " + sp + " " + fn + " " + rg + " --mode homogeneous --order 12");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j.at("components").size() == 3);  // k = 0..n+d with d = 0
    CHECK(j.at("reconstruction-residual").get<double>() < 1e-7);
}

TEST_CASE("cli decompose: translative mode") {
    auto fn = tmp_json("fn_quad2c",
                       function_to_json(ConvexFunction::quadratic(SymMatrix::identity(2), Vec(2), 0.0)));
    auto sp = tmp_json("sp_e102", functional_to_json(FunctionalSpec::e_fam(2, 1, 0, 2)));
    auto rg = tmp_json("rg_box2b", region_to_json(Region::box(Vec{-1.0, -1.0}, Vec{1.0, 1.0})));
    auto el = tmp_json("ell", affine_to_json(AffineFunctional{0.1, Vec{1.0, 0.0}}));
    auto r = run("decompose " + sp + " " + fn + " " + rg + " --mode translative --ell " + el + " --order 12");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j.at("components").size() == 2);  // j = 0..1
    CHECK(j.at("reconstruction-residual").get<double>() < 1e-7);
}

TEST_CASE("cli verify: counterexample suite passes by failing as expected") {
    auto r = run("verify --suite counterexample --seed 5");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j.at("suite") == "counterexample");
    CHECK(j.at("pass") == true);
}

TEST_CASE("cli verify: valuation suite over 1-d builtins") {
    auto r = run("verify --suite valuation --seed 9 --trials 6 --n 1 --order 16");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j.at("pass") == true);
    CHECK(j.at("trials").size() >= 12);
}

TEST_CASE("cli verify: independence suite") {
    auto r = run("verify --suite independence --seed 11 --n 3 --k 2 --d 2");
    CHECK(r.exit_code == 0);
    auto bad = run("verify --suite nonsense --seed 1");
    CHECK(bad.exit_code == 4);
}

TEST_CASE("cli: MAVAL_THREADS does not change results") {
    auto fn = tmp_json("fn_quad2t",
                       function_to_json(ConvexFunction::quadratic(SymMatrix::identity(2), Vec{0.3, -0.1}, 0.2)));
    auto sp = tmp_json("sp_e111t", functional_to_json(FunctionalSpec::e_fam(2, 1, 1, 1)));
    auto rg = tmp_json("rg_ballt", region_to_json(Region::ball(Vec{0.0, 0.0}, 1.2)));
    auto r1 = run("eval " + fn + " " + sp + " " + rg + " --order 24 --phi one");
    setenv("MAVAL_THREADS", "4", 1);
    auto r4 = run("eval " + fn + " " + sp + " " + rg + " --order 24 --phi one");
    unsetenv("MAVAL_THREADS");
    CHECK(r1.exit_code == 0);
    CHECK(r1.out == r4.out);
}

TEST_CASE("cli verify: deterministic byte-identical reports") {
    auto a = run("verify --suite invariance --seed 13 --trials 4 --n 2 --k 1 --d 0 --order 14");
    auto b = run("verify --suite invariance --seed 13 --trials 4 --n 2 --k 1 --d 0 --order 14");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    auto c = run("verify --suite seminorm --seed 17 --trials 6 --n 1 --order 14");
    auto d = run("verify --suite seminorm --seed 17 --trials 6 --n 1 --order 14");
    CHECK(c.exit_code == 0);
    CHECK(c.out == d.out);
}
