#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "poiskern/manifest.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "poiskern_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(POISKERN_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json slurp_json(const fs::path& path) { return json::parse(slurp(path)); }

fs::path strip_spec() {
    const fs::path p = test_dir() / "strip.json";
    if (!fs::exists(p)) {
        std::ofstream out(p);
        out << R"({"R": 1.0, "family": {"name": "strip", "params": {"a0": 1.0}}})";
    }
    return p;
}

std::vector<std::vector<double>> csv_rows(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0])))
            continue;
        std::vector<double> row;
        std::istringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) row.push_back(std::stod(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

TEST_CASE("run manifests hash only the reproducible fields") {
    poiskern::RunManifest man;
    man.command = "kernel";
    man.parameters = {{"y", 0.5}};
    man.seed = 7;
    man.outputs = {"k.csv"};
    const std::string h = man.hash();
    CHECK(h.size() == 16);

    SUBCASE("wall clock does not enter the hash") {
        man.wall_clock = 3.25;
        CHECK(man.hash() == h);
        const json j = man.to_json();
        CHECK(j.at("manifest_hash") == h);
        CHECK(j.at("wall_clock") == doctest::Approx(3.25));
    }

    SUBCASE("reproducible fields do") {
        poiskern::RunManifest other = man;
        other.seed = 8;
        CHECK(other.hash() != h);
        other = man;
        other.parameters["y"] = 0.6;
        CHECK(other.hash() != h);
        other = man;
        other.outputs.push_back("extra.csv");
        CHECK(other.hash() != h);
    }
}

TEST_CASE("kernel command writes a slice, a shape report, and a manifest") {
    const fs::path spec = strip_spec();
    const fs::path prefix = test_dir() / "k";
    const int code = run_cli("kernel --spec \"" + spec.string() + "\" --y 0.5 --bellshape 2 --out \"" +
                             prefix.string() + "\"");
    CHECK(code == 0);

    const std::string csv = slurp(prefix.string() + ".csv");
    REQUIRE(csv.rfind("# manifest=", 0) == 0);
    const std::string hash = csv.substr(11, 16);
    CHECK(csv.find("mass=0.4999999999") != std::string::npos);
    CHECK(csv.find("y=0.5") != std::string::npos);

    const json shape = slurp_json(prefix.string() + "_shape.json");
    CHECK(shape.at("verdict") == "pass");
    CHECK(shape.at("manifest") == hash);
    CHECK(shape.at("counts") == json({0, 1, 2, 0, 1, 2}));

    const json man = slurp_json(prefix.string() + "_manifest.json");
    CHECK(man.at("manifest_hash") == hash);
    CHECK(man.at("command") == "kernel");
    CHECK(man.at("wall_clock").get<double>() > 0.0);
}

TEST_CASE("bad inputs exit with code 2") {
    CHECK(run_cli("kernel --spec /nonexistent/spec.json --y 0.5") == 2);

    const fs::path broken = test_dir() / "broken.json";
    { std::ofstream(broken) << "{ not json"; }
    CHECK(run_cli("kernel --spec \"" + broken.string() + "\" --y 0.5") == 2);

    const fs::path negative = test_dir() / "negative.json";
    { std::ofstream(negative) << R"({"R": -1.0, "family": {"name": "strip", "params": {"a0": 1.0}}})"; }
    CHECK(run_cli("kernel --spec \"" + negative.string() + "\" --y 0.5") == 2);

    CHECK(run_cli("simulate --spec \"" + strip_spec().string() + "\" --y0 0.5 --paths 0") == 2);
    CHECK(run_cli("closed-form --family unknown") == 2);
}

TEST_CASE("factorisation verification reruns byte-identically and detects faults") {
    const fs::path spec = strip_spec();
    const fs::path out = test_dir() / "fact.json";
    const std::string args = "verify-factorization --spec \"" + spec.string() +
                             "\" --split 0.5 --xi-lo 0.1 --xi-hi 5 --xi-n 5 --out \"" +
                             out.string() + "\"";
    REQUIRE(run_cli(args) == 0);
    const json rep = slurp_json(out);
    CHECK(rep.at("pass") == true);
    CHECK(rep.at("max_residual").get<double>() <= 1e-8);
    CHECK(rep.at("tol").get<double>() == doctest::Approx(1e-8));
    CHECK(rep.contains("manifest"));

    const std::string first = slurp(out);
    REQUIRE(run_cli(args) == 0);
    CHECK(slurp(out) == first);

    CHECK(run_cli(args + " --inject-fault") == 4);
}

TEST_CASE("bell-shape verification command") {
    const fs::path out = test_dir() / "shape.json";
    const int code = run_cli("verify-bellshape --spec \"" + strip_spec().string() +
                             "\" --y 0.5 --orders 2 --out \"" + out.string() + "\"");
    CHECK(code == 0);
    const json rep = slurp_json(out);
    CHECK(rep.at("verdict") == "pass");
    CHECK(rep.at("orders") == json({0, 1, 2, 0, 1, 2}));
}

TEST_CASE("closed-form profiles match the known centre values") {
    const double inv_pi = 1.0 / std::acos(-1.0);
    const fs::path out = test_dir() / "profile.csv";

    SUBCASE("homogeneous") {
        REQUIRE(run_cli("closed-form --family homogeneous --p 1 --q 0 --mu 1 --x-lo -1 --x-hi 1 "
                        "--n 5 --out \"" + out.string() + "\"") == 0);
        const auto rows = csv_rows(out);
        REQUIRE(rows.size() == 5);
        CHECK(rows[2][0] == doctest::Approx(0.0));
        CHECK(rows[2][1] == doctest::Approx(inv_pi).epsilon(1e-12));
    }

    SUBCASE("classical half-plane at height one") {
        REQUIRE(run_cli("closed-form --family classical --d 1 --y 1 --x-lo -1 --x-hi 1 --n 5 "
                        "--out \"" + out.string() + "\"") == 0);
        const auto rows = csv_rows(out);
        REQUIRE(rows.size() == 5);
        CHECK(rows[2][1] == doctest::Approx(inv_pi).epsilon(1e-12));
        CHECK(rows[0][1] == doctest::Approx(inv_pi / 2.0).epsilon(1e-12));
    }

    SUBCASE("fractional kernel with alpha one is the classical one") {
        REQUIRE(run_cli("closed-form --family cs --d 1 --alpha 1 --y 1 --x-lo -1 --x-hi 1 --n 5 "
                        "--out \"" + out.string() + "\"") == 0);
        const auto rows = csv_rows(out);
        REQUIRE(rows.size() == 5);
        CHECK(rows[2][1] == doctest::Approx(inv_pi).epsilon(1e-12));
    }
}

TEST_CASE("simulation command checks its estimates against the solver") {
    const fs::path prefix = test_dir() / "sim";
    const std::string args = "simulate --spec \"" + strip_spec().string() +
                             "\" --y0 0.5 --paths 4000 --dt 1e-2 --seed 5 --out \"" +
                             prefix.string() + "\"";
    REQUIRE(run_cli(args) == 0);

    const json summary = slurp_json(prefix.string() + "_summary.json");
    CHECK(summary.at("pass") == true);
    CHECK(summary.at("mass_pass") == true);
    CHECK(summary.at("mass_oracle").get<double>() == doctest::Approx(0.5));
    REQUIRE(summary.at("charfn").size() == 3);
    for (const json& pt : summary.at("charfn")) CHECK(pt.at("pass") == true);

    const std::string first_summary = slurp(prefix.string() + "_summary.json");
    const std::string first_samples = slurp(prefix.string() + "_samples.csv");
    REQUIRE(run_cli(args) == 0);
    CHECK(slurp(prefix.string() + "_summary.json") == first_summary);
    CHECK(slurp(prefix.string() + "_samples.csv") == first_samples);
}

TEST_CASE("rogers sweep command") {
    const fs::path prefix = test_dir() / "rog";
    REQUIRE(run_cli("rogers --spec \"" + strip_spec().string() +
                    "\" --xi-lo 0.1 --xi-hi 10 --xi-n 12 --out \"" + prefix.string() + "\"") == 0);
    const auto rows = csv_rows(prefix.string() + ".csv");
    REQUIRE(rows.size() == 12);
    for (const auto& row : rows) {
        REQUIRE(row.size() == 4);
        CHECK(row[3] >= 0.0);
    }
    const json rep = slurp_json(prefix.string() + ".json");
    CHECK(rep.at("pass") == true);
    CHECK(rep.at("min_re_ratio").get<double>() >= 0.0);
}
