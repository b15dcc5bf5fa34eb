#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "ucc/experiments.hpp"
#include "ucc/info_measures.hpp"
#include "ucc/report.hpp"

using namespace ucc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / fs::path("ucc-test-" + std::to_string(::getpid()) + "-" +
                                                    std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& content) const {
        const auto p = path / name;
        std::ofstream(p) << content;
        return p.string();
    }
};

std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("report helpers") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0 / 3.0).substr(0, 6) == "0.3333");
    // standard test vector
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    JsonValue v(JsonValue::Object{{"a", JsonValue(1.5)}, {"b", JsonValue("x\"y")}});
    const auto s = v.dump();
    CHECK(s.find("\"a\": 1.5") != std::string::npos);
    CHECK(s.find("\\\"") != std::string::npos);
}

TEST_CASE("exponent-bound run writes a summary consistent with the library") {
    TempDir tmp;
    const std::string cfg = R"({
      "experiment": "exponent-bound",
      "seed": 11,
      "family": {"kind": "dmc", "d": 2, "m": 1},
      "theta": [-2.197224577336219, 2.197224577336219],
      "input_dist": [0.5, 0.5],
      "rates": {"R": 0.2},
      "out_dir": ")" + (tmp.path / "out").string() + R"("
    })";
    const auto p = tmp.file("eb.json", cfg);
    const auto res = run_experiment_file(p, {});
    REQUIRE(res.exit_code == 0);
    auto j = nlohmann::json::parse(slurp((tmp.path / "out" / "eb-summary.json").string()));
    auto bsc = make_bsc(0.1);
    const auto opt = optimal_r1(std::vector<double>{0.5, 0.5}, bsc, 0.2);
    CHECK(j.at("bound").get<double>() == doctest::Approx(opt.bound).epsilon(1e-12));
    CHECK(j.at("R1").get<double>() == doctest::Approx(opt.r1).epsilon(1e-12));
    // manifest carries digests matching the files on disk
    auto man = nlohmann::json::parse(slurp((tmp.path / "out" / "eb-manifest.json").string()));
    for (const auto& o : man.at("outputs")) {
        CHECK(sha256_hex(slurp(o.at("path").get<std::string>())) == o.at("sha256").get<std::string>());
    }
}

TEST_CASE("malformed configs fail atomically") {
    TempDir tmp;
    const auto out = (tmp.path / "out").string();
    const auto p = tmp.file("bad.json", "{ not json");
    const auto res = run_experiment_file(p, CliOverrides{{}, {}, out});
    CHECK(res.exit_code == 2);
    const bool no_partial_outputs = !fs::exists(out) || fs::is_empty(out);
    CHECK(no_partial_outputs);

    // schema-valid JSON with a missing mandatory field
    const auto p2 = tmp.file("noseed.json", R"({
      "experiment": "exponent-bound",
      "family": {"kind": "dmc"},
      "theta": [0.0, 0.0],
      "input_dist": [0.5, 0.5],
      "rates": {"R": 0.1}
    })");
    const auto res2 = run_experiment_file(p2, CliOverrides{{}, {}, out});
    CHECK(res2.exit_code == 2);
    CHECK(res2.message.find("seed") != std::string::npos);
}

TEST_CASE("identical config and seed reproduce byte-identical tables") {
    TempDir tmp;
    const std::string cfg = R"({
      "experiment": "simulate-exponent",
      "seed": 321,
      "family": {"kind": "dmc", "d": 2, "m": 1},
      "theta": [-2.9444389791664403, 2.9444389791664403],
      "input_dist": [0.5, 0.5],
      "rates": {"R": 0.1},
      "n_list": [16, 24, 32, 48],
      "trials": 3000,
      "out_dir": ")" + (tmp.path / "o1").string() + R"("
    })";
    const auto p = tmp.file("sim.json", cfg);
    auto r1 = run_experiment_file(p, {});
    REQUIRE((r1.exit_code == 0 || r1.exit_code == 4));
    const auto csv1 = slurp((tmp.path / "o1" / "sim-results.csv").string());

    auto r2 = run_experiment_file(p, CliOverrides{{}, {}, (tmp.path / "o2").string()});
    const auto csv2 = slurp((tmp.path / "o2" / "sim-results.csv").string());
    CHECK(csv1 == csv2);

    // worker count must not change the numbers
    auto r3 = run_experiment_file(p, CliOverrides{{}, 1, (tmp.path / "o3").string()});
    const auto csv3 = slurp((tmp.path / "o3" / "sim-results.csv").string());
    CHECK(csv1 == csv3);

    // a different seed changes the sample path
    auto r4 = run_experiment_file(p, CliOverrides{777, {}, (tmp.path / "o4").string()});
    const auto csv4 = slurp((tmp.path / "o4" / "sim-results.csv").string());
    CHECK(csv1 != csv4);
}

TEST_CASE("validate reports semantic diagnostics without running") {
    TempDir tmp;
    const auto good = tmp.file("good.json", R"({
      "experiment": "exponent-bound",
      "seed": 5,
      "family": {"kind": "dmc"},
      "theta": [0.5, -0.5],
      "input_dist": [0.5, 0.5],
      "rates": {"R": 0.05}
    })");
    CHECK(validate_experiment_file(good).empty());

    const auto bad_rates = tmp.file("rates.json", R"({
      "experiment": "simulate-exponent",
      "seed": 5,
      "family": {"kind": "dmc"},
      "theta": [0.5, -0.5],
      "input_dist": [0.5, 0.5],
      "rates": {"R": 0.3, "R1": 0.2},
      "n_list": [8, 12, 16, 20],
      "trials": 100
    })");
    const auto diags = validate_experiment_file(bad_rates);
    REQUIRE(!diags.empty());
    bool found = false;
    for (const auto& d : diags) found |= d.find("R1") != std::string::npos;
    CHECK(found);

    const auto too_big = tmp.file("cap.json", R"({
      "experiment": "simulate-exponent",
      "seed": 5,
      "family": {"kind": "dmc"},
      "theta": [0.5, -0.5],
      "input_dist": [0.5, 0.5],
      "rates": {"R": 0.1},
      "exact": true,
      "n_list": [64, 128, 256, 6000],
      "trials": 100
    })");
    const auto diags2 = validate_experiment_file(too_big);
    bool cap = false;
    for (const auto& d : diags2) cap |= d.find("capacity") != std::string::npos;
    CHECK(cap);
}

TEST_CASE("second-order and codebook-audit configs run end to end") {
    TempDir tmp;
    const std::string so = R"({
      "experiment": "second-order",
      "seed": 4,
      "family": {"kind": "dmc", "d": 2, "m": 1},
      "theta": [-2.197224577336219, 2.197224577336219],
      "input_dist": [0.5, 0.5],
      "rates": {"R2_star": 0.0},
      "n_list": [300],
      "trials": 1500,
      "out_dir": ")" + (tmp.path / "so").string() + R"("
    })";
    auto r = run_experiment_file(tmp.file("so.json", so), {});
    CHECK(r.exit_code == 0);

    const std::string audit = R"({
      "experiment": "codebook-audit",
      "seed": 6,
      "family": {"kind": "dmc", "d": 2, "m": 1},
      "input_dist": [0.5, 0.5],
      "rates": {"R": 0.39, "R1": 0.6},
      "n_list": [8],
      "verify_packing": true,
      "out_dir": ")" + (tmp.path / "audit").string() + R"("
    })";
    auto r2 = run_experiment_file(tmp.file("audit.json", audit), {});
    CHECK(r2.exit_code == 0);
    bool has_book = false;
    for (const auto& f : r2.output_files) has_book |= f.find("codebook-n8") != std::string::npos;
    CHECK(has_book);

    const std::string cb = R"({
      "experiment": "clarke-barron",
      "seed": 2,
      "family": {"kind": "dmc", "d": 2, "m": 1},
      "theta": [0.0, 0.0],
      "x": 0,
      "priors": {"input": {"kind": "mean-uniform"}},
      "s_list": [0.5],
      "n_list": [16, 32, 64, 128],
      "out_dir": ")" + (tmp.path / "cb").string() + R"("
    })";
    auto r3 = run_experiment_file(tmp.file("cb.json", cb), {});
    CHECK(r3.exit_code == 0);
    auto j = nlohmann::json::parse(slurp((tmp.path / "cb" / "cb-summary.json").string()));
    const double slope = j.at("fits")[0].at("slope").get<double>();
    CHECK(slope > 0.3);
    CHECK(slope < 0.7);
}
