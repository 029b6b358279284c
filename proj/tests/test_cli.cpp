#include "doctest.h"
#include "cli_commands.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using nlohmann::json;
using qexp::cli::run;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "qexp");
    std::ostringstream out, err;
    int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("qexp_cli_test_" + name);
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

TEST_CASE("complex parsing") {
    using qexp::cli::parse_complex;
    CHECK(*parse_complex("1+2i") == std::complex<double>(1, 2));
    CHECK(*parse_complex("0.5-0.25i") == std::complex<double>(0.5, -0.25));
    CHECK(*parse_complex("-3") == std::complex<double>(-3, 0));
    CHECK(*parse_complex("2i") == std::complex<double>(0, 2));
    CHECK(*parse_complex("-i") == std::complex<double>(0, -1));
    CHECK(*parse_complex("1+i") == std::complex<double>(1, 1));
    CHECK(*parse_complex("1e-3,2") == std::complex<double>(1e-3, 2));
    CHECK_FALSE(parse_complex("1+2x"));
    CHECK_FALSE(parse_complex(""));
    CHECK_FALSE(parse_complex("i2"));
}

TEST_CASE("N ranges") {
    using qexp::cli::parse_n_range;
    CHECK(parse_n_range("6") == std::vector<int>{6});
    CHECK(parse_n_range("2..8") == std::vector<int>{2, 4, 6, 8});
    CHECK(parse_n_range("2..64").size() == 32u);
    CHECK_THROWS_AS(parse_n_range("7"), std::invalid_argument);
    CHECK_THROWS_AS(parse_n_range("3..9"), std::invalid_argument);
    CHECK_THROWS_AS(parse_n_range("8..2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_n_range("six"), std::invalid_argument);
}

TEST_CASE("config files") {
    std::istringstream in("# comment\n\nN = 8\nM=128\n");
    auto cfg = qexp::cli::read_config(in);
    CHECK(cfg.at("N") == "8");
    CHECK(cfg.at("M") == "128");
    std::istringstream bad("N 8\n");
    CHECK_THROWS_AS(qexp::cli::read_config(bad), std::invalid_argument);
}

TEST_CASE("eval examples") {
    auto zero = invoke({"eval", "fn", "--N", "6", "--zero"});
    CHECK(zero.code == 0);
    CHECK(json::parse(zero.out)["text"] == "1+0i");
    auto d = invoke({"eval", "dfn0", "--N", "6", "--k", "0"});
    CHECK(d.code == 0);
    CHECK(json::parse(d.out)["text"] == "0-0.5773503i");
    auto cut = invoke({"eval", "fo", "--N", "6", "--re", "-1"});
    CHECK(cut.code == 2);
    CHECK(invoke({"eval", "fn", "--N", "5", "--zero"}).code == 2);
}

TEST_CASE("gauss subcommand") {
    auto ok = invoke({"gauss", "--N", "2..16", "--format", "csv"});
    CHECK(ok.code == 0);
    CHECK(ok.out.rfind("N,direct_re,direct_im,closed_re,closed_im,residual\n", 0) == 0);
    CHECK(std::count(ok.out.begin(), ok.out.end(), '\n') == 9);
    CHECK(invoke({"gauss", "--N", "7"}).code == 2);
    auto contour = invoke({"gauss", "--N", "6", "--contour-R", "8"});
    CHECK(contour.code == 0);
    CHECK(json::parse(contour.out)["contour"][0]["identity_residual"].get<double>() <= 1e-8);
}

TEST_CASE("verify subcommands and exit codes") {
    auto e = invoke({"verify", "exp-identity"});
    REQUIRE(e.code == 0);
    auto j = json::parse(e.out);
    CHECK(j["residuals"]["exp_identity/level_0"].get<double>() <= 1e-3);
    CHECK(j["meta"]["h"].get<double>() > 0);
    CHECK(invoke({"verify", "overlaps"}).code == 0);
    CHECK(invoke({"verify", "conj"}).code == 0);
    auto forms = invoke({"verify", "closure-forms"});
    CHECK(forms.code == 0);
    CHECK(json::parse(forms.out)["residuals"]["form/R-form-plain"].get<double>() > 0.5);
    CHECK(invoke({"verify", "exp-identity", "--M", "100"}).code == 2);
    CHECK(invoke({"verify", "bogus"}).code == 2);
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("threshold violations exit 1 with the report still written") {
    auto path = temp_file("square.json");
    auto r = invoke({"fit", "gamma", "--self-test", "square", "--output", path.string()});
    CHECK(r.code == 1);
    std::ifstream in(path);
    auto j = json::parse(in);
    CHECK(j["in_family"] == false);
    std::filesystem::remove(path);
}

TEST_CASE("fit gamma") {
    auto r = invoke({"fit", "gamma", "--self-test", "gamma=k:2,x:0.3"});
    CHECK(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["gamma"]["k"] == 2);
    CHECK(j["dx"].get<double>() <= 1e-6);
    CHECK(invoke({"fit", "gamma", "--self-test", "const"}).code == 0);
    CHECK(invoke({"fit", "gamma", "--self-test", "nonsense"}).code == 2);

    // Samples file written from the evaluator itself.
    auto path = temp_file("samples.csv");
    {
        std::ofstream f(path);
        f << "k,x,re,im\n";
        for (int k = 0; k < 6; ++k) {
            for (double x : {std::log(1e-6), -1.0, 0.0, 1.0}) {
                auto e = invoke({"eval", "fn", "--N", "6", "--k", std::to_string(k), "--x", fmt(x)});
                auto v = json::parse(e.out)["value"];
                f.precision(17);
                f << k << ',' << fmt(x) << ',' << v["re"].get<double>() << ',' << v["im"].get<double>() << '\n';
            }
        }
    }
    auto fit = invoke({"fit", "gamma", "--from-samples", path.string(), "--expect-member"});
    CHECK(fit.code == 0);
    auto fj = json::parse(fit.out);
    CHECK(fj["gamma"]["k"] == 0);
    CHECK(std::abs(fj["gamma"]["x"].get<double>()) <= 1e-6);
    std::filesystem::remove(path);
}

TEST_CASE("probe normality") {
    auto grid = invoke({"probe", "normality", "--mu-grid", "rays+midsector"});
    CHECK(grid.code == 0);
    CHECK(json::parse(grid.out)["ordering_holds"] == true);
    CHECK(invoke({"probe", "normality", "--mu", "1+2x"}).code == 2);
    auto single = invoke({"probe", "normality", "--mu", "0", "--format", "csv"});
    CHECK(single.code == 0);
    CHECK(single.out.rfind("mu_re,mu_im,modulus,on_gamma,excluded_sectors,defect\n", 0) == 0);
}

TEST_CASE("config values apply unless overridden on the command line") {
    auto path = temp_file("run.cfg");
    {
        std::ofstream f(path);
        f << "# grid\nN=8\nM=128\n";
    }
    auto r = invoke({"verify", "exp-identity", "--config", path.string(), "--M", "256"});
    REQUIRE(r.code == 0);
    auto meta = json::parse(r.out)["meta"];
    CHECK(meta["N"] == 8.0);
    CHECK(meta["M"] == 256.0);
    {
        std::ofstream f(path);
        f << "contour-R=8\n";
    }
    CHECK(invoke({"verify", "overlaps", "--config", path.string()}).code == 2);
    std::filesystem::remove(path);
}

TEST_CASE("output is deterministic for a fixed seed") {
    auto a = invoke({"verify", "weak-limit", "--seed", "3"});
    auto b = invoke({"verify", "weak-limit", "--seed", "3"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    auto c = invoke({"verify", "weak-limit", "--seed", "4"});
    CHECK(c.out != a.out);
}

TEST_CASE("installed binary") {
    const char* exe = std::getenv("QEXP_CLI");
    if (exe == nullptr) return;
    auto out = temp_file("bin.json");
    std::string cmd = std::string("\"") + exe + "\" eval fn --N 6 --zero --output \"" + out.string() + "\" 2>/dev/null";
    CHECK(std::system(cmd.c_str()) == 0);
    std::ifstream in(out);
    CHECK(json::parse(in)["text"] == "1+0i");
    std::string bad = std::string("\"") + exe + "\" gauss --N 7 2>/dev/null";
    int status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(status) == 2);
    std::filesystem::remove(out);
}
