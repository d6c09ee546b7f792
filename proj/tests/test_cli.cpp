#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgan/cli.hpp"
#include "sgan/svg.hpp"

using sgan::cli::dispatch;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sgan_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

// a mixture config small enough for test-speed training
json tiny_train_json(int n_gen, long steps) {
    return json{
        {"task", "mixture"},
        {"train",
         {{"n_generators", n_gen},
          {"noise_dim", 2},
          {"data_dim", 2},
          {"generator",
           json::array({{{"in", 2}, {"out", 4}, {"batchnorm", false}, {"act", "leaky_relu"}},
                        {{"in", 4}, {"out", 2}, {"batchnorm", false}, {"act", "none"}}})},
          {"discriminator",
           json::array({{{"in", 2}, {"out", 4}, {"batchnorm", false}, {"act", "leaky_relu"}},
                        {{"in", 4}, {"out", 1}, {"batchnorm", false}, {"act", "sigmoid"}}})},
          {"batch_real", 8},
          {"batch_gen", 8},
          {"steps", steps},
          {"log_every", 2},
          {"seed", 5}}}};
}

}  // namespace

TEST_CASE("help and usage errors use the documented exit codes") {
    CHECK(dispatch({"--help"}) == 0);
    CHECK(dispatch({"train", "--help"}) == 0);
    CHECK(dispatch({}) == 1);                        // no subcommand
    CHECK(dispatch({"frobnicate"}) == 1);            // unknown subcommand
    CHECK(dispatch({"train", "--no-such-flag"}) == 1);
    CHECK(dispatch({"duality", "--family", "bogus"}) == 1);
    CHECK(dispatch({"verify", "--suite", "bogus"}) == 1);
}

TEST_CASE("train names a missing config file and exits with 1") {
    TempDir tmp;
    CHECK(dispatch({"train", "--config", tmp.file("nope.json"), "--out", tmp.file("out")}) == 1);
}

TEST_CASE("train writes config echo, metrics, and checkpoint") {
    TempDir tmp;
    write_file(tmp.file("cfg.json"), tiny_train_json(2, 6).dump(2));
    REQUIRE(dispatch({"train", "--config", tmp.file("cfg.json"), "--out", tmp.file("run")}) == 0);

    CHECK(fs::exists(tmp.file("run/config.json")));
    CHECK(fs::exists(tmp.file("run/metrics.csv")));
    CHECK(fs::exists(tmp.file("run/checkpoint.json")));

    json echo = json::parse(slurp(tmp.file("run/config.json")));
    CHECK(echo["train"]["n_generators"] == 2);
    CHECK(echo["train"]["steps"] == 6);
    CHECK(echo["train"]["seed"] == 5);

    std::string metrics = slurp(tmp.file("run/metrics.csv"));
    CHECK(metrics.rfind("step,objective,d_loss,g_loss_mean\n", 0) == 0);
    CHECK(metrics.find("\n2,") != std::string::npos);  // logged every 2 steps
}

TEST_CASE("train reruns are byte-identical; flags override the config") {
    TempDir tmp;
    write_file(tmp.file("cfg.json"), tiny_train_json(1, 4).dump());

    REQUIRE(dispatch({"train", "--config", tmp.file("cfg.json"), "--out", tmp.file("a")}) == 0);
    REQUIRE(dispatch({"train", "--config", tmp.file("cfg.json"), "--out", tmp.file("b")}) == 0);
    CHECK(slurp(tmp.file("a/metrics.csv")) == slurp(tmp.file("b/metrics.csv")));
    CHECK(slurp(tmp.file("a/checkpoint.json")) == slurp(tmp.file("b/checkpoint.json")));

    REQUIRE(dispatch({"train", "--config", tmp.file("cfg.json"), "--out", tmp.file("c"),
                      "--seed", "77"}) == 0);
    CHECK(slurp(tmp.file("a/metrics.csv")) != slurp(tmp.file("c/metrics.csv")));
    json echo = json::parse(slurp(tmp.file("c/config.json")));
    CHECK(echo["train"]["seed"] == 77);

    REQUIRE(dispatch({"train", "--config", tmp.file("cfg.json"), "--out", tmp.file("d"),
                      "--I", "3"}) == 0);
    json echo_d = json::parse(slurp(tmp.file("d/config.json")));
    CHECK(echo_d["train"]["n_generators"] == 3);
}

TEST_CASE("the seed environment variable fills in when no flag is given") {
    TempDir tmp;
    write_file(tmp.file("cfg.json"), tiny_train_json(1, 2).dump());

    ::setenv("SGAN_SEED", "4242", 1);
    REQUIRE(dispatch({"train", "--config", tmp.file("cfg.json"), "--out", tmp.file("env")}) == 0);
    ::unsetenv("SGAN_SEED");
    json echo = json::parse(slurp(tmp.file("env/config.json")));
    CHECK(echo["train"]["seed"] == 4242);

    ::setenv("SGAN_SEED", "4242", 1);
    REQUIRE(dispatch({"train", "--config", tmp.file("cfg.json"), "--out", tmp.file("env2"),
                      "--seed", "9"}) == 0);
    ::unsetenv("SGAN_SEED");
    json echo2 = json::parse(slurp(tmp.file("env2/config.json")));
    CHECK(echo2["train"]["seed"] == 9);  // explicit flag wins
}

TEST_CASE("eval scores a trained checkpoint deterministically") {
    TempDir tmp;
    write_file(tmp.file("cfg.json"), tiny_train_json(2, 4).dump());
    REQUIRE(dispatch({"train", "--config", tmp.file("cfg.json"), "--out", tmp.file("run")}) == 0);

    REQUIRE(dispatch({"eval", "--checkpoint", tmp.file("run/checkpoint.json"), "--out",
                      tmp.file("e1"), "--n", "400"}) == 0);
    REQUIRE(dispatch({"eval", "--checkpoint", tmp.file("run/checkpoint.json"), "--out",
                      tmp.file("e2"), "--n", "400"}) == 0);
    CHECK(slurp(tmp.file("e1/eval.json")) == slurp(tmp.file("e2/eval.json")));

    json rep = json::parse(slurp(tmp.file("e1/eval.json")));
    CHECK(rep["n_samples"] == 400);
    CHECK(rep.contains("modes_covered"));
    CHECK(rep.contains("hq_fraction"));
    CHECK(rep.contains("entropy"));
    CHECK(rep.contains("dominant_modes"));

    CHECK(dispatch({"eval", "--checkpoint", tmp.file("absent.json")}) == 1);
}

TEST_CASE("gap writes its csv with the documented columns") {
    TempDir tmp;
    write_file(tmp.file("cfg.json"), tiny_train_json(2, 4).dump());
    REQUIRE(dispatch({"train", "--config", tmp.file("cfg.json"), "--out", tmp.file("run")}) == 0);

    REQUIRE(dispatch({"gap", "--checkpoint", tmp.file("run/checkpoint.json"), "--out",
                      tmp.file("g1"), "--K", "5", "--probe-lr", "1e-3"}) == 0);
    std::string csv = slurp(tmp.file("g1/gap.csv"));
    CHECK(csv.rfind("I,K,probe_lr,w_hat,q_hat,gap,valid\n", 0) == 0);
    CHECK(csv.find("2,5,") != std::string::npos);

    REQUIRE(dispatch({"gap", "--checkpoint", tmp.file("run/checkpoint.json"), "--out",
                      tmp.file("g2"), "--K", "5", "--probe-lr", "1e-3"}) == 0);
    CHECK(slurp(tmp.file("g2/gap.csv")) == csv);

    // K = 0 probes nothing and reports a zero gap
    REQUIRE(dispatch({"gap", "--checkpoint", tmp.file("run/checkpoint.json"), "--out",
                      tmp.file("g0"), "--K", "0"}) == 0);
    CHECK(slurp(tmp.file("g0/gap.csv")).find(",0,1") != std::string::npos);
}

TEST_CASE("duality emits closed-form rows for the pm1 family") {
    TempDir tmp;
    REQUIRE(dispatch({"duality", "--family", "pm1", "--I", "1:4", "--out", tmp.path.string()}) ==
            0);
    std::string csv = slurp(tmp.file("duality.csv"));
    CHECK(csv.rfind("I,w_star,q_star,gap,delta_worst,bound,holds\n", 0) == 0);

    std::vector<std::string> lines;
    std::string line;
    for (char ch : csv) {
        if (ch == '\n') {
            lines.push_back(line);
            line.clear();
        } else {
            line += ch;
        }
    }
    REQUIRE(lines.size() == 5);  // header + I=1..4
    CHECK(lines[1].rfind("1,0.5,", 0) == 0);
    CHECK(lines[1].find(",1") != std::string::npos);  // holds
    CHECK(lines[2].rfind("2,0,", 0) == 0);

    REQUIRE(dispatch({"duality", "--family", "pm1", "--I", "1:4", "--out",
                      (tmp.path / "again").string()}) == 0);
    CHECK(slurp((tmp.path / "again" / "duality.csv").string()) == csv);

    // random families honor the bound too
    REQUIRE(dispatch({"duality", "--family", "random", "--I", "1:6", "--seed", "3", "--out",
                      (tmp.path / "rnd").string()}) == 0);
    std::string rnd = slurp((tmp.path / "rnd" / "duality.csv").string());
    for (const char* needle : {"\n1,", "\n2,", "\n3,", "\n4,", "\n5,", "\n6,"})
        CHECK(rnd.find(needle) != std::string::npos);
}

TEST_CASE("duality rejects malformed ranges") {
    CHECK(dispatch({"duality", "--family", "pm1", "--I", "4:1"}) == 1);
    CHECK(dispatch({"duality", "--family", "pm1", "--I", "0:3"}) == 1);
    CHECK(dispatch({"duality", "--family", "pm1", "--I", "abc"}) == 1);
}

TEST_CASE("verify runs its suites and writes a stable report") {
    TempDir tmp;
    CHECK(dispatch({"verify", "--suite", "grad-check", "--seed", "3"}) == 0);
    CHECK(dispatch({"verify", "--suite", "minimax"}) == 0);
    CHECK(dispatch({"verify", "--suite", "caratheodory"}) == 0);

    REQUIRE(dispatch({"verify", "--suite", "infconv", "--out", tmp.file("r1.txt")}) == 0);
    REQUIRE(dispatch({"verify", "--suite", "infconv", "--out", tmp.file("r2.txt")}) == 0);
    std::string rep = slurp(tmp.file("r1.txt"));
    CHECK(rep == slurp(tmp.file("r2.txt")));
    CHECK(rep.find("ok infconv") != std::string::npos);
    CHECK(rep.find("all checks passed") != std::string::npos);
}

TEST_CASE("plot renders a deterministic scatter with one color per generator") {
    TempDir tmp;
    write_file(tmp.file("cfg.json"), tiny_train_json(8, 3).dump());
    REQUIRE(dispatch({"train", "--config", tmp.file("cfg.json"), "--out", tmp.file("run")}) == 0);

    REQUIRE(dispatch({"plot", "--checkpoint", tmp.file("run/checkpoint.json"), "--out",
                      tmp.file("s1.svg"), "--n", "400"}) == 0);
    REQUIRE(dispatch({"plot", "--checkpoint", tmp.file("run/checkpoint.json"), "--out",
                      tmp.file("s2.svg"), "--n", "400"}) == 0);
    std::string svg = slurp(tmp.file("s1.svg"));
    CHECK(svg == slurp(tmp.file("s2.svg")));
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);

    std::set<std::string> fills;
    std::size_t pos = 0;
    while ((pos = svg.find("fill=\"#", pos)) != std::string::npos) {
        fills.insert(svg.substr(pos + 6, 8));
        pos += 7;
    }
    CHECK(fills.size() >= 8);  // 8 generator colors (plus possibly the center marker)

    REQUIRE(dispatch({"plot", "--checkpoint", tmp.file("run/checkpoint.json"), "--out",
                      tmp.file("s0.svg"), "--n", "0"}) == 0);
    std::string empty_svg = slurp(tmp.file("s0.svg"));
    CHECK(empty_svg.rfind("<svg", 0) == 0);
    CHECK(empty_svg.find("</svg>") != std::string::npos);
}

TEST_CASE("the svg scatter helper is stable and handles empty input") {
    sgan::Tensor x(3, 2);
    x.at(0, 0) = -1.0;
    x.at(1, 1) = 2.0;
    x.at(2, 0) = 0.5;
    std::vector<int> labels{0, 1, 12};  // label 12 wraps around the palette
    std::vector<std::array<double, 2>> centers{{0.0, 0.0}, {1.0, 1.0}};
    std::string a = sgan::svg::scatter(x, labels, centers);
    std::string b = sgan::svg::scatter(x, labels, centers);
    CHECK(a == b);
    CHECK(a.rfind("<svg", 0) == 0);

    std::string empty = sgan::svg::scatter(sgan::Tensor(0, 2), {}, centers);
    CHECK(empty.rfind("<svg", 0) == 0);
    CHECK(empty.find("</svg>") != std::string::npos);
}
