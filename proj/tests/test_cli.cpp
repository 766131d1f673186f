#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string output;
};

// Runs the CLI with `args`, capturing stdout and stderr together.
RunResult run(const std::string& args) {
    const std::string command = std::string(CHAINLENS_CLI_PATH) + " " + args + " 2>&1";
    RunResult result;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) result.output.append(buf.data(), n);
    const int status = pclose(pipe);
    result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Fresh scratch directory per test case, removed afterwards.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("chainlens_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& leaf) const { return (dir / leaf).string(); }
};

}  // namespace

TEST_CASE("unknown model is a usage error listing the valid names") {
    Scratch tmp("model");
    auto r = run("train --model Foo --split " + tmp.dir.string());
    CHECK(r.code == 1);
    for (const char* name : {"TransE", "RotatE", "RESCAL", "ComplEx", "TuckER"})
        CHECK(r.output.find(name) != std::string::npos);
}

TEST_CASE("missing arguments are usage errors") {
    CHECK(run("").code == 1);
    CHECK(run("analyze").code == 1);
    CHECK(run("no-such-command").code == 1);
}

TEST_CASE("generate is deterministic and writes a manifest") {
    Scratch tmp("generate");
    REQUIRE(run("generate --seed 7 --out " + tmp / "a.tsv").code == 0);
    REQUIRE(run("generate --seed 7 --out " + tmp / "b.tsv").code == 0);
    CHECK(slurp(tmp / "a.tsv") == slurp(tmp / "b.tsv"));

    auto ma = nlohmann::json::parse(slurp(tmp / "a.tsv.manifest.json"));
    auto mb = nlohmann::json::parse(slurp(tmp / "b.tsv.manifest.json"));
    CHECK(ma.contains("duration_seconds"));
    for (auto* m : {&ma, &mb}) {
        m->erase("duration_seconds");
        m->erase("outputs");
        m->erase("inputs");
    }
    CHECK(ma == mb);
    CHECK(ma["config"]["seed"] == "7");

    REQUIRE(run("generate --seed 8 --out " + tmp / "c.tsv").code == 0);
    CHECK(slurp(tmp / "a.tsv") != slurp(tmp / "c.tsv"));
    CHECK(run("validate " + tmp / "a.tsv").code == 0);
}

TEST_CASE("unsatisfiable generator config exits with a data error naming the relation") {
    Scratch tmp("badgen");
    write_file(tmp / "gen.cfg", "relations.same_as = 100000\n");
    auto r = run("generate --config " + tmp / "gen.cfg" + " --out " + tmp / "n.tsv");
    CHECK(r.code == 2);
    CHECK(r.output.find("same_as") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp / "n.tsv"));

    write_file(tmp / "typo.cfg", "tier_1 = 5\n");
    auto typo = run("generate --config " + tmp / "typo.cfg" + " --out " + tmp / "n.tsv");
    CHECK(typo.code == 2);
    CHECK(typo.output.find("tier_1") != std::string::npos);
}

TEST_CASE("infeasible split exits with code 3") {
    Scratch tmp("star");
    std::string star;
    for (int i = 1; i <= 8; ++i)
        star += "SUP-" + std::to_string(i) + "\tSupplier\tsupplies_to\tHUB\tSupplier\n";
    write_file(tmp / "star.tsv", star);
    auto r = run("split " + tmp / "star.tsv" + " --out " + tmp / "split");
    CHECK(r.code == 3);
}

TEST_CASE("malformed triple file is a data error") {
    Scratch tmp("malformed");
    write_file(tmp / "bad.tsv", "CTY-1\tCountry\tsupplies_to\tSUP-1\tSupplier\n");
    CHECK(run("validate " + tmp / "bad.tsv").code == 2);
    CHECK(run("split " + tmp / "bad.tsv" + " --out " + tmp / "s").code == 2);
}

TEST_CASE("pipeline: split, train, eval, analyze, export") {
    Scratch tmp("pipeline");
    const auto net = tmp / "net.tsv";
    REQUIRE(run("generate --out " + net).code == 0);

    auto split = run("split " + net + " --out " + tmp / "split" + " --check");
    REQUIRE(split.code == 0);
    CHECK(split.output.find("transductive check: PASS") != std::string::npos);
    for (const char* f : {"train.tsv", "valid.tsv", "test.tsv", "manifest.json"})
        CHECK(fs::exists(tmp.dir / "split" / f));

    auto train = run("train --model TransE --dim 16 --epochs 10 --split " + tmp / "split" + " --out " +
                     tmp / "model.ckpt");
    REQUIRE(train.code == 0);
    CHECK(fs::exists(tmp / "model.ckpt"));
    CHECK(fs::exists(tmp / "model.ckpt.history.csv"));

    auto eval = run("eval --setting both --checkpoint " + tmp / "model.ckpt" + " --split " + tmp / "split" +
                    " --out " + tmp / "eval");
    REQUIRE(eval.code == 0);
    CHECK(eval.output.find(": PASS") != std::string::npos);
    CHECK(fs::exists(tmp.dir / "eval" / "results.txt"));

    auto analyze = run("analyze " + net + " --out " + tmp / "an");
    REQUIRE(analyze.code == 0);
    const auto csv = slurp(tmp.dir / "an" / "criticality.csv");
    CHECK(csv.find(",HUB,") != std::string::npos);
    CHECK(fs::exists(tmp.dir / "an" / "summary.txt"));

    SUBCASE("threshold above the maximum score flags nothing") {
        REQUIRE(run("analyze " + net + " --threshold 51 --out " + tmp / "an51").code == 0);
        std::istringstream in(slurp(tmp.dir / "an51" / "criticality.csv"));
        std::string line;
        std::getline(in, line);
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            ++rows;
            CHECK(line.substr(line.rfind(',') + 1) == "0");
        }
        CHECK(rows == 600);
    }

    SUBCASE("export in every format") {
        for (const char* fmt : {"dot", "graphml", "json"}) {
            CAPTURE(fmt);
            const auto out = tmp / (std::string("g.") + fmt);
            REQUIRE(run("export " + net + " --report " + tmp / "an/criticality.csv" + " --format " + fmt +
                        " --out " + out)
                        .code == 0);
            CHECK(fs::file_size(out) > 0);
        }
        CHECK(run("export " + net + " --report " + tmp / "an/criticality.csv" + " --format svg").code == 1);
    }

    SUBCASE("export rejects a report from a different graph") {
        std::string truncated = csv.substr(0, csv.rfind('\n', csv.size() - 2) + 1);
        write_file(tmp / "short.csv", truncated);
        auto r = run("export " + net + " --report " + tmp / "short.csv" + " --out " + tmp / "x.dot");
        CHECK(r.code != 0);
    }

    SUBCASE("eval rejects a checkpoint for a different vocabulary") {
        write_file(tmp / "other.tsv", "A\tSupplier\tsupplies_to\tB\tSupplier\n"
                                      "B\tSupplier\tsupplies_to\tC\tSupplier\n"
                                      "C\tSupplier\tsupplies_to\tA\tSupplier\n"
                                      "A\tSupplier\tsupplies_to\tC\tSupplier\n"
                                      "C\tSupplier\tsupplies_to\tB\tSupplier\n"
                                      "B\tSupplier\tsupplies_to\tA\tSupplier\n");
        REQUIRE(run("split " + tmp / "other.tsv" + " --valid 0.2 --test 0.2 --out " + tmp / "other").code == 0);
        auto r = run("eval --checkpoint " + tmp / "model.ckpt" + " --split " + tmp / "other" + " --out " + tmp / "oe");
        CHECK(r.code == 2);
    }
}
