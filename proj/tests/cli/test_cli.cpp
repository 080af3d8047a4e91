#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "fbfm/fbfm.hpp"
#include "support/oracles.hpp"

#ifndef FBFM_CLI_PATH
#error "FBFM_CLI_PATH must point at the fbfm executable"
#endif

using namespace fbfm;
namespace fs = std::filesystem;

namespace {

struct result {
    int status = -1;
    std::string out;
};

/// Runs the CLI with stderr discarded and returns its exit status and stdout.
result run(const std::string& args) {
    const std::string cmd = std::string(FBFM_CLI_PATH) + " " + args + " 2>/dev/null";
    result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::map<std::string, std::string> key_values(const std::string& out) {
    std::map<std::string, std::string> kv;
    std::istringstream in(out);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

class CliTest : public ::testing::Test {
   protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("fbfm_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string file(const std::string& name, const std::string& content) const {
        const auto p = (dir_ / name).string();
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, BuildAndCountBanana) {
    const auto text = file("banana.txt", "BANANA");
    const auto idx = path("banana.idx");
    const auto b = run("build " + text + " -o " + idx + " --variant fixed-rrr --block-size 3");
    ASSERT_EQ(b.status, 0);
    const auto kv = key_values(b.out);
    EXPECT_EQ(kv.at("n"), "7");
    EXPECT_EQ(kv.at("sigma"), "4");
    EXPECT_EQ(kv.at("blocks"), "3");
    EXPECT_TRUE(fs::exists(idx));

    const auto c = run("count " + idx + " ANA BANANA NAB Q");
    EXPECT_EQ(c.status, 0);
    EXPECT_EQ(c.out, "2\n1\n0\n0\n");

    const auto pats = file("pats.txt", "A\nNA\nBANANAS\n");
    EXPECT_EQ(run("count " + idx + " -f " + pats).out, "3\n2\n0\n");
}

TEST_F(CliTest, DefaultBlockSizeForFixedVariant) {
    std::string body(5000, 'a');
    for (std::size_t i = 0; i < body.size(); i += 7) body[i] = 'b';
    const auto text = file("t.txt", body);
    const auto r = run("build " + text + " -o " + path("t.idx") + " --variant fixed");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(key_values(r.out).at("block_size"), std::to_string(default_block_size(5001, 3)));
}

TEST_F(CliTest, UserErrorsExitOne) {
    EXPECT_EQ(run("build " + path("missing.txt") + " -o " + path("x.idx")).status, 1);
    EXPECT_EQ(run("build " + file("empty.txt", "") + " -o " + path("x.idx")).status, 1);
    EXPECT_EQ(run("build " + file("a.txt", "abc") + " -o " + path("x.idx") + " --variant afmi").status, 1);
    EXPECT_EQ(run("count " + path("missing.idx") + " a").status, 1);
    EXPECT_EQ(run("stats " + file("junk.idx", "FBFMIDX1 not really")).status, 1);
    EXPECT_EQ(run("frobnicate").status, 1);
    EXPECT_EQ(run("").status, 1);
    EXPECT_EQ(run("--help").status, 0);
}

TEST_F(CliTest, StatsComponentsSumToTotalAndMatchLibrary) {
    std::mt19937_64 rng(5);
    std::string body;
    for (int i = 0; i < 20000; ++i) body += "ACGT"[rng() % 4];
    const auto text = file("dna.txt", body);
    for (const char* v : {"ssa", "ssa-rrr", "fixed", "fixed-rrr"}) {
        const auto idx = path(std::string(v) + ".idx");
        ASSERT_EQ(run("build " + text + " -o " + idx + " --variant " + v + " --block-size 1000").status, 0);
        const auto s = run("stats " + idx);
        ASSERT_EQ(s.status, 0);
        const auto kv = key_values(s.out);
        std::size_t sum = 0;
        for (const char* k : {"wavelet_payload", "rank_directories", "boundary_occ", "topology", "c_array", "remap",
                              "header"})
            sum += std::stoull(kv.at(k));
        EXPECT_EQ(sum, std::stoull(kv.at("total")));

        index_config cfg;
        cfg.variant = *parse_variant(v);
        cfg.block_size = 1000;
        const auto lib = fm_index::build(Text::from_bytes(body), cfg).size_report();
        EXPECT_EQ(std::stoull(kv.at("total")), lib.total()) << v;
    }
}

TEST_F(CliTest, BenchIsDeterministicAndCsvShaped) {
    std::mt19937_64 rng(9);
    std::string body;
    for (int i = 0; i < 30000; ++i) body += static_cast<char>('a' + rng() % 5);
    const auto text = file("t.txt", body);
    const auto idx = path("t.idx");
    ASSERT_EQ(run("build " + text + " -o " + idx + " --variant fixed --block-size 500").status, 0);
    const auto r = run("bench " + idx + " " + text + " --patterns 300 --length 8 --repeats 2");
    ASSERT_EQ(r.status, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "variant,b,bits_per_symbol,mean_us");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(line.rfind("fixed,500,", 0), 0u) << line;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3);
    }
    EXPECT_EQ(rows, 2);

    const std::string cmd = std::string(FBFM_CLI_PATH) + " bench " + idx + " " + text +
                            " --patterns 300 --length 8 --repeats 1 --threads 3 2>&1 >/dev/null | grep total_matches";
    auto capture = [&] {
        std::string out;
        FILE* p = popen(cmd.c_str(), "r");
        char buf[512];
        while (std::fgets(buf, sizeof buf, p)) out += buf;
        pclose(p);
        return out;
    };
    const auto first = capture();
    EXPECT_FALSE(first.empty());
    EXPECT_EQ(first, capture());
    EXPECT_EQ(run("bench " + idx + " " + file("other.txt", "xyz") + " --patterns 5").status, 1);
}

TEST_F(CliTest, EntropyMatchesLibrary) {
    const auto r = run("entropy " + file("banana.txt", "BANANA") + " --k-max 3");
    ASSERT_EQ(r.status, 0);
    const auto kv = key_values(r.out);
    EXPECT_NEAR(std::stod(kv.at("H0")), 1.8424, 5e-5);
    EXPECT_EQ(kv.at("n"), "7");
    double prev = std::stod(kv.at("H0"));
    for (const char* k : {"H1", "H2", "H3"}) {
        const double h = std::stod(kv.at(k));
        EXPECT_LE(h, prev + 1e-12);
        prev = h;
    }
    EXPECT_NEAR(std::stod(kv.at("H2")), hk(Text::from_bytes("BANANA"), 2), 1e-6);
}

TEST_F(CliTest, VerifyBoundsPasses) {
    std::mt19937_64 rng(11);
    const auto t = oracle::markov2_text(rng, 20000, 8);
    std::string body;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) body += static_cast<char>('a' + t.data()[i]);
    const auto text = file("m.txt", body);
    for (std::size_t k : {0u, 1u, 2u, 3u}) {
        const auto r = run("verify-bounds " + text + " --k " + std::to_string(k) + " --b 256");
        EXPECT_EQ(r.status, 0) << r.out;
        EXPECT_NE(r.out.find("context_identity PASS"), std::string::npos);
        EXPECT_NE(r.out.find("block_bound PASS"), std::string::npos);
        if (k == 0) {
            EXPECT_EQ(key_values(r.out).at("context_residual"), "0.000e+00");
        }
    }
    EXPECT_EQ(run("verify-bounds " + text + " --b 0").status, 1);
}
