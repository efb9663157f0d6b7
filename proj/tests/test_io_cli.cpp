#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "gme/cli.hpp"
#include "test_support.hpp"

using namespace gme;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = fs::temp_directory_path() / ("gmecert_" + tag + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "gmecert");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

io::json parse_out(const Result& r) { return io::json::parse(r.out); }

}  // namespace

TEST(StateFile, RoundTripIsBitExact) {
    TempDir dir("roundtrip");
    random::Rng rng(31);
    const auto s = PartyStructure({{"A", 2}, {"B", 3}});
    const auto psi = random::pure(rng, s);
    io::write_state(dir / "pure.json", psi);
    const auto back = std::get<PureState>(io::read_state(dir / "pure.json"));
    EXPECT_EQ(back.structure(), psi.structure());
    for (Index i = 0; i < psi.amplitudes().size(); ++i) EXPECT_EQ(back.amplitudes()(i), psi.amplitudes()(i));

    const auto rho = random::density(rng, s, 3);
    io::write_state(dir / "mixed.json", rho);
    const auto rb = std::get<DensityOperator>(io::read_state(dir / "mixed.json"));
    EXPECT_TRUE((rb.matrix().array() == rho.matrix().array()).all());
    EXPECT_FALSE(fs::exists(dir / "mixed.json.tmp"));
}

TEST(StateFile, RowMajorLayout) {
    const auto psi = PureState::from_kets(PartyStructure({{"A", 2}, {"B", 3}}), {{"12", 1.0}});
    const auto j = io::state_json(psi);
    EXPECT_EQ(j["kind"], "pure");
    EXPECT_EQ(j["data"][5][0].get<double>(), 1.0);

    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 2.0;
    m(0, 1) = Complex(0.0, 1.0);
    m(1, 0) = Complex(0.0, -1.0);
    m(1, 1) = 1.0;
    const auto mj = io::state_json(DensityOperator(m, PartyStructure({{"A", 2}})));
    EXPECT_EQ(mj["data"][1][1].get<double>(), 1.0);
    EXPECT_EQ(mj["data"][2][1].get<double>(), -1.0);
}

TEST(StateFile, SyntaxErrorNamesByteOffset) {
    const std::string text = R"({"parties": [{"label": "A", "dim": 2}], "kind": "pure", "data": [[1, 0], [0 0]]})";
    try {
        io::parse_state(text);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.byte(), text.find("0 0") + 3);
        EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
    }
}

TEST(StateFile, SchemaErrors) {
    const std::string no_kind = R"({"parties": [{"label": "A", "dim": 2}], "data": [[1, 0], [0, 0]]})";
    EXPECT_THROW(io::parse_state(no_kind), ParseError);
    const std::string short_data = R"({"parties": [{"label": "A", "dim": 2}], "kind": "pure", "data": [[1, 0]]})";
    try {
        io::parse_state(short_data);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.byte(), short_data.find("\"data\""));
    }
    EXPECT_THROW(io::parse_state(R"({"parties": [{"label": "A", "dim": 2}], "kind": "other", "data": []})"), ParseError);
    EXPECT_THROW(io::parse_state(R"({"parties": [{"label": "A"}], "kind": "pure", "data": []})"), ParseError);
    EXPECT_THROW(io::parse_state(R"([1, 2])"), ParseError);
    EXPECT_THROW(io::parse_state(R"({"parties": [{"label": "A", "dim": 8192}], "kind": "pure", "data": []})"),
                 DimensionError);
    EXPECT_THROW(io::parse_state(R"({"parties": [{"label": "A", "dim": 2}], "kind": "mixed",
                                     "data": [[1, 0], [1, 0], [0, 0], [1, 0]]})"),
                 PreconditionError);
    EXPECT_THROW(io::parse_state(R"({"parties": [{"label": "A", "dim": 2}, {"label": "A", "dim": 2}], "kind": "pure",
                                     "data": [[1, 0], [0, 0], [0, 0], [0, 0]]})"),
                 Error);
}

TEST(Cli, PartitionOfWorkedState) {
    TempDir dir("partition");
    ASSERT_EQ(run({"build", "--preset", "psi3", "--out", dir / "psi3.json"}).code, 0);
    const auto r = run({"partition", dir / "psi3.json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = parse_out(r);
    EXPECT_EQ(j["complete_partition"].dump(), "[[1],[2,3]]");
    EXPECT_EQ(j["factorizing_cuts"].dump(), "[[1]]");
    EXPECT_FALSE(j["gme"].get<bool>());
}

TEST(Cli, BinaryExitCodes) {
    TempDir dir("binary");
    const std::string bin = GMECERT_PATH;
    auto sh = [&](const std::string& args) {
        const int status = std::system((bin + " " + args + " > " + (dir / "log.txt") + " 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    EXPECT_EQ(sh("build --preset maxmixed --parties 3 --out " + (dir / "mm.json")), 0);
    EXPECT_EQ(sh("certify " + (dir / "mm.json")), 2);
    EXPECT_EQ(sh("build --preset psi3 --out " + (dir / "psi3.json")), 0);
    EXPECT_EQ(sh("partition " + (dir / "psi3.json")), 0);
    EXPECT_NE(io::read_text(dir / "log.txt").find("\"complete_partition\""), std::string::npos);
    io::write_atomic(dir / "bad.json", "{\"parties\": [");
    EXPECT_EQ(sh("certify " + (dir / "bad.json")), 1);
    EXPECT_NE(io::read_text(dir / "log.txt").find("byte"), std::string::npos);
    EXPECT_EQ(sh("frobnicate"), 1);
    EXPECT_EQ(sh("--help"), 0);
}

TEST(Cli, MaximallyMixedIsInconclusive) {
    TempDir dir("mm");
    ASSERT_EQ(run({"build", "--preset", "maxmixed", "--parties", "3", "--out", dir / "mm.json"}).code, 0);
    const auto r = run({"certify", dir / "mm.json"});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(parse_out(r)["verdict"], "inconclusive");
}

TEST(Cli, MalformedAndMissingInputs) {
    TempDir dir("bad");
    io::write_atomic(dir / "bad.json", "{\"parties\": [{\"label\": \"A\", \"dim\": 2}], \"kind\": \"pure\", \"data\": [[1, 0],]}");
    const auto r = run({"certify", dir / "bad.json"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("at byte"), std::string::npos);
    EXPECT_EQ(run({"certify", dir / "missing.json"}).code, 1);
    EXPECT_EQ(run({"build", "--preset", "nope", "--out", dir / "x.json"}).code, 1);
    EXPECT_EQ(run({"build"}).code, 1);
    EXPECT_EQ(run({"werner", "--p", "2"}).code, 1);
    EXPECT_EQ(run({"certify", dir / "bad.json", "--sdp-tol", "-1"}).code, 1);
}

TEST(Cli, WernerAcceptsNegativeParameter) {
    TempDir dir("werner");
    const auto r = run({"werner", "--d", "2", "--p", "-0.75", "--out", dir / "w.json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = parse_out(r);
    EXPECT_EQ(j["band"], "npt_one_copy_distillable");
    EXPECT_EQ(j["ppt"], "npt");
    EXPECT_NEAR(j["twirl_p"].get<double>(), -0.75, 1e-12);
    const auto w = io::as_density(io::read_state(dir / "w.json"));
    EXPECT_LT((w.matrix() - werner(2, -0.75).matrix()).norm(), 1e-15);
    const auto c = run({"certify", dir / "w.json"});
    EXPECT_EQ(c.code, 0);
    EXPECT_EQ(parse_out(c)["verdict"], "gme");
}

TEST(Cli, DemoReportsWitness) {
    TempDir dir("demo");
    const auto r = run({"demo-theorem5", "--x1", "1", "--x2", "1", "--out", dir.path().string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = io::json::parse(io::read_text(dir / "report.json"));
    EXPECT_EQ(j["verdict"], "gme");
    EXPECT_EQ(j["evidence"]["type"], "witness");
    EXPECT_LT(j["evidence"]["value"].get<double>(), -1e-7);
    EXPECT_EQ(j["evidence"]["witness"].size(), 256u);
    EXPECT_TRUE(j["rho_sdp"]["certifies_gme"].get<bool>());

    const auto sigma = io::as_density(io::read_state(dir / "sigma.json"));
    EXPECT_NEAR(sigma.matrix()(0, 0).real(), 4.0, 1e-12);
    EXPECT_TRUE(fs::exists(dir / "rho.json"));
}

TEST(Cli, BuildReadCertifyMatchesInMemory) {
    TempDir dir("chain");
    ASSERT_EQ(run({"build", "--preset", "psi3", "--out", dir / "a.json"}).code, 0);
    ASSERT_EQ(run({"build", "--preset", "phi3", "--out", dir / "b.json"}).code, 0);
    const auto k = run({"build", "--op", "kron", "--a", dir / "a.json", "--b", dir / "b.json", "--out", dir / "k.json"});
    ASSERT_EQ(k.code, 0) << k.err;
    const auto disk = run({"certify", dir / "k.json"});
    ASSERT_EQ(disk.code, 0) << disk.err;

    const auto a = std::get<PureState>(cli::preset_state("psi3", 3));
    const auto b = std::get<PureState>(cli::preset_state("phi3", 3));
    const auto mem = certify(DensityOperator::projector(kronecker_product(a, b)));
    EXPECT_EQ(parse_out(disk)["verdict"], to_string(mem.verdict));
    EXPECT_EQ(parse_out(disk)["verdict"], "gme");

    // a mixed chain through the kc product
    ASSERT_EQ(run({"werner", "--p", "-0.9", "--out", dir / "w.json"}).code, 0);
    EXPECT_EQ(run({"build", "--op", "kc", "--a", dir / "w.json", "--b", dir / "w.json", "--out", dir / "kc.json"}).code, 1);
    ASSERT_EQ(run({"build", "--op", "normalize", "--a", dir / "w.json", "--labels", "B,C2", "--out", dir / "w2.json"}).code, 0);
    ASSERT_EQ(run({"build", "--op", "kc", "--a", dir / "w.json", "--b", dir / "w2.json", "--out", dir / "kc.json"}).code, 0);
    const auto kc = io::as_density(io::read_state(dir / "kc.json"));
    EXPECT_EQ(kc.structure().dims(), (std::vector<int>{2, 2, 4}));
    EXPECT_EQ(kc.structure().label(2), "BC2");
    const auto w = werner(2, -0.9);
    EXPECT_LT((kc.matrix() - kc_product(w, relabel(w, {"B", "C2"})).matrix()).norm(), 1e-15);
}

TEST(Cli, ReportsEmbedConfigAndAreDeterministic) {
    TempDir dir("det");
    const std::vector<std::string> args{"harness", "--family", "rank2", "--trials", "2", "--seed", "7",
                                        "--sdp-tol", "1e-6", "--out", dir.path().string()};
    const auto r1 = run(args);
    ASSERT_EQ(r1.code, 0) << r1.err;
    const std::string first = io::read_text(dir / "harness_rank2.json");
    const auto r2 = run(args);
    EXPECT_EQ(io::read_text(dir / "harness_rank2.json"), first);
    EXPECT_EQ(r1.out, r2.out);
    const auto j = io::json::parse(first);
    EXPECT_EQ(j["config"]["seed"], 7);
    EXPECT_EQ(j["config"]["sdp_tol"].get<double>(), 1e-6);
    EXPECT_EQ(j["instances"].size(), 2u);

    ASSERT_EQ(run({"build", "--preset", "ghz", "--out", dir / "g.json"}).code, 0);
    const auto c = run({"certify", dir / "g.json", "--rank-tol", "1e-9"});
    const auto cj = parse_out(c);
    EXPECT_EQ(cj["tolerances"]["rank"].get<double>(), 1e-9);
    EXPECT_EQ(cj["tolerances"]["psd"].get<double>(), Tolerances{}.psd);
    EXPECT_EQ(cj["evidence"]["partition"].dump(), "[[1,2,3]]");
}

TEST(Cli, HarnessWernerTableRecordsStatus) {
    TempDir dir("harness");
    const auto r = run({"harness", "--family", "werner2", "--eps", "1e-3", "--trials", "1", "--out", dir.path().string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = io::json::parse(io::read_text(dir / "harness_werner2.json"));
    ASSERT_EQ(j["instances"].size(), 1u);
    EXPECT_EQ(j["instances"][0]["route"], "ppt_mixture_program");
    EXPECT_EQ(j["instances"][0]["sdp_status"], "converged");
}

TEST(Cli, OutputDirectoryFromEnvironment) {
    TempDir dir("env");
    ::setenv("GME_OUT_DIR", dir.path().c_str(), 1);
    const auto r = run({"build", "--preset", "bell"});
    ::unsetenv("GME_OUT_DIR");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "state.json"));
}
