#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ehrlab/config.hpp"
#include "ehrlab/report.hpp"

using namespace ehrlab;
using nlohmann::json;

namespace {

// Parses and returns the JSON pointer of the config error, or "" when none.
std::string error_at(const json& doc) {
    try {
        parse_scenario(doc);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::config) << e.what();
        return e.where();
    }
    return "";
}

json certify_doc() {
    return json::parse(R"({
        "schema_version": 1, "job": "certify",
        "space": {"kind": "lp", "p": 2},
        "family": {"mode": "coordinate", "dim": 4},
        "operator": {"kind": "diagonal", "lambda": [1, 0.5, 0.25, 0.125]},
        "params": {"eps_grid": [0.5, 0.25], "samples": 100}
    })");
}

} // namespace

TEST(Config, ParsesCertifyScenario) {
    const auto sc = parse_scenario(certify_doc());
    EXPECT_EQ(sc.job, Job::certify);
    ASSERT_TRUE(sc.op);
    EXPECT_EQ(sc.op->in_dim(), 4u);
    EXPECT_EQ(sc.family.family.mode, FamilyMode::coordinate);
    EXPECT_EQ(sc.family.family.dim, 4u);
    EXPECT_EQ(sc.eps_grid, (std::vector<double>{0.5, 0.25}));
    EXPECT_EQ(sc.sampler.random_samples, 100u);
    EXPECT_TRUE(sc.norm2.very_weak);
}

TEST(Config, ErrorsCarryJsonPointer) {
    auto d = certify_doc();
    d["bogus"] = 1;
    EXPECT_EQ(error_at(d), "/bogus");

    d = certify_doc();
    d["operator"]["lambda"][2] = "x";
    EXPECT_EQ(error_at(d), "/operator/lambda/2");

    d = certify_doc();
    d["operator"]["lambda"][1] = -0.5;
    EXPECT_EQ(error_at(d), "");  // negative diagonal entries are allowed

    d = certify_doc();
    d["params"]["eps_grid"][1] = 0;
    EXPECT_EQ(error_at(d), "/params/eps_grid/1");

    d = certify_doc();
    d.erase("operator");
    EXPECT_EQ(error_at(d), "/operator");

    d = certify_doc();
    d["job"] = "prove";
    EXPECT_EQ(error_at(d), "/job");

    d = certify_doc();
    d["schema_version"] = 2;
    EXPECT_EQ(error_at(d), "/schema_version");

    d = certify_doc();
    d["space"] = {{"kind", "lp"}, {"p", 0.5}};
    EXPECT_EQ(error_at(d), "/space");

    d = certify_doc();
    d["family"]["mode"] = "sparse";
    EXPECT_EQ(error_at(d), "/family/mode");

    d = certify_doc();
    d["params"]["samples"] = 1.5;
    EXPECT_EQ(error_at(d), "/params/samples");
}

TEST(Config, NormKindsRoundTrip) {
    const json docs[] = {
        json::parse(R"({"kind": "lp", "p": 2})"),
        json::parse(R"({"kind": "lp", "p": "inf", "dim": 3})"),
        json::parse(R"({"kind": "lp", "p": 1.5})"),
        json::parse(R"({"kind": "weighted-lp", "p": 2, "weights": [1, 0.5, 0.25]})"),
        json::parse(R"({"kind": "sobolev-h1", "h": 0.25, "dim": 3})"),
    };
    const std::vector<double> u{1.0, -2.0, 0.5};
    for (const auto& j : docs) {
        const NormSpec a = config::parse_norm(config::Node(j, "/space"));
        const NormSpec b = config::parse_norm(config::Node(config::norm_to_json(a), "/space"));
        EXPECT_EQ(norm(a, u), norm(b, u)) << j.dump();
    }
    const json bad = json::parse(R"({"kind": "weighted-lp", "weights": [1, 0]})");
    try {
        config::parse_norm(config::Node(bad, "/space"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::config);
        EXPECT_EQ(e.where(), "/space");
    }
}

TEST(Config, EveryOperatorKind) {
    const NormSpec l2 = NormSpec::lp(2);
    const auto dir = std::filesystem::temp_directory_path() / "ehrlab_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "k.csv");
        os << "1,0\n0,1\n";
    }
    const std::pair<const char*, std::size_t> cases[] = {
        {R"({"kind": "diagonal", "lambda": [1, 2]})", 2},
        {R"({"kind": "geometric-diagonal", "dim": 5, "ratio": 0.5})", 5},
        {R"({"kind": "dense", "rows": [[1, 2, 3], [4, 5, 6]]})", 3},
        {R"({"kind": "kernel", "csv": "k.csv", "h": 0.5})", 2},
        {R"({"kind": "green-kernel", "n": 6})", 6},
        {R"({"kind": "shift", "dim": 7})", 7},
        {R"({"kind": "sobolev-embedding", "dim": 4, "h": 0.2})", 4},
        {R"({"kind": "inclusion", "dim": 3, "codomain": {"kind": "weighted-lp", "weights": [1, 2, 3]}})", 3},
    };
    for (const auto& [text, in_dim] : cases) {
        const json j = json::parse(text);
        const auto T = config::parse_operator(config::Node(j, "/operator"), l2, dir);
        EXPECT_EQ(T.in_dim(), in_dim) << text;
    }
    const json missing = json::parse(R"({"kind": "kernel", "csv": "nope.csv", "h": 0.5})");
    try {
        config::parse_operator(config::Node(missing, "/operator"), l2, dir);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.where(), "/operator/csv");
    }
    const json ragged = json::parse(R"({"kind": "dense", "rows": [[1, 2], [3]]})");
    try {
        config::parse_operator(config::Node(ragged, "/operator"), l2, dir);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::config);
        EXPECT_EQ(e.where(), "/operator");
    }
    std::filesystem::remove_all(dir);
}

TEST(Config, Sequences) {
    const DualFamily fam{FamilyMode::dense_rational, NormSpec::lp(2), 8};
    auto parse = [&](const char* text) {
        const json j = json::parse(text);
        return config::parse_sequence(config::Node(j, "/params/sequence"), fam);
    };
    EXPECT_EQ(parse(R"({"rule": "basis", "dim": 8})").horizon, 8u);
    EXPECT_EQ(parse(R"({"rule": "strongly-convergent", "target": [1, 2], "rate": 0.5, "horizon": 9})").rule,
              SequenceRule::strongly_convergent);
    EXPECT_EQ(parse(R"({"rule": "appendix", "horizon": 12, "dim_schedule": {"offset": 2}})").schedule.offset, 2u);
    const auto c = parse(R"({"rule": "custom", "terms": [[1], {"basis": 2, "dim": 3}], "limit": [0]})");
    EXPECT_EQ(term(c, 2).vec(), Element::basis(2, 3).vec());
    const json bad = json::parse(R"({"rule": "strongly-convergent", "target": [1], "rate": 1.5, "horizon": 9})");
    try {
        config::parse_sequence(config::Node(bad, "/params/sequence"), fam);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.where(), "/params/sequence/rate");
    }
}

TEST(Config, JobRequirements) {
    json d = json::parse(R"({"job": "norm"})");
    EXPECT_EQ(error_at(d), "/params/u");
    d = json::parse(R"({"job": "classify", "params": {}})");
    EXPECT_EQ(error_at(d), "/params/sequence");
    d = json::parse(R"({"job": "three-space", "operator": {"kind": "sobolev-embedding", "dim": 4, "h": 0.2}})");
    EXPECT_EQ(error_at(d), "/tau");
    d["tau"] = json::parse(R"({"kind": "inclusion", "dim": 5})");
    EXPECT_EQ(error_at(d), "/tau");
    d = json::parse(R"({"job": "counterexample"})");
    EXPECT_EQ(error_at(d), "");
}

TEST(Config, ShippedScenariosLoad) {
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(EHRLAB_SCENARIO_DIR)) {
        if (entry.path().extension() != ".json") continue;
        EXPECT_NO_THROW(load_scenario(entry.path())) << entry.path();
        ++count;
    }
    EXPECT_GE(count, 7u);
    EXPECT_THROW(load_scenario("/nonexistent/x.json"), Error);
}

TEST(Report, CsvQuotingAndNumbers) {
    report::CsvTable t({"a", "b"});
    t.row().add(1.0).add("x,y");
    t.row().add("he said \"hi\"").add("line\nbreak");
    std::ostringstream os;
    t.write(os);
    EXPECT_EQ(os.str(), "a,b\r\n1,\"x,y\"\r\n\"he said \"\"hi\"\"\",\"line\nbreak\"\r\n");
    EXPECT_EQ(report::format_number(0.1), "0.1");
    EXPECT_EQ(report::format_number(2.0), "2");
    EXPECT_EQ(report::number(std::numeric_limits<double>::infinity()), json("inf"));
    EXPECT_EQ(report::number(std::nan("")), json("nan"));
}
