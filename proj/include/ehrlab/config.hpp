#pragma once

// Scenario files: JSON -> NormSpec, DualFamily, LinearOperator, SequenceGen and
// job parameters. Errors are Errc::config with the JSON pointer of the
// offending value in where().

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ehrlab/convergence.hpp"
#include "ehrlab/ehrling.hpp"
#include "ehrlab/operators.hpp"
#include "ehrlab/spaces.hpp"
#include "ehrlab/veryweak.hpp"

namespace ehrlab {

inline constexpr int kScenarioSchemaVersion = 1;

namespace config {

using nlohmann::json;

// A JSON value together with its pointer, for error messages.
class Node {
public:
    Node(const json& j, std::string ptr) : j_(&j), ptr_(std::move(ptr)) {}

    const json& raw() const { return *j_; }
    const std::string& ptr() const { return ptr_; }

    [[noreturn]] void fail(const std::string& msg) const { throw Error(Errc::config, ptr_.empty() ? "/" : ptr_, msg); }

    bool has(const char* key) const { return j_->is_object() && j_->contains(key); }

    Node at(const char* key) const {
        expect_object();
        if (!j_->contains(key)) Node(*j_, ptr_ + "/" + key).fail("required property is missing");
        return Node((*j_)[key], ptr_ + "/" + key);
    }
    std::optional<Node> opt(const char* key) const {
        expect_object();
        if (!j_->contains(key) || (*j_)[key].is_null()) return std::nullopt;
        return Node((*j_)[key], ptr_ + "/" + key);
    }
    Node at(std::size_t i) const { return Node((*j_)[i], ptr_ + "/" + std::to_string(i)); }
    std::size_t size() const { return j_->size(); }

    void expect_object() const {
        if (!j_->is_object()) fail("expected an object");
    }
    void allow_keys(std::initializer_list<const char*> keys) const {
        expect_object();
        for (const auto& [k, v] : j_->items()) {
            bool ok = false;
            for (const char* a : keys) ok = ok || k == a;
            if (!ok) Node(v, ptr_ + "/" + k).fail("unknown property '" + k + "'");
        }
    }

    double number() const {
        if (j_->is_string()) {
            const auto& s = j_->get_ref<const std::string&>();
            if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        }
        if (!j_->is_number()) fail("expected a number");
        const double x = j_->get<double>();
        if (!std::isfinite(x)) fail("expected a finite number");
        return x;
    }
    double positive() const {
        const double x = number();
        if (!(x > 0.0)) fail("expected a positive number");
        return x;
    }
    std::uint64_t count(std::uint64_t min = 0) const {
        if (!j_->is_number_integer() || (j_->is_number_integer() && j_->get<std::int64_t>() < 0)) {
            fail("expected a nonnegative integer");
        }
        const auto v = j_->get<std::uint64_t>();
        if (v < min) fail("expected an integer >= " + std::to_string(min));
        return v;
    }
    bool boolean() const {
        if (!j_->is_boolean()) fail("expected true or false");
        return j_->get<bool>();
    }
    std::string string() const {
        if (!j_->is_string()) fail("expected a string");
        return j_->get<std::string>();
    }
    std::string one_of(std::initializer_list<const char*> choices) const {
        const std::string s = string();
        std::string list;
        for (const char* c : choices) {
            if (s == c) return s;
            list += list.empty() ? "" : ", ";
            list += c;
        }
        fail("expected one of {" + list + "}, got '" + s + "'");
    }
    std::vector<double> numbers(std::size_t min_size = 1) const {
        if (!j_->is_array()) fail("expected an array of numbers");
        if (j_->size() < min_size) fail("expected at least " + std::to_string(min_size) + " entries");
        std::vector<double> out;
        for (std::size_t i = 0; i < j_->size(); ++i) out.push_back(at(i).number());
        return out;
    }

private:
    const json* j_;
    std::string ptr_;
};

// Runs a library builder, rethrowing its argument errors as config errors at `n`.
template <class F>
auto build_at(const Node& n, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == Errc::invalid_argument || e.code() == Errc::dimension_mismatch || e.code() == Errc::unsupported) {
            n.fail(e.what());
        }
        throw;
    }
}

// {"kind": "lp", "p": 2, "dim": 0}
// {"kind": "weighted-lp", "p": 2, "weights": [...]}
// {"kind": "sobolev-h1", "h": 0.25, "dim": 8}
inline NormSpec parse_norm(const Node& n) {
    n.expect_object();
    const std::string kind = n.at("kind").one_of({"lp", "weighted-lp", "sobolev-h1"});
    if (kind == "lp") {
        n.allow_keys({"kind", "p", "dim"});
        const double p = n.opt("p") ? n.at("p").number() : 2.0;
        const std::size_t dim = n.opt("dim") ? n.at("dim").count() : 0;
        return build_at(n, [&] { return NormSpec::lp(p, dim); });
    }
    if (kind == "weighted-lp") {
        n.allow_keys({"kind", "p", "weights"});
        const double p = n.opt("p") ? n.at("p").number() : 2.0;
        auto w = n.at("weights").numbers();
        return build_at(n, [&] { return NormSpec::weighted_lp(p, std::move(w)); });
    }
    n.allow_keys({"kind", "h", "dim"});
    const double h = n.at("h").positive();
    const std::size_t dim = n.opt("dim") ? n.at("dim").count() : 0;
    return build_at(n, [&] { return NormSpec::sobolev_h1(h, dim); });
}

inline json norm_to_json(const NormSpec& ns) {
    switch (ns.kind) {
        case NormSpec::Kind::lp: {
            json j{{"kind", "lp"}, {"p", std::isinf(ns.p) ? json("inf") : json(ns.p)}};
            if (ns.dim != 0) j["dim"] = ns.dim;
            return j;
        }
        case NormSpec::Kind::weighted_lp:
            return {{"kind", "weighted-lp"}, {"p", std::isinf(ns.p) ? json("inf") : json(ns.p)}, {"weights", ns.weights}};
        case NormSpec::Kind::sobolev_h1: {
            json j{{"kind", "sobolev-h1"}, {"h", ns.h}};
            if (ns.dim != 0) j["dim"] = ns.dim;
            return j;
        }
    }
    return {};
}

// {"mode": "coordinate" | "dense-rational", "dim": 16, "tolerance": 1e-12}; the
// family's space is the scenario space.
struct FamilyConfig {
    DualFamily family;
    double tolerance = 1e-12;
};

inline FamilyConfig parse_family(const Node& n, const NormSpec& space) {
    n.allow_keys({"mode", "dim", "tolerance"});
    FamilyConfig fc;
    fc.family.space = space;
    if (n.opt("mode")) {
        fc.family.mode = n.at("mode").one_of({"coordinate", "dense-rational"}) == "coordinate"
                             ? FamilyMode::coordinate
                             : FamilyMode::dense_rational;
    }
    if (n.opt("dim")) fc.family.dim = n.at("dim").count(1);
    if (n.opt("tolerance")) fc.tolerance = n.at("tolerance").positive();
    return fc;
}

// Operators act on the scenario space unless the kind fixes its own norms.
//   {"kind": "diagonal", "lambda": [...]}
//   {"kind": "geometric-diagonal", "dim": 16, "first": 1, "ratio": 0.5}
//   {"kind": "dense", "rows": [[...], ...]}
//   {"kind": "kernel", "csv": "file.csv", "h": 0.1}      path relative to the scenario
//   {"kind": "green-kernel", "n": 8}
//   {"kind": "shift", "dim": 32}
//   {"kind": "sobolev-embedding", "dim": 8, "h": 0.3}   h^1 -> l^2_h
//   {"kind": "inclusion", "dim": 8}                      identity coefficients
// plus an optional "codomain" norm.
inline LinearOperator parse_operator(const Node& n, const NormSpec& space, const std::filesystem::path& base_dir = {}) {
    n.expect_object();
    const std::string kind = n.at("kind").one_of(
        {"diagonal", "geometric-diagonal", "dense", "kernel", "green-kernel", "shift", "sobolev-embedding", "inclusion"});
    const NormSpec cod = n.opt("codomain") ? parse_norm(n.at("codomain")) : space;
    if (kind == "diagonal") {
        n.allow_keys({"kind", "lambda", "codomain"});
        auto lambda = n.at("lambda").numbers();
        return build_at(n, [&] { return make_diagonal(std::move(lambda), space, cod); });
    }
    if (kind == "geometric-diagonal") {
        n.allow_keys({"kind", "dim", "first", "ratio", "codomain"});
        const std::size_t dim = n.at("dim").count(1);
        const double first = n.opt("first") ? n.at("first").number() : 1.0;
        const double ratio = n.at("ratio").number();
        return build_at(n, [&] { return make_geometric_diagonal(dim, first, ratio, space, cod); });
    }
    if (kind == "dense") {
        n.allow_keys({"kind", "rows", "codomain"});
        const Node rows = n.at("rows");
        if (!rows.raw().is_array() || rows.size() == 0) rows.fail("expected a nonempty array of rows");
        std::vector<std::vector<double>> m;
        for (std::size_t i = 0; i < rows.size(); ++i) m.push_back(rows.at(i).numbers());
        return build_at(n, [&] { return make_dense(m, space, cod); });
    }
    if (kind == "kernel") {
        n.allow_keys({"kind", "csv", "h", "codomain"});
        std::filesystem::path p = n.at("csv").string();
        if (p.is_relative()) p = base_dir / p;
        const double h = n.at("h").positive();
        try {
            return load_kernel_csv(p.string(), h, space, cod);
        } catch (const Error& e) {
            n.at("csv").fail(e.what());
        }
    }
    if (kind == "green-kernel") {
        n.allow_keys({"kind", "n"});
        const std::size_t m = n.at("n").count(1);
        return make_green_kernel(m);
    }
    if (kind == "shift") {
        n.allow_keys({"kind", "dim", "codomain"});
        const std::size_t dim = n.at("dim").count(1);
        return build_at(n, [&] { return make_shift(dim, space, cod); });
    }
    if (kind == "sobolev-embedding") {
        n.allow_keys({"kind", "dim", "h"});
        const std::size_t dim = n.at("dim").count(2);
        const double h = n.at("h").positive();
        return build_at(n, [&] { return make_sobolev_embedding(dim, h); });
    }
    n.allow_keys({"kind", "dim", "codomain"});
    const std::size_t dim = n.at("dim").count(1);
    return build_at(n, [&] { return make_inclusion(dim, space, cod); });
}

inline OptimizerSettings parse_optimizer(const Node& n, std::uint64_t seed) {
    n.allow_keys({"starts", "max_iterations", "polished_axes", "initial_step", "min_step", "delta_max", "max_constant",
                  "delta_resolution"});
    OptimizerSettings o;
    o.seed = seed;
    if (n.opt("starts")) o.starts = n.at("starts").count();
    if (n.opt("max_iterations")) o.max_iterations = n.at("max_iterations").count(1);
    if (n.opt("polished_axes")) o.polished_axes = n.at("polished_axes").count();
    if (n.opt("initial_step")) o.initial_step = n.at("initial_step").positive();
    if (n.opt("min_step")) o.min_step = n.at("min_step").positive();
    if (n.opt("delta_max")) o.delta_max = n.at("delta_max").positive();
    if (n.opt("max_constant")) o.max_constant = n.at("max_constant").positive();
    if (n.opt("delta_resolution")) o.delta_resolution = static_cast<int>(n.at("delta_resolution").count(1));
    return o;
}

// An element: an array of coefficients or {"basis": n, "dim": d}.
inline Element parse_element(const Node& n) {
    if (n.raw().is_array()) {
        auto v = n.numbers();
        return Element(std::move(v));
    }
    n.allow_keys({"basis", "dim"});
    const std::size_t k = n.at("basis").count(1);
    const std::size_t d = n.at("dim").count(1);
    if (k > d) n.at("basis").fail("basis index exceeds dim");
    return Element::basis(k, d);
}

// {"rule": "basis", "dim": 64, "horizon": 64}
// {"rule": "strongly-convergent", "target": [...], "rate": 0.5, "horizon": 32}
// {"rule": "appendix", "horizon": 16, "dim_schedule": {"offset": 4, "fixed": 0}}
// {"rule": "custom", "terms": [[...], ...], "limit": [...]}
inline SequenceGen parse_sequence(const Node& n, const DualFamily& fam) {
    n.expect_object();
    const std::string rule = n.at("rule").one_of({"basis", "strongly-convergent", "appendix", "custom"});
    if (rule == "basis") {
        n.allow_keys({"rule", "dim", "horizon"});
        const std::size_t d = n.at("dim").count(1);
        const std::size_t hz = n.opt("horizon") ? n.at("horizon").count(1) : d;
        if (hz > d) n.at("horizon").fail("horizon exceeds dim");
        return SequenceGen::basis(d, hz);
    }
    if (rule == "strongly-convergent") {
        n.allow_keys({"rule", "target", "rate", "horizon"});
        const double rate = n.at("rate").number();
        if (!(rate > 0.0 && rate < 1.0)) n.at("rate").fail("rate must lie in (0, 1)");
        return SequenceGen::strongly_convergent(parse_element(n.at("target")), rate, n.at("horizon").count(1));
    }
    if (rule == "appendix") {
        n.allow_keys({"rule", "horizon", "dim_schedule"});
        DimSchedule s;
        if (auto ds = n.opt("dim_schedule")) {
            ds->allow_keys({"offset", "fixed"});
            if (ds->opt("offset")) s.offset = ds->at("offset").count();
            if (ds->opt("fixed")) s.fixed = ds->at("fixed").count();
        }
        return SequenceGen::appendix(fam, n.at("horizon").count(1), s);
    }
    n.allow_keys({"rule", "terms", "limit"});
    const Node terms = n.at("terms");
    if (!terms.raw().is_array() || terms.size() == 0) terms.fail("expected a nonempty array of elements");
    std::vector<Element> ts;
    for (std::size_t i = 0; i < terms.size(); ++i) ts.push_back(parse_element(terms.at(i)));
    std::optional<Element> limit;
    if (n.opt("limit")) limit = parse_element(n.at("limit"));
    return SequenceGen::custom(std::move(ts), std::move(limit));
}

} // namespace config

enum class Job { norm, certify, reverse, three_space, falsify, classify, counterexample };

inline const char* to_string(Job j) {
    switch (j) {
        case Job::norm: return "norm";
        case Job::certify: return "certify";
        case Job::reverse: return "reverse";
        case Job::three_space: return "three-space";
        case Job::falsify: return "falsify";
        case Job::classify: return "classify";
        case Job::counterexample: return "counterexample";
    }
    return "norm";
}

inline Job parse_job(const config::Node& n) {
    const std::string s =
        n.one_of({"norm", "certify", "reverse", "three-space", "falsify", "classify", "counterexample"});
    for (Job j : {Job::norm, Job::certify, Job::reverse, Job::three_space, Job::falsify, Job::classify,
                  Job::counterexample}) {
        if (s == to_string(j)) return j;
    }
    n.fail("unknown job");
}

// Second norm of certify / falsify: {"type": "very-weak"} (the scenario's
// family) or {"type": "strong", "space": {...}}.
struct Norm2Config {
    bool very_weak = true;
    NormSpec strong;
};

struct OutputConfig {
    std::string dir = ".";
    std::string report = "report.json";
    std::string csv = "table.csv";
};

struct Scenario {
    nlohmann::json source;  // the document as loaded, echoed in reports
    std::string name;
    Job job = Job::norm;
    std::uint64_t seed = 0;
    NormSpec space = NormSpec::lp(2.0);
    config::FamilyConfig family;
    std::optional<LinearOperator> op;
    std::optional<LinearOperator> tau;  // three-space: Y -> Z
    Norm2Config norm2;
    OptimizerSettings optimizer;
    Sampler sampler;
    CertifyOptions certify_options;

    // job parameters
    std::optional<Element> u;
    std::vector<double> eps_grid = default_eps_grid();
    double eps = 0.5;
    double c_max = 1e4;
    std::size_t basis_depth = 0;
    std::optional<SequenceGen> sequence;
    double tol = 1e-3;
    std::size_t probe_count = 32;
    std::size_t random_probes = 32;
    std::vector<std::uint64_t> ns{1, 2, 4, 8, 16};
    DimSchedule schedule;

    OutputConfig output;
};

namespace detail {

inline void require_for(const config::Node& root, const Scenario& sc, const char* key, bool present) {
    if (!present) root.at(key).fail(std::string("required for job '") + to_string(sc.job) + "'");
}

} // namespace detail

// Parses and validates a scenario document. Relative paths inside it resolve
// against `base_dir`.
inline Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {}) {
    using config::Node;
    const Node root(doc, "");
    root.allow_keys({"schema_version", "name", "job", "seed", "space", "family", "operator", "tau", "norm2", "params",
                     "optimizer", "output"});
    Scenario sc;
    sc.source = doc;
    if (root.opt("schema_version")) {
        const auto v = root.at("schema_version").count();
        if (v != static_cast<std::uint64_t>(kScenarioSchemaVersion)) {
            root.at("schema_version").fail("unsupported schema version " + std::to_string(v));
        }
    }
    if (root.opt("name")) sc.name = root.at("name").string();
    sc.job = parse_job(root.at("job"));
    if (root.opt("seed")) sc.seed = root.at("seed").count();
    if (root.opt("space")) sc.space = config::parse_norm(root.at("space"));
    if (root.opt("family")) {
        sc.family = config::parse_family(root.at("family"), sc.space);
    } else {
        sc.family.family.space = sc.space;
    }
    if (root.opt("operator")) sc.op = config::parse_operator(root.at("operator"), sc.space, base_dir);
    if (root.opt("tau")) {
        const NormSpec tau_domain = sc.op ? sc.op->codomain() : sc.space;
        sc.tau = config::parse_operator(root.at("tau"), tau_domain, base_dir);
    }
    if (auto n2 = root.opt("norm2")) {
        n2->allow_keys({"type", "space"});
        sc.norm2.very_weak = n2->at("type").one_of({"very-weak", "strong"}) == "very-weak";
        if (!sc.norm2.very_weak) sc.norm2.strong = config::parse_norm(n2->at("space"));
    }
    sc.optimizer.seed = sc.seed;
    if (root.opt("optimizer")) sc.optimizer = config::parse_optimizer(root.at("optimizer"), sc.seed);
    sc.sampler.seed = sc.seed;

    if (auto p = root.opt("params")) {
        p->allow_keys({"u", "eps_grid", "eps", "c_max", "basis_depth", "samples", "include_basis", "compute_optimal",
                       "optimal_rows", "sequence", "tol", "probes", "random_probes", "n", "dim_schedule"});
        if (p->opt("u")) sc.u = config::parse_element(p->at("u"));
        if (p->opt("eps_grid")) {
            sc.eps_grid = p->at("eps_grid").numbers();
            for (std::size_t i = 0; i < sc.eps_grid.size(); ++i) p->at("eps_grid").at(i).positive();
        }
        if (p->opt("eps")) sc.eps = p->at("eps").positive();
        if (p->opt("c_max")) sc.c_max = p->at("c_max").positive();
        if (p->opt("basis_depth")) sc.basis_depth = p->at("basis_depth").count();
        if (p->opt("samples")) sc.sampler.random_samples = p->at("samples").count();
        if (p->opt("include_basis")) sc.sampler.include_basis = p->at("include_basis").boolean();
        if (p->opt("compute_optimal")) sc.certify_options.compute_optimal = p->at("compute_optimal").boolean();
        if (p->opt("optimal_rows")) sc.certify_options.optimal_rows = p->at("optimal_rows").boolean();
        if (p->opt("sequence")) sc.sequence = config::parse_sequence(p->at("sequence"), sc.family.family);
        if (p->opt("tol")) sc.tol = p->at("tol").positive();
        if (p->opt("probes")) sc.probe_count = p->at("probes").count();
        if (p->opt("random_probes")) sc.random_probes = p->at("random_probes").count();
        if (p->opt("n")) {
            const Node ns = p->at("n");
            if (!ns.raw().is_array() || ns.size() == 0) ns.fail("expected a nonempty array of positive integers");
            sc.ns.clear();
            for (std::size_t i = 0; i < ns.size(); ++i) sc.ns.push_back(ns.at(i).count(1));
        }
        if (auto ds = p->opt("dim_schedule")) {
            ds->allow_keys({"offset", "fixed"});
            if (ds->opt("offset")) sc.schedule.offset = ds->at("offset").count();
            if (ds->opt("fixed")) sc.schedule.fixed = ds->at("fixed").count();
        }
    }
    if (auto o = root.opt("output")) {
        o->allow_keys({"dir", "report", "csv"});
        if (o->opt("dir")) sc.output.dir = o->at("dir").string();
        if (o->opt("report")) sc.output.report = o->at("report").string();
        if (o->opt("csv")) sc.output.csv = o->at("csv").string();
    }

    const bool needs_op = sc.job == Job::certify || sc.job == Job::reverse || sc.job == Job::three_space ||
                          sc.job == Job::falsify;
    if (needs_op) detail::require_for(root, sc, "operator", sc.op.has_value());
    if (sc.job == Job::three_space) detail::require_for(root, sc, "tau", sc.tau.has_value());
    if (sc.job == Job::norm && !sc.u) throw Error(Errc::config, "/params/u", "required for job 'norm'");
    if (sc.job == Job::classify && !sc.sequence) {
        throw Error(Errc::config, "/params/sequence", "required for job 'classify'");
    }
    if (sc.tau && sc.op && sc.op->out_dim() != sc.tau->in_dim()) {
        root.at("tau").fail("tau domain dimension " + std::to_string(sc.tau->in_dim()) +
                            " != operator codomain dimension " + std::to_string(sc.op->out_dim()));
    }
    return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::config, path.string(), "cannot open scenario file");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::config, path.string(), std::string("invalid JSON: ") + e.what());
    }
    Scenario sc = parse_scenario(doc, path.parent_path());
    if (sc.name.empty()) sc.name = path.stem().string();
    return sc;
}

} // namespace ehrlab
