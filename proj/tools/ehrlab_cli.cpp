// ehrlab run <scenario.json> [--job NAME] [--output-dir DIR]
//
// Exit status: 0 completed / all PASS, 2 falsified or witness found,
// 3 inconclusive within budget, 1 usage or configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ehrlab/config.hpp"
#include "ehrlab/convergence.hpp"
#include "ehrlab/ehrling.hpp"
#include "ehrlab/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ehrlab;

namespace {

enum Exit { kOk = 0, kUsage = 1, kWitness = 2, kInconclusive = 3 };

struct Outcome {
    json result = json::object();
    json notes = json::array();
    std::optional<report::CsvTable> table;
    int exit = kOk;
    std::string status = "completed";
    std::string summary;
};

json optimizer_json(const OptimizerSettings& o) {
    return {{"starts", o.starts},         {"max_iterations", o.max_iterations}, {"polished_axes", o.polished_axes},
            {"seed", o.seed},             {"initial_step", o.initial_step},     {"min_step", o.min_step},
            {"delta_max", o.delta_max},   {"max_constant", o.max_constant},     {"delta_resolution", o.delta_resolution}};
}

PairNorm second_norm(const Scenario& sc) {
    if (sc.norm2.very_weak) return VeryWeakNorm(sc.family.family, sc.family.tolerance);
    return sc.norm2.strong;
}

int verdict_exit(bool any_fail, bool all_pass) { return any_fail ? kWitness : all_pass ? kOk : kInconclusive; }

std::string verdict_status(int code) {
    switch (code) {
        case kOk: return "PASS";
        case kWitness: return "FAIL";
        default: return "INCONCLUSIVE";
    }
}

void certificate_outcome(const EhrlingCertificate& cert, Outcome& out) {
    out.result = report::to_json(cert);
    out.table = report::certificate_table(cert);
    bool any_fail = false;
    for (const auto& r : cert.rows) {
        any_fail = any_fail || r.verdict == Verdict::fail;
        if (r.no_modulus) out.notes.push_back("eps=" + report::format_number(r.eps) + ": no modulus within max_constant");
        if (r.at_search_cap) {
            out.notes.push_back("eps=" + report::format_number(r.eps) +
                                ": inequality holds at delta_max; C = eps/delta_max is an artifact of the search cap");
        }
        if (r.approximate) out.notes.push_back("eps=" + report::format_number(r.eps) + ": optimizer budget exhausted");
    }
    out.exit = verdict_exit(any_fail, cert.all_pass());
    out.status = verdict_status(out.exit);
    out.summary = std::to_string(cert.rows.size()) + " rows, " + out.status;
}

Outcome run_norm(const Scenario& sc) {
    Outcome out;
    const Element& u = *sc.u;
    const CertifiedValue v = very_weak_norm(sc.family.family, u, sc.family.tolerance);
    out.result = {{"very_weak", report::to_json(v)}, {"norm", report::number(norm(sc.space, u))}};
    out.summary = "|u|_Phi in [" + report::format_number(v.lo) + ", " + report::format_number(v.hi) + "]";
    return out;
}

Outcome run_certify(const Scenario& sc) {
    Outcome out;
    const auto cert = certify(*sc.op, sc.op->domain(), second_norm(sc), sc.eps_grid, sc.optimizer, sc.sampler,
                              sc.certify_options);
    certificate_outcome(cert, out);
    return out;
}

Outcome run_three_space(const Scenario& sc) {
    Outcome out;
    const auto cert = three_space_certificate(*sc.op, *sc.tau, sc.eps_grid, sc.optimizer, sc.sampler, sc.certify_options);
    certificate_outcome(cert, out);
    return out;
}

Outcome run_reverse(const Scenario& sc) {
    Outcome out;
    const VeryWeakNorm fam(sc.family.family, sc.family.tolerance);
    report::CsvTable t({"eps", "delta", "C", "residual", "verdict", "flags"});
    json rows = json::array();
    bool any_fail = false, all_pass = true;
    auto eps_grid = sc.eps_grid;
    std::sort(eps_grid.begin(), eps_grid.end(), std::greater<>());
    for (double eps : eps_grid) {
        const ReverseResult r = reverse_certificate(*sc.op, fam, eps, sc.optimizer);
        const VerificationReport v = verify_reverse(*sc.op, fam, eps, r.C, sc.sampler);
        any_fail = any_fail || v.verdict == Verdict::fail;
        all_pass = all_pass && v.verdict == Verdict::pass;
        std::string flags = r.at_search_cap ? "at-search-cap" : "";
        if (r.approximate) flags += flags.empty() ? "approximate" : ";approximate";
        json row{{"eps", report::number(eps)},
                 {"delta", report::number(r.delta)},
                 {"C", report::number(r.C)},
                 {"residual", report::number(v.residual)},
                 {"verdict", to_string(v.verdict)},
                 {"flags", flags}};
        if (v.witness) row["witness"] = report::to_json(*v.witness);
        rows.push_back(row);
        t.row().add(eps).add(r.delta).add(r.C).add(v.residual).add(to_string(v.verdict)).add(flags);
    }
    out.result = {{"operator", sc.op->label()}, {"norm_x", sc.op->domain().label}, {"rows", rows}};
    out.table = std::move(t);
    out.exit = verdict_exit(any_fail, all_pass);
    out.status = verdict_status(out.exit);
    out.summary = std::to_string(rows.size()) + " rows, " + out.status;
    return out;
}

Outcome run_falsify(const Scenario& sc) {
    Outcome out;
    const auto w = falsify(*sc.op, sc.op->domain(), second_norm(sc), sc.eps, sc.c_max, sc.optimizer, sc.basis_depth);
    out.result = {{"eps", report::number(sc.eps)}, {"c_max", report::number(sc.c_max)}, {"basis_depth", sc.basis_depth},
                  {"found", w.has_value()}};
    if (w) {
        out.result["witness"] = report::to_json(*w);
        out.exit = kWitness;
        out.status = "witness";
        out.summary = "witness" + (w->basis_index ? " e_" + std::to_string(w->basis_index) : std::string()) +
                      ", residual " + report::format_number(w->residual);
    } else {
        out.exit = kInconclusive;
        out.status = "not-found";
        out.notes.push_back("no witness within the budget; this does not certify the inequality");
        out.summary = "no witness found (inconclusive)";
    }
    return out;
}

Outcome run_classify(const Scenario& sc) {
    Outcome out;
    const auto probes = default_probes(sc.family.family, sc.probe_count, sc.random_probes, sc.seed);
    const ImplicationReport rep = implication_suite(*sc.sequence, sc.family.family, probes, sc.tol);
    out.result = {{"rule", to_string(sc.sequence->rule)},
                  {"horizon", sc.sequence->horizon},
                  {"probes", probes.size()},
                  {"modes", report::to_json(rep.modes)},
                  {"implication_violations", rep.violations}};
    out.table = report::mode_table(rep.modes);
    for (const auto& d : rep.modes.diagnostics) out.notes.push_back(d);
    if (!rep.violations.empty()) {
        out.exit = kInconclusive;
        out.status = "implication-violated";
        out.notes.push_back("strong residual below tol without the weaker residuals following");
    }
    out.summary = std::string("verdict ") + to_string(rep.modes.verdict);
    return out;
}

Outcome run_counterexample(const Scenario& sc) {
    Outcome out;
    report::CsvTable t({"n", "cutoff", "dim", "rank", "norm", "max_pairing", "very_weak_lo", "very_weak_hi"});
    json terms = json::array();
    for (std::uint64_t n : sc.ns) {
        const AppendixTerm a = appendix_counterexample(sc.family.family, n, sc.schedule);
        terms.push_back(report::to_json(a, n));
        t.row()
            .add(n)
            .add(a.cutoff)
            .add(static_cast<std::uint64_t>(a.dim))
            .add(static_cast<std::uint64_t>(a.rank))
            .add(norm(NormSpec::lp(2.0), a.u))
            .add(a.max_pairing)
            .add(a.very_weak.lo)
            .add(a.very_weak.hi);
    }
    out.result = {{"terms", terms}};
    out.table = std::move(t);
    out.summary = std::to_string(terms.size()) + " terms constructed";
    return out;
}

Outcome dispatch(const Scenario& sc) {
    switch (sc.job) {
        case Job::norm: return run_norm(sc);
        case Job::certify: return run_certify(sc);
        case Job::reverse: return run_reverse(sc);
        case Job::three_space: return run_three_space(sc);
        case Job::falsify: return run_falsify(sc);
        case Job::classify: return run_classify(sc);
        case Job::counterexample: return run_counterexample(sc);
    }
    throw Error(Errc::internal, "cli", "unknown job");
}

json error_json(const Error& e) {
    return {{"error", {{"code", to_string(e.code())}, {"where", e.where()}, {"message", e.what()}}}};
}

int run(const fs::path& scenario_path, const std::string& job_override, const std::string& output_dir, bool quiet) {
    std::ifstream in(scenario_path);
    if (!in) throw Error(Errc::config, scenario_path.string(), "cannot open scenario file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Errc::config, scenario_path.string(), std::string("invalid JSON: ") + e.what());
    }
    if (!job_override.empty() && doc.is_object()) doc["job"] = job_override;
    Scenario sc = parse_scenario(doc, scenario_path.parent_path());
    if (sc.name.empty()) sc.name = scenario_path.stem().string();

    fs::path dir = output_dir.empty() ? fs::path(sc.output.dir) : fs::path(output_dir);
    if (output_dir.empty() && dir.is_relative() && doc.contains("output")) dir = scenario_path.parent_path() / dir;

    Outcome out = dispatch(sc);

    json rep;
    rep["artifact"] = "ehrlab";
    rep["version"] = kArtifactVersion;
    rep["schema_version"] = kScenarioSchemaVersion;
    rep["name"] = sc.name;
    rep["job"] = to_string(sc.job);
    rep["seed"] = sc.seed;
    rep["scenario"] = sc.source;
    rep["status"] = out.status;
    rep["exit_code"] = out.exit;
    rep["result"] = out.result;
    json diag{{"notes", out.notes}, {"family", {{"mode", to_string(sc.family.family.mode)}, {"dim", sc.family.family.dim},
                                                {"tolerance", sc.family.tolerance}}}};
    if (sc.job != Job::norm && sc.job != Job::classify && sc.job != Job::counterexample) {
        diag["optimizer"] = optimizer_json(sc.optimizer);
        diag["samples"] = sc.sampler.random_samples;
        diag["include_basis"] = sc.sampler.include_basis;
    }
    rep["diagnostics"] = diag;

    fs::create_directories(dir);
    const fs::path report_path = dir / sc.output.report;
    {
        std::ofstream os(report_path, std::ios::binary);
        os << rep.dump(2) << '\n';
        if (!os) throw Error(Errc::config, report_path.string(), "cannot write report");
    }
    if (out.table) {
        const fs::path csv_path = dir / sc.output.csv;
        std::ofstream os(csv_path, std::ios::binary);
        out.table->write(os);
        if (!os) throw Error(Errc::config, csv_path.string(), "cannot write CSV");
    }
    if (!quiet) {
        std::cout << sc.name << " [" << to_string(sc.job) << "]: " << out.summary << "\n"
                  << "report: " << report_path.string() << "\n";
        if (out.table) std::cout << "table: " << (dir / sc.output.csv).string() << "\n";
    }
    return out.exit;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ehrling-type inequality certification and very weak norm tools"};
    app.set_version_flag("--version", std::string("ehrlab ") + kArtifactVersion);
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "Run a scenario file");
    std::string scenario, job, output_dir;
    bool quiet = false;
    run_cmd->add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--job", job, "Override the scenario's job")
        ->check(CLI::IsMember({"norm", "certify", "reverse", "three-space", "falsify", "classify", "counterexample"}));
    run_cmd->add_option("--output-dir", output_dir, "Directory for report files");
    run_cmd->add_flag("-q,--quiet", quiet, "No summary on stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    try {
        return run(scenario, job, output_dir, quiet);
    } catch (const Error& e) {
        std::cerr << error_json(e).dump(2) << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << error_json(Error(Errc::internal, "cli", e.what())).dump(2) << '\n';
        return kUsage;
    }
}
