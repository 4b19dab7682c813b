#pragma once

// JSON and CSV views of results. Numbers are written in shortest round-trip
// form so reports are byte-stable for a fixed scenario and seed.

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ehrlab/convergence.hpp"
#include "ehrlab/ehrling.hpp"
#include "ehrlab/veryweak.hpp"

#ifndef EHRLAB_VERSION
#define EHRLAB_VERSION "1.0.0"
#endif

namespace ehrlab {

inline constexpr const char* kArtifactVersion = EHRLAB_VERSION;

namespace report {

using nlohmann::json;

// JSON has no infinity; nonfinite values become strings.
inline json number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

inline json to_json(const CertifiedValue& v) { return {{"lo", number(v.lo)}, {"hi", number(v.hi)}, {"terms_used", v.terms_used}}; }

inline json to_json(const Element& u) {
    json a = json::array();
    for (double x : u.coeffs()) a.push_back(number(x));
    return a;
}

inline json to_json(const Witness& w) {
    json j{{"eps", number(w.eps)},
           {"residual", number(w.residual)},
           {"lower_bound_on_C", number(w.lower_bound_on_C)},
           {"u", to_json(w.u)}};
    if (w.basis_index != 0) j["basis_index"] = w.basis_index;
    return j;
}

inline json to_json(const CertificateRow& r) {
    json j{{"eps", number(r.eps)},
           {"delta", number(r.delta)},
           {"C", number(r.C)},
           {"method", to_string(r.method)},
           {"residual", number(r.residual)},
           {"verdict", to_string(r.verdict)}};
    if (r.optimal) j["optimal_C"] = number(*r.optimal);
    json flags = json::array();
    if (r.no_modulus) flags.push_back("no-modulus");
    if (r.at_search_cap) flags.push_back("at-search-cap");
    if (r.tightened) flags.push_back("tightened");
    if (r.approximate) flags.push_back("approximate");
    j["flags"] = flags;
    if (r.witness) j["witness"] = to_json(*r.witness);
    return j;
}

inline json to_json(const EhrlingCertificate& c) {
    json rows = json::array();
    for (const auto& r : c.rows) rows.push_back(to_json(r));
    return {{"operator", c.operator_label}, {"norm1", c.norm1}, {"norm2", c.norm2}, {"all_pass", c.all_pass()},
            {"rows", rows}};
}

inline json to_json(const ModeReport& m) {
    json vw = json::array();
    for (const auto& v : m.very_weak) vw.push_back(to_json(v));
    auto arr = [](const std::vector<double>& v) {
        json a = json::array();
        for (double x : v) a.push_back(number(x));
        return a;
    };
    return {{"verdict", to_string(m.verdict)},
            {"tol", number(m.tol)},
            {"trailing_from", m.trailing_from},
            {"strong_met", m.strong_met},
            {"weak_met", m.weak_met},
            {"very_weak_met", m.very_weak_met},
            {"bounded", m.bounded},
            {"weak_surrogate", "max residual over finitely many probe functionals"},
            {"strong_residuals", arr(m.strong_residuals)},
            {"weak_residuals", arr(m.weak_residuals)},
            {"very_weak", vw},
            {"norms", arr(m.norms)},
            {"diagnostics", m.diagnostics}};
}

inline json to_json(const AppendixTerm& t, std::uint64_t n) {
    return {{"n", n},
            {"cutoff", t.cutoff},
            {"dim", t.dim},
            {"rank", t.rank},
            {"norm", number(norm(NormSpec::lp(2.0), t.u))},
            {"max_pairing", number(t.max_pairing)},
            {"very_weak", to_json(t.very_weak)},
            {"u", to_json(t.u)}};
}

// Shortest decimal that round-trips to x.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

// RFC 4180 table: CRLF line ends, fields quoted when they contain a comma,
// quote or line break.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvTable& row() {
        rows_.emplace_back();
        return *this;
    }
    CsvTable& add(std::string_view s) {
        rows_.back().emplace_back(s);
        return *this;
    }
    CsvTable& add(double x) { return add(format_number(x)); }
    CsvTable& add(std::uint64_t x) { return add(std::to_string(x)); }

    std::size_t size() const { return rows_.size(); }

    void write(std::ostream& os) const {
        write_line(os, header_);
        for (const auto& r : rows_) write_line(os, r);
    }

    static std::string quote(std::string_view s) {
        if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += '"';
            out += c;
        }
        return out + "\"";
    }

private:
    static void write_line(std::ostream& os, const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) os << ',';
            os << quote(fields[i]);
        }
        os << "\r\n";
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline CsvTable certificate_table(const EhrlingCertificate& c) {
    CsvTable t({"eps", "delta", "C", "residual", "verdict", "method", "optimal_C", "flags"});
    for (const auto& r : c.rows) {
        std::string flags;
        auto flag = [&](bool on, const char* name) {
            if (!on) return;
            flags += flags.empty() ? "" : ";";
            flags += name;
        };
        flag(r.no_modulus, "no-modulus");
        flag(r.at_search_cap, "at-search-cap");
        flag(r.tightened, "tightened");
        flag(r.approximate, "approximate");
        t.row().add(r.eps).add(r.delta).add(r.C).add(r.residual).add(to_string(r.verdict)).add(to_string(r.method));
        if (r.optimal) {
            t.add(*r.optimal);
        } else {
            t.add("");
        }
        t.add(flags);
    }
    return t;
}

inline CsvTable mode_table(const ModeReport& m) {
    CsvTable t({"n", "strong_residual", "weak_residual", "very_weak_lo", "very_weak_hi", "norm"});
    for (std::size_t i = 0; i < m.strong_residuals.size(); ++i) {
        t.row()
            .add(static_cast<std::uint64_t>(i + 1))
            .add(m.strong_residuals[i])
            .add(m.weak_residuals[i])
            .add(m.very_weak[i].lo)
            .add(m.very_weak[i].hi)
            .add(m.norms[i]);
    }
    return t;
}

} // namespace report
} // namespace ehrlab
