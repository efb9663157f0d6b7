#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "gme/certify.hpp"
#include "gme/core.hpp"
#include "gme/partitions.hpp"
#include "gme/state.hpp"

// State file format:
//
//   {"parties": [{"label": "A", "dim": 2}, ...],
//    "kind": "pure" | "mixed",
//    "data": [[re, im], ...]}
//
// "data" lists amplitudes (pure) or matrix entries (mixed, row-major), with
// indices row-major over the party order. Numbers are written in shortest
// round-trip form, so reading back reproduces every double exactly.

namespace gme::io {

using json = nlohmann::json;
using AnyState = std::variant<PureState, DensityOperator>;

inline json complex_list(const Complex* data, Index n) {
    json arr = json::array();
    for (Index i = 0; i < n; ++i) arr.push_back(json::array({data[i].real(), data[i].imag()}));
    return arr;
}

inline json structure_json(const PartyStructure& s) {
    json arr = json::array();
    for (const auto& p : s.parties()) arr.push_back({{"label", p.label}, {"dim", p.dim}});
    return arr;
}

inline json matrix_json(const Matrix& m) {
    const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    return complex_list(rm.data(), rm.size());
}

inline json state_json(const PureState& psi) {
    return {{"parties", structure_json(psi.structure())},
            {"kind", "pure"},
            {"data", complex_list(psi.amplitudes().data(), psi.amplitudes().size())}};
}

inline json state_json(const DensityOperator& rho) {
    return {{"parties", structure_json(rho.structure())}, {"kind", "mixed"}, {"data", matrix_json(rho.matrix())}};
}

inline json state_json(const AnyState& s) {
    return std::visit([](const auto& x) { return state_json(x); }, s);
}

namespace detail {

/// Offset of a key's first appearance in the source text, for error messages.
inline std::size_t key_offset(const std::string& text, const std::string& key) {
    const auto at = text.find("\"" + key + "\"");
    return at == std::string::npos ? 0 : at;
}

}  // namespace detail

/// Parses a state file. Syntax errors and schema errors raise ParseError with
/// a byte offset; invalid operators raise the state's own errors.
inline AnyState parse_state(const std::string& text, const Tolerances& tol = {}) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("malformed state file: " + std::string(e.what()), e.byte);
    }
    auto fail = [&](const std::string& what, const std::string& key) -> ParseError {
        return ParseError("invalid state file: " + what, detail::key_offset(text, key));
    };
    if (!j.is_object()) throw ParseError("invalid state file: top level must be an object", 0);
    if (!j.contains("parties") || !j["parties"].is_array()) throw fail("missing \"parties\" array", "parties");
    if (!j.contains("kind") || !j["kind"].is_string()) throw fail("missing \"kind\"", "kind");
    if (!j.contains("data") || !j["data"].is_array()) throw fail("missing \"data\" array", "data");

    std::vector<Party> parties;
    for (const auto& p : j["parties"]) {
        if (!p.is_object() || !p.contains("label") || !p["label"].is_string() || !p.contains("dim") ||
            !p["dim"].is_number_integer())
            throw fail("each party needs a string \"label\" and an integer \"dim\"", "parties");
        const auto dim = p["dim"].get<long long>();
        if (dim < 1 || dim > kMaxTotalDim) throw DimensionError("party dimension out of range");
        parties.push_back({p["label"].get<std::string>(), static_cast<int>(dim)});
    }
    PartyStructure s(std::move(parties));

    const std::string kind = j["kind"].get<std::string>();
    const auto& data = j["data"];
    auto entry = [&](std::size_t i) {
        const auto& e = data[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw fail("entry " + std::to_string(i) + " is not a [re, im] pair", "data");
        return Complex(e[0].get<double>(), e[1].get<double>());
    };
    const auto d = static_cast<std::size_t>(s.total_dim());
    if (kind == "pure") {
        if (data.size() != d) throw fail("pure data needs " + std::to_string(d) + " entries", "data");
        Vector v(static_cast<Index>(d));
        for (std::size_t i = 0; i < d; ++i) v(static_cast<Index>(i)) = entry(i);
        return PureState(std::move(v), std::move(s));
    }
    if (kind == "mixed") {
        if (data.size() != d * d) throw fail("mixed data needs " + std::to_string(d * d) + " entries", "data");
        Matrix m(static_cast<Index>(d), static_cast<Index>(d));
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = entry(r * d + c);
        return DensityOperator(std::move(m), std::move(s), tol);
    }
    throw fail("\"kind\" must be \"pure\" or \"mixed\"", "kind");
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline AnyState read_state(const std::filesystem::path& path, const Tolerances& tol = {}) {
    return parse_state(read_text(path), tol);
}

inline DensityOperator as_density(const AnyState& s) {
    if (const auto* p = std::get_if<PureState>(&s)) return DensityOperator::projector(*p);
    return std::get<DensityOperator>(s);
}

/// Writes through a temporary file in the same directory, then renames it
/// over the target.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void write_state(const std::filesystem::path& path, const AnyState& s) {
    write_atomic(path, state_json(s).dump(1) + "\n");
}

inline json partition_json(const Partition& p) { return p.one_based(); }

inline json tolerances_json(const Tolerances& t) {
    return {{"herm", t.herm}, {"psd", t.psd}, {"rank", t.rank}, {"sdp", t.sdp}, {"inv", t.inv}};
}

inline json cut_json(const Bipartition& b) {
    json side = json::array();
    for (int i : b.side()) side.push_back(i + 1);
    return side;
}

inline json report_json(const CertificateReport& r, bool include_matrices = true) {
    json j{{"verdict", to_string(r.verdict)},
           {"method", r.method},
           {"checks", r.checks},
           {"tolerances", tolerances_json(r.tolerances)},
           {"sdp_solves", r.sdp_solves}};
    json ev;
    if (const auto* w = std::get_if<WitnessEvidence>(&r.evidence)) {
        ev = {{"type", "witness"}, {"value", w->value}};
        json cuts = json::array();
        for (const auto& c : w->cuts) cuts.push_back(cut_json(c));
        ev["cuts"] = cuts;
        if (include_matrices) {
            ev["dim"] = w->witness.rows();
            ev["witness"] = matrix_json(w->witness);
        }
    } else if (const auto* p = std::get_if<PartitionEvidence>(&r.evidence)) {
        ev = {{"type", "complete_partition"}, {"partition", partition_json(p->partition)}};
    } else if (const auto* s = std::get_if<StructuralEvidence>(&r.evidence)) {
        ev = {{"type", "structural"}, {"rule", s->rule}, {"premises", s->premises}};
    } else if (const auto* f = std::get_if<FailedTests>(&r.evidence)) {
        ev = {{"type", "failed_tests"}, {"tests", f->tests}};
    } else {
        ev = {{"type", "none"}};
    }
    j["evidence"] = ev;
    if (r.sdp) {
        j["sdp"] = {{"objective", r.sdp->objective},
                    {"dual_bound", r.sdp->dual_bound},
                    {"status", to_string(r.sdp->status)},
                    {"iterations", r.sdp->iterations}};
    }
    return j;
}

}  // namespace gme::io
