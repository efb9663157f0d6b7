#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gme/certify.hpp"
#include "gme/constructions.hpp"
#include "gme/harness.hpp"
#include "gme/io.hpp"
#include "gme/pure_structure.hpp"
#include "gme/state.hpp"

// gmecert: build, inspect and certify multipartite states from the shell.
//
// Exit codes: 0 definite verdict or successful run, 2 inconclusive verdict,
// 1 error (including malformed input).

namespace gme::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInconclusive = 2;

struct RunConfig {
    double sdp_tol = Tolerances{}.sdp;
    double rank_tol = Tolerances{}.rank;
    int max_iter = SdpOptions{}.max_iter;
    std::uint64_t seed = 1;
    std::string out;

    CertifyOptions certify_options() const {
        CertifyOptions o;
        o.tol.sdp = sdp_tol;
        o.tol.rank = rank_tol;
        o.sdp.tol = sdp_tol;
        o.sdp.max_iter = max_iter;
        return o;
    }

    io::json json() const {
        return {{"sdp_tol", sdp_tol}, {"rank_tol", rank_tol}, {"max_iter", max_iter}, {"seed", seed}};
    }
};

/// Default output directory: $GME_OUT_DIR, else the working directory.
inline std::filesystem::path default_out_dir() {
    if (const char* env = std::getenv("GME_OUT_DIR"); env && *env) return env;
    return ".";
}

inline std::filesystem::path out_file(const RunConfig& cfg, const std::string& fallback_name) {
    if (!cfg.out.empty()) return cfg.out;
    return default_out_dir() / fallback_name;
}

inline std::filesystem::path out_dir(const RunConfig& cfg) {
    return cfg.out.empty() ? default_out_dir() : std::filesystem::path(cfg.out);
}

/// Named example states.
inline io::AnyState preset_state(const std::string& name, int parties) {
    auto qubits = [](int n) { return PartyStructure::uniform(n, 2); };
    if (name == "ghz") {
        return PureState::from_kets(qubits(parties), {{std::string(parties, '0'), 1.0}, {std::string(parties, '1'), 1.0}});
    }
    if (name == "zero") return PureState::from_kets(qubits(parties), {{std::string(parties, '0'), 1.0}});
    if (name == "maxmixed") return DensityOperator::maximally_mixed(qubits(parties));
    if (name == "bell") return PureState::from_kets(qubits(2), {{"00", 1.0}, {"11", 1.0}});
    if (name == "singlet") return PureState::from_kets(qubits(2), {{"01", 1.0}, {"10", -1.0}});
    if (name == "psi3") return PureState::from_kets(qubits(3), {{"000", 1.0}, {"011", 1.0}});
    if (name == "phi3") return PureState::from_kets(qubits(3), {{"011", 1.0}, {"101", 1.0}});
    if (name == "psi4a")
        return PureState::from_kets(qubits(4), {{"0010", 1.0}, {"1011", 1.0}, {"0110", -1.0}, {"1111", -1.0}});
    if (name == "psi4b")
        return PureState::from_kets(qubits(4), {{"0010", 1.0}, {"0001", 1.0}, {"0110", 1.0}, {"0101", 1.0}});
    throw PreconditionError("unknown preset '" + name + "'");
}

inline std::vector<std::string> preset_names() {
    return {"ghz", "zero", "maxmixed", "bell", "singlet", "psi3", "phi3", "psi4a", "psi4b"};
}

inline std::vector<int> parse_index_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const int v = std::stoi(item, &used);
        if (used != item.size() || v < 1) throw PreconditionError("party indices are 1-based integers: '" + s + "'");
        out.push_back(v - 1);
    }
    return out;
}

inline io::AnyState combine(const std::string& op, const io::AnyState& a, const std::optional<io::AnyState>& b,
                            const std::vector<int>& keep_a, const std::vector<int>& keep_b) {
    if (op == "normalize") {
        if (const auto* p = std::get_if<PureState>(&a)) return p->normalized();
        return std::get<DensityOperator>(a).normalized();
    }
    if (!b) throw PreconditionError("--op " + op + " needs --b");
    const auto* pa = std::get_if<PureState>(&a);
    const auto* pb = std::get_if<PureState>(&*b);
    if (pa && pb) {
        if (op == "tensor") return tensor_product(*pa, *pb);
        if (op == "kron") return kronecker_product(*pa, *pb);
        if (op == "kc") return kc_product(*pa, *pb, keep_a, keep_b);
    } else {
        const DensityOperator da = io::as_density(a), db = io::as_density(*b);
        if (op == "tensor") return tensor_product(da, db);
        if (op == "kron") return kronecker_product(da, db);
        if (op == "kc") return kc_product(da, db, keep_a, keep_b);
    }
    throw PreconditionError("unknown --op '" + op + "'");
}

inline int exit_for(Verdict v) { return v == Verdict::Inconclusive ? kExitInconclusive : kExitOk; }

inline void emit(std::ostream& out, const io::json& j) { out << j.dump(2) << "\n"; }

/// Parses argv and executes one subcommand. Output goes to `out`, diagnostics
/// to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Build, inspect and certify multipartite quantum states", "gmecert"};
    app.fallthrough();
    app.require_subcommand(1);
    RunConfig cfg;
    app.add_option("--sdp-tol", cfg.sdp_tol, "PPT-mixture certification margin and duality-gap target")
        ->check(CLI::PositiveNumber);
    app.add_option("--rank-tol", cfg.rank_tol, "relative singular-value cutoff for rank decisions")
        ->check(CLI::PositiveNumber);
    app.add_option("--max-iter", cfg.max_iter, "iteration cap of the PPT-mixture solver")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "seed for randomized families");
    app.add_option("--out", cfg.out, "output file (build, werner, certify) or directory (demo-theorem5, harness)");

    // build
    auto* build = app.add_subcommand("build", "write a state file from a preset or by combining state files");
    std::string preset, op, file_a, file_b, keep_a_s = "1", keep_b_s = "1", labels_s;
    int parties = 3;
    build->add_option("--preset", preset, "ghz, zero, maxmixed, bell, singlet, psi3, phi3, psi4a, psi4b");
    build->add_option("--parties", parties, "party count for ghz, zero, maxmixed")->check(CLI::Range(1, 12));
    build->add_option("--op", op, "tensor, kron, kc, normalize (normalize alone rewrites --a)");
    build->add_option("--a", file_a, "first operand state file");
    build->add_option("--b", file_b, "second operand state file");
    build->add_option("--keep-a", keep_a_s, "kc: kept parties of the first operand (1-based, comma separated)");
    build->add_option("--keep-b", keep_b_s, "kc: kept parties of the second operand");
    build->add_option("--labels", labels_s, "rename the result's parties (comma separated)");

    // certify
    auto* certify_cmd = app.add_subcommand("certify", "classify a state and print the certificate report");
    std::string certify_file;
    certify_cmd->add_option("statefile", certify_file)->required();

    // partition
    auto* partition_cmd = app.add_subcommand("partition", "complete partition and factorizing cuts of a pure state");
    std::string partition_file;
    partition_cmd->add_option("statefile", partition_file)->required();

    // werner
    auto* werner_cmd = app.add_subcommand("werner", "write a Werner state and report its band");
    int wd = 2;
    double wp = 0.0;
    werner_cmd->add_option("--d", wd, "local dimension")->check(CLI::Range(2, 64));
    werner_cmd->add_option("--p", wp, "parameter in [-1, 1]")->required();

    // demo-theorem5
    auto* demo = app.add_subcommand("demo-theorem5", "rank-two ⊗_Kc construction with its projection and certificate");
    double x1 = 1.0, x2 = 1.0;
    demo->add_option("--x1", x1)->check(CLI::PositiveNumber);
    demo->add_option("--x2", x2)->check(CLI::PositiveNumber);

    // harness
    auto* harness = app.add_subcommand("harness", "instance table for ⊗_Kc products of entangled pairs");
    HarnessConfig hcfg;
    harness->add_option("--family", hcfg.family, "werner2, rank2, pure");
    harness->add_option("--eps", hcfg.eps, "werner2: magnitude of the offset below the p = -1/2 edge")
        ->check(CLI::PositiveNumber);
    harness->add_option("--trials", hcfg.trials)->check(CLI::Range(1, 100000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
    }

    try {
        if (build->parsed()) {
            if (preset.empty() == op.empty()) throw PreconditionError("build needs exactly one of --preset or --op");
            std::optional<io::AnyState> s;
            if (!preset.empty()) {
                s = preset_state(preset, parties);
            } else {
                if (file_a.empty()) throw PreconditionError("--op needs --a");
                const auto a = io::read_state(file_a);
                std::optional<io::AnyState> b;
                if (!file_b.empty()) b = io::read_state(file_b);
                s = combine(op, a, b, parse_index_list(keep_a_s), parse_index_list(keep_b_s));
            }
            if (!labels_s.empty()) {
                std::vector<std::string> labels;
                std::stringstream ss(labels_s);
                for (std::string l; std::getline(ss, l, ',');) labels.push_back(l);
                s = std::visit([&](const auto& x) -> io::AnyState { return relabel(x, labels); }, *s);
            }
            const auto path = out_file(cfg, "state.json");
            io::write_state(path, *s);
            emit(out, {{"command", "build"}, {"written", path.string()}, {"config", cfg.json()}});
            return kExitOk;
        }
        if (certify_cmd->parsed()) {
            const CertifyOptions opt = cfg.certify_options();
            const DensityOperator rho = io::as_density(io::read_state(certify_file, opt.tol));
            const CertificateReport rep = certify(rho, opt);
            io::json j = io::report_json(rep);
            j["config"] = cfg.json();
            if (!cfg.out.empty()) io::write_atomic(cfg.out, j.dump(2) + "\n");
            emit(out, j);
            return exit_for(rep.verdict);
        }
        if (partition_cmd->parsed()) {
            const auto s = io::read_state(partition_file);
            std::optional<PureState> psi;
            if (const auto* p = std::get_if<PureState>(&s)) {
                psi = *p;
            } else {
                const auto& rho = std::get<DensityOperator>(s);
                const Matrix basis = linalg::range_basis(rho.matrix(), cfg.rank_tol);
                if (basis.cols() != 1) throw PreconditionError("partition needs a pure state (rank-one operator)");
                psi = PureState(basis.col(0), rho.structure());
            }
            const Partition cp = complete_partition(*psi, cfg.rank_tol);
            io::json cuts = io::json::array();
            for (const auto& c : factorizing_cuts(*psi, cfg.rank_tol)) cuts.push_back(io::cut_json(c));
            io::json j{{"complete_partition", io::partition_json(cp)},
                       {"factorizing_cuts", cuts},
                       {"gme", cp.size() == 1},
                       {"config", cfg.json()}};
            if (!cfg.out.empty()) io::write_atomic(cfg.out, j.dump(2) + "\n");
            emit(out, j);
            return kExitOk;
        }
        if (werner_cmd->parsed()) {
            const DensityOperator w = werner(wd, wp);
            const WernerParams params = werner_params(wd, wp);
            const PptResult ppt = ppt_check(w, Bipartition({0}, 2));
            const auto path = out_file(cfg, "werner.json");
            io::write_state(path, w);
            emit(out, {{"command", "werner"},
                       {"d", wd},
                       {"p", wp},
                       {"band", to_string(params.band)},
                       {"ppt_min_eigenvalue", ppt.min_eigenvalue},
                       {"ppt", ppt.is_ppt ? (ppt.boundary ? "ppt_boundary" : "ppt") : "npt"},
                       {"twirl_p", werner_twirl(w).p},
                       {"written", path.string()},
                       {"config", cfg.json()}});
            return kExitOk;
        }
        if (demo->parsed()) {
            const CertifyOptions opt = cfg.certify_options();
            const RankTwoKcResult r = rank_two_kc_pipeline(x1, x2, opt);
            const auto dir = out_dir(cfg);
            io::write_state(dir / "rho.json", r.rho);
            io::write_state(dir / "sigma.json", r.sigma);
            io::json j = io::report_json(r.report);
            j["x1"] = x1;
            j["x2"] = x2;
            j["rho_sdp"] = {{"objective", r.rho_sdp.objective},
                            {"dual_bound", r.rho_sdp.dual_bound},
                            {"status", to_string(r.rho_sdp.status)},
                            {"iterations", r.rho_sdp.iterations},
                            {"certifies_gme", r.rho_sdp.certifies_gme(opt.tol.sdp)}};
            j["config"] = cfg.json();
            io::write_atomic(dir / "report.json", j.dump(2) + "\n");
            emit(out, j);
            return exit_for(r.report.verdict);
        }
        if (harness->parsed()) {
            hcfg.seed = cfg.seed;
            hcfg.certify = cfg.certify_options();
            const auto rows = conjecture_harness(hcfg);
            io::json table = io::json::array();
            for (const auto& h : rows) {
                io::json row{{"family", h.family},   {"index", h.index},       {"parameters", h.parameters},
                             {"skipped", h.skipped}, {"verdict", to_string(h.verdict)}, {"route", h.route}};
                if (h.skipped || !h.skip_reason.empty()) row["reason"] = h.skip_reason;
                if (h.sdp_objective) {
                    row["sdp_objective"] = *h.sdp_objective;
                    row["sdp_dual_bound"] = *h.sdp_dual_bound;
                    row["sdp_status"] = to_string(*h.sdp_status);
                    row["sdp_iterations"] = h.sdp_iterations;
                }
                table.push_back(row);
            }
            io::json j{{"command", "harness"},
                       {"family", hcfg.family},
                       {"eps", hcfg.eps},
                       {"trials", hcfg.trials},
                       {"instances", table},
                       {"config", cfg.json()}};
            io::write_atomic(out_dir(cfg) / ("harness_" + hcfg.family + ".json"), j.dump(2) + "\n");
            emit(out, j);
            return kExitOk;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

}  // namespace gme::cli
