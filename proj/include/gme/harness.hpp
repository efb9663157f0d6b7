#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gme/certify.hpp"
#include "gme/constructions.hpp"
#include "gme/random.hpp"
#include "gme/sdp.hpp"
#include "gme/state.hpp"

namespace gme {

// Instance evidence for: α GME (bipartite: entangled) with kept party A, β
// entangled across B | (shared parties) ⇒ α ⊗_{K_c} β GME. Each instance
// records how it was decided; nothing here claims the general statement.

struct HarnessInstance {
    std::string family;
    int index = 0;
    std::string parameters;
    bool skipped = false;
    std::string skip_reason;
    Verdict verdict = Verdict::Inconclusive;
    std::string route;
    std::optional<double> sdp_objective, sdp_dual_bound;
    std::optional<SdpStatus> sdp_status;
    int sdp_iterations = 0;
};

struct HarnessConfig {
    std::string family = "werner2";  // werner2 | rank2 | pure
    int trials = 10;
    double eps = 1e-3;  // werner2: ε_t = −eps / (t + 1)
    std::uint64_t seed = 1;
    CertifyOptions certify;
};

namespace detail {

inline bool bipartite_entangled(const DensityOperator& rho, const CertifyOptions& opt, std::string& why) {
    const CertificateReport r = certify(rho, opt);
    why = to_string(r.verdict) + " via " + r.method;
    return r.verdict == Verdict::GME;
}

}  // namespace detail

/// Decides one instance: α's party 0 and β's party 0 are kept, the rest are
/// shared in order.
inline HarnessInstance run_conjecture_instance(const DensityOperator& alpha, const DensityOperator& beta,
                                               const CertifyOptions& opt, std::string family, int index,
                                               std::string parameters) {
    HarnessInstance inst;
    inst.family = std::move(family);
    inst.index = index;
    inst.parameters = std::move(parameters);

    std::string why;
    if (!detail::bipartite_entangled(alpha, opt, why)) {
        inst.skipped = true;
        inst.skip_reason = "first operand not certified GME (" + why + ")";
        return inst;
    }
    DensityOperator beta_grouped = beta;
    if (beta.parties() > 2) beta_grouped = merge_parties(beta, {1, static_cast<int>(beta.parties()) - 1});
    if (!detail::bipartite_entangled(beta_grouped, opt, why)) {
        inst.skipped = true;
        inst.skip_reason = "second operand not certified entangled across its kept party (" + why + ")";
        return inst;
    }

    const SpanOutcome sa = biseparable_span_test(alpha, opt.tol).outcome;
    const bool beta_bipartite = beta.parties() == 2 && alpha.parties() == 2;
    const SpanOutcome sb = beta_bipartite ? biseparable_span_test(beta, opt.tol).outcome : SpanOutcome::Inconclusive;
    if (sa == SpanOutcome::NotSpanned || sb == SpanOutcome::NotSpanned) {
        inst.verdict = Verdict::GME;
        inst.route = sa == SpanOutcome::NotSpanned ? "range_not_spanned_first" : "range_not_spanned_second";
        return inst;
    }

    const DensityOperator product = kc_product(alpha, beta);
    if (product.dim() > 64) {
        inst.route = "no_route";
        inst.skip_reason = "product dimension exceeds 64";
        return inst;
    }
    SdpOptions sopt = opt.sdp;
    sopt.tol = opt.tol.sdp;
    sopt.stop_when_certified = true;  // undecided instances still run to a converged bound
    const SdpSolution sol = gme_sdp(product, sopt);
    inst.route = "ppt_mixture_program";
    inst.sdp_objective = sol.objective;
    inst.sdp_dual_bound = sol.dual_bound;
    inst.sdp_status = sol.status;
    inst.sdp_iterations = sol.iterations;
    inst.verdict = sol.certifies_gme(opt.tol.sdp) ? Verdict::GME : Verdict::Inconclusive;
    return inst;
}

inline std::vector<std::string> harness_families() { return {"werner2", "rank2", "pure"}; }

/// Runs a deterministic family of instances.
///
///   werner2  ρ_w(2, ε − 1/2) ⊗_{K_c} ρ_w(2, ε − 1/2) with ε_t = −eps/(t+1)
///   rank2    random rank-two two-qubit α, β
///   pure     random pure two-qubit α, random rank-two β
inline std::vector<HarnessInstance> conjecture_harness(const HarnessConfig& cfg) {
    if (cfg.trials < 1) throw PreconditionError("trials must be positive");
    std::vector<HarnessInstance> out;
    random::Rng rng(cfg.seed);
    const PartyStructure sa({{"A", 2}, {"C1", 2}}), sb({{"B", 2}, {"C2", 2}});
    for (int t = 0; t < cfg.trials; ++t) {
        if (cfg.family == "werner2") {
            const double eps = -cfg.eps / (t + 1);
            const double p = eps - 0.5;
            const DensityOperator w = werner(2, p);
            out.push_back(run_conjecture_instance(relabel(w, {"A", "C1"}), relabel(w, {"B", "C2"}), cfg.certify,
                                                  cfg.family, t,
                                                  "eps=" + std::to_string(eps) + " p=" + std::to_string(p)));
        } else if (cfg.family == "rank2") {
            const DensityOperator a = random::density(rng, sa, 2), b = random::density(rng, sb, 2);
            out.push_back(run_conjecture_instance(a, b, cfg.certify, cfg.family, t, "rank=2,2"));
        } else if (cfg.family == "pure") {
            const DensityOperator a = random::density(rng, sa, 1), b = random::density(rng, sb, 2);
            out.push_back(run_conjecture_instance(a, b, cfg.certify, cfg.family, t, "rank=1,2"));
        } else {
            throw PreconditionError("unknown harness family '" + cfg.family + "'");
        }
    }
    return out;
}

}  // namespace gme
