#pragma once

#include <span>
#include <string>
#include <vector>

#include "causalite/intervene.hpp"
#include "causalite/report.hpp"

namespace causalite {

/// Algebraic laws of hard interventions, checked on concrete finite samples:
///   (a) disjoint-target commutation: apply(i, apply(j, m)) = apply(j, apply(i, m))
///   (b) idempotence: apply(i, apply(i, m)) = apply(i, m)
///   (c) same-target override: the later intervention wins.
/// First counterexample per law is reported.
inline VerificationReport check_algebra_laws(
    const std::vector<CausalModel>& models,
    const std::vector<std::pair<Interventional, Interventional>>& pairs) {
    VerificationReport report;
    report.check = "intervention-algebra-laws";
    bool commutation_hit = false, idempotence_hit = false, override_hit = false;

    std::size_t cases = std::min(models.size(), pairs.size());
    for (std::size_t k = 0; k < cases; ++k) {
        const CausalModel& m = models[k];
        const Interventional& i = pairs[k].first;
        const Interventional& j = pairs[k].second;

        // (a) commutation on disjoint targets
        auto ti = i.targets();
        auto tj = j.targets();
        bool disjoint = true;
        for (const auto& a : ti)
            for (const auto& b : tj)
                if (a == b) disjoint = false;
        ++report.checked;
        if (disjoint && !commutation_hit) {
            CausalModel ij = apply(i, apply(j, m));
            CausalModel ji = apply(j, apply(i, m));
            if (!(ij == ji)) {
                commutation_hit = true;
                report.witnesses.push_back({i.label() + " / " + j.label(), "", "", "", "", "",
                                            "disjoint commutation failed (case " +
                                                std::to_string(k) + ")"});
            }
        }

        // (b) idempotence
        ++report.checked;
        if (!idempotence_hit) {
            CausalModel once = apply(i, m);
            CausalModel twice = apply(i, once);
            if (!(once == twice)) {
                idempotence_hit = true;
                report.witnesses.push_back({i.label(), "", "", "", "", "",
                                            "idempotence failed (case " + std::to_string(k) + ")"});
            }
        }

        // (c) same-target override: i then (same targets, values from j') wins
        ++report.checked;
        if (i.is_hard() && !override_hit) {
            auto reps = i.net_replacements();
            std::vector<std::pair<std::string, Rat>> flipped;
            for (const auto& [name, expr] : reps)
                flipped.emplace_back(name, expr.value() == 0 ? Rat(1) : Rat(0));
            Interventional i2 = Interventional::hard(flipped);
            CausalModel after = apply(i2, apply(i, m));
            CausalModel direct = apply(i2, m);
            if (!(after == direct)) {
                override_hit = true;
                report.witnesses.push_back({i.label() + " then " + i2.label(), "", "", "", "", "",
                                            "override failed (case " + std::to_string(k) + ")"});
            }
        }
    }
    report.sort_witnesses();
    return report;
}

}  // namespace causalite
