#pragma once

#include <random>
#include <string>
#include <vector>

#include "causalite/intervene.hpp"
#include "causalite/model.hpp"

namespace causalite {

/// Seeded generators for boolean DAG models and hard interventions, used by
/// the algebra-law checks and property tests. std::mt19937_64 has a
/// standard-pinned sequence, so samples are stable across platforms.
class RandomModelSampler {
  public:
    explicit RandomModelSampler(std::uint64_t seed) : rng_(seed) {}

    /// Random acyclic boolean model with 1..max_vars variables. Edges only
    /// point from earlier to later variables, so acyclicity holds by
    /// construction; mechanisms are random boolean gate trees over a random
    /// parent subset.
    CausalModel boolean_dag(int max_vars = 8) {
        int n = 1 + int(rng_() % std::uint64_t(max_vars));
        ModelBuilder b;
        std::vector<std::string> names;
        for (int i = 0; i < n; ++i) names.push_back("V" + std::to_string(i));
        for (int i = 0; i < n; ++i) {
            std::vector<std::string> pool(names.begin(), names.begin() + i);
            std::vector<std::string> parents;
            for (const auto& p : pool)
                if (rng_() % 2 == 0) parents.push_back(p);
            b.variable(names[i], ValueDomain::boolean(), random_gate(parents, 0));
        }
        return b.build();
    }

    /// Random hard intervention on one variable of the model.
    Interventional hard_on(const CausalModel& model) {
        const auto& vars = model.variable_names();
        const std::string& target = vars[rng_() % vars.size()];
        return Interventional::hard(target, Rat(long(rng_() % 2)));
    }

    /// Random hard intervention avoiding the given targets (for disjointness).
    Interventional hard_disjoint_from(const CausalModel& model,
                                      const std::vector<std::string>& taken) {
        const auto& vars = model.variable_names();
        for (int attempt = 0; attempt < 64; ++attempt) {
            const std::string& target = vars[rng_() % vars.size()];
            bool clash = false;
            for (const auto& t : taken)
                if (t == target) clash = true;
            if (!clash) return Interventional::hard(target, Rat(long(rng_() % 2)));
        }
        return Interventional();  // all variables taken: fall back to null
    }

    std::uint64_t next() { return rng_(); }

  private:
    Expr random_gate(const std::vector<std::string>& parents, int depth) {
        if (parents.empty()) return Expr::constant(long(rng_() % 2));
        if (depth >= 2 || rng_() % 3 == 0)
            return Expr::var(parents[rng_() % parents.size()]);
        switch (rng_() % 4) {
            case 0: return Expr::xnor(random_gate(parents, depth + 1), random_gate(parents, depth + 1));
            case 1: return Expr::logical_and(random_gate(parents, depth + 1), random_gate(parents, depth + 1));
            case 2: return Expr::logical_or(random_gate(parents, depth + 1), random_gate(parents, depth + 1));
            default: return Expr::logical_not(random_gate(parents, depth + 1));
        }
    }

    std::mt19937_64 rng_;
};

}  // namespace causalite
