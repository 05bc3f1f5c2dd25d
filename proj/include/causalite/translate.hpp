#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "causalite/intervene.hpp"
#include "causalite/model.hpp"

namespace causalite {

/// Bijective recarving of a settings space, given coordinatewise by
/// expressions with an explicit inverse. Bijectivity is checked exhaustively
/// on finite spaces and certified on realized values otherwise.
struct Translation {
    std::vector<std::pair<std::string, ValueDomain>> source_variables;
    std::vector<std::pair<std::string, ValueDomain>> target_variables;
    std::map<std::string, Expr> forward;  // target var -> expr over source vars
    std::map<std::string, Expr> inverse;  // source var -> expr over target vars

    Translation inverted() const {
        Translation t;
        t.source_variables = target_variables;
        t.target_variables = source_variables;
        t.forward = inverse;
        t.inverse = forward;
        return t;
    }

    static Translation identity(const CausalModel& model) {
        Translation t;
        for (const auto& name : model.variable_names()) {
            t.source_variables.emplace_back(name, model.domain(name));
            t.target_variables.emplace_back(name, model.domain(name));
            t.forward[name] = Expr::var(name);
            t.inverse[name] = Expr::var(name);
        }
        return t;
    }
};

inline Assignment apply_forward(const Translation& t, const Assignment& source,
                                const EvalOptions& opts = EvalOptions::exact()) {
    Assignment out;
    for (const auto& [name, dom] : t.target_variables)
        out.set(name, evaluate(t.forward.at(name), source.values(), opts));
    return out;
}

inline Assignment apply_inverse(const Translation& t, const Assignment& target,
                                const EvalOptions& opts = EvalOptions::exact()) {
    Assignment out;
    for (const auto& [name, dom] : t.source_variables)
        out.set(name, evaluate(t.inverse.at(name), target.values(), opts));
    return out;
}

namespace detail {

inline std::vector<Assignment> enumerate_space(
    const std::vector<std::pair<std::string, ValueDomain>>& vars, std::size_t limit) {
    std::size_t combos = 1;
    for (const auto& [name, dom] : vars) {
        if (!dom.is_finite()) return {};
        combos *= dom.values().size();
        if (combos > limit) return {};
    }
    std::vector<Assignment> out;
    std::vector<std::vector<Rat>> domains;
    for (const auto& [name, dom] : vars) domains.push_back(dom.values());
    std::vector<std::size_t> idx(vars.size(), 0);
    if (vars.empty()) {
        out.emplace_back();
        return out;
    }
    while (true) {
        Assignment a;
        for (std::size_t i = 0; i < vars.size(); ++i) a.set(vars[i].first, domains[i][idx[i]]);
        out.push_back(std::move(a));
        std::size_t k = vars.size();
        bool done = true;
        while (k > 0) {
            --k;
            if (++idx[k] < domains[k].size()) {
                done = false;
                break;
            }
            idx[k] = 0;
        }
        if (done) break;
    }
    return out;
}

}  // namespace detail

/// Structural checks plus round-trip identity on the declared settings
/// space where it is enumerable. A collision (two source settings with the
/// same image) is reported with the colliding pair.
inline std::vector<Violation> validate_translation(const Translation& t,
                                                   std::size_t space_limit = 1u << 16) {
    std::vector<Violation> out;
    std::set<std::string> source_names, target_names;
    for (const auto& [name, dom] : t.source_variables) source_names.insert(name);
    for (const auto& [name, dom] : t.target_variables) target_names.insert(name);

    for (const auto& [name, dom] : t.target_variables) {
        auto it = t.forward.find(name);
        if (it == t.forward.end()) {
            out.push_back({"missing-map", "no forward component for " + name});
            continue;
        }
        for (const auto& ref : free_variables(it->second))
            if (!source_names.count(ref))
                out.push_back({"map-scope", "forward component of " + name +
                                                " references non-source variable " + ref});
    }
    for (const auto& [name, dom] : t.source_variables) {
        auto it = t.inverse.find(name);
        if (it == t.inverse.end()) {
            out.push_back({"missing-map", "no inverse component for " + name});
            continue;
        }
        for (const auto& ref : free_variables(it->second))
            if (!target_names.count(ref))
                out.push_back({"map-scope", "inverse component of " + name +
                                                " references non-target variable " + ref});
    }
    if (!out.empty()) return out;

    auto source_space = detail::enumerate_space(t.source_variables, space_limit);
    std::map<std::string, Assignment> image_of;  // forward image -> preimage
    for (const auto& s : source_space) {
        Assignment fwd = apply_forward(t, s);
        for (const auto& [name, dom] : t.target_variables) {
            if (!dom.contains(fwd.at(name))) {
                out.push_back({"range", "forward image of " + s.to_string() +
                                            " leaves the target domain at " + name});
                return out;
            }
        }
        auto [it, fresh] = image_of.try_emplace(fwd.to_string(), s);
        if (!fresh) {
            out.push_back({"collision", "not injective: " + it->second.to_string() + " and " +
                                            s.to_string() + " both map to " + fwd.to_string()});
            return out;
        }
        Assignment back = apply_inverse(t, fwd);
        if (back != s) {
            out.push_back({"round-trip", "inverse(forward(" + s.to_string() + ")) = " +
                                             back.to_string()});
            return out;
        }
    }
    auto target_space = detail::enumerate_space(t.target_variables, space_limit);
    for (const auto& v : target_space) {
        Assignment back = apply_inverse(t, v);
        bool in_domain = true;
        for (const auto& [name, dom] : t.source_variables)
            if (!dom.contains(back.at(name))) in_domain = false;
        if (!in_domain) continue;  // target value not in the image of a smaller source space
        Assignment fwd = apply_forward(t, back);
        if (fwd != v) {
            out.push_back({"round-trip", "forward(inverse(" + v.to_string() + ")) = " +
                                             fwd.to_string()});
            return out;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Extensional mechanism compilation (finite domains)

namespace detail {

/// Recognize small truth tables as named gates so pulled-back mechanisms
/// read like hand-written ones. Falls back to a sum of indicator products.
inline Expr compile_table(const std::vector<std::string>& support,
                          const std::vector<std::vector<Rat>>& rows,
                          const std::vector<Rat>& outputs) {
    if (support.empty()) return Expr::constant(outputs.empty() ? Rat(0) : outputs.front());

    auto all_boolean = [&] {
        for (const auto& row : rows)
            for (const auto& v : row)
                if (!rat_is_boolean(v)) return false;
        for (const auto& v : outputs)
            if (!rat_is_boolean(v)) return false;
        return true;
    }();

    if (all_boolean && support.size() == 1 && rows.size() == 2) {
        // rows enumerate (0) then (1)
        if (outputs[0] == 0 && outputs[1] == 1) return Expr::var(support[0]);
        if (outputs[0] == 1 && outputs[1] == 0)
            return Expr::logical_not(Expr::var(support[0]));
    }
    if (all_boolean && support.size() == 2 && rows.size() == 4) {
        // row order (0,0),(0,1),(1,0),(1,1)
        auto pattern = [&](int a, int b, int c, int d) {
            return outputs[0] == a && outputs[1] == b && outputs[2] == c && outputs[3] == d;
        };
        Expr x = Expr::var(support[0]);
        Expr y = Expr::var(support[1]);
        if (pattern(1, 0, 0, 1)) return Expr::xnor(x, y);
        if (pattern(0, 1, 1, 0)) return Expr::logical_not(Expr::xnor(x, y));
        if (pattern(0, 0, 0, 1)) return Expr::logical_and(x, y);
        if (pattern(0, 1, 1, 1)) return Expr::logical_or(x, y);
    }

    // identity on a single general variable
    if (support.size() == 1) {
        bool ident = true;
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (rows[r][0] != outputs[r]) ident = false;
        if (ident) return Expr::var(support[0]);
    }

    std::vector<Expr> terms;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (outputs[r] == 0) continue;
        std::vector<Expr> factors;
        factors.push_back(Expr::constant(outputs[r]));
        for (std::size_t i = 0; i < support.size(); ++i)
            factors.push_back(Expr::eq(Expr::var(support[i]), Expr::constant(rows[r][i])));
        terms.push_back(Expr::mul(std::move(factors)));
    }
    if (terms.empty()) return Expr::constant(0);
    if (terms.size() == 1) return terms.front();
    return Expr::add(std::move(terms));
}

}  // namespace detail

/// Tabulate an expression over the finite domains of its free variables,
/// drop variables the output does not depend on, and compile the table back
/// into an expression. Returns nullopt when a free variable has a real
/// domain or the product space exceeds the limit.
inline std::optional<Expr> extensionalize(const Expr& e,
                                          const std::map<std::string, ValueDomain>& domains,
                                          std::size_t limit = 1u << 16) {
    std::set<std::string> free_set = free_variables(e);
    std::vector<std::string> vars(free_set.begin(), free_set.end());
    std::size_t combos = 1;
    std::vector<std::vector<Rat>> values;
    for (const auto& v : vars) {
        auto it = domains.find(v);
        if (it == domains.end() || !it->second.is_finite()) return std::nullopt;
        values.push_back(it->second.values());
        combos *= values.back().size();
        if (combos > limit) return std::nullopt;
    }

    std::vector<std::vector<Rat>> rows;
    std::vector<Rat> outputs;
    std::vector<std::size_t> idx(vars.size(), 0);
    while (true) {
        std::map<std::string, Rat> env;
        std::vector<Rat> row;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            env[vars[i]] = values[i][idx[i]];
            row.push_back(values[i][idx[i]]);
        }
        rows.push_back(std::move(row));
        outputs.push_back(evaluate(e, env));
        if (vars.empty()) break;
        std::size_t k = vars.size();
        bool done = true;
        while (k > 0) {
            --k;
            if (++idx[k] < values[k].size()) {
                done = false;
                break;
            }
            idx[k] = 0;
        }
        if (done) break;
    }

    // Minimize support: a variable matters iff two rows differing only in it
    // produce different outputs. Checking each variable independently is
    // sound on product spaces.
    std::vector<bool> keep(vars.size(), false);
    for (std::size_t i = 0; i < vars.size(); ++i) {
        std::map<std::string, std::map<std::string, Rat>> groups;  // key without var i -> first output keyed by var i value
        for (std::size_t r = 0; r < rows.size() && !keep[i]; ++r) {
            std::string key;
            for (std::size_t j = 0; j < vars.size(); ++j)
                if (j != i) key += rat_to_string(rows[r][j]) + ",";
            auto& slot = groups[key];
            std::string vi = rat_to_string(rows[r][i]);
            for (const auto& [other, val] : slot)
                if (val != outputs[r]) keep[i] = true;
            slot[vi] = outputs[r];
        }
    }

    std::vector<std::string> support;
    std::vector<std::size_t> support_idx;
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (keep[i]) {
            support.push_back(vars[i]);
            support_idx.push_back(i);
        }

    // Re-tabulate over the kept variables only (first occurrence wins; all
    // occurrences agree by construction).
    std::map<std::string, std::pair<std::vector<Rat>, Rat>> table;
    std::vector<std::string> order;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<Rat> key_row;
        std::string key;
        for (std::size_t i : support_idx) {
            key_row.push_back(rows[r][i]);
            key += rat_to_string(rows[r][i]) + ",";
        }
        if (table.emplace(key, std::make_pair(key_row, outputs[r])).second) order.push_back(key);
    }
    std::vector<std::vector<Rat>> small_rows;
    std::vector<Rat> small_outputs;
    for (const auto& k : order) {
        small_rows.push_back(table.at(k).first);
        small_outputs.push_back(table.at(k).second);
    }
    return detail::compile_table(support, small_rows, small_outputs);
}

// ---------------------------------------------------------------------------
// Model translation by conjugation

/// The canonical model in the target variable space: each target mechanism
/// is the forward component composed with the source mechanisms composed
/// with the inverse, built by symbolic substitution. With extensional
/// simplification the mechanisms are additionally compiled to minimal
/// tables on finite domains.
inline CausalModel translate_model(const CausalModel& model, const Translation& t,
                                   bool extensional_simplify = false,
                                   std::size_t space_limit = 1u << 16) {
    std::set<std::string> declared(model.variable_names().begin(), model.variable_names().end());
    std::set<std::string> source_names;
    for (const auto& [name, dom] : t.source_variables) {
        source_names.insert(name);
        if (!declared.count(name))
            throw ModelError("translation source variable " + name + " is not a model variable");
        if (!(model.domain(name) == dom))
            throw ModelError("translation source domain of " + name +
                             " differs from the model's");
    }
    for (const auto& name : model.variable_names())
        if (!source_names.count(name))
            throw ModelError("translation does not cover model variable " + name);

    auto violations = validate_translation(t, space_limit);
    if (!violations.empty())
        throw ModelError("invalid translation: " + violations.front().message);

    // mechanism_S composed with the inverse, expressed over target variables
    std::map<std::string, Expr> through_inverse;
    for (const auto& [name, dom] : t.source_variables) {
        through_inverse[name] = substitute(model.mechanism(name), t.inverse);
    }

    std::vector<std::pair<std::string, ValueDomain>> variables = t.target_variables;
    std::map<std::string, Expr> mechanisms;
    std::map<std::string, ValueDomain> target_domains;
    for (const auto& [name, dom] : t.target_variables) target_domains.emplace(name, dom);
    for (const auto& [name, dom] : t.target_variables) {
        Expr mech = substitute(t.forward.at(name), through_inverse);
        if (extensional_simplify) {
            if (auto simplified = extensionalize(mech, target_domains, space_limit))
                mech = *simplified;
        }
        mechanisms.emplace(name, std::move(mech));
    }
    CausalModel out(variables, mechanisms);
    auto structural = out.validate(0);
    if (!structural.empty())
        throw ModelError("translated model invalid: " + structural.front().message);
    return out;
}

// ---------------------------------------------------------------------------
// Pull-backs

/// Pull a hard intervention (or composition of hard interventions) on the
/// translated model back to an interventional on the source model:
/// conjugate the intervened translated model through the inverse and diff
/// mechanisms against the context. On finite domains replacements are
/// compiled extensionally and no-op replacements are dropped.
inline Interventional pull_back(const Translation& t, const Interventional& high_iv,
                                const CausalModel& context, std::size_t space_limit = 1u << 16) {
    if (!high_iv.is_hard())
        throw ModelError("pull_back requires a hard interventional (or composition), got " +
                         high_iv.label());
    if (high_iv.is_null()) return Interventional();

    CausalModel translated = translate_model(context, t);
    CausalModel intervened = apply(high_iv, translated);
    CausalModel back = translate_model(intervened, t.inverted());

    std::map<std::string, ValueDomain> source_domains;
    for (const auto& [name, dom] : t.source_variables) source_domains.emplace(name, dom);

    std::map<std::string, Expr> replacements;
    for (const auto& name : context.variable_names()) {
        Expr old_mech = context.mechanism(name);
        Expr new_mech = back.mechanism(name);
        auto old_ext = extensionalize(old_mech, source_domains, space_limit);
        auto new_ext = extensionalize(new_mech, source_domains, space_limit);
        if (old_ext && new_ext) {
            if (*old_ext == *new_ext) continue;  // extensionally unchanged
            replacements[name] = *new_ext;
        } else {
            if (old_mech == new_mech) continue;
            replacements[name] = new_mech;
        }
    }
    return Interventional::replace(replacements);
}

/// The pulled-back interventional as a model-to-model function: re-derived
/// against the given (possibly already intervened) context and applied.
/// Pulled-back disjoint interventionals commute under this context-updating
/// application, which the static replacement lists alone do not guarantee.
inline CausalModel apply_pull_back(const Translation& t, const Interventional& high_iv,
                                   const CausalModel& model,
                                   std::size_t space_limit = 1u << 16) {
    return apply(pull_back(t, high_iv, model, space_limit), model);
}

/// Pull-backs of all high-level hard interventions on non-input translated
/// variables, plus all order-2 compositions on disjoint targets,
/// deduplicated. The family is paired with its high-level counterparts.
inline std::vector<std::pair<Interventional, Interventional>> intervention_family_pairs(
    const Translation& t, const CausalModel& context, std::size_t space_limit = 1u << 16) {
    CausalModel translated = translate_model(context, t);
    std::vector<std::string> pool;
    {
        auto inputs = translated.input_variables();
        std::set<std::string> input_set(inputs.begin(), inputs.end());
        for (const auto& name : translated.variable_names())
            if (!input_set.count(name) && translated.domain(name).is_finite())
                pool.push_back(name);
    }

    std::vector<Interventional> highs;
    highs.push_back(Interventional());  // null
    for (const auto& name : pool)
        for (const auto& v : translated.domain(name).values())
            highs.push_back(Interventional::hard(name, v));
    std::vector<Interventional> singles(highs.begin() + 1, highs.end());
    for (const auto& a : singles)
        for (const auto& b : singles) {
            if (a.targets() == b.targets()) continue;
            bool disjoint = true;
            for (const auto& ta : a.targets())
                for (const auto& tb : b.targets())
                    if (ta == tb) disjoint = false;
            if (disjoint) highs.push_back(Interventional::compose({a, b}));
        }

    std::vector<std::pair<Interventional, Interventional>> out;
    std::set<std::string> seen;
    for (const auto& h : highs) {
        Interventional low = pull_back(t, h, context, space_limit);
        if (seen.insert(low.label()).second) out.emplace_back(low, h);
    }
    return out;
}

inline std::vector<Interventional> intervention_family(const Translation& t,
                                                       const CausalModel& context,
                                                       std::size_t space_limit = 1u << 16) {
    std::vector<Interventional> out;
    for (auto& [low, high] : intervention_family_pairs(t, context, space_limit))
        out.push_back(low);
    return out;
}

}  // namespace causalite
