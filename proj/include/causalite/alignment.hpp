#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "causalite/expr.hpp"
#include "causalite/model.hpp"

namespace causalite {

/// Where a high-level variable lives in the low-level system: a cell of
/// low-level variables plus a component map from cell values to the
/// high-level value.
struct AlignedVariable {
    std::string high_var;
    std::vector<std::string> cell;  // low-level variables, ordered
    Expr component_map;             // expression over the cell variables
};

/// A partition of (some of the) low-level variables with one component map
/// per high-level variable. Low-level variables outside every cell are
/// forgotten. Cells must be pairwise disjoint; component maps are partial
/// (undefined where the mapped value falls outside the high variable's
/// domain) and must be surjective over realized values — that is checked by
/// the abstraction module, not assumed here.
class Alignment {
  public:
    Alignment() = default;
    explicit Alignment(std::vector<AlignedVariable> entries) : entries_(std::move(entries)) {}

    const std::vector<AlignedVariable>& entries() const { return entries_; }

    bool has(const std::string& high_var) const { return find(high_var) != nullptr; }

    const AlignedVariable& entry(const std::string& high_var) const {
        const AlignedVariable* e = find(high_var);
        if (!e) throw std::out_of_range("alignment has no entry for " + high_var);
        return *e;
    }

    std::vector<std::string> high_variables() const {
        std::vector<std::string> out;
        for (const auto& e : entries_) out.push_back(e.high_var);
        return out;
    }

    /// Structural invariants checkable without models: disjoint cells,
    /// nonempty cells, maps mentioning only cell variables.
    std::vector<Violation> validate() const {
        std::vector<Violation> out;
        std::set<std::string> seen_high, seen_low;
        for (const auto& e : entries_) {
            if (!seen_high.insert(e.high_var).second)
                out.push_back({"duplicate", "duplicate alignment entry for " + e.high_var});
            if (e.cell.empty())
                out.push_back({"empty-cell", "cell of " + e.high_var + " is empty"});
            for (const auto& v : e.cell) {
                if (!seen_low.insert(v).second)
                    out.push_back({"overlap", "low-level variable " + v +
                                                   " appears in more than one cell"});
            }
            std::set<std::string> cell_vars(e.cell.begin(), e.cell.end());
            for (const auto& ref : free_variables(e.component_map)) {
                if (!cell_vars.count(ref))
                    out.push_back({"map-scope", "component map of " + e.high_var +
                                                    " references " + ref +
                                                    " outside its cell"});
            }
        }
        return out;
    }

    /// Cross-model invariants: cells name low-level variables, high
    /// variables exist, input cells are aligned to high inputs.
    std::vector<Violation> validate_against(const CausalModel& low,
                                            const CausalModel& high) const {
        auto out = validate();
        for (const auto& e : entries_) {
            if (!high.has_variable(e.high_var))
                out.push_back({"unknown-variable",
                               "high-level model has no variable " + e.high_var});
            for (const auto& v : e.cell)
                if (!low.has_variable(v))
                    out.push_back({"unknown-variable",
                                   "low-level model has no variable " + v});
        }
        return out;
    }

  private:
    const AlignedVariable* find(const std::string& high_var) const {
        for (const auto& e : entries_)
            if (e.high_var == high_var) return &e;
        return nullptr;
    }

    std::vector<AlignedVariable> entries_;
};

/// tau_pi applied to one total low-level assignment. Component maps are
/// partial: a result outside the high variable's domain (or an evaluation
/// failure) leaves that coordinate undefined — reported, not errored.
struct PartialAssignment {
    std::map<std::string, std::optional<Rat>> values;
    std::vector<std::string> undefined;  // high variables left undefined

    bool defined(const std::string& name) const {
        auto it = values.find(name);
        return it != values.end() && it->second.has_value();
    }
    const Rat& at(const std::string& name) const {
        auto it = values.find(name);
        if (it == values.end() || !it->second)
            throw std::out_of_range("tau undefined at " + name);
        return *it->second;
    }
    std::string to_string() const {
        std::string out;
        for (const auto& [name, v] : values) {
            if (!out.empty()) out += " ";
            out += name + "=" + (v ? rat_to_string(*v) : "undefined");
        }
        return out;
    }
};

inline PartialAssignment tau_of(const Alignment& alignment, const CausalModel& high,
                                const Assignment& low_assignment,
                                const EvalOptions& opts = EvalOptions::exact(),
                                EvalStats* stats = nullptr) {
    PartialAssignment out;
    for (const auto& e : alignment.entries()) {
        std::optional<Rat> value;
        try {
            Rat v = evaluate(e.component_map, low_assignment.values(), opts, stats);
            if (high.has_variable(e.high_var) && !high.domain(e.high_var).contains(v))
                value = std::nullopt;
            else
                value = v;
        } catch (const EvalError&) {
            value = std::nullopt;
        }
        if (!value) out.undefined.push_back(e.high_var);
        out.values[e.high_var] = std::move(value);
    }
    return out;
}

/// Singleton cells with identity maps: tau is the identity.
inline Alignment identity_alignment(const CausalModel& model) {
    std::vector<AlignedVariable> entries;
    for (const auto& name : model.variable_names())
        entries.push_back({name, {name}, Expr::var(name)});
    return Alignment(std::move(entries));
}

/// Composition: if inner aligns L to M and outer aligns M to H, the result
/// aligns L to H. Each composed cell is the union of the inner cells of the
/// outer cell's variables; the composed map is the outer map with each
/// mid-level variable substituted by its inner component map.
inline Alignment compose_alignments(const Alignment& inner, const Alignment& outer) {
    std::vector<AlignedVariable> entries;
    for (const auto& oe : outer.entries()) {
        AlignedVariable composed;
        composed.high_var = oe.high_var;
        std::map<std::string, Expr> substitution;
        for (const auto& mid : oe.cell) {
            const auto& ie = inner.entry(mid);
            for (const auto& v : ie.cell) composed.cell.push_back(v);
            substitution[mid] = ie.component_map;
        }
        composed.component_map = substitute(oe.component_map, substitution);
        entries.push_back(std::move(composed));
    }
    return Alignment(std::move(entries));
}

}  // namespace causalite
