#pragma once

#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "causalite/model.hpp"

namespace causalite {

/// Model-to-model transform. A single step replaces mechanisms
/// simultaneously; hard interventions are the constant-expression special
/// case. Steps compose left-to-right, and a composition is itself an
/// interventional.
class Interventional {
  public:
    /// The null interventional (identity).
    Interventional() = default;

    static Interventional hard(const std::string& target, Rat value) {
        Interventional iv;
        iv.steps_.push_back({{{target, Expr::constant(std::move(value))}}});
        return iv;
    }

    static Interventional hard(const std::vector<std::pair<std::string, Rat>>& targets) {
        Interventional iv;
        Step s;
        for (const auto& [name, v] : targets) s.replacements[name] = Expr::constant(v);
        iv.steps_.push_back(std::move(s));
        return iv;
    }

    static Interventional hard(const Assignment& values) {
        Interventional iv;
        Step s;
        for (const auto& [name, v] : values.values()) s.replacements[name] = Expr::constant(v);
        iv.steps_.push_back(std::move(s));
        return iv;
    }

    static Interventional replace(const std::map<std::string, Expr>& replacements) {
        Interventional iv;
        if (!replacements.empty()) iv.steps_.push_back({replacements});
        return iv;
    }

    static Interventional compose(const std::vector<Interventional>& parts) {
        Interventional iv;
        for (const auto& p : parts)
            iv.steps_.insert(iv.steps_.end(), p.steps_.begin(), p.steps_.end());
        return iv;
    }

    bool is_null() const { return steps_.empty(); }

    bool is_hard() const {
        for (const auto& s : steps_)
            for (const auto& [name, expr] : s.replacements)
                if (expr.kind() != ExprKind::Const) return false;
        return true;
    }

    std::size_t step_count() const { return steps_.size(); }

    /// Targets across all steps, name-sorted.
    std::vector<std::string> targets() const {
        std::set<std::string> t;
        for (const auto& s : steps_)
            for (const auto& [name, expr] : s.replacements) t.insert(name);
        return {t.begin(), t.end()};
    }

    /// Net mechanism replacements after applying all steps in order
    /// (later steps override earlier ones on the same target).
    std::map<std::string, Expr> net_replacements() const {
        std::map<std::string, Expr> out;
        for (const auto& s : steps_)
            for (const auto& [name, expr] : s.replacements) out[name] = expr;
        return out;
    }

    /// Canonical label, e.g. "hard(B2<-1)" or "[hard(B1<-0); hard(B1<-1)]".
    std::string label() const {
        if (steps_.empty()) return "null";
        std::vector<std::string> parts;
        for (const auto& s : steps_) {
            bool all_const = true;
            for (const auto& [name, expr] : s.replacements)
                if (expr.kind() != ExprKind::Const) all_const = false;
            std::ostringstream os;
            os << (all_const ? "hard(" : "replace(");
            bool first = true;
            for (const auto& [name, expr] : s.replacements) {
                if (!first) os << ", ";
                os << name << "<-";
                if (expr.kind() == ExprKind::Const)
                    os << rat_to_string(expr.value());
                else
                    os << expr_to_string(expr);
                first = false;
            }
            os << ")";
            parts.push_back(os.str());
        }
        if (parts.size() == 1) return parts[0];
        std::string out = "[";
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) out += "; ";
            out += parts[i];
        }
        return out + "]";
    }

    friend bool operator==(const Interventional& a, const Interventional& b) {
        if (a.steps_.size() != b.steps_.size()) return false;
        for (std::size_t i = 0; i < a.steps_.size(); ++i)
            if (a.steps_[i].replacements != b.steps_[i].replacements) return false;
        return true;
    }
    friend bool operator!=(const Interventional& a, const Interventional& b) { return !(a == b); }
    friend bool operator<(const Interventional& a, const Interventional& b) {
        return a.label() < b.label();
    }

    struct Step {
        std::map<std::string, Expr> replacements;
    };
    const std::vector<Step>& steps() const { return steps_; }

  private:
    std::vector<Step> steps_;
};

/// Returns a new model with targeted mechanisms replaced; untargeted
/// mechanisms are untouched. Unknown targets, undeclared references and
/// cycles introduced by replacement are rejected.
inline CausalModel apply(const Interventional& iv, const CausalModel& model) {
    CausalModel m = model;
    for (const auto& step : iv.steps()) {
        for (const auto& [name, expr] : step.replacements) {
            if (!m.has_variable(name))
                throw ModelError("unknown target variable " + name);
            for (const auto& ref : free_variables(expr))
                if (!m.has_variable(ref))
                    throw ModelError("replacement for " + name +
                                     " references undeclared variable " + ref);
        }
        m = m.with_mechanisms(step.replacements);
        auto violations = m.validate(0);  // structure + cycles after every step
        if (!violations.empty())
            throw ModelError("intervention rejected: " + violations.front().message);
    }
    return m;
}

/// Hard intervention on parentless inputs; the canonical way to run a model
/// at a chosen input. Every assigned variable must be parentless in the
/// model; parentless variables not assigned keep their mechanisms (already
/// pinned ones stay pinned).
inline CausalModel set_inputs(const CausalModel& model, const Assignment& input) {
    for (const auto& [name, v] : input.values()) {
        if (!model.has_variable(name)) throw ModelError("unknown input variable " + name);
        if (!model.parents(name).empty())
            throw ModelError("variable " + name + " is not a parentless input");
    }
    return apply(Interventional::hard(input), model);
}

inline Assignment run_at(const CausalModel& model, const Assignment& input,
                         const EvalOptions& opts = EvalOptions::exact(),
                         EvalStats* stats = nullptr) {
    return set_inputs(model, input).run(opts, stats);
}

// ---------------------------------------------------------------------------
// Interchange interventions

/// Fix target variables to the values they would take under a different
/// input. The source may itself be a (recursive) interchange, bounded in
/// depth.
struct InterchangeSpec {
    Assignment base_input;
    Assignment source_input;                           // used when no recursive source
    std::shared_ptr<const InterchangeSpec> recursive_source;  // overrides source_input
    std::vector<std::string> targets;

    int depth() const {
        return recursive_source ? 1 + recursive_source->depth() : 1;
    }
};

inline constexpr int kMaxInterchangeDepth = 3;

namespace detail {

inline void check_interchange_spec(const CausalModel& model, const InterchangeSpec& spec) {
    if (spec.targets.empty()) throw ModelError("interchange spec has no targets");
    if (spec.depth() > kMaxInterchangeDepth)
        throw ModelError("recursive interchange deeper than " +
                         std::to_string(kMaxInterchangeDepth));
    auto inputs = model.input_variables();
    auto check_input = [&](const Assignment& a, const char* which) {
        if (a.size() != inputs.size())
            throw ModelError(std::string(which) +
                             " input must assign exactly the parentless input variables");
        for (const auto& v : inputs)
            if (!a.contains(v))
                throw ModelError(std::string(which) + " input missing variable " + v);
    };
    check_input(spec.base_input, "base");
    if (!spec.recursive_source) check_input(spec.source_input, "source");
    for (const auto& t : spec.targets)
        if (!model.has_variable(t)) throw ModelError("unknown target variable " + t);
}

}  // namespace detail

/// The assignment the source run realizes (recursing when the source is
/// itself an interchange).
inline Assignment interchange_source_run(const CausalModel& model, const InterchangeSpec& spec,
                                         const EvalOptions& opts = EvalOptions::exact(),
                                         EvalStats* stats = nullptr);

/// Activation patching: run at the source, harvest target values, pin them
/// into the base run.
inline Assignment interchange(const CausalModel& model, const InterchangeSpec& spec,
                              const EvalOptions& opts = EvalOptions::exact(),
                              EvalStats* stats = nullptr) {
    detail::check_interchange_spec(model, spec);
    Assignment source_run = interchange_source_run(model, spec, opts, stats);
    std::vector<std::pair<std::string, Rat>> pins;
    for (const auto& t : spec.targets) pins.emplace_back(t, source_run.at(t));
    CausalModel patched = apply(Interventional::hard(pins), set_inputs(model, spec.base_input));
    return patched.run(opts, stats);
}

inline Assignment interchange_source_run(const CausalModel& model, const InterchangeSpec& spec,
                                         const EvalOptions& opts, EvalStats* stats) {
    if (spec.recursive_source) return interchange(model, *spec.recursive_source, opts, stats);
    return run_at(model, spec.source_input, opts, stats);
}

/// The hard interventional an interchange spec resolves to (inputs not
/// included): targets pinned at their source-run values.
inline Interventional interchange_interventional(const CausalModel& model,
                                                 const InterchangeSpec& spec,
                                                 const EvalOptions& opts = EvalOptions::exact(),
                                                 EvalStats* stats = nullptr) {
    detail::check_interchange_spec(model, spec);
    Assignment source_run = interchange_source_run(model, spec, opts, stats);
    std::vector<std::pair<std::string, Rat>> pins;
    for (const auto& t : spec.targets) pins.emplace_back(t, source_run.at(t));
    return Interventional::hard(pins);
}

}  // namespace causalite
