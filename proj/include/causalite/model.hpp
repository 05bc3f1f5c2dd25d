#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "causalite/expr.hpp"
#include "causalite/rational.hpp"

namespace causalite {

// ---------------------------------------------------------------------------
// Value domains

enum class DomainKind { Boolean, Real, Finite };

class ValueDomain {
  public:
    static ValueDomain boolean() { return ValueDomain(DomainKind::Boolean, {}); }
    static ValueDomain real() { return ValueDomain(DomainKind::Real, {}); }
    /// Finite enumerated domain; values are deduplicated and sorted.
    static ValueDomain finite(std::vector<Rat> values) {
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        if (values.empty()) throw std::invalid_argument("finite domain must be nonempty");
        return ValueDomain(DomainKind::Finite, std::move(values));
    }

    DomainKind kind() const { return kind_; }
    bool is_finite() const { return kind_ != DomainKind::Real; }

    bool contains(const Rat& v) const {
        switch (kind_) {
            case DomainKind::Boolean: return v == 0 || v == 1;
            case DomainKind::Real: return true;
            case DomainKind::Finite:
                return std::binary_search(values_.begin(), values_.end(), v);
        }
        return false;
    }

    /// Enumerable values; only valid for finite kinds.
    std::vector<Rat> values() const {
        switch (kind_) {
            case DomainKind::Boolean: return {Rat(0), Rat(1)};
            case DomainKind::Finite: return values_;
            case DomainKind::Real:
                throw std::logic_error("real domain is not enumerable");
        }
        return {};
    }

    std::string to_string() const {
        switch (kind_) {
            case DomainKind::Boolean: return "boolean";
            case DomainKind::Real: return "real";
            case DomainKind::Finite: {
                std::string s = "enum";
                for (const auto& v : values_) s += " " + rat_to_string(v);
                return s;
            }
        }
        return "?";
    }

    friend bool operator==(const ValueDomain& a, const ValueDomain& b) {
        return a.kind_ == b.kind_ && a.values_ == b.values_;
    }
    friend bool operator!=(const ValueDomain& a, const ValueDomain& b) { return !(a == b); }

  private:
    ValueDomain(DomainKind k, std::vector<Rat> v) : kind_(k), values_(std::move(v)) {}
    DomainKind kind_;
    std::vector<Rat> values_;
};

// ---------------------------------------------------------------------------
// Assignments

/// Total or partial valuation of model variables. Iteration order is
/// name-sorted, which keeps every serialization canonical.
class Assignment {
  public:
    Assignment() = default;

    void set(const std::string& name, Rat value) { values_[name] = std::move(value); }

    bool contains(const std::string& name) const { return values_.count(name) != 0; }

    const Rat& at(const std::string& name) const {
        auto it = values_.find(name);
        if (it == values_.end()) throw std::out_of_range("assignment has no variable " + name);
        return it->second;
    }

    std::optional<Rat> get(const std::string& name) const {
        auto it = values_.find(name);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    const std::map<std::string, Rat>& values() const { return values_; }

    Assignment restricted_to(const std::vector<std::string>& names) const {
        Assignment out;
        for (const auto& n : names) out.set(n, at(n));
        return out;
    }

    friend bool operator==(const Assignment& a, const Assignment& b) {
        return a.values_ == b.values_;
    }
    friend bool operator!=(const Assignment& a, const Assignment& b) { return !(a == b); }
    friend bool operator<(const Assignment& a, const Assignment& b) {
        return a.values_ < b.values_;
    }

    std::string to_string() const {
        std::ostringstream os;
        bool first = true;
        for (const auto& [name, v] : values_) {
            if (!first) os << " ";
            os << name << "=" << rat_to_string(v);
            first = false;
        }
        return os.str();
    }

  private:
    std::map<std::string, Rat> values_;
};

// ---------------------------------------------------------------------------
// Causal models

struct Violation {
    std::string kind;     // "cycle", "unknown-variable", "missing-mechanism", ...
    std::string message;  // human-readable, names offending variables

    friend bool operator==(const Violation& a, const Violation& b) {
        return a.kind == b.kind && a.message == b.message;
    }
};

class ModelError : public std::runtime_error {
  public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Acyclic structural causal model: ordered variables with domains, one
/// mechanism per variable. Parents are implicit — the free variables of the
/// mechanism. Immutable after construction; all operations return new models.
class CausalModel {
  public:
    CausalModel() = default;

    CausalModel(std::vector<std::pair<std::string, ValueDomain>> variables,
                std::map<std::string, Expr> mechanisms) {
        for (auto& [name, dom] : variables) {
            if (index_.count(name))
                throw std::invalid_argument("duplicate variable " + name);
            index_[name] = names_.size();
            names_.push_back(name);
            domains_.push_back(dom);
        }
        mechanisms_ = std::move(mechanisms);
    }

    const std::vector<std::string>& variable_names() const { return names_; }
    std::size_t variable_count() const { return names_.size(); }

    bool has_variable(const std::string& name) const { return index_.count(name) != 0; }

    const ValueDomain& domain(const std::string& name) const {
        return domains_[index_of(name)];
    }

    const Expr& mechanism(const std::string& name) const {
        auto it = mechanisms_.find(name);
        if (it == mechanisms_.end()) throw std::out_of_range("no mechanism for " + name);
        return it->second;
    }

    const std::map<std::string, Expr>& mechanisms() const { return mechanisms_; }

    std::set<std::string> parents(const std::string& name) const {
        return free_variables(mechanism(name));
    }

    /// Parentless variables, in declaration order. These are the model's
    /// inputs; to run at a different input, intervene on them.
    std::vector<std::string> input_variables() const {
        std::vector<std::string> out;
        for (const auto& n : names_)
            if (free_variables(mechanism(n)).empty()) out.push_back(n);
        return out;
    }

    /// New model with the given mechanisms replacing the current ones.
    CausalModel with_mechanisms(const std::map<std::string, Expr>& replacements) const {
        CausalModel m = *this;
        for (const auto& [name, expr] : replacements) {
            if (!m.has_variable(name))
                throw ModelError("unknown target variable " + name);
            m.mechanisms_[name] = expr;
        }
        return m;
    }

    friend bool operator==(const CausalModel& a, const CausalModel& b) {
        return a.names_ == b.names_ && a.domains_ == b.domains_ &&
               a.mechanisms_ == b.mechanisms_;
    }
    friend bool operator!=(const CausalModel& a, const CausalModel& b) { return !(a == b); }

    // -- validation ---------------------------------------------------------

    /// Structural invariants. Violations are data, not failures: an empty
    /// list means the model is well-formed. A finite_check_limit of 0 skips
    /// the exhaustive finite-domain closure check (structure + cycles only).
    std::vector<Violation> validate(std::size_t finite_check_limit = 1u << 16) const {
        std::vector<Violation> out;
        for (const auto& n : names_) {
            if (!mechanisms_.count(n))
                out.push_back({"missing-mechanism", "variable " + n + " has no mechanism"});
        }
        for (const auto& [name, expr] : mechanisms_) {
            if (!has_variable(name)) {
                out.push_back({"unknown-variable",
                               "mechanism given for undeclared variable " + name});
                continue;
            }
            for (const auto& ref : free_variables(expr)) {
                if (!has_variable(ref))
                    out.push_back({"unknown-variable", "mechanism of " + name +
                                                           " references undeclared variable " + ref});
            }
        }
        if (!out.empty()) return out;  // structure first; cycles need known refs

        if (auto cycle = find_cycle()) {
            std::string path;
            for (const auto& v : *cycle) {
                if (!path.empty()) path += " -> ";
                path += v;
            }
            out.push_back({"cycle", "cycle at " + cycle->front() + ": " + path});
            return out;
        }

        check_finite_domain_closure(out, finite_check_limit);
        return out;
    }

    bool is_valid() const { return validate().empty(); }

    void ensure_valid() const {
        auto v = validate();
        if (!v.empty()) throw ModelError("invalid model: " + v.front().message);
    }

    /// Topological order (declaration order among independents).
    std::vector<std::string> topological_order() const {
        std::map<std::string, int> indegree;
        std::map<std::string, std::vector<std::string>> consumers;
        for (const auto& n : names_) indegree[n] = 0;
        for (const auto& n : names_) {
            for (const auto& p : parents(n)) {
                if (!has_variable(p)) throw ModelError("unknown variable " + p);
                ++indegree[n];
                consumers[p].push_back(n);
            }
        }
        std::vector<std::string> ready, order;
        for (const auto& n : names_)
            if (indegree[n] == 0) ready.push_back(n);
        std::size_t next = 0;
        while (next < ready.size()) {
            std::string n = ready[next++];
            order.push_back(n);
            for (const auto& c : consumers[n]) {
                if (--indegree[c] == 0) ready.push_back(c);
            }
        }
        // Kahn order seeded by declaration order: deterministic
        if (order.size() != names_.size()) throw ModelError("cyclic model");
        return order;
    }

    // -- evaluation ---------------------------------------------------------

    /// The unique solution: evaluate mechanisms in topological order.
    /// Exact rational arithmetic; realized values are checked against the
    /// variable domains (the only domain check possible on real parents).
    /// Cyclic models are rejected before any evaluation; full structural
    /// validation is validate()'s job.
    Assignment run(const EvalOptions& opts = EvalOptions::exact(),
                   EvalStats* stats = nullptr) const {
        Assignment env;
        for (const auto& n : topological_order()) {
            Rat v = evaluate(mechanism(n), env.values(), opts, stats);
            if (!domain(n).contains(v))
                throw ModelError("mechanism of " + n + " produced " + rat_to_string(v) +
                                 " outside its domain");
            env.set(n, v);
        }
        return env;
    }

  private:
    std::size_t index_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::out_of_range("unknown variable " + name);
        return it->second;
    }

    /// DFS cycle detection; returns one cycle path if present.
    std::optional<std::vector<std::string>> find_cycle() const {
        std::map<std::string, int> state;  // 0 unvisited, 1 on stack, 2 done
        std::vector<std::string> stack;
        std::optional<std::vector<std::string>> found;

        auto dfs = [&](auto&& self, const std::string& n) -> bool {
            state[n] = 1;
            stack.push_back(n);
            for (const auto& p : parents(n)) {
                if (found) return true;
                if (state[p] == 1) {
                    auto it = std::find(stack.begin(), stack.end(), p);
                    std::vector<std::string> cycle(it, stack.end());
                    cycle.push_back(p);
                    found = cycle;
                    return true;
                }
                if (state[p] == 0 && self(self, p)) return true;
            }
            stack.pop_back();
            state[n] = 2;
            return false;
        };

        for (const auto& n : names_) {
            if (state[n] == 0 && dfs(dfs, n)) break;
        }
        return found;
    }

    /// Exhaustive closure check where all parents have finite domains and the
    /// product space is small enough; real-domain parents are checked on
    /// realized values only (at run time).
    void check_finite_domain_closure(std::vector<Violation>& out,
                                     std::size_t limit) const {
        if (limit == 0) return;
        for (const auto& n : names_) {
            const Expr& mech = mechanism(n);
            std::set<std::string> parent_set = parents(n);
            std::vector<std::string> ps(parent_set.begin(), parent_set.end());
            bool enumerable = true;
            std::size_t combos = 1;
            for (const auto& p : ps) {
                if (!domain(p).is_finite()) {
                    enumerable = false;
                    break;
                }
                combos *= domain(p).values().size();
                if (combos > limit) {
                    enumerable = false;
                    break;
                }
            }
            if (!enumerable) continue;

            std::vector<std::vector<Rat>> domains;
            for (const auto& p : ps) domains.push_back(domain(p).values());
            std::vector<std::size_t> idx(ps.size(), 0);
            while (true) {
                std::map<std::string, Rat> env;
                for (std::size_t i = 0; i < ps.size(); ++i) env[ps[i]] = domains[i][idx[i]];
                bool bad = false;
                try {
                    Rat v = evaluate(mech, env);
                    if (!domain(n).contains(v)) {
                        out.push_back({"domain",
                                       "mechanism of " + n + " produces " + rat_to_string(v) +
                                           " outside its domain at " +
                                           [&] {
                                               Assignment a;
                                               for (auto& [k, val] : env) a.set(k, val);
                                               return a.to_string();
                                           }()});
                        bad = true;
                    }
                } catch (const EvalError& ex) {
                    out.push_back({"domain", "mechanism of " + n + " fails: " + ex.what()});
                    bad = true;
                }
                if (bad) break;  // one witness per variable is enough
                std::size_t k = 0;
                while (k < idx.size()) {
                    if (++idx[k] < domains[k].size()) break;
                    idx[k] = 0;
                    ++k;
                }
                if (k == idx.size()) break;
                if (ps.empty()) break;
            }
        }
    }

    std::vector<std::string> names_;
    std::vector<ValueDomain> domains_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, Expr> mechanisms_;
};

/// Convenience builder used by fixtures and tests.
class ModelBuilder {
  public:
    ModelBuilder& variable(std::string name, ValueDomain domain, Expr mechanism) {
        vars_.emplace_back(std::move(name), std::move(domain));
        mechs_.emplace(vars_.back().first, std::move(mechanism));
        return *this;
    }
    ModelBuilder& input(std::string name, ValueDomain domain, Rat default_value = Rat(0)) {
        return variable(std::move(name), std::move(domain), Expr::constant(default_value));
    }
    CausalModel build() const { return CausalModel(vars_, mechs_); }

  private:
    std::vector<std::pair<std::string, ValueDomain>> vars_;
    std::map<std::string, Expr> mechs_;
};

/// All assignments over the given variables' finite domains, in binary-counter
/// order with the last variable fastest. The canonical input space.
inline std::vector<Assignment> enumerate_assignments(const CausalModel& model,
                                                     const std::vector<std::string>& vars) {
    std::vector<std::vector<Rat>> domains;
    for (const auto& v : vars) {
        const auto& d = model.domain(v);
        if (!d.is_finite())
            throw ModelError("cannot enumerate real-valued variable " + v);
        domains.push_back(d.values());
    }
    std::vector<Assignment> out;
    if (vars.empty()) {
        out.emplace_back();
        return out;
    }
    std::vector<std::size_t> idx(vars.size(), 0);
    while (true) {
        Assignment a;
        for (std::size_t i = 0; i < vars.size(); ++i) a.set(vars[i], domains[i][idx[i]]);
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

/// The model's full boolean/finite input space ("all-boolean" selector).
inline std::vector<Assignment> all_input_assignments(const CausalModel& model) {
    return enumerate_assignments(model, model.input_variables());
}

}  // namespace causalite
