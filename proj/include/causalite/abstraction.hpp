#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "causalite/alignment.hpp"
#include "causalite/intervene.hpp"
#include "causalite/model.hpp"
#include "causalite/parallel.hpp"
#include "causalite/report.hpp"
#include "causalite/translate.hpp"

namespace causalite {

/// Settings-level map tau from low-level to high-level valuations, plus its
/// action on input assignments. Partial: coordinates may come back
/// undefined.
struct SettingsMap {
    std::string label;
    std::function<PartialAssignment(const Assignment&)> map_settings;
    std::function<Assignment(const Assignment&)> map_inputs;
};

inline SettingsMap settings_map_from_alignment(const Alignment& alignment,
                                               const CausalModel& high,
                                               const EvalOptions& opts = EvalOptions::exact()) {
    SettingsMap sm;
    sm.label = "tau_pi";
    sm.map_settings = [alignment, high, opts](const Assignment& low) {
        return tau_of(alignment, high, low, opts);
    };
    auto high_inputs = high.input_variables();
    sm.map_inputs = [alignment, high, high_inputs, opts](const Assignment& low_inputs) {
        Assignment out;
        for (const auto& h : high_inputs) {
            const auto& e = alignment.entry(h);
            out.set(h, evaluate(e.component_map, low_inputs.values(), opts));
        }
        return out;
    };
    return sm;
}

/// Identity-on-position settings map: the i-th low variable corresponds to
/// the i-th high variable. Values are copied; a value outside the high
/// domain leaves the coordinate undefined.
inline SettingsMap positional_settings_map(const CausalModel& low, const CausalModel& high) {
    if (low.variable_count() != high.variable_count())
        throw ModelError("positional settings map needs equally many variables");
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < low.variable_count(); ++i)
        pairs.emplace_back(low.variable_names()[i], high.variable_names()[i]);

    SettingsMap sm;
    sm.label = "positional-identity";
    sm.map_settings = [pairs, high](const Assignment& low_run) {
        PartialAssignment out;
        for (const auto& [l, h] : pairs) {
            auto v = low_run.get(l);
            if (v && high.domain(h).contains(*v)) {
                out.values[h] = *v;
            } else {
                out.values[h] = std::nullopt;
                out.undefined.push_back(h);
            }
        }
        return out;
    };
    auto low_inputs = low.input_variables();
    auto high_inputs = high.input_variables();
    if (low_inputs.size() != high_inputs.size())
        throw ModelError("positional settings map needs equally many input variables");
    std::vector<std::pair<std::string, std::string>> input_pairs;
    for (std::size_t i = 0; i < low_inputs.size(); ++i)
        input_pairs.emplace_back(low_inputs[i], high_inputs[i]);
    sm.map_inputs = [input_pairs](const Assignment& low_in) {
        Assignment out;
        for (const auto& [l, h] : input_pairs) out.set(h, low_in.at(l));
        return out;
    };
    return sm;
}

inline SettingsMap settings_map_from_translation(const Translation& t,
                                                 const EvalOptions& opts = EvalOptions::exact()) {
    SettingsMap sm;
    sm.label = "translation";
    sm.map_settings = [t, opts](const Assignment& low_run) {
        PartialAssignment out;
        Assignment fwd = apply_forward(t, low_run, opts);
        for (const auto& [name, v] : fwd.values()) out.values[name] = v;
        return out;
    };
    sm.map_inputs = [t, opts](const Assignment& low_in) {
        Assignment out;
        // forward components of variables that are inputs on both sides
        for (const auto& [name, dom] : t.target_variables) {
            const Expr& f = t.forward.at(name);
            bool applicable = true;
            for (const auto& ref : free_variables(f))
                if (!low_in.contains(ref)) applicable = false;
            if (applicable && free_variables(f).size() > 0)
                out.set(name, evaluate(f, low_in.values(), opts));
        }
        return out;
    };
    return sm;
}

/// Finite map from low-level interventionals to high-level ones, looked up
/// by structural equality.
struct OmegaMap {
    std::vector<std::pair<Interventional, Interventional>> entries;

    std::optional<Interventional> lookup(const Interventional& i) const {
        for (const auto& [lo, hi] : entries)
            if (lo == i) return hi;
        return std::nullopt;
    }
};

struct CheckOptions {
    int recursion_depth = 3;       // max nested interchange depth (>=1)
    int recursive_samples = 32;    // sampled recursive variants per extra depth
    std::uint64_t seed = 0;
    int jobs = 1;
    bool include_sink_targets = false;  // also target the high model's sinks
    std::optional<EvalOptions> tolerance;  // engaged for float-derived translations
    std::size_t finite_check_limit = 1u << 16;

    EvalOptions eval() const { return tolerance ? *tolerance : EvalOptions::exact(); }
};

namespace detail {

/// One commuting-equation check:
///   tau(Run(low_x with i_low)) == Run(high_{mapped x} with i_high)
/// compared on every defined tau coordinate; an undefined coordinate that
/// the high model values is itself a mismatch.
inline std::optional<Witness> commutation_witness(
    const CausalModel& low, const CausalModel& high, const SettingsMap& smap,
    const Interventional& i_low, const Interventional& i_high, const Assignment& input,
    const EvalOptions& opts, EvalStats* stats) {
    Assignment low_run = apply(i_low, set_inputs(low, input)).run(opts, stats);
    Assignment high_input = smap.map_inputs(input);
    Assignment high_run = apply(i_high, set_inputs(high, high_input)).run(opts, stats);
    PartialAssignment translated = smap.map_settings(low_run);

    std::string mismatch;
    for (const auto& [name, maybe] : translated.values) {
        if (!high_run.contains(name)) continue;
        if (!maybe) {
            mismatch = name + " translated=undefined high=" + rat_to_string(high_run.at(name));
            break;
        }
        bool equal;
        if (opts.toleranced && high.domain(name).kind() == DomainKind::Real) {
            equal = rat_abs(*maybe - high_run.at(name)) <= opts.eq_tol;
        } else {
            equal = *maybe == high_run.at(name);
        }
        if (!equal) {
            mismatch = name + " translated=" + rat_to_string(*maybe) +
                       " high=" + rat_to_string(high_run.at(name));
            break;
        }
    }
    if (mismatch.empty()) return std::nullopt;

    Witness w;
    w.interventional = i_low.label();
    w.base = input.to_string();
    w.low_run = low_run.to_string();
    w.translated = translated.to_string();
    w.high_run = high_run.to_string();
    w.detail = mismatch;
    return w;
}

}  // namespace detail

/// The commuting equation over an explicit interventional family. The null
/// interventional (factual run) is always verified per input; supplied
/// interventionals are the ones counted.
inline VerificationReport check_exact_transformation(
    const CausalModel& low, const CausalModel& high, const SettingsMap& smap,
    const std::vector<Interventional>& low_interventionals, const OmegaMap& omega,
    const std::vector<Assignment>& input_space, const CheckOptions& options = {}) {
    for (const auto& i : low_interventionals)
        if (!omega.lookup(i))
            throw ModelError("omega undefined on interventional " + i.label());

    VerificationReport report;
    report.check = "exact-transformation";
    report.toleranced = options.tolerance.has_value();
    EvalOptions opts = options.eval();

    struct Task {
        const Assignment* input;
        const Interventional* i_low;
        const Interventional* i_high;
        bool counted;
    };
    Interventional null_iv;
    std::vector<Task> tasks;
    std::vector<Interventional> highs;
    highs.reserve(low_interventionals.size());
    for (const auto& i : low_interventionals) highs.push_back(*omega.lookup(i));
    for (const auto& x : input_space) {
        bool has_null = false;
        for (const auto& i : low_interventionals)
            if (i.is_null()) has_null = true;
        if (!has_null) tasks.push_back({&x, &null_iv, &null_iv, false});
        for (std::size_t k = 0; k < low_interventionals.size(); ++k)
            tasks.push_back({&x, &low_interventionals[k], &highs[k], true});
    }

    struct Outcome {
        std::optional<Witness> witness;
        long margin_violations = 0;
    };
    auto outcomes = parallel_index_map<Outcome>(
        tasks.size(), options.jobs, [&](std::size_t idx) {
            const Task& t = tasks[idx];
            EvalStats stats;
            Outcome o;
            o.witness = detail::commutation_witness(low, high, smap, *t.i_low, *t.i_high,
                                                    *t.input, opts, &stats);
            o.margin_violations = stats.margin_violations;
            return o;
        });
    for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
        if (tasks[idx].counted) ++report.checked;
        report.margin_violations += outcomes[idx].margin_violations;
        if (outcomes[idx].witness) report.witnesses.push_back(*outcomes[idx].witness);
    }
    report.sort_witnesses();
    return report;
}

// ---------------------------------------------------------------------------
// Constructive abstraction

/// The low-level variables of the given high-level variables' cells.
inline std::vector<std::string> low_cells(const Alignment& alignment,
                                          const std::vector<std::string>& high_vars) {
    std::vector<std::string> out;
    for (const auto& hv : high_vars)
        for (const auto& lv : alignment.entry(hv).cell) out.push_back(lv);
    return out;
}

namespace detail {

/// pi maps applied to one tuple of cell values; throws ModelError when a
/// component map is undefined on the given values.
inline Rat apply_component_map(const AlignedVariable& e, const CausalModel& high,
                               const Assignment& cell_values, const EvalOptions& opts,
                               EvalStats* stats) {
    Rat v = evaluate(e.component_map, cell_values.values(), opts, stats);
    if (!high.domain(e.high_var).contains(v))
        throw ModelError("pi_" + e.high_var + " undefined at " + cell_values.to_string() +
                         " (value " + rat_to_string(v) + " outside the domain)");
    return v;
}

}  // namespace detail

/// Enumerate the interchange-intervention family induced by the alignment
/// over the input space, derive omega_pi, and verify the commuting equation
/// for every member. Component maps must also prove surjective over the
/// realized values. Recursive interchange variants (depth 2..recursion_depth)
/// are verified on a deterministic seeded sample and tallied separately.
inline VerificationReport check_constructive_abstraction(
    const CausalModel& low, const CausalModel& high, const Alignment& alignment,
    const std::vector<Assignment>& input_space, const CheckOptions& options = {}) {
    if (input_space.empty()) throw ModelError("input space must be nonempty");
    {
        auto v = alignment.validate_against(low, high);
        if (!v.empty()) throw ModelError("invalid alignment: " + v.front().message);
    }

    VerificationReport report;
    report.check = "constructive-abstraction";
    report.toleranced = options.tolerance.has_value();
    EvalOptions opts = options.eval();
    SettingsMap smap = settings_map_from_alignment(alignment, high, opts);

    // Factual runs; also the realized cell values for the surjectivity check.
    std::vector<Assignment> low_runs;
    low_runs.reserve(input_space.size());
    for (const auto& x : input_space) low_runs.push_back(run_at(low, x, opts));

    // Component maps over the realized values. Input cells must be defined
    // on every supplied input (omega_pi could not express the input
    // interventions otherwise); an intermediate map that misses part of the
    // high domain over the realized values is recorded, and the commuting
    // checks below catch it wherever it matters.
    auto high_input_list = high.input_variables();
    std::set<std::string> high_inputs(high_input_list.begin(), high_input_list.end());
    for (const auto& e : alignment.entries()) {
        if (!high.domain(e.high_var).is_finite()) continue;
        std::set<Rat> covered;
        bool undefined_somewhere = false;
        for (std::size_t k = 0; k < low_runs.size(); ++k) {
            try {
                covered.insert(detail::apply_component_map(
                    e, high, low_runs[k].restricted_to(e.cell), opts, nullptr));
            } catch (const ModelError&) {
                undefined_somewhere = true;
                if (!high_inputs.count(e.high_var)) continue;
                Witness w;
                w.interventional = "null";
                w.base = input_space[k].to_string();
                w.detail = "pi_" + e.high_var + " undefined at realized value " +
                           low_runs[k].restricted_to(e.cell).to_string();
                report.witnesses.push_back(w);
            } catch (const EvalError& ex) {
                undefined_somewhere = true;
                if (!high_inputs.count(e.high_var)) continue;
                Witness w;
                w.interventional = "null";
                w.base = input_space[k].to_string();
                w.detail = std::string("pi_") + e.high_var + " failed: " + ex.what();
                report.witnesses.push_back(w);
            }
        }
        if (!undefined_somewhere) {
            for (const auto& v : high.domain(e.high_var).values()) {
                if (!covered.count(v))
                    report.notes.push_back("pi_" + e.high_var +
                                           " never attains " + rat_to_string(v) +
                                           " over the realized values");
            }
        }
    }
    if (!report.witnesses.empty()) {
        report.sort_witnesses();
        return report;
    }

    // Interchange target pool: intermediate high-level variables (non-input,
    // and non-sink unless requested) that own a cell.
    std::vector<std::string> pool;
    {
        auto inputs = high.input_variables();
        std::set<std::string> input_set(inputs.begin(), inputs.end());
        std::set<std::string> has_consumer;
        for (const auto& n : high.variable_names())
            for (const auto& p : high.parents(n)) has_consumer.insert(p);
        for (const auto& n : high.variable_names()) {
            if (input_set.count(n)) continue;
            if (!alignment.has(n)) continue;
            if (!options.include_sink_targets && !has_consumer.count(n)) continue;
            pool.push_back(n);
        }
    }
    std::vector<std::vector<std::string>> target_subsets;
    for (std::size_t mask = 1; mask < (std::size_t(1) << pool.size()); ++mask) {
        std::vector<std::string> subset;
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (mask & (std::size_t(1) << i)) subset.push_back(pool[i]);
        target_subsets.push_back(std::move(subset));
    }

    struct Task {
        std::size_t base = 0;
        std::size_t source = 0;           // depth-1 source input index
        const std::vector<std::string>* targets = nullptr;  // null: factual
        Assignment source_values;          // resolved low cell source run (recursive case)
        bool recursive = false;
        std::string recursive_label;
    };
    std::vector<Task> tasks;
    for (std::size_t b = 0; b < input_space.size(); ++b) {
        Task factual;
        factual.base = b;
        factual.source = b;
        tasks.push_back(std::move(factual));
    }
    for (std::size_t b = 0; b < input_space.size(); ++b)
        for (std::size_t s = 0; s < input_space.size(); ++s)
            for (const auto& subset : target_subsets) {
                Task t;
                t.base = b;
                t.source = s;
                t.targets = &subset;
                tasks.push_back(std::move(t));
            }
    std::size_t primary_tasks = tasks.size();

    // Recursive interchange variants: sources sampled as nested interchanges.
    if (options.recursion_depth >= 2 && !pool.empty()) {
        std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ull);
        for (int depth = 2; depth <= options.recursion_depth; ++depth) {
            for (int k = 0; k < options.recursive_samples; ++k) {
                auto pick_input = [&] { return rng() % input_space.size(); };
                auto pick_subset = [&] { return rng() % target_subsets.size(); };
                // innermost spec first
                auto spec = std::make_shared<InterchangeSpec>();
                spec->base_input = input_space[pick_input()];
                spec->source_input = input_space[pick_input()];
                spec->targets = low_cells(alignment, target_subsets[pick_subset()]);
                for (int d = 2; d < depth; ++d) {
                    auto outer = std::make_shared<InterchangeSpec>();
                    outer->base_input = input_space[pick_input()];
                    outer->recursive_source = spec;
                    outer->targets = low_cells(alignment, target_subsets[pick_subset()]);
                    spec = outer;
                }
                Task t;
                t.base = pick_input();
                std::size_t subset_idx = pick_subset();
                t.targets = &target_subsets[subset_idx];
                t.recursive = true;
                InterchangeSpec top;
                top.base_input = input_space[t.base];
                top.recursive_source = spec;
                top.targets = low_cells(alignment, target_subsets[subset_idx]);
                t.source_values = interchange_source_run(low, top, opts);
                t.recursive_label = "recursive-depth-" + std::to_string(depth);
                tasks.push_back(std::move(t));
            }
        }
    }

    struct Outcome {
        std::optional<Witness> witness;
        long margin_violations = 0;
    };
    auto outcomes = parallel_index_map<Outcome>(
        tasks.size(), options.jobs, [&](std::size_t idx) {
            const Task& t = tasks[idx];
            EvalStats stats;
            Outcome o;
            const Assignment& base = input_space[t.base];
            try {
                Interventional i_low, i_high;
                std::string source_label;
                if (t.targets != nullptr) {
                    // low side: cells pinned at their source-run values
                    const Assignment& source_run =
                        t.recursive ? t.source_values : low_runs[t.source];
                    std::vector<std::pair<std::string, Rat>> low_pins;
                    std::vector<std::pair<std::string, Rat>> high_pins;
                    for (const auto& hv : *t.targets) {
                        const auto& e = alignment.entry(hv);
                        Assignment cell_values;
                        for (const auto& lv : e.cell) {
                            low_pins.emplace_back(lv, source_run.at(lv));
                            cell_values.set(lv, source_run.at(lv));
                        }
                        high_pins.emplace_back(
                            hv, detail::apply_component_map(e, high, cell_values, opts, &stats));
                    }
                    i_low = Interventional::hard(low_pins);
                    i_high = Interventional::hard(high_pins);
                    source_label = t.recursive ? t.recursive_label + " " + i_low.label()
                                               : input_space[t.source].to_string();
                }
                o.witness = detail::commutation_witness(low, high, smap, i_low, i_high, base,
                                                        opts, &stats);
                if (o.witness && t.targets != nullptr) o.witness->source = source_label;
            } catch (const ModelError& ex) {
                Witness w;
                w.base = base.to_string();
                w.interventional = "interchange";
                w.detail = ex.what();
                o.witness = w;
            } catch (const EvalError& ex) {
                Witness w;
                w.base = base.to_string();
                w.interventional = "interchange";
                w.detail = ex.what();
                o.witness = w;
            }
            o.margin_violations = stats.margin_violations;
            return o;
        });

    for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
        if (idx < primary_tasks)
            ++report.checked;
        else
            ++report.recursive_checked;
        report.margin_violations += outcomes[idx].margin_violations;
        if (outcomes[idx].witness) report.witnesses.push_back(*outcomes[idx].witness);
    }
    report.sort_witnesses();
    return report;
}

/// Abstraction-under-translation: translate the low-level model, then check
/// constructive abstraction against it. The report carries the pulled-back
/// low-level interventional family I_tau actually used.
inline VerificationReport check_abstraction_under_translation(
    const CausalModel& low, const CausalModel& high, const Translation& translation,
    const Alignment& alignment, const std::vector<Assignment>& input_space,
    const CheckOptions& options = {}) {
    CausalModel translated = translate_model(low, translation, false, options.finite_check_limit);
    VerificationReport report =
        check_constructive_abstraction(translated, high, alignment, input_space, options);
    report.check = "abstraction-under-translation";

    // Summarize I_tau: pull back one representative hard intervention per
    // distinct target-cell set used by the interchange family.
    EvalOptions opts = options.eval();
    std::set<std::string> seen;
    std::vector<std::string> notes;
    std::vector<Assignment> low_runs;
    for (const auto& x : input_space) low_runs.push_back(run_at(translated, x, opts));
    auto pool_entries = alignment.entries();
    for (const auto& e : pool_entries) {
        bool is_input = false;
        for (const auto& iv : high.input_variables())
            if (iv == e.high_var) is_input = true;
        if (is_input) continue;
        std::string key = e.high_var;
        if (!seen.insert(key).second) continue;
        std::vector<std::pair<std::string, Rat>> pins;
        for (const auto& lv : e.cell) pins.emplace_back(lv, low_runs.front().at(lv));
        Interventional high_side = Interventional::hard(pins);
        try {
            Interventional pulled = pull_back(translation, high_side, low,
                                              options.finite_check_limit);
            std::string touched;
            for (const auto& t : pulled.targets()) {
                if (!touched.empty()) touched += ",";
                touched += t;
            }
            notes.push_back("pullback[" + high_side.label() + "] replaces {" + touched + "}");
        } catch (const ModelError& ex) {
            notes.push_back("pullback[" + high_side.label() + "] unavailable: " + ex.what());
        }
    }
    for (const auto& n : notes) report.notes.push_back(n);
    return report;
}

}  // namespace causalite
