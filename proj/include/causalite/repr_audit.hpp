#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "causalite/abstraction.hpp"
#include "causalite/alignment.hpp"
#include "causalite/intervene.hpp"
#include "causalite/model.hpp"
#include "causalite/report.hpp"

namespace causalite {

/// A property of the inputs, e.g. "the second pair shows the same value" =
/// xnor(A3, A4). Peripheral content is stipulated, not derived.
struct PropertySpec {
    std::string name;
    Expr evaluator;  // over input variables, finite-valued
};

struct InformationRow {
    std::string input;
    std::string vehicle_value;   // pi applied to the cell at the factual run
    std::string property_value;  // property applied to the input
    bool agree = false;
};

struct MisrepresentationWitness {
    std::string input;
    std::string cell_setting;    // realized cell values forced on the vehicle
    std::string pi_value;        // what the vehicle then represents
    std::string property_value;  // what the input actually satisfies
    std::string low_output;      // translated low-level task output
    std::string high_output;     // high-level output under the incorrect value
};

struct AuditReport {
    std::string vehicle;
    std::string property;
    bool aligned = true;
    std::string not_aligned_reason;

    bool information_pass = false;
    std::vector<InformationRow> information_table;

    bool use_pass = false;
    VerificationReport use_evidence;

    bool misrepresentation_pass = false;
    std::vector<MisrepresentationWitness> misrepresentation_witnesses;

    bool pass() const {
        return aligned && information_pass && use_pass && misrepresentation_pass;
    }

    std::string to_text() const {
        std::ostringstream os;
        os << "vehicle: " << vehicle << "\n";
        os << "property: " << property << "\n";
        if (!aligned) {
            os << "aligned: no (" << not_aligned_reason << ")\n";
            os << "verdict: fail\n";
            return os.str();
        }
        os << "information: " << (information_pass ? "pass" : "fail") << "\n";
        for (const auto& row : information_table)
            os << "  input " << row.input << " vehicle " << row.vehicle_value << " property "
               << row.property_value << (row.agree ? "" : "  <- disagrees") << "\n";
        os << "use: " << (use_pass ? "pass" : "fail") << "\n";
        os << "use-checked: " << use_evidence.checked << "\n";
        for (const auto& w : use_evidence.witnesses)
            os << "  use-witness: " << w.interventional << " at " << w.base << ": " << w.detail
               << "\n";
        os << "misrepresentation: " << (misrepresentation_pass ? "pass" : "fail") << "\n";
        if (!misrepresentation_witnesses.empty()) {
            const auto& w = misrepresentation_witnesses.front();
            os << "  witness-input: " << w.input << "\n";
            os << "  witness-cell-setting: " << w.cell_setting << "\n";
            os << "  witness-pi-value: " << w.pi_value << "\n";
            os << "  witness-property-value: " << w.property_value << "\n";
            os << "  witness-low-output: " << w.low_output << "\n";
            os << "  witness-high-output: " << w.high_output << "\n";
        }
        os << "verdict: " << (pass() ? "pass" : "fail") << "\n";
        return os.str();
    }
};

namespace detail {

/// The high model's task output: its unique sink. The audits compare task
/// outputs only.
inline std::string high_sink(const CausalModel& high) {
    std::set<std::string> has_consumer;
    for (const auto& n : high.variable_names())
        for (const auto& p : high.parents(n)) has_consumer.insert(p);
    std::string sink;
    for (const auto& n : high.variable_names())
        if (!has_consumer.count(n)) sink = n;
    if (sink.empty()) throw ModelError("high model has no sink variable");
    return sink;
}

/// Realized cell values of the vehicle over the input space, deduplicated,
/// in canonical order.
inline std::vector<Assignment> realized_cell_values(const CausalModel& low,
                                                    const AlignedVariable& entry,
                                                    const std::vector<Assignment>& input_space,
                                                    const EvalOptions& opts) {
    std::set<std::string> seen;
    std::vector<Assignment> out;
    for (const auto& x : input_space) {
        Assignment cell = run_at(low, x, opts).restricted_to(entry.cell);
        if (seen.insert(cell.to_string()).second) out.push_back(std::move(cell));
    }
    std::sort(out.begin(), out.end(),
              [](const Assignment& a, const Assignment& b) { return a.to_string() < b.to_string(); });
    return out;
}

}  // namespace detail

/// Information: the vehicle's pi value at the factual run must agree with
/// the property on every input.
inline std::pair<bool, std::vector<InformationRow>> audit_information(
    const CausalModel& low, const Alignment& alignment, const std::string& vehicle,
    const PropertySpec& prop, const std::vector<Assignment>& input_space,
    const CheckOptions& options = {}) {
    if (!alignment.has(vehicle))
        throw ModelError("vehicle " + vehicle + " has no alignment entry");
    const auto& entry = alignment.entry(vehicle);
    EvalOptions opts = options.eval();

    bool pass = true;
    std::vector<InformationRow> table;
    for (const auto& x : input_space) {
        InformationRow row;
        row.input = x.to_string();
        Rat want = evaluate(prop.evaluator, x.values(), opts);
        row.property_value = rat_to_string(want);
        try {
            Assignment run = run_at(low, x, opts);
            Rat got = evaluate(entry.component_map, run.restricted_to(entry.cell).values(), opts);
            row.vehicle_value = rat_to_string(got);
            row.agree = got == want;
        } catch (const EvalError& ex) {
            row.vehicle_value = std::string("undefined (") + ex.what() + ")";
            row.agree = false;
        }
        if (!row.agree) pass = false;
        table.push_back(std::move(row));
    }
    return {pass, std::move(table)};
}

/// Use: vehicle-restricted commutation. Every interchange intervention on
/// the vehicle's cell must produce the task output the high-level model
/// predicts under the corresponding high-level intervention.
inline std::pair<bool, VerificationReport> audit_use(
    const CausalModel& low, const CausalModel& high, const Alignment& alignment,
    const std::string& vehicle, const std::vector<Assignment>& input_space,
    const CheckOptions& options = {}) {
    VerificationReport report;
    report.check = "use";
    if (!alignment.has(vehicle) || !high.has_variable(vehicle)) {
        Witness w;
        w.interventional = "n/a";
        w.detail = "vehicle " + vehicle + " is not aligned to a high-level variable";
        report.witnesses.push_back(w);
        return {false, report};
    }
    EvalOptions opts = options.eval();
    const auto& entry = alignment.entry(vehicle);
    std::string output = detail::high_sink(high);
    if (!alignment.has(output))
        throw ModelError("task output " + output + " has no alignment entry");
    const auto& out_entry = alignment.entry(output);
    SettingsMap smap = settings_map_from_alignment(alignment, high, opts);

    std::vector<Assignment> low_runs;
    for (const auto& x : input_space) low_runs.push_back(run_at(low, x, opts));

    for (std::size_t b = 0; b < input_space.size(); ++b) {
        for (std::size_t s = 0; s < input_space.size(); ++s) {
            ++report.checked;
            EvalStats stats;
            Assignment cell = low_runs[s].restricted_to(entry.cell);
            Rat pi_value;
            try {
                pi_value = detail::apply_component_map(entry, high, cell, opts, &stats);
            } catch (const ModelError& ex) {
                Witness w;
                w.base = input_space[b].to_string();
                w.source = input_space[s].to_string();
                w.interventional = "interchange on " + vehicle;
                w.detail = ex.what();
                report.witnesses.push_back(w);
                continue;
            }
            Interventional i_low = Interventional::hard(cell);
            Interventional i_high = Interventional::hard(vehicle, pi_value);

            Assignment low_run =
                apply(i_low, set_inputs(low, input_space[b])).run(opts, &stats);
            Assignment high_run =
                apply(i_high, set_inputs(high, smap.map_inputs(input_space[b]))).run(opts, &stats);
            Rat low_label = evaluate(out_entry.component_map,
                                     low_run.restricted_to(out_entry.cell).values(), opts, &stats);
            report.margin_violations += stats.margin_violations;
            if (low_label != high_run.at(output)) {
                Witness w;
                w.base = input_space[b].to_string();
                w.source = input_space[s].to_string();
                w.interventional = i_low.label();
                w.low_run = low_run.to_string();
                w.translated = output + "=" + rat_to_string(low_label);
                w.high_run = high_run.to_string();
                w.detail = output + " translated=" + rat_to_string(low_label) +
                           " high=" + rat_to_string(high_run.at(output));
                report.witnesses.push_back(w);
            }
        }
    }
    report.sort_witnesses();
    return {report.pass(), report};
}

/// Misrepresentation: some input plus a realized-elsewhere cell setting
/// must make the vehicle carry the wrong value while the system coherently
/// consumes it — the low output under the forced cell equals the high
/// output under the corresponding incorrect high-level intervention, and is
/// reflected as an incorrect output (it differs from the factual run's).
/// A model whose output ignores the vehicle therefore has no witness.
inline std::pair<bool, std::vector<MisrepresentationWitness>> audit_misrepresentation(
    const CausalModel& low, const CausalModel& high, const Alignment& alignment,
    const std::string& vehicle, const PropertySpec& prop,
    const std::vector<Assignment>& input_space, const CheckOptions& options = {}) {
    if (!alignment.has(vehicle) || !high.has_variable(vehicle)) return {false, {}};
    EvalOptions opts = options.eval();
    const auto& entry = alignment.entry(vehicle);
    std::string output = detail::high_sink(high);
    const auto& out_entry = alignment.entry(output);
    SettingsMap smap = settings_map_from_alignment(alignment, high, opts);

    auto settings = detail::realized_cell_values(low, entry, input_space, opts);
    std::vector<MisrepresentationWitness> witnesses;
    for (const auto& x : input_space) {
        Rat want = evaluate(prop.evaluator, x.values(), opts);
        Assignment factual_run = run_at(low, x, opts);
        Rat factual_label = evaluate(out_entry.component_map,
                                     factual_run.restricted_to(out_entry.cell).values(), opts);
        for (const auto& setting : settings) {
            Rat pi_value;
            try {
                pi_value = detail::apply_component_map(entry, high, setting, opts, nullptr);
            } catch (const ModelError&) {
                continue;
            }
            if (pi_value == want) continue;  // not a misrepresentation

            Assignment low_run = apply(Interventional::hard(setting),
                                       set_inputs(low, x)).run(opts);
            Rat low_label = evaluate(out_entry.component_map,
                                     low_run.restricted_to(out_entry.cell).values(), opts);
            Assignment high_run = apply(Interventional::hard(vehicle, pi_value),
                                        set_inputs(high, smap.map_inputs(x))).run(opts);
            if (low_label == high_run.at(output) && low_label != factual_label) {
                MisrepresentationWitness w;
                w.input = x.to_string();
                w.cell_setting = setting.to_string();
                w.pi_value = rat_to_string(pi_value);
                w.property_value = rat_to_string(want);
                w.low_output = output + "=" + rat_to_string(low_label);
                w.high_output = output + "=" + rat_to_string(high_run.at(output));
                witnesses.push_back(std::move(w));
            }
        }
    }
    return {!witnesses.empty(), std::move(witnesses)};
}

/// All three section-5 criteria against one vehicle.
inline AuditReport audit(const CausalModel& low, const CausalModel& high,
                         const Alignment& alignment, const std::string& vehicle,
                         const PropertySpec& prop, const std::vector<Assignment>& input_space,
                         const CheckOptions& options = {}) {
    AuditReport report;
    report.vehicle = vehicle;
    report.property = expr_to_string(prop.evaluator);
    if (!alignment.has(vehicle) || !high.has_variable(vehicle)) {
        report.aligned = false;
        report.not_aligned_reason = "vehicle has no high-level counterpart in the alignment";
        return report;
    }
    auto [info_pass, table] = audit_information(low, alignment, vehicle, prop, input_space, options);
    report.information_pass = info_pass;
    report.information_table = std::move(table);
    auto [use_pass, evidence] = audit_use(low, high, alignment, vehicle, input_space, options);
    report.use_pass = use_pass;
    report.use_evidence = std::move(evidence);
    auto [mis_pass, witnesses] =
        audit_misrepresentation(low, high, alignment, vehicle, prop, input_space, options);
    report.misrepresentation_pass = mis_pass;
    report.misrepresentation_witnesses = std::move(witnesses);
    return report;
}

}  // namespace causalite
