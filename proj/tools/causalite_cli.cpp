// causalite command-line front end: load models, run checks, emit reports.
//
// Exit codes: 0 = pass, 1 = fail with witnesses, 2 = usage or parse error.
// Reports are deterministic for fixed inputs and seed and are written
// atomically.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "causalite/abstraction.hpp"
#include "causalite/align_search.hpp"
#include "causalite/fixtures.hpp"
#include "causalite/io.hpp"
#include "causalite/repr_audit.hpp"
#include "causalite/translate.hpp"

namespace {

using namespace causalite;

struct LoadedModel {
    CausalModel model;
    std::string ref;   // as given on the command line
    std::string hash;  // of the canonical serialization
};

/// "fixture:NAME" or a path to a causal-model file.
LoadedModel load_model(const std::string& ref) {
    LoadedModel out;
    out.ref = ref;
    if (ref.rfind("fixture:", 0) == 0) {
        out.model = fixtures::build_model(ref.substr(8));
    } else {
        out.model = parse_model(read_file(ref));
    }
    out.hash = hash_hex(serialize_model(out.model));
    return out;
}

Alignment load_alignment(const std::string& ref, std::string& hash) {
    Alignment a = ref.rfind("fixture:", 0) == 0 ? fixtures::build_alignment(ref.substr(8))
                                                : parse_alignment(read_file(ref));
    hash = hash_hex(serialize_alignment(a));
    return a;
}

ParsedTranslation load_translation(const std::string& ref, std::string& hash) {
    if (ref.rfind("fixture:", 0) == 0) {
        ParsedTranslation p;
        p.full = fixtures::build_translation(ref.substr(8));
        hash = hash_hex(serialize_translation(*p.full));
        return p;
    }
    std::string text = read_file(ref);
    hash = hash_hex(text);
    return parse_translation(text);
}

std::vector<Assignment> load_inputs(const std::string& selector, const CausalModel& low) {
    if (selector == "all-boolean") return all_input_assignments(low);
    if (selector.rfind("file:", 0) == 0) return parse_input_space(read_file(selector.substr(5)));
    throw std::runtime_error("unknown input selector '" + selector +
                             "' (use all-boolean or file:<path>)");
}

void emit(const std::string& text, const std::string& report_path) {
    std::cout << text;
    if (!report_path.empty()) write_file_atomic(report_path, text);
}

/// Header lines for a report file; an empty check name is skipped (used
/// when the body itself carries the check line).
std::string report_header(const std::string& check,
                          const std::vector<std::pair<std::string, std::string>>& fields) {
    std::ostringstream os;
    os << "causalite-report v1\n";
    os << "tool: causalite " << kToolVersion << "\n";
    if (!check.empty()) os << "check: " << check << "\n";
    for (const auto& [k, v] : fields) os << k << ": " << v << "\n";
    return os.str();
}

struct CommonOptions {
    std::string inputs_selector = "all-boolean";
    std::string report_path;
    std::uint64_t seed = 0;
    int jobs = default_jobs();
    std::string tolerance, margin;

    CheckOptions check_options() const {
        CheckOptions o;
        o.seed = seed;
        o.jobs = jobs;
        if (!tolerance.empty()) {
            Rat eq = rat_parse_or_throw(tolerance);
            Rat mg = margin.empty() ? eq * 1000 : rat_parse_or_throw(margin);
            o.tolerance = EvalOptions::tolerance(eq, mg);
        }
        return o;
    }

    void attach(CLI::App* cmd, bool with_inputs = true) {
        if (with_inputs)
            cmd->add_option("--inputs", inputs_selector,
                            "input space: all-boolean or file:<path>");
        cmd->add_option("--report", report_path, "write the report here (atomically)");
        cmd->add_option("--seed", seed, "seed for sampled recursive variants");
        cmd->add_option("--jobs", jobs, "worker threads (default $CAUSALITE_JOBS or 1)");
        cmd->add_option("--tolerance", tolerance,
                        "indicator equality tolerance (exact when omitted)");
        cmd->add_option("--margin", margin, "ambiguity margin for toleranced indicators");
    }
};

int finish_verification(const VerificationReport& report,
                        std::vector<std::pair<std::string, std::string>> fields,
                        const CommonOptions& common) {
    fields.emplace_back("seed", std::to_string(common.seed));
    std::string text = report_header("", fields) + report.to_text() + "end\n";
    emit(text, common.report_path);
    return report.pass() ? 0 : 1;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal-model verification toolkit"};
    app.require_subcommand(1);

    // ---- run ----------------------------------------------------------
    auto* cmd_run = app.add_subcommand("run", "solve a model and print its assignment");
    std::string run_model_ref, run_input, run_report;
    bool run_all = false;
    cmd_run->add_option("--model", run_model_ref, "model file or fixture:<name>")->required();
    cmd_run->add_option("--input", run_input,
                        "space-separated name=value pairs for the parentless inputs");
    cmd_run->add_flag("--all", run_all, "print input variables too");
    cmd_run->add_option("--report", run_report, "also write the output here");

    // ---- intervene ----------------------------------------------------
    auto* cmd_intervene = app.add_subcommand(
        "intervene", "apply an interventional (or interchange) and run the result");
    std::string iv_model_ref, iv_path, iv_interchange, iv_emit, iv_report, iv_input;
    cmd_intervene->add_option("--model", iv_model_ref, "model file or fixture:<name>")->required();
    cmd_intervene->add_option("--interventional", iv_path, "interventional file");
    cmd_intervene->add_option("--interchange", iv_interchange,
                              "interchange spec file (base/source/targets)");
    cmd_intervene->add_option("--input", iv_input, "name=value pairs for the inputs");
    cmd_intervene->add_option("--emit-model", iv_emit, "write the intervened model here");
    cmd_intervene->add_option("--report", iv_report, "also write the run output here");

    // ---- verify-abstraction --------------------------------------------
    auto* cmd_va = app.add_subcommand("verify-abstraction",
                                      "check a constructive abstraction claim");
    std::string va_low, va_high, va_alignment;
    CommonOptions va_common;
    cmd_va->add_option("--low", va_low, "low-level model")->required();
    cmd_va->add_option("--high", va_high, "high-level model")->required();
    cmd_va->add_option("--alignment", va_alignment, "alignment file or fixture:<name>")
        ->required();
    va_common.attach(cmd_va);

    // ---- verify-translation ---------------------------------------------
    auto* cmd_vt = app.add_subcommand(
        "verify-translation", "check that a translation is an exact transformation");
    std::string vt_low, vt_high, vt_translation;
    CommonOptions vt_common;
    cmd_vt->add_option("--low", vt_low, "model being recarved")->required();
    cmd_vt->add_option("--high", vt_high, "expected translated model")->required();
    cmd_vt->add_option("--translation", vt_translation, "translation file or fixture:<name>")
        ->required();
    vt_common.attach(cmd_vt);

    // ---- verify-aut ------------------------------------------------------
    auto* cmd_aut =
        app.add_subcommand("verify-aut", "check abstraction-under-translation");
    std::string aut_low, aut_high, aut_translation, aut_alignment;
    CommonOptions aut_common;
    cmd_aut->add_option("--low", aut_low, "low-level model")->required();
    cmd_aut->add_option("--high", aut_high, "high-level model")->required();
    cmd_aut->add_option("--translation", aut_translation, "translation file or fixture:<name>")
        ->required();
    cmd_aut->add_option("--alignment", aut_alignment, "alignment on the translated variables")
        ->required();
    aut_common.attach(cmd_aut);

    // ---- audit -----------------------------------------------------------
    auto* cmd_audit = app.add_subcommand("audit", "representation criteria for a vehicle");
    std::string audit_request, audit_low, audit_high, audit_alignment, audit_vehicle,
        audit_property;
    CommonOptions audit_common;
    cmd_audit->add_option("--request", audit_request, "audit-request file (overrides the rest)");
    cmd_audit->add_option("--low", audit_low, "low-level model");
    cmd_audit->add_option("--high", audit_high, "high-level model");
    cmd_audit->add_option("--alignment", audit_alignment, "alignment file or fixture:<name>");
    cmd_audit->add_option("--vehicle", audit_vehicle, "high-level variable to audit");
    cmd_audit->add_option("--property", audit_property,
                          "property expression over the input variables");
    audit_common.attach(cmd_audit);

    // ---- search-alignment -------------------------------------------------
    auto* cmd_search =
        app.add_subcommand("search-alignment", "find a rotation witnessing an abstraction");
    std::string s_model, s_high, s_alignment, s_layer, s_emit;
    long s_budget = 5000;
    CommonOptions s_common;
    cmd_search->add_option("--model", s_model, "model with a real-valued layer")->required();
    cmd_search->add_option("--high", s_high, "high-level model")->required();
    cmd_search->add_option("--alignment", s_alignment,
                           "alignment naming where high variables should live")
        ->required();
    cmd_search->add_option("--layer", s_layer, "comma-separated layer variables")->required();
    cmd_search->add_option("--budget", s_budget, "max objective evaluations");
    cmd_search->add_option("--emit-translation", s_emit, "write the found translation here");
    s_common.attach(cmd_search);

    // ---- fixtures ----------------------------------------------------------
    auto* cmd_fixtures = app.add_subcommand("fixtures", "named objects and task generation");
    auto* fx_list = cmd_fixtures->add_subcommand("list", "list fixture names");
    auto* fx_export = cmd_fixtures->add_subcommand("export", "write a fixture to a file");
    std::string fx_name, fx_out;
    fx_export->add_option("name", fx_name, "fixture name")->required();
    fx_export->add_option("-o,--output", fx_out, "output path")->required();
    auto* fx_gen = cmd_fixtures->add_subcommand("gen-equality", "generate equality-task instances");
    std::size_t gen_n = 16, gen_dim = 4;
    std::uint64_t gen_seed = 0;
    std::string gen_encoding = "symbolic", gen_out;
    fx_gen->add_option("--n", gen_n, "instance count");
    fx_gen->add_option("--encoding", gen_encoding, "symbolic or distributed");
    fx_gen->add_option("--dim", gen_dim, "vector dimension for distributed encodings");
    fx_gen->add_option("--seed", gen_seed, "generator seed");
    fx_gen->add_option("-o,--output", gen_out, "output path")->required();
    auto* fx_import = cmd_fixtures->add_subcommand("import-weights",
                                                   "build a feedforward model from matrices");
    std::string imp_weights, imp_out;
    bool imp_boolean = false;
    fx_import->add_option("weights", imp_weights, "weights file")->required();
    fx_import->add_option("-o,--output", imp_out, "output model path")->required();
    fx_import->add_flag("--boolean-inputs", imp_boolean, "declare boolean input domains");
    cmd_fixtures->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (*cmd_run) {
            LoadedModel m = load_model(run_model_ref);
            CausalModel model = m.model;
            if (!run_input.empty()) {
                std::istringstream is(run_input);
                std::string pair;
                Assignment input;
                while (is >> pair) {
                    auto eq = pair.find('=');
                    if (eq == std::string::npos)
                        throw std::runtime_error("--input expects name=value pairs");
                    input.set(pair.substr(0, eq), rat_parse_or_throw(pair.substr(eq + 1)));
                }
                model = set_inputs(model, input);
            }
            Assignment run = model.run();
            auto inputs = model.input_variables();
            std::set<std::string> input_set(inputs.begin(), inputs.end());
            std::ostringstream os;
            bool first = true;
            for (const auto& [name, v] : run.values()) {
                if (!run_all && input_set.count(name)) continue;
                os << (first ? "" : " ") << name << "=" << rat_to_string(v);
                first = false;
            }
            os << "\n";
            emit(os.str(), run_report);
            return 0;
        }

        if (*cmd_intervene) {
            LoadedModel m = load_model(iv_model_ref);
            if (!iv_interchange.empty()) {
                InterchangeSpec spec = parse_interchange(read_file(iv_interchange));
                Assignment out = interchange(m.model, spec);
                emit(out.to_string() + "\n", iv_report);
                return 0;
            }
            if (iv_path.empty())
                throw std::runtime_error("intervene needs --interventional or --interchange");
            Interventional iv = parse_interventional(read_file(iv_path));
            CausalModel intervened = apply(iv, m.model);
            if (!iv_input.empty()) {
                std::istringstream is(iv_input);
                std::string pair;
                Assignment input;
                while (is >> pair) {
                    auto eq = pair.find('=');
                    if (eq == std::string::npos)
                        throw std::runtime_error("--input expects name=value pairs");
                    input.set(pair.substr(0, eq), rat_parse_or_throw(pair.substr(eq + 1)));
                }
                intervened = set_inputs(intervened, input);
            }
            if (!iv_emit.empty()) write_file_atomic(iv_emit, serialize_model(intervened));
            std::ostringstream os;
            os << intervened.run().to_string() << "\n";
            emit(os.str(), iv_report);
            return 0;
        }

        if (*cmd_va) {
            LoadedModel low = load_model(va_low);
            LoadedModel high = load_model(va_high);
            std::string align_hash;
            Alignment alignment = load_alignment(va_alignment, align_hash);
            auto inputs = load_inputs(va_common.inputs_selector, low.model);
            VerificationReport report = check_constructive_abstraction(
                low.model, high.model, alignment, inputs, va_common.check_options());
            return finish_verification(
                report,
                {{"low", low.ref + " " + low.hash},
                 {"high", high.ref + " " + high.hash},
                 {"alignment", va_alignment + " " + align_hash},
                 {"inputs",
                  va_common.inputs_selector + " count " + std::to_string(inputs.size())}},
                va_common);
        }

        if (*cmd_vt) {
            LoadedModel low = load_model(vt_low);
            LoadedModel high = load_model(vt_high);
            std::string t_hash;
            ParsedTranslation parsed = load_translation(vt_translation, t_hash);
            Translation t = resolve_translation(parsed, low.model);
            auto inputs = load_inputs(vt_common.inputs_selector, low.model);
            auto pairs = intervention_family_pairs(t, low.model);
            std::vector<Interventional> lows;
            OmegaMap omega;
            for (const auto& [lo, hi] : pairs) {
                lows.push_back(lo);
                omega.entries.emplace_back(lo, hi);
            }
            VerificationReport report = check_exact_transformation(
                low.model, high.model, settings_map_from_translation(t), lows, omega, inputs,
                vt_common.check_options());
            report.check = "translation-exact-transformation";
            return finish_verification(
                report,
                {{"low", low.ref + " " + low.hash},
                 {"high", high.ref + " " + high.hash},
                 {"translation", vt_translation + " " + t_hash},
                 {"inputs",
                  vt_common.inputs_selector + " count " + std::to_string(inputs.size())}},
                vt_common);
        }

        if (*cmd_aut) {
            LoadedModel low = load_model(aut_low);
            LoadedModel high = load_model(aut_high);
            std::string t_hash, a_hash;
            ParsedTranslation parsed = load_translation(aut_translation, t_hash);
            Translation t = resolve_translation(parsed, low.model);
            Alignment alignment = load_alignment(aut_alignment, a_hash);
            auto inputs = load_inputs(aut_common.inputs_selector, low.model);
            VerificationReport report = check_abstraction_under_translation(
                low.model, high.model, t, alignment, inputs, aut_common.check_options());
            return finish_verification(
                report,
                {{"low", low.ref + " " + low.hash},
                 {"high", high.ref + " " + high.hash},
                 {"translation", aut_translation + " " + t_hash},
                 {"alignment", aut_alignment + " " + a_hash},
                 {"inputs",
                  aut_common.inputs_selector + " count " + std::to_string(inputs.size())}},
                aut_common);
        }

        if (*cmd_audit) {
            if (!audit_request.empty()) {
                AuditRequest req = parse_audit_request(read_file(audit_request));
                audit_low = req.low_path;
                audit_high = req.high_path;
                audit_alignment = req.alignment_path;
                audit_vehicle = req.vehicle;
                if (req.property) audit_property = expr_to_string(*req.property);
            }
            if (audit_low.empty() || audit_high.empty() || audit_alignment.empty() ||
                audit_vehicle.empty() || audit_property.empty())
                throw std::runtime_error(
                    "audit needs --low, --high, --alignment, --vehicle and --property "
                    "(or a --request file)");
            LoadedModel low = load_model(audit_low);
            LoadedModel high = load_model(audit_high);
            std::string a_hash;
            Alignment alignment = load_alignment(audit_alignment, a_hash);
            PropertySpec prop{"property", parse_expression(audit_property)};
            auto inputs = load_inputs(audit_common.inputs_selector, low.model);
            AuditReport report = audit(low.model, high.model, alignment, audit_vehicle, prop,
                                       inputs, audit_common.check_options());
            std::string text =
                report_header("representation-audit",
                              {{"low", low.ref + " " + low.hash},
                               {"high", high.ref + " " + high.hash},
                               {"alignment", audit_alignment + " " + a_hash},
                               {"inputs", audit_common.inputs_selector + " count " +
                                              std::to_string(inputs.size())},
                               {"seed", std::to_string(audit_common.seed)}}) +
                report.to_text() + "end\n";
            emit(text, audit_common.report_path);
            return report.pass() ? 0 : 1;
        }

        if (*cmd_search) {
            LoadedModel model = load_model(s_model);
            LoadedModel high = load_model(s_high);
            std::string a_hash;
            Alignment alignment = load_alignment(s_alignment, a_hash);
            SearchConfig config;
            config.alignment = alignment;
            config.budget = s_budget;
            config.seed = s_common.seed;
            std::istringstream ls(s_layer);
            std::string item;
            while (std::getline(ls, item, ',')) config.layer.push_back(item);
            auto inputs = load_inputs(s_common.inputs_selector, model.model);
            SearchResult result = search(model.model, high.model, config, inputs);
            if (!s_emit.empty() && result.translation)
                write_file_atomic(s_emit, serialize_translation(*result.translation));
            std::ostringstream body;
            body << "iia: " << format_double(result.iia) << "\n";
            body << "evaluations: " << result.evaluations << "\n";
            body << "restarts: " << result.restarts_used << "\n";
            body << "angles:";
            for (double a : result.rotation.angles) body << " " << format_double(a);
            body << "\n";
            body << "certified: " << (result.certified ? "yes" : "no") << "\n";
            if (result.certification) body << result.certification->to_text();
            std::string text =
                report_header("search-alignment",
                              {{"model", model.ref + " " + model.hash},
                               {"high", high.ref + " " + high.hash},
                               {"alignment", s_alignment + " " + a_hash},
                               {"inputs", s_common.inputs_selector + " count " +
                                              std::to_string(inputs.size())},
                               {"seed", std::to_string(s_common.seed)},
                               {"budget", std::to_string(s_budget)}}) +
                body.str() + "end\n";
            emit(text, s_common.report_path);
            return result.certified ? 0 : 1;
        }

        if (*cmd_fixtures) {
            if (*fx_list) {
                for (const auto& n : fixtures::model_names()) std::cout << n << "\n";
                std::cout << "rotated-N:<seed>\n";
                std::cout << "alignment-N-to-M\n";
                std::cout << "translation-M-star-to-M\n";
                return 0;
            }
            if (*fx_export) {
                std::string content;
                if (fx_name == "alignment-N-to-M")
                    content = serialize_alignment(fixtures::build_alignment(fx_name));
                else if (fx_name == "translation-M-star-to-M")
                    content = serialize_translation(fixtures::build_translation(fx_name));
                else
                    content = serialize_model(fixtures::build_model(fx_name));
                write_file_atomic(fx_out, content);
                return 0;
            }
            if (*fx_gen) {
                std::vector<fixtures::EqualityTaskInstance> tasks;
                if (gen_encoding == "symbolic")
                    tasks = fixtures::gen_equality_task(gen_n, fixtures::SymbolicEncoding{});
                else if (gen_encoding == "distributed")
                    tasks = fixtures::gen_equality_task(
                        gen_n, fixtures::DistributedEncoding{gen_dim, gen_seed});
                else
                    throw std::runtime_error("encoding must be symbolic or distributed");
                write_file_atomic(gen_out, serialize_equality_tasks(tasks));
                return 0;
            }
            if (*fx_import) {
                auto weights = parse_weights(read_file(imp_weights));
                CausalModel m = fixtures::feedforward_model(
                    weights, imp_boolean ? ValueDomain::boolean() : ValueDomain::real());
                write_file_atomic(imp_out, serialize_model(m));
                return 0;
            }
        }
    } catch (const ParseError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const ExprParseError& ex) {
        std::cerr << "error: column " << (ex.offset() + 1) << ": " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 2;
}
