#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "causalite/fixtures.hpp"
#include "causalite/io.hpp"

using namespace causalite;
namespace fx = causalite::fixtures;

TEST_CASE("model files round-trip bit-exactly for every fixture") {
    for (const auto& name : fx::model_names()) {
        CausalModel m = fx::build_model(name);
        std::string text = serialize_model(m);
        CausalModel back = parse_model(text);
        CHECK(back == m);
        CHECK(serialize_model(back) == text);
    }
    // a model exercising enum domains, negatives and non-const defaults
    ModelBuilder b;
    b.input("P", ValueDomain::finite({make_rat(-1, 2), Rat(0), make_rat(3, 4)}), make_rat(3, 4));
    b.variable("Q", ValueDomain::real(),
               Expr::relu(Expr::add({Expr::var("P"), Expr::constant(make_rat(-1, 4))})));
    CausalModel m = b.build();
    CHECK(parse_model(serialize_model(m)) == m);
}

TEST_CASE("model parser reports line and column diagnostics") {
    try {
        parse_model("causal-model v1\nvariable A boolean\nmechanism A (oops)\nend\n");
        FAIL("expected ParseError");
    } catch (const ParseError& ex) {
        CHECK(ex.line() == 3);
        CHECK(ex.column() >= 13);
        CHECK_THAT(ex.what(), Catch::Matchers::ContainsSubstring("line 3"));
    }
    CHECK_THROWS_AS(parse_model("not-a-model\n"), ParseError);
    CHECK_THROWS_AS(parse_model("causal-model v1\nvariable A boolean\n"), ParseError);  // no end
    try {
        parse_model("causal-model v1\nvariable A boolean\ndefault A 1/0\nend\n");
        FAIL("expected ParseError");
    } catch (const ParseError& ex) {
        CHECK(ex.line() == 3);
    }
}

TEST_CASE("interventional files round-trip, including multi-step") {
    Interventional iv = Interventional::compose(
        {Interventional::hard("B1", Rat(0)),
         Interventional::replace({{"B2", Expr::xnor(Expr::var("A1"), Expr::var("A4"))}})});
    std::string text = serialize_interventional(iv);
    Interventional back = parse_interventional(text);
    CHECK(back == iv);
    CHECK(serialize_interventional(back) == text);
    CHECK(parse_interventional("interventional v1\nend\n").is_null());
}

TEST_CASE("interchange files round-trip") {
    InterchangeSpec spec;
    spec.base_input.set("A1", Rat(0));
    spec.base_input.set("A2", Rat(1));
    spec.source_input.set("A1", Rat(1));
    spec.source_input.set("A2", Rat(0));
    spec.targets = {"B1", "B2"};
    std::string text = serialize_interchange(spec);
    InterchangeSpec back = parse_interchange(text);
    CHECK(back.base_input == spec.base_input);
    CHECK(back.source_input == spec.source_input);
    CHECK(back.targets == spec.targets);
}

TEST_CASE("alignment files round-trip and preserve entry order") {
    Alignment a = fx::alignment_n_to_m();
    std::string text = serialize_alignment(a);
    Alignment back = parse_alignment(text);
    REQUIRE(back.entries().size() == a.entries().size());
    for (std::size_t i = 0; i < a.entries().size(); ++i) {
        CHECK(back.entries()[i].high_var == a.entries()[i].high_var);
        CHECK(back.entries()[i].cell == a.entries()[i].cell);
        CHECK(back.entries()[i].component_map == a.entries()[i].component_map);
    }
    CHECK(serialize_alignment(back) == text);
}

TEST_CASE("translation files round-trip") {
    Translation t = fx::translation_m_star_to_m();
    std::string text = serialize_translation(t);
    ParsedTranslation parsed = parse_translation(text);
    REQUIRE(parsed.full);
    CHECK(parsed.full->forward == t.forward);
    CHECK(parsed.full->inverse == t.inverse);
    CHECK(parsed.full->source_variables == t.source_variables);
    CHECK(serialize_translation(*parsed.full) == text);
}

TEST_CASE("rotation-block translations expand against a model") {
    std::string text =
        "translation v1\n"
        "rotation-block H1_1 H1_2 H1_3 H1_4 tolerance 1e-9\n"
        "row 0 -1 0 0\n"
        "row 1 0 0 0\n"
        "row 0 0 1 0\n"
        "row 0 0 0 1\n"
        "end\n";
    ParsedTranslation parsed = parse_translation(text);
    REQUIRE(parsed.rotation_block);
    CHECK(parsed.rotation_block->layer.size() == 4);
    auto n = fx::network_n();
    Translation t = resolve_translation(parsed, n);
    CHECK(validate_translation(t).empty());
    CausalModel translated = translate_model(n, t);
    // behavior is preserved by any orthogonal recarving of the layer
    for (const auto& x : all_input_assignments(n))
        CHECK(run_at(translated, x).at("Y") == run_at(n, x).at("Y"));
}

TEST_CASE("weight files round-trip and build the network") {
    std::vector<RatMatrix> weights = {fx::weights_w1(), fx::weights_w2(), fx::weights_w3()};
    std::string text = serialize_weights(weights);
    auto back = parse_weights(text);
    REQUIRE(back.size() == 3);
    CHECK(back[0] == weights[0]);
    CHECK(back[2] == weights[2]);
    CHECK(fx::feedforward_model(back, ValueDomain::boolean()) == fx::network_n());

    CHECK_THROWS_AS(parse_weights("weights v1\nmatrix 2 2\nrow 1 0\nend\n"), ParseError);
    CHECK_THROWS_AS(parse_weights("weights v1\nmatrix 1 2\nrow 1\nend\n"), ParseError);
}

TEST_CASE("input-space files round-trip") {
    auto m = fx::circuit_m();
    auto inputs = all_input_assignments(m);
    std::string text = serialize_input_space(inputs);
    auto back = parse_input_space(text);
    REQUIRE(back.size() == inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) CHECK(back[i] == inputs[i]);
}

TEST_CASE("audit request files parse") {
    AuditRequest req = parse_audit_request(
        "audit-request v1\n"
        "low n.cm\n"
        "high m.cm\n"
        "alignment nm.align\n"
        "vehicle B2\n"
        "property (xnor (var X3) (var X4))\n"
        "end\n");
    CHECK(req.low_path == "n.cm");
    CHECK(req.vehicle == "B2");
    REQUIRE(req.property);
    CHECK(*req.property == Expr::xnor(Expr::var("X3"), Expr::var("X4")));
}

TEST_CASE("equality task files serialize deterministically") {
    auto tasks = fx::gen_equality_task(4, fx::SymbolicEncoding{});
    std::string a = serialize_equality_tasks(tasks);
    std::string b = serialize_equality_tasks(fx::gen_equality_task(4, fx::SymbolicEncoding{}));
    CHECK(a == b);
    CHECK_THAT(a, Catch::Matchers::StartsWith("equality-tasks v1\n"));
}

TEST_CASE("atomic writes land complete files") {
    namespace fsys = std::filesystem;
    fsys::path dir = fsys::temp_directory_path() / "causalite-io-test";
    fsys::create_directories(dir);
    std::string path = (dir / "report.txt").string();
    write_file_atomic(path, "first\n");
    write_file_atomic(path, "second\n");  // overwrite via rename
    CHECK(read_file(path) == "second\n");
    CHECK(!fsys::exists(path + ".tmp"));
    fsys::remove_all(dir);
}

TEST_CASE("fixture hashes are stable") {
    std::string h1 = hash_hex(serialize_model(fx::circuit_m()));
    std::string h2 = hash_hex(serialize_model(fx::circuit_m()));
    CHECK(h1 == h2);
    CHECK(h1.substr(0, 2) == "0x");
    CHECK(h1 != hash_hex(serialize_model(fx::circuit_m_star())));
}

TEST_CASE("fixture exports match the committed golden files") {
    const std::string dir = CAUSALITE_GOLDEN_DIR;
    CHECK(read_file(dir + "/circuit-M.cm") == serialize_model(fx::circuit_m()));
    CHECK(read_file(dir + "/network-N.cm") == serialize_model(fx::network_n()));
    CHECK(read_file(dir + "/circuit-M-star.cm") == serialize_model(fx::circuit_m_star()));
    CHECK(read_file(dir + "/alignment-N-to-M.align") ==
          serialize_alignment(fx::alignment_n_to_m()));
    CHECK(read_file(dir + "/translation-M-star-to-M.tr") ==
          serialize_translation(fx::translation_m_star_to_m()));
    CHECK(read_file(dir + "/weights-N.txt") ==
          serialize_weights({fx::weights_w1(), fx::weights_w2(), fx::weights_w3()}));
    CHECK(read_file(dir + "/equality-tasks-symbolic-16.txt") ==
          serialize_equality_tasks(fx::gen_equality_task(16, fx::SymbolicEncoding{})));
}
