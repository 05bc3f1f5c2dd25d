#include <catch2/catch_amalgamated.hpp>

#include "causalite/algebra_laws.hpp"
#include "causalite/fixtures.hpp"
#include "causalite/intervene.hpp"
#include "causalite/random_models.hpp"

using namespace causalite;

namespace {

Assignment boolean_input(const std::vector<std::string>& names, std::initializer_list<int> bits) {
    Assignment a;
    auto it = names.begin();
    for (int b : bits) a.set(*it++, Rat(b));
    return a;
}

const std::vector<std::string> kA = {"A1", "A2", "A3", "A4"};
const std::vector<std::string> kX = {"X1", "X2", "X3", "X4"};

}  // namespace

TEST_CASE("hard intervention severs dependence") {
    auto m = fixtures::circuit_m();
    CausalModel pinned = apply(Interventional::hard("B2", Rat(1)), m);
    CHECK(pinned.parents("B2").empty());
    CHECK(pinned.mechanism("B2") == Expr::constant(1));
    // untargeted mechanisms are bit-identical
    CHECK(pinned.mechanism("B1") == m.mechanism("B1"));
    CHECK(pinned.mechanism("C") == m.mechanism("C"));
    // and the original model is untouched
    CHECK(m.parents("B2") == std::set<std::string>{"A3", "A4"});
}

TEST_CASE("hard interventions are idempotent") {
    auto m = fixtures::circuit_m();
    Interventional i = Interventional::hard("B1", Rat(0));
    CHECK(apply(i, apply(i, m)) == apply(i, m));
}

TEST_CASE("replace can retarget a mechanism's parents") {
    auto star = fixtures::circuit_m_star();
    Interventional i = Interventional::replace(
        {{"D2", Expr::xnor(Expr::var("A3"), Expr::var("A4"))}});
    CausalModel changed = apply(i, star);
    CHECK(changed.parents("D2") == std::set<std::string>{"A3", "A4"});
}

TEST_CASE("apply rejects unknown targets and cycles") {
    auto m = fixtures::circuit_m();
    CHECK_THROWS_WITH(apply(Interventional::hard("Q", Rat(0)), m),
                      Catch::Matchers::ContainsSubstring("unknown target variable Q"));
    Interventional cyclic = Interventional::replace({{"B1", Expr::var("C")}});
    CHECK_THROWS_WITH(apply(cyclic, m), Catch::Matchers::ContainsSubstring("cycle"));
    CHECK_THROWS_WITH(
        apply(Interventional::replace({{"B1", Expr::var("NOPE")}}), m),
        Catch::Matchers::ContainsSubstring("undeclared variable NOPE"));
}

TEST_CASE("compose applies left to right; empty composition is identity") {
    auto m = fixtures::circuit_m();
    Interventional first = Interventional::hard("B1", Rat(0));
    Interventional second = Interventional::hard("B1", Rat(1));
    CausalModel after = apply(Interventional::compose({first, second}), m);
    CHECK(after.mechanism("B1") == Expr::constant(1));  // later wins
    CHECK(apply(Interventional::compose({}), m) == m);
    CHECK(Interventional::compose({}).is_null());
}

TEST_CASE("interchange patches source values into the base run") {
    auto n = fixtures::network_n();
    InterchangeSpec spec;
    spec.base_input = boolean_input(kX, {0, 0, 0, 0});
    spec.source_input = boolean_input(kX, {0, 0, 1, 0});
    spec.targets = {"H1_3", "H1_4"};
    Assignment out = interchange(n, spec);
    CHECK(out.at("H1_3") == 1);
    CHECK(out.at("H1_4") == 0);
    CHECK(out.at("Y") == make_rat(199, 100));
}

TEST_CASE("interchange on the circuit's B2") {
    auto m = fixtures::circuit_m();
    InterchangeSpec spec;
    spec.base_input = boolean_input(kA, {0, 0, 0, 0});
    spec.source_input = boolean_input(kA, {0, 0, 1, 0});
    spec.targets = {"B2"};
    Assignment out = interchange(m, spec);
    CHECK(out.at("B2") == 0);
    CHECK(out.at("C") == 0);
}

TEST_CASE("interchange with source == base is the factual run") {
    auto m = fixtures::circuit_m();
    for (const auto& x : all_input_assignments(m)) {
        InterchangeSpec spec;
        spec.base_input = x;
        spec.source_input = x;
        spec.targets = {"B1", "B2"};
        CHECK(interchange(m, spec) == run_at(m, x));
    }
}

TEST_CASE("interchange targeting all inputs equals running at the source") {
    auto m = fixtures::circuit_m();
    auto inputs = all_input_assignments(m);
    for (std::size_t i = 0; i < inputs.size(); i += 3) {
        for (std::size_t j = 0; j < inputs.size(); j += 5) {
            InterchangeSpec spec;
            spec.base_input = inputs[i];
            spec.source_input = inputs[j];
            spec.targets = kA;
            CHECK(interchange(m, spec) == run_at(m, inputs[j]));
        }
    }
}

TEST_CASE("interchange on B2 changes C iff the patched value differs") {
    auto m = fixtures::circuit_m();
    auto inputs = all_input_assignments(m);
    for (const auto& base : inputs) {
        for (const auto& source : inputs) {
            Assignment base_run = run_at(m, base);
            Assignment source_run = run_at(m, source);
            InterchangeSpec spec;
            spec.base_input = base;
            spec.source_input = source;
            spec.targets = {"B2"};
            Assignment patched = interchange(m, spec);
            bool changed = patched.at("C") != base_run.at("C");
            bool value_differs = source_run.at("B2") != base_run.at("B2");
            CHECK(changed == value_differs);
        }
    }
}

TEST_CASE("recursive interchange sources resolve through nested patching") {
    auto m = fixtures::circuit_m();
    auto inner = std::make_shared<InterchangeSpec>();
    inner->base_input = boolean_input(kA, {0, 0, 0, 0});
    inner->source_input = boolean_input(kA, {0, 0, 1, 0});
    inner->targets = {"B2"};

    InterchangeSpec outer;
    outer.base_input = boolean_input(kA, {1, 0, 0, 0});
    outer.recursive_source = inner;
    outer.targets = {"B2"};
    // inner run pins B2 = 0; the outer patch copies that value
    Assignment out = interchange(m, outer);
    CHECK(out.at("B2") == 0);
    CHECK(out.at("B1") == 0);
    CHECK(out.at("C") == 1);
    CHECK(outer.depth() == 2);
}

TEST_CASE("interchange depth is bounded") {
    auto m = fixtures::circuit_m();
    auto s1 = std::make_shared<InterchangeSpec>();
    s1->base_input = boolean_input(kA, {0, 0, 0, 0});
    s1->source_input = boolean_input(kA, {0, 0, 0, 1});
    s1->targets = {"B2"};
    auto s2 = std::make_shared<InterchangeSpec>();
    s2->base_input = boolean_input(kA, {0, 0, 0, 0});
    s2->recursive_source = s1;
    s2->targets = {"B2"};
    auto s3 = std::make_shared<InterchangeSpec>();
    s3->base_input = boolean_input(kA, {0, 0, 0, 0});
    s3->recursive_source = s2;
    s3->targets = {"B2"};
    CHECK_NOTHROW(interchange(m, *s3));  // depth 3 allowed

    InterchangeSpec s4;
    s4.base_input = boolean_input(kA, {0, 0, 0, 0});
    s4.recursive_source = s3;
    s4.targets = {"B2"};
    CHECK_THROWS_WITH(interchange(m, s4), Catch::Matchers::ContainsSubstring("deeper than 3"));
}

TEST_CASE("interchange validates its spec") {
    auto m = fixtures::circuit_m();
    InterchangeSpec spec;
    spec.base_input = boolean_input(kA, {0, 0, 0, 0});
    spec.source_input = boolean_input(kA, {0, 0, 0, 0});
    CHECK_THROWS_WITH(interchange(m, spec), Catch::Matchers::ContainsSubstring("no targets"));
    spec.targets = {"B2"};
    Assignment short_input;
    short_input.set("A1", Rat(0));
    spec.base_input = short_input;
    CHECK_THROWS_WITH(interchange(m, spec),
                      Catch::Matchers::ContainsSubstring("exactly the parentless"));
}

TEST_CASE("algebra laws hold on a thousand random boolean DAGs") {
    RandomModelSampler sampler(99);
    std::vector<CausalModel> models;
    std::vector<std::pair<Interventional, Interventional>> pairs;
    for (int k = 0; k < 1000; ++k) {
        CausalModel m = sampler.boolean_dag(8);
        Interventional i = sampler.hard_on(m);
        Interventional j = sampler.hard_disjoint_from(m, i.targets());
        models.push_back(std::move(m));
        pairs.emplace_back(std::move(i), std::move(j));
    }
    VerificationReport report = check_algebra_laws(models, pairs);
    CHECK(report.pass());
    CHECK(report.checked == 3000);
}

TEST_CASE("algebra laws: i == j commutes trivially; override keeps the later value") {
    auto m = fixtures::circuit_m();
    Interventional i = Interventional::hard("B1", Rat(0));
    CHECK(apply(i, apply(i, m)) == apply(i, apply(i, m)));
    CausalModel overridden =
        apply(Interventional::hard("B1", Rat(1)), apply(Interventional::hard("B1", Rat(0)), m));
    CHECK(overridden.mechanism("B1") == Expr::constant(1));
}

TEST_CASE("same-target pairs skip the commutation law but keep the rest") {
    auto m = fixtures::circuit_m();
    Interventional k1 = Interventional::hard("B1", Rat(0));
    Interventional k2 = Interventional::hard("B1", Rat(1));
    VerificationReport report = check_algebra_laws({m}, {{k1, k2}});
    CHECK(report.pass());
    CHECK(report.checked == 3);
}
