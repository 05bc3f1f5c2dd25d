#include <catch2/catch_amalgamated.hpp>

#include "causalite/fixtures.hpp"
#include "causalite/intervene.hpp"
#include "causalite/model.hpp"
#include "causalite/random_models.hpp"

using namespace causalite;

TEST_CASE("value domains") {
    auto b = ValueDomain::boolean();
    CHECK(b.contains(Rat(0)));
    CHECK(b.contains(Rat(1)));
    CHECK(!b.contains(make_rat(1, 2)));
    CHECK(b.values().size() == 2);

    auto f = ValueDomain::finite({Rat(1), Rat(0), Rat(1), make_rat(1, 2)});
    CHECK(f.values() == std::vector<Rat>{Rat(0), make_rat(1, 2), Rat(1)});  // sorted, deduped

    CHECK(ValueDomain::real().contains(make_rat(-7, 3)));
    CHECK_THROWS(ValueDomain::real().values());
}

TEST_CASE("circuit solves to the all-ones assignment at zero input") {
    auto m = fixtures::circuit_m();
    REQUIRE(m.validate().empty());
    Assignment run = m.run();
    CHECK(run.at("B1") == 1);
    CHECK(run.at("B2") == 1);
    CHECK(run.at("C") == 1);
}

TEST_CASE("network runs: zero input and (1,0,1,1)") {
    auto n = fixtures::network_n();
    REQUIRE(n.validate().empty());
    CHECK(n.variable_count() == 13);

    Assignment zero = n.run();
    for (const auto& name : n.variable_names()) CHECK(zero.at(name) == 0);

    Assignment input;
    input.set("X1", Rat(1));
    input.set("X2", Rat(0));
    input.set("X3", Rat(1));
    input.set("X4", Rat(1));
    Assignment run = run_at(n, input);
    CHECK(run.at("H1_1") == 1);
    CHECK(run.at("H1_2") == 0);
    CHECK(run.at("H1_3") == 0);
    CHECK(run.at("H1_4") == 0);
    CHECK(run.at("H2_1") == 1);
    CHECK(run.at("H2_2") == 0);
    CHECK(run.at("H2_3") == 1);
    CHECK(run.at("H2_4") == 0);
    CHECK(run.at("Y") == make_rat(199, 100));
}

TEST_CASE("validate reports cycles with the path") {
    ModelBuilder b;
    b.variable("X", ValueDomain::boolean(), Expr::logical_not(Expr::var("X")));
    auto m = b.build();
    auto violations = m.validate();
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].kind == "cycle");
    CHECK_THAT(violations[0].message, Catch::Matchers::ContainsSubstring("cycle at X"));
    CHECK_THROWS_AS(m.run(), ModelError);  // rejected before evaluation
}

TEST_CASE("validate reports undeclared references") {
    ModelBuilder b;
    b.variable("X", ValueDomain::boolean(), Expr::var("Z"));
    auto violations = b.build().validate();
    REQUIRE(!violations.empty());
    CHECK(violations[0].kind == "unknown-variable");
    CHECK_THAT(violations[0].message, Catch::Matchers::ContainsSubstring("Z"));
}

TEST_CASE("validate checks finite-domain closure exhaustively") {
    ModelBuilder b;
    b.input("A", ValueDomain::boolean());
    b.input("B", ValueDomain::boolean());
    // sum can reach 2, outside the boolean domain
    b.variable("S", ValueDomain::boolean(), Expr::add({Expr::var("A"), Expr::var("B")}));
    auto violations = b.build().validate();
    REQUIRE(!violations.empty());
    CHECK(violations[0].kind == "domain");
    CHECK_THAT(violations[0].message, Catch::Matchers::ContainsSubstring("S"));
}

TEST_CASE("run rejects out-of-domain realized values") {
    ModelBuilder b;
    b.input("X", ValueDomain::real(), make_rat(-3));
    b.variable("B", ValueDomain::boolean(), Expr::add({Expr::var("X"), Expr::constant(1)}));
    auto m = b.build();
    CHECK_THROWS_WITH(m.run(), Catch::Matchers::ContainsSubstring("outside its domain"));
}

TEST_CASE("run is deterministic and topologically sound") {
    auto n = fixtures::network_n();
    Assignment a = n.run(), b = n.run();
    CHECK(a == b);
    for (const auto& name : n.variable_names())
        CHECK(a.at(name) == evaluate(n.mechanism(name), a.values()));
}

TEST_CASE("input enumeration is canonical binary order") {
    auto m = fixtures::circuit_m();
    auto inputs = all_input_assignments(m);
    REQUIRE(inputs.size() == 16);
    CHECK(inputs.front().to_string() == "A1=0 A2=0 A3=0 A4=0");
    CHECK(inputs[1].to_string() == "A1=0 A2=0 A3=0 A4=1");  // last variable fastest
    CHECK(inputs.back().to_string() == "A1=1 A2=1 A3=1 A4=1");
}

TEST_CASE("restriction: editing a mechanism leaves non-descendants alone") {
    RandomModelSampler sampler(2024);
    for (int trial = 0; trial < 100; ++trial) {
        CausalModel m = sampler.boolean_dag(8);
        Assignment before = m.run();
        const auto& vars = m.variable_names();
        std::string target = vars[sampler.next() % vars.size()];

        // descendant closure of the target
        std::set<std::string> descendants{target};
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& v : vars) {
                if (descendants.count(v)) continue;
                for (const auto& p : m.parents(v))
                    if (descendants.count(p)) {
                        descendants.insert(v);
                        grew = true;
                    }
            }
        }

        CausalModel edited = apply(
            Interventional::hard(target, Rat(long(sampler.next() % 2))), m);
        Assignment after = edited.run();
        for (const auto& v : vars) {
            if (descendants.count(v)) continue;
            CHECK(after.at(v) == before.at(v));
        }
    }
}
