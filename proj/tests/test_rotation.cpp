#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "causalite/rotation.hpp"

using namespace causalite;

TEST_CASE("givens rotations are orthogonal with determinant one") {
    auto g = givens(4, 1, 3, 0.7);
    CHECK(orthogonality_error(g) < 1e-15);
    CHECK(determinant(g) == Catch::Approx(1.0).margin(1e-12));
    CHECK(g.at(0, 0) == 1.0);
    CHECK(g.at(1, 1) == Catch::Approx(std::cos(0.7)));
    CHECK(g.at(1, 3) == Catch::Approx(-std::sin(0.7)));
}

TEST_CASE("assembled rotations satisfy the orthogonality invariant") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        RotationParam r(4);
        for (auto& a : r.angles)
            a = (double(rng() >> 11) * (1.0 / 9007199254740992.0) * 2.0 - 1.0) * 3.14159;
        DoubleMatrix m = r.assemble();
        CHECK(orthogonality_error(m) < 1e-9);
        CHECK(determinant(m) > 0);
    }
}

TEST_CASE("angle count is n(n-1)/2") {
    CHECK(RotationParam(4).angles.size() == 6);
    CHECK(RotationParam(3).angles.size() == 3);
    CHECK_THROWS(RotationParam(4, {0.1, 0.2}));
    CHECK(rotation_planes(4).size() == 6);
}

TEST_CASE("factor_rotation inverts assemble up to float error") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + rng() % 4;  // dimensions 2..5
        RotationParam r(n);
        for (auto& a : r.angles)
            a = (double(rng() >> 11) * (1.0 / 9007199254740992.0) * 2.0 - 1.0) * 3.14159;
        DoubleMatrix m = r.assemble();
        RotationParam back = factor_rotation(m);
        DoubleMatrix m2 = back.assemble();
        for (std::size_t i = 0; i < m.data.size(); ++i)
            CHECK(m.data[i] == Catch::Approx(m2.data[i]).margin(1e-10));
    }
}

TEST_CASE("factor_rotation handles permutation-like matrices") {
    // a plane swap with sign flip: rotation by pi/2 in the (0,1) plane
    DoubleMatrix m = givens(4, 0, 1, 1.5707963267948966);
    RotationParam r = factor_rotation(m);
    DoubleMatrix back = r.assemble();
    for (std::size_t i = 0; i < m.data.size(); ++i)
        CHECK(back.data[i] == Catch::Approx(m.data[i]).margin(1e-12));
}

TEST_CASE("factor_rotation rejects reflections and non-orthogonal input") {
    DoubleMatrix reflection = DoubleMatrix::identity(3);
    reflection.at(2, 2) = -1.0;
    CHECK_THROWS(factor_rotation(reflection));
    DoubleMatrix skew = DoubleMatrix::identity(3);
    skew.at(0, 1) = 0.5;
    CHECK_THROWS(factor_rotation(skew));
}

TEST_CASE("determinant via LU") {
    DoubleMatrix m(2, 2);
    m.at(0, 0) = 2;
    m.at(0, 1) = 1;
    m.at(1, 0) = 1;
    m.at(1, 1) = 1;
    CHECK(determinant(m) == Catch::Approx(1.0));
    DoubleMatrix swap = DoubleMatrix::identity(2);
    std::swap(swap.data[0], swap.data[1]);
    std::swap(swap.data[2], swap.data[3]);
    CHECK(determinant(swap) == Catch::Approx(-1.0));
}
