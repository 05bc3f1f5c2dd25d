#pragma once

#include <random>
#include <string>
#include <vector>

#include "causalite/align_search.hpp"
#include "causalite/alignment.hpp"
#include "causalite/matrix.hpp"
#include "causalite/model.hpp"
#include "causalite/translate.hpp"

namespace causalite::fixtures {

/// XNOR-of-XNORs circuit: four boolean inputs, two pair gates, one top gate.
inline CausalModel circuit_m() {
    ModelBuilder b;
    for (int i = 1; i <= 4; ++i) b.input("A" + std::to_string(i), ValueDomain::boolean());
    b.variable("B1", ValueDomain::boolean(), Expr::xnor(Expr::var("A1"), Expr::var("A2")));
    b.variable("B2", ValueDomain::boolean(), Expr::xnor(Expr::var("A3"), Expr::var("A4")));
    b.variable("C", ValueDomain::boolean(), Expr::xnor(Expr::var("B1"), Expr::var("B2")));
    return b.build();
}

inline RatMatrix weights_w1() {
    return RatMatrix::from_rows({{1, -1, 0, 0}, {-1, 1, 0, 0}, {0, 0, 1, -1}, {0, 0, -1, 1}});
}

inline RatMatrix weights_w2() {
    return RatMatrix::from_rows({{1, -1, 1, 0}, {1, -1, 1, 0}, {-1, 1, 0, 1}, {-1, 1, 0, 1}});
}

inline RatMatrix weights_w3() {
    RatMatrix m(4, 1);
    m.at(0, 0) = Rat(1);
    m.at(1, 0) = Rat(1);
    m.at(2, 0) = make_rat(99, 100);
    m.at(3, 0) = make_rat(99, 100);
    return m;
}

/// relu(sum_j w[j][i] * prev_j), entries kept as explicit rational
/// coefficients.
inline Expr relu_row(const RatMatrix& w, std::size_t col,
                     const std::vector<std::string>& prev) {
    std::vector<Expr> terms;
    for (std::size_t j = 0; j < w.rows; ++j) {
        if (w.at(j, col) == 0) continue;
        terms.push_back(Expr::mul({Expr::constant(w.at(j, col)), Expr::var(prev[j])}));
    }
    if (terms.empty()) return Expr::relu(Expr::constant(0));
    if (terms.size() == 1) return Expr::relu(terms.front());
    return Expr::relu(Expr::add(std::move(terms)));
}

/// Feedforward ReLU network from explicit weight matrices. Inputs X1..Xk,
/// hidden rows H<layer>_<i>, single output Y; every unit is
/// relu(row * weights).
inline CausalModel feedforward_model(const std::vector<RatMatrix>& weights,
                                     ValueDomain input_domain = ValueDomain::real()) {
    if (weights.empty()) throw ModelError("feedforward model needs at least one weight matrix");
    ModelBuilder b;
    std::vector<std::string> prev;
    for (std::size_t i = 1; i <= weights.front().rows; ++i) {
        prev.push_back("X" + std::to_string(i));
        b.input(prev.back(), input_domain);
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const RatMatrix& w = weights[l];
        if (w.rows != prev.size())
            throw ModelError("weight matrix " + std::to_string(l + 1) + " expects " +
                             std::to_string(w.rows) + " inputs");
        std::vector<std::string> next;
        bool last = l + 1 == weights.size();
        if (last && w.cols == 1) {
            b.variable("Y", ValueDomain::real(), relu_row(w, 0, prev));
            next.push_back("Y");
        } else {
            for (std::size_t i = 1; i <= w.cols; ++i) {
                std::string name = "H" + std::to_string(l + 1) + "_" + std::to_string(i);
                b.variable(name, ValueDomain::real(), relu_row(w, i - 1, prev));
                next.push_back(name);
            }
        }
        prev = std::move(next);
    }
    return b.build();
}

/// The thirteen-variable ReLU network: boolean inputs X1..X4, two hidden
/// rows of four real units, real output Y.
inline CausalModel network_n() {
    return feedforward_model({weights_w1(), weights_w2(), weights_w3()},
                             ValueDomain::boolean());
}

inline std::vector<std::string> network_n_h1_layer() {
    return {"H1_1", "H1_2", "H1_3", "H1_4"};
}

/// The output threshold separating the network's realized "equal relations"
/// outputs {0, 99/50} from the "different relations" output 199/100.
inline Rat network_n_output_threshold() { return make_rat(99, 50); }

/// Cells {X_i}->A_i (identity), {H1_{2j-1}, H1_{2j}}->B_j (equality
/// indicator), {Y}->C (output threshold). The H2 row is forgotten.
inline Alignment alignment_n_to_m() {
    std::vector<AlignedVariable> entries;
    for (int i = 1; i <= 4; ++i) {
        std::string x = "X" + std::to_string(i);
        entries.push_back({"A" + std::to_string(i), {x}, Expr::var(x)});
    }
    entries.push_back(
        {"B1", {"H1_1", "H1_2"}, Expr::eq(Expr::var("H1_1"), Expr::var("H1_2"))});
    entries.push_back(
        {"B2", {"H1_3", "H1_4"}, Expr::eq(Expr::var("H1_3"), Expr::var("H1_4"))});
    entries.push_back(
        {"C", {"Y"}, Expr::leq(Expr::var("Y"), Expr::constant(network_n_output_threshold()))});
    return Alignment(std::move(entries));
}

/// The recarved circuit: D1 = xnor(A1,A2), D2 the quaternary gate stored
/// compositionally as xnor(xnor(A1,A2), xnor(A3,A4)), C = D2.
inline CausalModel circuit_m_star() {
    ModelBuilder b;
    for (int i = 1; i <= 4; ++i) b.input("A" + std::to_string(i), ValueDomain::boolean());
    b.variable("D1", ValueDomain::boolean(), Expr::xnor(Expr::var("A1"), Expr::var("A2")));
    b.variable("D2", ValueDomain::boolean(),
               Expr::xnor(Expr::xnor(Expr::var("A1"), Expr::var("A2")),
                          Expr::xnor(Expr::var("A3"), Expr::var("A4"))));
    b.variable("C", ValueDomain::boolean(), Expr::var("D2"));
    return b.build();
}

/// (a, d1, d2, c) -> (a, d1, xnor(d1, d2), c), with the self-inverse
/// second-coordinate recarving.
inline Translation translation_m_star_to_m() {
    Translation t;
    for (int i = 1; i <= 4; ++i) {
        std::string a = "A" + std::to_string(i);
        t.source_variables.emplace_back(a, ValueDomain::boolean());
        t.target_variables.emplace_back(a, ValueDomain::boolean());
        t.forward[a] = Expr::var(a);
        t.inverse[a] = Expr::var(a);
    }
    t.source_variables.emplace_back("D1", ValueDomain::boolean());
    t.source_variables.emplace_back("D2", ValueDomain::boolean());
    t.source_variables.emplace_back("C", ValueDomain::boolean());
    t.target_variables.emplace_back("B1", ValueDomain::boolean());
    t.target_variables.emplace_back("B2", ValueDomain::boolean());
    t.target_variables.emplace_back("C", ValueDomain::boolean());
    t.forward["B1"] = Expr::var("D1");
    t.forward["B2"] = Expr::xnor(Expr::var("D1"), Expr::var("D2"));
    t.forward["C"] = Expr::var("C");
    t.inverse["D1"] = Expr::var("B1");
    t.inverse["D2"] = Expr::xnor(Expr::var("B1"), Expr::var("B2"));
    t.inverse["C"] = Expr::var("C");
    return t;
}

/// Seeded random rotation; rotated_n scrambles the hidden row by its
/// transpose, so re-rotating the scrambled model by exactly this parameter
/// restores alignment (IIA = 1).
inline RotationParam planted_rotation(std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
    RotationParam r(4);
    for (auto& v : r.angles) {
        double u = double(rng() >> 11) * (1.0 / 9007199254740992.0);
        v = (2.0 * u - 1.0) * 3.141592653589793;
    }
    return r;
}

inline CausalModel rotated_n(std::uint64_t seed) {
    DoubleMatrix planted = planted_rotation(seed).assemble();
    return rotate_layer(network_n(), network_n_h1_layer(),
                        planted.transposed().to_exact());
}

/// The search setup used with rotated_n: recover a rotation of the H1 row
/// under which the circuit abstracts the network.
inline SearchConfig search_config_n_to_m(std::uint64_t seed = 0) {
    SearchConfig config;
    config.layer = network_n_h1_layer();
    config.alignment = alignment_n_to_m();
    config.seed = seed;
    return config;
}

// ---------------------------------------------------------------------------
// Catalog

inline const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names = {"circuit-M", "network-N", "circuit-M-star"};
    return names;
}

inline CausalModel build_model(const std::string& name) {
    if (name == "circuit-M") return circuit_m();
    if (name == "network-N") return network_n();
    if (name == "circuit-M-star") return circuit_m_star();
    if (name.rfind("rotated-N:", 0) == 0) {
        std::uint64_t seed = std::stoull(name.substr(std::string("rotated-N:").size()));
        return rotated_n(seed);
    }
    throw ModelError("unknown fixture model " + name);
}

inline Alignment build_alignment(const std::string& name) {
    if (name == "alignment-N-to-M") return alignment_n_to_m();
    throw ModelError("unknown fixture alignment " + name);
}

inline Translation build_translation(const std::string& name) {
    if (name == "translation-M-star-to-M") return translation_m_star_to_m();
    throw ModelError("unknown fixture translation " + name);
}

// ---------------------------------------------------------------------------
// Hierarchical equality task generation

/// Two pairs of objects; the label asks whether the first pair's
/// same/different relation matches the second pair's.
struct EqualityTaskInstance {
    std::vector<std::vector<Rat>> objects;  // four encodings
    bool label = false;
};

inline bool same_object(const std::vector<Rat>& a, const std::vector<Rat>& b) { return a == b; }

inline bool equality_label(const EqualityTaskInstance& inst) {
    bool s1 = same_object(inst.objects[0], inst.objects[1]);
    bool s2 = same_object(inst.objects[2], inst.objects[3]);
    return s1 == s2;
}

struct SymbolicEncoding {};
struct DistributedEncoding {
    std::size_t dim = 4;
    std::uint64_t seed = 0;
};

/// Symbolic mode: the 16 boolean-coded instances, cycled when n > 16.
inline std::vector<EqualityTaskInstance> gen_equality_task(std::size_t n, SymbolicEncoding) {
    if (n == 0) throw ModelError("task count must be positive");
    std::vector<EqualityTaskInstance> out;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t bits = k % 16;
        EqualityTaskInstance inst;
        for (int i = 3; i >= 0; --i)
            inst.objects.push_back({Rat(long((bits >> i) & 1))});
        inst.label = equality_label(inst);
        out.push_back(std::move(inst));
    }
    return out;
}

/// Distributed mode: unit-norm pseudorandom vectors; same-pairs share the
/// exact vector. Deterministic given the seed.
inline std::vector<EqualityTaskInstance> gen_equality_task(std::size_t n,
                                                           DistributedEncoding enc) {
    if (n == 0) throw ModelError("task count must be positive");
    if (enc.dim == 0) throw ModelError("encoding dimension must be positive");
    std::mt19937_64 rng(enc.seed ^ 0xda3e39cb94b95bdbull);
    auto unit_vector = [&] {
        std::vector<Rat> v;
        double norm2 = 0.0;
        std::vector<double> raw(enc.dim);
        do {
            norm2 = 0.0;
            for (auto& x : raw) {
                double u = double(rng() >> 11) * (1.0 / 9007199254740992.0);
                x = 2.0 * u - 1.0;
                norm2 += x * x;
            }
        } while (norm2 < 1e-6);
        double norm = std::sqrt(norm2);
        for (double x : raw) v.push_back(rat_from_double(x / norm));
        return v;
    };
    std::vector<EqualityTaskInstance> out;
    for (std::size_t k = 0; k < n; ++k) {
        EqualityTaskInstance inst;
        bool same1 = rng() % 2 == 0;
        bool same2 = rng() % 2 == 0;
        auto o1 = unit_vector();
        auto o2 = same1 ? o1 : unit_vector();
        auto o3 = unit_vector();
        auto o4 = same2 ? o3 : unit_vector();
        inst.objects = {o1, o2, o3, o4};
        inst.label = equality_label(inst);
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace causalite::fixtures
