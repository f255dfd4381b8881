#include <doctest.h>

#include "corpus.hpp"
#include "util.hpp"
#include "semantics.hpp"

#include <random>

using namespace mgt;

namespace {

Context ctx1(const char* sort = "R") {
    Context c;
    c.vars = {{"x", sort}};
    return c;
}

TypedTuple tup(const Structure& m, int sort, std::initializer_list<const char*> names) {
    TypedTuple t;
    for (const char* n : names) {
        t.sorts.push_back(sort);
        t.elems.push_back(m.elem(sort, n));
    }
    return t;
}

} // namespace

TEST_CASE("eval truth on anything") {
    Structure m = corpus::bare_set("M", {"u"});
    Context empty;
    CHECK(eval(corpus::bare_signature(), Formula::truth(), empty, m, {}));
}

TEST_CASE("eval in GF(4): a*a + a = 1") {
    Signature sig = corpus::ring_signature();
    Structure m = corpus::gf4();
    Context c = ctx1();
    Formula f = parse_formula("exists y, z. Mul(x, x, y) & Add(y, x, z) & One(z)", c, sig);
    std::vector<int> asg{m.elem(0, "a")};
    CHECK(eval(sig, f, c, m, asg));
    std::vector<int> asg0{m.elem(0, "0")};
    CHECK(!eval(sig, f, c, m, asg0));
    std::vector<int> asg1{m.elem(0, "1")};
    CHECK(!eval(sig, f, c, m, asg1));
    std::vector<int> asgb{m.elem(0, "b")};
    CHECK(eval(sig, f, c, m, asgb));
}

TEST_CASE("eval irreflexivity of Neq") {
    Signature sig = corpus::neq_signature();
    Structure m = corpus::neq_subset("S", {"0", "1", "2"});
    Context c;
    c.vars = {{"x", "V"}};
    Formula f = parse_formula("Neq(x, x)", c, sig);
    std::vector<int> asg{0};
    CHECK(!eval(sig, f, c, m, asg));
}

TEST_CASE("exists over an empty sort is false, truth holds") {
    Signature sig = corpus::bare_signature();
    Structure m = corpus::bare_set("E", {});
    Context empty;
    Formula ex = parse_formula("exists y. true", empty, sig);
    CHECK(!eval(sig, ex, empty, m, {}));
    CHECK(eval(sig, Formula::truth(), empty, m, {}));
}

TEST_CASE("satisfies_sequent") {
    Signature sig = corpus::neq_signature();
    Structure m = corpus::neq_subset("S01", {"0", "1"});
    Theory dec = corpus::decidable_theory();
    for (const auto& ax : dec.axioms)
        CHECK(satisfies_sequent(sig, m, ax));

    // 2-element order fails density
    Signature osig = corpus::order_signature();
    Structure two = corpus::linear_order("ab", {"a", "b"});
    Theory dense = parse_theory("sort V\nrel Lt(V, V)\naxiom [x, y] Lt(x, y) => exists z. Lt(x, z) & Lt(z, y)\n");
    CHECK(!satisfies_sequent(osig, two, dense.axioms[0]));
}

TEST_CASE("check_theory verdicts") {
    Theory empty_theory;
    empty_theory.signature = corpus::graph_signature();
    Structure k3 = corpus::complete_graph("K3", 3);
    CHECK(check_theory(k3, empty_theory, 2).ok);

    // 3-cycle fails symmetry, with the failing axiom named
    Structure cyc;
    cyc.id = "C3";
    cyc.carriers = {{"a", "b", "c"}};
    cyc.relations.resize(1);
    cyc.relations[0] = {{0, 1}, {1, 2}, {2, 0}};
    cyc.finalize(corpus::graph_signature());
    Theory sym = parse_theory("sort V\nrel E(V, V)\naxiom symm [x, y] E(x, y) => E(y, x)\n");
    TheoryCheck res = check_theory(cyc, sym, 2);
    CHECK(!res.ok);
    REQUIRE(res.failing.size() == 1);
    CHECK(res.failing[0] == "symm");

    // GF(2) satisfies the relational ring laws (spot-check associativity and units)
    Theory ringish = parse_theory(
        "sort R\nrel Add(R, R, R)\nrel Mul(R, R, R)\nrel Zero(R)\nrel One(R)\n"
        "axiom addcomm [x, y, z] Add(x, y, z) => Add(y, x, z)\n"
        "axiom unit [x, y, o] One(o) & Mul(x, o, y) => x = y\n"
        "axiom zero [x, y, z] Zero(z) & Add(x, z, y) => x = y\n");
    CHECK(check_theory(corpus::gf2(), ringish, 2).ok);
    CHECK(check_theory(corpus::gf4(), ringish, 2).ok);
}

TEST_CASE("scheme bound exceeded flags truncation") {
    Theory t = parse_theory("sort V\nrel Neq(V, V)\nscheme ge atleast V via [a, b] Neq(a, b) bound 2\n");
    Structure m = corpus::neq_subset("S", {"0", "1", "2"});
    TheoryCheck ok = check_theory(m, t, 2);
    CHECK(ok.ok);
    CHECK(!ok.schemes_truncated);
    TheoryCheck trunc = check_theory(m, t, 5);
    CHECK(trunc.schemes_truncated);
}

TEST_CASE("enumerate_homs counts") {
    Signature bsig = corpus::bare_signature();
    Structure one = corpus::bare_set("one", {"u"});
    CHECK(enumerate_homs(bsig, one, one).size() == 1);

    Signature gsig = corpus::graph_signature();
    Structure k2 = corpus::complete_graph("K2", 2);
    Structure k3 = corpus::complete_graph("K3", 3);
    CHECK(enumerate_homs(gsig, k2, k3).size() == 6);

    // 2-chain as a reflexive <= relation into a reflexive point
    Signature osig = corpus::order_signature();
    Structure chain;
    chain.id = "chain";
    chain.carriers = {{"a", "b"}};
    chain.relations.resize(1);
    chain.relations[0] = {{0, 0}, {0, 1}, {1, 1}};
    chain.finalize(osig);
    Structure pt;
    pt.id = "pt";
    pt.carriers = {{"u"}};
    pt.relations.resize(1);
    pt.relations[0] = {{0, 0}};
    pt.finalize(osig);
    CHECK(enumerate_homs(osig, chain, pt).size() == 1);
}

TEST_CASE("homs are deterministic and lexicographic") {
    Signature gsig = corpus::graph_signature();
    Structure k3 = corpus::complete_graph("K3", 3);
    auto h1 = enumerate_homs(gsig, k3, k3);
    auto h2 = enumerate_homs(gsig, k3, k3);
    CHECK(h1 == h2);
    CHECK(std::is_sorted(h1.begin(), h1.end()));
}

TEST_CASE("enumerate_isos") {
    Signature gsig = corpus::graph_signature();
    Structure k3 = corpus::complete_graph("K3", 3);
    auto isos = enumerate_isos(gsig, k3, k3);
    CHECK(isos.size() == 6);
    // identity present
    bool has_id = false;
    for (const auto& h : isos)
        if (h.map[0] == std::vector<int>{0, 1, 2})
            has_id = true;
    CHECK(has_id);

    // GF(4) has exactly identity and Frobenius
    Signature rsig = corpus::ring_signature();
    Structure f4 = corpus::gf4();
    auto auts = enumerate_isos(rsig, f4, f4);
    REQUIRE(auts.size() == 2);
    int a = f4.elem(0, "a"), b = f4.elem(0, "b"), zero = f4.elem(0, "0"), one = f4.elem(0, "1");
    for (const auto& h : auts) {
        CHECK(h.map[0][zero] == zero);
        CHECK(h.map[0][one] == one);
        bool ident = h.map[0][a] == a && h.map[0][b] == b;
        bool frob = h.map[0][a] == b && h.map[0][b] == a;
        CHECK((ident || frob));
    }

    // isos = bijective homs whose inverse is a hom
    Structure p = corpus::p3();
    auto homs = enumerate_homs(gsig, p, p);
    std::vector<Morphism> bij;
    for (const auto& h : homs)
        if (is_isomorphism(gsig, p, p, h))
            bij.push_back(h);
    CHECK(bij == enumerate_isos(gsig, p, p));
    CHECK(bij.size() == 2); // identity and the reversal
}

TEST_CASE("hom_leq") {
    Signature gsig = corpus::graph_signature();
    Structure k2 = corpus::complete_graph("K2", 2);
    Structure k3 = corpus::complete_graph("K3", 3);

    TypedTuple pk2 = tup(k2, 0, {"a", "b"});
    CHECK(hom_leq(gsig, k2, pk2, k2, pk2));
    TypedTuple uv = tup(k3, 0, {"a", "b"});
    CHECK(hom_leq(gsig, k2, pk2, k3, uv));

    // (a,b) of K3 cannot land on a diagonal of K2
    TypedTuple diag = tup(k2, 0, {"a", "a"});
    CHECK(!hom_leq(gsig, k3, uv, k2, diag));
}

TEST_CASE("canonical_query adequacy (brute force over corpus pairs)") {
    Signature gsig = corpus::graph_signature();
    std::vector<Structure> objs = {corpus::complete_graph("K2", 2), corpus::complete_graph("K3", 3),
                                   corpus::p3()};
    for (const auto& m : objs) {
        for (int e1 = 0; e1 < int(m.carriers[0].size()); ++e1)
            for (int e2 = 0; e2 < int(m.carriers[0].size()); ++e2) {
                TypedTuple p{{0, 0}, {e1, e2}};
                Formula q = canonical_query(gsig, m, p);
                Context c = canonical_context(gsig, p);
                for (const auto& n : objs)
                    for (int f1 = 0; f1 < int(n.carriers[0].size()); ++f1)
                        for (int f2 = 0; f2 < int(n.carriers[0].size()); ++f2) {
                            TypedTuple qq{{0, 0}, {f1, f2}};
                            std::vector<int> asg{f1, f2};
                            CHECK(eval(gsig, q, c, n, asg) == hom_leq(gsig, m, p, n, qq));
                        }
            }
    }
}

TEST_CASE("canonical_query of K2 edge is the two-atom conjunction") {
    Signature gsig = corpus::graph_signature();
    Structure k2 = corpus::complete_graph("K2", 2);
    TypedTuple p = tup(k2, 0, {"a", "b"});
    Formula q = canonical_query(gsig, k2, p);
    CHECK(q == Formula::conj({Formula::rel_atom("E", {Term::var("x1"), Term::var("x2")}),
                              Formula::rel_atom("E", {Term::var("x2"), Term::var("x1")})}));
}

TEST_CASE("canonical_query of GF(4) at a has extension {a, b}") {
    Signature rsig = corpus::ring_signature();
    Structure f4 = corpus::gf4();
    TypedTuple p = tup(f4, 0, {"a"});
    Formula q = canonical_query(rsig, f4, p);
    Context c = canonical_context(rsig, p);
    auto sat = satisfying_assignments(rsig, q, c, f4);
    REQUIRE(sat.size() == 2);
    CHECK(sat[0][0] == f4.elem(0, "a"));
    CHECK(sat[1][0] == f4.elem(0, "b"));
}

TEST_CASE("extend_partial_iso") {
    Signature gsig = corpus::graph_signature();
    Structure p = corpus::p3();

    // empty partial map on K3 extends to the identity (first automorphism)
    Structure k3 = corpus::complete_graph("K3", 3);
    auto id = extend_partial_iso(gsig, k3, {}, {});
    REQUIRE(id.has_value());
    CHECK(id->map[0] == std::vector<int>{0, 1, 2});

    // endpoints of the path swap via the reversal
    TypedTuple a = tup(p, 0, {"a"});
    TypedTuple c = tup(p, 0, {"c"});
    auto rev = extend_partial_iso(gsig, p, a, c);
    REQUIRE(rev.has_value());
    CHECK(rev->map[0] == std::vector<int>{2, 1, 0});

    // a |-> b is a partial isomorphism (no atoms on singletons) that cannot extend
    TypedTuple b = tup(p, 0, {"b"});
    CHECK(!extend_partial_iso(gsig, p, a, b).has_value());

    // (a,b) |-> (a,c) is not even a partial isomorphism: E(a,b) not preserved
    TypedTuple ab = tup(p, 0, {"a", "b"});
    TypedTuple ac = tup(p, 0, {"a", "c"});
    CHECK_THROWS_WITH_AS(extend_partial_iso(gsig, p, ab, ac), doctest::Contains("E("), Error);
    // and indeed no automorphism extends it
    auto auts = enumerate_isos(gsig, p, p);
    for (const auto& h : auts)
        CHECK(!(h.map[0][0] == 0 && h.map[0][1] == 2));
}

TEST_CASE("hom preservation of random geometric formulas") {
    Signature gsig = corpus::graph_signature();
    Structure p = corpus::p3();
    Structure k3 = corpus::complete_graph("K3", 3);
    Context c;
    c.vars = {{"x", "V"}, {"y", "V"}};

    std::vector<Formula> suite = {
        parse_formula("E(x, y)", c, gsig),
        parse_formula("E(x, y) | x = y", c, gsig),
        parse_formula("exists z. E(x, z) & E(z, y)", c, gsig),
        parse_formula("E(x, x) | (exists z. E(y, z))", c, gsig),
    };
    auto homs = enumerate_homs(gsig, p, k3);
    REQUIRE(!homs.empty());
    for (const auto& f : suite)
        for (const auto& h : homs)
            for (int e1 = 0; e1 < 3; ++e1)
                for (int e2 = 0; e2 < 3; ++e2) {
                    std::vector<int> src{e1, e2};
                    if (eval(gsig, f, c, p, src)) {
                        std::vector<int> dst{h.map[0][e1], h.map[0][e2]};
                        CHECK(eval(gsig, f, c, k3, dst));
                    }
                }
}
