#include <doctest.h>

#include "syntax.hpp"
#include "util.hpp"

#include <random>
#include <set>

using namespace mgt;

namespace {

const char* kNeqTheory = "sort V\nrel Neq(V, V)\naxiom [x] Neq(x, x) => false\n";

Theory neq_theory() {
    return parse_theory(kNeqTheory);
}

// Random geometric formula generator for the round-trip suite.
struct FormulaGen {
    std::mt19937 rng;
    const Signature& sig;
    int fresh = 0;

    Formula gen(std::vector<std::pair<std::string, std::string>> scope, int depth) {
        std::uniform_int_distribution<int> pick(0, depth == 0 ? 3 : 6);
        switch (pick(rng)) {
        case 0:
            return Formula::truth();
        case 1:
            return Formula::falsity();
        case 2: {
            if (scope.empty() || sig.relations.empty())
                return Formula::truth();
            const RelationDecl& r = sig.relations[rng() % sig.relations.size()];
            std::vector<Term> ts;
            for (const auto& s : r.arity) {
                std::vector<const std::string*> cands;
                for (const auto& [v, vs] : scope)
                    if (vs == s)
                        cands.push_back(&v);
                if (cands.empty())
                    return Formula::truth();
                ts.push_back(Term::var(*cands[rng() % cands.size()]));
            }
            return Formula::rel_atom(r.name, std::move(ts));
        }
        case 3: {
            if (scope.size() < 2)
                return Formula::truth();
            const auto& a = scope[rng() % scope.size()];
            std::vector<const std::string*> cands;
            for (const auto& [v, vs] : scope)
                if (vs == a.second)
                    cands.push_back(&v);
            return Formula::equal(Term::var(a.first), Term::var(*cands[rng() % cands.size()]));
        }
        case 4: {
            std::vector<Formula> ks;
            int n = 2 + int(rng() % 2);
            for (int i = 0; i < n; ++i)
                ks.push_back(gen(scope, depth - 1));
            return Formula::conj(std::move(ks));
        }
        case 5: {
            std::vector<Formula> ks;
            int n = 2 + int(rng() % 2);
            for (int i = 0; i < n; ++i)
                ks.push_back(gen(scope, depth - 1));
            return Formula::disj(std::move(ks));
        }
        default: {
            std::string v = "q" + std::to_string(fresh++);
            std::string s = sig.sorts[rng() % sig.sorts.size()];
            auto inner = scope;
            inner.emplace_back(v, s);
            Formula body = gen(inner, depth - 1);
            return Formula::exists({{v, s}}, body);
        }
        }
    }
};

} // namespace

TEST_CASE("parse minimal theory") {
    Theory t = neq_theory();
    CHECK(t.signature.sorts == std::vector<std::string>{"V"});
    REQUIRE(t.signature.relations.size() == 1);
    CHECK(t.signature.relations[0].name == "Neq");
    REQUIRE(t.axioms.size() == 1);
    CHECK(t.axioms[0].context.vars.size() == 1);
    CHECK(t.axioms[0].context.vars[0].second == "V");
    CHECK(t.axioms[0].conclusion == Formula::falsity());
}

TEST_CASE("parse the two decidability axioms") {
    Theory t = parse_theory("sort V\n"
                            "rel Neq(V, V)\n"
                            "axiom [x, x'] x = x' & Neq(x, x') => false\n"
                            "axiom [x, x'] true => x = x' | Neq(x, x')\n");
    REQUIRE(t.axioms.size() == 2);
    const Sequent& dec1 = t.axioms[0];
    CHECK(dec1.premise.kind == Formula::Kind::And);
    CHECK(dec1.conclusion == Formula::falsity());
    const Sequent& dec2 = t.axioms[1];
    CHECK(dec2.premise == Formula::truth());
    CHECK(dec2.conclusion.kind == Formula::Kind::Or);
}

TEST_CASE("arity error reported with the offending symbol") {
    CHECK_THROWS_WITH_AS(parse_theory("sort V\nrel Neq(V)\naxiom [x, y] Neq(x, y) => false\n"),
                         doctest::Contains("Neq"), Error);
}

TEST_CASE("syntax error carries line and column") {
    try {
        parse_theory("sort V\nrel (V)\n");
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("print_formula basics") {
    CHECK(print_formula(Formula::truth()) == "true");
    Formula f = Formula::exists({{"y", "V"}},
                                Formula::rel_atom("Mul", {Term::var("x"), Term::var("x"), Term::var("y")}));
    CHECK(print_formula(f) == "exists y : V. Mul(x, x, y)");
}

TEST_CASE("parse/print round trip on random formulas") {
    Theory t = parse_theory("sort V\nsort W\nrel Neq(V, V)\nrel R(V, W)\n");
    Context ctx;
    ctx.vars = {{"x", "V"}, {"y", "W"}};
    FormulaGen gen{std::mt19937(20240811), t.signature, 0};
    for (int i = 0; i < 100; ++i) {
        Formula f = gen.gen(ctx.vars, 5);
        std::string printed = print_formula(f);
        Formula reparsed = parse_formula(printed, ctx, t.signature);
        CHECK_MESSAGE(reparsed == f, "not a round trip: ", printed);
    }
}

TEST_CASE("round trip whole theory") {
    std::string src = "sort V\n"
                      "rel Lt(V, V)\n"
                      "axiom [x, y] Lt(x, y) => exists z. Lt(x, z) & Lt(z, y)\n"
                      "scheme big atleast V via [a, b] Lt(a, b) | Lt(b, a) bound 3\n";
    Theory t1 = parse_theory(src);
    std::string printed = print_theory(t1);
    Theory t2 = parse_theory(printed);
    CHECK(print_theory(t2) == printed);
    REQUIRE(t2.schemes.size() == 1);
    CHECK(t2.schemes[0].bound == 3);
}

TEST_CASE("scheme instance expands to pairwise-distinct sentence") {
    Theory t = parse_theory("sort V\nrel Neq(V, V)\nscheme ge atleast V via [a, b] Neq(a, b) bound 4\n");
    Sequent s2 = t.schemes[0].instance(2);
    CHECK(s2.premise == Formula::truth());
    REQUIRE(s2.conclusion.kind == Formula::Kind::Exists);
    CHECK(s2.conclusion.binders.size() == 2);
    Sequent s3 = t.schemes[0].instance(3);
    CHECK(s3.conclusion.binders.size() == 3);
    CHECK(s3.conclusion.kids[0].kids.size() == 3); // three unordered pairs
}

TEST_CASE("substitute replaces variables by parameters") {
    Formula f = Formula::equal(Term::var("x"), Term::var("y"));
    Formula g = substitute(f, {{"y", Term::param("m")}});
    CHECK(g == Formula::equal(Term::var("x"), Term::param("m")));
}

TEST_CASE("substitute avoids capture") {
    // substitute(exists y. R(x,y), x -> y) must rename the binder
    Formula f = Formula::exists({{"y", "V"}}, Formula::rel_atom("R", {Term::var("x"), Term::var("y")}));
    Formula g = substitute(f, {{"x", Term::var("y")}});
    REQUIRE(g.kind == Formula::Kind::Exists);
    std::string bound = g.binders[0].first;
    CHECK(bound != "y");
    CHECK(g.kids[0] == Formula::rel_atom("R", {Term::var("y"), Term::var(bound)}));
}

TEST_CASE("tuple substitution collapses duplicate parameters") {
    // psi = (y1 = y2), m = (a, a)
    Formula psi = Formula::equal(Term::var("y1"), Term::var("y2"));
    Formula g = substitute(psi, {{"y1", Term::param("a")}, {"y2", Term::param("a")}});
    CHECK(g == Formula::equal(Term::param("a"), Term::param("a")));
}

TEST_CASE("alpha canonical form identifies renamings") {
    Formula f = Formula::exists({{"y", "V"}}, Formula::equal(Term::var("y"), Term::var("x")));
    Formula g = Formula::exists({{"z", "V"}}, Formula::equal(Term::var("z"), Term::var("x")));
    CHECK(alpha_canonical(f) == alpha_canonical(g));
    Formula h = Formula::exists({{"z", "V"}}, Formula::equal(Term::var("x"), Term::var("z")));
    CHECK(alpha_canonical(f) != alpha_canonical(h));
}

TEST_CASE("relationalize unary function") {
    Theory t = parse_theory("sort V\nfun f(V) : V\naxiom [x] true => f(x) = x\n");
    Theory r = relationalize(t);
    CHECK(r.signature.functions.empty());
    REQUIRE(r.signature.relations.size() == 1);
    CHECK(r.signature.relations[0].name == "F");
    CHECK(r.signature.relations[0].arity.size() == 2);
    // totality + functionality + translated axiom
    CHECK(r.axioms.size() == 3);
    for (const auto& ax : r.axioms) {
        CHECK(ax.premise.is_geometric());
        CHECK(!ax.premise.has_app_terms());
        CHECK(!ax.conclusion.has_app_terms());
    }
}

TEST_CASE("relationalize ring signature emits two axioms per symbol") {
    Theory t = parse_theory("sort R\n"
                            "fun add(R, R) : R\n"
                            "fun mul(R, R) : R\n"
                            "fun zero() : R\n"
                            "fun one() : R\n");
    Theory r = relationalize(t);
    std::set<std::string> names;
    for (const auto& rel : r.signature.relations)
        names.insert(rel.name);
    CHECK(names == std::set<std::string>{"Add", "Mul", "Zero", "One"});
    CHECK(r.axioms.size() == 8);
}

TEST_CASE("relationalize flattens nested terms") {
    // the field sequent: exists y. mul(y, sub(x, x')) = one()
    Theory t = parse_theory("sort R\n"
                            "fun sub(R, R) : R\n"
                            "fun mul(R, R) : R\n"
                            "fun one() : R\n"
                            "axiom [x, x'] true => exists y. mul(y, sub(x, x')) = one()\n");
    Theory r = relationalize(t);
    const Sequent& ax = r.axioms.back();
    CHECK(!ax.conclusion.has_app_terms());
    // exists y . exists fresh... with Sub, One, Mul atoms
    std::string printed = print_formula(ax.conclusion);
    CHECK(printed.find("Sub(x, x'") != std::string::npos);
    CHECK(printed.find("One(") != std::string::npos);
    CHECK(printed.find("Mul(y") != std::string::npos);
}

TEST_CASE("morleyize names the negated equality") {
    Theory t = parse_theory("sort V\naxiom [x, y] ~(x = y) => false\n");
    Theory m = morleyize(t);
    const RelationDecl* neq = m.signature.relation("N_eq");
    REQUIRE(neq != nullptr);
    CHECK(neq->arity.size() == 2);
    // translated axiom + two Morleyization axioms
    CHECK(m.axioms.size() == 3);
    int excl = 0, total = 0;
    for (const auto& ax : m.axioms) {
        if (ax.name == "N_eq_excl")
            ++excl;
        if (ax.name == "N_eq_total")
            ++total;
    }
    CHECK(excl == 1);
    CHECK(total == 1);
}

TEST_CASE("morleyize is the identity on negation-free theories") {
    Theory t = parse_theory("sort V\nrel E(V, V)\naxiom [x, y] E(x, y) => exists z. E(y, z)\n");
    Theory m = morleyize(t);
    CHECK(print_theory(m) == print_theory(t));
}

TEST_CASE("morleyize output is coherent and two axioms per relation") {
    Theory t = parse_theory("sort V\n"
                            "rel E(V, V)\n"
                            "axiom [] true => forall x. ~E(x, x)\n"
                            "axiom [] true => forall x, y. E(x, y) -> E(y, x)\n"
                            "axiom [] true => forall x. exists y. E(x, y)\n");
    Theory m = morleyize(t);
    for (const auto& ax : m.axioms) {
        CHECK(ax.premise.is_geometric());
        CHECK(ax.conclusion.is_geometric());
    }
    std::size_t new_rels = m.signature.relations.size() - t.signature.relations.size();
    CHECK(m.axioms.size() == t.axioms.size() + 2 * new_rels);
}

TEST_CASE("morleyize rejects schemes") {
    Theory t = parse_theory("sort V\nrel Neq(V, V)\nscheme ge atleast V via [a, b] Neq(a, b) bound 2\n");
    CHECK_THROWS_AS(morleyize(t), Error);
}

TEST_CASE("sha256 known vector") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
