#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mgt {

// Multi-sorted relational vocabulary.  Function symbols are carried only so
// that a theory can be fed to relationalize(); everything downstream of the
// syntax module works with purely relational signatures.
struct RelationDecl {
    std::string name;
    std::vector<std::string> arity; // sort names
};

struct FunctionDecl {
    std::string name;
    std::vector<std::string> args; // sort names
    std::string result;
};

struct Signature {
    std::vector<std::string> sorts;
    std::vector<RelationDecl> relations;
    std::vector<FunctionDecl> functions; // only nonempty on the relationalize path

    int sort_index(const std::string& name) const;
    const RelationDecl* relation(const std::string& name) const;
    const FunctionDecl* function(const std::string& name) const;
    void validate() const;
};

// Terms are variables or parameter names; nested applications appear only in
// theories destined for relationalize().
struct Term {
    enum class Kind { Var, Param, App };
    Kind kind = Kind::Var;
    std::string name;
    std::vector<Term> args; // App only

    static Term var(std::string n) { return {Kind::Var, std::move(n), {}}; }
    static Term param(std::string n) { return {Kind::Param, std::move(n), {}}; }
    static Term app(std::string n, std::vector<Term> a) { return {Kind::App, std::move(n), std::move(a)}; }

    bool operator==(const Term&) const = default;
};

struct Context {
    std::vector<std::pair<std::string, std::string>> vars; // (name, sort)

    int index_of(const std::string& name) const;
    bool empty() const { return vars.empty(); }
    std::size_t size() const { return vars.size(); }
    std::vector<std::string> sort_profile() const;

    bool operator==(const Context&) const = default;
};

// Geometric formula AST, extended with the classical connectives accepted by
// the morleyize() front end.  And/Or are n-ary; the smart constructors keep
// them flat so parse/print round trips are structural identities.
struct Formula {
    enum class Kind { Truth, Falsity, RelAtom, Equal, And, Or, Exists, Not, Implies, Forall };

    Kind kind = Kind::Truth;
    std::string rel;                                        // RelAtom
    std::vector<Term> terms;                                // RelAtom (all), Equal (two)
    std::vector<Formula> kids;                              // And/Or (n), Exists/Forall/Not (1), Implies (2)
    std::vector<std::pair<std::string, std::string>> binders; // Exists/Forall: (var, sort)

    bool operator==(const Formula&) const = default;

    static Formula truth() { return Formula{}; }
    static Formula falsity();
    static Formula rel_atom(std::string name, std::vector<Term> ts);
    static Formula equal(Term a, Term b);
    static Formula conj(std::vector<Formula> fs);   // flattens; [] -> truth, [f] -> f
    static Formula disj(std::vector<Formula> fs);   // flattens; [] -> falsity, [f] -> f
    static Formula exists(std::vector<std::pair<std::string, std::string>> binders, Formula body);
    static Formula forall(std::vector<std::pair<std::string, std::string>> binders, Formula body);
    static Formula negation(Formula f);
    static Formula implies(Formula lhs, Formula rhs);

    bool is_geometric() const;
    bool has_app_terms() const;
    std::vector<std::string> free_params() const;
};

struct Sequent {
    std::string name;
    Context context;
    Formula premise;
    Formula conclusion;
};

// The one scheme generator the engine knows: "at least n elements of a sort,
// pairwise related by a formula".  Instance n is the sentence
//   true => exists e1..en : sort . AND_{i<j} pair(e_i, e_j).
struct Scheme {
    std::string name;
    std::string sort;
    std::string var_a, var_b;
    Formula pair_formula;
    int bound = 0;

    Sequent instance(int n) const;
};

struct Theory {
    Signature signature;
    std::vector<Sequent> axioms;
    std::vector<Scheme> schemes;
};

// -- well-formedness ---------------------------------------------------------

// Checks sorts/arities of f against ctx; param_sorts supplies the sorts of
// permitted parameter names (empty map = parameters rejected).
void check_well_sorted(const Formula& f, const Context& ctx, const Signature& sig,
                       const std::map<std::string, std::string>& param_sorts,
                       bool allow_classical, bool allow_apps);

void validate_theory(const Theory& t);

// -- operations --------------------------------------------------------------

Theory parse_theory(const std::string& text);

// Parses a single formula against a given context (used by tests/tools).
Formula parse_formula(const std::string& text, const Context& ctx, const Signature& sig);

std::string print_formula(const Formula& f);
std::string print_context(const Context& ctx);
std::string print_sequent(const Sequent& s);
std::string print_theory(const Theory& t);

// Simultaneous capture-avoiding substitution of free variables by terms.
Formula substitute(const Formula& f, const std::map<std::string, Term>& map);

// Canonical renaming of bound variables; alpha-equivalence is equality of
// canonical forms.
Formula alpha_canonical(const Formula& f);

Theory relationalize(const Theory& t);

Theory morleyize(const Theory& t);

} // namespace mgt
