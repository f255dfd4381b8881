#include "syntax.hpp"

#include "util.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

namespace mgt {

// ---------------------------------------------------------------------------
// Signature / context helpers

int Signature::sort_index(const std::string& name) const {
    for (std::size_t i = 0; i < sorts.size(); ++i)
        if (sorts[i] == name)
            return int(i);
    return -1;
}

const RelationDecl* Signature::relation(const std::string& name) const {
    for (const auto& r : relations)
        if (r.name == name)
            return &r;
    return nullptr;
}

const FunctionDecl* Signature::function(const std::string& name) const {
    for (const auto& f : functions)
        if (f.name == name)
            return &f;
    return nullptr;
}

void Signature::validate() const {
    std::set<std::string> seen_sorts(sorts.begin(), sorts.end());
    if (seen_sorts.size() != sorts.size())
        validation_error("duplicate sort declaration");
    std::set<std::string> names;
    for (const auto& r : relations) {
        if (!names.insert(r.name).second)
            validation_error("duplicate relation name: " + r.name);
        for (const auto& s : r.arity)
            if (!seen_sorts.count(s))
                validation_error("relation " + r.name + " uses undeclared sort " + s);
    }
    for (const auto& f : functions) {
        if (!names.insert(f.name).second)
            validation_error("duplicate symbol name: " + f.name);
        for (const auto& s : f.args)
            if (!seen_sorts.count(s))
                validation_error("function " + f.name + " uses undeclared sort " + s);
        if (!seen_sorts.count(f.result))
            validation_error("function " + f.name + " uses undeclared sort " + f.result);
    }
}

int Context::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].first == name)
            return int(i);
    return -1;
}

std::vector<std::string> Context::sort_profile() const {
    std::vector<std::string> out;
    out.reserve(vars.size());
    for (const auto& [n, s] : vars)
        out.push_back(s);
    return out;
}

// ---------------------------------------------------------------------------
// Formula constructors

Formula Formula::falsity() {
    Formula f;
    f.kind = Kind::Falsity;
    return f;
}

Formula Formula::rel_atom(std::string name, std::vector<Term> ts) {
    Formula f;
    f.kind = Kind::RelAtom;
    f.rel = std::move(name);
    f.terms = std::move(ts);
    return f;
}

Formula Formula::equal(Term a, Term b) {
    Formula f;
    f.kind = Kind::Equal;
    f.terms = {std::move(a), std::move(b)};
    return f;
}

Formula Formula::conj(std::vector<Formula> fs) {
    std::vector<Formula> flat;
    for (auto& f : fs) {
        if (f.kind == Kind::And)
            for (auto& k : f.kids)
                flat.push_back(std::move(k));
        else
            flat.push_back(std::move(f));
    }
    if (flat.empty())
        return truth();
    if (flat.size() == 1)
        return flat[0];
    Formula f;
    f.kind = Kind::And;
    f.kids = std::move(flat);
    return f;
}

Formula Formula::disj(std::vector<Formula> fs) {
    std::vector<Formula> flat;
    for (auto& f : fs) {
        if (f.kind == Kind::Or)
            for (auto& k : f.kids)
                flat.push_back(std::move(k));
        else
            flat.push_back(std::move(f));
    }
    if (flat.empty())
        return falsity();
    if (flat.size() == 1)
        return flat[0];
    Formula f;
    f.kind = Kind::Or;
    f.kids = std::move(flat);
    return f;
}

Formula Formula::exists(std::vector<std::pair<std::string, std::string>> binders, Formula body) {
    if (binders.empty())
        return body;
    if (body.kind == Kind::Exists) {
        // exists x. exists y. f == exists x, y. f
        for (auto& b : body.binders)
            binders.push_back(std::move(b));
        body = std::move(body.kids[0]);
    }
    Formula f;
    f.kind = Kind::Exists;
    f.binders = std::move(binders);
    f.kids.push_back(std::move(body));
    return f;
}

Formula Formula::forall(std::vector<std::pair<std::string, std::string>> binders, Formula body) {
    if (binders.empty())
        return body;
    if (body.kind == Kind::Forall) {
        for (auto& b : body.binders)
            binders.push_back(std::move(b));
        body = std::move(body.kids[0]);
    }
    Formula f;
    f.kind = Kind::Forall;
    f.binders = std::move(binders);
    f.kids.push_back(std::move(body));
    return f;
}

Formula Formula::negation(Formula f) {
    Formula g;
    g.kind = Kind::Not;
    g.kids.push_back(std::move(f));
    return g;
}

Formula Formula::implies(Formula lhs, Formula rhs) {
    Formula g;
    g.kind = Kind::Implies;
    g.kids.push_back(std::move(lhs));
    g.kids.push_back(std::move(rhs));
    return g;
}

bool Formula::is_geometric() const {
    switch (kind) {
    case Kind::Not:
    case Kind::Implies:
    case Kind::Forall:
        return false;
    default:
        for (const auto& k : kids)
            if (!k.is_geometric())
                return false;
        return true;
    }
}

bool Formula::has_app_terms() const {
    auto term_has_app = [](const Term& t) {
        return t.kind == Term::Kind::App;
    };
    for (const auto& t : terms)
        if (term_has_app(t))
            return true;
    for (const auto& k : kids)
        if (k.has_app_terms())
            return true;
    return false;
}

namespace {

void collect_params(const Term& t, std::set<std::string>& out) {
    if (t.kind == Term::Kind::Param)
        out.insert(t.name);
    for (const auto& a : t.args)
        collect_params(a, out);
}

void collect_params(const Formula& f, std::set<std::string>& out) {
    for (const auto& t : f.terms)
        collect_params(t, out);
    for (const auto& k : f.kids)
        collect_params(k, out);
}

} // namespace

std::vector<std::string> Formula::free_params() const {
    std::set<std::string> set;
    collect_params(*this, set);
    return {set.begin(), set.end()};
}

Sequent Scheme::instance(int n) const {
    std::vector<std::pair<std::string, std::string>> binders;
    std::vector<Formula> conjuncts;
    auto elem = [&](int i) { return var_a + "_" + std::to_string(i); };
    for (int i = 1; i <= n; ++i)
        binders.emplace_back(elem(i), sort);
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            std::map<std::string, Term> sub{{var_a, Term::var(elem(i))}, {var_b, Term::var(elem(j))}};
            conjuncts.push_back(substitute(pair_formula, sub));
        }
    Sequent s;
    s.name = name + "_" + std::to_string(n);
    s.premise = Formula::truth();
    s.conclusion = Formula::exists(std::move(binders), Formula::conj(std::move(conjuncts)));
    return s;
}

// ---------------------------------------------------------------------------
// Well-sortedness

namespace {

struct SortChecker {
    const Signature& sig;
    const std::map<std::string, std::string>& param_sorts;
    bool allow_classical;
    bool allow_apps;

    // Returns the sort of a term, or "" when it cannot be determined locally
    // (a bare parameter/variable with no constraining position).
    std::string term_sort(const Term& t, const std::map<std::string, std::string>& vars) const {
        switch (t.kind) {
        case Term::Kind::Var: {
            auto it = vars.find(t.name);
            if (it == vars.end())
                validation_error("unbound variable: " + t.name);
            return it->second;
        }
        case Term::Kind::Param: {
            if (param_sorts.empty())
                validation_error("parameter not permitted here: " + t.name);
            auto it = param_sorts.find(t.name);
            if (it == param_sorts.end())
                validation_error("unknown parameter: " + t.name);
            return it->second;
        }
        case Term::Kind::App: {
            if (!allow_apps)
                validation_error("function application not permitted here: " + t.name);
            const FunctionDecl* f = sig.function(t.name);
            if (!f)
                validation_error("unknown function: " + t.name);
            if (f->args.size() != t.args.size())
                validation_error("function " + t.name + " expects " + std::to_string(f->args.size()) +
                                 " arguments, got " + std::to_string(t.args.size()));
            for (std::size_t i = 0; i < t.args.size(); ++i) {
                std::string s = term_sort(t.args[i], vars);
                if (s != f->args[i])
                    validation_error("sort mismatch in argument " + std::to_string(i + 1) + " of " + t.name +
                                     ": expected " + f->args[i] + ", got " + s);
            }
            return f->result;
        }
        }
        return {};
    }

    void check(const Formula& f, std::map<std::string, std::string>& vars) const {
        switch (f.kind) {
        case Formula::Kind::Truth:
        case Formula::Kind::Falsity:
            return;
        case Formula::Kind::RelAtom: {
            const RelationDecl* r = sig.relation(f.rel);
            if (!r)
                validation_error("unknown relation: " + f.rel);
            if (r->arity.size() != f.terms.size())
                validation_error("relation " + f.rel + " expects " + std::to_string(r->arity.size()) +
                                 " arguments, got " + std::to_string(f.terms.size()));
            for (std::size_t i = 0; i < f.terms.size(); ++i) {
                std::string s = term_sort(f.terms[i], vars);
                if (s != r->arity[i])
                    validation_error("sort mismatch in argument " + std::to_string(i + 1) + " of " + f.rel +
                                     ": expected " + r->arity[i] + ", got " + s);
            }
            return;
        }
        case Formula::Kind::Equal: {
            std::string a = term_sort(f.terms[0], vars);
            std::string b = term_sort(f.terms[1], vars);
            if (a != b)
                validation_error("equality between different sorts: " + a + " vs " + b);
            return;
        }
        case Formula::Kind::And:
        case Formula::Kind::Or:
            for (const auto& k : f.kids)
                check(k, vars);
            return;
        case Formula::Kind::Not:
        case Formula::Kind::Implies:
            if (!allow_classical)
                validation_error("classical connective in a geometric formula");
            for (const auto& k : f.kids)
                check(k, vars);
            return;
        case Formula::Kind::Forall:
            if (!allow_classical)
                validation_error("classical connective in a geometric formula");
            [[fallthrough]];
        case Formula::Kind::Exists: {
            std::map<std::string, std::string> inner = vars;
            for (const auto& [v, s] : f.binders) {
                if (sig.sort_index(s) < 0)
                    validation_error("quantifier over undeclared sort: " + s);
                inner[v] = s;
            }
            check(f.kids[0], inner);
            return;
        }
        }
    }
};

} // namespace

void check_well_sorted(const Formula& f, const Context& ctx, const Signature& sig,
                       const std::map<std::string, std::string>& param_sorts,
                       bool allow_classical, bool allow_apps) {
    std::set<std::string> seen;
    std::map<std::string, std::string> vars;
    for (const auto& [n, s] : ctx.vars) {
        if (!seen.insert(n).second)
            validation_error("duplicate context variable: " + n);
        if (sig.sort_index(s) < 0)
            validation_error("context variable " + n + " has undeclared sort " + s);
        vars[n] = s;
    }
    SortChecker checker{sig, param_sorts, allow_classical, allow_apps};
    checker.check(f, vars);
}

void validate_theory(const Theory& t) {
    t.signature.validate();
    bool has_funs = !t.signature.functions.empty();
    for (const auto& ax : t.axioms) {
        check_well_sorted(ax.premise, ax.context, t.signature, {}, true, has_funs);
        check_well_sorted(ax.conclusion, ax.context, t.signature, {}, true, has_funs);
    }
    for (const auto& sch : t.schemes) {
        if (t.signature.sort_index(sch.sort) < 0)
            validation_error("scheme " + sch.name + " over undeclared sort " + sch.sort);
        if (sch.bound < 1)
            validation_error("scheme " + sch.name + " must have bound >= 1");
        Context pair_ctx;
        pair_ctx.vars = {{sch.var_a, sch.sort}, {sch.var_b, sch.sort}};
        check_well_sorted(sch.pair_formula, pair_ctx, t.signature, {}, false, has_funs);
    }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Precedence levels: implies 0, or 1, and 2, unary 3, atom 4.
int level_of(const Formula& f) {
    switch (f.kind) {
    case Formula::Kind::Implies: return 0;
    case Formula::Kind::Or: return 1;
    case Formula::Kind::And: return 2;
    case Formula::Kind::Not: return 3;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: return 3;
    default: return 4;
    }
}

bool is_quantifier(const Formula& f) {
    return f.kind == Formula::Kind::Exists || f.kind == Formula::Kind::Forall;
}

std::string print_term(const Term& t) {
    if (t.kind == Term::Kind::App) {
        std::vector<std::string> args;
        for (const auto& a : t.args)
            args.push_back(print_term(a));
        return t.name + "(" + join(args, ", ") + ")";
    }
    return t.name;
}

void print_rec(const Formula& f, int min_level, std::string& out) {
    // A quantifier body extends to the end of the formula, so a quantified
    // child inside a binary chain always gets parenthesised.
    bool parens = level_of(f) < min_level || (is_quantifier(f) && min_level > 0);
    if (parens)
        out += "(";
    switch (f.kind) {
    case Formula::Kind::Truth:
        out += "true";
        break;
    case Formula::Kind::Falsity:
        out += "false";
        break;
    case Formula::Kind::RelAtom: {
        std::vector<std::string> args;
        for (const auto& t : f.terms)
            args.push_back(print_term(t));
        out += f.rel + "(" + join(args, ", ") + ")";
        break;
    }
    case Formula::Kind::Equal:
        out += print_term(f.terms[0]) + " = " + print_term(f.terms[1]);
        break;
    case Formula::Kind::And:
        for (std::size_t i = 0; i < f.kids.size(); ++i) {
            if (i) out += " & ";
            print_rec(f.kids[i], 3, out);
        }
        break;
    case Formula::Kind::Or:
        for (std::size_t i = 0; i < f.kids.size(); ++i) {
            if (i) out += " | ";
            print_rec(f.kids[i], 2, out);
        }
        break;
    case Formula::Kind::Implies:
        print_rec(f.kids[0], 1, out);
        out += " -> ";
        print_rec(f.kids[1], 0, out);
        break;
    case Formula::Kind::Not:
        out += "~";
        print_rec(f.kids[0], 4, out);
        break;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
        out += f.kind == Formula::Kind::Exists ? "exists " : "forall ";
        std::vector<std::string> bs;
        for (const auto& [v, s] : f.binders)
            bs.push_back(v + " : " + s);
        out += join(bs, ", ") + ". ";
        print_rec(f.kids[0], 0, out);
        break;
    }
    }
    if (parens)
        out += ")";
}

} // namespace

std::string print_formula(const Formula& f) {
    std::string out;
    print_rec(f, 0, out);
    return out;
}

std::string print_context(const Context& ctx) {
    std::vector<std::string> parts;
    for (const auto& [v, s] : ctx.vars)
        parts.push_back(v + " : " + s);
    return "[" + join(parts, ", ") + "]";
}

std::string print_sequent(const Sequent& s) {
    return "axiom " + s.name + " " + print_context(s.context) + " " + print_formula(s.premise) + " => " +
           print_formula(s.conclusion);
}

std::string print_theory(const Theory& t) {
    std::ostringstream out;
    for (const auto& s : t.signature.sorts)
        out << "sort " << s << "\n";
    for (const auto& r : t.signature.relations)
        out << "rel " << r.name << "(" << join(r.arity, ", ") << ")\n";
    for (const auto& f : t.signature.functions)
        out << "fun " << f.name << "(" << join(f.args, ", ") << ") : " << f.result << "\n";
    for (const auto& ax : t.axioms)
        out << print_sequent(ax) << "\n";
    for (const auto& sch : t.schemes)
        out << "scheme " << sch.name << " atleast " << sch.sort << " via [" << sch.var_a << ", " << sch.var_b
            << "] " << print_formula(sch.pair_formula) << " bound " << sch.bound << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Substitution and alpha-canonical form

namespace {

void collect_var_names(const Term& t, std::set<std::string>& out) {
    if (t.kind == Term::Kind::Var)
        out.insert(t.name);
    for (const auto& a : t.args)
        collect_var_names(a, out);
}

void collect_all_names(const Formula& f, std::set<std::string>& out) {
    for (const auto& t : f.terms)
        collect_var_names(t, out);
    for (const auto& [v, s] : f.binders)
        out.insert(v);
    for (const auto& k : f.kids)
        collect_all_names(k, out);
}

std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
    std::string cand = base + "'";
    while (taken.count(cand))
        cand += "'";
    return cand;
}

Term substitute_term(const Term& t, const std::map<std::string, Term>& map) {
    switch (t.kind) {
    case Term::Kind::Var: {
        auto it = map.find(t.name);
        return it == map.end() ? t : it->second;
    }
    case Term::Kind::Param:
        return t;
    case Term::Kind::App: {
        Term out = t;
        for (auto& a : out.args)
            a = substitute_term(a, map);
        return out;
    }
    }
    return t;
}

} // namespace

Formula substitute(const Formula& f, const std::map<std::string, Term>& map) {
    switch (f.kind) {
    case Formula::Kind::Truth:
    case Formula::Kind::Falsity:
        return f;
    case Formula::Kind::RelAtom:
    case Formula::Kind::Equal: {
        Formula out = f;
        for (auto& t : out.terms)
            t = substitute_term(t, map);
        return out;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Not:
    case Formula::Kind::Implies: {
        Formula out = f;
        for (auto& k : out.kids)
            k = substitute(k, map);
        return out;
    }
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
        // Drop bindings shadowed by the quantifier, then rename binders that
        // would capture substituted terms.
        std::map<std::string, Term> inner = map;
        for (const auto& [v, s] : f.binders)
            inner.erase(v);

        std::set<std::string> incoming;
        for (const auto& [from, to] : inner)
            collect_var_names(to, incoming);

        std::set<std::string> taken = incoming;
        collect_all_names(f.kids[0], taken);
        for (const auto& [from, to] : inner)
            taken.insert(from);

        Formula out = f;
        for (auto& [v, s] : out.binders) {
            if (incoming.count(v)) {
                std::string nv = fresh_name(v, taken);
                taken.insert(nv);
                inner[v] = Term::var(nv);
                v = nv;
            }
        }
        out.kids[0] = substitute(f.kids[0], inner);
        return out;
    }
    }
    return f;
}

namespace {

Formula alpha_rec(const Formula& f, std::map<std::string, Term>& renaming, int& counter) {
    if (f.kind == Formula::Kind::Exists || f.kind == Formula::Kind::Forall) {
        Formula out = f;
        std::map<std::string, Term> inner = renaming;
        for (auto& [v, s] : out.binders) {
            std::string nv = "_b" + std::to_string(counter++);
            inner[v] = Term::var(nv);
            v = nv;
        }
        out.kids[0] = alpha_rec(f.kids[0], inner, counter);
        return out;
    }
    Formula out = f;
    for (auto& t : out.terms)
        t = substitute_term(t, renaming);
    for (std::size_t i = 0; i < out.kids.size(); ++i)
        out.kids[i] = alpha_rec(f.kids[i], renaming, counter);
    return out;
}

} // namespace

Formula alpha_canonical(const Formula& f) {
    std::map<std::string, Term> renaming;
    int counter = 0;
    return alpha_rec(f, renaming, counter);
}

// ---------------------------------------------------------------------------
// Lexer / parser

namespace {

struct Token {
    enum class Kind { Ident, Number, Sym, End };
    Kind kind;
    std::string text;
    int line;
    int col;
};

bool ident_start(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@' || c == '\'';
}

bool ident_char(char c) {
    return ident_start(c);
}

struct Lexer {
    const std::string& src;
    std::size_t pos = 0;
    int line = 1;
    int col = 1;
    std::vector<Token> tokens;

    explicit Lexer(const std::string& s) : src(s) {}

    [[noreturn]] void fail(const std::string& msg) const {
        parse_error("syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
    }

    void advance() {
        if (src[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    void run() {
        while (pos < src.size()) {
            char c = src[pos];
            if (c == '#') {
                while (pos < src.size() && src[pos] != '\n')
                    advance();
                continue;
            }
            if (c == '\n') {
                tokens.push_back({Token::Kind::Sym, "\n", line, col});
                advance();
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
                continue;
            }
            int tl = line, tc = col;
            if (ident_start(c)) {
                std::string text;
                while (pos < src.size()) {
                    char d = src[pos];
                    if (ident_char(d)) {
                        text.push_back(d);
                        advance();
                    } else if (d == '.' && pos + 1 < src.size() && ident_char(src[pos + 1])) {
                        // a dot glued to an identifier character continues the
                        // name (parameter names like M@x or q.0); a dot before
                        // whitespace ends a quantifier prefix
                        text.push_back(d);
                        advance();
                    } else {
                        break;
                    }
                }
                tokens.push_back({Token::Kind::Ident, text, tl, tc});
                continue;
            }
            if (c == '-' && pos + 1 < src.size() && src[pos + 1] == '>') {
                tokens.push_back({Token::Kind::Sym, "->", tl, tc});
                advance();
                advance();
                continue;
            }
            if (c == '=' && pos + 1 < src.size() && src[pos + 1] == '>') {
                tokens.push_back({Token::Kind::Sym, "=>", tl, tc});
                advance();
                advance();
                continue;
            }
            static const std::string singles = "()[]{},;:=&|~.";
            if (singles.find(c) != std::string::npos) {
                tokens.push_back({Token::Kind::Sym, std::string(1, c), tl, tc});
                advance();
                continue;
            }
            fail(std::string("unexpected character '") + c + "'");
        }
        tokens.push_back({Token::Kind::End, "", line, col});
    }
};

// Sort inference: union-find over variable occurrences, with sorts pinned by
// relation/function argument positions.
struct SortInference {
    std::vector<std::string> names;
    std::vector<int> parent;
    std::vector<std::string> sort; // "" = unknown

    int node(const std::string& name) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name)
                return int(i);
        names.push_back(name);
        parent.push_back(int(names.size()) - 1);
        sort.emplace_back();
        return int(names.size()) - 1;
    }

    int find(int x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }

    void pin(int x, const std::string& s, int line) {
        x = find(x);
        if (sort[x].empty())
            sort[x] = s;
        else if (sort[x] != s)
            parse_error("line " + std::to_string(line) + ": variable " + names[x] + " used at sorts " + sort[x] +
                        " and " + s);
    }

    void unite(int a, int b, int line) {
        a = find(a);
        b = find(b);
        if (a == b)
            return;
        if (!sort[a].empty() && !sort[b].empty() && sort[a] != sort[b])
            parse_error("line " + std::to_string(line) + ": equality between sorts " + sort[a] + " and " + sort[b]);
        if (sort[a].empty())
            std::swap(a, b);
        parent[b] = a;
    }

    // "" when the sort is not (yet) determined
    std::string try_resolve(const std::string& name) {
        int x = find(node(name));
        return sort[x];
    }

    std::string resolved(const std::string& name, const Signature& sig, int line) {
        std::string s = try_resolve(name);
        if (!s.empty())
            return s;
        if (sig.sorts.size() == 1)
            return sig.sorts[0];
        parse_error("line " + std::to_string(line) + ": cannot infer the sort of a variable (" +
                    (name.size() > 3 ? name.substr(3) : name) + "); annotate with ':'");
    }
};

struct Parser {
    std::vector<Token> toks;
    std::size_t pos = 0;
    const Signature* sig = nullptr;
    bool allow_params = false;

    const Token& peek() const { return toks[pos]; }
    const Token& get() { return toks[pos++]; }

    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        parse_error("syntax error at line " + std::to_string(t.line) + ", column " + std::to_string(t.col) + ": " +
                    msg + (t.kind == Token::Kind::End ? " (at end of input)" : " (found '" + t.text + "')"));
    }

    bool at_sym(const std::string& s) const {
        return peek().kind == Token::Kind::Sym && peek().text == s;
    }

    bool accept_sym(const std::string& s) {
        if (at_sym(s)) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect_sym(const std::string& s) {
        if (!accept_sym(s))
            fail("expected '" + (s == "\n" ? std::string("end of line") : s) + "'");
    }

    void skip_newlines() {
        while (accept_sym("\n")) {
        }
    }

    std::string expect_ident(const std::string& what) {
        if (peek().kind != Token::Kind::Ident)
            fail("expected " + what);
        return get().text;
    }

    bool at_keyword(const std::string& kw) const {
        return peek().kind == Token::Kind::Ident && peek().text == kw;
    }

    // ---- formulas ----

    struct RawBinder {
        std::string name;
        std::string sort; // "" = infer
    };

    // Variables currently in scope, each with the inference key of its
    // binding instance (so shadowed names do not share constraints).
    struct Scope {
        std::vector<std::pair<std::string, std::string>> vars; // (name, key)
        const std::string* key_of(const std::string& n) const {
            for (auto it = vars.rbegin(); it != vars.rend(); ++it)
                if (it->first == n)
                    return &it->second;
            return nullptr;
        }
    };

    int binder_serial = 0;

    // A parsed term together with its inference key ("" for applications).
    struct KTerm {
        Term term;
        std::string key;
    };

    KTerm parse_term(Scope& scope, SortInference& inf) {
        int line = peek().line;
        std::string name = expect_ident("a term");
        if (at_sym("(")) {
            if (!sig->function(name))
                fail("unknown function '" + name + "'");
            get();
            std::vector<KTerm> args;
            if (!at_sym(")")) {
                args.push_back(parse_term(scope, inf));
                while (accept_sym(","))
                    args.push_back(parse_term(scope, inf));
            }
            expect_sym(")");
            const FunctionDecl* f = sig->function(name);
            if (f->args.size() != args.size())
                fail("function " + name + " expects " + std::to_string(f->args.size()) + " arguments");
            std::vector<Term> plain;
            for (std::size_t i = 0; i < args.size(); ++i) {
                pin_term(args[i], f->args[i], inf, line);
                plain.push_back(std::move(args[i].term));
            }
            return {Term::app(name, std::move(plain)), ""};
        }
        if (const std::string* key = scope.key_of(name))
            return {Term::var(name), *key};
        if (!allow_params)
            fail("unknown variable '" + name + "'");
        return {Term::param(name), "$p$" + name};
    }

    void pin_term(const KTerm& t, const std::string& sort, SortInference& inf, int line) {
        if (!t.key.empty())
            inf.pin(inf.node(t.key), sort, line);
        else if (sig->function(t.term.name)->result != sort)
            parse_error("line " + std::to_string(line) + ": function " + t.term.name + " has result sort " +
                        sig->function(t.term.name)->result + ", expected " + sort);
    }

    void link_terms(const KTerm& a, const KTerm& b, SortInference& inf, int line) {
        if (!a.key.empty() && !b.key.empty())
            inf.unite(inf.node(a.key), inf.node(b.key), line);
        else if (!a.key.empty())
            inf.pin(inf.node(a.key), sig->function(b.term.name)->result, line);
        else if (!b.key.empty())
            inf.pin(inf.node(b.key), sig->function(a.term.name)->result, line);
        else if (sig->function(a.term.name)->result != sig->function(b.term.name)->result)
            parse_error("line " + std::to_string(line) + ": equality between different sorts");
    }

    Formula parse_formula_top(Scope& scope, SortInference& inf) {
        return parse_implied(scope, inf);
    }

    Formula parse_implied(Scope& scope, SortInference& inf) {
        Formula lhs = parse_or(scope, inf);
        if (accept_sym("->"))
            return Formula::implies(std::move(lhs), parse_implied(scope, inf));
        return lhs;
    }

    Formula parse_or(Scope& scope, SortInference& inf) {
        std::vector<Formula> parts;
        parts.push_back(parse_and(scope, inf));
        while (accept_sym("|"))
            parts.push_back(parse_and(scope, inf));
        return parts.size() == 1 ? std::move(parts[0]) : Formula::disj(std::move(parts));
    }

    Formula parse_and(Scope& scope, SortInference& inf) {
        std::vector<Formula> parts;
        parts.push_back(parse_unary(scope, inf));
        while (accept_sym("&"))
            parts.push_back(parse_unary(scope, inf));
        return parts.size() == 1 ? std::move(parts[0]) : Formula::conj(std::move(parts));
    }

    std::vector<RawBinder> parse_binder_list() {
        std::vector<RawBinder> out;
        out.push_back(parse_binder());
        while (accept_sym(","))
            out.push_back(parse_binder());
        return out;
    }

    RawBinder parse_binder() {
        RawBinder b;
        b.name = expect_ident("a variable");
        if (accept_sym(":"))
            b.sort = expect_ident("a sort");
        return b;
    }

    Formula parse_quantifier(bool universal, Scope& scope, SortInference& inf) {
        std::vector<RawBinder> raw = parse_binder_list();
        expect_sym(".");
        std::size_t old = scope.vars.size();
        std::vector<std::string> keys;
        for (const auto& b : raw) {
            std::string key = "$q$" + std::to_string(binder_serial++);
            keys.push_back(key);
            scope.vars.emplace_back(b.name, key);
            if (!b.sort.empty()) {
                if (sig->sort_index(b.sort) < 0)
                    fail("undeclared sort '" + b.sort + "'");
                inf.pin(inf.node(key), b.sort, peek().line);
            }
        }
        Formula body = parse_formula_top(scope, inf);
        // A binder's sort may be pinned by constraints seen later in the
        // axiom; unresolved ones carry their inference key until
        // resolve_binders runs over the finished sequent.
        std::vector<std::pair<std::string, std::string>> binders;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            std::string s = !raw[i].sort.empty() ? raw[i].sort : inf.try_resolve(keys[i]);
            binders.emplace_back(raw[i].name, s.empty() ? "\t" + keys[i] : s);
        }
        scope.vars.resize(old);
        return universal ? Formula::forall(std::move(binders), std::move(body))
                         : Formula::exists(std::move(binders), std::move(body));
    }

    Formula parse_unary(Scope& scope, SortInference& inf) {
        if (accept_sym("~"))
            return Formula::negation(parse_unary(scope, inf));
        if (at_keyword("exists")) {
            get();
            return parse_quantifier(false, scope, inf);
        }
        if (at_keyword("forall")) {
            get();
            return parse_quantifier(true, scope, inf);
        }
        return parse_atom(scope, inf);
    }

    Formula parse_atom(Scope& scope, SortInference& inf) {
        if (accept_sym("(")) {
            Formula f = parse_formula_top(scope, inf);
            expect_sym(")");
            return f;
        }
        if (at_keyword("true")) {
            get();
            return Formula::truth();
        }
        if (at_keyword("false")) {
            get();
            return Formula::falsity();
        }
        int line = peek().line;
        if (peek().kind != Token::Kind::Ident)
            fail("expected a formula");
        // Either a relation atom or the left side of an equality.
        std::string name = peek().text;
        if (sig->relation(name)) {
            get();
            expect_sym("(");
            std::vector<KTerm> args;
            if (!at_sym(")")) {
                args.push_back(parse_term(scope, inf));
                while (accept_sym(","))
                    args.push_back(parse_term(scope, inf));
            }
            expect_sym(")");
            const RelationDecl* r = sig->relation(name);
            if (r->arity.size() != args.size())
                parse_error("line " + std::to_string(line) + ": relation " + name + " expects " +
                            std::to_string(r->arity.size()) + " arguments, got " + std::to_string(args.size()));
            std::vector<Term> plain;
            for (std::size_t i = 0; i < args.size(); ++i) {
                pin_term(args[i], r->arity[i], inf, line);
                plain.push_back(std::move(args[i].term));
            }
            return Formula::rel_atom(name, std::move(plain));
        }
        KTerm lhs = parse_term(scope, inf);
        expect_sym("=");
        KTerm rhs = parse_term(scope, inf);
        link_terms(lhs, rhs, inf, line);
        return Formula::equal(std::move(lhs.term), std::move(rhs.term));
    }

    // Resolve inferred sorts into quantifier binders after the whole axiom
    // has been seen (a variable may be pinned later than its use).
    Formula resolve_binders(const Formula& f, SortInference& inf) {
        Formula out = f;
        for (auto& [v, s] : out.binders)
            if (!s.empty() && s[0] == '\t')
                s = inf.resolved(s.substr(1), *sig, 0);
        for (auto& k : out.kids)
            k = resolve_binders(k, inf);
        return out;
    }
};

} // namespace

Theory parse_theory(const std::string& text) {
    Lexer lex(text);
    lex.run();
    Parser p;
    p.toks = std::move(lex.tokens);
    p.allow_params = false;

    Theory theory;
    p.sig = &theory.signature;

    struct PendingAxiom {
        std::string name;
        std::vector<Parser::RawBinder> context;
        std::size_t start; // token index of the formula part
    };

    int axiom_counter = 0;
    p.skip_newlines();
    while (p.peek().kind != Token::Kind::End) {
        if (p.at_keyword("sort")) {
            p.get();
            theory.signature.sorts.push_back(p.expect_ident("a sort name"));
        } else if (p.at_keyword("rel")) {
            p.get();
            RelationDecl r;
            r.name = p.expect_ident("a relation name");
            p.expect_sym("(");
            if (!p.at_sym(")")) {
                r.arity.push_back(p.expect_ident("a sort"));
                while (p.accept_sym(","))
                    r.arity.push_back(p.expect_ident("a sort"));
            }
            p.expect_sym(")");
            theory.signature.relations.push_back(std::move(r));
        } else if (p.at_keyword("fun")) {
            p.get();
            FunctionDecl f;
            f.name = p.expect_ident("a function name");
            p.expect_sym("(");
            if (!p.at_sym(")")) {
                f.args.push_back(p.expect_ident("a sort"));
                while (p.accept_sym(","))
                    f.args.push_back(p.expect_ident("a sort"));
            }
            p.expect_sym(")");
            p.expect_sym(":");
            f.result = p.expect_ident("a sort");
            theory.signature.functions.push_back(std::move(f));
        } else if (p.at_keyword("axiom")) {
            p.get();
            ++axiom_counter;
            Sequent ax;
            ax.name = p.at_sym("[") ? "ax" + std::to_string(axiom_counter) : p.expect_ident("an axiom name");
            p.expect_sym("[");
            std::vector<Parser::RawBinder> ctx_raw;
            if (!p.at_sym("]")) {
                ctx_raw.push_back(p.parse_binder());
                while (p.accept_sym(","))
                    ctx_raw.push_back(p.parse_binder());
            }
            p.expect_sym("]");

            SortInference inf;
            Parser::Scope scope;
            for (const auto& b : ctx_raw) {
                scope.vars.emplace_back(b.name, "$c$" + b.name);
                if (!b.sort.empty())
                    inf.pin(inf.node("$c$" + b.name), b.sort, p.peek().line);
            }
            Formula premise = p.parse_formula_top(scope, inf);
            p.expect_sym("=>");
            Formula conclusion = p.parse_formula_top(scope, inf);

            for (const auto& b : ctx_raw) {
                std::string s = !b.sort.empty() ? b.sort : inf.resolved("$c$" + b.name, theory.signature, 0);
                ax.context.vars.emplace_back(b.name, s);
            }
            ax.premise = p.resolve_binders(premise, inf);
            ax.conclusion = p.resolve_binders(conclusion, inf);
            theory.axioms.push_back(std::move(ax));
        } else if (p.at_keyword("scheme")) {
            p.get();
            Scheme sch;
            sch.name = p.expect_ident("a scheme name");
            if (!p.at_keyword("atleast"))
                p.fail("expected 'atleast'");
            p.get();
            sch.sort = p.expect_ident("a sort");
            if (!p.at_keyword("via"))
                p.fail("expected 'via'");
            p.get();
            p.expect_sym("[");
            sch.var_a = p.expect_ident("a variable");
            p.expect_sym(",");
            sch.var_b = p.expect_ident("a variable");
            p.expect_sym("]");
            SortInference inf;
            inf.pin(inf.node("$c$" + sch.var_a), sch.sort, p.peek().line);
            inf.pin(inf.node("$c$" + sch.var_b), sch.sort, p.peek().line);
            Parser::Scope scope;
            scope.vars = {{sch.var_a, "$c$" + sch.var_a}, {sch.var_b, "$c$" + sch.var_b}};
            Formula pf = p.parse_formula_top(scope, inf);
            sch.pair_formula = p.resolve_binders(pf, inf);
            if (!p.at_keyword("bound"))
                p.fail("expected 'bound'");
            p.get();
            std::string b = p.expect_ident("a bound");
            try {
                sch.bound = std::stoi(b);
            } catch (...) {
                p.fail("expected a numeric bound");
            }
            theory.schemes.push_back(std::move(sch));
        } else {
            p.fail("expected a declaration (sort/rel/fun/axiom/scheme)");
        }
        if (p.peek().kind != Token::Kind::End)
            p.expect_sym("\n");
        p.skip_newlines();
    }

    validate_theory(theory);
    return theory;
}

Formula parse_formula(const std::string& text, const Context& ctx, const Signature& sig) {
    Lexer lex(text);
    lex.run();
    Parser p;
    p.toks = std::move(lex.tokens);
    p.sig = &sig;
    p.allow_params = true;

    SortInference inf;
    Parser::Scope scope;
    for (const auto& [v, s] : ctx.vars) {
        scope.vars.emplace_back(v, "$c$" + v);
        inf.pin(inf.node("$c$" + v), s, 0);
    }
    p.skip_newlines();
    Formula f = p.parse_formula_top(scope, inf);
    p.skip_newlines();
    if (p.peek().kind != Token::Kind::End)
        p.fail("trailing input after formula");
    return p.resolve_binders(f, inf);
}

// ---------------------------------------------------------------------------
// relationalize

namespace {

std::string graph_relation_name(const std::string& fun, const Signature& out_sig) {
    std::string base = fun;
    base[0] = char(std::toupper(static_cast<unsigned char>(base[0])));
    std::string name = base;
    while (out_sig.relation(name) || out_sig.sort_index(name) >= 0)
        name += "_";
    return name;
}

struct Flattener {
    const Signature& in_sig;
    const std::map<std::string, std::string>& graph_names;
    std::set<std::string> used_names;
    int counter = 0;

    std::string fresh() {
        std::string n;
        do {
            n = "v" + std::to_string(counter++);
        } while (used_names.count(n));
        used_names.insert(n);
        return n;
    }

    // Rewrites t into a Var/Param term, emitting graph atoms for every
    // application and recording the introduced existentials.
    Term flatten_term(const Term& t, std::vector<Formula>& atoms,
                      std::vector<std::pair<std::string, std::string>>& binders) {
        if (t.kind != Term::Kind::App)
            return t;
        const FunctionDecl* f = in_sig.function(t.name);
        std::vector<Term> args;
        for (const auto& a : t.args)
            args.push_back(flatten_term(a, atoms, binders));
        std::string v = fresh();
        binders.emplace_back(v, f->result);
        args.push_back(Term::var(v));
        atoms.push_back(Formula::rel_atom(graph_names.at(t.name), std::move(args)));
        return Term::var(v);
    }

    Formula flatten(const Formula& f) {
        switch (f.kind) {
        case Formula::Kind::RelAtom:
        case Formula::Kind::Equal: {
            if (!f.has_app_terms())
                return f;
            std::vector<Formula> atoms;
            std::vector<std::pair<std::string, std::string>> binders;
            Formula atom = f;
            if (f.kind == Formula::Kind::Equal && f.terms[0].kind == Term::Kind::App) {
                // F(args, rhs) replaces the equality itself.
                Term rhs = flatten_term(f.terms[1], atoms, binders);
                const Term& lhs = f.terms[0];
                const FunctionDecl* fd = in_sig.function(lhs.name);
                (void)fd;
                std::vector<Term> args;
                for (const auto& a : lhs.args)
                    args.push_back(flatten_term(a, atoms, binders));
                args.push_back(std::move(rhs));
                atom = Formula::rel_atom(graph_names.at(lhs.name), std::move(args));
            } else {
                for (auto& t : atom.terms)
                    t = flatten_term(t, atoms, binders);
            }
            atoms.push_back(std::move(atom));
            return Formula::exists(std::move(binders), Formula::conj(std::move(atoms)));
        }
        default: {
            Formula out = f;
            for (auto& k : out.kids)
                k = flatten(k);
            return out;
        }
        }
    }
};

std::set<std::string> names_in_sequent(const Sequent& s) {
    std::set<std::string> out;
    for (const auto& [v, srt] : s.context.vars)
        out.insert(v);
    collect_all_names(s.premise, out);
    collect_all_names(s.conclusion, out);
    return out;
}

} // namespace

Theory relationalize(const Theory& t) {
    validate_theory(t);
    Theory out;
    out.signature.sorts = t.signature.sorts;
    out.signature.relations = t.signature.relations;

    std::map<std::string, std::string> graph_names;
    for (const auto& f : t.signature.functions) {
        std::string name = graph_relation_name(f.name, out.signature);
        std::vector<std::string> arity = f.args;
        arity.push_back(f.result);
        out.signature.relations.push_back({name, arity});
        graph_names[f.name] = name;
    }

    // Totality and functionality per function symbol.
    for (const auto& f : t.signature.functions) {
        const std::string& rel = graph_names.at(f.name);
        Context args_ctx;
        std::vector<Term> arg_terms;
        for (std::size_t i = 0; i < f.args.size(); ++i) {
            std::string v = "x" + std::to_string(i + 1);
            args_ctx.vars.emplace_back(v, f.args[i]);
            arg_terms.push_back(Term::var(v));
        }
        {
            Sequent total;
            total.name = rel + "_total";
            total.context = args_ctx;
            total.premise = Formula::truth();
            std::vector<Term> ts = arg_terms;
            ts.push_back(Term::var("y"));
            total.conclusion = Formula::exists({{"y", f.result}}, Formula::rel_atom(rel, std::move(ts)));
            out.axioms.push_back(std::move(total));
        }
        {
            Sequent functional;
            functional.name = rel + "_functional";
            functional.context = args_ctx;
            functional.context.vars.emplace_back("y", f.result);
            functional.context.vars.emplace_back("y'", f.result);
            std::vector<Term> t1 = arg_terms;
            t1.push_back(Term::var("y"));
            std::vector<Term> t2 = arg_terms;
            t2.push_back(Term::var("y'"));
            functional.premise = Formula::conj({Formula::rel_atom(rel, std::move(t1)),
                                                Formula::rel_atom(rel, std::move(t2))});
            functional.conclusion = Formula::equal(Term::var("y"), Term::var("y'"));
            out.axioms.push_back(std::move(functional));
        }
    }

    for (const auto& ax : t.axioms) {
        Flattener fl{t.signature, graph_names, names_in_sequent(ax), 0};
        Sequent nx = ax;
        nx.premise = fl.flatten(ax.premise);
        nx.conclusion = fl.flatten(ax.conclusion);
        out.axioms.push_back(std::move(nx));
    }
    for (const auto& sch : t.schemes) {
        Flattener fl{t.signature, graph_names, {}, 0};
        Scheme ns = sch;
        ns.pair_formula = fl.flatten(sch.pair_formula);
        out.schemes.push_back(std::move(ns));
    }

    validate_theory(out);
    return out;
}

// ---------------------------------------------------------------------------
// morleyize

namespace {

struct Morleyizer {
    const Signature& in_sig;
    Signature out_sig;

    // one relation per normalised subformula that needs a classical negation
    struct NegRelation {
        std::string name;
        Formula positive; // translated, parameter-free formula it negates
        Context context;
    };
    std::vector<NegRelation> added;
    std::map<std::string, std::string> atom_negations;  // relation name -> N relation
    std::map<std::string, std::string> eq_negations;    // sort -> N relation
    int counter = 0;

    std::string fresh_rel_name(std::string base) {
        while (out_sig.relation(base))
            base += "_";
        return base;
    }

    std::string neg_of_atom(const std::string& rel) {
        auto it = atom_negations.find(rel);
        if (it != atom_negations.end())
            return it->second;
        const RelationDecl* r = out_sig.relation(rel);
        std::string name = fresh_rel_name("N_" + rel);
        out_sig.relations.push_back({name, r->arity});
        atom_negations[rel] = name;

        Context ctx;
        std::vector<Term> ts;
        for (std::size_t i = 0; i < r->arity.size(); ++i) {
            ctx.vars.emplace_back("x" + std::to_string(i + 1), r->arity[i]);
            ts.push_back(Term::var("x" + std::to_string(i + 1)));
        }
        added.push_back({name, Formula::rel_atom(rel, ts), ctx});
        return name;
    }

    std::string neg_of_equality(const std::string& sort) {
        auto it = eq_negations.find(sort);
        if (it != eq_negations.end())
            return it->second;
        std::string base = in_sig.sorts.size() == 1 ? "N_eq" : "N_eq_" + sort;
        std::string name = fresh_rel_name(base);
        out_sig.relations.push_back({name, {sort, sort}});
        eq_negations[sort] = name;

        Context ctx;
        ctx.vars = {{"x1", sort}, {"x2", sort}};
        added.push_back({name, Formula::equal(Term::var("x1"), Term::var("x2")), ctx});
        return name;
    }

    // Negation of a positive (already translated) existential: one fresh
    // relation keyed by its alpha-canonical form.
    std::string neg_of_positive(const Formula& positive, const Context& ctx) {
        Formula canon = alpha_canonical(positive);
        for (const auto& nr : added)
            if (nr.context.sort_profile() == ctx.sort_profile()) {
                std::map<std::string, Term> renaming;
                for (std::size_t i = 0; i < ctx.vars.size(); ++i)
                    renaming[ctx.vars[i].first] = Term::var(nr.context.vars[i].first);
                if (alpha_canonical(substitute(positive, renaming)) == alpha_canonical(nr.positive))
                    return nr.name;
            }
        (void)canon;
        std::string name = fresh_rel_name("N_" + std::to_string(++counter));
        out_sig.relations.push_back({name, ctx.sort_profile()});
        added.push_back({name, positive, ctx});
        return name;
    }

    std::string sort_of_term(const Term& t, const std::map<std::string, std::string>& vars) const {
        // morleyize input is relational, so only Var terms occur
        return vars.at(t.name);
    }

    Formula positive(const Formula& f, std::map<std::string, std::string>& vars) {
        switch (f.kind) {
        case Formula::Kind::Truth:
        case Formula::Kind::Falsity:
        case Formula::Kind::RelAtom:
        case Formula::Kind::Equal:
            return f;
        case Formula::Kind::And: {
            std::vector<Formula> ks;
            for (const auto& k : f.kids)
                ks.push_back(positive(k, vars));
            return Formula::conj(std::move(ks));
        }
        case Formula::Kind::Or: {
            std::vector<Formula> ks;
            for (const auto& k : f.kids)
                ks.push_back(positive(k, vars));
            return Formula::disj(std::move(ks));
        }
        case Formula::Kind::Not:
            return negative(f.kids[0], vars);
        case Formula::Kind::Implies:
            return Formula::disj({negative(f.kids[0], vars), positive(f.kids[1], vars)});
        case Formula::Kind::Exists: {
            auto inner = vars;
            for (const auto& [v, s] : f.binders)
                inner[v] = s;
            return Formula::exists(f.binders, positive(f.kids[0], inner));
        }
        case Formula::Kind::Forall: {
            // forall y. f == ~exists y. ~f
            auto inner = vars;
            for (const auto& [v, s] : f.binders)
                inner[v] = s;
            Formula ex = Formula::exists(f.binders, negative(f.kids[0], inner));
            return negate_positive(ex, vars);
        }
        }
        return f;
    }

    Formula negative(const Formula& f, std::map<std::string, std::string>& vars) {
        switch (f.kind) {
        case Formula::Kind::Truth:
            return Formula::falsity();
        case Formula::Kind::Falsity:
            return Formula::truth();
        case Formula::Kind::RelAtom:
            return Formula::rel_atom(neg_of_atom(f.rel), f.terms);
        case Formula::Kind::Equal: {
            std::string sort = sort_of_term(f.terms[0], vars);
            return Formula::rel_atom(neg_of_equality(sort), f.terms);
        }
        case Formula::Kind::And: {
            std::vector<Formula> ks;
            for (const auto& k : f.kids)
                ks.push_back(negative(k, vars));
            return Formula::disj(std::move(ks));
        }
        case Formula::Kind::Or: {
            std::vector<Formula> ks;
            for (const auto& k : f.kids)
                ks.push_back(negative(k, vars));
            return Formula::conj(std::move(ks));
        }
        case Formula::Kind::Not:
            return positive(f.kids[0], vars);
        case Formula::Kind::Implies:
            return Formula::conj({positive(f.kids[0], vars), negative(f.kids[1], vars)});
        case Formula::Kind::Exists: {
            auto inner = vars;
            for (const auto& [v, s] : f.binders)
                inner[v] = s;
            Formula ex = Formula::exists(f.binders, positive(f.kids[0], inner));
            return negate_positive(ex, vars);
        }
        case Formula::Kind::Forall: {
            // ~forall y. f == exists y. ~f
            auto inner = vars;
            for (const auto& [v, s] : f.binders)
                inner[v] = s;
            return Formula::exists(f.binders, negative(f.kids[0], inner));
        }
        }
        return f;
    }

    // Replaces a positive geometric formula by the relation naming its
    // negation, applied to the formula's free variables.
    Formula negate_positive(const Formula& positive_formula, const std::map<std::string, std::string>& vars) {
        std::set<std::string> frees;
        free_vars(positive_formula, frees);
        Context ctx;
        std::vector<Term> args;
        for (const auto& v : frees) { // std::set iteration = deterministic name order
            ctx.vars.emplace_back(v, vars.at(v));
            args.push_back(Term::var(v));
        }
        std::string rel = neg_of_positive(positive_formula, ctx);
        return Formula::rel_atom(rel, std::move(args));
    }

    static void free_vars(const Term& t, std::set<std::string>& out) {
        if (t.kind == Term::Kind::Var)
            out.insert(t.name);
    }

    static void free_vars(const Formula& f, std::set<std::string>& out) {
        switch (f.kind) {
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            std::set<std::string> inner;
            free_vars(f.kids[0], inner);
            for (const auto& [v, s] : f.binders)
                inner.erase(v);
            out.insert(inner.begin(), inner.end());
            return;
        }
        default:
            for (const auto& t : f.terms)
                free_vars(t, out);
            for (const auto& k : f.kids)
                free_vars(k, out);
        }
    }
};

// Hoist prenex universals in a conclusion into the sequent context and turn a
// top-level implication in the conclusion of a T-premise sequent into a
// premise.  Both shrink the set of negations Morleyization has to name.
Sequent normalize_axiom(Sequent ax) {
    bool changed = true;
    while (changed) {
        changed = false;
        if (ax.conclusion.kind == Formula::Kind::Forall) {
            std::set<std::string> used;
            for (const auto& [v, s] : ax.context.vars)
                used.insert(v);
            collect_all_names(ax.premise, used);
            Formula body = ax.conclusion.kids[0];
            std::map<std::string, Term> renaming;
            for (const auto& [v, s] : ax.conclusion.binders) {
                std::string name = v;
                if (used.count(name)) {
                    name = fresh_name(v, used);
                    renaming[v] = Term::var(name);
                }
                used.insert(name);
                ax.context.vars.emplace_back(name, s);
            }
            ax.conclusion = renaming.empty() ? std::move(body) : substitute(body, renaming);
            changed = true;
        } else if (ax.conclusion.kind == Formula::Kind::Implies && ax.premise == Formula::truth()) {
            ax.premise = ax.conclusion.kids[0];
            ax.conclusion = ax.conclusion.kids[1];
            changed = true;
        }
    }
    return ax;
}

} // namespace

Theory morleyize(const Theory& t) {
    validate_theory(t);
    if (!t.schemes.empty())
        validation_error("morleyize rejects axiom schemes (infinitary input)");
    if (!t.signature.functions.empty())
        validation_error("morleyize expects a relational signature; run relationalize first");

    Morleyizer mz{t.signature, t.signature, {}, {}, {}, 0};

    Theory out;
    for (const auto& ax : t.axioms) {
        Sequent nx = normalize_axiom(ax);
        std::map<std::string, std::string> vars;
        for (const auto& [v, s] : nx.context.vars)
            vars[v] = s;
        nx.premise = mz.positive(nx.premise, vars);
        nx.conclusion = mz.positive(nx.conclusion, vars);
        out.axioms.push_back(std::move(nx));
    }

    // Two axioms per added relation: N is disjoint from and covers the
    // complement of the formula it negates.
    for (const auto& nr : mz.added) {
        std::vector<Term> args;
        for (const auto& [v, s] : nr.context.vars)
            args.push_back(Term::var(v));
        Formula n_atom = Formula::rel_atom(nr.name, args);
        Sequent excl;
        excl.name = nr.name + "_excl";
        excl.context = nr.context;
        excl.premise = Formula::conj({nr.positive, n_atom});
        excl.conclusion = Formula::falsity();
        out.axioms.push_back(std::move(excl));

        Sequent total;
        total.name = nr.name + "_total";
        total.context = nr.context;
        total.premise = Formula::truth();
        total.conclusion = Formula::disj({nr.positive, n_atom});
        out.axioms.push_back(std::move(total));
    }

    out.signature = std::move(mz.out_sig);
    validate_theory(out);
    for (const auto& ax : out.axioms) {
        if (!ax.premise.is_geometric() || !ax.conclusion.is_geometric())
            validation_error("internal: morleyize produced a non-geometric axiom " + ax.name);
    }
    return out;
}

} // namespace mgt
