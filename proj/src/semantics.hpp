#pragma once

#include "syntax.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace mgt {

// Finite interpretation of a relational signature.  Carriers and relations
// are index-based internally; names only appear at the JSON boundary.
struct Structure {
    std::string id;
    std::vector<std::vector<std::string>> carriers;      // per sort index
    std::vector<std::set<std::vector<int>>> relations;   // per relation index

    std::vector<std::map<std::string, int>> elem_index;  // built by finalize

    void finalize(const Signature& sig);                 // validates and builds indexes
    int elem(int sort, const std::string& name) const;
    std::size_t carrier_total() const;
};

// Total structure-preserving map; per-sort image of every source element.
struct Morphism {
    std::string src, dst;
    std::vector<std::vector<int>> map; // map[sort][src elem] = dst elem

    std::vector<int> apply(std::span<const int> sorts, std::span<const int> elems) const;
    bool operator==(const Morphism&) const = default;
    bool operator<(const Morphism& o) const;
};

// Assignment of context variables (parallel to Context.vars) plus an optional
// parameter environment: parameter name -> (sort index, element).
using ParamEnv = std::map<std::string, std::pair<int, int>>;

bool eval(const Signature& sig, const Formula& f, const Context& ctx, const Structure& m,
          std::span<const int> assignment, const ParamEnv* params = nullptr);

// All context assignments satisfying f, in lexicographic order.
std::vector<std::vector<int>> satisfying_assignments(const Signature& sig, const Formula& f, const Context& ctx,
                                                     const Structure& m, const ParamEnv* params = nullptr);

bool satisfies_sequent(const Signature& sig, const Structure& m, const Sequent& s);

struct TheoryCheck {
    bool ok = true;
    std::vector<std::string> failing;     // axiom/scheme-instance names
    bool schemes_truncated = false;       // requested bound exceeded a declared scheme bound
    bool has_schemes = false;
};

TheoryCheck check_theory(const Structure& m, const Theory& t, int scheme_bound);

// Complete homomorphism enumeration by backtracking with forward pruning;
// results in lexicographic order of the assignment vector.
std::vector<Morphism> enumerate_homs(const Signature& sig, const Structure& m, const Structure& n);
std::vector<Morphism> enumerate_isos(const Signature& sig, const Structure& m, const Structure& n);

bool is_isomorphism(const Signature& sig, const Structure& m, const Structure& n, const Morphism& h);

// Why h fails to be an isomorphism m -> n, or nullopt when it is one.
std::optional<std::string> iso_violation(const Signature& sig, const Structure& m, const Structure& n,
                                         const Morphism& h);

Morphism identity_morphism(const Structure& m);
Morphism compose(const Morphism& f, const Morphism& g); // g after f
Morphism inverse(const Morphism& f);                    // f must be bijective

// Typed point of a structure: sorts[i] is the sort index of elems[i].
struct TypedTuple {
    std::vector<int> sorts;
    std::vector<int> elems;
};

// True iff some homomorphism src -> dst maps p pointwise to q.
bool hom_leq(const Signature& sig, const Structure& src, const TypedTuple& p, const Structure& dst,
             const TypedTuple& q);

// Existential positive diagram of (m, point) in context x1..xk; satisfied at
// q exactly when hom_leq holds.
Formula canonical_query(const Signature& sig, const Structure& m, const TypedTuple& point);

Context canonical_context(const Signature& sig, const TypedTuple& point);

// Backtracking search for a total automorphism extending from[i] |-> to[i];
// rejects inputs that are not partial isomorphisms.
std::optional<Morphism> extend_partial_iso(const Signature& sig, const Structure& m, const TypedTuple& from,
                                           const TypedTuple& to);

// Is from[i] |-> to[i] a partial isomorphism of m (injective, sort-aligned,
// preserving and reflecting atoms on its domain)?  On failure returns a
// description of the violation.
std::optional<std::string> partial_iso_violation(const Signature& sig, const Structure& m, const TypedTuple& from,
                                                 const TypedTuple& to);

} // namespace mgt
