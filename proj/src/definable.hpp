#pragma once

#include "groupoid.hpp"

#include <set>
#include <vector>

namespace mgt {

// One tuple inside one object of a fixed groupoid.
struct PointedStructure {
    int object = -1;
    std::vector<int> tuple;

    auto operator<=>(const PointedStructure&) const = default;
};

// Carrier of [[phi, ctx]]_X: the set of pointed structures satisfying a
// formula, with the context fixing the sort profile.
struct DefinableSet {
    Context ctx;
    std::set<PointedStructure> members;

    bool operator==(const DefinableSet&) const = default;
};

// sort indices of a context against a signature
std::vector<int> context_sorts(const Signature& sig, const Context& ctx);

// Parameter-free definable over all objects; rejects formulas with
// parameters.
DefinableSet definable(const Groupoid& g, const Formula& f, const Context& ctx);

// Definable with parameters: members drawn only from objects interpreting
// every parameter of f.
DefinableSet definable_with_params(const Groupoid& g, const Indexing& ix, const Formula& f, const Context& ctx);

// All tuples of the context's profile over all objects.
DefinableSet full_definable(const Groupoid& g, const Context& ctx);

// The seed definable [[x = m]]: one member per object interpreting the whole
// parameter tuple.
DefinableSet params_definable(const Groupoid& g, const Indexing& ix, const std::vector<std::string>& params);

// Image of p under an arrow with source p.object.
PointedStructure act(const Groupoid& g, const Context& ctx, const PointedStructure& p, const Morphism& arrow);

// Closure of d under the arrow action: the smallest stable superset.
DefinableSet orbit(const Groupoid& g, const DefinableSet& d);

bool is_stable(const Groupoid& g, const DefinableSet& d);

// /\_{m_i = m_j} x_i = x_j over the names of the tuple (syntactic equality);
// the context carries the parameter sorts.
std::pair<Context, Formula> upper_bound_formula(const Signature& sig, const Indexing& ix,
                                                const std::vector<std::string>& params);

// Saturation oracle: every parameter-free-definable subset of the full
// definable reachable with at most max_extra_vars quantified variables.
// basis holds the projected conjunctive-query extensions; family is their
// union closure, capped.
struct SaturationResult {
    std::vector<DefinableSet> basis;
    std::vector<DefinableSet> family;
    bool truncated = false;
    int max_extra_vars = 0;
};

// build_family=false leaves `family` empty (the basis plus family_contains
// decides membership without materialising the union closure).
SaturationResult saturate_definables(const Groupoid& g, const Context& ctx, int max_extra_vars,
                                     std::size_t cap = std::size_t(1) << 16, bool build_family = true);

// Membership in the (possibly huge) union closure, decided from the basis:
// s is a union of basis sets iff the union of basis subsets of s equals s.
bool family_contains(const std::vector<DefinableSet>& basis, const DefinableSet& s);

} // namespace mgt
