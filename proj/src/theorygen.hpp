#pragma once

#include "definable.hpp"
#include "elimination.hpp"
#include "groupoid.hpp"
#include "pool.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mgt {

// Base signature extended by one relation R__m1_m2... per ordered parameter
// tuple up to the bound.
struct ExtendedSignature {
    Signature sig;
    std::size_t base_relations = 0;
    std::vector<std::vector<std::string>> tuples; // parallel to the appended relations
    int tuple_bound = 0;
};

ExtendedSignature extend_signature(const Groupoid& g, const Indexing& ix, int tuple_bound);

// Same objects and arrows over the extended signature; R_m interpreted as
// the orbit fiber of [[x = m]].  Arrows stay isomorphisms because orbits are
// stable (revalidated).
std::pair<Groupoid, Indexing> interpret_extension(const Groupoid& g, const Indexing& ix,
                                                  const ExtendedSignature& ext);

// All pool sequents satisfied by every object, with redundant ones pruned:
// syntactic trivia, duplicate extension pairs over the objects, and sequents
// reachable by chaining kept ones.
Theory theory_of_groupoid(const Groupoid& g, const PoolOptions& pool);

// The canonical query of the point, returned iff it isolates the point's
// bounded type: every satisfier has the same saturated-family memberships,
// and the extension is inside or disjoint from every family member.
std::optional<Formula> minimal_formula(const Groupoid& g, int object, const TypedTuple& point,
                                       const SaturationResult& sat);

struct UltraReport {
    bool ultrahomogeneous = true;
    // first partial isomorphism with no total extension, as element names
    std::vector<std::string> from, to;
};

UltraReport is_ultrahomogeneous(const Signature& sig, const Structure& m);

struct DecidabilityWitness {
    DefinableSet complement;     // C = union over m != m' of [[x = m & x' = m']]
    bool stable = false;
    bool disjoint_from_diagonal = false;
    bool covers_with_diagonal = false;
    bool ok = false;             // all three conditions
    std::optional<Formula> formula; // parameter-free equivalent, when it exists
};

DecidabilityWitness decidability_witness(const Groupoid& g, const Indexing& ix, const Context& ctx);

struct BouquetComponent {
    std::vector<int> objects;
    std::size_t arrows = 0;
    std::string isolating_sentence;
};

struct BouquetDecomposition {
    bool ok = false;
    std::vector<BouquetComponent> components;
    std::string failure; // cross isomorphisms, or "pool exhausted" with the component
};

// Connected components with isolating sentences drawn from the pool first
// and then from instantiated schemes.
BouquetDecomposition bouquet_decomposition(const Groupoid& g, const std::vector<Formula>& sentence_pool,
                                           const std::vector<Scheme>& schemes, int scheme_bound);

} // namespace mgt
