#pragma once

#include "definable.hpp"
#include "elimination.hpp"
#include "groupoid.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mgt {

// Basic open of the logical topology on objects: a sentence with parameters
// and its extension.  Opens with equal extensions are merged, keeping every
// defining sentence.
struct ObjectOpen {
    std::vector<std::string> sentences; // printed sentences-with-parameters
    std::set<int> extension;            // object indices
};

struct ObjectBasis {
    std::vector<ObjectOpen> opens;
    int max_params = 0;
    int quant_bound = 0;
    int conj_rounds = 0;
};

// Atomic sentences with parameters (relation atoms over parameter tuples,
// equalities, and their existential closures up to quant_bound variables),
// closed under pairwise intersection conj_rounds times.
ObjectBasis object_basis(const Groupoid& g, const Indexing& ix, int max_params, int quant_bound = 1,
                         int conj_rounds = 1);

// Basic open of the logical topology on arrows: source sentence, finite
// parameter mapping, target sentence.
struct ArrowOpen {
    std::string source_sentence; // "true" when absent
    std::string target_sentence;
    std::vector<std::pair<std::string, std::string>> mapping; // b_i |-> c_i
    std::set<int> extension;                                  // arrow indices
};

struct ArrowBasisOptions {
    int max_map_len = 1;         // length of the mapped parameter tuple
    bool side_sentences = false; // also build triples with atomic phi/psi parts
    std::size_t cap = 200000;    // generation guard
};

struct ArrowBasis {
    std::vector<ArrowOpen> opens;
    ArrowBasisOptions options;
};

ArrowBasis arrow_basis(const Groupoid& g, const Indexing& ix, const ArrowBasisOptions& opt = {});

struct OpenMapReport {
    bool open = true;
    std::optional<std::string> failing_open; // description of a basic open whose t-image is not open
    std::optional<std::string> failing_object;
};

// Does t send every arrow basic open to a union of object basic opens?
OpenMapReport is_open_map_t(const Groupoid& g, const ObjectBasis& objects, const ArrowBasis& arrows);

// Distinct objects separated by some basic open.
bool is_T0(const Groupoid& g, const ObjectBasis& basis);

// The lattice of stable opens of [[true, ctx]]: basis opens are the orbits of
// [[x = a /\ parameter diagram of O]] for every pointed object (O, a), which
// generate every stable open once parameter tuples may reach carrier size.
struct StableOpenLattice {
    Context ctx;
    int param_bound = 0;                // max parameters used by a basic open
    std::vector<DefinableSet> basis;    // orbits of basic opens, deduplicated
    std::vector<DefinableSet> family;   // union closure (capped)
    bool truncated = false;
};

// build_family=false leaves `family` empty; the basis still generates every
// stable open by unions.
StableOpenLattice stable_open_lattice(const Groupoid& g, const Indexing& ix, const Context& ctx,
                                      std::size_t cap = std::size_t(1) << 16, bool build_family = true);

// Exact equality of two union-closed families given by bases.
bool families_equal(const std::vector<DefinableSet>& basis_a, const std::vector<DefinableSet>& basis_b);

// All plain isomorphisms M -> N agreeing on every interpreted parameter
// tuple of length <= tuple_bound with some arrow of the groupoid; with the
// object-disjoint indexing and a bound at carrier size this is Hom_X(M, N).
std::vector<Morphism> hom_space_closure(const Groupoid& g, const Indexing& ix, int m, int n, int tuple_bound);

} // namespace mgt
