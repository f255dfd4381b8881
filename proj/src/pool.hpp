#pragma once

#include "semantics.hpp"
#include "syntax.hpp"

#include <vector>

namespace mgt {

// Bounded, deterministic formula pools.  These feed the semantic proxies:
// n-conservativity, axiom synthesis, isolating-sentence search.
struct PoolOptions {
    int max_context_len = 2; // contexts of length 0..max over sorted sort profiles
    int max_conj = 2;        // conjunctions of up to this many atoms
    int max_disj = 2;        // disjunctions of up to this many atoms
    int max_exists = 1;      // existential closures adding up to this many variables
};

// All relation atoms over the context's variables plus the equalities between
// same-sorted variables.
std::vector<Formula> atom_pool(const Signature& sig, const Context& ctx);

// Truth, falsity, atoms, bounded conjunctions/disjunctions of atoms, and
// existential closures of atom conjunctions using the extra variables.
std::vector<Formula> formula_pool(const Signature& sig, const Context& ctx, const PoolOptions& opt);

// Contexts x1..xk over ascending sort profiles, lengths 0..max_len.
std::vector<Context> context_pool(const Signature& sig, int max_len);

// Exhaustive enumeration of structures with per-sort carriers of size at most
// `size_bound`; throws a Bound error past `cap` enumerated candidates.
std::vector<Structure> enumerate_structures(const Signature& sig, int size_bound,
                                            std::size_t cap = 1u << 20);

} // namespace mgt
