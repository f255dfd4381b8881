#pragma once

#include "definable.hpp"
#include "pool.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mgt {

// Cache of the complete hom sets between all object pairs; the up-closure
// checks walk hom images instead of re-running searches.
class HomCache {
public:
    explicit HomCache(const Groupoid& g);

    const std::vector<Morphism>& homs(int src, int dst) const { return homs_[src][dst]; }
    const Groupoid& groupoid() const { return g_; }

    // is q a hom-image of p?
    bool leq(const std::vector<int>& sorts, const PointedStructure& p, const PointedStructure& q) const;

private:
    const Groupoid& g_;
    std::vector<std::vector<std::vector<Morphism>>> homs_;
};

struct ElimWitness {
    PointedStructure in_orbit;
    PointedStructure outside; // hom-above in_orbit, not in the orbit
};

struct TupleEntry {
    std::vector<std::string> tuple;
    bool eliminated = false;
    std::optional<Formula> formula; // on yes: extension equals the orbit
    Context formula_ctx;
    std::optional<ElimWitness> witness; // on no
    std::size_t orbit_size = 0;
};

struct ElimVerdict {
    bool overall = true;
    int max_tuple_len = 0;
    std::vector<TupleEntry> entries;
    std::size_t empty_tuples = 0; // canonical tuples never co-interpreted (trivially yes)
};

// Orbit of [[x = m]] up-closed under the hom-preorder?  On yes synthesizes
// the disjunction of canonical queries of the hom-minimal orbit members; on
// no returns a witness pair.  verify_extension re-evaluates the synthesized
// formula and asserts it matches the orbit exactly.
TupleEntry eliminates_at_tuple(const Groupoid& g, const Indexing& ix, const HomCache& cache,
                               const std::vector<std::string>& tuple, bool verify_extension = false);

ElimVerdict eliminates_parameters(const Groupoid& g, const Indexing& ix, int max_tuple_len,
                                  bool verify_extensions = false);

// Parameter-free formula with extension exactly d, when one exists; the
// criterion is up-closure under the hom-preorder within the groupoid.
std::optional<Formula> is_pf_definable(const Groupoid& g, const DefinableSet& d);

struct Counterexample {
    std::string phi, psi;       // printed formulas
    std::string context;        // printed context
    std::string model;          // rendering of the violating structure
    std::vector<std::string> tuple;
};

struct ConservativityReport {
    bool objects_satisfy_theory = true;
    std::vector<std::string> failing_objects;
    bool conservative = true;
    int size_bound = 0;
    std::size_t entailments_checked = 0;
    std::size_t models_checked = 0;
    bool schemes_inconclusive = false;
    std::optional<Counterexample> counterexample;
};

// Semantic n-conservativity proxy: every pool containment that holds over
// the groupoid's objects must hold in every t-model of carrier size at most
// size_bound.
ConservativityReport conservative_at_level(const Groupoid& g, const Theory& t, const PoolOptions& pool,
                                           int size_bound, int scheme_bound);

} // namespace mgt
