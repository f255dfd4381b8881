#pragma once

#include "semantics.hpp"
#include "syntax.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mgt {

// Finite model groupoid: structures plus a composition-closed set of
// isomorphisms.  Objects keep their identity by id; isomorphic copies are
// distinct objects.
struct Groupoid {
    Signature sig;
    std::vector<Structure> objects;
    std::vector<Morphism> arrows; // sorted, deduplicated

    std::map<std::string, int> object_index;     // built by reindex_arrows
    std::vector<std::vector<int>> arrows_from;   // per object: arrow indices
    std::vector<std::vector<int>> arrows_into;   // per object: arrow indices

    int object_of(const std::string& id) const;
    const Structure& object(int i) const { return objects[i]; }
    void rebuild_index();
};

// Parameter interpretation: a partial surjection from the parameter set onto
// every object's carrier.
struct Indexing {
    std::vector<std::vector<std::string>> parameters;    // per sort
    std::vector<std::vector<std::vector<int>>> interp;   // [obj][sort][param] = elem or -1

    std::map<std::string, std::pair<int, int>> param_pos; // name -> (sort, index)

    void finalize(const Groupoid& g); // validates and builds param_pos
    bool interprets(int obj, int sort, int param) const { return interp[obj][sort][param] >= 0; }
    ParamEnv param_env(const Groupoid& g, int obj) const;
    std::optional<std::pair<int, int>> find(const std::string& name) const;
};

// Closure/iso validation; with auto_complete the missing identities,
// inverses and composites are generated instead of reported.
Groupoid validate_groupoid(Groupoid g, bool auto_complete);

// Same objects, all isomorphisms.
Groupoid etale_completion(const Groupoid& g);

struct EtaleReport {
    bool complete = true;
    std::string missing; // description of one missing isomorphism
};

EtaleReport check_etale_complete(const Groupoid& g);

// Each object indexed by its own elements, objects kept disjoint: parameter
// names are "<obj>@<elem>", each interpreted only in its object.
Indexing trivial_indexing(const Groupoid& g);

// Each object indexed by its own elements with sharing: the parameter set is
// the union of the carrier names, and a parameter is interpreted (as itself)
// in every object whose carrier contains that name.  This is the natural
// indexing for groupoids of substructures of a common universe.
Indexing carrier_indexing(const Groupoid& g);

// Validates a caller-supplied indexing (maps[obj] : parameter -> element name).
Indexing shared_indexing(const Groupoid& g, const std::vector<std::vector<std::string>>& parameters,
                         const std::vector<std::map<std::string, std::string>>& maps);

// New interpretation = old after sigma (sigma maps parameter names to
// parameter names); surjectivity revalidated.
Indexing reindex(const Groupoid& g, const Indexing& ix, const std::map<std::string, std::string>& sigma);

// Finite Forssell-style groupoid: every subquotient of the parameter set
// satisfying t (at the scheme bound), etale complete, with the induced
// indexing.  Object count above the cap is an error reporting the count.
std::pair<Groupoid, Indexing> maximal_groupoid(const Theory& t,
                                               const std::vector<std::vector<std::string>>& parameters,
                                               int scheme_bound, std::size_t object_cap = 5000);

// Disjoint union of automorphism subgroups; arrow sets must be subgroups.
Groupoid bouquet(const Signature& sig,
                 const std::vector<std::pair<Structure, std::vector<Morphism>>>& components);

// -- JSON document ------------------------------------------------------------

struct GroupoidDocument {
    Groupoid groupoid;
    Indexing indexing;
    bool had_indexing = false; // document supplied one (else trivial indexing)
};

GroupoidDocument load_groupoid_json(const std::string& text);
std::string groupoid_to_json(const Groupoid& g, const Indexing& ix);

} // namespace mgt
