#include "corpus.hpp"
#include <algorithm>
#include "util.hpp"
#include <random>

namespace mgt::corpus {

namespace {

// index of an element name in a fixed carrier list
int idx(const std::vector<std::string>& carrier, const std::string& name) {
    for (std::size_t i = 0; i < carrier.size(); ++i)
        if (carrier[i] == name)
            return int(i);
    return -1;
}

Structure field_structure(const std::string& id, const std::vector<std::string>& elems,
                          const std::vector<std::vector<std::string>>& add,
                          const std::vector<std::vector<std::string>>& mul) {
    Structure s;
    s.id = id;
    s.carriers = {elems};
    s.relations.resize(4);
    int n = int(elems.size());
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            s.relations[0].insert({a, b, idx(elems, add[a][b])});
            s.relations[1].insert({a, b, idx(elems, mul[a][b])});
        }
    s.relations[2].insert({idx(elems, "0")});
    s.relations[3].insert({idx(elems, "1")});
    s.finalize(ring_signature());
    return s;
}

} // namespace

Signature ring_signature() {
    Signature sig;
    sig.sorts = {"R"};
    sig.relations = {{"Add", {"R", "R", "R"}},
                     {"Mul", {"R", "R", "R"}},
                     {"Zero", {"R"}},
                     {"One", {"R"}}};
    return sig;
}

Structure gf2() {
    return field_structure("GF2", {"0", "1"},
                           {{"0", "1"}, {"1", "0"}},
                           {{"0", "0"}, {"0", "1"}});
}

Structure gf3() {
    return field_structure("GF3", {"0", "1", "2"},
                           {{"0", "1", "2"}, {"1", "2", "0"}, {"2", "0", "1"}},
                           {{"0", "0", "0"}, {"0", "1", "2"}, {"0", "2", "1"}});
}

Structure prefix_elements(Structure s, const Signature& sig, const std::string& prefix) {
    for (auto& carrier : s.carriers)
        for (auto& name : carrier)
            name = prefix + name;
    s.elem_index.clear();
    s.finalize(sig);
    return s;
}

Structure gf4() {
    // a = x, b = x+1 in GF(2)[x]/(x^2+x+1); addition is xor, the nonzero
    // elements form a cyclic group 1 -> a -> b of order 3
    return field_structure("GF4", {"0", "1", "a", "b"},
                           {{"0", "1", "a", "b"},
                            {"1", "0", "b", "a"},
                            {"a", "b", "0", "1"},
                            {"b", "a", "1", "0"}},
                           {{"0", "0", "0", "0"},
                            {"0", "1", "a", "b"},
                            {"0", "a", "b", "1"},
                            {"0", "b", "1", "a"}});
}

Signature graph_signature() {
    Signature sig;
    sig.sorts = {"V"};
    sig.relations = {{"E", {"V", "V"}}};
    return sig;
}

Structure complete_graph(const std::string& id, int n) {
    Structure s;
    s.id = id;
    s.carriers.resize(1);
    for (int i = 0; i < n; ++i)
        s.carriers[0].push_back(std::string(1, char('a' + i)));
    s.relations.resize(1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j)
                s.relations[0].insert({i, j});
    s.finalize(graph_signature());
    return s;
}

Structure p3() {
    Structure s;
    s.id = "P3";
    s.carriers = {{"a", "b", "c"}};
    s.relations.resize(1);
    s.relations[0] = {{0, 1}, {1, 0}, {1, 2}, {2, 1}};
    s.finalize(graph_signature());
    return s;
}

Signature neq_signature() {
    Signature sig;
    sig.sorts = {"V"};
    sig.relations = {{"Neq", {"V", "V"}}};
    return sig;
}

Structure neq_subset(const std::string& id, const std::vector<std::string>& elems) {
    Structure s;
    s.id = id;
    s.carriers = {elems};
    s.relations.resize(1);
    for (std::size_t i = 0; i < elems.size(); ++i)
        for (std::size_t j = 0; j < elems.size(); ++j)
            if (i != j)
                s.relations[0].insert({int(i), int(j)});
    s.finalize(neq_signature());
    return s;
}

Signature order_signature() {
    Signature sig;
    sig.sorts = {"V"};
    sig.relations = {{"Lt", {"V", "V"}}};
    return sig;
}

Structure linear_order(const std::string& id, const std::vector<std::string>& elems_in_order) {
    Structure s;
    s.id = id;
    std::vector<std::string> carrier = elems_in_order;
    std::sort(carrier.begin(), carrier.end());
    s.carriers = {carrier};
    s.relations.resize(1);
    for (std::size_t i = 0; i < elems_in_order.size(); ++i)
        for (std::size_t j = i + 1; j < elems_in_order.size(); ++j)
            s.relations[0].insert({idx(carrier, elems_in_order[i]), idx(carrier, elems_in_order[j])});
    s.finalize(order_signature());
    return s;
}

Signature bare_signature() {
    Signature sig;
    sig.sorts = {"V"};
    return sig;
}

Structure bare_set(const std::string& id, const std::vector<std::string>& elems) {
    Structure s;
    s.id = id;
    s.carriers = {elems};
    s.finalize(bare_signature());
    return s;
}

Theory decidable_theory() {
    return parse_theory("sort V\n"
                        "rel Neq(V, V)\n"
                        "axiom [x, x'] x = x' & Neq(x, x') => false\n"
                        "axiom [x, x'] true => x = x' | Neq(x, x')\n");
}

Groupoid etale_groupoid(const Signature& sig, std::vector<Structure> objects) {
    Groupoid g;
    g.sig = sig;
    g.objects = std::move(objects);
    g.rebuild_index();
    return etale_completion(g);
}

Groupoid discrete_groupoid(const Signature& sig, std::vector<Structure> objects) {
    Groupoid g;
    g.sig = sig;
    g.objects = std::move(objects);
    for (const auto& m : g.objects)
        g.arrows.push_back(identity_morphism(m));
    g.rebuild_index();
    return g;
}

Groupoid aut_groupoid(const Signature& sig, Structure object) {
    return etale_groupoid(sig, {std::move(object)});
}

Groupoid subsets_groupoid(int n) {
    std::vector<std::string> universe;
    for (int i = 0; i <= n; ++i)
        universe.push_back(std::to_string(i));
    std::vector<Structure> objs;
    for (int mask = 1; mask < (1 << (n + 1)); ++mask) {
        std::vector<std::string> elems;
        for (int i = 0; i <= n; ++i)
            if (mask & (1 << i))
                elems.push_back(universe[i]);
        objs.push_back(neq_subset("S" + join(elems, ""), elems));
    }
    return etale_groupoid(neq_signature(), std::move(objs));
}

Groupoid linear_orders_groupoid(int max_size) {
    std::vector<std::string> names = {"a", "b", "c", "d"};
    std::vector<Structure> objs;
    for (int size = 1; size <= max_size; ++size) {
        std::vector<std::string> elems(names.begin(), names.begin() + size);
        std::sort(elems.begin(), elems.end());
        std::vector<std::string> perm = elems;
        do {
            objs.push_back(linear_order("L" + join(perm, ""), perm));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return etale_groupoid(order_signature(), std::move(objs));
}

Signature two_block_signature() {
    Signature sig;
    sig.sorts = {"V"};
    sig.relations = {{"Lt", {"V", "V"}}, {"U1", {"V"}}, {"U2", {"V"}}};
    return sig;
}

Groupoid two_block_orders_groupoid(int max_size) {
    Signature sig = two_block_signature();
    std::vector<std::string> names = {"a", "b", "c", "d"};
    std::vector<Structure> objs;
    for (int size = 1; size <= max_size; ++size) {
        std::vector<std::string> elems(names.begin(), names.begin() + size);
        std::vector<std::string> perm = elems; // already sorted
        do {
            for (int cut = 0; cut <= size; ++cut) {
                Structure base = linear_order("", perm);
                Structure s;
                s.id = "B" + join(perm, "") + "_" + std::to_string(cut);
                s.carriers = base.carriers;
                s.relations.resize(3);
                s.relations[0] = base.relations[0];
                // U1 = first `cut` elements of the order, U2 = the rest
                for (int i = 0; i < size; ++i) {
                    int e = -1;
                    for (std::size_t k = 0; k < s.carriers[0].size(); ++k)
                        if (s.carriers[0][k] == perm[i])
                            e = int(k);
                    s.relations[i < cut ? 1 : 2].insert({e});
                }
                s.finalize(sig);
                objs.push_back(std::move(s));
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return etale_groupoid(sig, std::move(objs));
}

std::vector<Instance> random_instances(int count, unsigned seed, int max_objects, int max_elems) {
    std::mt19937 rng(seed);
    std::vector<Instance> out;
    for (int k = 0; k < count; ++k) {
        // signature: one of a few small relational vocabularies
        Signature sig;
        sig.sorts = {"V"};
        int variant = int(rng() % 3);
        if (variant == 0)
            sig.relations = {{"E", {"V", "V"}}};
        else if (variant == 1)
            sig.relations = {{"P", {"V"}}, {"E", {"V", "V"}}};
        else
            sig.relations = {{"P", {"V"}}};

        bool shared_names = rng() % 2 == 0;
        int object_count = 1 + int(rng() % max_objects);
        // binary relations on 4-element carriers put the saturation oracle's
        // meet closure out of desk range; only the unary vocabulary uses the
        // full element budget
        int elem_budget = variant == 2 ? max_elems : std::min(max_elems, 3);
        std::vector<Structure> objects;
        for (int o = 0; o < object_count; ++o) {
            Structure m;
            m.id = "M" + std::to_string(o);
            int size = 1 + int(rng() % elem_budget);
            m.carriers.resize(1);
            for (int e = 0; e < size; ++e)
                m.carriers[0].push_back(shared_names ? "e" + std::to_string(e)
                                                     : m.id + "e" + std::to_string(e));
            m.relations.resize(sig.relations.size());
            for (std::size_t r = 0; r < sig.relations.size(); ++r) {
                int arity = int(sig.relations[r].arity.size());
                int space = arity == 1 ? size : size * size;
                for (int t = 0; t < space; ++t)
                    if (rng() % 3 == 0) {
                        if (arity == 1)
                            m.relations[r].insert({t});
                        else
                            m.relations[r].insert({t / size, t % size});
                    }
            }
            m.finalize(sig);
            objects.push_back(std::move(m));
        }

        Instance inst;
        inst.name = "rand" + std::to_string(k);
        inst.groupoid = rng() % 2 == 0 ? etale_groupoid(sig, std::move(objects))
                                       : discrete_groupoid(sig, std::move(objects));
        inst.indexing =
            shared_names ? carrier_indexing(inst.groupoid) : trivial_indexing(inst.groupoid);
        out.push_back(std::move(inst));
    }
    return out;
}

} // namespace mgt::corpus
