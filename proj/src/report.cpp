#include "report.hpp"

#include "definable.hpp"
#include "elimination.hpp"
#include "theorygen.hpp"
#include "topology.hpp"
#include "util.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace mgt {

namespace {

using nlohmann::ordered_json;

ordered_json definable_to_json(const Groupoid& g, const DefinableSet& d) {
    ordered_json out = ordered_json::array();
    std::vector<int> sorts = context_sorts(g.sig, d.ctx);
    for (const auto& p : d.members) {
        ordered_json member;
        member["object"] = g.objects[p.object].id;
        ordered_json tuple = ordered_json::array();
        for (std::size_t i = 0; i < p.tuple.size(); ++i)
            tuple.push_back(g.objects[p.object].carriers[sorts[i]][p.tuple[i]]);
        member["tuple"] = std::move(tuple);
        out.push_back(std::move(member));
    }
    return out;
}

struct ReportBuilder {
    ordered_json doc;
    std::ostringstream summary;
    bool failed = false;
    bool inconclusive = false;

    ReportBuilder(const std::string& command, const RunOptions& opt, const std::string& theory_text,
                  const std::string& groupoid_text) {
        doc["schema"] = 1;
        doc["tool"] = "mgt";
        doc["version"] = kToolVersion;
        doc["command"] = command;
        ordered_json inputs;
        if (!theory_text.empty())
            inputs["theory_sha256"] = sha256_hex(theory_text);
        if (!groupoid_text.empty())
            inputs["groupoid_sha256"] = sha256_hex(groupoid_text);
        doc["inputs"] = std::move(inputs);
        ordered_json bounds;
        bounds["max_tuple"] = opt.max_tuple;
        bounds["max_extra_vars"] = opt.max_extra_vars;
        bounds["size_bound"] = opt.size_bound;
        bounds["scheme_bound"] = opt.scheme_bound;
        bounds["basis_params"] = opt.basis_params;
        bounds["quant_bound"] = opt.quant_bound;
        bounds["synth_bound"] = opt.synth_bound;
        doc["bounds"] = std::move(bounds);
        doc["notes"] = ordered_json::array();
    }

    void note(const std::string& text) { doc["notes"].push_back(text); }

    RunResult finish() {
        doc["overall"] = failed ? "fail" : inconclusive ? "inconclusive" : "pass";
        summary << "overall: " << doc["overall"].get<std::string>() << "\n";
        RunResult out;
        out.status = failed          ? RunStatus::Fail
                     : inconclusive ? RunStatus::Inconclusive
                                    : RunStatus::Pass;
        out.report_json = doc.dump(2) + "\n";
        out.summary = summary.str();
        return out;
    }
};

RunResult usage_failure(const std::string& message) {
    RunResult out;
    out.status = RunStatus::Usage;
    out.summary = "error: " + message + "\n";
    return out;
}

int effective_extra_vars(const Groupoid& g, const RunOptions& opt) {
    if (opt.max_extra_vars >= 0)
        return opt.max_extra_vars;
    int bound = 0;
    for (const auto& m : g.objects)
        bound = std::max(bound, int(m.carrier_total()));
    return bound;
}

bool check_selected(const RunOptions& opt, const std::string& name) {
    if (opt.checks.empty())
        return true;
    return std::find(opt.checks.begin(), opt.checks.end(), name) != opt.checks.end();
}

} // namespace

RunResult run_check(const std::string& theory_dsl, const std::string& groupoid_json, const RunOptions& opt) {
    Theory theory;
    GroupoidDocument doc;
    try {
        theory = parse_theory(theory_dsl);
        doc = load_groupoid_json(groupoid_json);
    } catch (const Error& e) {
        return usage_failure(e.what());
    }
    const Groupoid& g = doc.groupoid;
    Indexing ix = doc.had_indexing ? doc.indexing : carrier_indexing(g);

    ReportBuilder rb("check", opt, theory_dsl, groupoid_json);
    rb.note(doc.had_indexing ? "indexing: from document" : "indexing: carrier elements (default)");
    ordered_json results;

    try {
        if (check_selected(opt, "theory")) {
            ordered_json jt;
            ordered_json failures;
            bool ok = true, truncated = false;
            for (const auto& m : g.objects) {
                TheoryCheck check = check_theory(m, theory, opt.scheme_bound);
                truncated |= check.schemes_truncated;
                if (!check.ok) {
                    ok = false;
                    failures[m.id] = check.failing;
                }
            }
            jt["ok"] = ok;
            if (!failures.empty())
                jt["failures"] = std::move(failures);
            if (truncated) {
                jt["inconclusive_for_schemes"] = true;
                rb.inconclusive = true;
                rb.note("scheme instantiation truncated at the declared bound");
            }
            rb.failed |= !ok;
            rb.summary << "theory: " << (ok ? "ok" : "failed") << " (" << theory.axioms.size()
                       << " axioms over " << g.objects.size() << " objects)\n";
            results["theory"] = std::move(jt);
        }

        if (check_selected(opt, "conservativity")) {
            ConservativityReport rep =
                conservative_at_level(g, theory, opt.pool, opt.size_bound, opt.scheme_bound);
            ordered_json jc;
            jc["objects_satisfy_theory"] = rep.objects_satisfy_theory;
            jc["n_conservative"] = rep.conservative;
            jc["size_bound"] = rep.size_bound;
            jc["models_checked"] = rep.models_checked;
            jc["entailments_checked"] = rep.entailments_checked;
            if (rep.counterexample) {
                ordered_json ce;
                ce["phi"] = rep.counterexample->phi;
                ce["psi"] = rep.counterexample->psi;
                ce["context"] = rep.counterexample->context;
                ce["model"] = rep.counterexample->model;
                ce["tuple"] = rep.counterexample->tuple;
                jc["counterexample"] = std::move(ce);
            }
            if (rep.schemes_inconclusive) {
                jc["inconclusive_for_schemes"] = true;
                rb.inconclusive = true;
            }
            rb.failed |= !rep.conservative || !rep.objects_satisfy_theory;
            rb.summary << "conservativity: " << (rep.conservative ? "n-conservative" : "failed")
                       << " at size bound " << rep.size_bound << " (" << rep.models_checked << " models, "
                       << rep.entailments_checked << " entailments)\n";
            if (rep.counterexample)
                rb.summary << "  counterexample: " << rep.counterexample->phi << " |- "
                           << rep.counterexample->psi << " fails at (" << join(rep.counterexample->tuple, ",")
                           << ") in " << rep.counterexample->model << "\n";
            results["conservativity"] = std::move(jc);
        }

        if (check_selected(opt, "elimination")) {
            ElimVerdict verdict = eliminates_parameters(g, ix, opt.max_tuple);
            ordered_json je;
            je["overall"] = verdict.overall;
            je["bound"] = verdict.max_tuple_len;
            je["empty_tuples"] = verdict.empty_tuples;
            ordered_json entries = ordered_json::array();
            for (const auto& e : verdict.entries) {
                ordered_json entry;
                entry["tuple"] = e.tuple;
                entry["status"] = e.eliminated ? "yes" : "no";
                entry["orbit_size"] = e.orbit_size;
                if (e.formula)
                    entry["formula"] = print_formula(*e.formula);
                if (e.witness) {
                    DefinableSet pair;
                    pair.ctx = e.formula_ctx;
                    pair.members = {e.witness->in_orbit, e.witness->outside};
                    ordered_json jw;
                    DefinableSet in_orbit;
                    in_orbit.ctx = e.formula_ctx;
                    in_orbit.members = {e.witness->in_orbit};
                    DefinableSet outside;
                    outside.ctx = e.formula_ctx;
                    outside.members = {e.witness->outside};
                    jw["in_orbit"] = definable_to_json(g, in_orbit)[0];
                    jw["outside"] = definable_to_json(g, outside)[0];
                    entry["witness"] = std::move(jw);
                }
                entries.push_back(std::move(entry));
            }
            je["entries"] = std::move(entries);
            rb.failed |= !verdict.overall;
            rb.summary << "elimination: " << (verdict.overall ? "yes" : "no") << " at tuple bound "
                       << verdict.max_tuple_len << " (" << verdict.entries.size() << " tuples, "
                       << verdict.empty_tuples << " empty)\n";
            if (!verdict.overall)
                for (const auto& e : verdict.entries)
                    if (!e.eliminated) {
                        std::vector<int> sorts = context_sorts(g.sig, e.formula_ctx);
                        auto render = [&](const PointedStructure& p) {
                            std::vector<std::string> names;
                            for (std::size_t i = 0; i < p.tuple.size(); ++i)
                                names.push_back(g.objects[p.object].carriers[sorts[i]][p.tuple[i]]);
                            return g.objects[p.object].id + ":(" + join(names, ",") + ")";
                        };
                        rb.summary << "  witness for (" << join(e.tuple, ",")
                                   << "): " << render(e.witness->in_orbit) << " maps onto "
                                   << render(e.witness->outside) << " outside the orbit\n";
                        break;
                    }
            results["elimination"] = std::move(je);
        }

        if (check_selected(opt, "open_map")) {
            ObjectBasis ob = object_basis(g, ix, opt.basis_params, opt.quant_bound);
            ArrowBasis ab = arrow_basis(g, ix);
            OpenMapReport rep = is_open_map_t(g, ob, ab);
            ordered_json jo;
            jo["open"] = rep.open;
            if (rep.failing_open)
                jo["failing_open"] = *rep.failing_open;
            if (rep.failing_object)
                jo["failing_object"] = *rep.failing_object;
            rb.failed |= !rep.open;
            rb.summary << "open map t: " << (rep.open ? "yes" : "no") << "\n";
            results["open_map"] = std::move(jo);
        }

        if (check_selected(opt, "t0")) {
            ObjectBasis ob = object_basis(g, ix, opt.basis_params, opt.quant_bound);
            bool t0 = is_T0(g, ob);
            rb.failed |= !t0;
            rb.summary << "T0: " << (t0 ? "yes" : "no") << "\n";
            results["t0"] = t0;
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Bound) {
            rb.note(std::string("bound cap: ") + e.what());
            rb.inconclusive = true;
            rb.summary << "inconclusive: " << e.what() << "\n";
            rb.doc["results"] = std::move(results);
            return rb.finish();
        }
        return usage_failure(e.what());
    }

    rb.doc["results"] = std::move(results);
    return rb.finish();
}

RunResult run_orbit(const std::string& groupoid_json, const RunOptions& opt) {
    GroupoidDocument doc;
    try {
        doc = load_groupoid_json(groupoid_json);
    } catch (const Error& e) {
        return usage_failure(e.what());
    }
    if (opt.tuple.empty())
        return usage_failure("orbit requires --tuple p1,p2,...");
    const Groupoid& g = doc.groupoid;
    Indexing ix = doc.had_indexing ? doc.indexing : carrier_indexing(g);

    ReportBuilder rb("orbit", opt, "", groupoid_json);
    try {
        DefinableSet seed = params_definable(g, ix, opt.tuple);
        if (seed.members.empty())
            return usage_failure("tuple (" + join(opt.tuple, ",") +
                                 ") is not co-interpreted in any object");
        DefinableSet orb = orbit(g, seed);
        auto [ub_ctx, ub] = upper_bound_formula(g.sig, ix, opt.tuple);

        ordered_json results;
        results["tuple"] = opt.tuple;
        results["seed"] = definable_to_json(g, seed);
        results["orbit"] = definable_to_json(g, orb);
        results["upper_bound_formula"] = print_formula(ub);
        rb.summary << "tuple: (" << join(opt.tuple, ",") << ")\n";
        rb.summary << "orbit: " << orb.members.size() << " members\n";
        rb.summary << "upper bound: " << print_formula(ub) << "\n";
        if (auto formula = is_pf_definable(g, orb)) {
            results["formula"] = print_formula(*formula);
            rb.summary << "formula: " << print_formula(*formula) << "\n";
        } else {
            results["formula"] = nullptr;
            rb.summary << "formula: none (orbit is not parameter-free definable)\n";
        }
        rb.doc["results"] = std::move(results);
    } catch (const Error& e) {
        return usage_failure(e.what());
    }
    return rb.finish();
}

RunResult run_topology(const std::string& groupoid_json, const RunOptions& opt) {
    GroupoidDocument doc;
    try {
        doc = load_groupoid_json(groupoid_json);
    } catch (const Error& e) {
        return usage_failure(e.what());
    }
    const Groupoid& g = doc.groupoid;
    Indexing ix = doc.had_indexing ? doc.indexing : carrier_indexing(g);

    ReportBuilder rb("topology", opt, "", groupoid_json);
    try {
        ObjectBasis ob = object_basis(g, ix, opt.basis_params, opt.quant_bound);
        ArrowBasis ab = arrow_basis(g, ix);

        ordered_json results;
        ordered_json jbasis = ordered_json::array();
        for (const auto& open : ob.opens) {
            ordered_json jo;
            jo["sentences"] = open.sentences;
            ordered_json ext = ordered_json::array();
            for (int o : open.extension)
                ext.push_back(g.objects[o].id);
            jo["extension"] = std::move(ext);
            jbasis.push_back(std::move(jo));
        }
        results["object_basis"] = std::move(jbasis);
        results["arrow_basis_size"] = ab.opens.size();

        OpenMapReport om = is_open_map_t(g, ob, ab);
        results["open_map"] = om.open;
        results["t0"] = is_T0(g, ob);

        // stable-open lattice in one variable per sort
        ordered_json lattices = ordered_json::array();
        for (std::size_t s = 0; s < g.sig.sorts.size(); ++s) {
            Context c;
            c.vars = {{"x1", g.sig.sorts[s]}};
            StableOpenLattice lat = stable_open_lattice(g, ix, c, opt.family_cap);
            ordered_json jl;
            jl["context"] = print_context(c);
            jl["param_bound"] = lat.param_bound;
            jl["truncated"] = lat.truncated;
            ordered_json members = ordered_json::array();
            for (const auto& d : lat.family)
                members.push_back(definable_to_json(g, d));
            jl["family"] = std::move(members);
            // Hasse diagram: cover relations by inclusion
            ordered_json edges = ordered_json::array();
            for (std::size_t i = 0; i < lat.family.size(); ++i)
                for (std::size_t j = 0; j < lat.family.size(); ++j) {
                    if (i == j)
                        continue;
                    const auto& a = lat.family[i].members;
                    const auto& b = lat.family[j].members;
                    if (a.size() >= b.size() || !std::includes(b.begin(), b.end(), a.begin(), a.end()))
                        continue;
                    bool cover = true;
                    for (std::size_t k = 0; k < lat.family.size() && cover; ++k) {
                        if (k == i || k == j)
                            continue;
                        const auto& m = lat.family[k].members;
                        if (m.size() > a.size() && m.size() < b.size() &&
                            std::includes(m.begin(), m.end(), a.begin(), a.end()) &&
                            std::includes(b.begin(), b.end(), m.begin(), m.end()))
                            cover = false;
                    }
                    if (cover)
                        edges.push_back(ordered_json::array({i, j}));
                }
            jl["hasse"] = std::move(edges);
            if (lat.truncated) {
                rb.inconclusive = true;
                rb.note("stable-open lattice truncated at the family cap");
            }
            lattices.push_back(std::move(jl));
        }
        results["stable_open_lattices"] = std::move(lattices);

        rb.summary << "object basis: " << ob.opens.size() << " opens\n";
        rb.summary << "arrow basis: " << ab.opens.size() << " opens\n";
        rb.summary << "open map t: " << (om.open ? "yes" : "no") << "\n";
        rb.summary << "T0: " << (results["t0"].get<bool>() ? "yes" : "no") << "\n";
        rb.doc["results"] = std::move(results);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Bound) {
            rb.note(std::string("bound cap: ") + e.what());
            rb.inconclusive = true;
            return rb.finish();
        }
        return usage_failure(e.what());
    }
    return rb.finish();
}

RunResult run_etale(const std::string& groupoid_json, const RunOptions& opt) {
    GroupoidDocument doc;
    try {
        doc = load_groupoid_json(groupoid_json);
    } catch (const Error& e) {
        return usage_failure(e.what());
    }
    const Groupoid& g = doc.groupoid;
    Indexing ix = doc.had_indexing ? doc.indexing : carrier_indexing(g);

    ReportBuilder rb("etale", opt, "", groupoid_json);
    EtaleReport before = check_etale_complete(g);
    Groupoid completed = etale_completion(g);
    ix.finalize(completed);

    ordered_json results;
    results["was_complete"] = before.complete;
    if (!before.complete)
        results["missing"] = before.missing;
    results["arrows_before"] = g.arrows.size();
    results["arrows_after"] = completed.arrows.size();
    results["groupoid"] = ordered_json::parse(groupoid_to_json(completed, ix));
    rb.summary << "etale complete before: " << (before.complete ? "yes" : "no") << "\n";
    rb.summary << "arrows: " << g.arrows.size() << " -> " << completed.arrows.size() << "\n";
    rb.doc["results"] = std::move(results);
    return rb.finish();
}

RunResult run_synth(const std::string& groupoid_json, const RunOptions& opt) {
    GroupoidDocument doc;
    try {
        doc = load_groupoid_json(groupoid_json);
    } catch (const Error& e) {
        return usage_failure(e.what());
    }
    const Groupoid& g = doc.groupoid;
    Indexing ix = doc.had_indexing ? doc.indexing : carrier_indexing(g);

    ReportBuilder rb("synth", opt, "", groupoid_json);
    try {
        ExtendedSignature ext = extend_signature(g, ix, opt.synth_bound);
        auto [eg, eix] = interpret_extension(g, ix, ext);
        Theory theory = theory_of_groupoid(eg, opt.pool);
        std::string dsl = print_theory(theory);

        bool satisfied = true;
        for (const auto& m : eg.objects)
            satisfied &= check_theory(m, theory, opt.scheme_bound).ok;
        ElimVerdict verdict = eliminates_parameters(eg, eix, opt.synth_bound);

        ordered_json results;
        results["theory_dsl"] = dsl;
        results["axiom_count"] = theory.axioms.size();
        results["added_relations"] = ext.tuples.size();
        results["satisfied_by_all_objects"] = satisfied;
        results["extended_elimination"] = verdict.overall;
        rb.failed |= !satisfied || !verdict.overall;
        rb.summary << "synthesized " << theory.axioms.size() << " axioms over "
                   << ext.tuples.size() << " added relations\n";
        rb.summary << "satisfied by all objects: " << (satisfied ? "yes" : "no") << "\n";
        rb.summary << "extended groupoid eliminates: " << (verdict.overall ? "yes" : "no") << "\n";
        rb.doc["results"] = std::move(results);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Bound) {
            rb.note(std::string("bound cap: ") + e.what());
            rb.inconclusive = true;
            return rb.finish();
        }
        return usage_failure(e.what());
    }
    return rb.finish();
}

RunResult run_morleyize(const std::string& theory_dsl, const RunOptions& opt) {
    Theory theory;
    try {
        theory = parse_theory(theory_dsl);
    } catch (const Error& e) {
        return usage_failure(e.what());
    }
    ReportBuilder rb("morleyize", opt, theory_dsl, "");
    try {
        Theory coherent = morleyize(theory);
        ordered_json results;
        results["theory_dsl"] = print_theory(coherent);
        results["added_relations"] = coherent.signature.relations.size() - theory.signature.relations.size();
        results["axiom_count"] = coherent.axioms.size();
        rb.summary << "morleyized: " << coherent.axioms.size() << " axioms, "
                   << results["added_relations"].get<std::size_t>() << " added relations\n";
        rb.doc["results"] = std::move(results);
    } catch (const Error& e) {
        return usage_failure(e.what());
    }
    return rb.finish();
}

} // namespace mgt
