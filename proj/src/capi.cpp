#include "mgt.h"

#include "report.hpp"
#include "util.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

using namespace mgt;

struct mgt_session {
    std::string theory_text;
    std::string groupoid_text;
    bool has_theory = false;
    bool has_groupoid = false;
    RunOptions options;
    std::string last_error;
    std::string last_summary;
};

namespace {

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out)
        std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

int parse_int(const char* value, int& out) {
    try {
        out = std::stoi(value);
        return MGT_OK;
    } catch (...) {
        return MGT_USAGE;
    }
}

} // namespace

extern "C" {

mgt_session* mgt_session_new(void) {
    return new (std::nothrow) mgt_session();
}

void mgt_session_free(mgt_session* s) {
    delete s;
}

int mgt_load_theory(mgt_session* s, const char* dsl_text) {
    if (!s || !dsl_text)
        return MGT_USAGE;
    try {
        parse_theory(dsl_text); // validate now so errors surface early
    } catch (const Error& e) {
        s->last_error = e.what();
        return MGT_USAGE;
    }
    s->theory_text = dsl_text;
    s->has_theory = true;
    return MGT_OK;
}

int mgt_load_groupoid(mgt_session* s, const char* json_text) {
    if (!s || !json_text)
        return MGT_USAGE;
    try {
        load_groupoid_json(json_text);
    } catch (const Error& e) {
        s->last_error = e.what();
        return MGT_USAGE;
    }
    s->groupoid_text = json_text;
    s->has_groupoid = true;
    return MGT_OK;
}

int mgt_set_option(mgt_session* s, const char* key, const char* value) {
    if (!s || !key || !value)
        return MGT_USAGE;
    std::string k = key;
    RunOptions& o = s->options;
    int parsed = 0;
    if (k == "max-tuple") {
        if (parse_int(value, parsed))
            goto bad_value;
        o.max_tuple = parsed;
    } else if (k == "max-extra-vars") {
        if (parse_int(value, parsed))
            goto bad_value;
        o.max_extra_vars = parsed;
    } else if (k == "size-bound") {
        if (parse_int(value, parsed))
            goto bad_value;
        o.size_bound = parsed;
    } else if (k == "scheme-bound") {
        if (parse_int(value, parsed))
            goto bad_value;
        o.scheme_bound = parsed;
    } else if (k == "basis-params") {
        if (parse_int(value, parsed))
            goto bad_value;
        o.basis_params = parsed;
    } else if (k == "quant-bound") {
        if (parse_int(value, parsed))
            goto bad_value;
        o.quant_bound = parsed;
    } else if (k == "synth-bound") {
        if (parse_int(value, parsed))
            goto bad_value;
        o.synth_bound = parsed;
    } else if (k == "family-cap") {
        if (parse_int(value, parsed))
            goto bad_value;
        o.family_cap = std::size_t(parsed);
    } else if (k == "check") {
        o.checks = split(value, ',');
        if (o.checks.size() == 1 && o.checks[0].empty())
            o.checks.clear();
    } else if (k == "tuple") {
        o.tuple = split(value, ',');
    } else {
        s->last_error = "unknown option: " + k;
        return MGT_USAGE;
    }
    return MGT_OK;
bad_value:
    s->last_error = std::string("option ") + key + " expects an integer, got \"" + value + "\"";
    return MGT_USAGE;
}

int mgt_run(mgt_session* s, const char* command, char** report_json) {
    if (!s || !command)
        return MGT_USAGE;
    std::string cmd = command;
    RunResult result;
    auto need = [&](bool theory, bool groupoid) {
        if (theory && !s->has_theory) {
            s->last_error = cmd + " requires a loaded theory";
            return false;
        }
        if (groupoid && !s->has_groupoid) {
            s->last_error = cmd + " requires a loaded groupoid";
            return false;
        }
        return true;
    };

    if (cmd == "check") {
        if (!need(true, true))
            return MGT_USAGE;
        result = run_check(s->theory_text, s->groupoid_text, s->options);
    } else if (cmd == "orbit") {
        if (!need(false, true))
            return MGT_USAGE;
        result = run_orbit(s->groupoid_text, s->options);
    } else if (cmd == "topology") {
        if (!need(false, true))
            return MGT_USAGE;
        result = run_topology(s->groupoid_text, s->options);
    } else if (cmd == "etale") {
        if (!need(false, true))
            return MGT_USAGE;
        result = run_etale(s->groupoid_text, s->options);
    } else if (cmd == "synth") {
        if (!need(false, true))
            return MGT_USAGE;
        result = run_synth(s->groupoid_text, s->options);
    } else if (cmd == "morleyize") {
        if (!need(true, false))
            return MGT_USAGE;
        result = run_morleyize(s->theory_text, s->options);
    } else {
        s->last_error = "unknown command: " + cmd;
        return MGT_USAGE;
    }

    s->last_summary = result.summary;
    if (result.status == RunStatus::Usage) {
        s->last_error = result.summary;
        return MGT_USAGE;
    }
    if (report_json)
        *report_json = dup_string(result.report_json);
    return int(result.status);
}

const char* mgt_last_summary(const mgt_session* s) {
    return s ? s->last_summary.c_str() : "";
}

const char* mgt_last_error(const mgt_session* s) {
    return s ? s->last_error.c_str() : "";
}

const char* mgt_version(void) {
    return kToolVersion;
}

void mgt_string_free(char* text) {
    std::free(text);
}

} // extern "C"
