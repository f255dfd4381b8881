// Command-line front end; all computation happens behind the shared C API.

#include <mgt.h>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

namespace {

bool read_file(const std::string& path, std::string& out, std::string& error) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        error = "cannot open " + path;
        return false;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    out = buffer.str();
    return true;
}

struct SessionDeleter {
    void operator()(mgt_session* s) const { mgt_session_free(s); }
};

struct CommonFlags {
    std::string theory_path;
    std::string groupoid_path;
    std::string json_path;
    std::string tuple;
    std::string checks;
    int max_tuple = -1;
    int max_extra_vars = -2;
    int size_bound = -1;
    int scheme_bound = -1;
    int synth_bound = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool wants_theory, bool wants_groupoid) {
    if (wants_theory)
        cmd->add_option("--theory", flags.theory_path, "theory DSL file");
    if (wants_groupoid)
        cmd->add_option("--groupoid", flags.groupoid_path, "groupoid JSON file");
    cmd->add_option("--json", flags.json_path, "write the JSON report here");
    cmd->add_option("--max-tuple", flags.max_tuple, "parameter tuple length bound");
    cmd->add_option("--max-extra-vars", flags.max_extra_vars, "saturation variable bound");
    cmd->add_option("--size-bound", flags.size_bound, "conservativity model size bound");
    cmd->add_option("--scheme-bound", flags.scheme_bound, "axiom scheme instantiation bound");
    cmd->add_option("--synth-bound", flags.synth_bound, "signature extension tuple bound");
}

int run_command(const char* command, const CommonFlags& flags, bool wants_theory, bool wants_groupoid) {
    std::unique_ptr<mgt_session, SessionDeleter> session(mgt_session_new());
    if (!session) {
        std::cerr << "error: out of memory\n";
        return MGT_USAGE;
    }

    std::string text, error;
    if (wants_theory) {
        if (flags.theory_path.empty()) {
            std::cerr << "error: --theory is required\n";
            return MGT_USAGE;
        }
        if (!read_file(flags.theory_path, text, error)) {
            std::cerr << "error: " << error << "\n";
            return MGT_USAGE;
        }
        if (mgt_load_theory(session.get(), text.c_str()) != MGT_OK) {
            std::cerr << "error: " << flags.theory_path << ": " << mgt_last_error(session.get()) << "\n";
            return MGT_USAGE;
        }
    }
    if (wants_groupoid) {
        if (flags.groupoid_path.empty()) {
            std::cerr << "error: --groupoid is required\n";
            return MGT_USAGE;
        }
        if (!read_file(flags.groupoid_path, text, error)) {
            std::cerr << "error: " << error << "\n";
            return MGT_USAGE;
        }
        if (mgt_load_groupoid(session.get(), text.c_str()) != MGT_OK) {
            std::cerr << "error: " << flags.groupoid_path << ": " << mgt_last_error(session.get()) << "\n";
            return MGT_USAGE;
        }
    }

    auto set_int = [&](const char* key, int value) {
        return mgt_set_option(session.get(), key, std::to_string(value).c_str()) == MGT_OK;
    };
    bool ok = true;
    if (flags.max_tuple >= 0)
        ok &= set_int("max-tuple", flags.max_tuple);
    if (flags.max_extra_vars >= -1)
        ok &= set_int("max-extra-vars", flags.max_extra_vars);
    if (flags.size_bound >= 0)
        ok &= set_int("size-bound", flags.size_bound);
    if (flags.scheme_bound >= 0)
        ok &= set_int("scheme-bound", flags.scheme_bound);
    if (flags.synth_bound >= 0)
        ok &= set_int("synth-bound", flags.synth_bound);
    if (!flags.tuple.empty())
        ok &= mgt_set_option(session.get(), "tuple", flags.tuple.c_str()) == MGT_OK;
    if (!flags.checks.empty())
        ok &= mgt_set_option(session.get(), "check", flags.checks.c_str()) == MGT_OK;
    if (!ok) {
        std::cerr << "error: " << mgt_last_error(session.get()) << "\n";
        return MGT_USAGE;
    }

    char* report = nullptr;
    int status = mgt_run(session.get(), command, &report);
    if (status == MGT_USAGE) {
        std::cerr << "error: " << mgt_last_error(session.get()) << "\n";
        return MGT_USAGE;
    }
    std::cout << mgt_last_summary(session.get());
    if (report) {
        if (!flags.json_path.empty()) {
            std::ofstream out(flags.json_path, std::ios::binary);
            if (!out) {
                std::cerr << "error: cannot write " << flags.json_path << "\n";
                mgt_string_free(report);
                return MGT_USAGE;
            }
            out << report;
        }
        mgt_string_free(report);
    }
    return status;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"model groupoid toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("mgt ") + mgt_version());

    struct Sub {
        const char* name;
        const char* help;
        bool theory;
        bool groupoid;
        CommonFlags flags;
        CLI::App* cmd = nullptr;
    };
    Sub subs[] = {
        {"check", "run theory, conservativity, elimination, open-map and T0 checks", true, true, {}, nullptr},
        {"orbit", "orbit of a parameter tuple and its defining formula", false, true, {}, nullptr},
        {"topology", "logical topology bases, T0, open map, stable-open lattices", false, true, {}, nullptr},
        {"etale", "compute the etale completion", false, true, {}, nullptr},
        {"synth", "synthesize the theory classified by the indexed groupoid", false, true, {}, nullptr},
        {"morleyize", "translate a classical theory to a coherent one", true, false, {}, nullptr},
    };
    for (auto& sub : subs) {
        sub.cmd = app.add_subcommand(sub.name, sub.help);
        add_common(sub.cmd, sub.flags, sub.theory, sub.groupoid);
        if (std::string(sub.name) == "orbit")
            sub.cmd->add_option("--tuple", sub.flags.tuple, "comma-separated parameter tuple");
        if (std::string(sub.name) == "check")
            sub.cmd->add_option("--check", sub.flags.checks,
                                "comma list: theory,conservativity,elimination,open_map,t0");
    }

    CLI11_PARSE(app, argc, argv);

    for (auto& sub : subs)
        if (sub.cmd->parsed())
            return run_command(sub.name, sub.flags, sub.theory, sub.groupoid);
    return MGT_USAGE;
}
