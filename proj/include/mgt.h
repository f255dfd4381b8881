/* Model-groupoid toolkit: C interface to the shared library.
 *
 * A session owns the loaded inputs and options.  Load a theory (DSL text)
 * and/or a groupoid (JSON document), set options, then run a command; every
 * run produces a deterministic JSON report.
 */
#ifndef MGT_H
#define MGT_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct mgt_session mgt_session;

/* Status codes; they match the CLI exit codes. */
enum {
    MGT_OK = 0,           /* all requested checks pass */
    MGT_FAIL = 1,         /* a checked property fails (report carries the witness) */
    MGT_USAGE = 2,        /* malformed input or bad arguments */
    MGT_INCONCLUSIVE = 3, /* a bound cap left a check undecided */
};

mgt_session* mgt_session_new(void);
void mgt_session_free(mgt_session* s);

/* Both return MGT_OK or MGT_USAGE; details via mgt_last_error. */
int mgt_load_theory(mgt_session* s, const char* dsl_text);
int mgt_load_groupoid(mgt_session* s, const char* json_text);

/* Options (all values passed as strings):
 *   max-tuple, max-extra-vars, size-bound, scheme-bound, basis-params,
 *   quant-bound, synth-bound, family-cap      -- integers
 *   check                                     -- comma list of sub-checks
 *                                                (theory, conservativity,
 *                                                elimination, open_map, t0)
 *   tuple                                     -- comma list of parameters
 * Returns MGT_OK or MGT_USAGE. */
int mgt_set_option(mgt_session* s, const char* key, const char* value);

/* Commands: check, orbit, topology, etale, synth, morleyize.
 * Returns a status code.  On every status except MGT_USAGE, *report_json
 * receives a malloc'd JSON document to be released with mgt_string_free. */
int mgt_run(mgt_session* s, const char* command, char** report_json);

/* Human-readable summary of the last run; owned by the session. */
const char* mgt_last_summary(const mgt_session* s);

/* Message of the last error; owned by the session. */
const char* mgt_last_error(const mgt_session* s);

const char* mgt_version(void);

void mgt_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* MGT_H */
