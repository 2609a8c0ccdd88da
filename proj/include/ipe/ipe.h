/*
 * Copyright 2026 The ipeng Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the ipeng engine: parse, validate, translate, verify and
 * simulate interaction protocols. All handles are opaque. Strings returned
 * through `char**` are owned by the caller and released with
 * ipe_string_free. On failure, ipe_last_error() describes the most recent
 * error on the calling thread. */

#ifndef IPE_IPE_H_
#define IPE_IPE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define IPE_API __declspec(dllexport)
#else
#define IPE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ipe_status {
  IPE_OK = 0,
  IPE_ERR_ARGUMENT = 1,   /* null handle or out-of-range option */
  IPE_ERR_PARSE = 2,      /* protocol document syntax */
  IPE_ERR_INVALID = 3,    /* well-formedness violation */
  IPE_ERR_NET = 4,        /* translation or net structure */
  IPE_ERR_UNVERIFIED = 5, /* simulation refused: no proper termination */
  IPE_ERR_SESSION = 6,    /* runtime misuse (bindings, announce, ...) */
  IPE_ERR_SERVICE = 7,    /* registry content or lookup */
  IPE_ERR_IO = 8,
  IPE_ERR_TRACE = 9,      /* malformed trace text */
  IPE_ERR_INTERNAL = 10
} ipe_status;

typedef enum ipe_verdict { IPE_HOLDS = 0, IPE_VIOLATED = 1, IPE_INCONCLUSIVE = 2 } ipe_verdict;

typedef enum ipe_format { IPE_FORMAT_PNML = 0, IPE_FORMAT_DOT = 1 } ipe_format;

typedef enum ipe_policy { IPE_POLICY_MIN_COST = 0, IPE_POLICY_FIRST = 1 } ipe_policy;

typedef enum ipe_session_status {
  IPE_SESSION_RUNNING = 0,
  IPE_SESSION_COMPLETED = 1,
  IPE_SESSION_STUCK = 2,
  IPE_SESSION_DEADLINE_EXPIRED = 3
} ipe_session_status;

typedef struct ipe_protocol ipe_protocol;
typedef struct ipe_net ipe_net;
typedef struct ipe_registry ipe_registry;
typedef struct ipe_session ipe_session;

typedef struct ipe_bounds {
  uint64_t max_nodes;
  uint32_t max_tokens_per_place;
} ipe_bounds;

typedef struct ipe_verify_result {
  int passed;
  int bounded;
  ipe_verdict deadlock_free;
  ipe_verdict proper_termination;
  ipe_verdict no_dead_transitions;
  uint64_t nodes;
  uint64_t edges;
  double elapsed_ms;
} ipe_verify_result;

typedef struct ipe_sim_config {
  uint64_t seed;
  uint64_t max_steps;
  ipe_bounds bounds;
  ipe_policy policy;
  uint32_t retries;
  int force;
  const ipe_registry* registry; /* may be NULL */
} ipe_sim_config;

typedef struct ipe_sim_result {
  ipe_session_status status;
  int conformant;
  int verified;
  uint64_t steps;
  uint64_t clock;
  uint64_t events;
} ipe_sim_result;

IPE_API const char* ipe_version(void);
IPE_API const char* ipe_status_string(ipe_status status);
IPE_API const char* ipe_last_error(void);
IPE_API void ipe_string_free(char* s);

/* Protocols. ipe_protocol_parse_document checks syntax only;
 * ipe_protocol_parse also rejects documents with validation errors. */
IPE_API ipe_status ipe_protocol_parse_document(const char* text, size_t len, ipe_protocol** out);
IPE_API ipe_status ipe_protocol_parse(const char* text, size_t len, ipe_protocol** out);
IPE_API void ipe_protocol_free(ipe_protocol* p);
IPE_API const char* ipe_protocol_id(const ipe_protocol* p);
/* Findings as a JSON document; *ok is 1 when no error-level finding exists. */
IPE_API ipe_status ipe_protocol_validate(const ipe_protocol* p, int* ok, char** findings_json);
IPE_API ipe_status ipe_protocol_serialize(const ipe_protocol* p, char** out);

/* Nets. */
IPE_API ipe_status ipe_net_translate(const ipe_protocol* p, ipe_net** out);
IPE_API void ipe_net_free(ipe_net* n);
IPE_API size_t ipe_net_place_count(const ipe_net* n);
IPE_API size_t ipe_net_transition_count(const ipe_net* n);
IPE_API ipe_status ipe_net_export(const ipe_net* n, ipe_format format, char** out);

/* Verification. report_json may be NULL. */
IPE_API ipe_bounds ipe_default_bounds(void);
IPE_API ipe_status ipe_verify(const ipe_net* n, const ipe_bounds* bounds, int include_timing, ipe_verify_result* out,
                              char** report_json);

/* Service registries. */
IPE_API ipe_status ipe_registry_load(const char* path, ipe_registry** out);
IPE_API ipe_status ipe_registry_parse(const char* json, size_t len, ipe_registry** out);
IPE_API void ipe_registry_free(ipe_registry* r);
IPE_API size_t ipe_registry_size(const ipe_registry* r);

/* Sessions. The first step's sender is bound to the Integrator agent and
 * every other PrivateProcess role to an Enterprise agent named after it.
 * The protocol is verified with config->bounds unless config->force. */
IPE_API ipe_sim_config ipe_default_sim_config(void);
IPE_API ipe_status ipe_session_create(const ipe_protocol* p, const ipe_sim_config* config, ipe_session** out);
IPE_API void ipe_session_free(ipe_session* s);
IPE_API ipe_status ipe_session_announce(ipe_session* s, const char* task);
/* Events produced by this step as NDJSON; events may be NULL. */
IPE_API ipe_status ipe_session_step(ipe_session* s, char** events);
IPE_API ipe_session_status ipe_session_state(const ipe_session* s);
IPE_API ipe_status ipe_session_trace(const ipe_session* s, char** ndjson);

/* Announce, run to a terminal state and check conformance in one call.
 * trace_ndjson and summary_json may be NULL. */
IPE_API ipe_status ipe_simulate(const ipe_protocol* p, const ipe_sim_config* config, ipe_sim_result* result,
                                char** trace_ndjson, char** summary_json);

/* Replays an NDJSON trace against a net. */
IPE_API ipe_status ipe_trace_check(const ipe_net* n, const char* ndjson, size_t len, int* conformant,
                                   char** diagnostic);

#ifdef __cplusplus
}
#endif

#endif /* IPE_IPE_H_ */
