/* groundkit -- GUI grounding data pipeline and reward scoring.
 *
 * C API over the C++ core: opaque handles, integer status codes,
 * library-owned strings released with gk_string_free(). Every function
 * that can fail returns gk_status; gk_last_error() carries the
 * thread-local message for the most recent failure on this thread.
 */
#ifndef GROUNDKIT_H
#define GROUNDKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GK_API __declspec(dllexport)
#else
#define GK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gk_status {
    GK_OK = 0,
    GK_ERR_INVALID_ARGUMENT = 1,
    GK_ERR_IO = 2,
    GK_ERR_PARSE = 3,
    GK_ERR_NOT_FOUND = 4,
    GK_ERR_UNSUPPORTED = 5,
    GK_ERR_REMOTE = 6,
    GK_ERR_INTERNAL = 7
} gk_status;

GK_API const char* gk_version(void);
GK_API const char* gk_last_error(void);
GK_API void gk_string_free(char* s);

/* ------------------------------------------------------------------ */
/* corpus                                                              */
/* ------------------------------------------------------------------ */

typedef struct gk_corpus gk_corpus; /* opaque */

/* path: corpus directory (containing manifest.json) or the manifest
 * file itself. */
GK_API gk_status gk_corpus_load(const char* path, gk_corpus** out);
GK_API void gk_corpus_free(gk_corpus* c);
GK_API size_t gk_corpus_screenshot_count(const gk_corpus* c);
GK_API size_t gk_corpus_element_count(const gk_corpus* c);

/* Data-quality pass; non-strict mode clamps out-of-bounds boxes in
 * place. report_json (optional) receives the diagnostics document. */
GK_API gk_status gk_corpus_validate(gk_corpus* c, int strict, char** report_json);
GK_API gk_status gk_corpus_save(const gk_corpus* c, const char* dir);

/* ------------------------------------------------------------------ */
/* geometry                                                            */
/* ------------------------------------------------------------------ */

typedef struct gk_box {
    double x1, y1, x2, y2;
} gk_box;

/* Boundary-inclusive membership test. */
GK_API int gk_point_in_box(double u, double v, gk_box b);

/* Euclidean distance to the box (0 inside); closest_u/closest_v
 * (optional) receive the nearest box point. */
GK_API double gk_unsigned_distance(double u, double v, gk_box b, double* closest_u,
                                   double* closest_v);

/* Negative outside, distance to the nearest edge inside. */
GK_API double gk_signed_distance(double u, double v, gk_box b);

/* Largest distance to b from any point of the w x h image; fails when
 * b is not inside the image. */
GK_API gk_status gk_max_distance(gk_box b, double image_w, double image_h, double* out);

/* Signed distance normalized into [-1, 1]. */
GK_API gk_status gk_normalized_distance(double u, double v, gk_box b, double image_w,
                                        double image_h, double* out);

/* ------------------------------------------------------------------ */
/* rewards                                                             */
/* ------------------------------------------------------------------ */

/* Shaped six-band reward of the normalized distance; fails when d_norm
 * is outside [-1, 1]. */
GK_API gk_status gk_discrete_reward(double d_norm, double* out);
GK_API gk_status gk_continuous_reward(double u, double v, gk_box b, double image_w,
                                      double image_h, double* out);
GK_API double gk_binary_reward(double u, double v, gk_box b);

/* Leave-one-out advantages for one rollout group; fails when n < 2.
 * advantages must hold n doubles. */
GK_API gk_status gk_rloo_advantages(const double* rewards, size_t n, double* advantages);

/* One scoring-protocol exchange: newline-delimited JSON request in,
 * response line out (no trailing newline). Protocol-level problems
 * come back as {"id":...,"error":...} response lines, not failures. */
GK_API gk_status gk_reward_process_line(const char* request_line, char** response_line);

/* Blocking serve loops for the scoring protocol. */
GK_API gk_status gk_reward_serve_stdio(void);
GK_API gk_status gk_reward_serve_tcp(const char* host, int port);

/* ------------------------------------------------------------------ */
/* dedup                                                               */
/* ------------------------------------------------------------------ */

/* 64-bit perceptual hash of an image file (whole frame). */
GK_API gk_status gk_phash_file(const char* image_path, uint64_t* out);
GK_API unsigned gk_hamming(uint64_t a, uint64_t b);
GK_API gk_status gk_normalize_label(const char* label, char** out);

/* config_json: {"hamming_threshold":5,"label_mode":"normalized"|"exact",
 *               "min_crop_px":8,"workers":0,"seed":17,
 *               "include_members":false}
 * result_json: {"unique_ids":[...],"report":{...}} */
GK_API gk_status gk_dedup_run(const gk_corpus* c, const char* config_json, char** result_json);

/* ------------------------------------------------------------------ */
/* instruction synthesis                                               */
/* ------------------------------------------------------------------ */

/* config_json: {"kinds":"direct,functional,spatial","seed":7,
 *               "max_gap_px":200,"workers":0,"templates_dir":"...",
 *               "regen_budget":0}
 * unique_path: dedup output (JSONL of {"element_id":...}); empty or
 * NULL means every element. Writes <out_dir>/instructions.jsonl and
 * returns a summary document. */
GK_API gk_status gk_synth_run(const gk_corpus* c, const char* unique_path,
                              const char* config_json, const char* out_dir, char** summary_json);

/* config_json: {"mix":[0.5,0.35,0.15],"total":700000,"seed":7} */
GK_API gk_status gk_export_sft(const char* pool_dir, const char* config_json,
                               const char* out_path, char** summary_json);

/* k elements sampled uniformly from the pool minus the element ids used
 * by the SFT export at exclude_path (pass NULL to exclude nothing). */
GK_API gk_status gk_select_rl(const char* pool_path, const char* exclude_path, size_t k,
                              uint64_t seed, const char* out_path, char** summary_json);

/* ------------------------------------------------------------------ */
/* evaluation                                                          */
/* ------------------------------------------------------------------ */

/* config_json: {"coord_space":"pixel"|"unit"|"milli","strict_ids":false,
 *               "exclusive_bounds":false,"first_pair":false} */
GK_API gk_status gk_eval_run(const char* benchmark_path, const char* predictions_path,
                             const char* config_json, char** report_json);

/* layout_csv: comma-separated tag keys, e.g. "platform,modality". */
GK_API gk_status gk_eval_table(const char* report_json, const char* layout_csv,
                               char** table_text);

/* ------------------------------------------------------------------ */
/* corpus statistics                                                   */
/* ------------------------------------------------------------------ */

GK_API gk_status gk_stats_compute(const gk_corpus* c, char** stats_json);
GK_API gk_status gk_stats_table(const char* stats_json, const char* corpus_name,
                                char** table_text);

#ifdef __cplusplus
}
#endif

#endif /* GROUNDKIT_H */
