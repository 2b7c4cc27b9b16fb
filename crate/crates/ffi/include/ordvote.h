#ifndef ORDVOTE_H
#define ORDVOTE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call. Values 1 to 3 match the command-line exit codes.
 */
typedef enum OrdvoteStatus {
  ORDVOTE_STATUS_OK = 0,
  /**
   * Runtime failure, including invariant violations.
   */
  ORDVOTE_STATUS_RUNTIME = 1,
  /**
   * Malformed or inconsistent input data.
   */
  ORDVOTE_STATUS_DATA = 2,
  /**
   * Invalid settings.
   */
  ORDVOTE_STATUS_CONFIG = 3,
  /**
   * A required pointer was null or a string was not UTF-8.
   */
  ORDVOTE_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The engine panicked; the handle involved should be freed and not reused.
   */
  ORDVOTE_STATUS_PANIC = 5,
} OrdvoteStatus;

/**
 * A loaded, validated dataset.
 */
typedef struct OrdvoteDataset OrdvoteDataset;

/**
 * Posterior draws of every chain.
 */
typedef struct OrdvoteDraws OrdvoteDraws;

/**
 * Sampler settings for [`ordvote_fit`].
 */
typedef struct OrdvoteFitOptions {
  /**
   * Number of latent regions.
   */
  size_t k;
  size_t chains;
  /**
   * Sweeps after burn-in.
   */
  size_t iterations;
  size_t burn_in;
  size_t thin;
  uint64_t seed;
  /**
   * Chains run concurrently.
   */
  size_t jobs;
} OrdvoteFitOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null if the last
 * call succeeded. The pointer stays valid until the next call on this thread.
 */
const char *ordvote_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *ordvote_version(void);

/**
 * Loads `votes.csv`, `covariates.csv`, `adjacency.csv`, `migration.csv` (and
 * `scale.txt` if present) from `dir`.
 *
 * # Safety
 * `dir` must be a valid nul-terminated string and `out` a valid pointer.
 */
enum OrdvoteStatus ordvote_dataset_load(const char *dir, struct OrdvoteDataset **out);

/**
 * Releases a dataset. Null is ignored.
 *
 * # Safety
 * `dataset` must be null or a handle from [`ordvote_dataset_load`] not yet freed.
 */
void ordvote_dataset_free(struct OrdvoteDataset *dataset);

/**
 * Writes the numbers of voters, performers, observed pairs and records.
 * Any output pointer may be null.
 *
 * # Safety
 * `dataset` must be a live handle; non-null outputs must be valid.
 */
enum OrdvoteStatus ordvote_dataset_dims(const struct OrdvoteDataset *dataset,
                                        size_t *voters,
                                        size_t *performers,
                                        size_t *pairs,
                                        size_t *records);

/**
 * Category probabilities of the cumulative-logit model at linear predictor
 * `mu`. `out` receives `n_cutpoints + 1` values.
 *
 * # Safety
 * `cutpoints` must point to `n_cutpoints` doubles and `out` to `out_len`.
 */
enum OrdvoteStatus ordvote_category_probs(const double *cutpoints,
                                          size_t n_cutpoints,
                                          double mu,
                                          double *out,
                                          size_t out_len);

/**
 * Number of regions with the smallest DIC; ties go to the smaller number.
 *
 * # Safety
 * `ks` and `dics` must point to `n` values; `out_k` must be valid.
 */
enum OrdvoteStatus ordvote_select_model(const size_t *ks,
                                        const double *dics,
                                        size_t n,
                                        size_t *out_k);

/**
 * Default settings: 4 regions, 2 chains, 11000 sweeps after 1000 burn-in,
 * thinning 20, seed 1, 2 jobs.
 */
struct OrdvoteFitOptions ordvote_fit_options_default(void);

/**
 * Runs the sampler. `options` may be null for the defaults.
 *
 * # Safety
 * `dataset` must be a live handle, `options` null or valid, `out` valid.
 */
enum OrdvoteStatus ordvote_fit(const struct OrdvoteDataset *dataset,
                               const struct OrdvoteFitOptions *options,
                               struct OrdvoteDraws **out);

/**
 * Releases draws. Null is ignored.
 *
 * # Safety
 * `draws` must be null or a handle from [`ordvote_fit`] not yet freed.
 */
void ordvote_draws_free(struct OrdvoteDraws *draws);

/**
 * Number of chains and stored draws per chain.
 *
 * # Safety
 * `draws` must be a live handle; non-null outputs must be valid.
 */
enum OrdvoteStatus ordvote_draws_shape(const struct OrdvoteDraws *draws,
                                       size_t *chains,
                                       size_t *per_chain);

/**
 * DIC and effective number of parameters of `draws` on `dataset`.
 *
 * # Safety
 * Both handles must be live; `dic_out` and `p_d_out` must be valid.
 */
enum OrdvoteStatus ordvote_draws_dic(const struct OrdvoteDraws *draws,
                                     const struct OrdvoteDataset *dataset,
                                     double *dic_out,
                                     double *p_d_out);

/**
 * Writes the draw archive into `dir`. When `dataset` is non-null the DIC is
 * stored in the archive metadata.
 *
 * # Safety
 * `draws` must be a live handle, `dataset` null or live, `dir` a valid string.
 */
enum OrdvoteStatus ordvote_draws_write(const struct OrdvoteDraws *draws,
                                       const struct OrdvoteDataset *dataset,
                                       const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORDVOTE_H */
