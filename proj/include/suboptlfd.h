/* suboptlfd: reward learning from suboptimal demonstrations.
 *
 * C interface to the pipeline runner and a few numeric entry points. All
 * functions are synchronous. A context carries the last error message and
 * the file list of the last run; contexts are not thread-safe, use one per
 * thread. */

#ifndef SUBOPTLFD_H
#define SUBOPTLFD_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SLFD_API __declspec(dllexport)
#else
#define SLFD_API __attribute__((visibility("default")))
#endif

typedef enum slfd_status {
    SLFD_OK = 0,
    SLFD_ERR_INVALID = 1, /* bad arguments, config, or input files */
    SLFD_ERR_RUNTIME = 2  /* execution failure */
} slfd_status;

typedef struct slfd_ctx slfd_ctx;

SLFD_API slfd_ctx* slfd_ctx_new(void);
SLFD_API void slfd_ctx_free(slfd_ctx* ctx);

/* Message for the most recent failure on this context; empty string if the
 * last call succeeded. The pointer stays valid until the next call. */
SLFD_API const char* slfd_ctx_last_error(const slfd_ctx* ctx);

SLFD_API const char* slfd_version(void);

/* Runs one experiment stage ("demo-gen", "bc", "airl", "noise-gen", "fit",
 * "ssrr", "drex", "rl", "eval") or the full comparison grid ("pipeline").
 * config_path names a JSON config file. out_dir, when non-NULL, overrides
 * the config's output directory; seed >= 0 overrides the root seed. */
SLFD_API slfd_status slfd_run(slfd_ctx* ctx, const char* stage, const char* config_path,
                              const char* out_dir, long long seed);

/* Files written by the last successful slfd_run on this context. */
SLFD_API int slfd_output_count(const slfd_ctx* ctx);
SLFD_API const char* slfd_output_path(const slfd_ctx* ctx, int index);

/* Least-squares fit of c/(1+exp(-k(x-x0)))+y0; params_out receives
 * {c, k, x0, y0}. Requires n >= 4 with at least two distinct x. */
SLFD_API slfd_status slfd_fit_sigmoid(slfd_ctx* ctx, const double* xs, const double* ys, int n,
                                      double params_out[4], double* r_squared_out);

/* Evaluates the four-parameter sigmoid at x. */
SLFD_API slfd_status slfd_sigmoid_eval(const double params[4], double x, double* out);

/* Pearson correlation coefficient; fails on zero-variance input. */
SLFD_API slfd_status slfd_pearson(slfd_ctx* ctx, const double* xs, const double* ys, int n,
                                  double* out);

/* Numerically minimizes the three-trajectory pairwise ranking loss over the
 * middle cumulative reward, the outer two held fixed. */
SLFD_API double slfd_rank_middle_minimizer(double r_first, double r_last);

#ifdef __cplusplus
}
#endif

#endif /* SUBOPTLFD_H */
