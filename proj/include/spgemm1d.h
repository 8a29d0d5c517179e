/* C interface to the spgemm1d engine: opaque handles, status codes, and a
 * thread-local last-error message. All matrices cross this boundary with
 * double values; integer and boolean semirings are selected per run and the
 * engine converts internally. */

#ifndef SPGEMM1D_H
#define SPGEMM1D_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sp1d_status {
    SP1D_OK = 0,
    SP1D_ERR_INVALID_ARGUMENT = 1,
    SP1D_ERR_INDEX = 2,
    SP1D_ERR_SHAPE = 3,
    SP1D_ERR_PARSE = 4,
    SP1D_ERR_CONFIG = 5,
    SP1D_ERR_IO = 6,
    SP1D_ERR_INTERNAL = 7
} sp1d_status;

typedef enum sp1d_semiring {
    SP1D_SEMIRING_REAL_PLUS_TIMES = 0,
    SP1D_SEMIRING_INT_PLUS_TIMES = 1,
    SP1D_SEMIRING_BOOL_OR_AND = 2
} sp1d_semiring;

typedef enum sp1d_galerkin_mode {
    SP1D_GALERKIN_ONEDIM = 0,
    SP1D_GALERKIN_OUTER_PRODUCT_RIGHT = 1
} sp1d_galerkin_mode;

typedef struct sp1d_matrix sp1d_matrix;
typedef struct sp1d_config sp1d_config;
typedef struct sp1d_report sp1d_report;

/* Message for the most recent failing call on this thread. */
const char* sp1d_last_error(void);

/* ---- matrices -------------------------------------------------------- */

sp1d_status sp1d_matrix_read_mm(const char* path, sp1d_matrix** out);
sp1d_status sp1d_matrix_write_mm(const sp1d_matrix* m, const char* path);
sp1d_status sp1d_matrix_from_triplets(int64_t nrows, int64_t ncols, int64_t nnz,
                                      const int64_t* rows, const int64_t* cols,
                                      const double* vals, sp1d_matrix** out);
sp1d_status sp1d_matrix_dims(const sp1d_matrix* m, int64_t* nrows, int64_t* ncols, int64_t* nnz);
/* Buffers must hold nnz elements each; any of them may be NULL to skip. */
sp1d_status sp1d_matrix_triplets(const sp1d_matrix* m, int64_t* rows, int64_t* cols, double* vals);
void sp1d_matrix_free(sp1d_matrix* m);

/* ---- run configuration ----------------------------------------------- */

sp1d_config* sp1d_config_new(void); /* procs=1, blocks=2048, identity strategy */
void sp1d_config_free(sp1d_config* c);
sp1d_status sp1d_config_set_procs(sp1d_config* c, int64_t procs);
sp1d_status sp1d_config_set_blocks(sp1d_config* c, int64_t blocks);
sp1d_status sp1d_config_set_workers(sp1d_config* c, int workers);
sp1d_status sp1d_config_set_semiring(sp1d_config* c, sp1d_semiring sr);
sp1d_status sp1d_config_set_strategy_identity(sp1d_config* c);
sp1d_status sp1d_config_set_strategy_random(sp1d_config* c, uint64_t seed);
sp1d_status sp1d_config_set_strategy_partition_file(sp1d_config* c, const char* path);
sp1d_status sp1d_config_set_symmetrize(sp1d_config* c, int enable);
sp1d_status sp1d_config_set_oracle(sp1d_config* c, int enable);
sp1d_status sp1d_config_set_naive(sp1d_config* c, int enable);
sp1d_status sp1d_config_set_threshold(sp1d_config* c, double threshold);
sp1d_status sp1d_config_set_timings(sp1d_config* c, int enable);

/* ---- runs -------------------------------------------------------------
 * Every run hands back an optional report handle (pass NULL to skip); the
 * report serializes to deterministic JSON. */

sp1d_status sp1d_multiply(const sp1d_matrix* a, const sp1d_matrix* b, const sp1d_config* c,
                          sp1d_matrix** out, sp1d_report** report);
sp1d_status sp1d_square(const sp1d_matrix* a, const sp1d_config* c, sp1d_matrix** out,
                        sp1d_report** report);
/* Distance-2 MIS restriction operator: one entry per row, value 1. */
sp1d_status sp1d_mis2(const sp1d_matrix* a, sp1d_matrix** restriction);
/* r may be NULL: a restriction operator is generated via MIS-2 aggregation.
 * r_used (optional) receives the operator that was applied. */
sp1d_status sp1d_galerkin(const sp1d_matrix* a, const sp1d_matrix* r, sp1d_galerkin_mode mode,
                          const sp1d_config* c, sp1d_matrix** out, sp1d_matrix** r_used,
                          sp1d_report** report);
/* scores must hold nrows(g) doubles. */
sp1d_status sp1d_bc(const sp1d_matrix* g, int64_t num_sources, int64_t batch_size, uint64_t seed,
                    const sp1d_config* c, double* scores, sp1d_report** report);
/* Planning-only communication analysis of a*b (b NULL means b = a). */
sp1d_status sp1d_analyze(const sp1d_matrix* a, const sp1d_matrix* b, const sp1d_config* c,
                         int* advisory, double* ratio, sp1d_report** report);
/* Built-in greedy partitioner; part_ids must hold ncols(a) entries. */
sp1d_status sp1d_partition(const sp1d_matrix* a, int64_t parts, int64_t* part_ids,
                           sp1d_report** report);

/* ---- reports ----------------------------------------------------------- */

sp1d_status sp1d_report_json(const sp1d_report* r, char** json_out);
void sp1d_report_free(sp1d_report* r);
void sp1d_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* SPGEMM1D_H */
