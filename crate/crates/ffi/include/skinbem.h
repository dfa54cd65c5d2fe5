#ifndef SKINBEM_H
#define SKINBEM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum SkbStatus {
  SKB_STATUS_OK = 0,
  SKB_STATUS_NULL_POINTER = 1,
  SKB_STATUS_INVALID_ARGUMENT = 2,
  SKB_STATUS_INVALID_MESH = 3,
  SKB_STATUS_SINGULAR_MATRIX = 4,
  SKB_STATUS_TOO_LARGE = 5,
  SKB_STATUS_NO_CONVERGENCE = 6,
  SKB_STATUS_NEAR_SURFACE = 7,
  SKB_STATUS_IO = 8,
  SKB_STATUS_INTERNAL = 9,
} SkbStatus;

/*
 A closed quadrilateral surface mesh.
 */
typedef struct SkbMesh SkbMesh;

/*
 Densities of one solve together with the mesh they live on.
 */
typedef struct SkbSolution SkbSolution;

/*
 Incident field callback: writes `Re E⁰₁, Im E⁰₁, …, Im E⁰₃` for the point
 `x[0..3]` into `out[0..6]`.
 */
typedef void (*SkbIncidentFn)(const double *x, double *out, void *user);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; valid until the next call.
 */
const char *skb_last_error(void);

/*
 Library version as a static string.
 */
const char *skb_version(void);

/*
 Uniformly refined cube `[-h, h]³` with `6·4^level` panels.

 # Safety
 `out` must be a valid pointer.
 */
enum SkbStatus skb_mesh_cube(double half_width, uint32_t level, struct SkbMesh **out);

/*
 Mesh from `n_vertices` points (`3·n_vertices` doubles) and `n_panels`
 counterclockwise quadrilaterals (`4·n_panels` vertex indices).

 # Safety
 The arrays must hold the stated number of entries and `out` must be valid.
 */
enum SkbStatus skb_mesh_from_quads(const double *vertices,
                                   size_t n_vertices,
                                   const size_t *panels,
                                   size_t n_panels,
                                   struct SkbMesh **out);

/*
 # Safety
 `mesh` must come from this library or be null.
 */
size_t skb_mesh_num_panels(const struct SkbMesh *mesh);

/*
 # Safety
 `mesh` must come from this library or be null; it is invalid afterwards.
 */
void skb_mesh_free(struct SkbMesh *mesh);

/*
 Solves the scattering problem for the plane wave `e₃ e^{iαx₁}`.

 # Safety
 `mesh` and `out` must be valid pointers.
 */
enum SkbStatus skb_solve_plane_wave(const struct SkbMesh *mesh,
                                    double alpha,
                                    struct SkbSolution **out);

/*
 Solves the scattering problem for a user-supplied incident field. The
 callback is invoked sequentially on the calling thread.

 # Safety
 `mesh` and `out` must be valid pointers; `incident` must be safe to call
 with `user`.
 */
enum SkbStatus skb_solve_incident(const struct SkbMesh *mesh,
                                  double alpha,
                                  SkbIncidentFn incident,
                                  void *user,
                                  struct SkbSolution **out);

/*
 Solves the manufactured benchmark on the cube `[-2, 2]³` at `level`.

 # Safety
 `out` must be a valid pointer.
 */
enum SkbStatus skb_solve_manufactured(uint32_t level, double alpha, struct SkbSolution **out);

/*
 Energy functional `C_h = −Re(ℓᵀλ)`.

 # Safety
 `solution` must be a valid handle.
 */
double skb_solution_energy(const struct SkbSolution *solution);

/*
 Numbers of current (edge) and density (vertex) unknowns.

 # Safety
 All pointers must be valid.
 */
enum SkbStatus skb_solution_num_dofs(const struct SkbSolution *solution,
                                     size_t *n_current,
                                     size_t *n_density);

/*
 Relative residual of the linear solve.

 # Safety
 `solution` must be a valid handle or null.
 */
double skb_solution_residual(const struct SkbSolution *solution);

/*
 Copies the coefficients as interleaved `(re, im)` pairs: `2·n_current`
 doubles into `current` and `2·n_density` into `density`.

 # Safety
 The buffers must be large enough.
 */
enum SkbStatus skb_solution_coefficients(const struct SkbSolution *solution,
                                         double *current,
                                         double *density);

/*
 Scattered electric field at `n` points (`3·n` doubles); writes `6·n`
 doubles `Re E₁, Im E₁, …, Im E₃` per point. Points closer to the surface
 than a tenth of the local panel size are rejected.

 # Safety
 The buffers must hold the stated number of entries.
 */
enum SkbStatus skb_solution_electric_field(const struct SkbSolution *solution,
                                           const double *points,
                                           size_t n,
                                           double *out);

/*
 # Safety
 `solution` must come from this library or be null; it is invalid afterwards.
 */
void skb_solution_free(struct SkbSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKINBEM_H */
