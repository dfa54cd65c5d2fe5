#include <math.h>
#include <stdio.h>

#include "skinbem.h"

int main(void) {
    SkbMesh *mesh = NULL;
    SkbSolution *sol = NULL;
    if (skb_mesh_cube(2.0, 1, &mesh) != SKB_STATUS_OK) {
        fprintf(stderr, "mesh: %s\n", skb_last_error());
        return 1;
    }
    if (skb_solve_plane_wave(mesh, 0.5, &sol) != SKB_STATUS_OK) {
        fprintf(stderr, "solve: %s\n", skb_last_error());
        return 1;
    }
    size_t n = 0, m = 0;
    skb_solution_num_dofs(sol, &n, &m);
    double x[3] = {6.0, 0.0, 0.0};
    double e[6];
    if (skb_solution_electric_field(sol, x, 1, e) != SKB_STATUS_OK) {
        fprintf(stderr, "field: %s\n", skb_last_error());
        return 1;
    }
    double near[3] = {2.0, 0.1, 0.1};
    SkbStatus s = skb_solution_electric_field(sol, near, 1, e);
    printf("%s %zu %zu %.6e %d\n", skb_version(), n, m, skb_solution_energy(sol), (int)s);
    skb_solution_free(sol);
    skb_mesh_free(mesh);
    return s == SKB_STATUS_NEAR_SURFACE && isfinite(e[0]) ? 0 : 1;
}
