//! Lowest-order Raviart–Thomas currents and continuous bilinear scalars.
//!
//! Local edges of the reference square are numbered bottom (`x̂₂ = 0`),
//! right (`x̂₁ = 1`), top (`x̂₂ = 1`), left (`x̂₁ = 0`). The local RT field
//! of edge `i` has unit outward flux through edge `i`, no flux through the
//! other three, and reference divergence `+1`. Globally, an edge function
//! flows out of the panel that traverses the edge from its lower to its
//! higher vertex index.

use crate::geometry::{PanelChart, SurfaceMesh};
use crate::{BemError, Result, Vec3};

/// Reference component carried by each local RT field (`0` → `x̂₁`, `1` → `x̂₂`).
pub const RT_DIRECTION: [usize; 4] = [1, 0, 1, 0];

/// Coefficients of the nonzero RT component in the Q1 corner basis.
///
/// `ψ̂ᵢ = (Σ_a RT_IN_Q1[i][a] φ̂_a) e_{RT_DIRECTION[i]}`.
pub const RT_IN_Q1: [[f64; 4]; 4] = [
    [-1.0, -1.0, 0.0, 0.0],
    [0.0, 1.0, 1.0, 0.0],
    [0.0, 0.0, 1.0, 1.0],
    [-1.0, 0.0, 0.0, -1.0],
];

/// Outward unit normals of the reference edges.
pub const REFERENCE_EDGE_NORMALS: [[f64; 2]; 4] = [[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];

/// Local RT field `i` on the reference square.
pub fn rt0_reference_basis(i: usize, xh: [f64; 2]) -> Result<[f64; 2]> {
    Ok(match i {
        0 => [0.0, xh[1] - 1.0],
        1 => [xh[0], 0.0],
        2 => [0.0, xh[1]],
        3 => [xh[0] - 1.0, 0.0],
        _ => return Err(BemError::LocalIndex(i)),
    })
}

/// Reference divergence of every local RT field.
pub const RT_REFERENCE_DIVERGENCE: f64 = 1.0;

/// Contravariant (flux-preserving) transform `ψ = A ψ̂ / |det A|`.
#[inline]
pub fn push_forward_rt(chart: &PanelChart, psi_hat: [f64; 2]) -> Vec3 {
    chart.apply(psi_hat) / chart.det
}

/// Surface divergence of local RT field `i` on a panel (constant).
pub fn surface_divergence_rt(chart: &PanelChart, i: usize) -> Result<f64> {
    if i >= 4 {
        return Err(BemError::LocalIndex(i));
    }
    Ok(RT_REFERENCE_DIVERGENCE / chart.det)
}

/// Bilinear corner functions on the reference square.
#[inline]
pub fn q1_reference_basis(xh: [f64; 2]) -> [f64; 4] {
    let (x, y) = (xh[0], xh[1]);
    [(1.0 - x) * (1.0 - y), x * (1.0 - y), x * y, (1.0 - x) * y]
}

/// Local-to-global index map with orientation signs and its inverse.
#[derive(Debug, Clone)]
pub struct DofMap {
    local: Vec<[(usize, f64); 4]>,
    inverse: Vec<Vec<(usize, usize)>>,
}

impl DofMap {
    fn from_local(local: Vec<[(usize, f64); 4]>, dim: usize) -> Self {
        let mut inverse = vec![Vec::new(); dim];
        for (k, entries) in local.iter().enumerate() {
            for (i, &(g, _)) in entries.iter().enumerate() {
                inverse[g].push((k, i));
            }
        }
        DofMap { local, inverse }
    }

    /// `(global index, sign)` of local function `i` on panel `k`.
    #[inline]
    pub fn global(&self, k: usize, i: usize) -> (usize, f64) {
        self.local[k][i]
    }

    #[inline]
    pub fn panel(&self, k: usize) -> &[(usize, f64); 4] {
        &self.local[k]
    }

    /// All `(panel, local index)` pairs contributing to global function `g`.
    pub fn inverse(&self, g: usize) -> &[(usize, usize)] {
        &self.inverse[g]
    }

    pub fn dim(&self) -> usize {
        self.inverse.len()
    }
}

#[derive(Debug, Clone)]
pub struct VectorSpaceRT0 {
    pub dim: usize,
}

#[derive(Debug, Clone)]
pub struct ScalarSpaceQ1 {
    pub dim: usize,
}

/// Both discrete spaces on one mesh.
#[derive(Debug, Clone)]
pub struct DiscreteSpaces {
    pub rt: VectorSpaceRT0,
    pub q1: ScalarSpaceQ1,
    pub rt_map: DofMap,
    pub q1_map: DofMap,
}

impl DiscreteSpaces {
    pub fn new(mesh: &SurfaceMesh) -> Result<Self> {
        let (rt, q1, rt_map, q1_map) = build_dof_maps(mesh)?;
        Ok(DiscreteSpaces { rt, q1, rt_map, q1_map })
    }

    pub fn n_rt(&self) -> usize {
        self.rt.dim
    }

    pub fn n_q1(&self) -> usize {
        self.q1.dim
    }

    pub fn n_total(&self) -> usize {
        self.rt.dim + self.q1.dim
    }

    /// `J_h` at reference point `xh` of panel `k`.
    pub fn current_at(&self, mesh: &SurfaceMesh, k: usize, xh: [f64; 2], lambda: &[crate::Complex64]) -> crate::CVec3 {
        let chart = mesh.chart(k);
        let mut j = crate::CVec3::zeros();
        for i in 0..4 {
            let (g, s) = self.rt_map.global(k, i);
            let psi = push_forward_rt(chart, rt0_reference_basis(i, xh).unwrap()) * s;
            j += psi.map(|c| lambda[g] * c);
        }
        j
    }

    /// `M_h` at reference point `xh` of panel `k`.
    pub fn scalar_at(&self, k: usize, xh: [f64; 2], mu: &[crate::Complex64]) -> crate::Complex64 {
        let phi = q1_reference_basis(xh);
        (0..4).map(|a| mu[self.q1_map.global(k, a).0] * phi[a]).sum()
    }
}

/// Builds the RT (one function per edge) and Q1 (one per vertex) index maps.
pub fn build_dof_maps(mesh: &SurfaceMesh) -> Result<(VectorSpaceRT0, ScalarSpaceQ1, DofMap, DofMap)> {
    let mut counts = vec![0usize; mesh.num_edges()];
    let mut rt_local = Vec::with_capacity(mesh.num_panels());
    let mut q1_local = Vec::with_capacity(mesh.num_panels());
    for (k, p) in mesh.panels().iter().enumerate() {
        let edges = mesh.panel_edges(k);
        let mut rt = [(0, 0.0); 4];
        for i in 0..4 {
            let sign = if p[i] < p[(i + 1) % 4] { 1.0 } else { -1.0 };
            rt[i] = (edges[i], sign);
            counts[edges[i]] += 1;
        }
        rt_local.push(rt);
        q1_local.push(p.map(|v| (v, 1.0)));
    }
    if let Some(e) = counts.iter().position(|&c| c != 2) {
        return Err(BemError::NonManifoldEdge { edge: mesh.edges()[e].vertices, count: counts[e] });
    }
    let rt_map = DofMap::from_local(rt_local, mesh.num_edges());
    let q1_map = DofMap::from_local(q1_local, mesh.num_vertices());
    Ok((
        VectorSpaceRT0 { dim: mesh.num_edges() },
        ScalarSpaceQ1 { dim: mesh.num_vertices() },
        rt_map,
        q1_map,
    ))
}
