//! Closed quadrilateral surface meshes and per-panel affine charts.
//!
//! Every panel is a flat parallelogram `x = a + A x̂`, `x̂ ∈ [0,1]²`, with its
//! four vertices listed counter-clockwise when seen from outside, so that
//! `a₁ × a₂` points out of the enclosed body.

use std::collections::HashMap;
use std::io::Write;

use crate::{BemError, Result, Vec3};

/// Reference-square corners in panel vertex order.
pub const REFERENCE_CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

/// Affine map of the unit square onto one panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelChart {
    pub anchor: Vec3,
    pub a1: Vec3,
    pub a2: Vec3,
    pub normal: Vec3,
    /// `‖a₁ × a₂‖`, the panel area.
    pub det: f64,
}

impl PanelChart {
    pub fn from_vectors(anchor: Vec3, a1: Vec3, a2: Vec3) -> Self {
        let cross = a1.cross(&a2);
        let det = cross.norm();
        PanelChart { anchor, a1, a2, normal: cross / det, det }
    }

    #[inline]
    pub fn map(&self, xh: [f64; 2]) -> Vec3 {
        self.anchor + self.a1 * xh[0] + self.a2 * xh[1]
    }

    /// Image of a reference vector under the linear part `A`.
    #[inline]
    pub fn apply(&self, v: [f64; 2]) -> Vec3 {
        self.a1 * v[0] + self.a2 * v[1]
    }

    pub fn corner(&self, i: usize) -> Vec3 {
        self.map(REFERENCE_CORNERS[i])
    }

    pub fn centroid(&self) -> Vec3 {
        self.map([0.5, 0.5])
    }

    /// Longest diagonal.
    pub fn diameter(&self) -> f64 {
        (self.a1 + self.a2).norm().max((self.a1 - self.a2).norm())
    }

    /// Axis-aligned bounding box of the image of `[o, o+s]²`.
    pub fn sub_bounds(&self, origin: [f64; 2], size: f64) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for c in REFERENCE_CORNERS {
            let p = self.map([origin[0] + size * c[0], origin[1] + size * c[1]]);
            for d in 0..3 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }

    /// Distance from `x` to the panel.
    pub fn distance_to(&self, x: &Vec3) -> f64 {
        // Minimise |a + A x̂ - x| over the square: unconstrained projection,
        // falling back to the four edges when it lands outside.
        let rel = x - self.anchor;
        let g11 = self.a1.dot(&self.a1);
        let g12 = self.a1.dot(&self.a2);
        let g22 = self.a2.dot(&self.a2);
        let b1 = self.a1.dot(&rel);
        let b2 = self.a2.dot(&rel);
        let det = g11 * g22 - g12 * g12;
        let u = (g22 * b1 - g12 * b2) / det;
        let v = (g11 * b2 - g12 * b1) / det;
        if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v) {
            return (self.map([u, v]) - x).norm();
        }
        (0..4)
            .map(|i| {
                let p = self.corner(i);
                let q = self.corner((i + 1) % 4);
                segment_distance(x, &p, &q)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn segment_distance(x: &Vec3, p: &Vec3, q: &Vec3) -> f64 {
    let d = q - p;
    let t = ((x - p).dot(&d) / d.dot(&d)).clamp(0.0, 1.0);
    (p + d * t - x).norm()
}

/// Distance between two axis-aligned boxes.
pub fn box_distance(a: &([f64; 3], [f64; 3]), b: &([f64; 3], [f64; 3])) -> f64 {
    let mut s = 0.0;
    for d in 0..3 {
        let gap = (a.0[d] - b.1[d]).max(b.0[d] - a.1[d]).max(0.0);
        s += gap * gap;
    }
    s.sqrt()
}

/// A mesh edge, stored with its vertices in increasing index order.
///
/// `panels[0]` traverses the edge from `vertices[0]` to `vertices[1]`
/// (the global orientation); `panels[1]` traverses it backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub panels: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    vertices: Vec<Vec3>,
    panels: Vec<[usize; 4]>,
    edges: Vec<Edge>,
    panel_edges: Vec<[usize; 4]>,
    charts: Vec<PanelChart>,
}

impl SurfaceMesh {
    /// Builds a mesh from vertices and counter-clockwise panels, deriving
    /// the edge table and checking closedness, orientation and flatness.
    pub fn new(vertices: Vec<Vec3>, panels: Vec<[usize; 4]>) -> Result<Self> {
        let nv = vertices.len();
        let mut charts = Vec::with_capacity(panels.len());
        for (k, p) in panels.iter().enumerate() {
            if p.iter().any(|&v| v >= nv) {
                return Err(BemError::InvalidArgument(format!(
                    "panel {k} references a missing vertex"
                )));
            }
            let v = p.map(|i| vertices[i]);
            let chart = PanelChart::from_vectors(v[0], v[1] - v[0], v[3] - v[0]);
            let scale = chart.diameter();
            let planar = (v[0] + chart.a1 + chart.a2 - v[2]).norm() <= 1e-10 * scale;
            if !planar || !(chart.det > 0.0) {
                return Err(BemError::NonParallelogram { panel: k });
            }
            charts.push(chart);
        }

        // (lower, higher) -> [(panel, local edge, forward)]
        let mut incidence: HashMap<(usize, usize), Vec<(usize, usize, bool)>> = HashMap::new();
        for (k, p) in panels.iter().enumerate() {
            for i in 0..4 {
                let (a, b) = (p[i], p[(i + 1) % 4]);
                let key = (a.min(b), a.max(b));
                incidence.entry(key).or_default().push((k, i, a < b));
            }
        }
        let mut keys: Vec<_> = incidence.keys().copied().collect();
        keys.sort_unstable();
        let mut edges = Vec::with_capacity(keys.len());
        let mut panel_edges = vec![[usize::MAX; 4]; panels.len()];
        for key in keys {
            let inc = &incidence[&key];
            if inc.len() != 2 {
                return Err(BemError::NonManifoldEdge { edge: [key.0, key.1], count: inc.len() });
            }
            let (first, second) = (inc[0], inc[1]);
            if first.2 == second.2 {
                return Err(BemError::InconsistentOrientation { first: first.0, second: second.0 });
            }
            let (fwd, bwd) = if first.2 { (first, second) } else { (second, first) };
            let e = edges.len();
            panel_edges[fwd.0][fwd.1] = e;
            panel_edges[bwd.0][bwd.1] = e;
            edges.push(Edge { vertices: [key.0, key.1], panels: [fwd.0, bwd.0] });
        }
        Ok(SurfaceMesh { vertices, panels, edges, panel_edges, charts })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn panels(&self) -> &[[usize; 4]] {
        &self.panels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Global edge index of local edge `i` (bottom, right, top, left) of panel `k`.
    pub fn panel_edges(&self, k: usize) -> [usize; 4] {
        self.panel_edges[k]
    }

    pub fn num_panels(&self) -> usize {
        self.panels.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn chart(&self, k: usize) -> &PanelChart {
        &self.charts[k]
    }

    pub fn charts(&self) -> &[PanelChart] {
        &self.charts
    }

    pub fn area(&self) -> f64 {
        self.charts.iter().map(|c| c.det).sum()
    }

    /// Largest panel diameter.
    pub fn max_diameter(&self) -> f64 {
        self.charts.iter().map(PanelChart::diameter).fold(0.0, f64::max)
    }

    /// Largest panel side length (the `h` of a uniform refinement).
    pub fn mesh_size(&self) -> f64 {
        self.charts
            .iter()
            .map(|c| c.a1.norm().max(c.a2.norm()))
            .fold(0.0, f64::max)
    }

    /// Distance from `x` to the surface and the size of the nearest panel.
    pub fn nearest_panel(&self, x: &Vec3) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (k, c) in self.charts.iter().enumerate() {
            let d = c.distance_to(x);
            if d < best.1 {
                best = (k, d);
            }
        }
        best
    }

    /// Splits every panel into four congruent children.
    pub fn refine_uniform(&self) -> SurfaceMesh {
        let mut vertices = self.vertices.clone();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut panels = Vec::with_capacity(4 * self.panels.len());
        for p in &self.panels {
            let mut mid = [0usize; 4];
            for i in 0..4 {
                let (a, b) = (p[i], p[(i + 1) % 4]);
                let key = (a.min(b), a.max(b));
                mid[i] = *midpoints.entry(key).or_insert_with(|| {
                    vertices.push((self.vertices[a] + self.vertices[b]) * 0.5);
                    vertices.len() - 1
                });
            }
            vertices.push((self.vertices[p[0]] + self.vertices[p[2]]) * 0.5);
            let c = vertices.len() - 1;
            panels.push([p[0], mid[0], c, mid[3]]);
            panels.push([mid[0], p[1], mid[1], c]);
            panels.push([c, mid[1], p[2], mid[2]]);
            panels.push([mid[3], c, mid[2], p[3]]);
        }
        SurfaceMesh::new(vertices, panels).expect("refinement preserves mesh invariants")
    }

    /// Plain-text export: `v x y z` per vertex, then `p i1 i2 i3 i4` per panel.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
        }
        for p in &self.panels {
            writeln!(out, "p {} {} {} {}", p[0], p[1], p[2], p[3])?;
        }
        Ok(())
    }
}

/// Surface of the cube `[-w, w]³` with each face split into a
/// `2^level × 2^level` grid of square panels.
pub fn build_cube_mesh(half_width: f64, level: u32) -> Result<SurfaceMesh> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(BemError::InvalidArgument(format!("half_width must be positive, got {half_width}")));
    }
    if level > 12 {
        return Err(BemError::InvalidArgument(format!("refinement level {level} is too large")));
    }
    let n = 1i64 << level;
    let h = 2.0 * half_width / n as f64;
    // (origin in lattice units, first axis, second axis); axis1 × axis2 is outward.
    let faces: [([i64; 3], [i64; 3], [i64; 3]); 6] = [
        ([n, 0, 0], [0, 1, 0], [0, 0, 1]),
        ([0, 0, 0], [0, 0, 1], [0, 1, 0]),
        ([0, n, 0], [0, 0, 1], [1, 0, 0]),
        ([0, 0, 0], [1, 0, 0], [0, 0, 1]),
        ([0, 0, n], [1, 0, 0], [0, 1, 0]),
        ([0, 0, 0], [0, 1, 0], [1, 0, 0]),
    ];
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut lattice = |key: [i64; 3], vertices: &mut Vec<Vec3>| -> usize {
        *index.entry(key).or_insert_with(|| {
            vertices.push(Vec3::new(
                -half_width + key[0] as f64 * h,
                -half_width + key[1] as f64 * h,
                -half_width + key[2] as f64 * h,
            ));
            vertices.len() - 1
        })
    };
    let mut panels = Vec::with_capacity(6 * (n * n) as usize);
    for (origin, d1, d2) in faces {
        let point = |a: i64, b: i64| -> [i64; 3] {
            [0, 1, 2].map(|c| origin[c] + a * d1[c] + b * d2[c])
        };
        for b in 0..n {
            for a in 0..n {
                let quad = [point(a, b), point(a + 1, b), point(a + 1, b + 1), point(a, b + 1)];
                panels.push(quad.map(|q| lattice(q, &mut vertices)));
            }
        }
    }
    SurfaceMesh::new(vertices, panels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler(m: &SurfaceMesh) -> i64 {
        m.num_vertices() as i64 - m.num_edges() as i64 + m.num_panels() as i64
    }

    #[test]
    fn cube_counts() {
        let m0 = build_cube_mesh(2.0, 0).unwrap();
        assert_eq!((m0.num_panels(), m0.num_vertices(), m0.num_edges()), (6, 8, 12));
        assert_eq!(m0.mesh_size(), 4.0);
        let m1 = build_cube_mesh(2.0, 1).unwrap();
        assert_eq!((m1.num_panels(), m1.num_vertices(), m1.num_edges()), (24, 26, 48));
        let m2 = build_cube_mesh(2.0, 2).unwrap();
        assert_eq!((m2.num_panels(), m2.num_vertices(), m2.num_edges()), (96, 98, 192));
        for m in [&m0, &m1, &m2] {
            assert_eq!(euler(m), 2);
        }
    }

    #[test]
    fn top_face_chart() {
        let m = build_cube_mesh(2.0, 0).unwrap();
        let top = (0..6).find(|&k| m.chart(k).centroid().z > 1.0).unwrap();
        let c = m.chart(top);
        assert!((c.normal - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
        assert_eq!(c.det, 16.0);
    }

    #[test]
    fn normals_point_outward() {
        let m = build_cube_mesh(1.5, 2).unwrap();
        for c in m.charts() {
            assert!((c.normal.norm() - 1.0).abs() < 1e-15);
            assert!(c.normal.dot(&c.centroid()) > 0.0);
        }
    }

    #[test]
    fn chart_reproduces_vertices() {
        let m = build_cube_mesh(2.0, 2).unwrap();
        for (k, p) in m.panels().iter().enumerate() {
            for i in 0..4 {
                assert_eq!(m.chart(k).corner(i), m.vertices()[p[i]]);
            }
        }
    }

    #[test]
    fn refinement_matches_generator() {
        let refined = build_cube_mesh(2.0, 0).unwrap().refine_uniform();
        let direct = build_cube_mesh(2.0, 1).unwrap();
        let key = |m: &SurfaceMesh| {
            let mut quads: Vec<Vec<[i64; 3]>> = m
                .panels()
                .iter()
                .map(|p| {
                    p.iter()
                        .map(|&v| {
                            let x = m.vertices()[v];
                            [x.x, x.y, x.z].map(|c| (c * 1e6).round() as i64)
                        })
                        .collect()
                })
                .collect();
            // Normalise the starting vertex, keep the cyclic order.
            for q in &mut quads {
                let start = (0..4).min_by_key(|&i| q[i]).unwrap();
                q.rotate_left(start);
            }
            quads.sort();
            quads
        };
        assert_eq!(key(&refined), key(&direct));
        assert_eq!(refined.num_edges(), direct.num_edges());
        assert!((refined.area() - 96.0).abs() < 1e-12 * 96.0);
    }

    #[test]
    fn rejects_open_surface() {
        let m = build_cube_mesh(1.0, 0).unwrap();
        let mut panels = m.panels().to_vec();
        panels.pop();
        let err = SurfaceMesh::new(m.vertices().to_vec(), panels).unwrap_err();
        assert!(matches!(err, BemError::NonManifoldEdge { count: 1, .. }));
    }

    #[test]
    fn rejects_flipped_panel() {
        let m = build_cube_mesh(1.0, 0).unwrap();
        let mut panels = m.panels().to_vec();
        panels[0].reverse();
        let err = SurfaceMesh::new(m.vertices().to_vec(), panels).unwrap_err();
        assert!(matches!(err, BemError::InconsistentOrientation { .. }));
    }

    #[test]
    fn rejects_warped_panel() {
        let m = build_cube_mesh(1.0, 0).unwrap();
        let mut vertices = m.vertices().to_vec();
        vertices[0] += Vec3::new(0.1, 0.0, 0.0);
        let err = SurfaceMesh::new(vertices, m.panels().to_vec()).unwrap_err();
        assert!(matches!(err, BemError::NonParallelogram { .. }));
    }

    #[test]
    fn edges_have_opposite_traversal() {
        let m = build_cube_mesh(2.0, 2).unwrap();
        for e in m.edges() {
            let [lo, hi] = e.vertices;
            let traverses = |k: usize| {
                let p = m.panels()[k];
                (0..4).find(|&i| {
                    (p[i], p[(i + 1) % 4]) == (lo, hi) || (p[i], p[(i + 1) % 4]) == (hi, lo)
                })
                .map(|i| p[i] == lo)
                .unwrap()
            };
            assert!(traverses(e.panels[0]));
            assert!(!traverses(e.panels[1]));
        }
    }

    #[test]
    fn point_panel_distance() {
        let c = PanelChart::from_vectors(Vec3::zeros(), Vec3::x(), Vec3::y());
        assert!((c.distance_to(&Vec3::new(0.5, 0.5, 2.0)) - 2.0).abs() < 1e-15);
        assert!((c.distance_to(&Vec3::new(2.0, 0.5, 0.0)) - 1.0).abs() < 1e-15);
        assert!((c.distance_to(&Vec3::new(2.0, 2.0, 0.0)) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn text_export() {
        let m = build_cube_mesh(2.0, 0).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 8);
        assert_eq!(text.lines().filter(|l| l.starts_with("p ")).count(), 6);
    }
}
