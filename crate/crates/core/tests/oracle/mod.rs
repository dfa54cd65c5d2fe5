//! Brute-force reference integrals used by the integration tests.
//!
//! The inner integral of `p(ŷ)/|x − y|` over a rectangular panel is done in
//! closed form for bilinear `p`; the outer integral over the test panel is
//! done by product tanh-sinh rules whose step is halved until two levels
//! agree, which resolves the edge and corner singularities of the potential.

#![allow(dead_code)]

use std::f64::consts::PI;

use skinbem::geometry::{build_cube_mesh, PanelChart, SurfaceMesh};
use skinbem::quadrature::{classify_pair, gauss_legendre_unit, PairKind};
use skinbem::Vec3;

/// `ln(a + R)` without cancellation when `a < 0`, `R = sqrt(a² + rest)`.
fn log_plus(a: f64, r: f64, rest: f64) -> f64 {
    if a >= 0.0 {
        (a + r).ln()
    } else {
        (rest / (r - a)).ln()
    }
}

/// Antiderivatives in `(U, V)` of `1/R`, `U/R`, `V/R`, `UV/R` with `R² = U² + V² + z²`.
fn primitives(u: f64, v: f64, z: f64) -> [f64; 4] {
    let r = (u * u + v * v + z * z).sqrt();
    let lv = log_plus(v, r, u * u + z * z);
    let lu = log_plus(u, r, v * v + z * z);
    let times = |c: f64, l: f64| if c == 0.0 { 0.0 } else { c * l };
    let mut f1 = times(u, lv) + times(v, lu);
    if z != 0.0 && u * v != 0.0 {
        f1 -= z * (u * v / (z * r)).atan();
    }
    let fu = 0.5 * (v * r + times(u * u + z * z, lv));
    let fv = 0.5 * (u * r + times(v * v + z * z, lu));
    [f1, fu, fv, r * r * r / 3.0]
}

/// `∫_panel (c₀ + c₁ŷ₁ + c₂ŷ₂ + c₃ŷ₁ŷ₂) / |x − y| dS_y` for a rectangular panel.
pub fn inner_rectangle(chart: &PanelChart, coeffs: [f64; 4], x: &Vec3) -> f64 {
    let lu = chart.a1.norm();
    let lv = chart.a2.norm();
    assert!(chart.a1.dot(&chart.a2).abs() <= 1e-12 * lu * lv, "oracle needs rectangular panels");
    let e1 = chart.a1 / lu;
    let e2 = chart.a2 / lv;
    let d = x - chart.anchor;
    let (u0, v0, z) = (d.dot(&e1), d.dot(&e2), d.dot(&chart.normal).abs());
    // p in terms of U = u − u0, V = v − v0 with ŷ₁ = u/lu, ŷ₂ = v/lv
    let [c0, c1, c2, c3] = coeffs;
    let (s1, s2) = (1.0 / lu, 1.0 / lv);
    let k1 = c0 + c1 * s1 * u0 + c2 * s2 * v0 + c3 * s1 * s2 * u0 * v0;
    let ku = c1 * s1 + c3 * s1 * s2 * v0;
    let kv = c2 * s2 + c3 * s1 * s2 * u0;
    let kuv = c3 * s1 * s2;
    let mut total = 0.0;
    for (uu, su) in [(lu - u0, 1.0), (-u0, -1.0)] {
        for (vv, sv) in [(lv - v0, 1.0), (-v0, -1.0)] {
            let f = primitives(uu, vv, z);
            total += su * sv * (k1 * f[0] + ku * f[1] + kv * f[2] + kuv * f[3]);
        }
    }
    total
}

/// Tanh-sinh nodes and weights on `[0, 1]` with step `h`.
fn tanh_sinh(h: f64) -> Vec<(f64, f64)> {
    let half_pi = 0.5 * PI;
    let n = (3.2 / h).ceil() as i64;
    (-n..=n)
        .filter_map(|j| {
            let t = j as f64 * h;
            let u = half_pi * t.sinh();
            // x = 1/(1 + e^{-2u}) keeps full relative precision near both ends
            let x = 1.0 / (1.0 + (-2.0 * u).exp());
            let c = u.cosh();
            let w = h * 0.5 * half_pi * t.cosh() / (c * c);
            (x > 0.0 && x < 1.0 && w > 0.0).then_some((x, w))
        })
        .collect()
}

/// Integral of `f` over the unit square by product tanh-sinh rules, halving
/// the step until two successive levels agree to `tol`.
pub fn adaptive_square<F: Fn([f64; 2]) -> f64>(f: F, tol: f64) -> f64 {
    let mut last = f64::NAN;
    let mut h = 0.25;
    loop {
        let rule = tanh_sinh(h);
        let mut s = 0.0;
        for &(a, wa) in &rule {
            for &(b, wb) in &rule {
                s += wa * wb * f([a, b]);
            }
        }
        if (s - last).abs() <= tol || h < 1.0 / 64.0 {
            return s;
        }
        last = s;
        h *= 0.5;
    }
}

/// `∫∫ g(x̂) p(ŷ) / (4π|x − y|) dS_y dS_x` by the oracle.
pub fn pair_laplace<G: Fn([f64; 2]) -> f64>(
    cx: &PanelChart,
    cy: &PanelChart,
    g: G,
    coeffs: [f64; 4],
    tol: f64,
) -> f64 {
    let scale = cx.det / (4.0 * PI);
    adaptive_square(|xh| g(xh) * inner_rectangle(cy, coeffs, &cx.map(xh)) * scale, tol)
}

/// Frozen validation pairs: (level, test panel, source panel, expected class).
pub fn validation_pairs() -> Vec<(u32, usize, usize, &'static str)> {
    let mut out = Vec::new();
    for level in 0..=2u32 {
        let mesh = build_cube_mesh(2.0, level).unwrap();
        let n = mesh.num_panels();
        let mut found = std::collections::BTreeMap::<&str, Vec<usize>>::new();
        for l in 0..n {
            let c = classify_pair(mesh.chart(0), mesh.chart(l)).unwrap();
            let name = match c.kind {
                PairKind::Coincident => "coincident",
                PairKind::EdgeAdjacent { .. } => "edge",
                PairKind::VertexAdjacent { .. } => "vertex",
                PairKind::Separated if c.rho < 2.0 => "near",
                PairKind::Separated => "far",
            };
            found.entry(name).or_default().push(l);
        }
        let pick = |name: &str, i: usize| found.get(name).and_then(|v| v.get(i % v.len()).copied());
        let wanted: &[(&str, usize)] = match level {
            0 => &[("coincident", 0), ("edge", 0), ("near", 0)],
            1 => &[("coincident", 0), ("edge", 3), ("vertex", 0), ("vertex", 1), ("near", 0)],
            _ => &[("coincident", 0), ("edge", 1), ("vertex", 2), ("far", 0)],
        };
        for &(name, i) in wanted {
            if let Some(l) = pick(name, i) {
                out.push((level, 0, l, if name == "near" || name == "far" { "separated" } else { name }));
            }
        }
    }
    out
}

const EDGES: [([f64; 2], [f64; 2]); 4] = [([0.0, 0.0], [1.0, 0.0]), ([1.0, 0.0], [1.0, 1.0]), ([1.0, 1.0], [0.0, 1.0]), ([0.0, 1.0], [0.0, 0.0])];

/// Outward normal flux of `f` through local edge `e` of panel `k`.
pub fn edge_flux(mesh: &SurfaceMesh, k: usize, e: usize, f: impl Fn([f64; 2]) -> Vec3) -> f64 {
    let chart = mesh.chart(k);
    let (p, q) = EDGES[e];
    let tangent = chart.apply([q[0] - p[0], q[1] - p[1]]);
    let conormal = tangent.cross(&chart.normal).normalize();
    let (t, w) = gauss_legendre_unit(4).unwrap();
    t.iter()
        .zip(&w)
        .map(|(s, w)| {
            let xh = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
            w * tangent.norm() * f(xh).dot(&conormal)
        })
        .sum()
}
