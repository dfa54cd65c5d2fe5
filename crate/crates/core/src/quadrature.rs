//! Gauss–Legendre rules and panel-pair integration.
//!
//! Pairs of panels are classified by the vertices they share. Coincident
//! pairs are integrated in relative coordinates `z = x̂ − ŷ`, edge- and
//! vertex-adjacent pairs in frames anchored at a shared vertex; in each case
//! the singular corner is blown up by a Duffy-type split whose Jacobian
//! cancels the `1/r` behaviour. Separated pairs that are close relative to
//! their size are subdivided recursively before tensor Gauss is applied.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::geometry::{box_distance, PanelChart, REFERENCE_CORNERS};
use crate::kernels::smooth_part;
use crate::{BemError, Complex64, Result, Vec3};

pub const MAX_GAUSS_ORDER: usize = 64;

/// Gauss–Legendre nodes and weights on `[0, 1]`, nodes ascending.
pub fn gauss_legendre_unit(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > MAX_GAUSS_ORDER {
        return Err(BemError::UnsupportedOrder(n));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 1.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok((nodes, weights))
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Tensor Gauss rule on the reference square.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn gauss_rule(order: usize) -> Result<QuadratureRule> {
    let (t, w) = gauss_legendre_unit(order)?;
    let mut points = Vec::with_capacity(order * order);
    let mut weights = Vec::with_capacity(order * order);
    for i in 0..order {
        for j in 0..order {
            points.push([t[i], t[j]]);
            weights.push(w[i] * w[j]);
        }
    }
    Ok(QuadratureRule { points, weights })
}

/// Quadrature parameters shared by assembly and field evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    /// Gauss points per direction for well-separated pairs.
    pub far_order: usize,
    /// Gauss points per direction in regularized coordinates.
    pub sing_order: usize,
    /// Gauss points per direction for the polynomial inner integrals.
    pub inner_order: usize,
    /// Pairs with `dist / diam` below this value are subdivided.
    pub near_threshold: f64,
    pub max_depth: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { far_order: 5, sing_order: 8, inner_order: 4, near_threshold: 2.0, max_depth: 8 }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        for o in [self.far_order, self.sing_order, self.inner_order] {
            if o == 0 || o > MAX_GAUSS_ORDER {
                return Err(BemError::UnsupportedOrder(o));
            }
        }
        if !(self.near_threshold >= 0.0) {
            return Err(BemError::InvalidArgument(format!("near_threshold = {}", self.near_threshold)));
        }
        Ok(())
    }
}

/// Geometric relation between two panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Coincident,
    /// Corner indices `(P, Q, R)` in each panel: `PQ` is the shared edge and
    /// `R` the other neighbour of `P`.
    EdgeAdjacent { x: [usize; 3], y: [usize; 3] },
    /// Frames `(P, next, previous)` at the shared corner.
    VertexAdjacent { x: [usize; 3], y: [usize; 3] },
    Separated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelPairClass {
    pub kind: PairKind,
    /// Distance between the panels divided by the larger diameter.
    pub rho: f64,
}

fn frame_at(p: usize, q: usize) -> [usize; 3] {
    let r = if (p + 1) % 4 == q { (p + 3) % 4 } else { (p + 1) % 4 };
    [p, q, r]
}

/// Classifies a pair from the corners the two charts share.
pub fn classify_pair(cx: &PanelChart, cy: &PanelChart) -> Result<PanelPairClass> {
    let scale = cx.diameter().max(cy.diameter());
    let tol = 1e-10 * scale;
    let mut shared = Vec::with_capacity(4);
    for i in 0..4 {
        for j in 0..4 {
            if (cx.corner(i) - cy.corner(j)).norm() <= tol {
                shared.push((i, j));
            }
        }
    }
    let kind = match shared.len() {
        0 => PairKind::Separated,
        1 => {
            let (i, j) = shared[0];
            PairKind::VertexAdjacent { x: [i, (i + 1) % 4, (i + 3) % 4], y: [j, (j + 1) % 4, (j + 3) % 4] }
        }
        2 => {
            let (i0, j0) = shared[0];
            let (i1, j1) = shared[1];
            let adjacent = |a: usize, b: usize| (a + 1) % 4 == b || (b + 1) % 4 == a;
            if !adjacent(i0, i1) || !adjacent(j0, j1) {
                return Err(BemError::UnclassifiedPair(i0, i1));
            }
            PairKind::EdgeAdjacent { x: frame_at(i0, i1), y: frame_at(j0, j1) }
        }
        4 if shared.iter().all(|&(i, j)| i == j) => PairKind::Coincident,
        _ => return Err(BemError::UnclassifiedPair(shared.len(), 0)),
    };
    let rho = match kind {
        PairKind::Separated => {
            box_distance(&cx.sub_bounds([0.0, 0.0], 1.0), &cy.sub_bounds([0.0, 0.0], 1.0)) / scale
        }
        _ => 0.0,
    };
    Ok(PanelPairClass { kind, rho })
}

/// Affine frame `ξ ↦ C[P] + ξ₁ (C[Q] − C[P]) + ξ₂ (C[R] − C[P])` on the reference square.
#[derive(Debug, Clone, Copy)]
struct Frame {
    origin: [f64; 2],
    d1: [f64; 2],
    d2: [f64; 2],
}

impl Frame {
    fn new(c: [usize; 3]) -> Self {
        let p = REFERENCE_CORNERS[c[0]];
        let q = REFERENCE_CORNERS[c[1]];
        let r = REFERENCE_CORNERS[c[2]];
        Frame { origin: p, d1: [q[0] - p[0], q[1] - p[1]], d2: [r[0] - p[0], r[1] - p[1]] }
    }

    #[inline(always)]
    fn map(&self, a: f64, b: f64) -> [f64; 2] {
        [self.origin[0] + a * self.d1[0] + b * self.d2[0], self.origin[1] + a * self.d1[1] + b * self.d2[1]]
    }

    fn physical(&self, chart: &PanelChart) -> (Vec3, Vec3) {
        (chart.apply(self.d1), chart.apply(self.d2))
    }
}

/// Precomputed rules for pair and point-panel integration.
#[derive(Debug, Clone)]
pub struct PairQuadrature {
    pub config: QuadConfig,
    far: (Vec<f64>, Vec<f64>),
    sing: (Vec<f64>, Vec<f64>),
    inner: (Vec<f64>, Vec<f64>),
}

impl PairQuadrature {
    pub fn new(config: QuadConfig) -> Result<Self> {
        config.validate()?;
        Ok(PairQuadrature {
            config,
            far: gauss_legendre_unit(config.far_order)?,
            sing: gauss_legendre_unit(config.sing_order)?,
            inner: gauss_legendre_unit(config.inner_order)?,
        })
    }

    /// Calls `f(x̂, ŷ, r, w)` for every node of a rule for `∫∫ F dx̂ dŷ`,
    /// with `r = |x − y|` and `w` in reference measure.
    pub fn visit<F>(&self, cx: &PanelChart, cy: &PanelChart, class: &PanelPairClass, mut f: F)
    where
        F: FnMut([f64; 2], [f64; 2], f64, f64),
    {
        match class.kind {
            PairKind::Coincident => self.coincident(cx, &mut f),
            PairKind::EdgeAdjacent { x, y } => self.edge_adjacent(cx, cy, x, y, &mut f),
            PairKind::VertexAdjacent { x, y } => self.vertex_adjacent(cx, cy, x, y, &mut f),
            PairKind::Separated => self.separated(cx, cy, [0.0, 0.0], 1.0, [0.0, 0.0], 1.0, 0, &mut f),
        }
    }

    fn coincident<F: FnMut([f64; 2], [f64; 2], f64, f64)>(&self, c: &PanelChart, f: &mut F) {
        let (ts, ws) = (&self.sing.0, &self.sing.1);
        let (ti, wi) = (&self.inner.0, &self.inner.1);
        for s1 in [1.0, -1.0] {
            for s2 in [1.0, -1.0] {
                for tri in 0..2 {
                    for (&s, &was) in ts.iter().zip(ws) {
                        for (&t, &wt) in ts.iter().zip(ws) {
                            let (za, zb) = if tri == 0 { (s, s * t) } else { (s * t, s) };
                            let z = [s1 * za, s2 * zb];
                            let r = (c.a1 * z[0] + c.a2 * z[1]).norm();
                            let lo = [z[0].max(0.0), z[1].max(0.0)];
                            let len = [1.0 - za, 1.0 - zb];
                            let w0 = was * wt * s * len[0] * len[1];
                            for (&u, &wu) in ti.iter().zip(wi) {
                                for (&v, &wv) in ti.iter().zip(wi) {
                                    let xh = [lo[0] + len[0] * u, lo[1] + len[1] * v];
                                    let yh = [xh[0] - z[0], xh[1] - z[1]];
                                    f(xh, yh, r, w0 * wu * wv);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    fn edge_adjacent<F: FnMut([f64; 2], [f64; 2], f64, f64)>(
        &self,
        cx: &PanelChart,
        cy: &PanelChart,
        fx: [usize; 3],
        fy: [usize; 3],
        f: &mut F,
    ) {
        let (frx, fry) = (Frame::new(fx), Frame::new(fy));
        let (e, u) = frx.physical(cx);
        let (_, w) = fry.physical(cy);
        let (ts, ws) = (&self.sing.0, &self.sing.1);
        let (ti, wi) = (&self.inner.0, &self.inner.1);
        for sign in [1.0, -1.0] {
            for pyramid in 0..3 {
                for (&s, &was) in ts.iter().zip(ws) {
                    for (&t1, &w1) in ts.iter().zip(ws) {
                        for (&t2, &w2) in ts.iter().zip(ws) {
                            let (zz, xi2, eta2) = match pyramid {
                                0 => (s, s * t1, s * t2),
                                1 => (s * t1, s, s * t2),
                                _ => (s * t1, s * t2, s),
                            };
                            let z1 = sign * zz;
                            let r = (e * z1 + u * xi2 - w * eta2).norm();
                            let lo = z1.max(0.0);
                            let len = 1.0 - zz;
                            let w0 = was * w1 * w2 * s * s * len;
                            for (&q, &wq) in ti.iter().zip(wi) {
                                let xi1 = lo + len * q;
                                f(frx.map(xi1, xi2), fry.map(xi1 - z1, eta2), r, w0 * wq);
                            }
                        }
                    }
                }
            }
        }
    }

    fn vertex_adjacent<F: FnMut([f64; 2], [f64; 2], f64, f64)>(
        &self,
        cx: &PanelChart,
        cy: &PanelChart,
        fx: [usize; 3],
        fy: [usize; 3],
        f: &mut F,
    ) {
        let (frx, fry) = (Frame::new(fx), Frame::new(fy));
        let (a, b) = frx.physical(cx);
        let (c, d) = fry.physical(cy);
        let (ts, ws) = (&self.sing.0, &self.sing.1);
        let mut v = [0.0; 4];
        for pyramid in 0..4 {
            for (&s, &was) in ts.iter().zip(ws) {
                let w_s = was * s * s * s;
                for (&t1, &w1) in ts.iter().zip(ws) {
                    for (&t2, &w2) in ts.iter().zip(ws) {
                        for (&t3, &w3) in ts.iter().zip(ws) {
                            let rest = [s * t1, s * t2, s * t3];
                            let mut k = 0;
                            for (slot, val) in v.iter_mut().enumerate() {
                                if slot == pyramid {
                                    *val = s;
                                } else {
                                    *val = rest[k];
                                    k += 1;
                                }
                            }
                            let r = (a * v[0] + b * v[1] - c * v[2] - d * v[3]).norm();
                            f(frx.map(v[0], v[1]), fry.map(v[2], v[3]), r, w_s * w1 * w2 * w3);
                        }
                    }
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn separated<F: FnMut([f64; 2], [f64; 2], f64, f64)>(
        &self,
        cx: &PanelChart,
        cy: &PanelChart,
        ox: [f64; 2],
        sx: f64,
        oy: [f64; 2],
        sy: f64,
        depth: u32,
        f: &mut F,
    ) {
        let dist = box_distance(&cx.sub_bounds(ox, sx), &cy.sub_bounds(oy, sy));
        let diam = (cx.diameter() * sx).max(cy.diameter() * sy);
        if dist >= self.config.near_threshold * diam || depth >= self.config.max_depth {
            let (t, w) = (&self.far.0, &self.far.1);
            let scale = sx * sx * sy * sy;
            let ys: Vec<([f64; 2], Vec3, f64)> = t
                .iter()
                .zip(w)
                .flat_map(|(&a, &wa)| {
                    t.iter().zip(w).map(move |(&b, &wb)| {
                        let yh = [oy[0] + sy * a, oy[1] + sy * b];
                        (yh, cy.map(yh), wa * wb)
                    })
                })
                .collect();
            for (&a, &wa) in t.iter().zip(w) {
                for (&b, &wb) in t.iter().zip(w) {
                    let xh = [ox[0] + sx * a, ox[1] + sx * b];
                    let x = cx.map(xh);
                    let wx = wa * wb * scale;
                    for &(yh, y, wy) in &ys {
                        f(xh, yh, (x - y).norm(), wx * wy);
                    }
                }
            }
            return;
        }
        let (hx, hy) = (0.5 * sx, 0.5 * sy);
        for cxo in REFERENCE_CORNERS {
            let oxc = [ox[0] + hx * cxo[0], ox[1] + hx * cxo[1]];
            for cyo in REFERENCE_CORNERS {
                let oyc = [oy[0] + hy * cyo[0], oy[1] + hy * cyo[1]];
                self.separated(cx, cy, oxc, hx, oyc, hy, depth + 1, f);
            }
        }
    }

    /// Calls `f(ŷ, y, w)` for a rule for `∫ F dŷ` over one panel, refined
    /// towards `x`; points on the panel get a Duffy rule around `x̂`.
    pub fn visit_point<F>(&self, x: &Vec3, chart: &PanelChart, max_depth: u32, mut f: F)
    where
        F: FnMut([f64; 2], Vec3, f64),
    {
        match on_panel(x, chart) {
            Some(xh) => self.point_duffy(xh, chart, &mut f),
            None => self.point_rec(x, chart, [0.0, 0.0], 1.0, 0, max_depth, &mut f),
        }
    }

    /// Splits the square into four rectangles with a corner at `x̂` and each
    /// rectangle into two triangles collapsed onto that corner. The angular
    /// variable is `t = (L_f/L_v) tan θ`; the `θ` range is cut into pieces no
    /// longer than their distance to `π/2`.
    fn point_duffy<F: FnMut([f64; 2], Vec3, f64)>(&self, xh: [f64; 2], chart: &PanelChart, f: &mut F) {
        let (ts, ws) = (&self.sing.0, &self.sing.1);
        let (l1, l2) = (chart.a1.norm(), chart.a2.norm());
        for (ea, eb) in [(1.0 - xh[0], 1.0 - xh[1]), (-xh[0], 1.0 - xh[1]), (-xh[0], -xh[1]), (1.0 - xh[0], -xh[1])] {
            let area = (ea * eb).abs();
            if area == 0.0 {
                continue;
            }
            let (la, lb) = (ea.abs() * l1, eb.abs() * l2);
            for swap in [false, true] {
                let (lf, lv) = if swap { (lb, la) } else { (la, lb) };
                let theta_max = (lv / lf).atan();
                let mut lo = 0.0;
                while lo < theta_max {
                    let hi = (lo + 0.5 * (FRAC_PI_2 - lo)).min(theta_max);
                    for (&q, &wq) in ts.iter().zip(ws) {
                        let theta = lo + (hi - lo) * q;
                        let t = lf / lv * theta.tan();
                        let jac = lf / lv * (hi - lo) / (theta.cos() * theta.cos());
                        for (&s, &wsi) in ts.iter().zip(ws) {
                            let yh = if swap { [xh[0] + s * t * ea, xh[1] + s * eb] } else { [xh[0] + s * ea, xh[1] + s * t * eb] };
                            f(yh, chart.map(yh), wsi * wq * jac * s * area);
                        }
                    }
                    lo = hi;
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn point_rec<F: FnMut([f64; 2], Vec3, f64)>(
        &self,
        x: &Vec3,
        chart: &PanelChart,
        o: [f64; 2],
        size: f64,
        depth: u32,
        max_depth: u32,
        f: &mut F,
    ) {
        let bounds = chart.sub_bounds(o, size);
        let dist = box_distance(&bounds, &([x[0], x[1], x[2]], [x[0], x[1], x[2]]));
        if dist >= self.config.near_threshold * chart.diameter() * size || depth >= max_depth {
            let (t, w) = (&self.far.0, &self.far.1);
            for (&a, &wa) in t.iter().zip(w) {
                for (&b, &wb) in t.iter().zip(w) {
                    let yh = [o[0] + size * a, o[1] + size * b];
                    f(yh, chart.map(yh), wa * wb * size * size);
                }
            }
            return;
        }
        let h = 0.5 * size;
        for c in REFERENCE_CORNERS {
            self.point_rec(x, chart, [o[0] + h * c[0], o[1] + h * c[1]], h, depth + 1, max_depth, f);
        }
    }
}

/// Reference coordinates of `x` when it lies on the closed panel.
fn on_panel(x: &Vec3, chart: &PanelChart) -> Option<[f64; 2]> {
    let rel = x - chart.anchor;
    if rel.dot(&chart.normal).abs() > 1e-12 * chart.diameter() {
        return None;
    }
    let (g11, g12, g22) = (chart.a1.dot(&chart.a1), chart.a1.dot(&chart.a2), chart.a2.dot(&chart.a2));
    let (b1, b2) = (chart.a1.dot(&rel), chart.a2.dot(&rel));
    let d = g11 * g22 - g12 * g12;
    let xh = [(g22 * b1 - g12 * b2) / d, (g11 * b2 - g12 * b1) / d];
    let eps = 1e-12;
    (xh.iter().all(|&c| (-eps..=1.0 + eps).contains(&c))).then(|| xh.map(|c| c.clamp(0.0, 1.0)))
}

/// `∫_{Σx} ∫_{Σy} P(x̂, ŷ) / (4π|x − y|) dS_y dS_x` with the regularized rules.
pub fn integrate_pair_singular<P>(
    cx: &PanelChart,
    cy: &PanelChart,
    density: P,
    class: &PanelPairClass,
    config: &QuadConfig,
) -> Result<Complex64>
where
    P: Fn([f64; 2], [f64; 2]) -> Complex64,
{
    let quad = PairQuadrature::new(*config)?;
    let mut sum = Complex64::new(0.0, 0.0);
    quad.visit(cx, cy, class, |xh, yh, r, w| {
        sum += density(xh, yh) * (w / (4.0 * PI * r));
    });
    Ok(sum * (cx.det * cy.det))
}

/// Tensor-Gauss `∫∫ P(x̂, ŷ) (e^{iαr} − 1)/(4πr) dS_y dS_x`.
pub fn integrate_pair_smooth<P>(cx: &PanelChart, cy: &PanelChart, alpha: f64, density: P, order: usize) -> Result<Complex64>
where
    P: Fn([f64; 2], [f64; 2]) -> Complex64,
{
    let rule = gauss_rule(order)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for (xh, wx) in rule.points.iter().zip(&rule.weights) {
        let x = cx.map(*xh);
        for (yh, wy) in rule.points.iter().zip(&rule.weights) {
            let r = (x - cy.map(*yh)).norm();
            sum += density(*xh, *yh) * smooth_part(alpha, r, crate::kernels::DEFAULT_TAYLOR_TERMS) * (wx * wy);
        }
    }
    Ok(sum * (cx.det * cy.det))
}

/// `∫_Σ P(ŷ) / (4π|x − y|) dS_y` for `x = chart(x̂)` on the panel itself,
/// with the Duffy rule of [`PairQuadrature::visit_point`] at Gauss order `order`.
pub fn integrate_point_on_panel<P>(chart: &PanelChart, xh: [f64; 2], density: P, order: usize) -> Result<Complex64>
where
    P: Fn([f64; 2]) -> Complex64,
{
    if !(0.0..=1.0).contains(&xh[0]) || !(0.0..=1.0).contains(&xh[1]) {
        return Err(BemError::InvalidArgument("point outside the reference square".into()));
    }
    let quad = PairQuadrature::new(QuadConfig { sing_order: order, ..QuadConfig::default() })?;
    let x = chart.map(xh);
    let mut sum = Complex64::new(0.0, 0.0);
    quad.point_duffy(xh, chart, &mut |yh, y, w| sum += density(yh) * (w / (4.0 * PI * (x - y).norm())));
    Ok(sum * chart.det)
}
