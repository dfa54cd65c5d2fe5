//! Fields of solved densities: `E_h` off the surface, the tangential
//! magnetic trace on the surface and the closed-form skin-layer field.

use rayon::prelude::*;

use crate::geometry::SurfaceMesh;
use crate::kernels::{gradient_factor, green};
use crate::linsolve::DensitySolution;
use crate::quadrature::{PairQuadrature, QuadConfig};
use crate::spaces::{q1_reference_basis, DiscreteSpaces, RT_DIRECTION, RT_IN_Q1};
use crate::{BemError, CVec3, Complex64, Result, Vec3};

/// Default exclusion distance from the surface, in units of the nearest panel size.
pub const DEFAULT_MARGIN: f64 = 0.1;

/// Reference coordinates closer than this to a panel edge count as on the edge.
pub const EDGE_TOLERANCE: f64 = 1e-9;

/// Side of the surface for one-sided traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The exterior region (`+`).
    Exterior,
    /// The conductor (`−`).
    Interior,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Exterior => 1.0,
            Side::Interior => -1.0,
        }
    }
}

/// A field value at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub point: Vec3,
    pub e: CVec3,
    /// Tangential magnetic trace, for surface points only.
    pub h_t: Option<CVec3>,
}

/// Densities of one panel in the bilinear corner basis: `det·J_h(ŷ) = Σ_a j[a] φ̂_a(ŷ)`
/// and `M_h(ŷ) = Σ_a m[a] φ̂_a(ŷ)`.
#[derive(Debug, Clone, Copy)]
struct PanelDensity {
    j: [CVec3; 4],
    m: [Complex64; 4],
}

impl PanelDensity {
    fn current(&self, phi: &[f64; 4]) -> CVec3 {
        let mut v = CVec3::zeros();
        for a in 0..4 {
            v += self.j[a] * Complex64::new(phi[a], 0.0);
        }
        v
    }

    fn scalar(&self, phi: &[f64; 4]) -> Complex64 {
        (0..4).map(|a| self.m[a] * phi[a]).sum()
    }
}

fn to_complex(v: &Vec3) -> CVec3 {
    v.map(|c| Complex64::new(c, 0.0))
}

fn cross(a: &CVec3, b: &CVec3) -> CVec3 {
    CVec3::new(a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x)
}

/// Evaluates potentials of one density solution on one mesh.
pub struct FieldEvaluator<'a> {
    mesh: &'a SurfaceMesh,
    alpha: f64,
    quad: PairQuadrature,
    density: Vec<PanelDensity>,
    /// Points closer than `margin` times the nearest panel size are rejected.
    pub margin: f64,
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(
        mesh: &'a SurfaceMesh,
        spaces: &DiscreteSpaces,
        alpha: f64,
        solution: &DensitySolution,
        quad: QuadConfig,
    ) -> Result<Self> {
        if solution.lambda.len() != spaces.n_rt() || solution.mu.len() != spaces.n_q1() {
            return Err(BemError::InvalidArgument("solution does not match the discrete spaces".into()));
        }
        let density = (0..mesh.num_panels())
            .map(|k| {
                let chart = mesh.chart(k);
                let dirs = [to_complex(&chart.a1), to_complex(&chart.a2)];
                let mut d = PanelDensity { j: [CVec3::zeros(); 4], m: [Complex64::new(0.0, 0.0); 4] };
                for i in 0..4 {
                    let (g, s) = spaces.rt_map.global(k, i);
                    let coef = solution.lambda[g] * s;
                    for a in 0..4 {
                        d.j[a] += dirs[RT_DIRECTION[i]] * (coef * RT_IN_Q1[i][a]);
                    }
                }
                for a in 0..4 {
                    d.m[a] = solution.mu[spaces.q1_map.global(k, a).0];
                }
                d
            })
            .collect();
        Ok(FieldEvaluator { mesh, alpha, quad: PairQuadrature::new(quad)?, density, margin: DEFAULT_MARGIN })
    }

    fn check_distance(&self, x: &Vec3) -> Result<()> {
        let (k, distance) = self.mesh.nearest_panel(x);
        let chart = self.mesh.chart(k);
        let margin = self.margin * chart.a1.norm().max(chart.a2.norm());
        if distance <= margin {
            return Err(BemError::NearSurface { distance, margin });
        }
        Ok(())
    }

    /// `E_h(x) = V_α(J_h)(x) + grad V_α(M_h)(x)` for `x` off the surface.
    pub fn electric(&self, x: &Vec3) -> Result<CVec3> {
        self.check_distance(x)?;
        let depth = self.quad.config.max_depth;
        let mut e = CVec3::zeros();
        for (chart, d) in self.mesh.charts().iter().zip(&self.density) {
            let mut vj = CVec3::zeros();
            let mut gm = CVec3::zeros();
            self.quad.visit_point(x, chart, depth, |yh, y, w| {
                let diff = x - y;
                let r = diff.norm();
                let phi = q1_reference_basis(yh);
                vj += d.current(&phi) * (green(self.alpha, r) * w);
                let f = gradient_factor(self.alpha, r) * d.scalar(&phi) * (w * chart.det);
                gm += to_complex(&diff) * f;
            });
            e += vj + gm;
        }
        Ok(e)
    }

    /// `electric` at many points, in parallel.
    pub fn electric_batch(&self, points: &[Vec3]) -> Result<Vec<FieldSample>> {
        points
            .par_iter()
            .map(|x| Ok(FieldSample { point: *x, e: self.electric(x)?, h_t: None }))
            .collect()
    }

    /// `H_T^± = ±½ J_h(x) + ½ n × ∫ grad_x G_α × J_h(y) dS_y` at `x = chart_k(x̂)`.
    ///
    /// Panels in the plane of panel `k` contribute nothing: there `x − y`
    /// and `J_h(y)` are both tangential, so their cross product is normal.
    pub fn magnetic_trace(&self, k: usize, xh: [f64; 2], side: Side) -> Result<CVec3> {
        if k >= self.mesh.num_panels() {
            return Err(BemError::InvalidArgument(format!("panel {k} out of range")));
        }
        if xh.iter().any(|&t| !(t > EDGE_TOLERANCE && t < 1.0 - EDGE_TOLERANCE)) {
            return Err(BemError::OnPanelBoundary);
        }
        let ck = self.mesh.chart(k);
        let x = ck.map(xh);
        let n = to_complex(&ck.normal);
        let depth = self.quad.config.max_depth;
        let mut integral = CVec3::zeros();
        for (l, (cl, d)) in self.mesh.charts().iter().zip(&self.density).enumerate() {
            let coplanar = l == k
                || (cl.normal.cross(&ck.normal).norm() <= 1e-12 && cl.normal.dot(&(x - cl.anchor)).abs() <= 1e-12 * cl.diameter());
            if coplanar {
                continue;
            }
            self.quad.visit_point(&x, cl, depth, |yh, y, w| {
                let diff = x - y;
                let r = diff.norm();
                let phi = q1_reference_basis(yh);
                let grad = to_complex(&diff) * gradient_factor(self.alpha, r);
                integral += cross(&grad, &d.current(&phi)) * Complex64::new(w, 0.0);
            });
        }
        let j = self.density[k].current(&q1_reference_basis(xh)) / Complex64::new(ck.det, 0.0);
        Ok(j * Complex64::new(0.5 * side.sign(), 0.0) + cross(&n, &integral) * Complex64::new(0.5, 0.0))
    }

    /// `J_h` at `x = chart_k(x̂)`.
    pub fn current(&self, k: usize, xh: [f64; 2]) -> CVec3 {
        self.density[k].current(&q1_reference_basis(xh)) / Complex64::new(self.mesh.chart(k).det, 0.0)
    }
}

/// `e^{−iπ/4}`, the root of `−i` with positive real part.
pub fn skin_root() -> Complex64 {
    Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)
}

/// Leading-order field in the conductor at depth `τ`,
/// `−(1/(λ²β)) (n × curl E₀) (e^{−λβτ} − 1)` with `λ = e^{−iπ/4}`.
pub fn interior_skin_field(curl_trace: &CVec3, beta: f64, tau: f64) -> Result<CVec3> {
    if !(beta > 0.0) || !(tau >= 0.0) {
        return Err(BemError::InvalidArgument(format!("need beta > 0 and tau >= 0, got {beta}, {tau}")));
    }
    let lam = skin_root();
    let factor = -((-lam * beta * tau).exp() - 1.0) / (lam * lam * beta);
    Ok(curl_trace * factor)
}

/// `∫_panel G_α(|x − y|) p(ŷ) dS_y` for `x` off the panel.
pub fn panel_potential<P: Fn([f64; 2]) -> Complex64>(
    chart: &crate::geometry::PanelChart,
    alpha: f64,
    x: &Vec3,
    density: P,
    quad: &PairQuadrature,
) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    quad.visit_point(x, chart, quad.config.max_depth, |yh, y, w| {
        sum += density(yh) * green(alpha, (x - y).norm()) * w;
    });
    sum * chart.det
}
