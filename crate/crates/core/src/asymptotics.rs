//! Large-conductivity expansion `Ẽ = E₀ + β⁻¹E₁ + β⁻²E₂` of the
//! eddy-current problem.
//!
//! Every order solves the same perfect-conductor problem; only the
//! tangential boundary datum changes. Order 0 uses `−E⁰_T`; order `k + 1`
//! uses `−√i (n × H_k,T^+)`, sampled at the load-vector quadrature nodes.
//! The matrix is factored once and reused for all orders.

use log::warn;
use rayon::prelude::*;

use crate::assembly::{assemble_rhs_incident, assemble_system, rhs_nodes, AssemblyOptions, SurfacePoint};
use crate::fields::{FieldEvaluator, Side};
use crate::geometry::SurfaceMesh;
use crate::linsolve::{BlockSolver, DensitySolution, SolveOptions};
use crate::spaces::DiscreteSpaces;
use crate::{BemError, CVec3, Complex64, Result, Vec3};

/// Highest supported expansion order.
pub const MAX_ORDER: usize = 2;

/// `e^{iπ/4}`.
pub fn sqrt_i() -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)
}

/// `n × v`.
pub fn perp(v: &CVec3, n: &Vec3) -> CVec3 {
    let n = n.map(|c| Complex64::new(c, 0.0));
    CVec3::new(n.y * v.z - n.z * v.y, n.z * v.x - n.x * v.z, n.x * v.y - n.y * v.x)
}

/// Datum of the next order, `−√i (n × H_T)`, pointwise.
pub fn next_boundary_data(h_t: &[CVec3], normals: &[Vec3]) -> Result<Vec<CVec3>> {
    if h_t.len() != normals.len() {
        return Err(BemError::InvalidArgument(format!("{} trace samples for {} normals", h_t.len(), normals.len())));
    }
    let c = -sqrt_i();
    Ok(h_t.iter().zip(normals).map(|(h, n)| perp(h, n) * c).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionOptions {
    pub assembly: AssemblyOptions,
    pub solve: SolveOptions,
    /// Gauss order of the load vectors and trace samples.
    pub rhs_order: usize,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        ExpansionOptions { assembly: AssemblyOptions::default(), solve: SolveOptions::default(), rhs_order: 4 }
    }
}

/// Per-order solutions and fields of one expansion run.
#[derive(Debug, Clone)]
pub struct ExpansionResult {
    pub solutions: Vec<DensitySolution>,
    pub points: Vec<Vec3>,
    /// `fields[k][p]` is `E_k` at `points[p]`.
    pub fields: Vec<Vec<CVec3>>,
    /// Surface nodes of the trace samples.
    pub nodes: Vec<SurfacePoint>,
    /// `traces[k][q]` is `H_k,T^+` at `nodes[q]`.
    pub traces: Vec<Vec<CVec3>>,
    /// Set when `max_p ‖E_k(x_p)‖` grows with `k`.
    pub growing: bool,
}

impl ExpansionResult {
    /// `E₀ + β⁻¹E₁ + β⁻²E₂ + …` at every evaluation point.
    pub fn recombine(&self, beta: f64) -> Vec<CVec3> {
        self.recombine_orders(beta, self.fields.len())
    }

    /// Recombination truncated after `orders` terms.
    pub fn recombine_orders(&self, beta: f64, orders: usize) -> Vec<CVec3> {
        let mut out = vec![CVec3::zeros(); self.points.len()];
        let mut scale = 1.0;
        for field in self.fields.iter().take(orders) {
            for (o, e) in out.iter_mut().zip(field) {
                *o += e * Complex64::new(scale, 0.0);
            }
            scale /= beta;
        }
        out
    }

    /// `n × curl E₀ = n × H₀,T^+` at the trace nodes, the input of
    /// [`crate::fields::interior_skin_field`].
    pub fn curl_traces(&self) -> Vec<CVec3> {
        self.traces.first().map(|t| t.iter().zip(&self.nodes).map(|(h, p)| perp(h, &p.normal)).collect()).unwrap_or_default()
    }
}

/// Runs orders `0..=orders` for incident field `incident` and evaluates
/// each order's field at `points`.
pub fn run_expansion<F>(
    mesh: &SurfaceMesh,
    spaces: &DiscreteSpaces,
    alpha: f64,
    incident: F,
    points: &[Vec3],
    orders: usize,
    opts: &ExpansionOptions,
) -> Result<ExpansionResult>
where
    F: Fn(&Vec3) -> CVec3,
{
    if orders > MAX_ORDER {
        return Err(BemError::InvalidArgument(format!("expansion order {orders} exceeds {MAX_ORDER}")));
    }
    let nodes = rhs_nodes(mesh, opts.rhs_order)?;
    let per_panel = nodes.len() / mesh.num_panels().max(1);
    let index = |p: &SurfacePoint| p.panel * per_panel + p.node;
    let rhs0 = assemble_rhs_incident(spaces, mesh, |p| incident(&p.x), opts.rhs_order)?;
    let system = assemble_system(spaces, mesh, alpha, &opts.assembly, rhs0)?;
    let solver = BlockSolver::new(&system, opts.solve)?;
    let normals: Vec<Vec3> = nodes.iter().map(|p| p.normal).collect();

    let mut result =
        ExpansionResult { solutions: Vec::new(), points: points.to_vec(), fields: Vec::new(), nodes: nodes.clone(), traces: Vec::new(), growing: false };
    let mut rhs = system.rhs.clone();
    for k in 0..=orders {
        let solution = solver.solve(&rhs, &system.rhs2)?;
        let ev = FieldEvaluator::new(mesh, spaces, alpha, &solution, opts.assembly.quad)?;
        let field: Vec<CVec3> = ev.electric_batch(points)?.into_iter().map(|s| s.e).collect();
        let trace: Vec<CVec3> =
            nodes.par_iter().map(|p| ev.magnetic_trace(p.panel, p.xh, Side::Exterior)).collect::<Result<_>>()?;
        if k < orders {
            let datum = next_boundary_data(&trace, &normals)?;
            // the solver imposes E_T = −(field passed in), so pass −datum
            rhs = assemble_rhs_incident(spaces, mesh, |p| -datum[index(p)], opts.rhs_order)?;
        }
        result.solutions.push(solution);
        result.fields.push(field);
        result.traces.push(trace);
    }
    let peaks: Vec<f64> = result.fields.iter().map(|f| f.iter().map(|e| e.norm()).fold(0.0, f64::max)).collect();
    if peaks.windows(2).any(|w| w[1] > w[0]) {
        warn!("expansion terms grow with order: {peaks:?}");
        result.growing = true;
    }
    Ok(result)
}
