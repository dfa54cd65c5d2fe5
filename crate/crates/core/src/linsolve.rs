//! Dense solves of the block system `[[A, Bᵀ], [B, C]] (λ, μ) = (ℓ, 0)`.

use nalgebra::{DMatrix, DVector, LU};

use crate::assembly::BlockSystem;
use crate::{BemError, Complex64, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    #[default]
    Direct,
    Iterative,
}

impl std::str::FromStr for SolverMethod {
    type Err = BemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SolverMethod::Direct),
            "iterative" => Ok(SolverMethod::Iterative),
            other => Err(BemError::InvalidArgument(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: SolverMethod,
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    /// Largest `n + m` accepted by the direct solver.
    pub max_direct_unknowns: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { method: SolverMethod::Direct, tol: 1e-10, max_iter: 2000, restart: 200, max_direct_unknowns: 8000 }
    }
}

/// Coefficients of `J_h` and `M_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySolution {
    pub lambda: Vec<Complex64>,
    pub mu: Vec<Complex64>,
    /// `‖K z − b‖₂ / ‖b‖₂` (zero for zero data).
    pub residual_norm: f64,
    /// GMRES iterations, zero for the direct solver.
    pub iterations: usize,
}

impl DensitySolution {
    pub fn zeros(n: usize, m: usize) -> Self {
        DensitySolution { lambda: vec![Complex64::new(0.0, 0.0); n], mu: vec![Complex64::new(0.0, 0.0); m], residual_norm: 0.0, iterations: 0 }
    }
}

enum Engine {
    Lu(LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>),
    Gmres,
}

/// A block matrix prepared for repeated solves with different loads.
pub struct BlockSolver {
    matrix: DMatrix<Complex64>,
    n: usize,
    engine: Engine,
    options: SolveOptions,
}

impl BlockSolver {
    pub fn new(system: &BlockSystem, options: SolveOptions) -> Result<Self> {
        let matrix = system.full_matrix();
        let size = matrix.nrows();
        let engine = match options.method {
            SolverMethod::Direct => {
                if size > options.max_direct_unknowns {
                    return Err(BemError::TooLarge { size, budget: options.max_direct_unknowns });
                }
                let lu = matrix.clone().lu();
                let u = lu.u();
                let mut largest: f64 = 0.0;
                let mut smallest = (0usize, f64::INFINITY);
                for i in 0..size {
                    let d = u[(i, i)].norm();
                    largest = largest.max(d);
                    if d < smallest.1 {
                        smallest = (i, d);
                    }
                }
                if size > 0 && !(smallest.1 > 1e-14 * largest) {
                    return Err(BemError::SingularMatrix { pivot: smallest.0, magnitude: smallest.1 });
                }
                Engine::Lu(lu)
            }
            SolverMethod::Iterative => Engine::Gmres,
        };
        Ok(BlockSolver { matrix, n: system.n(), engine, options })
    }

    /// Solves with load `(ℓ, rhs2)`.
    pub fn solve(&self, rhs: &DVector<Complex64>, rhs2: &DVector<Complex64>) -> Result<DensitySolution> {
        let size = self.matrix.nrows();
        let mut b = DVector::zeros(size);
        b.rows_mut(0, self.n).copy_from(rhs);
        b.rows_mut(self.n, size - self.n).copy_from(rhs2);
        let bnorm = b.norm();
        if bnorm == 0.0 {
            return Ok(DensitySolution::zeros(self.n, size - self.n));
        }
        let (z, iterations) = match &self.engine {
            Engine::Lu(lu) => (lu.solve(&b).ok_or(BemError::SingularMatrix { pivot: 0, magnitude: 0.0 })?, 0),
            Engine::Gmres => gmres(&self.matrix, &b, &self.options)?,
        };
        let residual_norm = (&self.matrix * &z - &b).norm() / bnorm;
        Ok(DensitySolution {
            lambda: z.rows(0, self.n).iter().copied().collect(),
            mu: z.rows(self.n, size - self.n).iter().copied().collect(),
            residual_norm,
            iterations,
        })
    }
}

/// One-shot solve of an assembled system.
pub fn solve_block(system: &BlockSystem, options: SolveOptions) -> Result<DensitySolution> {
    BlockSolver::new(system, options)?.solve(&system.rhs, &system.rhs2)
}

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations.
fn gmres(a: &DMatrix<Complex64>, b: &DVector<Complex64>, opts: &SolveOptions) -> Result<(DVector<Complex64>, usize)> {
    let size = b.len();
    let restart = opts.restart.max(1).min(size.max(1));
    let bnorm = b.norm();
    let mut x = DVector::<Complex64>::zeros(size);
    let mut total = 0;
    let zero = Complex64::new(0.0, 0.0);
    loop {
        let r = b - a * &x;
        let beta = r.norm();
        if beta <= opts.tol * bnorm {
            return Ok((x, total));
        }
        if total >= opts.max_iter {
            return Err(BemError::NoConvergence { iterations: total, residual: beta / bnorm });
        }
        let mut v: Vec<DVector<Complex64>> = vec![r / Complex64::new(beta, 0.0)];
        let mut h = DMatrix::<Complex64>::zeros(restart + 1, restart);
        let mut cs = vec![0.0f64; restart];
        let mut sn = vec![zero; restart];
        let mut g = DVector::<Complex64>::zeros(restart + 1);
        g[0] = Complex64::new(beta, 0.0);
        let mut steps = 0;
        for j in 0..restart {
            let mut w = a * &v[j];
            for (i, vi) in v.iter().enumerate() {
                let hij = vi.dotc(&w);
                h[(i, j)] = hij;
                w -= vi * hij;
            }
            let wn = w.norm();
            h[(j + 1, j)] = Complex64::new(wn, 0.0);
            for i in 0..j {
                let (c, s) = (cs[i], sn[i]);
                let t = h[(i, j)] * c + s * h[(i + 1, j)];
                h[(i + 1, j)] = -s.conj() * h[(i, j)] + h[(i + 1, j)] * c;
                h[(i, j)] = t;
            }
            let (c, s, rr) = givens(h[(j, j)], h[(j + 1, j)]);
            cs[j] = c;
            sn[j] = s;
            h[(j, j)] = rr;
            h[(j + 1, j)] = zero;
            g[j + 1] = -s.conj() * g[j];
            g[j] *= c;
            steps = j + 1;
            total += 1;
            if g[j + 1].norm() <= opts.tol * bnorm || total >= opts.max_iter || wn == 0.0 {
                break;
            }
            v.push(w / Complex64::new(wn, 0.0));
        }
        let mut y = vec![zero; steps];
        for i in (0..steps).rev() {
            let mut s = g[i];
            for k in i + 1..steps {
                s -= h[(i, k)] * y[k];
            }
            y[i] = s / h[(i, i)];
        }
        for (i, yi) in y.iter().enumerate() {
            x += &v[i] * *yi;
        }
    }
}

/// Complex Givens rotation zeroing `b` in `(a, b)`: returns `(c, s, r)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    let an = a.norm();
    if b.norm() == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0), a);
    }
    if an == 0.0 {
        return (0.0, b.conj() / b.norm(), Complex64::new(b.norm(), 0.0));
    }
    let norm = (an * an + b.norm_sqr()).sqrt();
    let phase = a / an;
    let c = an / norm;
    let s = phase * b.conj() / norm;
    (c, s, phase * norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_rhs_manufactured, assemble_system, AssemblyOptions};
    use crate::geometry::build_cube_mesh;
    use crate::spaces::DiscreteSpaces;
    use crate::study::ManufacturedSolution;

    fn identity_system(n: usize, m: usize) -> BlockSystem {
        BlockSystem {
            a: DMatrix::identity(n, n),
            b: DMatrix::zeros(m, n),
            c: DMatrix::identity(m, m),
            rhs: DVector::from_fn(n, |i, _| Complex64::new(i as f64, -1.0)),
            rhs2: DVector::from_fn(m, |i, _| Complex64::new(0.5, i as f64)),
        }
    }

    #[test]
    fn identity_blocks_recover_data() {
        let sys = identity_system(4, 3);
        for method in [SolverMethod::Direct, SolverMethod::Iterative] {
            let s = solve_block(&sys, SolveOptions { method, ..Default::default() }).unwrap();
            for i in 0..4 {
                assert!((s.lambda[i] - sys.rhs[i]).norm() < 1e-14);
            }
            for i in 0..3 {
                assert!((s.mu[i] - sys.rhs2[i]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_load_gives_zero_solution() {
        let mut sys = identity_system(3, 2);
        sys.rhs.fill(Complex64::new(0.0, 0.0));
        sys.rhs2.fill(Complex64::new(0.0, 0.0));
        let s = solve_block(&sys, SolveOptions::default()).unwrap();
        assert!(s.lambda.iter().chain(&s.mu).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut sys = identity_system(3, 2);
        sys.a[(1, 1)] = Complex64::new(0.0, 0.0);
        match solve_block(&sys, SolveOptions::default()) {
            Err(BemError::SingularMatrix { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected singular matrix, got {other:?}"),
        }
    }

    #[test]
    fn budget_is_enforced() {
        let sys = identity_system(5, 5);
        let opts = SolveOptions { max_direct_unknowns: 9, ..Default::default() };
        assert!(matches!(solve_block(&sys, opts), Err(BemError::TooLarge { size: 10, budget: 9 })));
    }

    #[test]
    fn direct_and_iterative_agree_on_level1() {
        let mesh = build_cube_mesh(2.0, 1).unwrap();
        let spaces = DiscreteSpaces::new(&mesh).unwrap();
        let alpha = 0.5;
        let exact = ManufacturedSolution::new(alpha);
        let opts = AssemblyOptions::default();
        let rhs = assemble_rhs_manufactured(&spaces, &mesh, alpha, |x, n| exact.current(x, n), |x, n| exact.scalar(x, n), &opts.quad)
            .unwrap();
        let sys = assemble_system(&spaces, &mesh, alpha, &opts, rhs).unwrap();
        let direct = solve_block(&sys, SolveOptions::default()).unwrap();
        assert!(direct.residual_norm <= 1e-10);
        let iterative = solve_block(&sys, SolveOptions { method: SolverMethod::Iterative, tol: 1e-12, ..Default::default() }).unwrap();
        assert!(iterative.residual_norm <= 1e-11);
        let diff: f64 = direct.lambda.iter().zip(&iterative.lambda).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let scale: f64 = direct.lambda.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!(diff <= 1e-6 * scale);
    }
}
