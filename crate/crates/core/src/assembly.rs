//! Galerkin matrices `A`, `B`, `C` and load vectors.
//!
//! Every ordered panel pair `(k, l)` contributes through the moment matrix
//!
//! ```text
//! M_kl[a][b] = ∫∫ G_α(|x − y|) φ̂_a(x̂) φ̂_b(ŷ) dx̂ dŷ,   x on panel k, y on panel l
//! ```
//!
//! of the bilinear corner functions. RT components are combinations of the
//! same corner functions, so all three blocks are scattered from `M_kl`.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::geometry::SurfaceMesh;
use crate::kernels::green;
use crate::quadrature::{classify_pair, gauss_rule, PairQuadrature, PanelPairClass, QuadConfig};
use crate::spaces::{q1_reference_basis, DiscreteSpaces, RT_DIRECTION, RT_IN_Q1};
use crate::{CVec3, Complex64, Result, Vec3};

const PAIR_CHUNK: usize = 2048;

/// Matrices and right-hand sides of the saddle system
/// `[[A, Bᵀ], [B, C]] (λ, μ) = (ℓ, rhs2)`.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub a: DMatrix<Complex64>,
    /// `m × n`, rows indexed by scalar functions.
    pub b: DMatrix<Complex64>,
    pub c: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
    pub rhs2: DVector<Complex64>,
}

impl BlockSystem {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.c.nrows()
    }

    /// The assembled `(n + m)²` block matrix.
    pub fn full_matrix(&self) -> DMatrix<Complex64> {
        let (n, m) = (self.n(), self.m());
        let mut k = DMatrix::zeros(n + m, n + m);
        k.view_mut((0, 0), (n, n)).copy_from(&self.a);
        k.view_mut((0, n), (n, m)).copy_from(&self.b.transpose());
        k.view_mut((n, 0), (m, n)).copy_from(&self.b);
        k.view_mut((n, n), (m, m)).copy_from(&self.c);
        k
    }

    pub fn full_rhs(&self) -> DVector<Complex64> {
        let mut r = DVector::zeros(self.n() + self.m());
        r.rows_mut(0, self.n()).copy_from(&self.rhs);
        r.rows_mut(self.n(), self.m()).copy_from(&self.rhs2);
        r
    }

    /// Writes `A.bin`, `B.bin`, `C.bin`, `l.bin` (row-major little-endian complex128).
    pub fn write_binary(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_matrix(&dir.join("A.bin"), &self.a)?;
        write_matrix(&dir.join("B.bin"), &self.b)?;
        write_matrix(&dir.join("C.bin"), &self.c)?;
        let l = DMatrix::from_column_slice(self.rhs.len(), 1, self.rhs.as_slice());
        write_matrix(&dir.join("l.bin"), &l)?;
        Ok(())
    }
}

fn write_matrix(path: &Path, m: &DMatrix<Complex64>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Which integration-by-parts form builds `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BForm {
    /// `−(V_α(div_T ψ), φ)`.
    #[default]
    Divergence,
    /// `−(V_α(φ), div_T ψ)`.
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    pub quad: QuadConfig,
    /// Integrate each unordered pair once and reuse it transposed.
    pub mirror: bool,
    pub b_form: BForm,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions { quad: QuadConfig::default(), mirror: true, b_form: BForm::Divergence }
    }
}

/// Visits panel pairs in parallel chunks and consumes the results serially
/// in a fixed order, so the outcome does not depend on the thread count.
pub fn for_each_pair<T, F, C>(mesh: &SurfaceMesh, quad: &QuadConfig, upper_only: bool, compute: F, mut consume: C) -> Result<()>
where
    T: Send,
    F: Fn(usize, usize, &PanelPairClass, &PairQuadrature) -> T + Sync,
    C: FnMut(usize, usize, T),
{
    let pq = PairQuadrature::new(*quad)?;
    let np = mesh.num_panels();
    let pairs: Vec<(usize, usize)> = (0..np)
        .flat_map(|k| {
            let start = if upper_only { k } else { 0 };
            (start..np).map(move |l| (k, l))
        })
        .collect();
    for chunk in pairs.chunks(PAIR_CHUNK) {
        let results: Vec<Result<T>> = chunk
            .par_iter()
            .map(|&(k, l)| {
                let class = classify_pair(mesh.chart(k), mesh.chart(l))?;
                Ok(compute(k, l, &class, &pq))
            })
            .collect();
        for (&(k, l), r) in chunk.iter().zip(results) {
            consume(k, l, r?);
        }
    }
    Ok(())
}

type Moments = [[Complex64; 4]; 4];

fn pair_moments(mesh: &SurfaceMesh, k: usize, l: usize, class: &PanelPairClass, pq: &PairQuadrature, alpha: f64) -> Moments {
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    pq.visit(mesh.chart(k), mesh.chart(l), class, |xh, yh, r, w| {
        let g = green(alpha, r) * w;
        let px = q1_reference_basis(xh);
        let py = q1_reference_basis(yh);
        for a in 0..4 {
            let ga = g * px[a];
            for b in 0..4 {
                m[a][b] += ga * py[b];
            }
        }
    });
    m
}

fn transpose(m: &Moments) -> Moments {
    let mut t = *m;
    for a in 0..4 {
        for b in 0..4 {
            t[a][b] = m[b][a];
        }
    }
    t
}

#[derive(Clone, Copy)]
struct Blocks {
    a: bool,
    b: bool,
    c: bool,
}

struct Matrices {
    a: DMatrix<Complex64>,
    b: DMatrix<Complex64>,
    c: DMatrix<Complex64>,
}

fn scatter(
    mats: &mut Matrices,
    spaces: &DiscreteSpaces,
    mesh: &SurfaceMesh,
    alpha: f64,
    opts: &AssemblyOptions,
    which: Blocks,
    k: usize,
    l: usize,
    m: &Moments,
) {
    let (ck, cl) = (mesh.chart(k), mesh.chart(l));
    let dirs_k = [ck.a1, ck.a2];
    let dirs_l = [cl.a1, cl.a2];
    if which.a {
        // reduce M against the RT component coefficients on both sides
        for i in 0..4 {
            let (gi, si) = spaces.rt_map.global(k, i);
            for j in 0..4 {
                let (gj, sj) = spaces.rt_map.global(l, j);
                let dot = dirs_k[RT_DIRECTION[i]].dot(&dirs_l[RT_DIRECTION[j]]);
                if dot == 0.0 {
                    continue;
                }
                let mut s = Complex64::new(0.0, 0.0);
                for a in 0..4 {
                    let ca = RT_IN_Q1[i][a];
                    if ca == 0.0 {
                        continue;
                    }
                    for b in 0..4 {
                        s += m[a][b] * (ca * RT_IN_Q1[j][b]);
                    }
                }
                mats.a[(gi, gj)] += s * (si * sj * dot);
            }
        }
    }
    if which.b {
        match opts.b_form {
            BForm::Divergence => {
                for a in 0..4 {
                    let row: Complex64 = m[a].iter().sum();
                    let ga = spaces.q1_map.global(k, a).0;
                    for j in 0..4 {
                        let (gj, sj) = spaces.rt_map.global(l, j);
                        mats.b[(ga, gj)] -= row * (sj * ck.det);
                    }
                }
            }
            BForm::Dual => {
                for b in 0..4 {
                    let col: Complex64 = (0..4).map(|a| m[a][b]).sum();
                    let gb = spaces.q1_map.global(l, b).0;
                    for i in 0..4 {
                        let (gi, si) = spaces.rt_map.global(k, i);
                        mats.b[(gb, gi)] -= col * (si * cl.det);
                    }
                }
            }
        }
    }
    if which.c {
        let f = alpha * alpha * ck.det * cl.det;
        for a in 0..4 {
            let ga = spaces.q1_map.global(k, a).0;
            for b in 0..4 {
                let gb = spaces.q1_map.global(l, b).0;
                mats.c[(ga, gb)] += m[a][b] * f;
            }
        }
    }
}

fn assemble_blocks(
    spaces: &DiscreteSpaces,
    mesh: &SurfaceMesh,
    alpha: f64,
    opts: &AssemblyOptions,
    which: Blocks,
) -> Result<Matrices> {
    let (n, m) = (spaces.n_rt(), spaces.n_q1());
    let mut mats = Matrices {
        a: DMatrix::zeros(if which.a { n } else { 0 }, if which.a { n } else { 0 }),
        b: DMatrix::zeros(if which.b { m } else { 0 }, if which.b { n } else { 0 }),
        c: DMatrix::zeros(if which.c { m } else { 0 }, if which.c { m } else { 0 }),
    };
    for_each_pair(
        mesh,
        &opts.quad,
        opts.mirror,
        |k, l, class, pq| pair_moments(mesh, k, l, class, pq, alpha),
        |k, l, mut mom| {
            if opts.mirror && k == l {
                let t = transpose(&mom);
                for a in 0..4 {
                    for b in 0..4 {
                        mom[a][b] = 0.5 * (mom[a][b] + t[a][b]);
                    }
                }
            }
            scatter(&mut mats, spaces, mesh, alpha, opts, which, k, l, &mom);
            if opts.mirror && k != l {
                scatter(&mut mats, spaces, mesh, alpha, opts, which, l, k, &transpose(&mom));
            }
        },
    )?;
    Ok(mats)
}

/// `A[i][j] = a(ψ_j, ψ_i) = ∫∫ G_α ψ_i(x)·ψ_j(y)`.
pub fn assemble_a(spaces: &DiscreteSpaces, mesh: &SurfaceMesh, alpha: f64, opts: &AssemblyOptions) -> Result<DMatrix<Complex64>> {
    Ok(assemble_blocks(spaces, mesh, alpha, opts, Blocks { a: true, b: false, c: false })?.a)
}

/// `B[l][i] = −∫∫ G_α div_T ψ_i(y) φ_l(x)`.
pub fn assemble_b(spaces: &DiscreteSpaces, mesh: &SurfaceMesh, alpha: f64, opts: &AssemblyOptions) -> Result<DMatrix<Complex64>> {
    Ok(assemble_blocks(spaces, mesh, alpha, opts, Blocks { a: false, b: true, c: false })?.b)
}

/// `C[j][l] = α² ∫∫ G_α φ_j(y) φ_l(x)`.
pub fn assemble_c(spaces: &DiscreteSpaces, mesh: &SurfaceMesh, alpha: f64, opts: &AssemblyOptions) -> Result<DMatrix<Complex64>> {
    Ok(assemble_blocks(spaces, mesh, alpha, opts, Blocks { a: false, b: false, c: true })?.c)
}

/// All three blocks from one pass over the panel pairs, with the given load vector.
pub fn assemble_system(
    spaces: &DiscreteSpaces,
    mesh: &SurfaceMesh,
    alpha: f64,
    opts: &AssemblyOptions,
    rhs: DVector<Complex64>,
) -> Result<BlockSystem> {
    let mats = assemble_blocks(spaces, mesh, alpha, opts, Blocks { a: true, b: true, c: true })?;
    let m = spaces.n_q1();
    Ok(BlockSystem { a: mats.a, b: mats.b, c: mats.c, rhs, rhs2: DVector::zeros(m) })
}

/// A quadrature node on the surface, handed to boundary-data callbacks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub panel: usize,
    /// Index of the node within its panel's rule.
    pub node: usize,
    pub xh: [f64; 2],
    pub x: Vec3,
    pub normal: Vec3,
    /// Reference weight times the panel area.
    pub weight: f64,
}

/// The tensor-Gauss nodes used for load vectors, panel by panel.
pub fn rhs_nodes(mesh: &SurfaceMesh, order: usize) -> Result<Vec<SurfacePoint>> {
    let rule = gauss_rule(order)?;
    let mut out = Vec::with_capacity(mesh.num_panels() * rule.len());
    for (k, chart) in mesh.charts().iter().enumerate() {
        for (q, (xh, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            out.push(SurfacePoint {
                panel: k,
                node: q,
                xh: *xh,
                x: chart.map(*xh),
                normal: chart.normal,
                weight: w * chart.det,
            });
        }
    }
    Ok(out)
}

/// `ℓ_i = −∫ E⁰_T · ψ_i dS` by tensor Gauss of the given order.
pub fn assemble_rhs_incident<F>(spaces: &DiscreteSpaces, mesh: &SurfaceMesh, incident: F, order: usize) -> Result<DVector<Complex64>>
where
    F: Fn(&SurfacePoint) -> CVec3,
{
    let mut rhs = DVector::zeros(spaces.n_rt());
    for p in rhs_nodes(mesh, order)? {
        let e = incident(&p);
        let chart = mesh.chart(p.panel);
        let dirs = [chart.a1, chart.a2];
        let phi = q1_reference_basis(p.xh);
        // |det| of the measure cancels the 1/|det| of the Piola map
        let w = p.weight / chart.det;
        for i in 0..4 {
            let (g, s) = spaces.rt_map.global(p.panel, i);
            let c: f64 = (0..4).map(|a| RT_IN_Q1[i][a] * phi[a]).sum();
            let dir = dirs[RT_DIRECTION[i]];
            let dot = e.x * dir.x + e.y * dir.y + e.z * dir.z;
            rhs[g] -= dot * (s * c * w);
        }
    }
    Ok(rhs)
}

/// Load vector of the manufactured problem,
/// `ℓ(ψ) = a(J_ex, ψ) − ∫ V_α(M_ex) div_T ψ dS`, with the exact densities
/// evaluated at the source nodes of the pair rules.
pub fn assemble_rhs_manufactured<J, M>(
    spaces: &DiscreteSpaces,
    mesh: &SurfaceMesh,
    alpha: f64,
    current: J,
    scalar: M,
    quad: &QuadConfig,
) -> Result<DVector<Complex64>>
where
    J: Fn(&Vec3, &Vec3) -> Vec3 + Sync,
    M: Fn(&Vec3, &Vec3) -> f64 + Sync,
{
    let mut rhs = DVector::zeros(spaces.n_rt());
    for_each_pair(
        mesh,
        quad,
        false,
        |k, l, class, pq| {
            let (ck, cl) = (mesh.chart(k), mesh.chart(l));
            let dirs = [ck.a1, ck.a2];
            let mut local = [Complex64::new(0.0, 0.0); 4];
            pq.visit(ck, cl, class, |xh, yh, r, w| {
                let y = cl.map(yh);
                let j = current(&y, &cl.normal);
                let mval = scalar(&y, &cl.normal);
                let g = green(alpha, r) * (w * cl.det);
                let phi = q1_reference_basis(xh);
                for (i, slot) in local.iter_mut().enumerate() {
                    let c: f64 = (0..4).map(|a| RT_IN_Q1[i][a] * phi[a]).sum();
                    *slot += g * (dirs[RT_DIRECTION[i]].dot(&j) * c - mval);
                }
            });
            local
        },
        |k, _, local| {
            for (i, v) in local.iter().enumerate() {
                let (g, s) = spaces.rt_map.global(k, i);
                rhs[g] += v * s;
            }
        },
    )?;
    Ok(rhs)
}
