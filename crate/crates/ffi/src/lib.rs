//! C interface to `skinbem`.
//!
//! Every function returns an [`SkbStatus`]; on failure a description is
//! available from [`skb_last_error`] on the same thread. Handles are opaque
//! and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use skinbem::assembly::{assemble_rhs_incident, assemble_rhs_manufactured, assemble_system, AssemblyOptions};
use skinbem::fields::FieldEvaluator;
use skinbem::geometry::{build_cube_mesh, SurfaceMesh};
use skinbem::linsolve::{solve_block, DensitySolution, SolveOptions};
use skinbem::quadrature::QuadConfig;
use skinbem::spaces::DiscreteSpaces;
use skinbem::study::{energy_functional, exact_densities, plane_wave};
use skinbem::{BemError, CVec3, Complex64, Vec3};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidMesh = 3,
    SingularMatrix = 4,
    TooLarge = 5,
    NoConvergence = 6,
    NearSurface = 7,
    Io = 8,
    Internal = 9,
}

/// A closed quadrilateral surface mesh.
pub struct SkbMesh {
    mesh: SurfaceMesh,
}

/// Densities of one solve together with the mesh they live on.
pub struct SkbSolution {
    mesh: SurfaceMesh,
    spaces: DiscreteSpaces,
    alpha: f64,
    solution: DensitySolution,
    rhs: Vec<Complex64>,
}

/// Incident field callback: writes `Re E⁰₁, Im E⁰₁, …, Im E⁰₃` for the point
/// `x[0..3]` into `out[0..6]`.
pub type SkbIncidentFn = Option<unsafe extern "C" fn(x: *const f64, out: *mut f64, user: *mut c_void)>;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &BemError) -> SkbStatus {
    match e {
        BemError::InvalidArgument(_) | BemError::UnsupportedOrder(_) | BemError::LocalIndex(_) | BemError::Config(_) => {
            SkbStatus::InvalidArgument
        }
        BemError::NonManifoldEdge { .. }
        | BemError::NonParallelogram { .. }
        | BemError::InconsistentOrientation { .. }
        | BemError::UnclassifiedPair(..) => SkbStatus::InvalidMesh,
        BemError::SingularMatrix { .. } => SkbStatus::SingularMatrix,
        BemError::TooLarge { .. } => SkbStatus::TooLarge,
        BemError::NoConvergence { .. } => SkbStatus::NoConvergence,
        BemError::NearSurface { .. } | BemError::OnPanelBoundary | BemError::Coincident => SkbStatus::NearSurface,
        BemError::Io(_) => SkbStatus::Io,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard<F: FnOnce() -> Result<(), (SkbStatus, String)>>(f: F) -> SkbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkbStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            SkbStatus::Internal
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (SkbStatus, String)>;
}

impl<T> IntoFfi<T> for skinbem::Result<T> {
    fn ffi(self) -> Result<T, (SkbStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(name: &str) -> (SkbStatus, String) {
    (SkbStatus::NullPointer, format!("{name} is null"))
}

fn solve_with(mesh: SurfaceMesh, alpha: f64, incident: impl Fn(&Vec3) -> CVec3) -> skinbem::Result<SkbSolution> {
    let spaces = DiscreteSpaces::new(&mesh)?;
    let rhs = assemble_rhs_incident(&spaces, &mesh, |p| incident(&p.x), 4)?;
    let system = assemble_system(&spaces, &mesh, alpha, &AssemblyOptions::default(), rhs)?;
    let solution = solve_block(&system, SolveOptions::default())?;
    Ok(SkbSolution { rhs: system.rhs.iter().copied().collect(), mesh, spaces, alpha, solution })
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message of the last failed call on this thread; valid until the next call.
#[no_mangle]
pub extern "C" fn skb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn skb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Uniformly refined cube `[-h, h]³` with `6·4^level` panels.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skb_mesh_cube(half_width: f64, level: u32, out: *mut *mut SkbMesh) -> SkbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mesh = build_cube_mesh(half_width, level).ffi()?;
        write_out(out, SkbMesh { mesh });
        Ok(())
    })
}

/// Mesh from `n_vertices` points (`3·n_vertices` doubles) and `n_panels`
/// counterclockwise quadrilaterals (`4·n_panels` vertex indices).
///
/// # Safety
/// The arrays must hold the stated number of entries and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn skb_mesh_from_quads(
    vertices: *const f64,
    n_vertices: usize,
    panels: *const usize,
    n_panels: usize,
    out: *mut *mut SkbMesh,
) -> SkbStatus {
    guard(|| {
        if vertices.is_null() || panels.is_null() || out.is_null() {
            return Err(null("vertices, panels or out"));
        }
        let v = std::slice::from_raw_parts(vertices, 3 * n_vertices);
        let p = std::slice::from_raw_parts(panels, 4 * n_panels);
        let vertices = v.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
        let panels = p.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
        let mesh = SurfaceMesh::new(vertices, panels).ffi()?;
        write_out(out, SkbMesh { mesh });
        Ok(())
    })
}

/// # Safety
/// `mesh` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn skb_mesh_num_panels(mesh: *const SkbMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.num_panels())
}

/// # Safety
/// `mesh` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn skb_mesh_free(mesh: *mut SkbMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Solves the scattering problem for the plane wave `e₃ e^{iαx₁}`.
///
/// # Safety
/// `mesh` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn skb_solve_plane_wave(mesh: *const SkbMesh, alpha: f64, out: *mut *mut SkbSolution) -> SkbStatus {
    guard(|| {
        let mesh = mesh.as_ref().ok_or_else(|| null("mesh"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sol = solve_with(mesh.mesh.clone(), alpha, plane_wave(alpha)).ffi()?;
        write_out(out, sol);
        Ok(())
    })
}

/// Solves the scattering problem for a user-supplied incident field. The
/// callback is invoked sequentially on the calling thread.
///
/// # Safety
/// `mesh` and `out` must be valid pointers; `incident` must be safe to call
/// with `user`.
#[no_mangle]
pub unsafe extern "C" fn skb_solve_incident(
    mesh: *const SkbMesh,
    alpha: f64,
    incident: SkbIncidentFn,
    user: *mut c_void,
    out: *mut *mut SkbSolution,
) -> SkbStatus {
    guard(|| {
        let mesh = mesh.as_ref().ok_or_else(|| null("mesh"))?;
        let f = incident.ok_or_else(|| null("incident"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let field = |x: &Vec3| {
            let mut v = [0.0; 6];
            f([x.x, x.y, x.z].as_ptr(), v.as_mut_ptr(), user);
            CVec3::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]), Complex64::new(v[4], v[5]))
        };
        let sol = solve_with(mesh.mesh.clone(), alpha, field).ffi()?;
        write_out(out, sol);
        Ok(())
    })
}

/// Solves the manufactured benchmark on the cube `[-2, 2]³` at `level`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skb_solve_manufactured(level: u32, alpha: f64, out: *mut *mut SkbSolution) -> SkbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let run = || -> skinbem::Result<SkbSolution> {
            let exact = exact_densities(alpha)?;
            let mesh = build_cube_mesh(2.0, level)?;
            let spaces = DiscreteSpaces::new(&mesh)?;
            let opts = AssemblyOptions::default();
            let rhs = assemble_rhs_manufactured(&spaces, &mesh, alpha, |x, n| exact.current(x, n), |x, n| exact.scalar(x, n), &opts.quad)?;
            let system = assemble_system(&spaces, &mesh, alpha, &opts, rhs)?;
            let solution = solve_block(&system, SolveOptions::default())?;
            Ok(SkbSolution { rhs: system.rhs.iter().copied().collect(), mesh, spaces, alpha, solution })
        };
        write_out(out, run().ffi()?);
        Ok(())
    })
}

/// Energy functional `C_h = −Re(ℓᵀλ)`.
///
/// # Safety
/// `solution` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn skb_solution_energy(solution: *const SkbSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| energy_functional(&s.solution, &s.rhs))
}

/// Numbers of current (edge) and density (vertex) unknowns.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn skb_solution_num_dofs(solution: *const SkbSolution, n_current: *mut usize, n_density: *mut usize) -> SkbStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        if n_current.is_null() || n_density.is_null() {
            return Err(null("n_current or n_density"));
        }
        *n_current = s.spaces.n_rt();
        *n_density = s.spaces.n_q1();
        Ok(())
    })
}

/// Relative residual of the linear solve.
///
/// # Safety
/// `solution` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn skb_solution_residual(solution: *const SkbSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.solution.residual_norm)
}

/// Copies the coefficients as interleaved `(re, im)` pairs: `2·n_current`
/// doubles into `current` and `2·n_density` into `density`.
///
/// # Safety
/// The buffers must be large enough.
#[no_mangle]
pub unsafe extern "C" fn skb_solution_coefficients(solution: *const SkbSolution, current: *mut f64, density: *mut f64) -> SkbStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        if current.is_null() || density.is_null() {
            return Err(null("current or density"));
        }
        for (src, dst) in [(&s.solution.lambda, current), (&s.solution.mu, density)] {
            let buf = std::slice::from_raw_parts_mut(dst, 2 * src.len());
            for (z, pair) in src.iter().zip(buf.chunks_exact_mut(2)) {
                pair[0] = z.re;
                pair[1] = z.im;
            }
        }
        Ok(())
    })
}

/// Scattered electric field at `n` points (`3·n` doubles); writes `6·n`
/// doubles `Re E₁, Im E₁, …, Im E₃` per point. Points closer to the surface
/// than a tenth of the local panel size are rejected.
///
/// # Safety
/// The buffers must hold the stated number of entries.
#[no_mangle]
pub unsafe extern "C" fn skb_solution_electric_field(solution: *const SkbSolution, points: *const f64, n: usize, out: *mut f64) -> SkbStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        if points.is_null() || out.is_null() {
            return Err(null("points or out"));
        }
        let pts: Vec<Vec3> = std::slice::from_raw_parts(points, 3 * n).chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
        let ev = FieldEvaluator::new(&s.mesh, &s.spaces, s.alpha, &s.solution, QuadConfig::default()).ffi()?;
        let samples = ev.electric_batch(&pts).ffi()?;
        let buf = std::slice::from_raw_parts_mut(out, 6 * n);
        for (sample, chunk) in samples.iter().zip(buf.chunks_exact_mut(6)) {
            for (d, z) in sample.e.iter().enumerate() {
                chunk[2 * d] = z.re;
                chunk[2 * d + 1] = z.im;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `solution` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn skb_solution_free(solution: *mut SkbSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;
    use std::ptr;

    #[test]
    fn errors_are_reported() {
        let mut mesh = ptr::null_mut();
        let status = unsafe { skb_mesh_cube(-1.0, 0, &mut mesh) };
        assert_ne!(status, SkbStatus::Ok);
        assert!(mesh.is_null());
        let msg = unsafe { CStr::from_ptr(skb_last_error()) }.to_str().unwrap();
        assert!(!msg.is_empty());
        assert_eq!(unsafe { skb_mesh_cube(2.0, 0, ptr::null_mut()) }, SkbStatus::NullPointer);
    }

    #[test]
    fn version_is_terminated() {
        let v = unsafe { CStr::from_ptr(skb_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
