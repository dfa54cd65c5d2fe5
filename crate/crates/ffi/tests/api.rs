use std::ffi::{c_void, CStr};
use std::ptr;

use skinbem_ffi::*;

struct Handles {
    mesh: *mut SkbMesh,
    sol: *mut SkbSolution,
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            skb_solution_free(self.sol);
            skb_mesh_free(self.mesh);
        }
    }
}

fn cube(level: u32) -> Handles {
    let mut mesh = ptr::null_mut();
    assert_eq!(unsafe { skb_mesh_cube(2.0, level, &mut mesh) }, SkbStatus::Ok);
    Handles { mesh, sol: ptr::null_mut() }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(skb_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn plane_wave_round_trip() {
    let mut h = cube(1);
    assert_eq!(unsafe { skb_mesh_num_panels(h.mesh) }, 24);
    assert_eq!(unsafe { skb_solve_plane_wave(h.mesh, 0.5, &mut h.sol) }, SkbStatus::Ok);
    let (mut n, mut m) = (0, 0);
    assert_eq!(unsafe { skb_solution_num_dofs(h.sol, &mut n, &mut m) }, SkbStatus::Ok);
    assert_eq!((n, m), (48, 26));
    assert!(unsafe { skb_solution_residual(h.sol) } < 1e-10);
    assert!(unsafe { skb_solution_energy(h.sol) }.is_finite());

    let mut lambda = vec![0.0; 2 * n];
    let mut mu = vec![0.0; 2 * m];
    assert_eq!(unsafe { skb_solution_coefficients(h.sol, lambda.as_mut_ptr(), mu.as_mut_ptr()) }, SkbStatus::Ok);
    assert!(lambda.iter().any(|&v| v != 0.0));

    let points = [3.0, 0.0, 0.0, 0.0, 6.0, 1.0];
    let mut e = [f64::NAN; 12];
    assert_eq!(unsafe { skb_solution_electric_field(h.sol, points.as_ptr(), 2, e.as_mut_ptr()) }, SkbStatus::Ok);
    assert!(e.iter().all(|v| v.is_finite()) && e.iter().any(|&v| v != 0.0));

    let near = [2.01, 0.3, 0.2];
    let status = unsafe { skb_solution_electric_field(h.sol, near.as_ptr(), 1, e.as_mut_ptr()) };
    assert_eq!(status, SkbStatus::NearSurface);
    assert!(last_error().contains("margin"));
}

unsafe extern "C" fn dipole(x: *const f64, out: *mut f64, user: *mut c_void) {
    // curl(e₃ G_α(|x|)) = ∇G × e₃
    let alpha = *(user as *const f64);
    let x = std::slice::from_raw_parts(x, 3);
    let out = std::slice::from_raw_parts_mut(out, 6);
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let (c, s) = ((alpha * r).cos(), (alpha * r).sin());
    // (iαr − 1) e^{iαr} / (4πr³)
    let re = (-c - alpha * r * s) / (4.0 * std::f64::consts::PI * r.powi(3));
    let im = (alpha * r * c - s) / (4.0 * std::f64::consts::PI * r.powi(3));
    let g = [x[0], x[1], x[2]];
    let v = [g[1], -g[0], 0.0];
    for d in 0..3 {
        out[2 * d] = re * v[d];
        out[2 * d + 1] = im * v[d];
    }
}

#[test]
fn callback_incident_field_is_cancelled_outside() {
    let mut h = cube(2);
    let mut alpha = 0.5f64;
    let user = &mut alpha as *mut f64 as *mut c_void;
    assert_eq!(unsafe { skb_solve_incident(h.mesh, 0.5, Some(dipole), user, &mut h.sol) }, SkbStatus::Ok);
    let x = [3.0, 1.0, 0.5];
    let mut e = [0.0; 6];
    let mut e0 = [0.0; 6];
    assert_eq!(unsafe { skb_solution_electric_field(h.sol, x.as_ptr(), 1, e.as_mut_ptr()) }, SkbStatus::Ok);
    unsafe { dipole(x.as_ptr(), e0.as_mut_ptr(), user) };
    let err: f64 = e.iter().zip(&e0).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
    let norm: f64 = e0.iter().map(|a| a * a).sum::<f64>().sqrt();
    assert!(err / norm < 1e-2, "{}", err / norm);
}

#[test]
fn manufactured_energy_matches_library() {
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { skb_solve_manufactured(1, 0.5, &mut sol) }, SkbStatus::Ok);
    let c = unsafe { skb_solution_energy(sol) };
    unsafe { skb_solution_free(sol) };
    let cfg = skinbem::study::StudyConfig::default();
    let reference = skinbem::study::solve_manufactured(1, 0.5, &cfg).unwrap().c_h;
    assert!((c - reference).abs() <= 1e-12 * reference.abs());
}

#[test]
fn invalid_input_is_rejected() {
    let vertices = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0];
    let panels = [0usize, 1, 2, 3];
    let mut mesh = ptr::null_mut();
    let status = unsafe { skb_mesh_from_quads(vertices.as_ptr(), 4, panels.as_ptr(), 1, &mut mesh) };
    assert_eq!(status, SkbStatus::InvalidMesh, "{}", last_error());
    assert!(mesh.is_null());

    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { skb_solve_plane_wave(ptr::null(), 0.5, &mut sol) }, SkbStatus::NullPointer);
    assert_eq!(unsafe { skb_solve_manufactured(1, 0.0, &mut sol) }, SkbStatus::InvalidArgument);
    assert!(unsafe { skb_solution_energy(ptr::null()) }.is_nan());
    unsafe {
        skb_mesh_free(ptr::null_mut());
        skb_solution_free(ptr::null_mut());
    }
}
