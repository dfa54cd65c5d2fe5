mod oracle;

use std::f64::consts::PI;

use skinbem::assembly::{assemble_rhs_incident, assemble_system, AssemblyOptions};
use skinbem::fields::{panel_potential, FieldEvaluator, Side};
use skinbem::geometry::{build_cube_mesh, PanelChart};
use skinbem::kernels::kernel_gradient;
use skinbem::linsolve::{solve_block, DensitySolution, SolveOptions};
use skinbem::quadrature::{PairQuadrature, QuadConfig};
use skinbem::spaces::DiscreteSpaces;
use skinbem::study::fitted_rate;
use skinbem::{CVec3, Complex64, Vec3};

/// Field of a magnetic dipole `p` at `x0`, `curl(p G_α(|x − x0|))`.
fn dipole(alpha: f64, x0: Vec3, p: Vec3) -> impl Fn(&Vec3) -> CVec3 {
    move |x| {
        let g = kernel_gradient(alpha, x, &x0).unwrap();
        let p = p.map(|c| Complex64::new(c, 0.0));
        CVec3::new(g.y * p.z - g.z * p.y, g.z * p.x - g.x * p.z, g.x * p.y - g.y * p.x)
    }
}

fn solve_incident(level: u32, alpha: f64, incident: &dyn Fn(&Vec3) -> CVec3) -> (skinbem::geometry::SurfaceMesh, DiscreteSpaces, DensitySolution) {
    let mesh = build_cube_mesh(2.0, level).unwrap();
    let spaces = DiscreteSpaces::new(&mesh).unwrap();
    let rhs = assemble_rhs_incident(&spaces, &mesh, |p| incident(&p.x), 6).unwrap();
    let sys = assemble_system(&spaces, &mesh, alpha, &AssemblyOptions::default(), rhs).unwrap();
    let sol = solve_block(&sys, SolveOptions::default()).unwrap();
    (mesh, spaces, sol)
}

#[test]
fn panel_potential_matches_oracle() {
    let chart = PanelChart::from_vectors(Vec3::zeros(), Vec3::x(), Vec3::y());
    let quad = PairQuadrature::new(QuadConfig::default()).unwrap();
    let on_panel = [Vec3::new(0.5, 0.5, 0.0), Vec3::new(0.2, 0.9, 0.0), Vec3::new(1.0, 0.3, 0.0)];
    for x in [Vec3::new(0.5, 0.5, 10.0), Vec3::new(0.2, 0.9, 1.5), Vec3::new(1.3, -0.4, 0.6)].into_iter().chain(on_panel) {
        let ours = panel_potential(&chart, 0.0, &x, |_| Complex64::new(1.0, 0.0), &quad);
        let reference = oracle::inner_rectangle(&chart, [1.0, 0.0, 0.0, 0.0], &x) / (4.0 * PI);
        assert!(((ours.re - reference) / reference).abs() <= 1e-10, "{x:?}: {} vs {reference}", ours.re);
        let bilinear = panel_potential(&chart, 0.0, &x, |y| Complex64::new(y[0] * y[1], 0.0), &quad);
        let reference = oracle::inner_rectangle(&chart, [0.0, 0.0, 0.0, 1.0], &x) / (4.0 * PI);
        assert!(((bilinear.re - reference) / reference).abs() <= 1e-10);
    }
}

#[test]
fn dipole_scattering_reproduces_negative_incident_field() {
    // a source inside the conductor is cancelled exactly outside: E = −E⁰
    let alpha = 0.5;
    let e0 = dipole(alpha, Vec3::new(0.3, -0.2, 0.1), Vec3::new(0.2, 0.5, 1.0));
    let x = Vec3::new(3.0, 1.0, 0.5);
    let errors: Vec<f64> = (0..=2)
        .map(|level| {
            let (mesh, spaces, sol) = solve_incident(level, alpha, &e0);
            let ev = FieldEvaluator::new(&mesh, &spaces, alpha, &sol, QuadConfig::default()).unwrap();
            (ev.electric(&x).unwrap() + e0(&x)).norm() / e0(&x).norm()
        })
        .collect();
    assert!(errors[2] < 1e-2 && errors[2] < errors[0] / 3.0, "{errors:?}");
}

#[test]
fn far_field_decays_like_one_over_r() {
    let alpha = 0.5;
    let e0 = dipole(alpha, Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0));
    let (mesh, spaces, sol) = solve_incident(1, alpha, &e0);
    let ev = FieldEvaluator::new(&mesh, &spaces, alpha, &sol, QuadConfig::default()).unwrap();
    let dir = Vec3::new(1.0, 0.3, 0.2).normalize();
    let r: Vec<f64> = (0..6).map(|i| 20.0 * 10f64.powf(i as f64 / 5.0)).collect();
    let e: Vec<f64> = r.iter().map(|&r| ev.electric(&(dir * r)).unwrap().norm()).collect();
    let slope = fitted_rate(&r, &e).unwrap();
    assert!((slope + 1.0).abs() <= 0.05, "{slope}");
}

#[test]
fn magnetic_trace_jump_at_random_points() {
    let alpha = 0.5;
    let e0 = dipole(alpha, Vec3::new(0.1, 0.2, -0.3), Vec3::new(1.0, 0.0, 0.4));
    let (mesh, spaces, sol) = solve_incident(1, alpha, &e0);
    let ev = FieldEvaluator::new(&mesh, &spaces, alpha, &sol, QuadConfig::default()).unwrap();
    let mut state = 0x2545_f491_4f6c_dd1d_u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let points: Vec<(usize, [f64; 2])> =
        (0..20).map(|_| ((next() * mesh.num_panels() as f64) as usize, [0.02 + 0.96 * next(), 0.02 + 0.96 * next()])).collect();
    let jmax = points.iter().map(|&(k, xh)| ev.current(k, xh).norm()).fold(0.0, f64::max);
    for (k, xh) in points {
        let plus = ev.magnetic_trace(k, xh, Side::Exterior).unwrap();
        let minus = ev.magnetic_trace(k, xh, Side::Interior).unwrap();
        assert!((plus - minus - ev.current(k, xh)).norm() <= 1e-8 * jmax);
        let n = mesh.chart(k).normal;
        assert!((plus.x * n.x + plus.y * n.y + plus.z * n.z).norm() <= 1e-10 * plus.norm().max(1e-30));
    }
}
