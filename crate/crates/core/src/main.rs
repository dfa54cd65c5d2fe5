use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use skinbem::fields::FieldEvaluator;
use skinbem::linsolve::SolverMethod;
use skinbem::spaces::DiscreteSpaces;
use skinbem::study::{self, StudyConfig};
use skinbem::{config, BemError, Vec3};

#[derive(Parser)]
#[command(name = "skinbem", version, about = "Boundary elements for perfect-conductor scattering and skin-effect expansions")]
struct Cli {
    /// Settings file in `key = value` form; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Wavenumber(s), comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Conductivity parameter of the expansion.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Refinement levels, e.g. `1-3` or `0,1,2`.
    #[arg(long, global = true)]
    levels: Option<String>,
    /// Gauss order for well-separated panel pairs.
    #[arg(long, global = true)]
    quad_far: Option<usize>,
    /// Gauss order of the singular pair transforms.
    #[arg(long, global = true)]
    quad_sing: Option<usize>,
    /// `direct` (LU) or `iterative` (GMRES).
    #[arg(long, global = true)]
    solver: Option<SolverMethod>,
    /// Omit timings from output files.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the manufactured problem on one level.
    Solve {
        #[arg(long, default_value_t = 1)]
        level: u32,
        /// Evaluate E at the points in this file (one `x y z` per line).
        #[arg(long)]
        points: Option<PathBuf>,
        /// Write the blocks A, B, C and the load vector as binary files.
        #[arg(long)]
        dump_matrices: bool,
    },
    /// Convergence study for every wavenumber.
    Table1,
    /// Expansion study at (3,0,0), (6,0,0), (9,0,0).
    Table2,
    /// Run the invariant checks.
    Selftest,
}

fn build_config(cli: &Cli) -> Result<StudyConfig, BemError> {
    let mut cfg = StudyConfig::default();
    if let Some(path) = &cli.config {
        config::load(&mut cfg, path)?;
    }
    let c = &cli.common;
    if let Some(a) = &c.alpha {
        cfg.alphas = a.clone();
    }
    if let Some(b) = c.beta {
        cfg.beta = b;
    }
    if let Some(l) = &c.levels {
        cfg.levels = config::parse_levels(l)?;
    }
    if let Some(n) = c.quad_far {
        cfg.quad.far_order = n;
    }
    if let Some(n) = c.quad_sing {
        cfg.quad.sing_order = n;
    }
    if let Some(s) = c.solver {
        cfg.solve.method = s;
    }
    if c.deterministic {
        cfg.deterministic = true;
    }
    if let Some(o) = &c.out {
        cfg.out = Some(o.clone());
    }
    cfg.quad.validate()?;
    Ok(cfg)
}

fn read_points(path: &PathBuf) -> Result<Vec<Vec3>, BemError> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|t| t.parse().map_err(|_| BemError::InvalidArgument(format!("bad point '{l}'")))).collect::<Result<_, _>>()?;
            match v[..] {
                [x, y, z] => Ok(Vec3::new(x, y, z)),
                _ => Err(BemError::InvalidArgument(format!("expected 3 coordinates in '{l}'"))),
            }
        })
        .collect()
}

fn solve(cfg: &StudyConfig, level: u32, points: Option<&PathBuf>, dump: bool) -> Result<(), BemError> {
    let alpha = *cfg.alphas.first().ok_or_else(|| BemError::Config("no alpha given".into()))?;
    let run = study::solve_manufactured(level, alpha, cfg)?;
    let e = run.errors;
    println!("alpha {alpha} level {level}: {} unknowns", run.solution.lambda.len() + run.solution.mu.len());
    println!("C_h      {:.9e}", run.c_h);
    println!("errJ     {:.9e}  (|J| = {:.9e})", e.err_j, e.norm_j);
    println!("errM     {:.9e}  (|M| = {:.9e})", e.err_m, e.norm_m);
    println!("residual {:.3e}", run.solution.residual_norm);
    let spaces = DiscreteSpaces::new(&run.mesh)?;
    if dump {
        let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
        let exact = study::exact_densities(alpha)?;
        let opts = skinbem::assembly::AssemblyOptions { quad: cfg.quad, ..Default::default() };
        let rhs = skinbem::assembly::assemble_rhs_manufactured(&spaces, &run.mesh, alpha, |x, n| exact.current(x, n), |x, n| exact.scalar(x, n), &opts.quad)?;
        skinbem::assembly::assemble_system(&spaces, &run.mesh, alpha, &opts, rhs)?.write_binary(&dir)?;
    }
    if let Some(path) = points {
        let pts = read_points(path)?;
        let ev = FieldEvaluator::new(&run.mesh, &spaces, alpha, &run.solution, cfg.quad)?;
        let mut csv = String::from("x,y,z,ReE1,ImE1,ReE2,ImE2,ReE3,ImE3\n");
        for s in ev.electric_batch(&pts)? {
            csv.push_str(&format!("{},{},{}", s.point.x, s.point.y, s.point.z));
            for c in s.e.iter() {
                csv.push_str(&format!(",{:.8e},{:.8e}", c.re, c.im));
            }
            csv.push('\n');
        }
        match &cfg.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("fields.csv"), csv)?;
            }
            None => std::io::stdout().write_all(csv.as_bytes())?,
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, BemError> {
    let cfg = build_config(cli)?;
    match &cli.command {
        Command::Solve { level, points, dump_matrices } => solve(&cfg, *level, points.as_ref(), *dump_matrices)?,
        Command::Table1 => {
            let results = study::run_table1(&cfg)?;
            for r in &results {
                println!("alpha = {}", r.alpha);
                print!("{}", study::table1_csv(r, cfg.deterministic));
            }
            print!("{}", study::rates_csv(&results));
        }
        Command::Table2 => {
            let r = study::run_table2(&cfg)?;
            print!("{}", study::table2_csv(&r));
        }
        Command::Selftest => {
            let checks = study::selftest()?;
            let mut ok = true;
            for c in &checks {
                println!("{} {:<40} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if !ok {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
