//! Experiment driver: `solve` runs the epsilon scheme and writes the bundle,
//! `capacity` sweeps a refinement list, `verify` replays the solution-notion
//! checks on stored artifacts. Exit codes: 0 success (verify: all checks
//! pass), 1 config or input error, 2 non-convergence or failed checks.

use anisolve_core::config::{resolve_set, RunConfig};
use anisolve_core::csvio::{
    capacity_csv, checks_csv, grid_function_csv, read_grid_function, trace_csv, CheckRow,
};
use anisolve_core::diagnostics::{
    clamp_into_domain, concentration_check, entropy_residual, renormalized_residual,
    test_function_family, ConcentrationSide,
};
use anisolve_core::{
    capacity_compact, tolerances, Grid, GridFunction, SolutionBundle, SolverOptions,
};
use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "anisolve", version, about = "Anisotropic inclusion laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the regularization scheme and write u/w/nu/trace/report artifacts
    Solve(RunArgs),
    /// Compute set capacities across a refinement list
    Capacity(RunArgs),
    /// Check stored artifacts against the solution-notion identities
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's [output] dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the sampled test-function families
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the per-run summary on stdout
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Config file describing the run that produced the bundle
    #[arg(long)]
    config: PathBuf,
    /// Directory holding u.csv, w.csv and nu.csv
    #[arg(long)]
    bundle: PathBuf,
    /// Output directory for checks.csv (defaults to the bundle directory)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Solve(args) => cmd_solve(&args),
        Cmd::Capacity(args) => cmd_capacity(&args),
        Cmd::Verify(args) => cmd_verify(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// `ANISOLVE_THREADS` caps parallelism across independent runs in a sweep.
fn init_thread_pool() {
    if let Ok(v) = std::env::var("ANISOLVE_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    RunConfig::from_file(&path.to_string_lossy()).map_err(|e| anyhow::anyhow!("{e}"))
}

fn out_dir(args_out: &Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    args_out
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn cmd_solve(args: &RunArgs) -> anyhow::Result<u8> {
    let cfg = load_config(&args.config)?;
    let dir = out_dir(&args.out, &cfg);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let opts = SolverOptions {
        tol_scheme: cfg.tol_scheme,
        trace_truncation_k: cfg.trace_k.clone(),
        ..Default::default()
    };
    let result = anisolve_core::run_scheme(
        &cfg.grid,
        &cfg.field,
        &cfg.graph,
        &cfg.measure,
        &cfg.schedule,
        &opts,
    );
    let bundle = match result {
        Ok(b) => b,
        Err(e) => {
            std::fs::write(
                dir.join("report.txt"),
                format!("status: failed\nreason: {e}\n"),
            )?;
            eprintln!("solve failed: {e}");
            return Ok(2);
        }
    };

    std::fs::write(
        dir.join("u.csv"),
        grid_function_csv(&cfg.grid, bundle.u.values()),
    )?;
    std::fs::write(dir.join("w.csv"), grid_function_csv(&cfg.grid, &bundle.w))?;
    std::fs::write(dir.join("nu.csv"), grid_function_csv(&cfg.grid, &bundle.nu))?;
    std::fs::write(dir.join("trace.csv"), trace_csv(&bundle.trace))?;
    let report = solve_report(&bundle);
    std::fs::write(dir.join("report.txt"), &report)?;
    if !args.quiet {
        print!("{report}");
    }
    Ok(0)
}

fn solve_report(bundle: &SolutionBundle) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(s, "status: converged");
    let _ = writeln!(s, "final_eps: {}", bundle.final_eps);
    let _ = writeln!(s, "final_residual: {:e}", bundle.final_residual);
    let _ = writeln!(s, "variation: {}", bundle.variation);
    let _ = writeln!(s, "max_u: {}", bundle.u.max_abs());
    let _ = writeln!(
        s,
        "energy: {}",
        anisolve_core::anisotropic_energy(&bundle.grid, &bundle.u)
    );
    let _ = writeln!(s, "nu_l1: {}", bundle.nu_l1());
    let _ = writeln!(
        s,
        "max_membership_defect: {:e}",
        bundle.max_membership_defect()
    );
    let _ = writeln!(
        s,
        "complementarity_defect: {:e}",
        bundle.complementarity_defect()
    );
    let _ = writeln!(
        s,
        "dom_confinement_violation: {:e}",
        bundle.dom_confinement_violation()
    );
    let maxu = bundle.u.max_abs();
    if maxu > 0.0 {
        let _ = writeln!(s, "truncation_energy_bound_table:");
        for frac in [0.25, 0.5, 1.0, 2.0] {
            let k = frac * maxu;
            let energy = bundle.estimate_truncation_energy(k);
            let bound = bundle.variation / bundle.field.lambda * k * tolerances::ESTIMATE_HEADROOM;
            let _ = writeln!(s, "  k={k} energy={energy} bound={bound}");
        }
        let _ = writeln!(s, "tail_energy_table:");
        let start = maxu.ceil().max(1.0) as u32;
        for n in start..start + 3 {
            let _ = writeln!(s, "  n={n} value={}", bundle.tail_energy(n));
        }
    }
    s
}

fn cmd_capacity(args: &RunArgs) -> anyhow::Result<u8> {
    use rayon::prelude::*;
    let cfg = load_config(&args.config)?;
    let Some(spec) = cfg.capacity.clone() else {
        anyhow::bail!("{}: missing [capacity] section", args.config.display());
    };
    let dir = out_dir(&args.out, &cfg);
    std::fs::create_dir_all(&dir)?;

    let lengths = cfg.grid.lengths().to_vec();
    let exponents = cfg.grid.exponents().to_vec();
    let dim = cfg.grid.dim();
    let rows: Vec<(String, usize, f64)> = spec
        .refine
        .par_iter()
        .map(|&n| {
            let counts = vec![n; dim];
            let grid = Grid::new(&counts, &lengths, &exponents).expect("refined grid is valid");
            let set = resolve_set(&grid, &spec.set);
            let value = capacity_compact(&grid, &set);
            (spec.label.clone(), n, value)
        })
        .collect();

    std::fs::write(dir.join("capacity.csv"), capacity_csv(&rows))?;
    if !args.quiet {
        for (set, n, v) in &rows {
            println!("capacity[{set}] n={n}: {v}");
        }
    }
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<u8> {
    let cfg = load_config(&args.config)?;
    let bundle_dir = &args.bundle;
    for name in ["u.csv", "w.csv", "nu.csv"] {
        if !bundle_dir.join(name).exists() {
            anyhow::bail!("missing bundle file: {}", bundle_dir.join(name).display());
        }
    }
    let u_values = read_grid_function(&bundle_dir.join("u.csv"), &cfg.grid)
        .with_context(|| "reading u.csv")?;
    let w = read_grid_function(&bundle_dir.join("w.csv"), &cfg.grid)
        .with_context(|| "reading w.csv")?;
    let nu = read_grid_function(&bundle_dir.join("nu.csv"), &cfg.grid)
        .with_context(|| "reading nu.csv")?;
    let u = GridFunction::from_values(&cfg.grid, u_values)
        .map_err(|e| anyhow::anyhow!("u.csv: {e}"))?;

    let bundle = SolutionBundle::from_parts(
        cfg.grid.clone(),
        cfg.field.clone(),
        cfg.graph.clone(),
        cfg.measure.clone(),
        u,
        w,
        nu,
        cfg.tol_scheme,
    );
    let seed = args.seed.unwrap_or(cfg.seed);
    let rows = run_checks(&bundle, seed);

    let dir = args.out.clone().unwrap_or_else(|| bundle_dir.clone());
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("checks.csv"), checks_csv(&rows))?;
    let failures = rows.iter().filter(|r| !r.pass).count();
    if !args.quiet {
        for r in &rows {
            println!(
                "{} [{}] value={:e} threshold={:e} {}",
                r.name,
                r.params,
                r.value,
                r.threshold,
                if r.pass { "pass" } else { "FAIL" }
            );
        }
        println!("checks: {} total, {} failed", rows.len(), failures);
    }
    Ok(if failures == 0 { 0 } else { 2 })
}

fn run_checks(bundle: &SolutionBundle, seed: u64) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let tol_identity = tolerances::TOL_IDENTITY_FACTOR * (1.0 + bundle.variation);
    let maxu = bundle.u.max_abs();
    let family = test_function_family(&bundle.grid, &bundle.u, seed);

    for (name, xi) in &family {
        let levels = [maxu + 1.0, maxu + 10.0];
        let mut defects = [0.0; 2];
        for (i, &l) in levels.iter().enumerate() {
            defects[i] = renormalized_residual(bundle, l, xi);
            rows.push(CheckRow {
                name: "renormalized_identity".into(),
                params: format!("l={l};xi={name}"),
                value: defects[i],
                threshold: tol_identity,
                pass: defects[i] <= tol_identity,
            });
        }
        let drift = (defects[0] - defects[1]).abs();
        rows.push(CheckRow {
            name: "weak_form_l_agreement".into(),
            params: format!("xi={name}"),
            value: drift,
            threshold: 1e-12,
            pass: drift <= 1e-12,
        });
        let admissible = clamp_into_domain(bundle, xi);
        for k in [1.0, 2.0] {
            match entropy_residual(bundle, &admissible, k) {
                Ok(resid) => rows.push(CheckRow {
                    name: "entropy_inequality".into(),
                    params: format!("k={k};xi={name}"),
                    value: resid,
                    threshold: tol_identity,
                    pass: resid <= tol_identity,
                }),
                Err(e) => rows.push(CheckRow {
                    name: "entropy_inequality".into(),
                    params: format!("k={k};xi={name};error={e}"),
                    value: f64::NAN,
                    threshold: tol_identity,
                    pass: false,
                }),
            }
        }
    }

    if maxu > 0.0 {
        for frac in [0.25, 0.5, 1.0, 2.0] {
            let k = frac * maxu;
            let energy = bundle.estimate_truncation_energy(k);
            let bound = bundle.variation / bundle.field.lambda * k * tolerances::ESTIMATE_HEADROOM;
            rows.push(CheckRow {
                name: "truncation_energy_linear_bound".into(),
                params: format!("k={k}"),
                value: energy,
                threshold: bound,
                pass: energy <= bound,
            });
        }
    }

    let start = maxu.ceil().max(1.0) as u32;
    for n in start..start + 3 {
        let band = bundle.tail_energy(n);
        rows.push(CheckRow {
            name: "tail_energy_vanishes".into(),
            params: format!("n={n}"),
            value: band,
            threshold: 0.0,
            pass: band <= 0.0,
        });
    }

    let defect = bundle.max_membership_defect();
    rows.push(CheckRow {
        name: "graph_membership".into(),
        params: String::new(),
        value: defect,
        threshold: bundle.tol_conc,
        pass: defect <= bundle.tol_conc,
    });
    let comp = bundle.complementarity_defect();
    rows.push(CheckRow {
        name: "complementarity".into(),
        params: String::new(),
        value: comp,
        threshold: tolerances::TOL_COMPLEMENTARITY,
        pass: comp <= tolerances::TOL_COMPLEMENTARITY,
    });
    let confinement = bundle.dom_confinement_violation();
    rows.push(CheckRow {
        name: "dom_confinement".into(),
        params: String::new(),
        value: confinement,
        threshold: 0.0,
        pass: confinement <= 0.0,
    });

    let (m, big) = bundle.graph.dom();
    let slack = tolerances::TOL_SIGN_FACTOR * (1.0 + bundle.variation);
    if big.is_finite() || m.is_finite() {
        for (name, xi) in &family {
            let xi = xi.map_zero_preserving(f64::abs);
            if big.is_finite() {
                let v = concentration_check(bundle, big, ConcentrationSide::Above, &xi);
                rows.push(CheckRow {
                    name: "concentration_upper_sign".into(),
                    params: format!("lambda={big};xi={name}"),
                    value: v,
                    threshold: -slack,
                    pass: v >= -slack,
                });
            }
            if m.is_finite() {
                let v = concentration_check(bundle, m, ConcentrationSide::Below, &xi);
                rows.push(CheckRow {
                    name: "concentration_lower_sign".into(),
                    params: format!("lambda={m};xi={name}"),
                    value: v,
                    threshold: slack,
                    pass: v <= slack,
                });
            }
        }
    }
    // without contact the singular part must vanish identically
    let minu = bundle
        .u
        .values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let inactive = (!big.is_finite() || maxu < big - bundle.tol_conc)
        && (!m.is_finite() || minu > m + bundle.tol_conc);
    if inactive {
        let l1 = bundle.nu_l1();
        rows.push(CheckRow {
            name: "nu_vanishes_without_contact".into(),
            params: String::new(),
            value: l1,
            threshold: 0.0,
            pass: l1 <= 0.0,
        });
    }

    rows
}
