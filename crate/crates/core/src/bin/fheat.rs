use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fheat::boundary::{boundary_cutoff, check_admissible_radius, BoundaryCutoff, SmallRCheck};
use fheat::estimates::{cutoff_profile, Certificate, CutoffProfile};
use fheat::flow::DistanceRate;
use fheat::harness::{
    convergence_study, run_batch, run_scenario, scenario_files, CertificateRequest, RunOptions,
    RunReport, Scenario, EXIT_FAIL, EXIT_HYPOTHESIS, EXIT_PASS,
};
use fheat::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fheat",
    version,
    about = "Weighted heat equation solver and estimate certifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (a directory of scenarios for `batch`).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Refinement levels: comparison level for `certify`/`batch`, level count for `converge`.
    #[arg(long)]
    refine: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and write the fields.
    Solve(Common),
    /// Solve and compute the requested certificates.
    Certify(Common),
    /// Space-time cut-off constants from the `[cutoff]` table.
    Cutoff(Common),
    /// Metric scale and distance-rate diagnostics of the `[flow]` table, plus the solve.
    Flow(Common),
    /// Admissibility of the boundary radii and the boundary cut-off.
    Boundary(Common),
    /// Dyadic convergence study.
    Converge(Common),
    /// Certify every scenario in a directory.
    Batch(Common),
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let body = serde_json::to_string_pretty(value).expect("reports serialize") + "\n";
    std::fs::write(dir.join(name), body)?;
    Ok(())
}

fn print_report(report: &RunReport) {
    if let Some(s) = &report.solve {
        println!(
            "{}: {} steps, {} Newton iterations, u in [{:e}, {:e}]{}",
            report.scenario.name,
            s.stats.steps,
            s.stats.newton_iterations,
            s.value_min,
            s.value_max,
            if s.bound_held {
                ""
            } else {
                ", declared bound violated"
            }
        );
    }
    if let Some(e) = &report.solve_error {
        println!(
            "{}: solve failed ({}): {}",
            report.scenario.name, e.class, e.message
        );
    }
    for o in &report.certificates {
        match (&o.certificate, &o.error) {
            (_, Some(e)) => println!("  {:?}: {} error: {}", o.request.kind(), e.class, e.message),
            (Some(c), None) => println!("  {}", line(c)),
            _ => {}
        }
    }
}

fn line(c: &Certificate) -> String {
    let mut s = format!("{:?}: {:?}", c.kind, c.verdict);
    if let Some(h) = c.headline() {
        s.push_str(&format!(" value {h:e}"));
    }
    if c.tolerance > 0.0 {
        s.push_str(&format!(" tol {:e}", c.tolerance));
    }
    if let Some(r) = &c.refinement {
        s.push_str(&format!(" drift {:.3}", r.relative_drift));
    }
    s
}

#[derive(Serialize)]
struct CutoffReport {
    profiles: Vec<CutoffProfile>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    boundary: Vec<BoundaryCutoff>,
}

fn cutoff(scenario: &Scenario, out: &Path) -> Result<i32> {
    let cfg = scenario
        .config
        .cutoff
        .as_ref()
        .ok_or_else(|| Error::Config("the cutoff command needs a [cutoff] table".into()))?;
    let mut report = CutoffReport {
        profiles: Vec::new(),
        boundary: Vec::new(),
    };
    for &eps in &cfg.epsilons {
        let p = cutoff_profile(cfg.radius, cfg.t0, cfg.duration, cfg.tau, eps)?;
        println!(
            "eps {eps}: m = {}, C = {:e}, C_eps = {:e}{}, properties {}",
            p.exponent,
            p.c_time,
            p.c_eps,
            if p.c_eps_bounded {
                ""
            } else {
                " (scan-dependent)"
            },
            if p.properties_hold { "hold" } else { "FAIL" }
        );
        report.profiles.push(p);
    }
    if let Some(domain) = &scenario.domain {
        for r in boundary_radii(scenario) {
            let b = boundary_cutoff(domain, r)?;
            println!(
                "boundary cut-off R = {r}: {}",
                if b.all_hold { "bounds hold" } else { "FAIL" }
            );
            report.boundary.push(b);
        }
    }
    write_json(out, "cutoff.json", &report)?;
    let ok = report.profiles.iter().all(|p| p.properties_hold)
        && report.boundary.iter().all(|b| b.all_hold);
    Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
}

fn boundary_radii(scenario: &Scenario) -> Vec<f64> {
    let mut radii: Vec<f64> = scenario
        .config
        .certificates
        .iter()
        .filter_map(|r| match r {
            CertificateRequest::Thm14 { radius, .. }
            | CertificateRequest::Thm15 { radius, .. }
            | CertificateRequest::Main5 { radius, .. }
            | CertificateRequest::IndexComparison { radius } => Some(*radius),
            _ => None,
        })
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    radii
}

#[derive(Serialize)]
struct BoundaryEntry {
    radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    small_r: Option<SmallRCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    index: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cutoff: Option<BoundaryCutoff>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn boundary(scenario: &Scenario, out: &Path) -> Result<i32> {
    let domain = scenario
        .domain
        .as_ref()
        .ok_or_else(|| Error::Config("the boundary command needs a [domain] table".into()))?;
    println!(
        "H = {}, K = {}, rolling radius {}",
        domain.h, domain.k, domain.rolling_r
    );
    let mut entries = Vec::new();
    let mut code = EXIT_PASS;
    for radius in boundary_radii(scenario) {
        let entry = match check_admissible_radius(domain, radius) {
            Ok((small, index)) => {
                let cut = boundary_cutoff(domain, radius)?;
                println!(
                    "R = {radius}: admissible, cut-off bounds {}",
                    if cut.all_hold { "hold" } else { "FAIL" }
                );
                if !cut.all_hold {
                    code = code.max(EXIT_FAIL);
                }
                BoundaryEntry {
                    radius,
                    small_r: Some(small),
                    index,
                    cutoff: Some(cut),
                    error: None,
                }
            }
            Err(e) => {
                println!("R = {radius}: {e}");
                code = code.max(if e.is_hypothesis_or_config() {
                    EXIT_HYPOTHESIS
                } else {
                    EXIT_FAIL
                });
                BoundaryEntry {
                    radius,
                    small_r: None,
                    index: None,
                    cutoff: None,
                    error: Some(e.to_string()),
                }
            }
        };
        entries.push(entry);
    }
    write_json(out, "boundary.json", &entries)?;
    Ok(code)
}

#[derive(Serialize)]
struct FlowReport {
    lambda: f64,
    kappa: f64,
    scale: Vec<(f64, f64)>,
    distance_rate: DistanceRate,
}

fn flow(scenario: &Scenario, out: &Path) -> Result<i32> {
    let spec = scenario
        .flow
        .as_ref()
        .ok_or_else(|| Error::Config("the flow command needs a [flow] table".into()))?;
    let r = scenario.grid.end();
    let scale = scenario
        .window
        .snapshots
        .iter()
        .map(|&t| spec.metric_scale(t).map(|s| (t, s)))
        .collect::<Result<Vec<_>>>()?;
    let report = FlowReport {
        lambda: spec.lambda(),
        kappa: spec.flow_kappa(),
        scale,
        distance_rate: spec.distance_rate_diagnostic(r, r)?,
    };
    println!(
        "lambda {}, kappa {:e}, distance rate {:e} (bound {:e})",
        report.lambda, report.kappa, report.distance_rate.max_rate, report.distance_rate.bound
    );
    write_json(out, "flow.json", &report)?;
    let run = run_scenario(
        scenario,
        &RunOptions {
            refine: 0,
            solve_only: true,
            out: Some(out.to_path_buf()),
        },
    )?;
    print_report(&run);
    Ok(run.exit_code())
}

fn certify(c: &Common, solve_only: bool) -> Result<i32> {
    let scenario = Scenario::load(&c.config)?;
    let options = RunOptions {
        refine: c.refine.unwrap_or(0),
        solve_only,
        out: Some(c.out.clone()),
    };
    let report = run_scenario(&scenario, &options)?;
    print_report(&report);
    Ok(report.exit_code())
}

fn converge(c: &Common) -> Result<i32> {
    let scenario = Scenario::load(&c.config)?;
    let table = convergence_study(&scenario, c.refine.unwrap_or(3) as usize)?;
    for l in &table.levels {
        println!(
            "N = {:5} dt = {:e} error = {} order = {}",
            l.nodes,
            l.dt,
            l.error.map_or("-".into(), |e| format!("{e:e}")),
            l.order.map_or("-".into(), |o| format!("{o:.3}"))
        );
    }
    for (kind, ratios) in &table.residual_ratios {
        println!("{kind:?} residual-min ratios {ratios:?}");
    }
    write_json(&c.out, "converge.json", &table)?;
    Ok(EXIT_PASS)
}

fn batch(c: &Common) -> Result<i32> {
    let files = scenario_files(&c.config)?;
    let report = run_batch(&files, &c.out, c.refine.unwrap_or(0))?;
    for e in &report.entries {
        let verdicts: Vec<String> = e
            .verdicts
            .iter()
            .map(|(k, v)| match v {
                Some(v) => format!("{k:?}={v:?}"),
                None => format!("{k:?}=error"),
            })
            .collect();
        println!("{} [exit {}] {}", e.name, e.exit_code, verdicts.join(" "));
    }
    Ok(report.exit_code())
}

fn run(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Solve(c) => certify(c, true),
        Command::Certify(c) => certify(c, false),
        Command::Cutoff(c) => cutoff(&Scenario::load(&c.config)?, &c.out),
        Command::Flow(c) => flow(&Scenario::load(&c.config)?, &c.out),
        Command::Boundary(c) => boundary(&Scenario::load(&c.config)?, &c.out),
        Command::Converge(c) => converge(c),
        Command::Batch(c) => batch(c),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("fheat: {e}");
            ExitCode::from(if e.is_hypothesis_or_config() {
                EXIT_HYPOTHESIS
            } else {
                EXIT_FAIL
            } as u8)
        }
    }
}
