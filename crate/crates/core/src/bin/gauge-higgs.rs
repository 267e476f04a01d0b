use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gauge_higgs::config::{parse_config, Config};
use gauge_higgs::engine::run_point;
use gauge_higgs::model::write_snapshot;
use gauge_higgs::observables::estimate_uc;
use gauge_higgs::oracles::run_oracle_checks;
use gauge_higgs::output::{
    read_text, write_file, write_point_csv, write_scan_csv, write_transition_report, RunManifest,
};
use gauge_higgs::profile::{density_deviation, export_contour_slice, solve_static_field, write_slice_table};
use gauge_higgs::scan::{classify_transition, run_hysteresis_scan, ClassifierThresholds, ScanAxis, ScanPoint};
use gauge_higgs::Result;

/// Monte Carlo scans of the anisotropic 4D U(1) gauge-Higgs model.
#[derive(Parser)]
#[command(name = "gauge-higgs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Go-and-back scan of one coupling plus transition classification.
    Scan,
    /// A single parameter point.
    Point,
    /// Static-charge density profile slice.
    Profile,
    /// Run the oracle checks and print a pass/fail table.
    Oracle,
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(&read_text(path)?)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w.max(1);
    }
    Ok(cfg)
}

fn save_manifest(out: &Path, manifest: &RunManifest) -> Result<()> {
    write_file(&out.join("manifest.cfg"), |w| {
        use std::io::Write;
        w.write_all(manifest.to_config_text().as_bytes())
    })
}

fn scan(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    let (geom, preset, schedule) = cfg.scan_job()?;
    let mut manifest = RunManifest::start("scan", cfg);
    let branches = run_hysteresis_scan(geom, preset, &schedule)?;
    let report = classify_transition(&branches, &ClassifierThresholds::default())?;
    manifest.finish();

    write_file(&cli.out.join("scan.csv"), |w| write_scan_csv(w, &manifest, &branches))?;
    write_file(&cli.out.join("transition.csv"), |w| {
        write_transition_report(w, &manifest, &report)
    })?;
    save_manifest(&cli.out, &manifest)?;

    println!(
        "{:>10} {:>14} {:>14} {:>12} {:>12}",
        schedule.axis.name(),
        "U/V up",
        "U/V down",
        "C/V up",
        "C/V down"
    );
    for (u, d) in branches.up.iter().zip(&branches.down) {
        println!(
            "{:>10.4} {:>14.6} {:>14.6} {:>12.4} {:>12.4}",
            u.c, u.record.u_per_site, d.record.u_per_site, u.record.c_per_site, d.record.c_per_site
        );
    }
    let (lo, hi) = report.location_interval;
    let note = if report.low_confidence { " (low confidence)" } else { "" };
    println!("transition: {}{note} in [{lo}, {hi}]", report.order);
    println!("wrote {}", cli.out.display());
    Ok(true)
}

fn point(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    let (geom, _, couplings, params) = cfg.point_job()?;
    let c = match cfg.axis.unwrap_or(ScanAxis::C1) {
        ScanAxis::C1 | ScanAxis::C1EqualsC3 => cfg.c1,
        ScanAxis::C2 => cfg.c2,
        ScanAxis::C3 => cfg.c3,
    };
    let mut manifest = RunManifest::start("point", cfg);
    let run = run_point(geom, &couplings, &params)?;
    let pt = ScanPoint {
        c,
        record: estimate_uc(&run.samples(), params.bins, geom.volume())?,
        link_acceptance: run.measurement.link.acceptance_ratio(),
        site_acceptance: run.measurement.site.acceptance_ratio(),
    };
    manifest.finish();

    write_file(&cli.out.join("point.csv"), |w| {
        write_point_csv(w, &manifest, c, &pt.record, pt.acceptance())
    })?;
    write_file(&cli.out.join("final.snapshot"), |w| {
        write_snapshot(&run.final_config, w)
    })?;
    save_manifest(&cli.out, &manifest)?;

    let r = &pt.record;
    println!("U/V = {:.6} +- {:.6}", r.u_per_site, r.u_err);
    println!("C/V = {:.6} +- {:.6}", r.c_per_site, r.c_err);
    if let Some(a) = pt.acceptance() {
        println!("acceptance = {a:.3}");
    }
    println!("wrote {}", cli.out.display());
    Ok(true)
}

fn profile(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    let (spec, plane) = cfg.profile_job()?;
    let mut manifest = RunManifest::start("profile", cfg);
    let rho = density_deviation(&solve_static_field(&spec)?);
    let table = export_contour_slice(&rho, plane)?;
    manifest.finish();

    let name = format!("profile_{}.csv", spec.kernel.name());
    let header: Vec<String> = manifest
        .to_config_text()
        .lines()
        .map(|l| l.strip_prefix("# ").unwrap_or(l).to_string())
        .chain([format!("slice x3 = {plane}; rows x2 = 0.., columns x1 = 0..")])
        .collect();
    write_file(&cli.out.join(&name), |w| write_slice_table(w, &header, &table))?;
    save_manifest(&cli.out, &manifest)?;
    println!("wrote {}", cli.out.join(name).display());
    Ok(true)
}

fn oracle() -> Result<bool> {
    let checks = run_oracle_checks()?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:<width$}  {}", c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scan => scan(&cli),
        Command::Point => point(&cli),
        Command::Profile => profile(&cli),
        Command::Oracle => oracle(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
