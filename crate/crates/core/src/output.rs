//! Result files. Every file starts with `#` lines holding the run manifest:
//! command, generator, version, timestamps and the full effective config.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::Config;
use crate::engine::GENERATOR;
use crate::error::{Error, Result};
use crate::observables::MeasurementRecord;
use crate::scan::{ScanBranches, ScanPoint, TransitionReport};

pub const CSV_COLUMNS: &str = "c,branch,u_per_site,u_err,c_per_site,c_err,acceptance";

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config: Config,
    pub generator: String,
    pub version: String,
    pub started: String,
    pub finished: Option<String>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

impl RunManifest {
    pub fn start(command: &str, config: Config) -> Self {
        RunManifest {
            command: command.to_string(),
            config,
            generator: GENERATOR.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started: now(),
            finished: None,
        }
    }

    pub fn finish(&mut self) {
        self.finished = Some(now());
    }

    /// Metadata as `#` comments followed by the config; valid config text.
    pub fn to_config_text(&self) -> String {
        let mut s = format!(
            "# command: {}\n# generator: {}\n# version: {}\n# started: {}\n",
            self.command, self.generator, self.version, self.started
        );
        if let Some(f) = &self.finished {
            s.push_str(&format!("# finished: {f}\n"));
        }
        s + &self.config.to_text()
    }

    pub fn write_header<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for line in self.to_config_text().lines() {
            match line.strip_prefix("# ") {
                Some(meta) => writeln!(w, "# {meta}")?,
                None => writeln!(w, "# {line}")?,
            }
        }
        Ok(())
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Create `path` (and missing parent directories) and fill it with `body`.
pub fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Recover the config text embedded in a result file header.
pub fn extract_config(text: &str) -> String {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter(|l| l.contains('='))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), |v| v.to_string())
}

fn row(c: f64, branch: &str, r: &MeasurementRecord, acceptance: Option<f64>) -> String {
    format!(
        "{c},{branch},{},{},{},{},{}",
        r.u_per_site,
        r.u_err,
        r.c_per_site,
        r.c_err,
        fmt_opt(acceptance)
    )
}

/// Up rows then down rows, each in increasing `c`.
pub fn write_scan_csv<W: Write>(mut w: W, manifest: &RunManifest, branches: &ScanBranches) -> std::io::Result<()> {
    manifest.write_header(&mut w)?;
    writeln!(w, "{CSV_COLUMNS}")?;
    let mut put = |name: &str, pts: &[ScanPoint]| -> std::io::Result<()> {
        let mut sorted = pts.to_vec();
        sorted.sort_by(|a, b| a.c.total_cmp(&b.c));
        for p in &sorted {
            writeln!(w, "{}", row(p.c, name, &p.record, p.acceptance()))?;
        }
        Ok(())
    };
    put("up", &branches.up)?;
    put("down", &branches.down)
}

pub fn write_point_csv<W: Write>(
    mut w: W,
    manifest: &RunManifest,
    c: f64,
    record: &MeasurementRecord,
    acceptance: Option<f64>,
) -> std::io::Result<()> {
    manifest.write_header(&mut w)?;
    writeln!(w, "{CSV_COLUMNS}")?;
    writeln!(w, "{}", row(c, "point", record, acceptance))
}

pub fn write_transition_report<W: Write>(
    mut w: W,
    manifest: &RunManifest,
    report: &TransitionReport,
) -> std::io::Result<()> {
    manifest.write_header(&mut w)?;
    let e = &report.evidence;
    writeln!(w, "order,{}", report.order)?;
    writeln!(w, "low_confidence,{}", report.low_confidence)?;
    writeln!(w, "interval_lo,{}", report.location_interval.0)?;
    writeln!(w, "interval_hi,{}", report.location_interval.1)?;
    writeln!(w, "max_branch_gap_sigma,{}", e.max_branch_gap)?;
    writeln!(w, "hysteresis_loop_area,{}", e.hysteresis_loop_area)?;
    writeln!(w, "c_peak_height,{}", e.c_peak_height)?;
    writeln!(w, "c_jump,{}", e.c_jump)?;
    writeln!(w, "u_slope_peak,{}", e.u_slope_peak)?;
    writeln!(w, "u_kink_chi2_ratio,{}", e.u_kink_chi2_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn record(u: f64) -> MeasurementRecord {
        MeasurementRecord {
            u_per_site: u,
            u_err: 0.01,
            c_per_site: 1.5,
            c_err: 0.1,
            bins: 10,
            sample_count: 100,
        }
    }

    fn point(c: f64, u: f64) -> ScanPoint {
        ScanPoint {
            c,
            record: record(u),
            link_acceptance: Some(0.7),
            site_acceptance: None,
        }
    }

    #[test]
    fn header_embeds_reparseable_config() {
        let cfg = parse_config("model=IP\nL=4\naxis=c2\nlo=1\nhi=1.2\ndc=0.1\nseed=7\n").unwrap();
        let mut m = RunManifest::start("scan", cfg.clone());
        m.finish();
        let mut out = Vec::new();
        let b = ScanBranches {
            up: vec![point(1.0, 2.0), point(1.1, 2.5)],
            down: vec![point(1.1, 2.6), point(1.0, 2.1)],
        };
        write_scan_csv(&mut out, &m, &b).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains(GENERATOR));
        assert_eq!(parse_config(&extract_config(&text)).unwrap(), cfg);
        assert_eq!(parse_config(&m.to_config_text()).unwrap(), cfg);

        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], CSV_COLUMNS);
        assert_eq!(rows[1], "1,up,2,0.01,1.5,0.1,0.7");
        assert_eq!(rows[3], "1,down,2.1,0.01,1.5,0.1,0.7");
        assert!(rows.iter().all(|r| r.split(',').count() == 7));
    }
}
