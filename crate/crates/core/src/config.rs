//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! model = IP
//! L = 8
//! axis = c1
//! lo = 0.28
//! hi = 0.36
//! dc = 0.01
//! c2 = 2.5
//! ```
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `model` | required | `IP`, `ItPtLs`, `ItPLs`, `PL` |
//! | `L` | required | hypercubic lattice extent |
//! | `sector` | `unitary` | `unitary` (φ = 0) or `higgs` |
//! | `axis` | required for `scan` | `c1`, `c2`, `c3`, `c1=c3` |
//! | `lo`, `hi`, `dc` | required for `scan` | grid of the scanned coupling |
//! | `c1`, `c2`, `c3` | 0 | couplings not on the axis |
//! | `therm_sweeps` | 3000 | thermalization sweeps per point |
//! | `meas_sweeps` | 5000 | measurement sweeps per point |
//! | `bins` | 10 | bins for error estimates |
//! | `start` | `cold` | `hot` or `cold` |
//! | `seed` | 0 | master seed |
//! | `target_acc_lo`, `target_acc_hi` | 0.6, 0.8 | acceptance band |
//! | `warm_start` | `true` | chain scan points through their final configuration |
//! | `workers` | 1 | threads for scans with `warm_start = false` |
//! | `kernel` | `coulomb` | profile kernel: `coulomb`, `higgs`, `confinement` |
//! | `mass` | 1 | screening mass of the `higgs` kernel |
//! | `grid` | 16 | profile grid, one extent or three |
//! | `charge`, `rho1` | 1, 1 | source charge and strength |
//! | `source_plus`, `source_minus` | `0.4,0,0`, `-0.4,0,0` | fractions of the half box |
//! | `plane` | centre | x3 index of the exported slice |

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::engine::{RunParameters, Start};
use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::model::{Couplings, ModelPreset};
use crate::profile::{ChargeProfileSpec, PhaseKernel};
use crate::scan::{ScanAxis, ScanSchedule};

pub const KEYS: &[&str] = &[
    "model",
    "L",
    "sector",
    "axis",
    "lo",
    "hi",
    "dc",
    "c1",
    "c2",
    "c3",
    "therm_sweeps",
    "meas_sweeps",
    "bins",
    "start",
    "seed",
    "target_acc_lo",
    "target_acc_hi",
    "warm_start",
    "workers",
    "kernel",
    "mass",
    "grid",
    "charge",
    "rho1",
    "source_plus",
    "source_minus",
    "plane",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub model: Option<ModelPreset>,
    pub l: Option<usize>,
    pub axis: Option<ScanAxis>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub dc: Option<f64>,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub run: RunParameters,
    pub warm_start: bool,
    pub workers: usize,
    pub profile: ChargeProfileSpec,
    pub plane: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            model: None,
            l: None,
            axis: None,
            lo: None,
            hi: None,
            dc: None,
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            run: RunParameters::default(),
            warm_start: true,
            workers: 1,
            profile: ChargeProfileSpec::default(),
            plane: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad value '{value}' for '{key}'"),
    })
}

fn parse_triple(key: &str, value: &str, line: usize) -> Result<[f64; 3]> {
    let parts: Vec<&str> = value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    if parts.len() != 3 {
        return Err(Error::Parse {
            line,
            message: format!("'{key}' needs three numbers"),
        });
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = parse_value(key, p, line)?;
    }
    Ok(out)
}

fn with_line<T>(r: Result<T>, line: usize) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            line,
            message: other.to_string(),
        },
    })
}

/// Parse and validate a configuration. Keys may appear in any order, at
/// most once each.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut mass: Option<f64> = None;
    let mut kernel = "coulomb".to_string();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected key = value, got '{body}'"),
        })?;
        // Split at the first '=' so `axis = c1=c3` works.
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Parse {
                line,
                message: format!("unknown key '{key}'"),
            });
        }
        if let Some(first) = seen.insert(key.to_string(), line) {
            return Err(Error::Parse {
                line,
                message: format!("'{key}' already set on line {first}"),
            });
        }
        match key {
            "model" => cfg.model = Some(with_line(value.parse(), line)?),
            "L" => cfg.l = Some(parse_value(key, value, line)?),
            "sector" => cfg.run.sector = with_line(value.parse(), line)?,
            "axis" => cfg.axis = Some(with_line(value.parse(), line)?),
            "lo" => cfg.lo = Some(parse_value(key, value, line)?),
            "hi" => cfg.hi = Some(parse_value(key, value, line)?),
            "dc" => cfg.dc = Some(parse_value(key, value, line)?),
            "c1" => cfg.c1 = parse_value(key, value, line)?,
            "c2" => cfg.c2 = parse_value(key, value, line)?,
            "c3" => cfg.c3 = parse_value(key, value, line)?,
            "therm_sweeps" => cfg.run.thermalization_sweeps = parse_value(key, value, line)?,
            "meas_sweeps" => cfg.run.measurement_sweeps = parse_value(key, value, line)?,
            "bins" => cfg.run.bins = parse_value(key, value, line)?,
            "start" => cfg.run.start = with_line(value.parse::<Start>(), line)?,
            "seed" => cfg.run.seed = parse_value(key, value, line)?,
            "target_acc_lo" => cfg.run.target_acceptance.0 = parse_value(key, value, line)?,
            "target_acc_hi" => cfg.run.target_acceptance.1 = parse_value(key, value, line)?,
            "warm_start" => cfg.warm_start = parse_value(key, value, line)?,
            "workers" => cfg.workers = parse_value(key, value, line)?,
            "kernel" => kernel = value.to_ascii_lowercase(),
            "mass" => mass = Some(parse_value(key, value, line)?),
            "grid" => {
                let parts: Vec<usize> = value
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|p| parse_value(key, p, line))
                    .collect::<Result<_>>()?;
                cfg.profile.grid = match parts[..] {
                    [n] => [n; 3],
                    [a, b, c] => [a, b, c],
                    _ => {
                        return Err(Error::Parse {
                            line,
                            message: "'grid' needs one or three extents".into(),
                        })
                    }
                };
            }
            "charge" => cfg.profile.charge_q = parse_value(key, value, line)?,
            "rho1" => cfg.profile.rho1 = parse_value(key, value, line)?,
            "source_plus" => cfg.profile.source_plus = parse_triple(key, value, line)?,
            "source_minus" => cfg.profile.source_minus = parse_triple(key, value, line)?,
            "plane" => cfg.plane = Some(parse_value(key, value, line)?),
            _ => unreachable!("key list and match arms disagree"),
        }
    }

    let at = |key: &str| seen.get(key).copied().unwrap_or(0);
    cfg.profile.kernel = match kernel.as_str() {
        "coulomb" => PhaseKernel::Coulomb,
        "confinement" => PhaseKernel::Confinement,
        "higgs" => PhaseKernel::Higgs {
            mass: mass.unwrap_or(1.0),
        },
        other => {
            return Err(Error::Parse {
                line: at("kernel"),
                message: format!("unknown kernel '{other}' (coulomb, higgs, confinement)"),
            })
        }
    };
    if let Some(dc) = cfg.dc {
        if !(dc > 0.0 && dc.is_finite()) {
            return Err(Error::Parse {
                line: at("dc"),
                message: format!("dc must be positive, got {dc}"),
            });
        }
    }
    if let Some(l) = cfg.l {
        with_line(LatticeGeometry::hypercubic(l), at("L"))?;
    }
    if let (Some(lo), Some(hi)) = (cfg.lo, cfg.hi) {
        if lo > hi {
            return Err(Error::Parse {
                line: at("hi"),
                message: format!("hi = {hi} is below lo = {lo}"),
            });
        }
    }
    if cfg.workers == 0 {
        return Err(Error::Parse {
            line: at("workers"),
            message: "workers must be at least 1".into(),
        });
    }
    for key in ["c1", "c2", "c3"] {
        let v = match key {
            "c1" => cfg.c1,
            "c2" => cfg.c2,
            _ => cfg.c3,
        };
        if !v.is_finite() {
            return Err(Error::Parse {
                line: at(key),
                message: format!("{key} must be finite"),
            });
        }
    }
    cfg.run.validate()?;
    Ok(cfg)
}

fn missing(key: &str) -> Error {
    Error::input(format!("missing required key '{key}'"))
}

impl Config {
    fn preset(&self) -> Result<ModelPreset> {
        self.model.ok_or_else(|| missing("model"))
    }

    pub fn geometry(&self) -> Result<LatticeGeometry> {
        LatticeGeometry::hypercubic(self.l.ok_or_else(|| missing("L"))?)
    }

    pub fn scan_job(&self) -> Result<(LatticeGeometry, ModelPreset, ScanSchedule)> {
        let schedule = ScanSchedule {
            axis: self.axis.ok_or_else(|| missing("axis"))?,
            c1: self.c1,
            c2: self.c2,
            c3: self.c3,
            lo: self.lo.ok_or_else(|| missing("lo"))?,
            hi: self.hi.ok_or_else(|| missing("hi"))?,
            dc: self.dc.ok_or_else(|| missing("dc"))?,
            run: self.run.clone(),
            warm_start: self.warm_start,
            workers: self.workers,
        };
        schedule.validate()?;
        Ok((self.geometry()?, self.preset()?, schedule))
    }

    pub fn point_job(&self) -> Result<(LatticeGeometry, ModelPreset, Couplings, RunParameters)> {
        let preset = self.preset()?;
        Ok((
            self.geometry()?,
            preset,
            preset.couplings(self.c1, self.c2, self.c3),
            self.run.clone(),
        ))
    }

    /// Profile spec and the x3 index of the exported slice.
    pub fn profile_job(&self) -> Result<(ChargeProfileSpec, usize)> {
        self.profile.validate()?;
        let plane = self.plane.unwrap_or_else(|| self.profile.centre()[2]);
        Ok((self.profile.clone(), plane))
    }

    /// Canonical text listing every effective value; parses back to an
    /// equal configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        if let Some(m) = self.model {
            put("model", m.name().to_string());
        }
        if let Some(l) = self.l {
            put("L", l.to_string());
        }
        put("sector", self.run.sector.to_string());
        if let Some(a) = self.axis {
            put("axis", a.name().to_string());
        }
        for (k, v) in [("lo", self.lo), ("hi", self.hi), ("dc", self.dc)] {
            if let Some(v) = v {
                put(k, v.to_string());
            }
        }
        put("c1", self.c1.to_string());
        put("c2", self.c2.to_string());
        put("c3", self.c3.to_string());
        put("therm_sweeps", self.run.thermalization_sweeps.to_string());
        put("meas_sweeps", self.run.measurement_sweeps.to_string());
        put("bins", self.run.bins.to_string());
        put("start", self.run.start.to_string());
        put("seed", self.run.seed.to_string());
        put("target_acc_lo", self.run.target_acceptance.0.to_string());
        put("target_acc_hi", self.run.target_acceptance.1.to_string());
        put("warm_start", self.warm_start.to_string());
        put("workers", self.workers.to_string());
        let p = &self.profile;
        put("kernel", p.kernel.name().to_string());
        if let PhaseKernel::Higgs { mass } = p.kernel {
            put("mass", mass.to_string());
        }
        put("grid", format!("{} {} {}", p.grid[0], p.grid[1], p.grid[2]));
        put("charge", p.charge_q.to_string());
        put("rho1", p.rho1.to_string());
        let triple = |t: [f64; 3]| format!("{},{},{}", t[0], t[1], t[2]);
        put("source_plus", triple(p.source_plus));
        put("source_minus", triple(p.source_minus));
        if let Some(plane) = self.plane {
            put("plane", plane.to_string());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "model=IP\nL=8\naxis=c1\nlo=0.28\nhi=0.36\ndc=0.01\nc2=2.5\n";

    #[test]
    fn minimal_config_with_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.model, Some(ModelPreset::Ip));
        assert_eq!(cfg.run, RunParameters::default());
        assert!(cfg.warm_start);
        let (geom, preset, sched) = cfg.scan_job().unwrap();
        assert_eq!(geom.volume(), 4096);
        assert_eq!(preset, ModelPreset::Ip);
        assert_eq!(sched.grid().len(), 9);
        assert_eq!(sched.c2, 2.5);
    }

    #[test]
    fn unknown_key_named() {
        let err = parse_config("model=IP\nfoo=1\n").unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("foo"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn validation_errors_carry_lines() {
        let err = parse_config("model=IP\n\ndc=0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_config("L=eight\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_config("model=XY\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(parse_config("L=8\nL=8\n").is_err());
        assert!(parse_config("lo=1\nhi=0\n").is_err());
        assert!(parse_config("L=1\n").is_err());
        assert!(parse_config("just text\n").is_err());
        assert!(parse_config("kernel=yukawa\n").is_err());
        assert!(parse_config("grid=3,4\n").is_err());
    }

    #[test]
    fn missing_required_keys() {
        let cfg = parse_config("model=IP\nL=4\n").unwrap();
        assert!(cfg.point_job().is_ok());
        let err = cfg.scan_job().unwrap_err();
        assert!(err.to_string().contains("axis"));
        let cfg = parse_config("L=4\n").unwrap();
        assert!(cfg.point_job().unwrap_err().to_string().contains("model"));
    }

    #[test]
    fn comments_whitespace_and_axis_with_equals() {
        let cfg = parse_config("# header\n  model = pl   # trailing\naxis = c1=c3\n\n").unwrap();
        assert_eq!(cfg.model, Some(ModelPreset::Pl));
        assert_eq!(cfg.axis, Some(ScanAxis::C1EqualsC3));
    }

    #[test]
    fn profile_keys() {
        let cfg = parse_config("kernel=higgs\nmass=2\ngrid=12\nsource_plus=0.5, 0, 0\nplane=3\n").unwrap();
        let (spec, plane) = cfg.profile_job().unwrap();
        assert_eq!(spec.kernel, PhaseKernel::Higgs { mass: 2.0 });
        assert_eq!(spec.grid, [12; 3]);
        assert_eq!(spec.source_plus, [0.5, 0.0, 0.0]);
        assert_eq!(plane, 3);
        let (spec, plane) = Config::default().profile_job().unwrap();
        assert_eq!(spec.kernel, PhaseKernel::Coulomb);
        assert_eq!(plane, 8);
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = format!(
            "{MINIMAL}sector=higgs\nstart=hot\nseed=99\nkernel=higgs\nmass=0.7\nworkers=3\nwarm_start=false\nplane=2\n"
        );
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again);
        let d = Config::default();
        assert_eq!(parse_config(&d.to_text()).unwrap(), d);
    }
}
