//! Plain-text configuration snapshots.
//!
//! ```text
//! gauge-higgs-snapshot 1
//! extents <L0> <L1> <L2> <L3>
//! sector <unitary|higgs>
//! theta <4V>
//! <one link angle per line, link index order (dir * V + site)>
//! phi <V>
//! <one site angle per line, site index order>
//! ```
//!
//! Angles are written with Rust's shortest round-trip float formatting, so
//! reading a snapshot back reproduces the configuration bit for bit.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, NDIM};

use super::{FieldConfiguration, Sector};

const MAGIC: &str = "gauge-higgs-snapshot 1";

pub fn write_snapshot<W: Write>(cfg: &FieldConfiguration, mut w: W) -> std::io::Result<()> {
    let e = cfg.geometry().extents();
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "extents {} {} {} {}", e[0], e[1], e[2], e[3])?;
    writeln!(w, "sector {}", cfg.sector())?;
    writeln!(w, "theta {}", cfg.theta().len())?;
    for a in cfg.theta() {
        writeln!(w, "{a}")?;
    }
    writeln!(w, "phi {}", cfg.phi().len())?;
    for a in cfg.phi() {
        writeln!(w, "{a}")?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(Ok(s)) => Ok(s),
            Some(Err(e)) => Err(self.err(e.to_string())),
            None => Err(self.err("unexpected end of snapshot")),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn header(&mut self, key: &str) -> Result<Vec<String>> {
        let s = self.next()?;
        let mut parts = s.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected '{key}' header")));
        }
        Ok(parts.map(str::to_owned).collect())
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let rest = self.header(key)?;
        rest.first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err(format!("'{key}' needs a count")))
    }

    fn angles(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n)
            .map(|_| {
                let s = self.next()?;
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| self.err(format!("bad angle '{s}'")))
            })
            .collect()
    }
}

pub fn read_snapshot<R: BufRead>(r: R) -> Result<FieldConfiguration> {
    let mut lines = Lines {
        inner: r.lines(),
        line: 0,
    };
    if lines.next()?.trim() != MAGIC {
        return Err(lines.err("not a gauge-higgs snapshot"));
    }
    let ext = lines.header("extents")?;
    if ext.len() != NDIM {
        return Err(lines.err("extents needs four integers"));
    }
    let mut extents = [0; NDIM];
    for (e, s) in extents.iter_mut().zip(&ext) {
        *e = s.parse().map_err(|_| lines.err(format!("bad extent '{s}'")))?;
    }
    let geom = LatticeGeometry::new(extents)?;
    let sector: Sector = lines
        .header("sector")?
        .first()
        .ok_or_else(|| lines.err("sector missing"))?
        .parse()?;
    let n = lines.count("theta")?;
    let theta = lines.angles(n)?;
    let n = lines.count("phi")?;
    let phi = lines.angles(n)?;
    FieldConfiguration::from_parts(geom, theta, phi, sector)
}
