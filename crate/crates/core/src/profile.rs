//! Classical static field around a pair of external charges on a periodic
//! 3D grid, and the resulting density deviation.
//!
//! Coulomb and Higgs kernels solve `(-Δ + m²) Φ = ρ` (m = 0 for Coulomb) by
//! conjugate gradients and set `E = -∇Φ` on forward links. The confinement
//! kernel puts the whole flux on a single axis-aligned string between the
//! sources.

use std::io::Write;

use crate::error::{Error, Result};

pub const DIM3: usize = 3;

const CG_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseKernel {
    Coulomb,
    Higgs { mass: f64 },
    Confinement,
}

impl PhaseKernel {
    pub fn name(self) -> &'static str {
        match self {
            PhaseKernel::Coulomb => "coulomb",
            PhaseKernel::Higgs { .. } => "higgs",
            PhaseKernel::Confinement => "confinement",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargeProfileSpec {
    pub grid: [usize; DIM3],
    pub kernel: PhaseKernel,
    /// Source positions as fractions of the box half-width, measured from
    /// the box centre.
    pub source_plus: [f64; DIM3],
    pub source_minus: [f64; DIM3],
    pub charge_q: f64,
    /// Source strength; the charges placed on the grid are `±q·rho1`.
    pub rho1: f64,
}

impl Default for ChargeProfileSpec {
    fn default() -> Self {
        ChargeProfileSpec {
            grid: [16; DIM3],
            kernel: PhaseKernel::Coulomb,
            source_plus: [0.4, 0.0, 0.0],
            source_minus: [-0.4, 0.0, 0.0],
            charge_q: 1.0,
            rho1: 1.0,
        }
    }
}

impl ChargeProfileSpec {
    pub fn volume(&self) -> usize {
        self.grid.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.iter().any(|&n| n < 3) {
            return Err(Error::input(format!(
                "grid extents must be at least 3, got {:?}",
                self.grid
            )));
        }
        if let PhaseKernel::Higgs { mass } = self.kernel {
            if !(mass > 0.0 && mass.is_finite()) {
                return Err(Error::input(format!("screening mass must be positive, got {mass}")));
            }
        }
        if !(self.charge_q.is_finite() && self.rho1.is_finite()) {
            return Err(Error::input("charge and source strength must be finite"));
        }
        let fractions = self.source_plus.iter().chain(&self.source_minus);
        if fractions.clone().any(|f| !f.is_finite()) {
            return Err(Error::input("source coordinates must be finite"));
        }
        if self.site_plus() == self.site_minus() {
            return Err(Error::input("sources map to the same site"));
        }
        Ok(())
    }

    /// Nearest grid coordinates of a fractional position.
    pub fn map_source(&self, frac: [f64; DIM3]) -> [usize; DIM3] {
        let mut out = [0; DIM3];
        for d in 0..DIM3 {
            let n = self.grid[d] as f64;
            let x = (0.5 * n + frac[d] * 0.5 * n).round();
            out[d] = (x as i64).rem_euclid(self.grid[d] as i64) as usize;
        }
        out
    }

    pub fn site_plus(&self) -> [usize; DIM3] {
        self.map_source(self.source_plus)
    }

    pub fn site_minus(&self) -> [usize; DIM3] {
        self.map_source(self.source_minus)
    }

    /// Grid index of the box centre, the plane `x = 0` of the source
    /// coordinates.
    pub fn centre(&self) -> [usize; DIM3] {
        self.map_source([0.0; DIM3])
    }
}

/// Periodic 3D grid, x0 fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid3 {
    pub extents: [usize; DIM3],
}

impl Grid3 {
    pub fn volume(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn index(&self, x: [usize; DIM3]) -> usize {
        x[0] + self.extents[0] * (x[1] + self.extents[1] * x[2])
    }

    pub fn coords(&self, i: usize) -> [usize; DIM3] {
        let e = self.extents;
        [i % e[0], (i / e[0]) % e[1], i / (e[0] * e[1])]
    }

    pub fn step(&self, i: usize, dir: usize, forward: bool) -> usize {
        let mut x = self.coords(i);
        let n = self.extents[dir];
        x[dir] = if forward {
            (x[dir] + 1) % n
        } else {
            (x[dir] + n - 1) % n
        };
        self.index(x)
    }
}

/// Field on forward links, direction-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkField {
    pub grid: Grid3,
    pub values: Vec<f64>,
}

impl LinkField {
    pub fn zeros(grid: Grid3) -> Self {
        LinkField {
            grid,
            values: vec![0.0; DIM3 * grid.volume()],
        }
    }

    pub fn get(&self, site: usize, dir: usize) -> f64 {
        self.values[dir * self.grid.volume() + site]
    }

    pub fn set(&mut self, site: usize, dir: usize, v: f64) {
        let vol = self.grid.volume();
        self.values[dir * vol + site] = v;
    }

    /// Backward divergence `Σ_i (E(r, i) - E(r - i, i))`.
    pub fn divergence(&self, site: usize) -> f64 {
        (0..DIM3)
            .map(|d| self.get(site, d) - self.get(self.grid.step(site, d, false), d))
            .sum()
    }
}

/// Scalar field on sites.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteField {
    pub grid: Grid3,
    pub values: Vec<f64>,
}

impl SiteField {
    pub fn at(&self, x: [usize; DIM3]) -> f64 {
        self.values[self.grid.index(x)]
    }
}

fn apply_operator(grid: &Grid3, m2: f64, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = (2.0 * DIM3 as f64 + m2) * x[i];
        for d in 0..DIM3 {
            acc -= x[grid.step(i, d, true)] + x[grid.step(i, d, false)];
        }
        *o = acc;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `(-Δ + m²) x = b` by conjugate gradients. For `m = 0` the source
/// must have zero sum; the returned solution then has zero mean.
fn conjugate_gradient(grid: &Grid3, m2: f64, b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut rr = dot(&r, &r);
    for _ in 0..10 * n {
        if rr.sqrt() <= CG_TOLERANCE * b_norm {
            if m2 == 0.0 {
                let mean = x.iter().sum::<f64>() / n as f64;
                x.iter_mut().for_each(|v| *v -= mean);
            }
            return Ok(x);
        }
        apply_operator(grid, m2, &p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::Numeric(format!(
        "conjugate gradient stalled at residual {:e}",
        rr.sqrt() / b_norm
    )))
}

pub fn solve_static_field(spec: &ChargeProfileSpec) -> Result<LinkField> {
    spec.validate()?;
    let grid = Grid3 { extents: spec.grid };
    let plus = grid.index(spec.site_plus());
    let minus = grid.index(spec.site_minus());
    let charge = spec.charge_q * spec.rho1;
    let mut e = LinkField::zeros(grid);

    let m2 = match spec.kernel {
        PhaseKernel::Coulomb => 0.0,
        PhaseKernel::Higgs { mass } => mass * mass,
        PhaseKernel::Confinement => {
            // Walk from the negative source to the positive one, taking the
            // shorter way round in each direction in turn.
            let target = spec.site_plus();
            let mut x = spec.site_minus();
            for d in 0..DIM3 {
                let n = grid.extents[d];
                let fwd = (target[d] + n - x[d]) % n;
                let forward = fwd <= n - fwd;
                while x[d] != target[d] {
                    let site = grid.index(x);
                    if forward {
                        e.set(site, d, -charge);
                        x[d] = (x[d] + 1) % n;
                    } else {
                        x[d] = (x[d] + n - 1) % n;
                        e.set(grid.index(x), d, charge);
                    }
                }
            }
            return Ok(e);
        }
    };

    let mut rho = vec![0.0; grid.volume()];
    rho[plus] = charge;
    rho[minus] = -charge;
    let phi = conjugate_gradient(&grid, m2, &rho)?;
    for site in 0..grid.volume() {
        for d in 0..DIM3 {
            e.set(site, d, phi[site] - phi[grid.step(site, d, true)]);
        }
    }
    Ok(e)
}

/// `Δρ_r = sqrt(Σ_i η²_ri / 3)` with `η = -E` on the links leaving `r` in
/// positive directions.
pub fn density_deviation(e: &LinkField) -> SiteField {
    let values = (0..e.grid.volume())
        .map(|s| {
            let sum: f64 = (0..DIM3).map(|d| e.get(s, d).powi(2)).sum();
            (sum / DIM3 as f64).sqrt()
        })
        .collect();
    SiteField { grid: e.grid, values }
}

/// Values in the plane `x3 = plane`: one row per x2, one column per x1.
pub fn export_contour_slice(field: &SiteField, plane: usize) -> Result<Vec<Vec<f64>>> {
    let [n0, n1, n2] = field.grid.extents;
    if plane >= n2 {
        return Err(Error::input(format!("plane x3={plane} outside grid of extent {n2}")));
    }
    Ok((0..n1)
        .map(|y| (0..n0).map(|x| field.at([x, y, plane])).collect())
        .collect())
}

/// Comma-separated table with `#` header lines.
pub fn write_slice_table<W: Write>(mut w: W, header: &[String], table: &[Vec<f64>]) -> std::io::Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    for row in table {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.10e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Least-squares slope of `ln Δρ` against distance along +x1 from the
/// positive source, over distances `from..=to`.
pub fn log_slope_beyond_plus(spec: &ChargeProfileSpec, field: &SiteField, from: usize, to: usize) -> Result<f64> {
    if from >= to {
        return Err(Error::input("slope fit needs at least two distances"));
    }
    let src = spec.site_plus();
    let pts: Vec<(f64, f64)> = (from..=to)
        .map(|k| {
            let mut x = src;
            x[0] = (x[0] + k) % spec.grid[0];
            (k as f64, field.at(x).ln())
        })
        .collect();
    if pts.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::Numeric("zero density inside the fit window".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kernel: PhaseKernel) -> ChargeProfileSpec {
        ChargeProfileSpec {
            kernel,
            ..ChargeProfileSpec::default()
        }
    }

    #[test]
    fn source_mapping() {
        let s = ChargeProfileSpec::default();
        assert_eq!(s.site_plus(), [11, 8, 8]);
        assert_eq!(s.site_minus(), [5, 8, 8]);
        assert_eq!(s.centre(), [8, 8, 8]);
    }

    #[test]
    fn validation() {
        let s = ChargeProfileSpec {
            source_minus: [0.42, 0.0, 0.0],
            ..ChargeProfileSpec::default()
        };
        assert!(solve_static_field(&s).is_err());
        assert!(solve_static_field(&spec(PhaseKernel::Higgs { mass: 0.0 })).is_err());
        let s = ChargeProfileSpec {
            grid: [2, 16, 16],
            ..ChargeProfileSpec::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn coulomb_gauss_law() {
        let s = spec(PhaseKernel::Coulomb);
        let e = solve_static_field(&s).unwrap();
        let g = e.grid;
        assert!((e.divergence(g.index(s.site_plus())) - 1.0).abs() < 1e-8);
        assert!((e.divergence(g.index(s.site_minus())) + 1.0).abs() < 1e-8);
        for site in 0..g.volume() {
            if site != g.index(s.site_plus()) && site != g.index(s.site_minus()) {
                assert!(e.divergence(site).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn coulomb_flux_through_box_around_one_source() {
        let s = spec(PhaseKernel::Coulomb);
        let e = solve_static_field(&s).unwrap();
        let g = e.grid;
        // Box x1 in 9..=13, x2, x3 in 6..=10 contains only the + source.
        let inside = |x: [usize; 3]| (9..=13).contains(&x[0]) && (6..=10).contains(&x[1]) && (6..=10).contains(&x[2]);
        let flux: f64 = (0..g.volume())
            .filter(|&i| inside(g.coords(i)))
            .map(|i| e.divergence(i))
            .sum();
        assert!((flux - 1.0).abs() < 1e-8);
    }

    #[test]
    fn higgs_decay_slope() {
        let s = spec(PhaseKernel::Higgs { mass: 2.0 });
        let rho = density_deviation(&solve_static_field(&s).unwrap());
        let slope = log_slope_beyond_plus(&s, &rho, 1, 4).unwrap();
        assert!((slope + 2.0).abs() < 0.2, "{slope}");
    }

    #[test]
    fn higgs_decays_faster_than_coulomb() {
        let c = density_deviation(&solve_static_field(&spec(PhaseKernel::Coulomb)).unwrap());
        let s = spec(PhaseKernel::Higgs { mass: 1.0 });
        let h = density_deviation(&solve_static_field(&s).unwrap());
        let g = c.grid;
        let dist = |a: [usize; 3], b: [usize; 3]| {
            (0..3)
                .map(|d| {
                    let n = g.extents[d];
                    let k = (a[d] + n - b[d]) % n;
                    k.min(n - k)
                })
                .sum::<usize>()
        };
        let mut checked = 0;
        for i in 0..g.volume() {
            let x = g.coords(i);
            if dist(x, s.site_plus()) > 3 && dist(x, s.site_minus()) > 3 && c.values[i] > 1e-12 {
                assert!(h.values[i] < c.values[i], "{x:?}");
                checked += 1;
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn confinement_string() {
        let s = spec(PhaseKernel::Confinement);
        let e = solve_static_field(&s).unwrap();
        let g = e.grid;
        assert!((e.divergence(g.index(s.site_plus())) - 1.0).abs() < 1e-15);
        assert!((e.divergence(g.index(s.site_minus())) + 1.0).abs() < 1e-15);
        let rho = density_deviation(&e);
        for i in 0..g.volume() {
            let [x, y, z] = g.coords(i);
            let on_string = y == 8 && z == 8 && (5..11).contains(&x);
            let expect = if on_string { 1.0 / 3f64.sqrt() } else { 0.0 };
            assert!((rho.values[i] - expect).abs() < 1e-15, "{x} {y} {z}");
        }
    }

    #[test]
    fn confinement_backward_and_offset_path() {
        let mut s = spec(PhaseKernel::Confinement);
        s.source_plus = [-0.5, 0.25, 0.0];
        s.source_minus = [0.25, -0.25, 0.0];
        let e = solve_static_field(&s).unwrap();
        let g = e.grid;
        for i in 0..g.volume() {
            let expect = if i == g.index(s.site_plus()) {
                1.0
            } else if i == g.index(s.site_minus()) {
                -1.0
            } else {
                0.0
            };
            assert_eq!(e.divergence(i), expect);
        }
    }

    #[test]
    fn density_formula() {
        let g = Grid3 { extents: [4, 4, 4] };
        let mut e = LinkField::zeros(g);
        assert!(density_deviation(&e).values.iter().all(|&v| v == 0.0));
        e.set(5, 1, 1.0);
        let rho = density_deviation(&e);
        assert!((rho.values[5] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(rho.values.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn slice_shape_and_errors() {
        let g = Grid3 { extents: [5, 4, 3] };
        let field = SiteField {
            grid: g,
            values: vec![2.5; g.volume()],
        };
        let t = export_contour_slice(&field, 2).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|r| r.len() == 5 && r.iter().all(|&v| v == 2.5)));
        assert!(export_contour_slice(&field, 3).is_err());
    }

    #[test]
    fn reflection_symmetry_of_solutions() {
        for kernel in [
            PhaseKernel::Coulomb,
            PhaseKernel::Higgs { mass: 2.0 },
            PhaseKernel::Confinement,
        ] {
            let s = spec(kernel);
            let e = solve_static_field(&s).unwrap();
            let g = e.grid;
            // Reflection x2 -> 16 - x2 about the source plane: E1 and E3 map
            // to themselves, E2 on the link (y, y+1) maps to minus the link
            // (15 - y, 16 - y).
            for i in 0..g.volume() {
                let [x, y, z] = g.coords(i);
                let r = g.index([x, (16 - y) % 16, z]);
                let r2 = g.index([x, (31 - y) % 16, z]);
                assert!((e.get(i, 0) - e.get(r, 0)).abs() < 1e-9);
                assert!((e.get(i, 2) - e.get(r, 2)).abs() < 1e-9);
                assert!((e.get(i, 1) + e.get(r2, 1)).abs() < 1e-9);
            }
            let t = export_contour_slice(&density_deviation(&e), 8).unwrap();
            if kernel == PhaseKernel::Confinement {
                for y in 0..16 {
                    assert_eq!(t[y], t[(16 - y) % 16]);
                }
            }
        }
    }

    #[test]
    fn table_writer() {
        let mut out = Vec::new();
        write_slice_table(&mut out, &["kernel=coulomb".into()], &[vec![1.0, 2.0]]).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("# kernel=coulomb\n"));
        assert_eq!(s.lines().nth(1).unwrap().split(',').count(), 2);
    }
}
