//! Couplings, field configurations and the gauge-Higgs action.
//!
//! The action (Boltzmann weight `exp(+A)`) is
//!
//! ```text
//! A = sum_{x,mu} c1[mu] cos(phi_x + theta_{x,mu} - phi_{x+mu})
//!   + sum_{x,mu<nu} c2[mu,nu] cos(theta_{x,mu,nu})
//!   + sum_{x,mu<nu} c3[mu,nu] (four L-shaped cosines)
//! ```
//!
//! In the unitary sector the Higgs phases are pinned at zero and the same
//! expression is the gauge-variant link action.

mod snapshot;
pub(crate) mod terms;

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, PlanePair, Step, NDIM, NPLANES, TIME};

pub use snapshot::{read_snapshot, write_snapshot};
use terms::{staples_for, term_shapes, Var};

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Anisotropic coefficient table: `c1` per direction, `c2` and `c3` per
/// plane pair in [`PlanePair::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub c1: [f64; NDIM],
    pub c2: [f64; NPLANES],
    pub c3: [f64; NPLANES],
}

impl Couplings {
    pub fn zero() -> Self {
        Couplings {
            c1: [0.0; NDIM],
            c2: [0.0; NPLANES],
            c3: [0.0; NPLANES],
        }
    }

    /// Isotropic table with every entry of a class set to the same value.
    pub fn uniform(c1: f64, c2: f64, c3: f64) -> Self {
        Couplings {
            c1: [c1; NDIM],
            c2: [c2; NPLANES],
            c3: [c3; NPLANES],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.c1.iter().chain(&self.c2).chain(&self.c3);
        if all.clone().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(Error::input("couplings must be finite"))
        }
    }
}

/// The four anisotropic coupling patterns studied for the phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelPreset {
    /// Isotropic hopping and plaquettes, no L-terms.
    Ip,
    /// Temporal hopping, temporal plaquettes, spatial L-terms.
    ItPtLs,
    /// Temporal hopping, all plaquettes, spatial L-terms.
    ItPLs,
    /// No hopping, all plaquettes, all L-terms.
    Pl,
}

impl ModelPreset {
    pub const ALL: [ModelPreset; 4] = [
        ModelPreset::Ip,
        ModelPreset::ItPtLs,
        ModelPreset::ItPLs,
        ModelPreset::Pl,
    ];

    pub fn couplings(self, c1: f64, c2: f64, c3: f64) -> Couplings {
        preset_couplings(self, c1, c2, c3)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelPreset::Ip => "IP",
            ModelPreset::ItPtLs => "ItPtLs",
            ModelPreset::ItPLs => "ItPLs",
            ModelPreset::Pl => "PL",
        }
    }
}

impl fmt::Display for ModelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelPreset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::input(format!("unknown model '{s}' (IP, ItPtLs, ItPLs, PL)")))
    }
}

/// Fill the coefficient table for a preset.
///
/// | preset | c1 time | c1 space | c2 (i,4) | c2 (i,j) | c3 (i,4) | c3 (i,j) |
/// |--------|---------|----------|----------|----------|----------|----------|
/// | IP     | c1      | c1       | c2       | c2       | 0        | 0        |
/// | ItPtLs | c1      | 0        | c2       | 0        | 0        | c3       |
/// | ItPLs  | c1      | 0        | c2       | c2       | 0        | c3       |
/// | PL     | 0       | 0        | c2       | c2       | c3       | c3       |
///
/// `c3` is ignored for IP and `c1` for PL.
pub fn preset_couplings(preset: ModelPreset, c1: f64, c2: f64, c3: f64) -> Couplings {
    let mut out = Couplings::zero();
    let (c1_time, c1_space, c2_time, c2_space, c3_time, c3_space) = match preset {
        ModelPreset::Ip => (c1, c1, c2, c2, 0.0, 0.0),
        ModelPreset::ItPtLs => (c1, 0.0, c2, 0.0, 0.0, c3),
        ModelPreset::ItPLs => (c1, 0.0, c2, c2, 0.0, c3),
        ModelPreset::Pl => (0.0, 0.0, c2, c2, c3, c3),
    };
    for mu in 0..NDIM {
        out.c1[mu] = if mu == TIME { c1_time } else { c1_space };
    }
    for p in PlanePair::ALL {
        let temporal = p.is_temporal();
        out.c2[p.index()] = if temporal { c2_time } else { c2_space };
        out.c3[p.index()] = if temporal { c3_time } else { c3_space };
    }
    out
}

/// Whether the Higgs phases are dynamical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    /// Higgs phases frozen at zero (gauge-fixed link model).
    Unitary,
    /// Link angles and Higgs phases both dynamical.
    Higgs,
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sector::Unitary => "unitary",
            Sector::Higgs => "higgs",
        })
    }
}

impl FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unitary" => Ok(Sector::Unitary),
            "higgs" => Ok(Sector::Higgs),
            _ => Err(Error::input(format!("unknown sector '{s}' (unitary, higgs)"))),
        }
    }
}

/// Link angles and Higgs phases on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfiguration {
    geom: LatticeGeometry,
    theta: Vec<f64>,
    phi: Vec<f64>,
    sector: Sector,
}

impl FieldConfiguration {
    /// All angles zero.
    pub fn cold(geom: LatticeGeometry, sector: Sector) -> Self {
        FieldConfiguration {
            geom,
            theta: vec![0.0; geom.link_count()],
            phi: vec![0.0; geom.volume()],
            sector,
        }
    }

    /// Build from raw arrays; angles are reduced to `[0, 2π)`.
    pub fn from_parts(geom: LatticeGeometry, theta: Vec<f64>, phi: Vec<f64>, sector: Sector) -> Result<Self> {
        if theta.len() != geom.link_count() || phi.len() != geom.volume() {
            return Err(Error::input(format!(
                "expected {} link and {} site angles, got {} and {}",
                geom.link_count(),
                geom.volume(),
                theta.len(),
                phi.len()
            )));
        }
        if theta.iter().chain(&phi).any(|a| !a.is_finite()) {
            return Err(Error::input("angles must be finite"));
        }
        let phi: Vec<f64> = phi.into_iter().map(wrap_angle).collect();
        if sector == Sector::Unitary && phi.iter().any(|&p| p != 0.0) {
            return Err(Error::input("unitary-sector configuration needs phi = 0"));
        }
        Ok(FieldConfiguration {
            geom,
            theta: theta.into_iter().map(wrap_angle).collect(),
            phi,
            sector,
        })
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geom
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    /// Link angles indexed by [`LatticeGeometry::link_index`].
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn link_angle(&self, site: usize, dir: usize) -> f64 {
        self.theta[self.geom.link_index(site, dir)]
    }

    pub fn site_angle(&self, site: usize) -> f64 {
        self.phi[site]
    }

    pub fn set_link_angle(&mut self, site: usize, dir: usize, angle: f64) {
        let l = self.geom.link_index(site, dir);
        self.theta[l] = wrap_angle(angle);
    }

    pub(crate) fn set_link_by_index(&mut self, link: usize, angle: f64) {
        self.theta[link] = angle;
    }

    pub(crate) fn set_site_raw(&mut self, site: usize, angle: f64) {
        self.phi[site] = angle;
    }

    pub fn set_site_angle(&mut self, site: usize, angle: f64) -> Result<()> {
        if self.sector == Sector::Unitary {
            return Err(Error::Usage("Higgs phases are frozen in the unitary sector".into()));
        }
        self.phi[site] = wrap_angle(angle);
        Ok(())
    }

    /// The same fields viewed as a Higgs-sector configuration.
    pub fn into_higgs(mut self) -> Self {
        self.sector = Sector::Higgs;
        self
    }

    fn value(&self, site: usize, var: Var) -> f64 {
        match var {
            Var::Link(d) => self.theta[self.geom.link_index(site, d)],
            Var::Site => self.phi[site],
        }
    }
}

/// Oriented plaquette angle `θ_{x+μ,ν} − θ_{x,ν} − θ_{x+ν,μ} + θ_{x,μ}` (not reduced).
pub fn plaquette_angle(cfg: &FieldConfiguration, site: usize, plane: PlanePair) -> f64 {
    let g = cfg.geometry();
    let (mu, nu) = (plane.mu, plane.nu);
    let x_mu = g.neighbor(site, mu, Step::Forward);
    let x_nu = g.neighbor(site, nu, Step::Forward);
    cfg.link_angle(x_mu, nu) - cfg.link_angle(site, nu) - cfg.link_angle(x_nu, mu) + cfg.link_angle(site, mu)
}

/// Total action, evaluated term by term from the shape table.
pub fn total_action(cfg: &FieldConfiguration, cpl: &Couplings) -> f64 {
    let g = cfg.geometry();
    let shapes: Vec<_> = term_shapes()
        .into_iter()
        .map(|s| (s.slot.coefficient(cpl), s))
        .filter(|(c, _)| *c != 0.0)
        .collect();
    let mut total = 0.0;
    for x in g.sites() {
        for (coef, shape) in &shapes {
            let angle: f64 = shape
                .factors
                .iter()
                .map(|f| f.sign as f64 * cfg.value(g.shift(x, f.disp), f.var))
                .sum();
            total += coef * angle.cos();
        }
    }
    total
}

fn local_delta(cfg: &FieldConfiguration, target: Var, site: usize, old: f64, new: f64, cpl: &Couplings) -> f64 {
    let g = cfg.geometry();
    let mut delta = 0.0;
    for st in staples_for(target) {
        let coef = st.slot.coefficient(cpl);
        if coef == 0.0 {
            continue;
        }
        let rest: f64 = st
            .others
            .iter()
            .map(|f| f.sign as f64 * cfg.value(g.shift(site, f.disp), f.var))
            .sum();
        let s = st.self_sign as f64;
        delta += coef * ((s * new + rest).cos() - (s * old + rest).cos());
    }
    delta
}

/// Change of the action when link `(site, dir)` is set to `new_theta`,
/// from the 19 terms containing that link.
pub fn link_action_delta(cfg: &FieldConfiguration, site: usize, dir: usize, new_theta: f64, cpl: &Couplings) -> f64 {
    let old = cfg.link_angle(site, dir);
    local_delta(cfg, Var::Link(dir), site, old, new_theta, cpl)
}

/// Change of the action when the Higgs phase at `site` is set to `new_phi`.
pub fn site_action_delta(cfg: &FieldConfiguration, site: usize, new_phi: f64, cpl: &Couplings) -> Result<f64> {
    if cfg.sector() != Sector::Higgs {
        return Err(Error::Usage("site updates are only defined in the Higgs sector".into()));
    }
    Ok(local_delta(cfg, Var::Site, site, cfg.site_angle(site), new_phi, cpl))
}

/// Local U(1) gauge transformation with angle `lambda[x]` at each site:
/// `θ_{x,μ} → θ_{x,μ} + Λ_{x+μ} − Λ_x`, `φ_x → φ_x + Λ_x`.
pub fn gauge_transform(cfg: &FieldConfiguration, lambda: &[f64]) -> Result<FieldConfiguration> {
    let g = *cfg.geometry();
    if lambda.len() != g.volume() {
        return Err(Error::input(format!(
            "gauge angle array has {} entries, lattice has {} sites",
            lambda.len(),
            g.volume()
        )));
    }
    if cfg.sector() == Sector::Unitary && lambda.iter().any(|&l| wrap_angle(l) != 0.0) {
        return Err(Error::Usage(
            "a non-trivial gauge transformation leaves the unitary sector".into(),
        ));
    }
    let mut out = cfg.clone();
    for x in g.sites() {
        for mu in 0..NDIM {
            let y = g.neighbor(x, mu, Step::Forward);
            let l = g.link_index(x, mu);
            out.theta[l] = wrap_angle(cfg.theta[l] + lambda[y] - lambda[x]);
        }
        if cfg.sector() == Sector::Higgs {
            out.phi[x] = wrap_angle(cfg.phi[x] + lambda[x]);
        }
    }
    Ok(out)
}

/// Absorb the Higgs phase into the links (`φ ≡ 0`), returning a
/// unitary-sector configuration with the same action.
pub fn to_unitary_gauge(cfg: &FieldConfiguration) -> FieldConfiguration {
    if cfg.sector() == Sector::Unitary {
        return cfg.clone();
    }
    let lambda: Vec<f64> = cfg.phi.iter().map(|p| -p).collect();
    let mut out = gauge_transform(cfg, &lambda).expect("lambda sized from cfg");
    out.phi.iter_mut().for_each(|p| *p = 0.0);
    out.sector = Sector::Unitary;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_cfg(l: usize, sector: Sector, seed: u64) -> FieldConfiguration {
        let g = LatticeGeometry::hypercubic(l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = (0..g.link_count()).map(|_| rng.gen::<f64>() * TAU).collect();
        let phi = match sector {
            Sector::Higgs => (0..g.volume()).map(|_| rng.gen::<f64>() * TAU).collect(),
            Sector::Unitary => vec![0.0; g.volume()],
        };
        FieldConfiguration::from_parts(g, theta, phi, sector).unwrap()
    }

    #[test]
    fn presets_follow_table() {
        let ip = preset_couplings(ModelPreset::Ip, 0.5, 1.0, 7.0);
        assert_eq!(ip, Couplings::uniform(0.5, 1.0, 0.0));

        let t = preset_couplings(ModelPreset::ItPtLs, 0.4, 0.7, 0.4);
        assert_eq!(t.c1, [0.0, 0.0, 0.0, 0.4]);
        for p in PlanePair::ALL {
            let i = p.index();
            if p.is_temporal() {
                assert_eq!((t.c2[i], t.c3[i]), (0.7, 0.0));
            } else {
                assert_eq!((t.c2[i], t.c3[i]), (0.0, 0.4));
            }
        }

        let t = preset_couplings(ModelPreset::ItPLs, 0.4, 0.7, 0.4);
        assert_eq!(t.c1, [0.0, 0.0, 0.0, 0.4]);
        assert_eq!(t.c2, [0.7; NPLANES]);
        for p in PlanePair::ALL {
            assert_eq!(t.c3[p.index()], if p.is_temporal() { 0.0 } else { 0.4 });
        }

        let pl = preset_couplings(ModelPreset::Pl, 123.0, 1.0, 0.2);
        assert_eq!(pl, Couplings::uniform(0.0, 1.0, 0.2));
    }

    #[test]
    fn preset_names_parse() {
        for p in ModelPreset::ALL {
            assert_eq!(p.name().parse::<ModelPreset>().unwrap(), p);
        }
        assert!("XY".parse::<ModelPreset>().is_err());
    }

    #[test]
    fn plaquette_angle_trivial_configs() {
        let g = LatticeGeometry::hypercubic(3).unwrap();
        let cold = FieldConfiguration::cold(g, Sector::Unitary);
        let constant =
            FieldConfiguration::from_parts(g, vec![1.3; g.link_count()], vec![0.0; g.volume()], Sector::Unitary)
                .unwrap();
        for x in g.sites() {
            for p in PlanePair::ALL {
                assert_eq!(plaquette_angle(&cold, x, p), 0.0);
                assert!(plaquette_angle(&constant, x, p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plaquette_cosine_is_gauge_invariant() {
        let cfg = random_cfg(3, Sector::Higgs, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let lambda: Vec<f64> = (0..cfg.geometry().volume()).map(|_| rng.gen::<f64>() * TAU).collect();
        let t = gauge_transform(&cfg, &lambda).unwrap();
        for x in cfg.geometry().sites() {
            for p in PlanePair::ALL {
                let a = plaquette_angle(&cfg, x, p).cos();
                let b = plaquette_angle(&t, x, p).cos();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cold_action_closed_forms() {
        let g = LatticeGeometry::hypercubic(2).unwrap();
        let cold = FieldConfiguration::cold(g, Sector::Unitary);
        let ip = preset_couplings(ModelPreset::Ip, 0.5, 1.0, 0.0);
        assert!((total_action(&cold, &ip) - 128.0).abs() < 1e-12);
        let pl = preset_couplings(ModelPreset::Pl, 0.0, 1.0, 0.25);
        assert!((total_action(&cold, &pl) - 192.0).abs() < 1e-12);
    }

    #[test]
    fn flipping_one_link_cold() {
        let g = LatticeGeometry::hypercubic(3).unwrap();
        let cold = FieldConfiguration::cold(g, Sector::Unitary);
        let (c1, c2) = (0.45, 0.9);
        let cpl = preset_couplings(ModelPreset::Ip, c1, c2, 0.0);
        let d = link_action_delta(&cold, 5, 2, PI, &cpl);
        assert!((d - (-2.0 * c1 - 12.0 * c2)).abs() < 1e-12);
        assert_eq!(link_action_delta(&cold, 5, 2, 0.0, &cpl), 0.0);
    }

    #[test]
    fn flipping_one_phase_cold() {
        let g = LatticeGeometry::hypercubic(3).unwrap();
        let cold = FieldConfiguration::cold(g, Sector::Higgs);
        let cpl = preset_couplings(ModelPreset::Ip, 0.45, 0.9, 0.0);
        let d = site_action_delta(&cold, 7, PI, &cpl).unwrap();
        assert!((d + 16.0 * 0.45).abs() < 1e-12);
        assert_eq!(site_action_delta(&cold, 7, 0.0, &cpl).unwrap(), 0.0);
    }

    #[test]
    fn site_delta_rejects_unitary() {
        let g = LatticeGeometry::hypercubic(2).unwrap();
        let cold = FieldConfiguration::cold(g, Sector::Unitary);
        let r = site_action_delta(&cold, 0, 1.0, &Couplings::uniform(1.0, 1.0, 1.0));
        assert!(matches!(r, Err(Error::Usage(_))));
    }

    #[test]
    fn local_deltas_match_global_recomputation() {
        let cpl = Couplings {
            c1: [0.3, -0.2, 0.5, 0.7],
            c2: [1.1, 0.4, -0.6, 0.9, 0.2, 1.3],
            c3: [0.25, -0.35, 0.15, 0.45, 0.05, -0.5],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for l in [2, 3] {
            let mut cfg = random_cfg(l, Sector::Higgs, 11 + l as u64);
            let g = *cfg.geometry();
            for _ in 0..200 {
                let before = total_action(&cfg, &cpl);
                let new = rng.gen::<f64>() * TAU;
                if rng.gen::<bool>() {
                    let (x, mu) = (rng.gen_range(0..g.volume()), rng.gen_range(0..NDIM));
                    let d = link_action_delta(&cfg, x, mu, new, &cpl);
                    cfg.set_link_angle(x, mu, new);
                    assert!((total_action(&cfg, &cpl) - before - d).abs() < 1e-10);
                } else {
                    let x = rng.gen_range(0..g.volume());
                    let d = site_action_delta(&cfg, x, new, &cpl).unwrap();
                    cfg.set_site_angle(x, new).unwrap();
                    assert!((total_action(&cfg, &cpl) - before - d).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn gauge_transform_identity_and_unitary() {
        let cfg = random_cfg(2, Sector::Higgs, 3);
        let zero = vec![0.0; cfg.geometry().volume()];
        assert_eq!(gauge_transform(&cfg, &zero).unwrap(), cfg);

        let minus_phi: Vec<f64> = cfg.phi().iter().map(|p| -p).collect();
        let t = gauge_transform(&cfg, &minus_phi).unwrap();
        assert!(t.phi().iter().all(|&p| p == 0.0 || (TAU - p) < 1e-12));

        let u = to_unitary_gauge(&cfg);
        assert_eq!(u.sector(), Sector::Unitary);
        assert!(u.phi().iter().all(|&p| p == 0.0));
        let cpl = Couplings::uniform(0.6, 0.8, 0.3);
        let (a, b) = (total_action(&cfg, &cpl), total_action(&u, &cpl));
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));

        let unitary = random_cfg(2, Sector::Unitary, 4);
        assert_eq!(to_unitary_gauge(&unitary), unitary);
        assert!(gauge_transform(&unitary, &[0.5; 16]).is_err());
        assert!(gauge_transform(&cfg, &[0.0; 3]).is_err());
    }

    #[test]
    fn constant_phase_shift_is_symmetry() {
        let cfg = random_cfg(2, Sector::Higgs, 8);
        let cpl = Couplings::uniform(0.6, 0.8, 0.3);
        let shifted = FieldConfiguration::from_parts(
            *cfg.geometry(),
            cfg.theta().to_vec(),
            cfg.phi().iter().map(|p| p + 2.1).collect(),
            Sector::Higgs,
        )
        .unwrap();
        let (a, b) = (total_action(&cfg, &cpl), total_action(&shifted, &cpl));
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn wrap_angle_range() {
        for a in [-1e-18, -TAU, 0.0, TAU, 7.0 * TAU + 0.3, -3.0] {
            let w = wrap_angle(a);
            assert!((0.0..TAU).contains(&w), "{a} -> {w}");
        }
    }
}
