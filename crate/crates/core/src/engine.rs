//! Metropolis Monte Carlo for the gauge-Higgs action.
//!
//! A sweep visits every link once in link-index order (direction-major),
//! then, in the Higgs sector, every site once. Each variable gets a single
//! proposal `a -> a + u` with `u` uniform on `[-w, w]`, accepted with
//! probability `min(1, exp(ΔA))`.
//!
//! The sampler keeps `exp(iθ)` and `exp(iφ)` alongside the angles so that the
//! local action change is a sum of complex products: for a variable `v`
//! entering terms `c_k cos(±v + b_k)`, the `v`-dependent action is
//! `Re(exp(iv) S)` with the staple sum `S = Σ_k c_k exp(±i b_k)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, NDIM};
use crate::model::terms::{staples_for, Var};
use crate::model::{total_action, wrap_angle, Couplings, FieldConfiguration, Sector};

/// The pseudo-random generator used for every run, recorded in output headers.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";

pub type SimRng = ChaCha8Rng;

pub const WIDTH_FLOOR: f64 = 1e-3;
pub const WIDTH_CAP: f64 = PI;
pub const TUNE_FACTOR: f64 = 1.1;
/// Thermalization sweeps between proposal-width adjustments.
pub const TUNE_INTERVAL: usize = 100;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 mix of a master seed and a stream index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    Hot,
    Cold,
}

impl std::str::FromStr for Start {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hot" => Ok(Start::Hot),
            "cold" => Ok(Start::Cold),
            _ => Err(Error::input(format!("unknown start '{s}' (hot, cold)"))),
        }
    }
}

impl std::fmt::Display for Start {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Start::Hot => "hot",
            Start::Cold => "cold",
        })
    }
}

/// Proposal half-widths per variable class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalWidths {
    pub link: f64,
    pub site: f64,
}

impl Default for ProposalWidths {
    fn default() -> Self {
        ProposalWidths { link: 1.0, site: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunParameters {
    pub thermalization_sweeps: usize,
    pub measurement_sweeps: usize,
    pub bins: usize,
    pub start: Start,
    pub sector: Sector,
    pub seed: u64,
    /// Acceptance band `(lo, hi)` the width controller aims for.
    pub target_acceptance: (f64, f64),
    pub proposal_width: ProposalWidths,
}

impl Default for RunParameters {
    fn default() -> Self {
        RunParameters {
            thermalization_sweeps: 3000,
            measurement_sweeps: 5000,
            bins: 10,
            start: Start::Cold,
            sector: Sector::Unitary,
            seed: 0,
            target_acceptance: (0.6, 0.8),
            proposal_width: ProposalWidths::default(),
        }
    }
}

impl RunParameters {
    pub fn validate(&self) -> Result<()> {
        if self.thermalization_sweeps == 0 || self.measurement_sweeps == 0 {
            return Err(Error::input("sweep counts must be positive"));
        }
        if self.bins < 2 {
            return Err(Error::input("need at least 2 bins"));
        }
        if self.measurement_sweeps < self.bins {
            return Err(Error::input("fewer measurement sweeps than bins"));
        }
        let (lo, hi) = self.target_acceptance;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::input(format!(
                "target acceptance band ({lo}, {hi}) must satisfy 0 < lo < hi < 1"
            )));
        }
        let w = self.proposal_width;
        if !(w.link > 0.0 && w.site > 0.0 && w.link.is_finite() && w.site.is_finite()) {
            return Err(Error::input("proposal widths must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub accepted: u64,
    pub proposed: u64,
}

impl SweepStats {
    /// `accepted / proposed`, or `None` when nothing was proposed.
    pub fn acceptance_ratio(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }

    pub fn merge(&mut self, other: SweepStats) {
        self.accepted += other.accepted;
        self.proposed += other.proposed;
    }
}

/// Acceptance counts of one or more sweeps, per variable class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepOutcome {
    pub link: SweepStats,
    pub site: SweepStats,
}

impl SweepOutcome {
    pub fn merge(&mut self, other: SweepOutcome) {
        self.link.merge(other.link);
        self.site.merge(other.site);
    }

    pub fn total(&self) -> SweepStats {
        let mut t = self.link;
        t.merge(self.site);
        t
    }
}

/// Multiplicative width controller: widen when acceptance is above the band,
/// narrow when below, leave alone inside it. Clamped to
/// `[WIDTH_FLOOR, WIDTH_CAP]`.
pub fn tune_proposal_width(history: &[SweepStats], width: f64, band: (f64, f64)) -> f64 {
    let mut total = SweepStats::default();
    history.iter().for_each(|s| total.merge(*s));
    let Some(ratio) = total.acceptance_ratio() else {
        return width;
    };
    let w = if ratio > band.1 {
        width * TUNE_FACTOR
    } else if ratio < band.0 {
        width / TUNE_FACTOR
    } else {
        width
    };
    w.clamp(WIDTH_FLOOR, WIDTH_CAP)
}

/// Fresh configuration: all angles zero (cold) or i.i.d. uniform on
/// `[0, 2π)` (hot, drawn from a generator seeded with `seed`).
pub fn init_config(geom: LatticeGeometry, start: Start, sector: Sector, seed: u64) -> FieldConfiguration {
    init_config_with(geom, start, sector, &mut rng_from_seed(seed))
}

pub fn init_config_with<R: Rng>(
    geom: LatticeGeometry,
    start: Start,
    sector: Sector,
    rng: &mut R,
) -> FieldConfiguration {
    match start {
        Start::Cold => FieldConfiguration::cold(geom, sector),
        Start::Hot => {
            let theta = (0..geom.link_count()).map(|_| rng.gen::<f64>() * TAU).collect();
            let phi = match sector {
                Sector::Higgs => (0..geom.volume()).map(|_| rng.gen::<f64>() * TAU).collect(),
                Sector::Unitary => vec![0.0; geom.volume()],
            };
            FieldConfiguration::from_parts(geom, theta, phi, sector).expect("generated arrays match geometry")
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct CompiledFactor {
    disp: u32,
    /// Start of the variable's block in the phase cache.
    offset: u32,
    /// `-1.0` when the factor enters conjugated.
    im_sign: f64,
}

#[derive(Debug, Clone)]
struct CompiledStaple {
    coef: f64,
    conj_self: bool,
    len: usize,
    others: [CompiledFactor; 3],
}

/// Neighbor indices `site + d` for each displacement `d` appearing in a staple.
#[derive(Debug, Clone)]
struct DisplacementTable {
    stride: usize,
    table: Vec<u32>,
}

/// Metropolis sampler owning a configuration and its phase caches.
#[derive(Debug, Clone)]
pub struct Sampler {
    cfg: FieldConfiguration,
    couplings: Couplings,
    /// `exp(i angle)` for the 4V links followed by the V sites.
    phases: Vec<Complex64>,
    nbr: DisplacementTable,
    link_staples: [Vec<CompiledStaple>; NDIM],
    site_staples: Vec<CompiledStaple>,
    update_links: bool,
    update_sites: bool,
    action: f64,
}

/// `a + step` reduced to `[0, 2π)` for `a` in range and `|step| <= π`.
#[inline]
fn advance(a: f64, step: f64) -> f64 {
    let b = a + step;
    if b >= TAU {
        b - TAU
    } else if b < 0.0 {
        // b may round to TAU exactly
        wrap_angle(b + TAU)
    } else {
        b
    }
}

#[inline]
fn phase(a: f64) -> Complex64 {
    let (s, c) = a.sin_cos();
    Complex64::new(c, s)
}

impl Sampler {
    pub fn new(cfg: FieldConfiguration, couplings: &Couplings) -> Result<Self> {
        let update_sites = cfg.sector() == Sector::Higgs;
        Self::build(cfg, couplings, true, update_sites)
    }

    /// Sampler for the Higgs phases alone with every link pinned to zero
    /// (the gauge field set to unity).
    pub fn frozen_gauge(cfg: FieldConfiguration, couplings: &Couplings) -> Result<Self> {
        if cfg.sector() != Sector::Higgs {
            return Err(Error::Usage("frozen-gauge runs need the Higgs sector".into()));
        }
        let g = *cfg.geometry();
        let cfg = FieldConfiguration::from_parts(g, vec![0.0; g.link_count()], cfg.phi().to_vec(), Sector::Higgs)?;
        Self::build(cfg, couplings, false, true)
    }

    fn build(cfg: FieldConfiguration, couplings: &Couplings, update_links: bool, update_sites: bool) -> Result<Self> {
        couplings.validate()?;
        let g = *cfg.geometry();
        let keep = |v: Var| match v {
            Var::Site => update_sites,
            Var::Link(_) => update_links,
        };

        let mut disps: Vec<[i32; NDIM]> = Vec::new();
        let mut compile = |target: Var| -> Vec<CompiledStaple> {
            let mut out = Vec::new();
            for st in staples_for(target) {
                let coef = st.slot.coefficient(couplings);
                if coef == 0.0 {
                    continue;
                }
                let dummy = CompiledFactor {
                    disp: 0,
                    offset: 0,
                    im_sign: 1.0,
                };
                let mut c = CompiledStaple {
                    coef,
                    conj_self: st.self_sign < 0,
                    len: 0,
                    others: [dummy; 3],
                };
                for f in st.others.iter().filter(|f| keep(f.var)) {
                    let id = match disps.iter().position(|d| *d == f.disp) {
                        Some(i) => i,
                        None => {
                            disps.push(f.disp);
                            disps.len() - 1
                        }
                    };
                    c.others[c.len] = CompiledFactor {
                        disp: id as u32,
                        offset: match f.var {
                            Var::Link(d) => (d * g.volume()) as u32,
                            Var::Site => g.link_count() as u32,
                        },
                        im_sign: f.sign as f64,
                    };
                    c.len += 1;
                }
                out.push(c);
            }
            out
        };
        let link_staples: [Vec<CompiledStaple>; NDIM] = if update_links {
            std::array::from_fn(|d| compile(Var::Link(d)))
        } else {
            Default::default()
        };
        let site_staples = if update_sites { compile(Var::Site) } else { Vec::new() };

        let stride = disps.len();
        let mut table = Vec::with_capacity(stride * g.volume());
        for x in g.sites() {
            table.extend(disps.iter().map(|&d| g.shift(x, d) as u32));
        }

        let phases = cfg.theta().iter().chain(cfg.phi()).map(|&a| phase(a)).collect();
        let action = total_action(&cfg, couplings);
        Ok(Sampler {
            cfg,
            couplings: *couplings,
            phases,
            nbr: DisplacementTable { stride, table },
            link_staples,
            site_staples,
            update_links,
            update_sites,
            action,
        })
    }

    pub fn config(&self) -> &FieldConfiguration {
        &self.cfg
    }

    pub fn into_config(self) -> FieldConfiguration {
        self.cfg
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    /// Action tracked incrementally through accepted updates.
    pub fn action(&self) -> f64 {
        self.action
    }

    /// Recompute the tracked action from scratch.
    pub fn resync_action(&mut self) -> f64 {
        self.action = total_action(&self.cfg, &self.couplings);
        self.action
    }

    #[inline]
    fn staple_sum(&self, staples: &[CompiledStaple], x: usize) -> Complex64 {
        let row = &self.nbr.table[x * self.nbr.stride..(x + 1) * self.nbr.stride];
        let mut s = Complex64::new(0.0, 0.0);
        for st in staples {
            let mut p = Complex64::new(st.coef, 0.0);
            for f in &st.others[..st.len] {
                let z = self.phases[(f.offset + row[f.disp as usize]) as usize];
                p *= Complex64::new(z.re, f.im_sign * z.im);
            }
            s += if st.conj_self { p.conj() } else { p };
        }
        s
    }

    /// Action change for setting link `(site, dir)` to `new_theta`, using the
    /// cached phases.
    pub fn link_delta(&self, site: usize, dir: usize, new_theta: f64) -> f64 {
        let l = self.cfg.geometry().link_index(site, dir);
        let s = self.staple_sum(&self.link_staples[dir], site);
        ((phase(new_theta) - self.phases[l]) * s).re
    }

    pub fn site_delta(&self, site: usize, new_phi: f64) -> f64 {
        let s = self.staple_sum(&self.site_staples, site);
        ((phase(new_phi) - self.phases[self.cfg.geometry().link_count() + site]) * s).re
    }

    /// One Metropolis sweep over all dynamical variables.
    pub fn sweep<R: Rng>(&mut self, widths: &ProposalWidths, rng: &mut R) -> SweepOutcome {
        let mut out = SweepOutcome::default();
        let v = self.cfg.geometry().volume();
        if self.update_links {
            for dir in 0..NDIM {
                for x in 0..v {
                    let l = dir * v + x;
                    let s = self.staple_sum(&self.link_staples[dir], x);
                    let old = self.cfg.theta()[l];
                    let new = advance(old, widths.link * (2.0 * rng.gen::<f64>() - 1.0));
                    let u = phase(new);
                    let delta = ((u - self.phases[l]) * s).re;
                    out.link.proposed += 1;
                    if delta >= 0.0 || rng.gen::<f64>() < delta.exp() {
                        out.link.accepted += 1;
                        self.phases[l] = u;
                        self.cfg.set_link_by_index(l, new);
                        self.action += delta;
                    }
                }
            }
        }
        if self.update_sites {
            for x in 0..v {
                let s = self.staple_sum(&self.site_staples, x);
                let old = self.cfg.phi()[x];
                let new = advance(old, widths.site * (2.0 * rng.gen::<f64>() - 1.0));
                let u = phase(new);
                let delta = ((u - self.phases[4 * v + x]) * s).re;
                out.site.proposed += 1;
                if delta >= 0.0 || rng.gen::<f64>() < delta.exp() {
                    out.site.accepted += 1;
                    self.phases[4 * v + x] = u;
                    self.cfg.set_site_raw(x, new);
                    self.action += delta;
                }
            }
        }
        out
    }
}

/// One sweep applied to `cfg` in place. Builds a fresh [`Sampler`] each call;
/// long runs should hold a sampler instead.
pub fn metropolis_sweep<R: Rng>(
    cfg: &mut FieldConfiguration,
    couplings: &Couplings,
    widths: &ProposalWidths,
    rng: &mut R,
) -> Result<SweepOutcome> {
    let mut sampler = Sampler::new(cfg.clone(), couplings)?;
    let out = sampler.sweep(widths, rng);
    *cfg = sampler.into_config();
    Ok(out)
}

/// Result of simulating one parameter point.
#[derive(Debug, Clone)]
pub struct PointRun {
    /// Total action after each measurement sweep, grouped by bin.
    pub bins: Vec<Vec<f64>>,
    pub final_config: FieldConfiguration,
    /// Widths after thermalization (frozen during measurement).
    pub widths: ProposalWidths,
    /// Acceptance during the measurement sweeps.
    pub measurement: SweepOutcome,
}

impl PointRun {
    pub fn samples(&self) -> Vec<f64> {
        self.bins.concat()
    }
}

/// Which variables a run updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamics {
    /// Links, plus Higgs phases in the Higgs sector.
    Full,
    /// Higgs phases only, links pinned at zero.
    FrozenGauge,
}

/// Thermalize (with width tuning) and measure, starting from
/// `params.start` with `params.seed`.
pub fn run_point(geom: LatticeGeometry, couplings: &Couplings, params: &RunParameters) -> Result<PointRun> {
    run_point_with(None, geom, couplings, params, params.proposal_width, Dynamics::Full)
}

/// Like [`run_point`] but continuing from an existing configuration
/// (warm start). `params.start` is ignored; the configuration's sector wins.
pub fn run_point_from(
    cfg: FieldConfiguration,
    couplings: &Couplings,
    params: &RunParameters,
    widths: ProposalWidths,
) -> Result<PointRun> {
    let geom = *cfg.geometry();
    run_point_with(Some(cfg), geom, couplings, params, widths, Dynamics::Full)
}

pub fn run_point_with(
    initial: Option<FieldConfiguration>,
    geom: LatticeGeometry,
    couplings: &Couplings,
    params: &RunParameters,
    widths: ProposalWidths,
    dynamics: Dynamics,
) -> Result<PointRun> {
    params.validate()?;
    let mut rng = rng_from_seed(params.seed);
    let cfg = match initial {
        Some(cfg) => cfg,
        None => init_config_with(geom, params.start, params.sector, &mut rng),
    };
    let sampler = match dynamics {
        Dynamics::Full => Sampler::new(cfg, couplings)?,
        Dynamics::FrozenGauge => Sampler::frozen_gauge(cfg, couplings)?,
    };
    Ok(drive(sampler, params, widths, &mut rng))
}

pub(crate) fn drive(
    mut sampler: Sampler,
    params: &RunParameters,
    mut widths: ProposalWidths,
    rng: &mut SimRng,
) -> PointRun {
    let band = params.target_acceptance;
    let mut window = SweepOutcome::default();
    for sweep in 1..=params.thermalization_sweeps {
        window.merge(sampler.sweep(&widths, rng));
        if sweep % TUNE_INTERVAL == 0 {
            widths.link = tune_proposal_width(&[window.link], widths.link, band);
            widths.site = tune_proposal_width(&[window.site], widths.site, band);
            window = SweepOutcome::default();
        }
    }

    let per_bin = params.measurement_sweeps / params.bins;
    let mut measurement = SweepOutcome::default();
    let mut bins = Vec::with_capacity(params.bins);
    for _ in 0..params.bins {
        sampler.resync_action();
        let mut series = Vec::with_capacity(per_bin);
        for _ in 0..per_bin {
            measurement.merge(sampler.sweep(&widths, rng));
            series.push(sampler.action());
        }
        bins.push(series);
    }
    PointRun {
        bins,
        final_config: sampler.into_config(),
        widths,
        measurement,
    }
}
