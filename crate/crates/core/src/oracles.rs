//! Independent small-scale checks of the model and the sampler.

use std::f64::consts::{PI, TAU};

use crate::engine::{run_point_with, Dynamics, RunParameters};
use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, NDIM};
use crate::model::{Couplings, FieldConfiguration, ModelPreset, Sector};
use crate::observables::{estimate_uc, MeasurementRecord};
use crate::scan::{scan_with, ScanBranches, ScanSchedule};

/// Action by naive enumeration of every cosine term, written out from
/// coordinates without the shared term table.
pub fn brute_force_action(cfg: &FieldConfiguration, cpl: &Couplings) -> f64 {
    let geom = cfg.geometry();
    let ext = geom.extents();
    let at = |x: [usize; NDIM], steps: &[usize]| -> usize {
        let mut y = x;
        for &d in steps {
            y[d] = (y[d] + 1) % ext[d];
        }
        geom.site_index(y).expect("in range")
    };
    let th = |s: usize, d: usize| cfg.link_angle(s, d);
    let ph = |s: usize| cfg.site_angle(s);

    let mut total = 0.0;
    for s in geom.sites() {
        let x = geom.coords(s);
        for mu in 0..NDIM {
            let xm = at(x, &[mu]);
            total += cpl.c1[mu] * (ph(s) + th(s, mu) - ph(xm)).cos();
        }
        let mut p = 0;
        for mu in 0..NDIM {
            for nu in mu + 1..NDIM {
                let xm = at(x, &[mu]);
                let xn = at(x, &[nu]);
                let xmn = at(x, &[mu, nu]);
                let plaq = th(xm, nu) - th(s, nu) - th(xn, mu) + th(s, mu);
                total += cpl.c2[p] * plaq.cos();
                let terms = [
                    ph(xn) + th(s, mu) - th(s, nu) - ph(xm),
                    ph(s) + th(s, mu) + th(xm, nu) - ph(xmn),
                    ph(xm) + th(xm, nu) - th(xn, mu) - ph(xn),
                    ph(s) + th(s, nu) + th(xn, mu) - ph(xmn),
                ];
                total += cpl.c3[p] * terms.iter().map(|t| t.cos()).sum::<f64>();
                p += 1;
            }
        }
    }
    total
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_DEPTH: u32 = 50;

    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let diff = left + right - whole;
        if diff.abs() <= 15.0 * tol {
            return Ok(left + right + diff / 15.0);
        }
        if depth == 0 || !diff.is_finite() {
            return Err(Error::Numeric(format!("quadrature did not converge on [{a}, {b}]")));
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }

    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, MAX_DEPTH)
}

/// `<cos θ>` under the weight `exp(c cos θ)`, i.e. `I1(c)/I0(c)`.
pub fn single_link_expectation(c: f64) -> Result<f64> {
    if !c.is_finite() {
        return Err(Error::input(format!("coupling must be finite, got {c}")));
    }
    // Scaled by exp(-|c|) so large couplings do not overflow.
    let w = |t: f64| (c * t.cos() - c.abs()).exp();
    let num = adaptive_simpson(&|t| t.cos() * w(t), 0.0, PI, 1e-10)?;
    let den = adaptive_simpson(&w, 0.0, PI, 1e-10)?;
    Ok(num / den)
}

/// Second-order high-temperature expansion of U/V: each term with
/// coefficient c contributes c²/2 per occurrence per site.
pub fn high_temp_u(cpl: &Couplings) -> f64 {
    let sq = |cs: &[f64]| cs.iter().map(|c| c * c / 2.0).sum::<f64>();
    sq(&cpl.c1) + sq(&cpl.c2) + 4.0 * sq(&cpl.c3)
}

/// Higgs-sector run with every link pinned at zero; only the phases move,
/// so the model becomes an XY model with couplings c1 (nearest neighbour)
/// and c3 (next-nearest).
pub fn frozen_gauge_run(geom: LatticeGeometry, cpl: &Couplings, params: &RunParameters) -> Result<MeasurementRecord> {
    if params.sector != Sector::Higgs {
        return Err(Error::Usage("frozen-gauge runs need the higgs sector".into()));
    }
    let run = run_point_with(None, geom, cpl, params, params.proposal_width, Dynamics::FrozenGauge)?;
    estimate_uc(&run.samples(), params.bins, geom.volume())
}

/// Go-and-back scan with frozen links.
pub fn frozen_gauge_scan(geom: LatticeGeometry, preset: ModelPreset, schedule: &ScanSchedule) -> Result<ScanBranches> {
    if schedule.run.sector != Sector::Higgs {
        return Err(Error::Usage("frozen-gauge scans need the higgs sector".into()));
    }
    scan_with(geom, preset, schedule, Dynamics::FrozenGauge)
}

/// `Σ_{|m| ≤ m_max} exp(-(c/2)(θ - 2πm)²)`.
pub fn villain_weight(c: f64, theta: f64, m_max: u32) -> f64 {
    let m = m_max as i64;
    (-m..=m)
        .map(|k| {
            let d = theta - TAU * k as f64;
            (-0.5 * c * d * d).exp()
        })
        .sum()
}

/// Compare the normalized cosine weight with the normalized periodic
/// Gaussian over `theta_grid`. Returns `max |p_cos - p_villain| / max p_cos`.
pub fn villain_compare(c: f64, theta_grid: &[f64], m_max: u32) -> Result<f64> {
    if m_max < 3 {
        return Err(Error::input(format!("m_max must be at least 3, got {m_max}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::input(format!("coupling must be positive, got {c}")));
    }
    if theta_grid.is_empty() {
        return Err(Error::input("empty angle grid"));
    }
    let cosine = |t: f64| (c * (t.cos() - 1.0)).exp();
    let villain = |t: f64| villain_weight(c, t, m_max);
    let z_cos = adaptive_simpson(&cosine, -PI, PI, 1e-12)?;
    let z_vil = adaptive_simpson(&villain, -PI, PI, 1e-12)?;
    let mut peak = 0.0f64;
    let mut worst = 0.0f64;
    for &t in theta_grid {
        let p = cosine(t) / z_cos;
        peak = peak.max(p);
        worst = worst.max((p - villain(t) / z_vil).abs());
    }
    Ok(worst / peak)
}

/// One row of the oracle table.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> OracleCheck {
    OracleCheck { name, passed, detail }
}

fn random_couplings<R: rand::Rng>(rng: &mut R) -> Couplings {
    let mut c = Couplings::zero();
    c.c1.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.5));
    c.c2.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.5));
    c.c3.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.5));
    c
}

/// Every small-scale check, run with fixed seeds. Takes seconds.
pub fn run_oracle_checks() -> Result<Vec<OracleCheck>> {
    use crate::engine::{init_config, rng_from_seed, Sampler, Start};
    use crate::model::{gauge_transform, link_action_delta, site_action_delta, to_unitary_gauge, total_action};
    use crate::profile::{
        density_deviation, log_slope_beyond_plus, solve_static_field, ChargeProfileSpec, PhaseKernel,
    };
    use rand::Rng;

    let mut out = Vec::new();
    let mut rng = rng_from_seed(2024);

    let geom2 = LatticeGeometry::hypercubic(2)?;
    let mut worst = 0.0f64;
    for k in 0..100 {
        let cfg = init_config(geom2, Start::Hot, Sector::Higgs, k);
        let cpl = random_couplings(&mut rng);
        let (a, b) = (brute_force_action(&cfg, &cpl), total_action(&cfg, &cpl));
        worst = worst.max((a - b).abs() / a.abs().max(1.0));
    }
    out.push(check(
        "brute force vs total action",
        worst <= 1e-12,
        format!("max rel diff {worst:.2e}"),
    ));

    let mut worst = 0.0f64;
    for k in 0..20 {
        let mut cfg = init_config(geom2, Start::Hot, Sector::Higgs, 100 + k);
        let cpl = random_couplings(&mut rng);
        for _ in 0..50 {
            let site = rng.gen_range(0..geom2.volume());
            let new = rng.gen_range(-PI..PI);
            let before = total_action(&cfg, &cpl);
            let local = if rng.gen_bool(0.8) {
                let dir = rng.gen_range(0..NDIM);
                let d = link_action_delta(&cfg, site, dir, new, &cpl);
                cfg.set_link_angle(site, dir, new);
                d
            } else {
                let d = site_action_delta(&cfg, site, new, &cpl)?;
                cfg.set_site_angle(site, new)?;
                d
            };
            worst = worst.max((local - (total_action(&cfg, &cpl) - before)).abs());
        }
    }
    out.push(check(
        "local vs global action change",
        worst <= 1e-10,
        format!("max abs diff {worst:.2e}"),
    ));

    let mut worst = 0.0f64;
    for k in 0..20 {
        let cfg = init_config(geom2, Start::Hot, Sector::Higgs, 200 + k);
        let cpl = random_couplings(&mut rng);
        let sampler = Sampler::new(cfg.clone(), &cpl)?;
        for _ in 0..50 {
            let site = rng.gen_range(0..geom2.volume());
            let dir = rng.gen_range(0..NDIM);
            let new = rng.gen_range(-PI..PI);
            let fast = sampler.link_delta(site, dir, new);
            worst = worst.max((fast - link_action_delta(&cfg, site, dir, new, &cpl)).abs());
            let fast = sampler.site_delta(site, new);
            worst = worst.max((fast - site_action_delta(&cfg, site, new, &cpl)?).abs());
        }
    }
    out.push(check(
        "sampler staples vs reference",
        worst <= 1e-10,
        format!("max abs diff {worst:.2e}"),
    ));

    let geom4 = LatticeGeometry::hypercubic(4)?;
    let mut worst = 0.0f64;
    for k in 0..20 {
        let cfg = init_config(geom4, Start::Hot, Sector::Higgs, 300 + k);
        let cpl = random_couplings(&mut rng);
        let lambda: Vec<f64> = (0..geom4.volume()).map(|_| rng.gen_range(-PI..PI)).collect();
        let a = total_action(&cfg, &cpl);
        let b = total_action(&gauge_transform(&cfg, &lambda)?, &cpl);
        let c = total_action(&to_unitary_gauge(&cfg), &cpl);
        worst = worst.max((a - b).abs() / a.abs()).max((a - c).abs() / a.abs());
    }
    out.push(check(
        "gauge invariance",
        worst <= 1e-9,
        format!("max rel diff {worst:.2e}"),
    ));

    let c = 0.5;
    let quad = single_link_expectation(c)?;
    let (mut i0, mut i1, mut term0, mut term1) = (0.0, 0.0, 1.0, c / 2.0);
    for k in 0..40 {
        let k = k as f64;
        i0 += term0;
        i1 += term1;
        term0 *= (c / 2.0).powi(2) / ((k + 1.0) * (k + 1.0));
        term1 *= (c / 2.0).powi(2) / ((k + 1.0) * (k + 2.0));
    }
    let diff = (quad - i1 / i0).abs();
    out.push(check(
        "single-link quadrature vs Bessel series",
        diff < 1e-9,
        format!("diff {diff:.2e}"),
    ));

    let params = RunParameters {
        thermalization_sweeps: 500,
        measurement_sweeps: 4000,
        bins: 10,
        seed: 11,
        ..RunParameters::default()
    };
    let mut cpl = Couplings::zero();
    cpl.c1 = [c; NDIM];
    let run = run_point_with(None, geom4, &cpl, &params, params.proposal_width, Dynamics::Full)?;
    let r = estimate_uc(&run.samples(), params.bins, geom4.volume())?;
    let (mc, err) = (r.u_per_site / (4.0 * c), r.u_err / (4.0 * c));
    let z = (mc - quad).abs() / err;
    out.push(check(
        "decoupled links vs I1/I0",
        z <= 3.0,
        format!("MC {mc:.5} +- {err:.5}, exact {quad:.5}, {z:.2} sigma"),
    ));

    let cpl = ModelPreset::Ip.couplings(0.1, 0.1, 0.0);
    let run = run_point_with(None, geom4, &cpl, &params, params.proposal_width, Dynamics::Full)?;
    let r = estimate_uc(&run.samples(), params.bins, geom4.volume())?;
    let ht = high_temp_u(&cpl);
    let z = (r.u_per_site - ht).abs() / r.u_err;
    out.push(check(
        "high-temperature expansion",
        z <= 3.0,
        format!(
            "MC {:.5} +- {:.5}, expansion {ht:.5}, {z:.2} sigma",
            r.u_per_site, r.u_err
        ),
    ));

    let grid: Vec<f64> = (0..=400).map(|i| -PI + TAU * i as f64 / 400.0).collect();
    let (weak, strong) = (villain_compare(0.5, &grid, 5)?, villain_compare(5.0, &grid, 5)?);
    out.push(check(
        "Villain approximation improves with c",
        strong < weak,
        format!("c=0.5: {weak:.4}, c=5: {strong:.4}"),
    ));

    let spec = |kernel| ChargeProfileSpec {
        kernel,
        ..ChargeProfileSpec::default()
    };
    let s = spec(PhaseKernel::Coulomb);
    let e = solve_static_field(&s)?;
    let plus = e.grid.index(s.site_plus());
    let diff = (e.divergence(plus) - s.charge_q).abs();
    out.push(check("Coulomb Gauss law", diff <= 1e-8, format!("residual {diff:.2e}")));

    let s = spec(PhaseKernel::Higgs { mass: 2.0 });
    let slope = log_slope_beyond_plus(&s, &density_deviation(&solve_static_field(&s)?), 1, 4)?;
    out.push(check(
        "Higgs screening slope",
        (slope + 2.0).abs() <= 0.2,
        format!("slope {slope:.3} for m = 2"),
    ));

    let s = spec(PhaseKernel::Confinement);
    let rho = density_deviation(&solve_static_field(&s)?);
    let nonzero = rho.values.iter().filter(|&&v| v != 0.0).count();
    let expected = (s.site_plus()[0] + s.grid[0] - s.site_minus()[0]) % s.grid[0];
    out.push(check(
        "confinement string",
        nonzero == expected,
        format!("{nonzero} sites on the string"),
    ));

    Ok(out)
}
