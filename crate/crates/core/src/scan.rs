//! Go-and-back parameter scans and transition classification.
//!
//! A scan ramps one coupling up over a grid and then back down, warm-starting
//! every point from the previous point's final configuration. A first-order
//! transition shows up as a gap between the two branches of U (hysteresis)
//! or a jump in U; a continuous transition as a change of level in C with U
//! continuous.

use rayon::prelude::*;

use crate::engine::{derive_seed, run_point_with, Dynamics, PointRun, ProposalWidths, RunParameters};
use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::model::{preset_couplings, Couplings, FieldConfiguration, ModelPreset};
use crate::observables::{estimate_uc, MeasurementRecord};

/// Which scalar coupling a scan varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanAxis {
    C1,
    C2,
    C3,
    /// `c1` and `c3` varied together.
    C1EqualsC3,
}

impl ScanAxis {
    pub fn name(self) -> &'static str {
        match self {
            ScanAxis::C1 => "c1",
            ScanAxis::C2 => "c2",
            ScanAxis::C3 => "c3",
            ScanAxis::C1EqualsC3 => "c1=c3",
        }
    }
}

impl std::str::FromStr for ScanAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c1" => Ok(ScanAxis::C1),
            "c2" => Ok(ScanAxis::C2),
            "c3" => Ok(ScanAxis::C3),
            "c1=c3" | "c1_equals_c3" | "c13" => Ok(ScanAxis::C1EqualsC3),
            _ => Err(Error::input(format!("unknown scan axis '{s}' (c1, c2, c3, c1=c3)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSchedule {
    pub axis: ScanAxis,
    /// Values of the scalar couplings not on the scan axis.
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub lo: f64,
    pub hi: f64,
    pub dc: f64,
    pub run: RunParameters,
    /// Start each point from the previous point's final configuration.
    pub warm_start: bool,
    /// Worker threads for independent (cold-start-per-point) scans.
    pub workers: usize,
}

impl ScanSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::input(format!(
                "scan range [{}, {}] must satisfy lo <= hi",
                self.lo, self.hi
            )));
        }
        if !(self.dc > 0.0 && self.dc.is_finite()) {
            return Err(Error::input(format!("dc must be positive, got {}", self.dc)));
        }
        let steps = (self.hi - self.lo) / self.dc;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(Error::input(format!("(hi - lo)/dc = {steps} is not an integer")));
        }
        self.run.validate()
    }

    /// Grid values in increasing order.
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.dc).round() as usize;
        (0..=n)
            .map(|i| {
                let c = self.lo + i as f64 * self.dc;
                (c * 1e12).round() / 1e12
            })
            .collect()
    }

    pub fn couplings_at(&self, preset: ModelPreset, c: f64) -> Couplings {
        let (mut c1, mut c2, mut c3) = (self.c1, self.c2, self.c3);
        match self.axis {
            ScanAxis::C1 => c1 = c,
            ScanAxis::C2 => c2 = c,
            ScanAxis::C3 => c3 = c,
            ScanAxis::C1EqualsC3 => {
                c1 = c;
                c3 = c;
            }
        }
        preset_couplings(preset, c1, c2, c3)
    }
}

/// One simulated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub c: f64,
    pub record: MeasurementRecord,
    pub link_acceptance: Option<f64>,
    pub site_acceptance: Option<f64>,
}

impl ScanPoint {
    pub fn from_run(c: f64, run: &PointRun, bins: usize, volume: usize) -> Result<Self> {
        Ok(ScanPoint {
            c,
            record: estimate_uc(&run.samples(), bins, volume)?,
            link_acceptance: run.measurement.link.acceptance_ratio(),
            site_acceptance: run.measurement.site.acceptance_ratio(),
        })
    }

    /// Acceptance over all updated variables.
    pub fn acceptance(&self) -> Option<f64> {
        match (self.link_acceptance, self.site_acceptance) {
            (Some(l), Some(s)) => Some(0.5 * (l + s)),
            (a, b) => a.or(b),
        }
    }
}

/// Up and down branches, both stored in increasing `c` order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanBranches {
    pub up: Vec<ScanPoint>,
    pub down: Vec<ScanPoint>,
}

impl ScanBranches {
    pub fn grid(&self) -> Vec<f64> {
        self.up.iter().map(|p| p.c).collect()
    }

    pub fn swapped(&self) -> Self {
        ScanBranches {
            up: self.down.clone(),
            down: self.up.clone(),
        }
    }
}

/// Simulate the up branch (`lo → hi`) then the down branch (`hi → lo`).
///
/// Each point's generator is seeded with `derive_seed(run.seed, k)` where `k`
/// counts points in execution order, so results do not depend on `workers`.
pub fn run_hysteresis_scan(
    geom: LatticeGeometry,
    preset: ModelPreset,
    schedule: &ScanSchedule,
) -> Result<ScanBranches> {
    scan_with(geom, preset, schedule, Dynamics::Full)
}

pub(crate) fn scan_with(
    geom: LatticeGeometry,
    preset: ModelPreset,
    schedule: &ScanSchedule,
    dynamics: Dynamics,
) -> Result<ScanBranches> {
    schedule.validate()?;
    let grid = schedule.grid();
    let n = grid.len();
    let order: Vec<(usize, f64)> = grid
        .iter()
        .copied()
        .enumerate()
        .chain(grid.iter().copied().enumerate().rev())
        .collect();

    let point_params = |k: usize| RunParameters {
        seed: derive_seed(schedule.run.seed, k as u64),
        ..schedule.run.clone()
    };
    let bins = schedule.run.bins;
    let volume = geom.volume();

    let points: Vec<ScanPoint> = if schedule.warm_start {
        let mut out = Vec::with_capacity(2 * n);
        let mut state: Option<(FieldConfiguration, ProposalWidths)> = None;
        for (k, &(_, c)) in order.iter().enumerate() {
            let cpl = schedule.couplings_at(preset, c);
            let params = point_params(k);
            let (init, widths) = match state.take() {
                None => (None, params.proposal_width),
                Some((cfg, widths)) => (Some(cfg), widths),
            };
            let run = run_point_with(init, geom, &cpl, &params, widths, dynamics)?;
            out.push(ScanPoint::from_run(c, &run, bins, volume)?);
            state = Some((run.final_config, run.widths));
        }
        out
    } else {
        let simulate = |(k, &(_, c)): (usize, &(usize, f64))| -> Result<ScanPoint> {
            let cpl = schedule.couplings_at(preset, c);
            let params = point_params(k);
            let run = run_point_with(None, geom, &cpl, &params, params.proposal_width, dynamics)?;
            ScanPoint::from_run(c, &run, bins, volume)
        };
        if schedule.workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(schedule.workers)
                .build()
                .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
            pool.install(|| order.par_iter().enumerate().map(simulate).collect::<Result<_>>())?
        } else {
            order.iter().enumerate().map(simulate).collect::<Result<_>>()?
        }
    };

    let mut up = points[..n].to_vec();
    let mut down = points[n..].to_vec();
    down.reverse();
    up.sort_by(|a, b| a.c.total_cmp(&b.c));
    Ok(ScanBranches { up, down })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionOrder {
    First,
    Second,
    None,
}

impl std::fmt::Display for TransitionOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TransitionOrder::First => "first",
            TransitionOrder::Second => "second",
            TransitionOrder::None => "none",
        })
    }
}

/// Decision thresholds. Significances are in units of the combined error,
/// ratios are relative to the median over the scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierThresholds {
    /// Up/down separation of U counted as a gap.
    pub gap_sigma: f64,
    /// Consecutive gapped points needed for a hysteresis loop.
    pub gap_persistence: usize,
    /// Significance of a single-step jump of U along a branch.
    pub jump_sigma: f64,
    /// A jump must also exceed this multiple of the median step of U.
    pub jump_ratio: f64,
    /// Significance of a change of level of C.
    pub level_sigma: f64,
    /// A level change must also exceed this multiple of the median change.
    pub level_ratio: f64,
    /// Points averaged on each side when comparing C levels.
    pub level_window: usize,
    /// Significance of an interior peak of dU/dc over its median.
    pub slope_sigma: f64,
    /// The peak must also exceed this multiple of the median slope.
    pub slope_ratio: f64,
    /// Minimum `χ²_quadratic − χ²_hinge` for a kink of U.
    pub kink_chi2_gain: f64,
    /// Minimum `χ²_quadratic / χ²_hinge` for a kink of U.
    pub kink_chi2_ratio: f64,
    /// Steeper over shallower slope on the two sides of the kink.
    pub kink_slope_ratio: f64,
}

impl Default for ClassifierThresholds {
    fn default() -> Self {
        ClassifierThresholds {
            gap_sigma: 3.0,
            gap_persistence: 2,
            jump_sigma: 5.0,
            jump_ratio: 8.0,
            level_sigma: 4.0,
            level_ratio: 3.0,
            level_window: 2,
            slope_sigma: 5.0,
            slope_ratio: 2.5,
            kink_chi2_gain: 25.0,
            kink_chi2_ratio: 3.0,
            kink_slope_ratio: 2.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionEvidence {
    /// Largest up/down separation of U in units of the combined error.
    pub max_branch_gap: f64,
    /// `∫ |U_up − U_down| dc` (per site).
    pub hysteresis_loop_area: f64,
    /// Largest branch-averaged C/V.
    pub c_peak_height: f64,
    /// Largest change of level of the branch-averaged C/V.
    pub c_jump: f64,
    /// Largest interior |dU/dc| of the branch-averaged U over its median.
    pub u_slope_peak: f64,
    /// `χ²_quadratic / χ²_hinge` of the branch-averaged U.
    pub u_kink_chi2_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionReport {
    pub location_interval: (f64, f64),
    pub order: TransitionOrder,
    /// Set when a gap appears at a single point only: weak first order and
    /// second order cannot be told apart.
    pub low_confidence: bool,
    pub evidence: TransitionEvidence,
}

impl TransitionReport {
    pub fn location(&self) -> f64 {
        0.5 * (self.location_interval.0 + self.location_interval.1)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn significance(diff: f64, err: f64) -> f64 {
    if err > 0.0 {
        diff.abs() / err
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Largest single-step jump of U along one branch: `(step index, sigma, ratio)`.
fn largest_jump(branch: &[ScanPoint]) -> Option<(usize, f64, f64)> {
    let steps: Vec<(f64, f64)> = branch
        .windows(2)
        .map(|w| {
            let d = w[1].record.u_per_site - w[0].record.u_per_site;
            let e = w[0].record.u_err.hypot(w[1].record.u_err);
            (d.abs(), e)
        })
        .collect();
    let med = median(steps.iter().map(|s| s.0).collect());
    steps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .map(|(i, &(d, e))| {
            let ratio = if med > 0.0 {
                d / med
            } else if d > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            (i, significance(d, e), ratio)
        })
}

/// Weighted least squares with three parameters: `(coefficients, χ²)`.
fn fit3(rows: &[[f64; 3]], y: &[f64], err: &[f64]) -> Option<([f64; 3], f64)> {
    let mut a = [[0.0; 4]; 3];
    for ((r, &yi), &e) in rows.iter().zip(y).zip(err) {
        let w = 1.0 / (e * e);
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += w * r[i] * r[j];
            }
            a[i][3] += w * r[i] * yi;
        }
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        a.swap(col, piv);
        if a[col][col].abs() < 1e-300 {
            return None;
        }
        let pivot = a[col];
        for (row, r) in a.iter_mut().enumerate() {
            if row != col {
                let f = r[col] / pivot[col];
                for (x, p) in r.iter_mut().zip(pivot).skip(col) {
                    *x -= f * p;
                }
            }
        }
    }
    let b = [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]];
    let chi2 = rows
        .iter()
        .zip(y)
        .zip(err)
        .map(|((r, &yi), &e)| ((b[0] * r[0] + b[1] * r[1] + b[2] * r[2] - yi) / e).powi(2))
        .sum();
    Some((b, chi2))
}

#[derive(Debug, Clone, Copy)]
struct Kink {
    interval: (f64, f64),
    chi2_quad: f64,
    chi2_hinge: f64,
    left_slope: f64,
    right_slope: f64,
}

/// A break in the slope of U: the best continuous two-segment line against
/// a quadratic, both three-parameter fits. Hinges sit on grid points and
/// midpoints with at least two points on each side.
fn best_kink(grid: &[f64], u: &[f64], err: &[f64]) -> Option<Kink> {
    let n = grid.len();
    if n < 6 || !err.iter().all(|&e| e > 0.0) {
        return None;
    }
    let mid = grid.iter().sum::<f64>() / n as f64;
    let quad: Vec<[f64; 3]> = grid.iter().map(|&c| [1.0, c - mid, (c - mid).powi(2)]).collect();
    let (_, chi_quad) = fit3(&quad, u, err)?;
    let mut best: Option<Kink> = None;
    for k in 2..n - 2 {
        let candidates = [
            (grid[k], (grid[k - 1], grid[k + 1])),
            (0.5 * (grid[k] + grid[k + 1]), (grid[k], grid[k + 1])),
        ];
        for (h, interval) in candidates {
            let rows: Vec<[f64; 3]> = grid.iter().map(|&c| [1.0, c - h, (c - h).max(0.0)]).collect();
            if let Some((b, chi)) = fit3(&rows, u, err) {
                if best.is_none_or(|k| chi < k.chi2_hinge) {
                    best = Some(Kink {
                        interval,
                        chi2_quad: chi_quad,
                        chi2_hinge: chi,
                        left_slope: b[1],
                        right_slope: b[1] + b[2],
                    });
                }
            }
        }
    }
    best
}

/// Classify the transition seen in a go-and-back scan.
///
/// In order: a persistent up/down gap of U or a jump of U along a branch
/// means first order; a single gapped point means second order with low
/// confidence; a peak of dU/dc, a kink of U or a change of level of C
/// means second order; anything else is none.
pub fn classify_transition(branches: &ScanBranches, thresholds: &ClassifierThresholds) -> Result<TransitionReport> {
    let (up, down) = (&branches.up, &branches.down);
    if up.is_empty() || up.len() != down.len() {
        return Err(Error::input("branches must be non-empty and of equal length"));
    }
    if up.iter().zip(down).any(|(a, b)| (a.c - b.c).abs() > 1e-9) {
        return Err(Error::input("up and down branches are on different grids"));
    }
    let n = up.len();
    let grid: Vec<f64> = up.iter().map(|p| p.c).collect();

    // Hysteresis: up/down separation of U.
    let gaps: Vec<f64> = up
        .iter()
        .zip(down)
        .map(|(a, b)| {
            significance(
                a.record.u_per_site - b.record.u_per_site,
                a.record.u_err.hypot(b.record.u_err),
            )
        })
        .collect();
    let max_branch_gap = gaps.iter().copied().fold(0.0, f64::max);
    let loop_area = up
        .iter()
        .zip(down)
        .map(|(a, b)| (a.record.u_per_site - b.record.u_per_site).abs())
        .collect::<Vec<_>>()
        .windows(2)
        .zip(grid.windows(2))
        .map(|(d, c)| 0.5 * (d[0] + d[1]) * (c[1] - c[0]))
        .sum();

    // Longest run of gapped points; ties go to the larger summed gap.
    let mut best_run: Option<(usize, usize, f64)> = None;
    let mut i = 0;
    while i < n {
        if gaps[i] > thresholds.gap_sigma {
            let start = i;
            while i < n && gaps[i] > thresholds.gap_sigma {
                i += 1;
            }
            let weight: f64 = gaps[start..i].iter().map(|g| g.min(1e6)).sum();
            let better = match best_run {
                None => true,
                Some((s, e, w)) => (i - start, weight) > (e - s, w),
            };
            if better {
                best_run = Some((start, i, weight));
            }
        } else {
            i += 1;
        }
    }

    // Step discontinuity of U on either branch.
    let jump = [largest_jump(up), largest_jump(down)]
        .into_iter()
        .flatten()
        .filter(|&(_, sig, ratio)| sig > thresholds.jump_sigma && ratio > thresholds.jump_ratio)
        .max_by(|a, b| a.1.total_cmp(&b.1));

    // Change of level of the branch-averaged C.
    let c_mean: Vec<f64> = up
        .iter()
        .zip(down)
        .map(|(a, b)| 0.5 * (a.record.c_per_site + b.record.c_per_site))
        .collect();
    let c_err: Vec<f64> = up
        .iter()
        .zip(down)
        .map(|(a, b)| 0.5 * a.record.c_err.hypot(b.record.c_err))
        .collect();
    let w = thresholds.level_window.max(1);
    let levels: Vec<(usize, f64, f64)> = (1..n)
        .map(|k| {
            let (l0, r1) = (k.saturating_sub(w), (k + w).min(n));
            let side = |r: std::ops::Range<usize>| {
                let m = r.len() as f64;
                let mean = c_mean[r.clone()].iter().sum::<f64>() / m;
                let var = c_err[r].iter().map(|e| e * e).sum::<f64>() / (m * m);
                (mean, var)
            };
            let (ml, vl) = side(l0..k);
            let (mr, vr) = side(k..r1);
            (k, mr - ml, (vl + vr).sqrt())
        })
        .collect();
    let level_median = median(levels.iter().map(|l| l.1.abs()).collect());
    let best_level = levels.iter().copied().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
    let level_hit = best_level.filter(|&(_, d, e)| {
        significance(d, e) > thresholds.level_sigma && d.abs() > thresholds.level_ratio * level_median
    });

    // Interior peak of |dU/dc| of the branch-averaged U: the steepest rise
    // of a continuous transition.
    let u_mean: Vec<f64> = up
        .iter()
        .zip(down)
        .map(|(a, b)| 0.5 * (a.record.u_per_site + b.record.u_per_site))
        .collect();
    let u_err: Vec<f64> = up
        .iter()
        .zip(down)
        .map(|(a, b)| 0.5 * a.record.u_err.hypot(b.record.u_err))
        .collect();
    let slopes: Vec<(f64, f64)> = (0..n.saturating_sub(1))
        .map(|k| {
            let dc = grid[k + 1] - grid[k];
            (
                (u_mean[k + 1] - u_mean[k]).abs() / dc,
                u_err[k].hypot(u_err[k + 1]) / dc,
            )
        })
        .collect();
    let slope_median = median(slopes.iter().map(|s| s.0).collect());
    let steepest = slopes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .map(|(k, &s)| (k, s));
    let u_slope_peak = match steepest {
        Some((_, (s, _))) if slope_median > 0.0 => s / slope_median,
        Some((_, (s, _))) if s > 0.0 => f64::INFINITY,
        _ => 0.0,
    };
    let slope_hit = steepest.filter(|&(k, (s, e))| {
        k > 0
            && k + 2 < n
            && significance(s - slope_median, e) > thresholds.slope_sigma
            && u_slope_peak > thresholds.slope_ratio
    });

    // Break in the slope of U: the order parameter switching on.
    let kink = best_kink(&grid, &u_mean, &u_err);
    let u_kink_chi2_ratio = kink.map_or(0.0, |k| {
        if k.chi2_hinge > 0.0 {
            k.chi2_quad / k.chi2_hinge
        } else {
            f64::INFINITY
        }
    });
    let kink_hit = kink.filter(|k| {
        let (l, r) = (k.left_slope.abs(), k.right_slope.abs());
        k.chi2_quad - k.chi2_hinge > thresholds.kink_chi2_gain
            && u_kink_chi2_ratio > thresholds.kink_chi2_ratio
            && k.left_slope * k.right_slope > 0.0
            && l.max(r) > thresholds.kink_slope_ratio * l.min(r)
    });

    let evidence = TransitionEvidence {
        max_branch_gap,
        hysteresis_loop_area: loop_area,
        c_peak_height: c_mean.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        c_jump: best_level.map_or(0.0, |l| l.1.abs()),
        u_slope_peak,
        u_kink_chi2_ratio,
    };
    let interval_of_level = |k: usize| (grid[k - 1], grid[k]);
    let interval_of_slope = |k: usize| (grid[k], grid[k + 1]);
    // Continuous transitions are located by the steepest rise of U when it
    // stands out, then by a kink of U, then by the change of level of C.
    let second_order_location = slope_hit
        .map(|(k, _)| interval_of_slope(k))
        .or(kink_hit.map(|k| k.interval))
        .or(level_hit.map(|(k, _, _)| interval_of_level(k)));

    let (order, low_confidence, location_interval) = match best_run {
        Some((s, e, _)) if e - s >= thresholds.gap_persistence => {
            (TransitionOrder::First, false, (grid[s], grid[e - 1]))
        }
        _ => {
            if let Some((i, _, _)) = jump {
                (TransitionOrder::First, false, (grid[i], grid[i + 1]))
            } else if let Some((s, _, _)) = best_run {
                let loc = second_order_location.unwrap_or((grid[s.saturating_sub(1)], grid[(s + 1).min(n - 1)]));
                (TransitionOrder::Second, true, loc)
            } else if let Some(loc) = second_order_location {
                (TransitionOrder::Second, false, loc)
            } else {
                let loc = best_level.map_or((grid[0], grid[n - 1]), |(k, _, _)| interval_of_level(k));
                (TransitionOrder::None, false, loc)
            }
        }
    };

    Ok(TransitionReport {
        location_interval,
        order,
        low_confidence,
        evidence,
    })
}

/// C/V peak of one lattice size inside a window of the scan axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakHeight {
    pub l: usize,
    pub at: f64,
    pub height: f64,
    pub err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeTrend {
    Growing,
    Flat,
    Shrinking,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeProbe {
    pub peaks: Vec<PeakHeight>,
    pub trend: SizeTrend,
}

/// Largest branch-averaged C/V with `c` inside `window`.
pub fn c_peak_in_window(l: usize, branches: &ScanBranches, window: (f64, f64)) -> Option<PeakHeight> {
    branches
        .up
        .iter()
        .zip(&branches.down)
        .filter(|(a, _)| a.c >= window.0 - 1e-12 && a.c <= window.1 + 1e-12)
        .map(|(a, b)| PeakHeight {
            l,
            at: a.c,
            height: 0.5 * (a.record.c_per_site + b.record.c_per_site),
            err: 0.5 * a.record.c_err.hypot(b.record.c_err),
        })
        .max_by(|a, b| a.height.total_cmp(&b.height))
}

/// Growing (shrinking) when the peak height increases (decreases) at every
/// size step and the smallest-to-largest change exceeds twice its error.
pub fn size_trend(peaks: &[PeakHeight]) -> SizeTrend {
    let mut sorted = peaks.to_vec();
    sorted.sort_by_key(|p| p.l);
    if sorted.len() < 2 {
        return SizeTrend::Flat;
    }
    let (first, last) = (sorted[0], sorted[sorted.len() - 1]);
    let significant = significance(last.height - first.height, first.err.hypot(last.err)) > 2.0;
    let steps: Vec<f64> = sorted.windows(2).map(|w| w[1].height - w[0].height).collect();
    if significant && steps.iter().all(|&d| d > 0.0) {
        SizeTrend::Growing
    } else if significant && steps.iter().all(|&d| d < 0.0) {
        SizeTrend::Shrinking
    } else {
        SizeTrend::Flat
    }
}

/// Run the same scan at several lattice sizes and compare C/V peak heights
/// inside `window`.
pub fn size_dependence_probe(
    sizes: &[usize],
    preset: ModelPreset,
    schedule: &ScanSchedule,
    window: (f64, f64),
) -> Result<SizeProbe> {
    if sizes.len() < 2 {
        return Err(Error::input("size probe needs at least two lattice sizes"));
    }
    let mut peaks = Vec::with_capacity(sizes.len());
    for &l in sizes {
        let geom = LatticeGeometry::hypercubic(l)?;
        let branches = run_hysteresis_scan(geom, preset, schedule)?;
        let peak =
            c_peak_in_window(l, &branches, window).ok_or_else(|| Error::input("window contains no grid point"))?;
        peaks.push(peak);
    }
    let trend = size_trend(&peaks);
    Ok(SizeProbe { peaks, trend })
}
