//! Internal energy and specific heat from action time series.

use crate::error::{Error, Result};
use crate::lattice::{PlanePair, Step, NDIM};
use crate::model::{plaquette_angle, FieldConfiguration};

/// `U/V = <A>/V` and `C/V = (<A²> - <A>²)/V` with errors from the spread over bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub u_per_site: f64,
    pub u_err: f64,
    pub c_per_site: f64,
    pub c_err: f64,
    pub bins: usize,
    pub sample_count: usize,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Split `samples` into `bins` equal consecutive blocks (excess samples at the
/// end are dropped), compute U and C inside each block, and report the mean
/// over blocks with the standard deviation over blocks as the error.
pub fn estimate_uc(samples: &[f64], bins: usize, volume: usize) -> Result<MeasurementRecord> {
    if samples.is_empty() {
        return Err(Error::input("empty action series"));
    }
    if bins < 2 {
        return Err(Error::input("need at least 2 bins"));
    }
    if volume == 0 {
        return Err(Error::input("volume must be positive"));
    }
    let per_bin = samples.len() / bins;
    if per_bin == 0 {
        return Err(Error::input(format!(
            "{} samples cannot fill {bins} bins",
            samples.len()
        )));
    }
    let v = volume as f64;
    let (us, cs): (Vec<f64>, Vec<f64>) = samples
        .chunks_exact(per_bin)
        .take(bins)
        .map(|block| {
            // Shift by the first sample to keep the variance well conditioned.
            let shift = block[0];
            let n = block.len() as f64;
            let m1 = block.iter().map(|a| a - shift).sum::<f64>() / n;
            let m2 = block.iter().map(|a| (a - shift) * (a - shift)).sum::<f64>() / n;
            let var = (m2 - m1 * m1).max(0.0);
            ((m1 + shift) / v, var / v)
        })
        .unzip();
    Ok(MeasurementRecord {
        u_per_site: mean(&us),
        u_err: std_dev(&us),
        c_per_site: mean(&cs),
        c_err: std_dev(&cs),
        bins,
        sample_count: per_bin * bins,
    })
}

/// Average of `cos θ_p` over all plaquettes of one configuration.
pub fn mean_plaquette(cfg: &FieldConfiguration) -> f64 {
    let g = cfg.geometry();
    let sum: f64 = g
        .sites()
        .flat_map(|x| PlanePair::ALL.iter().map(move |&p| (x, p)))
        .map(|(x, p)| plaquette_angle(cfg, x, p).cos())
        .sum();
    sum / g.plaquette_count() as f64
}

/// Average of the gauge-invariant hopping `cos(φ_x + θ_xμ − φ_{x+μ})` over
/// all links of one configuration.
pub fn mean_hopping(cfg: &FieldConfiguration) -> f64 {
    let g = cfg.geometry();
    let mut sum = 0.0;
    for x in g.sites() {
        for mu in 0..NDIM {
            let y = g.neighbor(x, mu, Step::Forward);
            sum += (cfg.site_angle(x) + cfg.link_angle(x, mu) - cfg.site_angle(y)).cos();
        }
    }
    sum / g.link_count() as f64
}

/// Fixed-width histogram of action values.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// Lower edge of bin 0.
    pub origin: f64,
    pub bin_width: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.bin_width
    }

    /// Bins whose count exceeds every count within `radius` bins on both
    /// sides (ties to the left resolved in favour of the leftmost bin).
    pub fn local_maxima(&self, radius: usize) -> Vec<usize> {
        let n = self.counts.len();
        (0..n)
            .filter(|&i| {
                let c = self.counts[i];
                if c == 0 {
                    return false;
                }
                let lo = i.saturating_sub(radius);
                let hi = (i + radius).min(n - 1);
                (lo..i).all(|j| self.counts[j] < c) && (i + 1..=hi).all(|j| self.counts[j] <= c)
            })
            .collect()
    }
}

pub fn action_histogram(samples: &[f64], bin_width: f64) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::input("empty action series"));
    }
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::input(format!("bin width must be positive, got {bin_width}")));
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let origin = (lo / bin_width).floor() * bin_width;
    let n = (((hi - origin) / bin_width).floor() as usize) + 1;
    let mut counts = vec![0; n];
    for &a in samples {
        let i = (((a - origin) / bin_width).floor() as usize).min(n - 1);
        counts[i] += 1;
    }
    Ok(Histogram {
        origin,
        bin_width,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_series() {
        let r = estimate_uc(&[5.0; 100], 10, 1).unwrap();
        assert_eq!(r.u_per_site, 5.0);
        assert_eq!(r.c_per_site, 0.0);
        assert_eq!(r.u_err, 0.0);
        assert_eq!(r.c_err, 0.0);
        assert_eq!(r.sample_count, 100);
    }

    #[test]
    fn two_point_distribution() {
        let s: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 0.0 } else { 2.0 }).collect();
        let r = estimate_uc(&s, 10, 1).unwrap();
        assert!((r.u_per_site - 1.0).abs() < 1e-12);
        assert!((r.c_per_site - 1.0).abs() < 1e-12);
    }

    #[test]
    fn volume_scaling_and_truncation() {
        let s: Vec<f64> = (0..103).map(|i| (i % 4) as f64 * 3.0).collect();
        let r = estimate_uc(&s, 10, 3).unwrap();
        assert_eq!(r.sample_count, 100);
        let r1 = estimate_uc(&s[..100], 10, 1).unwrap();
        assert!((r.u_per_site * 3.0 - r1.u_per_site).abs() < 1e-12);
        assert!((r.c_per_site * 3.0 - r1.c_per_site).abs() < 1e-12);
    }

    #[test]
    fn input_errors() {
        assert!(estimate_uc(&[], 10, 1).is_err());
        assert!(estimate_uc(&[1.0, 2.0], 1, 1).is_err());
        assert!(estimate_uc(&[1.0, 2.0], 3, 1).is_err());
        assert!(action_histogram(&[], 1.0).is_err());
        assert!(action_histogram(&[1.0], 0.0).is_err());
        assert!(action_histogram(&[1.0], -1.0).is_err());
    }

    #[test]
    fn component_averages() {
        use crate::lattice::LatticeGeometry;
        use crate::model::{gauge_transform, Sector};
        let geom = LatticeGeometry::hypercubic(3).unwrap();
        let cold = FieldConfiguration::cold(geom, Sector::Higgs);
        assert_eq!(mean_plaquette(&cold), 1.0);
        assert_eq!(mean_hopping(&cold), 1.0);
        let lambda: Vec<f64> = (0..geom.volume()).map(|i| 0.37 * i as f64).collect();
        let g = gauge_transform(&cold, &lambda).unwrap();
        assert!((mean_plaquette(&g) - 1.0).abs() < 1e-12);
        assert!((mean_hopping(&g) - 1.0).abs() < 1e-12);
        let mut one = FieldConfiguration::cold(geom, Sector::Unitary);
        one.set_link_angle(0, 2, std::f64::consts::PI);
        let links = geom.link_count() as f64;
        assert!((mean_hopping(&one) - (links - 2.0) / links).abs() < 1e-12);
        // A flipped link sits in 6 plaquettes.
        let plaqs = geom.plaquette_count() as f64;
        assert!((mean_plaquette(&one) - (plaqs - 12.0) / plaqs).abs() < 1e-12);
    }

    #[test]
    fn histogram_basics() {
        let h = action_histogram(&[3.3; 17], 0.5).unwrap();
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.total(), 17);
    }

    #[test]
    fn bimodal_mixture_has_two_peaks() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut gauss = |m: f64, s: f64| {
            // Box-Muller
            let (u1, u2): (f64, f64) = (rng.gen::<f64>().max(1e-300), rng.gen());
            m + s * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        };
        let mut s: Vec<f64> = (0..20000).map(|_| gauss(-3.0, 0.6)).collect();
        s.extend((0..20000).map(|_| gauss(3.0, 0.6)));
        let h = action_histogram(&s, 0.25).unwrap();
        let peaks = h.local_maxima(6);
        assert_eq!(peaks.len(), 2, "{peaks:?}");
        assert!((h.bin_center(peaks[0]) + 3.0).abs() < 0.5);
        assert!((h.bin_center(peaks[1]) - 3.0).abs() < 0.5);

        let single: Vec<f64> = (0..40000).map(|_| gauss(0.0, 1.0)).collect();
        let h = action_histogram(&single, 0.25).unwrap();
        assert_eq!(h.local_maxima(6).len(), 1);
    }

    proptest! {
        #[test]
        fn per_bin_variance_nonnegative(
            xs in prop::collection::vec(-1e3f64..1e3, 20..200),
            bins in 2usize..6,
        ) {
            let r = estimate_uc(&xs, bins, 7).unwrap();
            prop_assert!(r.c_per_site >= 0.0);
            prop_assert!(r.u_err >= 0.0 && r.c_err >= 0.0);
        }

        #[test]
        fn permutation_within_bins(
            xs in prop::collection::vec(-50f64..50.0, 40),
            rot in 1usize..10,
        ) {
            let mut ys = xs.clone();
            for block in ys.chunks_mut(10) {
                block.rotate_left(rot);
                block.reverse();
            }
            let a = estimate_uc(&xs, 4, 1).unwrap();
            let b = estimate_uc(&ys, 4, 1).unwrap();
            prop_assert!((a.u_per_site - b.u_per_site).abs() < 1e-9);
            prop_assert!((a.c_per_site - b.c_per_site).abs() < 1e-7);
        }

        #[test]
        fn histogram_conserves_counts(
            xs in prop::collection::vec(-1e4f64..1e4, 1..300),
            w in 0.01f64..100.0,
        ) {
            let h = action_histogram(&xs, w).unwrap();
            prop_assert_eq!(h.total(), xs.len());
        }
    }
}
