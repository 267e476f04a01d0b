//! Periodic 4D hypercubic lattice geometry.
//!
//! Directions are indexed `0..4`; direction `3` is the imaginary-time axis
//! (written as the fourth direction, "4", in the usual physics notation).
//! Sites are laid out lexicographically with `x[0]` running fastest, so the
//! site index is `x0 + L0*(x1 + L1*(x2 + L2*x3))`. Links are indexed
//! direction-major: `dir * V + site`.

use crate::error::{Error, Result};

/// Number of space-time dimensions.
pub const NDIM: usize = 4;

/// The imaginary-time direction.
pub const TIME: usize = 3;

/// Number of `(mu, nu)` plane pairs with `mu < nu` in four dimensions.
pub const NPLANES: usize = 6;

/// Sign of a unit step along a direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Forward,
    Backward,
}

/// An oriented coordinate plane `(mu, nu)` with `mu < nu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlanePair {
    pub mu: usize,
    pub nu: usize,
}

impl PlanePair {
    /// All six plane pairs, in the order used for coupling tables:
    /// (0,1) (0,2) (0,3) (1,2) (1,3) (2,3).
    pub const ALL: [PlanePair; NPLANES] = [
        PlanePair { mu: 0, nu: 1 },
        PlanePair { mu: 0, nu: 2 },
        PlanePair { mu: 0, nu: 3 },
        PlanePair { mu: 1, nu: 2 },
        PlanePair { mu: 1, nu: 3 },
        PlanePair { mu: 2, nu: 3 },
    ];

    pub fn new(mu: usize, nu: usize) -> Result<Self> {
        if mu < nu && nu < NDIM {
            Ok(PlanePair { mu, nu })
        } else {
            Err(Error::input(format!(
                "plane pair needs 0 <= mu < nu < {NDIM}, got ({mu}, {nu})"
            )))
        }
    }

    /// Position of this pair in [`PlanePair::ALL`].
    pub fn index(self) -> usize {
        match (self.mu, self.nu) {
            (0, 1) => 0,
            (0, 2) => 1,
            (0, 3) => 2,
            (1, 2) => 3,
            (1, 3) => 4,
            (2, 3) => 5,
            _ => unreachable!("PlanePair invariant violated"),
        }
    }

    /// True for the space-time planes `(i, 4)`.
    pub fn is_temporal(self) -> bool {
        self.nu == TIME
    }

    pub fn contains(self, dir: usize) -> bool {
        self.mu == dir || self.nu == dir
    }
}

/// Periodic hypercubic lattice with (possibly unequal) extents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeGeometry {
    extents: [usize; NDIM],
    strides: [usize; NDIM],
    volume: usize,
}

impl LatticeGeometry {
    pub fn new(extents: [usize; NDIM]) -> Result<Self> {
        if let Some(bad) = extents.iter().find(|&&l| l < 2) {
            return Err(Error::input(format!("every lattice extent must be >= 2, got {bad}")));
        }
        let mut strides = [1; NDIM];
        for d in 1..NDIM {
            strides[d] = strides[d - 1] * extents[d - 1];
        }
        let volume = strides[NDIM - 1] * extents[NDIM - 1];
        if u32::try_from(volume * NDIM).is_err() {
            return Err(Error::input(format!("lattice volume {volume} too large")));
        }
        Ok(LatticeGeometry {
            extents,
            strides,
            volume,
        })
    }

    /// `L^4` lattice.
    pub fn hypercubic(l: usize) -> Result<Self> {
        Self::new([l; NDIM])
    }

    pub fn extents(&self) -> [usize; NDIM] {
        self.extents
    }

    pub fn volume(&self) -> usize {
        self.volume
    }

    pub fn link_count(&self) -> usize {
        NDIM * self.volume
    }

    pub fn plaquette_count(&self) -> usize {
        NPLANES * self.volume
    }

    /// Number of L-shaped terms: four per plane pair per site.
    pub fn l_term_count(&self) -> usize {
        4 * NPLANES * self.volume
    }

    pub fn site_index(&self, coords: [usize; NDIM]) -> Result<usize> {
        let mut idx = 0;
        for (d, (&x, &n)) in coords.iter().zip(&self.extents).enumerate() {
            if x >= n {
                return Err(Error::input(format!("coordinate {d} = {x} outside [0, {n})")));
            }
            idx += x * self.strides[d];
        }
        Ok(idx)
    }

    pub fn coords(&self, site: usize) -> [usize; NDIM] {
        debug_assert!(site < self.volume);
        std::array::from_fn(|d| (site / self.strides[d]) % self.extents[d])
    }

    /// Index of `site ± dir` with periodic wrap.
    pub fn neighbor(&self, site: usize, dir: usize, step: Step) -> usize {
        let l = self.extents[dir];
        let x = (site / self.strides[dir]) % l;
        let base = site - x * self.strides[dir];
        let y = match step {
            Step::Forward => (x + 1) % l,
            Step::Backward => (x + l - 1) % l,
        };
        base + y * self.strides[dir]
    }

    /// Index of `site + disp` with periodic wrap; `disp` may have any sign.
    pub fn shift(&self, site: usize, disp: [i32; NDIM]) -> usize {
        let mut c = self.coords(site);
        for d in 0..NDIM {
            let l = self.extents[d] as i64;
            c[d] = (c[d] as i64 + disp[d] as i64).rem_euclid(l) as usize;
        }
        c.iter().zip(self.strides).map(|(x, s)| x * s).sum()
    }

    pub fn link_index(&self, site: usize, dir: usize) -> usize {
        dir * self.volume + site
    }

    /// Inverse of [`link_index`](Self::link_index): `(site, dir)`.
    pub fn link_site_dir(&self, link: usize) -> (usize, usize) {
        (link % self.volume, link / self.volume)
    }

    pub fn sites(&self) -> std::ops::Range<usize> {
        0..self.volume
    }
}

/// Unit displacement along `dir`.
pub fn unit(dir: usize) -> [i32; NDIM] {
    let mut v = [0; NDIM];
    v[dir] = 1;
    v
}
