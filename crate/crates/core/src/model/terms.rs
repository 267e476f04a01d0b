//! Table of cosine terms making up the gauge-Higgs action.
//!
//! Every term in the action has the form `coef * cos(sum_k s_k * a_k)` where
//! each `a_k` is a link angle or a Higgs phase at some displacement from the
//! term's base site and `s_k = ±1`. The table below is the single place where
//! the action is written down; local update neighborhoods ("staples") are
//! derived from it mechanically.

use crate::lattice::{unit, PlanePair, NDIM, NPLANES};

use super::Couplings;

/// Which variable a factor refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Var {
    Link(usize),
    Site,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Factor {
    pub disp: [i32; NDIM],
    pub var: Var,
    pub sign: i8,
}

/// Which coupling multiplies a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    Hopping(usize),
    Plaquette(usize),
    LShape(usize),
}

impl Slot {
    pub fn coefficient(self, c: &Couplings) -> f64 {
        match self {
            Slot::Hopping(mu) => c.c1[mu],
            Slot::Plaquette(p) => c.c2[p],
            Slot::LShape(p) => c.c3[p],
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct TermShape {
    pub slot: Slot,
    pub factors: Vec<Factor>,
}

fn add(a: [i32; NDIM], b: [i32; NDIM]) -> [i32; NDIM] {
    let mut r = a;
    for d in 0..NDIM {
        r[d] += b[d];
    }
    r
}

fn f(disp: [i32; NDIM], var: Var, sign: i8) -> Factor {
    Factor { disp, var, sign }
}

/// All term shapes attached to one base site `x`: 4 hopping terms,
/// 6 plaquettes and 24 L-shaped terms.
pub(crate) fn term_shapes() -> Vec<TermShape> {
    use Var::{Link, Site};
    let zero = [0; NDIM];
    let mut shapes = Vec::with_capacity(NDIM + 5 * NPLANES);

    // cos(phi_x + theta_{x,mu} - phi_{x+mu})
    for mu in 0..NDIM {
        shapes.push(TermShape {
            slot: Slot::Hopping(mu),
            factors: vec![f(zero, Site, 1), f(zero, Link(mu), 1), f(unit(mu), Site, -1)],
        });
    }

    // theta_{x,mu,nu} = theta_{x+mu,nu} - theta_{x,nu} - theta_{x+nu,mu} + theta_{x,mu}
    for p in PlanePair::ALL {
        let (mu, nu) = (p.mu, p.nu);
        shapes.push(TermShape {
            slot: Slot::Plaquette(p.index()),
            factors: vec![
                f(unit(mu), Link(nu), 1),
                f(zero, Link(nu), -1),
                f(unit(nu), Link(mu), -1),
                f(zero, Link(mu), 1),
            ],
        });
    }

    for p in PlanePair::ALL {
        let (mu, nu) = (p.mu, p.nu);
        let (em, en) = (unit(mu), unit(nu));
        let emn = add(em, en);
        let slot = Slot::LShape(p.index());
        let l_terms = [
            // phi_{x+nu} + theta_{x,mu} - theta_{x,nu} - phi_{x+mu}
            vec![
                f(en, Site, 1),
                f(zero, Link(mu), 1),
                f(zero, Link(nu), -1),
                f(em, Site, -1),
            ],
            // phi_x + theta_{x,mu} + theta_{x+mu,nu} - phi_{x+mu+nu}
            vec![
                f(zero, Site, 1),
                f(zero, Link(mu), 1),
                f(em, Link(nu), 1),
                f(emn, Site, -1),
            ],
            // phi_{x+mu} + theta_{x+mu,nu} - theta_{x+nu,mu} - phi_{x+nu}
            vec![f(em, Site, 1), f(em, Link(nu), 1), f(en, Link(mu), -1), f(en, Site, -1)],
            // phi_x + theta_{x,nu} + theta_{x+nu,mu} - phi_{x+nu+mu}
            vec![
                f(zero, Site, 1),
                f(zero, Link(nu), 1),
                f(en, Link(mu), 1),
                f(emn, Site, -1),
            ],
        ];
        for factors in l_terms {
            shapes.push(TermShape { slot, factors });
        }
    }
    shapes
}

/// A term seen from one of its variables: the variable enters with
/// `self_sign`, and `others` are displaced relative to that variable's site.
#[derive(Debug, Clone)]
pub(crate) struct Staple {
    pub slot: Slot,
    pub self_sign: i8,
    pub others: Vec<Factor>,
}

/// Every term containing the variable class `target` (a link of a given
/// direction, or a site), re-based at the variable's own site.
pub(crate) fn staples_for(target: Var) -> Vec<Staple> {
    let mut out = Vec::new();
    for shape in term_shapes() {
        for (k, fac) in shape.factors.iter().enumerate() {
            if fac.var != target {
                continue;
            }
            let others = shape
                .factors
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, o)| {
                    let mut disp = o.disp;
                    for (x, f) in disp.iter_mut().zip(fac.disp) {
                        *x -= f;
                    }
                    Factor { disp, ..*o }
                })
                .collect();
            out.push(Staple {
                slot: shape.slot,
                self_sign: fac.sign,
                others,
            });
        }
    }
    out
}
