//! Momentum bookkeeping and the laboratory-frame elastic two-body solver.
//!
//! Given incoming momenta `p1`, `p2` and a detector direction `u`, the outgoing
//! pair is found by eliminating `p2'` through momentum conservation,
//! `p2' = P - p1'`, and writing `p1' = s u`. Energy conservation then reduces
//! to the quadratic
//!
//! ```text
//! s^2 / (2 mu) - s (P . u) / m2 + P^2 / (2 m2) - E = 0,   1/mu = 1/m1 + 1/m2,
//! ```
//!
//! which is solved in closed form. Only roots with `s > 0` are kept: a root at
//! `s = 0` leaves the constrained particle at rest and does not point along
//! the detector.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScatterError};

/// Tolerance on `|direction| - 1`.
pub const DIRECTION_TOLERANCE: f64 = 1e-12;

/// Outcomes closer than this (relative to the momentum scale) to the incoming
/// configuration are flagged as the forward, no-scattering root.
const FORWARD_TOLERANCE: f64 = 1e-10;

/// A momentum 3-vector in natural units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Momentum3 {
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl Momentum3 {
    pub const ZERO: Momentum3 = Momentum3 { px: 0.0, py: 0.0, pz: 0.0 };

    pub const fn new(px: f64, py: f64, pz: f64) -> Self {
        Momentum3 { px, py, pz }
    }

    /// Checked constructor rejecting NaN and infinite components.
    pub fn try_new(px: f64, py: f64, pz: f64) -> Result<Self> {
        let p = Momentum3::new(px, py, pz);
        if p.is_finite() {
            Ok(p)
        } else {
            Err(ScatterError::domain(format!("non-finite momentum {p:?}")))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.px.is_finite() && self.py.is_finite() && self.pz.is_finite()
    }

    pub fn dot(&self, other: &Momentum3) -> f64 {
        self.px * other.px + self.py * other.py + self.pz * other.pz
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.px, self.py, self.pz]
    }

    /// Unit vector at polar angle `theta` and azimuth `phi` (radians).
    pub fn direction(theta: f64, phi: f64) -> Self {
        Momentum3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
    }
}

impl From<[f64; 3]> for Momentum3 {
    fn from(a: [f64; 3]) -> Self {
        Momentum3::new(a[0], a[1], a[2])
    }
}

impl Add for Momentum3 {
    type Output = Momentum3;
    fn add(self, o: Momentum3) -> Momentum3 {
        Momentum3::new(self.px + o.px, self.py + o.py, self.pz + o.pz)
    }
}

impl AddAssign for Momentum3 {
    fn add_assign(&mut self, o: Momentum3) {
        *self = *self + o;
    }
}

impl Sub for Momentum3 {
    type Output = Momentum3;
    fn sub(self, o: Momentum3) -> Momentum3 {
        Momentum3::new(self.px - o.px, self.py - o.py, self.pz - o.pz)
    }
}

impl Neg for Momentum3 {
    type Output = Momentum3;
    fn neg(self) -> Momentum3 {
        Momentum3::new(-self.px, -self.py, -self.pz)
    }
}

impl Mul<Momentum3> for f64 {
    type Output = Momentum3;
    fn mul(self, p: Momentum3) -> Momentum3 {
        Momentum3::new(self * p.px, self * p.py, self * p.pz)
    }
}

/// A structureless particle: mass and the charge entering coupling products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeParticle {
    mass: f64,
    pub coupling_charge: f64,
}

impl FreeParticle {
    pub fn new(mass: f64, coupling_charge: f64) -> Result<Self> {
        check_mass(mass)?;
        Ok(FreeParticle { mass, coupling_charge })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
}

pub(crate) fn check_mass(m: f64) -> Result<()> {
    if m > 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(ScatterError::domain(format!("mass must be positive and finite, got {m}")))
    }
}

/// `|p|^2 / 2m`.
pub fn kinetic_energy(p: Momentum3, m: f64) -> Result<f64> {
    check_mass(m)?;
    Ok(p.norm_sqr() / (2.0 * m))
}

pub fn momentum_transfer(p: Momentum3, p_prime: Momentum3) -> Momentum3 {
    p - p_prime
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionInput {
    pub particles: [FreeParticle; 2],
    pub momenta_in: [Momentum3; 2],
}

impl CollisionInput {
    pub fn new(particles: [FreeParticle; 2], momenta_in: [Momentum3; 2]) -> Self {
        CollisionInput { particles, momenta_in }
    }

    /// Same collision with the particle labels exchanged.
    pub fn swapped(&self) -> Self {
        CollisionInput {
            particles: [self.particles[1], self.particles[0]],
            momenta_in: [self.momenta_in[1], self.momenta_in[0]],
        }
    }

    pub fn masses(&self) -> [f64; 2] {
        [self.particles[0].mass(), self.particles[1].mass()]
    }
}

/// Which outgoing particle is constrained to travel along the detector direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constrained {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationResidual {
    pub momentum: Momentum3,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionOutcome {
    pub momenta_out: [Momentum3; 2],
    pub conservation_residual: ConservationResidual,
    /// The outgoing momenta reproduce the incoming ones (no-scattering root).
    pub is_forward: bool,
}

impl CollisionOutcome {
    fn swapped(&self) -> Self {
        CollisionOutcome { momenta_out: [self.momenta_out[1], self.momenta_out[0]], ..*self }
    }
}

/// Total momentum and total kinetic energy of the incoming pair.
pub fn total_invariants(inp: &CollisionInput) -> (Momentum3, f64) {
    let [m1, m2] = inp.masses();
    let [p1, p2] = inp.momenta_in;
    (p1 + p2, p1.norm_sqr() / (2.0 * m1) + p2.norm_sqr() / (2.0 * m2))
}

/// All elastic final states with the `which` particle moving along `direction`.
///
/// Returns zero, one or two outcomes, ordered by increasing magnitude of the
/// constrained momentum. The forward root, when present, is included and
/// flagged.
pub fn solve_outgoing(inp: &CollisionInput, direction: Momentum3, which: Constrained) -> Result<Vec<CollisionOutcome>> {
    if !direction.is_finite() || (direction.norm() - 1.0).abs() > DIRECTION_TOLERANCE {
        return Err(ScatterError::domain(format!("direction must be a unit vector, |u| = {}", direction.norm())));
    }
    match which {
        Constrained::First => Ok(solve_first(inp, direction)),
        Constrained::Second => Ok(solve_first(&inp.swapped(), direction).into_iter().map(|o| o.swapped()).collect()),
    }
}

fn solve_first(inp: &CollisionInput, u: Momentum3) -> Vec<CollisionOutcome> {
    let [m1, m2] = inp.masses();
    let (total, energy) = total_invariants(inp);

    let a = (m1 + m2) / (2.0 * m1 * m2);
    let b = -total.dot(&u) / m2;
    let c = total.norm_sqr() / (2.0 * m2) - energy;

    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    // Numerically stable pair of roots.
    let q = -0.5 * (b + b.signum_or_one() * disc.sqrt());
    let mut roots = vec![q / a];
    if q != 0.0 {
        roots.push(c / q);
    }
    roots.retain(|s| *s > 0.0);
    roots.sort_by(|x, y| x.total_cmp(y));
    roots.dedup();

    let scale = inp.momenta_in[0].norm() + inp.momenta_in[1].norm();
    roots
        .into_iter()
        .map(|s| {
            let p1_out = s * u;
            let p2_out = total - p1_out;
            let e_out = p1_out.norm_sqr() / (2.0 * m1) + p2_out.norm_sqr() / (2.0 * m2);
            let is_forward = (p1_out - inp.momenta_in[0]).norm() <= FORWARD_TOLERANCE * scale.max(1.0);
            CollisionOutcome {
                momenta_out: [p1_out, p2_out],
                conservation_residual: ConservationResidual {
                    momentum: (total - p1_out) - p2_out,
                    energy: e_out - energy,
                },
                is_forward,
            }
        })
        .collect()
}

trait SignumOrOne {
    fn signum_or_one(self) -> f64;
}

impl SignumOrOne for f64 {
    fn signum_or_one(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}
