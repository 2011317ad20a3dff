//! Potentials, box-normalized momentum grids and the Born series.
//!
//! Plane waves live in a periodic box of side `L`, so momenta sit on the
//! lattice `2 pi j / L`. A continuum delta `delta(p - p')` becomes
//! `(L / 2 pi)^3` times a Kronecker delta, and the box matrix element of a
//! local potential is `V~(p - p') / L^3`.

mod dyson;
mod engine;
mod tmatrix;

pub use dyson::{dyson_matrix, dyson_term, DEFAULT_QUADRATURE_POINTS, MAX_DYSON_ORDER};
pub use engine::{box_element, BornElement};
pub use tmatrix::{potential_matrix, t_matrix, TMatrix, BORN_TOLERANCE};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, ScatterError};
use crate::kinematics::Momentum3;
use crate::smatrix::hermitian_defect;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Coulomb,
    Yukawa {
        mu: f64,
    },
    Gaussian {
        width: f64,
    },
    /// Box matrix elements supplied directly, indexed like the grid.
    Matrix(DMatrix<Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    alpha: f64,
}

impl Potential {
    pub fn coulomb(alpha: f64) -> Result<Self> {
        Self::checked(PotentialKind::Coulomb, alpha)
    }

    pub fn yukawa(alpha: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(ScatterError::domain(format!(
                "yukawa screening must be positive, got {mu}; use coulomb for mu = 0"
            )));
        }
        Self::checked(PotentialKind::Yukawa { mu }, alpha)
    }

    pub fn gaussian(alpha: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(ScatterError::domain(format!("gaussian width must be positive, got {width}")));
        }
        Self::checked(PotentialKind::Gaussian { width }, alpha)
    }

    /// Hermitian matrix of box elements; `alpha` is fixed to 1.
    pub fn matrix(values: DMatrix<Complex64>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(ScatterError::domain("potential matrix must be square"));
        }
        let defect = hermitian_defect(&values);
        if defect > 1e-12 {
            return Err(ScatterError::domain(format!("potential matrix is not Hermitian (defect {defect:e})")));
        }
        Ok(Potential { kind: PotentialKind::Matrix(values), alpha: 1.0 })
    }

    fn checked(kind: PotentialKind, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(ScatterError::domain("coupling must be finite"));
        }
        Ok(Potential { kind, alpha })
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Same shape, coupling multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match &self.kind {
            PotentialKind::Matrix(m) => Potential { kind: PotentialKind::Matrix(m.scale(factor)), alpha: 1.0 },
            kind => Potential { kind: kind.clone(), alpha: self.alpha * factor },
        }
    }

    /// Whether `V(r)` (or the supplied matrix) is real.
    pub fn is_real(&self) -> bool {
        match &self.kind {
            PotentialKind::Matrix(m) => m.iter().all(|v| v.im == 0.0),
            _ => true,
        }
    }

    pub fn is_coulomb(&self) -> bool {
        matches!(self.kind, PotentialKind::Coulomb)
    }

    /// `V~` as a function of `|q|^2`, for the analytic kinds.
    pub(crate) fn transform_q2(&self, q2: f64) -> f64 {
        match self.kind {
            PotentialKind::Coulomb => 4.0 * PI * self.alpha / q2,
            PotentialKind::Yukawa { mu } => 4.0 * PI * self.alpha / (q2 + mu * mu),
            PotentialKind::Gaussian { width } => {
                self.alpha * (2.0 * PI).powf(1.5) * width.powi(3) * (-0.5 * q2 * width * width).exp()
            }
            PotentialKind::Matrix(_) => unreachable!("matrix potentials have no transform"),
        }
    }
}

/// `V~(q) = integral of exp(-i q.r) V(r) d^3r`.
pub fn fourier_potential(pot: &Potential, q: Momentum3) -> Result<Complex64> {
    if matches!(pot.kind, PotentialKind::Matrix(_)) {
        return Err(ScatterError::domain("matrix potentials have no Fourier transform"));
    }
    let q2 = q.norm_sqr();
    if pot.is_coulomb() && q2 == 0.0 {
        return Err(ScatterError::ForwardSingularity);
    }
    Ok(Complex64::new(pot.transform_q2(q2), 0.0))
}

/// First-order continuum amplitude `(2 pi)^-3 V~(p - p')`.
pub fn born1_single(p: Momentum3, p_prime: Momentum3, pot: &Potential) -> Result<Complex64> {
    Ok(fourier_potential(pot, p - p_prime)? / (2.0 * PI).powi(3))
}

/// First-order pair amplitude: zero off the conserving shell, otherwise
/// `(L / 2 pi)^3 (2 pi)^-3 V~(p1 - p1')`.
pub fn born1_pair(
    p1: Momentum3,
    p2: Momentum3,
    p1p: Momentum3,
    p2p: Momentum3,
    pot: &Potential,
    grid: &MomentumGrid,
) -> Result<Complex64> {
    let [a, b, c, d] = [p1, p2, p1p, p2p].map(|p| grid.require_lattice(p));
    let (a, b, c, d) = (a?, b?, c?, d?);
    if (0..3).any(|i| a[i] + b[i] != c[i] + d[i]) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let q = grid.lattice_momentum(&[a[0] - c[0], a[1] - c[1], a[2] - c[2]]);
    Ok(fourier_potential(pot, q)? * grid.delta_weight() / (2.0 * PI).powi(3))
}

/// Centred cube of lattice momenta `2 pi j / L`,
/// `j = -floor(n/2) ..= n - 1 - floor(n/2)` on each axis, z fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumGrid {
    side: f64,
    n_points: usize,
}

impl MomentumGrid {
    pub fn new(side: f64, n_points: usize) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(ScatterError::domain(format!("box side must be positive, got {side}")));
        }
        if n_points == 0 {
            return Err(ScatterError::domain("n_points must be positive"));
        }
        Ok(MomentumGrid { side, n_points })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn len(&self) -> usize {
        self.n_points.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice spacing `2 pi / L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.side
    }

    /// `(2 pi / L)^3`, the momentum-space volume per lattice point.
    pub fn weight(&self) -> f64 {
        self.dk().powi(3)
    }

    /// `(L / 2 pi)^3`, the value of `delta(0)` in the box.
    pub fn delta_weight(&self) -> f64 {
        self.weight().recip()
    }

    /// Box volume `L^3`.
    pub fn volume(&self) -> f64 {
        self.side.powi(3)
    }

    /// Smallest nonzero kinetic energy on the lattice.
    pub fn energy_spacing(&self, mass: f64) -> f64 {
        self.dk().powi(2) / (2.0 * mass)
    }

    /// `max(0.05 E, 5 * energy_spacing)`.
    pub fn default_epsilon(&self, energy: f64, mass: f64) -> f64 {
        (0.05 * energy).max(5.0 * self.energy_spacing(mass))
    }

    fn lo(&self) -> i64 {
        -((self.n_points / 2) as i64)
    }

    fn hi(&self) -> i64 {
        self.lo() + self.n_points as i64 - 1
    }

    pub fn coords(&self, idx: usize) -> [i64; 3] {
        let n = self.n_points;
        let lo = self.lo();
        [(idx / (n * n)) as i64 + lo, ((idx / n) % n) as i64 + lo, (idx % n) as i64 + lo]
    }

    pub fn index_of_coords(&self, c: &[i64; 3]) -> Option<usize> {
        let (lo, hi) = (self.lo(), self.hi());
        if c.iter().any(|&j| j < lo || j > hi) {
            return None;
        }
        let n = self.n_points as i64;
        Some((((c[0] - lo) * n + (c[1] - lo)) * n + (c[2] - lo)) as usize)
    }

    pub fn lattice_momentum(&self, c: &[i64; 3]) -> Momentum3 {
        let dk = self.dk();
        Momentum3::new(dk * c[0] as f64, dk * c[1] as f64, dk * c[2] as f64)
    }

    pub fn momentum(&self, idx: usize) -> Momentum3 {
        self.lattice_momentum(&self.coords(idx))
    }

    pub fn momenta(&self) -> Vec<Momentum3> {
        (0..self.len()).map(|i| self.momentum(i)).collect()
    }

    /// Integer coordinates of `p` if it is a lattice point (tolerance 1e-9
    /// in lattice units), in range or not.
    pub fn lattice_coords(&self, p: Momentum3) -> Option<[i64; 3]> {
        let dk = self.dk();
        let mut out = [0i64; 3];
        for (o, x) in out.iter_mut().zip(p.to_array()) {
            let r = x / dk;
            let j = r.round();
            if (r - j).abs() > 1e-9 {
                return None;
            }
            *o = j as i64;
        }
        Some(out)
    }

    pub fn index_of(&self, p: Momentum3) -> Option<usize> {
        self.lattice_coords(p).and_then(|c| self.index_of_coords(&c))
    }

    pub(crate) fn require_lattice(&self, p: Momentum3) -> Result<[i64; 3]> {
        self.lattice_coords(p)
            .filter(|c| self.index_of_coords(c).is_some())
            .ok_or_else(|| ScatterError::domain(format!("momentum {p:?} is not a point of the grid")))
    }

    /// Closest in-range lattice point and its distance from `p`.
    pub fn nearest(&self, p: Momentum3) -> (usize, f64) {
        let dk = self.dk();
        let (lo, hi) = (self.lo(), self.hi());
        let c = p.to_array().map(|x| ((x / dk).round() as i64).clamp(lo, hi));
        let idx = self.index_of_coords(&c).expect("clamped coordinates are in range");
        (idx, (self.lattice_momentum(&c) - p).norm())
    }
}
