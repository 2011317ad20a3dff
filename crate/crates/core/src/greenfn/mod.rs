//! Free-particle retarded Green's functions.
//!
//! The closed form in three dimensions is
//!
//! ```text
//! g(r, r0; dt) = (m / (2 pi i dt))^{3/2} exp(i m |r - r0|^2 / (2 dt)),
//! ```
//!
//! with the 3/2 power taken on the principal branch, i.e. a constant phase
//! `exp(-3 i pi / 4)` for `dt > 0`. The retarded propagator multiplies this
//! by `theta(t - t0)` with the convention `theta(0) = 0`.
//!
//! [`fft`] rebuilds the same kernel from its momentum-space form on a
//! periodic box, which serves as an independent check of the closed form.

mod fft;
mod field;

pub use fft::{
    fft_oracle_discrepancy, fft_oracle_study, fft_retarded_propagator, propagate_pair, propagate_pair_symmetrized,
    propagate_state, sample_free_propagator, OracleStudyRow,
};
pub use field::{ComplexField, PairField, SpatialGrid, FIELD_MAGIC, FIELD_VERSION, PAIR_MAX_POINTS};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, ScatterError};
use crate::kinematics::check_mass;
use crate::smatrix::FiniteSystem;

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimePoint {
    pub r: Vec3,
    pub t: f64,
}

/// A strictly decreasing sequence of positive regulators standing in for i0+.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSchedule(Vec<f64>);

impl EpsilonSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(ScatterError::domain("epsilon schedule is empty"));
        }
        if values.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(ScatterError::domain("epsilon values must be positive and finite"));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ScatterError::domain("epsilon schedule must be strictly decreasing"));
        }
        Ok(EpsilonSchedule(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule(vec![1e-1, 1e-2, 1e-3])
    }
}

fn dist_sqr(r: &Vec3, r0: &Vec3) -> f64 {
    (0..3).map(|i| (r[i] - r0[i]).powi(2)).sum()
}

/// Closed-form kernel continued to any nonzero `dt`.
///
/// For `dt < 0` the prefactor phase flips to `exp(+3 i pi / 4)`, which makes
/// `analytic_free_propagator(r, r0, dt)^* == analytic_free_propagator(r0, r, -dt)`.
pub fn analytic_free_propagator(r: &Vec3, r0: &Vec3, dt: f64, m: f64) -> Result<Complex64> {
    check_mass(m)?;
    if dt == 0.0 || !dt.is_finite() {
        return Err(ScatterError::domain(format!("time interval must be nonzero, got {dt}")));
    }
    let magnitude = (m / (2.0 * PI * dt.abs())).powf(1.5);
    let phase = -dt.signum() * 0.75 * PI + m * dist_sqr(r, r0) / (2.0 * dt);
    Ok(Complex64::from_polar(magnitude, phase))
}

/// Free propagator for `dt > 0`.
pub fn free_propagator(r: &Vec3, r0: &Vec3, dt: f64, m: f64) -> Result<Complex64> {
    if !(dt > 0.0) {
        return Err(ScatterError::domain(format!(
            "free propagator needs dt > 0, got {dt}; gate on theta(t - t0) first"
        )));
    }
    analytic_free_propagator(r, r0, dt, m)
}

/// `theta(t - t0) g(r, r0; t - t0)` with `theta(0) = 0`.
pub fn retarded_free_propagator(r: &Vec3, r0: &Vec3, t: f64, t0: f64, m: f64) -> Result<Complex64> {
    check_mass(m)?;
    if t <= t0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    free_propagator(r, r0, t - t0, m)
}

/// Product kernel of two distinguishable free particles.
#[allow(clippy::too_many_arguments)]
pub fn pair_propagator(
    r1: &Vec3,
    r1p: &Vec3,
    r2: &Vec3,
    r2p: &Vec3,
    t: f64,
    t0: f64,
    m1: f64,
    m2: f64,
) -> Result<Complex64> {
    let dt = t - t0;
    Ok(free_propagator(r1, r1p, dt, m1)? * free_propagator(r2, r2p, dt, m2)?)
}

/// Direct plus `sign` times exchange kernel for two identical particles.
#[allow(clippy::too_many_arguments)]
pub fn symmetrized_pair_propagator(
    r1: &Vec3,
    r1p: &Vec3,
    r2: &Vec3,
    r2p: &Vec3,
    t: f64,
    t0: f64,
    m: f64,
    sign: f64,
) -> Result<Complex64> {
    check_sign(sign)?;
    let direct = pair_propagator(r1, r1p, r2, r2p, t, t0, m, m)?;
    let exchange = pair_propagator(r1, r2p, r2, r1p, t, t0, m, m)?;
    Ok(direct + sign * exchange)
}

/// Same as [`symmetrized_pair_propagator`] but refuses unequal masses.
#[allow(clippy::too_many_arguments)]
pub fn symmetrized_pair_propagator_checked(
    r1: &Vec3,
    r1p: &Vec3,
    r2: &Vec3,
    r2p: &Vec3,
    t: f64,
    t0: f64,
    masses: [f64; 2],
    sign: f64,
) -> Result<Complex64> {
    if masses[0] != masses[1] {
        return Err(ScatterError::domain(format!(
            "identical particles need equal masses, got {} and {}",
            masses[0], masses[1]
        )));
    }
    symmetrized_pair_propagator(r1, r1p, r2, r2p, t, t0, masses[0], sign)
}

pub(crate) fn check_sign(sign: f64) -> Result<()> {
    if sign == 1.0 || sign == -1.0 {
        Ok(())
    } else {
        Err(ScatterError::domain(format!("exchange sign must be +1 or -1, got {sign}")))
    }
}

/// `exp(-i H0 (t - t0))` for the diagonal `H0` of a finite system.
pub fn spectral_propagator(system: &FiniteSystem, t: f64, t0: f64) -> DMatrix<Complex64> {
    let h0 = system.h0();
    DMatrix::from_fn(h0.len(), h0.len(), |i, j| {
        if i == j {
            Complex64::from_polar(1.0, -h0[i] * (t - t0))
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ORIGIN: Vec3 = [0.0; 3];

    #[test]
    fn coincidence_value() {
        let g = free_propagator(&ORIGIN, &ORIGIN, 1.0, 1.0).unwrap();
        assert_relative_eq!(g.norm(), (2.0 * PI).powf(-1.5), epsilon = 1e-15);
        assert_relative_eq!(g.arg(), -0.75 * PI, epsilon = 1e-14);
        assert_relative_eq!(g.norm(), 0.063494, epsilon = 1e-6);
    }

    #[test]
    fn phase_grows_with_separation() {
        let g = free_propagator(&[2.0, 0.0, 0.0], &ORIGIN, 1.0, 1.0).unwrap();
        assert_relative_eq!(g.norm(), (2.0 * PI).powf(-1.5), epsilon = 1e-15);
        let expected = Complex64::from_polar(1.0, -0.75 * PI + 2.0);
        assert_relative_eq!((g / g.norm() - expected).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn diffusive_rescaling_changes_only_prefactor_norm() {
        // Scaling r by s and dt by s^2 leaves the exponent fixed; the
        // prefactor picks up s^-3.
        let r = [0.3, -0.7, 1.1];
        let r0 = [0.5, 0.2, -0.4];
        let s = 2.0;
        let a = free_propagator(&r, &r0, 0.8, 1.3).unwrap();
        let rs = r.map(|x| x * s);
        let r0s = r0.map(|x| x * s);
        let b = free_propagator(&rs, &r0s, 0.8 * s * s, 1.3).unwrap();
        assert_relative_eq!((a - b * s.powi(3)).norm(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(a.arg(), b.arg(), epsilon = 1e-13);
    }

    #[test]
    fn non_positive_interval_rejected() {
        assert!(free_propagator(&ORIGIN, &ORIGIN, 0.0, 1.0).is_err());
        assert!(free_propagator(&ORIGIN, &ORIGIN, -1.0, 1.0).is_err());
        assert!(free_propagator(&ORIGIN, &ORIGIN, 1.0, 0.0).is_err());
    }

    #[test]
    fn retarded_gate() {
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(retarded_free_propagator(&ORIGIN, &ORIGIN, 0.0, 1.0, 1.0).unwrap(), zero);
        assert_eq!(retarded_free_propagator(&ORIGIN, &ORIGIN, 1.0, 1.0, 1.0).unwrap(), zero);
        assert_eq!(
            retarded_free_propagator(&ORIGIN, &ORIGIN, 2.0, 1.0, 1.0).unwrap(),
            free_propagator(&ORIGIN, &ORIGIN, 1.0, 1.0).unwrap()
        );
    }

    #[test]
    fn conjugation_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let r: Vec3 = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
            let r0: Vec3 = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
            let dt = rng.random_range(0.1..4.0);
            let m = rng.random_range(0.2..5.0);
            let forward = analytic_free_propagator(&r, &r0, dt, m).unwrap();
            let backward = analytic_free_propagator(&r0, &r, -dt, m).unwrap();
            assert_relative_eq!((forward.conj() - backward).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn pair_kernel_is_a_product() {
        let g = free_propagator(&ORIGIN, &ORIGIN, 1.0, 1.0).unwrap();
        let pair = pair_propagator(&ORIGIN, &ORIGIN, &ORIGIN, &ORIGIN, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!((pair - g * g).norm(), 0.0, epsilon = 1e-16);
        let expected = Complex64::from_polar((2.0 * PI).powi(-3), -1.5 * PI);
        assert_relative_eq!((pair - expected).norm(), 0.0, epsilon = 1e-16);

        let (a, b, c, d) = ([0.1, 0.2, 0.3], [1.0, -1.0, 0.5], [0.0, 2.0, 0.0], [0.4, 0.4, -0.4]);
        let p = pair_propagator(&a, &b, &c, &d, 1.5, 0.5, 1.0, 2.5).unwrap();
        let swapped = pair_propagator(&c, &d, &a, &b, 1.5, 0.5, 2.5, 1.0).unwrap();
        let factors = free_propagator(&a, &b, 1.0, 1.0).unwrap() * free_propagator(&c, &d, 1.0, 2.5).unwrap();
        assert_eq!(p, swapped);
        assert_eq!(p, factors);
    }

    #[test]
    fn symmetrized_kernel() {
        let (r1, r2, rp) = ([0.1, 0.2, 0.3], [1.0, -1.0, 0.5], [0.4, 0.4, -0.4]);
        let fermi = symmetrized_pair_propagator(&r1, &rp, &r2, &rp, 1.0, 0.0, 1.0, -1.0).unwrap();
        assert_eq!(fermi, Complex64::new(0.0, 0.0));

        let bose = symmetrized_pair_propagator(&r1, &rp, &r2, &rp, 1.0, 0.0, 1.0, 1.0).unwrap();
        let direct = pair_propagator(&r1, &rp, &r2, &rp, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!((bose - 2.0 * direct).norm(), 0.0, epsilon = 1e-16);

        let r1p = [0.9, 0.0, -0.2];
        let a = symmetrized_pair_propagator(&r1, &r1p, &r2, &rp, 1.0, 0.0, 1.0, 1.0).unwrap();
        let b = symmetrized_pair_propagator(&r1, &rp, &r2, &r1p, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!((a - b).norm(), 0.0, epsilon = 1e-16);

        assert!(symmetrized_pair_propagator(&r1, &rp, &r2, &rp, 1.0, 0.0, 1.0, 0.5).is_err());
        assert!(symmetrized_pair_propagator_checked(&r1, &rp, &r2, &rp, 1.0, 0.0, [1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn spectral_propagator_examples() {
        let sys = FiniteSystem::free(vec![0.0, 1.0]).unwrap();
        let id = spectral_propagator(&sys, 3.0, 3.0);
        assert_eq!(id, DMatrix::identity(2, 2));

        let g = spectral_propagator(&sys, PI, 0.0);
        assert_relative_eq!((g[(0, 0)] - Complex64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!((g[(1, 1)] - Complex64::new(-1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h0: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
        let g = spectral_propagator(&FiniteSystem::free(h0).unwrap(), 1.7, -0.4);
        let defect = (&g * g.adjoint() - DMatrix::identity(6, 6)).norm();
        assert!(defect < 1e-14);
    }

    #[test]
    fn epsilon_schedule_validation() {
        assert!(EpsilonSchedule::new(vec![0.1, 0.01]).is_ok());
        assert!(EpsilonSchedule::new(vec![0.1, 0.1]).is_err());
        assert!(EpsilonSchedule::new(vec![0.01, 0.1]).is_err());
        assert!(EpsilonSchedule::new(vec![0.1, -0.01]).is_err());
        assert!(EpsilonSchedule::new(vec![]).is_err());
    }
}
