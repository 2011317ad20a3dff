use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use super::field::{ComplexField, PairField, SpatialGrid};
use super::{analytic_free_propagator, check_sign, EpsilonSchedule};
use crate::error::{Result, ScatterError};
use crate::kinematics::check_mass;

/// In-place unnormalized FFT over every axis of a `rank`-dimensional cube
/// with `n` points per axis.
fn fft_cube(data: &mut [Complex64], n: usize, rank: usize, direction: FftDirection) {
    let fft = FftPlanner::new().plan_fft(n, direction);
    for axis in 0..rank {
        let stride = n.pow((rank - 1 - axis) as u32);
        let block = stride * n;
        data.par_chunks_mut(block).for_each(|chunk| {
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            for offset in 0..stride {
                for (k, v) in line.iter_mut().enumerate() {
                    *v = chunk[offset + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    chunk[offset + k * stride] = *v;
                }
            }
        });
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() {
        Ok(())
    } else {
        Err(ScatterError::domain(format!("time step must be finite, got {dt}")))
    }
}

/// Retarded kernel `g^R(x; dt)` on the grid, built from its reciprocal-space
/// form `exp(-i k^2 dt / 2m) exp(-eps dt)` by an inverse FFT.
///
/// Entry `j` holds the kernel at displacement `grid.position(j)`.
pub fn fft_retarded_propagator(grid: &SpatialGrid, m: f64, dt: f64, eps: f64) -> Result<ComplexField> {
    check_mass(m)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(ScatterError::domain(format!("dt must be positive, got {dt}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(ScatterError::domain(format!("epsilon must be positive, got {eps}")));
    }
    let damping = (-eps * dt).exp();
    // The grid is centred, so x_j = (j - n/2) h and each axis contributes (-1)^m.
    let mut data: Vec<Complex64> = (0..grid.len())
        .map(|idx| {
            let ms = grid.unflatten(idx);
            let k = ms.map(|j| grid.wavenumber(j));
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let sign = if ms.iter().sum::<usize>() % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::from_polar(sign * damping, -k2 * dt / (2.0 * m))
        })
        .collect();
    fft_cube(&mut data, grid.n_points(), 3, FftDirection::Inverse);
    let scale = grid.side().powi(-3);
    data.iter_mut().for_each(|v| *v *= scale);
    ComplexField::new(*grid, dt, data)
}

/// Closed-form kernel sampled at the grid displacements.
pub fn sample_free_propagator(grid: &SpatialGrid, m: f64, dt: f64) -> Result<ComplexField> {
    super::free_propagator(&[0.0; 3], &[0.0; 3], dt, m)?;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|idx| analytic_free_propagator(&grid.position(idx), &[0.0; 3], dt, m).unwrap())
        .collect();
    ComplexField::new(*grid, dt, values)
}

/// Relative L2 distance between the FFT kernel and the closed form over
/// the inner half-box `|x_i| <= L/4`.
pub fn fft_oracle_discrepancy(grid: &SpatialGrid, m: f64, dt: f64, eps: f64) -> Result<f64> {
    let fft = fft_retarded_propagator(grid, m, dt, eps)?;
    let exact = sample_free_propagator(grid, m, dt)?;
    let quarter = grid.side() / 4.0 + 1e-12 * grid.side();
    let (mut num, mut den) = (0.0, 0.0);
    for (idx, (a, b)) in fft.values().iter().zip(exact.values()).enumerate() {
        if grid.position(idx).iter().all(|x| x.abs() <= quarter) {
            num += (a - b).norm_sqr();
            den += b.norm_sqr();
        }
    }
    Ok((num / den).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleStudyRow {
    pub epsilon: f64,
    pub discrepancy: f64,
}

pub fn fft_oracle_study(
    grid: &SpatialGrid,
    m: f64,
    dt: f64,
    schedule: &EpsilonSchedule,
) -> Result<Vec<OracleStudyRow>> {
    schedule
        .values()
        .iter()
        .map(|&epsilon| Ok(OracleStudyRow { epsilon, discrepancy: fft_oracle_discrepancy(grid, m, dt, epsilon)? }))
        .collect()
}

fn kinetic_phase(k: &[f64], dt: f64, m: f64) -> Complex64 {
    let k2: f64 = k.iter().map(|x| x * x).sum();
    Complex64::from_polar(1.0, -k2 * dt / (2.0 * m))
}

/// Free evolution of a single-particle state by `dt`.
pub fn propagate_state(psi0: &ComplexField, dt: f64, m: f64) -> Result<ComplexField> {
    check_mass(m)?;
    check_dt(dt)?;
    let grid = *psi0.grid();
    let n = grid.n_points();
    let mut data = psi0.values().to_vec();
    fft_cube(&mut data, n, 3, FftDirection::Forward);
    data.par_iter_mut().enumerate().for_each(|(idx, v)| {
        *v *= kinetic_phase(&grid.wavevector(idx), dt, m);
    });
    fft_cube(&mut data, n, 3, FftDirection::Inverse);
    let scale = 1.0 / grid.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    ComplexField::new(grid, psi0.time() + dt, data)
}

/// Free evolution of a distinguishable pair with masses `m1`, `m2`.
pub fn propagate_pair(psi0: &PairField, dt: f64, m1: f64, m2: f64) -> Result<PairField> {
    check_mass(m1)?;
    check_mass(m2)?;
    check_dt(dt)?;
    let grid = *psi0.grid();
    let n = grid.n_points();
    let n3 = grid.len();
    let mut out = psi0.clone();
    let data = out.values_mut();
    fft_cube(data, n, 6, FftDirection::Forward);
    data.par_chunks_mut(n3).enumerate().for_each(|(i1, row)| {
        let k1 = grid.wavevector(i1);
        let phase1 = kinetic_phase(&k1, dt, m1);
        for (i2, v) in row.iter_mut().enumerate() {
            *v *= phase1 * kinetic_phase(&grid.wavevector(i2), dt, m2);
        }
    });
    fft_cube(data, n, 6, FftDirection::Inverse);
    let scale = 1.0 / (n3 * n3) as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    out.set_time(psi0.time() + dt);
    Ok(out)
}

/// Identical-particle evolution: the symmetrized kernel applied to `psi0`,
/// i.e. free evolution of `(psi0 + sign * P psi0) / 2`.
pub fn propagate_pair_symmetrized(psi0: &PairField, dt: f64, m: f64, sign: f64) -> Result<PairField> {
    check_sign(sign)?;
    propagate_pair(&psi0.symmetrized(sign)?, dt, m, m)
}
