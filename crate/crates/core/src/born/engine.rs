use num_complex::Complex64;
use rayon::prelude::*;

use super::{MomentumGrid, Potential, PotentialKind, BORN_TOLERANCE};
use crate::error::{Result, ScatterError};
use crate::kinematics::{kinetic_energy, Momentum3};

/// Intermediate-state basis for single matrix elements of the Born series.
///
/// A single particle ranges over the whole grid. A pair with fixed total
/// lattice momentum `P` ranges over the shell of `k1` with both `k1` and
/// `P - k1` on the grid, since the interaction conserves `P`.
#[derive(Debug, Clone)]
pub struct BornElement {
    grid: MomentumGrid,
    momenta: Vec<Momentum3>,
    grid_index: Vec<usize>,
    position: Vec<Option<usize>>,
    free_energy: Vec<f64>,
    pair: bool,
}

impl BornElement {
    pub fn single(grid: &MomentumGrid, mass: f64) -> Result<Self> {
        let mut momenta = Vec::with_capacity(grid.len());
        let mut free_energy = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let p = grid.momentum(idx);
            free_energy.push(kinetic_energy(p, mass)?);
            momenta.push(p);
        }
        Ok(BornElement {
            grid: *grid,
            momenta,
            grid_index: (0..grid.len()).collect(),
            position: (0..grid.len()).map(Some).collect(),
            free_energy,
            pair: false,
        })
    }

    pub fn pair(grid: &MomentumGrid, masses: [f64; 2], total: [i64; 3]) -> Result<Self> {
        let mut out = BornElement {
            grid: *grid,
            momenta: Vec::new(),
            grid_index: Vec::new(),
            position: vec![None; grid.len()],
            free_energy: Vec::new(),
            pair: true,
        };
        for idx in 0..grid.len() {
            let c = grid.coords(idx);
            let partner = [total[0] - c[0], total[1] - c[1], total[2] - c[2]];
            if grid.index_of_coords(&partner).is_none() {
                continue;
            }
            let k1 = grid.lattice_momentum(&c);
            let k2 = grid.lattice_momentum(&partner);
            out.position[idx] = Some(out.momenta.len());
            out.free_energy.push(kinetic_energy(k1, masses[0])? + kinetic_energy(k2, masses[1])?);
            out.momenta.push(k1);
            out.grid_index.push(idx);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    /// Basis position of the state whose (first-particle) momentum is `p`.
    pub fn locate(&self, p: Momentum3) -> Option<usize> {
        self.grid.index_of(p).and_then(|idx| self.position[idx])
    }

    fn v(&self, pot: &Potential, a: usize, b: usize) -> Complex64 {
        match pot.kind() {
            PotentialKind::Matrix(m) => m[(self.grid_index[a], self.grid_index[b])],
            _ => {
                let (pa, pb) = (self.momenta[a], self.momenta[b]);
                let q2 = (pa.px - pb.px).powi(2) + (pa.py - pb.py).powi(2) + (pa.pz - pb.pz).powi(2);
                Complex64::new(pot.transform_q2(q2) / self.grid.volume(), 0.0)
            }
        }
    }

    /// `V (D w)` over the basis, one row per task.
    fn apply(&self, pot: &Potential, dw: &[Complex64]) -> Vec<Complex64> {
        (0..self.len()).into_par_iter().map(|a| (0..self.len()).map(|k| self.v(pot, a, k) * dw[k]).sum()).collect()
    }

    /// Box matrix element `<out| T(E + i eps) |inp>` truncated at `order`.
    ///
    /// The second-order term is summed as `D_k (V_ok V_ki)` so that swapping
    /// `out` and `inp` reproduces it bit for bit.
    pub fn element(
        &self,
        pot: &Potential,
        out: usize,
        inp: usize,
        energy: f64,
        epsilon: f64,
        order: usize,
    ) -> Result<Complex64> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(ScatterError::domain(format!("epsilon must be positive, got {epsilon}")));
        }
        if order == 0 {
            return Err(ScatterError::domain("Born order must be at least 1"));
        }
        if out >= self.len() || inp >= self.len() {
            return Err(ScatterError::domain("state index outside the basis"));
        }
        if let PotentialKind::Matrix(m) = pot.kind() {
            if self.pair || m.nrows() != self.grid.len() {
                return Err(ScatterError::domain("matrix potentials need a single-particle grid of matching size"));
            }
        }
        if pot.is_coulomb() && (order > 1 || out == inp) {
            return Err(ScatterError::ForwardSingularity);
        }

        let first = self.v(pot, out, inp);
        if order == 1 {
            return Ok(first);
        }
        let d: Vec<Complex64> = self.free_energy.iter().map(|e| Complex64::new(energy - e, epsilon).inv()).collect();
        let mut second = Complex64::new(0.0, 0.0);
        for (k, dk) in d.iter().enumerate() {
            second += dk * (self.v(pot, out, k) * self.v(pot, k, inp));
        }
        let mut total = first + second;
        if order == 2 {
            return Ok(total);
        }

        // Higher orders by column iteration: w_n = V D w_{n-1}, term_n = w_n[out].
        let norm = |w: &[Complex64]| w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let mut w: Vec<Complex64> = (0..self.len()).map(|k| self.v(pot, k, inp)).collect();
        let mut sum_norm = norm(&w);
        let mut prev_norm = sum_norm;
        let mut rising = 0;
        for n in 2..=order {
            let dw: Vec<Complex64> = w.iter().zip(&d).map(|(a, b)| a * b).collect();
            w = self.apply(pot, &dw);
            let term_norm = norm(&w);
            if n > 2 {
                total += w[out];
            }
            let ratio = term_norm / prev_norm;
            rising = if ratio >= 1.0 { rising + 1 } else { 0 };
            if rising >= 2 {
                return Err(ScatterError::NonConvergent { order: n, ratio });
            }
            sum_norm = sum_norm.max(term_norm);
            if term_norm < BORN_TOLERANCE * sum_norm {
                break;
            }
            prev_norm = term_norm;
        }
        Ok(total)
    }
}

/// Box element between two single-particle grid momenta.
#[allow(clippy::too_many_arguments)]
pub fn box_element(
    grid: &MomentumGrid,
    pot: &Potential,
    p_out: Momentum3,
    p_in: Momentum3,
    energy: f64,
    epsilon: f64,
    order: usize,
    mass: f64,
) -> Result<Complex64> {
    let basis = BornElement::single(grid, mass)?;
    let missing = || ScatterError::domain("momentum is not a point of the grid");
    let o = basis.locate(p_out).ok_or_else(missing)?;
    let i = basis.locate(p_in).ok_or_else(missing)?;
    basis.element(pot, o, i, energy, epsilon, order)
}
