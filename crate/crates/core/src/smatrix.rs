//! Finite-dimensional laboratory: interaction-picture evolution, S-matrix,
//! `T1 = S - 1` and the sum rule.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::born::{dyson_matrix, DEFAULT_QUADRATURE_POINTS, MAX_DYSON_ORDER};
use crate::error::{Result, ScatterError};

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;

/// `H = diag(h0) + h1` on an N-level space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSystem {
    h0: Vec<f64>,
    h1: CMatrix,
}

impl FiniteSystem {
    pub fn new(h0: Vec<f64>, h1: CMatrix) -> Result<Self> {
        let n = h0.len();
        if n == 0 {
            return Err(ScatterError::domain("system needs at least one level"));
        }
        if h0.iter().any(|e| !e.is_finite()) {
            return Err(ScatterError::domain("h0 must be finite"));
        }
        if h1.nrows() != n || h1.ncols() != n {
            return Err(ScatterError::domain(format!("h1 is {}x{}, expected {n}x{n}", h1.nrows(), h1.ncols())));
        }
        let defect = hermitian_defect(&h1);
        if defect > HERMITIAN_TOL {
            return Err(ScatterError::domain(format!("h1 is not Hermitian (defect {defect:e})")));
        }
        Ok(FiniteSystem { h0, h1 })
    }

    pub fn free(h0: Vec<f64>) -> Result<Self> {
        let n = h0.len();
        Self::new(h0, CMatrix::zeros(n, n))
    }

    /// Seeded Gaussian Hermitian `h1` rescaled to spectral norm `coupling`.
    /// Without `h0`, the spectrum is `0, 1, ..., N-1`.
    pub fn random(dim: usize, coupling: f64, seed: u64, h0: Option<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(ScatterError::domain("system needs at least one level"));
        }
        if !(coupling >= 0.0 && coupling.is_finite()) {
            return Err(ScatterError::domain("coupling must be nonnegative"));
        }
        let h0 = h0.unwrap_or_else(|| (0..dim).map(|k| k as f64).collect());
        if h0.len() != dim {
            return Err(ScatterError::domain("h0 length does not match dimension"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
        let a = CMatrix::from_fn(dim, dim, |_, _| Complex64::new(draw(), draw()));
        let mut h1 = (&a + a.adjoint()).scale(0.5);
        let norm = spectral_norm(&h1);
        if norm > 0.0 {
            h1 = h1.scale(coupling / norm);
        }
        // Exact Hermiticity after scaling.
        let h1 = CMatrix::from_fn(dim, dim, |i, j| if i <= j { h1[(i, j)] } else { h1[(j, i)].conj() });
        Self::new(h0, h1)
    }

    /// A single level (index 0) coupled with strength `coupling` to a band of
    /// `band` equally spaced levels.
    ///
    /// The band is centred on zero; the discrete level sits half a spacing
    /// off centre so it is never degenerate with a band level.
    pub fn quasi_continuum(band: usize, spacing: f64, coupling: f64) -> Result<Self> {
        if band == 0 || !(spacing > 0.0) {
            return Err(ScatterError::domain("band needs levels and a positive spacing"));
        }
        let centre = (band as f64 - 1.0) / 2.0;
        let mut h0 = vec![0.5 * spacing];
        h0.extend((0..band).map(|k| (k as f64 - centre) * spacing));
        let dim = band + 1;
        let g = Complex64::new(coupling, 0.0);
        let h1 = CMatrix::from_fn(dim, dim, |i, j| if (i == 0) != (j == 0) { g } else { Complex64::new(0.0, 0.0) });
        Self::new(h0, h1)
    }

    pub fn dim(&self) -> usize {
        self.h0.len()
    }

    pub fn h0(&self) -> &[f64] {
        &self.h0
    }

    pub fn h1(&self) -> &CMatrix {
        &self.h1
    }

    pub fn hamiltonian(&self) -> CMatrix {
        let mut h = self.h1.clone();
        for (i, e) in self.h0.iter().enumerate() {
            h[(i, i)] += e;
        }
        h
    }

    /// Largest `|E_a - E_b|`.
    pub fn bandwidth(&self) -> f64 {
        let max = self.h0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.h0.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }

    pub fn h1_norm(&self) -> f64 {
        spectral_norm(&self.h1)
    }

    pub fn with_h1_scaled(&self, factor: f64) -> Self {
        FiniteSystem { h0: self.h0.clone(), h1: self.h1.scale(factor) }
    }
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Spectral norm of a Hermitian matrix.
pub fn spectral_norm(h: &CMatrix) -> f64 {
    if h.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(h.clone()).eigenvalues.iter().fold(0.0, |acc: f64, e| acc.max(e.abs()))
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

fn phases(energies: &[f64], t: f64) -> DVector<Complex64> {
    DVector::from_iterator(energies.len(), energies.iter().map(|e| Complex64::from_polar(1.0, -e * t)))
}

/// `exp(i H0 t) exp(-i H (t - t0)) exp(-i H0 t0)` by eigendecomposition of `H`.
pub fn evolve_exact(system: &FiniteSystem, t: f64, t0: f64) -> CMatrix {
    let eig = SymmetricEigen::new(system.hamiltonian());
    let q = &eig.eigenvectors;
    let lam: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    let mut qd = q.clone();
    for (j, p) in phases(&lam, t - t0).iter().enumerate() {
        qd.column_mut(j).iter_mut().for_each(|v| *v *= p);
    }
    let mut u = qd * q.adjoint();
    let left = phases(system.h0(), -t);
    let right = phases(system.h0(), t0);
    for i in 0..u.nrows() {
        for j in 0..u.ncols() {
            u[(i, j)] *= left[i] * right[j];
        }
    }
    u
}

/// `1 + sum_{k=1}^{order}` of the time-ordered terms.
pub fn evolve_born(system: &FiniteSystem, t: f64, t0: f64, order: usize) -> Result<CMatrix> {
    evolve_born_with(system, t, t0, order, DEFAULT_QUADRATURE_POINTS)
}

pub fn evolve_born_with(
    system: &FiniteSystem,
    t: f64,
    t0: f64,
    order: usize,
    quadrature_points: usize,
) -> Result<CMatrix> {
    if order > MAX_DYSON_ORDER {
        return Err(ScatterError::UnsupportedOrder { requested: order, max: MAX_DYSON_ORDER });
    }
    let n = system.dim();
    let mut u = CMatrix::identity(n, n);
    for k in 1..=order {
        u += dyson_matrix(system, k, t, t0, quadrature_points)?;
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SMatrixMethod {
    Exact,
    Born(usize),
}

/// Evolution over the window `[-T/2, T/2]`.
pub fn s_matrix(system: &FiniteSystem, horizon: f64, method: SMatrixMethod) -> Result<CMatrix> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(ScatterError::domain(format!("horizon must be positive, got {horizon}")));
    }
    let (t, t0) = (0.5 * horizon, -0.5 * horizon);
    match method {
        SMatrixMethod::Exact => Ok(evolve_exact(system, t, t0)),
        SMatrixMethod::Born(order) => evolve_born(system, t, t0, order),
    }
}

/// `||U^dagger U - 1||_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    (u.adjoint() * u - CMatrix::identity(u.ncols(), u.ncols())).norm()
}

/// `T1 = S - 1` and `|sum_m |T1_mn|^2 + (T1 + T1^dagger)_nn|`.
pub fn t1_and_sum_rule(s: &CMatrix, n: usize) -> Result<(CMatrix, f64)> {
    if s.nrows() != s.ncols() {
        return Err(ScatterError::domain("S must be square"));
    }
    if n >= s.nrows() {
        return Err(ScatterError::domain(format!("state index {n} out of range")));
    }
    let t1 = s - CMatrix::identity(s.nrows(), s.ncols());
    let column: f64 = t1.column(n).iter().map(|v| v.norm_sqr()).sum();
    let diag = t1[(n, n)] + t1[(n, n)].conj();
    Ok((t1.clone(), (Complex64::new(column, 0.0) + diag).norm()))
}

fn serialize_matrix<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut rows = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<[f64; 2]> = (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect();
        rows.serialize_element(&row)?;
    }
    rows.end()
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionReport {
    pub t: f64,
    pub t0: f64,
    pub order: usize,
    #[serde(serialize_with = "serialize_matrix")]
    pub u_exact: CMatrix,
    #[serde(serialize_with = "serialize_matrix")]
    pub u_born: CMatrix,
    pub unitarity_defect: f64,
    pub born_unitarity_defect: f64,
    /// `||U_born - U_exact||_F`.
    pub born_error: f64,
}

impl EvolutionReport {
    pub fn compute(system: &FiniteSystem, t: f64, t0: f64, order: usize) -> Result<Self> {
        let u_exact = evolve_exact(system, t, t0);
        let u_born = evolve_born(system, t, t0, order)?;
        Ok(EvolutionReport {
            t,
            t0,
            order,
            unitarity_defect: unitarity_defect(&u_exact),
            born_unitarity_defect: unitarity_defect(&u_born),
            born_error: (&u_born - &u_exact).norm(),
            u_exact,
            u_born,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
