//! Time-ordered terms of the interaction-picture Dyson series on a
//! finite-level system.
//!
//! The order-`n` term of `U_I(t, t0)` is
//! `(-i)^n` times the integral of `V_I(t1) V_I(t2) ... V_I(tn)` over
//! `t0 <= tn <= ... <= t1 <= t`, with
//! `V_I(tau)_ab = exp(i (E_a - E_b) tau) H1_ab`. The simplex is integrated
//! one level at a time with composite Gauss-Legendre rules.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, ScatterError};
use crate::quadrature::GaussLegendre;
use crate::smatrix::FiniteSystem;

pub const MAX_DYSON_ORDER: usize = 3;
pub const DEFAULT_QUADRATURE_POINTS: usize = 32;

struct Nested<'a> {
    system: &'a FiniteSystem,
    rule: GaussLegendre,
    t0: f64,
}

impl Nested<'_> {
    /// Enough panels that each spans at most half a period of the fastest
    /// Bohr frequency.
    fn nodes(&self, s: f64) -> Vec<(f64, f64)> {
        let span = s - self.t0;
        let panels = (self.system.bandwidth() * span / std::f64::consts::PI).ceil().max(1.0) as usize;
        self.rule.composite(self.t0, s, panels)
    }

    fn phases(&self, tau: f64, sign: f64) -> Vec<Complex64> {
        self.system.h0().iter().map(|e| Complex64::from_polar(1.0, sign * e * tau)).collect()
    }

    /// `V_I(tau) M`.
    fn apply(&self, tau: f64, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut scaled = m.clone();
        for (i, p) in self.phases(tau, -1.0).iter().enumerate() {
            scaled.row_mut(i).iter_mut().for_each(|x| *x *= p);
        }
        let mut out = self.system.h1() * scaled;
        for (i, p) in self.phases(tau, 1.0).iter().enumerate() {
            out.row_mut(i).iter_mut().for_each(|x| *x *= p);
        }
        out
    }

    /// `F_k(s) init`, where `F_0 = 1` and `F_k(s)` integrates
    /// `V_I(tau) F_{k-1}(tau)` over `[t0, s]`.
    fn level(&self, k: usize, s: f64, init: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        if k == 0 {
            return init.clone();
        }
        let mut acc = DMatrix::zeros(init.nrows(), init.ncols());
        for (tau, w) in self.nodes(s) {
            let inner = self.level(k - 1, tau, init);
            acc += self.apply(tau, &inner) * Complex64::new(w, 0.0);
        }
        acc
    }
}

fn check(n: usize, t: f64, t0: f64, quadrature_points: usize) -> Result<()> {
    if n > MAX_DYSON_ORDER {
        return Err(ScatterError::UnsupportedOrder { requested: n, max: MAX_DYSON_ORDER });
    }
    if !(t >= t0) || !t.is_finite() || !t0.is_finite() {
        return Err(ScatterError::domain(format!("need t >= t0, got t = {t}, t0 = {t0}")));
    }
    if quadrature_points == 0 {
        return Err(ScatterError::domain("quadrature needs at least one point"));
    }
    Ok(())
}

fn minus_i_pow(n: usize) -> Complex64 {
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0)][n % 4]
}

/// All elements of the order-`n` term.
pub fn dyson_matrix(
    system: &FiniteSystem,
    n: usize,
    t: f64,
    t0: f64,
    quadrature_points: usize,
) -> Result<DMatrix<Complex64>> {
    check(n, t, t0, quadrature_points)?;
    let dim = system.dim();
    let identity = DMatrix::identity(dim, dim);
    if n == 0 {
        return Ok(identity);
    }
    let nested = Nested { system, rule: GaussLegendre::new(quadrature_points), t0 };
    Ok(nested.level(n, t, &identity) * minus_i_pow(n))
}

/// Element `(state_out, state_in)` of the order-`n` term.
pub fn dyson_term(
    system: &FiniteSystem,
    n: usize,
    t: f64,
    t0: f64,
    state_in: usize,
    state_out: usize,
    quadrature_points: usize,
) -> Result<Complex64> {
    check(n, t, t0, quadrature_points)?;
    let dim = system.dim();
    if state_in >= dim || state_out >= dim {
        return Err(ScatterError::domain(format!("state index out of range for {dim} levels")));
    }
    if n == 0 {
        let overlap = if state_in == state_out { 1.0 } else { 0.0 };
        return Ok(Complex64::new(overlap, 0.0));
    }
    let nested = Nested { system, rule: GaussLegendre::new(quadrature_points), t0 };
    let mut column = DMatrix::zeros(dim, 1);
    column[(state_in, 0)] = Complex64::new(1.0, 0.0);

    // Only one row of the outermost integral is needed.
    let h0 = system.h0();
    let h1 = system.h1();
    let mut acc = Complex64::new(0.0, 0.0);
    for (tau, w) in nested.nodes(t) {
        let inner = nested.level(n - 1, tau, &column);
        let row: Complex64 = (0..dim)
            .map(|b| h1[(state_out, b)] * Complex64::from_polar(1.0, (h0[state_out] - h0[b]) * tau) * inner[(b, 0)])
            .sum();
        acc += row * w;
    }
    Ok(acc * minus_i_pow(n))
}
