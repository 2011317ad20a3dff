//! Transition amplitudes, probabilities, reciprocity, detector amplitudes
//! and golden-rule rates.
//!
//! Amplitudes are continuum-normalized: the box matrix element of `T` times
//! `(L / 2 pi)^3` per particle. The no-scattering Kronecker channel is kept
//! apart as `delta_part` instead of being materialized as a `(L / 2 pi)^3`
//! spike.

use num_complex::Complex64;

use crate::born::{BornElement, MomentumGrid, Potential};
use crate::error::{Result, ScatterError};
use crate::greenfn::check_sign;
use crate::kinematics::{kinetic_energy, solve_outgoing, CollisionInput, CollisionOutcome, Constrained, Momentum3};
use crate::smatrix::{s_matrix, FiniteSystem, SMatrixMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessKind {
    Single,
    PairDistinguishable,
    PairIdentical,
}

impl ProcessKind {
    pub fn particles(self) -> usize {
        match self {
            ProcessKind::Single => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub momenta_in: Vec<Momentum3>,
    pub momenta_out: Vec<Momentum3>,
    pub masses: Vec<f64>,
    /// +1 for bosons, -1 for fermions; ignored unless the kind is identical.
    pub exchange_sign: f64,
    pub potential: Potential,
    pub order: usize,
    pub grid: MomentumGrid,
    /// Energy of the resolvent; the incoming kinetic energy when unset.
    pub energy: Option<f64>,
    /// Regulator; the grid default for the energy when unset.
    pub epsilon: Option<f64>,
}

impl ProcessSpec {
    pub fn single(
        p_in: Momentum3,
        p_out: Momentum3,
        mass: f64,
        potential: Potential,
        order: usize,
        grid: MomentumGrid,
    ) -> Self {
        ProcessSpec {
            kind: ProcessKind::Single,
            momenta_in: vec![p_in],
            momenta_out: vec![p_out],
            masses: vec![mass],
            exchange_sign: 1.0,
            potential,
            order,
            grid,
            energy: None,
            epsilon: None,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn pair(
        kind: ProcessKind,
        momenta_in: [Momentum3; 2],
        momenta_out: [Momentum3; 2],
        masses: [f64; 2],
        exchange_sign: f64,
        potential: Potential,
        order: usize,
        grid: MomentumGrid,
    ) -> Self {
        ProcessSpec {
            kind,
            momenta_in: momenta_in.to_vec(),
            momenta_out: momenta_out.to_vec(),
            masses: masses.to_vec(),
            exchange_sign,
            potential,
            order,
            grid,
            energy: None,
            epsilon: None,
        }
    }

    pub fn with_energy(mut self, energy: f64) -> Self {
        self.energy = Some(energy);
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.kind.particles();
        if self.momenta_in.len() != n || self.momenta_out.len() != n || self.masses.len() != n {
            return Err(ScatterError::domain(format!("{:?} process needs {n} momenta and masses", self.kind)));
        }
        for m in &self.masses {
            crate::kinematics::check_mass(*m)?;
        }
        if self.kind == ProcessKind::PairIdentical {
            check_sign(self.exchange_sign)?;
            if self.masses[0] != self.masses[1] {
                return Err(ScatterError::domain("identical particles need equal masses"));
            }
        }
        if self.order == 0 {
            return Err(ScatterError::domain("Born order must be at least 1"));
        }
        for p in self.momenta_in.iter().chain(&self.momenta_out) {
            self.grid.require_lattice(*p)?;
        }
        Ok(())
    }

    pub fn incoming_energy(&self) -> Result<f64> {
        self.momenta_in.iter().zip(&self.masses).map(|(p, m)| kinetic_energy(*p, *m)).sum()
    }

    pub fn resolved_energy(&self) -> Result<f64> {
        match self.energy {
            Some(e) => Ok(e),
            None => self.incoming_energy(),
        }
    }

    pub fn resolved_epsilon(&self) -> Result<f64> {
        match self.epsilon {
            Some(e) => Ok(e),
            None => {
                let m = self.masses.iter().cloned().fold(f64::INFINITY, f64::min);
                Ok(self.grid.default_epsilon(self.resolved_energy()?, m))
            }
        }
    }

    /// Incoming and outgoing momenta exchanged.
    pub fn reversed(&self) -> Self {
        ProcessSpec { momenta_in: self.momenta_out.clone(), momenta_out: self.momenta_in.clone(), ..self.clone() }
    }

    /// Every momentum negated.
    pub fn negated(&self) -> Self {
        ProcessSpec {
            momenta_in: self.momenta_in.iter().map(|p| -*p).collect(),
            momenta_out: self.momenta_out.iter().map(|p| -*p).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    /// Coefficient of the no-scattering Kronecker channel.
    pub delta_part: f64,
    pub scattered_part: Complex64,
}

impl Amplitude {
    pub fn conj(&self) -> Self {
        Amplitude { delta_part: self.delta_part, scattered_part: self.scattered_part.conj() }
    }
}

pub fn amplitude(spec: &ProcessSpec) -> Result<Amplitude> {
    spec.validate()?;
    let energy = spec.resolved_energy()?;
    let epsilon = spec.resolved_epsilon()?;
    let grid = &spec.grid;
    let coords = |p: &Momentum3| grid.require_lattice(*p);
    let same = |a: &Momentum3, b: &Momentum3| -> Result<bool> { Ok(coords(a)? == coords(b)?) };
    let kron = |a: &Momentum3, b: &Momentum3| -> Result<f64> { Ok(if same(a, b)? { 1.0 } else { 0.0 }) };
    let (pi, po) = (&spec.momenta_in, &spec.momenta_out);

    if spec.kind == ProcessKind::Single {
        let basis = BornElement::single(grid, spec.masses[0])?;
        let locate = |p: &Momentum3| basis.locate(*p).expect("validated lattice point");
        let t = basis.element(&spec.potential, locate(&po[0]), locate(&pi[0]), energy, epsilon, spec.order)?;
        return Ok(Amplitude { delta_part: kron(&po[0], &pi[0])?, scattered_part: t * grid.delta_weight() });
    }

    let (a, b) = (coords(&pi[0])?, coords(&pi[1])?);
    let (c, d) = (coords(&po[0])?, coords(&po[1])?);
    let total_in = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let total_out = [c[0] + d[0], c[1] + d[1], c[2] + d[2]];
    let direct_delta = kron(&po[0], &pi[0])? * kron(&po[1], &pi[1])?;
    let exchange_delta = kron(&po[0], &pi[1])? * kron(&po[1], &pi[0])?;
    let sign = spec.exchange_sign;
    let delta_part = match spec.kind {
        ProcessKind::PairIdentical => direct_delta + sign * exchange_delta,
        _ => direct_delta,
    };
    if total_in != total_out {
        return Ok(Amplitude { delta_part, scattered_part: Complex64::new(0.0, 0.0) });
    }

    let basis = BornElement::pair(grid, [spec.masses[0], spec.masses[1]], total_in)?;
    let locate = |p: &Momentum3| basis.locate(*p).expect("conserving pair lies on the shell");
    // <x1 x2| T |y1 y2>, labelled by the first particle's momenta.
    let t = |x1: &Momentum3, y1: &Momentum3| {
        basis.element(&spec.potential, locate(x1), locate(y1), energy, epsilon, spec.order)
    };
    let weight = grid.delta_weight().powi(2);
    let scattered = match spec.kind {
        ProcessKind::PairDistinguishable => t(&po[0], &pi[0])?,
        _ => {
            let direct = t(&po[0], &pi[0])? + t(&po[1], &pi[1])?;
            let exchange = t(&po[1], &pi[0])? + t(&po[0], &pi[1])?;
            0.5 * (direct + sign * exchange)
        }
    };
    Ok(Amplitude { delta_part, scattered_part: scattered * weight })
}

/// `|delta_part + scattered_part|^2`; just `|scattered_part|^2` off the
/// no-scattering channel.
pub fn probability(a: &Amplitude) -> f64 {
    (a.scattered_part + a.delta_part).norm_sqr()
}

fn check_real(spec: &ProcessSpec) -> Result<()> {
    if spec.potential.is_real() {
        Ok(())
    } else {
        Err(ScatterError::domain("reciprocity needs a real potential"))
    }
}

/// `|C(out <- in) - C(in <- out)|` on the scattered channel.
///
/// With a real potential `T(E + i eps)` is complex symmetric, so the process
/// and its reverse share one amplitude; their probabilities then agree.
pub fn reciprocity_residual(spec: &ProcessSpec) -> Result<f64> {
    check_real(spec)?;
    let forward = amplitude(spec)?;
    let backward = amplitude(&spec.reversed())?;
    Ok((forward.scattered_part - backward.scattered_part).norm())
}

/// `|C(out <- in) - C(in <- out)^*|`, which equals `2 |Im C|` and vanishes
/// only where the amplitude is real (first order).
pub fn conjugate_reciprocity_residual(spec: &ProcessSpec) -> Result<f64> {
    check_real(spec)?;
    let forward = amplitude(spec)?;
    let backward = amplitude(&spec.reversed())?;
    Ok((forward.scattered_part - backward.scattered_part.conj()).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorChannel {
    pub outcome: CollisionOutcome,
    /// Lattice momenta actually used for the amplitude.
    pub snapped: [Momentum3; 2],
    pub snap_distance: f64,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorReading {
    pub direction: Momentum3,
    pub amplitude_a: Complex64,
    pub amplitude_b: Complex64,
    pub total: Complex64,
    /// Roots with particle 1 along the direction.
    pub channels_a: Vec<DetectorChannel>,
    /// Roots with particle 2 along the direction.
    pub channels_b: Vec<DetectorChannel>,
}

impl DetectorReading {
    /// No kinematically allowed final state in this direction.
    pub fn is_empty(&self) -> bool {
        self.channels_a.is_empty() && self.channels_b.is_empty()
    }

    pub fn intensity(&self) -> f64 {
        self.total.norm_sqr()
    }

    pub fn max_snap_distance(&self) -> f64 {
        self.channels_a.iter().chain(&self.channels_b).map(|c| c.snap_distance).fold(0.0, f64::max)
    }
}

/// `C = C_a + C_b` for distinguishable particles seen along `direction`.
pub fn detector_amplitude(
    inp: &CollisionInput,
    direction: Momentum3,
    pot: &Potential,
    order: usize,
    grid: &MomentumGrid,
) -> Result<DetectorReading> {
    detector_reading(inp, direction, pot, order, grid, ProcessKind::PairDistinguishable, 1.0)
}

/// Identical-particle variant using the symmetrized amplitudes.
pub fn detector_amplitude_identical(
    inp: &CollisionInput,
    direction: Momentum3,
    pot: &Potential,
    order: usize,
    grid: &MomentumGrid,
    exchange_sign: f64,
) -> Result<DetectorReading> {
    check_sign(exchange_sign)?;
    detector_reading(inp, direction, pot, order, grid, ProcessKind::PairIdentical, exchange_sign)
}

fn detector_reading(
    inp: &CollisionInput,
    direction: Momentum3,
    pot: &Potential,
    order: usize,
    grid: &MomentumGrid,
    kind: ProcessKind,
    sign: f64,
) -> Result<DetectorReading> {
    for p in inp.momenta_in {
        grid.require_lattice(p)?;
    }
    let total = inp.momenta_in[0] + inp.momenta_in[1];
    let channel = |which| -> Result<Vec<DetectorChannel>> {
        let mut out = Vec::new();
        for outcome in solve_outgoing(inp, direction, which)? {
            if outcome.is_forward {
                continue;
            }
            let (idx, snap_distance) = grid.nearest(outcome.momenta_out[0]);
            let p1 = grid.momentum(idx);
            let Some(p2) = grid.index_of(total - p1).map(|i| grid.momentum(i)) else {
                continue;
            };
            if p1 == inp.momenta_in[0] {
                continue;
            }
            let spec = ProcessSpec::pair(kind, inp.momenta_in, [p1, p2], inp.masses(), sign, pot.clone(), order, *grid);
            let amplitude = amplitude(&spec)?.scattered_part;
            out.push(DetectorChannel { outcome, snapped: [p1, p2], snap_distance, amplitude });
        }
        Ok(out)
    };
    let channels_a = channel(Constrained::First)?;
    let channels_b = channel(Constrained::Second)?;
    let sum = |cs: &[DetectorChannel]| cs.iter().map(|c| c.amplitude).sum::<Complex64>();
    let (amplitude_a, amplitude_b) = (sum(&channels_a), sum(&channels_b));
    Ok(DetectorReading {
        direction,
        amplitude_a,
        amplitude_b,
        total: amplitude_a + amplitude_b,
        channels_a,
        channels_b,
    })
}

fn check_levels(system: &FiniteSystem, idx: &[usize]) -> Result<()> {
    match idx.iter().find(|&&i| i >= system.dim()) {
        Some(i) => Err(ScatterError::domain(format!("level {i} out of range for {} levels", system.dim()))),
        None => Ok(()),
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(ScatterError::domain(format!("horizon must be positive, got {horizon}")))
    }
}

/// `|H1_mn|^2 sin^2(dE T / 2) / (dE / 2)^2 / T`, the first-order rate over
/// a window of length `T`. At `dE = 0` this is `|H1_mn|^2 T`.
pub fn golden_rule_rate(system: &FiniteSystem, n: usize, m: usize, horizon: f64) -> Result<f64> {
    check_levels(system, &[n, m])?;
    check_horizon(horizon)?;
    if n == m {
        return Err(ScatterError::domain("golden-rule rate needs distinct levels"));
    }
    let coupling = system.h1()[(m, n)].norm_sqr();
    let half = 0.5 * (system.h0()[m] - system.h0()[n]);
    if half == 0.0 {
        return Ok(coupling * horizon);
    }
    Ok(coupling * (half * horizon).sin().powi(2) / (half * half) / horizon)
}

/// Golden-rule rate out of level `n`, summed over every other level.
pub fn summed_golden_rule_rate(system: &FiniteSystem, n: usize, horizon: f64) -> Result<f64> {
    check_levels(system, &[n])?;
    (0..system.dim()).filter(|&m| m != n).map(|m| golden_rule_rate(system, n, m, horizon)).sum()
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn least_squares_slope(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxy: f64 = samples.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = samples.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    /// `(T, observable)` pairs the fit used.
    pub samples: Vec<(f64, f64)>,
}

/// Slope of the summed first-order transition probability `sum_m rate_m T`
/// against the horizon.
pub fn fit_golden_rule_rate(system: &FiniteSystem, n: usize, horizons: &[f64]) -> Result<RateFit> {
    let samples =
        horizons.iter().map(|&h| Ok((h, summed_golden_rule_rate(system, n, h)? * h))).collect::<Result<Vec<_>>>()?;
    Ok(RateFit { rate: least_squares_slope(&samples), samples })
}

/// Minus the slope of `ln |S_nn(T)|^2` from exact evolution.
pub fn fit_exact_decay_rate(system: &FiniteSystem, n: usize, horizons: &[f64]) -> Result<RateFit> {
    check_levels(system, &[n])?;
    let samples = horizons
        .iter()
        .map(|&h| {
            let s = s_matrix(system, h, SMatrixMethod::Exact)?;
            Ok((h, s[(n, n)].norm_sqr().ln()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateFit { rate: -least_squares_slope(&samples), samples })
}

/// `count` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::born::born1_single;
    use crate::kinematics::FreeParticle;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid() -> MomentumGrid {
        MomentumGrid::new(2.0 * PI, 7).unwrap()
    }

    fn p(x: f64, y: f64, z: f64) -> Momentum3 {
        Momentum3::new(x, y, z)
    }

    fn yukawa(alpha: f64) -> Potential {
        Potential::yukawa(alpha, 1.0).unwrap()
    }

    #[test]
    fn free_theory_amplitudes() {
        let a = amplitude(&ProcessSpec::single(p(1., 0., 0.), p(0., 1., 0.), 1.0, yukawa(0.0), 2, grid())).unwrap();
        assert_eq!(a, Amplitude { delta_part: 0.0, scattered_part: Complex64::new(0.0, 0.0) });
        let a = amplitude(&ProcessSpec::single(p(1., 0., 0.), p(1., 0., 0.), 1.0, yukawa(0.0), 2, grid())).unwrap();
        assert_eq!(a, Amplitude { delta_part: 1.0, scattered_part: Complex64::new(0.0, 0.0) });
    }

    #[test]
    fn first_order_single_matches_born1() {
        let pot = yukawa(0.3);
        let (pi, po) = (p(1., 2., 0.), p(-2., 1., 0.));
        let a = amplitude(&ProcessSpec::single(pi, po, 1.0, pot.clone(), 1, grid())).unwrap();
        let b = born1_single(pi, po, &pot).unwrap();
        assert_relative_eq!((a.scattered_part - b).norm(), 0.0, epsilon = 1e-15 * b.norm());
    }

    #[test]
    fn first_order_pair_matches_born1_pair() {
        let pot = yukawa(0.3);
        let g = grid();
        let (i, o) = ([p(1., 0., 0.), p(-1., 0., 0.)], [p(0., 1., 0.), p(0., -1., 0.)]);
        let spec = ProcessSpec::pair(ProcessKind::PairDistinguishable, i, o, [1.0, 2.0], 1.0, pot.clone(), 1, g);
        let a = amplitude(&spec).unwrap();
        let b = crate::born::born1_pair(i[0], i[1], o[0], o[1], &pot, &g).unwrap();
        assert_relative_eq!((a.scattered_part - b).norm(), 0.0, epsilon = 1e-13 * b.norm());
    }

    #[test]
    fn probability_examples() {
        let a = Amplitude { delta_part: 0.0, scattered_part: Complex64::new(3.0, 4.0) };
        assert_eq!(probability(&a), 25.0);
        assert_eq!(probability(&a.conj()), 25.0);
        assert_eq!(probability(&Amplitude { delta_part: 0.0, scattered_part: Complex64::new(0.0, 0.0) }), 0.0);
    }

    #[test]
    fn reciprocity_single_first_and_second_order() {
        let spec = ProcessSpec::single(p(2., 1., 0.), p(-1., 0., 2.), 1.0, yukawa(0.5), 1, grid());
        assert!(reciprocity_residual(&spec).unwrap() <= 1e-14);
        assert!(conjugate_reciprocity_residual(&spec).unwrap() <= 1e-14);

        let spec = ProcessSpec { order: 2, ..spec };
        let c = amplitude(&spec).unwrap().scattered_part;
        assert!(reciprocity_residual(&spec).unwrap() <= 1e-12 * (1.0 + c.norm()));
        // The conjugated form differs by 2 |Im C| beyond first order.
        assert_relative_eq!(conjugate_reciprocity_residual(&spec).unwrap(), 2.0 * c.im.abs(), max_relative = 1e-10);
        assert!(c.im.abs() > 0.0);
    }

    #[test]
    fn reciprocity_pair_order_two_and_negation() {
        let spec = ProcessSpec::pair(
            ProcessKind::PairDistinguishable,
            [p(2., 0., 1.), p(-1., 1., 0.)],
            [p(1., 2., 0.), p(0., -1., 1.)],
            [1.0, 1.0],
            1.0,
            Potential::gaussian(0.2, 0.8).unwrap(),
            2,
            grid(),
        );
        let c = amplitude(&spec).unwrap().scattered_part;
        assert!(c.norm() > 0.0);
        assert!(reciprocity_residual(&spec).unwrap() <= 1e-12 * c.norm());
        assert!(reciprocity_residual(&spec.negated()).unwrap() <= 1e-12 * (1.0 + c.norm()));
        let w = probability(&amplitude(&spec).unwrap());
        let w_rev = probability(&amplitude(&spec.reversed()).unwrap());
        assert_relative_eq!(w, w_rev, max_relative = 1e-12);
    }

    #[test]
    fn complex_potential_rejected_for_reciprocity() {
        let g = MomentumGrid::new(2.0 * PI, 1).unwrap();
        let m = nalgebra::DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let pot = Potential::matrix(m).unwrap();
        let spec = ProcessSpec::single(Momentum3::ZERO, Momentum3::ZERO, 1.0, pot, 2, g);
        assert!(reciprocity_residual(&spec).is_ok());

        let g = MomentumGrid::new(2.0 * PI, 2).unwrap();
        let mut m = nalgebra::DMatrix::from_element(8, 8, Complex64::new(0.0, 0.0));
        m[(0, 1)] = Complex64::new(0.0, 0.5);
        m[(1, 0)] = Complex64::new(0.0, -0.5);
        let pot = Potential::matrix(m).unwrap();
        let spec = ProcessSpec::single(g.momentum(0), g.momentum(1), 1.0, pot, 1, g);
        assert!(matches!(reciprocity_residual(&spec), Err(ScatterError::Domain(_))));
    }

    #[test]
    fn identical_exchange_symmetry() {
        let g = grid();
        let base = |sign: f64, out: [Momentum3; 2]| {
            ProcessSpec::pair(
                ProcessKind::PairIdentical,
                [p(2., 0., 0.), p(-1., 1., 0.)],
                out,
                [1.0, 1.0],
                sign,
                yukawa(0.4),
                2,
                g,
            )
        };
        let out = [p(0., 2., 1.), p(1., -1., -1.)];
        for sign in [1.0, -1.0] {
            let a = amplitude(&base(sign, out)).unwrap().scattered_part;
            let b = amplitude(&base(sign, [out[1], out[0]])).unwrap().scattered_part;
            assert_eq!(a, sign * b);
            assert!(a.norm() > 0.0);
        }
        let same = p(1., 1., 0.);
        let fermi = ProcessSpec::pair(
            ProcessKind::PairIdentical,
            [p(2., 0., 0.), p(0., 2., 0.)],
            [same, same],
            [1.0, 1.0],
            -1.0,
            yukawa(0.4),
            2,
            g,
        );
        assert_eq!(amplitude(&fermi).unwrap().scattered_part, Complex64::new(0.0, 0.0));
        let bose = ProcessSpec { exchange_sign: 1.0, ..fermi };
        assert!(amplitude(&bose).unwrap().scattered_part.norm() > 0.0);
    }

    #[test]
    fn identical_delta_part() {
        let g = grid();
        let (a, b) = (p(1., 0., 0.), p(0., 1., 0.));
        let spec = |sign: f64, out| {
            ProcessSpec::pair(ProcessKind::PairIdentical, [a, b], out, [1.0, 1.0], sign, yukawa(0.0), 1, g)
        };
        assert_eq!(amplitude(&spec(1.0, [a, b])).unwrap().delta_part, 1.0);
        assert_eq!(amplitude(&spec(-1.0, [b, a])).unwrap().delta_part, -1.0);
        assert!(ProcessSpec::pair(ProcessKind::PairIdentical, [a, b], [a, b], [1.0, 2.0], 1.0, yukawa(0.1), 1, g)
            .validate()
            .is_err());
    }

    fn collision(p1: Momentum3, p2: Momentum3) -> CollisionInput {
        let part = FreeParticle::new(1.0, 1.0).unwrap();
        CollisionInput::new([part, part], [p1, p2])
    }

    #[test]
    fn detector_zero_coupling_and_forbidden_direction() {
        let g = MomentumGrid::new(2.0 * PI, 9).unwrap();
        let inp = collision(p(3., 0., 0.), Momentum3::ZERO);
        let dir = Momentum3::new(0.5f64.sqrt(), 0.5f64.sqrt(), 0.0);
        let r = detector_amplitude(&inp, dir, &yukawa(0.0), 1, &g).unwrap();
        assert_eq!(r.total, Complex64::new(0.0, 0.0));
        assert!(!r.is_empty());

        let r = detector_amplitude(&inp, p(-1., 0., 0.), &yukawa(0.5), 1, &g).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.total, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn detector_interference_at_45_degrees() {
        let g = MomentumGrid::new(2.0 * PI, 9).unwrap();
        let inp = collision(p(4., 0., 0.), Momentum3::ZERO);
        let dir = Momentum3::new(0.5f64.sqrt(), 0.5f64.sqrt(), 0.0);
        let pot = yukawa(0.5);
        let r = detector_amplitude(&inp, dir, &pot, 2, &g).unwrap();
        assert_eq!(r.channels_a.len(), 1);
        assert_eq!(r.channels_b.len(), 1);
        // 4 cos 45 deg lands on (2, 2, 0) exactly.
        assert_eq!(r.channels_a[0].snapped, [p(2., 2., 0.), p(2., -2., 0.)]);
        assert!(r.max_snap_distance() < 1e-12);
        let out_a = r.channels_a[0].snapped;
        assert!(out_a[0].dot(&out_a[1]).abs() < 1e-12);

        let direct = |out: [Momentum3; 2]| {
            let spec = ProcessSpec::pair(
                ProcessKind::PairDistinguishable,
                inp.momenta_in,
                out,
                [1.0, 1.0],
                1.0,
                pot.clone(),
                2,
                g,
            );
            amplitude(&spec).unwrap().scattered_part
        };
        let ca = direct(r.channels_a[0].snapped);
        let cb = direct(r.channels_b[0].snapped);
        assert_eq!(r.amplitude_a, ca);
        assert_eq!(r.amplitude_b, cb);
        let intensity = ca.norm_sqr() + cb.norm_sqr() + 2.0 * (ca * cb.conj()).re;
        assert_relative_eq!(r.intensity(), intensity, max_relative = 1e-12);
    }

    #[test]
    fn golden_rule_examples() {
        let c = Complex64::new(0.2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let h1 = nalgebra::DMatrix::from_row_slice(2, 2, &[z, c, c, z]);
        let degenerate = FiniteSystem::new(vec![1.0, 1.0], h1.clone()).unwrap();
        assert_relative_eq!(golden_rule_rate(&degenerate, 0, 1, 3.0).unwrap(), 0.04 * 3.0, epsilon = 1e-15);

        let split = FiniteSystem::new(vec![0.0, 0.5], h1).unwrap();
        let t = 2.0 * PI / 0.5;
        assert!(golden_rule_rate(&split, 0, 1, t).unwrap() < 1e-30);
        assert!(golden_rule_rate(&split, 0, 1, 0.0).is_err());
        assert!(golden_rule_rate(&split, 0, 0, 1.0).is_err());
    }

    #[test]
    fn quasi_continuum_summed_rate() {
        let (band, delta, g) = (201, 0.01, 0.1);
        let sys = FiniteSystem::quasi_continuum(band, delta, g).unwrap();
        let gamma = 2.0 * PI * g * g / delta;
        let horizons = linspace(0.5 / gamma, 0.5 * 2.0 * PI / delta, 200);
        let fit = fit_golden_rule_rate(&sys, 0, &horizons).unwrap();
        assert!((fit.rate / gamma - 1.0).abs() < 0.05, "rate {}", fit.rate);
    }
}
