//! Acceptance criteria, one line per criterion.
//!
//! Each check prints `PASS` or `FAIL` with the measured values. The process
//! exits non-zero if an enforced criterion fails. Criterion 3 is reported
//! but not enforced (see the README).

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scatter_core::born::{born1_single, dyson_term, MomentumGrid, Potential};
use scatter_core::greenfn::{fft_oracle_study, propagate_state, ComplexField, EpsilonSchedule, SpatialGrid};
use scatter_core::kinematics::{solve_outgoing, CollisionInput, Constrained, FreeParticle, Momentum3};
use scatter_core::smatrix::{evolve_exact, s_matrix, t1_and_sum_rule, unitarity_defect, FiniteSystem, SMatrixMethod};
use scatter_core::transition::{
    amplitude, fit_exact_decay_rate, fit_golden_rule_rate, linspace, reciprocity_residual, ProcessKind, ProcessSpec,
};

struct Outcome {
    pass: bool,
    detail: String,
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    enforced: bool,
    check: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "reciprocity theorem", budget: secs(120), enforced: true, check: reciprocity },
        Criterion { id: 2, name: "Rutherford angular shape", budget: secs(10), enforced: true, check: rutherford },
        Criterion { id: 3, name: "Green's-function FFT oracle", budget: secs(30), enforced: false, check: fft_oracle },
        Criterion { id: 4, name: "free propagation", budget: secs(10), enforced: true, check: free_propagation },
        Criterion { id: 5, name: "two-body kinematics", budget: secs(30), enforced: true, check: kinematics },
        Criterion {
            id: 6,
            name: "S-matrix unitarity and sum rule",
            budget: secs(60),
            enforced: true,
            check: unitarity,
        },
        Criterion { id: 7, name: "time-ordered terms", budget: secs(60), enforced: true, check: dyson },
        Criterion { id: 8, name: "Fermi golden rule", budget: secs(30), enforced: true, check: golden_rule },
        Criterion { id: 9, name: "identical particles", budget: secs(10), enforced: true, check: identical },
        Criterion { id: 10, name: "CLI determinism", budget: secs(30), enforced: true, check: cli_determinism },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let out = (c.check)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let pass = out.pass && in_time;
        let note = if in_time { String::new() } else { format!(" (over the {:?} budget)", c.budget) };
        println!(
            "{} criterion {:>2} {}: {}; {:.2} s{}{}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            out.detail,
            elapsed.as_secs_f64(),
            note,
            if c.enforced { "" } else { " [reported, not enforced]" },
        );
        if !pass && c.enforced {
            failed.push(c.id);
        }
    }
    if !failed.is_empty() {
        eprintln!("enforced criteria failed: {failed:?}");
        std::process::exit(1);
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn lattice(r: &mut ChaCha8Rng, half: i64) -> [i64; 3] {
    [r.random_range(-half..=half), r.random_range(-half..=half), r.random_range(-half..=half)]
}

fn add(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Random permutation of the axes with random signs.
fn signed_permutation(r: &mut ChaCha8Rng, c: [i64; 3]) -> [i64; 3] {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let p = perms[r.random_range(0..6)];
    p.map(|i| if r.random_bool(0.5) { c[i] } else { -c[i] })
}

fn random_potential(r: &mut ChaCha8Rng) -> Potential {
    if r.random_bool(0.5) {
        Potential::yukawa(r.random_range(0.01..0.4), r.random_range(0.5..2.0)).unwrap()
    } else {
        Potential::gaussian(r.random_range(-0.4..0.4), r.random_range(0.5..2.0)).unwrap()
    }
}

fn random_grid(r: &mut ChaCha8Rng) -> MomentumGrid {
    let n = [5, 7, 9][r.random_range(0..3)];
    MomentumGrid::new(r.random_range(6.0..10.0), n).unwrap()
}

/// A random process with a real potential. Equal-mass processes are built
/// on shell; unequal-mass pairs carry a fixed resolvent energy.
fn random_spec(r: &mut ChaCha8Rng) -> ProcessSpec {
    loop {
        let grid = random_grid(r);
        let half = (grid.n_points() / 2) as i64;
        let pot = random_potential(r);
        let order = r.random_range(1..=2);
        let on = |c: &[i64; 3]| grid.index_of_coords(c).is_some();
        let p = |c: &[i64; 3]| grid.lattice_momentum(c);
        match r.random_range(0..4) {
            0 => {
                let a = lattice(r, half);
                let b = signed_permutation(r, a);
                if a == b {
                    continue;
                }
                return ProcessSpec::single(p(&a), p(&b), r.random_range(0.5..2.0), pot, order, grid);
            }
            k @ (1 | 2) => {
                let centre = lattice(r, 1);
                let rel = lattice(r, half - 1);
                let rel_out = signed_permutation(r, rel);
                let (a, b) = (add(centre, rel), sub(centre, rel));
                let (c, d) = (add(centre, rel_out), sub(centre, rel_out));
                if ![a, b, c, d].iter().all(on) || (a == c && b == d) {
                    continue;
                }
                let (kind, sign) = if k == 1 {
                    (ProcessKind::PairDistinguishable, 1.0)
                } else {
                    (ProcessKind::PairIdentical, if r.random_bool(0.5) { 1.0 } else { -1.0 })
                };
                let m = r.random_range(0.5..2.0);
                return ProcessSpec::pair(kind, [p(&a), p(&b)], [p(&c), p(&d)], [m, m], sign, pot, order, grid);
            }
            _ => {
                let (a, b, c) = (lattice(r, half), lattice(r, half), lattice(r, half));
                let d = sub(add(a, b), c);
                if !on(&d) || (a == c && b == d) {
                    continue;
                }
                let masses = [r.random_range(0.5..2.0), r.random_range(0.5..2.0)];
                return ProcessSpec::pair(
                    ProcessKind::PairDistinguishable,
                    [p(&a), p(&b)],
                    [p(&c), p(&d)],
                    masses,
                    1.0,
                    pot,
                    order,
                    grid,
                )
                .with_energy(r.random_range(0.2..3.0));
            }
        }
    }
}

fn reciprocity() -> Outcome {
    let mut r = rng(1);
    let count = 600;
    let (mut worst, mut worst_neg) = (0.0f64, 0.0f64);
    let mut kinds = [0usize; 3];
    for _ in 0..count {
        let spec = random_spec(&mut r);
        kinds[spec.kind as usize] += 1;
        let scale = 1.0 + amplitude(&spec).unwrap().scattered_part.norm();
        worst = worst.max(reciprocity_residual(&spec).unwrap() / scale);
        let neg = spec.negated();
        let scale = 1.0 + amplitude(&neg).unwrap().scattered_part.norm();
        worst_neg = worst_neg.max(reciprocity_residual(&neg).unwrap() / scale);
    }
    Outcome {
        pass: worst <= 1e-12 && worst_neg <= 1e-12,
        detail: format!(
            "{count} specs (single {}, distinguishable {}, identical {}), max residual/(1+|C|) = {worst:e}, \
             negated {worst_neg:e} (limit 1e-12)",
            kinds[0], kinds[1], kinds[2]
        ),
    }
}

fn rutherford() -> Outcome {
    let coulomb = Potential::coulomb(1.0).unwrap();
    let k = 1.3;
    let p = Momentum3::new(k, 0.0, 0.0);
    let samples: Vec<(f64, f64)> = linspace(20.0, 160.0, 141)
        .into_iter()
        .map(|deg: f64| {
            let t = deg.to_radians();
            let out = Momentum3::new(k * t.cos(), k * t.sin(), 0.0);
            let c = born1_single(p, out, &coulomb).unwrap();
            ((t / 2.0).sin().ln(), c.norm_sqr().ln())
        })
        .collect();
    let exponent = slope(&samples);

    let q = Momentum3::new(0.0, 1.0, 0.0);
    let out = p - q;
    let yukawa = |mu: f64| born1_single(p, out, &Potential::yukawa(1.0, mu).unwrap()).unwrap().re;
    let (m1, m2) = (0.05f64, 0.025f64);
    let (v1, v2) = (yukawa(m1), yukawa(m2));
    // Linear in mu^2: extrapolate the last two points to mu = 0.
    let limit = v2 - m2 * m2 * (v1 - v2) / (m1 * m1 - m2 * m2);
    let closed = born1_single(p, out, &coulomb).unwrap().re;
    let rel = (limit / closed - 1.0).abs();
    let coarse = (yukawa(0.1) / closed - 1.0).abs();
    Outcome {
        pass: (exponent + 4.0).abs() <= 0.01 && rel <= 5e-3,
        detail: format!(
            "sin(theta/2) exponent {exponent:.6} (target -4.00 +- 0.01); Yukawa mu->0 extrapolation off Coulomb \
             by {rel:e} (limit 5e-3; mu = 0.1 alone is off by {coarse:e})"
        ),
    }
}

fn slope(samples: &[(f64, f64)]) -> f64 {
    scatter_core::transition::least_squares_slope(samples)
}

fn fft_oracle() -> Outcome {
    let grid = SpatialGrid::new(40.0, 128).unwrap();
    let rows = fft_oracle_study(&grid, 1.0, 0.5, &EpsilonSchedule::default()).unwrap();
    let d: Vec<f64> = rows.iter().map(|r| r.discrepancy).collect();
    let monotone = d.windows(2).all(|w| w[1] < w[0]);
    let last = *d.last().unwrap();
    Outcome {
        pass: monotone && last <= 0.02,
        detail: format!(
            "L = 40, n = 128, dt = 0.5: discrepancy {} along eps = 1e-1, 1e-2, 1e-3 (limit 0.02 at 1e-3), \
             monotone {monotone}; the kernel's chirp exceeds the grid Nyquist wavenumber on the inner half-box",
            d.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" / ")
        ),
    }
}

fn free_propagation() -> Outcome {
    let grid = SpatialGrid::new(32.0, 64).unwrap();
    let sigma0 = 1.0;
    let psi = ComplexField::from_fn(grid, 0.0, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        Complex64::new((-r2 / (4.0 * sigma0 * sigma0)).exp(), 0.0)
    });
    let out = propagate_state(&psi, 2.0, 1.0).unwrap();
    let width_err =
        (0..3).map(|axis| (out.variance(axis).sqrt() / (2f64.sqrt() * sigma0) - 1.0).abs()).fold(0.0, f64::max);
    let norm_err = (out.norm() / psi.norm() - 1.0).abs();

    let moving = ComplexField::from_fn(grid, 0.0, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        Complex64::from_polar((-r2 / 3.0).exp(), 0.8 * x[0] - 0.3 * x[2])
    });
    let two = propagate_state(&propagate_state(&moving, 0.7, 1.0).unwrap(), 1.3, 1.0).unwrap();
    let one = propagate_state(&moving, 2.0, 1.0).unwrap();
    let semigroup = two.values().iter().zip(one.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Outcome {
        pass: width_err <= 1e-4 && norm_err <= 1e-12 && semigroup <= 1e-10,
        detail: format!(
            "width relative error {width_err:e} (limit 1e-4), norm drift {norm_err:e} (limit 1e-12), \
             semigroup error {semigroup:e} (limit 1e-10)"
        ),
    }
}

fn unit(r: &mut ChaCha8Rng) -> Momentum3 {
    let cos_t: f64 = r.random_range(-1.0..1.0);
    Momentum3::direction(cos_t.acos(), r.random_range(0.0..2.0 * PI))
}

fn vec3(r: &mut ChaCha8Rng, x: f64) -> Momentum3 {
    Momentum3::new(r.random_range(-x..x), r.random_range(-x..x), r.random_range(-x..x))
}

/// Lab speeds `t > 0` along `u` that land on the centre-of-mass velocity
/// sphere of the constrained particle; `None` too close to a tangency.
fn ray_sphere_roots(centre: Momentum3, radius: f64, u: Momentum3) -> Option<usize> {
    let s = centre.dot(&u);
    let disc = radius * radius - (centre.norm_sqr() - s * s);
    let scale = radius * radius + centre.norm_sqr();
    if disc.abs() <= 1e-9 * scale {
        return None;
    }
    if disc < 0.0 {
        return Some(0);
    }
    let roots = [s - disc.sqrt(), s + disc.sqrt()];
    if roots.iter().any(|t| t.abs() <= 1e-9 * scale.sqrt()) {
        return None;
    }
    Some(roots.iter().filter(|t| **t > 0.0).count())
}

fn kinematics() -> Outcome {
    let mut r = rng(5);
    let calls = 100_000;
    let (mut stored, mut ulps, mut energy, mut right_angle) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut mismatched, mut compared) = (0usize, 0usize);
    for i in 0..calls {
        let equal_mass_at_rest = i % 5 == 0;
        let (m1, m2, p1, p2) = if equal_mass_at_rest {
            let m = r.random_range(0.1..10.0);
            (m, m, vec3(&mut r, 5.0), Momentum3::ZERO)
        } else {
            (r.random_range(0.1..10.0), r.random_range(0.1..10.0), vec3(&mut r, 5.0), vec3(&mut r, 5.0))
        };
        let which = if i % 2 == 0 { Constrained::First } else { Constrained::Second };
        let inp =
            CollisionInput::new([FreeParticle::new(m1, 0.0).unwrap(), FreeParticle::new(m2, 0.0).unwrap()], [p1, p2]);
        let u = unit(&mut r);
        let outs = solve_outgoing(&inp, u, which).unwrap();

        let total = p1 + p2;
        let e_in = p1.norm_sqr() / (2.0 * m1) + p2.norm_sqr() / (2.0 * m2);
        for o in &outs {
            let [q1, q2] = o.momenta_out;
            stored = stored.max(o.conservation_residual.momentum.norm());
            let scale = total.norm().max(q1.norm()).max(q2.norm()).max(1.0);
            ulps = ulps.max((q1 + q2 - total).norm() / (scale * f64::EPSILON));
            let e_out = q1.norm_sqr() / (2.0 * m1) + q2.norm_sqr() / (2.0 * m2);
            energy = energy.max((e_out - e_in).abs() / e_in);
            if equal_mass_at_rest && !o.is_forward {
                right_angle = right_angle.max(q1.dot(&q2).abs() / p1.norm_sqr());
            }
        }

        // Geometric oracle: velocity sphere of the constrained particle in the
        // centre-of-mass frame, seen from the lab origin.
        let (m, p_own) = match which {
            Constrained::First => (m1, p1),
            Constrained::Second => (m2, p2),
        };
        let v_cm = (1.0 / (m1 + m2)) * total;
        let radius = (p_own - m * v_cm).norm() / m;
        if let Some(expected) = ray_sphere_roots(v_cm, radius, u) {
            compared += 1;
            if outs.len() != expected {
                mismatched += 1;
            }
        }
    }
    Outcome {
        pass: stored == 0.0 && ulps <= 4.0 && energy <= 1e-12 && right_angle <= 1e-10 && mismatched == 0,
        detail: format!(
            "{calls} calls: stored momentum residual {stored:e}, recomputed p1' + p2' - P within {ulps:.1} ulp (limit 4), max relative energy \
             residual {energy:e} (limit 1e-12), equal-mass right-angle defect {right_angle:e} (limit 1e-10), \
             root count disagrees with the geometric oracle in {mismatched} of {compared} directions"
        ),
    }
}

fn unitarity() -> Outcome {
    let mut r = rng(6);
    let count = 200;
    let (mut defect, mut sum_rule) = (0.0f64, 0.0f64);
    for k in 0..count {
        let n = r.random_range(2..=64);
        let sys = FiniteSystem::random(n, r.random_range(0.05..2.0), k, None).unwrap();
        let s = s_matrix(&sys, r.random_range(0.5..10.0), SMatrixMethod::Exact).unwrap();
        defect = defect.max(unitarity_defect(&s) / (1e-10 * n as f64));
        for j in 0..n {
            sum_rule = sum_rule.max(t1_and_sum_rule(&s, j).unwrap().1);
        }
    }

    let mut ratios = Vec::new();
    for seed in 0..5 {
        let sys = FiniteSystem::random(6, 0.05, 100 + seed, None).unwrap();
        let horizon = 2.0;
        let residual = |sys: &FiniteSystem| {
            let exact = s_matrix(sys, horizon, SMatrixMethod::Exact).unwrap();
            let born = s_matrix(sys, horizon, SMatrixMethod::Born(1)).unwrap();
            (born - exact).norm()
        };
        ratios.push(residual(&sys) / residual(&sys.with_h1_scaled(0.5)));
    }
    let worst_ratio = ratios.iter().map(|x| (x - 4.0).abs()).fold(0.0, f64::max);
    Outcome {
        pass: defect <= 1.0 && sum_rule <= 1e-10 && worst_ratio <= 0.2,
        detail: format!(
            "{count} systems: max unitarity defect / (1e-10 N) = {defect:.3e} (limit 1), max sum-rule residual \
             {sum_rule:e} (limit 1e-10); order-1 residual ratio under coupling halving {} (4.0 +- 0.2)",
            ratios.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn dyson() -> Outcome {
    let mut r = rng(7);
    let count = 50;
    let mut worst = 0.0f64;
    for k in 0..count {
        let span = r.random_range(0.5..2.0);
        let t0 = r.random_range(-1.0..1.0);
        let h0: Vec<f64> = (0..4).map(|_| r.random_range(-1.5..1.5)).collect();
        let sys = FiniteSystem::random(4, 0.1 / span, 1000 + k, Some(h0)).unwrap();
        let exact = evolve_exact(&sys, t0 + span, t0);
        for a in 0..4 {
            for b in 0..4 {
                let series: Complex64 = (0..=3).map(|n| dyson_term(&sys, n, t0 + span, t0, b, a, 32).unwrap()).sum();
                worst = worst.max((series - exact[(a, b)]).norm());
            }
        }
    }
    let taylor = 0.1f64.powi(4) / 24.0 * 0.1f64.exp();
    Outcome {
        pass: worst <= 2e-4,
        detail: format!(
            "{count} four-level systems at ||H1||(t - t0) = 0.1: max element error {worst:e} (limit 2e-4; \
             fourth-order remainder bound {taylor:.3e})"
        ),
    }
}

fn golden_rule() -> Outcome {
    let (band, delta, g) = (201, 0.01, 0.1);
    let sys = FiniteSystem::quasi_continuum(band, delta, g).unwrap();
    let expected = 2.0 * PI * g * g / delta;
    let window = linspace(5.0 / expected * 0.1, 0.5 * 2.0 * PI / delta, 200);
    let fit = fit_golden_rule_rate(&sys, 0, &window).unwrap();
    let rel = (fit.rate / expected - 1.0).abs();
    let exact = fit_exact_decay_rate(&sys, 0, &linspace(window[0], 3.0 / expected, 40)).unwrap();
    Outcome {
        pass: rel <= 0.05,
        detail: format!(
            "N = {band}, spacing {delta}, g = {g}: fitted rate {:.6} vs 2 pi g^2 / spacing = {expected:.6}, \
             relative error {rel:e} (limit 0.05); exact-evolution decay fit {:.4} (information only)",
            fit.rate, exact.rate
        ),
    }
}

fn identical() -> Outcome {
    let mut r = rng(9);
    let grid = MomentumGrid::new(8.0, 9).unwrap();
    let p = |c: &[i64; 3]| grid.lattice_momentum(c);
    let on = |c: &[i64; 3]| grid.index_of_coords(c).is_some();
    let (mut asym, mut coincident, mut recip) = (0.0f64, 0.0f64, 0.0f64);
    let mut cases = 0;
    while cases < 300 {
        let sign = if cases % 2 == 0 { 1.0 } else { -1.0 };
        let pot = random_potential(&mut r);
        let order = r.random_range(1..=2);
        let (a, b, c) = (lattice(&mut r, 4), lattice(&mut r, 4), lattice(&mut r, 4));
        let d = sub(add(a, b), c);
        if !on(&d) {
            continue;
        }
        cases += 1;
        let spec = |o1: &[i64; 3], o2: &[i64; 3]| {
            ProcessSpec::pair(
                ProcessKind::PairIdentical,
                [p(&a), p(&b)],
                [p(o1), p(o2)],
                [1.0, 1.0],
                sign,
                pot.clone(),
                order,
                grid,
            )
            .with_energy(1.2)
        };
        let x = amplitude(&spec(&c, &d)).unwrap().scattered_part;
        let y = amplitude(&spec(&d, &c)).unwrap().scattered_part;
        asym = asym.max((y - sign * x).norm());
        recip = recip.max(reciprocity_residual(&spec(&c, &d)).unwrap() / (1.0 + x.norm()));

        // Both fermions into one momentum.
        let s = add(a, b);
        if s.iter().all(|v| v % 2 == 0) {
            let half = s.map(|v| v / 2);
            if on(&half) {
                let f = ProcessSpec::pair(
                    ProcessKind::PairIdentical,
                    [p(&a), p(&b)],
                    [p(&half), p(&half)],
                    [1.0, 1.0],
                    -1.0,
                    pot.clone(),
                    order,
                    grid,
                )
                .with_energy(1.2);
                coincident = coincident.max(amplitude(&f).unwrap().scattered_part.norm());
            }
        }
    }
    Outcome {
        pass: asym <= 1e-14 && coincident == 0.0 && recip <= 1e-12,
        detail: format!(
            "{cases} processes: max |C(p2', p1') - s C(p1', p2')| = {asym:e} (limit 1e-14), fermion amplitude \
             at p1' = p2' {coincident:e}, max reciprocity residual/(1+|C|) {recip:e}"
        ),
    }
}

fn cli_determinism() -> Outcome {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let cases = [
        ("kinematics", "kinematics"),
        ("greens-check", "greens_check"),
        ("amplitude", "amplitude_single"),
        ("amplitude", "amplitude_pair"),
        ("xsec", "xsec_coulomb"),
        ("reciprocity", "reciprocity_pair"),
        ("smatrix", "smatrix"),
        ("goldenrule", "goldenrule"),
    ];
    let run = |cmd: &str, name: &str| -> Vec<u8> {
        let o = Command::new(env!("CARGO_BIN_EXE_scatter"))
            .args([cmd, "--config"])
            .arg(root.join("scenarios").join(format!("{name}.scn")))
            .env_remove("SOURCE_DATE_EPOCH")
            .output()
            .expect("binary runs");
        assert!(o.status.success(), "{cmd} {name}: {}", String::from_utf8_lossy(&o.stderr));
        o.stdout
    };
    let mut differing = Vec::new();
    for (cmd, name) in cases {
        let (a, b) = (run(cmd, name), run(cmd, name));
        let golden = std::fs::read(root.join("tests/golden").join(format!("{name}.csv"))).unwrap_or_default();
        if a != b || a != golden {
            differing.push(name);
        }
    }
    Outcome {
        pass: differing.is_empty(),
        detail: format!(
            "{} scenarios over all 7 subcommands run twice: outputs differing from each other or the golden \
             files: {differing:?}",
            cases.len()
        ),
    }
}
