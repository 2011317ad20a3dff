use std::f64::consts::PI;

use num_complex::Complex64;
use scatter_core::born::{born1_single, MomentumGrid, Potential};
use scatter_core::born::{dyson_matrix, MAX_DYSON_ORDER};
use scatter_core::greenfn::{fft_oracle_study, EpsilonSchedule, SpatialGrid};
use scatter_core::kinematics::{solve_outgoing, CollisionInput, Constrained, FreeParticle, Momentum3};
use scatter_core::smatrix::{
    evolve_exact, operator_norm, s_matrix, t1_and_sum_rule, unitarity_defect, EvolutionReport, FiniteSystem,
    SMatrixMethod,
};
use scatter_core::transition::{
    amplitude, detector_amplitude, detector_amplitude_identical, fit_golden_rule_rate, linspace, probability,
    summed_golden_rule_rate, ProcessKind, ProcessSpec,
};

use crate::error::{CliError, ParseError};
use crate::scenario::{
    FiniteKind, GridSection, PotentialName, PotentialSection, ProcessName, ProcessSection, Scenario, Sweep, Units,
};
use crate::table::{Cell, Metadata, ResultTable};

/// Largest system for which `smatrix` also sums the Dyson terms directly.
pub const DYSON_MAX_LEVELS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    Kinematics,
    GreensCheck,
    Amplitude,
    Xsec,
    Reciprocity,
    Smatrix,
    Goldenrule,
}

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::Kinematics,
        Subcommand::GreensCheck,
        Subcommand::Amplitude,
        Subcommand::Xsec,
        Subcommand::Reciprocity,
        Subcommand::Smatrix,
        Subcommand::Goldenrule,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Kinematics => "kinematics",
            Subcommand::GreensCheck => "greens-check",
            Subcommand::Amplitude => "amplitude",
            Subcommand::Xsec => "xsec",
            Subcommand::Reciprocity => "reciprocity",
            Subcommand::Smatrix => "smatrix",
            Subcommand::Goldenrule => "goldenrule",
        }
    }
}

pub fn run(cmd: Subcommand, scenario: &Scenario) -> Result<ResultTable, CliError> {
    let ctx = Ctx { cmd, s: scenario };
    let meta = Metadata::new(cmd.name(), scenario.hash());
    match cmd {
        Subcommand::Kinematics => ctx.kinematics(meta),
        Subcommand::GreensCheck => ctx.greens_check(meta),
        Subcommand::Amplitude => ctx.amplitude(meta),
        Subcommand::Xsec => ctx.xsec(meta),
        Subcommand::Reciprocity => ctx.reciprocity(meta),
        Subcommand::Smatrix => ctx.smatrix(meta),
        Subcommand::Goldenrule => ctx.goldenrule(meta),
    }
}

struct Ctx<'a> {
    cmd: Subcommand,
    s: &'a Scenario,
}

fn vector(p: Momentum3) -> [Cell; 3] {
    p.to_array().map(Cell::Float)
}

fn complex(c: Complex64) -> [Cell; 3] {
    [c.re.into(), c.im.into(), c.norm_sqr().into()]
}

/// Orthonormal `(u, v)` with `u` along `p` (or `x` when `p` vanishes).
fn sweep_plane(p: Momentum3) -> (Momentum3, Momentum3) {
    let u = if p.norm() > 0.0 { (1.0 / p.norm()) * p } else { Momentum3::new(1.0, 0.0, 0.0) };
    let axes = [Momentum3::new(1.0, 0.0, 0.0), Momentum3::new(0.0, 1.0, 0.0), Momentum3::new(0.0, 0.0, 1.0)];
    let axis = axes.into_iter().min_by(|a, b| a.dot(&u).abs().total_cmp(&b.dot(&u).abs())).expect("three axes");
    let w = axis - axis.dot(&u) * u;
    (u, (1.0 / w.norm()) * w)
}

fn rotated(u: Momentum3, v: Momentum3, theta_deg: f64) -> Momentum3 {
    let t = theta_deg.to_radians();
    t.cos() * u + t.sin() * v
}

impl Ctx<'_> {
    fn missing(&self, section: &str) -> CliError {
        CliError::Parse(vec![ParseError::general(format!(
            "missing section [{section}] required by `{}`",
            self.cmd.name()
        ))])
    }

    fn invalid(&self, msg: impl Into<String>) -> CliError {
        CliError::Parse(vec![ParseError::general(format!("{}: {}", self.cmd.name(), msg.into()))])
    }

    fn core<T>(&self, what: &str, r: scatter_core::Result<T>) -> Result<T, CliError> {
        r.map_err(|e| CliError::from_core(format!("{} ({what})", self.cmd.name()), e))
    }

    fn grid_section(&self) -> Result<GridSection, CliError> {
        self.s.grid.ok_or_else(|| self.missing("grid"))
    }

    fn momentum_grid(&self) -> Result<MomentumGrid, CliError> {
        let g = self.grid_section()?;
        self.core("grid", MomentumGrid::new(g.side, g.n_points))
    }

    fn process(&self) -> Result<&ProcessSection, CliError> {
        self.s.process.as_ref().ok_or_else(|| self.missing("process"))
    }

    fn potential(&self) -> Result<Potential, CliError> {
        let p: &PotentialSection = self.s.potential.as_ref().ok_or_else(|| self.missing("potential"))?;
        let pot = match p.kind {
            PotentialName::Yukawa => Potential::yukawa(p.alpha, p.mu),
            PotentialName::Coulomb => Potential::coulomb(p.alpha),
            PotentialName::Gaussian => Potential::gaussian(p.alpha, p.width),
        };
        self.core("potential", pot)
    }

    fn to_momentum(&self, v: [f64; 3], units: Units) -> Result<Momentum3, CliError> {
        let scale = match units {
            Units::Absolute => 1.0,
            Units::Lattice => 2.0 * PI / self.grid_section()?.side,
        };
        Ok(Momentum3::new(scale * v[0], scale * v[1], scale * v[2]))
    }

    fn momenta(&self, p: &ProcessSection) -> Result<(Vec<Momentum3>, Vec<Momentum3>), CliError> {
        let conv = |vs: &[[f64; 3]]| vs.iter().map(|v| self.to_momentum(*v, p.units)).collect::<Result<Vec<_>, _>>();
        Ok((conv(&p.momenta_in)?, conv(&p.momenta_out)?))
    }

    fn thetas(&self, p: &ProcessSection) -> Vec<f64> {
        linspace(p.theta_min, p.theta_max, p.theta_points)
    }

    fn spec(&self, p: &ProcessSection, pin: &[Momentum3], pout: &[Momentum3]) -> Result<ProcessSpec, CliError> {
        let grid = self.momentum_grid()?;
        let pot = self.potential()?;
        let order = self.s.numerics.order;
        let masses = &self.s.system.masses;
        let spec = match p.kind {
            ProcessName::Single => ProcessSpec::single(pin[0], pout[0], masses[0], pot, order, grid),
            kind => {
                let kind = if kind == ProcessName::Identical {
                    ProcessKind::PairIdentical
                } else {
                    ProcessKind::PairDistinguishable
                };
                ProcessSpec::pair(
                    kind,
                    [pin[0], pin[1]],
                    [pout[0], pout[1]],
                    [masses[0], masses[1]],
                    p.exchange_sign,
                    pot,
                    order,
                    grid,
                )
            }
        };
        Ok(match self.s.numerics.epsilon {
            Some(e) => spec.with_epsilon(e),
            None => spec,
        })
    }

    fn collision(&self, pin: &[Momentum3]) -> Result<CollisionInput, CliError> {
        let m = &self.s.system.masses;
        if m.len() != 2 || pin.len() != 2 {
            return Err(self.invalid("needs a two-particle process"));
        }
        let particle = |mass| self.core("particle", FreeParticle::new(mass, 0.0));
        Ok(CollisionInput::new([particle(m[0])?, particle(m[1])?], [pin[0], pin[1]]))
    }

    fn finite_system(&self) -> Result<FiniteSystem, CliError> {
        let s = &self.s.system;
        let sys = match s.finite {
            FiniteKind::Random => FiniteSystem::random(s.levels, s.coupling, self.s.numerics.seed, s.energies.clone()),
            FiniteKind::QuasiContinuum => FiniteSystem::quasi_continuum(s.levels, s.level_spacing, s.coupling),
        };
        self.core("finite system", sys)
    }

    fn kinematics(&self, meta: Metadata) -> Result<ResultTable, CliError> {
        let p = self.process()?;
        let (pin, _) = self.momenta(p)?;
        let inp = self.collision(&pin)?;
        let mut t = ResultTable::new(
            meta,
            &[
                "theta_deg",
                "constrained",
                "root",
                "allowed",
                "is_forward",
                "p1_x",
                "p1_y",
                "p1_z",
                "p2_x",
                "p2_y",
                "p2_z",
                "energy_residual",
                "momentum_residual",
            ],
        );
        let (u, v) = sweep_plane(pin[0]);
        for theta in self.thetas(p) {
            let dir = rotated(u, v, theta);
            for (which, label) in [(Constrained::First, "first"), (Constrained::Second, "second")] {
                let outcomes = self.core("solve_outgoing", solve_outgoing(&inp, dir, which))?;
                if outcomes.is_empty() {
                    let mut row = vec![theta.into(), label.into(), Cell::Empty, false.into()];
                    row.resize(13, Cell::Empty);
                    t.push(row);
                }
                for (k, o) in outcomes.iter().enumerate() {
                    let mut row = vec![theta.into(), label.into(), k.into(), true.into(), o.is_forward.into()];
                    row.extend(vector(o.momenta_out[0]));
                    row.extend(vector(o.momenta_out[1]));
                    row.push(o.conservation_residual.energy.into());
                    row.push(o.conservation_residual.momentum.norm().into());
                    t.push(row);
                }
            }
        }
        Ok(t)
    }

    fn greens_check(&self, meta: Metadata) -> Result<ResultTable, CliError> {
        let g = self.grid_section()?;
        let grid = self.core("spatial grid", SpatialGrid::new(g.side, g.n_points))?;
        let n = &self.s.numerics;
        let values = match n.epsilon {
            Some(e) => vec![e],
            None => n.epsilon_schedule.clone(),
        };
        let schedule = self.core("epsilon schedule", EpsilonSchedule::new(values))?;
        let mass = self.s.system.masses[0];
        let rows = self.core("FFT oracle", fft_oracle_study(&grid, mass, n.dt, &schedule))?;
        let mut t = ResultTable::new(meta, &["epsilon", "discrepancy", "decreased"]);
        let mut monotone = true;
        for (k, r) in rows.iter().enumerate() {
            let decreased = if k == 0 {
                Cell::Empty
            } else {
                let d = r.discrepancy < rows[k - 1].discrepancy;
                monotone &= d;
                d.into()
            };
            t.push(vec![r.epsilon.into(), r.discrepancy.into(), decreased]);
        }
        t.note("dt", n.dt);
        t.note("mass", mass);
        t.note("monotone", monotone);
        Ok(t)
    }

    fn amplitude(&self, meta: Metadata) -> Result<ResultTable, CliError> {
        let p = self.process()?;
        match (p.sweep, p.kind) {
            (Sweep::Momentum, _) => self.amplitude_momentum_sweep(meta, p),
            (Sweep::Angle, ProcessName::Single) => self.amplitude_angle_single(meta, p),
            (Sweep::Angle, _) => self.amplitude_angle_pair(meta, p),
        }
    }

    fn amplitude_momentum_sweep(&self, meta: Metadata, p: &ProcessSection) -> Result<ResultTable, CliError> {
        let grid = self.momentum_grid()?;
        let (pin, pout) = self.momenta(p)?;
        let step = pout[0];
        if step.norm() == 0.0 {
            return Err(self.invalid("momentum sweep needs a nonzero momenta_out step"));
        }
        let total = pin.iter().fold(Momentum3::new(0.0, 0.0, 0.0), |a, b| a + *b);
        let mut t = ResultTable::new(
            meta,
            &["step", "p1_x", "p1_y", "p1_z", "p2_x", "p2_y", "p2_z", "delta_part", "c_re", "c_im", "abs_c2"],
        );
        for k in 1.. {
            let p1 = k as f64 * step;
            if grid.index_of(p1).is_none() {
                break;
            }
            let out = if p.particles() == 1 { vec![p1] } else { vec![p1, total - p1] };
            if out.iter().any(|q| grid.index_of(*q).is_none()) {
                break;
            }
            let spec = self.spec(p, &pin, &out)?;
            let a = self.core("amplitude", amplitude(&spec))?;
            let mut row = vec![Cell::from(k as usize)];
            row.extend(vector(p1));
            match out.get(1) {
                Some(p2) => row.extend(vector(*p2)),
                None => row.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
            }
            row.push(a.delta_part.into());
            row.extend(complex(a.scattered_part));
            t.push(row);
        }
        Ok(t)
    }

    fn amplitude_angle_single(&self, meta: Metadata, p: &ProcessSection) -> Result<ResultTable, CliError> {
        let grid = self.momentum_grid()?;
        let (pin, _) = self.momenta(p)?;
        let (u, v) = sweep_plane(pin[0]);
        let k = pin[0].norm();
        let mut t = ResultTable::new(
            meta,
            &["theta_deg", "p_out_x", "p_out_y", "p_out_z", "snap_distance", "c_re", "c_im", "abs_c2", "status"],
        );
        for theta in self.thetas(p) {
            let (idx, snap) = grid.nearest(k * rotated(u, v, theta));
            let pout = grid.momentum(idx);
            let mut row = vec![theta.into()];
            row.extend(vector(pout));
            row.push(snap.into());
            if pout == pin[0] {
                row.extend([Cell::Empty, Cell::Empty, Cell::Empty, "forward".into()]);
            } else {
                let spec = self.spec(p, &pin, &[pout])?;
                let a = self.core("amplitude", amplitude(&spec))?;
                row.extend(complex(a.scattered_part));
                row.push("ok".into());
            }
            t.push(row);
        }
        Ok(t)
    }

    fn amplitude_angle_pair(&self, meta: Metadata, p: &ProcessSection) -> Result<ResultTable, CliError> {
        let grid = self.momentum_grid()?;
        let pot = self.potential()?;
        let (pin, _) = self.momenta(p)?;
        let inp = self.collision(&pin)?;
        let order = self.s.numerics.order;
        let (u, v) = sweep_plane(pin[0]);
        let mut t = ResultTable::new(
            meta,
            &[
                "theta_deg",
                "channels",
                "max_snap_distance",
                "c_a_re",
                "c_a_im",
                "c_b_re",
                "c_b_im",
                "c_re",
                "c_im",
                "abs_c2",
            ],
        );
        for theta in self.thetas(p) {
            let dir = rotated(u, v, theta);
            let reading = if p.kind == ProcessName::Identical {
                detector_amplitude_identical(&inp, dir, &pot, order, &grid, p.exchange_sign)
            } else {
                detector_amplitude(&inp, dir, &pot, order, &grid)
            };
            let r = self.core("detector amplitude", reading)?;
            let mut row = vec![
                theta.into(),
                (r.channels_a.len() + r.channels_b.len()).into(),
                r.max_snap_distance().into(),
                r.amplitude_a.re.into(),
                r.amplitude_a.im.into(),
                r.amplitude_b.re.into(),
                r.amplitude_b.im.into(),
            ];
            row.extend(complex(r.total));
            t.push(row);
        }
        Ok(t)
    }

    fn xsec(&self, meta: Metadata) -> Result<ResultTable, CliError> {
        let p = self.process()?;
        if p.kind != ProcessName::Single {
            return Err(self.invalid("needs a single-particle process"));
        }
        let pot = self.potential()?;
        let pin = self.to_momentum(p.momenta_in[0], p.units)?;
        let order = self.s.numerics.order;
        let (u, v) = sweep_plane(pin);
        let k = pin.norm();
        let mut t = ResultTable::new(meta, &["theta_deg", "q", "snap_distance", "c_re", "c_im", "dsigma_domega"]);
        for theta in self.thetas(p) {
            let target = k * rotated(u, v, theta);
            let (pout, snap, c) = if order == 1 {
                let c = self.core("born1_single", born1_single(pin, target, &pot))?;
                (target, Cell::Empty, c)
            } else {
                let grid = self.momentum_grid()?;
                let (idx, d) = grid.nearest(target);
                let pout = grid.momentum(idx);
                let spec = self.spec(p, &[pin], &[pout])?;
                (pout, d.into(), self.core("amplitude", amplitude(&spec))?.scattered_part)
            };
            let mut row = vec![theta.into(), (pin - pout).norm().into(), snap];
            row.extend(complex(c));
            t.push(row);
        }
        Ok(t)
    }

    fn reciprocity(&self, meta: Metadata) -> Result<ResultTable, CliError> {
        let p = self.process()?;
        let (pin, pout) = self.momenta(p)?;
        let base = self.spec(p, &pin, &pout)?;
        if !base.potential.is_real() {
            return Err(self.invalid("reciprocity needs a real potential"));
        }
        // One resolvent for the process and all its images, on shell or not.
        let energy = self.core("energy", base.resolved_energy())?;
        let epsilon = self.core("epsilon", base.resolved_epsilon())?;
        let base = base.with_energy(energy).with_epsilon(epsilon);
        let mut t = ResultTable::new(
            meta,
            &[
                "variant",
                "c_re",
                "c_im",
                "c_rev_re",
                "c_rev_im",
                "residual",
                "tolerance",
                "probability",
                "probability_rev",
                "pass",
            ],
        );
        let variants = [
            ("spec", base.clone()),
            ("reversed", base.reversed()),
            ("negated", base.negated()),
            ("negated_reversed", base.negated().reversed()),
        ];
        let mut worst = 0.0f64;
        let mut all = true;
        for (label, spec) in variants {
            let fwd = self.core(label, amplitude(&spec))?;
            let rev = self.core(label, amplitude(&spec.reversed()))?;
            let residual = (fwd.scattered_part - rev.scattered_part).norm();
            let tolerance = 1e-12 * (1.0 + fwd.scattered_part.norm());
            let pass = residual <= tolerance;
            worst = worst.max(residual);
            all &= pass;
            t.push(vec![
                label.into(),
                fwd.scattered_part.re.into(),
                fwd.scattered_part.im.into(),
                rev.scattered_part.re.into(),
                rev.scattered_part.im.into(),
                residual.into(),
                tolerance.into(),
                probability(&fwd).into(),
                probability(&rev).into(),
                pass.into(),
            ]);
        }
        t.note("max_residual", worst);
        t.note("all_pass", all);
        Ok(t)
    }

    fn smatrix(&self, meta: Metadata) -> Result<ResultTable, CliError> {
        let sys = self.finite_system()?;
        let n = &self.s.numerics;
        let (t1, t0) = (0.5 * n.horizon, -0.5 * n.horizon);
        let born_order = n.order.min(MAX_DYSON_ORDER);
        let report = self.core("evolution", EvolutionReport::compute(&sys, t1, t0, born_order))?;
        let x = sys.h1_norm() * n.horizon;
        let factorial: f64 = (1..=born_order + 1).map(|k| k as f64).product();
        let bound = x.powi(born_order as i32 + 1) / factorial * x.exp();

        let s = self.core("S matrix", s_matrix(&sys, n.horizon, SMatrixMethod::Exact))?;
        let mut sum_rule = 0.0f64;
        for k in 0..sys.dim() {
            sum_rule = sum_rule.max(self.core("sum rule", t1_and_sum_rule(&s, k))?.1);
        }
        let dyson = if sys.dim() <= DYSON_MAX_LEVELS {
            let exact = evolve_exact(&sys, t1, t0);
            let mut partial = exact.clone() * Complex64::new(0.0, 0.0);
            for k in 0..=born_order {
                partial += self.core("dyson", dyson_matrix(&sys, k, t1, t0, n.quadrature_points))?;
            }
            Cell::Float((partial - exact).iter().map(|z| z.norm()).fold(0.0, f64::max))
        } else {
            Cell::Empty
        };

        let mut t = ResultTable::new(meta, &["quantity", "value"]);
        let rows: Vec<(&str, Cell)> = vec![
            ("levels", sys.dim().into()),
            ("h1_norm", sys.h1_norm().into()),
            ("t0", t0.into()),
            ("t", t1.into()),
            ("born_order", born_order.into()),
            ("unitarity_defect", report.unitarity_defect.into()),
            ("born_unitarity_defect", report.born_unitarity_defect.into()),
            ("born_error_frobenius", report.born_error.into()),
            ("born_error_operator", operator_norm(&(&report.u_born - &report.u_exact)).into()),
            ("taylor_bound", bound.into()),
            ("dyson_max_element_error", dyson),
            ("s_unitarity_defect", unitarity_defect(&s).into()),
            ("sum_rule_residual_max", sum_rule.into()),
        ];
        for (k, v) in rows {
            t.push(vec![k.into(), v]);
        }
        Ok(t)
    }

    fn goldenrule(&self, meta: Metadata) -> Result<ResultTable, CliError> {
        let sys = self.finite_system()?;
        let s = &self.s.system;
        let n = &self.s.numerics;
        let expected = match s.finite {
            FiniteKind::QuasiContinuum => Some(2.0 * PI * s.coupling.powi(2) / s.level_spacing),
            FiniteKind::Random => None,
        };
        let (lo_default, hi_default) = match expected {
            Some(g) => (0.5 / g, PI / s.level_spacing),
            None => (0.1 * n.horizon, n.horizon),
        };
        let lo = n.horizon_min.unwrap_or(lo_default);
        let hi = n.horizon_max.unwrap_or(hi_default);
        if lo >= hi {
            return Err(self.invalid(format!("empty horizon window [{lo}, {hi}]")));
        }
        let horizons = linspace(lo, hi, n.horizon_points);
        let fit = self.core("golden-rule fit", fit_golden_rule_rate(&sys, 0, &horizons))?;
        let mut t = ResultTable::new(meta, &["horizon", "summed_rate", "transition_probability"]);
        for &h in &horizons {
            let rate = self.core("golden-rule rate", summed_golden_rule_rate(&sys, 0, h))?;
            t.push(vec![h.into(), rate.into(), (rate * h).into()]);
        }
        t.note("horizon_min", lo);
        t.note("horizon_max", hi);
        t.note("fitted_rate", fit.rate);
        match expected {
            Some(g) => {
                t.note("expected_rate", g);
                t.note("relative_error", (fit.rate - g).abs() / g);
            }
            None => {
                t.note("expected_rate", Cell::Empty);
                t.note("relative_error", Cell::Empty);
            }
        }
        Ok(t)
    }
}
