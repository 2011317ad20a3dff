//! Sectioned `key = value` scenario files.
//!
//! ```text
//! # comment
//! [system]
//! masses = 1.0, 1.0
//!
//! [process]
//! kind = distinguishable
//! momenta_in = (1, 0, 0), (-1, 0, 0)
//! ```
//!
//! Parsing is strict: unknown sections, unknown keys, duplicates and
//! out-of-range values are all reported together, each with its line.

use std::collections::BTreeMap;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiniteKind {
    Random,
    QuasiContinuum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSection {
    pub masses: Vec<f64>,
    pub finite: FiniteKind,
    pub levels: usize,
    pub coupling: f64,
    pub level_spacing: f64,
    /// Diagonal of `H0` for random systems; `0, 1, ..` when unset.
    pub energies: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSection {
    pub side: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialName {
    Yukawa,
    Coulomb,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSection {
    pub kind: PotentialName,
    pub alpha: f64,
    pub mu: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessName {
    Single,
    Distinguishable,
    Identical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    /// Integer multiples of `2 pi / L`.
    Lattice,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Angle,
    Momentum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSection {
    pub kind: ProcessName,
    pub units: Units,
    pub momenta_in: Vec<[f64; 3]>,
    pub momenta_out: Vec<[f64; 3]>,
    pub exchange_sign: f64,
    pub sweep: Sweep,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericsSection {
    pub epsilon: Option<f64>,
    pub epsilon_schedule: Vec<f64>,
    pub order: usize,
    pub horizon: f64,
    pub horizon_min: Option<f64>,
    pub horizon_max: Option<f64>,
    pub horizon_points: usize,
    pub dt: f64,
    pub quadrature_points: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub format: Format,
    pub path: Option<String>,
}

/// A validated scenario with every default filled in. Sections that were
/// absent from the file are `None`, except `numerics` and `output`, which
/// are always present.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub system: SystemSection,
    pub grid: Option<GridSection>,
    pub potential: Option<PotentialSection>,
    pub process: Option<ProcessSection>,
    pub numerics: NumericsSection,
    pub output: OutputSection,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            masses: vec![1.0],
            finite: FiniteKind::Random,
            levels: 4,
            coupling: 0.1,
            level_spacing: 0.01,
            energies: None,
        }
    }
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { side: 8.0, n_points: 9 }
    }
}

impl Default for PotentialSection {
    fn default() -> Self {
        PotentialSection { kind: PotentialName::Yukawa, alpha: 0.1, mu: 1.0, width: 1.0 }
    }
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            epsilon: None,
            epsilon_schedule: vec![1e-1, 1e-2, 1e-3],
            order: 1,
            horizon: 10.0,
            horizon_min: None,
            horizon_max: None,
            horizon_points: 200,
            dt: 2.0,
            quadrature_points: 32,
            seed: 0,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { format: Format::Csv, path: None }
    }
}

impl ProcessSection {
    fn defaults(kind: ProcessName) -> Self {
        let (momenta_in, momenta_out) = match kind {
            ProcessName::Single => (vec![[1.0, 0.0, 0.0]], vec![[0.0, 1.0, 0.0]]),
            _ => (vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]], vec![[0.0, 1.0, 0.0], [0.0, -1.0, 0.0]]),
        };
        ProcessSection {
            kind,
            units: Units::Lattice,
            momenta_in,
            momenta_out,
            exchange_sign: 1.0,
            sweep: Sweep::Angle,
            theta_min: 20.0,
            theta_max: 160.0,
            theta_points: 15,
        }
    }

    pub fn particles(&self) -> usize {
        match self.kind {
            ProcessName::Single => 1,
            _ => 2,
        }
    }
}

const SECTIONS: [&str; 6] = ["system", "grid", "potential", "process", "numerics", "output"];

fn known_keys(section: &str) -> &'static [&'static str] {
    match section {
        "system" => &["masses", "finite", "levels", "coupling", "level_spacing", "energies"],
        "grid" => &["side", "n_points"],
        "potential" => &["kind", "alpha", "mu", "width"],
        "process" => &[
            "kind",
            "units",
            "momenta_in",
            "momenta_out",
            "exchange_sign",
            "sweep",
            "theta_min",
            "theta_max",
            "theta_points",
        ],
        "numerics" => &[
            "epsilon",
            "epsilon_schedule",
            "order",
            "horizon",
            "horizon_min",
            "horizon_max",
            "horizon_points",
            "dt",
            "quadrature_points",
            "seed",
        ],
        "output" => &["format", "path"],
        _ => &[],
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

type RawSection = BTreeMap<String, Entry>;

/// Section name to its entries and the line of its header.
fn tokenize(text: &str, errors: &mut Vec<ParseError>) -> BTreeMap<String, (usize, RawSection)> {
    let mut sections: BTreeMap<String, (usize, RawSection)> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                errors.push(ParseError::at(line, format!("malformed section header {content:?}")));
                current = None;
                continue;
            };
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                errors.push(ParseError::at(line, format!("unknown section [{name}]")));
                current = None;
            } else if let Some((first, _)) = sections.get(&name) {
                errors.push(ParseError::at(line, format!("duplicate section [{name}] (first at line {first})")));
                current = None;
            } else {
                sections.insert(name.clone(), (line, RawSection::new()));
                current = Some(name);
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(ParseError::at(line, format!("expected `key = value`, got {content:?}")));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(section) = current.as_ref() else {
            errors.push(ParseError::at(line, format!("key `{key}` outside a known section")));
            continue;
        };
        if !known_keys(section).contains(&key) {
            errors.push(ParseError::at(line, format!("unknown key `{key}` in [{section}]")));
            continue;
        }
        let entries = &mut sections.get_mut(section).expect("current section exists").1;
        if let Some(prev) = entries.get(key) {
            errors.push(ParseError::at(line, format!("duplicate key `{key}` (first at line {})", prev.line)));
            continue;
        }
        entries.insert(key.to_string(), Entry { value: value.to_string(), line });
    }
    sections
}

/// Typed access to one raw section, collecting errors instead of stopping.
struct Reader<'a> {
    name: &'a str,
    raw: &'a RawSection,
    errors: &'a mut Vec<ParseError>,
}

impl Reader<'_> {
    fn get<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Option<(T, usize)> {
        let entry = self.raw.get(key)?;
        match parse(&entry.value) {
            Ok(v) => Some((v, entry.line)),
            Err(msg) => {
                self.errors.push(ParseError::at(entry.line, format!("[{}] {key}: {msg}", self.name)));
                None
            }
        }
    }

    /// Parses `key` and checks it with `ok`, naming `constraint` on failure.
    fn checked<T: Copy + fmt::Debug>(
        &mut self,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
        ok: impl Fn(T) -> bool,
        constraint: &str,
    ) -> Option<T> {
        let (v, line) = self.get(key, parse)?;
        if ok(v) {
            Some(v)
        } else {
            self.errors
                .push(ParseError::at(line, format!("[{}] {key} = {v:?} is out of range: {constraint}", self.name)));
            None
        }
    }

    fn list(&mut self, key: &str, ok: impl Fn(f64) -> bool, constraint: &str) -> Option<Vec<f64>> {
        let (v, line) = self.get(key, parse_list)?;
        if v.iter().all(|&x| ok(x)) {
            Some(v)
        } else {
            self.errors.push(ParseError::at(line, format!("[{}] {key} is out of range: {constraint}", self.name)));
            None
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.raw.get(key).map(|e| e.line)
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected a number, got {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a finite number, got {s:?}"))
    }
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("expected a non-negative integer, got {s:?}"))
}

fn parse_u64(s: &str) -> Result<u64, String> {
    s.parse().map_err(|_| format!("expected an unsigned 64-bit integer, got {s:?}"))
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|x| parse_f64(x.trim())).collect()
}

/// `(a, b, c), (d, e, f), ...`
fn parse_vectors(s: &str) -> Result<Vec<[f64; 3]>, String> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let body = rest.strip_prefix('(').ok_or_else(|| format!("expected `(` at {rest:?}"))?;
        let (inner, tail) = body.split_once(')').ok_or("unclosed `(`")?;
        let comps = parse_list(inner)?;
        let v: [f64; 3] =
            comps.try_into().map_err(|c: Vec<f64>| format!("vector needs 3 components, got {}", c.len()))?;
        out.push(v);
        rest = tail.trim_start();
        if let Some(t) = rest.strip_prefix(',') {
            rest = t.trim_start();
            if rest.is_empty() {
                return Err("trailing comma".into());
            }
        } else if !rest.is_empty() {
            return Err(format!("expected `,` between vectors at {rest:?}"));
        }
    }
    if out.is_empty() {
        return Err("expected at least one vector".into());
    }
    Ok(out)
}

fn choice<T: Copy>(options: &'static [(&'static str, T)]) -> impl Fn(&str) -> Result<T, String> {
    move |s| {
        options.iter().find(|(name, _)| *name == s).map(|(_, v)| *v).ok_or_else(|| {
            let names: Vec<_> = options.iter().map(|(n, _)| *n).collect();
            format!("expected one of {}, got {s:?}", names.join(" | "))
        })
    }
}

fn positive(x: f64) -> bool {
    x > 0.0
}

fn read_system(r: &mut Reader) -> SystemSection {
    let mut s = SystemSection::default();
    if let Some(v) = r.list("masses", positive, "masses must be > 0") {
        s.masses = v;
    }
    if let Some(line) = r.line("masses") {
        if !(1..=2).contains(&s.masses.len()) {
            r.errors.push(ParseError::at(line, "[system] masses: expected 1 or 2 values"));
        }
    }
    if let Some((v, _)) =
        r.get("finite", choice(&[("random", FiniteKind::Random), ("quasi_continuum", FiniteKind::QuasiContinuum)]))
    {
        s.finite = v;
    }
    if let Some(v) = r.checked("levels", parse_usize, |n| n >= 2, "levels must be >= 2") {
        s.levels = v;
    }
    if let Some(v) = r.checked("coupling", parse_f64, |x| x >= 0.0, "coupling must be >= 0") {
        s.coupling = v;
    }
    if let Some(v) = r.checked("level_spacing", parse_f64, positive, "level_spacing must be > 0") {
        s.level_spacing = v;
    }
    if let Some((v, line)) = r.get("energies", parse_list) {
        if v.len() != s.levels {
            r.errors.push(ParseError::at(
                line,
                format!("[system] energies: expected {} values (one per level), got {}", s.levels, v.len()),
            ));
        } else {
            s.energies = Some(v);
        }
    }
    s
}

fn read_grid(r: &mut Reader) -> GridSection {
    let mut g = GridSection::default();
    if let Some(v) = r.checked("side", parse_f64, positive, "side must be > 0") {
        g.side = v;
    }
    if let Some(v) = r.checked("n_points", parse_usize, |n| (1..=1024).contains(&n), "1 <= n_points <= 1024") {
        g.n_points = v;
    }
    g
}

fn read_potential(r: &mut Reader) -> PotentialSection {
    let mut p = PotentialSection::default();
    if let Some((v, _)) = r.get(
        "kind",
        choice(&[
            ("yukawa", PotentialName::Yukawa),
            ("coulomb", PotentialName::Coulomb),
            ("gaussian", PotentialName::Gaussian),
        ]),
    ) {
        p.kind = v;
    }
    if let Some((v, _)) = r.get("alpha", parse_f64) {
        p.alpha = v;
    }
    if let Some(v) = r.checked("mu", parse_f64, positive, "mu must be > 0") {
        p.mu = v;
    }
    if let Some(v) = r.checked("width", parse_f64, positive, "width must be > 0") {
        p.width = v;
    }
    p
}

fn read_process(r: &mut Reader) -> ProcessSection {
    let kind = r
        .get(
            "kind",
            choice(&[
                ("single", ProcessName::Single),
                ("distinguishable", ProcessName::Distinguishable),
                ("identical", ProcessName::Identical),
            ]),
        )
        .map(|(v, _)| v)
        .unwrap_or(ProcessName::Single);
    let mut p = ProcessSection::defaults(kind);
    if let Some((v, _)) = r.get("units", choice(&[("lattice", Units::Lattice), ("absolute", Units::Absolute)])) {
        p.units = v;
    }
    let n = p.particles();
    for key in ["momenta_in", "momenta_out"] {
        if let Some((v, line)) = r.get(key, parse_vectors) {
            if v.len() != n {
                r.errors.push(ParseError::at(
                    line,
                    format!("[process] {key}: a {kind:?} process needs {n} momenta, got {}", v.len()),
                ));
            } else if key == "momenta_in" {
                p.momenta_in = v;
            } else {
                p.momenta_out = v;
            }
        }
    }
    if let Some(v) = r.checked("exchange_sign", parse_f64, |x| x == 1.0 || x == -1.0, "exchange_sign must be +1 or -1")
    {
        p.exchange_sign = v;
    }
    if let Some((v, _)) = r.get("sweep", choice(&[("angle", Sweep::Angle), ("momentum", Sweep::Momentum)])) {
        p.sweep = v;
    }
    let angle = |x: f64| (0.0..=180.0).contains(&x);
    if let Some(v) = r.checked("theta_min", parse_f64, angle, "0 <= theta_min <= 180 (degrees)") {
        p.theta_min = v;
    }
    if let Some(v) = r.checked("theta_max", parse_f64, angle, "0 <= theta_max <= 180 (degrees)") {
        p.theta_max = v;
    }
    if let Some(v) = r.checked("theta_points", parse_usize, |n| n >= 1, "theta_points must be >= 1") {
        p.theta_points = v;
    }
    if p.theta_min > p.theta_max {
        let line = r.line("theta_max").or(r.line("theta_min")).unwrap_or(0);
        r.errors.push(ParseError::at(line, "[process] theta_min must not exceed theta_max"));
    }
    p
}

fn read_numerics(r: &mut Reader) -> NumericsSection {
    let mut n = NumericsSection {
        epsilon: r.checked("epsilon", parse_f64, positive, "epsilon must be > 0"),
        ..Default::default()
    };
    if let Some((v, line)) = r.get("epsilon_schedule", parse_list) {
        if v.iter().all(|&x| x > 0.0) && v.windows(2).all(|w| w[1] < w[0]) {
            n.epsilon_schedule = v;
        } else {
            r.errors.push(ParseError::at(line, "[numerics] epsilon_schedule must be positive and strictly decreasing"));
        }
    }
    if let Some(v) = r.checked("order", parse_usize, |k| k >= 1, "order must be >= 1") {
        n.order = v;
    }
    if let Some(v) = r.checked("horizon", parse_f64, positive, "horizon must be > 0") {
        n.horizon = v;
    }
    n.horizon_min = r.checked("horizon_min", parse_f64, positive, "horizon_min must be > 0");
    n.horizon_max = r.checked("horizon_max", parse_f64, positive, "horizon_max must be > 0");
    if let (Some(lo), Some(hi)) = (n.horizon_min, n.horizon_max) {
        if lo >= hi {
            let line = r.line("horizon_max").unwrap_or(0);
            r.errors.push(ParseError::at(line, "[numerics] horizon_min must be below horizon_max"));
        }
    }
    if let Some(v) = r.checked("horizon_points", parse_usize, |k| k >= 2, "horizon_points must be >= 2") {
        n.horizon_points = v;
    }
    if let Some(v) = r.checked("dt", parse_f64, positive, "dt must be > 0") {
        n.dt = v;
    }
    if let Some(v) = r.checked("quadrature_points", parse_usize, |k| k >= 1, "quadrature_points must be >= 1") {
        n.quadrature_points = v;
    }
    if let Some((v, _)) = r.get("seed", parse_u64) {
        n.seed = v;
    }
    n
}

fn read_output(r: &mut Reader) -> OutputSection {
    let mut o = OutputSection::default();
    if let Some((v, _)) = r.get("format", choice(&[("csv", Format::Csv), ("json", Format::Json)])) {
        o.format = v;
    }
    if let Some((v, _)) =
        r.get("path", |s| if s.is_empty() { Err("path must not be empty".to_string()) } else { Ok(s.to_string()) })
    {
        o.path = Some(v);
    }
    o
}

/// Parses and validates a scenario, reporting every problem found.
pub fn parse_scenario(text: &str) -> Result<Scenario, Vec<ParseError>> {
    let mut errors = Vec::new();
    let sections = tokenize(text, &mut errors);
    let empty = RawSection::new();

    fn section<'a>(
        sections: &'a BTreeMap<String, (usize, RawSection)>,
        name: &'a str,
        errors: &'a mut Vec<ParseError>,
    ) -> Option<Reader<'a>> {
        sections.get(name).map(|(_, raw)| Reader { name, raw, errors })
    }

    if !sections.contains_key("system") {
        errors.push(ParseError::general("missing section [system]"));
    }
    let system = {
        let raw = sections.get("system").map(|s| &s.1).unwrap_or(&empty);
        read_system(&mut Reader { name: "system", raw, errors: &mut errors })
    };
    let grid = section(&sections, "grid", &mut errors).map(|mut r| read_grid(&mut r));
    let potential = section(&sections, "potential", &mut errors).map(|mut r| read_potential(&mut r));
    let process = section(&sections, "process", &mut errors).map(|mut r| read_process(&mut r));
    let numerics = {
        let raw = sections.get("numerics").map(|s| &s.1).unwrap_or(&empty);
        read_numerics(&mut Reader { name: "numerics", raw, errors: &mut errors })
    };
    let output = {
        let raw = sections.get("output").map(|s| &s.1).unwrap_or(&empty);
        read_output(&mut Reader { name: "output", raw, errors: &mut errors })
    };

    if let Some(p) = &process {
        if p.particles() != system.masses.len() {
            let line = sections["process"].0;
            errors.push(ParseError::at(
                line,
                format!(
                    "[process] a {:?} process needs {} masses in [system], got {}",
                    p.kind,
                    p.particles(),
                    system.masses.len()
                ),
            ));
        }
        if p.kind == ProcessName::Identical && system.masses.len() == 2 && system.masses[0] != system.masses[1] {
            let line = sections.get("system").and_then(|s| s.1.get("masses")).map(|e| e.line).unwrap_or(0);
            errors.push(ParseError::at(line, "[system] identical particles need equal masses"));
        }
    }

    errors.sort_by_key(|e| e.line.unwrap_or(0));
    if errors.is_empty() {
        Ok(Scenario { system, grid, potential, process, numerics, output })
    } else {
        Err(errors)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub order: Option<usize>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

impl Scenario {
    pub fn apply(&mut self, o: &Overrides) -> Result<(), Vec<ParseError>> {
        let mut errors = Vec::new();
        if let Some(e) = o.epsilon {
            if e > 0.0 && e.is_finite() {
                self.numerics.epsilon = Some(e);
            } else {
                errors.push(ParseError::general(format!("--epsilon must be > 0, got {e}")));
            }
        }
        if let Some(k) = o.order {
            if k >= 1 {
                self.numerics.order = k;
            } else {
                errors.push(ParseError::general("--order must be >= 1"));
            }
        }
        if let Some(h) = o.horizon {
            if h > 0.0 && h.is_finite() {
                self.numerics.horizon = h;
            } else {
                errors.push(ParseError::general(format!("--horizon must be > 0, got {h}")));
            }
        }
        if let Some(s) = o.seed {
            self.numerics.seed = s;
        }
        if let Some(f) = o.format {
            self.output.format = f;
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// Canonical text of every setting that affects results. The output
    /// section is left out so that moving a file does not change its hash.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        };
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let vectors = |v: &[[f64; 3]]| {
            v.iter().map(|p| format!("({:?}, {:?}, {:?})", p[0], p[1], p[2])).collect::<Vec<_>>().join(", ")
        };
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_else(|| "default".into());

        let s = &self.system;
        put("[system]", String::new());
        put("masses", list(&s.masses));
        put("finite", format!("{:?}", s.finite));
        put("levels", s.levels.to_string());
        put("coupling", format!("{:?}", s.coupling));
        put("level_spacing", format!("{:?}", s.level_spacing));
        put("energies", s.energies.as_deref().map(list).unwrap_or_else(|| "default".into()));
        if let Some(g) = &self.grid {
            put("[grid]", String::new());
            put("side", format!("{:?}", g.side));
            put("n_points", g.n_points.to_string());
        }
        if let Some(p) = &self.potential {
            put("[potential]", String::new());
            put("kind", format!("{:?}", p.kind));
            put("alpha", format!("{:?}", p.alpha));
            put("mu", format!("{:?}", p.mu));
            put("width", format!("{:?}", p.width));
        }
        if let Some(p) = &self.process {
            put("[process]", String::new());
            put("kind", format!("{:?}", p.kind));
            put("units", format!("{:?}", p.units));
            put("momenta_in", vectors(&p.momenta_in));
            put("momenta_out", vectors(&p.momenta_out));
            put("exchange_sign", format!("{:?}", p.exchange_sign));
            put("sweep", format!("{:?}", p.sweep));
            put("theta_min", format!("{:?}", p.theta_min));
            put("theta_max", format!("{:?}", p.theta_max));
            put("theta_points", p.theta_points.to_string());
        }
        let n = &self.numerics;
        put("[numerics]", String::new());
        put("epsilon", opt(n.epsilon));
        put("epsilon_schedule", list(&n.epsilon_schedule));
        put("order", n.order.to_string());
        put("horizon", format!("{:?}", n.horizon));
        put("horizon_min", opt(n.horizon_min));
        put("horizon_max", opt(n.horizon_max));
        put("horizon_points", n.horizon_points.to_string());
        put("dt", format!("{:?}", n.dt));
        put("quadrature_points", n.quadrature_points.to_string());
        put("seed", n.seed.to_string());
        out
    }

    /// SHA-256 of [`Scenario::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
