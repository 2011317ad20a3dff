use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Result, ScatterError};

pub const FIELD_MAGIC: [u8; 4] = *b"SCLF";
pub const FIELD_VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

/// Largest per-axis size accepted for two-particle fields (n^6 complex values).
pub const PAIR_MAX_POINTS: usize = 16;

/// Periodic cube of side `side` centred on the origin.
///
/// Sample `j` along an axis sits at `(j - n/2) * spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    side: f64,
    n_points: usize,
}

impl SpatialGrid {
    pub fn new(side: f64, n_points: usize) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(ScatterError::domain(format!("grid side must be positive, got {side}")));
        }
        if !n_points.is_power_of_two() || n_points < 2 {
            return Err(ScatterError::domain(format!("n_points must be a power of two >= 2, got {n_points}")));
        }
        Ok(SpatialGrid { side, n_points })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.side / self.n_points as f64
    }

    pub fn len(&self) -> usize {
        self.n_points.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        (j as f64 - (self.n_points / 2) as f64) * self.spacing()
    }

    /// Angular wavenumber of FFT bin `m`, folded into `[-pi/h, pi/h)`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        let n = self.n_points as i64;
        let m = m as i64;
        let folded = if m < n / 2 { m } else { m - n };
        2.0 * std::f64::consts::PI * folded as f64 / self.side
    }

    pub fn flat_index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n_points + iy) * self.n_points + iz
    }

    pub fn unflatten(&self, idx: usize) -> [usize; 3] {
        let n = self.n_points;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        self.unflatten(idx).map(|j| self.coordinate(j))
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        self.unflatten(idx).map(|m| self.wavenumber(m))
    }
}

/// Complex samples of a single-particle wavefunction on a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: SpatialGrid,
    time: f64,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: SpatialGrid, time: f64, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(ScatterError::domain(format!("field has {} values, grid needs {}", values.len(), grid.len())));
        }
        Ok(ComplexField { grid, time, values })
    }

    pub fn from_fn(grid: SpatialGrid, time: f64, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        ComplexField { grid, time, values }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Discrete L2 norm, `sqrt(sum |psi|^2 h^3)`.
    pub fn norm(&self) -> f64 {
        let h3 = self.grid.spacing().powi(3);
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * h3).sqrt()
    }

    /// `sum psi h^3`.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.spacing().powi(3)
    }

    /// Variance of `|psi|^2` along one axis.
    pub fn variance(&self, axis: usize) -> f64 {
        let mut w = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let x = self.grid.position(i)[axis];
            let p = v.norm_sqr();
            w += p;
            m1 += p * x;
            m2 += p * x * x;
        }
        m2 / w - (m1 / w).powi(2)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = [0u8; HEADER_LEN];
        header[0..4].copy_from_slice(&FIELD_MAGIC);
        header[4..8].copy_from_slice(&FIELD_VERSION.to_le_bytes());
        header[8..12].copy_from_slice(&(self.grid.n_points as u32).to_le_bytes());
        header[16..24].copy_from_slice(&self.grid.side.to_le_bytes());
        header[24..32].copy_from_slice(&self.time.to_le_bytes());
        w.write_all(&header)?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)?;
        if header[0..4] != FIELD_MAGIC {
            return Err(ScatterError::Format("bad magic, not a field file".into()));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != FIELD_VERSION {
            return Err(ScatterError::Format(format!("unsupported field version {version}")));
        }
        let n = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let side = f64::from_le_bytes(header[16..24].try_into().unwrap());
        let time = f64::from_le_bytes(header[24..32].try_into().unwrap());
        let grid = SpatialGrid::new(side, n).map_err(|e| ScatterError::Format(e.to_string()))?;

        let mut raw = Vec::with_capacity(grid.len() * 16);
        r.read_to_end(&mut raw)?;
        if raw.len() != grid.len() * 16 {
            return Err(ScatterError::Format(format!("payload is {} bytes, expected {}", raw.len(), grid.len() * 16)));
        }
        let values = raw
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[0..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..16].try_into().unwrap()),
                )
            })
            .collect();
        Ok(ComplexField { grid, time, values })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

/// Two-particle amplitude `psi(r1, r2)` stored as an `n^3 x n^3` tensor,
/// particle 1 index major.
#[derive(Debug, Clone, PartialEq)]
pub struct PairField {
    grid: SpatialGrid,
    time: f64,
    values: Vec<Complex64>,
}

impl PairField {
    fn check_grid(grid: &SpatialGrid) -> Result<()> {
        if grid.n_points > PAIR_MAX_POINTS {
            return Err(ScatterError::domain(format!(
                "pair fields limited to n_points <= {PAIR_MAX_POINTS}, got {}",
                grid.n_points
            )));
        }
        Ok(())
    }

    pub fn new(grid: SpatialGrid, time: f64, values: Vec<Complex64>) -> Result<Self> {
        Self::check_grid(&grid)?;
        if values.len() != grid.len() * grid.len() {
            return Err(ScatterError::domain("pair field length must be n_points^6"));
        }
        Ok(PairField { grid, time, values })
    }

    /// `psi1(r1) psi2(r2)`.
    pub fn product(a: &ComplexField, b: &ComplexField) -> Result<Self> {
        if a.grid != b.grid {
            return Err(ScatterError::domain("factor fields live on different grids"));
        }
        Self::check_grid(&a.grid)?;
        let mut values = Vec::with_capacity(a.values.len() * b.values.len());
        for x in &a.values {
            values.extend(b.values.iter().map(|y| x * y));
        }
        Ok(PairField { grid: a.grid, time: a.time, values })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub(crate) fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn get(&self, i1: usize, i2: usize) -> Complex64 {
        self.values[i1 * self.grid.len() + i2]
    }

    /// `psi(r2, r1)`.
    pub fn exchanged(&self) -> Self {
        let n3 = self.grid.len();
        let values = (0..n3 * n3).map(|k| self.values[(k % n3) * n3 + k / n3]).collect();
        PairField { grid: self.grid, time: self.time, values }
    }

    /// `(psi + sign * exchanged psi) / 2`.
    pub fn symmetrized(&self, sign: f64) -> Result<Self> {
        super::check_sign(sign)?;
        let ex = self.exchanged();
        let values = self.values.iter().zip(&ex.values).map(|(a, b)| 0.5 * (a + sign * b)).collect();
        Ok(PairField { grid: self.grid, time: self.time, values })
    }

    pub fn norm(&self) -> f64 {
        let h6 = self.grid.spacing().powi(6);
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * h6).sqrt()
    }

    pub fn max_abs_diff(&self, other: &PairField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}
