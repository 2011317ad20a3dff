use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MomentumGrid, Potential, PotentialKind};
use crate::error::{Result, ScatterError};
use crate::kinematics::kinetic_energy;

/// Relative size below which a Born term ends the series early.
pub const BORN_TOLERANCE: f64 = 1e-14;

/// `T(E + i eps)` on a momentum grid, indexed `(p_out, p_in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TMatrix {
    pub grid: MomentumGrid,
    pub energy: f64,
    pub epsilon: f64,
    /// Highest Born order actually summed.
    pub order: usize,
    pub values: DMatrix<Complex64>,
    /// Frobenius norm of each summed term, first order first.
    pub term_norms: Vec<f64>,
}

/// `V[p, p'] = V~(p - p') / L^3`, or the supplied matrix.
pub fn potential_matrix(grid: &MomentumGrid, pot: &Potential) -> Result<DMatrix<Complex64>> {
    let n = grid.len();
    match pot.kind() {
        PotentialKind::Matrix(m) => {
            if m.nrows() != n {
                return Err(ScatterError::domain(format!(
                    "potential matrix is {}x{}, grid has {n} points",
                    m.nrows(),
                    m.ncols()
                )));
            }
            Ok(m.clone())
        }
        PotentialKind::Coulomb => Err(ScatterError::ForwardSingularity),
        _ => {
            let momenta = grid.momenta();
            let volume = grid.volume();
            let rows: Vec<Vec<Complex64>> = momenta
                .par_iter()
                .map(|p| {
                    momenta
                        .iter()
                        .map(|pp| Complex64::new(pot.transform_q2((*p - *pp).norm_sqr()) / volume, 0.0))
                        .collect()
                })
                .collect();
            Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
        }
    }
}

/// Sums `T = V + V D V + ...` with `D = diag(1 / (E - p^2/2m + i eps))`.
pub fn t_matrix(
    grid: &MomentumGrid,
    pot: &Potential,
    energy: f64,
    eps: f64,
    max_order: usize,
    m: f64,
) -> Result<TMatrix> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(ScatterError::domain(format!("epsilon must be positive, got {eps}")));
    }
    if max_order == 0 {
        return Err(ScatterError::domain("max_order must be at least 1"));
    }
    let v = potential_matrix(grid, pot)?;
    let d: Vec<Complex64> = grid
        .momenta()
        .into_iter()
        .map(|p| Ok(Complex64::new(energy - kinetic_energy(p, m)?, eps).inv()))
        .collect::<Result<_>>()?;

    let mut values = v.clone();
    let mut term = v.clone();
    let mut term_norms = vec![term.norm()];
    let mut rising = 0;
    let mut order = 1;
    for n in 2..=max_order {
        for (i, di) in d.iter().enumerate() {
            term.row_mut(i).iter_mut().for_each(|x| *x *= di);
        }
        term = &v * &term;
        let norm = term.norm();
        let ratio = norm / term_norms[term_norms.len() - 1];
        rising = if ratio >= 1.0 { rising + 1 } else { 0 };
        if rising >= 2 {
            return Err(ScatterError::NonConvergent { order: n, ratio });
        }
        values += &term;
        term_norms.push(norm);
        order = n;
        if norm < BORN_TOLERANCE * values.norm() {
            break;
        }
    }
    Ok(TMatrix { grid: *grid, energy, epsilon: eps, order, values, term_norms })
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    side: f64,
    n_points: usize,
    energy: f64,
    epsilon: f64,
    order: usize,
    rows: usize,
    cols: usize,
    layout: String,
    data: String,
}

const FORMAT_NAME: &str = "scatter-tmatrix";
const LAYOUT: &str = "row-major (p_out, p_in), little-endian f64 pairs (re, im)";

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

impl TMatrix {
    /// Writes `<stem>.json` (header) and `<stem>.bin` (matrix payload).
    pub fn export(&self, stem: impl AsRef<Path>) -> Result<()> {
        let stem = stem.as_ref();
        let bin = with_ext(stem, "bin");
        let header = Header {
            format: FORMAT_NAME.into(),
            version: 1,
            side: self.grid.side(),
            n_points: self.grid.n_points(),
            energy: self.energy,
            epsilon: self.epsilon,
            order: self.order,
            rows: self.values.nrows(),
            cols: self.values.ncols(),
            layout: LAYOUT.into(),
            data: bin.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        };
        let json = serde_json::to_string_pretty(&header).map_err(|e| ScatterError::Format(e.to_string()))?;
        std::fs::write(with_ext(stem, "json"), json + "\n")?;
        let mut w = BufWriter::new(File::create(bin)?);
        for i in 0..self.values.nrows() {
            for j in 0..self.values.ncols() {
                let v = self.values[(i, j)];
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a pair written by [`TMatrix::export`]. Term norms are not stored.
    pub fn import(stem: impl AsRef<Path>) -> Result<Self> {
        let stem = stem.as_ref();
        let text = std::fs::read_to_string(with_ext(stem, "json"))?;
        let header: Header = serde_json::from_str(&text).map_err(|e| ScatterError::Format(e.to_string()))?;
        if header.format != FORMAT_NAME {
            return Err(ScatterError::Format(format!("unexpected format {:?}", header.format)));
        }
        let grid = MomentumGrid::new(header.side, header.n_points).map_err(|e| ScatterError::Format(e.to_string()))?;
        let mut raw = Vec::new();
        BufReader::new(File::open(with_ext(stem, "bin"))?).read_to_end(&mut raw)?;
        if raw.len() != header.rows * header.cols * 16 {
            return Err(ScatterError::Format("matrix payload has the wrong length".into()));
        }
        let mut vals = raw.chunks_exact(16).map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        });
        let values = DMatrix::from_row_iterator(header.rows, header.cols, &mut vals);
        Ok(TMatrix {
            grid,
            energy: header.energy,
            epsilon: header.epsilon,
            order: header.order,
            values,
            term_norms: Vec::new(),
        })
    }
}
