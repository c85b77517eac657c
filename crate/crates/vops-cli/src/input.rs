//! Density-matrix input files.
//!
//! The format is JSON with an explicit basis ordering and the matrix as
//! `[re, im]` pairs:
//!
//! ```json
//! {
//!   "basis": ["00", "01", "10", "11"],
//!   "matrix": [[[1.0, 0.0], ...], ...]
//! }
//! ```

use std::path::Path;

use serde::Deserialize;
use vops::linalg::{c64, CMat};
use vops::states::TwoModeState;
use vops::{Error, Result};

#[derive(Deserialize)]
struct DensityFile {
    basis: Vec<String>,
    matrix: Vec<Vec<[f64; 2]>>,
}

const BASIS: [&str; 4] = ["00", "01", "10", "11"];

/// Reads a two-mode density matrix. Entries may carry small numerical noise
/// (up to 1e-4); the matrix is projected back onto the density manifold.
pub fn read_density(path: &Path) -> Result<TwoModeState> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))?;
    let file: DensityFile = serde_json::from_str(&text)
        .map_err(|e| Error::Domain(format!("cannot parse {}: {e}", path.display())))?;
    if file.basis != BASIS {
        return Err(Error::Domain(format!(
            "basis must be {BASIS:?}, got {:?}",
            file.basis
        )));
    }
    if file.matrix.len() != 4 || file.matrix.iter().any(|row| row.len() != 4) {
        return Err(Error::Domain("matrix must be 4x4".into()));
    }
    let m = CMat::from_fn(4, |i, j| {
        let [re, im] = file.matrix[i][j];
        c64(re, im)
    });
    TwoModeState::project_near_density(&m, 1e-4)
}
