//! JSON state files: `{"dims": [d_A, d_B], "matrix": [[[re, im], ...], ...]}`.
//!
//! `matrix` may also be one flat row-major list of `[re, im]` pairs. Files
//! are always written with nested rows.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::state::BipartiteState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Entries {
    Rows(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: [usize; 2],
    matrix: Entries,
}

impl StateFile {
    pub fn from_state(rho: &BipartiteState) -> Self {
        let m = rho.matrix();
        let rows = (0..m.rows())
            .map(|r| (0..m.cols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
            .collect();
        Self {
            dims: [rho.d_a(), rho.d_b()],
            matrix: Entries::Rows(rows),
        }
    }

    /// Validates the dimensions and the density-matrix invariants.
    pub fn to_state(&self) -> Result<BipartiteState> {
        let [d_a, d_b] = self.dims;
        if d_a == 0 || d_b == 0 {
            return Err(Error::Parse(format!("dims must be positive, got [{d_a}, {d_b}]")));
        }
        let n = d_a * d_b;
        let flat: Vec<[f64; 2]> = match &self.matrix {
            Entries::Rows(rows) => {
                if rows.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: rows.len(),
                    });
                }
                if let Some(bad) = rows.iter().find(|r| r.len() != n) {
                    return Err(Error::NotSquare {
                        rows: n,
                        cols: bad.len(),
                    });
                }
                rows.concat()
            }
            Entries::Flat(v) => {
                if v.len() != n * n {
                    return Err(Error::DimensionMismatch {
                        expected: n * n,
                        actual: v.len(),
                    });
                }
                v.clone()
            }
        };
        let data = flat.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        BipartiteState::from_matrix(d_a, d_b, ComplexMatrix::from_vec(n, n, data)?)
    }
}

pub fn parse_state_str(text: &str) -> Result<BipartiteState> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_state()
}

pub fn parse_state_file(path: impl AsRef<Path>) -> Result<BipartiteState> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_state_str(&text)
}

pub fn serialize_state(rho: &BipartiteState) -> String {
    serde_json::to_string(&StateFile::from_state(rho)).expect("finite entries serialize")
}

pub fn write_state_file(path: impl AsRef<Path>, rho: &BipartiteState) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, serialize_state(rho)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
