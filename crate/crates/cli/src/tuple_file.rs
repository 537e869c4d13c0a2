//! JSON matrix tuples: `{"d": 2, "n": 3, "matrices": [[[[re, im], …], …], …]}`.

use std::path::Path;

use ncdbr::nc_space::MatrixTuple;
use ncdbr::numerics::{c, CMat};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleFile {
    pub d: usize,
    pub n: usize,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

impl TupleFile {
    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let file: Self =
            serde_json::from_str(&text).map_err(|e| format!("malformed tuple file {}: {e}", path.display()))?;
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<(), String> {
        if self.d == 0 || self.n == 0 {
            return Err("d and n must be positive".into());
        }
        if self.matrices.len() != self.d {
            return Err(format!("expected {} matrices, found {}", self.d, self.matrices.len()));
        }
        for (j, m) in self.matrices.iter().enumerate() {
            if m.len() != self.n || m.iter().any(|row| row.len() != self.n) {
                return Err(format!("matrix {} is not {}x{}", j + 1, self.n, self.n));
            }
            if m.iter().flatten().flatten().any(|v| !v.is_finite()) {
                return Err(format!("matrix {} has non-finite entries", j + 1));
            }
        }
        Ok(())
    }

    pub fn to_matrices(&self) -> Vec<CMat> {
        self.matrices
            .iter()
            .map(|m| CMat::from_fn(self.n, self.n, |i, k| c(m[i][k][0], m[i][k][1])))
            .collect()
    }

    pub fn to_tuple(&self) -> Result<MatrixTuple, String> {
        MatrixTuple::new(self.to_matrices()).map_err(|e| e.to_string())
    }

    /// SHA-256 of the canonical re-serialization, so whitespace and key
    /// order in the source file do not change the digest.
    pub fn digest(&self) -> String {
        digest_bytes(&serde_json::to_vec(self).expect("tuple files serialize"))
    }
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Row-major `[re, im]` pairs.
pub fn matrix_entries(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|k| [m[(i, k)].re, m[(i, k)].im]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_formatting() {
        let a: TupleFile = serde_json::from_str(r#"{"d":1,"n":1,"matrices":[[[[0.5,0.0]]]]}"#).unwrap();
        let b: TupleFile = serde_json::from_str("{ \"matrices\": [[[[0.5, 0]]]],\n \"n\": 1, \"d\": 1 }").unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.to_matrices()[0][(0, 0)].re, 0.5);
    }

    #[test]
    fn shape_errors() {
        let bad = TupleFile {
            d: 2,
            n: 1,
            matrices: vec![vec![vec![[1.0, 0.0]]]],
        };
        assert!(bad.validate().is_err());
        let ragged = TupleFile {
            d: 1,
            n: 2,
            matrices: vec![vec![vec![[1.0, 0.0]; 2], vec![[1.0, 0.0]]]],
        };
        assert!(ragged.validate().is_err());
    }
}
