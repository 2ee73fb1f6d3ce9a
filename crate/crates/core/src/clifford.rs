//! Hermitian generators of the Clifford relations and the matrix classes
//! that commute or anticommute with them.
//!
//! Generators come from a Jordan–Wigner layout on `p = ceil((n+1)/2)`
//! qubits: `Z^{⊗j} ⊗ X ⊗ I^{⊗(p-j-1)}` and `Z^{⊗j} ⊗ Y ⊗ I^{⊗(p-j-1)}`
//! for `j = 0..p`, taken in that interleaved order. The first `n` are
//! `alpha_1..alpha_n`; the next one is the extra anticommuting matrix
//! `alpha_{n+1}`. Every entry is in `{0, ±1, ±i}`, so all relations hold
//! exactly in floating point.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::{CMatrix, Error, Result, C64};

/// Absolute entrywise tolerance for commutation tests.
pub const CLASS_TOL: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct CliffordRep {
    n: usize,
    size: usize,
    alphas: Vec<CMatrix>,
}

/// `L alpha_j = (-1)^s alpha_j L` for all spatial `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixClass {
    /// s = 0. The zero matrix lands here as well.
    Commuting,
    /// s = 1.
    Anticommuting,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

fn pauli() -> [CMatrix; 4] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    ]
}

impl CliffordRep {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(n));
        }
        let qubits = (n + 2) / 2;
        let [id, x, y, z] = pauli();
        let string = |j: usize, mid: &CMatrix| {
            let mut acc = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
            for q in 0..qubits {
                let factor = match q.cmp(&j) {
                    std::cmp::Ordering::Less => &z,
                    std::cmp::Ordering::Equal => mid,
                    std::cmp::Ordering::Greater => &id,
                };
                acc = acc.kronecker(factor);
            }
            acc
        };
        let alphas = (0..qubits)
            .flat_map(|j| [string(j, &x), string(j, &y)])
            .take(n + 1)
            .collect();
        Ok(Self { n, size: 1 << qubits, alphas })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Matrix size `M = 2^ceil((n+1)/2)`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// `alpha_{j+1}` for `j < n`, and `alpha_{n+1}` for `j = n`.
    pub fn alpha(&self, j: usize) -> &CMatrix {
        &self.alphas[j]
    }

    pub fn alphas(&self) -> &[CMatrix] {
        &self.alphas[..self.n]
    }

    pub fn alpha_extra(&self) -> &CMatrix {
        &self.alphas[self.n]
    }

    pub fn all_alphas(&self) -> &[CMatrix] {
        &self.alphas
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.size, self.size)
    }

    /// `sum_j v_j alpha_j` over the spatial generators.
    pub fn dot(&self, v: &[C64]) -> CMatrix {
        assert_eq!(v.len(), self.n, "vector length must equal the dimension");
        let mut out = CMatrix::zeros(self.size, self.size);
        for (c, a) in v.iter().zip(self.alphas()) {
            if *c != C64::new(0.0, 0.0) {
                out += a * *c;
            }
        }
        out
    }

    pub fn dot_real(&self, v: &[f64]) -> CMatrix {
        let v: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.dot(&v)
    }

    pub fn classify(&self, l: &CMatrix) -> Result<MatrixClass> {
        if l.nrows() != self.size || l.ncols() != self.size {
            return Err(Error::SizeMismatch { expected: self.size, actual: l.nrows().max(l.ncols()) });
        }
        let close = |m: CMatrix| m.iter().all(|z| z.norm() <= CLASS_TOL);
        let commutes = self.alphas().iter().all(|a| close(l * a - a * l));
        if commutes {
            return Ok(MatrixClass::Commuting);
        }
        let anti = self.alphas().iter().all(|a| close(l * a + a * l));
        Ok(if anti { MatrixClass::Anticommuting } else { MatrixClass::Neither })
    }

    /// `P^± = (I ∓ i (e·α)(ẽ·α)) / 2` for orthonormal `e`, `ẽ`.
    pub fn projector(&self, e: &[f64], et: &[f64], sign: Sign) -> Result<CMatrix> {
        if e.len() != self.n || et.len() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, actual: e.len().max(et.len()) });
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = e.iter().zip(et).map(|(a, b)| a * b).sum();
        if (norm(e) - 1.0).abs() > UNIT_TOL || (norm(et) - 1.0).abs() > UNIT_TOL || dot.abs() > UNIT_TOL {
            return Err(Error::NotOrthonormal(format!("|e| = {}, |ẽ| = {}, (e, ẽ) = {dot:e}", norm(e), norm(et))));
        }
        Ok(self.projector_unchecked(e, et, sign))
    }

    pub(crate) fn projector_unchecked(&self, e: &[f64], et: &[f64], sign: Sign) -> CMatrix {
        let prod = self.dot_real(e) * self.dot_real(et);
        let s = match sign {
            Sign::Plus => C64::new(0.0, -0.5),
            Sign::Minus => C64::new(0.0, 0.5),
        };
        self.identity() * C64::new(0.5, 0.0) + prod * s
    }
}
