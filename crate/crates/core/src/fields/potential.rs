use serde::Serialize;

use super::{FieldKind, FourierField, SupBound};
use crate::clifford::{CliffordRep, MatrixClass};
use crate::lattice::Lattice;
use crate::{CMatrix, Error, Result, C64};

/// The potentials `A`, `V0 ∈ L^(0)`, `V1 ∈ L^(1)` of one operator.
#[derive(Debug, Clone)]
pub struct PotentialSet {
    a: FourierField,
    v0: FourierField,
    v1: FourierField,
    rep: CliffordRep,
}

impl PotentialSet {
    pub fn new(rep: &CliffordRep, a: FourierField, v0: FourierField, v1: FourierField) -> Result<Self> {
        let n = rep.dim();
        let m = rep.size();
        if a.kind() != FieldKind::Vector(n) {
            return Err(Error::param("A", format!("expected a vector field of dimension {n}")));
        }
        for (name, f) in [("V0", &v0), ("V1", &v1)] {
            if f.kind() != FieldKind::Matrix(m) {
                return Err(Error::param(name, format!("expected {m}x{m} matrix coefficients")));
            }
        }
        if a.lattice() != v0.lattice() || a.lattice() != v1.lattice() {
            return Err(Error::param("lattice", "potentials are defined on different lattices"));
        }
        for (name, field, want) in [("V0", &v0, MatrixClass::Commuting), ("V1", &v1, MatrixClass::Anticommuting)] {
            for (mode, c) in field.iter() {
                let class = rep.classify(c)?;
                let zero = c.iter().all(|z| z.norm() <= crate::clifford::CLASS_TOL);
                if class != want && !zero {
                    return Err(Error::MatrixClass { field: name, mode: mode.0.clone() });
                }
            }
        }
        Ok(Self { a, v0, v1, rep: rep.clone() })
    }

    pub fn zero(rep: &CliffordRep, lattice: &Lattice) -> Self {
        Self {
            a: FourierField::vector(lattice),
            v0: FourierField::matrix(lattice, rep.size()),
            v1: FourierField::matrix(lattice, rep.size()),
            rep: rep.clone(),
        }
    }

    pub fn a(&self) -> &FourierField {
        &self.a
    }

    pub fn v0(&self) -> &FourierField {
        &self.v0
    }

    pub fn v1(&self) -> &FourierField {
        &self.v1
    }

    pub fn rep(&self) -> &CliffordRep {
        &self.rep
    }

    pub fn lattice(&self) -> &Lattice {
        self.a.lattice()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.v0.is_zero() && self.v1.is_zero()
    }

    /// All three potentials multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        let s = C64::new(t, 0.0);
        Self { a: self.a.scaled(s), v0: self.v0.scaled(s), v1: self.v1.scaled(s), rep: self.rep.clone() }
    }

    /// Real `A` and Hermitian-valued `V0`, `V1`: the fiber at real
    /// quasimomentum is then Hermitian.
    pub fn is_self_adjoint(&self) -> bool {
        self.a.is_real_valued() && self.v0.is_hermitian_valued() && self.v1.is_hermitian_valued()
    }

    /// `V = V0 + V1 - Σ_j A_j α_j` as a matrix field.
    pub fn composite(&self) -> FourierField {
        let mut out = FourierField::matrix(self.lattice(), self.rep.size());
        for (m, c) in self.v0.iter().chain(self.v1.iter()) {
            out.add_coeff(m.clone(), c.clone()).expect("shapes checked at construction");
        }
        for (m, c) in self.a.iter() {
            let term: CMatrix = -self.rep.dot(c.as_slice());
            out.add_coeff(m.clone(), term).expect("shapes checked at construction");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WNorm {
    pub w: f64,
    pub a: SupBound,
    pub v0: SupBound,
    pub v1: SupBound,
}

/// `W = n‖A‖ + ‖V0‖ + ‖V1‖` from certified upper bounds. The grid lower
/// bounds are reported alongside.
pub fn w_norm(pot: &PotentialSet, grid: Option<usize>) -> WNorm {
    let bound = |f: &FourierField| match grid {
        Some(g) => f.sup_norm(g),
        None => f.sup_norm(f.default_grid()),
    };
    let a = bound(&pot.a);
    let v0 = bound(&pot.v0);
    let v1 = bound(&pot.v1);
    WNorm { w: pot.rep.dim() as f64 * a.hi + v0.hi + v1.hi, a, v0, v1 }
}
