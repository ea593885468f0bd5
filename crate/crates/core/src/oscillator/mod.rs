//! Normal-ordered operator algebra over a finite, generally non-orthonormal
//! mode set.
//!
//! Modes `a_0 … a_{n−1}` satisfy `[a_i, a_j†]_∓ = G_ij` with `G` the mode Gram
//! matrix (commutator for bosons, anticommutator for fermions); creation
//! operators (anti)commute among themselves, as do annihilation operators.
//! A mode usually stands for a test function, and `G_ij` for a pre-inner
//! product of two of them.

mod fock;
mod oracle;
mod poly;
mod weyl;
mod wick;

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::C64;
use crate::scalar::Coeff;

pub use fock::FockOracle;
pub use oracle::{oracle_suite, BOSE_ORACLE_CUTOFF, BOSE_ORACLE_TOL, FERMI_ORACLE_TOL};
pub use poly::{random_poly, Monomial, NormalPoly};
pub use weyl::{coherent_overlap, gaussian_exp_weyl, NormalExp};
pub use wick::{determinant, permanent, wick_contract};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Bose,
    Fermi,
}

/// Mode count, statistics and the (anti)commutator Gram.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSpace<C> {
    pub statistics: Statistics,
    n: usize,
    gram: Vec<C>,
}

impl<C: Coeff> ModeSpace<C> {
    /// `gram` is row-major `n × n` and must be Hermitian.
    pub fn new(statistics: Statistics, n: usize, gram: Vec<C>) -> Result<Arc<ModeSpace<C>>> {
        if gram.len() != n * n {
            return Err(Error::Input(format!("gram has {} entries for {n} modes", gram.len())));
        }
        if n > u16::MAX as usize {
            return Err(Error::Input("too many modes".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if gram[i * n + j] != gram[j * n + i].conj() {
                    let d = (gram[i * n + j].to_c64() - gram[j * n + i].to_c64().conj()).norm();
                    // exact fields must be exactly Hermitian; floats get roundoff slack
                    let scale = gram[i * n + i].to_c64().norm().max(gram[j * n + j].to_c64().norm()).max(1.0);
                    if d > 1e-12 * scale || d.is_nan() {
                        return Err(Error::Input(format!("gram is not Hermitian at ({i}, {j})")));
                    }
                }
            }
        }
        Ok(Arc::new(ModeSpace { statistics, n, gram }))
    }

    /// Orthonormal modes.
    pub fn identity(statistics: Statistics, n: usize) -> Arc<ModeSpace<C>> {
        let mut gram = vec![C::zero(); n * n];
        for i in 0..n {
            gram[i * n + i] = C::one();
        }
        Arc::new(ModeSpace { statistics, n, gram })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn gram(&self, i: usize, j: usize) -> &C {
        &self.gram[i * self.n + j]
    }

    /// `Σ conj(v_i) G_ij w_j`: the contraction of `a(v)` with `a†(w)`.
    pub fn pairing(&self, v: &[C], w: &[C]) -> C {
        let mut acc = C::zero();
        for i in 0..self.n {
            if v[i].is_zero() {
                continue;
            }
            let mut row = C::zero();
            for j in 0..self.n {
                row = row + self.gram(i, j).clone() * w[j].clone();
            }
            acc = acc + v[i].conj() * row;
        }
        acc
    }
}

impl ModeSpace<C64> {
    /// Numeric Gram; the Hermitian part is stored so that adjoint relations
    /// hold exactly even when the input carries quadrature roundoff.
    pub fn from_matrix(statistics: Statistics, g: &DMatrix<C64>) -> Result<Arc<ModeSpace<C64>>> {
        if g.nrows() != g.ncols() {
            return Err(Error::Input("gram must be square".into()));
        }
        let n = g.nrows();
        let mut flat = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                flat.push((g[(i, j)] + g[(j, i)].conj()) * 0.5);
            }
        }
        for i in 0..n {
            for j in 0..n {
                let d = (g[(i, j)] - g[(j, i)].conj()).norm();
                let scale = g[(i, i)].norm().max(g[(j, j)].norm()).max(g[(i, j)].norm()).max(1e-300);
                if d > 1e-10 * scale {
                    return Err(Error::Input(format!("gram is not Hermitian at ({i}, {j})")));
                }
            }
        }
        Self::new(statistics, n, flat)
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.gram[i * self.n + j])
    }

    /// Block-diagonal space: modes of `a` first, then modes of `b`.
    pub fn direct_sum(statistics: Statistics, a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<Arc<ModeSpace<C64>>> {
        let (na, nb) = (a.nrows(), b.nrows());
        let mut g = DMatrix::zeros(na + nb, na + nb);
        g.view_mut((0, 0), (na, na)).copy_from(a);
        g.view_mut((na, na), (nb, nb)).copy_from(b);
        Self::from_matrix(statistics, &g)
    }
}

pub(crate) fn same_space<C: Coeff>(a: &Arc<ModeSpace<C>>, b: &Arc<ModeSpace<C>>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::ModeMismatch)
    }
}
