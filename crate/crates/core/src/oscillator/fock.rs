//! Dense truncated-Fock representation, used as a brute-force oracle.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::poly::{Monomial, NormalPoly};
use super::{ModeSpace, Statistics};
use crate::error::{Error, Result};
use crate::geometry::C64;

/// Mode operators on an orthonormalised Fock space.
///
/// With `G = L L†` the modes are realised as `a_i = Σ_k L_ik c_k` over
/// orthonormal `c_k`. Bosonic spaces keep states of total occupation at most
/// `cutoff`; fermionic spaces are complete (Jordan–Wigner).
#[derive(Clone, Debug)]
pub struct FockOracle {
    pub statistics: Statistics,
    pub cutoff: Option<usize>,
    space: Arc<ModeSpace<C64>>,
    factor: DMatrix<C64>,
    occupations: Vec<usize>,
    /// `(c_k)_{to, from}` entries per orthonormal mode.
    lowering: Vec<Vec<(usize, usize, f64)>>,
}

const RANK_TOL: f64 = 1e-13;

fn factorize(g: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    // complex Cholesky happily takes square roots of negative pivots
    if let Some(ch) = g.clone().cholesky() {
        let l = ch.l();
        if (0..l.nrows()).all(|i| l[(i, i)].im == 0.0 && l[(i, i)].re > 0.0) {
            return Ok(l);
        }
    }
    // semi-definite fallback: G = V Λ V†, L = V √Λ over the nonzero spectrum
    let eig = g.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut cols = Vec::new();
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l < -1e-10 * top.max(1e-300) {
            return Err(Error::PsdViolation {
                min_eigenvalue: l,
                norm: top,
            });
        }
        if l > RANK_TOL * top {
            cols.push(eig.eigenvectors.column(k) * C64::new(l.sqrt(), 0.0));
        }
    }
    if cols.is_empty() {
        return Ok(DMatrix::zeros(g.nrows(), 0));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Occupation vectors with total ≤ `cutoff`, ordered by total then
/// lexicographically; the vacuum comes first.
fn bose_basis(r: usize, cutoff: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for total in 0..=cutoff {
        let mut cur = vec![0u8; r];
        distribute(&mut cur, 0, total, &mut out);
    }
    out
}

fn distribute(cur: &mut Vec<u8>, pos: usize, left: usize, out: &mut Vec<Vec<u8>>) {
    if pos + 1 >= cur.len() {
        if !cur.is_empty() {
            cur[pos] = left as u8;
        }
        if cur.is_empty() && left > 0 {
            return;
        }
        out.push(cur.clone());
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k as u8;
        distribute(cur, pos + 1, left - k, out);
    }
    cur[pos] = 0;
}

impl FockOracle {
    pub fn new(space: &Arc<ModeSpace<C64>>, cutoff: usize) -> Result<FockOracle> {
        let factor = factorize(&space.matrix())?;
        let r = factor.ncols();
        match space.statistics {
            Statistics::Bose => {
                let basis = bose_basis(r, cutoff);
                let index: HashMap<Vec<u8>, usize> = basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
                let mut lowering = vec![Vec::new(); r];
                for (from, occ) in basis.iter().enumerate() {
                    for (k, low) in lowering.iter_mut().enumerate() {
                        if occ[k] > 0 {
                            let mut t = occ.clone();
                            t[k] -= 1;
                            low.push((index[&t], from, (occ[k] as f64).sqrt()));
                        }
                    }
                }
                Ok(FockOracle {
                    statistics: Statistics::Bose,
                    cutoff: Some(cutoff),
                    space: space.clone(),
                    factor,
                    occupations: basis.iter().map(|b| b.iter().map(|&x| x as usize).sum()).collect(),
                    lowering,
                })
            }
            Statistics::Fermi => Self::fermi(space, factor),
        }
    }

    /// Fermionic oracle; the cutoff is irrelevant.
    pub fn new_fermi(space: &Arc<ModeSpace<C64>>) -> Result<FockOracle> {
        if space.statistics != Statistics::Fermi {
            return Err(Error::Statistics("fermi"));
        }
        Self::fermi(space, factorize(&space.matrix())?)
    }

    fn fermi(space: &Arc<ModeSpace<C64>>, factor: DMatrix<C64>) -> Result<FockOracle> {
        let r = factor.ncols();
        if r > 12 {
            return Err(Error::Input(format!("{r} fermionic modes exceed the dense oracle limit")));
        }
        let dim = 1usize << r;
        let mut lowering = vec![Vec::new(); r];
        for s in 0..dim {
            for (k, low) in lowering.iter_mut().enumerate() {
                if s & (1 << k) != 0 {
                    let sign = if (s & ((1 << k) - 1)).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                    low.push((s ^ (1 << k), s, sign));
                }
            }
        }
        Ok(FockOracle {
            statistics: Statistics::Fermi,
            cutoff: None,
            space: space.clone(),
            factor,
            occupations: (0..dim).map(|s: usize| s.count_ones() as usize).collect(),
            lowering,
        })
    }

    pub fn dim(&self) -> usize {
        self.occupations.len()
    }

    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    pub fn space(&self) -> &Arc<ModeSpace<C64>> {
        &self.space
    }

    pub fn vacuum(&self) -> DVector<C64> {
        let mut v = DVector::zeros(self.dim());
        v[0] = C64::new(1.0, 0.0);
        v
    }

    pub fn occupation(&self, state: usize) -> usize {
        self.occupations[state]
    }

    /// Basis states on which an operator raising by at most `raise` quanta is
    /// represented without truncation error.
    pub fn interior(&self, raise: usize) -> Vec<usize> {
        match self.cutoff {
            None => (0..self.dim()).collect(),
            Some(n) => (0..self.dim()).filter(|&s| self.occupations[s] + raise <= n).collect(),
        }
    }

    fn lower(&self, i: usize, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(v.len());
        for (k, low) in self.lowering.iter().enumerate() {
            let l = self.factor[(i, k)];
            if l == C64::new(0.0, 0.0) {
                continue;
            }
            for &(to, from, x) in low {
                out[to] += l * x * v[from];
            }
        }
        out
    }

    fn raise(&self, i: usize, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(v.len());
        for (k, low) in self.lowering.iter().enumerate() {
            let l = self.factor[(i, k)].conj();
            if l == C64::new(0.0, 0.0) {
                continue;
            }
            for &(to, from, x) in low {
                out[from] += l * x * v[to];
            }
        }
        out
    }

    fn apply_monomial(&self, m: &Monomial, v: &DVector<C64>) -> DVector<C64> {
        let mut w = v.clone();
        for &i in m.anni.iter().rev() {
            w = self.lower(i as usize, &w);
        }
        for &i in m.crea.iter().rev() {
            w = self.raise(i as usize, &w);
        }
        w
    }

    fn check(&self, x: &NormalPoly<C64>) -> Result<()> {
        if x.space().n() != self.space.n() || x.statistics() != self.statistics {
            return Err(Error::ModeMismatch);
        }
        Ok(())
    }

    /// `x v` in the truncated space.
    pub fn apply(&self, x: &NormalPoly<C64>, v: &DVector<C64>) -> Result<DVector<C64>> {
        self.check(x)?;
        let mut out = DVector::zeros(v.len());
        for (m, c) in x.terms() {
            out += self.apply_monomial(m, v) * *c;
        }
        Ok(out)
    }

    /// Dense image. Errors when some term raises past the cutoff everywhere.
    pub fn matrix_image(&self, x: &NormalPoly<C64>) -> Result<DMatrix<C64>> {
        self.check(x)?;
        if let Some(n) = self.cutoff {
            if x.max_raise() > n {
                return Err(Error::Cutoff {
                    degree: x.max_raise(),
                    cutoff: n,
                });
            }
        }
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        let mut e = DVector::zeros(d);
        for s in 0..d {
            e[s] = C64::new(1.0, 0.0);
            out.set_column(s, &self.apply(x, &e)?);
            e[s] = C64::new(0.0, 0.0);
        }
        Ok(out)
    }

    /// Selected columns of the image.
    pub fn columns(&self, x: &NormalPoly<C64>, states: &[usize]) -> Result<DMatrix<C64>> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, states.len());
        let mut e = DVector::zeros(d);
        for (col, &s) in states.iter().enumerate() {
            e[s] = C64::new(1.0, 0.0);
            out.set_column(col, &self.apply(x, &e)?);
            e[s] = C64::new(0.0, 0.0);
        }
        Ok(out)
    }

    /// `⟨0| x |0⟩`.
    pub fn expectation(&self, x: &NormalPoly<C64>) -> Result<C64> {
        let v = self.apply(x, &self.vacuum())?;
        Ok(v[0])
    }

    /// `|0⟩⟨0|`.
    pub fn vacuum_projector(&self) -> DMatrix<C64> {
        let mut p = DMatrix::zeros(self.dim(), self.dim());
        p[(0, 0)] = C64::new(1.0, 0.0);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::c;

    fn gram2() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.4, 0.3), c(0.4, -0.3), c(1.2, 0.0)])
    }

    #[test]
    fn bose_basis_counts() {
        assert_eq!(bose_basis(3, 10).len(), 286);
        assert_eq!(bose_basis(1, 4).len(), 5);
        assert_eq!(bose_basis(2, 0), vec![vec![0, 0]]);
    }

    #[test]
    fn relations_hold_in_interior() {
        for stats in [Statistics::Bose, Statistics::Fermi] {
            let s = ModeSpace::from_matrix(stats, &gram2()).unwrap();
            let o = FockOracle::new(&s, 6).unwrap();
            let inside = o.interior(2);
            for i in 0..2 {
                for j in 0..2 {
                    let a = NormalPoly::annihilate(&s, i);
                    let ad = NormalPoly::create(&s, j);
                    let (ma, mad) = (o.matrix_image(&a).unwrap(), o.matrix_image(&ad).unwrap());
                    let rel = match stats {
                        Statistics::Bose => &ma * &mad - &mad * &ma,
                        Statistics::Fermi => &ma * &mad + &mad * &ma,
                    };
                    for &st in &inside {
                        for r in 0..o.dim() {
                            let want = if r == st { s.matrix()[(i, j)] } else { c(0.0, 0.0) };
                            assert!((rel[(r, st)] - want).norm() < 1e-13);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rank_deficient_gram_is_accepted() {
        let g = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let s = ModeSpace::from_matrix(Statistics::Fermi, &g).unwrap();
        let o = FockOracle::new_fermi(&s).unwrap();
        assert_eq!(o.rank(), 1);
        let bad = DMatrix::from_row_slice(1, 1, &[c(-1.0, 0.0)]);
        let s = ModeSpace::from_matrix(Statistics::Bose, &bad).unwrap();
        let r = FockOracle::new(&s, 3);
        assert!(matches!(r, Err(Error::PsdViolation { .. })), "{r:?}");
    }
}
