use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::Rng;

use super::{same_space, ModeSpace, Statistics};
use crate::error::{Error, Result};
use crate::geometry::C64;
use crate::scalar::Coeff;

/// `a†_{crea[0]} a†_{crea[1]} … a_{anni[0]} a_{anni[1]} …` with both words
/// sorted ascending (strictly, for fermions).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub crea: Vec<u16>,
    pub anni: Vec<u16>,
}

impl Monomial {
    pub fn identity() -> Monomial {
        Monomial {
            crea: Vec::new(),
            anni: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.crea.len() + self.anni.len()
    }
}

/// Sorts a word of mutually (anti)commuting operators. Returns the parity of
/// the permutation, or `None` when a fermionic word repeats a mode.
fn sort_word(word: &mut [u16], fermi: bool) -> Option<bool> {
    let mut odd = false;
    for i in 1..word.len() {
        let mut j = i;
        while j > 0 && word[j - 1] > word[j] {
            word.swap(j - 1, j);
            odd = !odd;
            j -= 1;
        }
    }
    if fermi && word.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(odd)
}

type Expansion<C> = Vec<(C, Vec<u16>, Vec<u16>)>;

/// Canonical normal-ordered polynomial. Zero coefficients are never stored,
/// so two polynomials denote the same operator iff their term maps agree
/// (exactly, for exact coefficient fields).
#[derive(Clone, Debug, PartialEq)]
pub struct NormalPoly<C: Coeff> {
    space: Arc<ModeSpace<C>>,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> NormalPoly<C> {
    pub fn zero(space: &Arc<ModeSpace<C>>) -> Self {
        NormalPoly {
            space: space.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(space: &Arc<ModeSpace<C>>, c: C) -> Self {
        let mut p = Self::zero(space);
        p.insert(Vec::new(), Vec::new(), c);
        p
    }

    pub fn identity(space: &Arc<ModeSpace<C>>) -> Self {
        Self::constant(space, C::one())
    }

    /// `a_i†`.
    pub fn create(space: &Arc<ModeSpace<C>>, i: usize) -> Self {
        let mut p = Self::zero(space);
        p.insert(vec![i as u16], Vec::new(), C::one());
        p
    }

    /// `a_i`.
    pub fn annihilate(space: &Arc<ModeSpace<C>>, i: usize) -> Self {
        let mut p = Self::zero(space);
        p.insert(Vec::new(), vec![i as u16], C::one());
        p
    }

    /// `a†(w) = Σ w_i a_i†`, linear in the coefficient vector.
    pub fn creator(space: &Arc<ModeSpace<C>>, w: &[C]) -> Self {
        let mut p = Self::zero(space);
        for (i, c) in w.iter().enumerate() {
            p.insert(vec![i as u16], Vec::new(), c.clone());
        }
        p
    }

    /// `a(v) = Σ conj(v_i) a_i`, antilinear in the coefficient vector.
    pub fn annihilator(space: &Arc<ModeSpace<C>>, v: &[C]) -> Self {
        let mut p = Self::zero(space);
        for (i, c) in v.iter().enumerate() {
            p.insert(Vec::new(), vec![i as u16], c.conj());
        }
        p
    }

    /// A single monomial given by arbitrary-order words; reordered with the
    /// statistics' sign (or dropped when it vanishes).
    pub fn monomial(space: &Arc<ModeSpace<C>>, crea: Vec<u16>, anni: Vec<u16>, c: C) -> Result<Self> {
        if crea.iter().chain(anni.iter()).any(|&m| m as usize >= space.n()) {
            return Err(Error::Input("mode index out of range".into()));
        }
        let mut p = Self::zero(space);
        p.insert(crea, anni, c);
        Ok(p)
    }

    pub fn space(&self) -> &Arc<ModeSpace<C>> {
        &self.space
    }

    pub fn statistics(&self) -> Statistics {
        self.space.statistics
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Largest net number of quanta any term can add.
    pub fn max_raise(&self) -> usize {
        self.terms
            .keys()
            .map(|m| m.crea.len().saturating_sub(m.anni.len()))
            .max()
            .unwrap_or(0)
    }

    fn fermi(&self) -> bool {
        self.space.statistics == Statistics::Fermi
    }

    fn insert(&mut self, mut crea: Vec<u16>, mut anni: Vec<u16>, c: C) {
        if c.is_zero() {
            return;
        }
        let fermi = self.fermi();
        let (Some(oc), Some(oa)) = (sort_word(&mut crea, fermi), sort_word(&mut anni, fermi)) else {
            return;
        };
        let c = if fermi && (oc ^ oa) { -c } else { c };
        self.accumulate(Monomial { crea, anni }, c);
    }

    fn accumulate(&mut self, m: Monomial, c: C) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_space(&self.space, &other.space)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        NormalPoly {
            space: self.space.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self::zero(&self.space);
        if s.is_zero() {
            return out;
        }
        for (m, c) in &self.terms {
            out.accumulate(m.clone(), c.clone() * s.clone());
        }
        out
    }

    /// `Σ sᵢ pᵢ` over polynomials on one space.
    pub fn sum(space: &Arc<ModeSpace<C>>, terms: &[(C, &Self)]) -> Result<Self> {
        let mut out = Self::zero(space);
        for (s, p) in terms {
            out = out.add(&p.scale(s))?;
        }
        Ok(out)
    }

    /// Normal-ordered expansion of `a_{β₁}…a_{β_r} a†_{γ₁}…a†_{γ_s}` as a list
    /// of `coefficient · (creation word) · (annihilation word)`.
    fn contract(&self, betas: &[u16], gammas: &[u16], cache: &mut HashMap<(Vec<u16>, Vec<u16>), Expansion<C>>) -> Expansion<C> {
        if betas.is_empty() || gammas.is_empty() {
            return vec![(C::one(), gammas.to_vec(), betas.to_vec())];
        }
        let key = (betas.to_vec(), gammas.to_vec());
        if let Some(hit) = cache.get(&key) {
            return hit.clone();
        }
        let fermi = self.fermi();
        let (b, rest) = (betas[betas.len() - 1], &betas[..betas.len() - 1]);
        let mut out = Vec::new();
        let mut reduced = Vec::with_capacity(gammas.len());
        for (j, &g) in gammas.iter().enumerate() {
            let gr = self.space.gram(b as usize, g as usize);
            if gr.is_zero() {
                continue;
            }
            let factor = if fermi && j % 2 == 1 { -gr.clone() } else { gr.clone() };
            reduced.clear();
            reduced.extend(gammas.iter().enumerate().filter(|&(l, _)| l != j).map(|(_, &x)| x));
            for (c2, cr, an) in self.contract(rest, &reduced, cache) {
                out.push((c2 * factor.clone(), cr, an));
            }
        }
        let pass = if fermi && gammas.len() % 2 == 1 { -C::one() } else { C::one() };
        for (c2, cr, mut an) in self.contract(rest, gammas, cache) {
            an.push(b);
            out.push((c2 * pass.clone(), cr, an));
        }
        cache.insert(key, out.clone());
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_space(&self.space, &other.space)?;
        let mut out = Self::zero(&self.space);
        let mut cache = HashMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let base = c1.clone() * c2.clone();
                for (c, cr, an) in self.contract(&m1.anni, &m2.crea, &mut cache) {
                    let mut crea = m1.crea.clone();
                    crea.extend_from_slice(&cr);
                    let mut anni = an;
                    anni.extend_from_slice(&m2.anni);
                    out.insert(crea, anni, base.clone() * c);
                }
            }
        }
        Ok(out)
    }

    /// Product of several polynomials, left to right.
    pub fn product(space: &Arc<ModeSpace<C>>, factors: &[&Self]) -> Result<Self> {
        let mut out = Self::identity(space);
        for f in factors {
            out = out.mul(f)?;
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        let mut out = Self::identity(&self.space);
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    /// Hermitian adjoint. Reversing a fermionic word of length `p` costs
    /// `p(p−1)/2` transpositions.
    pub fn adjoint(&self) -> Self {
        let fermi = self.fermi();
        let mut out = Self::zero(&self.space);
        for (m, c) in &self.terms {
            let (p, q) = (m.crea.len(), m.anni.len());
            let flips = p * p.saturating_sub(1) / 2 + q * q.saturating_sub(1) / 2;
            let c = if fermi && flips % 2 == 1 { -c.conj() } else { c.conj() };
            out.accumulate(
                Monomial {
                    crea: m.anni.clone(),
                    anni: m.crea.clone(),
                },
                c,
            );
        }
        out
    }

    /// Vacuum expectation: the coefficient of the identity.
    pub fn vev(&self) -> C {
        self.coefficient(&Monomial::identity())
    }

    /// Largest coefficient magnitude of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.max_abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.to_c64().norm()).fold(0.0, f64::max)
    }

    /// Same operator on a numerically typed copy of the mode space.
    pub fn to_numeric(&self, space: &Arc<ModeSpace<C64>>) -> Result<NormalPoly<C64>> {
        if space.n() != self.space.n() || space.statistics != self.space.statistics {
            return Err(Error::ModeMismatch);
        }
        Ok(NormalPoly {
            space: space.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.to_c64())).collect(),
        })
    }
}

impl<C: Coeff> ModeSpace<C> {
    /// Numeric copy of this mode space.
    pub fn to_numeric(&self) -> Result<Arc<ModeSpace<C64>>> {
        let n = self.n();
        let mut g = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                g.push(self.gram(i, j).to_c64());
            }
        }
        ModeSpace::new(self.statistics, n, g)
    }
}

/// Random polynomial with `terms` monomials of total degree ≤ `max_degree`
/// and complex coefficients of modulus in [0.2, 1].
pub fn random_poly<R: Rng + ?Sized>(space: &Arc<ModeSpace<C64>>, max_degree: usize, terms: usize, rng: &mut R) -> NormalPoly<C64> {
    let n = space.n();
    let mut p = NormalPoly::zero(space);
    for _ in 0..terms {
        let d = rng.random_range(0..=max_degree);
        let nc = rng.random_range(0..=d);
        let crea = (0..nc).map(|_| rng.random_range(0..n) as u16).collect();
        let anni = (0..d - nc).map(|_| rng.random_range(0..n) as u16).collect();
        let c = C64::from_polar(rng.random_range(0.2..1.0), rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
        p.insert(crea, anni, c);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::c;
    use crate::scalar::ExactComplex;

    fn space(stats: Statistics) -> Arc<ModeSpace<ExactComplex>> {
        // G = [[2, 1+i], [1−i, 3]]
        let g = vec![
            ExactComplex::gaussian(2, 0),
            ExactComplex::gaussian(1, 1),
            ExactComplex::gaussian(1, -1),
            ExactComplex::gaussian(3, 0),
        ];
        ModeSpace::new(stats, 2, g).unwrap()
    }

    #[test]
    fn single_contraction_bose() {
        let s = space(Statistics::Bose);
        let a0 = NormalPoly::annihilate(&s, 0);
        let a1d = NormalPoly::create(&s, 1);
        let lhs = a0.mul(&a1d).unwrap();
        let rhs = NormalPoly::constant(&s, s.gram(0, 1).clone()).add(&a1d.mul(&a0).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(a0.commutator(&a1d).unwrap(), NormalPoly::constant(&s, ExactComplex::gaussian(1, 1)));
    }

    #[test]
    fn single_contraction_fermi() {
        let s = space(Statistics::Fermi);
        let b0 = NormalPoly::annihilate(&s, 0);
        let b1d = NormalPoly::create(&s, 1);
        let rhs = NormalPoly::constant(&s, s.gram(0, 1).clone()).sub(&b1d.mul(&b0).unwrap()).unwrap();
        assert_eq!(b0.mul(&b1d).unwrap(), rhs);
        let b1 = NormalPoly::annihilate(&s, 1);
        assert!(b0.anticommutator(&b1).unwrap().is_zero());
        assert!(b0.mul(&b0).unwrap().is_zero());
    }

    #[test]
    fn adjoint_is_involution_and_reverses_products() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        use rand::SeedableRng;
        for stats in [Statistics::Bose, Statistics::Fermi] {
            let g = nalgebra::DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, 0.2), c(0.3, -0.2), c(0.8, 0.0)]);
            let s = ModeSpace::from_matrix(stats, &g).unwrap();
            let x = random_poly(&s, 3, 4, &mut rng);
            let y = random_poly(&s, 3, 4, &mut rng);
            assert_eq!(x.adjoint().adjoint(), x);
            let lhs = x.mul(&y).unwrap().adjoint();
            let rhs = y.adjoint().mul(&x.adjoint()).unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-14);
            assert!(x.commutator(&x).unwrap().max_abs() < 1e-15);
        }
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let a = space(Statistics::Bose);
        let b = space(Statistics::Fermi);
        let x = NormalPoly::create(&a, 0);
        let y = NormalPoly::create(&b, 0);
        assert!(matches!(x.mul(&y), Err(Error::ModeMismatch)));
    }
}
