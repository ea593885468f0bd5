//! Closed forms for Gaussian (Weyl-type) exponentials in the bosonic vacuum.

use std::sync::Arc;

use super::{ModeSpace, NormalPoly, Statistics};
use crate::error::{Error, Result};
use crate::geometry::C64;

/// `⟨0| e^{iλ(a(v) + a†(w))} |0⟩ = e^{−λ² G(v,w)/2}`, from
/// `e^{X+Y} = e^Y e^X e^{[X,Y]/2}` with a central commutator.
pub fn gaussian_exp_weyl(space: &Arc<ModeSpace<C64>>, v: &[C64], w: &[C64], lambda: f64) -> Result<C64> {
    if space.statistics != Statistics::Bose {
        return Err(Error::Statistics("bose"));
    }
    Ok((-0.5 * lambda * lambda * space.pairing(v, w)).exp())
}

/// `⟨0| e^{a(v)} e^{a†(w)} |0⟩ = e^{G(v,w)}`.
pub fn coherent_overlap(space: &Arc<ModeSpace<C64>>, v: &[C64], w: &[C64]) -> Result<C64> {
    if space.statistics != Statistics::Bose {
        return Err(Error::Statistics("bose"));
    }
    Ok(space.pairing(v, w).exp())
}

/// `e^{κ} e^{a†(α)} e^{a(β)}`: a normal-ordered Gaussian exponential.
///
/// Products stay in this family because `[a(β), a†(α)] = G(β, α)` is
/// central, which makes the class an exact stand-in for Weyl operators.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalExp {
    space: Arc<ModeSpace<C64>>,
    pub crea: Vec<C64>,
    pub anni: Vec<C64>,
    pub log: C64,
}

impl NormalExp {
    pub fn identity(space: &Arc<ModeSpace<C64>>) -> NormalExp {
        let n = space.n();
        NormalExp {
            space: space.clone(),
            crea: vec![C64::new(0.0, 0.0); n],
            anni: vec![C64::new(0.0, 0.0); n],
            log: C64::new(0.0, 0.0),
        }
    }

    /// `e^{iλ(a(v) + a†(w))}`. Since `iλ a(v) = a(−iλ v)` and
    /// `e^{X+Y} = e^Y e^X e^{[X,Y]/2}`, the constant is `−λ² G(v, w)/2`.
    pub fn weyl(space: &Arc<ModeSpace<C64>>, v: &[C64], w: &[C64], lambda: f64) -> Result<NormalExp> {
        if space.statistics != Statistics::Bose {
            return Err(Error::Statistics("bose"));
        }
        let il = C64::new(0.0, lambda);
        Ok(NormalExp {
            space: space.clone(),
            crea: w.iter().map(|x| x * il).collect(),
            anni: v.iter().map(|x| x * (-il)).collect(),
            log: -0.5 * lambda * lambda * space.pairing(v, w),
        })
    }

    /// `e^{iλX}` for a polynomial of degree at most one.
    pub fn of_linear(x: &NormalPoly<C64>, lambda: f64) -> Result<NormalExp> {
        let space = x.space();
        let n = space.n();
        let (mut v, mut w) = (vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]);
        let mut constant = C64::new(0.0, 0.0);
        for (m, c) in x.terms() {
            match (m.crea.as_slice(), m.anni.as_slice()) {
                ([], []) => constant = *c,
                ([i], []) => w[*i as usize] = *c,
                ([], [i]) => v[*i as usize] = c.conj(),
                _ => return Err(Error::Input("Weyl exponent must be linear".into())),
            }
        }
        let mut e = Self::weyl(space, &v, &w, lambda)?;
        e.log += C64::new(0.0, lambda) * constant;
        Ok(e)
    }

    pub fn mul(&self, other: &NormalExp) -> Result<NormalExp> {
        super::same_space(&self.space, &other.space)?;
        let log = self.log + other.log + self.space.pairing(&self.anni, &other.crea);
        Ok(NormalExp {
            space: self.space.clone(),
            crea: self.crea.iter().zip(&other.crea).map(|(a, b)| a + b).collect(),
            anni: self.anni.iter().zip(&other.anni).map(|(a, b)| a + b).collect(),
            log,
        })
    }

    pub fn scale_log(&self, shift: C64) -> NormalExp {
        let mut e = self.clone();
        e.log += shift;
        e
    }

    pub fn vev(&self) -> C64 {
        self.log.exp()
    }

    /// `⟨0| e^{a(p)} · self · e^{a†(q)} |0⟩`.
    pub fn matrix_element(&self, p: &[C64], q: &[C64]) -> C64 {
        let s = &self.space;
        (self.log + s.pairing(p, &self.crea) + s.pairing(p, q) + s.pairing(&self.anni, q)).exp()
    }
}
