//! Wave-number-space expressions built on test functions.
//!
//! Most transforms of a Gaussian packet stay in the packet family, but some
//! arguments of the pre-inner products do not: on-shell codifferentials and
//! exterior derivatives multiply by a polynomial in `k`, and frequency
//! restrictions multiply by a step function. [`Spectral`] represents such an
//! argument as an expression tree evaluated pointwise on the shell.

use crate::error::{Error, Result};
use crate::geometry::{c, FourVector, C64};
use crate::packets::{Payload, Species, TestFunction};

#[derive(Clone, Debug, PartialEq)]
pub enum Spectral {
    Function(TestFunction),
    /// Position-space complex conjugate: `conj(h̃(−k))`.
    Conjugate(Box<Spectral>),
    /// Position-space reversal: `h̃(−k)`.
    Reverse(Box<Spectral>),
    Dual(Box<Spectral>),
    Helicity(Box<Spectral>, f64),
    /// `½(1+iD)h + ½(1−iD)h⁻`.
    Bullet(Box<Spectral>),
    Codifferential(Box<Spectral>),
    Exterior(Box<Spectral>),
    /// `θ(±k₀) h̃(k)`.
    Frequency(Box<Spectral>, f64),
    Combination(Species, Vec<(C64, Spectral)>),
}

impl From<TestFunction> for Spectral {
    fn from(f: TestFunction) -> Spectral {
        Spectral::Function(f)
    }
}

impl From<&TestFunction> for Spectral {
    fn from(f: &TestFunction) -> Spectral {
        Spectral::Function(f.clone())
    }
}

fn neg(k: &FourVector) -> FourVector {
    [-k[0], -k[1], -k[2], -k[3]]
}

impl Spectral {
    pub fn species(&self) -> Species {
        match self {
            Spectral::Function(f) => f.species,
            Spectral::Conjugate(h)
            | Spectral::Reverse(h)
            | Spectral::Helicity(h, _)
            | Spectral::Bullet(h)
            | Spectral::Frequency(h, _) => h.species(),
            Spectral::Dual(h) => match h.species() {
                Species::OneForm => Species::ThreeForm,
                Species::ThreeForm => Species::OneForm,
                s => s,
            },
            Spectral::Codifferential(h) => match h.species() {
                Species::OneForm => Species::Scalar,
                Species::Bivector => Species::OneForm,
                _ => Species::Bivector,
            },
            Spectral::Exterior(h) => match h.species() {
                Species::OneForm => Species::Bivector,
                _ => Species::ThreeForm,
            },
            Spectral::Combination(s, _) => *s,
        }
    }

    pub fn conjugate(self) -> Spectral {
        Spectral::Conjugate(Box::new(self))
    }

    pub fn reverse(self) -> Spectral {
        Spectral::Reverse(Box::new(self))
    }

    pub fn dual(self) -> Result<Spectral> {
        match self.species() {
            Species::Bivector | Species::Pair | Species::OneForm | Species::ThreeForm => Ok(Spectral::Dual(Box::new(self))),
            s => Err(Error::Species {
                expected: "bivector, pair or odd form".into(),
                found: s,
            }),
        }
    }

    pub fn helicity(self, sign: f64) -> Result<Spectral> {
        match self.species() {
            Species::Bivector | Species::Pair => Ok(Spectral::Helicity(Box::new(self), sign)),
            s => Err(Error::Species {
                expected: "bivector or pair".into(),
                found: s,
            }),
        }
    }

    pub fn bullet(self) -> Result<Spectral> {
        match self.species() {
            Species::Bivector | Species::Pair => Ok(Spectral::Bullet(Box::new(self))),
            s => Err(Error::Species {
                expected: "bivector or pair".into(),
                found: s,
            }),
        }
    }

    pub fn codifferential(self) -> Result<Spectral> {
        match self.species() {
            Species::OneForm | Species::Bivector | Species::ThreeForm => Ok(Spectral::Codifferential(Box::new(self))),
            s => Err(Error::Species {
                expected: "1-, 2- or 3-form".into(),
                found: s,
            }),
        }
    }

    pub fn exterior(self) -> Result<Spectral> {
        match self.species() {
            Species::OneForm | Species::Bivector => Ok(Spectral::Exterior(Box::new(self))),
            s => Err(Error::Species {
                expected: "1- or 2-form".into(),
                found: s,
            }),
        }
    }

    pub fn frequency(self, sign: f64) -> Spectral {
        Spectral::Frequency(Box::new(self), sign)
    }

    pub fn scale(self, s: C64) -> Spectral {
        let species = self.species();
        Spectral::Combination(species, vec![(s, self)])
    }

    /// `Σ cᵢ hᵢ`; all terms must share a species.
    pub fn combination(terms: Vec<(C64, Spectral)>) -> Result<Spectral> {
        let species = terms
            .first()
            .map(|t| t.1.species())
            .ok_or_else(|| Error::Input("empty combination".into()))?;
        if let Some(t) = terms.iter().find(|t| t.1.species() != species) {
            return Err(Error::Species {
                expected: format!("{species:?}"),
                found: t.1.species(),
            });
        }
        Ok(Spectral::Combination(species, terms))
    }

    pub fn sum(a: Spectral, b: Spectral) -> Result<Spectral> {
        Self::combination(vec![(c(1.0, 0.0), a), (c(1.0, 0.0), b)])
    }

    /// Value at wave number `k` (upper index).
    pub fn eval(&self, k: &FourVector) -> Payload {
        match self {
            Spectral::Function(f) => f.fourier(k),
            Spectral::Conjugate(h) => h.eval(&neg(k)).conj(),
            Spectral::Reverse(h) => h.eval(&neg(k)),
            Spectral::Dual(h) => h.eval(k).dual().expect("species checked"),
            Spectral::Helicity(h, s) => h.eval(k).helicity(*s).expect("species checked"),
            Spectral::Bullet(h) => {
                let plus = h.eval(k).helicity(1.0).expect("species checked");
                let minus = h.eval(&neg(k)).helicity(-1.0).expect("species checked");
                plus.add(&minus)
            }
            Spectral::Codifferential(h) => h.eval(k).codifferential(k).expect("species checked"),
            Spectral::Exterior(h) => h.eval(k).exterior(k).expect("species checked"),
            Spectral::Frequency(h, s) => {
                if k[0] * s > 0.0 {
                    h.eval(k)
                } else {
                    Payload::zero(h.species())
                }
            }
            Spectral::Combination(species, terms) => {
                let mut acc = Payload::zero(*species);
                for (s, h) in terms {
                    acc.add_assign(&h.eval(k).scale(*s));
                }
                acc
            }
        }
    }

    /// Largest support radius of the underlying test functions.
    pub fn support_radius(&self) -> f64 {
        match self {
            Spectral::Function(f) => f.support_radius(),
            Spectral::Conjugate(h)
            | Spectral::Reverse(h)
            | Spectral::Dual(h)
            | Spectral::Helicity(h, _)
            | Spectral::Bullet(h)
            | Spectral::Frequency(h, _) => h.support_radius(),
            // polynomial factors of k push the effective tail out slightly
            Spectral::Codifferential(h) | Spectral::Exterior(h) => h.support_radius() + 1.0,
            Spectral::Combination(_, terms) => terms.iter().map(|t| t.1.support_radius()).fold(0.0, f64::max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packets::{random_test_function, RandomSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diff(a: &Payload, b: &Payload) -> f64 {
        a.add(&b.scale(c(-1.0, 0.0))).max_abs()
    }

    #[test]
    fn tree_matches_packet_transforms() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let f = random_test_function(&RandomSpec::new(Species::Bivector), &mut r);
        let s = Spectral::from(&f);
        let pairs = [
            (s.clone().conjugate(), f.conjugate()),
            (s.clone().reverse(), f.reverse()),
            (s.clone().dual().unwrap(), f.dual().unwrap()),
            (s.clone().helicity(-1.0).unwrap(), f.helicity(-1.0).unwrap()),
            (s.clone().bullet().unwrap(), f.bullet().unwrap()),
            (s.clone().bullet().unwrap().conjugate().bullet().unwrap(), f.bullet().unwrap().conjugate().bullet().unwrap()),
        ];
        for _ in 0..20 {
            let k: FourVector = std::array::from_fn(|_| r.random_range(-2.0..2.0));
            for (tree, tf) in &pairs {
                assert!(diff(&tree.eval(&k), &tf.fourier(&k)) < 1e-13);
            }
        }
    }

    #[test]
    fn frequency_restriction_and_species_errors() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let f = random_test_function(&RandomSpec::new(Species::Scalar), &mut r);
        let s = Spectral::from(&f);
        let k = [1.0, 0.2, 0.3, 0.1];
        assert_eq!(s.clone().frequency(-1.0).eval(&k), Payload::zero(Species::Scalar));
        assert_eq!(s.clone().frequency(1.0).eval(&k), f.fourier(&k));
        assert!(s.clone().bullet().is_err());
        assert!(s.codifferential().is_err());
    }
}
