//! Gaussian wave-packet test functions and their closed-form Fourier transforms.
//!
//! A packet is `c ε exp(i p·x) exp(−(x−x₀)ᵀ Σ (x−x₀))` with `p·x` the Minkowski
//! product and `Σ` a Euclidean positive-definite form. The transform convention
//! is `f̃(k) = ∫ f(x) e^{i k·x} d⁴x`, under which reversal `f⁻(x) = f(−x)` gives
//! `f̃⁻(k) = f̃(−k)`.

use std::f64::consts::PI;

use nalgebra::{Matrix4, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    self, c, minkowski_dot, Bivector, DiracMatrices, FourVector, OneForm, Spinor, ThreeForm, C64,
    ZERO,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Species {
    Scalar,
    Pair,
    Bivector,
    OneForm,
    ThreeForm,
    Spinor,
}

impl Species {
    /// Number of complex components in the serialized payload.
    pub fn width(self) -> usize {
        match self {
            Species::Scalar => 1,
            Species::Pair => 2,
            Species::Bivector => 6,
            Species::OneForm | Species::ThreeForm | Species::Spinor => 4,
        }
    }
}

/// The tensor or spinor value carried by a packet, or the value of a test
/// function at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Payload {
    Scalar(C64),
    Pair([C64; 2]),
    Bivector(Bivector),
    OneForm(OneForm),
    ThreeForm(ThreeForm),
    Spinor(Spinor),
}

impl Payload {
    pub fn zero(species: Species) -> Payload {
        match species {
            Species::Scalar => Payload::Scalar(ZERO),
            Species::Pair => Payload::Pair([ZERO; 2]),
            Species::Bivector => Payload::Bivector(Bivector::ZERO),
            Species::OneForm => Payload::OneForm(OneForm::ZERO),
            Species::ThreeForm => Payload::ThreeForm(ThreeForm::ZERO),
            Species::Spinor => Payload::Spinor(Spinor::zeros()),
        }
    }

    pub fn species(&self) -> Species {
        match self {
            Payload::Scalar(_) => Species::Scalar,
            Payload::Pair(_) => Species::Pair,
            Payload::Bivector(_) => Species::Bivector,
            Payload::OneForm(_) => Species::OneForm,
            Payload::ThreeForm(_) => Species::ThreeForm,
            Payload::Spinor(_) => Species::Spinor,
        }
    }

    /// Independent components, in serialization order.
    pub fn components(&self) -> Vec<C64> {
        match self {
            Payload::Scalar(z) => vec![*z],
            Payload::Pair(v) => v.to_vec(),
            Payload::Bivector(b) => b.components().to_vec(),
            Payload::OneForm(u) => u.0.to_vec(),
            Payload::ThreeForm(w) => w.components().to_vec(),
            Payload::Spinor(s) => s.iter().copied().collect(),
        }
    }

    pub fn from_components(species: Species, v: &[C64]) -> Result<Payload> {
        if v.len() != species.width() {
            return Err(Error::Input(format!(
                "{:?} payload needs {} components, got {}",
                species,
                species.width(),
                v.len()
            )));
        }
        Ok(match species {
            Species::Scalar => Payload::Scalar(v[0]),
            Species::Pair => Payload::Pair([v[0], v[1]]),
            Species::Bivector => Payload::Bivector(Bivector::from_components(std::array::from_fn(|i| v[i]))),
            Species::OneForm => Payload::OneForm(OneForm(std::array::from_fn(|i| v[i]))),
            Species::ThreeForm => Payload::ThreeForm(ThreeForm::from_components(std::array::from_fn(|i| v[i]))),
            Species::Spinor => Payload::Spinor(Spinor::from_fn(|i, _| v[i])),
        })
    }

    pub fn scale(&self, s: C64) -> Payload {
        match self {
            Payload::Scalar(z) => Payload::Scalar(z * s),
            Payload::Pair(v) => Payload::Pair([v[0] * s, v[1] * s]),
            Payload::Bivector(b) => Payload::Bivector(b.scale(s)),
            Payload::OneForm(u) => Payload::OneForm(u.scale(s)),
            Payload::ThreeForm(w) => Payload::ThreeForm(w.scale(s)),
            Payload::Spinor(x) => Payload::Spinor(x * s),
        }
    }

    pub fn conj(&self) -> Payload {
        match self {
            Payload::Scalar(z) => Payload::Scalar(z.conj()),
            Payload::Pair(v) => Payload::Pair([v[0].conj(), v[1].conj()]),
            Payload::Bivector(b) => Payload::Bivector(b.conj()),
            Payload::OneForm(u) => Payload::OneForm(u.conj()),
            Payload::ThreeForm(w) => Payload::ThreeForm(w.conj()),
            Payload::Spinor(x) => Payload::Spinor(x.map(|z| z.conj())),
        }
    }

    /// Adds `other` in place. Panics on a species mismatch, which callers rule out.
    pub fn add_assign(&mut self, other: &Payload) {
        match (self, other) {
            (Payload::Scalar(a), Payload::Scalar(b)) => *a += b,
            (Payload::Pair(a), Payload::Pair(b)) => {
                a[0] += b[0];
                a[1] += b[1];
            }
            (Payload::Bivector(a), Payload::Bivector(b)) => *a = *a + *b,
            (Payload::OneForm(a), Payload::OneForm(b)) => *a = *a + *b,
            (Payload::ThreeForm(a), Payload::ThreeForm(b)) => *a = *a + *b,
            (Payload::Spinor(a), Payload::Spinor(b)) => *a += b,
            (a, b) => panic!("payload species mismatch: {:?} vs {:?}", a.species(), b.species()),
        }
    }

    pub fn add(&self, other: &Payload) -> Payload {
        let mut out = *self;
        out.add_assign(other);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.components().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hodge dual; on a pair this is the matrix `[[0,1],[−1,0]]`.
    pub fn dual(&self) -> Result<Payload> {
        match self {
            Payload::Bivector(b) => Ok(Payload::Bivector(b.hodge())),
            Payload::OneForm(u) => Ok(Payload::ThreeForm(u.hodge())),
            Payload::ThreeForm(w) => Ok(Payload::OneForm(w.hodge())),
            Payload::Pair(v) => Ok(Payload::Pair([v[1], -v[0]])),
            p => Err(Error::Species {
                expected: "bivector, pair or odd form".into(),
                found: p.species(),
            }),
        }
    }

    /// `½(ε ± i ⋆ε)` for bivectors (Hodge) and pairs (the I matrix).
    pub fn helicity(&self, sign: f64) -> Result<Payload> {
        match self {
            Payload::Bivector(_) | Payload::Pair(_) => {
                let d = self.dual()?;
                Ok(self.add(&d.scale(c(0.0, sign))).scale(c(0.5, 0.0)))
            }
            p => Err(Error::Species {
                expected: "bivector or pair".into(),
                found: p.species(),
            }),
        }
    }

    pub fn codifferential(&self, k: &FourVector) -> Result<Payload> {
        match self {
            Payload::OneForm(u) => Ok(Payload::Scalar(geometry::codiff_one(k, u))),
            Payload::Bivector(b) => Ok(Payload::OneForm(geometry::codiff_two(k, b))),
            Payload::ThreeForm(w) => Ok(Payload::Bivector(geometry::codiff_three(k, w))),
            p => Err(Error::Species {
                expected: "1-, 2- or 3-form".into(),
                found: p.species(),
            }),
        }
    }

    pub fn exterior(&self, k: &FourVector) -> Result<Payload> {
        match self {
            Payload::OneForm(u) => Ok(Payload::Bivector(geometry::exterior_one(k, u))),
            Payload::Bivector(b) => Ok(Payload::ThreeForm(geometry::exterior_two(k, b))),
            p => Err(Error::Species {
                expected: "1- or 2-form".into(),
                found: p.species(),
            }),
        }
    }

    /// `C γ0ᵀ conj(ε)` on a spinor payload.
    pub fn charge_conjugate(&self, set: &DiracMatrices) -> Result<Payload> {
        match self {
            Payload::Spinor(s) => Ok(Payload::Spinor(set.charge_conjugate(s))),
            p => Err(Error::Species {
                expected: "spinor".into(),
                found: p.species(),
            }),
        }
    }

    pub fn random<R: Rng + ?Sized>(species: Species, real: bool, rng: &mut R) -> Payload {
        let v: Vec<C64> = (0..species.width())
            .map(|_| {
                let z = geometry::random_c64(rng);
                if real {
                    c(z.re, 0.0)
                } else {
                    z
                }
            })
            .collect();
        Payload::from_components(species, &v).expect("width matches")
    }
}

/// Derived quantities needed at every Fourier evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
struct PacketCache {
    /// `η Σ⁻¹ η / 4`, acting on upper-index wave numbers.
    quad: [[f64; 4]; 4],
    /// `π² / √det Σ`.
    prefactor: f64,
    lambda_min: f64,
    lambda_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPacket {
    pub amplitude: C64,
    pub center: FourVector,
    pub carrier: FourVector,
    pub sigma: [[f64; 4]; 4],
    pub payload: Payload,
    cache: PacketCache,
}

impl GaussianPacket {
    pub fn new(
        amplitude: C64,
        center: FourVector,
        carrier: FourVector,
        sigma: [[f64; 4]; 4],
        payload: Payload,
    ) -> Result<GaussianPacket> {
        let cache = Self::derive(&sigma)?;
        Ok(GaussianPacket {
            amplitude,
            center,
            carrier,
            sigma,
            payload,
            cache,
        })
    }

    fn derive(sigma: &[[f64; 4]; 4]) -> Result<PacketCache> {
        for a in 0..4 {
            for b in 0..4 {
                if !sigma[a][b].is_finite() || sigma[a][b] != sigma[b][a] {
                    return Err(Error::Input("width matrix must be finite and symmetric".into()));
                }
            }
        }
        let m = Matrix4::from_fn(|r, cc| sigma[r][cc]);
        let eig = SymmetricEigen::new(m);
        let lambda_min = eig.eigenvalues.min();
        let lambda_max = eig.eigenvalues.max();
        if lambda_min <= 0.0 {
            return Err(Error::Input(format!(
                "width matrix not positive definite (min eigenvalue {lambda_min:e})"
            )));
        }
        let chol = m
            .cholesky()
            .ok_or_else(|| Error::Input("width matrix not positive definite".into()))?;
        let inv = chol.inverse();
        let det = m.determinant();
        let mut quad = [[0.0; 4]; 4];
        for (r, row) in quad.iter_mut().enumerate() {
            for (cc, q) in row.iter_mut().enumerate() {
                *q = geometry::METRIC[r] * inv[(r, cc)] * geometry::METRIC[cc] / 4.0;
            }
        }
        // symmetric to the bit so that k and −k see the same envelope
        for r in 0..4 {
            for cc in (r + 1)..4 {
                let s = 0.5 * (quad[r][cc] + quad[cc][r]);
                quad[r][cc] = s;
                quad[cc][r] = s;
            }
        }
        Ok(PacketCache {
            quad,
            prefactor: PI * PI / det.sqrt(),
            lambda_min,
            lambda_max,
        })
    }

    pub fn species(&self) -> Species {
        self.payload.species()
    }

    pub fn lambda_max(&self) -> f64 {
        self.cache.lambda_max
    }

    pub fn lambda_min(&self) -> f64 {
        self.cache.lambda_min
    }

    /// Scalar factor of the Fourier transform; the value is this times the payload.
    #[inline]
    pub fn fourier_factor(&self, k: &FourVector) -> C64 {
        let q = [
            k[0] + self.carrier[0],
            k[1] + self.carrier[1],
            k[2] + self.carrier[2],
            k[3] + self.carrier[3],
        ];
        let mut gauss = 0.0;
        for r in 0..4 {
            let row = &self.cache.quad[r];
            gauss += q[r] * (row[0] * q[0] + row[1] * q[1] + row[2] * q[2] + row[3] * q[3]);
        }
        let phase = minkowski_dot(&q, &self.center);
        self.amplitude * C64::from_polar(self.cache.prefactor * (-gauss).exp(), phase)
    }

    /// Scalar factor of the position-space value.
    pub fn position_factor(&self, x: &FourVector) -> C64 {
        let d = [
            x[0] - self.center[0],
            x[1] - self.center[1],
            x[2] - self.center[2],
            x[3] - self.center[3],
        ];
        let mut gauss = 0.0;
        for r in 0..4 {
            for cc in 0..4 {
                gauss += d[r] * self.sigma[r][cc] * d[cc];
            }
        }
        self.amplitude * C64::from_polar((-gauss).exp(), minkowski_dot(&self.carrier, x))
    }

    fn same_envelope(&self, other: &GaussianPacket) -> bool {
        let bits = |p: &GaussianPacket| {
            let mut v: Vec<u64> = p.center.iter().chain(p.carrier.iter()).map(|x| x.to_bits()).collect();
            v.extend(p.sigma.iter().flatten().map(|x| x.to_bits()));
            v
        };
        bits(self) == bits(other)
    }

    fn with(&self, amplitude: C64, center: FourVector, carrier: FourVector, payload: Payload) -> GaussianPacket {
        GaussianPacket {
            amplitude,
            center,
            carrier,
            sigma: self.sigma,
            payload,
            cache: self.cache,
        }
    }
}

fn neg4(v: &FourVector) -> FourVector {
    [-v[0], -v[1], -v[2], -v[3]]
}

/// A finite sum of Gaussian packets sharing one payload species.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub species: Species,
    pub packets: Vec<GaussianPacket>,
}

impl TestFunction {
    pub fn zero(species: Species) -> TestFunction {
        TestFunction {
            species,
            packets: Vec::new(),
        }
    }

    pub fn new(species: Species, packets: Vec<GaussianPacket>) -> Result<TestFunction> {
        for p in &packets {
            if p.species() != species {
                return Err(Error::Species {
                    expected: format!("{species:?}"),
                    found: p.species(),
                });
            }
        }
        Ok(TestFunction { species, packets })
    }

    pub fn single(packet: GaussianPacket) -> TestFunction {
        TestFunction {
            species: packet.species(),
            packets: vec![packet],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn require(&self, species: Species) -> Result<()> {
        if self.species == species {
            Ok(())
        } else {
            Err(Error::Species {
                expected: format!("{species:?}"),
                found: self.species,
            })
        }
    }

    pub fn fourier(&self, k: &FourVector) -> Payload {
        let mut acc = Payload::zero(self.species);
        for p in &self.packets {
            acc.add_assign(&p.payload.scale(p.fourier_factor(k)));
        }
        acc
    }

    pub fn evaluate(&self, x: &FourVector) -> Payload {
        let mut acc = Payload::zero(self.species);
        for p in &self.packets {
            acc.add_assign(&p.payload.scale(p.position_factor(x)));
        }
        acc
    }

    fn map_packets(&self, f: impl Fn(&GaussianPacket) -> Result<GaussianPacket>) -> Result<TestFunction> {
        let packets = self.packets.iter().map(f).collect::<Result<Vec<_>>>()?;
        let species = packets.first().map(|p| p.species()).unwrap_or(self.species);
        Ok(TestFunction { species, packets })
    }

    /// Complex conjugate in position space.
    pub fn conjugate(&self) -> TestFunction {
        self.map_packets(|p| Ok(p.with(p.amplitude.conj(), p.center, neg4(&p.carrier), p.payload.conj())))
            .expect("infallible")
    }

    /// `f⁻(x) = f(−x)`.
    pub fn reverse(&self) -> TestFunction {
        self.map_packets(|p| Ok(p.with(p.amplitude, neg4(&p.center), neg4(&p.carrier), p.payload)))
            .expect("infallible")
    }

    /// `x ↦ f(x − a)`.
    pub fn translate(&self, a: &FourVector) -> TestFunction {
        self.map_packets(|p| {
            let center = [p.center[0] + a[0], p.center[1] + a[1], p.center[2] + a[2], p.center[3] + a[3]];
            let phase = C64::from_polar(1.0, -minkowski_dot(&p.carrier, a));
            Ok(p.with(p.amplitude * phase, center, p.carrier, p.payload))
        })
        .expect("infallible")
    }

    pub fn scale(&self, s: C64) -> TestFunction {
        if s == ZERO {
            return TestFunction::zero(self.species);
        }
        self.map_packets(|p| Ok(p.with(p.amplitude * s, p.center, p.carrier, p.payload)))
            .expect("infallible")
    }

    /// Sum with term merging on bit-identical envelopes.
    pub fn add(&self, other: &TestFunction) -> Result<TestFunction> {
        if !other.is_zero() && !self.is_zero() && other.species != self.species {
            return Err(Error::Species {
                expected: format!("{:?}", self.species),
                found: other.species,
            });
        }
        let species = if self.is_zero() { other.species } else { self.species };
        let mut packets = self.packets.clone();
        packets.extend(other.packets.iter().cloned());
        Ok(TestFunction { species, packets }.merged())
    }

    pub fn sub(&self, other: &TestFunction) -> Result<TestFunction> {
        self.add(&other.scale(c(-1.0, 0.0)))
    }

    /// Linear combination `Σ cᵢ fᵢ`.
    pub fn combination(terms: &[(C64, &TestFunction)]) -> Result<TestFunction> {
        let species = terms
            .first()
            .map(|t| t.1.species)
            .ok_or_else(|| Error::Input("empty combination".into()))?;
        let mut acc = TestFunction::zero(species);
        for (s, f) in terms {
            acc = acc.add(&f.scale(*s))?;
        }
        Ok(acc)
    }

    /// Merges packets whose centre, carrier and width agree bit for bit.
    pub fn merged(&self) -> TestFunction {
        let mut out: Vec<GaussianPacket> = Vec::new();
        for p in &self.packets {
            if let Some(q) = out.iter_mut().find(|q| q.same_envelope(p)) {
                let sum = q.payload.scale(q.amplitude).add(&p.payload.scale(p.amplitude));
                q.amplitude = c(1.0, 0.0);
                q.payload = sum;
            } else {
                out.push(p.clone());
            }
        }
        TestFunction {
            species: self.species,
            packets: out,
        }
    }

    fn map_payload(&self, f: impl Fn(&Payload) -> Result<Payload>) -> Result<TestFunction> {
        self.map_packets(|p| Ok(p.with(p.amplitude, p.center, p.carrier, f(&p.payload)?)))
    }

    /// Pointwise Hodge dual (or the I matrix on pairs).
    pub fn dual(&self) -> Result<TestFunction> {
        match self.species {
            Species::Bivector | Species::Pair | Species::OneForm | Species::ThreeForm => {
                let mut out = self.map_payload(|e| e.dual())?;
                out.species = match self.species {
                    Species::OneForm => Species::ThreeForm,
                    Species::ThreeForm => Species::OneForm,
                    s => s,
                };
                Ok(out)
            }
            s => Err(Error::Species {
                expected: "bivector, pair or odd form".into(),
                found: s,
            }),
        }
    }

    /// `½(1 ± i⋆) f` on bivectors.
    pub fn helicity(&self, sign: f64) -> Result<TestFunction> {
        self.require(Species::Bivector)?;
        self.map_payload(|e| e.helicity(sign))
    }

    /// `f^• = ½(1+iD)f + ½(1−iD)f⁻` with D the Hodge dual (bivectors) or the I matrix (pairs).
    pub fn bullet(&self) -> Result<TestFunction> {
        match self.species {
            Species::Bivector | Species::Pair => {
                let plus = self.map_payload(|e| e.helicity(1.0))?;
                let minus = self.reverse().map_payload(|e| e.helicity(-1.0))?;
                plus.add(&minus)
            }
            s => Err(Error::Species {
                expected: "bivector or pair".into(),
                found: s,
            }),
        }
    }

    /// `U^c(x) = C γ0ᵀ conj(U(x))`.
    pub fn charge_conjugate(&self, set: &DiracMatrices) -> Result<TestFunction> {
        self.require(Species::Spinor)?;
        self.map_packets(|p| {
            Ok(p.with(
                p.amplitude.conj(),
                p.center,
                neg4(&p.carrier),
                p.payload.charge_conjugate(set)?,
            ))
        })
    }

    /// `k̃`-space image of the codifferential at `k`.
    pub fn codifferential_at(&self, k: &FourVector) -> Result<Payload> {
        match self.species {
            Species::OneForm | Species::Bivector | Species::ThreeForm => self.fourier(k).codifferential(k),
            s => Err(Error::Species {
                expected: "1-, 2- or 3-form".into(),
                found: s,
            }),
        }
    }

    /// `k̃`-space image of the exterior derivative at `k`.
    pub fn exterior_at(&self, k: &FourVector) -> Result<Payload> {
        match self.species {
            Species::OneForm | Species::Bivector => self.fourier(k).exterior(k),
            s => Err(Error::Species {
                expected: "1- or 2-form".into(),
                found: s,
            }),
        }
    }

    /// Spatial radius beyond which `|f̃|²` is below double-precision noise on
    /// any mass shell.
    pub fn support_radius(&self) -> f64 {
        self.packets
            .iter()
            .map(|p| {
                let pn = (p.carrier[1].powi(2) + p.carrier[2].powi(2) + p.carrier[3].powi(2)).sqrt();
                pn + (73.7 * p.lambda_max()).sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&TestFunctionRepr::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<TestFunction> {
        let repr: TestFunctionRepr = serde_json::from_str(s)?;
        repr.try_into()
    }
}

// ---------------------------------------------------------------------------
// serialization

#[derive(Serialize, Deserialize)]
struct PacketRepr {
    c: [f64; 2],
    x0: [f64; 4],
    p: [f64; 4],
    sigma: Vec<f64>,
    payload: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
pub struct TestFunctionRepr {
    species: Species,
    packets: Vec<PacketRepr>,
}

impl From<&TestFunction> for TestFunctionRepr {
    fn from(f: &TestFunction) -> Self {
        TestFunctionRepr {
            species: f.species,
            packets: f
                .packets
                .iter()
                .map(|p| PacketRepr {
                    c: [p.amplitude.re, p.amplitude.im],
                    x0: p.center,
                    p: p.carrier,
                    sigma: p.sigma.iter().flatten().copied().collect(),
                    payload: p.payload.components().iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<TestFunctionRepr> for TestFunction {
    type Error = Error;
    fn try_from(r: TestFunctionRepr) -> Result<TestFunction> {
        let mut packets = Vec::with_capacity(r.packets.len());
        for p in r.packets {
            if p.sigma.len() != 16 {
                return Err(Error::Input(format!("sigma needs 16 entries, got {}", p.sigma.len())));
            }
            let sigma: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| p.sigma[4 * i + j]));
            let comps: Vec<C64> = p.payload.iter().map(|z| c(z[0], z[1])).collect();
            let payload = Payload::from_components(r.species, &comps)?;
            packets.push(GaussianPacket::new(c(p.c[0], p.c[1]), p.x0, p.p, sigma, payload)?);
        }
        TestFunction::new(r.species, packets)
    }
}

// ---------------------------------------------------------------------------
// random generation

/// Parameters for [`random_test_function`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RandomSpec {
    pub species: Species,
    pub min_packets: usize,
    pub max_packets: usize,
    /// Eigenvalue range of each width matrix.
    pub sigma_range: (f64, f64),
    /// Half-width of the uniform box for centre components.
    pub center_scale: f64,
    /// Half-width of the uniform box for carrier components.
    pub carrier_scale: f64,
    /// Real-valued function: zero carrier, real amplitude and payload.
    pub real: bool,
}

impl RandomSpec {
    pub fn new(species: Species) -> RandomSpec {
        RandomSpec {
            species,
            min_packets: 1,
            max_packets: 2,
            sigma_range: (0.7, 1.5),
            center_scale: 0.5,
            carrier_scale: 1.0,
            real: false,
        }
    }

    pub fn real(mut self) -> RandomSpec {
        self.real = true;
        self
    }
}

/// A random orthogonal 4×4 matrix (QR of a uniform matrix, sign-fixed).
fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Matrix4<f64> {
    let m = Matrix4::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..4 {
        if r[(j, j)] < 0.0 {
            for i in 0..4 {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

pub fn random_sigma<R: Rng + ?Sized>(range: (f64, f64), rng: &mut R) -> [[f64; 4]; 4] {
    let q = random_rotation(rng);
    let d = Matrix4::from_diagonal(&nalgebra::Vector4::from_fn(|_, _| rng.random_range(range.0..=range.1)));
    let s = q * d * q.transpose();
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = 0.5 * (s[(i, j)] + s[(j, i)]);
        }
    }
    out
}

pub fn random_test_function<R: Rng + ?Sized>(spec: &RandomSpec, rng: &mut R) -> TestFunction {
    let n = rng.random_range(spec.min_packets..=spec.max_packets.max(spec.min_packets));
    let mut packets = Vec::with_capacity(n);
    for _ in 0..n {
        let sigma = random_sigma(spec.sigma_range, rng);
        let center: FourVector = std::array::from_fn(|_| rng.random_range(-1.0..1.0) * spec.center_scale);
        let carrier: FourVector = if spec.real {
            [0.0; 4]
        } else {
            std::array::from_fn(|_| rng.random_range(-1.0..1.0) * spec.carrier_scale)
        };
        let amplitude = if spec.real {
            c(rng.random_range(0.5..1.5), 0.0)
        } else {
            C64::from_polar(rng.random_range(0.5..1.5), rng.random_range(-PI..PI))
        };
        let payload = Payload::random(spec.species, spec.real, rng);
        packets.push(GaussianPacket::new(amplitude, center, carrier, sigma, payload).expect("positive definite"));
    }
    TestFunction {
        species: spec.species,
        packets,
    }
}

pub fn isotropic_sigma(lambda: f64) -> [[f64; 4]; 4] {
    let mut s = [[0.0; 4]; 4];
    for (i, row) in s.iter_mut().enumerate() {
        row[i] = lambda;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    fn random_k(r: &mut ChaCha8Rng) -> FourVector {
        std::array::from_fn(|_| r.random_range(-2.0..2.0))
    }

    fn close(a: &Payload, b: &Payload) -> f64 {
        let d = a.add(&b.scale(c(-1.0, 0.0)));
        d.max_abs() / a.max_abs().max(b.max_abs()).max(1e-300)
    }

    #[test]
    fn zero_function_vanishes() {
        let f = TestFunction::zero(Species::Bivector);
        assert_eq!(f.fourier(&[1.0, 2.0, 3.0, 4.0]), Payload::zero(Species::Bivector));
    }

    #[test]
    fn unit_packet_matches_analytic_gaussian() {
        let p = GaussianPacket::new(c(1.0, 0.0), [0.0; 4], [0.0; 4], isotropic_sigma(1.0), Payload::Scalar(c(1.0, 0.0)))
            .unwrap();
        let f = TestFunction::single(p);
        let k = [0.3, -0.2, 0.5, 1.0];
        let k2: f64 = k.iter().map(|x| x * x).sum();
        let expect = PI * PI * (-k2 / 4.0).exp();
        match f.fourier(&k) {
            Payload::Scalar(z) => assert!((z - c(expect, 0.0)).norm() < 1e-15),
            _ => unreachable!(),
        }
    }

    #[test]
    fn conjugate_and_reverse_rules() {
        let mut r = rng();
        for species in [Species::Scalar, Species::Bivector, Species::Spinor, Species::Pair] {
            let f = random_test_function(&RandomSpec::new(species), &mut r);
            assert_eq!(f.reverse().reverse(), f);
            assert_eq!(f.conjugate().conjugate(), f);
            for _ in 0..100 {
                let k = random_k(&mut r);
                let mk = neg4(&k);
                assert!(close(&f.reverse().fourier(&k), &f.fourier(&mk)) < 1e-15);
                assert!(close(&f.conjugate().fourier(&k), &f.fourier(&mk).conj()) < 1e-13);
            }
        }
    }

    #[test]
    fn translate_shifts_position_values() {
        let mut r = rng();
        let f = random_test_function(&RandomSpec::new(Species::Scalar), &mut r);
        let a = [0.2, -0.1, 0.4, 0.3];
        let g = f.translate(&a);
        let x = [0.1, 0.2, -0.3, 0.05];
        let xa = [x[0] - a[0], x[1] - a[1], x[2] - a[2], x[3] - a[3]];
        assert!(close(&g.evaluate(&x), &f.evaluate(&xa)) < 1e-13);
    }

    #[test]
    fn helicity_projectors() {
        let mut r = rng();
        let f = random_test_function(&RandomSpec::new(Species::Bivector), &mut r);
        let pp = f.helicity(1.0).unwrap();
        let pm = f.helicity(-1.0).unwrap();
        let k = random_k(&mut r);
        assert!(close(&pp.add(&pm).unwrap().fourier(&k), &f.fourier(&k)) < 1e-15);
        assert!(pm.helicity(1.0).unwrap().fourier(&k).max_abs() < 1e-15 * f.fourier(&k).max_abs());
        assert!(close(&pp.helicity(1.0).unwrap().fourier(&k), &pp.fourier(&k)) < 1e-15);
        // e0∧e1: ½(e01 + i⋆e01) = ½(e01 − i e23)
        let b = Payload::Bivector(Bivector::basis(0, 1)).helicity(1.0).unwrap();
        let expect = Bivector::basis(0, 1).scale(c(0.5, 0.0)) + Bivector::basis(2, 3).scale(c(0.0, -0.5));
        assert_eq!(b, Payload::Bivector(expect));
        assert!(TestFunction::zero(Species::Scalar).helicity(1.0).is_err());
    }

    #[test]
    fn bullet_is_an_involution() {
        let mut r = rng();
        for species in [Species::Bivector, Species::Pair] {
            let f = random_test_function(&RandomSpec::new(species), &mut r);
            let ff = f.bullet().unwrap().bullet().unwrap();
            for _ in 0..100 {
                let k = random_k(&mut r);
                assert!(close(&ff.fourier(&k), &f.fourier(&k)) < 1e-13);
            }
        }
        assert!(random_test_function(&RandomSpec::new(Species::Spinor), &mut r).bullet().is_err());
    }

    #[test]
    fn bullet_fixed_point() {
        let p = GaussianPacket::new(
            c(1.0, 0.0),
            [0.0; 4],
            [0.0; 4],
            isotropic_sigma(1.0),
            Payload::Bivector(Bivector::basis(0, 1)).helicity(1.0).unwrap(),
        )
        .unwrap();
        let f = TestFunction::single(p);
        let k = [0.4, 0.1, -0.3, 0.2];
        assert!(close(&f.bullet().unwrap().fourier(&k), &f.fourier(&k)) < 1e-15);
    }

    #[test]
    fn linearity_of_transforms() {
        let mut r = rng();
        let f = random_test_function(&RandomSpec::new(Species::Bivector), &mut r);
        let g = random_test_function(&RandomSpec::new(Species::Bivector), &mut r);
        let a = c(0.3, -1.2);
        let h = f.scale(a).add(&g).unwrap();
        let k = random_k(&mut r);
        let lin = |t: &TestFunction| t.bullet().unwrap().conjugate().reverse().helicity(1.0).unwrap().fourier(&k);
        let lhs = lin(&h);
        let rhs = lin(&f).scale(a.conj()).add(&lin(&g));
        assert!(close(&lhs, &rhs) < 1e-13);
    }

    #[test]
    fn charge_conjugation_of_test_functions() {
        let mut r = rng();
        for set in [DiracMatrices::dirac(), DiracMatrices::chiral()] {
            let u = random_test_function(&RandomSpec::new(Species::Spinor), &mut r);
            let uc = u.charge_conjugate(&set).unwrap();
            let ucc = uc.charge_conjugate(&set).unwrap();
            for _ in 0..50 {
                let x = random_k(&mut r);
                let want = u.evaluate(&x).scale(set.double_conjugation_phase);
                assert!(close(&ucc.evaluate(&x), &want) < 1e-14);
                let k = random_k(&mut r);
                let Payload::Spinor(s) = u.fourier(&neg4(&k)) else { unreachable!() };
                let want = set.conjugation_matrix() * s.map(|z| z.conj());
                assert!(close(&uc.fourier(&k), &Payload::Spinor(want)) < 1e-13);
            }
            let z = TestFunction::zero(Species::Spinor).charge_conjugate(&set).unwrap();
            assert!(z.is_zero());
        }
    }

    #[test]
    fn on_shell_derivatives_are_nilpotent() {
        let mut r = rng();
        let u1 = random_test_function(&RandomSpec::new(Species::OneForm), &mut r);
        let u3 = random_test_function(&RandomSpec::new(Species::ThreeForm), &mut r);
        for _ in 0..20 {
            let k = geometry::random_null_vector(&mut r);
            let du = u1.exterior_at(&k).unwrap();
            assert!(du.exterior(&k).unwrap().max_abs() < 1e-12 * du.max_abs().max(1.0));
            let du3 = u3.codifferential_at(&k).unwrap();
            assert!(du3.codifferential(&k).unwrap().max_abs() < 1e-12 * du3.max_abs().max(1.0));
        }
        assert!(random_test_function(&RandomSpec::new(Species::Scalar), &mut r)
            .codifferential_at(&[1.0, 0.0, 0.0, 1.0])
            .is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut r = rng();
        for species in [Species::Scalar, Species::Pair, Species::Bivector, Species::OneForm, Species::ThreeForm, Species::Spinor] {
            let f = random_test_function(&RandomSpec::new(species), &mut r);
            let back = TestFunction::from_json(&f.to_json().unwrap()).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn random_generation_is_deterministic() {
        let spec = RandomSpec::new(Species::Bivector);
        let a = random_test_function(&spec, &mut ChaCha8Rng::seed_from_u64(5));
        let b = random_test_function(&spec, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        assert_eq!(a.species, Species::Bivector);
        for p in &a.packets {
            assert!(p.lambda_min() >= 0.7 - 1e-12 && p.lambda_max() <= 1.5 + 1e-12);
        }
    }

    #[test]
    fn merging_adds_payloads_on_equal_envelopes() {
        let mut r = rng();
        let f = random_test_function(&RandomSpec::new(Species::Scalar), &mut r);
        let two = f.add(&f).unwrap();
        assert_eq!(two.packets.len(), f.packets.len());
        let k = random_k(&mut r);
        assert!(close(&two.fourier(&k), &f.fourier(&k).scale(c(2.0, 0.0))) < 1e-15);
    }
}
