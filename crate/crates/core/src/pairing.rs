//! Asymmetric bilinear group abstraction shared by every other module.
//!
//! Two curves back the two supported security levels: BN254 for 112 bits
//! and BLS12-381 for 128 bits. All code above this module is generic over
//! [`SpotCurve`], so the choice is made once at the entry point.

use std::fmt;

use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::short_weierstrass::{Affine, SWCurveConfig};
use ark_ec::{AffineRepr, CurveGroup, VariableBaseMSM};
use ark_ff::{PrimeField, UniformRand};
use rand::{CryptoRng, Rng, RngCore};
use rand_chacha::ChaCha20Rng;
use rand::SeedableRng;
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use crate::codec::{self, Reader};
use crate::error::{Error, Result};

pub use ark_bls12_381::Bls12_381;
pub use ark_bn254::Bn254;

pub type Scalar<E> = <E as Pairing>::ScalarField;
pub type G1<E> = <E as Pairing>::G1Affine;
pub type G2<E> = <E as Pairing>::G2Affine;
pub type Gt<E> = PairingOutput<E>;

/// Security level in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SecurityLevel {
    Bits112,
    Bits128,
}

impl SecurityLevel {
    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            112 => Ok(Self::Bits112),
            128 => Ok(Self::Bits128),
            other => Err(Error::UnsupportedSecurityLevel(other)),
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            Self::Bits112 => 112,
            Self::Bits128 => 128,
        }
    }

    /// Name of the curve serving this level.
    pub fn curve_name(self) -> &'static str {
        match self {
            Self::Bits112 => ark_bn254::Bn254::NAME,
            Self::Bits128 => ark_bls12_381::Bls12_381::NAME,
        }
    }
}

impl fmt::Display for SecurityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-bit", self.bits())
    }
}

/// A pairing engine usable by the protocol: a security level plus a way to
/// hash onto G1.
pub trait SpotCurve: Pairing {
    const LEVEL: SecurityLevel;
    const NAME: &'static str;

    /// Maps uniform candidate bytes onto the prime-order subgroup of G1.
    ///
    /// `candidate(i)` yields 64 fresh bytes for attempt `i`.
    fn map_to_g1(candidate: impl FnMut(u32) -> [u8; 64]) -> Self::G1Affine;
}

impl SpotCurve for ark_bn254::Bn254 {
    const LEVEL: SecurityLevel = SecurityLevel::Bits112;
    const NAME: &'static str = "bn254";

    fn map_to_g1(candidate: impl FnMut(u32) -> [u8; 64]) -> Self::G1Affine {
        try_and_increment::<ark_bn254::g1::Config>(candidate)
    }
}

impl SpotCurve for ark_bls12_381::Bls12_381 {
    const LEVEL: SecurityLevel = SecurityLevel::Bits128;
    const NAME: &'static str = "bls12-381";

    fn map_to_g1(candidate: impl FnMut(u32) -> [u8; 64]) -> Self::G1Affine {
        try_and_increment::<ark_bls12_381::g1::Config>(candidate)
    }
}

// Not constant time. Side-channel hardening is outside this crate's goals.
fn try_and_increment<P: SWCurveConfig>(mut candidate: impl FnMut(u32) -> [u8; 64]) -> Affine<P>
where
    P::BaseField: PrimeField,
{
    let mut attempt = 0u32;
    loop {
        let bytes = candidate(attempt);
        attempt = attempt.wrapping_add(1);
        let x = P::BaseField::from_be_bytes_mod_order(&bytes[..63]);
        let greatest = bytes[63] & 1 == 1;
        if let Some(point) = Affine::<P>::get_point_from_x_unchecked(x, greatest) {
            let point = point.clear_cofactor();
            if !point.is_zero() {
                return point;
            }
        }
    }
}

/// Dispatches a generic expression over the curve serving a security level.
///
/// ```ignore
/// let bytes = with_curve!(level, E => PairingContext::<E>::setup(level, b"seed")?.to_bytes());
/// ```
#[macro_export]
macro_rules! with_curve {
    ($level:expr, $curve:ident => $body:expr) => {
        match $level {
            $crate::pairing::SecurityLevel::Bits112 => {
                type $curve = $crate::pairing::Bn254;
                $body
            }
            $crate::pairing::SecurityLevel::Bits128 => {
                type $curve = $crate::pairing::Bls12_381;
                $body
            }
        }
    };
}

/// Public parameters `(n, G1, G2, G3, g1, g2, e, H)`.
///
/// Immutable after construction and shared freely across threads.
#[derive(Clone, PartialEq, Eq)]
pub struct PairingContext<E: SpotCurve> {
    g1: E::G1Affine,
    g2: E::G2Affine,
    gt: PairingOutput<E>,
    domain: [u8; 32],
}

impl<E: SpotCurve> fmt::Debug for PairingContext<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PairingContext")
            .field("curve", &E::NAME)
            .field("level", &E::LEVEL)
            .field("domain", &hex::encode(self.domain))
            .finish()
    }
}

impl<E: SpotCurve> PairingContext<E> {
    /// `Set_params`: fixes the bilinear group and the hash domain.
    ///
    /// Deterministic in `(level, seed)`.
    pub fn setup(level: SecurityLevel, seed: &[u8]) -> Result<Self> {
        if level != E::LEVEL {
            return Err(Error::CurveMismatch {
                requested: level.bits(),
                expected: level.curve_name(),
                actual: E::NAME,
            });
        }
        let mut domain = [0u8; 32];
        let mut xof = Shake256::default();
        xof.update(b"SPOT/set-params/v1");
        xof.update(&level.bits().to_be_bytes());
        xof.update(E::NAME.as_bytes());
        xof.update(&(seed.len() as u64).to_be_bytes());
        xof.update(seed);
        xof.finalize_xof().read(&mut domain);
        Ok(Self::from_parts(E::G1Affine::generator(), E::G2Affine::generator(), domain))
    }

    fn from_parts(g1: E::G1Affine, g2: E::G2Affine, domain: [u8; 32]) -> Self {
        let gt = E::pairing(g1, g2);
        Self { g1, g2, gt, domain }
    }

    pub fn level(&self) -> SecurityLevel {
        E::LEVEL
    }

    pub fn g1(&self) -> E::G1Affine {
        self.g1
    }

    pub fn g2(&self) -> E::G2Affine {
        self.g2
    }

    /// `e(g1, g2)`.
    pub fn gt(&self) -> PairingOutput<E> {
        self.gt
    }

    pub fn pair(&self, a: E::G1Affine, b: E::G2Affine) -> PairingOutput<E> {
        E::pairing(a, b)
    }

    /// `H: {0,1}* -> Zn`, a SHAKE256 output of 512 bits reduced mod n.
    pub fn hash_to_scalar(&self, data: &[u8]) -> Scalar<E> {
        let mut wide = [0u8; 64];
        self.xof(b"H", data, 0).read(&mut wide);
        Scalar::<E>::from_be_bytes_mod_order(&wide)
    }

    /// Deterministic hash onto the order-n subgroup of G1.
    pub fn hash_to_g1(&self, data: &[u8]) -> E::G1Affine {
        E::map_to_g1(|attempt| {
            let mut out = [0u8; 64];
            self.xof(b"G1", data, attempt).read(&mut out);
            out
        })
    }

    fn xof(&self, label: &[u8], data: &[u8], counter: u32) -> impl XofReader {
        let mut xof = Shake256::default();
        xof.update(&self.domain);
        xof.update(&[label.len() as u8]);
        xof.update(label);
        xof.update(&counter.to_be_bytes());
        xof.update(&(data.len() as u64).to_be_bytes());
        xof.update(data);
        xof.finalize_xof()
    }

    /// `level(2) || g1 || g2 || domain(32)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(E::LEVEL.bits() as u16).to_be_bytes());
        codec::put_point(&mut out, &self.g1);
        codec::put_point(&mut out, &self.g2);
        out.extend_from_slice(&self.domain);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let bits = u16::from_be_bytes(r.take_array::<2>()?) as u32;
        let level = SecurityLevel::from_bits(bits)?;
        if level != E::LEVEL {
            return Err(Error::CurveMismatch {
                requested: bits,
                expected: level.curve_name(),
                actual: E::NAME,
            });
        }
        let g1: E::G1Affine = r.point()?;
        let g2: E::G2Affine = r.point()?;
        let domain = r.take_array::<32>()?;
        r.finish()?;
        if g1.is_zero() || g2.is_zero() {
            return Err(Error::Malformed("identity generator".into()));
        }
        Ok(Self::from_parts(g1, g2, domain))
    }
}

/// Seeds the deterministic generator that all randomness flows through.
pub fn seeded_rng(seed: &[u8]) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    let mut xof = Shake256::default();
    xof.update(b"SPOT/rng/v1");
    xof.update(seed);
    xof.finalize_xof().read(&mut key);
    ChaCha20Rng::from_seed(key)
}

/// Derives an independent child seed, e.g. one per entity or per run.
pub fn child_seed<R: RngCore>(rng: &mut R) -> [u8; 32] {
    let mut seed = [0u8; 32];
    rng.fill_bytes(&mut seed);
    seed
}

/// Samples from Zn*.
pub fn random_nonzero<F: PrimeField, R: RngCore + CryptoRng>(rng: &mut R) -> F {
    loop {
        let x = F::rand(rng);
        if !x.is_zero() {
            return x;
        }
    }
}

/// Samples a uniformly random non-identity element of the group generated by `base`.
pub fn random_generator<A: AffineRepr, R: RngCore + CryptoRng>(base: A, rng: &mut R) -> A {
    (base * random_nonzero::<A::ScalarField, _>(rng)).into_affine()
}

/// `base^k` in affine form.
pub fn pow<A: AffineRepr>(base: A, k: A::ScalarField) -> A {
    (base * k).into_affine()
}

/// `∏ bases_i^{scalars_i}` in affine form. Slices must have equal length.
pub fn msm<A: AffineRepr>(bases: &[A], scalars: &[A::ScalarField]) -> A {
    debug_assert_eq!(bases.len(), scalars.len());
    <A::Group as VariableBaseMSM>::msm_unchecked(bases, scalars).into_affine()
}

/// Random element of the group, possibly the identity.
pub fn random_element<A: AffineRepr, R: Rng + CryptoRng>(base: A, rng: &mut R) -> A {
    (base * A::ScalarField::rand(rng)).into_affine()
}

/// Convenience trait-object-free check `e(g1, g2)^(a·b) == e(g1^a, g2^b)`.
pub fn bilinear_holds<E: SpotCurve>(
    ctx: &PairingContext<E>,
    a: Scalar<E>,
    b: Scalar<E>,
) -> bool {
    let lhs = ctx.pair(pow(ctx.g1(), a), pow(ctx.g2(), b));
    lhs == ctx.gt() * (a * b)
}
