//! Signatures on mixed messages `(m_g1, m_g2) ∈ G1^k1 × G2^k2`.
//!
//! Two CSIG instances of opposite orientation are chained: the G2 part is
//! signed first, and the resulting `s ∈ G1` is appended to the G1 part before
//! the second signature is made.

use rand::{CryptoRng, RngCore};

use crate::codec::{ElementCounts, Reader, Wire};
use crate::csig::{self, CsigPublicKey, CsigSecretKey, CsigSignature, OrientationTag, SignNonces, SignsG1, SignsG2};
use crate::error::{Error, Result};
use crate::pairing::{PairingContext, Scalar, SpotCurve, G1, G2};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XsigPublicKey<E: SpotCurve> {
    /// Signs `m_g1 ‖ s`, so it has `k1 + 1` message slots.
    pub pk1: CsigPublicKey<E, SignsG1>,
    pub pk2: CsigPublicKey<E, SignsG2>,
}

impl<E: SpotCurve> XsigPublicKey<E> {
    pub fn k1(&self) -> usize {
        self.pk1.len() - 1
    }

    pub fn k2(&self) -> usize {
        self.pk2.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XsigKeyPair<E: SpotCurve> {
    pub sk1: CsigSecretKey<E, SignsG1>,
    pub sk2: CsigSecretKey<E, SignsG2>,
}

impl<E: SpotCurve> XsigKeyPair<E> {
    pub fn public_key(&self) -> XsigPublicKey<E> {
        XsigPublicKey { pk1: self.sk1.pk.clone(), pk2: self.sk2.pk.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XsigSignature<E: SpotCurve> {
    pub sigma1: CsigSignature<E, SignsG1>,
    pub sigma2: CsigSignature<E, SignsG2>,
}

pub fn keygen<E, R>(ctx: &PairingContext<E>, k1: usize, k2: usize, rng: &mut R) -> Result<XsigKeyPair<E>>
where
    E: SpotCurve,
    R: RngCore + CryptoRng,
{
    if k1 + k2 == 0 {
        return Err(Error::EmptyMessageSpace);
    }
    let sk1 = csig::keygen_any(ctx, k1 + 1, rng);
    let sk2 = csig::keygen_any(ctx, k2, rng);
    Ok(XsigKeyPair { sk1, sk2 })
}

pub fn sign<E, R>(
    ctx: &PairingContext<E>,
    kp: &XsigKeyPair<E>,
    m_g1: &[G1<E>],
    m_g2: &[G2<E>],
    rng: &mut R,
) -> Result<XsigSignature<E>>
where
    E: SpotCurve,
    R: RngCore + CryptoRng,
{
    let n2 = SignNonces::random(rng);
    let n1 = SignNonces::random(rng);
    sign_with_nonces(ctx, kp, m_g1, m_g2, &n1, &n2)
}

/// `n1` drives the G1-message instance, `n2` the G2-message instance.
pub fn sign_with_nonces<E: SpotCurve>(
    ctx: &PairingContext<E>,
    kp: &XsigKeyPair<E>,
    m_g1: &[G1<E>],
    m_g2: &[G2<E>],
    n1: &SignNonces<Scalar<E>>,
    n2: &SignNonces<Scalar<E>>,
) -> Result<XsigSignature<E>> {
    check_lengths(&kp.public_key(), m_g1, m_g2)?;
    let sigma2 = csig::sign_with_nonces(ctx, &kp.sk2, m_g2, n2)?;
    let chained = chain(m_g1, &sigma2);
    let sigma1 = csig::sign_with_nonces(ctx, &kp.sk1, &chained, n1)?;
    Ok(XsigSignature { sigma1, sigma2 })
}

pub fn verify<E: SpotCurve>(pk: &XsigPublicKey<E>, m_g1: &[G1<E>], m_g2: &[G2<E>], sig: &XsigSignature<E>) -> Result<bool> {
    check_lengths(pk, m_g1, m_g2)?;
    if !csig::verify(&pk.pk2, m_g2, &sig.sigma2)? {
        return Ok(false);
    }
    csig::verify(&pk.pk1, &chain(m_g1, &sig.sigma2), &sig.sigma1)
}

/// `m_g1 ‖ σ2.s`.
pub fn chain<E: SpotCurve>(m_g1: &[G1<E>], sigma2: &CsigSignature<E, SignsG2>) -> Vec<G1<E>> {
    let mut out = m_g1.to_vec();
    out.push(sigma2.s);
    out
}

fn check_lengths<E: SpotCurve>(pk: &XsigPublicKey<E>, m_g1: &[G1<E>], m_g2: &[G2<E>]) -> Result<()> {
    if m_g1.len() != pk.k1() {
        return Err(Error::LengthMismatch { expected: pk.k1(), actual: m_g1.len() });
    }
    if m_g2.len() != pk.k2() {
        return Err(Error::LengthMismatch { expected: pk.k2(), actual: m_g2.len() });
    }
    Ok(())
}

impl<E: SpotCurve> Wire for XsigPublicKey<E> {
    fn encode(&self, out: &mut Vec<u8>) {
        self.pk1.encode(out);
        self.pk2.encode(out);
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let pk1 = CsigPublicKey::decode(r)?;
        if pk1.is_empty() {
            return Err(Error::Malformed("G1-message key has no slot for the chained element".into()));
        }
        Ok(Self { pk1, pk2: CsigPublicKey::decode(r)? })
    }

    fn counts(&self) -> ElementCounts {
        self.pk1.counts() + self.pk2.counts()
    }
}

impl<E: SpotCurve> Wire for XsigKeyPair<E> {
    fn encode(&self, out: &mut Vec<u8>) {
        self.sk1.encode(out);
        self.sk2.encode(out);
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(Self { sk1: CsigSecretKey::decode(r)?, sk2: CsigSecretKey::decode(r)? })
    }

    fn counts(&self) -> ElementCounts {
        self.sk1.counts() + self.sk2.counts()
    }
}

fn tag_byte(t: OrientationTag) -> u8 {
    match t {
        OrientationTag::SignsG2 => 2,
        OrientationTag::SignsG1 => 1,
    }
}

impl<E: SpotCurve> Wire for XsigSignature<E> {
    fn encode(&self, out: &mut Vec<u8>) {
        out.push(tag_byte(OrientationTag::SignsG1));
        self.sigma1.encode(out);
        out.push(tag_byte(OrientationTag::SignsG2));
        self.sigma2.encode(out);
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let expect_tag = |r: &mut Reader<'_>, t| -> Result<()> {
            let [b] = r.take_array::<1>()?;
            if b != tag_byte(t) {
                return Err(Error::Malformed(format!("unexpected orientation tag {b}")));
            }
            Ok(())
        };
        expect_tag(r, OrientationTag::SignsG1)?;
        let sigma1 = CsigSignature::decode(r)?;
        expect_tag(r, OrientationTag::SignsG2)?;
        let sigma2 = CsigSignature::decode(r)?;
        Ok(Self { sigma1, sigma2 })
    }

    fn counts(&self) -> ElementCounts {
        self.sigma1.counts() + self.sigma2.counts()
    }
}
