//! Constant-size structure-preserving signatures over vectors of group elements.
//!
//! The scheme is written once and instantiated in two orientations. With
//! [`SignsG2`], key bases live in G1 and messages in G2; [`SignsG1`] is the
//! dual obtained by exchanging the groups. A signature is
//! `(z, r, s, t, u, v, w)` where `s, v` live in the key-base group and the
//! other five components in the message group. Verification checks
//!
//! ```text
//! e(g_z, z) e(g_r, r) e(s, t) ∏ e(g_i, m_i) = e(g_r, g^α)
//! e(h_z, z) e(h_u, u) e(v, w) ∏ e(h_i, m_i) = e(h_u, g^β)
//! ```
//!
//! with the pairing arguments swapped for [`SignsG1`].

use std::fmt::Debug;
use std::marker::PhantomData;

use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::Zero;
use rand::{CryptoRng, RngCore};

use crate::codec::{put_len, put_point, put_scalar, ElementCounts, Reader, Wire};
use crate::error::{Error, Result};
use crate::pairing::{msm, pow, random_nonzero, PairingContext, Scalar, SpotCurve};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrientationTag {
    SignsG2,
    SignsG1,
}

/// Which group carries messages.
pub trait Orientation<E: SpotCurve>: Copy + Debug + Default + Send + Sync + 'static {
    /// Group of `g_z, h_z, g_r, h_u, g_i, h_i` and of `s, v`.
    type Base: AffineRepr<ScalarField = Scalar<E>>;
    /// Group of messages, of `g^α, g^β` and of `z, r, t, u, w`.
    type Msg: AffineRepr<ScalarField = Scalar<E>>;
    /// The same scheme with G1 and G2 exchanged.
    type Dual: Orientation<E, Base = Self::Msg, Msg = Self::Base>;

    const TAG: OrientationTag;

    fn base_gen(ctx: &PairingContext<E>) -> Self::Base;
    fn msg_gen(ctx: &PairingContext<E>) -> Self::Msg;

    /// Whether `∏ e(base_i, msg_i)` is the identity of G3.
    fn product_is_identity(base: Vec<Self::Base>, msg: Vec<Self::Msg>) -> bool;

    fn base_counts(n: usize) -> ElementCounts;
    fn msg_counts(n: usize) -> ElementCounts;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SignsG2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SignsG1;

impl<E: SpotCurve> Orientation<E> for SignsG2 {
    type Base = E::G1Affine;
    type Msg = E::G2Affine;
    type Dual = SignsG1;
    const TAG: OrientationTag = OrientationTag::SignsG2;

    fn base_gen(ctx: &PairingContext<E>) -> Self::Base {
        ctx.g1()
    }

    fn msg_gen(ctx: &PairingContext<E>) -> Self::Msg {
        ctx.g2()
    }

    fn product_is_identity(base: Vec<Self::Base>, msg: Vec<Self::Msg>) -> bool {
        E::multi_pairing(base, msg).is_zero()
    }

    fn base_counts(n: usize) -> ElementCounts {
        ElementCounts::g1(n)
    }

    fn msg_counts(n: usize) -> ElementCounts {
        ElementCounts::g2(n)
    }
}

impl<E: SpotCurve> Orientation<E> for SignsG1 {
    type Base = E::G2Affine;
    type Msg = E::G1Affine;
    type Dual = SignsG2;
    const TAG: OrientationTag = OrientationTag::SignsG1;

    fn base_gen(ctx: &PairingContext<E>) -> Self::Base {
        ctx.g2()
    }

    fn msg_gen(ctx: &PairingContext<E>) -> Self::Msg {
        ctx.g1()
    }

    fn product_is_identity(base: Vec<Self::Base>, msg: Vec<Self::Msg>) -> bool {
        E::multi_pairing(msg, base).is_zero()
    }

    fn base_counts(n: usize) -> ElementCounts {
        ElementCounts::g2(n)
    }

    fn msg_counts(n: usize) -> ElementCounts {
        ElementCounts::g1(n)
    }
}

/// `pk = (g_z, h_z, g_r, h_u, g^α, g^β, {g_i, h_i})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsigPublicKey<E: SpotCurve, O: Orientation<E>> {
    pub gz: O::Base,
    pub hz: O::Base,
    pub gr: O::Base,
    pub hu: O::Base,
    pub a_pub: O::Msg,
    pub b_pub: O::Msg,
    pub msg_bases: Vec<(O::Base, O::Base)>,
    _curve: PhantomData<E>,
}

impl<E: SpotCurve, O: Orientation<E>> CsigPublicKey<E, O> {
    /// Message length `k`.
    pub fn len(&self) -> usize {
        self.msg_bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.msg_bases.is_empty()
    }

    pub fn orientation(&self) -> OrientationTag {
        O::TAG
    }
}

/// Exponents fully determining a key pair.
///
/// `gr_log` and `hu_log` are the discrete logs of `g_r` and `h_u` with
/// respect to the key-base generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyExponents<F> {
    pub gr_log: F,
    pub hu_log: F,
    pub alpha: F,
    pub beta: F,
    pub gamma_z: F,
    pub delta_z: F,
    pub gammas: Vec<F>,
    pub deltas: Vec<F>,
}

impl<F: ark_ff::PrimeField> KeyExponents<F> {
    pub fn random<R: RngCore + CryptoRng>(k: usize, rng: &mut R) -> Self {
        let gr_log = random_nonzero(rng);
        let hu_log = random_nonzero(rng);
        let mut gammas = Vec::with_capacity(k);
        let mut deltas = Vec::with_capacity(k);
        for _ in 0..k {
            gammas.push(random_nonzero(rng));
            deltas.push(random_nonzero(rng));
        }
        Self {
            gr_log,
            hu_log,
            gamma_z: random_nonzero(rng),
            delta_z: random_nonzero(rng),
            alpha: random_nonzero(rng),
            beta: random_nonzero(rng),
            gammas,
            deltas,
        }
    }
}

/// `sk = (pk, α, β, γ_z, δ_z, {γ_i, δ_i})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsigSecretKey<E: SpotCurve, O: Orientation<E>> {
    pub pk: CsigPublicKey<E, O>,
    pub alpha: Scalar<E>,
    pub beta: Scalar<E>,
    pub gamma_z: Scalar<E>,
    pub delta_z: Scalar<E>,
    pub gammas: Vec<Scalar<E>>,
    pub deltas: Vec<Scalar<E>>,
}

impl<E: SpotCurve, O: Orientation<E>> CsigSecretKey<E, O> {
    /// Builds the key pair fixed by `exps`. Panics if `gammas` and `deltas`
    /// differ in length.
    pub fn from_exponents(ctx: &PairingContext<E>, exps: &KeyExponents<Scalar<E>>) -> Self {
        assert_eq!(exps.gammas.len(), exps.deltas.len(), "gammas and deltas must align");
        let base = O::base_gen(ctx);
        let gr = pow(base, exps.gr_log);
        let hu = pow(base, exps.hu_log);
        let msg_bases = exps
            .gammas
            .iter()
            .zip(&exps.deltas)
            .map(|(g, d)| (pow(gr, *g), pow(hu, *d)))
            .collect();
        let pk = CsigPublicKey {
            gz: pow(gr, exps.gamma_z),
            hz: pow(hu, exps.delta_z),
            gr,
            hu,
            a_pub: pow(O::msg_gen(ctx), exps.alpha),
            b_pub: pow(O::msg_gen(ctx), exps.beta),
            msg_bases,
            _curve: PhantomData,
        };
        Self {
            pk,
            alpha: exps.alpha,
            beta: exps.beta,
            gamma_z: exps.gamma_z,
            delta_z: exps.delta_z,
            gammas: exps.gammas.clone(),
            deltas: exps.deltas.clone(),
        }
    }

    pub fn public_key(&self) -> &CsigPublicKey<E, O> {
        &self.pk
    }
}

/// `σ = (z, r, s, t, u, v, w)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsigSignature<E: SpotCurve, O: Orientation<E>> {
    pub z: O::Msg,
    pub r: O::Msg,
    pub s: O::Base,
    pub t: O::Msg,
    pub u: O::Msg,
    pub v: O::Base,
    pub w: O::Msg,
    _curve: PhantomData<E>,
}

impl<E: SpotCurve, O: Orientation<E>> CsigSignature<E, O> {
    pub fn new(
        z: O::Msg,
        r: O::Msg,
        s: O::Base,
        t: O::Msg,
        u: O::Msg,
        v: O::Base,
        w: O::Msg,
    ) -> Self {
        Self { z, r, s, t, u, v, w, _curve: PhantomData }
    }
}

/// Per-signature randomness `(ζ, ρ, τ, φ, ω)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignNonces<F> {
    pub zeta: F,
    pub rho: F,
    pub tau: F,
    pub phi: F,
    pub omega: F,
}

impl<F: ark_ff::PrimeField> SignNonces<F> {
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self {
            zeta: random_nonzero(rng),
            rho: random_nonzero(rng),
            tau: random_nonzero(rng),
            phi: random_nonzero(rng),
            omega: random_nonzero(rng),
        }
    }
}

/// `CSIG.Key` for messages of length `k ≥ 1`.
pub fn keygen<E, O, R>(
    ctx: &PairingContext<E>,
    k: usize,
    rng: &mut R,
) -> Result<CsigSecretKey<E, O>>
where
    E: SpotCurve,
    O: Orientation<E>,
    R: RngCore + CryptoRng,
{
    if k == 0 {
        return Err(Error::EmptyMessageSpace);
    }
    Ok(keygen_any(ctx, k, rng))
}

/// Key generation without the `k ≥ 1` restriction. A zero-length key still
/// yields signatures whose `s` component can be chained.
pub(crate) fn keygen_any<E, O, R>(ctx: &PairingContext<E>, k: usize, rng: &mut R) -> CsigSecretKey<E, O>
where
    E: SpotCurve,
    O: Orientation<E>,
    R: RngCore + CryptoRng,
{
    CsigSecretKey::from_exponents(ctx, &KeyExponents::random(k, rng))
}

/// `CSIG.Sign` with fresh randomness.
pub fn sign<E, O, R>(
    ctx: &PairingContext<E>,
    sk: &CsigSecretKey<E, O>,
    msg: &[O::Msg],
    rng: &mut R,
) -> Result<CsigSignature<E, O>>
where
    E: SpotCurve,
    O: Orientation<E>,
    R: RngCore + CryptoRng,
{
    sign_with_nonces(ctx, sk, msg, &SignNonces::random(rng))
}

/// `CSIG.Sign` with caller-supplied randomness.
pub fn sign_with_nonces<E, O>(
    ctx: &PairingContext<E>,
    sk: &CsigSecretKey<E, O>,
    msg: &[O::Msg],
    n: &SignNonces<Scalar<E>>,
) -> Result<CsigSignature<E, O>>
where
    E: SpotCurve,
    O: Orientation<E>,
{
    if msg.len() != sk.pk.len() {
        return Err(Error::LengthMismatch { expected: sk.pk.len(), actual: msg.len() });
    }
    let g = O::msg_gen(ctx);

    // r = g^{α − ρτ − γ_z ζ} ∏ m_i^{−γ_i}
    let mut bases = Vec::with_capacity(msg.len() + 1);
    bases.push(g);
    bases.extend_from_slice(msg);
    let mut r_exps = Vec::with_capacity(bases.len());
    r_exps.push(sk.alpha - n.rho * n.tau - sk.gamma_z * n.zeta);
    r_exps.extend(sk.gammas.iter().map(|g| -*g));
    // u = g^{β − φω − δ_z ζ} ∏ m_i^{−δ_i}
    let mut u_exps = Vec::with_capacity(bases.len());
    u_exps.push(sk.beta - n.phi * n.omega - sk.delta_z * n.zeta);
    u_exps.extend(sk.deltas.iter().map(|d| -*d));

    Ok(CsigSignature::new(
        pow(g, n.zeta),
        msm(&bases, &r_exps),
        pow(sk.pk.gr, n.rho),
        pow(g, n.tau),
        msm(&bases, &u_exps),
        pow(sk.pk.hu, n.phi),
        pow(g, n.omega),
    ))
}

/// `CSIG.Verify`. `Ok(false)` means the signature is invalid; an error
/// means the input has the wrong shape.
pub fn verify<E, O>(pk: &CsigPublicKey<E, O>, msg: &[O::Msg], sig: &CsigSignature<E, O>) -> Result<bool>
where
    E: SpotCurve,
    O: Orientation<E>,
{
    if msg.len() != pk.len() {
        return Err(Error::LengthMismatch { expected: pk.len(), actual: msg.len() });
    }
    Ok(first_equation_holds(pk, msg, sig) && second_equation_holds(pk, msg, sig))
}

/// `e(g_z, z) e(g_r, r) e(s, t) ∏ e(g_i, m_i) = e(g_r, g^α)`.
pub fn first_equation_holds<E, O>(pk: &CsigPublicKey<E, O>, msg: &[O::Msg], sig: &CsigSignature<E, O>) -> bool
where
    E: SpotCurve,
    O: Orientation<E>,
{
    let mut base = vec![pk.gz, pk.gr, sig.s];
    let mut other = vec![sig.z, sig.r, sig.t];
    for ((g, _), m) in pk.msg_bases.iter().zip(msg) {
        base.push(*g);
        other.push(*m);
    }
    base.push((-pk.gr.into_group()).into_affine());
    other.push(pk.a_pub);
    O::product_is_identity(base, other)
}

/// `e(h_z, z) e(h_u, u) e(v, w) ∏ e(h_i, m_i) = e(h_u, g^β)`.
pub fn second_equation_holds<E, O>(pk: &CsigPublicKey<E, O>, msg: &[O::Msg], sig: &CsigSignature<E, O>) -> bool
where
    E: SpotCurve,
    O: Orientation<E>,
{
    let mut base = vec![pk.hz, pk.hu, sig.v];
    let mut other = vec![sig.z, sig.u, sig.w];
    for ((_, h), m) in pk.msg_bases.iter().zip(msg) {
        base.push(*h);
        other.push(*m);
    }
    base.push((-pk.hu.into_group()).into_affine());
    other.push(pk.b_pub);
    O::product_is_identity(base, other)
}

impl<E: SpotCurve, O: Orientation<E>> Wire for CsigPublicKey<E, O> {
    fn encode(&self, out: &mut Vec<u8>) {
        put_len(out, self.len());
        for p in [&self.gz, &self.hz, &self.gr, &self.hu] {
            put_point(out, p);
        }
        put_point(out, &self.a_pub);
        put_point(out, &self.b_pub);
        for (g, h) in &self.msg_bases {
            put_point(out, g);
            put_point(out, h);
        }
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let k = r.len_prefix()?;
        let gz = r.point()?;
        let hz = r.point()?;
        let gr = r.point()?;
        let hu = r.point()?;
        let a_pub = r.point()?;
        let b_pub = r.point()?;
        let mut msg_bases = Vec::with_capacity(k.min(64));
        for _ in 0..k {
            msg_bases.push((r.point()?, r.point()?));
        }
        Ok(Self { gz, hz, gr, hu, a_pub, b_pub, msg_bases, _curve: PhantomData })
    }

    fn counts(&self) -> ElementCounts {
        O::base_counts(4 + 2 * self.len()) + O::msg_counts(2)
    }
}

impl<E: SpotCurve, O: Orientation<E>> Wire for CsigSecretKey<E, O> {
    fn encode(&self, out: &mut Vec<u8>) {
        self.pk.encode(out);
        for x in [&self.alpha, &self.beta, &self.gamma_z, &self.delta_z] {
            put_scalar(out, x);
        }
        for (g, d) in self.gammas.iter().zip(&self.deltas) {
            put_scalar(out, g);
            put_scalar(out, d);
        }
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let pk = CsigPublicKey::<E, O>::decode(r)?;
        let alpha = r.scalar()?;
        let beta = r.scalar()?;
        let gamma_z = r.scalar()?;
        let delta_z = r.scalar()?;
        let mut gammas = Vec::with_capacity(pk.len());
        let mut deltas = Vec::with_capacity(pk.len());
        for _ in 0..pk.len() {
            gammas.push(r.scalar()?);
            deltas.push(r.scalar()?);
        }
        Ok(Self { pk, alpha, beta, gamma_z, delta_z, gammas, deltas })
    }

    fn counts(&self) -> ElementCounts {
        self.pk.counts() + ElementCounts::zn(4 + 2 * self.gammas.len())
    }
}

impl<E: SpotCurve, O: Orientation<E>> Wire for CsigSignature<E, O> {
    fn encode(&self, out: &mut Vec<u8>) {
        put_point(out, &self.z);
        put_point(out, &self.r);
        put_point(out, &self.s);
        put_point(out, &self.t);
        put_point(out, &self.u);
        put_point(out, &self.v);
        put_point(out, &self.w);
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(Self::new(
            r.point()?,
            r.point()?,
            r.point()?,
            r.point()?,
            r.point()?,
            r.point()?,
            r.point()?,
        ))
    }

    fn counts(&self) -> ElementCounts {
        O::msg_counts(5) + O::base_counts(2)
    }
}
