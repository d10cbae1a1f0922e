//! Group signatures for proxies.
//!
//! The group manager holds an XSIG key and certifies each proxy's CSIG public
//! key. A proxy signs `M ∈ G2` with its own key and then proves, without
//! revealing its key, certificate or signature, that
//!
//! * its signature on `M` verifies under its key (two equations), and
//! * its key carries a valid certificate under the manager's key (four equations).
//!
//! The proxy key `(g_z, h_z, g_r, h_u, g^α, g^β, g_γ, h_δ)` enters the
//! certificate as the mixed message `(g_z, h_z, g_r, h_u, g_γ, h_δ; g^α, g^β)`.
//! All six equations share one commitment per variable.

use ark_ff::One;
use rand::{CryptoRng, RngCore};

use crate::codec::{ElementCounts, Reader, Wire};
use crate::csig::{self, CsigPublicKey, CsigSecretKey, CsigSignature, SignNonces, SignsG2};
use crate::error::{Error, Result};
use crate::niwi::{self, CommitRandomness, NiwiCrs, NiwiProof, NiwiWitness, PairingProductEquation, PreparedCrs};
use crate::pairing::{PairingContext, Scalar, SpotCurve, G1, G2};
use crate::xsig::{self, XsigKeyPair, XsigPublicKey, XsigSignature};

/// Length of the G1 part of a certified proxy key.
pub const CERT_G1_LEN: usize = 6;
/// Length of the G2 part of a certified proxy key.
pub const CERT_G2_LEN: usize = 2;
/// Equations proving the signature on `M`.
pub const MESSAGE_EQUATIONS: usize = 2;
/// Equations proving the certificate.
pub const CREDENTIAL_EQUATIONS: usize = 4;

const PK_G1: [&str; CERT_G1_LEN] = ["pk.gz", "pk.hz", "pk.gr", "pk.hu", "pk.g", "pk.h"];
const PK_G2: [&str; CERT_G2_LEN] = ["pk.a", "pk.b"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSecretKey<E: SpotCurve> {
    pub xsig: XsigKeyPair<E>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupVerifKey<E: SpotCurve> {
    pub pk_g: XsigPublicKey<E>,
    pub crs: NiwiCrs<E>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProxyCredential<E: SpotCurve> {
    pub sk_p: CsigSecretKey<E, SignsG2>,
    pub sigma_p: XsigSignature<E>,
}

impl<E: SpotCurve> ProxyCredential<E> {
    pub fn pk_p(&self) -> &CsigPublicKey<E, SignsG2> {
        &self.sk_p.pk
    }
}

/// Proof that the signer holds a certified key that signed the message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSignature<E: SpotCurve> {
    pub proof: NiwiProof<E>,
}

impl<E: SpotCurve> GroupSignature<E> {
    /// `(π, θ)` pairs of the message equations.
    pub fn pi_m(&self) -> &[niwi::EquationProof<E>] {
        &self.proof.equations[..MESSAGE_EQUATIONS.min(self.proof.equations.len())]
    }

    /// `(π, θ)` pairs of the certificate equations.
    pub fn pi_p(&self) -> &[niwi::EquationProof<E>] {
        &self.proof.equations[MESSAGE_EQUATIONS.min(self.proof.equations.len())..]
    }
}

/// `GSIG.Setup`: an XSIG key for `(6, 2)` messages plus a fresh CRS.
pub fn setup<E, R>(ctx: &PairingContext<E>, rng: &mut R) -> (GroupSecretKey<E>, GroupVerifKey<E>)
where
    E: SpotCurve,
    R: RngCore + CryptoRng,
{
    let xsig = xsig::keygen(ctx, CERT_G1_LEN, CERT_G2_LEN, rng).expect("nonempty message space");
    let crs = NiwiCrs::generate(ctx, rng);
    let vk = GroupVerifKey { pk_g: xsig.public_key(), crs };
    (GroupSecretKey { xsig }, vk)
}

/// The proxy's half of joining: a CSIG key for single G2 messages.
pub fn proxy_keygen<E, R>(ctx: &PairingContext<E>, rng: &mut R) -> CsigSecretKey<E, SignsG2>
where
    E: SpotCurve,
    R: RngCore + CryptoRng,
{
    csig::keygen(ctx, 1, rng).expect("k = 1")
}

/// The proxy key as an XSIG message.
pub fn key_message<E: SpotCurve>(pk_p: &CsigPublicKey<E, SignsG2>) -> Result<(Vec<G1<E>>, Vec<G2<E>>)> {
    if pk_p.len() != 1 {
        return Err(Error::LengthMismatch { expected: 1, actual: pk_p.len() });
    }
    let (g, h) = pk_p.msg_bases[0];
    Ok((vec![pk_p.gz, pk_p.hz, pk_p.gr, pk_p.hu, g, h], vec![pk_p.a_pub, pk_p.b_pub]))
}

/// The manager's half of joining: certify a proxy key.
pub fn certify<E, R>(
    ctx: &PairingContext<E>,
    gsk: &GroupSecretKey<E>,
    pk_p: &CsigPublicKey<E, SignsG2>,
    rng: &mut R,
) -> Result<XsigSignature<E>>
where
    E: SpotCurve,
    R: RngCore + CryptoRng,
{
    let (m1, m2) = key_message(pk_p)?;
    xsig::sign(ctx, &gsk.xsig, &m1, &m2, rng)
}

/// Both halves of joining, run locally.
pub fn join<E, R>(ctx: &PairingContext<E>, gsk: &GroupSecretKey<E>, rng: &mut R) -> ProxyCredential<E>
where
    E: SpotCurve,
    R: RngCore + CryptoRng,
{
    let sk_p = proxy_keygen(ctx, rng);
    let sigma_p = certify(ctx, gsk, &sk_p.pk, rng).expect("well-formed proxy key");
    ProxyCredential { sk_p, sigma_p }
}

/// Whether the certificate verifies under `vk`.
pub fn credential_is_valid<E: SpotCurve>(vk: &GroupVerifKey<E>, cred: &ProxyCredential<E>) -> Result<bool> {
    let (m1, m2) = key_message(cred.pk_p())?;
    xsig::verify(&vk.pk_g, &m1, &m2, &cred.sigma_p)
}

/// Statement parts that do not depend on the message, plus the prepared CRS.
#[derive(Clone, Debug)]
pub struct PreparedVerifier<E: SpotCurve> {
    crs: PreparedCrs<E>,
    credential_eqs: Vec<PairingProductEquation<E>>,
}

impl<E: SpotCurve> PreparedVerifier<E> {
    pub fn new(vk: &GroupVerifKey<E>) -> Result<Self> {
        Ok(Self { crs: vk.crs.prepare(), credential_eqs: credential_equations(&vk.pk_g)? })
    }
}

/// The two equations stating `CSIG.Verify(pk_p, M, σ_m) = 1`, rearranged to
/// a unit target so that the key's `g_r`/`h_u` pair with `g^α`/`g^β` through
/// a `−1` coefficient.
pub fn message_equations<E: SpotCurve>(m: G2<E>) -> [PairingProductEquation<E>; 2] {
    let one = Scalar::<E>::one();
    let first = PairingProductEquation::unit()
        .var_var("pk.gz", "m.z", one)
        .var_var("pk.gr", "m.r", one)
        .var_var("m.s", "m.t", one)
        .var_var("pk.gr", "pk.a", -one)
        .var_const("pk.g", m);
    let second = PairingProductEquation::unit()
        .var_var("pk.hz", "m.z", one)
        .var_var("pk.hu", "m.u", one)
        .var_var("m.v", "m.w", one)
        .var_var("pk.hu", "pk.b", -one)
        .var_const("pk.h", m);
    [first, second]
}

/// The four equations stating `XSIG.Verify(pk_g, pk_p, σ_p) = 1`.
pub fn credential_equations<E: SpotCurve>(pk_g: &XsigPublicKey<E>) -> Result<Vec<PairingProductEquation<E>>> {
    let pk1 = &pk_g.pk1;
    let pk2 = &pk_g.pk2;
    if pk1.len() != CERT_G1_LEN + 1 || pk2.len() != CERT_G2_LEN {
        return Err(Error::ShapeMismatch(format!(
            "group key must sign ({CERT_G1_LEN}, {CERT_G2_LEN}) messages, got ({}, {})",
            pk1.len().saturating_sub(1),
            pk2.len()
        )));
    }
    let one = Scalar::<E>::one();
    let chained: Vec<&str> = PK_G1.iter().copied().chain(["c2.s"]).collect();

    // G1-message instance: variables on the left of every pairing.
    let mut p1 = PairingProductEquation::new(E::pairing(pk1.a_pub, pk1.gr))
        .var_const("c1.z", pk1.gz)
        .var_const("c1.r", pk1.gr)
        .var_var("c1.t", "c1.s", one);
    let mut p2 = PairingProductEquation::new(E::pairing(pk1.b_pub, pk1.hu))
        .var_const("c1.z", pk1.hz)
        .var_const("c1.u", pk1.hu)
        .var_var("c1.w", "c1.v", one);
    for (name, (g, h)) in chained.iter().zip(&pk1.msg_bases) {
        p1 = p1.var_const(name, *g);
        p2 = p2.var_const(name, *h);
    }

    // G2-message instance.
    let mut p3 = PairingProductEquation::new(E::pairing(pk2.gr, pk2.a_pub))
        .const_var(pk2.gz, "c2.z")
        .const_var(pk2.gr, "c2.r")
        .var_var("c2.s", "c2.t", one);
    let mut p4 = PairingProductEquation::new(E::pairing(pk2.hu, pk2.b_pub))
        .const_var(pk2.hz, "c2.z")
        .const_var(pk2.hu, "c2.u")
        .var_var("c2.v", "c2.w", one);
    for (name, (g, h)) in PK_G2.iter().zip(&pk2.msg_bases) {
        p3 = p3.const_var(*g, name);
        p4 = p4.const_var(*h, name);
    }
    Ok(vec![p1, p2, p3, p4])
}

/// All six equations for message `m`, message equations first.
pub fn statement<E: SpotCurve>(vk: &GroupVerifKey<E>, m: G2<E>) -> Result<Vec<PairingProductEquation<E>>> {
    let mut eqs = message_equations(m).to_vec();
    eqs.extend(credential_equations(&vk.pk_g)?);
    Ok(eqs)
}

fn prepared_statement<E: SpotCurve>(p: &PreparedVerifier<E>, m: G2<E>) -> Vec<PairingProductEquation<E>> {
    let mut eqs = message_equations(m).to_vec();
    eqs.extend(p.credential_eqs.iter().cloned());
    eqs
}

/// Witness `(pk_p, σ_p, σ_m)` under the statement's variable names.
pub fn witness<E: SpotCurve>(
    cred: &ProxyCredential<E>,
    sigma_m: &CsigSignature<E, SignsG2>,
) -> Result<NiwiWitness<E>> {
    let (k1, k2) = key_message(cred.pk_p())?;
    let mut w = NiwiWitness::new();
    for (name, v) in PK_G1.iter().zip(k1) {
        w.set_x(name, v);
    }
    for (name, v) in PK_G2.iter().zip(k2) {
        w.set_y(name, v);
    }
    let s = sigma_m;
    w.set_y("m.z", s.z).set_y("m.r", s.r).set_x("m.s", s.s).set_y("m.t", s.t);
    w.set_y("m.u", s.u).set_x("m.v", s.v).set_y("m.w", s.w);
    let c1 = &cred.sigma_p.sigma1;
    w.set_x("c1.z", c1.z).set_x("c1.r", c1.r).set_y("c1.s", c1.s).set_x("c1.t", c1.t);
    w.set_x("c1.u", c1.u).set_y("c1.v", c1.v).set_x("c1.w", c1.w);
    let c2 = &cred.sigma_p.sigma2;
    w.set_y("c2.z", c2.z).set_y("c2.r", c2.r).set_x("c2.s", c2.s).set_y("c2.t", c2.t);
    w.set_y("c2.u", c2.u).set_x("c2.v", c2.v).set_y("c2.w", c2.w);
    Ok(w)
}

/// `GSIG.Sign` with fresh randomness. Returns the plain signature on `m`
/// together with the group signature that hides it.
pub fn sign<E, R>(
    ctx: &PairingContext<E>,
    vk: &GroupVerifKey<E>,
    cred: &ProxyCredential<E>,
    m: G2<E>,
    parallel: bool,
    rng: &mut R,
) -> Result<(CsigSignature<E, SignsG2>, GroupSignature<E>)>
where
    E: SpotCurve,
    R: RngCore + CryptoRng,
{
    let nonces = SignNonces::random(rng);
    let eqs = statement(vk, m)?;
    let rand = CommitRandomness::random(&eqs, rng);
    sign_with_randomness(ctx, vk, cred, m, &nonces, &rand, parallel)
}

pub fn sign_with_randomness<E: SpotCurve>(
    ctx: &PairingContext<E>,
    vk: &GroupVerifKey<E>,
    cred: &ProxyCredential<E>,
    m: G2<E>,
    nonces: &SignNonces<Scalar<E>>,
    rand: &CommitRandomness<Scalar<E>>,
    parallel: bool,
) -> Result<(CsigSignature<E, SignsG2>, GroupSignature<E>)> {
    let sigma_m = csig::sign_with_nonces(ctx, &cred.sk_p, &[m], nonces)?;
    let eqs = statement(vk, m)?;
    let w = witness(cred, &sigma_m)?;
    let proof = match niwi::prove_with_randomness(&vk.crs, &eqs, &w, rand, parallel) {
        Err(Error::UnsatisfiedEquation(i)) if i >= MESSAGE_EQUATIONS => return Err(Error::InvalidCredential),
        other => other?,
    };
    Ok((sigma_m, GroupSignature { proof }))
}

/// `GSIG.Verify`.
pub fn verify<E: SpotCurve>(vk: &GroupVerifKey<E>, m: G2<E>, sig: &GroupSignature<E>) -> Result<bool> {
    verify_with(vk, m, sig, false, None)
}

/// Verification with optional per-equation threading and a prepared verifier.
pub fn verify_with<E: SpotCurve>(
    vk: &GroupVerifKey<E>,
    m: G2<E>,
    sig: &GroupSignature<E>,
    parallel: bool,
    prepared: Option<&PreparedVerifier<E>>,
) -> Result<bool> {
    match prepared {
        Some(p) => niwi::verify_with(&vk.crs, &prepared_statement(p, m), &sig.proof, parallel, Some(&p.crs)),
        None => niwi::verify_with(&vk.crs, &statement(vk, m)?, &sig.proof, parallel, None),
    }
}

impl<E: SpotCurve> GroupSignature<E> {
    /// The `(π, θ)` pairs alone: one G2 and one G1 element per equation.
    pub fn pair_counts(&self) -> ElementCounts {
        self.proof.pair_counts()
    }

    pub fn commitment_counts(&self) -> ElementCounts {
        self.proof.commitment_counts()
    }
}

impl<E: SpotCurve> Wire for GroupSignature<E> {
    fn encode(&self, out: &mut Vec<u8>) {
        self.proof.encode(out);
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let proof = NiwiProof::decode(r)?;
        if proof.equations.len() != MESSAGE_EQUATIONS + CREDENTIAL_EQUATIONS {
            return Err(Error::Malformed(format!("expected 6 proof pairs, got {}", proof.equations.len())));
        }
        Ok(Self { proof })
    }

    fn counts(&self) -> ElementCounts {
        self.proof.counts()
    }
}

impl<E: SpotCurve> Wire for GroupVerifKey<E> {
    fn encode(&self, out: &mut Vec<u8>) {
        self.pk_g.encode(out);
        self.crs.encode(out);
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(Self { pk_g: XsigPublicKey::decode(r)?, crs: NiwiCrs::decode(r)? })
    }

    fn counts(&self) -> ElementCounts {
        self.pk_g.counts() + self.crs.counts()
    }
}

impl<E: SpotCurve> Wire for GroupSecretKey<E> {
    fn encode(&self, out: &mut Vec<u8>) {
        self.xsig.encode(out);
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(Self { xsig: XsigKeyPair::decode(r)? })
    }

    fn counts(&self) -> ElementCounts {
        self.xsig.counts()
    }
}

impl<E: SpotCurve> Wire for ProxyCredential<E> {
    fn encode(&self, out: &mut Vec<u8>) {
        self.sk_p.encode(out);
        self.sigma_p.encode(out);
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(Self { sk_p: CsigSecretKey::decode(r)?, sigma_p: XsigSignature::decode(r)? })
    }

    fn counts(&self) -> ElementCounts {
        self.sk_p.counts() + self.sigma_p.counts()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::{random_element, seeded_rng, SecurityLevel};
    use ark_bn254::Bn254;
    use ark_ec::CurveGroup;
    use rand_chacha::ChaCha20Rng;

    type E = Bn254;

    struct Fixture {
        ctx: PairingContext<E>,
        gsk: GroupSecretKey<E>,
        vk: GroupVerifKey<E>,
        rng: ChaCha20Rng,
    }

    fn fixture(seed: &[u8]) -> Fixture {
        let ctx = PairingContext::<E>::setup(SecurityLevel::Bits112, b"gsig").unwrap();
        let mut rng = seeded_rng(seed);
        let (gsk, vk) = setup(&ctx, &mut rng);
        Fixture { ctx, gsk, vk, rng }
    }

    #[test]
    fn setup_shapes() {
        let f = fixture(b"setup");
        assert_eq!(f.vk.pk_g.pk1.len(), 7);
        assert_eq!(f.vk.pk_g.pk2.len(), 2);
        assert_eq!(GroupVerifKey::<E>::from_wire(&f.vk.to_wire()).unwrap(), f.vk);
        assert_eq!(GroupSecretKey::<E>::from_wire(&f.gsk.to_wire()).unwrap(), f.gsk);
    }

    #[test]
    fn join_produces_certified_key() {
        let mut f = fixture(b"join");
        let cred = join(&f.ctx, &f.gsk, &mut f.rng);
        assert!(credential_is_valid(&f.vk, &cred).unwrap());
        assert_eq!(cred.pk_p().counts(), ElementCounts::new(6, 2, 0, 0));
        assert_eq!(cred.sigma_p.counts(), ElementCounts::new(7, 7, 0, 0));
        assert_eq!(ProxyCredential::<E>::from_wire(&cred.to_wire()).unwrap(), cred);

        let mut other = fixture(b"other group");
        let foreign = join(&other.ctx, &other.gsk, &mut other.rng);
        assert!(!credential_is_valid(&f.vk, &foreign).unwrap());
    }

    #[test]
    fn sign_verify_round_trip() {
        let mut f = fixture(b"sign");
        let cred = join(&f.ctx, &f.gsk, &mut f.rng);
        let prepared = PreparedVerifier::new(&f.vk).unwrap();
        for _ in 0..3 {
            let m = random_element(f.ctx.g2(), &mut f.rng);
            let (sigma_m, sig) = sign(&f.ctx, &f.vk, &cred, m, false, &mut f.rng).unwrap();
            assert!(csig::verify(cred.pk_p(), &[m], &sigma_m).unwrap());
            assert!(verify(&f.vk, m, &sig).unwrap());
            assert!(verify_with(&f.vk, m, &sig, true, Some(&prepared)).unwrap());
            assert_eq!(sig.pi_m().len(), 2);
            assert_eq!(sig.pi_p().len(), 4);
        }
    }

    #[test]
    fn identity_message_round_trips() {
        let mut f = fixture(b"identity");
        let cred = join(&f.ctx, &f.gsk, &mut f.rng);
        let m = <G2<E> as ark_ec::AffineRepr>::zero();
        let (_, sig) = sign(&f.ctx, &f.vk, &cred, m, false, &mut f.rng).unwrap();
        assert!(verify(&f.vk, m, &sig).unwrap());
    }

    #[test]
    fn message_and_group_binding() {
        let mut f = fixture(b"binding");
        let cred = join(&f.ctx, &f.gsk, &mut f.rng);
        let m = random_element(f.ctx.g2(), &mut f.rng);
        let (_, sig) = sign(&f.ctx, &f.vk, &cred, m, false, &mut f.rng).unwrap();
        let other_m = (m + f.ctx.g2()).into_affine();
        assert!(!verify(&f.vk, other_m, &sig).unwrap());
        let other = fixture(b"another group");
        let vk2 = GroupVerifKey { pk_g: other.vk.pk_g.clone(), crs: f.vk.crs.clone() };
        assert!(!verify(&vk2, m, &sig).unwrap());
        assert!(!verify(&other.vk, m, &sig).unwrap());
    }

    #[test]
    fn resigning_rerandomizes() {
        let mut f = fixture(b"again");
        let cred = join(&f.ctx, &f.gsk, &mut f.rng);
        let m = random_element(f.ctx.g2(), &mut f.rng);
        let (_, a) = sign(&f.ctx, &f.vk, &cred, m, false, &mut f.rng).unwrap();
        let (_, b) = sign(&f.ctx, &f.vk, &cred, m, false, &mut f.rng).unwrap();
        for (name, c) in &a.proof.c {
            assert_ne!(*c, b.proof.c[name]);
        }
        for (x, y) in a.proof.equations.iter().zip(&b.proof.equations) {
            assert_ne!(x, y);
        }
        assert!(verify(&f.vk, m, &a).unwrap() && verify(&f.vk, m, &b).unwrap());
    }

    #[test]
    fn members_are_structurally_alike() {
        let mut f = fixture(b"anon");
        let p0 = join(&f.ctx, &f.gsk, &mut f.rng);
        let p1 = join(&f.ctx, &f.gsk, &mut f.rng);
        let m = random_element(f.ctx.g2(), &mut f.rng);
        let (_, s0) = sign(&f.ctx, &f.vk, &p0, m, false, &mut f.rng).unwrap();
        let (_, s1) = sign(&f.ctx, &f.vk, &p1, m, false, &mut f.rng).unwrap();
        assert!(verify(&f.vk, m, &s0).unwrap() && verify(&f.vk, m, &s1).unwrap());
        assert_eq!(s0.counts(), s1.counts());
        assert_eq!(s0.to_wire().len(), s1.to_wire().len());
        assert_eq!(
            s0.proof.c.keys().collect::<Vec<_>>(),
            s1.proof.c.keys().collect::<Vec<_>>()
        );
    }

    #[test]
    fn uncertified_key_cannot_sign() {
        let mut f = fixture(b"uncert");
        let cred = join(&f.ctx, &f.gsk, &mut f.rng);
        let forged = ProxyCredential { sk_p: proxy_keygen(&f.ctx, &mut f.rng), sigma_p: cred.sigma_p.clone() };
        let m = random_element(f.ctx.g2(), &mut f.rng);
        assert_eq!(sign(&f.ctx, &f.vk, &forged, m, false, &mut f.rng), Err(Error::InvalidCredential));
    }

    #[test]
    fn parallel_signing_is_deterministic() {
        let mut f = fixture(b"par");
        let cred = join(&f.ctx, &f.gsk, &mut f.rng);
        let m = random_element(f.ctx.g2(), &mut f.rng);
        let nonces = SignNonces::random(&mut f.rng);
        let rand = CommitRandomness::random(&statement(&f.vk, m).unwrap(), &mut f.rng);
        let a = sign_with_randomness(&f.ctx, &f.vk, &cred, m, &nonces, &rand, false).unwrap();
        let b = sign_with_randomness(&f.ctx, &f.vk, &cred, m, &nonces, &rand, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn accounting() {
        let mut f = fixture(b"count");
        let cred = join(&f.ctx, &f.gsk, &mut f.rng);
        let m = random_element(f.ctx.g2(), &mut f.rng);
        let (_, sig) = sign(&f.ctx, &f.vk, &cred, m, false, &mut f.rng).unwrap();
        assert_eq!(sig.pair_counts() + ElementCounts::g2(1), ElementCounts::new(6, 7, 0, 0));
        assert_eq!(sig.commitment_counts(), ElementCounts::new(15, 14, 0, 0));
        let back = GroupSignature::<E>::from_wire(&sig.to_wire()).unwrap();
        assert_eq!(back, sig);
    }
}
