use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::codec::{hex_serde, ElementCounts, Wire};
use crate::csig::CsigSignature;
use crate::csig::SignsG2;
use crate::error::Result;
use crate::gsig::{self, GroupSignature, GroupVerifKey, PreparedVerifier, ProxyCredential};
use crate::pairing::{pow, PairingContext, Scalar, SpotCurve, G2};

/// What a proxy hands back to the user: `M` and the group signature on it.
/// The plain signature `σ_m` stays with the proxy and is dropped after the
/// session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ProxySignature<E: SpotCurve> {
    #[serde(with = "hex_serde::point")]
    pub m: G2<E>,
    #[serde(with = "hex_serde::wire")]
    pub proof: GroupSignature<E>,
}

impl<E: SpotCurve> ProxySignature<E> {
    /// `M` plus the `(π, θ)` pairs.
    pub fn counts(&self) -> ElementCounts {
        ElementCounts::g2(1) + self.proof.pair_counts()
    }

    /// `M` plus the full proof, commitments included.
    pub fn full_counts(&self) -> ElementCounts {
        ElementCounts::g2(1) + self.proof.counts()
    }
}

/// `P_Sign`: `M = ID_U^{PS}`, then a group signature on `M`.
pub fn p_sign<E, R>(
    ctx: &PairingContext<E>,
    vk: &GroupVerifKey<E>,
    cred: &ProxyCredential<E>,
    id_u: G2<E>,
    ps: Scalar<E>,
    parallel: bool,
    rng: &mut R,
) -> Result<(CsigSignature<E, SignsG2>, ProxySignature<E>)>
where
    E: SpotCurve,
    R: RngCore + CryptoRng,
{
    let m = pow(id_u, ps);
    let (sigma_m, proof) = gsig::sign(ctx, vk, cred, m, parallel, rng)?;
    Ok((sigma_m, ProxySignature { m, proof }))
}

/// `Sig_Verify`. Malformed proofs count as invalid.
pub fn sig_verify<E: SpotCurve>(vk: &GroupVerifKey<E>, m: G2<E>, proof: &GroupSignature<E>) -> bool {
    sig_verify_with(vk, m, proof, false, None)
}

pub fn sig_verify_with<E: SpotCurve>(
    vk: &GroupVerifKey<E>,
    m: G2<E>,
    proof: &GroupSignature<E>,
    parallel: bool,
    prepared: Option<&PreparedVerifier<E>>,
) -> bool {
    gsig::verify_with(vk, m, proof, parallel, prepared).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::{random_nonzero, seeded_rng, SecurityLevel};
    use ark_bn254::Bn254;
    use ark_ec::AffineRepr;
    use ark_ff::{UniformRand, Zero};

    type E = Bn254;

    #[test]
    fn sign_verify_and_counts() {
        let ctx = PairingContext::<E>::setup(SecurityLevel::Bits112, b"proxy").unwrap();
        let mut rng = seeded_rng(b"proxy");
        let (gsk, vk) = gsig::setup(&ctx, &mut rng);
        let cred = gsig::join(&ctx, &gsk, &mut rng);
        let id = pow(ctx.g2(), random_nonzero(&mut rng));
        let ps = Scalar::<E>::rand(&mut rng);
        let (_, out) = p_sign(&ctx, &vk, &cred, id, ps, false, &mut rng).unwrap();
        assert_eq!(out.m, pow(id, ps));
        assert!(sig_verify(&vk, out.m, &out.proof));
        assert_eq!(out.counts(), ElementCounts { g1: 6, g2: 7, gt: 0, zn: 0 });
        assert!(!sig_verify(&vk, pow(id, ps + Scalar::<E>::from(1u64)), &out.proof));

        let (_, zero) = p_sign(&ctx, &vk, &cred, id, Scalar::<E>::zero(), true, &mut rng).unwrap();
        assert!(zero.m.is_zero());
        assert!(sig_verify(&vk, zero.m, &zero.proof));
        let text = serde_json::to_string(&zero).unwrap();
        assert_eq!(serde_json::from_str::<ProxySignature<E>>(&text).unwrap(), zero);
    }
}
