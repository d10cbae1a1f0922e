use std::collections::BTreeMap;

use ark_ff::Zero;
use ark_ec::{AffineRepr, CurveGroup};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::server::{ccm_verify, HaAccess, ServerState};
use super::user::ContactEntry;
use super::proxy::sig_verify_with;
use crate::codec::{hex_serde, point_to_bytes, put_len, put_scalar, scalar_to_bytes, ElementCounts};
use crate::error::{Error, Result};
use crate::gsig::{GroupVerifKey, PreparedVerifier};
use crate::pairing::{pow, random_nonzero, PairingContext, Scalar, SpotCurve, G1, G2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HealthStatus {
    Healthy,
    Infected,
}

/// One row of the health authority's user registry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct UserRecord<E: SpotCurve> {
    #[serde(with = "hex_serde::point")]
    pub id: G2<E>,
    #[serde(with = "hex_serde::scalar")]
    pub t_u: Scalar<E>,
    #[serde(default, with = "opt_point", skip_serializing_if = "Option::is_none")]
    pub pk_u: Option<G2<E>>,
    pub status: HealthStatus,
}

mod opt_point {
    use crate::codec::{point_from_bytes, point_to_bytes};
    use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<T: CanonicalSerialize, S: Serializer>(p: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
        match p {
            Some(p) => s.serialize_some(&hex::encode(point_to_bytes(p))),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, T: CanonicalDeserialize, D: Deserializer<'de>>(d: D) -> Result<Option<T>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|text| {
                let bytes = hex::decode(text).map_err(D::Error::custom)?;
                point_from_bytes(&bytes).map_err(D::Error::custom)
            })
            .transpose()
    }
}

/// Why a contact entry was refused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryRejection {
    /// The group signature on `M` does not verify.
    InvalidGroupSignature,
    /// The server holds no `PS′` for this CCM, e.g. after the retention purge.
    NoServerRecord,
    /// `M` is not consistent with the server's `PS′` and the user's `t_U`.
    CcmMismatch,
}

/// Per-entry outcome of a contact-list check, in submission order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactListVerdict {
    pub verdicts: Vec<std::result::Result<(), EntryRejection>>,
}

impl ContactListVerdict {
    pub fn accepted(&self) -> usize {
        self.verdicts.iter().filter(|v| v.is_ok()).count()
    }

    pub fn rejected(&self) -> Vec<(usize, EntryRejection)> {
        self.verdicts
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.err().map(|r| (i, r)))
            .collect()
    }

    pub fn all_accepted(&self) -> bool {
        self.verdicts.iter().all(|v| v.is_ok())
    }
}

/// The signed set of verified CCMs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct VerifiedSet<E: SpotCurve> {
    #[serde(with = "hex_serde::scalars")]
    pub ccms: Vec<Scalar<E>>,
    #[serde(with = "hex_serde::point")]
    pub signature: G1<E>,
}

impl<E: SpotCurve> VerifiedSet<E> {
    /// Canonical encoding that the signature covers.
    pub fn signed_bytes(ccms: &[Scalar<E>]) -> Vec<u8> {
        let mut out = b"spot-verified-set".to_vec();
        put_len(&mut out, ccms.len());
        for c in ccms {
            put_scalar(&mut out, c);
        }
        out
    }

    pub fn contains(&self, ccm: &Scalar<E>) -> bool {
        self.ccms.binary_search_by(|c| scalar_to_bytes(c).cmp(&scalar_to_bytes(ccm))).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HaState<E: SpotCurve> {
    #[serde(with = "hex_serde::scalar")]
    x: Scalar<E>,
    #[serde(with = "hex_serde::point")]
    pub pk: G2<E>,
    users: BTreeMap<String, UserRecord<E>>,
    #[serde(with = "hex_serde::scalars")]
    accepted: Vec<Scalar<E>>,
    published: Vec<VerifiedSet<E>>,
}

/// `HA_Keygen`: `pk_HA = g2^x`.
pub fn ha_keygen<E, R>(ctx: &PairingContext<E>, rng: &mut R) -> HaState<E>
where
    E: SpotCurve,
    R: RngCore + CryptoRng,
{
    let x = random_nonzero(rng);
    HaState { x, pk: pow(ctx.g2(), x), users: BTreeMap::new(), accepted: Vec::new(), published: Vec::new() }
}

fn user_key<E: SpotCurve>(id: &G2<E>) -> String {
    hex::encode(point_to_bytes(id))
}

/// `Set_UserID`: `ID_U = g2^{t_U}` for fresh `t_U`, registered as healthy.
pub fn set_user_id<E, R>(ha: &mut HaState<E>, ctx: &PairingContext<E>, rng: &mut R) -> UserRecord<E>
where
    E: SpotCurve,
    R: RngCore + CryptoRng,
{
    loop {
        let t_u = random_nonzero(rng);
        let record = UserRecord { id: pow(ctx.g2(), t_u), t_u, pk_u: None, status: HealthStatus::Healthy };
        let key = user_key::<E>(&record.id);
        if !ha.users.contains_key(&key) {
            ha.users.insert(key, record.clone());
            return record;
        }
    }
}

/// Checks `e(σ, g2) = e(H(set), pk_HA)`.
pub fn verify_set<E: SpotCurve>(ctx: &PairingContext<E>, vs: &VerifiedSet<E>, pk_ha: &G2<E>) -> bool {
    let sorted = vs.ccms.windows(2).all(|w| scalar_to_bytes(&w[0]) < scalar_to_bytes(&w[1]));
    if !sorted {
        return false;
    }
    let h = ctx.hash_to_g1(&VerifiedSet::<E>::signed_bytes(&vs.ccms));
    let neg_sig = (-vs.signature.into_group()).into_affine();
    E::multi_pairing([neg_sig, h], [ctx.g2(), *pk_ha]).is_zero()
}

/// Signs every CCM accepted since the last publication, deduplicated and in
/// canonical order, and appends the set to the publication log.
pub fn ha_publish<E: SpotCurve>(ha: &mut HaState<E>, ctx: &PairingContext<E>) -> VerifiedSet<E> {
    let keyed: BTreeMap<Vec<u8>, Scalar<E>> = ha.accepted.drain(..).map(|c| (scalar_to_bytes(&c), c)).collect();
    let ccms: Vec<Scalar<E>> = keyed.into_values().collect();
    let h = ctx.hash_to_g1(&VerifiedSet::<E>::signed_bytes(&ccms));
    let vs = VerifiedSet { ccms, signature: pow(h, ha.x) };
    ha.published.push(vs.clone());
    vs
}

impl<E: SpotCurve> HaState<E> {
    pub fn public_key_counts(&self) -> ElementCounts {
        ElementCounts::g2(1)
    }

    pub fn user(&self, id: &G2<E>) -> Option<&UserRecord<E>> {
        self.users.get(&user_key::<E>(id))
    }

    pub fn users(&self) -> impl Iterator<Item = &UserRecord<E>> {
        self.users.values()
    }

    pub fn register_public_key(&mut self, id: &G2<E>, pk_u: G2<E>) -> Result<()> {
        let rec = self.users.get_mut(&user_key::<E>(id)).ok_or(Error::UnknownUser)?;
        rec.pk_u = Some(pk_u);
        Ok(())
    }

    pub fn set_status(&mut self, id: &G2<E>, status: HealthStatus) -> Result<()> {
        let rec = self.users.get_mut(&user_key::<E>(id)).ok_or(Error::UnknownUser)?;
        rec.status = status;
        Ok(())
    }

    /// Capability for reading `PS′` from the server.
    pub fn server_access(&self) -> HaAccess {
        HaAccess::new()
    }

    pub fn pending_ccms(&self) -> &[Scalar<E>] {
        &self.accepted
    }

    pub fn published(&self) -> &[VerifiedSet<E>] {
        &self.published
    }

    /// Runs the three checks on an infected user's contact list: status, group
    /// signature, then `PS′` lookup and CCM consistency. The list is consumed;
    /// accepted CCMs wait for the next publication.
    pub fn verify_contact_list(
        &mut self,
        vk: &GroupVerifKey<E>,
        server: &ServerState<E>,
        user_id: &G2<E>,
        cl: Vec<ContactEntry<E>>,
        parallel: bool,
        prepared: Option<&PreparedVerifier<E>>,
    ) -> Result<ContactListVerdict> {
        let rec = self.user(user_id).ok_or(Error::UnknownUser)?;
        if rec.status != HealthStatus::Infected {
            return Err(Error::UserNotInfected);
        }
        let t_u = rec.t_u;
        let access = self.server_access();
        let verdicts: Vec<_> = cl
            .iter()
            .map(|entry| {
                if !sig_verify_with(vk, entry.m, &entry.proof, parallel, prepared) {
                    return Err(EntryRejection::InvalidGroupSignature);
                }
                let ps_prime = server.fetch_ps_prime(&entry.ccm, &access).ok_or(EntryRejection::NoServerRecord)?;
                if !ccm_verify(&entry.m, ps_prime, server.public_key(), t_u) {
                    return Err(EntryRejection::CcmMismatch);
                }
                Ok(())
            })
            .collect();
        for (entry, v) in cl.iter().zip(&verdicts) {
            if v.is_ok() {
                self.accepted.push(entry.ccm);
            }
        }
        Ok(ContactListVerdict { verdicts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::{seeded_rng, SecurityLevel};
    use ark_bn254::Bn254;
    use ark_ff::UniformRand;

    type E = Bn254;

    fn setup() -> (PairingContext<E>, HaState<E>, rand_chacha::ChaCha20Rng) {
        let ctx = PairingContext::setup(SecurityLevel::Bits112, b"ha").unwrap();
        let mut rng = seeded_rng(b"ha");
        let ha = ha_keygen(&ctx, &mut rng);
        (ctx, ha, rng)
    }

    #[test]
    fn keys_and_registration() {
        let (ctx, mut ha, mut rng) = setup();
        assert_eq!(ha.pk, pow(ctx.g2(), ha.x));
        assert_eq!(ha.public_key_counts().total(), 1);
        let a = set_user_id(&mut ha, &ctx, &mut rng);
        let b = set_user_id(&mut ha, &ctx, &mut rng);
        assert_eq!(a.id, pow(ctx.g2(), a.t_u));
        assert_ne!(a.t_u, b.t_u);
        assert_eq!(ha.user(&a.id), Some(&a));
        assert_eq!(a.status, HealthStatus::Healthy);
        ha.set_status(&a.id, HealthStatus::Infected).unwrap();
        assert_eq!(ha.user(&a.id).unwrap().status, HealthStatus::Infected);
        assert_eq!(ha.set_status(&ctx.g2(), HealthStatus::Infected), Err(Error::UnknownUser));
    }

    #[test]
    fn published_sets_verify_and_resist_tampering() {
        let (ctx, mut ha, mut rng) = setup();
        let empty = ha_publish(&mut ha, &ctx);
        assert!(empty.ccms.is_empty());
        assert!(verify_set(&ctx, &empty, &ha.pk));

        let c = Scalar::<E>::rand(&mut rng);
        ha.accepted.extend([c, Scalar::<E>::rand(&mut rng), c]);
        let vs = ha_publish(&mut ha, &ctx);
        assert_eq!(vs.ccms.len(), 2);
        assert!(vs.contains(&c));
        assert!(verify_set(&ctx, &vs, &ha.pk));
        assert!(ha.pending_ccms().is_empty());
        assert_eq!(ha.published().len(), 2);

        let mut dropped = vs.clone();
        dropped.ccms.pop();
        assert!(!verify_set(&ctx, &dropped, &ha.pk));
        let mut swapped = vs.clone();
        swapped.ccms[0] = Scalar::<E>::rand(&mut rng);
        swapped.ccms.sort_by_key(scalar_to_bytes);
        assert!(!verify_set(&ctx, &swapped, &ha.pk));
        let other = ha_keygen(&ctx, &mut rng);
        assert!(!verify_set(&ctx, &vs, &other.pk));
    }

    #[test]
    fn json_round_trip() {
        let (ctx, mut ha, mut rng) = setup();
        let a = set_user_id(&mut ha, &ctx, &mut rng);
        ha.register_public_key(&a.id, ctx.g2()).unwrap();
        set_user_id(&mut ha, &ctx, &mut rng);
        ha_publish(&mut ha, &ctx);
        let text = serde_json::to_string(&ha).unwrap();
        assert_eq!(serde_json::from_str::<HaState<E>>(&text).unwrap(), ha);
    }
}
