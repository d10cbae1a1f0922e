//! The SPOT algorithms and the state held by each entity.
//!
//! | Phase        | Algorithms                                                   |
//! |--------------|--------------------------------------------------------------|
//! | System init  | `Set_params`, `GSIG.Setup`, `Join_ProxyGr`, `S_Keygen`, `HA_Keygen`, `Set_UserID`, `Userkeygen` |
//! | Generation   | `Set_CCM`, `S_PSign`, `P_Sign`                               |
//! | Verification | `Sig_Verify`, `CCM_Verify`                                   |
//!
//! Time is simulated as integer seconds. Retention, the server's matching
//! window and the risk weights come from [`ProtocolConfig`].

mod ha;
mod proxy;
mod server;
mod snapshot;
mod user;

use std::collections::BTreeSet;

use ark_ff::PrimeField;
use rand::{CryptoRng, Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::codec::scalar_to_bytes;
use crate::error::{Error, Result};
use crate::pairing::{PairingContext, Scalar, SpotCurve};

pub use ha::{
    ha_keygen, ha_publish, set_user_id, verify_set, ContactListVerdict, EntryRejection, HaState, HealthStatus,
    UserRecord, VerifiedSet,
};
pub use proxy::{p_sign, sig_verify, sig_verify_with, ProxySignature};
pub use server::{ccm_verify, s_keygen, HaAccess, IngestOutcome, IngestRejection, ServerPublicKey, ServerSignature, ServerState, StoredSignature};
pub use snapshot::{from_envelope, to_envelope, Envelope, SNAPSHOT_FORMAT, SNAPSHOT_VERSION};
pub use user::{user_keygen, ContactEntry, UserState};

pub const SECONDS_PER_DAY: u64 = 86_400;

/// Tunables the protocol description leaves open.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Δ: days a contact entry or server record is kept.
    pub retention_days: u64,
    /// Seconds within which the second copy of a CCM must reach the server.
    pub matching_window_secs: u64,
    /// Contact duration covered by one unit of risk weight.
    pub duration_unit_secs: u64,
    /// Cap on the weight of a single contact.
    pub max_contact_weight: u64,
    /// Score at which a user is flagged as exposed.
    pub exposure_threshold: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            retention_days: 14,
            matching_window_secs: 60,
            duration_unit_secs: 15 * 60,
            max_contact_weight: 4,
            exposure_threshold: 1,
        }
    }
}

impl ProtocolConfig {
    pub fn retention_secs(&self) -> u64 {
        self.retention_days * SECONDS_PER_DAY
    }

    /// Whether something recorded at `at` is past retention at `now`.
    pub fn expired(&self, at: u64, now: u64) -> bool {
        now.saturating_sub(at) > self.retention_secs()
    }

    /// `min(ceil(duration / unit), cap)`.
    pub fn duration_weight(&self, duration_secs: u64) -> u64 {
        duration_secs.div_ceil(self.duration_unit_secs.max(1)).min(self.max_contact_weight)
    }
}

pub type ProxyId = u32;

/// Ephemeral Bluetooth identifier: a nonzero 128-bit value. Serialized as
/// 32 hex digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Ebid(u128);

impl Ebid {
    pub fn new(v: u128) -> Result<Self> {
        if v == 0 {
            return Err(Error::ZeroEbid);
        }
        Ok(Self(v))
    }

    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let v: u128 = rng.gen();
            if v != 0 {
                return Self(v);
            }
        }
    }

    pub fn value(self) -> u128 {
        self.0
    }

    pub fn to_scalar<F: PrimeField>(self) -> F {
        F::from(self.0)
    }
}

impl TryFrom<String> for Ebid {
    type Error = Error;
    fn try_from(text: String) -> Result<Self> {
        if text.len() != 32 {
            return Err(Error::Malformed(format!("EBID must be 32 hex digits, got {}", text.len())));
        }
        let v = u128::from_str_radix(&text, 16).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::new(v)
    }
}

impl From<Ebid> for String {
    fn from(e: Ebid) -> String {
        format!("{:032x}", e.0)
    }
}

/// `Set_CCM`: `H(D_A · D_B mod n)`. Symmetric in its arguments.
pub fn set_ccm<E: SpotCurve>(ctx: &PairingContext<E>, d_a: Ebid, d_b: Ebid) -> Scalar<E> {
    let product: Scalar<E> = d_a.to_scalar::<Scalar<E>>() * d_b.to_scalar::<Scalar<E>>();
    ctx.hash_to_scalar(&scalar_to_bytes(&product))
}

/// Proxies split into two disjoint subsets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProxyRoster {
    pub primary: Vec<ProxyId>,
    pub secondary: Vec<ProxyId>,
}

/// The user with the larger EBID takes the primary subset's proxy, the other
/// user the secondary subset's.
pub fn choose_proxies(d_a: Ebid, d_b: Ebid, roster: &ProxyRoster) -> Result<(ProxyId, ProxyId)> {
    let (Some(&first), Some(&second)) = (roster.primary.first(), roster.secondary.first()) else {
        return Err(Error::InsufficientRoster);
    };
    if first == second {
        return Err(Error::InsufficientRoster);
    }
    match d_a.cmp(&d_b) {
        std::cmp::Ordering::Greater => Ok((first, second)),
        std::cmp::Ordering::Less => Ok((second, first)),
        std::cmp::Ordering::Equal => Err(Error::EbidTie),
    }
}

/// Exposure estimate for one user.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskScore {
    pub score: u64,
    pub matches: usize,
    pub exposed: bool,
}

/// Weighted count of the user's contacts whose CCM the health authority
/// published. Refuses sets whose signature does not verify.
pub fn risk_score<E: SpotCurve>(
    ctx: &PairingContext<E>,
    user: &UserState<E>,
    vs: &VerifiedSet<E>,
    pk_ha: &crate::pairing::G2<E>,
    cfg: &ProtocolConfig,
) -> Result<RiskScore> {
    if !verify_set(ctx, vs, pk_ha) {
        return Err(Error::InvalidSetSignature);
    }
    let published: BTreeSet<Vec<u8>> = vs.ccms.iter().map(scalar_to_bytes).collect();
    let mut score = 0;
    let mut matches = 0;
    for entry in user.contacts() {
        if published.contains(&scalar_to_bytes(&entry.ccm)) {
            score += cfg.duration_weight(entry.duration);
            matches += 1;
        }
    }
    Ok(RiskScore { score, matches, exposed: score >= cfg.exposure_threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::{seeded_rng, SecurityLevel};
    use ark_bn254::Bn254;
    use std::collections::HashSet;

    type E = Bn254;

    fn ctx() -> PairingContext<E> {
        PairingContext::setup(SecurityLevel::Bits112, b"protocol").unwrap()
    }

    #[test]
    fn ccm_is_symmetric_and_depends_on_the_product_only() {
        let ctx = ctx();
        let a = Ebid::new(6).unwrap();
        let b = Ebid::new(35).unwrap();
        assert_eq!(set_ccm(&ctx, a, b), set_ccm(&ctx, b, a));
        let c = Ebid::new(10).unwrap();
        let d = Ebid::new(21).unwrap();
        assert_eq!(set_ccm(&ctx, a, b), set_ccm(&ctx, c, d));
        assert_ne!(set_ccm(&ctx, a, b), set_ccm(&ctx, a, c));
    }

    #[test]
    fn fresh_ebids_give_fresh_ccms() {
        let ctx = ctx();
        let mut rng = seeded_rng(b"epochs");
        let seen: HashSet<Vec<u8>> = (0..100)
            .map(|_| scalar_to_bytes(&set_ccm(&ctx, Ebid::random(&mut rng), Ebid::random(&mut rng))))
            .collect();
        assert_eq!(seen.len(), 100);
    }

    #[test]
    fn zero_ebid_is_rejected() {
        assert_eq!(Ebid::new(0), Err(Error::ZeroEbid));
        let zero = format!("\"{}\"", "0".repeat(32));
        assert!(serde_json::from_str::<Ebid>(&zero).is_err());
        assert!(serde_json::from_str::<Ebid>("\"7\"").is_err());
        let seven = Ebid::new(7).unwrap();
        let text = serde_json::to_string(&seven).unwrap();
        assert_eq!(text, format!("\"{}7\"", "0".repeat(31)));
        assert_eq!(serde_json::from_str::<Ebid>(&text).unwrap(), seven);
    }

    #[test]
    fn proxy_choice_follows_ebid_order() {
        let roster = ProxyRoster { primary: vec![1, 2], secondary: vec![3] };
        let big = Ebid::new(9).unwrap();
        let small = Ebid::new(4).unwrap();
        assert_eq!(choose_proxies(big, small, &roster), Ok((1, 3)));
        assert_eq!(choose_proxies(small, big, &roster), Ok((3, 1)));
        assert_eq!(choose_proxies(big, big, &roster), Err(Error::EbidTie));
        let lonely = ProxyRoster { primary: vec![1], secondary: vec![] };
        assert_eq!(choose_proxies(big, small, &lonely), Err(Error::InsufficientRoster));
    }

    #[test]
    fn duration_weights() {
        let cfg = ProtocolConfig::default();
        assert_eq!(cfg.duration_weight(0), 0);
        assert_eq!(cfg.duration_weight(1), 1);
        assert_eq!(cfg.duration_weight(900), 1);
        assert_eq!(cfg.duration_weight(901), 2);
        assert_eq!(cfg.duration_weight(100_000), 4);
    }

    #[test]
    fn config_document_round_trips_and_fills_defaults() {
        let cfg: ProtocolConfig = serde_json::from_str(r#"{"retention_days": 7}"#).unwrap();
        assert_eq!(cfg.retention_days, 7);
        assert_eq!(cfg.matching_window_secs, 60);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ProtocolConfig>(&text).unwrap(), cfg);
        assert!(serde_json::from_str::<ProtocolConfig>(r#"{"delta": 7}"#).is_err());
    }

    proptest::proptest! {
        #[test]
        fn duration_weight_is_monotone_and_capped(a in 0u64..200_000, b in 0u64..200_000, unit in 1u64..4000, cap in 1u64..20) {
            let cfg = ProtocolConfig { duration_unit_secs: unit, max_contact_weight: cap, ..ProtocolConfig::default() };
            let (lo, hi) = (a.min(b), a.max(b));
            proptest::prop_assert!(cfg.duration_weight(lo) <= cfg.duration_weight(hi));
            proptest::prop_assert!(cfg.duration_weight(hi) <= cap);
            proptest::prop_assert_eq!(cfg.duration_weight(lo) == 0, lo == 0);
        }

        #[test]
        fn ebid_text_round_trips(v in 1u128..) {
            let e = Ebid::new(v).unwrap();
            let text = serde_json::to_string(&e).unwrap();
            proptest::prop_assert_eq!(text.len(), 34);
            proptest::prop_assert_eq!(serde_json::from_str::<Ebid>(&text).unwrap(), e);
        }

        #[test]
        fn proxy_choice_is_symmetric(a in 1u128.., b in 1u128..) {
            let roster = ProxyRoster { primary: vec![0], secondary: vec![1] };
            let (ea, eb) = (Ebid::new(a).unwrap(), Ebid::new(b).unwrap());
            match (choose_proxies(ea, eb, &roster), choose_proxies(eb, ea, &roster)) {
                (Ok((x, y)), Ok((p, q))) => proptest::prop_assert_eq!((x, y), (q, p)),
                (Err(_), Err(_)) => proptest::prop_assert_eq!(a, b),
                _ => proptest::prop_assert!(false),
            }
        }

        #[test]
        fn expiry_matches_retention(at in 0u64..10_000_000, gap in 0u64..3_000_000, days in 1u64..30) {
            let cfg = ProtocolConfig { retention_days: days, ..ProtocolConfig::default() };
            proptest::prop_assert_eq!(cfg.expired(at, at + gap), gap > days * SECONDS_PER_DAY);
        }
    }
}
