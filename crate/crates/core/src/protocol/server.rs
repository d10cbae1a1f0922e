use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::{ProtocolConfig, ProxyId};
use crate::codec::{hex_serde, put_point, scalar_to_bytes, ElementCounts, Reader, Wire};
use crate::error::Result;
use crate::pairing::{msm, pow, random_nonzero, PairingContext, Scalar, SpotCurve, G2};

/// Capability to read `PS′` from the server store. Only the health authority
/// can mint one.
#[derive(Debug)]
pub struct HaAccess {
    _private: (),
}

impl HaAccess {
    pub(super) fn new() -> Self {
        Self { _private: () }
    }
}

/// `pk_S = (Y1, Y2) = (g2^{y1}, g2^{y2})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ServerPublicKey<E: SpotCurve> {
    #[serde(with = "hex_serde::point")]
    pub y1: G2<E>,
    #[serde(with = "hex_serde::point")]
    pub y2: G2<E>,
}

impl<E: SpotCurve> Wire for ServerPublicKey<E> {
    fn encode(&self, out: &mut Vec<u8>) {
        put_point(out, &self.y1);
        put_point(out, &self.y2);
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(Self { y1: r.point()?, y2: r.point()? })
    }

    fn counts(&self) -> ElementCounts {
        ElementCounts::g2(2)
    }
}

/// Output of `S_PSign`. `PS` goes back to the proxies; `PS′` is readable only
/// with [`HaAccess`].
///
/// ```compile_fail
/// # fn leak<E: spot_core::SpotCurve>(s: spot_core::protocol::ServerSignature<E>) {
/// let _ = s.ps_prime;
/// # }
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServerSignature<E: SpotCurve> {
    pub ps: Scalar<E>,
    ps_prime: Scalar<E>,
}

impl<E: SpotCurve> ServerSignature<E> {
    pub fn ps_prime(&self, _: &HaAccess) -> Scalar<E> {
        self.ps_prime
    }
}

/// A matched CCM as kept by the server.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StoredSignature<E: SpotCurve> {
    #[serde(with = "hex_serde::scalar")]
    pub ccm: Scalar<E>,
    #[serde(with = "hex_serde::scalar")]
    pub ps: Scalar<E>,
    #[serde(with = "hex_serde::scalar")]
    ps_prime: Scalar<E>,
    pub received_at: u64,
    pub proxies: (ProxyId, ProxyId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
struct PendingCopy<E: SpotCurve> {
    #[serde(with = "hex_serde::scalar")]
    ccm: Scalar<E>,
    proxy: ProxyId,
    at: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IngestRejection {
    /// The CCM already has a stored signature.
    Duplicate,
    /// Both copies came through the same proxy.
    SameProxy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IngestOutcome<E: SpotCurve> {
    /// First copy seen; waiting for the second.
    Pending,
    /// Second copy matched; `PS` is returned to both proxies.
    Matched { ps: Scalar<E>, proxies: (ProxyId, ProxyId) },
    Rejected(IngestRejection),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ServerState<E: SpotCurve> {
    #[serde(with = "hex_serde::scalar")]
    y1: Scalar<E>,
    #[serde(with = "hex_serde::scalar")]
    y2: Scalar<E>,
    pk: ServerPublicKey<E>,
    store: BTreeMap<String, StoredSignature<E>>,
    pending: BTreeMap<String, PendingCopy<E>>,
}

/// `S_Keygen`.
pub fn s_keygen<E, R>(ctx: &PairingContext<E>, rng: &mut R) -> ServerState<E>
where
    E: SpotCurve,
    R: RngCore + CryptoRng,
{
    let y1 = random_nonzero(rng);
    let y2 = random_nonzero(rng);
    let pk = ServerPublicKey { y1: pow(ctx.g2(), y1), y2: pow(ctx.g2(), y2) };
    ServerState { y1, y2, pk, store: BTreeMap::new(), pending: BTreeMap::new() }
}

fn ccm_key<E: SpotCurve>(ccm: &Scalar<E>) -> String {
    hex::encode(scalar_to_bytes(ccm))
}

impl<E: SpotCurve> ServerState<E> {
    pub fn public_key(&self) -> &ServerPublicKey<E> {
        &self.pk
    }

    /// `S_PSign`: `PS = CCM·y1·r_s + y2`, `PS′ = CCM·r_s` for fresh `r_s`.
    pub fn s_psign<R: RngCore + CryptoRng>(&self, ccm: Scalar<E>, rng: &mut R) -> ServerSignature<E> {
        let r_s: Scalar<E> = random_nonzero(rng);
        ServerSignature { ps: ccm * self.y1 * r_s + self.y2, ps_prime: ccm * r_s }
    }

    /// Handles one copy of a CCM forwarded by a proxy at time `now`.
    pub fn ingest<R: RngCore + CryptoRng>(
        &mut self,
        cfg: &ProtocolConfig,
        ccm: Scalar<E>,
        proxy: ProxyId,
        now: u64,
        rng: &mut R,
    ) -> IngestOutcome<E> {
        self.pending.retain(|_, p| now.saturating_sub(p.at) <= cfg.matching_window_secs);
        let key = ccm_key::<E>(&ccm);
        if let Some(stored) = self.store.get(&key) {
            if !cfg.expired(stored.received_at, now) {
                return IngestOutcome::Rejected(IngestRejection::Duplicate);
            }
        }
        match self.pending.remove(&key) {
            None => {
                self.pending.insert(key, PendingCopy { ccm, proxy, at: now });
                IngestOutcome::Pending
            }
            Some(first) if first.proxy == proxy => {
                self.pending.insert(key, first);
                IngestOutcome::Rejected(IngestRejection::SameProxy)
            }
            Some(first) => {
                let sig = self.s_psign(ccm, rng);
                let proxies = (first.proxy, proxy);
                self.store.insert(
                    key,
                    StoredSignature { ccm, ps: sig.ps, ps_prime: sig.ps_prime, received_at: now, proxies },
                );
                IngestOutcome::Matched { ps: sig.ps, proxies }
            }
        }
    }

    /// The health authority's lookup of `PS′` by CCM.
    pub fn fetch_ps_prime(&self, ccm: &Scalar<E>, _: &HaAccess) -> Option<Scalar<E>> {
        self.store.get(&ccm_key::<E>(ccm)).map(|s| s.ps_prime)
    }

    pub fn stored(&self, ccm: &Scalar<E>) -> Option<&StoredSignature<E>> {
        self.store.get(&ccm_key::<E>(ccm))
    }

    pub fn store_len(&self) -> usize {
        self.store.len()
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Drops records older than Δ days and pending copies past the window.
    pub fn purge_expired(&mut self, cfg: &ProtocolConfig, now: u64) {
        self.store.retain(|_, s| !cfg.expired(s.received_at, now));
        self.pending.retain(|_, p| now.saturating_sub(p.at) <= cfg.matching_window_secs);
    }
}

/// `CCM_Verify`: `M = Y1^{t_U·PS′} · Y2^{t_U}`.
pub fn ccm_verify<E: SpotCurve>(m: &G2<E>, ps_prime: Scalar<E>, pk: &ServerPublicKey<E>, t_u: Scalar<E>) -> bool {
    *m == msm(&[pk.y1, pk.y2], &[t_u * ps_prime, t_u])
}
