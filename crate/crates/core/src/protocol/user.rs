use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::{Ebid, ProtocolConfig, SECONDS_PER_DAY};
use crate::codec::hex_serde;
use crate::gsig::GroupSignature;
use crate::pairing::{pow, random_nonzero, Scalar, SpotCurve, G2};

/// One row of a user's contact list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ContactEntry<E: SpotCurve> {
    #[serde(with = "hex_serde::scalar")]
    pub ccm: Scalar<E>,
    /// `M = ID_U^{PS}` as returned by the proxy.
    #[serde(with = "hex_serde::point")]
    pub m: G2<E>,
    #[serde(with = "hex_serde::wire")]
    pub proof: GroupSignature<E>,
    /// Simulated seconds at which the contact started.
    pub at: u64,
    pub duration: u64,
}

impl<E: SpotCurve> ContactEntry<E> {
    pub fn day(&self) -> u64 {
        self.at / SECONDS_PER_DAY
    }

    pub fn time_of_day(&self) -> u64 {
        self.at % SECONDS_PER_DAY
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct UserState<E: SpotCurve> {
    #[serde(with = "hex_serde::point")]
    pub id: G2<E>,
    #[serde(with = "hex_serde::scalar")]
    q: Scalar<E>,
    #[serde(with = "hex_serde::point")]
    pub pk: G2<E>,
    epoch: Option<(u64, Ebid)>,
    contacts: Vec<ContactEntry<E>>,
}

/// `Userkeygen`: `pk_U = ID_U^{q_U}` for fresh nonzero `q_U`.
pub fn user_keygen<E, R>(id: G2<E>, rng: &mut R) -> UserState<E>
where
    E: SpotCurve,
    R: RngCore + CryptoRng,
{
    let q = random_nonzero(rng);
    UserState { id, q, pk: pow(id, q), epoch: None, contacts: Vec::new() }
}

impl<E: SpotCurve> UserState<E> {
    pub fn secret_key(&self) -> Scalar<E> {
        self.q
    }

    /// The EBID for `epoch`, drawn fresh the first time the epoch is seen.
    pub fn ebid<R: RngCore + CryptoRng>(&mut self, epoch: u64, rng: &mut R) -> Ebid {
        match self.epoch {
            Some((e, d)) if e == epoch => d,
            _ => {
                let d = Ebid::random(rng);
                self.epoch = Some((epoch, d));
                d
            }
        }
    }

    pub fn current_ebid(&self) -> Option<(u64, Ebid)> {
        self.epoch
    }

    pub fn add_contact(&mut self, entry: ContactEntry<E>) {
        self.contacts.push(entry);
    }

    pub fn contacts(&self) -> &[ContactEntry<E>] {
        &self.contacts
    }

    /// Drops entries older than Δ days.
    pub fn purge_expired(&mut self, cfg: &ProtocolConfig, now: u64) {
        self.contacts.retain(|c| !cfg.expired(c.at, now));
    }
}
