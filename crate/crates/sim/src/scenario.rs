//! Scenario documents.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use spot_core::pairing::seeded_rng;
use spot_core::protocol::{ProtocolConfig, ProxyRoster};
use spot_core::SecurityLevel;

use crate::SimError;

/// A contact between two users during one epoch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProximityEvent {
    pub epoch: u64,
    pub users: (usize, usize),
    pub duration_secs: u64,
}

/// A positive test reported on the given day.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfectionEvent {
    pub day: u64,
    pub user: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: String,
    pub security_level: u32,
    pub users: usize,
    pub proxies: ProxyRoster,
    pub epoch_secs: u64,
    pub epochs: u64,
    pub contacts: Vec<ProximityEvent>,
    pub infections: Vec<InfectionEvent>,
    #[serde(default)]
    pub config: ProtocolConfig,
}

impl Scenario {
    pub fn level(&self) -> Result<SecurityLevel, SimError> {
        SecurityLevel::from_bits(self.security_level).map_err(|e| SimError::Scenario(e.to_string()))
    }

    /// Number of proxy credentials to issue: one per roster id.
    pub fn proxy_count(&self) -> usize {
        self.proxies.primary.iter().chain(&self.proxies.secondary).map(|&p| p as usize + 1).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Scenario(msg));
        self.level()?;
        if self.users < 2 {
            return bad("at least two users are needed".into());
        }
        if self.epoch_secs == 0 {
            return bad("epoch_secs must be positive".into());
        }
        let primary: BTreeSet<_> = self.proxies.primary.iter().collect();
        let secondary: BTreeSet<_> = self.proxies.secondary.iter().collect();
        if primary.is_empty() || secondary.is_empty() {
            return bad("both proxy subsets need at least one proxy".into());
        }
        if !primary.is_disjoint(&secondary) {
            return bad("proxy subsets must be disjoint".into());
        }
        if primary.len() != self.proxies.primary.len() || secondary.len() != self.proxies.secondary.len() {
            return bad("proxy ids repeat within a subset".into());
        }
        let mut last = 0;
        for (i, c) in self.contacts.iter().enumerate() {
            let (a, b) = c.users;
            if a >= self.users || b >= self.users {
                return bad(format!("contact {i} names an undeclared user"));
            }
            if a == b {
                return bad(format!("contact {i} pairs a user with themself"));
            }
            if c.epoch >= self.epochs {
                return bad(format!("contact {i} is outside the {} declared epochs", self.epochs));
            }
            if c.epoch < last {
                return bad(format!("contact {i} goes back in time"));
            }
            if c.duration_secs > self.epoch_secs {
                return bad(format!("contact {i} outlasts its epoch"));
            }
            last = c.epoch;
        }
        let mut last = 0;
        for (i, inf) in self.infections.iter().enumerate() {
            if inf.user >= self.users {
                return bad(format!("infection {i} names an undeclared user"));
            }
            if inf.day < last {
                return bad(format!("infection {i} goes back in time"));
            }
            last = inf.day;
        }
        Ok(())
    }

    /// A random scenario with every contact and infection placed inside the
    /// declared horizon. Infections fall on the day after the last epoch, so
    /// every contact is on the lists that get submitted.
    #[allow(clippy::too_many_arguments)]
    pub fn generate(
        seed: &str,
        security_level: u32,
        users: usize,
        proxies: ProxyRoster,
        epochs: u64,
        contacts: usize,
        infections: usize,
    ) -> Self {
        let mut rng = seeded_rng(format!("scenario/{seed}").as_bytes());
        let epoch_secs = 3600;
        let mut events: Vec<ProximityEvent> = (0..contacts)
            .map(|_| {
                let a = rng.gen_range(0..users);
                let b = (a + rng.gen_range(1..users)) % users;
                ProximityEvent {
                    epoch: rng.gen_range(0..epochs),
                    users: (a, b),
                    duration_secs: rng.gen_range(60..=epoch_secs),
                }
            })
            .collect();
        events.sort_by_key(|e| e.epoch);
        let mut ids: Vec<usize> = (0..users).collect();
        ids.shuffle(&mut rng);
        let day = (epochs * epoch_secs).div_ceil(spot_core::protocol::SECONDS_PER_DAY);
        let infections = ids.into_iter().take(infections).map(|user| InfectionEvent { day, user }).collect();
        Self {
            seed: seed.into(),
            security_level,
            users,
            proxies,
            epoch_secs,
            epochs,
            contacts: events,
            infections,
            config: ProtocolConfig::default(),
        }
    }

    /// Ten users, three proxies in two subsets, twenty epochs, thirty
    /// contacts and two infections.
    pub fn reference(seed: &str) -> Self {
        let roster = ProxyRoster { primary: vec![0, 1], secondary: vec![2] };
        Self::generate(seed, 112, 10, roster, 20, 30, 2)
    }
}
