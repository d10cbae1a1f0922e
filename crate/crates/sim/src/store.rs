//! Per-entity state files in a working directory.
//!
//! `params.json` holds the security level, seed, protocol configuration and
//! simulated clock. Every other file is a versioned snapshot envelope bound to
//! the curve named in `params.json`.

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use spot_core::codec::{hex_serde, Wire};
use spot_core::gsig::{GroupSecretKey, GroupVerifKey, ProxyCredential};
use spot_core::pairing::{child_seed, seeded_rng};
use spot_core::protocol::{from_envelope, to_envelope, Envelope, ProtocolConfig, ProxyRoster};
use spot_core::{PairingContext, SecurityLevel, SpotCurve};

use crate::SimError;

pub const PARAMS_FORMAT: &str = "spot-params";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub format: String,
    pub version: u32,
    pub security_level: u32,
    pub seed: String,
    pub config: ProtocolConfig,
    /// Simulated seconds.
    pub now: u64,
    /// Commands run so far; feeds the per-command randomness.
    pub counter: u64,
    /// Contacts recorded so far; each one opens a fresh epoch.
    pub epochs: u64,
}

impl Params {
    pub fn new(level: SecurityLevel, seed: &str, config: ProtocolConfig) -> Self {
        Self {
            format: PARAMS_FORMAT.into(),
            version: 1,
            security_level: level.bits(),
            seed: seed.into(),
            config,
            now: 0,
            counter: 0,
            epochs: 0,
        }
    }

    pub fn level(&self) -> Result<SecurityLevel, SimError> {
        Ok(SecurityLevel::from_bits(self.security_level)?)
    }

    pub fn context<E: SpotCurve>(&self) -> Result<PairingContext<E>, SimError> {
        Ok(PairingContext::setup(self.level()?, self.seed.as_bytes())?)
    }

    /// A fresh deterministic generator for the next command.
    pub fn next_rng(&mut self, command: &str) -> rand_chacha::ChaCha20Rng {
        self.counter += 1;
        let mut outer = seeded_rng(format!("{}/{}/{command}", self.seed, self.counter).as_bytes());
        seeded_rng(&child_seed(&mut outer))
    }
}

/// Wire-encoded value stored as one hex string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent, bound = "T: Wire")]
pub struct Hex<T>(#[serde(with = "hex_serde::wire")] pub T);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Manager<E: SpotCurve> {
    pub gsk: Hex<GroupSecretKey<E>>,
    pub vk: Hex<GroupVerifKey<E>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Proxies<E: SpotCurve> {
    pub roster: ProxyRoster,
    pub credentials: Vec<Hex<ProxyCredential<E>>>,
}

pub struct Store {
    dir: PathBuf,
}

fn io_err(path: &Path, source: std::io::Error) -> SimError {
    if source.kind() == ErrorKind::NotFound {
        SimError::MissingState(path.display().to_string())
    } else {
        SimError::Io { path: path.display().to_string(), source }
    }
}

fn malformed(path: &Path, reason: impl ToString) -> SimError {
    SimError::Malformed { path: path.display().to_string(), reason: reason.to_string() }
}

/// User names become file names, so they are kept to a safe alphabet.
pub fn check_name(name: &str) -> Result<(), SimError> {
    let ok = !name.is_empty()
        && name.len() <= 64
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(SimError::Malformed { path: name.into(), reason: "names use letters, digits, '-' and '_'".into() })
    }
}

impl Store {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    pub fn exists(&self, file: &str) -> bool {
        self.path(file).exists()
    }

    pub fn user_file(name: &str) -> String {
        format!("users/{name}.json")
    }

    pub fn read_json<T: DeserializeOwned>(&self, file: &str) -> Result<T, SimError> {
        let path = self.path(file);
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        serde_json::from_str(&text).map_err(|e| malformed(&path, e))
    }

    pub fn write_json<T: Serialize>(&self, file: &str, value: &T) -> Result<(), SimError> {
        let path = self.path(file);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        let text = serde_json::to_string_pretty(value).map_err(|e| malformed(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))
    }

    pub fn params(&self) -> Result<Params, SimError> {
        let params: Params = self.read_json("params.json")?;
        if params.format != PARAMS_FORMAT || params.version != 1 {
            return Err(malformed(&self.path("params.json"), "unsupported params format"));
        }
        params.level()?;
        Ok(params)
    }

    pub fn save_params(&self, params: &Params) -> Result<(), SimError> {
        self.write_json("params.json", params)
    }

    pub fn load<E: SpotCurve, T: DeserializeOwned>(&self, kind: &str, file: &str) -> Result<T, SimError> {
        let env: Envelope = self.read_json(file)?;
        from_envelope::<E, T>(kind, &env).map_err(|e| malformed(&self.path(file), e))
    }

    pub fn save<E: SpotCurve, T: Serialize>(&self, kind: &str, file: &str, value: &T) -> Result<(), SimError> {
        let env = to_envelope::<E, T>(kind, value)?;
        self.write_json(file, &env)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use spot_core::pairing::Bn254;
    use spot_core::protocol::s_keygen;

    #[test]
    fn params_and_snapshots_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::new(dir.path());
        assert!(matches!(store.params(), Err(SimError::MissingState(_))));
        let mut params = Params::new(SecurityLevel::Bits112, "s", ProtocolConfig::default());
        store.save_params(&params).unwrap();
        assert_eq!(store.params().unwrap(), params);

        let ctx = params.context::<Bn254>().unwrap();
        let server = s_keygen(&ctx, &mut params.next_rng("keygen"));
        store.save::<Bn254, _>("server", "server.json", &server).unwrap();
        let back: spot_core::protocol::ServerState<Bn254> = store.load::<Bn254, _>("server", "server.json").unwrap();
        assert_eq!(back, server);
        assert!(matches!(store.load::<Bn254, ProtocolConfig>("ha", "server.json"), Err(SimError::Malformed { .. })));

        std::fs::write(store.path("params.json"), "{").unwrap();
        assert!(matches!(store.params(), Err(SimError::Malformed { .. })));
    }

    #[test]
    fn command_randomness_advances() {
        let mut p = Params::new(SecurityLevel::Bits112, "s", ProtocolConfig::default());
        let mut q = p.clone();
        use rand::RngCore;
        assert_eq!(p.next_rng("x").next_u64(), q.next_rng("x").next_u64());
        assert_ne!(p.next_rng("x").next_u64(), Params::new(SecurityLevel::Bits112, "s", ProtocolConfig::default()).next_rng("x").next_u64());
    }

    #[test]
    fn names_are_restricted() {
        assert!(check_name("alice_1").is_ok());
        assert!(check_name("../etc").is_err());
        assert!(check_name("").is_err());
    }
}
