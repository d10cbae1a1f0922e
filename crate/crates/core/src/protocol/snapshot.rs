use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::pairing::SpotCurve;

pub const SNAPSHOT_FORMAT: &str = "spot-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Versioned JSON wrapper around one entity's state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub format: String,
    pub version: u32,
    pub kind: String,
    pub curve: String,
    pub body: Value,
}

pub fn to_envelope<E: SpotCurve, T: Serialize>(kind: &str, body: &T) -> Result<Envelope> {
    Ok(Envelope {
        format: SNAPSHOT_FORMAT.into(),
        version: SNAPSHOT_VERSION,
        kind: kind.into(),
        curve: E::NAME.into(),
        body: serde_json::to_value(body).map_err(|e| Error::Malformed(e.to_string()))?,
    })
}

pub fn from_envelope<E: SpotCurve, T: DeserializeOwned>(kind: &str, env: &Envelope) -> Result<T> {
    if env.format != SNAPSHOT_FORMAT || env.version != SNAPSHOT_VERSION {
        return Err(Error::Malformed(format!("unsupported snapshot {} v{}", env.format, env.version)));
    }
    if env.kind != kind {
        return Err(Error::Malformed(format!("expected a {kind} snapshot, found {}", env.kind)));
    }
    if env.curve != E::NAME {
        return Err(Error::Malformed(format!("snapshot is for {}, not {}", env.curve, E::NAME)));
    }
    serde_json::from_value(env.body.clone()).map_err(|e| Error::Malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::ProtocolConfig;
    use ark_bls12_381::Bls12_381;
    use ark_bn254::Bn254;

    #[test]
    fn envelope_checks_kind_curve_and_version() {
        let cfg = ProtocolConfig::default();
        let env = to_envelope::<Bn254, _>("config", &cfg).unwrap();
        assert_eq!(from_envelope::<Bn254, ProtocolConfig>("config", &env).unwrap(), cfg);
        assert!(from_envelope::<Bn254, ProtocolConfig>("server", &env).is_err());
        assert!(from_envelope::<Bls12_381, ProtocolConfig>("config", &env).is_err());
        let mut old = env.clone();
        old.version = 0;
        assert!(from_envelope::<Bn254, ProtocolConfig>("config", &old).is_err());
    }
}
