//! Cryptographic core of the SPOT secure proximity protocol.
//!
//! Layers, bottom-up:
//!
//! - [`pairing`]: the asymmetric bilinear group, hashing and randomness.
//! - [`csig`]: constant-size structure-preserving signatures in both orientations.
//! - [`xsig`]: signatures on mixed G1/G2 messages built from two dual [`csig`] instances.
//! - [`niwi`]: Groth–Sahai witness-indistinguishable proofs for pairing-product equations.
//! - [`gsig`]: the proxy group signature.
//! - [`protocol`]: the twelve SPOT algorithms and the entity state machines.

pub mod codec;
pub mod error;
pub mod gsig;
pub mod niwi;
pub mod csig;
pub mod pairing;
pub mod protocol;
pub mod xsig;

pub use error::{Error, Result};
pub use pairing::{PairingContext, SecurityLevel, SpotCurve};

#[cfg(feature = "test-oracle")]
pub mod oracle;
