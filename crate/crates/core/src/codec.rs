//! Canonical binary encodings and element accounting.
//!
//! Scalars are fixed-width big-endian. G1 and G2 points use the compressed
//! form, Gt elements the full field element. Decoding validates curve and
//! subgroup membership and rejects non-canonical scalars.

use std::fmt;
use std::ops::{Add, AddAssign};

use ark_ec::pairing::Pairing;
use ark_ec::AffineRepr;
use ark_ff::{BigInteger, PrimeField};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn put_point<T: CanonicalSerialize>(out: &mut Vec<u8>, p: &T) {
    p.serialize_compressed(&mut *out)
        .expect("serializing into a Vec cannot fail");
}

pub fn put_scalar<F: PrimeField>(out: &mut Vec<u8>, x: &F) {
    out.extend_from_slice(&scalar_to_bytes(x));
}

pub fn put_len(out: &mut Vec<u8>, n: usize) {
    out.extend_from_slice(&(n as u32).to_be_bytes());
}

pub fn scalar_width<F: PrimeField>() -> usize {
    (F::MODULUS_BIT_SIZE as usize).div_ceil(8)
}

pub fn scalar_to_bytes<F: PrimeField>(x: &F) -> Vec<u8> {
    let be = x.into_bigint().to_bytes_be();
    let width = scalar_width::<F>();
    // to_bytes_be is limb-width; strip the leading zero padding.
    be[be.len() - width..].to_vec()
}

pub fn scalar_from_bytes<F: PrimeField>(bytes: &[u8]) -> Result<F> {
    let width = scalar_width::<F>();
    if bytes.len() != width {
        return Err(Error::Malformed(format!(
            "scalar must be {width} bytes, got {}",
            bytes.len()
        )));
    }
    let mut le = bytes.to_vec();
    le.reverse();
    le.resize(F::zero().compressed_size(), 0);
    F::deserialize_compressed(le.as_slice())
        .map_err(|_| Error::Malformed("non-canonical scalar".into()))
}

pub fn point_to_bytes<T: CanonicalSerialize>(p: &T) -> Vec<u8> {
    let mut out = Vec::with_capacity(p.compressed_size());
    put_point(&mut out, p);
    out
}

pub fn point_from_bytes<T: CanonicalDeserialize>(bytes: &[u8]) -> Result<T> {
    let mut r = Reader::new(bytes);
    let p = r.point()?;
    r.finish()?;
    Ok(p)
}

/// Cursor over an encoded buffer.
pub struct Reader<'a> {
    rest: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { rest: bytes }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.rest.len() < n {
            return Err(Error::Malformed(format!(
                "truncated input: wanted {n} bytes, {} left",
                self.rest.len()
            )));
        }
        let (head, tail) = self.rest.split_at(n);
        self.rest = tail;
        Ok(head)
    }

    pub fn take_array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    pub fn len_prefix(&mut self) -> Result<usize> {
        Ok(u32::from_be_bytes(self.take_array::<4>()?) as usize)
    }

    pub fn point<T: CanonicalDeserialize>(&mut self) -> Result<T> {
        T::deserialize_compressed(&mut self.rest)
            .map_err(|e| Error::Malformed(format!("invalid group element: {e}")))
    }

    pub fn scalar<F: PrimeField>(&mut self) -> Result<F> {
        let bytes = self.take(scalar_width::<F>())?;
        scalar_from_bytes(bytes)
    }

    pub fn finish(self) -> Result<()> {
        if self.rest.is_empty() {
            Ok(())
        } else {
            Err(Error::Malformed(format!("{} trailing bytes", self.rest.len())))
        }
    }
}

/// Number of elements of each kind carried by a message.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElementCounts {
    pub g1: usize,
    pub g2: usize,
    pub gt: usize,
    pub zn: usize,
}

impl ElementCounts {
    pub const fn new(g1: usize, g2: usize, gt: usize, zn: usize) -> Self {
        Self { g1, g2, gt, zn }
    }

    pub const fn g1(n: usize) -> Self {
        Self::new(n, 0, 0, 0)
    }

    pub const fn g2(n: usize) -> Self {
        Self::new(0, n, 0, 0)
    }

    pub const fn zn(n: usize) -> Self {
        Self::new(0, 0, 0, n)
    }

    pub fn total(&self) -> usize {
        self.g1 + self.g2 + self.gt + self.zn
    }

    /// Encoded size in bytes for curve `E`, excluding length prefixes.
    pub fn byte_len<E: Pairing>(&self) -> usize {
        let g1 = E::G1Affine::generator().compressed_size();
        let g2 = E::G2Affine::generator().compressed_size();
        let gt = ark_ec::pairing::PairingOutput::<E>::default().compressed_size();
        let zn = scalar_width::<E::ScalarField>();
        self.g1 * g1 + self.g2 * g2 + self.gt * gt + self.zn * zn
    }
}

impl Add for ElementCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.g1 + o.g1, self.g2 + o.g2, self.gt + o.gt, self.zn + o.zn)
    }
}

impl AddAssign for ElementCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl fmt::Display for ElementCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (n, name) in [(self.g1, "G1"), (self.g2, "G2"), (self.gt, "G3"), (self.zn, "Zn")] {
            match n {
                0 => {}
                1 => parts.push(format!("|{name}|")),
                n => parts.push(format!("{n}|{name}|")),
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Canonical binary form of a compound protocol value.
pub trait Wire: Sized {
    fn encode(&self, out: &mut Vec<u8>);
    fn decode(r: &mut Reader<'_>) -> Result<Self>;
    /// Group and field elements carried, excluding framing.
    fn counts(&self) -> ElementCounts;

    fn to_wire(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode(&mut out);
        out
    }

    fn from_wire(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let v = Self::decode(&mut r)?;
        r.finish()?;
        Ok(v)
    }
}

/// Serde adapters that hex-armor elements inside JSON documents.
pub mod hex_serde {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserializer, Serializer};

    pub mod point {
        use super::*;

        pub fn serialize<T: CanonicalSerialize, S: Serializer>(p: &T, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&hex::encode(point_to_bytes(p)))
        }

        pub fn deserialize<'de, T: CanonicalDeserialize, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
            let text = String::deserialize(d)?;
            let bytes = hex::decode(text).map_err(D::Error::custom)?;
            point_from_bytes(&bytes).map_err(D::Error::custom)
        }
    }

    pub mod points {
        use super::*;

        pub fn serialize<T: CanonicalSerialize, S: Serializer>(ps: &[T], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(ps.iter().map(|p| hex::encode(point_to_bytes(p))))
        }

        pub fn deserialize<'de, T: CanonicalDeserialize, D: Deserializer<'de>>(d: D) -> Result<Vec<T>, D::Error> {
            Vec::<String>::deserialize(d)?
                .into_iter()
                .map(|text| {
                    let bytes = hex::decode(text).map_err(D::Error::custom)?;
                    point_from_bytes(&bytes).map_err(D::Error::custom)
                })
                .collect()
        }
    }

    pub mod scalar {
        use super::*;

        pub fn serialize<F: PrimeField, S: Serializer>(x: &F, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&hex::encode(scalar_to_bytes(x)))
        }

        pub fn deserialize<'de, F: PrimeField, D: Deserializer<'de>>(d: D) -> Result<F, D::Error> {
            let text = String::deserialize(d)?;
            let bytes = hex::decode(text).map_err(D::Error::custom)?;
            scalar_from_bytes(&bytes).map_err(D::Error::custom)
        }
    }

    pub mod scalars {
        use super::*;

        pub fn serialize<F: PrimeField, S: Serializer>(xs: &[F], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(xs.iter().map(|x| hex::encode(scalar_to_bytes(x))))
        }

        pub fn deserialize<'de, F: PrimeField, D: Deserializer<'de>>(d: D) -> Result<Vec<F>, D::Error> {
            Vec::<String>::deserialize(d)?
                .into_iter()
                .map(|text| {
                    let bytes = hex::decode(text).map_err(D::Error::custom)?;
                    scalar_from_bytes(&bytes).map_err(D::Error::custom)
                })
                .collect()
        }
    }

    /// Any [`Wire`] value as a single hex string.
    pub mod wire {
        use super::*;

        pub fn serialize<T: Wire, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&hex::encode(v.to_wire()))
        }

        pub fn deserialize<'de, T: Wire, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
            let text = String::deserialize(d)?;
            let bytes = hex::decode(text).map_err(D::Error::custom)?;
            T::from_wire(&bytes).map_err(D::Error::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::{random_element, seeded_rng};
    use ark_bls12_381::{Bls12_381, Fr, G1Affine, G2Affine};
    use ark_ff::UniformRand;
    use proptest::prelude::*;

    #[test]
    fn sizes_are_fixed_per_group() {
        let mut rng = seeded_rng(b"sizes");
        for _ in 0..20 {
            let p = random_element(G1Affine::generator(), &mut rng);
            let q = random_element(G2Affine::generator(), &mut rng);
            assert_eq!(point_to_bytes(&p).len(), 48);
            assert_eq!(point_to_bytes(&q).len(), 96);
            assert_eq!(scalar_to_bytes(&Fr::rand(&mut rng)).len(), 32);
        }
        assert_eq!(ElementCounts::new(1, 1, 0, 1).byte_len::<Bls12_381>(), 48 + 96 + 32);
        assert_eq!(ElementCounts::new(1, 1, 0, 1).byte_len::<ark_bn254::Bn254>(), 32 + 64 + 32);
    }

    #[test]
    fn corrupted_point_is_rejected() {
        let mut rng = seeded_rng(b"corrupt");
        let p = random_element(G1Affine::generator(), &mut rng);
        let mut bytes = point_to_bytes(&p);
        let mut rejected = 0;
        for i in 0..bytes.len() {
            bytes[i] ^= 0x5a;
            if point_from_bytes::<G1Affine>(&bytes).map(|q| q != p).unwrap_or(true) {
                rejected += 1;
            }
            bytes[i] ^= 0x5a;
        }
        assert_eq!(rejected, bytes.len());
        assert!(point_from_bytes::<G1Affine>(&bytes[..47]).is_err());
    }

    #[test]
    fn off_subgroup_point_is_rejected() {
        // A BLS12-381 G1 curve point outside the prime-order subgroup.
        let mut x = ark_bls12_381::Fq::from(1u64);
        let off = loop {
            if let Some(p) = G1Affine::get_point_from_x_unchecked(x, false) {
                if !p.is_in_correct_subgroup_assuming_on_curve() {
                    break p;
                }
            }
            x += ark_bls12_381::Fq::from(1u64);
        };
        let mut bytes = Vec::new();
        off.serialize_with_mode(&mut bytes, ark_serialize::Compress::Yes).unwrap();
        assert!(point_from_bytes::<G1Affine>(&bytes).is_err());
    }

    #[test]
    fn non_canonical_scalar_is_rejected() {
        assert!(scalar_from_bytes::<Fr>(&[0xff; 32]).is_err());
        assert!(scalar_from_bytes::<Fr>(&[0x00; 31]).is_err());
        let one = scalar_from_bytes::<Fr>(&{
            let mut b = [0u8; 32];
            b[31] = 1;
            b
        })
        .unwrap();
        assert_eq!(one, Fr::from(1u64));
    }

    #[test]
    fn counts_display_like_the_cost_table() {
        assert_eq!(ElementCounts::new(6, 7, 0, 0).to_string(), "6|G1| + 7|G2|");
        assert_eq!(ElementCounts::g2(2).to_string(), "2|G2|");
        assert_eq!(ElementCounts::zn(1).to_string(), "|Zn|");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scalar_round_trip(seed in any::<[u8; 32]>()) {
            let mut rng = seeded_rng(&seed);
            let x = Fr::rand(&mut rng);
            prop_assert_eq!(scalar_from_bytes::<Fr>(&scalar_to_bytes(&x)).unwrap(), x);
        }

        #[test]
        fn point_round_trip_and_injective(seed in any::<[u8; 32]>()) {
            let mut rng = seeded_rng(&seed);
            let p = random_element(G2Affine::generator(), &mut rng);
            let q = random_element(G2Affine::generator(), &mut rng);
            prop_assert_eq!(point_from_bytes::<G2Affine>(&point_to_bytes(&p)).unwrap(), p);
            prop_assert_eq!(p == q, point_to_bytes(&p) == point_to_bytes(&q));
        }
    }
}
