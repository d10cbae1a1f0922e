//! Pairing-side verdicts against the same checks replayed in the exponent.

use ark_bn254::Bn254;
use ark_ec::pairing::Pairing;
use ark_ff::UniformRand;

use spot_core::csig::{SignsG1, SignsG2};
use spot_core::oracle::{Comparison, KnownExponentOracle};
use spot_core::pairing::{seeded_rng, Scalar, G1, G2};
use spot_core::{PairingContext, SecurityLevel};

type E = Bn254;

fn oracle() -> KnownExponentOracle<E> {
    KnownExponentOracle::new(&PairingContext::setup(SecurityLevel::Bits112, b"oracle").unwrap())
}

fn assert_all_agree(cmps: &[Comparison]) {
    for c in cmps {
        assert!(c.agrees(), "{c:?}");
    }
}

#[test]
fn csig_equations_agree() {
    let mut o = oracle();
    let mut rng = seeded_rng(b"csig");
    for k in [1, 2, 7] {
        for _ in 0..5 {
            let g2 = o.csig_instance::<SignsG2, _>(k, &mut rng);
            let g1 = o.csig_instance::<SignsG1, _>(k, &mut rng);
            assert_all_agree(&g2);
            assert_all_agree(&g1);
            assert!(g2[0].pairing && g2[1].pairing && !g2[2].pairing && !g2[3].pairing);
        }
    }
}

#[test]
fn xsig_chaining_agrees() {
    let mut o = oracle();
    let mut rng = seeded_rng(b"xsig");
    for _ in 0..10 {
        let cmps = o.xsig_instance(&mut rng);
        assert_all_agree(&cmps);
        assert!(cmps[0].pairing && !cmps[1].pairing);
    }
}

#[test]
fn niwi_equations_agree() {
    let mut o = oracle();
    let mut rng = seeded_rng(b"niwi");
    for _ in 0..20 {
        let cmps = o.niwi_instance(&mut rng);
        assert_all_agree(&cmps);
        assert!(cmps.iter().filter(|c| c.check == "niwi honest equation").all(|c| c.pairing));
        assert!(cmps.iter().any(|c| c.check == "niwi with perturbed proof pair" && !c.pairing));
    }
}

#[test]
fn pairing_matches_exponent_product() {
    let ctx = PairingContext::<E>::setup(SecurityLevel::Bits112, b"oracle").unwrap();
    let mut o = KnownExponentOracle::new(&ctx);
    let mut rng = seeded_rng(b"bilinear");
    for _ in 0..20 {
        let (a, b) = (Scalar::<E>::rand(&mut rng), Scalar::<E>::rand(&mut rng));
        let p: G1<E> = o.element(a);
        let q: G2<E> = o.element(b);
        let _ = o.record_gt(E::pairing(p, q), a * b);
    }
}

#[test]
#[should_panic(expected = "does not match")]
fn oracle_refuses_wrong_logs() {
    let mut o = oracle();
    let p: G1<E> = o.element(Scalar::<E>::from(5u64));
    let _ = o.record(p, Scalar::<E>::from(6u64));
}

#[test]
fn ccm_consistency_agrees() {
    let mut o = oracle();
    let mut rng = seeded_rng(b"ccm");
    for _ in 0..20 {
        let cmps = o.ccm_instance(&mut rng);
        assert_all_agree(&cmps);
        assert_eq!(cmps.iter().map(|c| c.pairing).collect::<Vec<_>>(), [true, false, false, false]);
    }
}
