//! Discrete-log bookkeeping for tests.
//!
//! Every point a test creates is recorded together with its logarithm to the
//! standard generator of its group. Recording asserts `P = g^k`, so the table
//! can never hold a wrong entry. Pairing equations can then be re-evaluated as
//! scalar identities mod n and compared with the pairing-side verdict.

use std::collections::HashMap;

use ark_ec::pairing::PairingOutput;
use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{One, UniformRand, Zero};
use ark_serialize::CanonicalSerialize;
use rand::{CryptoRng, Rng, RngCore};

use crate::csig::{
    self, CsigPublicKey, CsigSecretKey, CsigSignature, KeyExponents, Orientation, SignNonces, SignsG1, SignsG2,
};
use crate::niwi::{self, CommitRandomness, EquationProof, NiwiCrs, NiwiProof, NiwiWitness, PairingProductEquation};
use crate::pairing::{pow, random_nonzero, PairingContext, Scalar, SpotCurve, G1, G2};
use crate::protocol::{ccm_verify, ServerPublicKey};
use crate::xsig::{self, XsigKeyPair, XsigPublicKey, XsigSignature};

pub struct KnownExponentOracle<E: SpotCurve> {
    ctx: PairingContext<E>,
    logs: HashMap<Vec<u8>, Scalar<E>>,
}

fn key<T: CanonicalSerialize>(tag: u8, p: &T) -> Vec<u8> {
    let mut out = vec![tag];
    p.serialize_compressed(&mut out).expect("in-memory write");
    out
}

/// Group tag derived from the encoded width, which differs between G1, G2 and G3.
fn tag_of<T: CanonicalSerialize>(p: &T) -> u8 {
    (p.compressed_size() % 251) as u8
}

impl<E: SpotCurve> KnownExponentOracle<E> {
    pub fn new(ctx: &PairingContext<E>) -> Self {
        assert_eq!(ctx.g1(), G1::<E>::generator(), "oracle assumes the standard generators");
        assert_eq!(ctx.g2(), G2::<E>::generator(), "oracle assumes the standard generators");
        Self { ctx: ctx.clone(), logs: HashMap::new() }
    }

    /// Records `p` with log `k`. Panics unless `p = g^k`.
    pub fn record<A: AffineRepr<ScalarField = Scalar<E>>>(&mut self, p: A, k: Scalar<E>) -> A {
        assert_eq!(p, (A::generator() * k).into(), "recorded point does not match its exponent");
        self.logs.insert(key(tag_of(&p), &p), k);
        p
    }

    /// `g^k`, recorded.
    pub fn element<A: AffineRepr<ScalarField = Scalar<E>>>(&mut self, k: Scalar<E>) -> A {
        let p = (A::generator() * k).into();
        self.record(p, k)
    }

    /// Panics if `p` was never recorded.
    pub fn log<A: AffineRepr<ScalarField = Scalar<E>>>(&self, p: &A) -> Scalar<E> {
        if p.is_zero() {
            return Scalar::<E>::zero();
        }
        *self.logs.get(&key(tag_of(p), p)).expect("point was not recorded by the oracle")
    }

    pub fn record_gt(&mut self, t: PairingOutput<E>, k: Scalar<E>) -> PairingOutput<E> {
        assert_eq!(t, self.ctx.gt() * k, "recorded target does not match its exponent");
        self.logs.insert(key(0, &t), k);
        t
    }

    pub fn log_gt(&self, t: &PairingOutput<E>) -> Scalar<E> {
        if t.is_zero() {
            return Scalar::<E>::zero();
        }
        *self.logs.get(&key(0, t)).expect("target was not recorded by the oracle")
    }

    /// Builds and records a CSIG key from its exponents.
    pub fn csig_key<O: Orientation<E>>(&mut self, exps: &KeyExponents<Scalar<E>>) -> CsigSecretKey<E, O> {
        let sk = CsigSecretKey::<E, O>::from_exponents(&self.ctx, exps);
        let pk = &sk.pk;
        self.record(pk.gr, exps.gr_log);
        self.record(pk.hu, exps.hu_log);
        self.record(pk.gz, exps.gr_log * exps.gamma_z);
        self.record(pk.hz, exps.hu_log * exps.delta_z);
        self.record(pk.a_pub, exps.alpha);
        self.record(pk.b_pub, exps.beta);
        for ((g, h), (gamma, delta)) in pk.msg_bases.iter().zip(exps.gammas.iter().zip(&exps.deltas)) {
            self.record(*g, exps.gr_log * gamma);
            self.record(*h, exps.hu_log * delta);
        }
        sk
    }

    /// Signs with known nonces and records every signature component, whose
    /// logs are computed here from the signing formulas.
    pub fn csig_sign<O: Orientation<E>>(
        &mut self,
        sk: &CsigSecretKey<E, O>,
        exps: &KeyExponents<Scalar<E>>,
        msg: &[O::Msg],
        n: &SignNonces<Scalar<E>>,
    ) -> CsigSignature<E, O> {
        let sig = csig::sign_with_nonces(&self.ctx, sk, msg, n).expect("message length matches the key");
        let m: Vec<Scalar<E>> = msg.iter().map(|p| self.log(p)).collect();
        let sum = |coeffs: &[Scalar<E>]| -> Scalar<E> { coeffs.iter().zip(&m).map(|(c, x)| *c * x).sum() };
        self.record(sig.z, n.zeta);
        self.record(sig.r, exps.alpha - n.rho * n.tau - exps.gamma_z * n.zeta - sum(&exps.gammas));
        self.record(sig.s, exps.gr_log * n.rho);
        self.record(sig.t, n.tau);
        self.record(sig.u, exps.beta - n.phi * n.omega - exps.delta_z * n.zeta - sum(&exps.deltas));
        self.record(sig.v, exps.hu_log * n.phi);
        self.record(sig.w, n.omega);
        sig
    }

    /// The first verification equation evaluated in the exponent.
    pub fn csig_first<O: Orientation<E>>(&self, pk: &CsigPublicKey<E, O>, msg: &[O::Msg], sig: &CsigSignature<E, O>) -> bool {
        let mut lhs = self.log(&pk.gz) * self.log(&sig.z)
            + self.log(&pk.gr) * self.log(&sig.r)
            + self.log(&sig.s) * self.log(&sig.t);
        for ((g, _), m) in pk.msg_bases.iter().zip(msg) {
            lhs += self.log(g) * self.log(m);
        }
        lhs == self.log(&pk.gr) * self.log(&pk.a_pub)
    }

    /// The second verification equation evaluated in the exponent.
    pub fn csig_second<O: Orientation<E>>(&self, pk: &CsigPublicKey<E, O>, msg: &[O::Msg], sig: &CsigSignature<E, O>) -> bool {
        let mut lhs = self.log(&pk.hz) * self.log(&sig.z)
            + self.log(&pk.hu) * self.log(&sig.u)
            + self.log(&sig.v) * self.log(&sig.w);
        for ((_, h), m) in pk.msg_bases.iter().zip(msg) {
            lhs += self.log(h) * self.log(m);
        }
        lhs == self.log(&pk.hu) * self.log(&pk.b_pub)
    }

    pub fn csig_verdict<O: Orientation<E>>(&self, pk: &CsigPublicKey<E, O>, msg: &[O::Msg], sig: &CsigSignature<E, O>) -> bool {
        self.csig_first(pk, msg, sig) && self.csig_second(pk, msg, sig)
    }

    /// Both inner verifications, with `σ2.s` appended to the G1 message.
    pub fn xsig_verdict(&self, pk: &XsigPublicKey<E>, m_g1: &[G1<E>], m_g2: &[G2<E>], sig: &XsigSignature<E>) -> bool {
        let mut chained = m_g1.to_vec();
        chained.push(sig.sigma2.s);
        self.csig_verdict(&pk.pk2, m_g2, &sig.sigma2) && self.csig_verdict(&pk.pk1, &chained, &sig.sigma1)
    }

    /// Records commitments and proof pairs with logs computed from the
    /// witness, the randomness and the proving formulas.
    pub fn record_niwi_proof(
        &mut self,
        crs: &NiwiCrs<E>,
        eqs: &[PairingProductEquation<E>],
        w: &NiwiWitness<E>,
        rand: &CommitRandomness<Scalar<E>>,
        proof: &NiwiProof<E>,
    ) {
        let (u, v) = (self.log(&crs.u), self.log(&crs.v));
        for (name, c) in &proof.c {
            self.record(*c, self.log(&w.x[name]) + rand.r[name] * u);
        }
        for (name, d) in &proof.d {
            self.record(*d, self.log(&w.y[name]) + rand.s[name] * v);
        }
        for (eq, ep) in eqs.iter().zip(&proof.equations) {
            let r: Vec<Scalar<E>> = eq.x_vars().iter().map(|n| rand.r[n]).collect();
            let s: Vec<Scalar<E>> = eq.y_vars().iter().map(|n| rand.s[n]).collect();
            let x: Vec<Scalar<E>> = eq.x_vars().iter().map(|n| self.log(&w.x[n])).collect();
            let y: Vec<Scalar<E>> = eq.y_vars().iter().map(|n| self.log(&w.y[n])).collect();
            let a: Vec<Scalar<E>> = eq.a().iter().map(|p| self.log(p)).collect();
            let b: Vec<Scalar<E>> = eq.b().iter().map(|p| self.log(p)).collect();
            let g = eq.gamma();
            let mut pi = Scalar::<E>::zero();
            let mut theta = Scalar::<E>::zero();
            for i in 0..x.len() {
                pi += r[i] * b[i];
                for j in 0..y.len() {
                    pi += r[i] * g[i][j] * (y[j] + s[j] * v);
                    theta += g[i][j] * s[j] * x[i];
                }
            }
            for j in 0..y.len() {
                theta += s[j] * a[j];
            }
            self.record(ep.pi, pi);
            self.record(ep.theta, theta);
        }
    }

    /// `Σ a_j d_j + Σ c_i b_i + Σ c_i Γ_ij d_j = τ + u·π + θ·v` in the exponent.
    pub fn niwi_equation(
        &self,
        crs: &NiwiCrs<E>,
        eq: &PairingProductEquation<E>,
        proof: &NiwiProof<E>,
        ep: &EquationProof<E>,
    ) -> bool {
        let c: Vec<Scalar<E>> = eq.x_vars().iter().map(|n| self.log(&proof.c[n])).collect();
        let d: Vec<Scalar<E>> = eq.y_vars().iter().map(|n| self.log(&proof.d[n])).collect();
        let mut lhs = Scalar::<E>::zero();
        for (a, dj) in eq.a().iter().zip(&d) {
            lhs += self.log(a) * dj;
        }
        for (ci, b) in c.iter().zip(eq.b()) {
            lhs += *ci * self.log(b);
        }
        for (i, ci) in c.iter().enumerate() {
            for (j, dj) in d.iter().enumerate() {
                lhs += *ci * eq.gamma()[i][j] * dj;
            }
        }
        lhs == self.log_gt(&eq.target()) + self.log(&crs.u) * self.log(&ep.pi) + self.log(&ep.theta) * self.log(&crs.v)
    }

    pub fn niwi_verdicts(&self, crs: &NiwiCrs<E>, eqs: &[PairingProductEquation<E>], proof: &NiwiProof<E>) -> Vec<bool> {
        eqs.iter().zip(&proof.equations).map(|(eq, ep)| self.niwi_equation(crs, eq, proof, ep)).collect()
    }

    /// `M = Y1^{t·PS′} Y2^{t}` in the exponent.
    pub fn ccm_verdict(&self, m: &G2<E>, ps_prime: Scalar<E>, y1: &G2<E>, y2: &G2<E>, t_u: Scalar<E>) -> bool {
        self.log(m) == t_u * ps_prime * self.log(y1) + t_u * self.log(y2)
    }
}

/// One pairing-side verdict next to its exponent-side counterpart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub check: &'static str,
    pub pairing: bool,
    pub exponent: bool,
}

impl Comparison {
    pub fn agrees(&self) -> bool {
        self.pairing == self.exponent
    }
}

fn bump<A: AffineRepr>(p: A) -> A {
    (p + A::generator()).into_affine()
}

impl<E: SpotCurve> KnownExponentOracle<E> {
    /// Replaces `p` by `p·g` and records the new log.
    pub fn perturb<A: AffineRepr<ScalarField = Scalar<E>>>(&mut self, p: A) -> A {
        let k = self.log(&p) + Scalar::<E>::one();
        self.record(bump(p), k)
    }

    /// A random key, message and signature; both equations on the honest
    /// signature, then full verdicts with `z` and with one message element
    /// perturbed.
    pub fn csig_instance<O: Orientation<E>, R: RngCore + CryptoRng>(&mut self, k: usize, rng: &mut R) -> Vec<Comparison> {
        let exps = KeyExponents::random(k, rng);
        let sk = self.csig_key::<O>(&exps);
        let msg: Vec<O::Msg> = (0..k).map(|_| self.element(Scalar::<E>::rand(rng))).collect();
        let sig = self.csig_sign(&sk, &exps, &msg, &SignNonces::random(rng));
        let pk = &sk.pk;
        let mut out = vec![
            Comparison {
                check: "csig first equation",
                pairing: csig::first_equation_holds(pk, &msg, &sig),
                exponent: self.csig_first(pk, &msg, &sig),
            },
            Comparison {
                check: "csig second equation",
                pairing: csig::second_equation_holds(pk, &msg, &sig),
                exponent: self.csig_second(pk, &msg, &sig),
            },
        ];
        let mut bad = sig.clone();
        bad.z = self.perturb(bad.z);
        out.push(Comparison {
            check: "csig with perturbed z",
            pairing: csig::verify(pk, &msg, &bad).expect("shape"),
            exponent: self.csig_verdict(pk, &msg, &bad),
        });
        if k > 0 {
            let mut bad_msg = msg.clone();
            let i = rng.gen_range(0..k);
            bad_msg[i] = self.perturb(bad_msg[i]);
            out.push(Comparison {
                check: "csig with perturbed message",
                pairing: csig::verify(pk, &bad_msg, &sig).expect("shape"),
                exponent: self.csig_verdict(pk, &bad_msg, &sig),
            });
        }
        out
    }

    /// A `(6, 2)` XSIG signature, honest and with the chained element replaced.
    pub fn xsig_instance<R: RngCore + CryptoRng>(&mut self, rng: &mut R) -> Vec<Comparison> {
        let e1 = KeyExponents::random(7, rng);
        let e2 = KeyExponents::random(2, rng);
        let kp = XsigKeyPair { sk1: self.csig_key::<SignsG1>(&e1), sk2: self.csig_key::<SignsG2>(&e2) };
        let m1: Vec<G1<E>> = (0..6).map(|_| self.element(Scalar::<E>::rand(rng))).collect();
        let m2: Vec<G2<E>> = (0..2).map(|_| self.element(Scalar::<E>::rand(rng))).collect();
        let sigma2 = self.csig_sign(&kp.sk2, &e2, &m2, &SignNonces::random(rng));
        let chained = xsig::chain(&m1, &sigma2);
        let sigma1 = self.csig_sign(&kp.sk1, &e1, &chained, &SignNonces::random(rng));
        let sig = XsigSignature { sigma1, sigma2 };
        let pk = kp.public_key();
        let mut bad = sig.clone();
        bad.sigma2.s = self.perturb(bad.sigma2.s);
        vec![
            Comparison {
                check: "xsig honest",
                pairing: xsig::verify(&pk, &m1, &m2, &sig).expect("shape"),
                exponent: self.xsig_verdict(&pk, &m1, &m2, &sig),
            },
            Comparison {
                check: "xsig with replaced chained element",
                pairing: xsig::verify(&pk, &m1, &m2, &bad).expect("shape"),
                exponent: self.xsig_verdict(&pk, &m1, &m2, &bad),
            },
        ]
    }

    /// A random satisfiable system with up to four equations over at most four
    /// G1 and four G2 variables, proven and then perturbed.
    pub fn niwi_instance<R: RngCore + CryptoRng>(&mut self, rng: &mut R) -> Vec<Comparison> {
        let (u, v) = (random_nonzero(rng), random_nonzero(rng));
        let crs = NiwiCrs::from_exponents(&self.ctx, u, v);
        self.record(crs.u, u);
        self.record(crs.v, v);

        let k = rng.gen_range(1..=4);
        let l = rng.gen_range(1..=4);
        let mut w = NiwiWitness::new();
        let xs: Vec<String> = (0..k).map(|i| format!("x{i}")).collect();
        let ys: Vec<String> = (0..l).map(|j| format!("y{j}")).collect();
        let mut xl = Vec::new();
        let mut yl = Vec::new();
        for n in &xs {
            let e = Scalar::<E>::rand(rng);
            w.set_x(n, self.element(e));
            xl.push(e);
        }
        for n in &ys {
            let e = Scalar::<E>::rand(rng);
            w.set_y(n, self.element(e));
            yl.push(e);
        }
        let mut eqs = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let a_logs: Vec<Scalar<E>> = (0..l).map(|_| Scalar::<E>::rand(rng)).collect();
            let b_logs: Vec<Scalar<E>> = (0..k).map(|_| Scalar::<E>::rand(rng)).collect();
            let gamma: Vec<Vec<Scalar<E>>> =
                (0..k).map(|_| (0..l).map(|_| Scalar::<E>::rand(rng)).collect()).collect();
            let mut tau = Scalar::<E>::zero();
            for j in 0..l {
                tau += a_logs[j] * yl[j];
            }
            for i in 0..k {
                tau += xl[i] * b_logs[i];
                for j in 0..l {
                    tau += xl[i] * gamma[i][j] * yl[j];
                }
            }
            let a = a_logs.iter().map(|e| self.element(*e)).collect();
            let b = b_logs.iter().map(|e| self.element(*e)).collect();
            let target = self.record_gt(self.ctx.gt() * tau, tau);
            eqs.push(
                PairingProductEquation::from_dense(xs.clone(), ys.clone(), a, b, gamma, target).expect("dense shape"),
            );
        }
        let rand = CommitRandomness::random(&eqs, rng);
        let proof = niwi::prove_with_randomness(&crs, &eqs, &w, &rand, false).expect("satisfiable");
        self.record_niwi_proof(&crs, &eqs, &w, &rand, &proof);

        let mut out = Vec::new();
        let pairing = niwi::verify_each(&crs, &eqs, &proof, false, None).expect("shape");
        for (p, e) in pairing.into_iter().zip(self.niwi_verdicts(&crs, &eqs, &proof)) {
            out.push(Comparison { check: "niwi honest equation", pairing: p, exponent: e });
        }

        let mut bad = proof.clone();
        let i = rng.gen_range(0..bad.equations.len());
        if rng.gen_bool(0.5) {
            bad.equations[i].pi = self.perturb(bad.equations[i].pi);
        } else {
            bad.equations[i].theta = self.perturb(bad.equations[i].theta);
        }
        let pairing = niwi::verify_each(&crs, &eqs, &bad, false, None).expect("shape");
        for (p, e) in pairing.into_iter().zip(self.niwi_verdicts(&crs, &eqs, &bad)) {
            out.push(Comparison { check: "niwi with perturbed proof pair", pairing: p, exponent: e });
        }

        let mut bad = proof;
        let name = xs[rng.gen_range(0..k)].clone();
        let c = bad.c[&name];
        bad.c.insert(name, self.perturb(c));
        let pairing = niwi::verify_each(&crs, &eqs, &bad, false, None).expect("shape");
        for (p, e) in pairing.into_iter().zip(self.niwi_verdicts(&crs, &eqs, &bad)) {
            out.push(Comparison { check: "niwi with perturbed commitment", pairing: p, exponent: e });
        }
        out
    }

    /// The CCM consistency check on an honest pipeline, with the wrong user
    /// secret, and with a `PS` forged from other sessions.
    pub fn ccm_instance<R: RngCore + CryptoRng>(&mut self, rng: &mut R) -> Vec<Comparison> {
        let (y1, y2) = (random_nonzero::<Scalar<E>, _>(rng), random_nonzero::<Scalar<E>, _>(rng));
        let pk = ServerPublicKey::<E> { y1: self.element(y1), y2: self.element(y2) };
        let t_u = random_nonzero::<Scalar<E>, _>(rng);
        let id: G2<E> = self.element(t_u);
        let session = |rng: &mut R| {
            let ccm = Scalar::<E>::rand(rng);
            let r_s = random_nonzero::<Scalar<E>, _>(rng);
            (ccm * y1 * r_s + y2, ccm * r_s)
        };
        let (ps, ps_prime) = session(rng);
        let (ps_a, _) = session(rng);
        let (ps_b, _) = session(rng);
        let m = self.record(pow(id, ps), t_u * ps);
        let wrong_t = t_u + Scalar::<E>::one();
        let forged = self.record(pow(id, ps_a + ps_b), t_u * (ps_a + ps_b));
        let random = Scalar::<E>::rand(rng);
        let guessed = self.record(pow(id, random), t_u * random);
        let mut out = Vec::new();
        for (check, m, t) in [
            ("ccm honest", m, t_u),
            ("ccm with wrong user secret", m, wrong_t),
            ("ccm with combined PS", forged, t_u),
            ("ccm with random PS", guessed, t_u),
        ] {
            out.push(Comparison {
                check,
                pairing: ccm_verify(&m, ps_prime, &pk, t),
                exponent: self.ccm_verdict(&m, ps_prime, &pk.y1, &pk.y2, t),
            });
        }
        out
    }
}
