//! Whole-protocol flows across the four entities.

use ark_bn254::Bn254;
use ark_ff::UniformRand;
use rand_chacha::ChaCha20Rng;

use spot_core::gsig::{self, GroupVerifKey, ProxyCredential};
use spot_core::pairing::{seeded_rng, Scalar};
use spot_core::protocol::*;
use spot_core::{Error, PairingContext, SecurityLevel};

type E = Bn254;

struct World {
    ctx: PairingContext<E>,
    rng: ChaCha20Rng,
    cfg: ProtocolConfig,
    vk: GroupVerifKey<E>,
    proxies: Vec<ProxyCredential<E>>,
    roster: ProxyRoster,
    server: ServerState<E>,
    ha: HaState<E>,
    users: Vec<UserState<E>>,
}

impl World {
    fn new(users: usize) -> Self {
        let ctx = PairingContext::setup(SecurityLevel::Bits112, b"flow").unwrap();
        let mut rng = seeded_rng(b"flow");
        let (gsk, vk) = gsig::setup(&ctx, &mut rng);
        let proxies = (0..2).map(|_| gsig::join(&ctx, &gsk, &mut rng)).collect();
        let server = s_keygen(&ctx, &mut rng);
        let mut ha = ha_keygen(&ctx, &mut rng);
        let users = (0..users)
            .map(|_| {
                let rec = set_user_id(&mut ha, &ctx, &mut rng);
                let u = user_keygen::<E, _>(rec.id, &mut rng);
                ha.register_public_key(&u.id, u.pk).unwrap();
                u
            })
            .collect();
        let roster = ProxyRoster { primary: vec![0], secondary: vec![1] };
        Self { ctx, rng, cfg: ProtocolConfig::default(), vk, proxies, roster, server, ha, users }
    }

    fn contact(&mut self, a: usize, b: usize, epoch: u64, now: u64, duration: u64) -> Scalar<E> {
        let da = self.users[a].ebid(epoch, &mut self.rng);
        let db = self.users[b].ebid(epoch, &mut self.rng);
        let ccm = set_ccm(&self.ctx, da, db);
        let (pa, pb) = choose_proxies(da, db, &self.roster).unwrap();
        assert_eq!(self.server.ingest(&self.cfg, ccm, pa, now, &mut self.rng), IngestOutcome::Pending);
        let IngestOutcome::Matched { ps, .. } = self.server.ingest(&self.cfg, ccm, pb, now, &mut self.rng) else {
            panic!("copies from two proxies should match");
        };
        for (user, proxy) in [(a, pa), (b, pb)] {
            let id = self.users[user].id;
            let cred = &self.proxies[proxy as usize];
            let (_, out) = p_sign(&self.ctx, &self.vk, cred, id, ps, false, &mut self.rng).unwrap();
            self.users[user].add_contact(ContactEntry { ccm, m: out.m, proof: out.proof, at: now, duration });
        }
        ccm
    }

    fn infect(&mut self, user: usize) {
        self.ha.set_status(&self.users[user].id, HealthStatus::Infected).unwrap();
    }

    fn submit(&mut self, user: usize) -> spot_core::Result<ContactListVerdict> {
        let u = &self.users[user];
        self.ha.verify_contact_list(&self.vk, &self.server, &u.id, u.contacts().to_vec(), false, None)
    }
}

#[test]
fn honest_contacts_reach_exposed_users_only() {
    let mut w = World::new(3);
    w.contact(0, 1, 0, 100, 1200);
    w.contact(1, 2, 1, 1000, 300);
    w.infect(0);
    assert_eq!(w.submit(1), Err(Error::UserNotInfected));
    let verdict = w.submit(0).unwrap();
    assert!(verdict.all_accepted());
    assert_eq!(verdict.accepted(), 1);
    let vs = ha_publish(&mut w.ha, &w.ctx);
    assert!(verify_set(&w.ctx, &vs, &w.ha.pk));
    let scores: Vec<RiskScore> =
        w.users.iter().map(|u| risk_score(&w.ctx, u, &vs, &w.ha.pk, &w.cfg).unwrap()).collect();
    assert_eq!(scores[0].score, 2);
    assert_eq!(scores[1].score, 2);
    assert!(scores[1].exposed);
    assert_eq!(scores[2].score, 0);

    let mut tampered = vs.clone();
    tampered.ccms.clear();
    assert_eq!(risk_score(&w.ctx, &w.users[2], &tampered, &w.ha.pk, &w.cfg), Err(Error::InvalidSetSignature));
}

#[test]
fn unknown_user_is_refused() {
    let mut w = World::new(1);
    let g2 = w.ctx.g2();
    let r = w.ha.verify_contact_list(&w.vk, &w.server, &g2, Vec::new(), false, None);
    assert_eq!(r, Err(Error::UnknownUser));
}

#[test]
fn forged_server_signatures_fail_the_ccm_check() {
    let mut w = World::new(2);
    let ccm = w.contact(0, 1, 0, 0, 60);
    w.infect(0);
    let access = w.ha.server_access();
    let ps_prime = w.server.fetch_ps_prime(&ccm, &access).unwrap();
    let t_u = w.ha.user(&w.users[0].id).unwrap().t_u;
    let pk_s = w.server.public_key().clone();
    let mut observed = Vec::new();
    for _ in 1..6 {
        let c = Scalar::<E>::rand(&mut w.rng);
        observed.push(w.server.s_psign(c, &mut w.rng).ps);
    }
    let id = w.users[0].id;
    for i in 0..100 {
        let ps = if i % 2 == 0 {
            Scalar::<E>::rand(&mut w.rng)
        } else {
            observed[i % observed.len()] + observed[(i / 2) % observed.len()]
        };
        let m = spot_core::pairing::pow(id, ps);
        assert!(!ccm_verify(&m, ps_prime, &pk_s, t_u), "trial {i}");
    }

    // A forged PS wrapped in a valid group signature is caught at the last check.
    let forged = Scalar::<E>::rand(&mut w.rng);
    let (_, out) = p_sign(&w.ctx, &w.vk, &w.proxies[0], id, forged, false, &mut w.rng).unwrap();
    let entry = ContactEntry { ccm, m: out.m, proof: out.proof, at: 0, duration: 60 };
    let verdict = w.ha.verify_contact_list(&w.vk, &w.server, &id, vec![entry], false, None).unwrap();
    assert_eq!(verdict.rejected(), [(0, EntryRejection::CcmMismatch)]);
}

#[test]
fn replay_after_retention_is_rejected() {
    let mut w = World::new(2);
    w.contact(0, 1, 0, 0, 60);
    w.infect(0);
    assert!(w.submit(0).unwrap().all_accepted());
    let day = SECONDS_PER_DAY;
    let later = (w.cfg.retention_days + 1) * day;
    w.server.purge_expired(&w.cfg, later);
    assert_eq!(w.submit(0).unwrap().rejected(), [(0, EntryRejection::NoServerRecord)]);

    w.users[0].purge_expired(&w.cfg, later);
    assert!(w.users[0].contacts().is_empty());
}

#[test]
fn tampered_entries_fail_the_group_signature_check() {
    let mut w = World::new(2);
    w.contact(0, 1, 0, 0, 60);
    w.contact(0, 1, 1, 600, 60);
    w.infect(1);
    let mut cl = w.users[1].contacts().to_vec();
    cl[0].m = spot_core::pairing::pow(cl[0].m, Scalar::<E>::from(2u64));
    let id = w.users[1].id;
    let verdict = w.ha.verify_contact_list(&w.vk, &w.server, &id, cl, false, None).unwrap();
    assert_eq!(verdict.rejected(), [(0, EntryRejection::InvalidGroupSignature)]);
    assert_eq!(verdict.accepted(), 1);
}

#[test]
fn duplicates_within_retention_are_dropped() {
    let mut w = World::new(2);
    let ccm = w.contact(0, 1, 0, 0, 60);
    assert_eq!(
        w.server.ingest(&w.cfg, ccm, 0, 30, &mut w.rng),
        IngestOutcome::Rejected(IngestRejection::Duplicate)
    );
}

#[test]
fn a_fixed_pair_never_repeats_a_ccm() {
    let mut w = World::new(2);
    let mut seen = std::collections::HashSet::new();
    for epoch in 0..100 {
        let a = w.users[0].ebid(epoch, &mut w.rng);
        let b = w.users[1].ebid(epoch, &mut w.rng);
        assert!(seen.insert(spot_core::codec::scalar_to_bytes(&set_ccm(&w.ctx, a, b))));
    }
}

#[test]
fn states_survive_snapshots() {
    let mut w = World::new(2);
    w.contact(0, 1, 0, 0, 60);
    let env = to_envelope::<E, _>("server", &w.server).unwrap();
    let text = serde_json::to_string_pretty(&env).unwrap();
    let back: Envelope = serde_json::from_str(&text).unwrap();
    assert_eq!(from_envelope::<E, ServerState<E>>("server", &back).unwrap(), w.server);
    let env = to_envelope::<E, _>("user", &w.users[0]).unwrap();
    assert_eq!(from_envelope::<E, UserState<E>>("user", &env).unwrap(), w.users[0]);
    let env = to_envelope::<E, _>("ha", &w.ha).unwrap();
    assert_eq!(from_envelope::<E, HaState<E>>("ha", &env).unwrap(), w.ha);
}
