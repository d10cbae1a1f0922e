//! Deterministic scenario execution.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use spot_core::codec::{point_to_bytes, scalar_to_bytes, scalar_width, ElementCounts, Wire};
use spot_core::gsig::{self, GroupSecretKey, GroupVerifKey, PreparedVerifier, ProxyCredential};
use spot_core::pairing::{child_seed, seeded_rng, Scalar};
use spot_core::protocol::{
    choose_proxies, ha_keygen, ha_publish, p_sign, risk_score, s_keygen, set_ccm, set_user_id, user_keygen,
    verify_set, ContactEntry, EntryRejection, HaState, HealthStatus, IngestOutcome, ProtocolConfig, ProxyId,
    ProxyRoster, RiskScore, ServerState, UserState, VerifiedSet, SECONDS_PER_DAY,
};
use spot_core::{with_curve, PairingContext, SpotCurve};

use crate::scenario::Scenario;
use crate::SimError;

/// Execution switches for the two heavy algorithms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Per-equation threads in P_Sign and Sig_Verify.
    pub parallel: bool,
    /// Precomputed pairing lines for the CRS in Sig_Verify.
    pub preprocessed: bool,
}

/// One message between two parties.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub step: usize,
    pub time: u64,
    pub algorithm: String,
    pub from: String,
    pub to: String,
    pub counts: ElementCounts,
    /// Bytes taken by the group and field elements alone.
    pub element_bytes: usize,
    /// Bytes of the full encoding, framing included.
    pub wire_bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactStatus {
    Recorded { proxies: (ProxyId, ProxyId), ccm: String },
    Dropped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactOutcome {
    pub index: usize,
    pub epoch: u64,
    pub users: (usize, usize),
    pub status: ContactStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmissionOutcome {
    Refused { reason: String },
    Checked { entries: usize, rejected: Vec<(usize, EntryRejection)> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub user: usize,
    pub time: u64,
    pub infected: bool,
    pub outcome: SubmissionOutcome,
}

/// Everything a run produced, free of curve types.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub seed: String,
    pub security_level: u32,
    pub curve: String,
    pub options: RunOptions,
    pub transcript: Vec<Message>,
    pub contacts: Vec<ContactOutcome>,
    pub submissions: Vec<Submission>,
    pub published: Vec<String>,
    pub published_set_valid: bool,
    pub scores: Vec<RiskScore>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }
}

/// The entities' states after a run.
pub struct World<E: SpotCurve> {
    pub ctx: PairingContext<E>,
    pub cfg: ProtocolConfig,
    pub gsk: GroupSecretKey<E>,
    pub vk: GroupVerifKey<E>,
    pub proxies: Vec<ProxyCredential<E>>,
    pub server: ServerState<E>,
    pub ha: HaState<E>,
    pub users: Vec<UserState<E>>,
    pub published: Option<VerifiedSet<E>>,
}

struct Recorder {
    now: u64,
    log: Vec<Message>,
}

impl Recorder {
    fn push<E: SpotCurve>(&mut self, algorithm: &str, from: &str, to: &str, counts: ElementCounts, wire_bytes: usize) {
        self.log.push(Message {
            step: self.log.len(),
            time: self.now,
            algorithm: algorithm.into(),
            from: from.into(),
            to: to.into(),
            counts,
            element_bytes: counts.byte_len::<E>(),
            wire_bytes,
        });
    }

    fn wire<E: SpotCurve>(&mut self, algorithm: &str, from: &str, to: &str, value: &impl Wire) {
        self.push::<E>(algorithm, from, to, value.counts(), value.to_wire().len());
    }
}

fn user_name(i: usize) -> String {
    format!("user{i}")
}

fn proxy_name(p: ProxyId) -> String {
    format!("proxy{p}")
}

/// The roster seen during `epoch`: each subset rotated by the epoch number so
/// every proxy gets a turn at the head.
pub fn roster_for_epoch(roster: &ProxyRoster, epoch: u64) -> ProxyRoster {
    let rotate = |v: &[ProxyId]| {
        let mut v = v.to_vec();
        if !v.is_empty() {
            let k = (epoch % v.len() as u64) as usize;
            v.rotate_left(k);
        }
        v
    };
    ProxyRoster { primary: rotate(&roster.primary), secondary: rotate(&roster.secondary) }
}

enum Event {
    Contact(usize),
    Infection(usize),
}

/// Runs a scenario on the curve for its security level.
pub fn run_scenario(sc: &Scenario, opts: RunOptions) -> Result<Report, SimError> {
    let level = sc.level()?;
    with_curve!(level, E => run::<E>(sc, opts).map(|(report, _)| report))
}

pub fn run<E: SpotCurve>(sc: &Scenario, opts: RunOptions) -> Result<(Report, World<E>), SimError> {
    sc.validate()?;
    let level = sc.level()?;
    if level != E::LEVEL {
        return Err(SimError::Scenario(format!("scenario asks for {level}, run on {}", E::NAME)));
    }
    let mut seeds = seeded_rng(sc.seed.as_bytes());
    let ctx = PairingContext::<E>::setup(level, &child_seed(&mut seeds))?;
    let mut rng = ChaCha20Rng::from_seed(child_seed(&mut seeds));
    let cfg = sc.config.clone();
    let mut rec = Recorder { now: 0, log: Vec::new() };

    rec.push::<E>("Set_params", "authority", "all", ElementCounts::g1(1) + ElementCounts::g2(1), ctx.to_bytes().len());
    let (gsk, vk) = gsig::setup(&ctx, &mut rng);
    rec.wire::<E>("Setup_ProxyGr", "manager", "all", &vk);
    let mut proxies = Vec::new();
    for p in 0..sc.proxy_count() as ProxyId {
        let cred = gsig::join(&ctx, &gsk, &mut rng);
        rec.wire::<E>("Join_ProxyGr", &proxy_name(p), "manager", cred.pk_p());
        rec.wire::<E>("Join_ProxyGr", "manager", &proxy_name(p), &cred.sigma_p);
        proxies.push(cred);
    }
    let server = s_keygen(&ctx, &mut rng);
    rec.wire::<E>("S_Keygen", "server", "all", server.public_key());
    let mut ha = ha_keygen(&ctx, &mut rng);
    rec.push::<E>("HA_Keygen", "ha", "all", ha.public_key_counts(), point_to_bytes(&ha.pk).len());
    let mut users = Vec::new();
    for i in 0..sc.users {
        let record = set_user_id(&mut ha, &ctx, &mut rng);
        rec.push::<E>("Set_UserID", "ha", &user_name(i), ElementCounts::g2(1), point_to_bytes(&record.id).len());
        let u = user_keygen::<E, _>(record.id, &mut rng);
        ha.register_public_key(&u.id, u.pk)?;
        rec.push::<E>("Userkeygen", &user_name(i), "ha", ElementCounts::g2(1), point_to_bytes(&u.pk).len());
        users.push(u);
    }
    let mut world = World { ctx, cfg, gsk, vk, proxies, server, ha, users, published: None };
    let prepared = if opts.preprocessed { Some(PreparedVerifier::new(&world.vk)?) } else { None };

    let mut timeline: Vec<(u64, Event)> = Vec::new();
    for (i, c) in sc.contacts.iter().enumerate() {
        timeline.push((c.epoch * sc.epoch_secs, Event::Contact(i)));
    }
    for (i, inf) in sc.infections.iter().enumerate() {
        timeline.push((inf.day * SECONDS_PER_DAY, Event::Infection(i)));
    }
    timeline.sort_by_key(|(t, e)| (*t, matches!(e, Event::Infection(_))));

    let mut contacts = Vec::new();
    let mut submissions = Vec::new();
    for (now, event) in timeline {
        rec.now = now;
        world.server.purge_expired(&world.cfg, now);
        for u in &mut world.users {
            u.purge_expired(&world.cfg, now);
        }
        match event {
            Event::Contact(i) => {
                let status = contact(&mut world, &mut rec, &mut rng, sc, i, opts)?;
                let c = &sc.contacts[i];
                contacts.push(ContactOutcome { index: i, epoch: c.epoch, users: c.users, status });
            }
            Event::Infection(i) => {
                let user = sc.infections[i].user;
                let id = world.users[user].id;
                world.ha.set_status(&id, HealthStatus::Infected)?;
                submissions.push(submit(&mut world, &mut rec, user, opts, prepared.as_ref())?);
            }
        }
    }

    for user in 0..world.users.len() {
        let healthy = world.ha.user(&world.users[user].id).map(|r| r.status) == Some(HealthStatus::Healthy);
        if healthy {
            submissions.push(submit(&mut world, &mut rec, user, opts, prepared.as_ref())?);
        }
    }

    let vs = ha_publish(&mut world.ha, &world.ctx);
    let mut set_bytes = Vec::new();
    for c in &vs.ccms {
        set_bytes.extend(scalar_to_bytes(c));
    }
    rec.push::<E>(
        "Publish",
        "ha",
        "all",
        ElementCounts::zn(vs.ccms.len()) + ElementCounts::g1(1),
        set_bytes.len() + point_to_bytes(&vs.signature).len(),
    );
    let published_set_valid = verify_set(&world.ctx, &vs, &world.ha.pk);
    let scores = world
        .users
        .iter()
        .map(|u| risk_score(&world.ctx, u, &vs, &world.ha.pk, &world.cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let published = vs.ccms.iter().map(|c| hex::encode(scalar_to_bytes(c))).collect();
    world.published = Some(vs);

    let report = Report {
        seed: sc.seed.clone(),
        security_level: level.bits(),
        curve: E::NAME.into(),
        options: opts,
        transcript: rec.log,
        contacts,
        submissions,
        published,
        published_set_valid,
        scores,
    };
    Ok((report, world))
}

fn contact<E: SpotCurve>(
    world: &mut World<E>,
    rec: &mut Recorder,
    rng: &mut ChaCha20Rng,
    sc: &Scenario,
    index: usize,
    opts: RunOptions,
) -> Result<ContactStatus, SimError> {
    let c = &sc.contacts[index];
    let (a, b) = c.users;
    let da = world.users[a].ebid(c.epoch, rng);
    let db = world.users[b].ebid(c.epoch, rng);
    rec.push::<E>("Set_CCM", &user_name(a), &user_name(b), ElementCounts::default(), 16);
    rec.push::<E>("Set_CCM", &user_name(b), &user_name(a), ElementCounts::default(), 16);
    let ccm = set_ccm(&world.ctx, da, db);
    let (pa, pb) = match choose_proxies(da, db, &roster_for_epoch(&sc.proxies, c.epoch)) {
        Ok(p) => p,
        Err(e) => return Ok(ContactStatus::Dropped { reason: e.to_string() }),
    };
    let zn = ElementCounts::zn(1);
    let zn_bytes = scalar_to_bytes(&ccm).len();
    let mut ps = None;
    for (user, proxy) in [(a, pa), (b, pb)] {
        rec.push::<E>("Set_CCM", &user_name(user), &proxy_name(proxy), zn, zn_bytes);
        rec.push::<E>("Set_CCM", &proxy_name(proxy), "server", zn, zn_bytes);
        match world.server.ingest(&world.cfg, ccm, proxy, rec.now, rng) {
            IngestOutcome::Pending => {}
            IngestOutcome::Matched { ps: value, .. } => ps = Some(value),
            IngestOutcome::Rejected(r) => return Ok(ContactStatus::Dropped { reason: format!("server: {r:?}") }),
        }
    }
    let ps: Scalar<E> = ps.ok_or_else(|| SimError::Scenario("server did not match both copies".into()))?;
    for (user, proxy) in [(a, pa), (b, pb)] {
        rec.push::<E>("S_PSign", "server", &proxy_name(proxy), zn, zn_bytes);
        let id = world.users[user].id;
        let cred = &world.proxies[proxy as usize];
        let (_, out) = p_sign(&world.ctx, &world.vk, cred, id, ps, opts.parallel, rng)?;
        rec.push::<E>("P_Sign", &proxy_name(proxy), &user_name(user), out.full_counts(), {
            point_to_bytes(&out.m).len() + out.proof.to_wire().len()
        });
        let entry = ContactEntry { ccm, m: out.m, proof: out.proof, at: rec.now, duration: c.duration_secs };
        world.users[user].add_contact(entry);
    }
    Ok(ContactStatus::Recorded { proxies: (pa, pb), ccm: hex::encode(scalar_to_bytes(&ccm)) })
}

fn submit<E: SpotCurve>(
    world: &mut World<E>,
    rec: &mut Recorder,
    user: usize,
    opts: RunOptions,
    prepared: Option<&PreparedVerifier<E>>,
) -> Result<Submission, SimError> {
    let u = &world.users[user];
    let list = u.contacts().to_vec();
    let mut counts = ElementCounts::default();
    let mut bytes = 0;
    for e in &list {
        counts += ElementCounts::zn(1) + ElementCounts::g2(1) + e.proof.counts();
        bytes += scalar_to_bytes(&e.ccm).len() + point_to_bytes(&e.m).len() + e.proof.to_wire().len();
    }
    rec.push::<E>("Sig_Verify", &user_name(user), "ha", counts, bytes);
    let infected = world.ha.user(&u.id).map(|r| r.status) == Some(HealthStatus::Infected);
    let id = u.id;
    let outcome = match world.ha.verify_contact_list(&world.vk, &world.server, &id, list, opts.parallel, prepared) {
        Ok(v) => {
            let found = v
                .verdicts
                .iter()
                .filter(|r| matches!(r, Ok(()) | Err(EntryRejection::CcmMismatch)))
                .count();
            rec.push::<E>("CCM_Verify", "server", "ha", ElementCounts::zn(found), found * scalar_width::<Scalar<E>>());
            SubmissionOutcome::Checked { entries: v.verdicts.len(), rejected: v.rejected() }
        }
        Err(e) => SubmissionOutcome::Refused { reason: e.to_string() },
    };
    Ok(Submission { user, time: rec.now, infected, outcome })
}

/// Users that share a recorded contact with an infected user, where the
/// contact was still inside the retention window on the day of the report.
pub fn expected_exposed(sc: &Scenario, report: &Report) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for inf in &sc.infections {
        let reported_at = inf.day * SECONDS_PER_DAY;
        for c in &report.contacts {
            if !matches!(c.status, ContactStatus::Recorded { .. }) {
                continue;
            }
            let at = c.epoch * sc.epoch_secs;
            if at > reported_at || sc.config.expired(at, reported_at) {
                continue;
            }
            if c.users.0 == inf.user || c.users.1 == inf.user {
                out.insert(c.users.0);
                out.insert(c.users.1);
            }
        }
    }
    out
}
