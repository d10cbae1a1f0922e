use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use spot_core::gsig::{self, ProxyCredential};
use spot_core::protocol::{
    choose_proxies, ha_keygen, ha_publish, p_sign, risk_score, s_keygen, set_ccm, set_user_id, user_keygen,
    ContactEntry, HaState, HealthStatus, IngestOutcome, ProtocolConfig, ServerState, UserState, VerifiedSet,
    SECONDS_PER_DAY,
};
use spot_core::{with_curve, SecurityLevel, SpotCurve};
use spot_sim::bench::{run_bench, BenchOptions, Variant};
use spot_sim::engine::{run_scenario, RunOptions, SubmissionOutcome};
use spot_sim::store::{check_name, Hex, Manager, Params, Proxies, Store};
use spot_sim::{Scenario, SimError};

#[derive(Parser)]
#[command(name = "spot", version, about = "Secure proximity tracing: protocol simulator and benchmarks")]
struct Cli {
    /// Working directory holding the entities' state.
    #[arg(long, global = true, default_value = ".")]
    dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Subset {
    Primary,
    Secondary,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Baseline,
    Multithreaded,
    Preprocessed,
    Combined,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Baseline => Variant::Baseline,
            VariantArg::Multithreaded => Variant::Multithreaded,
            VariantArg::Preprocessed => Variant::Preprocessed,
            VariantArg::Combined => Variant::Combined,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Create the public parameters.
    Init {
        #[arg(long, default_value_t = 112)]
        level: u32,
        #[arg(long, default_value = "spot")]
        seed: String,
        /// JSON protocol configuration; missing keys take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Replace existing parameters.
        #[arg(long)]
        force: bool,
    },
    /// Generate the group manager, server and health authority keys.
    Keygen,
    /// Issue a credential to a new proxy.
    JoinProxy {
        #[arg(long, value_enum, default_value = "primary")]
        subset: Subset,
    },
    /// Register a user with the health authority and create their keys.
    RegisterUser { name: String },
    /// Record a contact between two registered users.
    Contact {
        a: String,
        b: String,
        #[arg(long, default_value_t = 900)]
        duration: u64,
    },
    /// Move the simulated clock forward and purge expired records.
    Advance {
        #[arg(long, default_value_t = 0)]
        days: u64,
        #[arg(long, default_value_t = 0)]
        secs: u64,
    },
    /// Run a scenario file and write its transcript.
    Simulate {
        scenario: PathBuf,
        /// Report path; defaults to report.json in the working directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        preprocessed: bool,
    },
    /// Mark a user as infected.
    DeclareInfected { user: String },
    /// Check a user's contact list at the health authority.
    Verify {
        user: String,
        #[arg(long)]
        parallel: bool,
    },
    /// Sign and publish the verified contact set.
    Publish,
    /// Score a user's exposure against the last published set.
    Risk { user: String },
    /// Time the protocol algorithms.
    Bench {
        #[arg(long, default_value_t = 112)]
        level: u32,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        /// Restrict to these algorithms (repeatable).
        #[arg(long = "algorithm")]
        algorithms: Vec<String>,
        /// Variants for P_Sign and Sig_Verify (repeatable); all by default.
        #[arg(long = "variant", value_enum)]
        variants: Vec<VariantArg>,
        /// JSON report path; defaults to bench.json in the working directory.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

enum Failure {
    Verification(String),
    Sim(SimError),
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Failure::Sim(e)
    }
}

impl From<spot_core::Error> for Failure {
    fn from(e: spot_core::Error) -> Self {
        Failure::Sim(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn exit_code(f: &Failure) -> u8 {
    use spot_core::Error as P;
    match f {
        Failure::Verification(_) => 1,
        Failure::Sim(SimError::MissingState(_)) => 3,
        Failure::Sim(SimError::Io { source, .. }) if source.kind() == std::io::ErrorKind::NotFound => 3,
        Failure::Sim(SimError::Protocol(P::UnknownUser)) => 3,
        Failure::Sim(SimError::Protocol(P::UserNotInfected | P::InvalidSetSignature)) => 1,
        Failure::Sim(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let store = Store::new(&cli.dir);
    match dispatch(&store, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Verification(msg) => eprintln!("verification failed: {msg}"),
                Failure::Sim(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(exit_code(&f))
        }
    }
}

fn dispatch(store: &Store, command: Command) -> Outcome {
    match command {
        Command::Init { level, seed, config, force } => init(store, level, &seed, config, force),
        Command::Simulate { scenario, out, parallel, preprocessed } => {
            simulate(store, &scenario, out, RunOptions { parallel, preprocessed })
        }
        Command::Bench { level, runs, algorithms, variants, json } => bench(store, level, runs, algorithms, variants, json),
        other => {
            let mut params = store.params()?;
            let level = params.level()?;
            with_curve!(level, E => stateful::<E>(store, &mut params, other))?;
            store.save_params(&params)?;
            Ok(())
        }
    }
}

fn init(store: &Store, level: u32, seed: &str, config: Option<PathBuf>, force: bool) -> Outcome {
    let level = SecurityLevel::from_bits(level)?;
    if store.exists("params.json") && !force {
        return Err(SimError::Malformed {
            path: store.path("params.json").display().to_string(),
            reason: "already initialized; pass --force to replace".into(),
        }
        .into());
    }
    let config = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|source| SimError::Io { path: path.display().to_string(), source })?;
            serde_json::from_str::<ProtocolConfig>(&text)
                .map_err(|e| SimError::Malformed { path: path.display().to_string(), reason: e.to_string() })?
        }
        None => ProtocolConfig::default(),
    };
    let params = Params::new(level, seed, config);
    with_curve!(level, E => params.context::<E>().map(|_| ()))?;
    store.save_params(&params)?;
    println!("initialized {} ({level}) in {}", level.curve_name(), store.dir().display());
    Ok(())
}

fn simulate(store: &Store, path: &PathBuf, out: Option<PathBuf>, opts: RunOptions) -> Outcome {
    let text = std::fs::read_to_string(path)
        .map_err(|source| SimError::Io { path: path.display().to_string(), source })?;
    let sc: Scenario = serde_json::from_str(&text)
        .map_err(|e| SimError::Malformed { path: path.display().to_string(), reason: e.to_string() })?;
    let report = run_scenario(&sc, opts)?;
    let out = out.unwrap_or_else(|| store.path("report.json"));
    if let Some(parent) = out.parent() {
        std::fs::create_dir_all(parent).map_err(|source| SimError::Io { path: parent.display().to_string(), source })?;
    }
    std::fs::write(&out, report.to_json() + "\n")
        .map_err(|source| SimError::Io { path: out.display().to_string(), source })?;
    let recorded = report.contacts.iter().filter(|c| matches!(c.status, spot_sim::engine::ContactStatus::Recorded { .. })).count();
    println!("{} messages, {recorded}/{} contacts recorded", report.transcript.len(), report.contacts.len());
    for s in &report.submissions {
        match &s.outcome {
            SubmissionOutcome::Refused { reason } => println!("user{} submission refused: {reason}", s.user),
            SubmissionOutcome::Checked { entries, rejected } => {
                println!("user{} submitted {entries} entries, {} rejected", s.user, rejected.len())
            }
        }
    }
    println!("published {} contact(s); set signature valid: {}", report.published.len(), report.published_set_valid);
    for (i, s) in report.scores.iter().enumerate() {
        println!("user{i}: score {} exposed {}", s.score, s.exposed);
    }
    println!("report written to {}", out.display());
    Ok(())
}

fn bench(
    store: &Store,
    level: u32,
    runs: usize,
    algorithms: Vec<String>,
    variants: Vec<VariantArg>,
    json: Option<PathBuf>,
) -> Outcome {
    let level = SecurityLevel::from_bits(level)?;
    for a in &algorithms {
        if !spot_sim::bench::ALGORITHMS.iter().any(|n| n.eq_ignore_ascii_case(a)) {
            return Err(SimError::Malformed { path: "--algorithm".into(), reason: format!("unknown algorithm {a}") }.into());
        }
    }
    let mut opts = BenchOptions { level, runs, algorithms, ..BenchOptions::default() };
    if !variants.is_empty() {
        opts.variants = variants.into_iter().map(Variant::from).collect();
    }
    let report = run_bench(&opts)?;
    print!("{}", report.to_text());
    let path = json.unwrap_or_else(|| store.path("bench.json"));
    std::fs::write(&path, report.to_json() + "\n")
        .map_err(|source| SimError::Io { path: path.display().to_string(), source })?;
    println!("JSON report written to {}", path.display());
    Ok(())
}

struct Keys<E: SpotCurve> {
    manager: Manager<E>,
    proxies: Proxies<E>,
    server: ServerState<E>,
    ha: HaState<E>,
}

fn load_keys<E: SpotCurve>(store: &Store) -> Result<Keys<E>, SimError> {
    Ok(Keys {
        manager: store.load::<E, _>("manager", "manager.json")?,
        proxies: store.load::<E, _>("proxies", "proxies.json")?,
        server: store.load::<E, _>("server", "server.json")?,
        ha: store.load::<E, _>("ha", "ha.json")?,
    })
}

fn load_user<E: SpotCurve>(store: &Store, name: &str) -> Result<UserState<E>, SimError> {
    check_name(name)?;
    store.load::<E, _>("user", &Store::user_file(name))
}

fn stateful<E: SpotCurve>(store: &Store, params: &mut Params, command: Command) -> Outcome {
    let ctx = params.context::<E>()?;
    match command {
        Command::Keygen => {
            let mut rng = params.next_rng("keygen");
            let (gsk, vk) = gsig::setup(&ctx, &mut rng);
            let server = s_keygen(&ctx, &mut rng);
            let ha = ha_keygen(&ctx, &mut rng);
            store.save::<E, _>("manager", "manager.json", &Manager { gsk: Hex(gsk), vk: Hex(vk) })?;
            store.save::<E, _>("proxies", "proxies.json", &Proxies::<E> { roster: Default::default(), credentials: vec![] })?;
            store.save::<E, _>("server", "server.json", &server)?;
            store.save::<E, _>("ha", "ha.json", &ha)?;
            println!("group manager, server and health authority keys written");
        }
        Command::JoinProxy { subset } => {
            let manager: Manager<E> = store.load::<E, _>("manager", "manager.json")?;
            let mut proxies: Proxies<E> = store.load::<E, _>("proxies", "proxies.json")?;
            let cred: ProxyCredential<E> = gsig::join(&ctx, &manager.gsk.0, &mut params.next_rng("join"));
            let id = proxies.credentials.len() as u32;
            proxies.credentials.push(Hex(cred));
            match subset {
                Subset::Primary => proxies.roster.primary.push(id),
                Subset::Secondary => proxies.roster.secondary.push(id),
            }
            store.save::<E, _>("proxies", "proxies.json", &proxies)?;
            println!("proxy{id} joined");
        }
        Command::RegisterUser { name } => {
            check_name(&name)?;
            let file = Store::user_file(&name);
            if store.exists(&file) {
                return Err(SimError::Malformed { path: file, reason: "user already registered".into() }.into());
            }
            let mut ha: HaState<E> = store.load::<E, _>("ha", "ha.json")?;
            let mut rng = params.next_rng("register");
            let record = set_user_id(&mut ha, &ctx, &mut rng);
            let user = user_keygen::<E, _>(record.id, &mut rng);
            ha.register_public_key(&user.id, user.pk)?;
            store.save::<E, _>("ha", "ha.json", &ha)?;
            store.save::<E, _>("user", &file, &user)?;
            println!("registered {name}");
        }
        Command::Contact { a, b, duration } => {
            if a == b {
                return Err(SimError::Malformed { path: b, reason: "a contact needs two users".into() }.into());
            }
            let Keys { manager, proxies, mut server, .. } = load_keys::<E>(store)?;
            let mut ua = load_user::<E>(store, &a)?;
            let mut ub = load_user::<E>(store, &b)?;
            let mut rng = params.next_rng("contact");
            let epoch = params.epochs;
            params.epochs += 1;
            let (da, db) = (ua.ebid(epoch, &mut rng), ub.ebid(epoch, &mut rng));
            let ccm = set_ccm(&ctx, da, db);
            let (pa, pb) = choose_proxies(da, db, &proxies.roster)?;
            let now = params.now;
            let mut ps = None;
            for p in [pa, pb] {
                match server.ingest(&params.config, ccm, p, now, &mut rng) {
                    IngestOutcome::Matched { ps: v, .. } => ps = Some(v),
                    IngestOutcome::Pending => {}
                    IngestOutcome::Rejected(r) => {
                        return Err(Failure::Verification(format!("server rejected the contact: {r:?}")))
                    }
                }
            }
            let ps = ps.ok_or_else(|| Failure::Verification("server did not match the copies".into()))?;
            let vk = &manager.vk.0;
            for (user, p) in [(&mut ua, pa), (&mut ub, pb)] {
                let cred = &proxies.credentials.get(p as usize).ok_or_else(|| SimError::MissingState(format!("proxy{p}")))?.0;
                let (_, out) = p_sign(&ctx, vk, cred, user.id, ps, true, &mut rng)?;
                user.add_contact(ContactEntry { ccm, m: out.m, proof: out.proof, at: now, duration });
            }
            store.save::<E, _>("server", "server.json", &server)?;
            store.save::<E, _>("user", &Store::user_file(&a), &ua)?;
            store.save::<E, _>("user", &Store::user_file(&b), &ub)?;
            println!("contact recorded via proxy{pa} and proxy{pb}");
        }
        Command::Advance { days, secs } => {
            params.now += days * SECONDS_PER_DAY + secs;
            let mut server: ServerState<E> = store.load::<E, _>("server", "server.json")?;
            server.purge_expired(&params.config, params.now);
            store.save::<E, _>("server", "server.json", &server)?;
            let users_dir = store.path("users");
            if users_dir.exists() {
                let entries = std::fs::read_dir(&users_dir)
                    .map_err(|source| SimError::Io { path: users_dir.display().to_string(), source })?;
                for entry in entries.flatten() {
                    let file = format!("users/{}", entry.file_name().to_string_lossy());
                    let mut u: UserState<E> = store.load::<E, _>("user", &file)?;
                    u.purge_expired(&params.config, params.now);
                    store.save::<E, _>("user", &file, &u)?;
                }
            }
            println!("clock at {} s", params.now);
        }
        Command::DeclareInfected { user } => {
            let u = load_user::<E>(store, &user)?;
            let mut ha: HaState<E> = store.load::<E, _>("ha", "ha.json")?;
            ha.set_status(&u.id, HealthStatus::Infected)?;
            store.save::<E, _>("ha", "ha.json", &ha)?;
            println!("{user} marked infected");
        }
        Command::Verify { user, parallel } => {
            let Keys { manager, server, mut ha, .. } = load_keys::<E>(store)?;
            let u = load_user::<E>(store, &user)?;
            let verdict = match ha.verify_contact_list(&manager.vk.0, &server, &u.id, u.contacts().to_vec(), parallel, None) {
                Err(spot_core::Error::UserNotInfected) => {
                    return Err(Failure::Verification(format!("{user} is not marked infected; nothing was checked")))
                }
                other => other?,
            };
            store.save::<E, _>("ha", "ha.json", &ha)?;
            for (i, v) in verdict.verdicts.iter().enumerate() {
                match v {
                    Ok(()) => println!("entry {i}: accepted"),
                    Err(r) => println!("entry {i}: rejected ({r:?})"),
                }
            }
            println!("{} accepted, {} rejected", verdict.accepted(), verdict.rejected().len());
            if !verdict.all_accepted() {
                return Err(Failure::Verification(format!("{} entries rejected", verdict.rejected().len())));
            }
        }
        Command::Publish => {
            let mut ha: HaState<E> = store.load::<E, _>("ha", "ha.json")?;
            let vs = ha_publish(&mut ha, &ctx);
            store.save::<E, _>("ha", "ha.json", &ha)?;
            store.save::<E, _>("published", "published.json", &vs)?;
            println!("published {} contact(s)", vs.ccms.len());
        }
        Command::Risk { user } => {
            let u = load_user::<E>(store, &user)?;
            let ha: HaState<E> = store.load::<E, _>("ha", "ha.json")?;
            let vs: VerifiedSet<E> = store.load::<E, _>("published", "published.json")?;
            let score = risk_score(&ctx, &u, &vs, &ha.pk, &params.config)?;
            println!("{user}: score {} from {} contact(s); exposed {}", score.score, score.matches, score.exposed);
        }
        Command::Init { .. } | Command::Simulate { .. } | Command::Bench { .. } => unreachable!("handled without state"),
    }
    Ok(())
}
