//! Per-algorithm timings in the layout of the cost table.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use spot_core::codec::{ElementCounts, Wire};
use spot_core::gsig::{self, PreparedVerifier};
use spot_core::pairing::{pow, random_nonzero, seeded_rng};
use spot_core::protocol::{
    ccm_verify, ha_keygen, p_sign, s_keygen, set_ccm, set_user_id, sig_verify_with, user_keygen, Ebid,
};
use spot_core::{with_curve, PairingContext, SecurityLevel, SpotCurve};

use crate::SimError;

/// The twelve algorithms in table order.
pub const ALGORITHMS: [&str; 12] = [
    "Set_params",
    "HA_Keygen",
    "S_Keygen",
    "Setup_ProxyGr",
    "Join_ProxyGr",
    "Set_UserID",
    "Userkeygen",
    "Set_CCM",
    "S_PSign",
    "P_Sign",
    "Sig_Verify",
    "CCM_Verify",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Baseline,
    Multithreaded,
    Preprocessed,
    Combined,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Multithreaded => "multithreaded",
            Variant::Preprocessed => "preprocessed",
            Variant::Combined => "combined",
        }
    }

    fn parallel(self) -> bool {
        matches!(self, Variant::Multithreaded | Variant::Combined)
    }

    fn prepared(self) -> bool {
        matches!(self, Variant::Preprocessed | Variant::Combined)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchOptions {
    pub level: SecurityLevel,
    pub runs: usize,
    /// Empty selects all twelve.
    pub algorithms: Vec<String>,
    pub variants: Vec<Variant>,
    pub seed: String,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            level: SecurityLevel::Bits112,
            runs: 100,
            algorithms: Vec::new(),
            variants: vec![Variant::Baseline, Variant::Multithreaded, Variant::Preprocessed, Variant::Combined],
            seed: "bench".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub entity: String,
    pub variant: Variant,
    pub runs: usize,
    pub mean_ms: f64,
    pub std_ms: f64,
    /// Elements sent by the algorithm. Empty when nothing is sent.
    pub communication: Vec<Sent>,
}

/// One part of an algorithm's output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sent {
    /// Sender, or a label for the part. May be empty.
    pub label: String,
    pub counts: ElementCounts,
    pub bytes: usize,
}

impl BenchRow {
    pub fn communication_text(&self) -> String {
        if self.communication.is_empty() {
            return "N.A.".into();
        }
        let parts: Vec<String> = self
            .communication
            .iter()
            .map(|s| if s.label.is_empty() { s.counts.to_string() } else { format!("{}: {}", s.label, s.counts) })
            .collect();
        parts.join(" / ")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub security_level: u32,
    pub curve: String,
    pub runs: usize,
    pub threads: usize,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn row(&self, algorithm: &str, variant: Variant) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.variant == variant)
    }

    /// Relative saving of `variant` over the baseline, in percent.
    pub fn improvement(&self, algorithm: &str, variant: Variant) -> Option<f64> {
        let base = self.row(algorithm, Variant::Baseline)?.mean_ms;
        let other = self.row(algorithm, variant)?.mean_ms;
        Some(100.0 * (base - other) / base)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} ({}-bit), {} runs per row, {} hardware thread(s)",
            self.curve, self.security_level, self.runs, self.threads
        );
        let header = ("Algorithm", "Entity", "Variant", "Mean (ms)", "Std (ms)", "Communication");
        let rows: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.algorithm.clone(),
                    r.entity.clone(),
                    r.variant.name().into(),
                    format!("{:.3}", r.mean_ms),
                    format!("{:.3}", r.std_ms),
                    r.communication_text(),
                ]
            })
            .collect();
        let head = [header.0, header.1, header.2, header.3, header.4, header.5].map(String::from);
        let mut widths = head.clone().map(|h| h.len());
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        for r in std::iter::once(&head).chain(&rows) {
            let line: Vec<String> = r
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 3 || i == 4 { format!("{c:>w$}") } else { format!("{c:<w$}") })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }
}

fn stats(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn time_runs(runs: usize, mut f: impl FnMut(usize)) -> (f64, f64) {
    let samples: Vec<f64> = (0..runs)
        .map(|i| {
            let start = Instant::now();
            f(i);
            start.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    stats(&samples)
}

fn sent<E: SpotCurve>(label: &str, counts: ElementCounts) -> Sent {
    Sent { label: label.into(), counts, bytes: counts.byte_len::<E>() }
}

pub fn run_bench(opts: &BenchOptions) -> Result<BenchReport, SimError> {
    with_curve!(opts.level, E => bench::<E>(opts))
}

fn bench<E: SpotCurve>(opts: &BenchOptions) -> Result<BenchReport, SimError> {
    let runs = opts.runs.max(1);
    let level = opts.level;
    let seed = opts.seed.as_bytes();
    let mut rng = seeded_rng(seed);
    let ctx = PairingContext::<E>::setup(level, seed)?;
    let (gsk, vk) = gsig::setup(&ctx, &mut rng);
    let cred = gsig::join(&ctx, &gsk, &mut rng);
    let server = s_keygen(&ctx, &mut rng);
    let mut ha = ha_keygen(&ctx, &mut rng);
    let record = set_user_id(&mut ha, &ctx, &mut rng);
    let user = user_keygen::<E, _>(record.id, &mut rng);
    let (d_a, d_b) = (Ebid::random(&mut rng), Ebid::random(&mut rng));
    let ccm = set_ccm(&ctx, d_a, d_b);
    let ps_sig = server.s_psign(ccm, &mut rng);
    let ps_prime = ps_sig.ps_prime(&ha.server_access());
    let (_, signed) = p_sign(&ctx, &vk, &cred, user.id, ps_sig.ps, false, &mut rng)?;
    let prepared = PreparedVerifier::new(&vk)?;

    let selected = |name: &str| opts.algorithms.is_empty() || opts.algorithms.iter().any(|a| a.eq_ignore_ascii_case(name));
    let has = |v: Variant| opts.variants.contains(&v);
    let mut rows = Vec::new();
    let mut push = |algorithm: &str, entity: &str, variant: Variant, (mean_ms, std_ms): (f64, f64), communication| {
        rows.push(BenchRow {
            algorithm: algorithm.into(),
            entity: entity.into(),
            variant,
            runs,
            mean_ms,
            std_ms,
            communication,
        });
    };

    for name in ALGORITHMS.into_iter().filter(|n| selected(n)) {
        let base = Variant::Baseline;
        match name {
            "Set_params" => {
                let t = time_runs(runs, |i| {
                    black_box(PairingContext::<E>::setup(level, &i.to_be_bytes()).expect("level matches"));
                });
                let c = sent::<E>("", ElementCounts::g1(1) + ElementCounts::g2(1));
                push(name, "TA", base, t, vec![c]);
            }
            "HA_Keygen" => {
                let t = time_runs(runs, |_| {
                    black_box(ha_keygen(&ctx, &mut rng));
                });
                push(name, "TA", base, t, vec![sent::<E>("", ha.public_key_counts())]);
            }
            "S_Keygen" => {
                let t = time_runs(runs, |_| {
                    black_box(s_keygen(&ctx, &mut rng));
                });
                push(name, "TA", base, t, vec![sent::<E>("", server.public_key().counts())]);
            }
            "Setup_ProxyGr" => {
                let t = time_runs(runs, |_| {
                    black_box(gsig::setup(&ctx, &mut rng));
                });
                push(name, "GM", base, t, vec![sent::<E>("", vk.counts())]);
            }
            "Join_ProxyGr" => {
                let t = time_runs(runs, |_| {
                    black_box(gsig::join(&ctx, &gsk, &mut rng));
                });
                let c = vec![sent::<E>("P", cred.pk_p().counts()), sent::<E>("GM", cred.sigma_p.counts())];
                push(name, "P/GM", base, t, c);
            }
            "Set_UserID" => {
                let mut scratch = ha.clone();
                let t = time_runs(runs, |_| {
                    black_box(set_user_id(&mut scratch, &ctx, &mut rng));
                });
                push(name, "HA", base, t, vec![sent::<E>("", ElementCounts::g2(1))]);
            }
            "Userkeygen" => {
                let t = time_runs(runs, |_| {
                    black_box(user_keygen::<E, _>(record.id, &mut rng));
                });
                push(name, "U", base, t, vec![sent::<E>("", ElementCounts::g2(1))]);
            }
            "Set_CCM" => {
                let t = time_runs(runs, |_| {
                    black_box(set_ccm(&ctx, black_box(d_a), black_box(d_b)));
                });
                push(name, "U", base, t, vec![sent::<E>("", ElementCounts::zn(1))]);
            }
            "S_PSign" => {
                let t = time_runs(runs, |_| {
                    black_box(server.s_psign(black_box(ccm), &mut rng));
                });
                push(name, "S", base, t, vec![sent::<E>("", ElementCounts::zn(1))]);
            }
            "P_Sign" => {
                let comm = vec![sent::<E>("", signed.counts()), sent::<E>("with commitments", signed.full_counts())];
                for v in [Variant::Baseline, Variant::Multithreaded].into_iter().filter(|v| has(*v)) {
                    let t = time_runs(runs, |_| {
                        black_box(p_sign(&ctx, &vk, &cred, user.id, ps_sig.ps, v.parallel(), &mut rng).expect("valid"));
                    });
                    push(name, "P", v, t, comm.clone());
                }
            }
            "Sig_Verify" => {
                for v in opts.variants.iter().copied() {
                    let prep = v.prepared().then_some(&prepared);
                    let t = time_runs(runs, |_| {
                        assert!(sig_verify_with(&vk, signed.m, &signed.proof, v.parallel(), prep));
                    });
                    push(name, "HA", v, t, Vec::new());
                }
            }
            "CCM_Verify" => {
                let t = time_runs(runs, |_| {
                    assert!(ccm_verify(&signed.m, ps_prime, server.public_key(), record.t_u));
                });
                push(name, "HA", base, t, Vec::new());
            }
            _ => unreachable!("table names are fixed"),
        }
    }
    Ok(BenchReport {
        security_level: level.bits(),
        curve: E::NAME.into(),
        runs,
        threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        rows,
    })
}

/// Outcome of running the variants side by side on the same inputs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantCheck {
    pub trials: usize,
    /// Inputs on which some verification variant disagreed with the baseline.
    pub verify_disagreements: usize,
    /// Seeds for which threaded and plain P_Sign produced different outputs.
    pub sign_mismatches: usize,
    /// Threaded signatures that failed baseline verification.
    pub threaded_sign_failures: usize,
}

pub fn variant_equivalence(level: SecurityLevel, trials: usize, seed: &str) -> Result<VariantCheck, SimError> {
    with_curve!(level, E => equivalence::<E>(level, trials, seed))
}

fn equivalence<E: SpotCurve>(level: SecurityLevel, trials: usize, seed: &str) -> Result<VariantCheck, SimError> {
    let mut rng = seeded_rng(seed.as_bytes());
    let ctx = PairingContext::<E>::setup(level, seed.as_bytes())?;
    let (gsk, vk) = gsig::setup(&ctx, &mut rng);
    let cred = gsig::join(&ctx, &gsk, &mut rng);
    let prepared = PreparedVerifier::new(&vk)?;
    let mut out = VariantCheck { trials, ..Default::default() };
    for t in 0..trials {
        let id = pow(ctx.g2(), random_nonzero(&mut rng));
        let ps = random_nonzero(&mut rng);
        let trial_seed = format!("{seed}/{t}");
        let (_, plain) = p_sign(&ctx, &vk, &cred, id, ps, false, &mut seeded_rng(trial_seed.as_bytes()))?;
        let (_, threaded) = p_sign(&ctx, &vk, &cred, id, ps, true, &mut seeded_rng(trial_seed.as_bytes()))?;
        if plain != threaded {
            out.sign_mismatches += 1;
        }
        if !sig_verify_with(&vk, threaded.m, &threaded.proof, false, None) {
            out.threaded_sign_failures += 1;
        }
        let wrong_m = pow(plain.m, random_nonzero(&mut rng));
        for m in [plain.m, wrong_m] {
            let base = sig_verify_with(&vk, m, &plain.proof, false, None);
            let others = [
                sig_verify_with(&vk, m, &plain.proof, true, None),
                sig_verify_with(&vk, m, &plain.proof, false, Some(&prepared)),
                sig_verify_with(&vk, m, &plain.proof, true, Some(&prepared)),
            ];
            if others.iter().any(|v| *v != base) {
                out.verify_disagreements += 1;
            }
        }
    }
    Ok(out)
}
