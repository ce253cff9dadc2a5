use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fghlab::classical::{classify, lemma1_synthesize, lemma2_synthesize};
use fghlab::extensions::Deciders;
use fghlab::fghsim::{mtr_check, rosser_run, solovay_check, solovay_run, Pos, ProofStream};
use fghlab::formula::{Connective, Formula};
use fghlab::glprover::{gl_proves_brute, gl_proves_with_budget, ProverError, Verdict, DEFAULT_NODE_BUDGET};
use fghlab::kripke::{enumerate_models, KripkeModel, WorldId};
use fghlab::surgery::{merge_mt, merge_mt4, merge_nontrifling, MergeCertificate};
use fghlab::parse_formula;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "fghlab", version, about = "Provability logic toolkit")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tautology, unsatisfiable or contingent (box-free formulas only).
    Classify { formula: String },
    #[command(subcommand)]
    Synthesize(Synth),
    #[command(subcommand)]
    Decide(Decide),
    /// Nontrifling verdict with every characterization.
    Nontrifling { formula: String },
    #[command(subcommand)]
    Merge(Merge),
    #[command(subcommand)]
    Simulate(Simulate),
    /// All rooted GL models up to isomorphism.
    EnumerateModels {
        #[arg(long)]
        worlds: usize,
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// Compares the tableau prover with brute force on random formulas.
    Crosscheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 7)]
        max_size: usize,
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
    },
}

#[derive(Subcommand)]
enum Synth {
    Lemma1 {
        formula: String,
        #[arg(long, default_value = "r")]
        fresh: String,
    },
    Lemma2 {
        formula: String,
        /// Variables kept fixed.
        #[arg(long, value_delimiter = ',')]
        q: Vec<String>,
        #[arg(long, default_value = "r")]
        fresh: String,
    },
}

#[derive(Subcommand)]
enum Decide {
    Gl { formula: String },
    Gls { formula: String },
    GlwBox { formula: String },
    GlwNegbox { formula: String },
    GlNfs {
        formula: String,
        #[arg(long)]
        s: usize,
    },
}

#[derive(Subcommand)]
enum Merge {
    Nontrifling {
        left: PathBuf,
        right: PathBuf,
        formula: String,
        #[arg(long, default_value_t = 2)]
        chain_len: usize,
    },
    Mt {
        left: PathBuf,
        right: PathBuf,
        formula: String,
    },
    Mt4 {
        left: PathBuf,
        right: PathBuf,
        formula: String,
        #[arg(long)]
        s: usize,
    },
}

#[derive(Subcommand)]
enum Simulate {
    Solovay { scenario: PathBuf },
    Rosser { scenario: PathBuf },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolovayScenario {
    model: KripkeModel,
    formula: Formula,
    sigma: Pos,
    fa_proof: Pos,
    #[serde(default)]
    climbs: BTreeMap<u64, WorldId>,
    horizon: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RosserScenario {
    stream: ProofStream,
    tau0: Pos,
    tau1: Pos,
}

enum Failure {
    Input(String),
    Resource(String),
}

impl From<ProverError> for Failure {
    fn from(e: ProverError) -> Self {
        match e {
            ProverError::BudgetExceeded(_) => Failure::Resource(e.to_string()),
            ProverError::Internal(_) => Failure::Input(e.to_string()),
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn formula(text: &str) -> Result<Formula, Failure> {
    parse_formula(text).map_err(input)
}

fn read_model(path: &Path) -> Result<KripkeModel, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    KripkeModel::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn budget() -> Result<u64, Failure> {
    match std::env::var("FGHLAB_NODE_BUDGET") {
        Ok(v) => v
            .parse()
            .map_err(|_| Failure::Input(format!("FGHLAB_NODE_BUDGET must be an integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_NODE_BUDGET),
    }
}

fn proved_word(b: bool) -> &'static str {
    if b {
        "PROVED"
    } else {
        "UNPROVED"
    }
}

fn certificate_text(c: &MergeCertificate) -> String {
    let failed = c.checked_claims.iter().filter(|c| c.expected != c.actual).count();
    let mut out = format!(
        "{} claims checked, {failed} failed\nlandmarks: {}\n",
        c.checked_claims.len(),
        c.landmarks.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    );
    out.push_str(&c.model.to_json());
    out
}

fn random_formula(rng: &mut ChaCha8Rng, size: usize) -> Formula {
    if size <= 1 {
        return match rng.gen_range(0..6) {
            0 => Formula::Top,
            1 => Formula::Bot,
            2 | 3 => Formula::var("p"),
            _ => Formula::var("q"),
        };
    }
    match rng.gen_range(0..4) {
        0 => Formula::neg(random_formula(rng, size - 1)),
        1 => Formula::boxed(random_formula(rng, size - 1)),
        _ if size >= 3 => {
            let left = rng.gen_range(1..size - 1);
            let c = Connective::ALL[rng.gen_range(0..4)];
            Formula::binary(c, random_formula(rng, left), random_formula(rng, size - 1 - left))
        }
        _ => Formula::boxed(random_formula(rng, size - 1)),
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    let d = Deciders { budget: budget()? };
    let as_json = cli.json;
    Ok(match cli.command {
        Command::Classify { formula: f } => {
            let c = classify(&formula(&f)?).map_err(input)?;
            if as_json {
                json(&serde_json::json!({ "classification": c }))
            } else {
                format!("{c:?}").to_lowercase()
            }
        }
        Command::Synthesize(s) => {
            let (subst, verified, value) = match s {
                Synth::Lemma1 { formula: f, fresh } => {
                    let r = lemma1_synthesize(&formula(&f)?, &fresh).map_err(input)?;
                    (r.substitution.clone(), r.verified, serde_json::to_value(&r).unwrap())
                }
                Synth::Lemma2 { formula: f, q, fresh } => {
                    let r = lemma2_synthesize(&formula(&f)?, &q, &fresh).map_err(input)?;
                    (r.substitution.clone(), r.verified, serde_json::to_value(&r).unwrap())
                }
            };
            if as_json {
                json(&value)
            } else {
                let mut lines: Vec<String> = subst.iter().map(|(v, b)| format!("{v} := {b}")).collect();
                lines.push(format!("verified: {verified}"));
                lines.join("\n")
            }
        }
        Command::Decide(Decide::Gl { formula: f }) => {
            let v = gl_proves_with_budget(&formula(&f)?, d.budget)?;
            if as_json {
                json(&v)
            } else {
                match v {
                    Verdict::Proved(_) => "PROVED".to_string(),
                    Verdict::Refuted(m) => format!("REFUTED\n{}", m.to_json()),
                }
            }
        }
        Command::Decide(kind) => {
            let (system, proved) = match kind {
                Decide::Gls { formula: f } => ("gls", d.gls_proves(&formula(&f)?)?),
                Decide::GlwBox { formula: f } => ("glw-box", d.glw_proves_box(&formula(&f)?)?),
                Decide::GlwNegbox { formula: f } => ("glw-negbox", d.glw_proves_negbox(&formula(&f)?)?),
                Decide::GlNfs { formula: f, s } => ("gl-nfs", d.glnfs_proves(s, &formula(&f)?)?),
                Decide::Gl { .. } => unreachable!("handled above"),
            };
            if as_json {
                json(&serde_json::json!({ "system": system, "proved": proved }))
            } else {
                proved_word(proved).to_string()
            }
        }
        Command::Nontrifling { formula: f } => {
            let r = d.nontrifling(&formula(&f)?)?;
            if as_json {
                json(&r)
            } else {
                format!(
                    "{}\nGL_w: []a {}, ![]a {}\nGLS: []a {}, ![]a {}\nGL+!F_{}: []a {}, ![]a {}\nGL: a {}, Rf([]a) -> ![]a {}",
                    if r.verdict { "nontrifling" } else { "trifling" },
                    proved_word(r.char2.boxed),
                    proved_word(r.char2.negboxed),
                    proved_word(r.char3.boxed),
                    proved_word(r.char3.negboxed),
                    r.char4.s_used,
                    proved_word(r.char4.boxed),
                    proved_word(r.char4.negboxed),
                    proved_word(r.char5.gl_a),
                    proved_word(r.char5.gl_rf_negbox),
                )
            }
        }
        Command::Merge(m) => {
            let cert = match m {
                Merge::Nontrifling { left, right, formula: f, chain_len } => {
                    merge_nontrifling(&read_model(&left)?, &read_model(&right)?, &formula(&f)?, chain_len)
                }
                Merge::Mt { left, right, formula: f } => merge_mt(&read_model(&left)?, &read_model(&right)?, &formula(&f)?),
                Merge::Mt4 { left, right, formula: f, s } => {
                    merge_mt4(&read_model(&left)?, &read_model(&right)?, &formula(&f)?, s)
                }
            }
            .map_err(input)?;
            if as_json {
                json(&cert)
            } else {
                certificate_text(&cert)
            }
        }
        Command::Simulate(Simulate::Solovay { scenario }) => {
            let sc: SolovayScenario = read_json(&scenario)?;
            let run = solovay_run(&sc.model, sc.sigma, sc.fa_proof, &sc.climbs, sc.horizon).map_err(input)?;
            let report = solovay_check(&run, &sc.model, &sc.formula);
            if as_json {
                json(&serde_json::json!({ "run": run, "report": report }))
            } else {
                let mut lines = vec![
                    format!("trajectory: {:?}", run.trajectory),
                    format!("limit: {}{}", run.limit, if run.unstable { " (unstable)" } else { "" }),
                ];
                lines.extend(report.checks.iter().map(|c| format!("{}: {:?}", c.name, c.status).to_lowercase()));
                lines.join("\n")
            }
        }
        Command::Simulate(Simulate::Rosser { scenario }) => {
            let sc: RosserScenario = read_json(&scenario)?;
            let run = rosser_run(&sc.stream, sc.tau0, sc.tau1).map_err(input)?;
            let report = mtr_check(&run, &sc.stream, sc.tau0, sc.tau1);
            if as_json {
                json(&serde_json::json!({ "run": run, "report": report }))
            } else {
                let outputs: Vec<String> = run.outputs.iter().map(|t| t.to_string()).collect();
                let mut lines = vec![
                    format!("outputs: {}", outputs.join(" ")),
                    format!("pr_rosser_phi: {}", run.pr_rosser_phi),
                    format!("pr_rosser_not_phi: {}", run.pr_rosser_not_phi),
                ];
                lines.extend(report.checks.iter().map(|c| format!("{}: {:?}", c.name, c.status).to_lowercase()));
                lines.join("\n")
            }
        }
        Command::EnumerateModels { worlds, vars } => {
            let models = enumerate_models(worlds, &vars);
            if as_json {
                json(&models)
            } else {
                models.iter().map(KripkeModel::to_json).collect::<Vec<_>>().join("\n")
            }
        }
        Command::Crosscheck { seed, count, max_size, max_worlds } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut disagreements = Vec::new();
            for _ in 0..count {
                let size = rng.gen_range(1..=max_size.max(1));
                let f = random_formula(&mut rng, size);
                let verdict = gl_proves_with_budget(&f, d.budget)?;
                let exact = verdict.countermodel().map_or(true, |m| m.len() <= max_worlds);
                if exact && verdict.is_proved() != gl_proves_brute(&f, max_worlds) {
                    disagreements.push(f.to_string());
                }
            }
            if as_json {
                json(&serde_json::json!({ "seed": seed, "count": count, "disagreements": disagreements }))
            } else {
                let mut out = format!("{count} formulas, {} disagreements", disagreements.len());
                for f in &disagreements {
                    out.push('\n');
                    out.push_str(f);
                }
                out
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
