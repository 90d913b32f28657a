mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use fmark::free_approx::{check_no_relations, free_pair, RelationCheck, SearchBudget};
use fmark::marked_space::distance_to_free;
use fmark::marking::{build_marking, generation_witness, MarkingBundle};
use fmark::thompson::{eval_on_generators, express_word};
use fmark::PlMap;

use report::{sibling, RunReport};

#[derive(Parser)]
#[command(name = "fmark", version, about = "Free-ball markings of Thompson's group F")]
struct Cli {
    /// Worker threads for the word enumeration (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the marking (g_n, h_n) and write it as a bundle.
    Build {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = SearchBudget::default().candidates)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that no reduced word of length <= 2 * radius is a relation.
    Verify {
        input: PathBuf,
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write straight-line programs over (g, h) for p and q.
    Witness {
        bundle: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radius of agreement with the free ball, searched up to the cutoff.
    Distance {
        input: PathBuf,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
        cutoff: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a word over (f1, f2) for a serialized element.
    Express {
        element: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a pair in the derived subgroup with a free ball of radius n.
    FreePair {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = SearchBudget::default().candidates)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Outcome {
    Ok,
    Violation(String),
}

#[derive(Serialize, Deserialize)]
struct TupleFile {
    generators: Vec<PlMap>,
}

enum Input {
    Bundle(Box<MarkingBundle>),
    Tuple(Vec<PlMap>),
}

impl Input {
    fn tuple(&self) -> Vec<PlMap> {
        match self {
            Input::Bundle(b) => b.generators().to_vec(),
            Input::Tuple(t) => t.clone(),
        }
    }
}

fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_bundle(path: &Path) -> Result<MarkingBundle> {
    let bundle: MarkingBundle =
        serde_json::from_value(read_json(path)?).with_context(|| format!("decoding bundle {}", path.display()))?;
    bundle.validate().context("validating bundle")?;
    Ok(bundle)
}

fn load_input(path: &Path) -> Result<Input> {
    let value = read_json(path)?;
    if value.get("generators").is_some() {
        let t: TupleFile =
            serde_json::from_value(value).with_context(|| format!("decoding tuple {}", path.display()))?;
        if t.generators.is_empty() {
            bail!("tuple file has no generators");
        }
        return Ok(Input::Tuple(t.generators));
    }
    Ok(Input::Bundle(Box::new(load_bundle(path)?)))
}

fn budget(candidates: u64) -> SearchBudget {
    SearchBudget { candidates, ..SearchBudget::default() }
}

fn check_summary(check: &RelationCheck) -> serde_json::Value {
    match check {
        RelationCheck::Free { max_len, checked_words, .. } => {
            json!({"kind": "no_relations", "max_len": max_len, "checked_words": checked_words, "verified": true})
        }
        RelationCheck::Relation(w) => {
            json!({"kind": "relation", "word": w.to_string(), "length": w.len(), "verified": false})
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Build { n, seed, budget: b, out } => {
            let out = out.unwrap_or_else(|| PathBuf::from(format!("bundle-n{n}-seed{seed}.json")));
            let mut rep = RunReport::new("build");
            rep.param("n", n).param("budget", b);
            rep.seeds.push(seed);
            let bundle = build_marking(n as usize, seed, budget(b)).context("stage build_marking")?;
            rep.lap("build_marking");
            bundle.validate().context("stage validate")?;
            rep.lap("validate");
            let cert = &bundle.certificate;
            rep.certificate(json!({
                "kind": "free_pair",
                "radius": cert.n,
                "checked_words": cert.checked_words,
                "blocks": cert.block_layout.len(),
                "verified": cert.verified,
            }));
            rep.write_json(&out, &bundle)?;
            let report = rep.finish(&out)?;
            println!(
                "wrote {} (m = {}, interval [{}, {}]); report {}",
                out.display(),
                bundle.m,
                bundle.interval.0,
                bundle.interval.1,
                report.display()
            );
            Ok(Outcome::Ok)
        }
        Command::Verify { input, radius, out } => {
            let loaded = load_input(&input)?;
            let radius = match (&loaded, radius) {
                (_, Some(r)) => r,
                (Input::Bundle(b), None) => b.n,
                (Input::Tuple(_), None) => bail!("--radius is required for tuple files"),
            };
            let mut rep = RunReport::new("verify");
            rep.param("input", input.display().to_string()).param("radius", radius);
            if let Input::Bundle(b) = &loaded {
                rep.seeds.push(b.seed);
            }
            let check = check_no_relations(&loaded.tuple(), 2 * radius);
            rep.lap("check_no_relations");
            let out = out.unwrap_or_else(|| sibling(&input, "cert"));
            let cert = json!({"radius": radius, "result": &check, "summary": check_summary(&check)});
            rep.certificate(check_summary(&check));
            rep.write_json(&out, &cert)?;
            rep.finish(&out)?;
            match check {
                RelationCheck::Free { checked_words, .. } => {
                    println!("free ball of radius {radius}: {checked_words} nontrivial words checked");
                    Ok(Outcome::Ok)
                }
                RelationCheck::Relation(w) => Ok(Outcome::Violation(format!("relation of length {}: {w}", w.len()))),
            }
        }
        Command::Witness { bundle: path, out } => {
            let bundle = load_bundle(&path)?;
            let mut rep = RunReport::new("witness");
            rep.param("bundle", path.display().to_string());
            rep.seeds.push(bundle.seed);
            let witness = generation_witness(&bundle).context("stage generation_witness")?;
            rep.lap("generation_witness");
            if !witness.verify(&bundle).context("stage re-verify")? {
                bail!("stage re-verify: programs do not evaluate to p and q");
            }
            rep.lap("re-verify");
            for (name, w) in [("p", &witness.p), ("q", &witness.q)] {
                rep.certificate(json!({
                    "kind": "generation",
                    "element": name,
                    "s": w.s,
                    "commutators": w.commutators,
                    "slp_nodes": w.slp.nodes().len(),
                    "expanded_len": w.expanded_len.to_string(),
                    "verified": true,
                }));
            }
            let out = out.unwrap_or_else(|| sibling(&path, "witness"));
            rep.write_json(&out, &witness)?;
            rep.finish(&out)?;
            println!(
                "p: {} commutators, expanded length {}; q: {} commutators, expanded length {}",
                witness.p.commutators, witness.p.expanded_len, witness.q.commutators, witness.q.expanded_len
            );
            Ok(Outcome::Ok)
        }
        Command::Distance { input, cutoff, out } => {
            let loaded = load_input(&input)?;
            let mut rep = RunReport::new("distance");
            rep.param("input", input.display().to_string()).param("cutoff", cutoff);
            if let Input::Bundle(b) = &loaded {
                rep.seeds.push(b.seed);
            }
            let d = distance_to_free(&loaded.tuple(), cutoff as usize);
            rep.lap("distance_to_free");
            rep.certificate(json!({"kind": "distance", "n": d.n, "exact": d.exact}));
            let out = out.unwrap_or_else(|| sibling(&input, "distance"));
            rep.write_json(&out, &d)?;
            rep.finish(&out)?;
            match &d.relation {
                Some(w) => println!("n = {} exactly (relation of length {}: {w})", d.n, w.len()),
                None => println!("n >= {} (no relation up to length {})", d.n, 2 * d.cutoff),
            }
            Ok(Outcome::Ok)
        }
        Command::Express { element, out } => {
            let f: PlMap = serde_json::from_value(read_json(&element)?)
                .with_context(|| format!("decoding element {}", element.display()))?;
            let mut rep = RunReport::new("express");
            rep.param("element", element.display().to_string());
            let w = express_word(&f).context("stage express_word")?;
            rep.lap("express_word");
            if eval_on_generators(&w)? != f {
                bail!("stage re-verify: word does not evaluate to the element");
            }
            rep.lap("re-verify");
            rep.certificate(json!({"kind": "express", "length": w.len(), "verified": true}));
            let out = out.unwrap_or_else(|| sibling(&element, "word"));
            rep.write_json(&out, &json!({"word": w.to_string(), "length": w.len(), "verified": true}))?;
            rep.finish(&out)?;
            println!("{w}");
            Ok(Outcome::Ok)
        }
        Command::FreePair { n, seed, budget: b, out } => {
            let out = out.unwrap_or_else(|| PathBuf::from(format!("free-pair-n{n}-seed{seed}.json")));
            let mut rep = RunReport::new("free-pair");
            rep.param("n", n).param("budget", b);
            rep.seeds.push(seed);
            let cert = free_pair(n as usize, seed, budget(b)).context("stage free_pair")?;
            rep.lap("free_pair");
            rep.certificate(json!({
                "kind": "free_pair",
                "radius": cert.n,
                "checked_words": cert.checked_words,
                "blocks": cert.block_layout.len(),
                "verified": cert.verified,
            }));
            rep.write_json(&out, &cert)?;
            rep.finish(&out)?;
            println!("radius {n}: {} words checked over {} blocks", cert.checked_words, cert.block_layout.len());
            Ok(Outcome::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation(msg)) => {
            println!("violation: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
