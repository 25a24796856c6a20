//! `negdep`: exact negative-dependence checks for urn models.
//!
//! Exit codes: 0 when everything passes, 1 when a property fails (or a
//! witness does not replay, or brute force and recursion disagree), 2 on
//! input errors and on inconclusive checks.

mod check;
mod examples;
mod io;
mod orient_cmd;
mod refine;
mod sweep;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use negdep_core::negdep::{FieldStrategy, Verdict};
use negdep_core::orient::AdmissibilitySpec;
use negdep_core::Limits;

use crate::io::{Input, InputError};

#[derive(Parser)]
#[command(name = "negdep", version, about = "Exact negative-dependence checks for generalized urn models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check properties of one model, or replay a witness / report file.
    Check {
        /// Model JSON: {"balls", "urns", "probs"}.
        model: Option<String>,
        /// Comma-separated properties, e.g. `cna-occ,nmp,scp`.
        #[arg(long, default_value = "cna-occ")]
        prop: String,
        /// Conditioning on the first `d` urns being occupied (nmp, scp, refined).
        #[arg(long)]
        d: Option<usize>,
        /// Ball counts of the first urns, comma list (nmp, scp).
        #[arg(long)]
        a: Option<String>,
        /// Per-urn cutpoints `0,c1,..,m+1`, urns separated by `;`.
        #[arg(long)]
        cutpoints: Option<String>,
        /// Seed for randomized parts (external fields).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cap on up-sets enumerated by event searches.
        #[arg(long)]
        cap: Option<u64>,
        /// Write the report here; witness files go next to it.
        #[arg(long)]
        out: Option<String>,
        /// Re-verify the witnesses in a witness or report file.
        #[arg(long)]
        replay: Option<String>,
    },
    /// Count admissible orientations of a multigraph for every S ⊆ X(G).
    Orient {
        /// Graph JSON: {"vertices", "edges": [[i, j], ...]}, 1-based, i <= j.
        graph: String,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        a: Option<String>,
        /// brute, rec, or both.
        #[arg(long, default_value = "both")]
        mode: String,
        /// Cap on orientations enumerated by brute force.
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run theorem checks over a family of models and random graphs.
    Sweep {
        /// Sweep config JSON.
        config: String,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Reproduce the worked examples and counterexample searches.
    PaperExamples {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Refine a model after its first `d` urns.
    Refine {
        model: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: Option<String>,
    },
}

fn limits(cap: Option<u64>) -> Limits {
    let mut l = Limits::default();
    if let Some(c) = cap {
        l.upsets = c;
    }
    l
}

fn exit_for(verdict: Verdict) -> u8 {
    match verdict {
        Verdict::Pass | Verdict::PassSampled => 0,
        Verdict::Fail => 1,
        Verdict::Inconclusive => 2,
    }
}

fn witness_path(out: &str, suffix: &str) -> String {
    let stem = out.strip_suffix(".json").unwrap_or(out);
    format!("{stem}.{suffix}.witness.json")
}

fn run(cli: Cli) -> Input<u8> {
    match cli.command {
        Command::Check { model, prop, d, a, cutpoints, seed, cap, out, replay } => {
            let limits = limits(cap);
            if let Some(path) = replay {
                let (summary, ok) = check::replay(&io::read_json(&path)?, &limits)?;
                io::emit(&summary, out.as_deref())?;
                return Ok(if ok { 0 } else { 1 });
            }
            let path = model.ok_or_else(|| InputError::new("check needs a model file (or --replay)"))?;
            let model = io::parse_model(&io::read_json(&path)?)?;
            let flags = check::MeasureFlags {
                d,
                a: a.as_deref().map(check::parse_list).transpose()?,
                cutpoints: cutpoints.as_deref().map(check::parse_cutpoints).transpose()?,
            };
            let props = prop
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| check::parse_prop(t, &flags))
                .collect::<Input<Vec<_>>>()?;
            if props.is_empty() {
                return Err(InputError::new("--prop lists no properties"));
            }
            let strategy = FieldStrategy { seed, ..FieldStrategy::default() };
            let outcome = check::check(&model, &props, &limits, &strategy)?;
            io::emit(&outcome.report, out.as_deref())?;
            if let Some(out) = &out {
                for (suffix, w) in &outcome.witnesses {
                    io::emit(w, Some(&witness_path(out, suffix)))?;
                }
            }
            Ok(exit_for(outcome.verdict))
        }
        Command::Orient { graph, d, a, mode, cap, out } => {
            let g = io::parse_graph(&io::read_json(&graph)?)?;
            let spec = match (d, a) {
                (Some(d), None) => AdmissibilitySpec::Occ { d },
                (None, Some(a)) => AdmissibilitySpec::Ball { a: check::parse_list(&a)? },
                _ => return Err(InputError::new("orient needs exactly one of --d and --a")),
            };
            let mode = orient_cmd::Mode::parse(&mode)?;
            let mut limits = Limits::default();
            if let Some(c) = cap {
                limits.orientation_edges = (u64::BITS - 1 - c.max(1).leading_zeros()) as usize;
            }
            let outcome = orient_cmd::orient(&g, &spec, mode, &limits)?;
            io::emit(&outcome.report, out.as_deref())?;
            Ok(if outcome.mismatch { 1 } else { 0 })
        }
        Command::Sweep { config, seed, cap, out } => {
            let config = sweep::SweepConfig::from_json(&io::read_json(&config)?, seed)?;
            let (summary, verdict) = sweep::sweep(&config, &limits(cap))?;
            io::emit(&summary, out.as_deref())?;
            Ok(if verdict == Verdict::Fail { 1 } else { 0 })
        }
        Command::PaperExamples { seed, out } => {
            let (report, reproduced) = examples::showcase(seed, &Limits::default())?;
            io::emit(&report, out.as_deref())?;
            Ok(if reproduced { 0 } else { 1 })
        }
        Command::Refine { model, d, out } => {
            let model = io::parse_model(&io::read_json(&model)?)?;
            let (report, consistent) = refine::refine(&model, d, &Limits::default())?;
            if !consistent {
                eprintln!("error: refined occupancy does not reproduce the original; nothing written");
                return Ok(1);
            }
            io::emit(&report, out.as_deref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
