//! `starq`: batch front end for the star-product engine.

mod commands;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use problem::{Problem, ProblemSpec};

#[derive(Parser)]
#[command(name = "starq", version, about = "Exact star-products and their equivalence to the Moyal product")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the star-product axioms and quantum canonicity.
    Validate(Common),
    /// Derive the equivalence morphism order by order and verify it.
    Derive(Common),
    /// Compare closed-form second and fourth order morphisms with the recursion.
    VerifyTables(Common),
    /// Evaluate f ⋆ g, the star bracket and S f.
    Apply {
        #[command(flatten)]
        common: Common,
        #[arg(long = "f", allow_hyphen_values = true)]
        f: String,
        #[arg(long = "g", allow_hyphen_values = true)]
        g: String,
    },
}

#[derive(Args)]
struct Common {
    /// Problem specification (JSON).
    spec: PathBuf,
    /// Override the order N of the specification.
    #[arg(long)]
    order: Option<usize>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave timing out of the report, making it byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Total monomial degree bound for the verification checks.
    #[arg(long)]
    max_degree: Option<u32>,
}

/// One named pass/fail line; the report status is the conjunction.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: Option<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Command output before the common envelope is added.
pub struct Outcome {
    pub checks: Vec<Check>,
    pub body: Value,
}

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;

fn load(common: &Common) -> Result<Problem, String> {
    let text = std::fs::read_to_string(&common.spec).map_err(|e| format!("{}: {e}", common.spec.display()))?;
    ProblemSpec::from_json(&text)?.build(common.order)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Validate(c) => ("validate", c),
        Command::Derive(c) => ("derive", c),
        Command::VerifyTables(c) => ("verify-tables", c),
        Command::Apply { common, .. } => ("apply", common),
    };
    let start = Instant::now();
    let problem = match load(common) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let max_degree = common.max_degree.or(problem.spec.max_degree).unwrap_or(4);
    let outcome = match &cli.command {
        Command::Validate(_) => commands::validate(&problem, max_degree),
        Command::Derive(_) => commands::derive(&problem, max_degree),
        Command::VerifyTables(_) => commands::verify_tables(&problem, max_degree),
        Command::Apply { f, g, .. } => commands::apply(&problem, f, g),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };

    let passed = outcome.checks.iter().all(|c| c.passed);
    let mut report = json!({
        "command": name,
        "engine_version": starq_core::VERSION,
        "problem": {
            "kind": problem.spec.kind.as_str(),
            "n": problem.spec.n,
            "casimirs": problem.spec.casimirs,
            "order": problem.order,
            "max_degree": max_degree,
        },
        "status": if passed { "pass" } else { "fail" },
        "checks": outcome.checks.iter().map(|c| json!({
            "name": c.name,
            "passed": c.passed,
            "detail": c.detail,
        })).collect::<Vec<_>>(),
        "result": outcome.body,
    });
    if !common.no_timing {
        report["timing"] = json!({ "elapsed_ms": start.elapsed().as_millis() as u64 });
    }
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT);
            }
        }
        None => print!("{text}"),
    }
    for c in &outcome.checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        match &c.detail {
            Some(d) => eprintln!("{mark} {}: {d}", c.name),
            None => eprintln!("{mark} {}", c.name),
        }
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
