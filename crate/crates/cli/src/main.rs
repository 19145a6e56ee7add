//! `smoc`: normalize, compare, count and verify compositions of self-gluings
//! and mergers.
//!
//! Exit codes: 0 on success/pass, 1 on a failed check or inequality, 2 on
//! usage, parse, or resource errors.

use clap::{Parser, Subcommand};
use smoc_core::expr::{expr_to_raw, parse};
use smoc_core::normalform::{normalize, Mode, NormalForm};
use smoc_core::oracle::{closure, DEFAULT_LIMIT};
use smoc_core::trees::purify;
use smoc_core::verify::{
    check_all, check_diamond, check_relation_ranks, check_rho_identity, check_shadows, Report,
};

#[derive(Parser)]
#[command(name = "smoc", version, about = "Term calculus for self-gluings and mergers")]
struct Cli {
    /// Resource guard: largest closure universe the oracles may enumerate.
    #[arg(long, global = true, env = "SMOC_LIMIT", default_value_t = DEFAULT_LIMIT)]
    limit: usize,
    /// Seed for the randomized agreement suite run by `verify all`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize an expression to its matching normal form (JSON on stdout).
    Normalize {
        expr: String,
        /// Use the odd (signed) mode.
        #[arg(long)]
        odd: bool,
    },
    /// Decide whether two expressions denote the same class.
    Eq {
        expr1: String,
        expr2: String,
        /// Use the odd (signed) mode.
        #[arg(long)]
        odd: bool,
    },
    /// Count rewrite classes of one component.
    Count {
        /// Component type, e.g. "(2,2;4)".
        #[arg(long = "type")]
        ty: String,
        /// Bigrade "(s,m)": gluing and merger counts.
        #[arg(long)]
        bigrade: String,
    },
    /// Run verification checks and print their reports as JSON.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// The double-gluing reindexing identity, exhaustively up to max-n.
    Rho {
        #[arg(long, default_value_t = 9)]
        max_n: usize,
    },
    /// Shadow invariance on weight-3 mixed components.
    Shadows {
        #[arg(long, default_value_t = 7)]
        max_color: usize,
    },
    /// Weight-3 class counts against matching normal-form counts.
    Diamond {
        #[arg(long, default_value_t = 8)]
        max_color: usize,
    },
    /// Exact relation-span ranks.
    Ranks {
        #[arg(long, default_value_t = 6)]
        max: usize,
    },
    /// Every check at acceptance scale.
    All {
        #[arg(long, default_value_t = 8)]
        max: usize,
    },
}

fn die(code: i32, message: impl std::fmt::Display) -> ! {
    eprintln!("smoc: {message}");
    std::process::exit(code)
}

fn parse_element(text: &str) -> smoc_core::Element {
    let expr = parse(text).unwrap_or_else(|e| die(2, e));
    let raw = expr_to_raw(&expr).unwrap_or_else(|e| die(2, e));
    purify(&raw).unwrap_or_else(|e| die(2, e))
}

fn normal_form_of(text: &str, mode: Mode) -> NormalForm {
    normalize(&parse_element(text), mode).unwrap_or_else(|e| die(2, e))
}

/// Parses "(v1,v2,..,vr;v0)".
fn parse_type(text: &str) -> (Vec<usize>, usize) {
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or_else(|| die(2, format!("type must look like \"(v1,..,vr;v0)\": {text}")));
    let (ins, out) = inner
        .split_once(';')
        .unwrap_or_else(|| die(2, format!("type must contain ';': {text}")));
    let inputs: Vec<usize> = ins
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .unwrap_or_else(|_| die(2, format!("bad color {s:?} in type {text}")))
        })
        .collect();
    let output = out
        .trim()
        .parse()
        .unwrap_or_else(|_| die(2, format!("bad output color in type {text}")));
    (inputs, output)
}

/// Parses "(s,m)".
fn parse_bigrade(text: &str) -> (usize, usize) {
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or_else(|| die(2, format!("bigrade must look like \"(s,m)\": {text}")));
    let (s, m) = inner
        .split_once(',')
        .unwrap_or_else(|| die(2, format!("bigrade must contain ',': {text}")));
    let parse_one = |v: &str| {
        v.trim()
            .parse()
            .unwrap_or_else(|_| die(2, format!("bad bigrade entry {v:?}")))
    };
    (parse_one(s), parse_one(m))
}

fn emit_reports(reports: &[Report]) -> i32 {
    println!(
        "{}",
        serde_json::to_string_pretty(reports).expect("reports serialize")
    );
    for r in reports {
        eprintln!(
            "{}: {} ({} ms)",
            r.check,
            if r.pass { "pass" } else { "FAIL" },
            r.elapsed_ms
        );
    }
    i32::from(!reports.iter().all(|r| r.pass))
}

fn main() {
    let cli = Cli::parse();
    let limit = cli.limit;
    let code = match cli.command {
        Command::Normalize { expr, odd } => {
            let mode = if odd { Mode::Odd } else { Mode::Even };
            let nf = normal_form_of(&expr, mode);
            println!("{}", serde_json::to_string_pretty(&nf).expect("serialize"));
            0
        }
        Command::Eq { expr1, expr2, odd } => {
            let mode = if odd { Mode::Odd } else { Mode::Even };
            let a = normal_form_of(&expr1, mode);
            let b = normal_form_of(&expr2, mode);
            if a == b {
                println!("equal");
                0
            } else if a.eq_up_to_sign(&b) {
                println!("equal-up-to-sign(-1)");
                1
            } else {
                println!("distinct");
                1
            }
        }
        Command::Count { ty, bigrade } => {
            let (inputs, output) = parse_type(&ty);
            let (s, m) = parse_bigrade(&bigrade);
            let part = closure(&inputs, output, s, m, Mode::Even, limit)
                .unwrap_or_else(|e| die(2, e));
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "type": ty,
                    "bigrade": bigrade,
                    "elements": part.len(),
                    "classes": part.n_classes(),
                }))
                .expect("serialize")
            );
            0
        }
        Command::Verify { what } => {
            let result = match what {
                VerifyCmd::Rho { max_n } => check_rho_identity(max_n).map(|r| vec![r]),
                VerifyCmd::Shadows { max_color } => {
                    check_shadows(max_color, limit).map(|r| vec![r])
                }
                VerifyCmd::Diamond { max_color } => {
                    check_diamond(max_color, limit).map(|r| vec![r])
                }
                VerifyCmd::Ranks { max } => {
                    check_relation_ranks(max, max, max.min(5), limit).map(|r| vec![r])
                }
                VerifyCmd::All { max } => check_all(max, limit, cli.seed),
            };
            match result {
                Ok(reports) => emit_reports(&reports),
                Err(e) => die(2, e),
            }
        }
    };
    std::process::exit(code);
}
