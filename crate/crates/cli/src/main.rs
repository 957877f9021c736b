//! `sgt`: batch front end for subgroup-test computations. Every numeric
//! output is an exact rational `p/q`; reports are TSV with a `#` header
//! block embedding the full configuration and a content hash of each input.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use sgt_core::actions::FiniteAction;
use sgt_core::compiler;
use sgt_core::error::Error;
use sgt_core::formats;
use sgt_core::hierarchy::{self, SandwichConfig};
use sgt_core::perm;
use sgt_core::rational::{format_q, parse_q};
use sgt_core::subgroup_test::{cnf_test, separation_test, verification_test};
use sgt_core::words::Alphabet;

#[derive(Parser)]
#[command(
    name = "sgt",
    about = "Subgroup tests over free groups: exact values, sandwich bounds, game compilation",
    long_about = None,
    after_help = FORMAT_HELP
)]
struct Cli {
    /// Worker threads for parallel evaluation (results are identical for
    /// any worker count).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

const FORMAT_HELP: &str = "\
FILE FORMATS
  words     one word per line: space-separated letters `a b^-1 a`, identity `e`;
            `#` starts a comment line
  action    `degree <n>` then one line per generator `a: 1 0 3 2`
            (one-line notation; for strategies the first generator is `J`)
  test      `alphabet a,b` then challenge items:
              builtin <p/q> verification R=[w; w]
              builtin <p/q> separation R=[w] L=[w]
              builtin <p/q> clause [+a; -b]
              challenge <p/q> / window: w; w / accept: {}; {w, w} / end
            or a single `compiled` ... `end` block wrapping a game
  game      `vertices x y`, `lengths x <readable> <linear>` per vertex, then
            `edge x y <p/q> lcs <rhs> <col-pos>` or
            `edge x y <p/q> table <bits>:[J+x/L/0;y/L/0] ...` (`-` = no bits)
All probabilities are exact rationals `p/q`; no floating-point input is accepted.";

#[derive(Subcommand)]
enum Command {
    /// Decide whether set A arises as the window of a subgroup inside B.
    CheckPseudo(CheckPseudoArgs),
    /// Exact value of a test against a finite action.
    EvalTest(EvalTestArgs),
    /// Interleaved lower/upper bounds on the sofic and ergodic values.
    Sandwich(SandwichArgs),
    /// Compile a tailored game into its subgroup test.
    CompileGame(CompileGameArgs),
    /// Exact game value of a permutation strategy, with optional sampling.
    EvalStrategy(EvalStrategyArgs),
    /// Round an action into a valid strategy and check the value transfer.
    Transfer(TransferArgs),
    /// Per-generator significance weights of a test (with audit bounds for
    /// compiled tests).
    Significance(SignificanceArgs),
    /// Write the bundled example tests into a directory.
    Gallery(GalleryArgs),
}

#[derive(Args)]
struct CheckPseudoArgs {
    /// Comma-separated generator names, e.g. `a,b`.
    #[arg(long)]
    alphabet: String,
    #[arg(long = "set-a")]
    set_a: PathBuf,
    #[arg(long = "set-b")]
    set_b: PathBuf,
}

#[derive(Args)]
struct EvalTestArgs {
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    action: PathBuf,
}

#[derive(Args)]
struct SandwichArgs {
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 14)]
    max_window: usize,
    #[arg(long, default_value_t = 5)]
    max_degree: usize,
    #[arg(long, default_value_t = 6)]
    max_stages: usize,
    #[arg(long, default_value_t = 300)]
    budget: usize,
    #[arg(long, default_value_t = 200_000)]
    lp_iterations: usize,
    /// Stop once beta - alpha <= gap (exact rational, e.g. 1/100).
    #[arg(long, default_value = "0/1")]
    gap: String,
    /// Seed for the randomized part of the action enumeration.
    #[arg(long)]
    seed: u64,
    /// TSV report path; witness actions are written next to it.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct CompileGameArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalStrategyArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    strategy: PathBuf,
    /// Draw this many answers per edge and print them.
    #[arg(long)]
    sample: Option<usize>,
    /// Seed for sampling; required when --sample is given.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TransferArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    action: PathBuf,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct SignificanceArgs {
    #[arg(long)]
    test: PathBuf,
}

#[derive(Args)]
struct GalleryArgs {
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 1 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global();
    } else {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build_global();
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse { .. } | Error::Input(_) => ExitCode::from(2),
                Error::Exhausted(_) => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn sha256_hex(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    hex::encode(h.finalize())
}

fn header(command: &str, config: &[(String, String)], inputs: &[(&Path, &str)]) -> String {
    let mut out = format!("# sgt {command} report\n");
    let config_text: Vec<String> = config.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let _ = writeln!(out, "# config: {}", config_text.join(" "));
    for (path, content) in inputs {
        let _ = writeln!(
            out,
            "# input {}: sha256={}",
            path.display(),
            sha256_hex(content)
        );
    }
    out
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::CheckPseudo(args) => {
            let alphabet = Alphabet::new(args.alphabet.split(',').map(str::trim))?;
            let a_text = read_file(&args.set_a)?;
            let b_text = read_file(&args.set_b)?;
            let a: BTreeSet<_> = formats::parse_word_list(&alphabet, &a_text)?
                .into_iter()
                .collect();
            let b: BTreeSet<_> = formats::parse_word_list(&alphabet, &b_text)?
                .into_iter()
                .collect();
            let verdict = sgt_core::stallings::is_pseudo_subgroup(alphabet.size(), &a, &b)?;
            if verdict.verdict {
                println!("pseudo-subgroup: yes");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("pseudo-subgroup: no");
                let witness = verdict.witness.expect("negative verdicts carry a witness");
                eprintln!("witness: {}", alphabet.format_word(&witness));
                Ok(ExitCode::from(1))
            }
        }
        Command::EvalTest(args) => {
            let test_text = read_file(&args.test)?;
            let action_text = read_file(&args.action)?;
            let parsed = formats::parse_test(&test_text)?;
            let action = formats::parse_action(&action_text)?;
            let value = parsed.test.value_against_action(&action)?;
            println!("{}", format_q(&value));
            Ok(ExitCode::SUCCESS)
        }
        Command::Sandwich(args) => {
            let test_text = read_file(&args.test)?;
            let parsed = formats::parse_test(&test_text)?;
            let gap = parse_q(&args.gap)?;
            let cfg = SandwichConfig {
                max_stages: args.max_stages,
                max_window: args.max_window,
                max_degree: args.max_degree,
                budget_per_stage: args.budget,
                lp_iteration_cap: args.lp_iterations,
                gap: gap.clone(),
                seed: args.seed,
            };
            let report = hierarchy::sandwich(&parsed.test, &cfg)?;
            let config = vec![
                ("test".to_string(), args.test.display().to_string()),
                ("max_window".to_string(), args.max_window.to_string()),
                ("max_degree".to_string(), args.max_degree.to_string()),
                ("max_stages".to_string(), args.max_stages.to_string()),
                ("budget".to_string(), args.budget.to_string()),
                ("lp_iterations".to_string(), args.lp_iterations.to_string()),
                ("gap".to_string(), format_q(&gap)),
                ("seed".to_string(), args.seed.to_string()),
            ];
            let mut out = header("sandwich", &config, &[(&args.test, &test_text)]);
            out.push_str("stage\talpha\tbeta\twindow_size\tlp_iterations\twitness_file\n");
            for stage in &report.stages {
                let witness_file = args
                    .report
                    .with_extension(format!("stage{}.witness.txt", stage.stage));
                std::fs::write(&witness_file, formats::write_action(&stage.witness))?;
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    stage.stage,
                    format_q(&stage.alpha),
                    format_q(&stage.beta),
                    stage.window_size,
                    stage.lp_iterations,
                    witness_file.display()
                );
            }
            if !report.converged {
                out.push_str("# partial: resources exhausted before reaching the gap\n");
            }
            std::fs::write(&args.report, &out)?;
            if report.converged {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("resources exhausted before reaching the gap; partial report written");
                Ok(ExitCode::from(3))
            }
        }
        Command::CompileGame(args) => {
            let game_text = read_file(&args.game)?;
            let game = formats::parse_game(&game_text)?;
            compiler::compile(&game)?; // validate before writing
            std::fs::write(&args.out, formats::write_compiled_test(&game))?;
            println!("compiled test written to {}", args.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::EvalStrategy(args) => {
            let game_text = read_file(&args.game)?;
            let strategy_text = read_file(&args.strategy)?;
            let game = formats::parse_game(&game_text)?;
            let action = formats::parse_action(&strategy_text)?;
            let sigma = compiler::action_to_strategy(&game, &action)?;
            let value = perm::game_value(&game, &sigma)?;
            println!("{}", format_q(&value));
            if let Some(samples) = args.sample {
                let seed = args
                    .seed
                    .ok_or_else(|| Error::Input("--seed is required with --sample".to_string()))?;
                for (ei, _) in game.edges().iter().enumerate() {
                    for k in 0..samples {
                        let gamma = perm::sample_gamma(
                            &game,
                            &sigma,
                            ei,
                            seed ^ ((ei as u64) << 32) ^ k as u64,
                        )?;
                        let bits: Vec<String> = gamma
                            .values
                            .iter()
                            .map(|(g, b)| format!("{}={}", game.generators()[*g].name, *b as u8))
                            .collect();
                        println!("edge {ei} sample {k}: {}", bits.join(" "));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Transfer(args) => {
            let game_text = read_file(&args.game)?;
            let action_text = read_file(&args.action)?;
            let game = formats::parse_game(&game_text)?;
            let action = formats::parse_action(&action_text)?;
            let report = compiler::transfer_report(&game, &action)?;
            let config = vec![
                ("game".to_string(), args.game.display().to_string()),
                ("action".to_string(), args.action.display().to_string()),
            ];
            let mut out = header(
                "transfer",
                &config,
                &[(&args.game, &game_text), (&args.action, &action_text)],
            );
            out.push_str("metric\tvalue\n");
            let _ = writeln!(out, "lambda\t{}", report.lambda);
            let _ = writeln!(out, "test_value_raw\t{}", format_q(&report.test_value_raw));
            for (label, mass) in compiler::check_labels().iter().zip(&report.fail_mass) {
                let _ = writeln!(out, "fail_mass_{label}\t{}", format_q(mass));
            }
            let _ = writeln!(
                out,
                "test_value_rounded\t{}",
                format_q(&report.test_value_rounded)
            );
            let _ = writeln!(
                out,
                "game_value_rounded\t{}",
                format_q(&report.game_value_rounded)
            );
            let _ = writeln!(
                out,
                "soundness_bound\t{}",
                format_q(&report.soundness_bound)
            );
            let _ = writeln!(out, "bound_satisfied\t{}", report.bound_satisfied);
            let _ = writeln!(
                out,
                "displacement_J\t{}",
                format_q(&report.round.displacement_j)
            );
            for (g, d) in report.round.displacements.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "displacement_{}\t{}",
                    game.generators()[g].name,
                    format_q(d)
                );
            }
            let _ = writeln!(
                out,
                "displacements_within_bounds\t{}",
                report.round.within_bounds
            );
            std::fs::write(&args.report, &out)?;
            println!("transfer report written to {}", args.report.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Significance(args) => {
            let test_text = read_file(&args.test)?;
            let parsed = formats::parse_test(&test_text)?;
            let sig = parsed.test.significance();
            let zeros = sig.zero_generators();
            for g in 0..parsed.test.alphabet().size() as u16 {
                let flag = if zeros.contains(&g) {
                    "\t(zero: never affects the value)"
                } else {
                    ""
                };
                println!(
                    "{}\t{}{}",
                    parsed.test.alphabet().name(g),
                    format_q(sig.weight(g)),
                    flag
                );
            }
            if let Some(compiled) = parsed.compiled {
                let audit = compiler::significance_audit(&compiled)?;
                println!(
                    "audit\tJ\t{}\t<=\t{}",
                    format_q(&audit.j_weight),
                    format_q(&audit.j_bound)
                );
                for (name, weight, bound) in &audit.generators {
                    println!(
                        "audit\t{name}\t{}\t<=\t{}",
                        format_q(weight),
                        format_q(bound)
                    );
                }
                println!("audit_ok\t{}", audit.ok);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gallery(args) => {
            std::fs::create_dir_all(&args.out)?;
            for (name, content) in gallery_files()? {
                std::fs::write(args.out.join(name), content)?;
            }
            println!("gallery written to {}", args.out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// The bundled example tests: a relator verification test, a separation
/// test, a satisfiable 3-CNF test, a contradictory CNF test, and the magic
/// square game with its compiled test.
fn gallery_files() -> Result<Vec<(&'static str, String)>, Error> {
    let ab = Alphabet::new(["a", "b"])?;
    let a_only = Alphabet::new(["a"])?;
    let commutator = ab.parse_word("a b a^-1 b^-1")?;
    let verification = verification_test(ab.clone(), BTreeSet::from([commutator]))?;
    let separation = separation_test(
        a_only.clone(),
        BTreeSet::from([a_only.parse_word("a a")?]),
        BTreeSet::from([a_only.parse_word("a")?]),
    )?;
    let vars = Alphabet::new(["x0", "x1", "x2", "x3"])?;
    let satisfiable = cnf_test(
        vars,
        &[
            vec![(0, false), (1, true), (2, false)],
            vec![(1, false), (3, false), (0, true)],
            vec![(2, true), (3, false), (1, false)],
        ],
    )?;
    let contradiction = cnf_test(Alphabet::new(["x"])?, &[vec![(0, false)], vec![(0, true)]])?;
    let magic = sgt_core::games::magic_square();
    let pauli = perm::magic_square_pauli_strategy(&magic)?;
    let pauli_action = compiler::strategy_to_irs(&magic, &pauli)?;
    let trivial_action = FiniteAction::trivial(a_only.clone());
    let swap_action = FiniteAction::new(
        a_only,
        vec![sgt_core::actions::Permutation::transposition(2, 0, 1)],
    )?;
    Ok(vec![
        ("verification.sgt", formats::write_test(&verification)?),
        ("separation.sgt", formats::write_test(&separation)?),
        ("cnf_satisfiable.sgt", formats::write_test(&satisfiable)?),
        (
            "cnf_contradiction.sgt",
            formats::write_test(&contradiction)?,
        ),
        ("magic_square.tng", formats::write_game(&magic)),
        (
            "magic_square_compiled.sgt",
            formats::write_compiled_test(&magic),
        ),
        (
            "magic_square_pauli.pst",
            formats::write_action(&pauli_action),
        ),
        ("trivial_action.txt", formats::write_action(&trivial_action)),
        ("swap_action.txt", formats::write_action(&swap_action)),
    ])
}
