use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use posmod_cli::context::Context;
use posmod_cli::report::{report, Report};
use posmod_cli::verify::{render_suite_text, verify_paper_suite};
use posmod_core::amalgam::{
    amalgamate, strong_condition_holds, AmalgamationKind, LegKind, SearchOutcome,
    StrongVariant,
};
use posmod_core::apc::{ApcMode, DeltaFormula, DeltaSet};
use posmod_core::error::{Error, Result};
use posmod_core::formula::PositiveFormula;
use posmod_core::morphism::classify;
use posmod_core::parse::{parse_formula, parse_map};
use posmod_core::pool::{FormulaPool, SentencePool};
use posmod_core::term::Var;

#[derive(Parser)]
#[command(name = "posmod", version, about = "Workbench for positive logic over finite structures")]
struct Cli {
    /// Load an additional workspace file (DSL) before the bundled ones.
    #[arg(long, global = true)]
    workspace: Option<std::path::PathBuf>,

    /// Emit the machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Seed for the randomized property rows.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify an element map between two named structures.
    Classify {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Element map, written `0:1,1:0`.
        #[arg(long)]
        map: String,
    },
    /// Materialize a model class and print its members.
    Enumerate {
        #[arg(long)]
        class: String,
    },
    /// Closure and amalgamation checks.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Pool formulas contradicting a formula across a class.
    Ctr {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        class: String,
        #[arg(long, default_value = "qf(atoms<=2, vars<=2)")]
        pool: String,
    },
    /// Search for a uniform apc certificate for one split formula.
    ApcWitness {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        class: String,
        #[arg(long)]
        phi: String,
        /// Comma-separated parameter variables of the formula; the rest are
        /// existential.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, default_value_t = posmod_core::apc::DEFAULT_WITNESS_WIDTH)]
        width: usize,
    },
    /// Amalgamate a named span within a budget class.
    Amalgamate {
        #[arg(long)]
        span: String,
        /// The quadruple of map kinds, e.g. `h,i,i,h`.
        #[arg(long, default_value = "h,h,h,h")]
        kind: String,
        #[arg(long)]
        budget: String,
        /// Sentence pool expression for bounded `s` kinds.
        #[arg(long)]
        pool: Option<String>,
        /// Require the strong-diagram condition on the square.
        #[arg(long)]
        strong: bool,
    },
    /// Run the bundled verification suite.
    VerifyPaper,
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Positively closed within a class.
    Pc(StructureClassArgs),
    /// Almost positively closed for a quantifier-free pool.
    Apc {
        #[command(flatten)]
        base: StructureClassArgs,
        #[arg(long, default_value = "qf(atoms<=2, vars<=2)")]
        delta: String,
        /// Range continuations over pc members only.
        #[arg(long)]
        weak: bool,
    },
    /// Positive strong amalgamation basis.
    Psa {
        #[command(flatten)]
        base: StructureClassArgs,
        #[arg(long)]
        budget: String,
    },
    /// Strong amalgamation basis over all members.
    Hsa {
        #[command(flatten)]
        base: StructureClassArgs,
        #[arg(long)]
        budget: String,
    },
    /// Generic kind-indexed amalgamation basis.
    Amalg {
        #[command(flatten)]
        base: StructureClassArgs,
        #[arg(long)]
        budget: String,
        #[arg(long, default_value = "h,h,h,h")]
        kind: String,
        #[arg(long)]
        pool: Option<String>,
    },
    /// Closed formula: realizations in pc continuations stay in the image.
    Closed {
        #[command(flatten)]
        base: StructureClassArgs,
        #[arg(long)]
        phi: String,
        /// Comma-separated existential variables; the rest are parameters.
        #[arg(long, default_value = "")]
        exists: String,
        /// Parameter instantiation, written `x:0,z:1`; omit to check all.
        #[arg(long)]
        at: Option<String>,
    },
    /// Algebraic formula relative to a class.
    Algebraic {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        class: String,
        #[arg(long, default_value = "qf(atoms<=2, vars<=2)")]
        pool: String,
    },
    /// Model completeness of a class.
    ModelComplete {
        #[arg(long)]
        class: String,
    },
}

#[derive(Args)]
struct StructureClassArgs {
    #[arg(long)]
    structure: String,
    #[arg(long)]
    class: String,
}

fn load_context(cli: &Cli) -> Result<Context> {
    match &cli.workspace {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Workspace(format!("cannot read {}: {e}", path.display())))?;
            Context::with_user_workspace(&text)
        }
        None => Context::bundled(),
    }
}

fn parse_kind_list(ctx: &Context, text: &str, pool: Option<&str>, sig: &posmod_core::signature::Signature) -> Result<AmalgamationKind> {
    let letters: Vec<&str> = text.split(',').map(str::trim).collect();
    if letters.len() != 4 {
        return Err(Error::Workspace(format!(
            "kind `{text}` must be four of h,e,i,s"
        )));
    }
    let mut kinds = Vec::new();
    for letter in letters {
        kinds.push(match letter {
            "h" => LegKind::Hom,
            "e" => LegKind::Emb,
            "i" => LegKind::Imm,
            "s" => {
                let expr = pool.unwrap_or("pool(atoms<=1, vars<=1, params<=1)");
                let spec = ctx.resolve_pool_spec(expr, sig)?;
                LegKind::SImmBounded(SentencePool::generate(spec)?)
            }
            other => {
                return Err(Error::Workspace(format!("unknown map kind `{other}`")));
            }
        });
    }
    let mut it = kinds.into_iter();
    Ok(AmalgamationKind {
        f: it.next().unwrap(),
        g: it.next().unwrap(),
        g_prime: it.next().unwrap(),
        f_prime: it.next().unwrap(),
    })
}

/// Split a formula's free variables into (params, exists) given the comma
/// list of one side.
fn split_vars(
    phi: &PositiveFormula,
    listed: &str,
    listed_is_exists: bool,
) -> (Vec<Var>, Vec<Var>) {
    let listed: Vec<Var> = listed
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Var::new)
        .collect();
    let (mut params, mut exists) = (Vec::new(), Vec::new());
    for v in phi.free_vars() {
        let in_list = listed.contains(&v);
        if in_list == listed_is_exists {
            exists.push(v);
        } else {
            params.push(v);
        }
    }
    (params, exists)
}

fn run(cli: &Cli) -> Result<Report> {
    let start = Instant::now();
    let ctx = load_context(cli)?;
    let elapsed = |start: Instant| start.elapsed().as_millis();
    match &cli.command {
        Command::Classify { from, to, map } => {
            let (_, a) = ctx.find_structure(from)?;
            let (_, b) = ctx.find_structure(to)?;
            if !a.signature().compatible_with(b.signature()) {
                return Err(Error::SignatureMismatch(format!("{from} vs {to}")));
            }
            let map = parse_map(map, a.size())?;
            let morphism = classify(a, b, &map)?;
            let hom = morphism.kinds.hom == Some(true);
            // witnesses: the retraction or the violation, plus the
            // strong-immersion counterexample sentence
            let (immersion, s_immersion) = if hom {
                (
                    Some(posmod_core::morphism::is_immersion(a, b, &map)?),
                    Some(posmod_core::morphism::is_s_immersion_absolute(a, b, &map)?),
                )
            } else {
                (None, None)
            };
            Ok(report(
                "classify",
                Some(hom),
                vec![],
                &json!({
                    "from": from,
                    "to": to,
                    "map": morphism.map,
                    "kinds": morphism.kinds,
                    "immersion": immersion,
                    "s_immersion": s_immersion,
                }),
                elapsed(start),
            ))
        }
        Command::Enumerate { class } => {
            let class = ctx.resolve_class(class)?;
            Ok(report(
                "enumerate",
                None,
                vec![class.tag().to_string()],
                &class.to_json(),
                elapsed(start),
            ))
        }
        Command::Ctr { phi, class, pool } => {
            let class = ctx.resolve_class(class)?;
            let phi = parse_formula(class.signature(), phi)?;
            let spec = ctx.resolve_pool_spec(pool, class.signature())?;
            let pool = FormulaPool::generate(spec)?;
            let contradictors = posmod_core::semantics::ctr(&class, &phi, &pool)?;
            Ok(report(
                "ctr",
                None,
                vec![class.tag().to_string(), pool.tag()],
                &json!({
                    "phi": phi.to_string(),
                    "count": contradictors.len(),
                    "contradictors": contradictors.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                }),
                elapsed(start),
            ))
        }
        Command::ApcWitness {
            structure,
            class,
            phi,
            params,
            width,
        } => {
            let (_, a) = ctx.find_structure(structure)?;
            let class = ctx.resolve_class(class)?;
            let phi = parse_formula(class.signature(), phi)?;
            let (params, exists) = split_vars(&phi, params, false);
            let delta = DeltaFormula::new(phi, params, exists)?;
            let witness = posmod_core::apc::apc_witness(a, &class, &delta, *width)?;
            Ok(report(
                "apc-witness",
                Some(witness.is_some()),
                vec![class.tag().to_string()],
                &json!({
                    "structure": structure,
                    "formula": delta.to_string(),
                    "width": width,
                    "witness": witness,
                }),
                elapsed(start),
            ))
        }
        Command::Amalgamate {
            span,
            kind,
            budget,
            pool,
            strong,
        } => {
            let span = ctx.find_span(span)?;
            let kind = parse_kind_list(&ctx, kind, pool.as_deref(), span.apex.signature())?;
            let budget = ctx.resolve_budget(budget)?;
            let outcome = amalgamate(&span, &budget, &kind, *strong)?;
            let (verdict, detail) = match &outcome {
                SearchOutcome::Found(square) => {
                    let strong_check = strong_condition_holds(&span, square);
                    (
                        Some(true),
                        json!({
                            "square": square.describe(),
                            "strong_condition": strong_check,
                        }),
                    )
                }
                SearchOutcome::NoneWithinBudget => {
                    (Some(false), json!({"outcome": "none-within-budget"}))
                }
                // an aborted stratum is indecision, not a false verdict
                SearchOutcome::Aborted { size, count, cap } => {
                    return Err(Error::SizeBudgetExceeded {
                        size: *size,
                        count: *count,
                        cap: *cap,
                    });
                }
            };
            Ok(report(
                "amalgamate",
                verdict,
                vec![budget.tag(), kind.tag()],
                &detail,
                elapsed(start),
            ))
        }
        Command::VerifyPaper => {
            let suite = verify_paper_suite(cli.seed)?;
            let verdict = suite.all_asserted_pass;
            if !cli.json {
                println!("{}", render_suite_text(&suite));
            }
            Ok(report(
                "verify-paper",
                Some(verdict),
                vec!["bundled finite classes; see per-row tags".into()],
                &suite,
                elapsed(start),
            ))
        }
        Command::Check(check) => run_check(&ctx, check, start),
    }
}

fn run_check(ctx: &Context, check: &CheckCommand, start: Instant) -> Result<Report> {
    let elapsed = |start: Instant| start.elapsed().as_millis();
    match check {
        CheckCommand::Pc(args) => {
            let (_, a) = ctx.find_structure(&args.structure)?;
            let class = ctx.resolve_class(&args.class)?;
            let verdict = posmod_core::semantics::is_pc_in(a, &class)?;
            Ok(report(
                "check pc",
                Some(verdict.holds),
                vec![verdict.scope.clone()],
                &verdict,
                elapsed(start),
            ))
        }
        CheckCommand::Apc { base, delta, weak } => {
            let (_, a) = ctx.find_structure(&base.structure)?;
            let class = ctx.resolve_class(&base.class)?;
            let spec = ctx.resolve_pool_spec(delta, class.signature())?;
            let pool = FormulaPool::generate(spec)?;
            let delta = DeltaSet::from_pool(&pool);
            let mode = if *weak { ApcMode::Wpc } else { ApcMode::Apc };
            let verdict = posmod_core::apc::is_apc_in(a, &class, &delta, mode)?;
            Ok(report(
                "check apc",
                Some(verdict.holds),
                vec![verdict.scope.clone(), verdict.delta_tag.clone()],
                &verdict,
                elapsed(start),
            ))
        }
        CheckCommand::Psa { base, budget } | CheckCommand::Hsa { base, budget } => {
            let variant = match check {
                CheckCommand::Psa { .. } => StrongVariant::Psa,
                _ => StrongVariant::Hsa,
            };
            let (_, a) = ctx.find_structure(&base.structure)?;
            let class = ctx.resolve_class(&base.class)?;
            let budget = ctx.resolve_budget(budget)?;
            let verdict = posmod_core::amalgam::is_strong_basis(a, &class, &budget, variant)?;
            Ok(report(
                if variant == StrongVariant::Psa {
                    "check psa"
                } else {
                    "check hsa"
                },
                Some(verdict.holds),
                vec![verdict.scope.clone(), verdict.budget.clone()],
                &verdict,
                elapsed(start),
            ))
        }
        CheckCommand::Amalg {
            base,
            budget,
            kind,
            pool,
        } => {
            let (_, a) = ctx.find_structure(&base.structure)?;
            let class = ctx.resolve_class(&base.class)?;
            let kind = parse_kind_list(ctx, kind, pool.as_deref(), class.signature())?;
            let budget = ctx.resolve_budget(budget)?;
            let verdict = posmod_core::amalgam::is_amalg_basis(a, &class, &budget, &kind)?;
            Ok(report(
                "check amalg",
                Some(verdict.holds),
                vec![verdict.scope.clone(), verdict.budget.clone(), kind.tag()],
                &verdict,
                elapsed(start),
            ))
        }
        CheckCommand::Closed {
            base,
            phi,
            exists,
            at,
        } => {
            let (_, a) = ctx.find_structure(&base.structure)?;
            let class = ctx.resolve_class(&base.class)?;
            let phi = parse_formula(class.signature(), phi)?;
            let (params, exists) = split_vars(&phi, exists, true);
            let delta = DeltaFormula::new(phi, params, exists)?;
            let verdict = match at {
                Some(text) => {
                    let assignment: std::collections::BTreeMap<String, usize> = text
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(|part| {
                            let (v, e) = part.split_once(':').ok_or_else(|| {
                                Error::Workspace(format!("bad parameter binding `{part}`"))
                            })?;
                            let e: usize = e.trim().parse().map_err(|_| {
                                Error::Workspace(format!("bad element in `{part}`"))
                            })?;
                            Ok((v.trim().to_string(), e))
                        })
                        .collect::<Result<_>>()?;
                    let tuple: Vec<usize> = delta
                        .params
                        .iter()
                        .map(|v| {
                            assignment.get(v.name()).copied().ok_or_else(|| {
                                Error::Workspace(format!("parameter `{v}` not bound"))
                            })
                        })
                        .collect::<Result<_>>()?;
                    posmod_core::apc::is_closed_formula(a, &class, &delta, &tuple)?
                }
                None => posmod_core::apc::is_closed_delta(a, &class, &delta)?,
            };
            Ok(report(
                "check closed",
                Some(verdict.holds),
                vec![verdict.scope.clone()],
                &verdict,
                elapsed(start),
            ))
        }
        CheckCommand::Algebraic { phi, class, pool } => {
            let class = ctx.resolve_class(class)?;
            let phi = parse_formula(class.signature(), phi)?;
            let spec = ctx.resolve_pool_spec(pool, class.signature())?;
            let pool = FormulaPool::generate(spec)?;
            let verdict = posmod_core::apc::is_algebraic(&class, &phi, &pool)?;
            Ok(report(
                "check algebraic",
                Some(verdict.holds),
                vec![verdict.scope.clone(), pool.tag()],
                &verdict,
                elapsed(start),
            ))
        }
        CheckCommand::ModelComplete { class } => {
            let class = ctx.resolve_class(class)?;
            let verdict = posmod_core::semantics::is_model_complete_in(&class)?;
            Ok(report(
                "check model-complete",
                Some(verdict.holds),
                vec![verdict.scope.clone()],
                &verdict,
                elapsed(start),
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", report.render_json());
            } else {
                println!("{}", report.render_text());
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            let failure = report(
                "error",
                None,
                vec![],
                &json!({ "error": e.to_string() }),
                0,
            );
            if cli.json {
                println!("{}", failure.render_json());
            }
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
