//! Command-line harness: validate instance documents, run the direct and
//! modular mechanisms, sweep the price of anarchy, verify equilibrium
//! profiles, generate the named instance families and sample trajectories.
//!
//! Exit codes: 0 success (or verified), 1 domain-level negative result
//! (invalid instance, deviation found, parameter out of range), 2 usage or
//! parse error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde_json::json;

use suggestion_auctions::analysis::{
    gen_poa_instance, gen_proxy_counterexample, gen_running_shoes, poa, robustness_profile,
    verify_direct_dsic, verify_modular_nash, verify_proxy, DeviationClass, EquilibriumReport,
    Verdict,
};
use suggestion_auctions::cli::document::{
    game_from_json, game_to_json, parse_rational, Game, ProfileDocument,
};
use suggestion_auctions::cli::report::{rat_cells, rat_json, Format, Report, Table};
use suggestion_auctions::direct::{decompose_payment, run_direct, sample_trajectory};
use suggestion_auctions::model::ReducedGame;
use suggestion_auctions::modular::{
    prescribed_equilibrium, run_modular, Stage1Rule, Stage1Variant,
};
use suggestion_auctions::{Rat, Scalar, TiePolicy};

#[derive(Parser)]
#[command(
    name = "suggestion-auctions",
    version,
    about = "Auctions for sponsored clarifying questions: run, verify, analyze",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Tie-breaking priority: comma-separated labels (question or advertiser
    /// ids) that win argmax ties, in order. Default: instance order.
    #[arg(long, global = true, value_delimiter = ',', value_name = "LABELS")]
    ties: Vec<String>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Significant digits in decimal renderings.
    #[arg(long, global = true, default_value_t = 6, value_name = "DIGITS")]
    precision: u32,
    /// Seed for trajectory sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Table,
    Structured,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Structured => Format::Structured,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    Vcg,
    FirstPrice,
    AllPay,
}

impl From<RuleArg> for Stage1Variant {
    fn from(r: RuleArg) -> Stage1Variant {
        match r {
            RuleArg::Vcg => Stage1Variant::Vcg,
            RuleArg::FirstPrice => Stage1Variant::FirstPrice,
            RuleArg::AllPay => Stage1Variant::AllPay,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MechanismArg {
    Direct,
    Modular,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    RunningShoes,
    Poa,
    Prop1,
}

#[derive(Subcommand)]
enum Command {
    /// Check a game document against the model invariants.
    Validate { path: PathBuf },
    /// Run the end-to-end direct mechanism and its payment decomposition.
    RunDirect {
        path: PathBuf,
        /// Comma-separated bids, one per advertiser. Default: truthful.
        #[arg(long, value_delimiter = ',', conflicts_with = "truthful")]
        bids: Vec<String>,
        /// Bid every advertiser's base value.
        #[arg(long)]
        truthful: bool,
    },
    /// Run a modular two-stage mechanism.
    RunModular {
        path: PathBuf,
        /// Strategy-profile document.
        #[arg(long, conflicts_with_all = ["prescribed", "proxy"])]
        profile: Option<PathBuf>,
        /// Use the prescribed equilibrium profile: truthful stage-2 bids,
        /// expected stage-2 utility as the stage-1 bid.
        #[arg(long, conflicts_with = "proxy")]
        prescribed: bool,
        /// Proxy variant: comma-separated reported values; the platform
        /// derives all bids from them (stage-1 rule is VCG).
        #[arg(long, value_delimiter = ',')]
        proxy: Vec<String>,
        /// Stage-1 payment rule.
        #[arg(long, value_enum, default_value_t = RuleArg::Vcg)]
        rule: RuleArg,
        /// True base values for utility accounting. Default: document values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
    /// Price-of-anarchy sweep over the unbounded-PoA instance family.
    PoaSweep {
        #[arg(long, default_value = "poa")]
        family: String,
        #[arg(long)]
        m_from: usize,
        #[arg(long)]
        m_to: usize,
        /// `auto` (delta = 1/m^2) or a fixed rational.
        #[arg(long, default_value = "auto")]
        delta: String,
        /// Stage-1 payment rule; first-price and all-pay use the robustness
        /// equilibrium profile instead of the prescribed VCG one.
        #[arg(long, value_enum, default_value_t = RuleArg::Vcg)]
        rule: RuleArg,
    },
    /// Search for profitable unilateral deviations.
    Verify {
        path: PathBuf,
        #[arg(long, value_enum)]
        mechanism: MechanismArg,
        /// Strategy-profile document (modular).
        #[arg(long, conflicts_with = "prescribed")]
        profile: Option<PathBuf>,
        /// Verify the prescribed equilibrium profile (modular).
        #[arg(long)]
        prescribed: bool,
        /// Proxy variant: comma-separated report levels tried for every
        /// advertiser (modular).
        #[arg(long, value_delimiter = ',')]
        proxy_grid: Vec<String>,
        /// Comma-separated stage-1/report bid levels, shared by all
        /// advertisers; 0 and each advertiser's value are added. Default:
        /// {0, v/2, v, 2v} per advertiser.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<String>,
        #[arg(long, default_value = "0")]
        epsilon: String,
        #[arg(long, value_enum, default_value_t = RuleArg::Vcg)]
        rule: RuleArg,
    },
    /// Write a named instance family as a game document.
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Number of states/advertisers for the poa family (>= 3).
        #[arg(long)]
        m: Option<usize>,
        /// `auto` (1/m^2) or a fixed rational in (0, 1) (poa family).
        #[arg(long, default_value = "auto")]
        delta: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate one seeded trajectory of the direct mechanism.
    Sample {
        path: PathBuf,
        #[arg(long, value_delimiter = ',', conflicts_with = "truthful")]
        bids: Vec<String>,
        #[arg(long)]
        truthful: bool,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: 2, msg: msg.into() }
    }

    fn domain(msg: impl Into<String>) -> Self {
        Failure { code: 1, msg: msg.into() }
    }
}

impl From<suggestion_auctions::Error> for Failure {
    fn from(e: suggestion_auctions::Error) -> Self {
        Failure::domain(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn tie_policy(labels: &[String]) -> TiePolicy {
    if labels.is_empty() {
        TiePolicy::instance_order()
    } else {
        TiePolicy::prefer(labels.iter().cloned())
    }
}

fn load_game(path: &Path) -> Result<Game, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    game_from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn require_valid(game: &Game, path: &Path) -> Result<ReducedGame<Rat>, Failure> {
    let violations = game.validate();
    if !violations.is_empty() {
        let listing =
            violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n");
        return Err(Failure::domain(format!("{} is invalid:\n{listing}", path.display())));
    }
    Ok(game.reduce()?)
}

fn parse_rationals(args: &[String], what: &str) -> Result<Vec<Rat>, Failure> {
    args.iter()
        .map(|s| parse_rational(s).map_err(|e| Failure::usage(format!("bad {what}: {e}"))))
        .collect()
}

fn bids_or_truthful(game: &ReducedGame<Rat>, bids: &[String]) -> Result<Vec<Rat>, Failure> {
    if bids.is_empty() {
        Ok(game.base_values())
    } else {
        parse_rationals(bids, "bid")
    }
}

fn winner_name(game: &ReducedGame<Rat>, winner: Option<usize>) -> String {
    winner.map_or_else(|| "-".to_string(), |w| game.advertisers[w].id.clone())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let ties = tie_policy(&cli.ties);
    let format: Format = cli.format.into();
    let precision = cli.precision;
    match cli.command {
        Command::Validate { path } => {
            let game = load_game(&path)?;
            let violations = game.validate();
            if violations.is_empty() {
                println!("valid");
                Ok(0)
            } else {
                for v in &violations {
                    println!("{v}");
                }
                Ok(1)
            }
        }

        Command::RunDirect { path, bids, truthful: _ } => {
            let game = load_game(&path)?;
            let reduced = require_valid(&game, &path)?;
            let bids = bids_or_truthful(&reduced, &bids)?;
            let outcome = run_direct(&reduced, &bids, &ties)?;
            let decomposition = decompose_payment(&reduced, &bids, &ties)?;

            let mut report = Report::new("direct");
            let mut summary = Table::new("direct mechanism", &["field", "exact", "decimal"]);
            summary.row(vec!["chosen_question".into(), outcome.chosen_question.clone(), String::new()]);
            let [e, d] = rat_cells(&outcome.expected_welfare, precision);
            summary.row(vec!["expected_welfare".into(), e, d]);
            report.tables.push(summary);

            let mut signals = Table::new(
                format!("signals of {}", outcome.chosen_question),
                &["signal", "winner", "winner_value", "winner_value(dec)", "second_price", "second_price(dec)"],
            );
            for s in &outcome.per_signal {
                let [ve, vd] = rat_cells(&s.winner_effective_value, precision);
                let [pe, pd] = rat_cells(&s.second_price, precision);
                signals.row(vec![s.signal.clone(), winner_name(&reduced, s.winner), ve, vd, pe, pd]);
            }
            report.tables.push(signals);

            let mut advertisers = Table::new(
                "advertisers",
                &[
                    "advertiser",
                    "bid",
                    "delivered",
                    "payment",
                    "payment(dec)",
                    "utility",
                    "utility(dec)",
                    "stage1_externality",
                    "expected_second_price",
                ],
            );
            for (i, info) in reduced.advertisers.iter().enumerate() {
                let parts = &decomposition.per_advertiser[i];
                let [pay_e, pay_d] = rat_cells(&outcome.expected_payment[i], precision);
                let [ut_e, ut_d] = rat_cells(&outcome.expected_utility[i], precision);
                advertisers.row(vec![
                    info.id.clone(),
                    rat_cells(&bids[i], precision)[0].clone(),
                    rat_cells(&outcome.expected_delivered_conversion[i], precision)[0].clone(),
                    pay_e,
                    pay_d,
                    ut_e,
                    ut_d,
                    rat_cells(&parts.stage1_externality, precision)[0].clone(),
                    rat_cells(&parts.expected_second_price, precision)[0].clone(),
                ]);
            }
            report.tables.push(advertisers);

            report.structured = json!({
                "kind": "direct",
                "chosen_question": outcome.chosen_question,
                "expected_welfare": rat_json(&outcome.expected_welfare, precision),
                "per_signal": outcome.per_signal.iter().map(|s| json!({
                    "signal": s.signal,
                    "winner": s.winner.map(|w| reduced.advertisers[w].id.clone()),
                    "winner_effective_value": rat_json(&s.winner_effective_value, precision),
                    "second_price": rat_json(&s.second_price, precision),
                })).collect::<Vec<_>>(),
                "advertisers": reduced.advertisers.iter().enumerate().map(|(i, a)| json!({
                    "id": a.id,
                    "bid": rat_json(&bids[i], precision),
                    "expected_payment": rat_json(&outcome.expected_payment[i], precision),
                    "expected_delivered_conversion": rat_json(&outcome.expected_delivered_conversion[i], precision),
                    "expected_utility": rat_json(&outcome.expected_utility[i], precision),
                    "stage1_externality": rat_json(&decomposition.per_advertiser[i].stage1_externality, precision),
                    "expected_second_price": rat_json(&decomposition.per_advertiser[i].expected_second_price, precision),
                })).collect::<Vec<_>>(),
            });
            print!("{}", report.render(format));
            Ok(0)
        }

        Command::RunModular { path, profile, prescribed, proxy, rule, values } => {
            let game = load_game(&path)?;
            let reduced = require_valid(&game, &path)?;
            let true_values = if values.is_empty() {
                reduced.base_values()
            } else {
                parse_rationals(&values, "value")?
            };
            let (profile, rule) = if !proxy.is_empty() {
                let reports = parse_rationals(&proxy, "report")?;
                (
                    prescribed_equilibrium(&reduced, &reports, &ties)?,
                    Stage1Rule::vcg(ties.clone()),
                )
            } else if prescribed {
                (
                    prescribed_equilibrium(&reduced, &true_values, &ties)?,
                    Stage1Rule::new(rule.into(), ties.clone()),
                )
            } else if let Some(profile_path) = profile {
                let text = fs::read_to_string(&profile_path).map_err(|e| {
                    Failure::usage(format!("cannot read {}: {e}", profile_path.display()))
                })?;
                let doc = ProfileDocument::from_json(&text)
                    .map_err(|e| Failure::usage(format!("{}: {e}", profile_path.display())))?;
                let profile = doc.to_profile(&reduced).map_err(Failure::domain)?;
                (profile, Stage1Rule::new(rule.into(), ties.clone()))
            } else {
                return Err(Failure::usage(
                    "one of --profile, --prescribed or --proxy is required",
                ));
            };
            let outcome = run_modular(&reduced, &profile, &rule, &true_values)?;

            let mut report = Report::new("modular");
            let mut summary = Table::new("modular mechanism", &["field", "exact", "decimal"]);
            summary.row(vec!["stage1_rule".into(), rule.variant.to_string(), String::new()]);
            summary.row(vec!["chosen_question".into(), outcome.chosen_question.clone(), String::new()]);
            let [e, d] = rat_cells(&outcome.expected_welfare, precision);
            summary.row(vec!["expected_welfare".into(), e, d]);
            report.tables.push(summary);

            let mut stage1 = Table::new("stage-1 bids", &["question", "bid_sum", "bid_sum(dec)"]);
            for (q, table) in reduced.questions.iter().enumerate() {
                let sum = profile
                    .advertisers
                    .iter()
                    .fold(Rat::zero(), |acc, p| acc + p.stage1[q].clone());
                let [se, sd] = rat_cells(&sum, precision);
                stage1.row(vec![table.id.clone(), se, sd]);
            }
            report.tables.push(stage1);

            let mut signals = Table::new(
                format!("signals of {}", outcome.chosen_question),
                &["signal", "winner", "stage2_payment", "stage2_payment(dec)"],
            );
            for s in &outcome.per_signal {
                let [pe, pd] = rat_cells(&s.stage2_payment, precision);
                signals.row(vec![s.signal.clone(), winner_name(&reduced, s.winner), pe, pd]);
            }
            report.tables.push(signals);

            let mut advertisers = Table::new(
                "advertisers",
                &["advertiser", "stage1_payment", "stage1_payment(dec)", "utility", "utility(dec)"],
            );
            for (i, info) in reduced.advertisers.iter().enumerate() {
                let [pe, pd] = rat_cells(&outcome.stage1_payments[i], precision);
                let [ue, ud] = rat_cells(&outcome.expected_utility[i], precision);
                advertisers.row(vec![info.id.clone(), pe, pd, ue, ud]);
            }
            report.tables.push(advertisers);

            report.structured = json!({
                "kind": "modular",
                "stage1_rule": rule.variant.to_string(),
                "chosen_question": outcome.chosen_question,
                "expected_welfare": rat_json(&outcome.expected_welfare, precision),
                "stage1_bids": reduced.questions.iter().enumerate().map(|(q, t)| json!({
                    "question": t.id,
                    "bids": profile.advertisers.iter().map(|p| rat_json(&p.stage1[q], precision)).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "stage1_payments": outcome.stage1_payments.iter().map(|p| rat_json(p, precision)).collect::<Vec<_>>(),
                "per_signal": outcome.per_signal.iter().map(|s| json!({
                    "signal": s.signal,
                    "winner": s.winner.map(|w| reduced.advertisers[w].id.clone()),
                    "stage2_payment": rat_json(&s.stage2_payment, precision),
                })).collect::<Vec<_>>(),
                "expected_utility": outcome.expected_utility.iter().map(|u| rat_json(u, precision)).collect::<Vec<_>>(),
            });
            print!("{}", report.render(format));
            Ok(0)
        }

        Command::PoaSweep { family, m_from, m_to, delta, rule } => {
            if family != "poa" {
                return Err(Failure::usage(format!("unknown sweep family `{family}`")));
            }
            if m_from < 3 {
                return Err(Failure::domain(format!("m must be at least 3, got {m_from}")));
            }
            if m_to < m_from {
                return Err(Failure::usage("--m-to must be at least --m-from"));
            }
            let fixed_delta = if delta == "auto" {
                None
            } else {
                Some(parse_rational(&delta).map_err(Failure::usage)?)
            };
            let mut report = Report::new("poa-sweep");
            let mut table = Table::new(
                format!("price of anarchy, rule {}", Stage1Variant::from(rule)),
                &["m", "delta", "optimal", "equilibrium", "equilibrium(dec)", "ratio", "ratio(dec)"],
            );
            let mut rows = Vec::new();
            for m in m_from..=m_to {
                let delta_m = fixed_delta
                    .clone()
                    .unwrap_or_else(|| Rat::from_ratio(1, (m * m) as i64));
                let instance = gen_poa_instance::<Rat>(m, delta_m.clone())?;
                let reduced = instance.reduce()?;
                let values = reduced.base_values();
                let (profile, rule_m) = match Stage1Variant::from(rule) {
                    Stage1Variant::Vcg => (
                        prescribed_equilibrium(&reduced, &values, &ties)?,
                        Stage1Rule::vcg(ties.clone()),
                    ),
                    variant => (
                        robustness_profile(m, delta_m.clone())?,
                        Stage1Rule::new(variant, ties.clone()),
                    ),
                };
                let poa_report = poa(&instance, &profile, &rule_m, &values)?;
                let ratio_cells = match &poa_report.ratio {
                    Some(r) => rat_cells(r, precision),
                    None => ["inf".into(), "inf".into()],
                };
                let [eq_e, eq_d] = rat_cells(&poa_report.equilibrium_welfare, precision);
                table.row(vec![
                    m.to_string(),
                    rat_cells(&delta_m, precision)[0].clone(),
                    rat_cells(&poa_report.optimal_welfare, precision)[0].clone(),
                    eq_e,
                    eq_d,
                    ratio_cells[0].clone(),
                    ratio_cells[1].clone(),
                ]);
                rows.push(json!({
                    "m": m,
                    "delta": rat_json(&delta_m, precision),
                    "optimal_welfare": rat_json(&poa_report.optimal_welfare, precision),
                    "equilibrium_welfare": rat_json(&poa_report.equilibrium_welfare, precision),
                    "ratio": poa_report.ratio.as_ref().map(|r| rat_json(r, precision)),
                }));
            }
            report.tables.push(table);
            report.structured = json!({
                "kind": "poa-sweep",
                "rule": Stage1Variant::from(rule).to_string(),
                "rows": rows,
            });
            print!("{}", report.render(format));
            Ok(0)
        }

        Command::Verify { path, mechanism, profile, prescribed, proxy_grid, grid, epsilon, rule } => {
            let game = load_game(&path)?;
            let reduced = require_valid(&game, &path)?;
            let values = reduced.base_values();
            let epsilon = parse_rational(&epsilon).map_err(Failure::usage)?;
            let shared_grid = if grid.is_empty() {
                None
            } else {
                let mut levels = parse_rationals(&grid, "grid level")?;
                levels.push(Rat::zero());
                levels.extend(values.iter().cloned());
                Some(levels)
            };
            let (label, verification) = match mechanism {
                MechanismArg::Direct => {
                    let mut class = DeviationClass::value_grid(&values);
                    if let Some(levels) = shared_grid {
                        class = class.with_stage1_levels(levels);
                    }
                    ("direct (truthful reporting)".to_string(),
                     verify_direct_dsic(&reduced, &class, epsilon.clone())?)
                }
                MechanismArg::Modular if !proxy_grid.is_empty() => {
                    let levels = parse_rationals(&proxy_grid, "report level")?;
                    let grids = vec![levels; reduced.advertisers.len()];
                    ("modular proxy (truthful reports)".to_string(),
                     verify_proxy(&reduced, &grids, epsilon.clone(), &ties)?)
                }
                MechanismArg::Modular => {
                    let profile = if prescribed {
                        prescribed_equilibrium(&reduced, &values, &ties)?
                    } else if let Some(profile_path) = profile {
                        let text = fs::read_to_string(&profile_path).map_err(|e| {
                            Failure::usage(format!("cannot read {}: {e}", profile_path.display()))
                        })?;
                        ProfileDocument::from_json(&text)
                            .map_err(|e| Failure::usage(format!("{}: {e}", profile_path.display())))?
                            .to_profile(&reduced)
                            .map_err(Failure::domain)?
                    } else {
                        return Err(Failure::usage(
                            "--mechanism modular needs --prescribed, --profile or --proxy-grid",
                        ));
                    };
                    let variant: Stage1Variant = rule.into();
                    let mut class = match variant {
                        Stage1Variant::Vcg => DeviationClass::pivotal_only(&values),
                        _ => DeviationClass::value_grid(&values).with_force_question(false),
                    };
                    if let Some(levels) = shared_grid {
                        class = class.with_stage1_levels(levels);
                    }
                    let rule = Stage1Rule::new(variant, ties.clone());
                    (format!("modular ({variant})"),
                     verify_modular_nash(&reduced, &profile, &rule, &values, &class, epsilon.clone())?)
                }
            };
            print!("{}", verify_report(&reduced, &label, &verification, precision).render(format));
            Ok(match verification.verdict {
                Verdict::NoProfitableDeviationFound => 0,
                Verdict::DeviationFound => 1,
            })
        }

        Command::Gen { family, m, delta, out } => {
            let game = match family {
                FamilyArg::RunningShoes => Game::Bayes(gen_running_shoes()),
                FamilyArg::Prop1 => Game::Reduced(gen_proxy_counterexample()),
                FamilyArg::Poa => {
                    let m = m.ok_or_else(|| Failure::domain("--m is required for the poa family"))?;
                    let delta = if delta == "auto" {
                        if m == 0 {
                            return Err(Failure::domain("m must be at least 3"));
                        }
                        Rat::from_ratio(1, (m * m) as i64)
                    } else {
                        parse_rational(&delta).map_err(Failure::usage)?
                    };
                    Game::Bayes(gen_poa_instance(m, delta)?)
                }
            };
            let text = game_to_json(&game);
            fs::write(&out, text)
                .map_err(|e| Failure::usage(format!("cannot write {}: {e}", out.display())))?;
            println!("wrote {}", out.display());
            Ok(0)
        }

        Command::Sample { path, bids, truthful: _ } => {
            let game = load_game(&path)?;
            let reduced = require_valid(&game, &path)?;
            let instance = game.as_instance().ok_or_else(|| {
                Failure::domain("sampling needs a state-backed instance document")
            })?;
            let bids = bids_or_truthful(&reduced, &bids)?;
            let trajectory = sample_trajectory(instance, &bids, &ties, cli.seed)?;

            let mut report = Report::new("sample");
            let mut table = Table::new(
                format!("trajectory, seed {}", cli.seed),
                &["field", "exact", "decimal"],
            );
            table.row(vec!["state".into(), trajectory.state.clone(), String::new()]);
            table.row(vec!["question".into(), trajectory.question.clone(), String::new()]);
            table.row(vec!["signal".into(), trajectory.signal.clone(), String::new()]);
            table.row(vec![
                "winner".into(),
                trajectory.winner.clone().unwrap_or_else(|| "-".into()),
                String::new(),
            ]);
            let [pe, pd] = rat_cells(&trajectory.second_price, precision);
            table.row(vec!["second_price".into(), pe, pd]);
            report.tables.push(table);
            report.structured = json!({
                "kind": "sample",
                "seed": cli.seed,
                "state": trajectory.state,
                "question": trajectory.question,
                "signal": trajectory.signal,
                "winner": trajectory.winner,
                "second_price": rat_json(&trajectory.second_price, precision),
            });
            print!("{}", report.render(format));
            Ok(0)
        }
    }
}

fn verify_report(
    game: &ReducedGame<Rat>,
    label: &str,
    verification: &EquilibriumReport<Rat>,
    precision: u32,
) -> Report {
    let mut report = Report::new("equilibrium");
    let mut summary = Table::new(format!("deviation search: {label}"), &["field", "value"]);
    summary.row(vec!["verdict".into(), verification.verdict.to_string()]);
    summary.row(vec![
        "epsilon".into(),
        rat_cells(&verification.epsilon, precision)[0].clone(),
    ]);
    summary.row(vec![
        "class".into(),
        if verification.complete_class { "complete".into() } else { "declared grids only".into() },
    ]);
    report.tables.push(summary);

    let mut table = Table::new(
        "best unilateral deviations",
        &["advertiser", "best_gain", "best_gain(dec)", "deviation"],
    );
    for f in &verification.per_advertiser {
        let [ge, gd] = rat_cells(&f.best_gain, precision);
        table.row(vec![
            f.advertiser.clone(),
            ge,
            gd,
            f.best_deviation.clone().unwrap_or_else(|| "-".into()),
        ]);
    }
    report.tables.push(table);

    report.structured = json!({
        "kind": "equilibrium",
        "search": label,
        "verdict": verification.verdict.to_string(),
        "epsilon": rat_json(&verification.epsilon, precision),
        "complete_class": verification.complete_class,
        "advertisers": verification.per_advertiser.iter().map(|f| json!({
            "id": f.advertiser,
            "best_gain": rat_json(&f.best_gain, precision),
            "best_deviation": f.best_deviation,
        })).collect::<Vec<_>>(),
    });
    let _ = game;
    report
}
