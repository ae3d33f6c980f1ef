//! Modular two-stage mechanisms.
//!
//! Stage 1 auctions off the question (VCG, first-price or all-pay over the
//! "highest sum of bids" allocation rule); after the signal is observed,
//! stage 2 runs a second-price auction on effective values. Advertisers
//! commit to a full contingent plan up front: a bid per question plus a bid
//! per (question, signal) pair, so the two stages are one normal-form game.

use crate::direct::{argmax, row_stats, TiePolicy};
use crate::model::ReducedGame;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// One advertiser's contingent plan.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvertiserStrategy<S> {
    /// Stage-1 bid per question, in game order.
    pub stage1: Vec<S>,
    /// Stage-2 bid per question per positive-probability signal, indexed
    /// like the game's signal tables.
    pub stage2: Vec<Vec<S>>,
}

/// A full strategy profile, one plan per advertiser.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile<S> {
    pub advertisers: Vec<AdvertiserStrategy<S>>,
}

impl<S: Scalar> StrategyProfile<S> {
    /// Zero stage-1 bids; each advertiser bids a constant in every stage-2
    /// auction (its entry of `stage2_bids`).
    pub fn constant_stage2(game: &ReducedGame<S>, stage2_bids: &[S]) -> Result<Self> {
        game.check_bids(stage2_bids)?;
        let advertisers = stage2_bids
            .iter()
            .map(|b| AdvertiserStrategy {
                stage1: vec![S::zero(); game.questions.len()],
                stage2: game
                    .questions
                    .iter()
                    .map(|q| vec![b.clone(); q.signals.len()])
                    .collect(),
            })
            .collect();
        Ok(StrategyProfile { advertisers })
    }

    /// Shape and sign check against a game: one plan per advertiser, a
    /// stage-1 bid per question, a stage-2 bid per positive-probability
    /// signal, everything non-negative.
    pub fn check(&self, game: &ReducedGame<S>) -> Result<()> {
        if self.advertisers.len() != game.advertisers.len() {
            return Err(Error::BidArity {
                expected: game.advertisers.len(),
                got: self.advertisers.len(),
            });
        }
        for (i, (plan, info)) in self.advertisers.iter().zip(&game.advertisers).enumerate() {
            if plan.stage1.len() != game.questions.len() {
                return Err(Error::IncompleteProfile(format!(
                    "advertiser `{}` has {} stage-1 bids for {} questions",
                    info.id,
                    plan.stage1.len(),
                    game.questions.len()
                )));
            }
            if plan.stage2.len() != game.questions.len() {
                return Err(Error::IncompleteProfile(format!(
                    "advertiser `{}` has stage-2 bids for {} of {} questions",
                    info.id,
                    plan.stage2.len(),
                    game.questions.len()
                )));
            }
            for (q, bids) in game.questions.iter().zip(&plan.stage2) {
                if bids.len() != q.signals.len() {
                    return Err(Error::IncompleteProfile(format!(
                        "advertiser `{}`, question `{}`: {} stage-2 bids for {} signals",
                        info.id,
                        q.id,
                        bids.len(),
                        q.signals.len()
                    )));
                }
            }
            let negative = plan.stage1.iter().any(|b| b < &S::zero())
                || plan.stage2.iter().flatten().any(|b| b < &S::zero());
            if negative {
                return Err(Error::NegativeBid(i));
            }
        }
        Ok(())
    }

    /// Stage-1 bids as an advertiser-by-question matrix.
    pub fn stage1_matrix(&self) -> Vec<Vec<S>> {
        self.advertisers.iter().map(|a| a.stage1.clone()).collect()
    }

    fn stage2_row_bids(&self, question: usize, row: usize) -> Vec<S> {
        self.advertisers.iter().map(|a| a.stage2[question][row].clone()).collect()
    }
}

/// Payment rule of the stage-1 question auction. All three share the
/// "highest sum of bids" selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage1Variant {
    Vcg,
    FirstPrice,
    AllPay,
}

impl std::fmt::Display for Stage1Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage1Variant::Vcg => "vcg",
            Stage1Variant::FirstPrice => "first-price",
            Stage1Variant::AllPay => "all-pay",
        })
    }
}

/// Stage-1 mechanism: payment variant plus the tie policy used for both the
/// question argmax and (under first-price) the payer argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage1Rule {
    pub variant: Stage1Variant,
    pub ties: TiePolicy,
}

impl Stage1Rule {
    pub fn new(variant: Stage1Variant, ties: TiePolicy) -> Self {
        Stage1Rule { variant, ties }
    }

    pub fn vcg(ties: TiePolicy) -> Self {
        Stage1Rule::new(Stage1Variant::Vcg, ties)
    }
}

/// Result of the stage-1 question auction.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage1Outcome<S> {
    pub chosen: usize,
    pub payments: Vec<S>,
}

/// Result of one stage-2 auction.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage2Outcome<S> {
    pub winner: Option<usize>,
    pub payment: S,
}

/// Outcome of one signal under a modular run.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularSignal<S> {
    pub signal: String,
    pub winner: Option<usize>,
    pub stage2_payment: S,
}

/// Full outcome of a modular mechanism, evaluated against true base values.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularOutcome<S> {
    pub chosen_question: String,
    pub stage1_payments: Vec<S>,
    pub per_signal: Vec<ModularSignal<S>>,
    /// Expected utility per advertiser under its true base value.
    pub expected_utility: Vec<S>,
    /// Expected welfare delivered, valued at true base values.
    pub expected_welfare: S,
}

fn check_matrix<S: Scalar>(bids: &[Vec<S>], questions: usize) -> Result<()> {
    if bids.is_empty() {
        return Err(Error::Parameter("stage-1 bid matrix has no advertisers".into()));
    }
    for (i, row) in bids.iter().enumerate() {
        if row.len() != questions {
            return Err(Error::BidArity { expected: questions, got: row.len() });
        }
        if row.iter().any(|b| b < &S::zero()) {
            return Err(Error::NegativeBid(i));
        }
    }
    Ok(())
}

fn bid_sums<S: Scalar>(bids: &[Vec<S>], questions: usize) -> Vec<S> {
    (0..questions)
        .map(|q| bids.iter().fold(S::zero(), |acc, row| acc + row[q].clone()))
        .collect()
}

fn pick_question<S: Scalar>(sums: &[S], question_ids: &[String], ties: &TiePolicy) -> usize {
    argmax(sums, |q| question_ids[q].as_str(), ties).expect("at least one question")
}

/// Stage-1 VCG: the question with the highest bid sum wins and each
/// advertiser pays its externality.
pub fn stage1_vcg<S: Scalar>(
    bids: &[Vec<S>],
    question_ids: &[String],
    ties: &TiePolicy,
) -> Result<Stage1Outcome<S>> {
    check_matrix(bids, question_ids.len())?;
    let sums = bid_sums(bids, question_ids.len());
    let chosen = pick_question(&sums, question_ids, ties);
    let payments = bids
        .iter()
        .map(|row| {
            // max_l sum_{j != i} minus the same sum at the chosen question
            let mut best = S::zero();
            for (q, total) in sums.iter().enumerate() {
                let others = total.clone() - row[q].clone();
                if others > best {
                    best = others;
                }
            }
            best - (sums[chosen].clone() - row[chosen].clone())
        })
        .collect();
    Ok(Stage1Outcome { chosen, payments })
}

/// Stage-1 first-price: same selection rule; only the highest bidder on the
/// winning question (advertiser ties by policy) pays, and pays its bid.
pub fn stage1_first_price<S: Scalar>(
    bids: &[Vec<S>],
    question_ids: &[String],
    advertiser_ids: &[String],
    ties: &TiePolicy,
) -> Result<Stage1Outcome<S>> {
    check_matrix(bids, question_ids.len())?;
    let sums = bid_sums(bids, question_ids.len());
    let chosen = pick_question(&sums, question_ids, ties);
    let column: Vec<S> = bids.iter().map(|row| row[chosen].clone()).collect();
    let payer = argmax(&column, |i| advertiser_ids[i].as_str(), ties).expect("non-empty");
    let mut payments = vec![S::zero(); bids.len()];
    payments[payer] = column[payer].clone();
    Ok(Stage1Outcome { chosen, payments })
}

/// Stage-1 all-pay: same selection rule; every advertiser pays its bid on
/// the winning question.
pub fn stage1_all_pay<S: Scalar>(
    bids: &[Vec<S>],
    question_ids: &[String],
    ties: &TiePolicy,
) -> Result<Stage1Outcome<S>> {
    check_matrix(bids, question_ids.len())?;
    let sums = bid_sums(bids, question_ids.len());
    let chosen = pick_question(&sums, question_ids, ties);
    let payments = bids.iter().map(|row| row[chosen].clone()).collect();
    Ok(Stage1Outcome { chosen, payments })
}

/// Second-price auction on effective values at one signal: the highest
/// positive effective bid wins and pays the best effective bid of the rest.
pub fn stage2_auction<S: Scalar>(
    game: &ReducedGame<S>,
    stage2_bids: &[S],
    question: usize,
    signal: usize,
    ties: &TiePolicy,
) -> Result<Stage2Outcome<S>> {
    game.check_bids(stage2_bids)?;
    let row = &game.questions[question].signals[signal];
    let stats = row_stats(game, row, stage2_bids, ties);
    Ok(Stage2Outcome { winner: stats.winner, payment: stats.second })
}

/// Expected stage-2 utility of one advertiser if `question` is asked and
/// everyone follows the profile's stage-2 bids: the signal-probability
/// weighted quasilinear payoff, valued at `values`.
pub fn stage2_expected_utility<S: Scalar>(
    game: &ReducedGame<S>,
    values: &[S],
    profile: &StrategyProfile<S>,
    question: usize,
    advertiser: usize,
    ties: &TiePolicy,
) -> Result<S> {
    game.check_bids(values)?;
    profile.check(game)?;
    if advertiser >= game.advertisers.len() {
        return Err(Error::AdvertiserIndex { index: advertiser, count: game.advertisers.len() });
    }
    let table = &game.questions[question];
    let mut total = S::zero();
    for (s, row) in table.signals.iter().enumerate() {
        let bids = profile.stage2_row_bids(question, s);
        let stats = row_stats(game, row, &bids, ties);
        if stats.winner == Some(advertiser) {
            let payoff = values[advertiser].clone() * row.rates[advertiser].clone() - stats.second;
            total = total + row.prob.clone() * payoff;
        }
    }
    Ok(total)
}

/// Each advertiser's expected stage-2 utility per question under the
/// profile's stage-2 bids, as an advertiser-by-question matrix.
pub fn stage2_value_matrix<S: Scalar>(
    game: &ReducedGame<S>,
    values: &[S],
    profile: &StrategyProfile<S>,
    ties: &TiePolicy,
) -> Result<Vec<Vec<S>>> {
    (0..game.advertisers.len())
        .map(|i| {
            (0..game.questions.len())
                .map(|q| stage2_expected_utility(game, values, profile, q, i, ties))
                .collect()
        })
        .collect()
}

/// Execute a modular mechanism on a committed strategy profile. Utilities
/// and welfare are valued at `true_values`, never at bids.
pub fn run_modular<S: Scalar>(
    game: &ReducedGame<S>,
    profile: &StrategyProfile<S>,
    rule: &Stage1Rule,
    true_values: &[S],
) -> Result<ModularOutcome<S>> {
    profile.check(game)?;
    game.check_bids(true_values)?;
    let question_ids: Vec<String> = game.questions.iter().map(|q| q.id.clone()).collect();
    let advertiser_ids: Vec<String> = game.advertisers.iter().map(|a| a.id.clone()).collect();
    let matrix = profile.stage1_matrix();
    let stage1 = match rule.variant {
        Stage1Variant::Vcg => stage1_vcg(&matrix, &question_ids, &rule.ties)?,
        Stage1Variant::FirstPrice => {
            stage1_first_price(&matrix, &question_ids, &advertiser_ids, &rule.ties)?
        }
        Stage1Variant::AllPay => stage1_all_pay(&matrix, &question_ids, &rule.ties)?,
    };

    let table = &game.questions[stage1.chosen];
    let mut per_signal = Vec::with_capacity(table.signals.len());
    let mut utility: Vec<S> = stage1.payments.iter().map(|p| S::zero() - p.clone()).collect();
    let mut welfare = S::zero();
    for (s, row) in table.signals.iter().enumerate() {
        let bids = profile.stage2_row_bids(stage1.chosen, s);
        let stats = row_stats(game, row, &bids, &rule.ties);
        if let Some(w) = stats.winner {
            let value = true_values[w].clone() * row.rates[w].clone();
            welfare = welfare + row.prob.clone() * value.clone();
            utility[w] = utility[w].clone() + row.prob.clone() * (value - stats.second.clone());
        }
        per_signal.push(ModularSignal {
            signal: row.id.clone(),
            winner: stats.winner,
            stage2_payment: stats.second,
        });
    }
    Ok(ModularOutcome {
        chosen_question: table.id.clone(),
        stage1_payments: stage1.payments,
        per_signal,
        expected_utility: utility,
        expected_welfare: welfare,
    })
}

/// The profile every advertiser is prescribed to play under VCG-per-stage:
/// bid the true base value in every stage-2 auction, and bid each question's
/// truthful expected stage-2 utility in stage 1.
pub fn prescribed_equilibrium<S: Scalar>(
    game: &ReducedGame<S>,
    true_values: &[S],
    ties: &TiePolicy,
) -> Result<StrategyProfile<S>> {
    let mut profile = StrategyProfile::constant_stage2(game, true_values)?;
    let r = stage2_value_matrix(game, true_values, &profile, ties)?;
    for (plan, row) in profile.advertisers.iter_mut().zip(r) {
        plan.stage1 = row;
    }
    Ok(profile)
}

/// Proxy variant: the platform collects only scalar reports, computes the
/// stage-1 bids on the advertisers' behalf from those reports, and uses the
/// reports as stage-2 bids. Utilities are still valued at `true_values`.
pub fn run_proxy<S: Scalar>(
    game: &ReducedGame<S>,
    reports: &[S],
    true_values: &[S],
    ties: &TiePolicy,
) -> Result<ModularOutcome<S>> {
    let profile = prescribed_equilibrium(game, reports, ties)?;
    run_modular(game, &profile, &Stage1Rule::vcg(ties.clone()), true_values)
}
