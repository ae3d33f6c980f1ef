//! Verification and analysis machinery.
//!
//! An independent brute-force welfare oracle, unilateral-deviation search
//! for equilibrium verification (grid-based, plus the per-question pivotal
//! class that is exhaustive for stage-1 VCG), price-of-anarchy reports, and
//! generators for the named instance families the test-suite runs on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::direct::{question_welfare, run_direct, TiePolicy};
use crate::model::{
    Advertiser, AdvertiserInfo, Instance, Question, QuestionTable, ReducedGame, SignalEntry,
};
use crate::modular::{run_modular, run_proxy, Stage1Rule, Stage1Variant, StrategyProfile};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// The unilateral deviations a verification run explores.
///
/// Grids are finite bid-level lists per advertiser; a verdict therefore
/// certifies "no profitable deviation within the declared class", except
/// where the class is provably exhaustive (see
/// [`EquilibriumReport::complete_class`]).
#[derive(Debug, Clone)]
pub struct DeviationClass<S> {
    /// Bid levels per advertiser for stage-1 question bids; also the report
    /// grid for the direct mechanism. An empty list skips stage-1 grid
    /// search for that advertiser.
    pub stage1: Vec<Vec<S>>,
    /// Bid levels per advertiser for stage-2 item bids.
    pub stage2: Vec<Vec<S>>,
    /// Under stage-1 VCG, additionally test the per-question pivotal
    /// deviations (bid high enough to force each question).
    pub force_question: bool,
    /// Cap on exhaustive opponent-profile enumeration in the direct DSIC
    /// check. Above it, the profiles within Hamming distance two of the
    /// truthful profile are used instead.
    pub opponent_budget: usize,
}

fn dedupe<S: PartialEq>(levels: Vec<S>) -> Vec<S> {
    let mut out: Vec<S> = Vec::with_capacity(levels.len());
    for l in levels {
        if !out.contains(&l) {
            out.push(l);
        }
    }
    out
}

impl<S: Scalar> DeviationClass<S> {
    /// The grid `{0, v/2, v, 2v}` around each advertiser's value, for both
    /// stages, with pivotal question deviations enabled.
    pub fn value_grid(values: &[S]) -> Self {
        let grids: Vec<Vec<S>> = values
            .iter()
            .map(|v| {
                dedupe(vec![
                    S::zero(),
                    v.clone() * S::from_ratio(1, 2),
                    v.clone(),
                    v.clone() * S::from_int(2),
                ])
            })
            .collect();
        DeviationClass {
            stage1: grids.clone(),
            stage2: grids,
            force_question: true,
            opponent_budget: 4096,
        }
    }

    /// Pivotal question deviations plus stage-2 value grids, with no stage-1
    /// grid search. Exhaustive for the stage-1 VCG rule.
    pub fn pivotal_only(values: &[S]) -> Self {
        let mut class = Self::value_grid(values);
        class.stage1 = vec![Vec::new(); values.len()];
        class
    }

    /// Replace every advertiser's stage-1 grid with the same levels.
    pub fn with_stage1_levels(mut self, levels: Vec<S>) -> Self {
        let levels = dedupe(levels);
        self.stage1 = vec![levels; self.stage1.len()];
        self
    }

    /// Replace every advertiser's stage-2 grid with the same levels.
    pub fn with_stage2_levels(mut self, levels: Vec<S>) -> Self {
        let levels = dedupe(levels);
        self.stage2 = vec![levels; self.stage2.len()];
        self
    }

    pub fn with_force_question(mut self, force: bool) -> Self {
        self.force_question = force;
        self
    }
}

/// Best unilateral deviation found for one advertiser.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationFinding<S> {
    pub advertiser: String,
    /// Largest utility gain over the evaluated class; zero means nothing
    /// beats the profile as played.
    pub best_gain: S,
    /// Description of a deviation achieving `best_gain`; absent when no
    /// evaluated deviation beats staying put.
    pub best_deviation: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NoProfitableDeviationFound,
    DeviationFound,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::NoProfitableDeviationFound => "no-profitable-deviation-found",
            Verdict::DeviationFound => "deviation-found",
        })
    }
}

/// Result of a deviation search.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport<S> {
    pub per_advertiser: Vec<DeviationFinding<S>>,
    pub epsilon: S,
    /// `DeviationFound` iff some advertiser gains more than `epsilon`.
    pub verdict: Verdict,
    /// Whether the declared class provably covers every payoff-relevant
    /// unilateral deviation (stage-1 VCG with pivotal deviations and a
    /// truthful stage-2 profile); otherwise the verdict is only "within the
    /// declared class".
    pub complete_class: bool,
}

fn finish_report<S: Scalar>(
    findings: Vec<DeviationFinding<S>>,
    epsilon: S,
    complete_class: bool,
) -> EquilibriumReport<S> {
    let verdict = if findings.iter().any(|f| f.best_gain > epsilon) {
        Verdict::DeviationFound
    } else {
        Verdict::NoProfitableDeviationFound
    };
    EquilibriumReport { per_advertiser: findings, epsilon, verdict, complete_class }
}

/// Welfare ratio of the optimal outcome to an equilibrium outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct PoAReport<S> {
    pub optimal_welfare: S,
    pub equilibrium_welfare: S,
    /// `optimal / equilibrium`; `None` marks an unbounded ratio (zero
    /// equilibrium welfare).
    pub ratio: Option<S>,
}

/// Welfare of the best (question, signal-contingent allocation) pair at the
/// given values, computed by exhaustive traversal of the joint
/// (state, signal) distribution. Serves as an independent oracle for the
/// posterior-based welfare route.
pub fn brute_force_optimal<S: Scalar>(instance: &Instance<S>, values: &[S]) -> Result<S> {
    if values.len() != instance.advertisers.len() {
        return Err(Error::BidArity { expected: instance.advertisers.len(), got: values.len() });
    }
    let mut best: Option<S> = None;
    for q in &instance.questions {
        let mut total = S::zero();
        for row in &q.conditional {
            let mut signal_best = S::zero();
            for (j, adv) in instance.advertisers.iter().enumerate() {
                let mut w = S::zero();
                for ((p, c), r) in instance.prior.iter().zip(row).zip(&adv.conversion) {
                    w = w + p.clone() * c.clone() * values[j].clone() * r.clone();
                }
                if w > signal_best {
                    signal_best = w;
                }
            }
            total = total + signal_best;
        }
        if best.as_ref().is_none_or(|b| &total > b) {
            best = Some(total);
        }
    }
    best.ok_or_else(|| Error::Parameter("instance has no questions".into()))
}

/// Best attainable expected welfare of a reduced game at the given values.
pub fn reduced_optimal<S: Scalar>(game: &ReducedGame<S>, values: &[S]) -> Result<S> {
    game.check_bids(values)?;
    let mut best: Option<S> = None;
    for q in 0..game.questions.len() {
        let w = question_welfare(game, values, q);
        if best.as_ref().is_none_or(|b| &w > b) {
            best = Some(w);
        }
    }
    best.ok_or_else(|| Error::Parameter("game has no questions".into()))
}

fn each_combination<S: Clone>(grids: &[Vec<S>], mut f: impl FnMut(&[S]) -> Result<()>) -> Result<()> {
    if grids.is_empty() || grids.iter().any(|g| g.is_empty()) {
        return Ok(());
    }
    let mut idx = vec![0usize; grids.len()];
    let mut current: Vec<S> = grids.iter().map(|g| g[0].clone()).collect();
    loop {
        f(&current)?;
        let mut k = 0;
        loop {
            if k == grids.len() {
                return Ok(());
            }
            idx[k] += 1;
            if idx[k] < grids[k].len() {
                current[k] = grids[k][idx[k]].clone();
                break;
            }
            idx[k] = 0;
            current[k] = grids[k][0].clone();
            k += 1;
        }
    }
}

/// Opponent bid profiles for the DSIC check: the full grid product when it
/// fits the budget, otherwise truthful plus all profiles within Hamming
/// distance two of it.
fn opponent_profiles<S: Scalar>(
    grids: &[Vec<S>],
    truthful: &[S],
    deviator: usize,
    budget: usize,
) -> Vec<Vec<S>> {
    let mut count: usize = 1;
    for (j, g) in grids.iter().enumerate() {
        if j != deviator {
            count = count.saturating_mul(g.len().max(1));
        }
    }
    let mut profiles = Vec::new();
    if count <= budget {
        let mut pinned = grids.to_vec();
        pinned[deviator] = vec![truthful[deviator].clone()];
        let _ = each_combination(&pinned, |bids| {
            profiles.push(bids.to_vec());
            Ok(())
        });
        return profiles;
    }
    profiles.push(truthful.to_vec());
    let others: Vec<usize> = (0..grids.len()).filter(|j| *j != deviator).collect();
    for &j in &others {
        for level in &grids[j] {
            if *level == truthful[j] {
                continue;
            }
            let mut p = truthful.to_vec();
            p[j] = level.clone();
            profiles.push(p);
        }
    }
    for (a, &j1) in others.iter().enumerate() {
        for &j2 in &others[a + 1..] {
            for l1 in &grids[j1] {
                if *l1 == truthful[j1] {
                    continue;
                }
                for l2 in &grids[j2] {
                    if *l2 == truthful[j2] {
                        continue;
                    }
                    let mut p = truthful.to_vec();
                    p[j1] = l1.clone();
                    p[j2] = l2.clone();
                    profiles.push(p);
                }
            }
        }
    }
    profiles
}

fn direct_true_utility<S: Scalar>(
    game: &ReducedGame<S>,
    bids: &[S],
    values: &[S],
    advertiser: usize,
    ties: &TiePolicy,
) -> Result<S> {
    let out = run_direct(game, bids, ties)?;
    Ok(values[advertiser].clone() * out.expected_delivered_conversion[advertiser].clone()
        - out.expected_payment[advertiser].clone())
}

/// Check dominant-strategy truthfulness of the direct mechanism over the
/// declared report grids: for every advertiser, every opponent profile from
/// the grid and every grid deviation, truthful reporting must be within
/// `epsilon` of optimal.
pub fn verify_direct_dsic<S: Scalar>(
    game: &ReducedGame<S>,
    class: &DeviationClass<S>,
    epsilon: S,
) -> Result<EquilibriumReport<S>> {
    let n = game.advertisers.len();
    if class.stage1.len() != n {
        return Err(Error::BidArity { expected: n, got: class.stage1.len() });
    }
    let values = game.base_values();
    let ties = TiePolicy::instance_order();
    let mut findings = Vec::with_capacity(n);
    for i in 0..n {
        let mut best_gain = S::zero();
        let mut best_desc = None;
        for profile in opponent_profiles(&class.stage1, &values, i, class.opponent_budget) {
            let mut bids = profile.clone();
            bids[i] = values[i].clone();
            let truthful_utility = direct_true_utility(game, &bids, &values, i, &ties)?;
            for level in &class.stage1[i] {
                if *level == values[i] {
                    continue;
                }
                bids[i] = level.clone();
                let deviated = direct_true_utility(game, &bids, &values, i, &ties)?;
                let gain = deviated - truthful_utility.clone();
                if gain > best_gain {
                    best_gain = gain;
                    best_desc = Some(format!(
                        "report {level} instead of {} against opponents {:?}",
                        values[i],
                        profile
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(_, b)| b.to_string())
                            .collect::<Vec<_>>()
                    ));
                }
                bids[i] = values[i].clone();
            }
        }
        findings.push(DeviationFinding {
            advertiser: game.advertisers[i].id.clone(),
            best_gain,
            best_deviation: best_desc,
        });
    }
    Ok(finish_report(findings, epsilon, false))
}

/// Search for profitable unilateral deviations from a modular-mechanism
/// strategy profile: per-signal stage-2 grid deviations, whole stage-1 grid
/// bid vectors, and (under VCG) the per-question pivotal deviations.
pub fn verify_modular_nash<S: Scalar>(
    game: &ReducedGame<S>,
    profile: &StrategyProfile<S>,
    rule: &Stage1Rule,
    true_values: &[S],
    class: &DeviationClass<S>,
    epsilon: S,
) -> Result<EquilibriumReport<S>> {
    let n = game.advertisers.len();
    if class.stage1.len() != n || class.stage2.len() != n {
        return Err(Error::BidArity { expected: n, got: class.stage1.len().min(class.stage2.len()) });
    }
    let base = run_modular(game, profile, rule, true_values)?;
    let chosen = game.question_index(&base.chosen_question)?;

    let truthful_stage2 = profile.advertisers.iter().enumerate().all(|(i, plan)| {
        plan.stage2.iter().flatten().all(|b| *b == true_values[i])
    });
    let complete_class = rule.variant == Stage1Variant::Vcg && class.force_question && truthful_stage2;

    let mut findings = Vec::with_capacity(n);
    for i in 0..n {
        let mut best_gain = S::zero();
        let mut best_desc: Option<String> = None;
        let base_utility = base.expected_utility[i].clone();
        let consider = |gain: S, desc: String, best_gain: &mut S, best_desc: &mut Option<String>| {
            if gain > *best_gain {
                *best_gain = gain;
                *best_desc = Some(desc);
            }
        };

        // Stage-2 deviations. A changed stage-2 bid cannot move the chosen
        // question, and cells of unchosen questions are never read, so only
        // the chosen question's signals need evaluating.
        for (s, row) in game.questions[chosen].signals.iter().enumerate() {
            for level in &class.stage2[i] {
                if *level == profile.advertisers[i].stage2[chosen][s] {
                    continue;
                }
                let mut dev = profile.clone();
                dev.advertisers[i].stage2[chosen][s] = level.clone();
                let out = run_modular(game, &dev, rule, true_values)?;
                consider(
                    out.expected_utility[i].clone() - base_utility.clone(),
                    format!(
                        "stage-2 bid {level} at ({}, {})",
                        game.questions[chosen].id, row.id
                    ),
                    &mut best_gain,
                    &mut best_desc,
                );
            }
        }

        // Whole stage-1 bid vectors from the grid.
        if !class.stage1[i].is_empty() {
            let grids = vec![class.stage1[i].clone(); game.questions.len()];
            each_combination(&grids, |vector| {
                if vector == profile.advertisers[i].stage1.as_slice() {
                    return Ok(());
                }
                let mut dev = profile.clone();
                dev.advertisers[i].stage1 = vector.to_vec();
                let out = run_modular(game, &dev, rule, true_values)?;
                consider(
                    out.expected_utility[i].clone() - base_utility.clone(),
                    format!(
                        "stage-1 bids ({})",
                        vector.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", ")
                    ),
                    &mut best_gain,
                    &mut best_desc,
                );
                Ok(())
            })?;
        }

        // Pivotal deviations: force each question with an overwhelming bid.
        // Under stage-1 VCG the deviator's payment does not depend on its own
        // bids, so only the induced question matters.
        if class.force_question && rule.variant == Stage1Variant::Vcg {
            let matrix = profile.stage1_matrix();
            let mut big = S::one();
            for row in &matrix {
                let mut row_max = S::zero();
                for b in row {
                    if *b > row_max {
                        row_max = b.clone();
                    }
                }
                big = big + row_max;
            }
            for q in 0..game.questions.len() {
                let mut vector = vec![S::zero(); game.questions.len()];
                vector[q] = big.clone();
                let mut dev = profile.clone();
                dev.advertisers[i].stage1 = vector;
                let out = run_modular(game, &dev, rule, true_values)?;
                consider(
                    out.expected_utility[i].clone() - base_utility.clone(),
                    format!("force question {}", game.questions[q].id),
                    &mut best_gain,
                    &mut best_desc,
                );
            }
        }

        findings.push(DeviationFinding {
            advertiser: game.advertisers[i].id.clone(),
            best_gain,
            best_deviation: best_desc,
        });
    }
    Ok(finish_report(findings, epsilon, complete_class))
}

/// Search for profitable misreports in the proxy variant, where each
/// advertiser's strategy is a single scalar report.
pub fn verify_proxy<S: Scalar>(
    game: &ReducedGame<S>,
    report_grid: &[Vec<S>],
    epsilon: S,
    ties: &TiePolicy,
) -> Result<EquilibriumReport<S>> {
    let n = game.advertisers.len();
    if report_grid.len() != n {
        return Err(Error::BidArity { expected: n, got: report_grid.len() });
    }
    let values = game.base_values();
    let base = run_proxy(game, &values, &values, ties)?;
    let mut findings = Vec::with_capacity(n);
    for i in 0..n {
        let mut best_gain = S::zero();
        let mut best_desc = None;
        for level in &report_grid[i] {
            if *level == values[i] {
                continue;
            }
            let mut reports = values.clone();
            reports[i] = level.clone();
            let out = run_proxy(game, &reports, &values, ties)?;
            let gain = out.expected_utility[i].clone() - base.expected_utility[i].clone();
            if gain > best_gain {
                best_gain = gain;
                best_desc = Some(format!("report {level} instead of {}", values[i]));
            }
        }
        findings.push(DeviationFinding {
            advertiser: game.advertisers[i].id.clone(),
            best_gain,
            best_deviation: best_desc,
        });
    }
    Ok(finish_report(findings, epsilon, false))
}

/// Optimal welfare (independent brute force) against the welfare a modular
/// profile actually delivers.
pub fn poa<S: Scalar>(
    instance: &Instance<S>,
    profile: &StrategyProfile<S>,
    rule: &Stage1Rule,
    true_values: &[S],
) -> Result<PoAReport<S>> {
    let optimal = brute_force_optimal(instance, true_values)?;
    let game = instance.reduce()?;
    let equilibrium = run_modular(&game, profile, rule, true_values)?.expected_welfare;
    let ratio = if equilibrium > S::zero() {
        Some(optimal.clone() / equilibrium.clone())
    } else {
        None
    };
    Ok(PoAReport { optimal_welfare: optimal, equilibrium_welfare: equilibrium, ratio })
}

/// The four-state running-shoes example: two advertisers, a terrain question
/// that splits trail from road and a targeted question that isolates
/// experienced trail runners.
pub fn gen_running_shoes<S: Scalar>() -> Instance<S> {
    let r = S::from_ratio;
    Instance {
        states: vec![
            "road_beginner".into(),
            "road_experienced".into(),
            "trail_beginner".into(),
            "trail_experienced".into(),
        ],
        prior: vec![r(1, 4), r(1, 4), r(1, 4), r(1, 4)],
        questions: vec![
            Question {
                id: "terrain".into(),
                signals: vec!["click".into(), "no-click".into()],
                conditional: vec![
                    vec![S::zero(), S::zero(), S::one(), S::one()],
                    vec![S::one(), S::one(), S::zero(), S::zero()],
                ],
            },
            Question {
                id: "targeted".into(),
                signals: vec!["click".into(), "no-click".into()],
                conditional: vec![
                    vec![S::zero(), S::zero(), S::zero(), S::one()],
                    vec![S::one(), S::one(), S::one(), S::zero()],
                ],
            },
        ],
        advertisers: vec![
            Advertiser {
                id: "trail_shoes".into(),
                base_value: S::from_int(50),
                conversion: vec![S::zero(), S::zero(), r(3, 10), r(9, 10)],
            },
            Advertiser {
                id: "road_shoes".into(),
                base_value: S::from_int(30),
                conversion: vec![r(4, 5), r(2, 5), S::zero(), S::zero()],
            },
        ],
    }
}

/// The unbounded-price-of-anarchy family: `m` uniform states, a fully
/// revealing question and an uninformative one, and `m` unit-value
/// advertisers. Advertiser `i` converts at rate one in state `i`
/// ("primary") and at `1 - delta` in the next state cyclically
/// ("secondary"), except that advertiser 1 is also the secondary for state 3
/// and advertiser 2 is secondary for no state.
pub fn gen_poa_instance<S: Scalar>(m: usize, delta: S) -> Result<Instance<S>> {
    if m < 3 {
        return Err(Error::Parameter(format!("m must be at least 3, got {m}")));
    }
    if delta <= S::zero() || delta >= S::one() {
        return Err(Error::Parameter(format!("delta must lie strictly between 0 and 1, got {delta}")));
    }
    let mi = m as i64;
    let states: Vec<String> = (1..=m).map(|t| format!("s{t}")).collect();
    let prior = vec![S::from_ratio(1, mi); m];

    let revealing = Question {
        id: "revealing".into(),
        signals: (1..=m).map(|t| format!("sig{t}")).collect(),
        conditional: (0..m)
            .map(|s| (0..m).map(|t| if s == t { S::one() } else { S::zero() }).collect())
            .collect(),
    };
    let uninformative = Question {
        id: "uninformative".into(),
        signals: vec!["shown".into()],
        conditional: vec![vec![S::one(); m]],
    };

    let secondary_rate = S::one() - delta;
    let mut conversion = vec![vec![S::zero(); m]; m];
    for i in 0..m {
        conversion[i][i] = S::one();
    }
    for t in 0..m {
        // state index t holds state t+1; its secondary advertiser is the
        // previous one cyclically, with state 3 rerouted to advertiser 1
        let secondary = if t == 2 { 0 } else if t == 0 { m - 1 } else { t - 1 };
        conversion[secondary][t] = secondary_rate.clone();
    }

    let advertisers = (0..m)
        .map(|i| Advertiser {
            id: format!("adv{}", i + 1),
            base_value: S::one(),
            conversion: conversion[i].clone(),
        })
        .collect();

    Ok(Instance { states, prior, questions: vec![revealing, uninformative], advertisers })
}

/// The proxy-manipulation example, which exists only in signal-lottery form:
/// its two questions prescribe posterior conversion pairs whose means
/// disagree across questions, so no state-backed instance induces them.
pub fn gen_proxy_counterexample<S: Scalar>() -> ReducedGame<S> {
    let r = S::from_ratio;
    let half = r(1, 2);
    ReducedGame {
        advertisers: vec![
            AdvertiserInfo { id: "adv1".into(), base_value: S::from_int(10) },
            AdvertiserInfo { id: "adv2".into(), base_value: S::from_int(10) },
        ],
        questions: vec![
            QuestionTable {
                id: "A".into(),
                signals: vec![
                    SignalEntry { id: "s1".into(), prob: half.clone(), rates: vec![r(3, 5), S::zero()] },
                    SignalEntry { id: "s2".into(), prob: half.clone(), rates: vec![S::zero(), r(4, 5)] },
                ],
            },
            QuestionTable {
                id: "B".into(),
                signals: vec![
                    SignalEntry { id: "s1".into(), prob: half.clone(), rates: vec![S::one(), r(2, 5)] },
                    SignalEntry { id: "s2".into(), prob: half, rates: vec![S::one(), S::zero()] },
                ],
            },
        ],
    }
}

/// The robustness equilibrium profile for [`gen_poa_instance`] under
/// first-price or all-pay stage-1 rules with ties favouring the
/// uninformative question: advertiser 1 bids `delta` on the uninformative
/// question, everyone else bids `delta / m` on the revealing one, stage-2
/// bids truthful. Requires `delta < 1 / (m + 2)`.
pub fn robustness_profile<S: Scalar>(m: usize, delta: S) -> Result<StrategyProfile<S>> {
    let bound = S::from_ratio(1, m as i64 + 2);
    if delta >= bound {
        return Err(Error::Parameter(format!(
            "delta must be below 1/(m+2) = {bound}, got {delta}"
        )));
    }
    let game = gen_poa_instance(m, delta.clone())?.reduce()?;
    let values = game.base_values();
    let mut profile = StrategyProfile::constant_stage2(&game, &values)?;
    let small = delta.clone() / S::from_int(m as i64);
    for (i, plan) in profile.advertisers.iter_mut().enumerate() {
        plan.stage1 = if i == 0 {
            vec![S::zero(), delta.clone()]
        } else {
            vec![small.clone(), S::zero()]
        };
    }
    Ok(profile)
}

/// Size caps for [`gen_random_instance`].
#[derive(Debug, Clone)]
pub struct RandomInstanceParams {
    pub max_states: usize,
    pub max_questions: usize,
    pub max_advertisers: usize,
    pub max_signals: usize,
}

impl Default for RandomInstanceParams {
    fn default() -> Self {
        RandomInstanceParams { max_states: 4, max_questions: 3, max_advertisers: 4, max_signals: 3 }
    }
}

/// A seeded random instance with rational parameters drawn from small grids:
/// weight-normalized priors and signal channels, base values from
/// `{0, 1, 2, 3, 5}` and conversion rates from `{0, 1/4, 1/2, 1, 2}`.
/// The same seed always yields the same instance.
pub fn gen_random_instance<S: Scalar>(params: &RandomInstanceParams, seed: u64) -> Instance<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_states = rng.gen_range(1..=params.max_states.max(1));
    let n_questions = rng.gen_range(1..=params.max_questions.max(1));
    let n_advertisers = rng.gen_range(1..=params.max_advertisers.max(1));

    let weights = |rng: &mut ChaCha8Rng, len: usize| -> Vec<i64> {
        let mut w: Vec<i64> = (0..len).map(|_| [0, 1, 1, 2, 3][rng.gen_range(0..5)]).collect();
        if w.iter().all(|x| *x == 0) {
            w[rng.gen_range(0..len)] = 1;
        }
        w
    };
    let normalize = |w: &[i64]| -> Vec<S> {
        let total: i64 = w.iter().sum();
        w.iter().map(|x| S::from_ratio(*x, total)).collect()
    };

    let states: Vec<String> = (0..n_states).map(|t| format!("s{t}")).collect();
    let prior = normalize(&weights(&mut rng, n_states));

    let questions = (0..n_questions)
        .map(|qi| {
            let n_signals = rng.gen_range(1..=params.max_signals.max(1));
            // one weight column per state, normalized per state
            let mut conditional = vec![vec![S::zero(); n_states]; n_signals];
            for t in 0..n_states {
                let col = normalize(&weights(&mut rng, n_signals));
                for (s, p) in col.into_iter().enumerate() {
                    conditional[s][t] = p;
                }
            }
            Question {
                id: format!("q{qi}"),
                signals: (0..n_signals).map(|s| format!("sig{s}")).collect(),
                conditional,
            }
        })
        .collect();

    let value_grid = [0, 1, 2, 3, 5];
    let rate_grid = [(0, 1), (0, 1), (1, 4), (1, 2), (1, 1), (2, 1)];
    let advertisers = (0..n_advertisers)
        .map(|i| {
            let v = if rng.gen_range(0..8) == 0 { 0 } else { value_grid[rng.gen_range(1..5)] };
            Advertiser {
                id: format!("a{i}"),
                base_value: S::from_int(v),
                conversion: (0..n_states)
                    .map(|_| {
                        let (n, d) = rate_grid[rng.gen_range(0..rate_grid.len())];
                        S::from_ratio(n, d)
                    })
                    .collect(),
            }
        })
        .collect();

    Instance { states, prior, questions, advertisers }
}
