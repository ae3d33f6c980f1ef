//! The end-to-end direct mechanism.
//!
//! One round of bids drives everything: the question with the highest
//! ex-ante expected reported welfare is asked, the realized signal picks the
//! advertiser with the highest effective bid, and each advertiser pays the
//! externality its presence imposes on the others. Payments decompose into a
//! question-stage externality plus an expected second-price part.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Instance, ReducedGame, SignalEntry};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Priority list used to break argmax ties among labelled candidates
/// (question ids or advertiser ids).
///
/// Labels listed earlier win; labels not listed rank after all listed ones,
/// in instance order. The default (empty) policy is plain instance order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TiePolicy {
    priority: Vec<String>,
}

impl TiePolicy {
    /// Instance order.
    pub fn instance_order() -> Self {
        TiePolicy::default()
    }

    /// Prefer the given labels, in the given order, over everything else.
    pub fn prefer<I, T>(labels: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        TiePolicy { priority: labels.into_iter().map(Into::into).collect() }
    }

    pub fn is_instance_order(&self) -> bool {
        self.priority.is_empty()
    }

    pub fn priority(&self) -> &[String] {
        &self.priority
    }

    fn rank(&self, label: &str) -> usize {
        self.priority.iter().position(|l| l == label).unwrap_or(usize::MAX)
    }

    /// Among tied candidates `(position, label)`, the preferred position.
    pub fn choose<'a>(&self, candidates: impl IntoIterator<Item = (usize, &'a str)>) -> Option<usize> {
        candidates
            .into_iter()
            .min_by_key(|(pos, label)| (self.rank(label), *pos))
            .map(|(pos, _)| pos)
    }
}

/// Index of the maximum value; ties resolved by the policy over labels.
pub(crate) fn argmax<'a, S: Scalar>(
    values: &[S],
    label: impl Fn(usize) -> &'a str,
    ties: &TiePolicy,
) -> Option<usize> {
    let mut best: Option<&S> = None;
    for v in values {
        if best.is_none_or(|b| v > b) {
            best = Some(v);
        }
    }
    let best = best?.clone();
    ties.choose(
        values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == best)
            .map(|(i, _)| (i, label(i))),
    )
}

/// Outcome of one signal of the chosen question.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalOutcome<S> {
    pub signal: String,
    /// Winning advertiser index, if any effective value is positive.
    pub winner: Option<usize>,
    /// The winner's effective value (zero when unallocated).
    pub winner_effective_value: S,
    /// Highest effective value among the non-winners.
    pub second_price: S,
}

/// Full outcome of the direct mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectOutcome<S> {
    pub chosen_question: String,
    pub per_signal: Vec<SignalOutcome<S>>,
    /// Expected reported welfare of the chosen question.
    pub expected_welfare: S,
    /// Interim externality payment per advertiser.
    pub expected_payment: Vec<S>,
    /// Expected delivered conversion rate per advertiser.
    pub expected_delivered_conversion: Vec<S>,
    /// Reported-value utility `bid * delivered - payment`; equals the true
    /// utility when bids are truthful.
    pub expected_utility: Vec<S>,
}

/// Split of one advertiser's payment per the second-price decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct PaymentParts<S> {
    /// Drop in the others' best attainable welfare caused by the question
    /// choice.
    pub stage1_externality: S,
    /// Expected second price over the signals this advertiser wins.
    pub expected_second_price: S,
    pub total: S,
}

/// Per-advertiser payment decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct PaymentDecomposition<S> {
    pub per_advertiser: Vec<PaymentParts<S>>,
}

/// One simulated run of the direct mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub state: String,
    pub question: String,
    pub signal: String,
    pub winner: Option<String>,
    /// Second price charged at the realized signal (zero when unallocated).
    pub second_price: S,
}

fn effective_values<S: Scalar>(row: &SignalEntry<S>, bids: &[S]) -> Vec<S> {
    row.rates.iter().zip(bids).map(|(r, b)| r.clone() * b.clone()).collect()
}

pub(crate) struct RowStats<S> {
    pub(crate) winner: Option<usize>,
    /// The winner's effective value (the row maximum), zero if unallocated.
    pub(crate) best: S,
    /// Highest effective value among the non-winners.
    pub(crate) second: S,
}

/// Second-price outcome at one signal: highest positive effective bid wins
/// and pays the best of the rest.
pub(crate) fn row_stats<S: Scalar>(
    game: &ReducedGame<S>,
    row: &SignalEntry<S>,
    bids: &[S],
    ties: &TiePolicy,
) -> RowStats<S> {
    let effs = effective_values(row, bids);
    let winner = argmax(&effs, |i| game.advertisers[i].id.as_str(), ties)
        .filter(|w| effs[*w] > S::zero());
    match winner {
        Some(w) => {
            let mut second = S::zero();
            for (j, e) in effs.iter().enumerate() {
                if j != w && *e > second {
                    second = e.clone();
                }
            }
            RowStats { winner: Some(w), best: effs[w].clone(), second }
        }
        None => RowStats { winner: None, best: S::zero(), second: S::zero() },
    }
}

/// Expected reported welfare of asking `question` under the given bids.
pub(crate) fn question_welfare<S: Scalar>(game: &ReducedGame<S>, bids: &[S], question: usize) -> S {
    let mut total = S::zero();
    for row in &game.questions[question].signals {
        let mut best = S::zero();
        for (r, b) in row.rates.iter().zip(bids) {
            let e = r.clone() * b.clone();
            if e > best {
                best = e;
            }
        }
        total = total + row.prob.clone() * best;
    }
    total
}

/// The question maximizing ex-ante expected reported welfare; ties resolved
/// by the policy. Returns the question index.
pub fn select_question<S: Scalar>(game: &ReducedGame<S>, bids: &[S], ties: &TiePolicy) -> Result<usize> {
    game.check_bids(bids)?;
    let welfare: Vec<S> = (0..game.questions.len())
        .map(|q| question_welfare(game, bids, q))
        .collect();
    argmax(&welfare, |q| game.questions[q].id.as_str(), ties)
        .ok_or_else(|| Error::Parameter("instance has no questions".into()))
}

/// Winner at one signal of one question: the advertiser with the highest
/// positive effective value, ties by policy; `None` when every effective
/// value is zero.
pub fn allocate<S: Scalar>(
    game: &ReducedGame<S>,
    bids: &[S],
    question: usize,
    signal: usize,
    ties: &TiePolicy,
) -> Result<Option<usize>> {
    game.check_bids(bids)?;
    let row = &game.questions[question].signals[signal];
    Ok(row_stats(game, row, bids, ties).winner)
}

/// Best attainable expected welfare when `excluded` is removed from the
/// market: the other advertisers' welfare under their best question.
pub fn welfare_without<S: Scalar>(game: &ReducedGame<S>, bids: &[S], excluded: usize) -> Result<S> {
    game.check_bids(bids)?;
    if excluded >= game.advertisers.len() {
        return Err(Error::AdvertiserIndex { index: excluded, count: game.advertisers.len() });
    }
    let mut best: Option<S> = None;
    for q in 0..game.questions.len() {
        let w = welfare_without_at(game, bids, excluded, q);
        if best.as_ref().is_none_or(|b| &w > b) {
            best = Some(w);
        }
    }
    Ok(best.unwrap_or_else(S::zero))
}

/// Expected welfare of the advertisers other than `excluded` when `question`
/// is asked and each signal goes to the best of them.
fn welfare_without_at<S: Scalar>(game: &ReducedGame<S>, bids: &[S], excluded: usize, question: usize) -> S {
    let mut total = S::zero();
    for row in &game.questions[question].signals {
        let mut best = S::zero();
        for (j, (r, b)) in row.rates.iter().zip(bids).enumerate() {
            if j == excluded {
                continue;
            }
            let e = r.clone() * b.clone();
            if e > best {
                best = e;
            }
        }
        total = total + row.prob.clone() * best;
    }
    total
}

/// Run the full direct mechanism: question choice, signal-contingent
/// allocation, externality payments.
pub fn run_direct<S: Scalar>(game: &ReducedGame<S>, bids: &[S], ties: &TiePolicy) -> Result<DirectOutcome<S>> {
    let n = game.advertisers.len();
    let chosen = select_question(game, bids, ties)?;
    let table = &game.questions[chosen];

    let mut per_signal = Vec::with_capacity(table.signals.len());
    let mut expected_welfare = S::zero();
    let mut delivered = vec![S::zero(); n];
    for row in &table.signals {
        let stats = row_stats(game, row, bids, ties);
        if let Some(w) = stats.winner {
            expected_welfare = expected_welfare + row.prob.clone() * stats.best.clone();
            delivered[w] = delivered[w].clone() + row.prob.clone() * row.rates[w].clone();
        }
        per_signal.push(SignalOutcome {
            signal: row.id.clone(),
            winner: stats.winner,
            winner_effective_value: stats.best,
            second_price: stats.second,
        });
    }

    let mut payments = Vec::with_capacity(n);
    for i in 0..n {
        let without = welfare_without(game, bids, i)?;
        // expected welfare the others actually get in the chosen outcome
        let mut others = S::zero();
        for (row, out) in table.signals.iter().zip(&per_signal) {
            match out.winner {
                Some(w) if w != i => {
                    others = others + row.prob.clone() * out.winner_effective_value.clone();
                }
                _ => {}
            }
        }
        payments.push(without - others);
    }

    let utility = (0..n)
        .map(|i| bids[i].clone() * delivered[i].clone() - payments[i].clone())
        .collect();
    Ok(DirectOutcome {
        chosen_question: table.id.clone(),
        per_signal,
        expected_welfare,
        expected_payment: payments,
        expected_delivered_conversion: delivered,
        expected_utility: utility,
    })
}

/// Split each advertiser's payment into the question-stage externality and
/// the expected second price. Totals equal [`run_direct`] payments.
pub fn decompose_payment<S: Scalar>(
    game: &ReducedGame<S>,
    bids: &[S],
    ties: &TiePolicy,
) -> Result<PaymentDecomposition<S>> {
    let n = game.advertisers.len();
    let chosen = select_question(game, bids, ties)?;
    let table = &game.questions[chosen];
    let stats: Vec<RowStats<S>> = table.signals.iter().map(|row| row_stats(game, row, bids, ties)).collect();

    let mut per_advertiser = Vec::with_capacity(n);
    for i in 0..n {
        let sw_chosen = welfare_without_at(game, bids, i, chosen);
        let sw_best = welfare_without(game, bids, i)?;
        let stage1_externality = sw_best - sw_chosen;
        let mut expected_second_price = S::zero();
        for (row, st) in table.signals.iter().zip(&stats) {
            if st.winner == Some(i) {
                expected_second_price = expected_second_price + row.prob.clone() * st.second.clone();
            }
        }
        let total = stage1_externality.clone() + expected_second_price.clone();
        per_advertiser.push(PaymentParts { stage1_externality, expected_second_price, total });
    }
    Ok(PaymentDecomposition { per_advertiser })
}

fn draw_index<S: Scalar>(probs: impl Iterator<Item = S>, roll: f64) -> Option<usize> {
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, p) in probs.enumerate() {
        if p <= S::zero() {
            continue;
        }
        last_positive = Some(i);
        acc += p.to_f64().unwrap_or(0.0);
        if roll < acc {
            return Some(i);
        }
    }
    last_positive
}

/// Simulate one run of the direct mechanism: draw a state from the prior and
/// a signal from the chosen question's channel, then allocate. The same seed
/// always yields the same trajectory.
pub fn sample_trajectory<S: Scalar>(
    instance: &Instance<S>,
    bids: &[S],
    ties: &TiePolicy,
    seed: u64,
) -> Result<Trajectory<S>> {
    let game = instance.reduce()?;
    let chosen = select_question(&game, bids, ties)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let state = draw_index(instance.prior.iter().cloned(), rng.gen::<f64>())
        .ok_or_else(|| Error::InvalidInstance("prior has no positive entry".into()))?;
    let question = &instance.questions[chosen];
    let signal = draw_index(
        question.conditional.iter().map(|row| row[state].clone()),
        rng.gen::<f64>(),
    )
    .ok_or_else(|| Error::InvalidInstance("conditional column has no positive entry".into()))?;

    let signal_id = &question.signals[signal];
    let row_idx = game.signal_index(chosen, signal_id)?;
    let stats = row_stats(&game, &game.questions[chosen].signals[row_idx], bids, ties);
    Ok(Trajectory {
        state: instance.states[state].clone(),
        question: question.id.clone(),
        signal: signal_id.clone(),
        winner: stats.winner.map(|w| game.advertisers[w].id.clone()),
        second_price: stats.second,
    })
}

#[cfg(test)]
mod tests {
    use num_traits::{One, Zero};

    use super::*;
    use crate::analysis::{brute_force_optimal, gen_poa_instance, gen_random_instance, gen_running_shoes, RandomInstanceParams};
    use crate::model::{Advertiser, Question};
    use crate::Rat;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::from_ratio(n, d)
    }

    fn shoes() -> ReducedGame<Rat> {
        gen_running_shoes::<Rat>().reduce().unwrap()
    }

    fn ties() -> TiePolicy {
        TiePolicy::instance_order()
    }

    #[test]
    fn tie_policy_orders_candidates() {
        let t = TiePolicy::prefer(["b"]);
        assert_eq!(t.choose([(0, "a"), (1, "b")]), Some(1));
        assert_eq!(ties().choose([(0, "a"), (1, "b")]), Some(0));
        assert_eq!(ties().choose(std::iter::empty()), None);
    }

    #[test]
    fn selects_terrain_question_under_truthful_bids() {
        let game = shoes();
        let bids = game.base_values();
        let q = select_question(&game, &bids, &ties()).unwrap();
        assert_eq!(game.questions[q].id, "terrain");
    }

    #[test]
    fn indifferent_bidder_tie_breaks_by_instance_order() {
        let game = shoes();
        // advertiser 1 alone values both questions at 15
        let bids = vec![rat(50, 1), Rat::zero()];
        let q = select_question(&game, &bids, &ties()).unwrap();
        assert_eq!(game.questions[q].id, "terrain");
        let q = select_question(&game, &bids, &TiePolicy::prefer(["targeted"])).unwrap();
        assert_eq!(game.questions[q].id, "targeted");
    }

    #[test]
    fn single_question_instance_selects_it() {
        let mut inst = gen_running_shoes::<Rat>();
        inst.questions.truncate(1);
        let game = inst.reduce().unwrap();
        assert_eq!(select_question(&game, &game.base_values(), &ties()).unwrap(), 0);
    }

    #[test]
    fn allocation_matches_worked_example() {
        let game = shoes();
        let bids = game.base_values();
        assert_eq!(allocate(&game, &bids, 0, 0, &ties()).unwrap(), Some(0)); // click
        assert_eq!(allocate(&game, &bids, 0, 1, &ties()).unwrap(), Some(1)); // no-click
        let zeros = vec![Rat::zero(); 2];
        assert_eq!(allocate(&game, &zeros, 0, 0, &ties()).unwrap(), None);
    }

    #[test]
    fn welfare_without_matches_worked_example() {
        let game = shoes();
        let bids = game.base_values();
        assert_eq!(welfare_without(&game, &bids, 0).unwrap(), rat(9, 1));
        assert_eq!(welfare_without(&game, &bids, 1).unwrap(), rat(15, 1));
        assert!(matches!(
            welfare_without(&game, &bids, 5),
            Err(Error::AdvertiserIndex { .. })
        ));
    }

    #[test]
    fn sole_advertiser_imposes_no_externality() {
        let inst = Instance::<Rat> {
            states: vec!["s0".into(), "s1".into()],
            prior: vec![rat(1, 2), rat(1, 2)],
            questions: vec![Question {
                id: "q".into(),
                signals: vec!["a".into(), "b".into()],
                conditional: vec![vec![Rat::one(), Rat::zero()], vec![Rat::zero(), Rat::one()]],
            }],
            advertisers: vec![Advertiser {
                id: "solo".into(),
                base_value: rat(7, 1),
                conversion: vec![rat(1, 2), Rat::one()],
            }],
        };
        let game = inst.reduce().unwrap();
        let bids = game.base_values();
        assert_eq!(welfare_without(&game, &bids, 0).unwrap(), Rat::zero());
        let out = run_direct(&game, &bids, &ties()).unwrap();
        assert_eq!(out.expected_payment, vec![Rat::zero()]);
        assert!(out.per_signal.iter().all(|s| s.winner == Some(0)));
    }

    #[test]
    fn run_direct_matches_worked_example() {
        let game = shoes();
        let bids = game.base_values();
        let out = run_direct(&game, &bids, &ties()).unwrap();
        assert_eq!(out.chosen_question, "terrain");
        assert_eq!(out.expected_welfare, rat(24, 1));
        assert_eq!(out.expected_payment, vec![Rat::zero(), Rat::zero()]);
        assert_eq!(out.expected_delivered_conversion, vec![rat(3, 10), rat(3, 10)]);
        assert_eq!(out.expected_utility, vec![rat(15, 1), rat(9, 1)]);
        assert_eq!(out.per_signal[0].winner, Some(0));
        assert_eq!(out.per_signal[0].winner_effective_value, rat(30, 1));
        assert_eq!(out.per_signal[0].second_price, Rat::zero());
        assert_eq!(out.per_signal[1].winner, Some(1));
        assert_eq!(out.per_signal[1].winner_effective_value, rat(18, 1));
    }

    #[test]
    fn run_direct_on_poa_instance_is_efficient() {
        let inst = gen_poa_instance::<Rat>(3, rat(1, 9)).unwrap();
        let game = inst.reduce().unwrap();
        let bids = game.base_values();
        let out = run_direct(&game, &bids, &ties()).unwrap();
        assert_eq!(out.chosen_question, "revealing");
        assert_eq!(out.expected_welfare, Rat::one());
        assert_eq!(out.expected_welfare, brute_force_optimal(&inst, &bids).unwrap());
    }

    #[test]
    fn decomposition_is_zero_on_worked_example() {
        let game = shoes();
        let bids = game.base_values();
        let d = decompose_payment(&game, &bids, &ties()).unwrap();
        for parts in &d.per_advertiser {
            assert_eq!(parts.stage1_externality, Rat::zero());
            assert_eq!(parts.expected_second_price, Rat::zero());
            assert_eq!(parts.total, Rat::zero());
        }
    }

    #[test]
    fn decomposition_totals_equal_vcg_payments_on_random_instances() {
        let params = RandomInstanceParams::default();
        for seed in 0..120u64 {
            let inst = gen_random_instance::<Rat>(&params, seed);
            let game = inst.reduce().unwrap();
            let bids = game.base_values();
            let out = run_direct(&game, &bids, &ties()).unwrap();
            let d = decompose_payment(&game, &bids, &ties()).unwrap();
            for (i, parts) in d.per_advertiser.iter().enumerate() {
                assert_eq!(parts.total, out.expected_payment[i], "seed {seed} advertiser {i}");
                assert!(parts.stage1_externality >= Rat::zero(), "seed {seed}");
                assert!(out.expected_payment[i] >= Rat::zero(), "seed {seed}");
            }
        }
    }

    #[test]
    fn scaling_bids_preserves_selection() {
        let params = RandomInstanceParams::default();
        let scales = [rat(1, 3), rat(2, 1), rat(7, 5), rat(5, 2)];
        for seed in 0..50u64 {
            let inst = gen_random_instance::<Rat>(&params, seed);
            let game = inst.reduce().unwrap();
            let bids = game.base_values();
            let out = run_direct(&game, &bids, &ties()).unwrap();
            for scale in &scales {
                let scaled: Vec<Rat> = bids.iter().map(|b| b * scale).collect();
                let out2 = run_direct(&game, &scaled, &ties()).unwrap();
                assert_eq!(out.chosen_question, out2.chosen_question, "seed {seed}");
                for (a, b) in out.per_signal.iter().zip(&out2.per_signal) {
                    assert_eq!(a.winner, b.winner, "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn trajectories_are_seed_deterministic() {
        let inst = gen_running_shoes::<Rat>();
        let bids = inst.base_values();
        for seed in [0u64, 1, 42, 123456789] {
            let a = sample_trajectory(&inst, &bids, &ties(), seed).unwrap();
            let b = sample_trajectory(&inst, &bids, &ties(), seed).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn deterministic_instance_has_unique_trajectory() {
        let inst = Instance::<Rat> {
            states: vec!["only".into()],
            prior: vec![Rat::one()],
            questions: vec![Question {
                id: "q".into(),
                signals: vec!["shown".into()],
                conditional: vec![vec![Rat::one()]],
            }],
            advertisers: vec![Advertiser {
                id: "a".into(),
                base_value: rat(2, 1),
                conversion: vec![Rat::one()],
            }],
        };
        let bids = inst.base_values();
        for seed in 0..20u64 {
            let t = sample_trajectory(&inst, &bids, &ties(), seed).unwrap();
            assert_eq!(t.state, "only");
            assert_eq!(t.signal, "shown");
            assert_eq!(t.winner.as_deref(), Some("a"));
            assert_eq!(t.second_price, Rat::zero());
        }
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            // externality payments are non-negative, split exactly into the
            // question-stage and second-price parts, and leave truthful
            // bidders with non-negative utility
            #[test]
            fn vcg_payment_properties(seed in any::<u64>()) {
                let inst = gen_random_instance::<Rat>(&RandomInstanceParams::default(), seed);
                let game = inst.reduce().unwrap();
                let bids = game.base_values();
                let ties = TiePolicy::instance_order();
                let out = run_direct(&game, &bids, &ties).unwrap();
                let decomposition = decompose_payment(&game, &bids, &ties).unwrap();
                for (i, parts) in decomposition.per_advertiser.iter().enumerate() {
                    prop_assert!(out.expected_payment[i] >= Rat::zero());
                    prop_assert!(out.expected_utility[i] >= Rat::zero());
                    prop_assert_eq!(&parts.total, &out.expected_payment[i]);
                    prop_assert!(parts.stage1_externality >= Rat::zero());
                }
                for s in &out.per_signal {
                    prop_assert!(s.second_price <= s.winner_effective_value);
                }
            }
        }
    }

    #[test]
    fn empirical_winner_frequency_concentrates() {
        let inst = gen_running_shoes::<Rat>();
        let bids = inst.base_values();
        let n = 100_000u64;
        let mut adv1 = 0u64;
        for seed in 0..n {
            let t = sample_trajectory(&inst, &bids, &ties(), seed).unwrap();
            assert_eq!(t.question, "terrain");
            match t.winner.as_deref() {
                Some("trail_shoes") => adv1 += 1,
                Some("road_shoes") => {}
                other => panic!("unexpected winner {other:?}"),
            }
        }
        let freq = adv1 as f64 / n as f64;
        // binomial: three standard errors around 1/2
        let tolerance = 3.0 * (0.25 / n as f64).sqrt();
        assert!((freq - 0.5).abs() <= tolerance, "freq {freq} tolerance {tolerance}");
    }
}
