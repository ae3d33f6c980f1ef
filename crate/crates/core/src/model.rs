//! Problem instances and their Bayesian arithmetic.
//!
//! An [`Instance`] couples a prior over latent user states with the signal
//! channel of each candidate question and the advertisers' state-dependent
//! conversion rates. The mechanisms never look at states directly: they
//! consume the induced per-question signal lotteries, exposed here as
//! [`ReducedGame`]. A reduced game can also be written down directly, for
//! games that are specified straight in lottery form.

use std::fmt;

use crate::scalar::{sum, Scalar};
use crate::{Error, Result};

/// A full problem instance: latent states with a public prior, candidate
/// questions with per-state signal distributions, and advertisers.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S> {
    pub states: Vec<String>,
    /// Prior probability per state, aligned with `states`.
    pub prior: Vec<S>,
    pub questions: Vec<Question<S>>,
    pub advertisers: Vec<Advertiser<S>>,
}

/// A candidate question and the distribution of its observable signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Question<S> {
    pub id: String,
    pub signals: Vec<String>,
    /// `conditional[signal][state]`: probability of the signal given the
    /// state. Each state's column sums to one.
    pub conditional: Vec<Vec<S>>,
}

/// An advertiser: a per-conversion base value and public per-state
/// conversion rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Advertiser<S> {
    pub id: String,
    pub base_value: S,
    /// Conversion rate per state, aligned with the instance's states.
    pub conversion: Vec<S>,
}

/// Posterior belief after observing one signal of one question.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState<S> {
    pub question: String,
    pub signal: String,
    /// Marginal probability of the signal under the prior.
    pub marginal: S,
    /// Posterior probability per state, aligned with the instance's states.
    pub posterior: Vec<S>,
}

/// One invariant violation found by a `validate` call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Path into the offending field, e.g. `questions[targeted].conditional[state s2]`.
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Violation { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn check_unique(labels: impl Iterator<Item = (String, String)>, out: &mut Vec<Violation>) {
    let mut seen = std::collections::HashSet::new();
    for (path, label) in labels {
        if !seen.insert(label.clone()) {
            out.push(Violation::new(path, format!("duplicate label `{label}`")));
        }
    }
}

impl<S: Scalar> Instance<S> {
    /// Every invariant violation in the instance, with a path to the
    /// offending field. Empty iff the instance is valid. Violations are
    /// data, not errors.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let n_states = self.states.len();
        if n_states == 0 {
            v.push(Violation::new("states", "at least one state required"));
        }
        if self.questions.is_empty() {
            v.push(Violation::new("questions", "at least one question required"));
        }
        if self.advertisers.is_empty() {
            v.push(Violation::new("advertisers", "at least one advertiser required"));
        }
        check_unique(self.states.iter().map(|s| (format!("states[{s}]"), s.clone())), &mut v);
        check_unique(
            self.questions.iter().enumerate().map(|(i, q)| (format!("questions[{i}]"), q.id.clone())),
            &mut v,
        );
        check_unique(
            self.advertisers.iter().enumerate().map(|(i, a)| (format!("advertisers[{i}]"), a.id.clone())),
            &mut v,
        );

        if self.prior.len() != n_states {
            v.push(Violation::new(
                "prior",
                format!("{} entries for {} states", self.prior.len(), n_states),
            ));
        } else {
            for (s, p) in self.states.iter().zip(&self.prior) {
                if p < &S::zero() {
                    v.push(Violation::new(format!("prior[{s}]"), format!("negative probability {p}")));
                }
            }
            let total = sum(self.prior.iter().cloned());
            if !total.is_one() {
                v.push(Violation::new("prior", format!("sums to {total}, expected 1")));
            }
        }

        for q in &self.questions {
            let path = format!("questions[{}]", q.id);
            if q.signals.is_empty() {
                v.push(Violation::new(&path, "at least one signal required"));
            }
            check_unique(
                q.signals.iter().map(|s| (format!("{path}.signals[{s}]"), s.clone())),
                &mut v,
            );
            if q.conditional.len() != q.signals.len() {
                v.push(Violation::new(
                    format!("{path}.conditional"),
                    format!("{} rows for {} signals", q.conditional.len(), q.signals.len()),
                ));
                continue;
            }
            let mut shape_ok = true;
            for (sig, row) in q.signals.iter().zip(&q.conditional) {
                if row.len() != n_states {
                    v.push(Violation::new(
                        format!("{path}.conditional[{sig}]"),
                        format!("{} entries for {} states", row.len(), n_states),
                    ));
                    shape_ok = false;
                    continue;
                }
                for (s, p) in self.states.iter().zip(row) {
                    if p < &S::zero() {
                        v.push(Violation::new(
                            format!("{path}.conditional[{sig}][{s}]"),
                            format!("negative probability {p}"),
                        ));
                    }
                }
            }
            if shape_ok {
                for (t, s) in self.states.iter().enumerate() {
                    let col = sum(q.conditional.iter().map(|row| row[t].clone()));
                    if !col.is_one() {
                        v.push(Violation::new(
                            format!("{path}.conditional[state {s}]"),
                            format!("signal probabilities sum to {col}, expected 1"),
                        ));
                    }
                }
            }
        }

        for a in &self.advertisers {
            let path = format!("advertisers[{}]", a.id);
            if a.base_value < S::zero() {
                v.push(Violation::new(
                    format!("{path}.base_value"),
                    format!("negative value {}", a.base_value),
                ));
            }
            if a.conversion.len() != n_states {
                v.push(Violation::new(
                    format!("{path}.conversion"),
                    format!("{} entries for {} states", a.conversion.len(), n_states),
                ));
                continue;
            }
            for (s, r) in self.states.iter().zip(&a.conversion) {
                if r < &S::zero() {
                    v.push(Violation::new(
                        format!("{path}.conversion[{s}]"),
                        format!("negative conversion rate {r}"),
                    ));
                }
            }
        }
        v
    }

    pub fn question_index(&self, id: &str) -> Result<usize> {
        self.questions
            .iter()
            .position(|q| q.id == id)
            .ok_or_else(|| Error::UnknownQuestion(id.to_string()))
    }

    pub fn signal_index(&self, question: usize, id: &str) -> Result<usize> {
        let q = &self.questions[question];
        q.signals
            .iter()
            .position(|s| s == id)
            .ok_or_else(|| Error::UnknownSignal { question: q.id.clone(), signal: id.to_string() })
    }

    /// Each advertiser's base value, in instance order.
    pub fn base_values(&self) -> Vec<S> {
        self.advertisers.iter().map(|a| a.base_value.clone()).collect()
    }

    fn check_advertiser(&self, index: usize) -> Result<()> {
        if index < self.advertisers.len() {
            Ok(())
        } else {
            Err(Error::AdvertiserIndex { index, count: self.advertisers.len() })
        }
    }

    fn check_bids(&self, bids: &[S]) -> Result<()> {
        if bids.len() != self.advertisers.len() {
            return Err(Error::BidArity { expected: self.advertisers.len(), got: bids.len() });
        }
        for (i, b) in bids.iter().enumerate() {
            if b < &S::zero() {
                return Err(Error::NegativeBid(i));
            }
        }
        Ok(())
    }

    /// Marginal probability of observing `signal` when `question` is asked:
    /// the prior-weighted sum of the signal's conditional probabilities.
    pub fn marginal_signal(&self, question: &str, signal: &str) -> Result<S> {
        let q = self.question_index(question)?;
        let s = self.signal_index(q, signal)?;
        Ok(self.marginal_by_index(q, s))
    }

    fn marginal_by_index(&self, question: usize, signal: usize) -> S {
        let row = &self.questions[question].conditional[signal];
        sum(row.iter().zip(&self.prior).map(|(c, p)| c.clone() * p.clone()))
    }

    /// Bayes update after observing `signal` from `question`. Defined only
    /// for positive-probability signals.
    pub fn posterior(&self, question: &str, signal: &str) -> Result<BeliefState<S>> {
        let q = self.question_index(question)?;
        let s = self.signal_index(q, signal)?;
        let marginal = self.marginal_by_index(q, s);
        if marginal <= S::zero() {
            return Err(Error::ZeroMeasureSignal {
                question: question.to_string(),
                signal: signal.to_string(),
            });
        }
        let row = &self.questions[q].conditional[s];
        let posterior = row
            .iter()
            .zip(&self.prior)
            .map(|(c, p)| c.clone() * p.clone() / marginal.clone())
            .collect();
        Ok(BeliefState {
            question: question.to_string(),
            signal: signal.to_string(),
            marginal,
            posterior,
        })
    }

    /// Posterior expected conversion rate of one advertiser after observing
    /// `(question, signal)`.
    pub fn posterior_conversion(&self, question: &str, signal: &str, advertiser: usize) -> Result<S> {
        self.check_advertiser(advertiser)?;
        let belief = self.posterior(question, signal)?;
        let conv = &self.advertisers[advertiser].conversion;
        Ok(sum(conv.iter().zip(&belief.posterior).map(|(r, p)| r.clone() * p.clone())))
    }

    /// The advertiser's bid times its posterior expected conversion rate.
    pub fn effective_value(
        &self,
        bids: &[S],
        question: &str,
        signal: &str,
        advertiser: usize,
    ) -> Result<S> {
        self.check_bids(bids)?;
        let rate = self.posterior_conversion(question, signal, advertiser)?;
        Ok(bids[advertiser].clone() * rate)
    }

    /// Ex-ante expected welfare of asking `question` under the given bids:
    /// the signal-probability-weighted best effective value, over the
    /// question's positive-probability signals.
    pub fn expected_question_welfare(&self, bids: &[S], question: &str) -> Result<S> {
        self.check_bids(bids)?;
        let q = self.question_index(question)?;
        let mut total = S::zero();
        for s in 0..self.questions[q].signals.len() {
            if self.marginal_by_index(q, s) <= S::zero() {
                continue;
            }
            // S(sigma) * max_j b_j * alpha_j(l, sigma), with the marginal
            // cancelled against the posterior's normalization.
            let row = &self.questions[q].conditional[s];
            let mut best = S::zero();
            for (j, adv) in self.advertisers.iter().enumerate() {
                let unnorm = sum(
                    adv.conversion
                        .iter()
                        .zip(&self.prior)
                        .zip(row)
                        .map(|((r, p), c)| r.clone() * p.clone() * c.clone()),
                );
                let value = bids[j].clone() * unnorm;
                if value > best {
                    best = value;
                }
            }
            total = total + best;
        }
        Ok(total)
    }

    /// Reduce the instance to its per-question signal lotteries. Fails on
    /// invalid instances.
    pub fn reduce(&self) -> Result<ReducedGame<S>> {
        let violations = self.validate();
        if let Some(first) = violations.first() {
            return Err(Error::InvalidInstance(format!(
                "{first}{}",
                if violations.len() > 1 {
                    format!(" (and {} more violations)", violations.len() - 1)
                } else {
                    String::new()
                }
            )));
        }
        let advertisers = self
            .advertisers
            .iter()
            .map(|a| AdvertiserInfo { id: a.id.clone(), base_value: a.base_value.clone() })
            .collect();
        let questions = self
            .questions
            .iter()
            .enumerate()
            .map(|(qi, q)| {
                let signals = q
                    .signals
                    .iter()
                    .enumerate()
                    .filter_map(|(si, sig)| {
                        let prob = self.marginal_by_index(qi, si);
                        if prob <= S::zero() {
                            return None; // zero-probability signals never occur
                        }
                        let row = &q.conditional[si];
                        let rates = self
                            .advertisers
                            .iter()
                            .map(|a| {
                                sum(a.conversion
                                    .iter()
                                    .zip(&self.prior)
                                    .zip(row)
                                    .map(|((r, p), c)| r.clone() * p.clone() * c.clone()))
                                    / prob.clone()
                            })
                            .collect();
                        Some(SignalEntry { id: sig.clone(), prob, rates })
                    })
                    .collect();
                QuestionTable { id: q.id.clone(), signals }
            })
            .collect();
        Ok(ReducedGame { advertisers, questions })
    }
}

/// Advertiser identity and base value, as carried by a reduced game.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvertiserInfo<S> {
    pub id: String,
    pub base_value: S,
}

/// One positive-probability signal of a question: its probability and each
/// advertiser's posterior expected conversion rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalEntry<S> {
    pub id: String,
    pub prob: S,
    pub rates: Vec<S>,
}

/// One question reduced to its signal lottery.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionTable<S> {
    pub id: String,
    pub signals: Vec<SignalEntry<S>>,
}

/// A game in signal-lottery form: everything the mechanisms consume.
///
/// [`Instance::reduce`] produces one exactly; games specified directly in
/// lottery form (per-question signal probabilities and posterior conversion
/// rates, with no common state space behind them) construct one by hand.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedGame<S> {
    pub advertisers: Vec<AdvertiserInfo<S>>,
    pub questions: Vec<QuestionTable<S>>,
}

impl<S: Scalar> ReducedGame<S> {
    pub fn advertiser_count(&self) -> usize {
        self.advertisers.len()
    }

    pub fn question_ids(&self) -> Vec<&str> {
        self.questions.iter().map(|q| q.id.as_str()).collect()
    }

    pub fn question_index(&self, id: &str) -> Result<usize> {
        self.questions
            .iter()
            .position(|q| q.id == id)
            .ok_or_else(|| Error::UnknownQuestion(id.to_string()))
    }

    pub fn signal_index(&self, question: usize, id: &str) -> Result<usize> {
        let q = &self.questions[question];
        q.signals
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::UnknownSignal { question: q.id.clone(), signal: id.to_string() })
    }

    pub fn advertiser_index(&self, id: &str) -> Result<usize> {
        self.advertisers
            .iter()
            .position(|a| a.id == id)
            .ok_or_else(|| Error::UnknownAdvertiser(id.to_string()))
    }

    /// Each advertiser's base value, in order.
    pub fn base_values(&self) -> Vec<S> {
        self.advertisers.iter().map(|a| a.base_value.clone()).collect()
    }

    pub(crate) fn check_bids(&self, bids: &[S]) -> Result<()> {
        if bids.len() != self.advertisers.len() {
            return Err(Error::BidArity { expected: self.advertisers.len(), got: bids.len() });
        }
        for (i, b) in bids.iter().enumerate() {
            if b < &S::zero() {
                return Err(Error::NegativeBid(i));
            }
        }
        Ok(())
    }

    /// Invariant violations of the lottery form itself: positive signal
    /// probabilities summing to one per question, non-negative rates with
    /// one entry per advertiser, non-negative base values.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let n = self.advertisers.len();
        if n == 0 {
            v.push(Violation::new("advertisers", "at least one advertiser required"));
        }
        if self.questions.is_empty() {
            v.push(Violation::new("questions", "at least one question required"));
        }
        check_unique(
            self.advertisers.iter().map(|a| (format!("advertisers[{}]", a.id), a.id.clone())),
            &mut v,
        );
        check_unique(
            self.questions.iter().map(|q| (format!("questions[{}]", q.id), q.id.clone())),
            &mut v,
        );
        for a in &self.advertisers {
            if a.base_value < S::zero() {
                v.push(Violation::new(
                    format!("advertisers[{}].base_value", a.id),
                    format!("negative value {}", a.base_value),
                ));
            }
        }
        for q in &self.questions {
            let path = format!("questions[{}]", q.id);
            if q.signals.is_empty() {
                v.push(Violation::new(&path, "at least one signal required"));
            }
            check_unique(
                q.signals.iter().map(|s| (format!("{path}.signals[{}]", s.id), s.id.clone())),
                &mut v,
            );
            for s in &q.signals {
                if s.prob <= S::zero() {
                    v.push(Violation::new(
                        format!("{path}.signals[{}].prob", s.id),
                        format!("probability {} is not positive", s.prob),
                    ));
                }
                if s.rates.len() != n {
                    v.push(Violation::new(
                        format!("{path}.signals[{}].rates", s.id),
                        format!("{} entries for {} advertisers", s.rates.len(), n),
                    ));
                    continue;
                }
                for (a, r) in self.advertisers.iter().zip(&s.rates) {
                    if r < &S::zero() {
                        v.push(Violation::new(
                            format!("{path}.signals[{}].rates[{}]", s.id, a.id),
                            format!("negative conversion rate {r}"),
                        ));
                    }
                }
            }
            let total = sum(q.signals.iter().map(|s| s.prob.clone()));
            if !total.is_one() {
                v.push(Violation::new(&path, format!("signal probabilities sum to {total}, expected 1")));
            }
        }
        v
    }
}
