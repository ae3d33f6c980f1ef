//! Instance, game and profile documents: JSON with rationals as strings.
//!
//! Rationals are carried as `"p/q"` or decimal-literal strings so exactness
//! survives serialization. Two game layouts share `schema_version` 1: the
//! state-backed layout (`states`/`prior`/conditional rows) and the
//! signal-lottery layout (per-signal probabilities and conversion rates,
//! no state space). The presence of a `states` field selects the layout.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::model::{
    Advertiser, AdvertiserInfo, Instance, Question, QuestionTable, ReducedGame, SignalEntry,
    Violation,
};
use crate::modular::{AdvertiserStrategy, StrategyProfile};
use crate::Rat;

pub const SCHEMA_VERSION: u64 = 1;

/// Parse `"p/q"`, an integer, or a plain decimal literal into an exact
/// rational.
pub fn parse_rational(s: &str) -> Result<Rat, String> {
    let t = s.trim();
    if t.is_empty() {
        return Err("empty rational".into());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| format!("bad numerator in `{t}`"))?;
        let d: BigInt = d.trim().parse().map_err(|_| format!("bad denominator in `{t}`"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in `{t}`"));
        }
        return Ok(Rat::new(n, d));
    }
    let (negative, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("`{t}` is not a rational"));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!("`{t}` is not a rational"));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| format!("`{t}` is not a rational"))?
    };
    if negative {
        numer = -numer;
    }
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(Rat::new(numer, denom))
}

/// Canonical exact rendering: lowest terms, `p` or `p/q`.
pub fn render_rational(r: &Rat) -> String {
    r.to_string()
}

/// Decimal rendering rounded to `significant` digits (half away from zero),
/// with trailing zeros trimmed.
pub fn decimal_string(r: &Rat, significant: u32) -> String {
    let significant = significant.max(1) as i64;
    if r.is_zero() {
        return "0".into();
    }
    let negative = r.is_negative();
    let a = r.numer().abs();
    let b = r.denom().clone();

    // exponent k with 10^k <= a/b < 10^(k+1)
    let mut k = a.to_string().len() as i64 - b.to_string().len() as i64;
    let pow10 = |e: i64| -> BigInt { BigInt::from(10u32).pow(e.max(0) as u32) };
    if a < &b * pow10(k) {
        k -= 1;
    } else if a >= &b * pow10(k + 1) {
        k += 1;
    }

    let mut scale = significant - 1 - k;
    let (num, den) = if scale >= 0 { (&a * pow10(scale), b) } else { (a, &b * pow10(-scale)) };
    let mut q = &num / &den;
    let rem = &num % &den;
    if BigInt::from(2u32) * rem >= den {
        q += 1;
    }
    if q.to_string().len() as i64 > significant {
        q /= 10;
        scale -= 1;
    }

    let sign = if negative { "-" } else { "" };
    if scale <= 0 {
        let mut s = q.to_string();
        s.push_str(&"0".repeat((-scale) as usize));
        return format!("{sign}{s}");
    }
    let mut digits = q.to_string();
    while (digits.len() as i64) < scale + 1 {
        digits.insert(0, '0');
    }
    let split = digits.len() - scale as usize;
    let int_part = &digits[..split];
    let frac_part = digits[split..].trim_end_matches('0');
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionDocument {
    pub id: String,
    pub signals: Vec<String>,
    /// Row-major, one row per signal, one column per state.
    pub conditional: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdvertiserDocument {
    pub id: String,
    pub base_value: String,
    /// One conversion rate per state.
    pub conversion: Vec<String>,
}

/// State-backed instance document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BayesDocument {
    pub schema_version: u64,
    pub states: Vec<String>,
    pub prior: Vec<String>,
    pub questions: Vec<QuestionDocument>,
    pub advertisers: Vec<AdvertiserDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedSignalDocument {
    pub id: String,
    pub prob: String,
    /// One posterior conversion rate per advertiser.
    pub rates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedQuestionDocument {
    pub id: String,
    pub signals: Vec<ReducedSignalDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedAdvertiserDocument {
    pub id: String,
    pub base_value: String,
}

/// Signal-lottery game document (no state space).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedDocument {
    pub schema_version: u64,
    pub advertisers: Vec<ReducedAdvertiserDocument>,
    pub questions: Vec<ReducedQuestionDocument>,
}

/// A parsed game in either layout.
#[derive(Debug, Clone, PartialEq)]
pub enum Game {
    Bayes(Instance<Rat>),
    Reduced(ReducedGame<Rat>),
}

impl Game {
    pub fn validate(&self) -> Vec<Violation> {
        match self {
            Game::Bayes(inst) => inst.validate(),
            Game::Reduced(game) => game.validate(),
        }
    }

    pub fn reduce(&self) -> crate::Result<ReducedGame<Rat>> {
        match self {
            Game::Bayes(inst) => inst.reduce(),
            Game::Reduced(game) => Ok(game.clone()),
        }
    }

    pub fn as_instance(&self) -> Option<&Instance<Rat>> {
        match self {
            Game::Bayes(inst) => Some(inst),
            Game::Reduced(_) => None,
        }
    }
}

fn parse_at(path: &str, s: &str) -> Result<Rat, String> {
    parse_rational(s).map_err(|e| format!("{path}: {e}"))
}

impl BayesDocument {
    pub fn from_instance(inst: &Instance<Rat>) -> Self {
        BayesDocument {
            schema_version: SCHEMA_VERSION,
            states: inst.states.clone(),
            prior: inst.prior.iter().map(render_rational).collect(),
            questions: inst
                .questions
                .iter()
                .map(|q| QuestionDocument {
                    id: q.id.clone(),
                    signals: q.signals.clone(),
                    conditional: q
                        .conditional
                        .iter()
                        .map(|row| row.iter().map(render_rational).collect())
                        .collect(),
                })
                .collect(),
            advertisers: inst
                .advertisers
                .iter()
                .map(|a| AdvertiserDocument {
                    id: a.id.clone(),
                    base_value: render_rational(&a.base_value),
                    conversion: a.conversion.iter().map(render_rational).collect(),
                })
                .collect(),
        }
    }

    pub fn to_instance(&self) -> Result<Instance<Rat>, String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {}", self.schema_version));
        }
        Ok(Instance {
            states: self.states.clone(),
            prior: self
                .prior
                .iter()
                .enumerate()
                .map(|(i, s)| parse_at(&format!("prior[{i}]"), s))
                .collect::<Result<_, _>>()?,
            questions: self
                .questions
                .iter()
                .map(|q| {
                    Ok(Question {
                        id: q.id.clone(),
                        signals: q.signals.clone(),
                        conditional: q
                            .conditional
                            .iter()
                            .enumerate()
                            .map(|(r, row)| {
                                row.iter()
                                    .enumerate()
                                    .map(|(c, s)| {
                                        parse_at(
                                            &format!("questions[{}].conditional[{r}][{c}]", q.id),
                                            s,
                                        )
                                    })
                                    .collect::<Result<_, _>>()
                            })
                            .collect::<Result<_, _>>()?,
                    })
                })
                .collect::<Result<Vec<_>, String>>()?,
            advertisers: self
                .advertisers
                .iter()
                .map(|a| {
                    Ok(Advertiser {
                        id: a.id.clone(),
                        base_value: parse_at(
                            &format!("advertisers[{}].base_value", a.id),
                            &a.base_value,
                        )?,
                        conversion: a
                            .conversion
                            .iter()
                            .enumerate()
                            .map(|(c, s)| {
                                parse_at(&format!("advertisers[{}].conversion[{c}]", a.id), s)
                            })
                            .collect::<Result<_, _>>()?,
                    })
                })
                .collect::<Result<Vec<_>, String>>()?,
        })
    }
}

impl ReducedDocument {
    pub fn from_game(game: &ReducedGame<Rat>) -> Self {
        ReducedDocument {
            schema_version: SCHEMA_VERSION,
            advertisers: game
                .advertisers
                .iter()
                .map(|a| ReducedAdvertiserDocument {
                    id: a.id.clone(),
                    base_value: render_rational(&a.base_value),
                })
                .collect(),
            questions: game
                .questions
                .iter()
                .map(|q| ReducedQuestionDocument {
                    id: q.id.clone(),
                    signals: q
                        .signals
                        .iter()
                        .map(|s| ReducedSignalDocument {
                            id: s.id.clone(),
                            prob: render_rational(&s.prob),
                            rates: s.rates.iter().map(render_rational).collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_game(&self) -> Result<ReducedGame<Rat>, String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {}", self.schema_version));
        }
        Ok(ReducedGame {
            advertisers: self
                .advertisers
                .iter()
                .map(|a| {
                    Ok(AdvertiserInfo {
                        id: a.id.clone(),
                        base_value: parse_at(
                            &format!("advertisers[{}].base_value", a.id),
                            &a.base_value,
                        )?,
                    })
                })
                .collect::<Result<Vec<_>, String>>()?,
            questions: self
                .questions
                .iter()
                .map(|q| {
                    Ok(QuestionTable {
                        id: q.id.clone(),
                        signals: q
                            .signals
                            .iter()
                            .map(|s| -> Result<SignalEntry<Rat>, String> {
                                Ok(SignalEntry {
                                    id: s.id.clone(),
                                    prob: parse_at(
                                        &format!("questions[{}].signals[{}].prob", q.id, s.id),
                                        &s.prob,
                                    )?,
                                    rates: s
                                        .rates
                                        .iter()
                                        .enumerate()
                                        .map(|(i, r)| {
                                            parse_at(
                                                &format!(
                                                    "questions[{}].signals[{}].rates[{i}]",
                                                    q.id, s.id
                                                ),
                                                r,
                                            )
                                        })
                                        .collect::<Result<_, _>>()?,
                                })
                            })
                            .collect::<Result<_, _>>()?,
                    })
                })
                .collect::<Result<Vec<_>, String>>()?,
        })
    }
}

/// Serialize a game to its canonical document JSON.
pub fn game_to_json(game: &Game) -> String {
    let mut text = match game {
        Game::Bayes(inst) => {
            serde_json::to_string_pretty(&BayesDocument::from_instance(inst)).expect("serializable")
        }
        Game::Reduced(g) => {
            serde_json::to_string_pretty(&ReducedDocument::from_game(g)).expect("serializable")
        }
    };
    text.push('\n');
    text
}

/// Parse a game document in either layout. The `states` field selects the
/// state-backed layout.
pub fn game_from_json(text: &str) -> Result<Game, String> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("not valid JSON: {e}"))?;
    let obj = value.as_object().ok_or("document must be a JSON object")?;
    if !obj.contains_key("schema_version") {
        return Err("missing schema_version".into());
    }
    if obj.contains_key("states") {
        let doc: BayesDocument =
            serde_json::from_value(value).map_err(|e| format!("bad instance document: {e}"))?;
        Ok(Game::Bayes(doc.to_instance()?))
    } else {
        let doc: ReducedDocument =
            serde_json::from_value(value).map_err(|e| format!("bad game document: {e}"))?;
        Ok(Game::Reduced(doc.to_game()?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileAdvertiserDocument {
    pub id: String,
    /// Stage-1 bid per question id.
    pub stage1: BTreeMap<String, String>,
    /// Stage-2 bid per question id per signal id.
    pub stage2: BTreeMap<String, BTreeMap<String, String>>,
}

/// Strategy-profile document, keyed by question and signal ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub schema_version: u64,
    pub advertisers: Vec<ProfileAdvertiserDocument>,
}

impl ProfileDocument {
    pub fn from_profile(game: &ReducedGame<Rat>, profile: &StrategyProfile<Rat>) -> Self {
        ProfileDocument {
            schema_version: SCHEMA_VERSION,
            advertisers: game
                .advertisers
                .iter()
                .zip(&profile.advertisers)
                .map(|(info, plan)| ProfileAdvertiserDocument {
                    id: info.id.clone(),
                    stage1: game
                        .questions
                        .iter()
                        .zip(&plan.stage1)
                        .map(|(q, b)| (q.id.clone(), render_rational(b)))
                        .collect(),
                    stage2: game
                        .questions
                        .iter()
                        .zip(&plan.stage2)
                        .map(|(q, bids)| {
                            (
                                q.id.clone(),
                                q.signals
                                    .iter()
                                    .zip(bids)
                                    .map(|(s, b)| (s.id.clone(), render_rational(b)))
                                    .collect(),
                            )
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Resolve the document against a game. Every question needs a stage-1
    /// bid and every positive-probability signal a stage-2 bid; extra cells
    /// (e.g. zero-probability signals) are ignored.
    pub fn to_profile(&self, game: &ReducedGame<Rat>) -> Result<StrategyProfile<Rat>, String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {}", self.schema_version));
        }
        let mut missing = Vec::new();
        let mut advertisers = Vec::with_capacity(game.advertisers.len());
        for info in &game.advertisers {
            let Some(doc) = self.advertisers.iter().find(|a| a.id == info.id) else {
                missing.push(format!("advertiser `{}`", info.id));
                continue;
            };
            let mut stage1 = Vec::with_capacity(game.questions.len());
            let mut stage2 = Vec::with_capacity(game.questions.len());
            for q in &game.questions {
                match doc.stage1.get(&q.id) {
                    Some(b) => stage1.push(parse_at(
                        &format!("advertisers[{}].stage1[{}]", info.id, q.id),
                        b,
                    )?),
                    None => {
                        missing.push(format!("advertisers[{}].stage1[{}]", info.id, q.id));
                        stage1.push(Rat::zero());
                    }
                }
                let empty = BTreeMap::new();
                let cells = doc.stage2.get(&q.id).unwrap_or(&empty);
                let mut bids = Vec::with_capacity(q.signals.len());
                for s in &q.signals {
                    match cells.get(&s.id) {
                        Some(b) => bids.push(parse_at(
                            &format!("advertisers[{}].stage2[{}][{}]", info.id, q.id, s.id),
                            b,
                        )?),
                        None => {
                            missing
                                .push(format!("advertisers[{}].stage2[{}][{}]", info.id, q.id, s.id));
                            bids.push(Rat::zero());
                        }
                    }
                }
                stage2.push(bids);
            }
            advertisers.push(AdvertiserStrategy { stage1, stage2 });
        }
        if !missing.is_empty() {
            return Err(format!("profile is missing: {}", missing.join(", ")));
        }
        Ok(StrategyProfile { advertisers })
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("serializable");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("bad profile document: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{gen_proxy_counterexample, gen_running_shoes};
    use crate::modular::prescribed_equilibrium;
    use crate::scalar::Scalar;
    use crate::TiePolicy;

    #[test]
    fn rational_parsing_accepts_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), Rat::from_ratio(3, 4));
        assert_eq!(parse_rational("-3/4").unwrap(), Rat::from_ratio(-3, 4));
        assert_eq!(parse_rational("0.25").unwrap(), Rat::from_ratio(1, 4));
        assert_eq!(parse_rational("20.25").unwrap(), Rat::from_ratio(81, 4));
        assert_eq!(parse_rational("50").unwrap(), Rat::from_int(50));
        assert_eq!(parse_rational("-0.5").unwrap(), Rat::from_ratio(-1, 2));
        assert_eq!(parse_rational(".5").unwrap(), Rat::from_ratio(1, 2));
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn decimal_rendering_rounds_to_significant_digits() {
        let cases = [
            ((81, 4), "20.25"),
            ((1, 3), "0.333333"),
            ((13500, 1349), "10.0074"),
            ((24, 1), "24"),
            ((1, 2), "0.5"),
            ((-81, 4), "-20.25"),
            ((999999999, 1), "1000000000"),
            ((1, 1000000000), "0.000000001"),
        ];
        for ((n, d), expect) in cases {
            assert_eq!(decimal_string(&Rat::from_ratio(n, d), 6), expect, "{n}/{d}");
        }
        assert_eq!(decimal_string(&Rat::from_ratio(2, 3), 2), "0.67");
        assert_eq!(decimal_string(&Rat::zero(), 6), "0");
    }

    #[test]
    fn game_documents_round_trip() {
        let game = Game::Bayes(gen_running_shoes());
        let json = game_to_json(&game);
        assert_eq!(game_from_json(&json).unwrap(), game);

        let game = Game::Reduced(gen_proxy_counterexample());
        let json = game_to_json(&game);
        assert_eq!(game_from_json(&json).unwrap(), game);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(game_from_json("not json").is_err());
        assert!(game_from_json("{}").is_err());
        assert!(game_from_json(r#"{"schema_version": 2, "states": []}"#).is_err());
        let bad_rational = r#"{
            "schema_version": 1,
            "states": ["s"],
            "prior": ["x"],
            "questions": [{"id": "q", "signals": ["a"], "conditional": [["1"]]}],
            "advertisers": [{"id": "a", "base_value": "1", "conversion": ["1"]}]
        }"#;
        let err = game_from_json(bad_rational).unwrap_err();
        assert!(err.contains("prior[0]"), "{err}");
    }

    #[test]
    fn profile_documents_round_trip_and_report_missing_cells() {
        let game = gen_running_shoes::<Rat>().reduce().unwrap();
        let profile =
            prescribed_equilibrium(&game, &game.base_values(), &TiePolicy::instance_order())
                .unwrap();
        let doc = ProfileDocument::from_profile(&game, &profile);
        let parsed = ProfileDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(parsed.to_profile(&game).unwrap(), profile);

        let mut broken = doc.clone();
        broken.advertisers[0].stage2.get_mut("terrain").unwrap().remove("click");
        let err = broken.to_profile(&game).unwrap_err();
        assert!(err.contains("stage2[terrain][click]"), "{err}");
    }
}
