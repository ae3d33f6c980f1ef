//! Shared corpus for the integration suites: the named families plus a
//! seeded batch of random instances.

use suggestion_auctions::analysis::{
    gen_poa_instance, gen_proxy_counterexample, gen_random_instance, gen_running_shoes,
    RandomInstanceParams,
};
use suggestion_auctions::model::{Instance, ReducedGame};
use suggestion_auctions::{Rat, Scalar};

pub const RANDOM_SEEDS: std::ops::Range<u64> = 1000..1200;

/// Every state-backed corpus instance: running shoes, the PoA family at
/// m in {3, 5, 10} with delta = 1/m^2, and 200 seeded random instances.
pub fn bayes_corpus() -> Vec<(String, Instance<Rat>)> {
    let mut corpus: Vec<(String, Instance<Rat>)> =
        vec![("running-shoes".into(), gen_running_shoes())];
    for m in [3usize, 5, 10] {
        let delta = Rat::from_ratio(1, (m * m) as i64);
        corpus.push((format!("poa(m={m})"), gen_poa_instance(m, delta).unwrap()));
    }
    let params = RandomInstanceParams::default();
    for seed in RANDOM_SEEDS {
        corpus.push((format!("random({seed})"), gen_random_instance(&params, seed)));
    }
    corpus
}

/// The full mechanism-level corpus: every state-backed instance reduced,
/// plus the reduced-form proxy counterexample.
pub fn reduced_corpus() -> Vec<(String, ReducedGame<Rat>)> {
    let mut corpus: Vec<(String, ReducedGame<Rat>)> = bayes_corpus()
        .into_iter()
        .map(|(name, inst)| {
            let game = inst.reduce().unwrap();
            (name, game)
        })
        .collect();
    corpus.push(("prop1".into(), gen_proxy_counterexample()));
    corpus
}
