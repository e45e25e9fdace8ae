//! Trains the desk-scale experiment and prints held-out retrieval metrics.
//!
//! ```text
//! cargo run --release -p wordsem --example desk_smoke -- [seed] [epochs]
//! ```

use std::env;

use wordsem::harness::{evaluate, prepare, run_training, test_inputs, ExperimentSpec};
use wordsem::tinynet::Network;

fn main() -> wordsem::Result<()> {
    let mut args = env::args().skip(1).map(|a| a.parse::<u64>());
    let seed = args.next().transpose().ok().flatten().unwrap_or(2);
    let mut spec = ExperimentSpec::desk(seed);
    if let Some(Ok(epochs)) = args.next() {
        spec.train.epochs = epochs as usize;
    }

    let (vocab, dataset) = prepare(&spec)?;
    println!("{} words, K={}, {} images", vocab.annotations.len(), vocab.k(), dataset.len());
    let net = Network::init(&spec.net_spec(vocab.k())?, spec.train.seed)?;
    let run = run_training(net, &dataset, &spec.train, |e| {
        println!(
            "epoch {:>3}  lr {:.4}  loss {:.4}  tries {:.2}  zero {:.2}",
            e.epoch, e.learning_rate, e.mean_loss, e.mean_tries, e.zero_update_fraction
        );
    })?;
    let result = evaluate(&run.net, &test_inputs(&dataset), &spec.eval)?;
    for t in &result.tasks {
        println!("{:<24} mAP {:.4}  P@1 {:.4}  R-prec {:.4}", t.task, t.map, t.p_at_1, t.r_precision);
    }
    Ok(())
}
