//! Central finite differences against the analytic backward pass.
//!
//! The check uses the scalar loss `c · Y` for a random fixed `c`. With the
//! dropout masks frozen, that loss is piecewise linear in any single
//! parameter or input coordinate, so a central difference that does not
//! straddle a ReLU or max-pool switch is exact up to rounding. A coordinate
//! whose differences at `h` and `h / 2` disagree straddles a switch, has no
//! unique derivative in that window, and is redrawn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordsem::tinynet::{Gradients, LayerSpec, Mode, NetSpec, Network, Shape};

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;
/// Denominator floor so exact zeros on both sides compare as equal.
pub const FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Default)]
pub struct GradReport {
    pub checked: usize,
    pub redrawn: usize,
    pub max_rel_err: f64,
    pub worst: String,
}

impl GradReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err <= TOLERANCE
    }

    pub fn merge(&mut self, other: GradReport) {
        self.checked += other.checked;
        self.redrawn += other.redrawn;
        if other.max_rel_err > self.max_rel_err {
            self.max_rel_err = other.max_rel_err;
            self.worst = other.worst;
        }
    }
}

fn loss(net: &Network<f64>, x: &[f64], c: &[f64], mode: Mode) -> f64 {
    let y = net.forward_one(x, mode, 0).unwrap().scores;
    y.iter().zip(c).map(|(a, b)| a * b).sum()
}

/// Checks `coords` coordinates drawn tensor-first (each parameter tensor
/// and the input are equally likely), then uniformly within the tensor.
pub fn check_network(spec: &NetSpec, seed: u64, coords: usize) -> GradReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::<f64>::init(spec, seed).unwrap();
    // Non-zero biases so bias paths are exercised away from the origin.
    for t in net.params_mut() {
        if t.name.ends_with(".bias") {
            for b in &mut t.data {
                *b = rng.random_range(-0.1..0.1);
            }
        }
    }
    let mut x: Vec<f64> = (0..net.input_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let c: Vec<f64> = (0..net.num_concepts()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mode = Mode::Train {
        seed: rng.random(),
        dropout: true,
    };

    let out = net.forward_one(&x, mode, 0).unwrap();
    let mut grads = Gradients::zeros_like(&net);
    let dx = net.backward_one(&out, &c, &mut grads).unwrap();

    let n_tensors = net.params().len() + 1;
    let mut report = GradReport::default();
    let mut attempts = 0;
    while report.checked < coords {
        attempts += 1;
        assert!(attempts < coords * 20, "too many coordinates straddle a switch");
        let t = rng.random_range(0..n_tensors);
        let (label, analytic, diff) = if t == net.params().len() {
            let i = rng.random_range(0..x.len());
            let orig = x[i];
            let mut at = |v: f64| {
                x[i] = v;
                loss(&net, &x, &c, mode)
            };
            let d = |h: f64, at: &mut dyn FnMut(f64) -> f64| (at(orig + h) - at(orig - h)) / (2.0 * h);
            let pair = (d(STEP, &mut at), d(STEP / 2.0, &mut at));
            x[i] = orig;
            (format!("input[{i}]"), dx[i], pair)
        } else {
            let i = rng.random_range(0..net.params()[t].data.len());
            let orig = net.params()[t].data[i];
            let name = net.params()[t].name.clone();
            let mut eval = |v: f64| {
                net.params_mut()[t].data[i] = v;
                loss(&net, &x, &c, mode)
            };
            let d = |h: f64, at: &mut dyn FnMut(f64) -> f64| (at(orig + h) - at(orig - h)) / (2.0 * h);
            let pair = (d(STEP, &mut eval), d(STEP / 2.0, &mut eval));
            net.params_mut()[t].data[i] = orig;
            (format!("{name}[{i}]"), grads.tensors[t][i], pair)
        };
        let (fd, fd_half) = diff;
        let scale = fd.abs().max(fd_half.abs()).max(FLOOR);
        if (fd - fd_half).abs() / scale > TOLERANCE {
            report.redrawn += 1;
            continue;
        }
        let err = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(FLOOR);
        report.checked += 1;
        if report.worst.is_empty() || err > report.max_rel_err {
            report.max_rel_err = err;
            report.worst = format!("{label}: analytic {analytic:e} vs numeric {fd:e}");
        }
    }
    report
}

fn head(k: usize) -> LayerSpec {
    LayerSpec::Fc {
        out_dim: k,
        has_bias: false,
    }
}

/// One network per layer kind (followed by the mandatory scoring layer)
/// plus the composed desk preset.
pub fn suite() -> Vec<(&'static str, NetSpec)> {
    let stack = |input: Shape, layers: Vec<LayerSpec>| NetSpec {
        input,
        layers,
        preset: None,
    };
    vec![
        (
            "conv",
            stack(
                Shape::new(2, 5, 6),
                vec![LayerSpec::Conv { out_channels: 3, kernel: 3 }, head(3)],
            ),
        ),
        ("relu", stack(Shape::new(2, 4, 5), vec![LayerSpec::Relu, head(3)])),
        ("maxpool", stack(Shape::new(2, 5, 7), vec![LayerSpec::Maxpool, head(3)])),
        (
            "fc",
            stack(
                Shape::new(1, 3, 4),
                vec![
                    LayerSpec::Fc {
                        out_dim: 5,
                        has_bias: true,
                    },
                    head(3),
                ],
            ),
        ),
        ("dropout", stack(Shape::new(1, 4, 4), vec![LayerSpec::Dropout { rate: 0.5 }, head(3)])),
        ("scoring", stack(Shape::new(1, 2, 5), vec![head(4)])),
        ("desk", NetSpec::desk(8)),
    ]
}

/// Runs every network of [`suite`] for `seeds` seeds.
pub fn run_suite(seeds: u64, coords: usize) -> Vec<(&'static str, GradReport)> {
    suite()
        .into_iter()
        .map(|(name, spec)| {
            let mut total = GradReport::default();
            for seed in 0..seeds {
                total.merge(check_network(&spec, 1000 + seed, coords));
            }
            (name, total)
        })
        .collect()
}
