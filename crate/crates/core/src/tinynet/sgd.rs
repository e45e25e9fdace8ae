use serde::{Deserialize, Serialize};

use super::net::{Gradients, Network};
use super::real::Real;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgdParams {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
}

/// Momentum buffers, one per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocity<T> {
    pub tensors: Vec<Vec<T>>,
}

impl<T: Real> Velocity<T> {
    pub fn zeros_like(net: &Network<T>) -> Self {
        Self {
            tensors: net.params().iter().map(|p| vec![T::ZERO; p.data.len()]).collect(),
        }
    }
}

/// `v <- m v - lr (g + wd w); w <- w + v` on every parameter, biases
/// included. Fails without touching the network if any gradient entry is
/// not finite.
pub fn sgd_step<T: Real>(
    net: &mut Network<T>,
    grads: &Gradients<T>,
    params: &SgdParams,
    velocity: &mut Velocity<T>,
) -> Result<()> {
    let n = net.params().len();
    if grads.tensors.len() != n || velocity.tensors.len() != n {
        return Err(Error::State("gradient or velocity does not match the network".into()));
    }
    for (i, g) in grads.tensors.iter().enumerate() {
        if g.len() != net.params()[i].data.len() || velocity.tensors[i].len() != g.len() {
            return Err(Error::State(format!("tensor {} has a mismatched gradient", net.params()[i].name)));
        }
        if let Some(bad) = g.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite gradient {bad:?} in layer {}",
                net.layer_of_param(i)
            )));
        }
    }
    let (lr, m, wd) = (
        T::from_f64(params.learning_rate),
        T::from_f64(params.momentum),
        T::from_f64(params.weight_decay),
    );
    for ((p, g), v) in net.params_mut().iter_mut().zip(&grads.tensors).zip(&mut velocity.tensors) {
        for ((w, &gv), vv) in p.data.iter_mut().zip(g).zip(v.iter_mut()) {
            *vv = m * *vv - lr * (gv + wd * *w);
            *w += *vv;
        }
    }
    Ok(())
}
