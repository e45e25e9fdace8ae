use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use super::real::Real;
use super::spec::{kind_name, Geometry, LayerSpec, NetSpec, MAX_ACTIVATIONS};
use crate::error::{Error, Result};
use crate::rng::{mix, rng_from, tag};

/// A named parameter tensor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    pub name: String,
    pub dims: Vec<usize>,
    pub data: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
enum Op {
    Conv {
        in_c: usize,
        out_c: usize,
        k: usize,
        h: usize,
        w: usize,
        weight: usize,
        bias: usize,
    },
    Relu,
    Pool {
        c: usize,
        h: usize,
        w: usize,
    },
    Fc {
        in_dim: usize,
        out_dim: usize,
        weight: usize,
        bias: Option<usize>,
    },
    Dropout {
        rate: f64,
    },
}

/// A feed-forward convolutional network with hand-written backprop.
///
/// Scores are `Y = Ψ φ` where φ is the output of the last non-dropout layer
/// before the bias-free scoring layer and Ψ is that layer's `[K][D]` weight
/// matrix; row `k` of Ψ is the concept embedding ψ_k.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    spec: NetSpec,
    geometry: Geometry,
    ops: Vec<Op>,
    names: Vec<String>,
    params: Vec<Tensor<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Dropout is the identity and no backprop trace is kept.
    Eval,
    /// Keeps a trace for [`Network::backward`]. Dropout masks for sample
    /// `s` at layer `l` come from `mix(seed, [DROPOUT, s, l])`.
    Train { seed: u64, dropout: bool },
}

#[derive(Debug, Clone, PartialEq)]
enum Aux<T> {
    None,
    Pool(Vec<u32>),
    Mask(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
struct Trace<T> {
    /// `acts[i]` is the input of layer `i`.
    acts: Vec<Vec<T>>,
    aux: Vec<Aux<T>>,
}

/// Result of a forward pass over one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Output<T> {
    pub scores: Vec<T>,
    pub phi: Vec<T>,
    trace: Option<Trace<T>>,
}

/// One tensor per network parameter, aligned with [`Network::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub tensors: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Backward<T> {
    /// Parameter gradients summed over the batch.
    pub grads: Gradients<T>,
    pub input_grads: Vec<Vec<T>>,
}

impl<T: Real> Gradients<T> {
    pub fn zeros_like(net: &Network<T>) -> Self {
        Self {
            tensors: net.params.iter().map(|p| vec![T::ZERO; p.data.len()]).collect(),
        }
    }

    pub fn add(&mut self, other: &Self) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            for (x, &y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: T) {
        self.tensors.iter_mut().flatten().for_each(|x| *x *= s);
    }
}

struct Plan {
    geometry: Geometry,
    ops: Vec<Op>,
    names: Vec<String>,
    tensors: Vec<(String, Vec<usize>)>,
}

/// Names and shapes of the parameter tensors `spec` allocates, in order.
pub(crate) fn parameter_shapes(spec: &NetSpec) -> Result<Vec<(String, Vec<usize>)>> {
    Ok(plan(spec)?.tensors)
}

fn plan(spec: &NetSpec) -> Result<Plan> {
    let geometry = spec.validate()?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut ops = Vec::new();
    let mut names = Vec::new();
    let mut tensors: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, layer) in spec.layers.iter().enumerate() {
        let s = geometry.shapes[i];
        let kind = kind_name(layer);
        let n = counts.entry(kind).or_default();
        *n += 1;
        let name = format!("{kind}{n}");
        let op = match *layer {
            LayerSpec::Conv { out_channels, kernel } => {
                let count = [s.channels, kernel, kernel]
                    .iter()
                    .try_fold(out_channels, |acc, &d| acc.checked_mul(d));
                if count.is_none_or(|n| n > MAX_ACTIVATIONS) {
                    return Err(Error::structural(name, "kernel tensor too large"));
                }
                let weight = tensors.len();
                tensors.push((format!("{name}.weight"), vec![out_channels, s.channels, kernel, kernel]));
                tensors.push((format!("{name}.bias"), vec![out_channels]));
                Op::Conv {
                    in_c: s.channels,
                    out_c: out_channels,
                    k: kernel,
                    h: s.height,
                    w: s.width,
                    weight,
                    bias: weight + 1,
                }
            }
            LayerSpec::Relu => Op::Relu,
            LayerSpec::Maxpool => Op::Pool {
                c: s.channels,
                h: s.height,
                w: s.width,
            },
            LayerSpec::Fc { out_dim, has_bias } => {
                if s.len().checked_mul(out_dim).is_none_or(|n| n > MAX_ACTIVATIONS) {
                    return Err(Error::structural(name, "weight matrix too large"));
                }
                let weight = tensors.len();
                tensors.push((format!("{name}.weight"), vec![out_dim, s.len()]));
                if has_bias {
                    tensors.push((format!("{name}.bias"), vec![out_dim]));
                }
                Op::Fc {
                    in_dim: s.len(),
                    out_dim,
                    weight,
                    bias: has_bias.then_some(weight + 1),
                }
            }
            LayerSpec::Dropout { rate } => Op::Dropout { rate },
        };
        ops.push(op);
        names.push(name);
    }
    Ok(Plan {
        geometry,
        ops,
        names,
        tensors,
    })
}

impl<T: Real> Network<T> {
    /// A network with every parameter set to zero.
    pub fn zeros(spec: &NetSpec) -> Result<Self> {
        let plan = plan(spec)?;
        let params = plan
            .tensors
            .into_iter()
            .map(|(name, dims)| Tensor {
                data: vec![T::ZERO; dims.iter().product()],
                name,
                dims,
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            geometry: plan.geometry,
            ops: plan.ops,
            names: plan.names,
            params,
        })
    }

    /// Weights ~ U(±sqrt(6 / (fan_in + fan_out))), biases zero. Layer `l`
    /// draws from `mix(seed, [INIT, l])`.
    pub fn init(spec: &NetSpec, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(spec)?;
        let jobs: Vec<(usize, usize, usize, usize)> = net
            .ops
            .iter()
            .enumerate()
            .filter_map(|(li, op)| match *op {
                Op::Conv {
                    in_c, out_c, k, weight, ..
                } => Some((li, weight, in_c * k * k, out_c * k * k)),
                Op::Fc {
                    in_dim, out_dim, weight, ..
                } => Some((li, weight, in_dim, out_dim)),
                _ => None,
            })
            .collect();
        for (li, widx, fan_in, fan_out) in jobs {
            fill_uniform(&mut net.params[widx].data, fan_in, fan_out, mix(seed, &[tag::INIT, li as u64]));
        }
        Ok(net)
    }

    /// Rebuilds a network from a spec and parameter tensors, checking that
    /// names and shapes match the spec exactly.
    pub fn from_params(spec: &NetSpec, params: Vec<Tensor<T>>) -> Result<Self> {
        let mut net = Self::zeros(spec)?;
        if params.len() != net.params.len() {
            return Err(Error::Format(format!(
                "expected {} parameter tensors, found {}",
                net.params.len(),
                params.len()
            )));
        }
        for (want, got) in net.params.iter().zip(&params) {
            if want.name != got.name || want.dims != got.dims || got.data.len() != want.data.len() {
                return Err(Error::Format(format!(
                    "tensor {:?} {:?} does not match expected {:?} {:?}",
                    got.name, got.dims, want.name, want.dims
                )));
            }
        }
        net.params = params;
        Ok(net)
    }

    pub fn spec(&self) -> &NetSpec {
        &self.spec
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn input_len(&self) -> usize {
        self.geometry.shapes[0].len()
    }

    pub fn embedding_dim(&self) -> usize {
        self.geometry.embedding_dim
    }

    pub fn num_concepts(&self) -> usize {
        self.geometry.num_concepts
    }

    pub fn layer_names(&self) -> &[String] {
        &self.names
    }

    pub fn params(&self) -> &[Tensor<T>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.params
    }

    pub fn num_parameters(&self) -> usize {
        self.params.iter().map(|p| p.data.len()).sum()
    }

    /// Ψ as a `[K][D]` row-major matrix.
    pub fn scoring_weights(&self) -> &[T] {
        &self.params.last().expect("validated network has a scoring layer").data
    }

    pub fn cast<U: Real>(&self) -> Network<U> {
        Network {
            spec: self.spec.clone(),
            geometry: self.geometry.clone(),
            ops: self.ops.clone(),
            names: self.names.clone(),
            params: self
                .params
                .iter()
                .map(|p| Tensor {
                    name: p.name.clone(),
                    dims: p.dims.clone(),
                    data: p.data.iter().map(|&v| U::from_f64(v.to_f64())).collect(),
                })
                .collect(),
        }
    }

    /// A copy with a `k`-way scoring layer. Existing rows of Ψ are kept;
    /// new rows are initialized from `mix(seed, [INIT, layer, k])`.
    pub fn resize_scoring_layer(&self, k: usize, seed: u64) -> Result<Self> {
        if k < self.num_concepts() {
            return Err(Error::Param(format!(
                "cannot shrink the scoring layer from {} to {k} concepts",
                self.num_concepts()
            )));
        }
        let spec = self.spec.with_concepts(k);
        let mut net = Self::zeros(&spec)?;
        let last = net.params.len() - 1;
        for (dst, src) in net.params.iter_mut().zip(&self.params).take(last) {
            dst.data.clone_from(&src.data);
        }
        let d = self.embedding_dim();
        let keep = self.num_concepts() * d;
        let (old, new) = (&self.params[last].data, &mut net.params[last].data);
        new[..keep].copy_from_slice(&old[..keep]);
        let layer = net.ops.len() - 1;
        fill_uniform(&mut new[keep..], d, k, mix(seed, &[tag::INIT, layer as u64, k as u64]));
        Ok(net)
    }

    pub fn forward_one(&self, input: &[T], mode: Mode, sample: u64) -> Result<Output<T>> {
        if input.len() != self.input_len() {
            return Err(Error::structural(
                "input",
                format!("input has {} values, network expects {}", input.len(), self.input_len()),
            ));
        }
        let tracing = matches!(mode, Mode::Train { .. });
        let mut acts = Vec::new();
        let mut auxes = Vec::new();
        let mut phi = match self.geometry.phi_layer {
            None => input.to_vec(),
            Some(_) => Vec::new(),
        };
        let mut cur = input.to_vec();
        for (li, op) in self.ops.iter().enumerate() {
            let (next, aux) = match *op {
                Op::Conv {
                    in_c,
                    out_c,
                    k,
                    h,
                    w,
                    weight,
                    bias,
                } => (
                    conv_forward(&cur, &self.params[weight].data, &self.params[bias].data, in_c, out_c, k, h, w),
                    Aux::None,
                ),
                Op::Relu => (cur.iter().map(|&v| if v > T::ZERO { v } else { T::ZERO }).collect(), Aux::None),
                Op::Pool { c, h, w } => {
                    let (out, idx) = pool_forward(&cur, c, h, w);
                    (out, Aux::Pool(idx))
                }
                Op::Fc {
                    in_dim,
                    out_dim,
                    weight,
                    bias,
                } => (
                    fc_forward(
                        &cur,
                        &self.params[weight].data,
                        bias.map(|b| self.params[b].data.as_slice()),
                        in_dim,
                        out_dim,
                    ),
                    Aux::None,
                ),
                Op::Dropout { rate } => match mode {
                    Mode::Train { seed, dropout: true } if rate > 0.0 => {
                        let mask = dropout_mask::<T>(cur.len(), rate, mix(seed, &[tag::DROPOUT, sample, li as u64]));
                        (cur.iter().zip(&mask).map(|(&v, &m)| v * m).collect(), Aux::Mask(mask))
                    }
                    _ => (cur.clone(), Aux::None),
                },
            };
            if self.geometry.phi_layer == Some(li) {
                phi = next.clone();
            }
            let prev = std::mem::replace(&mut cur, next);
            if tracing {
                acts.push(prev);
                auxes.push(aux);
            }
        }
        Ok(Output {
            scores: cur,
            phi,
            trace: tracing.then_some(Trace { acts, aux: auxes }),
        })
    }

    /// Forward pass over a batch; sample `i` uses dropout stream `i`.
    pub fn forward(&self, inputs: &[&[T]], mode: Mode) -> Result<Vec<Output<T>>> {
        inputs
            .par_iter()
            .enumerate()
            .map(|(i, x)| self.forward_one(x, mode, i as u64))
            .collect()
    }

    /// Scores of one input in evaluation mode.
    pub fn scores(&self, input: &[T]) -> Result<Vec<T>> {
        Ok(self.forward_one(input, Mode::Eval, 0)?.scores)
    }

    /// Accumulates parameter gradients of `d_scores · Y` into `grads` and
    /// returns the gradient with respect to the input.
    pub fn backward_one(&self, out: &Output<T>, d_scores: &[T], grads: &mut Gradients<T>) -> Result<Vec<T>> {
        let trace = out
            .trace
            .as_ref()
            .ok_or_else(|| Error::State("backward needs a training-mode forward pass".into()))?;
        if d_scores.len() != self.num_concepts() {
            return Err(Error::Param(format!(
                "score gradient has {} entries, network has {} outputs",
                d_scores.len(),
                self.num_concepts()
            )));
        }
        let mut d = d_scores.to_vec();
        for li in (0..self.ops.len()).rev() {
            let x = &trace.acts[li];
            d = match self.ops[li] {
                Op::Conv {
                    in_c,
                    out_c,
                    k,
                    h,
                    w,
                    weight,
                    bias,
                } => {
                    let (gw, rest) = grads.tensors.split_at_mut(bias);
                    conv_backward(
                        x,
                        &d,
                        &self.params[weight].data,
                        &mut gw[weight],
                        &mut rest[0],
                        in_c,
                        out_c,
                        k,
                        h,
                        w,
                    )
                }
                Op::Relu => x
                    .iter()
                    .zip(&d)
                    .map(|(&v, &g)| if v > T::ZERO { g } else { T::ZERO })
                    .collect(),
                Op::Pool { .. } => {
                    let Aux::Pool(idx) = &trace.aux[li] else {
                        unreachable!("pool layers always record their argmax")
                    };
                    let mut dx = vec![T::ZERO; x.len()];
                    for (&i, &g) in idx.iter().zip(&d) {
                        dx[i as usize] += g;
                    }
                    dx
                }
                Op::Fc {
                    in_dim,
                    out_dim,
                    weight,
                    bias,
                } => {
                    if let Some(b) = bias {
                        for (gb, &g) in grads.tensors[b].iter_mut().zip(&d) {
                            *gb += g;
                        }
                    }
                    fc_backward(x, &d, &self.params[weight].data, &mut grads.tensors[weight], in_dim, out_dim)
                }
                Op::Dropout { .. } => match &trace.aux[li] {
                    Aux::Mask(m) => d.iter().zip(m).map(|(&g, &m)| g * m).collect(),
                    _ => d,
                },
            };
        }
        Ok(d)
    }

    /// Backward over a batch, summing parameter gradients in sample order.
    pub fn backward(&self, outputs: &[Output<T>], d_scores: &[Vec<T>]) -> Result<Backward<T>> {
        if outputs.len() != d_scores.len() {
            return Err(Error::Param(format!(
                "{} outputs but {} score gradients",
                outputs.len(),
                d_scores.len()
            )));
        }
        let per: Vec<(Gradients<T>, Vec<T>)> = outputs
            .par_iter()
            .zip(d_scores)
            .map(|(o, d)| {
                let mut g = Gradients::zeros_like(self);
                let dx = self.backward_one(o, d, &mut g)?;
                Ok((g, dx))
            })
            .collect::<Result<_>>()?;
        let mut grads = Gradients::zeros_like(self);
        let mut input_grads = Vec::with_capacity(per.len());
        for (g, dx) in per {
            grads.add(&g);
            input_grads.push(dx);
        }
        Ok(Backward { grads, input_grads })
    }

    /// Layer owning parameter tensor `i` (its name without the suffix).
    pub fn layer_of_param(&self, i: usize) -> &str {
        let name = &self.params[i].name;
        name.split('.').next().unwrap_or(name)
    }
}

fn fill_uniform<T: Real>(data: &mut [T], fan_in: usize, fan_out: usize, seed: u64) {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let mut rng = rng_from(seed);
    for w in data {
        *w = T::from_f64(a * (2.0 * rng.random::<f64>() - 1.0));
    }
}

fn dropout_mask<T: Real>(n: usize, rate: f64, seed: u64) -> Vec<T> {
    let mut rng = rng_from(seed);
    let scale = T::from_f64(1.0 / (1.0 - rate));
    (0..n)
        .map(|_| if rng.random::<f64>() < rate { T::ZERO } else { scale })
        .collect()
}

/// Range of `y` with `0 <= y + d < n`.
fn span(n: usize, d: isize) -> (usize, usize) {
    let lo = (-d).max(0) as usize;
    let hi = (n as isize - d).clamp(0, n as isize) as usize;
    (lo.min(hi), hi)
}

#[allow(clippy::too_many_arguments)]
fn conv_forward<T: Real>(
    x: &[T],
    wt: &[T],
    b: &[T],
    in_c: usize,
    out_c: usize,
    k: usize,
    h: usize,
    w: usize,
) -> Vec<T> {
    let p = (k / 2) as isize;
    let hw = h * w;
    let mut out = vec![T::ZERO; out_c * hw];
    for o in 0..out_c {
        let plane = &mut out[o * hw..(o + 1) * hw];
        plane.fill(b[o]);
        for c in 0..in_c {
            let src = &x[c * hw..(c + 1) * hw];
            for ky in 0..k {
                let dy = ky as isize - p;
                let (y0, y1) = span(h, dy);
                for kx in 0..k {
                    let dx = kx as isize - p;
                    let (x0, x1) = span(w, dx);
                    let wv = wt[((o * in_c + c) * k + ky) * k + kx];
                    for y in y0..y1 {
                        let sy = (y as isize + dy) as usize;
                        let sx0 = (x0 as isize + dx) as usize;
                        let dst = &mut plane[y * w + x0..y * w + x1];
                        let s = &src[sy * w + sx0..sy * w + sx0 + (x1 - x0)];
                        for (dv, &sv) in dst.iter_mut().zip(s) {
                            *dv += wv * sv;
                        }
                    }
                }
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn conv_backward<T: Real>(
    x: &[T],
    d: &[T],
    wt: &[T],
    gw: &mut [T],
    gb: &mut [T],
    in_c: usize,
    out_c: usize,
    k: usize,
    h: usize,
    w: usize,
) -> Vec<T> {
    let p = (k / 2) as isize;
    let hw = h * w;
    let mut dx = vec![T::ZERO; in_c * hw];
    for o in 0..out_c {
        let dplane = &d[o * hw..(o + 1) * hw];
        for &g in dplane {
            gb[o] += g;
        }
        for c in 0..in_c {
            let src = &x[c * hw..(c + 1) * hw];
            let dsrc = &mut dx[c * hw..(c + 1) * hw];
            for ky in 0..k {
                let dy = ky as isize - p;
                let (y0, y1) = span(h, dy);
                for kx in 0..k {
                    let dxo = kx as isize - p;
                    let (x0, x1) = span(w, dxo);
                    let wi = ((o * in_c + c) * k + ky) * k + kx;
                    let wv = wt[wi];
                    let mut acc = T::ZERO;
                    for y in y0..y1 {
                        let sy = (y as isize + dy) as usize;
                        let sx0 = (x0 as isize + dxo) as usize;
                        let n = x1 - x0;
                        let g = &dplane[y * w + x0..y * w + x1];
                        let s = &src[sy * w + sx0..sy * w + sx0 + n];
                        let ds = &mut dsrc[sy * w + sx0..sy * w + sx0 + n];
                        for ((&gv, &sv), dv) in g.iter().zip(s).zip(ds) {
                            acc += gv * sv;
                            *dv += wv * gv;
                        }
                    }
                    gw[wi] += acc;
                }
            }
        }
    }
    dx
}

fn pool_forward<T: Real>(x: &[T], c: usize, h: usize, w: usize) -> (Vec<T>, Vec<u32>) {
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut idx = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        let base = ch * h * w;
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = base + 2 * oy * w + 2 * ox;
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let i = base + (2 * oy + dy) * w + 2 * ox + dx;
                    if x[i] > x[best] {
                        best = i;
                    }
                }
                out.push(x[best]);
                idx.push(best as u32);
            }
        }
    }
    (out, idx)
}

fn fc_forward<T: Real>(x: &[T], wt: &[T], b: Option<&[T]>, in_dim: usize, out_dim: usize) -> Vec<T> {
    (0..out_dim)
        .map(|o| {
            let mut acc = T::ZERO;
            for (&wv, &xv) in wt[o * in_dim..(o + 1) * in_dim].iter().zip(x) {
                acc += wv * xv;
            }
            match b {
                Some(b) => acc + b[o],
                None => acc,
            }
        })
        .collect()
}

fn fc_backward<T: Real>(x: &[T], d: &[T], wt: &[T], gw: &mut [T], in_dim: usize, out_dim: usize) -> Vec<T> {
    let mut dx = vec![T::ZERO; in_dim];
    for o in 0..out_dim {
        let g = d[o];
        if g == T::ZERO {
            continue;
        }
        let row = &wt[o * in_dim..(o + 1) * in_dim];
        let grow = &mut gw[o * in_dim..(o + 1) * in_dim];
        for i in 0..in_dim {
            grow[i] += g * x[i];
            dx[i] += row[i] * g;
        }
    }
    dx
}
