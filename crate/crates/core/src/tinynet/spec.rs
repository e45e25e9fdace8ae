use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One layer of a feed-forward stack.
///
/// Convolutions use stride 1 and zero "same" padding `(kernel - 1) / 2`.
/// Max pooling is 2×2 with stride 2 and floors odd extents. Fully
/// connected layers flatten their input (channel-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LayerSpec {
    Conv { out_channels: usize, kernel: usize },
    Relu,
    Maxpool,
    Fc { out_dim: usize, has_bias: bool },
    Dropout { rate: f64 },
}

/// Activation shape `channels × height × width`; fully connected outputs
/// are `n × 1 × 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub fn new(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
        }
    }

    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn fits(&self) -> bool {
        self.channels
            .checked_mul(self.height)
            .and_then(|n| n.checked_mul(self.width))
            .is_some_and(|n| n <= MAX_ACTIVATIONS)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSpec {
    pub input: Shape,
    pub layers: Vec<LayerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
}

/// Upper bound on the element count of any activation or parameter tensor.
pub const MAX_ACTIVATIONS: usize = u32::MAX as usize;

/// Shapes resolved by [`NetSpec::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    /// `shapes[0]` is the input, `shapes[i + 1]` the output of layer `i`.
    pub shapes: Vec<Shape>,
    /// Layer whose output is the image embedding φ (`None`: the input).
    pub phi_layer: Option<usize>,
    pub embedding_dim: usize,
    pub num_concepts: usize,
}

impl NetSpec {
    /// The full-size architecture on 32×100 inputs: five convolutions
    /// (64, 128, 256, 512, 512 channels; kernels 5, 5, 3, 3, 3), pooling
    /// after the first, second and fourth, then FC 4096 → 4096 → K with
    /// dropout 0.5 after both hidden layers.
    pub fn paper(k: usize) -> Self {
        use LayerSpec::*;
        let conv = |out_channels, kernel| Conv { out_channels, kernel };
        let layers = vec![
            conv(64, 5), Relu, Maxpool,
            conv(128, 5), Relu, Maxpool,
            conv(256, 3), Relu,
            conv(512, 3), Relu, Maxpool,
            conv(512, 3), Relu,
            Fc { out_dim: 4096, has_bias: true }, Relu, Dropout { rate: 0.5 },
            Fc { out_dim: 4096, has_bias: true }, Relu, Dropout { rate: 0.5 },
            Fc { out_dim: k, has_bias: false },
        ];
        Self {
            input: Shape::new(1, 32, 100),
            layers,
            preset: Some("paper".into()),
        }
    }

    /// A CPU-sized stack on 16×48 inputs: conv(8, 5) – pool – conv(16, 3) –
    /// pool – fc 64 – fc 64 (= D) – fc K, dropout 0.5 after both hidden fcs.
    pub fn desk(k: usize) -> Self {
        use LayerSpec::*;
        let layers = vec![
            Conv { out_channels: 8, kernel: 5 }, Relu, Maxpool,
            Conv { out_channels: 16, kernel: 3 }, Relu, Maxpool,
            Fc { out_dim: 64, has_bias: true }, Relu, Dropout { rate: 0.5 },
            Fc { out_dim: 64, has_bias: true }, Relu, Dropout { rate: 0.5 },
            Fc { out_dim: k, has_bias: false },
        ];
        Self {
            input: Shape::new(1, 16, 48),
            layers,
            preset: Some("desk".into()),
        }
    }

    pub fn preset(name: &str, k: usize) -> Result<Self> {
        match name {
            "paper" => Ok(Self::paper(k)),
            "desk" => Ok(Self::desk(k)),
            other => Err(Error::Param(format!("unknown preset {other:?} (expected paper or desk)"))),
        }
    }

    pub fn validate(&self) -> Result<Geometry> {
        let mut shape = self.input;
        if !shape.fits() {
            return Err(Error::structural("input", "input tensor too large"));
        }
        if shape.is_empty() {
            return Err(Error::structural("input", "empty input shape"));
        }
        let mut shapes = vec![shape];
        let Some(LayerSpec::Fc { has_bias: false, .. }) = self.layers.last() else {
            return Err(Error::structural(
                "output",
                "the last layer must be a fully connected scoring layer without bias",
            ));
        };
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let name = format!("layer {i} ({})", kind_name(layer));
            shape = match *layer {
                LayerSpec::Conv { out_channels, kernel } => {
                    if kernel % 2 == 0 {
                        return Err(Error::structural(name, format!("kernel {kernel} is not odd")));
                    }
                    if out_channels == 0 {
                        return Err(Error::structural(name, "zero output channels"));
                    }
                    if is_flat(&self.layers[..i]) {
                        return Err(Error::structural(name, "convolution after a fully connected layer"));
                    }
                    Shape::new(out_channels, shape.height, shape.width)
                }
                LayerSpec::Relu => shape,
                LayerSpec::Maxpool => {
                    if is_flat(&self.layers[..i]) {
                        return Err(Error::structural(name, "pooling after a fully connected layer"));
                    }
                    if shape.height < 2 || shape.width < 2 {
                        return Err(Error::structural(
                            name,
                            format!("cannot pool a {}x{} map", shape.height, shape.width),
                        ));
                    }
                    Shape::new(shape.channels, shape.height / 2, shape.width / 2)
                }
                LayerSpec::Fc { out_dim, has_bias } => {
                    if out_dim == 0 {
                        return Err(Error::structural(name, "zero output dimension"));
                    }
                    if !has_bias && i != last {
                        return Err(Error::structural(name, "only the scoring layer may omit its bias"));
                    }
                    Shape::new(out_dim, 1, 1)
                }
                LayerSpec::Dropout { rate } => {
                    if !(0.0..1.0).contains(&rate) {
                        return Err(Error::structural(name, format!("dropout rate {rate} outside [0, 1)")));
                    }
                    shape
                }
            };
            if !shape.fits() {
                return Err(Error::structural(name, "activation tensor too large"));
            }
            shapes.push(shape);
        }
        let phi_layer = (0..last).rev().find(|&i| !matches!(self.layers[i], LayerSpec::Dropout { .. }));
        let embedding_dim = match phi_layer {
            Some(i) => shapes[i + 1].len(),
            None => self.input.len(),
        };
        Ok(Geometry {
            num_concepts: shapes[last + 1].len(),
            embedding_dim,
            phi_layer,
            shapes,
        })
    }

    /// The spec with the scoring layer widened to `k` outputs.
    pub fn with_concepts(&self, k: usize) -> Self {
        let mut spec = self.clone();
        if let Some(LayerSpec::Fc { out_dim, .. }) = spec.layers.last_mut() {
            *out_dim = k;
        }
        spec
    }
}

fn is_flat(layers: &[LayerSpec]) -> bool {
    layers.iter().any(|l| matches!(l, LayerSpec::Fc { .. }))
}

pub(crate) fn kind_name(layer: &LayerSpec) -> &'static str {
    match layer {
        LayerSpec::Conv { .. } => "conv",
        LayerSpec::Relu => "relu",
        LayerSpec::Maxpool => "maxpool",
        LayerSpec::Fc { .. } => "fc",
        LayerSpec::Dropout { .. } => "dropout",
    }
}
