use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tinynet::{Mode, Network, Real};

/// Image features usable for image-to-image retrieval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    /// Penultimate activations φ.
    Phi,
    /// Concept scores Y.
    Scores,
}

/// One image to embed: identifier, pixels and ground-truth concepts.
#[derive(Debug, Clone, Copy)]
pub struct ImageInput<'a> {
    pub id: u32,
    pub pixels: &'a [f32],
    pub concepts: &'a [usize],
}

/// Images and concepts in the joint space.
///
/// `F(I, C_k) = φ(I) · ψ_k` is the compatibility of image `I` and concept
/// `k`; for an extracted space it reproduces the network's scores.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    dim: usize,
    ids: Vec<u32>,
    phi: Vec<Vec<f64>>,
    scores: Vec<Vec<f64>>,
    /// `psi[k]` is the embedding of concept `k`.
    psi: Vec<Vec<f64>>,
    relevance: Vec<Vec<usize>>,
    index: HashMap<u32, usize>,
}

/// Deviation of stored scores from `φ · ψ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Consistency {
    pub max_abs: f64,
    /// `max |φ·ψ_k − Y_k| / (1 + |Y_k|)`.
    pub max_rel: f64,
    pub exact: bool,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Runs `net` in evaluation mode over `images` and stores φ, Y and Ψ.
pub fn extract<T: Real>(net: &Network<T>, images: &[ImageInput<'_>]) -> Result<EmbeddingSpace> {
    let k = net.num_concepts();
    for img in images {
        if img.pixels.len() != net.input_len() {
            return Err(Error::structural(
                "input",
                format!(
                    "image {} has {} pixels, network expects {}",
                    img.id,
                    img.pixels.len(),
                    net.input_len()
                ),
            ));
        }
    }
    let outputs = images
        .par_iter()
        .map(|img| {
            let x: Vec<T> = img.pixels.iter().map(|&p| T::from_f64(p as f64)).collect();
            net.forward_one(&x, Mode::Eval, 0)
        })
        .collect::<Result<Vec<_>>>()?;
    let widen = |v: &[T]| v.iter().map(|x| x.to_f64()).collect::<Vec<f64>>();
    let d = net.embedding_dim();
    let psi = net.scoring_weights().chunks(d).map(widen).collect();
    let (phi, scores) = outputs.iter().map(|o| (widen(&o.phi), widen(&o.scores))).unzip();
    EmbeddingSpace::build(
        images.iter().map(|i| i.id).collect(),
        phi,
        scores,
        psi,
        images.iter().map(|i| i.concepts.to_vec()).collect(),
    )
    .and_then(|s| {
        if s.k() != k {
            return Err(Error::structural("output", "score width differs from concept count"));
        }
        Ok(s)
    })
}

impl EmbeddingSpace {
    /// A space whose scores are computed as `φ · ψ_k`.
    pub fn from_embeddings(
        ids: Vec<u32>,
        phi: Vec<Vec<f64>>,
        psi: Vec<Vec<f64>>,
        relevance: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let scores = phi.iter().map(|p| psi.iter().map(|c| dot(p, c)).collect()).collect();
        Self::build(ids, phi, scores, psi, relevance)
    }

    fn build(
        ids: Vec<u32>,
        phi: Vec<Vec<f64>>,
        scores: Vec<Vec<f64>>,
        psi: Vec<Vec<f64>>,
        relevance: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let k = psi.len();
        if k == 0 {
            return Err(Error::structural("psi", "no concept embeddings"));
        }
        let dim = psi[0].len();
        if psi.iter().any(|c| c.len() != dim) {
            return Err(Error::structural("psi", "concept embeddings differ in dimension"));
        }
        if phi.len() != ids.len() || scores.len() != ids.len() || relevance.len() != ids.len() {
            return Err(Error::structural("images", "per-image arrays differ in length"));
        }
        if let Some(i) = phi.iter().position(|p| p.len() != dim) {
            return Err(Error::structural("phi", format!("image {} has dimension {}", ids[i], phi[i].len())));
        }
        if scores.iter().any(|s| s.len() != k) {
            return Err(Error::structural("scores", format!("score vectors must have {k} entries")));
        }
        if let Some(bad) = relevance.iter().flatten().find(|&&c| c >= k) {
            return Err(Error::Config(format!("concept index {bad} out of range for K={k}")));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, &id) in ids.iter().enumerate() {
            if index.insert(id, i).is_some() {
                return Err(Error::Config(format!("duplicate image id {id}")));
            }
        }
        Ok(Self {
            dim,
            ids,
            phi,
            scores,
            psi,
            relevance,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.psi.len()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn psi(&self) -> &[Vec<f64>] {
        &self.psi
    }

    fn slot(&self, id: u32) -> Result<usize> {
        self.index
            .get(&id)
            .copied()
            .ok_or_else(|| Error::Lookup(format!("no image with id {id}")))
    }

    pub fn phi(&self, id: u32) -> Result<&[f64]> {
        Ok(&self.phi[self.slot(id)?])
    }

    pub fn scores(&self, id: u32) -> Result<&[f64]> {
        Ok(&self.scores[self.slot(id)?])
    }

    pub fn concepts(&self, id: u32) -> Result<&[usize]> {
        Ok(&self.relevance[self.slot(id)?])
    }

    /// `F(I, C_k)`.
    pub fn compatibility(&self, id: u32, k: usize) -> Result<f64> {
        let c = self
            .psi
            .get(k)
            .ok_or_else(|| Error::Param(format!("concept {k} out of range for K={}", self.k())))?;
        Ok(dot(self.phi(id)?, c))
    }

    /// Images whose φ has zero norm (they score 0 under normalization).
    pub fn zero_norm_images(&self) -> Vec<u32> {
        self.ids
            .iter()
            .zip(&self.phi)
            .filter(|(_, p)| norm(p) == 0.0)
            .map(|(&id, _)| id)
            .collect()
    }

    pub fn consistency(&self) -> Consistency {
        let mut out = Consistency {
            max_abs: 0.0,
            max_rel: 0.0,
            exact: true,
        };
        for (p, y) in self.phi.iter().zip(&self.scores) {
            for (c, &yk) in self.psi.iter().zip(y) {
                let f = dot(p, c);
                let diff = (f - yk).abs();
                out.exact &= f.to_bits() == yk.to_bits();
                out.max_abs = out.max_abs.max(diff);
                out.max_rel = out.max_rel.max(diff / (1.0 + yk.abs()));
            }
        }
        out
    }

    /// Copy with every φ multiplied by `phi_scale` and every ψ by `psi_scale`.
    pub fn scaled(&self, phi_scale: f64, psi_scale: f64) -> Result<Self> {
        let scale = |v: &[Vec<f64>], s: f64| v.iter().map(|r| r.iter().map(|x| x * s).collect()).collect();
        Self::from_embeddings(
            self.ids.clone(),
            scale(&self.phi, phi_scale),
            scale(&self.psi, psi_scale),
            self.relevance.clone(),
        )
    }

    /// The space restricted to concepts `0..k`; relevance to later concepts
    /// is dropped.
    pub fn first_concepts(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k() {
            return Err(Error::Param(format!("cannot keep {k} of {} concepts", self.k())));
        }
        Self::build(
            self.ids.clone(),
            self.phi.clone(),
            self.scores.iter().map(|s| s[..k].to_vec()).collect(),
            self.psi[..k].to_vec(),
            self.relevance
                .iter()
                .map(|r| r.iter().copied().filter(|&c| c < k).collect())
                .collect(),
        )
    }

    /// Concepts ranked by `φ(I) · ψ_k`.
    pub fn image_to_concept(&self, id: u32) -> Result<RankedList> {
        let i = self.slot(id)?;
        let rel = &self.relevance[i];
        Ok(RankedList::new(
            self.psi
                .iter()
                .enumerate()
                .map(|(k, c)| Candidate::new(k as u32, dot(&self.phi[i], c), rel.contains(&k)))
                .collect(),
        ))
    }

    fn check_concept(&self, k: usize) -> Result<()> {
        if k >= self.k() {
            return Err(Error::Param(format!("concept {k} out of range for K={}", self.k())));
        }
        Ok(())
    }

    /// `(φ / ‖φ‖) · ψ_k` for every image; `None` where ‖φ‖ = 0.
    fn normalized_scores(&self, k: usize) -> Vec<Option<f64>> {
        self.phi
            .iter()
            .map(|p| {
                let n = norm(p);
                (n > 0.0).then(|| dot(p, &self.psi[k]) / n)
            })
            .collect()
    }

    /// Images ranked by their compatibility with concept `k`, optionally
    /// with ℓ2-normalized φ. Zero-norm images score 0 and rank last.
    pub fn concept_to_image(&self, k: usize, normalize: bool) -> Result<RankedList> {
        self.check_concept(k)?;
        let scores: Vec<Option<f64>> = if normalize {
            self.normalized_scores(k)
        } else {
            self.phi.iter().map(|p| Some(dot(p, &self.psi[k]))).collect()
        };
        Ok(RankedList::new(
            scores
                .into_iter()
                .enumerate()
                .map(|(i, s)| Candidate::tiered(self.ids[i], s, self.relevance[i].contains(&k)))
                .collect(),
        ))
    }

    /// Other images ranked by cosine similarity of the chosen feature;
    /// an image is relevant when it shares a concept with the query.
    pub fn image_to_image(&self, id: u32, feature: Feature) -> Result<RankedList> {
        let q = self.slot(id)?;
        let feats = match feature {
            Feature::Phi => &self.phi,
            Feature::Scores => &self.scores,
        };
        let unit = |v: &[f64]| -> Option<Vec<f64>> {
            let n = norm(v);
            (n > 0.0).then(|| v.iter().map(|x| x / n).collect())
        };
        let query = unit(&feats[q]);
        let qrel = &self.relevance[q];
        Ok(RankedList::new(
            (0..self.len())
                .filter(|&i| i != q)
                .map(|i| {
                    let score = match (&query, unit(&feats[i])) {
                        (Some(a), Some(b)) => Some(dot(a, &b)),
                        _ => None,
                    };
                    let relevant = self.relevance[i].iter().any(|c| qrel.contains(c));
                    Candidate::tiered(self.ids[i], score, relevant)
                })
                .collect(),
        ))
    }

    /// Images ranked by `Σ_{k∈add} F(I, C_k) − Σ_{k∈sub} F(I, C_k)` with
    /// ℓ2-normalized φ. An image is relevant when it carries at least one
    /// added concept and none of the subtracted ones.
    pub fn concept_arithmetic_query(&self, add: &[usize], sub: &[usize]) -> Result<RankedList> {
        if add.is_empty() && sub.is_empty() {
            return Err(Error::Param("concept combination is empty".into()));
        }
        let mut seen = vec![false; self.k()];
        for &k in add.iter().chain(sub) {
            self.check_concept(k)?;
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::Param(format!("concept {k} appears more than once in the combination")));
            }
        }
        let mut total: Vec<Option<f64>> = vec![Some(0.0); self.len()];
        for (&k, sign) in add.iter().map(|k| (k, 1.0)).chain(sub.iter().map(|k| (k, -1.0))) {
            for (t, s) in total.iter_mut().zip(self.normalized_scores(k)) {
                *t = match (*t, s) {
                    (Some(a), Some(b)) => Some(a + sign * b),
                    _ => None,
                };
            }
        }
        Ok(RankedList::new(
            total
                .into_iter()
                .enumerate()
                .map(|(i, s)| {
                    let r = &self.relevance[i];
                    let relevant = add.iter().any(|k| r.contains(k)) && !sub.iter().any(|k| r.contains(k));
                    Candidate::tiered(self.ids[i], s, relevant)
                })
                .collect(),
        ))
    }
}

/// A scored candidate before ranking. `demoted` items sort after all
/// others regardless of score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub id: u32,
    pub score: f64,
    pub relevant: bool,
    pub demoted: bool,
}

impl Candidate {
    pub fn new(id: u32, score: f64, relevant: bool) -> Self {
        Self {
            id,
            score,
            relevant,
            demoted: false,
        }
    }

    fn tiered(id: u32, score: Option<f64>, relevant: bool) -> Self {
        Self {
            id,
            score: score.unwrap_or(0.0),
            relevant,
            demoted: score.is_none(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedItem {
    pub id: u32,
    pub score: f64,
    pub relevant: bool,
}

/// Items by descending score, ties broken by ascending id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub items: Vec<RankedItem>,
}

impl RankedList {
    pub fn new(mut candidates: Vec<Candidate>) -> Self {
        candidates.sort_by(|a, b| {
            a.demoted
                .cmp(&b.demoted)
                .then_with(|| b.score.total_cmp(&a.score))
                .then_with(|| a.id.cmp(&b.id))
        });
        Self {
            items: candidates
                .into_iter()
                .map(|c| RankedItem {
                    id: c.id,
                    score: c.score,
                    relevant: c.relevant,
                })
                .collect(),
        }
    }

    /// A list with the given relevance pattern and strictly decreasing scores.
    pub fn from_relevance(pattern: &[bool]) -> Self {
        Self {
            items: pattern
                .iter()
                .enumerate()
                .map(|(i, &relevant)| RankedItem {
                    id: i as u32,
                    score: -(i as f64),
                    relevant,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn relevant_count(&self) -> usize {
        self.items.iter().filter(|i| i.relevant).count()
    }

    pub fn ids(&self) -> Vec<u32> {
        self.items.iter().map(|i| i.id).collect()
    }

    pub fn top(&self, n: usize) -> &[RankedItem] {
        &self.items[..n.min(self.items.len())]
    }
}
