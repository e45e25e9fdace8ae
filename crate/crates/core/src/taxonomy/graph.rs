use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};

/// One node of the noun taxonomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    /// Stable identifier: `n` + 8-digit byte offset for WNDB input, the
    /// declared id for fixtures.
    pub id: String,
    /// Sort key used for deterministic tie-breaking (the byte offset for
    /// WNDB input, declaration order for fixtures).
    pub order: u64,
    pub lemmas: Vec<String>,
    pub gloss: String,
    /// Indices of the direct hypernyms, in file order.
    pub hypernyms: Vec<usize>,
}

impl Synset {
    /// First lemma, the human readable name of the synset.
    pub fn label(&self) -> &str {
        self.lemmas.first().map(String::as_str).unwrap_or(&self.id)
    }
}

/// A parsed hypernym DAG with a lemma index.
///
/// Construction goes through [`GraphBuilder`], which validates that every
/// edge resolves and that the hypernym relation is acyclic. The graph is
/// immutable afterwards.
#[derive(Debug, Clone)]
pub struct SynsetGraph {
    synsets: Vec<Synset>,
    by_id: HashMap<String, usize>,
    lemma_index: BTreeMap<String, Vec<usize>>,
    /// Distinct root distances of every node, ascending.
    depths: Vec<Vec<u32>>,
}

impl SynsetGraph {
    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn synsets(&self) -> &[Synset] {
        &self.synsets
    }

    pub fn synset(&self, index: usize) -> &Synset {
        &self.synsets[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&Synset> {
        self.index_of(id).map(|i| &self.synsets[i])
    }

    pub fn lemma_index(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.lemma_index
    }

    /// Synset indices of a (lowercased) lemma, in sense order.
    pub fn senses(&self, lemma: &str) -> &[usize] {
        self.lemma_index
            .get(lemma)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        self.synsets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.hypernyms.is_empty())
            .map(|(i, _)| i)
    }

    /// All distances from a root at which `index` occurs on some path.
    pub fn depths(&self, index: usize) -> &[u32] {
        &self.depths[index]
    }

    /// Largest depth over all nodes, `None` for an empty graph.
    pub fn max_depth(&self) -> Option<u32> {
        self.depths.iter().filter_map(|d| d.last().copied()).max()
    }

    /// Every root-to-synset path, roots first.
    pub fn hypernym_paths(&self, id: &str) -> Result<Vec<Vec<String>>> {
        let index = self
            .index_of(id)
            .ok_or_else(|| Error::Lookup(format!("unknown synset id {id:?}")))?;
        Ok(self
            .paths_from_root(index)
            .into_iter()
            .map(|p| p.into_iter().map(|i| self.synsets[i].id.clone()).collect())
            .collect())
    }

    /// Index form of [`hypernym_paths`](Self::hypernym_paths).
    pub fn paths_from_root(&self, index: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = vec![index];
        self.climb(index, &mut stack, &mut out);
        out
    }

    fn climb(&self, node: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let parents = &self.synsets[node].hypernyms;
        if parents.is_empty() {
            out.push(stack.iter().rev().copied().collect());
            return;
        }
        for &p in parents {
            stack.push(p);
            self.climb(p, stack, out);
            stack.pop();
        }
    }

    /// The synset itself plus everything reachable through hypernym edges.
    pub fn ancestors_or_self(&self, index: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut todo = vec![index];
        while let Some(n) = todo.pop() {
            if seen.insert(n) {
                todo.extend(self.synsets[n].hypernyms.iter().copied());
            }
        }
        seen
    }

    /// Nodes sitting at depth `level` on some root path of some sense of
    /// `word`. Absent words give the empty set.
    ///
    /// A node `u` qualifies iff it is an ancestor-or-self of a sense and a
    /// root path of length `level` reaches it: concatenating that path with
    /// the `u`-to-sense path yields a full root path with `u` at `level`.
    pub fn concept_indices_at_level(&self, word: &str, level: u32) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &sense in self.senses(word) {
            for a in self.ancestors_or_self(sense) {
                if self.depths[a].binary_search(&level).is_ok() {
                    out.insert(a);
                }
            }
        }
        out
    }

    /// Synset ids of [`concept_indices_at_level`](Self::concept_indices_at_level).
    pub fn concepts_at_level(&self, word: &str, level: u32) -> BTreeSet<String> {
        self.concept_indices_at_level(word, level)
            .into_iter()
            .map(|i| self.synsets[i].id.clone())
            .collect()
    }
}

/// A synset whose hypernyms are still unresolved ids.
#[derive(Debug, Clone)]
pub struct RawSynset {
    pub id: String,
    pub order: u64,
    pub lemmas: Vec<String>,
    pub gloss: String,
    pub hypernyms: Vec<String>,
}

/// Collects raw synsets and resolves them into a validated [`SynsetGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    raw: Vec<RawSynset>,
    by_id: HashMap<String, usize>,
    lemma_index: Option<BTreeMap<String, Vec<String>>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    /// Adds a synset; returns `false` (and ignores it) if the id is taken.
    pub fn push(&mut self, synset: RawSynset) -> bool {
        if self.by_id.contains_key(&synset.id) {
            return false;
        }
        self.by_id.insert(synset.id.clone(), self.raw.len());
        self.raw.push(synset);
        true
    }

    pub fn add_hypernym(&mut self, child: &str, parent: &str) -> Result<()> {
        let i = *self
            .by_id
            .get(child)
            .ok_or_else(|| Error::Integrity(format!("edge from undeclared node {child:?}")))?;
        let h = &mut self.raw[i].hypernyms;
        if !h.iter().any(|p| p == parent) {
            h.push(parent.to_string());
        }
        Ok(())
    }

    /// Supplies an explicit lemma index (lemma → synset ids in sense order).
    /// Without one, the index is derived from the synsets' lemmas.
    pub fn lemma_index(&mut self, index: BTreeMap<String, Vec<String>>) {
        self.lemma_index = Some(index);
    }

    pub fn finish(self) -> Result<SynsetGraph> {
        let GraphBuilder {
            raw,
            by_id,
            lemma_index,
        } = self;
        let resolve = |from: &str, to: &str| -> Result<usize> {
            by_id.get(to).copied().ok_or_else(|| {
                Error::Integrity(format!("{from} references missing synset {to}"))
            })
        };

        let mut synsets = Vec::with_capacity(raw.len());
        for r in &raw {
            let hypernyms = r
                .hypernyms
                .iter()
                .map(|h| resolve(&r.id, h))
                .collect::<Result<Vec<_>>>()?;
            synsets.push(Synset {
                id: r.id.clone(),
                order: r.order,
                lemmas: r.lemmas.clone(),
                gloss: r.gloss.clone(),
                hypernyms,
            });
        }

        let order = topological_order(&synsets)?;
        let mut depths: Vec<Vec<u32>> = vec![Vec::new(); synsets.len()];
        for &n in &order {
            let d: Vec<u32> = if synsets[n].hypernyms.is_empty() {
                vec![0]
            } else {
                let set: BTreeSet<u32> = synsets[n]
                    .hypernyms
                    .iter()
                    .flat_map(|&p| depths[p].iter().map(|d| d + 1))
                    .collect();
                set.into_iter().collect()
            };
            depths[n] = d;
        }

        let lemma_index = match lemma_index {
            Some(explicit) => {
                let mut out = BTreeMap::new();
                for (lemma, ids) in explicit {
                    let idx = ids
                        .iter()
                        .map(|id| resolve(&format!("lemma {lemma:?}"), id))
                        .collect::<Result<Vec<_>>>()?;
                    if !idx.is_empty() {
                        out.insert(lemma, idx);
                    }
                }
                out
            }
            None => {
                let mut out: BTreeMap<String, Vec<usize>> = BTreeMap::new();
                for (i, s) in synsets.iter().enumerate() {
                    for lemma in &s.lemmas {
                        let senses = out.entry(lemma.to_lowercase()).or_default();
                        if !senses.contains(&i) {
                            senses.push(i);
                        }
                    }
                }
                out
            }
        };

        Ok(SynsetGraph {
            synsets,
            by_id,
            lemma_index,
            depths,
        })
    }
}

/// Parents-before-children order; fails on a directed cycle.
fn topological_order(synsets: &[Synset]) -> Result<Vec<usize>> {
    let n = synsets.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pending: Vec<usize> = vec![0; n];
    for (i, s) in synsets.iter().enumerate() {
        pending[i] = s.hypernyms.len();
        for &p in &s.hypernyms {
            children[p].push(i);
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        order.push(v);
        for &c in &children[v] {
            pending[c] -= 1;
            if pending[c] == 0 {
                ready.push(c);
            }
        }
    }
    if order.len() != n {
        let stuck = (0..n)
            .find(|&i| pending[i] > 0)
            .map(|i| synsets[i].id.clone())
            .unwrap_or_default();
        return Err(Error::Integrity(format!(
            "hypernym cycle detected (involving {stuck})"
        )));
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(id: &str, parents: &[&str]) -> RawSynset {
        RawSynset {
            id: id.into(),
            order: 0,
            lemmas: vec![id.into()],
            gloss: String::new(),
            hypernyms: parents.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn diamond() -> SynsetGraph {
        let mut b = GraphBuilder::new();
        for r in [
            raw("root", &[]),
            raw("a", &["root"]),
            raw("b", &["root"]),
            raw("x", &["a", "b"]),
            raw("leaf", &["x"]),
        ] {
            b.push(r);
        }
        b.finish().unwrap()
    }

    #[test]
    fn root_has_single_trivial_path() {
        let g = diamond();
        assert_eq!(g.hypernym_paths("root").unwrap(), vec![vec!["root"]]);
    }

    #[test]
    fn diamond_yields_two_paths() {
        let g = diamond();
        let paths = g.hypernym_paths("x").unwrap();
        assert_eq!(
            paths,
            vec![vec!["root", "a", "x"], vec!["root", "b", "x"]]
        );
        assert_eq!(g.hypernym_paths("leaf").unwrap().len(), 2);
    }

    #[test]
    fn unknown_synset_is_lookup_error() {
        assert!(matches!(
            diamond().hypernym_paths("nope"),
            Err(Error::Lookup(_))
        ));
    }

    #[test]
    fn unequal_depths_are_all_recorded() {
        let mut b = GraphBuilder::new();
        for r in [
            raw("r", &[]),
            raw("a", &["r"]),
            raw("b", &["a"]),
            raw("x", &["b", "r"]),
        ] {
            b.push(r);
        }
        let g = b.finish().unwrap();
        let x = g.index_of("x").unwrap();
        assert_eq!(g.depths(x), &[1, 3]);
        assert_eq!(g.concepts_at_level("x", 1), ["a", "x"].map(String::from).into());
        assert_eq!(g.concepts_at_level("x", 3), ["x".to_string()].into());
        assert!(g.concepts_at_level("x", 4).is_empty());
        assert!(g.concepts_at_level("absent", 0).is_empty());
    }

    #[test]
    fn cycle_rejected() {
        let mut b = GraphBuilder::new();
        b.push(raw("a", &["b"]));
        b.push(raw("b", &["a"]));
        assert!(matches!(b.finish(), Err(Error::Integrity(_))));
    }

    #[test]
    fn dangling_edge_rejected() {
        let mut b = GraphBuilder::new();
        b.push(raw("a", &["ghost"]));
        assert!(matches!(b.finish(), Err(Error::Integrity(_))));
    }
}
