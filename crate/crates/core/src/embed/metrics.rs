use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::space::{EmbeddingSpace, Feature, RankedList};
use crate::error::{Error, Result};

/// `(1/R) Σ_{relevant ranks i} precision@i`.
pub fn average_precision(list: &RankedList) -> Result<f64> {
    let total = list.relevant_count();
    if total == 0 {
        return Err(Error::UndefinedMetric("average precision of a query without relevant items".into()));
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, item) in list.items.iter().enumerate() {
        if item.relevant {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / total as f64)
}

/// Relevant items among the first `k`, divided by `k` even when the list
/// is shorter.
pub fn precision_at_k(list: &RankedList, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Param("precision@k needs k >= 1".into()));
    }
    Ok(list.top(k).iter().filter(|i| i.relevant).count() as f64 / k as f64)
}

/// Precision at cutoff R, the number of relevant items.
pub fn r_precision(list: &RankedList) -> Result<f64> {
    let r = list.relevant_count();
    if r == 0 {
        return Err(Error::UndefinedMetric("R-precision of a query without relevant items".into()));
    }
    precision_at_k(list, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    ImageToConcept,
    ConceptToImage,
    ImageToImage(Feature),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::ImageToConcept => "image-to-concept",
            Task::ConceptToImage => "concept-to-image",
            Task::ImageToImage(Feature::Phi) => "image-to-image-phi",
            Task::ImageToImage(Feature::Scores) => "image-to-image-scores",
        }
    }

    /// Ranked list of one query; concept-to-image uses normalized φ.
    pub fn run(&self, space: &EmbeddingSpace, query: u32) -> Result<RankedList> {
        match *self {
            Task::ImageToConcept => space.image_to_concept(query),
            Task::ConceptToImage => space.concept_to_image(query as usize, true),
            Task::ImageToImage(f) => space.image_to_image(query, f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryMetrics {
    pub task: String,
    pub query: u32,
    pub ap: f64,
    pub p_at_1: f64,
    pub p_at_10: f64,
    pub p_at_50: f64,
    pub r_precision: f64,
    pub relevant: usize,
}

pub fn query_metrics(task: &str, query: u32, list: &RankedList) -> Result<QueryMetrics> {
    Ok(QueryMetrics {
        task: task.to_string(),
        query,
        ap: average_precision(list)?,
        p_at_1: precision_at_k(list, 1)?,
        p_at_10: precision_at_k(list, 10)?,
        p_at_50: precision_at_k(list, 50)?,
        r_precision: r_precision(list)?,
        relevant: list.relevant_count(),
    })
}

/// Mean AP over the queries that have at least one relevant item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub task: String,
    pub map: f64,
    pub evaluated: usize,
    /// Queries skipped for having no relevant item.
    pub excluded: Vec<u32>,
    pub per_query: Vec<QueryMetrics>,
}

impl MapReport {
    pub fn mean(&self, metric: fn(&QueryMetrics) -> f64) -> f64 {
        if self.per_query.is_empty() {
            return 0.0;
        }
        self.per_query.iter().map(metric).sum::<f64>() / self.per_query.len() as f64
    }
}

/// Mean of per-query APs, in query order.
pub fn mean_of(aps: &[f64]) -> Result<f64> {
    if aps.is_empty() {
        return Err(Error::UndefinedMetric("no query has a relevant item".into()));
    }
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}

pub fn mean_average_precision(space: &EmbeddingSpace, task: Task, queries: &[u32]) -> Result<MapReport> {
    if queries.is_empty() {
        return Err(Error::Param("empty query set".into()));
    }
    let name = task.name();
    let lists = queries
        .par_iter()
        .map(|&q| task.run(space, q))
        .collect::<Result<Vec<_>>>()?;
    let mut per_query = Vec::new();
    let mut excluded = Vec::new();
    for (&q, list) in queries.iter().zip(&lists) {
        if list.relevant_count() == 0 {
            excluded.push(q);
        } else {
            per_query.push(query_metrics(name, q, list)?);
        }
    }
    let aps: Vec<f64> = per_query.iter().map(|m| m.ap).collect();
    Ok(MapReport {
        task: name.to_string(),
        map: mean_of(&aps)?,
        evaluated: per_query.len(),
        excluded,
        per_query,
    })
}

pub const METRICS_CSV_HEADER: &str = "task,query,ap,p_at_1,p_at_10,p_at_50,r_precision,relevant";

/// One CSV row per query, with a header line.
pub fn metrics_csv<'a>(rows: impl IntoIterator<Item = &'a QueryMetrics>) -> String {
    let mut out = String::from(METRICS_CSV_HEADER);
    out.push('\n');
    for m in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            m.task, m.query, m.ap, m.p_at_1, m.p_at_10, m.p_at_50, m.r_precision, m.relevant
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list(p: &[u8]) -> RankedList {
        RankedList::from_relevance(&p.iter().map(|&b| b == 1).collect::<Vec<_>>())
    }

    #[test]
    fn ap_fixtures() {
        assert!((average_precision(&list(&[1, 0, 1])).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(average_precision(&list(&[1, 1, 0, 0])).unwrap(), 1.0);
        for j in 1..=6 {
            let mut p = vec![0u8; 6];
            p[j - 1] = 1;
            assert_eq!(average_precision(&list(&p)).unwrap(), 1.0 / j as f64);
        }
        assert!(matches!(average_precision(&list(&[0, 0])), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn precision_fixtures() {
        let l = list(&[1, 0, 1]);
        assert_eq!(precision_at_k(&l, 1).unwrap(), 1.0);
        assert_eq!(r_precision(&l).unwrap(), 0.5);
        assert_eq!(precision_at_k(&l, 10).unwrap(), 0.2);
        assert_eq!(precision_at_k(&list(&[0, 0, 0]), 2).unwrap(), 0.0);
        assert!(precision_at_k(&l, 0).is_err());
        assert!(r_precision(&list(&[0])).is_err());
    }

    #[test]
    fn map_excludes_degenerate_queries() {
        // Image 0 carries concept 0, image 1 concept 1; concept 2 has no image.
        let psi = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let phi = vec![vec![1.0, 0.2], vec![0.3, 1.0]];
        let s = EmbeddingSpace::from_embeddings(vec![0, 1], phi, psi, vec![vec![0], vec![1]]).unwrap();
        let r = mean_average_precision(&s, Task::ConceptToImage, &[0, 1, 2]).unwrap();
        assert_eq!(r.excluded, vec![2]);
        assert_eq!(r.evaluated, 2);
        assert_eq!(r.map, 1.0);
        assert!(mean_average_precision(&s, Task::ConceptToImage, &[2]).is_err());
        assert!(mean_average_precision(&s, Task::ConceptToImage, &[]).is_err());
        assert_eq!(mean_of(&[1.0, 0.5]).unwrap(), 0.75);
    }

    #[test]
    fn csv_layout() {
        let m = query_metrics("image-to-concept", 4, &list(&[1, 0, 1])).unwrap();
        let csv = metrics_csv([&m]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(METRICS_CSV_HEADER));
        assert_eq!(lines.next(), Some("image-to-concept,4,0.8333333333333333,1,0.2,0.04,0.5,2"));
    }
}
