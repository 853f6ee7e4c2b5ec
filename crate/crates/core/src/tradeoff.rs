//! Performance scoring and the performance/explainability tradeoff.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::attributions::{Attribution, UnitKind};
use crate::error::{Error, Result};

/// Area under the ROC curve in its Mann–Whitney form, ties counted half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("AUC scores must be finite".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Doubled mid-ranks keep the rank sum an exact integer.
    let mut rank_sum2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid2 = (i + 1 + j + 1) as u128;
        for &k in &order[i..=j] {
            if labels[k] == 1 {
                rank_sum2 += mid2;
            }
        }
        i = j + 1;
    }
    let (p, n) = (n_pos as u128, n_neg as u128);
    // 2U = 2R − p(p+1)
    let u2 = rank_sum2 - p * (p + 1);
    Ok(u2 as f64 / (2 * p * n) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePoint {
    pub model_id: String,
    pub method: String,
    pub auc: f64,
    pub infidelity: f64,
    pub lipschitz: f64,
}

impl CandidatePoint {
    pub fn new(model_id: &str, method: &str, auc: f64, infidelity: f64, lipschitz: f64) -> Self {
        Self {
            model_id: model_id.to_string(),
            method: method.to_string(),
            auc,
            infidelity,
            lipschitz,
        }
    }

    pub fn label(&self) -> String {
        format!("{} {}", self.model_id, self.method)
    }

    pub fn get(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Auc => self.auc,
            Objective::Infidelity => self.infidelity,
            Objective::Lipschitz => self.lipschitz,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.auc.is_finite()
            && (0.0..=1.0).contains(&self.auc)
            && self.infidelity.is_finite()
            && self.infidelity >= 0.0
            && self.lipschitz.is_finite()
            && self.lipschitz >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("candidate {} has out-of-range fields", self.label())))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Auc,
    Infidelity,
    Lipschitz,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::Auc, Objective::Infidelity, Objective::Lipschitz];

    pub fn natural_direction(self) -> Direction {
        match self {
            Objective::Auc => Direction::Maximize,
            _ => Direction::Minimize,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Auc => "auc",
            Objective::Infidelity => "infidelity",
            Objective::Lipschitz => "lipschitz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub field: Objective,
    pub direction: Direction,
}

impl ObjectiveSpec {
    pub fn natural(field: Objective) -> Self {
        Self {
            field,
            direction: field.natural_direction(),
        }
    }

    /// Value oriented so that larger is better.
    fn oriented(&self, p: &CandidatePoint) -> f64 {
        match self.direction {
            Direction::Maximize => p.get(self.field),
            Direction::Minimize => -p.get(self.field),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dominated {
    pub point: CandidatePoint,
    pub witness: CandidatePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoResult {
    pub objectives: Vec<ObjectiveSpec>,
    pub optimal: Vec<CandidatePoint>,
    pub dominated: Vec<Dominated>,
}

pub fn dominates(q: &CandidatePoint, p: &CandidatePoint, objectives: &[ObjectiveSpec]) -> bool {
    let mut strict = false;
    for o in objectives {
        let (a, b) = (o.oriented(q), o.oriented(p));
        if a < b {
            return false;
        }
        strict |= a > b;
    }
    strict
}

/// Exhaustive pairwise dominance scan. The witness for a dominated point is
/// a frontier point when one dominates it, else its first dominator.
pub fn pareto_frontier(points: &[CandidatePoint], objectives: &[ObjectiveSpec]) -> Result<ParetoResult> {
    if points.is_empty() {
        return Err(Error::InvalidInput("pareto frontier needs at least one point".into()));
    }
    if objectives.is_empty() {
        return Err(Error::InvalidInput("pareto frontier needs at least one objective".into()));
    }
    for p in points {
        p.validate()?;
    }
    let dominators: Vec<Vec<usize>> = points
        .iter()
        .map(|p| (0..points.len()).filter(|&q| dominates(&points[q], p, objectives)).collect())
        .collect();
    let mut optimal = Vec::new();
    let mut dominated = Vec::new();
    for (i, doms) in dominators.iter().enumerate() {
        if doms.is_empty() {
            optimal.push(points[i].clone());
        } else {
            let w = doms.iter().copied().find(|&q| dominators[q].is_empty()).unwrap_or(doms[0]);
            dominated.push(Dominated {
                point: points[i].clone(),
                witness: points[w].clone(),
            });
        }
    }
    Ok(ParetoResult {
        objectives: objectives.to_vec(),
        optimal,
        dominated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub field: Objective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl Constraint {
    fn violated_by(&self, p: &CandidatePoint) -> Option<String> {
        let v = p.get(self.field);
        if let Some(lo) = self.min {
            if v < lo {
                return Some(format!("{} {} < {}", self.field.as_str(), v, lo));
            }
        }
        if let Some(hi) = self.max {
            if v > hi {
                return Some(format!("{} {} > {}", self.field.as_str(), v, hi));
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    pub field: Objective,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPoint {
    pub rank: usize,
    pub score: f64,
    pub point: CandidatePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excluded {
    pub point: CandidatePoint,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub ranked: Vec<RankedPoint>,
    pub excluded: Vec<Excluded>,
}

impl Ranking {
    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }
}

/// Ranks constraint-satisfying points by a weighted sum of min-max normalized
/// objectives (minimize fields negated first). Ties go to the smaller
/// (model_id, method).
pub fn weighted_rank(points: &[CandidatePoint], weights: &[Weight], constraints: &[Constraint]) -> Result<Ranking> {
    if weights.iter().any(|w| !w.weight.is_finite() || w.weight < 0.0) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }
    if weights.iter().all(|w| w.weight == 0.0) {
        return Err(Error::InvalidInput("at least one weight must be positive".into()));
    }
    for p in points {
        p.validate()?;
    }
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for p in points {
        match constraints.iter().find_map(|c| c.violated_by(p)) {
            Some(reason) => excluded.push(Excluded {
                point: p.clone(),
                reason,
            }),
            None => kept.push(p),
        }
    }
    let mut scored: Vec<(f64, &CandidatePoint)> = kept.iter().map(|p| (0.0, *p)).collect();
    for w in weights.iter().filter(|w| w.weight > 0.0) {
        let spec = ObjectiveSpec::natural(w.field);
        let vals: Vec<f64> = kept.iter().map(|p| spec.oriented(p)).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (s, v) in scored.iter_mut().zip(vals) {
            let norm = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
            s.0 += w.weight * norm;
        }
    }
    scored.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.model_id.cmp(&b.1.model_id))
            .then_with(|| a.1.method.cmp(&b.1.method))
    });
    let mut ranked: Vec<RankedPoint> = Vec::with_capacity(scored.len());
    for (i, (score, p)) in scored.into_iter().enumerate() {
        let rank = match ranked.last() {
            Some(prev) if prev.score == score => prev.rank,
            _ => i + 1,
        };
        ranked.push(RankedPoint {
            rank,
            score,
            point: p.clone(),
        });
    }
    Ok(Ranking { ranked, excluded })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub top_k: usize,
    pub overlap: usize,
    pub shared: Vec<usize>,
    pub truth_top: Vec<usize>,
    pub surrogate_top: Vec<usize>,
    /// Spearman correlation of signed scores over the union of both top sets.
    pub rank_correlation: Option<f64>,
}

/// Indices of the `k` largest `|score|` entries (nonzero only), ties by index.
pub fn top_k_by_magnitude(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] != 0.0).collect();
    idx.sort_by(|&a, &b| scores[b].abs().total_cmp(&scores[a].abs()).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}

pub fn overlap_report(truth: &Attribution, surrogate: &Attribution, top_k: usize) -> Result<OverlapReport> {
    if truth.unit_kind != UnitKind::Feature || surrogate.unit_kind != UnitKind::Feature {
        return Err(Error::InvalidInput("overlap needs two feature-kind attributions".into()));
    }
    if truth.len() != surrogate.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: surrogate.len(),
        });
    }
    let truth_top = top_k_by_magnitude(&truth.scores, top_k);
    let surrogate_top = top_k_by_magnitude(&surrogate.scores, top_k);
    let shared: Vec<usize> = truth_top.iter().copied().filter(|i| surrogate_top.contains(i)).collect();
    let mut union: Vec<usize> = truth_top.iter().chain(&surrogate_top).copied().collect();
    union.sort_unstable();
    union.dedup();
    let a: Vec<f64> = union.iter().map(|&i| truth.scores[i]).collect();
    let b: Vec<f64> = union.iter().map(|&i| surrogate.scores[i]).collect();
    Ok(OverlapReport {
        top_k,
        overlap: shared.len(),
        shared,
        truth_top,
        surrogate_top,
        rank_correlation: spearman(&a, &b),
    })
}

/// Plain-text table of the candidates with frontier membership marked.
pub fn frontier_table(points: &[CandidatePoint], result: &ParetoResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:<22} {:>8} {:>12} {:>12}  status",
        "model", "method", "auc", "infidelity", "lipschitz"
    );
    for p in points {
        let status = if result.optimal.contains(p) {
            "optimal".to_string()
        } else {
            result
                .dominated
                .iter()
                .find(|d| &d.point == p)
                .map(|d| format!("dominated by {}", d.witness.label()))
                .unwrap_or_default()
        };
        let _ = writeln!(
            out,
            "{:<24} {:<22} {:>8.4} {:>12.6} {:>12.6}  {}",
            p.model_id, p.method, p.auc, p.infidelity, p.lipschitz, status
        );
    }
    out
}

/// Scatter of AUC against one quality metric with the frontier polyline.
pub fn frontier_svg(points: &[CandidatePoint], result: &ParetoResult, quality: Objective) -> String {
    let xs: Vec<f64> = points.iter().map(|p| p.get(quality)).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.auc).collect();
    let mut frontier: Vec<&CandidatePoint> = result.optimal.iter().collect();
    frontier.sort_by(|a, b| a.get(quality).partial_cmp(&b.get(quality)).unwrap_or(Ordering::Equal));
    let mut plot = crate::plot::Canvas::new(640, 440, &format!("AUC vs {}", quality.as_str()));
    let (x_range, y_range) = (crate::plot::padded_range(&xs), crate::plot::padded_range(&ys));
    plot.axes(x_range, y_range, quality.as_str(), "auc");
    let line: Vec<(f64, f64)> = frontier.iter().map(|p| (p.get(quality), p.auc)).collect();
    plot.polyline(&line, "#c0392b");
    for p in points {
        let on = result.optimal.contains(p);
        plot.point(p.get(quality), p.auc, if on { "#c0392b" } else { "#34495e" }, &p.label());
    }
    plot.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair_count_auc(scores: &[f64], labels: &[u8]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if labels[i] == 1 && labels[j] == 0 {
                    den += 1.0;
                    num += match scores[i].partial_cmp(&scores[j]).unwrap() {
                        Ordering::Greater => 1.0,
                        Ordering::Equal => 0.5,
                        Ordering::Less => 0.0,
                    };
                }
            }
        }
        num / den
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(auc(&[0.3; 6], &[0, 1, 0, 1, 1, 0]).unwrap(), 0.5);
        assert_eq!(auc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap(), 0.75);
        assert!(matches!(auc(&[0.1, 0.2], &[1, 1]), Err(Error::SingleClass)));
    }

    fn pt(m: &str, a: f64, i: f64, l: f64) -> CandidatePoint {
        CandidatePoint::new(m, "x", a, i, l)
    }

    #[test]
    fn single_and_duplicate_points() {
        let objs = [ObjectiveSpec::natural(Objective::Auc), ObjectiveSpec::natural(Objective::Infidelity)];
        let r = pareto_frontier(&[pt("a", 0.7, 0.1, 1.0)], &objs).unwrap();
        assert_eq!(r.optimal.len(), 1);
        let r = pareto_frontier(&[pt("a", 0.7, 0.1, 1.0), pt("a", 0.7, 0.1, 1.0)], &objs).unwrap();
        assert_eq!(r.optimal.len(), 2);
    }

    #[test]
    fn weighted_rank_single_weight_sorts() {
        let pts = vec![pt("a", 0.7, 0.3, 1.0), pt("b", 0.9, 0.1, 3.0), pt("c", 0.8, 0.2, 2.0)];
        let r = weighted_rank(&pts, &[Weight { field: Objective::Lipschitz, weight: 1.0 }], &[]).unwrap();
        let order: Vec<&str> = r.ranked.iter().map(|p| p.point.model_id.as_str()).collect();
        assert_eq!(order, ["a", "c", "b"]);
        let r = weighted_rank(
            &pts,
            &[Weight { field: Objective::Auc, weight: 1.0 }],
            &[Constraint { field: Objective::Auc, min: Some(0.95), max: None }],
        )
        .unwrap();
        assert!(r.is_empty());
        assert_eq!(r.excluded.len(), 3);
        assert!(weighted_rank(&pts, &[Weight { field: Objective::Auc, weight: 0.0 }], &[]).is_err());
    }

    #[test]
    fn overlap_examples() {
        use crate::attributions::truth_linear;
        use crate::models::LinearModel;
        use crate::sparse::SparseVector;
        let w: Vec<f64> = (0..10).map(|i| i as f64 - 4.5).collect();
        let x = SparseVector::from_dense(&[0.3; 10]);
        let t = truth_linear(&LinearModel::new(w, 0.0).unwrap(), &x).unwrap();
        let r = overlap_report(&t, &t, 5).unwrap();
        assert_eq!((r.overlap, r.rank_correlation), (5, Some(1.0)));
        let mut neg = t.clone();
        neg.scores.iter_mut().for_each(|s| *s = -*s);
        let r = overlap_report(&t, &neg, 5).unwrap();
        assert_eq!(r.overlap, 5);
        assert!((r.rank_correlation.unwrap() + 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn auc_matches_pair_counting(
            data in proptest::collection::vec((0u8..6, 0u8..2), 2..40)
        ) {
            let scores: Vec<f64> = data.iter().map(|d| d.0 as f64 / 5.0).collect();
            let labels: Vec<u8> = data.iter().map(|d| d.1).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            prop_assert_eq!(auc(&scores, &labels).unwrap(), pair_count_auc(&scores, &labels));
            let cubed: Vec<f64> = scores.iter().map(|s| s.powi(3) + 2.0).collect();
            prop_assert_eq!(auc(&cubed, &labels).unwrap(), auc(&scores, &labels).unwrap());
        }

        #[test]
        fn pareto_partition_and_witnesses(
            raw in proptest::collection::vec((0u8..5, 0u8..5, 0u8..5), 1..15)
        ) {
            let pts: Vec<CandidatePoint> = raw.iter().enumerate()
                .map(|(i, r)| pt(&format!("m{i}"), r.0 as f64 / 5.0, r.1 as f64, r.2 as f64))
                .collect();
            let objs: Vec<ObjectiveSpec> = Objective::ALL.iter().map(|o| ObjectiveSpec::natural(*o)).collect();
            let r = pareto_frontier(&pts, &objs).unwrap();
            prop_assert_eq!(r.optimal.len() + r.dominated.len(), pts.len());
            for p in &r.optimal {
                prop_assert!(pts.iter().all(|q| !dominates(q, p, &objs)));
            }
            for d in &r.dominated {
                prop_assert!(dominates(&d.witness, &d.point, &objs));
            }
            let cubed: Vec<CandidatePoint> = pts.iter().map(|p| CandidatePoint { lipschitz: p.lipschitz.powi(3), ..p.clone() }).collect();
            let rc = pareto_frontier(&cubed, &objs).unwrap();
            let ids = |r: &ParetoResult| r.optimal.iter().map(|p| p.model_id.clone()).collect::<Vec<_>>();
            prop_assert_eq!(ids(&r), ids(&rc));
        }
    }
}
