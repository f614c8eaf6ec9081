//! Instance segmentation metrics: coverage, weighted coverage, instance
//! precision/recall/F1 and point accuracy.
//!
//! NOISE points never belong to an instance set. Instances are matched
//! one-to-one by a greedy pass over candidate pairs in a strict total order:
//! IoU descending (compared exactly on integer counts), then intersection
//! size descending, then gt id, then predicted id.
//!
//! Empty-side conventions: with no gt and no predicted instances every
//! instance metric is 1; if only one side is empty, cov, wcov, precision
//! and recall are all 0. Accuracy of a zero-length labeling is 1.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cloud::{InstanceLabeling, Label, NOISE};
use crate::error::{Error, Result};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

/// |A∩B| / |A∪B| of two index sets (duplicates ignored); 0 when both are
/// empty.
pub fn iou(a: &[usize], b: &[usize]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    a.dedup();
    b.sort_unstable();
    b.dedup();
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Instance sizes and pairwise intersections of two labelings.
struct Contingency {
    gt_ids: Vec<Label>,
    pred_ids: Vec<Label>,
    gt_sizes: Vec<usize>,
    pred_sizes: Vec<usize>,
    /// (gt index, pred index) → intersection size; only nonzero entries.
    inter: BTreeMap<(usize, usize), usize>,
}

impl Contingency {
    fn new(gt: &InstanceLabeling, pred: &InstanceLabeling) -> Result<Self> {
        if gt.len() != pred.len() {
            return Err(Error::LengthMismatch {
                expected: gt.len(),
                found: pred.len(),
            });
        }
        let dense = |l: &InstanceLabeling| {
            let ids: Vec<Label> = l.histogram().into_keys().filter(|&k| k != NOISE).collect();
            let pos: BTreeMap<Label, usize> = ids.iter().enumerate().map(|(i, &k)| (k, i)).collect();
            (ids, pos)
        };
        let (gt_ids, gpos) = dense(gt);
        let (pred_ids, ppos) = dense(pred);
        let mut gt_sizes = vec![0; gt_ids.len()];
        let mut pred_sizes = vec![0; pred_ids.len()];
        let mut inter = BTreeMap::new();
        for (&g, &p) in gt.labels().iter().zip(pred.labels()) {
            let gi = gpos.get(&g).copied();
            let pi = ppos.get(&p).copied();
            if let Some(gi) = gi {
                gt_sizes[gi] += 1;
            }
            if let Some(pi) = pi {
                pred_sizes[pi] += 1;
            }
            if let (Some(gi), Some(pi)) = (gi, pi) {
                *inter.entry((gi, pi)).or_insert(0) += 1;
            }
        }
        Ok(Self {
            gt_ids,
            pred_ids,
            gt_sizes,
            pred_sizes,
            inter,
        })
    }

    fn union(&self, g: usize, p: usize, i: usize) -> usize {
        self.gt_sizes[g] + self.pred_sizes[p] - i
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub cov: f64,
    pub wcov: f64,
}

pub fn coverage(gt: &InstanceLabeling, pred: &InstanceLabeling) -> Result<Coverage> {
    let c = Contingency::new(gt, pred)?;
    Ok(coverage_of(&c))
}

fn coverage_of(c: &Contingency) -> Coverage {
    if c.gt_ids.is_empty() {
        let v = if c.pred_ids.is_empty() { 1.0 } else { 0.0 };
        return Coverage { cov: v, wcov: v };
    }
    let mut best = vec![0.0f64; c.gt_ids.len()];
    for (&(g, p), &i) in &c.inter {
        best[g] = best[g].max(i as f64 / c.union(g, p, i) as f64);
    }
    let total: usize = c.gt_sizes.iter().sum();
    let mut cov = 0.0;
    let mut weighted = 0.0;
    for (g, &b) in best.iter().enumerate() {
        cov += b;
        weighted += c.gt_sizes[g] as f64 * b;
    }
    Coverage {
        cov: cov / c.gt_ids.len() as f64,
        wcov: weighted / total as f64,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMatch {
    pub gt: Label,
    pub pred: Label,
    pub iou: f64,
}

struct Candidate {
    g: usize,
    p: usize,
    inter: usize,
    union: usize,
}

fn candidate_order(a: &Candidate, b: &Candidate, c: &Contingency) -> Ordering {
    // a.inter/a.union vs b.inter/b.union without rounding
    let lhs = a.inter as u128 * b.union as u128;
    let rhs = b.inter as u128 * a.union as u128;
    rhs.cmp(&lhs)
        .then(b.inter.cmp(&a.inter))
        .then(c.gt_ids[a.g].cmp(&c.gt_ids[b.g]))
        .then(c.pred_ids[a.p].cmp(&c.pred_ids[b.p]))
}

fn greedy(c: &Contingency) -> Vec<Candidate> {
    let mut cands: Vec<Candidate> = c
        .inter
        .iter()
        .map(|(&(g, p), &inter)| Candidate {
            g,
            p,
            inter,
            union: c.union(g, p, inter),
        })
        .collect();
    cands.sort_by(|a, b| candidate_order(a, b, c));
    let mut gt_used = vec![false; c.gt_ids.len()];
    let mut pred_used = vec![false; c.pred_ids.len()];
    cands
        .into_iter()
        .filter(|k| {
            if gt_used[k.g] || pred_used[k.p] {
                return false;
            }
            gt_used[k.g] = true;
            pred_used[k.p] = true;
            true
        })
        .collect()
}

/// One-to-one greedy matching over all overlapping pairs, best pair first.
pub fn greedy_matching(gt: &InstanceLabeling, pred: &InstanceLabeling) -> Result<Vec<InstanceMatch>> {
    let c = Contingency::new(gt, pred)?;
    Ok(matches_of(&c))
}

fn matches_of(c: &Contingency) -> Vec<InstanceMatch> {
    greedy(c)
        .into_iter()
        .map(|k| InstanceMatch {
            gt: c.gt_ids[k.g],
            pred: c.pred_ids[k.p],
            iou: k.inter as f64 / k.union as f64,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("iou_threshold", format!("must lie in (0, 1], got {t}")))
    }
}

/// Counts greedy matches with IoU ≥ `iou_threshold`. Since the greedy pass
/// visits pairs by descending IoU, this equals greedy matching restricted
/// to pairs above the threshold.
pub fn instance_prf(gt: &InstanceLabeling, pred: &InstanceLabeling, iou_threshold: f64) -> Result<Prf> {
    check_threshold(iou_threshold)?;
    let c = Contingency::new(gt, pred)?;
    Ok(prf_of(&c, &matches_of(&c), iou_threshold))
}

fn prf_of(c: &Contingency, matches: &[InstanceMatch], t: f64) -> Prf {
    let (ng, np) = (c.gt_ids.len(), c.pred_ids.len());
    if ng == 0 && np == 0 {
        return Prf {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        };
    }
    let hits = matches.iter().filter(|m| m.iou >= t).count() as f64;
    let precision = if np == 0 { 0.0 } else { hits / np as f64 };
    let recall = if ng == 0 { 0.0 } else { hits / ng as f64 };
    Prf {
        precision,
        recall,
        f1: f1_score(precision, recall),
    }
}

/// Fraction of points whose (gt, pred) instance pair is matched by the
/// unthresholded greedy matching, or which are NOISE on both sides.
pub fn point_accuracy(gt: &InstanceLabeling, pred: &InstanceLabeling) -> Result<f64> {
    let c = Contingency::new(gt, pred)?;
    Ok(accuracy_of(gt, pred, &matches_of(&c)))
}

fn accuracy_of(gt: &InstanceLabeling, pred: &InstanceLabeling, matches: &[InstanceMatch]) -> f64 {
    if gt.is_empty() {
        return 1.0;
    }
    let pairs: BTreeMap<Label, Label> = matches.iter().map(|m| (m.gt, m.pred)).collect();
    let correct = gt
        .labels()
        .iter()
        .zip(pred.labels())
        .filter(|&(&g, &p)| {
            if g == NOISE {
                p == NOISE
            } else {
                pairs.get(&g) == Some(&p)
            }
        })
        .count();
    correct as f64 / gt.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub sample_id: String,
    pub cov: f64,
    pub wcov: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Greedy one-to-one pairs, best first, before thresholding.
    pub matches: Vec<InstanceMatch>,
}

pub fn evaluate(
    sample_id: impl Into<String>,
    gt: &InstanceLabeling,
    pred: &InstanceLabeling,
    iou_threshold: f64,
) -> Result<EvalReport> {
    check_threshold(iou_threshold)?;
    let c = Contingency::new(gt, pred)?;
    let matches = matches_of(&c);
    let Coverage { cov, wcov } = coverage_of(&c);
    let Prf { precision, recall, f1 } = prf_of(&c, &matches, iou_threshold);
    Ok(EvalReport {
        sample_id: sample_id.into(),
        cov,
        wcov,
        precision,
        recall,
        f1,
        accuracy: accuracy_of(gt, pred, &matches),
        matches,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub samples: usize,
    pub cov: f64,
    pub wcov: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

/// Per-field means in the given order; `None` for no reports.
pub fn aggregate(reports: &[EvalReport]) -> Option<Aggregate> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    let mean = |f: fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    Some(Aggregate {
        samples: reports.len(),
        cov: mean(|r| r.cov),
        wcov: mean(|r| r.wcov),
        precision: mean(|r| r.precision),
        recall: mean(|r| r.recall),
        f1: mean(|r| r.f1),
        accuracy: mean(|r| r.accuracy),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub samples: Vec<EvalReport>,
    pub aggregate: Option<Aggregate>,
    /// Sample ids with ground truth but no prediction.
    pub missing: Vec<String>,
}

impl BatchReport {
    pub fn new(mut samples: Vec<EvalReport>, mut missing: Vec<String>) -> Self {
        samples.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
        missing.sort();
        let aggregate = aggregate(&samples);
        Self {
            samples,
            aggregate,
            missing,
        }
    }
}
