//! Reference implementations shared by the oracle and acceptance suites.
//! They are written independently of the library code paths they check.
#![allow(dead_code)]

use mcband::{Dataset, Tree};

/// Cramer's rule on the raw-sum normal equations
/// `[n, Sx; Sx, Sxx] [a; b] = [Sy; Sxy]`.
pub fn normal_equations(data: &Dataset) -> (f64, f64) {
    let n = data.len() as f64;
    let (mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in data.iter() {
        sx += x;
        sxx += x * x;
        sy += y;
        sxy += x * y;
    }
    let det = n * sxx - sx * sx;
    let a = (sy * sxx - sx * sxy) / det;
    let b = (n * sxy - sx * sy) / det;
    (a, b)
}

/// Reference CART: partitions by threshold on unsorted rows and scores each
/// candidate with a direct two-pass SSE.
pub enum RefNode {
    Leaf(f64),
    Split(f64, Box<RefNode>, Box<RefNode>),
}

fn sse(ys: &[f64]) -> f64 {
    let m = ys.iter().sum::<f64>() / ys.len() as f64;
    ys.iter().map(|y| (y - m) * (y - m)).sum()
}

pub fn ref_grow(rows: &[(f64, f64)], cfg: &mcband::TreeConfig, depth: usize) -> RefNode {
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let n = rows.len();
    if cfg.max_depth.is_some_and(|d| depth >= d)
        || n < cfg.min_samples_split
        || ys.iter().all(|&y| y == ys[0])
    {
        return RefNode::Leaf(mean);
    }
    let mut xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut best: Option<(f64, f64)> = None;
    for w in xs.windows(2) {
        let t = 0.5 * (w[0] + w[1]);
        let left: Vec<f64> = rows.iter().filter(|r| r.0 <= t).map(|r| r.1).collect();
        let right: Vec<f64> = rows.iter().filter(|r| r.0 > t).map(|r| r.1).collect();
        if left.len() < cfg.min_samples_leaf || right.len() < cfg.min_samples_leaf {
            continue;
        }
        let total = sse(&left) + sse(&right);
        let better = match best {
            None => true,
            Some((_, b)) => total < b - 1e-9 * b.max(1e-12),
        };
        if better {
            best = Some((t, total));
        }
    }
    match best {
        None => RefNode::Leaf(mean),
        Some((t, _)) => {
            let left: Vec<(f64, f64)> = rows.iter().copied().filter(|r| r.0 <= t).collect();
            let right: Vec<(f64, f64)> = rows.iter().copied().filter(|r| r.0 > t).collect();
            RefNode::Split(
                t,
                Box::new(ref_grow(&left, cfg, depth + 1)),
                Box::new(ref_grow(&right, cfg, depth + 1)),
            )
        }
    }
}

pub fn ref_thresholds(node: &RefNode, out: &mut Vec<f64>) {
    if let RefNode::Split(t, l, r) = node {
        out.push(*t);
        ref_thresholds(l, out);
        ref_thresholds(r, out);
    }
}

pub fn ref_predict(node: &RefNode, x: f64) -> f64 {
    match node {
        RefNode::Leaf(v) => *v,
        RefNode::Split(t, l, r) => {
            if x <= *t {
                ref_predict(l, x)
            } else {
                ref_predict(r, x)
            }
        }
    }
}

pub fn thresholds(tree: &Tree) -> Vec<f64> {
    fn walk(tree: &Tree, idx: usize, out: &mut Vec<f64>) {
        if let mcband::models::Node::Split {
            threshold,
            left,
            right,
        } = tree.nodes()[idx]
        {
            out.push(threshold);
            walk(tree, left, out);
            walk(tree, right, out);
        }
    }
    let mut out = Vec::new();
    walk(tree, 0, &mut out);
    out
}

fn insertion_sorted(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        let pos = out.iter().position(|&w| w > v).unwrap_or(out.len());
        out.insert(pos, v);
    }
    out
}

pub fn oracle_quantile(values: &[f64], p: f64) -> f64 {
    let v = insertion_sorted(values);
    let pos = p * (v.len() - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(v.len() - 1);
    let w = pos - lo as f64;
    v[lo] * (1.0 - w) + v[hi] * w
}
