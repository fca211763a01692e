//! CART regression tree on a single input feature.
//!
//! Splits minimise the summed squared error of the two children. Candidate
//! thresholds are midpoints between consecutive distinct sorted x values and
//! a point goes left when `x <= threshold`. Among equal-SSE candidates the
//! lowest threshold wins.

use serde::{Deserialize, Serialize};

use crate::datagen::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// `None` grows until another stopping rule applies.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_leaf: 5,
            min_samples_split: 10,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_leaf == 0 {
            return Err(Error::config("min_samples_leaf must be positive"));
        }
        if self.min_samples_split == 0 {
            return Err(Error::config("min_samples_split must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
        n_samples: usize,
    },
    Split {
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Fitted tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict_one(&self, x: f64) -> f64 {
        let mut idx = 0;
        loop {
            match self.nodes[idx] {
                Node::Leaf { value, .. } => return value,
                Node::Split {
                    threshold,
                    left,
                    right,
                } => idx = if x <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], idx: usize) -> usize {
            match nodes[idx] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn root_threshold(&self) -> Option<f64> {
        match self.nodes[0] {
            Node::Split { threshold, .. } => Some(threshold),
            Node::Leaf { .. } => None,
        }
    }
}

pub fn tree_predict(tree: &Tree, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| tree.predict_one(x)).collect()
}

pub fn tree_fit(data: &Dataset, config: &TreeConfig) -> Result<Tree> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    if data.len() < config.min_samples_leaf {
        return Err(Error::InsufficientData {
            needed: config.min_samples_leaf,
            got: data.len(),
        });
    }
    let mut rows: Vec<(f64, f64)> = data.iter().collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();

    let mut builder = Builder {
        config,
        nodes: Vec::new(),
    };
    builder.grow(&xs, &ys, 0);
    Ok(Tree {
        nodes: builder.nodes,
    })
}

struct Builder<'a> {
    config: &'a TreeConfig,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    /// Grows the subtree for rows already sorted by x and returns its index.
    fn grow(&mut self, xs: &[f64], ys: &[f64], depth: usize) -> usize {
        let idx = self.nodes.len();
        // placeholder, overwritten below
        self.nodes.push(Node::Leaf {
            value: 0.0,
            n_samples: 0,
        });

        let n = xs.len();
        let cfg = self.config;
        let stop = cfg.max_depth.is_some_and(|d| depth >= d)
            || n < cfg.min_samples_split
            || n < 2 * cfg.min_samples_leaf
            || ys.iter().all(|&y| y == ys[0]);

        let split = if stop {
            None
        } else {
            best_split(xs, ys, cfg.min_samples_leaf)
        };

        self.nodes[idx] = match split {
            None => Node::Leaf {
                value: leaf_value(ys),
                n_samples: n,
            },
            Some(s) => {
                let left = self.grow(&xs[..s.pos], &ys[..s.pos], depth + 1);
                let right = self.grow(&xs[s.pos..], &ys[s.pos..], depth + 1);
                Node::Split {
                    threshold: s.threshold,
                    left,
                    right,
                }
            }
        };
        idx
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    /// Number of rows sent left.
    pos: usize,
    threshold: f64,
}

/// Mean offset from the first value; a constant node returns that value exactly.
fn leaf_value(ys: &[f64]) -> f64 {
    let anchor = ys[0];
    let offset = ys.iter().map(|y| y - anchor).sum::<f64>() / ys.len() as f64;
    let (lo, hi) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
            (lo.min(y), hi.max(y))
        });
    (anchor + offset).clamp(lo, hi)
}

fn best_split(xs: &[f64], ys: &[f64], min_leaf: usize) -> Option<Candidate> {
    let n = ys.len();
    let anchor = ys[0];
    let (total, total_sq) = ys.iter().fold((0.0, 0.0), |(s, q), &y| {
        let d = y - anchor;
        (s + d, q + d * d)
    });
    let node_sse = (total_sq - total * total / n as f64).max(0.0);
    let tie_tol = node_sse * 1e-12;

    let mut best: Option<(Candidate, f64)> = None;
    let (mut sum_l, mut sq_l) = (0.0, 0.0);
    for pos in 1..n {
        let d = ys[pos - 1] - anchor;
        sum_l += d;
        sq_l += d * d;
        if pos < min_leaf || n - pos < min_leaf || xs[pos - 1] >= xs[pos] {
            continue;
        }
        let (nl, nr) = (pos as f64, (n - pos) as f64);
        let sum_r = total - sum_l;
        let sse_l = (sq_l - sum_l * sum_l / nl).max(0.0);
        let sse_r = (total_sq - sq_l - sum_r * sum_r / nr).max(0.0);
        let sse = sse_l + sse_r;
        if best.is_none_or(|(_, b)| sse < b - tie_tol) {
            best = Some((
                Candidate {
                    pos,
                    threshold: midpoint(xs[pos - 1], xs[pos]),
                },
                sse,
            ));
        }
    }
    best.map(|(c, _)| c)
}

/// Midpoint that still routes `lo` left and `hi` right when the two are
/// adjacent floats.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = 0.5 * (lo + hi);
    if m >= hi {
        lo
    } else {
        m
    }
}
