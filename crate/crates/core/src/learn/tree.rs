use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features drawn per split; all of them when `None`.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 6,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART regression tree grown on squared error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

struct Grower<'a, R> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    params: TreeParams,
    n_features: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

fn mean(y: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64
}

impl<R: Rng> Grower<'_, R> {
    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: mean(self.y, idx),
        });
        if depth >= self.params.max_depth || idx.len() < 2 * self.params.min_samples_leaf.max(1) {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(idx) else {
            return id;
        };
        let mut cut = 0;
        for i in 0..idx.len() {
            if self.x[idx[i]][feature] <= threshold {
                idx.swap(i, cut);
                cut += 1;
            }
        }
        let (l, r) = idx.split_at_mut(cut);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&mut self, idx: &[usize]) -> Option<(usize, f64)> {
        let d = self.n_features;
        let features: Vec<usize> = match self.params.max_features {
            Some(m) if m < d => {
                let mut f = sample(self.rng, d, m.max(1)).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        };
        let n = idx.len();
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let leaf = self.params.min_samples_leaf.max(1);
        // Maximise sum_l²/n_l + sum_r²/n_r, equivalent to minimising SSE.
        let base = total * total / n as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<usize> = idx.to_vec();
        for &f in &features {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut sum_l = 0.0;
            for k in 0..n - 1 {
                sum_l += self.y[order[k]];
                let (nl, nr) = (k + 1, n - k - 1);
                let (xa, xb) = (self.x[order[k]][f], self.x[order[k + 1]][f]);
                if xa == xb || nl < leaf || nr < leaf {
                    continue;
                }
                let sum_r = total - sum_l;
                let gain = sum_l * sum_l / nl as f64 + sum_r * sum_r / nr as f64 - base;
                if gain > 1e-12 * (1.0 + base.abs()) && best.is_none_or(|b| gain > b.0) {
                    best = Some((gain, f, 0.5 * (xa + xb)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

impl RegressionTree {
    /// Grow on the rows listed in `idx` (repeats allowed, for bootstraps).
    pub fn fit_indices<R: Rng>(x: &[Vec<f64>], y: &[f64], idx: &mut [usize], params: TreeParams, rng: &mut R) -> Self {
        let mut g = Grower {
            x,
            y,
            params,
            n_features: x[0].len(),
            rng,
            nodes: Vec::new(),
        };
        g.grow(idx, 0);
        Self { nodes: g.nodes }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}
