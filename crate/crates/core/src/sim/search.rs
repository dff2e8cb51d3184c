use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::tree::VertexId;

use super::model::{CascadeModel, GwConfig, Realization, TreeShape, VertexSample};

/// Minimal path sums `ζ_0..ζ_n` of one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct ZetaEstimate {
    pub n_max: u32,
    /// `zeta_n[k]` for every depth reached; shorter than `n_max + 1` only when censored.
    /// Infinite entries mean the tree died out before that depth.
    pub zeta_n: Vec<f64>,
    /// A minimizing vertex at the deepest depth reached, if any.
    pub argmin_path: Option<VertexId>,
    pub nodes_expanded: u64,
    pub censored: bool,
}

impl ZetaEstimate {
    /// `ζ_{n_max}`, or `None` if the search was censored first.
    pub fn zeta(&self) -> Option<f64> {
        if self.zeta_n.len() == self.n_max as usize + 1 {
            self.zeta_n.last().copied()
        } else {
            None
        }
    }
}

#[derive(Clone, Copy)]
pub(crate) struct QueueEntry {
    pub priority: f64,
    pub slot: u32,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Min-heap order: smallest priority first, ties by insertion slot.
impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| other.slot.cmp(&self.slot))
    }
}

struct Node {
    sample: VertexSample,
    parent: u32,
    index: u32,
    /// Path sum including this vertex's own holding time.
    sum: f64,
}

const NO_PARENT: u32 = u32::MAX;

/// Exact `ζ_0..ζ_n` by uniform-cost search over the lazily sampled tree.
///
/// `budget` caps the number of sampled vertices. The first depth-`k` vertex
/// popped from the queue realizes `ζ_k` because holding times are positive.
pub fn zeta_to_depth(model: &CascadeModel, n: u32, budget: u64, seed: u64, trial: u64) -> Result<ZetaEstimate> {
    model.validate()?;
    if budget < 1 {
        return Err(crate::error::Error::Config("budget must be at least 1".into()));
    }
    let real = Realization::new(model, seed, trial);
    let mut nodes: Vec<Node> = Vec::new();
    let mut heap = BinaryHeap::new();
    let root = real.root();
    nodes.push(Node { sample: root, parent: NO_PARENT, index: 0, sum: root.weight });
    heap.push(QueueEntry { priority: root.weight, slot: 0 });
    let mut zeta_n = Vec::with_capacity(n as usize + 1);
    let mut argmin = None;
    let mut expanded = 0u64;
    let mut censored = false;
    while let Some(QueueEntry { priority, slot }) = heap.pop() {
        let depth = nodes[slot as usize].sample.depth;
        if depth as usize == zeta_n.len() {
            zeta_n.push(priority);
            argmin = Some(slot);
            if depth == n {
                break;
            }
        }
        if depth == n {
            continue;
        }
        let v = nodes[slot as usize].sample;
        let kids = real.children(&v);
        if nodes.len() as u64 + kids.len() as u64 > budget {
            censored = true;
            break;
        }
        expanded += 1;
        for (i, c) in kids.into_iter().enumerate() {
            let s = nodes.len() as u32;
            let sum = priority + c.weight;
            nodes.push(Node { sample: c, parent: slot, index: i as u32 + 1, sum });
            heap.push(QueueEntry { priority: sum, slot: s });
        }
    }
    debug_assert!(argmin.is_none_or(|s: u32| nodes[s as usize].sum == *zeta_n.last().unwrap()));
    if !censored {
        // an exhausted queue means a finite tree: ζ = ∞ beyond its height
        zeta_n.resize(n as usize + 1, f64::INFINITY);
    }
    Ok(ZetaEstimate {
        n_max: n,
        zeta_n,
        argmin_path: argmin.map(|s| path_of(&nodes, s)),
        nodes_expanded: expanded,
        censored,
    })
}

/// `zeta_to_depth` on a Galton-Watson tree with offspring law `gw`.
pub fn gw_zeta_to_depth(
    model: &CascadeModel,
    gw: &GwConfig,
    n: u32,
    budget: u64,
    seed: u64,
    trial: u64,
) -> Result<ZetaEstimate> {
    let m = model.clone().with_tree(TreeShape::GaltonWatson(gw.clone()));
    zeta_to_depth(&m, n, budget, seed, trial)
}

fn path_of(nodes: &[Node], mut slot: u32) -> VertexId {
    let mut rev = Vec::new();
    while nodes[slot as usize].parent != NO_PARENT {
        rev.push(nodes[slot as usize].index);
        slot = nodes[slot as usize].parent;
    }
    rev.reverse();
    VertexId::from_path(&rev).expect("child indices start at 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::stats::RunningStats;
    use crate::sim::model::VertexSample;

    /// Brute-force minimum over all `2^n` depth-`n` vertices.
    fn brute_force(model: &CascadeModel, n: u32, seed: u64) -> Vec<f64> {
        let real = Realization::new(model, seed, 0);
        let mut level: Vec<(VertexSample, f64)> = vec![(real.root(), real.root().weight)];
        let mut out = vec![level[0].1];
        for _ in 0..n {
            level = level
                .iter()
                .flat_map(|(v, s)| real.children(v).into_iter().map(move |c| (c, s + c.weight)))
                .collect();
            out.push(level.iter().map(|x| x.1).fold(f64::INFINITY, f64::min));
        }
        out
    }

    #[test]
    fn matches_brute_force() {
        let m = CascadeModel::yule();
        for seed in 0..20 {
            let z = zeta_to_depth(&m, 10, 1_000_000, seed, 0).unwrap();
            assert_eq!(z.zeta_n, brute_force(&m, 10, seed));
            assert!(!z.censored);
        }
    }

    #[test]
    fn argmin_path_realizes_minimum() {
        let m = CascadeModel::yule();
        let z = zeta_to_depth(&m, 12, 1_000_000, 4, 0).unwrap();
        let path = z.argmin_path.clone().unwrap();
        assert_eq!(path.depth(), 12);
        let real = Realization::new(&m, 4, 0);
        let mut v = real.root();
        let mut sum = v.weight;
        for &k in path.path() {
            v = real.children(&v)[k as usize - 1];
            sum += v.weight;
        }
        assert_eq!(sum, z.zeta().unwrap());
    }

    #[test]
    fn budget_censors() {
        let z = zeta_to_depth(&CascadeModel::yule(), 40, 50, 1, 0).unwrap();
        assert!(z.censored);
        assert!(z.zeta_n.len() < 41);
        assert!(z.zeta().is_none());
    }

    #[test]
    fn unary_tree_is_a_sum_of_exponentials() {
        let gw = GwConfig::new(vec![0.0, 1.0]).unwrap();
        let mut s = RunningStats::default();
        for trial in 0..4000 {
            let z = gw_zeta_to_depth(&CascadeModel::yule(), &gw, 9, 1000, 2, trial).unwrap();
            s.push(z.zeta().unwrap());
        }
        assert!((s.mean() - 10.0).abs() < 3.0 * s.std_error(), "{}", s.mean());
        assert!((s.variance() - 10.0).abs() < 1.0, "{}", s.variance());
    }

    #[test]
    fn subcritical_tree_has_infinite_zeta() {
        let gw = GwConfig::new(vec![0.6, 0.4]).unwrap();
        let z = gw_zeta_to_depth(&CascadeModel::yule(), &gw, 50, 10_000, 5, 0).unwrap();
        assert_eq!(z.zeta(), Some(f64::INFINITY));
        assert!(!z.censored);
    }
}
