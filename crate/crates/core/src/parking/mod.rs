//! Labeled plane trees and the parking process on them.
//!
//! Vertex `v` receives `ℓ(v)` cars. Each car parks at the first free vertex
//! on its path to the root, and cars finding none leave through the root.
//! Processing vertices leaves-first, the number of cars reaching `v` obeys
//! `χ(v) = ℓ(v) + Σ_{u child of v} (χ(u) - 1)₊`, `v` ends up occupied iff
//! `χ(v) >= 1`, and `(χ(v) - 1)₊` cars leave `v` towards its parent.

pub mod enumerate;
pub mod montecarlo;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParkingError {
    #[error("invalid vertex id {0}")]
    InvalidVertex(usize),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("enumeration needs {needed} iterations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("weight sequence must have finite support")]
    InfiniteSupport,
    #[error("weight sequence is not a probability distribution")]
    NotProbability,
    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, ParkingError>;

/// A rooted plane tree with car counts on its vertices.
///
/// Vertex 0 is the root and every child has a larger id than its parent, so
/// iterating ids downwards visits children before parents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabeledTree {
    children: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    labels: Vec<u32>,
}

impl LabeledTree {
    pub fn new(children: Vec<Vec<usize>>, labels: Vec<u32>) -> Result<Self> {
        let n = children.len();
        if n == 0 {
            return Err(ParkingError::InvalidTree("empty tree".into()));
        }
        if labels.len() != n {
            return Err(ParkingError::InvalidTree(format!("{} labels for {n} vertices", labels.len())));
        }
        let mut parent = vec![None; n];
        for (v, cs) in children.iter().enumerate() {
            for &c in cs {
                if c >= n {
                    return Err(ParkingError::InvalidVertex(c));
                }
                if c <= v || parent[c].is_some() {
                    return Err(ParkingError::InvalidTree(format!("vertex {c} misplaced under {v}")));
                }
                parent[c] = Some(v);
            }
        }
        if let Some(orphan) = (1..n).find(|&v| parent[v].is_none()) {
            return Err(ParkingError::InvalidTree(format!("vertex {orphan} has no parent")));
        }
        Ok(LabeledTree { children, parent, labels })
    }

    /// Builds the tree of a balanced word (`true` = down, `false` = up) with
    /// vertices numbered in preorder.
    pub fn from_dyck(word: &[bool], labels: Vec<u32>) -> Result<Self> {
        let mut children = vec![Vec::new()];
        let mut path = vec![0usize];
        for &down in word {
            if down {
                let v = children.len();
                children.push(Vec::new());
                children[*path.last().unwrap()].push(v);
                path.push(v);
            } else {
                path.pop();
                if path.is_empty() {
                    return Err(ParkingError::InvalidTree("unbalanced word".into()));
                }
            }
        }
        LabeledTree::new(children, labels)
    }

    /// A single vertex carrying `label` cars.
    pub fn leaf(label: u32) -> Self {
        LabeledTree { children: vec![Vec::new()], parent: vec![None], labels: vec![label] }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Surplus `Σ (ℓ - 1)` of every subtree, indexed by subtree root.
    pub fn subtree_surpluses(&self) -> Vec<i64> {
        let mut s: Vec<i64> = self.labels.iter().map(|&l| l as i64 - 1).collect();
        for v in (1..self.len()).rev() {
            let p = self.parent[v].unwrap();
            s[p] += s[v];
        }
        s
    }

    /// Every subtree has nonnegative surplus.
    pub fn is_fully_packed(&self) -> bool {
        self.subtree_surpluses().iter().all(|&s| s >= 0)
    }
}

/// Surplus of the subtree rooted at `v`.
pub fn surplus(t: &LabeledTree, v: usize) -> Result<i64> {
    if v >= t.len() {
        return Err(ParkingError::InvalidVertex(v));
    }
    Ok(t.subtree_surpluses()[v])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParkingOutcome {
    pub chi: Vec<u64>,
    pub occupied: Vec<bool>,
    /// Cars leaving each vertex towards its parent (or out of the root).
    pub flux: Vec<u64>,
    pub overflow: u64,
    pub fully_parked: bool,
    /// Connected components of occupied vertices, each listed from its top vertex.
    pub clusters: Vec<Vec<usize>>,
}

/// Runs the `χ` recursion in one leaves-first pass.
pub fn run_parking(t: &LabeledTree) -> ParkingOutcome {
    let n = t.len();
    let mut chi: Vec<u64> = t.labels.iter().map(|&l| l as u64).collect();
    for v in (1..n).rev() {
        let out = chi[v].saturating_sub(1);
        chi[t.parent[v].unwrap()] += out;
    }
    let occupied: Vec<bool> = chi.iter().map(|&c| c >= 1).collect();
    let flux: Vec<u64> = chi.iter().map(|&c| c.saturating_sub(1)).collect();
    let clusters = clusters_of(t, &occupied);
    ParkingOutcome {
        overflow: flux[0],
        fully_parked: occupied.iter().all(|&o| o),
        chi,
        occupied,
        flux,
        clusters,
    }
}

fn clusters_of(t: &LabeledTree, occupied: &[bool]) -> Vec<Vec<usize>> {
    let mut id = vec![usize::MAX; t.len()];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    // parents precede children, so the cluster of a parent is known first
    for v in 0..t.len() {
        if !occupied[v] {
            continue;
        }
        let k = match t.parent[v] {
            Some(p) if occupied[p] => id[p],
            _ => {
                clusters.push(Vec::new());
                clusters.len() - 1
            }
        };
        id[v] = k;
        clusters[k].push(v);
    }
    clusters
}

/// Parks the cars one at a time in a random order, each driving rootwards
/// to the first free vertex. Returns the occupied set and the number of
/// cars that left each vertex.
pub fn park_car_by_car<R: Rng + ?Sized>(t: &LabeledTree, rng: &mut R) -> (Vec<bool>, Vec<u64>) {
    let mut cars: Vec<usize> = t.labels.iter().enumerate().flat_map(|(v, &l)| std::iter::repeat_n(v, l as usize)).collect();
    cars.shuffle(rng);
    let mut occupied = vec![false; t.len()];
    let mut flux = vec![0u64; t.len()];
    for start in cars {
        let mut v = Some(start);
        while let Some(u) = v {
            if !occupied[u] {
                occupied[u] = true;
                break;
            }
            flux[u] += 1;
            v = t.parent[u];
        }
    }
    (occupied, flux)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two(l_root: u32, l_child: u32) -> LabeledTree {
        LabeledTree::new(vec![vec![1], vec![]], vec![l_root, l_child]).unwrap()
    }

    #[test]
    fn single_vertex() {
        let o = run_parking(&LabeledTree::leaf(3));
        assert_eq!((o.chi[0], o.overflow, o.fully_parked), (3, 2, true));
        assert_eq!(surplus(&LabeledTree::leaf(0), 0).unwrap(), -1);
        assert!(!LabeledTree::leaf(0).is_fully_packed());
    }

    #[test]
    fn root_empty_child_two() {
        let t = two(0, 2);
        let o = run_parking(&t);
        assert_eq!(o.chi, vec![1, 2]);
        assert_eq!(o.overflow, 0);
        assert!(o.fully_parked);
        assert_eq!(t.subtree_surpluses(), vec![0, 1]);
        assert!(t.is_fully_packed());
        assert!(surplus(&t, 2).is_err());
    }

    #[test]
    fn rejects_bad_trees() {
        assert!(LabeledTree::new(vec![], vec![]).is_err());
        assert!(LabeledTree::new(vec![vec![], vec![]], vec![1, 1]).is_err());
        assert!(LabeledTree::new(vec![vec![1], vec![0]], vec![1, 1]).is_err());
        assert!(LabeledTree::new(vec![vec![5]], vec![1]).is_err());
    }

    #[test]
    fn clusters_split_at_empty_vertices() {
        // path 0 - 1 - 2 with cars (1, 0, 1): vertex 1 stays empty
        let t = LabeledTree::new(vec![vec![1], vec![2], vec![]], vec![1, 0, 1]).unwrap();
        let o = run_parking(&t);
        assert_eq!(o.occupied, vec![true, false, true]);
        assert_eq!(o.clusters, vec![vec![0], vec![2]]);
    }

    fn arb_tree() -> impl Strategy<Value = LabeledTree> {
        (1usize..40).prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|v| 0..v).collect();
            (parents, proptest::collection::vec(0u32..4, n))
        })
        .prop_map(|(parents, labels)| {
            let mut children = vec![Vec::new(); labels.len()];
            for (i, p) in parents.into_iter().enumerate() {
                children[p].push(i + 1);
            }
            LabeledTree::new(children, labels).unwrap()
        })
    }

    proptest! {
        #[test]
        fn all_ones_park_exactly(t in arb_tree()) {
            let t = LabeledTree::new(t.children.clone(), vec![1; t.len()]).unwrap();
            let o = run_parking(&t);
            prop_assert!(o.fully_parked && o.overflow == 0 && o.chi.iter().all(|&c| c == 1));
        }

        #[test]
        fn fully_parked_iff_fully_packed(t in arb_tree()) {
            let o = run_parking(&t);
            prop_assert_eq!(o.fully_parked, t.is_fully_packed());
            let total: i64 = t.labels().iter().map(|&l| l as i64).sum();
            prop_assert_eq!(total, t.len() as i64 + t.subtree_surpluses()[0]);
            if o.fully_parked {
                let s = t.subtree_surpluses();
                for (f, s) in o.flux.iter().zip(&s) {
                    prop_assert_eq!(*f as i64, *s);
                }
            }
        }

        #[test]
        fn order_does_not_matter(t in arb_tree(), seed in any::<u64>()) {
            let o = run_parking(&t);
            let (occ, flux) = park_car_by_car(&t, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(occ, o.occupied);
            prop_assert_eq!(flux, o.flux);
        }
    }
}
