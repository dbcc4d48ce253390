use serde::{Deserialize, Serialize};

use super::FactorError;

/// Lance–Williams distance update for a linkage criterion.
pub trait Linkage: Sync {
    fn name(&self) -> &'static str;

    /// Distance from the union of clusters `i` and `j` to cluster `k`.
    fn update(&self, d_ik: f64, d_jk: f64, n_i: usize, n_j: usize) -> f64;
}

struct Single;
struct Complete;
struct Average;

impl Linkage for Single {
    fn name(&self) -> &'static str {
        "single"
    }
    fn update(&self, d_ik: f64, d_jk: f64, _: usize, _: usize) -> f64 {
        d_ik.min(d_jk)
    }
}

impl Linkage for Complete {
    fn name(&self) -> &'static str {
        "complete"
    }
    fn update(&self, d_ik: f64, d_jk: f64, _: usize, _: usize) -> f64 {
        d_ik.max(d_jk)
    }
}

impl Linkage for Average {
    fn name(&self) -> &'static str {
        "average"
    }
    fn update(&self, d_ik: f64, d_jk: f64, n_i: usize, n_j: usize) -> f64 {
        (n_i as f64 * d_ik + n_j as f64 * d_jk) / (n_i + n_j) as f64
    }
}

static LINKAGES: &[&dyn Linkage] = &[&Average, &Complete, &Single];

/// Looks up a linkage by name; `average` is the default.
pub fn linkage(name: &str) -> Option<&'static dyn Linkage> {
    LINKAGES.iter().copied().find(|l| l.name() == name)
}

pub fn linkage_names() -> impl Iterator<Item = &'static str> {
    LINKAGES.iter().map(|l| l.name())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub node: usize,
    pub size: usize,
}

/// Leaves are nodes `0..n`; merge `t` creates node `n + t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub linkage: String,
    pub leaves: Vec<String>,
    pub merges: Vec<Merge>,
}

/// Agglomerative clustering on Euclidean distance.
///
/// Ties in merge distance go to the pair whose clusters come first when
/// leaves are ordered by label (then input position), each cluster being
/// represented by its first leaf in that order.
pub fn hac(
    labels: &[String],
    vectors: &[Vec<f64>],
    linkage: &dyn Linkage,
) -> Result<Dendrogram, FactorError> {
    let n = vectors.len();
    if n < 2 {
        return Err(FactorError::TooFewVectors(n));
    }
    let dim = vectors[0].len();
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(FactorError::DimensionMismatch {
                index,
                expected: dim,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(FactorError::NonFinite);
        }
    }
    assert_eq!(labels.len(), n, "one label per vector");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| labels[a].cmp(&labels[b]).then(a.cmp(&b)));
    let mut rank = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }

    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d[i][j] = s.sqrt();
            d[j][i] = d[i][j];
        }
    }

    // slot i holds one active cluster
    let mut active = vec![true; n];
    let mut node = (0..n).collect::<Vec<_>>();
    let mut size = vec![1usize; n];
    let mut key = rank.clone();
    let mut merges = Vec::with_capacity(n - 1);

    for t in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if !active[j] {
                    continue;
                }
                let pair = (key[i].min(key[j]), key[i].max(key[j]));
                let better = match best {
                    None => true,
                    Some((bd, bp, _, _)) => d[i][j] < bd || (d[i][j] == bd && pair < bp),
                };
                if better {
                    best = Some((d[i][j], pair, i, j));
                }
            }
        }
        let (dist, _, i, j) = best.expect("two active clusters");
        for k in 0..n {
            if active[k] && k != i && k != j {
                let v = linkage.update(d[i][k], d[j][k], size[i], size[j]);
                d[i][k] = v;
                d[k][i] = v;
            }
        }
        let (a, b) = (node[i].min(node[j]), node[i].max(node[j]));
        active[j] = false;
        size[i] += size[j];
        key[i] = key[i].min(key[j]);
        node[i] = n + t;
        merges.push(Merge {
            a,
            b,
            distance: dist,
            node: n + t,
            size: size[i],
        });
    }
    Ok(Dendrogram {
        linkage: linkage.name().to_string(),
        leaves: labels.to_vec(),
        merges,
    })
}

/// Flat clustering into `k` groups by undoing the last `k - 1` merges.
/// Cluster ids follow the first leaf of each cluster.
pub fn cut(dendrogram: &Dendrogram, k: usize) -> Vec<usize> {
    let n = dendrogram.leaves.len();
    let k = k.clamp(1, n.max(1));
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for m in dendrogram.merges.iter().take(n - k) {
        let ra = find(&mut parent, m.a);
        let rb = find(&mut parent, m.b);
        parent[ra] = m.node;
        parent[rb] = m.node;
    }
    let mut ids = std::collections::BTreeMap::new();
    (0..n)
        .map(|leaf| {
            let root = find(&mut parent, leaf);
            let next = ids.len();
            *ids.entry(root).or_insert(next)
        })
        .collect()
}
