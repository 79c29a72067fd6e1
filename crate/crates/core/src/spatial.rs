//! Uniform-grid spatial hash and a disjoint-set forest.

use std::collections::HashMap;

use crate::semialg::dist;

/// Buckets points by the cube of side `cell` containing them.
pub(crate) struct GridIndex<'a> {
    points: &'a [Vec<f64>],
    cell: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl<'a> GridIndex<'a> {
    pub(crate) fn new(points: &'a [Vec<f64>], cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "cell must be positive");
        let dim = points.first().map_or(0, Vec::len);
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        let mut lo = vec![i64::MAX; dim];
        let mut hi = vec![i64::MIN; dim];
        for (i, p) in points.iter().enumerate() {
            let k = key(p, cell);
            for d in 0..dim {
                lo[d] = lo[d].min(k[d]);
                hi[d] = hi[d].max(k[d]);
            }
            buckets.entry(k).or_default().push(i);
        }
        Self {
            points,
            cell,
            buckets,
            lo,
            hi,
        }
    }

    /// Calls `visit` on every bucket whose offset from `center` has
    /// Chebyshev length exactly `ring`.
    fn for_ring(&self, center: &[i64], ring: i64, visit: &mut dyn FnMut(&[usize])) {
        let dim = center.len();
        let mut off = vec![-ring; dim];
        let mut k = vec![0i64; dim];
        loop {
            if off.iter().any(|o| o.abs() == ring) {
                for d in 0..dim {
                    k[d] = center[d] + off[d];
                }
                if let Some(b) = self.buckets.get(&k) {
                    visit(b);
                }
            }
            let mut d = 0;
            loop {
                if d == dim {
                    return;
                }
                off[d] += 1;
                if off[d] <= ring {
                    break;
                }
                off[d] = -ring;
                d += 1;
            }
        }
    }

    /// Largest ring that can still hold points, seen from `center`.
    fn max_ring(&self, center: &[i64]) -> i64 {
        (0..center.len())
            .map(|d| (center[d] - self.lo[d]).abs().max((self.hi[d] - center[d]).abs()))
            .max()
            .unwrap_or(0)
    }

    /// Indices within distance `r` of `p`, ascending.
    pub(crate) fn within(&self, p: &[f64], r: f64) -> Vec<usize> {
        let c = key(p, self.cell);
        let reach = ((r / self.cell).ceil() as i64).min(self.max_ring(&c));
        let mut out = Vec::new();
        for ring in 0..=reach {
            self.for_ring(&c, ring, &mut |b| {
                out.extend(b.iter().copied().filter(|&i| dist(&self.points[i], p) <= r))
            });
        }
        out.sort_unstable();
        out
    }

    /// Nearest indexed point to `p` other than `skip`; ties go to the lower
    /// index.
    pub(crate) fn nearest(&self, p: &[f64], skip: Option<usize>) -> Option<(usize, f64)> {
        let c = key(p, self.cell);
        let last = self.max_ring(&c);
        let mut best: Option<(usize, f64)> = None;
        for ring in 0..=last {
            self.for_ring(&c, ring, &mut |b| {
                for &i in b {
                    if Some(i) == skip {
                        continue;
                    }
                    let d = dist(&self.points[i], p);
                    let better = match best {
                        None => true,
                        Some((j, bd)) => d < bd || (d == bd && i < j),
                    };
                    if better {
                        best = Some((i, d));
                    }
                }
            });
            if let Some((_, d)) = best {
                if d <= ring as f64 * self.cell {
                    break;
                }
            }
        }
        best
    }
}

fn key(p: &[f64], cell: f64) -> Vec<i64> {
    p.iter().map(|v| (v / cell).floor() as i64).collect()
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    /// The classes as sorted index lists, ordered by smallest member.
    pub(crate) fn groups(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: HashMap<usize, usize> = HashMap::new();
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.parent.len() {
            let r = self.find(i);
            let slot = *by_root.entry(r).or_insert_with(|| {
                out.push(Vec::new());
                out.len() - 1
            });
            out[slot].push(i);
        }
        out
    }
}

/// Single-linkage clusters of `points` at linking radius `eps`.
pub(crate) fn link_clusters(points: &[Vec<f64>], eps: f64) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(points.len());
    if points.is_empty() {
        return Vec::new();
    }
    let index = GridIndex::new(points, eps);
    for (i, p) in points.iter().enumerate() {
        for j in index.within(p, eps) {
            if j > i {
                uf.union(i, j);
            }
        }
    }
    uf.groups()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_nearest(points: &[Vec<f64>], p: &[f64], skip: usize) -> f64 {
        points
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, q)| dist(p, q))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn nearest_matches_brute_force() {
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|i| {
                let t = i as f64;
                vec![(t * 0.37).sin() * 3.0, (t * 1.31).cos() * 0.5]
            })
            .collect();
        let index = GridIndex::new(&pts, 0.05);
        for (i, p) in pts.iter().enumerate() {
            let (_, d) = index.nearest(p, Some(i)).unwrap();
            assert_eq!(d, brute_nearest(&pts, p, i));
        }
    }

    #[test]
    fn within_is_exact() {
        let pts: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 * 0.1]).collect();
        let index = GridIndex::new(&pts, 0.25);
        assert_eq!(index.within(&[1.0], 0.15), vec![9, 10, 11]);
    }

    #[test]
    fn union_find_groups() {
        let mut uf = UnionFind::new(6);
        uf.union(0, 3);
        uf.union(4, 5);
        uf.union(3, 4);
        assert_eq!(uf.groups(), vec![vec![0, 3, 4, 5], vec![1], vec![2]]);
    }

    #[test]
    fn linking_chains_points() {
        let pts = vec![vec![0.0], vec![0.9], vec![1.8], vec![5.0]];
        assert_eq!(link_clusters(&pts, 1.0), vec![vec![0, 1, 2], vec![3]]);
    }

    proptest::proptest! {
        #[test]
        fn clusters_partition_and_respect_links(
            pts in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 2), 1..60),
            eps in 0.01f64..0.5,
        ) {
            let groups = link_clusters(&pts, eps);
            let mut seen: Vec<usize> = groups.iter().flatten().copied().collect();
            seen.sort_unstable();
            proptest::prop_assert_eq!(seen, (0..pts.len()).collect::<Vec<_>>());
            let mut label = vec![0; pts.len()];
            for (g, members) in groups.iter().enumerate() {
                for &i in members {
                    label[i] = g;
                }
            }
            for i in 0..pts.len() {
                for j in 0..i {
                    let d = ((pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2)).sqrt();
                    if d <= eps {
                        proptest::prop_assert_eq!(label[i], label[j]);
                    }
                }
            }
        }
    }
}
