//! Fill-reducing elimination ordering.
//!
//! Recursive nested dissection with BFS level-set separators on the
//! symmetrized sparsity graph. Rows/columns that are nearly dense (the
//! zero-mean multiplier, typically) are postponed to the very end, where
//! their fill-in is confined to their own row and column.

use crate::sparse::CsrMatrix;
use crate::Real;

pub fn fill_reducing_ordering<T: Real>(matrix: &CsrMatrix<T>) -> Vec<usize> {
    let n = matrix.n_rows();
    if n == 0 {
        return Vec::new();
    }
    // adjacency of pattern(M + M^T), self-loops dropped
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for r in 0..n {
        let (cols, _) = matrix.row(r);
        for &c in cols {
            if c != r {
                adj[r].push(c as u32);
                adj[c].push(r as u32);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let dense_threshold = 16.max(n / 8);
    let mut dense: Vec<usize> = Vec::new();
    let mut skip = vec![false; n];
    for v in 0..n {
        if adj[v].len() >= dense_threshold {
            dense.push(v);
            skip[v] = true;
        }
    }

    let mut ctx = Dissection {
        adj: &adj,
        skip,
        stamp: vec![0u32; n],
        level: vec![0u32; n],
        epoch: 0,
        order: Vec::with_capacity(n),
    };
    let sparse_nodes: Vec<u32> = (0..n as u32).filter(|&v| !ctx.skip[v as usize]).collect();
    ctx.order_set(&sparse_nodes);
    let mut order = ctx.order;
    order.extend(dense.iter().map(|&v| v as u32));
    debug_assert_eq!(order.len(), n);
    order.into_iter().map(|v| v as usize).collect()
}

struct Dissection<'a> {
    adj: &'a [Vec<u32>],
    skip: Vec<bool>,
    stamp: Vec<u32>,
    level: Vec<u32>,
    epoch: u32,
    order: Vec<u32>,
}

impl Dissection<'_> {
    /// Orders a vertex set (not necessarily connected).
    fn order_set(&mut self, nodes: &[u32]) {
        if nodes.is_empty() {
            return;
        }
        self.epoch += 1;
        let epoch = self.epoch;
        let mut in_set = std::collections::HashSet::with_capacity(nodes.len());
        for &v in nodes {
            in_set.insert(v);
        }
        let mut seen = std::collections::HashSet::with_capacity(nodes.len());
        let _ = epoch;
        for &start in nodes {
            if seen.contains(&start) {
                continue;
            }
            // connected component restricted to the set
            let mut component = vec![start];
            seen.insert(start);
            let mut head = 0;
            while head < component.len() {
                let v = component[head];
                head += 1;
                for &w in &self.adj[v as usize] {
                    if in_set.contains(&w) && !seen.contains(&w) {
                        seen.insert(w);
                        component.push(w);
                    }
                }
            }
            component.sort_unstable();
            self.order_component(&component);
        }
    }

    /// Orders one connected component: separator last, halves first.
    fn order_component(&mut self, nodes: &[u32]) {
        const LEAF: usize = 48;
        if nodes.len() <= LEAF {
            self.order.extend_from_slice(nodes);
            return;
        }
        let in_component: std::collections::HashSet<u32> = nodes.iter().copied().collect();

        // pseudo-peripheral root: BFS twice
        let root = self.bfs_levels(nodes[0], &in_component).0;
        let (_, max_level) = self.bfs_levels(root, &in_component);
        if max_level < 2 {
            self.order.extend_from_slice(nodes);
            return;
        }
        // self.level now holds distances from `root`; choose a median level
        let mut level_count = vec![0usize; max_level as usize + 1];
        for &v in nodes {
            level_count[self.level[v as usize] as usize] += 1;
        }
        let half = nodes.len() / 2;
        let mut cum = 0usize;
        let mut sep_level = 1u32;
        for (l, &count) in level_count.iter().enumerate() {
            cum += count;
            if cum >= half && l >= 1 {
                sep_level = l as u32;
                break;
            }
        }
        if sep_level as usize >= max_level as usize {
            sep_level = max_level - 1;
        }

        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut separator = Vec::new();
        for &v in nodes {
            let l = self.level[v as usize];
            if l < sep_level {
                lower.push(v);
            } else if l > sep_level {
                upper.push(v);
            } else {
                separator.push(v);
            }
        }
        if lower.is_empty() || upper.is_empty() {
            // degenerate split, fall back to flat order
            self.order.extend_from_slice(nodes);
            return;
        }
        self.order_set(&lower);
        self.order_set(&upper);
        self.order.extend_from_slice(&separator);
    }

    /// BFS within the component; records levels, returns (farthest node,
    /// eccentricity).
    fn bfs_levels(&mut self, root: u32, in_component: &std::collections::HashSet<u32>) -> (u32, u32) {
        self.epoch += 1;
        let epoch = self.epoch;
        let mut queue = vec![root];
        self.stamp[root as usize] = epoch;
        self.level[root as usize] = 0;
        let mut head = 0;
        let mut last = root;
        let mut max_level = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            let lv = self.level[v as usize];
            for &w in &self.adj[v as usize] {
                if in_component.contains(&w) && self.stamp[w as usize] != epoch {
                    self.stamp[w as usize] = epoch;
                    self.level[w as usize] = lv + 1;
                    if lv + 1 > max_level {
                        max_level = lv + 1;
                        last = w;
                    }
                    queue.push(w);
                }
            }
        }
        (last, max_level)
    }
}
