//! Maximum spanning arborescence with a virtual root of out-degree one.
//!
//! Classic recursive contraction: pick the best incoming edge per node,
//! contract any cycle, solve the smaller problem, expand. The virtual
//! root's out-degree constraint is enforced by solving once per forced
//! root edge and keeping the best.

/// Computes the maximum-score arborescence over tokens `1..=n` rooted at
/// the virtual node `0`, with exactly one edge leaving `0`.
///
/// `score(i, k)` is the weight of the edge `i -> k` (`i` in `0..=n`, `k` in
/// `1..=n`); minus infinity marks an absent edge. Returns the parent array
/// indexed by token (entry 0 unused), or `None` when no spanning
/// arborescence of finite score exists.
pub fn cle_arborescence(n: usize, score: impl Fn(usize, usize) -> f64) -> Option<Vec<usize>> {
    cle_arborescence_rooted(n, score, |_| true)
}

/// Like [`cle_arborescence`], but only tokens satisfying `allowed_root`
/// may take the virtual root's single edge. Decoders use this to keep
/// tokens without any content supertag from heading the sentence.
pub(crate) fn cle_arborescence_rooted(
    n: usize,
    score: impl Fn(usize, usize) -> f64,
    allowed_root: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    if n == 0 {
        return None;
    }
    let mut inner_edges: Vec<(usize, usize, f64)> = Vec::new();
    for i in 1..=n {
        for k in 1..=n {
            if i != k {
                let w = score(i, k);
                if w.is_finite() {
                    inner_edges.push((i, k, w));
                }
            }
        }
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for r in 1..=n {
        if !allowed_root(r) {
            continue;
        }
        let root_w = score(0, r);
        if !root_w.is_finite() {
            continue;
        }
        let mut edges = vec![(0usize, r, root_w)];
        edges.extend(inner_edges.iter().copied());
        if let Some((total, chosen)) = solve(n + 1, 0, &edges) {
            let mut parent = vec![0usize; n + 1];
            for idx in chosen {
                let (u, v, _) = edges[idx];
                parent[v] = u;
            }
            let better = match &best {
                Some((bt, _)) => total > *bt,
                None => true,
            };
            if better {
                best = Some((total, parent));
            }
        }
    }
    best.map(|(_, parent)| parent)
}

/// Maximum arborescence rooted at `root` over nodes `0..num_nodes`.
/// Returns the total weight and the indexes of chosen edges.
fn solve(num_nodes: usize, root: usize, edges: &[(usize, usize, f64)]) -> Option<(f64, Vec<usize>)> {
    // Best incoming edge per non-root node; ties keep the first listed.
    let mut best_in: Vec<Option<usize>> = vec![None; num_nodes];
    for (idx, &(_, v, w)) in edges.iter().enumerate() {
        if v == root {
            continue;
        }
        match best_in[v] {
            Some(cur) if edges[cur].2 >= w => {}
            _ => best_in[v] = Some(idx),
        }
    }
    for v in 0..num_nodes {
        if v != root && best_in[v].is_none() {
            return None;
        }
    }

    // Look for a cycle in the best-incoming functional graph.
    let mut mark = vec![usize::MAX; num_nodes];
    let mut cycle: Option<Vec<usize>> = None;
    for start in 0..num_nodes {
        if mark[start] != usize::MAX {
            continue;
        }
        let mut u = start;
        while u != root && mark[u] == usize::MAX {
            mark[u] = start;
            u = edges[best_in[u].unwrap()].0;
        }
        if u != root && mark[u] == start {
            // Walk the cycle.
            let mut c = vec![u];
            let mut x = edges[best_in[u].unwrap()].0;
            while x != u {
                c.push(x);
                x = edges[best_in[x].unwrap()].0;
            }
            cycle = Some(c);
            break;
        }
    }

    let Some(cycle) = cycle else {
        let chosen: Vec<usize> = (0..num_nodes)
            .filter(|&v| v != root)
            .map(|v| best_in[v].unwrap())
            .collect();
        let total = chosen.iter().map(|&i| edges[i].2).sum();
        return Some((total, chosen));
    };

    // Contract the cycle into one supernode.
    let in_cycle = {
        let mut f = vec![false; num_nodes];
        for &v in &cycle {
            f[v] = true;
        }
        f
    };
    let mut map = vec![usize::MAX; num_nodes];
    let mut next = 0usize;
    for v in 0..num_nodes {
        if !in_cycle[v] {
            map[v] = next;
            next += 1;
        }
    }
    let super_node = next;
    for v in 0..num_nodes {
        if in_cycle[v] {
            map[v] = super_node;
        }
    }

    let mut sub_edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut back: Vec<usize> = Vec::new();
    for (idx, &(u, v, w)) in edges.iter().enumerate() {
        let (mu, mv) = (map[u], map[v]);
        if mu == mv {
            continue;
        }
        let w2 = if in_cycle[v] {
            w - edges[best_in[v].unwrap()].2
        } else {
            w
        };
        sub_edges.push((mu, mv, w2));
        back.push(idx);
    }

    let (sub_total, sub_chosen) = solve(super_node + 1, map[root], &sub_edges)?;

    let mut chosen: Vec<usize> = Vec::new();
    let mut entry_node = None;
    for c in sub_chosen {
        let orig = back[c];
        chosen.push(orig);
        let (_, v, _) = edges[orig];
        if in_cycle[v] {
            entry_node = Some(v);
        }
    }
    let entry = entry_node.expect("exactly one chosen edge enters the contracted cycle");
    let mut total = sub_total;
    for &v in &cycle {
        total += edges[best_in[v].unwrap()].2;
        if v != entry {
            chosen.push(best_in[v].unwrap());
        }
    }
    Some((total, chosen))
}
