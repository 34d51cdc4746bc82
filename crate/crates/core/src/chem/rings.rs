//! Ring perception: ring-bond detection and a minimum cycle basis.

use super::mol::Bond;
use std::collections::VecDeque;

/// Marks bonds that lie on at least one cycle (non-bridges).
pub(crate) fn ring_bonds(n: usize, bonds: &[Bond], adj: &[Vec<(usize, usize)>]) -> Vec<bool> {
    // Iterative Tarjan bridge finding.
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; bonds.len()];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (atom, parent bond, next neighbor position)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (u, pb, ref mut pos)) = stack.last_mut() {
            if *pos < adj[u].len() {
                let (v, b) = adj[u][*pos];
                *pos += 1;
                if b == pb {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, b, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        is_bridge[pb] = true;
                    }
                }
            }
        }
    }
    is_bridge.iter().map(|b| !b).collect()
}

/// Minimum cycle basis from Horton candidates, ordered by size then atoms.
/// Each ring is returned as an atom cycle.
pub(crate) fn sssr(
    n: usize,
    bonds: &[Bond],
    adj: &[Vec<(usize, usize)>],
    in_ring: &[bool],
) -> Vec<Vec<usize>> {
    let ring_bond_ids: Vec<usize> = (0..bonds.len()).filter(|&b| in_ring[b]).collect();
    if ring_bond_ids.is_empty() {
        return Vec::new();
    }
    let mut slot = vec![usize::MAX; bonds.len()];
    for (k, &b) in ring_bond_ids.iter().enumerate() {
        slot[b] = k;
    }
    let mut ring_atom = vec![false; n];
    for &b in &ring_bond_ids {
        ring_atom[bonds[b].a] = true;
        ring_atom[bonds[b].b] = true;
    }
    let n_ring_atoms = ring_atom.iter().filter(|x| **x).count();
    let n_comp = {
        let mut seen = vec![false; n];
        let mut c = 0;
        for s in 0..n {
            if !ring_atom[s] || seen[s] {
                continue;
            }
            c += 1;
            seen[s] = true;
            let mut q = vec![s];
            while let Some(u) = q.pop() {
                for &(v, b) in &adj[u] {
                    if in_ring[b] && !seen[v] {
                        seen[v] = true;
                        q.push(v);
                    }
                }
            }
        }
        c
    };
    let target = ring_bond_ids.len() + n_comp - n_ring_atoms;
    let words = ring_bond_ids.len().div_ceil(64);

    struct Cand {
        atoms: Vec<usize>,
        bits: Vec<u64>,
        key: Vec<usize>,
    }
    let mut cands: Vec<Cand> = Vec::new();
    let mut seen_keys = std::collections::HashSet::new();

    for v in 0..n {
        if !ring_atom[v] {
            continue;
        }
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![(usize::MAX, usize::MAX); n];
        dist[v] = 0;
        let mut q = VecDeque::from([v]);
        while let Some(u) = q.pop_front() {
            for &(w, b) in &adj[u] {
                if in_ring[b] && dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = (u, b);
                    q.push_back(w);
                }
            }
        }
        let path = |mut x: usize| -> (Vec<usize>, Vec<usize>) {
            let mut atoms = vec![x];
            let mut bs = Vec::new();
            while x != v {
                let (p, b) = parent[x];
                bs.push(b);
                atoms.push(p);
                x = p;
            }
            (atoms, bs)
        };
        for &b in &ring_bond_ids {
            let (x, y) = (bonds[b].a, bonds[b].b);
            if dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            if parent[x].1 == b || parent[y].1 == b {
                continue;
            }
            let (px, bx) = path(x);
            let (py, by) = path(y);
            // paths must only share v
            let shared = px.iter().filter(|a| py.contains(a)).count();
            if shared != 1 {
                continue;
            }
            let mut atoms = px.clone();
            atoms.extend(py.iter().copied());
            let mut bits = vec![0u64; words];
            for &bb in bx.iter().chain(by.iter()).chain(std::iter::once(&b)) {
                let k = slot[bb];
                bits[k / 64] |= 1 << (k % 64);
            }
            let mut key: Vec<usize> = bx.iter().chain(by.iter()).copied().collect();
            key.push(b);
            key.sort_unstable();
            if seen_keys.insert(key.clone()) {
                cands.push(Cand { atoms, bits, key });
            }
        }
    }
    cands.sort_by(|a, b| a.key.len().cmp(&b.key.len()).then_with(|| a.key.cmp(&b.key)));

    // GF(2) elimination; rows kept with their pivot bit.
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut rings = Vec::new();
    for c in cands {
        if rings.len() == target {
            break;
        }
        let mut v = c.bits.clone();
        for (pivot, row) in &basis {
            if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (x, r) in v.iter_mut().zip(row) {
                    *x ^= r;
                }
            }
        }
        let pivot = v
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize);
        if let Some(p) = pivot {
            // keep rows reduced w.r.t. the new pivot
            for (_, row) in basis.iter_mut() {
                if row[p / 64] >> (p % 64) & 1 == 1 {
                    for (x, r) in row.iter_mut().zip(&v) {
                        *x ^= r;
                    }
                }
            }
            basis.push((p, v));
            rings.push(order_cycle(&c.atoms, adj, &c.key));
        }
    }
    rings
}

/// Walks the cycle defined by `bond_ids` to produce atoms in ring order.
fn order_cycle(atoms: &[usize], adj: &[Vec<(usize, usize)>], bond_ids: &[usize]) -> Vec<usize> {
    let start = *atoms.iter().min().unwrap();
    let mut out = vec![start];
    let mut prev_bond = usize::MAX;
    let mut cur = start;
    loop {
        let next = adj[cur]
            .iter()
            .filter(|(_, b)| *b != prev_bond && bond_ids.binary_search(b).is_ok())
            .min_by_key(|(w, _)| *w)
            .copied();
        let Some((w, b)) = next else { break };
        if w == start {
            break;
        }
        out.push(w);
        prev_bond = b;
        cur = w;
        if out.len() > bond_ids.len() {
            break;
        }
    }
    out
}
