use super::Pattern;
use crate::chem::Molecule;

/// One embedding: `atoms[q]` is the molecule atom matched by query atom `q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Match {
    pub atoms: Vec<usize>,
}

impl Match {
    /// Molecule atom matched by the query atom carrying `map`.
    pub fn atom_for_map(&self, pat: &Pattern, map: u32) -> Option<usize> {
        pat.atoms
            .iter()
            .position(|a| a.map == Some(map))
            .map(|q| self.atoms[q])
    }

    pub fn atom_set(&self) -> Vec<usize> {
        let mut v = self.atoms.clone();
        v.sort_unstable();
        v
    }
}

/// Every embedding of `pat` in `mol`, sorted lexicographically.
pub fn find_embeddings(mol: &Molecule, pat: &Pattern) -> Vec<Match> {
    let n = pat.len();
    if n == 0 || n > mol.atom_count() {
        return Vec::new();
    }
    let cand: Vec<Vec<bool>> = pat
        .atoms
        .iter()
        .map(|q| (0..mol.atom_count()).map(|i| q.matches(mol, i)).collect())
        .collect();
    let count: Vec<usize> = cand.iter().map(|c| c.iter().filter(|&&x| x).count()).collect();
    if count.contains(&0) {
        return Vec::new();
    }
    let order = search_order(pat, &count);
    let mut state = State {
        mol,
        pat,
        cand: &cand,
        order: &order,
        map: vec![usize::MAX; n],
        used: vec![false; mol.atom_count()],
        out: Vec::new(),
    };
    state.extend(0);
    let mut out = state.out;
    out.sort();
    out
}

/// Embeddings deduplicated by matched atom set, keeping the lexicographically
/// first embedding of each set.
pub fn find_matches(mol: &Molecule, pat: &Pattern) -> Vec<Match> {
    let mut seen = std::collections::HashSet::new();
    find_embeddings(mol, pat)
        .into_iter()
        .filter(|m| seen.insert(m.atom_set()))
        .collect()
}

/// Checks a proposed embedding directly against the query.
pub fn verify_match(mol: &Molecule, pat: &Pattern, m: &Match) -> bool {
    if m.atoms.len() != pat.len() {
        return false;
    }
    let mut used = std::collections::HashSet::new();
    for (q, &i) in m.atoms.iter().enumerate() {
        if i >= mol.atom_count() || !used.insert(i) || !pat.atoms[q].matches(mol, i) {
            return false;
        }
    }
    pat.bonds.iter().all(|b| {
        mol.bond_between(m.atoms[b.a], m.atoms[b.b])
            .is_some_and(|k| b.query.matches(mol.bond(k).order))
    })
}

/// Query atoms ordered rarest first, each later atom adjacent to an earlier one.
fn search_order(pat: &Pattern, count: &[usize]) -> Vec<usize> {
    let n = pat.len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let key = |q: usize| (pat.atoms[q].is_wildcard(), count[q], q);
    while order.len() < n {
        let frontier: Vec<usize> = (0..n)
            .filter(|&q| !placed[q])
            .filter(|&q| order.is_empty() || pat.neighbors(q).iter().any(|&(o, _)| placed[o]))
            .collect();
        // a disconnected remainder starts a new component
        let pool = if frontier.is_empty() {
            (0..n).filter(|&q| !placed[q]).collect()
        } else {
            frontier
        };
        let next = pool.into_iter().min_by_key(|&q| key(q)).unwrap();
        placed[next] = true;
        order.push(next);
    }
    order
}

struct State<'a> {
    mol: &'a Molecule,
    pat: &'a Pattern,
    cand: &'a [Vec<bool>],
    order: &'a [usize],
    map: Vec<usize>,
    used: Vec<bool>,
    out: Vec<Match>,
}

impl State<'_> {
    fn extend(&mut self, depth: usize) {
        if depth == self.order.len() {
            self.out.push(Match {
                atoms: self.map.clone(),
            });
            return;
        }
        let q = self.order[depth];
        let anchor = self
            .pat
            .neighbors(q)
            .iter()
            .find(|&&(o, _)| self.map[o] != usize::MAX)
            .map(|&(o, _)| self.map[o]);
        let candidates: Vec<usize> = match anchor {
            Some(a) => self.mol.neighbors(a).iter().map(|&(nb, _)| nb).collect(),
            None => (0..self.mol.atom_count()).collect(),
        };
        for i in candidates {
            if self.used[i] || !self.cand[q][i] || !self.bonds_ok(q, i) {
                continue;
            }
            self.map[q] = i;
            self.used[i] = true;
            self.extend(depth + 1);
            self.used[i] = false;
            self.map[q] = usize::MAX;
        }
    }

    fn bonds_ok(&self, q: usize, i: usize) -> bool {
        self.pat.neighbors(q).iter().all(|&(o, k)| {
            let j = self.map[o];
            j == usize::MAX
                || self
                    .mol
                    .bond_between(i, j)
                    .is_some_and(|b| self.pat.bonds[k].query.matches(self.mol.bond(b).order))
        })
    }
}
