use crate::chem::perceive::{build_adj, default_hydrogens, kekulize};
use crate::chem::{Atom, Bond, BondOrder, Molecule};
use crate::error::Result;

/// Output options for [`write_smiles`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmilesDialect {
    /// Write alternating single/double bonds instead of lowercase aromatic atoms.
    pub kekulized_output: bool,
    /// Keep atom-map numbers in the output.
    pub include_maps: bool,
}

impl Default for SmilesDialect {
    fn default() -> Self {
        SmilesDialect {
            kekulized_output: false,
            include_maps: true,
        }
    }
}

/// Writes SMILES in input atom order (depth-first from atom 0, neighbors in
/// bond order). Use [`crate::chem::canonical_smiles`] for a canonical string.
pub fn write_smiles(mol: &Molecule, dialect: SmilesDialect) -> Result<String> {
    let ranks: Vec<usize> = (0..mol.atom_count()).collect();
    let opts = WriteOptions {
        dialect,
        bracket_all: false,
        sort_fragments: false,
    };
    Ok(write_ranked(mol, &ranks, opts)?.0)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct WriteOptions {
    pub dialect: SmilesDialect,
    /// Force every atom into brackets with an explicit hydrogen count.
    pub bracket_all: bool,
    /// Order fragments by their string instead of by root rank.
    pub sort_fragments: bool,
}

/// Writes `mol` traversing atoms by ascending `rank`. Returns the string and
/// the atom indices in output order.
pub(crate) fn write_ranked(
    mol: &Molecule,
    rank: &[usize],
    opts: WriteOptions,
) -> Result<(String, Vec<usize>)> {
    let n = mol.atom_count();
    let (atoms, bonds): (Vec<Atom>, Vec<Bond>) = if opts.dialect.kekulized_output {
        let adj = build_adj(n, mol.bonds());
        let k = kekulize(mol.atoms(), mol.bonds(), &adj)?;
        let atoms = mol
            .atoms()
            .iter()
            .map(|a| Atom {
                aromatic: false,
                ..a.clone()
            })
            .collect();
        (atoms, k)
    } else {
        (mol.atoms().to_vec(), mol.bonds().to_vec())
    };
    let adj = build_adj(n, &bonds);

    // Neighbor lists sorted by rank.
    let sorted_adj: Vec<Vec<(usize, usize)>> = adj
        .iter()
        .map(|l| {
            let mut l = l.clone();
            l.sort_by_key(|(w, _)| rank[*w]);
            l
        })
        .collect();

    let mut visited = vec![false; n];
    let mut frags: Vec<(usize, String, Vec<usize>)> = Vec::new();
    let mut roots: Vec<usize> = (0..n).collect();
    roots.sort_by_key(|&i| rank[i]);
    for root in roots {
        if visited[root] {
            continue;
        }
        let mut w = FragWriter {
            atoms: &atoms,
            bonds: &bonds,
            adj: &sorted_adj,

            opts,
            visited: &mut visited,
            out: String::new(),
            order: Vec::new(),
        };
        w.write(root);
        frags.push((rank[root], w.out, w.order));
    }
    if opts.sort_fragments {
        frags.sort_by(|a, b| a.1.cmp(&b.1));
    }
    let mut s = String::new();
    let mut order = Vec::new();
    for (k, (_, f, o)) in frags.into_iter().enumerate() {
        if k > 0 {
            s.push('.');
        }
        s.push_str(&f);
        order.extend(o);
    }
    Ok((s, order))
}

struct FragWriter<'a> {
    atoms: &'a [Atom],
    bonds: &'a [Bond],
    adj: &'a [Vec<(usize, usize)>],
    opts: WriteOptions,
    visited: &'a mut [bool],
    out: String,
    order: Vec<usize>,
}

impl FragWriter<'_> {
    fn write(&mut self, root: usize) {
        // Pass 1: DFS tree and ring-closure bonds.
        let n = self.atoms.len();
        let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut ring_open: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut ring_close: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut seen_bond = vec![false; self.bonds.len()];
        let mut dfs_order = Vec::new();
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        self.visited[root] = true;
        dfs_order.push(root);
        while let Some(&mut (u, ref mut pos)) = stack.last_mut() {
            if *pos >= self.adj[u].len() {
                stack.pop();
                continue;
            }
            let (v, b) = self.adj[u][*pos];
            *pos += 1;
            if seen_bond[b] {
                continue;
            }
            seen_bond[b] = true;
            if self.visited[v] {
                // v is an ancestor: ring opens at v, closes at u
                ring_open[v].push((u, b));
                ring_close[u].push((v, b));
            } else {
                self.visited[v] = true;
                dfs_order.push(v);
                children[u].push((v, b));
                stack.push((v, 0));
            }
        }
        let pos_in_order: std::collections::HashMap<usize, usize> =
            dfs_order.iter().enumerate().map(|(k, &a)| (a, k)).collect();
        for l in ring_open.iter_mut() {
            l.sort_by_key(|(w, _)| pos_in_order[w]);
        }
        // Pass 2: emission.
        let mut digit_of_bond = std::collections::HashMap::new();
        let mut free_digits: Vec<bool> = vec![true; 100];
        self.emit(root, None, &children, &ring_open, &ring_close, &mut digit_of_bond, &mut free_digits);
    }

    #[allow(clippy::too_many_arguments)]
    fn emit(
        &mut self,
        start: usize,
        start_bond: Option<usize>,
        children: &[Vec<(usize, usize)>],
        ring_open: &[Vec<(usize, usize)>],
        ring_close: &[Vec<(usize, usize)>],
        digits: &mut std::collections::HashMap<usize, usize>,
        free: &mut [bool],
    ) {
        // Iterative over the chain; branches recurse.
        let mut u = start;
        let mut in_bond = start_bond;
        loop {
            if let Some(b) = in_bond {
                let s = self.bond_symbol(b);
                self.out.push_str(s);
            }
            self.order.push(u);
            let text = self.atom_text(u);
            self.out.push_str(&text);
            let mut released = Vec::new();
            for &(_, b) in &ring_close[u] {
                let d = digits[&b];
                push_digit(&mut self.out, d);
                released.push(d);
            }
            for &(_, b) in &ring_open[u] {
                let d = (1..100).find(|d| free[*d]).expect("ring closure digits exhausted");
                free[d] = false;
                digits.insert(b, d);
                let s = self.bond_symbol(b);
                self.out.push_str(s);
                push_digit(&mut self.out, d);
            }
            for d in released {
                free[d] = true;
            }
            let kids = &children[u];
            if kids.is_empty() {
                return;
            }
            for &(v, b) in &kids[..kids.len() - 1] {
                self.out.push('(');
                self.emit(v, Some(b), children, ring_open, ring_close, digits, free);
                self.out.push(')');
            }
            let (v, b) = kids[kids.len() - 1];
            u = v;
            in_bond = Some(b);
        }
    }

    fn bond_symbol(&self, b: usize) -> &'static str {
        let bd = self.bonds[b];
        let both_arom = self.atoms[bd.a].aromatic && self.atoms[bd.b].aromatic;
        match bd.order {
            BondOrder::Single if both_arom => "-",
            BondOrder::Single => "",
            BondOrder::Double => "=",
            BondOrder::Triple => "#",
            BondOrder::Aromatic if both_arom => "",
            BondOrder::Aromatic => ":",
        }
    }

    fn atom_text(&self, i: usize) -> String {
        let a = &self.atoms[i];
        let bond_sum: u32 = self.adj[i]
            .iter()
            .map(|(_, b)| self.bonds[*b].order.valence())
            .sum();
        let map = if self.opts.dialect.include_maps { a.map } else { None };
        atom_token(a, bond_sum, map, self.opts.bracket_all && !a.is_dummy())
    }
}

fn push_digit(out: &mut String, d: usize) {
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        out.push('%');
        out.push_str(&format!("{d:02}"));
    }
}

pub(crate) fn atom_token(a: &Atom, bond_sum: u32, map: Option<u32>, force_bracket: bool) -> String {
    let bare_ok = !force_bracket
        && a.element.is_organic_subset()
        && a.charge == 0
        && a.isotope.is_none()
        && map.is_none()
        && (a.is_dummy()
            || default_hydrogens(a.element, a.aromatic, 0, bond_sum) == Some(a.hydrogens));
    let sym = if a.aromatic {
        a.element.symbol().to_ascii_lowercase()
    } else {
        a.element.symbol().to_string()
    };
    if bare_ok {
        return sym;
    }
    let mut s = String::from("[");
    if let Some(iso) = a.isotope {
        s.push_str(&iso.to_string());
    }
    s.push_str(&sym);
    if a.hydrogens > 0 {
        s.push('H');
        if a.hydrogens > 1 {
            s.push_str(&a.hydrogens.to_string());
        }
    }
    match a.charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c if c > 0 => s.push_str(&format!("+{c}")),
        c => s.push_str(&format!("-{}", -c)),
    }
    if let Some(m) = map {
        s.push(':');
        s.push_str(&m.to_string());
    }
    s.push(']');
    s
}
