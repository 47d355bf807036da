//! Smallest set of smallest rings, computed as a minimum cycle basis.
//!
//! Candidate cycles come from breadth-first shortest-path trees rooted at
//! every atom (Horton's construction); the basis is selected greedily by
//! ascending cycle size with GF(2) independence over bond incidence
//! vectors. Ties break deterministically on the lowest atom index.

use super::Molecule;
use std::collections::VecDeque;

/// Edge-set bitmask over bond indices.
#[derive(Clone, PartialEq, Eq)]
struct EdgeSet {
    words: Vec<u64>,
}

impl EdgeSet {
    fn new(nbonds: usize) -> Self {
        EdgeSet { words: vec![0; nbonds.div_ceil(64)] }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn xor(&mut self, other: &EdgeSet) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    fn leading_bit(&self) -> Option<usize> {
        for (wi, w) in self.words.iter().enumerate() {
            if *w != 0 {
                return Some(wi * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }
}

/// Compute the SSSR as ordered atom cycles. Deterministic for a given
/// molecule regardless of construction history.
pub(crate) fn sssr(m: &Molecule) -> Vec<Vec<usize>> {
    let n = m.atoms.len();
    let adj = m.adjacency();

    let components = count_components(n, &adj);
    let cyclomatic = m.bonds.len() + components;
    let cyclomatic = cyclomatic.saturating_sub(n);
    if cyclomatic == 0 {
        return Vec::new();
    }

    // Horton candidates: for every root r and every bond (x, y), the cycle
    // formed by the shortest paths r..x and r..y plus the bond itself,
    // admitted when the two paths share only the root.
    let mut candidates: Vec<(usize, Vec<usize>, EdgeSet)> = Vec::new();
    let mut seen: std::collections::HashSet<Vec<u64>> = std::collections::HashSet::new();

    for root in 0..n {
        let (dist, parent, parent_bond) = bfs(root, n, &adj);
        for (bi, bond) in m.bonds.iter().enumerate() {
            let (x, y) = (bond.a, bond.b);
            if dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            let px = path_to_root(x, &parent);
            let py = path_to_root(y, &parent);
            if !disjoint_except_root(&px, &py, root) {
                continue;
            }
            let mut edges = EdgeSet::new(m.bonds.len());
            let mut atoms: Vec<usize> = Vec::new();
            for node in px.iter().chain(py.iter()) {
                if !atoms.contains(node) {
                    atoms.push(*node);
                }
            }
            let mut ok = true;
            for node in px.iter().chain(py.iter()) {
                if *node != root {
                    let pb = parent_bond[*node];
                    if pb == usize::MAX {
                        ok = false;
                        break;
                    }
                    edges.set(pb);
                }
            }
            if !ok {
                continue;
            }
            edges.set(bi);
            // A simple cycle touches as many edges as atoms.
            let edge_count = edges.words.iter().map(|w| w.count_ones() as usize).sum::<usize>();
            if edge_count != atoms.len() {
                continue;
            }
            if seen.insert(edges.words.clone()) {
                candidates.push((atoms.len(), atoms, edges));
            }
        }
    }

    candidates.sort_by(|a, b| {
        a.0.cmp(&b.0).then_with(|| {
            let mut ka = a.1.clone();
            let mut kb = b.1.clone();
            ka.sort_unstable();
            kb.sort_unstable();
            ka.cmp(&kb)
        })
    });

    // Greedy GF(2) independence.
    let mut basis: Vec<EdgeSet> = Vec::new();
    let mut chosen: Vec<Vec<usize>> = Vec::new();
    for (_, atoms, edges) in candidates {
        if chosen.len() == cyclomatic {
            break;
        }
        let mut reduced = edges.clone();
        loop {
            let before = reduced.words.clone();
            for row in &basis {
                if let (Some(lead_row), Some(lead)) = (row.leading_bit(), reduced.leading_bit()) {
                    if lead_row == lead {
                        reduced.xor(row);
                    }
                }
            }
            if reduced.words == before {
                break;
            }
        }
        if reduced.is_zero() {
            continue;
        }
        basis.push(reduced);
        basis.sort_by_key(|r| r.leading_bit());
        chosen.push(order_ring(&atoms, &edges, m));
    }

    chosen
}

fn count_components(n: usize, adj: &[Vec<(usize, usize)>]) -> usize {
    let mut seen = vec![false; n];
    let mut count = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        count += 1;
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    count
}

fn bfs(root: usize, n: usize, adj: &[Vec<(usize, usize)>]) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut parent_bond = vec![usize::MAX; n];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        // Deterministic expansion: neighbors in ascending atom order.
        let mut nbrs = adj[u].clone();
        nbrs.sort_unstable();
        for (v, bi) in nbrs {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                parent[v] = u;
                parent_bond[v] = bi;
                queue.push_back(v);
            }
        }
    }
    (dist, parent, parent_bond)
}

fn path_to_root(mut node: usize, parent: &[usize]) -> Vec<usize> {
    let mut path = vec![node];
    while parent[node] != usize::MAX {
        node = parent[node];
        path.push(node);
    }
    path
}

fn disjoint_except_root(px: &[usize], py: &[usize], root: usize) -> bool {
    for a in px {
        if *a != root && py.contains(a) {
            return false;
        }
    }
    true
}

/// Order a ring's atoms into a traversal cycle, starting from its lowest
/// atom index and stepping first toward the lower-indexed neighbor.
fn order_ring(atoms: &[usize], edges: &EdgeSet, m: &Molecule) -> Vec<usize> {
    let in_ring = |bi: usize| edges.words[bi / 64] & (1 << (bi % 64)) != 0;
    let start = *atoms.iter().min().expect("ring is nonempty");
    let mut ring_adj: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
    for (bi, bond) in m.bonds.iter().enumerate() {
        if in_ring(bi) {
            ring_adj.entry(bond.a).or_default().push(bond.b);
            ring_adj.entry(bond.b).or_default().push(bond.a);
        }
    }
    for nbrs in ring_adj.values_mut() {
        nbrs.sort_unstable();
    }
    let mut ordered = vec![start];
    let mut prev = usize::MAX;
    let mut current = start;
    loop {
        let next = ring_adj[&current]
            .iter()
            .copied()
            .find(|&v| v != prev)
            .expect("ring atoms have two ring neighbors");
        if next == start {
            break;
        }
        ordered.push(next);
        prev = current;
        current = next;
    }
    ordered
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_to_mol;

    fn rings_of(s: &str) -> Vec<Vec<usize>> {
        let m = parse_to_mol(s).unwrap();
        sssr(&m)
    }

    #[test]
    fn chains_have_no_rings() {
        assert!(rings_of("CCCCC").is_empty());
        assert!(rings_of("CC(C)(C)C").is_empty());
    }

    #[test]
    fn single_rings_come_back_whole() {
        let rings = rings_of("C1CCCCC1");
        assert_eq!(rings.len(), 1);
        assert_eq!(rings[0].len(), 6);
        assert_eq!(rings[0][0], 0, "ring starts at its lowest atom index");
    }

    #[test]
    fn fused_bicyclics_give_two_smallest_rings() {
        // Naphthalene skeleton: two six-rings, not a six plus a ten.
        let rings = rings_of("C1CCC2CCCCC2C1");
        assert_eq!(rings.len(), 2);
        assert!(rings.iter().all(|r| r.len() == 6), "{rings:?}");
    }

    #[test]
    fn spiro_rings_are_separate() {
        let rings = rings_of("C1CCC2(CC1)CCCCC2");
        assert_eq!(rings.len(), 2);
    }

    #[test]
    fn bridged_systems_count_correctly() {
        // Norbornane: cyclomatic number 2, smallest rings are the two 5-rings.
        let rings = rings_of("C1CC2CCC1C2");
        assert_eq!(rings.len(), 2);
        assert!(rings.iter().all(|r| r.len() == 5), "{rings:?}");
    }

    #[test]
    fn disconnected_components_each_contribute() {
        let rings = rings_of("C1CC1.C1CCC1");
        assert_eq!(rings.len(), 2);
        let sizes: Vec<usize> = rings.iter().map(Vec::len).collect();
        assert!(sizes.contains(&3) && sizes.contains(&4));
    }

    #[test]
    fn ring_order_is_a_cycle() {
        for s in ["C1CCCCC1", "C1CCC2CCCCC2C1", "C1CC2CCC1C2"] {
            let m = parse_to_mol(s).unwrap();
            for ring in sssr(&m) {
                for i in 0..ring.len() {
                    let a = ring[i];
                    let b = ring[(i + 1) % ring.len()];
                    assert!(m.bond_between(a, b).is_some(), "{s}: {ring:?}");
                }
            }
        }
    }
}
