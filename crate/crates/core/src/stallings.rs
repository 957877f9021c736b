//! Folded core graphs for finitely generated subgroups of a free group.
//!
//! A [`CoreGraph`] decides membership in the subgroup generated by a finite
//! word set. Folding runs over a union-find of vertices with a worklist of
//! conflicting edge pairs, so the result is independent of insertion order.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::words::Word;

/// Immutable folded core graph with basepoint 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreGraph {
    gens: usize,
    /// `fwd[v][g]` is the target of the g-labeled edge out of v, if any.
    fwd: Vec<Vec<Option<u32>>>,
    /// `bwd[v][g]` is the source of the g-labeled edge into v, if any.
    bwd: Vec<Vec<Option<u32>>>,
    basepoint: u32,
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new() -> Self {
        UnionFind { parent: Vec::new() }
    }

    fn push(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Merges the classes of x and y; returns (kept, absorbed) or None.
    fn union(&mut self, x: u32, y: u32) -> Option<(u32, u32)> {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return None;
        }
        let (keep, gone) = if rx < ry { (rx, ry) } else { (ry, rx) };
        self.parent[gone as usize] = keep;
        Some((keep, gone))
    }
}

struct Builder {
    gens: usize,
    uf: UnionFind,
    fwd: Vec<Vec<Option<u32>>>,
    bwd: Vec<Vec<Option<u32>>>,
}

impl Builder {
    fn new(gens: usize) -> Self {
        let mut b = Builder {
            gens,
            uf: UnionFind::new(),
            fwd: Vec::new(),
            bwd: Vec::new(),
        };
        b.add_vertex();
        b
    }

    fn add_vertex(&mut self) -> u32 {
        self.fwd.push(vec![None; self.gens]);
        self.bwd.push(vec![None; self.gens]);
        self.uf.push()
    }

    /// Adds a g-edge from u to v, folding as needed. Edge slots live at
    /// class representatives; stored vertex ids may be stale and must be
    /// resolved through the union-find when read.
    fn add_edge(&mut self, u: u32, g: usize, v: u32) {
        let u = self.uf.find(u);
        let v = self.uf.find(v);
        match self.fwd[u as usize][g] {
            Some(t) => {
                let t = self.uf.find(t);
                if t != v {
                    self.merge_classes(v, t);
                }
            }
            None => {
                self.fwd[u as usize][g] = Some(v);
                match self.bwd[v as usize][g] {
                    Some(s) => {
                        let s = self.uf.find(s);
                        if s != u {
                            self.merge_classes(u, s);
                        }
                    }
                    None => self.bwd[v as usize][g] = Some(u),
                }
            }
        }
    }

    /// Folds two vertex classes together, cascading over edge conflicts.
    /// Absorbed classes hand their edge slots to the keeper; a slot conflict
    /// between two parallel edges queues the merge of their far endpoints.
    fn merge_classes(&mut self, a: u32, b: u32) {
        let mut queue = vec![(a, b)];
        while let Some((a, b)) = queue.pop() {
            let a = self.uf.find(a);
            let b = self.uf.find(b);
            let Some((keep, gone)) = self.uf.union(a, b) else {
                continue;
            };
            for g in 0..self.gens {
                if let Some(t) = self.fwd[gone as usize][g].take() {
                    match self.fwd[keep as usize][g] {
                        None => self.fwd[keep as usize][g] = Some(t),
                        Some(t2) => queue.push((t, t2)),
                    }
                }
                if let Some(s) = self.bwd[gone as usize][g].take() {
                    match self.bwd[keep as usize][g] {
                        None => self.bwd[keep as usize][g] = Some(s),
                        Some(s2) => queue.push((s, s2)),
                    }
                }
            }
        }
    }

    fn finish(mut self) -> CoreGraph {
        // Compact to representatives with canonical edge maps.
        let n = self.fwd.len();
        let mut reps = Vec::new();
        let mut rep_index = vec![u32::MAX; n];
        for v in 0..n as u32 {
            if self.uf.find(v) == v {
                rep_index[v as usize] = reps.len() as u32;
                reps.push(v);
            }
        }
        let mut fwd = vec![vec![None; self.gens]; reps.len()];
        let mut bwd = vec![vec![None; self.gens]; reps.len()];
        for (i, &v) in reps.iter().enumerate() {
            for g in 0..self.gens {
                if let Some(t) = self.fwd[v as usize][g] {
                    let t = self.uf.find(t);
                    fwd[i][g] = Some(rep_index[t as usize]);
                    bwd[rep_index[t as usize] as usize][g] = Some(i as u32);
                }
            }
        }
        let base = {
            let r = self.uf.find(0);
            rep_index[r as usize]
        };
        let mut graph = CoreGraph {
            gens: self.gens,
            fwd,
            bwd,
            basepoint: base,
        };
        graph.prune();
        graph.relabel_canonical();
        graph
    }
}

impl CoreGraph {
    /// Builds the folded core graph of the subgroup generated by `words`.
    pub fn build(gens: usize, words: &[Word]) -> CoreGraph {
        let mut b = Builder::new(gens);
        for w in words {
            if w.is_identity() {
                continue;
            }
            // Lay out the loop for w from the basepoint back to itself.
            let mut cur = 0u32;
            for (i, l) in w.letters().iter().enumerate() {
                let next = if i + 1 == w.len() { 0 } else { b.add_vertex() };
                if l.inv {
                    b.add_edge(next, l.gen as usize, cur);
                } else {
                    b.add_edge(cur, l.gen as usize, next);
                }
                cur = next;
            }
        }
        b.finish()
    }

    /// Removes non-basepoint vertices of total degree <= 1.
    fn prune(&mut self) {
        loop {
            let mut victim = None;
            for v in 0..self.fwd.len() as u32 {
                if v == self.basepoint {
                    continue;
                }
                let deg: usize = (0..self.gens)
                    .map(|g| {
                        self.fwd[v as usize][g].is_some() as usize
                            + self.bwd[v as usize][g].is_some() as usize
                    })
                    .sum();
                if deg <= 1 {
                    victim = Some(v);
                    break;
                }
            }
            let Some(v) = victim else { break };
            for g in 0..self.gens {
                if let Some(t) = self.fwd[v as usize][g] {
                    self.bwd[t as usize][g] = None;
                }
                if let Some(s) = self.bwd[v as usize][g] {
                    self.fwd[s as usize][g] = None;
                }
            }
            let last = self.fwd.len() as u32 - 1;
            // Swap-remove v, rewiring references to `last`.
            self.fwd.swap_remove(v as usize);
            self.bwd.swap_remove(v as usize);
            if self.basepoint == last {
                self.basepoint = v;
            }
            for row in self.fwd.iter_mut().chain(self.bwd.iter_mut()) {
                for e in row.iter_mut() {
                    if *e == Some(last) {
                        *e = Some(v);
                    }
                }
            }
        }
    }

    /// Relabels vertices in BFS order from the basepoint (edges scanned in
    /// generator order, forward before backward), so equal subgroups yield
    /// byte-identical graphs.
    fn relabel_canonical(&mut self) {
        let n = self.fwd.len();
        let mut order = vec![u32::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        order[self.basepoint as usize] = 0;
        queue.push_back(self.basepoint);
        let mut next = 1u32;
        while let Some(v) = queue.pop_front() {
            for g in 0..self.gens {
                for t in [self.fwd[v as usize][g], self.bwd[v as usize][g]]
                    .into_iter()
                    .flatten()
                {
                    if order[t as usize] == u32::MAX {
                        order[t as usize] = next;
                        next += 1;
                        queue.push_back(t);
                    }
                }
            }
        }
        debug_assert_eq!(next as usize, n, "core graph must be connected");
        let mut fwd = vec![vec![None; self.gens]; n];
        let mut bwd = vec![vec![None; self.gens]; n];
        for v in 0..n {
            for g in 0..self.gens {
                if let Some(t) = self.fwd[v][g] {
                    fwd[order[v] as usize][g] = Some(order[t as usize]);
                }
                if let Some(s) = self.bwd[v][g] {
                    bwd[order[v] as usize][g] = Some(order[s as usize]);
                }
            }
        }
        self.fwd = fwd;
        self.bwd = bwd;
        self.basepoint = 0;
    }

    pub fn vertex_count(&self) -> usize {
        self.fwd.len()
    }

    pub fn edge_count(&self) -> usize {
        self.fwd
            .iter()
            .map(|row| row.iter().flatten().count())
            .sum()
    }

    pub fn basepoint(&self) -> u32 {
        self.basepoint
    }

    /// True iff the path labeled `w` from the basepoint exists and is closed,
    /// i.e. iff `w` lies in the subgroup this graph was built from.
    pub fn member(&self, w: &Word) -> bool {
        let mut cur = self.basepoint;
        for l in w.letters() {
            let step = if l.inv {
                self.bwd[cur as usize][l.gen as usize]
            } else {
                self.fwd[cur as usize][l.gen as usize]
            };
            match step {
                Some(t) => cur = t,
                None => return false,
            }
        }
        cur == self.basepoint
    }
}

/// Outcome of the pseudo-subgroup decision for `A` inside window `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoSubgroupVerdict {
    pub verdict: bool,
    /// When the verdict is false: the first element of `B` (canonical order)
    /// that lies in the subgroup generated by `A` without lying in `A`.
    pub witness: Option<Word>,
}

/// Decides whether `A` arises as the window `H ∩ B` of some subgroup `H`,
/// which holds iff the subgroup generated by `A` meets `B` in exactly `A`.
pub fn is_pseudo_subgroup(
    gens: usize,
    a: &BTreeSet<Word>,
    b: &BTreeSet<Word>,
) -> Result<PseudoSubgroupVerdict> {
    if !a.is_subset(b) {
        return Err(Error::input(
            "pseudo-subgroup check requires A to be a subset of B",
        ));
    }
    let a_words: Vec<Word> = a.iter().cloned().collect();
    let core = CoreGraph::build(gens, &a_words);
    for w in b {
        if !a.contains(w) && core.member(w) {
            return Ok(PseudoSubgroupVerdict {
                verdict: false,
                witness: Some(w.clone()),
            });
        }
    }
    Ok(PseudoSubgroupVerdict {
        verdict: true,
        witness: None,
    })
}

/// Deterministic element of the subgroup generated by `a`: a product of
/// generators (inverted per flag), each optionally conjugated by another
/// generator. Used to probe membership soundness.
pub fn subgroup_sample(a: &[Word], pattern: &[(usize, bool, Option<usize>)]) -> Word {
    let mut out = Word::identity();
    for &(i, inv, conj) in pattern {
        if a.is_empty() {
            break;
        }
        let mut f = a[i % a.len()].clone();
        if inv {
            f = f.inverse();
        }
        if let Some(j) = conj {
            let c = &a[j % a.len()];
            f = c.concat(&f).concat(&c.inverse());
        }
        out = out.concat(&f);
    }
    out
}
