//! Shared helpers for the integration suites: an independent Stallings
//! folding oracle, an independent projector-trace game evaluator, and
//! random generators for games and valid strategies. The oracles are kept
//! deliberately naive and separate from the library implementations.
//!
//! Each integration target uses a different subset of these helpers.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use sgt_core::actions::Permutation;
use sgt_core::games::{Edge, EdgeConstraints, LinearConstraint, TailoredGame};
use sgt_core::perm::PermutationStrategy;
use sgt_core::rational::{q_usize, q_zero, Q};
use sgt_core::words::Word;

// ---------------------------------------------------------------------------
// Independent subgroup-membership oracle: naive repeated-pass folding
// ---------------------------------------------------------------------------

pub struct NaiveCore {
    // explicit edge list (source, generator, target); vertex 0 is the base
    edges: Vec<(usize, usize, usize)>,
    base: usize,
}

impl NaiveCore {
    pub fn build(words: &[Word]) -> NaiveCore {
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        let mut next_vertex = 1usize;
        for w in words {
            let mut cur = 0usize;
            for (i, l) in w.letters().iter().enumerate() {
                let nxt = if i + 1 == w.len() { 0 } else { next_vertex };
                if i + 1 != w.len() {
                    next_vertex += 1;
                }
                if l.inv {
                    edges.push((nxt, l.gen as usize, cur));
                } else {
                    edges.push((cur, l.gen as usize, nxt));
                }
                cur = nxt;
            }
        }
        let mut base = 0usize;
        // fold to a fixed point: merge targets of equal-labeled edges out of
        // (or into) the same vertex
        loop {
            edges.sort_unstable();
            edges.dedup();
            let mut merge: Option<(usize, usize)> = None;
            'search: for (i, a) in edges.iter().enumerate() {
                for b in &edges[i + 1..] {
                    if a.0 == b.0 && a.1 == b.1 && a.2 != b.2 {
                        merge = Some((a.2, b.2));
                        break 'search;
                    }
                    if a.2 == b.2 && a.1 == b.1 && a.0 != b.0 {
                        merge = Some((a.0, b.0));
                        break 'search;
                    }
                }
            }
            let Some((keep, gone)) = merge else { break };
            let (keep, gone) = (keep.min(gone), keep.max(gone));
            for e in edges.iter_mut() {
                if e.0 == gone {
                    e.0 = keep;
                }
                if e.2 == gone {
                    e.2 = keep;
                }
            }
            if base == gone {
                base = keep;
            }
        }
        NaiveCore { edges, base }
    }

    pub fn member(&self, w: &Word) -> bool {
        let mut cur = self.base;
        for l in w.letters() {
            let step = if l.inv {
                self.edges
                    .iter()
                    .find(|e| e.2 == cur && e.1 == l.gen as usize)
                    .map(|e| e.0)
            } else {
                self.edges
                    .iter()
                    .find(|e| e.0 == cur && e.1 == l.gen as usize)
                    .map(|e| e.2)
            };
            match step {
                Some(v) => cur = v,
                None => return false,
            }
        }
        cur == self.base
    }
}

pub fn naive_is_pseudo_with(
    core: &NaiveCore,
    a: &BTreeSet<Word>,
    b: &BTreeSet<Word>,
) -> (bool, Option<Word>) {
    for w in b {
        if !a.contains(w) && core.member(w) {
            return (false, Some(w.clone()));
        }
    }
    (true, None)
}

// ---------------------------------------------------------------------------
// Independent game evaluator: projector products and normalized trace
// ---------------------------------------------------------------------------

type IntMatrix = Vec<Vec<i64>>;

fn perm_matrix(p: &Permutation) -> IntMatrix {
    let n = p.degree();
    let mut m = vec![vec![0i64; n]; n];
    for x in 0..n as u32 {
        m[p.apply(x) as usize][x as usize] = 1;
    }
    m
}

fn identity_matrix(n: usize) -> IntMatrix {
    let mut m = vec![vec![0i64; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.len();
    let mut out = vec![vec![0i64; n]; n];
    for i in 0..n {
        for (k, &aik) in a[i].iter().enumerate() {
            if aik != 0 {
                for (j, &bkj) in b[k].iter().enumerate() {
                    out[i][j] += aik * bkj;
                }
            }
        }
    }
    out
}

fn mat_add_scaled(a: &IntMatrix, b: &IntMatrix, sign: i64) -> IntMatrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + sign * y).collect())
        .collect()
}

/// `2 P^X_bit = I +/- M_X` as an integer matrix.
fn projector_twice(perm: &Permutation, bit: bool) -> IntMatrix {
    let m = perm_matrix(perm);
    let id = identity_matrix(perm.degree());
    mat_add_scaled(&id, &m, if bit { -1 } else { 1 })
}

/// Exact game value through the dimension-normalized trace of projector
/// products over the J-odd subspace; fully independent of the orbit/Fourier
/// route in the library.
pub fn trace_value_oracle(game: &TailoredGame, sigma: &PermutationStrategy) -> Q {
    let degree = sigma.degree();
    let n = degree / 2;
    let proj_j_neg = {
        let id = identity_matrix(degree);
        let mj = perm_matrix(sigma.j());
        mat_add_scaled(&id, &mj, -1) // 2 P^J_1
    };
    let mut value = q_zero();
    for (ei, e) in game.edges().iter().enumerate() {
        let gens_x = game.vertex_generators(e.x);
        let gens_y = game.vertex_generators(e.y);
        // precompute vertex projector products for every bit pattern
        let vertex_products = |gens: &[usize]| -> Vec<IntMatrix> {
            let mut out = Vec::with_capacity(1 << gens.len());
            for mask in 0usize..1 << gens.len() {
                let mut m = identity_matrix(degree);
                for (i, &g) in gens.iter().enumerate() {
                    m = mat_mul(&m, &projector_twice(sigma.gen(g), mask >> i & 1 == 1));
                }
                out.push(m);
            }
            out
        };
        let px = vertex_products(gens_x);
        let py = vertex_products(gens_y);
        let denom_pow = gens_x.len() + gens_y.len() + 1;
        let mut edge_total = q_zero();
        for mx in 0usize..1 << gens_x.len() {
            for my in 0usize..1 << gens_y.len() {
                let mut values = BTreeMap::new();
                for (i, &g) in gens_x.iter().enumerate() {
                    values.insert(g, mx >> i & 1 == 1);
                }
                for (i, &g) in gens_y.iter().enumerate() {
                    values.insert(g, my >> i & 1 == 1);
                }
                let gamma = sgt_core::games::Assignment { values };
                if !game
                    .decision(ei, &gamma)
                    .expect("assignment covers the edge")
                {
                    continue;
                }
                let prod = mat_mul(&mat_mul(&px[mx], &py[my]), &proj_j_neg);
                let trace: i64 = (0..degree).map(|i| prod[i][i]).sum();
                if trace != 0 {
                    edge_total += Q::new(trace.into(), 1.into())
                        / (q_usize(1usize << denom_pow) * q_usize(n));
                }
            }
        }
        value += &e.weight * edge_total;
    }
    value
}

// ---------------------------------------------------------------------------
// Random tailored games and valid strategies
// ---------------------------------------------------------------------------

/// A random connected tailored game with answer lengths at most `max_len`
/// and uniform edge weights. Constraint tables are total with up to three
/// random parity vectors per readable assignment.
pub fn random_game<R: Rng>(rng: &mut R, max_len: usize) -> TailoredGame {
    let v = rng.gen_range(2..=4usize);
    let vertices: Vec<String> = (0..v).map(|i| format!("v{i}")).collect();
    let mut len_r = Vec::new();
    let mut len_l = Vec::new();
    for _ in 0..v {
        let len = rng.gen_range(1..=max_len);
        let readable = rng.gen_range(0..=len);
        len_r.push(readable);
        len_l.push(len - readable);
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 1..v {
        pairs.push((rng.gen_range(0..i), i));
    }
    let extra = (rng.gen_range(0..v), rng.gen_range(0..v));
    if extra.0 != extra.1 && !pairs.contains(&extra) && !pairs.contains(&(extra.1, extra.0)) {
        pairs.push(extra);
    }
    let weight = Q::new(1.into(), (pairs.len() as i64).into());

    // generator ids the way the game will assign them
    let mut per_vertex: Vec<Vec<usize>> = Vec::new();
    let mut next = 0usize;
    for vx in 0..v {
        let mut ids = Vec::new();
        for _ in 0..len_r[vx] + len_l[vx] {
            ids.push(next);
            next += 1;
        }
        per_vertex.push(ids);
    }

    let mut edges = Vec::new();
    for (x, y) in pairs {
        let readable_count = len_r[x] + len_r[y];
        let edge_gens: Vec<usize> = per_vertex[x]
            .iter()
            .chain(per_vertex[y].iter())
            .copied()
            .collect();
        let mut table = BTreeMap::new();
        for mask in 0usize..1 << readable_count {
            let bits: Vec<bool> = (0..readable_count).map(|i| mask >> i & 1 == 1).collect();
            let count = rng.gen_range(0..=3usize);
            let mut cons: Vec<LinearConstraint> = (0..count)
                .map(|_| {
                    let gens: BTreeSet<usize> =
                        edge_gens.iter().copied().filter(|_| rng.gen()).collect();
                    LinearConstraint { j: rng.gen(), gens }
                })
                .collect();
            cons.sort();
            cons.dedup();
            table.insert(bits, cons);
        }
        edges.push(Edge {
            x,
            y,
            weight: weight.clone(),
            constraints: EdgeConstraints::Table(table),
        });
    }
    TailoredGame::new(vertices, len_r, len_l, edges).expect("generated game is well formed")
}

/// A random valid strategy for the game on `2 * pairs` points: `J` matches
/// point `2q` with `2q + 1`; each vertex splits the pairs into blocks of
/// size `2^c` and each generator translates every block by a random vector,
/// which makes the vertex family a commuting involution family commuting
/// with `J`. Readable generators translate only along the `J` bit, so the
/// strategy is Z-aligned.
pub fn random_valid_strategy<R: Rng>(
    rng: &mut R,
    game: &TailoredGame,
    pairs: usize,
) -> PermutationStrategy {
    let degree = 2 * pairs;
    let mut j_img: Vec<u32> = (0..degree as u32).collect();
    for q in 0..pairs {
        j_img[2 * q] = (2 * q + 1) as u32;
        j_img[2 * q + 1] = (2 * q) as u32;
    }
    let j = Permutation::new(j_img).unwrap();

    let mut gens: Vec<Permutation> = vec![Permutation::identity(degree); game.generators().len()];
    for v in 0..game.vertex_count() {
        // block structure shared by the whole vertex family
        let mut blocks: Vec<(usize, usize)> = Vec::new(); // (first pair, log2 size)
        let mut q = 0usize;
        while q < pairs {
            let mut c = rng.gen_range(0..=2usize);
            while (1usize << c) > pairs - q {
                c -= 1;
            }
            blocks.push((q, c));
            q += 1 << c;
        }
        for &g in game.vertex_generators(v) {
            let readable = game.generators()[g].readable;
            let mut img: Vec<u32> = (0..degree as u32).collect();
            for &(start, c) in &blocks {
                let shift: usize = if readable {
                    0
                } else {
                    rng.gen_range(0..1usize << c)
                };
                let jbit: usize = rng.gen_range(0..2);
                for local in 0..1usize << c {
                    for b in 0..2usize {
                        let src = 2 * (start + local) + b;
                        let dst = 2 * (start + (local ^ shift)) + (b ^ jbit);
                        img[src] = dst as u32;
                    }
                }
            }
            gens[g] = Permutation::new(img).unwrap();
        }
    }
    PermutationStrategy::new(j, gens).unwrap()
}

/// Applies about `fraction * degree / 2` random transpositions to a few of
/// the strategy's permutations (possibly including `J`).
pub fn corrupt_strategy<R: Rng>(
    rng: &mut R,
    sigma: &PermutationStrategy,
    fraction: f64,
) -> PermutationStrategy {
    let degree = sigma.degree();
    let swaps = ((fraction * degree as f64) / 2.0).floor() as usize;
    let mut j = sigma.j().clone();
    let mut gens: Vec<Permutation> = sigma.gens().to_vec();
    let touched = rng.gen_range(1..=3usize.min(gens.len() + 1));
    for _ in 0..touched {
        let slot = rng.gen_range(0..=gens.len());
        for _ in 0..swaps {
            let a = rng.gen_range(0..degree as u32);
            let b = rng.gen_range(0..degree as u32);
            if a == b {
                continue;
            }
            let t = Permutation::transposition(degree, a, b);
            if slot == gens.len() {
                j = t.compose(&j);
            } else {
                gens[slot] = t.compose(&gens[slot]);
            }
        }
    }
    PermutationStrategy::new(j, gens).unwrap()
}
