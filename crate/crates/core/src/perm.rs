//! Permutation strategies for tailored games: validation, Z-alignment,
//! orbit and Fourier analysis, exact value evaluation, procedural sampling,
//! and the stability rounding pipeline that repairs near-strategies into
//! genuine Z-aligned ones.

use std::collections::BTreeMap;

use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::actions::{hamming, Permutation};
use crate::error::{Error, Result};
use crate::games::{Assignment, GenId, TailoredGame};
use crate::rational::{q_usize, q_zero, Q};

/// A map from the game generators plus the central slot `J` into `Sym(2n)`.
/// Construction does not validate the strategy laws; use [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationStrategy {
    degree: usize,
    j: Permutation,
    gens: Vec<Permutation>,
}

impl PermutationStrategy {
    pub fn new(j: Permutation, gens: Vec<Permutation>) -> Result<Self> {
        let degree = j.degree();
        if degree == 0 {
            return Err(Error::input("strategies need at least one point"));
        }
        if gens.iter().any(|p| p.degree() != degree) {
            return Err(Error::input(
                "all strategy permutations must share one degree",
            ));
        }
        Ok(PermutationStrategy { degree, j, gens })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn j(&self) -> &Permutation {
        &self.j
    }

    pub fn gen(&self, g: GenId) -> &Permutation {
        &self.gens[g]
    }

    pub fn gens(&self) -> &[Permutation] {
        &self.gens
    }
}

/// One violated strategy law, with a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    JNotInvolution { point: u32 },
    JHasFixedPoint { point: u32 },
    JNotCentral { gen: GenId },
    GenNotInvolution { gen: GenId, point: u32 },
    VertexPairNotCommuting { vertex: usize, a: GenId, b: GenId },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::JNotInvolution { point } => write!(f, "J^2 moves point {point}"),
            Violation::JHasFixedPoint { point } => write!(f, "J fixes point {point}"),
            Violation::JNotCentral { gen } => write!(f, "J does not commute with generator {gen}"),
            Violation::GenNotInvolution { gen, point } => {
                write!(f, "generator {gen} squared moves point {point}")
            }
            Violation::VertexPairNotCommuting { vertex, a, b } => {
                write!(f, "vertex {vertex}: generators {a} and {b} do not commute")
            }
        }
    }
}

/// Checks the three strategy laws: J is a fixed-point-free central
/// involution, every image is an involution, and the images at each vertex
/// commute pairwise. Returns every violation found.
pub fn validate(game: &TailoredGame, sigma: &PermutationStrategy) -> Result<Vec<Violation>> {
    if sigma.gens.len() != game.generators().len() {
        return Err(Error::input("strategy size does not match the game"));
    }
    let mut out = Vec::new();
    let jj = sigma.j.compose(&sigma.j);
    if let Some(p) = (0..sigma.degree as u32).find(|&p| jj.apply(p) != p) {
        out.push(Violation::JNotInvolution { point: p });
    }
    if let Some(p) = (0..sigma.degree as u32).find(|&p| sigma.j.apply(p) == p) {
        out.push(Violation::JHasFixedPoint { point: p });
    }
    for (g, perm) in sigma.gens.iter().enumerate() {
        if !perm.commutes_with(&sigma.j) {
            out.push(Violation::JNotCentral { gen: g });
        }
        let sq = perm.compose(perm);
        if let Some(p) = (0..sigma.degree as u32).find(|&p| sq.apply(p) != p) {
            out.push(Violation::GenNotInvolution { gen: g, point: p });
        }
    }
    for v in 0..game.vertex_count() {
        let gens = game.vertex_generators(v);
        for (i, &a) in gens.iter().enumerate() {
            for &b in &gens[i + 1..] {
                if !sigma.gens[a].commutes_with(&sigma.gens[b]) {
                    out.push(Violation::VertexPairNotCommuting { vertex: v, a, b });
                }
            }
        }
    }
    out.dedup();
    Ok(out)
}

/// True iff every readable generator acts on each point either like the
/// identity or like `J`.
pub fn is_z_aligned(game: &TailoredGame, sigma: &PermutationStrategy) -> Result<bool> {
    if sigma.gens.len() != game.generators().len() {
        return Err(Error::input("strategy size does not match the game"));
    }
    for (g, info) in game.generators().iter().enumerate() {
        if !info.readable {
            continue;
        }
        let perm = &sigma.gens[g];
        for p in 0..sigma.degree as u32 {
            let img = perm.apply(p);
            if img != p && img != sigma.j.apply(p) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff the images of `S_x ∪ S_y` commute pairwise for every edge.
pub fn commutes_along_edges(game: &TailoredGame, sigma: &PermutationStrategy) -> Result<bool> {
    if sigma.gens.len() != game.generators().len() {
        return Err(Error::input("strategy size does not match the game"));
    }
    for e in 0..game.edges().len() {
        let gens = game.edge_generators(e);
        for (i, &a) in gens.iter().enumerate() {
            for &b in &gens[i + 1..] {
                if !sigma.gens[a].commutes_with(&sigma.gens[b]) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The degree-2 strategy of a deterministic answer function: `J` swaps the
/// two points and each generator acts as identity or as the swap.
pub fn classical_strategy(game: &TailoredGame, f: &[bool]) -> Result<PermutationStrategy> {
    if f.len() != game.generators().len() {
        return Err(Error::input("answer function must cover every generator"));
    }
    let swap = Permutation::transposition(2, 0, 1);
    let gens = f
        .iter()
        .map(|&bit| {
            if bit {
                swap.clone()
            } else {
                Permutation::identity(2)
            }
        })
        .collect();
    PermutationStrategy::new(swap, gens)
}

/// Sign pattern of one common eigenvector over an orbit, stored dense with
/// zeros off the orbit. The true vector carries a symbolic `1/sqrt(|O|)`
/// normalization; every consumed quantity is a squared overlap, so values
/// stay rational.
#[derive(Clone, Debug)]
pub struct FourierVec {
    pub signs: Vec<i8>,
    /// Per local generator (the build order, `J` first): true when the
    /// eigenvalue is -1.
    pub eigen_neg: Vec<bool>,
    pub orbit_size: usize,
}

#[derive(Clone, Debug)]
pub struct Orbit {
    pub points: Vec<u32>,
    /// The half of the orbit basis on which `J` acts as -1.
    pub basis_minus: Vec<FourierVec>,
}

/// Simultaneous eigenbasis data of a commuting involution family (with `J`
/// first), orbit by orbit.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub degree: usize,
    pub orbit_of: Vec<usize>,
    pub orbits: Vec<Orbit>,
}

/// Builds the orbit decomposition and per-orbit sign bases of the group
/// generated by `perms` (with `perms[0]` playing the role of `J`). Fails if
/// the family is not a commuting involution family.
pub fn spectral(degree: usize, perms: &[&Permutation]) -> Result<Spectral> {
    if perms.is_empty() || perms.iter().any(|p| p.degree() != degree) {
        return Err(Error::internal("spectral: degree mismatch"));
    }
    if perms.len() > 16 {
        return Err(Error::size("spectral: too many generators"));
    }
    for (i, p) in perms.iter().enumerate() {
        if !p.compose(p).is_identity() {
            return Err(Error::internal("spectral: generator is not an involution"));
        }
        for q_ in &perms[i + 1..] {
            if !p.commutes_with(q_) {
                return Err(Error::internal("spectral: generators do not commute"));
            }
        }
    }
    // Orbits of the generated group.
    let mut orbit_of = vec![usize::MAX; degree];
    let mut orbits: Vec<Orbit> = Vec::new();
    for start in 0..degree as u32 {
        if orbit_of[start as usize] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut points = vec![start];
        orbit_of[start as usize] = id;
        let mut queue = vec![start];
        while let Some(p) = queue.pop() {
            for perm in perms {
                let t = perm.apply(p);
                if orbit_of[t as usize] == usize::MAX {
                    orbit_of[t as usize] = id;
                    points.push(t);
                    queue.push(t);
                }
            }
        }
        points.sort_unstable();

        // Consistent sign patterns: one vector per character of the orbit
        // action, sign fixed to +1 at the minimal point.
        let m = perms.len();
        let mut basis_minus = Vec::new();
        let mut consistent = 0usize;
        for pattern in 0u32..1 << m {
            let mut signs = vec![0i8; degree];
            signs[points[0] as usize] = 1;
            let mut stack = vec![points[0]];
            let mut ok = true;
            while let Some(p) = stack.pop() {
                let sp = signs[p as usize];
                for (i, perm) in perms.iter().enumerate() {
                    let t = perm.apply(p);
                    let st = if pattern >> i & 1 == 1 { -sp } else { sp };
                    let cur = signs[t as usize];
                    if cur == 0 {
                        signs[t as usize] = st;
                        stack.push(t);
                    } else if cur != st {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    break;
                }
            }
            if !ok {
                continue;
            }
            consistent += 1;
            let eigen_neg: Vec<bool> = (0..m).map(|i| pattern >> i & 1 == 1).collect();
            if eigen_neg[0] {
                basis_minus.push(FourierVec {
                    signs,
                    eigen_neg,
                    orbit_size: points.len(),
                });
            }
        }
        // A transitive commuting family acts regularly, so the number of
        // consistent characters equals the orbit size.
        if consistent != points.len() {
            return Err(Error::internal("spectral: orbit is not elementary abelian"));
        }
        orbits.push(Orbit {
            points,
            basis_minus,
        });
    }
    Ok(Spectral {
        degree,
        orbit_of,
        orbits,
    })
}

fn vertex_spectral(
    game: &TailoredGame,
    sigma: &PermutationStrategy,
    vertex: usize,
) -> Result<Spectral> {
    let mut perms: Vec<&Permutation> = vec![&sigma.j];
    perms.extend(
        game.vertex_generators(vertex)
            .iter()
            .map(|&g| &sigma.gens[g]),
    );
    spectral(sigma.degree, &perms)
}

fn signed_overlap(a: &FourierVec, b: &FourierVec) -> i64 {
    a.signs
        .iter()
        .zip(&b.signs)
        .map(|(&x, &y)| x as i64 * y as i64)
        .sum()
}

fn gamma_of_pair(game: &TailoredGame, edge: usize, v: &FourierVec, u: &FourierVec) -> Assignment {
    let e = &game.edges()[edge];
    let mut values = BTreeMap::new();
    for (i, &g) in game.vertex_generators(e.x).iter().enumerate() {
        values.insert(g, v.eigen_neg[i + 1]);
    }
    for (i, &g) in game.vertex_generators(e.y).iter().enumerate() {
        values.insert(g, u.eigen_neg[i + 1]);
    }
    Assignment { values }
}

fn require_usable(game: &TailoredGame, sigma: &PermutationStrategy) -> Result<()> {
    let violations = validate(game, sigma)?;
    if !violations.is_empty() {
        return Err(Error::input(format!(
            "not a permutation strategy: {}",
            violations[0]
        )));
    }
    let has_readables = game.generators().iter().any(|g| g.readable);
    if has_readables && !is_z_aligned(game, sigma)? {
        return Err(Error::input(
            "readable outcomes are orbit-defined only for Z-aligned strategies",
        ));
    }
    Ok(())
}

/// Exact value of the quantum strategy induced by `sigma`: the expectation
/// over edges and simultaneous-eigenvector pairs of the decision, weighted
/// by squared overlaps.
pub fn game_value(game: &TailoredGame, sigma: &PermutationStrategy) -> Result<Q> {
    require_usable(game, sigma)?;
    let n = sigma.degree / 2;
    let spectra: Vec<Spectral> = (0..game.vertex_count())
        .map(|v| vertex_spectral(game, sigma, v))
        .collect::<Result<_>>()?;
    let mut value = q_zero();
    for (ei, e) in game.edges().iter().enumerate() {
        if e.weight.is_zero() {
            continue;
        }
        let sx = &spectra[e.x];
        let sy = &spectra[e.y];
        let mut edge_val = q_zero();
        for ox in &sx.orbits {
            for oy in &sy.orbits {
                let mut accepted_weight = 0i64;
                let mut any = false;
                for v in &ox.basis_minus {
                    for u in &oy.basis_minus {
                        let s = signed_overlap(v, u);
                        if s == 0 {
                            continue;
                        }
                        any = true;
                        let gamma = gamma_of_pair(game, ei, v, u);
                        if game.decision(ei, &gamma)? {
                            accepted_weight += s * s;
                        }
                    }
                }
                if any && accepted_weight != 0 {
                    edge_val += crate::rational::q_int(accepted_weight)
                        / (q_usize(ox.points.len()) * q_usize(oy.points.len()));
                }
            }
        }
        value += &e.weight * edge_val / q_usize(n);
    }
    Ok(value)
}

/// Exact answer distribution of one edge: the probability of each full
/// assignment bit string (edge generators in canonical order).
pub fn gamma_distribution(
    game: &TailoredGame,
    sigma: &PermutationStrategy,
    edge: usize,
) -> Result<BTreeMap<Vec<bool>, Q>> {
    require_usable(game, sigma)?;
    let n = sigma.degree / 2;
    let e = &game.edges()[edge];
    let sx = vertex_spectral(game, sigma, e.x)?;
    let sy = vertex_spectral(game, sigma, e.y)?;
    let gens = game.edge_generators(edge);
    let mut out: BTreeMap<Vec<bool>, Q> = BTreeMap::new();
    for ox in &sx.orbits {
        for oy in &sy.orbits {
            for v in &ox.basis_minus {
                for u in &oy.basis_minus {
                    let s = signed_overlap(v, u);
                    if s == 0 {
                        continue;
                    }
                    let gamma = gamma_of_pair(game, edge, v, u);
                    let bits: Vec<bool> = gens.iter().map(|g| gamma.values[g]).collect();
                    let p = crate::rational::q_int(s * s)
                        / (q_usize(ox.points.len()) * q_usize(oy.points.len()) * q_usize(n));
                    *out.entry(bits).or_insert_with(q_zero) += p;
                }
            }
        }
    }
    Ok(out)
}

/// Draws one assignment for the edge with exactly the strategy's answer
/// distribution; deterministic given the seed.
pub fn sample_gamma(
    game: &TailoredGame,
    sigma: &PermutationStrategy,
    edge: usize,
    seed: u64,
) -> Result<Assignment> {
    require_usable(game, sigma)?;
    let e = &game.edges()[edge];
    let sx = vertex_spectral(game, sigma, e.x)?;
    let sy = vertex_spectral(game, sigma, e.y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let star = rng.gen_range(0..sigma.degree as u32);
    let ox = &sx.orbits[sx.orbit_of[star as usize]];
    let oy = &sy.orbits[sy.orbit_of[star as usize]];
    let common = ox.points.iter().filter(|p| oy.points.contains(p)).count() as i64;
    // Conditional pair weights 2 s^2 sum to |O_x| |O_y| |O_x ∩ O_y|.
    let mut weights: Vec<(i64, &FourierVec, &FourierVec)> = Vec::new();
    let mut total = 0i64;
    for v in &ox.basis_minus {
        for u in &oy.basis_minus {
            let s = signed_overlap(v, u);
            let w = 2 * s * s;
            if w > 0 {
                weights.push((w, v, u));
                total += w;
            }
        }
    }
    let expected = ox.points.len() as i64 * oy.points.len() as i64 * common;
    if total != expected {
        return Err(Error::internal(
            "sampling weights do not total the orbit mass",
        ));
    }
    let mut draw = rng.gen_range(0..total as u64) as i64;
    for (w, v, u) in weights {
        if draw < w {
            return Ok(gamma_of_pair(game, edge, v, u));
        }
        draw -= w;
    }
    Err(Error::internal("sampling walk exhausted"))
}

/// Decides whether the parity `sum alpha(X) gamma(X) + alpha(J) = 0` holds
/// with probability one under the strategy's answer distribution: true iff
/// the product of the supported images equals `J^{alpha(J)}` pointwise.
/// Requires the supported images (and `J`) to form a commuting involution
/// family.
pub fn linear_check_exact(
    sigma: &PermutationStrategy,
    support: &[GenId],
    alpha_j: bool,
) -> Result<bool> {
    let mut family: Vec<&Permutation> = vec![&sigma.j];
    for &g in support {
        if g >= sigma.gens.len() {
            return Err(Error::input("constraint touches an unknown generator"));
        }
        family.push(&sigma.gens[g]);
    }
    for (i, p) in family.iter().enumerate() {
        if !p.compose(p).is_identity() {
            return Err(Error::input("linear check requires involutions"));
        }
        for q_ in &family[i + 1..] {
            if !p.commutes_with(q_) {
                return Err(Error::input("linear check requires a commuting family"));
            }
        }
    }
    let mut word = Permutation::identity(sigma.degree);
    for &g in support {
        word = word.compose(&sigma.gens[g]);
    }
    Ok(if alpha_j {
        word == sigma.j
    } else {
        word.is_identity()
    })
}

// ---------------------------------------------------------------------------
// The perfect magic-square strategy
// ---------------------------------------------------------------------------

/// A signed permutation on 4 basis vectors: `e_i -> ±e_{perm[i]}`.
#[derive(Clone, Copy)]
struct SignedPerm {
    perm: [usize; 4],
    neg: [bool; 4],
}

impl SignedPerm {
    /// Tensor of two single-qubit operators, first factor on the high bit.
    fn tensor(a: ([usize; 2], [bool; 2]), b: ([usize; 2], [bool; 2])) -> SignedPerm {
        let mut perm = [0usize; 4];
        let mut neg = [false; 4];
        for hi in 0..2 {
            for lo in 0..2 {
                let i = 2 * hi + lo;
                perm[i] = 2 * a.0[hi] + b.0[lo];
                neg[i] = a.1[hi] ^ b.1[lo];
            }
        }
        SignedPerm { perm, neg }
    }

    fn negate(mut self) -> SignedPerm {
        for n in self.neg.iter_mut() {
            *n = !*n;
        }
        self
    }

    /// Double cover on 8 points: point `2i + s` is the basis vector `e_i`
    /// with sign bit `s`.
    fn lift(&self) -> Permutation {
        let mut img = vec![0u32; 8];
        for i in 0..4 {
            for s in 0..2 {
                let flip = s ^ (self.neg[i] as usize);
                img[2 * i + s] = (2 * self.perm[i] + flip) as u32;
            }
        }
        Permutation::new(img).expect("signed permutation lift")
    }
}

/// The perfect strategy for [`crate::games::magic_square`]: the standard
/// table of real two-qubit operators per cell, realized as signed
/// permutations on the 8-point double cover of the two-qubit basis. `J`
/// lifts the global sign flip. The strategy is valid, commutes along edges,
/// and wins the game with probability one.
pub fn magic_square_pauli_strategy(game: &TailoredGame) -> Result<PermutationStrategy> {
    let x1: ([usize; 2], [bool; 2]) = ([1, 0], [false, false]);
    let z1: ([usize; 2], [bool; 2]) = ([0, 1], [false, true]);
    let i1: ([usize; 2], [bool; 2]) = ([0, 1], [false, false]);
    let xz1: ([usize; 2], [bool; 2]) = ([1, 0], [false, true]);
    let cells: [SignedPerm; 9] = [
        SignedPerm::tensor(x1, i1),
        SignedPerm::tensor(i1, x1),
        SignedPerm::tensor(x1, x1),
        SignedPerm::tensor(i1, z1),
        SignedPerm::tensor(z1, i1),
        SignedPerm::tensor(z1, z1),
        SignedPerm::tensor(x1, z1),
        SignedPerm::tensor(z1, x1),
        SignedPerm::tensor(xz1, xz1).negate(),
    ];
    // A generator named `.../L/k` of a row vertex plays the k-th supported
    // cell of its constraint; column vertices play their own cell.
    let mut gens = Vec::with_capacity(game.generators().len());
    for info in game.generators() {
        let vertex_name = game.vertex_name(info.vertex);
        let cell = if let Some(col) = vertex_name.strip_prefix('c') {
            col.parse::<usize>()
                .map_err(|_| Error::input("not the standard magic square game"))?
        } else if let Some(row) = vertex_name.strip_prefix('r') {
            let row: usize = row
                .parse()
                .map_err(|_| Error::input("not the standard magic square game"))?;
            // constraint rows 0..2 use cells 3r+k; constraint rows 3..5 are
            // grid columns using cells (r-3) + 3k
            if row < 3 {
                3 * row + info.index
            } else {
                (row - 3) + 3 * info.index
            }
        } else {
            return Err(Error::input("not the standard magic square game"));
        };
        if cell >= 9 {
            return Err(Error::input("not the standard magic square game"));
        }
        gens.push(cells[cell].lift());
    }
    let j = SignedPerm {
        perm: [0, 1, 2, 3],
        neg: [true; 4],
    }
    .lift();
    PermutationStrategy::new(j, gens)
}

// ---------------------------------------------------------------------------
// Stability repairs
// ---------------------------------------------------------------------------

/// Nearest involution: keeps the action where the square already fixes,
/// identity elsewhere. The displacement equals `d_H(zeta^2, Id)` exactly.
pub fn fix_involution(zeta: &Permutation) -> Permutation {
    let n = zeta.degree();
    let sq = zeta.compose(zeta);
    let mut img: Vec<u32> = (0..n as u32).collect();
    for p in 0..n as u32 {
        if sq.apply(p) == p {
            img[p as usize] = zeta.apply(p);
        }
    }
    Permutation::new(img).expect("restriction of an involution plus identity")
}

/// Makes an involution fixed-point-free by matching its fixed points in
/// pairs, growing the point set by one when the fixed set is odd. Returns
/// the repaired involution on `2 * ceil(n / 2)` points.
pub fn fix_fixed_point_free(zeta: &Permutation) -> Result<Permutation> {
    if !zeta.compose(zeta).is_identity() {
        return Err(Error::input("fixed-point repair expects an involution"));
    }
    let n = zeta.degree();
    let mut fixed = zeta.fixed_points();
    let grow = fixed.len() % 2 == 1;
    let total = if grow { n + 1 } else { n };
    let mut img: Vec<u32> = (0..total as u32).collect();
    for p in 0..n as u32 {
        img[p as usize] = zeta.apply(p);
    }
    if grow {
        fixed.push(n as u32);
    }
    for pair in fixed.chunks(2) {
        img[pair[0] as usize] = pair[1];
        img[pair[1] as usize] = pair[0];
    }
    Permutation::new(img)
}

/// Makes `tau` commute with the anchor exactly: keeps `tau` where the two
/// already commute pointwise, identity elsewhere. Moves at most
/// `d_H([tau, anchor], Id)`.
pub fn fix_commuting(tau: &Permutation, anchor: &Permutation) -> Permutation {
    let n = tau.degree();
    let ta = tau.compose(anchor);
    let at = anchor.compose(tau);
    let mut img: Vec<u32> = (0..n as u32).collect();
    for p in 0..n as u32 {
        if ta.apply(p) == at.apply(p) {
            img[p as usize] = tau.apply(p);
        }
    }
    Permutation::new(img).expect("good set is invariant under tau")
}

/// Repairs a tuple of involutions into a genuine action of the boolean
/// group they generate: points where any product law fails are reset to
/// fixed points for the whole tuple. Each output generator moves at most
/// `4^k * (max pairwise defect)` of the points, `k` the tuple size.
pub fn fix_group_action(gens: &[Permutation]) -> Result<Vec<Permutation>> {
    let k = gens.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    if k > 8 {
        return Err(Error::size(
            "group-action repair supports at most 8 generators",
        ));
    }
    let n = gens[0].degree();
    // f over the boolean cube, ordered products by generator index.
    let mut f: Vec<Permutation> = Vec::with_capacity(1 << k);
    for mask in 0usize..1 << k {
        let mut p = Permutation::identity(n);
        for (i, g) in gens.iter().enumerate() {
            if mask >> i & 1 == 1 {
                p = p.compose(g);
            }
        }
        f.push(p);
    }
    let mut good = vec![true; n];
    for a in 0usize..1 << k {
        for b in 0usize..1 << k {
            let ab = a ^ b;
            for p in 0..n as u32 {
                if f[ab].apply(p) != f[a].apply(f[b].apply(p)) {
                    good[p as usize] = false;
                }
            }
        }
    }
    let mut out = Vec::with_capacity(k);
    for g in gens {
        let mut img: Vec<u32> = (0..n as u32).collect();
        for p in 0..n as u32 {
            if good[p as usize] {
                img[p as usize] = g.apply(p);
            }
        }
        out.push(
            Permutation::new(img)
                .map_err(|_| Error::internal("good set must be generator-invariant"))?,
        );
    }
    Ok(out)
}

/// Report of the rounding pipeline.
#[derive(Clone, Debug)]
pub struct RoundOutcome {
    pub strategy: PermutationStrategy,
    pub displacement_j: Q,
    pub displacements: Vec<Q>,
    pub bound_j: Q,
    /// Per generator; `None` when the owning vertex carries no edge mass, in
    /// which case no displacement bound is claimed.
    pub bounds: Vec<Option<Q>>,
    pub within_bounds: bool,
}

pub const ROUNDING_CONSTANT: i64 = 370;

/// Perturbs an arbitrary strategy into a valid Z-aligned permutation
/// strategy: repair `J` to a fixed-point-free central involution, make all
/// images involutions commuting with `J`, repair each vertex family into a
/// boolean-group action, and reset the orbits where readable generators
/// fail to act as identity-or-`J`.
///
/// `eps_x` are the per-vertex conditional losing probabilities of the input
/// against the compiled test; they enter only the reported displacement
/// bounds `370 * 2^(2L) * L^3 * (eps + eps_x)` (and `370 * eps` for `J`).
pub fn round_to_valid(
    game: &TailoredGame,
    raw: &PermutationStrategy,
    eps_x: &[Q],
) -> Result<RoundOutcome> {
    if raw.gens.len() != game.generators().len() {
        return Err(Error::input("strategy size does not match the game"));
    }
    if eps_x.len() != game.vertex_count() {
        return Err(Error::input("one loss term per vertex required"));
    }
    let n = raw.degree;

    // Stage 1-2: J becomes a fixed-point-free involution, possibly on one
    // extra point; the other generators keep acting on the original points
    // and fix the new one.
    let j1 = fix_involution(&raw.j);
    let j2 = fix_fixed_point_free(&j1)?;
    let total = j2.degree();
    let grow = |p: &Permutation| -> Permutation {
        let mut img: Vec<u32> = (0..total as u32).collect();
        for x in 0..n as u32 {
            img[x as usize] = p.apply(x);
        }
        Permutation::new(img).expect("extension by fixed points")
    };
    let mut gens: Vec<Permutation> = raw.gens.iter().map(grow).collect();

    // Stage 3-4: involutions commuting with J.
    for g in gens.iter_mut() {
        *g = fix_involution(g);
        *g = fix_commuting(g, &j2);
    }

    // Stage 5: per-vertex boolean-group repair.
    for v in 0..game.vertex_count() {
        let ids = game.vertex_generators(v);
        if ids.is_empty() {
            continue;
        }
        let family: Vec<Permutation> = ids.iter().map(|&g| gens[g].clone()).collect();
        let repaired = fix_group_action(&family)?;
        for (&g, p) in ids.iter().zip(repaired) {
            gens[g] = p;
        }
    }
    for g in &gens {
        if !g.commutes_with(&j2) {
            return Err(Error::internal("group repair broke centrality of J"));
        }
    }

    // Stage 6: readable orbit repair. In each vertex orbit a readable
    // generator acts as identity everywhere, as J everywhere, or as neither;
    // orbits with a "neither" readable reset the whole vertex family.
    for v in 0..game.vertex_count() {
        let ids = game.vertex_generators(v);
        if ids.is_empty() {
            continue;
        }
        let mut family: Vec<&Permutation> = vec![&j2];
        family.extend(ids.iter().map(|&g| &gens[g]));
        let spec = spectral(total, &family)?;
        let mut resets: Vec<&Orbit> = Vec::new();
        for orbit in &spec.orbits {
            let mut ok = true;
            for &g in ids {
                if !game.generators()[g].readable {
                    continue;
                }
                // identity-or-J status is constant on the orbit, so one
                // representative point decides it
                let p0 = orbit.points[0];
                let img = gens[g].apply(p0);
                if img != p0 && img != j2.apply(p0) {
                    ok = false;
                    break;
                }
            }
            if !ok {
                resets.push(orbit);
            }
        }
        if !resets.is_empty() {
            let reset_points: Vec<u32> = resets
                .iter()
                .flat_map(|o| o.points.iter().copied())
                .collect();
            for &g in ids {
                let mut img: Vec<u32> = gens[g].images().to_vec();
                for &p in &reset_points {
                    img[p as usize] = p;
                }
                gens[g] = Permutation::new(img)
                    .map_err(|_| Error::internal("orbit reset must stay a permutation"))?;
            }
        }
    }

    let strategy = PermutationStrategy::new(j2, gens)?;
    if !validate(game, &strategy)?.is_empty() || !is_z_aligned(game, &strategy)? {
        return Err(Error::internal(
            "rounding did not produce a valid Z-aligned strategy",
        ));
    }

    // Displacements and claimed bounds.
    let eps: Q = (0..game.vertex_count())
        .map(|v| game.vertex_weight(v) * &eps_x[v])
        .fold(q_zero(), |acc, t| acc + t);
    let lam = game.lambda().max(1);
    let factor = crate::rational::q_int(ROUNDING_CONSTANT)
        * crate::rational::q_int(1i64 << (2 * lam.min(30)))
        * crate::rational::q_int((lam * lam * lam) as i64);
    let displacement_j = hamming(&raw.j, strategy.j())?;
    let bound_j = crate::rational::q_int(ROUNDING_CONSTANT) * &eps;
    let mut displacements = Vec::new();
    let mut bounds = Vec::new();
    let mut within = displacement_j <= bound_j;
    for (g, info) in game.generators().iter().enumerate() {
        let d = hamming(&raw.gens[g], strategy.gen(g))?;
        let mass = game.vertex_weight(info.vertex);
        let bound = if mass.is_zero() {
            None
        } else {
            Some(&factor * (&eps + &eps_x[info.vertex]))
        };
        if let Some(b) = &bound {
            if &d > b {
                within = false;
            }
        }
        displacements.push(d);
        bounds.push(bound);
    }
    Ok(RoundOutcome {
        strategy,
        displacement_j,
        displacements,
        bound_j,
        bounds,
        within_bounds: within,
    })
}
