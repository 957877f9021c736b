//! Finite actions of a free group: permutations per generator, stabilizer
//! windows, Hamming/weighted/edit distances and action enumeration.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::{q_usize, q_zero, Q};
use crate::words::{Alphabet, Word};

/// A permutation of `0..n` in one-line notation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    img: Vec<u32>,
}

impl Permutation {
    pub fn new(img: Vec<u32>) -> Result<Self> {
        let n = img.len();
        let mut seen = vec![false; n];
        for &x in &img {
            if x as usize >= n || seen[x as usize] {
                return Err(Error::input("not a permutation"));
            }
            seen[x as usize] = true;
        }
        Ok(Permutation { img })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            img: (0..n as u32).collect(),
        }
    }

    /// The transposition (i j) on `0..n`.
    pub fn transposition(n: usize, i: u32, j: u32) -> Self {
        let mut img: Vec<u32> = (0..n as u32).collect();
        img.swap(i as usize, j as usize);
        Permutation { img }
    }

    pub fn degree(&self) -> usize {
        self.img.len()
    }

    pub fn apply(&self, x: u32) -> u32 {
        self.img[x as usize]
    }

    pub fn images(&self) -> &[u32] {
        &self.img
    }

    pub fn inverse(&self) -> Permutation {
        let mut img = vec![0u32; self.img.len()];
        for (i, &x) in self.img.iter().enumerate() {
            img[x as usize] = i as u32;
        }
        Permutation { img }
    }

    /// Group product: `(self * other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation {
            img: other.img.iter().map(|&x| self.img[x as usize]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    pub fn commutes_with(&self, other: &Permutation) -> bool {
        self.compose(other) == other.compose(self)
    }

    /// Conjugate `theta self theta^{-1}`.
    pub fn conjugate(&self, theta: &Permutation) -> Permutation {
        theta.compose(self).compose(&theta.inverse())
    }

    pub fn fixed_points(&self) -> Vec<u32> {
        self.img
            .iter()
            .enumerate()
            .filter(|&(i, &x)| i as u32 == x)
            .map(|(i, _)| i as u32)
            .collect()
    }
}

/// A map from the alphabet into `Sym(X)`, i.e. a finite action of the free
/// group. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAction {
    alphabet: Alphabet,
    perms: Vec<Permutation>,
    inv: Vec<Permutation>,
}

impl FiniteAction {
    pub fn new(alphabet: Alphabet, perms: Vec<Permutation>) -> Result<Self> {
        if perms.len() != alphabet.size() {
            return Err(Error::input("one permutation per generator required"));
        }
        let degree = perms.first().map_or(0, |p| p.degree());
        if degree == 0 || perms.iter().any(|p| p.degree() != degree) {
            return Err(Error::input(
                "all permutations must share a positive degree",
            ));
        }
        let inv = perms.iter().map(|p| p.inverse()).collect();
        Ok(FiniteAction {
            alphabet,
            perms,
            inv,
        })
    }

    pub fn trivial(alphabet: Alphabet) -> Self {
        let n = alphabet.size();
        FiniteAction::new(alphabet, vec![Permutation::identity(1); n]).unwrap()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn degree(&self) -> usize {
        self.perms[0].degree()
    }

    pub fn perm(&self, gen: u16) -> &Permutation {
        &self.perms[gen as usize]
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    /// Applies the word to a point, letters acting right to left.
    pub fn act(&self, w: &Word, x: u32) -> Result<u32> {
        if x as usize >= self.degree() {
            return Err(Error::input(format!("point {x} out of range")));
        }
        let mut cur = x;
        for l in w.letters().iter().rev() {
            if l.gen as usize >= self.perms.len() {
                return Err(Error::input(format!(
                    "word uses unknown generator id {}",
                    l.gen
                )));
            }
            cur = if l.inv {
                self.inv[l.gen as usize].apply(cur)
            } else {
                self.perms[l.gen as usize].apply(cur)
            };
        }
        Ok(cur)
    }

    /// The permutation image of a whole word.
    pub fn word_perm(&self, w: &Word) -> Result<Permutation> {
        let mut out = Permutation::identity(self.degree());
        for l in w.letters() {
            let p = if l.inv {
                &self.inv[l.gen as usize]
            } else {
                &self.perms[l.gen as usize]
            };
            if l.gen as usize >= self.perms.len() {
                return Err(Error::input(format!(
                    "word uses unknown generator id {}",
                    l.gen
                )));
            }
            out = out.compose(p);
        }
        Ok(out)
    }

    /// `{w in K : w fixes x}`, in the order of `window`.
    pub fn stabilizer_window(&self, x: u32, window: &[Word]) -> Result<Vec<Word>> {
        let mut out = Vec::new();
        for w in window {
            if self.act(w, x)? == x {
                out.push(w.clone());
            }
        }
        Ok(out)
    }

    /// Block action on the disjoint union of the point sets.
    pub fn direct_sum(&self, other: &FiniteAction) -> Result<FiniteAction> {
        if self.alphabet != other.alphabet {
            return Err(Error::input("direct sum requires matching alphabets"));
        }
        let shift = self.degree() as u32;
        let perms = self
            .perms
            .iter()
            .zip(&other.perms)
            .map(|(p, q)| {
                let mut img: Vec<u32> = p.images().to_vec();
                img.extend(q.images().iter().map(|&x| x + shift));
                Permutation::new(img).unwrap()
            })
            .collect();
        FiniteAction::new(self.alphabet.clone(), perms)
    }
}

/// Strictly nonnegative per-generator weights; zero weights are legal but
/// reported, since they make the weighted distance blind to that generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignificanceFunction {
    weights: Vec<Q>,
}

impl SignificanceFunction {
    pub fn new(weights: Vec<Q>) -> Result<Self> {
        if weights.iter().any(|w| w < &q_zero()) {
            return Err(Error::input("significance weights must be nonnegative"));
        }
        Ok(SignificanceFunction { weights })
    }

    pub fn uniform(n: usize) -> Self {
        SignificanceFunction {
            weights: vec![crate::rational::q_one(); n],
        }
    }

    pub fn weight(&self, gen: u16) -> &Q {
        &self.weights[gen as usize]
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn zero_generators(&self) -> Vec<u16> {
        use num::Zero;
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_zero())
            .map(|(i, _)| i as u16)
            .collect()
    }
}

/// Normalized Hamming distance with errors: `zeta` on a prefix `X` of the
/// point set `Y` of `tau`; points of `Y \ X` always count as disagreements.
pub fn hamming(zeta: &Permutation, tau: &Permutation) -> Result<Q> {
    let (nx, ny) = (zeta.degree(), tau.degree());
    if nx > ny {
        return Err(Error::input(
            "hamming: first permutation must act on the smaller set",
        ));
    }
    let agree = (0..nx as u32)
        .filter(|&x| zeta.apply(x) == tau.apply(x))
        .count();
    Ok(crate::rational::q_one() - q_usize(agree) / q_usize(ny))
}

/// Weighted sum of per-generator Hamming distances. May exceed 1.
pub fn weighted_distance(
    a: &FiniteAction,
    b: &FiniteAction,
    s: &SignificanceFunction,
) -> Result<Q> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::input(
            "weighted distance requires matching alphabets",
        ));
    }
    if a.degree() > b.degree() {
        return Err(Error::input(
            "weighted distance: first action must have the smaller degree",
        ));
    }
    let mut total = q_zero();
    for g in 0..a.alphabet().size() as u16 {
        total += s.weight(g) * hamming(a.perm(g), b.perm(g))?;
    }
    Ok(total)
}

const EDIT_EXACT_MAX_DEGREE: usize = 8;

/// Exact weighted edit distance: minimum of the weighted distance over all
/// conjugations of the larger action. Factorial in the larger degree, so the
/// degree is capped at 8.
pub fn edit_distance_exact(
    a: &FiniteAction,
    b: &FiniteAction,
    s: &SignificanceFunction,
) -> Result<Q> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::input("edit distance requires matching alphabets"));
    }
    let (small, large) = if a.degree() <= b.degree() {
        (a, b)
    } else {
        (b, a)
    };
    let n = large.degree();
    if n > EDIT_EXACT_MAX_DEGREE {
        return Err(Error::size(format!(
            "exact edit distance supports degree <= {EDIT_EXACT_MAX_DEGREE}, got {n}"
        )));
    }
    let mut best: Option<Q> = None;
    let mut items: Vec<u32> = (0..n as u32).collect();
    fn visit(
        items: &mut Vec<u32>,
        k: usize,
        small: &FiniteAction,
        large: &FiniteAction,
        s: &SignificanceFunction,
        best: &mut Option<Q>,
    ) {
        if k == items.len() {
            let theta = Permutation::new(items.clone()).unwrap();
            let conj: Vec<Permutation> =
                large.perms().iter().map(|p| p.conjugate(&theta)).collect();
            let conj_action = FiniteAction::new(large.alphabet().clone(), conj).unwrap();
            let d = weighted_distance(small, &conj_action, s).unwrap();
            if best.as_ref().is_none_or(|b| d < *b) {
                *best = Some(d);
            }
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            visit(items, k + 1, small, large, s, best);
            items.swap(k, i);
        }
    }
    visit(&mut items, 0, small, large, s, &mut best);
    Ok(best.expect("at least the identity conjugator"))
}

/// Upper bound on the exact edit distance via explicit conjugators: the
/// identity embedding, a neighborhood-refinement matching, and a greedy
/// improvement pass. Always >= the exact value.
pub fn edit_distance_upper(
    a: &FiniteAction,
    b: &FiniteAction,
    s: &SignificanceFunction,
) -> Result<Q> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::input("edit distance requires matching alphabets"));
    }
    let (small, large) = if a.degree() <= b.degree() {
        (a, b)
    } else {
        (b, a)
    };
    let n = large.degree();
    let eval = |theta: &Permutation| -> Q {
        let conj: Vec<Permutation> = large.perms().iter().map(|p| p.conjugate(theta)).collect();
        let conj_action = FiniteAction::new(large.alphabet().clone(), conj).unwrap();
        weighted_distance(small, &conj_action, s).unwrap()
    };

    let mut candidates = vec![Permutation::identity(n)];
    candidates.push(refinement_matching(small, large));
    let mut best_theta = candidates[0].clone();
    let mut best = eval(&best_theta);
    for c in &candidates[1..] {
        let d = eval(c);
        if d < best {
            best = d;
            best_theta = c.clone();
        }
    }
    // First-improvement sweep over transpositions, bounded.
    let mut improved = true;
    let mut rounds = 0;
    while improved && rounds < 4 {
        improved = false;
        rounds += 1;
        for i in 0..n as u32 {
            for j in (i + 1)..n as u32 {
                let cand = Permutation::transposition(n, i, j).compose(&best_theta);
                let d = eval(&cand);
                if d < best {
                    best = d;
                    best_theta = cand;
                    improved = true;
                }
            }
        }
    }
    Ok(best)
}

/// Builds a conjugator matching points with similar Schreier-graph
/// neighborhoods, via parallel color refinement on both actions.
fn refinement_matching(small: &FiniteAction, large: &FiniteAction) -> Permutation {
    let n = large.degree();
    let gens = small.alphabet().size();
    let color_rounds = 3;
    let colors_of = |action: &FiniteAction| -> Vec<u64> {
        let deg = action.degree();
        let mut colors = vec![0u64; deg];
        for _ in 0..color_rounds {
            let mut next = Vec::with_capacity(deg);
            for x in 0..deg as u32 {
                let mut sig: Vec<u64> = vec![colors[x as usize]];
                for g in 0..gens as u16 {
                    sig.push(colors[action.perm(g).apply(x) as usize]);
                    sig.push(colors[action.perm(g).inverse().apply(x) as usize]);
                }
                let mut h = 1469598103934665603u64;
                for v in sig {
                    h ^= v;
                    h = h.wrapping_mul(1099511628211);
                }
                next.push(h);
            }
            colors = next;
        }
        colors
    };
    let cs = colors_of(small);
    let cl = colors_of(large);
    // theta maps large-side points; we want theta(p) to sit where a similar
    // small-side point sits. Greedily pair equal colors, then leftovers.
    let mut by_color: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for (x, &c) in cl.iter().enumerate() {
        by_color.entry(c).or_default().push(x as u32);
    }
    let mut img = vec![u32::MAX; n];
    for (x, &c) in cs.iter().enumerate() {
        if let Some(list) = by_color.get_mut(&c) {
            if let Some(p) = list.pop() {
                img[p as usize] = x as u32;
            }
        }
    }
    let mut remaining: Vec<u32> = (0..n as u32).filter(|&t| !img.contains(&t)).collect();
    remaining.sort_unstable();
    let mut ri = 0;
    for slot in img.iter_mut() {
        if *slot == u32::MAX {
            *slot = remaining[ri];
            ri += 1;
        }
    }
    Permutation::new(img).unwrap_or_else(|_| Permutation::identity(n))
}

/// Degrees up to this bound are enumerated exhaustively, pruned up to
/// simultaneous conjugacy; above it the stream switches to seeded random
/// sampling (restart points for value-guided local search).
pub const EXHAUSTIVE_DEGREE_LIMIT: usize = 5;

const RANDOM_PER_DEGREE: usize = 32;

/// Deterministic stream of finite actions, degrees ascending.
pub struct ActionEnumerator {
    alphabet: Alphabet,
    max_degree: usize,
    budget: usize,
    yielded: usize,
    degree: usize,
    state: DegreeState,
    rng: ChaCha8Rng,
}

enum DegreeState {
    Fresh,
    Exhaustive {
        perms: Vec<Permutation>,
        tuple: Vec<usize>,
        done: bool,
    },
    Random {
        emitted: usize,
    },
}

impl ActionEnumerator {
    pub fn new(alphabet: Alphabet, max_degree: usize, budget: usize, seed: u64) -> Self {
        ActionEnumerator {
            alphabet,
            max_degree: max_degree.max(1),
            budget,
            yielded: 0,
            degree: 0,
            state: DegreeState::Fresh,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5347_5421),
        }
    }

    pub(crate) fn all_perms(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut items: Vec<u32> = (0..n as u32).collect();
        fn rec(items: &mut Vec<u32>, k: usize, out: &mut Vec<Permutation>) {
            if k == items.len() {
                out.push(Permutation::new(items.clone()).unwrap());
                return;
            }
            for i in k..items.len() {
                items.swap(k, i);
                rec(items, k + 1, out);
                items.swap(k, i);
            }
        }
        rec(&mut items, 0, &mut out);
        out.sort();
        out
    }

    /// True iff the tuple is lexicographically minimal in its simultaneous
    /// conjugacy class. Conjugacy pruning is value-preserving because test
    /// values of actions are conjugation-invariant.
    fn canonical(tuple: &[&Permutation], all: &[Permutation]) -> bool {
        for theta in all {
            let mut cmp = std::cmp::Ordering::Equal;
            for p in tuple {
                cmp = p.conjugate(theta).images().cmp(p.images());
                if cmp != std::cmp::Ordering::Equal {
                    break;
                }
            }
            if cmp == std::cmp::Ordering::Less {
                return false;
            }
        }
        true
    }

    fn advance_degree(&mut self) -> bool {
        self.degree += 1;
        if self.degree > self.max_degree {
            return false;
        }
        self.state = if self.degree <= EXHAUSTIVE_DEGREE_LIMIT {
            DegreeState::Exhaustive {
                perms: Self::all_perms(self.degree),
                tuple: vec![0; self.alphabet.size()],
                done: false,
            }
        } else {
            DegreeState::Random { emitted: 0 }
        };
        true
    }

    fn random_action(&mut self) -> FiniteAction {
        let n = self.degree;
        let perms: Vec<Permutation> = (0..self.alphabet.size())
            .map(|_| {
                let mut img: Vec<u32> = (0..n as u32).collect();
                for i in (1..n).rev() {
                    let j = self.rng.gen_range(0..=i);
                    img.swap(i, j);
                }
                Permutation::new(img).unwrap()
            })
            .collect();
        FiniteAction::new(self.alphabet.clone(), perms).unwrap()
    }
}

impl Iterator for ActionEnumerator {
    type Item = FiniteAction;

    fn next(&mut self) -> Option<FiniteAction> {
        if self.yielded >= self.budget {
            return None;
        }
        loop {
            match &mut self.state {
                DegreeState::Fresh => {
                    if !self.advance_degree() {
                        return None;
                    }
                }
                DegreeState::Exhaustive { perms, tuple, done } => {
                    if *done {
                        if !self.advance_degree() {
                            return None;
                        }
                        continue;
                    }
                    let current: Vec<&Permutation> = tuple.iter().map(|&i| &perms[i]).collect();
                    let keep = Self::canonical(&current, perms);
                    let action = keep.then(|| {
                        FiniteAction::new(
                            self.alphabet.clone(),
                            current.iter().map(|p| (*p).clone()).collect(),
                        )
                        .unwrap()
                    });
                    let mut carry = true;
                    for slot in tuple.iter_mut().rev() {
                        *slot += 1;
                        if *slot == perms.len() {
                            *slot = 0;
                        } else {
                            carry = false;
                            break;
                        }
                    }
                    if carry {
                        *done = true;
                    }
                    if let Some(action) = action {
                        self.yielded += 1;
                        return Some(action);
                    }
                }
                DegreeState::Random { emitted } => {
                    // On the final degree the random stream runs until the
                    // budget is spent; intermediate degrees get a fixed quota.
                    if self.degree < self.max_degree && *emitted >= RANDOM_PER_DEGREE {
                        if !self.advance_degree() {
                            return None;
                        }
                        continue;
                    }
                    *emitted += 1;
                    let action = self.random_action();
                    self.yielded += 1;
                    return Some(action);
                }
            }
        }
    }
}

/// Convenience wrapper used by the search layer.
pub fn enumerate_actions(
    alphabet: &Alphabet,
    max_degree: usize,
    budget: usize,
    seed: u64,
) -> ActionEnumerator {
    ActionEnumerator::new(alphabet.clone(), max_degree, budget, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, q_one};

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    fn a_only() -> Alphabet {
        Alphabet::new(["a"]).unwrap()
    }

    fn act1(img: Vec<u32>) -> FiniteAction {
        FiniteAction::new(a_only(), vec![Permutation::new(img).unwrap()]).unwrap()
    }

    #[test]
    fn act_examples() {
        let swap = act1(vec![1, 0]);
        let aa = a_only().parse_word("a a").unwrap();
        assert_eq!(swap.act(&aa, 0).unwrap(), 0);
        assert_eq!(swap.act(&Word::identity(), 1).unwrap(), 1);
        let cycle = act1(vec![1, 2, 0]);
        assert_eq!(
            cycle.act(&a_only().parse_word("a^-1").unwrap(), 0).unwrap(),
            2
        );
        assert!(swap.act(&aa, 9).is_err());
    }

    #[test]
    fn stabilizer_window_examples() {
        let swap = act1(vec![1, 0]);
        let k: Vec<Word> = ["a", "a a"]
            .iter()
            .map(|s| a_only().parse_word(s).unwrap())
            .collect();
        assert_eq!(swap.stabilizer_window(0, &k).unwrap(), vec![k[1].clone()]);
        let trivial = FiniteAction::trivial(a_only());
        assert_eq!(trivial.stabilizer_window(0, &k).unwrap(), k);
        let cyc = act1(vec![1, 2, 0]);
        let k3: Vec<Word> = ["a", "a a", "a a a"]
            .iter()
            .map(|s| a_only().parse_word(s).unwrap())
            .collect();
        assert_eq!(cyc.stabilizer_window(0, &k3).unwrap(), vec![k3[2].clone()]);
    }

    #[test]
    fn hamming_examples() {
        let id4 = Permutation::identity(4);
        assert_eq!(hamming(&id4, &id4).unwrap(), q_zero());
        let swap4 = Permutation::transposition(4, 0, 1);
        assert_eq!(hamming(&swap4, &id4).unwrap(), q(1, 2));
        let id2 = Permutation::identity(2);
        assert_eq!(hamming(&id2, &id4).unwrap(), q(1, 2));
        assert!(hamming(&id4, &id2).is_err());
    }

    #[test]
    fn hamming_metric_properties() {
        let perms: Vec<Permutation> = ActionEnumerator::all_perms(4);
        for p in &perms {
            for q_ in &perms {
                assert_eq!(hamming(p, q_).unwrap(), hamming(q_, p).unwrap());
                for r in perms.iter().step_by(7) {
                    let d_pq = hamming(p, q_).unwrap();
                    let d_qr = hamming(q_, r).unwrap();
                    let d_pr = hamming(p, r).unwrap();
                    assert!(d_pr <= d_pq + d_qr);
                }
            }
        }
    }

    #[test]
    fn weighted_examples() {
        let sig = SignificanceFunction::new(vec![q(2, 1), q(3, 1)]).unwrap();
        let x = FiniteAction::new(
            ab(),
            vec![
                Permutation::transposition(2, 0, 1),
                Permutation::identity(2),
            ],
        )
        .unwrap();
        assert_eq!(weighted_distance(&x, &x, &sig).unwrap(), q_zero());
        // d_H(a) = 1/2, d_H(b) = 1/3 needs degree 6 on one side; use direct mix
        let a6 = FiniteAction::new(
            ab(),
            vec![Permutation::identity(6), Permutation::identity(6)],
        )
        .unwrap();
        let b6 = FiniteAction::new(
            ab(),
            vec![
                Permutation::new(vec![1, 0, 3, 2, 5, 4]).unwrap(),
                Permutation::new(vec![1, 0, 2, 3, 4, 5]).unwrap(),
            ],
        )
        .unwrap();
        // d_H(a)=1, d_H(b)=1/3 -> 2*1 + 3*(1/3) = 3
        assert_eq!(weighted_distance(&a6, &b6, &sig).unwrap(), q(3, 1));
        let one_gen = SignificanceFunction::uniform(1);
        let u = act1(vec![0, 1]);
        let v = act1(vec![1, 0, 2, 3]);
        // single generator, id on 2 pts vs transposition on 4: 1 - 0/4... points 0,1 move
        assert_eq!(weighted_distance(&u, &v, &one_gen).unwrap(), q_one());
    }

    #[test]
    fn edit_exact_examples() {
        let sig = SignificanceFunction::uniform(1);
        let x = act1(vec![1, 2, 0, 3]);
        assert_eq!(edit_distance_exact(&x, &x, &sig).unwrap(), q_zero());
        let theta = Permutation::new(vec![2, 0, 3, 1]).unwrap();
        let conj = act1(x.perm(0).conjugate(&theta).images().to_vec());
        assert_eq!(edit_distance_exact(&x, &conj, &sig).unwrap(), q_zero());
        assert!(
            edit_distance_exact(&act1((0..9).collect()), &act1((0..9).collect()), &sig).is_err()
        );
    }

    #[test]
    fn edit_exact_matches_bruteforce_on_4() {
        // Independent brute force, written as a plain triple loop.
        let sig = SignificanceFunction::new(vec![q_one(), q(2, 1)]).unwrap();
        let x = FiniteAction::new(
            ab(),
            vec![
                Permutation::new(vec![1, 0, 3, 2]).unwrap(),
                Permutation::new(vec![2, 3, 0, 1]).unwrap(),
            ],
        )
        .unwrap();
        let y = FiniteAction::new(
            ab(),
            vec![
                Permutation::new(vec![0, 2, 1, 3]).unwrap(),
                Permutation::new(vec![3, 1, 2, 0]).unwrap(),
            ],
        )
        .unwrap();
        let mut best: Option<Q> = None;
        for theta in ActionEnumerator::all_perms(4) {
            let mut d = q_zero();
            for g in 0..2u16 {
                d += sig.weight(g) * hamming(x.perm(g), &y.perm(g).conjugate(&theta)).unwrap();
            }
            if best.as_ref().is_none_or(|b| d < *b) {
                best = Some(d);
            }
        }
        assert_eq!(edit_distance_exact(&x, &y, &sig).unwrap(), best.unwrap());
    }

    #[test]
    fn edit_exact_conjugation_invariant() {
        let sig = SignificanceFunction::uniform(1);
        let x = act1(vec![1, 0, 3, 2]);
        let y = act1(vec![0, 2, 1, 3]);
        let d = edit_distance_exact(&x, &y, &sig).unwrap();
        for theta in ActionEnumerator::all_perms(4).into_iter().step_by(5) {
            let y2 = act1(y.perm(0).conjugate(&theta).images().to_vec());
            assert_eq!(edit_distance_exact(&x, &y2, &sig).unwrap(), d);
        }
    }

    #[test]
    fn edit_upper_bounds_exact() {
        let sig = SignificanceFunction::uniform(1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(2..=6);
            let mk = |rng: &mut ChaCha8Rng| {
                let mut img: Vec<u32> = (0..n as u32).collect();
                for i in (1..n).rev() {
                    let j = rng.gen_range(0..=i);
                    img.swap(i, j);
                }
                act1(img)
            };
            let x = mk(&mut rng);
            let y = mk(&mut rng);
            let exact = edit_distance_exact(&x, &y, &sig).unwrap();
            let upper = edit_distance_upper(&x, &y, &sig).unwrap();
            assert!(upper >= exact);
        }
        // identical actions
        let x = act1(vec![1, 2, 0]);
        assert_eq!(edit_distance_upper(&x, &x, &sig).unwrap(), q_zero());
    }

    #[test]
    fn edit_upper_padded_fixed_point() {
        // degree-3 action vs itself plus a fixed point: at most 1/4 per unit weight
        let sig = SignificanceFunction::uniform(1);
        let x = act1(vec![1, 2, 0]);
        let y = act1(vec![1, 2, 0, 3]);
        let upper = edit_distance_upper(&x, &y, &sig).unwrap();
        assert!(upper <= q(1, 4));
    }

    #[test]
    fn enumerate_counts() {
        // single generator: one action per cycle type (conjugacy class)
        for (degree, classes) in [(2usize, 2usize), (3, 3), (4, 5), (5, 7)] {
            let found = enumerate_actions(&a_only(), degree, 10_000, 0)
                .filter(|a| a.degree() == degree)
                .count();
            assert_eq!(found, classes, "degree {degree}");
        }
        // two generators on two points: conjugation is trivial, all four
        // pairs survive the filter
        let pairs = enumerate_actions(&ab(), 2, 10_000, 0)
            .filter(|a| a.degree() == 2)
            .count();
        assert_eq!(pairs, 4);
    }

    #[test]
    fn enumerate_yields_valid_and_deterministic() {
        let a: Vec<FiniteAction> = enumerate_actions(&ab(), 7, 120, 9).collect();
        let b: Vec<FiniteAction> = enumerate_actions(&ab(), 7, 120, 9).collect();
        assert_eq!(a.len(), 120);
        assert_eq!(a, b);
        for action in &a {
            for g in 0..2u16 {
                Permutation::new(action.perm(g).images().to_vec()).unwrap();
            }
        }
    }

    #[test]
    fn direct_sum_examples() {
        let id2 = FiniteAction::new(a_only(), vec![Permutation::identity(2)]).unwrap();
        let id3 = FiniteAction::new(a_only(), vec![Permutation::identity(3)]).unwrap();
        let s = id2.direct_sum(&id3).unwrap();
        assert_eq!(s.degree(), 5);
        assert!(s.perm(0).is_identity());
    }
}
