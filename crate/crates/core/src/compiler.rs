//! Compiles a tailored game into a subgroup test over the game generators
//! plus the central slot `J`. Each edge becomes one challenge whose decision
//! runs four membership check groups against the sampled subgroup:
//!
//! 1. `J` absent, `J^2` present, `J` commutes with every edge generator;
//! 2. every edge generator squares in, per-vertex commutators in;
//! 3. every readable generator `X` has `X` or `J X` in;
//! 4. the parity words selected by the readable bits recovered in check 3.
//!
//! A subgroup passing checks 1-3 on all points is exactly a Z-aligned
//! permutation strategy, and check 4 transcribes the game's parity
//! constraints into subgroup membership.

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;

use crate::actions::{FiniteAction, Permutation};
use crate::error::{Error, Result};
use crate::games::{GenId, LinearConstraint, TailoredGame};
use crate::perm::{self, PermutationStrategy};
use crate::rational::{q, q_usize, q_zero, Q};
use crate::subgroup_test::{Challenge, Decision, SubgroupTest};
use crate::words::{Alphabet, Letter, Word};

/// Cap on the explicit word list of one compiled challenge.
pub const WINDOW_WORDS_CAP: usize = 100_000;

/// One compiled challenge: the membership checks of a single edge, with the
/// queried words precomputed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledChallenge {
    pub edge: usize,
    j_word: Word,
    j_square: Word,
    /// `[J, X]` for every edge generator, then `X^2`, then per-vertex
    /// commutators.
    structure_words: Vec<Word>,
    /// How many leading entries of `structure_words` belong to check 1.
    j_commutator_count: usize,
    /// Readable recovery pairs `(X, J X)` in edge order.
    readable_words: Vec<(Word, Word)>,
    /// Parity words per readable assignment (keyed by edge readable bits).
    parity_words: BTreeMap<Vec<bool>, Vec<Word>>,
}

/// Which check group failed first, if any.
pub fn check_labels() -> [&'static str; 4] {
    ["check1", "check2", "check3", "check4"]
}

impl CompiledChallenge {
    /// Runs the checks; returns the first failing group (1-4) or None.
    pub fn eval<F: FnMut(&Word) -> bool>(&self, mut member: F) -> Option<u8> {
        if member(&self.j_word) || !member(&self.j_square) {
            return Some(1);
        }
        let (jx, rest) = self.structure_words.split_at(self.j_commutator_count);
        for w in jx {
            if !member(w) {
                return Some(1);
            }
        }
        for w in rest {
            if !member(w) {
                return Some(2);
            }
        }
        let mut bits = Vec::with_capacity(self.readable_words.len());
        for (x, jx) in &self.readable_words {
            let plain = member(x);
            let flipped = member(jx);
            // both would force J inside, which check 1 already excluded;
            // guard anyway against windows fed directly
            if plain == flipped {
                return Some(3);
            }
            bits.push(flipped);
        }
        let words = self
            .parity_words
            .get(&bits)
            .expect("parity table is total by construction");
        for w in words {
            if !member(w) {
                return Some(4);
            }
        }
        None
    }

    pub fn window(&self) -> BTreeSet<Word> {
        let mut out: BTreeSet<Word> = BTreeSet::new();
        out.insert(self.j_word.clone());
        out.insert(self.j_square.clone());
        out.extend(self.structure_words.iter().cloned());
        for (a, b) in &self.readable_words {
            out.insert(a.clone());
            out.insert(b.clone());
        }
        for ws in self.parity_words.values() {
            out.extend(ws.iter().cloned());
        }
        out
    }
}

/// A compiled test plus its provenance.
#[derive(Clone, Debug)]
pub struct CompiledTest {
    pub test: SubgroupTest,
    pub game: TailoredGame,
    pub lambda: usize,
    /// Challenge index -> edge index (the identity here, kept explicit).
    pub edge_of_challenge: Vec<usize>,
}

/// Alphabet of the compiled test: `J` first, then the game generators in
/// their global order.
pub fn compiled_alphabet(game: &TailoredGame) -> Result<Alphabet> {
    let mut names = vec!["J".to_string()];
    names.extend(game.generator_names());
    Alphabet::new(names)
}

fn gen_letter(g: GenId) -> Letter {
    Letter::new(g as u16 + 1, false)
}

fn j_letter() -> Letter {
    Letter::new(0, false)
}

fn parity_word(game: &TailoredGame, edge: usize, alpha: &LinearConstraint) -> Word {
    // J power first, then readable generators, then unreadable ones; within
    // each class x's block before y's, by index. Any fixed order works for
    // accepted subgroups because check 2 makes the letters commute there.
    let mut letters = Vec::new();
    if alpha.j {
        letters.push(j_letter());
    }
    let gens = game.edge_generators(edge);
    for &g in gens.iter().filter(|g| game.generators()[**g].readable) {
        if alpha.gens.contains(&g) {
            letters.push(gen_letter(g));
        }
    }
    for &g in gens.iter().filter(|g| !game.generators()[**g].readable) {
        if alpha.gens.contains(&g) {
            letters.push(gen_letter(g));
        }
    }
    Word::reduce(letters)
}

fn compile_challenge(game: &TailoredGame, edge: usize) -> Result<(CompiledChallenge, Vec<Word>)> {
    let gens = game.edge_generators(edge);
    let e = &game.edges()[edge];
    let j = Word::from_letter(j_letter());
    let j_square = j.concat(&j);

    let mut structure_words = Vec::new();
    for &g in &gens {
        structure_words.push(Word::commutator(&j, &Word::from_letter(gen_letter(g))));
    }
    let j_commutator_count = structure_words.len();
    for &g in &gens {
        let x = Word::from_letter(gen_letter(g));
        structure_words.push(x.concat(&x));
    }
    for v in [e.x, e.y] {
        let vg = game.vertex_generators(v);
        for (i, &a) in vg.iter().enumerate() {
            for &b in &vg[i + 1..] {
                structure_words.push(Word::commutator(
                    &Word::from_letter(gen_letter(a)),
                    &Word::from_letter(gen_letter(b)),
                ));
            }
        }
    }

    let readables = game.edge_readables(edge);
    let readable_words: Vec<(Word, Word)> = readables
        .iter()
        .map(|&g| {
            let x = Word::from_letter(gen_letter(g));
            (x.clone(), j.concat(&x))
        })
        .collect();

    let mut parity_words = BTreeMap::new();
    if readables.len() > 20 {
        return Err(Error::size("too many readable bits on one edge"));
    }
    for mask in 0usize..1 << readables.len() {
        let bits: Vec<bool> = (0..readables.len()).map(|i| mask >> i & 1 == 1).collect();
        let constraints = game.constraints_for(edge, &bits)?;
        let mut words: Vec<Word> = constraints
            .iter()
            .map(|alpha| parity_word(game, edge, alpha))
            .collect();
        words.sort();
        words.dedup();
        parity_words.insert(bits, words);
    }

    let challenge = CompiledChallenge {
        edge,
        j_word: j,
        j_square,
        structure_words,
        readable_words,
        parity_words,
        j_commutator_count,
    };
    let window: Vec<Word> = challenge.window().into_iter().collect();
    if window.len() > WINDOW_WORDS_CAP {
        return Err(Error::size("compiled challenge window exceeds the cap"));
    }
    Ok((challenge, window))
}

/// Compiles the game into a subgroup test: one challenge per edge, challenge
/// distribution equal to the edge distribution.
pub fn compile(game: &TailoredGame) -> Result<CompiledTest> {
    let alphabet = compiled_alphabet(game)?;
    let mut challenges = Vec::new();
    let mut edge_of_challenge = Vec::new();
    for (ei, e) in game.edges().iter().enumerate() {
        let (compiled, window) = compile_challenge(game, ei)?;
        let challenge = Challenge::new(window, Decision::Compiled(Box::new(compiled)))?;
        challenges.push((e.weight.clone(), challenge));
        edge_of_challenge.push(ei);
    }
    let test = SubgroupTest::new(alphabet, challenges)?;
    Ok(CompiledTest {
        test,
        game: game.clone(),
        lambda: game.lambda(),
        edge_of_challenge,
    })
}

/// Views a permutation strategy as a finite action over the compiled
/// alphabet (`J` first), ready for evaluation against the compiled test.
pub fn strategy_to_irs(game: &TailoredGame, sigma: &PermutationStrategy) -> Result<FiniteAction> {
    let alphabet = compiled_alphabet(game)?;
    let mut perms = vec![sigma.j().clone()];
    perms.extend(sigma.gens().iter().cloned());
    FiniteAction::new(alphabet, perms)
}

/// Reads a finite action over the compiled alphabet back as a raw strategy.
pub fn action_to_strategy(
    game: &TailoredGame,
    action: &FiniteAction,
) -> Result<PermutationStrategy> {
    let alphabet = compiled_alphabet(game)?;
    if action.alphabet() != &alphabet {
        return Err(Error::input(
            "action alphabet does not match the compiled test",
        ));
    }
    let j = action.perm(0).clone();
    let gens: Vec<Permutation> = (1..alphabet.size() as u16)
        .map(|g| action.perm(g).clone())
        .collect();
    PermutationStrategy::new(j, gens)
}

/// Per-check failure masses and the value of the compiled test against an
/// action.
#[derive(Clone, Debug)]
pub struct CheckMasses {
    pub value: Q,
    /// Probability mass lost at each check group, indexed 0..4.
    pub fail_mass: [Q; 4],
    /// Conditional losing probability given an edge touching each vertex.
    pub eps_x: Vec<Q>,
}

pub fn check_masses(compiled: &CompiledTest, action: &FiniteAction) -> Result<CheckMasses> {
    let degree = action.degree();
    let mut fail_mass = [q_zero(), q_zero(), q_zero(), q_zero()];
    let mut lost_at_vertex = vec![q_zero(); compiled.game.vertex_count()];
    let mut value = q_zero();
    for ((weight, challenge), &edge) in compiled
        .test
        .challenges()
        .iter()
        .zip(&compiled.edge_of_challenge)
    {
        let Decision::Compiled(cc) = challenge.decision() else {
            return Err(Error::internal(
                "compiled test holds a non-compiled challenge",
            ));
        };
        let mut lost = 0usize;
        for x in 0..degree as u32 {
            match cc.eval(|w| action.act(w, x).expect("validated point") == x) {
                None => {}
                Some(stage) => {
                    lost += 1;
                    fail_mass[(stage - 1) as usize] += weight * q(1, degree as i64);
                }
            }
        }
        let lose_prob = q_usize(lost) / q_usize(degree);
        value += weight * (crate::rational::q_one() - &lose_prob);
        let e = &compiled.game.edges()[edge];
        lost_at_vertex[e.x] += weight * &lose_prob;
        lost_at_vertex[e.y] += weight * &lose_prob;
    }
    let mut eps_x = Vec::with_capacity(compiled.game.vertex_count());
    for v in 0..compiled.game.vertex_count() {
        let mut incident = q_zero();
        for e in compiled.game.edges() {
            if e.x == v || e.y == v {
                incident += &e.weight;
            }
        }
        if incident.is_zero() {
            eps_x.push(q_zero());
        } else {
            eps_x.push(&lost_at_vertex[v] / incident);
        }
    }
    Ok(CheckMasses {
        value,
        fail_mass,
        eps_x,
    })
}

/// End-to-end transfer: evaluate the compiled test on a raw action, round it
/// into a valid Z-aligned strategy, evaluate the game on the result, and
/// verify the soundness inequality
/// `val(game) >= 1 - 2 * 2^(2L) * (1 - val(test, rounded))`.
#[derive(Clone, Debug)]
pub struct TransferReport {
    pub lambda: usize,
    pub test_value_raw: Q,
    pub fail_mass: [Q; 4],
    pub test_value_rounded: Q,
    pub game_value_rounded: Q,
    pub soundness_bound: Q,
    pub bound_satisfied: bool,
    pub round: perm::RoundOutcome,
}

pub fn transfer_report(game: &TailoredGame, action: &FiniteAction) -> Result<TransferReport> {
    let compiled = compile(game)?;
    let masses = check_masses(&compiled, action)?;
    let raw = action_to_strategy(game, action)?;
    let round = perm::round_to_valid(game, &raw, &masses.eps_x)?;
    let rounded_action = strategy_to_irs(game, &round.strategy)?;
    let test_value_rounded = compiled.test.value_against_action(&rounded_action)?;
    let game_value_rounded = perm::game_value(game, &round.strategy)?;
    let lambda = game.lambda();
    let soundness_bound = crate::rational::q_one()
        - q(2, 1)
            * crate::rational::q_int(1i64 << (2 * lambda.min(30)))
            * (crate::rational::q_one() - &test_value_rounded);
    let bound_satisfied = game_value_rounded >= soundness_bound;
    Ok(TransferReport {
        lambda,
        test_value_raw: masses.value,
        fail_mass: masses.fail_mass,
        test_value_rounded,
        game_value_rounded,
        soundness_bound,
        bound_satisfied,
        round,
    })
}

/// Exact significance of the compiled test, with the claimed bounds
/// `s(J) <= 4 * 2^(2L)` and `s(X) <= mu(x) * 4 * 2^(2L)`.
#[derive(Clone, Debug)]
pub struct SignificanceAudit {
    pub j_weight: Q,
    pub j_bound: Q,
    /// Per game generator: name, weight, bound.
    pub generators: Vec<(String, Q, Q)>,
    pub ok: bool,
}

pub fn significance_audit(compiled: &CompiledTest) -> Result<SignificanceAudit> {
    let sig = compiled.test.significance();
    let lambda = compiled.lambda.max(1);
    let cap = q(4, 1) * crate::rational::q_int(1i64 << (2 * lambda.min(30)));
    let j_weight = sig.weight(0).clone();
    let mut ok = j_weight <= cap;
    let mut generators = Vec::new();
    for (g, info) in compiled.game.generators().iter().enumerate() {
        let weight = sig.weight(g as u16 + 1).clone();
        let bound = compiled.game.vertex_weight(info.vertex) * &cap;
        if weight > bound {
            ok = false;
        }
        generators.push((info.name.clone(), weight, bound));
    }
    if !ok {
        return Err(Error::internal("significance bound violated: compiler bug"));
    }
    Ok(SignificanceAudit {
        j_weight,
        j_bound: cap,
        generators,
        ok: true,
    })
}
