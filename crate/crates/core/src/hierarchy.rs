//! Sandwich bounds for test values: exact LP upper bounds over
//! pseudo-subgroup polytopes, and lower bounds from enumeration of finite
//! actions with value-guided local search at larger degrees.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num::{One, Zero};
use rayon::prelude::*;

use crate::actions::{enumerate_actions, FiniteAction, Permutation, EXHAUSTIVE_DEGREE_LIMIT};
use crate::error::{Error, Result};
use crate::lp::{self, Lp};
use crate::rational::{q_usize, q_zero, Q};
use crate::stallings::is_pseudo_subgroup;
use crate::subgroup_test::SubgroupTest;
use crate::words::{Alphabet, Letter, Word};

/// Hard cap on window size: the variable count is `2^|B|`.
pub const DEFAULT_WINDOW_CAP: usize = 14;

pub const DEFAULT_LP_ITERATION_CAP: usize = 200_000;

/// One equality row over subset-masks of the window, `sum coeff * pi = 0`.
pub type SparseRow = Vec<(usize, i32)>;

/// The rational polytope of window distributions that are concentrated on
/// pseudo subgroups and invariant under conjugation wherever conjugation
/// stays inside the window.
#[derive(Clone, Debug)]
pub struct PseudoIrsPolytope {
    window: Vec<Word>,
    alphabet: Alphabet,
    /// Per subset-mask: is the subset a pseudo subgroup of the window?
    pseudo: Vec<bool>,
    /// Atom-level invariance equalities (rhs 0), deduplicated.
    rows: Vec<SparseRow>,
}

impl PseudoIrsPolytope {
    /// Builds the polytope over the given window. `window_cap` bounds
    /// `|B|`; the default (14) means at most 16384 variables.
    pub fn build(alphabet: &Alphabet, window: &[Word], window_cap: usize) -> Result<Self> {
        let mut sorted = window.to_vec();
        sorted.sort();
        sorted.dedup();
        let m = sorted.len();
        if m == 0 {
            return Err(Error::input("empty window"));
        }
        if m > window_cap || m > 24 {
            return Err(Error::size(format!(
                "window of size {m} exceeds cap {} (2^{m} variables, ~{} bytes)",
                window_cap.min(24),
                (1u64 << m.min(40)) * 48
            )));
        }
        let gens = alphabet.size();

        // Screen every subset for pseudo-subgroup status.
        let window_set: BTreeSet<Word> = sorted.iter().cloned().collect();
        let pseudo: Vec<bool> = (0usize..1 << m)
            .into_par_iter()
            .map(|mask| {
                let a: BTreeSet<Word> = sorted
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, w)| w.clone())
                    .collect();
                is_pseudo_subgroup(gens, &a, &window_set)
                    .expect("A is a subset of B by construction")
                    .verdict
            })
            .collect();

        // Invariance rows. For each signed generator s, let B_s be the part
        // of the window whose s-conjugate stays inside the window; the
        // distribution of A ∩ B_s must match the distribution of the
        // conjugated window part, atom by atom.
        let index: BTreeMap<&Word, usize> =
            sorted.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let mut rows: Vec<SparseRow> = Vec::new();
        let mut seen: HashSet<Vec<(usize, i32)>> = HashSet::new();
        for gen in 0..gens as u16 {
            for inv in [false, true] {
                let s = Letter::new(gen, inv);
                let mut b_s: Vec<usize> = Vec::new();
                let mut conj_of: Vec<usize> = Vec::new();
                for (i, w) in sorted.iter().enumerate() {
                    let c = w.conjugate_by(s);
                    if let Some(&j) = index.get(&c) {
                        b_s.push(i);
                        conj_of.push(j);
                    }
                }
                let k = b_s.len();
                if k == 0 {
                    continue;
                }
                if k > 20 {
                    return Err(Error::size(
                        "conjugation-stable part of the window too large",
                    ));
                }
                for atom in 0usize..1 << k {
                    // +1 on masks restricting to `atom` on B_s, -1 on masks
                    // restricting to the conjugated atom on s·B_s·s^-1.
                    let mut row: BTreeMap<usize, i32> = BTreeMap::new();
                    let free: Vec<usize> = (0..m).filter(|i| !b_s.contains(i)).collect();
                    let mut base = 0usize;
                    for (pos, &i) in b_s.iter().enumerate() {
                        if atom >> pos & 1 == 1 {
                            base |= 1 << i;
                        }
                    }
                    for fmask in 0usize..1 << free.len() {
                        let mut mask = base;
                        for (pos, &i) in free.iter().enumerate() {
                            if fmask >> pos & 1 == 1 {
                                mask |= 1 << i;
                            }
                        }
                        *row.entry(mask).or_insert(0) += 1;
                    }
                    let conj_positions: Vec<usize> = conj_of.clone();
                    let conj_free: Vec<usize> =
                        (0..m).filter(|i| !conj_positions.contains(i)).collect();
                    let mut conj_base = 0usize;
                    for (pos, &j) in conj_positions.iter().enumerate() {
                        if atom >> pos & 1 == 1 {
                            conj_base |= 1 << j;
                        }
                    }
                    for fmask in 0usize..1 << conj_free.len() {
                        let mut mask = conj_base;
                        for (pos, &i) in conj_free.iter().enumerate() {
                            if fmask >> pos & 1 == 1 {
                                mask |= 1 << i;
                            }
                        }
                        *row.entry(mask).or_insert(0) -= 1;
                    }
                    let sparse: SparseRow = row.into_iter().filter(|(_, c)| *c != 0).collect();
                    if sparse.is_empty() {
                        continue;
                    }
                    if seen.insert(sparse.clone()) {
                        rows.push(sparse);
                    }
                }
            }
        }
        Ok(PseudoIrsPolytope {
            window: sorted,
            alphabet: alphabet.clone(),
            pseudo,
            rows,
        })
    }

    pub fn window(&self) -> &[Word] {
        &self.window
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn is_pseudo_mask(&self, mask: usize) -> bool {
        self.pseudo[mask]
    }

    pub fn invariance_rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn num_masks(&self) -> usize {
        1 << self.window.len()
    }

    /// Checks a full vector over subset-masks against every constraint;
    /// returns human-readable violation descriptions (empty when feasible).
    pub fn check_vector(&self, v: &[Q]) -> Vec<String> {
        let mut out = Vec::new();
        if v.len() != self.num_masks() {
            out.push(format!("length {} != {}", v.len(), self.num_masks()));
            return out;
        }
        let mut total = q_zero();
        for (mask, p) in v.iter().enumerate() {
            if p < &q_zero() {
                out.push(format!("negative mass on mask {mask}"));
            }
            if !self.pseudo[mask] && !p.is_zero() {
                out.push(format!("mass on non-pseudo subset mask {mask}"));
            }
            total += p;
        }
        if !total.is_one() {
            out.push("total mass differs from 1".to_string());
        }
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = q_zero();
            for &(mask, coeff) in row {
                acc += crate::rational::q_int(coeff as i64) * &v[mask];
            }
            if !acc.is_zero() {
                out.push(format!("invariance row {r} violated"));
            }
        }
        out
    }
}

/// The exact per-point window statistics of an action: mass of each subset
/// of `window` arising as a stabilizer window.
pub fn atom_vector(action: &FiniteAction, window: &[Word]) -> Result<Vec<Q>> {
    let m = window.len();
    if m > 24 {
        return Err(Error::size("window too large"));
    }
    let degree = action.degree();
    let mut counts = vec![0usize; 1 << m];
    for x in 0..degree as u32 {
        let mut mask = 0usize;
        for (i, w) in window.iter().enumerate() {
            if action.act(w, x)? == x {
                mask |= 1 << i;
            }
        }
        counts[mask] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|c| q_usize(c) / q_usize(degree))
        .collect())
}

#[derive(Clone, Debug)]
pub struct UpperBoundOutcome {
    pub value: Q,
    pub lp_iterations: usize,
    pub window_size: usize,
}

/// Maximizes the test value over the pseudo-IRS polytope of `window` by
/// exact LP. The result dominates the value of every conjugation-invariant
/// strategy, so it upper-bounds both the sofic and the ergodic value.
pub fn upper_bound(
    test: &SubgroupTest,
    window: &[Word],
    window_cap: usize,
    lp_iteration_cap: usize,
) -> Result<UpperBoundOutcome> {
    let polytope = PseudoIrsPolytope::build(test.alphabet(), window, window_cap)?;
    upper_bound_over(test, &polytope, lp_iteration_cap)
}

pub fn upper_bound_over(
    test: &SubgroupTest,
    polytope: &PseudoIrsPolytope,
    lp_iteration_cap: usize,
) -> Result<UpperBoundOutcome> {
    let objective_full = test.window_objective(polytope.window())?;
    // Variables: pseudo masks only; non-pseudo masks are pinned to zero.
    let masks: Vec<usize> = (0..polytope.num_masks())
        .filter(|&mk| polytope.is_pseudo_mask(mk))
        .collect();
    let var_of: BTreeMap<usize, usize> = masks.iter().enumerate().map(|(v, &mk)| (mk, v)).collect();
    let n = masks.len();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut rhs: Vec<Q> = Vec::new();
    rows.push(vec![crate::rational::q_one(); n]);
    rhs.push(crate::rational::q_one());
    for row in polytope.invariance_rows() {
        let mut dense = vec![q_zero(); n];
        let mut nontrivial = false;
        for &(mask, coeff) in row {
            if let Some(&v) = var_of.get(&mask) {
                dense[v] += crate::rational::q_int(coeff as i64);
                nontrivial = true;
            }
        }
        if nontrivial && dense.iter().any(|c| !c.is_zero()) {
            rows.push(dense);
            rhs.push(q_zero());
        }
    }
    let objective: Vec<Q> = masks.iter().map(|&mk| objective_full[mk].clone()).collect();
    let lp = Lp {
        objective,
        rows,
        rhs,
    };
    let sol = lp::solve(&lp, lp_iteration_cap)?;
    Ok(UpperBoundOutcome {
        value: sol.optimum,
        lp_iterations: sol.iterations,
        window_size: polytope.window().len(),
    })
}

#[derive(Clone, Debug)]
pub struct LowerBoundOutcome {
    pub value: Q,
    pub witness: FiniteAction,
    pub actions_tried: usize,
}

/// Best test value over an enumerated stream of actions; a certified lower
/// bound on the sofic value, with the achieving action as witness. Actions
/// above the exhaustive degree limit are refined by hill-climbing on the
/// value over single-point transpositions.
pub fn lower_bound(
    test: &SubgroupTest,
    max_degree: usize,
    budget: usize,
    seed: u64,
) -> Result<LowerBoundOutcome> {
    let alphabet = test.alphabet().clone();
    let stream: Vec<FiniteAction> =
        enumerate_actions(&alphabet, max_degree, budget, seed).collect();
    let tried = stream.len();
    if stream.is_empty() {
        return Err(Error::input("lower bound requires a positive budget"));
    }
    let evaluated: Vec<(Q, usize, FiniteAction)> = stream
        .into_par_iter()
        .enumerate()
        .map(|(i, action)| {
            let action = if action.degree() > EXHAUSTIVE_DEGREE_LIMIT {
                hill_climb(test, action)
            } else {
                action
            };
            let v = test.value_against_action(&action).expect("alphabets match");
            (v, i, action)
        })
        .collect();
    let best = evaluated
        .into_iter()
        .max_by(|(va, ia, _), (vb, ib, _)| va.cmp(vb).then(ib.cmp(ia)))
        .expect("nonempty");
    Ok(LowerBoundOutcome {
        value: best.0,
        witness: best.2,
        actions_tried: tried,
    })
}

/// First-improvement hill climbing: apply one transposition to one generator
/// image while the value improves, with a fixed evaluation cap.
fn hill_climb(test: &SubgroupTest, start: FiniteAction) -> FiniteAction {
    let mut current = start;
    let mut value = match test.value_against_action(&current) {
        Ok(v) => v,
        Err(_) => return current,
    };
    let n = current.degree();
    let gens = current.alphabet().size();
    let mut evals = 0usize;
    let cap = 400usize;
    loop {
        let mut improved = false;
        'scan: for g in 0..gens as u16 {
            for i in 0..n as u32 {
                for j in (i + 1)..n as u32 {
                    let mut perms: Vec<Permutation> = current.perms().to_vec();
                    perms[g as usize] =
                        Permutation::transposition(n, i, j).compose(&perms[g as usize]);
                    let cand = FiniteAction::new(current.alphabet().clone(), perms).expect("valid");
                    let v = test.value_against_action(&cand).expect("alphabets match");
                    evals += 1;
                    if v > value {
                        current = cand;
                        value = v;
                        improved = true;
                        break 'scan;
                    }
                    if evals >= cap {
                        return current;
                    }
                }
            }
        }
        if !improved {
            return current;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SandwichStage {
    pub stage: usize,
    pub alpha: Q,
    pub beta: Q,
    pub window_size: usize,
    pub lp_iterations: usize,
    pub witness: FiniteAction,
}

#[derive(Clone, Debug)]
pub struct SandwichReport {
    pub stages: Vec<SandwichStage>,
    /// True when the requested gap was reached; false means resources ran
    /// out first and the report is partial.
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct SandwichConfig {
    pub max_stages: usize,
    pub max_window: usize,
    pub max_degree: usize,
    pub budget_per_stage: usize,
    pub lp_iteration_cap: usize,
    pub gap: Q,
    pub seed: u64,
}

impl Default for SandwichConfig {
    fn default() -> Self {
        SandwichConfig {
            max_stages: 6,
            max_window: DEFAULT_WINDOW_CAP,
            max_degree: 5,
            budget_per_stage: 300,
            lp_iteration_cap: DEFAULT_LP_ITERATION_CAP,
            gap: q_zero(),
            seed: 0,
        }
    }
}

/// Interleaves lower bounds (non-decreasing) and upper bounds
/// (non-increasing over the growing window schedule) until their gap closes
/// or resources run out. The window schedule is
/// `ball(t) ∪ (union of challenge windows)`, clipped at the window cap.
pub fn sandwich(test: &SubgroupTest, cfg: &SandwichConfig) -> Result<SandwichReport> {
    let base_window: BTreeSet<Word> = test.window_union().into_iter().collect();
    let mut stages: Vec<SandwichStage> = Vec::new();
    let mut best_alpha: Option<(Q, FiniteAction)> = None;
    let mut best_beta: Option<Q> = None;
    for stage in 1..=cfg.max_stages {
        let mut window: BTreeSet<Word> = base_window.clone();
        window.extend(test.alphabet().ball(stage));
        let window: Vec<Word> = window.into_iter().collect();
        if window.len() > cfg.max_window {
            return Ok(SandwichReport {
                stages,
                converged: false,
            });
        }
        let upper = match upper_bound(test, &window, cfg.max_window, cfg.lp_iteration_cap) {
            Ok(out) => out,
            // caps ran out: report what was certified so far
            Err(Error::Exhausted(_)) | Err(Error::Size(_)) => {
                return Ok(SandwichReport {
                    stages,
                    converged: false,
                })
            }
            Err(e) => return Err(e),
        };
        let beta = match &best_beta {
            Some(b) if *b < upper.value => b.clone(),
            _ => upper.value.clone(),
        };
        best_beta = Some(beta.clone());

        let degree = (1 + stage).min(cfg.max_degree).max(1);
        let lower = lower_bound(
            test,
            degree,
            cfg.budget_per_stage * stage,
            cfg.seed ^ stage as u64,
        )?;
        let alpha = match &best_alpha {
            Some((a, _)) if *a >= lower.value => a.clone(),
            _ => {
                best_alpha = Some((lower.value.clone(), lower.witness.clone()));
                lower.value.clone()
            }
        };
        if best_alpha.is_none() {
            best_alpha = Some((lower.value.clone(), lower.witness.clone()));
        }
        let witness = best_alpha.as_ref().expect("set above").1.clone();
        if alpha > beta {
            return Err(Error::internal("lower bound exceeded upper bound"));
        }
        stages.push(SandwichStage {
            stage,
            alpha: alpha.clone(),
            beta: beta.clone(),
            window_size: upper.window_size,
            lp_iterations: upper.lp_iterations,
            witness,
        });
        if beta - alpha <= cfg.gap {
            return Ok(SandwichReport {
                stages,
                converged: true,
            });
        }
    }
    Ok(SandwichReport {
        stages,
        converged: false,
    })
}
