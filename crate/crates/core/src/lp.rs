//! Exact rational simplex for equality-form linear programs.
//!
//! Solves `max c.x  s.t.  A x = b, x >= 0` over arbitrary-precision
//! rationals with Bland's anti-cycling rule, so optima are exact and runs
//! are deterministic. Two phases: artificial variables establish an initial
//! basis, then the original objective is optimized.

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{q_zero, Q};

#[derive(Clone, Debug)]
pub struct Lp {
    /// Objective coefficients, one per variable.
    pub objective: Vec<Q>,
    /// Constraint rows (coefficients per variable).
    pub rows: Vec<Vec<Q>>,
    /// Right-hand sides, one per row.
    pub rhs: Vec<Q>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub optimum: Q,
    pub point: Vec<Q>,
    pub iterations: usize,
}

pub fn solve(lp: &Lp, max_iterations: usize) -> Result<LpSolution> {
    let n = lp.objective.len();
    let m = lp.rows.len();
    if lp.rhs.len() != m || lp.rows.iter().any(|row| row.len() != n) {
        return Err(Error::input("LP shape mismatch"));
    }

    // Tableau layout: columns 0..n are structural, n..n+m artificial, last
    // column is the rhs. Row m is the phase objective.
    let cols = n + m + 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut row = Vec::with_capacity(cols);
        let flip = lp.rhs[i].is_negative();
        for j in 0..n {
            let v = lp.rows[i][j].clone();
            row.push(if flip { -v } else { v });
        }
        for k in 0..m {
            row.push(if k == i {
                crate::rational::q_one()
            } else {
                q_zero()
            });
        }
        row.push(if flip {
            -lp.rhs[i].clone()
        } else {
            lp.rhs[i].clone()
        });
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1 objective: minimize the sum of artificials, expressed as
    // maximizing its negation. Reduced costs start as column sums.
    let mut obj = vec![q_zero(); cols];
    for row in &t {
        for (j, v) in row.iter().enumerate() {
            obj[j] += v;
        }
    }
    for item in obj.iter_mut().take(n + m).skip(n) {
        *item = q_zero();
    }
    t.push(obj);

    let mut iterations = 0usize;
    simplex_max(
        &mut t,
        &mut basis,
        n + m,
        &mut iterations,
        max_iterations,
        |j| j < n,
    )?;
    let infeasibility = t[m][cols - 1].clone();
    if !infeasibility.is_zero() {
        return Err(Error::input("LP infeasible"));
    }

    // Pivot artificial variables out of the basis where possible; rows that
    // cannot be cleared are redundant and stay fixed at level zero.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }

    // Phase 2: the real objective, reduced against the current basis.
    let mut obj = vec![q_zero(); cols];
    obj[..n].clone_from_slice(&lp.objective);
    for i in 0..m {
        if basis[i] < n {
            let coef = lp.objective[basis[i]].clone();
            if !coef.is_zero() {
                for j in 0..cols {
                    let delta = &coef * &t[i][j];
                    obj[j] -= delta;
                }
            }
        }
    }
    t[m] = obj;
    simplex_max(
        &mut t,
        &mut basis,
        n + m,
        &mut iterations,
        max_iterations,
        |j| {
            // artificials must not re-enter
            j < n
        },
    )?;

    let mut point = vec![q_zero(); n];
    for i in 0..m {
        if basis[i] < n {
            point[basis[i]] = t[i][cols - 1].clone();
        }
    }
    let mut optimum = q_zero();
    for j in 0..n {
        optimum += &lp.objective[j] * &point[j];
    }
    Ok(LpSolution {
        optimum,
        point,
        iterations,
    })
}

/// Runs max-simplex steps in place. The objective row stores reduced costs;
/// a column with positive reduced cost improves the objective.
fn simplex_max(
    t: &mut [Vec<Q>],
    basis: &mut [usize],
    num_vars: usize,
    iterations: &mut usize,
    max_iterations: usize,
    enterable: impl Fn(usize) -> bool,
) -> Result<()> {
    let m = t.len() - 1;
    let cols = t[0].len();
    loop {
        // Bland: smallest improving column index.
        let entering = (0..num_vars).find(|&j| enterable(j) && t[m][j].is_positive());
        let Some(j) = entering else { return Ok(()) };
        // Ratio test; ties broken by smallest basis variable index.
        let mut leave: Option<usize> = None;
        let mut best: Option<Q> = None;
        for i in 0..m {
            if t[i][j].is_positive() {
                let ratio = &t[i][cols - 1] / &t[i][j];
                let better = match &best {
                    None => true,
                    Some(b) => ratio < *b || (ratio == *b && basis[i] < basis[leave.unwrap()]),
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(i) = leave else {
            return Err(Error::input("LP unbounded"));
        };
        pivot(t, basis, i, j);
        *iterations += 1;
        if *iterations > max_iterations {
            return Err(Error::Exhausted(format!(
                "LP iteration cap {max_iterations} reached"
            )));
        }
    }
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], row: usize, col: usize) {
    let cols = t[0].len();
    let p = t[row][col].clone();
    for v in t[row].iter_mut() {
        *v /= &p;
    }
    for i in 0..t.len() {
        if i != row && !t[i][col].is_zero() {
            let factor = t[i][col].clone();
            for j in 0..cols {
                let delta = &factor * &t[row][j];
                t[i][j] -= delta;
            }
        }
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, q_int, q_one};

    #[test]
    fn simple_optimum() {
        // max x0 + 2 x1 subject to x0 + x1 + s = 1
        let lp = Lp {
            objective: vec![q_one(), q_int(2), q_zero()],
            rows: vec![vec![q_one(), q_one(), q_one()]],
            rhs: vec![q_one()],
        };
        let sol = solve(&lp, 1000).unwrap();
        assert_eq!(sol.optimum, q_int(2));
        assert_eq!(sol.point[1], q_one());
    }

    #[test]
    fn equality_system() {
        // max x0 with x0 + x1 = 1, x0 - x1 = 0 -> x0 = 1/2
        let lp = Lp {
            objective: vec![q_one(), q_zero()],
            rows: vec![vec![q_one(), q_one()], vec![q_one(), -q_one()]],
            rhs: vec![q_one(), q_zero()],
        };
        let sol = solve(&lp, 1000).unwrap();
        assert_eq!(sol.optimum, q(1, 2));
    }

    #[test]
    fn redundant_rows_ok() {
        let lp = Lp {
            objective: vec![q_one(), q_zero()],
            rows: vec![
                vec![q_one(), q_one()],
                vec![q_int(2), q_int(2)],
                vec![q_one(), q_one()],
            ],
            rhs: vec![q_one(), q_int(2), q_one()],
        };
        let sol = solve(&lp, 1000).unwrap();
        assert_eq!(sol.optimum, q_one());
    }

    #[test]
    fn infeasible_detected() {
        let lp = Lp {
            objective: vec![q_one()],
            rows: vec![vec![q_one()], vec![q_one()]],
            rhs: vec![q_one(), q_int(2)],
        };
        assert!(solve(&lp, 1000).is_err());
    }

    #[test]
    fn unbounded_detected() {
        // max x0, no constraints binding it: x0 - x1 = 0
        let lp = Lp {
            objective: vec![q_one(), q_zero()],
            rows: vec![vec![q_one(), -q_one()]],
            rhs: vec![q_zero()],
        };
        assert!(solve(&lp, 1000).is_err());
    }

    #[test]
    fn negative_rhs_normalized() {
        // -x0 = -1 -> x0 = 1
        let lp = Lp {
            objective: vec![q_one()],
            rows: vec![vec![-q_one()]],
            rhs: vec![-q_one()],
        };
        let sol = solve(&lp, 1000).unwrap();
        assert_eq!(sol.optimum, q_one());
    }

    /// Solves `A_T x_T = rhs` when the selected columns are independent and
    /// the system is consistent with a unique solution; None otherwise.
    fn solve_support(rows: &[Vec<Q>], rhs: &[Q], support: &[usize]) -> Option<Vec<Q>> {
        let m = rows.len();
        let k = support.len();
        let mut aug: Vec<Vec<Q>> = rows
            .iter()
            .zip(rhs)
            .map(|(row, b)| {
                let mut r: Vec<Q> = support.iter().map(|&c| row[c].clone()).collect();
                r.push(b.clone());
                r
            })
            .collect();
        let mut pivot_row = 0usize;
        for col in 0..k {
            let Some(p) = (pivot_row..m).find(|&r| !aug[r][col].is_zero()) else {
                return None; // dependent columns: not a vertex support
            };
            aug.swap(pivot_row, p);
            let pv = aug[pivot_row][col].clone();
            for v in aug[pivot_row].iter_mut() {
                *v /= &pv;
            }
            for r in 0..m {
                if r != pivot_row && !aug[r][col].is_zero() {
                    let f = aug[r][col].clone();
                    for c in 0..=k {
                        let delta = &f * &aug[pivot_row][c];
                        aug[r][c] -= delta;
                    }
                }
            }
            pivot_row += 1;
        }
        // consistency of the remaining rows
        for row in &aug[pivot_row..] {
            if !row[k].is_zero() {
                return None;
            }
        }
        Some((0..k).map(|i| aug[i][k].clone()).collect())
    }

    // Random bounded feasible instances: the optimum must match exhaustive
    // enumeration of vertex supports.
    #[test]
    fn optimum_matches_vertex_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        for round in 0..40 {
            let n = rng.gen_range(2..=5usize);
            let m = rng.gen_range(1..=3usize);
            // feasibility by construction: b = A x0 for a nonnegative x0;
            // boundedness by including the row sum(x) = sum(x0)
            let x0: Vec<Q> = (0..n).map(|_| q_int(rng.gen_range(0..4))).collect();
            let mut rows: Vec<Vec<Q>> = (0..m)
                .map(|_| (0..n).map(|_| q_int(rng.gen_range(-3..=3))).collect())
                .collect();
            rows.push(vec![q_one(); n]);
            let rhs: Vec<Q> = rows
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&x0)
                        .fold(q_zero(), |acc, (a, x)| acc + a * x)
                })
                .collect();
            let objective: Vec<Q> = (0..n).map(|_| q_int(rng.gen_range(-3..=3))).collect();
            let lp = Lp {
                objective: objective.clone(),
                rows: rows.clone(),
                rhs: rhs.clone(),
            };
            let sol = solve(&lp, 10_000).unwrap();

            // every vertex has an independent-column support; sweep them all
            let mut best: Option<Q> = None;
            for mask in 0usize..1 << n {
                let support: Vec<usize> = (0..n).filter(|c| mask >> c & 1 == 1).collect();
                if let Some(xs) = solve_support(&rows, &rhs, &support) {
                    if xs.iter().all(|x| x >= &q_zero()) {
                        let mut val = q_zero();
                        for (&c, x) in support.iter().zip(&xs) {
                            val += &objective[c] * x;
                        }
                        if best.as_ref().is_none_or(|b| val > *b) {
                            best = Some(val);
                        }
                    }
                }
            }
            assert_eq!(
                sol.optimum,
                best.expect("x0 yields a feasible vertex"),
                "round {round}"
            );
        }
    }
}
