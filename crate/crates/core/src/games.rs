//! Tailored non-local games: a graph of vertices with readable and
//! unreadable binary variables, a rational edge distribution, and per-edge
//! controlled linear constraints. The decision reads the readable part of an
//! answer, selects parity checks from it, extends the answer with a
//! constant-one slot `J`, and accepts iff every selected parity holds.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::rational::{check_distribution, q, q_zero, Q};

pub type GenId = usize;
pub type VertexId = usize;

/// One generator (answer bit) of the game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenInfo {
    pub vertex: VertexId,
    pub readable: bool,
    /// Index within the readable or unreadable block of its vertex.
    pub index: usize,
    /// Global name, `vertex/R/i` or `vertex/L/i`.
    pub name: String,
}

/// An F2 linear constraint over the generators of one edge plus `J`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LinearConstraint {
    pub j: bool,
    pub gens: BTreeSet<GenId>,
}

impl LinearConstraint {
    pub fn is_empty(&self) -> bool {
        !self.j && self.gens.is_empty()
    }
}

/// Per-edge controlled constraints: either an explicit table from readable
/// assignments to constraint lists, or the closed form of a linear
/// constraint system edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeConstraints {
    /// Keyed by the readable bits of the edge (x's readables then y's, by
    /// index). Must be total.
    Table(BTreeMap<Vec<bool>, Vec<LinearConstraint>>),
    /// Linear-system edge: consistency between the column variable and the
    /// matching row variable, plus the row parity with the given bit.
    Lcs { rhs: bool, col_pos: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub x: VertexId,
    pub y: VertexId,
    pub weight: Q,
    pub constraints: EdgeConstraints,
}

/// A validated tailored game. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailoredGame {
    vertices: Vec<String>,
    len_r: Vec<usize>,
    len_l: Vec<usize>,
    edges: Vec<Edge>,
    gens: Vec<GenInfo>,
    per_vertex: Vec<Vec<GenId>>,
}

/// An answer for one edge: values for every generator of `S_x ∪ S_y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub values: BTreeMap<GenId, bool>,
}

impl TailoredGame {
    pub fn new(
        vertices: Vec<String>,
        len_r: Vec<usize>,
        len_l: Vec<usize>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        let v = vertices.len();
        if v == 0 {
            return Err(Error::input("game needs at least one vertex"));
        }
        if len_r.len() != v || len_l.len() != v {
            return Err(Error::input("length vectors must match the vertex count"));
        }
        for (i, name) in vertices.iter().enumerate() {
            if name.is_empty() || name.contains(char::is_whitespace) || name.contains('/') {
                return Err(Error::input(format!("invalid vertex name `{name}`")));
            }
            if vertices[..i].contains(name) {
                return Err(Error::input(format!("duplicate vertex name `{name}`")));
            }
        }
        let mut gens = Vec::new();
        let mut per_vertex = vec![Vec::new(); v];
        for (vx, name) in vertices.iter().enumerate() {
            for i in 0..len_r[vx] {
                per_vertex[vx].push(gens.len());
                gens.push(GenInfo {
                    vertex: vx,
                    readable: true,
                    index: i,
                    name: format!("{name}/R/{i}"),
                });
            }
            for i in 0..len_l[vx] {
                per_vertex[vx].push(gens.len());
                gens.push(GenInfo {
                    vertex: vx,
                    readable: false,
                    index: i,
                    name: format!("{name}/L/{i}"),
                });
            }
        }
        let game = TailoredGame {
            vertices,
            len_r,
            len_l,
            edges,
            gens,
            per_vertex,
        };
        game.validate()?;
        Ok(game)
    }

    fn validate(&self) -> Result<()> {
        let weights: Vec<Q> = self.edges.iter().map(|e| e.weight.clone()).collect();
        check_distribution(&weights)?;
        for (ei, e) in self.edges.iter().enumerate() {
            if e.x >= self.vertices.len() || e.y >= self.vertices.len() {
                return Err(Error::input(format!("edge {ei}: unknown vertex")));
            }
            if e.x == e.y {
                return Err(Error::input(format!(
                    "edge {ei}: self-loops are not allowed"
                )));
            }
            let edge_gens: BTreeSet<GenId> = self.edge_generators(ei).into_iter().collect();
            let readable_count = self.edge_readables(ei).len();
            match &e.constraints {
                EdgeConstraints::Table(table) => {
                    if table.len() != 1usize << readable_count
                        || table.keys().any(|k| k.len() != readable_count)
                    {
                        return Err(Error::input(format!(
                            "edge {ei}: constraint table must be total over {} readable bits",
                            readable_count
                        )));
                    }
                    for cons in table.values() {
                        for c in cons {
                            if !c.gens.is_subset(&edge_gens) {
                                return Err(Error::input(format!(
                                    "edge {ei}: constraint touches generators outside the edge"
                                )));
                            }
                        }
                    }
                }
                EdgeConstraints::Lcs { col_pos, .. } => {
                    if self.len_l[e.y] != 1 || self.len_r[e.y] != 0 {
                        return Err(Error::input(format!(
                            "edge {ei}: lcs edges need a single unreadable column variable"
                        )));
                    }
                    if self.len_r[e.x] != 0 {
                        return Err(Error::input(format!(
                            "edge {ei}: lcs edges need unreadable row variables"
                        )));
                    }
                    if *col_pos >= self.len_l[e.x] {
                        return Err(Error::input(format!(
                            "edge {ei}: lcs column position out of range"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_index(&self, name: &str) -> Option<VertexId> {
        self.vertices.iter().position(|n| n == name)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn generators(&self) -> &[GenInfo] {
        &self.gens
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.gens.iter().map(|g| g.name.clone()).collect()
    }

    pub fn vertex_generators(&self, v: VertexId) -> &[GenId] {
        &self.per_vertex[v]
    }

    pub fn len_r(&self, v: VertexId) -> usize {
        self.len_r[v]
    }

    pub fn len_l(&self, v: VertexId) -> usize {
        self.len_l[v]
    }

    /// Answer length of a vertex.
    pub fn length(&self, v: VertexId) -> usize {
        self.len_r[v] + self.len_l[v]
    }

    /// Maximal answer length over the vertices.
    pub fn lambda(&self) -> usize {
        (0..self.vertices.len())
            .map(|v| self.length(v))
            .max()
            .unwrap_or(0)
    }

    /// Generators of `S_x ∪ S_y`, x's block first.
    pub fn edge_generators(&self, edge: usize) -> Vec<GenId> {
        let e = &self.edges[edge];
        let mut out = self.per_vertex[e.x].clone();
        out.extend(&self.per_vertex[e.y]);
        out
    }

    /// Readable generators of the edge, x's block first.
    pub fn edge_readables(&self, edge: usize) -> Vec<GenId> {
        self.edge_generators(edge)
            .into_iter()
            .filter(|&g| self.gens[g].readable)
            .collect()
    }

    /// Marginal vertex distribution: half the total weight of incident edges.
    pub fn vertex_weight(&self, v: VertexId) -> Q {
        let mut total = q_zero();
        for e in &self.edges {
            if e.x == v || e.y == v {
                total += &e.weight;
            }
        }
        total / q(2, 1)
    }

    /// The controlled constraints selected by a readable assignment.
    pub fn constraints_for(
        &self,
        edge: usize,
        readable_bits: &[bool],
    ) -> Result<Vec<LinearConstraint>> {
        let e = &self.edges[edge];
        match &e.constraints {
            EdgeConstraints::Table(table) => table
                .get(readable_bits)
                .cloned()
                .ok_or_else(|| Error::internal("constraint table not total")),
            EdgeConstraints::Lcs { rhs, col_pos } => {
                let row_vars = &self.per_vertex[e.x];
                let col_var = self.per_vertex[e.y][0];
                let consistency = LinearConstraint {
                    j: false,
                    gens: [row_vars[*col_pos], col_var].into(),
                };
                let parity = LinearConstraint {
                    j: *rhs,
                    gens: row_vars.iter().copied().collect(),
                };
                Ok(vec![consistency, parity])
            }
        }
    }

    /// Evaluates the decision for one edge: selects the parity checks from
    /// the readable part of γ, extends γ with γ(J) = 1, and requires every
    /// selected parity to vanish.
    pub fn decision(&self, edge: usize, gamma: &Assignment) -> Result<bool> {
        let e_gens = self.edge_generators(edge);
        let domain: BTreeSet<GenId> = gamma.values.keys().copied().collect();
        let expected: BTreeSet<GenId> = e_gens.iter().copied().collect();
        if domain != expected {
            return Err(Error::input("assignment domain does not match the edge"));
        }
        let readable_bits: Vec<bool> = self
            .edge_readables(edge)
            .iter()
            .map(|g| gamma.values[g])
            .collect();
        let constraints = self.constraints_for(edge, &readable_bits)?;
        for c in &constraints {
            let mut parity = c.j; // gamma(J) = 1
            for g in &c.gens {
                if gamma.values[g] {
                    parity = !parity;
                }
            }
            if parity {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The game of a binary linear system `A x = b`: rows and columns become
/// vertices, all variables unreadable; each edge checks consistency of the
/// shared variable and the row parity. Edge distribution: uniform row, then
/// uniform column within the row support.
pub fn lcs_game(a: &[Vec<bool>], b: &[bool]) -> Result<TailoredGame> {
    let m = a.len();
    if m == 0 || b.len() != m {
        return Err(Error::input(
            "matrix and rhs sizes must match and be nonzero",
        ));
    }
    let n = a[0].len();
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::input("ragged matrix"));
    }
    let mut vertices = Vec::new();
    let mut len_r = Vec::new();
    let mut len_l = Vec::new();
    for i in 0..m {
        let support = a[i].iter().filter(|&&x| x).count();
        if support == 0 {
            return Err(Error::input(format!("row {i} of the system is zero")));
        }
        vertices.push(format!("r{i}"));
        len_r.push(0);
        len_l.push(support);
    }
    for j in 0..n {
        vertices.push(format!("c{j}"));
        len_r.push(0);
        len_l.push(1);
    }
    let mut edges = Vec::new();
    for i in 0..m {
        let support: Vec<usize> = (0..n).filter(|&j| a[i][j]).collect();
        let w = Q::new(1.into(), ((m * support.len()) as i64).into());
        for (pos, &j) in support.iter().enumerate() {
            edges.push(Edge {
                x: i,
                y: m + j,
                weight: w.clone(),
                constraints: EdgeConstraints::Lcs {
                    rhs: b[i],
                    col_pos: pos,
                },
            });
        }
    }
    TailoredGame::new(vertices, len_r, len_l, edges)
}

/// The standard 6-constraint, 9-variable system: three row parities and
/// three column parities over a 3x3 grid of variables, all zero except the
/// last column parity.
pub fn magic_square() -> TailoredGame {
    let mut a = vec![vec![false; 9]; 6];
    for r in 0..3 {
        for c in 0..3 {
            a[r][3 * r + c] = true; // row r uses cells 3r..3r+2
            a[3 + c][3 * r + c] = true; // column c uses cells c, c+3, c+6
        }
    }
    let b = vec![false, false, false, false, false, true];
    lcs_game(&a, &b).expect("fixed system is well formed")
}

/// Wraps arbitrary decision tables as a tailored game: every variable is
/// readable, accepted answers select no constraints, rejected answers select
/// the unsatisfiable `{J}` parity.
pub fn trivial_tailoring(
    vertices: Vec<String>,
    lengths: Vec<usize>,
    edges: Vec<(VertexId, VertexId, Q)>,
    accept: impl Fn(usize, &[bool]) -> bool,
) -> Result<TailoredGame> {
    let len_r = lengths.clone();
    let len_l = vec![0; lengths.len()];
    let mut built = Vec::new();
    for (ei, (x, y, weight)) in edges.into_iter().enumerate() {
        if x >= lengths.len() || y >= lengths.len() {
            return Err(Error::input("edge endpoint out of range"));
        }
        let bits = lengths[x] + lengths[y];
        if bits > 24 {
            return Err(Error::size("decision table too large to expand"));
        }
        let mut table = BTreeMap::new();
        for mask in 0usize..1 << bits {
            let key: Vec<bool> = (0..bits).map(|i| mask >> i & 1 == 1).collect();
            let cons = if accept(ei, &key) {
                Vec::new()
            } else {
                vec![LinearConstraint {
                    j: true,
                    gens: BTreeSet::new(),
                }]
            };
            table.insert(key, cons);
        }
        built.push(Edge {
            x,
            y,
            weight,
            constraints: EdgeConstraints::Table(table),
        });
    }
    TailoredGame::new(vertices, len_r, len_l, built)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_one;

    fn assignment(game: &TailoredGame, edge: usize, bits: &[bool]) -> Assignment {
        let gens = game.edge_generators(edge);
        assert_eq!(gens.len(), bits.len());
        Assignment {
            values: gens.into_iter().zip(bits.iter().copied()).collect(),
        }
    }

    #[test]
    fn decision_empty_and_impossible() {
        let game = trivial_tailoring(
            vec!["x".into(), "y".into()],
            vec![1, 1],
            vec![(0, 1, q_one())],
            |_, bits| bits[0],
        )
        .unwrap();
        // accepted answers -> empty constraint list -> true
        assert!(game
            .decision(0, &assignment(&game, 0, &[true, false]))
            .unwrap());
        assert!(game
            .decision(0, &assignment(&game, 0, &[true, true]))
            .unwrap());
        // rejected answers -> the {J} constraint -> false
        assert!(!game
            .decision(0, &assignment(&game, 0, &[false, false]))
            .unwrap());
        // domain mismatch
        let bad = Assignment {
            values: [(0usize, true)].into(),
        };
        assert!(game.decision(0, &bad).is_err());
    }

    #[test]
    fn trivial_tailoring_roundtrip_random_tables() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let accept_mask: u32 = rng.gen();
            let game = trivial_tailoring(
                vec!["x".into(), "y".into()],
                vec![2, 1],
                vec![(0, 1, q_one())],
                move |_, bits| {
                    let idx = bits
                        .iter()
                        .enumerate()
                        .fold(0usize, |acc, (i, &b)| acc | ((b as usize) << i));
                    accept_mask >> idx & 1 == 1
                },
            )
            .unwrap();
            for mask in 0usize..8 {
                let bits: Vec<bool> = (0..3).map(|i| mask >> i & 1 == 1).collect();
                let expect = accept_mask >> mask & 1 == 1;
                assert_eq!(
                    game.decision(0, &assignment(&game, 0, &bits)).unwrap(),
                    expect
                );
            }
        }
    }

    #[test]
    fn lcs_1x1_systems() {
        // A = [1], b = 0: f == 0 wins
        let g = lcs_game(&[vec![true]], &[false]).unwrap();
        assert!(g.decision(0, &assignment(&g, 0, &[false, false])).unwrap());
        assert!(!g.decision(0, &assignment(&g, 0, &[true, false])).unwrap());
        // A = [1], b = 1: row var = col var = 1 wins
        let g = lcs_game(&[vec![true]], &[true]).unwrap();
        assert!(g.decision(0, &assignment(&g, 0, &[true, true])).unwrap());
        assert!(!g.decision(0, &assignment(&g, 0, &[false, false])).unwrap());
        // zero rows rejected
        assert!(lcs_game(&[vec![false]], &[false]).is_err());
    }

    #[test]
    fn lcs_decision_matches_closed_form() {
        // brute force over all answers of each edge
        let a = vec![vec![true, true, false], vec![false, true, true]];
        let b = vec![true, false];
        let g = lcs_game(&a, &b).unwrap();
        for (ei, e) in g.edges().iter().enumerate() {
            let gens = g.edge_generators(ei);
            let row_vars = g.vertex_generators(e.x).to_vec();
            let col_var = g.vertex_generators(e.y)[0];
            let EdgeConstraints::Lcs { rhs, col_pos } = &e.constraints else {
                panic!("expected lcs edge")
            };
            for mask in 0usize..1 << gens.len() {
                let bits: Vec<bool> = (0..gens.len()).map(|i| mask >> i & 1 == 1).collect();
                let gamma = assignment(&g, ei, &bits);
                let row_parity = row_vars
                    .iter()
                    .fold(false, |acc, gid| acc ^ gamma.values[gid]);
                let expect = row_parity == *rhs
                    && gamma.values[&row_vars[*col_pos]] == gamma.values[&col_var];
                assert_eq!(g.decision(ei, &gamma).unwrap(), expect);
            }
        }
    }

    #[test]
    fn magic_square_shape() {
        let g = magic_square();
        assert_eq!(g.vertex_count(), 15);
        assert_eq!(g.edges().len(), 18);
        assert_eq!(g.lambda(), 3);
        let total: Q = g.edges().iter().fold(q_zero(), |acc, e| acc + &e.weight);
        assert_eq!(total, q_one());
    }

    #[test]
    fn unreadable_toggles_irrelevant_under_empty_constraints() {
        // all-unreadable game whose constraint list is empty for every edge
        let table: BTreeMap<Vec<bool>, Vec<LinearConstraint>> = [(Vec::new(), Vec::new())].into();
        let game = TailoredGame::new(
            vec!["x".into(), "y".into()],
            vec![0, 0],
            vec![2, 1],
            vec![Edge {
                x: 0,
                y: 1,
                weight: q_one(),
                constraints: EdgeConstraints::Table(table),
            }],
        )
        .unwrap();
        for mask in 0usize..8 {
            let bits: Vec<bool> = (0..3).map(|i| mask >> i & 1 == 1).collect();
            assert!(game.decision(0, &assignment(&game, 0, &bits)).unwrap());
        }
    }

    #[test]
    fn vertex_weights_sum_to_one() {
        let g = magic_square();
        let total: Q = (0..g.vertex_count()).fold(q_zero(), |acc, v| acc + g.vertex_weight(v));
        assert_eq!(total, q_one());
    }
}
