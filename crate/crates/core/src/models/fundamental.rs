use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MoGenModel;
use crate::error::{Error, Result};

/// Tuning knobs for the fundamental-matrix solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Strongly connected blocks up to this size are LU-factorised; larger
    /// ones are solved by Gauss-Seidel sweeps.
    pub dense_block_limit: usize,
    /// Largest state count for which [`FundamentalMatrix::dense`] may
    /// materialise F.
    pub dense_matrix_limit: usize,
    /// Convergence tolerance of the iterative block solver.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dense_block_limit: 1500,
            dense_matrix_limit: 2000,
            tolerance: 1e-10,
            max_iterations: 200_000,
        }
    }
}

enum BlockSolver {
    /// A single state; holds `1 / (1 - q_ii)`.
    Scalar(f64),
    Dense {
        lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
        lu_t: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    },
    Iterative,
}

struct Block {
    members: Vec<usize>,
    solver: BlockSolver,
}

/// F = (I - Q)^-1 of an absorbing chain, applied through block-triangular
/// linear solves rather than an explicit inverse.
///
/// The transient states are split into strongly connected components of the
/// support of Q. Processed in topological order each component only needs
/// the values of components it can reach (or that reach it, for left
/// solves).
pub struct FundamentalMatrix {
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
    /// Components in reverse topological order: sinks first.
    blocks: Vec<Block>,
    block_of: Vec<usize>,
    options: SolverOptions,
}

impl std::fmt::Debug for FundamentalMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FundamentalMatrix")
            .field("states", &self.rows.len())
            .field("blocks", &self.blocks.len())
            .finish()
    }
}

impl FundamentalMatrix {
    pub fn new(model: &MoGenModel, options: SolverOptions) -> Result<Self> {
        let rows = (0..model.n_states())
            .map(|i| model.transitions(i).to_vec())
            .collect();
        Self::from_rows(rows, options)
    }

    /// Builds the solver for an arbitrary substochastic Q given as sparse
    /// rows of `(column, value)`.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>, options: SolverOptions) -> Result<Self> {
        let m = rows.len();
        let mut cols = vec![Vec::new(); m];
        let mut graph = DiGraph::<(), ()>::with_capacity(m, 0);
        for _ in 0..m {
            graph.add_node(());
        }
        for (i, row) in rows.iter().enumerate() {
            for &(j, q) in row {
                if j >= m || !q.is_finite() || q < 0.0 {
                    return Err(Error::InvalidModel(format!("bad Q entry ({i}, {j}) = {q}")));
                }
                if q > 0.0 {
                    cols[j].push((i, q));
                    graph.add_edge(NodeIndex::new(i), NodeIndex::new(j), ());
                }
            }
        }

        let mut block_of = vec![0; m];
        let mut blocks = Vec::new();
        for (b, scc) in tarjan_scc(&graph).into_iter().enumerate() {
            let mut members: Vec<usize> = scc.into_iter().map(|n| n.index()).collect();
            members.sort_unstable();
            for &i in &members {
                block_of[i] = b;
            }
            blocks.push(Block {
                members,
                solver: BlockSolver::Iterative,
            });
        }
        for b in 0..blocks.len() {
            let solver = Self::factor(&rows, &block_of, b, &blocks[b].members, &options)?;
            blocks[b].solver = solver;
        }
        Ok(FundamentalMatrix {
            rows,
            cols,
            blocks,
            block_of,
            options,
        })
    }

    fn factor(
        rows: &[Vec<(usize, f64)>],
        block_of: &[usize],
        b: usize,
        members: &[usize],
        options: &SolverOptions,
    ) -> Result<BlockSolver> {
        // mass leaving the block (to other blocks or to the end state)
        let leaks = members.iter().any(|&i| {
            let inside: f64 = rows[i]
                .iter()
                .filter(|&&(j, _)| block_of[j] == b)
                .map(|&(_, q)| q)
                .sum();
            1.0 - inside > 1e-14
        });
        if !leaks {
            return Err(Error::NonAbsorbing);
        }
        if members.len() == 1 {
            let i = members[0];
            let q_ii: f64 = rows[i].iter().filter(|&&(j, _)| j == i).map(|&(_, q)| q).sum();
            return Ok(BlockSolver::Scalar(1.0 / (1.0 - q_ii)));
        }
        if members.len() > options.dense_block_limit {
            return Ok(BlockSolver::Iterative);
        }
        let k = members.len();
        let local = |i: usize| members.binary_search(&i).ok();
        let mut a = DMatrix::<f64>::identity(k, k);
        for (r, &i) in members.iter().enumerate() {
            for &(j, q) in &rows[i] {
                if let Some(c) = local(j) {
                    a[(r, c)] -= q;
                }
            }
        }
        let lu_t = a.transpose().lu();
        let lu = a.lu();
        if !lu.is_invertible() || !lu_t.is_invertible() {
            return Err(Error::NonAbsorbing);
        }
        Ok(BlockSolver::Dense { lu, lu_t })
    }

    /// Number of transient states.
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// F·b, i.e. the solution y of (I - Q) y = b.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(b)?;
        let mut y = vec![0.0; self.n()];
        for (bi, block) in self.blocks.iter().enumerate() {
            let rhs: Vec<f64> = block
                .members
                .iter()
                .map(|&i| {
                    b[i] + self.rows[i]
                        .iter()
                        .filter(|&&(j, _)| self.block_of[j] != bi)
                        .map(|&(j, q)| q * y[j])
                        .sum::<f64>()
                })
                .collect();
            self.solve_block(bi, block, rhs, &mut y, false)?;
        }
        Ok(y)
    }

    /// b·F, i.e. the solution x of x (I - Q) = b.
    pub fn solve_left(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(b)?;
        let mut x = vec![0.0; self.n()];
        for (bi, block) in self.blocks.iter().enumerate().rev() {
            let rhs: Vec<f64> = block
                .members
                .iter()
                .map(|&j| {
                    b[j] + self.cols[j]
                        .iter()
                        .filter(|&&(i, _)| self.block_of[i] != bi)
                        .map(|&(i, q)| x[i] * q)
                        .sum::<f64>()
                })
                .collect();
            self.solve_block(bi, block, rhs, &mut x, true)?;
        }
        Ok(x)
    }

    fn solve_block(
        &self,
        bi: usize,
        block: &Block,
        rhs: Vec<f64>,
        out: &mut [f64],
        transpose: bool,
    ) -> Result<()> {
        match &block.solver {
            BlockSolver::Scalar(inv) => {
                out[block.members[0]] = rhs[0] * inv;
            }
            BlockSolver::Dense { lu, lu_t } => {
                let rhs = DVector::from_vec(rhs);
                let sol = if transpose { lu_t.solve(&rhs) } else { lu.solve(&rhs) }
                    .ok_or(Error::NonAbsorbing)?;
                for (&i, v) in block.members.iter().zip(sol.iter()) {
                    out[i] = *v;
                }
            }
            BlockSolver::Iterative => {
                let lines = if transpose { &self.cols } else { &self.rows };
                let mut iterations = 0;
                loop {
                    let mut delta: f64 = 0.0;
                    let mut scale: f64 = 1.0;
                    for (r, &i) in block.members.iter().enumerate() {
                        let mut acc = rhs[r];
                        let mut diag = 0.0;
                        for &(j, q) in &lines[i] {
                            if j == i {
                                diag += q;
                            } else if self.block_of[j] == bi {
                                acc += q * out[j];
                            }
                        }
                        let v = acc / (1.0 - diag);
                        delta = delta.max((v - out[i]).abs());
                        scale = scale.max(v.abs());
                        out[i] = v;
                    }
                    iterations += 1;
                    if delta <= self.options.tolerance * scale * 1e-2 {
                        break;
                    }
                    if iterations >= self.options.max_iterations || !delta.is_finite() {
                        return Err(Error::NoConvergence {
                            iterations,
                            residual: delta,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_len(&self, b: &[f64]) -> Result<()> {
        if b.len() != self.n() {
            return Err(Error::InvalidArgument(format!(
                "vector of length {} for {} states",
                b.len(),
                self.n()
            )));
        }
        Ok(())
    }

    /// Row sums of F: expected number of visits before absorption, counting
    /// the current one.
    pub fn row_sums(&self) -> Result<Vec<f64>> {
        self.solve(&vec![1.0; self.n()])
    }

    /// Row `i` of F.
    pub fn row(&self, i: usize) -> Result<Vec<f64>> {
        let mut e = vec![0.0; self.n()];
        e[i] = 1.0;
        self.solve_left(&e)
    }

    /// Column `j` of F.
    pub fn column(&self, j: usize) -> Result<Vec<f64>> {
        let mut e = vec![0.0; self.n()];
        e[j] = 1.0;
        self.solve(&e)
    }

    /// Materialises F column by column. Refused above
    /// [`SolverOptions::dense_matrix_limit`] states.
    pub fn dense(&self) -> Result<DMatrix<f64>> {
        let m = self.n();
        if m > self.options.dense_matrix_limit {
            return Err(Error::InvalidArgument(format!(
                "{m} states exceed the dense limit of {}",
                self.options.dense_matrix_limit
            )));
        }
        let columns = (0..m)
            .into_par_iter()
            .map(|j| self.column(j))
            .collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_fn(m, m, |i, j| columns[j][i]))
    }

    /// Max row-sum norm of F - (I + Q F).
    pub fn fixed_point_residual(&self, f: &DMatrix<f64>) -> f64 {
        let m = self.n();
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let qf: f64 = self.rows[i].iter().map(|&(k, q)| q * f[(k, j)]).sum();
                        let identity = if i == j { 1.0 } else { 0.0 };
                        (f[(i, j)] - identity - qf).abs()
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fit_mogen;
    use crate::pathdata::PathDataset;
    use approx::assert_abs_diff_eq;

    /// F by the truncated power series sum_k Q^k.
    fn power_series(rows: &[Vec<(usize, f64)>]) -> DMatrix<f64> {
        let m = rows.len();
        let mut q = DMatrix::zeros(m, m);
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                q[(i, j)] += v;
            }
        }
        let mut term = DMatrix::identity(m, m);
        let mut sum = term.clone();
        for _ in 0..100_000 {
            term = &term * &q;
            sum += &term;
            if term.amax() < 1e-15 {
                break;
            }
        }
        sum
    }

    #[test]
    fn zero_q_gives_identity() {
        let f = FundamentalMatrix::from_rows(vec![vec![], vec![], vec![]], SolverOptions::default())
            .unwrap();
        assert_eq!(f.dense().unwrap(), DMatrix::identity(3, 3));
    }

    #[test]
    fn two_state_chain() {
        let f = FundamentalMatrix::from_rows(vec![vec![(1, 1.0)], vec![]], SolverOptions::default())
            .unwrap();
        let d = f.dense().unwrap();
        assert_eq!(d[(0, 0)], 1.0);
        assert_eq!(d[(0, 1)], 1.0);
        assert_eq!(d[(1, 1)], 1.0);
        assert_eq!(d[(1, 0)], 0.0);
    }

    #[test]
    fn toy_row_sum_at_start_node() {
        let ds = PathDataset::from_labels([("A,C,D,E", 1), ("B,C,D,F", 1)]).unwrap();
        let m = fit_mogen(&ds, 1).unwrap();
        let f = FundamentalMatrix::new(&m, SolverOptions::default()).unwrap();
        let a = m.state_index(&[ds.vocabulary().get("A").unwrap()]).unwrap();
        assert_abs_diff_eq!(f.row_sums().unwrap()[a], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn cyclic_block_matches_power_series() {
        // A -> B -> A loop with leakage, plus a self loop
        let rows = vec![
            vec![(0, 0.2), (1, 0.5)],
            vec![(0, 0.6), (2, 0.3)],
            vec![(2, 0.1)],
        ];
        let expect = power_series(&rows);
        let f = FundamentalMatrix::from_rows(rows.clone(), SolverOptions::default()).unwrap();
        let d = f.dense().unwrap();
        assert!((&d - &expect).amax() < 1e-10);
        assert!(f.fixed_point_residual(&d) < 1e-12);
        let left = f.solve_left(&[0.3, 0.7, 0.0]).unwrap();
        for j in 0..3 {
            let want = 0.3 * expect[(0, j)] + 0.7 * expect[(1, j)];
            assert_abs_diff_eq!(left[j], want, epsilon = 1e-10);
        }
    }

    #[test]
    fn iterative_blocks_agree_with_lu() {
        let rows = vec![
            vec![(1, 0.5), (2, 0.4)],
            vec![(2, 0.7), (0, 0.1)],
            vec![(0, 0.45), (1, 0.45)],
            vec![(0, 1.0)],
        ];
        let lu = FundamentalMatrix::from_rows(rows.clone(), SolverOptions::default()).unwrap();
        let opts = SolverOptions {
            dense_block_limit: 1,
            ..SolverOptions::default()
        };
        let gs = FundamentalMatrix::from_rows(rows, opts).unwrap();
        let (a, b) = (lu.dense().unwrap(), gs.dense().unwrap());
        assert!((&a - &b).amax() < 1e-8, "{a} vs {b}");
        assert!(gs.fixed_point_residual(&b) < 1e-9);
    }

    #[test]
    fn closed_class_is_rejected() {
        let rows = vec![vec![(1, 1.0)], vec![(0, 1.0)]];
        assert!(matches!(
            FundamentalMatrix::from_rows(rows, SolverOptions::default()),
            Err(Error::NonAbsorbing)
        ));
        let rows = vec![vec![(0, 1.0)]];
        assert!(matches!(
            FundamentalMatrix::from_rows(rows, SolverOptions::default()),
            Err(Error::NonAbsorbing)
        ));
    }

    #[test]
    fn dense_limit_enforced() {
        let opts = SolverOptions {
            dense_matrix_limit: 1,
            ..SolverOptions::default()
        };
        let f = FundamentalMatrix::from_rows(vec![vec![], vec![]], opts).unwrap();
        assert!(f.dense().is_err());
        assert_eq!(f.row_sums().unwrap(), [1.0, 1.0]);
    }
}
