//! Sparse quantum Laplacian `L_G(α) = Σ α_jk (I⊗I − U_jk⊗U_jk)`.
//!
//! `U_jk ⊗ U_jk` permutes `vec(ρ)` coordinates by `v ↦ F_{π_jk}(v)`, so each
//! edge contributes `+α` on the diagonal and `−α` at `(v, F_{π_jk}(v))` for
//! every node it moves. The matrix is block-diagonal over the components of
//! the induced graph; spectral quantities are computed block by block.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::basis::swap_node_bits;
use crate::graph::InteractionGraph;
use crate::induced::{components, ComponentPartition};
use crate::{par, Error, Result, C64, DEFAULT_DENSE_CAP};

/// Relative threshold below which an eigenvalue counts as zero.
pub const ZERO_EIGENVALUE_RTOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct QuantumLaplacian {
    n: usize,
    weights: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    partition: ComponentPartition,
}

/// Ascending spectrum of one component block with matching eigenvectors
/// (columns, in the component's local node order).
#[derive(Clone, Debug)]
pub struct BlockSpectrum {
    pub component: usize,
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl BlockSpectrum {
    /// Second-smallest eigenvalue; `None` for singleton components.
    pub fn fiedler(&self) -> Option<f64> {
        self.values.get(1).copied()
    }
}

impl QuantumLaplacian {
    /// Laplacian of `g` with its own weights, `n ≤ 8`.
    pub fn build(g: &InteractionGraph) -> Result<Self> {
        Self::build_capped(g, DEFAULT_DENSE_CAP)
    }

    pub fn build_capped(g: &InteractionGraph, cap: usize) -> Result<Self> {
        Self::assemble(g, g.weights(), cap)
    }

    /// Laplacian on the edge set of `g` with replacement weights `α ≥ 0`.
    /// The component partition stays that of `g`, so zero weights keep the
    /// block structure fixed.
    pub fn with_weights(g: &InteractionGraph, weights: &[f64]) -> Result<Self> {
        if weights.len() != g.num_edges() {
            return Err(Error::DimensionMismatch {
                expected: g.num_edges(),
                got: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidArgument(format!("weight {w} must be nonnegative")));
        }
        Self::assemble(g, weights, DEFAULT_DENSE_CAP)
    }

    fn assemble(g: &InteractionGraph, weights: &[f64], cap: usize) -> Result<Self> {
        let n = g.n();
        if n > cap {
            return Err(Error::QubitCap { n, cap });
        }
        let dim = 1usize << (2 * n);
        let edges = g.edges();
        let rows: Vec<Vec<(u32, f64)>> = par::map_range(0..dim, |v| {
            let mut row: Vec<(u32, f64)> = Vec::with_capacity(edges.len() + 1);
            let mut diag = 0.0;
            for (e, &w_e) in edges.iter().zip(weights) {
                let w = swap_node_bits(v, n, e.lo, e.hi);
                if w != v {
                    diag += w_e;
                    row.push((w as u32, -w_e));
                }
            }
            row.push((v as u32, diag));
            row.sort_unstable_by_key(|&(c, _)| c);
            // distinct edges can map v to the same neighbour
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
            for (c, x) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += x,
                    _ => merged.push((c, x)),
                }
            }
            merged.retain(|&(_, x)| x != 0.0);
            merged
        });
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for row in rows {
            for (c, x) in row {
                cols.push(c);
                vals.push(x);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            n,
            weights: weights.to_vec(),
            row_ptr,
            cols,
            vals,
            partition: components(g)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn partition(&self) -> &ComponentPartition {
        &self.partition
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries of row `r` as `(column, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.vals[span])
            .map(|(&c, &x)| (c as usize, x))
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&(c as u32)) {
            Ok(i) => self.vals[span.start + i],
            Err(_) => 0.0,
        }
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.dim()).map(|r| self.entry(r, r)).fold(0.0, f64::max)
    }

    /// Eigenvalues at or below this count as zero.
    pub fn zero_threshold(&self) -> f64 {
        ZERO_EIGENVALUE_RTOL * self.max_diagonal()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn apply_complex(&self, x: &[C64]) -> Vec<C64> {
        (0..self.dim())
            .map(|r| self.row(r).map(|(c, v)| x[c] * v).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            for (c, x) in self.row(r) {
                m[(r, c)] = x;
            }
        }
        m
    }

    /// Dense sub-block of component `id`, rows and columns in the
    /// component's ascending node order.
    pub fn component_block(&self, id: usize) -> DMatrix<f64> {
        let members = self.partition.component(id);
        let size = members.len();
        let mut block = DMatrix::zeros(size, size);
        for (i, &v) in members.iter().enumerate() {
            for (c, x) in self.row(v as usize) {
                let j = members
                    .binary_search(&(c as u32))
                    .expect("Laplacian entry leaves its component");
                block[(i, j)] = x;
            }
        }
        block
    }

    pub fn block_spectrum(&self, id: usize) -> BlockSpectrum {
        let eig = SymmetricEigen::new(self.component_block(id));
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = eig.eigenvectors.select_columns(&order);
        BlockSpectrum {
            component: id,
            values,
            vectors,
        }
    }

    /// Spectra of every component block, solved independently.
    pub fn block_spectra(&self) -> Vec<BlockSpectrum> {
        par::map_range(0..self.partition.len(), |id| self.block_spectrum(id))
    }

    /// `dim ker L`, equal to the number of induced-graph components.
    pub fn kernel_dimension(&self) -> usize {
        self.partition.len()
    }

    /// Smallest nonzero eigenvalue: the minimum over non-singleton
    /// components of each block's second-smallest eigenvalue.
    pub fn lambda2(&self) -> Result<f64> {
        if self.weights.is_empty() {
            return Err(Error::NoEdges);
        }
        let ids: Vec<usize> = (0..self.partition.len())
            .filter(|&id| self.partition.component(id).len() > 1)
            .collect();
        if ids.is_empty() {
            return Err(Error::NoEdges);
        }
        Ok(par::map(&ids, |&id| self.block_spectrum(id).values[1])
            .into_iter()
            .fold(f64::INFINITY, f64::min))
    }

    /// Coordinate-format text, one `row col value` line per stored entry,
    /// 0-based indices, row-major order.
    pub fn write_coo<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for r in 0..self.dim() {
            for (c, x) in self.row(r) {
                writeln!(out, "{r} {c} {}", crate::report::fmt_f64(x))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisNode;
    use approx::assert_abs_diff_eq;

    fn dense_spectrum(l: &QuantumLaplacian) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(l.to_dense()).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn single_edge_spectrum() {
        let l = QuantumLaplacian::build(&InteractionGraph::complete(2).unwrap()).unwrap();
        let spec = dense_spectrum(&l);
        assert!(spec[..10].iter().all(|x| x.abs() < 1e-12));
        assert!(spec[10..].iter().all(|x| (x - 2.0).abs() < 1e-12));
        assert_eq!(l.kernel_dimension(), 10);
        assert_abs_diff_eq!(l.lambda2().unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn lambda2_is_homogeneous() {
        let g = InteractionGraph::new(2, [(0, 1, 0.5)]).unwrap();
        assert_abs_diff_eq!(QuantumLaplacian::build(&g).unwrap().lambda2().unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_swap_entry() {
        let l = QuantumLaplacian::build(&InteractionGraph::complete(2).unwrap()).unwrap();
        let v: BasisNode = "01|00".parse().unwrap();
        let w: BasisNode = "10|00".parse().unwrap();
        assert_eq!(l.entry(v.index(), w.index()), -1.0);
        assert_eq!(l.entry(v.index(), v.index()), 1.0);
    }

    #[test]
    fn laplacian_structure_k3() {
        let l = QuantumLaplacian::build(&InteractionGraph::complete(3).unwrap()).unwrap();
        for r in 0..l.dim() {
            let sum: f64 = l.row(r).map(|(_, x)| x).sum();
            assert_eq!(sum, 0.0);
            for (c, x) in l.row(r) {
                assert_eq!(l.entry(c, r), x);
                if c == r {
                    assert!(x >= 0.0);
                } else {
                    assert!(x < 0.0);
                    assert_eq!(l.partition().component_of(r), l.partition().component_of(c));
                }
            }
        }
        assert_eq!(l.kernel_dimension(), 20);
        let spec = dense_spectrum(&l);
        assert!(spec[0] >= -1e-10);
        let zeros = spec.iter().filter(|&&x| x <= l.zero_threshold()).count();
        assert_eq!(zeros, 20);
        let lambda2 = spec.iter().copied().find(|&x| x > l.zero_threshold()).unwrap();
        assert_abs_diff_eq!(l.lambda2().unwrap(), lambda2, epsilon = 1e-10);
        assert_abs_diff_eq!(lambda2, 3.0, epsilon = 1e-10);
    }

    #[test]
    fn n1_has_trivial_kernel() {
        let l = QuantumLaplacian::build(&InteractionGraph::empty(1).unwrap()).unwrap();
        assert_eq!(l.dim(), 4);
        assert_eq!(l.kernel_dimension(), 4);
        assert_eq!(l.nnz(), 0);
        assert!(matches!(l.lambda2(), Err(Error::NoEdges)));
    }

    #[test]
    fn cap_is_enforced() {
        let g = InteractionGraph::path(9).unwrap();
        assert!(matches!(QuantumLaplacian::build(&g), Err(Error::QubitCap { n: 9, cap: 8 })));
        assert!(QuantumLaplacian::build_capped(&InteractionGraph::path(3).unwrap(), 2).is_err());
    }

    #[test]
    fn zero_weights_keep_partition() {
        let g = InteractionGraph::complete(3).unwrap();
        let l = QuantumLaplacian::with_weights(&g, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(l.kernel_dimension(), 20);
        // only {1,2} active: orbits of size 3 split, so λ₂ of the fixed blocks is 0
        assert!(l.lambda2().unwrap().abs() < 1e-12);
        assert!(QuantumLaplacian::with_weights(&g, &[1.0, -1.0, 0.0]).is_err());
        assert!(QuantumLaplacian::with_weights(&g, &[1.0]).is_err());
    }

    #[test]
    fn coo_export() {
        let l = QuantumLaplacian::build(&InteractionGraph::complete(2).unwrap()).unwrap();
        let mut buf = Vec::new();
        l.write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), l.nnz());
        assert!(text.lines().any(|line| line == "1 1 1.0000000000000000e0"));
        assert!(text.lines().any(|line| line == "1 2 -1.0000000000000000e0"));
    }

    #[test]
    fn rows_accumulate_parallel_edges() {
        // {1,2} fixes |011⟩; the other two swaps each contribute their weight
        let g = InteractionGraph::new(3, [(0, 1, 0.25), (1, 2, 0.5), (0, 2, 2.0)]).unwrap();
        let l = QuantumLaplacian::build(&g).unwrap();
        let v: BasisNode = "011|011".parse().unwrap();
        assert_eq!(l.entry(v.index(), v.index()), 0.25 + 2.0);
        let sum: f64 = l.row(v.index()).map(|(_, x)| x).sum();
        assert_eq!(sum, 0.0);
    }
}
