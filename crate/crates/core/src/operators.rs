//! Qubit permutations, swap operators and permutation-invariant Hamiltonians.

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::basis::{node_index, split_node_index, BasisNode, KetBits};
use crate::{Error, Result, C64, STRUCTURAL_CAP};

/// Tolerance on `‖HU − UH‖_max` when testing permutation invariance.
pub const COMMUTATOR_TOL: f64 = 1e-10;

/// Tolerance on the Hermiticity of Hamiltonian inputs.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A permutation `π` of the qubit positions `{0, …, n−1}`.
///
/// It acts on kets by `|q₁…q_n⟩ ↦ |q_{π(1)}…q_{π(n)}⟩`: the new position `i`
/// holds the old bit at `π(i)`. This is `U_π` on the computational basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection")));
            }
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    pub fn transposition(n: usize, j: usize, k: usize) -> Result<Self> {
        check_pair(n, j, k)?;
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(j, k);
        Ok(Self { images })
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// The permutation `ρ` with `F_ρ = F_self ∘ F_inner`, i.e. `ρ(i) = inner(self(i))`.
    pub fn compose(&self, inner: &Permutation) -> Result<Self> {
        if inner.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: inner.n(),
            });
        }
        Ok(Self {
            images: self.images.iter().map(|&i| inner.images[i]).collect(),
        })
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.n()];
        for (i, &p) in self.images.iter().enumerate() {
            images[p] = i;
        }
        Self { images }
    }

    /// All `n!` permutations in lexicographic order of their image lists.
    pub fn all(n: usize) -> Vec<Permutation> {
        fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            if prefix.len() == used.len() {
                out.push(Permutation {
                    images: prefix.clone(),
                });
                return;
            }
            for i in 0..used.len() {
                if !used[i] {
                    used[i] = true;
                    prefix.push(i);
                    rec(prefix, used, out);
                    prefix.pop();
                    used[i] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
        out
    }

    /// Action on a raw ket index.
    pub fn apply_ket_index(&self, ket: usize) -> usize {
        let n = self.n();
        self.images
            .iter()
            .fold(0, |acc, &src| (acc << 1) | ((ket >> (n - 1 - src)) & 1))
    }

    /// Action on a raw vectorization index.
    pub fn apply_node_index(&self, index: usize) -> usize {
        let n = self.n();
        let (ket, bra) = split_node_index(index, n);
        node_index(self.apply_ket_index(ket), self.apply_ket_index(bra), n)
    }

    pub fn apply_ket(&self, ket: KetBits) -> Result<KetBits> {
        if ket.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: ket.n(),
            });
        }
        KetBits::from_index(self.n(), self.apply_ket_index(ket.index()))
    }
}

fn check_pair(n: usize, j: usize, k: usize) -> Result<()> {
    if j == k {
        return Err(Error::InvalidPermutation(format!("swap of qubit {} with itself", j + 1)));
    }
    if j >= n || k >= n {
        return Err(Error::QubitOutOfRange { qubit: j.max(k), n });
    }
    Ok(())
}

/// `U_jk` on a computational-basis ket: exchanges the bits of qubits `j` and `k`.
pub fn swap_action(j: usize, k: usize, ket: KetBits) -> Result<KetBits> {
    check_pair(ket.n(), j, k)?;
    KetBits::from_index(
        ket.n(),
        crate::basis::swap_ket_bits(ket.index(), ket.n(), j, k),
    )
}

/// `F_π(|q⟩⟨p|) = |q_π⟩⟨p_π|`, the action of `ρ ↦ U_π ρ U_π†` on a basis element.
pub fn permute_node(pi: &Permutation, v: BasisNode) -> Result<BasisNode> {
    BasisNode::new(pi.apply_ket(v.ket)?, pi.apply_ket(v.bra)?)
}

/// Dense `2^n × 2^n` matrix of `U_π`.
pub fn permutation_matrix(pi: &Permutation) -> DMatrix<C64> {
    let dim = 1 << pi.n();
    let mut m = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        m[(pi.apply_ket_index(x), x)] = C64::new(1.0, 0.0);
    }
    m
}

/// Network Hamiltonian description.
#[derive(Clone, Debug, PartialEq)]
pub enum HamiltonianSpec {
    Zero,
    /// `H₀^{⊗n}`
    TensorPower(Matrix2<C64>),
    /// `H₀^{⊕n} = Σᵢ I^{⊗(i−1)} ⊗ H₀ ⊗ I^{⊗(n−i)}`
    KronSum(Matrix2<C64>),
    Dense(DMatrix<C64>),
}

impl HamiltonianSpec {
    pub fn pauli_z() -> Matrix2<C64> {
        Matrix2::new(
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-1.0, 0.0),
        )
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::TensorPower(h) | Self::KronSum(h) => h.iter().all(|z| *z == C64::new(0.0, 0.0)),
            Self::Dense(h) => h.iter().all(|z| *z == C64::new(0.0, 0.0)),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::TensorPower(_) => "tensor_power",
            Self::KronSum(_) => "kron_sum",
            Self::Dense(_) => "dense",
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: HamiltonianJson = serde_json::from_str(text)?;
        raw.try_into()
    }

    pub fn to_json_value(&self) -> HamiltonianJson {
        let pack = |m: &DMatrix<C64>| -> Vec<Vec<[f64; 2]>> {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect()
        };
        let small = |h: &Matrix2<C64>| pack(&DMatrix::from_iterator(2, 2, h.iter().copied()));
        match self {
            Self::Zero => HamiltonianJson {
                kind: "zero".into(),
                h0: None,
                dense_matrix: None,
            },
            Self::TensorPower(h) | Self::KronSum(h) => HamiltonianJson {
                kind: self.kind().into(),
                h0: Some(small(h)),
                dense_matrix: None,
            },
            Self::Dense(m) => HamiltonianJson {
                kind: "dense".into(),
                h0: None,
                dense_matrix: Some(pack(m)),
            },
        }
    }
}

/// `{"kind":"tensor_power","h0":[[[1,0],[0,0]],[[0,0],[-1,0]]]}`; complex
/// entries are `[re, im]` pairs, rows outermost.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_matrix: Option<Vec<Vec<[f64; 2]>>>,
}

/// Square complex matrix from rows of `[re, im]` pairs.
pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<C64>> {
    let dim = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: r.len(),
        });
    }
    Ok(DMatrix::from_fn(dim, dim, |r, c| {
        C64::new(rows[r][c][0], rows[r][c][1])
    }))
}

impl TryFrom<HamiltonianJson> for HamiltonianSpec {
    type Error = Error;

    fn try_from(raw: HamiltonianJson) -> Result<Self> {
        let h0 = || -> Result<Matrix2<C64>> {
            let rows = raw
                .h0
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument(format!("kind {:?} requires h0", raw.kind)))?;
            let m = matrix_from_pairs(rows)?;
            if m.nrows() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    got: m.nrows(),
                });
            }
            let h = Matrix2::from_iterator(m.iter().copied());
            check_hermitian(&DMatrix::from_iterator(2, 2, h.iter().copied()))?;
            Ok(h)
        };
        match raw.kind.as_str() {
            "zero" => Ok(Self::Zero),
            "tensor_power" => Ok(Self::TensorPower(h0()?)),
            "kron_sum" => Ok(Self::KronSum(h0()?)),
            "dense" => {
                let rows = raw
                    .dense_matrix
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("kind \"dense\" requires dense_matrix".into()))?;
                let m = matrix_from_pairs(rows)?;
                check_hermitian(&m)?;
                Ok(Self::Dense(m))
            }
            other => Err(Error::InvalidArgument(format!("unknown Hamiltonian kind {other:?}"))),
        }
    }
}

/// Max-entry norm of `H − H†`.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

fn check_hermitian(m: &DMatrix<C64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Dense `2^n × 2^n` Hamiltonian for `spec` (`ħ = 1`).
pub fn build_hamiltonian(spec: &HamiltonianSpec, n: usize) -> Result<DMatrix<C64>> {
    if n == 0 || n > STRUCTURAL_CAP {
        return Err(Error::QubitCap {
            n,
            cap: STRUCTURAL_CAP,
        });
    }
    let dim = 1usize << n;
    let as_dense = |h: &Matrix2<C64>| DMatrix::from_iterator(2, 2, h.iter().copied());
    let h = match spec {
        HamiltonianSpec::Zero => DMatrix::zeros(dim, dim),
        HamiltonianSpec::TensorPower(h0) => {
            let h0 = as_dense(h0);
            check_hermitian(&h0)?;
            (1..n).fold(h0.clone(), |acc, _| kron(&acc, &h0))
        }
        HamiltonianSpec::KronSum(h0) => {
            let h0 = as_dense(h0);
            check_hermitian(&h0)?;
            let mut sum = DMatrix::zeros(dim, dim);
            for i in 0..n {
                let left = DMatrix::<C64>::identity(1 << i, 1 << i);
                let right = DMatrix::<C64>::identity(1 << (n - 1 - i), 1 << (n - 1 - i));
                sum += kron(&kron(&left, &h0), &right);
            }
            sum
        }
        HamiltonianSpec::Dense(m) => {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.nrows(),
                });
            }
            check_hermitian(m)?;
            m.clone()
        }
    };
    Ok(h)
}

/// `‖H U_π − U_π H‖_max` for `π` the transposition of qubits `j, k`.
///
/// `U` is a real permutation involution, so this equals `‖H − U H U‖_max`,
/// which only needs entry lookups.
pub fn swap_commutator_defect(h: &DMatrix<C64>, n: usize, j: usize, k: usize) -> f64 {
    let dim = 1 << n;
    let s: Vec<usize> = (0..dim)
        .map(|x| crate::basis::swap_ket_bits(x, n, j, k))
        .collect();
    let mut worst: f64 = 0.0;
    for c in 0..dim {
        for r in 0..dim {
            worst = worst.max((h[(r, c)] - h[(s[r], s[c])]).norm());
        }
    }
    worst
}

/// True iff `H` commutes with every qubit permutation, tested on the
/// adjacent transpositions that generate the symmetric group.
pub fn commutes_with_all_permutations(h: &DMatrix<C64>, n: usize) -> Result<bool> {
    let dim = 1usize << n;
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: h.nrows(),
        });
    }
    Ok((0..n.saturating_sub(1)).all(|i| swap_commutator_defect(h, n, i, i + 1) <= COMMUTATOR_TOL))
}
