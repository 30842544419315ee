//! Core probability types: points on the simplex, dense joint-distribution
//! tensors, stochastic matrices, and conditional transition matrices with
//! per-column definedness.
//!
//! # Conventions
//!
//! * States are `0..d-1`. Time positions ("axes") are 1-based: axis 1 is the
//!   earliest time step, axis `m` the latest.
//! * A [`JointDist`] of order `m` stores its `d^m` cells in one flat vector,
//!   lexicographic with the axis-1 state fastest-varying:
//!   `probs[j1 + d*j2 + d^2*j3 + ...]`.
//! * Matrices are column-stochastic: entry `(j, j')` is the probability of
//!   landing in `j` given `j'`, and each column sums to 1.

use crate::linalg::Mat;
use crate::tolerances::{ATOL, ZTOL};
use crate::{Error, Result};

/// A point on the probability simplex of dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    entries: Vec<f64>,
}

impl ProbVector {
    /// Validates non-negativity (within `-ATOL`) and normalization.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput {
                what: "probability vector dimension",
            });
        }
        check_simplex(&entries)?;
        Ok(ProbVector { entries })
    }

    pub fn uniform(dim: usize) -> Self {
        ProbVector {
            entries: vec![1.0 / dim as f64; dim],
        }
    }

    /// The vector with all mass on `state`.
    pub fn point_mass(dim: usize, state: usize) -> Self {
        let mut entries = vec![0.0; dim];
        entries[state] = 1.0;
        ProbVector { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, state: usize) -> f64 {
        self.entries[state]
    }
}

fn check_simplex(entries: &[f64]) -> Result<()> {
    for (i, &p) in entries.iter().enumerate() {
        if p < -ATOL || !p.is_finite() {
            return Err(Error::NegativeEntry { index: i, value: p });
        }
    }
    let sum: f64 = entries.iter().sum();
    if (sum - 1.0).abs() > ATOL {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

/// A conditional probability together with a flag telling whether the
/// conditioning event had positive probability. When `defined` is false the
/// value carries no meaning and must not enter any check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditional {
    pub value: f64,
    pub defined: bool,
}

impl Conditional {
    pub const UNDEFINED: Conditional = Conditional {
        value: 0.0,
        defined: false,
    };

    pub fn defined(value: f64) -> Self {
        Conditional {
            value,
            defined: true,
        }
    }
}

/// Conditional probabilities of the outcomes on a set of future axes, given
/// a fixed assignment of states to past axes.
#[derive(Debug, Clone)]
pub struct ConditionalTable {
    dim: usize,
    axes: Vec<usize>,
    values: Vec<Conditional>,
}

impl ConditionalTable {
    /// The future axes, ascending in time.
    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Look up the conditional for one assignment of the future axes;
    /// `states[i]` is the state at `axes()[i]`.
    pub fn get(&self, states: &[usize]) -> Conditional {
        assert_eq!(states.len(), self.axes.len(), "one state per future axis");
        let mut idx = 0;
        for &s in states.iter().rev() {
            debug_assert!(s < self.dim);
            idx = idx * self.dim + s;
        }
        self.values[idx]
    }

    pub fn values(&self) -> &[Conditional] {
        &self.values
    }
}

/// A d×d column-stochastic matrix: all entries non-negative, every column
/// sums to 1 within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct StochMatrix {
    mat: Mat,
}

impl StochMatrix {
    /// Build from rows (the usual written layout `[[row0], [row1], ...]`),
    /// validating stochasticity.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::EmptyInput {
                what: "matrix dimension",
            });
        }
        let mut mat = Mat::zeros(d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::LengthMismatch {
                    what: "matrix row",
                    expected: d,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                mat.set(i, j, v);
            }
        }
        Self::from_mat(mat)
    }

    /// Build from columns, each a probability vector.
    pub fn from_columns(columns: Vec<ProbVector>) -> Result<Self> {
        let d = columns.len();
        if d == 0 {
            return Err(Error::EmptyInput {
                what: "matrix dimension",
            });
        }
        let mut mat = Mat::zeros(d);
        for (j, col) in columns.iter().enumerate() {
            if col.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: col.dim(),
                });
            }
            for i in 0..d {
                mat.set(i, j, col.get(i));
            }
        }
        Ok(StochMatrix { mat })
    }

    pub(crate) fn from_mat(mat: Mat) -> Result<Self> {
        let d = mat.dim;
        for j in 0..d {
            let mut sum = 0.0;
            for i in 0..d {
                let v = mat.get(i, j);
                if v < -ATOL || !v.is_finite() {
                    return Err(Error::NegativeEntry {
                        index: j * d + i,
                        value: v,
                    });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > ATOL {
                return Err(Error::ColumnNotNormalized { column: j, sum });
            }
        }
        Ok(StochMatrix { mat })
    }

    pub fn identity(dim: usize) -> Self {
        StochMatrix {
            mat: Mat::identity(dim),
        }
    }

    /// The matrix with every entry `1/d` (all columns uniform).
    pub fn uniform(dim: usize) -> Self {
        StochMatrix {
            mat: Mat {
                dim,
                data: vec![1.0 / dim as f64; dim * dim],
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.mat.get(row, col)
    }

    pub fn column(&self, col: usize) -> &[f64] {
        self.mat.column(col)
    }

    /// Matrix product; stochastic matrices are closed under composition.
    pub fn mul(&self, other: &StochMatrix) -> StochMatrix {
        StochMatrix {
            mat: self.mat.mul(&other.mat),
        }
    }

    pub fn apply(&self, v: &ProbVector) -> ProbVector {
        ProbVector {
            entries: self.mat.mul_vec(v.entries()),
        }
    }

    pub(crate) fn raw(&self) -> &Mat {
        &self.mat
    }

    /// Largest absolute entry difference against another matrix.
    pub fn max_abs_diff(&self, other: &StochMatrix) -> f64 {
        self.mat
            .data
            .iter()
            .zip(other.mat.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A conditional transition matrix extracted from data: column `j'` holds
/// `p(j at later time | j' at earlier time, fixed history)`, with a flag per
/// column recording whether the conditioning event had positive probability.
/// Undefined columns are stored as zeros and must be skipped by every check.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    mat: Mat,
    defined: Vec<bool>,
}

impl TransitionMatrix {
    pub(crate) fn new(mat: Mat, defined: Vec<bool>) -> Self {
        debug_assert_eq!(mat.dim, defined.len());
        TransitionMatrix { mat, defined }
    }

    /// A fully-defined transition matrix from a stochastic matrix.
    pub fn from_stochastic(m: &StochMatrix) -> Self {
        TransitionMatrix {
            mat: m.raw().clone(),
            defined: vec![true; m.dim()],
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.mat.get(row, col)
    }

    pub fn column(&self, col: usize) -> &[f64] {
        self.mat.column(col)
    }

    pub fn is_defined(&self, col: usize) -> bool {
        self.defined[col]
    }

    /// True when at least one column is defined.
    pub fn any_defined(&self) -> bool {
        self.defined.iter().any(|&b| b)
    }

    /// Convert to a plain stochastic matrix; fails on the first undefined
    /// column.
    pub fn to_stochastic(&self) -> Result<StochMatrix> {
        if let Some(col) = self.defined.iter().position(|&b| !b) {
            return Err(Error::UndefinedColumn { column: col });
        }
        StochMatrix::from_mat(self.mat.clone())
    }

    /// Complete into a stochastic matrix by filling every undefined column
    /// `k` with the point mass on `k` (the state stays put). The filled
    /// columns are unconstrained by the data, so any stochastic completion
    /// would be equally valid; this one is deterministic.
    pub fn complete_with_identity(&self) -> StochMatrix {
        let d = self.mat.dim;
        let mut mat = self.mat.clone();
        for (k, &def) in self.defined.iter().enumerate() {
            if !def {
                for i in 0..d {
                    mat.set(i, k, if i == k { 1.0 } else { 0.0 });
                }
            }
        }
        StochMatrix { mat }
    }

    /// `self * v`, treating undefined columns as zero. Callers must ensure
    /// undefined columns carry zero weight in `v` (which holds whenever `v`
    /// itself comes from the same distribution).
    pub(crate) fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.mat.mul_vec(v)
    }
}

/// A dense joint probability distribution of order `m` over `d` states,
/// with implicitly ordered times `t1 <= ... <= tm`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    dim: usize,
    order: usize,
    probs: Vec<f64>,
}

impl JointDist {
    /// Validates shape, non-negativity (within `-ATOL`), and normalization.
    pub fn new(dim: usize, order: usize, probs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyInput {
                what: "state space dimension",
            });
        }
        if order == 0 {
            return Err(Error::EmptyInput {
                what: "tensor order",
            });
        }
        let expected = dim.pow(order as u32);
        if probs.len() != expected {
            return Err(Error::LengthMismatch {
                what: "tensor",
                expected,
                got: probs.len(),
            });
        }
        check_simplex(&probs)?;
        Ok(JointDist { dim, order, probs })
    }

    /// Skips validation. For construction of deliberately malformed tensors
    /// in tests and for internal exact constructions.
    pub fn new_unchecked(dim: usize, order: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), dim.pow(order as u32));
        JointDist { dim, order, probs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Flat index of a cell; `states[k]` is the state at axis `k+1`
    /// (earliest time first).
    pub fn index_of(&self, states: &[usize]) -> usize {
        assert_eq!(states.len(), self.order, "one state per axis");
        let mut idx = 0;
        for &s in states.iter().rev() {
            debug_assert!(s < self.dim);
            idx = idx * self.dim + s;
        }
        idx
    }

    /// Cell probability; `states` in time order, earliest first.
    pub fn prob(&self, states: &[usize]) -> f64 {
        self.probs[self.index_of(states)]
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis == 0 || axis > self.order {
            return Err(Error::AxisOutOfRange {
                axis,
                order: self.order,
            });
        }
        Ok(())
    }

    /// Sum out the state at time position `axis`, producing the
    /// order-`m-1` distribution over the remaining times.
    pub fn marginalize(&self, axis: usize) -> Result<JointDist> {
        self.check_axis(axis)?;
        if self.order < 2 {
            return Err(Error::OrderTooSmall {
                order: self.order,
                needed: 2,
            });
        }
        let d = self.dim;
        let stride = d.pow(axis as u32 - 1);
        let mut out = vec![0.0; self.probs.len() / d];
        for (idx, &p) in self.probs.iter().enumerate() {
            let lower = idx % stride;
            let upper = idx / (stride * d);
            out[upper * stride + lower] += p;
        }
        Ok(JointDist {
            dim: d,
            order: self.order - 1,
            probs: out,
        })
    }

    /// Marginal distribution of the state at `axis`.
    pub fn one_point(&self, axis: usize) -> Result<ProbVector> {
        self.check_axis(axis)?;
        let d = self.dim;
        let stride = d.pow(axis as u32 - 1);
        let mut out = vec![0.0; d];
        for (idx, &p) in self.probs.iter().enumerate() {
            out[(idx / stride) % d] += p;
        }
        Ok(ProbVector { entries: out })
    }

    /// Conditional distribution of the outcomes on `future_axes` given the
    /// states assigned to the past axes. All past axes must be strictly
    /// earlier than all future axes; axes not mentioned are summed out.
    /// Entries are undefined wherever the conditioning event has
    /// probability below `ZTOL`.
    pub fn condition(
        &self,
        future_axes: &[usize],
        past: &[(usize, usize)],
    ) -> Result<ConditionalTable> {
        if future_axes.is_empty() {
            return Err(Error::EmptyInput {
                what: "future axis set",
            });
        }
        let mut axes = future_axes.to_vec();
        axes.sort_unstable();
        axes.dedup();
        if axes.len() != future_axes.len() {
            return Err(Error::OverlappingAxes { axis: 0 });
        }
        for &a in &axes {
            self.check_axis(a)?;
        }
        for &(a, s) in past {
            self.check_axis(a)?;
            if s >= self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: s,
                });
            }
            if axes.binary_search(&a).is_ok() {
                return Err(Error::OverlappingAxes { axis: a });
            }
        }
        if let (Some(&max_past), Some(&min_future)) =
            (past.iter().map(|(a, _)| a).max(), axes.first())
        {
            if max_past >= min_future {
                return Err(Error::AxesNotOrdered {
                    earlier: max_past,
                    later: min_future,
                });
            }
        }

        let d = self.dim;
        let strides: Vec<usize> = axes.iter().map(|&a| d.pow(a as u32 - 1)).collect();
        let past_strides: Vec<(usize, usize)> = past
            .iter()
            .map(|&(a, s)| (d.pow(a as u32 - 1), s))
            .collect();

        let n_cells = d.pow(axes.len() as u32);
        let mut joint = vec![0.0; n_cells];
        let mut past_mass = 0.0;
        for (idx, &p) in self.probs.iter().enumerate() {
            if past_strides.iter().any(|&(st, s)| (idx / st) % d != s) {
                continue;
            }
            past_mass += p;
            let mut cell = 0;
            for st in strides.iter().rev() {
                cell = cell * d + (idx / st) % d;
            }
            joint[cell] += p;
        }

        let values = if past_mass > ZTOL {
            joint
                .into_iter()
                .map(|p| Conditional::defined(p / past_mass))
                .collect()
        } else {
            vec![Conditional::UNDEFINED; n_cells]
        };
        Ok(ConditionalTable { dim: d, axes, values })
    }

    /// The transition matrix from `from_axis` to `to_axis`: column `j'` is
    /// `p(. at to_axis | j' at from_axis)`, with columns whose conditioning
    /// state has probability 0 flagged undefined.
    pub fn transition_matrix(&self, to_axis: usize, from_axis: usize) -> Result<TransitionMatrix> {
        self.check_axis(to_axis)?;
        self.check_axis(from_axis)?;
        if from_axis >= to_axis {
            return Err(Error::AxesNotOrdered {
                earlier: from_axis,
                later: to_axis,
            });
        }
        let d = self.dim;
        let to_stride = d.pow(to_axis as u32 - 1);
        let from_stride = d.pow(from_axis as u32 - 1);
        let mut pair = Mat::zeros(d);
        for (idx, &p) in self.probs.iter().enumerate() {
            let j_to = (idx / to_stride) % d;
            let j_from = (idx / from_stride) % d;
            pair.set(j_to, j_from, pair.get(j_to, j_from) + p);
        }
        let mut mat = Mat::zeros(d);
        let mut defined = vec![false; d];
        for col in 0..d {
            let mass: f64 = pair.column(col).iter().sum();
            if mass > ZTOL {
                defined[col] = true;
                for row in 0..d {
                    mat.set(row, col, pair.get(row, col) / mass);
                }
            }
        }
        Ok(TransitionMatrix { mat, defined })
    }

    /// The product distribution with the given per-axis marginals
    /// (earliest time first): all axes mutually independent.
    pub fn independent(marginals: &[&ProbVector]) -> Result<JointDist> {
        if marginals.is_empty() {
            return Err(Error::EmptyInput {
                what: "tensor order",
            });
        }
        let d = marginals[0].dim();
        for m in marginals {
            if m.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: m.dim(),
                });
            }
        }
        let order = marginals.len();
        let mut probs = vec![0.0; d.pow(order as u32)];
        for (idx, slot) in probs.iter_mut().enumerate() {
            let mut p = 1.0;
            let mut rest = idx;
            for marg in marginals {
                p *= marg.get(rest % d);
                rest /= d;
            }
            *slot = p;
        }
        Ok(JointDist {
            dim: d,
            order,
            probs,
        })
    }
}
