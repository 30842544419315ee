//! Divisibility structure of a process: memory transition matrices, the
//! Chapman-Kolmogorov check, P-divisibility as a linear feasibility problem,
//! the necessary consistency condition for P-divisible processes, and the
//! Markov condition.
//!
//! Throughout, conditionals on zero-probability events are undefined and
//! skipped: such columns are stored as zeros and always appear with zero
//! weight in the column products below, so skipping is exact rather than
//! approximate.

use crate::consistency::CheckReport;
use crate::linalg::Mat;
use crate::prob::{JointDist, StochMatrix, TransitionMatrix};
use crate::simplex;
use crate::tolerances::{ATOL, FTOL, WITNESS_TOL, ZTOL};
use crate::{Error, Result};

/// An indexed family of memory transition matrices of level `l`: one d×d
/// conditional transition matrix per history tuple in `{0..d-1}^l`.
///
/// The matrix for history `(k_l, ..., k_1)` (latest history time first) has
/// entry `(v, j)` equal to the probability of state `v` at time `l+2` given
/// state `j` at time `l+1` and the history states `k_i` at times `i`.
#[derive(Debug, Clone)]
pub struct MemoryFamily {
    level: usize,
    dim: usize,
    matrices: Vec<TransitionMatrix>,
}

impl MemoryFamily {
    /// Assemble a family from explicit matrices, ordered by history index
    /// (see [`MemoryFamily::history_index`]). Every defined column must be
    /// a probability vector.
    pub fn from_matrices(
        dim: usize,
        level: usize,
        matrices: Vec<TransitionMatrix>,
    ) -> Result<Self> {
        let expected = dim.pow(level as u32);
        if matrices.len() != expected {
            return Err(Error::LengthMismatch {
                what: "memory family",
                expected,
                got: matrices.len(),
            });
        }
        for m in &matrices {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.dim(),
                });
            }
            for col in 0..dim {
                if m.is_defined(col) {
                    let sum: f64 = m.column(col).iter().sum();
                    if (sum - 1.0).abs() > ATOL {
                        return Err(Error::ColumnNotNormalized { column: col, sum });
                    }
                    if let Some(v) = m.column(col).iter().find(|&&v| v < -ATOL) {
                        return Err(Error::NegativeEntry {
                            index: col,
                            value: *v,
                        });
                    }
                }
            }
        }
        Ok(MemoryFamily {
            level,
            dim,
            matrices,
        })
    }

    /// Level-1 family from one fully-defined stochastic matrix per
    /// conditioning state.
    pub fn from_level1(matrices: Vec<StochMatrix>) -> Result<Self> {
        let dim = matrices
            .first()
            .ok_or(Error::EmptyInput {
                what: "memory family size",
            })?
            .dim();
        let wrapped = matrices
            .iter()
            .map(TransitionMatrix::from_stochastic)
            .collect();
        Self::from_matrices(dim, 1, wrapped)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Flat index of a history tuple given latest-first, i.e.
    /// `(k_l, ..., k_1)`; the earliest state `k_1` varies fastest.
    pub fn history_index(&self, history: &[usize]) -> usize {
        assert_eq!(history.len(), self.level, "one state per history step");
        let mut idx = 0;
        for &k in history {
            debug_assert!(k < self.dim);
            idx = idx * self.dim + k;
        }
        idx
    }

    /// The matrix for a history tuple given latest-first.
    pub fn matrix(&self, history: &[usize]) -> &TransitionMatrix {
        &self.matrices[self.history_index(history)]
    }

    pub fn matrices(&self) -> &[TransitionMatrix] {
        &self.matrices
    }

    /// Iterate `(history, matrix)` pairs; histories are latest-first.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &TransitionMatrix)> {
        let d = self.dim;
        let level = self.level;
        self.matrices.iter().enumerate().map(move |(idx, m)| {
            let mut history = vec![0; level];
            let mut rest = idx;
            for slot in history.iter_mut().rev() {
                *slot = rest % d;
                rest /= d;
            }
            (history, m)
        })
    }
}

/// Extract the level-`l` memory transition matrices from a joint
/// distribution of order at least `l + 2`. Later time steps are summed out;
/// the matrices describe the transition from time `l+1` to time `l+2`
/// conditioned on the first `l` states.
pub fn memory_matrices(joint: &JointDist, level: usize) -> Result<MemoryFamily> {
    if level == 0 {
        return Err(Error::EmptyInput {
            what: "memory level",
        });
    }
    if joint.order() < level + 2 {
        return Err(Error::OrderTooSmall {
            order: joint.order(),
            needed: level + 2,
        });
    }
    let mut reduced = joint.clone();
    while reduced.order() > level + 2 {
        reduced = reduced.marginalize(reduced.order())?;
    }
    let d = reduced.dim();
    let n_hist = d.pow(level as u32);
    let hist_block = n_hist; // strides: history occupies the low `level` digits
    let mut sums = vec![Mat::zeros(d); n_hist];
    for (idx, &p) in reduced.probs().iter().enumerate() {
        let hist = idx % hist_block;
        let from = (idx / hist_block) % d;
        let to = idx / (hist_block * d);
        let prev = sums[hist].get(to, from);
        sums[hist].set(to, from, prev + p);
    }
    let matrices = sums
        .into_iter()
        .map(|pair| {
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
            TransitionMatrix::new(mat, defined)
        })
        .collect();
    Ok(MemoryFamily {
        level,
        dim: d,
        matrices,
    })
}

/// The three transition matrices of a three-step evolution, extracted from
/// the first three axes of `joint`: `(t3 <- t1, t3 <- t2, t2 <- t1)`.
pub fn transition_triple(
    joint: &JointDist,
) -> Result<(TransitionMatrix, TransitionMatrix, TransitionMatrix)> {
    Ok((
        joint.transition_matrix(3, 1)?,
        joint.transition_matrix(3, 2)?,
        joint.transition_matrix(2, 1)?,
    ))
}

/// Checks the Chapman-Kolmogorov composition `long = step * first` column
/// by column, skipping columns where `first` (or `long`) is undefined.
/// Undefined columns of `step` carry zero weight in every defined column of
/// `first`, so the product is exact.
pub fn chapman_kolmogorov_check(
    long: &TransitionMatrix,
    step: &TransitionMatrix,
    first: &TransitionMatrix,
) -> CheckReport {
    let d = long.dim();
    assert_eq!(step.dim(), d, "matrix dimensions must match");
    assert_eq!(first.dim(), d, "matrix dimensions must match");
    let mut max_residual = 0.0;
    let mut witness = None;
    for k in 0..d {
        if !first.is_defined(k) || !long.is_defined(k) {
            continue;
        }
        let composed = step.mul_vec(first.column(k));
        for v in 0..d {
            let diff = (composed[v] - long.get(v, k)).abs();
            if diff > max_residual {
                max_residual = diff;
                witness = Some(vec![k, v]);
            }
        }
    }
    CheckReport::from_scan("chapman-kolmogorov", max_residual, witness, ATOL)
}

/// Outcome of the P-divisibility feasibility problem: does a
/// column-stochastic `M` with `M * lambda_s = lambda_t` exist?
#[derive(Debug, Clone)]
pub struct FeasibilityResult {
    pub feasible: bool,
    /// A stochastic solution when one exists.
    pub witness: Option<StochMatrix>,
    /// When feasible: the largest entry of `|witness * lambda_s - lambda_t|`.
    /// When infeasible: the size of the obstruction (the stochasticity
    /// defect of the unique algebraic solution, or the constraint mass the
    /// feasibility solver could not remove).
    pub residual: f64,
    /// A second, distinct witness when the solution is not unique.
    pub alternate: Option<StochMatrix>,
}

impl FeasibilityResult {
    /// True when the probe found two witnesses differing by more than
    /// `WITNESS_TOL` in some entry.
    pub fn multiple_witnesses(&self) -> bool {
        self.alternate.is_some()
    }
}

/// Decide whether a column-stochastic `M` with `M * lambda_s = lambda_t`
/// exists.
///
/// When `lambda_s` is invertible the unique candidate
/// `lambda_t * lambda_s^-1` is computed directly and tested for
/// stochasticity. Otherwise the constraints (`M >= 0`, unit column sums,
/// `M * lambda_s = lambda_t`) are handed to a phase-1 simplex over the d*d
/// unknowns; on feasibility, two vertex solutions under opposite objectives
/// probe for non-uniqueness.
pub fn p_divisible(lambda_t: &StochMatrix, lambda_s: &StochMatrix) -> FeasibilityResult {
    let d = lambda_s.dim();
    assert_eq!(lambda_t.dim(), d, "matrix dimensions must match");

    if let Some(inv) = lambda_s.raw().inverse(1e-10) {
        let candidate = lambda_t.raw().mul(&inv);
        let mut violation: f64 = 0.0;
        for col in 0..d {
            let mut sum = 0.0;
            for row in 0..d {
                let v = candidate.get(row, col);
                sum += v;
                if v < 0.0 {
                    violation = violation.max(-v);
                }
            }
            violation = violation.max((sum - 1.0).abs());
        }
        if violation <= FTOL {
            let witness = clean_stochastic(candidate, d);
            let residual = reconstruction_residual(&witness, lambda_s, lambda_t);
            return FeasibilityResult {
                feasible: true,
                witness: Some(witness),
                residual,
                alternate: None,
            };
        }
        return FeasibilityResult {
            feasible: false,
            witness: None,
            residual: violation,
            alternate: None,
        };
    }

    // Singular lambda_s: linear feasibility over the entries of M,
    // variable (row v, col j) at index j*d + v.
    let n = d * d;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + d);
    let mut rhs: Vec<f64> = Vec::with_capacity(n + d);
    for k in 0..d {
        for v in 0..d {
            let mut row = vec![0.0; n];
            for j in 0..d {
                row[j * d + v] = lambda_s.get(j, k);
            }
            rows.push(row);
            rhs.push(lambda_t.get(v, k));
        }
    }
    for j in 0..d {
        let mut row = vec![0.0; n];
        for v in 0..d {
            row[j * d + v] = 1.0;
        }
        rows.push(row);
        rhs.push(1.0);
    }

    // opposite objectives over the diagonal steer the solve toward
    // different vertices when the solution set has positive dimension
    let mut trace_cost = vec![0.0; n];
    for v in 0..d {
        trace_cost[v * d + v] = 1.0;
    }
    let min_trace = simplex::minimize(&trace_cost, &rows, &rhs);
    let Some(first) = min_trace.solution else {
        return FeasibilityResult {
            feasible: false,
            witness: None,
            residual: min_trace.infeasibility,
            alternate: None,
        };
    };
    let neg_cost: Vec<f64> = trace_cost.iter().map(|c| -c).collect();
    let second = simplex::minimize(&neg_cost, &rows, &rhs)
        .solution
        .expect("same constraints were feasible above");

    let witness = clean_stochastic(Mat { dim: d, data: first.clone() }, d);
    let residual = reconstruction_residual(&witness, lambda_s, lambda_t);
    let differs = first
        .iter()
        .zip(second.iter())
        .any(|(a, b)| (a - b).abs() > WITNESS_TOL);
    let alternate = differs.then(|| clean_stochastic(Mat { dim: d, data: second }, d));
    FeasibilityResult {
        feasible: true,
        witness: Some(witness),
        residual,
        alternate,
    }
}

/// Clamp rounding-level negatives to zero and rescale columns to unit sum.
fn clean_stochastic(mut mat: Mat, d: usize) -> StochMatrix {
    for col in 0..d {
        let mut sum = 0.0;
        for row in 0..d {
            let v = mat.get(row, col).max(0.0);
            mat.set(row, col, v);
            sum += v;
        }
        for row in 0..d {
            mat.set(row, col, mat.get(row, col) / sum);
        }
    }
    StochMatrix::from_mat(mat).expect("cleaned matrix is stochastic")
}

fn reconstruction_residual(m: &StochMatrix, lambda_s: &StochMatrix, lambda_t: &StochMatrix) -> f64 {
    m.mul(lambda_s).max_abs_diff(lambda_t)
}

/// The consistency condition every P-divisible process must satisfy,
/// linking memory transition matrices to one-step transition matrices at
/// the given tensor order (3, 4, or 5). Column products are compared per
/// initial state `k`; histories with zero-probability conditioning events
/// contribute zero weight and drop out exactly.
pub fn necessary_condition(joint: &JointDist, order: usize) -> Result<CheckReport> {
    if !(3..=5).contains(&order) {
        return Err(Error::UnsupportedOrder {
            order,
            supported: "3, 4, 5",
        });
    }
    if joint.order() < order {
        return Err(Error::OrderTooSmall {
            order: joint.order(),
            needed: order,
        });
    }
    let d = joint.dim();
    let first = joint.transition_matrix(2, 1)?;
    let s1 = joint.transition_matrix(3, 2)?;
    let q1 = memory_matrices(joint, 1)?;
    let (q2, s2) = if order >= 4 {
        (
            Some(memory_matrices(joint, 2)?),
            Some(joint.transition_matrix(4, 3)?),
        )
    } else {
        (None, None)
    };
    let (q3, s3) = if order >= 5 {
        (
            Some(memory_matrices(joint, 3)?),
            Some(joint.transition_matrix(5, 4)?),
        )
    } else {
        (None, None)
    };

    let mut max_residual = 0.0;
    let mut witness = None;
    for k in 0..d {
        if !first.is_defined(k) {
            continue;
        }
        let c_k = first.column(k);

        let lhs = match order {
            3 => q1.matrix(&[k]).mul_vec(c_k),
            4 => {
                let q2 = q2.as_ref().unwrap();
                // column n of the assembled matrix is Q2^(n:k) applied to
                // column n of Q1^(k)
                let mut lhs = vec![0.0; d];
                for n in 0..d {
                    let weight = c_k[n];
                    if weight == 0.0 {
                        continue;
                    }
                    let g_col = q2.matrix(&[n, k]).mul_vec(q1.matrix(&[k]).column(n));
                    for v in 0..d {
                        lhs[v] += g_col[v] * weight;
                    }
                }
                lhs
            }
            5 => {
                let q2 = q2.as_ref().unwrap();
                let q3 = q3.as_ref().unwrap();
                let mut lhs = vec![0.0; d];
                for n in 0..d {
                    let weight_n = c_k[n];
                    if weight_n == 0.0 {
                        continue;
                    }
                    // G3^(n:k) applied to column n of Q1^(k)
                    let mut outer = vec![0.0; d];
                    for mm in 0..d {
                        let weight_m = q1.matrix(&[k]).get(mm, n);
                        if weight_m == 0.0 {
                            continue;
                        }
                        let g3_col = q3
                            .matrix(&[mm, n, k])
                            .mul_vec(q2.matrix(&[n, k]).column(mm));
                        for v in 0..d {
                            outer[v] += g3_col[v] * weight_m;
                        }
                    }
                    for v in 0..d {
                        lhs[v] += outer[v] * weight_n;
                    }
                }
                lhs
            }
            _ => unreachable!(),
        };

        let mut rhs = s1.mul_vec(c_k);
        if let Some(s2) = &s2 {
            rhs = s2.mul_vec(&rhs);
        }
        if let Some(s3) = &s3 {
            rhs = s3.mul_vec(&rhs);
        }

        for v in 0..d {
            let diff = (lhs[v] - rhs[v]).abs();
            if diff > max_residual {
                max_residual = diff;
                witness = Some(vec![k, v]);
            }
        }
    }
    Ok(CheckReport::from_scan(
        &format!("necessary-condition-{order}"),
        max_residual,
        witness,
        ATOL,
    ))
}

/// The Markov condition in memory-matrix form: at every level
/// `l <= order - 2`, every memory transition matrix must equal the
/// unconditioned transition matrix of the matching step, on its defined
/// columns. The report carries the largest deviation; the witness is
/// `[level, history..., column, row]`.
pub fn markov_condition(joint: &JointDist) -> Result<CheckReport> {
    if joint.order() < 3 {
        return Err(Error::OrderTooSmall {
            order: joint.order(),
            needed: 3,
        });
    }
    let d = joint.dim();
    let mut max_residual = 0.0;
    let mut witness = None;
    for level in 1..=joint.order() - 2 {
        let family = memory_matrices(joint, level)?;
        let step = joint.transition_matrix(level + 2, level + 1)?;
        for (history, matrix) in family.iter() {
            for col in 0..d {
                if !matrix.is_defined(col) || !step.is_defined(col) {
                    continue;
                }
                for row in 0..d {
                    let diff = (matrix.get(row, col) - step.get(row, col)).abs();
                    if diff > max_residual {
                        max_residual = diff;
                        let mut w = vec![level];
                        w.extend_from_slice(&history);
                        w.push(col);
                        w.push(row);
                        witness = Some(w);
                    }
                }
            }
        }
    }
    Ok(CheckReport::from_scan(
        "markov-condition",
        max_residual,
        witness,
        ATOL,
    ))
}
