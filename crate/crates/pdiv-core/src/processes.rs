//! Built-in processes and constructors.
//!
//! The two families here are the classic three-state permutation process
//! (Feller's example of a non-Markovian process whose transition matrices
//! still compose) and a two-state chain together with its memory
//! perturbation: replacing the one-point memory matrix for initial state 0
//! by `eps * I + (1 - eps) * Q` injects a short-term memory effect while
//! the one-point dynamics stay those of the original chain.

use crate::divisibility::MemoryFamily;
use crate::prob::{JointDist, ProbVector, StochMatrix};
use crate::tolerances::ZTOL;
use crate::{Error, Result};

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(Error::OutOfUnitInterval { name, value });
    }
    Ok(())
}

/// The nine-point permutation process: three states, three time steps, equal
/// mass `1/9` on the six permutations of `(0,1,2)` and the three constant
/// paths. Pairwise independent but not mutually independent.
pub fn feller() -> JointDist {
    let mut probs = vec![0.0; 27];
    let mut put = |j3: usize, j2: usize, j1: usize| {
        probs[j1 + 3 * j2 + 9 * j3] = 1.0 / 9.0;
    };
    for p in [
        (0, 1, 2),
        (0, 2, 1),
        (1, 0, 2),
        (1, 2, 0),
        (2, 0, 1),
        (2, 1, 0),
        (0, 0, 0),
        (1, 1, 1),
        (2, 2, 2),
    ] {
        put(p.0, p.1, p.2);
    }
    JointDist::new_unchecked(3, 3, probs)
}

/// Two-state Markov chain over three time steps with initial vector
/// `(q1, 1-q1)`: the state flips deterministically from step 2 to step 3,
/// and step 2 is uniform regardless of the start.
///
/// Cells written `(j3, j2, j1)`: mass `q1/2` on `(0,1,0)` and `(1,0,0)`,
/// mass `(1-q1)/2` on `(0,1,1)` and `(1,0,1)`.
pub fn two_state_markov(q1: f64) -> Result<JointDist> {
    check_unit("q1", q1)?;
    let q2 = 1.0 - q1;
    let mut probs = vec![0.0; 8];
    probs[cell2(0, 1, 0)] = q1 / 2.0;
    probs[cell2(1, 0, 0)] = q1 / 2.0;
    probs[cell2(0, 1, 1)] = q2 / 2.0;
    probs[cell2(1, 0, 1)] = q2 / 2.0;
    Ok(JointDist::new_unchecked(2, 3, probs))
}

/// The memory perturbation of [`two_state_markov`]: paths starting in
/// state 0 keep their second step uniform but repeat it at step 3 with
/// probability `eps` instead of flipping. `eps = 0` reproduces the Markov
/// chain cell for cell; `eps > 0` leaves the one-point dynamics intact but
/// the process is no longer Markovian.
pub fn two_state_perturbed(q1: f64, eps: f64) -> Result<JointDist> {
    check_unit("q1", q1)?;
    check_unit("eps", eps)?;
    let q2 = 1.0 - q1;
    let mut probs = vec![0.0; 8];
    probs[cell2(0, 0, 0)] = eps / 2.0 * q1;
    probs[cell2(0, 1, 0)] = (1.0 - eps) / 2.0 * q1;
    probs[cell2(1, 0, 0)] = (1.0 - eps) / 2.0 * q1;
    probs[cell2(1, 1, 0)] = eps / 2.0 * q1;
    probs[cell2(0, 1, 1)] = q2 / 2.0;
    probs[cell2(1, 0, 1)] = q2 / 2.0;
    Ok(JointDist::new_unchecked(2, 3, probs))
}

#[inline]
fn cell2(j3: usize, j2: usize, j1: usize) -> usize {
    j1 + 2 * j2 + 4 * j3
}

/// The step-2-to-step-3 transition matrix of [`two_state_perturbed`] in
/// closed form:
/// `[[eps*q1, (1-eps)*q1 + q2], [(1-eps)*q1 + q2, eps*q1]]`.
pub fn perturbed_step_matrix(q1: f64, eps: f64) -> Result<StochMatrix> {
    check_unit("q1", q1)?;
    check_unit("eps", eps)?;
    let q2 = 1.0 - q1;
    let stay = eps * q1;
    let flip = (1.0 - eps) * q1 + q2;
    StochMatrix::from_rows(&[vec![stay, flip], vec![flip, stay]])
}

/// Chain-rule construction of an order-3 distribution from an initial
/// vector, a first-step stochastic matrix, and a level-1 memory family:
/// `p(j3, j2, j1) = Q^(j1)[j3, j2] * step[j2, j1] * init[j1]`.
///
/// For every start `j1` with positive initial mass and every `j2` the step
/// matrix can reach from it, the memory matrix for history `j1` must have
/// column `j2` defined; unreachable histories may be undefined.
pub fn build_from_kernels(
    init: &ProbVector,
    step: &StochMatrix,
    memory: &MemoryFamily,
) -> Result<JointDist> {
    let d = init.dim();
    if step.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: step.dim(),
        });
    }
    if memory.dim() != d || memory.level() != 1 {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: memory.dim(),
        });
    }
    let mut probs = vec![0.0; d * d * d];
    for j1 in 0..d {
        let p1 = init.get(j1);
        if p1 <= ZTOL {
            continue;
        }
        let q = memory.matrix(&[j1]);
        for j2 in 0..d {
            let w = step.get(j2, j1) * p1;
            if w <= ZTOL {
                continue;
            }
            if !q.is_defined(j2) {
                return Err(Error::MissingKernel {
                    history: vec![j1],
                    column: j2,
                });
            }
            for j3 in 0..d {
                probs[j1 + d * j2 + d * d * j3] = q.get(j3, j2) * w;
            }
        }
    }
    JointDist::new(d, 3, probs)
}

/// Chain-rule construction of a Markov distribution of order
/// `steps.len() + 1`: `p(j1..jm) = init[j1] * prod_n steps[n][j_{n+1}, j_n]`.
pub fn markov_process(init: &ProbVector, steps: &[StochMatrix]) -> Result<JointDist> {
    let d = init.dim();
    if steps.is_empty() {
        return Err(Error::EmptyInput {
            what: "number of steps",
        });
    }
    for s in steps {
        if s.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: s.dim(),
            });
        }
    }
    let order = steps.len() + 1;
    let mut probs = vec![0.0; d.pow(order as u32)];
    let mut states = vec![0usize; order];
    for (idx, slot) in probs.iter_mut().enumerate() {
        let mut rest = idx;
        for s in states.iter_mut() {
            *s = rest % d;
            rest /= d;
        }
        let mut p = init.get(states[0]);
        for (n, step) in steps.iter().enumerate() {
            if p == 0.0 {
                break;
            }
            p *= step.get(states[n + 1], states[n]);
        }
        *slot = p;
    }
    JointDist::new(d, order, probs)
}

/// Exact mean and variance of the per-path time average of the state
/// labels, `(1/m) * (j_m + ... + j_1)`, under the distribution.
pub fn analytic_stats(joint: &JointDist) -> (f64, f64) {
    let d = joint.dim();
    let m = joint.order();
    let mut mean = 0.0;
    let mut second = 0.0;
    for (idx, &p) in joint.probs().iter().enumerate() {
        let mut sum = 0usize;
        let mut rest = idx;
        for _ in 0..m {
            sum += rest % d;
            rest /= d;
        }
        let avg = sum as f64 / m as f64;
        mean += avg * p;
        second += avg * avg * p;
    }
    (mean, second - mean * mean)
}

/// A process made of consecutive independent order-3 blocks sharing one
/// block distribution, each block re-initialized with its own starting
/// vector.
#[derive(Debug, Clone)]
pub struct BlockProcess {
    block: JointDist,
    initials: Vec<ProbVector>,
}

impl BlockProcess {
    /// `initials[k]` is the starting vector of block `k`; every initial may
    /// only put mass on states the base block itself can start from
    /// (otherwise the conditional continuation is unknown).
    pub fn new(block: JointDist, initials: Vec<ProbVector>) -> Result<Self> {
        if block.order() != 3 {
            return Err(Error::OrderTooSmall {
                order: block.order(),
                needed: 3,
            });
        }
        if initials.is_empty() {
            return Err(Error::EmptyInput {
                what: "number of blocks",
            });
        }
        let base = block.one_point(1)?;
        for init in &initials {
            if init.dim() != block.dim() {
                return Err(Error::DimensionMismatch {
                    expected: block.dim(),
                    got: init.dim(),
                });
            }
            for state in 0..init.dim() {
                if init.get(state) > ZTOL && base.get(state) <= ZTOL {
                    return Err(Error::UnreachableInitial {
                        state,
                        mass: init.get(state),
                    });
                }
            }
        }
        Ok(BlockProcess { block, initials })
    }

    /// All `n_blocks` blocks start from the block's own initial vector.
    pub fn homogeneous(block: JointDist, n_blocks: usize) -> Result<Self> {
        let init = block.one_point(1)?;
        Self::new(block, vec![init; n_blocks])
    }

    pub fn dim(&self) -> usize {
        self.block.dim()
    }

    pub fn n_blocks(&self) -> usize {
        self.initials.len()
    }

    pub fn block(&self) -> &JointDist {
        &self.block
    }

    pub fn initials(&self) -> &[ProbVector] {
        &self.initials
    }

    /// The order-3 distribution of block `k`: the base block with its
    /// starting weights replaced by `initials[k]`.
    pub fn block_for(&self, k: usize) -> JointDist {
        let init = &self.initials[k];
        let base = self.block.one_point(1).expect("order checked at build");
        let d = self.block.dim();
        let mut probs = self.block.probs().to_vec();
        for (idx, p) in probs.iter_mut().enumerate() {
            let j1 = idx % d;
            *p = if base.get(j1) > ZTOL {
                *p / base.get(j1) * init.get(j1)
            } else {
                0.0
            };
        }
        JointDist::new_unchecked(d, 3, probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisibility::{markov_condition, memory_matrices};

    #[test]
    fn feller_marginals_are_uniform() {
        let f = feller();
        for axis in 1..=3 {
            let p = f.one_point(axis).unwrap();
            for s in 0..3 {
                assert!((p.get(s) - 1.0 / 3.0).abs() < 1e-12);
            }
        }
        let pairs = f.marginalize(2).unwrap();
        for &p in pairs.probs() {
            assert!((p - 1.0 / 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn feller_cells_follow_the_nine_points() {
        let f = feller();
        assert!((f.prob(&[0, 0, 0]) - 1.0 / 9.0).abs() < 1e-15);
        // (j3, j2, j1) = (0, 0, 1) is not a sample point
        assert_eq!(f.prob(&[1, 0, 0]), 0.0);
        // two of the paper's conditionals, stated in 0-based labels:
        // p(j3=1 | j2=0, j1=0) = 0 and p(j3=1 | j2=0, j1=2) = 1
        let t = f.condition(&[3], &[(2, 0), (1, 0)]).unwrap();
        assert_eq!(t.get(&[1]).value, 0.0);
        let t = f.condition(&[3], &[(2, 0), (1, 2)]).unwrap();
        assert_eq!(t.get(&[1]).value, 1.0);
    }

    #[test]
    fn feller_step_matrices_are_uniform() {
        let f = feller();
        let r = f.transition_matrix(2, 1).unwrap();
        for col in 0..3 {
            for row in 0..3 {
                assert!((r.get(row, col) - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_state_markov_cells_and_checks() {
        let joint = two_state_markov(0.25).unwrap();
        assert!((joint.prob(&[0, 1, 0]) - 0.125).abs() < 1e-15);
        assert!(markov_condition(&joint).unwrap().passed);

        let degenerate = two_state_markov(0.0).unwrap();
        let nonzero: Vec<usize> = degenerate
            .probs()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(nonzero.len(), 2);
        for idx in nonzero {
            assert!((degenerate.probs()[idx] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn two_state_markov_rejects_bad_q1() {
        assert!(two_state_markov(-0.1).is_err());
        assert!(two_state_markov(1.1).is_err());
        assert!(two_state_perturbed(0.5, 2.0).is_err());
    }

    #[test]
    fn perturbed_at_zero_eps_equals_markov_cell_for_cell() {
        for q1 in [0.0, 0.25, 0.7, 1.0] {
            let a = two_state_perturbed(q1, 0.0).unwrap();
            let b = two_state_markov(q1).unwrap();
            assert_eq!(a.probs(), b.probs());
        }
    }

    #[test]
    fn perturbed_corner_cell_mass() {
        let joint = two_state_perturbed(0.25, 1.0).unwrap();
        // eps/2 * q1 = 0.5 * 0.25
        assert!((joint.prob(&[0, 0, 0]) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn perturbed_memory_matrix_is_the_stated_mixture() {
        let joint = two_state_perturbed(0.25, 0.75).unwrap();
        let family = memory_matrices(&joint, 1).unwrap();
        let q0 = family.matrix(&[0]);
        // 0.75 * I + 0.25 * flip
        assert!((q0.get(0, 0) - 0.75).abs() < 1e-12);
        assert!((q0.get(1, 0) - 0.25).abs() < 1e-12);
        assert!((q0.get(0, 1) - 0.25).abs() < 1e-12);
        assert!((q0.get(1, 1) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn perturbed_step_matrix_matches_extraction() {
        let q1 = 0.25;
        for eps in [0.0, 0.3, 1.0] {
            let closed = perturbed_step_matrix(q1, eps).unwrap();
            let joint = two_state_perturbed(q1, eps).unwrap();
            let extracted = joint.transition_matrix(3, 2).unwrap().to_stochastic().unwrap();
            assert!(closed.max_abs_diff(&extracted) < 1e-12);
        }
        let s = perturbed_step_matrix(0.25, 1.0).unwrap();
        assert!((s.get(0, 0) - 0.25).abs() < 1e-15);
        assert!((s.get(0, 1) - 0.75).abs() < 1e-15);
        // eps = 0 reduces to the pure flip
        let s = perturbed_step_matrix(0.4, 0.0).unwrap();
        assert_eq!(s.get(0, 0), 0.0);
        assert_eq!(s.get(1, 0), 1.0);
    }

    #[test]
    fn perturbed_step_matrix_composes_with_uniform_endpoints() {
        // the half-half matrix is both the first step and the two-step
        // endpoint of the perturbed process, for every parameter choice
        use crate::divisibility::chapman_kolmogorov_check;
        use crate::prob::TransitionMatrix;
        let uniform = TransitionMatrix::from_stochastic(&StochMatrix::uniform(2));
        for i in 0..=10 {
            for j in 0..=10 {
                let (q1, eps) = (i as f64 / 10.0, j as f64 / 10.0);
                let step =
                    TransitionMatrix::from_stochastic(&perturbed_step_matrix(q1, eps).unwrap());
                let report = chapman_kolmogorov_check(&uniform, &step, &uniform);
                assert!(
                    report.passed,
                    "q1 {q1} eps {eps}: residual {}",
                    report.max_residual
                );
            }
        }
    }

    #[test]
    fn build_from_kernels_reproduces_the_perturbed_tensor() {
        let q1 = 0.3;
        let eps = 0.6;
        let init = ProbVector::new(vec![q1, 1.0 - q1]).unwrap();
        let step = StochMatrix::uniform(2);
        let flip = StochMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let mixed = StochMatrix::from_rows(&[
            vec![eps, 1.0 - eps],
            vec![1.0 - eps, eps],
        ])
        .unwrap();
        let memory = MemoryFamily::from_level1(vec![mixed, flip]).unwrap();
        let built = build_from_kernels(&init, &step, &memory).unwrap();
        let expected = two_state_perturbed(q1, eps).unwrap();
        for (a, b) in built.probs().iter().zip(expected.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn build_from_kernels_point_mass_stays_put() {
        let init = ProbVector::point_mass(2, 0);
        let id = StochMatrix::identity(2);
        let memory = MemoryFamily::from_level1(vec![id.clone(), id.clone()]).unwrap();
        let built = build_from_kernels(&init, &id, &memory).unwrap();
        assert_eq!(built.prob(&[0, 0, 0]), 1.0);
    }

    #[test]
    fn build_from_kernels_with_constant_memory_is_markov() {
        let init = ProbVector::new(vec![0.6, 0.4]).unwrap();
        let step = StochMatrix::from_rows(&[vec![0.8, 0.3], vec![0.2, 0.7]]).unwrap();
        let s = StochMatrix::from_rows(&[vec![0.5, 0.1], vec![0.5, 0.9]]).unwrap();
        let memory = MemoryFamily::from_level1(vec![s.clone(), s.clone()]).unwrap();
        let built = build_from_kernels(&init, &step, &memory).unwrap();
        assert!(markov_condition(&built).unwrap().passed);
    }

    #[test]
    fn analytic_stats_closed_forms() {
        let q1 = 0.25;
        let (mu, var) = analytic_stats(&two_state_markov(q1).unwrap());
        assert!((mu - (2.0 * (1.0 - q1) + q1) / 3.0).abs() < 1e-12);
        assert!((var - (q1 - q1 * q1) / 9.0).abs() < 1e-12);

        for eps in [0.0, 0.75, 1.0] {
            let (mu_p, var_p) = analytic_stats(&two_state_perturbed(q1, eps).unwrap());
            assert!((mu_p - mu).abs() < 1e-12, "mean must not depend on eps");
            let closed = ((1.0 + eps) * q1 - q1 * q1) / 9.0;
            assert!((var_p - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn block_process_reweights_initials() {
        let block = two_state_perturbed(0.25, 0.75).unwrap();
        let new_init = ProbVector::new(vec![0.5, 0.5]).unwrap();
        let proc = BlockProcess::new(block, vec![new_init.clone()]).unwrap();
        let reweighted = proc.block_for(0);
        let got = reweighted.one_point(1).unwrap();
        assert!((got.get(0) - 0.5).abs() < 1e-12);
        // reweighting the perturbed block is the perturbed block with the
        // new start
        let expected = two_state_perturbed(0.5, 0.75).unwrap();
        for (a, b) in reweighted.probs().iter().zip(expected.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn block_process_rejects_unreachable_initials() {
        // base block never starts in state 0
        let block = two_state_markov(0.0).unwrap();
        let bad = ProbVector::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            BlockProcess::new(block, vec![bad]),
            Err(Error::UnreachableInitial { .. })
        ));
    }
}
