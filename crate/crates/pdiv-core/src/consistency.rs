//! Kolmogorov consistency checks for a family of joint distributions.
//!
//! A [`DistFamily`] holds one distribution per order `1..=M`, each read as
//! the distribution over the first `m` time steps of a single process.
//! Permutation invariance is satisfied structurally (tensors are stored in
//! canonical time order), so the runtime checks are normalization,
//! non-negativity, and marginal consistency between adjacent orders;
//! consistency between non-adjacent orders follows transitively.

use crate::prob::JointDist;
use crate::tolerances::ATOL;
use crate::{Error, Result};

/// A family of joint distributions of orders `1..=M` over a common state
/// space.
#[derive(Debug, Clone)]
pub struct DistFamily {
    dim: usize,
    members: Vec<JointDist>,
}

impl DistFamily {
    /// `members[i]` must have order `i + 1`; all dims must agree.
    pub fn new(members: Vec<JointDist>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyInput {
            what: "family size",
        })?;
        let dim = first.dim();
        for (i, m) in members.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.dim(),
                });
            }
            if m.order() != i + 1 {
                return Err(Error::FamilyOrderGap {
                    index: i,
                    got: m.order(),
                });
            }
        }
        Ok(DistFamily { dim, members })
    }

    /// Build the full family under a top-order distribution by repeatedly
    /// summing out the last time step.
    pub fn from_top(top: JointDist) -> Self {
        let dim = top.dim();
        let mut members = vec![top];
        while members.last().unwrap().order() > 1 {
            let m = members.last().unwrap();
            let reduced = m.marginalize(m.order()).expect("order >= 2");
            members.push(reduced);
        }
        members.reverse();
        DistFamily { dim, members }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest order in the family.
    pub fn max_order(&self) -> usize {
        self.members.len()
    }

    pub fn member(&self, order: usize) -> Option<&JointDist> {
        self.members.get(order.wrapping_sub(1))
    }

    pub fn members(&self) -> &[JointDist] {
        &self.members
    }
}

/// Result of a verification check: pass/fail, the largest residual seen,
/// and the index tuple of the worst violation when one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    pub witness: Option<Vec<usize>>,
}

impl CheckReport {
    pub(crate) fn from_scan(name: &str, max_residual: f64, witness: Option<Vec<usize>>, tol: f64) -> Self {
        CheckReport {
            name: name.to_string(),
            passed: max_residual <= tol,
            max_residual,
            witness,
        }
    }
}

/// Checks that every member has entries `>= -ATOL` and total mass 1 within
/// `ATOL`. The residual is the larger of the normalization defect and the
/// worst negative excursion; the witness is `[order]` for a normalization
/// defect or `[order, cell]` for a negative entry.
pub fn check_normalization(family: &DistFamily) -> CheckReport {
    let mut max_residual = 0.0;
    let mut witness = None;
    for member in family.members() {
        let order = member.order();
        let mut sum = 0.0;
        for (cell, &p) in member.probs().iter().enumerate() {
            sum += p;
            let neg = -p;
            if neg > max_residual {
                max_residual = neg;
                witness = Some(vec![order, cell]);
            }
        }
        let defect = (sum - 1.0).abs();
        if defect > max_residual {
            max_residual = defect;
            witness = Some(vec![order]);
        }
    }
    CheckReport::from_scan("normalization", max_residual, witness, ATOL)
}

/// Checks that summing each member over its last time step reproduces the
/// member one order below, for every adjacent pair in the family. The
/// witness is `[order, cell]` for the worst cell of the larger member's
/// marginal.
pub fn check_marginal_consistency(family: &DistFamily) -> CheckReport {
    let mut max_residual = 0.0;
    let mut witness = None;
    for order in 2..=family.max_order() {
        let upper = family.member(order).unwrap();
        let lower = family.member(order - 1).unwrap();
        let reduced = upper.marginalize(order).expect("order >= 2");
        for (cell, (&a, &b)) in reduced.probs().iter().zip(lower.probs().iter()).enumerate() {
            let diff = (a - b).abs();
            if diff > max_residual {
                max_residual = diff;
                witness = Some(vec![order, cell]);
            }
        }
    }
    CheckReport::from_scan("marginal-consistency", max_residual, witness, ATOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_order(dim: usize, order: usize) -> JointDist {
        let n = dim.pow(order as u32);
        JointDist::new_unchecked(dim, order, vec![1.0 / n as f64; n])
    }

    #[test]
    fn family_construction_validates_orders_and_dims() {
        assert!(DistFamily::new(vec![]).is_err());
        let gap = DistFamily::new(vec![uniform_order(2, 1), uniform_order(2, 3)]);
        assert!(matches!(gap, Err(Error::FamilyOrderGap { .. })));
        let mixed = DistFamily::new(vec![uniform_order(2, 1), uniform_order(3, 2)]);
        assert!(matches!(mixed, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn singleton_uniform_family_passes_normalization() {
        let family = DistFamily::new(vec![uniform_order(4, 1)]).unwrap();
        let report = check_normalization(&family);
        assert!(report.passed);
        assert!(report.max_residual <= 1e-12);
    }

    #[test]
    fn perturbed_entry_fails_normalization_with_witness() {
        let mut top = uniform_order(2, 2);
        let mut probs = top.probs().to_vec();
        probs[3] += 0.1;
        top = JointDist::new_unchecked(2, 2, probs);
        let family = DistFamily::new(vec![uniform_order(2, 1), top]).unwrap();
        let report = check_normalization(&family);
        assert!(!report.passed);
        assert_eq!(report.witness, Some(vec![2]));
        assert!((report.max_residual - 0.1).abs() < 1e-12);
    }

    #[test]
    fn family_from_top_is_marginally_consistent_with_zero_residual() {
        // any normalized tensor works; use a lopsided one
        let probs = vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.05, 0.1, 0.1];
        let top = JointDist::new(2, 3, probs).unwrap();
        let family = DistFamily::from_top(top);
        assert_eq!(family.max_order(), 3);
        let report = check_marginal_consistency(&family);
        assert!(report.passed);
        assert_eq!(report.max_residual, 0.0);
    }

    #[test]
    fn two_state_family_built_by_marginalization_is_exact() {
        let family = DistFamily::from_top(crate::processes::two_state_markov(0.25).unwrap());
        assert_eq!(family.max_order(), 3);
        assert!(check_normalization(&family).passed);
        let report = check_marginal_consistency(&family);
        assert!(report.passed);
        assert_eq!(report.max_residual, 0.0);
    }

    #[test]
    fn wrong_lower_member_fails_marginal_consistency() {
        let probs = vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.05, 0.1, 0.1];
        let top = JointDist::new(2, 3, probs).unwrap();
        let honest = DistFamily::from_top(top.clone());
        let wrong2 = JointDist::new_unchecked(2, 2, vec![0.5, 0.0, 0.0, 0.5]);
        let family = DistFamily::new(vec![
            honest.member(1).unwrap().clone(),
            wrong2,
            top,
        ])
        .unwrap();
        let report = check_marginal_consistency(&family);
        assert!(!report.passed);
        assert!(report.witness.is_some());
    }

    #[test]
    fn reports_are_deterministic() {
        let probs = vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.05, 0.1, 0.1];
        let family = DistFamily::from_top(JointDist::new(2, 3, probs).unwrap());
        let a = check_normalization(&family);
        let b = check_normalization(&family);
        assert_eq!(a, b);
        let c = check_marginal_consistency(&family);
        let d = check_marginal_consistency(&family);
        assert_eq!(c, d);
    }
}
