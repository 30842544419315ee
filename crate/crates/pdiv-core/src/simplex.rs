//! Dense two-phase simplex for small linear programs in standard form:
//! minimize `c.x` subject to `A x = b`, `x >= 0`.
//!
//! Pivoting uses Bland's rule throughout, so the solve terminates on every
//! input, degenerate or not. The problems here have at most a few dozen
//! variables (d*d unknowns for state spaces with d <= 8), so no effort is
//! spent on sparsity or factorization; each instance owns its tableau and
//! is used for a single solve.

const PIVOT_EPS: f64 = 1e-10;

#[derive(Debug)]
pub(crate) struct SimplexOutcome {
    /// A minimizer when the constraints are feasible.
    pub solution: Option<Vec<f64>>,
    /// Phase-1 optimum: total constraint violation that cannot be removed.
    /// Zero (up to rounding) exactly when the program is feasible.
    pub infeasibility: f64,
}

/// Minimize `c.x` over `{A x = b, x >= 0}`. `a` is row-major with
/// `a.len() == b.len()` rows of `c.len()` entries each.
pub(crate) fn minimize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> SimplexOutcome {
    let n = c.len();
    let m = b.len();
    debug_assert!(a.iter().all(|row| row.len() == n));

    // rows[i] = real columns, then m artificial columns, then rhs
    let width = n + m + 1;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width];
        for j in 0..n {
            row[j] = flip * a[i][j];
        }
        row[n + i] = 1.0;
        row[width - 1] = flip * b[i];
        rows.push(row);
        basis.push(n + i);
    }

    // phase 1: minimize the sum of artificials
    let mut cost1 = vec![0.0; width];
    for j in 0..width {
        if j >= n && j < n + m {
            continue; // artificials are basic, reduced cost 0
        }
        cost1[j] = -rows.iter().map(|r| r[j]).sum::<f64>();
    }
    run(&mut rows, &mut basis, &mut cost1, n + m);
    let infeasibility = -cost1[width - 1];
    if infeasibility > PIVOT_EPS.sqrt() * 10.0 {
        // clearly infeasible; report the residual mass
        return SimplexOutcome {
            solution: None,
            infeasibility: infeasibility.max(0.0),
        };
    }

    // drive leftover artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < rows.len() {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| rows[i][j].abs() > PIVOT_EPS) {
                pivot(&mut rows, &mut basis, &mut vec![0.0; width], i, j);
            } else {
                rows.remove(i);
                basis.remove(i);
                continue;
            }
        }
        i += 1;
    }

    // phase 2: minimize the real objective, artificial columns locked out
    let mut cost2 = vec![0.0; width];
    for (j, &cj) in c.iter().enumerate() {
        cost2[j] = cj;
    }
    for (i, &bi) in basis.iter().enumerate() {
        let cb = if bi < n { c[bi] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..width {
                cost2[j] -= cb * rows[i][j];
            }
        }
    }
    run(&mut rows, &mut basis, &mut cost2, n);

    let mut x = vec![0.0; n];
    for (i, &bi) in basis.iter().enumerate() {
        if bi < n {
            x[bi] = rows[i].last().copied().unwrap_or(0.0).max(0.0);
        }
    }
    SimplexOutcome {
        solution: Some(x),
        infeasibility: infeasibility.max(0.0),
    }
}

/// Bland-rule simplex loop over the first `priceable` columns.
fn run(rows: &mut [Vec<f64>], basis: &mut [usize], cost: &mut [f64], priceable: usize) {
    loop {
        // entering: smallest index with negative reduced cost
        let Some(enter) = (0..priceable).find(|&j| cost[j] < -PIVOT_EPS) else {
            return;
        };
        // leaving: smallest ratio, ties by smallest basic variable index
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for (i, row) in rows.iter().enumerate() {
            let coef = row[enter];
            if coef > PIVOT_EPS {
                let ratio = row.last().unwrap() / coef;
                let better = ratio < best - PIVOT_EPS
                    || (ratio < best + PIVOT_EPS
                        && leave.map(|l| basis[i] < basis[l]).unwrap_or(true));
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            // unbounded direction; cannot happen for the bounded feasibility
            // polytopes built in this crate, but stop cleanly if it does
            return;
        };
        pivot(rows, basis, cost, leave, enter);
    }
}

fn pivot(rows: &mut [Vec<f64>], basis: &mut [usize], cost: &mut [f64], r: usize, c: usize) {
    let p = rows[r][c];
    for v in rows[r].iter_mut() {
        *v /= p;
    }
    for i in 0..rows.len() {
        if i != r {
            let f = rows[i][c];
            if f != 0.0 {
                for j in 0..rows[i].len() {
                    rows[i][j] -= f * rows[r][j];
                }
            }
        }
    }
    let f = cost[c];
    if f != 0.0 {
        for j in 0..cost.len() {
            cost[j] -= f * rows[r][j];
        }
    }
    basis[r] = c;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(row, &bi)| (row.iter().zip(x).map(|(r, v)| r * v).sum::<f64>() - bi).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn solves_square_system() {
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let b = vec![1.0, 0.0];
        let out = minimize(&vec![0.0; a[0].len()], &a, &b);
        let x = out.solution.expect("feasible");
        assert!(residual(&a, &b, &x) < 1e-10);
        assert!((x[0] - 0.5).abs() < 1e-10 && (x[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn detects_infeasibility() {
        // x0 + x1 = 1 and x0 + x1 = 2 cannot both hold
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let b = vec![1.0, 2.0];
        let out = minimize(&vec![0.0; a[0].len()], &a, &b);
        assert!(out.solution.is_none());
        assert!(out.infeasibility > 0.5);
    }

    #[test]
    fn minimizes_linear_objective() {
        // min x0 subject to x0 + x1 = 1: optimum x = (0, 1)
        let a = vec![vec![1.0, 1.0]];
        let b = vec![1.0];
        let out = minimize(&[1.0, 0.0], &a, &b);
        let x = out.solution.expect("feasible");
        assert!(x[0].abs() < 1e-10);
        assert!((x[1] - 1.0).abs() < 1e-10);
        // and the opposite objective picks the other vertex
        let out = minimize(&[-1.0, 0.0], &a, &b);
        let x = out.solution.expect("feasible");
        assert!((x[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn handles_redundant_constraints() {
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let b = vec![1.0, 2.0];
        let out = minimize(&[0.0, 1.0], &a, &b);
        let x = out.solution.expect("feasible");
        assert!(residual(&a, &b, &x) < 1e-10);
        assert!(x[1].abs() < 1e-10);
    }

    #[test]
    fn negative_rhs_rows_are_normalized() {
        let a = vec![vec![-1.0, 0.0], vec![0.0, 1.0]];
        let b = vec![-0.25, 0.75];
        let out = minimize(&vec![0.0; a[0].len()], &a, &b);
        let x = out.solution.expect("feasible");
        assert!((x[0] - 0.25).abs() < 1e-10);
        assert!((x[1] - 0.75).abs() < 1e-10);
    }
}
