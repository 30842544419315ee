//! Vaccination-schedule compliance model on the two-state perturbed
//! process.
//!
//! Three appointments per schedule; state 1 at an appointment means the
//! dose was taken, and anyone with at least two doses goes mask-free. The
//! joint distribution of one individual's three appointments is exactly
//! [`two_state_perturbed`](crate::processes::two_state_perturbed)`(q1, eps)`
//! read as conditionals (cells written `(j3, j2, j1)`):
//!
//! | behavior                                               | conditional                  | cells                      |
//! |--------------------------------------------------------|------------------------------|----------------------------|
//! | dose 1 skipped with probability `q1`                   | `p(j1=0) = q1`               | all `(.,.,0)`              |
//! | single steps otherwise look like coin flips            | `p(j,t|k,t') = 1/2`          | pair marginals             |
//! | two doses taken, third skipped                         | `p(0|j2=1,j1=1) = 1`         | `(0,1,1) = q2/2`           |
//! | dose 2 missed after dose 1, third taken for sure       | `p(1|j2=0,j1=1) = 1`         | `(1,0,1) = q2/2`           |
//! | dose 1 skipped: repeat the second outcome w.p. `eps`   | `p(0|0,0) = eps`, `p(0|1,0) = 1-eps` | `(0,0,0) = eps*q1/2` etc. |
//!
//! Counts are expected values carried as reals; a sampling mode draws
//! binomial realizations for demonstration.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_distr::{Binomial, Distribution};
use rand_xoshiro::Xoshiro256StarStar;

use crate::simulate::block_seed;
use crate::{Error, Result};

/// Parameters of one vaccination schedule: expected population still in
/// the program, probability `q1` of skipping the first dose, and the
/// awareness/memory parameter `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleState {
    pub population: f64,
    pub q1: f64,
    pub eps: f64,
}

impl ScheduleState {
    pub fn new(population: f64, q1: f64, eps: f64) -> Result<Self> {
        if !population.is_finite() || population < 0.0 {
            return Err(Error::InvalidPopulation { value: population });
        }
        for (name, value) in [("q1", q1), ("eps", eps)] {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(Error::OutOfUnitInterval { name, value });
            }
        }
        Ok(ScheduleState {
            population,
            q1,
            eps,
        })
    }
}

/// Expected number of individuals mask-free after one schedule: those with
/// at least two doses, `N * (1 - q1 * (1 - eps/2))`. Equals `N` times the
/// total mass of the cells `(1,1,1), (0,1,1), (1,0,1), (1,1,0)` of the
/// perturbed tensor.
pub fn free_of_masks(s: &ScheduleState) -> f64 {
    s.population * (1.0 - s.q1 * (1.0 - s.eps / 2.0))
}

/// State for the next schedule: the still-masked individuals
/// (`N - free_of_masks`, so counts are conserved exactly) restart with the
/// updated skip probability `q1 * (1 - eps/2)`.
pub fn update_initial(s: &ScheduleState) -> ScheduleState {
    ScheduleState {
        population: s.population - free_of_masks(s),
        q1: s.q1 * (1.0 - s.eps / 2.0),
        eps: s.eps,
    }
}

/// One line of the per-schedule report. `q1` is the skip probability in
/// force during that schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleRow {
    pub schedule: usize,
    pub free_count: f64,
    pub remaining: f64,
    pub q1: f64,
}

/// Run `n` consecutive schedules, each over the population left masked by
/// the previous one.
pub fn run_schedules(s: &ScheduleState, n: usize) -> Result<Vec<ScheduleRow>> {
    if n == 0 {
        return Err(Error::EmptyInput {
            what: "schedule count",
        });
    }
    let mut state = *s;
    let mut rows = Vec::with_capacity(n);
    for schedule in 1..=n {
        let free = free_of_masks(&state);
        let next = update_initial(&state);
        rows.push(ScheduleRow {
            schedule,
            free_count: free,
            remaining: next.population,
            q1: state.q1,
        });
        state = next;
    }
    Ok(rows)
}

/// Sampling variant of [`run_schedules`]: each schedule draws the mask-free
/// count from a binomial over the (rounded) current population instead of
/// reporting the expectation. Deterministic in `seed`.
pub fn run_schedules_sampled(s: &ScheduleState, n: usize, seed: u64) -> Result<Vec<ScheduleRow>> {
    if n == 0 {
        return Err(Error::EmptyInput {
            what: "schedule count",
        });
    }
    let mut state = *s;
    let mut rows = Vec::with_capacity(n);
    for schedule in 1..=n {
        let pop = state.population.round().max(0.0) as u64;
        let p_free = 1.0 - state.q1 * (1.0 - state.eps / 2.0);
        let mut rng = Xoshiro256StarStar::seed_from_u64(block_seed(seed, schedule as u64));
        let free = Binomial::new(pop, p_free.clamp(0.0, 1.0))
            .expect("probability in range")
            .sample(&mut rng) as f64;
        let remaining = pop as f64 - free;
        rows.push(ScheduleRow {
            schedule,
            free_count: free,
            remaining,
            q1: state.q1,
        });
        state = ScheduleState {
            population: remaining,
            q1: state.q1 * (1.0 - state.eps / 2.0),
            eps: state.eps,
        };
    }
    Ok(rows)
}

/// CSV export: header `schedule,free_count,remaining,q1`, one row per
/// schedule.
pub fn write_schedule_csv<W: Write>(mut w: W, rows: &[ScheduleRow]) -> io::Result<()> {
    writeln!(w, "schedule,free_count,remaining,q1")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.schedule, r.free_count, r.remaining, r.q1)?;
    }
    Ok(())
}
