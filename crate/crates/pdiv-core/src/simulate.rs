//! Seedable Monte-Carlo sampling of block processes.
//!
//! Reproducibility contract: the generator is pinned to
//! `xoshiro256**` seeded through a SplitMix64 step, and block `k` of a run
//! with master seed `s` always draws from a generator seeded with
//! [`block_seed`]`(s, k)`. Realizations therefore depend only on
//! `(process, seed)` — never on thread count — and are stable across
//! versions of this crate's dependencies.

use std::io::{self, Write};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::prob::JointDist;
use crate::processes::BlockProcess;
use crate::{Error, Result};

/// Sub-seed for one block: the master seed advanced by the block index
/// (golden-gamma multiply) and passed through the SplitMix64 mixer.
pub fn block_seed(seed: u64, block_index: u64) -> u64 {
    let mut z = seed ^ block_index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One sampled trajectory: `states[3k..3k+3]` is block `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub seed: u64,
    pub states: Vec<usize>,
    pub block_len: usize,
}

impl Realization {
    pub fn n_blocks(&self) -> usize {
        self.states.len() / self.block_len
    }
}

/// Empirical statistics of the per-block time averages.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalStats {
    pub mu_hat: f64,
    pub var_hat: f64,
    pub n_blocks: usize,
    pub std_err_mu: f64,
}

/// Draw one outcome of the block distribution by inverse CDF over its
/// cells, consuming exactly one uniform draw. Returns the states in time
/// order, earliest first.
pub fn sample_block<R: Rng + ?Sized>(joint: &JointDist, rng: &mut R) -> Vec<usize> {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut chosen = None;
    let mut last_positive = 0;
    for (idx, &p) in joint.probs().iter().enumerate() {
        if p > 0.0 {
            last_positive = idx;
        }
        acc += p;
        if u < acc {
            chosen = Some(idx);
            break;
        }
    }
    // u can exceed the accumulated mass only by rounding slack
    let mut rest = chosen.unwrap_or(last_positive);
    let d = joint.dim();
    let mut states = vec![0usize; joint.order()];
    for s in states.iter_mut() {
        *s = rest % d;
        rest /= d;
    }
    states
}

/// Sample every block of the process, deterministically in `seed`.
pub fn simulate(proc: &BlockProcess, seed: u64) -> Realization {
    let tensors = block_tensors(proc);
    let states = sample_range(&tensors, seed, 0, proc.n_blocks());
    Realization {
        seed,
        states,
        block_len: 3,
    }
}

/// Same trajectory as [`simulate`], computed on `threads` worker threads.
/// Blocks carry their own sub-seeds, so the result is identical for every
/// thread count.
pub fn simulate_with_threads(proc: &BlockProcess, seed: u64, threads: usize) -> Result<Realization> {
    if threads == 0 {
        return Err(Error::EmptyInput {
            what: "thread count",
        });
    }
    if threads == 1 {
        return Ok(simulate(proc, seed));
    }
    let tensors = block_tensors(proc);
    let n = proc.n_blocks();
    let chunk = n.div_ceil(threads);
    let mut states = Vec::with_capacity(3 * n);
    thread::scope(|scope| {
        let mut handles = Vec::new();
        for t in 0..threads {
            let start = (t * chunk).min(n);
            let end = ((t + 1) * chunk).min(n);
            let tensors = &tensors;
            handles.push(scope.spawn(move || sample_range(tensors, seed, start, end)));
        }
        for h in handles {
            states.extend(h.join().expect("sampler thread panicked"));
        }
    });
    Ok(Realization {
        seed,
        states,
        block_len: 3,
    })
}

/// Reweighted block tensors; collapses to a single tensor when all blocks
/// share the same initial vector.
fn block_tensors(proc: &BlockProcess) -> Vec<JointDist> {
    let homogeneous = proc
        .initials()
        .iter()
        .all(|init| init.entries() == proc.initials()[0].entries());
    if homogeneous {
        vec![proc.block_for(0)]
    } else {
        (0..proc.n_blocks()).map(|k| proc.block_for(k)).collect()
    }
}

fn sample_range(tensors: &[JointDist], seed: u64, start: usize, end: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(3 * (end - start));
    for k in start..end {
        let tensor = if tensors.len() == 1 {
            &tensors[0]
        } else {
            &tensors[k]
        };
        let mut rng = Xoshiro256StarStar::seed_from_u64(block_seed(seed, k as u64));
        out.extend(sample_block(tensor, &mut rng));
    }
    out
}

/// Mean and population variance of the per-block time averages, plus the
/// standard error of the mean.
pub fn empirical_stats(r: &Realization) -> Result<EmpiricalStats> {
    if r.states.is_empty() || r.block_len == 0 || !r.states.len().is_multiple_of(r.block_len) {
        return Err(Error::EmptyInput {
            what: "realization length",
        });
    }
    let k = r.n_blocks();
    let mut mean = 0.0;
    let mut second = 0.0;
    for block in r.states.chunks_exact(r.block_len) {
        let avg = block.iter().sum::<usize>() as f64 / r.block_len as f64;
        mean += avg;
        second += avg * avg;
    }
    mean /= k as f64;
    second /= k as f64;
    let var = (second - mean * mean).max(0.0);
    Ok(EmpiricalStats {
        mu_hat: mean,
        var_hat: var,
        n_blocks: k,
        std_err_mu: (var / k as f64).sqrt(),
    })
}

/// CSV export of a realization: header `step,state`, one row per time
/// step, steps numbered from 1.
pub fn write_realization_csv<W: Write>(mut w: W, r: &Realization) -> io::Result<()> {
    writeln!(w, "step,state")?;
    for (i, s) in r.states.iter().enumerate() {
        writeln!(w, "{},{}", i + 1, s)?;
    }
    Ok(())
}

/// CSV export of empirical statistics: one header row, one value row.
pub fn write_stats_csv<W: Write>(mut w: W, stats: &EmpiricalStats) -> io::Result<()> {
    writeln!(w, "mu_hat,var_hat,n_blocks,std_err_mu")?;
    writeln!(
        w,
        "{},{},{},{}",
        stats.mu_hat, stats.var_hat, stats.n_blocks, stats.std_err_mu
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{feller, two_state_markov, two_state_perturbed};
    use crate::prob::ProbVector;

    fn point_mass_block() -> JointDist {
        let mut probs = vec![0.0; 8];
        probs[0] = 1.0;
        JointDist::new(2, 3, probs).unwrap()
    }

    #[test]
    fn sample_block_point_mass_is_constant() {
        let block = point_mass_block();
        for seed in [0u64, 1, 99, u64::MAX] {
            let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
            assert_eq!(sample_block(&block, &mut rng), vec![0, 0, 0]);
        }
    }

    #[test]
    fn feller_histogram_matches_cell_masses() {
        let f = feller();
        let mut rng = Xoshiro256StarStar::seed_from_u64(7);
        let n = 1_000_000;
        let mut counts = vec![0usize; 27];
        for _ in 0..n {
            let s = sample_block(&f, &mut rng);
            counts[s[0] + 3 * s[1] + 9 * s[2]] += 1;
        }
        for (idx, &p) in f.probs().iter().enumerate() {
            let freq = counts[idx] as f64 / n as f64;
            if p > 0.0 {
                // 1% relative tolerance around 1/9, comfortably above the
                // 3-sigma binomial band for n = 1e6
                assert!(
                    (freq - p).abs() / p < 0.01,
                    "cell {idx}: freq {freq} vs mass {p}"
                );
            } else {
                assert_eq!(counts[idx], 0);
            }
        }
    }

    #[test]
    fn perturbed_corner_cell_frequency_within_binomial_band() {
        let joint = two_state_perturbed(0.25, 1.0).unwrap();
        let p = joint.prob(&[0, 0, 0]);
        let n = 1_000_000;
        let mut rng = Xoshiro256StarStar::seed_from_u64(11);
        let mut hits = 0usize;
        for _ in 0..n {
            if sample_block(&joint, &mut rng) == vec![0, 0, 0] {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        let band = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() < band, "freq {freq}, mass {p}, band {band}");
    }

    #[test]
    fn simulate_is_deterministic_and_thread_invariant() {
        let proc = BlockProcess::homogeneous(two_state_markov(0.25).unwrap(), 500).unwrap();
        let a = simulate(&proc, 42);
        let b = simulate(&proc, 42);
        assert_eq!(a, b);
        for threads in [1, 2, 4, 7] {
            let c = simulate_with_threads(&proc, 42, threads).unwrap();
            assert_eq!(a.states, c.states, "threads = {threads}");
        }
        let other = simulate(&proc, 43);
        assert_ne!(a.states, other.states);
    }

    #[test]
    fn simulate_point_mass_block() {
        let proc = BlockProcess::homogeneous(point_mass_block(), 1).unwrap();
        let r = simulate(&proc, 5);
        assert_eq!(r.states, vec![0, 0, 0]);
    }

    #[test]
    fn simulate_honors_per_block_initials() {
        // first block pinned to start 0, second pinned to start 1
        let block = two_state_markov(0.5).unwrap();
        let proc = BlockProcess::new(
            block,
            vec![ProbVector::point_mass(2, 0), ProbVector::point_mass(2, 1)],
        )
        .unwrap();
        let r = simulate(&proc, 123);
        assert_eq!(r.states[0], 0);
        assert_eq!(r.states[3], 1);
    }

    #[test]
    fn empirical_stats_two_blocks_by_hand() {
        let r = Realization {
            seed: 0,
            states: vec![0, 0, 0, 1, 1, 1],
            block_len: 3,
        };
        let stats = empirical_stats(&r).unwrap();
        assert_eq!(stats.mu_hat, 0.5);
        assert_eq!(stats.var_hat, 0.25);
        assert_eq!(stats.n_blocks, 2);
        assert!((stats.std_err_mu - (0.25f64 / 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empirical_stats_rejects_empty() {
        let r = Realization {
            seed: 0,
            states: vec![],
            block_len: 3,
        };
        assert!(empirical_stats(&r).is_err());
    }

    #[test]
    fn markov_run_lands_near_analytic_mean() {
        let proc = BlockProcess::homogeneous(two_state_markov(0.25).unwrap(), 200).unwrap();
        let stats = empirical_stats(&simulate(&proc, 2024)).unwrap();
        let mu = 7.0 / 12.0;
        assert!(
            (stats.mu_hat - mu).abs() <= 3.0 * stats.std_err_mu,
            "mu_hat {} vs {} (3 se = {})",
            stats.mu_hat,
            mu,
            3.0 * stats.std_err_mu
        );
    }

    #[test]
    fn csv_export_shape() {
        let r = Realization {
            seed: 9,
            states: vec![1, 0, 1],
            block_len: 3,
        };
        let mut buf = Vec::new();
        write_realization_csv(&mut buf, &r).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,state\n1,1\n2,0\n3,1\n"
        );
        let stats = EmpiricalStats {
            mu_hat: 0.5,
            var_hat: 0.25,
            n_blocks: 1,
            std_err_mu: 0.5,
        };
        let mut buf = Vec::new();
        write_stats_csv(&mut buf, &stats).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "mu_hat,var_hat,n_blocks,std_err_mu\n0.5,0.25,1,0.5\n"
        );
    }
}
