use std::fs;
use std::io::Write;
use std::path::Path;

use pdiv_core::consistency::{check_marginal_consistency, check_normalization};
use pdiv_core::divisibility::{
    chapman_kolmogorov_check, markov_condition, necessary_condition, p_divisible,
    transition_triple,
};
use pdiv_core::processes::BlockProcess;
use pdiv_core::simulate::{
    empirical_stats, simulate_with_threads, write_realization_csv, write_stats_csv,
};
use pdiv_core::epidemic::{run_schedules, run_schedules_sampled, write_schedule_csv, ScheduleState};
use pdiv_core::{DistFamily, ProbVector, StochMatrix, TransitionMatrix};

use crate::report::{CheckJson, ReportJson};
use crate::spec_file::{build_builtin, Params, ProcessSpecFile};
use crate::{CheckArgs, BuildArgs, SimulateArgs, EpidemicArgs, CliError};

/// Default number of blocks for simulation runs that specify none
/// (600 time steps).
pub const DEFAULT_BLOCKS: usize = 200;

/// Default master seed; overridden by the `PDIV_SEED` environment variable
/// and by `--seed`.
pub const DEFAULT_SEED: u64 = 0;

pub fn cmd_check(args: &CheckArgs) -> Result<bool, CliError> {
    let spec = ProcessSpecFile::load(&args.spec)?;
    let joint = spec.to_joint()?;
    if joint.order() < 3 {
        return Err(format!(
            "check needs a tensor of order at least 3, got order {}",
            joint.order()
        )
        .into());
    }

    let family = DistFamily::from_top(joint.clone());
    let mut checks = vec![
        CheckJson::from(check_normalization(&family)),
        CheckJson::from(check_marginal_consistency(&family)),
    ];

    let (long, step, first) = transition_triple(&joint).map_err(|e| e.to_string())?;
    checks.push(CheckJson::from(chapman_kolmogorov_check(&long, &step, &first)));

    checks.push(CheckJson::from(
        necessary_condition(&joint, args.order as usize).map_err(|e| e.to_string())?,
    ));
    checks.push(CheckJson::from(
        markov_condition(&joint).map_err(|e| e.to_string())?,
    ));

    let (lambda_t, lambda_s) = completed_endpoints(&long, &step, &first);
    let feasibility = p_divisible(&lambda_t, &lambda_s);
    checks.push(CheckJson::from_feasibility(&feasibility));

    let report = ReportJson::new(joint.dim(), joint.order(), checks);
    if args.json {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.to_table());
    }
    Ok(report.all_passed)
}

/// Fill the undefined columns of the extracted pair so the feasibility
/// solver sees plain stochastic matrices. Column `k` of `first` is
/// undefined exactly when the start state `k` has probability 0; that
/// column is completed with the point mass on `k`, and the matching column
/// of `long` with the step matrix's column `k`, so the composition
/// `long = step * first` is preserved on the filled columns.
fn completed_endpoints(
    long: &TransitionMatrix,
    step: &TransitionMatrix,
    first: &TransitionMatrix,
) -> (StochMatrix, StochMatrix) {
    let step_c = step.complete_with_identity();
    let d = long.dim();
    let mut columns = Vec::with_capacity(d);
    for k in 0..d {
        let col = if long.is_defined(k) {
            long.column(k).to_vec()
        } else {
            step_c.column(k).to_vec()
        };
        columns.push(ProbVector::new(col).expect("columns are stochastic"));
    }
    let long_c = StochMatrix::from_columns(columns).expect("dimensions agree");
    (long_c, first.complete_with_identity())
}

pub fn cmd_build(args: &BuildArgs) -> Result<bool, CliError> {
    let params = Params {
        q1: args.q1,
        eps: args.eps,
    };
    let joint = build_builtin(&args.builtin, &params)?;
    let spec = ProcessSpecFile {
        dim: joint.dim(),
        order: joint.order(),
        tensor: Some(joint.probs().to_vec()),
        builtin: None,
        params: None,
        blocks: None,
    };
    let mut text = serde_json::to_string_pretty(&spec).expect("spec serializes");
    text.push('\n');
    write_output(args.out.as_deref(), text.as_bytes())?;
    Ok(true)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<bool, CliError> {
    let spec = ProcessSpecFile::load(&args.spec)?;
    let joint = spec.to_joint()?;
    if joint.order() != 3 {
        return Err(format!(
            "simulation needs an order-3 block tensor, got order {}",
            joint.order()
        )
        .into());
    }
    let n_blocks = args
        .blocks
        .or_else(|| spec.blocks.as_ref().map(|b| b.k))
        .unwrap_or(DEFAULT_BLOCKS);
    if n_blocks == 0 {
        return Err("block count must be positive".into());
    }
    let initials = spec.block_initials(&joint, n_blocks)?;
    let proc = BlockProcess::new(joint, initials).map_err(|e| e.to_string())?;
    let seed = resolve_seed(args.seed)?;

    let realization =
        simulate_with_threads(&proc, seed, args.threads).map_err(|e| e.to_string())?;
    let stats = empirical_stats(&realization).map_err(|e| e.to_string())?;

    let mut csv = Vec::new();
    write_realization_csv(&mut csv, &realization).map_err(|e| e.to_string())?;
    write_output(args.out.as_deref(), &csv)?;

    let mut stats_csv = Vec::new();
    write_stats_csv(&mut stats_csv, &stats).map_err(|e| e.to_string())?;
    write_output(args.stats_out.as_deref(), &stats_csv)?;
    Ok(true)
}

pub fn cmd_epidemic(args: &EpidemicArgs) -> Result<bool, CliError> {
    let state = ScheduleState::new(args.population, args.q1, args.eps)
        .map_err(|e| e.to_string())?;
    if args.schedules == 0 {
        return Err("schedule count must be positive".into());
    }
    let rows = if args.sample {
        let seed = resolve_seed(args.seed)?;
        run_schedules_sampled(&state, args.schedules, seed).map_err(|e| e.to_string())?
    } else {
        run_schedules(&state, args.schedules).map_err(|e| e.to_string())?
    };
    let mut csv = Vec::new();
    write_schedule_csv(&mut csv, &rows).map_err(|e| e.to_string())?;
    write_output(args.out.as_deref(), &csv)?;
    Ok(true)
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("PDIV_SEED") {
        Ok(text) => text
            .parse::<u64>()
            .map_err(|_| format!("PDIV_SEED must be an unsigned integer, got `{text}`").into()),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| format!("cannot write {}: {e}", path.display()).into()),
        None => {
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| format!("cannot write to stdout: {e}"))?;
            Ok(())
        }
    }
}
