use std::fs;
use std::path::Path;
use std::time::Instant;

use chaos_bandit::env::{default_grid, enumerate_envs, sample_envs, write_envs_csv};
use chaos_bandit::harness::{
    variance_table, write_curves, write_ensemble_means, write_scatter, write_variance, Experiment,
    ExperimentConfig, SignalSpec, FULL_SCALE_MEASUREMENTS,
};
use chaos_bandit::signal::{
    gen_synthetic, is_degenerate_logistic_start, logistic_from, SyntheticKind,
};
use chaos_bandit::theory::{mc_two_arm, TwoArmModel};
use chaos_bandit::Schedule;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{emit, Staged};
use crate::SignalKind;

const ENVIRONMENTS_CSV: &str = "environments.csv";

pub fn enumerate(
    k: usize,
    gap: f64,
    values: Option<Vec<f64>>,
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    let values = values.unwrap_or_else(default_grid);
    let envs = enumerate_envs(k, &values, gap).map_err(CliError::from_args)?;
    let path = out_dir.map(|d| d.join(ENVIRONMENTS_CSV));
    emit(path.as_deref(), |out| write_envs_csv(out, &envs))?;
    if let Some(path) = path {
        eprintln!("{} environments -> {}", envs.len(), path.display());
    }
    Ok(())
}

pub fn sample(
    k: usize,
    count: usize,
    values: Option<Vec<f64>>,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    let values = values.unwrap_or_else(default_grid);
    let envs = sample_envs(k, count, &values, seed).map_err(CliError::from_args)?;
    let path = out_dir.map(|d| d.join(ENVIRONMENTS_CSV));
    emit(path.as_deref(), |out| write_envs_csv(out, &envs))
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    config_path: String,
    master_seed: u64,
    signal_seed: Option<u64>,
    environments: usize,
    outputs: Vec<String>,
    duration_secs: f64,
    config: &'a ExperimentConfig,
}

/// Reads a TOML experiment config. A relative recorded-signal path is taken
/// relative to the config file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg: ExperimentConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let SignalSpec::Recorded { path: trace, .. } = &mut cfg.signal {
        if trace.is_relative() {
            let base = path.parent().unwrap_or(Path::new(""));
            *trace = base.join(&*trace);
        }
    }
    Ok(cfg)
}

pub fn run(
    config_path: &Path,
    full_scale: bool,
    seed: Option<u64>,
    schedule: Schedule,
    out_dir: &Path,
) -> Result<(), CliError> {
    let started = Instant::now();
    let mut cfg = load_config(config_path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if full_scale {
        cfg.measurements = FULL_SCALE_MEASUREMENTS;
    }
    let exp = Experiment::prepare(cfg)?;
    eprintln!(
        "running {} environments x {} policies x {} measurements",
        exp.envs().len(),
        exp.config().policies.len(),
        exp.config().measurements
    );
    let result = exp.run_ensemble(schedule)?;
    let variance = if exp.envs().len() >= 2 {
        variance_table(&result)?
    } else {
        Vec::new()
    };

    let mut staged = Staged::new(out_dir)?;
    staged.write(out_dir.join("curves.csv"), |out| write_curves(out, &result))?;
    staged.write(out_dir.join("scatter.csv"), |out| {
        write_scatter(out, &result)
    })?;
    staged.write(out_dir.join("variance.csv"), |out| {
        write_variance(out, &variance)
    })?;
    staged.write(out_dir.join("ensemble.csv"), |out| {
        write_ensemble_means(out, &result)
    })?;
    staged.write(out_dir.join(ENVIRONMENTS_CSV), |out| {
        write_envs_csv(out, exp.envs())
    })?;
    let written = staged.commit()?;

    let mut outputs: Vec<String> = written
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    outputs.push("manifest.json".into());
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_path: config_path.display().to_string(),
        master_seed: exp.config().seed,
        signal_seed: exp.signal().and_then(|s| s.seed()),
        environments: exp.envs().len(),
        outputs,
        duration_secs: started.elapsed().as_secs_f64(),
        config: exp.config(),
    };
    emit(Some(&out_dir.join("manifest.json")), |out| {
        serde_json::to_writer_pretty(&mut *out, &manifest)?;
        writeln!(out)
    })?;
    eprintln!(
        "done in {:.1}s -> {}",
        started.elapsed().as_secs_f64(),
        out_dir.display()
    );
    Ok(())
}

pub struct Trajectory {
    pub n: Option<u64>,
    pub mc_trials: usize,
    pub seed: u64,
    pub schedule: Schedule,
}

pub fn theory(
    model: &TwoArmModel,
    traj: Trajectory,
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    model.validate().map_err(CliError::from_args)?;
    let (p, q) = model.pq();
    println!("P = {}", fmt_num(p));
    println!("Q = {}", fmt_num(q));
    match model.fixed_point() {
        Some(w) => println!("fixed point = {}", fmt_num(w)),
        None => println!("fixed point = none"),
    }
    println!("regime = {}", model.classify().name());

    if traj.n.is_none() && traj.mc_trials == 0 {
        return Ok(());
    }
    let n = traj.n.unwrap_or(50);
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let mc = if traj.mc_trials > 0 {
        Some(
            mc_two_arm(model, n, traj.mc_trials, traj.seed, traj.schedule)
                .map_err(CliError::from_args)?,
        )
    } else {
        None
    };
    let path = out_dir.unwrap_or(Path::new(".")).join("theory.csv");
    emit(Some(&path), |out| {
        writeln!(out, "step,closed_form,mc_mean,mc_stderr")?;
        for step in 1..=n {
            write!(out, "{step},{}", model.expected_threshold(step))?;
            match &mc {
                Some(points) => {
                    let pt = &points[(step - 1) as usize];
                    writeln!(out, ",{},{}", pt.mean, pt.stderr)?;
                }
                None => writeln!(out, ",,")?,
            }
        }
        Ok(())
    })?;
    println!("trajectory -> {}", path.display());
    Ok(())
}

pub fn gen_signal(
    kind: SignalKind,
    len: usize,
    x0: Option<f64>,
    seed: u64,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let source = match (kind, x0) {
        (SignalKind::Uniform, Some(_)) => {
            return Err(CliError::Usage("--x0 only applies to --kind logistic".into()));
        }
        (SignalKind::Uniform, None) => gen_synthetic(SyntheticKind::UniformIid, len, seed),
        (SignalKind::Logistic, Some(x0)) => {
            if is_degenerate_logistic_start(x0) {
                eprintln!("warning: x0 = {x0} is a fixed or eventually fixed point; the signal is constant");
            }
            logistic_from(x0, len)
        }
        (SignalKind::Logistic, None) => gen_synthetic(SyntheticKind::LogisticMap, len, seed),
    }
    .map_err(CliError::from_args)?;
    emit(output, |out| {
        for s in source.samples() {
            writeln!(out, "{s}")?;
        }
        Ok(())
    })
}

/// Rounds to twelve decimals and drops trailing zeros.
fn fmt_num(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    match s {
        "-0" | "" => "0".to_string(),
        _ => s.to_string(),
    }
}
