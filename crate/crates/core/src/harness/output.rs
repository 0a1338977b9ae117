//! CSV layouts of ensemble results. Floats use Rust's shortest round-trip
//! formatting, so identical results always produce identical bytes.

use std::io::{self, Write};

use super::{EnsembleResult, VarianceRow};

/// `env_id,policy,step,mean_reward,mean_regret,mean_cor,mean_t_0..`
pub fn write_curves<W: Write>(mut out: W, result: &EnsembleResult) -> io::Result<()> {
    let k = result.envs.first().map_or(0, |e| e.arms());
    write!(out, "env_id,policy,step,mean_reward,mean_regret,mean_cor")?;
    for i in 0..k {
        write!(out, ",mean_t_{i}")?;
    }
    writeln!(out)?;
    for cell in &result.cells {
        let s = &cell.series;
        for row in 0..s.len() {
            write!(
                out,
                "{},{},{},{},{},{}",
                cell.env_index, cell.policy, s.steps[row], s.reward[row], s.regret[row], s.cor[row]
            )?;
            for t in s.pulls_at(row) {
                write!(out, ",{t}")?;
            }
            writeln!(out)?;
        }
    }
    out.flush()
}

/// `env_id,policy,reward_norm,cor` at the final checkpoint.
pub fn write_scatter<W: Write>(mut out: W, result: &EnsembleResult) -> io::Result<()> {
    writeln!(out, "env_id,policy,reward_norm,cor")?;
    for p in result.scatter() {
        writeln!(
            out,
            "{},{},{},{}",
            p.env_index, p.policy, p.reward_norm, p.cor
        )?;
    }
    out.flush()
}

/// `policy,var_cor,var_reward_norm`; header only when `rows` is empty.
pub fn write_variance<W: Write>(mut out: W, rows: &[VarianceRow]) -> io::Result<()> {
    writeln!(out, "policy,var_cor,var_reward_norm")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.policy, r.var_cor, r.var_reward_norm)?;
    }
    out.flush()
}

/// `policy,step,mean_cor,mean_reward_norm,mean_regret` averaged over environments.
pub fn write_ensemble_means<W: Write>(mut out: W, result: &EnsembleResult) -> io::Result<()> {
    writeln!(out, "policy,step,mean_cor,mean_reward_norm,mean_regret")?;
    for m in result.ensemble_means() {
        for row in 0..m.steps.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                m.policy, m.steps[row], m.cor[row], m.reward_norm[row], m.regret[row]
            )?;
        }
    }
    out.flush()
}
