//! `converge`, `project-test` and `check-operators`.

use std::f64::consts::PI;
use std::path::Path;

use bofem::diagnostics::check_operators;
use bofem::harness::{emit_study, run_double_soliton_study, run_periodic_wave_study};
use bofem::output::write_json;
use bofem::projection::{orthogonality_residual, projection_error};
use bofem::{
    project, Boundary, DoubleSolitonParams, PeriodicWaveParams, QuadratureOrders, StudyOptions, UniformPeriodicMesh,
    WeightFunction,
};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Double soliton on [-100, 100], φ = 120 + x, errors at t = 90 and 180.
    Table1,
    /// Periodic wave, c = 0.25, L = 15, error at t = 480.
    Table2,
}

impl Preset {
    fn default_sizes(self) -> Vec<usize> {
        match self {
            Preset::Table1 => vec![128, 256, 512],
            Preset::Table2 => vec![16, 32, 64, 128, 256],
        }
    }

    /// Largest element count run without `--allow-large`.
    fn cap(self) -> usize {
        match self {
            Preset::Table1 => 512,
            Preset::Table2 => 256,
        }
    }
}

#[derive(Debug, Serialize)]
struct ConvergeConfig {
    preset: Preset,
    n_list: Vec<usize>,
    stop_factor: f64,
    max_iters: usize,
}

pub fn converge(
    preset: Preset,
    n_list: Option<Vec<usize>>,
    stop_factor: Option<f64>,
    allow_large: bool,
    out: &Path,
) -> Result<(), CliError> {
    let n_list = n_list.unwrap_or_else(|| preset.default_sizes());
    if let Some(&n) = n_list.iter().find(|&&n| n > preset.cap()) {
        if !allow_large {
            return Err(CliError::Usage(format!(
                "N = {n} exceeds the default cap of {} for this preset; pass --allow-large to run it",
                preset.cap()
            )));
        }
    }
    let mut opts = StudyOptions::default();
    if let Some(s) = stop_factor {
        if !(s.is_finite() && s > 0.0) {
            return Err(CliError::Usage(format!("stop factor must be positive, got {s}")));
        }
        opts.stop_factor = s;
    }
    // Element-list shape errors are the caller's fault, not the solver's.
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] != 2 * w[0]) || n_list[0] < 4 {
        return Err(CliError::Usage(format!("--n-list must double row to row starting at N >= 4, got {n_list:?}")));
    }

    let study = match preset {
        Preset::Table2 => {
            opts.label = Some("table2".into());
            run_periodic_wave_study(&n_list, 480.0, &PeriodicWaveParams::reference(), &opts)?
        }
        Preset::Table1 => {
            opts.label = Some("table1".into());
            run_double_soliton_study(
                &n_list,
                &[90.0, 180.0],
                &DoubleSolitonParams::overtaking(),
                (-100.0, 100.0),
                Boundary::Free,
                WeightFunction::Linear { intercept: 120.0, slope: 1.0 },
                &opts,
            )?
        }
    };
    emit_study(&study, out)?;
    write_json(
        &out.join("effective_config.json"),
        &ConvergeConfig { preset, n_list, stop_factor: opts.stop_factor, max_iters: opts.max_iters },
    )?;
    for report in &study.reports {
        println!("# {} (t = {})", report.experiment, report.target_time);
        print!("{}", report.to_csv());
    }
    Ok(())
}

pub fn project_test(n_list: Option<Vec<usize>>, half_period: f64, wavenumber: u32) -> Result<(), CliError> {
    let n_list = n_list.unwrap_or_else(|| vec![16, 32, 64, 128]);
    if !(half_period.is_finite() && half_period > 0.0) || wavenumber == 0 {
        return Err(CliError::Usage("half period and wavenumber must be positive".into()));
    }
    let k = wavenumber as f64 * PI / half_period;
    let u = |x: f64| (k * x).sin();
    let du = |x: f64| k * (k * x).cos();
    println!("N,L2,rate,H1,rate,orthogonality");
    let mut rows = Vec::new();
    for &n in &n_list {
        let mesh =
            UniformPeriodicMesh::new(-half_period, half_period, n).map_err(|e| CliError::Usage(e.to_string()))?;
        let p = project(u, &mesh, &WeightFunction::Unit)?;
        let e0 = projection_error(u, &p, 0)?;
        let e1 = projection_error(du, &p, 1)?;
        let orth = orthogonality_residual(u, &p, &WeightFunction::Unit)?;
        rows.push((n, e0, e1, orth));
    }
    for (i, &(n, e0, e1, orth)) in rows.iter().enumerate() {
        let rates = rows.get(i + 1).map(|next| ((e0 / next.1).log2(), (e1 / next.2).log2()));
        match rates {
            Some((r0, r1)) => println!("{n},{e0:.6e},{r0:.2},{e1:.6e},{r1:.2},{orth:.2e}"),
            None => println!("{n},{e0:.6e},,{e1:.6e},,{orth:.2e}"),
        }
    }
    Ok(())
}

pub fn check(elements: usize) -> Result<(), CliError> {
    if elements < 4 {
        return Err(CliError::Usage(format!("--elements must be at least 4, got {elements}")));
    }
    let checks = check_operators(elements, QuadratureOrders::default())?;
    let mut failed = Vec::new();
    for c in &checks {
        let rel = if c.at_least { ">=" } else { "<=" };
        let tag = if c.passed() { "ok  " } else { "FAIL" };
        println!("{tag} {:<24} {:>12.4e} {rel} {:.1e}", c.name, c.value, c.threshold);
        if !c.passed() {
            failed.push(c.name.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Diagnostic(format!("violated: {}", failed.join(", "))))
    }
}
