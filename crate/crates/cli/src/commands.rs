//! Command implementations. Each returns a [`RunOutput`] that the caller
//! writes to disk.

use num_complex::Complex64;
use rayon::prelude::*;

use twm_core::adiabatic::{AdiabaticTrajectory, Branch, Process};
use twm_core::coupled_wave::{integrate, Trajectory};
use twm_core::elliptic::{jacobi, JFunction};
use twm_core::linear_twolevel::{integrate_linear, TwoLevelState};
use twm_core::profile::MismatchProfile;
use twm_core::{fmt_f64, Error};

use crate::config::{efficiency, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Derived, Manifest, RunOutput, Summary, Table};
use crate::svg::{line_plot, Series};

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub tol: Option<(f64, Option<f64>)>,
    pub seed_branch: Option<Branch>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some((rel, abs)) = self.tol {
            cfg.tolerance.rel = rel;
            if let Some(a) = abs {
                cfg.tolerance.abs = a;
            }
        }
        if let Some(b) = self.seed_branch {
            cfg.branch = b;
        }
    }
}

/// Parses `REL[,ABS]`.
pub fn parse_tol(s: &str) -> Result<(f64, Option<f64>), String> {
    let mut parts = s.split(',');
    let num = |p: Option<&str>| -> Result<Option<f64>, String> {
        p.map(|t| {
            let v: f64 = t
                .trim()
                .parse()
                .map_err(|_| format!("invalid tolerance `{t}`"))?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(format!("tolerance must be positive, got {v}"))
            }
        })
        .transpose()
    };
    let rel = num(parts.next())?.ok_or("missing relative tolerance")?;
    let abs = num(parts.next())?;
    if parts.next().is_some() {
        return Err("expected REL[,ABS]".into());
    }
    Ok((rel, abs))
}

pub fn derived(process: &Process) -> Derived {
    Derived {
        process: Some(process.kind().name().to_string()),
        constants: Some(process.constants().as_array()),
        m: Some(process.m()),
        g: Some(process.g()),
        half_period: Some(process.half_period()),
        complete_k: process.period().quarter_period_k,
    }
}

/// Largest finite `r_nl` and the first `ξ` where the branch is flagged or lost.
fn adiabatic_metrics(t: &AdiabaticTrajectory) -> (Option<f64>, Option<f64>) {
    let max = t
        .samples
        .iter()
        .map(|s| s.r_nl)
        .filter(|r| r.is_finite())
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    let breakdown = t
        .first_flagged()
        .map(|s| s.xi)
        .or(t.breakdown.as_ref().map(|b| b.xi));
    (max, breakdown)
}

fn intensity_plot(title: &str, xi: &[f64], intensities: &[[f64; 3]]) -> String {
    let series: Vec<Series> = ["I1", "I2", "I3"]
        .iter()
        .enumerate()
        .map(|(j, label)| {
            Series::new(
                label,
                xi.iter()
                    .zip(intensities)
                    .map(|(&x, i)| (x, i[j]))
                    .collect(),
            )
        })
        .collect();
    line_plot(title, "xi", "intensity", &series)
}

pub struct SimulateRun {
    pub trajectory: Trajectory,
    pub output: RunOutput,
}

pub fn simulate(cfg: &ScenarioConfig, stem: &str) -> CliResult<SimulateRun> {
    let r = cfg.resolve()?;
    let grid = cfg.span.grid();
    let traj = integrate(&r.env0, &cfg.profile, &grid, &r.opts)?;
    let c = r.process.constants();
    let kind = r.process.kind();

    let mut manifest = Manifest::new("simulate", Some(cfg.clone()));
    manifest.derived = derived(&r.process);
    let last = traj.last().map(|s| s.intensities);
    manifest.summary = Summary {
        final_efficiency: last.map(|i| efficiency(kind, &c, i)),
        final_intensities: last,
        manley_rowe_drift: Some(traj.manley_rowe_drift()),
        ..Summary::default()
    };
    match r
        .process
        .adiabatic_trajectory(&cfg.profile, &grid, cfg.branch, cfg.sign)
    {
        Ok(ad) => {
            let (max, bd) = adiabatic_metrics(&ad);
            manifest.summary.max_r_nl = max;
            manifest.summary.breakdown_xi = bd;
        }
        Err(e) => manifest
            .summary
            .notes
            .push(format!("adiabatic branch unavailable: {e}")),
    }

    let name = format!("{stem}_simulate");
    let table = Table::from_writer(&name, |w| traj.write_csv(w));
    let xi: Vec<f64> = traj.samples.iter().map(|s| s.xi).collect();
    let is: Vec<[f64; 3]> = traj.samples.iter().map(|s| s.intensities).collect();
    let svg = intensity_plot(&format!("{} full dynamics", kind.name()), &xi, &is);
    Ok(SimulateRun {
        trajectory: traj,
        output: RunOutput {
            stem: stem.to_string(),
            tables: vec![table],
            svgs: vec![(format!("{name}.svg"), svg)],
            manifest,
        },
    })
}

pub struct TrajectoryRun {
    pub trajectory: AdiabaticTrajectory,
    pub output: RunOutput,
}

pub fn trajectory(cfg: &ScenarioConfig, stem: &str) -> CliResult<TrajectoryRun> {
    cfg.validate_common()?;
    let process = cfg.process()?;
    let grid = cfg.span.grid();
    let ad = process.adiabatic_trajectory(&cfg.profile, &grid, cfg.branch, cfg.sign)?;
    let c = process.constants();

    let mut manifest = Manifest::new("trajectory", Some(cfg.clone()));
    manifest.derived = derived(&process);
    let (max, bd) = adiabatic_metrics(&ad);
    let last = ad.samples.last().map(|s| s.intensities);
    manifest.summary = Summary {
        final_efficiency: last.map(|i| efficiency(process.kind(), &c, i)),
        final_intensities: last,
        max_r_nl: max,
        breakdown_xi: bd,
        ..Summary::default()
    };
    if let Some(b) = &ad.breakdown {
        manifest.summary.notes.push(format!(
            "branch lost at xi = {}: {}",
            fmt_f64(b.xi),
            b.reason
        ));
    }

    let name = format!("{stem}_trajectory");
    let table = Table::from_writer(&name, |w| ad.write_csv(w));
    let xi: Vec<f64> = ad.samples.iter().map(|s| s.xi).collect();
    let is: Vec<[f64; 3]> = ad.samples.iter().map(|s| s.intensities).collect();
    let mut svgs = vec![(
        format!("{name}.svg"),
        intensity_plot(
            &format!("{} stationary branch", process.kind().name()),
            &xi,
            &is,
        ),
    )];
    svgs.push((
        format!("{name}_r_nl.svg"),
        line_plot(
            "nonlinear adiabaticity",
            "xi",
            "r_nl",
            &[Series::new(
                "r_nl",
                ad.samples.iter().map(|s| (s.xi, s.r_nl)).collect(),
            )],
        ),
    ));
    Ok(TrajectoryRun {
        trajectory: ad,
        output: RunOutput {
            stem: stem.to_string(),
            tables: vec![table],
            svgs,
            manifest,
        },
    })
}

pub fn linear(cfg: &ScenarioConfig, stem: &str) -> CliResult<RunOutput> {
    cfg.validate_common()?;
    let spec = cfg.linear_spec()?;
    let s = spec.state;
    let psi0 = TwoLevelState::new(Complex64::new(s[0], s[1]), Complex64::new(s[2], s[3]));
    let grid = cfg.span.grid();
    let traj = integrate_linear(
        &psi0,
        spec.kind,
        spec.coupling,
        &cfg.profile,
        &grid,
        &cfg.sim_options()?,
    )?;

    let mut manifest = Manifest::new("linear", Some(cfg.clone()));
    let last = traj.samples.last().map(|x| x.state.intensities());
    manifest.summary.max_r_nl = None;
    if let Some((ii, is)) = last {
        manifest.summary.notes.push(format!(
            "final (I_i, I_s) = ({}, {})",
            fmt_f64(ii),
            fmt_f64(is)
        ));
    }
    let name = format!("{stem}_linear");
    let table = Table::from_writer(&name, |w| traj.write_csv(w));
    let pts = |f: fn(&(f64, f64)) -> f64| -> Vec<(f64, f64)> {
        traj.samples
            .iter()
            .map(|x| (x.xi, f(&x.state.intensities())))
            .collect()
    };
    let svg = line_plot(
        "linear two-level model",
        "xi",
        "intensity",
        &[
            Series::new("I_i", pts(|p| p.0)),
            Series::new("I_s", pts(|p| p.1)),
            Series::new(
                "W",
                traj.samples.iter().map(|x| (x.xi, x.bloch.w)).collect(),
            ),
        ],
    );
    Ok(RunOutput {
        stem: stem.to_string(),
        tables: vec![table],
        svgs: vec![(format!("{name}.svg"), svg)],
        manifest,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rate: f64,
    pub final_efficiency: Option<f64>,
    pub adiabatic_efficiency: Option<f64>,
    pub max_r_nl: Option<f64>,
    pub error: Option<String>,
}

pub const SWEEP_HEADER: &str = "rate,final_efficiency,adiabatic_efficiency,max_r_nl,error";

fn sweep_row(cfg: &ScenarioConfig, rate: f64) -> SweepRow {
    let mut row = SweepRow {
        rate,
        final_efficiency: None,
        adiabatic_efficiency: None,
        max_r_nl: None,
        error: None,
    };
    let mut c = cfg.clone();
    c.profile = MismatchProfile::linear(rate, cfg.sweep_center());
    let res = (|| -> CliResult<()> {
        let grid = c.span.grid();
        let process = c.process()?;
        let k = process.constants();
        match process.adiabatic_trajectory(&c.profile, &grid, c.branch, c.sign) {
            Ok(ad) => {
                row.max_r_nl = adiabatic_metrics(&ad).0;
                if ad.breakdown.is_none() {
                    row.adiabatic_efficiency = ad
                        .samples
                        .last()
                        .map(|s| efficiency(process.kind(), &k, s.intensities));
                }
            }
            Err(e) => row.error = Some(format!("adiabatic: {e}")),
        }
        let r = c.resolve()?;
        let traj = integrate(&r.env0, &c.profile, &grid, &r.opts)?;
        row.final_efficiency = traj
            .last()
            .map(|s| efficiency(process.kind(), &k, s.intensities));
        Ok(())
    })();
    if let Err(e) = res {
        row.error = Some(e.to_string());
    }
    row
}

/// Worker count from `TWM_LAB_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("TWM_LAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

pub fn sweep(
    cfg: &ScenarioConfig,
    stem: &str,
    rates: Option<Vec<f64>>,
) -> CliResult<(Vec<SweepRow>, RunOutput)> {
    cfg.validate_common()?;
    let mut cfg = cfg.clone();
    if let Some(r) = rates {
        cfg.sweep = Some(crate::config::SweepSpec { rates: r });
    }
    let rates = cfg.sweep_rates()?;
    let process = cfg.process()?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> =
        pool.install(|| rates.par_iter().map(|&r| sweep_row(&cfg, r)).collect());

    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let mut csv = format!("{SWEEP_HEADER}\n");
    for r in &rows {
        let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.rate),
            opt(r.final_efficiency),
            opt(r.adiabatic_efficiency),
            opt(r.max_r_nl),
            err
        ));
    }
    let name = format!("{stem}_sweep");
    let mut manifest = Manifest::new("sweep", Some(cfg.clone()));
    manifest.derived = derived(&process);
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        manifest
            .summary
            .notes
            .push(format!("{failed} row(s) failed"));
    }
    manifest.summary.max_r_nl = rows
        .iter()
        .filter_map(|r| r.max_r_nl)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    let pts = |f: fn(&SweepRow) -> Option<f64>| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| r.rate > 0.0)
            .map(|r| (r.rate.log10(), f(r).unwrap_or(f64::NAN)))
            .collect()
    };
    let svg = line_plot(
        "chirp-rate sweep",
        "log10 rate",
        "efficiency",
        &[
            Series::new("full dynamics", pts(|r| r.final_efficiency)),
            Series::new("stationary branch", pts(|r| r.adiabatic_efficiency)),
        ],
    );
    let out = RunOutput {
        stem: stem.to_string(),
        tables: vec![Table {
            name: name.clone(),
            csv,
        }],
        svgs: vec![(format!("{name}.svg"), svg)],
        manifest,
    };
    Ok((rows, out))
}

pub const ELLIPTIC_HEADER: &str = "u,sn,cn,dn,j_minus,dj_minus,j_tilde,dj_tilde,pole";

/// Tabulates `sn, cn, dn`, `J−` and `J̃` on `u_min, u_min + step, … ≤ u_max`.
/// Rows where either `J` function sits on a pole have `pole = 1` and empty
/// `J` columns.
pub fn elliptic_table(
    m: f64,
    u_min: f64,
    u_max: f64,
    step: f64,
    stem: &str,
) -> CliResult<RunOutput> {
    if ![m, u_min, u_max, step].iter().all(|x| x.is_finite()) || step <= 0.0 || u_max < u_min {
        return Err(CliError::Config(format!(
            "elliptic table needs finite m and u_min <= u_max with step > 0 (m = {m}, range [{u_min}, {u_max}], step {step})"
        )));
    }
    let n = ((u_max - u_min) / step + 1e-9).floor() as usize + 1;
    if n > 1_000_000 {
        return Err(CliError::Config(format!(
            "elliptic table would have {n} rows"
        )));
    }
    let mut csv = format!("{ELLIPTIC_HEADER}\n");
    for k in 0..n {
        let u = u_min + step * k as f64;
        let t = jacobi(u, m)?;
        let jm = JFunction::Minus.eval(u, m);
        let jt = JFunction::ImagPlus.eval(u, m);
        let cell = |r: &Result<twm_core::elliptic::JValue, Error>, d: bool| match r {
            Ok(v) => fmt_f64(if d { v.derivative } else { v.value }),
            Err(_) => String::new(),
        };
        let pole = matches!(jm, Err(Error::Pole { .. })) || matches!(jt, Err(Error::Pole { .. }));
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_f64(u),
            fmt_f64(t.sn),
            fmt_f64(t.cn),
            fmt_f64(t.dn),
            cell(&jm, false),
            cell(&jm, true),
            cell(&jt, false),
            cell(&jt, true),
            u8::from(pole)
        ));
    }
    let mut manifest = Manifest::new("elliptic-table", None);
    manifest.summary.notes.push(format!(
        "m = {}, u in [{}, {}], step {}",
        fmt_f64(m),
        fmt_f64(u_min),
        fmt_f64(u_max),
        fmt_f64(step)
    ));
    Ok(RunOutput {
        stem: stem.to_string(),
        tables: vec![Table {
            name: format!("{stem}_elliptic"),
            csv,
        }],
        svgs: Vec::new(),
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_parsing() {
        assert_eq!(parse_tol("1e-9").unwrap(), (1e-9, None));
        assert_eq!(parse_tol("1e-9,1e-12").unwrap(), (1e-9, Some(1e-12)));
        assert!(parse_tol("x").is_err());
        assert!(parse_tol("-1").is_err());
        assert!(parse_tol("1,2,3").is_err());
    }

    #[test]
    fn elliptic_table_limits() {
        let out = elliptic_table(0.0, 0.0, 1.0, 0.25, "t").unwrap();
        let csv = &out.tables[0].csv;
        assert_eq!(csv.lines().count(), 6);
        for line in csv.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let u: f64 = f[0].parse().unwrap();
            let sn: f64 = f[1].parse().unwrap();
            let cn: f64 = f[2].parse().unwrap();
            assert!((sn - u.sin()).abs() < 1e-15 && (cn - u.cos()).abs() < 1e-15);
        }
        // J− has a pole at u = 0.
        assert!(csv.lines().nth(1).unwrap().ends_with(",1"));
        assert!(elliptic_table(0.5, 1.0, 0.0, 0.1, "t").is_err());
    }
}
