//! Built-in scenarios reproducing the standard figure set. Every figure is
//! an ordinary config run through the regular commands, so its manifest can
//! be fed back with `--config`.

use twm_core::adiabatic::{Branch, ProcessKind};
use twm_core::bloch_geometry::{
    geometry_samples, surface_mesh, write_geometry_csv, write_mesh_csv, WeightTriple,
};
use twm_core::coupled_wave::Trajectory;
use twm_core::linear_twolevel::{
    adiabatic_intensities_opa, eigensystem_hermitian, eigensystem_nonhermitian, LinearKind,
};
use twm_core::profile::{MismatchProfile, Span};
use twm_core::{fmt_f64, Sign};

use crate::commands::{self, Overrides};
use crate::config::{ConstantsSpec, InitialSpec, LinearSpec, ScenarioConfig, ToleranceSpec};
use crate::error::{CliError, CliResult};
use crate::output::{RunOutput, Table};
use crate::svg::{line_plot, Series};

fn base(profile: MismatchProfile, span: Span) -> ScenarioConfig {
    ScenarioConfig {
        process: None,
        sign: Sign::Plus,
        branch: Branch::Plus,
        constants: None,
        initial: None,
        profile,
        span,
        tolerance: ToleranceSpec::default(),
        linear: None,
        sweep: None,
    }
}

fn nonlinear(
    kind: ProcessKind,
    k: (f64, f64),
    branch: Branch,
    profile: MismatchProfile,
    span: Span,
) -> ScenarioConfig {
    let mut c = base(profile, span);
    c.process = Some(kind);
    c.branch = branch;
    c.constants = Some(ConstantsSpec { k1: k.0, k2: k.1 });
    c
}

fn seeded(
    kind: ProcessKind,
    intensities: [f64; 3],
    profile: MismatchProfile,
    span: Span,
) -> ScenarioConfig {
    let mut c = base(profile, span);
    c.process = Some(kind);
    c.initial = Some(InitialSpec {
        intensities,
        phases: [0.0; 3],
    });
    c
}

fn sfg_conversion() -> ScenarioConfig {
    nonlinear(
        ProcessKind::Sfg,
        (10.0, 1.0),
        Branch::Plus,
        MismatchProfile::linear(3.0, 3.0),
        Span::new(0.0, 6.0, 601),
    )
}

fn shg_conversion() -> ScenarioConfig {
    nonlinear(
        ProcessKind::Shg,
        (1.0, 1.0),
        Branch::Plus,
        MismatchProfile::linear(1.0, 4.0),
        Span::new(0.0, 8.0, 801),
    )
}

fn opa_amplification() -> ScenarioConfig {
    nonlinear(
        ProcessKind::Opa,
        (10.0, 11.0),
        Branch::Minus,
        MismatchProfile::linear(-4.0, 5.0),
        Span::new(0.0, 10.0, 1001),
    )
}

/// Config and figure-specific post-processing for figure `n`.
pub fn figure(n: u8, ov: &Overrides) -> CliResult<RunOutput> {
    let stem = format!("fig{n}");
    let mut out = match n {
        1 => {
            let mut c = base(MismatchProfile::linear(2.0, 5.0), Span::new(0.0, 10.0, 501));
            let e = eigensystem_hermitian(c.profile.value(c.span.start), 1.0)?;
            let v = e.vectors[1];
            c.linear = Some(LinearSpec {
                kind: LinearKind::Hermitian,
                coupling: 1.0,
                state: [v.a_i.re, v.a_i.im, v.a_s.re, v.a_s.im],
            });
            ov.apply(&mut c);
            commands::linear(&c, &stem)?
        }
        2 => {
            let mut c = base(
                MismatchProfile::linear(-1.0, 10.0),
                Span::new(0.0, 8.5, 851),
            );
            let e = eigensystem_nonhermitian(c.profile.value(c.span.start), 1.0)?;
            let v = e.vectors[0];
            c.linear = Some(LinearSpec {
                kind: LinearKind::Opa,
                coupling: 1.0,
                state: [v.a_i.re, v.a_i.im, v.a_s.re, v.a_s.im],
            });
            ov.apply(&mut c);
            let mut run = commands::linear(&c, &stem)?;
            run.tables.push(opa_reference(&c, &stem)?);
            run
        }
        3 => trajectory_only(
            nonlinear(
                ProcessKind::Sfg,
                (10.0, 1.0),
                Branch::Plus,
                MismatchProfile::linear(1.0, 0.0),
                Span::new(-10.0, 10.0, 401),
            ),
            ov,
            &stem,
        )?,
        5 => trajectory_only(
            nonlinear(
                ProcessKind::Shg,
                (1.0, 1.0),
                Branch::Plus,
                MismatchProfile::linear(1.0, 0.0),
                Span::new(-6.0, 2.0, 401),
            ),
            ov,
            &stem,
        )?,
        7 => trajectory_only(
            nonlinear(
                ProcessKind::Opa,
                (10.0, 11.0),
                Branch::Plus,
                MismatchProfile::linear(1.0, 0.0),
                Span::new(-20.0, 20.0, 801),
            ),
            ov,
            &stem,
        )?,
        4 => full_and_adiabatic(sfg_conversion(), ov, &stem)?,
        6 => full_and_adiabatic(shg_conversion(), ov, &stem)?,
        8 => full_and_adiabatic(opa_amplification(), ov, &stem)?,
        9 => surface(
            seeded(
                ProcessKind::Sfg,
                [10.0, 1.0, 0.0],
                MismatchProfile::linear(3.0, 3.0),
                Span::new(0.0, 6.0, 601),
            ),
            WeightTriple::LINEAR_BLOCH,
            ov,
            &stem,
        )?,
        10 => surface(
            seeded(
                ProcessKind::Opa,
                [0.0, 1.0, 10.0],
                MismatchProfile::linear(-4.0, 5.0),
                Span::new(0.0, 10.0, 1001),
            ),
            WeightTriple::PSEUDO_BLOCH,
            ov,
            &stem,
        )?,
        _ => {
            return Err(CliError::Config(format!(
                "unknown figure {n}; expected 1 to 10"
            )))
        }
    };
    out.manifest.command = format!("figure {n}");
    Ok(out)
}

fn trajectory_only(mut c: ScenarioConfig, ov: &Overrides, stem: &str) -> CliResult<RunOutput> {
    ov.apply(&mut c);
    Ok(commands::trajectory(&c, stem)?.output)
}

/// Full integration next to the stationary branch of the same scenario.
fn full_and_adiabatic(mut c: ScenarioConfig, ov: &Overrides, stem: &str) -> CliResult<RunOutput> {
    ov.apply(&mut c);
    let sim = commands::simulate(&c, stem)?;
    let ad = commands::trajectory(&c, stem)?;
    let mut out = sim.output;
    out.tables[0].name = format!("{stem}_intensities");
    let mut t = ad
        .output
        .tables
        .into_iter()
        .next()
        .expect("trajectory table");
    t.name = format!("{stem}_adiabaticity");
    out.tables.push(t);
    out.manifest.summary.max_r_nl = ad.output.manifest.summary.max_r_nl;
    out.manifest.summary.breakdown_xi = ad.output.manifest.summary.breakdown_xi;
    out.manifest
        .summary
        .notes
        .extend(ad.output.manifest.summary.notes);

    let mut series: Vec<Series> = Vec::new();
    for (j, label) in ["I1", "I2", "I3"].iter().enumerate() {
        series.push(Series::new(
            label,
            sim.trajectory
                .samples
                .iter()
                .map(|s| (s.xi, s.intensities[j]))
                .collect(),
        ));
    }
    for (j, label) in ["I1 stationary", "I2 stationary", "I3 stationary"]
        .iter()
        .enumerate()
    {
        series.push(Series::new(
            label,
            ad.trajectory
                .samples
                .iter()
                .map(|s| (s.xi, s.intensities[j]))
                .collect(),
        ));
    }
    out.svgs = vec![
        (
            format!("{stem}_intensities.svg"),
            line_plot(
                "full dynamics and stationary branch",
                "xi",
                "intensity",
                &series,
            ),
        ),
        (
            format!("{stem}_adiabaticity.svg"),
            line_plot(
                "nonlinear adiabaticity",
                "xi",
                "r_nl",
                &[Series::new(
                    "r_nl",
                    ad.trajectory
                        .samples
                        .iter()
                        .map(|s| (s.xi, s.r_nl))
                        .collect(),
                )],
            ),
        ),
    ];
    Ok(out)
}

/// Adiabatic OPA intensities on the simulation grid.
fn opa_reference(c: &ScenarioConfig, stem: &str) -> CliResult<Table> {
    let q = c.linear_spec()?.coupling;
    let mut csv = String::from("xi,dk,delta,i_s,i_i\n");
    for x in c.span.grid() {
        let dk = c.profile.value(x);
        let delta = -q / dk;
        let (is, ii) = adiabatic_intensities_opa(delta)?;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(x),
            fmt_f64(dk),
            fmt_f64(delta),
            fmt_f64(is),
            fmt_f64(ii)
        ));
    }
    Ok(Table {
        name: format!("{stem}_adiabatic"),
        csv,
    })
}

/// Generalized Bloch surface mesh plus the trajectory drawn on it.
fn surface(
    mut c: ScenarioConfig,
    weights: WeightTriple,
    ov: &Overrides,
    stem: &str,
) -> CliResult<RunOutput> {
    ov.apply(&mut c);
    let sim = commands::simulate(&c, stem)?;
    let k = c.constants()?;
    let traj: &Trajectory = &sim.trajectory;
    let xi: Vec<f64> = traj.samples.iter().map(|s| s.xi).collect();
    let envs: Vec<_> = traj.samples.iter().map(|s| s.env).collect();
    let rows = geometry_samples(&xi, &envs, &weights, &k)?;
    let mesh = surface_mesh(&weights, &k, 73, 41)?;

    let mut out = sim.output;
    out.tables[0].name = format!("{stem}_intensities");
    out.tables
        .push(Table::from_writer(format!("{stem}_trajectory"), |w| {
            write_geometry_csv(w, &rows)
        }));
    out.tables
        .push(Table::from_writer(format!("{stem}_mesh"), |w| {
            write_mesh_csv(w, &mesh)
        }));
    let worst = rows.iter().map(|r| r.residual).fold(0.0_f64, f64::max);
    out.manifest
        .summary
        .notes
        .push(format!("max surface residual {}", fmt_f64(worst)));

    // Azimuth-W projection: the surface is a band in W; a geodesic is a
    // vertical line.
    let w_lo = mesh.iter().map(|p| p.w).fold(f64::INFINITY, f64::min);
    let w_hi = mesh.iter().map(|p| p.w).fold(f64::NEG_INFINITY, f64::max);
    let pi = std::f64::consts::PI;
    let path: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            if r.vector.radius() > 1e-9 {
                (r.vector.azimuth(), r.vector.w)
            } else {
                (f64::NAN, f64::NAN)
            }
        })
        .collect();
    let profile: Vec<(f64, f64)> = (0..=80)
        .map(|j| {
            let w = w_lo + (w_hi - w_lo) * j as f64 / 80.0;
            let i = weights.recovered_intensities(w, &k);
            (w, (i[0] * i[1] * i[2]).max(0.0).sqrt())
        })
        .collect();
    let track: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.vector.w, r.vector.radius()))
        .collect();
    out.svgs = vec![
        (
            format!("{stem}_projection.svg"),
            line_plot(
                "trajectory in the azimuth-W projection",
                "azimuth",
                "W",
                &[
                    Series::new("trajectory", path),
                    Series::new("surface edge", vec![(-pi, w_lo), (pi, w_lo)]),
                    Series::new("surface edge ", vec![(-pi, w_hi), (pi, w_hi)]),
                ],
            ),
        ),
        (
            format!("{stem}_profile.svg"),
            line_plot(
                "surface meridian and trajectory radius",
                "W",
                "radius",
                &[
                    Series::new("surface", profile),
                    Series::new("trajectory", track),
                ],
            ),
        ),
    ];
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_four_has_two_tables() {
        let out = figure(4, &Overrides::default()).unwrap();
        let names: Vec<&str> = out.tables.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["fig4_intensities", "fig4_adiabaticity"]);
        assert!(out.manifest.summary.final_efficiency.unwrap() > 0.9);
    }

    #[test]
    fn unknown_figure_is_a_config_error() {
        assert_eq!(
            figure(11, &Overrides::default()).unwrap_err().exit_code(),
            2
        );
    }
}
