//! The `run` command: compute every requested route and write the artifacts.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::info;

use crate::config::{ResolvedRun, RunConfig};
use crate::error::Result;
use crate::output::{write_csv, write_json, RouteAgreement, RouteSummary, Sidecar};
use crate::xsec::{spectrum, Route, SpectrumResult};

/// Files written by a run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub csv_files: Vec<PathBuf>,
    pub sidecar: PathBuf,
    pub spectra: Vec<SpectrumResult>,
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunArtifacts> {
    let resolved = config.resolve()?;
    run_resolved(config, &resolved, out_dir)
}

pub fn run_resolved(config: &RunConfig, run: &ResolvedRun, out_dir: &Path) -> Result<RunArtifacts> {
    fs::create_dir_all(out_dir)?;
    let stem = &run.output.stem;
    let mut spectra = Vec::new();
    let mut csv_files = Vec::new();
    let mut summaries = Vec::new();
    for &route in &run.routes {
        info!("computing route {}", route.name());
        let result = spectrum(&run.setup, route, &run.q_list)?;
        let path = out_dir.join(format!("{stem}_{}.csv", route.name()));
        write_csv(&result, BufWriter::new(File::create(&path)?))?;
        summaries.push(RouteSummary {
            route,
            csv: PathBuf::from(path.file_name().expect("file name")),
            grid: result.meta.grid.clone(),
            imaginary_residue: result.meta.imaginary_residue,
            peaks: result.meta.peaks.clone(),
        });
        csv_files.push(path);
        spectra.push(result);
    }
    let find = |r: Route| spectra.iter().find(|s| s.meta.route == r);
    let route_agreement = match (find(Route::StructureFactor), find(Route::Direct2d)) {
        (Some(a), Some(b)) => Some(RouteAgreement::compare(
            a,
            b,
            run.tolerances.route_agreement,
        )),
        _ => None,
    };
    let first = &spectra[0].meta;
    let sidecar = Sidecar {
        amplitude: first.amplitude,
        spacing_over_r: first.spacing_over_r,
        n_planes: first.n_planes,
        planes_isolated: first.planes_isolated,
        r_angstrom: run.setup.units.r_angstrom,
        kev_per_inverse_r: run.setup.units.kev_per_unit(),
        density_unit: "L_y R^2".into(),
        window_tol: run.setup.window_tol,
        seed: run.seed,
        neglected_term_estimate: first.neglected_term_estimate,
        routes: summaries,
        route_agreement,
        config: serde_json::to_value(config)?,
    };
    let sidecar_path = out_dir.join(format!("{stem}.json"));
    write_json(&sidecar, &sidecar_path)?;
    Ok(RunArtifacts {
        csv_files,
        sidecar: sidecar_path,
        spectra,
    })
}
