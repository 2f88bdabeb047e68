use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use serde_json::json;
use strobo_core::soliton::{corrected_state, gaussian, phi0, soliton_state};
use strobo_core::units::{duty_fraction, epsilon_from_physical, Scaling};
use strobo_core::{
    evolve_with, find_fixed_point, Grid, Protocol, RecordSpec, RefinerReport, WaveFunction,
};

use crate::config::{ConfigError, Mode, Scenario, StateKind};
use crate::output::{self, CurveFiles, GridInfo, CSV_SCHEMA, SCHEMA_VERSION};

/// Failure classes, one per non-zero exit code.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("invalid config: {0}")]
    Validation(#[from] ConfigError),
    #[error("{0:#}")]
    Runtime(#[from] anyhow::Error),
    #[error("refiner did not converge: {0}")]
    NotConverged(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::NotConverged(_) => 3,
        }
    }
}

impl From<strobo_core::Error> for Failure {
    fn from(e: strobo_core::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

pub type Outcome = Result<(), Failure>;

/// Progress messages on stderr, silenced by `--quiet`.
#[derive(Debug, Clone, Copy)]
pub struct Log {
    pub quiet: bool,
}

impl Log {
    pub fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// Reads a scenario and resolves relative paths against its directory.
pub fn load(path: &Path) -> Result<Scenario, Failure> {
    let mut s = Scenario::load(path)?;
    s.anchor_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(s)
}

fn out_dir(scenario: &Scenario, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| scenario.outputs.dir.clone())
}

fn grid_of(s: &Scenario) -> Result<Grid, Failure> {
    Grid::new(s.grid.n_points, s.grid.length).map_err(|e| ConfigError::new("grid", e.to_string()).into())
}

fn refine_state(
    s: &Scenario,
    grid: &Grid,
    epsilon: f64,
) -> Result<(WaveFunction, RefinerReport), Failure> {
    let seed = build_state(s, grid, s.refine.seed, epsilon, 0.0)?;
    Ok(find_fixed_point(epsilon, &seed, &s.refine.options())?)
}

/// Builds one initial state, boosted to `velocity`.
fn build_state(
    s: &Scenario,
    grid: &Grid,
    kind: StateKind,
    epsilon: f64,
    velocity: f64,
) -> Result<WaveFunction, Failure> {
    let init = &s.initial;
    let wf = match kind {
        StateKind::Gaussian => gaussian(grid, init.center, init.gaussian_width)?.boost(velocity),
        StateKind::Phi0 => phi0(grid, init.center).boost(velocity),
        StateKind::Soliton if init.a == 0.0 && init.b == 0.0 => {
            soliton_state(grid, epsilon, velocity, init.center).0
        }
        StateKind::Soliton => corrected_state(grid, epsilon, init.center, init.a, init.b)?
            .0
            .boost(velocity),
        StateKind::Refined => {
            let (wf, report) = refine_state(s, grid, epsilon)?;
            if !report.converged {
                return Err(Failure::NotConverged(format!(
                    "residual {:.3e} after {} iterations",
                    report.final_residual, report.iterations
                )));
            }
            wf.translate(init.center).boost(velocity)
        }
        StateKind::File => {
            let path = init.file.as_ref().expect("validated");
            output::read_state(path, grid, init.file_format)?.boost(velocity)
        }
    };
    Ok(wf)
}

#[derive(Serialize)]
struct CurveRecord {
    label: String,
    state: StateKind,
    protocol: &'static str,
    period: f64,
    strength: f64,
    rows: usize,
    #[serde(flatten)]
    files: CurveFiles,
}

/// Evolves every configured state and writes CSVs plus `manifest.json`.
pub fn run(scenario: &Scenario, out: Option<&Path>, log: Log) -> Outcome {
    let started = Instant::now();
    scenario.validate_run()?;
    let grid = grid_of(scenario)?;
    let dir = out_dir(scenario, out);
    let ev = &scenario.evolution;
    let period = scenario.period()?;
    let epsilon = match ev.mode {
        Mode::Kicked => period,
        Mode::FreeReference => scenario.epsilon().unwrap_or(0.0),
    };
    let v = scenario.initial.velocity;

    let mut notes = Vec::new();
    if ev.n_kicks == 100 {
        notes.push("n_kicks = 100 is the bundled default horizon".to_owned());
    }
    if !grid.is_lattice_momentum(v) {
        let msg = format!(
            "velocity {v} is not a multiple of the momentum spacing {:.6}; e^{{ivx}} is not periodic on this window (nearest lattice value {:.6})",
            grid.dk(),
            grid.nearest_lattice_momentum(v)
        );
        log.info(format!("warning: {msg}"));
        notes.push(msg);
    }
    if ev.epsilon.is_none() && ev.mode == Mode::Kicked {
        notes.push("epsilon derived from [physical]; the kick strength estimate is approximate".to_owned());
    }

    let protocol = match ev.mode {
        Mode::Kicked => Protocol::kicked(epsilon, ev.kick_model)?,
        Mode::FreeReference => Protocol::free(period)?,
    };
    let protocol_name = match ev.mode {
        Mode::Kicked => "kicked",
        Mode::FreeReference => "free",
    };
    let record = RecordSpec {
        sampling: ev.record,
        snapshot_every: (scenario.outputs.snapshot_every > 0).then_some(scenario.outputs.snapshot_every),
        comoving_velocity: v,
    };

    let mut curves = Vec::new();
    for &kind in &scenario.initial.states {
        let initial = build_state(scenario, &grid, kind, epsilon, v)?;
        let mut runs = vec![(kind.label().to_owned(), protocol, protocol_name)];
        if ev.free_reference && ev.mode == Mode::Kicked && kind == StateKind::Gaussian {
            runs.push((format!("{}-free", kind.label()), Protocol::free(period)?, "free"));
        }
        for (label, proto, name) in runs {
            log.info(format!("{label}: {} periods of {period}", ev.n_kicks));
            let traj = evolve_with(&initial, &proto, ev.n_kicks, &record)?;
            let files = output::write_curve(&dir, &label, &traj, scenario.outputs.snapshot_format)?;
            curves.push(CurveRecord {
                label,
                state: kind,
                protocol: name,
                period: proto.period,
                strength: proto.strength,
                rows: traj.len(),
                files,
            });
        }
    }

    let mut resolved = scenario.clone();
    if ev.mode == Mode::Kicked {
        resolved.evolution.epsilon = Some(epsilon);
    }
    resolved.evolution.sample_interval.get_or_insert(period);
    resolved.outputs.dir = dir.clone();

    let manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": "strobo",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "run",
        "config": resolved,
        "grid": GridInfo::from(&grid),
        "epsilon": epsilon,
        "period": period,
        "csv_schema": CSV_SCHEMA,
        "curves": curves,
        "notes": notes,
        "wall_time_s": started.elapsed().as_secs_f64(),
    });
    output::write_json(&dir.join("manifest.json"), &manifest)?;
    log.info(format!("wrote {} curves to {}", curves.len(), dir.display()));
    Ok(())
}

/// Runs the refiner and writes the state plus `refiner_report.json`.
pub fn refine(scenario: &Scenario, out: Option<&Path>, log: Log) -> Outcome {
    let started = Instant::now();
    scenario.validate_refine()?;
    let grid = grid_of(scenario)?;
    let dir = out_dir(scenario, out);
    let epsilon = scenario.epsilon()?;

    let (wf, report) = refine_state(scenario, &grid, epsilon)?;
    let ext = match scenario.outputs.snapshot_format {
        crate::config::SnapshotFormat::Csv => "csv",
        crate::config::SnapshotFormat::Binary => "bin",
    };
    let state_file = PathBuf::from(format!("refined.{ext}"));
    output::write_state(&dir.join(&state_file), &wf, scenario.outputs.snapshot_format)?;
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": "strobo",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "refine",
        "config": scenario,
        "grid": GridInfo::from(&grid),
        "state_file": state_file,
        "report": report,
        "wall_time_s": started.elapsed().as_secs_f64(),
    });
    output::write_json(&dir.join("refiner_report.json"), &doc)?;
    log.info(format!(
        "epsilon {epsilon}: alpha {:.10} residual {:.3e} after {} iterations",
        report.alpha, report.final_residual, report.iterations
    ));
    if !report.converged {
        return Err(Failure::NotConverged(format!(
            "residual {:.3e} above tol {:.3e} after {} iterations",
            report.final_residual, scenario.refine.tol, report.iterations
        )));
    }
    Ok(())
}

/// Converts the `[physical]` section and writes `estimate.json`.
pub fn estimate(scenario: &Scenario, out: Option<&Path>, log: Log) -> Outcome {
    let section = scenario
        .physical
        .as_ref()
        .ok_or_else(|| ConfigError::new("physical", "missing section"))?;
    let phys = section.resolve()?;
    let params = phys.params().map_err(|e| ConfigError::new("physical", e.to_string()))?;
    let (lambda, estimated) = phys.lambda()?;
    let epsilon = epsilon_from_physical(&params)?;
    let scaling = Scaling::new(&params)?;

    let echo = |raw: &Option<String>, si: Option<f64>, unit: &str| {
        raw.as_ref().map(|r| json!({ "input": r, "si": si, "unit": unit }))
    };
    let e = phys.experiment;
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": "strobo",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "estimate",
        "inputs": {
            "mass": echo(&section.mass, Some(phys.mass), "kg"),
            "period": echo(&section.period, Some(phys.period), "s"),
            "lambda": echo(&section.lambda, phys.lambda, "m^2/s"),
            "atom_count": echo(&section.atom_count, e.map(|e| e.atom_count), "1"),
            "scattering_length": echo(&section.scattering_length, e.map(|e| e.scattering_length), "m"),
            "transverse_length": echo(&section.transverse_length, e.map(|e| e.transverse_length), "m"),
            "kick_duration": echo(&section.kick_duration, e.map(|e| e.kick_duration), "s"),
        },
        "hbar": { "value": params.hbar, "unit": "J s" },
        "mass_u": phys.mass_in_u(),
        "lambda": { "value": lambda, "unit": "m^2/s", "approximate": estimated },
        "epsilon": epsilon,
        "period_dimensionless": epsilon,
        "duty_fraction": e.map(|e| duty_fraction(&e, &params)).transpose()?,
        "scaling": {
            "x_per_m": scaling.x,
            "t_per_s": scaling.t,
            "psi_per_m_inv_sqrt": scaling.psi,
        },
    });
    let dir = out_dir(scenario, out);
    output::write_json(&dir.join("estimate.json"), &report)?;
    if !log.quiet {
        println!("{}", serde_json::to_string_pretty(&report).context("formatting report")?);
    }
    Ok(())
}

/// Checks a config without running it.
pub fn validate(scenario: &Scenario, log: Log) -> Outcome {
    scenario.validate_run()?;
    if scenario.initial.states.contains(&StateKind::Refined) || scenario.evolution.epsilon.is_some() {
        scenario.validate_refine()?;
    }
    log.info("config is valid");
    Ok(())
}

/// Runs several scenarios concurrently, each into `out/<config stem>`.
pub fn sweep(configs: &[PathBuf], out: &Path, log: Log) -> Vec<(PathBuf, Outcome)> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|path| {
                scope.spawn(move || {
                    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
                    let stem = stem.unwrap_or_else(|| "scenario".into());
                    let outcome = load(path).and_then(|s| run(&s, Some(&out.join(&stem)), log));
                    (path.clone(), outcome)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}
