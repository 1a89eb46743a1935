//! Simulation orchestration: build the network and propagator from a config,
//! evolve the excitation, and emit the requested CSV artifacts.
//!
//! Sample states are computed by evaluating the closed-form propagator
//! directly at each sample time t = m·dt rather than by iterating a single
//! step matrix. Both routes are exact in principle, but direct evaluation
//! avoids accumulating one rounding's worth of drift per step, which matters
//! in the fast-coupling regime where downstream quantifiers divide tiny
//! witness violations by tiny bound gaps.

use crate::config::{ConfigError, OutputSpec, SimulationConfig};
use crate::csv;
use crate::dynamics::{
    density_state, initial_excitation, AmplitudeState, ClosedFormFactors, DynamicsError,
    NORM_TOLERANCE,
};
use crate::graph::{GraphError, NetworkGraph};
use crate::walk::{rw_step, rw_transition_matrix, ProbabilityDistribution, WalkError};
use crate::witness::{report, EntanglementReport, WitnessError, WitnessKind};
use std::path::{Path, PathBuf};

pub const QUANTUM_TIMELINE_FILE: &str = "quantum_timeline.csv";
pub const RANDOM_WALK_FILE: &str = "random_walk_timeline.csv";
pub const ENTANGLEMENT_FILE: &str = "entanglement_timeline.csv";
pub const COMPARE_FILE: &str = "compare.csv";

pub fn snapshot_file(step: usize) -> String {
    format!("snapshot_step_{step}.csv")
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("numerical invariant violated: {0}")]
    InvariantViolation(String),
}

impl SimError {
    /// Process exit code the CLI maps this error to: 2 for configuration and
    /// usage problems, 3 for numerical-invariant violations, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            SimError::Config(_) | SimError::Graph(_) | SimError::Walk(_) => 2,
            SimError::Witness(WitnessError::ZeroState) => 3,
            SimError::Witness(_) => 2,
            SimError::Dynamics(DynamicsError::NormExceedsOne { .. }) => 3,
            SimError::Dynamics(_) => 2,
            SimError::InvariantViolation(_) => 3,
            SimError::Io { .. } => 1,
        }
    }
}

/// Files written by one invocation, plus non-fatal warnings (the CLI prints
/// them to stderr).
#[derive(Debug, Default)]
pub struct RunArtifacts {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

struct Prepared {
    graph: NetworkGraph,
    factors: ClosedFormFactors,
    initial: AmplitudeState,
    dt: f64,
}

fn prepare(config: &SimulationConfig) -> Result<Prepared, SimError> {
    config.validate()?;
    let graph = config.build_graph()?;
    let params = config.system_params()?;
    let factors = ClosedFormFactors::new(&params, &graph.coupling_matrix())?;
    let initial = initial_excitation(&graph, config.initial_node(), config.initial.kind)?;
    Ok(Prepared {
        graph,
        factors,
        initial,
        dt: config.dt_kappa,
    })
}

/// States at t = 0, dt, …, steps·dt, each evaluated directly from the
/// initial state (exact; no step-to-step error accumulation). Evaluated in
/// parallel when the `parallel` feature is on — the result is identical
/// either way since every sample is an independent pure computation.
pub fn timeline_states(
    factors: &ClosedFormFactors,
    initial: &AmplitudeState,
    steps: usize,
    dt: f64,
) -> Result<Vec<AmplitudeState>, DynamicsError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..=steps)
            .into_par_iter()
            .map(|m| sample_state(factors, initial, m, dt))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        timeline_states_serial(factors, initial, steps, dt)
    }
}

/// Single-threaded variant of [`timeline_states`]; byte-identical results.
pub fn timeline_states_serial(
    factors: &ClosedFormFactors,
    initial: &AmplitudeState,
    steps: usize,
    dt: f64,
) -> Result<Vec<AmplitudeState>, DynamicsError> {
    (0..=steps)
        .map(|m| sample_state(factors, initial, m, dt))
        .collect()
}

fn sample_state(
    factors: &ClosedFormFactors,
    initial: &AmplitudeState,
    m: usize,
    dt: f64,
) -> Result<AmplitudeState, DynamicsError> {
    if m == 0 {
        // exp(0) = 1 exactly; keep the initial amplitudes bit-for-bit.
        Ok(initial.clone())
    } else {
        factors.evolve(initial, m as f64 * dt)
    }
}

/// All four witness reports per sample state.
pub fn entanglement_timeline(
    states: &[AmplitudeState],
) -> Result<Vec<[EntanglementReport; 4]>, WitnessError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        states.par_iter().map(state_reports).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        entanglement_timeline_serial(states)
    }
}

/// Single-threaded variant of [`entanglement_timeline`]; identical results.
pub fn entanglement_timeline_serial(
    states: &[AmplitudeState],
) -> Result<Vec<[EntanglementReport; 4]>, WitnessError> {
    states.iter().map(state_reports).collect()
}

fn state_reports(state: &AmplitudeState) -> Result<[EntanglementReport; 4], WitnessError> {
    Ok([
        report(state, WitnessKind::FullSystem2N)?,
        report(state, WitnessKind::CavitiesOnly)?,
        report(state, WitnessKind::AtomsOnly)?,
        report(state, WitnessKind::BipartiteLightMatter)?,
    ])
}

/// The trajectory norm may only shrink, and never exceeds one.
fn check_norms(states: &[AmplitudeState]) -> Result<(), SimError> {
    let mut prev = f64::INFINITY;
    for (m, state) in states.iter().enumerate() {
        let norm2 = state.norm_squared();
        if norm2 > 1.0 + NORM_TOLERANCE {
            return Err(SimError::InvariantViolation(format!(
                "squared norm {norm2} exceeds 1 at step {m}"
            )));
        }
        let norm = norm2.sqrt();
        if norm > prev + NORM_TOLERANCE {
            return Err(SimError::InvariantViolation(format!(
                "norm grew from {prev} to {norm} at step {m}"
            )));
        }
        prev = norm;
    }
    Ok(())
}

fn write_file(out_dir: &Path, name: &str, content: &str) -> Result<PathBuf, SimError> {
    let path = out_dir.join(name);
    csv::write_atomic(&path, content).map_err(|source| SimError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn quantum_timeline_csv(states: &[AmplitudeState], dt: f64) -> Result<String, SimError> {
    let n = states[0].node_count();
    let mut out = csv::quantum_header(n);
    out.push('\n');
    for (m, state) in states.iter().enumerate() {
        let rho = density_state(state)?;
        let mut values = state.alpha_probabilities();
        values.extend(state.beta_probabilities());
        values.push(state.norm_squared());
        values.push(rho.vacuum_weight());
        csv::push_row(&mut out, m, m as f64 * dt, &values);
    }
    Ok(out)
}

fn entanglement_csv(states: &[AmplitudeState], dt: f64) -> Result<String, SimError> {
    let mut out = String::from(csv::ENTANGLEMENT_HEADER);
    out.push('\n');
    let timeline = entanglement_timeline(states)?;
    for (m, reports) in timeline.iter().enumerate() {
        let [full, cav, atoms, bip] = reports;
        let values = [
            full.e,
            cav.e,
            atoms.e,
            bip.e,
            full.expectation,
            cav.expectation,
            atoms.expectation,
            bip.expectation,
            full.g_max,
            cav.g_max,
            atoms.g_max,
            bip.g_max,
        ];
        csv::push_row(&mut out, m, m as f64 * dt, &values);
    }
    Ok(out)
}

fn random_walk_distributions(
    graph: &NetworkGraph,
    config: &SimulationConfig,
) -> Result<Vec<ProbabilityDistribution>, SimError> {
    let transition = rw_transition_matrix(
        graph,
        config.rw_mode,
        config.rw_rate_over_kappa,
        config.dt_kappa,
    )?;
    let start = graph
        .linear_index(config.initial_node())
        .ok_or_else(|| DynamicsError::NodeOutOfBounds {
            i1: config.initial.node.0,
            i2: config.initial.node.1,
            n1: graph.dims().0,
            n2: graph.dims().1,
        })
        .map_err(SimError::from)?;
    let mut dist = ProbabilityDistribution::delta(graph.node_count(), start);
    let mut series = Vec::with_capacity(config.steps + 1);
    series.push(dist.clone());
    for _ in 0..config.steps {
        dist = rw_step(&dist, &transition)?;
        series.push(dist.clone());
    }
    Ok(series)
}

fn random_walk_csv(series: &[ProbabilityDistribution], dt: f64) -> String {
    let n = series[0].p().len();
    let mut out = csv::random_walk_header(n);
    out.push('\n');
    for (m, dist) in series.iter().enumerate() {
        let values: Vec<f64> = dist.p().iter().copied().collect();
        csv::push_row(&mut out, m, m as f64 * dt, &values);
    }
    out
}

fn snapshot_csv(graph: &NetworkGraph, state: &AmplitudeState) -> String {
    let (n1, n2) = graph.dims();
    csv::snapshot_grid(
        &state.alpha_probabilities(),
        &state.beta_probabilities(),
        n1,
        n2,
    )
}

fn warn_if_disconnected(graph: &NetworkGraph, warnings: &mut Vec<String>) {
    if !graph.is_connected() {
        warnings
            .push("graph is disconnected: the classical walk cannot reach every node".to_string());
    }
}

/// Run a full simulation and write every artifact the config requests.
pub fn run(config: &SimulationConfig, out_dir: &Path) -> Result<RunArtifacts, SimError> {
    std::fs::create_dir_all(out_dir).map_err(|source| SimError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let prepared = prepare(config)?;
    let mut artifacts = RunArtifacts::default();

    let needs_states = config.outputs.iter().any(|o| {
        matches!(
            o,
            OutputSpec::QuantumTimeline
                | OutputSpec::EntanglementTimeline
                | OutputSpec::Snapshot { .. }
        )
    });
    let states = if needs_states {
        let states = timeline_states(
            &prepared.factors,
            &prepared.initial,
            config.steps,
            prepared.dt,
        )
        .map_err(SimError::from)?;
        check_norms(&states)?;
        states
    } else {
        Vec::new()
    };

    for output in &config.outputs {
        match output {
            OutputSpec::QuantumTimeline => {
                let content = quantum_timeline_csv(&states, prepared.dt)?;
                artifacts
                    .files
                    .push(write_file(out_dir, QUANTUM_TIMELINE_FILE, &content)?);
            }
            OutputSpec::EntanglementTimeline => {
                let content = entanglement_csv(&states, prepared.dt)?;
                artifacts
                    .files
                    .push(write_file(out_dir, ENTANGLEMENT_FILE, &content)?);
            }
            OutputSpec::RandomWalkTimeline => {
                warn_if_disconnected(&prepared.graph, &mut artifacts.warnings);
                let series = random_walk_distributions(&prepared.graph, config)?;
                let content = random_walk_csv(&series, prepared.dt);
                artifacts
                    .files
                    .push(write_file(out_dir, RANDOM_WALK_FILE, &content)?);
            }
            OutputSpec::Snapshot { step } => {
                let content = snapshot_csv(&prepared.graph, &states[*step]);
                artifacts
                    .files
                    .push(write_file(out_dir, &snapshot_file(*step), &content)?);
            }
        }
    }
    Ok(artifacts)
}

/// Emit only the |α|², |β|² grids at one step.
pub fn snapshot(
    config: &SimulationConfig,
    step: usize,
    out_dir: &Path,
) -> Result<RunArtifacts, SimError> {
    if step > config.steps {
        return Err(ConfigError::Invalid {
            field: "step",
            message: format!(
                "snapshot step {step} exceeds configured steps {}",
                config.steps
            ),
        }
        .into());
    }
    std::fs::create_dir_all(out_dir).map_err(|source| SimError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let prepared = prepare(config)?;
    let state = sample_state(&prepared.factors, &prepared.initial, step, prepared.dt)?;
    check_norms(std::slice::from_ref(&state))?;
    let content = snapshot_csv(&prepared.graph, &state);
    let mut artifacts = RunArtifacts::default();
    artifacts
        .files
        .push(write_file(out_dir, &snapshot_file(step), &content)?);
    Ok(artifacts)
}

/// Per-step total-variation distance between the surviving quantum node
/// distribution (|α_k|² + |β_k|², renormalized) and the classical walk.
pub fn compare(config: &SimulationConfig, out_dir: &Path) -> Result<RunArtifacts, SimError> {
    std::fs::create_dir_all(out_dir).map_err(|source| SimError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let prepared = prepare(config)?;
    let mut artifacts = RunArtifacts::default();
    warn_if_disconnected(&prepared.graph, &mut artifacts.warnings);

    let states = timeline_states(
        &prepared.factors,
        &prepared.initial,
        config.steps,
        prepared.dt,
    )?;
    check_norms(&states)?;
    let classical = random_walk_distributions(&prepared.graph, config)?;

    let mut out = String::from(csv::COMPARE_HEADER);
    out.push('\n');
    for (m, (state, dist)) in states.iter().zip(&classical).enumerate() {
        let norm2 = state.norm_squared();
        if norm2 <= 0.0 {
            return Err(SimError::InvariantViolation(format!(
                "surviving norm vanished at step {m}; node distribution undefined"
            )));
        }
        let quantum: Vec<f64> = state
            .alpha_probabilities()
            .iter()
            .zip(&state.beta_probabilities())
            .map(|(a2, b2)| (a2 + b2) / norm2)
            .collect();
        let classical_p: Vec<f64> = dist.p().iter().copied().collect();
        let distance = crate::walk::tv_distance(&quantum, &classical_p);
        csv::push_row(&mut out, m, m as f64 * prepared.dt, &[distance]);
    }
    artifacts
        .files
        .push(write_file(out_dir, COMPARE_FILE, &out)?);
    Ok(artifacts)
}

/// Fan independent configs out to a worker pool (sequential without the
/// `parallel` feature); the i-th result pairs with the i-th input.
pub fn run_many(jobs: &[(SimulationConfig, PathBuf)]) -> Vec<Result<RunArtifacts, SimError>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|(config, out_dir)| run(config, out_dir))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter()
            .map(|(config, out_dir)| run(config, out_dir))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_bundled;

    fn read(path: &Path) -> String {
        std::fs::read_to_string(path).unwrap()
    }

    #[test]
    fn run_emits_requested_files_with_exact_headers() {
        let config = load_bundled("fig3_torus").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let artifacts = run(&config, dir.path()).unwrap();
        assert_eq!(artifacts.files.len(), 3);
        assert!(artifacts.warnings.is_empty());

        let quantum = read(&dir.path().join(QUANTUM_TIMELINE_FILE));
        let mut lines = quantum.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("step,t_kappa,alpha2_0,"));
        assert!(header.ends_with(",norm2,vacuum"));
        assert_eq!(header.split(',').count(), 2 + 50 + 2);
        assert_eq!(quantum.lines().count(), 1 + 101);

        let first = quantum.lines().nth(1).unwrap();
        let fields: Vec<&str> = first.split(',').collect();
        assert_eq!(fields[0], "0");
        assert_eq!(fields[1], "0");
        // Initial excitation sits at linear index 12 = (3-1)*5 + (3-1).
        assert_eq!(fields[2 + 12], "1");
        assert_eq!(fields[52], "1", "norm2 at step 0");
        assert_eq!(fields[53], "0", "vacuum at step 0");

        let ent = read(&dir.path().join(ENTANGLEMENT_FILE));
        assert_eq!(ent.lines().next().unwrap(), csv::ENTANGLEMENT_HEADER);
        assert_eq!(ent.lines().count(), 1 + 101);

        assert!(dir.path().join(snapshot_file(40)).exists());
    }

    #[test]
    fn runs_are_byte_identical() {
        let config = load_bundled("fig4_lossy_moebius").unwrap();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        run(&config, dir_a.path()).unwrap();
        run(&config, dir_b.path()).unwrap();
        for name in [QUANTUM_TIMELINE_FILE, ENTANGLEMENT_FILE, &snapshot_file(40)] {
            assert_eq!(
                read(&dir_a.path().join(name)),
                read(&dir_b.path().join(name)),
                "{name} must be deterministic"
            );
        }
    }

    #[test]
    fn snapshot_at_step_zero_is_the_bare_initial_grid() {
        let config = load_bundled("fig3_torus").unwrap();
        let dir = tempfile::tempdir().unwrap();
        snapshot(&config, 0, dir.path()).unwrap();
        let text = read(&dir.path().join(snapshot_file(0)));
        let blocks: Vec<&str> = text.split("\n\n").collect();
        assert_eq!(blocks.len(), 2);
        let alpha_rows: Vec<&str> = blocks[0].lines().collect();
        assert_eq!(alpha_rows.len(), 5);
        for (i, row) in alpha_rows.iter().enumerate() {
            let cells: Vec<&str> = row.split(',').collect();
            assert_eq!(cells.len(), 5);
            for (j, cell) in cells.iter().enumerate() {
                let want = if i == 2 && j == 2 { "1" } else { "0" };
                assert_eq!(*cell, want, "alpha grid at row {i} col {j}");
            }
        }
        assert!(blocks[1].lines().all(|row| row == "0,0,0,0,0"));
    }

    #[test]
    fn snapshot_validates_step_bound() {
        let config = load_bundled("fig3_torus").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let err = snapshot(&config, 101, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn compare_starts_at_zero_distance() {
        let mut config = load_bundled("fig2_torus").unwrap();
        config.steps = 40;
        let dir = tempfile::tempdir().unwrap();
        let artifacts = compare(&config, dir.path()).unwrap();
        assert!(artifacts.warnings.is_empty());
        let text = read(&dir.path().join(COMPARE_FILE));
        assert_eq!(text.lines().next().unwrap(), csv::COMPARE_HEADER);
        assert_eq!(text.lines().nth(1).unwrap(), "0,0,0");
        assert_eq!(text.lines().count(), 1 + 41);
    }

    #[test]
    fn disconnected_custom_graph_warns_but_still_compares() {
        let dir = tempfile::tempdir().unwrap();
        let graph_path = dir.path().join("two_components.txt");
        std::fs::write(&graph_path, "0 1\n2 3\n").unwrap();
        let text = format!(
            r#"{{
                "geometry": {{ "type": "custom", "path": {:?} }},
                "g_over_kappa": 1.0,
                "steps": 5,
                "initial": {{ "node": [1, 1], "kind": "cavity" }},
                "outputs": [ {{ "type": "random_walk_timeline" }} ]
            }}"#,
            graph_path
        );
        let config = SimulationConfig::from_json(&text, None).unwrap();
        let artifacts = compare(&config, dir.path()).unwrap();
        assert_eq!(artifacts.warnings.len(), 1);
        assert!(artifacts.warnings[0].contains("disconnected"));
        assert!(dir.path().join(COMPARE_FILE).exists());

        let run_artifacts = run(&config, dir.path()).unwrap();
        assert_eq!(run_artifacts.warnings.len(), 1);
    }

    #[test]
    fn exit_codes_map_error_classes() {
        let config_err: SimError = ConfigError::Invalid {
            field: "steps",
            message: "bad".into(),
        }
        .into();
        assert_eq!(config_err.exit_code(), 2);
        let invariant = SimError::InvariantViolation("norm grew".into());
        assert_eq!(invariant.exit_code(), 3);
        let io = SimError::Io {
            path: PathBuf::from("x"),
            source: std::io::Error::other("disk"),
        };
        assert_eq!(io.exit_code(), 1);
        let norm: SimError = DynamicsError::NormExceedsOne { norm_squared: 1.1 }.into();
        assert_eq!(norm.exit_code(), 3);
    }

    #[test]
    fn run_many_covers_all_jobs() {
        let base = tempfile::tempdir().unwrap();
        let jobs: Vec<(SimulationConfig, PathBuf)> = ["fig3_torus", "fig4_lossy_torus"]
            .iter()
            .map(|name| {
                let mut config = load_bundled(name).unwrap();
                config.steps = 20;
                config
                    .outputs
                    .retain(|o| !matches!(o, OutputSpec::Snapshot { .. }));
                (config, base.path().join(name))
            })
            .collect();
        let results = run_many(&jobs);
        assert_eq!(results.len(), 2);
        for ((_, dir), result) in jobs.iter().zip(&results) {
            result.as_ref().unwrap();
            assert!(dir.join(QUANTUM_TIMELINE_FILE).exists());
        }
    }
}
