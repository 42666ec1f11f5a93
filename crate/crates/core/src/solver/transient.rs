//! Transient conduction by implicit backward Euler.
//!
//! Each step solves the SPD system (M/dt + K)·T_{n+1} = M/dt·T_n + b with
//! the same conjugate-gradient solver used for steady analysis, warm-started
//! from the previous step. Conductivities are refreshed from T_n before each
//! step (semi-implicit), so the stiffness reassembly is skipped entirely
//! when every material is temperature-independent.

use serde::Serialize;

use crate::error::SolveError;
use crate::hash::scenario_hash;
use crate::model::grid::Device;
use crate::model::scenario::{bind, ScenarioSpec, VoxelRole};
use crate::solver::cg;
use crate::solver::field::{probe_voxels, TemperatureField};
use crate::solver::steady::SolverOptions;
use crate::solver::system::{assemble_capacity, assemble_steady};

#[derive(Debug, Clone)]
pub struct TransientOptions {
    pub solver: SolverOptions,
    /// Simulated duration, seconds.
    pub t_end: f64,
    /// Fixed step size, seconds.
    pub dt: f64,
    /// Keep a full field snapshot every this many steps (0 = none).
    pub snapshot_every: usize,
}

/// Probe time series from a transient run.
#[derive(Debug, Clone, Serialize)]
pub struct TransientTrace {
    /// Strictly increasing sample times; the first is t = 0 and carries the
    /// initial condition.
    pub times: Vec<f64>,
    pub probe_names: Vec<String>,
    /// One series per probe, aligned with `probe_names`.
    pub series: Vec<Vec<f64>>,
    pub dt: f64,
    pub scheme: &'static str,
    pub scenario_hash: String,
    /// Completed without a mid-run solver failure.
    pub completed: bool,
    #[serde(skip)]
    pub snapshots: Vec<(f64, TemperatureField)>,
    #[serde(skip)]
    pub final_field: Option<TemperatureField>,
}

impl TransientTrace {
    pub fn series_for(&self, probe: &str) -> Option<&[f64]> {
        self.probe_names
            .iter()
            .position(|n| n == probe)
            .map(|i| self.series[i].as_slice())
    }
}

/// Runs a transient simulation from an initial field.
///
/// On a mid-run linear-solve failure the trace collected so far is returned
/// with `completed = false` alongside the error.
pub fn run_transient(
    device: &Device,
    scenario: &ScenarioSpec,
    initial: &TemperatureField,
    opts: &TransientOptions,
) -> Result<TransientTrace, (SolveError, Box<TransientTrace>)> {
    let wrap = |e: SolveError| {
        (
            e,
            Box::new(TransientTrace {
                times: vec![],
                probe_names: vec![],
                series: vec![],
                dt: opts.dt,
                scheme: "backward-euler",
                scenario_hash: String::new(),
                completed: false,
                snapshots: vec![],
                final_field: None,
            }),
        )
    };

    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(wrap(SolveError::BadTimeStep(opts.dt)));
    }
    let bound = bind(device, scenario).map_err(|e| wrap(e.into()))?;
    let n_voxels = bound.role.len();
    let steps = (opts.t_end / opts.dt).round().max(1.0) as usize;

    let mut field = initial.clone();
    assert_eq!(field.values.len(), n_voxels, "initial field does not match grid");
    for i in 0..n_voxels {
        if let VoxelRole::Fixed(t) = bound.role[i] {
            field.values[i] = t;
        }
    }

    let hash = scenario_hash(device, scenario);
    let mut trace = TransientTrace {
        times: Vec::with_capacity(steps + 1),
        probe_names: bound.probes.iter().map(|p| p.name.clone()).collect(),
        series: vec![Vec::with_capacity(steps + 1); bound.probes.len()],
        dt: opts.dt,
        scheme: "backward-euler",
        scenario_hash: hash,
        completed: false,
        snapshots: Vec::new(),
        final_field: None,
    };

    let record = |trace: &mut TransientTrace, t: f64, field: &TemperatureField| {
        trace.times.push(t);
        for (pi, p) in bound.probes.iter().enumerate() {
            trace.series[pi].push(probe_voxels(field, &p.voxels, p.statistic));
        }
    };
    record(&mut trace, 0.0, &field);

    let temperature_dependent = (0..n_voxels).any(|i| {
        bound.role[i] != VoxelRole::Excluded
            && !device.materials.get(bound.material[i]).conductivity.is_constant()
    });

    // Assemble once; reassembled per step only when k depends on T.
    let mut system = match assemble_steady(device, &bound, &field) {
        Ok(s) => s,
        Err(e) => return Err((e, Box::new(trace))),
    };
    let capacity = assemble_capacity(device, &bound, &system);
    let n = system.matrix.n;

    // Cache the diagonal slots so M/dt can be re-applied after reassembly.
    let diag_slots: Vec<usize> = (0..n)
        .map(|row| {
            (system.matrix.row_ptr[row]..system.matrix.row_ptr[row + 1])
                .find(|&k| system.matrix.col_idx[k] == row)
                .expect("diagonal present")
        })
        .collect();

    let m_over_dt: Vec<f64> = capacity.iter().map(|c| c / opts.dt).collect();
    for row in 0..n {
        system.matrix.values[diag_slots[row]] += m_over_dt[row];
    }

    // Unknowns are rises above ambient, matching the assembled RHS.
    let reference = system.reference_temperature;
    let mut unknowns: Vec<f64> = system
        .voxel_of_unknown
        .iter()
        .map(|&i| field.values[i] - reference)
        .collect();
    let mut rhs = vec![0.0; n];
    let mut last_cg = cg::CgReport::default();

    for step in 1..=steps {
        if temperature_dependent && step > 1 {
            system = match assemble_steady(device, &bound, &field) {
                Ok(s) => s,
                Err(e) => return Err((e, Box::new(trace))),
            };
            for row in 0..n {
                system.matrix.values[diag_slots[row]] += m_over_dt[row];
            }
        }

        for row in 0..n {
            rhs[row] = system.rhs[row] + m_over_dt[row] * unknowns[row];
        }

        match cg::solve(&system.matrix, &rhs, &mut unknowns, &opts.solver.cg) {
            Ok(report) => last_cg = report,
            Err(e) => {
                // Truncated trace: everything recorded so far stays valid.
                return Err((e, Box::new(trace)));
            }
        }

        for (u, &i) in system.voxel_of_unknown.iter().enumerate() {
            field.values[i] = reference + unknowns[u];
        }
        let t = step as f64 * opts.dt;
        record(&mut trace, t, &field);

        if opts.snapshot_every > 0 && step % opts.snapshot_every == 0 {
            trace.snapshots.push((t, field.clone()));
        }
    }

    field.metadata.scenario_hash = trace.scenario_hash.clone();
    field.metadata.cg_iterations = last_cg.iterations;
    field.metadata.cg_residual = last_cg.residual;
    trace.completed = true;
    trace.final_field = Some(field);
    Ok(trace)
}
