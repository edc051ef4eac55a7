//! The experiment drivers. Each returns its in-memory outcome; [`execute`]
//! serializes outcomes to the configured output files.

use geomopt_core::analytics::{cone_ratio, jaccard, lasso_polish, lasso_sign_search, IndexSet};
use geomopt_core::constants::{
    constants_report, hoffman_enumerated, restricted_hoffman_support, ReportOptions, Restriction,
};
use geomopt_core::linalg::{format_vector, singular_values, sigma_min_plus, smoothness_constant};
use geomopt_core::problem::{PolyhedralSystem, Regularizer};
use geomopt_core::solver::{
    active_set, contraction_factors_from_gaps, reference_solve, run, SolverConfig,
    Termination, ACTIVE_TOL,
};
use geomopt_core::{Config, EnsembleKind, Error, Matrix, Problem, Report, Run};

use crate::config::{EtaPolicy, Experiment, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::output::{self, num, opt};
use crate::synth::{blobs, planted_lasso, trial_seed, Planted, PlantedSpec};

/// An optimum standing in for the unknown solution.
#[derive(Clone, Debug)]
pub struct Reference {
    pub x: Vec<f64>,
    pub f: f64,
    /// The run, with its final iterate replaced by the polished point when
    /// polishing succeeded.
    pub run: Run,
    pub polished: bool,
}

fn is_lasso(p: &Problem) -> bool {
    p.eta().is_some() && p.design().is_some()
}

fn replace_final(run: &mut Run, p: &Problem, x: Vec<f64>) -> CliResult<()> {
    let f = p.objective(&x)?;
    if let Some(last) = run.records.last_mut() {
        last.objective = f;
        last.active_set = active_set(&x, ACTIVE_TOL);
        last.x = Some(x.clone());
    }
    run.final_x = x;
    run.terminated_by = Termination::Tolerance;
    Ok(())
}

/// Long reference run; LASSO solutions are polished to the exact
/// sign-fixed optimum when the KKT conditions can be verified.
pub fn reference(p: &Problem, cfg: &Config, x0: &[f64]) -> CliResult<Reference> {
    let mut run = reference_solve(p, cfg, x0)?;
    let mut polished = false;
    if is_lasso(p) {
        if let Some(beta) = lasso_polish(p, &run.final_x)? {
            replace_final(&mut run, p, beta)?;
            polished = true;
        }
    }
    if !run.converged() {
        let last = run.records.last().map_or(f64::NAN, |r| r.gradmap_norm);
        return Err(CliError::Core(Error::NotOptimal(format!(
            "reference run stopped after {} iterations with gradient mapping norm {last:e}",
            run.records.len().saturating_sub(1)
        ))));
    }
    Ok(Reference {
        x: run.final_x.clone(),
        f: run.final_objective(),
        run,
        polished,
    })
}

/// Exact LASSO solution by sign search; falls back to ISTA in short bursts
/// with a polish attempt after each burst. Returns the solution and whether
/// it was certified by the optimality conditions.
pub fn exact_lasso(p: &Problem, cfg: &Config, x0: &[f64]) -> CliResult<(Vec<f64>, bool)> {
    if let Some(beta) = lasso_sign_search(p, x0, 20 * p.dim())? {
        return Ok((beta, true));
    }
    let burst = SolverConfig {
        step_policy: cfg.step_policy,
        max_iter: 100,
        gradmap_tol: 1e-12,
        record_every: usize::MAX,
    };
    let budget = cfg.max_iter.saturating_mul(10);
    let mut x = x0.to_vec();
    let mut used = 0;
    loop {
        let t = run(p, &burst, &x)?;
        x = t.final_x.clone();
        used += burst.max_iter;
        if let Some(beta) = lasso_polish(p, &x)? {
            return Ok((beta, true));
        }
        if t.converged() {
            return Ok((x, true));
        }
        if used >= budget {
            return Ok((x, false));
        }
    }
}

fn feasible_start(p: &Problem) -> CliResult<Vec<f64>> {
    let zero = vec![0.0; p.dim()];
    if p.reg.is_indicator() {
        Ok(p.prox(&zero, 1.0)?)
    } else {
        Ok(zero)
    }
}

fn planted_spec(cfg: &ExperimentConfig, d: usize, ensemble: EnsembleKind, seed: u64) -> PlantedSpec {
    PlantedSpec {
        n: cfg.n,
        d,
        s: cfg.s,
        ensemble,
        rho: cfg.rho,
        sigma: cfg.noise,
        eta_policy: cfg.eta_policy,
        normalized: cfg.normalized,
        seed,
    }
}

/// A problem loaded from the `[problem]` table, or a planted instance when
/// no data is given.
#[derive(Clone, Debug)]
pub struct Instance {
    pub problem: Problem,
    pub planted: Option<Planted>,
}

pub fn build_problem(cfg: &ExperimentConfig) -> CliResult<Instance> {
    let raw = &cfg.raw;
    let smooth = match raw.string("smooth_kind")? {
        Some(s) => s,
        None if raw.has("features") => "svm_dual".into(),
        None if raw.has("q") => "quadratic".into(),
        None if raw.has("matrix") => "least_squares".into(),
        None => "planted".into(),
    };
    let need_m = |key: &str| -> CliResult<Matrix> {
        raw.matrix(key)?
            .ok_or_else(|| CliError::bad(key, "required by this problem kind"))
    };
    let need_v = |key: &str| -> CliResult<Vec<f64>> {
        raw.vector(key)?
            .ok_or_else(|| CliError::bad(key, "required by this problem kind"))
    };
    let dim = match smooth.as_str() {
        "planted" => {
            let planted = planted_lasso(&planted_spec(cfg, cfg.dim(), cfg.ensembles[0], cfg.seed))?;
            return Ok(Instance {
                problem: planted.problem.clone(),
                planted: Some(planted),
            });
        }
        "svm_dual" => {
            let features = need_m("features")?;
            let labels = need_v("labels")?;
            let problem = Problem::svm_dual(&features, &labels, cfg.c_cap)?;
            return Ok(Instance {
                problem,
                planted: None,
            });
        }
        "least_squares" => need_m("matrix")?.cols(),
        "quadratic" => need_m("q")?.cols(),
        other => return Err(CliError::bad("smooth_kind", format!("unknown kind `{other}`"))),
    };
    let eta = match (raw.f64("eta")?, cfg.eta_policy) {
        (Some(e), _) => Some(e),
        (None, EtaPolicy::Fixed(e)) => Some(e),
        _ => None,
    };
    let reg_kind = match raw.string("reg_kind")? {
        Some(r) => r,
        None if eta.is_some() => "l1".into(),
        None if raw.has("eq_matrix") || raw.has("ineq_matrix") => "polyhedral".into(),
        None => "zero".into(),
    };
    let reg = match reg_kind.as_str() {
        "zero" => Regularizer::Zero,
        "l1" => Regularizer::l1(eta.ok_or_else(|| CliError::bad("eta", "required for reg_kind l1"))?)?,
        "polyhedral" => {
            let g = raw.matrix("eq_matrix")?.unwrap_or_else(|| Matrix::zeros(0, dim));
            let h = raw.vector("eq_rhs")?.unwrap_or_default();
            let m = raw.matrix("ineq_matrix")?.unwrap_or_else(|| Matrix::zeros(0, dim));
            let r = raw.vector("ineq_rhs")?.unwrap_or_default();
            Regularizer::PolyhedralIndicator(PolyhedralSystem::new(g, h, m, r)?)
        }
        "box_hyperplane" => Regularizer::box_hyperplane(need_v("labels")?, cfg.c_cap)?,
        other => return Err(CliError::bad("reg_kind", format!("unknown kind `{other}`"))),
    };
    let mut problem = if smooth == "least_squares" {
        Problem::least_squares(need_m("matrix")?, need_v("targets")?, cfg.normalized, reg)?
    } else {
        let linear = raw.vector("linear")?.unwrap_or_else(|| vec![0.0; dim]);
        Problem::quadratic(need_m("q")?, linear, reg)?
    };
    if let Some(alpha) = raw.f64("alpha")? {
        problem = problem.with_strong_convexity(alpha)?;
    }
    Ok(Instance {
        problem,
        planted: None,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub dim: usize,
    pub ensemble: EnsembleKind,
    pub trial: usize,
    pub h_support: f64,
    pub h_face: Option<f64>,
    pub sigma_min_support: f64,
    pub l_global: f64,
    pub l_support: f64,
    pub identified: bool,
    pub h_global: f64,
}

impl ScalingRow {
    fn to_record(&self) -> Vec<String> {
        vec![
            self.dim.to_string(),
            self.ensemble.name().to_string(),
            self.trial.to_string(),
            num(self.h_support),
            opt(self.h_face),
            num(self.sigma_min_support),
            num(self.l_global),
            num(self.l_support),
            self.identified.to_string(),
            num(self.h_global),
        ]
    }
}

/// Face system in the support coordinates:
/// `{z : A_S z = A_S β̂_S, −sign(β̂_i) z_i ≤ 0}`.
fn face_system(a_s: &Matrix, beta_s: &[f64]) -> CliResult<PolyhedralSystem<f64>> {
    let k = beta_s.len();
    let mut m = Matrix::zeros(k, k);
    for (i, b) in beta_s.iter().enumerate() {
        m.set(i, i, if *b < 0.0 { 1.0 } else { -1.0 });
    }
    Ok(PolyhedralSystem::new(a_s.clone(), a_s.mul_vec(beta_s), m, vec![0.0; k])?)
}

fn scaling_trial(
    cfg: &ExperimentConfig,
    dim: usize,
    ensemble: EnsembleKind,
    trial: usize,
) -> CliResult<ScalingRow> {
    let planted = planted_lasso(&planted_spec(cfg, dim, ensemble, trial_seed(cfg.seed, trial)))?;
    let p = &planted.problem;
    let (beta, certified) = exact_lasso(p, &cfg.solver, &vec![0.0; dim])?;
    let found = active_set(&beta, ACTIVE_TOL);
    let identified = certified && !found.is_empty();
    let support = if found.is_empty() { planted.support.clone() } else { found };
    let idx: Vec<usize> = support.iter().copied().collect();
    let a = p.design().expect("planted problems are least squares");
    let a_s = a.select_columns(&idx);
    let sv = singular_values(a)?;
    let scale = if cfg.normalized { cfg.n as f64 } else { 1.0 };
    let h_face = if cfg.n + idx.len() <= cfg.size_cap {
        let beta_s: Vec<f64> = idx.iter().map(|&i| beta[i]).collect();
        Some(hoffman_enumerated(&face_system(&a_s, &beta_s)?, cfg.size_cap)?.value)
    } else {
        None
    };
    Ok(ScalingRow {
        dim,
        ensemble,
        trial,
        h_support: restricted_hoffman_support(a, &support, cfg.normalized)?.value,
        h_face,
        sigma_min_support: sigma_min_plus(&a_s)?,
        l_global: sv[0] * sv[0] / scale,
        l_support: smoothness_constant(&a_s, cfg.normalized)?,
        identified,
        h_global: 1.0 / sigma_min_plus(a)?,
    })
}

/// Rows in `(dim, ensemble, trial)` order.
pub fn hoffman_scaling(cfg: &ExperimentConfig) -> CliResult<Vec<ScalingRow>> {
    let mut rows = Vec::new();
    for &dim in &cfg.dims {
        for &ensemble in &cfg.ensembles {
            for trial in 0..cfg.trials {
                rows.push(scaling_trial(cfg, dim, ensemble, trial)?);
            }
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub iter: usize,
    pub objective: f64,
    pub gap: Option<f64>,
    pub gradmap_norm: f64,
    pub active_size: usize,
    pub jaccard: f64,
    pub cone_ratio: Option<f64>,
    pub contraction: Option<f64>,
}

impl TrajectoryRow {
    fn to_record(&self) -> Vec<String> {
        vec![
            self.iter.to_string(),
            num(self.objective),
            opt(self.gap),
            num(self.gradmap_norm),
            self.active_size.to_string(),
            num(self.jaccard),
            opt(self.cone_ratio),
            opt(self.contraction),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryOutcome {
    pub instance: Instance,
    pub reference: Reference,
    pub support: IndexSet,
    pub run: Run,
    pub rows: Vec<TrajectoryRow>,
}

fn trajectory_rows(p: &Problem, run: &Run, reference: &Reference, support: &IndexSet) -> CliResult<Vec<TrajectoryRow>> {
    let gaps = run.gaps(p, &reference.x)?;
    let lasso = is_lasso(p);
    let mut rows = Vec::with_capacity(run.records.len());
    for (i, r) in run.records.iter().enumerate() {
        let contraction = match (i.checked_sub(1).and_then(|j| gaps[j]), gaps[i]) {
            (Some(prev), Some(cur)) => Some(contraction_factors_from_gaps(&[prev, cur])[0]),
            _ => None,
        };
        let cone = match (&r.x, lasso && !support.is_empty()) {
            (Some(x), true) => cone_ratio(x, &reference.x, support).ok(),
            _ => None,
        };
        rows.push(TrajectoryRow {
            iter: r.k,
            objective: r.objective,
            gap: gaps[i],
            gradmap_norm: r.gradmap_norm,
            active_size: r.active_set.len(),
            jaccard: jaccard(&r.active_set, support),
            cone_ratio: cone,
            contraction,
        });
    }
    Ok(rows)
}

fn instrumented(instance: Instance, cfg: &Config) -> CliResult<TrajectoryOutcome> {
    let p = &instance.problem;
    let x0 = feasible_start(p)?;
    let reference = reference(p, cfg, &x0)?;
    let support = active_set(&reference.x, ACTIVE_TOL);
    let run = run(p, cfg, &x0)?;
    let rows = trajectory_rows(p, &run, &reference, &support)?;
    Ok(TrajectoryOutcome {
        instance,
        reference,
        support,
        run,
        rows,
    })
}

/// Reference solve, then an instrumented run from the origin (projected
/// onto the domain for indicator regularizers).
pub fn trajectory(cfg: &ExperimentConfig) -> CliResult<TrajectoryOutcome> {
    instrumented(build_problem(cfg)?, &cfg.solver)
}

#[derive(Clone, Debug)]
pub struct SvmOutcome {
    pub features: Matrix,
    pub labels: Vec<f64>,
    pub trajectory: TrajectoryOutcome,
    pub global: Report,
    pub support_vectors: Report,
}

fn report_options(cfg: &ExperimentConfig) -> ReportOptions {
    ReportOptions {
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        size_cap: cfg.size_cap,
        ..ReportOptions::default()
    }
}

/// Dual SVM on the configured data (default: two seeded blobs).
pub fn svm(cfg: &ExperimentConfig) -> CliResult<SvmOutcome> {
    let (features, labels) = match (cfg.raw.matrix("features")?, cfg.raw.vector("labels")?) {
        (Some(f), Some(l)) => (f, l),
        (None, None) => blobs(cfg.n, cfg.seed)?,
        _ => return Err(CliError::Config("features and labels must be given together".into())),
    };
    let problem = Problem::svm_dual(&features, &labels, cfg.c_cap)?;
    let outcome = instrumented(
        Instance {
            problem,
            planted: None,
        },
        &cfg.solver,
    )?;
    let p = &outcome.instance.problem;
    let opts = report_options(cfg);
    let global = constants_report(p, &Restriction::Global, &outcome.reference.run, &opts)?;
    let sv = Restriction::SupportFace {
        support: outcome.support.clone(),
    };
    let support_vectors = constants_report(p, &sv, &outcome.reference.run, &opts)?;
    Ok(SvmOutcome {
        features,
        labels,
        trajectory: outcome,
        global,
        support_vectors,
    })
}

/// One report per configured restriction, anchored at the reference optimum.
pub fn constants(cfg: &ExperimentConfig) -> CliResult<(Instance, Reference, Vec<(String, Report)>)> {
    let instance = build_problem(cfg)?;
    let p = &instance.problem;
    let reference = reference(p, &cfg.solver, &feasible_start(p)?)?;
    let opts = report_options(cfg);
    let mut reports = Vec::new();
    for name in &cfg.restrictions {
        let restriction = match name.as_str() {
            "support" => Restriction::SupportFace {
                support: active_set(&reference.x, ACTIVE_TOL),
            },
            _ => Restriction::Global,
        };
        let r = constants_report(p, &restriction, &reference.run, &opts)?;
        reports.push((restriction.name().to_string(), r));
    }
    Ok((instance, reference, reports))
}

fn trajectory_csv(rows: &[TrajectoryRow], timestamp: bool) -> CliResult<Vec<u8>> {
    let records: Vec<Vec<String>> = rows.iter().map(TrajectoryRow::to_record).collect();
    output::render_csv(&output::TRAJECTORY_HEADER, &records, timestamp)
}

fn report_csv(reports: &[(String, Report)], timestamp: bool) -> CliResult<Vec<u8>> {
    let records: Vec<Vec<String>> = reports
        .iter()
        .map(|(name, r)| output::report_row(name, r))
        .collect();
    output::render_csv(&output::REPORT_HEADER, &records, timestamp)
}

/// Runs the configured experiment and writes its files. Returns the paths
/// written.
pub fn execute(cfg: &ExperimentConfig, timestamp: bool) -> CliResult<Vec<std::path::PathBuf>> {
    let out = &cfg.out;
    let mut written = vec![out.clone()];
    match cfg.experiment {
        Experiment::HoffmanScaling => {
            let rows = hoffman_scaling(cfg)?;
            let records: Vec<Vec<String>> = rows.iter().map(ScalingRow::to_record).collect();
            output::write_file(out, &output::render_csv(&output::SCALING_HEADER, &records, timestamp)?)?;
            if !rows.is_empty() && rows.iter().all(|r| !r.identified) {
                return Err(CliError::NotIdentified(rows.len()));
            }
        }
        Experiment::Trajectory => {
            let t = trajectory(cfg)?;
            output::write_file(out, &trajectory_csv(&t.rows, timestamp)?)?;
        }
        Experiment::Svm => {
            let s = svm(cfg)?;
            output::write_file(out, &trajectory_csv(&s.trajectory.rows, timestamp)?)?;
            let path = output::sibling(out, ".constants.csv");
            let reports = vec![
                ("global".to_string(), s.global),
                ("support_vectors".to_string(), s.support_vectors),
            ];
            output::write_file(&path, &report_csv(&reports, timestamp)?)?;
            written.push(path);
        }
        Experiment::Solve => {
            let t = trajectory(cfg)?;
            output::write_file(out, &trajectory_csv(&t.rows, timestamp)?)?;
            let path = output::sibling(out, ".solution");
            output::write_file(&path, format_vector(&t.run.final_x).as_bytes())?;
            written.push(path);
        }
        Experiment::Constants => {
            let (_, _, reports) = constants(cfg)?;
            output::write_file(out, &report_csv(&reports, timestamp)?)?;
        }
    }
    Ok(written)
}

