use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{point, ExperimentConfig, OracleSpec};
use super::trace::to_csv_bytes;
use crate::battery::{corrupted_combine, exact_combine, geometry_battery, GeometryReport};
use crate::engine::{run, ConditionReport, IterationTrace, KasaharaReport, MonitorReport, StopReason};
use crate::error::{Error, Result};
use crate::geom::{ModelSpace, SpacePoint};
use crate::mapping::{cosine_ratio_log, quasinonexpansive_on_points, Mapping};
use crate::prox::{grid, project_cap, project_convex_solution, Cap, ConvexSet, PointSet};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HALPERN_OUT_DIR";
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
pub const GAMMA_CONVENTION: &str =
    "gamma_n = 1 - sin((1 - beta_n) D) / sin(D), D = d(u, W_n x_n); gamma_n = beta_n when D <= 1e-14";

/// Process exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Success,
    /// Ran to `max_iters` without meeting the stop rule.
    NotConverged,
    Failure,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Failure => 1,
            ExitStatus::NotConverged => 2,
        }
    }
}

/// Tolerance for deciding that two declared fixed points coincide.
const SAME_POINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    /// Supplied in the config.
    Given,
    /// Every point is fixed, so `P_F u = u`.
    WholeSpace,
    /// Nearest of finitely many declared fixed points.
    Finite,
    /// Closed-form projection onto a single cap or interval.
    Analytic,
    GridRefine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub point: Vec<f64>,
    /// `d(u, P_F u)`.
    pub distance: f64,
    pub method: OracleMethod,
    pub grid_resolution: usize,
    pub resolution: f64,
    pub refine_tolerance: f64,
    /// Best grid value minus refined value.
    pub certified_gap: f64,
    pub evaluations: usize,
}

/// The common declared fixed set of a family, reduced to something the
/// projection machinery handles.
#[derive(Debug, Clone, PartialEq)]
pub enum FixedSet {
    Whole,
    Finite(Vec<SpacePoint>),
    Convex(ConvexSet),
}

fn collect_atoms(ps: &PointSet, lists: &mut Vec<Vec<SpacePoint>>, sets: &mut Vec<ConvexSet>) {
    match ps {
        PointSet::Whole => {}
        PointSet::Points(v) => lists.push(v.clone()),
        PointSet::Set(s) => sets.push(s.clone()),
        PointSet::Common(parts) => parts.iter().for_each(|p| collect_atoms(p, lists, sets)),
    }
}

/// Drops caps that contain another cap of the list.
fn drop_redundant_caps(space: &ModelSpace, caps: Vec<Cap>) -> Vec<Cap> {
    let contains =
        |big: &Cap, small: &Cap| space.dist_unchecked(&big.center, &small.center) + small.radius <= big.radius;
    let mut keep: Vec<Cap> = Vec::new();
    for (i, c) in caps.iter().enumerate() {
        let redundant = caps
            .iter()
            .enumerate()
            .any(|(j, other)| j != i && contains(c, other) && (!contains(other, c) || j < i));
        if !redundant {
            keep.push(c.clone());
        }
    }
    keep
}

/// Intersects the declared fixed sets of `mappings`. Cap intersections need
/// a common point: the given witness, a witness or center of a listed set,
/// or a point of a global lattice.
pub fn declared_fixed_set(space: &ModelSpace, mappings: &[Mapping], witness: Option<&SpacePoint>) -> Result<FixedSet> {
    let mut lists = Vec::new();
    let mut sets = Vec::new();
    for m in mappings {
        let f = m
            .fixed_set()
            .ok_or_else(|| Error::InvalidArgument(format!("mapping {} has no declared fixed set", m.label())))?;
        collect_atoms(f, &mut lists, &mut sets);
    }
    if let Some((first, rest)) = lists.split_first() {
        let pts: Vec<SpacePoint> = first
            .iter()
            .filter(|p| {
                rest.iter()
                    .all(|l| l.iter().any(|q| space.dist_unchecked(p, q) <= SAME_POINT_TOL))
                    && sets.iter().all(|s| s.contains_within(space, p, SAME_POINT_TOL))
            })
            .cloned()
            .collect();
        if pts.is_empty() {
            return Err(Error::Solver("empty declared intersection: no witness".into()));
        }
        return Ok(FixedSet::Finite(pts));
    }
    if sets.is_empty() {
        return Ok(FixedSet::Whole);
    }
    let mut interval: Option<(f64, f64)> = None;
    let mut caps = Vec::new();
    let mut hints: Vec<SpacePoint> = witness.into_iter().cloned().collect();
    for s in &sets {
        match s {
            ConvexSet::Interval { lo, hi } => {
                let (l, h) = interval.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
                interval = Some((l.max(*lo), h.min(*hi)));
            }
            ConvexSet::Cap(c) => caps.push(c.clone()),
            ConvexSet::Intersection { caps: cs, witness } => {
                caps.extend(cs.iter().cloned());
                hints.push(witness.clone());
            }
        }
    }
    if let Some((lo, hi)) = interval {
        if lo > hi {
            return Err(Error::Solver("empty declared intersection: no witness".into()));
        }
        return Ok(FixedSet::Convex(ConvexSet::interval(space, lo, hi)?));
    }
    let caps = drop_redundant_caps(space, caps);
    if caps.len() == 1 {
        return Ok(FixedSet::Convex(ConvexSet::Cap(caps[0].clone())));
    }
    hints.extend(caps.iter().map(|c| c.center.clone()));
    let found = hints
        .into_iter()
        .chain(grid(space, 20_000, None))
        .find(|w| caps.iter().all(|c| space.dist_unchecked(&c.center, w) <= c.radius));
    match found {
        Some(w) => Ok(FixedSet::Convex(ConvexSet::intersection(space, caps, w)?)),
        None => Err(Error::Solver("empty declared intersection: no witness".into())),
    }
}

/// `P_F u` for the common declared fixed set `F` of `mappings`.
pub fn compute_oracle(
    space: &ModelSpace,
    mappings: &[Mapping],
    u: &SpacePoint,
    spec: &OracleSpec,
) -> Result<OracleReport> {
    let settings = spec.solver_settings();
    settings.validate()?;
    let witness = spec.witness.as_ref().map(|w| point(space, w)).transpose()?;
    let exact = |p: SpacePoint, method: OracleMethod| OracleReport {
        distance: space.dist_unchecked(u, &p),
        point: p.into_coords(),
        method,
        grid_resolution: 0,
        resolution: 0.0,
        refine_tolerance: 0.0,
        certified_gap: 0.0,
        evaluations: 0,
    };
    match declared_fixed_set(space, mappings, witness.as_ref())? {
        FixedSet::Whole => Ok(exact(u.clone(), OracleMethod::WholeSpace)),
        FixedSet::Finite(pts) => {
            let best = pts
                .into_iter()
                .min_by(|a, b| space.dist_unchecked(u, a).total_cmp(&space.dist_unchecked(u, b)))
                .expect("nonempty");
            Ok(exact(best, OracleMethod::Finite))
        }
        FixedSet::Convex(ConvexSet::Cap(c)) => Ok(exact(project_cap(space, &c, u)?, OracleMethod::Analytic)),
        FixedSet::Convex(ConvexSet::Interval { lo, hi }) => Ok(exact(
            SpacePoint::scalar(u.coords()[0].clamp(lo, hi)),
            OracleMethod::Analytic,
        )),
        FixedSet::Convex(set) => {
            let sol = project_convex_solution(space, &set, u, &settings)?;
            Ok(OracleReport {
                distance: sol.value,
                certified_gap: sol.gap(),
                evaluations: sol.evaluations,
                point: sol.point.into_coords(),
                method: OracleMethod::GridRefine,
                grid_resolution: settings.coarse_grid_resolution,
                resolution: spec.resolution,
                refine_tolerance: settings.refine_tolerance,
            })
        }
    }
}

fn oracle_for_config(
    cfg: &ExperimentConfig,
    space: &ModelSpace,
    mappings: &[Mapping],
    u: &SpacePoint,
) -> Result<Option<OracleReport>> {
    let Some(spec) = &cfg.oracle else {
        return Ok(None);
    };
    if let Some(t) = &spec.target {
        let p = point(space, t).map_err(|e| Error::Config(format!("oracle.target: {e}")))?;
        return Ok(Some(OracleReport {
            distance: space.dist_unchecked(u, &p),
            point: p.into_coords(),
            method: OracleMethod::Given,
            grid_resolution: 0,
            resolution: 0.0,
            refine_tolerance: 0.0,
            certified_gap: 0.0,
            evaluations: 0,
        }));
    }
    compute_oracle(space, mappings, u, spec).map(Some)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub tool_version: String,
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub final_point: Option<Vec<f64>>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub stop_reason: Option<StopReason>,
    pub final_d_oracle: Option<f64>,
    pub oracle: Option<OracleReport>,
    pub conditions: Option<ConditionReport>,
    pub max_lyapunov_violation: Option<f64>,
    pub monitor: Option<MonitorReport>,
    pub kasahara: Option<KasaharaReport>,
    pub stride: Option<usize>,
    pub trace_rows: Option<usize>,
    pub gamma_convention: String,
    /// One line; set exactly when the command failed.
    pub error: Option<String>,
}

impl RunSummary {
    fn failed(config_hash: Option<String>, err: &Error) -> Self {
        RunSummary {
            tool_version: TOOL_VERSION.into(),
            config_hash,
            seed: None,
            final_point: None,
            iterations: None,
            converged: None,
            stop_reason: None,
            final_d_oracle: None,
            oracle: None,
            conditions: None,
            max_lyapunov_violation: None,
            monitor: None,
            kasahara: None,
            stride: None,
            trace_rows: None,
            gamma_convention: GAMMA_CONVENTION.into(),
            error: Some(one_line(&err.to_string())),
        }
    }

    pub fn status(&self) -> ExitStatus {
        match (&self.error, self.converged) {
            (Some(_), _) | (None, None) => ExitStatus::Failure,
            (None, Some(true)) => ExitStatus::Success,
            (None, Some(false)) => ExitStatus::NotConverged,
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs a parsed config in memory. `stride` overrides the config's.
pub fn run_config(
    cfg: &ExperimentConfig,
    config_hash: &str,
    stride: Option<usize>,
) -> Result<(IterationTrace, RunSummary)> {
    let built = cfg.build()?;
    let oracle = oracle_for_config(cfg, &built.space, &built.mappings, &built.u)?;
    let target = oracle.as_ref().map(|o| SpacePoint::from_coords(o.point.clone()));
    let stride = stride.unwrap_or(cfg.stride);
    let problem = built.problem(target, cfg.max_iters, cfg.stop_tolerance, stride);
    let (trace, report) = run(&problem)?;
    let summary = RunSummary {
        tool_version: TOOL_VERSION.into(),
        config_hash: Some(config_hash.into()),
        seed: Some(cfg.seed),
        final_point: Some(report.final_point.coords().to_vec()),
        iterations: Some(report.iterations),
        converged: Some(report.converged()),
        stop_reason: Some(report.stop_reason),
        final_d_oracle: report.final_d_oracle,
        oracle,
        max_lyapunov_violation: report.monitor.as_ref().map(|m| m.max_lyapunov_violation),
        conditions: Some(report.conditions),
        monitor: report.monitor,
        kasahara: Some(report.kasahara),
        stride: Some(stride),
        trace_rows: Some(trace.rows.len()),
        gamma_convention: GAMMA_CONVENTION.into(),
        error: None,
    };
    Ok((trace, summary))
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub stride: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: PathBuf,
    pub status: ExitStatus,
    pub summary: RunSummary,
    pub trace_path: Option<PathBuf>,
    /// `None` when even the summary could not be written.
    pub summary_path: Option<PathBuf>,
}

fn stem(config: &Path) -> String {
    config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into())
}

/// Writes through a temporary sibling and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn to_json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

/// `run <config>`: writes `<stem>.trace.csv` and `<stem>.summary.json` (or
/// the names set in the config) into the output directory. Failures are
/// recorded in the summary's `error` field.
pub fn cmd_run(config: &Path, opts: &RunOptions) -> RunOutcome {
    let stem = stem(config);
    let mut summary_name = format!("{stem}.summary.json");
    let mut trace_name = format!("{stem}.trace.csv");
    let mut hash = None;
    let result = (|| {
        let bytes = fs::read(config).map_err(|e| Error::Io(format!("{}: {e}", config.display())))?;
        hash = Some(config_hash(&bytes));
        let text = String::from_utf8(bytes).map_err(|_| Error::Config("config is not UTF-8".into()))?;
        let cfg = ExperimentConfig::from_json(&text)?;
        if let Some(n) = &cfg.output.summary {
            summary_name = n.clone();
        }
        if let Some(n) = &cfg.output.trace {
            trace_name = n.clone();
        }
        run_config(&cfg, hash.as_deref().unwrap_or_default(), opts.stride)
    })();
    let summary_path = opts.out_dir.join(&summary_name);
    let (summary, trace_path) = match result {
        Ok((trace, summary)) => {
            let trace_path = opts.out_dir.join(&trace_name);
            match to_csv_bytes(&trace).and_then(|b| write_atomic(&trace_path, &b)) {
                Ok(()) => (summary, Some(trace_path)),
                Err(e) => (RunSummary::failed(hash.clone(), &e), None),
            }
        }
        Err(e) => (RunSummary::failed(hash.clone(), &e), None),
    };
    let (summary, summary_path) = match write_atomic(&summary_path, &to_json_bytes(&summary)) {
        Ok(()) => (summary, Some(summary_path)),
        Err(e) => {
            let mut s = summary;
            if s.error.is_none() {
                s.error = Some(one_line(&e.to_string()));
            }
            (s, None)
        }
    };
    RunOutcome {
        config: config.to_path_buf(),
        status: summary.status(),
        summary,
        trace_path,
        summary_path,
    }
}

/// Runs several configs on separate threads; outcomes keep the input order.
pub fn cmd_run_many(configs: &[PathBuf], opts: &RunOptions) -> Vec<RunOutcome> {
    if configs.len() <= 1 {
        return configs.iter().map(|c| cmd_run(c, opts)).collect();
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || cmd_run(c, opts))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("run thread panicked"))
            .collect()
    })
}

/// `oracle <config>`: computes `P_F u` over the declared fixed sets (a
/// `target` in the config is ignored) and writes `<stem>.oracle.json`.
pub fn cmd_oracle(config: &Path, resolution: Option<f64>, out_dir: &Path) -> Result<(OracleReport, PathBuf)> {
    let text = fs::read_to_string(config).map_err(|e| Error::Io(format!("{}: {e}", config.display())))?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let built = cfg.build()?;
    let mut spec = cfg.oracle.clone().unwrap_or_default();
    if let Some(r) = resolution {
        spec.resolution = r;
    }
    let report = compute_oracle(&built.space, &built.mappings, &built.u, &spec)?;
    let name = cfg
        .output
        .oracle
        .clone()
        .unwrap_or_else(|| format!("{}.oracle.json", stem(config)));
    let path = out_dir.join(name);
    write_atomic(&path, &to_json_bytes(&report))?;
    Ok((report, path))
}

/// `check-geometry`: the randomized geometry batteries on `S^2`.
pub fn cmd_check_geometry(count: usize, seed: u64, corrupt: bool) -> Result<(GeometryReport, ExitStatus)> {
    let report = if corrupt {
        geometry_battery(count, seed, &corrupted_combine, true)?
    } else {
        geometry_battery(count, seed, &exact_combine, false)?
    };
    let status = if report.pass {
        ExitStatus::Success
    } else {
        ExitStatus::Failure
    };
    Ok((report, status))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example44Report {
    pub segment: [f64; 2],
    pub mapping: String,
    pub fixed_point: f64,
    pub grid_points: usize,
    /// Grid points with `|T x - 0| > |x - 0|`.
    pub qne_violations: usize,
    pub max_qne_excess: f64,
    /// `x_n = 0.5` for every `n`.
    pub witness_sequence_value: f64,
    pub ratio_log: Vec<f64>,
    pub residual_log: Vec<f64>,
    pub ratio_identically_one: bool,
    pub residual_identically_one: bool,
    /// The ratio tends to 1 while the residual does not tend to 0.
    pub not_strongly_quasinonexpansive: bool,
    pub pass: bool,
}

pub const EXAMPLE44_GRID: usize = 10_000;

/// `example44`: `T x = -x` on `[-0.7, 0.7]` is quasinonexpansive with
/// `F(T) = {0}`, but the constant sequence `x_n = 0.5` keeps the cosine
/// ratio at 1 while `d(T x_n, x_n) = 1`.
pub fn cmd_example44() -> Result<Example44Report> {
    let (lo, hi) = (-0.7, 0.7);
    let space = ModelSpace::segment(lo, hi)?;
    let t = Mapping::segment_negation(&space)?;
    let zero = SpacePoint::scalar(0.0);
    let pts: Vec<SpacePoint> = (0..EXAMPLE44_GRID)
        .map(|i| SpacePoint::scalar(lo + (hi - lo) * i as f64 / (EXAMPLE44_GRID - 1) as f64))
        .collect();
    let qne = quasinonexpansive_on_points(&space, &t, std::slice::from_ref(&zero), &pts)?;
    let mut violations = 0;
    for x in &pts {
        if space.dist(&t.apply(x)?, &zero)? > space.dist(x, &zero)? {
            violations += 1;
        }
    }
    let seq = vec![SpacePoint::scalar(0.5); 20];
    let log = cosine_ratio_log(&space, &t, &seq, &zero)?;
    let ratio_log: Vec<f64> = log.iter().map(|&(r, _)| r).collect();
    let residual_log: Vec<f64> = log.iter().map(|&(_, d)| d).collect();
    let ratio_one = ratio_log.iter().all(|&r| r == 1.0);
    let residual_one = residual_log.iter().all(|&d| d == 1.0);
    let fixed_residual = space.dist(&t.apply(&zero)?, &zero)?;
    let pass = violations == 0 && qne.pass && fixed_residual == 0.0 && ratio_one && residual_one;
    Ok(Example44Report {
        segment: [lo, hi],
        mapping: t.label().into(),
        fixed_point: 0.0,
        grid_points: pts.len(),
        qne_violations: violations,
        max_qne_excess: qne.max_violation,
        witness_sequence_value: 0.5,
        ratio_log,
        residual_log,
        ratio_identically_one: ratio_one,
        residual_identically_one: residual_one,
        not_strongly_quasinonexpansive: ratio_one && residual_one,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2() -> ModelSpace {
        ModelSpace::sphere(2).unwrap()
    }

    fn cap_map(s: &ModelSpace, dir: Vec<f64>, r: f64) -> Mapping {
        Mapping::cap_projection(s, Cap::new(s, s.point_from_direction(dir).unwrap(), r).unwrap())
    }

    #[test]
    fn oracle_single_cap_is_analytic() {
        let s = s2();
        let maps = vec![cap_map(&s, vec![0.0, 0.0, 1.0], 0.4)];
        let u = s.point_from_direction(vec![1.0, 0.0, 1.0]).unwrap();
        let rep = compute_oracle(&s, &maps, &u, &OracleSpec::default()).unwrap();
        assert_eq!(rep.method, OracleMethod::Analytic);
        assert!((rep.distance - (std::f64::consts::FRAC_PI_4 - 0.4)).abs() < 1e-12);
    }

    #[test]
    fn oracle_nested_caps_use_smaller() {
        let s = s2();
        let maps = vec![
            cap_map(&s, vec![0.0, 0.0, 1.0], 0.6),
            cap_map(&s, vec![0.1, 0.0, 1.0], 0.3),
        ];
        let u = s.point_from_direction(vec![-1.0, 0.3, 1.0]).unwrap();
        let rep = compute_oracle(&s, &maps, &u, &OracleSpec::default()).unwrap();
        assert_eq!(rep.method, OracleMethod::Analytic);
        let small = Cap::new(&s, s.point_from_direction(vec![0.1, 0.0, 1.0]).unwrap(), 0.3).unwrap();
        assert_eq!(rep.point, project_cap(&s, &small, &u).unwrap().into_coords());
    }

    #[test]
    fn oracle_point_inside_intersection() {
        let s = s2();
        let maps = vec![
            cap_map(&s, vec![0.2, 0.0, 1.0], 0.5),
            cap_map(&s, vec![-0.2, 0.0, 1.0], 0.5),
        ];
        let u = SpacePoint::axis(3, 2);
        let rep = compute_oracle(&s, &maps, &u, &OracleSpec::default()).unwrap();
        assert_eq!(rep.distance, 0.0);
        assert_eq!(rep.point, u.coords());
    }

    #[test]
    fn oracle_intersection_matches_boundary() {
        let s = s2();
        let maps = vec![
            cap_map(&s, vec![0.2, 0.0, 1.0], 0.5),
            cap_map(&s, vec![-0.2, 0.0, 1.0], 0.5),
        ];
        let u = s.point_from_direction(vec![0.9, 0.1, 1.0]).unwrap();
        let rep = compute_oracle(&s, &maps, &u, &OracleSpec::default()).unwrap();
        assert_eq!(rep.method, OracleMethod::GridRefine);
        // u lies beyond the second cap only; the answer is its projection
        let second = Cap::new(&s, s.point_from_direction(vec![-0.2, 0.0, 1.0]).unwrap(), 0.5).unwrap();
        let p = project_cap(&s, &second, &u).unwrap();
        let got = SpacePoint::from_coords(rep.point.clone());
        assert!(s.dist(&got, &p).unwrap() < 1e-6, "{rep:?}");
        assert!(rep.certified_gap <= 1e-5 && rep.certified_gap >= 0.0);
    }

    #[test]
    fn oracle_disjoint_caps_fail() {
        let s = s2();
        let maps = vec![
            cap_map(&s, vec![1.0, 0.0, 0.0], 0.3),
            cap_map(&s, vec![-1.0, 0.0, 0.0], 0.3),
        ];
        let err = compute_oracle(&s, &maps, &SpacePoint::axis(3, 2), &OracleSpec::default()).unwrap_err();
        assert!(err.to_string().contains("no witness"));
    }

    #[test]
    fn oracle_finite_and_whole() {
        let seg = ModelSpace::segment(-0.7, 0.7).unwrap();
        let maps = vec![Mapping::segment_negation(&seg).unwrap()];
        let rep = compute_oracle(&seg, &maps, &SpacePoint::scalar(0.5), &OracleSpec::default()).unwrap();
        assert_eq!(rep.method, OracleMethod::Finite);
        assert_eq!(rep.point, vec![0.0]);
        let rep = compute_oracle(
            &s2(),
            &[Mapping::identity()],
            &SpacePoint::axis(3, 1),
            &OracleSpec::default(),
        )
        .unwrap();
        assert_eq!(rep.method, OracleMethod::WholeSpace);
    }

    #[test]
    fn example44_facts() {
        let rep = cmd_example44().unwrap();
        assert!(rep.pass);
        assert_eq!(rep.qne_violations, 0);
        assert_eq!(rep.grid_points, 10_000);
        assert!(rep.ratio_log.iter().all(|&r| r == 1.0));
    }

    #[test]
    fn check_geometry_status() {
        assert_eq!(cmd_check_geometry(0, 1, false).unwrap().1, ExitStatus::Success);
        assert_eq!(cmd_check_geometry(300, 1, false).unwrap().1, ExitStatus::Success);
        assert_eq!(cmd_check_geometry(300, 1, true).unwrap().1, ExitStatus::Failure);
    }

    #[test]
    fn exit_ordering() {
        assert!(ExitStatus::Failure > ExitStatus::NotConverged);
        assert!(ExitStatus::NotConverged > ExitStatus::Success);
        assert_eq!(ExitStatus::NotConverged.code(), 2);
    }

    #[test]
    fn one_line_errors() {
        assert_eq!(one_line("a\n  b\tc"), "a b c");
    }
}
