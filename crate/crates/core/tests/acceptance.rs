use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use halpern_core::battery::{comparison_battery, convexity_battery, exact_combine, sin_inequality_sweep};
use halpern_core::engine::{FEJER_TOL, GAMMA_TOL, LYAPUNOV_TOL};
use halpern_core::experiment::commands::EXAMPLE44_GRID;
use halpern_core::experiment::config::MappingSpec;
use halpern_core::experiment::{
    cmd_example44, cmd_oracle, cmd_run, config_hash, run_config, ExperimentConfig, OracleMethod, RunOptions, RunSummary,
};
use halpern_core::geom::sin_inequality_holds;
use halpern_core::mapping::{apply_w, residuals, Mapping};
use halpern_core::prox::{
    project_cap, resolvent_logcos, resolvent_tansin, Cap, ConvexFunction, ConvexSet, SolverSettings,
};
use halpern_core::sampling::{rng, uniform_in_cap};
use halpern_core::{ModelSpace, SpacePoint};

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(&std::fs::read_to_string(config_path(name)).unwrap()).unwrap()
}

fn run(name: &str) -> (RunSummary, Duration) {
    let text = std::fs::read_to_string(config_path(name)).unwrap();
    let cfg = ExperimentConfig::from_json(&text).unwrap();
    let start = Instant::now();
    let (_, summary) = run_config(&cfg, &config_hash(text.as_bytes()), None).unwrap();
    (summary, start.elapsed())
}

struct Ledger {
    failed: Vec<u32>,
}

impl Ledger {
    fn record(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        println!(
            "criterion {id:>2} {} {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            self.failed.push(id);
        }
    }
}

fn north() -> SpacePoint {
    SpacePoint::from_coords(vec![0.0, 0.0, 1.0])
}

fn geometry_battery(l: &mut Ledger) {
    let space = ModelSpace::sphere(2).unwrap();
    let mut g = rng(1);
    let start = Instant::now();
    let comp = comparison_battery(&space, &mut g, 10_000, &exact_combine).unwrap();
    let conv = convexity_battery(&space, &mut g, 10_000, &exact_combine).unwrap();
    let t = start.elapsed();
    let pass = comp.samples == 10_000
        && comp.worst <= 1e-9
        && conv.samples == 10_000
        && conv.worst >= -1e-12
        && t < Duration::from_secs(1);
    l.record(
        1,
        "geometry battery",
        pass,
        format!(
            "max |comparison| = {:e}, min convexity = {:e}, {t:?}",
            comp.worst, conv.worst
        ),
    );
}

fn sine_sweep(l: &mut Ledger) {
    let start = Instant::now();
    let sweep = sin_inequality_sweep(10_000).unwrap();
    let mut holds = 0;
    for k in 1..=9 {
        let alpha = k as f64 / 10.0;
        for i in 1..=10_000 {
            let delta = 1e-4 + (std::f64::consts::FRAC_PI_2 - 1e-4) * i as f64 / 10_000.0;
            if sin_inequality_holds(delta, alpha).unwrap() {
                holds += 1;
            }
        }
    }
    let t = start.elapsed();
    let pass = sweep.pass && holds == 0 && t < Duration::from_secs(1);
    l.record(
        2,
        "sine inequality sweep",
        pass,
        format!(
            "holds at {holds} of {} points, min gap = {:e}, {t:?}",
            sweep.samples, sweep.worst
        ),
    );
}

fn three_caps() -> (ModelSpace, Vec<Mapping>, Vec<Cap>) {
    let cfg = load("three_caps.json");
    let built = cfg.build().unwrap();
    let caps = cfg
        .mappings
        .iter()
        .map(|m| match m {
            MappingSpec::CapProjection { center, radius } => Cap::new(
                &built.space,
                built.space.point_from_direction(center.clone()).unwrap(),
                *radius,
            )
            .unwrap(),
            other => panic!("expected a cap projection, got {other:?}"),
        })
        .collect();
    (built.space, built.mappings, caps)
}

fn w_mapping_fixed_points(l: &mut Ledger) {
    let (space, maps, caps) = three_caps();
    let alphas = [0.5; 3];
    let start = Instant::now();
    let mut g = rng(3);
    let mut worst_fixed = 0.0f64;
    let mut sampled = 0;
    while sampled < 100 {
        let z = uniform_in_cap(&space, &north(), 0.5, &mut g);
        if !caps.iter().all(|c| space.dist(&c.center, &z).unwrap() <= c.radius) {
            continue;
        }
        let wz = apply_w(&space, &maps, &alphas, &z).unwrap();
        worst_fixed = worst_fixed.max(space.dist(&wz, &z).unwrap());
        sampled += 1;
    }
    let mut worst_res = 0.0f64;
    for _ in 0..10 {
        let mut z = uniform_in_cap(&space, &north(), 1.2, &mut g);
        for _ in 0..100_000 {
            let next = apply_w(&space, &maps, &alphas, &z).unwrap();
            let step = space.dist(&next, &z).unwrap();
            z = next;
            if step <= 1e-15 {
                break;
            }
        }
        let res = residuals(&space, &maps, &z).unwrap();
        worst_res = worst_res.max(res.into_iter().fold(0.0, f64::max));
    }
    let t = start.elapsed();
    let pass = worst_fixed <= 1e-11 && worst_res <= 1e-6 && t < Duration::from_secs(5);
    l.record(
        3,
        "W fixes the common fixed points",
        pass,
        format!("max d(Wz, z) = {worst_fixed:e}, max Picard residual = {worst_res:e}, {t:?}"),
    );
}

fn desk_run(l: &mut Ledger) -> RunSummary {
    let cfg = load("three_caps.json");
    let built = cfg.build().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (oracle, _) = cmd_oracle(&config_path("three_caps.json"), None, dir.path()).unwrap();
    let pf = SpacePoint::from_coords(oracle.point.clone());
    let s = &built.space;
    let placement = [&built.u, &built.x1]
        .iter()
        .all(|p| s.dist(p, &pf).unwrap() <= 0.7 && s.dist(p, &north()).unwrap() <= 0.7);
    let (summary, t) = run("three_caps.json");
    let d = summary.final_d_oracle.unwrap_or(f64::INFINITY);
    let n = summary.iterations.unwrap();
    let same_target = summary
        .oracle
        .as_ref()
        .map(|o| o.point == oracle.point)
        .unwrap_or(false);
    let pass = placement
        && cfg.mappings.len() == 3
        && oracle.certified_gap <= 1e-5
        && same_target
        && d <= 5e-3
        && n <= 200_000
        && summary.conditions.as_ref().unwrap().c
        && t < Duration::from_secs(10);
    l.record(
        4,
        "three-cap Halpern run",
        pass,
        format!(
            "d(x_N, P_F u) = {d:e} at N = {n}, oracle {:?} gap {:e}, {t:?}",
            oracle.method, oracle.certified_gap
        ),
    );
    summary
}

fn lyapunov(l: &mut Ledger, s: &RunSummary) {
    let m = s.monitor.as_ref().unwrap();
    let n = s.iterations.unwrap();
    let pass = m.steps_checked == n
        && m.undefined_steps == 0
        && m.min_lyapunov_slack >= -LYAPUNOV_TOL
        && m.max_fejer_violation <= FEJER_TOL
        && m.boundedness_holds();
    l.record(
        5,
        "Lyapunov monitor",
        pass,
        format!(
            "{} steps, min slack = {:e}, Fejer {:e}, boundedness {:e}",
            m.steps_checked, m.min_lyapunov_slack, m.max_fejer_violation, m.max_boundedness_violation
        ),
    );
}

fn gamma_bounds(l: &mut Ledger, s: &RunSummary) {
    let m = s.monitor.as_ref().unwrap();
    let (region, _) = run("three_caps_region.json");
    let rm = region.monitor.as_ref().unwrap();
    let a_holds = region.conditions.as_ref().unwrap().a;
    let pass = m.steps_checked == s.iterations.unwrap()
        && m.max_gamma_c_violation <= GAMMA_TOL
        && a_holds
        && rm.steps_checked == region.iterations.unwrap()
        && rm.undefined_steps == 0
        && rm.max_gamma_a_violation <= GAMMA_TOL;
    l.record(
        6,
        "gamma lower bounds",
        pass,
        format!(
            "(c) violation {:e}; (a) holds = {a_holds}, violation {:e}",
            m.max_gamma_c_violation, rm.max_gamma_a_violation
        ),
    );
}

fn resolvent_is_projection(l: &mut Ledger) {
    let space = ModelSpace::sphere(2).unwrap();
    let center = space.point_from_direction(vec![0.2, -0.1, 1.0]).unwrap();
    let cap = Cap::new(&space, center.clone(), 0.5).unwrap();
    let f = ConvexFunction::indicator_of(ConvexSet::cap(&space, center.clone(), 0.5).unwrap());
    let settings = SolverSettings::default();
    let mut g = rng(7);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = uniform_in_cap(&space, &center, 1.5, &mut g);
        let p = project_cap(&space, &cap, &x).unwrap();
        for r in [
            resolvent_tansin(&space, &f, &x, &settings).unwrap(),
            resolvent_logcos(&space, &f, &x, &settings).unwrap(),
        ] {
            worst = worst.max(space.dist(&r, &p).unwrap());
        }
    }
    let t = start.elapsed();
    let pass = worst <= 1e-4 && t < Duration::from_secs(30);
    l.record(
        7,
        "indicator resolvents equal the projection",
        pass,
        format!("max distance = {worst:e}, {t:?}"),
    );
}

fn resolvent_run(l: &mut Ledger) {
    let (s, t) = run("resolvent_pair.json");
    let d = s.final_d_oracle.unwrap_or(f64::INFINITY);
    let n = s.iterations.unwrap();
    let oracle = s.oracle.as_ref().unwrap();
    let pass = oracle.method == OracleMethod::Finite && d <= 5e-3 && n <= 200_000 && t < Duration::from_secs(60);
    l.record(
        8,
        "resolvent Halpern run",
        pass,
        format!("d(x_N, c) = {d:e} at N = {n}, oracle {:?}, {t:?}", oracle.method),
    );
}

fn negation_example(l: &mut Ledger) {
    let start = Instant::now();
    let rep = cmd_example44().unwrap();
    let t = start.elapsed();
    let pass = rep.pass
        && rep.grid_points == EXAMPLE44_GRID
        && rep.qne_violations == 0
        && rep.ratio_identically_one
        && rep.residual_identically_one
        && t < Duration::from_secs(1);
    l.record(
        9,
        "negation on [-0.7, 0.7]",
        pass,
        format!(
            "{} violations on {} points, ratio = 1: {}, residual = 1: {}, {t:?}",
            rep.qne_violations, rep.grid_points, rep.ratio_identically_one, rep.residual_identically_one
        ),
    );
}

fn determinism(l: &mut Ledger) {
    let bytes: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = cmd_run(
                &config_path("three_caps.json"),
                &RunOptions {
                    out_dir: dir.path().to_path_buf(),
                    stride: None,
                },
            );
            std::fs::read(out.trace_path.unwrap()).unwrap()
        })
        .collect();
    let pass = !bytes[0].is_empty() && bytes[0] == bytes[1];
    l.record(
        10,
        "byte-identical traces",
        pass,
        format!("{} and {} bytes", bytes[0].len(), bytes[1].len()),
    );
}

fn main() {
    let mut l = Ledger { failed: Vec::new() };
    geometry_battery(&mut l);
    sine_sweep(&mut l);
    w_mapping_fixed_points(&mut l);
    let summary = desk_run(&mut l);
    lyapunov(&mut l, &summary);
    gamma_bounds(&mut l, &summary);
    resolvent_is_projection(&mut l);
    resolvent_run(&mut l);
    negation_example(&mut l);
    determinism(&mut l);
    if !l.failed.is_empty() {
        eprintln!("failed criteria: {:?}", l.failed);
        std::process::exit(1);
    }
}
