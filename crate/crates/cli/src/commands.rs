use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use oscsync::conditions::{
    classify_equilibrium, kuramoto_check, necessary_absolute, necessary_incremental, solve_equilibrium, theorem4_check,
    theorem5_check,
};
use oscsync::harness::svg::{Plot, Series};
use oscsync::harness::{
    run_balance, run_bifurcation2, run_fig7, run_fig7_empirical, run_powergrid, run_vehicles, BalanceInitial, BifurcationRow,
    Csv, EmpiricalRow, ExperimentConfig, ExperimentKind, Fig7Row, FrequencyDistribution, NGrid,
};
use oscsync::integrate::{detect_frequency_sync, fmt17, integrate, SyncCriteria};
use oscsync::models::ModelFile;
use oscsync::{IntegratorConfig, OscillatorNetwork, Result, Trajectory, WeightedGraph};
use serde_json::json;

use crate::args::*;
use crate::io::{emit_table, invalid, json, read_phases, read_vector, require_out, write};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Check(a) => check(a),
        Command::Equilibrium(a) => equilibrium(a),
        Command::Fig7(a) => fig7(a),
        Command::Bifurcation2(a) => bifurcation2(a),
        Command::Vehicles(a) => vehicles(a),
        Command::Powergrid(a) => powergrid(a),
        Command::Balance(a) => balance(a),
    }
}

fn apply_integrator(a: &IntegratorArgs, integrator: &mut IntegratorConfig, sync: &mut SyncCriteria) -> Result<()> {
    if let Some(h) = a.step {
        integrator.step = h;
    }
    if let Some(t) = a.horizon {
        integrator.horizon = t;
    }
    if let Some(k) = a.stride {
        integrator.stride = k;
    }
    if let Some(tol) = a.sync_tol {
        sync.tol = tol;
    }
    if let Some(w) = a.sync_window {
        sync.window = w;
    }
    integrator.validate()?;
    if !(sync.tol > 0.0 && sync.window > 0.0) {
        return Err(invalid("sync tolerance and window must be positive"));
    }
    Ok(())
}

fn network(graph: &Path, omega: &str) -> Result<OscillatorNetwork> {
    OscillatorNetwork::new(WeightedGraph::load(graph)?, read_vector(omega)?)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let (mut integrator, mut sync) = (IntegratorConfig::default(), SyncCriteria::default());
    apply_integrator(&a.integrator, &mut integrator, &mut sync)?;
    let omega = || a.omega.as_deref().ok_or_else(|| invalid(format!("model '{}' needs --omega", a.model)));
    let model = match a.model.as_str() {
        "kuramoto" => {
            let k = a.k.ok_or_else(|| invalid("model 'kuramoto' needs --K"))?;
            ModelFile::Kuramoto { coupling: k, omega: read_vector(omega()?)? }
        }
        "oscillator" => {
            let graph = a.graph.as_deref().ok_or_else(|| invalid("model 'oscillator' needs --graph"))?;
            let net = network(graph, omega()?)?;
            ModelFile::Oscillator { graph: oscsync::models::GraphSource::Inline(net.graph().clone()), omega: net.omega().to_vec() }
        }
        path => ModelFile::load(path)?,
    };
    let base = Path::new(&a.model).parent().map(Path::to_path_buf);
    let theta0 = a.theta0.as_deref().map(read_phases).transpose()?;
    let (dynamics, initial) = model.instantiate(base.as_deref(), theta0.as_ref())?;
    let traj = integrate(&*dynamics, &initial, &integrator)?;
    let verdict = json(&detect_frequency_sync(&traj, sync.tol, sync.window)?);
    if let Some(dir) = a.out.as_deref() {
        write(dir, "trajectory.csv", &traj.to_csv())?;
        write(dir, "verdict.json", &verdict)?;
    }
    print!("{verdict}");
    Ok(())
}

fn check(a: CheckArgs) -> Result<()> {
    let omega = read_vector(&a.omega)?;
    let mut reports = Vec::new();
    if let Some(graph) = a.graph.as_deref() {
        let net = OscillatorNetwork::new(WeightedGraph::load(graph)?, omega.clone())?;
        reports.push(necessary_absolute(&net, a.gamma)?);
        reports.push(necessary_incremental(&net, a.gamma)?);
        reports.push(theorem4_check(&net, a.rate_gamma)?);
        reports.push(theorem5_check(&net)?);
    }
    if let Some(k) = a.coupling {
        reports.push(kuramoto_check(k, &omega)?);
    }
    if reports.is_empty() {
        return Err(invalid("check needs --graph, --coupling or both"));
    }
    print!("{}", json(&reports));
    Ok(())
}

fn equilibrium(a: EquilibriumArgs) -> Result<()> {
    let net = network(&a.graph, &a.omega)?;
    match a.theta.as_deref() {
        Some(theta) => {
            let stability = classify_equilibrium(&net, &read_phases(theta)?)?;
            print!("{}", json(&json!({ "stability": stability })));
        }
        None => print!("{}", json(&solve_equilibrium(&net, a.damping)?)),
    }
    Ok(())
}

/// Merged experiment settings plus the output directory, if any.
struct Setup {
    cfg: ExperimentConfig,
    out: Option<PathBuf>,
}

/// Loads the config file, applies flag overrides and enforces that seeded
/// experiments name their seed and trial count explicitly.
fn setup(a: &ExperimentArgs, kind: ExperimentKind, seeded: bool, edit: impl FnOnce(&mut ExperimentConfig) -> Result<()>) -> Result<Setup> {
    let (mut cfg, keys) = match a.config.as_deref() {
        Some(path) => ExperimentConfig::load_with_keys(path)?,
        None => (ExperimentConfig::default(), BTreeSet::new()),
    };
    if let Some(k) = cfg.experiment.filter(|&k| k != kind) {
        return Err(invalid(format!("config is for experiment {k:?}, not {kind:?}")));
    }
    cfg.experiment = Some(kind);
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = a.trials {
        cfg.trials = trials;
    }
    if seeded {
        for (name, given) in [("seed", a.seed.is_some()), ("trials", a.trials.is_some())] {
            if !given && !keys.contains(name) {
                return Err(invalid(format!("--{name} is required (flag or config)")));
            }
        }
    }
    let out = a.out.clone().or_else(|| keys.contains("out").then(|| cfg.out.clone()));
    apply_integrator(&a.integrator, &mut cfg.integrator, &mut cfg.sync)?;
    edit(&mut cfg)?;
    cfg.validate()?;
    Ok(Setup { cfg, out })
}

fn parse_distribution(s: &str) -> Result<FrequencyDistribution> {
    let bad = || invalid(format!("cannot parse distribution {s:?}"));
    let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
    let d = match kind {
        "uniform" => {
            let (lo, hi) = rest.split_once(':').ok_or_else(bad)?;
            FrequencyDistribution::Uniform { low: num(lo)?, high: num(hi)? }
        }
        "bipolar" => FrequencyDistribution::Bipolar { magnitude: num(rest)? },
        "explicit" => FrequencyDistribution::Explicit { values: rest.split(',').map(num).collect::<Result<_>>()? },
        _ => return Err(bad()),
    };
    d.validate()?;
    Ok(d)
}

fn order_plot<'a>(title: &'a str, traj: &Trajectory) -> Plot<'a> {
    let points = traj.times.iter().copied().zip(traj.order.iter().copied()).collect();
    Plot { title, x_label: "t", y_label: "r", log_x: false, series: vec![Series { label: "r(t)", points }] }
}

fn fig7(a: Fig7Args) -> Result<()> {
    let s = setup(&a.common, ExperimentKind::Fig7, true, |cfg| {
        if let Some(g) = a.n_grid.as_deref() {
            cfg.n_grid = g.parse::<NGrid>()?;
        }
        if let Some(d) = a.distribution.as_deref() {
            cfg.distribution = parse_distribution(d)?;
        }
        if let Some(m) = a.empirical_max_n {
            cfg.empirical_max_n = m;
        }
        cfg.svg |= a.svg;
        Ok(())
    })?;
    let out = s.out.as_deref();
    if s.cfg.svg {
        require_out(out, "--svg")?;
    }
    if s.cfg.empirical_max_n > 0 {
        require_out(out, "the empirical search")?;
    }
    let rows = run_fig7(&s.cfg)?;
    emit_table(out, "fig7.csv", &Fig7Row::csv(&rows))?;
    if s.cfg.svg {
        let curve = |f: fn(&Fig7Row) -> f64| rows.iter().map(|r| (r.n as f64, f(r))).collect();
        let plot = Plot {
            title: "Kuramoto critical coupling bounds",
            x_label: "n",
            y_label: "K",
            log_x: true,
            series: vec![
                Series { label: "necessary", points: curve(|r| r.mean_necessary) },
                Series { label: "exact", points: curve(|r| r.mean_exact) },
                Series { label: "sufficient", points: curve(|r| r.mean_sufficient) },
            ],
        };
        write(out.expect("checked"), "fig7.svg", &plot.render())?;
    }
    if s.cfg.empirical_max_n > 0 {
        let rows = run_fig7_empirical(&s.cfg)?;
        write(out.expect("checked"), "fig7_empirical.csv", EmpiricalRow::csv(&rows).as_str())?;
    }
    Ok(())
}

fn bifurcation2(a: BifurcationArgs) -> Result<()> {
    let s = setup(&a.common, ExperimentKind::Bifurcation2, false, |cfg| {
        if let Some(k) = a.kappas.as_deref() {
            cfg.bifurcation.kappas = read_vector(k)?;
        }
        if let Some(d) = a.delta0.as_deref() {
            cfg.bifurcation.delta0 = read_vector(d)?;
        }
        Ok(())
    })?;
    let rows = run_bifurcation2(&s.cfg.bifurcation, &s.cfg.integrator)?;
    emit_table(s.out.as_deref(), "bifurcation2.csv", &BifurcationRow::csv(&rows))
}

fn vehicles(a: VehicleArgs) -> Result<()> {
    let s = setup(&a.common, ExperimentKind::Vehicles, true, |cfg| {
        if let Some(g) = a.gain {
            cfg.vehicles.gain = g;
        }
        if let Some(n) = a.n {
            cfg.vehicles.n = n;
        }
        if let Some(w) = a.omega0 {
            cfg.vehicles.omega0 = w;
        }
        cfg.svg |= a.svg;
        Ok(())
    })?;
    let out = s.out.as_deref();
    if s.cfg.svg {
        require_out(out, "--svg")?;
    }
    let mut summary = Csv::new(&["trial", "final_r"]);
    for trial in 0..s.cfg.trials {
        let run = run_vehicles(&s.cfg.vehicles, &s.cfg.integrator, s.cfg.seed, trial as u64)?;
        summary.row(&[trial.to_string(), fmt17(run.final_r)]);
        if trial == 0 {
            if let Some(dir) = out {
                write(dir, "vehicles_trajectory.csv", run.csv().as_str())?;
                if s.cfg.svg {
                    write(dir, "vehicles.svg", &order_plot("Heading order parameter", &run.trajectory).render())?;
                }
            }
        }
    }
    emit_table(out, "vehicles.csv", &summary)
}

fn powergrid(a: PowergridArgs) -> Result<()> {
    let s = setup(&a.common, ExperimentKind::Powergrid, false, |cfg| {
        if let Some(m) = a.model.clone() {
            cfg.model = Some(m);
        }
        Ok(())
    })?;
    let path = s.cfg.model.as_deref().ok_or_else(|| invalid("powergrid needs --model (flag or config)"))?;
    let net = ModelFile::load(path)?.power_network(path.parent())?;
    let theta0 = a.theta0.as_deref().map(read_phases).transpose()?;
    let run = run_powergrid(&net, theta0.as_ref(), &s.cfg.integrator, &s.cfg.sync)?;
    let report = run.report_json() + "\n";
    if let Some(dir) = s.out.as_deref() {
        write(dir, "powergrid.csv", &run.trajectory.to_csv())?;
        write(dir, "powergrid.json", &report)?;
    }
    print!("{report}");
    Ok(())
}

fn balance(a: BalanceArgs) -> Result<()> {
    let s = setup(&a.common, ExperimentKind::Balance, true, |cfg| {
        if let Some(g) = a.graph.clone() {
            cfg.balance.graph = Some(g);
        }
        if let Some(n) = a.n {
            cfg.balance.n = n;
        }
        if let Some(p) = a.near_splay {
            cfg.balance.initial = BalanceInitial::NearSplay { perturbation: p };
        }
        if let Some(t) = a.tolerance {
            cfg.balance.tolerance = t;
        }
        cfg.svg |= a.svg;
        Ok(())
    })?;
    let out = s.out.as_deref();
    if s.cfg.svg {
        require_out(out, "--svg")?;
    }
    let graph = match s.cfg.balance.graph.as_deref() {
        Some(path) => WeightedGraph::load(path)?,
        None => WeightedGraph::complete(s.cfg.balance.n, 1.0)?,
    };
    let result = run_balance(&graph, &s.cfg.balance, &s.cfg.integrator, s.cfg.seed, s.cfg.trials)?;
    if let Some(w) = &result.warning {
        eprintln!("warning: {w}");
    }
    eprintln!("balanced: {} of {}", result.balanced_count(), result.rows.len());
    if let Some(dir) = out {
        write(dir, "balance_trajectory.csv", &result.first_trajectory.to_csv())?;
        if s.cfg.svg {
            write(dir, "balance.svg", &order_plot("Balancing order parameter", &result.first_trajectory).render())?;
        }
    }
    emit_table(out, "balance.csv", &result.csv())
}
