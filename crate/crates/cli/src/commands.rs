use std::fmt::Debug;
use std::fs;
use std::hash::Hash;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use aco_core::aco::{self, AcoCertificate, CertifyOptions, Verdict};
use aco_core::iteration::{
    load_schedule, run_async, run_sync, DecomposedOperator, RunStatus, SampleParams, Schedule,
    Trajectory,
};
use aco_core::logic::{self, GroundProgram, Interpretation};
use aco_core::routing::{
    self, Granularity, PathSet, RoutingOperator, SolveMode, SolveOptions, SppInstance,
};
use aco_core::trace::write_trace;
use aco_core::ultrametric::{self, FiniteUltrametricSpace};
use aco_core::Dyadic;

use crate::{CampaignArgs, Mode, RunArgs};

fn params(max_staleness: usize, fairness_window: usize, activation_prob: f64) -> SampleParams {
    SampleParams {
        activation_prob,
        max_staleness,
        fairness_window,
    }
}

impl CampaignArgs {
    fn sample_params(&self) -> SampleParams {
        params(
            self.max_staleness,
            self.fairness_window,
            self.activation_prob,
        )
    }

    fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            runs: self.runs,
            seed: self.seed,
            horizon: self.horizon,
            params: self.sample_params(),
        }
    }
}

enum Input {
    Routing(SppInstance),
    Logic(GroundProgram),
}

fn load_input(path: &Path) -> Result<Input> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Ok(Input::Routing(load_instance(path)?)),
        Some("pl") => Ok(Input::Logic(load_program(path)?)),
        _ => bail!(
            "{}: expected a routing instance (.json) or a logic program (.pl)",
            path.display()
        ),
    }
}

fn load_instance(path: &Path) -> Result<SppInstance> {
    SppInstance::load(path).with_context(|| format!("reading {}", path.display()))
}

fn load_program(path: &Path) -> Result<GroundProgram> {
    GroundProgram::load(path).with_context(|| format!("reading {}", path.display()))
}

fn granularity(label: &str) -> Result<Granularity> {
    Ok(label.parse::<Granularity>()?)
}

fn status_text(status: RunStatus) -> String {
    match status {
        RunStatus::Converged { at } => format!("converged at tick {at}"),
        RunStatus::Cycle { start, period } => format!("cycle of period {period} from tick {start}"),
        RunStatus::HorizonExhausted => "horizon exhausted".to_string(),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// space
// ---------------------------------------------------------------------------

pub fn space_check(path: &Path) -> Result<bool> {
    let space =
        ultrametric::load_space(path).with_context(|| format!("reading {}", path.display()))?;
    println!("elements: {}", space.len());
    println!("scale: {}", space.scale().labels().join(" < "));
    let axioms = ultrametric::check_axioms(&space);
    if axioms.pass() {
        println!("axioms: pass");
    } else {
        println!("axioms: FAIL ({} violations)", axioms.violation_count);
        for v in &axioms.violations {
            println!("  {v:?}");
        }
    }
    let isosceles = ultrametric::find_non_isosceles(&space);
    match &isosceles {
        None => println!("isosceles: pass"),
        Some((l, m, n)) => println!("isosceles: FAIL ({l}, {m}, {n})"),
    }
    let complete = ultrametric::check_spherical_completeness(&space);
    if complete.pass {
        println!(
            "spherically complete: pass ({} balls, {} chains)",
            complete.balls, complete.chains_checked
        );
    } else {
        println!("spherically complete: FAIL {:?}", complete.witness);
    }
    Ok(axioms.pass() && isosceles.is_none() && complete.pass)
}

// ---------------------------------------------------------------------------
// aco
// ---------------------------------------------------------------------------

fn certificate_json<V: Ord + Clone>(
    cert: &AcoCertificate<V>,
    show: impl Fn(&V) -> String,
) -> Result<String> {
    Ok(serde_json::to_string_pretty(&cert.to_doc(show))? + "\n")
}

fn certified(cert: &AcoCertificate<impl Ord>) -> bool {
    cert.verdict == Verdict::Certified && cert.campaign.as_ref().is_some_and(|c| c.all_converged())
}

/// The height ultrametric on split routing states.
fn routing_space(
    inst: &SppInstance,
    r: &RoutingOperator,
) -> Result<FiniteUltrametricSpace<Vec<PathSet>>> {
    let h = inst.path_height();
    Ok(FiniteUltrametricSpace::from_fn(
        r.operator.states(),
        0u64,
        |a, b| routing::state_distance(&h, RoutingOperator::join(a), RoutingOperator::join(b)),
    )?)
}

/// The stratification ultrametric on per-atom states.
fn logic_space(program: &GroundProgram) -> Result<Option<FiniteUltrametricSpace<Vec<bool>>>> {
    if program.atom_count() > logic::MAX_EXHAUSTIVE_ATOMS {
        return Ok(None);
    }
    let Ok(strat) = logic::stratification(program) else {
        return Ok(None);
    };
    let op = logic::tp_operator(program);
    Ok(Some(FiniteUltrametricSpace::from_fn(
        op.states(),
        Dyadic::Zero,
        |a, b| {
            logic::interpretation_distance(
                &strat,
                Interpretation::from_bools(a),
                Interpretation::from_bools(b),
            )
        },
    )?))
}

pub fn aco_certify(
    path: &Path,
    granularity_label: &str,
    campaign: &CampaignArgs,
    out: Option<&Path>,
) -> Result<bool> {
    let opts = campaign.certify_options();
    match load_input(path)? {
        Input::Routing(inst) => {
            let r = routing::decompose(&inst, granularity(granularity_label)?);
            let hint = if inst.check_strictly_inflationary().is_ok() {
                Some(routing_space(&inst, &r)?)
            } else {
                None
            };
            let cert = aco::certify_aco(&r.operator, hint.as_ref(), &opts)?;
            write_output(out, &certificate_json(&cert, |v| inst.format_set(*v))?)?;
            Ok(certified(&cert))
        }
        Input::Logic(program) => {
            let op = logic::tp_operator(&program);
            let hint = logic_space(&program)?;
            let cert = aco::certify_aco(&op, hint.as_ref(), &opts)?;
            write_output(out, &certificate_json(&cert, |v| v.to_string())?)?;
            Ok(certified(&cert))
        }
    }
}

pub fn aco_census(out: Option<&Path>) -> Result<bool> {
    let (rows, summary) = aco::census()?;
    if let Some(path) = out {
        let mut text = String::from("code,fixed_points,box_sequence,ultrametric\n");
        for r in &rows {
            text.push_str(&format!(
                "{},{},{},{}\n",
                r.code, r.fixed_points, r.box_sequence, r.ultrametric
            ));
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("operators: {}", summary.total);
    println!("asynchronously contracting: {}", summary.aco);
    for (len, count) in &summary.by_chain_length {
        println!("  with {len} boxes: {count}");
    }
    println!(
        "verdicts agree on {}/{} operators",
        summary.agree, summary.total
    );
    if !summary.disagreements.is_empty() {
        println!("disagreements: {:?}", summary.disagreements);
    }
    Ok(summary.agree == summary.total)
}

// ---------------------------------------------------------------------------
// routing
// ---------------------------------------------------------------------------

pub fn routing_check(path: &Path) -> Result<bool> {
    let inst = load_instance(path)?;
    let heights = inst.path_height();
    println!("paths: {}", inst.path_count());
    for p in 0..inst.path_count() {
        let permitted = if inst.permitted().contains(p) {
            ""
        } else {
            " (not permitted)"
        };
        println!("  {} h={}{}", inst.format_path(p), heights[p], permitted);
    }
    if let Err(f) = inst.check_strictly_inflationary() {
        let (i, j) = f.arc;
        println!(
            "strictly inflationary: FAIL ({} is not strictly preferred to {} over arc ({} {}))",
            inst.format_path(f.path),
            inst.format_path(f.extension),
            inst.nodes()[i],
            inst.nodes()[j]
        );
        if let Some(cycle) = f.cycle {
            let shown: Vec<String> = cycle.iter().map(|&p| inst.format_path(p)).collect();
            println!("preference cycle: {}", shown.join(" ⪯ "));
        }
        return Ok(false);
    }
    println!("strictly inflationary: pass");
    let report = routing::verify_strict_contraction(&inst)?;
    match report.counterexample {
        None => println!("strict contraction: pass ({} pairs)", report.pairs_checked),
        Some((m, n)) => println!(
            "strict contraction: FAIL ({}, {})",
            inst.format_set(m),
            inst.format_set(n)
        ),
    }
    Ok(report.pass)
}

pub fn routing_solve(
    path: &Path,
    mode: Mode,
    granularity_label: &str,
    campaign: &CampaignArgs,
    force: bool,
    start: Option<&str>,
) -> Result<bool> {
    let inst = load_instance(path)?;
    let start = start.map(|s| inst.parse_set(s)).transpose()?;
    let opts = SolveOptions {
        mode: match mode {
            Mode::Sync => SolveMode::Sync,
            Mode::Async => SolveMode::Async,
        },
        granularity: granularity(granularity_label)?,
        horizon: campaign.horizon,
        seed: campaign.seed,
        runs: campaign.runs,
        params: campaign.sample_params(),
        force,
        start,
    };
    let report = match routing::solve(&inst, &opts) {
        Err(routing::RoutingError::NotInflationary(why)) => {
            println!("refused: preferences are not strictly inflationary: {why}");
            println!("(use --force for an exploratory run)");
            return Ok(false);
        }
        other => other?,
    };
    println!("granularity: {}", opts.granularity);
    println!("sync: {}", status_text(report.sync_status()));
    if let RunStatus::Cycle { start, period } = report.sync_status() {
        for t in start..start + period {
            println!(
                "  x({t}) = {}",
                inst.format_set(RoutingOperator::join(report.sync.state(t)))
            );
        }
    }
    match report.fixed_point {
        Some(fp) => println!("fixed point: {}", inst.format_set(fp)),
        None => println!("fixed point: none"),
    }
    println!("stable: {}", if report.stable { "yes" } else { "no" });
    let mut ok = report.fixed_point.is_some() && report.stable;
    if mode == Mode::Async {
        for r in &report.async_runs {
            let at = r.converged_at.map_or("none".to_string(), |t| t.to_string());
            println!(
                "  seed {} converged_at={} final={}",
                r.seed,
                at,
                inst.format_set(r.final_state)
            );
        }
        println!(
            "async: {}/{} runs reached the fixed point",
            report.async_agreements(),
            report.async_runs.len()
        );
        ok &= report.async_agreements() == report.async_runs.len();
    }
    Ok(ok)
}

// ---------------------------------------------------------------------------
// logic
// ---------------------------------------------------------------------------

pub fn logic_solve(path: &Path, mode: Mode, campaign: &CampaignArgs) -> Result<bool> {
    let program = load_program(path)?;
    let pm = match logic::compute_perfect_model(&program) {
        Ok(pm) => pm,
        Err(e @ (logic::LogicError::NotStratified(_) | logic::LogicError::BadStrata(_))) => {
            println!("rejected: {e}");
            return Ok(false);
        }
        Err(e @ (logic::LogicError::OracleMismatch { .. } | logic::LogicError::Cycle { .. })) => {
            println!("failed: {e}");
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let strata: Vec<String> = program
        .atoms()
        .iter()
        .zip(pm.stratification.levels())
        .map(|(a, l)| format!("{a}:{l}"))
        .collect();
    println!("strata: {}", strata.join(" "));
    let trajectory: Vec<String> = pm.trajectory.iter().map(|&i| program.format(i)).collect();
    println!("trajectory: {}", trajectory.join(" -> "));
    println!("perfect model: {}", program.format(pm.model));
    println!("steps: {}", pm.steps());
    if mode == Mode::Sync {
        return Ok(true);
    }
    let op = logic::tp_operator(&program);
    let start = vec![false; program.atom_count()];
    let target = pm.model.to_bools(program.atom_count());
    let mut agree = 0;
    for i in 0..campaign.runs {
        let seed = campaign.seed.wrapping_add(i as u64);
        let schedule = Schedule::sample(
            op.processor_count(),
            campaign.horizon,
            seed,
            campaign.sample_params(),
        )?;
        let t = run_async(&op, &start, &schedule)?;
        let reached = t.converged_at().is_some() && t.final_state() == target.as_slice();
        agree += usize::from(reached);
        let at = t
            .converged_at()
            .map_or("none".to_string(), |a| a.to_string());
        println!(
            "  seed {seed} converged_at={at} final={}",
            program.format(Interpretation::from_bools(t.final_state()))
        );
    }
    println!(
        "async: {agree}/{} runs reached the perfect model",
        campaign.runs
    );
    Ok(agree == campaign.runs)
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RunSummary {
    kind: &'static str,
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    granularity: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    processors: usize,
    ticks: usize,
    status: &'static str,
    converged_at: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cycle: Option<[usize; 2]>,
    final_state: String,
    fixed_point: Option<String>,
    reached_fixed_point: Option<bool>,
}

/// Everything `run` needs about one operator.
struct Prepared<V> {
    kind: &'static str,
    granularity: Option<String>,
    op: DecomposedOperator<V>,
    start: Vec<V>,
    fixed_point: Option<Vec<V>>,
    value: Box<dyn Fn(usize, &V) -> String>,
    state: Box<dyn Fn(&[V]) -> String>,
    dist: Option<Box<dyn Fn(&[V]) -> String>>,
}

fn prepare_routing(inst: SppInstance, args: &RunArgs) -> Result<Option<Prepared<PathSet>>> {
    let g = granularity(&args.granularity)?;
    let inflationary = inst.check_strictly_inflationary().is_ok();
    if !inflationary && !args.force {
        println!("refused: preferences are not strictly inflationary (use --force for an exploratory run)");
        return Ok(None);
    }
    let r = routing::decompose(&inst, g);
    let start = match &args.start {
        Some(s) => inst.parse_set(s)?,
        None => PathSet::EMPTY,
    };
    if !inst.is_valid_state(start) {
        bail!("start state holds paths that are not permitted");
    }
    let start = r.split(start);
    // Distances need the height metric, which is only meaningful when inflationary.
    let fixed_point = if inflationary {
        let sync = run_sync(
            &r.operator,
            &r.split(PathSet::EMPTY),
            args.horizon.max(inst.path_count() + 2),
        )?;
        sync.converged_at().map(|_| sync.final_state().to_vec())
    } else {
        None
    };
    let inst = std::rc::Rc::new(inst);
    let dist: Option<Box<dyn Fn(&[PathSet]) -> String>> = fixed_point.as_ref().map(|fp| {
        let h = inst.path_height();
        let fp = RoutingOperator::join(fp);
        Box::new(move |x: &[PathSet]| {
            routing::state_distance(&h, RoutingOperator::join(x), fp).to_string()
        }) as Box<dyn Fn(&[PathSet]) -> String>
    });
    let (i1, i2) = (inst.clone(), inst.clone());
    Ok(Some(Prepared {
        kind: "routing",
        granularity: Some(g.to_string()),
        op: r.operator,
        start,
        fixed_point,
        value: Box::new(move |_, v| i1.format_set(*v)),
        state: Box::new(move |x| i2.format_set(RoutingOperator::join(x))),
        dist,
    }))
}

fn parse_interpretation(program: &GroundProgram, text: &str) -> Result<Interpretation> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .with_context(|| format!("interpretation {text:?} must look like {{a, b}}"))?;
    let names: Vec<&str> = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    Ok(program.interpretation(&names)?)
}

fn prepare_logic(program: GroundProgram, args: &RunArgs) -> Result<Option<Prepared<bool>>> {
    let n = program.atom_count();
    let op = logic::tp_operator(&program);
    let start = match &args.start {
        Some(s) => parse_interpretation(&program, s)?,
        None => Interpretation::EMPTY,
    };
    let perfect = logic::compute_perfect_model(&program).ok();
    let fixed_point = perfect.as_ref().map(|pm| pm.model.to_bools(n));
    let dist: Option<Box<dyn Fn(&[bool]) -> String>> = perfect.map(|pm| {
        let model = pm.model;
        let strat = pm.stratification;
        Box::new(move |x: &[bool]| {
            logic::interpretation_distance(&strat, Interpretation::from_bools(x), model).to_string()
        }) as Box<dyn Fn(&[bool]) -> String>
    });
    let program = std::rc::Rc::new(program);
    Ok(Some(Prepared {
        kind: "logic",
        granularity: None,
        op,
        start: start.to_bools(n),
        fixed_point,
        value: Box::new(|_, v| if *v { "1".to_string() } else { "0".to_string() }),
        state: Box::new(move |x| program.format(Interpretation::from_bools(x))),
        dist,
    }))
}

fn execute<V>(p: Prepared<V>, mode: Mode, args: &RunArgs) -> Result<bool>
where
    V: Clone + Eq + Hash + Debug + Send + Sync + 'static,
{
    let (traj, seed): (Trajectory<V>, Option<u64>) = match mode {
        Mode::Sync => (run_sync(&p.op, &p.start, args.horizon)?, None),
        Mode::Async => {
            let (schedule, seed) = match &args.schedule {
                Some(path) => {
                    let s = load_schedule(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    if let Err(v) = s.check_admissible_prefix() {
                        bail!("schedule {} is not admissible: {v:?}", path.display());
                    }
                    (s, None)
                }
                None => {
                    let ps = params(
                        args.max_staleness,
                        args.fairness_window,
                        args.activation_prob,
                    );
                    (
                        Schedule::sample(p.op.processor_count(), args.horizon, args.seed, ps)?,
                        Some(args.seed),
                    )
                }
            };
            if schedule.processors() != p.op.processor_count() {
                bail!(
                    "schedule has {} processors, the operator {}",
                    schedule.processors(),
                    p.op.processor_count()
                );
            }
            (run_async(&p.op, &p.start, &schedule)?, seed)
        }
    };
    if let Some(path) = &args.trace {
        let file = fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
        write_trace(file, &traj, |i, v| (p.value)(i, v), p.dist.as_deref())?;
    }
    let (status, cycle) = match traj.status() {
        RunStatus::Converged { .. } => ("converged", None),
        RunStatus::Cycle { start, period } => ("cycle", Some([start, period])),
        RunStatus::HorizonExhausted => ("horizon-exhausted", None),
    };
    let reached = p
        .fixed_point
        .as_ref()
        .map(|fp| traj.converged_at().is_some() && traj.final_state() == fp.as_slice());
    let summary = RunSummary {
        kind: p.kind,
        mode: match mode {
            Mode::Sync => "sync",
            Mode::Async => "async",
        },
        granularity: p.granularity,
        seed,
        processors: p.op.processor_count(),
        ticks: traj.ticks(),
        status,
        converged_at: traj.converged_at(),
        cycle,
        final_state: (p.state)(traj.final_state()),
        fixed_point: p.fixed_point.as_ref().map(|fp| (p.state)(fp)),
        reached_fixed_point: reached,
    };
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    if let Some(path) = &args.summary {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(traj.converged_at().is_some() && reached != Some(false))
}

pub fn run(mode: Mode, args: &RunArgs) -> Result<bool> {
    match load_input(&args.file)? {
        Input::Routing(inst) => match prepare_routing(inst, args)? {
            Some(p) => execute(p, mode, args),
            None => Ok(false),
        },
        Input::Logic(program) => match prepare_logic(program, args)? {
            Some(p) => execute(p, mode, args),
            None => Ok(false),
        },
    }
}
