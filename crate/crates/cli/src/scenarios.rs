//! Validated scenario inputs and their dispatch to the core modules.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use empathy_core::auction::{bid_curve, CostDistribution};
use empathy_core::empathy::EmpathyMatrix;
use empathy_core::empathy_data::{
    experiment_report, published_report, read_records_path, ExperimentReport, IriKey, IriRecord, PublishedAggregates,
    ReportOptions,
};
use empathy_core::energy::{
    demand_equilibrium_with, peak_comparison, two_peak_day, MarketModel, SolverOptions,
};
use empathy_core::forwarding::{
    all_profiles, group_kindness, is_equilibrium, kindness_closed_form, parse_profile, sample_material_payoff,
    sharing_budget, sustaining_range, Choice, CrowdForwardParams, HopChannel, PayoffKind,
};
use empathy_core::lq_game::{analytic_cost, forward_cost, mean_state, riccati_sweep, simulate_with, LqGameParams, Noise};
use empathy_core::matrix_games::{classify_outcome, collision_empathic_game, collision_gap, pure_nash, ForwardingParams};
use empathy_core::measure_dp::{
    evaluate_policy, mean_field_equilibrium, resolution_check, DppOptions, DppSolution, EquilibriumOptions,
    FiniteMftGame, PolicyProfile, SimplexGrid, SimplexMeasure, TabularGame,
};
use empathy_core::seeding::derive_seed;
use serde::Serialize;

use crate::config::Scenario;
use crate::CliError;

/// Files, scalar metrics and a text summary produced by one run.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: BTreeMap<String, String>,
    pub metrics: Vec<(String, f64)>,
    pub summary: String,
}

impl Outcome {
    fn file(&mut self, name: &str, content: String) {
        self.files.insert(name.to_string(), content);
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Computation(e.to_string()))?;
        self.file(name, text + "\n");
        Ok(())
    }

    fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push((name.into(), value));
    }
}

/// Scenario whose parameters have passed the target module's checks.
#[derive(Debug, Clone)]
pub enum Prepared {
    Collision { p1: f64, p2: f64, lambdas: Vec<f64> },
    Forwarding(Box<ForwardingRun>),
    Auction { distribution: CostDistribution, costs: Vec<f64>, lambdas: Vec<f64>, lambda: f64 },
    Energy { model: MarketModel, lambda: f64, lambdas: Vec<f64>, hours: usize, options: SolverOptions },
    Lq { params: LqGameParams, paths: usize, noise: Noise },
    MeasureDp(Box<MeasureDpRun>),
    Iri(IriInput),
}

#[derive(Debug, Clone)]
pub struct ForwardingRun {
    params: CrowdForwardParams,
    profiles: Vec<Vec<Choice>>,
    channel: Option<HopChannel>,
    samples: usize,
    pair: Option<(ForwardingParams, Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone)]
pub struct MeasureDpRun {
    game: TabularGame,
    grid: SimplexGrid,
    initial: SimplexMeasure,
    options: EquilibriumOptions,
    start: Option<Vec<Vec<Vec<f64>>>>,
    resolution_check: bool,
}

#[derive(Debug, Clone)]
pub enum IriInput {
    Records { records: Vec<IriRecord>, options: ReportOptions },
    Published(PublishedAggregates),
}

fn invalid(kind: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{kind} scenario: {e}"))
}

fn failed(kind: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Computation(format!("{kind} scenario: {e}"))
}

fn empathy_or_uniform(kind: &str, given: &Option<EmpathyMatrix>, n: usize, lambda: f64) -> Result<EmpathyMatrix, CliError> {
    match given {
        Some(m) if m.n() != n => Err(invalid(kind, format!("empathy: expected {n}x{n}, got {}x{}", m.n(), m.n()))),
        Some(m) => Ok(m.clone()),
        None => EmpathyMatrix::uniform(n, lambda).map_err(|e| invalid(kind, e)),
    }
}

/// Checks every parameter and resolves paths against `base_dir`.
pub fn prepare(scenario: &Scenario, base_dir: &Path) -> Result<Prepared, CliError> {
    let kind = scenario.kind();
    let bad = |e: empathy_core::Error| invalid(kind, e);
    Ok(match scenario {
        Scenario::Collision(s) => {
            collision_gap(s.p1, s.p2, 0.0, 0.0).map_err(bad)?;
            let lambdas = s.lambdas.values();
            for &l in &lambdas {
                collision_gap(s.p1, s.p2, l, l).map_err(bad)?;
            }
            Prepared::Collision { p1: s.p1, p2: s.p2, lambdas }
        }
        Scenario::Forwarding(s) => {
            let n = s.success.len();
            let params = CrowdForwardParams {
                threshold: s.threshold,
                alpha: s.alpha,
                gamma: s.gamma,
                success: s.success.clone(),
                empathy: empathy_or_uniform(kind, &s.empathy, n, s.lambda)?,
                reciprocity: s.reciprocity.clone(),
                neighbors: s.neighbors.clone(),
            };
            params.validate().map_err(bad)?;
            let profiles = if s.profiles.is_empty() {
                all_profiles(n)
            } else {
                s.profiles.iter().map(|p| parse_profile(p)).collect::<Result<_, _>>().map_err(bad)?
            };
            if let Some(p) = profiles.iter().find(|p| p.len() != n) {
                return Err(invalid(kind, format!("profile has {} choices for {n} players", p.len())));
            }
            let channel = match &s.hops {
                Some(hops) => {
                    let c = HopChannel { hops: hops.clone() };
                    c.validate().map_err(bad)?;
                    if hops.len() != n {
                        return Err(invalid(kind, format!("hops: {} paths for {n} players", hops.len())));
                    }
                    Some(c)
                }
                None => None,
            };
            let pair = match &s.pair {
                Some(p) => {
                    p.game.validate().map_err(bad)?;
                    Some((p.game, p.lambdas1.values(), p.lambdas2.values()))
                }
                None => None,
            };
            Prepared::Forwarding(Box::new(ForwardingRun { params, profiles, channel, samples: s.samples, pair }))
        }
        Scenario::Auction(s) => {
            s.distribution.validate().map_err(bad)?;
            Prepared::Auction {
                distribution: s.distribution.clone(),
                costs: s.costs.values(),
                lambdas: s.lambdas.values(),
                lambda: s.lambda,
            }
        }
        Scenario::Energy(s) => {
            let model = MarketModel::new(s.satisfaction.clone(), s.price).map_err(bad)?;
            let mut options = SolverOptions::default();
            if let Some(tol) = s.tol {
                if !tol.is_finite() || tol <= 0.0 {
                    return Err(invalid(kind, "tol: must be positive"));
                }
                options.tol = tol;
            }
            Prepared::Energy {
                model,
                lambda: s.lambda,
                lambdas: s.lambdas.as_ref().map(|g| g.values()).unwrap_or_default(),
                hours: s.hours,
                options,
            }
        }
        Scenario::Lq(s) => {
            let n = s.gains.len();
            let params = LqGameParams::stationary(
                s.horizon,
                s.alpha,
                s.alpha_bar,
                s.gains.clone(),
                s.sigma,
                &s.q,
                &s.q_bar,
                &s.c,
                empathy_or_uniform(kind, &s.empathy, n, s.lambda)?,
                s.mean0,
                s.var0,
            )
            .map_err(bad)?;
            Prepared::Lq { params, paths: s.paths, noise: s.noise }
        }
        Scenario::MeasureDp(s) => {
            s.game.validate().map_err(bad)?;
            let grid = match s.resolution {
                Some(r) => SimplexGrid::new(s.game.num_states(), r),
                None => SimplexGrid::default_for(s.game.num_states()),
            }
            .map_err(bad)?;
            let initial = SimplexMeasure::new(s.initial.clone()).map_err(bad)?;
            if initial.dim() != s.game.num_states() {
                return Err(invalid(kind, format!("initial: {} weights for {} states", initial.dim(), s.game.num_states())));
            }
            if let Some(start) = &s.start {
                if start.len() != s.game.num_players() {
                    return Err(invalid(kind, format!("start: {} rules for {} players", start.len(), s.game.num_players())));
                }
            }
            let options = EquilibriumOptions {
                max_iter: s.max_iter,
                tol: s.tol,
                dpp: DppOptions { mix_step: s.mix_step, ..DppOptions::default() },
            };
            options.dpp.validate().map_err(bad)?;
            Prepared::MeasureDp(Box::new(MeasureDpRun {
                game: s.game.clone(),
                grid,
                initial,
                options,
                start: s.start.clone(),
                resolution_check: s.resolution_check,
            }))
        }
        Scenario::Iri(s) => match &s.records {
            Some(path) => {
                let path = base_dir.join(path);
                let records = read_records_path(&path).map_err(|e| invalid(kind, format!("{}: {e}", path.display())))?;
                Prepared::Iri(IriInput::Records { records, options: s.options.clone().unwrap_or_default() })
            }
            None => {
                let agg = match &s.aggregates {
                    Some(path) => {
                        let path = base_dir.join(path);
                        PublishedAggregates::load(&path).map_err(|e| invalid(kind, format!("{}: {e}", path.display())))?
                    }
                    None => PublishedAggregates::bundled(),
                };
                Prepared::Iri(IriInput::Published(agg))
            }
        },
    })
}

impl Prepared {
    pub fn kind(&self) -> &'static str {
        match self {
            Prepared::Collision { .. } => "collision",
            Prepared::Forwarding(_) => "forwarding",
            Prepared::Auction { .. } => "auction",
            Prepared::Energy { .. } => "energy",
            Prepared::Lq { .. } => "lq",
            Prepared::MeasureDp(_) => "measure_dp",
            Prepared::Iri(_) => "iri",
        }
    }

    /// Runs the module computations. Randomness is drawn from the sub-stream
    /// named after the scenario kind.
    pub fn execute(&self, seed: u64) -> Result<Outcome, CliError> {
        let kind = self.kind();
        let fail = |e: empathy_core::Error| failed(kind, e);
        let stream = derive_seed(seed, kind);
        let mut out = Outcome::default();
        match self {
            Prepared::Collision { p1, p2, lambdas } => run_collision(&mut out, *p1, *p2, lambdas).map_err(fail)?,
            Prepared::Forwarding(run) => run_forwarding(&mut out, run, stream).map_err(fail)?,
            Prepared::Auction { distribution, costs, lambdas, lambda } => {
                let table = bid_curve(distribution, lambdas, costs).map_err(fail)?;
                out.file("bids.csv", table.to_csv());
                let at = bid_curve(distribution, &[*lambda], costs).map_err(fail)?;
                let _ = writeln!(out.summary, "auction: {} costs x {} lambdas", costs.len(), lambdas.len());
                for (c, row) in at.costs.iter().zip(&at.prices) {
                    out.metric(format!("price@{c}"), row[0]);
                    let _ = writeln!(out.summary, "  p*({c}, lambda = {lambda}) = {}", row[0]);
                }
            }
            Prepared::Energy { model, lambda, lambdas, hours, options } => {
                run_energy(&mut out, model, *lambda, lambdas, *hours, *options).map_err(fail)?
            }
            Prepared::Lq { params, paths, noise } => run_lq(&mut out, params, *paths, *noise, stream).map_err(fail)?,
            Prepared::MeasureDp(run) => run_measure_dp(&mut out, run)?,
            Prepared::Iri(input) => {
                let report = match input {
                    IriInput::Records { records, options } => {
                        experiment_report(records, &IriKey::davis(), options).map_err(fail)?
                    }
                    IriInput::Published(agg) => published_report(agg),
                };
                write_iri(&mut out, &report)?;
            }
        }
        Ok(out)
    }
}

fn equilibrium_labels(rows: &[String], cols: &[String], cells: &[(usize, usize)]) -> String {
    cells.iter().map(|&(r, c)| format!("{}/{}", rows[r], cols[c])).collect::<Vec<_>>().join(" ")
}

fn run_collision(out: &mut Outcome, p1: f64, p2: f64, lambdas: &[f64]) -> empathy_core::Result<()> {
    let mut csv = String::from("lambda,in_ratio,pure_equilibria\n");
    let _ = writeln!(out.summary, "collision: p1 = {p1}, p2 = {p2}");
    for &l in lambdas {
        let gap = collision_gap(p1, p2, l, l)?;
        let g = collision_empathic_game(p1, p2, l, l)?;
        let eq = equilibrium_labels(&g.rows, &g.cols, &pure_nash(&g));
        csv.push_str(&format!("{l},{gap},{eq}\n"));
        out.metric(format!("in_ratio@{l}"), gap);
        let _ = writeln!(out.summary, "  lambda = {l}: IN = {gap}, equilibria {eq}");
    }
    out.file("collision.csv", csv);
    Ok(())
}

fn profile_label(profile: &[Choice]) -> String {
    profile.iter().map(Choice::to_string).collect::<Vec<_>>().join(" ")
}

fn run_forwarding(out: &mut Outcome, run: &ForwardingRun, seed: u64) -> empathy_core::Result<()> {
    let params = &run.params;
    let kinds = [PayoffKind::Material, PayoffKind::Empathic, PayoffKind::Reciprocity];
    let mut audit = String::from("profile,kind,player,choice,payoff,deviation_gain,equilibrium\n");
    let mut ranges = String::from("profile,kind,scale_lo,scale_hi\n");
    let mut kindness = String::from("profile,player,group_kindness,closed_form,sharing_budget\n");
    let _ = writeln!(out.summary, "forwarding: {} players, threshold {}", params.n(), params.threshold);
    for profile in &run.profiles {
        let label = profile_label(profile);
        let mut verdicts = Vec::new();
        for kind in kinds {
            let report = is_equilibrium(params, profile, kind)?;
            for (i, (p, g)) in report.payoffs.iter().zip(&report.gains).enumerate() {
                audit.push_str(&format!("{label},{kind},{i},{},{p},{g},{}\n", profile[i], report.equilibrium));
            }
            out.metric(format!("{kind}_equilibrium[{label}]"), f64::from(u8::from(report.equilibrium)));
            verdicts.push(format!("{kind} {}", if report.equilibrium { "yes" } else { "no" }));
            if kind != PayoffKind::Material {
                match sustaining_range(params, profile, kind)? {
                    Some(r) => {
                        ranges.push_str(&format!("{label},{kind},{},{}\n", r.lo, r.hi));
                        out.metric(format!("{kind}_scale_lo[{label}]"), r.lo);
                    }
                    None => ranges.push_str(&format!("{label},{kind},,\n")),
                }
            }
        }
        let budget = sharing_budget(params, profile)?;
        for i in 0..params.n() {
            let k = group_kindness(params, profile, i)?;
            let closed = kindness_closed_form(params, profile, i)?.map(|v| v.to_string()).unwrap_or_default();
            kindness.push_str(&format!("{label},{i},{k},{closed},{budget}\n"));
        }
        let _ = writeln!(out.summary, "  {label}: {}", verdicts.join(", "));
    }
    out.file("audit.csv", audit);
    out.file("sustaining_ranges.csv", ranges);
    out.file("kindness.csv", kindness);

    if let Some(channel) = &run.channel {
        let mut csv = String::from("profile,player,mean_payoff,std_error\n");
        for profile in &run.profiles {
            let est = sample_material_payoff(params, channel, profile, run.samples, seed)?;
            let label = profile_label(profile);
            for (i, (m, se)) in est.mean.iter().zip(&est.std_error).enumerate() {
                csv.push_str(&format!("{label},{i},{m},{se}\n"));
            }
        }
        out.file("sampled_payoffs.csv", csv);
    }

    if let Some((game, lambdas1, lambdas2)) = &run.pair {
        let mut csv = String::from("lambda1,lambda2,label,table_label,agrees_with_table,band1,band2\n");
        for &l1 in lambdas1 {
            for &l2 in lambdas2 {
                let r = classify_outcome(&game.with_lambdas(l1, l2))?;
                let table = r.table_label.map(|t| t.to_string()).unwrap_or_default();
                let agrees = r.agrees_with_table.map(|a| a.to_string()).unwrap_or_default();
                csv.push_str(&format!(
                    "{l1},{l2},{},{table},{agrees},{:?},{:?}\n",
                    r.label, r.bands.0, r.bands.1
                ));
            }
        }
        out.file("pair_outcomes.csv", csv);
        out.json("pair_thresholds.json", &classify_outcome(game)?.thresholds)
            .map_err(|e| empathy_core::Error::Parse(e.to_string()))?;
    }
    Ok(())
}

fn run_energy(
    out: &mut Outcome,
    model: &MarketModel,
    lambda: f64,
    lambdas: &[f64],
    hours: usize,
    options: SolverOptions,
) -> empathy_core::Result<()> {
    let eq = demand_equilibrium_with(model, lambda, options)?;
    let mut csv = String::from("consumer,demand\n");
    for (i, d) in eq.demands.iter().enumerate() {
        csv.push_str(&format!("{i},{d}\n"));
    }
    out.file("equilibrium.csv", csv);
    out.metric("total_demand", eq.total());
    out.metric("foc_residual", eq.residual);
    let _ = writeln!(
        out.summary,
        "energy: lambda = {lambda}, total demand {} (residual {}, {} iterations)",
        eq.total(),
        eq.residual,
        eq.iterations
    );
    if hours > 0 {
        let day = two_peak_day(hours);
        let own = peak_comparison(model, &day, &[lambda])?;
        out.metric("peak_demand", own.peaks()[0]);
        let _ = writeln!(out.summary, "  peak demand over {hours} hours: {}", own.peaks()[0]);
        if !lambdas.is_empty() {
            let table = peak_comparison(model, &day, lambdas)?;
            let mut peaks = String::from("lambda,peak_demand\n");
            for (l, p) in lambdas.iter().zip(table.peaks()) {
                peaks.push_str(&format!("{l},{p}\n"));
            }
            out.file("day.csv", table.to_csv());
            out.file("peaks.csv", peaks);
        }
    }
    Ok(())
}

fn run_lq(out: &mut Outcome, params: &LqGameParams, paths: usize, noise: Noise, seed: u64) -> empathy_core::Result<()> {
    let schedule = riccati_sweep(params)?;
    out.file("riccati.csv", schedule.to_csv());
    let analytic = analytic_cost(params, &schedule);
    let forward = forward_cost(params, &schedule);
    let mean = mean_state(params, &schedule);
    let sim = if paths > 0 { Some(simulate_with(params, &schedule, paths, seed, noise)?) } else { None };

    let mut costs = String::from("player,analytic_cost,forward_cost,simulated_cost,std_error\n");
    let _ = writeln!(out.summary, "lq: {} players, horizon {}", params.n(), params.horizon);
    for i in 0..params.n() {
        let (m, se) = sim.as_ref().map(|s| (s.mean_cost[i].to_string(), s.std_error[i].to_string())).unwrap_or_default();
        costs.push_str(&format!("{i},{},{},{m},{se}\n", analytic[i], forward[i]));
        out.metric(format!("gamma0[{i}]"), schedule.gamma[i][0]);
        out.metric(format!("cost[{i}]"), analytic[i]);
        let _ = writeln!(out.summary, "  player {i}: cost {}, gamma_0 {}", analytic[i], schedule.gamma[i][0]);
    }
    out.file("costs.csv", costs);

    let mut states = String::from("t,mean_state,simulated_mean,simulated_var\n");
    for (t, m) in mean.iter().enumerate() {
        let (sm, sv) = sim.as_ref().map(|s| (s.state_mean[t].to_string(), s.state_var[t].to_string())).unwrap_or_default();
        states.push_str(&format!("{t},{m},{sm},{sv}\n"));
    }
    out.file("mean_state.csv", states);
    if let Some(last) = mean.last() {
        out.metric("mean_state_final", *last);
    }
    Ok(())
}

#[derive(Serialize)]
struct MeasureDpSummary {
    converged: bool,
    iterations: usize,
    sweeps: usize,
    last_change: f64,
    gaps: Vec<f64>,
    values: Vec<f64>,
    resolution_check: Option<ResolutionSummary>,
}

#[derive(Serialize)]
struct ResolutionSummary {
    fine: u32,
    coarse: u32,
    max_change: f64,
}

fn run_measure_dp(out: &mut Outcome, run: &MeasureDpRun) -> Result<(), CliError> {
    let fail = |e: empathy_core::Error| failed("measure_dp", e);
    let game = &run.game;
    let start = run
        .start
        .as_ref()
        .map(|rules| PolicyProfile::constant(game, &run.grid, rules));
    let eq = mean_field_equilibrium(game, &run.grid, &run.initial, start, &run.options).map_err(fail)?;

    for player in 0..game.num_players() {
        let values = evaluate_policy(game, &eq.profile, player, &run.grid).map_err(fail)?;
        let sol = DppSolution { grid: run.grid.clone(), values, policy: eq.profile.players[player].clone() };
        out.file(&format!("values_player{player}.csv"), sol.values_csv());
        out.file(&format!("policy_player{player}.csv"), sol.policy_csv());
    }
    let mut flow = String::from("t");
    for s in 0..game.num_states() {
        let _ = write!(flow, ",m_{s}");
    }
    flow.push('\n');
    for (t, m) in eq.flow.iter().enumerate() {
        let row: Vec<String> = m.weights().iter().map(f64::to_string).collect();
        let _ = writeln!(flow, "{t},{}", row.join(","));
    }
    out.file("flow.csv", flow);

    let check = if run.resolution_check {
        let c = resolution_check(game, &eq.profile, 0, &run.grid, &run.options.dpp).map_err(fail)?;
        out.metric("resolution_change", c.max_change);
        Some(ResolutionSummary { fine: c.fine, coarse: c.coarse, max_change: c.max_change })
    } else {
        None
    };
    for (i, (g, v)) in eq.gaps.iter().zip(&eq.values).enumerate() {
        out.metric(format!("gap[{i}]"), *g);
        out.metric(format!("value[{i}]"), *v);
    }
    out.metric("converged", f64::from(u8::from(eq.converged)));
    let _ = writeln!(
        out.summary,
        "measure_dp: {} states, resolution {}, converged {} after {} sweeps; gaps {:?}",
        game.num_states(),
        run.grid.resolution(),
        eq.converged,
        eq.sweeps,
        eq.gaps
    );
    out.json(
        "equilibrium.json",
        &MeasureDpSummary {
            converged: eq.converged,
            iterations: eq.iterations,
            sweeps: eq.sweeps,
            last_change: eq.last_change,
            gaps: eq.gaps.clone(),
            values: eq.values.clone(),
            resolution_check: check,
        },
    )
}

fn write_iri(out: &mut Outcome, report: &ExperimentReport) -> Result<(), CliError> {
    out.file("outcomes.csv", report.outcomes_csv());
    out.file("correlations.csv", report.correlations_csv());
    out.file("cooperation.csv", report.cooperation_csv());
    out.json("report.json", report)?;
    for c in &report.correlations {
        if let Some(v) = c.value {
            out.metric(format!("corr[{}-{}]", c.first, c.second), v);
        }
    }
    for level in &report.cooperation {
        if let Some(v) = level.level {
            let scales: Vec<String> = level.scales.iter().map(ToString::to_string).collect();
            out.metric(format!("cooperation[{}]", scales.join("+")), v);
        }
    }
    out.summary = report.render_text();
    Ok(())
}
