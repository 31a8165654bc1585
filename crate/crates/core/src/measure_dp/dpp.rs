//! Backward induction on the simplex grid, policy evaluation and iterated
//! best response.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::measure_dp::game::{check_initial, empathic_value, step, terminal_value, DecisionRule, FiniteMftGame};
use crate::measure_dp::simplex::{SimplexGrid, SimplexMeasure};

/// Supplies every player's decision rule as a function of time and state law.
pub trait FeedbackPolicy: Sync {
    fn rule(&self, player: usize, t: usize, measure: &[f64]) -> Result<DecisionRule>;
}

/// Time-invariant, measure-independent rules.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantPolicy(pub Vec<DecisionRule>);

impl FeedbackPolicy for ConstantPolicy {
    fn rule(&self, player: usize, _t: usize, _measure: &[f64]) -> Result<DecisionRule> {
        self.0
            .get(player)
            .cloned()
            .ok_or_else(|| Error::Dimension(format!("no rule for player {player}")))
    }
}

/// One player's rules on the grid, `rules[t][node]`.
pub type PlayerPolicy = Vec<Vec<DecisionRule>>;

/// Grid feedback rules for all players. Off-grid measures use the rule of the
/// heaviest vertex of the enclosing cell.
#[derive(Debug, Clone)]
pub struct PolicyProfile {
    pub grid: SimplexGrid,
    pub players: Vec<PlayerPolicy>,
}

impl PolicyProfile {
    /// Every player plays its first action everywhere.
    pub fn pure_first<G: FiniteMftGame + ?Sized>(game: &G, grid: &SimplexGrid) -> Self {
        let players = (0..game.num_players())
            .map(|i| {
                let mut row = vec![0.0; game.num_actions(i)];
                row[0] = 1.0;
                vec![vec![vec![row; game.num_states()]; grid.len()]; game.horizon()]
            })
            .collect();
        Self {
            grid: grid.clone(),
            players,
        }
    }

    /// Every player plays the given rule at every time and measure.
    pub fn constant<G: FiniteMftGame + ?Sized>(game: &G, grid: &SimplexGrid, rules: &[DecisionRule]) -> Self {
        let players = rules
            .iter()
            .map(|r| vec![vec![r.clone(); grid.len()]; game.horizon()])
            .collect();
        Self {
            grid: grid.clone(),
            players,
        }
    }
}

impl FeedbackPolicy for PolicyProfile {
    fn rule(&self, player: usize, t: usize, measure: &[f64]) -> Result<DecisionRule> {
        let node = match self.grid.find(measure) {
            Some(k) => k,
            None => self.grid.dominant_vertex(measure)?,
        };
        self.players
            .get(player)
            .and_then(|p| p.get(t))
            .map(|rules| rules[node].clone())
            .ok_or_else(|| Error::Dimension(format!("no rule for player {player} at t = {t}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DppOptions {
    /// Probability step of the mixed-action lattice searched first.
    pub mix_step: f64,
    /// Smallest mass transfer tried when refining the incumbent.
    pub refine_min_step: f64,
    /// Improvement needed to replace the incumbent.
    pub tie_tol: f64,
}

impl Default for DppOptions {
    fn default() -> Self {
        Self {
            mix_step: 0.1,
            refine_min_step: 1e-3,
            tie_tol: 1e-12,
        }
    }
}

impl DppOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.mix_step > 0.0 && self.mix_step <= 1.0) {
            return Err(invalid("mix_step", "must lie in (0, 1]"));
        }
        let steps = (1.0 / self.mix_step).round();
        if (steps * self.mix_step - 1.0).abs() > 1e-9 {
            return Err(invalid("mix_step", "must divide 1"));
        }
        if !(self.tie_tol >= 0.0) {
            return Err(invalid("tie_tol", "must be non-negative"));
        }
        Ok(())
    }
}

/// Value table `values[t][node]` for `t = 0..=T` and the maximizing rules
/// `policy[t][node]` for `t < T`.
#[derive(Debug, Clone)]
pub struct DppSolution {
    pub grid: SimplexGrid,
    pub values: Vec<Vec<f64>>,
    pub policy: PlayerPolicy,
}

impl DppSolution {
    pub fn value_at(&self, t: usize, m: &[f64]) -> Result<f64> {
        self.grid.interpolate(&self.values[t], m)
    }

    /// `t,m_0,..,m_{d-1},value` rows.
    pub fn values_csv(&self) -> String {
        let d = self.grid.dim();
        let mut out = String::from("t");
        for s in 0..d {
            let _ = write!(out, ",m_{s}");
        }
        out.push_str(",value\n");
        for (t, row) in self.values.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let _ = write!(out, "{t}");
                for w in self.grid.node(k) {
                    let _ = write!(out, ",{w}");
                }
                let _ = writeln!(out, ",{v}");
            }
        }
        out
    }

    /// `t,m_0,..,state,action,probability` rows.
    pub fn policy_csv(&self) -> String {
        let d = self.grid.dim();
        let mut out = String::from("t");
        for s in 0..d {
            let _ = write!(out, ",m_{s}");
        }
        out.push_str(",state,action,probability\n");
        for (t, rules) in self.policy.iter().enumerate() {
            for (k, rule) in rules.iter().enumerate() {
                let node = self.grid.node(k);
                for (s, row) in rule.iter().enumerate() {
                    for (a, p) in row.iter().enumerate() {
                        let _ = write!(out, "{t}");
                        for w in &node {
                            let _ = write!(out, ",{w}");
                        }
                        let _ = writeln!(out, ",{s},{a},{p}");
                    }
                }
            }
        }
        out
    }
}

/// Compositions of `total` into `parts`, first part descending.
fn lattice(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(total: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            rec(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

/// Mixed decision rules on the lattice, in search order. The first candidate
/// plays action 0 in every state.
fn candidate_rules(states: usize, actions: usize, mix_step: f64) -> Vec<DecisionRule> {
    let steps = (1.0 / mix_step).round() as u32;
    let mixes: Vec<Vec<f64>> = lattice(steps, actions)
        .into_iter()
        .map(|c| c.into_iter().map(|x| f64::from(x) / f64::from(steps)).collect())
        .collect();
    let mut out: Vec<DecisionRule> = vec![Vec::new()];
    for _ in 0..states {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                mixes.iter().map(move |mix| {
                    let mut r = prefix.clone();
                    r.push(mix.clone());
                    r
                })
            })
            .collect();
    }
    out
}

struct Stage<'a, G: ?Sized> {
    game: &'a G,
    grid: &'a SimplexGrid,
    player: usize,
    t: usize,
    next_values: &'a [f64],
}

impl<G: FiniteMftGame + ?Sized> Stage<'_, G> {
    /// Empathic stage payoff plus the interpolated continuation value.
    fn q_value(&self, m: &[f64], others: &[DecisionRule], own: &DecisionRule) -> Result<f64> {
        let mut rules: Vec<&DecisionRule> = others.iter().collect();
        rules[self.player] = own;
        let out = step(self.game, self.t, m, &rules)?;
        let stage = empathic_value(self.game.empathy(), &out.payoffs, self.player);
        Ok(stage + self.grid.interpolate(self.next_values, &out.next)?)
    }
}

fn terminal_values<G: FiniteMftGame + ?Sized>(game: &G, grid: &SimplexGrid, player: usize) -> Vec<f64> {
    (0..grid.len()).map(|k| terminal_value(game, player, &grid.node(k))).collect()
}

fn others_at<G: FiniteMftGame + ?Sized>(game: &G, others: &dyn FeedbackPolicy, t: usize, m: &[f64]) -> Result<Vec<DecisionRule>> {
    (0..game.num_players()).map(|j| others.rule(j, t, m)).collect()
}

fn check_grid<G: FiniteMftGame + ?Sized>(game: &G, grid: &SimplexGrid, player: usize) -> Result<()> {
    if grid.dim() != game.num_states() {
        return Err(Error::Dimension(format!("grid over {} states for a {}-state game", grid.dim(), game.num_states())));
    }
    if player >= game.num_players() {
        return Err(Error::Dimension(format!("player {player} of {}", game.num_players())));
    }
    Ok(())
}

/// Best response of `player` on the grid against the rules that `others`
/// assigns to the remaining players. Entries of `others` for `player` itself
/// are ignored.
pub fn solve_dpp<G: FiniteMftGame + ?Sized>(
    game: &G,
    others: &dyn FeedbackPolicy,
    player: usize,
    grid: &SimplexGrid,
    options: &DppOptions,
) -> Result<DppSolution> {
    check_grid(game, grid, player)?;
    options.validate()?;
    let horizon = game.horizon();
    let (ns, na) = (game.num_states(), game.num_actions(player));
    let candidates = candidate_rules(ns, na, options.mix_step);
    let mut values = vec![Vec::new(); horizon + 1];
    values[horizon] = terminal_values(game, grid, player);
    let mut policy = vec![Vec::new(); horizon];
    for t in (0..horizon).rev() {
        let stage = Stage {
            game,
            grid,
            player,
            t,
            next_values: &values[t + 1],
        };
        let solved: Vec<(f64, DecisionRule)> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let m = grid.node(k);
                let others = others_at(game, others, t, &m)?;
                best_rule(&stage, &m, &others, &candidates, options)
            })
            .collect::<Result<_>>()?;
        let (v, p): (Vec<f64>, Vec<DecisionRule>) = solved.into_iter().unzip();
        values[t] = v;
        policy[t] = p;
    }
    Ok(DppSolution {
        grid: grid.clone(),
        values,
        policy,
    })
}

fn best_rule<G: FiniteMftGame + ?Sized>(
    stage: &Stage<G>,
    m: &[f64],
    others: &[DecisionRule],
    candidates: &[DecisionRule],
    options: &DppOptions,
) -> Result<(f64, DecisionRule)> {
    let mut best_idx = 0;
    let mut best = stage.q_value(m, others, &candidates[0])?;
    for (idx, c) in candidates.iter().enumerate().skip(1) {
        let q = stage.q_value(m, others, c)?;
        if q > best + options.tie_tol {
            best = q;
            best_idx = idx;
        }
    }
    let mut rule = candidates[best_idx].clone();
    // local refinement: shift mass between action pairs with shrinking steps
    let na = rule.first().map_or(0, Vec::len);
    let mut delta = options.mix_step / 2.0;
    while delta >= options.refine_min_step && na > 1 {
        let mut improved = true;
        while improved {
            improved = false;
            for s in 0..rule.len() {
                for from in 0..na {
                    for to in 0..na {
                        if from == to || rule[s][from] < delta - 1e-15 {
                            continue;
                        }
                        let mut trial = rule.clone();
                        trial[s][from] = (trial[s][from] - delta).max(0.0);
                        trial[s][to] += delta;
                        let q = stage.q_value(m, others, &trial)?;
                        if q > best + options.tie_tol {
                            best = q;
                            rule = trial;
                            improved = true;
                        }
                    }
                }
            }
        }
        delta /= 2.0;
    }
    Ok((best, rule))
}

/// Grid values of `player` when everyone follows `profile`.
pub fn evaluate_policy<G: FiniteMftGame + ?Sized>(
    game: &G,
    profile: &dyn FeedbackPolicy,
    player: usize,
    grid: &SimplexGrid,
) -> Result<Vec<Vec<f64>>> {
    check_grid(game, grid, player)?;
    let horizon = game.horizon();
    let mut values = vec![Vec::new(); horizon + 1];
    values[horizon] = terminal_values(game, grid, player);
    for t in (0..horizon).rev() {
        let stage = Stage {
            game,
            grid,
            player,
            t,
            next_values: &values[t + 1],
        };
        values[t] = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let m = grid.node(k);
                let rules = others_at(game, profile, t, &m)?;
                stage.q_value(&m, &rules, &rules[player])
            })
            .collect::<Result<_>>()?;
    }
    Ok(values)
}

/// Forward state laws `m_0, .., m_T` under `profile`.
pub fn measure_flow<G: FiniteMftGame + ?Sized>(
    game: &G,
    profile: &dyn FeedbackPolicy,
    initial: &SimplexMeasure,
) -> Result<Vec<SimplexMeasure>> {
    check_initial(game, initial.weights())?;
    let mut flow = vec![initial.clone()];
    for t in 0..game.horizon() {
        let m = flow[t].weights();
        let rules = others_at(game, profile, t, m)?;
        let refs: Vec<&DecisionRule> = rules.iter().collect();
        let next = step(game, t, m, &refs)?.next;
        flow.push(SimplexMeasure::new(next)?);
    }
    Ok(flow)
}

#[derive(Debug, Clone)]
pub struct EquilibriumOptions {
    pub max_iter: usize,
    /// Largest rule change accepted as a fixed point.
    pub tol: f64,
    pub dpp: DppOptions,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-9,
            dpp: DppOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub profile: PolicyProfile,
    pub flow: Vec<SimplexMeasure>,
    /// Best-response value minus the profile's own value at the initial law.
    pub gaps: Vec<f64>,
    /// Each player's value at the initial law under the profile.
    pub values: Vec<f64>,
    pub converged: bool,
    /// Sweep in which the final profile was first reached (0 if the initial
    /// profile was already a fixed point).
    pub iterations: usize,
    pub sweeps: usize,
    /// Largest rule change in the last sweep.
    pub last_change: f64,
}

fn rule_distance(a: &PlayerPolicy, b: &PlayerPolicy) -> f64 {
    a.iter()
        .flatten()
        .flatten()
        .flatten()
        .zip(b.iter().flatten().flatten().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Iterated best response in Gauss-Seidel order, starting from `start` or,
/// when absent, from everyone playing action 0. Failure to settle within
/// `max_iter` sweeps is reported, not raised.
pub fn mean_field_equilibrium<G: FiniteMftGame + ?Sized>(
    game: &G,
    grid: &SimplexGrid,
    initial: &SimplexMeasure,
    start: Option<PolicyProfile>,
    options: &EquilibriumOptions,
) -> Result<EquilibriumReport> {
    check_initial(game, initial.weights())?;
    let mut profile = start.unwrap_or_else(|| PolicyProfile::pure_first(game, grid));
    if profile.players.len() != game.num_players() || profile.grid.len() != grid.len() {
        return Err(Error::Dimension("starting profile does not match the game and grid".into()));
    }
    let mut converged = false;
    let mut iterations = 0;
    let mut sweeps = 0;
    let mut last_change = f64::INFINITY;
    while sweeps < options.max_iter {
        sweeps += 1;
        let mut change: f64 = 0.0;
        for i in 0..game.num_players() {
            let br = solve_dpp(game, &profile, i, grid, &options.dpp)?;
            change = change.max(rule_distance(&profile.players[i], &br.policy));
            profile.players[i] = br.policy;
        }
        last_change = change;
        log::debug!("best-response sweep {sweeps}: rule change {change:e}");
        if change <= options.tol {
            converged = true;
            break;
        }
        iterations = sweeps;
    }
    let mut gaps = Vec::with_capacity(game.num_players());
    let mut values = Vec::with_capacity(game.num_players());
    for i in 0..game.num_players() {
        let br = solve_dpp(game, &profile, i, grid, &options.dpp)?;
        let own = evaluate_policy(game, &profile, i, grid)?;
        let v = grid.interpolate(&own[0], initial.weights())?;
        gaps.push(br.value_at(0, initial.weights())? - v);
        values.push(v);
    }
    let flow = measure_flow(game, &profile, initial)?;
    Ok(EquilibriumReport {
        profile,
        flow,
        gaps,
        values,
        converged,
        iterations,
        sweeps,
        last_change,
    })
}

/// Largest `|v(m) - sum_s v(e_s) m(s)|` over the grid, where `e_s` are the
/// point masses. Zero for mean-field-free games up to rounding.
pub fn linearity_gap(grid: &SimplexGrid, values: &[f64]) -> f64 {
    let vertex_values: Vec<f64> = grid.vertex_nodes().into_iter().map(|k| values[k]).collect();
    (0..grid.len())
        .map(|k| {
            let linear: f64 = grid.node(k).iter().zip(&vertex_values).map(|(m, v)| m * v).sum();
            (values[k] - linear).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolutionCheck {
    pub fine: u32,
    pub coarse: u32,
    /// Largest value difference at nodes shared by both grids, over all times.
    pub max_change: f64,
}

/// Solves on `grid` and on a grid of half the resolution and compares the
/// values where the coarse nodes sit.
pub fn resolution_check<G: FiniteMftGame + ?Sized>(
    game: &G,
    others: &dyn FeedbackPolicy,
    player: usize,
    grid: &SimplexGrid,
    options: &DppOptions,
) -> Result<ResolutionCheck> {
    if grid.resolution() < 2 {
        return Err(invalid("resolution", "needs at least 2 to halve"));
    }
    let coarse = SimplexGrid::new(grid.dim(), grid.resolution() / 2)?;
    let fine_sol = solve_dpp(game, others, player, grid, options)?;
    let coarse_sol = solve_dpp(game, others, player, &coarse, options)?;
    let mut max_change: f64 = 0.0;
    for t in 0..=game.horizon() {
        for k in 0..coarse.len() {
            let m = coarse.node(k);
            let fine_v = fine_sol.value_at(t, &m)?;
            max_change = max_change.max((fine_v - coarse_sol.values[t][k]).abs());
        }
    }
    Ok(ResolutionCheck {
        fine: grid.resolution(),
        coarse: coarse.resolution(),
        max_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empathy::EmpathyMatrix;
    use crate::measure_dp::game::TabularGame;
    use proptest::prelude::*;

    fn labels(p: &str, k: usize) -> Vec<String> {
        (0..k).map(|i| format!("{p}{i}")).collect()
    }

    /// One player, two states, action 0 stays and action 1 switches.
    fn switching_game(base: [[f64; 2]; 2], crowding: [f64; 2], horizon: usize) -> TabularGame {
        TabularGame {
            states: labels("s", 2),
            actions: vec![labels("a", 2)],
            horizon,
            payoff: vec![vec![base[0].to_vec(), base[1].to_vec()]],
            crowding: vec![crowding.to_vec()],
            terminal: vec![vec![0.3, -0.1]],
            kernel: vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![0.0, 1.0], vec![1.0, 0.0]]],
            empathy: EmpathyMatrix::zeros(1),
        }
    }

    #[test]
    fn candidates_start_with_action_zero() {
        let c = candidate_rules(2, 2, 0.5);
        assert_eq!(c.len(), 9);
        assert_eq!(c[0], vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(c[8], vec![vec![0.0, 1.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn one_step_value_is_the_best_direct_evaluation() {
        let g = switching_game([[1.0, 0.2], [0.0, 0.9]], [0.5, 0.0], 1);
        let grid = SimplexGrid::new(2, 4).unwrap();
        let none = ConstantPolicy(vec![vec![vec![1.0, 0.0]; 2]]);
        let sol = solve_dpp(&g, &none, 0, &grid, &DppOptions::default()).unwrap();
        for k in 0..grid.len() {
            let m = grid.node(k);
            let mut direct = f64::NEG_INFINITY;
            for a0 in 0..2 {
                for a1 in 0..2 {
                    let acts = [a0, a1];
                    let mut next = [0.0; 2];
                    let mut v = 0.0;
                    for s in 0..2 {
                        v += m[s] * (g.payoff[0][s][acts[s]] + g.crowding[0][s] * m[s]);
                        let to = if acts[s] == 0 { s } else { 1 - s };
                        next[to] += m[s];
                    }
                    v += next[0] * 0.3 - next[1] * 0.1;
                    direct = direct.max(v);
                }
            }
            assert!((sol.values[0][k] - direct).abs() < 1e-12, "node {k}");
        }
    }

    #[test]
    fn mean_field_free_values_are_linear() {
        let g = switching_game([[1.0, 0.2], [0.0, 0.9]], [0.0, 0.0], 3);
        let grid = SimplexGrid::new(2, 10).unwrap();
        let none = ConstantPolicy(vec![vec![vec![1.0, 0.0]; 2]]);
        let sol = solve_dpp(&g, &none, 0, &grid, &DppOptions::default()).unwrap();
        for t in 0..=3 {
            assert!(linearity_gap(&grid, &sol.values[t]) < 1e-12);
        }
    }

    #[test]
    fn single_player_equilibrium_is_the_best_response() {
        let g = switching_game([[1.0, 0.2], [0.0, 0.9]], [0.5, 0.2], 2);
        let grid = SimplexGrid::new(2, 6).unwrap();
        let m0 = SimplexMeasure::new(vec![0.5, 0.5]).unwrap();
        let report = mean_field_equilibrium(&g, &grid, &m0, None, &EquilibriumOptions::default()).unwrap();
        assert!(report.converged);
        assert!(report.iterations <= 1);
        assert!(report.gaps[0].abs() < 1e-12);
        let none = ConstantPolicy(vec![vec![vec![1.0, 0.0]; 2]]);
        let br = solve_dpp(&g, &none, 0, &grid, &DppOptions::default()).unwrap();
        assert_eq!(report.profile.players[0], br.policy);
        assert_eq!(report.flow.len(), 3);
    }

    #[test]
    fn csv_exports_have_one_row_per_entry() {
        let g = switching_game([[1.0, 0.2], [0.0, 0.9]], [0.0, 0.0], 1);
        let grid = SimplexGrid::new(2, 2).unwrap();
        let none = ConstantPolicy(vec![vec![vec![1.0, 0.0]; 2]]);
        let sol = solve_dpp(&g, &none, 0, &grid, &DppOptions::default()).unwrap();
        assert_eq!(sol.values_csv().lines().count(), 1 + 2 * 3);
        assert_eq!(sol.policy_csv().lines().count(), 1 + 3 * 2 * 2);
        assert!(sol.values_csv().starts_with("t,m_0,m_1,value\n"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn raising_payoffs_never_lowers_values(
            base in prop::array::uniform2(prop::array::uniform2(-1.0..1.0f64)),
            bump in prop::array::uniform2(prop::array::uniform2(0.0..0.5f64)),
            crowd in prop::array::uniform2(0.0..1.0f64),
        ) {
            let grid = SimplexGrid::new(2, 4).unwrap();
            let none = ConstantPolicy(vec![vec![vec![1.0, 0.0]; 2]]);
            let opts = DppOptions { mix_step: 0.25, ..DppOptions::default() };
            let low = solve_dpp(&switching_game(base, crowd, 2), &none, 0, &grid, &opts).unwrap();
            let mut raised = base;
            for s in 0..2 { for a in 0..2 { raised[s][a] += bump[s][a]; } }
            let high = solve_dpp(&switching_game(raised, crowd, 2), &none, 0, &grid, &opts).unwrap();
            for k in 0..grid.len() {
                prop_assert!(high.values[0][k] >= low.values[0][k] - 1e-12);
            }
        }
    }
}
