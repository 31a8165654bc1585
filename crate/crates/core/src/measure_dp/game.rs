//! Finite mean-field-type games on a common state and their one-step
//! evaluation under decision rules.

use serde::{Deserialize, Serialize};

use crate::empathy::EmpathyMatrix;
use crate::error::{invalid, Error, Result};
use crate::measure_dp::simplex::{check_measure, SimplexMeasure, MASS_TOL};

/// A player's mixed action in each state, `rule[state][action]`.
pub type DecisionRule = Vec<Vec<f64>>;

/// The population quantities a payoff or kernel may depend on.
#[derive(Debug, Clone, Copy)]
pub struct MeanField<'a> {
    /// Law of the state.
    pub states: &'a [f64],
    /// Each player's action marginal.
    pub actions: &'a [Vec<f64>],
}

pub trait FiniteMftGame: Sync {
    fn num_states(&self) -> usize;
    fn num_players(&self) -> usize;
    fn num_actions(&self, player: usize) -> usize;
    fn horizon(&self) -> usize;
    fn empathy(&self) -> &EmpathyMatrix;
    /// Material stage payoff of `player` at time `t` in `state` under the
    /// pure action profile `actions`.
    fn payoff(&self, player: usize, t: usize, state: usize, mf: MeanField, actions: &[usize]) -> f64;
    fn terminal(&self, player: usize, state: usize, measure: &[f64]) -> f64;
    /// Distribution of the next state.
    fn transition(&self, t: usize, state: usize, mf: MeanField, actions: &[usize]) -> Vec<f64>;
}

/// Expected material payoffs of all players and the next-state law after one
/// step from `measure` under `rules` (one decision rule per player).
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub payoffs: Vec<f64>,
    pub next: Vec<f64>,
    pub action_marginals: Vec<Vec<f64>>,
}

pub fn action_marginals(measure: &[f64], rules: &[&DecisionRule]) -> Vec<Vec<f64>> {
    rules
        .iter()
        .map(|rule| {
            let k = rule[0].len();
            (0..k).map(|a| measure.iter().zip(rule.iter()).map(|(m, r)| m * r[a]).sum()).collect()
        })
        .collect()
}

fn check_row(row: &[f64], what: &str) -> Result<()> {
    if row.iter().any(|p| !p.is_finite() || *p < -MASS_TOL) {
        return Err(Error::Kernel(format!("{what} has a negative or non-finite entry: {row:?}")));
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::Kernel(format!("{what} sums to {total}")));
    }
    Ok(())
}

fn check_rules<G: FiniteMftGame + ?Sized>(game: &G, rules: &[&DecisionRule]) -> Result<()> {
    if rules.len() != game.num_players() {
        return Err(Error::Dimension(format!("{} rules for {} players", rules.len(), game.num_players())));
    }
    for (i, rule) in rules.iter().enumerate() {
        if rule.len() != game.num_states() || rule.iter().any(|r| r.len() != game.num_actions(i)) {
            return Err(Error::Dimension(format!("decision rule of player {i} has the wrong shape")));
        }
        for row in rule.iter() {
            if row.iter().any(|p| *p < -MASS_TOL) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(invalid("rule", format!("player {i} plays {row:?}, not a mixed action")));
            }
        }
    }
    Ok(())
}

pub fn step<G: FiniteMftGame + ?Sized>(game: &G, t: usize, measure: &[f64], rules: &[&DecisionRule]) -> Result<StepOutcome> {
    let n = game.num_players();
    let ns = game.num_states();
    let marginals = action_marginals(measure, rules);
    let mf = MeanField {
        states: measure,
        actions: &marginals,
    };
    let mut payoffs = vec![0.0; n];
    let mut next = vec![0.0; ns];
    let mut profile = vec![0usize; n];
    for s in 0..ns {
        let ms = measure[s];
        if ms <= 0.0 {
            continue;
        }
        profile.iter_mut().for_each(|a| *a = 0);
        loop {
            let prob: f64 = (0..n).map(|i| rules[i][s][profile[i]]).product();
            if prob > 0.0 {
                let w = ms * prob;
                for (i, p) in payoffs.iter_mut().enumerate() {
                    *p += w * game.payoff(i, t, s, mf, &profile);
                }
                let row = game.transition(t, s, mf, &profile);
                if row.len() != ns {
                    return Err(Error::Kernel(format!("row of length {} for {ns} states", row.len())));
                }
                check_row(&row, &format!("kernel row at t = {t}, state {s}, actions {profile:?}"))?;
                for (x, q) in next.iter_mut().zip(&row) {
                    *x += w * q;
                }
            }
            // odometer over joint pure profiles
            let mut k = n;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                profile[k] += 1;
                if profile[k] < game.num_actions(k) {
                    break;
                }
                profile[k] = 0;
                if k == 0 {
                    k = usize::MAX;
                    break;
                }
            }
            if k == usize::MAX || n == 0 {
                break;
            }
        }
    }
    let total: f64 = next.iter().sum();
    if total > 0.0 {
        next.iter_mut().for_each(|x| *x = x.max(0.0) / total);
    }
    Ok(StepOutcome {
        payoffs,
        next,
        action_marginals: marginals,
    })
}

/// Pushforward of the state law under the given decision rules.
pub fn propagate<G: FiniteMftGame + ?Sized>(
    game: &G,
    t: usize,
    measure: &SimplexMeasure,
    rules: &[&DecisionRule],
) -> Result<SimplexMeasure> {
    if measure.dim() != game.num_states() {
        return Err(Error::Dimension("measure and state set differ in size".into()));
    }
    check_rules(game, rules)?;
    let out = step(game, t, measure.weights(), rules)?;
    SimplexMeasure::new(out.next)
}

/// `r_i + sum_j lambda_ij r_j` for one player.
pub(crate) fn empathic_value(lambda: &EmpathyMatrix, material: &[f64], player: usize) -> f64 {
    material[player]
        + (0..material.len())
            .filter(|&j| j != player)
            .map(|j| lambda.get(player, j) * material[j])
            .sum::<f64>()
}

/// Expected empathic terminal payoff of `player` at `measure`.
pub fn terminal_value<G: FiniteMftGame + ?Sized>(game: &G, player: usize, measure: &[f64]) -> f64 {
    let n = game.num_players();
    (0..game.num_states())
        .map(|s| {
            let material: Vec<f64> = (0..n).map(|i| game.terminal(i, s, measure)).collect();
            measure[s] * empathic_value(game.empathy(), &material, player)
        })
        .sum()
}

/// A game given by tables. Joint action profiles are indexed row-major with
/// player 0 most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularGame {
    pub states: Vec<String>,
    /// Action labels per player.
    pub actions: Vec<Vec<String>>,
    pub horizon: usize,
    /// `payoff[player][state][joint]`.
    pub payoff: Vec<Vec<Vec<f64>>>,
    /// `crowding[player][state]` adds `crowding * m(state)` to the stage payoff.
    #[serde(default)]
    pub crowding: Vec<Vec<f64>>,
    /// `terminal[player][state]`.
    pub terminal: Vec<Vec<f64>>,
    /// `kernel[state][joint]` is the next-state distribution.
    pub kernel: Vec<Vec<Vec<f64>>>,
    pub empathy: EmpathyMatrix,
}

impl TabularGame {
    pub fn joint_count(&self) -> usize {
        self.actions.iter().map(Vec::len).product()
    }

    pub fn joint_index(&self, actions: &[usize]) -> usize {
        actions
            .iter()
            .zip(&self.actions)
            .fold(0, |acc, (&a, labels)| acc * labels.len() + a)
    }

    pub fn validate(&self) -> Result<()> {
        let (ns, n) = (self.states.len(), self.actions.len());
        if ns == 0 || n == 0 || self.actions.iter().any(Vec::is_empty) {
            return Err(Error::Dimension("states, players and actions must be non-empty".into()));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be at least 1"));
        }
        let joint = self.joint_count();
        if self.payoff.len() != n || self.payoff.iter().any(|p| p.len() != ns || p.iter().any(|r| r.len() != joint)) {
            return Err(Error::Dimension(format!("payoff must be {n} x {ns} x {joint}")));
        }
        if !self.crowding.is_empty() && (self.crowding.len() != n || self.crowding.iter().any(|c| c.len() != ns)) {
            return Err(Error::Dimension(format!("crowding must be {n} x {ns}")));
        }
        if self.terminal.len() != n || self.terminal.iter().any(|t| t.len() != ns) {
            return Err(Error::Dimension(format!("terminal must be {n} x {ns}")));
        }
        if self.kernel.len() != ns || self.kernel.iter().any(|k| k.len() != joint) {
            return Err(Error::Dimension(format!("kernel must be {ns} x {joint} rows")));
        }
        for (s, rows) in self.kernel.iter().enumerate() {
            for (j, row) in rows.iter().enumerate() {
                if row.len() != ns {
                    return Err(Error::Kernel(format!("row ({s}, {j}) has {} entries", row.len())));
                }
                check_row(row, &format!("kernel row ({s}, {j})"))?;
            }
        }
        if self.empathy.n() != n {
            return Err(Error::Dimension("empathy matrix does not match the player count".into()));
        }
        let values = self.payoff.iter().flatten().flatten().chain(self.terminal.iter().flatten()).chain(self.crowding.iter().flatten());
        if values.into_iter().any(|v| !v.is_finite()) {
            return Err(invalid("payoff", "non-finite entry"));
        }
        Ok(())
    }
}

impl FiniteMftGame for TabularGame {
    fn num_states(&self) -> usize {
        self.states.len()
    }

    fn num_players(&self) -> usize {
        self.actions.len()
    }

    fn num_actions(&self, player: usize) -> usize {
        self.actions[player].len()
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn empathy(&self) -> &EmpathyMatrix {
        &self.empathy
    }

    fn payoff(&self, player: usize, _t: usize, state: usize, mf: MeanField, actions: &[usize]) -> f64 {
        let crowd = self.crowding.get(player).map_or(0.0, |c| c[state] * mf.states[state]);
        self.payoff[player][state][self.joint_index(actions)] + crowd
    }

    fn terminal(&self, player: usize, state: usize, _measure: &[f64]) -> f64 {
        self.terminal[player][state]
    }

    fn transition(&self, _t: usize, state: usize, _mf: MeanField, actions: &[usize]) -> Vec<f64> {
        self.kernel[state][self.joint_index(actions)].clone()
    }
}

/// Checks a measure against a game's state set.
pub fn check_initial<G: FiniteMftGame + ?Sized>(game: &G, m: &[f64]) -> Result<()> {
    if m.len() != game.num_states() {
        return Err(Error::Dimension(format!("initial measure has {} weights for {} states", m.len(), game.num_states())));
    }
    check_measure(m)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    fn labels(prefix: &str, k: usize) -> Vec<String> {
        (0..k).map(|i| format!("{prefix}{i}")).collect()
    }

    /// Single-player game with a fixed kernel for every action.
    pub fn single_player_kernel(kernel: Vec<Vec<f64>>) -> TabularGame {
        let ns = kernel.len();
        TabularGame {
            states: labels("s", ns),
            actions: vec![labels("a", 1)],
            horizon: 1,
            payoff: vec![vec![vec![0.0]; ns]],
            crowding: Vec::new(),
            terminal: vec![vec![0.0; ns]],
            kernel: kernel.into_iter().map(|row| vec![row]).collect(),
            empathy: EmpathyMatrix::zeros(1),
        }
    }
}
