//! Linear-quadratic mean-field-type game over a common scalar state.
//!
//! The state follows `s_{t+1} = alpha s_t + alpha_bar E[s_t] + sum_j b_j a_jt + sigma W_t`.
//! Player `i` minimizes the empathic cost whose state weights are
//! `q_i + sum_{j in N_i} lambda_ij q_j` (and likewise for the mean-state
//! weights); the other players' control costs are not part of it. Equilibrium
//! feedback is `a_it = eta_it (s_t - E s_t) + eta_bar_it E s_t`, found by a
//! backward sweep that solves the coupled gain equations of all players as one
//! linear system per step.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empathy::{empathic_transform, EmpathyMatrix, Neighbors, PayoffProfile};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqGameParams {
    pub horizon: usize,
    pub alpha: f64,
    pub alpha_bar: f64,
    /// Control gains `b_i`.
    pub gains: Vec<f64>,
    pub sigma: f64,
    /// State weights `q[i][t]` for `t = 0..=horizon`; the last entry is terminal.
    pub q: Vec<Vec<f64>>,
    /// Mean-state weights, same layout as `q`.
    pub q_bar: Vec<Vec<f64>>,
    /// Control weights `c[i][t]` for `t = 0..horizon`.
    pub c: Vec<Vec<f64>>,
    pub empathy: EmpathyMatrix,
    #[serde(default)]
    pub neighbors: Neighbors,
    pub mean0: f64,
    pub var0: f64,
}

impl LqGameParams {
    /// Time-invariant weights for every player.
    #[allow(clippy::too_many_arguments)]
    pub fn stationary(
        horizon: usize,
        alpha: f64,
        alpha_bar: f64,
        gains: Vec<f64>,
        sigma: f64,
        q: &[f64],
        q_bar: &[f64],
        c: &[f64],
        empathy: EmpathyMatrix,
        mean0: f64,
        var0: f64,
    ) -> Result<Self> {
        let repeat = |w: &[f64], len: usize| w.iter().map(|&v| vec![v; len]).collect();
        let p = Self {
            horizon,
            alpha,
            alpha_bar,
            gains,
            sigma,
            q: repeat(q, horizon + 1),
            q_bar: repeat(q_bar, horizon + 1),
            c: repeat(c, horizon),
            empathy,
            neighbors: Neighbors::All,
            mean0,
            var0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.gains.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, t) = (self.n(), self.horizon);
        if n == 0 {
            return Err(invalid("gains", "at least one player is required"));
        }
        if t == 0 {
            return Err(invalid("horizon", "must be at least 1"));
        }
        if self.empathy.n() != n {
            return Err(Error::Dimension(format!("{n} players but a {0}x{0} empathy matrix", self.empathy.n())));
        }
        for (name, w, len) in [("q", &self.q, t + 1), ("q_bar", &self.q_bar, t + 1), ("c", &self.c, t)] {
            if w.len() != n || w.iter().any(|row| row.len() != len) {
                return Err(Error::Dimension(format!("{name} must be {n} rows of {len} entries")));
            }
            if w.iter().flatten().any(|v| !v.is_finite()) {
                return Err(invalid(name, "non-finite weight"));
            }
        }
        if let Some(v) = self.c.iter().flatten().find(|&&v| v <= 0.0) {
            return Err(invalid("c", format!("control weight {v} must be positive")));
        }
        let scalars = [("alpha", self.alpha), ("alpha_bar", self.alpha_bar), ("sigma", self.sigma), ("mean0", self.mean0)];
        for (name, v) in scalars {
            if !v.is_finite() {
                return Err(invalid(name, "not finite"));
            }
        }
        if self.gains.iter().any(|b| !b.is_finite()) {
            return Err(invalid("gains", "not finite"));
        }
        if !self.var0.is_finite() || self.var0 < 0.0 {
            return Err(invalid("var0", "must be finite and non-negative"));
        }
        let (ql, qbl) = self.empathic_weights()?;
        for i in 0..n {
            for k in 0..=t {
                if ql[i][k] < 0.0 {
                    return Err(invalid("q", format!("empathic state weight of player {i} at t = {k} is negative")));
                }
                if ql[i][k] + qbl[i][k] < 0.0 {
                    return Err(invalid("q_bar", format!("empathic mean weight of player {i} at t = {k} is negative")));
                }
            }
        }
        Ok(())
    }

    /// Empathic weights `(q^lambda, q_bar^lambda)`, each `[player][t]`.
    pub fn empathic_weights(&self) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let transform = |w: &Vec<Vec<f64>>| -> Result<Vec<Vec<f64>>> {
            let (n, len) = (self.n(), w[0].len());
            let mut out = vec![vec![0.0; len]; n];
            for t in 0..len {
                let column = PayoffProfile::new((0..n).map(|i| w[i][t]).collect())?;
                let mixed = empathic_transform(&column, &self.empathy, &self.neighbors)?;
                for i in 0..n {
                    out[i][t] = mixed[i];
                }
            }
            Ok(out)
        };
        Ok((transform(&self.q)?, transform(&self.q_bar)?))
    }

    pub fn with_empathy(&self, empathy: EmpathyMatrix) -> Self {
        Self {
            empathy,
            ..self.clone()
        }
    }
}

/// Feedback gains and value coefficients, indexed `[player][t]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiccatiSchedule {
    /// `t = 0..horizon`.
    pub eta: Vec<Vec<f64>>,
    pub eta_bar: Vec<Vec<f64>>,
    /// `t = 0..=horizon`.
    pub beta: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
    pub q_lambda: Vec<Vec<f64>>,
    pub q_bar_lambda: Vec<Vec<f64>>,
}

impl RiccatiSchedule {
    /// CSV `player,t,eta,eta_bar,beta,gamma`; gains are empty at the horizon.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("player,t,eta,eta_bar,beta,gamma\n");
        for i in 0..self.beta.len() {
            let horizon = self.eta[i].len();
            for t in 0..=horizon {
                let (e, eb) = if t < horizon {
                    (self.eta[i][t].to_string(), self.eta_bar[i][t].to_string())
                } else {
                    (String::new(), String::new())
                };
                out.push_str(&format!("{i},{t},{e},{eb},{},{}\n", self.beta[i][t], self.gamma[i][t]));
            }
        }
        out
    }
}

/// Solves `(c_i + b_i^2 v_i) x_i + b_i v_i sum_{j != i} b_j x_j = -b_i v_i drift`.
fn coupled_gains(b: &[f64], c: &[f64], v: &[f64], drift: f64, t: usize, which: &'static str) -> Result<Vec<f64>> {
    let n = b.len();
    for i in 0..n {
        if c[i] + b[i] * b[i] * v[i] <= 0.0 {
            return Err(Error::Singular { t, which });
        }
    }
    let a = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c[i] + b[i] * b[i] * v[i]
        } else {
            b[i] * v[i] * b[j]
        }
    });
    let rhs = DVector::from_fn(n, |i, _| -b[i] * v[i] * drift);
    let x = a.lu().solve(&rhs).ok_or(Error::Singular { t, which })?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular { t, which });
    }
    Ok(x.iter().copied().collect())
}

/// Backward sweep for the equilibrium gains and value coefficients.
pub fn riccati_sweep(p: &LqGameParams) -> Result<RiccatiSchedule> {
    p.validate()?;
    let (n, horizon) = (p.n(), p.horizon);
    let (ql, qbl) = p.empathic_weights()?;
    let b = &p.gains;
    let mut eta = vec![vec![0.0; horizon]; n];
    let mut eta_bar = vec![vec![0.0; horizon]; n];
    let mut beta = vec![vec![0.0; horizon + 1]; n];
    let mut gamma = vec![vec![0.0; horizon + 1]; n];
    for i in 0..n {
        beta[i][horizon] = ql[i][horizon];
        gamma[i][horizon] = ql[i][horizon] + qbl[i][horizon];
    }
    for t in (0..horizon).rev() {
        let c: Vec<f64> = (0..n).map(|i| p.c[i][t]).collect();
        let beta_next: Vec<f64> = (0..n).map(|i| beta[i][t + 1]).collect();
        let gamma_next: Vec<f64> = (0..n).map(|i| gamma[i][t + 1]).collect();
        let e = coupled_gains(b, &c, &beta_next, p.alpha, t, "eta")?;
        let eb = coupled_gains(b, &c, &gamma_next, p.alpha + p.alpha_bar, t, "eta_bar")?;
        let push: f64 = (0..n).map(|j| b[j] * e[j]).sum();
        let push_bar: f64 = (0..n).map(|j| b[j] * eb[j]).sum();
        for i in 0..n {
            eta[i][t] = e[i];
            eta_bar[i][t] = eb[i];
            // closed-loop drift seen by player i when it does not act
            let open = p.alpha + push - b[i] * e[i];
            let open_bar = p.alpha + p.alpha_bar + push_bar - b[i] * eb[i];
            let (bn, gn) = (beta_next[i], gamma_next[i]);
            beta[i][t] = ql[i][t] + bn * open * open - (b[i] * bn * open).powi(2) / (c[i] + b[i] * b[i] * bn);
            gamma[i][t] = ql[i][t] + qbl[i][t] + gn * open_bar * open_bar
                - (b[i] * gn * open_bar).powi(2) / (c[i] + b[i] * b[i] * gn);
        }
    }
    Ok(RiccatiSchedule {
        eta,
        eta_bar,
        beta,
        gamma,
        q_lambda: ql,
        q_bar_lambda: qbl,
    })
}

/// Best-response cost `beta_i0 Var0 + gamma_i0 m0^2 + sigma^2 sum_t beta_{i,t+1}`.
pub fn analytic_cost(p: &LqGameParams, s: &RiccatiSchedule) -> Vec<f64> {
    let s2 = p.sigma * p.sigma;
    (0..p.n())
        .map(|i| {
            s.beta[i][0] * p.var0 + s.gamma[i][0] * p.mean0 * p.mean0 + s2 * s.beta[i][1..].iter().sum::<f64>()
        })
        .collect()
}

/// Expected cost of each player obtained by propagating the state's mean
/// and variance forward under the schedule's feedback.
pub fn forward_cost(p: &LqGameParams, s: &RiccatiSchedule) -> Vec<f64> {
    let n = p.n();
    let mean = mean_state(p, s);
    let mut var = p.var0;
    let mut cost = vec![0.0; n];
    for t in 0..p.horizon {
        let m = mean[t];
        for i in 0..n {
            let (e, eb) = (s.eta[i][t], s.eta_bar[i][t]);
            cost[i] += s.q_lambda[i][t] * (var + m * m)
                + s.q_bar_lambda[i][t] * m * m
                + p.c[i][t] * (e * e * var + eb * eb * m * m);
        }
        let closed: f64 = p.alpha + (0..n).map(|j| p.gains[j] * s.eta[j][t]).sum::<f64>();
        var = closed * closed * var + p.sigma * p.sigma;
    }
    let (m, t) = (mean[p.horizon], p.horizon);
    for i in 0..n {
        cost[i] += s.q_lambda[i][t] * (var + m * m) + s.q_bar_lambda[i][t] * m * m;
    }
    cost
}

/// `E[s_t]` for `t = 0..=horizon`.
pub fn mean_state(p: &LqGameParams, s: &RiccatiSchedule) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.horizon + 1);
    let mut m = p.mean0;
    out.push(m);
    for t in 0..p.horizon {
        let factor = p.alpha + p.alpha_bar + (0..p.n()).map(|i| p.gains[i] * s.eta_bar[i][t]).sum::<f64>();
        m *= factor;
        out.push(m);
    }
    out
}

/// Law of the per-step shocks `W_t`, each with mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Noise {
    #[default]
    Gaussian,
    /// `+1` or `-1` with equal probability.
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    Uniform,
}

impl Noise {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Noise::Gaussian => StandardNormal.sample(rng),
            Noise::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Noise::Uniform => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub paths: usize,
    pub mean_cost: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Sample mean of `s_t`, `t = 0..=horizon`.
    pub state_mean: Vec<f64>,
    pub state_var: Vec<f64>,
}

const BLOCK: usize = 1024;

#[derive(Clone)]
struct Moments {
    cost: Vec<f64>,
    cost_sq: Vec<f64>,
    state: Vec<f64>,
    state_sq: Vec<f64>,
}

impl Moments {
    fn zeros(n: usize, len: usize) -> Self {
        Self {
            cost: vec![0.0; n],
            cost_sq: vec![0.0; n],
            state: vec![0.0; len],
            state_sq: vec![0.0; len],
        }
    }

    fn add(&mut self, other: &Moments) {
        let pairs = [
            (&mut self.cost, &other.cost),
            (&mut self.cost_sq, &other.cost_sq),
            (&mut self.state, &other.state),
            (&mut self.state_sq, &other.state_sq),
        ];
        for (a, b) in pairs {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

pub fn simulate(p: &LqGameParams, s: &RiccatiSchedule, paths: usize, seed: u64) -> Result<SimulationReport> {
    simulate_with(p, s, paths, seed, Noise::Gaussian)
}

/// Monte-Carlo estimate of each player's empathic cost under the feedback
/// law. Path `k` draws from its own ChaCha stream, so results do not depend
/// on the number of threads.
pub fn simulate_with(p: &LqGameParams, s: &RiccatiSchedule, paths: usize, seed: u64, noise: Noise) -> Result<SimulationReport> {
    p.validate()?;
    if paths == 0 {
        return Err(invalid("paths", "at least one path is required"));
    }
    let (n, horizon) = (p.n(), p.horizon);
    let mean = mean_state(p, s);
    let sd0 = p.var0.sqrt();
    let run_path = |k: usize, acc: &mut Moments| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let z: f64 = StandardNormal.sample(&mut rng);
        let mut state = p.mean0 + sd0 * z;
        let mut cost = vec![0.0; n];
        for t in 0..=horizon {
            acc.state[t] += state;
            acc.state_sq[t] += state * state;
            let m = mean[t];
            for i in 0..n {
                cost[i] += s.q_lambda[i][t] * state * state + s.q_bar_lambda[i][t] * m * m;
            }
            if t == horizon {
                break;
            }
            let mut push = 0.0;
            for i in 0..n {
                let a = s.eta[i][t] * (state - m) + s.eta_bar[i][t] * m;
                cost[i] += p.c[i][t] * a * a;
                push += p.gains[i] * a;
            }
            state = p.alpha * state + p.alpha_bar * m + push + p.sigma * noise.draw(&mut rng);
        }
        for i in 0..n {
            acc.cost[i] += cost[i];
            acc.cost_sq[i] += cost[i] * cost[i];
        }
    };
    let blocks: Vec<Moments> = (0..paths.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = Moments::zeros(n, horizon + 1);
            for k in b * BLOCK..((b + 1) * BLOCK).min(paths) {
                run_path(k, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = Moments::zeros(n, horizon + 1);
    for b in &blocks {
        total.add(b);
    }
    let count = paths as f64;
    let mean_cost: Vec<f64> = total.cost.iter().map(|v| v / count).collect();
    let std_error = (0..n)
        .map(|i| {
            if paths < 2 {
                return 0.0;
            }
            let var = (total.cost_sq[i] - count * mean_cost[i] * mean_cost[i]) / (count - 1.0);
            (var.max(0.0) / count).sqrt()
        })
        .collect();
    let state_mean: Vec<f64> = total.state.iter().map(|v| v / count).collect();
    let state_var = total
        .state_sq
        .iter()
        .zip(&state_mean)
        .map(|(sq, m)| (sq / count - m * m).max(0.0))
        .collect();
    Ok(SimulationReport {
        paths,
        mean_cost,
        std_error,
        state_mean,
        state_var,
    })
}
