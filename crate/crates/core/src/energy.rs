//! Consumer demand equilibrium in an energy market with empathy-altruism.
//!
//! Consumer `i` draws `d_i` and earns `theta_i (1 - e^{-d_i}) - p(D) d_i` with
//! the linear price `p(D) = p0 + a (D - S)`. Under altruism `lambda` it
//! maximizes its own payoff plus `lambda` times everyone else's, which gives
//! the first-order condition
//!
//! `theta_i e^{-d_i} - p(D) - a d_i - lambda a sum_{j != i} d_j = 0`,
//!
//! projected onto `d_i >= 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearPrice {
    pub base: f64,
    pub slope: f64,
    pub supply: f64,
}

impl LinearPrice {
    pub fn at(&self, demand: f64) -> f64 {
        self.base + self.slope * (demand - self.supply)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketModel {
    /// Satisfaction scale `theta_i` of each consumer.
    pub satisfaction: Vec<f64>,
    pub price: LinearPrice,
}

impl MarketModel {
    pub fn new(satisfaction: Vec<f64>, price: LinearPrice) -> Result<Self> {
        let m = Self { satisfaction, price };
        m.validate()?;
        Ok(m)
    }

    /// `n` identical consumers.
    pub fn symmetric(n: usize, theta: f64, price: LinearPrice) -> Result<Self> {
        Self::new(vec![theta; n], price)
    }

    pub fn validate(&self) -> Result<()> {
        if self.satisfaction.is_empty() {
            return Err(invalid("satisfaction", "at least one consumer is required"));
        }
        if let Some(t) = self.satisfaction.iter().find(|t| !t.is_finite() || **t <= 0.0) {
            return Err(invalid("satisfaction", format!("{t} must be positive")));
        }
        let p = self.price;
        if !(p.base.is_finite() && p.supply.is_finite() && p.slope.is_finite()) {
            return Err(invalid("price", "coefficients must be finite"));
        }
        if p.slope < 0.0 {
            return Err(invalid("slope", "price must not decrease with demand"));
        }
        if p.slope == 0.0 && p.base <= 0.0 {
            return Err(invalid("base", "a flat price must be positive for demand to stay bounded"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.satisfaction.len()
    }

    /// Same market with every satisfaction scale multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            satisfaction: self.satisfaction.iter().map(|t| t * factor).collect(),
            price: self.price,
        }
    }

    /// Material payoff of consumer `i`.
    pub fn payoff(&self, d: &[f64], i: usize) -> f64 {
        let total: f64 = d.iter().sum();
        self.satisfaction[i] * -(-d[i]).exp_m1() - self.price.at(total) * d[i]
    }

    /// Own payoff plus `lambda` times the payoffs of the other consumers.
    pub fn empathic_payoff(&self, d: &[f64], lambda: f64, i: usize) -> f64 {
        (0..self.n())
            .map(|j| if j == i { self.payoff(d, j) } else { lambda * self.payoff(d, j) })
            .sum()
    }

    /// Derivative of the empathic payoff of `i` with respect to `d_i`.
    pub fn marginal(&self, d: &[f64], lambda: f64, i: usize) -> f64 {
        let total: f64 = d.iter().sum();
        let a = self.price.slope;
        self.satisfaction[i] * (-d[i]).exp() - self.price.at(total) - a * d[i] - lambda * a * (total - d[i])
    }

    /// Natural residual `max_i |min(d_i, -g_i)|` of the projected conditions.
    pub fn residual(&self, d: &[f64], lambda: f64) -> f64 {
        (0..self.n())
            .map(|i| d[i].min(-self.marginal(d, lambda, i)).abs())
            .fold(0.0, f64::max)
    }

    /// Exact best response of `i` when the others draw `others` in total.
    fn best_response(&self, i: usize, others: f64, lambda: f64) -> f64 {
        let theta = self.satisfaction[i];
        let p = self.price;
        let g = |x: f64| theta * (-x).exp() - p.base - p.slope * (x + others - p.supply) - p.slope * x - lambda * p.slope * others;
        if g(0.0) <= 0.0 {
            return 0.0;
        }
        let mut hi = 1.0;
        while g(hi) > 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        let mut x = 0.5 * hi;
        for _ in 0..200 {
            let gx = g(x);
            if gx == 0.0 {
                return x;
            }
            if gx > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = -theta * (-x).exp() - 2.0 * p.slope;
            let newton = x - gx / slope;
            let next = if (lo..=hi).contains(&newton) { newton } else { 0.5 * (lo + hi) };
            if (next - x).abs() <= 1e-16 * x.max(1.0) {
                return next;
            }
            x = next;
        }
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial damping of the Jacobi update; halved whenever the residual
    /// grows.
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 20_000,
            damping: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandProfile {
    pub demands: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl DemandProfile {
    pub fn total(&self) -> f64 {
        self.demands.iter().sum()
    }
}

pub fn demand_equilibrium(m: &MarketModel, lambda: f64) -> Result<DemandProfile> {
    demand_equilibrium_with(m, lambda, SolverOptions::default())
}

/// Damped Jacobi iteration on exact best responses.
pub fn demand_equilibrium_with(m: &MarketModel, lambda: f64, opts: SolverOptions) -> Result<DemandProfile> {
    m.validate()?;
    if !(0.0..1.0).contains(&lambda) {
        return Err(invalid("lambda", format!("{lambda} outside [0, 1)")));
    }
    let n = m.n();
    let mut d = vec![0.0; n];
    let mut omega = opts.damping;
    let mut residual = m.residual(&d, lambda);
    for iter in 0..opts.max_iter {
        if residual <= opts.tol {
            return Ok(DemandProfile {
                demands: d,
                iterations: iter,
                residual,
            });
        }
        let total: f64 = d.iter().sum();
        let target: Vec<f64> = (0..n).map(|i| m.best_response(i, total - d[i], lambda)).collect();
        let next: Vec<f64> = d.iter().zip(&target).map(|(x, t)| (1.0 - omega) * x + omega * t).collect();
        let next_residual = m.residual(&next, lambda);
        if next_residual > residual && omega > 1e-6 {
            omega *= 0.5;
        }
        d = next;
        residual = next_residual;
    }
    if residual <= opts.tol {
        return Ok(DemandProfile {
            demands: d,
            iterations: opts.max_iter,
            residual,
        });
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// Hourly multipliers of the satisfaction scales with a morning and an
/// evening peak.
pub fn two_peak_day(hours: usize) -> Vec<f64> {
    (0..hours)
        .map(|h| {
            let t = 24.0 * h as f64 / hours as f64;
            let bump = |centre: f64, width: f64, height: f64| height * (-((t - centre) / width).powi(2)).exp();
            0.6 + bump(8.0, 1.5, 0.9) + bump(19.0, 2.0, 1.2)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakTable {
    pub lambdas: Vec<f64>,
    pub hourly_scale: Vec<f64>,
    /// `aggregate[h][k]` is the total demand in hour `h` at `lambdas[k]`.
    pub aggregate: Vec<Vec<f64>>,
}

impl PeakTable {
    /// Peak aggregate demand for each lambda.
    pub fn peaks(&self) -> Vec<f64> {
        (0..self.lambdas.len())
            .map(|k| self.aggregate.iter().map(|row| row[k]).fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }

    /// Long-format CSV `hour,lambda,demand`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("hour,lambda,demand\n");
        for (h, row) in self.aggregate.iter().enumerate() {
            for (l, v) in self.lambdas.iter().zip(row) {
                out.push_str(&format!("{h},{l},{v}\n"));
            }
        }
        out
    }
}

/// Aggregate equilibrium demand for each hour of the day and each lambda;
/// hours are solved in parallel.
pub fn peak_comparison(m: &MarketModel, hourly_scale: &[f64], lambdas: &[f64]) -> Result<PeakTable> {
    if hourly_scale.is_empty() {
        return Err(invalid("hourly_scale", "at least one hour is required"));
    }
    let aggregate = hourly_scale
        .par_iter()
        .map(|&s| {
            let hour = m.scaled(s);
            lambdas
                .iter()
                .map(|&l| demand_equilibrium(&hour, l).map(|p| p.total()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PeakTable {
        lambdas: lambdas.to_vec(),
        hourly_scale: hourly_scale.to_vec(),
        aggregate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn price(base: f64, slope: f64, supply: f64) -> LinearPrice {
        LinearPrice { base, slope, supply }
    }

    #[test]
    fn single_consumer_constant_price() {
        let m = MarketModel::new(vec![1.0], price(0.3, 0.0, 0.0)).unwrap();
        let d = demand_equilibrium(&m, 0.0).unwrap();
        assert!((d.demands[0] + 0.3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn altruism_lowers_symmetric_demand() {
        let m = MarketModel::symmetric(2, 2.0, price(0.2, 0.5, 1.0)).unwrap();
        let selfish = demand_equilibrium(&m, 0.0).unwrap();
        let altruistic = demand_equilibrium(&m, 0.5).unwrap();
        for (a, s) in altruistic.demands.iter().zip(&selfish.demands) {
            assert!(a <= s);
        }
        assert!(altruistic.residual <= 1e-10);
        assert!(m.residual(&altruistic.demands, 0.5) <= 1e-10);
    }

    #[test]
    fn finite_difference_gradient_matches_marginal() {
        let m = MarketModel::new(vec![1.5, 2.0, 0.8], price(0.1, 0.4, 0.5)).unwrap();
        let d = [0.4, 0.7, 0.2];
        let h = 1e-6;
        for i in 0..3 {
            let mut up = d;
            let mut down = d;
            up[i] += h;
            down[i] -= h;
            let fd = (m.empathic_payoff(&up, 0.3, i) - m.empathic_payoff(&down, 0.3, i)) / (2.0 * h);
            let g = m.marginal(&d, 0.3, i);
            assert!((fd - g).abs() <= 1e-4 * g.abs().max(1e-3), "{fd} vs {g}");
        }
        // at the equilibrium the empathic gradient vanishes for active consumers
        let eq = demand_equilibrium(&m, 0.3).unwrap();
        for i in 0..3 {
            if eq.demands[i] > 0.0 {
                let mut up = eq.demands.clone();
                let mut down = eq.demands.clone();
                up[i] += h;
                down[i] -= h;
                let fd = (m.empathic_payoff(&up, 0.3, i) - m.empathic_payoff(&down, 0.3, i)) / (2.0 * h);
                assert!(fd.abs() < 1e-6);
            }
        }
    }

    #[test]
    fn many_consumers_converge_with_backoff() {
        let m = MarketModel::symmetric(40, 3.0, price(0.1, 0.8, 5.0)).unwrap();
        let d = demand_equilibrium(&m, 0.9).unwrap();
        assert!(d.residual <= 1e-10);
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let m = MarketModel::symmetric(3, 2.0, price(0.1, 0.5, 1.0)).unwrap();
        let opts = SolverOptions {
            max_iter: 2,
            ..Default::default()
        };
        match demand_equilibrium_with(&m, 0.5, opts) {
            Err(Error::Convergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-10);
            }
            other => panic!("expected a convergence error, got {other:?}"),
        }
    }

    #[test]
    fn inactive_consumer_stays_at_zero() {
        let m = MarketModel::new(vec![0.1, 3.0], price(0.5, 0.2, 0.0)).unwrap();
        let d = demand_equilibrium(&m, 0.2).unwrap();
        assert_eq!(d.demands[0], 0.0);
        assert!(d.demands[1] > 0.0);
    }

    #[test]
    fn peak_examples() {
        let m = MarketModel::symmetric(4, 1.0, price(0.2, 0.3, 2.0)).unwrap();
        let day = two_peak_day(24);
        let base = peak_comparison(&m, &day, &[0.0]).unwrap();
        for (h, row) in base.aggregate.iter().enumerate() {
            let direct = demand_equilibrium(&m.scaled(day[h]), 0.0).unwrap().total();
            assert!((row[0] - direct).abs() < 1e-12);
        }
        let table = peak_comparison(&m, &day, &[0.0, 0.5]).unwrap();
        let peaks = table.peaks();
        assert!(peaks[1] < peaks[0]);
        for row in &table.aggregate {
            assert!(row[1] <= row[0]);
        }
        // both local maxima drop
        let morning = (5..11).max_by(|&a, &b| day[a].total_cmp(&day[b])).unwrap();
        let evening = (16..22).max_by(|&a, &b| day[a].total_cmp(&day[b])).unwrap();
        for h in [morning, evening] {
            assert!(table.aggregate[h][1] < table.aggregate[h][0]);
        }
        assert_eq!(table.to_csv().lines().count(), 1 + 48);
    }

    proptest! {
        #[test]
        fn symmetric_demand_decreases_with_altruism(
            n in 1usize..6,
            theta in 0.2..4.0f64,
            base in 0.0..1.0f64,
            slope in 0.05..2.0f64,
            supply in 0.0..3.0f64,
            l1 in 0.0..0.95f64,
            l2 in 0.0..0.95f64,
        ) {
            let m = MarketModel::symmetric(n, theta, price(base, slope, supply)).unwrap();
            let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
            let a = demand_equilibrium(&m, lo).unwrap();
            let b = demand_equilibrium(&m, hi).unwrap();
            for (x, y) in b.demands.iter().zip(&a.demands) {
                prop_assert!(*x <= *y + 1e-9);
            }
            prop_assert!(b.residual <= 1e-10);
        }

        #[test]
        fn aggregate_demand_never_exceeds_selfish_level(
            thetas in proptest::collection::vec(0.2..4.0f64, 1..6),
            base in 0.0..1.0f64,
            slope in 0.05..2.0f64,
            l in 0.0..0.95f64,
        ) {
            let m = MarketModel::new(thetas, price(base, slope, 1.0)).unwrap();
            let selfish = demand_equilibrium(&m, 0.0).unwrap();
            let altruistic = demand_equilibrium(&m, l).unwrap();
            prop_assert!(altruistic.total() <= selfish.total() + 1e-9);
        }
    }
}
