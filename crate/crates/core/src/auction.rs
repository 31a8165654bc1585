//! Optimal asking price of a spiteful or altruistic prosumer.
//!
//! With production-cost cdf `F` on `[0, upper]` and spite coefficient
//! `lambda` (altruism enters as a negative value), the competing cost is
//! distributed as `I(c) = 1 - (1 - F(c))^(1 + lambda)` and the optimal price is
//! `E[X | X > c]`. The conditional mean is evaluated in survival form,
//! `c + int_c^upper S(x) dx / S(c)` with `S = 1 - I`, which has no density
//! singularity at the upper end.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Conditioning mass below which the price is reported as degenerate.
pub const MIN_TAIL: f64 = 1e-14;
/// Absolute tolerance of the price quadrature.
pub const QUAD_TOL: f64 = 1e-10;
/// Step of the central-difference density used when none is supplied.
pub const DENSITY_STEP: f64 = 1e-6;

/// A production-cost distribution on `[0, upper]`.
pub trait CostModel: Send + Sync {
    fn upper(&self) -> f64;
    fn cdf(&self, c: f64) -> f64;
    /// Analytic density, when available.
    fn density(&self, _c: f64) -> Option<f64> {
        None
    }
    /// Interior points where the density may jump.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CostDistribution {
    Uniform {
        upper: f64,
    },
    /// Exponential with the given rate, truncated to `[0, upper]`.
    TruncatedExponential {
        rate: f64,
        upper: f64,
    },
    /// Linear interpolation between `(cost, cdf)` knots running from `(0, 0)`
    /// to `(upper, 1)`.
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
    },
}

impl CostDistribution {
    pub fn uniform(upper: f64) -> Result<Self> {
        let d = Self::Uniform { upper };
        d.validate()?;
        Ok(d)
    }

    pub fn truncated_exponential(rate: f64, upper: f64) -> Result<Self> {
        let d = Self::TruncatedExponential { rate, upper };
        d.validate()?;
        Ok(d)
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        let d = Self::PiecewiseLinear { knots };
        d.validate()?;
        Ok(d)
    }

    /// Reads knots from a headerless or `cost,cdf`-headed CSV file.
    pub fn piecewise_from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let mut knots = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            let parse = |k: usize| record.get(k).and_then(|s| s.parse::<f64>().ok());
            match (parse(0), parse(1)) {
                (Some(c), Some(f)) => knots.push((c, f)),
                _ if line == 0 => continue,
                _ => return Err(Error::Parse(format!("line {}: expected two numbers", line + 1))),
            }
        }
        Self::piecewise_linear(knots)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Uniform { upper } => check_upper(*upper),
            Self::TruncatedExponential { rate, upper } => {
                check_upper(*upper)?;
                if !rate.is_finite() || *rate <= 0.0 {
                    return Err(invalid("rate", format!("{rate} must be positive")));
                }
                Ok(())
            }
            Self::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    return Err(invalid("knots", "need at least two knots"));
                }
                let (first, last) = (knots[0], knots[knots.len() - 1]);
                if first != (0.0, 0.0) {
                    return Err(invalid("knots", "must start at (0, 0)"));
                }
                check_upper(last.0)?;
                if last.1 != 1.0 {
                    return Err(invalid("knots", "cdf must end at 1"));
                }
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 || !w[1].1.is_finite() {
                        return Err(invalid("knots", "costs must increase and the cdf must not decrease"));
                    }
                }
                Ok(())
            }
        }
    }
}

fn check_upper(upper: f64) -> Result<()> {
    if !upper.is_finite() || upper <= 0.0 {
        return Err(invalid("upper", format!("{upper} must be positive and finite")));
    }
    Ok(())
}

impl CostModel for CostDistribution {
    fn upper(&self) -> f64 {
        match self {
            Self::Uniform { upper } | Self::TruncatedExponential { upper, .. } => *upper,
            Self::PiecewiseLinear { knots } => knots[knots.len() - 1].0,
        }
    }

    fn cdf(&self, c: f64) -> f64 {
        let upper = self.upper();
        if c <= 0.0 {
            return 0.0;
        }
        if c >= upper {
            return 1.0;
        }
        match self {
            Self::Uniform { upper } => c / upper,
            Self::TruncatedExponential { rate, upper } => (-rate * c).exp_m1() / (-rate * upper).exp_m1(),
            Self::PiecewiseLinear { knots } => {
                let k = knots.partition_point(|&(x, _)| x <= c);
                let ((x0, f0), (x1, f1)) = (knots[k - 1], knots[k]);
                f0 + (f1 - f0) * (c - x0) / (x1 - x0)
            }
        }
    }

    fn density(&self, c: f64) -> Option<f64> {
        match self {
            Self::Uniform { upper } => Some(1.0 / upper),
            Self::TruncatedExponential { rate, upper } => Some(-rate * (-rate * c).exp() / (-rate * upper).exp_m1()),
            Self::PiecewiseLinear { .. } => None,
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            Self::PiecewiseLinear { knots } => knots[1..knots.len() - 1].iter().map(|k| k.0).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Copy)]
pub struct BidQuery<'a> {
    pub cost: f64,
    pub lambda: f64,
    pub distribution: &'a dyn CostModel,
    /// Entry cost; shifts payoffs but not the optimal price.
    pub entry_cost: f64,
    /// Traded quantity; scales payoffs but not the optimal price.
    pub quantity: f64,
}

impl<'a> BidQuery<'a> {
    pub fn new(cost: f64, lambda: f64, distribution: &'a dyn CostModel) -> Self {
        Self {
            cost,
            lambda,
            distribution,
            entry_cost: 0.0,
            quantity: 1.0,
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || 1.0 + lambda <= 0.0 {
        return Err(invalid("lambda", format!("1 + lambda must be positive, got lambda = {lambda}")));
    }
    Ok(())
}

fn check_cost(d: &dyn CostModel, c: f64) -> Result<()> {
    if !(0.0..=d.upper()).contains(&c) {
        return Err(invalid("cost", format!("{c} outside [0, {}]", d.upper())));
    }
    Ok(())
}

/// Survival of the tilted law, `(1 - F(x))^(1 + lambda)`.
fn tilted_survival(d: &dyn CostModel, lambda: f64, x: f64) -> f64 {
    (1.0 - d.cdf(x)).max(0.0).powf(1.0 + lambda)
}

/// `I(c) = 1 - (1 - F(c))^(1 + lambda)`.
pub fn tilted_cdf(d: &dyn CostModel, lambda: f64, c: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_cost(d, c)?;
    Ok(1.0 - tilted_survival(d, lambda, c))
}

/// Integral over `[a, b]`, split at the distribution's kinks.
fn integrate(d: &dyn CostModel, f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut cuts = vec![a];
    cuts.extend(d.kinks().into_iter().filter(|&k| k > a && k < b));
    cuts.push(b);
    let pieces = (cuts.len() - 1) as f64;
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| quadrature::double_exponential::integrate(&f, w[0], w[1], tol / pieces).integral)
        .sum()
}

/// Optimal price `E[X | X > c]` under the tilted cost law.
pub fn bid_price(q: &BidQuery) -> Result<f64> {
    check_lambda(q.lambda)?;
    let d = q.distribution;
    check_cost(d, q.cost)?;
    let tail = tilted_survival(d, q.lambda, q.cost);
    if tail < MIN_TAIL {
        return Err(Error::DegenerateConditioning { cost: q.cost, tail });
    }
    let area = integrate(d, |x| tilted_survival(d, q.lambda, x), q.cost, d.upper(), QUAD_TOL * tail);
    Ok((q.cost + area / tail).clamp(q.cost, d.upper()))
}

/// Density of the cost law: analytic when available, otherwise a central
/// difference of the cdf (one-sided at the support ends).
pub fn cost_density(d: &dyn CostModel, x: f64) -> f64 {
    if let Some(f) = d.density(x) {
        return f;
    }
    let h = DENSITY_STEP;
    let lo = (x - h).max(0.0);
    let hi = (x + h).min(d.upper());
    (d.cdf(hi) - d.cdf(lo)) / (hi - lo)
}

/// The same price as [`bid_price`] computed from the tilted density,
/// `int_c^upper x I'(x) dx / (1 - I(c))`.
pub fn bid_price_by_density(q: &BidQuery) -> Result<f64> {
    check_lambda(q.lambda)?;
    let d = q.distribution;
    check_cost(d, q.cost)?;
    let tail = tilted_survival(d, q.lambda, q.cost);
    if tail < MIN_TAIL {
        return Err(Error::DegenerateConditioning { cost: q.cost, tail });
    }
    let tilted_density =
        |x: f64| (1.0 + q.lambda) * (1.0 - d.cdf(x)).max(0.0).powf(q.lambda) * cost_density(d, x);
    let moment = integrate(d, |x| x * tilted_density(x), q.cost, d.upper(), QUAD_TOL * tail);
    Ok(moment / tail)
}

/// Closed form for the uniform law on `[0, 1]`:
/// `1 - (1 + lambda)(1 - c) / (2 + lambda)`.
pub fn uniform_bid_price(cost: f64, lambda: f64) -> f64 {
    1.0 - (1.0 + lambda) * (1.0 - cost) / (2.0 + lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BidTable {
    pub lambdas: Vec<f64>,
    pub costs: Vec<f64>,
    /// `prices[i][k]` is the price at `costs[i]` and `lambdas[k]`.
    pub prices: Vec<Vec<f64>>,
}

impl BidTable {
    /// Long-format CSV `cost,lambda,price`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cost,lambda,price\n");
        for (c, row) in self.costs.iter().zip(&self.prices) {
            for (l, p) in self.lambdas.iter().zip(row) {
                out.push_str(&format!("{c},{l},{p}\n"));
            }
        }
        out
    }
}

/// Prices over a cost-by-lambda grid.
pub fn bid_curve(d: &dyn CostModel, lambdas: &[f64], costs: &[f64]) -> Result<BidTable> {
    let prices = costs
        .iter()
        .map(|&c| lambdas.iter().map(|&l| bid_price(&BidQuery::new(c, l, d))).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(BidTable {
        lambdas: lambdas.to_vec(),
        costs: costs.to_vec(),
        prices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> CostDistribution {
        CostDistribution::uniform(1.0).unwrap()
    }

    #[test]
    fn tilted_cdf_examples() {
        let u = unit();
        assert!((tilted_cdf(&u, 0.0, 0.3).unwrap() - u.cdf(0.3)).abs() < 1e-15);
        assert!((tilted_cdf(&u, 1.0, 0.5).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(tilted_cdf(&u, 0.5, 1.0).unwrap(), 1.0);
        assert!(tilted_cdf(&u, -1.0, 0.5).is_err());
        assert!(tilted_cdf(&u, 0.0, 1.5).is_err());
    }

    #[test]
    fn bid_price_examples() {
        let u = unit();
        assert!((bid_price(&BidQuery::new(0.5, 0.0, &u)).unwrap() - 0.75).abs() < 1e-10);
        assert!((bid_price(&BidQuery::new(0.0, 1.0, &u)).unwrap() - 1.0 / 3.0).abs() < 1e-10);
        let near = bid_price(&BidQuery::new(1.0 - 1e-6, 0.0, &u)).unwrap();
        assert!((near - 1.0).abs() < 1e-6);
        assert!(matches!(
            bid_price(&BidQuery::new(1.0, 0.0, &u)),
            Err(Error::DegenerateConditioning { .. })
        ));
    }

    #[test]
    fn entry_cost_and_quantity_do_not_move_the_price() {
        let u = unit();
        let base = bid_price(&BidQuery::new(0.3, 0.4, &u)).unwrap();
        let q = BidQuery {
            entry_cost: 2.0,
            quantity: 7.0,
            ..BidQuery::new(0.3, 0.4, &u)
        };
        assert_eq!(bid_price(&q).unwrap(), base);
    }

    #[test]
    fn bid_curve_examples() {
        let u = unit();
        let spite = bid_curve(&u, &[0.0, 0.5, 1.0], &[0.2]).unwrap();
        let row = &spite.prices[0];
        assert!(row[0] > row[1] && row[1] > row[2]);
        let altruism = bid_curve(&u, &[0.0, -0.25, -0.5], &[0.2]).unwrap();
        let row = &altruism.prices[0];
        assert!(row[0] < row[1] && row[1] < row[2]);
        let material = bid_curve(&u, &[0.0], &[0.1, 0.5]).unwrap();
        assert!((material.prices[0][0] - 0.55).abs() < 1e-10);
        assert_eq!(material.to_csv().lines().count(), 3);
    }

    #[test]
    fn density_route_agrees_with_survival_route() {
        let dists = [
            unit(),
            CostDistribution::truncated_exponential(2.0, 1.5).unwrap(),
            CostDistribution::piecewise_linear(vec![(0.0, 0.0), (0.4, 0.6), (1.0, 1.0)]).unwrap(),
        ];
        for d in &dists {
            for &l in &[0.0, 0.5, 1.0, -0.3] {
                for &c in &[0.0, 0.2, 0.35] {
                    let q = BidQuery::new(c, l, d);
                    let a = bid_price(&q).unwrap();
                    let b = bid_price_by_density(&q).unwrap();
                    assert!((a - b).abs() < 1e-6, "{d:?} l={l} c={c}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn truncated_exponential_is_a_cdf() {
        let d = CostDistribution::truncated_exponential(3.0, 2.0).unwrap();
        assert_eq!(d.cdf(0.0), 0.0);
        assert!((d.cdf(2.0) - 1.0).abs() < 1e-15);
        assert!((cost_density(&d, 0.7) - d.density(0.7).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn piecewise_validation() {
        assert!(CostDistribution::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.9)]).is_err());
        assert!(CostDistribution::piecewise_linear(vec![(0.0, 0.0), (0.5, 0.7), (1.0, 0.6)]).is_err());
        assert!(CostDistribution::uniform(0.0).is_err());
    }

    #[test]
    fn piecewise_from_csv_reads_knots() {
        let dir = std::env::temp_dir().join(format!("bid-knots-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("knots.csv");
        std::fs::write(&path, "cost,cdf\n0,0\n0.5,0.25\n2,1\n").unwrap();
        let d = CostDistribution::piecewise_from_csv(&path).unwrap();
        assert_eq!(d.upper(), 2.0);
        assert!((d.cdf(1.25) - 0.625).abs() < 1e-15);
        std::fs::remove_dir_all(dir).ok();
    }

    proptest! {
        #[test]
        fn quadrature_matches_uniform_closed_form(c in 0.0..0.99f64, l in -0.9..3.0f64) {
            let u = unit();
            let p = bid_price(&BidQuery::new(c, l, &u)).unwrap();
            prop_assert!((p - uniform_bid_price(c, l)).abs() < 1e-8);
        }

        #[test]
        fn price_lies_between_cost_and_upper(c in 0.0..1.4f64, l in -0.9..3.0f64, rate in 0.1..5.0f64) {
            let d = CostDistribution::truncated_exponential(rate, 1.5).unwrap();
            let p = bid_price(&BidQuery::new(c, l, &d)).unwrap();
            prop_assert!(p >= c && p <= 1.5);
        }

        #[test]
        fn price_is_non_increasing_in_spite(c in 0.0..0.95f64, l in -0.9..2.0f64) {
            let d = CostDistribution::piecewise_linear(vec![(0.0, 0.0), (0.3, 0.5), (1.0, 1.0)]).unwrap();
            let h = 1e-4;
            let lo = bid_price(&BidQuery::new(c, l, &d)).unwrap();
            let hi = bid_price(&BidQuery::new(c, l + h, &d)).unwrap();
            prop_assert!(hi - lo <= 1e-9);
        }

        #[test]
        fn tilted_cdf_is_a_cdf(l in -0.99..5.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
            let u = unit();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(tilted_cdf(&u, l, lo).unwrap() <= tilted_cdf(&u, l, hi).unwrap());
            prop_assert_eq!(tilted_cdf(&u, l, 0.0).unwrap(), 0.0);
            prop_assert_eq!(tilted_cdf(&u, l, 1.0).unwrap(), 1.0);
        }
    }
}
