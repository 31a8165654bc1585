//! Empathy coefficients and the payoff transforms built on them.
//!
//! A player's empathic payoff is their material payoff plus a weighted sum of
//! their neighbours' material payoffs. Positive weights model partial
//! altruism, negative weights partial spite, zero weights a selfish player.
//! The reciprocity variant replaces the neighbour payoffs by products of
//! kindness and perceived kindness computed from first- and second-order
//! beliefs.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance used when checking that a belief is a probability vector.
pub const PROBABILITY_TOL: f64 = 1e-12;

/// Pairwise empathy coefficients `lambda[i][j]` with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct EmpathyMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl EmpathyMatrix {
    /// Builds a matrix whose off-diagonal entries must lie in `[-1, 1]`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(rows, true)
    }

    /// Builds a matrix without the `[-1, 1]` range restriction. Entries must
    /// still be finite and the diagonal zero.
    pub fn new_unbounded(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(rows, false)
    }

    fn build(rows: Vec<Vec<f64>>, bounded: bool) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "empathy row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(invalid("lambda", format!("entry ({i},{j}) is not finite")));
                }
                if i == j && v != 0.0 {
                    return Err(invalid("lambda", format!("diagonal entry ({i},{i}) must be 0")));
                }
                if bounded && !(-1.0..=1.0).contains(&v) {
                    return Err(invalid(
                        "lambda",
                        format!("entry ({i},{j}) = {v} outside [-1, 1]"),
                    ));
                }
                entries.push(v);
            }
        }
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0.0; n * n],
        }
    }

    /// Every off-diagonal entry equal to `lambda`.
    pub fn uniform(n: usize, lambda: f64) -> Result<Self> {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { lambda }).collect())
            .collect();
        Self::new(rows)
    }

    /// Two-player matrix with `lambda[0][1] = l12` and `lambda[1][0] = l21`.
    pub fn pair(l12: f64, l21: f64) -> Result<Self> {
        Self::new(vec![vec![0.0, l12], vec![l21, 0.0]])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Copy of the matrix with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n.max(1)).map(|r| r.to_vec()).take(self.n).collect()
    }

    /// Returns `Some(lambda)` when every off-diagonal entry equals `lambda`.
    pub fn uniform_value(&self) -> Option<f64> {
        let mut value = None;
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j {
                    continue;
                }
                let v = self.get(i, j);
                match value {
                    None => value = Some(v),
                    Some(u) if u != v => return None,
                    _ => {}
                }
            }
        }
        value
    }
}

impl TryFrom<Vec<Vec<f64>>> for EmpathyMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new_unbounded(rows)
    }
}

impl From<EmpathyMatrix> for Vec<Vec<f64>> {
    fn from(m: EmpathyMatrix) -> Self {
        m.rows()
    }
}

/// Material (or transformed) payoffs of all players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffProfile(Vec<f64>);

impl PayoffProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid("payoff", format!("entry {i} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for PayoffProfile {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Interaction neighbourhoods `N_i`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub enum Neighbors {
    /// Every player interacts with every other player.
    #[default]
    All,
    /// Explicit adjacency lists; `sets[i]` may contain `i` itself.
    Sets(Vec<Vec<usize>>),
}

impl Neighbors {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        match self {
            Neighbors::All => true,
            Neighbors::Sets(sets) => sets.get(i).is_some_and(|s| s.contains(&j)),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if let Neighbors::Sets(sets) = self {
            if sets.len() != n {
                return Err(Error::Dimension(format!(
                    "{} neighbour sets for {n} players",
                    sets.len()
                )));
            }
            if let Some(&j) = sets.iter().flatten().find(|&&j| j >= n) {
                return Err(Error::Dimension(format!("neighbour index {j} out of range")));
            }
        }
        Ok(())
    }
}

/// `R_i = r_i + sum_{j in N_i, j != i} lambda_ij r_j`.
pub fn empathic_transform(
    material: &PayoffProfile,
    lambda: &EmpathyMatrix,
    neighbors: &Neighbors,
) -> Result<PayoffProfile> {
    let n = material.len();
    if lambda.n() != n {
        return Err(Error::Dimension(format!(
            "{n} payoffs but a {}x{} empathy matrix",
            lambda.n(),
            lambda.n()
        )));
    }
    neighbors.check(n)?;
    let r = material.values();
    let out = (0..n)
        .map(|i| {
            r[i] + (0..n)
                .filter(|&j| j != i && neighbors.contains(i, j))
                .map(|j| lambda.get(i, j) * r[j])
                .sum::<f64>()
        })
        .collect();
    PayoffProfile::new(out)
}

/// Difference `R_i - R_j` of the all-neighbour empathic payoffs, grouped by
/// material payoff so that shared terms cancel exactly.
pub fn payoff_gap(r: &PayoffProfile, lambda: &EmpathyMatrix, i: usize, j: usize) -> Result<f64> {
    let n = r.len();
    if lambda.n() != n {
        return Err(Error::Dimension(format!("{n} payoffs, {} players", lambda.n())));
    }
    if i >= n || j >= n {
        return Err(Error::Dimension(format!("player index out of range for {n} players")));
    }
    if i == j {
        return Ok(0.0);
    }
    let v = r.values();
    let (lij, lji) = (lambda.get(i, j), lambda.get(j, i));
    let head = if lij == lji {
        (1.0 - lij) * (v[i] - v[j])
    } else {
        (1.0 - lji) * v[i] - (1.0 - lij) * v[j]
    };
    let tail: f64 = (0..n)
        .filter(|&k| k != i && k != j)
        .map(|k| (lambda.get(i, k) - lambda.get(j, k)) * v[k])
        .sum();
    Ok(head + tail)
}

/// Inequality ratio `|R_i - R_j| / |r_i - r_j|` under uniform symmetric
/// empathy `lambda`.
pub fn gap_ratio(r: &PayoffProfile, lambda: f64, i: usize, j: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(invalid("lambda", format!("{lambda} outside [0, 1]")));
    }
    let n = r.len();
    if i >= n || j >= n {
        return Err(Error::Dimension(format!("player index out of range for {n} players")));
    }
    let material = r[i] - r[j];
    if material == 0.0 {
        return Err(Error::UndefinedRatio(format!(
            "players {i} and {j} have equal material payoffs"
        )));
    }
    let m = EmpathyMatrix::uniform(n, lambda)?;
    Ok(payoff_gap(r, &m, i, j)?.abs() / material.abs())
}

/// A finite game in normal form.
pub trait NormalForm {
    fn num_players(&self) -> usize;
    fn num_actions(&self, player: usize) -> usize;
    fn payoff(&self, player: usize, profile: &[usize]) -> f64;
}

/// Expected payoff of `player` when every player `k` mixes according to
/// `mixes[k]`.
pub fn expected_payoff<G: NormalForm + ?Sized>(game: &G, player: usize, mixes: &[Vec<f64>]) -> f64 {
    let n = game.num_players();
    let mut profile = vec![0usize; n];
    let mut total = 0.0;
    loop {
        let weight: f64 = profile.iter().enumerate().map(|(k, &a)| mixes[k][a]).product();
        if weight != 0.0 {
            total += weight * game.payoff(player, &profile);
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == n {
                return total;
            }
            profile[k] += 1;
            if profile[k] < game.num_actions(k) {
                break;
            }
            profile[k] = 0;
            k += 1;
        }
    }
}

fn pure(actions: usize, a: usize) -> Vec<f64> {
    let mut v = vec![0.0; actions];
    v[a] = 1.0;
    v
}

fn check_distribution(d: &[f64], len: usize, what: &str) -> Result<()> {
    if d.len() != len {
        return Err(Error::Dimension(format!(
            "{what} has {} entries, expected {len}",
            d.len()
        )));
    }
    if d.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(invalid(what, "negative or non-finite probability"));
    }
    let sum: f64 = d.iter().sum();
    if (sum - 1.0).abs() > PROBABILITY_TOL {
        return Err(invalid(what, format!("probabilities sum to {sum}")));
    }
    Ok(())
}

/// First-order beliefs `b_ij` (what `i` thinks `j` plays) and second-order
/// beliefs `b~_ijk` (what `i` thinks `j` thinks `k` plays).
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefSystem {
    n: usize,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl BeliefSystem {
    /// Beliefs of every order equal to the actual mixed profile, which is the
    /// consistency condition required in equilibrium.
    pub fn consistent(profile: &[Vec<f64>]) -> Result<Self> {
        let n = profile.len();
        for (k, d) in profile.iter().enumerate() {
            check_distribution(d, d.len(), &format!("profile[{k}]"))?;
        }
        let first = (0..n * n).map(|ij| profile[ij % n].clone()).collect();
        let second = (0..n * n * n).map(|ijk| profile[ijk % n].clone()).collect();
        Ok(Self { n, first, second })
    }

    /// Consistent beliefs about a pure profile.
    pub fn consistent_pure<G: NormalForm + ?Sized>(game: &G, actions: &[usize]) -> Result<Self> {
        let mixes: Vec<Vec<f64>> = actions
            .iter()
            .enumerate()
            .map(|(k, &a)| pure(game.num_actions(k), a))
            .collect();
        Self::consistent(&mixes)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn first(&self, i: usize, j: usize) -> &[f64] {
        &self.first[i * self.n + j]
    }

    pub fn second(&self, i: usize, j: usize, k: usize) -> &[f64] {
        &self.second[(i * self.n + j) * self.n + k]
    }

    pub fn set_first(&mut self, i: usize, j: usize, belief: Vec<f64>) -> Result<()> {
        let len = self.first(i, j).len();
        check_distribution(&belief, len, "first-order belief")?;
        self.first[i * self.n + j] = belief;
        Ok(())
    }

    pub fn set_second(&mut self, i: usize, j: usize, k: usize, belief: Vec<f64>) -> Result<()> {
        let len = self.second(i, j, k).len();
        check_distribution(&belief, len, "second-order belief")?;
        self.second[(i * self.n + j) * self.n + k] = belief;
        Ok(())
    }
}

fn midpoint_bracket(values: &[f64], chosen: f64) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    chosen - 0.5 * (hi + lo)
}

/// Kindness `kappa_ij` of player `i` towards `j` when `i` plays `action`,
/// measured against the midpoint of the best and worst payoff `i` could
/// hand to `j` given `i`'s first-order beliefs.
pub fn kindness<G: NormalForm + ?Sized>(
    game: &G,
    i: usize,
    j: usize,
    action: usize,
    beliefs: &BeliefSystem,
) -> Result<f64> {
    let n = game.num_players();
    if beliefs.n() != n || i >= n || j >= n {
        return Err(Error::Dimension("beliefs do not match the game".into()));
    }
    let actions = game.num_actions(i);
    if actions == 0 {
        return Err(Error::Dimension(format!("player {i} has an empty action set")));
    }
    if action >= actions {
        return Err(Error::Dimension(format!("action {action} out of range for player {i}")));
    }
    let mut mixes: Vec<Vec<f64>> = (0..n).map(|k| beliefs.first(i, k).to_vec()).collect();
    let values: Vec<f64> = (0..actions)
        .map(|a| {
            mixes[i] = pure(actions, a);
            expected_payoff(game, j, &mixes)
        })
        .collect();
    Ok(midpoint_bracket(&values, values[action]))
}

/// Perceived kindness `kappa~_iji`: what `i` believes `j` believes `i`
/// receives from `j`'s (believed) strategy, against the same midpoint bracket
/// over `j`'s alternatives.
pub fn perceived_kindness<G: NormalForm + ?Sized>(
    game: &G,
    i: usize,
    j: usize,
    beliefs: &BeliefSystem,
) -> Result<f64> {
    let n = game.num_players();
    if beliefs.n() != n || i >= n || j >= n {
        return Err(Error::Dimension("beliefs do not match the game".into()));
    }
    let actions = game.num_actions(j);
    if actions == 0 {
        return Err(Error::Dimension(format!("player {j} has an empty action set")));
    }
    let mut mixes: Vec<Vec<f64>> = (0..n).map(|k| beliefs.second(i, j, k).to_vec()).collect();
    mixes[j] = beliefs.first(i, j).to_vec();
    let believed = expected_payoff(game, i, &mixes);
    let values: Vec<f64> = (0..actions)
        .map(|a| {
            mixes[j] = pure(actions, a);
            expected_payoff(game, i, &mixes)
        })
        .collect();
    Ok(midpoint_bracket(&values, believed))
}

/// `R_i = r_i + sum_{j != i} lambda_ij kappa_ij kappa~_iji`, with
/// `kind[i][j] = kappa_ij` and `perceived[i][j] = kappa~_iji`.
pub fn reciprocity_payoff(
    material: &PayoffProfile,
    sensitivity: &EmpathyMatrix,
    kind: &[Vec<f64>],
    perceived: &[Vec<f64>],
) -> Result<PayoffProfile> {
    let n = material.len();
    let square = |m: &[Vec<f64>]| m.len() == n && m.iter().all(|r| r.len() == n);
    if sensitivity.n() != n || !square(kind) || !square(perceived) {
        return Err(Error::Dimension(format!(
            "reciprocity inputs must all be {n}-dimensional"
        )));
    }
    let out = (0..n)
        .map(|i| {
            material[i]
                + (0..n)
                    .filter(|&j| j != i)
                    .map(|j| sensitivity.get(i, j) * kind[i][j] * perceived[i][j])
                    .sum::<f64>()
        })
        .collect();
    PayoffProfile::new(out)
}

/// Reciprocity payoffs of a pure profile under consistent beliefs, computed
/// straight from the game.
pub fn reciprocity_payoffs_at<G: NormalForm + ?Sized>(
    game: &G,
    actions: &[usize],
    sensitivity: &EmpathyMatrix,
    beliefs: &BeliefSystem,
) -> Result<PayoffProfile> {
    let n = game.num_players();
    let material: Vec<f64> = (0..n).map(|i| game.payoff(i, actions)).collect();
    let mut kind = vec![vec![0.0; n]; n];
    let mut perceived = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && sensitivity.get(i, j) != 0.0 {
                kind[i][j] = kindness(game, i, j, actions[i], beliefs)?;
                perceived[i][j] = perceived_kindness(game, i, j, beliefs)?;
            }
        }
    }
    reciprocity_payoff(&PayoffProfile::new(material)?, sensitivity, &kind, &perceived)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(v: &[f64]) -> PayoffProfile {
        PayoffProfile::new(v.to_vec()).unwrap()
    }

    #[test]
    fn transform_examples() {
        let r = profile(&[2.0, 1.0]);
        let all = Neighbors::All;
        let zero = empathic_transform(&r, &EmpathyMatrix::zeros(2), &all).unwrap();
        assert_eq!(zero.values(), &[2.0, 1.0]);
        let alt = empathic_transform(&r, &EmpathyMatrix::pair(0.5, 0.0).unwrap(), &all).unwrap();
        assert_eq!(alt.values(), &[2.5, 1.0]);
        let spite = empathic_transform(&r, &EmpathyMatrix::pair(-1.0, 0.0).unwrap(), &all).unwrap();
        assert_eq!(spite.values(), &[1.0, 1.0]);
    }

    #[test]
    fn transform_respects_sparse_neighbours() {
        let r = profile(&[1.0, 2.0, 4.0]);
        let lambda = EmpathyMatrix::uniform(3, 0.5).unwrap();
        let sparse = Neighbors::Sets(vec![vec![0, 1], vec![1], vec![0, 1, 2]]);
        let out = empathic_transform(&r, &lambda, &sparse).unwrap();
        assert_eq!(out.values(), &[2.0, 2.0, 5.5]);
    }

    #[test]
    fn transform_dimension_mismatch() {
        let r = profile(&[1.0, 2.0, 3.0]);
        let err = empathic_transform(&r, &EmpathyMatrix::zeros(2), &Neighbors::All);
        assert!(matches!(err, Err(Error::Dimension(_))));
        let bad = Neighbors::Sets(vec![vec![5], vec![], vec![]]);
        let err = empathic_transform(&r, &EmpathyMatrix::zeros(3), &bad);
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn empathy_matrix_invariants() {
        assert!(EmpathyMatrix::new(vec![vec![0.1, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(EmpathyMatrix::new(vec![vec![0.0, 1.5], vec![0.0, 0.0]]).is_err());
        assert!(EmpathyMatrix::new_unbounded(vec![vec![0.0, 1.5], vec![0.0, 0.0]]).is_ok());
        assert!(EmpathyMatrix::new(vec![vec![0.0, f64::NAN], vec![0.0, 0.0]]).is_err());
        assert_eq!(EmpathyMatrix::uniform(3, 0.2).unwrap().uniform_value(), Some(0.2));
        assert_eq!(EmpathyMatrix::pair(0.2, 0.3).unwrap().uniform_value(), None);
    }

    #[test]
    fn gap_ratio_examples() {
        let r = profile(&[5.0, 2.0]);
        assert_eq!(gap_ratio(&r, 0.0, 0, 1).unwrap(), 1.0);
        assert_eq!(gap_ratio(&r, 1.0, 0, 1).unwrap(), 0.0);
        assert_eq!(gap_ratio(&r, 0.25, 0, 1).unwrap(), 0.75);
        let tied = profile(&[3.0, 3.0]);
        assert!(matches!(gap_ratio(&tied, 0.5, 0, 1), Err(Error::UndefinedRatio(_))));
    }

    #[test]
    fn payoff_gap_matches_transform_for_asymmetric_empathy() {
        let r = profile(&[1.5, -0.5, 2.0, 0.25]);
        let lambda = EmpathyMatrix::new(vec![
            vec![0.0, 0.3, -0.2, 0.1],
            vec![0.6, 0.0, 0.4, -0.7],
            vec![0.2, 0.2, 0.0, 0.2],
            vec![-0.1, 0.9, 0.5, 0.0],
        ])
        .unwrap();
        let t = empathic_transform(&r, &lambda, &Neighbors::All).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let direct = t[i] - t[j];
                assert!((payoff_gap(&r, &lambda, i, j).unwrap() - direct).abs() < 1e-14);
            }
        }
    }

    /// Two-player game where player 0's choice F (action 0) hands player 1
    /// a payoff of 1 and nF hands 0, independent of player 1's action.
    struct Gift;

    impl NormalForm for Gift {
        fn num_players(&self) -> usize {
            2
        }
        fn num_actions(&self, _: usize) -> usize {
            2
        }
        fn payoff(&self, player: usize, profile: &[usize]) -> f64 {
            match player {
                1 => {
                    if profile[0] == 0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                _ => 0.0,
            }
        }
    }

    #[test]
    fn kindness_of_two_level_gift() {
        for belief in [vec![1.0, 0.0], vec![0.3, 0.7]] {
            let beliefs = BeliefSystem::consistent(&[vec![0.5, 0.5], belief]).unwrap();
            let kind = kindness(&Gift, 0, 1, 0, &beliefs).unwrap();
            let unkind = kindness(&Gift, 0, 1, 1, &beliefs).unwrap();
            assert_eq!(kind, 0.5);
            assert_eq!(unkind, -0.5);
            // player 0's payoff does not depend on player 1
            assert_eq!(kindness(&Gift, 1, 0, 0, &beliefs).unwrap(), 0.0);
        }
    }

    #[test]
    fn perceived_kindness_uses_beliefs_about_the_other() {
        // player 1 believes player 0 plays F, so perceives kindness +0.5
        let beliefs = BeliefSystem::consistent(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(perceived_kindness(&Gift, 1, 0, &beliefs).unwrap(), 0.5);
        let mut b = beliefs.clone();
        b.set_first(1, 0, vec![0.0, 1.0]).unwrap();
        assert_eq!(perceived_kindness(&Gift, 1, 0, &b).unwrap(), -0.5);
        assert!(b.set_first(1, 0, vec![0.7, 0.7]).is_err());
    }

    #[test]
    fn reciprocity_examples() {
        let r = profile(&[1.0, 2.0]);
        let k = vec![vec![0.0, 0.4], vec![0.4, 0.0]];
        let zero = reciprocity_payoff(&r, &EmpathyMatrix::zeros(2), &k, &k).unwrap();
        assert_eq!(zero, r);
        let lambda = EmpathyMatrix::uniform(2, 0.5).unwrap();
        let mutual = reciprocity_payoff(&r, &lambda, &k, &k).unwrap();
        assert!(mutual[0] > r[0] && mutual[1] > r[1]);
        let mixed = vec![vec![0.0, -0.4], vec![0.4, 0.0]];
        let out = reciprocity_payoff(&r, &lambda, &k, &mixed).unwrap();
        assert!((out[0] - (1.0 - 0.5 * 0.16)).abs() < 1e-15);
        assert!(reciprocity_payoff(&r, &EmpathyMatrix::zeros(3), &k, &k).is_err());
    }

    #[test]
    fn empty_action_set_is_an_error() {
        struct Empty;
        impl NormalForm for Empty {
            fn num_players(&self) -> usize {
                2
            }
            fn num_actions(&self, p: usize) -> usize {
                if p == 0 {
                    0
                } else {
                    1
                }
            }
            fn payoff(&self, _: usize, _: &[usize]) -> f64 {
                0.0
            }
        }
        let beliefs = BeliefSystem::consistent(&[vec![], vec![1.0]]);
        // an empty distribution cannot sum to one
        assert!(beliefs.is_err());
        let beliefs = BeliefSystem::consistent(&[vec![1.0], vec![1.0]]).unwrap();
        assert!(matches!(kindness(&Empty, 0, 1, 0, &beliefs), Err(Error::Dimension(_))));
    }
}
