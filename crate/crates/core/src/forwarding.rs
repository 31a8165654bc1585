//! Crowd forwarding as an n-player threshold public good.
//!
//! Each node either forwards (F) or abstains (nF). When at least `m*` nodes
//! forward, the network works: node `i` collects its path success
//! probability `p_i` and each forwarder pays an equal share `(m*/m) alpha` of
//! the upkeep. Below the threshold nothing is delivered and each forwarder
//! pays `(m*/m) gamma`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::empathy::{
    empathic_transform, kindness, perceived_kindness, reciprocity_payoffs_at, BeliefSystem, EmpathyMatrix, Neighbors,
    NormalForm, PayoffProfile,
};
use crate::error::{invalid, Error, Result};
use crate::measure_dp::TabularGame;
use crate::seeding::stream_rng;

/// Tolerance for calling a deviation gain non-positive.
pub const AUDIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Choice {
    #[serde(rename = "F")]
    Forward,
    #[serde(rename = "nF")]
    Abstain,
}

impl Choice {
    pub fn flipped(self) -> Self {
        match self {
            Choice::Forward => Choice::Abstain,
            Choice::Abstain => Choice::Forward,
        }
    }

    fn index(self) -> usize {
        match self {
            Choice::Forward => 0,
            Choice::Abstain => 1,
        }
    }

    fn from_index(a: usize) -> Self {
        if a == 0 {
            Choice::Forward
        } else {
            Choice::Abstain
        }
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Choice::Forward => "F",
            Choice::Abstain => "nF",
        })
    }
}

/// Parses `"F,F,nF"` style profiles.
pub fn parse_profile(s: &str) -> Result<Vec<Choice>> {
    s.split(',')
        .map(|t| match t.trim() {
            "F" | "f" => Ok(Choice::Forward),
            "nF" | "nf" | "NF" => Ok(Choice::Abstain),
            other => Err(Error::Parse(format!("unknown forwarding choice `{other}`"))),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrowdForwardParams {
    /// Number of forwarders needed for the network to work.
    pub threshold: usize,
    /// Upkeep shared by forwarders when the network works.
    pub alpha: f64,
    /// Cost shared by forwarders when it does not.
    pub gamma: f64,
    /// End-to-end success probability of each node's path.
    pub success: Vec<f64>,
    pub empathy: EmpathyMatrix,
    /// Reciprocity sensitivity; the empathy matrix is used when absent.
    #[serde(default)]
    pub reciprocity: Option<EmpathyMatrix>,
    #[serde(default)]
    pub neighbors: Neighbors,
}

impl CrowdForwardParams {
    /// Homogeneous instance with uniform empathy `lambda`.
    pub fn symmetric(n: usize, threshold: usize, alpha: f64, gamma: f64, success: f64, lambda: f64) -> Result<Self> {
        let p = Self {
            threshold,
            alpha,
            gamma,
            success: vec![success; n],
            empathy: EmpathyMatrix::uniform(n, lambda)?,
            reciprocity: None,
            neighbors: Neighbors::All,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.success.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n < 3 {
            return Err(invalid("n", format!("{n} players, need at least 3")));
        }
        if self.threshold < 2 || self.threshold > n {
            return Err(invalid("threshold", format!("{} outside [2, {n}]", self.threshold)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma", "must be positive"));
        }
        if let Some(p) = self.success.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(invalid("success", format!("{p} is not a probability")));
        }
        if self.empathy.n() != n || self.reciprocity.as_ref().is_some_and(|r| r.n() != n) {
            return Err(Error::Dimension(format!("coefficient matrices must be {n} x {n}")));
        }
        Ok(())
    }

    pub fn with_empathy(&self, empathy: EmpathyMatrix) -> Self {
        Self {
            empathy,
            ..self.clone()
        }
    }

    pub fn sensitivity(&self) -> &EmpathyMatrix {
        self.reciprocity.as_ref().unwrap_or(&self.empathy)
    }

    fn check_profile(&self, profile: &[Choice]) -> Result<()> {
        if profile.len() != self.n() {
            return Err(Error::Dimension(format!("profile of {} choices for {} players", profile.len(), self.n())));
        }
        Ok(())
    }

    fn share(&self, forwarders: usize) -> f64 {
        let cost = if forwarders >= self.threshold { self.alpha } else { self.gamma };
        self.threshold as f64 / forwarders as f64 * cost
    }

    fn material_with_count(&self, i: usize, own: Choice, forwarders: usize) -> f64 {
        let works = forwarders >= self.threshold;
        let benefit = if works { self.success[i] } else { 0.0 };
        match own {
            Choice::Forward => benefit - self.share(forwarders),
            Choice::Abstain => benefit,
        }
    }
}

pub fn forwarders(profile: &[Choice]) -> usize {
    profile.iter().filter(|c| **c == Choice::Forward).count()
}

/// Material payoffs. Exactly `m*` forwarders counts as a working network.
pub fn material_payoff(params: &CrowdForwardParams, profile: &[Choice]) -> Result<PayoffProfile> {
    params.check_profile(profile)?;
    let m = forwarders(profile);
    PayoffProfile::new((0..params.n()).map(|i| params.material_with_count(i, profile[i], m)).collect())
}

/// Material payoffs plus empathy-weighted material payoffs of neighbours.
pub fn empathic_payoff(params: &CrowdForwardParams, profile: &[Choice]) -> Result<PayoffProfile> {
    empathic_transform(&material_payoff(params, profile)?, &params.empathy, &params.neighbors)
}

/// The game as a normal form over action indices `0 = F`, `1 = nF`.
pub struct CrowdGame<'a>(pub &'a CrowdForwardParams);

impl NormalForm for CrowdGame<'_> {
    fn num_players(&self) -> usize {
        self.0.n()
    }

    fn num_actions(&self, _player: usize) -> usize {
        2
    }

    fn payoff(&self, player: usize, profile: &[usize]) -> f64 {
        let m = profile.iter().filter(|&&a| a == 0).count();
        self.0.material_with_count(player, Choice::from_index(profile[player]), m)
    }
}

fn indices(profile: &[Choice]) -> Vec<usize> {
    profile.iter().map(|c| c.index()).collect()
}

fn masked_sensitivity(params: &CrowdForwardParams) -> Result<EmpathyMatrix> {
    let n = params.n();
    let s = params.sensitivity();
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i != j && params.neighbors.contains(i, j) { s.get(i, j) } else { 0.0 })
                .collect()
        })
        .collect();
    EmpathyMatrix::new_unbounded(rows)
}

/// Reciprocity payoffs at `played` when beliefs of every order equal
/// `believed`.
pub fn reciprocity_payoff(params: &CrowdForwardParams, played: &[Choice], believed: &[Choice]) -> Result<PayoffProfile> {
    params.check_profile(played)?;
    params.check_profile(believed)?;
    let game = CrowdGame(params);
    let beliefs = BeliefSystem::consistent_pure(&game, &indices(believed))?;
    reciprocity_payoffs_at(&game, &indices(played), &masked_sensitivity(params)?, &beliefs)
}

/// `kindness[i][j]`: how much `i` gives `j` under consistent beliefs about
/// `profile`, relative to the midpoint of what `i` could give.
pub fn kindness_matrix(params: &CrowdForwardParams, profile: &[Choice]) -> Result<Vec<Vec<f64>>> {
    pair_matrix(params, profile, |game, beliefs, i, j| kindness(game, i, j, profile[i].index(), beliefs))
}

/// `perceived[i][j]`: how kind `i` believes `j` is towards `i`.
pub fn perceived_kindness_matrix(params: &CrowdForwardParams, profile: &[Choice]) -> Result<Vec<Vec<f64>>> {
    pair_matrix(params, profile, |game, beliefs, i, j| perceived_kindness(game, i, j, beliefs))
}

fn pair_matrix(
    params: &CrowdForwardParams,
    profile: &[Choice],
    f: impl Fn(&CrowdGame, &BeliefSystem, usize, usize) -> Result<f64>,
) -> Result<Vec<Vec<f64>>> {
    params.check_profile(profile)?;
    let game = CrowdGame(params);
    let beliefs = BeliefSystem::consistent_pure(&game, &indices(profile))?;
    let n = params.n();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Ok(0.0) } else { f(&game, &beliefs, i, j) }).collect())
        .collect()
}

/// Kindness of `i` towards all other nodes together.
pub fn group_kindness(params: &CrowdForwardParams, profile: &[Choice], i: usize) -> Result<f64> {
    Ok(kindness_matrix(params, profile)?[i].iter().sum())
}

/// `+-(m*/2m) cost` with `m` the forwarder count when `i` forwards, when that
/// form applies: `i`'s choice does not move the network across the
/// threshold and at least one other node forwards.
pub fn kindness_closed_form(params: &CrowdForwardParams, profile: &[Choice], i: usize) -> Result<Option<f64>> {
    params.check_profile(profile)?;
    let others = forwarders(profile) - usize::from(profile[i] == Choice::Forward);
    let with = others + 1;
    let crosses = (with >= params.threshold) != (others >= params.threshold);
    if crosses || others == 0 {
        return Ok(None);
    }
    let cost = if with >= params.threshold { params.alpha } else { params.gamma };
    let half = params.threshold as f64 / (2.0 * with as f64) * cost;
    Ok(Some(match profile[i] {
        Choice::Forward => half,
        Choice::Abstain => -half,
    }))
}

/// Total upkeep paid by forwarders; `m* alpha` or `m* gamma` whenever anyone
/// forwards.
pub fn sharing_budget(params: &CrowdForwardParams, profile: &[Choice]) -> Result<f64> {
    params.check_profile(profile)?;
    let m = forwarders(profile);
    Ok(if m == 0 { 0.0 } else { m as f64 * params.share(m) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayoffKind {
    Material,
    Empathic,
    Reciprocity,
}

impl fmt::Display for PayoffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PayoffKind::Material => "material",
            PayoffKind::Empathic => "empathic",
            PayoffKind::Reciprocity => "reciprocity",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub kind: PayoffKind,
    pub profile: Vec<Choice>,
    pub payoffs: Vec<f64>,
    /// Gain of each player from switching its own choice.
    pub gains: Vec<f64>,
    pub equilibrium: bool,
}

impl AuditReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("player,choice,payoff,deviation_gain\n");
        for (i, (p, g)) in self.payoffs.iter().zip(&self.gains).enumerate() {
            out.push_str(&format!("{i},{},{p},{g}\n", self.profile[i]));
        }
        out
    }
}

fn payoffs_of(params: &CrowdForwardParams, played: &[Choice], believed: &[Choice], kind: PayoffKind) -> Result<PayoffProfile> {
    match kind {
        PayoffKind::Material => material_payoff(params, played),
        PayoffKind::Empathic => empathic_payoff(params, played),
        // beliefs stay at the audited profile while one player deviates
        PayoffKind::Reciprocity => reciprocity_payoff(params, played, believed),
    }
}

/// Unilateral deviation audit. The profile is a (weak) equilibrium when no
/// gain exceeds [`AUDIT_TOL`].
pub fn is_equilibrium(params: &CrowdForwardParams, profile: &[Choice], kind: PayoffKind) -> Result<AuditReport> {
    params.validate()?;
    let base = payoffs_of(params, profile, profile, kind)?;
    let mut gains = Vec::with_capacity(profile.len());
    let mut deviated = profile.to_vec();
    for i in 0..profile.len() {
        deviated[i] = profile[i].flipped();
        gains.push(payoffs_of(params, &deviated, profile, kind)?[i] - base[i]);
        deviated[i] = profile[i];
    }
    Ok(AuditReport {
        kind,
        profile: profile.to_vec(),
        payoffs: base.into_inner(),
        equilibrium: gains.iter().all(|g| *g <= AUDIT_TOL),
        gains,
    })
}

/// Scales `s` of the coefficient matrix (empathy, or reciprocity sensitivity)
/// for which the profile passes the audit: `[lo, hi]`, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SustainRange {
    pub lo: f64,
    pub hi: f64,
}

/// Range of scales of the relevant coefficient matrix that sustain
/// `profile`. Deviation gains are affine in the scale, so two audits fix
/// them. Returns `None` when no scale works.
pub fn sustaining_range(params: &CrowdForwardParams, profile: &[Choice], kind: PayoffKind) -> Result<Option<SustainRange>> {
    let at = |s: f64| -> Result<Vec<f64>> {
        let p = match kind {
            PayoffKind::Material => params.clone(),
            PayoffKind::Empathic => params.with_empathy(params.empathy.scaled(s)),
            PayoffKind::Reciprocity => CrowdForwardParams {
                reciprocity: Some(params.sensitivity().scaled(s)),
                ..params.clone()
            },
        };
        Ok(is_equilibrium(&p, profile, kind)?.gains)
    };
    let (g0, g1) = (at(0.0)?, at(1.0)?);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (a, b) in g0.iter().zip(&g1) {
        let slope = b - a;
        if slope.abs() <= AUDIT_TOL {
            if *a > AUDIT_TOL {
                return Ok(None);
            }
        } else if slope > 0.0 {
            hi = hi.min(-a / slope);
        } else {
            lo = lo.max(-a / slope);
        }
    }
    Ok((lo <= hi).then_some(SustainRange { lo, hi }))
}

/// Per-hop success probabilities of each node's path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopChannel {
    pub hops: Vec<Vec<f64>>,
}

impl HopChannel {
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.hops.iter().flatten().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(invalid("hops", format!("{p} is not a probability")));
        }
        Ok(())
    }

    /// Path success probabilities as products over hops.
    pub fn path_success(&self) -> Vec<f64> {
        self.hops.iter().map(|h| h.iter().product()).collect()
    }

    /// One draw of path indicators.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.hops
            .iter()
            .map(|h| if h.iter().all(|&q| rng.random::<f64>() < q) { 1.0 } else { 0.0 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffEstimate {
    pub samples: usize,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
}

/// Monte-Carlo material payoffs with path success drawn hop by hop.
pub fn sample_material_payoff(
    params: &CrowdForwardParams,
    channel: &HopChannel,
    profile: &[Choice],
    samples: usize,
    seed: u64,
) -> Result<PayoffEstimate> {
    params.validate()?;
    channel.validate()?;
    if channel.hops.len() != params.n() {
        return Err(Error::Dimension(format!("{} hop lists for {} players", channel.hops.len(), params.n())));
    }
    if samples < 2 {
        return Err(invalid("samples", "need at least 2"));
    }
    let mut rng = stream_rng(seed, "crowd-forwarding-hops");
    let n = params.n();
    let (mut sum, mut sq) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..samples {
        let drawn = CrowdForwardParams {
            success: channel.sample(&mut rng),
            ..params.clone()
        };
        for (i, r) in material_payoff(&drawn, profile)?.values().iter().enumerate() {
            sum[i] += r;
            sq[i] += r * r;
        }
    }
    let k = samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / k).collect();
    let std_error = sq
        .iter()
        .zip(&mean)
        .map(|(q, m)| ((q / k - m * m).max(0.0) * k / (k - 1.0) / k).sqrt())
        .collect();
    Ok(PayoffEstimate { samples, mean, std_error })
}

/// The one-shot game as a single-state, one-period mean-field-type game
/// with actions `F`, `nF`. Empathy outside a node's neighbourhood is
/// dropped.
pub fn as_mft_game(params: &CrowdForwardParams) -> Result<TabularGame> {
    params.validate()?;
    let n = params.n();
    let profiles = all_profiles(n);
    let mut payoff = vec![vec![Vec::with_capacity(profiles.len())]; n];
    for prof in &profiles {
        for (i, r) in material_payoff(params, prof)?.values().iter().enumerate() {
            payoff[i][0].push(*r);
        }
    }
    let empathy = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i != j && params.neighbors.contains(i, j) { params.empathy.get(i, j) } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(TabularGame {
        states: vec!["network".into()],
        actions: vec![vec!["F".into(), "nF".into()]; n],
        horizon: 1,
        payoff,
        crowding: Vec::new(),
        terminal: vec![vec![0.0]; n],
        kernel: vec![vec![vec![1.0]; profiles.len()]],
        empathy: EmpathyMatrix::new_unbounded(empathy)?,
    })
}

/// All `2^n` profiles, forwarders first in lexicographic order.
pub fn all_profiles(n: usize) -> Vec<Vec<Choice>> {
    (0..1usize << n)
        .map(|bits| (0..n).map(|i| Choice::from_index((bits >> (n - 1 - i)) & 1)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Choice::{Abstain as N, Forward as F};

    fn public_good(lambda: f64) -> CrowdForwardParams {
        CrowdForwardParams::symmetric(3, 2, 0.6, 0.3, 0.5, lambda).unwrap()
    }

    #[test]
    fn material_branches() {
        let p = CrowdForwardParams::symmetric(3, 2, 0.3, 0.3, 1.0, 0.0).unwrap();
        assert_eq!(material_payoff(&p, &[N, N, N]).unwrap().values(), &[0.0, 0.0, 0.0]);
        let all = material_payoff(&p, &[F, F, F]).unwrap();
        assert!(all.values().iter().all(|v| (v - 0.8).abs() < 1e-15));
        let one = material_payoff(&p, &[F, N, N]).unwrap();
        assert!((one[0] + 0.6).abs() < 1e-15 && one[1] == 0.0 && one[2] == 0.0);
        // exactly m* forwarders: the network works and the free rider gets p
        let pivotal = material_payoff(&p, &[F, F, N]).unwrap();
        assert!((pivotal[0] - 0.7).abs() < 1e-15 && pivotal[2] == 1.0);
    }

    #[test]
    fn one_forwarder_pays_twice_gamma() {
        let p = CrowdForwardParams::symmetric(3, 2, 0.6, 0.3, 0.5, 0.0).unwrap();
        let r = material_payoff(&p, &[N, F, N]).unwrap();
        assert!((r[1] + 0.6).abs() < 1e-15);
    }

    #[test]
    fn zero_empathy_is_material() {
        let p = public_good(0.0);
        for prof in all_profiles(3) {
            assert_eq!(empathic_payoff(&p, &prof).unwrap(), material_payoff(&p, &prof).unwrap());
        }
    }

    #[test]
    fn empathic_difference_matches_expansion() {
        let p = CrowdForwardParams::symmetric(3, 2, 0.3, 0.3, 0.9, 0.5).unwrap();
        let all = empathic_payoff(&p, &[F, F, F]).unwrap();
        let dev = empathic_payoff(&p, &[N, F, F]).unwrap();
        // all forward: each gets 0.9 - 0.2; after 0 abstains: 0.9 for 0, 0.9 - 0.3 for 1 and 2
        let expected_all = 0.7 + 0.5 * (0.7 + 0.7);
        let expected_dev = 0.9 + 0.5 * (0.6 + 0.6);
        assert!((all[0] - expected_all).abs() < 1e-14);
        assert!((dev[0] - expected_dev).abs() < 1e-14);
    }

    #[test]
    fn pivotal_forwarder_keeps_forwarding_when_it_pays() {
        let p = CrowdForwardParams::symmetric(4, 2, 0.6, 0.3, 0.9, 0.2).unwrap();
        let audit = is_equilibrium(&p, &[F, F, N, N], PayoffKind::Empathic).unwrap();
        assert!(audit.gains[0] < 0.0 && audit.gains[1] < 0.0);
    }

    #[test]
    fn no_one_forwarding_is_a_material_equilibrium() {
        for (n, m, a, g, s) in [(3, 2, 0.6, 0.3, 0.5), (5, 3, 0.2, 0.9, 1.0), (4, 4, 1.0, 0.1, 0.0)] {
            let p = CrowdForwardParams::symmetric(n, m, a, g, s, 0.0).unwrap();
            assert!(is_equilibrium(&p, &vec![N; n], PayoffKind::Material).unwrap().equilibrium);
        }
    }

    #[test]
    fn empathy_threshold_of_the_cooperative_profile() {
        let profile = [F, F, N];
        let range = sustaining_range(&public_good(1.0), &profile, PayoffKind::Empathic).unwrap().unwrap();
        assert!((range.lo - 0.1).abs() < 1e-12);
        assert!((range.hi - 1.0).abs() < 1e-12);
        assert!(is_equilibrium(&public_good(0.3), &profile, PayoffKind::Empathic).unwrap().equilibrium);
        assert!(!is_equilibrium(&public_good(0.05), &profile, PayoffKind::Empathic).unwrap().equilibrium);
    }

    #[test]
    fn reciprocity_threshold_by_hand() {
        // forwarder: gain 0.1 - 0.075 s; abstainer: -0.4 + 0.1 s
        let profile = [F, F, N];
        let range = sustaining_range(&public_good(1.0), &profile, PayoffKind::Reciprocity).unwrap().unwrap();
        assert!((range.lo - 4.0 / 3.0).abs() < 1e-12);
        assert!((range.hi - 4.0).abs() < 1e-12);
    }

    #[test]
    fn kindness_by_hand() {
        let p = public_good(0.0);
        let k = kindness_matrix(&p, &[F, F, N]).unwrap();
        assert!((k[0][1] - 0.25).abs() < 1e-15 && (k[0][2] - 0.25).abs() < 1e-15);
        let perceived = perceived_kindness_matrix(&p, &[F, F, N]).unwrap();
        assert!((perceived[0][1] - 0.25).abs() < 1e-15 && (perceived[0][2] + 0.1).abs() < 1e-15);
    }

    #[test]
    fn profiles_parse_and_enumerate() {
        assert_eq!(parse_profile("F, nF,F").unwrap(), vec![F, N, F]);
        assert!(parse_profile("F,x").is_err());
        let all = all_profiles(3);
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], vec![F, F, F]);
        assert_eq!(all[7], vec![N, N, N]);
    }

    #[test]
    fn hop_sampler_is_deterministic_and_unbiased() {
        let p = public_good(0.0);
        let channel = HopChannel {
            hops: vec![vec![0.9, 0.8], vec![0.7], vec![1.0, 0.5, 0.9]],
        };
        let exact = CrowdForwardParams {
            success: channel.path_success(),
            ..p.clone()
        };
        let profile = [F, F, N];
        let a = sample_material_payoff(&p, &channel, &profile, 20_000, 7).unwrap();
        let b = sample_material_payoff(&p, &channel, &profile, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let truth = material_payoff(&exact, &profile).unwrap();
        for i in 0..3 {
            assert!((a.mean[i] - truth[i]).abs() < 4.0 * a.std_error[i] + 1e-12);
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(CrowdForwardParams::symmetric(2, 2, 0.1, 0.1, 0.5, 0.0).is_err());
        assert!(CrowdForwardParams::symmetric(3, 4, 0.1, 0.1, 0.5, 0.0).is_err());
        assert!(CrowdForwardParams::symmetric(3, 2, 0.0, 0.1, 0.5, 0.0).is_err());
        assert!(CrowdForwardParams::symmetric(3, 2, 0.1, 0.1, 1.5, 0.0).is_err());
    }

    fn params_strategy() -> impl Strategy<Value = CrowdForwardParams> {
        (3usize..7)
            .prop_flat_map(|n| (Just(n), 2..=n, 0.01..2.0f64, 0.01..2.0f64, prop::collection::vec(0.0..=1.0f64, n)))
            .prop_map(|(n, m, alpha, gamma, success)| CrowdForwardParams {
                threshold: m,
                alpha,
                gamma,
                success,
                empathy: EmpathyMatrix::zeros(n),
                reciprocity: None,
                neighbors: Neighbors::All,
            })
    }

    proptest! {
        #[test]
        fn budget_identity(p in params_strategy(), bits in any::<u64>()) {
            let n = p.n();
            let profile: Vec<Choice> = (0..n).map(|i| Choice::from_index(((bits >> i) & 1) as usize)).collect();
            let m = forwarders(&profile);
            let r = material_payoff(&p, &profile).unwrap();
            let works = m >= p.threshold;
            let paid: f64 = (0..n)
                .filter(|&i| profile[i] == F)
                .map(|i| if works { p.success[i] } else { 0.0 } - r[i])
                .sum();
            prop_assert!((paid - sharing_budget(&p, &profile).unwrap()).abs() < 1e-12);
            if m > 0 {
                let cost = if works { p.alpha } else { p.gamma };
                prop_assert!((paid - p.threshold as f64 * cost).abs() < 1e-12);
            }
        }

        #[test]
        fn group_kindness_has_the_closed_form(p in params_strategy(), bits in any::<u64>()) {
            let n = p.n();
            let profile: Vec<Choice> = (0..n).map(|i| Choice::from_index(((bits >> i) & 1) as usize)).collect();
            for i in 0..n {
                if let Some(expected) = kindness_closed_form(&p, &profile, i).unwrap() {
                    prop_assert!((group_kindness(&p, &profile, i).unwrap() - expected).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn material_audit_matches_deviation_scan(p in params_strategy(), bits in any::<u64>()) {
            let n = p.n();
            let profile: Vec<Choice> = (0..n).map(|i| Choice::from_index(((bits >> i) & 1) as usize)).collect();
            let game = CrowdGame(&p);
            let idx = indices(&profile);
            let mut stable = true;
            for i in 0..n {
                for a in 0..2 {
                    let mut dev = idx.clone();
                    dev[i] = a;
                    if game.payoff(i, &dev) > game.payoff(i, &idx) + AUDIT_TOL {
                        stable = false;
                    }
                }
            }
            prop_assert_eq!(is_equilibrium(&p, &profile, PayoffKind::Material).unwrap().equilibrium, stable);
            prop_assert_eq!(is_equilibrium(&p, &profile, PayoffKind::Empathic).unwrap().equilibrium, stable);
        }
    }
}
