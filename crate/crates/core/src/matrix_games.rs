//! Two-player matrix games: random-matrix expectation, pure and 2x2 mixed
//! Nash enumeration, and the collision-channel and forwarding instances.
//!
//! Row player is player 1, column player is player 2. In the forwarding
//! games action 0 is `F` (forward) and action 1 is `nF`; in the collision
//! game action 0 is `T` (transmit) and action 1 is `W` (wait).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::empathy::{empathic_transform, EmpathyMatrix, Neighbors, NormalForm, PayoffProfile};
use crate::error::{invalid, Error, Result};

/// Tolerance for payoff ties in the equilibrium enumeration.
pub const TIE_TOL: f64 = 1e-12;
/// Tolerance of the independent best-response audit.
pub const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BimatrixGame {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub payoff1: Vec<Vec<f64>>,
    pub payoff2: Vec<Vec<f64>>,
}

impl BimatrixGame {
    pub fn new(
        rows: Vec<String>,
        cols: Vec<String>,
        payoff1: Vec<Vec<f64>>,
        payoff2: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let g = Self {
            rows,
            cols,
            payoff1,
            payoff2,
        };
        g.validate()?;
        Ok(g)
    }

    /// Checks shapes and finiteness; used after deserialization.
    pub fn validate(&self) -> Result<()> {
        let (r, c) = (self.rows.len(), self.cols.len());
        if r == 0 || c == 0 {
            return Err(Error::Dimension("a game needs at least one action per player".into()));
        }
        for (name, m) in [("payoff1", &self.payoff1), ("payoff2", &self.payoff2)] {
            if m.len() != r || m.iter().any(|row| row.len() != c) {
                return Err(Error::Dimension(format!("{name} must be {r}x{c}")));
            }
            if m.iter().flatten().any(|v| !v.is_finite()) {
                return Err(invalid(name, "non-finite entry"));
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn cell(&self, r: usize, c: usize) -> (f64, f64) {
        (self.payoff1[r][c], self.payoff2[r][c])
    }

    /// Applies the empathic transform cell by cell.
    pub fn with_empathy(&self, lambda: &EmpathyMatrix) -> Result<Self> {
        if lambda.n() != 2 {
            return Err(Error::Dimension("bimatrix games need a 2x2 empathy matrix".into()));
        }
        let mut out = self.clone();
        let (nr, nc) = self.shape();
        for r in 0..nr {
            for c in 0..nc {
                let material = PayoffProfile::new(vec![self.payoff1[r][c], self.payoff2[r][c]])?;
                let t = empathic_transform(&material, lambda, &Neighbors::All)?;
                out.payoff1[r][c] = t[0];
                out.payoff2[r][c] = t[1];
            }
        }
        Ok(out)
    }

    /// Sub-game keeping only the listed row and column actions.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Self {
        let pick = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            rows.iter().map(|&r| cols.iter().map(|&c| m[r][c]).collect()).collect()
        };
        Self {
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
            cols: cols.iter().map(|&c| self.cols[c].clone()).collect(),
            payoff1: pick(&self.payoff1),
            payoff2: pick(&self.payoff2),
        }
    }

    /// Expected payoffs `(u1, u2)` of a mixed profile.
    pub fn expected(&self, row: &[f64], col: &[f64]) -> (f64, f64) {
        let (mut u1, mut u2) = (0.0, 0.0);
        for (r, &x) in row.iter().enumerate() {
            for (c, &y) in col.iter().enumerate() {
                u1 += x * y * self.payoff1[r][c];
                u2 += x * y * self.payoff2[r][c];
            }
        }
        (u1, u2)
    }
}

impl NormalForm for BimatrixGame {
    fn num_players(&self) -> usize {
        2
    }

    fn num_actions(&self, player: usize) -> usize {
        if player == 0 {
            self.rows.len()
        } else {
            self.cols.len()
        }
    }

    fn payoff(&self, player: usize, profile: &[usize]) -> f64 {
        let (r, c) = (profile[0], profile[1]);
        if player == 0 {
            self.payoff1[r][c]
        } else {
            self.payoff2[r][c]
        }
    }
}

/// `coeff * prod_k 1{event_k}` with independent events of the given success
/// probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorTerm {
    pub coeff: f64,
    pub probs: Vec<f64>,
}

/// A random payoff entry: a deterministic constant plus indicator terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RandomEntry {
    pub constant: f64,
    pub terms: Vec<IndicatorTerm>,
}

impl RandomEntry {
    pub fn constant(value: f64) -> Self {
        Self {
            constant: value,
            terms: Vec::new(),
        }
    }

    pub fn indicator(coeff: f64, probs: Vec<f64>) -> Self {
        Self {
            constant: 0.0,
            terms: vec![IndicatorTerm { coeff, probs }],
        }
    }

    pub fn plus_constant(mut self, value: f64) -> Self {
        self.constant += value;
        self
    }

    pub fn expectation(&self) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|t| t.coeff * t.probs.iter().product::<f64>())
                .sum::<f64>()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .filter(|t| t.probs.iter().all(|&p| rng.random::<f64>() < p))
                .map(|t| t.coeff)
                .sum::<f64>()
    }

    fn validate(&self) -> Result<()> {
        if !self.constant.is_finite() {
            return Err(invalid("constant", "not finite"));
        }
        for t in &self.terms {
            if !t.coeff.is_finite() {
                return Err(invalid("coeff", "not finite"));
            }
            if let Some(p) = t.probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(invalid("probability", format!("{p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// A matrix game whose entries are random through channel-success events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomMatrixGame {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    /// `cells[r][c] = [entry of player 1, entry of player 2]`.
    pub cells: Vec<Vec<[RandomEntry; 2]>>,
}

impl RandomMatrixGame {
    pub fn new(rows: Vec<String>, cols: Vec<String>, cells: Vec<Vec<[RandomEntry; 2]>>) -> Result<Self> {
        if cells.len() != rows.len() || cells.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::Dimension("cell grid does not match action labels".into()));
        }
        for e in cells.iter().flatten().flatten() {
            e.validate()?;
        }
        Ok(Self { rows, cols, cells })
    }

    /// Collision channel: a lone transmitter succeeds when its SNR clears the
    /// threshold (probabilities `p1`, `p2`); simultaneous transmissions
    /// collide.
    pub fn collision(p1: f64, p2: f64) -> Result<Self> {
        let zero = || [RandomEntry::constant(0.0), RandomEntry::constant(0.0)];
        Self::new(
            labels(&["T", "W"]),
            labels(&["T", "W"]),
            vec![
                vec![zero(), [RandomEntry::indicator(1.0, vec![p1]), RandomEntry::constant(0.0)]],
                vec![[RandomEntry::constant(0.0), RandomEntry::indicator(1.0, vec![p2])], zero()],
            ],
        )
    }

    /// Two-player forwarding game. Each `*_hops` slice lists the per-hop
    /// success probabilities whose product forms the corresponding link
    /// indicator.
    pub fn forwarding(
        m11_hops: &[f64],
        m21_hops: &[f64],
        n11_hops: &[f64],
        n12_hops: &[f64],
        c1: f64,
        c2: f64,
    ) -> Result<Self> {
        let ind = |h: &[f64]| RandomEntry::indicator(1.0, h.to_vec());
        Self::new(
            labels(&["F", "nF"]),
            labels(&["F", "nF"]),
            vec![
                vec![
                    [ind(m11_hops).plus_constant(-c1), ind(n11_hops).plus_constant(-c2)],
                    [RandomEntry::constant(-c1), ind(n12_hops)],
                ],
                vec![
                    [ind(m21_hops), RandomEntry::constant(-c2)],
                    [RandomEntry::constant(0.0), RandomEntry::constant(0.0)],
                ],
            ],
        )
    }

    /// One realization of the random payoff matrix.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BimatrixGame {
        let (p1, p2) = self.map_cells(|e| e.sample(rng));
        BimatrixGame {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            payoff1: p1,
            payoff2: p2,
        }
    }

    fn map_cells(&self, mut f: impl FnMut(&RandomEntry) -> f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut p1 = Vec::with_capacity(self.cells.len());
        let mut p2 = Vec::with_capacity(self.cells.len());
        for row in &self.cells {
            p1.push(row.iter().map(|cell| f(&cell[0])).collect());
            p2.push(row.iter().map(|cell| f(&cell[1])).collect());
        }
        (p1, p2)
    }
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Replaces every random entry by its expectation.
pub fn expected_game(rmg: &RandomMatrixGame) -> BimatrixGame {
    let (payoff1, payoff2) = rmg.map_cells(RandomEntry::expectation);
    BimatrixGame {
        rows: rmg.rows.clone(),
        cols: rmg.cols.clone(),
        payoff1,
        payoff2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NashOptions {
    /// Require every deviation to be strictly worse.
    pub strict: bool,
    pub tol: f64,
}

impl Default for NashOptions {
    fn default() -> Self {
        Self {
            strict: false,
            tol: TIE_TOL,
        }
    }
}

/// Pure equilibria under the default weak (tie-inclusive) criterion.
pub fn pure_nash(g: &BimatrixGame) -> Vec<(usize, usize)> {
    pure_nash_with(g, NashOptions::default())
}

pub fn pure_nash_with(g: &BimatrixGame, opts: NashOptions) -> Vec<(usize, usize)> {
    let (nr, nc) = g.shape();
    let ok = |own: f64, alt: f64| {
        if opts.strict {
            own > alt + opts.tol
        } else {
            own >= alt - opts.tol
        }
    };
    let mut out = Vec::new();
    for r in 0..nr {
        for c in 0..nc {
            let row_ok = (0..nr).filter(|&r2| r2 != r).all(|r2| ok(g.payoff1[r][c], g.payoff1[r2][c]));
            let col_ok = (0..nc).filter(|&c2| c2 != c).all(|c2| ok(g.payoff2[r][c], g.payoff2[r][c2]));
            if row_ok && col_ok {
                out.push((r, c));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedProfile {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// A continuum of equilibria: player 1 puts probability in `row_first` on
/// its first action while player 2 puts probability in `col_first` on its
/// first action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumFamily {
    pub row_first: Interval,
    pub col_first: Interval,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EquilibriumSet {
    pub pure: Vec<(usize, usize)>,
    pub mixed: Vec<MixedProfile>,
    pub families: Vec<EquilibriumFamily>,
    /// Set when the game has a continuum of equilibria.
    pub degenerate: bool,
}

impl EquilibriumSet {
    pub fn contains_pure(&self, r: usize, c: usize) -> bool {
        self.pure.contains(&(r, c))
    }

    /// Every listed profile as mixed strategies, with families represented
    /// by their endpoints and midpoints.
    pub fn sample_profiles(&self, rows: usize, cols: usize) -> Vec<MixedProfile> {
        let onehot = |n: usize, a: usize| (0..n).map(|k| if k == a { 1.0 } else { 0.0 }).collect();
        let mut out: Vec<MixedProfile> = self
            .pure
            .iter()
            .map(|&(r, c)| MixedProfile {
                row: onehot(rows, r),
                col: onehot(cols, c),
            })
            .collect();
        out.extend(self.mixed.iter().cloned());
        for f in &self.families {
            for p in [f.row_first.lo, f.row_first.mid(), f.row_first.hi] {
                for q in [f.col_first.lo, f.col_first.mid(), f.col_first.hi] {
                    out.push(MixedProfile {
                        row: binary_mix(rows, p),
                        col: binary_mix(cols, q),
                    });
                }
            }
        }
        out
    }
}

fn binary_mix(n: usize, first: f64) -> Vec<f64> {
    if n == 1 {
        vec![1.0]
    } else {
        vec![first, 1.0 - first]
    }
}

/// Largest gain any player can obtain by a unilateral pure deviation from
/// the mixed profile.
pub fn best_response_gap(g: &BimatrixGame, profile: &MixedProfile) -> f64 {
    let (u1, u2) = g.expected(&profile.row, &profile.col);
    let (nr, nc) = g.shape();
    let onehot = |n: usize, a: usize| -> Vec<f64> { (0..n).map(|k| if k == a { 1.0 } else { 0.0 }).collect() };
    let best1 = (0..nr)
        .map(|r| g.expected(&onehot(nr, r), &profile.col).0)
        .fold(f64::NEG_INFINITY, f64::max);
    let best2 = (0..nc)
        .map(|c| g.expected(&profile.row, &onehot(nc, c)).1)
        .fold(f64::NEG_INFINITY, f64::max);
    (best1 - u1).max(best2 - u2)
}

/// `true` when no player gains more than `eps` by deviating.
pub fn audit_profile(g: &BimatrixGame, profile: &MixedProfile, eps: f64) -> bool {
    best_response_gap(g, profile) <= eps
}

/// Solution set of a linear advantage `d(x) = d0 + x (d1 - d0)` on `[0, 1]`.
#[derive(Debug, Clone, Copy)]
struct Advantage {
    d0: f64,
    d1: f64,
    tol: f64,
}

impl Advantage {
    fn at(&self, x: f64) -> f64 {
        self.d0 + x * (self.d1 - self.d0)
    }

    fn flat(&self) -> bool {
        (self.d1 - self.d0).abs() <= self.tol
    }

    /// `{x in [0,1] : d(x) >= -tol}` (sign = 1) or `{x : d(x) <= tol}`
    /// (sign = -1).
    fn region(&self, sign: f64) -> Option<Interval> {
        let (a0, a1) = (sign * self.d0, sign * self.d1);
        if self.flat() {
            return (a0 >= -self.tol).then_some(Interval { lo: 0.0, hi: 1.0 });
        }
        // root of the advantage
        let root = a0 / (a0 - a1);
        match (a0 >= -self.tol, a1 >= -self.tol) {
            (true, true) => Some(Interval { lo: 0.0, hi: 1.0 }),
            (false, false) => None,
            (true, false) => Some(Interval { lo: 0.0, hi: root.clamp(0.0, 1.0) }),
            (false, true) => Some(Interval { lo: root.clamp(0.0, 1.0), hi: 1.0 }),
        }
    }

    /// Where the player is indifferent: `None`, a single point, or all of
    /// `[0, 1]`.
    fn indifference(&self) -> Option<Interval> {
        if self.flat() {
            return (self.d0.abs() <= self.tol).then_some(Interval { lo: 0.0, hi: 1.0 });
        }
        let root = self.d0 / (self.d0 - self.d1);
        (0.0..=1.0).contains(&root).then_some(Interval::point(root))
    }
}

fn open_part(iv: Option<Interval>) -> Option<Interval> {
    let iv = iv?;
    if iv.hi <= 0.0 || iv.lo >= 1.0 {
        return None;
    }
    Some(iv)
}

/// Full equilibrium set of a 2x2 game: pure equilibria, the interior mixed
/// equilibrium from the indifference conditions, and continua of equilibria
/// when payoffs tie.
pub fn mixed_nash_2x2(g: &BimatrixGame) -> Result<EquilibriumSet> {
    if g.shape() != (2, 2) {
        return Err(Error::Dimension(format!("expected a 2x2 game, got {:?}", g.shape())));
    }
    let (a, b) = (&g.payoff1, &g.payoff2);
    let tol = TIE_TOL;
    // player 1's advantage of row 0 as a function of q = P(col 0)
    let adv1 = Advantage {
        d0: a[0][1] - a[1][1],
        d1: a[0][0] - a[1][0],
        tol,
    };
    // player 2's advantage of col 0 as a function of p = P(row 0)
    let adv2 = Advantage {
        d0: b[1][0] - b[1][1],
        d1: b[0][0] - b[0][1],
        tol,
    };

    let mut set = EquilibriumSet {
        pure: pure_nash(g),
        ..Default::default()
    };
    let push = |set: &mut EquilibriumSet, p: Interval, q: Interval| {
        if p.is_point() && q.is_point() {
            set.mixed.push(MixedProfile {
                row: vec![p.lo, 1.0 - p.lo],
                col: vec![q.lo, 1.0 - q.lo],
            });
        } else {
            set.families.push(EquilibriumFamily {
                row_first: p,
                col_first: q,
            });
        }
    };

    // one player pure, the other strictly mixing
    for p in [1.0, 0.0] {
        if adv2.at(p).abs() <= tol {
            let sign = if p == 1.0 { 1.0 } else { -1.0 };
            if let Some(q) = open_part(adv1.region(sign)) {
                push(&mut set, Interval::point(p), q);
            }
        }
    }
    for q in [1.0, 0.0] {
        if adv1.at(q).abs() <= tol {
            let sign = if q == 1.0 { 1.0 } else { -1.0 };
            if let Some(p) = open_part(adv2.region(sign)) {
                push(&mut set, p, Interval::point(q));
            }
        }
    }
    // both mixing
    if let (Some(q), Some(p)) = (open_part(adv1.indifference()), open_part(adv2.indifference())) {
        push(&mut set, p, q);
    }
    set.degenerate = !set.families.is_empty();
    Ok(set)
}

/// Equilibrium set of a game where each player has one or two actions.
pub fn small_game_equilibria(g: &BimatrixGame) -> Result<EquilibriumSet> {
    match g.shape() {
        (2, 2) => mixed_nash_2x2(g),
        (1, 1) => Ok(EquilibriumSet {
            pure: vec![(0, 0)],
            ..Default::default()
        }),
        (1, 2) | (2, 1) => {
            let mut set = EquilibriumSet {
                pure: pure_nash(g),
                ..Default::default()
            };
            if set.pure.len() == 2 {
                // the free player is indifferent between its two actions
                let full = Interval { lo: 0.0, hi: 1.0 };
                let fixed = Interval::point(1.0);
                set.families.push(if g.shape().0 == 1 {
                    EquilibriumFamily { row_first: fixed, col_first: full }
                } else {
                    EquilibriumFamily { row_first: full, col_first: fixed }
                });
                set.degenerate = true;
            }
            Ok(set)
        }
        s => Err(Error::Dimension(format!("unsupported game shape {s:?}"))),
    }
}

/// Empathic collision channel game for success probabilities `p1`, `p2`
/// and altruism levels `lambda1`, `lambda2`.
pub fn collision_empathic_game(p1: f64, p2: f64, lambda1: f64, lambda2: f64) -> Result<BimatrixGame> {
    let material = expected_game(&RandomMatrixGame::collision(p1, p2)?);
    material.with_empathy(&EmpathyMatrix::pair(lambda1, lambda2)?)
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid(name, format!("{v} outside [0, 1]")));
    }
    Ok(())
}

/// Equilibrium payoff gap `max{(1 - lambda_2) p1, (1 - lambda_1) p2}`.
pub fn collision_gap(p1: f64, p2: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    check_unit("p1", p1)?;
    check_unit("p2", p2)?;
    check_unit("lambda1", lambda1)?;
    check_unit("lambda2", lambda2)?;
    Ok(((1.0 - lambda2) * p1).max((1.0 - lambda1) * p2))
}

/// The same gap measured on the enumerated pure equilibria of the empathic
/// game: the largest `|u1 - u2|` over them.
pub fn collision_gap_by_enumeration(p1: f64, p2: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    let g = collision_empathic_game(p1, p2, lambda1, lambda2)?;
    Ok(pure_nash(&g)
        .into_iter()
        .map(|(r, c)| (g.payoff1[r][c] - g.payoff2[r][c]).abs())
        .fold(0.0, f64::max))
}

/// Expected two-player forwarding game with empathy coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardingParams {
    pub m11: f64,
    pub m21: f64,
    pub n11: f64,
    pub n12: f64,
    pub c1: f64,
    pub c2: f64,
    #[serde(default)]
    pub lambda1: f64,
    #[serde(default)]
    pub lambda2: f64,
}

impl ForwardingParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("m11", self.m11), ("m21", self.m21), ("n11", self.n11), ("n12", self.n12)] {
            check_unit(name, v)?;
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(name, format!("cost {v} must be finite and non-negative")));
            }
        }
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !v.is_finite() {
                return Err(invalid(name, "not finite"));
            }
        }
        Ok(())
    }

    pub fn with_lambdas(&self, lambda1: f64, lambda2: f64) -> Self {
        Self {
            lambda1,
            lambda2,
            ..*self
        }
    }
}

/// Expected material forwarding game (empathy ignored).
pub fn material_forwarding_game(fp: &ForwardingParams) -> Result<BimatrixGame> {
    fp.validate()?;
    BimatrixGame::new(
        labels(&["F", "nF"]),
        labels(&["F", "nF"]),
        vec![vec![fp.m11 - fp.c1, -fp.c1], vec![fp.m21, 0.0]],
        vec![vec![fp.n11 - fp.c2, fp.n12], vec![-fp.c2, 0.0]],
    )
}

/// Empathy-transformed forwarding game with entries
/// `m11 - c1 + l1 (n11 - c2)`, `-c1 + l1 n12`, `m21 - l1 c2` for player 1 and
/// `l2 (m11 - c1) + n11 - c2`, `-l2 c1 + n12`, `l2 m21 - c2` for player 2.
pub fn empathic_game(fp: &ForwardingParams) -> Result<BimatrixGame> {
    fp.validate()?;
    let (l1, l2) = (fp.lambda1, fp.lambda2);
    BimatrixGame::new(
        labels(&["F", "nF"]),
        labels(&["F", "nF"]),
        vec![
            vec![fp.m11 - fp.c1 + l1 * (fp.n11 - fp.c2), -fp.c1 + l1 * fp.n12],
            vec![fp.m21 - l1 * fp.c2, 0.0],
        ],
        vec![
            vec![l2 * (fp.m11 - fp.c1) + fp.n11 - fp.c2, -l2 * fp.c1 + fp.n12],
            vec![l2 * fp.m21 - fp.c2, 0.0],
        ],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OutcomeLabel {
    #[serde(rename = "FF-unique")]
    FfUnique,
    #[serde(rename = "FF+nFnF+mixed")]
    FfNfnfMixed,
    #[serde(rename = "FnF")]
    FnF,
    #[serde(rename = "nFF")]
    NfF,
    #[serde(rename = "nFnF")]
    NfNf,
    #[serde(rename = "degenerate")]
    Degenerate,
    /// An equilibrium structure outside the tabulated outcomes.
    #[serde(rename = "other")]
    Other,
}

impl std::fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OutcomeLabel::FfUnique => "FF-unique",
            OutcomeLabel::FfNfnfMixed => "FF+nFnF+mixed",
            OutcomeLabel::FnF => "FnF",
            OutcomeLabel::NfF => "nFF",
            OutcomeLabel::NfNf => "nFnF",
            OutcomeLabel::Degenerate => "degenerate",
            OutcomeLabel::Other => "other",
        };
        f.write_str(s)
    }
}

/// Empathy thresholds separating the outcome bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// `(c1 + m21 - m11) / n11`: player 1 forwards against `F` above it.
    pub player1_medium: f64,
    /// `c1 / n12`: `F` dominant for player 1 above it.
    pub player1_high: f64,
    /// `(c2 + n12 - n11) / m11`: player 2 forwards against `F` above it.
    pub player2_medium: f64,
    /// `(c2 + n12 - n11) / (m11 + c1)`, an alternative reading reported for
    /// cross-reference only.
    pub player2_medium_alt: f64,
    /// `c2 / m21`: `F` dominant for player 2 above it.
    pub player2_high: f64,
}

impl Thresholds {
    pub fn of(fp: &ForwardingParams) -> Self {
        Self {
            player1_medium: (fp.c1 + fp.m21 - fp.m11) / fp.n11,
            player1_high: fp.c1 / fp.n12,
            player2_medium: (fp.c2 + fp.n12 - fp.n11) / fp.m11,
            player2_medium_alt: (fp.c2 + fp.n12 - fp.n11) / (fp.m11 + fp.c1),
            player2_high: fp.c2 / fp.m21,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Band {
    Negative,
    Low,
    Medium,
    High,
    /// On a threshold, where payoffs tie.
    Boundary,
}

const BAND_TOL: f64 = 1e-12;

fn band(lambda: f64, medium: f64, high: f64) -> Band {
    if (lambda - medium).abs() <= BAND_TOL || (lambda - high).abs() <= BAND_TOL {
        Band::Boundary
    } else if lambda < 0.0 {
        Band::Negative
    } else if lambda < medium {
        Band::Low
    } else if lambda < high {
        Band::Medium
    } else {
        Band::High
    }
}

/// Outcome predicted by the summary table for a pair of bands.
pub fn table_outcome(b1: Band, b2: Band) -> OutcomeLabel {
    use Band::*;
    use OutcomeLabel::*;
    match (b1, b2) {
        (Boundary, _) | (_, Boundary) => Degenerate,
        (High, Negative | Low) => FnF,
        (High, Medium | High) => FfUnique,
        (Medium, Negative | Low) => NfNf,
        (Medium, Medium) => FfNfnfMixed,
        (Medium, High) => FfUnique,
        (Low | Negative, High) => NfF,
        (Low | Negative, _) => NfNf,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeReport {
    pub label: OutcomeLabel,
    pub equilibria: EquilibriumSet,
    pub thresholds: Thresholds,
    pub bands: (Band, Band),
    /// Table prediction; `None` when the thresholds are not ordered as the
    /// table assumes (`0 < medium < high` for both players).
    pub table_label: Option<OutcomeLabel>,
    pub agrees_with_table: Option<bool>,
}

fn label_from_set(set: &EquilibriumSet) -> OutcomeLabel {
    const FF: (usize, usize) = (0, 0);
    const FNF: (usize, usize) = (0, 1);
    const NFF: (usize, usize) = (1, 0);
    const NFNF: (usize, usize) = (1, 1);
    if set.degenerate {
        return OutcomeLabel::Degenerate;
    }
    let mut pure = set.pure.clone();
    pure.sort_unstable();
    match (pure.as_slice(), set.mixed.len()) {
        ([FF], 0) => OutcomeLabel::FfUnique,
        ([FF, NFNF], 1) => OutcomeLabel::FfNfnfMixed,
        ([FNF], 0) => OutcomeLabel::FnF,
        ([NFF], 0) => OutcomeLabel::NfF,
        ([NFNF], 0) => OutcomeLabel::NfNf,
        _ => OutcomeLabel::Other,
    }
}

/// Classifies the empathic forwarding game by enumerating its equilibria and
/// cross-references the result against the threshold bands.
pub fn classify_outcome(fp: &ForwardingParams) -> Result<OutcomeReport> {
    let g = empathic_game(fp)?;
    let equilibria = mixed_nash_2x2(&g)?;
    let thresholds = Thresholds::of(fp);
    let bands = (
        band(fp.lambda1, thresholds.player1_medium, thresholds.player1_high),
        band(fp.lambda2, thresholds.player2_medium, thresholds.player2_high),
    );
    let mut label = label_from_set(&equilibria);
    if bands.0 == Band::Boundary || bands.1 == Band::Boundary {
        label = OutcomeLabel::Degenerate;
    }
    let ordered = |m: f64, h: f64| m.is_finite() && h.is_finite() && 0.0 < m && m < h;
    let table_label = (ordered(thresholds.player1_medium, thresholds.player1_high)
        && ordered(thresholds.player2_medium, thresholds.player2_high))
    .then(|| table_outcome(bands.0, bands.1));
    let agrees_with_table = table_label.map(|t| t == label);
    if agrees_with_table == Some(false) {
        log::warn!(
            "forwarding outcome {label} disagrees with the threshold table ({}) at lambda = ({}, {})",
            table_label.unwrap(),
            fp.lambda1,
            fp.lambda2
        );
    }
    Ok(OutcomeReport {
        label,
        equilibria,
        thresholds,
        bands,
        table_label,
        agrees_with_table,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PlayerType {
    /// High perspective taking: forwards whenever the channel allows.
    #[serde(rename = "PT")]
    PerspectiveTaker,
    /// Selfish: best-responds with material payoffs.
    #[serde(rename = "Se")]
    Selfish,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingOutcome {
    pub row_type: PlayerType,
    pub col_type: PlayerType,
    /// Probability of this pairing in the population.
    pub weight: f64,
    pub game: BimatrixGame,
    pub equilibria: EquilibriumSet,
    /// Distribution over (FF, FnF, nFF, nFnF) of the selected equilibrium
    /// outcome: pure equilibria weighted equally, otherwise the first mixed
    /// equilibrium.
    pub outcome: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeInteraction {
    pub mu: f64,
    pub pairings: Vec<PairingOutcome>,
    /// Population-weighted mixture over (FF, FnF, nFF, nFnF).
    pub mixture: [f64; 4],
}

fn outcome_distribution(g: &BimatrixGame, set: &EquilibriumSet, rows: &[usize], cols: &[usize]) -> [f64; 4] {
    let mut out = [0.0; 4];
    let cell = |r: usize, c: usize| 2 * rows[r] + cols[c];
    if !set.pure.is_empty() {
        let w = 1.0 / set.pure.len() as f64;
        for &(r, c) in &set.pure {
            out[cell(r, c)] += w;
        }
    } else if let Some(m) = set.mixed.first() {
        for r in 0..g.rows.len() {
            for c in 0..g.cols.len() {
                out[cell(r, c)] += m.row[r] * m.col[c];
            }
        }
    }
    out
}

/// Equilibrium structure of the four type pairings in a population where a
/// fraction `mu` is selfish and `1 - mu` are perspective takers.
pub fn type_interaction(mu: f64, fp: &ForwardingParams) -> Result<TypeInteraction> {
    check_unit("mu", mu)?;
    let material = material_forwarding_game(fp)?;
    let actions = |t: PlayerType| -> Vec<usize> {
        match t {
            PlayerType::PerspectiveTaker => vec![0],
            PlayerType::Selfish => vec![0, 1],
        }
    };
    let share = |t: PlayerType| match t {
        PlayerType::PerspectiveTaker => 1.0 - mu,
        PlayerType::Selfish => mu,
    };
    let types = [PlayerType::PerspectiveTaker, PlayerType::Selfish];
    let mut pairings = Vec::with_capacity(4);
    let mut mixture = [0.0; 4];
    for &row_type in &types {
        for &col_type in &types {
            let (rows, cols) = (actions(row_type), actions(col_type));
            let game = material.restrict(&rows, &cols);
            let equilibria = small_game_equilibria(&game)?;
            let outcome = outcome_distribution(&game, &equilibria, &rows, &cols);
            let weight = share(row_type) * share(col_type);
            for (m, o) in mixture.iter_mut().zip(outcome) {
                *m += weight * o;
            }
            pairings.push(PairingOutcome {
                row_type,
                col_type,
                weight,
                game,
                equilibria,
                outcome,
            });
        }
    }
    Ok(TypeInteraction {
        mu,
        pairings,
        mixture,
    })
}

/// CSV rows `profile,payoff1,payoff2,type` for an equilibrium set.
pub fn equilibria_csv(g: &BimatrixGame, set: &EquilibriumSet) -> String {
    let mut out = String::from("profile,payoff1,payoff2,type\n");
    for &(r, c) in &set.pure {
        let (u1, u2) = g.cell(r, c);
        out.push_str(&format!("{}{},{u1},{u2},pure\n", g.rows[r], g.cols[c]));
    }
    for m in &set.mixed {
        let (u1, u2) = g.expected(&m.row, &m.col);
        out.push_str(&format!("row={:?} col={:?},{u1},{u2},mixed\n", m.row, m.col).replace(", ", " "));
    }
    for f in &set.families {
        let (u1, u2) = g.expected(
            &binary_mix(g.rows.len(), f.row_first.mid()),
            &binary_mix(g.cols.len(), f.col_first.mid()),
        );
        out.push_str(&format!(
            "row_first=[{} {}] col_first=[{} {}],{u1},{u2},family\n",
            f.row_first.lo, f.row_first.hi, f.col_first.lo, f.col_first.hi
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn game(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> BimatrixGame {
        BimatrixGame::new(
            labels(&["r0", "r1"]),
            labels(&["c0", "c1"]),
            a.iter().map(|r| r.to_vec()).collect(),
            b.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    fn fixture() -> ForwardingParams {
        ForwardingParams {
            m11: 1.0,
            m21: 0.8,
            n11: 1.0,
            n12: 0.9,
            c1: 0.5,
            c2: 0.5,
            lambda1: 0.0,
            lambda2: 0.0,
        }
    }

    #[test]
    fn expected_collision_game() {
        let g = expected_game(&RandomMatrixGame::collision(0.7, 0.4).unwrap());
        assert_eq!(g.cell(0, 1), (0.7, 0.0));
        assert_eq!(g.cell(1, 0), (0.0, 0.4));
        assert_eq!(g.cell(0, 0), (0.0, 0.0));
        let zero = expected_game(&RandomMatrixGame::collision(0.0, 0.0).unwrap());
        assert!(zero.payoff1.iter().chain(&zero.payoff2).flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn expected_forwarding_cell() {
        let rmg = RandomMatrixGame::forwarding(&[0.9], &[0.5], &[0.5], &[0.5], 0.2, 0.1).unwrap();
        let g = expected_game(&rmg);
        assert!((g.payoff1[0][0] - 0.7).abs() < 1e-15);
        let two_hop = RandomMatrixGame::forwarding(&[0.9, 0.5], &[1.0], &[1.0], &[1.0], 0.0, 0.0).unwrap();
        assert!((expected_game(&two_hop).payoff1[0][0] - 0.45).abs() < 1e-15);
        assert!(RandomMatrixGame::collision(1.2, 0.0).is_err());
    }

    #[test]
    fn sampled_games_average_to_the_expected_game() {
        let rmg = RandomMatrixGame::forwarding(&[0.9, 0.8], &[0.6], &[0.7], &[0.3, 0.5], 0.2, 0.1).unwrap();
        let expected = expected_game(&rmg);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 40_000;
        let mut acc = [[0.0; 2]; 2];
        for _ in 0..draws {
            let g = rmg.sample(&mut rng);
            for r in 0..2 {
                for c in 0..2 {
                    acc[r][c] += g.payoff1[r][c] / draws as f64;
                }
            }
        }
        for r in 0..2 {
            for c in 0..2 {
                // binomial standard error is below 0.0025 here
                assert!((acc[r][c] - expected.payoff1[r][c]).abs() < 0.01);
            }
        }
    }

    #[test]
    fn pure_nash_examples() {
        let collision = collision_empathic_game(0.8, 0.6, 0.0, 0.0).unwrap();
        assert!(pure_nash(&collision).contains(&(0, 0)));

        let fp = ForwardingParams {
            m11: 0.6,
            m21: 0.6,
            n11: 0.5,
            n12: 0.5,
            c1: 0.2,
            c2: 0.2,
            ..fixture()
        };
        assert_eq!(pure_nash(&material_forwarding_game(&fp).unwrap()), vec![(1, 1)]);

        let zero = game([[0.0; 2]; 2], [[0.0; 2]; 2]);
        assert_eq!(pure_nash(&zero).len(), 4);
        let strict = NashOptions {
            strict: true,
            ..Default::default()
        };
        assert!(pure_nash_with(&zero, strict).is_empty());
    }

    #[test]
    fn matching_pennies_has_a_unique_mixed_equilibrium() {
        let g = game([[1.0, -1.0], [-1.0, 1.0]], [[-1.0, 1.0], [1.0, -1.0]]);
        let set = mixed_nash_2x2(&g).unwrap();
        assert!(set.pure.is_empty());
        assert!(!set.degenerate);
        assert_eq!(set.mixed.len(), 1);
        assert_eq!(set.mixed[0].row, vec![0.5, 0.5]);
        assert_eq!(set.mixed[0].col, vec![0.5, 0.5]);
    }

    #[test]
    fn coordination_game_has_three_equilibria() {
        let g = game([[2.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 2.0]]);
        let set = mixed_nash_2x2(&g).unwrap();
        assert_eq!(set.pure, vec![(0, 0), (1, 1)]);
        assert_eq!(set.mixed.len(), 1);
        let m = &set.mixed[0];
        assert!((m.row[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.col[0] - 1.0 / 3.0).abs() < 1e-15);
        for p in set.sample_profiles(2, 2) {
            assert!(audit_profile(&g, &p, AUDIT_TOL));
        }
    }

    /// Brute-force oracle: every profile on a grid with step 1e-3 whose
    /// deviation gain is below the grid resolution.
    fn grid_equilibria(g: &BimatrixGame, step: f64) -> Vec<(f64, f64)> {
        let k = (1.0 / step).round() as usize;
        let mut out = Vec::new();
        for i in 0..=k {
            for j in 0..=k {
                let (p, q) = (i as f64 * step, j as f64 * step);
                let prof = MixedProfile {
                    row: vec![p, 1.0 - p],
                    col: vec![q, 1.0 - q],
                };
                if best_response_gap(g, &prof) <= 1e-12 {
                    out.push((p, q));
                }
            }
        }
        out
    }

    #[test]
    fn strictly_dominant_row_matches_grid_search() {
        let g = game([[3.0, 2.0], [1.0, 0.5]], [[1.0, 0.0], [0.0, 2.0]]);
        let set = mixed_nash_2x2(&g).unwrap();
        assert_eq!(set.pure, vec![(0, 0)]);
        assert!(set.mixed.is_empty() && set.families.is_empty());
        let grid = grid_equilibria(&g, 1e-3);
        assert_eq!(grid, vec![(1.0, 1.0)]);
    }

    #[test]
    fn degenerate_continuum_is_reported_as_a_family() {
        // material collision game: (T, y T + (1 - y) W) is an equilibrium for all y
        let g = collision_empathic_game(0.8, 0.0, 0.0, 0.0).unwrap();
        let set = mixed_nash_2x2(&g).unwrap();
        assert!(set.degenerate);
        assert!(set
            .families
            .iter()
            .any(|f| f.row_first.is_point() && f.row_first.lo == 1.0 && f.col_first.lo == 0.0 && f.col_first.hi == 1.0));
        for p in set.sample_profiles(2, 2) {
            assert!(audit_profile(&g, &p, AUDIT_TOL));
        }
        // the family agrees with brute force
        let grid = grid_equilibria(&g, 1e-2);
        assert!(grid.iter().filter(|(p, _)| *p == 1.0).count() == 101);
    }

    #[test]
    fn all_zero_game_is_the_whole_square() {
        let zero = game([[0.0; 2]; 2], [[0.0; 2]; 2]);
        let set = mixed_nash_2x2(&zero).unwrap();
        assert!(set.degenerate);
        assert!(set
            .families
            .iter()
            .any(|f| f.row_first.lo == 0.0 && f.row_first.hi == 1.0 && f.col_first.lo == 0.0 && f.col_first.hi == 1.0));
    }

    #[test]
    fn empathic_game_examples() {
        let base = fixture();
        assert_eq!(empathic_game(&base).unwrap(), material_forwarding_game(&base).unwrap());
        let fp = ForwardingParams {
            n12: 0.9,
            c1: 0.5,
            lambda1: 1.0,
            ..base
        };
        assert!((empathic_game(&fp).unwrap().payoff1[0][1] - 0.4).abs() < 1e-15);
        let ff = ForwardingParams {
            m11: 1.0,
            n11: 1.0,
            c1: 0.5,
            c2: 0.5,
            lambda1: 1.0,
            lambda2: 1.0,
            ..base
        };
        assert_eq!(empathic_game(&ff).unwrap().cell(0, 0), (1.0, 1.0));
        assert_eq!(empathic_game(&ff).unwrap().cell(1, 1), (0.0, 0.0));
    }

    #[test]
    fn empathic_game_equals_generic_transform() {
        for (l1, l2) in [(0.3, 0.7), (-0.4, 0.2), (0.9, -0.9)] {
            let fp = fixture().with_lambdas(l1, l2);
            let direct = empathic_game(&fp).unwrap();
            let generic = material_forwarding_game(&fp)
                .unwrap()
                .with_empathy(&EmpathyMatrix::pair(l1, l2).unwrap())
                .unwrap();
            for r in 0..2 {
                for c in 0..2 {
                    assert!((direct.payoff1[r][c] - generic.payoff1[r][c]).abs() < 1e-15);
                    assert!((direct.payoff2[r][c] - generic.payoff2[r][c]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn classify_examples() {
        let ff = classify_outcome(&fixture().with_lambdas(0.7, 0.7)).unwrap();
        assert_eq!(ff.label, OutcomeLabel::FfUnique);
        assert_eq!(ff.agrees_with_table, Some(true));
        let spite = classify_outcome(&fixture().with_lambdas(-0.3, -0.5)).unwrap();
        assert_eq!(spite.label, OutcomeLabel::NfNf);
        let fnf = classify_outcome(&fixture().with_lambdas(0.8, -0.3)).unwrap();
        assert_eq!(fnf.label, OutcomeLabel::FnF);
        let low = classify_outcome(&fixture().with_lambdas(0.5, -0.3)).unwrap();
        assert_eq!(low.label, OutcomeLabel::NfNf);
        let t = ff.thresholds;
        assert!((t.player1_medium - 0.3).abs() < 1e-15);
        assert!((t.player1_high - 0.5 / 0.9).abs() < 1e-15);
        assert!((t.player2_medium - 0.4).abs() < 1e-15);
        assert!((t.player2_high - 0.625).abs() < 1e-15);
    }

    #[test]
    fn medium_band_has_three_equilibria() {
        let r = classify_outcome(&fixture().with_lambdas(0.45, 0.5)).unwrap();
        assert_eq!(r.label, OutcomeLabel::FfNfnfMixed);
        assert_eq!(r.equilibria.pure, vec![(0, 0), (1, 1)]);
        assert_eq!(r.equilibria.mixed.len(), 1);
        let g = empathic_game(&fixture().with_lambdas(0.45, 0.5)).unwrap();
        for p in r.equilibria.sample_profiles(2, 2) {
            assert!(audit_profile(&g, &p, AUDIT_TOL));
        }
    }

    #[test]
    fn boundary_inputs_are_degenerate() {
        let r = classify_outcome(&fixture().with_lambdas(0.5 / 0.9, -0.2)).unwrap();
        assert_eq!(r.label, OutcomeLabel::Degenerate);
        assert!(r.equilibria.degenerate);
    }

    #[test]
    fn collision_gap_examples() {
        assert_eq!(collision_gap(0.8, 0.6, 0.0, 0.0).unwrap(), 0.8);
        assert_eq!(collision_gap(0.8, 0.6, 1.0, 1.0).unwrap(), 0.0);
        assert!((collision_gap(0.8, 0.6, 0.5, 0.5).unwrap() - 0.4).abs() < 1e-15);
        assert!(collision_gap(0.8, 0.6, 1.5, 0.0).is_err());
    }

    #[test]
    fn collision_gap_agrees_with_enumeration() {
        for &(p1, p2) in &[(0.8, 0.6), (0.3, 0.9), (0.5, 0.0), (0.0, 0.0)] {
            for k in 0..=10 {
                for m in 0..=10 {
                    let (l1, l2) = (k as f64 / 10.0, m as f64 / 10.0);
                    let f = collision_gap(p1, p2, l1, l2).unwrap();
                    let e = collision_gap_by_enumeration(p1, p2, l1, l2).unwrap();
                    assert!((f - e).abs() < 1e-15, "p=({p1},{p2}) l=({l1},{l2}): {f} vs {e}");
                }
            }
        }
    }

    #[test]
    fn empathy_removes_simultaneous_transmission() {
        for l in [0.05, 0.5, 1.0] {
            let g = collision_empathic_game(0.8, 0.6, l, l).unwrap();
            assert!(!pure_nash(&g).contains(&(0, 0)));
            assert!(pure_nash(&g).contains(&(0, 1)));
        }
    }

    #[test]
    fn type_interaction_examples() {
        let fp = fixture();
        let ti = type_interaction(0.4, &fp).unwrap();
        let pt_pt = &ti.pairings[0];
        assert_eq!(pt_pt.equilibria.pure, vec![(0, 0)]);
        assert_eq!(pt_pt.outcome, [1.0, 0.0, 0.0, 0.0]);
        // Se (row) vs PT: m11 - c1 = 0.5 < m21 = 0.8, so the selfish row defects
        let se_pt = ti
            .pairings
            .iter()
            .find(|p| p.row_type == PlayerType::Selfish && p.col_type == PlayerType::PerspectiveTaker)
            .unwrap();
        assert_eq!(se_pt.outcome, [0.0, 0.0, 1.0, 0.0]);
        let total: f64 = ti.mixture.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);

        let all_selfish = type_interaction(1.0, &fp).unwrap();
        let material = pure_nash(&material_forwarding_game(&fp).unwrap());
        assert_eq!(material, vec![(1, 1)]);
        assert_eq!(all_selfish.mixture, [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn tie_in_selfish_comparison_gives_any_mixture() {
        let fp = ForwardingParams {
            m11: 0.9,
            m21: 0.4,
            c1: 0.5,
            ..fixture()
        };
        let ti = type_interaction(0.5, &fp).unwrap();
        let se_pt = ti
            .pairings
            .iter()
            .find(|p| p.row_type == PlayerType::Selfish && p.col_type == PlayerType::PerspectiveTaker)
            .unwrap();
        assert!(se_pt.equilibria.degenerate);
    }

    #[test]
    fn equilibria_csv_has_one_row_per_equilibrium() {
        let g = game([[2.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 2.0]]);
        let set = mixed_nash_2x2(&g).unwrap();
        let csv = equilibria_csv(&g, &set);
        assert_eq!(csv.lines().count(), 1 + 3);
        assert!(csv.starts_with("profile,payoff1,payoff2,type\n"));
    }
}
