//! Orbit-window decomposition into positive blocks of length at most `N`,
//! zero gaps and a short tail, emitted as a certificate that a separate
//! verifier rechecks from scratch.
//!
//! For a window `k = 0, …, m−1` along the orbit of `x`, the weighted terms
//! are `g_k = (f − λ)χ_{E_N}(T^k x)` and the raw terms `r_k = (f − λ)(T^k x)`.
//! Off `E_N` we have `r_k ≤ 0 = g_k`, so `g ≥ r` term by term, and every
//! point of `E_N` starts a run of at most `N` raw terms with positive sum.

use std::fmt;

use crate::averages::{maximal_profile, sampled_maximal_at, Horizon};
use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::systems::{Evaluator, FiniteSystem, InvariantFunction, Observable, OrbitStart, SampledSystem};

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionInput<S> {
    pub m: usize,
    pub horizon: usize,
    /// `g_k`.
    pub weighted: Vec<S>,
    /// `r_k`.
    pub raw: Vec<S>,
    /// `T^k x ∈ E_N`.
    pub membership: Vec<bool>,
    /// `‖f‖∞`.
    pub f_sup: S,
    /// `λ⁺(x)`.
    pub lambda_plus: S,
}

impl<S: Scalar> DecompositionInput<S> {
    /// Assembles an input from raw terms and membership flags.
    pub fn from_raw(raw: Vec<S>, membership: Vec<bool>, horizon: usize, f_sup: S, lambda_plus: S) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::ZeroHorizon);
        }
        let m = raw.len();
        if m < horizon {
            return Err(Error::WindowTooShort { m, horizon });
        }
        assert_eq!(membership.len(), m, "one membership flag per term");
        let weighted = raw
            .iter()
            .zip(&membership)
            .map(|(r, &inside)| if inside { r.clone() } else { S::zero() })
            .collect();
        Ok(Self {
            m,
            horizon,
            weighted,
            raw,
            membership,
            f_sup,
            lambda_plus,
        })
    }

    /// `−N(‖f‖∞ + λ⁺(x))`.
    pub fn lower_bound(&self) -> S {
        -(S::from_count(self.horizon) * (self.f_sup.clone() + self.lambda_plus.clone()))
    }

    /// `Σ g_k`.
    pub fn total(&self) -> S {
        self.weighted.iter().fold(S::zero(), |a, b| a + b.clone())
    }
}

/// Builds the window for the orbit of `x` on a finite system, reading `E_N`
/// membership off the exact maximal profile.
pub fn build_input<S: Scalar>(
    system: &FiniteSystem<S>,
    f: &Observable<S>,
    lambda: &InvariantFunction<S>,
    x: usize,
    horizon: usize,
    m: usize,
) -> Result<DecompositionInput<S>> {
    system.check_point(x)?;
    lambda.check_against(system)?;
    if horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    if m < horizon {
        return Err(Error::WindowTooShort { m, horizon });
    }
    let profile = maximal_profile(system, f, Horizon::Finite(horizon))?;
    let level = lambda.at(x).clone();
    let (raw, membership) = system
        .orbit(x)
        .take(m)
        .map(|y| (f.at(y).clone() - level.clone(), profile.values[y] > level))
        .unzip();
    DecompositionInput::from_raw(raw, membership, horizon, f.sup_norm(), level.positive_part())
}

/// Window inputs for every start point of `system`, sharing one maximal
/// profile.
pub fn build_inputs_for_all<S: Scalar>(
    system: &FiniteSystem<S>,
    f: &Observable<S>,
    lambda: &InvariantFunction<S>,
    horizon: usize,
    m: usize,
) -> Result<Vec<DecompositionInput<S>>> {
    lambda.check_against(system)?;
    if horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    if m < horizon {
        return Err(Error::WindowTooShort { m, horizon });
    }
    let profile = maximal_profile(system, f, Horizon::Finite(horizon))?;
    let f_sup = f.sup_norm();
    (0..system.len())
        .map(|x| {
            let level = lambda.at(x).clone();
            let (raw, membership) = system
                .orbit(x)
                .take(m)
                .map(|y| (f.at(y).clone() - level.clone(), profile.values[y] > level))
                .unzip();
            DecompositionInput::from_raw(raw, membership, horizon, f_sup.clone(), level.positive_part())
        })
        .collect()
}

/// Builds a window on a sampled orbit for a constant `λ`. The orbit is
/// extended by `N` steps so that `f*_N` is available at every window
/// position. Float arithmetic: no exactness claim.
pub fn build_sampled_input<F: Real + Scalar>(
    system: &SampledSystem<F>,
    start: OrbitStart<F>,
    f: &Evaluator<F>,
    lambda: F,
    horizon: usize,
    m: usize,
) -> Result<DecompositionInput<F>> {
    if horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    if m < horizon {
        return Err(Error::WindowTooShort { m, horizon });
    }
    let trace = system.sample_orbit(start, m + horizon, f)?;
    let values = &trace.f_values;
    let (raw, membership) = (0..m)
        .map(|k| {
            let inside = sampled_maximal_at(&values[k..], horizon) > lambda;
            (values[k] - lambda, inside)
        })
        .unzip();
    DecompositionInput::from_raw(
        raw,
        membership,
        horizon,
        f.sup_norm(),
        num_traits::Float::max(lambda, F::zero()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    pub start: usize,
    pub len: usize,
}

impl Block {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionCertificate<S> {
    pub m: usize,
    pub horizon: usize,
    pub blocks: Vec<Block>,
    pub gaps: Vec<usize>,
    pub tail_start: usize,
    /// Weighted sum `Σ g_k` over each block.
    pub block_sums: Vec<S>,
    pub total_sum: S,
    pub lower_bound: S,
}

/// Which admissible block length the scan picks at a block start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockChoice {
    #[default]
    Shortest,
    Longest,
}

/// Left-to-right scan with the shortest admissible block at each start.
pub fn decompose<S: Scalar>(input: &DecompositionInput<S>) -> Result<DecompositionCertificate<S>> {
    decompose_with(input, BlockChoice::Shortest)
}

/// Left-to-right scan. At a position in `E_N`, a block of length `k'` with
/// `1 ≤ k' ≤ N`, `k + k' ≤ m` and positive raw sum is emitted; positions
/// outside `E_N` become gaps. A position in `E_N` whose block cannot finish
/// inside the window starts the tail, which then has fewer than `N` terms.
pub fn decompose_with<S: Scalar>(
    input: &DecompositionInput<S>,
    choice: BlockChoice,
) -> Result<DecompositionCertificate<S>> {
    let m = input.m;
    let horizon = input.horizon;
    let mut blocks = Vec::new();
    let mut block_sums = Vec::new();
    let mut gaps = Vec::new();
    let mut tail_start = m;
    let mut k = 0;
    while k < m {
        if !input.membership[k] {
            gaps.push(k);
            k += 1;
            continue;
        }
        let reach = horizon.min(m - k);
        let mut prefix = S::zero();
        let mut chosen = None;
        for len in 1..=reach {
            prefix = prefix + input.raw[k + len - 1].clone();
            if prefix > S::zero() {
                chosen = Some(len);
                if choice == BlockChoice::Shortest {
                    break;
                }
            }
        }
        match chosen {
            Some(len) => {
                let sum = input.weighted[k..k + len].iter().fold(S::zero(), |a, b| a + b.clone());
                blocks.push(Block { start: k, len });
                block_sums.push(sum);
                k += len;
            }
            None if k + horizon > m => {
                tail_start = k;
                break;
            }
            None => {
                return Err(Error::InternalContradiction { position: k, horizon });
            }
        }
    }
    Ok(DecompositionCertificate {
        m,
        horizon,
        blocks,
        gaps,
        tail_start,
        block_sums,
        total_sum: input.total(),
        lower_bound: input.lower_bound(),
    })
}

/// Checks of [`verify_certificate`]. `A`–`F` form the quantitative chain;
/// the rest are structural.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Clause {
    /// Input consistency: `g_k ∈ {r_k, 0}` by membership and `g_k ≥ r_k`.
    Input,
    /// `m` and `N` agree between certificate and input.
    Window,
    /// `1 ≤ len ≤ N`.
    BlockLength,
    /// Blocks disjoint, increasing, inside `[0, tail_start)`.
    BlockOrder,
    /// Each block starts in `E_N`.
    BlockStart,
    /// Gap positions lie outside `E_N`.
    GapMembership,
    /// Blocks and gaps partition `[0, tail_start)`.
    Coverage,
    /// Recorded block sums and total match the input.
    RecordedSums,
    /// Recorded lower bound equals `−N(‖f‖∞ + λ⁺)`.
    LowerBoundValue,
    /// (a) each block's raw sum is positive.
    A,
    /// (b) each block's weighted sum dominates its raw sum.
    B,
    /// (c) gaps contribute zero.
    C,
    /// (d) the tail has at most `N − 1` terms.
    D,
    /// (e) tail weighted ≥ tail raw ≥ `−(N−1)(‖f‖∞ + λ⁺)` ≥ lower bound.
    E,
    /// (f) total = blocks + gaps + tail, total ≥ tail, total ≥ lower bound.
    F,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Clause::Input => "input",
            Clause::Window => "window",
            Clause::BlockLength => "block-length",
            Clause::BlockOrder => "block-order",
            Clause::BlockStart => "block-start",
            Clause::GapMembership => "gap-membership",
            Clause::Coverage => "coverage",
            Clause::RecordedSums => "recorded-sums",
            Clause::LowerBoundValue => "lower-bound-value",
            Clause::A => "(a)",
            Clause::B => "(b)",
            Clause::C => "(c)",
            Clause::D => "(d)",
            Clause::E => "(e)",
            Clause::F => "(f)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseFailure {
    pub clause: Clause,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerificationReport {
    pub failures: Vec<ClauseFailure>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failed(&self, clause: Clause) -> bool {
        self.failures.iter().any(|f| f.clause == clause)
    }

    pub fn failed_clauses(&self) -> Vec<Clause> {
        let mut out: Vec<Clause> = self.failures.iter().map(|f| f.clause).collect();
        out.sort();
        out.dedup();
        out
    }

    fn fail(&mut self, clause: Clause, detail: impl Into<String>) {
        self.failures.push(ClauseFailure {
            clause,
            detail: detail.into(),
        });
    }
}

/// Rechecks a certificate against its input from scratch. Every clause is
/// evaluated; the report lists all that fail.
pub fn verify_certificate<S: Scalar>(
    cert: &DecompositionCertificate<S>,
    input: &DecompositionInput<S>,
) -> VerificationReport {
    let mut report = VerificationReport::default();
    let m = input.raw.len();
    let n = input.horizon;

    if input.weighted.len() != m || input.membership.len() != m {
        report.fail(Clause::Input, "term sequences differ in length");
        return report;
    }
    for k in 0..m {
        let expected = if input.membership[k] {
            input.raw[k].clone()
        } else {
            S::zero()
        };
        if input.weighted[k] != expected || input.weighted[k] < input.raw[k] {
            report.fail(Clause::Input, format!("term {k} breaks g = r·χ or g ≥ r"));
        }
    }
    if cert.m != m || cert.horizon != n || n == 0 {
        report.fail(
            Clause::Window,
            format!("certificate (m={}, N={}) vs input (m={m}, N={n})", cert.m, cert.horizon),
        );
        return report;
    }
    if cert.tail_start > m {
        report.fail(
            Clause::BlockOrder,
            format!("tail_start {} beyond m = {m}", cert.tail_start),
        );
        return report;
    }

    // Structure.
    let mut owner: Vec<Option<&'static str>> = vec![None; m];
    let mut previous_end = 0;
    for (i, b) in cert.blocks.iter().enumerate() {
        if b.len == 0 || b.len > n {
            report.fail(
                Clause::BlockLength,
                format!("block {i} at {} has length {}", b.start, b.len),
            );
        }
        if b.start < previous_end || b.start + b.len > cert.tail_start {
            report.fail(
                Clause::BlockOrder,
                format!(
                    "block {i} = [{}, {}) overlaps or leaves [0, {})",
                    b.start,
                    b.start + b.len,
                    cert.tail_start
                ),
            );
        }
        previous_end = previous_end.max(b.start + b.len);
        if b.start < m && !input.membership[b.start] {
            report.fail(
                Clause::BlockStart,
                format!("block {i} starts at {} outside E_N", b.start),
            );
        }
        for slot in owner.iter_mut().take((b.start + b.len).min(m)).skip(b.start) {
            if slot.replace("block").is_some() {
                report.fail(Clause::Coverage, format!("position covered twice in block {i}"));
            }
        }
    }
    for &g in &cert.gaps {
        if g >= cert.tail_start {
            report.fail(
                Clause::Coverage,
                format!("gap {g} at or past tail_start {}", cert.tail_start),
            );
            continue;
        }
        if input.membership[g] {
            report.fail(Clause::GapMembership, format!("gap {g} lies in E_N"));
        }
        if owner[g].replace("gap").is_some() {
            report.fail(Clause::Coverage, format!("gap {g} also covered elsewhere"));
        }
    }
    if let Some(k) = (0..cert.tail_start).find(|&k| owner[k].is_none()) {
        report.fail(
            Clause::Coverage,
            format!("position {k} before the tail is neither block nor gap"),
        );
    }

    // Recorded values.
    let sum_range = |v: &[S], a: usize, b: usize| v[a.min(m)..b.min(m)].iter().fold(S::zero(), |x, y| x + y.clone());
    let total = sum_range(&input.weighted, 0, m);
    if cert.block_sums.len() != cert.blocks.len() {
        report.fail(Clause::RecordedSums, "one block sum per block expected");
    } else {
        for (i, (b, s)) in cert.blocks.iter().zip(&cert.block_sums).enumerate() {
            if !s.approx_eq(&sum_range(&input.weighted, b.start, b.start + b.len)) {
                report.fail(Clause::RecordedSums, format!("block {i} sum recorded as {s}"));
            }
        }
    }
    if !cert.total_sum.approx_eq(&total) {
        report.fail(
            Clause::RecordedSums,
            format!("total recorded as {}, actual {total}", cert.total_sum),
        );
    }
    let scale = input.f_sup.clone() + input.lambda_plus.clone();
    let bound = -(S::from_count(n) * scale.clone());
    if cert.lower_bound != bound {
        report.fail(
            Clause::LowerBoundValue,
            format!("lower bound recorded as {}, expected {bound}", cert.lower_bound),
        );
    }

    // (a), (b)
    let mut blocks_weighted = S::zero();
    for (i, b) in cert.blocks.iter().enumerate() {
        let raw = sum_range(&input.raw, b.start, b.start + b.len);
        let weighted = sum_range(&input.weighted, b.start, b.start + b.len);
        if raw <= S::zero() {
            report.fail(
                Clause::A,
                format!("block {i} = ({}, {}) has raw sum {raw}", b.start, b.len),
            );
        }
        if weighted < raw {
            report.fail(Clause::B, format!("block {i} weighted sum {weighted} < raw sum {raw}"));
        }
        blocks_weighted = blocks_weighted + weighted;
    }
    // (c)
    let mut gaps_weighted = S::zero();
    for &g in cert.gaps.iter().filter(|&&g| g < m) {
        if !input.weighted[g].is_zero() {
            report.fail(Clause::C, format!("gap {g} carries {}", input.weighted[g]));
        }
        gaps_weighted = gaps_weighted + input.weighted[g].clone();
    }
    // (d)
    let tail_len = m - cert.tail_start;
    if tail_len + 1 > n {
        report.fail(Clause::D, format!("tail has {tail_len} terms, N = {n}"));
    }
    // (e)
    let tail_weighted = sum_range(&input.weighted, cert.tail_start, m);
    let tail_raw = sum_range(&input.raw, cert.tail_start, m);
    let tail_floor = -(S::from_count(n - 1) * scale);
    if tail_weighted < tail_raw || tail_raw < tail_floor || tail_floor < cert.lower_bound {
        report.fail(
            Clause::E,
            format!(
                "tail weighted {tail_weighted}, raw {tail_raw}, floor {tail_floor}, bound {}",
                cert.lower_bound
            ),
        );
    }
    // (f)
    let assembled = blocks_weighted + gaps_weighted + tail_weighted.clone();
    if !assembled.approx_eq(&cert.total_sum) || cert.total_sum < tail_weighted || cert.total_sum < cert.lower_bound {
        report.fail(
            Clause::F,
            format!(
                "total {} vs blocks+gaps+tail {assembled}, tail {tail_weighted}, bound {}",
                cert.total_sum, cert.lower_bound
            ),
        );
    }
    report
}

/// One `m` of the integrated-bound demonstration.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratedRow<S> {
    pub m: usize,
    /// `Σ_x μ(x)·Σ_{k<m} g_k(x)`.
    pub weighted_window_sum: S,
    /// `m·∫_{E_N}(f − λ)`.
    pub expected: S,
    /// `−(N/m)(‖f‖∞ + ‖λ⁺‖₁)`.
    pub bound: S,
    /// Every window sum is `≥ −N(‖f‖∞ + λ⁺(x))`.
    pub pointwise_bounds_hold: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratedBoundReport<S> {
    pub horizon: usize,
    /// `∫_{E_N}(f − λ)`.
    pub integral: S,
    pub rows: Vec<IntegratedRow<S>>,
}

impl<S: Scalar> IntegratedBoundReport<S> {
    pub fn sums_match(&self) -> bool {
        self.rows.iter().all(|r| r.weighted_window_sum == r.expected)
    }

    /// `bound(m_i) · m_i = bound(m_j) · m_j` for all rows.
    pub fn bound_scales_inversely(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[0].bound.clone() * S::from_count(w[0].m) == w[1].bound.clone() * S::from_count(w[1].m))
    }

    pub fn holds(&self) -> bool {
        self.sums_match()
            && self.bound_scales_inversely()
            && self.rows.iter().all(|r| r.pointwise_bounds_hold)
            && self.rows.iter().all(|r| self.integral >= r.bound)
    }
}

/// For each `m`, averages the window sums over start points and compares
/// with `m·∫_{E_N}(f − λ)`, which holds exactly by invariance of `μ`.
pub fn integrated_bound_demo<S: Scalar>(
    system: &FiniteSystem<S>,
    f: &Observable<S>,
    lambda: &InvariantFunction<S>,
    horizon: usize,
    m_schedule: &[usize],
) -> Result<IntegratedBoundReport<S>> {
    lambda.check_against(system)?;
    let verdict = crate::maximal::maximal_integral(system, f, Horizon::Finite(horizon), lambda)?;
    let g: Vec<S> = (0..system.len())
        .map(|x| {
            if verdict.exceedance.contains(x) {
                f.at(x).clone() - lambda.at(x).clone()
            } else {
                S::zero()
            }
        })
        .collect();
    let f_sup = f.sup_norm();
    let lambda_plus_l1 = system.integrate(lambda.positive_part().values());
    let n_s = S::from_count(horizon);
    let rows = m_schedule
        .iter()
        .map(|&m| {
            if m < horizon {
                return Err(Error::WindowTooShort { m, horizon });
            }
            let mut weighted_window_sum = S::zero();
            let mut pointwise_bounds_hold = true;
            for x in 0..system.len() {
                // m = q·p + r: q full cycles plus the first r terms.
                let p = system.period(x);
                let cycle_sum = system.orbit(x).take(p).fold(S::zero(), |acc, y| acc + g[y].clone());
                let remainder = system.orbit(x).take(m % p).fold(S::zero(), |acc, y| acc + g[y].clone());
                let window = S::from_count(m / p) * cycle_sum + remainder;
                let floor = -(n_s.clone() * (f_sup.clone() + lambda.at(x).positive_part()));
                pointwise_bounds_hold &= window >= floor;
                weighted_window_sum = weighted_window_sum + system.weight(x).clone() * window;
            }
            Ok(IntegratedRow {
                m,
                weighted_window_sum,
                expected: S::from_count(m) * verdict.integral.clone(),
                bound: -(n_s.clone() / S::from_count(m)) * (f_sup.clone() + lambda_plus_l1.clone()),
                pointwise_bounds_hold,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IntegratedBoundReport {
        horizon,
        integral: verdict.integral,
        rows,
    })
}
