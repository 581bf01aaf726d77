//! Distribution theory of the lower clearing price.
//!
//! Conditional on `N_A` sell and `N_B` buy unit orders and an imbalance `Δ`,
//! `X_lower > M` holds exactly when the number `K` of sells at or below `M`
//! and the number `L` of buys above `M` satisfy `L >= K - Δ + 1`. With
//! `K ~ Bin(N_A, F_A(M))` and `L ~ Bin(N_B, 1 - F_B(M))` independent this
//! gives the double sum evaluated below.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::placement::{PlacementModel, PowerTail};
use crate::simulate::CountsModel;

/// Largest order count accepted by the exact evaluators.
pub const MAX_EXACT_COUNT: u32 = 10_000;

/// Neumaier-compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `k ln p` with the `0^0 = 1` convention.
fn xlogy(k: u32, p: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * p.ln()
    }
}

/// `ln n!` for `n = 0..=max`.
fn ln_factorials(max: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(max as usize + 1);
    let mut acc = CompensatedSum::default();
    out.push(0.0);
    for i in 1..=max {
        acc.add((i as f64).ln());
        out.push(acc.value());
    }
    out
}

/// Binomial pmf of `Bin(n, success)` in linear space, computed term by term
/// in log space. `failure` is passed separately so that `1 - success` need
/// not be formed when it is tiny.
fn binomial_pmf(n: u32, success: f64, failure: f64, ln_fact: &[f64]) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let ln_c = ln_fact[n as usize] - ln_fact[k as usize] - ln_fact[(n - k) as usize];
            (ln_c + xlogy(k, success) + xlogy(n - k, failure)).exp()
        })
        .collect()
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {p} is not a probability")))
    }
}

fn check_counts(n_a: u32, n_b: u32) -> Result<()> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::domain("order counts must be positive"));
    }
    if n_a > MAX_EXACT_COUNT || n_b > MAX_EXACT_COUNT {
        return Err(Error::domain(format!(
            "order counts above {MAX_EXACT_COUNT} need the asymptotic evaluators"
        )));
    }
    Ok(())
}

/// `P(X_lower > M | N_A, N_B)` from `p_a = F_A(M)` and `p_b = F_B(M)`.
pub fn survival_lower(p_a: f64, p_b: f64, n_a: u32, n_b: u32) -> Result<f64> {
    survival_lower_delta(p_a, p_b, n_a, n_b, 0)
}

/// `P(X_lower > M | N_A, N_B, Δ)`; the inner index runs from
/// `max(k - Δ + 1, 0)`.
pub fn survival_lower_delta(p_a: f64, p_b: f64, n_a: u32, n_b: u32, delta: i64) -> Result<f64> {
    check_probability("p_a", p_a)?;
    check_probability("p_b", p_b)?;
    survival_lower_delta_split(p_a, 1.0 - p_a, p_b, 1.0 - p_b, n_a, n_b, delta)
}

/// As [`survival_lower_delta`] but taking the survival probabilities
/// `q_a = 1 - F_A(M)` and `q_b = 1 - F_B(M)`, which keeps full relative
/// precision deep in the tail.
pub fn survival_lower_delta_tails(
    q_a: f64,
    q_b: f64,
    n_a: u32,
    n_b: u32,
    delta: i64,
) -> Result<f64> {
    check_probability("q_a", q_a)?;
    check_probability("q_b", q_b)?;
    survival_lower_delta_split(1.0 - q_a, q_a, 1.0 - q_b, q_b, n_a, n_b, delta)
}

fn survival_lower_delta_split(
    p_a: f64,
    q_a: f64,
    p_b: f64,
    q_b: f64,
    n_a: u32,
    n_b: u32,
    delta: i64,
) -> Result<f64> {
    check_counts(n_a, n_b)?;
    let ln_fact = ln_factorials(n_a.max(n_b));
    // K = sells at or below M, L = buys above M.
    let pmf_k = binomial_pmf(n_a, p_a, q_a, &ln_fact);
    let pmf_l = binomial_pmf(n_b, q_b, p_b, &ln_fact);

    // tail_l[j] = P(L >= j), summed from the top so that small terms are
    // never absorbed into a leading 1.
    let mut tail_l = vec![0.0; n_b as usize + 2];
    let mut acc = CompensatedSum::default();
    for j in (0..=n_b as usize).rev() {
        acc.add(pmf_l[j]);
        tail_l[j] = acc.value();
    }

    let total: CompensatedSum = pmf_k
        .iter()
        .enumerate()
        .filter_map(|(k, &pk)| {
            let start = (k as i64 - delta + 1).max(0);
            (start <= n_b as i64).then(|| pk * tail_l[start as usize])
        })
        .collect();
    Ok(total.value().clamp(0.0, 1.0))
}

fn tails_at(m: f64, sell: &PlacementModel, buy: &PlacementModel) -> Result<(PowerTail, PowerTail)> {
    let ta = sell
        .tail()
        .ok_or_else(|| Error::domain("sell placement has no power tail"))?;
    let tb = buy
        .tail()
        .ok_or_else(|| Error::domain("buy placement has no power tail"))?;
    ta.eval(m)?;
    tb.eval(m)?;
    Ok((ta, tb))
}

/// `N_B T_B(M) T_A(M)^N_A`, the leading term of the conditional survival
/// without market orders.
pub fn asymptote_conditional(
    m: f64,
    sell: &PlacementModel,
    buy: &PlacementModel,
    n_a: u32,
    n_b: u32,
) -> Result<f64> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::domain("order counts must be positive"));
    }
    let (ta, tb) = tails_at(m, sell, buy)?;
    let ln = (n_b as f64).ln() + tb.ln_eval(m)? + n_a as f64 * ta.ln_eval(m)?;
    Ok(ln.exp())
}

/// `K(N_A, N_B, d)`: `C(N_A, d)` for `d > 0`, else `C(N_B, -d)`.
pub fn prefactor_k(n_a: u32, n_b: u32, d: i64) -> f64 {
    if d > 0 {
        binomial_coefficient(n_a as u64, d as u64)
    } else {
        binomial_coefficient(n_b as u64, (-d) as u64)
    }
}

fn binomial_coefficient(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `K(N_A, N_B, Δ-1) T_B(M)^((Δ-1)_-) T_A(M)^(N_A - (Δ-1)_+)` for
/// `Δ ∈ (-N_B, N_A]`. At `Δ = N_A` the upper clearing price is infinite but
/// the lower one, and this expansion, are not affected.
pub fn asymptote_conditional_delta(
    m: f64,
    sell: &PlacementModel,
    buy: &PlacementModel,
    n_a: u32,
    n_b: u32,
    delta: i64,
) -> Result<f64> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::domain("order counts must be positive"));
    }
    if !(-(n_b as i64) < delta && delta <= n_a as i64) {
        return Err(Error::domain(format!(
            "imbalance {delta} outside (-{n_b}, {n_a}]"
        )));
    }
    let (ta, tb) = tails_at(m, sell, buy)?;
    let (pa, pb) = conditional_powers(n_a, delta);
    let ln = prefactor_k(n_a, n_b, delta - 1).ln()
        + pb as f64 * tb.ln_eval(m)?
        + pa as f64 * ta.ln_eval(m)?;
    Ok(ln.exp())
}

/// Powers `(of T_A, of T_B)` in the conditional asymptote.
fn conditional_powers(n_a: u32, delta: i64) -> (i64, i64) {
    let d = delta - 1;
    (n_a as i64 - d.max(0), (-d).max(0))
}

/// Predicted right-tail exponents of the clearing return distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPrediction {
    /// `a_A + a_B`.
    pub no_mo: f64,
    /// `min((c + 1) a_A / c, a_A + 2 a_B)`.
    pub with_mo: f64,
    /// `c <= a_A / a_B`.
    pub heavier_without_mo: bool,
}

impl ExponentPrediction {
    /// Evaluates the formulas for any positive inputs. Empirical reports use
    /// this even where estimated exponents break the ordering `a_B > a_A`.
    pub fn from_formula(a_a: f64, a_b: f64, c: f64) -> Self {
        Self {
            no_mo: a_a + a_b,
            with_mo: ((c + 1.0) * a_a / c).min(a_a + 2.0 * a_b),
            heavier_without_mo: c <= a_a / a_b,
        }
    }

    /// Left-tail prediction from left-tail exponents: sides swap roles.
    pub fn left_tail(a_a_left: f64, a_b_left: f64, c: f64) -> Self {
        Self::from_formula(a_b_left, a_a_left, c)
    }
}

/// Exponent predictions under `a_B >= a_A > 0` and `0 < c <= 1`.
pub fn predict_exponents(a_a: f64, a_b: f64, c: f64) -> Result<ExponentPrediction> {
    if !(a_a > 0.0 && a_a.is_finite() && a_b >= a_a && a_b.is_finite()) {
        return Err(Error::domain(format!(
            "need a_B >= a_A > 0, got a_A = {a_a}, a_B = {a_b}"
        )));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::domain(format!("c = {c} must lie in (0, 1]")));
    }
    Ok(ExponentPrediction::from_formula(a_a, a_b, c))
}

/// Minimizes `F(n, d) = a_A (n - d + 1) - (d - 1)(a_B - a_A) 1{d < 1}` over
/// imbalances `d ∈ ±{1..N}` and counts `n` compatible with `d = c (n - m)`
/// for some `m >= 1`, i.e. `n >= max(d/c + 1, 1)`. Integrality of `n` is
/// relaxed at the boundary so that every `d` is attainable; every integer
/// `n` up to `N` above the boundary is scanned as well.
pub fn exponent_bruteforce(a_a: f64, a_b: f64, c: f64, max_count: u32) -> Result<f64> {
    if !(a_a > 0.0 && a_b > a_a && a_b.is_finite()) {
        return Err(Error::domain(format!(
            "need a_B > a_A > 0, got a_A = {a_a}, a_B = {a_b}"
        )));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::domain(format!("c = {c} must lie in (0, 1)")));
    }
    if max_count < 2 {
        return Err(Error::domain("N must be at least 2"));
    }
    let objective = |n: f64, d: f64| {
        let penalty = if d < 1.0 {
            (d - 1.0) * (a_b - a_a)
        } else {
            0.0
        };
        a_a * (n - d + 1.0) - penalty
    };
    let n_max = max_count as i64;
    let mut best = f64::INFINITY;
    for d in (-n_max..=n_max).filter(|&d| d != 0) {
        let d = d as f64;
        let boundary = (d / c + 1.0).max(1.0);
        best = best.min(objective(boundary, d));
        let first = boundary.ceil() as i64;
        for n in first..=n_max {
            best = best.min(objective(n as f64, d));
        }
    }
    Ok(best)
}

/// Whether market orders enter the mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarketOrderMode {
    With,
    Without,
}

/// Unconditional `P(X_lower > M)` averaged over the counts law.
pub fn mixture_survival(
    m: f64,
    sell: &PlacementModel,
    buy: &PlacementModel,
    counts: &CountsModel,
    mode: MarketOrderMode,
) -> Result<f64> {
    let q_a = sell.survival(m);
    let q_b = buy.survival(m);
    let mut total = CompensatedSum::default();
    for (draw, prob) in counts.support() {
        let delta = match mode {
            MarketOrderMode::With => draw.imbalance,
            MarketOrderMode::Without => 0,
        };
        let s = survival_lower_delta_tails(q_a, q_b, draw.sell_count, draw.buy_count, delta)?;
        total.add(prob * s);
    }
    Ok(total.value())
}

/// Smallest conditional decay exponent over the support of the counts law:
/// `a_A (N_A - (Δ-1)_+) + a_B (Δ-1)_-`.
pub fn mixture_tail_exponent(
    a_a: f64,
    a_b: f64,
    counts: &CountsModel,
    mode: MarketOrderMode,
) -> f64 {
    counts
        .support()
        .into_iter()
        .map(|(draw, _)| {
            let delta = match mode {
                MarketOrderMode::With => draw.imbalance,
                MarketOrderMode::Without => 0,
            };
            let (pa, pb) = conditional_powers(draw.sell_count, delta);
            a_a * pa as f64 + a_b * pb as f64
        })
        .fold(f64::INFINITY, f64::min)
}

/// `C = E[N_B 1{N_A = 1}]`, the constant of the no-market-order tail.
pub fn unconditional_constant(counts: &CountsModel) -> f64 {
    counts
        .support()
        .into_iter()
        .filter(|(d, _)| d.sell_count == 1)
        .map(|(d, p)| d.buy_count as f64 * p)
        .sum()
}

/// `-d ln S / d ln M` by a forward difference over `[M, ratio M]`.
pub fn local_loglog_slope<F>(survival: F, m: f64, ratio: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let s0 = survival(m)?;
    let s1 = survival(m * ratio)?;
    if !(s0 > 0.0 && s1 > 0.0) {
        return Err(Error::DegenerateSample(format!(
            "survival vanished near M = {m}"
        )));
    }
    Ok(-(s1.ln() - s0.ln()) / ratio.ln())
}
