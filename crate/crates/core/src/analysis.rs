//! Brute-force oracles and rate reports.
//!
//! The checkers here deliberately avoid the codec's own search routines:
//! lemma checks scan hybrids built from raw bitmasks, and the reference
//! balancer rebuilds every candidate swap on a fresh copy of the grid.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::bitcore::{BitGrid, BitSeq};
use crate::codec2d::derive_params;
use crate::dnc::{Budget, SplitRecord};
use crate::error::{Error, Result};
use crate::redpack::ceil_log2;
use crate::swapkit::{find_target_exact, find_target_up, Side};

/// Largest side `count_arrays` enumerates without an override.
pub const COUNT_MAX_N: usize = 5;
/// Largest length the exhaustive lemma checkers accept.
pub const LEMMA_MAX_N: usize = 8;

/// Number of `n x n` binary arrays whose rows and columns all have weight
/// at most `w`.
pub fn count_arrays(n: usize, w: usize, allow_large: bool) -> Result<BigUint> {
    if n > COUNT_MAX_N && !allow_large {
        return Err(Error::Usage(format!(
            "n={n} enumerates 2^{} arrays; pass the override to run anyway",
            n * n
        )));
    }
    if n > 16 {
        return Err(Error::Usage(format!("n={n} is beyond enumeration")));
    }
    let rows: Vec<u32> = (0u32..1 << n)
        .filter(|r| r.count_ones() as usize <= w)
        .collect();
    let mut col_weights = vec![0usize; n];

    fn fill(depth: usize, n: usize, w: usize, rows: &[u32], col_weights: &mut [usize]) -> u64 {
        if depth == n {
            return 1;
        }
        let mut total = 0;
        for &r in rows {
            if (0..n).any(|j| r >> j & 1 == 1 && col_weights[j] == w) {
                continue;
            }
            (0..n)
                .filter(|j| r >> j & 1 == 1)
                .for_each(|j| col_weights[j] += 1);
            total += fill(depth + 1, n, w, rows, col_weights);
            (0..n)
                .filter(|j| r >> j & 1 == 1)
                .for_each(|j| col_weights[j] -= 1);
        }
        total
    }

    Ok(BigUint::from(fill(0, n, w, &rows, &mut col_weights)))
}

/// Number of `n x n` sub-permutation matrices, `sum_k k! C(n,k)^2`.
pub fn subperm_count(n: usize) -> BigUint {
    let mut total = BigUint::zero();
    let mut binom = BigUint::one();
    let mut fact = BigUint::one();
    for k in 0..=n {
        if k > 0 {
            binom = binom * BigUint::from(n + 1 - k) / BigUint::from(k);
            fact *= BigUint::from(k);
        }
        total += &fact * &binom * &binom;
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub n_max: usize,
    pub instances: u64,
    pub counterexamples: u64,
    /// First few failing instances, human readable.
    pub samples: Vec<String>,
}

impl LemmaReport {
    fn new(lemma: &str, n_max: usize) -> Self {
        Self {
            lemma: lemma.into(),
            n_max,
            instances: 0,
            counterexamples: 0,
            samples: Vec::new(),
        }
    }

    fn fail(&mut self, what: String) {
        self.counterexamples += 1;
        if self.samples.len() < 10 {
            self.samples.push(what);
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexamples == 0
    }
}

impl std::fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (n <= {}): {} instances, {} counterexamples",
            self.lemma, self.n_max, self.instances, self.counterexamples
        )
    }
}

/// `prefix_from[..t] suffix_from[t..]` on n-bit masks, bit i = position i+1.
fn hybrid_mask(prefix_from: u32, suffix_from: u32, t: usize) -> u32 {
    let low = (1u32 << t) - 1;
    (prefix_from & low) | (suffix_from & !low)
}

fn mask_to_seq(x: u32, n: usize) -> BitSeq {
    (0..n).map(|i| x >> i & 1 == 1).collect()
}

fn mask_str(x: u32, n: usize) -> String {
    mask_to_seq(x, n).to_string()
}

fn lemma1_pair(y: u32, z: u32, n: usize, report: &mut LemmaReport) {
    // weights of Swap_t(y, z) = z[..t] y[t..]
    let h: Vec<u32> = (0..=n).map(|t| hybrid_mask(z, y, t).count_ones()).collect();
    for t1 in 0..=n {
        let mut seen = 0u32;
        for t2 in t1..=n {
            seen |= 1 << h[t2];
            if t2 == t1 {
                continue;
            }
            report.instances += 1;
            let (lo, hi) = (h[t1].min(h[t2]), h[t1].max(h[t2]));
            let range = ((1u32 << (hi + 1)) - 1) & !((1u32 << lo) - 1);
            if seen & range != range {
                report.fail(format!(
                    "y={} z={} t1={t1} t2={t2}",
                    mask_str(y, n),
                    mask_str(z, n)
                ));
            }
        }
    }
}

/// For all `y, z` of length `n <= n_max` and all `t1 < t2`, every weight
/// between those of the two hybrids is attained by a hybrid in between.
pub fn check_lemma1(n_max: usize) -> Result<LemmaReport> {
    if n_max > LEMMA_MAX_N {
        return Err(Error::Usage(format!(
            "exhaustive lemma checks stop at n={LEMMA_MAX_N}; use sampling"
        )));
    }
    let mut report = LemmaReport::new("lemma1 (intermediate weights)", n_max);
    for n in 1..=n_max {
        for y in 0u32..1 << n {
            for z in 0u32..1 << n {
                lemma1_pair(y, z, n, &mut report);
            }
        }
    }
    Ok(report)
}

/// Random-pair version of [`check_lemma1`] for lengths past the exhaustive range.
pub fn check_lemma1_sampled(n: usize, trials: usize, seed: u64) -> Result<LemmaReport> {
    if n == 0 || n > 30 {
        return Err(Error::Usage(format!(
            "sampled lemma checks need 1 <= n <= 30, got {n}"
        )));
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut report = LemmaReport::new("lemma1 (sampled)", n);
    for _ in 0..trials {
        let y = rng.gen_range(0u32..1 << n);
        let z = rng.gen_range(0u32..1 << n);
        lemma1_pair(y, z, n, &mut report);
    }
    Ok(report)
}

/// For all heavy `y`, light `z` and budgets `W` with
/// `wt(y) >= W + 1 > wt(z)`:
///
/// * the first `t` with `wt(y[..t] z[t..]) = W + 1` exists, has `y_t = 1`,
///   and equals what `find_target_up` returns;
/// * the first `t` with `wt(z[..t] y[t..]) = W` exists, has `y_t = 1`, and
///   equals what `find_target_exact` returns.
pub fn check_lemma2(n_max: usize) -> Result<LemmaReport> {
    if n_max > LEMMA_MAX_N {
        return Err(Error::Usage(format!(
            "exhaustive lemma checks stop at n={LEMMA_MAX_N}; use sampling"
        )));
    }
    let mut report = LemmaReport::new("lemma2 (flippable swap position)", n_max);
    for n in 1..=n_max {
        for y in 0u32..1 << n {
            let wy = y.count_ones();
            let ys = mask_to_seq(y, n);
            for z in 0u32..1 << n {
                let wz = z.count_ones();
                if wz >= wy {
                    continue;
                }
                let zs = mask_to_seq(z, n);
                for budget in wz..wy {
                    report.instances += 1;
                    let ctx = || format!("y={} z={} W={budget}", mask_str(y, n), mask_str(z, n));

                    // claim i: Swap_t(z, y) = y[..t] z[t..]
                    let naive = (1..=n).find(|&t| hybrid_mask(y, z, t).count_ones() == budget + 1);
                    match naive {
                        None => report.fail(format!("{}: claim i has no t", ctx())),
                        Some(t) => {
                            if hybrid_mask(y, z, t) >> (t - 1) & 1 == 0 {
                                report.fail(format!("{}: claim i bit {t} is 0", ctx()));
                            }
                            match find_target_up(&ys, &zs, budget as usize, Side::Right) {
                                Ok(o) if o.t == t => {}
                                other => report.fail(format!(
                                    "{}: find_target_up gave {other:?}, minimal t is {t}",
                                    ctx()
                                )),
                            }
                        }
                    }

                    // claim ii: Swap_t(y, z) = z[..t] y[t..], flip in Swap_t(z, y)
                    let naive = (1..=n).find(|&t| hybrid_mask(z, y, t).count_ones() == budget);
                    match naive {
                        None => report.fail(format!("{}: claim ii has no t", ctx())),
                        Some(t) => {
                            if hybrid_mask(y, z, t) >> (t - 1) & 1 == 0 {
                                report.fail(format!("{}: claim ii bit {t} is 0", ctx()));
                            }
                            match find_target_exact(&ys, &zs, budget as usize, Side::Left) {
                                Ok(o) if o.t == t => {}
                                other => report.fail(format!(
                                    "{}: find_target_exact gave {other:?}, minimal t is {t}",
                                    ctx()
                                )),
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Cells of `cols` read column by column.
fn positions(m: usize, cols: &[usize]) -> Vec<(usize, usize)> {
    cols.iter()
        .flat_map(|&j| (1..=m).map(move |i| (i, j)))
        .collect()
}

fn naive_weight(g: &BitGrid, cols: &[usize]) -> usize {
    let mut w = 0;
    for i in 1..=g.n_rows() {
        for &j in cols {
            w += g.get(i, j) as usize;
        }
    }
    w
}

/// Independent search for the record a node should get: picks the held-out
/// column by scanning column weights, then tries every `t` in increasing
/// order on a fresh copy of the grid until the receiving part hits the target
/// weight. The result is checked for a flippable 1 and for both halves
/// landing within budget.
pub fn reference_balance(g: &BitGrid, cols: &[usize], budget: &Budget) -> Result<SplitRecord> {
    let k = cols.len();
    let m = g.n_rows();
    if k < 2 || m * k > 64 {
        return Err(Error::Usage(format!(
            "reference balancer needs 2 <= k, m*k <= 64 (m={m}, k={k})"
        )));
    }
    let kl = k - k / 2;
    let (left, right) = cols.split_at(kl);
    let cap = |c: usize| budget.threshold(c);
    let (wl, wr) = (naive_weight(g, left), naive_weight(g, right));
    if wl + wr > cap(k) {
        return Err(Error::Internal("node over budget".into()));
    }
    if wl <= cap(kl) && wr <= cap(k / 2) {
        return Ok(SplitRecord::idle(k));
    }
    let left_heavy = wl > cap(kl);

    let gamma = if k.is_multiple_of(2) {
        0
    } else {
        let weights: Vec<usize> = left.iter().map(|&j| naive_weight(g, &[j])).collect();
        let target = if left_heavy {
            *weights.iter().min().unwrap()
        } else {
            *weights.iter().max().unwrap()
        };
        weights.iter().position(|&w| w == target).unwrap() + 1
    };
    let swapped_left: Vec<usize> = left
        .iter()
        .enumerate()
        .filter(|&(i, _)| gamma == 0 || i + 1 != gamma)
        .map(|(_, &j)| j)
        .collect();
    let (lp, rp) = (positions(m, &swapped_left), positions(m, right));

    // (tau, side checked, target weight on that side)
    let (tau, probe, target): (u8, &[usize], usize) = if left_heavy {
        (2, right, cap(k / 2) + 1)
    } else if k.is_multiple_of(2) {
        (1, left, cap(kl) + 1)
    } else {
        (1, right, cap(k / 2))
    };

    for t in 1..=lp.len() {
        let mut trial = g.clone();
        for s in 0..t {
            let (a, b) = (lp[s], rp[s]);
            let (va, vb) = (g.get(a.0, a.1), g.get(b.0, b.1));
            trial.set(a.0, a.1, vb);
            trial.set(b.0, b.1, va);
        }
        if naive_weight(&trial, probe) != target {
            continue;
        }
        let flip_at = if tau == 1 { lp[t - 1] } else { rp[t - 1] };
        if !trial.get(flip_at.0, flip_at.1) {
            return Err(Error::Internal(format!("reference: bit at t={t} is 0")));
        }
        trial.set(flip_at.0, flip_at.1, false);
        if naive_weight(&trial, left) > cap(kl) || naive_weight(&trial, right) > cap(k / 2) {
            return Err(Error::Internal(format!(
                "reference: t={t} leaves a half over budget"
            )));
        }
        return Ok(SplitRecord { k, tau, t, gamma });
    }
    Err(Error::Internal(
        "reference: no swapping position reaches the target".into(),
    ))
}

/// Smallest `c <= n` with `c >= ceil(n/f) (ceil(log2 n) + 1)` and `c f / n`
/// an integer, the older parameter rule; `None` if no such `c` exists.
pub fn legacy_c_bound(n: usize, p: u64, q: u64) -> Option<usize> {
    if n < 2 || p == 0 || q == 0 {
        return None;
    }
    let beta = (n as u64 * q).div_ceil(p) as usize;
    let lower = beta * (ceil_log2(n) + 1);
    let den = n as u128 * q as u128;
    (lower..=n).find(|&c| (c as u128 * p as u128).is_multiple_of(den))
}

/// `ceil(n/f) (ceil(log2 n) + 6)`, the redundancy row count used here.
pub fn redundancy_rows(n: usize, p: u64, q: u64) -> usize {
    (n as u64 * q).div_ceil(p) as usize * (ceil_log2(n) + 6)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub p: u64,
    pub q: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub redundancy: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasible: Option<String>,
}

impl RateRow {
    pub fn is_feasible(&self) -> bool {
        self.infeasible.is_none()
    }
}

impl std::fmt::Display for RateRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n={} p={} q={}", self.n, self.p, self.q)?;
        match (
            &self.infeasible,
            self.c,
            self.m,
            self.k_row,
            self.payload,
            self.redundancy,
            self.rate,
        ) {
            (None, Some(c), Some(m), Some(k), Some(pl), Some(r), Some(rate)) => write!(
                f,
                " c={c} m={m} k_row={k} payload={pl} redundancy={r} rate={rate:.6}"
            ),
            (reason, ..) => write!(f, " infeasible: {}", reason.as_deref().unwrap_or("?")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
}

impl RateReport {
    /// True when the feasible rows' exact rates `payload / n^2` strictly
    /// increase in row order.
    pub fn strictly_increasing(&self) -> bool {
        let rates: Vec<(u128, u128)> = self
            .rows
            .iter()
            .filter_map(|r| Some((r.payload? as u128, (r.n * r.n) as u128)))
            .collect();
        rates.windows(2).all(|w| w[0].0 * w[1].1 < w[1].0 * w[0].1)
    }
}

pub fn rate_report(entries: &[(usize, u64, u64)]) -> RateReport {
    let rows = entries
        .iter()
        .map(|&(n, p, q)| match derive_params(n, p, q) {
            Ok(params) => RateRow {
                n,
                p: params.p,
                q: params.q,
                c: Some(params.c),
                m: Some(params.m),
                k_row: Some(params.k_row),
                payload: Some(params.payload_bits_total),
                redundancy: Some(params.redundancy()),
                rate: Some(params.rate()),
                infeasible: None,
            },
            Err(e) => RateRow {
                n,
                p,
                q,
                c: None,
                m: None,
                k_row: None,
                payload: None,
                redundancy: None,
                rate: None,
                infeasible: Some(e.to_string()),
            },
        })
        .collect();
    RateReport { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnc::balance_node;

    #[test]
    fn count_arrays_examples() {
        assert_eq!(count_arrays(1, 1, false).unwrap(), BigUint::from(2u32));
        assert_eq!(count_arrays(2, 1, false).unwrap(), BigUint::from(7u32));
        assert_eq!(count_arrays(2, 2, false).unwrap(), BigUint::from(16u32));
        assert!(matches!(count_arrays(6, 1, false), Err(Error::Usage(_))));
    }

    #[test]
    fn count_arrays_matches_raw_enumeration() {
        for n in 1..=4usize {
            for w in 0..=n {
                let raw = (0u32..1 << (n * n))
                    .filter(|a| {
                        (0..n).all(|i| (0..n).filter(|j| a >> (i * n + j) & 1 == 1).count() <= w)
                            && (0..n)
                                .all(|j| (0..n).filter(|i| a >> (i * n + j) & 1 == 1).count() <= w)
                    })
                    .count();
                assert_eq!(
                    count_arrays(n, w, false).unwrap(),
                    BigUint::from(raw),
                    "n={n} w={w}"
                );
            }
        }
    }

    #[test]
    fn subperm_examples() {
        assert_eq!(subperm_count(1), BigUint::from(2u32));
        assert_eq!(subperm_count(2), BigUint::from(7u32));
        assert_eq!(subperm_count(3), BigUint::from(34u32));
        for n in 1..=4 {
            assert_eq!(count_arrays(n, 1, false).unwrap(), subperm_count(n));
        }
    }

    #[test]
    fn half_bound_capacity_trend() {
        let rate = |n: usize| {
            let count = count_arrays(n, n / 2, false).unwrap().to_u64_digits()[0];
            (count as f64).log2() / (n * n) as f64
        };
        // floor(n/2) drops to 1 at n = 3, so only even sides share the f = n/2 trend
        let (r2, r3, r4) = (rate(2), rate(3), rate(4));
        assert!(r2 < r4 && r4 <= 1.0);
        assert!(r3 < r2);
    }

    #[test]
    fn lemma1_exhaustive_small() {
        let r = check_lemma1(4).unwrap();
        assert!(r.passed(), "{r} {:?}", r.samples);
        assert!(r.instances > 0);
        assert!(check_lemma1(9).is_err());
    }

    #[test]
    fn lemma1_equal_inputs_and_sampled() {
        let mut r = LemmaReport::new("eq", 6);
        for y in 0u32..64 {
            lemma1_pair(y, y, 6, &mut r);
        }
        assert!(r.passed());
        assert!(check_lemma1_sampled(12, 200, 1).unwrap().passed());
    }

    #[test]
    fn lemma2_exhaustive() {
        let r = check_lemma2(6).unwrap();
        assert!(r.passed(), "{r} {:?}", r.samples);
    }

    #[test]
    fn lemma2_trivial_instance() {
        // W = wt(y) - 1 against an all-zero light sequence
        let y = mask_to_seq(0b1011, 4);
        let o = find_target_up(&y, &BitSeq::zeros(4), 2, Side::Right).unwrap();
        assert_eq!(o.t, 4);
    }

    #[test]
    fn reference_balance_examples() {
        let mut g = BitGrid::from_rows(&["10", "10"]).unwrap();
        let b = Budget::new(1, 1).unwrap();
        let r = reference_balance(&g, &[1, 2], &b).unwrap();
        assert_eq!(
            r,
            SplitRecord {
                k: 2,
                tau: 2,
                t: 2,
                gamma: 0
            }
        );
        assert_eq!(balance_node(&mut g, &[1, 2], &b).unwrap(), r);

        let mut g = BitGrid::from_rows(&["110"]).unwrap();
        let b = Budget::new(2, 3).unwrap();
        let r = reference_balance(&g, &[1, 2, 3], &b).unwrap();
        assert_eq!(
            r,
            SplitRecord {
                k: 3,
                tau: 2,
                t: 1,
                gamma: 1
            }
        );
        assert_eq!(balance_node(&mut g, &[1, 2, 3], &b).unwrap(), r);

        let g = BitGrid::from_rows(&["1001"]).unwrap();
        assert_eq!(
            reference_balance(&g, &[1, 2, 3, 4], &Budget::new(1, 2).unwrap()).unwrap(),
            SplitRecord::idle(4)
        );
    }

    #[test]
    fn legacy_c_examples() {
        assert_eq!(legacy_c_bound(64, 32, 1), Some(14));
        assert_eq!(redundancy_rows(64, 32, 1), 24);
        let n = 65536usize;
        let f = (n / 2 - 16) as u64;
        assert_eq!(legacy_c_bound(n, f, 1), Some(4096));
        assert_eq!(redundancy_rows(n, f, 1), 66);
        // f = 3 at n = 8: c f / 8 integer needs c a multiple of 8 and c >= 3 * 4
        assert_eq!(legacy_c_bound(8, 3, 1), None);
    }

    #[test]
    fn rate_report_half() {
        let entries: Vec<_> = [32usize, 64, 128, 256]
            .iter()
            .map(|&n| (n, n as u64, 2))
            .collect();
        let report = rate_report(&entries);
        assert!(report.strictly_increasing());
        for row in &report.rows {
            let (n, c, k) = (row.n, row.c.unwrap(), row.k_row.unwrap());
            assert_eq!(row.redundancy.unwrap(), (n - c) * (n - k) + c * n);
            let rate = row.rate.unwrap();
            assert!((0.0..=1.0).contains(&rate));
        }
        assert_eq!(report.rows[1].redundancy, Some(1576));
        let bad = rate_report(&[(16, 8, 1)]);
        assert!(!bad.rows[0].is_feasible());
        assert!(bad.rows[0].to_string().contains("infeasible"));
    }
}
