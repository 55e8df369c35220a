//! Divide-and-conquer column balancing over the payload rows.
//!
//! A node holding `k` columns with total weight at most `W(k) = floor(k*alpha)`
//! is split into a left half of `ceil(k/2)` columns and a right half of
//! `floor(k/2)` columns. If one half exceeds its own budget, a prefix of the
//! two halves (read column by column) is exchanged and a single 1 is cleared
//! at the swapping position, which brings both halves within budget. For odd
//! `k` one column of the left half sits out of the swap so the two swapped
//! views have equal length. Recursing down to single columns leaves every
//! column at weight at most `W(1)`.
//!
//! Swaps exchange bits that share a row, and flips only clear bits, so no row
//! weight ever grows.

use crate::bitcore::{floor_scaled, BitGrid, ColView};
use crate::codec2d::CodeParams;
use crate::error::{Error, Result, Stage};
use crate::swapkit::{find_target_exact, find_target_up, swap_view_prefix, Side};

/// Per-column weight budget `alpha = num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub num: u64,
    pub den: u64,
}

impl Budget {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Parameter("zero denominator".into()));
        }
        Ok(Self { num, den })
    }

    /// `alpha = m * p / (n * q)`.
    pub fn from_params(params: &CodeParams) -> Self {
        Self {
            num: params.alpha_num,
            den: params.alpha_den,
        }
    }

    /// `W(k) = floor(k * alpha)`.
    pub fn threshold(&self, k: usize) -> usize {
        floor_scaled(k as u64, self.num, self.den).expect("threshold fits in u64") as usize
    }
}

/// Budget of a `k`-column subarray under the scheme's `alpha`.
pub fn threshold(k: usize, params: &CodeParams) -> usize {
    Budget::from_params(params).threshold(k)
}

/// `(ceil(k/2), floor(k/2))`.
pub fn split_sizes(k: usize) -> (usize, usize) {
    (k.div_ceil(2), k / 2)
}

/// What one node of the recursion did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SplitRecord {
    /// Columns at this node.
    pub k: usize,
    /// 0: nothing done, 1: flip in the left part, 2: flip in the right part.
    pub tau: u8,
    /// Swapping position, 0 when `tau == 0`.
    pub t: usize,
    /// 1-based index within the left part of the column held out of the
    /// swap; 0 when `tau == 0` or `k` is even.
    pub gamma: usize,
}

impl SplitRecord {
    pub fn idle(k: usize) -> Self {
        Self {
            k,
            tau: 0,
            t: 0,
            gamma: 0,
        }
    }
}

/// An internal node of the split tree: `k >= 2` columns starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitNode {
    pub start: usize,
    pub k: usize,
}

impl SplitNode {
    pub fn cols(&self) -> Vec<usize> {
        (self.start..self.start + self.k).collect()
    }
}

/// Internal nodes of the split tree over columns `1..=n`, in pre-order.
pub fn split_tree(n: usize) -> Vec<SplitNode> {
    fn walk(start: usize, k: usize, out: &mut Vec<SplitNode>) {
        if k < 2 {
            return;
        }
        out.push(SplitNode { start, k });
        let (kl, kr) = split_sizes(k);
        walk(start, kl, out);
        walk(start + kl, kr, out);
    }
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    walk(1, n, &mut out);
    out
}

/// The two equal-length views swapped at a node: the left part (minus the
/// held-out column for odd `k`) and the right part.
fn swap_views(m: usize, cols: &[usize], gamma: usize) -> (ColView, ColView) {
    let (kl, _) = split_sizes(cols.len());
    let (left, right) = cols.split_at(kl);
    let left: Vec<usize> = left
        .iter()
        .enumerate()
        .filter(|&(i, _)| cols.len().is_multiple_of(2) || i + 1 != gamma)
        .map(|(_, &c)| c)
        .collect();
    (ColView::new(m, left), ColView::new(m, right.to_vec()))
}

fn weight_of(g: &BitGrid, cols: &[usize]) -> usize {
    cols.iter().map(|&j| g.col_weight(j)).sum()
}

/// 1-based position among `cols` of the lightest (or heaviest) column, ties
/// to the smallest index.
fn extreme_column(g: &BitGrid, cols: &[usize], heaviest: bool) -> usize {
    let mut best = 0;
    let mut best_w = g.col_weight(cols[0]);
    for (i, &c) in cols.iter().enumerate().skip(1) {
        let w = g.col_weight(c);
        if (heaviest && w > best_w) || (!heaviest && w < best_w) {
            best = i;
            best_w = w;
        }
    }
    best + 1
}

/// Balances one node in place and reports what was done.
pub fn balance_node(g: &mut BitGrid, cols: &[usize], budget: &Budget) -> Result<SplitRecord> {
    let k = cols.len();
    if k < 2 {
        return Err(Error::Internal(format!("cannot split {k} columns")));
    }
    let m = g.n_rows();
    let (kl, kr) = split_sizes(k);
    let (w_left_cap, w_right_cap) = (budget.threshold(kl), budget.threshold(kr));
    let total = weight_of(g, cols);
    if total > budget.threshold(k) {
        return Err(Error::Internal(format!(
            "node of {k} columns has weight {total} over budget {}",
            budget.threshold(k)
        )));
    }
    let w_left = weight_of(g, &cols[..kl]);
    let w_right = total - w_left;
    if w_left <= w_left_cap && w_right <= w_right_cap {
        return Ok(SplitRecord::idle(k));
    }
    if w_left > w_left_cap && w_right > w_right_cap {
        return Err(Error::Internal("both halves over budget".into()));
    }

    let gamma = if k.is_multiple_of(2) {
        0
    } else {
        extreme_column(g, &cols[..kl], w_right > w_right_cap)
    };
    let (lv, rv) = swap_views(m, cols, gamma);
    let (l_bits, r_bits) = (lv.gather(g), rv.gather(g));

    let outcome = if w_left > w_left_cap {
        // left heavy: both cases push the right part to W(kR) + 1, then flip there
        if l_bits.weight() <= w_right_cap {
            return Err(Error::Internal(
                "held-out column left too little weight".into(),
            ));
        }
        find_target_up(&l_bits, &r_bits, w_right_cap, Side::Right)?
    } else if k.is_multiple_of(2) {
        find_target_up(&r_bits, &l_bits, w_left_cap, Side::Left)?
    } else {
        if l_bits.weight() > w_right_cap {
            return Err(Error::Internal(
                "held-out column left too much weight".into(),
            ));
        }
        find_target_exact(&r_bits, &l_bits, w_right_cap, Side::Left)?
    };

    swap_view_prefix(g, &lv, &rv, outcome.t)?;
    let (flip_view, tau) = match outcome.flipped_side {
        Side::Left => (&lv, 1),
        Side::Right => (&rv, 2),
        Side::None => unreachable!("searches always report a side"),
    };
    if !flip_view.get(g, outcome.t)? {
        return Err(Error::CorruptState(format!(
            "expected a 1 at swap position {}",
            outcome.t
        )));
    }
    flip_view.set(g, outcome.t, false)?;

    let (nl, nr) = (weight_of(g, &cols[..kl]), weight_of(g, &cols[kl..]));
    if nl > w_left_cap || nr > w_right_cap {
        return Err(Error::Internal(format!(
            "halves at {nl}/{nr} after balancing, budgets {w_left_cap}/{w_right_cap}"
        )));
    }
    Ok(SplitRecord {
        k,
        tau,
        t: outcome.t,
        gamma,
    })
}

/// Balances every column of `g` to at most `W(1)`; records come back in
/// pre-order over [`split_tree`].
pub fn dnc_encode(g: &mut BitGrid, budget: &Budget) -> Result<Vec<SplitRecord>> {
    let n = g.n_cols();
    if g.weight() > budget.threshold(n) {
        return Err(Error::Internal(format!(
            "array weight {} over budget {}",
            g.weight(),
            budget.threshold(n)
        )));
    }
    split_tree(n)
        .iter()
        .map(|node| balance_node(g, &node.cols(), budget))
        .collect()
}

/// Reverts [`dnc_encode`] given its records.
pub fn dnc_undo(g: &mut BitGrid, records: &[SplitRecord]) -> Result<()> {
    let m = g.n_rows();
    let tree = split_tree(g.n_cols());
    if tree.len() != records.len() {
        return Err(Error::corrupt(
            Stage::Undo,
            format!("{} records for {} nodes", records.len(), tree.len()),
        ));
    }
    for (node, rec) in tree.iter().zip(records).rev() {
        check_record(rec, node.k, m)?;
        if rec.tau == 0 {
            continue;
        }
        let (lv, rv) = swap_views(m, &node.cols(), rec.gamma);
        let flip_view = if rec.tau == 1 { &lv } else { &rv };
        if flip_view
            .get(g, rec.t)
            .map_err(|e| Error::corrupt(Stage::Undo, e.to_string()))?
        {
            return Err(Error::corrupt(
                Stage::Undo,
                format!(
                    "flipped position {} of a {}-column node holds a 1",
                    rec.t, node.k
                ),
            ));
        }
        flip_view.set(g, rec.t, true)?;
        swap_view_prefix(g, &lv, &rv, rec.t)?;
    }
    Ok(())
}

fn check_record(rec: &SplitRecord, k: usize, m: usize) -> Result<()> {
    let bad = |what: String| Err(Error::corrupt(Stage::Undo, what));
    if rec.k != k {
        return bad(format!("record for {} columns at a {k}-column node", rec.k));
    }
    match rec.tau {
        0 => {
            if rec.t != 0 || rec.gamma != 0 {
                return bad("idle record with nonzero indices".into());
            }
        }
        1 | 2 => {
            if rec.t == 0 || rec.t > m * (k / 2) {
                return bad(format!("swap position {} out of range", rec.t));
            }
            let gamma_ok = if k.is_multiple_of(2) {
                rec.gamma == 0
            } else {
                rec.gamma >= 1 && rec.gamma <= k.div_ceil(2)
            };
            if !gamma_ok {
                return bad(format!("held-out column {} invalid for k={k}", rec.gamma));
            }
        }
        other => return bad(format!("flip flag {other}")),
    }
    Ok(())
}
