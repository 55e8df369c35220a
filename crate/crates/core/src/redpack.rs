//! Serializing the split records into the index stream and spreading that
//! stream over the redundancy rows.

use crate::bitcore::{BitGrid, BitSeq};
use crate::codec2d::CodeParams;
use crate::dnc::{split_tree, SplitRecord};
use crate::error::{Error, Result, Stage};

/// `ceil(log2(x))` for `x >= 1`.
pub fn ceil_log2(x: usize) -> usize {
    assert!(x >= 1, "log of zero");
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

/// Widths of the swapping-position and held-out-column fields for a node of
/// `k` columns over `m` rows. Fields store `t - 1` and `gamma - 1`.
pub fn node_widths(k: usize, m: usize) -> (usize, usize) {
    let w_t = ceil_log2(m * (k / 2));
    let w_gamma = if k % 2 == 1 {
        ceil_log2(k.div_ceil(2))
    } else {
        0
    };
    (w_t, w_gamma)
}

/// Upper bound on the index stream length: `n * (ceil(log2 n) + 6)`.
pub fn stream_bound(n: usize) -> usize {
    n * (ceil_log2(n) + 6)
}

/// Stream length when every node swaps.
pub fn worst_case_len(n: usize, m: usize) -> usize {
    split_tree(n)
        .iter()
        .map(|node| {
            let (w_t, w_g) = node_widths(node.k, m);
            2 + w_t + w_g
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedundancyStream {
    pub bits: BitSeq,
    /// `(w_t, w_gamma)` per node in pre-order.
    pub widths: Vec<(usize, usize)>,
}

impl RedundancyStream {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

fn push_field(out: &mut BitSeq, value: usize, width: usize) {
    for i in (0..width).rev() {
        out.push(value >> i & 1 == 1);
    }
}

pub fn serialize(records: &[SplitRecord], n: usize, m: usize) -> Result<RedundancyStream> {
    let tree = split_tree(n);
    if tree.len() != records.len() {
        return Err(Error::Parameter(format!(
            "{} records for {} nodes",
            records.len(),
            tree.len()
        )));
    }
    let mut bits = BitSeq::new();
    let mut widths = Vec::with_capacity(tree.len());
    for (node, rec) in tree.iter().zip(records) {
        if rec.k != node.k || rec.tau > 2 {
            return Err(Error::Parameter(format!(
                "record {rec:?} does not fit node {node:?}"
            )));
        }
        let (w_t, w_g) = node_widths(node.k, m);
        widths.push((w_t, w_g));
        push_field(&mut bits, rec.tau as usize, 2);
        if rec.tau != 0 {
            if rec.t == 0 || rec.t > m * (node.k / 2) {
                return Err(Error::Parameter(format!(
                    "swap position {} out of range",
                    rec.t
                )));
            }
            push_field(&mut bits, rec.t - 1, w_t);
            if node.k % 2 == 1 {
                if rec.gamma == 0 || rec.gamma > node.k.div_ceil(2) {
                    return Err(Error::Parameter(format!(
                        "held-out column {} out of range",
                        rec.gamma
                    )));
                }
                push_field(&mut bits, rec.gamma - 1, w_g);
            }
        }
    }
    if bits.len() > stream_bound(n) {
        return Err(Error::Parameter(format!(
            "index stream of {} bits exceeds {}",
            bits.len(),
            stream_bound(n)
        )));
    }
    Ok(RedundancyStream { bits, widths })
}

/// Parses records for an `m x n` payload block out of `bits`; everything
/// after the last record must be zero.
pub fn deserialize(bits: &BitSeq, n: usize, m: usize) -> Result<Vec<SplitRecord>> {
    let raw = bits.as_slice();
    let mut pos = 0;
    let mut take = |width: usize| -> Result<usize> {
        if pos + width > raw.len() {
            return Err(Error::corrupt(Stage::Deserialize, "index stream truncated"));
        }
        let v = raw[pos..pos + width]
            .iter()
            .fold(0usize, |acc, &b| acc << 1 | b as usize);
        pos += width;
        Ok(v)
    };
    let mut records = Vec::new();
    for node in split_tree(n) {
        let (w_t, w_g) = node_widths(node.k, m);
        let tau = take(2)?;
        if tau == 3 {
            return Err(Error::corrupt(Stage::Deserialize, "flip flag 11"));
        }
        if tau == 0 {
            records.push(SplitRecord::idle(node.k));
            continue;
        }
        let t = take(w_t)? + 1;
        if t > m * (node.k / 2) {
            return Err(Error::corrupt(
                Stage::Deserialize,
                format!("swap position {t} out of range for {}-column node", node.k),
            ));
        }
        let gamma = if node.k % 2 == 1 {
            let g = take(w_g)? + 1;
            if g > node.k.div_ceil(2) {
                return Err(Error::corrupt(
                    Stage::Deserialize,
                    format!(
                        "held-out column {g} out of range for {}-column node",
                        node.k
                    ),
                ));
            }
            g
        } else {
            0
        };
        records.push(SplitRecord {
            k: node.k,
            tau: tau as u8,
            t,
            gamma,
        });
    }
    if raw[pos..].iter().any(|&b| b) {
        return Err(Error::corrupt(
            Stage::Deserialize,
            "nonzero padding after index stream",
        ));
    }
    Ok(records)
}

/// Placement of the index stream inside the `c x n` redundancy block.
///
/// Usable column `i` (1-based) with `j = ((i-1) mod beta) + 1` carries
/// `r_blocks` data bits at rows `j, j + beta, j + 2*beta, ...`. Columns past
/// `beta * floor(n / beta)` carry nothing, so no row gets more than
/// `floor(n / beta)` data bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotLayout {
    pub n: usize,
    pub beta: usize,
    pub r_blocks: usize,
    pub usable_cols: usize,
}

impl SlotLayout {
    pub fn new(n: usize, beta: usize, r_blocks: usize) -> Self {
        assert!(
            beta >= 1 && beta <= n,
            "block size {beta} invalid for n={n}"
        );
        Self {
            n,
            beta,
            r_blocks,
            usable_cols: beta * (n / beta),
        }
    }

    pub fn from_params(params: &CodeParams) -> Self {
        Self::new(params.n, params.beta, params.r_blocks)
    }

    pub fn rows(&self) -> usize {
        self.beta * self.r_blocks
    }

    pub fn capacity(&self) -> usize {
        self.usable_cols * self.r_blocks
    }

    /// Cell holding data bit `s` (0-based).
    pub fn slot(&self, s: usize) -> (usize, usize) {
        let col = s / self.r_blocks + 1;
        let block = s % self.r_blocks;
        let j = (col - 1) % self.beta + 1;
        (block * self.beta + j, col)
    }

    pub fn is_slot(&self, row: usize, col: usize) -> bool {
        col <= self.usable_cols && (row - 1) % self.beta == (col - 1) % self.beta
    }
}

pub fn pack(stream: &BitSeq, layout: &SlotLayout) -> Result<BitGrid> {
    if stream.len() > layout.capacity() {
        return Err(Error::Parameter(format!(
            "stream of {} bits exceeds {} slots",
            stream.len(),
            layout.capacity()
        )));
    }
    let mut c = BitGrid::zeros(layout.rows(), layout.n);
    for (s, bit) in stream.iter().enumerate() {
        let (i, j) = layout.slot(s);
        c.set(i, j, bit);
    }
    Ok(c)
}

/// Reads every slot back out, `capacity()` bits in data order.
pub fn unpack(c: &BitGrid, layout: &SlotLayout) -> Result<BitSeq> {
    if c.n_rows() != layout.rows() || c.n_cols() != layout.n {
        return Err(Error::corrupt(
            Stage::Pack,
            format!(
                "redundancy block is {}x{}, expected {}x{}",
                c.n_rows(),
                c.n_cols(),
                layout.rows(),
                layout.n
            ),
        ));
    }
    for i in 1..=c.n_rows() {
        for j in 1..=c.n_cols() {
            if c.get(i, j) && !layout.is_slot(i, j) {
                return Err(Error::corrupt(
                    Stage::Pack,
                    format!("stray 1 at non-slot cell ({i}, {j}) of the redundancy block"),
                ));
            }
        }
    }
    Ok((0..layout.capacity())
        .map(|s| {
            let (i, j) = layout.slot(s);
            c.get(i, j)
        })
        .collect())
}
