//! Enumerative coding of length-`n` sequences with weight at most `w`.
//!
//! Sequences are ordered lexicographically with `0 < 1`. A payload of
//! `k_row` bits is read as a big-endian integer and mapped to the sequence of
//! that rank, so every row produced here has weight at most `w`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bitcore::BitSeq;
use crate::error::{Error, Result, Stage};

/// A 1D map from fixed-length payloads to weight-bounded rows and back.
///
/// The array codec only relies on this contract, so other row codes can be
/// slotted in without touching the balancing or packing stages.
pub trait RowCode {
    /// Output row length.
    fn row_len(&self) -> usize;
    /// Upper bound on the weight of every encoded row.
    fn max_weight(&self) -> usize;
    /// Number of payload bits consumed per row.
    fn payload_bits(&self) -> usize;
    fn encode_row(&self, payload: &BitSeq) -> Result<BitSeq>;
    fn decode_row(&self, row: &BitSeq) -> Result<BitSeq>;
}

/// `sum_{i=0}^{w} C(n, i)`.
pub fn count_at_most(n: usize, w: usize) -> Result<BigUint> {
    if w > n {
        return Err(Error::Parameter(format!(
            "weight cap {w} exceeds length {n}"
        )));
    }
    let mut binom = BigUint::one();
    let mut total = BigUint::one();
    for i in 1..=w {
        binom = binom * BigUint::from(n + 1 - i) / BigUint::from(i);
        total += &binom;
    }
    Ok(total)
}

/// `floor(log2(count_at_most(n, w)))`.
pub fn payload_bits(n: usize, w: usize) -> Result<usize> {
    Ok(count_at_most(n, w)?.bits() as usize - 1)
}

/// Enumerative code over `{x in {0,1}^n : wt(x) <= w_max}`.
#[derive(Debug, Clone)]
pub struct OneDCode {
    n: usize,
    w_max: usize,
    // counts[l][v] = number of length-l sequences with weight <= v
    counts: Vec<Vec<BigUint>>,
    k_row: usize,
    capacity: BigUint,
}

impl OneDCode {
    pub fn new(n: usize, w_max: usize) -> Result<Self> {
        if w_max > n {
            return Err(Error::Parameter(format!(
                "weight cap {w_max} exceeds length {n}"
            )));
        }
        let mut counts: Vec<Vec<BigUint>> = Vec::with_capacity(n + 1);
        counts.push(vec![BigUint::one(); w_max + 1]);
        for l in 1..=n {
            let prev = &counts[l - 1];
            let mut row = Vec::with_capacity(w_max + 1);
            row.push(BigUint::one());
            for v in 1..=w_max {
                row.push(&prev[v] + &prev[v - 1]);
            }
            counts.push(row);
        }
        let total = counts[n][w_max].clone();
        let k_row = total.bits() as usize - 1;
        Ok(Self {
            n,
            w_max,
            counts,
            k_row,
            capacity: BigUint::one() << k_row,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w_max(&self) -> usize {
        self.w_max
    }

    pub fn k_row(&self) -> usize {
        self.k_row
    }

    /// Cumulative count `N(l, v)` for `l <= n`, `v <= w_max`.
    pub fn count(&self, l: usize, v: usize) -> &BigUint {
        &self.counts[l][v]
    }

    /// Total number of admissible sequences.
    pub fn size(&self) -> &BigUint {
        &self.counts[self.n][self.w_max]
    }

    pub fn unrank(&self, index: &BigUint) -> Result<BitSeq> {
        if index >= self.size() {
            return Err(Error::Encode(format!(
                "index {index} out of range for {} sequences",
                self.size()
            )));
        }
        let mut rem = index.clone();
        let mut budget = self.w_max;
        let mut out = BitSeq::zeros(self.n);
        for pos in 1..=self.n {
            let zeros_below = &self.counts[self.n - pos][budget];
            if rem >= *zeros_below {
                rem -= zeros_below;
                budget -= 1;
                out.set(pos, true);
            }
        }
        debug_assert!(rem.is_zero());
        Ok(out)
    }

    pub fn rank(&self, x: &BitSeq) -> Result<BigUint> {
        if x.len() != self.n {
            return Err(Error::corrupt(
                Stage::RowDecode,
                format!("row length {} != {}", x.len(), self.n),
            ));
        }
        if x.weight() > self.w_max {
            return Err(Error::corrupt(
                Stage::RowDecode,
                format!("row weight {} exceeds {}", x.weight(), self.w_max),
            ));
        }
        let mut rank = BigUint::zero();
        let mut budget = self.w_max;
        for pos in 1..=self.n {
            if x.get(pos) {
                rank += &self.counts[self.n - pos][budget];
                budget -= 1;
            }
        }
        Ok(rank)
    }

    pub fn phi_encode(&self, payload: &BitSeq) -> Result<BitSeq> {
        if payload.len() != self.k_row {
            return Err(Error::Usage(format!(
                "row payload has {} bits, expected {}",
                payload.len(),
                self.k_row
            )));
        }
        self.unrank(&bits_to_uint(payload))
    }

    pub fn phi_decode(&self, row: &BitSeq) -> Result<BitSeq> {
        let r = self.rank(row)?;
        if r >= self.capacity {
            return Err(Error::corrupt(
                Stage::RowDecode,
                format!("row rank {r} is not below 2^{}", self.k_row),
            ));
        }
        Ok(uint_to_bits(&r, self.k_row))
    }
}

impl RowCode for OneDCode {
    fn row_len(&self) -> usize {
        self.n
    }

    fn max_weight(&self) -> usize {
        self.w_max
    }

    fn payload_bits(&self) -> usize {
        self.k_row
    }

    fn encode_row(&self, payload: &BitSeq) -> Result<BitSeq> {
        self.phi_encode(payload)
    }

    fn decode_row(&self, row: &BitSeq) -> Result<BitSeq> {
        self.phi_decode(row)
    }
}

/// MSB-first bits to integer.
pub(crate) fn bits_to_uint(bits: &BitSeq) -> BigUint {
    let mut v = BigUint::zero();
    for b in bits.iter() {
        v <<= 1;
        if b {
            v += 1u32;
        }
    }
    v
}

/// Integer to exactly `width` MSB-first bits; higher bits are dropped.
pub(crate) fn uint_to_bits(v: &BigUint, width: usize) -> BitSeq {
    (0..width).rev().map(|i| v.bit(i as u64)).collect()
}
