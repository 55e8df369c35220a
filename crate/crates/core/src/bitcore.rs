//! Bit sequences, bit grids and the column-major views used by the balancer.
//!
//! Every positional API in this module is 1-based: position `t` of a
//! sequence of length `n` satisfies `1 <= t <= n`, and cell `(i, j)` of a
//! grid has `1 <= i <= rows`, `1 <= j <= cols`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finite binary sequence.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitSeq {
    bits: Vec<bool>,
}

impl BitSeq {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit at 1-based position `t`.
    ///
    /// Panics if `t` is 0 or past the end.
    pub fn get(&self, t: usize) -> bool {
        assert!(t >= 1 && t <= self.len(), "position {t} out of range");
        self.bits[t - 1]
    }

    pub fn set(&mut self, t: usize, bit: bool) {
        assert!(t >= 1 && t <= self.len(), "position {t} out of range");
        self.bits[t - 1] = bit;
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> BitSeq {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn concat(&self, other: &BitSeq) -> BitSeq {
        let mut bits = Vec::with_capacity(self.len() + other.len());
        bits.extend_from_slice(&self.bits);
        bits.extend_from_slice(&other.bits);
        Self { bits }
    }

    /// Sub-sequence of positions `from..=to` (1-based, inclusive).
    pub fn slice(&self, from: usize, to: usize) -> BitSeq {
        Self {
            bits: self.bits[from - 1..to].to_vec(),
        }
    }

    /// Packs the sequence MSB-first into bytes, zero-padding the tail.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    /// Reads the first `len` bits MSB-first out of `bytes`.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<BitSeq> {
        if bytes.len() * 8 < len {
            return Err(Error::Usage(format!(
                "need {len} bits but only {} bytes given",
                bytes.len()
            )));
        }
        let bits = (0..len)
            .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
            .collect();
        Ok(Self { bits })
    }
}

impl FromIterator<bool> for BitSeq {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self {
            bits: iter.into_iter().collect(),
        }
    }
}

impl FromStr for BitSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parameter(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitSeq::from_bools)
    }
}

impl fmt::Display for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitSeq(\"{self}\")")
    }
}

/// Hamming weight of `x`.
pub fn weight(x: &BitSeq) -> usize {
    x.weight()
}

pub fn complement(x: &BitSeq) -> BitSeq {
    x.complement()
}

pub fn concat(x: &BitSeq, y: &BitSeq) -> BitSeq {
    x.concat(y)
}

/// `floor(k * num / den)` in exact integer arithmetic.
pub fn floor_scaled(k: u64, num: u64, den: u64) -> Result<u64> {
    if den == 0 {
        return Err(Error::Parameter("zero denominator".into()));
    }
    let q = (k as u128 * num as u128) / den as u128;
    u64::try_from(q).map_err(|_| Error::Parameter(format!("{k}*{num}/{den} overflows u64")))
}

/// A dense `rows x cols` bit array stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitGrid {
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl BitGrid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            cells: vec![false; rows * cols],
        }
    }

    /// Builds a grid from equal-length row strings such as `["10", "01"]`.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.as_ref().parse::<BitSeq>())
            .collect::<Result<Vec<_>>>()?;
        let cols = parsed.first().map_or(0, BitSeq::len);
        if parsed.iter().any(|r| r.len() != cols) {
            return Err(Error::Parameter("ragged rows".into()));
        }
        let cells = parsed.iter().flat_map(|r| r.iter()).collect();
        Ok(Self {
            rows: parsed.len(),
            cols,
            cells,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        assert!(
            i >= 1 && i <= self.rows && j >= 1 && j <= self.cols,
            "cell ({i}, {j}) out of range for {}x{} grid",
            self.rows,
            self.cols
        );
        (i - 1) * self.cols + (j - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[self.offset(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        let o = self.offset(i, j);
        self.cells[o] = bit;
    }

    pub fn row(&self, i: usize) -> BitSeq {
        let start = self.offset(i, 1);
        BitSeq::from_bools(self.cells[start..start + self.cols].to_vec())
    }

    pub fn col(&self, j: usize) -> BitSeq {
        (1..=self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_row(&mut self, i: usize, row: &BitSeq) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        let start = self.offset(i, 1);
        self.cells[start..start + self.cols].copy_from_slice(row.as_slice());
    }

    pub fn row_weight(&self, i: usize) -> usize {
        let start = self.offset(i, 1);
        self.cells[start..start + self.cols]
            .iter()
            .filter(|&&b| b)
            .count()
    }

    pub fn col_weight(&self, j: usize) -> usize {
        (1..=self.rows).filter(|&i| self.get(i, j)).count()
    }

    pub fn weight(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    /// Copy of rows `from..=to`.
    pub fn sub_rows(&self, from: usize, to: usize) -> BitGrid {
        let start = self.offset(from, 1);
        let end = self.offset(to, self.cols) + 1;
        Self {
            rows: to + 1 - from,
            cols: self.cols,
            cells: self.cells[start..end].to_vec(),
        }
    }

    /// Stacks `self` on top of `below`.
    pub fn vstack(&self, below: &BitGrid) -> Result<BitGrid> {
        if self.cols != below.cols {
            return Err(Error::Parameter(format!(
                "cannot stack {} columns on {} columns",
                self.cols, below.cols
            )));
        }
        let mut cells = self.cells.clone();
        cells.extend_from_slice(&below.cells);
        Ok(Self {
            rows: self.rows + below.rows,
            cols: self.cols,
            cells,
        })
    }

    /// Row-by-row linearization.
    pub fn row_major(&self) -> BitSeq {
        BitSeq::from_bools(self.cells.clone())
    }

    /// Inverse of [`BitGrid::row_major`].
    pub fn from_row_major(rows: usize, cols: usize, seq: &BitSeq) -> Result<BitGrid> {
        if seq.len() != rows * cols {
            return Err(Error::Parameter(format!(
                "sequence of length {} cannot fill a {rows}x{cols} grid",
                seq.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            cells: seq.as_slice().to_vec(),
        })
    }
}

impl fmt::Display for BitGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.rows {
            writeln!(f, "{}", self.row(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitGrid {}x{} [", self.rows, self.cols)?;
        for i in 1..=self.rows {
            if i > 1 {
                f.write_str("/")?;
            }
            write!(f, "{}", self.row(i))?;
        }
        f.write_str("]")
    }
}

/// Column-by-column linearization of a subset of a grid's columns.
///
/// Position `t` maps to row `((t-1) mod n_rows) + 1` of column
/// `cols[ceil(t / n_rows)]`. The view stores only the index map; reads and
/// writes go through the grid passed to each call, so two views over the
/// same grid can be used together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColView {
    n_rows: usize,
    cols: Vec<usize>,
}

impl ColView {
    /// `cols` must be strictly increasing and 1-based.
    pub fn new(n_rows: usize, cols: Vec<usize>) -> Self {
        debug_assert!(cols.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(cols.first().is_none_or(|&c| c >= 1));
        Self { n_rows, cols }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn len(&self) -> usize {
        self.n_rows * self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_of(&self, t: usize) -> Result<(usize, usize)> {
        if t == 0 || t > self.len() {
            return Err(Error::Index {
                pos: t,
                len: self.len(),
            });
        }
        Ok(((t - 1) % self.n_rows + 1, self.cols[(t - 1) / self.n_rows]))
    }

    pub fn get(&self, grid: &BitGrid, t: usize) -> Result<bool> {
        let (i, j) = self.cell_of(t)?;
        Ok(grid.get(i, j))
    }

    pub fn set(&self, grid: &mut BitGrid, t: usize, bit: bool) -> Result<()> {
        let (i, j) = self.cell_of(t)?;
        grid.set(i, j, bit);
        Ok(())
    }

    pub fn weight(&self, grid: &BitGrid) -> usize {
        self.cols.iter().map(|&j| grid.col_weight(j)).sum()
    }

    /// Copies the viewed bits out in view order.
    pub fn gather(&self, grid: &BitGrid) -> BitSeq {
        self.cols
            .iter()
            .flat_map(|&j| (1..=self.n_rows).map(move |i| grid.get(i, j)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(s: &str) -> BitSeq {
        s.parse().unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight(&seq("110011")), 4);
        assert_eq!(weight(&seq("")), 0);
        assert_eq!(weight(&seq("0000")), 0);
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement(&seq("110011")), seq("001100"));
        assert_eq!(complement(&seq("0")), seq("1"));
        assert_eq!(complement(&seq("")), seq(""));
    }

    #[test]
    fn concat_examples() {
        assert_eq!(concat(&seq("11"), &seq("00")), seq("1100"));
        assert_eq!(concat(&seq(""), &seq("101")), seq("101"));
        assert_eq!(weight(&concat(&seq("101"), &seq("01"))), 3);
    }

    #[test]
    fn floor_scaled_examples() {
        assert_eq!(floor_scaled(3, 20, 3).unwrap(), 20);
        assert_eq!(floor_scaled(1, 3, 2).unwrap(), 1);
        assert_eq!(floor_scaled(5, 3, 2).unwrap(), 7);
        assert!(matches!(floor_scaled(5, 3, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn floor_scaled_near_additive_sweep() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let num = rng.gen_range(0..1000u64);
            let den = rng.gen_range(1..1000u64);
            for a in (0..=10_000u64).step_by(97) {
                for b in (0..=10_000u64).step_by(89) {
                    let fa = floor_scaled(a, num, den).unwrap();
                    let fb = floor_scaled(b, num, den).unwrap();
                    let fab = floor_scaled(a + b, num, den).unwrap();
                    assert!(fa + fb <= fab && fab <= fa + fb + 1);
                }
            }
        }
    }

    #[test]
    fn row_major_examples() {
        let g = BitGrid::from_rows(&["10", "01"]).unwrap();
        assert_eq!(g.row_major(), seq("1001"));
        assert_eq!(BitGrid::zeros(3, 3).row_major(), seq("000000000"));
        assert!(BitGrid::from_row_major(2, 2, &seq("101")).is_err());
    }

    #[test]
    fn grid_weights_agree() {
        let g = BitGrid::from_rows(&["110", "011", "001"]).unwrap();
        let by_rows: usize = (1..=3).map(|i| g.row_weight(i)).sum();
        let by_cols: usize = (1..=3).map(|j| g.col_weight(j)).sum();
        assert_eq!(g.weight(), 5);
        assert_eq!(by_rows, 5);
        assert_eq!(by_cols, 5);
        assert_eq!(g.col(3), seq("011"));
    }

    #[test]
    fn weight_tracks_mutation() {
        let mut g = BitGrid::zeros(2, 2);
        g.set(1, 2, true);
        assert_eq!(g.weight(), 1);
        g.set(1, 2, false);
        assert_eq!(g.weight(), 0);
        let mut s = seq("000");
        s.set(3, true);
        assert_eq!(s.weight(), 1);
    }

    #[test]
    fn colview_cell_of_examples() {
        let v = ColView::new(2, vec![3, 5]);
        assert_eq!(v.cell_of(3).unwrap(), (1, 5));
        assert_eq!(v.cell_of(2).unwrap(), (2, 3));
        assert_eq!(v.cell_of(0), Err(Error::Index { pos: 0, len: 4 }));
        assert!(v.cell_of(5).is_err());
    }

    #[test]
    fn colview_reads_and_writes_through() {
        let mut g = BitGrid::zeros(2, 5);
        let v = ColView::new(2, vec![3, 5]);
        v.set(&mut g, 4, true).unwrap();
        assert!(g.get(2, 5));
        assert!(v.get(&g, 4).unwrap());
        assert_eq!(v.gather(&g), seq("0001"));
        assert_eq!(v.weight(&g), 1);
    }

    #[test]
    fn bytes_are_msb_first() {
        let s = seq("1000000001");
        assert_eq!(s.to_bytes(), vec![0x80, 0x40]);
        assert_eq!(BitSeq::from_bytes(&[0x80, 0x40], 10).unwrap(), s);
    }

    fn arb_grid(max: usize) -> impl Strategy<Value = BitGrid> {
        (1..=max, 1..=max).prop_flat_map(|(r, c)| {
            proptest::collection::vec(any::<bool>(), r * c).prop_map(move |cells| BitGrid {
                rows: r,
                cols: c,
                cells,
            })
        })
    }

    proptest! {
        #[test]
        fn concat_weight_is_additive(x in proptest::collection::vec(any::<bool>(), 0..40),
                                     y in proptest::collection::vec(any::<bool>(), 0..40)) {
            let (x, y) = (BitSeq::from_bools(x), BitSeq::from_bools(y));
            prop_assert_eq!(concat(&x, &y).weight(), x.weight() + y.weight());
            prop_assert_eq!(complement(&complement(&x)), x);
        }

        #[test]
        fn row_major_round_trips(g in arb_grid(6)) {
            let back = BitGrid::from_row_major(g.n_rows(), g.n_cols(), &g.row_major()).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn colviews_with_equal_rows_align(rows in 1usize..6, a in 1usize..5, b in 1usize..5) {
            let u = ColView::new(rows, (1..=a).collect());
            let v = ColView::new(rows, (10..10 + b).collect());
            for t in 1..=u.len().min(v.len()) {
                prop_assert_eq!(u.cell_of(t).unwrap().0, v.cell_of(t).unwrap().0);
            }
        }
    }
}
