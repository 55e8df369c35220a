//! Parameter derivation and the top-level array encoder and decoder.
//!
//! An `n x n` codeword is laid out as
//!
//! * rows `1..=m`: the payload, one row-code word per row, after column
//!   balancing;
//! * rows `m+1..=n`: the `c x n` redundancy block holding the balancing
//!   records, spread so that any two data bits in a row or column are at
//!   least `beta` cells apart.

use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::bitcore::{BitGrid, BitSeq};
use crate::dnc::{dnc_encode, dnc_undo, Budget};
use crate::enumcodec::{payload_bits, OneDCode, RowCode};
use crate::error::{Error, Result, Stage};
use crate::redpack::{
    ceil_log2, deserialize, pack, serialize, stream_bound, unpack, worst_case_len, SlotLayout,
};

/// Every constant of the scheme for one `(n, f(n) = p/q)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeParams {
    pub n: usize,
    pub p: u64,
    pub q: u64,
    pub beta: usize,
    pub r_blocks: usize,
    pub c: usize,
    pub m: usize,
    pub w_max: usize,
    pub alpha_num: u64,
    pub alpha_den: u64,
    pub k_row: usize,
    pub payload_bits_total: usize,
}

impl CodeParams {
    pub fn redundancy(&self) -> usize {
        self.n * self.n - self.payload_bits_total
    }

    /// Rate as the exact fraction `payload / n^2`.
    pub fn rate_fraction(&self) -> (usize, usize) {
        (self.payload_bits_total, self.n * self.n)
    }

    pub fn rate(&self) -> f64 {
        self.payload_bits_total as f64 / (self.n * self.n) as f64
    }

    /// `f(n)` formatted as `p` or `p/q`.
    pub fn f_display(&self) -> String {
        fmt_ratio(self.p, self.q)
    }
}

fn fmt_ratio(p: u64, q: u64) -> String {
    if q == 1 {
        p.to_string()
    } else {
        format!("{p}/{q}")
    }
}

/// Derives the scheme for `n x n` arrays with row and column weights at
/// most `f(n) = p / q`.
pub fn derive_params(n: usize, p: u64, q: u64) -> Result<CodeParams> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "array side {n} must be at least 2"
        )));
    }
    if q == 0 {
        return Err(Error::Parameter("f(n) has zero denominator".into()));
    }
    if p < q || p > q * n as u64 {
        return Err(Error::Parameter(format!(
            "f(n) = {} must lie in [1, {n}]",
            fmt_ratio(p, q)
        )));
    }
    let g = p.gcd(&q);
    let (p, q) = (p / g, q / g);
    let nu = n as u64;

    let beta = (nu * q).div_ceil(p) as usize;
    let r_blocks = ceil_log2(n) + 6;
    let c = beta * r_blocks;
    if c >= n {
        return Err(Error::Infeasible(format!("c={c} ≥ n={n}")));
    }
    let m = n - c;
    let w_max = (p / q) as usize;
    let k_row = payload_bits(n, w_max)?;

    let (a_num, a_den) = (m as u64 * p, nu * q);
    let ag = a_num.gcd(&a_den);

    let params = CodeParams {
        n,
        p,
        q,
        beta,
        r_blocks,
        c,
        m,
        w_max,
        alpha_num: a_num / ag,
        alpha_den: a_den / ag,
        k_row,
        payload_bits_total: m * k_row,
    };

    let worst = worst_case_len(n, m);
    assert!(
        worst <= stream_bound(n),
        "index stream bound broken at n={n}, m={m}: {worst} bits"
    );
    let capacity = SlotLayout::from_params(&params).capacity();
    if worst > capacity {
        return Err(Error::Infeasible(format!(
            "index stream needs up to {worst} bits but the redundancy block holds {capacity}"
        )));
    }
    debug_assert_eq!(params.redundancy(), m * (n - k_row) + c * n);
    Ok(params)
}

/// Array codec over a pluggable row code.
#[derive(Debug, Clone)]
pub struct Codec<R: RowCode = OneDCode> {
    params: CodeParams,
    row_code: R,
    layout: SlotLayout,
    budget: Budget,
}

impl Codec<OneDCode> {
    /// Codec using the enumerative row code with cap `floor(f(n))`.
    pub fn new(params: CodeParams) -> Result<Self> {
        let row_code = OneDCode::new(params.n, params.w_max)?;
        Self::with_row_code(params, row_code)
    }
}

impl<R: RowCode> Codec<R> {
    pub fn with_row_code(params: CodeParams, row_code: R) -> Result<Self> {
        if row_code.row_len() != params.n || row_code.max_weight() > params.w_max {
            return Err(Error::Parameter(format!(
                "row code ({} bits, weight <= {}) does not fit n={}, f={}",
                row_code.row_len(),
                row_code.max_weight(),
                params.n,
                params.f_display()
            )));
        }
        Ok(Self {
            layout: SlotLayout::from_params(&params),
            budget: Budget::from_params(&params),
            params,
            row_code,
        })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    /// Message length accepted by [`Codec::encode`].
    pub fn payload_bits(&self) -> usize {
        self.params.m * self.row_code.payload_bits()
    }

    pub fn encode(&self, message: &BitSeq) -> Result<BitGrid> {
        let CodeParams { n, m, .. } = self.params;
        let k = self.row_code.payload_bits();
        if message.len() != m * k {
            return Err(Error::Usage(format!(
                "message has {} bits, expected {}",
                message.len(),
                m * k
            )));
        }
        let mut block = BitGrid::zeros(m, n);
        for i in 1..=m {
            let row = self
                .row_code
                .encode_row(&message.slice((i - 1) * k + 1, i * k))?;
            if row.weight() > self.params.w_max {
                return Err(Error::Internal(format!(
                    "row code produced weight {}",
                    row.weight()
                )));
            }
            block.set_row(i, &row);
        }
        let records = dnc_encode(&mut block, &self.budget)?;
        let stream = serialize(&records, n, m)?;
        let redundancy = pack(&stream.bits, &self.layout)?;
        let out = block.vstack(&redundancy)?;
        debug_assert!(verify_membership(&out, self.params.p, self.params.q).ok);
        Ok(out)
    }

    /// Inverts [`Codec::encode`]. Arrays that are not codewords are rejected
    /// with a [`Error::Corrupt`] naming the stage that caught them.
    pub fn decode(&self, grid: &BitGrid) -> Result<BitSeq> {
        let CodeParams { n, m, .. } = self.params;
        if grid.n_rows() != n || grid.n_cols() != n {
            return Err(Error::Usage(format!(
                "array is {}x{}, expected {n}x{n}",
                grid.n_rows(),
                grid.n_cols()
            )));
        }
        let stream = unpack(&grid.sub_rows(m + 1, n), &self.layout)?;
        let records = deserialize(&stream, n, m)?;
        let mut block = grid.sub_rows(1, m);
        dnc_undo(&mut block, &records)?;
        let mut message = BitSeq::new();
        for i in 1..=m {
            let row = block.row(i);
            if row.weight() > self.row_code.max_weight() {
                return Err(Error::corrupt(
                    Stage::RowDecode,
                    format!("row {i} has weight {} after undo", row.weight()),
                ));
            }
            message = message.concat(&self.row_code.decode_row(&row)?);
        }
        // the stages above only catch structural damage; a codeword must also
        // be exactly what its message encodes to
        match self.encode(&message) {
            Ok(again) if again == *grid => Ok(message),
            Ok(_) => Err(Error::corrupt(
                Stage::Reencode,
                "array is not the codeword of the message it decodes to",
            )),
            Err(e) => Err(Error::corrupt(Stage::Reencode, e.to_string())),
        }
    }
}

pub fn encode(params: &CodeParams, message: &BitSeq) -> Result<BitGrid> {
    Codec::new(params.clone())?.encode(message)
}

pub fn decode(params: &CodeParams, grid: &BitGrid) -> Result<BitSeq> {
    Codec::new(params.clone())?.decode(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Col,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub axis: Axis,
    pub index: usize,
    pub weight: usize,
    pub bound: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axis = match self.axis {
            Axis::Row => "row",
            Axis::Col => "column",
        };
        write!(
            f,
            "{axis} {} weight {} > {}",
            self.index, self.weight, self.bound
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MembershipReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Checks every row and column weight against `p / q` via `weight * q <= p`.
pub fn verify_membership(g: &BitGrid, p: u64, q: u64) -> MembershipReport {
    let bound = fmt_ratio(p, q);
    let over = |w: usize| w as u128 * q as u128 > p as u128;
    let mut violations = Vec::new();
    for i in 1..=g.n_rows() {
        let w = g.row_weight(i);
        if over(w) {
            violations.push(Violation {
                axis: Axis::Row,
                index: i,
                weight: w,
                bound: bound.clone(),
            });
        }
    }
    for j in 1..=g.n_cols() {
        let w = g.col_weight(j);
        if over(w) {
            violations.push(Violation {
                axis: Axis::Col,
                index: j,
                weight: w,
                bound: bound.clone(),
            });
        }
    }
    MembershipReport {
        ok: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnc::split_tree;
    use num_bigint::BigUint;
    use num_traits::One;
    use rand::{Rng, SeedableRng};

    fn random_message(rng: &mut impl Rng, len: usize) -> BitSeq {
        (0..len).map(|_| rng.gen()).collect()
    }

    /// floor(log2(sum_{i<=w} C(n,i))) straight from Pascal's triangle.
    fn k_row_oracle(n: usize, w: usize) -> usize {
        let mut row = vec![BigUint::one()];
        for _ in 0..n {
            let mut next = vec![BigUint::one(); row.len() + 1];
            for i in 1..row.len() {
                next[i] = &row[i - 1] + &row[i];
            }
            row = next;
        }
        let total: BigUint = row[..=w].iter().sum();
        total.bits() as usize - 1
    }

    #[test]
    fn derive_params_n64_f32() {
        let p = derive_params(64, 32, 1).unwrap();
        assert_eq!((p.beta, p.r_blocks, p.c, p.m), (2, 12, 24, 40));
        assert_eq!((p.alpha_num, p.alpha_den), (20, 1));
        assert_eq!(k_row_oracle(64, 32), 63);
        assert_eq!(p.k_row, 63);
        assert_eq!(p.payload_bits_total, 2520);
        assert_eq!(p.redundancy(), 1576);
    }

    #[test]
    fn derive_params_n32_f16() {
        let p = derive_params(32, 16, 1).unwrap();
        assert_eq!((p.c, p.m), (22, 10));
        assert_eq!(k_row_oracle(32, 16), 31);
        assert_eq!((p.k_row, p.payload_bits_total), (31, 310));
    }

    #[test]
    fn derive_params_rejects() {
        assert_eq!(
            derive_params(16, 8, 1),
            Err(Error::Infeasible("c=20 ≥ n=16".into()))
        );
        assert!(matches!(derive_params(64, 0, 1), Err(Error::Parameter(_))));
        assert!(matches!(derive_params(64, 65, 1), Err(Error::Parameter(_))));
        assert!(matches!(derive_params(64, 1, 0), Err(Error::Parameter(_))));
        assert!(matches!(derive_params(1, 1, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn derive_params_reduces_fraction() {
        let a = derive_params(100, 100, 2).unwrap();
        let b = derive_params(100, 50, 1).unwrap();
        assert_eq!(a, b);
        let r = derive_params(100, 101, 2).unwrap();
        assert_eq!((r.p, r.q, r.w_max, r.beta), (101, 2, 50, 2));
    }

    #[test]
    fn params_invariants_over_sweep() {
        for n in 2..=300usize {
            for (p, q) in [
                (n as u64, 2),
                (n as u64, 1),
                (3 * n as u64, 4),
                (n as u64, 3),
            ] {
                let Ok(params) = derive_params(n, p, q) else {
                    continue;
                };
                let CodeParams { c, m, k_row, .. } = params;
                assert!(c < n && m >= 1 && params.w_max >= 1 && k_row >= 1);
                assert_eq!(params.redundancy(), m * (n - k_row) + c * n);
                // floor(m f / n) + floor(c f / n) <= floor(f)
                let fl = |x: u64| (x * params.p / (n as u64 * params.q)) as usize;
                assert!(fl(m as u64) + fl(c as u64) <= params.w_max);
                assert!(params.r_blocks <= fl(c as u64));
                assert!(worst_case_len(n, m) <= stream_bound(n));
            }
        }
    }

    #[test]
    fn zero_message_gives_zero_grid() {
        let params = derive_params(32, 16, 1).unwrap();
        let g = encode(&params, &BitSeq::zeros(params.payload_bits_total)).unwrap();
        assert_eq!(g, BitGrid::zeros(32, 32));
        assert_eq!(decode(&params, &g).unwrap(), BitSeq::zeros(310));
    }

    #[test]
    fn encode_rejects_wrong_length() {
        let params = derive_params(32, 16, 1).unwrap();
        assert!(matches!(
            encode(&params, &BitSeq::zeros(309)),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            decode(&params, &BitGrid::zeros(31, 32)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn round_trip_and_membership_n32() {
        let params = derive_params(32, 16, 1).unwrap();
        let codec = Codec::new(params.clone()).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(32);
        for _ in 0..100 {
            let msg = random_message(&mut rng, codec.payload_bits());
            let g = codec.encode(&msg).unwrap();
            assert!(verify_membership(&g, 16, 1).ok);
            for i in 1..=params.m {
                assert!(g.row_weight(i) <= params.w_max);
            }
            assert_eq!(codec.decode(&g).unwrap(), msg);
        }
    }

    #[test]
    fn round_trip_fractional_and_odd_sizes() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(99);
        for (n, p, q) in [
            (100, 101, 2),
            (90, 135, 4),
            (77, 38, 1),
            (150, 100, 1),
            (64, 48, 1),
        ] {
            let params = derive_params(n, p, q).unwrap();
            let codec = Codec::new(params.clone()).unwrap();
            for _ in 0..10 {
                let msg = random_message(&mut rng, codec.payload_bits());
                let g = codec.encode(&msg).unwrap();
                assert!(
                    verify_membership(&g, params.p, params.q).ok,
                    "n={n} f={p}/{q}"
                );
                assert_eq!(codec.decode(&g).unwrap(), msg);
            }
        }
    }

    #[test]
    fn stray_bit_in_redundancy_block_names_pack_stage() {
        let params = derive_params(64, 32, 1).unwrap();
        let mut g = BitGrid::zeros(64, 64);
        // row m+1 pairs with odd columns; column 2 is not a slot there
        g.set(params.m + 1, 2, true);
        let err = decode(&params, &g).unwrap_err();
        assert!(matches!(
            err,
            Error::Corrupt {
                stage: Stage::Pack,
                ..
            }
        ));
        assert!(err.to_string().contains("pack"));
    }

    #[test]
    fn verify_membership_examples() {
        assert!(verify_membership(&BitGrid::zeros(4, 4), 1, 1).ok);
        let g = BitGrid::from_rows(&["11", "00"]).unwrap();
        let r = verify_membership(&g, 1, 1);
        assert!(!r.ok);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].to_string(), "row 1 weight 2 > 1");
        // 3/2: weight 2 fails, weight 1 passes
        let r = verify_membership(&BitGrid::from_rows(&["110", "100", "000"]).unwrap(), 3, 2);
        assert_eq!(r.violations.len(), 2);
        assert_eq!(r.violations[1].to_string(), "column 1 weight 2 > 3/2");
    }

    #[test]
    fn pluggable_row_code() {
        /// Weight-0-or-1 rows: payload picks the position of the single 1.
        struct OneHot(usize);
        impl RowCode for OneHot {
            fn row_len(&self) -> usize {
                self.0
            }
            fn max_weight(&self) -> usize {
                1
            }
            fn payload_bits(&self) -> usize {
                ceil_log2(self.0)
            }
            fn encode_row(&self, payload: &BitSeq) -> Result<BitSeq> {
                let v = payload.iter().fold(0, |a, b| a << 1 | b as usize);
                Ok((0..self.0).map(|i| i == v).collect())
            }
            fn decode_row(&self, row: &BitSeq) -> Result<BitSeq> {
                let v = (0..self.0)
                    .find(|&i| row.get(i + 1))
                    .ok_or_else(|| Error::corrupt(Stage::RowDecode, "empty row"))?;
                Ok((0..self.payload_bits())
                    .rev()
                    .map(|b| v >> b & 1 == 1)
                    .collect())
            }
        }
        let params = derive_params(64, 32, 1).unwrap();
        let codec = Codec::with_row_code(params, OneHot(64)).unwrap();
        assert_eq!(codec.payload_bits(), 40 * 6);
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let msg = random_message(&mut rng, codec.payload_bits());
        let g = codec.encode(&msg).unwrap();
        assert_eq!(codec.decode(&g).unwrap(), msg);
        assert!(Codec::with_row_code(derive_params(64, 32, 1).unwrap(), OneHot(63)).is_err());
    }

    #[test]
    fn tree_record_count_matches_stream_parse() {
        let params = derive_params(100, 50, 1).unwrap();
        assert_eq!(split_tree(100).len(), 99);
        assert!(worst_case_len(100, params.m) <= SlotLayout::from_params(&params).capacity());
    }
}
