//! Prefix swaps between equal-length sequences and the searches that pick
//! the swapping position.
//!
//! For sequences `y`, `z` of length `n` the prefix swap at `t` exchanges
//! their first `t` bits. Moving `t` up by one changes the weight of either
//! result by at most one, so every weight between the `t = 0` and `t = n`
//! values is hit somewhere along the way. The two searches below return the
//! first `t` that hits a target weight; at that `t` the heavy sequence
//! always has a 1, which the caller clears to finish balancing.

use crate::bitcore::{BitGrid, BitSeq, ColView};
use crate::error::{Error, Result};

/// Which side of a split a flip lands on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    None,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapOutcome {
    /// Swapping position, 1-based.
    pub t: usize,
    pub flip_needed: bool,
    pub flipped_side: Side,
}

/// Returns `(Swap_t(y, z), Swap_t(z, y))`, i.e. `(z[..t] y[t..], y[..t] z[t..])`.
pub fn swap_prefix(y: &BitSeq, z: &BitSeq, t: usize) -> Result<(BitSeq, BitSeq)> {
    if y.len() != z.len() {
        return Err(Error::Parameter(format!(
            "length mismatch {} vs {}",
            y.len(),
            z.len()
        )));
    }
    if t > y.len() {
        return Err(Error::Parameter(format!(
            "swap position {t} exceeds length {}",
            y.len()
        )));
    }
    let (y, z) = (y.as_slice(), z.as_slice());
    let first = z[..t].iter().chain(&y[t..]).copied().collect();
    let second = y[..t].iter().chain(&z[t..]).copied().collect();
    Ok((first, second))
}

/// Exchanges the first `t` positions of two views over the same grid.
pub fn swap_view_prefix(grid: &mut BitGrid, u: &ColView, v: &ColView, t: usize) -> Result<()> {
    if u.len() != v.len() || u.n_rows() != v.n_rows() {
        return Err(Error::Parameter("views differ in shape".into()));
    }
    if t > u.len() {
        return Err(Error::Parameter(format!(
            "swap position {t} exceeds length {}",
            u.len()
        )));
    }
    for pos in 1..=t {
        let a = u.get(grid, pos)?;
        let b = v.get(grid, pos)?;
        u.set(grid, pos, b)?;
        v.set(grid, pos, a)?;
    }
    Ok(())
}

fn check_search_input(heavy: &BitSeq, light: &BitSeq, budget: usize) -> Result<()> {
    if heavy.len() != light.len() {
        return Err(Error::Internal(format!(
            "search over unequal lengths {} and {}",
            heavy.len(),
            light.len()
        )));
    }
    if heavy.weight() < budget + 1 || light.weight() > budget {
        return Err(Error::Internal(format!(
            "search needs wt(heavy) > {budget} >= wt(light), got {} and {}",
            heavy.weight(),
            light.weight()
        )));
    }
    Ok(())
}

/// Smallest `t >= 1` with `wt(heavy[..t] light[t..]) == budget + 1`.
///
/// `light_side` names the container that held `light`; after the swap it
/// holds `heavy[..t] light[t..]`, whose bit `t` is 1 and is the one to flip.
pub fn find_target_up(
    heavy: &BitSeq,
    light: &BitSeq,
    budget: usize,
    light_side: Side,
) -> Result<SwapOutcome> {
    check_search_input(heavy, light, budget)?;
    let mut w = light.weight();
    for (i, (h, l)) in heavy.iter().zip(light.iter()).enumerate() {
        w = w + h as usize - l as usize;
        if w == budget + 1 {
            debug_assert!(h);
            return Ok(SwapOutcome {
                t: i + 1,
                flip_needed: true,
                flipped_side: light_side,
            });
        }
    }
    Err(Error::Internal("target weight never reached".into()))
}

/// Smallest `t >= 1` with `wt(light[..t] heavy[t..]) == budget`.
///
/// The container that held `heavy` ends up at exactly `budget`. The
/// container that held `light` receives `heavy[..t]`, whose last bit is 1;
/// `light_side` names that container, which is where the flip goes.
pub fn find_target_exact(
    heavy: &BitSeq,
    light: &BitSeq,
    budget: usize,
    light_side: Side,
) -> Result<SwapOutcome> {
    check_search_input(heavy, light, budget)?;
    let mut w = heavy.weight();
    for (i, (h, l)) in heavy.iter().zip(light.iter()).enumerate() {
        w = w + l as usize - h as usize;
        if w == budget {
            debug_assert!(h);
            return Ok(SwapOutcome {
                t: i + 1,
                flip_needed: true,
                flipped_side: light_side,
            });
        }
    }
    Err(Error::Internal("target weight never reached".into()))
}

/// Clears the 1 at position `t` of `v`.
pub fn flip_one_at(v: &mut BitSeq, t: usize) -> Result<()> {
    if t == 0 || t > v.len() {
        return Err(Error::Index {
            pos: t,
            len: v.len(),
        });
    }
    if !v.get(t) {
        return Err(Error::CorruptState(format!("bit {t} is already 0")));
    }
    v.set(t, false);
    Ok(())
}
