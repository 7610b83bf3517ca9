//! Seeded random symbols and inputs.
//!
//! Every draw comes from `Pcg32` (PCG-XSH-RR): a 64-bit linear
//! congruential state `s <- s * 6364136223846793005 + inc` with the 32-bit
//! output `rotr((s ^ (s >> 18)) >> 27, s >> 59)`. The increment is
//! `2 * stream + 1`; the state is seeded through `Pcg32::new(seed, stream)`.
//! Coefficients are multiples of `1/64` times powers of two, so symbols
//! are exact and rational.

use std::collections::BTreeSet;

use rand::Rng;
use rand_pcg::Pcg32;

use dyalab_core::atom::Atom1D;
use dyalab_core::{DyadicInterval, DyadicRectangle, ExactFunction, QSqrt2, Scalar};

/// Stream of the corpus generator; scenarios derive others from it.
pub const CORPUS_STREAM: u64 = 0xa02b_dbf7_bb3c_0a7;

pub fn rng(seed: u64, stream: u64) -> Pcg32 {
    Pcg32::new(seed, stream)
}

/// A dyadic descendant of `root` at most `depth - 1` levels down.
pub fn random_descendant(rng: &mut Pcg32, root: &DyadicInterval, depth: u32) -> DyadicInterval {
    let level = rng.gen_range(0..depth.max(1));
    let pos = rng.gen_range(0..1i64 << level);
    DyadicInterval::new(root.scale - level as i32, (root.pos << level) + pos)
}

pub fn random_rectangle(rng: &mut Pcg32, window: &DyadicRectangle, depth: u32) -> DyadicRectangle {
    DyadicRectangle::new(window.sides.iter().map(|s| random_descendant(rng, s, depth)).collect())
}

/// A nonzero multiple of `1/64` in `[-1, 1]`.
pub fn random_coefficient(rng: &mut Pcg32) -> QSqrt2 {
    let k = rng.gen_range(1..=64i64);
    let k = if rng.gen_bool(0.5) { -k } else { k };
    QSqrt2::ratio(k, 64)
}

/// `terms` distinct Haar rectangles from the window tree to `depth` levels.
/// The coefficient of `h_R` is `u * 2^{floor(log2|R| / 2)}` with `u`
/// uniform on the `1/64` lattice of `[-1, 1]`, so every Haar ratio
/// `|<b, h_R>| / |R|^{1/2}` lies in `[|u| / sqrt 2, |u|]` whatever the scale.
pub fn random_symbol(rng: &mut Pcg32, window: &DyadicRectangle, depth: u32, terms: usize) -> ExactFunction {
    let d = window.dim();
    let capacity: u64 = (0..d).map(|_| (1u64 << depth.min(20)) - 1).product();
    let terms = terms.min(capacity as usize).max(1);
    let mut rects = BTreeSet::new();
    while rects.len() < terms {
        rects.insert(random_rectangle(rng, window, depth));
    }
    let mut f = ExactFunction::zero(d);
    for r in rects {
        let log_vol: i32 = r.sides.iter().map(|s| s.scale).sum();
        let half_vol = QSqrt2::pow2_half(2 * log_vol.div_euclid(2));
        f = &f + &ExactFunction::haar_rect(&r).scaled(&(random_coefficient(rng) * half_vol));
    }
    f
}

pub fn corpus(seed: u64, size: usize, window: &DyadicRectangle, depth: u32, terms: usize) -> Vec<ExactFunction> {
    let mut g = rng(seed, CORPUS_STREAM);
    (0..size).map(|_| random_symbol(&mut g, window, depth, terms)).collect()
}

/// A Haar combination on the full tree below `root` to `depth` levels,
/// with `|<b, h_I>| / sqrt|I|` drawn from `[1/2, 1]` and random signs.
pub fn full_tree_symbol(rng: &mut Pcg32, root: &DyadicInterval, depth: u32) -> ExactFunction {
    let mut f = ExactFunction::zero(1);
    for level in 0..depth {
        for i in root.descendants_at(root.scale - level as i32) {
            let k = rng.gen_range(32..=64i64);
            let k = if rng.gen_bool(0.5) { -k } else { k };
            let c = QSqrt2::ratio(k, 64) * QSqrt2::pow2_half(i.scale);
            f = &f + &ExactFunction::atom(Atom1D::Haar(i)).scaled(&c);
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_reproducible() {
        let w = DyadicRectangle::cube(2, DyadicInterval::unit());
        let a = corpus(7, 5, &w, 4, 6);
        let b = corpus(7, 5, &w, 4, 6);
        assert_eq!(a, b);
        assert_ne!(a, corpus(8, 5, &w, 4, 6));
        for f in &a {
            assert_eq!(f.len(), 6);
            for (r, _) in f.haar_coefficients().unwrap() {
                assert!(w.contains(&r) && r.sides.iter().all(|s| s.scale > -4));
            }
        }
    }

    #[test]
    fn full_tree_has_every_interval() {
        let f = full_tree_symbol(&mut rng(1, 2), &DyadicInterval::unit(), 3);
        assert_eq!(f.len(), 7);
    }
}
