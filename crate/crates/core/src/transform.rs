//! Zero counting for all linear parts at once.
//!
//! For fixed `a` the codewords are `g(x) + <w, x> + h`, where
//! `g(x) = Tr(a x^{p^l+1})` and `w` runs over the coordinate vectors dual to
//! `x ↦ Tr(b x)`. The p-ary counting transform
//!
//! ```text
//! N[w][s] = #{x : g(x) + <w, x> = s}
//! ```
//!
//! costs `m · q · p` word operations, against `q²` for zero counting each
//! `b` separately. The `p` counts of one `w` are packed side by side in a
//! single machine word so that adding `<w, x>` is a rotation of that word.
//!
//! The same transform, applied to indicator arrays over `(w, h)`, counts
//! for a fixed anchor point `x1` and every other point `x2` the codewords of
//! a given weight that vanish at `x1` and/or `x2`, which gives pair
//! coverage for all pairs through the anchor.

use std::collections::BTreeMap;
use std::ops::{Add, BitAnd, BitOr, Shl, Shr};

use rayon::prelude::*;
use serde::Serialize;

use crate::code::CodeSpec;
use crate::error::{Error, Result};
use crate::field::FieldElem;

trait Word:
    Copy
    + Default
    + Send
    + Sync
    + Add<Output = Self>
    + Shl<u32, Output = Self>
    + Shr<u32, Output = Self>
    + BitOr<Output = Self>
    + BitAnd<Output = Self>
{
    const BITS: u32;
    fn from_u64(v: u64) -> Self;
    fn low_u64(self) -> u64;
    /// The lowest `bits` bits set.
    fn low_mask(bits: u32) -> Self;
}

macro_rules! impl_word {
    ($t:ty) => {
        impl Word for $t {
            const BITS: u32 = <$t>::BITS;
            fn from_u64(v: u64) -> Self {
                v as $t
            }
            fn low_u64(self) -> u64 {
                self as u64
            }
            fn low_mask(bits: u32) -> Self {
                if bits == <$t>::BITS {
                    <$t>::MAX
                } else {
                    ((1 as $t) << bits) - 1
                }
            }
        }
    };
}
impl_word!(u64);
impl_word!(u128);

/// `p` counters of `lane_bits` bits each, residue `r` at bit `r · lane_bits`.
#[derive(Clone, Copy)]
struct Packing<W> {
    p: usize,
    lane_bits: u32,
    mask: W,
    lane_mask: u64,
}

impl<W: Word> Packing<W> {
    /// Fits `p` counters that may reach `max_count`, if the word is wide enough.
    fn new(p: usize, max_count: u64) -> Option<Self> {
        let lane_bits = 64 - max_count.leading_zeros();
        let used = lane_bits.checked_mul(p as u32)?;
        if used > W::BITS || lane_bits > 63 {
            return None;
        }
        Some(Packing {
            p,
            lane_bits,
            mask: W::low_mask(used),
            lane_mask: (1u64 << lane_bits) - 1,
        })
    }

    fn unit(&self, residue: usize) -> W {
        W::from_u64(1) << (residue as u32 * self.lane_bits)
    }

    /// Moves the count at residue `r` to residue `r + k`.
    #[inline(always)]
    fn rotate(&self, v: W, k: usize) -> W {
        if k == 0 {
            v
        } else {
            let k = k as u32;
            ((v << (k * self.lane_bits)) | (v >> ((self.p as u32 - k) * self.lane_bits)))
                & self.mask
        }
    }

    fn lane(&self, v: W, residue: usize) -> u64 {
        (v >> (residue as u32 * self.lane_bits)).low_u64() & self.lane_mask
    }
}

/// In place: entry `x` (a block of `width` words) becomes
/// `Σ_w rotate(entry w, <w, x>)`, with `x` and `w` read as base-p digit vectors.
fn counting_transform<W: Word>(
    pk: &Packing<W>,
    q: usize,
    width: usize,
    data: &mut [W],
    scratch: &mut Vec<W>,
) {
    let mut stride = 1;
    while stride < q {
        let span = stride * width;
        // Short spans do not vectorise; keep the p entries in registers instead.
        match pk.p {
            3 if span < SHORT_SPAN => stage_fixed::<W, 3>(pk, span, data),
            5 if span < SHORT_SPAN => stage_fixed::<W, 5>(pk, span, data),
            _ => stage_slices(pk, span, data, scratch),
        }
        stride *= pk.p;
    }
}

const SHORT_SPAN: usize = 16;

fn stage_fixed<W: Word, const P: usize>(pk: &Packing<W>, span: usize, data: &mut [W]) {
    for block in data.chunks_exact_mut(span * P) {
        for off in 0..span {
            let ins: [W; P] = std::array::from_fn(|u| block[off + u * span]);
            for v in 0..P {
                let mut acc = ins[0];
                for (u, &x) in ins.iter().enumerate().skip(1) {
                    acc = acc + pk.rotate(x, (u * v) % P);
                }
                block[off + v * span] = acc;
            }
        }
    }
}

fn stage_slices<W: Word>(pk: &Packing<W>, span: usize, data: &mut [W], scratch: &mut Vec<W>) {
    let p = pk.p;
    for block in data.chunks_exact_mut(span * p) {
        scratch.clear();
        scratch.extend_from_slice(block);
        for (v, out) in block.chunks_exact_mut(span).enumerate() {
            out.copy_from_slice(&scratch[..span]);
            for u in 1..p {
                let inp = &scratch[u * span..(u + 1) * span];
                let k = ((u * v) % p) as u32;
                if k == 0 {
                    for (o, &i) in out.iter_mut().zip(inp) {
                        *o = *o + i;
                    }
                } else {
                    let (left, right) = (k * pk.lane_bits, (p as u32 - k) * pk.lane_bits);
                    let mask = pk.mask;
                    for (o, &i) in out.iter_mut().zip(inp) {
                        *o = *o + (((i << left) | (i >> right)) & mask);
                    }
                }
            }
        }
    }
}

/// Representatives of the `a` domain under `a ↦ y a^p` (`y ∈ F_p*`), each
/// with the number of `F_p*`-classes in its orbit; zero comes first.
///
/// Both maps preserve weights: `y c(a, b, h) = c(ya, yb, yh)` and
/// `c(a^p, b^p, h)(x^p) = c(a, b, h)(x)`. The second one also moves
/// supports by `x ↦ x^p`, which the pair counts undo explicitly.
fn a_orbits(spec: &CodeSpec) -> Vec<(FieldElem, u64)> {
    let ctx = spec.ctx();
    let p = spec.p() as u64;
    let classes = ctx.n() as u64 / (p - 1);
    let step = if spec.a_domain().len() as u64 == spec.length() {
        1
    } else {
        ctx.n() as u64 / (spec.a_domain().len() as u64 - 1)
    };
    let mut seen = vec![false; classes as usize];
    let mut out = vec![(FieldElem::ZERO, 1)];
    for e in (0..classes).step_by(step as usize) {
        if seen[e as usize] {
            continue;
        }
        let mut size = 0;
        let mut f = e;
        while !seen[f as usize] {
            seen[f as usize] = true;
            size += 1;
            f = f * p % classes;
        }
        out.push((ctx.alpha_pow(e as i64), size));
    }
    out
}

/// `g(x) = Tr(a x^{p^l+1})` indexed by the integer encoding of `x`.
fn quadratic_traces_by_rep(spec: &CodeSpec, a: FieldElem) -> Vec<u16> {
    let ctx = spec.ctx();
    let by_point = spec.quadratic_traces(a);
    let mut out = vec![0u16; by_point.len()];
    for (pt, &v) in by_point.iter().enumerate() {
        out[ctx.elem_at_point(pt).rep() as usize] = v;
    }
    out
}

fn zero_count_table<W: Word>(pk: &Packing<W>, g: &[u16], scratch: &mut Vec<W>) -> Vec<W> {
    let mut data: Vec<W> = g.iter().map(|&v| pk.unit(v as usize)).collect();
    counting_transform(pk, g.len(), 1, &mut data, scratch);
    data
}

/// Codewords per orbit member: the `p - 1` scalar multiples of each class.
fn orbit_multiplier(p: u64, a: FieldElem, size: u64) -> u64 {
    if a.is_zero() {
        1
    } else {
        size * (p - 1)
    }
}

fn weight_counts_with<W: Word>(spec: &CodeSpec, pk: Packing<W>) -> BTreeMap<u64, u64> {
    let p = spec.p() as usize;
    let q = spec.length();
    a_orbits(spec)
        .par_iter()
        .fold(
            || (BTreeMap::new(), Vec::new()),
            |(mut counts, mut scratch): (BTreeMap<u64, u64>, Vec<W>), &(a, size)| {
                let mult = orbit_multiplier(p as u64, a, size);
                let table = zero_count_table(&pk, &quadratic_traces_by_rep(spec, a), &mut scratch);
                for &word in &table {
                    for h in 0..p {
                        *counts.entry(q - pk.lane(word, (p - h) % p)).or_insert(0) += mult;
                    }
                }
                (counts, scratch)
            },
        )
        .map(|(counts, _)| counts)
        .reduce(BTreeMap::new, |mut x, y| {
            for (w, c) in y {
                *x.entry(w).or_insert(0) += c;
            }
            x
        })
}

/// Weight multiplicities over every codeword id.
pub(crate) fn weight_counts(spec: &CodeSpec) -> BTreeMap<u64, u64> {
    let (p, q) = (spec.p() as usize, spec.length());
    if let Some(pk) = Packing::<u64>::new(p, q) {
        weight_counts_with(spec, pk)
    } else if let Some(pk) = Packing::<u128>::new(p, q) {
        weight_counts_with(spec, pk)
    } else {
        // Residue counters do not fit a word; fall back to zero counting.
        crate::code::weight_distribution(spec, crate::code::Method::Brute, u64::MAX)
            .expect("unbounded budget")
            .entries
    }
}

/// Pair coverage through one anchor point for one weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnchoredCoverage {
    pub weight: u64,
    /// Anchor as a point index.
    pub anchor: usize,
    /// Number of distinct supports of this weight.
    pub blocks: u64,
    /// Entry `x2` counts the blocks containing both the anchor and `x2`;
    /// the anchor's own entry counts the blocks containing the anchor.
    pub counts: Vec<u64>,
}

/// The anchors together with all their images under `x ↦ x^p`, as points.
pub fn frobenius_closure(spec: &CodeSpec, anchors: &[usize]) -> Vec<usize> {
    let ctx = spec.ctx();
    let mut out: Vec<usize> = Vec::new();
    for &x in anchors {
        let e = ctx.elem_at_point(x);
        for i in 0..spec.m() {
            let pt = ctx.point_of(ctx.frobenius(e, i));
            if !out.contains(&pt) {
                out.push(pt);
            }
        }
    }
    out
}

/// Counts, for every anchor and weight, how many distinct supports of that
/// weight contain the anchor and each other point.
///
/// Supports are counted as codewords divided by `p - 1`, which relies on
/// every support arising from exactly the `p - 1` non-zero multiples of one
/// codeword; a count not divisible by `p - 1` is reported as an error.
/// The work grows with the Frobenius closure of the anchors, so anchors are
/// best supplied as whole orbits (see [`frobenius_closure`]).
pub fn anchored_coverage(
    spec: &CodeSpec,
    weights: &[u64],
    anchors: &[usize],
) -> Result<Vec<AnchoredCoverage>> {
    let (p, q) = (spec.p() as usize, spec.length());
    if anchors.is_empty() || weights.is_empty() {
        return Ok(Vec::new());
    }
    if anchors.iter().any(|&x| x as u64 >= q) {
        return Err(Error::InvalidDesignParameters(
            "anchor outside the point set".into(),
        ));
    }
    if let Some(pk) = Packing::<u64>::new(p, q) {
        anchored_with(spec, pk, weights, anchors)
    } else if let Some(pk) = Packing::<u128>::new(p, q) {
        anchored_with(spec, pk, weights, anchors)
    } else {
        Err(Error::InvalidDesignParameters(format!(
            "anchored coverage needs {p} counters up to {q} in one 128-bit word"
        )))
    }
}

/// `<w, x>` for every `w`, with `w` and `x` as base-p digit vectors.
fn dot_products(spec: &CodeSpec, x: FieldElem) -> Vec<u8> {
    let ctx = spec.ctx();
    let p = spec.p();
    let xd = ctx.digits(x);
    (0..spec.length() as u32)
        .map(|w| {
            let wd = ctx.digits(FieldElem::from_rep_unchecked(w));
            (wd.iter().zip(&xd).map(|(a, b)| a * b).sum::<u32>() % p) as u8
        })
        .collect()
}

/// Lanes per joint transform.
const CHUNK: usize = 4;

struct Accumulator {
    /// `[closed anchor][weight][x2 point]`: codeword counts, each orbit
    /// weighted by its size.
    pairs: Vec<i128>,
    /// Codewords per weight.
    totals: Vec<u128>,
}

impl Accumulator {
    fn new(len: usize, nw: usize) -> Self {
        Accumulator {
            pairs: vec![0; len],
            totals: vec![0; nw],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.pairs.iter_mut().zip(other.pairs) {
            *a += b;
        }
        for (a, b) in self.totals.iter_mut().zip(other.totals) {
            *a += b;
        }
        self
    }
}

fn anchored_with<W: Word>(
    spec: &CodeSpec,
    pk: Packing<W>,
    weights: &[u64],
    anchors: &[usize],
) -> Result<Vec<AnchoredCoverage>> {
    let ctx = spec.ctx();
    let (p, q, m) = (spec.p() as usize, spec.length() as usize, spec.m());
    let closed = frobenius_closure(spec, anchors);
    let (nw, na) = (weights.len(), closed.len());
    let closed_reps: Vec<usize> = closed
        .iter()
        .map(|&x| ctx.elem_at_point(x).rep() as usize)
        .collect();
    let dots: Vec<Vec<u8>> = closed
        .iter()
        .map(|&x| dot_products(spec, ctx.elem_at_point(x)))
        .collect();
    // x2 - x1 as a rep, for every closed anchor and point x2.
    let diffs: Vec<Vec<u32>> = closed
        .iter()
        .map(|&x1| {
            let x1 = ctx.elem_at_point(x1);
            (0..q)
                .map(|pt| ctx.sub(ctx.elem_at_point(pt), x1).rep())
                .collect()
        })
        .collect();
    let point_of_rep: Vec<usize> = (0..q)
        .map(|r| ctx.point_of(FieldElem::from_rep_unchecked(r as u32)))
        .collect();

    // Lanes of the joint transform are independent; grouping them keeps
    // each transform cache-sized.
    let chunks = (na * nw).div_ceil(CHUNK);
    let joint_slot = |lane: usize, w: usize| (lane / CHUNK) * q * CHUNK + w * CHUNK + lane % CHUNK;

    let acc = a_orbits(spec)
        .par_iter()
        .fold(
            || (Accumulator::new(na * nw * q, nw), Vec::new()),
            |(mut acc, mut scratch): (Accumulator, Vec<W>), &(a, size)| {
                let mult = orbit_multiplier(p as u64, a, size) as i128;
                let g = quadratic_traces_by_rep(spec, a);
                let table = zero_count_table(&pk, &g, &mut scratch);
                // Weight index of codeword (w, h), at position w·p + h.
                let class: Vec<Option<u8>> = (0..q * p)
                    .map(|i| {
                        let (w, h) = (i / p, i % p);
                        let wt = q as u64 - pk.lane(table[w], (p - h) % p);
                        weights.iter().position(|&x| x == wt).map(|k| k as u8)
                    })
                    .collect();
                let mut tot = vec![0i128; nw];
                for &k in class.iter().flatten() {
                    tot[k as usize] += 1;
                }

                // Codewords of each weight vanishing at x.
                let mut vanish = vec![W::default(); q * nw];
                for (i, c) in class.iter().enumerate() {
                    if let Some(k) = c {
                        let slot = &mut vanish[(i / p) * nw + *k as usize];
                        *slot = *slot + pk.unit(i % p);
                    }
                }
                counting_transform(&pk, q, nw, &mut vanish, &mut scratch);
                let vanish_at = |x_rep: usize, k: usize| -> i128 {
                    pk.lane(vanish[x_rep * nw + k], (p - g[x_rep] as usize) % p) as i128
                };

                // Codewords of each weight vanishing at both x1 and x2: fixing
                // h by c(x1) = 0 leaves the condition <w, x2 - x1> = g(x1) - g(x2).
                let mut joint = vec![W::default(); chunks * q * CHUNK];
                for (j, &x1) in closed_reps.iter().enumerate() {
                    let g1 = g[x1] as usize;
                    for w in 0..q {
                        let h = (2 * p - g1 - dots[j][w] as usize) % p;
                        if let Some(k) = class[w * p + h] {
                            joint[joint_slot(j * nw + k as usize, w)] = pk.unit(0);
                        }
                    }
                }
                for chunk in joint.chunks_exact_mut(q * CHUNK) {
                    counting_transform(&pk, q, CHUNK, chunk, &mut scratch);
                }

                for (j, &x1) in closed_reps.iter().enumerate() {
                    for k in 0..nw {
                        let at_anchor = vanish_at(x1, k);
                        let row = &mut acc.pairs[(j * nw + k) * q..(j * nw + k + 1) * q];
                        for (x2_rep, &x2_pt) in point_of_rep.iter().enumerate() {
                            let y = diffs[j][x2_pt] as usize;
                            let r = (p + g[x1] as usize - g[x2_rep] as usize) % p;
                            let both = pk.lane(joint[joint_slot(j * nw + k, y)], r) as i128;
                            row[x2_pt] += mult * (tot[k] - at_anchor - vanish_at(x2_rep, k) + both);
                        }
                    }
                }
                for k in 0..nw {
                    acc.totals[k] += (mult * tot[k]) as u128;
                }
                (acc, scratch)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(|| Accumulator::new(na * nw * q, nw), Accumulator::merge);

    // Orbit members a^{p^i} see the representative's counts at
    // (x1^{p^-i}, x2^{p^-i}); averaging over all m powers absorbs orbit sizes.
    let unframe: Vec<Vec<usize>> = (0..m)
        .map(|i| {
            (0..q)
                .map(|pt| ctx.point_of(ctx.frobenius(ctx.elem_at_point(pt), m - i)))
                .collect()
        })
        .collect();
    let divisor = (p as i128 - 1) * m as i128;
    let mut out = Vec::with_capacity(anchors.len() * nw);
    for &anchor in anchors {
        for (k, &weight) in weights.iter().enumerate() {
            let total = acc.totals[k];
            if total % (p as u128 - 1) != 0 {
                return Err(Error::MultiplicityViolation {
                    weight,
                    count: total as usize,
                    expected: p - 1,
                });
            }
            let mut sums = vec![0i128; q];
            for frame in &unframe {
                let j = closed
                    .iter()
                    .position(|&z| z == frame[anchor])
                    .expect("closure");
                let row = &acc.pairs[(j * nw + k) * q..(j * nw + k + 1) * q];
                for (x2, s) in sums.iter_mut().enumerate() {
                    *s += row[frame[x2]];
                }
            }
            let counts = sums
                .into_iter()
                .map(|c| {
                    if c < 0 || c % divisor != 0 {
                        Err(Error::MultiplicityViolation {
                            weight,
                            count: c.unsigned_abs() as usize,
                            expected: p - 1,
                        })
                    } else {
                        Ok((c / divisor) as u64)
                    }
                })
                .collect::<Result<Vec<u64>>>()?;
            out.push(AnchoredCoverage {
                weight,
                anchor,
                blocks: (total / (p as u128 - 1)) as u64,
                counts,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{codeword_vector, weight_distribution, CodewordId, Method, DEFAULT_BUDGET};

    #[test]
    fn packing_rotates_residues() {
        let pk = Packing::<u64>::new(3, 100).unwrap();
        let v = pk.unit(0) + pk.unit(2) + pk.unit(2);
        let r = pk.rotate(v, 1);
        assert_eq!((pk.lane(r, 0), pk.lane(r, 1), pk.lane(r, 2)), (2, 1, 0));
        assert!(Packing::<u64>::new(7, 1 << 20).is_none());
        assert!(Packing::<u128>::new(7, 1 << 17).is_some());
    }

    #[test]
    fn zero_count_table_matches_direct_counts() {
        let spec = CodeSpec::new(3, 2, 6).unwrap();
        let ctx = spec.ctx();
        let pk = Packing::<u64>::new(3, spec.length()).unwrap();
        let a = ctx.alpha_pow(5);
        let g = quadratic_traces_by_rep(&spec, a);
        let table = zero_count_table(&pk, &g, &mut Vec::new());
        for w in [0usize, 1, 17, 400, 728] {
            let wd = ctx.digits(FieldElem::from_rep_unchecked(w as u32));
            let mut direct = [0u64; 3];
            for x in 0..729usize {
                let xd = ctx.digits(FieldElem::from_rep_unchecked(x as u32));
                let dot: u32 = wd.iter().zip(&xd).map(|(a, b)| a * b).sum();
                direct[((g[x] as u32 + dot) % 3) as usize] += 1;
            }
            for (s, &d) in direct.iter().enumerate() {
                assert_eq!(pk.lane(table[w], s), d);
            }
        }
    }

    #[test]
    fn transform_distribution_with_wide_words() {
        // p = 7, m = 4: residue counters need the 128-bit word.
        let spec = CodeSpec::new(7, 2, 4).unwrap();
        assert!(Packing::<u64>::new(7, spec.length()).is_none());
        assert_eq!(
            weight_distribution(&spec, Method::Transform, DEFAULT_BUDGET).unwrap(),
            weight_distribution(&spec, Method::Brute, DEFAULT_BUDGET).unwrap()
        );
    }

    #[test]
    fn anchored_coverage_matches_explicit_supports() {
        for (p, l, m) in [(3u64, 2u32, 4u32), (3, 1, 3), (5, 1, 2)] {
            let spec = CodeSpec::new(p, l, m).unwrap();
            let q = spec.length() as usize;
            let dist = weight_distribution(&spec, Method::Brute, DEFAULT_BUDGET).unwrap();
            let weights: Vec<u64> = dist.entries.keys().copied().filter(|&w| w > 0).collect();
            let anchors = [0usize, 1, q - 1, 5];
            let cov = anchored_coverage(&spec, &weights, &anchors).unwrap();
            let mut supports: Vec<std::collections::BTreeSet<Vec<bool>>> =
                vec![Default::default(); weights.len()];
            for &a in spec.a_domain() {
                for b in spec.ctx().elements() {
                    for h in 0..p as u32 {
                        let v = codeword_vector(&spec, &CodewordId::new(a, b, h)).unwrap();
                        let s: Vec<bool> = v.iter().map(|&c| c != 0).collect();
                        let w = s.iter().filter(|&&x| x).count() as u64;
                        if let Some(k) = weights.iter().position(|&x| x == w) {
                            supports[k].insert(s);
                        }
                    }
                }
            }
            for c in &cov {
                let k = weights.iter().position(|&x| x == c.weight).unwrap();
                assert_eq!(c.blocks as usize, supports[k].len());
                for x2 in 0..q {
                    let direct = supports[k].iter().filter(|s| s[c.anchor] && s[x2]).count() as u64;
                    assert_eq!(
                        c.counts[x2], direct,
                        "({p},{l},{m}) w={} x1={} x2={x2}",
                        c.weight, c.anchor
                    );
                }
            }
        }
    }
}
