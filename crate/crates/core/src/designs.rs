//! Supports of fixed-weight codewords as block sets, and checks that they
//! form 2-designs with the expected parameters.

use std::cmp::Ordering;
use std::io::{self, Write};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{binomial, ipow};
use crate::code::{analytic_distribution_table, CodeSpec, CodewordId, Regime};
use crate::error::{Error, Result};
use crate::transform::{anchored_coverage, frobenius_closure};

/// Largest `w` with `w − ⌊(w + p − 2)/(p − 1)⌋ < min_weight`. Not capped at
/// the code length, so a result above it means every weight qualifies.
pub fn theorem2_bound(min_weight: u64, p: u64) -> u64 {
    assert!(min_weight >= 1 && p >= 3);
    let lhs = |w: u64| w - (w + p - 2) / (p - 1);
    // lhs is non-decreasing and grows by at least one every p − 1 steps.
    let mut w = 1;
    while lhs(w + 1) < min_weight {
        w += 1;
    }
    w
}

/// Fixed-width bitset over the points `0..v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointSet {
    words: Box<[u64]>,
}

impl PointSet {
    pub fn empty(v: usize) -> Self {
        PointSet {
            words: vec![0; v.div_ceil(64)].into_boxed_slice(),
        }
    }

    pub fn from_points(v: usize, points: impl IntoIterator<Item = usize>) -> Self {
        let mut s = PointSet::empty(v);
        for x in points {
            s.insert(x);
        }
        s
    }

    pub fn insert(&mut self, x: usize) {
        self.words[x / 64] |= 1 << (x % 64);
    }

    pub fn contains(&self, x: usize) -> bool {
        self.words
            .get(x / 64)
            .is_some_and(|w| w >> (x % 64) & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Points in ascending order.
    pub fn points(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    i * 64 + b
                })
            })
        })
    }
}

/// Lexicographic order of the ascending point lists.
impl Ord for PointSet {
    fn cmp(&self, other: &Self) -> Ordering {
        for (i, (&a, &b)) in self.words.iter().zip(other.words.iter()).enumerate() {
            let diff = a ^ b;
            if diff == 0 {
                continue;
            }
            let low = diff & diff.wrapping_neg();
            let (mine, theirs) = if a & low != 0 {
                (self, other)
            } else {
                (other, self)
            };
            // `mine` holds the first differing point; `theirs` is smaller only
            // if it has run out of points.
            let above = |s: &PointSet| {
                s.words[i] & !(low | (low - 1)) != 0 || s.words[i + 1..].iter().any(|&w| w != 0)
            };
            let mine_first = above(theirs);
            return match (std::ptr::eq(mine, self), mine_first) {
                (true, true) | (false, false) => Ordering::Less,
                _ => Ordering::Greater,
            };
        }
        self.words.len().cmp(&other.words.len())
    }
}

impl PartialOrd for PointSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSet {
    pub v: usize,
    pub k: usize,
    /// Distinct blocks in lexicographic order.
    pub blocks: Vec<PointSet>,
    /// Whether each block was seen to arise from exactly `p − 1` codewords
    /// that are scalar multiples of one another.
    pub multiplicity_checked: bool,
}

impl BlockSet {
    /// Validates block sizes and removes nothing: repeated blocks are an error.
    pub fn new(v: usize, k: usize, mut blocks: Vec<PointSet>) -> Result<Self> {
        if blocks
            .iter()
            .any(|b| b.len() != k || b.points().any(|x| x >= v))
        {
            return Err(Error::InvalidDesignParameters(format!(
                "every block must have {k} points below {v}"
            )));
        }
        blocks.sort_unstable();
        if blocks.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDesignParameters("repeated block".into()));
        }
        Ok(BlockSet {
            v,
            k,
            blocks,
            multiplicity_checked: false,
        })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Line `v k b`, then one line of ascending points per block.
    pub fn write_to(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "{} {} {}", self.v, self.k, self.blocks.len())?;
        for block in &self.blocks {
            let line: Vec<String> = block.points().map(|x| x.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Per point, a bitset over the blocks containing it.
    fn columns(&self) -> Vec<Vec<u64>> {
        let width = self.blocks.len().div_ceil(64);
        let mut cols = vec![vec![0u64; width]; self.v];
        for (j, block) in self.blocks.iter().enumerate() {
            for x in block.points() {
                cols[x][j / 64] |= 1 << (j % 64);
            }
        }
        cols
    }
}

/// Per-weight outcome of grouping codewords by support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportCount {
    pub weight: u64,
    pub codewords: u64,
    pub supports: u64,
}

/// Collects the distinct supports of all codewords of `weight`, checking
/// that each arises from exactly `p − 1` codewords, all scalar multiples.
pub fn extract_blocks(spec: &CodeSpec, weight: u64, budget: u64) -> Result<BlockSet> {
    let needed = spec.pair_count();
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    if weight == 0 || weight > spec.length() {
        return Err(Error::WeightAbsent(weight));
    }
    let p = spec.p();
    let v = spec.length() as usize;
    let ctx = spec.ctx();
    let mut found: Vec<(PointSet, CodewordId)> = spec
        .a_domain()
        .par_iter()
        .flat_map_iter(|&a| {
            let g = spec.quadratic_traces(a);
            let mut out = Vec::new();
            for b in ctx.elements() {
                let hist = spec.trace_histogram(&g, b);
                let hs: Vec<u32> = (0..p)
                    .filter(|&h| spec.length() - hist[((p - h) % p) as usize] == weight)
                    .collect();
                if hs.is_empty() {
                    continue;
                }
                let lin = spec.linear_traces(b);
                for h in hs {
                    let support = PointSet::from_points(
                        v,
                        (0..v).filter(|&x| !(g[x] as u32 + lin[x] as u32 + h).is_multiple_of(p)),
                    );
                    out.push((support, CodewordId::new(a, b, h)));
                }
            }
            out
        })
        .collect();
    if found.is_empty() {
        return Err(Error::WeightAbsent(weight));
    }
    found.par_sort_unstable_by(|x, y| x.0.cmp(&y.0));
    let expected = p as usize - 1;
    let mut blocks = Vec::with_capacity(found.len() / expected);
    for group in found.chunk_by(|x, y| x.0 == y.0) {
        let first = group[0].1;
        let multiples = group.iter().all(|(_, id)| {
            (1..p).any(|y| {
                ctx.scale(y, first.a) == id.a
                    && ctx.scale(y, first.b) == id.b
                    && (y * first.h) % p == id.h
            })
        });
        if group.len() != expected || !multiples {
            return Err(Error::MultiplicityViolation {
                weight,
                count: group.len(),
                expected,
            });
        }
        blocks.push(group[0].0.clone());
    }
    Ok(BlockSet {
        v,
        k: weight as usize,
        blocks,
        multiplicity_checked: true,
    })
}

/// Runs the support grouping of [`extract_blocks`] for every non-zero
/// weight in `weights`.
pub fn check_support_multiplicity(
    spec: &CodeSpec,
    weights: &[u64],
    budget: u64,
) -> Result<Vec<SupportCount>> {
    weights
        .iter()
        .filter(|&&w| w > 0)
        .map(|&w| {
            let bs = extract_blocks(spec, w, budget)?;
            Ok(SupportCount {
                weight: w,
                codewords: bs.len() as u64 * (spec.p() as u64 - 1),
                supports: bs.len() as u64,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DesignParams {
    pub t: u32,
    pub v: u64,
    pub k: u64,
    pub lambda: u64,
    pub b: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum VerifyMode {
    /// Every unordered pair of points.
    Full,
    /// `samples` uniformly drawn pairs of distinct points.
    Sampled { samples: u64, seed: u64 },
}

/// Work limit in `b · C(k, 2)` below which `auto` picks full verification.
pub const FULL_PAIR_LIMIT: u128 = 100_000_000;

impl VerifyMode {
    pub fn auto(bs: &BlockSet, samples: u64, seed: u64) -> VerifyMode {
        if bs.len() as u128 * binomial(bs.k as u64, 2) <= FULL_PAIR_LIMIT {
            VerifyMode::Full
        } else {
            VerifyMode::Sampled { samples, seed }
        }
    }
}

/// Checks that every examined pair of points lies in the same number of
/// blocks, and returns the design parameters.
pub fn verify_2design(bs: &BlockSet, mode: VerifyMode) -> Result<DesignParams> {
    if bs.is_empty() {
        return Err(Error::EmptyBlockSet);
    }
    if bs.v < 2 {
        return Err(Error::InvalidDesignParameters(
            "fewer than two points".into(),
        ));
    }
    let cols = bs.columns();
    let cover = |x: usize, y: usize| -> u64 {
        cols[x]
            .iter()
            .zip(&cols[y])
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    };
    let reference = (0usize, 1usize);
    let lambda = cover(reference.0, reference.1);
    let witness = |pair: (usize, usize), count: u64| Error::NotADesign {
        first_pair: reference,
        first_count: lambda,
        second_pair: pair,
        second_count: count,
    };
    match mode {
        VerifyMode::Full => {
            let bad = (0..bs.v).into_par_iter().find_map_first(|x| {
                (x + 1..bs.v).find_map(|y| {
                    let c = cover(x, y);
                    (c != lambda).then_some(((x, y), c))
                })
            });
            if let Some((pair, c)) = bad {
                return Err(witness(pair, c));
            }
        }
        VerifyMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::SampleBudgetZero);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pairs: Vec<(usize, usize)> = (0..samples)
                .map(|_| {
                    let x = rng.gen_range(0..bs.v);
                    let mut y = rng.gen_range(0..bs.v - 1);
                    if y >= x {
                        y += 1;
                    }
                    (x.min(y), x.max(y))
                })
                .collect();
            let bad = pairs.par_iter().find_map_first(|&(x, y)| {
                let c = cover(x, y);
                (c != lambda).then_some(((x, y), c))
            });
            if let Some((pair, c)) = bad {
                return Err(witness(pair, c));
            }
        }
    }
    let params = DesignParams {
        t: 2,
        v: bs.v as u64,
        k: bs.k as u64,
        lambda,
        b: bs.len() as u64,
    };
    if lambda_from_counts(params.v, params.k, params.b)? != lambda {
        return Err(Error::InvalidDesignParameters(format!(
            "pair coverage {lambda} contradicts double counting"
        )));
    }
    Ok(params)
}

/// `λ = b k (k − 1) / (v (v − 1))`, which must be an integer.
pub fn lambda_from_counts(v: u64, k: u64, b: u64) -> Result<u64> {
    if !(v > k && k >= 2) {
        return Err(Error::InvalidDesignParameters(format!(
            "need v > k >= 2, got v = {v}, k = {k}"
        )));
    }
    let num = b as u128 * k as u128 * (k as u128 - 1);
    let den = v as u128 * (v as u128 - 1);
    if !num.is_multiple_of(den) {
        let g = gcd_u128(num, den);
        return Err(Error::NonIntegralLambda {
            numerator: num / g,
            denominator: den / g,
        });
    }
    Ok((num / den) as u64)
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `λ_i = λ C(v − i, t − i) / C(k − i, t − i)` for `0 ≤ i ≤ t`.
pub fn reduce_design_level(t: u64, v: u64, k: u64, lambda: u64, i: u64) -> Result<Ratio<u128>> {
    if !(i <= t && t <= k && k <= v) {
        return Err(Error::BadLevel { t, v, k, i });
    }
    Ok(Ratio::new(
        lambda as u128 * binomial(v - i, t - i),
        binomial(k - i, t - i),
    ))
}

/// Number of blocks through each point.
pub fn point_incidence(bs: &BlockSet) -> Vec<u64> {
    let mut counts = vec![0u64; bs.v];
    for block in &bs.blocks {
        for x in block.points() {
            counts[x] += 1;
        }
    }
    counts
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem5Pair {
    pub weight: u64,
    pub lambda: u64,
    pub blocks: u64,
}

/// `(weight, λ)` as printed for the spec's regime, before any check.
pub fn printed_lambdas(spec: &CodeSpec) -> Result<Vec<(u64, Ratio<i128>)>> {
    let (p, m, d) = (spec.p() as i128, spec.m(), spec.d());
    let pw = |e: u32| ipow(p, e);
    let r = |num: i128, den: i128| Ratio::new(num, den);
    let q = pw(m);
    let top = q - pw(m - 1);
    let base = pw(m - 1) * (p - 1);
    let h = m / 2;
    let rows: Vec<(i128, Ratio<i128>)> = match spec.regime() {
        Regime::UnitGcd => return Err(Error::UnsupportedRegime),
        Regime::OddOdd => {
            let e = (m - 1) / 2;
            vec![
                (top, r((top - 1) * (pw(m - 1) + 1), 1)),
                (
                    top + pw(e),
                    r(pw(e) * (pw(e + 1) - pw(e) + 1) * (top + pw(e) - 1), 2),
                ),
                (
                    top - pw(e),
                    r(pw(e) * (pw(e + 1) - pw(e) - 1) * (top - pw(e) - 1), 2),
                ),
            ]
        }
        Regime::EvenOdd => vec![
            (top, r(top - 1, 1)),
            (
                base + pw(h - 1),
                r(
                    pw(h - 1) * (pw(h + 1) - pw(h) + 1) * (top + pw(h - 1) - 1),
                    2,
                ),
            ),
            (
                base - pw(h - 1),
                r(
                    pw(h - 1) * (pw(h + 1) - pw(h) - 1) * (top - pw(h - 1) - 1),
                    2,
                ),
            ),
            (
                base + pw(h - 1) * (p - 1),
                r(pw(h - 1) * (pw(h) + 1) * (top + pw(h) - pw(h - 1) - 1), 2),
            ),
            (
                base - pw(h - 1) * (p - 1),
                r(pw(h - 1) * (pw(h) - 1) * (top - pw(h) + pw(h - 1) - 1), 2),
            ),
        ],
        Regime::Half => vec![
            (top, r(top - 1, 1)),
            (
                top - pw(h - 1),
                r(
                    pw(h - 1) * (pw(h + 1) - pw(h) - 1) * (top - pw(h - 1) - 1),
                    pw(h) + 1,
                ),
            ),
            (
                top + pw(h) - pw(h - 1),
                r(pw(h - 1) * (top + pw(h) - pw(h - 1) - 1), 1),
            ),
        ],
        Regime::EvenQuotient => {
            let s: i128 = if (m / (2 * d)) % 2 == 0 { 1 } else { -1 };
            let pd = pw(d) + 1;
            vec![
                (top, r((top - 1) * (pw(m - d) - pw(m - 2 * d) + 1), 1)),
                (
                    base + s * pw(h - 1),
                    r(
                        pw(h + d - 1) * (pw(h + 1) - pw(h) + s) * (top + s * pw(h - 1) - 1),
                        pd,
                    ),
                ),
                (
                    base - s * pw(h - 1) * (p - 1),
                    r(
                        pw(h + d - 1) * (pw(h) - s) * (top - s * pw(h) + s * pw(h - 1) - 1),
                        pd,
                    ),
                ),
                (
                    base + s * pw(h + d - 1) * (p - 1),
                    r(
                        pw(h - d - 1)
                            * (pw(h - d) + s)
                            * (top + s * pw(h + d) - s * pw(h + d - 1) - 1),
                        pd,
                    ),
                ),
                (
                    base - s * pw(h + d - 1),
                    r(
                        pw(h - d - 1)
                            * (pw(h - d + 1) - pw(h - d) - s)
                            * (top - s * pw(h + d - 1) - 1),
                        pd,
                    ),
                ),
            ]
        }
    };
    Ok(rows
        .into_iter()
        .map(|(w, l)| (u64::try_from(w).expect("positive weight"), l))
        .collect())
}

/// The design parameters for every weight other than `0` and `p^m`, with
/// `λ` derived from the table multiplicities and checked against the
/// printed closed forms.
pub fn theorem5_parameters(spec: &CodeSpec) -> Result<Vec<Theorem5Pair>> {
    let table = analytic_distribution_table(spec)?;
    let printed = printed_lambdas(spec)?;
    let q = spec.length();
    let p = spec.p() as u64;
    let mut out = Vec::new();
    for (&weight, &a) in &table.entries {
        if weight == 0 || weight == q {
            continue;
        }
        if a % (p - 1) != 0 {
            return Err(Error::MultiplicityViolation {
                weight,
                count: a as usize,
                expected: p as usize - 1,
            });
        }
        let blocks = a / (p - 1);
        let lambda = lambda_from_counts(q, weight, blocks)?;
        let claim = printed.iter().find(|(w, _)| *w == weight).map(|x| x.1);
        if claim != Some(Ratio::from_integer(lambda as i128)) {
            return Err(Error::FormulaMismatch {
                weight,
                printed: claim.map_or_else(|| "absent".into(), |c| c.to_string()),
                derived: lambda.to_string(),
            });
        }
        out.push(Theorem5Pair {
            weight,
            lambda,
            blocks,
        });
    }
    Ok(out)
}

/// Pair coverage through a set of anchor points, without materialising
/// blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnchoredCheck {
    pub weight: u64,
    pub blocks: u64,
    pub lambda: u64,
    pub incidence: u64,
    pub anchors: Vec<usize>,
    /// Distinct unordered pairs examined.
    pub pairs: u64,
}

/// Anchors made of whole Frobenius orbits of seeded random non-zero points,
/// enough for every pair through them to number at least `min_pairs`.
pub fn anchor_orbits(spec: &CodeSpec, min_pairs: u64, seed: u64) -> Vec<usize> {
    let q = spec.length() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut anchors: Vec<usize> = Vec::new();
    while (anchored_pairs(anchors.len(), q) < min_pairs) && anchors.len() < q {
        let x = rng.gen_range(1..q);
        if anchors.contains(&x) {
            continue;
        }
        anchors = frobenius_closure(spec, &[anchors.as_slice(), &[x]].concat());
    }
    anchors
}

fn anchored_pairs(anchors: usize, q: usize) -> u64 {
    (anchors * (q - 1)) as u64 - binomial(anchors as u64, 2) as u64
}

/// Checks that every pair through an anchor lies in the same number of
/// supports of each weight, and that every anchor lies in the same number
/// of supports.
pub fn anchored_design_check(
    spec: &CodeSpec,
    weights: &[u64],
    anchors: &[usize],
) -> Result<Vec<AnchoredCheck>> {
    let cov = anchored_coverage(spec, weights, anchors)?;
    let q = spec.length() as usize;
    weights
        .iter()
        .map(|&w| {
            let rows: Vec<_> = cov.iter().filter(|c| c.weight == w).collect();
            let first = rows.first().ok_or(Error::EmptyBlockSet)?;
            if first.blocks == 0 {
                return Err(Error::WeightAbsent(w));
            }
            let other = usize::from(first.anchor == 0);
            let lambda = first.counts[other];
            let incidence = first.counts[first.anchor];
            for row in &rows {
                if row.counts[row.anchor] != incidence {
                    return Err(Error::InvalidDesignParameters(format!(
                        "points {} and {} lie in {incidence} and {} blocks of weight {w}",
                        first.anchor, row.anchor, row.counts[row.anchor]
                    )));
                }
                if let Some(x) = (0..q).find(|&x| x != row.anchor && row.counts[x] != lambda) {
                    return Err(Error::NotADesign {
                        first_pair: (first.anchor.min(other), first.anchor.max(other)),
                        first_count: lambda,
                        second_pair: (row.anchor.min(x), row.anchor.max(x)),
                        second_count: row.counts[x],
                    });
                }
            }
            Ok(AnchoredCheck {
                weight: w,
                blocks: first.blocks,
                lambda,
                incidence,
                anchors: anchors.to_vec(),
                pairs: anchored_pairs(anchors.len(), q),
            })
        })
        .collect()
}
