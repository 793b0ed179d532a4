//! The trace code
//!
//! ```text
//! c(a, b, h) = (Tr(a x^{p^l+1} + b x) + h)_{x ∈ F_q},   a, b ∈ F_q, h ∈ F_p
//! ```
//!
//! (with `a` confined to F_{p^{m/2}} when `l = m/2`), its codeword weights
//! and its weight distribution.
//!
//! Coordinates follow the field's point order: position 0 is the zero
//! element and position `1 + j` is `α^j`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::{gcd, ipow, legendre};
use crate::char_sums::{kernel_condition, quarter_sign, LinearizedMap};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::linalg::Echelon;

/// Enumeration budget in `(a, b)` pairs; every pair covers all `p` values of `h`.
pub const DEFAULT_BUDGET: u64 = 387_420_489; // 3^18

/// The parity class of `(m, d)` that selects the closed-form weight table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    /// `d = 1` (and `l ≠ m/2`): brute force only.
    UnitGcd,
    /// `m` odd, hence `m/d` odd.
    OddOdd,
    /// `m` even, `m/d` odd.
    EvenOdd,
    /// `m/d` even and at least 4.
    EvenQuotient,
    /// `l = m/2`, with `a` restricted to the half-degree subfield.
    Half,
}

impl Regime {
    pub fn classify(m: u32, l: u32) -> Regime {
        let d = gcd(m as u64, l as u64) as u32;
        if 2 * l == m {
            Regime::Half
        } else if d == 1 {
            Regime::UnitGcd
        } else if (m / d).is_multiple_of(2) {
            Regime::EvenQuotient
        } else if m % 2 == 1 {
            Regime::OddOdd
        } else {
            Regime::EvenOdd
        }
    }

    pub fn is_analytic(self) -> bool {
        self != Regime::UnitGcd
    }
}

/// One codeword index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CodewordId {
    pub a: FieldElem,
    pub b: FieldElem,
    pub h: u32,
}

impl CodewordId {
    pub fn new(a: FieldElem, b: FieldElem, h: u32) -> Self {
        CodewordId { a, b, h }
    }
}

#[derive(Clone, Debug)]
pub struct CodeSpec {
    ctx: Arc<FieldCtx>,
    l: u32,
    d: u32,
    regime: Regime,
    a_domain: Vec<FieldElem>,
    /// `log(α^j)^{p^l+1} = j(p^l + 1) mod n`, indexed by `j`.
    log_u: Vec<u32>,
    /// `Tr(α^k)` for `k` in `[0, 2n)`, so sums of two logs need no reduction.
    trace_by_log: Vec<u16>,
}

pub fn make_spec(ctx: Arc<FieldCtx>, l: u32) -> Result<CodeSpec> {
    let m = ctx.m();
    if l == 0 || l >= m {
        return Err(Error::BadExponent { l, m });
    }
    let n = ctx.n() as u64;
    let d = gcd(m as u64, l as u64) as u32;
    let regime = Regime::classify(m, l);
    let a_domain = if regime == Regime::Half {
        ctx.subfield(m / 2)
    } else {
        ctx.elements().collect()
    };
    let e = (crate::arith::mod_pow(ctx.p() as u64, l as u64, n) + 1) % n;
    let log_u = (0..n).map(|j| (j * e % n) as u32).collect();
    let trace_by_log = (0..2 * n)
        .map(|k| ctx.trace(ctx.alpha_pow(k as i64)) as u16)
        .collect();
    Ok(CodeSpec {
        ctx,
        l,
        d,
        regime,
        a_domain,
        log_u,
        trace_by_log,
    })
}

impl CodeSpec {
    /// Builds the field with its default modulus and then the code.
    pub fn new(p: u64, l: u32, m: u32) -> Result<Self> {
        make_spec(Arc::new(FieldCtx::new(p, m, None)?), l)
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn shared_ctx(&self) -> Arc<FieldCtx> {
        Arc::clone(&self.ctx)
    }

    pub fn p(&self) -> u32 {
        self.ctx.p()
    }

    pub fn m(&self) -> u32 {
        self.ctx.m()
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Admissible values of `a`, in coordinate order.
    pub fn a_domain(&self) -> &[FieldElem] {
        &self.a_domain
    }

    pub fn length(&self) -> u64 {
        self.ctx.q() as u64
    }

    pub fn dimension(&self) -> u32 {
        if self.regime == Regime::Half {
            3 * self.m() / 2 + 1
        } else {
            2 * self.m() + 1
        }
    }

    pub fn pair_count(&self) -> u64 {
        self.a_domain.len() as u64 * self.length()
    }

    pub fn id_count(&self) -> u64 {
        self.pair_count() * self.p() as u64
    }

    pub fn in_a_domain(&self, a: FieldElem) -> bool {
        if self.regime != Regime::Half {
            return true;
        }
        let step = self.ctx.n() / (self.p().pow(self.m() / 2) - 1);
        self.ctx.log(a).is_none_or(|e| e % step == 0)
    }

    pub fn check_id(&self, id: &CodewordId) -> Result<()> {
        let q = self.length();
        for x in [id.a, id.b] {
            if x.rep() as u64 >= q {
                return Err(Error::ElementOutOfRange {
                    rep: x.rep() as u64,
                    q,
                });
            }
        }
        if id.h >= self.p() {
            return Err(Error::ElementOutOfRange {
                rep: id.h as u64,
                q: self.p() as u64,
            });
        }
        if !self.in_a_domain(id.a) {
            return Err(Error::DomainViolation {
                subfield_degree: self.m() / 2,
            });
        }
        Ok(())
    }

    /// `Tr(a x^{p^l+1})` at every point.
    pub fn quadratic_traces(&self, a: FieldElem) -> Vec<u16> {
        let mut g = vec![0u16; self.length() as usize];
        if let Some(s) = self.ctx.log(a) {
            let s = s as usize;
            for (slot, &lu) in g[1..].iter_mut().zip(&self.log_u) {
                *slot = self.trace_by_log[s + lu as usize];
            }
        }
        g
    }

    /// `Tr(b x)` at every point.
    pub fn linear_traces(&self, b: FieldElem) -> Vec<u16> {
        let mut out = vec![0u16; self.length() as usize];
        if let Some(t) = self.ctx.log(b) {
            let t = t as usize;
            let n = out.len() - 1;
            out[1..].copy_from_slice(&self.trace_by_log[t..t + n]);
        }
        out
    }

    /// Histogram over `F_p` of `g(x) + Tr(b x)`, where `g` comes from
    /// [`CodeSpec::quadratic_traces`].
    pub fn trace_histogram(&self, g: &[u16], b: FieldElem) -> Vec<u64> {
        let p = self.p() as usize;
        let mut wide = vec![0u64; 2 * p - 1];
        match self.ctx.log(b) {
            None => {
                for &v in g {
                    wide[v as usize] += 1;
                }
            }
            Some(t) => {
                wide[g[0] as usize] += 1;
                let lin = &self.trace_by_log[t as usize..t as usize + g.len() - 1];
                for (&v, &w) in g[1..].iter().zip(lin) {
                    wide[(v + w) as usize] += 1;
                }
            }
        }
        let (low, high) = wide.split_at(p);
        let mut hist = low.to_vec();
        for (i, &c) in high.iter().enumerate() {
            hist[i] += c;
        }
        hist
    }

    fn weights_from_histogram(&self, hist: &[u64]) -> impl Iterator<Item = u64> + '_ {
        let p = self.p() as usize;
        let q = self.length();
        let hist = hist.to_vec();
        (0..p).map(move |h| q - hist[(p - h) % p])
    }
}

/// The codeword itself, one symbol in `[0, p)` per point.
pub fn codeword_vector(spec: &CodeSpec, id: &CodewordId) -> Result<Vec<u32>> {
    spec.check_id(id)?;
    let p = spec.p();
    let g = spec.quadratic_traces(id.a);
    let ctx = spec.ctx();
    Ok(g.iter()
        .enumerate()
        .map(|(pt, &v)| {
            let x = ctx.elem_at_point(pt);
            (v as u32 + ctx.trace(ctx.mul(id.b, x)) + id.h) % p
        })
        .collect())
}

/// Weight by counting the zeros of the codeword.
pub fn weight_bruteforce(spec: &CodeSpec, id: &CodewordId) -> Result<u64> {
    spec.check_id(id)?;
    let hist = spec.trace_histogram(&spec.quadratic_traces(id.a), id.b);
    let p = spec.p() as usize;
    Ok(spec.length() - hist[(p - id.h as usize) % p])
}

/// Per-`a` data for the closed-form zero count `T(a, b, h)`.
struct AnalyticRow<'a> {
    spec: &'a CodeSpec,
    a: FieldElem,
    map: Option<LinearizedMap<'a>>,
    eta: i128,
    /// `S(ay, by) = amplitude · ζ^{-y θ}` for `a ≠ 0` outside the odd-odd
    /// regime, where `θ = Tr(a z^{p^l+1})` for a solution `z`.
    amplitude: i128,
}

impl<'a> AnalyticRow<'a> {
    fn new(spec: &'a CodeSpec, a: FieldElem) -> Result<Self> {
        if !spec.regime.is_analytic() {
            return Err(Error::UnsupportedRegime);
        }
        if !spec.in_a_domain(a) {
            return Err(Error::DomainViolation {
                subfield_degree: spec.m() / 2,
            });
        }
        let ctx = spec.ctx();
        let (p, m, d) = (spec.p() as i128, spec.m(), spec.d);
        let eta = ctx.quadratic_character(a) as i128;
        let map = if a.is_zero() {
            None
        } else {
            Some(LinearizedMap::new(ctx, spec.l, a)?)
        };
        let eps = if (m / d) % 4 == 0 { 1 } else { -1 };
        let amplitude = match spec.regime {
            Regime::UnitGcd | Regime::OddOdd => 0,
            Regime::EvenOdd => -(quarter_sign(p as u32, m) as i128) * ipow(p, m / 2) * eta,
            Regime::Half => -ipow(p, m / 2),
            Regime::EvenQuotient if !a.is_zero() && kernel_condition(ctx, spec.l, a)? => {
                -eps * ipow(p, m / 2 + d)
            }
            Regime::EvenQuotient => eps * ipow(p, m / 2),
        };
        Ok(AnalyticRow {
            spec,
            a,
            map,
            eta,
            amplitude,
        })
    }

    /// Zero counts `T(a, b, h)` for `h = 0, …, p-1`.
    fn zero_counts(&self, b: FieldElem) -> Vec<u64> {
        let spec = self.spec;
        let (p, m) = (spec.p() as i128, spec.m());
        let q = ipow(p, m);
        let base = ipow(p, m - 1);
        let Some(map) = &self.map else {
            return (0..p)
                .map(|h| match (b.is_zero(), h) {
                    (true, 0) => q as u64,
                    (true, _) => 0,
                    (false, _) => base as u64,
                })
                .collect();
        };
        debug_assert!(!self.a.is_zero());
        let Some(z) = map.solve(b).representative else {
            return vec![base as u64; p as usize];
        };
        let theta = map.phase(z) as i128;
        (0..p)
            .map(|h| {
                let c = (h - theta).rem_euclid(p);
                let t = if spec.regime == Regime::OddOdd {
                    // p^{m-1} + p^{(m-1)/2} (-1)^{(p-1)(m+1)/4} η(a) η'(h - θ)
                    let sign = quarter_sign(p as u32, m + 1) as i128;
                    base + ipow(p, (m - 1) / 2)
                        * sign
                        * self.eta
                        * legendre(c as i64, p as u32) as i128
                } else {
                    // p^{m-1} + (1/p) amplitude Σ_y ζ^{y(h-θ)}
                    let char_sum = if c == 0 { p - 1 } else { -1 };
                    let scaled = self.amplitude * char_sum;
                    assert_eq!(scaled % p, 0, "zero count is not an integer");
                    base + scaled / p
                };
                u64::try_from(t).expect("negative zero count")
            })
            .collect()
    }
}

/// Weight from the closed-form zero count.
pub fn weight_analytic(spec: &CodeSpec, id: &CodewordId) -> Result<u64> {
    spec.check_id(id)?;
    let row = AnalyticRow::new(spec, id.a)?;
    Ok(spec.length() - row.zero_counts(id.b)[id.h as usize])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Zero counting for every `(a, b)` pair.
    Brute,
    /// The closed-form zero count for every `(a, b)` pair.
    Analytic,
    /// Zero counting for all `b` at once per `a` with a p-ary transform.
    Transform,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightDistribution {
    pub entries: BTreeMap<u64, u64>,
    pub length: u64,
    pub dimension: u32,
}

impl WeightDistribution {
    pub fn total(&self) -> u128 {
        self.entries.values().map(|&c| c as u128).sum()
    }

    pub fn multiplicity(&self, weight: u64) -> u64 {
        self.entries.get(&weight).copied().unwrap_or(0)
    }

    /// Smallest non-zero weight.
    pub fn min_distance(&self) -> Option<u64> {
        self.entries.keys().copied().find(|&w| w > 0)
    }

    /// `Σ A_i = p^dim` and `A_0 = 1`.
    pub fn is_consistent(&self, p: u32) -> bool {
        self.multiplicity(0) == 1 && self.total() == (p as u128).pow(self.dimension)
    }

    /// `Σ i A_i = p^(dim-1) (p-1) · length`: each coordinate is non-zero
    /// in a fraction `(p-1)/p` of all codewords.
    pub fn first_moment_holds(&self, p: u32) -> bool {
        let lhs: u128 = self
            .entries
            .iter()
            .map(|(&w, &c)| w as u128 * c as u128)
            .sum();
        let rhs = (p as u128).pow(self.dimension - 1) * (p as u128 - 1) * self.length as u128;
        lhs == rhs
    }
}

impl Serialize for WeightDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            weight: u64,
            multiplicity: u64,
        }
        let entries: Vec<Entry> = self
            .entries
            .iter()
            .map(|(&weight, &multiplicity)| Entry {
                weight,
                multiplicity,
            })
            .collect();
        let mut s = serializer.serialize_struct("WeightDistribution", 3)?;
        s.serialize_field("length", &self.length)?;
        s.serialize_field("dimension", &self.dimension)?;
        s.serialize_field("entries", &entries)?;
        s.end()
    }
}

fn merge_counts(mut left: BTreeMap<u64, u64>, right: BTreeMap<u64, u64>) -> BTreeMap<u64, u64> {
    for (w, c) in right {
        *left.entry(w).or_insert(0) += c;
    }
    left
}

/// Exact distribution over every codeword id. Fails if the number of
/// `(a, b)` pairs exceeds `budget`.
pub fn weight_distribution(
    spec: &CodeSpec,
    method: Method,
    budget: u64,
) -> Result<WeightDistribution> {
    let needed = spec.pair_count();
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let entries = match method {
        Method::Brute => spec
            .a_domain
            .par_iter()
            .map(|&a| {
                let g = spec.quadratic_traces(a);
                let mut counts = BTreeMap::new();
                for b in spec.ctx.elements() {
                    let hist = spec.trace_histogram(&g, b);
                    for w in spec.weights_from_histogram(&hist) {
                        *counts.entry(w).or_insert(0) += 1;
                    }
                }
                counts
            })
            .reduce(BTreeMap::new, merge_counts),
        Method::Analytic => {
            if !spec.regime.is_analytic() {
                return Err(Error::UnsupportedRegime);
            }
            spec.a_domain
                .par_iter()
                .map(|&a| -> Result<BTreeMap<u64, u64>> {
                    let row = AnalyticRow::new(spec, a)?;
                    let mut counts = BTreeMap::new();
                    for b in spec.ctx.elements() {
                        for t in row.zero_counts(b) {
                            *counts.entry(spec.length() - t).or_insert(0) += 1;
                        }
                    }
                    Ok(counts)
                })
                .try_reduce(BTreeMap::new, |x, y| Ok(merge_counts(x, y)))?
        }
        Method::Transform => crate::transform::weight_counts(spec),
    };
    let dist = WeightDistribution {
        entries,
        length: spec.length(),
        dimension: spec.dimension(),
    };
    debug_assert_eq!(dist.total(), spec.id_count() as u128);
    Ok(dist)
}

/// The closed-form table for the spec's regime, without enumeration.
pub fn analytic_distribution_table(spec: &CodeSpec) -> Result<WeightDistribution> {
    let (p, m, d) = (spec.p() as i128, spec.m(), spec.d);
    let q = ipow(p, m);
    let n = q - 1;
    let base = ipow(p, m - 1) * (p - 1);
    let exact = |num: i128, den: i128| -> i128 {
        assert_eq!(num % den, 0, "table multiplicity is not an integer");
        num / den
    };
    let rows: Vec<(i128, i128)> = match spec.regime {
        Regime::UnitGcd => return Err(Error::UnsupportedRegime),
        Regime::OddOdd => {
            let h = ipow(p, (m - 1) / 2);
            let side = exact(q * (p - 1) * n, 2);
            vec![
                (base, p * (ipow(p, m - 1) + 1) * n),
                (base + h, side),
                (base - h, side),
            ]
        }
        Regime::EvenOdd => {
            let h = ipow(p, m / 2 - 1);
            let inner = exact(q * (p - 1) * n, 2);
            let outer = exact(q * n, 2);
            vec![
                (base, p * n),
                (base + h, inner),
                (base - h, inner),
                (base + h * (p - 1), outer),
                (base - h * (p - 1), outer),
            ]
        }
        Regime::Half => {
            let h = ipow(p, m / 2 - 1);
            let r = ipow(p, m / 2) - 1;
            vec![
                (base, p * n),
                (base - h, q * r * (p - 1)),
                (base + h * (p - 1), q * r),
            ]
        }
        Regime::EvenQuotient => {
            let s = if (m / d) % 4 == 0 { 1 } else { -1 };
            let h = ipow(p, m / 2 - 1);
            let big = ipow(p, m / 2 + d - 1);
            let pd1 = ipow(p, d) + 1;
            vec![
                (base, p * (ipow(p, m - d) - ipow(p, m - 2 * d) + 1) * n),
                (base - s * h * (p - 1), exact(ipow(p, m + d) * n, pd1)),
                (base + s * h, exact(ipow(p, m + d) * (p - 1) * n, pd1)),
                (base + s * big * (p - 1), exact(ipow(p, m - 2 * d) * n, pd1)),
                (base - s * big, exact(ipow(p, m - 2 * d) * (p - 1) * n, pd1)),
            ]
        }
    };
    let mut entries = BTreeMap::from([(0u64, 1u64), (q as u64, p as u64 - 1)]);
    for (w, c) in rows {
        *entries
            .entry(u64::try_from(w).expect("negative weight"))
            .or_insert(0) += u64::try_from(c).expect("negative multiplicity");
    }
    Ok(WeightDistribution {
        entries,
        length: q as u64,
        dimension: spec.dimension(),
    })
}

/// Uniformly drawn codeword ids, reproducible from `seed`.
pub fn sample_ids(spec: &CodeSpec, count: usize, seed: u64) -> Vec<CodewordId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = spec.length();
    (0..count)
        .map(|_| {
            let a = spec.a_domain[rng.gen_range(0..spec.a_domain.len())];
            let b = spec.ctx.elem(rng.gen_range(0..q)).expect("in range");
            CodewordId::new(a, b, rng.gen_range(0..spec.p()))
        })
        .collect()
}

/// Decides membership in the code and recovers the id of a codeword,
/// by linear algebra over the generator rows `c(β_i, 0, 0)`, `c(0, α^j, 0)`
/// and the all-ones word.
#[derive(Clone, Debug)]
pub struct Membership<'a> {
    spec: &'a CodeSpec,
    a_basis: Vec<FieldElem>,
    b_basis: Vec<FieldElem>,
    echelon: Echelon,
}

impl<'a> Membership<'a> {
    pub fn new(spec: &'a CodeSpec) -> Self {
        let ctx = spec.ctx();
        let m = spec.m();
        let b_basis: Vec<FieldElem> = (0..m as i64).map(|j| ctx.alpha_pow(j)).collect();
        let a_basis = if spec.regime == Regime::Half {
            let step = (ctx.n() / (spec.p().pow(m / 2) - 1)) as i64;
            (0..m as i64 / 2).map(|j| ctx.alpha_pow(j * step)).collect()
        } else {
            b_basis.clone()
        };
        let mut rows = Vec::new();
        for &a in &a_basis {
            rows.push(
                codeword_vector(spec, &CodewordId::new(a, FieldElem::ZERO, 0))
                    .expect("basis in domain"),
            );
        }
        for &b in &b_basis {
            rows.push(
                codeword_vector(spec, &CodewordId::new(FieldElem::ZERO, b, 0)).expect("valid id"),
            );
        }
        rows.push(vec![1; spec.length() as usize]);
        let echelon = Echelon::new(spec.p(), rows);
        Membership {
            spec,
            a_basis,
            b_basis,
            echelon,
        }
    }

    /// Rank of the generator rows, which is the code dimension.
    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }

    /// The id of `word`, or `None` if it is not a codeword.
    pub fn identify(&self, word: &[u32]) -> Option<CodewordId> {
        if word.len() as u64 != self.spec.length() {
            return None;
        }
        let coeffs = self.echelon.decompose(word)?;
        let ctx = self.spec.ctx();
        let combine = |basis: &[FieldElem], ys: &[u32]| {
            basis.iter().zip(ys).fold(FieldElem::ZERO, |acc, (&e, &y)| {
                ctx.add(acc, ctx.scale(y, e))
            })
        };
        let k = self.a_basis.len();
        let a = combine(&self.a_basis, &coeffs[..k]);
        let b = combine(&self.b_basis, &coeffs[k..k + self.b_basis.len()]);
        Some(CodewordId::new(a, b, coeffs[coeffs.len() - 1]))
    }
}
