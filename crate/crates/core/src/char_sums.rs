//! Gauss sums and the Weil sums
//!
//! ```text
//! S(a, b) = Σ_{x ∈ F_q} ζ_p^{Tr(a x^{p^l+1} + b x)}
//! ```
//!
//! evaluated exactly in Z[ζ_p], once by direct summation and once through
//! the linearized polynomial `f(x) = a^{p^l} x^{p^{2l}} + a x`.
//!
//! The closed form rests on completing the square: if `f(z) = -b^{p^l}`
//! then `S(a, b) = ζ^{-Tr(a z^{p^l+1})} · S(a, 0)`, and `S(a, 0)` depends
//! only on whether `m/d` is odd (where `d = gcd(m, l)`), on `η(a)`, and on
//! whether `f` has a non-trivial kernel.

use serde::Serialize;

use crate::arith::{gcd, legendre};
use crate::cycint::CycInt;
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::linalg::Echelon;

/// `p* = (-1)^((p-1)/2) p`.
pub fn pstar(p: u32) -> i64 {
    if p % 4 == 1 {
        p as i64
    } else {
        -(p as i64)
    }
}

/// The quadratic Gauss sum `Σ_{v ∈ F_p*} η'(v) ζ^v` over the prime field.
pub fn gauss_sum(p: u32) -> CycInt {
    let mut full = vec![0i64; p as usize];
    for v in 1..p {
        full[v as usize] = legendre(v as i64, p);
    }
    CycInt::from_full(p, full)
}

/// `gauss_sum(p)^m`, i.e. `(√p*)^m`, assembled from `G² = p*`.
pub fn gauss_sum_power(p: u32, m: u32) -> CycInt {
    let half = CycInt::from_int(p, pstar(p).pow(m / 2));
    if m.is_multiple_of(2) {
        half
    } else {
        &half * &gauss_sum(p)
    }
}

fn check_exponent(ctx: &FieldCtx, l: u32) -> Result<()> {
    if l == 0 || l >= ctx.m() {
        return Err(Error::BadExponent { l, m: ctx.m() });
    }
    Ok(())
}

/// `S(a, b)` by summing over every `x`: a histogram of trace values turned
/// into a cyclotomic integer.
pub fn weil_sum_bruteforce(ctx: &FieldCtx, l: u32, a: FieldElem, b: FieldElem) -> Result<CycInt> {
    check_exponent(ctx, l)?;
    let e = ctx.p().pow(l) as u128 + 1;
    let mut hist = vec![0u64; ctx.p() as usize];
    for x in ctx.elements() {
        let v = ctx.add(ctx.mul(a, ctx.pow(x, e)), ctx.mul(b, x));
        hist[ctx.trace(v) as usize] += 1;
    }
    Ok(CycInt::from_histogram(ctx.p(), &hist))
}

/// Whether `a^((q-1)/(p^d+1)) = (-1)^(m/2d)`, the condition under which
/// `f` fails to be a permutation. Only meaningful when `m/d` is even.
pub fn kernel_condition(ctx: &FieldCtx, l: u32, a: FieldElem) -> Result<bool> {
    check_exponent(ctx, l)?;
    let (m, d) = (ctx.m(), gcd(ctx.m() as u64, l as u64) as u32);
    if (m / d) % 2 == 1 {
        return Err(Error::OddQuotient { m, l });
    }
    let la = ctx.log(a).ok_or(Error::ZeroCoefficient)? as u64;
    let n = ctx.n() as u64;
    let e = n / ((ctx.p() as u64).pow(d) + 1);
    let lhs = la * e % n;
    // -1 = α^(n/2).
    let target = if (m / (2 * d)) % 2 == 0 { 0 } else { n / 2 };
    Ok(lhs == target)
}

/// Outcome of solving `f(x) = -b^{p^l}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SolveResult {
    pub solvable: bool,
    pub representative: Option<FieldElem>,
    /// 0 when unsolvable, otherwise the size of the kernel of `f`.
    pub solution_count: u64,
}

/// `f(x) = a^{p^l} x^{p^{2l}} + a x` as an F_p-linear map, factored once so
/// that many right-hand sides can be solved in O(m²) each.
#[derive(Clone, Debug)]
pub struct LinearizedMap<'a> {
    ctx: &'a FieldCtx,
    l: u32,
    a: FieldElem,
    a_frob: FieldElem,
    echelon: Echelon,
}

impl<'a> LinearizedMap<'a> {
    pub fn new(ctx: &'a FieldCtx, l: u32, a: FieldElem) -> Result<Self> {
        check_exponent(ctx, l)?;
        if a.is_zero() {
            return Err(Error::ZeroCoefficient);
        }
        let a_frob = ctx.frobenius(a, l);
        let m = ctx.m() as usize;
        let mut rows = vec![vec![0u32; m]; m];
        for j in 0..m {
            let basis = ctx.elem(ctx.p().pow(j as u32) as u64)?;
            let image = ctx.digits(Self::apply(ctx, l, a, a_frob, basis));
            for (i, &digit) in image.iter().enumerate() {
                rows[i][j] = digit;
            }
        }
        Ok(LinearizedMap {
            ctx,
            l,
            a,
            a_frob,
            echelon: Echelon::new(ctx.p(), rows),
        })
    }

    fn apply(ctx: &FieldCtx, l: u32, a: FieldElem, a_frob: FieldElem, x: FieldElem) -> FieldElem {
        let x2 = ctx.frobenius(x, (2 * l) % ctx.m());
        ctx.add(ctx.mul(a_frob, x2), ctx.mul(a, x))
    }

    /// Evaluates `f` with field arithmetic (not through the matrix).
    pub fn eval(&self, x: FieldElem) -> FieldElem {
        Self::apply(self.ctx, self.l, self.a, self.a_frob, x)
    }

    pub fn kernel_size(&self) -> u64 {
        (self.ctx.p() as u64).pow(self.ctx.m() - self.echelon.rank() as u32)
    }

    pub fn is_permutation(&self) -> bool {
        self.echelon.rank() == self.ctx.m() as usize
    }

    /// Solves `f(x) = -b^{p^l}`.
    pub fn solve(&self, b: FieldElem) -> SolveResult {
        let rhs = self.ctx.neg(self.ctx.frobenius(b, self.l));
        match self.echelon.solve(&self.ctx.digits(rhs)) {
            Some(z) => SolveResult {
                solvable: true,
                representative: Some(self.ctx.from_digits(&z)),
                solution_count: self.kernel_size(),
            },
            None => SolveResult {
                solvable: false,
                representative: None,
                solution_count: 0,
            },
        }
    }

    /// `Tr(a z^{p^l+1})` for a solution `z`: the phase exponent in `S(a, b)`.
    pub fn phase(&self, z: FieldElem) -> u32 {
        let e = self.ctx.p().pow(self.l) as u128 + 1;
        self.ctx.trace(self.ctx.mul(self.a, self.ctx.pow(z, e)))
    }
}

pub fn solve_linearized(ctx: &FieldCtx, l: u32, a: FieldElem, b: FieldElem) -> Result<SolveResult> {
    Ok(LinearizedMap::new(ctx, l, a)?.solve(b))
}

/// Which closed form governs `S(a, ·)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WeilCase {
    /// `m/d` odd: `f` permutes F_q and `S(a, 0) = (-1)^(m-1) (√p*)^m η(a)`.
    OddQuotient,
    /// `m/d` even, kernel condition false: `S(a, 0) = (-1)^(m/2d) p^(m/2)`.
    EvenPermutation,
    /// `m/d` even, kernel condition true: `S(a, 0) = -(-1)^(m/2d) p^(m/2+d)`
    /// and `S(a, b) = 0` whenever `f(x) = -b^{p^l}` has no solution.
    EvenKernel,
}

pub fn weil_case(ctx: &FieldCtx, l: u32, a: FieldElem) -> Result<WeilCase> {
    check_exponent(ctx, l)?;
    if a.is_zero() {
        return Err(Error::ZeroCoefficient);
    }
    let d = gcd(ctx.m() as u64, l as u64) as u32;
    if (ctx.m() / d) % 2 == 1 {
        Ok(WeilCase::OddQuotient)
    } else if kernel_condition(ctx, l, a)? {
        Ok(WeilCase::EvenKernel)
    } else {
        Ok(WeilCase::EvenPermutation)
    }
}

/// `S(a, b)` for `a ≠ 0` from the closed forms.
pub fn weil_sum_closed(ctx: &FieldCtx, l: u32, a: FieldElem, b: FieldElem) -> Result<CycInt> {
    let case = weil_case(ctx, l, a)?;
    let map = LinearizedMap::new(ctx, l, a)?;
    let (p, m) = (ctx.p(), ctx.m());
    let d = gcd(m as u64, l as u64) as u32;
    let sign = if (m / d).is_multiple_of(4) { 1 } else { -1 };
    let amplitude = match case {
        WeilCase::OddQuotient => {
            let sign = if m % 2 == 1 { 1 } else { -1 };
            gauss_sum_power(p, m).scale(sign * ctx.quadratic_character(a) as i64)
        }
        WeilCase::EvenPermutation => CycInt::from_int(p, sign * (p as i64).pow(m / 2)),
        WeilCase::EvenKernel => CycInt::from_int(p, -sign * (p as i64).pow(m / 2 + d)),
    };
    let solution = map.solve(b);
    match solution.representative {
        None => Ok(CycInt::zero(p)),
        Some(z) => Ok(amplitude.shift(-(map.phase(z) as i64))),
    }
}

/// Number of `a ∈ F_q*` satisfying the kernel condition, `(q-1)/(p^d+1)`.
pub fn kernel_condition_count(p: u32, m: u32, d: u32) -> u64 {
    ((p as u64).pow(m) - 1) / ((p as u64).pow(d) + 1)
}

/// `(-1)^((p-1)k/4)` for the even exponents `k` that occur in the weight
/// formulas; `(p-1)k/4` is an integer whenever `k` is even.
pub(crate) fn quarter_sign(p: u32, k: u32) -> i64 {
    let e = (p as u64 - 1) * k as u64;
    debug_assert_eq!(e % 4, 0);
    if (e / 4).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64, m: u32) -> FieldCtx {
        FieldCtx::new(p, m, None).unwrap()
    }

    #[test]
    fn gauss_sum_p3() {
        let g = gauss_sum(3);
        // ζ - ζ² = 1 + 2ζ in the reduced basis.
        assert_eq!(g.coeffs(), &[1, 2]);
        assert_eq!((&g * &g).as_integer(), Some(-3));
    }

    #[test]
    fn gauss_sum_squares_to_pstar() {
        for p in [3u32, 5, 7, 11, 13] {
            let g = gauss_sum(p);
            assert_eq!((&g * &g).as_integer(), Some(pstar(p)), "p = {p}");
        }
        assert_eq!(pstar(5), 5);
    }

    #[test]
    fn gauss_sum_power_matches_repeated_product() {
        for p in [3u32, 5, 7] {
            for m in 1..=7 {
                assert_eq!(gauss_sum_power(p, m), gauss_sum(p).pow(m));
            }
        }
    }

    #[test]
    fn trivial_sums() {
        let f = gf(3, 4);
        assert_eq!(
            weil_sum_bruteforce(&f, 2, FieldElem::ZERO, FieldElem::ZERO)
                .unwrap()
                .as_integer(),
            Some(81)
        );
        for b in f.elements().skip(1) {
            assert!(weil_sum_bruteforce(&f, 2, FieldElem::ZERO, b)
                .unwrap()
                .is_zero());
        }
        assert_eq!(
            weil_sum_bruteforce(&f, 0, FieldElem::ONE, FieldElem::ZERO).unwrap_err(),
            Error::BadExponent { l: 0, m: 4 }
        );
    }

    #[test]
    fn s_a_zero_in_gf81() {
        let f = gf(3, 4);
        for a in f.elements().skip(1) {
            let s = weil_sum_bruteforce(&f, 2, a, FieldElem::ZERO).unwrap();
            let expected = if kernel_condition(&f, 2, a).unwrap() {
                81
            } else {
                -9
            };
            assert_eq!(s.as_integer(), Some(expected));
        }
    }

    #[test]
    fn kernel_condition_matches_exhaustive_kernel() {
        let f = gf(3, 4);
        let mut satisfied = 0;
        for a in f.elements().skip(1) {
            let map = LinearizedMap::new(&f, 2, a).unwrap();
            let kernel = f.elements().filter(|&x| map.eval(x).is_zero()).count() as u64;
            let cond = kernel_condition(&f, 2, a).unwrap();
            assert_eq!(cond, kernel > 1);
            assert_eq!(map.kernel_size(), kernel);
            if cond {
                satisfied += 1;
                assert_eq!(kernel, 81);
            }
        }
        assert_eq!(satisfied, 8);
        assert_eq!(kernel_condition_count(3, 4, 2), 8);
        assert_eq!(
            kernel_condition(&f, 2, FieldElem::ZERO).unwrap_err(),
            Error::ZeroCoefficient
        );
        assert_eq!(
            kernel_condition(&gf(3, 3), 1, FieldElem::ONE).unwrap_err(),
            Error::OddQuotient { m: 3, l: 1 }
        );
    }

    #[test]
    fn kernel_condition_false_on_half_subfield() {
        for (p, m) in [(3u64, 4u32), (3, 6), (5, 4)] {
            let f = gf(p, m);
            for a in f.subfield(m / 2).into_iter().skip(1) {
                assert!(!kernel_condition(&f, m / 2, a).unwrap());
            }
        }
    }

    #[test]
    fn kernel_condition_count_gf729() {
        let f = gf(3, 6);
        // l = 3: d = 3, m/d = 2; l = 1: d = 1, m/d = 6.
        for l in [1u32, 3] {
            let d = gcd(6, l as u64) as u32;
            let count = f
                .elements()
                .skip(1)
                .filter(|&a| kernel_condition(&f, l, a).unwrap())
                .count() as u64;
            assert_eq!(count, kernel_condition_count(3, 6, d));
        }
    }

    #[test]
    fn solve_linearized_cases() {
        let f = gf(3, 4);
        for a in f.elements().skip(1) {
            let zero = solve_linearized(&f, 2, a, FieldElem::ZERO).unwrap();
            assert!(zero.solvable);
            assert_eq!(zero.representative, Some(FieldElem::ZERO));
            let map = LinearizedMap::new(&f, 2, a).unwrap();
            let cond = kernel_condition(&f, 2, a).unwrap();
            for b in f.elements() {
                let rhs = f.neg(f.frobenius(b, 2));
                let exhaustive = f.elements().filter(|&x| map.eval(x) == rhs).count() as u64;
                let r = map.solve(b);
                assert_eq!(r.solution_count, exhaustive);
                assert_eq!(r.solvable, exhaustive > 0);
                if let Some(z) = r.representative {
                    assert_eq!(map.eval(z), rhs);
                }
                if !cond {
                    assert_eq!(exhaustive, 1);
                } else {
                    assert!(exhaustive == 0 || exhaustive == 81);
                }
            }
        }
        assert_eq!(
            solve_linearized(&f, 2, FieldElem::ZERO, FieldElem::ONE).unwrap_err(),
            Error::ZeroCoefficient
        );
    }

    fn assert_closed_matches_bruteforce(p: u64, m: u32, l: u32) {
        let f = gf(p, m);
        for a in f.elements().skip(1) {
            for b in f.elements() {
                assert_eq!(
                    weil_sum_closed(&f, l, a, b).unwrap(),
                    weil_sum_bruteforce(&f, l, a, b).unwrap(),
                    "p={p} m={m} l={l} a={a:?} b={b:?}"
                );
            }
        }
    }

    #[test]
    fn closed_form_matches_bruteforce_small_fields() {
        assert_closed_matches_bruteforce(3, 2, 1);
        assert_closed_matches_bruteforce(3, 3, 1);
        assert_closed_matches_bruteforce(3, 3, 2);
        assert_closed_matches_bruteforce(3, 4, 1);
        assert_closed_matches_bruteforce(3, 4, 2);
        assert_closed_matches_bruteforce(3, 4, 3);
        assert_closed_matches_bruteforce(5, 2, 1);
        assert_closed_matches_bruteforce(5, 3, 1);
        assert_closed_matches_bruteforce(7, 2, 1);
        assert_closed_matches_bruteforce(7, 3, 2);
    }

    #[test]
    fn s_a_zero_regimes_for_even_m() {
        // The three S(a, 0) regimes reachable with p = 3 and m in {2, 4, 6}.
        for (m, l) in [(2u32, 1u32), (4, 1), (4, 2), (6, 1), (6, 2), (6, 3)] {
            let f = gf(3, m);
            let d = gcd(m as u64, l as u64) as u32;
            for a in f.elements().skip(1) {
                let s = weil_sum_bruteforce(&f, l, a, FieldElem::ZERO).unwrap();
                let expected = if (m / d) % 2 == 1 {
                    // Even m: the opposite sign to (√p*)^m η(a).
                    gauss_sum_power(3, m).scale(-f.quadratic_character(a) as i64)
                } else {
                    let sign = if (m / d).is_multiple_of(4) { 1 } else { -1 };
                    if kernel_condition(&f, l, a).unwrap() {
                        CycInt::from_int(3, -sign * 3i64.pow(m / 2 + d))
                    } else {
                        CycInt::from_int(3, sign * 3i64.pow(m / 2))
                    }
                };
                assert_eq!(s, expected, "m={m} l={l}");
            }
        }
    }

    #[test]
    fn even_m_odd_quotient_sign_for_both_residue_classes_of_p() {
        // p = 5 (p* > 0) and p = 7 (p* < 0), m = 6, l = 2: S(a, 0) = -(p*)^3 η(a).
        for p in [5u64, 7] {
            let f = gf(p, 6);
            for a in f.elements().skip(1).step_by(997).take(6) {
                let s = weil_sum_bruteforce(&f, 2, a, FieldElem::ZERO).unwrap();
                let expected = -pstar(p as u32).pow(3) * f.quadratic_character(a) as i64;
                assert_eq!(s.as_integer(), Some(expected), "p={p}");
                let b = f.alpha_pow(5);
                assert_eq!(
                    weil_sum_closed(&f, 2, a, b).unwrap(),
                    weil_sum_bruteforce(&f, 2, a, b).unwrap()
                );
            }
        }
    }

    #[test]
    fn galois_twist_permutes_scaled_sums() {
        let f = gf(5, 3);
        for a in f.elements().skip(1).step_by(7) {
            for b in f.elements().step_by(5) {
                let s = weil_sum_bruteforce(&f, 1, a, b).unwrap();
                for y in 1..5u32 {
                    let scaled = weil_sum_bruteforce(&f, 1, f.scale(y, a), f.scale(y, b)).unwrap();
                    assert_eq!(scaled, s.galois(y as i64));
                }
            }
        }
    }

    #[test]
    fn absolute_values_follow_case_structure() {
        let f = gf(3, 4);
        for l in 1..4u32 {
            let d = gcd(4, l as u64) as u32;
            for a in f.elements().skip(1) {
                for b in f.elements() {
                    let n = weil_sum_bruteforce(&f, l, a, b).unwrap().norm_sq();
                    let n = n.as_integer().expect("|S|^2 is rational");
                    assert!(
                        n == 81 || n == 3i64.pow(4 + 2 * d) || n == 0,
                        "l={l} |S|^2={n}"
                    );
                }
            }
        }
    }
}
