//! Cyclotomic cosets, defining sets, the p-adic order and the affine group
//! acting on code coordinates.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::gcd;
use crate::code::{codeword_vector, sample_ids, CodeSpec, CodewordId, Membership};
use crate::error::{Error, Result};
use crate::field::FieldElem;

/// `{j p^i mod n}`.
pub fn cyclotomic_coset(n: u64, p: u64, j: u64) -> Result<BTreeSet<u64>> {
    if n == 0 || j >= n || (n > 1 && gcd(p % n, n) != 1) {
        return Err(Error::BadCosetModulus { n, p, j });
    }
    let mut coset = BTreeSet::new();
    let mut x = j;
    while coset.insert(x) {
        x = ((x as u128 * p as u128) % n as u128) as u64;
    }
    Ok(coset)
}

/// Digit-wise `r ≤ s` on the base-`p` expansions of length `m`.
pub fn p_adic_leq(r: u64, s: u64, p: u64, m: u32) -> bool {
    let (mut r, mut s) = (r, s);
    for _ in 0..m {
        if r % p > s % p {
            return false;
        }
        r /= p;
        s /= p;
    }
    r <= s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DefiningSet {
    pub n: u64,
    pub residues: BTreeSet<u64>,
    /// Whether the extended position `0` belongs to the set.
    pub includes_zero: bool,
}

impl DefiningSet {
    /// Arbitrary residues, not necessarily a union of cosets.
    pub fn from_residues(
        n: u64,
        residues: impl IntoIterator<Item = u64>,
        includes_zero: bool,
    ) -> Self {
        DefiningSet {
            n,
            residues: residues.into_iter().map(|r| r % n).collect(),
            includes_zero,
        }
    }

    pub fn contains(&self, r: u64) -> bool {
        self.residues.contains(&r) || (r == 0 && self.includes_zero)
    }

    /// True when the residues are closed under multiplication by `p`.
    pub fn is_coset_union(&self, p: u64) -> bool {
        self.residues.iter().all(|&r| {
            self.residues
                .contains(&((r as u128 * p as u128 % self.n as u128) as u64))
        })
    }
}

/// `C_1 ∪ C_{p^l+1} ∪ {0}` modulo `n = q − 1`.
pub fn build_defining_set(spec: &CodeSpec) -> DefiningSet {
    let p = spec.p() as u64;
    let n = spec.length() - 1;
    let e = (p.pow(spec.l()) + 1) % n;
    let mut residues = cyclotomic_coset(n, p, 1 % n).expect("p is a unit mod n");
    residues.extend(cyclotomic_coset(n, p, e).expect("p is a unit mod n"));
    DefiningSet {
        n,
        residues,
        includes_zero: true,
    }
}

/// Every `r ⪯ s` for `s` in the set (and `s = 0` when included) must itself
/// lie in the set. The all-`(p−1)` expansion `n` is outside the universe.
pub fn check_affine_invariant(ds: &DefiningSet, p: u64, m: u32) -> bool {
    let members = ds
        .residues
        .iter()
        .copied()
        .chain(ds.includes_zero.then_some(0));
    for s in members {
        if !downset(s, p, m).into_iter().all(|r| ds.contains(r)) {
            return false;
        }
    }
    true
}

fn downset(s: u64, p: u64, m: u32) -> Vec<u64> {
    let mut out = vec![0u64];
    let mut place = 1u64;
    let mut rest = s;
    for _ in 0..m {
        let digit = rest % p;
        let len = out.len();
        for k in 1..=digit {
            for i in 0..len {
                out.push(out[i] + k * place);
            }
        }
        rest /= p;
        place *= p;
    }
    out
}

/// The word `x ↦ c(s x + t)`.
pub fn apply_affine(spec: &CodeSpec, word: &[u32], s: FieldElem, t: FieldElem) -> Vec<u32> {
    let ctx = spec.ctx();
    (0..word.len())
        .map(|pt| {
            let x = ctx.elem_at_point(pt);
            word[ctx.point_of(ctx.add(ctx.mul(s, x), t))]
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineFailure {
    pub s: u32,
    pub t: u32,
    pub codeword: CodewordId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineReport {
    pub trials: u64,
    pub passed: u64,
    pub failed: u64,
    /// Images with one symbol altered, which must fall outside the code.
    pub corrupted_rejected: u64,
    pub first_failure: Option<AffineFailure>,
}

impl AffineReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0 && self.corrupted_rejected == self.trials
    }
}

/// Draws `trials` pairs of a map `x ↦ s x + t` (`s ≠ 0`) and a codeword,
/// and checks that the permuted word is again a codeword.
pub fn verify_affine_action(spec: &CodeSpec, trials: u64, seed: u64) -> Result<AffineReport> {
    if trials == 0 {
        return Err(Error::SampleBudgetZero);
    }
    let membership = Membership::new(spec);
    let ids = sample_ids(spec, trials as usize, seed);
    let q = spec.length();
    let p = spec.p();
    let outcomes: Vec<(bool, bool, AffineFailure)> = ids
        .into_par_iter()
        .enumerate()
        .map(|(i, id)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let ctx = spec.ctx();
            let s = ctx.elem(rng.gen_range(1..q)).expect("in range");
            let t = ctx.elem(rng.gen_range(0..q)).expect("in range");
            let word = codeword_vector(spec, &id).expect("sampled id is valid");
            let mut image = apply_affine(spec, &word, s, t);
            let ok = membership.identify(&image).is_some();
            let pos = rng.gen_range(0..image.len());
            image[pos] = (image[pos] + rng.gen_range(1..p)) % p;
            let rejected = membership.identify(&image).is_none();
            let failure = AffineFailure {
                s: s.rep(),
                t: t.rep(),
                codeword: id,
            };
            (ok, rejected, failure)
        })
        .collect();
    let passed = outcomes.iter().filter(|o| o.0).count() as u64;
    Ok(AffineReport {
        trials,
        passed,
        failed: trials - passed,
        corrupted_rejected: outcomes.iter().filter(|o| o.1).count() as u64,
        first_failure: outcomes.into_iter().find(|o| !o.0).map(|o| o.2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosets() {
        assert_eq!(cyclotomic_coset(80, 3, 0).unwrap(), BTreeSet::from([0]));
        assert_eq!(
            cyclotomic_coset(80, 3, 1).unwrap(),
            BTreeSet::from([1, 3, 9, 27])
        );
        assert_eq!(
            cyclotomic_coset(80, 3, 10).unwrap(),
            BTreeSet::from([10, 30])
        );
        assert!(matches!(
            cyclotomic_coset(9, 3, 1),
            Err(Error::BadCosetModulus { .. })
        ));
        assert!(cyclotomic_coset(80, 3, 80).is_err());
    }

    #[test]
    fn p_adic_order() {
        for s in 0..81 {
            assert!(p_adic_leq(0, s, 3, 4));
        }
        assert!(p_adic_leq(9, 10, 3, 4));
        assert!(!p_adic_leq(1, 3, 3, 4));
        for r in 0..81 {
            assert!(p_adic_leq(r, r, 3, 4));
            for s in 0..81 {
                if r != s && p_adic_leq(r, s, 3, 4) {
                    assert!(!p_adic_leq(s, r, 3, 4));
                }
                for t in (0..81).step_by(7) {
                    if p_adic_leq(r, s, 3, 4) && p_adic_leq(s, t, 3, 4) {
                        assert!(p_adic_leq(r, t, 3, 4));
                    }
                }
            }
        }
    }

    #[test]
    fn downset_matches_order() {
        for s in 0..81 {
            let mut d = downset(s, 3, 4);
            d.sort_unstable();
            let direct: Vec<u64> = (0..81).filter(|&r| p_adic_leq(r, s, 3, 4)).collect();
            assert_eq!(d, direct);
        }
    }

    #[test]
    fn defining_sets() {
        let ds = build_defining_set(&CodeSpec::new(3, 2, 4).unwrap());
        assert_eq!(ds.residues, BTreeSet::from([1, 3, 9, 10, 27, 30]));
        assert!(ds.includes_zero && ds.is_coset_union(3));
        let ds = build_defining_set(&CodeSpec::new(3, 3, 6).unwrap());
        let mut expected = cyclotomic_coset(728, 3, 1).unwrap();
        expected.extend(cyclotomic_coset(728, 3, 28).unwrap());
        assert_eq!(ds.residues, expected);
    }

    #[test]
    fn affine_invariance_of_defining_sets() {
        for (p, l, m) in [
            (3, 2, 4),
            (3, 3, 6),
            (3, 2, 6),
            (3, 1, 4),
            (5, 1, 2),
            (3, 2, 8),
        ] {
            let spec = CodeSpec::new(p, l, m).unwrap();
            assert!(
                check_affine_invariant(&build_defining_set(&spec), p, m),
                "{p} {l} {m}"
            );
        }
        assert!(!check_affine_invariant(
            &DefiningSet::from_residues(8, [2], false),
            3,
            2
        ));
        assert!(!check_affine_invariant(
            &DefiningSet::from_residues(8, [2], true),
            3,
            2
        ));
        let closed = DefiningSet::from_residues(8, [1, 2], true);
        assert!(check_affine_invariant(&closed, 3, 2));
    }

    #[test]
    fn downset_closure_always_passes() {
        for seedset in [vec![5u64], vec![7, 2], vec![4, 6, 3]] {
            let mut all = BTreeSet::new();
            for s in seedset {
                all.extend(downset(s, 3, 2));
            }
            let ds = DefiningSet::from_residues(8, all, true);
            assert!(check_affine_invariant(&ds, 3, 2));
        }
    }

    #[test]
    fn identity_fixes_codewords() {
        let spec = CodeSpec::new(3, 2, 4).unwrap();
        for id in sample_ids(&spec, 20, 3) {
            let word = codeword_vector(&spec, &id).unwrap();
            assert_eq!(
                apply_affine(&spec, &word, FieldElem::ONE, FieldElem::ZERO),
                word
            );
        }
    }

    #[test]
    fn affine_action_preserves_code() {
        for (p, l, m) in [(3, 2, 4), (3, 1, 3), (5, 1, 2), (3, 2, 6)] {
            let spec = CodeSpec::new(p, l, m).unwrap();
            let report = verify_affine_action(&spec, 300, 7).unwrap();
            assert!(report.all_passed(), "{p} {l} {m}: {report:?}");
            assert_eq!(report, verify_affine_action(&spec, 300, 7).unwrap());
        }
        let spec = CodeSpec::new(3, 2, 4).unwrap();
        assert_eq!(
            verify_affine_action(&spec, 0, 1).unwrap_err(),
            Error::SampleBudgetZero
        );
    }
}
