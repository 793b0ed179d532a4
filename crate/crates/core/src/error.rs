use thiserror::Error;

/// Everything that can go wrong while building fields and codes or while
/// checking the combinatorial claims made about them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic 2 is not supported; p must be an odd prime")]
    EvenCharacteristic,
    #[error("extension degree must be at least 1")]
    InvalidDegree,
    #[error("field of size {p}^{m} exceeds the table limit of 2^26 elements")]
    FieldTooLarge { p: u64, m: u32 },
    #[error(
        "modulus must be a degree-{expected} polynomial with coefficients in [0, p): {reason}"
    )]
    BadModulus { expected: u32, reason: String },
    #[error("modulus is not a primitive polynomial over F_p")]
    NotPrimitivePolynomial,
    #[error("field element {rep} is out of range for a field of size {q}")]
    ElementOutOfRange { rep: u64, q: u64 },

    #[error("cyclotomic integers over different primes ({left} vs {right})")]
    MixedModulus { left: u32, right: u32 },
    #[error("kernel condition needs m/gcd(m, l) even (m = {m}, l = {l})")]
    OddQuotient { m: u32, l: u32 },
    #[error("the quadratic coefficient a must be non-zero")]
    ZeroCoefficient,
    #[error("exponent l = {l} is out of range 1..={max} for m = {m}", max = .m.saturating_sub(1))]
    BadExponent { l: u32, m: u32 },

    #[error("coefficient a lies outside the admissible domain F_(p^{subfield_degree})")]
    DomainViolation { subfield_degree: u32 },
    #[error("gcd(m, l) = 1: closed-form weights are not available, use brute force")]
    UnsupportedRegime,
    #[error("enumeration of {needed} (a, b) pairs exceeds the budget of {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("no codeword has weight {0}")]
    WeightAbsent(u64),

    #[error("cyclotomic coset needs n > 0, gcd(p, n) = 1 and j < n (n = {n}, p = {p}, j = {j})")]
    BadCosetModulus { n: u64, p: u64, j: u64 },
    #[error("sample count must be positive")]
    SampleBudgetZero,

    #[error("support of weight {weight} arose from {count} codewords, expected {expected} scalar multiples")]
    MultiplicityViolation {
        weight: u64,
        count: usize,
        expected: usize,
    },
    #[error(
        "not a 2-design: pair {first_pair:?} lies in {first_count} blocks but pair {second_pair:?} lies in {second_count}"
    )]
    NotADesign {
        first_pair: (usize, usize),
        first_count: u64,
        second_pair: (usize, usize),
        second_count: u64,
    },
    #[error("empty block set")]
    EmptyBlockSet,
    #[error("lambda = {numerator}/{denominator} is not an integer")]
    NonIntegralLambda { numerator: u128, denominator: u128 },
    #[error("invalid design parameters: {0}")]
    InvalidDesignParameters(String),
    #[error("design level i = {i} must satisfy 0 <= i <= t <= k <= v (t = {t}, k = {k}, v = {v})")]
    BadLevel { t: u64, v: u64, k: u64, i: u64 },
    #[error("printed lambda {printed} for weight {weight} disagrees with multiplicity-derived {derived}")]
    FormulaMismatch {
        weight: u64,
        printed: String,
        derived: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
