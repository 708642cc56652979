//! Coefficient domains and sparse Laurent polynomials.
//!
//! Two scalar domains are provided and are never mixed inside a single
//! polynomial: [`ExactScalar`] (Gaussian rationals, every operation exact)
//! and [`FloatScalar`] (complex doubles, rejected at construction when not
//! finite). Conversion is one-way, exact to float, via
//! [`ExactScalar::to_float`].
//!
//! [`LaurentPoly`] is a finite map from integer exponent vectors to nonzero
//! coefficients. Terms are kept in a fixed graded-lexicographic order
//! (total exponent sum first, then lexicographic comparison of exponent
//! vectors), which makes iteration, display, and serialization
//! deterministic. Weighted gradings are always taken relative to an
//! explicit [`WeightVector`] argument so that the same polynomial value can
//! be sliced under different quasihomogeneous gradings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Errors raised by scalar and polynomial constructors and operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScalarError {
    /// A float component was NaN or infinite at construction.
    NotFinite,
    /// Division by zero (exact domain) or by a non-invertible element.
    DivisionByZero,
    /// A weight vector entry was not strictly positive.
    NonPositiveWeight,
    /// Operands were built over different variable lists.
    VariableMismatch(String),
    /// Exact division failed: the divisor does not divide the dividend.
    NotDivisible,
}

impl fmt::Display for ScalarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarError::NotFinite => write!(f, "float scalar must be finite (NaN/Inf rejected)"),
            ScalarError::DivisionByZero => write!(f, "division by zero"),
            ScalarError::NonPositiveWeight => {
                write!(f, "weight vector entries must be strictly positive")
            }
            ScalarError::VariableMismatch(s) => write!(f, "variable list mismatch: {s}"),
            ScalarError::NotDivisible => write!(f, "exact division failed: not divisible"),
        }
    }
}

impl std::error::Error for ScalarError {}

/// Common interface of the two coefficient domains.
///
/// Both domains form a field; `inv` returns `None` exactly on zero. The
/// trait is object-unsafe by design — all algebra below is generic and
/// monomorphized per domain.
pub trait Scalar: Clone + PartialEq + fmt::Debug + fmt::Display + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self) -> Option<Self>;
    fn from_i64(v: i64) -> Self;
    /// Embed an exact rational (exactly in the exact domain, rounded in
    /// floats).
    fn from_rational(r: &BigRational) -> Self;
    /// Whether this domain is exact (`ExactScalar`) or floating.
    fn is_exact() -> bool;
    /// Absolute value as a double (modulus for complex values); used only
    /// for diagnostics and norms, never for exact decisions.
    fn abs_f64(&self) -> f64;

    fn div(&self, rhs: &Self) -> Result<Self, ScalarError> {
        rhs.inv()
            .map(|r| self.mul(&r))
            .ok_or(ScalarError::DivisionByZero)
    }
}

// ---------------------------------------------------------------------------
// ExactScalar
// ---------------------------------------------------------------------------

/// Exact Gaussian rational `re + i·im` with both parts arbitrary-precision
/// rationals kept in lowest terms with positive denominators (enforced by
/// the underlying rational type on every operation).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    pub re: BigRational,
    pub im: BigRational,
}

impl ExactScalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        ExactScalar { re, im }
    }

    /// Rational from an integer pair `p/q`. Panics on `q == 0`.
    pub fn from_ratio(p: i64, q: i64) -> Self {
        ExactScalar {
            re: BigRational::new(BigInt::from(p), BigInt::from(q)),
            im: BigRational::zero(),
        }
    }

    /// Gaussian rational from two integer pairs `p/q + (r/s)i`.
    pub fn from_ratios(p: i64, q: i64, r: i64, s: i64) -> Self {
        ExactScalar {
            re: BigRational::new(BigInt::from(p), BigInt::from(q)),
            im: BigRational::new(BigInt::from(r), BigInt::from(s)),
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_ratio(v, 1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        ExactScalar {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// True when the value is a rational integer (imaginary part zero,
    /// denominator one).
    pub fn is_integer(&self) -> bool {
        self.im.is_zero() && self.re.is_integer()
    }

    /// True when the value is a nonnegative rational integer.
    pub fn is_nonneg_integer(&self) -> bool {
        self.is_integer() && !self.re.is_negative()
    }

    /// Integer value if [`Self::is_integer`], else `None`.
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.is_integer() {
            Some(self.re.to_integer())
        } else {
            None
        }
    }

    /// One-way exact-to-float conversion.
    pub fn to_float(&self) -> FloatScalar {
        FloatScalar {
            re: rational_to_f64(&self.re),
            im: rational_to_f64(&self.im),
        }
    }

    pub fn conj(&self) -> Self {
        ExactScalar {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Squared modulus `re² + im²` as a rational.
    pub fn norm_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Extremely large numerator/denominator: fall back to a quotient of
        // rounded parts. This is diagnostic-only precision.
        let n = r.numer().to_f64().unwrap_or(f64::MAX);
        let d = r.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

impl Scalar for ExactScalar {
    fn zero() -> Self {
        ExactScalar {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }
    fn one() -> Self {
        ExactScalar {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, rhs: &Self) -> Self {
        ExactScalar {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
    fn sub(&self, rhs: &Self) -> Self {
        ExactScalar {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
    fn mul(&self, rhs: &Self) -> Self {
        ExactScalar {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
    fn neg(&self) -> Self {
        ExactScalar {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sq();
        Some(ExactScalar {
            re: &self.re / &n,
            im: -(&self.im / &n),
        })
    }
    fn from_i64(v: i64) -> Self {
        Self::from_int(v)
    }
    fn from_rational(r: &BigRational) -> Self {
        ExactScalar {
            re: r.clone(),
            im: BigRational::zero(),
        }
    }
    fn is_exact() -> bool {
        true
    }
    fn abs_f64(&self) -> f64 {
        let f = self.to_float();
        (f.re * f.re + f.im * f.im).sqrt()
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else {
            write!(f, "({}{:+}i)", self.re, self.im)
        }
    }
}

// ---------------------------------------------------------------------------
// FloatScalar
// ---------------------------------------------------------------------------

/// Complex double-precision scalar. Construction rejects NaN and infinities;
/// arithmetic assumes (and in practice preserves) finiteness.
#[derive(Clone, Copy, PartialEq)]
pub struct FloatScalar {
    pub re: f64,
    pub im: f64,
}

impl FloatScalar {
    pub fn new(re: f64, im: f64) -> Result<Self, ScalarError> {
        if re.is_finite() && im.is_finite() {
            Ok(FloatScalar { re, im })
        } else {
            Err(ScalarError::NotFinite)
        }
    }

    pub fn real(re: f64) -> Self {
        FloatScalar { re, im: 0.0 }
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

impl Scalar for FloatScalar {
    fn zero() -> Self {
        FloatScalar { re: 0.0, im: 0.0 }
    }
    fn one() -> Self {
        FloatScalar { re: 1.0, im: 0.0 }
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        FloatScalar {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
    fn sub(&self, rhs: &Self) -> Self {
        FloatScalar {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
    fn mul(&self, rhs: &Self) -> Self {
        FloatScalar {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
    fn neg(&self) -> Self {
        FloatScalar {
            re: -self.re,
            im: -self.im,
        }
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.re * self.re + self.im * self.im;
        Some(FloatScalar {
            re: self.re / n,
            im: -self.im / n,
        })
    }
    fn from_i64(v: i64) -> Self {
        FloatScalar {
            re: v as f64,
            im: 0.0,
        }
    }
    fn from_rational(r: &BigRational) -> Self {
        FloatScalar {
            re: rational_to_f64(r),
            im: 0.0,
        }
    }
    fn is_exact() -> bool {
        false
    }
    fn abs_f64(&self) -> f64 {
        self.abs()
    }
}

impl fmt::Debug for FloatScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FloatScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0.0 {
            write!(f, "{:?}", self.re)
        } else {
            write!(f, "({:?}{:+?}i)", self.re, self.im)
        }
    }
}

// ---------------------------------------------------------------------------
// Multidegree and weights
// ---------------------------------------------------------------------------

/// Integer exponent vector of a Laurent monomial; entries may be negative.
///
/// Ordering is graded-lexicographic: first by total exponent sum, then
/// lexicographically entry by entry. This fixed order drives all
/// deterministic iteration.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Multidegree(pub Vec<i64>);

impl Multidegree {
    pub fn zeros(m: usize) -> Self {
        Multidegree(vec![0; m])
    }

    /// Unit vector `e_i`.
    pub fn unit(m: usize, i: usize) -> Self {
        let mut v = vec![0; m];
        v[i] = 1;
        Multidegree(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.len(), rhs.len());
        Multidegree(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.len(), rhs.len());
        Multidegree(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Self {
        Multidegree(self.0.iter().map(|a| -a).collect())
    }

    /// All entries nonnegative (a genuine polynomial monomial).
    pub fn is_nonneg(&self) -> bool {
        self.0.iter().all(|&a| a >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Weighted degree `Σ b_i w_i` as an exact rational.
    pub fn weighted_degree(&self, w: &WeightVector) -> BigRational {
        debug_assert_eq!(self.len(), w.0.len());
        let mut acc = BigRational::zero();
        for (b, wi) in self.0.iter().zip(&w.0) {
            acc += BigRational::from(BigInt::from(*b)) * wi;
        }
        acc
    }
}

impl PartialOrd for Multidegree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Multidegree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Strictly positive rational weights, one per variable.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightVector(pub Vec<BigRational>);

impl WeightVector {
    pub fn new(w: Vec<BigRational>) -> Result<Self, ScalarError> {
        if w.iter().any(|x| !x.is_positive()) {
            return Err(ScalarError::NonPositiveWeight);
        }
        Ok(WeightVector(w))
    }

    /// All weights equal to one.
    pub fn units(m: usize) -> Self {
        WeightVector(vec![BigRational::one(); m])
    }

    pub fn from_ints(w: &[i64]) -> Result<Self, ScalarError> {
        Self::new(
            w.iter()
                .map(|&x| BigRational::from(BigInt::from(x)))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

// ---------------------------------------------------------------------------
// LaurentPoly
// ---------------------------------------------------------------------------

/// Sparse Laurent polynomial over a fixed variable list.
///
/// Invariants: no explicitly stored zero coefficients and every exponent
/// vector has the same length as the variable list. All binary operations
/// require both operands to share the same variable list and panic
/// otherwise (an internal contract; public entry points validate inputs
/// before mixing polynomials).
#[derive(Clone, PartialEq, Debug)]
pub struct LaurentPoly<S: Scalar> {
    vars: Vec<String>,
    terms: BTreeMap<Multidegree, S>,
}

impl<S: Scalar> LaurentPoly<S> {
    pub fn zero(vars: &[String]) -> Self {
        LaurentPoly {
            vars: vars.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[String], c: S) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Multidegree::zeros(vars.len()), c);
        }
        p
    }

    pub fn one(vars: &[String]) -> Self {
        Self::constant(vars, S::one())
    }

    pub fn monomial(vars: &[String], deg: Multidegree, c: S) -> Self {
        assert_eq!(deg.len(), vars.len(), "exponent arity mismatch");
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(deg, c);
        }
        p
    }

    /// The variable `t_i` as a polynomial.
    pub fn var(vars: &[String], i: usize) -> Self {
        Self::monomial(vars, Multidegree::unit(vars.len(), i), S::one())
    }

    /// Build from a term list, merging duplicates and dropping zeros.
    pub fn from_terms(vars: &[String], terms: Vec<(Multidegree, S)>) -> Self {
        let mut p = Self::zero(vars);
        for (d, c) in terms {
            p.add_term(d, c);
        }
        p
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in the fixed graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&Multidegree, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, deg: &Multidegree) -> S {
        self.terms.get(deg).cloned().unwrap_or_else(S::zero)
    }

    /// Constant term.
    pub fn constant_term(&self) -> S {
        self.coeff(&Multidegree::zeros(self.vars.len()))
    }

    /// True when the polynomial is a constant (possibly zero).
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|d| d.is_zero())
    }

    /// True when the polynomial has exactly one term.
    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// True when the polynomial is a single term with invertible
    /// coefficient — a unit of the Laurent ring.
    pub fn is_laurent_unit(&self) -> bool {
        self.terms.len() == 1 && self.terms.values().next().map(|c| !c.is_zero()).unwrap_or(false)
    }

    /// The single `(degree, coeff)` pair of a monomial, if any.
    pub fn as_monomial(&self) -> Option<(Multidegree, S)> {
        if self.terms.len() == 1 {
            let (d, c) = self.terms.iter().next().unwrap();
            Some((d.clone(), c.clone()))
        } else {
            None
        }
    }

    /// All exponents nonnegative (no Laurent poles).
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|d| d.is_nonneg())
    }

    /// Exponents of `var i` are all `>= bound`.
    pub fn min_exponent(&self, i: usize) -> Option<i64> {
        self.terms.keys().map(|d| d.0[i]).min()
    }

    pub fn max_exponent(&self, i: usize) -> Option<i64> {
        self.terms.keys().map(|d| d.0[i]).max()
    }

    fn add_term(&mut self, deg: Multidegree, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(deg) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn assert_same_vars(&self, other: &Self) {
        assert_eq!(
            self.vars, other.vars,
            "operands built over different variable lists"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_vars(other);
        let mut out = self.clone();
        for (d, c) in &other.terms {
            out.add_term(d.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same_vars(other);
        let mut out = self.clone();
        for (d, c) in &other.terms {
            out.add_term(d.clone(), c.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(d, c)| (d.clone(), c.neg())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_vars(other);
        let mut out = Self::zero(&self.vars);
        for (d1, c1) in &self.terms {
            for (d2, c2) in &other.terms {
                out.add_term(d1.add(d2), c1.mul(c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        LaurentPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(d, x)| (d.clone(), x.mul(c)))
                .collect(),
        }
    }

    /// Multiply by a single Laurent monomial `c · t^deg`.
    pub fn mul_monomial(&self, deg: &Multidegree, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        LaurentPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(d, x)| (d.add(deg), x.mul(c)))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(&self.vars);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative with respect to variable `i` (Laurent rule:
    /// `d/dt t^b = b·t^(b-1)` for every integer `b`, including negatives;
    /// the `b = 0` terms vanish).
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.vars);
        for (d, c) in &self.terms {
            let b = d.0[i];
            if b == 0 {
                continue;
            }
            let mut nd = d.clone();
            nd.0[i] -= 1;
            out.add_term(nd, c.mul(&S::from_i64(b)));
        }
        out
    }

    /// Substitute `var i := 0`. Fails when a term has a negative exponent
    /// in variable `i`.
    pub fn restrict_to_zero(&self, i: usize) -> Result<Self, ScalarError> {
        let mut out = Self::zero(&self.vars);
        for (d, c) in &self.terms {
            match d.0[i].cmp(&0) {
                Ordering::Less => {
                    return Err(ScalarError::VariableMismatch(format!(
                        "cannot restrict {} to zero: negative exponent present",
                        self.vars[i]
                    )))
                }
                Ordering::Greater => {}
                Ordering::Equal => out.add_term(d.clone(), c.clone()),
            }
        }
        Ok(out)
    }

    /// Evaluate at a point given by one scalar per variable. Negative
    /// exponents require the corresponding coordinate to be invertible.
    pub fn eval(&self, point: &[S]) -> Result<S, ScalarError> {
        assert_eq!(point.len(), self.vars.len());
        let mut acc = S::zero();
        for (d, c) in &self.terms {
            let mut term = c.clone();
            for (i, &b) in d.0.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let base = if b > 0 {
                    point[i].clone()
                } else {
                    point[i].inv().ok_or(ScalarError::DivisionByZero)?
                };
                for _ in 0..b.unsigned_abs() {
                    term = term.mul(&base);
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Split into quasihomogeneous slices under the given weights, keyed by
    /// exact rational weighted degree (ascending).
    pub fn graded_parts(&self, w: &WeightVector) -> BTreeMap<BigRational, Self> {
        let mut out: BTreeMap<BigRational, Self> = BTreeMap::new();
        for (d, c) in &self.terms {
            let deg = d.weighted_degree(w);
            out.entry(deg)
                .or_insert_with(|| Self::zero(&self.vars))
                .add_term(d.clone(), c.clone());
        }
        out
    }

    /// Largest weighted degree among terms, if nonzero.
    pub fn max_weighted_degree(&self, w: &WeightVector) -> Option<BigRational> {
        self.terms.keys().map(|d| d.weighted_degree(w)).max()
    }

    pub fn min_weighted_degree(&self, w: &WeightVector) -> Option<BigRational> {
        self.terms.keys().map(|d| d.weighted_degree(w)).min()
    }

    /// Drop all terms with weighted degree strictly above `bound`.
    pub fn truncate_weighted(&self, w: &WeightVector, bound: &BigRational) -> Self {
        LaurentPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(d, _)| d.weighted_degree(w) <= *bound)
                .map(|(d, c)| (d.clone(), c.clone()))
                .collect(),
        }
    }

    /// Map coefficients, dropping resulting zeros (used for the one-way
    /// exact-to-float conversion).
    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LaurentPoly<T> {
        let mut out = LaurentPoly::zero(&self.vars);
        for (d, c) in &self.terms {
            out.add_term(d.clone(), f(c));
        }
        out
    }

    /// Componentwise minimum of all exponent vectors (the largest monomial
    /// dividing every term). Zero vector for the zero polynomial.
    pub fn exponent_floor(&self) -> Multidegree {
        let m = self.vars.len();
        let mut floor = vec![i64::MAX; m];
        for d in self.terms.keys() {
            for (f, &b) in floor.iter_mut().zip(&d.0) {
                *f = (*f).min(b);
            }
        }
        if self.terms.is_empty() {
            Multidegree::zeros(m)
        } else {
            Multidegree(floor)
        }
    }

    /// Leading term under the fixed graded-lex order.
    pub fn leading_term(&self) -> Option<(&Multidegree, &S)> {
        self.terms.iter().next_back()
    }
}

impl<S: Scalar> fmt::Display for LaurentPoly<S> {
    /// `c*t1^a*t2^b + ...` from the leading term down.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &b) in d.0.iter().enumerate() {
                if b != 0 {
                    write!(f, "*{}^{}", self.vars[i], b)?;
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Exact-domain polynomial algebra: division and gcd
// ---------------------------------------------------------------------------

impl LaurentPoly<ExactScalar> {
    /// Exact division in the Laurent ring: returns `q` with `self = q·d`,
    /// or `None` when no Laurent-polynomial quotient exists. Monomial
    /// factors of both operands are shifted out first, so dividing by a
    /// unit (single term) always succeeds.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        self.assert_same_vars(d);
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero(&self.vars));
        }
        // Shift both into the polynomial range.
        let sf = self.exponent_floor();
        let df = d.exponent_floor();
        let p = self.mul_monomial(&sf.neg(), &ExactScalar::one());
        let dd = d.mul_monomial(&df.neg(), &ExactScalar::one());
        let mut rem = p;
        let mut quo = Self::zero(&self.vars);
        let (dlt_deg, dlt_c) = {
            let (dg, c) = dd.leading_term().unwrap();
            (dg.clone(), c.clone())
        };
        let dlt_inv = dlt_c.inv().unwrap();
        while !rem.is_zero() {
            let (rd, rc) = {
                let (dg, c) = rem.leading_term().unwrap();
                (dg.clone(), c.clone())
            };
            let qd = rd.sub(&dlt_deg);
            if !qd.is_nonneg() {
                return None;
            }
            let qc = rc.mul(&dlt_inv);
            quo.add_term(qd.clone(), qc.clone());
            rem = rem.sub(&dd.mul_monomial(&qd, &qc));
        }
        // Undo the shifts: self = t^sf·p = quo·dd·t^sf = quo·d·t^(sf-df).
        Some(quo.mul_monomial(&sf.sub(&df), &ExactScalar::one()))
    }

    /// Divisibility test in the Laurent ring.
    pub fn divides(&self, dividend: &Self) -> bool {
        dividend.exact_div(self).is_some()
    }

    /// Content: rational-scalar normalization factor making the leading
    /// coefficient one. Used to normalize gcd results.
    fn monic(&self) -> Self {
        match self.leading_term() {
            None => self.clone(),
            Some((_, c)) => {
                let ci = c.inv().unwrap();
                self.scale(&ci)
            }
        }
    }

    /// Degree in variable `i` (max exponent); `None` for zero.
    pub fn degree_in(&self, i: usize) -> Option<i64> {
        self.max_exponent(i)
    }

    /// Extract coefficients as polynomials in the remaining variables:
    /// `self = Σ_k coeff_k · t_i^k`. Keys are the exponents of `t_i`.
    fn univariate_in(&self, i: usize) -> BTreeMap<i64, Self> {
        let mut out: BTreeMap<i64, Self> = BTreeMap::new();
        for (d, c) in &self.terms {
            let k = d.0[i];
            let mut nd = d.clone();
            nd.0[i] = 0;
            out.entry(k)
                .or_insert_with(|| Self::zero(&self.vars))
                .add_term(nd, c.clone());
        }
        out
    }

    /// Multivariate gcd over the Gaussian rationals (inputs must be genuine
    /// polynomials — callers strip Laurent monomial factors first). Result
    /// is normalized monic under the graded-lex order. Implemented by
    /// primitive pseudo-remainder sequences, recursing on the variable set.
    pub fn poly_gcd(&self, other: &Self) -> Self {
        self.assert_same_vars(other);
        assert!(
            self.is_polynomial() && other.is_polynomial(),
            "poly_gcd requires polynomial (nonnegative-exponent) inputs"
        );
        gcd_inner(self, other).monic()
    }

    /// Square-freeness over the Gaussian rationals:
    /// `gcd(f, ∂f/∂t_1, …, ∂f/∂t_m)` is a nonzero constant.
    pub fn is_square_free(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        if self.is_constant() {
            return true;
        }
        let mut g = self.clone();
        for i in 0..self.vars.len() {
            let di = self.derivative(i);
            g = gcd_inner(&g, &di);
            if g.is_constant() && !g.is_zero() {
                return true;
            }
        }
        g.is_constant() && !g.is_zero()
    }
}

/// gcd of polynomial (nonnegative-exponent) Laurent values; not normalized.
fn gcd_inner(a: &LaurentPoly<ExactScalar>, b: &LaurentPoly<ExactScalar>) -> LaurentPoly<ExactScalar> {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return LaurentPoly::one(a.vars());
    }
    // Main variable: highest index actually present in either operand.
    let m = a.num_vars();
    let main = (0..m)
        .rev()
        .find(|&i| a.max_exponent(i).unwrap_or(0) > 0 || b.max_exponent(i).unwrap_or(0) > 0)
        .expect("nonconstant polynomial has a live variable");

    let ac = a.univariate_in(main);
    let bc = b.univariate_in(main);
    // If the main variable is absent from one operand, gcd divides its
    // content in that variable.
    let content = |coeffs: &BTreeMap<i64, LaurentPoly<ExactScalar>>| {
        let mut g = LaurentPoly::zero(a.vars());
        for p in coeffs.values() {
            g = gcd_inner(&g, p);
        }
        g
    };
    let ca = content(&ac);
    let cb = content(&bc);
    let cont_gcd = gcd_inner(&ca, &cb);
    let pa = a.exact_div(&ca).expect("content divides");
    let pb = b.exact_div(&cb).expect("content divides");

    // Primitive PRS in the main variable.
    let (mut u, mut v) = if pa.degree_in(main).unwrap_or(0) >= pb.degree_in(main).unwrap_or(0) {
        (pa, pb)
    } else {
        (pb, pa)
    };
    loop {
        if v.is_zero() {
            break;
        }
        if v.degree_in(main).unwrap_or(0) == 0 {
            // Nonzero constant in the main variable: primitive parts coprime.
            u = LaurentPoly::one(a.vars());
            break;
        }
        let r = pseudo_rem(&u, &v, main);
        let rc = content(&r.univariate_in(main));
        let rp = if r.is_zero() {
            r
        } else {
            r.exact_div(&rc).expect("content divides")
        };
        u = v;
        v = rp;
    }
    let uc = content(&u.univariate_in(main));
    let up = if u.is_zero() {
        u
    } else {
        u.exact_div(&uc).expect("content divides")
    };
    up.mul(&cont_gcd)
}

/// Pseudo-remainder of `a` by `b` in variable `main` (deg_a >= deg_b >= 1):
/// repeatedly cancels the leading coefficient by cross-multiplication, so
/// only exact ring operations are used.
fn pseudo_rem(
    a: &LaurentPoly<ExactScalar>,
    b: &LaurentPoly<ExactScalar>,
    main: usize,
) -> LaurentPoly<ExactScalar> {
    let db = b.degree_in(main).unwrap();
    let lead = |p: &LaurentPoly<ExactScalar>| -> (i64, LaurentPoly<ExactScalar>) {
        let uni = p.univariate_in(main);
        let (k, c) = uni.iter().next_back().map(|(k, c)| (*k, c.clone())).unwrap();
        (k, c)
    };
    let (_, bl) = lead(b);
    let mut r = a.clone();
    while !r.is_zero() {
        let (dr, rl) = lead(&r);
        if dr < db {
            break;
        }
        // r := bl·r − rl·t^(dr−db)·b
        let mut shift = Multidegree::zeros(a.num_vars());
        shift.0[main] = dr - db;
        let t1 = r.mul(&bl);
        let t2 = b
            .mul(&rl)
            .mul_monomial(&shift, &ExactScalar::one());
        r = t1.sub(&t2);
    }
    r
}

impl LaurentPoly<ExactScalar> {
    /// One-way conversion to the float domain.
    pub fn to_float(&self) -> LaurentPoly<FloatScalar> {
        self.map_coeffs(|c| c.to_float())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars2() -> Vec<String> {
        vec!["t1".into(), "t2".into()]
    }

    fn q(p: i64, q_: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q_))
    }

    // --- ExactScalar -------------------------------------------------------

    #[test]
    fn exact_scalar_canonical_lowest_terms() {
        // (3/6, -2/4) must canonicalize to (1/2, -1/2).
        let x = ExactScalar::from_ratios(3, 6, -2, 4);
        assert_eq!(x.re, q(1, 2));
        assert_eq!(x.im, q(-1, 2));
        // Positive denominators are maintained by the rational type.
        let y = ExactScalar::from_ratio(1, -2);
        assert_eq!(y.re, q(-1, 2));
    }

    #[test]
    fn exact_scalar_gaussian_arithmetic() {
        let one_plus_i = ExactScalar::from_ratios(1, 1, 1, 1);
        let one_minus_i = ExactScalar::from_ratios(1, 1, -1, 1);
        assert_eq!(one_plus_i.mul(&one_minus_i), ExactScalar::from_int(2));
        // inv(1+i) = (1-i)/2
        let inv = one_plus_i.inv().unwrap();
        assert_eq!(inv, ExactScalar::from_ratios(1, 2, -1, 2));
        assert_eq!(one_plus_i.mul(&inv), ExactScalar::one());
    }

    #[test]
    fn exact_scalar_integer_predicates() {
        assert!(ExactScalar::from_int(-3).is_integer());
        assert!(!ExactScalar::from_int(-3).is_nonneg_integer());
        assert!(ExactScalar::from_int(0).is_nonneg_integer());
        assert!(!ExactScalar::from_ratio(1, 2).is_integer());
        assert!(!ExactScalar::i().is_integer());
    }

    #[test]
    fn float_scalar_rejects_non_finite() {
        assert!(FloatScalar::new(f64::NAN, 0.0).is_err());
        assert!(FloatScalar::new(0.0, f64::INFINITY).is_err());
        assert!(FloatScalar::new(1.5, -2.5).is_ok());
    }

    // --- Multidegree and weights -------------------------------------------

    #[test]
    fn weighted_degree_rational_weights() {
        // (3, -2) with weights (1/2, 1/3): 3/2 - 2/3 = 5/6.
        let d = Multidegree(vec![3, -2]);
        let w = WeightVector::new(vec![q(1, 2), q(1, 3)]).unwrap();
        assert_eq!(d.weighted_degree(&w), q(5, 6));
    }

    #[test]
    fn weight_vector_rejects_nonpositive() {
        assert!(WeightVector::new(vec![q(1, 2), q(0, 1)]).is_err());
        assert!(WeightVector::new(vec![q(-1, 2)]).is_err());
    }

    #[test]
    fn graded_lex_order() {
        let a = Multidegree(vec![2, 0]);
        let b = Multidegree(vec![0, 3]);
        let c = Multidegree(vec![1, 1]);
        assert!(a < b); // total degree 2 < 3
        assert!(c < a); // same total degree, lex: (1,1) < (2,0)
    }

    // --- LaurentPoly --------------------------------------------------------

    /// Independent multiplication oracle: direct nested-loop convolution
    /// into an association list, combined and sorted separately from the
    /// production code path.
    fn naive_mul(
        a: &LaurentPoly<ExactScalar>,
        b: &LaurentPoly<ExactScalar>,
    ) -> Vec<(Vec<i64>, ExactScalar)> {
        let mut acc: Vec<(Vec<i64>, ExactScalar)> = Vec::new();
        for (da, ca) in a.terms() {
            for (db, cb) in b.terms() {
                let d: Vec<i64> = da.0.iter().zip(&db.0).map(|(x, y)| x + y).collect();
                let c = ca.mul(cb);
                match acc.iter_mut().find(|(e, _)| *e == d) {
                    Some((_, existing)) => *existing = existing.add(&c),
                    None => acc.push((d, c)),
                }
            }
        }
        acc.retain(|(_, c)| !c.is_zero());
        acc.sort_by(|(d1, _), (d2, _)| d1.cmp(d2));
        acc
    }

    #[test]
    fn difference_of_squares_vs_convolution_oracle() {
        let v = vars2();
        let t1 = LaurentPoly::<ExactScalar>::var(&v, 0);
        let t2 = LaurentPoly::<ExactScalar>::var(&v, 1);
        let p = t1.sub(&t2);
        let s = t1.add(&t2);
        let prod = p.mul(&s);

        let expected = t1.mul(&t1).sub(&t2.mul(&t2));
        assert_eq!(prod, expected);

        let oracle = naive_mul(&p, &s);
        let got: Vec<(Vec<i64>, ExactScalar)> = prod
            .terms()
            .map(|(d, c)| (d.0.clone(), c.clone()))
            .collect();
        let mut oracle_sorted = oracle;
        oracle_sorted.sort_by(|(d1, _), (d2, _)| d1.cmp(d2));
        let mut got_sorted = got;
        got_sorted.sort_by(|(d1, _), (d2, _)| d1.cmp(d2));
        assert_eq!(got_sorted, oracle_sorted);
    }

    #[test]
    fn cancellation_removes_terms() {
        let v = vars2();
        let t1 = LaurentPoly::<ExactScalar>::var(&v, 0);
        let z = t1.sub(&t1);
        assert!(z.is_zero());
        assert_eq!(z.num_terms(), 0);
    }

    #[test]
    fn graded_parts_unit_weights() {
        // t1^2 + t1 t2 + t2^3 splits into degree-2 and degree-3 slices.
        let v = vars2();
        let p = LaurentPoly::from_terms(
            &v,
            vec![
                (Multidegree(vec![2, 0]), ExactScalar::one()),
                (Multidegree(vec![1, 1]), ExactScalar::one()),
                (Multidegree(vec![0, 3]), ExactScalar::one()),
            ],
        );
        let parts = p.graded_parts(&WeightVector::units(2));
        assert_eq!(parts.len(), 2);
        let p2 = parts.get(&q(2, 1)).unwrap();
        assert_eq!(p2.num_terms(), 2);
        let p3 = parts.get(&q(3, 1)).unwrap();
        assert_eq!(p3.num_terms(), 1);
    }

    #[test]
    fn laurent_derivative() {
        // d/dt1 (t1^-1) = -t1^-2.
        let v = vars2();
        let p = LaurentPoly::monomial(&v, Multidegree(vec![-1, 0]), ExactScalar::one());
        let d = p.derivative(0);
        assert_eq!(
            d,
            LaurentPoly::monomial(&v, Multidegree(vec![-2, 0]), ExactScalar::from_int(-1))
        );
        // Constant-in-t1 terms vanish.
        let c = LaurentPoly::monomial(&v, Multidegree(vec![0, 5]), ExactScalar::one());
        assert!(c.derivative(0).is_zero());
    }

    #[test]
    fn exact_division_laurent() {
        let v = vars2();
        let t1 = LaurentPoly::<ExactScalar>::var(&v, 0);
        let t2 = LaurentPoly::<ExactScalar>::var(&v, 1);
        // (t1^2 - t2^2) / (t1 - t2) = t1 + t2.
        let num = t1.mul(&t1).sub(&t2.mul(&t2));
        let den = t1.sub(&t2);
        assert_eq!(num.exact_div(&den), Some(t1.add(&t2)));
        // Non-divisible case.
        assert_eq!(t1.exact_div(&den), None);
        // Division by a monomial always succeeds in the Laurent ring.
        let one = LaurentPoly::<ExactScalar>::one(&v);
        let inv = one.exact_div(&t2).unwrap();
        assert_eq!(
            inv,
            LaurentPoly::monomial(&v, Multidegree(vec![0, -1]), ExactScalar::one())
        );
    }

    #[test]
    fn gcd_and_square_free() {
        let v = vars2();
        let t1 = LaurentPoly::<ExactScalar>::var(&v, 0);
        let t2 = LaurentPoly::<ExactScalar>::var(&v, 1);
        let f = t1.sub(&t2); // t1 - t2
        let g = f.mul(&f).mul(&t1); // t1 (t1-t2)^2
        let h = f.mul(&t2); // t2 (t1-t2)
        let gcd = g.poly_gcd(&h);
        // gcd = t1 - t2 up to a unit; monic under graded-lex makes it exact.
        assert_eq!(gcd, f.monic());

        assert!(f.is_square_free());
        assert!(!g.is_square_free());
        // s^2 - s = s(s-1) is square-free.
        let s2 = t1.mul(&t1).sub(&t1);
        assert!(s2.is_square_free());
        // Discriminant-shaped polynomial: 4 t2^3 + 27 t1^2.
        let disc = t2
            .pow(3)
            .scale(&ExactScalar::from_int(4))
            .add(&t1.pow(2).scale(&ExactScalar::from_int(27)));
        assert!(disc.is_square_free());
    }

    #[test]
    fn eval_with_negative_exponents() {
        let v = vars2();
        // p = t1^-1 t2 at (2, 6) = 3.
        let p = LaurentPoly::monomial(&v, Multidegree(vec![-1, 1]), ExactScalar::one());
        let val = p
            .eval(&[ExactScalar::from_int(2), ExactScalar::from_int(6)])
            .unwrap();
        assert_eq!(val, ExactScalar::from_int(3));
        // Evaluation at zero base with negative exponent fails.
        assert!(p
            .eval(&[ExactScalar::zero(), ExactScalar::one()])
            .is_err());
    }

    #[test]
    fn truncation_by_weighted_degree() {
        let v = vars2();
        let w = WeightVector::units(2);
        let p = LaurentPoly::from_terms(
            &v,
            vec![
                (Multidegree(vec![1, 0]), ExactScalar::one()),
                (Multidegree(vec![3, 1]), ExactScalar::one()),
            ],
        );
        let t = p.truncate_weighted(&w, &q(2, 1));
        assert_eq!(t.num_terms(), 1);
        assert_eq!(t.max_weighted_degree(&w), Some(q(1, 1)));
    }
}
