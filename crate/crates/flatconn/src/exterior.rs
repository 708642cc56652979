//! Exterior algebra of scalar- and matrix-valued differential forms with
//! Laurent-polynomial coefficients.
//!
//! Forms are stored expanded over the coordinate coframe: a k-form is a map
//! from strictly increasing index tuples `(i1 < … < ik)` to the coefficient
//! of `dt_{i1}∧…∧dt_{ik}`. No symbolic `df/f` objects are kept — the
//! logarithmic structure of a connection is recovered analytically by the
//! pole/residue layer, not stored.
//!
//! Matrix forms multiply with the matrix-wedge convention
//! `(Ω∧Θ)_ij = Σ_k ω_ik ∧ θ_kj`, and the exposed bracket of two matrix
//! 1-forms is the adjusted-sign combination `[Ω,Θ] = Ω∧Θ + Θ∧Ω` consumed by
//! the homological equation of the normal-form layer. (The naive
//! minus-sign commutator of matrix 1-forms is not used anywhere downstream
//! and is intentionally not exposed.)

use crate::scalars::{LaurentPoly, Multidegree, Scalar, WeightVector};
use std::collections::BTreeMap;
use std::fmt;

/// Errors raised by form construction, substitution, and division.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormError {
    /// Operands over different variable lists.
    VariableMismatch(String),
    /// A form had the wrong degree for the requested operation.
    DegreeMismatch { expected: usize, found: usize },
    /// A component index tuple was not strictly increasing or out of range.
    InvalidComponent(String),
    /// Division pivot coefficient is neither a nonzero constant nor a
    /// monomial, so it has no inverse in the Laurent ring.
    PivotNotInvertible,
    /// Division failed: the form is not a multiple of the divisor.
    NotDivisible,
    /// A negative power would be substituted into a non-monomial image.
    NonMonomialSubstitution(String),
    /// A map supplied the wrong number of component polynomials.
    ArityMismatch { expected: usize, found: usize },
}

impl fmt::Display for FormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormError::VariableMismatch(s) => write!(f, "variable list mismatch: {s}"),
            FormError::DegreeMismatch { expected, found } => {
                write!(f, "form degree mismatch: expected {expected}, found {found}")
            }
            FormError::InvalidComponent(s) => write!(f, "invalid form component: {s}"),
            FormError::PivotNotInvertible => {
                write!(f, "pivot not invertible in Laurent ring")
            }
            FormError::NotDivisible => {
                write!(
                    f,
                    "not divisible: wedge product with the divisor form is nonzero"
                )
            }
            FormError::NonMonomialSubstitution(s) => {
                write!(f, "non-monomial substitution into Laurent pole: {s}")
            }
            FormError::ArityMismatch { expected, found } => {
                write!(f, "map arity mismatch: expected {expected} components, found {found}")
            }
        }
    }
}

impl std::error::Error for FormError {}

// ---------------------------------------------------------------------------
// Index tuple combinatorics
// ---------------------------------------------------------------------------

/// Merge two strictly increasing index tuples into one, returning the sign
/// of the permutation that sorts the concatenation, or `None` when they
/// share an index (the wedge vanishes).
fn merge_indices(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, i32)> {
    // Count inversions between the blocks; within each block the order is
    // already increasing.
    let mut inversions = 0usize;
    for &x in a {
        for &y in b {
            if x == y {
                return None;
            }
            if y < x {
                inversions += 1;
            }
        }
    }
    let mut merged: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    merged.sort_unstable();
    let sign = if inversions % 2 == 0 { 1 } else { -1 };
    Some((merged, sign))
}

/// Insert index `s` into a strictly increasing tuple, returning the new
/// tuple and the sign `(−1)^position`, or `None` when `s` is present.
fn insert_index(s: usize, idx: &[usize]) -> Option<(Vec<usize>, i32)> {
    if idx.contains(&s) {
        return None;
    }
    let pos = idx.iter().take_while(|&&i| i < s).count();
    let mut out = Vec::with_capacity(idx.len() + 1);
    out.extend_from_slice(&idx[..pos]);
    out.push(s);
    out.extend_from_slice(&idx[pos..]);
    let sign = if pos % 2 == 0 { 1 } else { -1 };
    Some((out, sign))
}

// ---------------------------------------------------------------------------
// ScalarKForm
// ---------------------------------------------------------------------------

/// A k-form with Laurent-polynomial coefficients over a fixed variable
/// list. Invariants: every stored index tuple is strictly increasing with
/// length `k` and entries `< m`; zero coefficients are dropped.
#[derive(Clone, PartialEq, Debug)]
pub struct ScalarKForm<S: Scalar> {
    vars: Vec<String>,
    k: usize,
    comps: BTreeMap<Vec<usize>, LaurentPoly<S>>,
}

impl<S: Scalar> ScalarKForm<S> {
    pub fn zero(vars: &[String], k: usize) -> Self {
        // Degrees above the variable count are representable but forced to
        // stay empty: no strictly increasing tuple of that length exists,
        // so `from_components` can never populate them. This lets d and
        // wedge return the (identically zero) next-degree form uniformly.
        ScalarKForm {
            vars: vars.to_vec(),
            k,
            comps: BTreeMap::new(),
        }
    }

    /// A 0-form from a polynomial.
    pub fn from_poly(p: LaurentPoly<S>) -> Self {
        let vars = p.vars().to_vec();
        let mut f = Self::zero(&vars, 0);
        if !p.is_zero() {
            f.comps.insert(Vec::new(), p);
        }
        f
    }

    /// The coordinate 1-form `dt_i`.
    pub fn coordinate(vars: &[String], i: usize) -> Self {
        assert!(i < vars.len());
        let mut f = Self::zero(vars, 1);
        f.comps.insert(vec![i], LaurentPoly::one(vars));
        f
    }

    /// Build from components, validating index tuples and merging
    /// duplicates.
    pub fn from_components(
        vars: &[String],
        k: usize,
        comps: Vec<(Vec<usize>, LaurentPoly<S>)>,
    ) -> Result<Self, FormError> {
        let mut f = Self::zero(vars, k);
        for (idx, p) in comps {
            if idx.len() != k {
                return Err(FormError::InvalidComponent(format!(
                    "index tuple {:?} has length {} in a degree-{} form",
                    idx,
                    idx.len(),
                    k
                )));
            }
            if !idx.windows(2).all(|w| w[0] < w[1]) {
                return Err(FormError::InvalidComponent(format!(
                    "index tuple {idx:?} is not strictly increasing"
                )));
            }
            if idx.iter().any(|&i| i >= vars.len()) {
                return Err(FormError::InvalidComponent(format!(
                    "index tuple {:?} out of range for {} variables",
                    idx,
                    vars.len()
                )));
            }
            if p.vars() != vars {
                return Err(FormError::VariableMismatch(format!(
                    "coefficient of {:?} uses variables {:?}",
                    idx,
                    p.vars()
                )));
            }
            f.add_component(idx, p);
        }
        Ok(f)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Components in index order.
    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &LaurentPoly<S>)> {
        self.comps.iter()
    }

    /// Coefficient of the given (strictly increasing) index tuple.
    pub fn coeff(&self, idx: &[usize]) -> LaurentPoly<S> {
        self.comps
            .get(idx)
            .cloned()
            .unwrap_or_else(|| LaurentPoly::zero(&self.vars))
    }

    /// The underlying polynomial of a 0-form.
    pub fn as_poly(&self) -> Option<LaurentPoly<S>> {
        if self.k != 0 {
            return None;
        }
        Some(self.coeff(&[]))
    }

    fn add_component(&mut self, idx: Vec<usize>, p: LaurentPoly<S>) {
        if p.is_zero() {
            return;
        }
        match self.comps.entry(idx) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(p);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&p);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn assert_compatible(&self, other: &Self) {
        assert_eq!(self.vars, other.vars, "forms over different variable lists");
        assert_eq!(self.k, other.k, "forms of different degree");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        let mut out = self.clone();
        for (idx, p) in &other.comps {
            out.add_component(idx.clone(), p.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        let mut out = self.clone();
        for (idx, p) in &other.comps {
            out.add_component(idx.clone(), p.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        ScalarKForm {
            vars: self.vars.clone(),
            k: self.k,
            comps: self.comps.iter().map(|(i, p)| (i.clone(), p.neg())).collect(),
        }
    }

    /// Multiply every coefficient by a polynomial (0-form product).
    pub fn scale_poly(&self, p: &LaurentPoly<S>) -> Self {
        let mut out = Self::zero(&self.vars, self.k);
        for (idx, q) in &self.comps {
            out.add_component(idx.clone(), q.mul(p));
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        self.scale_poly(&LaurentPoly::constant(&self.vars, c.clone()))
    }

    /// Wedge product; degrees add.
    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars, "forms over different variable lists");
        let mut out = Self::zero(&self.vars, self.k + other.k);
        for (ia, fa) in &self.comps {
            for (ib, fb) in &other.comps {
                if let Some((merged, sign)) = merge_indices(ia, ib) {
                    let mut p = fa.mul(fb);
                    if sign < 0 {
                        p = p.neg();
                    }
                    out.add_component(merged, p);
                }
            }
        }
        out
    }

    /// Exterior derivative.
    pub fn d(&self) -> Self {
        let mut out = Self::zero(&self.vars, self.k + 1);
        for (idx, p) in &self.comps {
            for s in 0..self.vars.len() {
                let dp = p.derivative(s);
                if dp.is_zero() {
                    continue;
                }
                if let Some((nidx, sign)) = insert_index(s, idx) {
                    out.add_component(nidx, if sign < 0 { dp.neg() } else { dp });
                }
            }
        }
        out
    }

    /// Pullback under the inclusion of `{t_i = 0}`: sets `t_i = 0` in the
    /// coefficients and `dt_i = 0` (drops all components containing `i`).
    /// Fails when a surviving coefficient has a pole on `{t_i = 0}`.
    pub fn restrict_to_zero(&self, i: usize) -> Result<Self, FormError> {
        let mut out = Self::zero(&self.vars, self.k);
        for (idx, p) in &self.comps {
            if idx.contains(&i) {
                continue;
            }
            let r = p
                .restrict_to_zero(i)
                .map_err(|e| FormError::VariableMismatch(e.to_string()))?;
            out.add_component(idx.clone(), r);
        }
        Ok(out)
    }

    /// Remove a variable that the form no longer involves (no `dt_i`
    /// component and no coefficient depending on `t_i`), reindexing the
    /// remaining variables.
    pub fn drop_variable(&self, i: usize) -> Result<Self, FormError> {
        let mut new_vars = self.vars.clone();
        new_vars.remove(i);
        let mut out = Self::zero(&new_vars, self.k);
        for (idx, p) in &self.comps {
            if idx.contains(&i) {
                return Err(FormError::InvalidComponent(format!(
                    "cannot drop {}: a d{} component is present",
                    self.vars[i], self.vars[i]
                )));
            }
            let mut terms = Vec::new();
            for (d, c) in p.terms() {
                if d.0[i] != 0 {
                    return Err(FormError::VariableMismatch(format!(
                        "cannot drop {}: a coefficient depends on it",
                        self.vars[i]
                    )));
                }
                let mut nd = d.0.clone();
                nd.remove(i);
                terms.push((Multidegree(nd), c.clone()));
            }
            let nidx: Vec<usize> = idx.iter().map(|&j| if j > i { j - 1 } else { j }).collect();
            out.add_component(nidx, LaurentPoly::from_terms(&new_vars, terms));
        }
        Ok(out)
    }

    /// Interior product with the weighted Euler vector field
    /// `E = Σ_s w_s t_s ∂/∂t_s`.
    pub fn euler_contract(&self, w: &WeightVector) -> Self {
        assert_eq!(w.len(), self.vars.len());
        assert!(self.k >= 1, "interior product needs positive degree");
        let mut out = Self::zero(&self.vars, self.k - 1);
        for (idx, p) in &self.comps {
            for (pos, &s) in idx.iter().enumerate() {
                // i_E picks out dt_s ↦ w_s t_s with sign (−1)^pos.
                let mut rem = idx.clone();
                rem.remove(pos);
                let ws = S::from_rational(&w.0[s]);
                let mut q = p.mul_monomial(&Multidegree::unit(self.vars.len(), s), &ws);
                if pos % 2 == 1 {
                    q = q.neg();
                }
                out.add_component(rem, q);
            }
        }
        out
    }

    /// Weighted degree of a single form term `t^c dt_{i1}∧…∧dt_{ik}`:
    /// `⟨c,w⟩ + w_{i1} + … + w_{ik}` (so `dt_i/t_i` has degree zero).
    fn term_form_degree(
        deg: &Multidegree,
        idx: &[usize],
        w: &WeightVector,
    ) -> num_rational::BigRational {
        let mut acc = deg.weighted_degree(w);
        for &i in idx {
            acc += w.0[i].clone();
        }
        acc
    }

    /// Drop all terms of weighted form degree strictly above `bound`.
    pub fn truncate_form_degree(
        &self,
        w: &WeightVector,
        bound: &num_rational::BigRational,
    ) -> Self {
        let mut out = Self::zero(&self.vars, self.k);
        for (idx, p) in &self.comps {
            let mut kept = Vec::new();
            for (d, c) in p.terms() {
                if Self::term_form_degree(d, idx, w) <= *bound {
                    kept.push((d.clone(), c.clone()));
                }
            }
            out.add_component(idx.clone(), LaurentPoly::from_terms(&self.vars, kept));
        }
        out
    }

    /// Smallest weighted form degree among terms, if any.
    pub fn min_form_degree(&self, w: &WeightVector) -> Option<num_rational::BigRational> {
        let mut best: Option<num_rational::BigRational> = None;
        for (idx, p) in &self.comps {
            for (d, _) in p.terms() {
                let fd = Self::term_form_degree(d, idx, w);
                best = Some(match best {
                    None => fd,
                    Some(b) => b.min(fd),
                });
            }
        }
        best
    }

    /// Split into quasihomogeneous slices by weighted form degree.
    pub fn graded_parts(
        &self,
        w: &WeightVector,
    ) -> std::collections::BTreeMap<num_rational::BigRational, Self> {
        let mut out: std::collections::BTreeMap<num_rational::BigRational, Self> =
            std::collections::BTreeMap::new();
        for (idx, p) in &self.comps {
            for (d, c) in p.terms() {
                let fd = Self::term_form_degree(d, idx, w);
                out.entry(fd)
                    .or_insert_with(|| Self::zero(&self.vars, self.k))
                    .add_component(
                        idx.clone(),
                        LaurentPoly::monomial(&self.vars, d.clone(), c.clone()),
                    );
            }
        }
        out
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&LaurentPoly<S>) -> LaurentPoly<T>) -> ScalarKForm<T> {
        let mut out = ScalarKForm::zero(&self.vars, self.k);
        for (idx, p) in &self.comps {
            let q = f(p);
            out.add_component(idx.clone(), q);
        }
        out
    }
}

impl<S: Scalar> fmt::Display for ScalarKForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, p) in &self.comps {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({p})")?;
            for (pos, &i) in idx.iter().enumerate() {
                if pos == 0 {
                    write!(f, " d{}", self.vars[i])?;
                } else {
                    write!(f, "∧d{}", self.vars[i])?;
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// MatrixKForm
// ---------------------------------------------------------------------------

/// An `n×n` matrix of k-forms, all entries of equal degree over one
/// variable list.
#[derive(Clone, PartialEq, Debug)]
pub struct MatrixKForm<S: Scalar> {
    vars: Vec<String>,
    k: usize,
    n: usize,
    entries: Vec<ScalarKForm<S>>, // row-major, length n²
}

impl<S: Scalar> MatrixKForm<S> {
    pub fn zero(vars: &[String], k: usize, n: usize) -> Self {
        MatrixKForm {
            vars: vars.to_vec(),
            k,
            n,
            entries: vec![ScalarKForm::zero(vars, k); n * n],
        }
    }

    /// Identity matrix of 0-forms.
    pub fn identity(vars: &[String], n: usize) -> Self {
        let mut m = Self::zero(vars, 0, n);
        for i in 0..n {
            m.entries[i * n + i] = ScalarKForm::from_poly(LaurentPoly::one(vars));
        }
        m
    }

    pub fn from_entries(rows: Vec<Vec<ScalarKForm<S>>>) -> Result<Self, FormError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(FormError::InvalidComponent(
                "matrix form must be square".into(),
            ));
        }
        if n == 0 {
            return Err(FormError::InvalidComponent("empty matrix form".into()));
        }
        let vars = rows[0][0].vars().to_vec();
        let k = rows[0][0].degree();
        for r in &rows {
            for e in r {
                if e.vars() != vars {
                    return Err(FormError::VariableMismatch(
                        "matrix entries over different variable lists".into(),
                    ));
                }
                if e.degree() != k {
                    return Err(FormError::DegreeMismatch {
                        expected: k,
                        found: e.degree(),
                    });
                }
            }
        }
        Ok(MatrixKForm {
            vars,
            k,
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarKForm<S> {
        &self.entries[i * self.n + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, e: ScalarKForm<S>) {
        assert_eq!(e.degree(), self.k, "entry degree mismatch");
        assert_eq!(e.vars(), &self.vars[..], "entry variable mismatch");
        self.entries[i * self.n + j] = e;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    fn assert_compatible(&self, other: &Self) {
        assert_eq!(self.vars, other.vars, "matrix forms over different variables");
        assert_eq!(self.n, other.n, "matrix size mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        assert_eq!(self.k, other.k, "matrix form degree mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect();
        MatrixKForm {
            vars: self.vars.clone(),
            k: self.k,
            n: self.n,
            entries,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        MatrixKForm {
            vars: self.vars.clone(),
            k: self.k,
            n: self.n,
            entries: self.entries.iter().map(|e| e.neg()).collect(),
        }
    }

    pub fn scale_poly(&self, p: &LaurentPoly<S>) -> Self {
        MatrixKForm {
            vars: self.vars.clone(),
            k: self.k,
            n: self.n,
            entries: self.entries.iter().map(|e| e.scale_poly(p)).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        self.scale_poly(&LaurentPoly::constant(&self.vars, c.clone()))
    }

    /// Matrix wedge product `(Ω∧Θ)_ij = Σ_k ω_ik∧θ_kj`; degrees add. With a
    /// degree-0 operand this is the module action of function matrices on
    /// matrix forms, and the mixed associativity `Ω∧(AΘ) = (ΩA)∧Θ` holds.
    pub fn wedge(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        let n = self.n;
        let mut out = Self::zero(&self.vars, self.k + other.k, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ScalarKForm::zero(&self.vars, self.k + other.k);
                for l in 0..n {
                    acc = acc.add(&self.entry(i, l).wedge(other.entry(l, j)));
                }
                out.entries[i * n + j] = acc;
            }
        }
        out
    }

    /// The adjusted-sign bracket of two matrix 1-forms:
    /// `[Ω,Θ] = Ω∧Θ + Θ∧Ω`.
    pub fn bracket(&self, other: &Self) -> Self {
        assert_eq!(self.k, 1, "bracket is defined for matrix 1-forms");
        assert_eq!(other.k, 1, "bracket is defined for matrix 1-forms");
        self.wedge(other).add(&other.wedge(self))
    }

    /// Entrywise exterior derivative.
    pub fn d(&self) -> Self {
        MatrixKForm {
            vars: self.vars.clone(),
            k: self.k + 1,
            n: self.n,
            entries: self.entries.iter().map(|e| e.d()).collect(),
        }
    }

    /// Left wedge by a scalar form, entrywise: `ξ∧M`.
    pub fn wedge_scalar_left(&self, xi: &ScalarKForm<S>) -> Self {
        assert_eq!(xi.vars(), &self.vars[..], "variable list mismatch");
        MatrixKForm {
            vars: self.vars.clone(),
            k: self.k + xi.degree(),
            n: self.n,
            entries: self.entries.iter().map(|e| xi.wedge(e)).collect(),
        }
    }

    /// Drop all terms of weighted form degree strictly above `bound`,
    /// entrywise.
    pub fn truncate_form_degree(
        &self,
        w: &WeightVector,
        bound: &num_rational::BigRational,
    ) -> Self {
        MatrixKForm {
            vars: self.vars.clone(),
            k: self.k,
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|e| e.truncate_form_degree(w, bound))
                .collect(),
        }
    }

    /// Smallest weighted form degree among all entries' terms, if any.
    pub fn min_form_degree(&self, w: &WeightVector) -> Option<num_rational::BigRational> {
        let mut best: Option<num_rational::BigRational> = None;
        for e in &self.entries {
            if let Some(fd) = e.min_form_degree(w) {
                best = Some(match best {
                    None => fd,
                    Some(b) => b.min(fd),
                });
            }
        }
        best
    }

    /// Split into quasihomogeneous slices by weighted form degree.
    pub fn graded_parts(
        &self,
        w: &WeightVector,
    ) -> std::collections::BTreeMap<num_rational::BigRational, Self> {
        let mut out: std::collections::BTreeMap<num_rational::BigRational, Self> =
            std::collections::BTreeMap::new();
        for i in 0..self.n {
            for j in 0..self.n {
                for (fd, piece) in self.entry(i, j).graded_parts(w) {
                    out.entry(fd)
                        .or_insert_with(|| Self::zero(&self.vars, self.k, self.n))
                        .set_entry(i, j, piece);
                }
            }
        }
        out
    }

    /// Entrywise interior product with the weighted Euler field.
    pub fn euler_contract(&self, w: &WeightVector) -> Self {
        MatrixKForm {
            vars: self.vars.clone(),
            k: self.k - 1,
            n: self.n,
            entries: self.entries.iter().map(|e| e.euler_contract(w)).collect(),
        }
    }

    pub fn trace(&self) -> ScalarKForm<S> {
        let mut acc = ScalarKForm::zero(&self.vars, self.k);
        for i in 0..self.n {
            acc = acc.add(self.entry(i, i));
        }
        acc
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.entries[i * n + j].clone();
            }
        }
        out
    }

    pub fn restrict_to_zero(&self, i: usize) -> Result<Self, FormError> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.restrict_to_zero(i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MatrixKForm {
            vars: self.vars.clone(),
            k: self.k,
            n: self.n,
            entries,
        })
    }

    pub fn drop_variable(&self, i: usize) -> Result<Self, FormError> {
        let mut new_vars = self.vars.clone();
        new_vars.remove(i);
        let entries = self
            .entries
            .iter()
            .map(|e| e.drop_variable(i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MatrixKForm {
            vars: new_vars,
            k: self.k,
            n: self.n,
            entries,
        })
    }

    pub fn map_entries(&self, f: impl Fn(&ScalarKForm<S>) -> ScalarKForm<S>) -> Self {
        let entries: Vec<_> = self.entries.iter().map(&f).collect();
        assert!(entries.iter().all(|e| e.degree() == entries[0].degree()));
        MatrixKForm {
            vars: self.vars.clone(),
            k: entries[0].degree(),
            n: self.n,
            entries,
        }
    }
}

impl<S: Scalar> fmt::Display for MatrixKForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            write!(f, "[ ")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, " | ")?;
                }
                write!(f, "{}", self.entry(i, j))?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// PolyMap and pullback
// ---------------------------------------------------------------------------

/// A polynomial map from a space with `new_vars` into the space a form
/// lives on: one image polynomial (in `new_vars`) per form variable.
/// Substitution into negative powers is allowed only where the image is a
/// single Laurent term, so the result stays a Laurent polynomial.
#[derive(Clone, Debug)]
pub struct PolyMap<S: Scalar> {
    new_vars: Vec<String>,
    images: Vec<LaurentPoly<S>>,
}

impl<S: Scalar> PolyMap<S> {
    pub fn new(new_vars: &[String], images: Vec<LaurentPoly<S>>) -> Result<Self, FormError> {
        for img in &images {
            if img.vars() != new_vars {
                return Err(FormError::VariableMismatch(
                    "map component not expressed in the map's own variables".into(),
                ));
            }
        }
        Ok(PolyMap {
            new_vars: new_vars.to_vec(),
            images,
        })
    }

    pub fn new_vars(&self) -> &[String] {
        &self.new_vars
    }

    pub fn images(&self) -> &[LaurentPoly<S>] {
        &self.images
    }

    /// Substitute the images into a polynomial over the form variables.
    pub fn substitute(&self, p: &LaurentPoly<S>) -> Result<LaurentPoly<S>, FormError> {
        if p.num_vars() != self.images.len() {
            return Err(FormError::ArityMismatch {
                expected: p.num_vars(),
                found: self.images.len(),
            });
        }
        let mut acc = LaurentPoly::zero(&self.new_vars);
        for (d, c) in p.terms() {
            let mut term = LaurentPoly::constant(&self.new_vars, c.clone());
            for (j, &b) in d.0.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                if b > 0 {
                    term = term.mul(&self.images[j].pow(b as u32));
                } else {
                    // Negative power: image must be a single invertible term.
                    let (mdeg, mc) = self.images[j].as_monomial().ok_or_else(|| {
                        FormError::NonMonomialSubstitution(format!(
                            "component {} raised to power {}",
                            j, b
                        ))
                    })?;
                    let mc_inv = mc.inv().ok_or_else(|| {
                        FormError::NonMonomialSubstitution(format!(
                            "component {} vanishes identically",
                            j
                        ))
                    })?;
                    let inv = LaurentPoly::monomial(&self.new_vars, mdeg.neg(), mc_inv);
                    term = term.mul(&inv.pow((-b) as u32));
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Differential of the j-th image as a 1-form over the new variables.
    fn image_differential(&self, j: usize) -> ScalarKForm<S> {
        let mut out = ScalarKForm::zero(&self.new_vars, 1);
        for s in 0..self.new_vars.len() {
            let dp = self.images[j].derivative(s);
            out.add_component(vec![s], dp);
        }
        out
    }

    /// Pullback of a scalar k-form: substitute coefficients, replace each
    /// `dt_{i}` by the differential of the i-th image, and expand.
    pub fn pullback(&self, omega: &ScalarKForm<S>) -> Result<ScalarKForm<S>, FormError> {
        if omega.num_vars() != self.images.len() {
            return Err(FormError::ArityMismatch {
                expected: omega.num_vars(),
                found: self.images.len(),
            });
        }
        // A k-form pulls back to degree k, except that k beyond the new
        // variable count forces zero (returned at the highest representable
        // degree).
        if omega.degree() > self.new_vars.len() {
            return Ok(ScalarKForm::zero(&self.new_vars, self.new_vars.len()));
        }
        let mut acc = ScalarKForm::zero(&self.new_vars, omega.degree());
        for (idx, p) in omega.components() {
            let coeff = self.substitute(p)?;
            let mut piece = ScalarKForm::from_poly(coeff);
            for &i in idx {
                piece = piece.wedge(&self.image_differential(i));
            }
            // piece now has degree = omega.degree()
            acc = acc.add(&piece);
        }
        Ok(acc)
    }

    /// Entrywise pullback of a matrix form.
    pub fn pullback_matrix(&self, omega: &MatrixKForm<S>) -> Result<MatrixKForm<S>, FormError> {
        let n = omega.size();
        let deg = omega.degree().min(self.new_vars.len());
        let mut out = MatrixKForm::zero(&self.new_vars, deg, n);
        for i in 0..n {
            for j in 0..n {
                let e = self.pullback(omega.entry(i, j))?;
                out.set_entry(i, j, e);
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// de Rham division
// ---------------------------------------------------------------------------

/// Constructive division of a k-form by a 1-form: returns `θ` of degree
/// `k−1` with `θ∧ξ = ω` exactly, built by splitting off the pivot
/// direction (`ω = dt_p∧ψ + ρ`, `θ = (−1)^(k−1)ψ/c_p`). Divisibility holds
/// exactly when `ω∧ξ = 0`, and the pivot coefficient of `ξ` must be a
/// nonzero constant or a monomial so that it is invertible (in the latter
/// case `θ` acquires Laurent poles along the monomial's locus).
pub fn divide_by<S: Scalar>(
    omega: &ScalarKForm<S>,
    xi: &ScalarKForm<S>,
    pivot: usize,
) -> Result<ScalarKForm<S>, FormError> {
    if xi.degree() != 1 {
        return Err(FormError::DegreeMismatch {
            expected: 1,
            found: xi.degree(),
        });
    }
    if omega.vars() != xi.vars() {
        return Err(FormError::VariableMismatch(
            "dividend and divisor over different variable lists".into(),
        ));
    }
    let k = omega.degree();
    if k == 0 {
        return Err(FormError::DegreeMismatch {
            expected: 1,
            found: 0,
        });
    }
    let m = omega.num_vars();
    if pivot >= m {
        return Err(FormError::InvalidComponent(format!(
            "pivot index {pivot} out of range for {m} variables"
        )));
    }
    let c_p = xi.coeff(&[pivot]);
    let (c_deg, c_coeff) = c_p.as_monomial().ok_or(FormError::PivotNotInvertible)?;
    let c_inv_coeff = c_coeff.inv().ok_or(FormError::PivotNotInvertible)?;

    // Split ω = dt_p∧ψ + ρ.
    let mut psi = ScalarKForm::zero(omega.vars(), k - 1);
    let mut rho = ScalarKForm::zero(omega.vars(), k);
    for (idx, p) in omega.components() {
        match idx.iter().position(|&i| i == pivot) {
            Some(pos) => {
                let mut rest = idx.clone();
                rest.remove(pos);
                let q = if pos % 2 == 0 { p.clone() } else { p.neg() };
                psi.add_component(rest, q);
            }
            None => rho.add_component(idx.clone(), p.clone()),
        }
    }

    // φ = ψ / c_p (division by an invertible monomial).
    let phi = psi.map_coeffs(|p| p.mul_monomial(&c_deg.neg(), &c_inv_coeff));

    // ξ_rest = ξ − c_p dt_p.
    let mut xi_rest = ScalarKForm::zero(omega.vars(), 1);
    for (idx, p) in xi.components() {
        if idx[0] != pivot {
            xi_rest.add_component(idx.clone(), p.clone());
        }
    }

    // Divisibility: ρ must equal ξ_rest∧φ = (−1)^(k−1) φ∧ξ_rest.
    let remainder = rho.sub(&xi_rest.wedge(&phi));
    if !remainder.is_zero() {
        return Err(FormError::NotDivisible);
    }

    let theta = if (k - 1) % 2 == 0 { phi } else { phi.neg() };
    Ok(theta)
}
