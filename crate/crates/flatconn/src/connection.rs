//! Meromorphic connections: declared polar loci, flatness verification,
//! the gauge action, truncated fundamental solutions at regular points, and
//! monomial solutions of Euler systems.
//!
//! A [`Connection`] represents the matrix 1-form `Ω = N / D`: the stored
//! numerator `N` is a matrix 1-form with Laurent-polynomial entries whose
//! negative exponents are confined to declared coordinate components
//! `{t_i = 0}`, and the implicit denominator `D` is the product of the
//! declared general (equation-type) components. All analysis is done by
//! exact polynomial arithmetic on cleared forms — no rational-function
//! arithmetic appears anywhere.

use crate::exterior::{FormError, MatrixKForm, ScalarKForm};
use crate::scalars::{ExactScalar, LaurentPoly, Multidegree, Scalar, WeightVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;

/// Errors raised while building or transforming connections.
#[derive(Debug, Clone, PartialEq)]
pub enum ConnError {
    /// A negative exponent appeared on a variable that is not a declared
    /// coordinate component.
    UndeclaredPole(String),
    /// A declared equation component failed validation.
    BadComponent(String),
    /// The numerator form had the wrong degree or shape.
    BadNumerator(String),
    /// A gauge series has a non-invertible constant part.
    GaugeNotInvertible,
    /// An explicitly supplied gauge inverse failed the H·H⁻¹ = E check.
    GaugeInverseMismatch,
    /// The graded solution recursion hit a non-closed right-hand side.
    NotIntegrableAtDegree(String),
    /// An operation requiring a holomorphic connection received a
    /// meromorphic one.
    NotHolomorphic(String),
    /// Monomial-solution extraction on a non-diagonal Euler system.
    DiagonalRequired,
    /// A form-level operation failed.
    Form(FormError),
}

impl fmt::Display for ConnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConnError::UndeclaredPole(s) => write!(f, "undeclared pole: {s}"),
            ConnError::BadComponent(s) => write!(f, "invalid polar component: {s}"),
            ConnError::BadNumerator(s) => write!(f, "invalid connection numerator: {s}"),
            ConnError::GaugeNotInvertible => write!(f, "gauge not invertible at origin"),
            ConnError::GaugeInverseMismatch => {
                write!(f, "supplied gauge inverse fails the identity check")
            }
            ConnError::NotIntegrableAtDegree(r) => write!(f, "not integrable at degree {r}"),
            ConnError::NotHolomorphic(s) => write!(f, "connection not holomorphic: {s}"),
            ConnError::DiagonalRequired => {
                write!(f, "exact monomial solutions require diagonal residues")
            }
            ConnError::Form(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ConnError {}

impl From<FormError> for ConnError {
    fn from(e: FormError) -> Self {
        ConnError::Form(e)
    }
}

// ---------------------------------------------------------------------------
// Constant matrices
// ---------------------------------------------------------------------------

/// A constant `n×n` matrix over a scalar domain, with the exact linear
/// algebra needed by gauge transforms and Euler systems.
#[derive(Clone, PartialEq, Debug)]
pub struct ConstMatrix<S: Scalar> {
    n: usize,
    data: Vec<S>, // row-major
}

impl<S: Scalar> ConstMatrix<S> {
    pub fn zero(n: usize) -> Self {
        ConstMatrix {
            n,
            data: vec![S::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        ConstMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Integer-entry convenience constructor.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| S::from_i64(v)).collect())
                .collect(),
        )
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.n + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).all(|j| i == j || self.data[i * n + j].is_zero()))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        ConstMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        ConstMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        ConstMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a.neg()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = S::zero();
                for l in 0..n {
                    acc = acc.add(&self.data[i * n + l].mul(&other.data[l * n + j]));
                }
                out.data[i * n + j] = acc;
            }
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        ConstMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a.mul(c)).collect(),
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn trace(&self) -> S {
        let mut acc = S::zero();
        for i in 0..self.n {
            acc = acc.add(&self.data[i * self.n + i]);
        }
        acc
    }

    /// Gauss–Jordan inverse; `None` when singular. Exact over the exact
    /// domain; with floats the pivot maximizes the modulus.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            // Pivot selection: any nonzero row in the exact domain, the
            // largest-modulus row in floats.
            let pivot_row = if S::is_exact() {
                (col..n).find(|&r| !a[r * n + col].is_zero())?
            } else {
                let mut best = None;
                let mut best_abs = 0.0f64;
                for r in col..n {
                    let v = a[r * n + col].abs_f64();
                    if v > best_abs {
                        best_abs = v;
                        best = Some(r);
                    }
                }
                best?
            };
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                    inv.swap(col * n + j, pivot_row * n + j);
                }
            }
            let p = a[col * n + col].clone();
            let pinv = p.inv()?;
            for j in 0..n {
                a[col * n + j] = a[col * n + j].mul(&pinv);
                inv[col * n + j] = inv[col * n + j].mul(&pinv);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[r * n + col].clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a[r * n + j] = a[r * n + j].sub(&factor.mul(&a[col * n + j]));
                    inv[r * n + j] = inv[r * n + j].sub(&factor.mul(&inv[col * n + j]));
                }
            }
        }
        Some(ConstMatrix { n, data: inv })
    }

    /// Embed as a matrix of constant 0-forms over the given variables.
    pub fn to_matrix_form(&self, vars: &[String]) -> MatrixKForm<S> {
        let n = self.n;
        let mut out = MatrixKForm::zero(vars, 0, n);
        for i in 0..n {
            for j in 0..n {
                let c = self.get(i, j).clone();
                if !c.is_zero() {
                    out.set_entry(i, j, ScalarKForm::from_poly(LaurentPoly::constant(vars, c)));
                }
            }
        }
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ConstMatrix<T> {
        ConstMatrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Largest entry modulus (diagnostic norm).
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|x| x.abs_f64()).fold(0.0, f64::max)
    }
}

impl<S: Scalar> fmt::Display for ConstMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            write!(f, "[")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Polar components and the Connection type
// ---------------------------------------------------------------------------

/// One declared component of the polar locus: either a coordinate
/// hyperplane `{t_i = 0}` (poles stored as negative Laurent exponents) or a
/// general square-free polynomial equation `{f = 0}` (poles stored through
/// the implicit denominator).
#[derive(Clone, PartialEq, Debug)]
pub enum PolarComponent {
    Coordinate(usize),
    Equation(LaurentPoly<ExactScalar>),
}

impl PolarComponent {
    /// Human-readable description for diagnostics.
    pub fn describe(&self, vars: &[String]) -> String {
        match self {
            PolarComponent::Coordinate(i) => format!("{{{} = 0}}", vars[*i]),
            PolarComponent::Equation(f) => format!("{{{f} = 0}}"),
        }
    }
}

/// A meromorphic connection `dX = ΩX` with `Ω = N/D`: `N` the stored
/// Laurent numerator (coordinate poles as negative exponents) and `D` the
/// product of the declared equation components.
#[derive(Clone, PartialEq, Debug)]
pub struct Connection {
    vars: Vec<String>,
    weights: WeightVector,
    numerator: MatrixKForm<ExactScalar>,
    polar: Vec<PolarComponent>,
}

impl Connection {
    /// Validated constructor.
    ///
    /// Checks: the numerator is a matrix 1-form over `vars`; every declared
    /// equation is a non-constant square-free polynomial, pairwise coprime
    /// with the other equations and not divisible by any declared
    /// coordinate variable; every negative exponent in the numerator sits
    /// on a declared coordinate variable.
    pub fn new(
        vars: &[String],
        weights: WeightVector,
        numerator: MatrixKForm<ExactScalar>,
        polar: Vec<PolarComponent>,
    ) -> Result<Self, ConnError> {
        if numerator.degree() != 1 {
            return Err(ConnError::BadNumerator(format!(
                "expected a matrix 1-form, found degree {}",
                numerator.degree()
            )));
        }
        if numerator.vars() != vars {
            return Err(ConnError::BadNumerator(
                "numerator variable list differs from the connection's".into(),
            ));
        }
        if weights.len() != vars.len() {
            return Err(ConnError::BadNumerator(
                "weight vector length differs from the variable count".into(),
            ));
        }

        let mut coord_set = BTreeSet::new();
        let mut equations: Vec<&LaurentPoly<ExactScalar>> = Vec::new();
        for comp in &polar {
            match comp {
                PolarComponent::Coordinate(i) => {
                    if *i >= vars.len() {
                        return Err(ConnError::BadComponent(format!(
                            "coordinate index {i} out of range"
                        )));
                    }
                    if !coord_set.insert(*i) {
                        return Err(ConnError::BadComponent(format!(
                            "coordinate component {} declared twice",
                            vars[*i]
                        )));
                    }
                }
                PolarComponent::Equation(f) => {
                    if f.vars() != vars {
                        return Err(ConnError::BadComponent(
                            "equation over a different variable list".into(),
                        ));
                    }
                    if !f.is_polynomial() {
                        return Err(ConnError::BadComponent(format!(
                            "equation {f} has negative exponents"
                        )));
                    }
                    if f.is_constant() {
                        return Err(ConnError::BadComponent(format!(
                            "equation {f} is constant"
                        )));
                    }
                    if !f.is_square_free() {
                        return Err(ConnError::BadComponent(format!(
                            "equation {f} is not square-free"
                        )));
                    }
                    equations.push(f);
                }
            }
        }
        // Pairwise coprimality between equations.
        for (a, fa) in equations.iter().enumerate() {
            for fb in equations.iter().skip(a + 1) {
                let g = fa.poly_gcd(fb);
                if !g.is_constant() {
                    return Err(ConnError::BadComponent(format!(
                        "equations {fa} and {fb} share the factor {g}"
                    )));
                }
            }
        }
        // Equations must not absorb a declared coordinate component.
        for f in &equations {
            for &i in &coord_set {
                if f.min_exponent(i).unwrap_or(0) >= 1 {
                    return Err(ConnError::BadComponent(format!(
                        "equation {} is divisible by the declared coordinate {}",
                        f, vars[i]
                    )));
                }
            }
        }
        // Negative exponents only on declared coordinates.
        let n = numerator.size();
        for i in 0..n {
            for j in 0..n {
                for (idx, p) in numerator.entry(i, j).components() {
                    for (d, _) in p.terms() {
                        for (v, &e) in d.0.iter().enumerate() {
                            if e < 0 && !coord_set.contains(&v) {
                                return Err(ConnError::UndeclaredPole(format!(
                                    "entry ({i},{j}), component {idx:?}: negative power of {}",
                                    vars[v]
                                )));
                            }
                        }
                    }
                }
            }
        }

        Ok(Connection {
            vars: vars.to_vec(),
            weights,
            numerator,
            polar,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn size(&self) -> usize {
        self.numerator.size()
    }

    pub fn numerator(&self) -> &MatrixKForm<ExactScalar> {
        &self.numerator
    }

    pub fn polar_components(&self) -> &[PolarComponent] {
        &self.polar
    }

    /// The implicit denominator: product of the declared equation
    /// components (one when there are none).
    pub fn denominator(&self) -> LaurentPoly<ExactScalar> {
        let mut d = LaurentPoly::one(&self.vars);
        for comp in &self.polar {
            if let PolarComponent::Equation(f) = comp {
                d = d.mul(f);
            }
        }
        d
    }

    /// The cleared differential `D·dN − dD∧N`, which equals `D²·dΩ`.
    pub fn cleared_domega(&self) -> MatrixKForm<ExactScalar> {
        let d_poly = self.denominator();
        let dn = self.numerator.d().scale_poly(&d_poly);
        let dd = ScalarKForm::from_poly(d_poly).d();
        dn.sub(&self.numerator.wedge_scalar_left(&dd))
    }

    /// Flatness defect with equation denominators cleared:
    /// `D·dN − dD∧N − N∧N`, which equals `D²·(dΩ − Ω∧Ω)`. The connection
    /// is flat exactly when this matrix 2-form is zero; with no declared
    /// equations it is literally `dΩ − Ω∧Ω`.
    pub fn flatness_residual(&self) -> MatrixKForm<ExactScalar> {
        self.cleared_domega()
            .sub(&self.numerator.wedge(&self.numerator))
    }

    pub fn is_flat(&self) -> bool {
        self.flatness_residual().is_zero()
    }

    /// Gauge transform by an exactly invertible matrix of Laurent
    /// polynomials with the inverse supplied explicitly:
    /// `Ω ↦ dH·H⁻¹ + HΩH⁻¹`. The product `H·H⁻¹` is verified to be the
    /// identity. Coordinate components acquiring new poles (from Laurent
    /// entries of `H` or `H⁻¹`) are declared automatically on the result.
    pub fn gauge_exact(
        &self,
        h: &MatrixKForm<ExactScalar>,
        h_inv: &MatrixKForm<ExactScalar>,
    ) -> Result<Connection, ConnError> {
        if h.degree() != 0 || h_inv.degree() != 0 {
            return Err(ConnError::BadNumerator(
                "gauge matrices must be matrices of functions (0-forms)".into(),
            ));
        }
        if h.size() != self.size() || h_inv.size() != self.size() {
            return Err(ConnError::BadNumerator("gauge matrix size mismatch".into()));
        }
        let ident = MatrixKForm::identity(&self.vars, self.size());
        if h.wedge(h_inv) != ident || h_inv.wedge(h) != ident {
            return Err(ConnError::GaugeInverseMismatch);
        }
        let d_poly = self.denominator();
        let dh_hinv = h.d().wedge(h_inv).scale_poly(&d_poly);
        let conj = h.wedge(&self.numerator).wedge(h_inv);
        let new_num = dh_hinv.add(&conj);
        let polar = self.extend_polar_for(&new_num);
        Connection::new(&self.vars, self.weights.clone(), new_num, polar)
    }

    /// Gauge transform by a truncated series `H` with invertible constant
    /// part: `Ω ↦ dH·H⁻¹ + HΩH⁻¹`, truncated at weighted form degree
    /// `order(H) + deg_w(D)` on the numerator so the underlying rational
    /// form is accurate through weighted degree `order(H)`.
    pub fn gauge_series(&self, h: &MatrixSeries<ExactScalar>) -> Result<Connection, ConnError> {
        if h.vars() != self.vars {
            return Err(ConnError::BadNumerator(
                "gauge series over a different variable list".into(),
            ));
        }
        if h.size() != self.size() {
            return Err(ConnError::BadNumerator("gauge matrix size mismatch".into()));
        }
        let h_inv = h.inverse()?;
        let d_poly = self.denominator();
        let bound = h.order()
            + d_poly
                .max_weighted_degree(&self.weights)
                .unwrap_or_else(BigRational::zero);
        let w = &self.weights;

        let ht = h.total();
        let hit = h_inv.total();
        let dh_hinv = ht
            .d()
            .wedge(hit)
            .scale_poly(&d_poly)
            .truncate_form_degree(w, &bound);
        let conj = ht
            .wedge(&self.numerator)
            .truncate_form_degree(w, &bound)
            .wedge(hit)
            .truncate_form_degree(w, &bound);
        let new_num = dh_hinv.add(&conj);
        let polar = self.extend_polar_for(&new_num);
        Connection::new(&self.vars, self.weights.clone(), new_num, polar)
    }

    /// Polar declaration for a transformed numerator: keep the existing
    /// components and declare any coordinate that newly carries negative
    /// exponents.
    fn extend_polar_for(&self, num: &MatrixKForm<ExactScalar>) -> Vec<PolarComponent> {
        let mut polar = self.polar.clone();
        let declared: BTreeSet<usize> = polar
            .iter()
            .filter_map(|c| match c {
                PolarComponent::Coordinate(i) => Some(*i),
                PolarComponent::Equation(_) => None,
            })
            .collect();
        let n = num.size();
        let mut needed = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                for (_, p) in num.entry(i, j).components() {
                    for v in 0..self.vars.len() {
                        if p.min_exponent(v).unwrap_or(0) < 0 {
                            needed.insert(v);
                        }
                    }
                }
            }
        }
        for v in needed {
            if !declared.contains(&v) {
                polar.push(PolarComponent::Coordinate(v));
            }
        }
        polar
    }

    /// Truncated fundamental solution at the origin: `X` with `X(0) = E`
    /// and `dX = ΩX` through weighted degree `order`, built degree by
    /// degree. Requires a connection holomorphic at the origin (no
    /// negative exponents, no equation components). An inconsistent
    /// (non-closed) right-hand side at some degree — the signature of a
    /// non-flat input — is reported with the offending degree.
    pub fn local_solution(&self, order: &BigRational) -> Result<MatrixSeries<ExactScalar>, ConnError> {
        for comp in &self.polar {
            if let PolarComponent::Equation(f) = comp {
                return Err(ConnError::NotHolomorphic(format!(
                    "declared equation component {f}"
                )));
            }
        }
        let n = self.size();
        for i in 0..n {
            for j in 0..n {
                for (_, p) in self.numerator.entry(i, j).components() {
                    if !p.is_polynomial() {
                        return Err(ConnError::NotHolomorphic(format!(
                            "entry ({i},{j}) has negative exponents"
                        )));
                    }
                }
            }
        }

        let w = &self.weights;
        let mut x = MatrixSeries::identity(&self.vars, w.clone(), order.clone(), n);
        let mut processed: BTreeSet<BigRational> = BTreeSet::new();
        loop {
            let rhs = self
                .numerator
                .wedge(x.total())
                .truncate_form_degree(w, order);
            let parts = rhs.graded_parts(w);
            let next = parts
                .keys()
                .find(|r| r.is_positive() && !processed.contains(*r))
                .cloned();
            let Some(r) = next else { break };
            let rho = &parts[&r];
            // Euler homotopy: the unique quasihomogeneous candidate.
            let r_scalar = ExactScalar::new(r.clone(), BigRational::zero());
            let r_inv = r_scalar.inv().expect("degree is positive");
            let xr = rho.euler_contract(w).scale(&r_inv);
            if xr.d() != *rho {
                return Err(ConnError::NotIntegrableAtDegree(r.to_string()));
            }
            x.add_assign_matrix(&xr);
            processed.insert(r);
        }
        Ok(x)
    }
}

// ---------------------------------------------------------------------------
// Euler connections
// ---------------------------------------------------------------------------

/// A connection with constant residue matrices on coordinate hyperplanes:
/// `Ω₀ = A₁ dt₁/t₁ + … + A_k dt_k/t_k` (the first `k` variables carry the
/// poles).
#[derive(Clone, Debug)]
pub struct EulerConnection<S: Scalar> {
    vars: Vec<String>,
    residues: Vec<ConstMatrix<S>>,
}

impl<S: Scalar> EulerConnection<S> {
    pub fn new(vars: &[String], residues: Vec<ConstMatrix<S>>) -> Result<Self, ConnError> {
        if residues.is_empty() || residues.len() > vars.len() {
            return Err(ConnError::BadComponent(format!(
                "need 1..={} residue matrices, found {}",
                vars.len(),
                residues.len()
            )));
        }
        let n = residues[0].size();
        if residues.iter().any(|a| a.size() != n) {
            return Err(ConnError::BadComponent(
                "residue matrices of different sizes".into(),
            ));
        }
        Ok(EulerConnection {
            vars: vars.to_vec(),
            residues,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn residues(&self) -> &[ConstMatrix<S>] {
        &self.residues
    }

    pub fn size(&self) -> usize {
        self.residues[0].size()
    }

    /// All pairwise commutators `[A_i, A_j]`, `i < j`.
    pub fn pairwise_commutators(&self) -> Vec<((usize, usize), ConstMatrix<S>)> {
        let k = self.residues.len();
        let mut out = Vec::new();
        for i in 0..k {
            for j in (i + 1)..k {
                out.push(((i, j), self.residues[i].commutator(&self.residues[j])));
            }
        }
        out
    }

    /// Exact flatness test: all pairwise commutators vanish.
    pub fn is_flat(&self) -> bool {
        self.pairwise_commutators().iter().all(|(_, c)| c.is_zero())
    }

    /// Largest commutator entry modulus (float diagnostic).
    pub fn max_commutator_norm(&self) -> f64 {
        self.pairwise_commutators()
            .iter()
            .map(|(_, c)| c.max_norm())
            .fold(0.0, f64::max)
    }
}

impl EulerConnection<ExactScalar> {
    /// Realize as a full [`Connection`] with unit weights.
    pub fn to_connection(&self) -> Result<Connection, ConnError> {
        let m = self.vars.len();
        let n = self.size();
        let mut num = MatrixKForm::zero(&self.vars, 1, n);
        for i in 0..n {
            for j in 0..n {
                let mut comps = Vec::new();
                for (s, a) in self.residues.iter().enumerate() {
                    let c = a.get(i, j).clone();
                    if !c.is_zero() {
                        let mut deg = Multidegree::zeros(m);
                        deg.0[s] = -1;
                        comps.push((vec![s], LaurentPoly::monomial(&self.vars, deg, c)));
                    }
                }
                num.set_entry(i, j, ScalarKForm::from_components(&self.vars, 1, comps)?);
            }
        }
        let polar = (0..self.residues.len()).map(PolarComponent::Coordinate).collect();
        Connection::new(&self.vars, WeightVector::units(m), num, polar)
    }

    /// All Laurent-monomial solutions `t^a·x` of `dx = Ω₀x` for diagonal
    /// exact residues: one pair per basis vector whose full exponent
    /// vector is integral (solutions with coinciding exponent vectors span
    /// the corresponding eigenspace jointly). The exponent entries range
    /// over the residue spectra, so the list is complete.
    pub fn monomial_solutions(
        &self,
    ) -> Result<Vec<(Multidegree, Vec<ExactScalar>)>, ConnError> {
        if !self.residues.iter().all(|a| a.is_diagonal()) {
            return Err(ConnError::DiagonalRequired);
        }
        let m = self.vars.len();
        let n = self.size();
        let mut out = Vec::new();
        for i in 0..n {
            let mut deg = Multidegree::zeros(m);
            let mut integral = true;
            for (s, a) in self.residues.iter().enumerate() {
                let ev = a.get(i, i);
                match ev.to_integer() {
                    Some(z) => {
                        use num_traits::ToPrimitive;
                        deg.0[s] = z.to_i64().ok_or_else(|| {
                            ConnError::BadComponent("eigenvalue exceeds i64 range".into())
                        })?;
                    }
                    None => {
                        integral = false;
                        break;
                    }
                }
            }
            if integral {
                let mut e = vec![ExactScalar::zero(); n];
                e[i] = ExactScalar::one();
                out.push((deg, e));
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Truncated matrix series
// ---------------------------------------------------------------------------

/// A matrix function series truncated at a weighted degree: an `n×n`
/// matrix of Laurent polynomials all of whose terms have weighted degree
/// at most `order`, graded by the accompanying weights. Quasihomogeneous
/// parts are recovered by [`MatrixSeries::part`]/[`MatrixSeries::parts`].
#[derive(Clone, PartialEq, Debug)]
pub struct MatrixSeries<S: Scalar> {
    vars: Vec<String>,
    weights: WeightVector,
    order: BigRational,
    mat: MatrixKForm<S>,
}

impl<S: Scalar> MatrixSeries<S> {
    pub fn identity(vars: &[String], weights: WeightVector, order: BigRational, n: usize) -> Self {
        MatrixSeries {
            vars: vars.to_vec(),
            weights,
            order,
            mat: MatrixKForm::identity(vars, n),
        }
    }

    /// Build from a matrix of functions, truncating at `order`.
    pub fn from_matrix(
        mat: MatrixKForm<S>,
        weights: WeightVector,
        order: BigRational,
    ) -> Result<Self, ConnError> {
        if mat.degree() != 0 {
            return Err(ConnError::BadNumerator(
                "series parts must be matrices of functions (0-forms)".into(),
            ));
        }
        let vars = mat.vars().to_vec();
        let truncated = mat.truncate_form_degree(&weights, &order);
        Ok(MatrixSeries {
            vars,
            weights,
            order,
            mat: truncated,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn order(&self) -> BigRational {
        self.order.clone()
    }

    pub fn size(&self) -> usize {
        self.mat.size()
    }

    /// The truncated series as a single matrix of functions.
    pub fn total(&self) -> &MatrixKForm<S> {
        &self.mat
    }

    /// The quasihomogeneous part of weighted degree `r`.
    pub fn part(&self, r: &BigRational) -> MatrixKForm<S> {
        self.parts()
            .remove(r)
            .unwrap_or_else(|| MatrixKForm::zero(&self.vars, 0, self.size()))
    }

    /// All quasihomogeneous parts, keyed by weighted degree (ascending).
    pub fn parts(&self) -> std::collections::BTreeMap<BigRational, MatrixKForm<S>> {
        self.mat.graded_parts(&self.weights)
    }

    pub fn add_assign_matrix(&mut self, m: &MatrixKForm<S>) {
        self.mat = self
            .mat
            .add(m)
            .truncate_form_degree(&self.weights, &self.order);
    }

    /// Truncated product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars, "series over different variables");
        let order = self.order.clone().min(other.order.clone());
        let mat = self
            .mat
            .wedge(&other.mat)
            .truncate_form_degree(&self.weights, &order);
        MatrixSeries {
            vars: self.vars.clone(),
            weights: self.weights.clone(),
            order,
            mat,
        }
    }

    /// Constant part as a constant matrix; fails when a degree-0 entry is
    /// not constant (possible only with zero-weight-degree monomials,
    /// which positive weights exclude).
    fn constant_part(&self) -> ConstMatrix<S> {
        let n = self.size();
        let zero_part = self.part(&BigRational::zero());
        let mut out = ConstMatrix::zero(n);
        for i in 0..n {
            for j in 0..n {
                if let Some(p) = zero_part.entry(i, j).as_poly() {
                    out.set(i, j, p.constant_term());
                }
            }
        }
        out
    }

    /// Series inverse by the geometric series around the constant part;
    /// errors when the constant part is singular.
    pub fn inverse(&self) -> Result<Self, ConnError> {
        let h0 = self.constant_part();
        let h0_inv = h0.inverse().ok_or(ConnError::GaugeNotInvertible)?;
        let h0_inv_form = h0_inv.to_matrix_form(&self.vars);
        let ident = MatrixKForm::identity(&self.vars, self.size());
        // K = E − H₀⁻¹H has strictly positive minimal weighted degree.
        let k = ident.sub(
            &h0_inv_form
                .wedge(&self.mat)
                .truncate_form_degree(&self.weights, &self.order),
        );
        let mut acc = ident.clone();
        let mut term = ident;
        loop {
            term = term
                .wedge(&k)
                .truncate_form_degree(&self.weights, &self.order);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        let inv = acc
            .wedge(&h0_inv_form)
            .truncate_form_degree(&self.weights, &self.order);
        Ok(MatrixSeries {
            vars: self.vars.clone(),
            weights: self.weights.clone(),
            order: self.order.clone(),
            mat: inv,
        })
    }
}

/// Convenience: an integer as the rational order of a series.
pub fn order_of(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Q = ExactScalar;
    type Poly = LaurentPoly<Q>;
    type Form = ScalarKForm<Q>;

    fn vars(m: usize) -> Vec<String> {
        (1..=m).map(|i| format!("t{i}")).collect()
    }

    /// Euler numerator Σ A_s dt_s/t_s over the first `k` variables.
    fn euler_numerator(v: &[String], residues: &[ConstMatrix<Q>]) -> MatrixKForm<Q> {
        let n = residues[0].size();
        let m = v.len();
        let mut num = MatrixKForm::zero(v, 1, n);
        for i in 0..n {
            for j in 0..n {
                let mut f = Form::zero(v, 1);
                for (s, a) in residues.iter().enumerate() {
                    let c = a.get(i, j).clone();
                    if !c.is_zero() {
                        let mut deg = Multidegree::zeros(m);
                        deg.0[s] = -1;
                        f = f.add(
                            &Form::from_components(v, 1, vec![(vec![s], Poly::monomial(v, deg, c))])
                                .unwrap(),
                        );
                    }
                }
                num.set_entry(i, j, f);
            }
        }
        num
    }

    fn euler_connection(v: &[String], residues: Vec<ConstMatrix<Q>>) -> Connection {
        EulerConnection::new(v, residues).unwrap().to_connection().unwrap()
    }

    // --- flatness ------------------------------------------------------------

    #[test]
    fn commuting_euler_is_flat() {
        let v = vars(2);
        let a1 = ConstMatrix::from_i64_rows(&[&[1, 0], &[0, 2]]);
        let a2 = ConstMatrix::from_i64_rows(&[&[3, 0], &[0, 5]]);
        let conn = euler_connection(&v, vec![a1, a2]);
        assert!(conn.flatness_residual().is_zero());
        assert!(conn.is_flat());
    }

    #[test]
    fn noncommuting_euler_residual_matches_expansion_oracle() {
        // dΩ − Ω∧Ω = −[A₁,A₂] dt₁∧dt₂/(t₁t₂) for Ω = A₁dt₁/t₁ + A₂dt₂/t₂.
        let v = vars(2);
        let a1 = ConstMatrix::<Q>::from_i64_rows(&[&[0, 1], &[0, 0]]);
        let a2 = ConstMatrix::<Q>::from_i64_rows(&[&[0, 0], &[1, 0]]);
        let conn = euler_connection(&v, vec![a1.clone(), a2.clone()]);
        let res = conn.flatness_residual();
        assert!(!res.is_zero());

        // Independent oracle: entrywise integer expansion of −[A₁,A₂]
        // attached to the monomial t₁⁻¹t₂⁻¹ dt₁∧dt₂.
        let comm = a1.commutator(&a2);
        for i in 0..2 {
            for j in 0..2 {
                let expect_coeff = comm.get(i, j).neg();
                let got = res.entry(i, j).coeff(&[0, 1]);
                let expect = if expect_coeff.is_zero() {
                    Poly::zero(&v)
                } else {
                    Poly::monomial(&v, Multidegree(vec![-1, -1]), expect_coeff)
                };
                assert_eq!(got, expect);
            }
        }
    }

    #[test]
    fn euler_flatness_iff_commuting_random_ensembles() {
        let mut rng = ChaCha8Rng::seed_from_u64(8841);
        let v = vars(2);
        for _ in 0..20 {
            // Commuting pair: two polynomials in one random matrix.
            let r = ConstMatrix::from_rows(
                (0..2)
                    .map(|_| (0..2).map(|_| Q::from_int(rng.gen_range(-3..=3))).collect())
                    .collect::<Vec<_>>(),
            );
            let a1 = r.mul(&r).add(&ConstMatrix::identity(2).scale(&Q::from_int(2)));
            let a2 = r.scale(&Q::from_int(3)).sub(&ConstMatrix::identity(2));
            let conn = euler_connection(&v, vec![a1.clone(), a2.clone()]);
            assert_eq!(conn.is_flat(), a1.commutator(&a2).is_zero());
            assert!(conn.is_flat());
        }
        // Non-commuting ensembles: flatness must fail exactly when the
        // commutator is nonzero.
        for _ in 0..20 {
            let mk = |rng: &mut ChaCha8Rng| {
                ConstMatrix::from_rows(
                    (0..2)
                        .map(|_| (0..2).map(|_| Q::from_int(rng.gen_range(-3..=3))).collect())
                        .collect::<Vec<_>>(),
                )
            };
            let a1 = mk(&mut rng);
            let a2 = mk(&mut rng);
            let conn = euler_connection(&v, vec![a1.clone(), a2.clone()]);
            assert_eq!(conn.is_flat(), a1.commutator(&a2).is_zero());
        }
    }

    /// Connection with poles on a family of distinct lines through the
    /// origin `t₂ = λ_j t₁`, residues A_j: numerator Σ_j A_j Π_{l≠j}(t₂ −
    /// λ_l t₁) d(t₂ − λ_j t₁), denominator the product of the lines.
    fn line_family_connection(
        v: &[String],
        lambdas: &[i64],
        residues: &[ConstMatrix<Q>],
    ) -> Connection {
        let n = residues[0].size();
        let lines: Vec<Poly> = lambdas
            .iter()
            .map(|&l| Poly::var(v, 1).sub(&Poly::var(v, 0).scale(&Q::from_int(l))))
            .collect();
        let mut num = MatrixKForm::zero(v, 1, n);
        for i in 0..n {
            for j in 0..n {
                let mut f = Form::zero(v, 1);
                for (s, a) in residues.iter().enumerate() {
                    let c = a.get(i, j).clone();
                    if c.is_zero() {
                        continue;
                    }
                    let mut cof = Poly::constant(v, c);
                    for (l, line) in lines.iter().enumerate() {
                        if l != s {
                            cof = cof.mul(line);
                        }
                    }
                    // d(t₂ − λ_s t₁) = dt₂ − λ_s dt₁.
                    let dl = Form::from_components(
                        v,
                        1,
                        vec![
                            (vec![1], Poly::one(v)),
                            (vec![0], Poly::constant(v, Q::from_int(-lambdas[s]))),
                        ],
                    )
                    .unwrap();
                    f = f.add(&dl.scale_poly(&cof));
                }
                num.set_entry(i, j, f);
            }
        }
        let polar = lines.into_iter().map(PolarComponent::Equation).collect();
        Connection::new(v, WeightVector::units(2), num, polar).unwrap()
    }

    #[test]
    fn line_family_with_zero_residue_sum_is_flat() {
        // Three lines, A₃ = −A₁−A₂ with non-commuting A₁, A₂: the residue
        // sum is central (zero), which forces flatness.
        let v = vars(2);
        let a1 = ConstMatrix::<Q>::from_i64_rows(&[&[0, 1], &[0, 0]]);
        let a2 = ConstMatrix::<Q>::from_i64_rows(&[&[0, 0], &[1, 0]]);
        let a3 = a1.add(&a2).neg();
        assert!(!a1.commutator(&a2).is_zero());
        let conn = line_family_connection(&v, &[1, -1, 2], &[a1, a2, a3]);
        assert!(conn.is_flat());
    }

    #[test]
    fn line_family_with_noncentral_sum_is_not_flat() {
        let v = vars(2);
        let a1 = ConstMatrix::<Q>::from_i64_rows(&[&[0, 1], &[0, 0]]);
        let a2 = ConstMatrix::<Q>::from_i64_rows(&[&[0, 0], &[1, 0]]);
        let conn = line_family_connection(&v, &[1, -1], &[a1, a2]);
        assert!(!conn.is_flat());
    }

    // --- validation ------------------------------------------------------------

    #[test]
    fn undeclared_pole_rejected() {
        let v = vars(2);
        let num = {
            let mut m = MatrixKForm::zero(&v, 1, 1);
            m.set_entry(
                0,
                0,
                Form::from_components(
                    &v,
                    1,
                    vec![(vec![0], Poly::monomial(&v, Multidegree(vec![-1, 0]), Q::one()))],
                )
                .unwrap(),
            );
            m
        };
        let err = Connection::new(&v, WeightVector::units(2), num, vec![]).unwrap_err();
        assert!(matches!(err, ConnError::UndeclaredPole(_)));
    }

    #[test]
    fn non_square_free_equation_rejected() {
        let v = vars(2);
        let t1 = Poly::var(&v, 0);
        let f = t1.mul(&t1);
        let num = MatrixKForm::zero(&v, 1, 1);
        let err = Connection::new(
            &v,
            WeightVector::units(2),
            num,
            vec![PolarComponent::Equation(f)],
        )
        .unwrap_err();
        assert!(matches!(err, ConnError::BadComponent(_)));
    }

    #[test]
    fn non_coprime_equations_rejected() {
        let v = vars(2);
        let t1 = Poly::var(&v, 0);
        let t2 = Poly::var(&v, 1);
        let f1 = t1.sub(&t2);
        let f2 = t1.mul(&t1).sub(&t2.mul(&t2)); // (t1−t2)(t1+t2)
        let num = MatrixKForm::zero(&v, 1, 1);
        let err = Connection::new(
            &v,
            WeightVector::units(2),
            num,
            vec![PolarComponent::Equation(f1), PolarComponent::Equation(f2)],
        )
        .unwrap_err();
        assert!(matches!(err, ConnError::BadComponent(_)));
    }

    // --- gauge -------------------------------------------------------------------

    #[test]
    fn constant_gauge_conjugates() {
        let v = vars(2);
        let a1 = ConstMatrix::from_i64_rows(&[&[1, 1], &[0, 2]]);
        let a2 = ConstMatrix::from_i64_rows(&[&[2, 0], &[0, 3]]);
        let conn = euler_connection(&v, vec![a1.clone(), a2.clone()]);
        let c = ConstMatrix::<Q>::from_i64_rows(&[&[1, 1], &[0, 1]]);
        let c_inv = c.inverse().unwrap();
        let g = conn
            .gauge_exact(&c.to_matrix_form(&v), &c_inv.to_matrix_form(&v))
            .unwrap();
        // Expected: residues conjugated.
        let b1 = c.mul(&a1).mul(&c_inv);
        let b2 = c.mul(&a2).mul(&c_inv);
        let expect = euler_connection(&v, vec![b1, b2]);
        assert_eq!(g.numerator(), expect.numerator());
    }

    #[test]
    fn laurent_gauge_of_zero_connection_is_dlog() {
        // H = diag(t₁, 1) on Ω = 0 gives diag(dt₁/t₁, 0), declaring t₁.
        let v = vars(2);
        let zero = Connection::new(
            &v,
            WeightVector::units(2),
            MatrixKForm::zero(&v, 1, 2),
            vec![],
        )
        .unwrap();
        let mut h = MatrixKForm::identity(&v, 2);
        h.set_entry(0, 0, Form::from_poly(Poly::var(&v, 0)));
        let mut h_inv = MatrixKForm::identity(&v, 2);
        h_inv.set_entry(
            0,
            0,
            Form::from_poly(Poly::monomial(&v, Multidegree(vec![-1, 0]), Q::one())),
        );
        let g = zero.gauge_exact(&h, &h_inv).unwrap();
        let expect_entry = Form::from_components(
            &v,
            1,
            vec![(vec![0], Poly::monomial(&v, Multidegree(vec![-1, 0]), Q::one()))],
        )
        .unwrap();
        assert_eq!(*g.numerator().entry(0, 0), expect_entry);
        assert!(g.numerator().entry(0, 1).is_zero());
        assert!(g.numerator().entry(1, 0).is_zero());
        assert!(g.numerator().entry(1, 1).is_zero());
        assert!(g
            .polar_components()
            .iter()
            .any(|c| matches!(c, PolarComponent::Coordinate(0))));
    }

    #[test]
    fn gauge_rejects_wrong_inverse() {
        let v = vars(2);
        let zero = Connection::new(
            &v,
            WeightVector::units(2),
            MatrixKForm::zero(&v, 1, 2),
            vec![],
        )
        .unwrap();
        let h = MatrixKForm::identity(&v, 2);
        let mut wrong = MatrixKForm::identity(&v, 2);
        wrong.set_entry(0, 1, Form::from_poly(Poly::one(&v)));
        assert_eq!(
            zero.gauge_exact(&h, &wrong).unwrap_err(),
            ConnError::GaugeInverseMismatch
        );
    }

    /// Random unimodular polynomial matrix (product of elementary
    /// transvections) together with its exact inverse.
    fn random_unimodular(
        rng: &mut ChaCha8Rng,
        v: &[String],
        n: usize,
        factors: usize,
    ) -> (MatrixKForm<Q>, MatrixKForm<Q>) {
        let ident = MatrixKForm::identity(v, n);
        let mut h = ident.clone();
        let mut h_inv = ident.clone();
        for _ in 0..factors {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n);
            while j == i {
                j = rng.gen_range(0..n);
            }
            // Small random polynomial entry.
            let nterms = rng.gen_range(1..=2);
            let mut p = Poly::zero(v);
            for _ in 0..nterms {
                let d: Vec<i64> = (0..v.len()).map(|_| rng.gen_range(0..=2)).collect();
                let c = rng.gen_range(-2i64..=2);
                p = p.add(&Poly::monomial(v, Multidegree(d), Q::from_int(c)));
            }
            let mut e = ident.clone();
            e.set_entry(i, j, Form::from_poly(p.clone()));
            let mut e_inv = ident.clone();
            e_inv.set_entry(i, j, Form::from_poly(p.neg()));
            // Transvections: (E + p e_ij)(E − p e_ij) = E for i ≠ j.
            h = h.wedge(&e);
            h_inv = e_inv.wedge(&h_inv);
        }
        (h, h_inv)
    }

    #[test]
    fn gauge_preserves_flatness_random_unimodular() {
        let mut rng = ChaCha8Rng::seed_from_u64(314);
        let v = vars(2);
        let a1 = ConstMatrix::from_i64_rows(&[&[1, 0], &[0, 2]]);
        let a2 = ConstMatrix::from_i64_rows(&[&[0, 0], &[0, 5]]);
        let conn = euler_connection(&v, vec![a1, a2]);
        assert!(conn.is_flat());
        for _ in 0..10 {
            let (h, h_inv) = random_unimodular(&mut rng, &v, 2, 3);
            let g = conn.gauge_exact(&h, &h_inv).unwrap();
            assert!(g.is_flat());
        }
    }

    #[test]
    fn gauge_is_group_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(217);
        let v = vars(2);
        let a1 = ConstMatrix::from_i64_rows(&[&[1, 1], &[0, 1]]);
        let a2 = ConstMatrix::from_i64_rows(&[&[2, 3], &[0, 2]]);
        let conn = euler_connection(&v, vec![a1, a2]);
        for _ in 0..5 {
            let (h1, h1_inv) = random_unimodular(&mut rng, &v, 2, 2);
            let (h2, h2_inv) = random_unimodular(&mut rng, &v, 2, 2);
            let lhs = conn.gauge_exact(&h1, &h1_inv).unwrap().gauge_exact(&h2, &h2_inv).unwrap();
            let h21 = h2.wedge(&h1);
            let h21_inv = h1_inv.wedge(&h2_inv);
            let rhs = conn.gauge_exact(&h21, &h21_inv).unwrap();
            assert_eq!(lhs.numerator(), rhs.numerator());
        }
    }

    #[test]
    fn series_gauge_by_truncated_exponential() {
        // n=1, Ω = a dt/t + dt, H = truncation of e^{−t} to order 6:
        // the result is a dt/t modulo terms of weighted degree ≥ 6.
        let v = vec!["t".to_string()];
        let a = Q::from_ratio(3, 7);
        let num = {
            let mut m = MatrixKForm::zero(&v, 1, 1);
            m.set_entry(
                0,
                0,
                Form::from_components(
                    &v,
                    1,
                    vec![
                        (vec![0], Poly::monomial(&v, Multidegree(vec![-1]), a.clone())
                            .add(&Poly::one(&v))),
                    ],
                )
                .unwrap(),
            );
            m
        };
        let conn = Connection::new(
            &v,
            WeightVector::units(1),
            num,
            vec![PolarComponent::Coordinate(0)],
        )
        .unwrap();

        // H = Σ_{k≤6} (−t)^k / k!.
        let mut hpoly = Poly::zero(&v);
        let mut fact = 1i64;
        for k in 0..=6i64 {
            if k > 0 {
                fact *= k;
            }
            let sign = if k % 2 == 0 { 1 } else { -1 };
            hpoly = hpoly.add(&Poly::monomial(
                &v,
                Multidegree(vec![k]),
                Q::from_ratio(sign, fact),
            ));
        }
        let mut hmat = MatrixKForm::zero(&v, 0, 1);
        hmat.set_entry(0, 0, Form::from_poly(hpoly));
        let h = MatrixSeries::from_matrix(hmat, WeightVector::units(1), order_of(6)).unwrap();

        let g = conn.gauge_series(&h).unwrap();
        // Compare against a dt/t: the difference must vanish through
        // weighted degree 5.
        let log_part = {
            let mut m = MatrixKForm::zero(&v, 1, 1);
            m.set_entry(
                0,
                0,
                Form::from_components(
                    &v,
                    1,
                    vec![(vec![0], Poly::monomial(&v, Multidegree(vec![-1]), a))],
                )
                .unwrap(),
            );
            m
        };
        let diff = g.numerator().sub(&log_part);
        if let Some(min) = diff.min_form_degree(conn.weights()) {
            assert!(
                min >= order_of(6),
                "low-degree defect of weighted degree {min}"
            );
        }
    }

    #[test]
    fn series_gauge_rejects_singular_constant_part() {
        let v = vars(1);
        let conn = Connection::new(
            &v,
            WeightVector::units(1),
            MatrixKForm::zero(&v, 1, 2),
            vec![],
        )
        .unwrap();
        let mut hmat = MatrixKForm::zero(&v, 0, 2);
        hmat.set_entry(0, 0, Form::from_poly(Poly::var(&v, 0)));
        hmat.set_entry(1, 1, Form::from_poly(Poly::one(&v)));
        let h = MatrixSeries::from_matrix(hmat, WeightVector::units(1), order_of(4)).unwrap();
        assert_eq!(conn.gauge_series(&h).unwrap_err(), ConnError::GaugeNotInvertible);
    }

    // --- local solutions -----------------------------------------------------------

    #[test]
    fn zero_connection_has_identity_solution() {
        let v = vars(2);
        let conn = Connection::new(
            &v,
            WeightVector::units(2),
            MatrixKForm::zero(&v, 1, 2),
            vec![],
        )
        .unwrap();
        let x = conn.local_solution(&order_of(5)).unwrap();
        assert_eq!(*x.total(), MatrixKForm::identity(&v, 2));
    }

    #[test]
    fn nilpotent_constant_connection_terminates_exactly() {
        // Ω = N dt₁ with N² = 0: X = E + N t₁.
        let v = vars(2);
        let nmat = ConstMatrix::<Q>::from_i64_rows(&[&[0, 1], &[0, 0]]);
        let mut num = MatrixKForm::zero(&v, 1, 2);
        for i in 0..2 {
            for j in 0..2 {
                let c = nmat.get(i, j).clone();
                if !c.is_zero() {
                    num.set_entry(
                        i,
                        j,
                        Form::from_components(&v, 1, vec![(vec![0], Poly::constant(&v, c))])
                            .unwrap(),
                    );
                }
            }
        }
        let conn = Connection::new(&v, WeightVector::units(2), num, vec![]).unwrap();
        let x = conn.local_solution(&order_of(9)).unwrap();
        let mut expect = MatrixKForm::identity(&v, 2);
        expect.set_entry(0, 1, Form::from_poly(Poly::var(&v, 0)));
        assert_eq!(*x.total(), expect);
    }

    #[test]
    fn constant_connection_gives_truncated_exponential() {
        // m=1, Ω = A dt: X = truncated exp(At), checked against the
        // factorial series computed independently.
        let v = vars(1);
        let a = ConstMatrix::<Q>::from_i64_rows(&[&[1, 1], &[0, 1]]);
        let mut num = MatrixKForm::zero(&v, 1, 2);
        for i in 0..2 {
            for j in 0..2 {
                let c = a.get(i, j).clone();
                if !c.is_zero() {
                    num.set_entry(
                        i,
                        j,
                        Form::from_components(&v, 1, vec![(vec![0], Poly::constant(&v, c))])
                            .unwrap(),
                    );
                }
            }
        }
        let conn = Connection::new(&v, WeightVector::units(1), num, vec![]).unwrap();
        let order = 8i64;
        let x = conn.local_solution(&order_of(order)).unwrap();

        // Oracle: Σ A^k t^k / k! assembled by constant-matrix powers.
        let mut expect = MatrixKForm::zero(&v, 0, 2);
        let mut power = ConstMatrix::<Q>::identity(2);
        let mut fact = Q::one();
        for k in 0..=order {
            if k > 0 {
                power = power.mul(&a);
                fact = fact.mul(&Q::from_int(k));
            }
            let coeff = fact.inv().unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let c = power.get(i, j).mul(&coeff);
                    if !c.is_zero() {
                        let term = Form::from_poly(Poly::monomial(
                            &v,
                            Multidegree(vec![k]),
                            c,
                        ));
                        expect.set_entry(i, j, expect.entry(i, j).add(&term));
                    }
                }
            }
        }
        assert_eq!(*x.total(), expect);
    }

    #[test]
    fn local_solution_rejects_meromorphic_input() {
        let v = vars(1);
        let num = {
            let mut m = MatrixKForm::zero(&v, 1, 1);
            m.set_entry(
                0,
                0,
                Form::from_components(
                    &v,
                    1,
                    vec![(vec![0], Poly::monomial(&v, Multidegree(vec![-1]), Q::one()))],
                )
                .unwrap(),
            );
            m
        };
        let conn = Connection::new(
            &v,
            WeightVector::units(1),
            num,
            vec![PolarComponent::Coordinate(0)],
        )
        .unwrap();
        assert!(matches!(
            conn.local_solution(&order_of(3)).unwrap_err(),
            ConnError::NotHolomorphic(_)
        ));
    }

    #[test]
    fn local_solution_reports_non_integrable_degree() {
        // Ω = t₂ dt₁ is not flat (dΩ = dt₂∧dt₁ ≠ 0): the first obstructed
        // degree is 2.
        let v = vars(2);
        let mut num = MatrixKForm::zero(&v, 1, 1);
        num.set_entry(
            0,
            0,
            Form::from_components(&v, 1, vec![(vec![0], Poly::var(&v, 1))]).unwrap(),
        );
        let conn = Connection::new(&v, WeightVector::units(2), num, vec![]).unwrap();
        match conn.local_solution(&order_of(4)) {
            Err(ConnError::NotIntegrableAtDegree(r)) => assert_eq!(r, "2"),
            other => panic!("expected integrability failure, got {other:?}"),
        }
    }

    #[test]
    fn local_solution_solves_random_flat_connections() {
        // Flat holomorphic connections built as dH·H⁻¹ for random
        // unipotent polynomial H; the unique graded solution must
        // reproduce H itself (both sides have constant part E), and
        // dX − ΩX must vanish through the truncation order.
        let mut rng = ChaCha8Rng::seed_from_u64(5150);
        let v = vars(2);
        let order = order_of(6);
        for trial in 0..50 {
            let n = 2;
            let (h, h_inv) = random_unimodular(&mut rng, &v, n, 2);
            // Drop constant terms in the off-diagonal factors? Not needed:
            // transvection polynomials may contain constants, so normalize
            // by the constant part to pin H(0) = E.
            let h0 = {
                let mut c = ConstMatrix::<Q>::zero(n);
                for i in 0..n {
                    for j in 0..n {
                        if let Some(p) = h.entry(i, j).as_poly() {
                            c.set(i, j, p.constant_term());
                        }
                    }
                }
                c
            };
            let h0_inv = h0.inverse().unwrap();
            let h_norm = h.wedge(&h0_inv.to_matrix_form(&v));
            let h_norm_inv = h0.to_matrix_form(&v).wedge(&h_inv);
            // Ω = dH·H⁻¹ is exactly flat and polynomial in numerator terms
            // only when H⁻¹ is polynomial — true for transvection products.
            let omega = h_norm.d().wedge(&h_norm_inv);
            let conn = Connection::new(&v, WeightVector::units(2), omega.clone(), vec![])
                .unwrap_or_else(|e| panic!("trial {trial}: {e}"));
            assert!(conn.is_flat(), "trial {trial}: dH·H⁻¹ must be flat");
            let x = conn
                .local_solution(&order)
                .unwrap_or_else(|e| panic!("trial {trial}: {e}"));
            // dX − ΩX vanishes through the truncation order.
            let defect = x
                .total()
                .d()
                .sub(&omega.wedge(x.total()))
                .truncate_form_degree(conn.weights(), &order);
            assert!(
                defect.is_zero(),
                "trial {trial}: solution defect {defect}"
            );
            // And X is the truncation of H itself.
            let h_trunc = h_norm.truncate_form_degree(conn.weights(), &order);
            assert_eq!(*x.total(), h_trunc, "trial {trial}");
        }
    }

    // --- Euler monomial solutions ----------------------------------------------------

    #[test]
    fn integer_diagonal_monomials() {
        let v = vars(1);
        let a = ConstMatrix::<Q>::from_i64_rows(&[&[1, 0], &[0, 2]]);
        let e = EulerConnection::new(&v, vec![a]).unwrap();
        let sols = e.monomial_solutions().unwrap();
        assert_eq!(sols.len(), 2);
        assert_eq!(sols[0].0, Multidegree(vec![1]));
        assert_eq!(sols[0].1, vec![Q::one(), Q::zero()]);
        assert_eq!(sols[1].0, Multidegree(vec![2]));
        assert_eq!(sols[1].1, vec![Q::zero(), Q::one()]);
    }

    #[test]
    fn fractional_diagonal_has_no_monomials() {
        let v = vars(1);
        let a = ConstMatrix::from_rows(vec![
            vec![Q::from_ratio(1, 2), Q::zero()],
            vec![Q::zero(), Q::from_ratio(1, 3)],
        ]);
        let e = EulerConnection::new(&v, vec![a]).unwrap();
        assert!(e.monomial_solutions().unwrap().is_empty());
    }

    #[test]
    fn two_variable_monomial_exponents() {
        let v = vars(2);
        let a1 = ConstMatrix::<Q>::from_i64_rows(&[&[1, 0], &[0, 0]]);
        let a2 = ConstMatrix::<Q>::from_i64_rows(&[&[0, 0], &[0, -1]]);
        let e = EulerConnection::new(&v, vec![a1, a2]).unwrap();
        let sols = e.monomial_solutions().unwrap();
        assert_eq!(sols.len(), 2);
        assert_eq!(sols[0].0, Multidegree(vec![1, 0]));
        assert_eq!(sols[1].0, Multidegree(vec![0, -1]));
    }

    #[test]
    fn non_diagonal_rejected() {
        let v = vars(1);
        let a = ConstMatrix::<Q>::from_i64_rows(&[&[1, 1], &[0, 2]]);
        let e = EulerConnection::new(&v, vec![a]).unwrap();
        assert_eq!(e.monomial_solutions().unwrap_err(), ConnError::DiagonalRequired);
    }

    // --- series mechanics ---------------------------------------------------------

    #[test]
    fn series_inverse_round_trip() {
        let v = vars(2);
        let w = WeightVector::units(2);
        let order = order_of(5);
        let mut mat = MatrixKForm::identity(&v, 2);
        mat.set_entry(
            0,
            1,
            Form::from_poly(Poly::var(&v, 0).add(&Poly::var(&v, 1).pow(2))),
        );
        mat.set_entry(
            1,
            1,
            Form::from_poly(Poly::one(&v).add(&Poly::var(&v, 1)).scale(&Q::from_int(2))),
        );
        let s = MatrixSeries::from_matrix(mat, w.clone(), order.clone()).unwrap();
        let s_inv = s.inverse().unwrap();
        let prod = s.mul(&s_inv);
        assert_eq!(*prod.total(), MatrixKForm::identity(&v, 2));
    }

    #[test]
    fn matrix_inverse_exact() {
        let a = ConstMatrix::<Q>::from_i64_rows(&[&[2, 1], &[1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), ConstMatrix::identity(2));
        let singular = ConstMatrix::<Q>::from_i64_rows(&[&[1, 2], &[2, 4]]);
        assert!(singular.inverse().is_none());
    }
}
