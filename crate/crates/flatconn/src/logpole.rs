//! Logarithmic poles: detection with witnesses, residues on polar
//! components, decomposition of a connection over its declared divisor,
//! residue commutativity and conjugacy-class diagnostics, and resonance
//! classification of residue spectra.

use crate::connection::{ConnError, Connection, ConstMatrix, PolarComponent};
use crate::exterior::{divide_by, FormError, MatrixKForm, PolyMap, ScalarKForm};
use crate::scalars::{ExactScalar, FloatScalar, LaurentPoly, Multidegree, Scalar};
use std::collections::BTreeSet;
use std::fmt;

/// Tolerance for the floating-point resonance test: an eigenvalue
/// difference is flagged integral when it lies within this distance of
/// the nearest integer. Heuristic; the exact path is authoritative.
pub const FLOAT_RESONANCE_TOL: f64 = 1e-9;

/// Witness produced when a connection fails the logarithmic-pole test:
/// the offending matrix entry and a description of the defective term.
#[derive(Debug, Clone, PartialEq)]
pub struct LogWitness {
    pub entry: (usize, usize),
    pub component: String,
    pub detail: String,
}

impl fmt::Display for LogWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "entry ({}, {}) on {}: {}",
            self.entry.0, self.entry.1, self.component, self.detail
        )
    }
}

/// Errors raised by the logarithmic-pole analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum LogError {
    /// The connection is not logarithmic along the component.
    NotLogarithmic(LogWitness),
    /// The component polynomial is unusable (non-square-free, constant,
    /// not matching the declared polar locus, ...).
    BadComponent(String),
    /// No partial derivative of the component is a unit or monomial.
    NoPivot(String),
    /// No variable enters the component linearly with an invertible
    /// coefficient, so the component admits no graph parametrization.
    NoLinearVariable(String),
    /// A residue exists only as a rational function, not as a Laurent
    /// polynomial, on the component.
    ResidueNotLaurent(String),
    /// The decomposition over the declared divisor has a non-holomorphic
    /// piece where a holomorphic one is required.
    DecompositionNotHolomorphic(String),
    /// A floating-point eigenvalue computation failed to converge.
    Numeric(String),
    Form(FormError),
    Conn(ConnError),
}

impl fmt::Display for LogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogError::NotLogarithmic(w) => write!(f, "not logarithmic: {w}"),
            LogError::BadComponent(s) => write!(f, "invalid component: {s}"),
            LogError::NoPivot(s) => write!(f, "{s}"),
            LogError::NoLinearVariable(s) => write!(f, "{s}"),
            LogError::ResidueNotLaurent(s) => write!(f, "{s}"),
            LogError::DecompositionNotHolomorphic(s) => write!(f, "{s}"),
            LogError::Numeric(s) => write!(f, "{s}"),
            LogError::Form(e) => write!(f, "{e}"),
            LogError::Conn(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LogError {}

impl From<FormError> for LogError {
    fn from(e: FormError) -> Self {
        LogError::Form(e)
    }
}

impl From<ConnError> for LogError {
    fn from(e: ConnError) -> Self {
        LogError::Conn(e)
    }
}

type Poly = LaurentPoly<ExactScalar>;

/// The defining polynomial of a polar component.
fn component_poly(conn: &Connection, comp: &PolarComponent) -> Result<Poly, LogError> {
    match comp {
        PolarComponent::Coordinate(i) => {
            if *i >= conn.vars().len() {
                return Err(LogError::BadComponent(format!(
                    "coordinate index {i} out of range"
                )));
            }
            Ok(Poly::var(conn.vars(), *i))
        }
        PolarComponent::Equation(f) => {
            if f.vars() != conn.vars() {
                return Err(LogError::BadComponent(
                    "component over a different variable list".into(),
                ));
            }
            if !f.is_polynomial() {
                return Err(LogError::BadComponent(format!(
                    "component {f} has negative exponents"
                )));
            }
            Ok(f.clone())
        }
    }
}

fn declared_coordinates(conn: &Connection) -> BTreeSet<usize> {
    conn.polar_components()
        .iter()
        .filter_map(|c| match c {
            PolarComponent::Coordinate(i) => Some(*i),
            PolarComponent::Equation(_) => None,
        })
        .collect()
}

fn differential_label(vars: &[String], idx: &[usize]) -> String {
    if idx.is_empty() {
        return "1".into();
    }
    idx.iter()
        .map(|&i| format!("d{}", vars[i]))
        .collect::<Vec<_>>()
        .join("∧")
}

/// Logarithmic-pole test along `{f = 0}` for a square-free component
/// `f`: both `f·Ω` and `f·dΩ` must extend holomorphically across the
/// component. `Ok(())` means logarithmic; the error carries a witness
/// naming the offending entry and term.
///
/// The test is performed by exact divisibility checks on the cleared
/// data `N` and `P = D·dN − dD∧N`: along coordinate factors of `f` the
/// pole orders of `N` and `P` must not exceed one; along factors shared
/// with the polar equations, `P` must be divisible by the shared part
/// (first-order poles of `Ω` itself are automatic since the equation
/// product is square-free).
pub fn is_logarithmic(conn: &Connection, comp: &PolarComponent) -> Result<(), LogError> {
    let vars = conn.vars();
    let f = component_poly(conn, comp)?;
    if f.is_constant() {
        return Err(LogError::BadComponent("component is constant".into()));
    }
    if !f.is_square_free() {
        return Err(LogError::BadComponent(format!(
            "component {f} is not square-free"
        )));
    }
    let comp_name = comp.describe(vars);
    let n_form = conn.numerator();
    let p_form = conn.cleared_domega();
    let d_poly = conn.denominator();
    let g = f.poly_gcd(&d_poly);

    let coord_factors: Vec<usize> = declared_coordinates(conn)
        .into_iter()
        .filter(|&v| f.min_exponent(v).unwrap_or(0) >= 1)
        .collect();

    let n = conn.size();
    for i in 0..n {
        for j in 0..n {
            for &v in &coord_factors {
                for (idx, p) in n_form.entry(i, j).components() {
                    let e = p.min_exponent(v).unwrap_or(0);
                    if e < -1 {
                        return Err(LogError::NotLogarithmic(LogWitness {
                            entry: (i, j),
                            component: comp_name.clone(),
                            detail: format!(
                                "coefficient of {} has a pole of order {} along {{{} = 0}}",
                                differential_label(vars, idx),
                                -e,
                                vars[v]
                            ),
                        }));
                    }
                }
                for (idx, p) in p_form.entry(i, j).components() {
                    let e = p.min_exponent(v).unwrap_or(0);
                    if e < -1 {
                        return Err(LogError::NotLogarithmic(LogWitness {
                            entry: (i, j),
                            component: comp_name.clone(),
                            detail: format!(
                                "the differential acquires a pole of order {} along {{{} = 0}} (component {})",
                                -e,
                                vars[v],
                                differential_label(vars, idx)
                            ),
                        }));
                    }
                }
            }
            if !g.is_constant() {
                for (idx, p) in p_form.entry(i, j).components() {
                    if !g.divides(p) {
                        return Err(LogError::NotLogarithmic(LogWitness {
                            entry: (i, j),
                            component: comp_name.clone(),
                            detail: format!(
                                "the cleared differential component {} is not divisible by {}",
                                differential_label(vars, idx),
                                g
                            ),
                        }));
                    }
                }
            }
        }
    }
    Ok(())
}

/// First variable (in a constant-coefficient-first scan) whose
/// coefficient in the 1-form `xi` is an invertible monomial; used as the
/// division direction.
fn find_pivot(xi: &ScalarKForm<ExactScalar>) -> Result<usize, LogError> {
    let m = xi.num_vars();
    for require_const in [true, false] {
        for v in 0..m {
            let c = xi.coeff(&[v]);
            if c.is_zero() {
                continue;
            }
            let ok = if require_const {
                c.is_constant()
            } else {
                c.is_monomial()
            };
            if ok {
                return Ok(v);
            }
        }
    }
    Err(LogError::NoPivot(
        "no partial derivative of the component is a unit or monomial".into(),
    ))
}

/// Graph parametrization of `{f = 0}`: finds a variable entering `f`
/// linearly with an invertible (monomial) coefficient — constant
/// coefficients preferred, scanning from the last variable down — and
/// solves for it. The returned substitution maps the ambient ring onto
/// functions on the component.
fn restriction_map(f: &Poly) -> Result<PolyMap<ExactScalar>, LogError> {
    let vars = f.vars().to_vec();
    let m = vars.len();
    let mut chosen: Option<(usize, Poly, Poly)> = None;
    'outer: for require_const in [true, false] {
        for j in (0..m).rev() {
            let mut mcoef = Poly::zero(&vars);
            let mut rest = Poly::zero(&vars);
            let mut linear = true;
            for (d, c) in f.terms() {
                match d.0[j] {
                    0 => {
                        rest = rest.add(&Poly::monomial(&vars, d.clone(), c.clone()));
                    }
                    1 => {
                        let mut d2 = d.clone();
                        d2.0[j] = 0;
                        mcoef = mcoef.add(&Poly::monomial(&vars, d2, c.clone()));
                    }
                    _ => {
                        linear = false;
                        break;
                    }
                }
            }
            if !linear || mcoef.is_zero() {
                continue;
            }
            let ok = if require_const {
                mcoef.is_constant()
            } else {
                mcoef.is_monomial()
            };
            if ok {
                chosen = Some((j, mcoef, rest));
                break 'outer;
            }
        }
    }
    let Some((j, mcoef, rest)) = chosen else {
        return Err(LogError::NoLinearVariable(
            "cannot restrict to the component: no variable enters it linearly with a monomial coefficient"
                .into(),
        ));
    };
    let (mdeg, mc) = mcoef.as_monomial().expect("coefficient checked monomial");
    let minv = Poly::monomial(&vars, mdeg.neg(), mc.inv().expect("nonzero coefficient"));
    let image_j = rest.neg().mul(&minv);
    let images: Vec<Poly> = (0..m)
        .map(|v| if v == j { image_j.clone() } else { Poly::var(&vars, v) })
        .collect();
    Ok(PolyMap::new(&vars, images)?)
}

/// Residue of the connection on the polar component `{f = 0}`: the
/// matrix `A` in the local representation `Ω = A·df/f + η` with `η`
/// holomorphic along the component, restricted to the component. The
/// result is a matrix of Laurent polynomials — on a divisor that is
/// singular where the component meets the rest, the residue may carry
/// poles of its own.
pub fn residue(
    conn: &Connection,
    comp: &PolarComponent,
) -> Result<MatrixKForm<ExactScalar>, LogError> {
    is_logarithmic(conn, comp)?;
    match comp {
        PolarComponent::Coordinate(i) => coordinate_residue(conn, *i),
        PolarComponent::Equation(f) => {
            if let Some((deg, _)) = f.as_monomial() {
                if deg.total() == 1 && deg.is_nonneg() {
                    let v = deg.0.iter().position(|&e| e == 1).expect("unit degree");
                    return coordinate_residue(conn, v);
                }
            }
            equation_residue(conn, f)
        }
    }
}

/// Coordinate-component residue: the first-order part of the `dt_i`
/// coefficient at `t_i = 0`, divided by the restricted denominator.
fn coordinate_residue(conn: &Connection, i: usize) -> Result<MatrixKForm<ExactScalar>, LogError> {
    let vars = conn.vars();
    let n = conn.size();
    let d_restricted = conn
        .denominator()
        .restrict_to_zero(i)
        .expect("equation product is polynomial");
    let mut out = MatrixKForm::zero(vars, 0, n);
    for a in 0..n {
        for b in 0..n {
            let coeff = conn.numerator().entry(a, b).coeff(&[i]);
            let mut s = Poly::zero(vars);
            for (d, c) in coeff.terms() {
                if d.0[i] == -1 {
                    let mut d2 = d.clone();
                    d2.0[i] = 0;
                    s = s.add(&Poly::monomial(vars, d2, c.clone()));
                }
            }
            if s.is_zero() {
                continue;
            }
            let q = s.exact_div(&d_restricted).ok_or_else(|| {
                LogError::ResidueNotLaurent(format!(
                    "residue entry ({a}, {b}) on {{{} = 0}} is not a Laurent polynomial",
                    vars[i]
                ))
            })?;
            out.set_entry(a, b, ScalarKForm::from_poly(q));
        }
    }
    Ok(out)
}

/// Equation-component residue via de Rham division: split each entry as
/// `n = θ·df + η` with `η` free of the division direction, then restrict
/// `θ` to the component and divide by the restricted cofactor of `f` in
/// the denominator.
fn equation_residue(conn: &Connection, f: &Poly) -> Result<MatrixKForm<ExactScalar>, LogError> {
    let vars = conn.vars();
    let n = conn.size();
    let d_poly = conn.denominator();
    let g_cof = match d_poly.exact_div(f) {
        Some(g) => g,
        None => {
            let shared = f.poly_gcd(&d_poly);
            let coord_hit = declared_coordinates(conn)
                .into_iter()
                .any(|v| f.min_exponent(v).unwrap_or(0) >= 1);
            if shared.is_constant() && !coord_hit {
                // No pole along the component at all.
                return Ok(MatrixKForm::zero(vars, 0, n));
            }
            return Err(LogError::BadComponent(format!(
                "component {f} is not a single component of the declared polar locus"
            )));
        }
    };
    let df = ScalarKForm::from_poly(f.clone()).d();
    let pivot = find_pivot(&df)?;
    let rmap = restriction_map(f)?;
    let g_restricted = rmap.substitute(&g_cof)?;
    let mut out = MatrixKForm::zero(vars, 0, n);
    for a in 0..n {
        for b in 0..n {
            let n_ab = conn.numerator().entry(a, b);
            if n_ab.is_zero() {
                continue;
            }
            // df∧n∧df = 0, so the division is always exact here.
            let theta1 = divide_by(&df.wedge(n_ab), &df, pivot)?;
            let eta_n = theta1.neg();
            let theta2 = divide_by(&n_ab.sub(&eta_n), &df, pivot)?;
            let t2 = theta2.as_poly().expect("division of 1-form by 1-form");
            let restricted = rmap.substitute(&t2)?;
            if restricted.is_zero() {
                continue;
            }
            let q = restricted.exact_div(&g_restricted).ok_or_else(|| {
                LogError::ResidueNotLaurent(format!(
                    "residue entry ({a}, {b}) on {{{f} = 0}} is not a Laurent polynomial"
                ))
            })?;
            out.set_entry(a, b, ScalarKForm::from_poly(q));
        }
    }
    Ok(out)
}

/// Restrict a matrix of functions to a polar component.
fn restrict_matrix(
    m: &MatrixKForm<ExactScalar>,
    comp: &PolarComponent,
) -> Result<MatrixKForm<ExactScalar>, LogError> {
    match comp {
        PolarComponent::Coordinate(i) => Ok(m.restrict_to_zero(*i)?),
        PolarComponent::Equation(f) => Ok(restriction_map(f)?.pullback_matrix(m)?),
    }
}

/// Whether two polar components have empty intersection, decided by
/// evaluating one defining polynomial on the graph parametrization of
/// the other: a nonzero constant value means the components are
/// disjoint.
fn components_disjoint(
    conn: &Connection,
    a: &PolarComponent,
    b: &PolarComponent,
) -> Result<bool, LogError> {
    let fb = component_poly(conn, b)?;
    let restricted = match a {
        PolarComponent::Coordinate(i) => fb
            .restrict_to_zero(*i)
            .expect("component polynomial is polynomial"),
        PolarComponent::Equation(f) => restriction_map(f)?.substitute(&fb)?,
    };
    Ok(restricted.is_constant() && !restricted.is_zero())
}

// ---------------------------------------------------------------------------
// Decomposition over the declared divisor
// ---------------------------------------------------------------------------

/// A connection written over its declared polar divisor:
/// `Ω = Σ_j A_j·df_j/f_j + η` with every `A_j` and `η` holomorphic, the
/// reassembly being exact. The stored residues are full-variable
/// representatives that do not involve the variable solved for on their
/// component.
#[derive(Clone, Debug)]
pub struct LogDecomposition {
    components: Vec<PolarComponent>,
    residues: Vec<MatrixKForm<ExactScalar>>,
    eta: MatrixKForm<ExactScalar>,
}

impl LogDecomposition {
    pub fn components(&self) -> &[PolarComponent] {
        &self.components
    }

    pub fn residues(&self) -> &[MatrixKForm<ExactScalar>] {
        &self.residues
    }

    /// Full-variable residue representative on component `j`.
    pub fn residue(&self, j: usize) -> &MatrixKForm<ExactScalar> {
        &self.residues[j]
    }

    /// Residue on component `j` restricted to the component.
    pub fn restricted_residue(&self, j: usize) -> Result<MatrixKForm<ExactScalar>, LogError> {
        restrict_matrix(&self.residues[j], &self.components[j])
    }

    /// The holomorphic remainder 1-form.
    pub fn eta(&self) -> &MatrixKForm<ExactScalar> {
        &self.eta
    }

    /// Exact reassembly check: `Σ_j A_j·df_j/f_j + η` equals the
    /// connection, compared on cleared numerators.
    pub fn verify_reassembly(&self, conn: &Connection) -> bool {
        let d_poly = conn.denominator();
        let mut acc = self.eta.scale_poly(&d_poly);
        for (comp, a) in self.components.iter().zip(&self.residues) {
            acc = acc.add(&cleared_log_term(conn, comp, a));
        }
        acc == *conn.numerator()
    }
}

/// The cleared numerator of `A·df/f`: `A·D·dt_i/t_i` for coordinates
/// (with the pole as a Laurent exponent), `A·(D/f)·df` for equations.
fn cleared_log_term(
    conn: &Connection,
    comp: &PolarComponent,
    a: &MatrixKForm<ExactScalar>,
) -> MatrixKForm<ExactScalar> {
    let vars = conn.vars();
    let d_poly = conn.denominator();
    match comp {
        PolarComponent::Coordinate(i) => {
            let mut deg = Multidegree::zeros(vars.len());
            deg.0[*i] = -1;
            let xi = ScalarKForm::from_components(
                vars,
                1,
                vec![(vec![*i], Poly::monomial(vars, deg, ExactScalar::one()))],
            )
            .expect("valid log differential");
            a.wedge_scalar_left(&xi).scale_poly(&d_poly)
        }
        PolarComponent::Equation(f) => {
            let df = ScalarKForm::from_poly(f.clone()).d();
            let g = d_poly
                .exact_div(f)
                .expect("declared equation divides the denominator");
            a.wedge_scalar_left(&df).scale_poly(&g)
        }
    }
}

/// Decompose the connection over its declared polar components:
/// `Ω = Σ_j A_j·df_j/f_j + η` with all residues `A_j` and the remainder
/// `η` holomorphic and the reassembly exact. Errors when some component
/// is not logarithmic (with the witness), or when a residue or the
/// remainder fails to be holomorphic — as happens when the divisor is
/// not a normal crossing.
pub fn saito_decompose(conn: &Connection) -> Result<LogDecomposition, LogError> {
    let vars = conn.vars();
    let n = conn.size();
    let comps = conn.polar_components().to_vec();
    let d_poly = conn.denominator();

    let mut residues = Vec::with_capacity(comps.len());
    for comp in &comps {
        let r = residue(conn, comp)?;
        for i in 0..n {
            for j in 0..n {
                for (_, p) in r.entry(i, j).components() {
                    if !p.is_polynomial() {
                        return Err(LogError::DecompositionNotHolomorphic(format!(
                            "residue on {} has entry ({i}, {j}) = {p} with negative exponents",
                            comp.describe(vars)
                        )));
                    }
                }
            }
        }
        residues.push(r);
    }

    let mut eta_num = conn.numerator().clone();
    for (comp, a) in comps.iter().zip(&residues) {
        eta_num = eta_num.sub(&cleared_log_term(conn, comp, a));
    }

    let mut eta = MatrixKForm::zero(vars, 1, n);
    for i in 0..n {
        for j in 0..n {
            let mut entry = ScalarKForm::zero(vars, 1);
            for (idx, p) in eta_num.entry(i, j).components() {
                let q = p.exact_div(&d_poly).ok_or_else(|| {
                    LogError::DecompositionNotHolomorphic(format!(
                        "remainder entry ({i}, {j}) is not divisible by the polar equations"
                    ))
                })?;
                if !q.is_polynomial() {
                    return Err(LogError::DecompositionNotHolomorphic(format!(
                        "remainder entry ({i}, {j}) keeps a pole: {q}"
                    )));
                }
                entry = entry.add(&ScalarKForm::from_components(
                    vars,
                    1,
                    vec![(idx.clone(), q)],
                )?);
            }
            eta.set_entry(i, j, entry);
        }
    }

    Ok(LogDecomposition {
        components: comps,
        residues,
        eta,
    })
}

// ---------------------------------------------------------------------------
// Residue commutativity and conjugacy diagnostics
// ---------------------------------------------------------------------------

/// Commutator of the residues of one pair of polar components, restricted
/// to the intersection of the components. Pairs with empty intersection
/// are marked disjoint and carry a zero commutator (the condition is
/// vacuous there).
#[derive(Clone, Debug)]
pub struct CommutatorEntry {
    pub components: (usize, usize),
    pub disjoint: bool,
    pub commutator: MatrixKForm<ExactScalar>,
}

/// Pairwise residue-commutativity report for a connection: for a flat
/// connection logarithmic along a normal crossing divisor, every
/// commutator must vanish, so nonzero entries diagnose a non-flat or
/// mis-declared input.
#[derive(Clone, Debug)]
pub struct CommutativityReport {
    flat: bool,
    entries: Vec<CommutatorEntry>,
}

impl CommutativityReport {
    /// Whether the connection itself is flat (vanishing cleared
    /// curvature).
    pub fn is_flat(&self) -> bool {
        self.flat
    }

    pub fn entries(&self) -> &[CommutatorEntry] {
        &self.entries
    }

    /// Pairs with nonvanishing restricted commutator.
    pub fn violations(&self) -> Vec<&CommutatorEntry> {
        self.entries
            .iter()
            .filter(|e| !e.disjoint && !e.commutator.is_zero())
            .collect()
    }

    pub fn all_commute(&self) -> bool {
        self.violations().is_empty()
    }
}

/// Compute residues of all declared components and the commutator of
/// every pair, each restricted to the pair's intersection.
pub fn residue_commutativity(conn: &Connection) -> Result<CommutativityReport, LogError> {
    let comps = conn.polar_components().to_vec();
    let residues: Vec<MatrixKForm<ExactScalar>> = comps
        .iter()
        .map(|c| residue(conn, c))
        .collect::<Result<_, _>>()?;
    let n = conn.size();
    let mut entries = Vec::new();
    for i in 0..comps.len() {
        for j in (i + 1)..comps.len() {
            if components_disjoint(conn, &comps[i], &comps[j])? {
                entries.push(CommutatorEntry {
                    components: (i, j),
                    disjoint: true,
                    commutator: MatrixKForm::zero(conn.vars(), 0, n),
                });
                continue;
            }
            let a = restrict_matrix(&residues[i], &comps[j])?;
            let b = restrict_matrix(&residues[j], &comps[i])?;
            let commutator = a.wedge(&b).sub(&b.wedge(&a));
            entries.push(CommutatorEntry {
                components: (i, j),
                disjoint: false,
                commutator,
            });
        }
    }
    Ok(CommutativityReport {
        flat: conn.is_flat(),
        entries,
    })
}

/// Characteristic-polynomial coefficients `c_1 … c_n` (so that
/// `λ^n + c_1 λ^{n−1} + … + c_n` is the characteristic polynomial) of a
/// matrix of functions, computed by the trace recursion — exact over the
/// rational-coefficient ring.
fn charpoly_coeffs(m: &MatrixKForm<ExactScalar>) -> Vec<Poly> {
    let n = m.size();
    let vars = m.vars().to_vec();
    let mut coeffs = Vec::with_capacity(n);
    let mut mk = m.clone();
    for k in 1..=n {
        let tr = mk.trace().as_poly().expect("trace of 0-form matrix");
        let ck = tr.scale(&ExactScalar::from_ratio(-1, k as i64));
        coeffs.push(ck.clone());
        if k < n {
            let adj = mk.add(&MatrixKForm::identity(&vars, n).scale_poly(&ck));
            mk = m.wedge(&adj);
        }
    }
    coeffs
}

/// Whether the residue on the component has a characteristic polynomial
/// with constant coefficients — the testable shadow of the residue
/// staying in one conjugacy class along the component.
pub fn conjugacy_constancy(conn: &Connection, comp: &PolarComponent) -> Result<bool, LogError> {
    let r = residue(conn, comp)?;
    Ok(charpoly_coeffs(&r).iter().all(|c| c.is_constant()))
}

// ---------------------------------------------------------------------------
// Resonance classification
// ---------------------------------------------------------------------------

/// Arithmetic type of a residue-spectrum difference.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ResonanceClass {
    NonInteger,
    Integer,
    /// Integral with all entries nonnegative (zero included).
    NonnegativeInteger,
}

/// One ordered pair of residue exponent vectors with their difference
/// and its classification.
#[derive(Clone, Debug)]
pub struct ResonancePair<S: Scalar> {
    pub indices: (usize, usize),
    pub difference: Vec<S>,
    pub class: ResonanceClass,
    /// Whether this pair makes the system resonant under the verdict
    /// rule it was built with.
    pub resonant: bool,
}

/// Complete pair classification of a residue spectrum.
#[derive(Clone, Debug)]
pub struct ResonanceReport<S: Scalar> {
    pairs: Vec<ResonancePair<S>>,
    nonresonant: bool,
}

impl<S: Scalar> ResonanceReport<S> {
    pub fn pairs(&self) -> &[ResonancePair<S>] {
        &self.pairs
    }

    pub fn is_nonresonant(&self) -> bool {
        self.nonresonant
    }

    pub fn resonant_pairs(&self) -> Vec<&ResonancePair<S>> {
        self.pairs.iter().filter(|p| p.resonant).collect()
    }
}

fn classify_exact(diff: &[ExactScalar]) -> ResonanceClass {
    if diff.iter().all(|d| d.is_integer()) {
        if diff.iter().all(|d| d.is_nonneg_integer()) {
            ResonanceClass::NonnegativeInteger
        } else {
            ResonanceClass::Integer
        }
    } else {
        ResonanceClass::NonInteger
    }
}

fn classify_float(diff: &[FloatScalar]) -> ResonanceClass {
    let integral = diff
        .iter()
        .all(|d| (d.re - d.re.round()).abs() < FLOAT_RESONANCE_TOL && d.im.abs() < FLOAT_RESONANCE_TOL);
    if !integral {
        return ResonanceClass::NonInteger;
    }
    if diff.iter().all(|d| d.re.round() >= 0.0) {
        ResonanceClass::NonnegativeInteger
    } else {
        ResonanceClass::Integer
    }
}

/// Resonance analysis of a family of residue exponent vectors (the
/// diagonal case): each ordered pair is classified by its difference
/// vector, and the family is nonresonant exactly when no difference is
/// an integer vector — coinciding vectors (zero difference) count as
/// resonant.
pub fn resonance_of_vectors(vectors: &[Vec<ExactScalar>]) -> ResonanceReport<ExactScalar> {
    let mut pairs = Vec::new();
    for i in 0..vectors.len() {
        for j in 0..vectors.len() {
            if i == j {
                continue;
            }
            assert_eq!(
                vectors[i].len(),
                vectors[j].len(),
                "exponent vectors of different lengths"
            );
            let difference: Vec<ExactScalar> = vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(a, b)| a.sub(b))
                .collect();
            let class = classify_exact(&difference);
            let resonant = class != ResonanceClass::NonInteger;
            pairs.push(ResonancePair {
                indices: (i, j),
                difference,
                class,
                resonant,
            });
        }
    }
    let nonresonant = pairs.iter().all(|p| !p.resonant);
    ResonanceReport { pairs, nonresonant }
}

/// Resonance analysis of a single residue matrix with exactly known
/// spectrum (diagonal or triangular): the matrix is resonant when two
/// eigenvalues differ by a nonzero integer.
pub fn resonance_of_matrix(
    a: &ConstMatrix<ExactScalar>,
) -> Result<ResonanceReport<ExactScalar>, LogError> {
    let n = a.size();
    let upper = (0..n).all(|i| (0..i).all(|j| a.get(i, j).is_zero()));
    let lower = (0..n).all(|i| (i + 1..n).all(|j| a.get(i, j).is_zero()));
    if !upper && !lower {
        return Err(LogError::BadComponent(
            "exact eigenvalue extraction requires a triangular or diagonal matrix".into(),
        ));
    }
    let eigenvalues: Vec<ExactScalar> = (0..n).map(|i| a.get(i, i).clone()).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = eigenvalues[i].sub(&eigenvalues[j]);
            let class = classify_exact(std::slice::from_ref(&d));
            let resonant = class != ResonanceClass::NonInteger && !d.is_zero();
            pairs.push(ResonancePair {
                indices: (i, j),
                difference: vec![d],
                class,
                resonant,
            });
        }
    }
    let nonresonant = pairs.iter().all(|p| !p.resonant);
    Ok(ResonanceReport { pairs, nonresonant })
}

/// Floating-point resonance analysis of a residue matrix: eigenvalues
/// are computed by the complex Schur iteration, and a pair is flagged
/// resonant when its difference lies within [`FLOAT_RESONANCE_TOL`] of a
/// nonzero integer. Heuristic; prefer the exact path when the spectrum
/// is known exactly.
pub fn resonance_of_matrix_float(
    a: &ConstMatrix<FloatScalar>,
) -> Result<ResonanceReport<FloatScalar>, LogError> {
    let eigenvalues = crate::nummat::eigenvalues(a)
        .ok_or_else(|| LogError::Numeric("eigenvalue iteration failed to converge".into()))?;
    let mut pairs = Vec::new();
    for i in 0..eigenvalues.len() {
        for j in 0..eigenvalues.len() {
            if i == j {
                continue;
            }
            let d = FloatScalar {
                re: eigenvalues[i].re - eigenvalues[j].re,
                im: eigenvalues[i].im - eigenvalues[j].im,
            };
            let class = classify_float(std::slice::from_ref(&d));
            let resonant = class != ResonanceClass::NonInteger
                && (d.re.abs() > FLOAT_RESONANCE_TOL || d.im.abs() > FLOAT_RESONANCE_TOL);
            pairs.push(ResonancePair {
                indices: (i, j),
                difference: vec![d],
                class,
                resonant,
            });
        }
    }
    let nonresonant = pairs.iter().all(|p| !p.resonant);
    Ok(ResonanceReport { pairs, nonresonant })
}
