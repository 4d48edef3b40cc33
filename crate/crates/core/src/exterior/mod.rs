//! Forms and multivector fields with symbolic coefficients.
//!
//! Both are stored as maps from strictly increasing index sets (bitmasks over
//! chart variables) to coefficient expressions; absent keys are zero.
//!
//! Conventions: `i(X)` contracts the first slot, so `i(μ)(X∧Y) = μ(X)Y − μ(Y)X`;
//! the sharp map of a bivector satisfies `⟨ν, ♯Λ(μ)⟩ = Λ(μ, ν)`; and the
//! inverse of a nondegenerate two-form is the bivector whose matrix is
//! `−W⁻¹`, where `W` is the matrix of the form. With `♭(X) = i(X)Ω` this gives
//! `♭ ∘ ♯Λ = −id`.

mod calculus;
mod map;

pub use calculus::{ext_deriv, lie_bracket, schouten, two_form_inverse, InverseForm, LieDerivative};
pub use map::SmoothMap;

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{max_residual, parse_tensor_terms, Chart, Expr, ParseScope, TensorMode};
use crate::linalg::Matrix;

/// Index set of a basis element, one bit per chart variable.
pub type Blade = u32;

pub trait Variance: Clone + Send + Sync + 'static {
    const KIND: &'static str;
    /// Prefix of a basis element in the text format (`d` or `@`).
    const PREFIX: &'static str;
}

#[derive(Debug, Clone, Copy)]
pub struct Co;

#[derive(Debug, Clone, Copy)]
pub struct Contra;

impl Variance for Co {
    const KIND: &'static str = "form";
    const PREFIX: &'static str = "d";
}

impl Variance for Contra {
    const KIND: &'static str = "multivector";
    const PREFIX: &'static str = "@";
}

/// Degree-`k` antisymmetric tensor field on a chart.
#[derive(Clone)]
pub struct Tensor<K: Variance> {
    chart: Arc<Chart>,
    degree: usize,
    comps: BTreeMap<Blade, Expr>,
    _kind: PhantomData<K>,
}

pub type Form = Tensor<Co>;
pub type MultiVector = Tensor<Contra>;
/// A multivector of degree one.
pub type VectorField = Tensor<Contra>;

pub(crate) fn indices(b: Blade) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| b & (1 << i) != 0)
}

/// Sorts an ordered list of basis indices: the blade and the permutation sign,
/// or `None` when an index repeats.
pub(crate) fn ordered_blade(idx: &[usize]) -> Option<(Blade, f64)> {
    let mut b = 0;
    let mut inversions = 0;
    for (k, &i) in idx.iter().enumerate() {
        if b & (1 << i) != 0 {
            return None;
        }
        b |= 1 << i;
        inversions += idx[..k].iter().filter(|&&j| j > i).count();
    }
    Some((b, if inversions % 2 == 0 { 1.0 } else { -1.0 }))
}

/// Sign of `e_a ∧ e_b` relative to the sorted blade `a | b`.
pub(crate) fn wedge_sign(a: Blade, b: Blade) -> f64 {
    let mut swaps = 0;
    for j in indices(b) {
        swaps += (a >> (j + 1)).count_ones();
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl<K: Variance> fmt::Debug for Tensor<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl<K: Variance> fmt::Display for Tensor<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        for (n, (b, c)) in self.comps.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})", c.display(&self.chart))?;
            let names: Vec<String> = indices(*b).map(|i| format!("{}{}", K::PREFIX, self.chart.vars()[i])).collect();
            if !names.is_empty() {
                write!(f, " * {}", names.join("^"))?;
            }
        }
        Ok(())
    }
}

impl<K: Variance> Tensor<K> {
    pub fn zero(chart: Arc<Chart>, degree: usize) -> Self {
        Tensor { chart, degree, comps: BTreeMap::new(), _kind: PhantomData }
    }

    pub fn scalar(chart: Arc<Chart>, f: Expr) -> Self {
        let mut t = Self::zero(chart, 0);
        t.insert(0, f);
        t
    }

    /// `dx^i` or `∂_i`.
    pub fn basis(chart: Arc<Chart>, idx: &[usize]) -> Result<Self> {
        Self::from_terms(chart, idx.len(), vec![(Expr::one(), idx.to_vec())])
    }

    /// Builds from (coefficient, ordered basis indices) summands.
    pub fn from_terms(chart: Arc<Chart>, degree: usize, terms: Vec<(Expr, Vec<usize>)>) -> Result<Self> {
        if degree > chart.dim() {
            return Err(Error::DegreeOverflow { degree, dim: chart.dim() });
        }
        let mut t = Self::zero(chart, degree);
        for (c, idx) in terms {
            if idx.len() != degree {
                return Err(Error::KindMismatch(format!("summand of degree {} in a {}-{}", idx.len(), degree, K::KIND)));
            }
            if let Some((b, s)) = ordered_blade(&idx) {
                t.accumulate(b, &c.scale(s));
            }
        }
        Ok(t)
    }

    /// A degree-one tensor with the given dense components.
    pub fn from_components(chart: Arc<Chart>, comps: Vec<Expr>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::Definition(format!("{} components on a chart of dimension {}", comps.len(), chart.dim())));
        }
        let mut t = Self::zero(chart, 1);
        for (i, c) in comps.into_iter().enumerate() {
            t.insert(1 << i, c);
        }
        Ok(t)
    }

    fn insert(&mut self, b: Blade, c: Expr) {
        if c.is_zero() {
            self.comps.remove(&b);
        } else {
            self.comps.insert(b, c);
        }
    }

    pub(crate) fn accumulate(&mut self, b: Blade, c: &Expr) {
        if c.is_zero() {
            return;
        }
        let v = match self.comps.get(&b) {
            Some(old) => old.add(c),
            None => c.clone(),
        };
        self.insert(b, v);
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &BTreeMap<Blade, Expr> {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Coefficient of the sorted basis element `b`.
    pub fn coeff(&self, b: Blade) -> Expr {
        self.comps.get(&b).cloned().unwrap_or_else(Expr::zero)
    }

    /// Coefficient along an ordered index list, with the permutation sign.
    pub fn component(&self, idx: &[usize]) -> Expr {
        match ordered_blade(idx) {
            Some((b, s)) => self.coeff(b).scale(s),
            None => Expr::zero(),
        }
    }

    /// Dense components of a degree-one tensor.
    pub fn dense(&self) -> Vec<Expr> {
        (0..self.chart.dim()).map(|i| self.coeff(1 << i)).collect()
    }

    pub fn ensure_chart(&self, other: &Chart) -> Result<()> {
        self.chart.ensure_same(other)
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        self.chart.ensure_same(&o.chart)?;
        if self.degree != o.degree {
            return Err(Error::KindMismatch(format!("degrees {} and {} differ", self.degree, o.degree)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        let mut t = self.clone();
        for (b, c) in &o.comps {
            t.accumulate(*b, c);
        }
        Ok(t)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }

    pub fn scale(&self, f: &Expr) -> Self {
        self.map_coeffs(|c| f.mul(c))
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&Expr) -> Expr) -> Self {
        let mut t = Self::zero(self.chart.clone(), self.degree);
        for (b, c) in &self.comps {
            t.insert(*b, f(c));
        }
        t
    }

    pub fn wedge(&self, o: &Self) -> Result<Self> {
        self.chart.ensure_same(&o.chart)?;
        let degree = self.degree + o.degree;
        if degree > self.chart.dim() {
            return Err(Error::DegreeOverflow { degree, dim: self.chart.dim() });
        }
        let mut t = Self::zero(self.chart.clone(), degree);
        for (a, ca) in &self.comps {
            for (b, cb) in &o.comps {
                if a & b == 0 {
                    t.accumulate(a | b, &ca.mul(cb).scale(wedge_sign(*a, *b)));
                }
            }
        }
        Ok(t)
    }

    /// Contraction of a degree-one dual tensor into the first slot.
    pub fn contract<D: Variance>(&self, v: &Tensor<D>) -> Result<Self> {
        self.chart.ensure_same(&v.chart)?;
        if v.degree != 1 {
            return Err(Error::KindMismatch(format!("contraction needs a degree-one {}", D::KIND)));
        }
        if self.degree == 0 {
            return Err(Error::DegreeUnderflow { needed: 1 });
        }
        let mut t = Self::zero(self.chart.clone(), self.degree - 1);
        for (b, c) in &self.comps {
            for (pos, i) in indices(*b).enumerate() {
                let vi = v.coeff(1 << i);
                if vi.is_zero() {
                    continue;
                }
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                t.accumulate(b & !(1 << i), &vi.mul(c).scale(sign));
            }
        }
        Ok(t)
    }

    /// Coefficients evaluated at a point, keyed by blade.
    pub fn eval(&self, x: &[f64]) -> Result<BTreeMap<Blade, f64>> {
        self.comps.iter().map(|(b, c)| Ok((*b, c.eval(x)?))).collect()
    }

    pub fn eval_dense(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.dense().iter().map(|c| c.eval(x)).collect()
    }

    /// Full antisymmetric matrix of a degree-two tensor at a point.
    pub fn eval_matrix(&self, x: &[f64]) -> Result<Matrix> {
        assert_eq!(self.degree, 2, "eval_matrix needs degree two");
        let n = self.chart.dim();
        let mut m = Matrix::zeros(n, n);
        for (b, c) in &self.comps {
            let ij: Vec<usize> = indices(*b).collect();
            let v = c.eval(x)?;
            m[(ij[0], ij[1])] = v;
            m[(ij[1], ij[0])] = -v;
        }
        Ok(m)
    }

    /// Max componentwise residual against another tensor at a point.
    pub fn residual_at(&self, o: &Self, x: &[f64]) -> Result<f64> {
        self.same_shape(o)?;
        let a = self.eval(x)?;
        let b = o.eval(x)?;
        let keys: std::collections::BTreeSet<Blade> = a.keys().chain(b.keys()).copied().collect();
        let lhs: Vec<f64> = keys.iter().map(|k| a.get(k).copied().unwrap_or(0.0)).collect();
        let rhs: Vec<f64> = keys.iter().map(|k| b.get(k).copied().unwrap_or(0.0)).collect();
        Ok(max_residual(&lhs, &rhs))
    }

    /// The same tensor on a chart that appends variables to this one.
    pub fn extend_to(&self, chart: Arc<Chart>) -> Result<Self> {
        let n = self.chart.dim();
        if chart.dim() < n || chart.vars()[..n] != self.chart.vars()[..] {
            return Err(Error::ChartMismatch { expected: self.chart.name().to_string(), found: chart.name().to_string() });
        }
        Ok(Tensor { chart, degree: self.degree, comps: self.comps.clone(), _kind: PhantomData })
    }
}

impl Form {
    /// `d(x^i)`.
    pub fn differential_of_coord(chart: Arc<Chart>, i: usize) -> Form {
        Form::basis(chart, &[i]).expect("degree one fits")
    }

    /// `df`.
    pub fn differential(chart: Arc<Chart>, f: &Expr) -> Form {
        let comps = (0..chart.dim()).map(|i| f.partial(i)).collect();
        Form::from_components(chart, comps).expect("dimension matches")
    }

    /// Evaluates the form on tangent vectors (one per slot) at a point.
    pub fn apply(&self, x: &[f64], vectors: &[&[f64]]) -> Result<f64> {
        assert_eq!(vectors.len(), self.degree, "apply: slot count");
        let mut total = 0.0;
        for (b, c) in &self.comps {
            let idx: Vec<usize> = indices(*b).collect();
            let k = idx.len();
            let m = Matrix::from_fn(k, k, |r, s| vectors[s][idx[r]]);
            let det = if k == 0 { 1.0 } else { m.determinant() };
            total += c.eval(x)? * det;
        }
        Ok(total)
    }
}

impl MultiVector {
    /// `∂_i`.
    pub fn coordinate_field(chart: Arc<Chart>, i: usize) -> VectorField {
        MultiVector::basis(chart, &[i]).expect("degree one fits")
    }

    /// `X(f)` for a vector field `X`.
    pub fn apply_to(&self, f: &Expr) -> Expr {
        assert_eq!(self.degree, 1, "apply_to needs a vector field");
        self.comps
            .iter()
            .map(|(b, c)| c.mul(&f.partial(b.trailing_zeros() as usize)))
            .fold(Expr::zero(), |acc, t| acc.add(&t))
    }

    /// `Λ(μ, ν)` for a bivector.
    pub fn pair(&self, mu: &Form, nu: &Form) -> Result<Expr> {
        let s = sharp(self, mu)?;
        let p = s.contract(nu)?;
        Ok(p.coeff(0))
    }
}

fn parse_tensor<K: Variance>(
    text: &str,
    scope: &ParseScope<'_>,
    chart: Arc<Chart>,
    degree: Option<usize>,
    mode: TensorMode,
) -> Result<Tensor<K>> {
    let terms = parse_tensor_terms(text, scope, mode)?;
    let degree = degree.unwrap_or_else(|| terms.iter().map(|(_, i)| i.len()).max().unwrap_or(0));
    let terms = terms.into_iter().filter(|(c, i)| !(c.is_zero() && i.len() != degree)).collect();
    Tensor::from_terms(chart, degree, terms)
}

/// Parses `coeff * dx^dy + …`; the degree is taken from the summands.
pub fn parse_form(text: &str, scope: &ParseScope<'_>, chart: Arc<Chart>) -> Result<Form> {
    parse_tensor(text, scope, chart, None, TensorMode::Form)
}

/// Parses `coeff * @x^@y + …`.
pub fn parse_multivector(text: &str, scope: &ParseScope<'_>, chart: Arc<Chart>) -> Result<MultiVector> {
    parse_tensor(text, scope, chart, None, TensorMode::MultiVector)
}

/// Parses with a declared degree, so that `0` is a valid zero tensor.
pub fn parse_form_of_degree(text: &str, scope: &ParseScope<'_>, chart: Arc<Chart>, degree: usize) -> Result<Form> {
    parse_tensor(text, scope, chart, Some(degree), TensorMode::Form)
}

pub fn parse_multivector_of_degree(
    text: &str,
    scope: &ParseScope<'_>,
    chart: Arc<Chart>,
    degree: usize,
) -> Result<MultiVector> {
    parse_tensor(text, scope, chart, Some(degree), TensorMode::MultiVector)
}

/// `♯Λ(μ)`, characterized by `⟨ν, ♯Λ(μ)⟩ = Λ(μ, ν)`.
pub fn sharp(lambda: &MultiVector, mu: &Form) -> Result<VectorField> {
    if lambda.degree() != 2 || mu.degree() != 1 {
        return Err(Error::KindMismatch("sharp needs a bivector and a one-form".into()));
    }
    lambda.contract(mu)
}

/// `i(X)a`.
pub fn interior(x: &VectorField, a: &Form) -> Result<Form> {
    if a.degree() == 0 {
        return Err(Error::DegreeUnderflow { needed: 1 });
    }
    a.contract(x)
}

/// Pullback of a form along a smooth map.
pub fn pullback(phi: &SmoothMap, a: &Form) -> Result<Form> {
    a.chart().ensure_same(phi.target())?;
    let src = phi.source().clone();
    let jac = phi.jacobian();
    let dphi: Vec<Form> = (0..phi.target().dim())
        .map(|i| Form::from_components(src.clone(), jac[i].clone()).expect("dimension matches"))
        .collect();
    let mut out = Form::zero(src.clone(), a.degree());
    for (b, c) in a.components() {
        let mut term = Form::scalar(src.clone(), phi.pull_scalar(c));
        for i in indices(*b) {
            term = term.wedge(&dphi[i])?;
        }
        out = out.add(&term)?;
    }
    Ok(out)
}
