//! Exact scalar fields on coordinate charts.
//!
//! An [`Expr`] is an immutable, reference-counted expression tree whose
//! variables are indices into a [`Chart`]. Trees are shared freely between
//! derived objects, so differentiation and substitution memoize on node
//! identity and never copy a shared subtree twice.

mod parse;
mod sample;

pub use parse::{parse_expr, ParseScope};
pub(crate) use parse::{parse_tensor_terms, TensorMode};
pub use sample::{random_scalar, sample_points, uniform_vector, DEFAULT_GUARD_EPS, MAX_REDRAWS};

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A global coordinate domain: ordered variable names plus a sampling box.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    name: String,
    vars: Vec<String>,
    bounds: Vec<(f64, f64)>,
}

impl Chart {
    pub fn new<S: Into<String>>(name: impl Into<String>, vars: impl IntoIterator<Item = S>) -> Result<Self> {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        let bounds = vec![(-1.0, 1.0); vars.len()];
        Self::with_bounds(name, vars, bounds)
    }

    pub fn with_bounds(name: impl Into<String>, vars: Vec<String>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        let name = name.into();
        if vars.len() != bounds.len() {
            return Err(Error::InvalidChart(format!("{name}: {} vars but {} bounds", vars.len(), bounds.len())));
        }
        if vars.len() > 32 {
            return Err(Error::InvalidChart(format!("{name}: dimension {} exceeds 32", vars.len())));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::InvalidChart(format!("{name}: duplicate variable `{v}`")));
            }
        }
        for (v, &(lo, hi)) in vars.iter().zip(&bounds) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidChart(format!("{name}: bad box [{lo}, {hi}] for `{v}`")));
            }
        }
        Ok(Chart { name, vars, bounds })
    }

    /// Cartesian product; variables of the `k`-th factor get `suffixes[k]` appended.
    pub fn product(name: impl Into<String>, factors: &[&Chart], suffixes: &[&str]) -> Result<Self> {
        let mut vars = Vec::new();
        let mut bounds = Vec::new();
        for (c, s) in factors.iter().zip(suffixes) {
            vars.extend(c.vars.iter().map(|v| format!("{v}{s}")));
            bounds.extend_from_slice(&c.bounds);
        }
        Self::with_bounds(name, vars, bounds)
    }

    /// Appends one variable, choosing a fresh name starting from `preferred`.
    pub fn extended(&self, name: impl Into<String>, preferred: &str, bound: (f64, f64)) -> Result<(Self, String)> {
        let mut var = preferred.to_string();
        while self.vars.contains(&var) {
            var.push('_');
        }
        let mut vars = self.vars.clone();
        vars.push(var.clone());
        let mut bounds = self.bounds.clone();
        bounds.push(bound);
        Ok((Self::with_bounds(name, vars, bounds)?, var))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn index_of(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }

    /// The coordinate functions of this chart.
    pub fn coords(&self) -> Vec<Expr> {
        (0..self.dim()).map(Expr::var).collect()
    }

    pub fn ensure_same(&self, other: &Chart) -> Result<()> {
        if self.name == other.name && self.vars == other.vars {
            Ok(())
        } else {
            Err(Error::ChartMismatch { expected: self.name.clone(), found: other.name.clone() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, u32),
    Call(Func, Expr),
}

/// Immutable scalar expression tree.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sexpr(None))
    }
}

/// Raw constructors keep the tree exactly as written; the parser uses these.
pub(crate) mod raw {
    use super::*;

    pub fn node(n: Node) -> Expr {
        Expr(Arc::new(n))
    }
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        raw::node(Node::Const(c))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var(i: usize) -> Expr {
        raw::node(Node::Var(i))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    // Smart constructors fold constants and identities so derived trees stay small.

    pub fn neg(&self) -> Expr {
        match &*self.0 {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => raw::node(Node::Neg(self.clone())),
        }
    }

    pub fn add(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(a), _) if a == 0.0 => o.clone(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => match &*o.0 {
                Node::Neg(inner) => raw::node(Node::Sub(self.clone(), inner.clone())),
                _ => raw::node(Node::Add(self.clone(), o.clone())),
            },
        }
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            (Some(a), _) if a == 0.0 => o.neg(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => match &*o.0 {
                Node::Neg(inner) => raw::node(Node::Add(self.clone(), inner.clone())),
                _ => raw::node(Node::Sub(self.clone(), o.clone())),
            },
        }
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(a), _) if a == 0.0 => Expr::zero(),
            (_, Some(b)) if b == 0.0 => Expr::zero(),
            (Some(a), _) if a == 1.0 => o.clone(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            (Some(a), _) if a == -1.0 => o.neg(),
            (_, Some(b)) if b == -1.0 => self.neg(),
            _ => match (&*self.0, &*o.0) {
                (Node::Neg(a), Node::Neg(b)) => a.mul(b),
                (Node::Neg(a), _) => a.mul(o).neg(),
                (_, Node::Neg(b)) => self.mul(b).neg(),
                _ => raw::node(Node::Mul(self.clone(), o.clone())),
            },
        }
    }

    pub fn div(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) if b != 0.0 => Expr::constant(a / b),
            (Some(a), _) if a == 0.0 => Expr::zero(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            (_, Some(b)) if b == -1.0 => self.neg(),
            _ => raw::node(Node::Div(self.clone(), o.clone())),
        }
    }

    pub fn powi(&self, n: u32) -> Expr {
        match (self.as_const(), n) {
            (_, 0) => Expr::one(),
            (_, 1) => self.clone(),
            (Some(c), _) => Expr::constant(c.powi(n as i32)),
            _ => raw::node(Node::Pow(self.clone(), n)),
        }
    }

    pub fn call(f: Func, arg: &Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            match f {
                Func::Exp if c == 0.0 => return Expr::one(),
                Func::Log if c == 1.0 => return Expr::zero(),
                Func::Sin if c == 0.0 => return Expr::zero(),
                Func::Cos if c == 0.0 => return Expr::one(),
                _ => {}
            }
        }
        raw::node(Node::Call(f, arg.clone()))
    }

    pub fn exp(&self) -> Expr {
        Expr::call(Func::Exp, self)
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr::constant(c).mul(self)
    }

    /// Evaluates at a coordinate vector. Non-finite intermediate results
    /// are domain errors carrying the point.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.eval_inner(x).map_err(|op| Error::Domain { op, point: x.to_vec() })
    }

    fn eval_inner(&self, x: &[f64]) -> std::result::Result<f64, &'static str> {
        let v = match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(i) => x[*i],
            Node::Neg(a) => -a.eval_inner(x)?,
            Node::Add(a, b) => a.eval_inner(x)? + b.eval_inner(x)?,
            Node::Sub(a, b) => a.eval_inner(x)? - b.eval_inner(x)?,
            Node::Mul(a, b) => a.eval_inner(x)? * b.eval_inner(x)?,
            Node::Div(a, b) => {
                let d = b.eval_inner(x)?;
                if d == 0.0 {
                    return Err("division");
                }
                a.eval_inner(x)? / d
            }
            Node::Pow(a, n) => a.eval_inner(x)?.powi(*n as i32),
            Node::Call(f, a) => {
                let u = a.eval_inner(x)?;
                match f {
                    Func::Exp => u.exp(),
                    Func::Log if u <= 0.0 => return Err("log"),
                    Func::Log => u.ln(),
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Sqrt if u < 0.0 => return Err("sqrt"),
                    Func::Sqrt => u.sqrt(),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err("overflow")
        }
    }

    /// Exact partial derivative with respect to chart variable `v`.
    pub fn partial(&self, v: usize) -> Expr {
        let mut memo = HashMap::new();
        self.partial_memo(v, &mut memo)
    }

    fn partial_memo(&self, v: usize, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.id()) {
            return d.clone();
        }
        let d = match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::Var(i) => Expr::constant(if *i == v { 1.0 } else { 0.0 }),
            Node::Neg(a) => a.partial_memo(v, memo).neg(),
            Node::Add(a, b) => a.partial_memo(v, memo).add(&b.partial_memo(v, memo)),
            Node::Sub(a, b) => a.partial_memo(v, memo).sub(&b.partial_memo(v, memo)),
            Node::Mul(a, b) => {
                let da = a.partial_memo(v, memo);
                let db = b.partial_memo(v, memo);
                da.mul(b).add(&a.mul(&db))
            }
            Node::Div(a, b) => {
                let da = a.partial_memo(v, memo);
                let db = b.partial_memo(v, memo);
                // (a/b)' = a'/b - a b' / b^2
                da.div(b).sub(&a.mul(&db).div(&b.powi(2)))
            }
            Node::Pow(a, n) => {
                let da = a.partial_memo(v, memo);
                Expr::constant(*n as f64).mul(&a.powi(n - 1)).mul(&da)
            }
            Node::Call(f, a) => {
                let da = a.partial_memo(v, memo);
                if da.is_zero() {
                    Expr::zero()
                } else {
                    let outer = match f {
                        Func::Exp => self.clone(),
                        Func::Log => Expr::one().div(a),
                        Func::Sin => Expr::call(Func::Cos, a),
                        Func::Cos => Expr::call(Func::Sin, a).neg(),
                        Func::Sqrt => Expr::constant(0.5).div(self),
                    };
                    outer.mul(&da)
                }
            }
        };
        memo.insert(self.id(), d.clone());
        d
    }

    /// Replaces variable `i` by `subs[i]` throughout.
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        let mut memo = HashMap::new();
        self.subst_memo(subs, &mut memo)
    }

    fn subst_memo(&self, subs: &[Expr], memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.id()) {
            return d.clone();
        }
        let r = match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Var(i) => subs[*i].clone(),
            Node::Neg(a) => a.subst_memo(subs, memo).neg(),
            Node::Add(a, b) => a.subst_memo(subs, memo).add(&b.subst_memo(subs, memo)),
            Node::Sub(a, b) => a.subst_memo(subs, memo).sub(&b.subst_memo(subs, memo)),
            Node::Mul(a, b) => a.subst_memo(subs, memo).mul(&b.subst_memo(subs, memo)),
            Node::Div(a, b) => a.subst_memo(subs, memo).div(&b.subst_memo(subs, memo)),
            Node::Pow(a, n) => a.subst_memo(subs, memo).powi(*n),
            Node::Call(f, a) => Expr::call(*f, &a.subst_memo(subs, memo)),
        };
        memo.insert(self.id(), r.clone());
        r
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match &*self.0 {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.max_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Infix rendering that the parser reads back to the same tree.
    pub fn display<'a>(&'a self, chart: &'a Chart) -> Infix<'a> {
        Infix { e: self, chart }
    }

    /// Prefix rendering, e.g. `(+ (* x y) (exp t))`.
    pub fn sexpr(&self, chart: Option<&Chart>) -> String {
        let name = |i: usize| match chart {
            Some(c) => c.vars()[i].clone(),
            None => format!("v{i}"),
        };
        match &*self.0 {
            Node::Const(c) => format!("{c}"),
            Node::Var(i) => name(*i),
            Node::Neg(a) => format!("(neg {})", a.sexpr(chart)),
            Node::Add(a, b) => format!("(+ {} {})", a.sexpr(chart), b.sexpr(chart)),
            Node::Sub(a, b) => format!("(- {} {})", a.sexpr(chart), b.sexpr(chart)),
            Node::Mul(a, b) => format!("(* {} {})", a.sexpr(chart), b.sexpr(chart)),
            Node::Div(a, b) => format!("(/ {} {})", a.sexpr(chart), b.sexpr(chart)),
            Node::Pow(a, n) => format!("(pow {} {n})", a.sexpr(chart)),
            Node::Call(f, a) => format!("({} {})", f.name(), a.sexpr(chart)),
        }
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

macro_rules! bin_op {
    ($tr:ident, $m:ident, $inner:ident) => {
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$inner(self, o)
            }
        }
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$inner(&self, &o)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$inner(&self, o)
            }
        }
    };
}

bin_op!(Add, add, add);
bin_op!(Sub, sub, sub);
bin_op!(Mul, mul, mul);
bin_op!(Div, div, div);

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

pub struct Infix<'a> {
    e: &'a Expr,
    chart: &'a Chart,
}

// Precedence levels: 0 sum, 1 product, 2 factor (signed atom or power), 3 atom.
fn level(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => 0,
        Node::Mul(..) | Node::Div(..) => 1,
        Node::Neg(_) | Node::Pow(..) => 2,
        Node::Const(c) if *c < 0.0 => 2,
        _ => 3,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, chart: &Chart, min: u8) -> fmt::Result {
    if level(e) < min {
        write!(f, "(")?;
        write_expr(f, e, chart)?;
        write!(f, ")")
    } else {
        write_expr(f, e, chart)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, chart: &Chart) -> fmt::Result {
    match e.node() {
        Node::Const(c) if *c < 0.0 => write!(f, "-{}", -c),
        Node::Const(c) => write!(f, "{c}"),
        Node::Var(i) => write!(f, "{}", chart.vars()[*i]),
        Node::Neg(a) => {
            write!(f, "-")?;
            match a.node() {
                // `-a^n` reads back as neg(pow(a, n))
                Node::Pow(..) => write_expr(f, a, chart),
                _ => write_at(f, a, chart, 3),
            }
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            write_at(f, a, chart, 0)?;
            write!(f, " {} ", if matches!(e.node(), Node::Add(..)) { "+" } else { "-" })?;
            write_at(f, b, chart, 1)
        }
        Node::Mul(a, b) | Node::Div(a, b) => {
            write_at(f, a, chart, 1)?;
            write!(f, " {} ", if matches!(e.node(), Node::Mul(..)) { "*" } else { "/" })?;
            write_at(f, b, chart, 2)
        }
        Node::Pow(a, n) => {
            write_at(f, a, chart, 3)?;
            write!(f, "^{n}")
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, chart)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Infix<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.e, self.chart)
    }
}

/// `|lhs - rhs| / (1 + max(|lhs|, |rhs|))`, the residual used by every check.
pub fn residual(lhs: f64, rhs: f64) -> f64 {
    let r = (lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs()));
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

/// Componentwise maximum of [`residual`].
pub fn max_residual(lhs: &[f64], rhs: &[f64]) -> f64 {
    assert_eq!(lhs.len(), rhs.len(), "residual of vectors with different lengths");
    lhs.iter().zip(rhs).map(|(a, b)| residual(*a, *b)).fold(0.0, f64::max)
}

/// Central-difference partial derivative, used as an oracle in tests.
pub fn central_difference(e: &Expr, v: usize, x: &[f64], h: f64) -> Result<f64> {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[v] += h;
    xm[v] -= h;
    Ok((e.eval(&xp)? - e.eval(&xm)?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyz() -> Chart {
        Chart::new("R3", ["x", "y", "z"]).unwrap()
    }

    #[test]
    fn chart_rejects_duplicates_and_bad_boxes() {
        assert!(Chart::new("c", ["x", "x"]).is_err());
        assert!(Chart::with_bounds("c", vec!["x".into()], vec![(1.0, 1.0)]).is_err());
        assert!(Chart::with_bounds("c", vec!["x".into()], vec![(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn eval_basic() {
        let c = xyz();
        assert_eq!(Expr::zero().exp().eval(&[0.0; 3]).unwrap(), 1.0);
        let xy = parse_expr("x*y", &ParseScope::new(&c)).unwrap();
        assert_eq!(xy.eval(&[2.0, 3.0, 0.0]).unwrap(), 6.0);
    }

    #[test]
    fn eval_reports_domain_errors() {
        let c = xyz();
        let e = parse_expr("1/x", &ParseScope::new(&c)).unwrap();
        match e.eval(&[0.0, 1.0, 2.0]) {
            Err(Error::Domain { op, point }) => {
                assert_eq!(op, "division");
                assert_eq!(point, vec![0.0, 1.0, 2.0]);
            }
            other => panic!("expected domain error, got {other:?}"),
        }
        let l = parse_expr("log(x)", &ParseScope::new(&c)).unwrap();
        assert!(l.eval(&[-1.0, 0.0, 0.0]).is_err());
        let s = parse_expr("sqrt(y)", &ParseScope::new(&c)).unwrap();
        assert!(s.eval(&[0.0, -0.5, 0.0]).is_err());
    }

    #[test]
    fn partial_matches_hand_derivatives() {
        let c = xyz();
        let scope = ParseScope::new(&c);
        let e = parse_expr("x^2*y", &scope).unwrap();
        let d = e.partial(0);
        let expect = parse_expr("2*x*y", &scope).unwrap();
        for p in [[0.3, -0.7, 0.1], [1.5, 2.0, -3.0]] {
            assert!((d.eval(&p).unwrap() - expect.eval(&p).unwrap()).abs() < 1e-14);
        }
        let s = parse_expr("exp(z)", &scope).unwrap();
        let ds = s.partial(2);
        assert!((ds.eval(&[0.0, 0.0, 0.7]).unwrap() - 0.7f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn smart_constructors_fold() {
        let x = Expr::var(0);
        assert!(x.mul(&Expr::zero()).is_zero());
        assert!(Expr::constant(2.0).mul(&Expr::constant(3.0)).as_const() == Some(6.0));
        assert!(x.partial(1).is_zero());
        assert!(matches!(x.neg().neg().node(), Node::Var(0)));
    }

    #[test]
    fn residual_is_relative() {
        assert_eq!(residual(1.0, 1.0), 0.0);
        assert!((residual(1e6, 1e6 + 1.0) - 1.0 / (1.0 + 1e6 + 1.0)).abs() < 1e-18);
        assert_eq!(residual(f64::NAN, 1.0), f64::INFINITY);
    }
}
