//! Contact, l.c.s. and Jacobi groupoids, and the algebroid of an l.c.s.
//! groupoid.

mod algebroid;
mod jacobi_groupoid;

pub use algebroid::{
    algebroid_bracket, check_koszul, compute_theta0, induced_jacobi_on_m, koszul_bracket, verify_algebroid_iso,
    verify_algebroid_iso_with, AlgebroidBracketData, Theta0,
};
pub use jacobi_groupoid::{
    check_jacobi_groupoid, sharp_at, theorem_4_6_crosscheck, Crosscheck, JacobiGroupoid, JacobiMode,
    LEFT_EXTENSION_SIGN,
};

use nalgebra::DVector;

use crate::error::Result;
use crate::exterior::{ext_deriv, pullback, Form, SmoothMap, VectorField};
use crate::expr::{residual, Expr};
use crate::groupoid::{build_action_groupoid, check_multiplicative, CotangentGroupoid, DerivedGroupoid, Elem, GroupoidPresentation};
use crate::jacobi::{
    check_lcs, contact_structure, lcs_first_kind, lcs_to_jacobi, points, tensor_gap, vec_gap, ContactStructure,
    JacobiStructure, LcsStructure,
};
use crate::report::{failed_eval, max_residual_over, CheckEntry, Evaluated, Settings};

/// A groupoid with a contact form `η` and multiplicative `σ`.
#[derive(Debug, Clone)]
pub struct ContactGroupoid {
    pub gp: GroupoidPresentation,
    pub contact: ContactStructure,
    pub sigma: Expr,
}

impl ContactGroupoid {
    /// Fails with `NotContact` when `η` is not contact.
    pub fn new(gp: GroupoidPresentation, eta: &Form, sigma: Expr) -> Result<Self> {
        eta.ensure_chart(&gp.g)?;
        Ok(ContactGroupoid { contact: contact_structure(eta)?, gp, sigma })
    }
}

/// A groupoid with an l.c.s. pair `(Ω, ω)` and multiplicative `σ`.
#[derive(Debug, Clone)]
pub struct LcsGroupoid {
    pub gp: GroupoidPresentation,
    pub lcs: LcsStructure,
    pub sigma: Expr,
}

impl LcsGroupoid {
    pub fn new(gp: GroupoidPresentation, lcs: LcsStructure, sigma: Expr) -> Result<Self> {
        lcs.omega.ensure_chart(&gp.g)?;
        Ok(LcsGroupoid { gp, lcs, sigma })
    }

    /// `θ = e^σ (dσ − ω)`.
    pub fn theta(&self) -> Result<Form> {
        let ds = Form::differential(self.gp.g.clone(), &self.sigma);
        Ok(ds.sub(&self.lcs.lee)?.scale(&self.sigma.exp()))
    }

    pub fn jacobi(&self) -> Result<JacobiStructure> {
        lcs_to_jacobi(&self.lcs)
    }

    /// The associated Jacobi groupoid.
    pub fn to_jacobi_groupoid(&self) -> Result<JacobiGroupoid> {
        Ok(JacobiGroupoid { gp: self.gp.clone(), jacobi: self.jacobi()?, sigma: self.sigma.clone() })
    }
}

/// Pullbacks along `m`, `pr₁`, `pr₂` through the pair sampler, evaluated
/// at sampled parameters.
pub(crate) struct PairPullbacks {
    m: SmoothMap,
    p1: SmoothMap,
    p2: SmoothMap,
    /// `e^{σ∘pr₁}` on the sampler chart.
    pub weight: Expr,
    pts: Vec<Vec<f64>>,
}

impl PairPullbacks {
    pub fn new(gp: &GroupoidPresentation, sigma: &Expr, st: &Settings, salt: u64) -> Result<Self> {
        let (m, p1, p2) = gp.pair_maps()?;
        let weight = p1.pull_scalar(sigma).exp();
        let pts = points(gp.pairs.source(), st, salt, &[])?;
        Ok(PairPullbacks { m, p1, p2, weight, pts })
    }

    pub fn m(&self, a: &Form) -> Result<Form> {
        pullback(&self.m, a)
    }

    pub fn p1(&self, a: &Form) -> Result<Form> {
        pullback(&self.p1, a)
    }

    pub fn p2(&self, a: &Form) -> Result<Form> {
        pullback(&self.p2, a)
    }

    pub fn gap(&self, lhs: Result<Form>, rhs: Result<Form>) -> Evaluated {
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => tensor_gap(&l, &r, &self.pts),
            (Err(e), _) | (_, Err(e)) => failed_eval(&e),
        }
    }

    /// `m*a` against `pr₁*a + e^{σ∘pr₁} pr₂*a`.
    pub fn twisted_gap(&self, a: &Form) -> Evaluated {
        let rhs = || -> Result<Form> { self.p1(a)?.add(&self.p2(a)?.scale(&self.weight)) };
        self.gap(self.m(a), rhs())
    }
}

fn eval_or_fail(id: &str, tag: &str, ev: Result<Evaluated>, tol: f64) -> CheckEntry {
    match ev {
        Ok(ev) => CheckEntry::from_eval(id, tag, ev, tol),
        Err(e) => CheckEntry::error(id, tag, &e, tol),
    }
}

/// Twisted multiplicativity of `η` on composable tangent pairs, `σ∘ε = 0`,
/// `ξ(σ) = 0` and the identity for `dη`.
pub fn check_contact_groupoid(d: &ContactGroupoid, st: &Settings) -> Vec<CheckEntry> {
    let tol = st.tol;
    let gp = &d.gp;
    let eta = &d.contact.eta;
    let mut out = Vec::new();
    let mult = check_multiplicative(gp, &d.sigma, st);
    for e in mult {
        let id = e.id.replace("multiplicative.", "contact_groupoid.sigma_");
        out.push(CheckEntry { id, ..e });
    }
    match PairPullbacks::new(gp, &d.sigma, st, 0x3E7) {
        Ok(pp) => {
            out.push(CheckEntry::from_eval("contact_groupoid.eta_multiplicative", "Eq.3", pp.twisted_gap(eta), tol));
            let d_eta = || -> Result<(Form, Form)> {
                let de = ext_deriv(eta)?;
                let ds = Form::differential(gp.g.clone(), &d.sigma);
                let twist = pp.p2(&de)?.add(&pp.p1(&ds)?.wedge(&pp.p2(eta)?)?)?;
                Ok((pp.m(&de)?, pp.p1(&de)?.add(&twist.scale(&pp.weight))?))
            };
            let ev = match d_eta() {
                Ok((l, r)) => pp.gap(Ok(l), Ok(r)),
                Err(e) => failed_eval(&e),
            };
            out.push(CheckEntry::from_eval("contact_groupoid.d_eta", "Eq.6", ev, tol));
        }
        Err(e) => {
            out.push(CheckEntry::error("contact_groupoid.eta_multiplicative", "Eq.3", &e, tol));
            out.push(CheckEntry::error("contact_groupoid.d_eta", "Eq.6", &e, tol));
        }
    }
    let ds: Vec<Expr> = (0..gp.dim_g()).map(|i| d.sigma.partial(i)).collect();
    let reeb = points(&gp.g, st, 0x3E8, &d.contact.guards).map(|pts| {
        max_residual_over(&pts, |p| {
            let xi = d.contact.reeb.eval(p)?;
            let v: f64 = ds.iter().zip(&xi).map(|(c, x)| Ok(c.eval(p)? * x)).sum::<Result<f64>>()?;
            Ok(residual(v, 0.0))
        })
    });
    out.push(eval_or_fail("contact_groupoid.reeb_sigma", "Eq.5", reeb, tol));
    out
}

/// Which labels the conditions of the l.c.s. groupoid definition carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Labels {
    Definition,
    FromContact,
}

impl Labels {
    fn label(self, key: &str) -> (String, String) {
        let (item, name) = match key {
            "omega" => ("i", "omega_multiplicative"),
            "alpha_lee" => ("ii", "alpha_lee"),
            "beta_theta" => ("ii", "beta_theta"),
            "lee_mult" => ("iii", "lee_multiplicative"),
            "theta_mult" => ("iii", "theta_multiplicative"),
            "lambda" => ("iv", "lambda_lee_theta"),
            "unit" => ("iv", "unit_identity"),
            _ => unreachable!("unknown condition {key}"),
        };
        match self {
            Labels::Definition => {
                let eq = match item {
                    "i" => "Eq.14",
                    "ii" => "Eq.15",
                    "iii" => "Eq.16",
                    _ => "Eq.17",
                };
                (format!("lcs_groupoid.{name}"), format!("Def4.1/{eq}"))
            }
            Labels::FromContact => (format!("from_contact.{item}.{name}"), format!("Prop3.1/{item}")),
        }
    }
}

fn lcs_groupoid_conditions(d: &LcsGroupoid, st: &Settings, labels: Labels) -> Vec<CheckEntry> {
    let tol = st.tol;
    let gp = &d.gp;
    let mut out = Vec::new();
    let mut push = |key: &str, ev: Result<Evaluated>| {
        let (id, tag) = labels.label(key);
        out.push(eval_or_fail(&id, &tag, ev, tol));
    };
    let theta = d.theta();
    let jac = d.jacobi();
    let guards = jac.as_ref().map(|j| j.guards.clone()).unwrap_or_default();

    match PairPullbacks::new(gp, &d.sigma, st, 0x14) {
        Ok(pp) => {
            push("omega", Ok(pp.twisted_gap(&d.lcs.omega)));
            push("lee_mult", Ok(pp.gap(pp.m(&d.lcs.lee), pp.p1(&d.lcs.lee))));
            let th = theta.clone().and_then(|t| Ok(pp.gap(pp.m(&t), Ok(pp.p2(&t)?.scale(&pp.weight)))));
            push("theta_mult", th);
        }
        Err(e) => {
            for k in ["omega", "lee_mult", "theta_mult"] {
                push(k, Err(e.clone()));
            }
        }
    }

    let cot = CotangentGroupoid::new(gp);
    let arrows = points(&gp.g, st, 0x15, &guards);
    let on_fiber = |f: &Form, beta: bool| -> Result<Evaluated> {
        let pts = arrows.clone()?;
        Ok(max_residual_over(&pts, |g| {
            let e = Elem::new(g.clone(), f.eval_dense(g)?);
            let v = if beta { cot.target(&e)? } else { cot.source(&e)? };
            Ok(vec_gap(&v.fiber, &vec![0.0; v.fiber.len()]))
        }))
    };
    push("alpha_lee", on_fiber(&d.lcs.lee, false));
    push("beta_theta", theta.clone().and_then(|t| on_fiber(&t, true)));

    let lam = match (&jac, &theta) {
        (Ok(j), Ok(t)) => j.lambda.pair(&d.lcs.lee, t).and_then(|e| {
            let pts = arrows.clone()?;
            Ok(max_residual_over(&pts, |g| Ok(residual(e.eval(g)?, 0.0))))
        }),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    push("lambda", lam);

    let unit = theta.and_then(|t| {
        let pts = points(&gp.m, st, 0x17, &[])?;
        Ok(max_residual_over(&pts, |x| {
            let e = gp.unit.eval(x)?;
            let lhs: Vec<f64> = t.eval_dense(&e)?.iter().zip(d.lcs.lee.eval_dense(&e)?).map(|(a, b)| a + b).collect();
            let w = Elem::new(e.clone(), d.lcs.lee.eval_dense(&e)?);
            let back = cot.unit(&cot.target(&w)?)?;
            Ok(vec_gap(&lhs, &back.fiber))
        }))
    });
    push("unit", unit);
    out
}

/// The l.c.s. structure, multiplicativity of `σ` and the four groupoid
/// conditions.
pub fn check_lcs_groupoid(d: &LcsGroupoid, st: &Settings) -> Vec<CheckEntry> {
    let mut out = check_lcs(&d.lcs, st);
    for e in check_multiplicative(&d.gp, &d.sigma, st) {
        let id = e.id.replace("multiplicative.", "lcs_groupoid.sigma_");
        out.push(CheckEntry { id, paper_tag: "Def4.1".into(), ..e });
    }
    out.extend(lcs_groupoid_conditions(d, st, Labels::Definition));
    out
}

/// `G × ℝ ⇒ M × ℝ` with the l.c.s. pair of the first kind and `σ̄ = σ∘π̄₁`.
pub fn build_lcs_from_contact(d: &ContactGroupoid) -> Result<LcsGroupoid> {
    let gp = build_action_groupoid(&d.gp, &d.sigma)?;
    let lcs = lcs_first_kind(&d.contact)?;
    // σ̄ reads the same expression: G coordinates keep their indices on G × ℝ
    LcsGroupoid::new(gp, lcs, d.sigma.clone())
}

/// The four items for the groupoid built from a contact groupoid, the Lee
/// form `−dt` and `E = −ξ`.
pub fn check_lcs_from_contact(d: &ContactGroupoid, st: &Settings) -> Vec<CheckEntry> {
    let tol = st.tol;
    let lg = match build_lcs_from_contact(d) {
        Ok(l) => l,
        Err(e) => return vec![CheckEntry::error("from_contact.build", "Prop3.1", &e, tol)],
    };
    let mut out = check_lcs(&lg.lcs, st);
    out.extend(lcs_groupoid_conditions(&lg, st, Labels::FromContact));
    let chart = lg.gp.g.clone();
    let t = chart.dim() - 1;
    let want = Form::differential_of_coord(chart.clone(), t).neg();
    let lee = points(&chart, st, 0x11, &[]).map(|pts| tensor_gap(&lg.lcs.lee, &want, &pts));
    out.push(eval_or_fail("from_contact.lee_form", "Eq.11", lee, tol));
    let e = lg.jacobi().and_then(|j| {
        let pts = points(&chart, st, 0x12, &[j.guards.clone(), d.contact.guards.clone()].concat())?;
        Ok(max_residual_over(&pts, |p| {
            let mut xi = d.contact.reeb.eval(&p[..t])?;
            xi.push(0.0);
            let minus: Vec<f64> = xi.iter().map(|v| -v).collect();
            Ok(vec_gap(&j.e.eval_dense(p)?, &minus))
        }))
    });
    out.push(eval_or_fail("from_contact.e_is_minus_reeb", "Eq.12", e, tol));
    out
}

/// `X(σ)` for a pointwise vector.
pub(crate) fn directional(f: &[Expr], g: &[f64], v: &DVector<f64>) -> Result<f64> {
    f.iter().zip(v.iter()).map(|(c, x)| Ok(c.eval(g)? * x)).sum()
}

pub(crate) fn dense_field(v: &VectorField, g: &[f64]) -> Result<DVector<f64>> {
    Ok(DVector::from_vec(v.eval_dense(g)?))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use std::sync::Arc;

    use super::*;
    use crate::exterior::parse_form;
    use crate::expr::{parse_expr, Chart, ParseScope};
    use crate::groupoid::fixtures::{cotangent_additive, pair_groupoid};
    use crate::groupoid::power_chart;

    fn form(gp: &GroupoidPresentation, s: &str) -> Form {
        parse_form(s, &ParseScope::new(&gp.g), gp.g.clone()).unwrap()
    }

    fn scalar(gp: &GroupoidPresentation, s: &str) -> Expr {
        parse_expr(s, &ParseScope::new(&gp.g)).unwrap()
    }

    pub fn pair_symplectic() -> LcsGroupoid {
        let gp = pair_groupoid(false);
        let omega = form(&gp, "1 * dp1^dq1 - 1 * dp2^dq2");
        let lcs = LcsStructure::new(omega, Form::zero(gp.g.clone(), 1)).unwrap();
        LcsGroupoid::new(gp, lcs, Expr::zero()).unwrap()
    }

    /// `Ω = e^{f(x)}(dp1∧dq1 − dp2∧dq2)`, `ω = β*df`, `σ = f(x) − f(y)`.
    pub fn pair_lcs() -> LcsGroupoid {
        let gp = pair_groupoid(false);
        let omega = form(&gp, "exp(sin(p1) + 0.5*q1) * dp1^dq1 - exp(sin(p1) + 0.5*q1) * dp2^dq2");
        let lee = form(&gp, "cos(p1) * dp1 + 0.5 * dq1");
        let sigma = scalar(&gp, "sin(p1) + 0.5*q1 - sin(p2) - 0.5*q2");
        LcsGroupoid::new(gp, LcsStructure::new(omega, lee).unwrap(), sigma).unwrap()
    }

    pub fn cotangent_symplectic() -> LcsGroupoid {
        let gp = cotangent_additive();
        let omega = form(&gp, "1 * dx1^dp1 + 1 * dx2^dp2");
        let lcs = LcsStructure::new(omega, Form::zero(gp.g.clone(), 1)).unwrap();
        LcsGroupoid::new(gp, lcs, Expr::zero()).unwrap()
    }

    fn map(src: &Arc<Chart>, dst: &Arc<Chart>, comps: &[&str]) -> SmoothMap {
        let scope = ParseScope::new(src);
        SmoothMap::new(src.clone(), dst.clone(), comps.iter().map(|c| parse_expr(c, &scope).unwrap()).collect()).unwrap()
    }

    /// `T*ℝ² × ℝ ⇒ ℝ²` with fiberwise addition of `(p, z)` and
    /// `η = dz − p1 dx1 − p2 dx2`.
    pub fn contact_cotangent(eta: &str) -> ContactGroupoid {
        let m = Arc::new(Chart::new("M", ["x1", "x2"]).unwrap());
        let g = Arc::new(Chart::new("G", ["x1", "x2", "p1", "p2", "z"]).unwrap());
        let g2 = Arc::new(power_chart(&g, 2).unwrap());
        let g3 = Arc::new(power_chart(&g, 3).unwrap());
        let pc = Arc::new(Chart::new("P", ["x1", "x2", "a1", "a2", "a3", "b1", "b2", "b3"]).unwrap());
        let tc = Arc::new(Chart::new("T", ["x1", "x2", "a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3"]).unwrap());
        let gp = GroupoidPresentation::new(
            "contact",
            g.clone(),
            m.clone(),
            map(&g, &m, &["x1", "x2"]),
            map(&g, &m, &["x1", "x2"]),
            map(&m, &g, &["x1", "x2", "0", "0", "0"]),
            map(&g, &g, &["x1", "x2", "-p1", "-p2", "-z"]),
            map(&g2, &g, &["x1", "x2", "p1 + p1'", "p2 + p2'", "z + z'"]),
            map(&pc, &g2, &["x1", "x2", "a1", "a2", "a3", "x1", "x2", "b1", "b2", "b3"]),
            map(&tc, &g3, &["x1", "x2", "a1", "a2", "a3", "x1", "x2", "b1", "b2", "b3", "x1", "x2", "c1", "c2", "c3"]),
        )
        .unwrap();
        let eta = parse_form(eta, &ParseScope::new(&g), g.clone()).unwrap();
        ContactGroupoid::new(gp, &eta, Expr::zero()).unwrap()
    }

    pub fn contact_to_lcs() -> LcsGroupoid {
        build_lcs_from_contact(&contact_cotangent("1 * dz - p1 * dx1 - p2 * dx2")).unwrap()
    }

    /// Non-multiplicative `Ω` on the pair groupoid.
    pub fn broken_omega() -> LcsGroupoid {
        let d = pair_symplectic();
        let omega = form(&d.gp, "exp(p1) * dp1^dq1 - 1 * dp2^dq2");
        LcsGroupoid { lcs: LcsStructure::new(omega, d.lcs.lee.clone()).unwrap(), ..d }
    }

    /// Multiplicative but nonzero `σ` with `ω = 0`.
    pub fn wrong_sigma() -> LcsGroupoid {
        let d = pair_symplectic();
        let sigma = scalar(&d.gp, "sin(p1) + 0.5*q1 - sin(p2) - 0.5*q2");
        LcsGroupoid { sigma, ..d }
    }

    pub fn broken_sigma() -> LcsGroupoid {
        let d = pair_symplectic();
        let sigma = scalar(&d.gp, "p1*q2");
        LcsGroupoid { sigma, ..d }
    }

    pub fn broken_lee() -> LcsGroupoid {
        let d = pair_symplectic();
        let lee = form(&d.gp, "p2 * dq1");
        LcsGroupoid { lcs: LcsStructure::new(d.lcs.omega.clone(), lee).unwrap(), ..d }
    }

    /// `pair_lcs` with `σ` replaced by zero.
    pub fn lcs_sigma_dropped() -> LcsGroupoid {
        LcsGroupoid { sigma: Expr::zero(), ..pair_lcs() }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn st() -> Settings {
        Settings::default().with_samples(24)
    }

    fn failing(es: &[CheckEntry]) -> Vec<String> {
        es.iter().filter(|e| !e.passed()).map(|e| format!("{} {} {:e}", e.id, e.paper_tag, e.max_residual)).collect()
    }

    #[test]
    fn contact_groupoid_conditions() {
        let d = contact_cotangent("1 * dz - p1 * dx1 - p2 * dx2");
        let es = check_contact_groupoid(&d, &st());
        assert!(failing(&es).is_empty(), "{:?}", failing(&es));
        let bad = contact_cotangent("1 * dz - p1 * dx1 - p2 * dx2 + p1 * dp1");
        let es = check_contact_groupoid(&bad, &st());
        let f = failing(&es);
        assert!(f.iter().any(|s| s.contains("Eq.3")), "{f:?}");
    }

    #[test]
    fn from_contact_items() {
        let d = contact_cotangent("1 * dz - p1 * dx1 - p2 * dx2");
        let es = check_lcs_from_contact(&d, &st());
        assert!(failing(&es).is_empty(), "{:?}", failing(&es));
        assert_eq!(es.iter().filter(|e| e.id.starts_with("from_contact.")).count(), 9);
    }

    #[test]
    fn passing_lcs_groupoids() {
        for d in [pair_symplectic(), pair_lcs(), cotangent_symplectic(), contact_to_lcs()] {
            let es = check_lcs_groupoid(&d, &st());
            assert!(failing(&es).is_empty(), "{}: {:?}", d.gp.name, failing(&es));
        }
    }

    #[test]
    fn perturbations_fail_where_expected() {
        let has = |d: LcsGroupoid, tag: &str| {
            let f = failing(&check_lcs_groupoid(&d, &st()));
            assert!(f.iter().any(|s| s.contains(tag)), "{tag}: {f:?}");
        };
        has(broken_omega(), "Eq.14");
        has(broken_lee(), "lcs.closed");
        has(broken_sigma(), "lcs_groupoid.sigma_additive");
        has(wrong_sigma(), "Eq.16");
        has(lcs_sigma_dropped(), "Eq.16");
    }
}
