use super::{dense_field, LcsGroupoid};
use crate::error::{Error, Result};
use crate::exterior::{ext_deriv, interior, lie_bracket, pullback, sharp, Form, LieDerivative, MultiVector, VectorField};
use crate::expr::{random_scalar, Expr};
use crate::jacobi::{check_jacobi, conformal_pushforward, points, tensor_gap, vec_gap, JacobiStructure, Pushforward};
use crate::linalg::rank;
use crate::report::{failed_eval, max_residual_over, CheckEntry, Evaluated, Settings};

const TAG: &str = "Prop5.1";
const ISO: &str = "Thm5.2";

/// `(Λ₀, E₀)` on `M` and the closed form `θ₀`.
#[derive(Debug, Clone)]
pub struct AlgebroidBracketData {
    pub lambda0: MultiVector,
    pub e0: VectorField,
    pub theta0: Form,
}

/// `(α, e^σ)`-pushforward of the Jacobi structure of `(Ω, ω)`.
pub fn induced_jacobi_on_m(d: &LcsGroupoid, st: &Settings) -> Result<Pushforward> {
    let j = d.jacobi()?;
    conformal_pushforward(&d.gp.alpha, &d.gp.unit, &d.sigma, &j, st)?.require_projectable()
}

#[derive(Debug, Clone)]
pub struct Theta0 {
    pub form: Form,
    pub induced: JacobiStructure,
    pub entries: Vec<CheckEntry>,
}

impl Theta0 {
    pub fn bracket_data(&self) -> AlgebroidBracketData {
        AlgebroidBracketData { lambda0: self.induced.lambda.clone(), e0: self.induced.e.clone(), theta0: self.form.clone() }
    }
}

/// `θ₀ = ε*(e^{−σ}θ)` with `α*θ₀ = e^{−σ}θ`, `dθ₀ = 0` and `♯Λ₀(θ₀) = E₀`.
pub fn compute_theta0(d: &LcsGroupoid, st: &Settings) -> Result<Theta0> {
    let tol = st.tol;
    let gp = &d.gp;
    // e^{−σ}θ = dσ − ω
    let basic = Form::differential(gp.g.clone(), &d.sigma).sub(&d.lcs.lee)?;
    let form = pullback(&gp.unit, &basic)?;
    let pts = points(&gp.g, st, 0x50, &[])?;
    let up = pullback(&gp.alpha, &form)?;
    let ev = tensor_gap(&up, &basic, &pts);
    if ev.max > tol {
        return Err(Error::BasicnessViolation { residual: ev.max });
    }
    let mut entries = vec![CheckEntry::from_eval("theta0.basic", TAG, ev, tol)];
    let push = induced_jacobi_on_m(d, st)?;
    entries.extend(push.entries.iter().cloned());
    let induced = push.jacobi;
    let mpts = points(&gp.m, st, 0x51, &induced.guards)?;
    let closed = if gp.dim_m() >= 2 {
        match ext_deriv(&form) {
            Ok(df) => tensor_gap(&df, &Form::zero(gp.m.clone(), 2), &mpts),
            Err(e) => failed_eval(&e),
        }
    } else {
        Evaluated { max: 0.0, samples: mpts.len(), error: None }
    };
    entries.push(CheckEntry::from_eval("theta0.closed", TAG, closed, tol));
    let anchor = match sharp(&induced.lambda, &form) {
        Ok(s) => tensor_gap(&s, &induced.e, &mpts),
        Err(e) => failed_eval(&e),
    };
    entries.push(CheckEntry::from_eval("theta0.sharp_is_e0", TAG, anchor, tol));
    Ok(Theta0 { form, induced, entries })
}

/// `⟦μ,ν⟧ = 𝓛_{♯μ}ν − 𝓛_{♯ν}μ − d(Λ₀(μ,ν)) − i(E₀)(μ∧ν) − Λ₀(μ,ν)θ₀`.
pub fn algebroid_bracket(b: &AlgebroidBracketData, mu: &Form, nu: &Form) -> Result<Form> {
    let chart = b.lambda0.chart().clone();
    let pair = b.lambda0.pair(mu, nu)?;
    let mut out = nu
        .lie_deriv(&sharp(&b.lambda0, mu)?)?
        .sub(&mu.lie_deriv(&sharp(&b.lambda0, nu)?)?)?
        .sub(&Form::differential(chart.clone(), &pair))?
        .sub(&b.theta0.scale(&pair))?;
    if chart.dim() >= 2 {
        out = out.sub(&interior(&b.e0, &mu.wedge(nu)?)?)?;
    }
    Ok(out)
}

/// Cotangent bracket of a bivector from coordinates:
/// `[μ,ν]_k = ∂_kΛ^{ij} μ_i ν_j + Λ^{ij}(μ_i ∂_j ν_k − ν_i ∂_j μ_k)`.
pub fn koszul_bracket(lambda: &MultiVector, mu: &Form, nu: &Form) -> Result<Form> {
    let chart = lambda.chart().clone();
    let n = chart.dim();
    let l = |i: usize, j: usize| lambda.component(&[i, j]);
    let m = mu.dense();
    let v = nu.dense();
    let comps = (0..n)
        .map(|k| {
            let mut acc = Expr::zero();
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let lij = l(i, j);
                    acc = acc.add(&lij.partial(k).mul(&m[i]).mul(&v[j]));
                    acc = acc.add(&lij.mul(&m[i].mul(&v[k].partial(j)).sub(&v[i].mul(&m[k].partial(j)))));
                }
            }
            acc
        })
        .collect();
    Form::from_components(chart, comps)
}

/// A seeded polynomial-plus-sine 1-form on the base chart.
fn test_form(chart: &std::sync::Arc<crate::expr::Chart>, seed: u64, k: u64) -> Result<Form> {
    let n = chart.dim();
    let comps = (0..n as u64).map(|i| random_scalar(n, seed, k * 16 + i)).collect();
    Form::from_components(chart.clone(), comps)
}

/// Checks `Ψ(μ) = e^σ ♯Λ(α*μ)` against the bracket data.
pub fn verify_algebroid_iso(d: &LcsGroupoid, st: &Settings) -> Vec<CheckEntry> {
    match compute_theta0(d, st) {
        Ok(t) => {
            let mut out = t.entries.clone();
            out.extend(check_jacobi(&t.induced, st).into_iter().map(|e| CheckEntry { id: format!("induced.{}", e.id), ..e }));
            out.extend(verify_algebroid_iso_with(d, &t.bracket_data(), st));
            out
        }
        Err(e) => vec![CheckEntry::error("theta0.basic", TAG, &e, st.tol)],
    }
}

/// The isomorphism blocks for given bracket data: `Ψ(μ)` is `β`-vertical
/// and left-invariant, has full rank at units, intertwines the anchors,
/// carries the bracket, and `⟦·,·⟧` obeys Jacobi and Leibniz.
pub fn verify_algebroid_iso_with(d: &LcsGroupoid, b: &AlgebroidBracketData, st: &Settings) -> Vec<CheckEntry> {
    let tol = st.tol;
    let gp = &d.gp;
    let ids = [
        "algebroid.anchor",
        "algebroid.bracket",
        "algebroid.jacobi_identity",
        "algebroid.leibniz",
        "algebroid.psi_left_invariant",
        "algebroid.psi_rank",
        "algebroid.psi_vertical",
    ];
    let fail_all = |e: &Error| ids.iter().map(|id| CheckEntry::error(*id, ISO, e, tol)).collect::<Vec<_>>();
    let setup = || -> Result<_> {
        let j = d.jacobi()?;
        let forms: Vec<Form> = (0..3).map(|k| test_form(&gp.m, st.seed, k)).collect::<Result<_>>()?;
        let es = d.sigma.exp();
        let psi = |mu: &Form| -> Result<VectorField> { Ok(sharp(&j.lambda, &pullback(&gp.alpha, mu)?)?.scale(&es)) };
        let psis: Vec<VectorField> = forms.iter().map(psi).collect::<Result<_>>()?;
        let gpts = points(&gp.g, st, 0x52, &j.guards)?;
        let mpts = points(&gp.m, st, 0x53, &[])?;
        let pairs = gp.sample_pairs(st, 0x54)?;
        Ok((j, forms, psis, gpts, mpts, pairs))
    };
    let (j, forms, psis, gpts, mpts, pairs) = match setup() {
        Ok(s) => s,
        Err(e) => return fail_all(&e),
    };
    let mut out = Vec::new();

    let vertical = max_residual_over(&gpts, |g| {
        let jb = gp.beta.jacobian_at(g)?;
        let mut r: f64 = 0.0;
        for p in &psis {
            let v = &jb * dense_field(p, g)?;
            r = r.max(vec_gap(v.as_slice(), &vec![0.0; v.len()]));
        }
        Ok(r)
    });
    out.push(CheckEntry::from_eval("algebroid.psi_vertical", ISO, vertical, tol));

    let left = max_residual_over(&pairs, |(g, h)| {
        let (_, jh) = gp.mult_blocks(g, h)?;
        let gh = gp.compose(g, h)?;
        let mut r: f64 = 0.0;
        for p in &psis {
            let moved = &jh * dense_field(p, h)?;
            r = r.max(vec_gap(dense_field(p, &gh)?.as_slice(), moved.as_slice()));
        }
        Ok(r)
    });
    out.push(CheckEntry::from_eval("algebroid.psi_left_invariant", ISO, left, tol));

    let m = gp.dim_m();
    let rank_ev = max_residual_over(&mpts, |x| {
        let e = gp.unit.eval(x)?;
        let map = j.lambda.eval_matrix(&e)?.transpose() * gp.alpha.jacobian_at(&e)?.transpose() * d.sigma.eval(&e)?.exp();
        Ok(if rank(&map, 1e-9) == m { 0.0 } else { 1.0 })
    });
    out.push(CheckEntry::from_eval("algebroid.psi_rank", ISO, rank_ev, tol));

    let anchors: Result<Vec<VectorField>> = forms.iter().map(|f| sharp(&b.lambda0, f)).collect();
    let anchor = match &anchors {
        Ok(anchors) => max_residual_over(&gpts, |g| {
            let ja = gp.alpha.jacobian_at(g)?;
            let x = gp.alpha.eval(g)?;
            let mut r: f64 = 0.0;
            for (p, a) in psis.iter().zip(anchors) {
                let v = &ja * dense_field(p, g)?;
                r = r.max(vec_gap(v.as_slice(), &a.eval_dense(&x)?));
            }
            Ok(r)
        }),
        Err(e) => failed_eval(e),
    };
    out.push(CheckEntry::from_eval("algebroid.anchor", ISO, anchor, tol));

    let bracket = || -> Result<Evaluated> {
        let lhs = interior(&lie_bracket(&psis[0], &psis[1])?, &d.lcs.omega)?;
        let down = algebroid_bracket(b, &forms[0], &forms[1])?;
        let rhs = pullback(&gp.alpha, &down)?.scale(&d.sigma.exp().neg());
        Ok(tensor_gap(&lhs, &rhs, &gpts))
    };
    out.push(match bracket() {
        Ok(ev) => CheckEntry::from_eval("algebroid.bracket", ISO, ev, tol),
        Err(e) => CheckEntry::error("algebroid.bracket", ISO, &e, tol),
    });

    let jacobi = || -> Result<Evaluated> {
        let br = |x: &Form, y: &Form| algebroid_bracket(b, x, y);
        let (a, c, e) = (&forms[0], &forms[1], &forms[2]);
        let sum = br(a, &br(c, e)?)?.add(&br(c, &br(e, a)?)?)?.add(&br(e, &br(a, c)?)?)?;
        Ok(tensor_gap(&sum, &Form::zero(gp.m.clone(), 1), &mpts))
    };
    out.push(match jacobi() {
        Ok(ev) => CheckEntry::from_eval("algebroid.jacobi_identity", ISO, ev, tol),
        Err(e) => CheckEntry::error("algebroid.jacobi_identity", ISO, &e, tol),
    });

    let leibniz = || -> Result<Evaluated> {
        let f = random_scalar(m, st.seed ^ 0x1e1b, 0);
        let (a, c) = (&forms[0], &forms[1]);
        let lhs = algebroid_bracket(b, a, &c.scale(&f))?;
        let anchor_f = sharp(&b.lambda0, a)?.apply_to(&f);
        let rhs = algebroid_bracket(b, a, c)?.scale(&f).add(&c.scale(&anchor_f))?;
        Ok(tensor_gap(&lhs, &rhs, &mpts))
    };
    out.push(match leibniz() {
        Ok(ev) => CheckEntry::from_eval("algebroid.leibniz", ISO, ev, tol),
        Err(e) => CheckEntry::error("algebroid.leibniz", ISO, &e, tol),
    });
    out
}

/// `⟦μ,ν⟧` against the cotangent bracket of `Λ₀` on seeded forms. Meant
/// for symplectic items, where `θ₀` and `E₀` vanish.
pub fn check_koszul(d: &LcsGroupoid, st: &Settings) -> CheckEntry {
    let id = "algebroid.koszul";
    let run = || -> Result<Evaluated> {
        let b = compute_theta0(d, st)?.bracket_data();
        let m = &d.gp.m;
        let pts = points(m, st, 0x55, &[])?;
        let forms: Vec<Form> = (3..6).map(|k| test_form(m, st.seed, k)).collect::<Result<_>>()?;
        let mut ev = Evaluated { max: 0.0, samples: pts.len(), error: None };
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let br = algebroid_bracket(&b, &forms[i], &forms[j])?;
            let k = koszul_bracket(&b.lambda0, &forms[i], &forms[j])?;
            ev = ev.merge(tensor_gap(&br, &k, &pts));
        }
        Ok(ev)
    };
    match run() {
        Ok(ev) => CheckEntry::from_eval(id, "Rem5.3", ev, st.tol),
        Err(e) => CheckEntry::error(id, "Rem5.3", &e, st.tol),
    }
}

/// Pointwise `ε*(dσ − ω)`.
#[cfg(test)]
fn theta0_at(d: &LcsGroupoid, x: &[f64]) -> Result<nalgebra::DVector<f64>> {
    let e = d.gp.unit.eval(x)?;
    let je = d.gp.unit.jacobian_at(x)?;
    let ds: Vec<f64> = (0..d.gp.dim_g()).map(|i| d.sigma.partial(i).eval(&e)).collect::<Result<_>>()?;
    let w = d.lcs.lee.eval_dense(&e)?;
    let v = nalgebra::DVector::from_iterator(ds.len(), ds.iter().zip(&w).map(|(a, b)| a - b));
    Ok(je.transpose() * v)
}
