use std::sync::Arc;

use nalgebra::DVector;

use super::{CotangentGroupoid, DerivedGroupoid, Elem, GroupoidPresentation, TangentGroupoid};
use crate::error::Result;
use crate::exterior::SmoothMap;
use crate::expr::{Chart, Expr};
use crate::report::{max_residual_over, CheckEntry, Settings};

fn extend(c: &Chart) -> Result<Arc<Chart>> {
    Ok(Arc::new(c.extended(format!("{}xR", c.name()), "t", (-1.0, 1.0))?.0))
}

fn vars(range: std::ops::Range<usize>) -> Vec<Expr> {
    range.map(Expr::var).collect()
}

/// Splits the components of a sampler map into `k` blocks of `n`.
fn blocks(map: &SmoothMap, n: usize, k: usize) -> Vec<Vec<Expr>> {
    (0..k).map(|i| map.comps()[i * n..(i + 1) * n].to_vec()).collect()
}

/// `G × ℝ ⇒ M × ℝ` for a multiplicative `σ`:
/// `α(g,t) = (α g, σ(g) + t)`, `β(h,s) = (β h, s)`, `(g,t)(h,s) = (gh, t)`,
/// `ε(x,t) = (ε x, t)`, `(g,t)⁻¹ = (g⁻¹, σ(g) + t)`.
pub fn build_action_groupoid(gp: &GroupoidPresentation, sigma: &Expr) -> Result<GroupoidPresentation> {
    let (n, m) = (gp.dim_g(), gp.dim_m());
    let g = extend(&gp.g)?;
    let base = extend(&gp.m)?;
    let t_g = Expr::var(n);
    let with = |mut v: Vec<Expr>, last: Expr| {
        v.push(last);
        v
    };
    let alpha = SmoothMap::new(g.clone(), base.clone(), with(gp.alpha.comps().to_vec(), sigma.add(&t_g)))?;
    let beta = SmoothMap::new(g.clone(), base.clone(), with(gp.beta.comps().to_vec(), t_g.clone()))?;
    let unit = SmoothMap::new(base.clone(), g.clone(), with(gp.unit.comps().to_vec(), Expr::var(m)))?;
    let inverse = SmoothMap::new(g.clone(), g.clone(), with(gp.inverse.comps().to_vec(), sigma.add(&t_g)))?;

    let g2 = Arc::new(super::power_chart(&g, 2)?);
    let sub: Vec<Expr> = vars(0..n).into_iter().chain(vars(n + 1..2 * n + 1)).collect();
    let mc = gp.mult.comps().iter().map(|c| c.substitute(&sub)).collect();
    let mult = SmoothMap::new(g2.clone(), g.clone(), with(mc, t_g.clone()))?;

    let pc = extend(gp.pairs.source())?;
    let tp = Expr::var(pc.dim() - 1);
    let [sg, sh]: [Vec<Expr>; 2] = blocks(&gp.pairs, n, 2).try_into().expect("two blocks");
    let sig_g = sigma.substitute(&sg);
    let pairs_c = [with(sg, tp.clone()), with(sh, sig_g.add(&tp))].concat();
    let pairs = SmoothMap::new(pc, g2.clone(), pairs_c)?;

    let tc = extend(gp.triples.source())?;
    let tt = Expr::var(tc.dim() - 1);
    let [tg, th, tk]: [Vec<Expr>; 3] = blocks(&gp.triples, n, 3).try_into().expect("three blocks");
    let s1 = sigma.substitute(&tg).add(&tt);
    let s2 = sigma.substitute(&th).add(&s1);
    let g3 = Arc::new(super::power_chart(&g, 3)?);
    let triples = SmoothMap::new(tc, g3, [with(tg, tt), with(th, s1), with(tk, s2)].concat())?;

    GroupoidPresentation::new(format!("{}xR", gp.name), g, base, alpha, beta, unit, inverse, mult, pairs, triples)
}

fn split_t(v: &[f64]) -> (&[f64], f64) {
    (&v[..v.len() - 1], v[v.len() - 1])
}

fn join(v: &[f64], t: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    out.push(t);
    out
}

/// Compares the tangent groupoid of `G × ℝ` with its closed form in terms
/// of `TG`: source `(Tα X, X(σ) + λ)`, target `(Tβ Y, μ)`, product
/// `X ⊕ Y + λ ∂t`.
pub fn crosscheck_action_tangent(gp: &GroupoidPresentation, sigma: &Expr, st: &Settings) -> Result<CheckEntry> {
    let action = build_action_groupoid(gp, sigma)?;
    let generic = TangentGroupoid::new(&action);
    let closed = TangentGroupoid::extended(gp, sigma);
    let pairs = generic.sample_pairs(st, 0xE9)?;
    let n = gp.dim_g();
    // (g,t; X,λ) as a TG × ℝ element and the ℝ base coordinate
    let down = |a: &Elem| Elem::new(a.base[..n].to_vec(), a.fiber.clone());
    let ev = max_residual_over(&pairs, |(a, b)| {
        let (ga, ta) = split_t(&a.base);
        let s = generic.source(a)?;
        let want_s = closed.source(&down(a))?;
        let want_s = Elem::new(join(&want_s.base, sigma.eval(ga)? + ta), want_s.fiber);
        let t = generic.target(b)?;
        let want_t = closed.target(&down(b))?;
        let want_t = Elem::new(join(&want_t.base, split_t(&b.base).1), want_t.fiber);
        let p = generic.compose(a, b)?;
        let want_p = closed.compose(&down(a), &down(b))?;
        let want_p = Elem::new(join(&want_p.base, ta), want_p.fiber);
        Ok(s.gap(&want_s).max(t.gap(&want_t)).max(p.gap(&want_p)))
    });
    Ok(CheckEntry::from_eval("action.tangent_closed_form", "Eq.9", ev, st.tol))
}

/// Compares the cotangent groupoid of `G × ℝ` with its closed form in terms
/// of `T*G`: source `α̃(μ)`, target `β̃(ν) − ζ dσ|_A`, product
/// `(μ + ζ dσ_g) ⊕ ν + (γ + ζ) dt`, units with zero `dt` part.
pub fn crosscheck_action_cotangent(gp: &GroupoidPresentation, sigma: &Expr, st: &Settings) -> Result<CheckEntry> {
    let action = build_action_groupoid(gp, sigma)?;
    let generic = CotangentGroupoid::new(&action);
    let plain = CotangentGroupoid::new(gp);
    // extended with σ = 0 gives β̃(ν) − ζ·0; the dσ term is added here
    let ds: Vec<Expr> = (0..gp.dim_g()).map(|i| sigma.partial(i)).collect();
    let dsig = |g: &[f64]| -> Result<DVector<f64>> {
        Ok(DVector::from_vec(ds.iter().map(|d| d.eval(g)).collect::<Result<Vec<_>>>()?))
    };
    let pairs = generic.sample_pairs(st, 0xEA)?;
    let ev = max_residual_over(&pairs, |(a, b)| {
        let (g, ta) = split_t(&a.base);
        let (h, tb) = split_t(&b.base);
        let (mu, gamma) = split_t(&a.fiber);
        let (nu, zeta) = split_t(&b.fiber);

        let s = generic.source(a)?;
        let ps = plain.source(&Elem::new(g.to_vec(), mu.to_vec()))?;
        let want_s = Elem::new(join(&ps.base, sigma.eval(g)? + ta), join(&ps.fiber, 0.0));

        let t = generic.target(b)?;
        let pt = plain.target(&Elem::new(h.to_vec(), nu.to_vec()))?;
        let e = gp.unit.eval(&pt.base)?;
        let proj = gp.fiber_projector(&pt.base)?.transpose() * dsig(&e)?;
        let tf = DVector::from_column_slice(&pt.fiber) - proj * zeta;
        let want_t = Elem::new(join(&pt.base, tb), join(tf.as_slice(), 0.0));

        let p = generic.compose(a, b)?;
        let mu2 = DVector::from_column_slice(mu) + dsig(g)? * zeta;
        let rho = plain.plain_compose(g, &mu2, h, &DVector::from_column_slice(nu))?;
        let want_p = Elem::new(join(&gp.compose(g, h)?, ta), join(rho.as_slice(), gamma + zeta));

        let u = generic.unit(&s)?;
        let want_u = Elem::new(join(&gp.unit.eval(&ps.base)?, sigma.eval(g)? + ta), join(&ps.fiber, 0.0));

        Ok(s.gap(&want_s).max(t.gap(&want_t)).max(p.gap(&want_p)).max(u.gap(&want_u)))
    });
    Ok(CheckEntry::from_eval("action.cotangent_closed_form", "Eq.10", ev, st.tol))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{check_axioms, check_derived_axioms};
    use super::*;

    fn st() -> Settings {
        Settings::default().with_samples(24)
    }

    #[test]
    fn action_groupoid_is_a_groupoid() {
        let gp = pair_groupoid(false);
        let a = build_action_groupoid(&gp, &sigma_pair(&gp)).unwrap();
        assert_eq!(a.g.vars().last().unwrap(), "t");
        let es = check_axioms(&a, &st());
        assert!(es.iter().all(|e| e.passed()), "{es:#?}");
        let es = check_derived_axioms(&CotangentGroupoid::new(&a), "cot", "Eq.10", &st());
        assert!(es.iter().all(|e| e.passed()), "{es:#?}");
    }

    #[test]
    fn closed_forms_match_generic_lifts() {
        let gp = pair_groupoid(false);
        for s in [sigma_pair(&gp), Expr::zero()] {
            let t = crosscheck_action_tangent(&gp, &s, &st()).unwrap();
            assert!(t.passed(), "{t:?}");
            let c = crosscheck_action_cotangent(&gp, &s, &st()).unwrap();
            assert!(c.passed(), "{c:?}");
        }
    }
}
