use nalgebra::DVector;

use super::{random_combination, DerivedGroupoid, Elem, GroupoidPresentation};
use crate::error::{Error, Result};
use crate::expr::{uniform_vector, Expr};
use crate::linalg::{null_space, rank, solve, Matrix, DEFAULT_TOL};
use crate::report::Settings;

/// Covector groupoids over `A*`.
///
/// An element of `A*_x` is a covector at `ε(x)` vanishing on `im Tε`.
/// Plain: `α̃(μ)(v) = −μ(T L_g Tι v)`, `β̃(ν)(v) = ν(T R_h v)`, `ε̃(a) = a`,
/// and `μ ⊕ ν` is the covector at `gh` that pulls back to `(μ, ν)` on
/// composable tangent pairs. With `σ`, either the twisted cotangent
/// groupoid (`α̃ e^{−σ}`, product `μ ⊕ e^{σ(g)}ν`) or the extended
/// `T*G × ℝ` whose last fiber entry is the `ℝ` component.
#[derive(Debug, Clone)]
pub struct CotangentGroupoid {
    pub gp: GroupoidPresentation,
    sigma: Option<Expr>,
    dsigma: Vec<Expr>,
    extended: bool,
}

impl CotangentGroupoid {
    pub fn new(gp: &GroupoidPresentation) -> Self {
        CotangentGroupoid { gp: gp.clone(), sigma: None, dsigma: Vec::new(), extended: false }
    }

    /// The `σ`-twisted cotangent groupoid.
    pub fn twisted(gp: &GroupoidPresentation, sigma: &Expr) -> Self {
        let dsigma = (0..gp.dim_g()).map(|i| sigma.partial(i)).collect();
        CotangentGroupoid { gp: gp.clone(), sigma: Some(sigma.clone()), dsigma, extended: false }
    }

    /// `T*G × ℝ ⇒ A*` twisted by `σ`.
    pub fn extended(gp: &GroupoidPresentation, sigma: &Expr) -> Self {
        CotangentGroupoid { extended: true, ..Self::twisted(gp, sigma) }
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    fn sigma_at(&self, g: &[f64]) -> Result<f64> {
        self.sigma.as_ref().map_or(Ok(0.0), |s| s.eval(g))
    }

    fn dsigma_at(&self, g: &[f64]) -> Result<DVector<f64>> {
        let v: Vec<f64> = self.dsigma.iter().map(|d| d.eval(g)).collect::<Result<_>>()?;
        Ok(DVector::from_vec(v))
    }

    fn split(&self, a: &Elem) -> Result<(DVector<f64>, f64)> {
        let n = self.gp.dim_g();
        if a.base.len() != n || a.fiber.len() != n + self.extended as usize {
            return Err(Error::Definition(format!("covector element has shape ({}, {})", a.base.len(), a.fiber.len())));
        }
        Ok((DVector::from_column_slice(&a.fiber[..n]), a.fiber.get(n).copied().unwrap_or(0.0)))
    }

    fn pack(&self, base: Vec<f64>, v: &DVector<f64>, extra: f64) -> Elem {
        let mut fiber = v.as_slice().to_vec();
        if self.extended {
            fiber.push(extra);
        }
        Elem::new(base, fiber)
    }

    /// `K` with `α̃(μ) = Kᵀμ`, untwisted.
    pub fn alpha_operator(&self, g: &[f64]) -> Result<Matrix> {
        let x = self.gp.alpha.eval(g)?;
        let e = self.gp.unit.eval(&x)?;
        let (_, jh) = self.gp.mult_blocks(g, &e)?;
        let ji = self.gp.inverse.jacobian_at(&e)?;
        Ok(-(jh * ji * self.gp.fiber_projector(&x)?))
    }

    /// `B` with `β̃(ν) = Bᵀν`, untwisted.
    pub fn beta_operator(&self, h: &[f64]) -> Result<Matrix> {
        let x = self.gp.beta.eval(h)?;
        let e = self.gp.unit.eval(&x)?;
        let (jg, _) = self.gp.mult_blocks(&e, h)?;
        Ok(jg * self.gp.fiber_projector(&x)?)
    }

    /// `dσ` at `ε(x)` restricted to `A_x`, as a covector vanishing on `im Tε`.
    fn dsigma_on_fiber(&self, x: &[f64]) -> Result<DVector<f64>> {
        let e = self.gp.unit.eval(x)?;
        Ok(self.gp.fiber_projector(x)?.transpose() * self.dsigma_at(&e)?)
    }

    /// The untwisted product `μ_g ⊕ ν_h`.
    pub fn plain_compose(&self, g: &[f64], mu: &DVector<f64>, h: &[f64], nu: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.gp.dim_g();
        let basis = self.gp.composable_tangents(g, h)?;
        let (jg, jh) = self.gp.mult_blocks(g, h)?;
        let mut z = Matrix::zeros(n, basis.len());
        let mut b = DVector::zeros(basis.len());
        for (k, (x, y)) in basis.iter().enumerate() {
            z.set_column(k, &(&jg * x + &jh * y));
            b[k] = mu.dot(x) + nu.dot(y);
        }
        let r = rank(&z, 1e-9);
        if r < n {
            return Err(Error::RankDeficiency { expected: n, found: r });
        }
        let s = solve(&z.transpose(), &b, 1e-9);
        if !s.consistent {
            return Err(Error::NotComposable { residual: s.residual });
        }
        Ok(s.x)
    }

    /// A covector `μ` at `g` with `source(μ) = a`, plus a seeded kernel part.
    fn lift_source(&self, g: &[f64], a: &DVector<f64>, seed: u64, index: u64) -> Result<DVector<f64>> {
        let n = self.gp.dim_g();
        let scale = (-self.sigma_at(g)?).exp();
        let kt = self.alpha_operator(g)?.transpose() * scale;
        let s = solve(&kt, a, 1e-9);
        if !s.consistent {
            return Err(Error::NotComposable { residual: s.residual });
        }
        let ker = null_space(&kt, DEFAULT_TOL);
        Ok(s.x + random_combination(&ker, n, seed, index))
    }

    fn random_covector(&self, seed: u64, index: u64) -> DVector<f64> {
        DVector::from_vec(uniform_vector(self.gp.dim_g(), seed, index))
    }

    fn random_extra(&self, seed: u64, index: u64) -> f64 {
        if self.extended {
            uniform_vector(1, seed ^ 0x5, index)[0]
        } else {
            0.0
        }
    }
}

impl DerivedGroupoid for CotangentGroupoid {
    fn source(&self, a: &Elem) -> Result<Elem> {
        let (mu, _) = self.split(a)?;
        let scale = (-self.sigma_at(&a.base)?).exp();
        let v = self.alpha_operator(&a.base)?.transpose() * mu * scale;
        Ok(Elem::new(self.gp.alpha.eval(&a.base)?, v.as_slice().to_vec()))
    }

    fn target(&self, a: &Elem) -> Result<Elem> {
        let (nu, zeta) = self.split(a)?;
        let x = self.gp.beta.eval(&a.base)?;
        let mut v = self.beta_operator(&a.base)?.transpose() * nu;
        if self.extended {
            v -= self.dsigma_on_fiber(&x)? * zeta;
        }
        Ok(Elem::new(x, v.as_slice().to_vec()))
    }

    fn unit(&self, b: &Elem) -> Result<Elem> {
        Ok(self.pack(self.gp.unit.eval(&b.base)?, &DVector::from_column_slice(&b.fiber), 0.0))
    }

    fn compose(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        let (mu, gamma) = self.split(a)?;
        let (nu, zeta) = self.split(b)?;
        let (g, h) = (&a.base, &b.base);
        let es = self.sigma_at(g)?.exp();
        let mu = if self.extended { mu + self.dsigma_at(g)? * (es * zeta) } else { mu };
        let rho = self.plain_compose(g, &mu, h, &(nu * es))?;
        Ok(self.pack(self.gp.compose(g, h)?, &rho, gamma + es * zeta))
    }

    fn sample_pairs(&self, st: &Settings, salt: u64) -> Result<Vec<(Elem, Elem)>> {
        let seed = st.stream(salt ^ 0xC7);
        self.gp
            .sample_pairs(st, salt)?
            .into_iter()
            .enumerate()
            .map(|(i, (g, h))| {
                let i = i as u64;
                let b = self.pack(h, &self.random_covector(seed, 2 * i), self.random_extra(seed, 2 * i));
                let t = DVector::from_vec(self.target(&b)?.fiber);
                let mu = self.lift_source(&g, &t, seed ^ 0x11, i)?;
                Ok((self.pack(g, &mu, self.random_extra(seed, 2 * i + 1)), b))
            })
            .collect()
    }

    fn sample_triples(&self, st: &Settings, salt: u64) -> Result<Vec<[Elem; 3]>> {
        let seed = st.stream(salt ^ 0xC8);
        self.gp
            .sample_triples(st, salt)?
            .into_iter()
            .enumerate()
            .map(|(i, [g, h, k])| {
                let i = i as u64;
                let c = self.pack(k, &self.random_covector(seed, 3 * i), self.random_extra(seed, 3 * i));
                let t = DVector::from_vec(self.target(&c)?.fiber);
                let nu = self.lift_source(&h, &t, seed ^ 0x11, i)?;
                let b = self.pack(h, &nu, self.random_extra(seed, 3 * i + 1));
                let t = DVector::from_vec(self.target(&b)?.fiber);
                let mu = self.lift_source(&g, &t, seed ^ 0x22, i)?;
                Ok([self.pack(g, &mu, self.random_extra(seed, 3 * i + 2)), b, c])
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{algebroid_fiber, check_derived_axioms};
    use super::*;

    fn st() -> Settings {
        Settings::default().with_samples(24)
    }

    fn assert_all(es: &[crate::report::CheckEntry]) {
        assert!(es.iter().all(|e| e.passed()), "{es:#?}");
    }

    #[test]
    fn cotangent_groupoids_satisfy_axioms() {
        for gp in [pair_groupoid(false), cotangent_additive()] {
            assert_all(&check_derived_axioms(&CotangentGroupoid::new(&gp), "cot", "Sec3/groupoid", &st()));
        }
        let gp = pair_groupoid(false);
        let s = sigma_pair(&gp);
        assert_all(&check_derived_axioms(&CotangentGroupoid::twisted(&gp, &s), "cot_s", "Eq.20", &st()));
        assert_all(&check_derived_axioms(&CotangentGroupoid::extended(&gp, &s), "cot_r", "Eq.19", &st()));
        assert_all(&check_derived_axioms(&CotangentGroupoid::extended(&gp, &Expr::zero()), "cot_0", "Eq.19", &st()));
    }

    #[test]
    fn source_and_target_live_on_the_fiber() {
        // α̃(μ) and β̃(ν) vanish on im Tε and the unit is a two-sided identity.
        let gp = pair_groupoid(false);
        let c = CotangentGroupoid::new(&gp);
        for (a, b) in c.sample_pairs(&st(), 9).unwrap() {
            for e in [c.source(&a).unwrap(), c.target(&b).unwrap()] {
                let je = gp.unit.jacobian_at(&e.base).unwrap();
                let v = je.transpose() * DVector::from_vec(e.fiber.clone());
                assert!(v.norm() < 1e-12);
                let u = c.unit(&e).unwrap();
                assert!(c.source(&u).unwrap().gap(&e) < 1e-12);
                assert!(c.target(&u).unwrap().gap(&e) < 1e-12);
            }
        }
    }

    #[test]
    fn pair_groupoid_cotangent_is_explicit() {
        // Pair groupoid: β̃(ν) = ν_x and α̃(μ) = −μ_y, extended by zero on the diagonal.
        let gp = pair_groupoid(false);
        let c = CotangentGroupoid::new(&gp);
        let g = [0.1, 0.2, -0.3, 0.4];
        let mu = [1.0, 2.0, 3.0, 4.0];
        let a = Elem::new(g.to_vec(), mu.to_vec());
        let s = c.source(&a).unwrap();
        assert!(s.gap(&Elem::new(vec![-0.3, 0.4], vec![-3.0, -4.0, 3.0, 4.0])) < 1e-14, "{s:?}");
        let t = c.target(&a).unwrap();
        assert!(t.gap(&Elem::new(vec![0.1, 0.2], vec![1.0, 2.0, -1.0, -2.0])) < 1e-14, "{t:?}");
        let f = algebroid_fiber(&gp, &[0.1, 0.2]).unwrap();
        assert_eq!(f.basis.len(), 2);
    }

    #[test]
    fn incompatible_covectors_are_rejected() {
        let gp = cotangent_additive();
        let c = CotangentGroupoid::new(&gp);
        let (a, b) = c.sample_pairs(&st(), 4).unwrap().remove(0);
        assert!(c.compose(&a, &b).is_ok());
        let mut a2 = a.clone();
        a2.fiber[2] += 1.0;
        assert!(matches!(c.compose(&a2, &b), Err(Error::NotComposable { .. })));
    }

    #[test]
    fn product_pairs_additively_with_composable_tangents() {
        for gp in [pair_groupoid(false), cotangent_additive()] {
            let c = CotangentGroupoid::new(&gp);
            for (i, (a, b)) in c.sample_pairs(&st(), 11).unwrap().into_iter().enumerate() {
                let ab = DVector::from_vec(c.compose(&a, &b).unwrap().fiber);
                let (mu, nu) = (DVector::from_vec(a.fiber.clone()), DVector::from_vec(b.fiber.clone()));
                let basis = gp.composable_tangents(&a.base, &b.base).unwrap();
                let (jg, jh) = gp.mult_blocks(&a.base, &b.base).unwrap();
                for k in 0..20u64 {
                    let w = uniform_vector(basis.len(), 0x77, 20 * i as u64 + k);
                    let (x, y) = basis.iter().zip(&w).fold(
                        (DVector::zeros(gp.dim_g()), DVector::zeros(gp.dim_g())),
                        |(x, y), ((bx, by), wi)| (x + bx * *wi, y + by * *wi),
                    );
                    let lhs = ab.dot(&(&jg * &x + &jh * &y));
                    let rhs = mu.dot(&x) + nu.dot(&y);
                    assert!(crate::expr::residual(lhs, rhs) < 1e-8, "{lhs} {rhs}");
                }
            }
        }
    }

    #[test]
    fn zero_twist_matches_plain() {
        let gp = pair_groupoid(false);
        let plain = CotangentGroupoid::new(&gp);
        let twisted = CotangentGroupoid::twisted(&gp, &Expr::zero());
        for (a, b) in plain.sample_pairs(&st(), 12).unwrap() {
            assert!(plain.compose(&a, &b).unwrap().gap(&twisted.compose(&a, &b).unwrap()) < 1e-12);
            assert!(plain.source(&a).unwrap().gap(&twisted.source(&a).unwrap()) < 1e-12);
            assert!(plain.target(&b).unwrap().gap(&twisted.target(&b).unwrap()) < 1e-12);
        }
    }
}
