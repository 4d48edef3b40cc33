use nalgebra::DVector;

use super::{random_combination, DerivedGroupoid, Elem, GroupoidPresentation};
use crate::error::{Error, Result};
use crate::expr::{uniform_vector, Expr};
use crate::jacobi::vec_gap;
use crate::linalg::{null_space, Matrix, DEFAULT_TOL};
use crate::report::Settings;

/// `TG ⇒ TM`, or `TG × ℝ ⇒ TM × ℝ` twisted by a multiplicative `σ`:
/// source `(Tα X, X(σ) + λ)`, target `(Tβ Y, μ)`, product
/// `(X ⊕ Y, λ)`, unit `(Tε v, λ)`. The `ℝ` entry is the last fiber entry.
#[derive(Debug, Clone)]
pub struct TangentGroupoid {
    pub gp: GroupoidPresentation,
    dsigma: Option<Vec<Expr>>,
}

impl TangentGroupoid {
    pub fn new(gp: &GroupoidPresentation) -> Self {
        TangentGroupoid { gp: gp.clone(), dsigma: None }
    }

    pub fn extended(gp: &GroupoidPresentation, sigma: &Expr) -> Self {
        let ds = (0..gp.dim_g()).map(|i| sigma.partial(i)).collect();
        TangentGroupoid { gp: gp.clone(), dsigma: Some(ds) }
    }

    pub fn is_extended(&self) -> bool {
        self.dsigma.is_some()
    }

    fn split<'a>(&self, a: &'a Elem) -> Result<(&'a [f64], Option<f64>)> {
        let n = self.gp.dim_g();
        let want = n + self.is_extended() as usize;
        if a.base.len() != n || a.fiber.len() != want {
            return Err(Error::Definition(format!("tangent element has shape ({}, {})", a.base.len(), a.fiber.len())));
        }
        Ok((&a.fiber[..n], a.fiber.get(n).copied()))
    }

    /// `X(σ)` at `g`.
    pub fn x_sigma(&self, g: &[f64], x: &[f64]) -> Result<f64> {
        match &self.dsigma {
            None => Ok(0.0),
            Some(ds) => ds.iter().zip(x).map(|(d, xi)| Ok(d.eval(g)? * xi)).sum(),
        }
    }

    fn with_extra(&self, mut v: Vec<f64>, extra: Option<f64>) -> Vec<f64> {
        if self.is_extended() {
            v.push(extra.unwrap_or(0.0));
        }
        v
    }
}

fn apply(m: &Matrix, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x)).as_slice().to_vec()
}

impl DerivedGroupoid for TangentGroupoid {
    fn source(&self, a: &Elem) -> Result<Elem> {
        let (x, lam) = self.split(a)?;
        let g = &a.base;
        let v = apply(&self.gp.alpha.jacobian_at(g)?, x);
        let extra = match lam {
            Some(l) => Some(self.x_sigma(g, x)? + l),
            None => None,
        };
        Ok(Elem::new(self.gp.alpha.eval(g)?, self.with_extra(v, extra)))
    }

    fn target(&self, a: &Elem) -> Result<Elem> {
        let (x, lam) = self.split(a)?;
        let v = apply(&self.gp.beta.jacobian_at(&a.base)?, x);
        Ok(Elem::new(self.gp.beta.eval(&a.base)?, self.with_extra(v, lam)))
    }

    fn unit(&self, b: &Elem) -> Result<Elem> {
        let m = self.gp.dim_m();
        let v = apply(&self.gp.unit.jacobian_at(&b.base)?, &b.fiber[..m]);
        Ok(Elem::new(self.gp.unit.eval(&b.base)?, self.with_extra(v, b.fiber.get(m).copied())))
    }

    fn compose(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        let (x, lam) = self.split(a)?;
        let (y, _) = self.split(b)?;
        let gap = self.source(a)?.gap(&self.target(b)?).max(vec_gap(&self.gp.alpha.eval(&a.base)?, &self.gp.beta.eval(&b.base)?));
        if gap > 1e-8 {
            return Err(Error::NotComposable { residual: gap });
        }
        let j = self.gp.mult.jacobian_at(&[a.base.as_slice(), b.base.as_slice()].concat())?;
        let v = apply(&j, &[x, y].concat());
        Ok(Elem::new(self.gp.compose(&a.base, &b.base)?, self.with_extra(v, lam)))
    }

    fn sample_pairs(&self, st: &Settings, salt: u64) -> Result<Vec<(Elem, Elem)>> {
        let n = self.gp.dim_g();
        let seed = st.stream(salt ^ 0x7A);
        self.gp
            .sample_pairs(st, salt)?
            .into_iter()
            .enumerate()
            .map(|(i, (g, h))| {
                let basis: Vec<DVector<f64>> = self
                    .gp
                    .composable_tangents(&g, &h)?
                    .into_iter()
                    .map(|(x, y)| DVector::from_iterator(2 * n, x.iter().chain(y.iter()).copied()))
                    .collect();
                let w = random_combination(&basis, 2 * n, seed, i as u64);
                let (x, y) = (w.as_slice()[..n].to_vec(), w.as_slice()[n..].to_vec());
                let lam = uniform_vector(1, seed ^ 1, i as u64)[0];
                let mu = self.x_sigma(&g, &x)? + lam;
                Ok((Elem::new(g, self.with_extra(x, Some(lam))), Elem::new(h, self.with_extra(y, Some(mu)))))
            })
            .collect()
    }

    fn sample_triples(&self, st: &Settings, salt: u64) -> Result<Vec<[Elem; 3]>> {
        let (n, m) = (self.gp.dim_g(), self.gp.dim_m());
        let seed = st.stream(salt ^ 0x7B);
        self.gp
            .sample_triples(st, salt)?
            .into_iter()
            .enumerate()
            .map(|(i, [g, h, k])| {
                let mut a = Matrix::zeros(2 * m, 3 * n);
                a.view_mut((0, 0), (m, n)).copy_from(&self.gp.alpha.jacobian_at(&g)?);
                a.view_mut((0, n), (m, n)).copy_from(&-self.gp.beta.jacobian_at(&h)?);
                a.view_mut((m, n), (m, n)).copy_from(&self.gp.alpha.jacobian_at(&h)?);
                a.view_mut((m, 2 * n), (m, n)).copy_from(&-self.gp.beta.jacobian_at(&k)?);
                let w = random_combination(&null_space(&a, DEFAULT_TOL), 3 * n, seed, i as u64);
                let w = w.as_slice();
                let (x, y, z) = (w[..n].to_vec(), w[n..2 * n].to_vec(), w[2 * n..].to_vec());
                let l0 = uniform_vector(1, seed ^ 1, i as u64)[0];
                let l1 = self.x_sigma(&g, &x)? + l0;
                let l2 = self.x_sigma(&h, &y)? + l1;
                Ok([
                    Elem::new(g, self.with_extra(x, Some(l0))),
                    Elem::new(h, self.with_extra(y, Some(l1))),
                    Elem::new(k, self.with_extra(z, Some(l2))),
                ])
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::check_derived_axioms;
    use super::*;

    #[test]
    fn tangent_groupoids_satisfy_axioms() {
        let st = Settings::default().with_samples(24);
        for gp in [pair_groupoid(false), cotangent_additive()] {
            let t = TangentGroupoid::new(&gp);
            let es = check_derived_axioms(&t, "tangent", "Sec3/groupoid", &st);
            assert!(es.iter().all(|e| e.passed()), "{es:#?}");
        }
        let gp = pair_groupoid(false);
        let t = TangentGroupoid::extended(&gp, &sigma_pair(&gp));
        let es = check_derived_axioms(&t, "tangent_r", "Eq.18", &st);
        assert!(es.iter().all(|e| e.passed()), "{es:#?}");
    }

    #[test]
    fn mismatched_ends_do_not_compose() {
        let gp = pair_groupoid(false);
        let t = TangentGroupoid::new(&gp);
        let (a, b) = t.sample_pairs(&Settings::default().with_samples(2), 5).unwrap().remove(0);
        let mut b2 = b.clone();
        b2.fiber[0] += 0.5;
        assert!(t.compose(&a, &b).is_ok());
        assert!(matches!(t.compose(&a, &b2), Err(Error::NotComposable { .. })));
    }
}
