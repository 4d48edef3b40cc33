use std::sync::Arc;

use super::{indices, ordered_blade, Blade, Form, MultiVector, VectorField};
use crate::error::{Error, Result};
use crate::expr::{sample_points, Chart, Expr};

fn parity(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Exterior derivative.
pub fn ext_deriv(a: &Form) -> Result<Form> {
    let chart = a.chart().clone();
    let degree = a.degree() + 1;
    if degree > chart.dim() {
        return Err(Error::DegreeOverflow { degree, dim: chart.dim() });
    }
    let mut out = Form::zero(chart.clone(), degree);
    for (b, f) in a.components() {
        for j in 0..chart.dim() {
            if b & (1 << j) != 0 {
                continue;
            }
            let df = f.partial(j);
            if df.is_zero() {
                continue;
            }
            let mut idx = vec![j];
            idx.extend(indices(*b));
            let (blade, s) = ordered_blade(&idx).expect("j is not in b");
            out.accumulate(blade, &df.scale(s));
        }
    }
    Ok(out)
}

/// Replaces position `pos` of the ordered indices of `b` with `k`.
fn replace_at(b: Blade, pos: usize, k: usize) -> Option<(Blade, f64)> {
    let mut idx: Vec<usize> = indices(b).collect();
    idx[pos] = k;
    ordered_blade(&idx)
}

pub trait LieDerivative: Sized {
    /// `𝓛_X self`.
    fn lie_deriv(&self, x: &VectorField) -> Result<Self>;
}

fn check_field(x: &VectorField, chart: &Chart) -> Result<()> {
    x.chart().ensure_same(chart)?;
    if x.degree() != 1 {
        return Err(Error::KindMismatch("Lie derivative along a non-vector".into()));
    }
    Ok(())
}

impl LieDerivative for Form {
    fn lie_deriv(&self, x: &VectorField) -> Result<Form> {
        check_field(x, self.chart())?;
        let n = self.chart().dim();
        let xs = x.dense();
        let mut out = Form::zero(self.chart().clone(), self.degree());
        for (b, f) in self.components() {
            out.accumulate(*b, &x.apply_to(f));
            // d(X^i) replaces each dx^i in turn
            for (pos, i) in indices(*b).enumerate() {
                for k in 0..n {
                    let dxi = xs[i].partial(k);
                    if dxi.is_zero() {
                        continue;
                    }
                    if let Some((nb, s)) = replace_at(*b, pos, k) {
                        out.accumulate(nb, &f.mul(&dxi).scale(s));
                    }
                }
            }
        }
        Ok(out)
    }
}

impl LieDerivative for MultiVector {
    fn lie_deriv(&self, x: &VectorField) -> Result<MultiVector> {
        check_field(x, self.chart())?;
        let n = self.chart().dim();
        let xs = x.dense();
        let mut out = MultiVector::zero(self.chart().clone(), self.degree());
        for (b, g) in self.components() {
            out.accumulate(*b, &x.apply_to(g));
            // [X, ∂_j] = −Σ_k ∂_j(X^k) ∂_k
            for (pos, j) in indices(*b).enumerate() {
                for (k, xk) in xs.iter().enumerate().take(n) {
                    let d = xk.partial(j);
                    if d.is_zero() {
                        continue;
                    }
                    if let Some((nb, s)) = replace_at(*b, pos, k) {
                        out.accumulate(nb, &g.mul(&d).scale(-s));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Schouten–Nijenhuis bracket, extended from the Lie bracket by
/// `[X₁∧…∧X_p, Y₁∧…∧Y_q] = Σ (−1)^{a+b} [X_a, Y_b] ∧ X₁…X̂_a…X_p ∧ Y₁…Ŷ_b…Y_q`
/// with each monomial `f ∂_I` read as `(f ∂_{i₁}) ∧ ∂_{i₂} ∧ …`.
pub fn schouten(p: &MultiVector, q: &MultiVector) -> Result<MultiVector> {
    p.chart().ensure_same(q.chart())?;
    let (dp, dq) = (p.degree(), q.degree());
    if dp + dq == 0 {
        return Err(Error::DegreeUnderflow { needed: 1 });
    }
    let degree = dp + dq - 1;
    let dim = p.chart().dim();
    if degree > dim {
        return Err(Error::DegreeOverflow { degree, dim });
    }
    if dp == 0 {
        return Ok(schouten(q, p)?.scale(&Expr::constant(parity(dq))));
    }
    let mut out = MultiVector::zero(p.chart().clone(), degree);
    for (bi, f) in p.components() {
        let is: Vec<usize> = indices(*bi).collect();
        if dq == 0 {
            let g = q.coeff(0);
            for (a, &ia) in is.iter().enumerate() {
                let c = f.mul(&g.partial(ia));
                out.accumulate(bi & !(1 << ia), &c.scale(parity(dp - 1 - a)));
            }
            continue;
        }
        for (bj, g) in q.components() {
            let js: Vec<usize> = indices(*bj).collect();
            for (a, &ia) in is.iter().enumerate() {
                for (b, &jb) in js.iter().enumerate() {
                    let sign = parity(a + b);
                    let rest = |lead: usize| {
                        let mut idx = vec![lead];
                        idx.extend(is.iter().copied().filter(|&i| i != ia));
                        idx.extend(js.iter().copied().filter(|&j| j != jb));
                        ordered_blade(&idx)
                    };
                    // f ∂_{i_a}(g) ∂_{j_1} from the first Y factor
                    if b == 0 {
                        let c = f.mul(&g.partial(ia));
                        if let (false, Some((nb, s))) = (c.is_zero(), rest(jb)) {
                            out.accumulate(nb, &c.scale(sign * s));
                        }
                    }
                    // −g ∂_{j_b}(f) ∂_{i_1} from the first X factor
                    if a == 0 {
                        let c = g.mul(&f.partial(jb));
                        if let (false, Some((nb, s))) = (c.is_zero(), rest(ia)) {
                            out.accumulate(nb, &c.scale(-sign * s));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Lie bracket of vector fields.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    if x.degree() != 1 || y.degree() != 1 {
        return Err(Error::KindMismatch("Lie bracket needs vector fields".into()));
    }
    schouten(x, y)
}

/// Result of inverting a two-form: the bivector and the pivot expressions
/// that must stay away from zero for it to be valid.
#[derive(Debug, Clone)]
pub struct InverseForm {
    pub lambda: MultiVector,
    pub guards: Vec<Expr>,
}

const PROBE_SEED: u64 = 0x1A7E;
const PROBES: usize = 6;
const PIVOT_FLOOR: f64 = 1e-9;

/// The bivector with matrix `−W⁻¹`, by symbolic Gauss–Jordan elimination.
///
/// Pivots are chosen at a handful of probe points: constant entries first,
/// then the entry with the largest minimum magnitude.
pub fn two_form_inverse(omega: &Form) -> Result<InverseForm> {
    if omega.degree() != 2 {
        return Err(Error::KindMismatch(format!("two_form_inverse of a {}-form", omega.degree())));
    }
    let chart: Arc<Chart> = omega.chart().clone();
    let n = chart.dim();
    let probes = sample_points(&chart, PROBES, PROBE_SEED, &[])?;
    if n % 2 == 1 {
        return Err(Error::SingularForm { point: probes[0].clone() });
    }
    let mut a: Vec<Vec<Expr>> = (0..n).map(|i| (0..n).map(|j| omega.component(&[i, j])).collect()).collect();
    let mut inv: Vec<Vec<Expr>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect()).collect();
    let mut guards = Vec::new();
    for k in 0..n {
        let mut best: Option<(usize, bool, f64)> = None;
        let mut witness = probes[0].clone();
        for (r, row) in a.iter().enumerate().skip(k) {
            let e = &row[k];
            if e.is_zero() {
                continue;
            }
            let mut min = f64::INFINITY;
            for p in &probes {
                let v = e.eval(p).map(f64::abs).unwrap_or(0.0);
                if v < min {
                    min = v;
                    if v <= PIVOT_FLOOR {
                        witness = p.clone();
                    }
                }
            }
            if min <= PIVOT_FLOOR {
                continue;
            }
            let constant = e.as_const().is_some();
            let better = match best {
                None => true,
                Some((_, bc, bm)) => (constant && !bc) || (constant == bc && min > bm),
            };
            if better {
                best = Some((r, constant, min));
            }
        }
        let Some((r, constant, _)) = best else {
            return Err(Error::SingularForm { point: witness });
        };
        a.swap(k, r);
        inv.swap(k, r);
        let piv = a[k][k].clone();
        if !constant {
            guards.push(piv.clone());
        }
        for j in 0..n {
            a[k][j] = a[k][j].div(&piv);
            inv[k][j] = inv[k][j].div(&piv);
        }
        for i in 0..n {
            if i == k || a[i][k].is_zero() {
                continue;
            }
            let factor = a[i][k].clone();
            for j in 0..n {
                a[i][j] = a[i][j].sub(&factor.mul(&a[k][j]));
                inv[i][j] = inv[i][j].sub(&factor.mul(&inv[k][j]));
            }
        }
    }
    let mut lambda = MultiVector::zero(chart, 2);
    for (i, row) in inv.iter().enumerate() {
        for (j, e) in row.iter().enumerate().skip(i + 1) {
            lambda.accumulate((1 << i) | (1 << j), &e.neg());
        }
    }
    Ok(InverseForm { lambda, guards })
}
