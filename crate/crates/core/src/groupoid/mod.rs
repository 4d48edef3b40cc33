//! Coordinate-presented Lie groupoids and their derived groupoids.
//!
//! Conventions: `gh` is defined when `α(g) = β(h)`, with `α(gh) = α(h)` and
//! `β(gh) = β(g)`; the algebroid fiber is `A_x = ker T_{ε(x)}α`. The
//! multiplication is a formula on the product chart `G × G` (second factor
//! variables carry a `'`), evaluated on composable pairs produced by an
//! explicit sampler map.

mod action;
mod cotangent;
mod tangent;

pub use action::{build_action_groupoid, crosscheck_action_cotangent, crosscheck_action_tangent};
pub use cotangent::CotangentGroupoid;
pub use tangent::TangentGroupoid;

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::exterior::SmoothMap;
use crate::expr::{residual, sample_points, uniform_vector, Chart, Expr};
use crate::jacobi::vec_gap;
use crate::linalg::{null_space, rank, Matrix, DEFAULT_TOL};
use crate::report::{failed_eval, max_residual_over, CheckEntry, Evaluated, Settings};

const TAG: &str = "Sec3/groupoid";

#[derive(Debug, Clone)]
pub struct GroupoidPresentation {
    pub name: String,
    pub g: Arc<Chart>,
    pub m: Arc<Chart>,
    pub g2: Arc<Chart>,
    pub g3: Arc<Chart>,
    pub alpha: SmoothMap,
    pub beta: SmoothMap,
    pub unit: SmoothMap,
    pub inverse: SmoothMap,
    /// `G × G → G`.
    pub mult: SmoothMap,
    /// `P → G × G`, onto composable pairs.
    pub pairs: SmoothMap,
    /// `T → G × G × G`, onto composable triples.
    pub triples: SmoothMap,
}

/// Product chart of `k` copies of `g`, suffixing each copy with primes.
pub fn power_chart(g: &Chart, k: usize) -> Result<Chart> {
    let suffixes: Vec<String> = (0..k).map(|i| "'".repeat(i)).collect();
    let refs: Vec<&str> = suffixes.iter().map(String::as_str).collect();
    let factors: Vec<&Chart> = vec![g; k];
    Chart::product(format!("{}^{}", g.name(), k), &factors, &refs)
}

fn ensure_map(map: &SmoothMap, what: &str, src: &Chart, dst: &Chart) -> Result<()> {
    map.source()
        .ensure_same(src)
        .and_then(|_| map.target().ensure_same(dst))
        .map_err(|e| Error::Definition(format!("{what}: {e}")))
}

impl GroupoidPresentation {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        g: Arc<Chart>,
        m: Arc<Chart>,
        alpha: SmoothMap,
        beta: SmoothMap,
        unit: SmoothMap,
        inverse: SmoothMap,
        mult: SmoothMap,
        pairs: SmoothMap,
        triples: SmoothMap,
    ) -> Result<Self> {
        let g2 = Arc::new(power_chart(&g, 2)?);
        let g3 = Arc::new(power_chart(&g, 3)?);
        ensure_map(&alpha, "alpha", &g, &m)?;
        ensure_map(&beta, "beta", &g, &m)?;
        ensure_map(&unit, "unit", &m, &g)?;
        ensure_map(&inverse, "inverse", &g, &g)?;
        ensure_map(&mult, "mult", &g2, &g)?;
        pairs.target().ensure_same(&g2).map_err(|e| Error::Definition(format!("pairs: {e}")))?;
        triples.target().ensure_same(&g3).map_err(|e| Error::Definition(format!("triples: {e}")))?;
        Ok(GroupoidPresentation { name: name.into(), g, m, g2, g3, alpha, beta, unit, inverse, mult, pairs, triples })
    }

    pub fn dim_g(&self) -> usize {
        self.g.dim()
    }

    pub fn dim_m(&self) -> usize {
        self.m.dim()
    }

    /// Projection of `G^k` onto factor `i`.
    pub fn projection(&self, k: usize, i: usize) -> SmoothMap {
        let n = self.dim_g();
        let src = if k == 2 { self.g2.clone() } else { self.g3.clone() };
        SmoothMap::new(src, self.g.clone(), (0..n).map(|j| Expr::var(i * n + j)).collect()).expect("projection")
    }

    /// `m ∘ S`, `pr₁ ∘ S`, `pr₂ ∘ S` on the pair-sampler chart.
    pub fn pair_maps(&self) -> Result<(SmoothMap, SmoothMap, SmoothMap)> {
        Ok((self.pairs.then(&self.mult)?, self.pairs.then(&self.projection(2, 0))?, self.pairs.then(&self.projection(2, 1))?))
    }

    pub fn compose(&self, g: &[f64], h: &[f64]) -> Result<Vec<f64>> {
        self.mult.eval(&[g, h].concat())
    }

    /// `(∂m/∂g, ∂m/∂h)` at `(g, h)`.
    pub fn mult_blocks(&self, g: &[f64], h: &[f64]) -> Result<(Matrix, Matrix)> {
        let j = self.mult.jacobian_at(&[g, h].concat())?;
        let n = self.dim_g();
        Ok((j.columns(0, n).into_owned(), j.columns(n, n).into_owned()))
    }

    pub fn sample_arrows(&self, st: &Settings, salt: u64) -> Result<Vec<Vec<f64>>> {
        sample_points(&self.g, st.samples, st.stream(salt), &[])
    }

    pub fn sample_base(&self, st: &Settings, salt: u64) -> Result<Vec<Vec<f64>>> {
        sample_points(&self.m, st.samples, st.stream(salt), &[])
    }

    pub fn sample_pair_params(&self, st: &Settings, salt: u64) -> Result<Vec<Vec<f64>>> {
        sample_points(self.pairs.source(), st.samples, st.stream(salt), &[])
    }

    pub fn sample_pairs(&self, st: &Settings, salt: u64) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        let n = self.dim_g();
        self.sample_pair_params(st, salt)?
            .iter()
            .map(|p| {
                let gh = self.pairs.eval(p)?;
                Ok((gh[..n].to_vec(), gh[n..].to_vec()))
            })
            .collect()
    }

    pub fn sample_triples(&self, st: &Settings, salt: u64) -> Result<Vec<[Vec<f64>; 3]>> {
        let n = self.dim_g();
        sample_points(self.triples.source(), st.samples, st.stream(salt), &[])?
            .iter()
            .map(|p| {
                let v = self.triples.eval(p)?;
                Ok([v[..n].to_vec(), v[n..2 * n].to_vec(), v[2 * n..].to_vec()])
            })
            .collect()
    }

    /// Basis of `T_{(g,h)}G^{(2)} = ker [Tα(g) | −Tβ(h)]`, split into factors.
    pub fn composable_tangents(&self, g: &[f64], h: &[f64]) -> Result<Vec<(DVector<f64>, DVector<f64>)>> {
        let n = self.dim_g();
        let ja = self.alpha.jacobian_at(g)?;
        let jb = self.beta.jacobian_at(h)?;
        let mut a = Matrix::zeros(self.dim_m(), 2 * n);
        a.columns_mut(0, n).copy_from(&ja);
        a.columns_mut(n, n).copy_from(&(-jb));
        Ok(null_space(&a, DEFAULT_TOL)
            .into_iter()
            .map(|w| (w.rows(0, n).into_owned(), w.rows(n, n).into_owned()))
            .collect())
    }

    /// Projector `I − Tε Tα` at `ε(x)`: identity on `A_x`, zero on `im Tε`.
    pub fn fiber_projector(&self, x: &[f64]) -> Result<Matrix> {
        let e = self.unit.eval(x)?;
        let je = self.unit.jacobian_at(x)?;
        let ja = self.alpha.jacobian_at(&e)?;
        Ok(Matrix::identity(self.dim_g(), self.dim_g()) - je * ja)
    }

    /// `T R_g` at `ε(β g)` applied to a vector there.
    pub fn right_translate(&self, g: &[f64], v: &DVector<f64>) -> Result<DVector<f64>> {
        let b = self.beta.eval(g)?;
        let e = self.unit.eval(&b)?;
        let (jg, _) = self.mult_blocks(&e, g)?;
        Ok(jg * v)
    }

    /// `T L_g` at `ε(α g)` applied to a vector there.
    pub fn left_translate(&self, g: &[f64], v: &DVector<f64>) -> Result<DVector<f64>> {
        let a = self.alpha.eval(g)?;
        let e = self.unit.eval(&a)?;
        let (_, jh) = self.mult_blocks(g, &e)?;
        Ok(jh * v)
    }
}

fn gap_vec(a: &[f64], b: &[f64]) -> f64 {
    vec_gap(a, b)
}

fn entry(id: &str, tag: &str, ev: Result<Evaluated>, tol: f64) -> CheckEntry {
    match ev {
        Ok(ev) => CheckEntry::from_eval(id, tag, ev, tol),
        Err(e) => CheckEntry::from_eval(id, tag, failed_eval(&e), tol),
    }
}

/// Groupoid axioms and sampler identities at sample points.
pub fn check_axioms(gp: &GroupoidPresentation, st: &Settings) -> Vec<CheckEntry> {
    let tol = st.tol;
    let mut out = Vec::new();
    let pairs = gp.sample_pairs(st, 0xA1);
    let triples = gp.sample_triples(st, 0xA2);
    let arrows = gp.sample_arrows(st, 0xA3);
    let base = gp.sample_base(st, 0xA4);

    out.push(entry(
        "axioms.pair_sampler",
        TAG,
        pairs.as_ref().map_err(Clone::clone).map(|ps| {
            max_residual_over(ps, |(g, h)| Ok(gap_vec(&gp.alpha.eval(g)?, &gp.beta.eval(h)?)))
        }),
        tol,
    ));
    out.push(entry(
        "axioms.pair_sampler_rank",
        TAG,
        gp.sample_pair_params(st, 0xA1).map(|ps| {
            let want = 2 * gp.dim_g() - gp.dim_m();
            max_residual_over(&ps, |p| {
                let r = rank(&gp.pairs.jacobian_at(p)?, 1e-9);
                Ok(if r == want { 0.0 } else { 1.0 })
            })
        }),
        tol,
    ));
    out.push(entry(
        "axioms.triple_sampler",
        TAG,
        triples.as_ref().map_err(Clone::clone).map(|ts| {
            max_residual_over(ts, |[g, h, k]| {
                Ok(gap_vec(&gp.alpha.eval(g)?, &gp.beta.eval(h)?).max(gap_vec(&gp.alpha.eval(h)?, &gp.beta.eval(k)?)))
            })
        }),
        tol,
    ));
    out.push(entry(
        "axioms.unit_source_target",
        TAG,
        base.as_ref().map_err(Clone::clone).map(|xs| {
            max_residual_over(xs, |x| {
                let e = gp.unit.eval(x)?;
                Ok(gap_vec(&gp.alpha.eval(&e)?, x).max(gap_vec(&gp.beta.eval(&e)?, x)))
            })
        }),
        tol,
    ));
    out.push(entry(
        "axioms.unit_law",
        TAG,
        arrows.as_ref().map_err(Clone::clone).map(|gs| {
            max_residual_over(gs, |g| {
                let left = gp.compose(&gp.unit.eval(&gp.beta.eval(g)?)?, g)?;
                let right = gp.compose(g, &gp.unit.eval(&gp.alpha.eval(g)?)?)?;
                Ok(gap_vec(&left, g).max(gap_vec(&right, g)))
            })
        }),
        tol,
    ));
    out.push(entry(
        "axioms.product_source_target",
        TAG,
        pairs.as_ref().map_err(Clone::clone).map(|ps| {
            max_residual_over(ps, |(g, h)| {
                let gh = gp.compose(g, h)?;
                Ok(gap_vec(&gp.alpha.eval(&gh)?, &gp.alpha.eval(h)?).max(gap_vec(&gp.beta.eval(&gh)?, &gp.beta.eval(g)?)))
            })
        }),
        tol,
    ));
    out.push(entry(
        "axioms.associativity",
        TAG,
        triples.as_ref().map_err(Clone::clone).map(|ts| {
            max_residual_over(ts, |[g, h, k]| {
                let l = gp.compose(&gp.compose(g, h)?, k)?;
                let r = gp.compose(g, &gp.compose(h, k)?)?;
                Ok(gap_vec(&l, &r))
            })
        }),
        tol,
    ));
    out.push(entry(
        "axioms.inverse",
        TAG,
        arrows.as_ref().map_err(Clone::clone).map(|gs| {
            max_residual_over(gs, |g| {
                let gi = gp.inverse.eval(g)?;
                let r1 = gap_vec(&gp.compose(g, &gi)?, &gp.unit.eval(&gp.beta.eval(g)?)?);
                let r2 = gap_vec(&gp.compose(&gi, g)?, &gp.unit.eval(&gp.alpha.eval(g)?)?);
                Ok(r1.max(r2))
            })
        }),
        tol,
    ));
    out
}

/// `σ(gh) = σ(g) + σ(h)` on sampled pairs and `σ∘ε = 0` on base points.
pub fn check_multiplicative(gp: &GroupoidPresentation, sigma: &Expr, st: &Settings) -> Vec<CheckEntry> {
    let tol = st.tol;
    let add = gp.sample_pairs(st, 0xB1).map(|ps| {
        max_residual_over(&ps, |(g, h)| {
            let gh = gp.compose(g, h)?;
            Ok(residual(sigma.eval(&gh)?, sigma.eval(g)? + sigma.eval(h)?))
        })
    });
    let unit = gp
        .sample_base(st, 0xB2)
        .map(|xs| max_residual_over(&xs, |x| Ok(residual(sigma.eval(&gp.unit.eval(x)?)?, 0.0))));
    vec![entry("multiplicative.additive", "Sec3/multiplicative", add, tol), entry("multiplicative.unit", "Eq.4", unit, tol)]
}

/// Orthonormal basis of `A_x = ker T_{ε(x)}α`.
#[derive(Debug, Clone)]
pub struct AlgebroidFiber {
    pub x: Vec<f64>,
    pub basis: Vec<DVector<f64>>,
}

pub fn algebroid_fiber(gp: &GroupoidPresentation, x: &[f64]) -> Result<AlgebroidFiber> {
    let e = gp.unit.eval(x)?;
    let ja = gp.alpha.jacobian_at(&e)?;
    let basis = null_space(&ja, DEFAULT_TOL);
    let want = gp.dim_g() - gp.dim_m();
    if basis.len() != want {
        return Err(Error::RankDeficiency { expected: gp.dim_m(), found: gp.dim_g() - basis.len() });
    }
    Ok(AlgebroidFiber { x: x.to_vec(), basis })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Invariant extension of a section `X₀` of `A` (components in `G`
/// coordinates as functions on `M`): right `T R_g X₀(β g)`, left
/// `T L_g Tι X₀(α g)`.
pub fn invariant_extension(gp: &GroupoidPresentation, x0: &[Expr], side: Side, g: &[f64]) -> Result<DVector<f64>> {
    let x = match side {
        Side::Right => gp.beta.eval(g)?,
        Side::Left => gp.alpha.eval(g)?,
    };
    let v = section_at(gp, x0, &x)?;
    match side {
        Side::Right => gp.right_translate(g, &v),
        Side::Left => {
            let e = gp.unit.eval(&x)?;
            let ji = gp.inverse.jacobian_at(&e)?;
            gp.left_translate(g, &(ji * v))
        }
    }
}

/// `X₀(x)`, checked to lie in `A_x`.
pub fn section_at(gp: &GroupoidPresentation, x0: &[Expr], x: &[f64]) -> Result<DVector<f64>> {
    let v: Vec<f64> = x0.iter().map(|c| c.eval(x)).collect::<Result<_>>()?;
    let v = DVector::from_vec(v);
    let ja = gp.alpha.jacobian_at(&gp.unit.eval(x)?)?;
    let r = (&ja * &v).norm() / (1.0 + ja.norm() * v.norm());
    if r > 1e-8 {
        return Err(Error::NotInFiber { point: x.to_vec(), residual: r });
    }
    Ok(v)
}

/// A point of a vector bundle over a chart: base coordinates plus fiber
/// components (with any `ℝ`-extension entries appended).
#[derive(Debug, Clone, PartialEq)]
pub struct Elem {
    pub base: Vec<f64>,
    pub fiber: Vec<f64>,
}

impl Elem {
    pub fn new(base: Vec<f64>, fiber: Vec<f64>) -> Self {
        Elem { base, fiber }
    }

    pub fn gap(&self, o: &Elem) -> f64 {
        if self.base.len() != o.base.len() || self.fiber.len() != o.fiber.len() {
            return f64::INFINITY;
        }
        vec_gap(&self.base, &o.base).max(vec_gap(&self.fiber, &o.fiber))
    }
}

/// Structural maps of a groupoid whose arrows and objects are [`Elem`]s.
pub trait DerivedGroupoid: Sync {
    fn source(&self, a: &Elem) -> Result<Elem>;
    fn target(&self, a: &Elem) -> Result<Elem>;
    fn unit(&self, b: &Elem) -> Result<Elem>;
    fn compose(&self, a: &Elem, b: &Elem) -> Result<Elem>;
    fn sample_pairs(&self, st: &Settings, salt: u64) -> Result<Vec<(Elem, Elem)>>;
    fn sample_triples(&self, st: &Settings, salt: u64) -> Result<Vec<[Elem; 3]>>;
}

/// Unit law, source/target of products and associativity.
pub fn check_derived_axioms(d: &dyn DerivedGroupoid, prefix: &str, tag: &str, st: &Settings) -> Vec<CheckEntry> {
    let tol = st.tol;
    let pairs = d.sample_pairs(st, 0xC1);
    let triples = d.sample_triples(st, 0xC2);
    let unit = pairs.as_ref().map_err(Clone::clone).map(|ps| {
        max_residual_over(ps, |(a, _)| {
            let l = d.compose(&d.unit(&d.target(a)?)?, a)?;
            let r = d.compose(a, &d.unit(&d.source(a)?)?)?;
            Ok(l.gap(a).max(r.gap(a)))
        })
    });
    let st_ev = pairs.as_ref().map_err(Clone::clone).map(|ps| {
        max_residual_over(ps, |(a, b)| {
            let ab = d.compose(a, b)?;
            Ok(d.source(&ab)?.gap(&d.source(b)?).max(d.target(&ab)?.gap(&d.target(a)?)))
        })
    });
    let assoc = triples.map(|ts| {
        max_residual_over(&ts, |[a, b, c]| {
            let l = d.compose(&d.compose(a, b)?, c)?;
            let r = d.compose(a, &d.compose(b, c)?)?;
            Ok(l.gap(&r))
        })
    });
    vec![
        entry(&format!("{prefix}.associativity"), tag, assoc, tol),
        entry(&format!("{prefix}.product_source_target"), tag, st_ev, tol),
        entry(&format!("{prefix}.unit_law"), tag, unit, tol),
    ]
}

/// Source and target intertwining and multiplicativity of `phi` over `phi0`.
pub fn morphism_check(
    dom: &dyn DerivedGroupoid,
    cod: &dyn DerivedGroupoid,
    phi: &(dyn Fn(&Elem) -> Result<Elem> + Sync),
    phi0: &(dyn Fn(&Elem) -> Result<Elem> + Sync),
    prefix: &str,
    tag: &str,
    st: &Settings,
) -> Vec<CheckEntry> {
    let tol = st.tol;
    let pairs = match dom.sample_pairs(st, 0xD1) {
        Ok(p) => p,
        Err(e) => {
            return ["multiplicative", "source", "target"]
                .iter()
                .map(|k| CheckEntry::error(format!("{prefix}.{k}"), tag, &e, tol))
                .collect()
        }
    };
    let src = max_residual_over(&pairs, |(a, b)| {
        let ra = cod.source(&phi(a)?)?.gap(&phi0(&dom.source(a)?)?);
        let rb = cod.source(&phi(b)?)?.gap(&phi0(&dom.source(b)?)?);
        Ok(ra.max(rb))
    });
    let tgt = max_residual_over(&pairs, |(a, b)| {
        let ra = cod.target(&phi(a)?)?.gap(&phi0(&dom.target(a)?)?);
        let rb = cod.target(&phi(b)?)?.gap(&phi0(&dom.target(b)?)?);
        Ok(ra.max(rb))
    });
    let mul = max_residual_over(&pairs, |(a, b)| {
        let lhs = phi(&dom.compose(a, b)?)?;
        let rhs = cod.compose(&phi(a)?, &phi(b)?)?;
        Ok(lhs.gap(&rhs))
    });
    vec![
        CheckEntry::from_eval(format!("{prefix}.multiplicative"), tag, mul, tol),
        CheckEntry::from_eval(format!("{prefix}.source"), tag, src, tol),
        CheckEntry::from_eval(format!("{prefix}.target"), tag, tgt, tol),
    ]
}

/// A deterministic random combination of basis vectors.
pub(crate) fn random_combination(basis: &[DVector<f64>], dim: usize, seed: u64, index: u64) -> DVector<f64> {
    let c = uniform_vector(basis.len(), seed, index);
    basis.iter().zip(c).fold(DVector::zeros(dim), |acc, (b, ci)| acc + b * ci)
}
