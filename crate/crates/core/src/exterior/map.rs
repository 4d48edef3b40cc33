use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::expr::{Chart, Expr};
use crate::linalg::Matrix;

struct Inner {
    source: Arc<Chart>,
    target: Arc<Chart>,
    comps: Vec<Expr>,
    jac: OnceLock<Vec<Vec<Expr>>>,
}

/// A smooth map between charts, one expression per target coordinate.
#[derive(Clone)]
pub struct SmoothMap(Arc<Inner>);

impl std::fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SmoothMap({} -> {})", self.0.source.name(), self.0.target.name())
    }
}

impl SmoothMap {
    pub fn new(source: Arc<Chart>, target: Arc<Chart>, comps: Vec<Expr>) -> Result<Self> {
        if comps.len() != target.dim() {
            return Err(Error::Definition(format!(
                "map {} -> {} has {} components, target dimension is {}",
                source.name(),
                target.name(),
                comps.len(),
                target.dim()
            )));
        }
        if let Some(m) = comps.iter().filter_map(Expr::max_var).max() {
            if m >= source.dim() {
                return Err(Error::Definition(format!("map component refers past the end of chart {}", source.name())));
            }
        }
        Ok(SmoothMap(Arc::new(Inner { source, target, comps, jac: OnceLock::new() })))
    }

    pub fn identity(chart: Arc<Chart>) -> Self {
        let comps = chart.coords();
        SmoothMap::new(chart.clone(), chart, comps).expect("identity is well formed")
    }

    pub fn source(&self) -> &Arc<Chart> {
        &self.0.source
    }

    pub fn target(&self) -> &Arc<Chart> {
        &self.0.target
    }

    pub fn comps(&self) -> &[Expr] {
        &self.0.comps
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &SmoothMap) -> Result<SmoothMap> {
        self.target().ensure_same(next.source())?;
        let comps = next.comps().iter().map(|c| c.substitute(self.comps())).collect();
        SmoothMap::new(self.source().clone(), next.target().clone(), comps)
    }

    /// `f ∘ self` for a scalar `f` on the target chart.
    pub fn pull_scalar(&self, f: &Expr) -> Expr {
        f.substitute(self.comps())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.comps().iter().map(|c| c.eval(x)).collect()
    }

    /// Symbolic Jacobian, rows indexed by target coordinate.
    pub fn jacobian(&self) -> &[Vec<Expr>] {
        self.0.jac.get_or_init(|| {
            self.comps()
                .iter()
                .map(|c| (0..self.source().dim()).map(|j| c.partial(j)).collect())
                .collect()
        })
    }

    pub fn jacobian_at(&self, x: &[f64]) -> Result<Matrix> {
        let jac = self.jacobian();
        let (m, n) = (self.target().dim(), self.source().dim());
        let mut out = Matrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                out[(i, j)] = jac[i][j].eval(x)?;
            }
        }
        Ok(out)
    }
}
