use std::sync::Arc;

use lcsg::exterior::{
    ext_deriv, interior, pullback, schouten, sharp, two_form_inverse, Form, LieDerivative, MultiVector, SmoothMap,
    Tensor, Variance,
};
use lcsg::expr::{sample_points, uniform_vector, Chart, Expr};
use proptest::prelude::*;

fn r4() -> Arc<Chart> {
    Arc::new(Chart::new("r4", ["x", "y", "z", "w"]).unwrap())
}

/// Random coefficient: quadratic polynomial plus a small exponential term.
fn coeff_on(n: usize, seed: u64, k: u64) -> Expr {
    let c = uniform_vector(16, seed, k);
    let v = |i: usize| Expr::var(i % n);
    let mut e = Expr::constant(c[0]);
    for i in 0..4 {
        e = e.add(&v(i).scale(c[1 + i]));
    }
    e = e.add(&v(0).mul(&v(1)).scale(c[5]));
    e = e.add(&v(2).mul(&v(3)).scale(c[6]));
    e = e.add(&v(1).mul(&v(1)).scale(c[7]));
    e.add(&v(3).scale(c[8]).add(&v(0).scale(c[9])).exp().scale(c[10]))
}

fn coeff(seed: u64, k: u64) -> Expr {
    coeff_on(4, seed, k)
}

fn random_tensor<K: Variance>(chart: &Arc<Chart>, degree: usize, seed: u64) -> Tensor<K> {
    let n = chart.dim();
    let mut terms = Vec::new();
    let mut k = 0;
    for blade in 0u32..(1 << n) {
        if blade.count_ones() as usize == degree {
            let idx: Vec<usize> = (0..n).filter(|i| blade & (1 << i) != 0).collect();
            terms.push((coeff_on(n, seed, k), idx));
            k += 1;
        }
    }
    Tensor::from_terms(chart.clone(), degree, terms).unwrap()
}

fn points(chart: &Chart, seed: u64) -> Vec<Vec<f64>> {
    sample_points(chart, 8, seed, &[]).unwrap()
}

fn assert_close<K: Variance>(a: &Tensor<K>, b: &Tensor<K>, pts: &[Vec<f64>], tol: f64) -> Result<(), TestCaseError> {
    for p in pts {
        let r = a.residual_at(b, p).unwrap();
        prop_assert!(r <= tol, "residual {} at {:?}", r, p);
    }
    Ok(())
}

fn sign(k: usize) -> Expr {
    Expr::constant(if k % 2 == 0 { 1.0 } else { -1.0 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn d_squared_vanishes(seed in any::<u64>(), deg in 0usize..3) {
        let c = r4();
        let a: Form = random_tensor(&c, deg, seed);
        let dda = ext_deriv(&ext_deriv(&a).unwrap()).unwrap();
        assert_close(&dda, &Form::zero(c.clone(), deg + 2), &points(&c, seed), 1e-10)?;
    }

    #[test]
    fn cartan_formula(seed in any::<u64>(), deg in 1usize..4) {
        let c = r4();
        let a: Form = random_tensor(&c, deg, seed);
        let x: MultiVector = random_tensor(&c, 1, seed ^ 1);
        let lhs = a.lie_deriv(&x).unwrap();
        let mut rhs = ext_deriv(&interior(&x, &a).unwrap()).unwrap();
        if deg < 4 {
            rhs = rhs.add(&interior(&x, &ext_deriv(&a).unwrap()).unwrap()).unwrap();
        }
        assert_close(&lhs, &rhs, &points(&c, seed), 1e-9)?;
    }

    #[test]
    fn interior_is_antiderivation(seed in any::<u64>(), p in 1usize..3, q in 0usize..2) {
        let c = r4();
        let a: Form = random_tensor(&c, p, seed);
        let b: Form = random_tensor(&c, q, seed ^ 2);
        let x: MultiVector = random_tensor(&c, 1, seed ^ 3);
        let lhs = interior(&x, &a.wedge(&b).unwrap()).unwrap();
        let mut rhs = interior(&x, &a).unwrap().wedge(&b).unwrap();
        if q > 0 {
            rhs = rhs.add(&a.wedge(&interior(&x, &b).unwrap()).unwrap().scale(&sign(p))).unwrap();
        }
        let pts = points(&c, seed);
        assert_close(&lhs, &rhs, &pts, 1e-10)?;
        let twice = interior(&x, &interior(&x, &a.wedge(&b).unwrap()).unwrap());
        if let Ok(t) = twice {
            assert_close(&t, &Form::zero(c.clone(), p + q - 2), &pts, 1e-10)?;
        }
    }

    #[test]
    fn wedge_graded_commutative(seed in any::<u64>(), p in 0usize..3, q in 0usize..3) {
        let c = r4();
        let a: Form = random_tensor(&c, p, seed);
        let b: Form = random_tensor(&c, q, seed ^ 4);
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap().scale(&sign(p * q));
        assert_close(&ab, &ba, &points(&c, seed), 1e-12)?;
    }

    #[test]
    fn lie_deriv_matches_schouten(seed in any::<u64>(), deg in 0usize..4) {
        let c = r4();
        let p: MultiVector = random_tensor(&c, deg, seed);
        let x: MultiVector = random_tensor(&c, 1, seed ^ 5);
        assert_close(&p.lie_deriv(&x).unwrap(), &schouten(&x, &p).unwrap(), &points(&c, seed), 1e-10)?;
    }

    #[test]
    fn schouten_graded_symmetry(seed in any::<u64>(), p in 0usize..3, q in 1usize..3) {
        let c = r4();
        let a: MultiVector = random_tensor(&c, p, seed);
        let b: MultiVector = random_tensor(&c, q, seed ^ 6);
        let ab = schouten(&a, &b).unwrap();
        let ba = schouten(&b, &a).unwrap();
        let k = ((p + 1) * (q + 1)) % 2; // parity of (p−1)(q−1)
        let rhs = ba.scale(&sign(k + 1));
        assert_close(&ab, &rhs, &points(&c, seed), 1e-10)?;
    }

    #[test]
    fn schouten_graded_jacobi(seed in any::<u64>(), p in 1usize..3, q in 1usize..3, r in 0usize..3) {
        let c = r4();
        let a: MultiVector = random_tensor(&c, p, seed);
        let b: MultiVector = random_tensor(&c, q, seed ^ 7);
        let e: MultiVector = random_tensor(&c, r, seed ^ 8);
        prop_assume!(p + q + r <= 6);
        let s = |x: usize, y: usize| sign((x + 1) * (y + 1));
        let t1 = schouten(&a, &schouten(&b, &e).unwrap()).unwrap().scale(&s(p, r));
        let t2 = schouten(&b, &schouten(&e, &a).unwrap()).unwrap().scale(&s(q, p));
        let t3 = schouten(&e, &schouten(&a, &b).unwrap()).unwrap().scale(&s(r, q));
        let sum = t1.add(&t2).unwrap().add(&t3).unwrap();
        let zero = MultiVector::zero(c.clone(), sum.degree());
        assert_close(&sum, &zero, &points(&c, seed), 1e-8)?;
    }

    #[test]
    fn pullback_functorial_and_commutes_with_d(seed in any::<u64>(), deg in 0usize..3) {
        let src = Arc::new(Chart::new("s", ["u", "v", "s", "t"]).unwrap());
        let mid = r4();
        let comps = |sd: u64| (0..4).map(|k| coeff(sd, 100 + k)).collect::<Vec<_>>();
        let phi = SmoothMap::new(src.clone(), mid.clone(), comps(seed)).unwrap();
        let psi = SmoothMap::new(mid.clone(), mid.clone(), comps(seed ^ 9)).unwrap();
        let a: Form = random_tensor(&mid, deg, seed ^ 10);
        let pts = points(&src, seed);
        let lhs = pullback(&phi.then(&psi).unwrap(), &a).unwrap();
        let rhs = pullback(&phi, &pullback(&psi, &a).unwrap()).unwrap();
        assert_close(&lhs, &rhs, &pts, 1e-9)?;
        let l = ext_deriv(&pullback(&phi, &a).unwrap()).unwrap();
        let r = pullback(&phi, &ext_deriv(&a).unwrap()).unwrap();
        assert_close(&l, &r, &pts, 1e-9)?;
    }

    #[test]
    fn sharp_is_antisymmetric(seed in any::<u64>()) {
        let c = r4();
        let l: MultiVector = random_tensor(&c, 2, seed);
        let mu: Form = random_tensor(&c, 1, seed ^ 11);
        let nu: Form = random_tensor(&c, 1, seed ^ 12);
        let a = l.pair(&mu, &nu).unwrap();
        let b = l.pair(&nu, &mu).unwrap();
        for p in points(&c, seed) {
            prop_assert!((a.eval(&p).unwrap() + b.eval(&p).unwrap()).abs() <= 1e-10);
        }
        // ⟨ν, ♯μ⟩ = Λ(μ, ν)
        let s = sharp(&l, &mu).unwrap();
        let direct = interior(&s, &nu).unwrap().coeff(0);
        for p in points(&c, seed) {
            prop_assert!((direct.eval(&p).unwrap() - a.eval(&p).unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn flat_sharp_on_the_plane() {
    let c = Arc::new(Chart::new("r2", ["x", "y"]).unwrap());
    for seed in 0..10u64 {
        let f = coeff_on(2, seed, 0).mul(&coeff_on(2, seed, 0)).add(&Expr::one());
        let omega = Form::basis(c.clone(), &[0, 1]).unwrap().scale(&f);
        let inv = two_form_inverse(&omega).unwrap();
        let pts = sample_points(&c, 20, seed, &inv.guards).unwrap();
        let mu: Form = random_tensor(&c, 1, seed);
        let flat = interior(&sharp(&inv.lambda, &mu).unwrap(), &omega).unwrap();
        for p in &pts {
            assert!(flat.residual_at(&mu.neg(), p).unwrap() <= 1e-10);
        }
    }
}
