use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tfharmonic::heisenberg::{
    induced_shift, irrational_report, pi_lambda, pi_lambda_unsigned, theta_alpha, HeisenbergElement, HeisenbergError,
    IrrationalCheckConfig, TruncatedSequence,
};
use tfharmonic::{classify_irrational, Signal};

const TAU: f64 = std::f64::consts::TAU;

fn mat(p: HeisenbergElement) -> [[i64; 3]; 3] {
    [[1, p.m, p.l], [0, 1, p.k], [0, 0, 1]]
}

fn product(a: [[i64; 3]; 3], b: [[i64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut c = [[0i64; 3]; 3];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

fn cis(turns: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * turns)
}

fn element() -> impl Strategy<Value = HeisenbergElement> {
    (-500i64..=500, -500i64..=500, -500i64..=500).prop_map(|(l, m, k)| HeisenbergElement::new(l, m, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn law_is_matrix_multiplication(p in element(), q in element()) {
        let c = product(mat(p), mat(q));
        prop_assert_eq!(mat(p.mul(q)), c);
        prop_assert_eq!(p.mul(p.inverse()), HeisenbergElement::IDENTITY);
        prop_assert_eq!(p.inverse().mul(p), HeisenbergElement::IDENTITY);
    }

    #[test]
    fn associativity(p in element(), q in element(), r in element()) {
        prop_assert_eq!(p.mul(q).mul(r), p.mul(q.mul(r)));
    }

    #[test]
    fn centre_is_the_l_axis(p in element(), l in -50i64..=50) {
        let z = HeisenbergElement::new(l, 0, 0);
        prop_assert!(z.is_central());
        prop_assert_eq!(p.mul(z), z.mul(p));
    }
}

#[test]
fn commutator_of_generators_is_central() {
    let (x, y) = (HeisenbergElement::new(0, 1, 0), HeisenbergElement::new(0, 0, 1));
    let c = x.mul(y).mul(x.inverse()).mul(y.inverse());
    assert_eq!(c, HeisenbergElement::new(1, 0, 0));
}

/// `Θ^α(P_{l,m,k})` applied to a Gaussian, against the closed form
/// `e^{-2πiαl} e^{2πikαx} e^{-π(x - m)²}` at every grid point.
#[test]
fn theta_matches_closed_form() {
    let alpha = 2f64.sqrt();
    let (ns, ext) = (8, 8);
    let f = Signal::gaussian(1, ns, ext, 1.0, &[0.0]).unwrap();
    for p in [HeisenbergElement::new(0, 1, 0), HeisenbergElement::new(0, 0, 1), HeisenbergElement::new(3, -2, 5), HeisenbergElement::new(-7, 1, -1)] {
        let got = theta_alpha(alpha, p, &f);
        let want = Signal::from_fn(1, ns, ext, |x: &[f64]| {
            let g = (-std::f64::consts::PI * (x[0] - p.m as f64).powi(2)).exp();
            cis(-alpha * p.l as f64) * cis(p.k as f64 * alpha * x[0]) * g
        })
        .unwrap();
        assert!(got.max_abs_diff(&want).unwrap() < 1e-12, "{p:?}");
    }
}

/// `T_m M_β = e^{-2πiβm} M_β T_m` is the relation that forces the central
/// phase.
#[test]
fn translation_modulation_relation() {
    let f = Signal::gaussian(1, 16, 8, 1.0, &[0.3]).unwrap();
    let beta = 3f64.sqrt();
    for m in -2i64..=2 {
        let lhs = f.modulate_real(beta).translate(&[m.into()]);
        let rhs = f.translate(&[m.into()]).modulate_real(beta).scale(cis(-beta * m as f64));
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
    }
}

#[test]
fn sign_convention() {
    let f = Signal::gaussian(1, 8, 8, 1.0, &[0.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_unsigned = 0.0f64;
    for _ in 0..20 {
        let p = HeisenbergElement::random(&mut rng, 2);
        let q = HeisenbergElement::random(&mut rng, 2);
        let lambda = 0.37;
        let lhs = pi_lambda(lambda, p, &pi_lambda(lambda, q, &f));
        assert!(lhs.max_abs_diff(&pi_lambda(lambda, p.mul(q), &f)).unwrap() < 1e-12);
        let lhs = pi_lambda_unsigned(lambda, p, &pi_lambda_unsigned(lambda, q, &f));
        worst_unsigned = worst_unsigned.max(lhs.max_abs_diff(&pi_lambda_unsigned(lambda, p.mul(q), &f)).unwrap());
        assert!((pi_lambda(lambda, p, &f).norm_sqr() - f.norm_sqr()).abs() < 1e-12);
    }
    assert!(worst_unsigned > 0.1, "{worst_unsigned}");
}

/// `u = (0, 1, 2, 3, 0)` on `a ∈ [-2, 2]`, `λ = 1/4`, `t = 1/8`, worked by
/// hand from `(ρ(P_{l,m,k}) u)(a) = e^{2πi(λl − λak + tk)} u(a − m)`.
#[test]
fn induced_shift_on_a_window_of_five() {
    let u = TruncatedSequence::from_fn(2, |a| Complex64::new([0.0, 1.0, 2.0, 3.0, 0.0][(a + 2) as usize], 0.0));
    let (lam, t) = (0.25, 0.125);

    // P_{0,1,0}: shift right by one.
    let v = induced_shift(lam, t, HeisenbergElement::new(0, 1, 0), &u).unwrap();
    let want = [0.0, 0.0, 1.0, 2.0, 3.0];
    for a in -2..=2 {
        assert_eq!(v.get(a), Complex64::new(want[(a + 2) as usize], 0.0));
    }

    // P_{0,0,1}: u(a) e^{2πi(1/8 − a/4)}; at a = -1 the phase is 3/8, at 0 it
    // is 1/8, at 1 it is -1/8.
    let v = induced_shift(lam, t, HeisenbergElement::new(0, 0, 1), &u).unwrap();
    let r = 0.5f64.sqrt();
    let want = [
        Complex64::new(0.0, 0.0),
        Complex64::new(-r, r),
        Complex64::new(r, r) * 2.0,
        Complex64::new(r, -r) * 3.0,
        Complex64::new(0.0, 0.0),
    ];
    for a in -2..=2 {
        assert!((v.get(a) - want[(a + 2) as usize]).norm() < 1e-15, "a = {a}: {}", v.get(a));
    }

    // P_{2,0,0}: the scalar e^{2πi/2} = -1.
    let v = induced_shift(lam, t, HeisenbergElement::new(2, 0, 0), &u).unwrap();
    for a in -2..=2 {
        assert!((v.get(a) + u.get(a)).norm() < 1e-15);
    }

    assert!(matches!(induced_shift(lam, t, HeisenbergElement::new(0, -2, 0), &u), Err(HeisenbergError::WindowSpill { .. })));
    assert!(matches!(induced_shift(lam, 0.25, HeisenbergElement::IDENTITY, &u), Err(HeisenbergError::ParameterRange { .. })));
    assert!(induced_shift(-lam, 0.2, HeisenbergElement::IDENTITY, &u).is_ok());
}

#[test]
fn report_for_irrational_ratios() {
    for alpha in [2f64.sqrt(), std::f64::consts::PI, (5f64.sqrt() - 1.0) / 2.0] {
        let spec = classify_irrational(1, alpha).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = irrational_report(&spec, &mut rng, IrrationalCheckConfig { trials: 10, ..Default::default() }).unwrap();
        assert!(r.all_passed(), "{:#?}", r.checks);
        assert_eq!(r.von_neumann_type, "II");
    }
    let rational = tfharmonic::classify(tfharmonic::Matrix::from_rows(vec![vec![tfharmonic::scalar::rat(1, 2)]])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    assert!(matches!(irrational_report(&rational, &mut rng, IrrationalCheckConfig::default()), Err(HeisenbergError::NotIrrational)));
}
