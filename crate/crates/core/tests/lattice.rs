mod common;

use common::*;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfharmonic::lattice::{hnf, is_sublattice, lattice_sum, reduce_mod};
use tfharmonic::scalar::{int, rat};
use tfharmonic::{classify, IntegerMatrix, Lattice, Matrix, Rational, RationalMatrix};

fn lat(rows: &[&[(i64, i64)]]) -> Lattice {
    Lattice::new(Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&(p, q)| rat(p, q)).collect()).collect())).unwrap()
}

fn scalar(p: i64, q: i64) -> Lattice {
    lat(&[&[(p, q)]])
}

#[test]
fn small_examples() {
    assert_eq!(scalar(2, 3).intersect(&Lattice::standard(1)).unwrap(), scalar(2, 1));
    assert_eq!(lattice_sum(&scalar(2, 1), &scalar(3, 1)).unwrap(), Lattice::standard(1));
    assert_eq!(lattice_sum(&scalar(6, 1), &scalar(4, 1)).unwrap(), scalar(2, 1));
    assert_eq!(reduce_mod(&[rat(7, 3)], &scalar(2, 1)), vec![rat(1, 3)]);
}

#[test]
fn hnf_examples() {
    let h = hnf(&Matrix::from_rows(vec![vec![int(6), int(4)]])).unwrap();
    assert_eq!(h.lower, Matrix::from_rows(vec![vec![int(2)]]));
    let m: IntegerMatrix = Matrix::from_rows(vec![vec![int(6), int(4)]]);
    let first = &m * &h.transform;
    assert_eq!(first[(0, 0)], int(2));

    let h = hnf(&Matrix::from_rows(vec![vec![int(2), int(0)], vec![int(1), int(3)]])).unwrap();
    assert_eq!(h.lower.det().abs(), int(6));
    assert!(h.lower[(0, 1)].is_zero());
}

/// 50 random `B` with `d ∈ {1, 2, 3}` and denominators at most 6.
fn random_instances() -> Vec<RationalMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..50).map(|i| random_rational_matrix(&mut rng, 1 + i % 3, 6)).collect()
}

#[test]
fn intersect_equals_congruence_scan() {
    for b in random_instances() {
        let d = b.rows();
        let dual = Lattice::new(b.inverse().unwrap().transpose()).unwrap();
        let a = dual.intersect(&Lattice::standard(d)).unwrap();
        let oracle = brute_force_a(&b).lattice();
        assert_eq!(a.canonical_basis(), oracle.canonical_basis(), "B = {b:?}");
        let spec = classify(b.clone()).unwrap();
        assert_eq!(spec.normal_subgroup().unwrap().lattice(), &oracle);
    }
}

#[test]
fn index_is_abs_det() {
    for b in random_instances() {
        let spec = classify(b.clone()).unwrap();
        let n = spec.normal_subgroup().unwrap();
        let q = n.lattice().quotient_structure().unwrap();
        let counted = index_by_counting(&b);
        assert_eq!(n.abs_det().to_i64().unwrap(), counted);
        assert_eq!(q.order() as i64, counted);
        assert_eq!(brute_force_a(&b).index(), counted);
    }
}

#[test]
fn two_by_two_scan_oracle() {
    // B^{-T}u for u ∈ [-60, 60]^2, keep the integer points.
    let b = example_b();
    let bit = b.inverse().unwrap().transpose();
    let mut e = Echelon::new(2, 60);
    for u0 in -60..=60 {
        for u1 in -60..=60 {
            let x = bit.mul_vec(&[rat(u0, 1), rat(u1, 1)]);
            if x.iter().all(Rational::is_integer) {
                e.insert(x.iter().map(|v| v.to_integer().to_i64().unwrap()).collect());
            }
        }
    }
    let spec = classify(b).unwrap();
    let n = spec.normal_subgroup().unwrap();
    assert_eq!(n.lattice(), &e.lattice());
    assert_eq!(n.abs_det(), int(120));
    assert_eq!(e.index(), 120);
    assert_eq!(spec.m(), Some(60));
}

#[test]
fn coset_representatives_are_complete() {
    let spec = classify(example_b()).unwrap();
    let q = spec.normal_subgroup().unwrap().lattice().quotient_structure().unwrap();
    let reps = q.coset_reps();
    assert_eq!(reps.len(), 120);
    for (i, r) in reps.iter().enumerate() {
        assert_eq!(q.index_of(r), i);
    }
    // Distinct classes: no difference of two representatives lies in AZ^2.
    let sub = q.sub_lattice();
    for i in 0..reps.len() {
        for j in 0..i {
            let diff: Vec<Rational> = reps[i].iter().zip(&reps[j]).map(|(a, b)| Rational::from_integer(a - b)).collect();
            assert!(!cramer_contains(sub.basis(), &diff));
        }
    }
}

fn rational_lattice(d: usize, entries: &[(i64, i64)]) -> Option<Lattice> {
    let rows = (0..d).map(|i| (0..d).map(|j| rat(entries[i * d + j].0, entries[i * d + j].1)).collect()).collect();
    Lattice::new(Matrix::from_rows(rows)).ok()
}

fn lattice_strategy() -> impl Strategy<Value = (usize, Vec<(i64, i64)>, Vec<(i64, i64)>)> {
    (1usize..=3).prop_flat_map(|d| {
        let entry = (-6i64..=6, 1i64..=6);
        (Just(d), prop::collection::vec(entry.clone(), d * d), prop::collection::vec(entry, d * d))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn determinant_identity((d, e1, e2) in lattice_strategy()) {
        let (Some(l1), Some(l2)) = (rational_lattice(d, &e1), rational_lattice(d, &e2)) else { return Ok(()) };
        let s = l1.sum(&l2).unwrap();
        let i = l1.intersect(&l2).unwrap();
        prop_assert_eq!(s.volume() * i.volume(), l1.volume() * l2.volume());
        prop_assert!(is_sublattice(&i, &l1) && is_sublattice(&i, &l2));
        prop_assert!(is_sublattice(&l1, &s) && is_sublattice(&l2, &s));
    }

    #[test]
    fn intersect_membership_matches_box((d, e1, e2) in lattice_strategy()) {
        let (Some(l1), Some(l2)) = (rational_lattice(d, &e1), rational_lattice(d, &e2)) else { return Ok(()) };
        let i = l1.intersect(&l2).unwrap();
        for c in i.basis().columns() {
            prop_assert!(cramer_contains(l1.basis(), &c) && cramer_contains(l2.basis(), &c));
        }
        // Points of L1 with small coefficients that also lie in L2 are in the intersection.
        let r: i64 = if d == 3 { 3 } else { 6 };
        let span = 2 * r + 1;
        for idx in 0..span.pow(d as u32) {
            let coeffs: Vec<Rational> = (0..d).map(|j| rat((idx / span.pow(j as u32)) % span - r, 1)).collect();
            let x = l1.basis().mul_vec(&coeffs);
            if cramer_contains(l2.basis(), &x) {
                prop_assert!(cramer_contains(i.basis(), &x));
            }
        }
    }

    #[test]
    fn reduction_is_invariant((d, e1, _e2) in lattice_strategy(), seed in any::<u64>()) {
        let Some(l) = rational_lattice(d, &e1) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Rational> = (0..d).map(|_| rat(rng.random_range(-50..=50), rng.random_range(1..=7))).collect();
        let v = l.basis().mul_vec(&(0..d).map(|_| rat(rng.random_range(-9..=9), 1)).collect::<Vec<_>>());
        let shifted: Vec<Rational> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
        let r = reduce_mod(&x, &l);
        prop_assert_eq!(&r, &reduce_mod(&shifted, &l));
        let diff: Vec<Rational> = x.iter().zip(&r).map(|(a, b)| a - b).collect();
        prop_assert!(cramer_contains(l.basis(), &diff));
        for c in l.coordinates(&r) {
            prop_assert!(!c.is_negative() && c < Rational::one());
        }
    }

    #[test]
    fn hnf_is_canonical_and_unimodular(entries in prop::collection::vec(-20i64..=20, 6)) {
        let m: IntegerMatrix = Matrix::from_rows(vec![entries[..3].iter().map(|&x| int(x)).collect(), entries[3..].iter().map(|&x| int(x)).collect()]);
        let Ok(h) = hnf(&m) else { return Ok(()) };
        prop_assert!(tfharmonic::lattice::hnf::is_canonical(&h.lower));
        prop_assert!(h.transform.det().abs().is_one());
        // Same lattice: columns of each side are integer combinations of the other.
        let lower = h.lower.to_rational();
        for c in m.to_rational().columns() {
            prop_assert!(cramer_contains(&lower, &c));
        }
        let product = &m * &h.transform;
        prop_assert_eq!(product.submatrix(0..2, 0..2), h.lower.clone());
        prop_assert!((0..2).all(|r| product[(r, 2)].is_zero()));
    }
}
