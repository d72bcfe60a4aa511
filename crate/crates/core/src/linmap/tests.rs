use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::exactnum::rat;
use crate::groupkit::build::prime;

fn f(p: u64) -> Field {
    Field::Fp(prime(p))
}

fn m(field: Field, rows: &[&[i64]]) -> ExactMatrix {
    ExactMatrix::from_ints(field, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

#[test]
fn defect_examples() {
    let s = ExactMatrix::scalar(Field::Q, 3, &rat(7, 2)).unwrap();
    let d = scalar_defect(&s, false).unwrap();
    assert_eq!((d.lambda, d.defect), (Some(rat(7, 2)), 0));
    assert_eq!(d.finitary_part.rank(), 0);

    let j = m(f(2), &[&[1, 1], &[0, 1]]);
    let d = scalar_defect(&j, false).unwrap();
    assert_eq!((d.lambda, d.defect), (Some(rat(1, 1)), 1));
    assert_eq!(d.finitary_part, m(f(2), &[&[0, 1], &[0, 0]]));

    let dg = m(f(2), &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]]);
    let d = scalar_defect(&dg, true).unwrap();
    assert_eq!((d.lambda, d.defect), (Some(rat(1, 1)), 1));
}

#[test]
fn defect_over_q() {
    // eigenvalues 1/2 (twice) and −3
    let a = ExactMatrix::new(
        Field::Q,
        vec![
            vec![rat(1, 2), rat(0, 1), rat(0, 1)],
            vec![rat(5, 1), rat(1, 2), rat(0, 1)],
            vec![rat(0, 1), rat(0, 1), rat(-3, 1)],
        ],
    )
    .unwrap();
    // the Jordan block ties 1/2 with −3
    let d = scalar_defect(&a, false).unwrap();
    assert_eq!((d.lambda, d.defect), (Some(rat(-3, 1)), 2));
    let mut rows = a.rows().to_vec();
    rows[1][0] = rat(0, 1);
    let d = scalar_defect(&ExactMatrix::new(Field::Q, rows).unwrap(), false).unwrap();
    assert_eq!((d.lambda, d.defect), (Some(rat(1, 2)), 1));

    // rotation: no rational eigenvalue
    let r = m(Field::Q, &[&[0, -1], &[1, 0]]);
    let d = scalar_defect(&r, true).unwrap();
    assert_eq!((d.lambda, d.defect), (None, 2));
    assert_eq!(d.finitary_part, r);
    let d = scalar_defect(&r, false).unwrap();
    assert_eq!((d.lambda, d.defect), (Some(rat(0, 1)), 2));

    // ties go to the smaller scalar
    let t = m(Field::Q, &[&[2, 0], &[0, -1]]);
    assert_eq!(scalar_defect(&t, false).unwrap().lambda, Some(rat(-1, 1)));
}

#[test]
fn char_poly_examples() {
    let a: Vec<Vec<Int>> = [[2, 1, 0], [0, 2, 0], [1, 1, 3]].iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect();
    // (x − 2)^2 (x − 3) = x^3 − 7x^2 + 16x − 12
    assert_eq!(char_poly(&a), [1, -7, 16, -12].map(Int::from).to_vec());
}

#[test]
fn inert_codim_examples() {
    let e = Exec::Sequential;
    assert_eq!(max_inert_codim(&ExactMatrix::identity(f(2), 3), DEFAULT_BUDGET, e).unwrap().max_growth, 0);
    let j = max_inert_codim(&m(f(2), &[&[1, 1], &[0, 1]]), DEFAULT_BUDGET, e).unwrap();
    assert_eq!(j.max_growth, 1);
    // 0, three lines, the plane
    assert_eq!(j.subspaces, 5);
    assert_eq!(max_inert_codim(&m(f(2), &[&[0, 1], &[0, 0]]), DEFAULT_BUDGET, e).unwrap().max_growth, 1);
    // number of subspaces of F_3^3: 1 + 13 + 13 + 1
    assert_eq!(max_inert_codim(&ExactMatrix::identity(f(3), 3), DEFAULT_BUDGET, e).unwrap().subspaces, 28);
    assert!(matches!(
        max_inert_codim(&ExactMatrix::identity(f(2), 9), DEFAULT_BUDGET, e),
        Err(LinmapError::BudgetExceeded { .. })
    ));
    assert_eq!(max_inert_codim(&ExactMatrix::identity(Field::Q, 2), DEFAULT_BUDGET, e), Err(LinmapError::InfiniteField));
}

#[test]
fn enumeration_modes_agree() {
    let a = m(f(3), &[&[1, 2, 0, 1], &[0, 1, 1, 0], &[2, 0, 0, 1], &[1, 1, 1, 1]]);
    let s = max_inert_codim(&a, DEFAULT_BUDGET, Exec::Sequential).unwrap();
    let p = max_inert_codim(&a, DEFAULT_BUDGET, Exec::Parallel).unwrap();
    assert_eq!(s, p);
}

#[test]
fn growth_examples() {
    let s = ExactMatrix::scalar(Field::Q, 5, &rat(3, 1)).unwrap();
    let g = growth_bound_check(&s, 50, 1, Exec::Sequential).unwrap();
    assert_eq!((g.max_observed, g.violations), (0, 0));

    // shift on F_2^8: the defect is 7 and a generic line already gains 1
    let sh = ExactMatrix::shift(f(2), 8);
    let g = growth_bound_check(&sh, 200, 2, Exec::Parallel).unwrap();
    assert_eq!(g.bound, 7);
    assert!(g.holds());
    assert!(g.max_observed >= 1);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 10;
    let u: Vec<i64> = (0..2 * n).map(|_| rng.gen_range(-3..=3)).collect();
    let v: Vec<i64> = (0..2 * n).map(|_| rng.gen_range(-3..=3)).collect();
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| 3 * i64::from(i == j) + u[i] * v[j] + u[n + i] * v[n + j]).collect())
        .collect();
    let a = ExactMatrix::from_ints(Field::Q, &rows).unwrap();
    let g = growth_bound_check(&a, 100, 3, Exec::Parallel).unwrap();
    assert!(g.bound <= 2 && g.holds() && g.max_observed <= 2);
    assert_eq!(g, growth_bound_check(&a, 100, 3, Exec::Sequential).unwrap());
}

#[test]
fn shift_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..40 {
        let (field, n) = if rng.gen_bool(0.5) { (f(5), 3) } else { (Field::Q, 3) };
        let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1..=1)).collect()).collect();
        let a = ExactMatrix::from_ints(field, &rows).unwrap();
        let mu = rat(rng.gen_range(1..=4), 1);
        let b = a.add_scalar(&mu).unwrap();
        let (da, db) = (scalar_defect(&a, false).unwrap(), scalar_defect(&b, false).unwrap());
        assert_eq!(da.defect, db.defect);
        // two minimizers would need 2 * defect >= n
        if 2 * da.defect < n {
            let shifted = da.lambda.map(|l| reduce(field, &(l + &mu)).unwrap());
            assert_eq!(db.lambda, shifted);
        }
        assert_eq!(db.finitary_part.rank(), db.defect);
        let back = db.finitary_part.add_scalar(db.lambda.as_ref().unwrap()).unwrap();
        assert_eq!(back, b);
    }
}

#[test]
fn truncation_family_bounds() {
    // λI plus a fixed rank-one corner, truncated at n = 2..=7: defect and
    // growth stay at 1 uniformly in n
    for n in 2..=7usize {
        let rows: Vec<Vec<i64>> =
            (0..n).map(|i| (0..n).map(|j| i64::from(i == j) + i64::from(i == 0 && j == n - 1)).collect()).collect();
        let a = ExactMatrix::from_ints(f(2), &rows).unwrap();
        assert_eq!(scalar_defect(&a, false).unwrap().defect, 1);
        assert_eq!(max_inert_codim(&a, DEFAULT_BUDGET, Exec::Parallel).unwrap().max_growth, 1);
    }
    // the shift truncations have defect n − 1, unbounded in n
    for n in 2..=7usize {
        assert_eq!(scalar_defect(&ExactMatrix::shift(f(2), n), false).unwrap().defect, n - 1);
    }
}

#[test]
fn parse_examples() {
    let a = parse_matrix("F3", "1 2; 4 -1").unwrap();
    assert_eq!(a, m(f(3), &[&[1, 2], &[1, 2]]));
    let q = parse_matrix("Q", "1/2, 0\n0 1").unwrap();
    assert_eq!(q.entry(0, 0), &rat(1, 2));
    assert!(parse_matrix("F2", "1 2 3; 4 5").is_err());
    assert!(parse_matrix("F3", "1/3").is_err());
}
