use cmlab::problems::{
    bool_matmul, element_distinct, hamming_close, hamming_threshold, is_rigid, max_alpha_search, rank, rect_alpha,
    sort, unique, EmbeddedRectangle, Matrix,
};
use proptest::prelude::*;

#[test]
fn element_distinct_rectangles_in_two_coordinates() {
    // With n = 2 the best rectangle is two disjoint halves of [N].
    for big_n in 2..=6u64 {
        let (alpha, r) = max_alpha_search(&|x: &[u64]| element_distinct(x), 2, big_n, 1).unwrap().unwrap();
        assert_eq!(alpha.num * big_n, (big_n / 2) * alpha.den, "N={big_n}");
        assert_eq!(rect_alpha(&r, &|x: &[u64]| element_distinct(x), 2, big_n).unwrap(), alpha);
    }
}

#[test]
fn rect_alpha_rejects_points_outside() {
    let r = EmbeddedRectangle { a: vec![0], b: vec![1], sigma: vec![], r_a: vec![vec![0], vec![1]], r_b: vec![vec![1]] };
    assert!(rect_alpha(&r, &|x: &[u64]| element_distinct(x), 2, 4).is_err());
}

#[test]
fn hamming_threshold_floors() {
    assert_eq!(hamming_threshold(255), 0);
    assert_eq!(hamming_threshold(256), 1);
    assert_eq!(hamming_threshold(1 << 16), 2);
    assert!(hamming_close(&[0b1, 0b11], 256));
    assert!(!hamming_close(&[0b0, 0b11], 256));
}

#[test]
fn identity_rigidity() {
    let id = Matrix::identity(4, 5).unwrap();
    assert!(is_rigid(&id, 4, 0, 1.0).unwrap());
    assert!(!is_rigid(&id, 4, 1, 1.0).unwrap());
    assert!(is_rigid(&id, 1, 3, 0.0).unwrap());
}

#[test]
fn matrix_products_mod_p() {
    let a = Matrix::from_rows(&[vec![1, 2], vec![3, 4]], 5).unwrap();
    assert_eq!(a.mul_vec(&[1, 1]).unwrap(), vec![3, 2]);
    let sq = a.mul(&a).unwrap();
    assert_eq!((sq.get(0, 0), sq.get(0, 1), sq.get(1, 0), sq.get(1, 1)), (2, 0, 0, 2));
    assert_eq!(a.rank(), 2);
}

proptest! {
    #[test]
    fn rank_sorts(x in proptest::collection::vec(0u64..20, 0..12)) {
        let pi = rank(&x);
        let permuted: Vec<u64> = pi.iter().map(|&i| x[i]).collect();
        prop_assert_eq!(&permuted, &sort(&x));
        for w in pi.windows(2) {
            prop_assert!(x[w[0]] < x[w[1]] || (x[w[0]] == x[w[1]] && w[0] < w[1]));
        }
    }

    #[test]
    fn unique_and_distinct_agree(x in proptest::collection::vec(0u64..10, 0..10)) {
        let u = unique(&x);
        prop_assert_eq!(element_distinct(&x), u.len() == x.len());
        for v in &u {
            prop_assert_eq!(x.iter().filter(|&y| y == v).count(), 1);
        }
    }

    #[test]
    fn boolean_product_matches_integer_product(
        a in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 3), 1..4),
        b in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 2), 3),
    ) {
        let c = bool_matmul(&a, &b).unwrap();
        for (i, row) in a.iter().enumerate() {
            for j in 0..2 {
                let s: u32 = (0..3).map(|k| u32::from(row[k] && b[k][j])).sum();
                prop_assert_eq!(c[i][j], s > 0);
            }
        }
    }
}
