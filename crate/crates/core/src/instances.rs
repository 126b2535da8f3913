//! Fixed reference matrices and seeded random instances.

use rand::Rng;

use crate::matrix::PairOrderMatrix;
use crate::rational::Rational;

/// Eight-item worked example (entries in hundredths).
pub fn eight_items() -> PairOrderMatrix {
    PairOrderMatrix::from_scaled(
        &[
            &[50, 52, 46, 72, 60, 70, 82, 90],
            &[48, 50, 10, 42, 60, 90, 22, 78],
            &[54, 90, 50, 76, 98, 85, 82, 80],
            &[28, 58, 24, 50, 80, 76, 65, 80],
            &[40, 40, 2, 20, 50, 55, 0, 20],
            &[30, 10, 15, 24, 45, 50, 50, 0],
            &[18, 78, 18, 35, 100, 50, 50, 90],
            &[10, 22, 20, 20, 80, 100, 10, 50],
        ],
        100,
    )
    .expect("valid matrix")
}

/// Ten-item instance on which tail collapsing differs from truncation.
pub fn ten_items() -> PairOrderMatrix {
    PairOrderMatrix::from_scaled(
        &[
            &[50, 82, 12, 77, 5, 91, 24, 80, 15, 76],
            &[18, 50, 88, 22, 79, 10, 7, 95, 25, 79],
            &[88, 12, 50, 81, 23, 90, 75, 14, 5, 83],
            &[23, 78, 19, 50, 80, 0, 25, 85, 11, 97],
            &[95, 21, 77, 20, 50, 8, 89, 76, 2, 75],
            &[9, 90, 10, 100, 92, 50, 78, 18, 84, 20],
            &[76, 93, 25, 75, 11, 22, 50, 79, 9, 85],
            &[20, 5, 86, 15, 24, 82, 21, 50, 77, 13],
            &[85, 75, 95, 89, 98, 16, 91, 23, 50, 80],
            &[24, 21, 17, 3, 25, 80, 15, 87, 20, 50],
        ],
        100,
    )
    .expect("valid matrix")
}

/// Four-item instance whose optimal value over the bucket count is not unimodal.
pub fn four_items_non_unimodal() -> PairOrderMatrix {
    PairOrderMatrix::from_scaled(&[&[50, 55, 90, 100], &[45, 50, 20, 80], &[10, 80, 50, 65], &[0, 20, 35, 50]], 100)
        .expect("valid matrix")
}

/// Random matrix whose upper-triangle entries are uniform on {0, 1/denom, ..., 1}.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, denom: i64) -> PairOrderMatrix {
    PairOrderMatrix::from_upper(n, |_, _| Rational::new(rng.gen_range(0..=denom), denom)).expect("valid matrix")
}

/// Random matrix built from `voters` random total orders, as a profile would.
pub fn random_profile_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, voters: usize) -> PairOrderMatrix {
    use rand::seq::SliceRandom;
    let mut wins = vec![vec![0i64; n]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..voters {
        perm.shuffle(rng);
        for i in 0..n {
            for j in i + 1..n {
                wins[perm[i]][perm[j]] += 1;
            }
        }
    }
    PairOrderMatrix::from_upper(n, |r, s| {
        let total = wins[r][s] + wins[s][r];
        if total == 0 {
            Rational::half()
        } else {
            Rational::new(wins[r][s], total)
        }
    })
    .expect("valid matrix")
}
