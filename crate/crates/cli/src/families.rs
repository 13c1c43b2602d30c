//! Seeded families of small decoration maps and block matrices.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rtcalc_core::lincomb::{frac, int};
use rtcalc_core::matrix::Matrix;
use rtcalc_core::phimaps::{build_JD, from_blocks, BlockMatrix, JdForm};
use rtcalc_core::{PhiMap, Scalar};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_int(rng: &mut impl Rng, range: i64) -> Scalar {
    int(rng.gen_range(-range..=range))
}

/// A rational `p/q` with `|p| ≤ 4` and `1 ≤ q ≤ 3`.
pub fn small_rational(rng: &mut impl Rng) -> Scalar {
    frac(rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, range: i64) -> Matrix {
    let entries = (0..rows).map(|_| (0..cols).map(|_| small_int(rng, range)).collect()).collect();
    Matrix::from_rows(entries).expect("rectangular")
}

/// Entries are zero with probability `1 − density`.
pub fn random_blocks(rng: &mut impl Rng, m: usize, n: usize, range: i64, density: f64) -> BlockMatrix {
    let blocks = (0..m)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let mut b = Matrix::zeros(n, n);
                    for i in 0..n {
                        for j in 0..n {
                            if rng.gen_bool(density) {
                                b.set(i, j, small_int(rng, range));
                            }
                        }
                    }
                    b
                })
                .collect()
        })
        .collect();
    BlockMatrix::new(blocks).expect("square blocks")
}

/// Commuting blocks: a J or D normal form conjugated by a unimodular change of vertex basis.
pub fn commuting_blocks(rng: &mut impl Rng, m: usize, range: i64) -> BlockMatrix {
    let form = *[JdForm::J, JdForm::D].choose(rng).expect("nonempty");
    let jd = build_JD(&random_matrix(rng, m, m, range), &random_matrix(rng, m, m, range), form).expect("square");
    let t = small_int(rng, 2);
    let p = Matrix::from_rows(vec![vec![int(1), t.clone()], vec![int(0), int(1)]]).expect("2x2");
    let p_inv = Matrix::from_rows(vec![vec![int(1), -t], vec![int(0), int(1)]]).expect("2x2");
    let blocks = (0..m)
        .map(|i| (0..m).map(|j| &(&p * jd.block(i, j)) * &p_inv).collect())
        .collect();
    BlockMatrix::new(blocks).expect("square blocks")
}

/// `count` maps on edges `e1,e2` and vertices `v1,v2`, cycling through
/// commuting, dense random and sparse random block matrices.
pub fn table_family(seed: u64, count: usize) -> Vec<PhiMap> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let mx = match i % 3 {
                0 => commuting_blocks(&mut r, 2, 2),
                1 => random_blocks(&mut r, 2, 2, 2, 0.8),
                _ => random_blocks(&mut r, 2, 2, 1, 0.25),
            };
            from_blocks(&mx)
        })
        .collect()
}

/// Compatible members of [`table_family`]-style maps only.
pub fn compatible_family(seed: u64, count: usize) -> Vec<PhiMap> {
    let mut r = rng(seed);
    (0..count).map(|_| from_blocks(&commuting_blocks(&mut r, 2, 2))).collect()
}
