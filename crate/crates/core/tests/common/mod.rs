#![allow(dead_code)]

use proptest::prelude::*;
use proptest::sample::{select, Index};

use rtcalc_core::lincomb::frac;
use rtcalc_core::matrix::Matrix;
use rtcalc_core::phimaps::{build_JD, from_blocks, BlockMatrix, JdForm};
use rtcalc_core::{Forest, Label, LinComb, PhiMap, Planted, Scalar, Tree};

pub fn sym(s: &str) -> Label {
    Label::sym(s)
}

pub fn syms(names: &[&str]) -> Vec<Label> {
    names.iter().map(|s| sym(s)).collect()
}

pub fn mi(v: &[u32]) -> Label {
    Label::mi(v)
}

/// Builds a tree without canonicalizing; vertex `i > 0` hangs from `parent[i - 1] < i`
/// through edge `edges[i - 1]`.
pub fn raw_tree(parent: &[usize], vertices: &[Label], edges: &[Label]) -> Tree {
    fn build(v: usize, parent: &[usize], vertices: &[Label], edges: &[Label]) -> Tree {
        let children = (1..vertices.len())
            .filter(|&w| parent[w - 1] == v)
            .map(|w| (edges[w - 1].clone(), build(w, parent, vertices, edges)))
            .collect();
        Tree::raw(vertices[v].clone(), children)
    }
    build(0, parent, vertices, edges)
}

/// Parent array, vertex labels and edge labels of a random layout.
pub fn arb_layout(
    min: usize,
    max: usize,
    edges: Vec<Label>,
    vertices: Vec<Label>,
) -> impl Strategy<Value = (Vec<usize>, Vec<Label>, Vec<Label>)> {
    (min..=max).prop_flat_map(move |n| {
        (
            prop::collection::vec(any::<Index>(), n - 1),
            prop::collection::vec(select(vertices.clone()), n),
            prop::collection::vec(select(edges.clone()), n - 1),
        )
            .prop_map(|(ps, vs, es)| {
                let parent = ps.iter().enumerate().map(|(i, ix)| ix.index(i + 1)).collect();
                (parent, vs, es)
            })
    })
}

pub fn arb_raw_tree(max: usize, edges: Vec<Label>, vertices: Vec<Label>) -> impl Strategy<Value = Tree> {
    arb_layout(1, max, edges, vertices).prop_map(|(p, vs, es)| raw_tree(&p, &vs, &es))
}

pub fn arb_tree(max: usize, edges: Vec<Label>, vertices: Vec<Label>) -> impl Strategy<Value = Tree> {
    arb_raw_tree(max, edges, vertices).prop_map(|t| t.canonicalize())
}

pub fn arb_planted(max: usize, edges: Vec<Label>, vertices: Vec<Label>) -> impl Strategy<Value = Planted> {
    (select(edges.clone()), arb_tree(max, edges, vertices)).prop_map(|(a, t)| Planted::new(a, t))
}

/// Forests of at most `trees` components, each with at most `max` vertices.
pub fn arb_forest(trees: usize, max: usize, edges: Vec<Label>, vertices: Vec<Label>) -> impl Strategy<Value = Forest> {
    prop::collection::vec(arb_planted(max, edges, vertices), 0..=trees).prop_map(Forest::new)
}

pub fn arb_scalar() -> impl Strategy<Value = Scalar> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| frac(p, q))
}

pub fn arb_comb<T: Ord + Clone + std::fmt::Debug>(
    terms: impl Strategy<Value = T>,
    max_terms: usize,
) -> impl Strategy<Value = LinComb<T>> {
    prop::collection::vec((arb_scalar(), terms), 0..=max_terms).prop_map(LinComb::from_terms)
}

pub fn arb_matrix(rows: usize, cols: usize, range: i64) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(prop::collection::vec(-range..=range, cols), rows).prop_map(|rs| {
        Matrix::from_rows(rs.into_iter().map(|r| r.into_iter().map(|x| frac(x, 1)).collect()).collect()).unwrap()
    })
}

/// Block matrices with entries in `-range..=range`, zero with probability about one half.
pub fn arb_blocks(m: usize, n: usize, range: i64) -> impl Strategy<Value = BlockMatrix> {
    prop::collection::vec(prop::collection::vec((-range..=range, any::<bool>()), n * n), m * m).prop_map(move |cells| {
        let blocks = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let c = &cells[i * m + j];
                        let rows = (0..n)
                            .map(|k| (0..n).map(|l| if c[k * n + l].1 { frac(c[k * n + l].0, 1) } else { frac(0, 1) }).collect())
                            .collect();
                        Matrix::from_rows(rows).unwrap()
                    })
                    .collect()
            })
            .collect();
        BlockMatrix::new(blocks).unwrap()
    })
}

/// Tree-compatible maps on `e1,e2 ⊗ v1,v2` built from J/D normal forms.
pub fn arb_compatible_map() -> impl Strategy<Value = PhiMap> {
    (arb_matrix(2, 2, 2), arb_matrix(2, 2, 2), any::<bool>()).prop_map(|(a, b, j)| {
        let form = if j { JdForm::J } else { JdForm::D };
        from_blocks(&build_JD(&a, &b, form).unwrap())
    })
}

pub fn arb_map() -> impl Strategy<Value = PhiMap> {
    arb_blocks(2, 2, 2).prop_map(|mx| from_blocks(&mx))
}

pub fn e12() -> Vec<Label> {
    syms(&["e1", "e2"])
}

pub fn v12() -> Vec<Label> {
    syms(&["v1", "v2"])
}
