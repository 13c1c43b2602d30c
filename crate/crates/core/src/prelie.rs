//! Grafting products on decorated trees: the free multiple pre-Lie product
//! `⊳_a`, its deformation `⊳^φ_a`, the morphism `Θ_φ`, and the
//! non-associative permutative coproduct used to detect freeness.

use crate::decorations::Label;
use crate::error::{Error, Result};
use crate::lincomb::{int, LinComb};
use crate::phimaps::{compose, PhiMap};
use crate::trees::{graft_at, split_root_edge, Flat, Planted, Tree};

/// Applies `φ` to the pair (label of the edge above `edge_top`, label of `vertex`)
/// in every term.
pub fn apply_phi_at(phi: &PhiMap, x: &LinComb<Flat>, edge_top: usize, vertex: usize) -> Result<LinComb<Flat>> {
    x.try_map(|f| {
        let a = f.edge[edge_top].as_ref().expect("site has an edge");
        let images = phi.apply(a, &f.vertex[vertex])?;
        Ok(images.map_terms(|(a2, b2)| {
            let mut g = f.clone();
            g.edge[edge_top] = Some(a2.clone());
            g.vertex[vertex] = b2.clone();
            g
        }))
    })
}

pub(crate) fn flats_to_trees(x: &LinComb<Flat>) -> LinComb<Tree> {
    x.map_terms(Flat::to_tree)
}

/// `x ⊳_a y = Σ_v x ↷_v y`, the new edge labelled `a`.
pub fn graft_free(x: &LinComb<Tree>, a: &Label, y: &LinComb<Tree>) -> LinComb<Tree> {
    x.bilinear(y, |s, t| {
        LinComb::from_terms(
            t.vertex_ids()
                .into_iter()
                .map(|v| (int(1), graft_at(s, &v, t, a).expect("vertex id from the tree itself"))),
        )
    })
}

/// `x ⊳^φ_a y`: graft at each vertex `v` of `y`, then apply `φ` to the new
/// edge label and the label of `v`. Well defined for any `φ`.
pub fn graft_phi(phi: &PhiMap, x: &LinComb<Tree>, a: &Label, y: &LinComb<Tree>) -> Result<LinComb<Tree>> {
    phi.edge_basis().check(a, "edge")?;
    x.try_bilinear(y, |s, t| graft_phi_trees(phi, s, a, t))
}

fn graft_phi_trees(phi: &PhiMap, x: &Tree, a: &Label, y: &Tree) -> Result<LinComb<Tree>> {
    let base = Flat::from_tree(y);
    let mut out = LinComb::zero();
    for v in 0..base.len() {
        let mut f = base.clone();
        let mut top = Flat::from_tree(x);
        top.edge[0] = Some(a.clone());
        let off = f.append(&top);
        f.parent[off] = Some(v);
        out += flats_to_trees(&apply_phi_at(phi, &LinComb::basis(f), off, v)?);
    }
    Ok(out)
}

/// The two products a defect can be measured for.
#[derive(Clone, Copy, Debug)]
pub enum Product<'a> {
    Free,
    Deformed(&'a PhiMap),
}

impl Product<'_> {
    pub fn apply(&self, x: &LinComb<Tree>, a: &Label, y: &LinComb<Tree>) -> Result<LinComb<Tree>> {
        match self {
            Product::Free => Ok(graft_free(x, a, y)),
            Product::Deformed(phi) => graft_phi(phi, x, a, y),
        }
    }
}

/// `[x ⊳_a (y ⊳_a2 z) − (x ⊳_a y) ⊳_a2 z] − [y ⊳_a2 (x ⊳_a z) − (y ⊳_a2 x) ⊳_a z]`.
pub fn multiple_prelie_defect(
    product: Product<'_>,
    a: &Label,
    a2: &Label,
    x: &LinComb<Tree>,
    y: &LinComb<Tree>,
    z: &LinComb<Tree>,
) -> Result<LinComb<Tree>> {
    let p = |u: &LinComb<Tree>, e: &Label, w: &LinComb<Tree>| product.apply(u, e, w);
    let left = p(x, a, &p(y, a2, z)?)? - p(&p(x, a, y)?, a2, z)?;
    let right = p(y, a2, &p(x, a, z)?)? - p(&p(y, a2, x)?, a, z)?;
    Ok(left - right)
}

fn theta_flat(phi: &PhiMap, t: &Tree, reversed: bool) -> Result<LinComb<Tree>> {
    let f = Flat::from_tree(t);
    let mut edges: Vec<usize> = (1..f.len()).collect();
    if reversed {
        edges.reverse();
    }
    let mut acc = LinComb::basis(f.clone());
    for v in edges {
        acc = apply_phi_at(phi, &acc, v, f.parent[v].expect("non-root"))?;
    }
    Ok(flats_to_trees(&acc))
}

/// Same result as the preorder pass of `theta_flat`: edges with different
/// source vertices act on disjoint factors, so subtrees can be finished (and
/// their like terms merged) before the edges at the root are processed in
/// child order.
fn theta_rec(phi: &PhiMap, t: &Tree) -> Result<LinComb<Tree>> {
    let mut state: LinComb<(Label, Vec<(Label, Tree)>)> = LinComb::basis((t.root().clone(), Vec::new()));
    for (a, child) in t.children() {
        let below = theta_rec(phi, child)?;
        let mut next = LinComb::zero();
        for ((b, kids), c) in &state {
            for ((a2, b2), d) in phi.apply(a, b)? {
                let cd = c * &d;
                for (sub, e) in &below {
                    let mut k = kids.clone();
                    k.push((a2.clone(), sub.clone()));
                    next.add_term(&cd * e, (b2.clone(), k));
                }
            }
        }
        state = next;
    }
    Ok(state.map_terms(|(b, kids)| Tree::new(b.clone(), kids.clone())))
}

/// `Θ_φ`: applies `φ` once at every (edge, source vertex) pair.
///
/// Refuses maps with a known incompatibility witness, since the result would
/// then depend on the order of the edges.
pub fn theta(phi: &PhiMap, x: &LinComb<Tree>) -> Result<LinComb<Tree>> {
    phi.ensure_not_refuted()?;
    x.try_map(|t| theta_rec(phi, t))
}

/// `Θ_φ` evaluated in both edge orders; disagreement is reported as `OrderDependent`.
pub fn theta_probe(phi: &PhiMap, x: &LinComb<Tree>) -> Result<LinComb<Tree>> {
    x.try_map(|t| {
        let fwd = theta_flat(phi, t, false)?;
        if fwd != theta_flat(phi, t, true)? {
            return Err(Error::OrderDependent(t.to_string()));
        }
        Ok(fwd)
    })
}

/// `Θ_φ(x ⊳^ψ_a y) − Θ_φ(x) ⊳^{φ∘ψ}_a Θ_φ(y)`.
pub fn theta_morphism_defect(
    phi: &PhiMap,
    psi: &PhiMap,
    x: &LinComb<Tree>,
    a: &Label,
    y: &LinComb<Tree>,
) -> Result<LinComb<Tree>> {
    let lhs = theta(phi, &graft_phi(psi, x, a, y)?)?;
    let rhs = graft_phi(&compose(phi, psi)?, &theta(phi, x)?, a, &theta(phi, y)?)?;
    Ok(lhs - rhs)
}

/// `(a⊗x) ⊳ (a′⊗x′) = a′ ⊗ (x ⊳^φ_a x′)` on planted trees.
pub fn planted_graft(phi: &PhiMap, p: &LinComb<Planted>, q: &LinComb<Planted>) -> Result<LinComb<Planted>> {
    p.try_bilinear(q, |s, t| {
        let body = graft_phi_trees(phi, &s.body, &s.edge, &t.body)?;
        Ok(body.map_terms(|b| Planted::new(t.edge.clone(), b.clone())))
    })
}

/// `ρ(a⊗T) = Σ_e (d_e ⊗ P^e(T)) ⊗ (a ⊗ R^e(T))` over edges leaving the body root.
pub fn nap_coproduct(x: &LinComb<Planted>) -> LinComb<(Planted, Planted)> {
    x.map(|p| {
        LinComb::from_terms(
            (0..p.body.children().len())
                .map(|i| (int(1), split_root_edge(p, &[i]).expect("root child exists"))),
        )
    })
}

/// `◄`: grafts the first component at the body root of the second.
pub fn nap_regraft(x: &LinComb<(Planted, Planted)>) -> LinComb<Planted> {
    x.map_terms(|(top, bottom)| {
        let body = graft_at(&top.body, &[], &bottom.body, &top.edge).expect("root address");
        Planted::new(bottom.edge.clone(), body)
    })
}

/// `◄∘ρ(p) = α·p` with `α` the number of edges at the body root.
pub fn nap_eigen_check(p: &Planted) -> bool {
    let alpha = int(p.body.children().len() as i64);
    let x = LinComb::basis(p.clone());
    nap_regraft(&nap_coproduct(&x)) == x.scale(&alpha)
}
