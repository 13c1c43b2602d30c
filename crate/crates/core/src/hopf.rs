//! Bialgebras on planted forests: the Guin-Oudom product `⋆^φ` with the
//! deshuffle coproduct, the cut coproduct `Δ^φ` with concatenation, the
//! morphism `Θ̄_φ`, and the pairing that puts the two in duality.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::decorations::Label;
use crate::error::{Error, Result};
use crate::lincomb::{LinComb, Scalar};
use crate::phimaps::PhiMap;
use crate::postlie::Residuals;
use crate::prelie::apply_phi_at;
use crate::trees::{flat_isomorphisms, graft_forest_flat, grafting_maps, Flat, Forest, Planted};

pub type ForestPair = (Forest, Forest);

fn apply_sites(phi: &PhiMap, flat: Flat, sites: &[(usize, usize)]) -> Result<LinComb<Flat>> {
    let mut acc = LinComb::basis(flat);
    for &(edge_top, v) in sites {
        acc = apply_phi_at(phi, &acc, edge_top, v)?;
    }
    Ok(acc)
}

fn star_forests(phi: &PhiMap, f: &Forest, g: &Forest, every_tree_grafted: bool) -> Result<LinComb<Forest>> {
    let mut out = LinComb::zero();
    for map in grafting_maps(f, g) {
        if every_tree_grafted && map.iter().any(Option::is_none) {
            continue;
        }
        let (flat, sites) = graft_forest_flat(f, &map, g)?;
        out += apply_sites(phi, flat, &sites)?.map_terms(Flat::to_forest);
    }
    Ok(out)
}

/// `(a1⊗x1)⋯(ak⊗xk) ⊳^φ (a′⊗x′)`: every tree of the forest is grafted on a
/// vertex of the planted tree, with `φ` applied at each grafting site.
pub fn go_triangle(phi: &PhiMap, f: &LinComb<Forest>, p: &LinComb<Planted>) -> Result<LinComb<Planted>> {
    phi.ensure_not_refuted()?;
    f.try_bilinear(p, |x, q| {
        Ok(star_forests(phi, x, &Forest::single(q.clone()), true)?.map_terms(|r| {
            r.trees().first().cloned().expect("grafting onto one planted tree keeps one component")
        }))
    })
}

/// `F ⋆^φ G = Σ_{g ∈ G(F,G)} F ↷_g G` with `φ` applied at every grafted tree.
pub fn star_product(phi: &PhiMap, f: &LinComb<Forest>, g: &LinComb<Forest>) -> Result<LinComb<Forest>> {
    phi.ensure_not_refuted()?;
    f.try_bilinear(g, |x, y| star_forests(phi, x, y, false))
}

/// Concatenation of forests, extended bilinearly.
pub fn concat(f: &LinComb<Forest>, g: &LinComb<Forest>) -> LinComb<Forest> {
    f.bilinear(g, |x, y| LinComb::basis(x.mul(y)))
}

/// The coproduct for which planted trees are primitive: sum over subsets of
/// tree positions, so repeated trees produce binomial multiplicities.
pub fn deshuffle(f: &LinComb<Forest>) -> LinComb<ForestPair> {
    f.map(|x| {
        let trees = x.trees();
        let k = trees.len();
        LinComb::from_terms((0..1u64 << k).map(|mask| {
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for (i, t) in trees.iter().enumerate() {
                if mask >> i & 1 == 1 { &mut left } else { &mut right }.push(t.clone());
            }
            (Scalar::one(), (Forest::new(left), Forest::new(right)))
        }))
    })
}

/// `Δ^φ(F) = Σ_{I upper part} F|I ⊗ F|V∖I`, after applying `φ` to every
/// edge cut between a vertex outside `I` and its child in `I`.
pub fn bck_coproduct(phi: &PhiMap, f: &LinComb<Forest>) -> Result<LinComb<ForestPair>> {
    phi.ensure_not_refuted()?;
    f.try_map(|x| {
        let flat = Flat::from_forest(x);
        let mut out = LinComb::zero();
        for upper in flat.upper_parts() {
            let sites: Vec<(usize, usize)> = (0..flat.len())
                .filter_map(|v| flat.parent[v].filter(|&p| upper[v] && !upper[p]).map(|p| (v, p)))
                .collect();
            let lower: Vec<bool> = upper.iter().map(|k| !k).collect();
            out += apply_sites(phi, flat.clone(), &sites)?
                .map_terms(|g| (g.restrict(&upper).to_forest(), g.restrict(&lower).to_forest()));
        }
        Ok(out)
    })
}

/// `Θ̄_φ`: `Θ_φ` applied to the body of every tree; plant edges are untouched.
pub fn theta_bar(phi: &PhiMap, f: &LinComb<Forest>) -> Result<LinComb<Forest>> {
    phi.ensure_not_refuted()?;
    f.try_map(|x| {
        let flat = Flat::from_forest(x);
        let sites: Vec<(usize, usize)> =
            (0..flat.len()).filter_map(|v| flat.parent[v].map(|p| (v, p))).collect();
        Ok(apply_sites(phi, flat, &sites)?.map_terms(Flat::to_forest))
    })
}

/// The counit: the coefficient of the empty forest.
pub fn counit(f: &LinComb<Forest>) -> Scalar {
    f.coeff(&Forest::unit())
}

/// Componentwise concatenation on `S ⊗ S`.
pub fn tensor_mul(x: &LinComb<ForestPair>, y: &LinComb<ForestPair>) -> LinComb<ForestPair> {
    x.bilinear(y, |(a, b), (c, d)| LinComb::basis((a.mul(c), b.mul(d))))
}

/// `(Δ⊗id)Δ(x) − (id⊗Δ)Δ(x)` for any coproduct on forests.
pub fn coassociativity_defect<F>(coproduct: F, x: &LinComb<Forest>) -> Result<LinComb<(Forest, Forest, Forest)>>
where
    F: Fn(&LinComb<Forest>) -> Result<LinComb<ForestPair>>,
{
    let once = coproduct(x)?;
    let left = once.try_map(|(a, b)| {
        Ok::<_, Error>(coproduct(&LinComb::basis(a.clone()))?.map_terms(|(p, q)| (p.clone(), q.clone(), b.clone())))
    })?;
    let right = once.try_map(|(a, b)| {
        Ok::<_, Error>(coproduct(&LinComb::basis(b.clone()))?.map_terms(|(p, q)| (a.clone(), p.clone(), q.clone())))
    })?;
    Ok(left - right)
}

type LabelForm = Arc<dyn Fn(&Label, &Label) -> Scalar + Send + Sync>;

/// A pairing `⟨a′⊗b′, a⊗b⟩ = ⟨a′, a⟩_E ⟨b′, b⟩_V` between decorations; the
/// first argument of each form is on the primed side.
#[derive(Clone)]
pub struct Pairing {
    edge: LabelForm,
    vertex: LabelForm,
}

impl fmt::Debug for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Pairing")
    }
}

impl Pairing {
    pub fn new(
        edge: impl Fn(&Label, &Label) -> Scalar + Send + Sync + 'static,
        vertex: impl Fn(&Label, &Label) -> Scalar + Send + Sync + 'static,
    ) -> Self {
        Pairing { edge: Arc::new(edge), vertex: Arc::new(vertex) }
    }

    /// Each basis is dual to itself.
    pub fn delta() -> Self {
        let d = |x: &Label, y: &Label| if x == y { Scalar::one() } else { Scalar::zero() };
        Pairing::new(d, d)
    }

    pub fn labels(&self, primed: &(Label, Label), plain: &(Label, Label)) -> Scalar {
        let e = (self.edge)(&primed.0, &plain.0);
        if e.is_zero() {
            return e;
        }
        e * (self.vertex)(&primed.1, &plain.1)
    }

    pub fn pairs(&self, primed: &LinComb<(Label, Label)>, plain: &LinComb<(Label, Label)>) -> Scalar {
        let mut out = Scalar::zero();
        for (x, c) in primed {
            for (y, d) in plain {
                out += c * d * self.labels(x, y);
            }
        }
        out
    }
}

fn pair_basis(pr: &Pairing, f2: &Forest, f: &Forest) -> Scalar {
    let a = Flat::from_forest(f2);
    let b = Flat::from_forest(f);
    let mut out = Scalar::zero();
    for sigma in flat_isomorphisms(&a, &b) {
        let mut term = Scalar::one();
        for (v, &w) in sigma.iter().enumerate() {
            let primed = (a.edge[v].clone().expect("planted"), a.vertex[v].clone());
            let plain = (b.edge[w].clone().expect("planted"), b.vertex[w].clone());
            term *= pr.labels(&primed, &plain);
            if term.is_zero() {
                break;
            }
        }
        out += term;
    }
    out
}

/// `⟨x′, x⟩ = Σ_{σ ∈ Iso(F′,F)} ∏_{e ∈ E(F′)} ⟨d′_e ⊗ d′_{t(e)}, d_{σe} ⊗ d_{σt(e)}⟩`.
pub fn pair_forests(pr: &Pairing, f2: &LinComb<Forest>, f: &LinComb<Forest>) -> Scalar {
    let mut out = Scalar::zero();
    for (x, c) in f2 {
        for (y, d) in f {
            if x.vertex_count() == y.vertex_count() && x.trees().len() == y.trees().len() {
                out += c * d * pair_basis(pr, x, y);
            }
        }
    }
    out
}

/// `⟨x′⊗y′, x⊗y⟩ = ⟨x′, x⟩⟨y′, y⟩`.
pub fn pair_tensors(pr: &Pairing, f2: &LinComb<ForestPair>, f: &LinComb<ForestPair>) -> Scalar {
    let mut out = Scalar::zero();
    for ((x2, y2), c) in f2 {
        for ((x, y), d) in f {
            let left = pair_forests(pr, &LinComb::basis(x2.clone()), &LinComb::basis(x.clone()));
            if left.is_zero() {
                continue;
            }
            out += c * d * left * pair_forests(pr, &LinComb::basis(y2.clone()), &LinComb::basis(y.clone()));
        }
    }
    out
}

/// Checks `⟨φ′(a′⊗b′), a⊗b⟩ = ⟨a′⊗b′, φ(a⊗b)⟩` on the given labels.
pub fn check_adjoint(
    phi: &PhiMap,
    phi2: &PhiMap,
    pr: &Pairing,
    primed: (&[Label], &[Label]),
    plain: (&[Label], &[Label]),
) -> Result<()> {
    for a2 in primed.0 {
        for b2 in primed.1 {
            let left_in = phi2.apply(a2, b2)?;
            for a in plain.0 {
                for b in plain.1 {
                    let lhs = pr.pairs(&left_in, &LinComb::basis((a.clone(), b.clone())));
                    let rhs = pr.pairs(&LinComb::basis((a2.clone(), b2.clone())), &phi.apply(a, b)?);
                    if lhs != rhs {
                        return Err(Error::AdjointnessViolated {
                            a2: a2.to_string(),
                            b2: b2.to_string(),
                            a: a.to_string(),
                            b: b.to_string(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Residuals of the four Hopf pairing identities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HopfReport {
    /// `⟨1, x⟩ − ε(x)`.
    pub unit: Residuals,
    /// `⟨x′, 1⟩ − ε(x′)`.
    pub counit: Residuals,
    /// `⟨x′ ⋆^{φ′} y′, x⟩ − ⟨x′⊗y′, Δ^φ(x)⟩`.
    pub star_vs_cut: Residuals,
    /// `⟨Δ(x′), x⊗y⟩ − ⟨x′, xy⟩`.
    pub deshuffle_vs_concat: Residuals,
}

impl HopfReport {
    pub fn is_zero(&self) -> bool {
        self.unit.is_zero() && self.counit.is_zero() && self.star_vs_cut.is_zero() && self.deshuffle_vs_concat.is_zero()
    }
}

/// Evaluates the pairing identities between `(S′, ⋆^{φ′}, Δ)` and
/// `(S, ·, Δ^φ)` on sample forests. Adjointness of `φ′` and `φ` is checked
/// first on the labels occurring in the samples.
///
/// Both sides of each identity are graded by vertex count, so only sample
/// combinations of matching degree are evaluated.
pub fn hopf_pairing_defects(
    phi: &PhiMap,
    phi2: &PhiMap,
    pr: &Pairing,
    primed: &[Forest],
    plain: &[Forest],
) -> Result<HopfReport> {
    let labels = |fs: &[Forest]| {
        let (mut es, mut vs) = (Vec::new(), Vec::new());
        for f in fs {
            let flat = Flat::from_forest(f);
            es.extend(flat.edge.into_iter().flatten());
            vs.extend(flat.vertex);
        }
        es.sort();
        es.dedup();
        vs.sort();
        vs.dedup();
        (es, vs)
    };
    let (e2, v2) = labels(primed);
    let (e1, v1) = labels(plain);
    check_adjoint(phi, phi2, pr, (&e2, &v2), (&e1, &v1))?;

    let mut report = HopfReport::default();
    let one = LinComb::basis(Forest::unit());
    let basis = |f: &Forest| LinComb::basis(f.clone());
    for x in plain {
        let r = pair_forests(pr, &one, &basis(x)) - counit(&basis(x));
        report.unit.record_scalar(|| format!("x = {x}"), &r);
    }
    for x2 in primed {
        let r = pair_forests(pr, &basis(x2), &one) - counit(&basis(x2));
        report.counit.record_scalar(|| format!("x' = {x2}"), &r);
    }
    let cuts: Vec<LinComb<ForestPair>> = plain.iter().map(|x| bck_coproduct(phi, &basis(x))).collect::<Result<_>>()?;
    for x2 in primed {
        for y2 in primed {
            let degree = x2.vertex_count() + y2.vertex_count();
            if !plain.iter().any(|x| x.vertex_count() == degree) {
                continue;
            }
            let prod = star_product(phi2, &basis(x2), &basis(y2))?;
            let split = LinComb::basis((x2.clone(), y2.clone()));
            for (x, cut) in plain.iter().zip(&cuts) {
                if x.vertex_count() != degree {
                    continue;
                }
                let r = pair_forests(pr, &prod, &basis(x)) - pair_tensors(pr, &split, cut);
                report.star_vs_cut.record_scalar(|| format!("x' = {x2}, y' = {y2}, x = {x}"), &r);
            }
        }
    }
    for x2 in primed {
        let split = deshuffle(&basis(x2));
        for x in plain {
            for y in plain {
                if x.vertex_count() + y.vertex_count() != x2.vertex_count() {
                    continue;
                }
                let r = pair_tensors(pr, &split, &LinComb::basis((x.clone(), y.clone())))
                    - pair_forests(pr, &basis(x2), &basis(&x.mul(y)));
                report.deshuffle_vs_concat.record_scalar(|| format!("x' = {x2}, x = {x}, y = {y}"), &r);
            }
        }
    }
    Ok(report)
}
