//! Post-Lie algebras and the extension of the planted-tree pre-Lie algebra by
//! a finite-dimensional post-Lie algebra `P` acting on decorations.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::decorations::Label;
use crate::error::{Error, Result};
use crate::lincomb::{LinComb, Scalar};
use crate::phimaps::{Endo, PhiMap};
use crate::prelie::planted_graft;
use crate::trees::{Flat, Planted};

/// Structure constants, keyed by ordered pairs of generator indices.
pub type Constants = BTreeMap<(usize, usize), LinComb<usize>>;

/// A finite-dimensional post-Lie algebra on named generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PostLieBase {
    names: Vec<String>,
    bracket: Constants,
    triangle: Constants,
}

impl PostLieBase {
    /// Validates antisymmetry, Jacobi and the two post-Lie relations on all
    /// generator triples.
    pub fn new(names: Vec<String>, bracket: Constants, triangle: Constants) -> Result<Self> {
        let base = PostLieBase { names, bracket, triangle };
        let k = base.dim();
        let out_of_range = |c: &Constants| {
            c.iter().any(|(&(i, j), v)| i >= k || j >= k || v.terms().any(|&g| g >= k))
        };
        if out_of_range(&base.bracket) || out_of_range(&base.triangle) {
            return Err(Error::InvalidPostLie("structure constant refers to a missing generator".into()));
        }
        for i in 0..k {
            for j in 0..k {
                let (x, y) = (base.gen(i), base.gen(j));
                if base.br(&x, &y) != -base.br(&y, &x) {
                    return Err(Error::InvalidPostLie(format!(
                        "bracket not antisymmetric on ({}, {})",
                        base.names[i], base.names[j]
                    )));
                }
                for l in 0..k {
                    let z = base.gen(l);
                    let (e2, e3, e4) = base.axiom_defects(&x, &y, &z);
                    for (name, r) in [("Jacobi", e2), ("derivation", e3), ("bracket/product", e4)] {
                        if !r.is_zero() {
                            return Err(Error::InvalidPostLie(format!(
                                "{name} relation fails on ({}, {}, {})",
                                base.names[i], base.names[j], base.names[l]
                            )));
                        }
                    }
                }
            }
        }
        Ok(base)
    }

    /// Zero bracket and zero product.
    pub fn abelian(names: Vec<String>) -> Self {
        PostLieBase { names, bracket: BTreeMap::new(), triangle: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn gen(&self, i: usize) -> LinComb<usize> {
        LinComb::basis(i)
    }

    fn consts(c: &Constants, x: &LinComb<usize>, y: &LinComb<usize>) -> LinComb<usize> {
        x.bilinear(y, |i, j| c.get(&(*i, *j)).cloned().unwrap_or_default())
    }

    pub fn br(&self, x: &LinComb<usize>, y: &LinComb<usize>) -> LinComb<usize> {
        Self::consts(&self.bracket, x, y)
    }

    pub fn tri(&self, x: &LinComb<usize>, y: &LinComb<usize>) -> LinComb<usize> {
        Self::consts(&self.triangle, x, y)
    }

    fn axiom_defects(
        &self,
        x: &LinComb<usize>,
        y: &LinComb<usize>,
        z: &LinComb<usize>,
    ) -> (LinComb<usize>, LinComb<usize>, LinComb<usize>) {
        let jacobi = self.br(&self.br(x, y), z) + self.br(&self.br(y, z), x) + self.br(&self.br(z, x), y);
        let deriv = self.tri(x, &self.br(y, z)) - self.br(&self.tri(x, y), z) - self.br(y, &self.tri(x, z));
        let lhs = self.tri(&self.br(x, y), z);
        let rhs = self.tri(x, &self.tri(y, z)) - self.tri(&self.tri(x, y), z) - self.tri(y, &self.tri(x, z))
            + self.tri(&self.tri(y, x), z);
        (jacobi, deriv, lhs - rhs)
    }
}

/// Actions `ψ_E(p)` on edge decorations and `ψ_V(p)` on vertex decorations,
/// one entry per generator.
#[derive(Clone, Debug)]
pub struct PsiPair {
    pub edge: Vec<Endo>,
    pub vertex: Vec<Endo>,
}

impl PsiPair {
    fn on_edges(&self, p: &LinComb<usize>, a: &LinComb<Label>) -> Result<LinComb<Label>> {
        let mut out = LinComb::zero();
        for (i, c) in p {
            out.add_scaled(c, &self.edge[*i].apply_lc(a)?);
        }
        Ok(out)
    }

    fn on_vertices(&self, p: &LinComb<usize>, b: &LinComb<Label>) -> Result<LinComb<Label>> {
        let mut out = LinComb::zero();
        for (i, c) in p {
            out.add_scaled(c, &self.vertex[*i].apply_lc(b)?);
        }
        Ok(out)
    }
}

/// Basis element of `(D_E ⊗ T) ⊕ P`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ExtTerm {
    Planted(Planted),
    Gen(usize),
}

pub type ExtElem = LinComb<ExtTerm>;

/// The pre-Lie algebra of planted trees extended by `P`.
#[derive(Clone, Debug)]
pub struct Extension {
    pub phi: PhiMap,
    pub base: PostLieBase,
    pub psi: PsiPair,
}

fn split(u: &ExtElem) -> (LinComb<Planted>, LinComb<usize>) {
    let mut planted = LinComb::zero();
    let mut gens = LinComb::zero();
    for (t, c) in u {
        match t {
            ExtTerm::Planted(p) => planted.add_term(c.clone(), p.clone()),
            ExtTerm::Gen(i) => gens.add_term(c.clone(), *i),
        }
    }
    (planted, gens)
}

fn join(planted: &LinComb<Planted>, gens: &LinComb<usize>) -> ExtElem {
    let mut out = planted.map_terms(|p| ExtTerm::Planted(p.clone()));
    out += gens.map_terms(|&i| ExtTerm::Gen(i));
    out
}

impl Extension {
    pub fn new(phi: PhiMap, base: PostLieBase, psi: PsiPair) -> Result<Self> {
        if psi.edge.len() != base.dim() || psi.vertex.len() != base.dim() {
            return Err(Error::InvalidPostLie("one edge and one vertex action per generator required".into()));
        }
        Ok(Extension { phi, base, psi })
    }

    pub fn gen(&self, name: &str) -> Result<ExtElem> {
        let i = self.base.index(name).ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
        Ok(LinComb::basis(ExtTerm::Gen(i)))
    }

    /// `p ⊳ (a′⊗x′) = Σ_v a′ ⊗ x′` with `ψ_V(p)` applied at vertex `v`.
    fn act_on_planted(&self, p: &LinComb<usize>, q: &Planted) -> Result<LinComb<Planted>> {
        let f = Flat::from_planted(q);
        let mut out = LinComb::zero();
        for v in 0..f.len() {
            let images = self.psi.on_vertices(p, &LinComb::basis(f.vertex[v].clone()))?;
            out += images.map_terms(|b| {
                let mut g = f.clone();
                g.vertex[v] = b.clone();
                g.to_planted()
            });
        }
        Ok(out)
    }

    pub fn triangle(&self, u: &ExtElem, w: &ExtElem) -> Result<ExtElem> {
        let (up, ug) = split(u);
        let (wp, wg) = split(w);
        let mut planted = planted_graft(&self.phi, &up, &wp)?;
        for (q, c) in &wp {
            planted.add_scaled(c, &self.act_on_planted(&ug, q)?);
        }
        Ok(join(&planted, &self.base.tri(&ug, &wg)))
    }

    pub fn bracket(&self, u: &ExtElem, w: &ExtElem) -> Result<ExtElem> {
        let (up, ug) = split(u);
        let (wp, wg) = split(w);
        // {a⊗x, p′} = ψ_E(p′)(a)⊗x and {p, a′⊗x′} = −ψ_E(p)(a′)⊗x′.
        let relabel = |planted: &LinComb<Planted>, gens: &LinComb<usize>| -> Result<LinComb<Planted>> {
            planted.try_map(|p| {
                let images = self.psi.on_edges(gens, &LinComb::basis(p.edge.clone()))?;
                Ok(images.map_terms(|a| Planted::new(a.clone(), p.body.clone())))
            })
        };
        let planted = relabel(&up, &wg)? - relabel(&wp, &ug)?;
        Ok(join(&planted, &self.base.br(&ug, &wg)))
    }

    pub fn render(&self, x: &ExtElem) -> String {
        x.map_terms(|t| ExtDisplay(t.clone(), self.base.names.clone())).to_string()
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct ExtDisplay(ExtTerm, Vec<String>);

impl fmt::Display for ExtDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            ExtTerm::Planted(p) => write!(f, "{p}"),
            ExtTerm::Gen(i) => f.write_str(&self.1[*i]),
        }
    }
}

pub fn ext_triangle(phi: &PhiMap, base: &PostLieBase, psi: &PsiPair, u: &ExtElem, w: &ExtElem) -> Result<ExtElem> {
    Extension::new(phi.clone(), base.clone(), psi.clone())?.triangle(u, w)
}

pub fn ext_bracket(phi: &PhiMap, base: &PostLieBase, psi: &PsiPair, u: &ExtElem, w: &ExtElem) -> Result<ExtElem> {
    Extension::new(phi.clone(), base.clone(), psi.clone())?.bracket(u, w)
}

/// Nonzero residuals found by a check, with the number of evaluations made.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Residuals {
    pub checked: usize,
    /// `(where, rendered residual)` for each nonzero residual.
    pub failures: Vec<(String, String)>,
}

impl Residuals {
    fn record<T: Ord + Clone + fmt::Display>(&mut self, place: impl FnOnce() -> String, r: &LinComb<T>) {
        self.checked += 1;
        if !r.is_zero() {
            self.failures.push((place(), r.to_string()));
        }
    }

    pub(crate) fn record_scalar(&mut self, place: impl FnOnce() -> String, r: &Scalar) {
        self.checked += 1;
        if !r.is_zero() {
            self.failures.push((place(), r.to_string()));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Residuals of the four conditions under which the extension is post-Lie.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PsiReport {
    /// `ψ_E({p,p′}) − ψ_E(p′)ψ_E(p) + ψ_E(p)ψ_E(p′)`.
    pub edge_bracket: Residuals,
    /// `ψ_E(p ⊳ p′)`.
    pub edge_product: Residuals,
    /// `ψ_V({p,p′}) − [ψ_V(p), ψ_V(p′)] + ψ_V(p⊳p′) − ψ_V(p′⊳p)`.
    pub vertex_bracket: Residuals,
    /// `φ∘(ψ_E(p)⊗Id) − φ∘(Id⊗ψ_V(p)) + (Id⊗ψ_V(p))∘φ`.
    pub intertwining: Residuals,
}

impl PsiReport {
    pub fn is_zero(&self) -> bool {
        self.edge_bracket.is_zero() && self.edge_product.is_zero() && self.vertex_bracket.is_zero() && self.intertwining.is_zero()
    }
}

/// Evaluates the four compatibility conditions between `φ`, `P` and `ψ` on
/// every generator pair and every sampled label.
pub fn psi_compat_defects(
    phi: &PhiMap,
    base: &PostLieBase,
    psi: &PsiPair,
    edge_labels: &[Label],
    vertex_labels: &[Label],
) -> Result<PsiReport> {
    let mut report = PsiReport::default();
    let k = base.dim();
    let gen = |i: usize| LinComb::basis(i);
    for i in 0..k {
        for j in 0..k {
            let (p, q) = (gen(i), gen(j));
            let place = |l: &Label| {
                let at = format!("({}, {}) at {l}", base.names[i], base.names[j]);
                move || at
            };
            let br = base.br(&p, &q);
            let (pq, qp) = (base.tri(&p, &q), base.tri(&q, &p));
            for a in edge_labels {
                let x = LinComb::basis(a.clone());
                let r5 = psi.on_edges(&br, &x)? - psi.on_edges(&q, &psi.on_edges(&p, &x)?)?
                    + psi.on_edges(&p, &psi.on_edges(&q, &x)?)?;
                report.edge_bracket.record(place(a), &r5);
                report.edge_product.record(place(a), &psi.on_edges(&pq, &x)?);
            }
            for b in vertex_labels {
                let x = LinComb::basis(b.clone());
                let comm = psi.on_vertices(&p, &psi.on_vertices(&q, &x)?)?
                    - psi.on_vertices(&q, &psi.on_vertices(&p, &x)?)?;
                let r7 = psi.on_vertices(&br, &x)? - comm + psi.on_vertices(&pq, &x)? - psi.on_vertices(&qp, &x)?;
                report.vertex_bracket.record(place(b), &r7);
            }
        }
    }
    for i in 0..k {
        let p = gen(i);
        for a in edge_labels {
            for b in vertex_labels {
                let first = psi.on_edges(&p, &LinComb::basis(a.clone()))?.tensor(&LinComb::basis(b.clone()));
                let second = LinComb::basis(a.clone()).tensor(&psi.on_vertices(&p, &LinComb::basis(b.clone()))?);
                let after = phi.apply(a, b)?.try_map(|(x, y)| {
                    Ok::<_, Error>(LinComb::basis(x.clone()).tensor(&psi.on_vertices(&p, &LinComb::basis(y.clone()))?))
                })?;
                let r8 = phi.apply_lc(&first)? - phi.apply_lc(&second)? + after;
                report.intertwining.record(
                    || format!("{} at ({a}, {b})", base.names[i]),
                    &crate::lincomb::tensor_view(&r8),
                );
            }
        }
    }
    Ok(report)
}

/// The residuals of Jacobi, `x ⊳ {y,z} = {x⊳y, z} + {y, x⊳z}` and
/// `{x,y} ⊳ z = x⊳(y⊳z) − (x⊳y)⊳z − y⊳(x⊳z) + (y⊳x)⊳z` on one triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomDefects {
    pub jacobi: ExtElem,
    pub derivation: ExtElem,
    pub bracket_product: ExtElem,
}

impl AxiomDefects {
    pub fn is_zero(&self) -> bool {
        self.jacobi.is_zero() && self.derivation.is_zero() && self.bracket_product.is_zero()
    }
}

pub fn postlie_axiom_defects(ext: &Extension, x: &ExtElem, y: &ExtElem, z: &ExtElem) -> Result<AxiomDefects> {
    let br = |u: &ExtElem, w: &ExtElem| ext.bracket(u, w);
    let tri = |u: &ExtElem, w: &ExtElem| ext.triangle(u, w);
    let jacobi = br(&br(x, y)?, z)? + br(&br(y, z)?, x)? + br(&br(z, x)?, y)?;
    let derivation = tri(x, &br(y, z)?)? - br(&tri(x, y)?, z)? - br(y, &tri(x, z)?)?;
    let lhs = tri(&br(x, y)?, z)?;
    let rhs = tri(x, &tri(y, z)?)? - tri(&tri(x, y)?, z)? - tri(y, &tri(x, z)?)? + tri(&tri(y, x)?, z)?;
    Ok(AxiomDefects { jacobi, derivation, bracket_product: lhs - rhs })
}

/// Scales a generator combination; convenience for building `ExtElem` values.
pub fn gen_elem(i: usize, c: Scalar) -> ExtElem {
    LinComb::term(c, ExtTerm::Gen(i))
}

/// A planted tree as an `ExtElem`.
pub fn planted_elem(p: Planted) -> ExtElem {
    LinComb::basis(ExtTerm::Planted(p))
}
