//! The multi-index decorations of singular SPDEs: the derivations `∂^(j)`,
//! the map `φ^λ = exp(∂^λ)`, its extension by the noise symbols `Ξ` and `⋆`,
//! the action of the abelian post-Lie algebra spanned by `X_0..X_d`, and
//! `Ξ`-admissible planted trees.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::decorations::{lambda_pow, mi_abs, mi_binom, mi_min, mi_sub, Basis, Label, MultiIndex};
use crate::error::{Error, Result};
use crate::lincomb::{int, LinComb, Scalar};
use crate::phimaps::{direct_sum, exp_series, Pair, PairRule, PhiMap};
use crate::postlie::{PostLieBase, PsiPair};
use crate::prelie::planted_graft;
use crate::phimaps::Endo;
use crate::trees::{Planted, Tree};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpdeConfig {
    pub d: usize,
    pub lambda: Vec<Scalar>,
    pub noise: bool,
}

impl SpdeConfig {
    /// `d` is read off the length of `lambda`, which must be nonempty.
    pub fn new(lambda: Vec<Scalar>) -> Self {
        assert!(!lambda.is_empty(), "lambda needs at least one entry");
        SpdeConfig { d: lambda.len() - 1, lambda, noise: false }
    }

    /// `λ = (1,…,1)` on `N^{d+1}`.
    pub fn ones(d: usize) -> Self {
        SpdeConfig::new(vec![Scalar::one(); d + 1])
    }

    pub fn with_noise(mut self) -> Self {
        self.noise = true;
        self
    }

    pub fn negated(&self) -> Self {
        SpdeConfig { lambda: self.lambda.iter().map(|x| -x).collect(), ..self.clone() }
    }

    pub fn edge_basis(&self) -> Basis {
        if self.noise {
            Basis::multi_indices_with(self.d, Label::Xi)
        } else {
            Basis::multi_indices(self.d)
        }
    }

    pub fn vertex_basis(&self) -> Basis {
        if self.noise {
            Basis::multi_indices_with(self.d, Label::Star)
        } else {
            Basis::multi_indices(self.d)
        }
    }
}

fn mi_pair(a: MultiIndex, b: MultiIndex) -> Pair {
    (Label::Mi(a), Label::Mi(b))
}

fn both_mi<'a>(a: &'a Label, b: &'a Label) -> Result<(&'a MultiIndex, &'a MultiIndex)> {
    match (a, b) {
        (Label::Mi(x), Label::Mi(y)) => Ok((x, y)),
        (Label::Mi(_), _) => Err(Error::LabelOutsideBasis { label: b.to_string(), role: "vertex" }),
        _ => Err(Error::LabelOutsideBasis { label: a.to_string(), role: "edge" }),
    }
}

/// `∂^(j)(a⊗b) = b_j (a − ε^(j)) ⊗ (b − ε^(j))`, zero when `a_j = 0`.
pub fn partial_j(j: usize, a: &MultiIndex, b: &MultiIndex) -> Result<LinComb<Pair>> {
    if j >= a.len() {
        return Err(Error::IndexOutOfRange { index: j, len: a.len() });
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let unit = MultiIndex::unit(a.len(), j);
    match (mi_sub(a, &unit)?, mi_sub(b, &unit)?) {
        (Some(a1), Some(b1)) => Ok(LinComb::term(int(b.entries()[j] as i64), mi_pair(a1, b1))),
        _ => Ok(LinComb::zero()),
    }
}

#[derive(Debug)]
struct PartialLambda(Vec<Scalar>);

impl PairRule for PartialLambda {
    fn apply(&self, a: &Label, b: &Label) -> Result<LinComb<Pair>> {
        let (a, b) = both_mi(a, b)?;
        let mut out = LinComb::zero();
        for (j, l) in self.0.iter().enumerate() {
            if !l.is_zero() {
                out.add_scaled(l, &partial_j(j, a, b)?);
            }
        }
        Ok(out)
    }
}

/// `∂^λ = Σ_j λ_j ∂^(j)`.
pub fn partial_lambda(cfg: &SpdeConfig) -> PhiMap {
    let b = Basis::multi_indices(cfg.d);
    PhiMap::from_rule(b.clone(), b, PartialLambda(cfg.lambda.clone()), true)
}

#[derive(Debug)]
struct PhiLambda(Vec<Scalar>);

impl PairRule for PhiLambda {
    fn apply(&self, a: &Label, b: &Label) -> Result<LinComb<Pair>> {
        let (a, b) = both_mi(a, b)?;
        let mut out = LinComb::zero();
        for l in mi_min(a, b)?.below() {
            let c = lambda_pow(&self.0, &l)? * mi_binom(b, &l)?;
            if let (Some(a1), Some(b1)) = (mi_sub(a, &l)?, mi_sub(b, &l)?) {
                out.add_term(c, mi_pair(a1, b1));
            }
        }
        Ok(out)
    }
}

/// `φ^λ(a⊗b) = Σ_{l ≤ min(a,b)} λ^l binom(b,l) (a−l)⊗(b−l)`.
pub fn phi_lambda(cfg: &SpdeConfig) -> PhiMap {
    let b = Basis::multi_indices(cfg.d);
    PhiMap::from_rule(b.clone(), b, PhiLambda(cfg.lambda.clone()), true)
}

/// `exp(∂^λ)` as a terminating series, independent of the closed form.
pub fn phi_lambda_via_exp(cfg: &SpdeConfig, max_iter: usize) -> PhiMap {
    exp_series(&partial_lambda(cfg), max_iter)
}

/// `(∂^λ)^n(a⊗b) = n! Σ_{l ≤ min(a,b), |l| = n} λ^l binom(b,l) (a−l)⊗(b−l)`.
pub fn partial_lambda_power(cfg: &SpdeConfig, n: u32, a: &MultiIndex, b: &MultiIndex) -> Result<LinComb<Pair>> {
    let fact: Scalar = (1..=n as i64).map(int).product();
    let mut out = LinComb::zero();
    for l in mi_min(a, b)?.below() {
        if mi_abs(&l) != n as u64 {
            continue;
        }
        let c = &fact * lambda_pow(&cfg.lambda, &l)? * mi_binom(b, &l)?;
        if let (Some(a1), Some(b1)) = (mi_sub(a, &l)?, mi_sub(b, &l)?) {
            out.add_term(c, mi_pair(a1, b1));
        }
    }
    Ok(out)
}

/// `φ̄^λ = φ^λ ⊕_{0,1} 0` on `(N^{d+1} ⊕ Ξ) ⊗ (N^{d+1} ⊕ ⋆)`:
/// `a⊗⋆ ↦ 0`, `Ξ⊗b ↦ Ξ⊗b`, `Ξ⊗⋆ ↦ 0`.
pub fn noise_extend(cfg: &SpdeConfig) -> PhiMap {
    let noise = PhiMap::zero(Basis::Finite(vec![Label::Xi]), Basis::Finite(vec![Label::Star]));
    direct_sum(&phi_lambda(cfg), &noise, Scalar::zero(), Scalar::one()).expect("noise labels are disjoint from multi-indices")
}

fn shifted(l: &Label, j: usize, up: bool) -> Result<LinComb<Label>> {
    match l {
        Label::Mi(m) => {
            if j >= m.len() {
                return Err(Error::IndexOutOfRange { index: j, len: m.len() });
            }
            let unit = MultiIndex::unit(m.len(), j);
            Ok(if up {
                LinComb::basis(Label::Mi(m.add(&unit)?))
            } else {
                mi_sub(m, &unit)?.map(|x| LinComb::basis(Label::Mi(x))).unwrap_or_default()
            })
        }
        Label::Xi | Label::Star => Ok(LinComb::zero()),
        other => Err(Error::LabelOutsideBasis { label: other.to_string(), role: "decoration" }),
    }
}

/// The abelian post-Lie algebra spanned by `X_0..X_d`, acting by
/// `ψ_V(X_i)b = b + ε^(i)` and `ψ_E(X_i)a = a − ε^(i)` (zero when `a_i = 0`).
/// The noise symbols are killed by every `X_i`.
pub fn spde_psi(cfg: &SpdeConfig) -> (PostLieBase, PsiPair) {
    let names = (0..=cfg.d).map(|i| format!("X{i}")).collect();
    let edge = (0..=cfg.d).map(|j| Endo::from_fn(move |l| shifted(l, j, false))).collect();
    let vertex = (0..=cfg.d).map(|j| Endo::from_fn(move |l| shifted(l, j, true))).collect();
    (PostLieBase::abelian(names), PsiPair { edge, vertex })
}

fn admissible_body(t: &Tree) -> bool {
    if *t.root() == Label::Star && !t.children().is_empty() {
        return false;
    }
    t.children().iter().all(|(e, c)| {
        (*e != Label::Xi || (*c.root() == Label::Star && c.children().is_empty())) && admissible_body(c)
    })
}

/// Plant edge `Ξ` only over a lone `⋆`, every `Ξ` edge ends in `⋆`, and `⋆`
/// vertices are leaves.
pub fn xi_admissible(p: &Planted) -> bool {
    if p.edge == Label::Xi && (*p.body.root() != Label::Star || !p.body.children().is_empty()) {
        return false;
    }
    admissible_body(&p.body)
}

/// A formal expression in the generators `[Ξ](⋆)`, `[a](⋆)`, `[a](b)` and
/// the planted grafting product.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GenExpr {
    Gen(Planted),
    Graft(Box<GenExpr>, Box<GenExpr>),
}

impl GenExpr {
    pub fn eval(&self, phi: &PhiMap) -> Result<LinComb<Planted>> {
        match self {
            GenExpr::Gen(p) => Ok(LinComb::basis(p.clone())),
            GenExpr::Graft(x, y) => planted_graft(phi, &x.eval(phi)?, &y.eval(phi)?),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            GenExpr::Gen(_) => 0,
            GenExpr::Graft(x, y) => 1 + x.depth().max(y.depth()),
        }
    }
}

impl fmt::Display for GenExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenExpr::Gen(p) => write!(f, "{p}"),
            GenExpr::Graft(x, y) => write!(f, "({x} |> {y})"),
        }
    }
}

/// Writes admissible planted trees as combinations of generator expressions.
///
/// A tree whose body root `c` has children is obtained from its first branch
/// `[b](T1)` and the remainder `[e](c, rest)`: grafting at the root contributes
/// `φ̄^λ` on `(b, c)`, undone in advance by `φ̄^{−λ}`, and grafts at higher
/// vertices have one root child fewer and are realized recursively.
pub struct Realizer {
    phi: PhiMap,
    inverse: PhiMap,
    memo: BTreeMap<Planted, LinComb<GenExpr>>,
}

impl Realizer {
    pub fn new(cfg: &SpdeConfig) -> Self {
        Realizer { phi: noise_extend(cfg), inverse: noise_extend(&cfg.negated()), memo: BTreeMap::new() }
    }

    pub fn phi(&self) -> &PhiMap {
        &self.phi
    }

    pub fn realize(&mut self, p: &Planted) -> Result<LinComb<GenExpr>> {
        if !xi_admissible(p) {
            return Err(Error::NotAdmissible(p.to_string()));
        }
        if let Some(r) = self.memo.get(p) {
            return Ok(r.clone());
        }
        let out = self.realize_uncached(p)?;
        self.memo.insert(p.clone(), out.clone());
        Ok(out)
    }

    fn realize_uncached(&mut self, p: &Planted) -> Result<LinComb<GenExpr>> {
        let children = p.body.children();
        if children.is_empty() {
            return Ok(LinComb::basis(GenExpr::Gen(p.clone())));
        }
        let (b, t1) = children[0].clone();
        let rest: Vec<_> = children[1..].to_vec();
        let c = p.body.root().clone();
        let mut expr = LinComb::zero();
        let mut produced = LinComb::zero();
        for ((bi, ci), mu) in self.inverse.apply(&b, &c)? {
            let top = Planted::new(bi, t1.clone());
            let bottom = Planted::new(p.edge.clone(), Tree::new(ci, rest.clone()));
            let (x, y) = (self.realize(&top)?, self.realize(&bottom)?);
            expr += x.bilinear(&y, |u, w| LinComb::basis(GenExpr::Graft(Box::new(u.clone()), Box::new(w.clone())))).scale(&mu);
            produced += planted_graft(&self.phi, &LinComb::basis(top), &LinComb::basis(bottom))?.scale(&mu);
        }
        let excess = produced - LinComb::basis(p.clone());
        for (q, c) in &excess {
            if q.body.children().len() >= children.len() {
                return Err(Error::NotReached { target: p.to_string(), residual: excess.to_string() });
            }
            expr.add_scaled(&-c, &self.realize(q)?);
        }
        Ok(expr)
    }
}

/// Realizes every target from the generators and checks, by evaluating the
/// resulting expressions with `⊳^{φ̄^λ}`, that each one is reached exactly.
pub fn xi_generation_probe(cfg: &SpdeConfig, targets: &[Planted], max_vertices: usize) -> Result<()> {
    let mut r = Realizer::new(cfg);
    for t in targets {
        if t.vertex_count() > max_vertices || !xi_admissible(t) {
            return Err(Error::NotAdmissible(t.to_string()));
        }
        let expr = r.realize(t)?;
        let value = expr.try_map(|e| e.eval(r.phi()))?;
        let residual = value - LinComb::basis(t.clone());
        if !residual.is_zero() {
            return Err(Error::NotReached { target: t.to_string(), residual: residual.to_string() });
        }
    }
    Ok(())
}
