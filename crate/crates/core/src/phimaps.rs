//! Linear maps `φ: D_E ⊗ D_V → D_E ⊗ D_V` on basis pairs, the tree-compatibility
//! test `φ13∘φ23 = φ23∘φ13`, the combinators that preserve it, and the block
//! matrix description over finite bases.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Signed, Zero};

use crate::decorations::{Basis, Label};
use crate::error::{Error, Result};
use crate::lincomb::{int, LinComb, Scalar};
use crate::matrix::Matrix;

/// An (edge label, vertex label) basis pair.
pub type Pair = (Label, Label);
/// A basis element of `D_E ⊗ D_E ⊗ D_V`.
pub type Triple = (Label, Label, Label);

/// The action of a map on basis pairs. Implementations must be pure.
pub trait PairRule: Send + Sync + fmt::Debug {
    fn apply(&self, a: &Label, b: &Label) -> Result<LinComb<Pair>>;
}

/// Entry bound used to screen an unflagged map on an infinite basis before a
/// structure that needs compatibility.
pub const PROBE_BOUND: u32 = 2;

/// A linear endomorphism of `D_E ⊗ D_V`.
#[derive(Clone)]
pub struct PhiMap {
    edges: Basis,
    vertices: Basis,
    rule: Arc<dyn PairRule>,
    by_construction: bool,
    refutation: Arc<OnceLock<Option<Triple>>>,
}

impl fmt::Debug for PhiMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiMap")
            .field("edges", &self.edges)
            .field("vertices", &self.vertices)
            .field("rule", &self.rule)
            .field("by_construction", &self.by_construction)
            .finish()
    }
}

impl PhiMap {
    /// Wraps a rule. `by_construction` records that a theorem guarantees tree-compatibility.
    pub fn from_rule(edges: Basis, vertices: Basis, rule: impl PairRule + 'static, by_construction: bool) -> Self {
        PhiMap {
            edges,
            vertices,
            rule: Arc::new(rule),
            by_construction,
            refutation: Arc::new(OnceLock::new()),
        }
    }

    pub fn identity(edges: Basis, vertices: Basis) -> Self {
        PhiMap::from_rule(edges, vertices, Scaled(Scalar::one()), true)
    }

    pub fn zero(edges: Basis, vertices: Basis) -> Self {
        PhiMap::from_rule(edges, vertices, Scaled(Scalar::zero()), true)
    }

    /// A map given by its values on basis pairs; missing pairs map to zero.
    pub fn table(edges: Basis, vertices: Basis, entries: BTreeMap<Pair, LinComb<Pair>>) -> Result<Self> {
        for ((a, b), out) in &entries {
            edges.check(a, "edge")?;
            vertices.check(b, "vertex")?;
            for (x, y) in out.terms() {
                edges.check(x, "edge")?;
                vertices.check(y, "vertex")?;
            }
        }
        Ok(PhiMap::from_rule(edges, vertices, Table(entries), false))
    }

    /// `f ⊗ g` for endomorphisms of the two decoration spaces.
    pub fn tensor_of_endos(edges: Basis, f: Endo, vertices: Basis, g: Endo) -> Self {
        PhiMap::from_rule(edges, vertices, EndoTensor(f, g), true)
    }

    /// Marks the map as tree-compatible on the caller's authority.
    pub fn assume_compatible(mut self) -> Self {
        self.by_construction = true;
        self
    }

    pub fn edge_basis(&self) -> &Basis {
        &self.edges
    }

    pub fn vertex_basis(&self) -> &Basis {
        &self.vertices
    }

    pub fn is_compatible_by_construction(&self) -> bool {
        self.by_construction
    }

    pub fn is_finite(&self) -> bool {
        self.edges.is_finite() && self.vertices.is_finite()
    }

    pub fn apply(&self, a: &Label, b: &Label) -> Result<LinComb<Pair>> {
        self.edges.check(a, "edge")?;
        self.vertices.check(b, "vertex")?;
        self.rule.apply(a, b)
    }

    pub fn apply_lc(&self, x: &LinComb<Pair>) -> Result<LinComb<Pair>> {
        x.try_map(|(a, b)| self.apply(a, b))
    }

    /// φ acting on slots (1,3) of a triple combination.
    pub fn act13(&self, x: &LinComb<Triple>) -> Result<LinComb<Triple>> {
        x.try_map(|(a, a2, b)| {
            Ok(self.apply(a, b)?.map_terms(|(x, y)| (x.clone(), a2.clone(), y.clone())))
        })
    }

    /// φ acting on slots (2,3) of a triple combination.
    pub fn act23(&self, x: &LinComb<Triple>) -> Result<LinComb<Triple>> {
        x.try_map(|(a, a2, b)| {
            Ok(self.apply(a2, b)?.map_terms(|(x, y)| (a.clone(), x.clone(), y.clone())))
        })
    }

    /// Guard used by the tree operations: fails only when a witness
    /// of incompatibility is known (exhaustively on finite bases, up to
    /// [`PROBE_BOUND`] otherwise). The result is cached.
    pub fn ensure_not_refuted(&self) -> Result<()> {
        if self.by_construction {
            return Ok(());
        }
        let witness = self.refutation.get_or_init(|| {
            let bound = if self.is_finite() { None } else { Some(PROBE_BOUND) };
            match check_compat(self, bound) {
                Ok(CompatVerdict::Refuted(r)) => Some((r.a, r.a2, r.b)),
                _ => None,
            }
        });
        match witness {
            None => Ok(()),
            Some((a, a2, b)) => Err(Error::IncompatiblePhi {
                a: a.to_string(),
                a2: a2.to_string(),
                b: b.to_string(),
            }),
        }
    }
}

/// `φ13∘φ23 − φ23∘φ13` on `a ⊗ a2 ⊗ b`.
pub fn phi13_phi23_defect(phi: &PhiMap, a: &Label, a2: &Label, b: &Label) -> Result<LinComb<Triple>> {
    mixed_defect(phi, phi, a, a2, b)
}

/// `φ13∘ψ23 − ψ23∘φ13` on `a ⊗ a2 ⊗ b`: the cross-commutation hypothesis for
/// sums and compositions.
pub fn mixed_defect(phi: &PhiMap, psi: &PhiMap, a: &Label, a2: &Label, b: &Label) -> Result<LinComb<Triple>> {
    let x = LinComb::basis((a.clone(), a2.clone(), b.clone()));
    let lhs = phi.act13(&psi.act23(&x)?)?;
    let rhs = psi.act23(&phi.act13(&x)?)?;
    Ok(lhs - rhs)
}

/// A counterexample to tree-compatibility.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refutation {
    pub a: Label,
    pub a2: Label,
    pub b: Label,
    /// `φ13∘φ23(a ⊗ a2 ⊗ b)`.
    pub lhs: LinComb<Triple>,
    /// `φ23∘φ13(a ⊗ a2 ⊗ b)`.
    pub rhs: LinComb<Triple>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompatVerdict {
    Compatible,
    Refuted(Box<Refutation>),
    VerifiedUpToBound(u32),
}

impl fmt::Display for CompatVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompatVerdict::Compatible => f.write_str("Compatible"),
            CompatVerdict::VerifiedUpToBound(n) => write!(f, "VerifiedUpToBound({n})"),
            CompatVerdict::Refuted(r) => write!(
                f,
                "Refuted(a={}, a2={}, b={}; lhs={}; rhs={})",
                r.a, r.a2, r.b,
                render_triples(&r.lhs),
                render_triples(&r.rhs)
            ),
        }
    }
}

fn render_triples(x: &LinComb<Triple>) -> String {
    x.map_terms(|(a, a2, b)| TripleDisplay(a.clone(), a2.clone(), b.clone())).to_string()
}

/// Renders `a⊗a2⊗b`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct TripleDisplay(Label, Label, Label);

impl fmt::Display for TripleDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}⊗{}⊗{}", self.0, self.1, self.2)
    }
}

/// Tests `φ13∘φ23 = φ23∘φ13` on every basis triple.
///
/// On finite bases the whole basis is covered and the verdict is exact. On
/// infinite bases `bound` is required and limits multi-index entries; a
/// passing check then yields `VerifiedUpToBound`.
pub fn check_compat(phi: &PhiMap, bound: Option<u32>) -> Result<CompatVerdict> {
    let finite = phi.is_finite();
    let bound = match (finite, bound) {
        (true, _) => 0,
        (false, Some(n)) => n,
        (false, None) => return Err(Error::InfiniteBasis),
    };
    let es = phi.edges.sample(bound);
    let vs = phi.vertices.sample(bound);
    for a in &es {
        for a2 in &es {
            for b in &vs {
                let x = LinComb::basis((a.clone(), a2.clone(), b.clone()));
                let lhs = phi.act13(&phi.act23(&x)?)?;
                let rhs = phi.act23(&phi.act13(&x)?)?;
                if lhs != rhs {
                    return Ok(CompatVerdict::Refuted(Box::new(Refutation {
                        a: a.clone(),
                        a2: a2.clone(),
                        b: b.clone(),
                        lhs,
                        rhs,
                    })));
                }
            }
        }
    }
    Ok(if finite { CompatVerdict::Compatible } else { CompatVerdict::VerifiedUpToBound(bound) })
}

/// `Φ = φ1 ⊕_{λ,μ} φ2` on `(D_E¹ ⊕ D_E²) ⊗ (D_V¹ ⊕ D_V²)`.
pub fn direct_sum(phi1: &PhiMap, phi2: &PhiMap, lambda: Scalar, mu: Scalar) -> Result<PhiMap> {
    let edges = Basis::sum(phi1.edges.clone(), phi2.edges.clone())?;
    let vertices = Basis::sum(phi1.vertices.clone(), phi2.vertices.clone())?;
    let flag = phi1.by_construction && phi2.by_construction;
    Ok(PhiMap::from_rule(
        edges,
        vertices,
        DirectSum { first: phi1.clone(), second: phi2.clone(), lambda, mu },
        flag,
    ))
}

fn same_bases(phi: &PhiMap, psi: &PhiMap) -> Result<()> {
    if phi.edges != psi.edges || phi.vertices != psi.vertices {
        return Err(Error::BasisMismatch("maps act on different decoration spaces".into()));
    }
    Ok(())
}

/// `φ∘ψ`. Tree-compatible when both are and they cross-commute; that
/// hypothesis is not tracked, so the result carries no construction flag.
pub fn compose(phi: &PhiMap, psi: &PhiMap) -> Result<PhiMap> {
    same_bases(phi, psi)?;
    Ok(PhiMap::from_rule(
        phi.edges.clone(),
        phi.vertices.clone(),
        Compose { outer: phi.clone(), inner: psi.clone() },
        false,
    ))
}

/// `α·φ + β·ψ`, without a construction flag (see [`compose`]).
pub fn lin_comb(alpha: Scalar, phi: &PhiMap, beta: Scalar, psi: &PhiMap) -> Result<PhiMap> {
    same_bases(phi, psi)?;
    Ok(PhiMap::from_rule(
        phi.edges.clone(),
        phi.vertices.clone(),
        LinearCombination { alpha, phi: phi.clone(), beta, psi: psi.clone() },
        false,
    ))
}

/// `Σ_k P_k φ^k`, coefficients listed from degree 0.
pub fn polynomial(phi: &PhiMap, coeffs: Vec<Scalar>) -> PhiMap {
    PhiMap::from_rule(
        phi.edges.clone(),
        phi.vertices.clone(),
        Polynomial { base: phi.clone(), coeffs },
        phi.by_construction,
    )
}

/// Default iteration cap for [`exp_series`].
pub const DEFAULT_MAX_ITER: usize = 64;

/// `exp(φ)` evaluated per input as the terminating series `Σ φ^k/k!`.
/// Inputs on which `φ^max_iter` does not vanish raise `NonNilpotent`.
pub fn exp_series(phi: &PhiMap, max_iter: usize) -> PhiMap {
    PhiMap::from_rule(
        phi.edges.clone(),
        phi.vertices.clone(),
        ExpSeries { base: phi.clone(), max_iter },
        phi.by_construction,
    )
}

/// `Φ(a⊗a′ ⊗ b⊗b′) = Σ φ_E(a)⊗φ′_E(a′) ⊗ φ_V(b)⊗φ′_V(b′)` on pair labels.
pub fn tensor_product(phi: &PhiMap, phi2: &PhiMap) -> PhiMap {
    PhiMap::from_rule(
        Basis::product(phi.edges.clone(), phi2.edges.clone()),
        Basis::product(phi.vertices.clone(), phi2.vertices.clone()),
        Tensor(phi.clone(), phi2.clone()),
        phi.by_construction && phi2.by_construction,
    )
}

/// The transpose with respect to the tensor basis, each basis identified with its dual.
pub fn transpose(phi: &PhiMap) -> Result<PhiMap> {
    let (es, vs) = finite_bases(phi)?;
    let mut entries: BTreeMap<Pair, LinComb<Pair>> = BTreeMap::new();
    for a in &es {
        for b in &vs {
            for ((x, y), c) in phi.apply(a, b)? {
                entries.entry((x, y)).or_default().add_term(c, (a.clone(), b.clone()));
            }
        }
    }
    let mut t = PhiMap::table(phi.edges.clone(), phi.vertices.clone(), entries)?;
    t.by_construction = phi.by_construction;
    Ok(t)
}

fn finite_bases(phi: &PhiMap) -> Result<(Vec<Label>, Vec<Label>)> {
    match (phi.edges.elements(), phi.vertices.elements()) {
        (Some(e), Some(v)) => Ok((e, v)),
        _ => Err(Error::InfiniteBasis),
    }
}

/// The map on pair labels given by its values on basis pairs.
#[derive(Debug)]
struct Table(BTreeMap<Pair, LinComb<Pair>>);

impl PairRule for Table {
    fn apply(&self, a: &Label, b: &Label) -> Result<LinComb<Pair>> {
        Ok(self.0.get(&(a.clone(), b.clone())).cloned().unwrap_or_default())
    }
}

/// `c·id`.
#[derive(Debug)]
struct Scaled(Scalar);

impl PairRule for Scaled {
    fn apply(&self, a: &Label, b: &Label) -> Result<LinComb<Pair>> {
        Ok(LinComb::term(self.0.clone(), (a.clone(), b.clone())))
    }
}

#[derive(Debug)]
struct EndoTensor(Endo, Endo);

impl PairRule for EndoTensor {
    fn apply(&self, a: &Label, b: &Label) -> Result<LinComb<Pair>> {
        Ok(self.0.apply(a)?.tensor(&self.1.apply(b)?))
    }
}

#[derive(Debug)]
struct DirectSum {
    first: PhiMap,
    second: PhiMap,
    lambda: Scalar,
    mu: Scalar,
}

impl PairRule for DirectSum {
    fn apply(&self, a: &Label, b: &Label) -> Result<LinComb<Pair>> {
        let e1 = self.first.edges.contains(a);
        let v1 = self.first.vertices.contains(b);
        let pair = || (a.clone(), b.clone());
        match (e1, v1) {
            (true, true) => self.first.apply(a, b),
            (false, false) => self.second.apply(a, b),
            (true, false) => Ok(LinComb::term(self.lambda.clone(), pair())),
            (false, true) => Ok(LinComb::term(self.mu.clone(), pair())),
        }
    }
}

#[derive(Debug)]
struct Compose {
    outer: PhiMap,
    inner: PhiMap,
}

impl PairRule for Compose {
    fn apply(&self, a: &Label, b: &Label) -> Result<LinComb<Pair>> {
        self.outer.apply_lc(&self.inner.apply(a, b)?)
    }
}

#[derive(Debug)]
struct LinearCombination {
    alpha: Scalar,
    phi: PhiMap,
    beta: Scalar,
    psi: PhiMap,
}

impl PairRule for LinearCombination {
    fn apply(&self, a: &Label, b: &Label) -> Result<LinComb<Pair>> {
        let mut out = self.phi.apply(a, b)?.scale(&self.alpha);
        out.add_scaled(&self.beta, &self.psi.apply(a, b)?);
        Ok(out)
    }
}

#[derive(Debug)]
struct Polynomial {
    base: PhiMap,
    coeffs: Vec<Scalar>,
}

impl PairRule for Polynomial {
    fn apply(&self, a: &Label, b: &Label) -> Result<LinComb<Pair>> {
        let mut power = LinComb::basis((a.clone(), b.clone()));
        let mut out = LinComb::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                power = self.base.apply_lc(&power)?;
            }
            out.add_scaled(c, &power);
        }
        Ok(out)
    }
}

#[derive(Debug)]
struct ExpSeries {
    base: PhiMap,
    max_iter: usize,
}

impl PairRule for ExpSeries {
    fn apply(&self, a: &Label, b: &Label) -> Result<LinComb<Pair>> {
        let mut term = LinComb::basis((a.clone(), b.clone()));
        let mut out = term.clone();
        for k in 1..=self.max_iter {
            term = self.base.apply_lc(&term)?.scale(&int(k as i64).recip());
            if term.is_zero() {
                return Ok(out);
            }
            out += &term;
        }
        Err(Error::NonNilpotent { edge: a.to_string(), vertex: b.to_string(), max_iter: self.max_iter })
    }
}

#[derive(Debug)]
struct Tensor(PhiMap, PhiMap);

impl PairRule for Tensor {
    fn apply(&self, a: &Label, b: &Label) -> Result<LinComb<Pair>> {
        let (Label::Pair(a1, a2), Label::Pair(b1, b2)) = (a, b) else {
            return Err(Error::BasisMismatch("tensor product expects pair labels".into()));
        };
        let left = self.0.apply(a1, b1)?;
        let right = self.1.apply(a2, b2)?;
        Ok(left.bilinear(&right, |(x1, y1), (x2, y2)| {
            LinComb::basis((Label::pair(x1.clone(), x2.clone()), Label::pair(y1.clone(), y2.clone())))
        }))
    }
}

/// A linear endomorphism of one decoration space, given on basis labels.
type LabelRule = Arc<dyn Fn(&Label) -> Result<LinComb<Label>> + Send + Sync>;

#[derive(Clone)]
pub struct Endo {
    rule: LabelRule,
}

impl fmt::Debug for Endo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Endo")
    }
}

impl Endo {
    pub fn from_fn(f: impl Fn(&Label) -> Result<LinComb<Label>> + Send + Sync + 'static) -> Self {
        Endo { rule: Arc::new(f) }
    }

    pub fn identity() -> Self {
        Endo::from_fn(|l| Ok(LinComb::basis(l.clone())))
    }

    pub fn zero() -> Self {
        Endo::from_fn(|_| Ok(LinComb::zero()))
    }

    /// Missing labels map to zero.
    pub fn table(entries: BTreeMap<Label, LinComb<Label>>) -> Self {
        Endo::from_fn(move |l| Ok(entries.get(l).cloned().unwrap_or_default()))
    }

    /// The endomorphism with matrix `m` in the ordered basis `basis`
    /// (column `j` is the image of `basis[j]`).
    pub fn from_matrix(basis: &[Label], m: &Matrix) -> Self {
        let mut entries = BTreeMap::new();
        for (j, l) in basis.iter().enumerate() {
            let image = LinComb::from_terms((0..basis.len()).map(|i| (m.get(i, j).clone(), basis[i].clone())));
            entries.insert(l.clone(), image);
        }
        Endo::table(entries)
    }

    pub fn apply(&self, l: &Label) -> Result<LinComb<Label>> {
        (self.rule)(l)
    }

    pub fn apply_lc(&self, x: &LinComb<Label>) -> Result<LinComb<Label>> {
        x.try_map(|l| self.apply(l))
    }
}

/// Matrix of a map over finite bases: `φ(a_j ⊗ b) = Σ_i a_i ⊗ A_ij b`, with
/// `A_ij` acting on the vertex space. Indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMatrix {
    m: usize,
    n: usize,
    blocks: Vec<Matrix>,
}

impl BlockMatrix {
    /// `blocks[i][j]` is `A_ij`, each `n × n`.
    pub fn new(blocks: Vec<Vec<Matrix>>) -> Result<Self> {
        let m = blocks.len();
        let n = blocks.first().and_then(|r| r.first()).map_or(0, Matrix::rows);
        for row in &blocks {
            if row.len() != m {
                return Err(Error::Dimension("block grid must be square".into()));
            }
            for b in row {
                if b.rows() != n || b.cols() != n {
                    return Err(Error::Dimension("blocks must share one square size".into()));
                }
            }
        }
        Ok(BlockMatrix { m, n, blocks: blocks.into_iter().flatten().collect() })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block(&self, i: usize, j: usize) -> &Matrix {
        &self.blocks[i * self.m + j]
    }

    /// The `mn × mn` matrix in the basis `(a_1⊗b_1, …, a_1⊗b_n, …, a_m⊗b_n)`.
    pub fn assemble(&self) -> Matrix {
        let (m, n) = (self.m, self.n);
        let mut out = Matrix::zeros(m * n, m * n);
        for i in 0..m {
            for j in 0..m {
                let b = self.block(i, j);
                for k in 0..n {
                    for l in 0..n {
                        out.set(i * n + k, j * n + l, b.get(k, l).clone());
                    }
                }
            }
        }
        out
    }

    /// The block matrix of the transpose: blocks `(A_ji)^T`.
    pub fn transpose(&self) -> BlockMatrix {
        let blocks = (0..self.m)
            .map(|i| (0..self.m).map(|j| self.block(j, i).transpose()).collect())
            .collect();
        BlockMatrix::new(blocks).expect("transpose keeps dimensions")
    }

    /// First pair of non-commuting blocks, if any.
    pub fn noncommuting_pair(&self) -> Option<((usize, usize), (usize, usize))> {
        let idx: Vec<(usize, usize)> = (0..self.m).flat_map(|i| (0..self.m).map(move |j| (i, j))).collect();
        for (p, &x) in idx.iter().enumerate() {
            for &y in &idx[p + 1..] {
                if !self.block(x.0, x.1).commutes_with(self.block(y.0, y.1)) {
                    return Some((x, y));
                }
            }
        }
        None
    }
}

/// Whether all blocks pairwise commute, the matrix form of tree-compatibility.
pub fn blocks_commute(mx: &BlockMatrix) -> bool {
    mx.noncommuting_pair().is_none()
}

fn default_labels(prefix: &str, n: usize) -> Vec<Label> {
    (1..=n).map(|i| Label::Sym(format!("{prefix}{i}"))).collect()
}

/// The map of a block matrix over symbol bases `e1..em` and `v1..vn`.
pub fn from_blocks(mx: &BlockMatrix) -> PhiMap {
    from_blocks_with(mx, default_labels("e", mx.m), default_labels("v", mx.n)).expect("default labels fit")
}

pub fn from_blocks_with(mx: &BlockMatrix, edges: Vec<Label>, vertices: Vec<Label>) -> Result<PhiMap> {
    if edges.len() != mx.m || vertices.len() != mx.n {
        return Err(Error::Dimension("label lists do not match the block sizes".into()));
    }
    let mut entries = BTreeMap::new();
    for (j, aj) in edges.iter().enumerate() {
        for (l, bl) in vertices.iter().enumerate() {
            let mut out = LinComb::zero();
            for (i, ai) in edges.iter().enumerate() {
                for (k, bk) in vertices.iter().enumerate() {
                    out.add_term(mx.block(i, j).get(k, l).clone(), (ai.clone(), bk.clone()));
                }
            }
            entries.insert((aj.clone(), bl.clone()), out);
        }
    }
    PhiMap::table(Basis::finite(edges)?, Basis::finite(vertices)?, entries)
}

pub fn to_blocks(phi: &PhiMap) -> Result<BlockMatrix> {
    let (es, vs) = finite_bases(phi)?;
    let (m, n) = (es.len(), vs.len());
    let mut blocks = vec![vec![Matrix::zeros(n, n); m]; m];
    for (j, aj) in es.iter().enumerate() {
        for (l, bl) in vs.iter().enumerate() {
            for ((x, y), c) in phi.apply(aj, bl)? {
                let i = es.iter().position(|e| *e == x).expect("output in edge basis");
                let k = vs.iter().position(|v| *v == y).expect("output in vertex basis");
                blocks[i][j].set(k, l, c);
            }
        }
    }
    BlockMatrix::new(blocks)
}

/// The two families of 2×2 cells of the normal forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JdForm {
    /// `J(a,b) = [[a,b],[0,a]]`.
    J,
    /// `D(a,b) = [[a,0],[0,b]]`.
    D,
}

fn cell(form: JdForm, a: &Scalar, b: &Scalar) -> Matrix {
    let z = Scalar::zero();
    let rows = match form {
        JdForm::J => vec![vec![a.clone(), b.clone()], vec![z.clone(), a.clone()]],
        JdForm::D => vec![vec![a.clone(), z.clone()], vec![z, b.clone()]],
    };
    Matrix::from_rows(rows).expect("2x2 cell")
}

/// Block matrix whose `(i,j)` block is `J(a_ij, b_ij)` or `D(a_ij, b_ij)`.
#[allow(non_snake_case)]
pub fn build_JD(a: &Matrix, b: &Matrix, form: JdForm) -> Result<BlockMatrix> {
    if !a.is_square() || a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::Dimension("J/D parameters must be square of equal size".into()));
    }
    let m = a.rows();
    BlockMatrix::new(
        (0..m)
            .map(|i| (0..m).map(|j| cell(form, a.get(i, j), b.get(i, j))).collect())
            .collect(),
    )
}

/// Outcome of [`classify_m2`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum M2Class {
    /// After the vertex basis change `P`, block `(i,j)` equals the cell
    /// `form(a_ij, b_ij)`, i.e. `P⁻¹ A_ij P = cell`.
    AlreadyJD { form: JdForm, a: Matrix, b: Matrix, basis_change: Matrix },
    /// Two blocks that do not commute.
    NotCompatible { first: (usize, usize), second: (usize, usize) },
    /// The blocks need eigenvalues outside the rationals.
    NeedsAlgebraicExtension,
}

fn rational_sqrt(x: &Scalar) -> Option<Scalar> {
    if x.is_negative() {
        return None;
    }
    let (p, q) = (x.numer(), x.denom());
    let (sp, sq) = (p.sqrt(), q.sqrt());
    (&sp * &sp == *p && &sq * &sq == *q).then(|| Scalar::new(sp, sq))
}

fn column_matrix(v1: &[Scalar], v2: &[Scalar]) -> Matrix {
    Matrix::from_rows(vec![vec![v1[0].clone(), v2[0].clone()], vec![v1[1].clone(), v2[1].clone()]])
        .expect("2x2")
}

/// A nonzero vector in the kernel of a rank-one 2×2 matrix.
fn kernel_vector(nm: &Matrix) -> Vec<Scalar> {
    let row = if nm.row(0).iter().any(|x| !x.is_zero()) { 0 } else { 1 };
    vec![-nm.get(row, 1).clone(), nm.get(row, 0).clone()]
}

/// Puts a tree-compatible map with 2-dimensional vertex space into one of the
/// J/D forms by a rational change of vertex basis, when one exists over the
/// rationals.
pub fn classify_m2(mx: &BlockMatrix) -> Result<M2Class> {
    if mx.n != 2 {
        return Err(Error::Dimension(format!("vertex dimension must be 2, got {}", mx.n)));
    }
    if let Some((first, second)) = mx.noncommuting_pair() {
        return Ok(M2Class::NotCompatible { first, second });
    }
    let m = mx.m;
    let Some(pivot) = mx.blocks.iter().find(|b| !b.is_scalar()) else {
        let a = Matrix::from_rows(
            (0..m).map(|i| (0..m).map(|j| mx.block(i, j).get(0, 0).clone()).collect()).collect(),
        )?;
        return Ok(M2Class::AlreadyJD { form: JdForm::J, a, b: Matrix::zeros(m, m), basis_change: Matrix::identity(2) });
    };
    let (g00, g01, g10, g11) = (pivot.get(0, 0), pivot.get(0, 1), pivot.get(1, 0), pivot.get(1, 1));
    let (form, p) = if g01.is_zero() && g10.is_zero() {
        (JdForm::D, Matrix::identity(2))
    } else if g10.is_zero() && g00 == g11 {
        (JdForm::J, Matrix::identity(2))
    } else {
        let tr = g00 + g11;
        let det = pivot.det()?;
        let disc = &tr * &tr - int(4) * det;
        let half = int(2).recip();
        if disc.is_zero() {
            let r = &tr * &half;
            let nm = pivot.sub(&Matrix::scalar(2, r));
            let e1 = vec![Scalar::one(), Scalar::zero()];
            let e2 = vec![Scalar::zero(), Scalar::one()];
            let v2 = if nm.apply(&e1).iter().any(|x| !x.is_zero()) { e1 } else { e2 };
            let v1 = nm.apply(&v2);
            (JdForm::J, column_matrix(&v1, &v2))
        } else {
            let Some(s) = rational_sqrt(&disc) else {
                return Ok(M2Class::NeedsAlgebraicExtension);
            };
            let r1 = (&tr + &s) * &half;
            let r2 = (&tr - &s) * &half;
            let v1 = kernel_vector(&pivot.sub(&Matrix::scalar(2, r1)));
            let v2 = kernel_vector(&pivot.sub(&Matrix::scalar(2, r2)));
            (JdForm::D, column_matrix(&v1, &v2))
        }
    };
    let pinv = p.inverse().expect("eigenbasis is invertible");
    let mut a = Matrix::zeros(m, m);
    let mut b = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let c = &(&pinv * mx.block(i, j)) * &p;
            let (x, y) = match form {
                JdForm::J => (c.get(0, 0).clone(), c.get(0, 1).clone()),
                JdForm::D => (c.get(0, 0).clone(), c.get(1, 1).clone()),
            };
            debug_assert_eq!(cell(form, &x, &y), c, "commuting blocks share the pivot's normal form");
            a.set(i, j, x);
            b.set(i, j, y);
        }
    }
    Ok(M2Class::AlreadyJD { form, a, b, basis_change: p })
}
