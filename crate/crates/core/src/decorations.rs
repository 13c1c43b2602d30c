//! Decoration labels and bases for edges and vertices, with multi-index combinatorics.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lincomb::Scalar;

/// An element of N^{d+1}, written `<a0,...,ad>`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(len: usize) -> Self {
        MultiIndex(vec![0; len])
    }

    /// The unit vector ε^(j) of the given length.
    pub fn unit(len: usize, j: usize) -> Self {
        let mut v = vec![0; len];
        v[j] = 1;
        MultiIndex(v)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn same_len(&self, other: &Self) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch(self.len(), other.len()))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_len(other)?;
        Ok(MultiIndex(self.0.iter().zip(&other.0).map(|(x, y)| x + y).collect()))
    }

    /// All `l` with `l ≤ self`, in lexicographic order.
    pub fn below(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex(Vec::with_capacity(self.len()))];
        for &top in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=top).map(move |x| {
                        let mut v = prefix.0.clone();
                        v.push(x);
                        MultiIndex(v)
                    })
                })
                .collect();
        }
        out
    }

    /// All multi-indices of length `len` with entries at most `bound`.
    pub fn all_up_to(len: usize, bound: u32) -> Vec<MultiIndex> {
        MultiIndex(vec![bound; len]).below()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(">")
    }
}

/// Entrywise order.
pub fn mi_leq(a: &MultiIndex, b: &MultiIndex) -> Result<bool> {
    a.same_len(b)?;
    Ok(a.0.iter().zip(&b.0).all(|(x, y)| x <= y))
}

pub fn mi_min(a: &MultiIndex, b: &MultiIndex) -> Result<MultiIndex> {
    a.same_len(b)?;
    Ok(MultiIndex(a.0.iter().zip(&b.0).map(|(x, y)| *x.min(y)).collect()))
}

/// Product of entrywise binomial coefficients `binom(b_i, l_i)`.
pub fn mi_binom(b: &MultiIndex, l: &MultiIndex) -> Result<Scalar> {
    if !mi_leq(l, b)? {
        return Err(Error::BinomialDomain { upper: b.to_string(), lower: l.to_string() });
    }
    let mut acc = BigInt::one();
    for (&n, &k) in b.0.iter().zip(&l.0) {
        acc *= num_integer::binomial(BigInt::from(n), BigInt::from(k));
    }
    Ok(Scalar::from_integer(acc))
}

/// `c - l`, or `None` when some entry would go negative.
///
/// `None` stands for the zero vector of the decoration space, which is not the
/// same thing as the zero multi-index.
pub fn mi_sub(c: &MultiIndex, l: &MultiIndex) -> Result<Option<MultiIndex>> {
    c.same_len(l)?;
    if c.0.iter().zip(&l.0).any(|(x, y)| x < y) {
        return Ok(None);
    }
    Ok(Some(MultiIndex(c.0.iter().zip(&l.0).map(|(x, y)| x - y).collect())))
}

/// `∏ λ_i^{l_i}` with `0^0 = 1`.
pub fn lambda_pow(lambda: &[Scalar], l: &MultiIndex) -> Result<Scalar> {
    if lambda.len() != l.len() {
        return Err(Error::LengthMismatch(lambda.len(), l.len()));
    }
    let mut acc = Scalar::one();
    for (x, &k) in lambda.iter().zip(&l.0) {
        if k == 0 {
            continue;
        }
        if x.is_zero() {
            return Ok(Scalar::zero());
        }
        acc *= num_traits::pow(x.clone(), k as usize);
    }
    Ok(acc)
}

pub fn mi_abs(a: &MultiIndex) -> u64 {
    a.0.iter().map(|&x| x as u64).sum()
}

/// A basis element of an edge or vertex decoration space.
///
/// Variant order fixes the total order: symbols, then multi-indices, then the
/// noise symbols `Xi` and `*`, then product labels.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Label {
    Sym(String),
    Mi(MultiIndex),
    /// Noise edge symbol.
    Xi,
    /// Dead vertex symbol.
    Star,
    /// Basis element of a tensor product of decoration spaces.
    Pair(Box<Label>, Box<Label>),
}

impl Label {
    pub fn sym(name: &str) -> Self {
        Label::Sym(name.to_string())
    }

    pub fn mi(entries: &[u32]) -> Self {
        Label::Mi(MultiIndex::new(entries.to_vec()))
    }

    pub fn pair(a: Label, b: Label) -> Self {
        Label::Pair(Box::new(a), Box::new(b))
    }

    pub fn as_mi(&self) -> Option<&MultiIndex> {
        match self {
            Label::Mi(m) => Some(m),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Sym(s) => f.write_str(s),
            Label::Mi(m) => write!(f, "{m}"),
            Label::Xi => f.write_str("Xi"),
            Label::Star => f.write_str("*"),
            Label::Pair(a, b) => write!(f, "{{{a},{b}}}"),
        }
    }
}

/// A basis of a decoration space.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Basis {
    /// Finitely many labels, in the order given.
    Finite(Vec<Label>),
    /// All of N^{d+1}.
    MultiIndices { d: usize },
    /// Disjoint union, used for direct sums.
    Sum(Box<Basis>, Box<Basis>),
    /// Pair labels, used for tensor products.
    Product(Box<Basis>, Box<Basis>),
}

impl Basis {
    pub fn finite(labels: Vec<Label>) -> Result<Self> {
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::BasisMismatch(format!("label {l} listed twice")));
            }
        }
        Ok(Basis::Finite(labels))
    }

    pub fn symbols(names: &[&str]) -> Self {
        Basis::Finite(names.iter().map(|n| Label::sym(n)).collect())
    }

    pub fn multi_indices(d: usize) -> Self {
        Basis::MultiIndices { d }
    }

    /// N^{d+1} together with one noise label (`Xi` for edges, `*` for vertices).
    pub fn multi_indices_with(d: usize, noise: Label) -> Self {
        Basis::Sum(Box::new(Basis::MultiIndices { d }), Box::new(Basis::Finite(vec![noise])))
    }

    pub fn sum(a: Basis, b: Basis) -> Result<Self> {
        if a.overlaps(&b) {
            return Err(Error::OverlappingBases);
        }
        Ok(Basis::Sum(Box::new(a), Box::new(b)))
    }

    pub fn product(a: Basis, b: Basis) -> Self {
        Basis::Product(Box::new(a), Box::new(b))
    }

    pub fn contains(&self, l: &Label) -> bool {
        match self {
            Basis::Finite(ls) => ls.contains(l),
            Basis::MultiIndices { d } => matches!(l, Label::Mi(m) if m.len() == d + 1),
            Basis::Sum(a, b) => a.contains(l) || b.contains(l),
            Basis::Product(a, b) => match l {
                Label::Pair(x, y) => a.contains(x) && b.contains(y),
                _ => false,
            },
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Basis::Finite(_) => true,
            Basis::MultiIndices { .. } => false,
            Basis::Sum(a, b) | Basis::Product(a, b) => a.is_finite() && b.is_finite(),
        }
    }

    /// The basis in its fixed order, when finite.
    pub fn elements(&self) -> Option<Vec<Label>> {
        self.is_finite().then(|| self.sample(0))
    }

    pub fn dim(&self) -> Option<usize> {
        self.elements().map(|e| e.len())
    }

    /// Every finite part of the basis, plus the multi-indices with entries at most `bound`.
    pub fn sample(&self, bound: u32) -> Vec<Label> {
        match self {
            Basis::Finite(ls) => ls.clone(),
            Basis::MultiIndices { d } => {
                MultiIndex::all_up_to(d + 1, bound).into_iter().map(Label::Mi).collect()
            }
            Basis::Sum(a, b) => {
                let mut out = a.sample(bound);
                out.extend(b.sample(bound));
                out
            }
            Basis::Product(a, b) => {
                let right = b.sample(bound);
                a.sample(bound)
                    .into_iter()
                    .flat_map(|x| right.iter().map(move |y| Label::pair(x.clone(), y.clone())))
                    .collect()
            }
        }
    }

    /// Conservative overlap test: two infinite bases are assumed to overlap.
    pub fn overlaps(&self, other: &Basis) -> bool {
        match (self.elements(), other.elements()) {
            (Some(xs), _) => xs.iter().any(|x| other.contains(x)),
            (None, Some(ys)) => ys.iter().any(|y| self.contains(y)),
            (None, None) => true,
        }
    }

    /// Length of the multi-indices in this basis, if it has any.
    pub fn mi_len(&self) -> Option<usize> {
        match self {
            Basis::MultiIndices { d } => Some(d + 1),
            Basis::Sum(a, b) => a.mi_len().or_else(|| b.mi_len()),
            _ => None,
        }
    }

    pub fn check(&self, l: &Label, role: &'static str) -> Result<()> {
        if self.contains(l) {
            Ok(())
        } else {
            Err(Error::LabelOutsideBasis { label: l.to_string(), role })
        }
    }
}
