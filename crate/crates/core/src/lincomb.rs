//! Exact rational scalars and finite formal linear combinations.

use std::collections::btree_map::{self, BTreeMap};
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Coefficient field: arbitrary-precision rationals, always reduced.
pub type Scalar = BigRational;

/// Integer scalar.
pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

/// The scalar `p/q`. Panics if `q == 0`.
pub fn frac(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_scalar(s: &str) -> Option<Scalar> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Scalar::new(num, den))
}

/// A finite linear combination over an ordered term type, with no zero coefficients.
///
/// Equality is structural: two combinations are equal iff they carry the same
/// term/coefficient pairs.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinComb<T: Ord> {
    terms: BTreeMap<T, Scalar>,
}

impl<T: Ord> Default for LinComb<T> {
    fn default() -> Self {
        LinComb { terms: BTreeMap::new() }
    }
}

impl<T: Ord + Clone> LinComb<T> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `1·t`.
    pub fn basis(t: T) -> Self {
        Self::term(Scalar::one(), t)
    }

    /// `c·t`.
    pub fn term(c: Scalar, t: T) -> Self {
        let mut out = Self::zero();
        out.add_term(c, t);
        out
    }

    pub fn from_terms<I: IntoIterator<Item = (Scalar, T)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (c, t) in terms {
            out.add_term(c, t);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of terms with nonzero coefficient.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, t: &T) -> Scalar {
        self.terms.get(t).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Terms in canonical order.
    pub fn iter(&self) -> btree_map::Iter<'_, T, Scalar> {
        self.terms.iter()
    }

    pub fn terms(&self) -> impl Iterator<Item = &T> {
        self.terms.keys()
    }

    pub fn add_term(&mut self, c: Scalar, t: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(t) {
            btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += c·other`.
    pub fn add_scaled(&mut self, c: &Scalar, other: &Self) {
        if c.is_zero() {
            return;
        }
        for (t, k) in other.iter() {
            self.add_term(c * k, t.clone());
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LinComb {
            terms: self.terms.iter().map(|(t, k)| (t.clone(), k * c)).collect(),
        }
    }

    /// Linear extension of `f`.
    pub fn map<U: Ord + Clone, F>(&self, mut f: F) -> LinComb<U>
    where
        F: FnMut(&T) -> LinComb<U>,
    {
        let mut out = LinComb::zero();
        for (t, c) in self.iter() {
            out.add_scaled(c, &f(t));
        }
        out
    }

    /// Linear extension of a fallible `f`.
    pub fn try_map<U: Ord + Clone, E, F>(&self, mut f: F) -> Result<LinComb<U>, E>
    where
        F: FnMut(&T) -> Result<LinComb<U>, E>,
    {
        let mut out = LinComb::zero();
        for (t, c) in self.iter() {
            out.add_scaled(c, &f(t)?);
        }
        Ok(out)
    }

    /// Relabels terms through `f`, merging terms that collide.
    pub fn map_terms<U: Ord + Clone, F>(&self, mut f: F) -> LinComb<U>
    where
        F: FnMut(&T) -> U,
    {
        LinComb::from_terms(self.iter().map(|(t, c)| (c.clone(), f(t))))
    }

    /// Bilinear extension of `f` to `self ⊗ other`.
    pub fn bilinear<U, V, F>(&self, other: &LinComb<U>, mut f: F) -> LinComb<V>
    where
        U: Ord + Clone,
        V: Ord + Clone,
        F: FnMut(&T, &U) -> LinComb<V>,
    {
        let mut out = LinComb::zero();
        for (t, c) in self.iter() {
            for (u, k) in other.iter() {
                out.add_scaled(&(c * k), &f(t, u));
            }
        }
        out
    }

    pub fn try_bilinear<U, V, E, F>(&self, other: &LinComb<U>, mut f: F) -> Result<LinComb<V>, E>
    where
        U: Ord + Clone,
        V: Ord + Clone,
        F: FnMut(&T, &U) -> Result<LinComb<V>, E>,
    {
        let mut out = LinComb::zero();
        for (t, c) in self.iter() {
            for (u, k) in other.iter() {
                out.add_scaled(&(c * k), &f(t, u)?);
            }
        }
        Ok(out)
    }

    /// `self ⊗ other` as a combination of pairs.
    pub fn tensor<U: Ord + Clone>(&self, other: &LinComb<U>) -> LinComb<(T, U)> {
        self.bilinear(other, |t, u| LinComb::basis((t.clone(), u.clone())))
    }

    /// Keeps the terms satisfying `keep`.
    pub fn filter<F: FnMut(&T) -> bool>(&self, mut keep: F) -> Self {
        LinComb {
            terms: self
                .terms
                .iter()
                .filter(|(t, _)| keep(t))
                .map(|(t, c)| (t.clone(), c.clone()))
                .collect(),
        }
    }
}

impl<T: Ord> IntoIterator for LinComb<T> {
    type Item = (T, Scalar);
    type IntoIter = btree_map::IntoIter<T, Scalar>;
    fn into_iter(self) -> Self::IntoIter {
        self.terms.into_iter()
    }
}

impl<'a, T: Ord> IntoIterator for &'a LinComb<T> {
    type Item = (&'a T, &'a Scalar);
    type IntoIter = btree_map::Iter<'a, T, Scalar>;
    fn into_iter(self) -> Self::IntoIter {
        self.terms.iter()
    }
}

impl<T: Ord + Clone> FromIterator<(Scalar, T)> for LinComb<T> {
    fn from_iter<I: IntoIterator<Item = (Scalar, T)>>(iter: I) -> Self {
        Self::from_terms(iter)
    }
}

impl<T: Ord + Clone> AddAssign<&LinComb<T>> for LinComb<T> {
    fn add_assign(&mut self, rhs: &LinComb<T>) {
        self.add_scaled(&Scalar::one(), rhs);
    }
}

impl<T: Ord + Clone> AddAssign for LinComb<T> {
    fn add_assign(&mut self, rhs: LinComb<T>) {
        for (t, c) in rhs {
            self.add_term(c, t);
        }
    }
}

impl<T: Ord + Clone> Add for LinComb<T> {
    type Output = LinComb<T>;
    fn add(mut self, rhs: LinComb<T>) -> LinComb<T> {
        self += rhs;
        self
    }
}

impl<T: Ord + Clone> Add for &LinComb<T> {
    type Output = LinComb<T>;
    fn add(self, rhs: &LinComb<T>) -> LinComb<T> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<T: Ord + Clone> Sub for LinComb<T> {
    type Output = LinComb<T>;
    fn sub(mut self, rhs: LinComb<T>) -> LinComb<T> {
        self.add_scaled(&-Scalar::one(), &rhs);
        self
    }
}

impl<T: Ord + Clone> Sub for &LinComb<T> {
    type Output = LinComb<T>;
    fn sub(self, rhs: &LinComb<T>) -> LinComb<T> {
        let mut out = self.clone();
        out.add_scaled(&-Scalar::one(), rhs);
        out
    }
}

impl<T: Ord + Clone> Neg for LinComb<T> {
    type Output = LinComb<T>;
    fn neg(self) -> LinComb<T> {
        self.scale(&-Scalar::one())
    }
}

impl<T: Ord + Clone> Neg for &LinComb<T> {
    type Output = LinComb<T>;
    fn neg(self) -> LinComb<T> {
        self.scale(&-Scalar::one())
    }
}

/// Renders `c1*t1 + c2*t2 - c3*t3`; a unit coefficient is left implicit and
/// the empty combination is `0`.
impl<T: Ord + fmt::Display> fmt::Display for LinComb<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (t, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            match (i, c.is_negative()) {
                (0, false) => {}
                (0, true) => f.write_str("-")?,
                (_, false) => f.write_str(" + ")?,
                (_, true) => f.write_str(" - ")?,
            }
            if mag.is_one() {
                write!(f, "{t}")?;
            } else {
                write!(f, "{mag}*{t}")?;
            }
        }
        Ok(())
    }
}

impl<T: Ord + fmt::Debug> fmt::Debug for LinComb<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.terms.iter().map(|(t, c)| (t, c.to_string())))
            .finish()
    }
}

/// Display wrapper for a basis element `x ⊗ y` of a tensor product; orders like the pair.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Tensor<A, B>(pub A, pub B);

impl<A: fmt::Display, B: fmt::Display> fmt::Display for Tensor<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⊗ {}", self.0, self.1)
    }
}

/// Relabels a combination of pairs for display.
pub fn tensor_view<A: Ord + Clone, B: Ord + Clone>(x: &LinComb<(A, B)>) -> LinComb<Tensor<A, B>> {
    x.map_terms(|(a, b)| Tensor(a.clone(), b.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn like_terms_merge_and_cancel() {
        let mut x = LinComb::term(int(2), "t");
        x.add_term(int(3), "t");
        assert_eq!(x, LinComb::term(int(5), "t"));
        x.add_term(int(-5), "t");
        assert!(x.is_zero());
    }

    #[test]
    fn exact_rational_add() {
        let x = LinComb::from_terms([(frac(1, 2), "t1"), (frac(1, 3), "t2")]);
        let y = LinComb::term(frac(1, 2), "t1");
        assert_eq!(&x + &y, LinComb::from_terms([(int(1), "t1"), (frac(1, 3), "t2")]));
    }

    #[test]
    fn scaling() {
        let x = LinComb::from_terms([(int(1), "t1"), (int(1), "t2")]);
        assert!(x.scale(&int(0)).is_zero());
        assert_eq!(x.scale(&int(1)), x);
        assert_eq!(LinComb::term(int(3), "t").scale(&frac(2, 3)), LinComb::term(int(2), "t"));
    }

    #[test]
    fn map_is_linear_with_cancellation() {
        let x = LinComb::from_terms([(int(1), "t1"), (int(-1), "t2")]);
        let y = x.map(|t| match *t {
            "t1" => LinComb::from_terms([(int(1), "u1"), (int(1), "u2")]),
            _ => LinComb::basis("u2"),
        });
        assert_eq!(y, LinComb::basis("u1"));
        assert!(x.map(|_| LinComb::<&str>::zero()).is_zero());
    }

    #[test]
    fn rendering() {
        let x = LinComb::from_terms([(int(1), "a"), (frac(-1, 2), "b"), (int(3), "c")]);
        assert_eq!(x.to_string(), "a - 1/2*b + 3*c");
        assert_eq!(LinComb::term(int(-1), "a").to_string(), "-a");
        assert_eq!(LinComb::<&str>::zero().to_string(), "0");
    }

    #[test]
    fn scalar_parsing() {
        assert_eq!(parse_scalar("-3/6"), Some(frac(-1, 2)));
        assert_eq!(parse_scalar("7"), Some(int(7)));
        assert_eq!(parse_scalar("1/0"), None);
        assert_eq!(parse_scalar("x"), None);
    }
}
