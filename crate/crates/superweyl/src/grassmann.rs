//! Exterior algebra over named odd generators.
//!
//! Monomials are bitmasks; a monomial is the product of its generators in
//! ascending index order. Every sign in the crate comes from that convention.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

use crate::scalar::{Coeff, Laurent};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrassmannError {
    #[error("operands live over different generator sets")]
    MismatchedSets,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),
    #[error("{0} generators requested; at most 64 are supported")]
    TooManyGenerators(usize),
    #[error("image of generator {0} is not a homogeneous degree-1 element")]
    NotDegreeOne(usize),
    #[error("expected {expected} substitution images, got {got}")]
    WrongImageCount { expected: usize, got: usize },
    #[error("exponential needs an even element without degree-0 part")]
    NotNilpotentEven,
    #[error("matrix is not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("matrix is not square")]
    NotSquare,
}

/// Ordered list of odd generator names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    names: Vec<String>,
}

impl GeneratorSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Arc<GeneratorSet>, GrassmannError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > 64 {
            return Err(GrassmannError::TooManyGenerators(names.len()));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(GrassmannError::DuplicateGenerator(n.clone()));
            }
        }
        Ok(Arc::new(GeneratorSet { names }))
    }

    /// Generators `prefix1 .. prefixk`.
    pub fn numbered(prefix: &str, k: usize) -> Arc<GeneratorSet> {
        GeneratorSet::new((1..=k).map(|i| format!("{prefix}{i}"))).expect("numbered names are distinct")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, GrassmannError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| GrassmannError::UnknownGenerator(name.to_string()))
    }
}

/// Homogeneous parity of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_mask(mask: u64) -> Parity {
        if mask.count_ones().is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn from_bit(b: u32) -> Parity {
        if b.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Sign of e_a · e_b = ±e_{a∪b} for disjoint masks.
#[inline]
pub fn product_sign(a: u64, b: u64) -> bool {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> j >> 1).count_ones();
        rest &= rest - 1;
    }
    inversions % 2 == 1
}

/// Element of the exterior algebra: mask → nonzero Laurent coefficient.
#[derive(Clone, PartialEq)]
pub struct Multivector<C: Coeff> {
    set: Arc<GeneratorSet>,
    terms: BTreeMap<u64, Laurent<C>>,
}

impl<C: Coeff> Multivector<C> {
    pub fn zero(set: &Arc<GeneratorSet>) -> Self {
        Multivector {
            set: set.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(set: &Arc<GeneratorSet>, s: Laurent<C>) -> Self {
        Self::monomial(set, 0, s)
    }

    pub fn one(set: &Arc<GeneratorSet>) -> Self {
        Self::scalar(set, Laurent::one())
    }

    pub fn monomial(set: &Arc<GeneratorSet>, mask: u64, s: Laurent<C>) -> Self {
        let mut m = Self::zero(set);
        if !s.is_zero() {
            m.terms.insert(mask, s);
        }
        m
    }

    /// The generator with index `i`.
    pub fn generator(set: &Arc<GeneratorSet>, i: usize) -> Self {
        assert!(i < set.len(), "generator index out of range");
        Self::monomial(set, 1 << i, Laurent::one())
    }

    pub fn generator_named(set: &Arc<GeneratorSet>, name: &str) -> Result<Self, GrassmannError> {
        Ok(Self::generator(set, set.index_of(name)?))
    }

    /// Product of the generators `idx` in the listed order.
    pub fn product_of_generators(set: &Arc<GeneratorSet>, idx: &[usize]) -> Self {
        idx.iter()
            .fold(Self::one(set), |acc, &i| &acc * &Self::generator(set, i))
    }

    pub fn from_terms(set: &Arc<GeneratorSet>, terms: impl IntoIterator<Item = (u64, Laurent<C>)>) -> Self {
        let mut m = Self::zero(set);
        for (mask, s) in terms {
            m.add_term(mask, &s);
        }
        m
    }

    pub fn set(&self) -> &Arc<GeneratorSet> {
        &self.set
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<u64, Laurent<C>> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<u64, Laurent<C>> {
        self.terms
    }

    pub fn coeff(&self, mask: u64) -> Laurent<C> {
        self.terms.get(&mask).cloned().unwrap_or_else(Laurent::zero)
    }

    pub fn scalar_part(&self) -> Laurent<C> {
        self.coeff(0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn same_set(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.set, &other.set) || self.set == other.set
    }

    /// Adds `s·e_mask` in place.
    pub fn add_term(&mut self, mask: u64, s: &Laurent<C>) {
        if s.is_zero() {
            return;
        }
        match self.terms.get_mut(&mask) {
            Some(c) => {
                *c += s;
                if c.is_zero() {
                    self.terms.remove(&mask);
                }
            }
            None => {
                self.terms.insert(mask, s.clone());
            }
        }
    }

    fn sub_term(&mut self, mask: u64, s: &Laurent<C>) {
        self.add_term(mask, &-s);
    }

    pub fn scale(&self, s: &Laurent<C>) -> Self {
        let mut out = Self::zero(&self.set);
        if s.is_zero() {
            return out;
        }
        for (m, c) in &self.terms {
            let v = c * s;
            if !v.is_zero() {
                out.terms.insert(*m, v);
            }
        }
        out
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, GrassmannError> {
        if !self.same_set(other) {
            return Err(GrassmannError::MismatchedSets);
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, GrassmannError> {
        if !self.same_set(other) {
            return Err(GrassmannError::MismatchedSets);
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.sub_term(*m, c);
        }
        Ok(out)
    }

    /// Exterior product.
    pub fn try_mul(&self, other: &Self) -> Result<Self, GrassmannError> {
        if !self.same_set(other) {
            return Err(GrassmannError::MismatchedSets);
        }
        let mut out = Self::zero(&self.set);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                let v = ca * cb;
                if product_sign(*a, *b) {
                    out.sub_term(a | b, &v);
                } else {
                    out.add_term(a | b, &v);
                }
            }
        }
        Ok(out)
    }

    /// Homogeneous parity, or `None` for zero and mixed elements.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| Parity::of_mask(*m));
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// (even part, odd part).
    pub fn split_parity(&self) -> (Self, Self) {
        let mut even = Self::zero(&self.set);
        let mut odd = Self::zero(&self.set);
        for (m, c) in &self.terms {
            let target = if m.count_ones() % 2 == 0 { &mut even } else { &mut odd };
            target.terms.insert(*m, c.clone());
        }
        (even, odd)
    }

    /// Keeps only terms whose mask satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(u64) -> bool) -> Self {
        Multivector {
            set: self.set.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(**m))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// ∂/∂g acting from the left.
    pub fn left_derivative(&self, g: usize) -> Self {
        assert!(g < self.set.len(), "generator index out of range");
        let bit = 1u64 << g;
        let below = bit - 1;
        let mut out = Self::zero(&self.set);
        for (m, c) in &self.terms {
            if m & bit == 0 {
                continue;
            }
            let rest = m & !bit;
            if (m & below).count_ones() % 2 == 1 {
                out.terms.insert(rest, -c);
            } else {
                out.terms.insert(rest, c.clone());
            }
        }
        out
    }

    pub fn left_derivative_named(&self, name: &str) -> Result<Self, GrassmannError> {
        Ok(self.left_derivative(self.set.index_of(name)?))
    }

    /// ∂/∂g acting from the right: move g to the end, then delete it.
    pub fn right_derivative(&self, g: usize) -> Self {
        assert!(g < self.set.len(), "generator index out of range");
        let bit = 1u64 << g;
        let mut out = Self::zero(&self.set);
        for (m, c) in &self.terms {
            if m & bit == 0 {
                continue;
            }
            let rest = m & !bit;
            if (m >> g >> 1).count_ones() % 2 == 1 {
                out.terms.insert(rest, -c);
            } else {
                out.terms.insert(rest, c.clone());
            }
        }
        out
    }

    /// Berezin integral over `gens = (g_1, …, g_k)`, normalized by
    /// ∫D(g) g_k⋯g_1 = 1: the derivative of the last listed generator acts first.
    pub fn berezin(&self, gens: &[usize]) -> Self {
        gens.iter().rev().fold(self.clone(), |acc, &g| acc.left_derivative(g))
    }

    pub fn berezin_named(&self, gens: &[&str]) -> Result<Self, GrassmannError> {
        let idx = gens
            .iter()
            .map(|g| self.set.index_of(g))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.berezin(&idx))
    }

    /// Homomorphism sending source generator i to `images[i]`, a degree-1 element of `target`.
    pub fn substitute_linear(
        &self,
        images: &[Multivector<C>],
        target: &Arc<GeneratorSet>,
    ) -> Result<Self, GrassmannError> {
        if images.len() != self.set.len() {
            return Err(GrassmannError::WrongImageCount {
                expected: self.set.len(),
                got: images.len(),
            });
        }
        let mut linear: Vec<Vec<(usize, Laurent<C>)>> = Vec::with_capacity(images.len());
        for (i, img) in images.iter().enumerate() {
            if !(Arc::ptr_eq(img.set(), target) || **img.set() == **target) {
                return Err(GrassmannError::MismatchedSets);
            }
            if img.terms.keys().any(|m| m.count_ones() != 1) {
                return Err(GrassmannError::NotDegreeOne(i));
            }
            linear.push(
                img.terms
                    .iter()
                    .map(|(m, c)| (m.trailing_zeros() as usize, c.clone()))
                    .collect(),
            );
        }
        let mut out = Self::zero(target);
        let mut cache: BTreeMap<u64, BTreeMap<u64, Laurent<C>>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let expanded = cache.entry(*m).or_insert_with(|| expand_monomial(*m, &linear));
            for (tm, tc) in expanded.iter() {
                out.add_term(*tm, &(tc * c));
            }
        }
        Ok(out)
    }

    /// Σ a^k/k! for an even element without constant term.
    pub fn exp_even_nilpotent(&self) -> Result<Self, GrassmannError> {
        if self.terms.keys().any(|m| *m == 0 || m.count_ones() % 2 == 1) {
            return Err(GrassmannError::NotNilpotentEven);
        }
        let mut out = Self::one(&self.set);
        let mut power = Self::one(&self.set);
        let mut k = 1i64;
        loop {
            power = &power * self;
            if power.is_zero() {
                break;
            }
            power = power.scale(&Laurent::from_ratio(1, k));
            out = &out + &power;
            k += 1;
        }
        Ok(out)
    }

    /// Coefficient of the ascending product of all generators in `mask`.
    pub fn top_coefficient(&self, mask: u64) -> Laurent<C> {
        self.coeff(mask)
    }

    /// Re-expresses the element over `target` sending generator i to target index `map[i]`.
    pub fn reindex(&self, target: &Arc<GeneratorSet>, map: &[usize]) -> Self {
        let images: Vec<_> = map.iter().map(|&j| Multivector::generator(target, j)).collect();
        self.substitute_linear(&images, target)
            .expect("generator images are degree one")
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&Laurent<C>) -> Laurent<D>) -> Multivector<D> {
        let mut out = Multivector::zero(&self.set);
        for (m, c) in &self.terms {
            out.add_term(*m, &f(c));
        }
        out
    }

    /// Equality up to `tol` on every coefficient (exact rings compare exactly).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if C::EXACT {
            return self == other;
        }
        let diff = self - other;
        let scale = self
            .terms
            .values()
            .chain(other.terms.values())
            .map(Laurent::max_abs)
            .fold(1.0, f64::max);
        diff.terms.values().all(|c| c.max_abs() <= tol * scale)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(Laurent::max_abs).fold(0.0, f64::max)
    }
}

fn expand_monomial<C: Coeff>(m: u64, linear: &[Vec<(usize, Laurent<C>)>]) -> BTreeMap<u64, Laurent<C>> {
    let mut acc: BTreeMap<u64, Laurent<C>> = BTreeMap::new();
    acc.insert(0, Laurent::one());
    let mut rest = m;
    while rest != 0 {
        let g = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let mut next: BTreeMap<u64, Laurent<C>> = BTreeMap::new();
        for (mask, c) in &acc {
            for (j, cj) in &linear[g] {
                let bit = 1u64 << j;
                if mask & bit != 0 {
                    continue;
                }
                let mut v = c * cj;
                if (mask >> j >> 1).count_ones() % 2 == 1 {
                    v = -v;
                }
                let slot = next.entry(mask | bit).or_insert_with(Laurent::zero);
                *slot += &v;
            }
        }
        next.retain(|_, c| !c.is_zero());
        acc = next;
    }
    acc
}

impl<C: Coeff> fmt::Debug for Multivector<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<C: Coeff> fmt::Display for Multivector<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            if *m != 0 {
                write!(f, " *")?;
                let mut rest = *m;
                while rest != 0 {
                    let g = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    write!(f, " {}", self.set.name(g))?;
                }
            }
        }
        Ok(())
    }
}

// Operator forms panic on mismatched generator sets; use the `try_` methods to handle that case.
impl<'a, C: Coeff> Mul<&'a Multivector<C>> for &'a Multivector<C> {
    type Output = Multivector<C>;
    fn mul(self, o: &Multivector<C>) -> Multivector<C> {
        self.try_mul(o).expect("mismatched generator sets")
    }
}

impl<'a, C: Coeff> Add<&'a Multivector<C>> for &'a Multivector<C> {
    type Output = Multivector<C>;
    fn add(self, o: &Multivector<C>) -> Multivector<C> {
        self.try_add(o).expect("mismatched generator sets")
    }
}

impl<'a, C: Coeff> Sub<&'a Multivector<C>> for &'a Multivector<C> {
    type Output = Multivector<C>;
    fn sub(self, o: &Multivector<C>) -> Multivector<C> {
        self.try_sub(o).expect("mismatched generator sets")
    }
}

impl<C: Coeff> Neg for &Multivector<C> {
    type Output = Multivector<C>;
    fn neg(self) -> Multivector<C> {
        self.scale(&-Laurent::<C>::one())
    }
}

/// ∫Dθ e^{−½ Q^{ab} θ_a θ_b} over the generators `theta` of the entries' common set.
///
/// Entries must be even; they may contain generators outside `theta`, which
/// pass through (the Pfaffian of a matrix of commuting even forms).
pub fn gaussian_berezin<C: Coeff>(
    q: &[Vec<Multivector<C>>],
    theta: &[usize],
    set: &Arc<GeneratorSet>,
) -> Result<Multivector<C>, GrassmannError> {
    let k = theta.len();
    if q.len() != k || q.iter().any(|row| row.len() != k) {
        return Err(GrassmannError::NotSquare);
    }
    let half = Laurent::<C>::from_ratio(-1, 2);
    let mut a = Multivector::zero(set);
    for (i, row) in q.iter().enumerate() {
        for (j, qij) in row.iter().enumerate() {
            if qij.is_zero() || i == j {
                continue;
            }
            let pair = &Multivector::generator(set, theta[i]) * &Multivector::generator(set, theta[j]);
            a = &a + &(&qij.scale(&half) * &pair);
        }
    }
    Ok(a.exp_even_nilpotent()?.berezin(theta))
}

/// Pfaffian as the Gaussian Berezin integral ∫Dθ e^{−½ Q^{ab}θ_aθ_b}; 0 for odd size.
pub fn pfaffian<C: Coeff>(q: &[Vec<Laurent<C>>]) -> Result<Laurent<C>, GrassmannError> {
    let k = q.len();
    if q.iter().any(|row| row.len() != k) {
        return Err(GrassmannError::NotSquare);
    }
    let scale = q.iter().flatten().map(Laurent::max_abs).fold(0.0, f64::max);
    for i in 0..k {
        for j in 0..=i {
            let sum = &q[i][j] + &q[j][i];
            let bad = if C::EXACT {
                !sum.is_zero()
            } else {
                sum.max_abs() > 1e-12 * scale.max(f64::MIN_POSITIVE)
            };
            if bad {
                return Err(GrassmannError::NotAntisymmetric(i, j));
            }
        }
    }
    let set = GeneratorSet::numbered("theta", k);
    let qm: Vec<Vec<Multivector<C>>> = q
        .iter()
        .map(|row| row.iter().map(|s| Multivector::scalar(&set, s.clone())).collect())
        .collect();
    let theta: Vec<usize> = (0..k).collect();
    Ok(gaussian_berezin(&qm, &theta, &set)?.scalar_part())
}
