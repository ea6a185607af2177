use std::collections::BTreeMap;
use std::fmt;

use crate::expr::{EvalError, Expr};
use crate::geometry::Curvature;
use crate::grassmann::{product_sign, Parity};

use super::TStarError;

/// Momentum exponents and odd monomial; odd bit a is ξ^a, bit n + a is θ_a.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub p: Vec<u32>,
    pub odd: u64,
}

/// f(x, p, ξ, θ): polynomial in p and ξ, θ with coefficients in x.
#[derive(Clone, PartialEq)]
pub struct TStarSymbol {
    coords: Vec<String>,
    terms: BTreeMap<Monomial, Expr>,
}

impl TStarSymbol {
    pub fn zero(coords: &[String]) -> TStarSymbol {
        TStarSymbol {
            coords: coords.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(coords: &[String], c: Expr) -> TStarSymbol {
        let mut s = TStarSymbol::zero(coords);
        let p = vec![0; coords.len()];
        s.add_term(Monomial { p, odd: 0 }, c);
        s
    }

    pub fn one(coords: &[String]) -> TStarSymbol {
        TStarSymbol::scalar(coords, Expr::one())
    }

    /// The coordinate function x^a.
    pub fn x(coords: &[String], a: usize) -> TStarSymbol {
        TStarSymbol::scalar(coords, Expr::var(coords[a].clone()))
    }

    pub fn p(coords: &[String], a: usize) -> TStarSymbol {
        let mut p = vec![0; coords.len()];
        p[a] = 1;
        let mut s = TStarSymbol::zero(coords);
        s.add_term(Monomial { p, odd: 0 }, Expr::one());
        s
    }

    pub fn xi(coords: &[String], a: usize) -> TStarSymbol {
        TStarSymbol::odd_generator(coords, a)
    }

    pub fn theta(coords: &[String], a: usize) -> TStarSymbol {
        TStarSymbol::odd_generator(coords, coords.len() + a)
    }

    fn odd_generator(coords: &[String], g: usize) -> TStarSymbol {
        let mut s = TStarSymbol::zero(coords);
        s.add_term(
            Monomial {
                p: vec![0; coords.len()],
                odd: 1 << g,
            },
            Expr::one(),
        );
        s
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Expr> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| Parity::of_mask(m.odd));
        let first = it.next().unwrap_or(Parity::Even);
        it.all(|p| p == first).then_some(first)
    }

    /// (even part, odd part).
    pub fn split_parity(&self) -> (TStarSymbol, TStarSymbol) {
        let keep = |odd: bool| TStarSymbol {
            coords: self.coords.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| (m.odd.count_ones() % 2 == 1) == odd)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        };
        (keep(false), keep(true))
    }

    pub fn add_term(&mut self, m: Monomial, c: Expr) {
        debug_assert_eq!(m.p.len(), self.dim());
        let sum = match self.terms.remove(&m) {
            Some(old) => (old + c).simplify(),
            None => c.simplify(),
        };
        if !sum.is_zero() {
            self.terms.insert(m, sum);
        }
    }

    fn same_chart(&self, other: &TStarSymbol) -> Result<(), TStarError> {
        if self.coords == other.coords {
            Ok(())
        } else {
            Err(TStarError::ChartMismatch)
        }
    }

    pub fn try_add(&self, other: &TStarSymbol) -> Result<TStarSymbol, TStarError> {
        self.same_chart(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &TStarSymbol) -> Result<TStarSymbol, TStarError> {
        self.try_add(&other.scale(&Expr::num(-1.0)))
    }

    pub fn try_mul(&self, other: &TStarSymbol) -> Result<TStarSymbol, TStarError> {
        self.same_chart(other)?;
        let mut out = TStarSymbol::zero(&self.coords);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if m1.odd & m2.odd != 0 {
                    continue;
                }
                let p = m1.p.iter().zip(&m2.p).map(|(a, b)| a + b).collect();
                let c = c1 * c2;
                let c = if product_sign(m1.odd, m2.odd) { -c } else { c };
                out.add_term(
                    Monomial {
                        p,
                        odd: m1.odd | m2.odd,
                    },
                    c,
                );
            }
        }
        Ok(out)
    }

    /// Multiplication by a function of x.
    pub fn scale(&self, f: &Expr) -> TStarSymbol {
        let mut out = TStarSymbol::zero(&self.coords);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f * c);
        }
        out
    }

    fn map_terms(&self, f: impl Fn(&Monomial, &Expr) -> Option<(Monomial, Expr)>) -> TStarSymbol {
        let mut out = TStarSymbol::zero(&self.coords);
        for (m, c) in &self.terms {
            if let Some((m, c)) = f(m, c) {
                out.add_term(m, c);
            }
        }
        out
    }

    /// ∂/∂x^a.
    pub fn d_x(&self, a: usize) -> TStarSymbol {
        let var = self.coords[a].clone();
        self.map_terms(|m, c| Some((m.clone(), c.differentiate(&var))))
    }

    /// ∂/∂p_a.
    pub fn d_p(&self, a: usize) -> TStarSymbol {
        self.map_terms(|m, c| {
            let k = m.p[a];
            if k == 0 {
                return None;
            }
            let mut p = m.p.clone();
            p[a] -= 1;
            Some((Monomial { p, odd: m.odd }, &Expr::num(k as f64) * c))
        })
    }

    /// Left derivative in odd generator g.
    pub fn left_d(&self, g: usize) -> TStarSymbol {
        let bit = 1u64 << g;
        self.map_terms(|m, c| {
            if m.odd & bit == 0 {
                return None;
            }
            let neg = (m.odd & (bit - 1)).count_ones() % 2 == 1;
            Some((
                Monomial {
                    p: m.p.clone(),
                    odd: m.odd & !bit,
                },
                if neg { -c } else { c.clone() },
            ))
        })
    }

    /// Right derivative in odd generator g.
    pub fn right_d(&self, g: usize) -> TStarSymbol {
        let bit = 1u64 << g;
        self.map_terms(|m, c| {
            if m.odd & bit == 0 {
                return None;
            }
            let neg = (m.odd >> g >> 1).count_ones() % 2 == 1;
            Some((
                Monomial {
                    p: m.p.clone(),
                    odd: m.odd & !bit,
                },
                if neg { -c } else { c.clone() },
            ))
        })
    }

    /// Numeric coefficients at x.
    pub fn eval_at(&self, x: &[f64]) -> Result<BTreeMap<Monomial, f64>, EvalError> {
        let bind: Vec<(&str, f64)> = self.coords.iter().map(|c| c.as_str()).zip(x.iter().copied()).collect();
        self.terms
            .iter()
            .map(|(m, c)| Ok((m.clone(), c.eval_at(&bind)?)))
            .collect()
    }

    /// Largest |coefficient| at x.
    pub fn max_abs_at(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(self.eval_at(x)?.values().fold(0.0, |m, v| m.max(v.abs())))
    }
}

impl fmt::Debug for TStarSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TStarSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.dim();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (a, k) in m.p.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, " p{}", a + 1)?,
                    _ => write!(f, " p{}^{k}", a + 1)?,
                }
            }
            for g in 0..2 * n {
                if m.odd >> g & 1 == 1 {
                    if g < n {
                        write!(f, " xi{}", g + 1)?;
                    } else {
                        write!(f, " theta{}", g - n + 1)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Canonical bracket with {p_a, x^b} = δ and {θ_a, ξ^b} = δ.
pub fn canonical_bracket(f: &TStarSymbol, g: &TStarSymbol) -> Result<TStarSymbol, TStarError> {
    f.same_chart(g)?;
    let n = f.dim();
    let mut out = TStarSymbol::zero(f.coords());
    for a in 0..n {
        out = out.try_add(&f.d_p(a).try_mul(&g.d_x(a))?)?;
        out = out.try_sub(&f.d_x(a).try_mul(&g.d_p(a))?)?;
        out = out.try_add(&f.right_d(n + a).try_mul(&g.left_d(a))?)?;
        out = out.try_add(&f.right_d(a).try_mul(&g.left_d(n + a))?)?;
    }
    Ok(out)
}

/// The odd derivation d in the coordinates (x, p, ξ = dx, θ = ∇p).
#[derive(Debug, Clone, Copy)]
pub struct CartanD<'a> {
    curv: &'a Curvature,
}

impl<'a> CartanD<'a> {
    pub fn new(curv: &'a Curvature) -> CartanD<'a> {
        CartanD { curv }
    }

    fn coords(&self) -> &'a [String] {
        &self.curv.chart().coordinates
    }

    /// dp_a = Γ^c_ba ξ^b p_c + θ_a.
    pub fn d_p(&self, a: usize) -> TStarSymbol {
        let cs = self.coords();
        let mut out = TStarSymbol::theta(cs, a);
        for b in 0..cs.len() {
            for c in 0..cs.len() {
                let g = self.curv.gamma(c, b, a);
                if !g.is_zero() {
                    let t = TStarSymbol::xi(cs, b)
                        .try_mul(&TStarSymbol::p(cs, c))
                        .expect("same chart");
                    out = out.try_add(&t.scale(g)).expect("same chart");
                }
            }
        }
        out
    }

    /// dθ_a = Γ^c_ba ξ^b θ_c − ½ R_kla^c ξ^k ξ^l p_c.
    pub fn d_theta(&self, a: usize) -> TStarSymbol {
        let cs = self.coords();
        let n = cs.len();
        let mut out = TStarSymbol::zero(cs);
        for b in 0..n {
            for c in 0..n {
                let g = self.curv.gamma(c, b, a);
                if !g.is_zero() {
                    let t = TStarSymbol::xi(cs, b)
                        .try_mul(&TStarSymbol::theta(cs, c))
                        .expect("same chart");
                    out = out.try_add(&t.scale(g)).expect("same chart");
                }
            }
        }
        for k in 0..n {
            for l in 0..n {
                for c in 0..n {
                    let r = self.curv.riemann(k, l, a, c);
                    if r.is_zero() {
                        continue;
                    }
                    let t = TStarSymbol::xi(cs, k)
                        .try_mul(&TStarSymbol::xi(cs, l))
                        .and_then(|t| t.try_mul(&TStarSymbol::p(cs, c)))
                        .expect("same chart");
                    out = out.try_add(&t.scale(&(&Expr::num(-0.5) * r))).expect("same chart");
                }
            }
        }
        out
    }

    /// d f, extended from the generators as an odd derivation acting from the left.
    pub fn apply(&self, f: &TStarSymbol) -> Result<TStarSymbol, TStarError> {
        let cs = self.coords();
        if f.coords() != cs {
            return Err(TStarError::ChartMismatch);
        }
        let n = cs.len();
        let dp: Vec<TStarSymbol> = (0..n).map(|a| self.d_p(a)).collect();
        let dtheta: Vec<TStarSymbol> = (0..n).map(|a| self.d_theta(a)).collect();
        let mut out = TStarSymbol::zero(cs);
        for (m, c) in f.terms() {
            let rest = {
                let mut s = TStarSymbol::zero(cs);
                s.add_term(m.clone(), Expr::one());
                s
            };
            // d(c) = ∂_a c ξ^a
            for a in 0..n {
                let dc = c.differentiate(&cs[a]);
                if !dc.is_zero() {
                    out = out.try_add(&TStarSymbol::xi(cs, a).try_mul(&rest)?.scale(&dc))?;
                }
            }
            // momenta: d(p^α) = Σ α_a p^{α − e_a} dp_a, all even so no signs
            for a in 0..n {
                let k = m.p[a];
                if k == 0 {
                    continue;
                }
                let mut p = m.p.clone();
                p[a] -= 1;
                let mut lowered = TStarSymbol::zero(cs);
                lowered.add_term(Monomial { p, odd: m.odd }, c * &Expr::num(k as f64));
                out = out.try_add(&dp[a].try_mul(&lowered)?)?;
            }
            // odd factors g1 g2 … gk in ascending order
            let gens: Vec<usize> = (0..2 * n).filter(|g| m.odd >> g & 1 == 1).collect();
            for (i, &g) in gens.iter().enumerate() {
                if g < n {
                    continue;
                }
                let mut prefix = TStarSymbol::scalar(cs, c.clone());
                let mut p_only = TStarSymbol::zero(cs);
                p_only.add_term(Monomial { p: m.p.clone(), odd: 0 }, Expr::one());
                prefix = prefix.try_mul(&p_only)?;
                for &h in &gens[..i] {
                    prefix = prefix.try_mul(&TStarSymbol::odd_generator(cs, h))?;
                }
                let mut suffix = TStarSymbol::one(cs);
                for &h in &gens[i + 1..] {
                    suffix = suffix.try_mul(&TStarSymbol::odd_generator(cs, h))?;
                }
                let mut term = prefix.try_mul(&dtheta[g - n])?.try_mul(&suffix)?;
                if i % 2 == 1 {
                    term = term.scale(&Expr::num(-1.0));
                }
                out = out.try_add(&term)?;
            }
        }
        Ok(out)
    }

    /// d{f,g} − {df,g} − (−1)^f̃ {f,dg}, extended linearly over the parity parts of f.
    pub fn leibniz_defect(&self, f: &TStarSymbol, g: &TStarSymbol) -> Result<TStarSymbol, TStarError> {
        f.same_chart(g)?;
        let (even, odd) = f.split_parity();
        let mut out = TStarSymbol::zero(f.coords());
        for (part, sign) in [(even, 1.0), (odd, -1.0)] {
            if part.is_zero() {
                continue;
            }
            let lhs = self.apply(&canonical_bracket(&part, g)?)?;
            let first = canonical_bracket(&self.apply(&part)?, g)?;
            let second = canonical_bracket(&part, &self.apply(g)?)?.scale(&Expr::num(sign));
            out = out.try_add(&lhs.try_sub(&first)?.try_sub(&second)?)?;
        }
        Ok(out)
    }
}
