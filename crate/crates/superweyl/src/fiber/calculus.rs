use std::sync::Arc;

use super::{Block, FiberContext, FiberError, FiberKernel, FiberOperator, FiberSymbol};
use crate::grassmann::{GeneratorSet, Multivector, Parity};
use crate::linalg::{self, Matrix};
use crate::scalar::{Coeff, Laurent};

/// Remaps bits of `u` (over `from`) into `to`; `map[i]` is the target index of source
/// generator i, or `None` if the generator must not occur. The map must be increasing
/// on the generators that occur, so no signs arise.
fn remap<C: Coeff>(u: &Multivector<C>, to: &Arc<GeneratorSet>, map: &[Option<usize>]) -> Multivector<C> {
    let mut out = Multivector::zero(to);
    for (m, c) in u.terms() {
        let mut target = 0u64;
        let mut rest = *m;
        while rest != 0 {
            let g = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let j = map[g].expect("generator outside the projected blocks");
            target |= 1 << j;
        }
        out.add_term(target, c);
    }
    out
}

impl<C: Coeff> FiberContext<C> {
    fn block_indices(&self, b: Block) -> Vec<usize> {
        (0..self.n).map(|a| self.idx(b, a)).collect()
    }

    /// Interleaved pair list (b1¹, b2_1, b1², b2_2, …) for the measure D(b1, b2).
    fn pair_indices(&self, b1: Block, b2: Block) -> Vec<usize> {
        (0..self.n).flat_map(|a| [self.idx(b1, a), self.idx(b2, a)]).collect()
    }

    /// Symbol over (ξ, θ) → work algebra.
    fn symbol_to_work(&self, f: &FiberSymbol<C>) -> Multivector<C> {
        let map: Vec<Option<usize>> = self
            .block_indices(Block::Xi)
            .into_iter()
            .chain(self.block_indices(Block::Theta))
            .map(Some)
            .collect();
        remap(f, &self.work, &map)
    }

    /// Work element in the ξ, θ blocks → symbol.
    fn work_to_symbol(&self, u: &Multivector<C>) -> FiberSymbol<C> {
        let n = self.n;
        let mut map = vec![None; 6 * n];
        for a in 0..n {
            map[self.idx(Block::Xi, a)] = Some(a);
            map[self.idx(Block::Theta, a)] = Some(n + a);
        }
        remap(u, &self.symbols, &map)
    }

    /// Work element in the given two blocks → kernel set (first block as ξ, second as η).
    fn work_to_kernel(&self, u: &Multivector<C>, first: Block, second: Block) -> FiberKernel<C> {
        let n = self.n;
        let mut map = vec![None; 6 * n];
        for a in 0..n {
            map[self.idx(first, a)] = Some(a);
            map[self.idx(second, a)] = Some(n + a);
        }
        remap(u, &self.kernels, &map)
    }

    /// Work element in the ξ block → Λ.
    fn work_to_lambda(&self, u: &Multivector<C>) -> Multivector<C> {
        let mut map = vec![None; 6 * self.n];
        for a in 0..self.n {
            map[self.idx(Block::Xi, a)] = Some(a);
        }
        remap(u, &self.lambda, &map)
    }

    /// exp(s · Σ_a x_a y_a) over the work algebra.
    fn pairing_exp(&self, s: &Laurent<C>, x: &[Multivector<C>], y: &[Multivector<C>]) -> Multivector<C> {
        let mut a = Multivector::zero(&self.work);
        for (xa, ya) in x.iter().zip(y) {
            a = &a + &(xa * ya);
        }
        a.scale(s).exp_even_nilpotent().expect("pairing is even and nilpotent")
    }

    fn i_over_hbar(&self) -> Laurent<C> {
        &Laurent::i() * &Laurent::hbar(-1)
    }

    /// δ(ξ−η) = Π_{k=n..1}(ξ^k − η^k) over the kernel set.
    pub fn delta(&self) -> FiberKernel<C> {
        let mut d = Multivector::one(&self.kernels);
        for k in (0..self.n).rev() {
            let f = &Multivector::generator(&self.kernels, k) - &Multivector::generator(&self.kernels, self.n + k);
            d = &d * &f;
        }
        d
    }

    /// Matrices of ξ̂^k and ∂̂_k, k = 0..n−1.
    pub fn generator_operators(&self) -> (Vec<FiberOperator<C>>, Vec<FiberOperator<C>>) {
        let xs = (0..self.n).map(|k| FiberOperator::xi_hat(&self.lambda, k)).collect();
        let ds = (0..self.n).map(|k| FiberOperator::d_hat(&self.lambda, k)).collect();
        (xs, ds)
    }

    /// k_A(ξ, η) = (−1)ⁿ (A δ_η)(ξ), δ_η = √g δ(ξ−η).
    pub fn kernel_of(&self, a: &FiberOperator<C>) -> FiberKernel<C> {
        let delta_eta = self.delta().scale(&self.sqrt_g);
        let k = a.apply(&delta_eta);
        if self.n % 2 == 1 {
            -&k
        } else {
            k
        }
    }

    /// (Au)(ξ) = (−1)^{nÃ} ∫Dη/√g k(ξ, η) u(η), per parity part of the kernel.
    pub fn op_from_kernel(&self, k: &FiberKernel<C>) -> FiberOperator<C> {
        let eta: Vec<usize> = (self.n..2 * self.n).collect();
        let (even, odd) = k.split_parity();
        let mut out = FiberOperator::zero(self.n);
        for (part, kp) in [(even, 0u32), (odd, 1u32)] {
            if part.is_zero() {
                continue;
            }
            let op_parity = (kp + self.n as u32) % 2;
            let factor = &self.parity_sign(op_parity) * &self.inv_sqrt_g;
            let part = part.scale(&factor);
            let col = FiberOperator::from_linear_map(&self.lambda, |u| {
                let u_eta = remap(u, &self.kernels, &(self.n..2 * self.n).map(Some).collect::<Vec<_>>());
                let img = (&part * &u_eta).berezin(&eta);
                remap(
                    &img,
                    &self.lambda,
                    &(0..2 * self.n).map(|i| (i < self.n).then_some(i)).collect::<Vec<_>>(),
                )
            });
            out = &out + &col;
        }
        out
    }

    /// k_{AB}(ξ, η) = (−1)^{nÃ} ∫Dξ'/√g k_A(ξ, ξ') k_B(ξ', η), with Ã read off k_A.
    pub fn kernel_compose(&self, ka: &FiberKernel<C>, kb: &FiberKernel<C>) -> FiberKernel<C> {
        let n = self.n;
        let map_a: Vec<Option<usize>> = (0..n)
            .map(|a| Some(self.idx(Block::Xi, a)))
            .chain((0..n).map(|a| Some(self.idx(Block::Eps, a))))
            .collect();
        let images_b: Vec<Multivector<C>> = (0..n)
            .map(|a| self.gen(Block::Eps, a))
            .chain((0..n).map(|a| self.gen(Block::Eta, a)))
            .collect();
        let kb_w = kb.substitute_linear(&images_b, &self.work).expect("degree one");
        let eps = self.block_indices(Block::Eps);
        let (even, odd) = ka.split_parity();
        let mut out = Multivector::zero(&self.work);
        for (part, kp) in [(even, 0u32), (odd, 1u32)] {
            if part.is_zero() {
                continue;
            }
            let op_parity = (kp + n as u32) % 2;
            let factor = &self.parity_sign(op_parity) * &self.inv_sqrt_g;
            let ka_w = remap(&part, &self.work, &map_a);
            let integrand = &ka_w * &kb_w;
            out = &out + &integrand.berezin(&eps).scale(&factor);
        }
        self.work_to_kernel(&out, Block::Xi, Block::Eta)
    }

    /// Direct evaluation of
    /// (f̂u)(ξ) = (−iħ)ⁿ ∫D(η,θ) e^{(i/ħ)(ξ−η)θ} f((1−r)ξ + rη, θ) u(η),
    /// with D(η,θ) the pair measure D(η¹,θ_1)⋯D(ηⁿ,θ_n).
    pub fn quantize_direct(&self, f: &FiberSymbol<C>) -> FiberOperator<C> {
        let n = self.n;
        let r = self.scalar_r();
        let one_minus_r = &Laurent::one() - &r;
        let images: Vec<Multivector<C>> = (0..n)
            .map(|a| &self.gen(Block::Xi, a).scale(&one_minus_r) + &self.gen(Block::Eta, a).scale(&r))
            .chain((0..n).map(|a| self.gen(Block::Theta, a)))
            .collect();
        let f_w = f.substitute_linear(&images, &self.work).expect("degree one");
        let x: Vec<_> = (0..n)
            .map(|a| &self.gen(Block::Xi, a) - &self.gen(Block::Eta, a))
            .collect();
        let y: Vec<_> = (0..n).map(|a| self.gen(Block::Theta, a)).collect();
        let e = self.pairing_exp(&self.i_over_hbar(), &x, &y);
        let pre = &e * &f_w;
        let measure = self.pair_indices(Block::Eta, Block::Theta);
        let prefactor = self.minus_i_hbar_n();
        FiberOperator::from_linear_map(&self.lambda, |u| {
            let u_eta = remap(
                u,
                &self.work,
                &(0..n).map(|a| Some(self.idx(Block::Eta, a))).collect::<Vec<_>>(),
            );
            let img = (&pre * &u_eta).berezin(&measure).scale(&prefactor);
            self.work_to_lambda(&img)
        })
    }

    /// Direct evaluation of
    /// (σA)(ξ,θ) = (−1)^{nÃ} ∫Dε/√g e^{(i/ħ)εθ} k_A(ξ − rε, ξ + (1−r)ε), per parity part.
    pub fn symbol_of_direct(&self, a: &FiberOperator<C>) -> FiberSymbol<C> {
        let n = self.n;
        let r = self.scalar_r();
        let one_minus_r = &Laurent::one() - &r;
        let images: Vec<Multivector<C>> = (0..n)
            .map(|k| &self.gen(Block::Xi, k) - &self.gen(Block::Eps, k).scale(&r))
            .chain((0..n).map(|k| &self.gen(Block::Xi, k) + &self.gen(Block::Eps, k).scale(&one_minus_r)))
            .collect();
        let x: Vec<_> = (0..n).map(|k| self.gen(Block::Eps, k)).collect();
        let y: Vec<_> = (0..n).map(|k| self.gen(Block::Theta, k)).collect();
        let e = self.pairing_exp(&self.i_over_hbar(), &x, &y);
        let eps = self.block_indices(Block::Eps);
        let (even, odd) = a.split_parity();
        let mut out = Multivector::zero(&self.work);
        for (part, p) in [(even, 0u32), (odd, 1u32)] {
            if part.is_zero() {
                continue;
            }
            let k = self.kernel_of(&part);
            let k_w = k.substitute_linear(&images, &self.work).expect("degree one");
            let mut factor = &self.parity_sign(p) * &self.inv_sqrt_g;
            if self.sign_fault && p == 1 {
                factor = -factor;
            }
            out = &out + &(&e * &k_w).berezin(&eps).scale(&factor);
        }
        self.work_to_symbol(&out)
    }

    fn quantize_table(&self) -> Arc<Vec<FiberOperator<C>>> {
        self.quantize_table
            .get_or_init(|| {
                let count = 1usize << (2 * self.n);
                Arc::new(
                    (0..count)
                        .map(|m| self.quantize_direct(&self.symbol_monomial(m as u64)))
                        .collect(),
                )
            })
            .clone()
    }

    fn symbol_table(&self) -> Arc<Vec<FiberSymbol<C>>> {
        self.symbol_table
            .get_or_init(|| {
                let d = self.dim();
                Arc::new(
                    (0..d * d)
                        .map(|k| {
                            let mut e = FiberOperator::zero(self.n);
                            e.set(k / d, k % d, Laurent::one());
                            self.symbol_of_direct(&e)
                        })
                        .collect(),
                )
            })
            .clone()
    }

    /// Quantization f ↦ f̂, by linearity from cached images of basis monomials.
    pub fn quantize(&self, f: &FiberSymbol<C>) -> FiberOperator<C> {
        let table = self.quantize_table();
        let mut out = FiberOperator::zero(self.n);
        for (m, c) in f.terms() {
            out = &out + &table[*m as usize].scale(c);
        }
        out
    }

    /// Symbol map A ↦ σA, by linearity from cached symbols of matrix units.
    pub fn symbol_of(&self, a: &FiberOperator<C>) -> FiberSymbol<C> {
        let table = self.symbol_table();
        let mut out = Multivector::zero(&self.symbols);
        for (k, c) in a.entries().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (m, s) in table[k].terms() {
                out.add_term(*m, &(s * c));
            }
        }
        out
    }

    /// f∘g := σ(f̂ ĝ), computed through operators.
    pub fn compose_brute(&self, f: &FiberSymbol<C>, g: &FiberSymbol<C>) -> FiberSymbol<C> {
        self.symbol_of(&(&self.quantize(f) * &self.quantize(g)))
    }

    /// f∘g = exp(iħ((1−r)∂_{θ}∂_{ξ'} + r∂_{ξ}∂_{θ'})) [f(ξ,θ) g(ξ',θ')] restricted to ξ' = ξ, θ' = θ.
    pub fn compose_symbols(&self, f: &FiberSymbol<C>, g: &FiberSymbol<C>) -> FiberSymbol<C> {
        let n = self.n;
        let f_w = self.symbol_to_work(f);
        let map2: Vec<Option<usize>> = (0..n)
            .map(|a| Some(self.idx(Block::Xi2, a)))
            .chain((0..n).map(|a| Some(self.idx(Block::Theta2, a))))
            .collect();
        let g_w = remap(g, &self.work, &map2);
        let r = self.scalar_r();
        let one_minus_r = &Laurent::one() - &r;
        let step = |u: &Multivector<C>| {
            let mut acc = Multivector::zero(&self.work);
            for a in 0..n {
                let left = u
                    .left_derivative(self.idx(Block::Xi2, a))
                    .left_derivative(self.idx(Block::Theta, a));
                let right = u
                    .left_derivative(self.idx(Block::Theta2, a))
                    .left_derivative(self.idx(Block::Xi, a));
                acc = &acc + &(&left.scale(&one_minus_r) + &right.scale(&r));
            }
            acc
        };
        let i_hbar = &Laurent::i() * &Laurent::hbar(1);
        let mut term = &f_w * &g_w;
        let mut total = term.clone();
        let mut k = 1i64;
        loop {
            term = step(&term).scale(&(&i_hbar * &Laurent::from_ratio(1, k)));
            if term.is_zero() {
                break;
            }
            total = &total + &term;
            k += 1;
        }
        let images: Vec<Multivector<C>> = (0..6 * n)
            .map(|i| {
                let block = i / n;
                let a = i % n;
                match block {
                    4 => self.gen(Block::Xi, a),
                    5 => self.gen(Block::Theta, a),
                    _ => Multivector::generator(&self.work, i),
                }
            })
            .collect();
        let diag = total.substitute_linear(&images, &self.work).expect("degree one");
        self.work_to_symbol(&diag)
    }

    /// Odd Poisson bracket {f,g} = Σ_a (f∂⃖/∂θ_a)(∂⃗/∂ξ^a g) + (f∂⃖/∂ξ^a)(∂⃗/∂θ_a g).
    pub fn poisson_bracket(&self, f: &FiberSymbol<C>, g: &FiberSymbol<C>) -> FiberSymbol<C> {
        let n = self.n;
        let mut acc = Multivector::zero(&self.symbols);
        for a in 0..n {
            let t1 = &f.right_derivative(n + a) * &g.left_derivative(a);
            let t2 = &f.right_derivative(a) * &g.left_derivative(n + a);
            acc = &(&acc + &t1) + &t2;
        }
        acc
    }

    /// *u(ξ) = C ∫Dη/√g e^{−it g_ab ξ^a η^b} u(η).
    pub fn hodge_star(&self) -> FiberOperator<C> {
        let n = self.n;
        let mut a = Multivector::zero(&self.kernels);
        for i in 0..n {
            for j in 0..n {
                let gij = &self.metric[i][j];
                if gij.is_zero() {
                    continue;
                }
                let pair = &Multivector::generator(&self.kernels, i) * &Multivector::generator(&self.kernels, n + j);
                a = &a + &pair.scale(gij);
            }
        }
        let s = -(&(&Laurent::i() * &self.t));
        let e = a.scale(&s).exp_even_nilpotent().expect("even nilpotent");
        let eta: Vec<usize> = (n..2 * n).collect();
        let factor = &self.star_c * &self.inv_sqrt_g;
        FiberOperator::from_linear_map(&self.lambda, |u| {
            let u_eta = remap(u, &self.kernels, &(n..2 * n).map(Some).collect::<Vec<_>>());
            let img = (&e * &u_eta).berezin(&eta).scale(&factor);
            remap(
                &img,
                &self.lambda,
                &(0..2 * n).map(|i| (i < n).then_some(i)).collect::<Vec<_>>(),
            )
        })
    }

    /// The star with the involutive normalization C = t^{−m}; errors unless that is configured.
    pub fn hodge_star_involutive(&self) -> Result<FiberOperator<C>, FiberError> {
        if self.n % 2 == 1 {
            return Err(FiberError::StarNormalization);
        }
        let expected = self.t.powi(-(self.n as i32 / 2)).ok_or(FiberError::StarParameter)?;
        if !expected.approx_eq(&self.star_c, 1e-12) {
            return Err(FiberError::StarNormalization);
        }
        Ok(self.hodge_star())
    }

    /// C⁻²(it)⁻ⁿ(−1)^{n(n−1)/2} *, the predicted inverse of *.
    pub fn hodge_star_inverse_formula(&self) -> Result<FiberOperator<C>, FiberError> {
        let n = self.n as i32;
        let c2 = self.star_c.powi(-2).ok_or(FiberError::StarParameter)?;
        let it = (&Laurent::i() * &self.t).powi(-n).ok_or(FiberError::StarParameter)?;
        let mut s = &c2 * &it;
        if (n * (n - 1) / 2) % 2 == 1 {
            s = -s;
        }
        Ok(self.hodge_star().scale(&s))
    }

    /// tr(SA) for a grading involution S.
    pub fn graded_trace(&self, a: &FiberOperator<C>, s: &FiberOperator<C>) -> Result<Laurent<C>, FiberError> {
        if !(s * s).approx_eq(&FiberOperator::identity(self.n), 1e-12) {
            return Err(FiberError::NotInvolution);
        }
        Ok((s * a).trace())
    }

    /// str A = (−iħ)ⁿ ∫D(ξ,θ) σA.
    pub fn supertrace_from_symbol(&self, sigma: &FiberSymbol<C>) -> Laurent<C> {
        let pairs: Vec<usize> = (0..self.n).flat_map(|a| [a, self.n + a]).collect();
        sigma.berezin(&pairs).scalar_part() * self.minus_i_hbar_n()
    }

    /// tr₁ A = (−iħ)ⁿ ∫D(ξ,θ) e^{−(2i/ħ)ξθ} σA((2r−1)ξ, θ).
    pub fn trace_from_symbol(&self, sigma: &FiberSymbol<C>) -> Laurent<C> {
        let n = self.n;
        let r = self.scalar_r();
        let s = &(&r * &Laurent::from_i64(2)) - &Laurent::one();
        let images: Vec<Multivector<C>> = (0..n)
            .map(|a| self.xi(a).scale(&s))
            .chain((0..n).map(|a| self.theta(a)))
            .collect();
        let shifted = sigma.substitute_linear(&images, &self.symbols).expect("degree one");
        let mut pairing = Multivector::zero(&self.symbols);
        for a in 0..n {
            pairing = &pairing + &(&self.xi(a) * &self.theta(a));
        }
        let coef = &Laurent::from_i64(-2) * &self.i_over_hbar();
        let e = pairing.scale(&coef).exp_even_nilpotent().expect("even nilpotent");
        let pairs: Vec<usize> = (0..n).flat_map(|a| [a, n + a]).collect();
        (&e * &shifted).berezin(&pairs).scalar_part() * self.minus_i_hbar_n()
    }

    /// tr_* A = t^{−m} ∫Dξ/√g σA(ξ, tħ g_ab ξ^b), n = 2m; pairs with the star of normalization C = t^{−m}.
    pub fn star_trace_from_symbol(&self, sigma: &FiberSymbol<C>) -> Result<Laurent<C>, FiberError> {
        let n = self.n;
        if n % 2 == 1 {
            return Err(FiberError::OddDimension);
        }
        let t_hbar = &self.t * &Laurent::hbar(1);
        let images: Vec<Multivector<C>> = (0..n)
            .map(|a| self.xi(a))
            .chain((0..n).map(|a| {
                let mut img = Multivector::zero(&self.symbols);
                for b in 0..n {
                    img = &img + &self.xi(b).scale(&(&t_hbar * &self.metric[a][b]));
                }
                img
            }))
            .collect();
        let restricted = sigma.substitute_linear(&images, &self.symbols).expect("degree one");
        let xi: Vec<usize> = (0..n).collect();
        let c = self.t.powi(-(n as i32 / 2)).ok_or(FiberError::StarParameter)?;
        Ok(restricted.berezin(&xi).scalar_part() * (&c * &self.inv_sqrt_g))
    }

    /// Pull-back T*: u(ξ) ↦ u(Tξ), where (Tξ)^a = T^a_b ξ^b.
    pub fn pullback(&self, t: &Matrix<C>) -> Result<FiberOperator<C>, FiberError> {
        self.check_transform(t)?;
        let images: Vec<Multivector<C>> = (0..self.n)
            .map(|a| {
                let mut img = Multivector::zero(&self.lambda);
                for b in 0..self.n {
                    img = &img + &Multivector::generator(&self.lambda, b).scale(&t[a][b]);
                }
                img
            })
            .collect();
        Ok(FiberOperator::from_linear_map(&self.lambda, |u| {
            u.substitute_linear(&images, &self.lambda).expect("degree one")
        }))
    }

    fn check_transform(&self, t: &Matrix<C>) -> Result<(), FiberError> {
        if t.len() != self.n || !linalg::is_square(t) {
            return Err(FiberError::SizeMismatch {
                expected: self.n,
                got: t.len(),
            });
        }
        Ok(())
    }

    /// (T*f)(ξ,θ) = f(Tξ, T⁻¹θ): ξ^a ↦ T^a_b ξ^b and θ_a ↦ (T⁻¹)^b_a θ_b.
    pub fn spin_conjugate(&self, f: &FiberSymbol<C>, t: &Matrix<C>) -> Result<FiberSymbol<C>, FiberError> {
        self.check_transform(t)?;
        let t_inv = linalg::inverse(t).ok_or(FiberError::SingularTransform)?;
        let n = self.n;
        let images: Vec<Multivector<C>> = (0..n)
            .map(|a| {
                let mut img = Multivector::zero(&self.symbols);
                for b in 0..n {
                    img = &img + &self.xi(b).scale(&t[a][b]);
                }
                img
            })
            .chain((0..n).map(|a| {
                let mut img = Multivector::zero(&self.symbols);
                for b in 0..n {
                    img = &img + &self.theta(b).scale(&t_inv[b][a]);
                }
                img
            }))
            .collect();
        Ok(f.substitute_linear(&images, &self.symbols).expect("degree one"))
    }

    /// Parity of a symbol term as an operator: the ℤ₂ degree of its monomial.
    pub fn symbol_parity(f: &FiberSymbol<C>) -> Option<Parity> {
        f.parity()
    }
}
