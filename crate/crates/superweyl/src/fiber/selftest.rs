//! Exact self-test of the fiber calculus over `ExactScalar`.

use num_rational::Rational64;
use rand::Rng;

use super::{FiberContext, FiberOperator};
use crate::random;
use crate::report::{Check, Report};
use crate::scalar::{ExactScalar, GaussRational};

#[derive(Debug, Clone)]
pub struct SelftestConfig {
    pub ns: Vec<usize>,
    pub rs: Vec<Rational64>,
    /// Random operators per n for the trace checks, and random symbol pairs for n = 3 composition.
    pub random_cases: usize,
    pub seed: u64,
    pub inject_fault: bool,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            ns: vec![1, 2, 3],
            rs: vec![Rational64::new(0, 1), Rational64::new(1, 2), Rational64::new(1, 1)],
            random_cases: 200,
            seed: 7,
            inject_fault: false,
        }
    }
}

type Ctx = FiberContext<GaussRational>;

fn context(n: usize, r: Rational64, fault: bool) -> Result<Ctx, super::FiberError> {
    let c = Ctx::new(n).with_r(r)?;
    Ok(if fault { c.with_injected_sign_fault() } else { c })
}

fn roundtrip(c: &Ctx) -> (usize, usize) {
    let total = 1usize << (2 * c.n());
    let bad = (0..total as u64)
        .filter(|&m| {
            let f = c.symbol_monomial(m);
            c.symbol_of(&c.quantize(&f)) != f
        })
        .count();
    (bad, total)
}

fn composition(c: &Ctx, rng: &mut random::TestRng, random_cases: usize) -> (usize, usize) {
    let basis = 1u64 << (2 * c.n());
    let pairs: Vec<(u64, u64)> = if c.n() <= 2 {
        (0..basis).flat_map(|a| (0..basis).map(move |b| (a, b))).collect()
    } else {
        (0..random_cases)
            .map(|_| (rng.gen_range(0..basis), rng.gen_range(0..basis)))
            .collect()
    };
    let bad = pairs
        .iter()
        .filter(|(a, b)| {
            let (f, g) = (c.symbol_monomial(*a), c.symbol_monomial(*b));
            c.compose_symbols(&f, &g) != c.compose_brute(&f, &g)
        })
        .count();
    (bad, pairs.len())
}

/// Trace paths for one random operator across all r; returns mismatch flags
/// (str, tr1, tr*, weyl).
fn trace_case(ctxs: &[Ctx], a: &FiberOperator<GaussRational>) -> [bool; 4] {
    let n = ctxs[0].n();
    let parity = FiberOperator::parity_operator(n);
    let str_matrix = ctxs[0].graded_trace(a, &parity).expect("parity is an involution");
    let tr_matrix = a.trace();
    let mut bad = [false; 4];
    for c in ctxs {
        let sigma = c.symbol_of(a);
        bad[0] |= c.supertrace_from_symbol(&sigma) != str_matrix;
        bad[1] |= c.trace_from_symbol(&sigma) != tr_matrix;
        if n == 2 {
            let star = c.hodge_star();
            let lhs = c.star_trace_from_symbol(&sigma).expect("even n");
            bad[2] |= lhs != c.graded_trace(a, &star).expect("star is an involution for n = 2");
        }
        if c.r() == Rational64::new(1, 2) {
            bad[3] |= tr_matrix != &sigma.scalar_part() * &ExactScalar::from_i64(1 << n);
        }
    }
    bad
}

fn star_checks(n: usize, rng: &mut random::TestRng, report: &mut Report) {
    if n.is_multiple_of(2) {
        let mut bad = 0;
        for t in [ExactScalar::one(), ExactScalar::from_ratio(3, 2)] {
            let c = Ctx::new(n).with_star_involutive(t).expect("even n");
            let s = c.hodge_star_involutive().expect("normalized");
            if &s * &s != FiberOperator::identity(n) {
                bad += 1;
            }
        }
        report.push(Check::exact(format!("star involution n={n}"), bad, 2));
    }
    let t = random::real_rational(rng);
    let cc = random::real_rational(rng);
    let c = Ctx::new(n).with_star(t, cc).expect("t is nonzero");
    let inv = c.hodge_star_inverse_formula().expect("t, C invertible");
    let bad = usize::from(&c.hodge_star() * &inv != FiberOperator::identity(n));
    report.push(Check::exact(format!("star inverse formula n={n}"), bad, 1));
}

/// Star involution (even n, t ∈ {1, 3/2}) and the inverse formula for one fiber dimension.
pub fn star_suite(n: usize, seed: u64) -> Report {
    let mut report = Report::default();
    star_checks(n, &mut random::rng(seed), &mut report);
    report
}

/// Runs roundtrip, composition, trace and star checks for every (n, r).
pub fn run(cfg: &SelftestConfig) -> Result<Report, super::FiberError> {
    let mut report = Report::default();
    let mut rng = random::rng(cfg.seed);
    for &n in &cfg.ns {
        let ctxs = cfg
            .rs
            .iter()
            .map(|&r| context(n, r, cfg.inject_fault))
            .collect::<Result<Vec<_>, _>>()?;
        for c in &ctxs {
            let (bad, total) = roundtrip(c);
            report.push(Check::exact(format!("roundtrip n={n} r={}", c.r()), bad, total));
        }
        for c in &ctxs {
            let (bad, total) = composition(c, &mut rng, cfg.random_cases);
            report.push(Check::exact(format!("composition n={n} r={}", c.r()), bad, total));
        }
        let mut counts = [0usize; 4];
        let mut supercomm = 0usize;
        let parity = FiberOperator::parity_operator(n);
        for _ in 0..cfg.random_cases {
            let a = random::exact_operator(&mut rng, n, 0.5);
            for (k, b) in trace_case(&ctxs, &a).into_iter().enumerate() {
                counts[k] += usize::from(b);
            }
            let pa = rng.gen_range(0..2);
            let pb = rng.gen_range(0..2);
            let x = random::exact_homogeneous_operator(&mut rng, n, pa, 0.5);
            let y = random::exact_homogeneous_operator(&mut rng, n, pb, 0.5);
            let s = ctxs[0]
                .graded_trace(&x.supercommutator(&y), &parity)
                .expect("involution");
            supercomm += usize::from(!s.is_zero());
        }
        let m = cfg.random_cases;
        report.push(Check::exact(format!("supertrace n={n}"), counts[0], m));
        report.push(Check::exact(format!("trace n={n}"), counts[1], m));
        if n == 2 {
            report.push(Check::exact(format!("star trace n={n}"), counts[2], m));
        }
        if cfg.rs.contains(&Rational64::new(1, 2)) {
            report.push(Check::exact(format!("weyl trace n={n}"), counts[3], m));
        }
        report.push(Check::exact(
            format!("supertrace of supercommutators n={n}"),
            supercomm,
            m,
        ));
        star_checks(n, &mut rng, &mut report);
    }
    Ok(report)
}
