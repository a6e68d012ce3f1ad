//! The invariant suite behind `qprob verify`.
//!
//! Every check draws its random instances from its own ChaCha stream keyed
//! by the run seed, so filtering suites never changes the values of the
//! checks that do run. Checks run in a fixed order and stop at the first
//! failure.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::VerifyConfig;
use crate::becsim::{self, BecParams, EnsembleResult};
use crate::error::{Error, Result};
use crate::events::{self, DensityOperator, Observable};
use crate::linalg::{hermitian_eigen, ComplexMatrix, ComplexVector, DEFAULT_TOL};
use crate::prospects::{self, CompositeState, Normalization, Prospect};
use crate::quarterlaw::{self, Balance, BetaPairDistribution};
use crate::random;
use crate::uncertain::{self, ModeWeights, UncertainUnion};

pub const SUITES: [&str; 6] = ["linalg", "events", "uncertain", "prospects", "quarterlaw", "bec"];

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub name: &'static str,
    /// The relation being checked, in words.
    pub relation: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub outcomes: Vec<CheckOutcome>,
    pub skipped: usize,
}

impl VerifyReport {
    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.outcomes.iter().find(|c| !c.passed)
    }

    pub fn passed(&self) -> bool {
        self.first_failure().is_none()
    }

    /// Plain-text summary; contains nothing that varies between runs with
    /// the same configuration.
    pub fn render(&self, cfg: &VerifyConfig, filter: Option<&str>) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "qprob verify  seed={} paths={} sweep_paths={} dt={} t_max={} sigma={} stride={} filter={}",
            cfg.seed,
            cfg.paths,
            cfg.sweep_paths,
            cfg.dt,
            cfg.t_max,
            cfg.sigma,
            cfg.stride,
            filter.unwrap_or("all")
        );
        for c in &self.outcomes {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{tag}  {:<10} {:<30} {}", c.suite, c.name, c.relation);
            let _ = writeln!(out, "      {}", c.detail);
        }
        let passed = self.outcomes.iter().filter(|c| c.passed).count();
        let failed = self.outcomes.len() - passed;
        let _ = writeln!(out, "summary: {passed} passed, {failed} failed, {} not run", self.skipped);
        if let Some(c) = self.first_failure() {
            let _ = writeln!(out, "first failing invariant: {} ({}): {}", c.name, c.relation, c.detail);
        }
        out
    }
}

type CheckFn = fn(&Ctx) -> Result<(bool, String)>;

struct Check {
    suite: &'static str,
    name: &'static str,
    relation: &'static str,
    run: CheckFn,
}

struct Ctx {
    cfg: VerifyConfig,
    corrupt_state: bool,
}

impl Ctx {
    fn rng(&self, salt: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(salt);
        rng
    }

    fn bec(&self, b: f64, sigma: f64, n_paths: usize, t_max: f64) -> BecParams {
        BecParams { b, sigma, s0: -0.9, x0: 0.0, dt: self.cfg.dt, t_max, n_paths, seed: self.cfg.seed }
    }
}

const CHECKS: &[Check] = &[
    Check {
        suite: "linalg",
        name: "spectral-decomposition",
        relation: "A = Σ_n a_n P_n, Σ_n P_n = 1, <φ_m|φ_n> = δ_mn",
        run: spectral_decomposition,
    },
    Check {
        suite: "linalg",
        name: "tensor-product",
        relation: "(A⊗B)(C⊗D) = AC⊗BD, Tr_B(A⊗B) = A Tr B",
        run: tensor_product,
    },
    Check {
        suite: "events",
        name: "event-probabilities",
        relation: "p(A_n) = Tr ρ P_n in [0,1], Σ_n p(A_n) = 1",
        run: event_probabilities,
    },
    Check {
        suite: "events",
        name: "standard-union-additivity",
        relation: "p(∪_n A_n) = Σ_n p(A_n) for orthogonal events",
        run: standard_union_additivity,
    },
    Check {
        suite: "uncertain",
        name: "uncertain-union-probability",
        relation: "p(⨄A) = Tr ρ P_A = Σ|b_n|² p(A_n) + q",
        run: uncertain_union_probability,
    },
    Check {
        suite: "uncertain",
        name: "non-additivity-witness",
        relation: "ρ = |+><+|, b = (1,1)/√2: p = 1, q = 1/2",
        run: non_additivity_witness,
    },
    Check {
        suite: "prospects",
        name: "prospect-normalization",
        relation: "Σ_n p(π_n) = 1, Σ_n f(π_n) = 1, Σ_n q(π_n) = 0, p,f in [0,1]",
        run: prospect_normalization,
    },
    Check {
        suite: "prospects",
        name: "prospect-decomposition",
        relation: "p(π_n) = Tr ρ P(π_n) = f(π_n) + q(π_n)",
        run: prospect_decomposition,
    },
    Check {
        suite: "prospects",
        name: "product-state-no-interference",
        relation: "ρ = ρ_A ⊗ ρ_B implies q(π_n) = 0 after normalization",
        run: product_no_interference,
    },
    Check {
        suite: "prospects",
        name: "max-entangled-no-interference",
        relation: "ρ = |ψ><ψ|, ψ = Σ_m |mm>/√M implies q(π_n) = 0",
        run: max_entangled_no_interference,
    },
    Check {
        suite: "prospects", name: "entanglement-measure", relation: "ε(ψ_M) = log₂ M", run: entanglement_measure
    },
    Check {
        suite: "prospects",
        name: "bell-like-instance",
        relation: "(|00>+|01>+|10>-|11>)/2: p = (1/2, 0), q = (1/4, -1/4)",
        run: bell_like_instance,
    },
    Check {
        suite: "prospects",
        name: "decoherence-limit",
        relation: "dephased ρ gives q = 0; q is linear in the coherence",
        run: decoherence_limit,
    },
    Check {
        suite: "quarterlaw",
        name: "quarter-law",
        relation: "symmetric priors: q₊ = 1/4, q₋ = -1/4",
        run: quarter_law,
    },
    Check {
        suite: "quarterlaw",
        name: "quarter-law-quadrature",
        relation: "∫ q φ(q) dq over each sign = closed form",
        run: quarter_law_quadrature,
    },
    Check {
        suite: "quarterlaw",
        name: "density-normalization",
        relation: "∫ φ(q) dq = 1 on [-1, 1]",
        run: density_normalization,
    },
    Check {
        suite: "quarterlaw",
        name: "zero-mean-balance",
        relation: "q₊ + q₋ = 0 after solving for λ₋, μ",
        run: zero_mean_balance,
    },
    Check {
        suite: "bec",
        name: "critical-amplitude",
        relation: "b_c = s₀²/(2(1+√(1-s₀²)cos x₀)) = 0.282 at s₀ = -0.9",
        run: critical_amplitude,
    },
    Check {
        suite: "bec",
        name: "energy-conservation",
        relation: "H = s²/2 - b√(1-s²)cos x constant along the noiseless flow",
        run: energy_conservation,
    },
    Check {
        suite: "bec",
        name: "integrator-order",
        relation: "global error ratio under step halving ≈ 2⁴",
        run: integrator_order,
    },
    Check {
        suite: "bec",
        name: "regime-dichotomy",
        relation: "s(t) keeps its sign iff b < b_c",
        run: regime_dichotomy,
    },
    Check {
        suite: "bec",
        name: "noiseless-interference",
        relation: "σ = 0 implies q₁(t) = 0",
        run: noiseless_interference,
    },
    Check {
        suite: "bec",
        name: "interference-antisymmetry",
        relation: "q₂(t) = -q₁(t); supercritical fluctuations exceed subcritical",
        run: antisymmetry_and_fluctuations,
    },
    Check {
        suite: "bec",
        name: "noise-decoherence",
        relation: "max_{t≤20} |q₁(t)| decreases as σ decreases",
        run: noise_decoherence,
    },
];

/// Run the checks of the selected suite (all when `filter` is `None`),
/// stopping at the first failure.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn run_verify(cfg: &VerifyConfig, filter: Option<&str>, corrupt_state: bool) -> Result<VerifyReport> {
    if let Some(f) = filter {
        if !SUITES.contains(&f) {
            return Err(Error::InvalidParameter(format!("unknown suite '{f}', expected one of {}", SUITES.join(", "))));
        }
    }
    if cfg.paths < 2
        || cfg.sweep_paths < 2
        || cfg.stride == 0
        || !(cfg.dt > 0.0)
        || !(cfg.t_max > cfg.dt)
        || !(cfg.sigma > 0.0)
    {
        return Err(Error::InvalidParameter(
            "verify needs paths >= 2, sweep_paths >= 2, stride >= 1, dt > 0, t_max > dt, sigma > 0".into(),
        ));
    }
    let ctx = Ctx { cfg: cfg.clone(), corrupt_state };
    let selected: Vec<&Check> = CHECKS.iter().filter(|c| filter.is_none_or(|f| c.suite == f)).collect();
    let mut outcomes = Vec::new();
    for check in &selected {
        let (passed, detail) = match (check.run)(&ctx) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        outcomes.push(CheckOutcome { suite: check.suite, name: check.name, relation: check.relation, passed, detail });
        if !passed {
            break;
        }
    }
    let skipped = selected.len() - outcomes.len();
    Ok(VerifyReport { outcomes, skipped })
}

fn verdict(worst: f64, tol: f64, what: &str) -> (bool, String) {
    (worst <= tol, format!("{what}: max deviation {worst:.3e} (tol {tol:.0e})"))
}

fn spectral_decomposition(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng(1);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let d = 2 + i % 7;
        let a = random::random_hermitian(d, &mut rng);
        let sd = hermitian_eigen(&a, DEFAULT_TOL)?;
        let mut sum = ComplexMatrix::zeros(d, d);
        for n in 0..d {
            sum = &sum + &sd.projector(n)?;
        }
        worst = worst
            .max(sd.recompose().max_abs_diff(&a)? / a.max_abs().max(1.0))
            .max(sd.orthonormality_error())
            .max(sum.max_abs_diff(&ComplexMatrix::identity(d))?);
    }
    Ok(verdict(worst, 1e-10, "100 random Hermitian matrices, d = 2..8"))
}

fn tensor_product(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (m, n) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
        let a = random::random_matrix(m, m, &mut rng);
        let b = random::random_matrix(n, n, &mut rng);
        let c = random::random_matrix(m, m, &mut rng);
        let d = random::random_matrix(n, n, &mut rng);
        let lhs = a.kron(&b)?.matmul(&c.kron(&d)?)?;
        let rhs = a.matmul(&c)?.kron(&b.matmul(&d)?)?;
        worst = worst.max(lhs.max_abs_diff(&rhs)? / rhs.max_abs().max(1.0));
        let traced = a.kron(&b)?.partial_trace_b(m, n)?;
        worst = worst.max(traced.max_abs_diff(&a.scale(b.trace()?))? / traced.max_abs().max(1.0));
    }
    Ok(verdict(worst, 1e-12, "50 random factor pairs"))
}

fn event_probabilities(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng(3);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let d = [2, 3, 4, 8][i % 4];
        let rho = random::random_mixed_state(d, &mut rng);
        let obs = random::random_observable(d, &mut rng);
        let mut total = 0.0;
        for n in 0..d {
            let p = events::event_probability(&rho, &obs, n)?;
            worst = worst.max(-p).max(p - 1.0);
            total += p;
        }
        worst = worst.max((total - 1.0).abs());
    }
    Ok(verdict(worst, 1e-10, "1000 random states and observables"))
}

fn standard_union_additivity(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng(4);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let d = rng.gen_range(2..=6);
        let rho = random::random_mixed_state(d, &mut rng);
        let obs = random::random_observable(d, &mut rng);
        let subset: Vec<usize> = (0..d).filter(|_| rng.gen_bool(0.5)).collect();
        if subset.is_empty() {
            continue;
        }
        let union = events::union_probability(&rho, &obs, &subset)?;
        let parts = subset.iter().map(|&n| events::event_probability(&rho, &obs, n)).sum::<Result<f64>>()?;
        worst = worst.max((union - parts).abs());
    }
    Ok(verdict(worst, 1e-12, "500 random index subsets"))
}

fn uncertain_union_probability(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng(5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = rng.gen_range(2..=5);
        let rho = random::random_mixed_state(d, &mut rng);
        let u = UncertainUnion::new(random::random_observable(d, &mut rng), random::random_weights(d, &mut rng))?;
        let r = uncertain::uncertain_probability(&rho, &u)?;
        let dense = rho.matrix().matmul(&uncertain::proposition_operator(&u))?.trace()?;
        worst = worst.max((r.p - dense.re).abs()).max(dense.im.abs()).max((r.p - r.diag - r.q).abs());
    }
    Ok(verdict(worst, 1e-12, "1000 random uncertain unions against Tr ρ P_A"))
}

fn non_additivity_witness(_: &Ctx) -> Result<(bool, String)> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rho = DensityOperator::pure(&ComplexVector::from_real(&[h, h])?)?;
    let u = UncertainUnion::new(Observable::standard(2)?, ModeWeights::uniform(2)?)?;
    let r = uncertain::uncertain_probability(&rho, &u)?;
    let worst = (r.p - 1.0).abs().max((r.diag - 0.5).abs()).max((r.q - 0.5).abs());
    let (ok, _) = verdict(worst, 1e-12, "");
    Ok((ok, format!("p = {:.15}, diagonal part = {:.15}, q = {:.15}", r.p, r.diag, r.q)))
}

fn prospect_normalization(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng(6);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let (da, db) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
        let mut state = random::random_entangled_state(da, db, &mut rng);
        if ctx.corrupt_state && i == 0 {
            // test-only fault: a state whose trace is not one
            state = corrupted(&state);
        }
        let weights = random::random_weights(db, &mut rng);
        let r = prospects::prospect_probabilities(&state, &weights, Normalization::Normalized)?;
        worst = worst.max(r.axiom_violation());
        let mut joint = 0.0;
        for n in 0..da {
            for alpha in 0..db {
                joint += state.rho().matrix()[(n * db + alpha, n * db + alpha)].re;
            }
        }
        worst = worst.max((joint - 1.0).abs());
    }
    Ok(verdict(worst, 1e-10, "1000 random entangled states, normalized mode"))
}

fn corrupted(state: &CompositeState) -> CompositeState {
    let m = state.rho().matrix().scale_real(1.01);
    let rho = DensityOperator::from_trusted(m);
    CompositeState::new(rho, state.dim_a(), state.dim_b()).expect("dimensions unchanged")
}

fn prospect_decomposition(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng(7);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (da, db) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let state = random::random_entangled_state(da, db, &mut rng);
        let weights = random::random_weights(db, &mut rng);
        let r = prospects::prospect_probabilities(&state, &weights, Normalization::Raw)?;
        for n in 0..da {
            let op = prospects::prospect_operator(&Prospect::new(n, weights.clone()), da)?;
            let dense = state.rho().matrix().matmul(&op)?.trace()?;
            worst = worst.max((r.p[n] - dense.re).abs()).max((r.p[n] - r.f[n] - r.q[n]).abs());
        }
    }
    Ok(verdict(worst, 1e-12, "200 random instances against the dense trace"))
}

fn product_no_interference(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng(8);
    let mut worst = 0.0f64;
    for i in 0..500 {
        let (da, db) = [(2, 2), (2, 3), (3, 3)][i % 3];
        let state = prospects::product_state(
            &random::random_mixed_state(da, &mut rng),
            &random::random_mixed_state(db, &mut rng),
        );
        let weights = random::random_weights(db, &mut rng);
        worst = worst.max(prospects::prospect_probabilities(&state, &weights, Normalization::Normalized)?.max_abs_q());
    }
    Ok(verdict(worst, 1e-12, "500 random product states, normalized mode, max |q|"))
}

fn max_entangled_no_interference(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng(9);
    let mut worst = 0.0f64;
    for m in 2..=6 {
        let state = prospects::max_entangled_state(m)?;
        for _ in 0..100 {
            let weights = random::random_weights(m, &mut rng);
            worst = worst.max(prospects::prospect_probabilities(&state, &weights, Normalization::Raw)?.max_abs_q());
        }
    }
    Ok(verdict(worst, 1e-12, "M = 2..6, 100 weight vectors each, max |q|"))
}

fn entanglement_measure(_: &Ctx) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for m in 2..=6usize {
        let state = prospects::max_entangled_state(m)?;
        // the reduced state of the maximally entangled state is 1/M
        let reduced = state.marginal_a();
        worst = worst.max(reduced.max_abs_diff(&ComplexMatrix::identity(m).scale_real(1.0 / m as f64))?);
        worst = worst.max((prospects::entanglement_measure_maxstate(m)? - (m as f64).ln() / 2f64.ln()).abs());
    }
    Ok(verdict(worst, 1e-12, "M = 2..6"))
}

fn bell_like_instance(_: &Ctx) -> Result<(bool, String)> {
    let psi = ComplexVector::from_real(&[0.5, 0.5, 0.5, -0.5])?;
    let state = CompositeState::new(DensityOperator::pure(&psi)?, 2, 2)?;
    let r = prospects::prospect_probabilities(&state, &ModeWeights::uniform(2)?, Normalization::Raw)?;
    let expected = ([0.5, 0.0], [0.25, 0.25], [0.25, -0.25]);
    let mut worst = 0.0f64;
    for n in 0..2 {
        worst = worst
            .max((r.p[n] - expected.0[n]).abs())
            .max((r.f[n] - expected.1[n]).abs())
            .max((r.q[n] - expected.2[n]).abs());
    }
    let (ok, _) = verdict(worst, 1e-12, "");
    Ok((
        ok,
        format!(
            "p = ({:.3}, {:.3}), f = ({:.3}, {:.3}), q = ({:.3}, {:.3})",
            r.p[0], r.p[1], r.f[0], r.f[1], r.q[0], r.q[1]
        ),
    ))
}

fn decoherence_limit(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng(10);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (da, db) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let state = random::random_entangled_state(da, db, &mut rng);
        let weights = random::random_weights(db, &mut rng);
        let full = prospects::prospect_probabilities(&state, &weights, Normalization::Raw)?;
        let dephased = prospects::prospect_probabilities(&state.dephased(), &weights, Normalization::Raw)?;
        worst = worst.max(dephased.max_abs_q());
        let lambda = rng.gen::<f64>();
        let partial = prospects::prospect_probabilities(&state.decohered(lambda), &weights, Normalization::Raw)?;
        for n in 0..da {
            worst = worst.max((partial.q[n] - lambda * full.q[n]).abs()).max((partial.f[n] - full.f[n]).abs());
        }
    }
    Ok(verdict(worst, 1e-12, "200 random instances"))
}

fn quarter_law(_: &Ctx) -> Result<(bool, String)> {
    let mut exact = true;
    let mut worst = 0.0f64;
    let mut dists = vec![BetaPairDistribution::uniform()];
    for a in [0.3, 0.5, 1.0, 2.0, 5.0, 10.0] {
        dists.push(BetaPairDistribution::symmetric(a, a)?);
    }
    for d in &dists {
        let s = quarterlaw::q_split_closed(d);
        exact &= s.q_plus == 0.25 && s.q_minus == -0.25;
        worst = worst.max((s.q_plus - 0.25).abs()).max((s.q_minus + 0.25).abs());
    }
    Ok((exact, format!("uniform and α = β ∈ {{0.3, 0.5, 1, 2, 5, 10}}: max deviation {worst:.3e} (exact)")))
}

fn random_distribution(rng: &mut ChaCha8Rng) -> Result<BetaPairDistribution> {
    let mut shape = || if rng.gen_bool(0.3) { rng.gen_range(0.2..1.0) } else { rng.gen_range(1.0..8.0) };
    let (alpha, beta, mu, nu) = (shape(), shape(), shape(), shape());
    let lambda_plus = rng.gen_range(0.05..0.95);
    BetaPairDistribution::new(alpha, beta, mu, nu, lambda_plus, 1.0 - lambda_plus)
}

fn quarter_law_quadrature(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng(11);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = random_distribution(&mut rng)?;
        let closed = quarterlaw::q_split_closed(&d);
        let numeric = quarterlaw::q_split_numeric(&d, 1e-12)?;
        worst = worst.max((closed.q_plus - numeric.q_plus).abs()).max((closed.q_minus - numeric.q_minus).abs());
    }
    Ok(verdict(worst, 1e-8, "200 random shape sets, 30% with shapes < 1"))
}

fn density_normalization(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng(12);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let d = random_distribution(&mut rng)?;
        worst = worst.max((quarterlaw::pdf_integral(&d, 1e-12)? - 1.0).abs());
    }
    Ok(verdict(worst, 1e-8, "20 random shape sets"))
}

fn zero_mean_balance(_: &Ctx) -> Result<(bool, String)> {
    let d = BetaPairDistribution::new(2.0, 1.0, 4.0, 5.0, 0.4, 0.6)?;
    let s = quarterlaw::q_split_closed(&d);
    let mut worst = (s.q_plus - 0.4 * 2.0 / 3.0).abs();
    match quarterlaw::solve_balanced(2.0, 1.0, 0.4, 4.0, 5.0)? {
        Balance::Feasible(b) => worst = worst.max(quarterlaw::zero_mean_residual(&b)),
        Balance::Infeasible { residual } => return Ok((false, format!("no balancing λ₋, residual {residual:.3e}"))),
    }
    Ok(verdict(worst, 1e-12, "α=2, β=1, λ₊=0.4, μ=4, ν=5"))
}

fn critical_amplitude(_: &Ctx) -> Result<(bool, String)> {
    let bc = becsim::critical_amplitude(-0.9, 0.0)?;
    Ok(((bc - 0.28206).abs() < 5e-4, format!("b_c = {bc:.6}")))
}

fn energy_conservation(ctx: &Ctx) -> Result<(bool, String)> {
    let mut drifts = Vec::new();
    for b in [0.25, 0.5] {
        let traj = becsim::integrate_deterministic(&ctx.bec(b, 0.0, 1, 100.0))?;
        drifts.push(traj.energy_drift(b));
    }
    let worst = drifts.iter().copied().fold(0.0, f64::max);
    Ok((
        worst < 1e-6,
        format!("t <= 100, dt = {}: drift {:.3e} (b = 0.25), {:.3e} (b = 0.5)", ctx.cfg.dt, drifts[0], drifts[1]),
    ))
}

/// Error ratio between steps `h` and `h/2` against a fine reference.
pub fn rk4_error_ratio(b: f64) -> Result<f64> {
    let end = |dt: f64| -> Result<(f64, f64)> {
        let p = BecParams { b, sigma: 0.0, s0: -0.9, x0: 0.0, dt, t_max: 10.0, n_paths: 1, seed: 0 };
        let t = becsim::integrate_deterministic(&p)?;
        Ok((*t.s.last().expect("nonempty"), *t.x.last().expect("nonempty")))
    };
    let reference = end(1e-5)?;
    let err = |h: f64| -> Result<f64> {
        let (s, x) = end(h)?;
        Ok((s - reference.0).abs().max((x - reference.1).abs()))
    };
    Ok(err(0.1)? / err(0.05)?)
}

fn integrator_order(_: &Ctx) -> Result<(bool, String)> {
    let ratios = [rk4_error_ratio(0.25)?, rk4_error_ratio(0.5)?];
    let ok = ratios.iter().all(|r| (12.0..=20.0).contains(r));
    Ok((
        ok,
        format!(
            "dt 0.1 → 0.05 on [0, 10]: ratio {:.2} (b = 0.25), {:.2} (b = 0.5), observed order {:.2}",
            ratios[0],
            ratios[1],
            ratios[1].log2()
        ),
    ))
}

/// Whether the noiseless trajectory changes the sign of `s` on `[0, t_max]`.
pub fn crosses_zero(b: f64, dt: f64, t_max: f64) -> Result<bool> {
    let p = BecParams { b, sigma: 0.0, s0: -0.9, x0: 0.0, dt, t_max, n_paths: 1, seed: 0 };
    let t = becsim::integrate_deterministic(&p)?;
    let sign0 = t.s[0].signum();
    Ok(t.s.iter().any(|s| s.signum() != sign0 || *s == 0.0))
}

fn regime_dichotomy(ctx: &Ctx) -> Result<(bool, String)> {
    let below = crosses_zero(0.25, ctx.cfg.dt, 200.0)?;
    let above = crosses_zero(0.5, ctx.cfg.dt, 200.0)?;
    let regimes = (becsim::regime_classify(0.25, -0.9, 0.0)?, becsim::regime_classify(0.5, -0.9, 0.0)?);
    Ok((
        !below && above && regimes == (becsim::Regime::Rabi, becsim::Regime::Josephson),
        format!(
            "t <= 200: b = 0.25 ({:?}) crosses s = 0: {below}; b = 0.5 ({:?}) crosses: {above}",
            regimes.0, regimes.1
        ),
    ))
}

fn noiseless_interference(ctx: &Ctx) -> Result<(bool, String)> {
    let r = becsim::ensemble_interference(&ctx.bec(0.5, 0.0, 4, 10.0), ctx.cfg.stride)?;
    let worst = r.q1.iter().chain(&r.q2).fold(0.0f64, |m, q| m.max(q.abs()));
    Ok((worst == 0.0, format!("4 paths, t <= 10: max |q| = {worst:.3e} (exact zero)")))
}

fn max_antisymmetry(r: &EnsembleResult) -> f64 {
    r.q1.iter().zip(&r.q2).fold(0.0f64, |m, (a, b)| m.max((a + b).abs()))
}

fn antisymmetry_and_fluctuations(ctx: &Ctx) -> Result<(bool, String)> {
    let c = &ctx.cfg;
    let sub = becsim::ensemble_interference(&ctx.bec(0.25, c.sigma, c.paths, c.t_max), c.stride)?;
    let sup = becsim::ensemble_interference(&ctx.bec(0.5, c.sigma, c.paths, c.t_max), c.stride)?;
    let anti = max_antisymmetry(&sub).max(max_antisymmetry(&sup));
    let (v_sub, v_sup) = (sub.q1_time_variance(), sup.q1_time_variance());
    Ok((
        anti <= 1e-14 && v_sup > v_sub,
        format!(
            "σ = {}, {} paths: max |q₁+q₂| = {anti:.3e}; var q₁ = {v_sub:.4e} (b = 0.25) < {v_sup:.4e} (b = 0.5)",
            c.sigma, c.paths
        ),
    ))
}

/// `max_{t≤20} |q₁|` and its standard error for `σ = 0.2, 0.1, 0.05`.
pub fn sigma_sweep(b: f64, n_paths: usize, dt: f64, stride: usize, seed: u64) -> Result<Vec<(f64, f64, f64)>> {
    [0.2, 0.1, 0.05]
        .iter()
        .map(|&sigma| {
            let p = BecParams { b, sigma, s0: -0.9, x0: 0.0, dt, t_max: 20.0, n_paths, seed };
            let (m, se) = becsim::ensemble_interference(&p, stride)?.max_abs_q1_until(20.0);
            Ok((sigma, m, se))
        })
        .collect()
}

/// Each maximum is at least the next one minus their combined standard error.
pub fn decreasing_within_error(sweep: &[(f64, f64, f64)]) -> bool {
    sweep.windows(2).all(|w| w[0].1 >= w[1].1 - w[0].2.hypot(w[1].2))
}

fn noise_decoherence(ctx: &Ctx) -> Result<(bool, String)> {
    let c = &ctx.cfg;
    let mut ok = true;
    let mut detail = format!("{} paths, t <= 20:", c.sweep_paths);
    for b in [0.25, 0.5] {
        let sweep = sigma_sweep(b, c.sweep_paths, c.dt, c.stride, c.seed)?;
        ok &= decreasing_within_error(&sweep);
        let _ = write!(detail, " b = {b}:");
        for (sigma, m, se) in &sweep {
            let _ = write!(detail, " σ={sigma} {m:.4}±{se:.4}");
        }
        detail.push(';');
    }
    detail.pop();
    Ok((ok, detail))
}
