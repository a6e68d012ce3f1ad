//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::Command;
use std::time::Instant;

use qprob::becsim::{self, BecParams};
use qprob::events::DensityOperator;
use qprob::linalg::ComplexVector;
use qprob::prospects::{self, CompositeState, Normalization};
use qprob::quarterlaw::{self, BetaPairDistribution};
use qprob::random;
use qprob::uncertain::ModeWeights;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 1;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn critical_amplitude() -> Outcome {
    let bc = becsim::critical_amplitude(-0.9, 0.0).unwrap();
    outcome((bc - 0.28206).abs() < 5e-4, format!("b_c = {bc:.6} (target 0.28206 ± 5e-4)"))
}

fn quarter_law_closed() -> Outcome {
    let shapes = [0.3, 0.5, 1.0, 2.0, 5.0, 10.0];
    let mut dists = vec![BetaPairDistribution::uniform()];
    for &a in &shapes {
        for &m in &shapes {
            dists.push(BetaPairDistribution::symmetric(a, m).unwrap());
        }
    }
    let exact = dists.iter().all(|d| {
        let s = quarterlaw::q_split_closed(d);
        s.q_plus == 0.25 && s.q_minus == -0.25
    });
    outcome(exact, format!("{} symmetric configurations, q₊ = 0.25 and q₋ = -0.25 exactly", dists.len()))
}

fn quarter_law_quadrature() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut below_one = 0;
    for _ in 0..200 {
        let mut shape = || -> f64 {
            if rng.gen_bool(0.35) {
                rng.gen_range(0.15..1.0)
            } else {
                rng.gen_range(1.0..12.0)
            }
        };
        let (a, b, m, n) = (shape(), shape(), shape(), shape());
        if a.min(b).min(m).min(n) < 1.0 {
            below_one += 1;
        }
        let lp = rng.gen_range(0.05..0.95);
        let d = BetaPairDistribution::new(a, b, m, n, lp, 1.0 - lp).unwrap();
        let closed = quarterlaw::q_split_closed(&d);
        let numeric = quarterlaw::q_split_numeric(&d, 1e-12).unwrap();
        worst = worst.max((closed.q_plus - numeric.q_plus).abs()).max((closed.q_minus - numeric.q_minus).abs());
    }
    outcome(worst < 1e-8, format!("200 sets ({below_one} with a shape < 1): max |numeric - closed| = {worst:.3e}"))
}

fn zero_interference() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut product = 0.0f64;
    for i in 0..500 {
        let (da, db) = [(2, 2), (2, 3), (3, 3)][i % 3];
        let s = prospects::product_state(
            &random::random_mixed_state(da, &mut rng),
            &random::random_mixed_state(db, &mut rng),
        );
        let w = random::random_weights(db, &mut rng);
        product =
            product.max(prospects::prospect_probabilities(&s, &w, Normalization::Normalized).unwrap().max_abs_q());
    }
    let mut maxent = 0.0f64;
    for m in 2..=6 {
        let s = prospects::max_entangled_state(m).unwrap();
        for _ in 0..100 {
            let w = random::random_weights(m, &mut rng);
            for mode in [Normalization::Raw, Normalization::Normalized] {
                maxent = maxent.max(prospects::prospect_probabilities(&s, &w, mode).unwrap().max_abs_q());
            }
        }
    }
    outcome(
        product < 1e-12 && maxent < 1e-12,
        format!("max |q|: {product:.3e} over 500 product states, {maxent:.3e} over max-entangled M = 2..6"),
    )
}

fn measure_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let (da, db) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
        let state = if i % 2 == 0 {
            random::random_entangled_state(da, db, &mut rng)
        } else {
            CompositeState::new(random::random_mixed_state(da * db, &mut rng), da, db).unwrap()
        };
        let w = random::random_weights(db, &mut rng);
        let r = prospects::prospect_probabilities(&state, &w, Normalization::Normalized).unwrap();
        worst = worst.max(r.axiom_violation());
    }
    outcome(worst < 1e-10, format!("1000 entangled instances, worst axiom or bound violation {worst:.3e}"))
}

/// Dense reference: `Tr ρ |n⊗B><n⊗B|` and its diagonal part, built entry by entry.
fn dense_prospect(rho: &[[f64; 4]; 4], b: [f64; 2], n: usize) -> (f64, f64) {
    let mut v = [0.0; 4];
    v[2 * n] = b[0];
    v[2 * n + 1] = b[1];
    let mut p = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            p += v[i] * rho[i][j] * v[j];
        }
    }
    let f = b[0] * b[0] * rho[2 * n][2 * n] + b[1] * b[1] * rho[2 * n + 1][2 * n + 1];
    (p, f)
}

fn bell_like() -> Outcome {
    let psi = [0.5, 0.5, 0.5, -0.5];
    let mut rho = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            rho[i][j] = psi[i] * psi[j];
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let oracle: Vec<(f64, f64)> = (0..2).map(|n| dense_prospect(&rho, [h, h], n)).collect();

    let state =
        CompositeState::new(DensityOperator::pure(&ComplexVector::from_real(&psi).unwrap()).unwrap(), 2, 2).unwrap();
    let r = prospects::prospect_probabilities(&state, &ModeWeights::uniform(2).unwrap(), Normalization::Raw).unwrap();
    let expected = [(0.5, 0.25, 0.25), (0.0, 0.25, -0.25)];
    let mut worst = 0.0f64;
    for n in 0..2 {
        let (p, f, q) = expected[n];
        worst = worst
            .max((r.p[n] - p).abs())
            .max((r.f[n] - f).abs())
            .max((r.q[n] - q).abs())
            .max((r.p[n] - oracle[n].0).abs())
            .max((r.f[n] - oracle[n].1).abs())
            .max((r.q[n] - (oracle[n].0 - oracle[n].1)).abs());
    }
    outcome(
        worst < 1e-12,
        format!(
            "p = ({:.4}, {:.4}), f = ({:.4}, {:.4}), q = ({:.4}, {:.4}), max deviation {worst:.3e}",
            r.p[0], r.p[1], r.f[0], r.f[1], r.q[0], r.q[1]
        ),
    )
}

fn noiseless(b: f64, dt: f64, t_max: f64) -> BecParams {
    BecParams { b, sigma: 0.0, s0: -0.9, x0: 0.0, dt, t_max, n_paths: 1, seed: 0 }
}

fn final_state(b: f64, dt: f64) -> (f64, f64) {
    let t = becsim::integrate_deterministic(&noiseless(b, dt, 10.0)).unwrap();
    (*t.s.last().unwrap(), *t.x.last().unwrap())
}

fn deterministic_integrity() -> Outcome {
    let mut ok = true;
    let mut detail = String::new();
    for b in [0.25, 0.5] {
        let drift = becsim::integrate_deterministic(&noiseless(b, 1e-3, 100.0)).unwrap().energy_drift(b);
        let reference = final_state(b, 1e-5);
        let err = |h: f64| {
            let (s, x) = final_state(b, h);
            (s - reference.0).abs().max((x - reference.1).abs())
        };
        let order = (err(0.1) / err(0.05)).log2();
        ok &= drift < 1e-6 && (3.6..=4.4).contains(&order);
        detail.push_str(&format!("b = {b}: drift {drift:.2e}, order {order:.2}; "));
    }
    outcome(ok, detail.trim_end_matches("; ").to_string())
}

fn crosses_zero(b: f64, dt: f64) -> bool {
    let t = becsim::integrate_deterministic(&noiseless(b, dt, 200.0)).unwrap();
    t.s.iter().any(|&s| s >= 0.0)
}

fn regime_dichotomy() -> Outcome {
    let mut ok = true;
    for dt in [1e-3, 1e-4] {
        ok &= !crosses_zero(0.25, dt) && crosses_zero(0.5, dt);
    }
    outcome(ok, "t in [0, 200], dt = 1e-3 and 1e-4: b = 0.25 stays below s = 0, b = 0.5 crosses".into())
}

fn stochastic(b: f64, sigma: f64, n_paths: usize, t_max: f64) -> becsim::EnsembleResult {
    let p = BecParams { b, sigma, s0: -0.9, x0: 0.0, dt: 1e-3, t_max, n_paths, seed: SEED };
    becsim::ensemble_interference(&p, 100).unwrap()
}

fn stochastic_properties() -> Outcome {
    let sub = stochastic(0.25, 0.1, 2000, 100.0);
    let sup = stochastic(0.5, 0.1, 2000, 100.0);
    let anti =
        sub.q1.iter().zip(&sub.q2).chain(sup.q1.iter().zip(&sup.q2)).fold(0.0f64, |m, (a, b)| m.max((a + b).abs()));
    let (v_sub, v_sup) = (sub.q1_time_variance(), sup.q1_time_variance());
    let mut sweep_ok = true;
    let mut sweep = String::new();
    for b in [0.25, 0.5] {
        let maxima: Vec<(f64, f64)> =
            [0.2, 0.1, 0.05].iter().map(|&s| stochastic(b, s, 4000, 20.0).max_abs_q1_until(20.0)).collect();
        sweep_ok &= maxima.windows(2).all(|w| w[0].0 >= w[1].0 - w[0].1.hypot(w[1].1));
        sweep.push_str(&format!(" b = {b}: {:.4} > {:.4} > {:.4};", maxima[0].0, maxima[1].0, maxima[2].0));
    }
    outcome(
        anti <= 1e-14 && v_sup > v_sub && sweep_ok,
        format!(
            "(a) max |q₁+q₂| = {anti:.1e}; (b) var q₁ {v_sub:.3e} (b = 0.25) < {v_sup:.3e} (b = 0.5); (c) max_(t≤20) |q₁| for σ = 0.2, 0.1, 0.05:{}",
            sweep.trim_end_matches(';')
        ),
    )
}

fn verify_run(threads: &str) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_qprob"))
        .args(["verify", "--seed", "0"])
        .env("QPROB_THREADS", threads)
        .env_remove("QPROB_SEED")
        .output()
        .expect("qprob runs");
    (out.status.code(), out.stdout)
}

fn determinism() -> Outcome {
    let (code1, first) = verify_run("1");
    let (code2, second) = verify_run("3");
    outcome(
        code1 == Some(0) && code2 == Some(0) && first == second && !first.is_empty(),
        format!(
            "exit codes {code1:?}, {code2:?} with 1 and 3 workers; reports identical: {} ({} bytes)",
            first == second,
            first.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("critical amplitude", critical_amplitude),
        ("quarter law, closed form", quarter_law_closed),
        ("quarter law, quadrature", quarter_law_quadrature),
        ("zero-interference theorems", zero_interference),
        ("probability-measure axioms", measure_axioms),
        ("bell-like instance", bell_like),
        ("deterministic integrity", deterministic_integrity),
        ("regime dichotomy", regime_dichotomy),
        ("stochastic properties", stochastic_properties),
        ("determinism across workers", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        failures += usize::from(!o.passed);
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag}  {name}: {} [{:.1}s]", i + 1, o.detail, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
