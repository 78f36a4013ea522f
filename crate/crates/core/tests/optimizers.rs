use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trussopt::baselines::{De, DeParams, Pso, PsoParams};
use trussopt::benchmarks::load_problem;
use trussopt::objective::Mode;
use trussopt::optimizer::{FnObjective, Objective, RunRecord};
use trussopt::sfoa::{quantized_uniform, Attraction, Sfoa, SfoaParams, SwarmState};
use trussopt::Execution;

const PROBLEMS: [&str; 3] = ["10bar", "15bar", "25bar"];

fn check_record(r: &RunRecord, budget: usize) {
    assert!(r.evaluations <= budget, "{} > {budget}", r.evaluations);
    assert!(!r.history.is_empty());
    for w in r.history.windows(2) {
        assert!(w[1] <= w[0], "history rose {} -> {}", w[0], w[1]);
    }
    // The record may prefer a feasible design over a lower penalized one.
    assert!(*r.history.last().unwrap() <= r.best_penalized);
}

fn bytes(r: &RunRecord) -> String {
    serde_json::to_string(r).unwrap()
}

#[test]
fn optimizer_contracts_on_benchmarks() {
    let start = Instant::now();
    for id in PROBLEMS {
        let p = load_problem(id).unwrap();
        let obj = p.objective(Mode::Discrete).unwrap();
        let sfoa = Sfoa::new(p.sfoa_params()).unwrap();
        let de = De::new(p.de_params()).unwrap();
        let pso = Pso::new(p.pso_params()).unwrap();
        for seed in 0..20 {
            let (r, trace) = sfoa.run_traced(&obj, seed);
            check_record(&r, sfoa.params().budget);
            assert_eq!(bytes(&r), bytes(&sfoa.run(&obj, seed)));
            assert!(trace.radius.iter().all(|&m| m > 0.0));
            for w in trace.radius.windows(2) {
                assert!(w[1] <= w[0]);
            }

            let r = de.run(&obj, seed);
            check_record(&r, de.params().budget);
            assert_eq!(bytes(&r), bytes(&de.run(&obj, seed)));

            let r = pso.run(&obj, seed);
            check_record(&r, pso.params().budget);
            assert_eq!(bytes(&r), bytes(&pso.run(&obj, seed)));
        }
    }
    assert!(start.elapsed().as_secs_f64() < 60.0, "took {:?}", start.elapsed());
}

fn sphere() -> FnObjective<impl Fn(&[f64]) -> f64 + Sync> {
    FnObjective::new(vec![-5.0; 2], vec![5.0; 2], |x: &[f64]| x.iter().map(|v| v * v).sum())
}

#[test]
fn de_solves_sphere() {
    let de = De::new(DeParams {
        population: 12,
        crossover: 0.9,
        mutation: 0.5,
        budget: 2000,
    })
    .unwrap();
    let obj = sphere();
    let hits = (0..100).filter(|&s| de.run(&obj, s).best_penalized < 1e-4).count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn pso_solves_sphere() {
    let pso = Pso::new(PsoParams::new(12, 2000)).unwrap();
    let obj = sphere();
    let hits = (0..100).filter(|&s| pso.run(&obj, s).best_penalized < 1e-3).count();
    assert!(hits >= 90, "{hits}/100");
}

#[test]
fn degenerate_de_is_still_monotone() {
    let de = De::new(DeParams {
        population: 8,
        crossover: 0.0,
        mutation: 0.0,
        budget: 400,
    })
    .unwrap();
    let r = de.run(&sphere(), 3);
    check_record(&r, 400);
}

#[test]
fn quantized_mean_is_centred() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 100_000;
    let mean = (0..n).map(|_| quantized_uniform(&mut rng, 10)).sum::<f64>() / n as f64;
    assert!(mean.abs() <= 0.02, "{mean}");
}

#[test]
fn initial_designs_lie_within_bounds() {
    let p = load_problem("25bar").unwrap();
    let (lo, hi) = (p.space.lower(), p.space.upper());
    let x0: Vec<f64> = lo.iter().zip(hi).map(|(l, u)| 0.5 * (l + u)).collect();
    let params = p.sfoa_params();
    for seed in 0..1000 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = SwarmState::init(&params, &x0, &mut rng);
        for d in s.designs(lo, hi) {
            for (j, v) in d.iter().enumerate() {
                assert!(*v >= lo[j] && *v <= hi[j]);
            }
        }
    }
}

fn dispersion(s: &SwarmState) -> f64 {
    let (n, d) = (s.population(), s.x[0].len());
    let mut total = 0.0;
    let mut count = 0;
    for a in 0..n {
        for b in a + 1..n {
            for j in 0..d {
                total += (s.x[a][j] - s.x[b][j]).abs() + (s.y[a][j] - s.y[b][j]).abs();
                count += 2;
            }
        }
    }
    total / count as f64
}

#[test]
fn dispersion_scales_with_radius() {
    let params = SfoaParams::new(10, 2000);
    let x0 = vec![10.0; 4];
    let (mut full, mut half) = (0.0, 0.0);
    for seed in 0..1000 {
        for (radius, acc) in [(0.8, &mut full), (0.4, &mut half)] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = SwarmState::init(&params, &x0, &mut rng);
            s.commit((0..10).map(|i| i as f64).collect());
            s.select_centre();
            s.radius = radius;
            s.reposition(&params, &mut rng);
            *acc += dispersion(&s);
        }
    }
    let ratio = full / half;
    assert!((ratio - 2.0).abs() < 1e-6, "{ratio}");
}

#[test]
fn best_only_draws_no_random_fly() {
    let params = SfoaParams::best_only(6, 600);
    assert_eq!(params.attraction, Attraction::BestOnly);
    let x0 = vec![3.0; 5];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut s = SwarmState::init(&params, &x0, &mut rng);
    s.commit(vec![4.0, 2.0, 5.0, 1.0, 3.0, 6.0]);
    s.select_centre();
    let mut expected = rng.clone();
    s.reposition(&params, &mut rng);
    // Exactly one quantized draw per coordinate, X and Y.
    for _ in 0..2 * 6 * 5 {
        quantized_uniform(&mut expected, params.resolution);
    }
    assert_eq!(rng, expected);

    let spontaneous = SfoaParams { attraction: Attraction::Spontaneous, ..params };
    let mut other = expected.clone();
    s.reposition(&spontaneous, &mut other);
    assert_ne!(other, {
        let mut e = expected.clone();
        for _ in 0..2 * 6 * 5 {
            quantized_uniform(&mut e, params.resolution);
        }
        e
    });
}

#[test]
fn execution_modes_agree() {
    let p = load_problem("10bar").unwrap();
    let obj = p.objective(Mode::Discrete).unwrap();
    for seed in [0, 7] {
        let a = Sfoa::new(p.sfoa_params()).unwrap().with_execution(Execution::Sequential).run(&obj, seed);
        let b = Sfoa::new(p.sfoa_params()).unwrap().with_execution(Execution::Parallel).run(&obj, seed);
        assert_eq!(bytes(&a), bytes(&b));
        let a = De::new(p.de_params()).unwrap().with_execution(Execution::Sequential).run(&obj, seed);
        let b = De::new(p.de_params()).unwrap().with_execution(Execution::Parallel).run(&obj, seed);
        assert_eq!(bytes(&a), bytes(&b));
        let a = Pso::new(p.pso_params()).unwrap().with_execution(Execution::Sequential).run(&obj, seed);
        let b = Pso::new(p.pso_params()).unwrap().with_execution(Execution::Parallel).run(&obj, seed);
        assert_eq!(bytes(&a), bytes(&b));
    }
}

#[test]
fn evaluations_are_counted_by_the_objective() {
    let p = load_problem("10bar").unwrap();
    let obj = p.objective(Mode::Discrete).unwrap();
    let r = Sfoa::new(SfoaParams::new(10, 95)).unwrap().run(&obj, 1);
    assert_eq!(r.evaluations, 90);
    assert_eq!(obj.evaluations(), 90);
    assert_eq!(obj.dimension(), 10);
}
