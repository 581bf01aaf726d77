//! Runs every acceptance criterion at its stated tolerance and prints one
//! PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use auction_tails::analytic::*;
use auction_tails::estimation::*;
use auction_tails::placement::PlacementModel;
use auction_tails::simulate::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Check = fn(&common::SmallBook) -> Result<(), String>;
type Criterion = (u32, &'static str, Option<u64>, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn pareto(a: f64, scale: f64) -> PlacementModel {
    PlacementModel::pareto(a, scale).expect("valid Pareto")
}

fn exact_oracle() -> Outcome {
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n_a in 1..=6u32 {
        for n_b in 1..=6u32 {
            for delta in -(n_b as i64) + 1..n_a as i64 {
                for &p_a in &grid {
                    for &p_b in &grid {
                        let got = match survival_lower_delta(p_a, p_b, n_a, n_b, delta) {
                            Ok(v) => v,
                            Err(e) => {
                                return outcome(
                                    false,
                                    format!("error at ({p_a}, {p_b}, {n_a}, {n_b}, {delta}): {e}"),
                                )
                            }
                        };
                        let want = common::enumerate_survival(p_a, p_b, n_a, n_b, delta);
                        worst = worst.max((got - want).abs());
                        cases += 1;
                    }
                }
            }
        }
    }
    outcome(
        worst <= 1e-12,
        format!("{cases} cases, max |error| {worst:.2e}"),
    )
}

fn monte_carlo() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 100_000;
    let mut worst = 0.0f64;
    let mut checks = 0;
    for k in 0..20u64 {
        let n_a = rng.gen_range(1..=6u32);
        let n_b = rng.gen_range(1..=6u32);
        let delta = rng.gen_range(-(n_b as i64) + 1..n_a as i64);
        let sell = pareto(rng.gen_range(0.5..3.0), rng.gen_range(0.5..2.0));
        let buy = pareto(rng.gen_range(0.5..3.0), rng.gen_range(0.5..2.0));
        let floor = match (&sell, &buy) {
            (PlacementModel::Pareto { scale: s, .. }, PlacementModel::Pareto { scale: b, .. }) => {
                s.max(*b)
            }
            _ => unreachable!(),
        };
        let config = SimulationConfig {
            n_auctions: n,
            seed: k,
            mode: MarketOrderMode::With,
            output: OutputRule::LowerClearingPrice,
            sell_placement: sell.clone(),
            buy_placement: buy.clone(),
            counts: CountsSpec::Fixed {
                sell_count: n_a,
                buy_count: n_b,
                imbalance: delta,
            },
        };
        let sample = match simulate_auctions(&config) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("config {k}: {e}")),
        };
        if sample.failures() > 0 {
            return outcome(
                false,
                format!("config {k}: {} failed auctions", sample.failures()),
            );
        }
        for factor in [1.05, 1.3, 2.0, 4.0, 10.0] {
            let m = floor * factor;
            let p = survival_lower_delta_tails(sell.survival(m), buy.survival(m), n_a, n_b, delta)
                .unwrap();
            let freq = sample.values.iter().filter(|&&x| x > m).count() as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let z = if se > 0.0 {
                (freq - p).abs() / se
            } else if freq == p {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
            checks += 1;
        }
    }
    outcome(
        worst <= 4.0,
        format!("{checks} thresholds over 20 configurations, max |z| {worst:.2}"),
    )
}

fn no_market_order_law() -> Outcome {
    let (sell, buy) = (pareto(1.0, 1.0), pareto(2.5, 1.0));
    let counts = CountsModel::uniform(1, 6, 0.5).unwrap();
    // T_A(M) = 1e-4
    let slope = local_loglog_slope(
        |m| mixture_survival(m, &sell, &buy, &counts, MarketOrderMode::Without),
        1e4,
        1.1,
    )
    .unwrap();
    let config = SimulationConfig {
        n_auctions: 1_000_000,
        seed: 1,
        mode: MarketOrderMode::Without,
        output: OutputRule::LowerClearingPrice,
        sell_placement: sell,
        buy_placement: buy,
        counts: CountsSpec::Uniform {
            min_count: 1,
            max_count: 6,
            c: 0.5,
        },
    };
    let sample = simulate_auctions(&config).unwrap();
    let fit = loglog_fit(
        &EmpiricalTail::right(&sample.values).unwrap(),
        FitWindow::ccdf_below(1e-3),
        false,
    )
    .unwrap();
    let exact_ok = (slope - 3.5).abs() <= 0.02 * 3.5;
    let mc_ok = (fit.exponent - 3.5).abs() <= 0.15 * 3.5;
    outcome(
        exact_ok && mc_ok,
        format!(
            "exact slope {slope:.4} (2%), fitted {:.3} on 1e6 auctions (15%)",
            fit.exponent
        ),
    )
}

fn market_order_law() -> Outcome {
    let (sell, buy) = (pareto(1.0, 1.0), pareto(3.0, 1.0));
    let counts = CountsModel::lattice(9, 0.25).unwrap();
    let slope = local_loglog_slope(
        |m| mixture_survival(m, &sell, &buy, &counts, MarketOrderMode::With),
        1e4,
        1.1,
    )
    .unwrap();
    let target = predict_exponents(1.0, 3.0, 0.25).unwrap().with_mo;
    let slope_ok = (slope - target).abs() <= 0.03 * target;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a_a = rng.gen_range(0.2..3.0);
        let a_b = a_a + rng.gen_range(0.01..4.0);
        let c = rng.gen_range(0.02..0.98);
        let brute = exponent_bruteforce(a_a, a_b, c, 50).unwrap();
        let closed = predict_exponents(a_a, a_b, c).unwrap().with_mo;
        worst = worst.max((brute - closed).abs() / closed);
    }
    outcome(
        slope_ok && worst <= 1e-12,
        format!("exact slope {slope:.4} vs {target} (3%), brute force max rel. diff {worst:.1e} on 1000 draws"),
    )
}

fn heavier_without() -> Outcome {
    let base = SimulationConfig {
        n_auctions: 300_000,
        seed: 0,
        mode: MarketOrderMode::With,
        output: OutputRule::LowerClearingPrice,
        sell_placement: pareto(1.0, 1.0),
        buy_placement: pareto(3.0, 1.0),
        counts: CountsSpec::Lattice {
            max_count: 9,
            c: 0.25,
        },
    };
    let fit = |cfg: &SimulationConfig| {
        let sample = simulate_auctions(cfg).unwrap();
        loglog_fit(
            &EmpiricalTail::right(&sample.values).unwrap(),
            FitWindow::ccdf_below(1e-3),
            false,
        )
        .unwrap()
        .exponent
    };
    let mut ordered = 0;
    let (mut sum_with, mut sum_without) = (0.0, 0.0);
    for seed in 0..50u64 {
        let with = SimulationConfig {
            seed,
            ..base.clone()
        };
        let a_with = fit(&with);
        let a_without = fit(&with.with_mode(MarketOrderMode::Without));
        sum_with += a_with;
        sum_without += a_without;
        if a_without < a_with {
            ordered += 1;
        }
    }
    outcome(
        ordered >= 48,
        format!(
            "{ordered}/50 replicates ordered, mean fitted {:.2} without vs {:.2} with",
            sum_without / 50.0,
            sum_with / 50.0
        ),
    )
}

fn published_arithmetic() -> Outcome {
    let p = predict_exponents(1.07, 2.37, 0.329).unwrap();
    let (no, with) = (format!("{:.2}", p.no_mo), format!("{:.2}", p.with_mo));
    outcome(
        no == "3.44" && with == "4.32",
        format!("no MO {no}, with MO {with}"),
    )
}

fn clearing_properties() -> Outcome {
    let checks: [(&str, Check); 4] = [
        ("volume maximization", common::check_volume_maximization),
        ("side swap", common::check_side_swap),
        ("matched pair", common::check_matched_pair),
        ("order split", common::check_split),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, check) in checks {
        for case in 0..10_000 {
            let book = common::SmallBook::random(&mut rng);
            if let Err(e) = check(&book) {
                return outcome(false, format!("{name} case {case}: {e}"));
            }
        }
    }
    outcome(true, "4 properties x 10000 random books")
}

fn estimator_calibration() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for (a, seed) in [(1.0, 1u64), (2.0, 2), (3.0, 3)] {
        let xs = sample_placement(
            &pareto(a, 1.0),
            100_000,
            &mut ChaCha8Rng::seed_from_u64(seed),
        );
        let fit = loglog_fit(
            &EmpiricalTail::right(&xs).unwrap(),
            FitWindow::Quantiles {
                start: 0.05,
                stop: 0.001,
            },
            false,
        )
        .unwrap();
        pass &= (fit.exponent - a).abs() <= 0.15;
        details.push(format!("a={a}: {:.3}", fit.exponent));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut points: Vec<(f64, f64)> = (0..500)
        .map(|_| {
            let x = rng.gen_range(-40..=40) as f64;
            (x, 0.25 * x + noise.sample(&mut rng))
        })
        .collect();
    for p in points.iter_mut().step_by(100) {
        p.1 += 500.0;
    }
    let c = estimate_c(&points).unwrap().c;
    pass &= (c - 0.25).abs() <= 0.02;
    details.push(format!("c: {c:.4}"));
    outcome(pass, details.join(", "))
}

fn pipeline_golden() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    if let Err(e) = common::golden::run_default(dir.path()) {
        return outcome(false, format!("pipeline error: {e}"));
    }
    if let Err(e) = common::golden::check(dir.path()) {
        return outcome(false, e);
    }
    match common::golden::planted_deviation(dir.path()) {
        Ok((a, c)) => outcome(
            a <= 0.15 && c <= 0.02,
            format!("reports byte-identical, max exponent error {a:.3}, max c error {c:.4}"),
        ),
        Err(e) => outcome(false, e),
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            1,
            "exact-formula oracle equivalence",
            Some(10),
            exact_oracle,
        ),
        (2, "Monte Carlo consistency", Some(120), monte_carlo),
        (
            3,
            "no-market-orders exponent law",
            Some(300),
            no_market_order_law,
        ),
        (4, "market-orders exponent law", Some(180), market_order_law),
        (
            5,
            "heavier tails without market orders",
            None,
            heavier_without,
        ),
        (
            6,
            "published exponent arithmetic",
            Some(1),
            published_arithmetic,
        ),
        (
            7,
            "clearing-engine properties",
            Some(60),
            clearing_properties,
        ),
        (8, "estimator calibration", Some(60), estimator_calibration),
        (9, "pipeline golden files", None, pipeline_golden),
    ];
    let filter: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= Duration::from_secs(b));
        let pass = out.pass && in_time;
        failed += !pass as usize;
        let limit = budget.map(|b| format!(", limit {b}s")).unwrap_or_default();
        println!(
            "{} [{id}] {name}: {} ({:.1}s{limit})",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
