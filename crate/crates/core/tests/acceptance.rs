//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one line; the process fails if any line fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torus_dimer::crsf::{enumerate_crsfs, mc_height_law};
use torus_dimer::dimer::{class_of, enumerate_matchings, enumeration_law, temperley_back, temperley_forward};
use torus_dimer::distribution::{check_monotone, convergence_sweep, height_law_exact};
use torus_dimer::laplacian::{det_spectral, determinant, forman_sum_over};
use torus_dimer::special::{
    poisson_identity_residual, theta_odd, theta_odd_product, torsion_heat_kernel_log_ratio, torsion_t,
};
use torus_dimer::transfer::{choose_cycles, op_norm_inf, poisson_matrices, verify_fred};
use torus_dimer::{Character, ConductanceProfile, HomologyClass, TemperleyanGraph, TorusGraph};

type Check = Result<String, String>;

fn sq(n: usize, shift: (i64, i64)) -> TorusGraph<f64> {
    TorusGraph::square(n, shift, ConductanceProfile::Uniform).expect("square torus")
}

fn random_chars(rng: &mut ChaCha8Rng, count: usize) -> Vec<Character<f64>> {
    (0..count).map(|_| Character::new(rng.gen(), rng.gen())).collect()
}

fn within(label: &str, value: f64, tol: f64) -> Check {
    let line = format!("{label} = {value:.3e} (tol {tol:.0e})");
    if value <= tol {
        Ok(line)
    } else {
        Err(line)
    }
}

// 1: forman_sum against LU determinants
fn forman() -> Check {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let base = sq(2, (0, 2));
    let random: Vec<f64> = (0..base.edge_count()).map(|_| rng.gen_range(0.1..2.0)).collect();
    let graphs = [sq(2, (0, 2)), sq(3, (0, 2)), base.with_conductances(&random).map_err(|e| e.to_string())?];
    let mut worst = 0.0f64;
    for g in &graphs {
        let crsfs = enumerate_crsfs(g).map_err(|e| e.to_string())?;
        for chi in random_chars(&mut rng, 20) {
            let lu = determinant(g, &chi).map_err(|e| e.to_string())?.value();
            let fs = forman_sum_over(g, &crsfs, &chi);
            worst = worst.max((lu - fs).norm() / lu.norm());
        }
    }
    within("max relative error", worst, TOL)
}

fn binomial(n: u32, k: i64) -> f64 {
    if k < 0 || k > n as i64 {
        return 0.0;
    }
    (0..k as u32).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

// 2: Temperley bijection, pair count and the binomial identity
fn temperley() -> Check {
    let g = sq(2, (0, 2));
    let t = TemperleyanGraph::new(&g).map_err(|e| e.to_string())?;
    let crsfs = enumerate_crsfs(&g).map_err(|e| e.to_string())?;
    let matchings = enumerate_matchings(&t).map_err(|e| e.to_string())?;

    // Z_{k+,k-,gamma}, keyed by the representative with canonical sign
    let mut z: BTreeMap<(HomologyClass, u32, u32), f64> = BTreeMap::new();
    let mut pair_count = 0u64;
    let mut pair_weight = 0.0;
    for f in &crsfs {
        let gamma = f.classes()[0].canonical_sign();
        let plus = f.classes().iter().filter(|&&c| c == gamma).count() as u32;
        let minus = f.cycle_count() as u32 - plus;
        if plus + minus != f.classes().iter().filter(|&&c| c == gamma || c == -gamma).count() as u32 {
            return Err("root cycles of one forest are not parallel".into());
        }
        *z.entry((gamma, plus, minus)).or_default() += f.weight(&g);
        pair_count += 1 << f.cycle_count();
        pair_weight += f.weight(&g) * f64::from(1u32 << f.cycle_count());
    }
    let matching_weight: f64 = matchings.iter().map(|m| m.weight(&t)).sum();
    if matchings.len() as u64 != pair_count || matching_weight != pair_weight {
        return Err(format!(
            "{} matchings (weight {matching_weight}) vs {pair_count} pairs (weight {pair_weight})",
            matchings.len()
        ));
    }

    let mut histogram: BTreeMap<HomologyClass, f64> = BTreeMap::new();
    for m in &matchings {
        let (f, fd) = temperley_back(&t, m).map_err(|e| e.to_string())?;
        let back = temperley_forward(&t, &f, &fd).map_err(|e| e.to_string())?;
        if &back != m || f.weight(&g) * fd.weight(t.dual()) != m.weight(&t) {
            return Err("Temperley round trip is not weight-preserving".into());
        }
        *histogram.entry(class_of(&t, m).map_err(|e| e.to_string())?).or_default() += m.weight(&t);
    }

    // Z_{k gamma} = sum Z_{k+,k-,gamma} C(k+ + k-, k + k-), k != 0
    let mut checked = 0;
    for (&class, &weight) in &histogram {
        if class.is_zero() {
            continue;
        }
        let mut predicted = 0.0;
        for (&(gamma, plus, minus), &zk) in &z {
            for sign in [1i64, -1] {
                let base = gamma.scale(sign);
                let (kp, km) = if sign == 1 { (plus, minus) } else { (minus, plus) };
                if let Some(k) = (1..=8).find(|&k| base.scale(k) == class) {
                    predicted += zk * binomial(kp + km, k + i64::from(km));
                }
            }
        }
        if predicted != weight {
            return Err(format!("class {class}: histogram {weight} vs binomial sum {predicted}"));
        }
        checked += 1;
    }
    Ok(format!(
        "{} matchings = {pair_count} CRSF pairs, total weight {matching_weight}, {checked} nonzero classes exact",
        matchings.len()
    ))
}

// 3: determinant ratios against Fredholm ratios
fn fred() -> Check {
    const TOL: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for n in [4, 8] {
        let g = sq(n, (0, n as i64));
        let cp = choose_cycles(&g).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let v: f64 = rng.gen();
            let chi = Character::new(rng.gen(), v);
            let chi_prime = Character::new(rng.gen(), v);
            worst = worst.max(verify_fred(&g, &chi, &chi_prime, &cp).map_err(|e| e.to_string())?);
        }
    }
    within("max log-ratio residual", worst, TOL)
}

// 4: contraction of the transfer operator
fn contraction() -> Check {
    const BOUND: f64 = 1.0 - 1e-3;
    let mut worst = 0.0f64;
    for n in [4, 8, 16] {
        let g = sq(n, (0, n as i64));
        let cp = choose_cycles(&g).map_err(|e| e.to_string())?;
        for u in [0.1, 0.25, 0.5, 0.75, 0.9] {
            for v in [0.0, 0.3, 0.5] {
                let tm = poisson_matrices(&g, &Character::new(u, v), &cp).map_err(|e| e.to_string())?;
                worst = worst.max(op_norm_inf(&tm));
            }
        }
    }
    let line = format!("max ||S||_inf = {worst:.6} (bound 1 - 1e-3)");
    if worst <= BOUND {
        Ok(line)
    } else {
        Err(line)
    }
}

// 5: Fourier-mode determinants against LU
fn spectral() -> Check {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for n in [2usize, 4, 8] {
        for shift in [(0, n as i64), (1, n as i64)] {
            let g = sq(n, shift);
            for chi in random_chars(&mut rng, 20) {
                let dense = determinant(&g, &chi).map_err(|e| e.to_string())?;
                let fast = det_spectral(n, shift, &chi).map_err(|e| e.to_string())?;
                worst = worst.max((fast.ratio(&dense) - 1.0).norm());
            }
        }
    }
    within("max relative difference", worst, TOL)
}

// 6: theta forms, Poisson summation, torsion against heat kernel
fn special() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut theta = 0.0f64;
    for i in 0..10 {
        let tau = Complex::new(-0.5 + 0.1 * i as f64, 0.6 + 0.15 * i as f64);
        for j in 0..10 {
            let w = Complex::new(0.1 * j as f64 - 0.45, 0.0) + tau * (0.09 * j as f64 - 0.4);
            let a = theta_odd(w, tau).map_err(|e| e.to_string())?;
            let b = theta_odd_product(w, tau).map_err(|e| e.to_string())?;
            theta = theta.max((a - b).norm() / a.norm().max(1.0));
        }
    }
    let mut poisson = 0.0f64;
    for _ in 0..10 {
        let tau: Complex<f64> = Complex::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.5..2.0));
        let chi = Character::new(rng.gen(), rng.gen());
        poisson = poisson.max(poisson_identity_residual(&chi, tau).map_err(|e| e.to_string())?);
    }
    let mut heat = 0.0f64;
    for _ in 0..5 {
        let tau: Complex<f64> = Complex::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.7..1.5));
        let chi = Character::new(rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
        let chi_prime = Character::new(rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
        let lhs = torsion_heat_kernel_log_ratio(&chi, &chi_prime, tau).map_err(|e| e.to_string())?;
        let rhs = 2.0
            * (torsion_t(&chi_prime, tau).map_err(|e| e.to_string())?.ln()
                - torsion_t(&chi, tau).map_err(|e| e.to_string())?.ln());
        heat = heat.max((lhs - rhs).abs());
    }
    let line =
        format!("theta {theta:.3e} (tol 1e-12), poisson {poisson:.3e} (tol 1e-10), heat kernel {heat:.3e} (tol 1e-6)");
    if theta <= 1e-12 && poisson <= 1e-10 && heat <= 1e-6 {
        Ok(line)
    } else {
        Err(line)
    }
}

// 7: Fourier inversion against enumeration
fn exact_law() -> Check {
    const TOL: f64 = 1e-10;
    let g = sq(2, (0, 2));
    let t = TemperleyanGraph::new(&g).map_err(|e| e.to_string())?;
    let oracle = enumeration_law(&t).map_err(|e| e.to_string())?;
    let law = height_law_exact(&g, 7).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (&c, &p) in &oracle {
        worst = worst.max((law.prob(c) - p).abs());
    }
    for (&c, &p) in &law.probs {
        worst = worst.max((oracle.get(&c).copied().unwrap_or(0.0) - p).abs());
    }
    within("max class difference", worst, TOL)
}

// 8: convergence to the discrete Gaussian at tau = i
fn convergence() -> Check {
    let rows = convergence_sweep(&[8, 16, 32, 64], Complex::new(0.0, 1.0), 9).map_err(|e| e.to_string())?;
    let tvs: Vec<String> = rows.iter().map(|r| format!("n={}: {:.4e}", r.n, r.tv)).collect();
    let line = format!("TV {} (slack 1e-3); tracked n=64 TV = {:.6e}", tvs.join(", "), rows[3].tv);
    if check_monotone(&rows, 1e-3).is_ok() && rows[3].tv < rows[0].tv {
        Ok(line)
    } else {
        Err(line)
    }
}

// 9: Monte Carlo against the exact law
fn monte_carlo() -> Check {
    let g = sq(2, (0, 2));
    let t = TemperleyanGraph::new(&g).map_err(|e| e.to_string())?;
    let exact = height_law_exact(&g, 7).map_err(|e| e.to_string())?;
    let mc = mc_height_law(&t, 100_000, 2024).map_err(|e| e.to_string())?;
    let mut worst = f64::NEG_INFINITY;
    let mut z = 0.0f64;
    for (&c, &p) in &exact.probs {
        let (q, se) = mc.get(c).map_or((0.0, 0.0), |e| (e.p, e.stderr));
        let sigma = se.max((p * (1.0 - p) / mc.samples as f64).sqrt());
        worst = worst.max((q - p).abs() - (3.0 * sigma + 0.005));
        if p > 1e-12 {
            z = z.max((q - p).abs() / sigma);
        }
    }
    for e in &mc.law {
        if exact.prob(HomologyClass::new(e.r, e.s)) == 0.0 && e.p > 0.005 {
            worst = worst.max(e.p - 0.005);
        }
    }
    let line = format!("max excess over 3 sigma + 0.005 = {worst:.3e}, largest z-score {z:.2}");
    if worst <= 0.0 {
        Ok(line)
    } else {
        Err(line)
    }
}

type Criterion = (&'static str, fn() -> Check, f64);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("Forman identity", forman, 10.0),
        ("Temperley bijection and binomial identity", temperley, 10.0),
        ("Fredholm ratio identity", fred, 60.0),
        ("transfer operator contraction", contraction, 60.0),
        ("spectral vs dense determinants", spectral, 30.0),
        ("special-function identities", special, 60.0),
        ("exact law vs enumeration", exact_law, 10.0),
        ("convergence to the discrete Gaussian", convergence, 1800.0),
        ("Monte Carlo consistency", monte_carlo, 60.0),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok(d) if secs <= *budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget")),
            Err(d) => (false, d),
        };
        failures += usize::from(!pass);
        println!(
            "criterion {}: {} {name}: {detail} [{secs:.2} s of {budget} s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
