//! The identity suite behind `verify`.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torus_dimer::crsf::enumerate_crsfs;
use torus_dimer::dimer::{
    all_duals, class_of, class_of_pair, enumerate_matchings, periods_with, temperley_back, temperley_forward, Frame,
    PeriodCycles,
};
use torus_dimer::laplacian::{determinant, forman_sum_over};
use torus_dimer::special::{
    dedekind_eta, poisson_identity_residual, theta_odd, theta_odd_product, torsion_heat_kernel_log_ratio, torsion_t,
};
use torus_dimer::transfer::{choose_cycles, verify_fred};
use torus_dimer::{Character, ConductanceProfile, HomologyClass, TemperleyanGraph, TorusGraph};

pub const CHECKS: [&str; 8] = ["forman", "temperley", "binom", "periods", "fred", "theta", "torsion", "poisson"];

pub struct Options {
    pub n: usize,
    pub frame: Frame,
}

pub struct Outcome {
    pub name: &'static str,
    pub instance: String,
    pub value: f64,
    pub tol: f64,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.value <= self.tol
    }
}

type CheckResult = torus_dimer::Result<Vec<Outcome>>;

fn builtin() -> torus_dimer::Result<Vec<(String, TorusGraph<f64>)>> {
    [(2, (0, 2)), (3, (0, 2)), (2, (1, 2))]
        .into_iter()
        .map(|(n, s)| {
            let g = TorusGraph::square(n, s, ConductanceProfile::Uniform)?;
            Ok((format!("{n}x{} shift {}", s.1, s.0), g))
        })
        .collect()
}

pub fn run(name: &str, opts: &Options) -> CheckResult {
    match name {
        "forman" => forman(),
        "temperley" => temperley(),
        "binom" => binom(),
        "periods" => periods(opts.frame),
        "fred" => fred(opts.n),
        "theta" => theta(),
        "torsion" => torsion(),
        "poisson" => poisson(),
        _ => unreachable!("unknown check {name}"),
    }
}

fn forman() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut out = Vec::new();
    for (label, g) in builtin()? {
        let crsfs = enumerate_crsfs(&g)?;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let chi = Character::new(rng.gen(), rng.gen());
            let lu = determinant(&g, &chi)?.value();
            worst = worst.max((lu - forman_sum_over(&g, &crsfs, &chi)).norm() / lu.norm());
        }
        out.push(Outcome { name: "forman", instance: label, value: worst, tol: 1e-10 });
    }
    Ok(out)
}

fn temperley() -> CheckResult {
    let mut out = Vec::new();
    for (label, g) in builtin()? {
        let t = TemperleyanGraph::new(&g)?;
        let mut bad = 0;
        for m in enumerate_matchings(&t)? {
            let (f, fd) = temperley_back(&t, &m)?;
            let same = temperley_forward(&t, &f, &fd)? == m;
            if !same || f.weight(&g) * fd.weight(t.dual()) != m.weight(&t) {
                bad += 1;
            }
        }
        out.push(Outcome { name: "temperley", instance: label, value: f64::from(bad), tol: 0.0 });
    }
    Ok(out)
}

// class weights over matchings against class weights over CRSF pairs
fn binom() -> CheckResult {
    let mut out = Vec::new();
    for (label, g) in builtin()? {
        let t = TemperleyanGraph::new(&g)?;
        let mut by_matching: BTreeMap<HomologyClass, f64> = BTreeMap::new();
        for m in enumerate_matchings(&t)? {
            *by_matching.entry(class_of(&t, &m)?).or_default() += m.weight(&t);
        }
        let mut by_pair: BTreeMap<HomologyClass, f64> = BTreeMap::new();
        for f in enumerate_crsfs(&g)? {
            for fd in all_duals(&t, &f)? {
                *by_pair.entry(class_of_pair(&f, &fd)?).or_default() += f.weight(&g);
            }
        }
        let worst = by_matching
            .keys()
            .chain(by_pair.keys())
            .map(|c| {
                let a = by_matching.get(c).copied().unwrap_or(0.0);
                let b = by_pair.get(c).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max);
        out.push(Outcome { name: "binom", instance: label, value: worst, tol: 1e-12 });
    }
    Ok(out)
}

// periods of the height form against the CRSF-pair class
fn periods(frame: Frame) -> CheckResult {
    let mut out = Vec::new();
    for (label, g) in builtin()? {
        let t = TemperleyanGraph::new(&g)?;
        let cycles = PeriodCycles::find(&g)?;
        let mut bad = 0;
        for m in enumerate_matchings(&t)? {
            if periods_with(&t, &m, &cycles, frame) != class_of(&t, &m)? {
                bad += 1;
            }
        }
        out.push(Outcome { name: "periods", instance: label, value: f64::from(bad), tol: 0.0 });
    }
    Ok(out)
}

fn fred(n: usize) -> CheckResult {
    let g = TorusGraph::square(n, (0, n as i64), ConductanceProfile::Uniform)?;
    let cp = choose_cycles(&g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let v: f64 = rng.gen();
        worst = worst.max(verify_fred(&g, &Character::new(rng.gen(), v), &Character::new(rng.gen(), v), &cp)?);
    }
    Ok(vec![Outcome { name: "fred", instance: format!("{n}x{n}"), value: worst, tol: 1e-8 }])
}

fn theta() -> CheckResult {
    let mut worst = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let tau = Complex::new(-0.45 + 0.1 * i as f64, 0.55 + 0.15 * j as f64);
            let w = Complex::new(0.05 * j as f64 - 0.2, 0.0) + tau * (0.08 * i as f64 - 0.35);
            let a = theta_odd(w, tau)?;
            worst = worst.max((a - theta_odd_product(w, tau)?).norm() / a.norm().max(1.0));
        }
    }
    let tau = Complex::new(0.1, 0.9);
    let inversion = (dedekind_eta(-tau.inv())? - (Complex::new(0.0, -1.0) * tau).sqrt() * dedekind_eta(tau)?).norm();
    Ok(vec![
        Outcome { name: "theta", instance: "sum vs product".into(), value: worst, tol: 1e-12 },
        Outcome { name: "theta", instance: "eta inversion".into(), value: inversion, tol: 1e-12 },
    ])
}

fn torsion() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let tau: Complex<f64> = Complex::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.7..1.5));
        let chi = Character::new(rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
        let chi_prime = Character::new(rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
        let lhs = torsion_heat_kernel_log_ratio(&chi, &chi_prime, tau)?;
        let rhs: f64 = 2.0 * (torsion_t(&chi_prime, tau)?.ln() - torsion_t(&chi, tau)?.ln());
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(vec![Outcome { name: "torsion", instance: "heat kernel".into(), value: worst, tol: 1e-6 }])
}

fn poisson() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let tau = Complex::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.5..2.0));
        worst = worst.max(poisson_identity_residual(&Character::new(rng.gen(), rng.gen()), tau)?);
    }
    Ok(vec![Outcome { name: "poisson", instance: "signed sum".into(), value: worst, tol: 1e-10 }])
}
