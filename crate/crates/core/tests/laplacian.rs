use std::collections::{BTreeMap, HashMap};

use num_complex::Complex;
use proptest::prelude::*;

use torus_dimer::crsf::{enumerate_crsfs, enumerate_vector_fields, wilson_sample};
use torus_dimer::dimer::{enumerate_matchings, temperley_back};
use torus_dimer::distribution::zhat;
use torus_dimer::laplacian::{assemble, determinant, forman_sum_over};
use torus_dimer::{Character, ConductanceProfile, Crsf, TemperleyanGraph, TorusGraph};

fn lattice(n: usize, shift: (i64, i64)) -> TorusGraph<f64> {
    TorusGraph::square(n, shift, ConductanceProfile::Uniform).unwrap()
}

fn random_conductances(g: &TorusGraph<f64>, seed: u64) -> TorusGraph<f64> {
    // small LCG, enough for test weights
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let c: Vec<f64> = (0..g.edge_count())
        .map(|_| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            0.2 + (x >> 11) as f64 / (1u64 << 53) as f64 * 1.8
        })
        .collect();
    g.with_conductances(&c).unwrap()
}

// c'(e) = c(reverse e)
fn reversed(g: &TorusGraph<f64>) -> TorusGraph<f64> {
    let c: Vec<f64> = (0..g.edge_count()).map(|e| g.edge(g.reverse(e)).conductance).collect();
    g.with_conductances(&c).unwrap()
}

#[test]
fn laplacian_is_adjoint_to_reversed_graph() {
    let g = random_conductances(&lattice(3, (1, 3)), 4);
    let chi = Character::new(0.23, 0.61);
    let m = assemble(&g, &chi);
    let adj = assemble(&reversed(&g), &chi).conj_transpose();
    let transposed_conj = {
        let r = assemble(&reversed(&g), &chi.conj());
        torus_dimer::CMatrix::from_fn(r.rows(), r.cols(), |i, j| r[(j, i)])
    };
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j {
                assert!((m[(i, j)] - adj[(i, j)]).norm() < 1e-15);
                assert!((m[(i, j)] - transposed_conj[(i, j)]).norm() < 1e-15);
            }
        }
    }
    // the diagonal holds out-conductances, so full equality needs symmetry
    let s = lattice(3, (1, 3));
    let m = assemble(&s, &chi);
    assert!(m.max_abs_diff(&assemble(&reversed(&s), &chi).conj_transpose()) < 1e-15);
    assert!(m.max_abs_diff(&m.conj_transpose()) < 1e-15);
}

// (i, j) -> (-i, -j) on a square torus; edge 4v + d goes to 4v' + (d + 2) mod 4
fn point_reflection(n: usize, shift: (i64, i64), f: &Crsf, g: &TorusGraph<f64>) -> Crsf {
    let (sx, sy) = shift;
    let ni = n as i64;
    let image = |v: usize| {
        let (i, j) = ((v % n) as i64, (v / n) as i64);
        let (x, y) = (-i, -j);
        let b = y.div_euclid(sy);
        let xr = (x - b * sx).rem_euclid(ni);
        ((y - b * sy) * ni + xr) as usize
    };
    let mut choice = vec![0; g.vertex_count()];
    for (v, &e) in f.choice().iter().enumerate() {
        choice[image(v)] = 4 * image(v) + (e % 4 + 2) % 4;
    }
    Crsf::from_choice(g, choice).unwrap()
}

#[test]
fn point_reflection_negates_crsf_classes() {
    for (n, shift) in [(2, (0, 2)), (3, (1, 2)), (2, (1, 3))] {
        let g = lattice(n, shift);
        let crsfs = enumerate_crsfs(&g).unwrap();
        let set: HashMap<Vec<usize>, &Crsf> = crsfs.iter().map(|f| (f.choice().to_vec(), f)).collect();
        for f in &crsfs {
            let r = point_reflection(n, shift, f, &g);
            assert!(set.contains_key(r.choice()), "image is not an incompressible CRSF");
            assert_eq!(r.total_class(), -f.total_class());
            assert_eq!(r.weight(&g), f.weight(&g));
        }
    }
}

#[test]
fn contractible_fields_contribute_nothing() {
    let g = random_conductances(&lattice(2, (1, 2)), 9);
    let all = enumerate_vector_fields(&g).unwrap();
    let incompressible = enumerate_crsfs(&g).unwrap();
    assert!(all.len() > incompressible.len());
    for (u, v) in [(0.1, 0.9), (0.5, 0.5), (0.37, 0.0)] {
        let chi = Character::new(u, v);
        let a = forman_sum_over(&g, &all, &chi);
        let b = forman_sum_over(&g, &incompressible, &chi);
        assert!((a - b).norm() <= 1e-13 * b.norm());
    }
}

#[test]
fn forman_holds_for_asymmetric_conductances() {
    let g = random_conductances(&lattice(3, (0, 2)), 17);
    let crsfs = enumerate_crsfs(&g).unwrap();
    for (u, v) in [(0.05, 0.4), (0.5, 0.0), (0.81, 0.19)] {
        let chi = Character::new(u, v);
        let lu = determinant(&g, &chi).unwrap().value();
        assert!((lu - forman_sum_over(&g, &crsfs, &chi)).norm() <= 1e-10 * lu.norm());
    }
}

#[test]
fn sampler_passes_chi_square() {
    let g = lattice(2, (0, 2));
    let crsfs = enumerate_crsfs(&g).unwrap();
    let total: f64 = crsfs.iter().map(|f| f.weight(&g)).sum();
    let samples = 100_000u64;
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    for seed in 0..samples {
        *counts.entry(wilson_sample(&g, 1_000_000 + seed).unwrap().choice().to_vec()).or_default() += 1;
    }
    assert_eq!(counts.values().sum::<u64>(), samples);
    let mut stat = 0.0;
    for f in &crsfs {
        let expected = samples as f64 * f.weight(&g) / total;
        let got = *counts.get(f.choice()).unwrap_or(&0) as f64;
        stat += (got - expected).powi(2) / expected;
    }
    // Wilson-Hilferty upper 1e-3 quantile of chi-square
    let df = (crsfs.len() - 1) as f64;
    let z = 3.090_232;
    let a = 2.0 / (9.0 * df);
    let critical = df * (1.0 - a + z * a.sqrt()).powi(3);
    assert!(stat < critical, "chi-square {stat} exceeds {critical} with {df} degrees of freedom");
}

// Split by root-cycle count, Zhat is the Forman sum with odd powers of the
// cycle characters negated, and equals the dimer sum over the same forests.
#[test]
fn zhat_negates_odd_powers_of_cycle_characters() {
    let g = random_conductances(&lattice(2, (1, 2)), 3);
    let t = TemperleyanGraph::new(&g).unwrap();
    let crsfs = enumerate_crsfs(&g).unwrap();
    let mut by_k: BTreeMap<usize, Vec<Crsf>> = BTreeMap::new();
    for f in crsfs {
        by_k.entry(f.cycle_count()).or_default().push(f);
    }
    let matchings = enumerate_matchings(&t).unwrap();
    for (u, v) in [(0.12, 0.34), (0.5, 0.25), (0.9, 0.6)] {
        let chi = Character::new(u, v);
        let mut zhat_total = Complex::new(0.0, 0.0);
        for (&k, fs) in &by_k {
            let det_part = |c: &Character<f64>| forman_sum_over(&g, fs, c);
            let mut combo = -det_part(&chi);
            for (du, dv) in [(false, false), (true, false), (false, true), (true, true)] {
                combo += det_part(&chi.half_shift(du, dv)) * 0.5;
            }
            // the same part with every chi(gamma) replaced by -chi(gamma)
            let flipped: Complex<f64> = fs
                .iter()
                .map(|f| f.classes().iter().fold(Complex::new(f.weight(&g), 0.0), |acc, &c| acc * (1.0 + chi.eval(c))))
                .sum();
            assert!((combo - flipped).norm() < 1e-12, "k = {k}: {combo} vs {flipped}");
            // dimer side restricted to matchings whose primal forest has k cycles
            let dimers: Complex<f64> = matchings
                .iter()
                .filter_map(|m| {
                    let (f, fd) = temperley_back(&t, m).unwrap();
                    (f.cycle_count() == k).then(|| {
                        let class = torus_dimer::dimer::class_of_pair(&f, &fd).unwrap();
                        chi.eval(class) * m.weight(&t)
                    })
                })
                .sum();
            assert!((combo - dimers).norm() < 1e-12, "k = {k}: {combo} vs {dimers}");
            zhat_total += combo;
        }
        let z = zhat(&g, &chi).unwrap().value();
        assert!((z - zhat_total).norm() < 1e-12 * z.norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn det_is_periodic_in_the_character(u in 0.0f64..1.0, v in 0.0f64..1.0, du in -3i32..4, dv in -3i32..4) {
        let g = lattice(3, (1, 3));
        let a = determinant(&g, &Character::new(u, v)).unwrap();
        let b = determinant(&g, &Character::new(u + f64::from(du), v + f64::from(dv))).unwrap();
        prop_assert!((a.ratio(&b) - 1.0).norm() < 1e-10);
    }

    #[test]
    fn nontrivial_det_is_nonzero(u in 0.0f64..1.0, v in 0.0f64..1.0, seed in 0u64..1000) {
        prop_assume!(u.min(1.0 - u).max(v.min(1.0 - v)) > 1e-3);
        let g = random_conductances(&lattice(4, (0, 3)), seed);
        let d = determinant(&g, &Character::new(u, v)).unwrap();
        prop_assert!(!d.is_zero() && d.value().norm() > 1e-12);
    }
}
