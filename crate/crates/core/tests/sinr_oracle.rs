//! Closed-form SINR distributions against direct fading simulation.
//!
//! The mean received powers are rebuilt here from the hexagonal lattice in
//! axial coordinates, independently of the crate's layout code.

use ffr_core::analysis::{cond_cdf, AnalysisOptions, RegionCdf, SchedulerKind, SystemModel};
use ffr_core::channel::{avg_power_profile, SinrKernel};
use ffr_core::geometry::{Region, RegionBounds};
use ffr_core::rate::{CraParams, RateModel};
use ffr_core::FfrPartition;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Exp1};

const R_M: f64 = 500.0;
const R_0: f64 = 35.0;

fn hex_side() -> f64 {
    R_M / (3.0 * 3f64.sqrt() / (2.0 * std::f64::consts::PI)).sqrt()
}

/// Two-ring lattice sites as (x, y, co-channel on the edge band).
fn lattice() -> Vec<(f64, f64, bool)> {
    let a = 3f64.sqrt() * hex_side();
    let mut sites = Vec::new();
    for q in -2i32..=2 {
        for r in -2i32..=2 {
            let s = -q - r;
            let ring = q.abs().max(r.abs()).max(s.abs());
            if ring == 0 || ring > 2 {
                continue;
            }
            let x = a * (q as f64 + r as f64 / 2.0);
            let y = a * (r as f64 * 3f64.sqrt() / 2.0);
            // reuse-3 colouring: (q − r) mod 3
            let co_channel = (q - r).rem_euclid(3) == 0;
            sites.push((x, y, co_channel));
        }
    }
    sites
}

struct Link {
    signal: f64,
    interferers: Vec<f64>,
    noise: f64,
}

fn link(d: f64, theta: f64, band: Region, n_used: f64) -> Link {
    let pc = 10f64.powf((46.0 - 30.0) / 10.0) / (12.0 * n_used);
    let gain = |dist: f64| 10f64.powf((14.0 - 15.3 - 37.6 * dist.log10()) / 10.0);
    let (ux, uy) = (d * theta.cos(), d * theta.sin());
    let interferers = lattice()
        .into_iter()
        .filter(|&(_, _, co)| band == Region::Centre || co)
        .map(|(x, y, _)| pc * gain((x - ux).hypot(y - uy)))
        .collect();
    let noise = 10f64.powf((-174.0 - 30.0 + 7.0) / 10.0) * 15e3;
    Link {
        signal: pc * gain(d),
        interferers,
        noise,
    }
}

fn draw_sinr(l: &Link, rng: &mut StdRng) -> f64 {
    let s: f64 = Exp1.sample(rng);
    let i: f64 = l
        .interferers
        .iter()
        .map(|g| {
            g * {
                let h: f64 = Exp1.sample(rng);
                h
            }
        })
        .sum::<f64>();
    l.signal * s / (l.noise + i)
}

fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn lattice_oracle_matches_layout() {
    let sites = lattice();
    assert_eq!(sites.len(), 18);
    assert_eq!(sites.iter().filter(|s| s.2).count(), 6);
    let part = FfrPartition::from_zeta(0.7, 0.52, 100).unwrap();
    let system = SystemModel::lte_default();
    let p = avg_power_profile(
        200.0,
        0.4,
        Region::Edge,
        &system.radio,
        &system.geometry,
        &part,
    )
    .unwrap();
    let l = link(200.0, 0.4, Region::Edge, 68.0);
    let mut a = p.interferers.clone();
    let mut b = l.interferers.clone();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for (x, y) in a.iter().zip(&b) {
        assert!((x / y - 1.0).abs() < 1e-9);
    }
    assert!((p.signal / l.signal - 1.0).abs() < 1e-12);
    assert!((p.noise / l.noise - 1.0).abs() < 1e-12);
}

#[test]
fn conditional_cdf_matches_fading_draws() {
    let system = SystemModel::lte_default();
    let part = FfrPartition::from_zeta(0.7, 0.52, 100).unwrap();
    let mut rng = StdRng::seed_from_u64(20);
    for _ in 0..10 {
        let d = rng.random_range(R_0..R_M);
        let band = if rng.random_bool(0.5) {
            Region::Centre
        } else {
            Region::Edge
        };
        let profile =
            avg_power_profile(d, 0.0, band, &system.radio, &system.geometry, &part).unwrap();
        let l = link(d, 0.0, band, part.rbs_in_use() as f64);
        let mut samples: Vec<f64> = (0..100_000).map(|_| draw_sinr(&l, &mut rng)).collect();
        let ks = ks_distance(&mut samples, |x| profile.conditional_sinr_cdf(x).unwrap());
        assert!(ks <= 0.01, "d = {d}, {band:?}: KS = {ks}");
    }
}

#[test]
fn partial_fraction_route_agrees() {
    let system = SystemModel::lte_default();
    let part = FfrPartition::from_zeta(0.7, 0.52, 100).unwrap();
    for (d, theta, band) in [
        (40.0, 0.0, Region::Centre),
        (300.0, 0.5, Region::Centre),
        (480.0, 0.0, Region::Edge),
    ] {
        let p = avg_power_profile(d, theta, band, &system.radio, &system.geometry, &part).unwrap();
        for i in 0..200 {
            let x = 10f64.powf(-3.0 + 6.0 * i as f64 / 199.0);
            let a = p.conditional_sinr_cdf(x).unwrap();
            let b = p.conditional_sinr_cdf_partial_fractions(x).unwrap();
            assert!((a - b).abs() < 1e-6, "d = {d}, x = {x}: {a} vs {b}");
        }
    }
}

/// Users of a region drawn from the area density, all at `θ = 0`.
fn scheduled_sinr_samples(scheduler: SchedulerKind, k: usize, n: usize, seed: u64) -> Vec<f64> {
    let system = SystemModel::lte_default();
    let part = FfrPartition::from_zeta(0.7, 0.52, 100).unwrap();
    let upper = 0.7 * R_M;
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let users: Vec<(f64, f64)> = (0..k)
                .map(|_| {
                    let u: f64 = rng.random();
                    let d = (R_0 * R_0 + u * (upper * upper - R_0 * R_0)).sqrt();
                    let l = link(d, 0.0, Region::Centre, part.rbs_in_use() as f64);
                    (d, draw_sinr(&l, &mut rng))
                })
                .collect();
            match scheduler {
                SchedulerKind::Msinr => users.iter().map(|u| u.1).fold(0.0, f64::max),
                SchedulerKind::Rr => users[0].1,
                // rank-based selection: each user's SINR quantile is i.i.d. uniform
                SchedulerKind::Pf => {
                    let quantile = |&(d, g): &(f64, f64)| {
                        avg_power_profile(
                            d,
                            0.0,
                            Region::Centre,
                            &system.radio,
                            &system.geometry,
                            &part,
                        )
                        .unwrap()
                        .conditional_sinr_cdf(g)
                        .unwrap()
                    };
                    let best = users
                        .iter()
                        .max_by(|a, b| quantile(a).partial_cmp(&quantile(b)).unwrap())
                        .unwrap();
                    best.1
                }
            }
        })
        .collect()
}

#[test]
fn scheduler_output_cdfs_match_simulation() {
    let system = SystemModel::lte_default();
    let part = FfrPartition::from_zeta(0.7, 0.52, 100).unwrap();
    let region = system.region_cdf(Region::Centre, &part).unwrap().unwrap();
    for (i, s) in SchedulerKind::ALL.into_iter().enumerate() {
        let mut samples = scheduled_sinr_samples(s, 4, 100_000, 40 + i as u64);
        let ks = ks_distance(&mut samples, |x| cond_cdf(x, 4, s, &region).unwrap());
        assert!(ks <= 0.02, "{s:?}: KS = {ks}");
    }
}

/// `E1(x)` by its power series, adequate for `x < 5`.
fn exp_integral_e1(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        sum -= term / k as f64;
    }
    -0.577_215_664_901_532_9 - x.ln() + sum
}

#[test]
fn rayleigh_ergodic_capacity() {
    // no interference, mean SNR 10 at a single distance
    let kernel = SinrKernel {
        noise_ratio: 0.1,
        interference_ratios: Vec::new(),
    };
    let bounds = RegionBounds {
        region: Region::Centre,
        lower: 100.0,
        upper: 100.0,
    };
    let bb = 180e3;
    let region = RegionCdf::from_parts(
        bounds,
        bb,
        vec![1.0],
        vec![kernel],
        &AnalysisOptions::default(),
    )
    .unwrap();
    let cra = RateModel::Cra(CraParams::new(1.0, 1.0 / 15e3).unwrap());
    let (eta, err) = ffr_core::rb_throughput(1, SchedulerKind::Rr, &cra, &region).unwrap();

    let s = 0.1f64;
    let closed = bb * std::f64::consts::LOG2_E * s.exp() * exp_integral_e1(s);
    assert!((eta - closed).abs() <= 1e-7 * closed, "{eta} vs {closed}");
    assert!(err < 1e-6 * closed);

    let mut rng = StdRng::seed_from_u64(5);
    let n = 1_000_000;
    let mc: f64 = (0..n)
        .map(|_| {
            let h: f64 = Exp1.sample(&mut rng);
            (1.0 + h / s).log2()
        })
        .sum::<f64>()
        / n as f64;
    assert!((bb * mc - closed).abs() <= 0.005 * closed);
}
