mod common;

use common::*;
use permwalk::inference::{binomial, DEFAULT_ENUMERATION_LIMIT};
use permwalk::{
    average_twin_correlation, average_twin_correlation_field, direct_t, exact_enumeration_pvalue, heritability_index,
    naive_mc_pvalue, run_walks_field, walk_pvalue, Comparison, FieldState, FieldTest, PairedState, RandomStream, Side,
    TwoSampleState, Walk, WalkPlan,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi2_critical(df: usize, significance: f64) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - significance)
}

#[test]
fn between_group_sampler_is_uniform() {
    let mut rng = RandomStream::new(2024);
    let mut counts = [0u64; 4];
    for _ in 0..1_000_000 {
        let w = Walk::sample(&mut rng, 2, 2).unwrap();
        counts[w.i * 2 + w.j] += 1;
    }
    for c in counts {
        let freq = c as f64 / 1e6;
        assert!((freq - 0.25).abs() < 0.01, "{counts:?}");
    }
    assert!(chi_square_uniform(&counts) < chi2_critical(3, 0.001));
}

fn stationarity(m: usize, n: usize, seed: u64) {
    let mut rng = RandomStream::new(seed);
    let x = gaussian(&mut rng, m, 0.0);
    let y = gaussian(&mut rng, n, 0.0);
    let mut field = FieldState::new(vec![TwoSampleState::new(x, y).unwrap()]).unwrap();
    let l = m + n;
    // index every m-subset mask
    let mut index = vec![usize::MAX; 1 << l];
    let mut next = 0;
    for (mask, slot) in index.iter_mut().enumerate() {
        if mask.count_ones() as usize == m {
            *slot = next;
            next += 1;
        }
    }
    assert_eq!(next as u128, binomial(l as u64, m as u64).unwrap());
    let mut counts = vec![0u64; next];
    let mut chain = RandomStream::new(seed);
    for walk in 1..=1_000_000u64 {
        field.step(&mut chain);
        if walk % 50 == 0 {
            let mask = field.slots()[..m].iter().fold(0usize, |acc, &s| acc | 1 << s);
            counts[index[mask]] += 1;
        }
    }
    let chi2 = chi_square_uniform(&counts);
    assert!(chi2 < chi2_critical(next - 1, 0.001), "chi2 {chi2} over {next} cells");
}

#[test]
fn long_chains_are_uniform_over_assignments() {
    stationarity(4, 4, 1);
    stationarity(3, 5, 2);
    stationarity(2, 3, 3);
}

#[test]
fn enumeration_of_four_points() {
    let (x, y) = ([1.0, 2.0], [3.0, 4.0]);
    let strict = exact_enumeration_pvalue(&x, &y, direct_t, Side::Greater, Comparison::Strict, 10).unwrap();
    let geq = exact_enumeration_pvalue(&x, &y, direct_t, Side::Greater, Comparison::AtLeast, 10).unwrap();
    let (bf_gt, bf_geq) = brute_force_pvalue(&x, &y, textbook_t);
    assert_eq!(strict.assignments, 6);
    assert_eq!(strict.p_value, bf_gt);
    assert_eq!(geq.p_value, bf_geq);
    assert_eq!(strict.exceeding, 5);
}

#[test]
fn enumeration_matches_bitmask_oracle() {
    let mut rng = RandomStream::new(77);
    for (m, n) in [(6, 6), (4, 7), (5, 3)] {
        let x = gaussian(&mut rng, m, 0.4);
        let y = gaussian(&mut rng, n, 0.0);
        let (bf_gt, bf_geq) = brute_force_pvalue(&x, &y, textbook_t);
        let gt = exact_enumeration_pvalue(&x, &y, direct_t, Side::Greater, Comparison::Strict, 1 << 20).unwrap();
        let geq = exact_enumeration_pvalue(&x, &y, direct_t, Side::Greater, Comparison::AtLeast, 1 << 20).unwrap();
        assert!((gt.p_value - bf_gt).abs() < 1e-12);
        assert!((geq.p_value - bf_geq).abs() < 1e-12);
        // no ties among assignments besides the observed one itself
        assert!((gt.p_value - (geq.p_value - 1.0 / gt.assignments as f64)).abs() < 1e-12);
        // side less mirrors side greater for strict counts
        let less = exact_enumeration_pvalue(&x, &y, direct_t, Side::Less, Comparison::AtLeast, 1 << 20).unwrap();
        assert!((less.p_value - (1.0 - gt.p_value)).abs() < 1e-12);
    }
}

#[test]
fn walk_pvalue_matches_enumeration_m10() {
    let mut rng = RandomStream::new(10);
    let x = gaussian(&mut rng, 10, 0.0);
    let y = gaussian(&mut rng, 10, 0.5);
    let exact = exact_enumeration_pvalue(
        &x,
        &y,
        direct_t,
        Side::Less,
        Comparison::AtLeast,
        DEFAULT_ENUMERATION_LIMIT,
    )
    .unwrap();
    assert_eq!(exact.assignments, 184_756);
    let state = TwoSampleState::new(x, y).unwrap();
    let acc = walk_pvalue(&state, Side::Less, &WalkPlan::new(1_000_000, 99)).unwrap();
    let p = acc.p_value().unwrap();
    assert!((p - exact.p_value).abs() < 0.01, "walk {p} vs exact {}", exact.p_value);
}

#[test]
fn naive_converges_to_enumeration_m6() {
    let mut rng = RandomStream::new(6);
    let x = gaussian(&mut rng, 6, 0.6);
    let y = gaussian(&mut rng, 6, 0.0);
    let exact = exact_enumeration_pvalue(&x, &y, direct_t, Side::Greater, Comparison::AtLeast, 1000).unwrap();
    let acc = naive_mc_pvalue(&x, &y, direct_t, Side::Greater, 100_000, 3).unwrap();
    assert!((acc.p_value().unwrap() - exact.p_value).abs() < 0.01);
}

#[test]
fn twin_average_matches_all_orderings() {
    let mut rng = RandomStream::new(31);
    for rep in 0..3 {
        let shared = gaussian(&mut rng, 10, 0.0);
        let x: Vec<f64> = shared.iter().map(|s| s + 0.7 * rng.normal()).collect();
        let y: Vec<f64> = shared.iter().map(|s| s + 0.7 * rng.normal()).collect();
        let exact = brute_force_twin_average(&x, &y);
        let state = PairedState::new(x, y).unwrap();
        let avg = average_twin_correlation(&state, &WalkPlan::new(1_000_000, rep).report_every(10_000)).unwrap();
        assert!((avg.mean - exact).abs() < 1e-3, "{} vs {exact}", avg.mean);
        assert!(avg.converged_at.is_some());
    }
}

#[test]
fn twin_average_is_deterministic() {
    let x = vec![0.1, 0.5, 0.9, 1.4, 2.0, 0.3];
    let y = vec![0.2, 0.9, 0.4, 1.1, 2.5, 0.0];
    let state = PairedState::new(x, y).unwrap();
    let plan = WalkPlan::new(5_000, 17);
    assert_eq!(
        average_twin_correlation(&state, &plan).unwrap(),
        average_twin_correlation(&state, &plan).unwrap()
    );
}

/// Twin pairs whose members share a fraction `r` of their variance.
fn twins(rng: &mut RandomStream, pairs: usize, r: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(pairs);
    let mut y = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let s = rng.normal();
        x.push(r.sqrt() * s + (1.0 - r).sqrt() * rng.normal());
        y.push(r.sqrt() * s + (1.0 - r).sqrt() * rng.normal());
    }
    (x, y)
}

#[test]
fn heritability_detects_signal_vertices() {
    const VERTICES: usize = 10;
    const SIGNAL: usize = 4;
    let mut rng = RandomStream::new(5150);
    let mut hits = 0;
    let mut trials = 0;
    for rep in 0..100u64 {
        let mut averages = Vec::new();
        for zygosity in ["mz", "dz"] {
            let states: Vec<_> = (0..VERTICES)
                .map(|v| {
                    let r = match (zygosity, v < SIGNAL) {
                        ("mz", true) => 0.8,
                        _ => 0.4,
                    };
                    let (x, y) = twins(&mut rng, 50, r);
                    PairedState::new(x, y).unwrap()
                })
                .collect();
            let field = FieldState::new(states).unwrap();
            let avg = average_twin_correlation_field(&field, &WalkPlan::new(2_000, rep)).unwrap();
            averages.push(avg.into_iter().map(|a| a.unwrap().mean).collect::<Vec<_>>());
        }
        let map = heritability_index(&averages[0], &averages[1]).unwrap();
        assert!(map.hi.iter().all(|h| (-2.0..=2.0).contains(h)));
        for &h in &map.hi[..SIGNAL] {
            trials += 1;
            if h > 0.0 {
                hits += 1;
            }
        }
    }
    assert!(hits as f64 >= 0.95 * trials as f64, "{hits}/{trials}");
}

#[test]
fn maxstat_matches_naive_field_baseline() {
    const V: usize = 50;
    const RESAMPLES: u64 = 200_000;
    let mut rng = RandomStream::new(404);
    let data: Vec<(Vec<f64>, Vec<f64>)> = (0..V)
        .map(|v| {
            let shift = if v < 2 { 0.9 } else { 0.0 };
            (gaussian(&mut rng, 10, shift), gaussian(&mut rng, 10, 0.0))
        })
        .collect();
    let states = data
        .iter()
        .map(|(x, y)| TwoSampleState::new(x.clone(), y.clone()).unwrap())
        .collect();
    let field = FieldState::new(states).unwrap();
    let cfg = FieldTest {
        side: Side::Greater,
        correction: true,
        retain: false,
        threads: 1,
    };
    let res = cfg.run(&field, &WalkPlan::new(RESAMPLES, 8)).unwrap();
    let walk_p = res.maxstat.unwrap().p_sup().unwrap();

    // naive: shuffle subject labels, recompute every vertex from scratch
    let observed_sup = data.iter().map(|(x, y)| textbook_t(x, y)).fold(f64::MIN, f64::max);
    let mut order: Vec<usize> = (0..20).collect();
    let mut naive_rng = RandomStream::new(9);
    let mut exceed = 0u64;
    let mut xs = vec![0.0; 10];
    let mut ys = vec![0.0; 10];
    for _ in 0..RESAMPLES {
        naive_rng.shuffle(&mut order);
        let mut sup = f64::MIN;
        for (x, y) in &data {
            for k in 0..10 {
                let s = order[k];
                xs[k] = if s < 10 { x[s] } else { y[s - 10] };
                let s = order[10 + k];
                ys[k] = if s < 10 { x[s] } else { y[s - 10] };
            }
            sup = sup.max(textbook_t(&xs, &ys));
        }
        if sup >= observed_sup {
            exceed += 1;
        }
    }
    let naive_p = exceed as f64 / RESAMPLES as f64;
    assert!((walk_p - naive_p).abs() < 0.02, "walk {walk_p} naive {naive_p}");
    assert!(naive_p > 0.005 && naive_p < 0.995, "uninformative setup: {naive_p}");
}

#[test]
fn multiset_is_conserved_by_walks() {
    let mut rng = RandomStream::new(12);
    let x = gaussian(&mut rng, 9, 0.0);
    let y = gaussian(&mut rng, 4, 1.0);
    let mut before: Vec<f64> = x.iter().chain(&y).copied().collect();
    before.sort_by(f64::total_cmp);
    let mut field = FieldState::new(vec![TwoSampleState::new(x, y).unwrap()]).unwrap();
    run_walks_field(&mut field, &WalkPlan::new(100_000, 4), |_, _| {}).unwrap();
    let v = &field.vertices()[0];
    let mut after: Vec<f64> = v.x().iter().chain(v.y()).copied().collect();
    after.sort_by(f64::total_cmp);
    assert_eq!(before, after);
}
