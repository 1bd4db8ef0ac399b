mod common;

use bilgamma::hedging::{hedge_delta, mmm_cumulant, HedgeSettings};
use bilgamma::measures::mmm_constant;
use bilgamma::pricer::OptionSpec;
use bilgamma::{BilateralGamma, Market};
use common::trapezoid_delta;

fn dax() -> BilateralGamma {
    BilateralGamma::new(1.55, 133.96, 0.94, 88.92).unwrap()
}

#[test]
fn atm_delta_matches_dense_trapezoid() {
    let m = Market::new(0.0012, 0.0, 5000.0).unwrap();
    let c = mmm_constant(&dax(), &m).unwrap();
    let opt = OptionSpec::call(5000.0, 0.5).unwrap();
    let delta = hedge_delta(&dax(), c, &m, &opt, 0.0, 5000.0, &HedgeSettings::default()).unwrap();
    let oracle = trapezoid_delta(&dax(), c, &m, &opt, 5000.0, 1e-4);
    assert!(delta > 0.0 && delta < 1.0);
    assert!((delta - oracle).abs() < 1e-4 * oracle, "{delta} vs {oracle}");
}

#[test]
fn zero_c_uses_the_physical_measure() {
    // With r − q = Ψ(1) the physical law is already a martingale measure
    // and c vanishes.
    let p = dax();
    let m = Market::new(p.cumulant(1.0).unwrap(), 0.0, 5000.0).unwrap();
    let c = mmm_constant(&p, &m).unwrap();
    assert!(c.abs() < 1e-12, "c = {c}");
    for z in [-3.0, 1.0, 2.0] {
        assert_eq!(mmm_cumulant(&p, 0.0, z).unwrap(), p.cumulant(z).unwrap());
    }
    let opt = OptionSpec::call(5050.0, 2.0).unwrap();
    let delta = hedge_delta(&p, 0.0, &m, &opt, 0.0, 5000.0, &HedgeSettings::default()).unwrap();
    let oracle = trapezoid_delta(&p, 0.0, &m, &opt, 5000.0, 1e-4);
    assert!((delta - oracle).abs() < 1e-4 * oracle, "{delta} vs {oracle}");
}

#[test]
fn call_deltas_stay_within_bounds() {
    let m = Market::new(0.0016, 0.0004, 5000.0).unwrap();
    let c = mmm_constant(&dax(), &m).unwrap();
    let hs = HedgeSettings::default();
    for (t, big_t) in [(0.0, 1.0), (0.0, 21.0), (5.0, 63.0)] {
        let cap = (-m.q() * (big_t - t)).exp() + 1e-6;
        for k in [4000.0, 4800.0, 5000.0, 5200.0, 6000.0] {
            let opt = OptionSpec::call(k, big_t).unwrap();
            let mut last = -1.0;
            for s in [4500.0, 4900.0, 5000.0, 5100.0, 5500.0] {
                let d = hedge_delta(&dax(), c, &m, &opt, t, s, &hs).unwrap();
                assert!((0.0..=cap).contains(&d), "K = {k}, S = {s}, T = {big_t}: Δ = {d}");
                assert!(d >= last - 1e-9, "not monotone at K = {k}, S = {s}");
                last = d;
            }
        }
    }
}

#[test]
fn hedge_is_deterministic() {
    let m = Market::new(0.0012, 0.0, 5000.0).unwrap();
    let c = mmm_constant(&dax(), &m).unwrap();
    let opt = OptionSpec::call(5100.0, 10.0).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| hedge_delta(&dax(), c, &m, &opt, 0.0, 5000.0, &HedgeSettings::default()).unwrap())
    };
    assert_eq!(run(1).to_bits(), run(4).to_bits());
}
