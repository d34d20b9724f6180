mod support;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::oracle::{self, observables_for, random_case, same};
use volret::nonlocal::{conditional_probabilities, delta_v_series, lag_curve, window_avg_volatility};

#[test]
fn observables_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut checked = 0;
    for _ in 0..1500 {
        let case = random_case(&mut rng);
        let t_max = case.returns.len() - case.pair.long;
        for obs in observables_for(case.spec) {
            let curve = lag_curve(&case.returns, case.spec, case.pair, obs, t_max).unwrap();
            for lag in 1..=t_max {
                let want = oracle::observable(&case.returns, case.spec, case.pair, obs, lag);
                let got = curve.at(lag).unwrap();
                assert!(same(got, want), "{obs} lag {lag}: {got} vs {want} in {case:?}");
                if obs.statistic() != volret::nonlocal::Statistic::Local {
                    let p0 = oracle::p0(&case.returns, case.spec, case.pair, lag);
                    assert!(same(curve.p0[lag - 1], p0), "p0 lag {lag} in {case:?}");
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 10_000);
}

#[test]
fn delta_v_and_counts_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let case = random_case(&mut rng);
        let dv = delta_v_series(&case.returns, case.spec, case.pair).unwrap();
        for tp in case.pair.long..=case.returns.len() {
            assert_eq!(dv.get(tp).unwrap(), oracle::delta_v(&case.returns, case.spec, case.pair, tp));
            assert_eq!(
                window_avg_volatility(&case.returns, case.spec, case.pair.long, tp).unwrap(),
                oracle::avg(&case.returns, case.spec, case.pair.long, tp)
            );
        }
        let cp = conditional_probabilities(&case.returns, &dv, case.lag).unwrap();
        let c = oracle::counts(&case.returns, case.spec, case.pair, case.lag);
        assert_eq!(
            (cp.n_valid, cp.n_pos, cp.n_neg, cp.up_given_volatile, cp.up_given_stable),
            (c.valid, c.pos, c.neg, c.up_pos, c.up_neg)
        );
        assert_eq!(cp.n_pos + cp.n_neg + cp.n_zero_dv, cp.n_valid);
    }
}
