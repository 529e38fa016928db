use shocklab::grid::Grid3;
use shocklab::inequality::gn::{gn_check, WindowedTrig};
use shocklab::inequality::poincare::{random_poincare_suite, Resolution};
use shocklab::inequality::Verdict;
use shocklab::par::ExecPolicy;

#[test]
fn random_poincare_family_satisfies_the_bound() {
    let suite =
        random_poincare_suite(500, 1000, Resolution::default(), ExecPolicy::Parallel).unwrap();
    assert_eq!(suite.len(), 500);
    for e in &suite {
        assert_eq!(
            e.result.verdict,
            Verdict::Pass,
            "seed {} {:?}",
            e.seed,
            e.result
        );
    }
}

#[test]
fn random_windowed_fields_satisfy_gn() {
    let grid = Grid3::new(15.0, 600, 16, 16).unwrap();
    let mut ratio = 0.0f64;
    for seed in 0..200 {
        let g = WindowedTrig::random(seed);
        let r = gn_check(&|x| g.eval(x), &grid, ExecPolicy::Parallel).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "seed {seed}: {r:?}");
        assert!(!r.truncated, "seed {seed}");
        ratio = ratio.max(r.lhs / r.rhs);
    }
    println!("max lhs/rhs {ratio}");
}
