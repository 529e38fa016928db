use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use shocklab::diagnostics::functional_suite;
use shocklab::gas::Shock;
use shocklab::grid::Grid3;
use shocklab::par::ExecPolicy;
use shocklab::profile::{solve_profile, ProfileGrid, Viscosity};
use shocklab::solver::{rhs_eval, FlowModel, Workspace};
use shocklab::state::{init_state, Perturbation};
use shocklab::weight::{shift_rhs, ShiftState, WeightFn};

const POLICIES: [(&str, ExecPolicy); 2] = [
    ("parallel", ExecPolicy::Parallel),
    ("sequential", ExecPolicy::Sequential),
];

fn policies(c: &mut Criterion) {
    let shock = Shock::new(2.0, 1.0, 1.1, 0.0).unwrap();
    let visc = Viscosity::new(1.0, 0.0);
    let table = solve_profile(&shock, visc, ProfileGrid::default()).unwrap();
    let weight = WeightFn::new(&shock);
    let model = FlowModel {
        law: shock.law,
        viscosity: visc,
        sigma: shock.constants.sigma,
    };
    let grid = Grid3::new(100.0, 512, 16, 16).unwrap();
    let state = init_state(&table, grid, &Perturbation::default()).unwrap();
    let mut out = vec![[0.0; 4]; grid.len()];
    let mut ws = Workspace::default();

    let mut g = c.benchmark_group("rhs_eval");
    for (name, policy) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| rhs_eval(&model, &state, &mut ws, &mut out, policy, None))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("functional_suite");
    g.sample_size(20);
    for (name, policy) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let xdot = shift_rhs(&state, &table, &weight, 0.0, policy).unwrap();
                functional_suite(
                    &state,
                    &table,
                    &weight,
                    visc,
                    ShiftState {
                        t: 0.0,
                        x: 0.0,
                        xdot,
                    },
                    policy,
                )
            })
        });
    }
    g.finish();
}

criterion_group!(benches, policies);
criterion_main!(benches);
