use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fsi_bem::assembly::{Assembler, OperatorKind, WsForm};
use fsi_bem::material::MaterialTemplate;
use fsi_bem::mesh::build_circle_mesh;
use fsi_bem::parallel::Execution;
use fsi_bem::systems::{logdet_sweep_multi, Formulation};

const UNIT: MaterialTemplate = MaterialTemplate { lambda: 1.0, mu: 2.0, rho: 1.0, rho_f: 0.5, c: 1.0 };

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn assembly(c: &mut Criterion) {
    let m = UNIT.at(6.0).unwrap();
    let kinds = [OperatorKind::Ws(WsForm::A), OperatorKind::Wf, OperatorKind::KspN, OperatorKind::KfpN];
    let mut group = c.benchmark_group("assembly");
    group.sample_size(10);
    for n in [32, 64] {
        let mesh = build_circle_mesh(1.0, n).unwrap();
        for (name, exec) in modes() {
            group.bench_with_input(BenchmarkId::new(name, n), &mesh, |b, mesh| {
                b.iter(|| Assembler::new(mesh, &m).with_execution(exec).assemble(&kinds))
            });
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mesh = build_circle_mesh(1.0, 32).unwrap();
    let grid: Vec<f64> = (0..8).map(|i| 6.0 + 0.05 * i as f64).collect();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_function(name, |b| {
            b.iter(|| {
                logdet_sweep_multi(
                    &[Formulation::Direct],
                    &UNIT,
                    &mesh,
                    &grid,
                    fsi_bem::systems::default_beta,
                    Default::default(),
                    exec,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, assembly, sweep);
criterion_main!(benches);
