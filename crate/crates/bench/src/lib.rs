//! Fixed workloads shared by the criterion benchmarks in `benches/`.

use pollbench_core::adversary::cyclic_tightness;
use pollbench_core::time::{int, rational};
use pollbench_core::{random_instance, JobInstance, RandomSpec};

/// A large adversarial instance: 203 jobs with setup time 40000.
pub fn tightness_instance() -> JobInstance {
    cyclic_tightness(3, int(1), 200, rational(1, 2))
        .expect("parameters are inside the regime")
        .instance
}

/// A seeded random instance with `n` jobs over four queues.
pub fn random_workload(n: usize) -> JobInstance {
    let spec = RandomSpec {
        seed: 42,
        n,
        k: 4,
        tau: 2,
        release_max: 3 * n as u64,
        work_min: 1,
        work_max: 6,
    };
    random_instance(&spec).expect("valid random spec")
}
