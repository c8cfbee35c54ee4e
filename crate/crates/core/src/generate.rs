//! Seeded random instances over integer ranges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::JobInstance;
use crate::time::Time;

/// Integer ranges (inclusive) for a random instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub tau: u64,
    #[serde(default)]
    pub release_max: u64,
    #[serde(default)]
    pub work_min: u64,
    #[serde(default = "default_work_max")]
    pub work_max: u64,
}

fn default_work_max() -> u64 {
    4
}

impl RandomSpec {
    pub fn new(seed: u64, n: usize, k: usize) -> Self {
        RandomSpec {
            seed,
            n,
            k,
            tau: 1,
            release_max: 2 * n as u64,
            work_min: 0,
            work_max: default_work_max(),
        }
    }
}

pub fn random_instance(spec: &RandomSpec) -> Result<JobInstance> {
    if spec.work_min > spec.work_max {
        return Err(Error::Parse("work_min exceeds work_max".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let jobs: Vec<_> = (0..spec.n)
        .map(|_| {
            let release = rng.random_range(0..=spec.release_max);
            let work = rng.random_range(spec.work_min..=spec.work_max);
            let queue = rng.random_range(1..=spec.k.max(1));
            (Time::from_int(release), Time::from_int(work), queue)
        })
        .collect();
    JobInstance::new(spec.k, Time::from_int(spec.tau), jobs)
}
