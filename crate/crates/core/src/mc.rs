//! Sequential element-deletion Monte Carlo.
//!
//! Each sample draws i.i.d. link strengths, then repeats: solve at unit end
//! displacement, scale the load until the most critical link reaches its
//! strength, delete that link. The run ends once the net falls apart.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::StrengthDistribution;
use crate::error::{Error, Result};
use crate::mesh::{build_mesh, FishnetGeometry, FishnetMesh};
use crate::solver::{DamageState, LinkStressField, Solver};

/// One point of the load-displacement record: the state just before the
/// `k`-th deletion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventPoint {
    pub displacement: f64,
    pub nominal_stress: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub sample_id: usize,
    pub sample_seed: u64,
    /// Peak nominal stress over the deletion sequence.
    pub peak_stress: f64,
    /// Deletions strictly before the first event reaching the peak.
    pub failures_before_peak: usize,
    /// Deletions up to and including the one that disconnects the net.
    pub total_failures: usize,
    /// Empty unless curves were requested.
    pub curve: Vec<EventPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: FishnetGeometry,
    pub distribution: StrengthDistribution,
    pub sample_count: usize,
    pub master_seed: u64,
    pub record_curves: bool,
    /// Worker threads; 0 lets the pool decide. Never affects results.
    pub threads: usize,
}

impl RunConfig {
    pub fn new(geometry: FishnetGeometry, distribution: StrengthDistribution, sample_count: usize, master_seed: u64) -> Self {
        Self {
            geometry,
            distribution,
            sample_count,
            master_seed,
            record_curves: false,
            threads: 0,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sample `i` under a master seed.
pub fn sample_seed(master_seed: u64, i: usize) -> u64 {
    splitmix64(master_seed ^ splitmix64(i as u64))
}

/// Random stream of sample `i`.
pub fn sample_rng(master_seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sample_seed(master_seed, i))
}

/// Draws one strength per link, in link-id order.
pub fn draw_strengths(dist: &StrengthDistribution, link_count: usize, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..link_count).map(|_| dist.sample(rng)));
}

/// Reusable per-thread state for [`simulate_one`].
pub struct Simulator<'a> {
    solver: Solver<'a>,
    damage: DamageState,
    field: LinkStressField,
    strengths: Vec<f64>,
}

impl<'a> Simulator<'a> {
    pub fn new(mesh: &'a FishnetMesh) -> Self {
        Self {
            solver: Solver::new(mesh),
            damage: DamageState::new(mesh.link_count()),
            field: LinkStressField::default(),
            strengths: Vec::with_capacity(mesh.link_count()),
        }
    }

    pub fn mesh(&self) -> &'a FishnetMesh {
        self.solver.mesh()
    }

    /// Runs the deletion sequence for given strengths.
    pub fn run(&mut self, strengths: &[f64], record_curve: bool) -> Result<SampleRecord> {
        let mesh = self.solver.mesh();
        if strengths.len() != mesh.link_count() {
            return Err(Error::InvalidInput(format!(
                "expected {} strengths, got {}",
                mesh.link_count(),
                strengths.len()
            )));
        }
        if let Some((i, s)) = strengths.iter().enumerate().find(|(_, s)| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidInput(format!("strength of link {i} must be positive, got {s}")));
        }
        self.damage.reset();
        let mut curve = Vec::new();
        let mut peak = f64::NEG_INFINITY;
        let mut peak_at = 0;
        let mut events = 0;
        loop {
            match self.solver.solve_into(self.damage.mask(), &mut self.field) {
                Ok(()) => {}
                Err(Error::Disconnected) => break,
                Err(e) => return Err(e),
            }
            let mut best = f64::INFINITY;
            let mut arg = usize::MAX;
            for (l, (&s, &sig)) in strengths.iter().zip(&self.field.sigma).enumerate() {
                if sig > 0.0 && !self.damage.is_failed(l) {
                    let lam = s / sig;
                    if lam < best {
                        best = lam;
                        arg = l;
                    }
                }
            }
            if arg == usize::MAX {
                return Err(Error::Internal("connected state without a tensile link".into()));
            }
            let nominal = best * self.field.nominal_stress;
            if nominal > peak {
                peak = nominal;
                peak_at = events;
            }
            if record_curve {
                curve.push(EventPoint {
                    displacement: best,
                    nominal_stress: nominal,
                });
            }
            events += 1;
            self.damage.fail(arg)?;
        }
        if events == 0 {
            return Err(Error::Internal("initial state is disconnected".into()));
        }
        Ok(SampleRecord {
            sample_id: 0,
            sample_seed: 0,
            peak_stress: peak,
            failures_before_peak: peak_at,
            total_failures: events,
            curve,
        })
    }

    /// Draws strengths for sample `i` and runs it.
    pub fn run_sample(&mut self, dist: &StrengthDistribution, master_seed: u64, i: usize, record_curve: bool) -> Result<SampleRecord> {
        let seed = sample_seed(master_seed, i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut strengths = std::mem::take(&mut self.strengths);
        draw_strengths(dist, self.mesh().link_count(), &mut rng, &mut strengths);
        let rec = self.run(&strengths, record_curve);
        self.strengths = strengths;
        let mut rec = rec?;
        rec.sample_id = i;
        rec.sample_seed = seed;
        Ok(rec)
    }
}

/// Runs the deletion sequence for one set of link strengths.
pub fn simulate_one(mesh: &FishnetMesh, strengths: &[f64]) -> Result<SampleRecord> {
    Simulator::new(mesh).run(strengths, true)
}

/// Runs `sample_count` independent samples; records come back in sample order
/// and do not depend on the thread count.
pub fn run_batch(config: &RunConfig) -> Result<Vec<SampleRecord>> {
    if config.sample_count == 0 {
        return Err(Error::InvalidInput("sample_count must be at least 1".into()));
    }
    let mesh = build_mesh(config.geometry)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..config.sample_count)
            .into_par_iter()
            .map_init(
                || Simulator::new(&mesh),
                |sim, i| sim.run_sample(&config.distribution, config.master_seed, i, config.record_curves),
            )
            .collect()
    })
}

/// Mean number of failures before the peak.
pub fn count_prepeak_failures(records: &[SampleRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records".into()));
    }
    Ok(records.iter().map(|r| r.failures_before_peak as f64).sum::<f64>() / records.len() as f64)
}
