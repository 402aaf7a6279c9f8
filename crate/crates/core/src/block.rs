//! Phase-parallel model of a thread block.
//!
//! A kernel is a fixed list of phases. Every phase runs one body per virtual
//! thread; the boundary between phases is the barrier. Bodies read and write
//! shared buffers of `u64` words through a [`ThreadCtx`] and keep private
//! registers of type `S` across phases.
//!
//! Writes take effect immediately, as with real shared memory, so a kernel
//! in which two threads of the same phase touch the same word (and at least
//! one of them writes it) produces schedule-dependent results. Validation
//! mode detects such conflicts; [`check_schedule_independence`] runs a kernel
//! under shuffled thread orders and compares the outputs.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::BlockConfig;

/// Hard limit on threads per block on the modeled hardware; larger blocks
/// are executed but reported.
pub const MAX_BLOCK_THREADS: usize = 1024;

type PhaseBody<S> = Box<dyn Fn(&mut ThreadCtx<'_, S>) -> Result<()> + Send + Sync>;

struct Phase<S> {
    name: String,
    body: PhaseBody<S>,
}

/// A block of `threads` virtual threads executing barrier-separated phases.
pub struct PhasedKernel<S> {
    threads: usize,
    config: Option<BlockConfig>,
    phases: Vec<Phase<S>>,
}

impl<S: Default + Clone> PhasedKernel<S> {
    pub fn new(threads: usize) -> Self {
        assert!(threads >= 1, "a block needs at least one thread");
        Self {
            threads,
            config: None,
            phases: Vec::new(),
        }
    }

    /// Records the block configuration the kernel was built for.
    pub fn with_config(mut self, config: BlockConfig) -> Self {
        self.config = Some(config);
        self
    }

    pub fn config(&self) -> Option<&BlockConfig> {
        self.config.as_ref()
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn phase_count(&self) -> usize {
        self.phases.len()
    }

    pub fn phase_names(&self) -> impl Iterator<Item = &str> {
        self.phases.iter().map(|p| p.name.as_str())
    }

    /// Appends a phase; a barrier separates it from the previous one.
    pub fn phase<F>(mut self, name: impl Into<String>, body: F) -> Self
    where
        F: Fn(&mut ThreadCtx<'_, S>) -> Result<()> + Send + Sync + 'static,
    {
        self.push_phase(name, body);
        self
    }

    pub fn push_phase<F>(&mut self, name: impl Into<String>, body: F)
    where
        F: Fn(&mut ThreadCtx<'_, S>) -> Result<()> + Send + Sync + 'static,
    {
        self.phases.push(Phase {
            name: name.into(),
            body: Box::new(body),
        });
    }
}

/// Thread order inside each phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    InOrder,
    Reversed,
    /// Independent seeded shuffle per phase.
    Shuffled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub schedule: Schedule,
    /// Fail on intra-phase read/write or write/write conflicts.
    pub validate: bool,
}

impl RunOptions {
    pub fn validating() -> Self {
        Self {
            schedule: Schedule::InOrder,
            validate: true,
        }
    }
}

const NONE: u32 = u32::MAX;

/// Per-phase record of who touched which word.
struct Tracker {
    writer: Vec<Vec<u32>>,
    /// First reader and first other reader.
    reader: Vec<Vec<(u32, u32)>>,
    touched: Vec<(usize, usize)>,
}

impl Tracker {
    fn new(buffers: &[Vec<u64>]) -> Self {
        Self {
            writer: buffers.iter().map(|b| vec![NONE; b.len()]).collect(),
            reader: buffers.iter().map(|b| vec![(NONE, NONE); b.len()]).collect(),
            touched: Vec::new(),
        }
    }

    fn reset(&mut self) {
        for (b, i) in self.touched.drain(..) {
            self.writer[b][i] = NONE;
            self.reader[b][i] = (NONE, NONE);
        }
    }

    fn conflict(phase: &str, buffer: usize, index: usize, first: u32, second: usize) -> Error {
        Error::PhaseConflict {
            phase: phase.to_string(),
            buffer,
            index,
            first: first as usize,
            second,
        }
    }

    fn on_read(&mut self, phase: &str, b: usize, i: usize, tid: usize) -> Result<()> {
        let t = tid as u32;
        let w = self.writer[b][i];
        if w != NONE && w != t {
            return Err(Self::conflict(phase, b, i, w, tid));
        }
        let r = &mut self.reader[b][i];
        if r.0 == NONE {
            r.0 = t;
            self.touched.push((b, i));
        } else if r.0 != t && r.1 == NONE {
            r.1 = t;
        }
        Ok(())
    }

    fn on_write(&mut self, phase: &str, b: usize, i: usize, tid: usize) -> Result<()> {
        let t = tid as u32;
        let w = self.writer[b][i];
        if w != NONE && w != t {
            return Err(Self::conflict(phase, b, i, w, tid));
        }
        let (r0, r1) = self.reader[b][i];
        let other = if r0 != t { r0 } else { r1 };
        if other != NONE {
            return Err(Self::conflict(phase, b, i, other, tid));
        }
        if w == NONE {
            self.writer[b][i] = t;
            self.touched.push((b, i));
        }
        Ok(())
    }
}

/// What a thread body sees: its index, the shared buffers and its registers.
pub struct ThreadCtx<'a, S> {
    tid: usize,
    threads: usize,
    phase: &'a str,
    buffers: &'a mut [Vec<u64>],
    regs: &'a mut S,
    tracker: Option<&'a mut Tracker>,
}

impl<S> ThreadCtx<'_, S> {
    pub fn tid(&self) -> usize {
        self.tid
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn buffer_len(&self, buffer: usize) -> usize {
        self.buffers[buffer].len()
    }

    fn check(&self, buffer: usize, index: usize) -> Result<()> {
        let len = self.buffers.get(buffer).map_or(0, |b| b.len());
        if index >= len {
            return Err(Error::OutOfRange { buffer, index, len });
        }
        Ok(())
    }

    pub fn read(&mut self, buffer: usize, index: usize) -> Result<u64> {
        self.check(buffer, index)?;
        if let Some(t) = self.tracker.as_deref_mut() {
            t.on_read(self.phase, buffer, index, self.tid)?;
        }
        Ok(self.buffers[buffer][index])
    }

    pub fn write(&mut self, buffer: usize, index: usize, value: u64) -> Result<()> {
        self.check(buffer, index)?;
        if let Some(t) = self.tracker.as_deref_mut() {
            t.on_write(self.phase, buffer, index, self.tid)?;
        }
        self.buffers[buffer][index] = value;
        Ok(())
    }

    pub fn regs(&mut self) -> &mut S {
        self.regs
    }
}

fn order(threads: usize, schedule: Schedule, phase: usize) -> Vec<usize> {
    let mut tids: Vec<usize> = (0..threads).collect();
    match schedule {
        Schedule::InOrder => {}
        Schedule::Reversed => tids.reverse(),
        Schedule::Shuffled(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (phase as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            tids.shuffle(&mut rng);
        }
    }
    tids
}

/// Runs every phase in order over the initial buffer contents and returns
/// the final buffers.
pub fn run_phased_kernel<S: Default + Clone>(
    kernel: &PhasedKernel<S>,
    inputs: Vec<Vec<u64>>,
    opts: RunOptions,
) -> Result<Vec<Vec<u64>>> {
    if kernel.threads > MAX_BLOCK_THREADS {
        log::warn!(
            "block of {} threads exceeds the {} thread hardware limit",
            kernel.threads,
            MAX_BLOCK_THREADS
        );
    }
    let mut buffers = inputs;
    let mut regs = vec![S::default(); kernel.threads];
    let mut tracker = opts.validate.then(|| Tracker::new(&buffers));
    for (p, phase) in kernel.phases.iter().enumerate() {
        for tid in order(kernel.threads, opts.schedule, p) {
            let mut ctx = ThreadCtx {
                tid,
                threads: kernel.threads,
                phase: &phase.name,
                buffers: &mut buffers,
                regs: &mut regs[tid],
                tracker: tracker.as_mut(),
            };
            (phase.body)(&mut ctx)?;
        }
        if let Some(t) = tracker.as_mut() {
            t.reset();
        }
    }
    Ok(buffers)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleReport {
    pub trials: usize,
    /// Trials whose output differed from the first one.
    pub mismatches: usize,
}

impl ScheduleReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Runs `kernel` under `trials` seeded shuffles (the first trial in thread
/// order) and counts outputs that differ from the first.
pub fn check_schedule_independence<S: Default + Clone>(
    kernel: &PhasedKernel<S>,
    inputs: &[Vec<u64>],
    trials: usize,
    seed: u64,
) -> Result<ScheduleReport> {
    if trials < 2 {
        return Err(Error::InvalidConfig("schedule check needs at least two trials".into()));
    }
    let reference = run_phased_kernel(kernel, inputs.to_vec(), RunOptions::default())?;
    let mut mismatches = 0;
    for trial in 1..trials {
        let schedule = if trial == 1 {
            Schedule::Reversed
        } else {
            Schedule::Shuffled(seed.wrapping_add(trial as u64))
        };
        let out = run_phased_kernel(
            kernel,
            inputs.to_vec(),
            RunOptions {
                schedule,
                validate: false,
            },
        )?;
        if out != reference {
            mismatches += 1;
        }
    }
    Ok(ScheduleReport { trials, mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn copy_kernel(n: usize) -> PhasedKernel<()> {
        PhasedKernel::new(n).phase("copy", |ctx| {
            let t = ctx.tid();
            let v = ctx.read(0, t)?;
            ctx.write(1, t, v)
        })
    }

    /// Every thread adds its index into one shared word via read-modify-write
    /// of its left neighbour, so the result depends on the order.
    fn racy_kernel(n: usize) -> PhasedKernel<()> {
        PhasedKernel::new(n).phase("race", |ctx| {
            let t = ctx.tid();
            let left = if t == 0 { 0 } else { ctx.read(0, t - 1)? };
            ctx.write(0, t, left + t as u64 + 1)
        })
    }

    #[test]
    fn identity_copy() {
        let k = copy_kernel(8);
        let input: Vec<u64> = (10..18).collect();
        let out = run_phased_kernel(&k, vec![input.clone(), vec![0; 8]], RunOptions::validating()).unwrap();
        assert_eq!(out[1], input);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let k = copy_kernel(9);
        let err = run_phased_kernel(&k, vec![vec![0; 8], vec![0; 8]], RunOptions::default());
        assert!(matches!(err, Err(Error::OutOfRange { index: 8, .. })));
    }

    #[test]
    fn conflicts_detected_in_validation() {
        let k = racy_kernel(4);
        let err = run_phased_kernel(&k, vec![vec![0; 4]], RunOptions::validating());
        assert!(matches!(err, Err(Error::PhaseConflict { .. })));
        // the same kernel without validation just runs
        assert!(run_phased_kernel(&k, vec![vec![0; 4]], RunOptions::default()).is_ok());
    }

    #[test]
    fn write_write_conflict_detected() {
        let k = PhasedKernel::<()>::new(2).phase("ww", |ctx| {
            let t = ctx.tid() as u64;
            ctx.write(0, 0, t)
        });
        assert!(run_phased_kernel(&k, vec![vec![0; 1]], RunOptions::validating()).is_err());
    }

    #[test]
    fn schedule_check_positive_and_negative() {
        let input: Vec<u64> = (0..64).collect();
        let report = check_schedule_independence(&copy_kernel(64), &[input, vec![0; 64]], 16, 7).unwrap();
        assert!(report.passed());
        let report = check_schedule_independence(&racy_kernel(64), &[vec![0; 64]], 16, 7).unwrap();
        assert!(!report.passed());
        assert!(check_schedule_independence(&copy_kernel(2), &[vec![0; 2], vec![0; 2]], 1, 0).is_err());
    }

    #[test]
    fn registers_persist_across_phases() {
        let k = PhasedKernel::<u64>::new(4)
            .phase("load", |ctx| {
                let t = ctx.tid();
                let v = ctx.read(0, t)?;
                *ctx.regs() = v * 2;
                Ok(())
            })
            .phase("store", |ctx| {
                let t = ctx.tid();
                let v = *ctx.regs();
                ctx.write(0, t, v)
            });
        let out = run_phased_kernel(&k, vec![vec![1, 2, 3, 4]], RunOptions::validating()).unwrap();
        assert_eq!(out[0], vec![2, 4, 6, 8]);
    }
}
