//! Discrete-event simulation of the loss system under any admission controller.
//!
//! Arrivals of each active class form independent Poisson streams. An
//! admitted call holds its channels for an exponential time; a blocked call
//! is lost. Run length and warmup are counted in processed events
//! (arrivals plus departures); statistics cover arrivals after the warmup.

mod events;

pub use events::{Event, EventKind, EventQueue};

use crate::error::{invalid, Result};
use crate::policies::{AdmissionController, NetworkSnapshot};
use crate::traffic::{new_stream, sample_interarrival, sample_service_time, ClassId, SystemConfig};

/// z-value of the two-sided 95% normal interval.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunLength {
    pub warmup_events: u64,
    pub horizon_events: u64,
}

impl RunLength {
    pub fn new(warmup_events: u64, horizon_events: u64) -> Result<Self> {
        if horizon_events <= warmup_events {
            return Err(invalid(format!("horizon {horizon_events} must exceed warmup {warmup_events}")));
        }
        Ok(Self { warmup_events, horizon_events })
    }

    /// Warmup of one tenth of the horizon.
    pub fn with_default_warmup(horizon_events: u64) -> Result<Self> {
        Self::new(horizon_events / 10, horizon_events)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub offered_per_class: [u64; 3],
    pub blocked_per_class: [u64; 3],
    pub empirical_blocking_per_class: [f64; 3],
    pub aggregate_blocking: f64,
    pub half_width_95: [f64; 3],
    pub aggregate_half_width_95: f64,
    pub peak_occupancy: u32,
    pub events_processed: u64,
    pub end_time: f64,
    pub seed: u64,
}

impl SimReport {
    pub fn total_offered(&self) -> u64 {
        self.offered_per_class.iter().sum()
    }

    pub fn total_blocked(&self) -> u64 {
        self.blocked_per_class.iter().sum()
    }
}

/// `(blocked/offered, normal-approximation 95% half-width)`, zero when nothing was offered.
pub fn proportion(blocked: u64, offered: u64) -> (f64, f64) {
    if offered == 0 {
        return (0.0, 0.0);
    }
    let p = blocked as f64 / offered as f64;
    (p, Z_95 * (p * (1.0 - p) / offered as f64).sqrt())
}

/// Channel occupancy of every RAT sub-pool.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolState {
    rat_channels: Vec<u32>,
    active: Vec<[u32; 3]>,
    occupied: Vec<u32>,
}

impl PoolState {
    pub fn new(rat_channels: &[u32]) -> Self {
        Self {
            rat_channels: rat_channels.to_vec(),
            active: vec![[0; 3]; rat_channels.len()],
            occupied: vec![0; rat_channels.len()],
        }
    }

    pub fn snapshot(&self) -> Vec<NetworkSnapshot> {
        self.rat_channels
            .iter()
            .zip(&self.active)
            .zip(&self.occupied)
            .map(|((&total, &per_class_active), &occ)| NetworkSnapshot {
                available_channels: total - occ,
                total_channels: total,
                per_class_active,
            })
            .collect()
    }

    pub fn occupied_channels(&self) -> u32 {
        self.occupied.iter().sum()
    }

    fn admit(&mut self, rat: usize, class: ClassId) -> Result<()> {
        let free = self.rat_channels.get(rat).map(|&cap| cap - self.occupied[rat]);
        match free {
            Some(free) if free >= class.channels_required() => {
                self.active[rat][class.index()] += 1;
                self.occupied[rat] += class.channels_required();
                Ok(())
            }
            _ => Err(invalid(format!("controller placed a {class} call in RAT {rat} without room"))),
        }
    }

    fn release(&mut self, rat: usize, class: ClassId) {
        self.active[rat][class.index()] -= 1;
        self.occupied[rat] -= class.channels_required();
    }
}

/// Simulates `length.horizon_events` events from an empty system.
pub fn run(
    config: &SystemConfig,
    controller: &mut dyn AdmissionController,
    length: RunLength,
    seed: u64,
) -> Result<SimReport> {
    let mut rng = new_stream(seed);
    let mut queue = EventQueue::new();
    let mut pool = PoolState::new(&config.rat_channels);
    let mut calls: std::collections::HashMap<u64, (ClassId, usize)> = Default::default();
    let mut next_call = 0u64;

    for class in config.classes.iter().filter(|c| c.is_active()) {
        queue.schedule(sample_interarrival(&mut rng, class.arrival_rate)?, EventKind::Arrival(class.id));
    }

    let mut offered = [0u64; 3];
    let mut blocked = [0u64; 3];
    let mut peak = 0u32;
    let mut processed = 0u64;
    let mut now = 0.0;

    while processed < length.horizon_events {
        let Some(event) = queue.pop() else { break };
        now = event.time;
        let counting = processed >= length.warmup_events;
        processed += 1;
        match event.kind {
            EventKind::Arrival(class_id) => {
                let class = config.class(class_id);
                queue.schedule(now + sample_interarrival(&mut rng, class.arrival_rate)?, EventKind::Arrival(class_id));
                let snaps = pool.snapshot();
                let placed = controller.admit(&snaps, class_id);
                if counting {
                    offered[class_id.index()] += 1;
                }
                match placed {
                    Some(rat) => {
                        pool.admit(rat, class_id)?;
                        peak = peak.max(pool.occupied_channels());
                        let call = next_call;
                        next_call += 1;
                        calls.insert(call, (class_id, rat));
                        queue.schedule(
                            now + sample_service_time(&mut rng, class.service_rate)?,
                            EventKind::Departure(call),
                        );
                    }
                    None if counting => blocked[class_id.index()] += 1,
                    None => {}
                }
            }
            EventKind::Departure(call) => {
                let (class_id, rat) = calls.remove(&call).expect("departure of an unknown call");
                pool.release(rat, class_id);
            }
        }
    }

    let mut empirical = [0.0; 3];
    let mut half_width = [0.0; 3];
    for c in 0..3 {
        (empirical[c], half_width[c]) = proportion(blocked[c], offered[c]);
    }
    let (aggregate, aggregate_hw) = proportion(blocked.iter().sum(), offered.iter().sum());
    Ok(SimReport {
        offered_per_class: offered,
        blocked_per_class: blocked,
        empirical_blocking_per_class: empirical,
        aggregate_blocking: aggregate,
        half_width_95: half_width,
        aggregate_half_width_95: aggregate_hw,
        peak_occupancy: peak,
        events_processed: processed,
        end_time: now,
        seed,
    })
}
