//! Traffic classes, system configuration and call-generation primitives.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{invalid, Result};

/// Random stream used by every stochastic component. 64-bit seeded, platform independent.
pub type RandomStream = ChaCha8Rng;

pub fn new_stream(seed: u64) -> RandomStream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The three QoS classes. Demand grows with the class number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassId {
    /// Conversational (voice), one channel.
    Type1Conversational,
    /// Interactive (web), two channels.
    Type2Interactive,
    /// Background, three channels.
    Type3Background,
}

impl ClassId {
    pub const ALL: [ClassId; 3] = [ClassId::Type1Conversational, ClassId::Type2Interactive, ClassId::Type3Background];

    pub const MAX_DEMAND: u32 = 3;

    pub fn index(self) -> usize {
        match self {
            ClassId::Type1Conversational => 0,
            ClassId::Type2Interactive => 1,
            ClassId::Type3Background => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<ClassId> {
        Self::ALL.get(index).copied()
    }

    pub fn channels_required(self) -> u32 {
        self.index() as u32 + 1
    }

    pub fn label(self) -> &'static str {
        match self {
            ClassId::Type1Conversational => "type1",
            ClassId::Type2Interactive => "type2",
            ClassId::Type3Background => "type3",
        }
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One QoS class with its Poisson arrival rate and exponential service rate.
///
/// An arrival rate of zero is accepted and means the class offers no traffic,
/// which is how single-class systems are expressed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficClass {
    pub id: ClassId,
    pub arrival_rate: f64,
    pub service_rate: f64,
}

impl TrafficClass {
    pub fn new(id: ClassId, arrival_rate: f64, service_rate: f64) -> Result<Self> {
        if !(arrival_rate >= 0.0 && arrival_rate.is_finite()) {
            return Err(invalid(format!("{id}: arrival rate must be >= 0, got {arrival_rate}")));
        }
        if !(service_rate > 0.0 && service_rate.is_finite()) {
            return Err(invalid(format!("{id}: service rate must be > 0, got {service_rate}")));
        }
        Ok(Self { id, arrival_rate, service_rate })
    }

    pub fn channels_required(&self) -> u32 {
        self.id.channels_required()
    }

    pub fn is_active(&self) -> bool {
        self.arrival_rate > 0.0
    }

    pub fn utilization(&self) -> UtilizationRate {
        UtilizationRate(self.arrival_rate / self.service_rate)
    }
}

/// Channel thresholds of the tiered admission rule, `t1 < t2 < t3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdSet {
    pub t1: u32,
    pub t2: u32,
    pub t3: u32,
}

impl ThresholdSet {
    pub fn new(t1: u32, t2: u32, t3: u32) -> Result<Self> {
        if !(t1 < t2 && t2 < t3) {
            return Err(invalid(format!("thresholds must satisfy t1 < t2 < t3, got ({t1}, {t2}, {t3})")));
        }
        Ok(Self { t1, t2, t3 })
    }

    /// Tiers at one sixth, one third and one half of the pool.
    pub fn scaled_default(total_channels: u32) -> Result<Self> {
        Self::new(total_channels / 6, total_channels / 3, total_channels / 2)
    }
}

/// Offered load of one class, `λ/μ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct UtilizationRate(pub f64);

impl UtilizationRate {
    pub fn new(value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(invalid(format!("utilization must be finite and >= 0, got {value}")));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Below one the per-class load is in the regime the analysis assumes.
    pub fn is_stable(self) -> bool {
        self.0 < 1.0
    }
}

/// The cell pool: total channels, optional split into RAT sub-pools, the
/// three classes and the threshold tiers.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub total_channels: u32,
    /// Capacity of each RAT sub-pool; a single entry means one jointly managed pool.
    pub rat_channels: Vec<u32>,
    pub classes: [TrafficClass; 3],
    pub thresholds: Option<ThresholdSet>,
    pub rng_seed: u64,
}

impl SystemConfig {
    pub fn new(
        total_channels: u32,
        classes: [TrafficClass; 3],
        thresholds: Option<ThresholdSet>,
        rng_seed: u64,
    ) -> Result<Self> {
        Self::with_rats(vec![total_channels], classes, thresholds, rng_seed)
    }

    pub fn with_rats(
        rat_channels: Vec<u32>,
        classes: [TrafficClass; 3],
        thresholds: Option<ThresholdSet>,
        rng_seed: u64,
    ) -> Result<Self> {
        if rat_channels.is_empty() || rat_channels.contains(&0) {
            return Err(invalid("every RAT needs at least one channel"));
        }
        for (i, class) in classes.iter().enumerate() {
            if class.id.index() != i {
                return Err(invalid(format!("class slot {i} holds {}", class.id)));
            }
        }
        let total_channels = rat_channels.iter().sum();
        let widest_rat = *rat_channels.iter().max().unwrap();
        let max_demand = classes.iter().filter(|c| c.is_active()).map(|c| c.channels_required()).max().unwrap_or(0);
        if widest_rat < max_demand {
            return Err(invalid(format!(
                "largest RAT has {widest_rat} channels but an active class needs {max_demand}"
            )));
        }
        if let Some(t) = thresholds {
            if t.t3 > total_channels {
                return Err(invalid(format!("threshold t3={} exceeds {total_channels} channels", t.t3)));
            }
        }
        Ok(Self { total_channels, rat_channels, classes, thresholds, rng_seed })
    }

    /// Equal arrival and service rates for all three classes.
    pub fn symmetric(
        total_channels: u32,
        arrival_rate: f64,
        service_rate: f64,
        thresholds: Option<ThresholdSet>,
        rng_seed: u64,
    ) -> Result<Self> {
        let classes = symmetric_classes(arrival_rate, service_rate)?;
        Self::new(total_channels, classes, thresholds, rng_seed)
    }

    pub fn class(&self, id: ClassId) -> &TrafficClass {
        &self.classes[id.index()]
    }

    pub fn total_arrival_rate(&self) -> f64 {
        self.classes.iter().map(|c| c.arrival_rate).sum()
    }

    pub fn rat_count(&self) -> usize {
        self.rat_channels.len()
    }

    /// Same system with every class loaded at `λ_i = a·μ_i`, keeping only the
    /// classes in `offered` active.
    pub fn at_utilization(&self, a: UtilizationRate, offered: &[ClassId]) -> Result<Self> {
        let mut classes = self.classes;
        for class in classes.iter_mut() {
            class.arrival_rate = if offered.contains(&class.id) { a.value() * class.service_rate } else { 0.0 };
        }
        Self::with_rats(self.rat_channels.clone(), classes, self.thresholds, self.rng_seed)
    }
}

pub fn symmetric_classes(arrival_rate: f64, service_rate: f64) -> Result<[TrafficClass; 3]> {
    Ok([
        TrafficClass::new(ClassId::Type1Conversational, arrival_rate, service_rate)?,
        TrafficClass::new(ClassId::Type2Interactive, arrival_rate, service_rate)?,
        TrafficClass::new(ClassId::Type3Background, arrival_rate, service_rate)?,
    ])
}

pub fn utilization_rate(arrival_rate: f64, service_rate: f64) -> Result<UtilizationRate> {
    if !(service_rate > 0.0) {
        return Err(invalid(format!("service rate must be > 0, got {service_rate}")));
    }
    UtilizationRate::new(arrival_rate / service_rate)
}

fn sample_exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64, what: &str) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(invalid(format!("{what} rate must be > 0, got {rate}")));
    }
    let exp = Exp::new(rate).map_err(|e| invalid(e.to_string()))?;
    Ok(exp.sample(rng))
}

/// Time to the next Poisson arrival at rate `arrival_rate`.
pub fn sample_interarrival<R: Rng + ?Sized>(rng: &mut R, arrival_rate: f64) -> Result<f64> {
    sample_exponential(rng, arrival_rate, "arrival")
}

/// Exponential holding time with mean `1/service_rate`.
pub fn sample_service_time<R: Rng + ?Sized>(rng: &mut R, service_rate: f64) -> Result<f64> {
    sample_exponential(rng, service_rate, "service")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn moments(samples: &[f64]) -> (f64, f64) {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn utilization_examples() {
        assert_eq!(utilization_rate(1.0, 1.0).unwrap().value(), 1.0);
        assert_eq!(utilization_rate(0.0, 2.0).unwrap().value(), 0.0);
        assert!((utilization_rate(3.0, 5.0).unwrap().value() - 0.6).abs() < 1e-15);
        assert!(utilization_rate(1.0, 0.0).is_err());
        assert!(utilization_rate(1.0, -1.0).is_err());
        assert!(utilization_rate(0.6, 1.0).unwrap().is_stable());
        assert!(!utilization_rate(1.0, 1.0).unwrap().is_stable());
    }

    #[test]
    fn samplers_reproduce_under_reseed() {
        let a = sample_interarrival(&mut new_stream(7), 1.0).unwrap();
        let b = sample_interarrival(&mut new_stream(7), 1.0).unwrap();
        assert_eq!(a, b);
        let a = sample_service_time(&mut new_stream(11), 1.0).unwrap();
        let b = sample_service_time(&mut new_stream(11), 1.0).unwrap();
        assert_eq!(a, b);

        let mut s1 = new_stream(3);
        let mut s2 = new_stream(3);
        let seq1: Vec<f64> = (0..100).map(|_| sample_interarrival(&mut s1, 2.5).unwrap()).collect();
        let seq2: Vec<f64> = (0..100).map(|_| sample_interarrival(&mut s2, 2.5).unwrap()).collect();
        assert_eq!(seq1, seq2);
    }

    #[test]
    fn samplers_reject_bad_rates() {
        let mut rng = new_stream(0);
        assert!(sample_interarrival(&mut rng, 0.0).is_err());
        assert!(sample_interarrival(&mut rng, -2.0).is_err());
        assert!(sample_service_time(&mut rng, 0.0).is_err());
        assert!(sample_service_time(&mut rng, f64::NAN).is_err());
    }

    #[test]
    fn interarrival_moments_at_rate_two() {
        let mut rng = new_stream(2024);
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_interarrival(&mut rng, 2.0).unwrap()).collect();
        let (mean, var) = moments(&xs);
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
        assert!((var - 0.25).abs() < 0.003, "variance {var}");
    }

    #[test]
    fn service_time_moments_at_rate_four() {
        let mut rng = new_stream(99);
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_service_time(&mut rng, 4.0).unwrap()).collect();
        assert!(xs.iter().all(|&x| x > 0.0));
        let (mean, var) = moments(&xs);
        assert!((mean - 0.25).abs() < 0.001, "mean {mean}");
        assert!((var - 0.0625).abs() < 0.001, "variance {var}");
    }

    #[test]
    fn system_config_validation() {
        assert!(ThresholdSet::new(2, 2, 6).is_err());
        assert!(ThresholdSet::new(0, 1, 2).is_ok());
        let t = ThresholdSet::new(2, 4, 6).unwrap();
        assert!(SystemConfig::symmetric(12, 1.0, 1.0, Some(t), 0).is_ok());
        assert!(SystemConfig::symmetric(5, 1.0, 1.0, Some(t), 0).is_err());
        assert!(SystemConfig::symmetric(2, 1.0, 1.0, None, 0).is_err());

        let mut classes = symmetric_classes(1.0, 1.0).unwrap();
        classes[1].arrival_rate = 0.0;
        classes[2].arrival_rate = 0.0;
        let single = SystemConfig::new(1, classes, None, 0).unwrap();
        assert_eq!(single.total_channels, 1);
    }

    #[test]
    fn at_utilization_masks_classes() {
        let base = SystemConfig::symmetric(30, 1.0, 2.0, None, 0).unwrap();
        let cfg = base.at_utilization(UtilizationRate(0.5), &[ClassId::Type2Interactive]).unwrap();
        assert_eq!(cfg.classes[0].arrival_rate, 0.0);
        assert_eq!(cfg.classes[1].arrival_rate, 1.0);
        assert_eq!(cfg.classes[2].arrival_rate, 0.0);
    }

    proptest! {
        #[test]
        fn utilization_is_scale_invariant(lambda in 0.0f64..100.0, mu in 0.01f64..100.0, k in 0.01f64..100.0) {
            let base = utilization_rate(lambda, mu).unwrap().value();
            let scaled = utilization_rate(k * lambda, k * mu).unwrap().value();
            prop_assert!((base - scaled).abs() <= 1e-12 * base.max(1.0));
        }
    }
}
