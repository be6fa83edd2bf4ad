use rand::Rng;

use super::network::Example;
use crate::error::{invalid, Result};
use crate::policies::{first_fit, AdmissionPolicy, NetworkSnapshot};
use crate::traffic::{new_stream, ClassId, RandomStream, SystemConfig};

/// Sample count used for training and testing unless configured otherwise.
pub const DEFAULT_TRAINING_SIZE: usize = 1000;

/// Controller inputs for one admission request.
#[derive(Debug, Clone, PartialEq)]
pub struct FncacFeatures {
    /// Available fraction of each RAT, in `[0, 1]`.
    pub per_rat_available: Vec<f64>,
    /// Requested channels over the largest class demand.
    pub demand: f64,
    pub qos_class: [f64; 3],
    pub cost_bias: f64,
}

impl FncacFeatures {
    pub fn from_snapshots(rats: &[NetworkSnapshot], class: ClassId, cost_bias: f64) -> Self {
        let mut qos_class = [0.0; 3];
        qos_class[class.index()] = 1.0;
        Self {
            per_rat_available: rats.iter().map(|s| s.available_fraction()).collect(),
            demand: class.channels_required() as f64 / ClassId::MAX_DEMAND as f64,
            qos_class,
            cost_bias,
        }
    }

    /// Number of distinct feature values for `rats` pools.
    pub fn natural_len(rats: usize) -> usize {
        rats + 5
    }

    /// `[available…, demand, one-hot class…, cost]`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = self.per_rat_available.clone();
        v.push(self.demand);
        v.extend(self.qos_class);
        v.push(self.cost_bias);
        v
    }

    /// Spreads the features over `input_width` input neurons; neuron `j`
    /// reads feature `j mod F`.
    pub fn to_inputs(&self, input_width: usize) -> Result<Vec<f64>> {
        let natural = self.to_vector();
        if input_width < natural.len() {
            return Err(invalid(format!(
                "input layer has {input_width} neurons but the controller needs at least {}",
                natural.len()
            )));
        }
        Ok((0..input_width).map(|j| natural[j % natural.len()]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: FncacFeatures,
    pub admitted: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingSet {
    pub samples: Vec<LabeledSample>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.samples.iter().filter(|s| s.admitted).count()
    }

    pub fn examples(&self, input_width: usize) -> Result<Vec<Example>> {
        self.samples
            .iter()
            .map(|s| {
                Ok(Example { inputs: s.features.to_inputs(input_width)?, target: if s.admitted { 1.0 } else { 0.0 } })
            })
            .collect()
    }
}

/// Random occupancy for one pool: the occupied level is uniform over
/// `0..=capacity`, then filled with calls of random classes that still fit.
fn random_snapshot(rng: &mut RandomStream, capacity: u32) -> NetworkSnapshot {
    let mut remaining = rng.random_range(0..=capacity);
    let mut active = [0u32; 3];
    while remaining > 0 {
        let fitting = ClassId::ALL.iter().filter(|c| c.channels_required() <= remaining).count();
        let class = ClassId::ALL[rng.random_range(0..fitting)];
        active[class.index()] += 1;
        remaining -= class.channels_required();
    }
    NetworkSnapshot::new(capacity, active).expect("filled within capacity")
}

/// Labels random snapshots with the teacher's first-fit verdict.
pub fn generate_training_set(
    config: &SystemConfig,
    teacher: &dyn AdmissionPolicy,
    size: usize,
    cost_bias: f64,
    seed: u64,
) -> Result<TrainingSet> {
    if size < 10 {
        return Err(invalid(format!("training set size must be >= 10, got {size}")));
    }
    let mut rng = new_stream(seed);
    let mut offered: Vec<ClassId> = config.classes.iter().filter(|c| c.is_active()).map(|c| c.id).collect();
    if offered.is_empty() {
        offered = ClassId::ALL.to_vec();
    }
    let samples = (0..size)
        .map(|_| {
            let rats: Vec<NetworkSnapshot> =
                config.rat_channels.iter().map(|&cap| random_snapshot(&mut rng, cap)).collect();
            let class = offered[rng.random_range(0..offered.len())];
            let admitted = first_fit(teacher, &rats, class).is_some();
            LabeledSample { features: FncacFeatures::from_snapshots(&rats, class, cost_bias), admitted }
        })
        .collect();
    Ok(TrainingSet { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::{RejectAll, ThresholdPolicy};
    use crate::traffic::ThresholdSet;

    fn config() -> SystemConfig {
        SystemConfig::symmetric(30, 1.0, 1.0, Some(ThresholdSet::scaled_default(30).unwrap()), 0).unwrap()
    }

    #[test]
    fn feature_layout() {
        let rats = [NetworkSnapshot::new(10, [2, 1, 0]).unwrap(), NetworkSnapshot::empty(20)];
        let f = FncacFeatures::from_snapshots(&rats, ClassId::Type2Interactive, 0.75);
        assert_eq!(f.to_vector(), vec![0.6, 1.0, 2.0 / 3.0, 0.0, 1.0, 0.0, 0.75]);
        let inputs = f.to_inputs(9).unwrap();
        assert_eq!(inputs[7], 0.6);
        assert_eq!(inputs[8], 1.0);
        assert!(f.to_inputs(6).is_err());
    }

    #[test]
    fn default_sample_size_and_determinism() {
        let t = ThresholdPolicy::new(config().thresholds.unwrap());
        let a = generate_training_set(&config(), &t, DEFAULT_TRAINING_SIZE, 1.0, 5).unwrap();
        assert_eq!(a.len(), 1000);
        assert_eq!(a, generate_training_set(&config(), &t, 1000, 1.0, 5).unwrap());
        for s in &a.samples {
            assert!(s.features.per_rat_available.iter().all(|u| (0.0..=1.0).contains(u)));
            assert!((0.0..=1.0).contains(&s.features.demand));
        }
    }

    #[test]
    fn threshold_teacher_gives_both_labels() {
        let t = ThresholdPolicy::new(config().thresholds.unwrap());
        let set = generate_training_set(&config(), &t, 1000, 1.0, 1).unwrap();
        let pos = set.positives();
        assert!(pos > 100 && pos < 900, "{pos} positives");
    }

    #[test]
    fn labels_follow_the_teacher() {
        let cfg = config();
        let t = ThresholdPolicy::new(cfg.thresholds.unwrap());
        let set = generate_training_set(&cfg, &t, 300, 1.0, 2).unwrap();
        for s in &set.samples {
            let available = (s.features.per_rat_available[0] * 30.0).round() as u32;
            let class = ClassId::from_index(s.features.qos_class.iter().position(|&x| x == 1.0).unwrap()).unwrap();
            let snap = NetworkSnapshot::new(30, [30 - available, 0, 0]).unwrap();
            assert_eq!(s.admitted, t.decide(&snap, class).is_admit());
        }
    }

    #[test]
    fn reject_all_teacher_labels_everything_zero() {
        let set = generate_training_set(&config(), &RejectAll, 200, 1.0, 3).unwrap();
        assert_eq!(set.positives(), 0);
        assert!(generate_training_set(&config(), &RejectAll, 9, 1.0, 3).is_err());
    }

    #[test]
    fn availability_levels_cover_the_pool() {
        let mut rng = new_stream(8);
        let mut seen = [false; 13];
        for _ in 0..2000 {
            let s = random_snapshot(&mut rng, 12);
            seen[s.available_channels as usize] = true;
        }
        assert!(seen.iter().all(|&x| x));
    }
}
