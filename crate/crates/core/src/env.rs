//! Problem instances, outcome sampling and instance normalisation.
//!
//! Rounds are 1-based throughout. An instance is a finite context space with
//! arrival probabilities and a list of segments; each segment carries its own
//! mean table and applies from its start round until the next segment begins.
//! A single segment is the stationary environment.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const PROBABILITY_TOL: f64 = 1e-12;

/// Constraint direction: packing (`+1`, total at most the budget) or covering
/// (`-1`, total at least the budget).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum Sign {
    Packing,
    Covering,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Packing => 1.0,
            Sign::Covering => -1.0,
        }
    }
}

impl TryFrom<i32> for Sign {
    type Error = String;

    fn try_from(v: i32) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(Sign::Packing),
            -1 => Ok(Sign::Covering),
            other => Err(format!("constraint sign must be +1 or -1, got {other}")),
        }
    }
}

impl From<Sign> for i32 {
    fn from(s: Sign) -> i32 {
        match s {
            Sign::Packing => 1,
            Sign::Covering => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    pub sign: Sign,
    pub budget: f64,
    #[serde(default)]
    pub is_time: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConstraintSpec {
    pub resources: Vec<Resource>,
}

impl ConstraintSpec {
    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    /// Signs as `±1.0`, in resource order.
    pub fn signs(&self) -> Vec<f64> {
        self.resources.iter().map(|r| r.sign.value()).collect()
    }

    pub fn time_resource(&self) -> Option<usize> {
        self.resources.iter().position(|r| r.is_time)
    }

    /// Smallest budget; after normalisation every budget equals it.
    pub fn common_budget(&self) -> f64 {
        self.resources.iter().map(|r| r.budget).fold(f64::INFINITY, f64::min)
    }
}

/// Noise family used when sampling one outcome coordinate around its mean.
///
/// - `Deterministic`: the mean itself.
/// - `Bernoulli`: two-point law on `{0, 1}` (non-negative mean) or `{-1, 0}`
///   (negative mean) with the prescribed mean.
/// - `TruncatedGaussian`: Gaussian around the mean, clamped to the legal
///   interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    Deterministic,
    Bernoulli,
    TruncatedGaussian { std: f64 },
}

/// Mean outcome table for one segment: `reward[x][a]` and
/// `consumption[x][a][i]`, plus one noise descriptor per outcome coordinate
/// (reward first). An empty noise list means fully deterministic outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeModel {
    pub reward: Vec<Vec<f64>>,
    pub consumption: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub noise: Vec<Noise>,
}

impl OutcomeModel {
    pub fn deterministic(reward: Vec<Vec<f64>>, consumption: Vec<Vec<Vec<f64>>>) -> Self {
        Self {
            reward,
            consumption,
            noise: Vec::new(),
        }
    }

    pub fn num_contexts(&self) -> usize {
        self.reward.len()
    }

    /// Noise for outcome coordinate `j` (0 = reward, `i + 1` = resource `i`).
    pub fn noise_for(&self, coordinate: usize) -> Noise {
        self.noise.get(coordinate).copied().unwrap_or(Noise::Deterministic)
    }

    /// Mean of outcome coordinate `j` at `(x, a)` (0 = reward).
    pub fn mean(&self, context: usize, arm: usize, coordinate: usize) -> f64 {
        if coordinate == 0 {
            self.reward[context][arm]
        } else {
            self.consumption[context][arm][coordinate - 1]
        }
    }

    /// Copy with consumption means lowered by `shift[i]` for every resource.
    pub fn shifted(&self, shift: &[f64]) -> Self {
        let mut out = self.clone();
        for row in out.consumption.iter_mut() {
            for cons in row.iter_mut() {
                for (c, s) in cons.iter_mut().zip(shift) {
                    *c -= s;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// First round (1-based) governed by this segment.
    pub start: usize,
    /// Arrival probabilities for this segment; defaults to the instance's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrivals: Option<Vec<f64>>,
    pub model: OutcomeModel,
}

/// A constrained contextual bandit problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub horizon: usize,
    pub num_arms: usize,
    pub num_contexts: usize,
    pub arrivals: Vec<f64>,
    pub constraints: ConstraintSpec,
    pub segments: Vec<Segment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_arm: Option<usize>,
}

impl InstanceSpec {
    pub fn num_resources(&self) -> usize {
        self.constraints.len()
    }

    /// Number of environment switches.
    pub fn num_switches(&self) -> usize {
        self.segments.len().saturating_sub(1)
    }

    /// Rounds at which the environment switches (segment starts after the first).
    pub fn switch_rounds(&self) -> Vec<usize> {
        self.segments.iter().skip(1).map(|s| s.start).collect()
    }

    pub fn budget(&self) -> f64 {
        self.constraints.common_budget()
    }

    /// `T / B`.
    pub fn ratio(&self) -> f64 {
        self.horizon as f64 / self.budget()
    }

    pub fn is_stationary(&self) -> bool {
        self.segments.len() == 1
    }

    pub fn segment_arrivals(&self, segment: usize) -> &[f64] {
        self.segments[segment].arrivals.as_deref().unwrap_or(&self.arrivals)
    }

    /// Index of the segment governing `round` (1-based).
    pub fn segment_index(&self, round: usize) -> usize {
        self.segments.partition_point(|s| s.start <= round) - 1
    }

    /// `(start, end_inclusive)` of each segment.
    pub fn segment_bounds(&self) -> Vec<(usize, usize)> {
        self.segments
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let end = self.segments.get(j + 1).map_or(self.horizon, |n| n.start - 1);
                (s.start, end)
            })
            .collect()
    }

    /// Copy restricted to one segment, re-labelled as stationary with horizon
    /// equal to the full horizon (per-round LP values are horizon-free).
    pub fn segment_as_stationary(&self, segment: usize) -> InstanceSpec {
        let seg = &self.segments[segment];
        InstanceSpec {
            arrivals: self.segment_arrivals(segment).to_vec(),
            segments: vec![Segment {
                start: 1,
                arrivals: None,
                model: seg.model.clone(),
            }],
            ..self.clone()
        }
    }

    /// Structural validation: shapes, probability vectors, ranges, segments.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.horizon < 1 {
            return bad("horizon must be positive".into());
        }
        if self.num_arms < 2 {
            return bad(format!("need at least 2 arms, got {}", self.num_arms));
        }
        if self.num_contexts < 1 {
            return bad("need at least one context".into());
        }
        if self.constraints.is_empty() {
            return bad("need at least one resource".into());
        }
        if let Some(null) = self.null_arm {
            if null >= self.num_arms {
                return bad(format!("null arm {null} out of range"));
            }
        }
        if self.constraints.resources.iter().filter(|r| r.is_time).count() > 1 {
            return bad("more than one resource flagged as time".into());
        }
        check_distribution(&self.arrivals, self.num_contexts, "arrivals")?;
        if self.segments.is_empty() {
            return bad("need at least one segment".into());
        }
        if self.segments[0].start != 1 {
            return bad("first segment must start at round 1".into());
        }
        for w in self.segments.windows(2) {
            if w[1].start <= w[0].start {
                return bad("segment starts must be strictly increasing".into());
            }
        }
        if self.segments.last().map_or(0, |s| s.start) > self.horizon {
            return bad("segment starts beyond the horizon".into());
        }
        let d = self.num_resources();
        for (j, seg) in self.segments.iter().enumerate() {
            if let Some(arr) = &seg.arrivals {
                check_distribution(arr, self.num_contexts, &format!("segments[{j}].arrivals"))?;
            }
            let m = &seg.model;
            if m.reward.len() != self.num_contexts || m.consumption.len() != self.num_contexts {
                return bad(format!("segment {j}: mean tables must have one row per context"));
            }
            if !m.noise.is_empty() && m.noise.len() != d + 1 {
                return bad(format!("segment {j}: expected {} noise descriptors", d + 1));
            }
            for noise in &m.noise {
                if let Noise::TruncatedGaussian { std } = noise {
                    if !(std.is_finite() && *std >= 0.0) {
                        return bad(format!("segment {j}: invalid noise std {std}"));
                    }
                }
            }
            for x in 0..self.num_contexts {
                if m.reward[x].len() != self.num_arms || m.consumption[x].len() != self.num_arms {
                    return bad(format!("segment {j}, context {x}: expected {} arms", self.num_arms));
                }
                for a in 0..self.num_arms {
                    let r = m.reward[x][a];
                    if !(0.0..=1.0).contains(&r) {
                        return bad(format!("segment {j}: reward({x},{a}) = {r} outside [0,1]"));
                    }
                    if m.consumption[x][a].len() != d {
                        return bad(format!("segment {j}: consumption({x},{a}) needs {d} entries"));
                    }
                    for (i, &c) in m.consumption[x][a].iter().enumerate() {
                        if !(-1.0..=1.0).contains(&c) {
                            return Err(Error::ConsumptionOutOfRange { resource: i, value: c });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// True when budgets are equal and exactly one time resource is present.
    pub fn is_normalized(&self) -> bool {
        let b = self.budget();
        let time = self.constraints.time_resource();
        time.is_some()
            && self.constraints.resources[time.unwrap_or(0)].sign == Sign::Packing
            && self.constraints.resources.iter().all(|r| r.budget == b)
    }

    /// Rescale every resource to the common budget `B = min_i B_i` and make
    /// sure a time resource (rate `B/T`, packing, budget `B`) is present.
    pub fn normalize(&self) -> Result<InstanceSpec> {
        let t = self.horizon as f64;
        for (i, r) in self.constraints.resources.iter().enumerate() {
            if !(r.budget > 0.0 && r.budget <= t) {
                return Err(Error::InvalidBudget {
                    resource: i,
                    budget: r.budget,
                });
            }
        }
        self.validate()?;
        let b = self.budget();
        let mut out = self.clone();
        let has_time = self.constraints.time_resource().is_some();
        if let Some(i) = self.constraints.time_resource() {
            if self.constraints.resources[i].sign != Sign::Packing {
                return Err(Error::InvalidInstance("time resource must be packing".into()));
            }
        }
        let scales: Vec<f64> = self.constraints.resources.iter().map(|r| b / r.budget).collect();
        for seg in out.segments.iter_mut() {
            for (x, row) in seg.model.consumption.iter_mut().enumerate() {
                for (a, cons) in row.iter_mut().enumerate() {
                    for (i, c) in cons.iter_mut().enumerate() {
                        if self.constraints.resources[i].is_time {
                            *c = b / t;
                            continue;
                        }
                        let v = *c * scales[i];
                        if !(-1.0..=1.0).contains(&v) {
                            let _ = (x, a);
                            return Err(Error::ConsumptionOutOfRange { resource: i, value: v });
                        }
                        *c = v;
                    }
                    if !has_time {
                        cons.push(b / t);
                    }
                }
            }
            for (i, noise) in seg.model.noise.iter_mut().enumerate().skip(1) {
                if self.constraints.resources[i - 1].is_time {
                    *noise = Noise::Deterministic;
                } else if let Noise::TruncatedGaussian { std } = noise {
                    *std *= scales[i - 1];
                }
            }
            if !has_time && !seg.model.noise.is_empty() {
                seg.model.noise.push(Noise::Deterministic);
            }
        }
        for r in out.constraints.resources.iter_mut() {
            r.budget = b;
        }
        if !has_time {
            out.constraints.resources.push(Resource {
                sign: Sign::Packing,
                budget: b,
                is_time: true,
            });
        }
        out.validate()?;
        Ok(out)
    }
}

fn check_distribution(p: &[f64], n: usize, what: &str) -> Result<()> {
    if p.len() != n {
        return Err(Error::InvalidInstance(format!(
            "{what}: expected {n} entries, got {}",
            p.len()
        )));
    }
    if p.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidInstance(format!("{what}: negative probability")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_TOL {
        return Err(Error::InvalidInstance(format!("{what}: probabilities sum to {total}")));
    }
    Ok(())
}

/// One round of counterfactual outcomes: `K` rows of `(reward, c_1..c_d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeMatrix {
    num_arms: usize,
    width: usize,
    data: Vec<f64>,
}

impl OutcomeMatrix {
    pub fn new(num_arms: usize, num_resources: usize) -> Self {
        Self {
            num_arms,
            width: num_resources + 1,
            data: vec![0.0; num_arms * (num_resources + 1)],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let width = rows.first().map_or(1, Vec::len);
        assert!(rows.iter().all(|r| r.len() == width), "ragged outcome rows");
        Self {
            num_arms: rows.len(),
            width,
            data: rows.concat(),
        }
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn num_resources(&self) -> usize {
        self.width - 1
    }

    /// Outcome vector `(reward, c_1..c_d)` of `arm`.
    pub fn row(&self, arm: usize) -> &[f64] {
        &self.data[arm * self.width..(arm + 1) * self.width]
    }

    pub fn row_mut(&mut self, arm: usize) -> &mut [f64] {
        &mut self.data[arm * self.width..(arm + 1) * self.width]
    }

    pub fn reward(&self, arm: usize) -> f64 {
        self.row(arm)[0]
    }

    pub fn consumption(&self, arm: usize, resource: usize) -> f64 {
        self.row(arm)[resource + 1]
    }
}

/// Count of noise draws that had to be clamped into the legal interval.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClampStats {
    pub draws: u64,
    pub clamped: u64,
}

impl ClampStats {
    pub fn rate(&self) -> f64 {
        if self.draws == 0 {
            0.0
        } else {
            self.clamped as f64 / self.draws as f64
        }
    }
}

/// Draw `(x_t, M_t)` for `round` (1-based).
pub fn sample_round<R: Rng + ?Sized>(spec: &InstanceSpec, round: usize, rng: &mut R) -> (usize, OutcomeMatrix) {
    sample_round_with_stats(spec, round, rng, &mut ClampStats::default())
}

/// [`sample_round`] that also tallies Gaussian clamping.
pub fn sample_round_with_stats<R: Rng + ?Sized>(
    spec: &InstanceSpec,
    round: usize,
    rng: &mut R,
    stats: &mut ClampStats,
) -> (usize, OutcomeMatrix) {
    debug_assert!(round >= 1 && round <= spec.horizon);
    let seg_idx = spec.segment_index(round);
    let arrivals = spec.segment_arrivals(seg_idx);
    let model = &spec.segments[seg_idx].model;
    let u: f64 = rng.random();
    let context = crate::util::sample_index(arrivals, u);
    let d = spec.num_resources();
    let mut matrix = OutcomeMatrix::new(spec.num_arms, d);
    for a in 0..spec.num_arms {
        let row = matrix.row_mut(a);
        row[0] = draw(model.reward[context][a], model.noise_for(0), 0.0, rng, stats);
        for i in 0..d {
            let mean = model.consumption[context][a][i];
            row[i + 1] = if spec.constraints.resources[i].is_time {
                mean
            } else {
                draw(mean, model.noise_for(i + 1), -1.0, rng, stats)
            };
        }
    }
    (context, matrix)
}

fn draw<R: Rng + ?Sized>(mean: f64, noise: Noise, lo: f64, rng: &mut R, stats: &mut ClampStats) -> f64 {
    match noise {
        Noise::Deterministic => mean,
        Noise::Bernoulli => {
            let u: f64 = rng.random();
            if mean >= 0.0 {
                if u < mean {
                    1.0
                } else {
                    0.0
                }
            } else if u < -mean {
                -1.0
            } else {
                0.0
            }
        }
        Noise::TruncatedGaussian { std } => {
            if std == 0.0 {
                return mean;
            }
            // std validated non-negative and finite
            let v = Normal::new(mean, std).expect("validated std").sample(rng);
            stats.draws += 1;
            if v < lo || v > 1.0 {
                stats.clamped += 1;
            }
            v.clamp(lo, 1.0)
        }
    }
}
