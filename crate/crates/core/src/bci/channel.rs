use super::BciCommand;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Slack for floating-point sample times when enforcing the recognition
/// interval.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ChannelError {
    #[error("time went backwards: {t} after {last}")]
    NonMonotoneTime { t: f64, last: f64 },
    #[error("invalid channel model: {0}")]
    InvalidModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelModel {
    /// Probability that an emitted command equals the intent.
    pub accuracy: f64,
    /// Minimum time between emissions (s).
    pub recognition_interval: f64,
    /// Delay between emission and delivery (s).
    pub latency: f64,
    pub seed: u64,
}

impl ChannelModel {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(0.0..=1.0).contains(&self.accuracy) {
            return Err(ChannelError::InvalidModel("accuracy must be in [0, 1]".into()));
        }
        if !(self.recognition_interval > 0.0 && self.recognition_interval.is_finite()) {
            return Err(ChannelError::InvalidModel(
                "recognition_interval must be positive".into(),
            ));
        }
        if !(self.latency >= 0.0 && self.latency.is_finite()) {
            return Err(ChannelError::InvalidModel("latency must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelEmission {
    pub intended: BciCommand,
    pub delivered: BciCommand,
    pub emitted_at: f64,
    pub deliver_at: f64,
}

impl ChannelEmission {
    pub fn corrupted(&self) -> bool {
        self.intended != self.delivered
    }
}

/// Sequential transducer from intents to delayed, possibly wrong, commands.
#[derive(Debug, Clone)]
pub struct BciChannel {
    model: ChannelModel,
    rng: ChaCha8Rng,
    last_time: Option<f64>,
    last_emit: Option<f64>,
    pending: VecDeque<ChannelEmission>,
}

impl BciChannel {
    pub fn new(model: ChannelModel) -> Result<Self, ChannelError> {
        model.validate()?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(model.seed),
            model,
            last_time: None,
            last_emit: None,
            pending: VecDeque::new(),
        })
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    /// Whether an intent presented at `t` would be recognized.
    pub fn ready(&self, t: f64) -> bool {
        self.last_emit
            .is_none_or(|last| t - last >= self.model.recognition_interval - TIME_EPS)
    }

    /// Presents an intent at time `t`. Returns the emission if the channel
    /// was ready; the command itself only becomes active once
    /// [`deliver_due`](Self::deliver_due) reaches its delivery time.
    pub fn emit(
        &mut self,
        intended: BciCommand,
        t: f64,
    ) -> Result<Option<ChannelEmission>, ChannelError> {
        if let Some(last) = self.last_time {
            if t < last {
                return Err(ChannelError::NonMonotoneTime { t, last });
            }
        }
        self.last_time = Some(t);
        if !self.ready(t) {
            return Ok(None);
        }
        self.last_emit = Some(t);
        let delivered = if self.rng.random::<f64>() < self.model.accuracy {
            intended
        } else {
            let mut i = self.rng.random_range(0..BciCommand::ALL.len() - 1);
            if i >= intended.index() {
                i += 1;
            }
            BciCommand::ALL[i]
        };
        let emission = ChannelEmission {
            intended,
            delivered,
            emitted_at: t,
            deliver_at: t + self.model.latency,
        };
        self.pending.push_back(emission);
        Ok(Some(emission))
    }

    /// Pops every pending emission whose delivery time is ≤ `t`, in order.
    pub fn deliver_due(&mut self, t: f64) -> Vec<ChannelEmission> {
        let mut out = Vec::new();
        while let Some(e) = self.pending.front() {
            if e.deliver_at > t + TIME_EPS {
                break;
            }
            out.extend(self.pending.pop_front());
        }
        out
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }
}
