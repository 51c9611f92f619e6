use super::{ProgressTracker, TelemetryRow};
use crate::arbitration::{
    arbitrate, blend, evaluate_status, ArbitrationError, AuthorityState, FlightStatus,
};
use crate::bci::{
    command_to_setpoint, scripted_pilot, BciChannel, BciCommand, ChannelEmission, ChannelError,
    CommandSetpoint,
};
use crate::config::{ConfigError, ExperimentConfig, RunMode};
use crate::control::{
    attitude_loop, collective_thrust, fuzzy_pid_step, inverse_solution, mix, AttitudePidState,
    AttitudeSetpoint, ControlError, PidState, SetpointLimits,
};
use crate::fuzzy::GainScheduler;
use crate::plant::{step, wrap_angle, QuadState};
use crate::track::{TrackError, Trajectory};
use nalgebra::{Vector2, Vector3};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation diverged at t={t:.2} s: {reason}")]
    Diverged { t: f64, reason: String },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Arbitration(#[from] ArbitrationError),
    #[error(transparent)]
    Track(#[from] TrackError),
}

/// Where brain intents come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrainSource {
    /// The greedy scripted pilot, consulted whenever the channel is ready.
    Scripted,
    /// Intents supplied by the caller on each step (live operator).
    Live,
}

/// Channel activity during one step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepEvents {
    pub emitted: Vec<ChannelEmission>,
    /// Live intents rejected by the recognition-interval limit.
    pub dropped: Vec<BciCommand>,
    pub delivered: Vec<ChannelEmission>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub row: TelemetryRow,
    pub status: FlightStatus,
    pub events: StepEvents,
}

/// Fixed-step closed loop: brain channel, autopilot, arbiter, cascade
/// controller and plant.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: ExperimentConfig,
    source: BrainSource,
    track: Trajectory,
    scheduler: GainScheduler,
    step_index: u64,
    state: QuadState,
    pid_x: PidState,
    pid_y: PidState,
    pid_z: PidState,
    attitude_pid: AttitudePidState,
    yaw_target: f64,
    altitude_target: f64,
    channel: BciChannel,
    held: BciCommand,
    status: Option<FlightStatus>,
    authority: AuthorityState,
    ref_s: f64,
    progress: ProgressTracker,
}

fn initial_authority(mode: RunMode) -> AuthorityState {
    match mode {
        RunMode::Auto => AuthorityState::auto(),
        RunMode::Brain | RunMode::Shared => AuthorityState::brain(),
    }
}

impl Simulation {
    pub fn new(cfg: ExperimentConfig, source: BrainSource) -> Result<Self, SimError> {
        cfg.validate()?;
        let track = cfg.track.build()?;
        let channel = BciChannel::new(cfg.channel.model(cfg.seed))?;
        let start = track.reference_at(0.0);
        let state = QuadState {
            position: start.position,
            attitude: Vector3::new(0.0, 0.0, start.heading),
            ..QuadState::default()
        };
        Ok(Self {
            source,
            scheduler: GainScheduler::default(),
            step_index: 0,
            state,
            pid_x: PidState::default(),
            pid_y: PidState::default(),
            pid_z: PidState::default(),
            attitude_pid: AttitudePidState::default(),
            yaw_target: start.heading,
            altitude_target: track.altitude(),
            channel,
            held: BciCommand::Hover,
            status: None,
            authority: initial_authority(cfg.mode),
            ref_s: 0.0,
            progress: ProgressTracker::new(),
            track,
            cfg,
        })
    }

    /// Back to the initial state with the same configuration.
    pub fn reset(&mut self) -> Result<(), SimError> {
        let mode = self.cfg.mode;
        *self = Self::new(self.cfg.clone(), self.source)?;
        self.set_mode(mode);
        Ok(())
    }

    pub fn set_mode(&mut self, mode: RunMode) {
        if mode != self.cfg.mode {
            self.cfg.mode = mode;
            self.authority = initial_authority(mode);
        }
    }

    pub fn mode(&self) -> RunMode {
        self.cfg.mode
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn track(&self) -> &Trajectory {
        &self.track
    }

    pub fn state(&self) -> &QuadState {
        &self.state
    }

    pub fn authority(&self) -> &AuthorityState {
        &self.authority
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.cfg.dt
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn held_command(&self) -> BciCommand {
        self.held
    }

    pub fn lap_complete(&self) -> bool {
        self.progress.max_progress >= self.track.total_length()
    }

    /// True once the configured duration has elapsed or a lap is done.
    pub fn finished(&self) -> bool {
        self.time() >= self.cfg.duration - 1e-9 || self.lap_complete()
    }

    fn brain_intake(
        &mut self,
        t: f64,
        live: &[BciCommand],
        events: &mut StepEvents,
    ) -> Result<(), SimError> {
        match self.source {
            BrainSource::Scripted => {
                if self.cfg.mode != RunMode::Auto && self.channel.ready(t) {
                    let intent = scripted_pilot(
                        &self.state,
                        &self.track,
                        &self.cfg.pilot,
                        &self.cfg.commands,
                        &self.cfg.plant,
                    );
                    events.emitted.extend(self.channel.emit(intent, t)?);
                }
            }
            BrainSource::Live => {
                for &intent in live {
                    match self.channel.emit(intent, t)? {
                        Some(e) => events.emitted.push(e),
                        None => events.dropped.push(intent),
                    }
                }
            }
        }
        for e in self.channel.deliver_due(t) {
            self.held = e.delivered;
            events.delivered.push(e);
        }
        Ok(())
    }

    /// Advances one `dt`. `live` carries operator intents for this step and
    /// is ignored for a scripted source. The returned row describes the
    /// state at the start of the step and the commands applied over it.
    pub fn step(&mut self, live: &[BciCommand]) -> Result<StepOutput, SimError> {
        let dt = self.cfg.dt;
        let t = self.time();
        let mut events = StepEvents::default();
        self.brain_intake(t, live, &mut events)?;

        let status = evaluate_status(
            &self.state,
            &self.track,
            self.status.as_ref(),
            dt,
            &self.cfg.arbiter.weights,
        );
        if self.cfg.mode == RunMode::Shared {
            self.authority = arbitrate(&status, &self.authority, t, &self.cfg.arbiter)?;
        }

        let pos = self.state.position;
        self.progress.update(&self.track, pos.xy());
        let vehicle_s = self.progress.arc_length();
        let lead = self.cfg.reference.max_lead;
        self.ref_s = self.ref_s.clamp(vehicle_s - lead, vehicle_s + lead);
        let reference = self.track.reference_at(self.ref_s);

        let c = self.cfg.controller;
        let plant = self.cfg.plant;
        let limits = SetpointLimits {
            tilt_limit: c.tilt_limit,
            max_thrust: plant.max_thrust(),
        };
        let yaw = self.state.attitude.z;

        // Autopilot: fuzzy PID on x/y position error, mapped to a tilt.
        let err = reference.position - pos;
        let (ax, pid_x, gains_x) =
            fuzzy_pid_step(&c.horizontal, &self.pid_x, err.x, dt, &self.scheduler)?;
        let (ay, pid_y, _) = fuzzy_pid_step(&c.horizontal, &self.pid_y, err.y, dt, &self.scheduler)?;
        (self.pid_x, self.pid_y) = (pid_x, pid_y);
        let mut accel = Vector2::new(ax, ay);
        if accel.norm() > c.max_horizontal_accel {
            accel *= c.max_horizontal_accel / accel.norm();
        }
        let tilt = inverse_solution(
            Vector3::new(accel.x, accel.y, 0.0),
            yaw,
            plant.mass,
            plant.gravity,
            &limits,
        );
        let auto_sp = CommandSetpoint {
            yaw_rate: (c.yaw_gain * wrap_angle(reference.heading - yaw))
                .clamp(-c.max_yaw_rate, c.max_yaw_rate),
            vertical_velocity: (c.climb_gain * (self.track.altitude() - self.altitude_target))
                .clamp(-c.max_climb_rate, c.max_climb_rate),
            ..CommandSetpoint::from_plant_tilt(tilt.roll, tilt.pitch)
        };

        let brain_sp = command_to_setpoint(self.held, &self.cfg.commands);
        let sp = blend(&brain_sp, &auto_sp, self.authority.alpha);

        // Yaw and height targets integrate the blended rates, leashed to the
        // vehicle so they cannot run away while the loops catch up.
        let yaw_lead = wrap_angle(self.yaw_target + sp.yaw_rate * dt - yaw)
            .clamp(-c.yaw_target_window, c.yaw_target_window);
        self.yaw_target = wrap_angle(yaw + yaw_lead);
        let alt_lead = (self.altitude_target + sp.vertical_velocity * dt - pos.z)
            .clamp(-c.altitude_target_window, c.altitude_target_window);
        self.altitude_target = pos.z + alt_lead;

        let (az, pid_z, _) = fuzzy_pid_step(
            &c.altitude,
            &self.pid_z,
            self.altitude_target - pos.z,
            dt,
            &self.scheduler,
        )?;
        self.pid_z = pid_z;
        let (roll, pitch) = sp.plant_tilt();
        let setpoint = AttitudeSetpoint {
            roll: roll.clamp(-c.tilt_limit, c.tilt_limit),
            pitch: pitch.clamp(-c.tilt_limit, c.tilt_limit),
            yaw: self.yaw_target,
            thrust: collective_thrust(az, plant.mass, plant.gravity, limits.max_thrust),
        };
        let (torque, attitude_pid) =
            attitude_loop(&setpoint, &self.state, &c.attitude, &self.attitude_pid, dt)?;
        self.attitude_pid = attitude_pid;
        let mixed = mix(setpoint.thrust, torque, &plant.geometry());

        let att = self.state.attitude;
        let [m1, m2, m3, m4] = mixed.motors.0;
        let row = TelemetryRow {
            t,
            x: pos.x,
            y: pos.y,
            z: pos.z,
            roll: att.x,
            pitch: att.y,
            yaw: att.z,
            ref_x: reference.position.x,
            ref_y: reference.position.y,
            ref_z: reference.position.z,
            e_xt: status.cross_track,
            rho: status.risk,
            alpha: self.authority.alpha,
            mode: self.authority.mode,
            cmd: self.held,
            kp_eff: gains_x.kp,
            ki_eff: gains_x.ki,
            kd_eff: gains_x.kd,
            m1,
            m2,
            m3,
            m4,
            saturated: u8::from(mixed.saturated),
        };

        self.state = step(&self.state, &mixed.motors, &plant, dt).map_err(|e| {
            SimError::Diverged {
                t,
                reason: e.to_string(),
            }
        })?;
        let bound = self.cfg.divergence_bound;
        if self.state.to_array().iter().any(|v| !v.is_finite() || v.abs() > bound) {
            return Err(SimError::Diverged {
                t,
                reason: format!("state magnitude exceeds {bound}"),
            });
        }

        self.status = Some(status);
        self.step_index += 1;
        self.ref_s += self.cfg.reference.speed * dt;
        Ok(StepOutput {
            row,
            status,
            events,
        })
    }
}
