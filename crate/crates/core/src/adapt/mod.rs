//! Difficulty adaptation: a Thompson-sampling bandit over five difficulty
//! arms, played against simulated agents.

mod session;

use rand::Rng;
use rand_distr::{Beta, Distribution};

pub use session::{
    completion_rate, run_session, GameResult, Policy, PlayEvent, PlayTrace, Session, SessionConfig, SimulatedAgent,
    SUMMARY_HEADER, TRACE_HEADER,
};

use crate::error::{Error, Result};

pub const ARMS: usize = 5;

/// Posterior state of the bandit. Arms are numbered 1..=5.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptState {
    pub alpha: [f64; ARMS],
    pub beta: [f64; ARMS],
    /// Plays so far in this episode.
    pub t: u64,
    pub last_arm: Option<usize>,
    pub last_reward: Option<bool>,
    pub theta_opt: f64,
}

fn check_arm(arm: usize) -> Result<()> {
    if (1..=ARMS).contains(&arm) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("arm {arm} outside 1..={ARMS}")))
    }
}

impl AdaptState {
    /// Fresh Beta(1, 1) priors on every arm.
    pub fn new(theta_opt: f64) -> Result<Self> {
        if !(theta_opt > 0.0 && theta_opt < 1.0) {
            return Err(Error::InvalidArgument(format!("theta_opt {theta_opt} outside (0, 1)")));
        }
        Ok(AdaptState { alpha: [1.0; ARMS], beta: [1.0; ARMS], t: 0, last_arm: None, last_reward: None, theta_opt })
    }

    /// Arms sampled at the next play: all of them at the start and after a
    /// death, otherwise the previous arm and its neighbours.
    pub fn eligible(&self) -> Vec<usize> {
        match (self.last_arm, self.last_reward) {
            (Some(a), Some(true)) => (a.saturating_sub(1).max(1)..=(a + 1).min(ARMS)).collect(),
            _ => (1..=ARMS).collect(),
        }
    }

    /// Draws a success probability for each eligible arm and returns the arm
    /// whose draw is closest to `theta_opt`; ties go to the lower arm.
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut best = (0, f64::INFINITY);
        for arm in self.eligible() {
            let i = arm - 1;
            let theta = Beta::new(self.alpha[i], self.beta[i]).expect("posterior parameters are positive").sample(rng);
            let gap = (self.theta_opt - theta).abs();
            if gap < best.1 {
                best = (arm, gap);
            }
        }
        best.0
    }

    pub fn update(&mut self, arm: usize, survived: bool) -> Result<()> {
        check_arm(arm)?;
        if survived {
            self.alpha[arm - 1] += 1.0;
        } else {
            self.beta[arm - 1] += 1.0;
        }
        self.t += 1;
        self.last_arm = Some(arm);
        self.last_reward = Some(survived);
        Ok(())
    }

    pub fn posterior_mean(&self, arm: usize) -> Result<f64> {
        check_arm(arm)?;
        Ok(self.alpha[arm - 1] / (self.alpha[arm - 1] + self.beta[arm - 1]))
    }

    /// Next episode: the posteriors become the priors, the play history resets.
    pub fn carry_over(&self) -> AdaptState {
        AdaptState { t: 0, last_arm: None, last_reward: None, ..self.clone() }
    }
}

/// Bernoulli likelihood of a reward given a success probability.
pub fn reward_likelihood(theta: f64, reward: bool) -> f64 {
    if reward {
        theta
    } else {
        1.0 - theta
    }
}

/// Distance between the target survival rate and the realised mean reward.
pub fn empirical_regret(rewards: &[bool], theta_opt: f64) -> Result<f64> {
    if rewards.is_empty() {
        return Err(Error::EmptyInput("play trace"));
    }
    let mean = rewards.iter().filter(|&&r| r).count() as f64 / rewards.len() as f64;
    Ok((theta_opt - mean).abs())
}
