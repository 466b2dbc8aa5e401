use std::fmt::Write as _;

use rand::Rng;

use super::{empirical_regret, AdaptState, ARMS};
use crate::content_space::SEGMENT_WIDTH;
use crate::error::{Error, Result};
use crate::generator::{CpTarget, Generator};
use crate::seed;

/// Player surrogate: survives a CP of difficulty `a` with probability `survival[a - 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedAgent {
    pub name: String,
    pub survival: [f64; ARMS],
}

impl SimulatedAgent {
    pub const PROFILES: [(&'static str, [f64; ARMS]); 3] = [
        ("novice", [0.90, 0.70, 0.45, 0.25, 0.10]),
        ("intermediate", [0.97, 0.90, 0.75, 0.55, 0.35]),
        ("skilful", [1.0, 1.0, 0.99, 0.97, 0.95]),
    ];

    pub fn new(name: impl Into<String>, survival: [f64; ARMS]) -> Result<Self> {
        if survival.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument(format!("survival probabilities {survival:?} outside [0, 1]")));
        }
        if survival.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument(format!("survival probabilities {survival:?} increase with difficulty")));
        }
        Ok(SimulatedAgent { name: name.into(), survival })
    }

    pub fn profile(name: &str) -> Option<SimulatedAgent> {
        Self::PROFILES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(n, p)| SimulatedAgent { name: (*n).to_string(), survival: *p })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    Adaptive,
    /// Every CP's difficulty uniform over the arms.
    Static,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionConfig {
    pub games: usize,
    /// Stops mid-game once this many CPs have been played.
    pub max_plays: Option<usize>,
    pub cps_per_game: usize,
    pub policy: Policy,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { games: 30, max_plays: None, cps_per_game: 10, policy: Policy::Adaptive }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlayEvent {
    /// 1-based play counter over the session.
    pub t: u64,
    pub game: usize,
    pub arm: usize,
    pub reward: bool,
    /// Columns covered in the current game after this CP.
    pub distance: usize,
    pub length: usize,
    /// Posteriors after the update.
    pub alpha: [f64; ARMS],
    pub beta: [f64; ARMS],
}

pub const TRACE_HEADER: &str =
    "t,arm,reward,distance,length,alpha1,alpha2,alpha3,alpha4,alpha5,beta1,beta2,beta3,beta4,beta5";
pub const SUMMARY_HEADER: &str = "trial,theta_opt,agent,games,mean_completion,final_regret";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlayTrace {
    pub events: Vec<PlayEvent>,
}

impl PlayTrace {
    pub fn rewards(&self) -> Vec<bool> {
        self.events.iter().map(|e| e.reward).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{TRACE_HEADER}\n");
        for e in &self.events {
            let _ = write!(s, "{},{},{},{},{}", e.t, e.arm, u8::from(e.reward), e.distance, e.length);
            for v in e.alpha.iter().chain(&e.beta) {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameResult {
    pub distance: usize,
    pub length: usize,
}

impl GameResult {
    pub fn completion(&self) -> f64 {
        self.distance as f64 / self.length as f64
    }
}

pub fn completion_rate(distance: usize, length: usize) -> Result<f64> {
    if length == 0 {
        return Err(Error::InvalidArgument("level length is zero".into()));
    }
    Ok(distance.min(length) as f64 / length as f64)
}

#[derive(Clone, Debug)]
pub struct Session {
    pub trace: PlayTrace,
    /// Finished games only.
    pub games: Vec<GameResult>,
    pub state: AdaptState,
}

impl Session {
    pub fn mean_completion(&self) -> f64 {
        if self.games.is_empty() {
            return 0.0;
        }
        self.games.iter().map(GameResult::completion).sum::<f64>() / self.games.len() as f64
    }

    pub fn final_regret(&self) -> Result<f64> {
        empirical_regret(&self.trace.rewards(), self.state.theta_opt)
    }
}

/// RNG stream for CP generation inside a session.
const GENERATION_STREAM: u64 = u64::MAX;

/// Plays games of `cps_per_game` CPs, each framed by an entry and an exit
/// segment. A death ends the game at the middle of the fatal CP. The
/// survival roll of CP `slot` in game `g` comes from its own stream, so
/// sessions with the same seed face the same luck whatever they select.
pub fn run_session(
    agent: &SimulatedAgent,
    cfg: &SessionConfig,
    mut state: AdaptState,
    generator: Option<&Generator>,
    rng_seed: u64,
) -> Result<Session> {
    if cfg.cps_per_game == 0 {
        return Err(Error::InvalidArgument("games need at least one CP".into()));
    }
    let w = SEGMENT_WIDTH as usize;
    let length = w * (cfg.cps_per_game + 2);
    let mut select_rng = seed::stream(rng_seed, 0);
    let mut trace = PlayTrace::default();
    let mut games = Vec::new();
    let limit = cfg.max_plays.unwrap_or(usize::MAX);
    'games: for game in 0..cfg.games {
        let mut distance = w;
        let mut height = None;
        for slot in 0..cfg.cps_per_game {
            if trace.events.len() >= limit {
                break 'games;
            }
            let arm = match cfg.policy {
                Policy::Adaptive => state.select(&mut select_rng),
                Policy::Static => select_rng.random_range(1..=ARMS),
            };
            if let Some(g) = generator {
                let target = CpTarget { difficulty: Some(arm as u8), platform_height: height, ..CpTarget::default() };
                let mut rng = seed::rng(seed::derive2(rng_seed, GENERATION_STREAM, state.t));
                height = Some(g.produce_cp(&target, &mut rng)?.segment.platform_height);
            }
            let roll: f64 = seed::rng(seed::derive2(rng_seed, 1 + game as u64, slot as u64)).random();
            let survived = roll < agent.survival[arm - 1];
            state.update(arm, survived)?;
            distance += if survived { w } else { w / 2 };
            trace.events.push(PlayEvent {
                t: state.t,
                game,
                arm,
                reward: survived,
                distance,
                length,
                alpha: state.alpha,
                beta: state.beta,
            });
            if !survived {
                break;
            }
        }
        if distance == length - w {
            distance = length;
        }
        games.push(GameResult { distance, length });
    }
    Ok(Session { trace, games, state })
}
