//! Synthetic subjects: ground-truth trust generators and bot players.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use trustgrid_stats::poly::{is_invertible, is_stationary};

use crate::design::ExperimentPlan;
use crate::error::CoreError;
use crate::kinematics::{replay_keys, FrameState, Keys};
use crate::rng::{substream, tag};
use crate::search::{lawnmower_waypoints, searcher_path, start_frame, WaypointFollower};
use crate::series::TrustSeries;
use crate::trial::{count_intersections, simulate_trial, Capability, Strategy, TrialConfig};
use crate::world::WorldConfig;

/// Lagged trust/performance/fault recursion:
///
/// ```text
/// T(t) = phi1 T(t-1) + A1 P(t) + A1 phi2 P(t-1) + A2 F(t) + A2 phi3 F(t-1) + a(t)
/// ```
///
/// with `a(t) ~ N(0, noise_sd^2)` and zero pre-sample values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmavParams {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    pub a1: f64,
    pub a2: f64,
    pub noise_sd: f64,
}

impl ArmavParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.noise_sd >= 0.0) {
            return Err(CoreError::InvalidParameter(
                "noise_sd must be non-negative".into(),
            ));
        }
        if self.phi1.abs() >= 1.0 {
            return Err(CoreError::Nonstationary(format!(
                "|phi1| = {} >= 1",
                self.phi1.abs()
            )));
        }
        Ok(())
    }
}

pub fn gen_trust_armav(
    params: &ArmavParams,
    performance: &[f64],
    fault: &[f64],
    seed: u64,
) -> Result<Vec<f64>, CoreError> {
    params.validate()?;
    if performance.len() != fault.len() {
        return Err(CoreError::LengthMismatch {
            left: performance.len(),
            right: fault.len(),
        });
    }
    let noise = Normal::new(0.0, params.noise_sd)
        .map_err(|e| CoreError::InvalidParameter(e.to_string()))?;
    let mut rng = substream(seed, &[tag::TRUST]);
    let mut out = Vec::with_capacity(performance.len());
    let (mut prev_t, mut prev_p, mut prev_f) = (0.0, 0.0, 0.0);
    for (&p, &f) in performance.iter().zip(fault) {
        let a = if params.noise_sd > 0.0 {
            noise.sample(&mut rng)
        } else {
            0.0
        };
        let t = params.phi1 * prev_t
            + params.a1 * p
            + params.a1 * params.phi2 * prev_p
            + params.a2 * f
            + params.a2 * params.phi3 * prev_f
            + a;
        out.push(t);
        (prev_t, prev_p, prev_f) = (t, p, f);
    }
    Ok(out)
}

/// Performance proxy for one trial: the share of the true outliers that the
/// searcher reported.
pub fn performance_proxy(reported: u32, truth: u32) -> f64 {
    if truth == 0 {
        0.0
    } else {
        f64::from(reported) / f64::from(truth)
    }
}

/// Fault indicator for one trial: the searcher reported nothing.
pub fn fault_indicator(reported: u32) -> f64 {
    if reported == 0 {
        1.0
    } else {
        0.0
    }
}

/// Trust generated as capability levels plus ARIMA(p, d, q) noise:
///
/// ```text
/// trust_t = beta[capability_t] + eta_t,   (1 - B)^d eta_t ~ ARMA(phi, theta)
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTrustParams {
    /// Levels for 20%, 50% and 100% capability.
    pub beta: [f64; 3],
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub d: usize,
    pub noise_sd: f64,
    /// Output clamp, `None` to leave the latent series unbounded.
    pub clamp: Option<(f64, f64)>,
    /// Trust before the first trial. With `None` the noise starts from a
    /// burn-in draw; otherwise `eta` starts at `initial - beta[first]`.
    pub initial_trust: Option<f64>,
}

impl Default for SyntheticTrustParams {
    fn default() -> Self {
        Self {
            beta: [0.35, 0.55, 0.75],
            phi: vec![0.7],
            theta: vec![],
            d: 0,
            noise_sd: 0.05,
            clamp: Some((0.0, 1.0)),
            initial_trust: None,
        }
    }
}

const BURN_IN: usize = 500;

impl SyntheticTrustParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !is_stationary(&self.phi) {
            return Err(CoreError::Nonstationary(format!("phi = {:?}", self.phi)));
        }
        if !is_invertible(&self.theta) {
            return Err(CoreError::Nonstationary(format!(
                "theta = {:?} not invertible",
                self.theta
            )));
        }
        if self.d > 2 {
            return Err(CoreError::InvalidParameter(
                "differencing order above 2".into(),
            ));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(CoreError::InvalidParameter(
                "noise_sd must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Trust levels along an arbitrary capability sequence.
    pub fn simulate(&self, capabilities: &[Capability], seed: u64) -> Result<Vec<f64>, CoreError> {
        self.validate()?;
        let n = capabilities.len();
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut rng = substream(seed, &[tag::TRUST]);
        let draw = {
            let noise = Normal::new(0.0, self.noise_sd)
                .map_err(|e| CoreError::InvalidParameter(e.to_string()))?;
            let sd = self.noise_sd;
            move |rng: &mut ChaCha8Rng| if sd > 0.0 { noise.sample(rng) } else { 0.0 }
        };
        let (p, q) = (self.phi.len(), self.theta.len());
        let offset0 = self
            .initial_trust
            .map(|x| x - self.beta[capabilities[0].index()]);

        // ARMA part: for d == 0 it is eta itself, otherwise its d-th difference
        let burn = if offset0.is_some() && self.d == 0 {
            0
        } else {
            BURN_IN
        };
        let presample = if self.d == 0 {
            offset0.unwrap_or(0.0)
        } else {
            0.0
        };
        let mut w = vec![presample; p];
        let mut e = vec![0.0; q];
        let mut arma = Vec::with_capacity(n);
        for t in 0..burn + n {
            let et = draw(&mut rng);
            let mut wt = et;
            for i in 0..p {
                wt += self.phi[i] * w[w.len() - 1 - i];
            }
            for j in 0..q {
                wt += self.theta[j] * e[e.len() - 1 - j];
            }
            if p > 0 {
                w.remove(0);
                w.push(wt);
            }
            if q > 0 {
                e.remove(0);
                e.push(et);
            }
            if t >= burn {
                arma.push(wt);
            }
        }

        let mut eta = arma;
        for _ in 0..self.d {
            let mut level = offset0.unwrap_or(0.0);
            for v in eta.iter_mut() {
                level += *v;
                *v = level;
            }
        }
        Ok(capabilities
            .iter()
            .zip(eta)
            .map(|(c, n)| {
                let v = self.beta[c.index()] + n;
                match self.clamp {
                    Some((lo, hi)) => v.clamp(lo, hi),
                    None => v,
                }
            })
            .collect())
    }
}

/// Trust over a plan's 63 main trials.
pub fn gen_trust_arimax(
    params: &SyntheticTrustParams,
    plan: &ExperimentPlan,
    seed: u64,
) -> Result<TrustSeries, CoreError> {
    let caps: Vec<Capability> = plan
        .main_trials()
        .filter_map(TrialConfig::capability)
        .collect();
    let values = params.simulate(&caps, seed)?;
    TrustSeries::from_plan(plan, values)
}

/// Nearest Likert answer to a unit-interval trust value.
pub fn likert_from_trust(trust: f64) -> u8 {
    (1.0 + 8.0 * trust.clamp(0.0, 1.0)).round() as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BotKind {
    /// Sweeps bottom-up, the mirror image of the lawnmower searcher.
    LawnmowerComplement,
    /// Holds a random key combination for 10-30 ticks at a time.
    RandomWalk,
    /// Shadows the searcher: replays its keys when it is key-driven,
    /// chases its position otherwise.
    Overlapper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BotPolicy {
    pub kind: BotKind,
    /// Probability of noticing each outlier the spotlight touches.
    pub skill: f64,
}

impl BotPolicy {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(0.0..=1.0).contains(&self.skill) {
            return Err(CoreError::InvalidParameter(format!(
                "skill {} outside [0, 1]",
                self.skill
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BotTrial {
    /// One key mask per tick.
    pub keys: Vec<Keys>,
    /// `keys.len() + 1` frames, the first being the start frame.
    pub frames: Vec<FrameState>,
    pub intersected: u32,
    pub found_count: u32,
    pub total_estimate: u32,
}

pub fn bot_play_trial(
    policy: &BotPolicy,
    trial: &TrialConfig,
    world: &WorldConfig,
    seed: u64,
) -> Result<BotTrial, CoreError> {
    policy.validate()?;
    let ticks = world.trial_ticks();
    let mut rng = substream(seed, &[tag::BOT, u64::from(trial.trial_index)]);
    let start = start_frame(world);
    let as_path = searcher_path(trial, world);

    let keys: Vec<Keys> = match policy.kind {
        BotKind::LawnmowerComplement => {
            let mut wps = lawnmower_waypoints(world);
            wps.reverse();
            WaypointFollower::lawnmower(wps, world).keys(start, ticks, world)
        }
        BotKind::RandomWalk => {
            let mut keys = Vec::with_capacity(ticks);
            while keys.len() < ticks {
                let hold = rng.random_range(10..=30);
                let k = Keys::from_axes([rng.random_range(-1..=1), rng.random_range(-1..=1)]);
                keys.extend(std::iter::repeat_n(k, hold));
            }
            keys.truncate(ticks);
            keys
        }
        BotKind::Overlapper => match trial.strategy() {
            Some(Strategy::Lawnmower | Strategy::Omniscient) => {
                as_path[1..].iter().map(|f| f.keys).collect()
            }
            Some(Strategy::Random) => {
                WaypointFollower::chase(&as_path, world).keys(start, ticks, world)
            }
            None => WaypointFollower::lawnmower(lawnmower_waypoints(world), world)
                .keys(start, ticks, world),
        },
    };

    let frames = replay_keys(start, &keys, world);
    let intersected = count_intersections(&frames, &trial.outlier_cells, world) as u32;
    let found_count = (0..intersected)
        .filter(|_| rng.random_bool(policy.skill))
        .count() as u32;
    let reported = simulate_trial(trial, world, None).reported_by_as;
    Ok(BotTrial {
        keys,
        frames,
        intersected,
        found_count,
        total_estimate: found_count + reported,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{build_plan, Group};
    use crate::kinematics::first_illegal_frame;
    use crate::trial::SearcherConfig;

    #[test]
    fn armav_zero_params_zero_output() {
        let p = ArmavParams {
            phi1: 0.0,
            phi2: 0.0,
            phi3: 0.0,
            a1: 0.0,
            a2: 0.0,
            noise_sd: 0.0,
        };
        let out = gen_trust_armav(&p, &[0.3, 0.9, 0.1], &[1.0, 0.0, 1.0], 1).unwrap();
        assert_eq!(out, vec![0.0; 3]);
    }

    #[test]
    fn armav_collapses_to_performance() {
        let p = ArmavParams {
            phi1: 0.0,
            phi2: 0.0,
            phi3: 0.0,
            a1: 1.0,
            a2: 0.0,
            noise_sd: 0.0,
        };
        let perf = [0.2, 0.4, 1.0, 0.0];
        assert_eq!(
            gen_trust_armav(&p, &perf, &[0.0; 4], 1).unwrap(),
            perf.to_vec()
        );
    }

    #[test]
    fn armav_step_response_golden() {
        // Hand-unrolled: P = [0, 1, 1, 1, 1], F = [1, 0, 0, 0, 0],
        // phi1 = .6, A1 = .4, A2 = -.3, phi2 = phi3 = 0.
        // T0 = -.3
        // T1 = .6(-.3) + .4 = .22
        // T2 = .6(.22) + .4 = .532
        // T3 = .6(.532) + .4 = .7192
        // T4 = .6(.7192) + .4 = .83152
        let p = ArmavParams {
            phi1: 0.6,
            phi2: 0.0,
            phi3: 0.0,
            a1: 0.4,
            a2: -0.3,
            noise_sd: 0.0,
        };
        let out = gen_trust_armav(
            &p,
            &[0.0, 1.0, 1.0, 1.0, 1.0],
            &[1.0, 0.0, 0.0, 0.0, 0.0],
            0,
        )
        .unwrap();
        let golden = [-0.3, 0.22, 0.532, 0.7192, 0.83152];
        for (a, b) in out.iter().zip(golden) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn armav_lag_terms() {
        // phi2 and phi3 only act through the lagged inputs
        let p = ArmavParams {
            phi1: 0.0,
            phi2: 0.5,
            phi3: 2.0,
            a1: 1.0,
            a2: 1.0,
            noise_sd: 0.0,
        };
        let out = gen_trust_armav(&p, &[1.0, 0.0], &[0.0, 1.0], 0).unwrap();
        assert_eq!(out, vec![1.0, 0.5 + 1.0]);
    }

    #[test]
    fn armav_rejects_mismatch_and_nonstationary() {
        let p = ArmavParams {
            phi1: 0.5,
            phi2: 0.0,
            phi3: 0.0,
            a1: 1.0,
            a2: 0.0,
            noise_sd: 0.1,
        };
        assert!(gen_trust_armav(&p, &[1.0], &[], 0).is_err());
        let bad = ArmavParams { phi1: 1.0, ..p };
        assert!(gen_trust_armav(&bad, &[1.0], &[0.0], 0).is_err());
    }

    #[test]
    fn proxies() {
        assert_eq!(performance_proxy(5, 10), 0.5);
        assert_eq!(fault_indicator(0), 1.0);
        assert_eq!(fault_indicator(2), 0.0);
    }

    fn plan() -> ExperimentPlan {
        build_plan(21, Group::G0, &WorldConfig::default())
    }

    #[test]
    fn arimax_white_levels_exact() {
        let params = SyntheticTrustParams {
            phi: vec![],
            theta: vec![],
            noise_sd: 0.0,
            ..Default::default()
        };
        let s = gen_trust_arimax(&params, &plan(), 3).unwrap();
        assert_eq!(s.len(), 63);
        for (v, c) in s.values.iter().zip(&s.capability) {
            assert_eq!(*v, params.beta[c.index()]);
        }
    }

    #[test]
    fn arimax_ar1_geometric_approach() {
        // Closed form: eta_t = 0.5^(t+1) (initial - beta)
        let params = SyntheticTrustParams {
            phi: vec![0.5],
            noise_sd: 0.0,
            initial_trust: Some(0.0),
            clamp: None,
            ..Default::default()
        };
        let caps = vec![Capability::C100; 30];
        let out = params.simulate(&caps, 0).unwrap();
        let beta = params.beta[2];
        for (t, v) in out.iter().enumerate() {
            let expect = beta + 0.5f64.powi(t as i32 + 1) * (0.0 - beta);
            assert!((v - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn arimax_replays_and_clamps() {
        let params = SyntheticTrustParams {
            noise_sd: 0.5,
            ..Default::default()
        };
        let a = gen_trust_arimax(&params, &plan(), 9).unwrap();
        assert_eq!(a, gen_trust_arimax(&params, &plan(), 9).unwrap());
        assert!(a.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn arimax_rejects_nonstationary() {
        let params = SyntheticTrustParams {
            phi: vec![1.1],
            ..Default::default()
        };
        assert!(gen_trust_arimax(&params, &plan(), 0).is_err());
    }

    #[test]
    fn likert_mapping() {
        assert_eq!(likert_from_trust(0.0), 1);
        assert_eq!(likert_from_trust(1.0), 9);
        assert_eq!(likert_from_trust(0.5), 5);
        assert_eq!(likert_from_trust(-3.0), 1);
    }

    fn main_trial(strategy: Strategy, seed: u64) -> TrialConfig {
        TrialConfig::new(
            12,
            seed,
            Some(SearcherConfig::new(strategy, Capability::C50)),
            &WorldConfig::default(),
        )
    }

    #[test]
    fn zero_skill_finds_nothing() {
        let w = WorldConfig::default();
        let p = BotPolicy {
            kind: BotKind::LawnmowerComplement,
            skill: 0.0,
        };
        let r = bot_play_trial(&p, &main_trial(Strategy::Random, 4), &w, 1).unwrap();
        assert_eq!(r.found_count, 0);
    }

    #[test]
    fn perfect_overlapper_matches_searcher() {
        let w = WorldConfig::default();
        let p = BotPolicy {
            kind: BotKind::Overlapper,
            skill: 1.0,
        };
        for s in [Strategy::Lawnmower, Strategy::Omniscient] {
            let t = main_trial(s, 8);
            let r = bot_play_trial(&p, &t, &w, 2).unwrap();
            let out = simulate_trial(&t, &w, Some(&r.frames));
            assert_eq!(r.found_count, out.intersected_by_as);
            assert_eq!(r.total_estimate, r.found_count + out.reported_by_as);
        }
    }

    #[test]
    fn bot_traces_are_legal() {
        let w = WorldConfig::default();
        let t = main_trial(Strategy::Random, 5);
        for kind in [
            BotKind::LawnmowerComplement,
            BotKind::RandomWalk,
            BotKind::Overlapper,
        ] {
            let r = bot_play_trial(&BotPolicy { kind, skill: 0.8 }, &t, &w, 3).unwrap();
            assert_eq!(r.keys.len(), w.trial_ticks());
            assert_eq!(first_illegal_frame(&r.frames, &start_frame(&w), &w), None);
            assert!(r.found_count <= r.intersected);
        }
    }

    #[test]
    fn bad_skill_rejected() {
        let p = BotPolicy {
            kind: BotKind::RandomWalk,
            skill: 1.5,
        };
        assert!(bot_play_trial(
            &p,
            &main_trial(Strategy::Random, 1),
            &WorldConfig::default(),
            0
        )
        .is_err());
    }
}
