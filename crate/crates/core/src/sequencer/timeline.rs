use rand::Rng;
use thiserror::Error;

use super::config::{scene_index_at, SceneConfig, SceneConfigError};

#[derive(Debug, Clone, PartialEq)]
pub enum SequencerEvent {
    SceneChange { scene: String },
    KeyMomentStart { texture: String },
    KeyMomentEnd,
}

/// A key moment in progress: every brush carries `texture` until `until_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Takeover {
    pub texture: String,
    pub until_s: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("texture `{0}` is not in the catalog")]
pub struct UnknownTexture(pub String);

/// Clock-driven scene progression with operator overrides.
///
/// Operator requests are queued and take effect on the next
/// [`Sequencer::advance`], so they land on a tick boundary.
#[derive(Debug, Clone)]
pub struct Sequencer {
    config: SceneConfig,
    scene: Option<usize>,
    forced: Option<usize>,
    next_key_moment: usize,
    takeover: Option<Takeover>,
    pending_trigger: Option<String>,
    pending_advance: bool,
}

impl Sequencer {
    pub fn new(config: SceneConfig) -> Result<Self, SceneConfigError> {
        config.validate()?;
        let mut config = config;
        config.key_moments.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
        Ok(Sequencer {
            config,
            scene: None,
            forced: None,
            next_key_moment: 0,
            takeover: None,
            pending_trigger: None,
            pending_advance: false,
        })
    }

    pub fn config(&self) -> &SceneConfig {
        &self.config
    }

    /// Moves the timeline to `t_s` seconds into the performance. The first
    /// call selects the opening scene without reporting a change.
    pub fn advance(&mut self, t_s: f64) -> Vec<SequencerEvent> {
        let mut events = Vec::new();
        if self.takeover.as_ref().is_some_and(|tk| t_s >= tk.until_s) {
            self.takeover = None;
            events.push(SequencerEvent::KeyMomentEnd);
        }

        let last = self.config.scenes.len() - 1;
        if std::mem::take(&mut self.pending_advance) {
            let current = self.scene.unwrap_or_else(|| scene_index_at(t_s, &self.config));
            self.forced = Some((current + 1).min(last));
        }
        let mut idx = scene_index_at(t_s, &self.config);
        if let Some(f) = self.forced {
            idx = idx.max(f);
        }
        match self.scene {
            None => self.scene = Some(idx),
            Some(prev) if prev != idx => {
                self.scene = Some(idx);
                events.push(SequencerEvent::SceneChange { scene: self.config.scenes[idx].id.clone() });
            }
            Some(_) => {}
        }

        let moments = &self.config.key_moments;
        let mut due = None;
        while self.next_key_moment < moments.len() && moments[self.next_key_moment].time_s <= t_s {
            due = Some(moments[self.next_key_moment].texture.clone());
            self.next_key_moment += 1;
        }
        if let Some(texture) = self.pending_trigger.take().or(due) {
            self.takeover = Some(Takeover { texture: texture.clone(), until_s: t_s + self.config.key_moment_duration_s });
            events.push(SequencerEvent::KeyMomentStart { texture });
        }
        events
    }

    pub fn scene_index(&self) -> usize {
        self.scene.unwrap_or(0)
    }

    pub fn scene_id(&self) -> &str {
        &self.config.scenes[self.scene_index()].id
    }

    /// Texture pool of the active scene.
    pub fn pool(&self) -> &[String] {
        &self.config.scenes[self.scene_index()].textures
    }

    pub fn takeover(&self) -> Option<&Takeover> {
        self.takeover.as_ref()
    }

    pub fn cycling_suspended(&self) -> bool {
        self.takeover.is_some()
    }

    /// Queues an operator-triggered key moment.
    pub fn request_key_moment(&mut self, texture: &str) -> Result<(), UnknownTexture> {
        if !self.config.in_catalog(texture) {
            return Err(UnknownTexture(texture.to_owned()));
        }
        self.pending_trigger = Some(texture.to_owned());
        Ok(())
    }

    /// Queues a jump to the next scene. The timeline still moves later
    /// scenes in at their scheduled times.
    pub fn request_advance_scene(&mut self) {
        self.pending_advance = true;
    }
}

/// A new texture for a brush: uniform over the pool minus the brush's
/// current texture. A pool of one returns that texture.
pub fn cycle_texture<R: Rng + ?Sized>(current: &str, pool: &[String], rng: &mut R) -> String {
    assert!(!pool.is_empty(), "texture pools are validated nonempty at load");
    let excluded = pool.iter().position(|t| t == current);
    let eligible = pool.len() - usize::from(excluded.is_some());
    if eligible == 0 {
        return pool[0].clone();
    }
    let mut k = rng.random_range(0..eligible);
    if let Some(x) = excluded {
        if k >= x {
            k += 1;
        }
    }
    pool[k].clone()
}

/// A random texture from the pool, for initial assignment.
pub fn pick_texture<R: Rng + ?Sized>(pool: &[String], rng: &mut R) -> String {
    pool[rng.random_range(0..pool.len())].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequencer::{KeyMoment, Scene};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pool(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t/{i:02}.jpg")).collect()
    }

    fn config() -> SceneConfig {
        SceneConfig {
            scenes: vec![
                Scene { id: "concrete".into(), start_s: 0.0, textures: pool(4), cue: None },
                Scene { id: "city".into(), start_s: 60.0, textures: vec!["c/1.jpg".into(), "c/2.jpg".into()], cue: None },
                Scene { id: "forest".into(), start_s: 120.0, textures: vec!["f/1.jpg".into()], cue: None },
            ],
            paintings: vec!["p/1.jpg".into(), "p/2.jpg".into()],
            key_moments: vec![KeyMoment { time_s: 30.0, texture: "p/1.jpg".into() }],
            key_moment_duration_s: 10.0,
        }
    }

    #[test]
    fn single_texture_pool_returns_it() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(cycle_texture("x", &pool(1)[..], &mut rng), "t/00.jpg");
        assert_eq!(cycle_texture("t/00.jpg", &pool(1), &mut rng), "t/00.jpg");
    }

    #[test]
    fn never_returns_current_texture() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = pool(5);
        for _ in 0..1000 {
            assert_ne!(cycle_texture("t/03.jpg", &p, &mut rng), "t/03.jpg");
        }
    }

    #[test]
    fn fixed_seed_fixed_sequence() {
        let p = pool(20);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cur = p[0].clone();
            (0..50).map(|_| { cur = cycle_texture(&cur, &p, &mut rng); cur.clone() }).collect::<Vec<_>>()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }

    #[test]
    fn timeline_events() {
        let mut s = Sequencer::new(config()).unwrap();
        assert!(s.advance(0.0).is_empty());
        assert_eq!(s.scene_id(), "concrete");
        assert_eq!(s.advance(30.0), vec![SequencerEvent::KeyMomentStart { texture: "p/1.jpg".into() }]);
        assert!(s.cycling_suspended());
        assert!(s.advance(39.9).is_empty());
        assert_eq!(s.advance(40.0), vec![SequencerEvent::KeyMomentEnd]);
        assert!(!s.cycling_suspended());
        assert_eq!(s.advance(60.0), vec![SequencerEvent::SceneChange { scene: "city".into() }]);
        assert_eq!(s.pool(), ["c/1.jpg", "c/2.jpg"]);
    }

    #[test]
    fn operator_overrides() {
        let mut s = Sequencer::new(config()).unwrap();
        s.advance(0.0);
        s.request_advance_scene();
        assert_eq!(s.advance(1.0), vec![SequencerEvent::SceneChange { scene: "city".into() }]);
        // Timeline catching up to the forced scene is not a change.
        assert!(s.advance(60.0).iter().all(|e| !matches!(e, SequencerEvent::SceneChange { .. })));
        assert_eq!(s.request_key_moment("nope.jpg"), Err(UnknownTexture("nope.jpg".into())));
        s.request_key_moment("p/2.jpg").unwrap();
        assert_eq!(s.advance(61.0), vec![SequencerEvent::KeyMomentStart { texture: "p/2.jpg".into() }]);
        assert_eq!(s.takeover().unwrap().until_s, 71.0);
        s.request_advance_scene();
        s.request_advance_scene();
        s.advance(62.0);
        assert_eq!(s.scene_id(), "forest");
        s.request_advance_scene();
        s.advance(63.0);
        assert_eq!(s.scene_id(), "forest");
    }
}
