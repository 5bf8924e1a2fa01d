use motionbrush::sequencer::{current_scene, cycle_texture, load_scenes, SceneConfig, SceneConfigError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FIXTURE: &str = r#"{
  "scenes": [
    {"id": "concrete", "start_s": 0, "textures": ["concrete/01.jpg", "concrete/02.jpg"]},
    {"id": "city", "start_s": 60, "textures": ["city/01.jpg"], "cue": "traffic swell"},
    {"id": "forest", "start_s": 120, "textures": ["forest/01.jpg", "forest/02.jpg"]}
  ],
  "paintings": ["paintings/sunrise.jpg"],
  "key_moments": [{"time_s": 90, "texture": "paintings/sunrise.jpg"}]
}"#;

#[test]
fn interval_lookup() {
    let cfg = SceneConfig::from_json(FIXTURE).unwrap();
    assert_eq!(current_scene(0.0, &cfg), "concrete");
    assert_eq!(current_scene(60.0, &cfg), "city");
    assert_eq!(current_scene(61.0, &cfg), "city");
    assert_eq!(current_scene(119.999, &cfg), "city");
    assert_eq!(current_scene(1e6, &cfg), "forest");
    assert_eq!(cfg.key_moment_duration_s, 30.0);
    let mut prev = 0;
    for k in 0..2000 {
        let idx = cfg.scenes.iter().position(|s| s.id == current_scene(k as f64 * 0.1, &cfg)).unwrap();
        assert!(idx >= prev);
        prev = idx;
    }
}

#[test]
fn load_reports_every_issue_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenes.json");
    std::fs::write(&path, FIXTURE).unwrap();
    assert_eq!(load_scenes(&path).unwrap().scenes.len(), 3);

    let bad = FIXTURE
        .replace(r#""textures": ["city/01.jpg"]"#, r#""textures": []"#)
        .replace(r#""start_s": 120"#, r#""start_s": 30"#)
        .replace(r#""texture": "paintings/sunrise.jpg""#, r#""texture": "paintings/missing.jpg""#);
    std::fs::write(&path, bad).unwrap();
    let SceneConfigError::Invalid(issues) = load_scenes(&path).unwrap_err() else { panic!("expected validation error") };
    let text: Vec<String> = issues.iter().map(ToString::to_string).collect();
    assert_eq!(issues.len(), 3, "{text:?}");
    assert!(text.iter().any(|t| t.contains("scenes[1]") && t.contains("city")));
    assert!(text.iter().any(|t| t.contains("scenes[2].start_s")));
    assert!(text.iter().any(|t| t.contains("key_moments[0]")));
}

#[test]
fn cycling_is_uniform_over_the_other_nineteen() {
    let pool: Vec<String> = (0..20).map(|i| format!("t{i}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut counts = [0u64; 20];
    let draws = 100_000;
    for _ in 0..draws {
        let next = cycle_texture("t7", &pool, &mut rng);
        counts[pool.iter().position(|t| *t == next).unwrap()] += 1;
    }
    assert_eq!(counts[7], 0);
    let expected = draws as f64 / 19.0;
    let chi2: f64 = counts.iter().enumerate().filter(|(i, _)| *i != 7).map(|(_, &c)| (c as f64 - expected).powi(2) / expected).sum();
    // 18 degrees of freedom: mean 18, sd 6.
    assert!(chi2 < 18.0 + 3.0 * 6.0, "chi2 = {chi2}");
    let sigma = (expected * (1.0 - 1.0 / 19.0)).sqrt();
    assert!(counts.iter().enumerate().filter(|(i, _)| *i != 7).all(|(_, &c)| (c as f64 - expected).abs() < 4.0 * sigma));
}
