use embsketch_wasm::{demo_profile, demo_quantizer, demo_scatter};

#[test]
fn default_profile() {
    let p = demo_profile(384, 96, 4, false).unwrap();
    assert_eq!(p.bytes_per_vector, 48);
    assert_eq!(p.ratio, 0.03125);
    assert_eq!(demo_profile(384, 96, 4, true).unwrap().bytes_per_vector, 50);
    assert!(demo_profile(384, 96, 0, false).is_err());
}

#[test]
fn quantizer_error_within_half_step() {
    let q = demo_quantizer(4, 3.0, 1001).unwrap();
    assert_eq!(q.z.len(), 1001);
    assert!(q.max_error <= q.step / 2.0 + 1e-12);
    assert_eq!(q.zhat[0], -3.0);
    assert_eq!(*q.zhat.last().unwrap(), 3.0);
}

#[test]
fn scatter_tracks_cosine() {
    let s = demo_scatter(384, 96, 4, 4, 3.0, 12345, 300, 1).unwrap();
    assert_eq!(s.cosine.len(), 300);
    assert!(s.pearson_sketch > 0.9);
    assert!((s.pearson_sketch - s.pearson_float).abs() < 0.02);
    assert!((0.9..1.1).contains(&s.mean_self_score));
    assert!(demo_scatter(1, 96, 4, 4, 3.0, 1, 10, 1).is_err());
}

#[test]
fn scatter_is_deterministic() {
    let a = demo_scatter(128, 32, 3, 2, 2.5, 7, 50, 9).unwrap();
    let b = demo_scatter(128, 32, 3, 2, 2.5, 7, 50, 9).unwrap();
    assert_eq!(a.sketch, b.sketch);
    assert_eq!(a.cosine, b.cosine);
}
