use torus_hodge::config::ExperimentConfig;
use torus_hodge::curvature::{curvature_h, xu_wang_bound};
use torus_hodge::family::{trivialization_lift, BundleMap, FamilyFiber, FamilySpec};
use torus_hodge::hodge::HodgeOptions;
use torus_hodge::linalg::{c, C64};
use torus_hodge::report::run_curvature;
use torus_hodge::space::Disc;

fn report(json: &str) -> (serde_json::Value, bool) {
    let out = run_curvature(&ExperimentConfig::from_json(json).unwrap()).unwrap();
    (serde_json::from_str(&out.body).unwrap(), out.pass)
}

fn positive_fiber(d: u32, t: C64, n: usize) -> FamilyFiber {
    let spec = FamilySpec::elliptic(t, BundleMap::Positive { degree: d });
    FamilyFiber::new(&spec, t, Disc::Grid { n }, HodgeOptions::default()).unwrap()
}

#[test]
fn elliptic_degree_two_is_nakano_positive() {
    let (r, pass) = report(
        r#"{"family": {"id": "elliptic", "t": [0, 1]}, "bundle": {"kind": "positive", "degree": 2},
            "discretization": {"backend": "grid", "n": 32}, "lift": {"kind": "perturbed"}}"#,
    );
    assert!(pass);
    assert_eq!(r["report"]["rank"], 2);
    assert!(r["report"]["nakano_min_eig"].as_f64().unwrap() >= -1e-6);
    assert_eq!(r["tolerances"]["nakano"], 1e-6);
}

#[test]
fn jumping_family_near_the_locus_is_flagged() {
    let (at, _) = report(r#"{"family": {"id": "jumping", "t": [0, 1]}}"#);
    assert_eq!(at["report"]["jump_flag"], true);
    assert_eq!(at["report"]["rank"], 1);
    let (off, _) = report(r#"{"family": {"id": "jumping", "t": [0.01, 1]}}"#);
    assert_eq!(off["report"]["jump_flag"], false);
    assert_eq!(off["report"]["rank"], 0);
}

#[test]
fn trivial_family_has_no_curvature() {
    let period = r#"[[[0.1, 1.2], [0.1, 0.2]], [[0.1, 0.2], [0, 1.1]]]"#;
    let zero = |r: &serde_json::Value, key: &str| {
        r["report"][key].as_array().unwrap().iter().flat_map(|row| row.as_array().unwrap().clone()).all(|z| {
            z[0].as_f64().unwrap().abs() < 1e-12 && z[1].as_f64().unwrap().abs() < 1e-12
        })
    };
    let config = |lift: &str| {
        format!(
            r#"{{"family": {{"id": "trivial", "t": [0.3, 0.4], "period": {period}}},
                "bundle": {{"kind": "flat", "character": [0, 0, 0, 0]}}, "lift": {{"kind": "{lift}"}}}}"#
        )
    };
    let (r, pass) = report(&config("trivialization"));
    assert!(pass);
    for key in ["theta_h", "theta_h_bly", "term_theta_h", "term_kappa", "term_sff"] {
        assert!(zero(&r, key), "{key}");
    }
    // a moved lift produces nonzero terms that still cancel
    let (r, pass) = report(&config("perturbed"));
    assert!(pass);
    assert!(zero(&r, "theta_h") && zero(&r, "theta_h_bly"));
    assert!(!zero(&r, "term_sff"));
}

#[test]
fn curvature_is_sesquilinear_in_the_directions() {
    let ctx = positive_fiber(1, c(0.2, 1.3), 32);
    let basis = ctx.harmonic_basis().unwrap();
    let one = C64::new(1.0, 0.0);
    let unit = curvature_h(&ctx, &trivialization_lift(&ctx, one), Some(&basis), one, one).unwrap();
    let (sigma, tau) = (c(0.3, -0.7), c(1.1, 0.4));
    let scaled = curvature_h(&ctx, &trivialization_lift(&ctx, tau), Some(&basis), sigma, tau).unwrap();
    let want = unit.theta_h * (sigma * tau.conj());
    assert!((scaled.theta_h - &want).norm() <= 1e-10 * want.norm());
}

#[test]
fn positive_line_bundle_curvature_matches_the_oracle_value() {
    // the finite-difference Gram oracle gives 1/(8 Im t²) for every degree
    for d in 1..=2 {
        let t = c(0.2, 1.3);
        let ctx = positive_fiber(d, t, 32);
        let one = C64::new(1.0, 0.0);
        let r = curvature_h(&ctx, &trivialization_lift(&ctx, one), None, one, one).unwrap();
        let want = 1.0 / (8.0 * t.im * t.im);
        assert!((r.nakano_min_eig - want).abs() < 1e-9, "d={d}: {}", r.nakano_min_eig);
    }
}

#[test]
fn xu_wang_bound_holds_with_margin_on_a_positive_family() {
    let ctx = positive_fiber(2, c(0.0, 1.0), 32);
    let one = C64::new(1.0, 0.0);
    let bound = xu_wang_bound(&ctx, &trivialization_lift(&ctx, one), None, one).unwrap();
    let lhs_min = torus_hodge::linalg::herm_min_eig(&bound.lhs);
    assert!(lhs_min > 0.0);
    assert!(bound.margin >= -1e-9);
}
