mod common;

use common::mackey_glass_euler;
use pffdnn_core::signals::*;

#[test]
fn unit_history_is_an_equilibrium() {
    // a y / (1 + y^p) = c y at y = 1 when a = 2c.
    let cfg = MackeyGlassConfig { history: 1.0, ..Default::default() };
    let sol = integrate_mackey_glass(&cfg, 600.0).unwrap();
    assert!(sol.values().iter().all(|v| (v - 1.0).abs() < 1e-8));
}

#[test]
fn halving_the_step_barely_moves_the_solution() {
    let cfg = MackeyGlassConfig::default();
    let coarse = integrate_mackey_glass(&cfg, 600.0).unwrap();
    let fine = integrate_mackey_glass(&MackeyGlassConfig { step: cfg.step / 2.0, ..cfg }, 600.0).unwrap();
    assert_eq!(fine.values().len(), 2 * coarse.values().len() - 1);
    for (i, &v) in coarse.values().iter().enumerate() {
        assert!((v - fine.values()[2 * i]).abs() < 1e-4, "x = {}", i as f64 * cfg.step);
    }
}

#[test]
fn agrees_with_a_fine_euler_integration() {
    let cfg = MackeyGlassConfig::default();
    let sol = integrate_mackey_glass(&cfg, 600.0).unwrap();
    // Euler is first order; at h = 1e-3 its own error peaks near 1.3e-3 around
    // x = 465, so the reference uses a step half that size.
    let euler = mackey_glass_euler(&cfg, 0.0005, 600.0);
    for (i, &v) in sol.values().iter().enumerate() {
        assert!((v - euler[20 * i]).abs() < 1e-3, "x = {}", i as f64 * cfg.step);
    }
}

#[test]
fn solution_stays_positive_and_bounded() {
    let sol = integrate_mackey_glass(&MackeyGlassConfig::default(), 600.0).unwrap();
    assert!(sol.values().iter().all(|&v| v > 0.0 && v < 2.0));
    assert_eq!(sol.x_end(), 600.0);
}

#[test]
fn dense_output_interpolates_the_grid() {
    let sol = integrate_mackey_glass(&MackeyGlassConfig::default(), 300.0).unwrap();
    for i in [0, 1, 7, 15_000, 30_000] {
        assert!((sol.eval(i as f64 * sol.step()) - sol.values()[i]).abs() < 1e-12);
    }
    assert_eq!(sol.eval(-5.0), 1.2);
    let mid = sol.eval(150.005);
    let (a, b) = (sol.values()[15_000], sol.values()[15_001]);
    assert!(mid > a.min(b) - 1e-6 && mid < a.max(b) + 1e-6);
}

#[test]
fn sampled_signal_skips_the_transient() {
    let spec = SignalSpec::new(SignalKind::MackeyGlass).with_samples(500);
    let samples = sample_signal(&spec).unwrap();
    let sol = integrate_mackey_glass(&spec.mackey_glass, 600.0).unwrap();
    for (x, v) in spec.grid().iter().zip(&samples).step_by(50) {
        assert!((sol.eval(*x) - v).abs() < 1e-12, "x = {x}");
    }
}

#[test]
fn delay_must_be_a_step_multiple() {
    let cfg = MackeyGlassConfig { step: 0.07, ..Default::default() };
    assert!(integrate_mackey_glass(&cfg, 10.0).is_err());
    assert!(integrate_mackey_glass(&MackeyGlassConfig::default(), -1.0).is_err());
}
