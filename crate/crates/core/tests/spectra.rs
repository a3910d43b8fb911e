mod common;

use std::f64::consts::PI;

use common::{protons, rel};
use spinspectra::exact::{exact_spectrum, ladder_trace_total, ExactOptions};
use spinspectra::spin::{larmor_frequency, PROTON_GAMMA};
use spinspectra::{Error, Isotope, Nucleus, SpectrometerSettings, SpinSystem};

fn settings(mhz: f64) -> SpectrometerSettings {
    SpectrometerSettings::from_mhz(mhz, 1.0).unwrap()
}

fn exact(system: &SpinSystem, s: &SpectrometerSettings) -> spinspectra::StickSpectrum {
    exact_spectrum::<f64>(system, s, &ExactOptions::new(s)).unwrap()
}

#[test]
fn lone_proton_is_one_stick_at_its_larmor_frequency() {
    let s = settings(400.0);
    let spec = exact(&protons(&[2.5], &[]), &s);
    assert_eq!(spec.len(), 1);
    let omega = 2.0 * PI * 400e6 * (1.0 + 2.5e-6);
    assert!(rel(spec.sticks[0].frequency, omega) < 1e-14);
    assert!(rel(spec.sticks[0].weight, PROTON_GAMMA * PROTON_GAMMA) < 1e-12);
}

/// Closed-form AB quartet: lines at ω̄ ± (D/2 ± π|J|) with D = √(Δω² + (2πJ)²);
/// the outer pair carries (γ²/2)(1 − 2π|J|/D), the inner pair (γ²/2)(1 + 2π|J|/D).
#[test]
fn strongly_coupled_pair_matches_ab_quartet() {
    let s = settings(80.0);
    for (d1, d2, j) in [(1.00, 1.08, 9.0), (3.0, 3.02, -12.5), (0.5, 2.5, 7.0)] {
        let sys = protons(&[d1, d2], &[(0, 1, j)]);
        let spec = exact(&sys, &s);
        // same f64 Larmor inputs as the solver; their difference is exact
        let w1 = larmor_frequency(sys.nucleus(0), &s);
        let w2 = larmor_frequency(sys.nucleus(1), &s);
        let mean = 0.5 * (w1 + w2);
        let delta = w1 - w2;
        let big_d = (delta.powi(2) + (2.0 * PI * j).powi(2)).sqrt();
        let pj = PI * j.abs();
        let g2 = PROTON_GAMMA * PROTON_GAMMA;
        let s2 = 2.0 * pj / big_d;
        let expected = [
            (mean - big_d / 2.0 - pj, 0.5 * g2 * (1.0 - s2)),
            (mean - big_d / 2.0 + pj, 0.5 * g2 * (1.0 + s2)),
            (mean + big_d / 2.0 - pj, 0.5 * g2 * (1.0 + s2)),
            (mean + big_d / 2.0 + pj, 0.5 * g2 * (1.0 - s2)),
        ];
        assert_eq!(spec.len(), 4, "{d1} {d2} {j}");
        for (stick, (f, w)) in spec.sticks.iter().zip(expected) {
            assert!(
                (stick.frequency - f).abs() < 1e-6,
                "{} vs {f}",
                stick.frequency
            );
            assert!(rel(stick.weight, w) < 1e-9, "{} vs {w}", stick.weight);
        }
    }
}

#[test]
fn heteronuclear_doublet_with_proton_detection() {
    let s = settings(400.0).with_detect_isotope(Some("1H".into()));
    let nuclei = vec![
        Nucleus::from_ppm("P", Isotope::phosphorus31(), -20.0).unwrap(),
        Nucleus::from_ppm("H", Isotope::proton(), 4.0).unwrap(),
    ];
    let j = 180.0;
    let sys = SpinSystem::new(nuclei, [(0, 1, j)]).unwrap();
    let spec = exact(&sys, &s);
    // P–H mixing of order πJ/Δω leaves combination lines near 1e-13 relative
    let strong: Vec<_> = spec
        .sticks
        .iter()
        .filter(|t| t.weight > 1e-9 * spec.total_weight())
        .collect();
    assert_eq!(strong.len(), 2);
    let wh = 2.0 * PI * 400e6 * (1.0 + 4.0e-6);
    for (stick, sign) in strong.into_iter().zip([-1.0, 1.0]) {
        // second-order shifts are (πJ)²/Δω ~ 1e-4 rad/s
        assert!((stick.frequency - (wh + sign * PI * j)).abs() < 1e-3);
        assert!(rel(stick.weight, 0.5 * PROTON_GAMMA * PROTON_GAMMA) < 1e-9);
    }
}

#[test]
fn spin_one_weight_follows_the_ladder_trace() {
    let s = settings(400.0);
    let deuteron = Isotope::with_spin("2H", 4.1066e7, 1.0).unwrap();
    let sys = SpinSystem::new(vec![Nucleus::from_ppm("D", deuteron, 0.0).unwrap()], []).unwrap();
    let spec = exact(&sys, &s);
    assert_eq!(spec.len(), 1);
    // Tr[I⁻I⁺] = Σ_m S(S+1) − m(m+1) = 4 on three states, times 2/3
    assert!(rel(spec.sticks[0].weight, 8.0 / 3.0 * 4.1066e7f64.powi(2)) < 1e-12);
    assert!(rel(ladder_trace_total(&sys, &s), spec.total_weight()) < 1e-12);
}

#[test]
fn sum_rule_for_coupled_chain() {
    let s = settings(20.0);
    let sys = protons(
        &[1.0, 1.1, 1.3, 2.0, 2.05, 4.0],
        &[
            (0, 1, 7.0),
            (1, 2, -12.0),
            (2, 3, 3.0),
            (3, 4, 15.0),
            (4, 5, 1.0),
            (0, 5, 2.0),
        ],
    );
    let spec = exact(&sys, &s);
    assert!(rel(spec.total_weight(), 6.0 * PROTON_GAMMA * PROTON_GAMMA) < 1e-10);
    assert!(spec.min_weight().unwrap() > -1e-12 * spec.total_weight());
}

#[test]
fn dimension_cap_is_reported() {
    let s = settings(400.0);
    let shifts: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
    let couplings: Vec<(usize, usize, f64)> = (0..9).map(|i| (i, i + 1, 7.0)).collect();
    let sys = protons(&shifts, &couplings);
    let opts = ExactOptions::new(&s).with_max_dimension(512);
    match exact_spectrum::<f64>(&sys, &s, &opts) {
        Err(Error::DimensionCap { dimension, cap }) => assert_eq!((dimension, cap), (1024, 512)),
        other => panic!("expected a dimension cap error, got {other:?}"),
    }
}

#[test]
fn f32_kernels_agree_with_f64_on_small_systems() {
    // 20 MHz keeps lab-frame frequencies within f32's useful range
    let s = settings(20.0);
    let sys = protons(&[1.0, 3.0], &[(0, 1, 10.0)]);
    let a = exact_spectrum::<f32>(&sys, &s, &ExactOptions::new(&s)).unwrap();
    let b = exact(&sys, &s);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.sticks.iter().zip(&b.sticks) {
        assert!(rel(x.frequency as f64, y.frequency) < 1e-6);
        assert!(rel(x.weight as f64, y.weight) < 1e-3);
    }
}
