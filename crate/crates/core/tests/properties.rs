use faer::Mat;
use num_complex::Complex64;
use proptest::prelude::*;
use squid_gate::dynamics::{basis_state, cnot_fidelity, cnot_fidelity_at, cnot_pulse, evolve, DmOptions};
use squid_gate::ita::{max_probability, DrivePulse};
use squid_gate::model::{derive_scales, DeviceParams, ModelScales, WorkingParams};
use squid_gate::spectro::{solve_spectrum, SpectroOptions, SpectroTable};
use squid_gate::sweep::{ita_leakage_map, EvalContext, SweepAxis, SweepSpec, WpAxis};

fn scales() -> ModelScales {
    derive_scales(&DeviceParams::new(100e-12, 40e-15, 1.2).unwrap()).unwrap()
}

fn energies(wp: &WorkingParams) -> Vec<f64> {
    solve_spectrum(&scales(), wp, &SpectroOptions::default()).unwrap().energies
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn spectrum_is_reflection_and_swap_symmetric(x_e1 in 0.4975f64..0.5025, x_e2 in 0.4975f64..0.5025, kappa in 0.0f64..2e-3) {
        let wp = WorkingParams { x_e1, x_e2, kappa };
        let base = energies(&wp);
        prop_assert!(max_diff(&base, &energies(&wp.reflected())) < 1e-8);
        prop_assert!(max_diff(&base, &energies(&wp.swapped())) < 1e-8);
    }

    #[test]
    fn two_level_maximum_follows_rwa(ratio in -5.0f64..5.0) {
        let (gap, amplitude) = (0.05, 5e-5);
        let rabi = amplitude;
        let detuning = ratio * rabi;
        let mut o = Mat::<f64>::zeros(2, 2);
        o[(0, 1)] = 1.0;
        o[(1, 0)] = 1.0;
        let table = SpectroTable::synthetic(vec![0.0, gap], o, 0.0, None);
        let effective = (rabi * rabi + detuning * detuning).sqrt();
        let pulse = DrivePulse::new(amplitude, gap - detuning, 1.2 * std::f64::consts::TAU / effective).unwrap();
        let run = evolve(&table, &pulse, &basis_state(2, 0), &DmOptions::default()).unwrap();
        prop_assert!((run.max_populations[1] - max_probability(rabi, detuning)).abs() < 0.02);
        prop_assert!(run.norm_drift < 1e-8);
    }

    #[test]
    fn evolution_preserves_norm(gap in 0.02f64..0.2, g in 0.1f64..2.0, phase in 0.0f64..std::f64::consts::TAU) {
        let mut o = Mat::<f64>::zeros(3, 3);
        o[(0, 1)] = g;
        o[(1, 0)] = g;
        o[(1, 2)] = 0.5 * g;
        o[(2, 1)] = 0.5 * g;
        o[(2, 2)] = g;
        let table = SpectroTable::synthetic(vec![0.0, gap, 2.3 * gap], o, 0.0, None);
        let pulse = DrivePulse::new(1e-3, gap, 2000.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let init = vec![Complex64::new(s, 0.0), Complex64::from_polar(s, phase), Complex64::new(0.0, 0.0)];
        let run = evolve(&table, &pulse, &init, &DmOptions::default()).unwrap();
        prop_assert!(run.norm_drift < 1e-8);
        prop_assert!(run.max_populations.iter().all(|p| (0.0..=1.0 + 1e-12).contains(p)));
    }
}

#[test]
fn fidelity_is_stable_after_the_pulse() {
    // free evolution after the pulse is a pure interaction-picture identity
    let wp = WorkingParams { x_e1: 0.499, x_e2: 0.49985, kappa: 5e-4 };
    let table = squid_gate::spectro::solve_coupled(&scales(), &wp, &SpectroOptions::default()).unwrap();
    let opts = DmOptions::default();
    let pulse = cnot_pulse(&table, 2e-4, &opts).unwrap().pulse;
    let at_end = cnot_fidelity(&table, &pulse, &opts).unwrap();
    let period = std::f64::consts::TAU / pulse.frequency;
    let later = cnot_fidelity_at(&table, &pulse, pulse.duration + period, &opts).unwrap();
    assert!((at_end.fidelity - later.fidelity).abs() < 1e-6, "{} vs {}", at_end.fidelity, later.fidelity);
    assert!(at_end.leakage_out.iter().all(|l| *l >= -1e-12 && *l < 1e-2));
}

#[test]
fn sweeps_are_repeatable() {
    let ctx = EvalContext::new(scales(), 2e-4);
    let spec = SweepSpec::new(
        WorkingParams { x_e1: 0.499, x_e2: 0.4997, kappa: 5e-4 },
        vec![
            SweepAxis::linspace(WpAxis::XE2, 0.4985, 0.5, 4).unwrap(),
            SweepAxis::linspace(WpAxis::Kappa, 1e-4, 2e-3, 3).unwrap(),
        ],
    )
    .unwrap();
    let a = ita_leakage_map(&ctx, &spec, 1).unwrap();
    let b = ita_leakage_map(&ctx, &spec, 3).unwrap();
    assert_eq!(a.points.len(), 12);
    for (p, q) in a.points.iter().zip(&b.points) {
        assert_eq!(p.wp, q.wp);
        assert_eq!(p.eta.to_bits(), q.eta.to_bits());
        assert_eq!(p.flag, q.flag);
    }
}
