use ductwarp::env::RangeDependentEnv;
use ductwarp::modes::{DepthGrid, ModeSolver};
use ductwarp::reference::{linear_duct_profile, reference_duct};
use ductwarp::synth::{
    synthesize_waveform, Geometry, ModeSelection, PulseShape, SourcePulse, Synthesis, SynthOptions,
};
use ductwarp::warp::{
    default_bands, refine_tr, separate_modes, unwarp_signal, warp_signal, Interpolation,
    ModeBand, SeparationOptions, TrScan, WarpPlan,
};
use ductwarp::Waveform;
use proptest::prelude::*;

const RANGE: f64 = 105e3;

fn synth(range: f64, selection: ModeSelection) -> Synthesis {
    let env = RangeDependentEnv::range_independent(linear_duct_profile(1000.0));
    let solver = ModeSolver::new(DepthGrid::new(1000.0, 0.5).unwrap()).max_phase_speed(1459.0);
    let pulse = SourcePulse::new(10.0, 100.0, PulseShape::RaisedCosine).unwrap();
    let opts = SynthOptions::new(400.0, 8.0).selection(selection);
    synthesize_waveform(&env, &solver, &Geometry::new(60.0, 60.0, range).unwrap(), &pulse, &opts)
        .unwrap()
}

#[test]
fn three_mode_synthesis_is_the_sum_of_single_modes() {
    let all = synth(RANGE, ModeSelection::Only(vec![1, 2, 3]));
    let parts: Vec<_> = (1..=3).map(|m| synth(RANGE, ModeSelection::single(m))).collect();
    let peak = all.waveform.samples().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for (i, &v) in all.waveform.samples().iter().enumerate() {
        let sum: f64 = parts.iter().map(|p| p.waveform.samples()[i]).sum();
        assert!((v - sum).abs() <= 1e-12 * peak, "sample {i}");
    }
}

#[test]
fn nothing_arrives_two_stft_windows_after_the_cutoff_time() {
    let s = synth(RANGE, ModeSelection::All);
    let w = &s.waveform;
    let window = SeparationOptions::<f64>::default().stft_window as f64 / w.sample_rate();
    let total = w.energy();
    let late = w.crop(s.t_r + 2.0 * window, w.end_time()).energy();
    assert!(late <= 1e-4 * total, "late energy fraction {}", late / total);
}

#[test]
fn refine_tr_recovers_a_range_offset() {
    let truth = RANGE * 1.005;
    let s = synth(truth, ModeSelection::All);
    let c0 = reference_duct().c0;
    let est = refine_tr(&s.waveform, RANGE, c0, &TrScan::default()).unwrap();
    let t_true = truth / c0;
    assert!(!est.fallback);
    assert!(((est.t_r - t_true) / t_true).abs() <= 5e-4, "{} vs {}", est.t_r, t_true);
}

#[test]
fn refine_tr_falls_back_without_an_interior_maximum() {
    let silent = Waveform::new(400.0, 69.0, vec![0.0; 3200]).unwrap();
    let est = refine_tr(&silent, RANGE, reference_duct().c0, &TrScan::default()).unwrap();
    assert!(est.fallback);
    assert_eq!(est.t_r, RANGE / reference_duct().c0);
}

#[test]
fn separation_reports_an_empty_band_as_absent() {
    let s = synth(RANGE, ModeSelection::Only(vec![1, 2]));
    let input = s.waveform.crop(s.t_r - 1.5, s.t_r - 0.05);
    let plan = WarpPlan::new(s.t_r, 4.0, Interpolation::Cubic).unwrap();
    let mut bands = default_bands(&reference_duct(), RANGE, &[1, 2, 3]).unwrap();
    bands.push(ModeBand::new(4, 30.0, 3.0).unwrap());
    let sep = separate_modes(&input, &plan, &bands, &SeparationOptions::default()).unwrap();
    let present: Vec<bool> = sep.iter().map(|m| m.is_present()).collect();
    assert_eq!(present, [true, true, false, false]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn warp_round_trip_keeps_band_limited_signals(
        tones in prop::collection::vec((1.0f64..40.0, 0.1f64..1.0, 0.0f64..6.3), 1..6),
        t_r in 40.0f64..120.0,
    ) {
        let fs = 200.0;
        let (a, b) = (0.5 * t_r, 0.99 * t_r);
        let n = ((b - a) * fs) as usize;
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                let win = (std::f64::consts::PI * t / (b - a)).sin().powi(2);
                win * tones
                    .iter()
                    .map(|&(f, amp, ph)| amp * (2.0 * std::f64::consts::PI * f * t + ph).sin())
                    .sum::<f64>()
            })
            .collect();
        let w = Waveform::new(fs, a, samples).unwrap();
        let plan = WarpPlan::new(t_r, 4.0, Interpolation::Cubic).unwrap();
        let back = unwarp_signal(&warp_signal(&w, &plan).unwrap(), &plan).unwrap();
        prop_assert!(back.correlation(&w).unwrap() >= 0.99);
    }
}
