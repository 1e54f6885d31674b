use std::path::{Path, PathBuf};

use ductwarp::env::{fit_linear_duct, RangeDependentEnv, RangeInterpolation, Station};
use ductwarp::modes::{DepthGrid, ModeSolver};
use ductwarp::synth::{
    dispersion_skeleton, skeleton_csv, synthesize_waveform, transmission_loss_map, Geometry,
    ModeSelection, Propagation, PulseShape, SourcePulse, SynthOptions,
};
use ductwarp::warp::{
    default_bands, dispersion_csv, estimate_tr, extract_dispersion, refine_tr, separate_modes, stft,
    warp_signal, Interpolation, ModeBand, PowerSpectrum, SeparatedMode, SeparationOptions, TrScan,
    WarpPlan,
};
use ductwarp::wkb::{self, QuantizationCondition};
use ductwarp::{BathymetryTrack, LinearDuct, SoundSpeedProfile, Waveform};

use crate::cli::*;
use crate::error::{CliError, Result};
use crate::run::Run;
use crate::scenario::{Artifact, Scenario, TrMode, TrSource};

/// Resolution of the warped-domain power spectrum written next to warped signals.
const WARPED_RESOLUTION: f64 = 0.25;
const SKELETON_POINTS: usize = 91;

fn load_profile(run: &mut Run, path: &Path) -> Result<SoundSpeedProfile> {
    let text = run.read_input_text(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    SoundSpeedProfile::parse_csv(name, &text).map_err(|e| CliError::file(path, e))
}

fn load_bathymetry(run: &mut Run, path: &Path) -> Result<BathymetryTrack> {
    let text = run.read_input_text(path)?;
    BathymetryTrack::parse_csv(&text).map_err(|e| CliError::file(path, e))
}

fn load_input(run: &mut Run, input: &InputArgs) -> Result<Waveform> {
    let w = run.read_waveform(&input.input)?;
    match input.input_t0 {
        Some(t0) => Ok(Waveform::new(w.sample_rate(), t0, w.into_samples())?),
        None => Ok(w),
    }
}

fn build_solver(
    profile: &SoundSpeedProfile,
    depth: Option<f64>,
    dz: f64,
    max_phase_speed: Option<f64>,
    density: f64,
) -> Result<ModeSolver> {
    let grid = DepthGrid::new(depth.unwrap_or_else(|| profile.deepest()), dz)?;
    let mut solver = ModeSolver::new(grid).density(density);
    if let Some(c) = max_phase_speed {
        solver = solver.max_phase_speed(c);
    }
    Ok(solver)
}

fn solver_from_args(profile: &SoundSpeedProfile, args: &SolverArgs) -> Result<ModeSolver> {
    build_solver(profile, args.depth, args.dz, args.max_phase_speed, args.density)
}

fn build_env(
    run: &mut Run,
    ssp: &[PathBuf],
    station_ranges: &[f64],
    bathymetry: Option<&Path>,
    interp: InterpArg,
    density: f64,
) -> Result<RangeDependentEnv> {
    let ranges: Vec<f64> = if station_ranges.is_empty() && ssp.len() == 1 {
        vec![0.0]
    } else if station_ranges.len() == ssp.len() {
        station_ranges.to_vec()
    } else {
        return Err(CliError::input(format!(
            "{} station ranges given for {} profiles",
            station_ranges.len(),
            ssp.len()
        )));
    };
    let stations = ssp
        .iter()
        .zip(ranges)
        .map(|(p, range)| {
            Ok(Station {
                range,
                profile: load_profile(run, p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let bathymetry = bathymetry.map(|p| load_bathymetry(run, p)).transpose()?;
    let interp = match interp {
        InterpArg::PiecewiseConstant => RangeInterpolation::PiecewiseConstant,
        InterpArg::LinearBlend => RangeInterpolation::LinearBlend,
    };
    Ok(RangeDependentEnv::new(stations, bathymetry, density, interp)?)
}

fn pulse_shape(shape: Shape) -> PulseShape {
    match shape {
        Shape::Flat => PulseShape::Flat,
        Shape::RaisedCosine => PulseShape::RaisedCosine,
    }
}

fn selection(modes: &[usize]) -> ModeSelection {
    if modes.is_empty() {
        ModeSelection::All
    } else {
        ModeSelection::Only(modes.to_vec())
    }
}

fn warp_interp(i: WarpInterpArg) -> Interpolation {
    match i {
        WarpInterpArg::Linear => Interpolation::Linear,
        WarpInterpArg::Cubic => Interpolation::Cubic,
    }
}

fn warped_spectrum_csv(w: &Waveform) -> String {
    let ps = PowerSpectrum::of(w, WARPED_RESOLUTION);
    let mut out = String::from("f_hz,power\n");
    for (f, p) in ps.freqs.iter().zip(&ps.power) {
        out.push_str(&format!("{f},{p}\n"));
    }
    out
}

fn separation_csv(modes: &[SeparatedMode]) -> String {
    let mut out = String::from("mode,present,relative_energy,ridge_points\n");
    for m in modes {
        out.push_str(&format!(
            "{},{},{},{}\n",
            m.mode,
            m.is_present(),
            m.relative_energy,
            m.dispersion.len()
        ));
    }
    out
}

/// Picks t_r from an explicit value, or range / c0 with an optional refinement scan.
fn resolve_tr(run: &mut Run, tr: &TrArgs, w: &Waveform) -> Result<f64> {
    if let Some(t) = tr.t_r {
        if !(t > 0.0) {
            return Err(CliError::input(format!("--t-r {t} must be positive")));
        }
        return Ok(t);
    }
    let range = tr
        .range
        .ok_or_else(|| CliError::input("either --t-r or --range is required"))?;
    if tr.refine {
        let est = refine_tr(w, range, tr.c0, &TrScan::default())?;
        run.param("t_r_fallback", est.fallback);
        if est.fallback {
            eprintln!("warning: t_r scan found no interior maximum; using range / c0");
        }
        Ok(est.t_r)
    } else {
        Ok(estimate_tr(range, tr.c0)?)
    }
}

fn crop_for_warp(w: &Waveform, t_r: f64, start: f64, end: f64) -> Result<Waveform> {
    if !(end < 0.0 && start < end) {
        return Err(CliError::input(format!(
            "crop offsets must satisfy start < end < 0 (got {start}, {end})"
        )));
    }
    let crop = w.crop(t_r + start, t_r + end);
    if crop.len() < 2 {
        return Err(CliError::input(format!(
            "the record [{}, {}] s does not overlap the crop [{}, {}] s",
            w.t0(),
            w.end_time(),
            t_r + start,
            t_r + end
        )));
    }
    Ok(crop)
}

fn parse_band(text: &str) -> Result<ModeBand> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::input(format!("band `{text}` is not mode:center:halfwidth"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mode = parts[0].trim().parse().map_err(|_| bad())?;
    let center = parts[1].trim().parse().map_err(|_| bad())?;
    let halfwidth = parts[2].trim().parse().map_err(|_| bad())?;
    Ok(ModeBand::new(mode, center, halfwidth)?)
}

fn write_separation(run: &mut Run, sep: &[SeparatedMode]) -> Result<()> {
    for m in sep {
        if let Some(w) = &m.waveform {
            run.write_waveform(&format!("mode_{}.f32", m.mode), w)?;
        }
    }
    run.write_text("separation.csv", &separation_csv(sep))?;
    let curves: Vec<_> = sep
        .iter()
        .filter(|m| m.is_present())
        .map(|m| (m.mode, m.dispersion.clone()))
        .collect();
    run.write_text("dispersion.csv", &dispersion_csv(&curves))?;
    Ok(())
}

fn report_separation(sep: &[SeparatedMode]) {
    let present: Vec<String> = sep
        .iter()
        .filter(|m| m.is_present())
        .map(|m| m.mode.to_string())
        .collect();
    println!(
        "separated {} of {} modes: [{}]",
        present.len(),
        sep.len(),
        present.join(", ")
    );
}

pub fn fit_duct(args: &FitDuctArgs) -> Result<()> {
    let mut run = Run::new("fit-duct", &args.out.out)?;
    run.params(args);
    let profile = load_profile(&mut run, &args.ssp)?;
    let duct = fit_linear_duct(&profile, args.depth_limit)?;
    println!("c0 = {} m/s", duct.c0);
    println!("a = {:e} /m", duct.gradient);
    run.write_text(
        "duct.csv",
        &format!("c0_mps,a_per_m,depth_m\n{},{},{}\n", duct.c0, duct.gradient, duct.depth),
    )?;
    run.finish()?;
    Ok(())
}

pub fn modes(args: &ModesArgs) -> Result<()> {
    let mut run = Run::new("modes", &args.out.out)?;
    run.params(args);
    let profile = load_profile(&mut run, &args.ssp)?;
    let mut solver = solver_from_args(&profile, &args.solver)?;
    if let Some(n) = args.modes {
        solver = solver.mode_limit(n);
    }
    let sol = solver.solve(&profile, args.freq)?;
    println!("{} modes at {} Hz", sol.len(), args.freq);
    run.write_text("modes.csv", &sol.to_table_csv())?;
    run.write_text("eigenfunctions.csv", &sol.eigenfunctions_csv())?;
    run.finish()?;
    Ok(())
}

pub fn wkb_table(args: &WkbTableArgs) -> Result<()> {
    let mut run = Run::new("wkb-table", &args.out.out)?;
    run.params(args);
    let duct = LinearDuct::new(args.c0, args.a, args.duct_depth)?;
    let profile = LinearDuct::new(args.c0, args.a, args.depth)?.to_profile();
    let solution = ModeSolver::new(DepthGrid::new(args.depth, args.dz)?)
        .max_phase_speed(f64::INFINITY)
        .mode_limit(args.modes)
        .solve(&profile, args.freq)?;
    let omega = 2.0 * std::f64::consts::PI * args.freq;
    let qc = QuantizationCondition::default();
    let mut out = String::from(
        "m,k_exact,k_linearized,k_wkb_numeric,k_solver,rel_gap_exact,rel_gap_linearized,turning_depth_m,within_duct\n",
    );
    let blank = String::new;
    for m in 1..=args.modes {
        let exact = wkb::k_exact_form(&duct, m, omega).ok();
        let lin = wkb::k_linearized(&duct, m, omega);
        let numeric = wkb::solve_wkb_wavenumber(&profile, m, omega, &qc).ok();
        let solver_k = solution.mode(m).map(|md| md.k);
        let gap = |k: f64| solver_k.map(|s| ((k - s) / s).abs().to_string()).unwrap_or_else(blank);
        let show = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(blank);
        out.push_str(&format!(
            "{m},{},{lin},{},{},{},{},{},{}\n",
            show(exact),
            show(numeric),
            show(solver_k),
            exact.map(gap).unwrap_or_else(blank),
            gap(lin),
            show(wkb::turning_depth(&duct, m, omega).ok()),
            wkb::is_within_duct(&duct, m, omega),
        ));
    }
    print!("{out}");
    run.write_text("wkb_table.csv", &out)?;
    run.finish()?;
    Ok(())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !(hi >= lo) {
        return Err(CliError::input(format!("bad grid [{lo}, {hi}] with {n} points")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

pub fn tl(args: &TlArgs) -> Result<()> {
    let mut run = Run::new("tl", &args.out.out)?;
    run.params(args);
    let profile = load_profile(&mut run, &args.ssp)?;
    let solver = solver_from_args(&profile, &args.solver)?;
    let ranges = linspace(args.r_min, args.r_max, args.nr)?;
    let depths = linspace(args.z_min, args.z_max, args.nz)?;
    let map = transmission_loss_map(&profile, &solver, args.freq, args.zs, &ranges, &depths, &[])?;
    run.write_text("tl.csv", &map.to_csv())?;
    run.finish()?;
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let mut run = Run::new("synth", &args.out.out)?;
    run.params(args);
    let env = build_env(
        &mut run,
        &args.ssp,
        &args.station_ranges,
        args.bathymetry.as_deref(),
        args.interpolation,
        args.solver.density,
    )?;
    let solver = solver_from_args(&env.stations()[0].profile, &args.solver)?;
    let geometry = Geometry::new(args.zs, args.zr, args.range)?;
    let pulse = SourcePulse::new(args.f_lo, args.f_hi, pulse_shape(args.shape))?;
    let mut opts = SynthOptions::new(args.fs, args.duration)
        .selection(selection(&args.modes))
        .propagation(match args.propagation {
            PropagationArg::RangeIndependent => Propagation::RangeIndependent,
            PropagationArg::Adiabatic => Propagation::Adiabatic,
        });
    if let Some(t0) = args.t0 {
        opts = opts.t0(t0);
    }
    let s = synthesize_waveform(&env, &solver, &geometry, &pulse, &opts)?;
    println!("t_r = {} s", s.t_r);
    if s.dropped_modes > 0 {
        eprintln!("warning: {} (frequency, mode) pairs dropped along the track", s.dropped_modes);
    }
    run.param("t_r", s.t_r);
    run.param("dropped_modes", s.dropped_modes);
    run.write_waveform("waveform.f32", &s.waveform)?;
    if args.wav {
        let path = run.out_dir().join("waveform.wav");
        s.waveform.write_wav(&path)?;
        let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        run.write("waveform.wav", &bytes)?;
    }
    run.finish()?;
    Ok(())
}

pub fn warp(args: &WarpArgs) -> Result<()> {
    let mut run = Run::new("warp", &args.out.out)?;
    run.params(args);
    let w = load_input(&mut run, &args.input)?;
    let t_r = resolve_tr(&mut run, &args.tr, &w)?;
    run.param("t_r_used", t_r);
    println!("t_r = {t_r} s");
    let crop = crop_for_warp(&w, t_r, args.start, args.end)?;
    let plan = WarpPlan::new(t_r, args.oversample, warp_interp(args.interp))?;
    let warped = warp_signal(&crop, &plan)?;
    run.write_waveform("warped.f32", &warped.warped)?;
    run.write_text("warped_spectrum.csv", &warped_spectrum_csv(&warped.warped))?;
    run.finish()?;
    Ok(())
}

pub fn separate(args: &SeparateArgs) -> Result<()> {
    let mut run = Run::new("separate", &args.out.out)?;
    run.params(args);
    let w = load_input(&mut run, &args.input)?;
    let t_r = resolve_tr(&mut run, &args.tr, &w)?;
    run.param("t_r_used", t_r);
    let bands = if args.bands.is_empty() {
        let range = args.tr.range.unwrap_or(t_r * args.tr.c0);
        let duct = LinearDuct::new(args.tr.c0, args.a, 400.0)?;
        default_bands(&duct, range, &args.modes)?
    } else {
        args.bands.iter().map(|b| parse_band(b)).collect::<Result<_>>()?
    };
    let crop = crop_for_warp(&w, t_r, args.start, args.end)?;
    let plan = WarpPlan::new(t_r, args.oversample, Interpolation::Cubic)?;
    let opts = SeparationOptions {
        stft_window: args.stft.window,
        stft_hop: args.stft.hop,
        ridge_threshold: args.stft.threshold,
        ..SeparationOptions::default()
    };
    let sep = separate_modes(&crop, &plan, &bands, &opts)?;
    report_separation(&sep);
    write_separation(&mut run, &sep)?;
    run.finish()?;
    Ok(())
}

pub fn dispersion(args: &DispersionArgs) -> Result<()> {
    let mut run = Run::new("dispersion", &args.out.out)?;
    run.params(args);
    let w = load_input(&mut run, &args.input)?;
    let sg = stft(&w, args.stft.window, args.stft.hop)?;
    let ridge = extract_dispersion(&sg, args.stft.threshold);
    run.write_text("spectrogram.csv", &sg.to_csv())?;
    run.write_text("dispersion.csv", &dispersion_csv(&[(0, ridge)]))?;
    run.finish()?;
    Ok(())
}

pub fn scenario_run(args: &ScenarioRunArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.file).map_err(|e| CliError::io(&args.file, e))?;
    let sc = Scenario::parse(&text, &args.file)?;
    let out = args
        .out
        .clone()
        .or_else(|| sc.output.directory.clone())
        .unwrap_or_else(|| {
            let stem = args.file.file_stem().unwrap_or_default();
            Path::new("ductwarp-out").join(stem)
        });
    let mut run = Run::new("scenario run", &out)?;
    run.read_input(&args.file)?;
    run.params(&sc);

    let e = &sc.environment;
    let env = build_env(
        &mut run,
        &e.ssp,
        &e.station_ranges,
        e.bathymetry.as_deref(),
        e.interpolation,
        e.density,
    )?;
    let first = &env.stations()[0].profile;
    let solver = build_solver(first, sc.solver.depth, sc.solver.dz, sc.solver.max_phase_speed, e.density)?;
    let g = &sc.geometry;
    let geometry = Geometry::new(g.source_depth, g.receiver_depth, g.range)?;
    let pulse = SourcePulse::new(sc.pulse.f_lo, sc.pulse.f_hi, pulse_shape(sc.pulse.shape))?;
    let mut opts = SynthOptions::new(sc.synthesis.sample_rate, sc.synthesis.duration)
        .selection(selection(&sc.solver.modes))
        .propagation(match sc.synthesis.propagation {
            PropagationArg::RangeIndependent => Propagation::RangeIndependent,
            PropagationArg::Adiabatic => Propagation::Adiabatic,
        });
    if let Some(t0) = sc.synthesis.t0 {
        opts = opts.t0(t0);
    }
    let s = synthesize_waveform(&env, &solver, &geometry, &pulse, &opts)?;
    println!("synthesized {} samples, t_r = {} s", s.waveform.len(), s.t_r);

    let w = &sc.warp;
    let receiver_profile = env.profile_at(g.range)?;
    let c0 = w.c0.unwrap_or_else(|| receiver_profile.speed_at(0.0));
    let t_r = match w.t_r {
        TrSource::Fixed(t) => t,
        TrSource::Named(TrMode::Nominal) => estimate_tr(g.range, c0)?,
        TrSource::Named(TrMode::Refine) => {
            let est = refine_tr(&s.waveform, g.range, c0, &TrScan::default())?;
            run.param("t_r_fallback", est.fallback);
            est.t_r
        }
    };
    run.param("t_r_used", t_r);
    let duct = fit_linear_duct(&receiver_profile, w.duct_depth)?;
    let bands = if w.bands.is_empty() {
        default_bands(&duct, g.range, &w.modes)?
    } else {
        w.bands
            .iter()
            .map(|b| ModeBand::new(b.mode, b.center, b.halfwidth))
            .collect::<Result<_, _>>()?
    };
    let crop = crop_for_warp(&s.waveform, t_r, w.window_start, w.window_end)?;
    let plan = WarpPlan::new(t_r, w.oversample, warp_interp(w.interpolation))?;
    let sep_opts = SeparationOptions {
        stft_window: w.stft_window,
        stft_hop: w.stft_hop,
        ridge_threshold: w.ridge_threshold,
        absence_fraction: w.absence_fraction,
    };
    let sep = separate_modes(&crop, &plan, &bands, &sep_opts)?;
    report_separation(&sep);

    if sc.wants(Artifact::Waveform) {
        run.write_waveform("waveform.f32", &s.waveform)?;
    }
    if sc.wants(Artifact::Spectrogram) {
        let sg = stft(&s.waveform, w.stft_window, w.stft_hop)?;
        run.write_text("spectrogram.csv", &sg.to_csv())?;
    }
    if sc.wants(Artifact::Warped) {
        let warped = warp_signal(&crop, &plan)?;
        run.write_waveform("warped.f32", &warped.warped)?;
        run.write_text("warped_spectrum.csv", &warped_spectrum_csv(&warped.warped))?;
    }
    if sc.wants(Artifact::Modes) {
        for m in &sep {
            if let Some(wf) = &m.waveform {
                run.write_waveform(&format!("mode_{}.f32", m.mode), wf)?;
            }
        }
        run.write_text("separation.csv", &separation_csv(&sep))?;
    }
    if sc.wants(Artifact::Dispersion) {
        let curves: Vec<_> = sep
            .iter()
            .filter(|m| m.is_present())
            .map(|m| (m.mode, m.dispersion.clone()))
            .collect();
        run.write_text("dispersion.csv", &dispersion_csv(&curves))?;
    }
    if sc.wants(Artifact::Skeleton) {
        let modes: Vec<usize> = bands.iter().map(|b| b.mode).collect();
        let pts = dispersion_skeleton(&duct, g.range, &modes, sc.pulse.f_lo, sc.pulse.f_hi, SKELETON_POINTS)?;
        run.write_text("skeleton.csv", &skeleton_csv(&pts))?;
    }
    let manifest = run.finish()?;
    println!("wrote {}", manifest.display());
    Ok(())
}
