use std::fs;

use anyhow::{bail, Context};
use serde::Serialize;
use serde_json::{json, Value};
use uscsim_core::config::SimConfig;
use uscsim_core::gaussian::{
    default_bandwidth, log_negativity, output_covariance, prepare, single_mode_extrema, squeezing_db, symplectic_eigenvalues,
    variance_extrema_db, CovarianceMatrix, Mode, PHYSICALITY_TOLERANCE, VACUUM_VARIANCE,
};
use uscsim_core::measurement::{
    calibrate_gain, estimate_covariance, histogram_difference, mode_squeezing, sample_records, DetectionChain, HistogramGrid,
    PumpState, Quadrature, SqueezingEstimate,
};
use uscsim_core::model::{build_drift, normal_mode_frequencies, stability, thermal_asymmetry};
use uscsim_core::spectra::{default_grid, emission_psd, find_peaks, linspace, SpectrumTrace, DEFAULT_GRID_POINTS};
use uscsim_core::units::{mhz_to_rad, rad_to_mhz};
use uscsim_core::{presets, Error, ModePair, PumpConfig};

use crate::args::{Cli, Command, GlobalOpts, PipelineArgs, SpectrumArgs, SqueezeMapArgs, VarianceArgs};
use crate::output::{cell, csv, OutputDir};
use crate::records;
use crate::sweep::{run_cells, GridAxis, SweepSpec, SweepVariable};
use crate::Rejected;

/// Default number of points per squeeze-map axis.
pub const DEFAULT_MAP_POINTS: usize = 21;

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = resolve_config(&cli.global)?;
    let g = &cli.global;
    match &cli.command {
        Command::Spectrum(a) => spectrum(g, &cfg, a),
        Command::SqueezeMap(a) => squeeze_map(g, &cfg, a),
        Command::VarianceSpectrum(a) => variance(g, &cfg, a),
        Command::Pipeline(a) => pipeline(g, &cfg, a),
        Command::Stability => stability_report(g, &cfg),
    }
}

/// Parameter file (if any) with command-line overrides applied.
pub fn resolve_config(g: &GlobalOpts) -> anyhow::Result<SimConfig> {
    let mut cfg = match &g.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            SimConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => SimConfig::default(),
    };
    for (key, value) in g.overrides.pairs() {
        cfg.set(key, value).with_context(|| format!("--{}", key.replace('_', "-")))?;
    }
    Ok(cfg)
}

fn jobs(g: &GlobalOpts) -> Option<usize> {
    g.jobs.map(|j| j as usize)
}

fn system(cfg: &SimConfig) -> anyhow::Result<(ModePair, PumpConfig)> {
    Ok((cfg.modes()?, cfg.pumps()?))
}

fn symmetric_grid(span_mhz: f64, points: usize) -> anyhow::Result<Vec<f64>> {
    if !(span_mhz > 0.0 && span_mhz.is_finite()) {
        bail!("--span-mhz must be positive, got {span_mhz}");
    }
    Ok(linspace(-mhz_to_rad(span_mhz), mhz_to_rad(span_mhz), points))
}

fn reason(e: &Error) -> String {
    match e {
        Error::Unstable { margin } => format!("unstable: margin {:.6} MHz", rad_to_mhz(*margin)),
        other => other.to_string().replace(',', ";"),
    }
}

#[derive(Serialize)]
struct PeakOut {
    omega_mhz: f64,
    height: f64,
}

fn peak_list(trace: &SpectrumTrace, prominence: f64) -> anyhow::Result<Vec<PeakOut>> {
    Ok(find_peaks(trace, prominence)?.into_iter().map(|p| PeakOut { omega_mhz: rad_to_mhz(p.omega), height: p.height }).collect())
}

fn spectrum(g: &GlobalOpts, cfg: &SimConfig, a: &SpectrumArgs) -> anyhow::Result<()> {
    let points = g.points.map_or(DEFAULT_GRID_POINTS, |p| p as usize);
    let grid_for = |modes: &ModePair, pumps: &PumpConfig| match a.span_mhz {
        Some(s) => symmetric_grid(s, points),
        None => Ok(default_grid(modes, pumps, points)?),
    };
    let mut options = json!({ "points": points, "prominence": a.prominence, "span_mhz": a.span_mhz });
    let mut out = OutputDir::create(&g.out)?;

    match a.sweep {
        None => {
            let (modes, pumps) = system(cfg)?;
            let spec = emission_psd(&modes, &pumps, &grid_for(&modes, &pumps)?)?;
            if spec.critical {
                eprintln!("warning: the configuration sits on the stability boundary");
            }
            let rows = spec.a.grid().iter().zip(spec.a.values()).zip(spec.b.values()).map(|((w, pa), pb)| {
                vec![cell(rad_to_mhz(*w)), cell(*pa), cell(*pb)]
            });
            out.write_text("spectrum.csv", &csv(&["omega_mhz", "psd_a", "psd_b"], rows))?;
            out.write_json("peaks_a.json", &peak_list(&spec.a, a.prominence)?)?;
            out.write_json("peaks_b.json", &peak_list(&spec.b, a.prominence)?)?;
            options["critical"] = json!(spec.critical);
        }
        Some(range) => {
            if range.variable == SweepVariable::ProbeOffset {
                bail!("probe_offset sweeps apply to variance-spectrum; spectrum sweeps g_red, g_blue or omega_eff");
            }
            let sweep = SweepSpec::new(range, *cfg);
            let cells = sweep.cells().expect("model-parameter sweep");
            let results = run_cells(jobs(g), &cells, |c| -> anyhow::Result<Result<[Vec<f64>; 2], String>> {
                let (modes, pumps) = system(c)?;
                let s = match emission_psd(&modes, &pumps, &grid_for(&modes, &pumps)?) {
                    Ok(s) => s,
                    Err(e @ Error::Unstable { .. }) => return Ok(Err(reason(&e))),
                    Err(e) => return Err(e.into()),
                };
                let pos = |t: &SpectrumTrace| -> anyhow::Result<Vec<f64>> {
                    Ok(peak_list(t, a.prominence)?.into_iter().map(|p| p.omega_mhz).collect())
                };
                Ok(Ok([pos(&s.a)?, pos(&s.b)?]))
            })?;
            let var_col = format!("{}_mhz", range.variable.name());
            let mut rows = Vec::with_capacity(cells.len());
            for (w, r) in sweep.values().iter().zip(results) {
                let joined = |v: &[f64]| v.iter().map(|x| cell(*x)).collect::<Vec<_>>().join(";");
                rows.push(match r? {
                    Ok([pa, pb]) => {
                        vec![cell(rad_to_mhz(*w)), pa.len().to_string(), pb.len().to_string(), joined(&pa), joined(&pb), String::new()]
                    }
                    Err(why) => vec![cell(rad_to_mhz(*w)), "nan".into(), "nan".into(), String::new(), String::new(), why],
                });
            }
            let header = [var_col.as_str(), "peaks_a", "peaks_b", "positions_a_mhz", "positions_b_mhz", "reason"];
            out.write_text("sweep_peaks.csv", &csv(&header, rows))?;
            options["sweep"] = json!(range.to_string());
        }
    }
    out.finish("spectrum", cfg, options)
}

fn squeeze_map(g: &GlobalOpts, cfg: &SimConfig, a: &SqueezeMapArgs) -> anyhow::Result<()> {
    let modes = cfg.modes()?;
    let default_axis =
        GridAxis { start_mhz: 0.0, stop_mhz: 0.5 * cfg.omega_eff_mhz, points: g.points.map_or(DEFAULT_MAP_POINTS, |p| p as usize) };
    let axis_b = a.g_blue.unwrap_or(default_axis);
    let axis_r = a.g_red.unwrap_or(default_axis);
    if default_axis.stop_mhz <= 0.0 && (a.g_blue.is_none() || a.g_red.is_none()) {
        bail!("omega_eff is zero; give both --g-blue and --g-red axes explicitly");
    }
    let bandwidth = match a.bandwidth_mhz {
        Some(b) if b > 0.0 && b.is_finite() => mhz_to_rad(b),
        Some(b) => bail!("--bandwidth-mhz must be positive, got {b}"),
        None => default_bandwidth(&modes),
    };
    let center = mhz_to_rad(a.center_mhz);

    let cells: Vec<(f64, f64)> =
        axis_b.values_mhz().into_iter().flat_map(|b| axis_r.values_mhz().into_iter().map(move |r| (b, r))).collect();
    let results = run_cells(jobs(g), &cells, |&(gb, gr)| -> anyhow::Result<Result<(f64, f64), String>> {
        let mut c = *cfg;
        c.g_blue_mhz = gb;
        c.g_red_mhz = gr;
        let v = match output_covariance(&modes, &c.pumps()?, center, bandwidth) {
            Ok(v) => v,
            Err(e @ Error::Unstable { .. }) => return Ok(Err(reason(&e))),
            Err(e) => return Err(e.into()),
        };
        let r = |m| squeezing_db(single_mode_extrema(&v, m).0, VACUUM_VARIANCE);
        Ok(Ok((r(Mode::A)?, r(Mode::B)?)))
    })?;
    let mut rows = Vec::with_capacity(cells.len());
    for (&(gb, gr), r) in cells.iter().zip(results) {
        rows.push(match r? {
            Ok((ra, rb)) => vec![cell(gb), cell(gr), cell(ra), cell(rb), String::new()],
            Err(why) => vec![cell(gb), cell(gr), "nan".into(), "nan".into(), why],
        });
    }
    let mut out = OutputDir::create(&g.out)?;
    out.write_text("squeeze_map.csv", &csv(&["g_blue_mhz", "g_red_mhz", "r_a_db", "r_b_db", "reason"], rows))?;
    let axis = |x: &GridAxis| json!({ "start_mhz": x.start_mhz, "stop_mhz": x.stop_mhz, "points": x.points });
    let options = json!({
        "g_blue_axis": axis(&axis_b),
        "g_red_axis": axis(&axis_r),
        "center_mhz": a.center_mhz,
        "bandwidth_mhz": rad_to_mhz(bandwidth),
    });
    out.finish("squeeze-map", cfg, options)
}

fn variance(g: &GlobalOpts, cfg: &SimConfig, a: &VarianceArgs) -> anyhow::Result<()> {
    let (modes, pumps) = system(cfg)?;
    let points = g.points.map_or(DEFAULT_GRID_POINTS, |p| p as usize);
    let grid = match (a.sweep, a.span_mhz) {
        (Some(range), _) => {
            if range.variable != SweepVariable::ProbeOffset {
                bail!("variance-spectrum sweeps probe_offset only, got {}", range.variable.name());
            }
            SweepSpec::new(range, *cfg).values()
        }
        (None, Some(s)) => symmetric_grid(s, points)?,
        (None, None) => default_grid(&modes, &pumps, points)?,
    };
    let scatterer = prepare(&modes, &pumps)?;
    let results = run_cells(jobs(g), &grid, |&w| -> uscsim_core::Result<[(f64, f64); 2]> {
        Ok([variance_extrema_db(&scatterer, w, Mode::A)?, variance_extrema_db(&scatterer, w, Mode::B)?])
    })?;
    let results: Vec<[(f64, f64); 2]> = results.into_iter().collect::<uscsim_core::Result<_>>()?;

    let mut out = OutputDir::create(&g.out)?;
    for (k, tag) in [(0, "a"), (1, "b")] {
        let rows = grid.iter().zip(&results).map(|(w, r)| vec![cell(rad_to_mhz(*w)), cell(r[k].0), cell(r[k].1)]);
        out.write_text(&format!("variance_spectrum_{tag}.csv"), &csv(&["omega_mhz", "sigma_min_db", "sigma_max_db"], rows))?;
    }
    let options = json!({
        "points": grid.len(),
        "start_mhz": rad_to_mhz(grid[0]),
        "stop_mhz": rad_to_mhz(grid[grid.len() - 1]),
    });
    out.finish("variance-spectrum", cfg, options)
}

/// The six histogram panels: both single-mode planes, then the four cross pairs.
pub const PANELS: [(Quadrature, Quadrature); 6] = [
    (Quadrature::Xa, Quadrature::Pa),
    (Quadrature::Xb, Quadrature::Pb),
    (Quadrature::Xa, Quadrature::Xb),
    (Quadrature::Pa, Quadrature::Pb),
    (Quadrature::Xa, Quadrature::Pb),
    (Quadrature::Pa, Quadrature::Xb),
];

/// `XaPb` style panel name.
pub fn panel_name(x: Quadrature, y: Quadrature) -> String {
    format!("{}{}", x.label(), y.label()).replace('_', "")
}

pub fn histogram_csv(h: &HistogramGrid) -> String {
    let edges = |name: &str, e: &[f64]| {
        let mut row = vec![name.to_string()];
        row.extend(e.iter().map(|x| cell(*x)));
        row.join(",")
    };
    let mut s = format!("{}\n{}\n", edges("x_edges", &h.x_edges), edges("y_edges", &h.y_edges));
    for row in &h.counts {
        s.push_str(&row.iter().map(i64::to_string).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct SqueezingOut {
    estimate_db: Option<f64>,
    log_argument: f64,
    model_db: f64,
}

fn squeezing_out(est: SqueezingEstimate, model: &CovarianceMatrix, mode: Mode) -> anyhow::Result<SqueezingOut> {
    Ok(SqueezingOut {
        estimate_db: est.db(),
        log_argument: est.argument(),
        model_db: squeezing_db(single_mode_extrema(model, mode).0, VACUUM_VARIANCE)?,
    })
}

fn check_physical(v: &CovarianceMatrix, what: &str) -> anyhow::Result<()> {
    let (nu, _) = symplectic_eigenvalues(v)?;
    if nu < VACUUM_VARIANCE - PHYSICALITY_TOLERANCE {
        return Err(Rejected(format!("{what} covariance is unphysical (smallest symplectic eigenvalue {nu:e})")).into());
    }
    Ok(())
}

fn pipeline(g: &GlobalOpts, cfg: &SimConfig, a: &PipelineArgs) -> anyhow::Result<()> {
    let (modes, pumps) = system(cfg)?;
    let bandwidth = match a.bandwidth_mhz {
        Some(b) if b > 0.0 && b.is_finite() => mhz_to_rad(b),
        Some(b) => bail!("--bandwidth-mhz must be positive, got {b}"),
        None => default_bandwidth(&modes),
    };
    let n = usize::try_from(a.pairs)?.checked_mul(2).context("--pairs too large")?;
    let bins = usize::try_from(a.bins)?;
    let chain = DetectionChain::new(a.gain_a, a.gain_b, a.noise_a, a.noise_b, g.seed)?;

    let model = output_covariance(&modes, &pumps, 0.0, bandwidth)?;
    check_physical(&model, "model")?;
    let reference = output_covariance(&modes, &presets::epr(&modes), 0.0, bandwidth)?;
    check_physical(&reference, "calibration reference")?;

    // Calibration run on the two-mode squeezed reference, then the measurement run.
    let cal = sample_records(&reference, &chain, n)?;
    let (cal_on, cal_off) = (estimate_covariance(&cal, PumpState::On)?, estimate_covariance(&cal, PumpState::Off)?);
    let (ga, gb) = calibrate_gain(&reference, &cal_on, &cal_off)?;
    drop(cal);
    let recs = sample_records(&model, &chain.with_seed(g.seed.wrapping_add(1)), n)?;
    let (on, off) = (estimate_covariance(&recs, PumpState::On)?, estimate_covariance(&recs, PumpState::Off)?);

    let mut out = OutputDir::create(&g.out)?;
    if !a.no_records {
        records::write(&mut out, "records", &recs)?;
    }
    let hists = run_cells(jobs(g), &PANELS, |&axes| histogram_difference(&recs, axes, bins))?;
    for (&(x, y), h) in PANELS.iter().zip(hists) {
        out.write_text(&format!("hist_{}.csv", panel_name(x, y)), &histogram_csv(&h?))?;
    }

    let scale = [ga.sqrt(), ga.sqrt(), gb.sqrt(), gb.sqrt()];
    let reconstructed: [[f64; 4]; 4] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            (on.get(i, j) - off.get(i, j)) / (scale[i] * scale[j]) + if i == j { VACUUM_VARIANCE } else { 0.0 }
        })
    });
    out.write_json(
        "covariance.json",
        &json!({
            "convention": "X=(a+a†)/2, vac=1/4",
            "order": ["X_a", "P_a", "X_b", "P_b"],
            "matrix": reconstructed,
            "model": model.entries(),
            "measured_on_v2": on.entries(),
            "measured_off_v2": off.entries(),
        }),
    )?;
    let estimates = json!({
        "pairs": a.pairs,
        "samples": n,
        "gains": {
            "injected": [a.gain_a, a.gain_b],
            "calibrated": [ga, gb],
            "relative_error": [ga / a.gain_a - 1.0, gb / a.gain_b - 1.0],
        },
        "r_a": squeezing_out(mode_squeezing(&on, &off, ga, Mode::A)?, &model, Mode::A)?,
        "r_b": squeezing_out(mode_squeezing(&on, &off, gb, Mode::B)?, &model, Mode::B)?,
        "model_log_negativity": log_negativity(&model)?,
    });
    out.write_json("estimates.json", &estimates)?;

    let options = json!({
        "pairs": a.pairs,
        "seed": g.seed,
        "bins": bins,
        "bandwidth_mhz": rad_to_mhz(bandwidth),
        "chain": { "gain_a": a.gain_a, "gain_b": a.gain_b, "noise_a": a.noise_a, "noise_b": a.noise_b },
        "calibration": "two-mode squeezed reference at 16 dB gain",
        "records": !a.no_records,
    });
    out.finish("pipeline", cfg, options)
}

fn stability_report(g: &GlobalOpts, cfg: &SimConfig) -> anyhow::Result<()> {
    let (modes, pumps) = system(cfg)?;
    let report = stability(&build_drift(&modes, &pumps))?;
    let normal = if pumps.g_blue() == pumps.g_red() {
        let nm = normal_mode_frequencies(&pumps)?;
        json!({ "omega_plus_mhz": rad_to_mhz(nm.omega_plus), "omega_minus_mhz": rad_to_mhz(nm.omega_minus), "collapsed": nm.collapsed })
    } else {
        Value::Null
    };
    let eigenvalues: Vec<Value> =
        report.eigenvalues.iter().map(|z| json!({ "re_mhz": rad_to_mhz(z.re), "im_mhz": rad_to_mhz(z.im) })).collect();
    let class = format!("{:?}", report.classification).to_lowercase();
    let mut out = OutputDir::create(&g.out)?;
    out.write_json(
        "stability.json",
        &json!({
            "classification": class,
            "stable": report.stable,
            "margin_mhz": rad_to_mhz(report.margin),
            "eigenvalues": eigenvalues,
            "normal_modes": normal,
            "thermal_asymmetry": thermal_asymmetry(&modes, cfg.temperature_k())?,
        }),
    )?;
    println!("{class}: margin {:.6} MHz", rad_to_mhz(report.margin));
    out.finish("stability", cfg, json!({}))
}
