use std::f64::consts::PI;

use rankspec::hoeffding::{decompose, degenerate_decay_experiment, DecayTable, DecompositionReport, HoeffdingModel};
use rankspec::simlab::{
    bias_experiment, clt_experiment, simulate as simulate_series, BandwidthRule, BiasConfig, CltConfig,
    SimulationModel,
};
use rankspec::spectral::{
    estimate_with_inference, select_bandwidth, BandwidthOptions, BandwidthSelection, Centering, InferenceOptions,
};
use rankspec::{dependence_sequence, Bandwidth, FrequencyGrid, MeasureKind, TimeSeries};
use serde::Serialize;

use crate::input::read_values;
use crate::output::{csv_table, emit, json_document, num};
use crate::{AcfArgs, BiasArgs, CliError, CltArgs, EstimateArgs, Format, InputArgs, ModelArgs, OutputArgs};
use crate::{SimulateArgs, VerifyArgs};

/// Smallest frequency grid accepted by `estimate`.
const MIN_GRID: usize = 8;

/// Decomposition residuals above this are reported as an invariant breach.
const RESIDUAL_TOL: f64 = 1e-10;

fn load(input: &InputArgs) -> Result<TimeSeries, CliError> {
    let values = read_values(&input.input, &input.column, input.skip_header)?;
    let series = TimeSeries::new(values)?;
    if series.has_ties() {
        eprintln!(
            "warning: input has {} tied values; rank measures score ties as 0",
            series.tie_count()
        );
    }
    Ok(series)
}

fn write(out: &OutputArgs, csv: impl FnOnce() -> Result<Vec<u8>, CliError>, json: impl Serialize) -> Result<(), CliError> {
    let bytes = match out.format {
        Format::Csv => csv()?,
        Format::Json => json_document(json)?,
    };
    emit(out.output.as_deref(), &bytes)
}

fn model(args: &ModelArgs) -> Result<SimulationModel, CliError> {
    Ok(SimulationModel::from_name(&args.model, args.phi, args.marginal)?)
}

fn precondition(msg: String) -> CliError {
    CliError::Precondition(rankspec::Error::InvalidParameter(msg))
}

#[derive(Serialize)]
struct AcfDoc {
    measure: MeasureKind,
    n: usize,
    tie_warning: bool,
    xi: Vec<f64>,
}

pub fn acf(args: &AcfArgs) -> Result<(), CliError> {
    let series = load(&args.input)?;
    let max_lag = args.max_lag.unwrap_or_else(|| series.len().saturating_sub(4).min(20));
    let seq = dependence_sequence(&series, args.measure, max_lag)?;
    let doc = AcfDoc { measure: seq.kind, n: seq.n, tie_warning: seq.tie_warning, xi: seq.xi.clone() };
    write(
        &args.output,
        || csv_table(&["k", "xi"], seq.xi.iter().enumerate().map(|(k, x)| vec![k.to_string(), num(*x)])),
        doc,
    )
}

#[derive(Serialize)]
struct EstimateMeta {
    n: usize,
    r_n: f64,
    origin: rankspec::BandwidthOrigin,
    window: rankspec::LagWindow,
    d: u32,
    #[serde(rename = "C_w")]
    c_w: f64,
    w2_integral: f64,
    measure: MeasureKind,
    /// Spectrum that supplies the variance; Spearman ρ for τ.
    variance_measure: MeasureKind,
    alpha: f64,
    centering: Centering,
    tie_warning: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth_selection: Option<SelectionMeta>,
}

#[derive(Serialize)]
struct SelectionMeta {
    target_omega: f64,
    pilot_r_n: f64,
    bias_constant: f64,
    sigma2: f64,
    derivative_se: f64,
    fallback: Option<rankspec::spectral::Fallback>,
}

#[derive(Serialize)]
struct EstimateRow {
    omega: f64,
    f_hat: f64,
    bias_hat: f64,
    se: f64,
    se_interval: f64,
    ci_low: f64,
    ci_high: f64,
    degenerate: bool,
}

#[derive(Serialize)]
struct EstimateDoc {
    metadata: EstimateMeta,
    points: Vec<EstimateRow>,
}

pub fn estimate(args: &EstimateArgs) -> Result<(), CliError> {
    if args.grid < MIN_GRID {
        return Err(precondition(format!("grid size must be at least {MIN_GRID}, got {}", args.grid)));
    }
    let series = load(&args.input)?;
    let window = args.window;
    let (bandwidth, selection) = if args.bandwidth.eq_ignore_ascii_case("auto") {
        let sel: BandwidthSelection =
            select_bandwidth(&series, args.measure, &window, args.target_omega, &BandwidthOptions::default())?;
        if let Some(fallback) = sel.fallback {
            eprintln!("warning: plug-in bandwidth fell back to n^(1/(2d+1)) ({fallback:?})");
        }
        let meta = SelectionMeta {
            target_omega: args.target_omega,
            pilot_r_n: sel.pilot_r_n,
            bias_constant: sel.bias_constant,
            sigma2: sel.sigma2,
            derivative_se: sel.derivative_se,
            fallback: sel.fallback,
        };
        (sel.bandwidth, Some(meta))
    } else {
        let r_n: f64 = args
            .bandwidth
            .parse()
            .map_err(|_| CliError::Parse(format!("bandwidth `{}` is neither a number nor `auto`", args.bandwidth)))?;
        (Bandwidth::user(r_n)?, None)
    };
    let grid = FrequencyGrid::uniform(args.grid)?;
    let centering = if args.raw_ci { Centering::Raw } else { Centering::BiasCorrected };
    let options = InferenceOptions { alpha: args.alpha, centering, ..Default::default() };
    let est = estimate_with_inference(&series, args.measure, &window, &bandwidth, &grid, &options)?;

    let clip = |x: f64| if args.clip_negative { x.max(0.0) } else { x };
    let mut rows = Vec::with_capacity(est.points.len());
    for p in &est.points {
        let inf = p
            .inference
            .ok_or_else(|| CliError::Invariant("estimate returned without inference".into()))?;
        if !(p.f_hat.is_finite() && inf.se.is_finite()) {
            return Err(CliError::Invariant(format!("non-finite estimate at omega = {}", p.omega)));
        }
        rows.push(EstimateRow {
            omega: p.omega,
            f_hat: clip(p.f_hat),
            bias_hat: inf.bias_hat,
            se: inf.se,
            se_interval: inf.se_interval,
            ci_low: clip(inf.ci_low),
            ci_high: inf.ci_high,
            degenerate: inf.degenerate,
        });
    }
    let doc = EstimateDoc {
        metadata: EstimateMeta {
            n: est.n,
            r_n: bandwidth.r_n,
            origin: bandwidth.origin,
            window,
            d: window.exponent(),
            c_w: window.c_w(),
            w2_integral: window.w2_integral(),
            measure: args.measure,
            variance_measure: args.measure.variance_reference(),
            alpha: args.alpha,
            centering,
            tie_warning: est.tie_warning,
            bandwidth_selection: selection,
        },
        points: rows,
    };
    write(
        &args.output,
        || {
            csv_table(
                &["omega", "f_hat", "bias_hat", "se", "ci_low", "ci_high", "degenerate_flag"],
                doc.points.iter().map(|r| {
                    vec![
                        num(r.omega),
                        num(r.f_hat),
                        num(r.bias_hat),
                        num(r.se),
                        num(r.ci_low),
                        num(r.ci_high),
                        (r.degenerate as u8).to_string(),
                    ]
                }),
            )
        },
        &doc,
    )
}

#[derive(Serialize)]
struct SimulateDoc<'a> {
    model: SimulationModel,
    n: usize,
    seed: u64,
    values: &'a [f64],
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let m = model(&args.model)?;
    let series = simulate_series(&m, args.n, args.seed)?;
    let values = series.values();
    match args.output.format {
        Format::Csv => {
            let mut text = String::with_capacity(values.len() * 24);
            for v in values {
                text.push_str(&num(*v));
                text.push('\n');
            }
            emit(args.output.output.as_deref(), text.as_bytes())
        }
        Format::Json => emit(
            args.output.output.as_deref(),
            &json_document(SimulateDoc { model: m, n: args.n, seed: args.seed, values })?,
        ),
    }
}

fn bandwidth_rule(text: &str) -> Result<BandwidthRule, CliError> {
    let bad = || CliError::Parse(format!("bandwidth rule `{text}` is neither a number nor `n^E`"));
    if let Some(exponent) = text.strip_prefix("n^") {
        let exponent: f64 = exponent.parse().map_err(|_| bad())?;
        return Ok(BandwidthRule::power(exponent));
    }
    Ok(BandwidthRule::Fixed { r_n: text.parse().map_err(|_| bad())? })
}

pub fn mc_clt(args: &CltArgs) -> Result<(), CliError> {
    let config = CltConfig {
        model: model(&args.model)?,
        kind: args.measure,
        window: args.window,
        rule: bandwidth_rule(&args.bandwidth)?,
        omegas: args.omega.iter().map(|w| if (w - PI).abs() < 1e-12 { PI } else { *w }).collect(),
        n: args.n,
        reps: args.reps,
        master_seed: args.seed,
        alpha: args.alpha,
        centering: if args.raw_ci { Centering::Raw } else { Centering::BiasCorrected },
    };
    let report = clt_experiment(&config)?;
    write(
        &args.output,
        || {
            if args.replicates {
                let rows = report.summaries.iter().flat_map(|s| {
                    s.f_hat.iter().zip(&s.z_values).enumerate().map(move |(i, (f, z))| {
                        vec![i.to_string(), num(s.omega), num(*f), num(*z)]
                    })
                });
                return csv_table(&["replicate", "omega", "f_hat", "z"], rows);
            }
            csv_table(
                &[
                    "omega", "f_true", "mean", "variance", "scaled_variance", "sigma2_true", "bias", "exact_bias",
                    "asymptotic_bias", "rmse", "z_mean", "z_variance", "z_skewness", "z_excess_kurtosis",
                    "ks_statistic", "ks_p_value", "normality_pass", "coverage", "degenerate_count",
                ],
                report.summaries.iter().map(|s| {
                    vec![
                        num(s.omega),
                        num(s.f_true),
                        num(s.mean),
                        num(s.variance),
                        num(s.scaled_variance),
                        num(s.sigma2_true),
                        num(s.bias),
                        num(s.exact_bias),
                        num(s.asymptotic_bias),
                        num(s.rmse),
                        num(s.z.mean),
                        num(s.z.variance),
                        num(s.z.skewness),
                        num(s.z.excess_kurtosis),
                        num(s.z.ks_statistic),
                        num(s.z.ks_p_value),
                        (s.z.normality_pass as u8).to_string(),
                        num(s.coverage),
                        s.degenerate_count.to_string(),
                    ]
                }),
            )
        },
        &report,
    )
}

pub fn mc_bias(args: &BiasArgs) -> Result<(), CliError> {
    let report = bias_experiment(&BiasConfig {
        model: model(&args.model)?,
        kind: args.measure,
        window: args.window,
        omega: args.omega,
        n: args.n,
        reps: args.reps,
        bandwidths: args.bandwidths.clone(),
        master_seed: args.seed,
    })?;
    write(
        &args.output,
        || {
            csv_table(
                &["r_n", "mean_f_hat", "bias", "mc_se", "exact_bias", "asymptotic_bias"],
                report.rows.iter().map(|r| {
                    vec![
                        num(r.r_n),
                        num(r.mean_f_hat),
                        num(r.bias),
                        num(r.mc_se),
                        num(r.exact_bias),
                        num(r.asymptotic_bias),
                    ]
                }),
            )
        },
        &report,
    )
}

#[derive(Serialize)]
struct VerifyDoc {
    model: SimulationModel,
    seed: u64,
    decomposition: DecompositionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay: Option<DecayTable>,
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let process = model(&args.model)?;
    let series = simulate_series(&process, args.n, args.seed)?;
    let hm = HoeffdingModel::for_process(&process, args.measure, args.k)?;
    let decomposition = decompose(&series, &hm, args.k)?;
    let decay = if args.decay_sizes.is_empty() {
        None
    } else {
        Some(degenerate_decay_experiment(&process, args.measure, &args.decay_sizes, args.reps, args.k, args.seed)?)
    };
    let breach = decomposition.residual.is_nan() || decomposition.residual.abs() > RESIDUAL_TOL;
    let doc = VerifyDoc { model: process, seed: args.seed, decomposition, decay };
    write(
        &args.output,
        || {
            let d = &doc.decomposition;
            let mut rows = vec![
                vec!["estimate".to_string(), num(d.estimate)],
                vec!["xi_true".to_string(), num(d.xi_true)],
                vec!["total".to_string(), num(d.total)],
                vec!["linear_part".to_string(), num(d.linear_part)],
            ];
            for part in &d.degenerate_parts {
                rows.push(vec![format!("degenerate_c{}", part.c), num(part.weighted)]);
            }
            rows.push(vec!["residual".to_string(), num(d.residual)]);
            if let Some(t) = &doc.decay {
                for r in &t.rows {
                    rows.push(vec![format!("decay_mean_square_n{}", r.n), num(r.mean_square)]);
                }
                rows.push(vec!["decay_slope".to_string(), t.slope.map_or("NaN".into(), num)]);
            }
            csv_table(&["term", "value"], rows)
        },
        &doc,
    )?;
    if breach {
        return Err(CliError::Invariant(format!(
            "decomposition residual {} exceeds {RESIDUAL_TOL}",
            doc.decomposition.residual
        )));
    }
    Ok(())
}
