//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Pass criterion numbers as arguments to
//! run a subset, e.g. `cargo test --test acceptance -- 2 6`.

use std::fs;
use std::path::Path;
use std::time::Instant;

use ou_discount::estimation::{
    self, bias_correct, bias_correct_with_start, confidence_quantiles_shifted, estimate_point, mle_ou,
    replicate_estimates, BiasCorrectionConfig, ParamShift, PipelineOptions, PointEstimate,
};
use ou_discount::ingest::{self, DatasetFiles, PrepareOptions, RawSeriesFile, SeriesKind};
use ou_discount::oumodel::{self, Omega1, OuParams};
use ou_discount::ratecore::HistogramBins;
use ou_discount::rng::{derive_seed, stream_rng};
use ou_discount::simulation::{
    self, mc_discount_curve, model_statistics, simulate_ou_path, surrogate_sample, InitialRate, ModelStatsConfig,
    SimConfig, SurrogateDesign,
};
use ou_discount::special::erfc;
use ou_discount::stats;
use rand::Rng;
use rand_distr::StandardNormal;

const UK: OuParams = OuParams {
    m: 0.0084,
    k: 0.089,
    alpha: 0.82,
};
const UK_Q: f64 = 0.13;
const US: OuParams = OuParams {
    m: 0.0083,
    k: 0.058,
    alpha: 0.65,
};
const US_Q: f64 = 0.20;
/// Years of annual 3-month real rates in the historical data.
const UK_YEARS: usize = 113;
const US_YEARS: usize = 93;

struct Verdict {
    pass: bool,
    contingent: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict {
            pass,
            contingent: false,
            detail,
        }
    }
}

fn criterion_1() -> Verdict {
    // published long-run rates, in fractions
    let uk = oumodel::long_run_rate(&UK, UK_Q);
    let us = oumodel::long_run_rate(&US, US_Q);
    let tol = 0.0005;
    let pass = (uk - 0.0169).abs() <= tol && (us - 0.0221).abs() <= tol;
    Verdict::new(
        pass,
        format!("UK r_inf {uk:.5} vs 0.0169, US {us:.5} vs 0.0221, tol {tol}"),
    )
}

fn criterion_2() -> Verdict {
    const PATHS: usize = 100_000;
    const STEPS_PER_YEAR: usize = 24;
    let slow = OuParams {
        m: 0.02,
        k: 0.03,
        alpha: 0.25,
    };
    let grid = [(UK, UK_Q), (US, US_Q), (slow, 0.1)];
    let horizons = [1.0, 10.0, 50.0];
    let mut worst: f64 = 0.0;
    let mut fails = Vec::new();
    let mut case = 0u64;
    for (params, q_ref) in grid {
        for q in [0.0, q_ref, -0.3] {
            case += 1;
            let est = mc_discount_curve(&params, q, params.m, &horizons, PATHS, STEPS_PER_YEAR, 1000 + case).unwrap();
            for e in est {
                let exact = oumodel::log_discount(&params, q, params.m, e.horizon).unwrap().exp();
                let z = (e.estimate - exact) / e.standard_error;
                worst = worst.max(z.abs());
                if z.abs() > 3.0 {
                    fails.push(format!("(m={}, q={q}, t={}) z={z:.2}", params.m, e.horizon));
                }
            }
        }
    }
    Verdict::new(
        fails.is_empty(),
        format!(
            "27 comparisons at {PATHS} paths, {STEPS_PER_YEAR} steps/year; max |z| = {worst:.2} (limit 3){}",
            if fails.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", fails.join(", "))
            }
        ),
    )
}

fn criterion_3() -> Verdict {
    let mut worst: f64 = 0.0;
    for params in [UK, US] {
        for t in [0.1, 1.0, 10.0, 100.0] {
            let r0 = 0.013;
            let c = oumodel::char_coeffs(&params, r0, Omega1::MinusI, t).unwrap().c;
            let via_char = (-c).exp();
            let closed = oumodel::log_discount(&params, 0.0, r0, t).unwrap().exp();
            worst = worst
                .max((via_char.re / closed - 1.0).abs())
                .max(via_char.im.abs() / closed);
        }
    }
    Verdict::new(
        worst <= 1e-12,
        format!("max relative difference {worst:.2e} (limit 1e-12)"),
    )
}

fn criterion_4() -> Verdict {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/erfc_reference.csv");
    let text = fs::read_to_string(path).unwrap();
    let mut worst_abs: f64 = 0.0;
    let mut worst_reflect: f64 = 0.0;
    let mut n = 0;
    for line in text.lines().skip(1) {
        let (x, want) = line.split_once(',').unwrap();
        let x: f64 = x.parse().unwrap();
        let want: f64 = want.parse().unwrap();
        worst_abs = worst_abs.max((erfc(x) - want).abs());
        worst_reflect = worst_reflect.max((erfc(x) + erfc(-x) - 2.0).abs());
        n += 1;
    }
    // reflection on an irregular grid as well
    for i in 0..=6000 {
        let x = -6.0 + i as f64 * 0.002_000_3;
        worst_reflect = worst_reflect.max((erfc(x) + erfc(-x) - 2.0).abs());
    }
    Verdict::new(
        worst_abs <= 1e-12 && worst_reflect <= 1e-14,
        format!(
            "{n} reference points: max abs error {worst_abs:.2e} (limit 1e-12); reflection {worst_reflect:.2e} (limit 1e-14)"
        ),
    )
}

fn criterion_5() -> Verdict {
    const DRAWS: usize = 1_000_000;
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, params, seed) in [("UK", UK, 51u64), ("US", US, 52)] {
        let mut rng = stream_rng(seed, 0);
        let sigma = params.sigma();
        let negatives = (0..DRAWS)
            .filter(|_| params.m + sigma * rng.sample::<f64, _>(StandardNormal) < 0.0)
            .count();
        let empirical = negatives as f64 / DRAWS as f64;
        let exact = oumodel::prob_negative_stationary(&params);
        pass &= (empirical - exact).abs() <= 0.005;
        parts.push(format!("{name} {exact:.4} vs empirical {empirical:.4}"));
    }
    // P = 1/2 - z/sqrt(pi) + O(z^2), z = mu / kappa
    let mut worst_ratio: f64 = 0.0;
    for z in [0.2, 0.1, 0.05, 0.01] {
        let alpha: f64 = 0.8;
        let k: f64 = 0.05;
        // choose m so that mu / kappa = z
        let m = z * k / alpha.sqrt();
        let p = oumodel::prob_negative_stationary(&OuParams { m, k, alpha });
        let linear = 0.5 - z / std::f64::consts::PI.sqrt();
        worst_ratio = worst_ratio.max((p - linear).abs() / (z * z));
    }
    pass &= worst_ratio <= 1.0;
    parts.push(format!("small-ratio remainder / z^2 <= {worst_ratio:.3} (limit 1)"));
    Verdict::new(pass, parts.join("; "))
}

fn criterion_6() -> Verdict {
    const REPS: usize = 1000;
    let mut pass = true;
    let mut parts = Vec::new();
    // (name, params, q, years, simulated 3m/10y correlation, 3m, 10y, inversion)
    let cases = [
        ("UK", UK, UK_Q, UK_YEARS, 0.21, 0.43, 0.34, 0.46),
        ("US", US, US_Q, US_YEARS, 0.24, 0.42, 0.26, 0.41),
    ];
    for (name, params, q, years, corr, want3, want10, want_inv) in cases {
        let target = simulation::long_target_std_from_correlation(&params, q, 10.0, corr).unwrap();
        let mut design = SurrogateDesign::new(years);
        design.ten_year_target_std = Some(target);
        let cfg = ModelStatsConfig {
            design,
            seed: derive_seed(6, years as u64),
            bins: HistogramBins::default(),
        };
        let s = model_statistics(&params, q, &cfg, REPS).unwrap();
        let ok = (s.neg_frac_3m - want3).abs() <= 0.03
            && (s.neg_frac_10y - want10).abs() <= 0.03
            && (s.inversion_frac - want_inv).abs() <= 0.04;
        pass &= ok;
        parts.push(format!(
            "{name} 3m {:.3} (want {want3}), 10y {:.3} (want {want10}), inverted {:.3} (want {want_inv}), corr {:.3}",
            s.neg_frac_3m, s.neg_frac_10y, s.inversion_frac, s.corr_3m_10y
        ));
    }
    Verdict::new(pass, format!("{}; tol 0.03 / 0.03 / 0.04", parts.join("; ")))
}

fn criterion_7() -> Verdict {
    const REPS: usize = 200;
    let truth = OuParams {
        m: 0.008,
        k: 0.08,
        alpha: 0.9,
    };
    let mut medians = Vec::new();
    for (i, years) in [100usize, 1000, 10_000].into_iter().enumerate() {
        let (mut em, mut ek, mut ea) = (Vec::new(), Vec::new(), Vec::new());
        for r in 0..REPS {
            let cfg = SimConfig {
                steps_per_year: 1,
                years,
                seed: derive_seed(7, (i * REPS + r) as u64),
                initial_rate: InitialRate::Stationary,
            };
            let path = simulate_ou_path(&truth, &cfg).unwrap();
            if let Ok(p) = mle_ou(&path.values, 1.0) {
                em.push((p.m - truth.m).abs());
                ek.push((p.k - truth.k).abs());
                ea.push((p.alpha - truth.alpha).abs());
            }
        }
        medians.push([
            stats::median(&mut em).unwrap(),
            stats::median(&mut ek).unwrap(),
            stats::median(&mut ea).unwrap(),
        ]);
    }
    let decreasing = (0..3).all(|j| medians[0][j] > medians[1][j] && medians[1][j] > medians[2][j]);
    let fmt = |j: usize| format!("{:.2e} > {:.2e} > {:.2e}", medians[0][j], medians[1][j], medians[2][j]);
    Verdict::new(
        decreasing,
        format!("median |error| m: {}; k: {}; alpha: {}", fmt(0), fmt(1), fmt(2)),
    )
}

fn criterion_8() -> Verdict {
    const META: usize = 200;
    let truth = PointEstimate { params: UK, q: UK_Q };
    let mut cfg = BiasCorrectionConfig::new(UK_YEARS);
    cfg.steps_per_year = 1;
    let design = cfg.design();
    let mut hits = [0usize; 5];
    let mut used = 0;
    for j in 0..META {
        let data = surrogate_sample(&truth.params, truth.q, &design, 8, j as u64).unwrap();
        let raw = match estimate_point(
            &data.short,
            stats::mean(&data.short).unwrap(),
            stats::mean(&data.long).unwrap(),
        ) {
            Ok(r) => r,
            Err(_) => continue,
        };
        let Ok(bc) = bias_correct(&raw, &cfg, derive_seed(80, j as u64)) else {
            continue;
        };
        let Ok(bands) = confidence_quantiles_shifted(&bc.corrected, &bc.shift, &cfg, derive_seed(81, j as u64)) else {
            continue;
        };
        used += 1;
        let checks = [
            bands.m.contains(truth.params.m),
            bands.k.contains(truth.params.k),
            bands.alpha.contains(truth.params.alpha),
            bands.q.contains(truth.q),
            bands.r_infinity.contains(truth.r_infinity()),
        ];
        for (h, c) in hits.iter_mut().zip(checks) {
            *h += c as usize;
        }
    }
    let cover: Vec<f64> = hits.iter().map(|&h| h as f64 / used as f64).collect();
    let pass = used == META && cover.iter().all(|&c| (0.85..=0.95).contains(&c));
    Verdict::new(
        pass,
        format!(
            "{used}/{META} meta-replicates; coverage m {:.3}, k {:.3}, alpha {:.3}, q {:.3}, r_inf {:.3} (accept 0.85..0.95)",
            cover[0], cover[1], cover[2], cover[3], cover[4]
        ),
    )
}

fn criterion_9() -> Verdict {
    // (name, published raw (m, k, alpha), corrected params, q, years)
    let cases = [
        ("UK", (0.0088, 0.082, 0.93), UK, UK_Q, UK_YEARS),
        ("US", (0.0083, 0.057, 0.74), US, US_Q, US_YEARS),
    ];
    let band = 0.07..=0.16;
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (name, (m, k, alpha), corrected_ref, q, years)) in cases.into_iter().enumerate() {
        let mut cfg = BiasCorrectionConfig::new(years);
        cfg.steps_per_year = 1;
        let seed = derive_seed(9, i as u64);

        // raw estimates produced by the surrogate pipeline at the corrected truth
        let truth = PointEstimate { params: corrected_ref, q };
        let set = replicate_estimates(
            &truth,
            &cfg.design(),
            &ParamShift::default(),
            cfg.replicates,
            derive_seed(seed, 1),
        )
        .unwrap();
        let n = set.estimates.len() as f64;
        let surrogate_raw = PointEstimate {
            params: OuParams {
                m: set.estimates.iter().map(|e| e.params.m).sum::<f64>() / n,
                k: set.estimates.iter().map(|e| e.params.k).sum::<f64>() / n,
                alpha: set.estimates.iter().map(|e| e.params.alpha).sum::<f64>() / n,
            },
            q: set.estimates.iter().map(|e| e.q).sum::<f64>() / n,
        };
        let published_raw = PointEstimate {
            params: OuParams { m, k, alpha },
            q,
        };
        for (label, raw) in [("surrogate raw", surrogate_raw), ("published raw", published_raw)] {
            let bc = bias_correct(&raw, &cfg, derive_seed(seed, 2)).unwrap();
            let shift = (raw.params.alpha - bc.corrected.params.alpha) / raw.params.alpha;
            let near = |a: f64, b: f64| (a / b - 1.0).abs() <= 0.10;
            let close = near(bc.corrected.params.m, corrected_ref.m)
                && near(bc.corrected.params.k, corrected_ref.k)
                && near(bc.corrected.params.alpha, corrected_ref.alpha);
            let again = bias_correct_with_start(&raw, &bc.corrected, &cfg, derive_seed(seed, 2)).unwrap();
            let idempotent = again.iterations == 1 && again.converged;
            let ok = band.contains(&shift) && close && idempotent && bc.converged;
            pass &= ok;
            parts.push(format!(
                "{name} {label} alpha {:.3} -> {:.3} (down {:.1}%), k {:.4} -> {:.4}, m {:.4} -> {:.4}, {} iterations, rerun change {:.1e}{}",
                raw.params.alpha,
                bc.corrected.params.alpha,
                100.0 * shift,
                raw.params.k,
                bc.corrected.params.k,
                raw.params.m,
                bc.corrected.params.m,
                bc.iterations,
                again.last_change,
                if ok { "" } else { " [out of band]" }
            ));
        }
    }
    Verdict::new(
        pass,
        format!(
            "{}; accept alpha shift 7..16% down, corrected within 10% of the reference corrected values",
            parts.join("; ")
        ),
    )
}

fn write_series(path: &Path, first_year: i32, values: &[f64]) {
    let mut body = String::from("date,value\n");
    for (i, v) in values.iter().enumerate() {
        body.push_str(&format!("{},{:.12}\n", first_year + i as i32, v));
    }
    fs::write(path, body).unwrap();
}

fn criterion_10() -> Verdict {
    // The historical series are not shipped; run the whole pipeline on a
    // synthetic data set generated from known parameters instead.
    let truth = PointEstimate { params: UK, q: UK_Q };
    let years = UK_YEARS;
    let mut design = SurrogateDesign::new(years);
    design.steps_per_year = 12;
    let sample = surrogate_sample(&truth.params, truth.q, &design, 10, 0).unwrap();
    let inflation = 0.02f64;
    let to_percent = |real: f64| 100.0 * ((real + inflation.ln_1p()).exp() - 1.0);
    let dir = tempfile::tempdir().unwrap();
    let p3 = dir.path().join("three_month.csv");
    let p10 = dir.path().join("ten_year.csv");
    let pc = dir.path().join("cpi.csv");
    write_series(
        &p3,
        1900,
        &sample.short.iter().map(|&r| to_percent(r)).collect::<Vec<_>>(),
    );
    write_series(
        &p10,
        1900,
        &sample.long.iter().map(|&r| to_percent(r)).collect::<Vec<_>>(),
    );
    write_series(&pc, 1900, &vec![100.0 * inflation; years + 10]);
    let files = DatasetFiles {
        nominal_3m: RawSeriesFile::new(&p3, SeriesKind::AnnualRatePercent),
        nominal_10y: RawSeriesFile::new(&p10, SeriesKind::AnnualRatePercent),
        cpi: RawSeriesFile::new(&pc, SeriesKind::CpiGrowthPercent),
    };
    let data = ingest::prepare_from_files(&files, &PrepareOptions::default()).unwrap();
    let mut opts = PipelineOptions::new(10);
    opts.match_long_std = false;
    if let Some(b) = opts.bias.as_mut() {
        b.steps_per_year = 12;
    }
    let report = estimation::run_pipeline(&data.three_month_real.base, &data.ten_year_real.base, &opts).unwrap();
    let bands = report.quantiles.unwrap();
    let ok = bands.r_infinity.contains(truth.r_infinity())
        && bands.r_infinity.contains(report.r_infinity)
        && bands.alpha.contains(truth.params.alpha)
        && bands.k.contains(truth.params.k);
    Verdict {
        pass: ok,
        contingent: true,
        detail: format!(
            "historical data not shipped; synthetic fixture (truth r_inf {:.4}): estimate {:.4}, band ({:.4}, {:.4}), alpha {:.3} in ({:.3}, {:.3}), k {:.4} in ({:.4}, {:.4})",
            truth.r_infinity(),
            report.r_infinity,
            bands.r_infinity.q05,
            bands.r_infinity.q95,
            report.params.alpha,
            bands.alpha.q05,
            bands.alpha.q95,
            report.params.k,
            bands.k.q05,
            bands.k.q95
        ),
    }
}

fn criterion_11() -> Verdict {
    let run = || {
        let mut design = SurrogateDesign::new(60);
        design.steps_per_year = 12;
        design.ten_year_target_std = Some(0.03);
        let cfg = ModelStatsConfig {
            design,
            seed: 11,
            bins: HistogramBins::default(),
        };
        let stats = model_statistics(&UK, UK_Q, &cfg, 64).unwrap();
        let mc = mc_discount_curve(&UK, UK_Q, 0.01, &[1.0, 5.0], 5000, 12, 11).unwrap();
        let mut bcfg = BiasCorrectionConfig::new(60);
        bcfg.steps_per_year = 4;
        bcfg.replicates = 64;
        let bc = bias_correct(&PointEstimate { params: UK, q: UK_Q }, &bcfg, 11).unwrap();
        format!("{stats:?}{mc:?}{bc:?}")
    };
    let outputs: Vec<String> = [1usize, 2, 4]
        .into_iter()
        .map(|threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(run)
        })
        .collect();
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    Verdict::new(
        same,
        "model statistics, Monte Carlo discount and bias correction identical on 1, 2 and 4 threads".into(),
    )
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(u32, &str, fn() -> Verdict); 11] = [
        (1, "long-run rate from published inputs", criterion_1),
        (2, "closed-form discount vs Monte Carlo", criterion_2),
        (3, "characteristic-function cross-check", criterion_3),
        (4, "erfc accuracy and reflection", criterion_4),
        (5, "stationary negative-rate probability", criterion_5),
        (6, "model statistics vs published model columns", criterion_6),
        (7, "MLE consistency", criterion_7),
        (8, "quantile band coverage", criterion_8),
        (9, "bias correction shift and idempotency", criterion_9),
        (10, "end-to-end pipeline", criterion_10),
        (11, "determinism across thread counts", criterion_11),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let status = match (v.pass, v.contingent) {
            (true, false) => "PASS",
            (true, true) => "PASS (contingent, synthetic fixture)",
            (false, _) => "FAIL",
        };
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {status}: {name}: {} [{:.1}s]",
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
