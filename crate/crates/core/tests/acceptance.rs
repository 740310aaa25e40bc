//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so every line is printed even
//! when everything passes. Exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fcvbw::complexity::{general_rates, saving, special_case_rates, TD_TD};
use fcvbw::engine::OlsEngine;
use fcvbw::instrument::{count_flops, Counted};
use fcvbw::minimax::{
    build_constraints, design, design_fixed, estimate_fft_length, estimate_fft_length_raw, estimate_order,
    estimate_order_raw, solve_dense, solve_minimax, DesignOptions, DesignProblem, DesignResult, Triple,
};
use fcvbw::oracle::{direct_fir_convolution, lptv_convolution_switched, naive_dft, NaiveBlockFilter};
use fcvbw::ptvir::{
    base_response_cosine, base_response_idft, calibrate_for, fit_shift_rule, measure_ptvir, ptvir_from_base,
    response_hn, FrequencyGrid, PtvirSet,
};
use fcvbw::spectrum::{dft_coefficients, DftCoefficients, FilterSpec, TransitionProfile};
use fcvbw::{BinSpec, BlockProcessor};

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn reference_spec() -> FilterSpec<f64> {
    FilterSpec::new(0.25 * PI, 1e-3, 1e-3, 1e-3, 0.75 * PI, 0.8594 * PI).unwrap()
}

fn reference_bins() -> BinSpec {
    BinSpec::new(128, 33, 16, 48, 55).unwrap()
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_1() -> Check {
    let opts = DesignOptions::default();
    let r = design(&reference_spec(), &opts).map_err(|e| e.to_string())?;
    let v = r.verification.as_ref().expect("verification requested");
    let path: Vec<String> = r
        .attempts
        .iter()
        .map(|a| format!("L={}:{}", a.filter_len, a.delta.map_or("off-grid".into(), |d| format!("{d:.4e}"))))
        .collect();
    let b = &r.bins;
    let ok = b.filter_len == 33
        && b.fft_len == 128
        && b.block_len == 96
        && b.transition_bins == 16
        && (b.band_low, b.band_high) == (48, 55)
        && b.profile_len() == 15
        && r.delta_achieved <= 1e-3
        && v.delta <= 1.001e-3
        && v.grid_k == 4000;
    ensure(
        ok,
        format!(
            "loop path [{}] -> L={}, N={}, M={}, delta_N={}, bN=[{},{}], L_V={}, delta={:.4e}, dense(K={}) {:.4e}",
            path.join(", "),
            b.filter_len,
            b.fft_len,
            b.block_len,
            b.transition_bins,
            b.band_low,
            b.band_high,
            b.profile_len(),
            r.delta_achieved,
            v.grid_k,
            v.delta
        ),
    )
}

fn criterion_2() -> Check {
    let raw = estimate_order_raw(1e-3, 1e-3, 0.25 * PI);
    let order = estimate_order(1e-3, 1e-3, 0.25 * PI);
    let n_raw = estimate_fft_length_raw(order + 1);
    let n = estimate_fft_length(order + 1).map_err(|e| e.to_string())?;
    ensure(
        (raw * 100.0).round() == 2667.0 && order == 28 && (n_raw * 10.0).round() == 1268.0 && n == 128,
        format!("raw order {raw:.2} -> {order}; L={} -> N_hat {n_raw:.1} -> N={n}", order + 1),
    )
}

/// `|H_n|` on the stopband of a dense grid from impulse responses probed
/// out of the running engine.
fn criterion_3(reference: &DesignResult<f64>) -> Check {
    let bins = reference.bins;
    let grid = FrequencyGrid::<f64>::new(&bins, 4000).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut rows = 0;
    for b in bins.band_centres() {
        let mut engine = OlsEngine::new(&bins, &reference.profile, b).map_err(|e| e.to_string())?;
        let set = measure_ptvir(&mut engine).map_err(|e| e.to_string())?;
        let mask = grid.mask(b).unwrap();
        for n in 0..bins.block_len {
            rows += 1;
            for &i in &mask.indices {
                let w = grid.points[i];
                if w >= mask.stop_edge {
                    worst = worst.max(response_hn(&set, n, w).unwrap().norm());
                }
            }
        }
    }
    ensure(
        rows == 96 * 8 && worst <= 1e-3,
        format!("{rows} responses, max stopband |H_n| = {worst:.4e} ({:.1} dB)", 20.0 * worst.log10()),
    )
}

fn criterion_4(reference: &DesignResult<f64>) -> Check {
    let bins = reference.bins;
    let sc = special_case_rates(&bins, Some(&reference.profile));
    let g = general_rates(&bins);
    // split-radix real FFT counts at N = 128, by hand
    let fft_m = 64 * 7 - 192 + 2;
    let fft_a = 192 * 7 - 320 + 4;
    let m = 96.0;
    let gen_mf = (2 * fft_m + 192) as f64 / m;
    let gen_a = (2 * fft_a + 192) as f64 / m;
    let s = [saving(sc.r_mf, TD_TD.r_mf), saving(sc.r_mv, TD_TD.r_mv), saving(sc.r_a, TD_TD.r_a)];
    let ok = sc.r_mv == 0.3125
        && format!("{:.1}", sc.r_mv) == "0.3"
        && sc.memory == 15
        && (5.95..=6.05).contains(&sc.r_mf)
        && (22.0..=22.1).contains(&sc.r_a)
        && g.r_mf == 7.375
        && g.r_mf == gen_mf
        && g.r_a == gen_a
        && format!("{:.2}", g.r_a) == "23.42"
        && (s[0] - 91.9).abs() <= 0.1
        && (s[1] - 92.2).abs() <= 0.1
        && (s[2] - 84.8).abs() <= 0.1;
    ensure(
        ok,
        format!(
            "R_mv={} mem={} special R_mf={:.4} R_a={:.4} (worst b_N={:?}); general {} / {:.4}; savings {:.2}/{:.2}/{:.2}%",
            sc.r_mv, sc.memory, sc.r_mf, sc.r_a, sc.worst_case_b, g.r_mf, g.r_a, s[0], s[1], s[2]
        ),
    )
}

fn criterion_5(reference: &DesignResult<f64>) -> Check {
    let bins = reference.bins;
    let samples: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let rule = calibrate_for::<f64>(bins.fft_len, bins.filter_len).map_err(|e| e.to_string())?;
    let centres: Vec<usize> = bins.band_centres().collect();
    let tables: Vec<DftCoefficients<f64>> =
        centres.iter().map(|&b| dft_coefficients(&bins, &reference.profile, b).unwrap()).collect();
    let sets: Vec<PtvirSet<f64>> = tables
        .iter()
        .map(|h| ptvir_from_base(&base_response_idft(h).unwrap(), &rule))
        .collect();
    let refs: Vec<&PtvirSet<f64>> = sets.iter().collect();
    let m = bins.block_len;
    let blocks = samples.div_ceil(m);

    let mut schedules: Vec<Vec<usize>> = (0..centres.len()).map(|i| vec![i; blocks]).collect();
    // random mid-stream switches
    schedules.push((0..blocks).map(|_| rng.gen_range(0..centres.len())).collect());
    let mut worst = 0.0f64;
    for sched in &schedules {
        let x: Vec<f64> = (0..samples).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut engine = OlsEngine::new(&bins, &reference.profile, centres[sched[0]]).unwrap();
        let mut naive = NaiveBlockFilter::new(&tables[sched[0]], m).unwrap();
        let (mut ye, mut yn) = (Vec::new(), Vec::new());
        for (j, chunk) in x.chunks(m).enumerate() {
            engine.set_bandwidth(centres[sched[j]]).unwrap();
            naive.set_coefficients(&tables[sched[j]]).unwrap();
            let mut block = chunk.to_vec();
            block.resize(m, 0.0);
            ye.extend(engine.process_block(&block).unwrap());
            yn.extend(naive.process_block(&block).unwrap());
        }
        ye.truncate(samples);
        yn.truncate(samples);
        let yl = lptv_convolution_switched(&refs, sched, &x);
        worst = worst.max(max_dev(&ye, &yn)).max(max_dev(&ye, &yl)).max(max_dev(&yn, &yl));
    }
    ensure(
        worst <= 1e-9,
        format!("{} runs x {samples} samples, max deviation {worst:.3e}", schedules.len()),
    )
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (n, l) = (128usize, 33usize);
    let m = n - l + 1;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let h: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let padded: Vec<Complex<f64>> = (0..n).map(|i| Complex::new(h.get(i).copied().unwrap_or(0.0), 0.0)).collect();
        let table = DftCoefficients {
            table: naive_dft(&padded),
            source_b: None,
        };
        let x: Vec<f64> = (0..5000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut engine = OlsEngine::with_coefficients(&table, m).map_err(|e| e.to_string())?;
        let y = fcvbw::run_stream(&mut engine, &x).unwrap();
        worst = worst.max(max_dev(&y, &direct_fir_convolution(&h, &x)));
    }
    ensure(worst <= 1e-9, format!("20 filters, max deviation from direct convolution {worst:.3e}"))
}

fn criterion_7(reference: &DesignResult<f64>) -> Check {
    let bins = reference.bins;
    let expected_rule = calibrate_for::<f64>(bins.fft_len, bins.filter_len).map_err(|e| e.to_string())?;
    let mut value_dev = 0.0f64;
    let mut route_dev = 0.0f64;
    let mut rules_match = true;
    let problem = DesignProblem::<f64>::new(bins, 256, 16).map_err(|e| e.to_string())?;
    for b in bins.band_centres() {
        let h = dft_coefficients(&bins, &reference.profile, b).unwrap();
        let base = base_response_idft(&h).unwrap();
        let mut engine = OlsEngine::new(&bins, &reference.profile, b).unwrap();
        let measured = measure_ptvir(&mut engine).map_err(|e| e.to_string())?;
        let rule = fit_shift_rule(&measured, &base).map_err(|e| e.to_string())?;
        rules_match &= rule == expected_rule;
        let analytic = ptvir_from_base(&base, &rule);
        value_dev = value_dev.max(measured.max_abs_diff(&analytic));

        // closed-form cosine sum against the inverse DFT
        let cosine = base_response_cosine(&bins, &reference.profile, b, bins.filter_len).unwrap();
        route_dev = route_dev.max(max_dev(&cosine, &base));

        // frequency responses: direct summation over d_n vs the affine model
        let triples: Vec<Triple> = problem
            .grid
            .mask(b)
            .unwrap()
            .indices
            .iter()
            .step_by(7)
            .flat_map(|&point| [0, 37, 95].map(|n| Triple { n, b, point }))
            .collect();
        let system = build_constraints(&problem, &triples).map_err(|e| e.to_string())?;
        for (i, t) in triples.iter().enumerate() {
            let w = problem.grid.points[t.point];
            let direct = response_hn(&measured, t.n, w).unwrap() - fcvbw::ptvir::desired_response(w, &bins, b).unwrap();
            route_dev = route_dev.max((direct - system.error(i, reference.profile.values())).norm());
        }
    }
    ensure(
        rules_match && value_dev <= 1e-12 && route_dev <= 1e-12,
        format!(
            "shift rule {:+}/{} at every b_N: {rules_match}; measured vs analytic {value_dev:.2e}; route agreement {route_dev:.2e}",
            expected_rule.direction, expected_rule.offset
        ),
    )
}

fn criterion_8(reference: &DesignResult<f64>) -> Check {
    let bins = reference.bins;
    let profile = TransitionProfile::new(reference.profile.values().iter().map(|&v| Counted(v)).collect()).unwrap();
    let mut engine = OlsEngine::<Counted>::new(&bins, &profile, 48).unwrap();
    let mut retune_flops = 0;
    for (from, to) in [(48, 55), (55, 50), (50, 48), (48, 48)] {
        engine.set_bandwidth(from).unwrap();
        let (r, flops) = count_flops(|| engine.set_bandwidth(to));
        r.unwrap();
        retune_flops += flops;
    }
    let before = engine.counters();
    let x = vec![Counted(0.25); bins.block_len * 3];
    for chunk in x.chunks(bins.block_len) {
        engine.process_block(chunk).unwrap();
    }
    let after = engine.counters();
    let per_block = (after.variable_mults - before.variable_mults) / (after.blocks - before.blocks);
    ensure(
        retune_flops == 0 && per_block == 2 * bins.profile_len() as u64 && per_block == 30,
        format!("set_bandwidth flops = {retune_flops}; variable mults per block = {per_block}"),
    )
}

fn criterion_9() -> Check {
    let bins = BinSpec::new(128, 33, 16, 8, 55).map_err(|e| e.to_string())?;
    let r = design_fixed::<f64>(bins, 1e-3, &DesignOptions::default()).map_err(|e| e.to_string())?;
    let v = r.verification.as_ref().expect("verification requested");
    ensure(
        v.per_b_max.len() == 48 && v.per_n_max.len() == 96 && v.delta.is_finite(),
        format!(
            "b_N in [8,55], L=33, N=128: delta = {:.4e}, dense(K={}) {:.4e}, {} exchange rounds",
            r.delta_achieved, v.grid_k, v.delta, r.iterations
        ),
    )
}

fn criterion_10() -> Check {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (b, phases, k) in [
        (8usize, vec![3usize], 64usize),
        (6, vec![0, 23], 64),
        (9, vec![5, 11, 17], 64),
        (7, vec![1, 12], 80),
    ] {
        let bins = BinSpec::new(32, 9, 4, b, b).unwrap();
        let mut p = DesignProblem::<f64>::new(bins, k, 8).unwrap().with_phases(phases);
        let triples = p.grid.masks.iter().map(|m| m.indices.len()).sum::<usize>() * p.phases.len();
        if triples > 200 {
            return Err(format!("instance too large: {triples} constraints"));
        }
        let dense = solve_dense(&p).map_err(|e| e.to_string())?;
        p.seed_stride = 8;
        p.max_add_per_round = 3;
        let ex = solve_minimax(&p).map_err(|e| e.to_string())?;
        worst = worst.max((dense.delta_lp - ex.delta_lp).abs());
        cases += 1;
    }
    ensure(worst <= 1e-8, format!("{cases} instances (N=32), max |delta_exchange - delta_dense| = {worst:.2e}"))
}

fn main() {
    let started = Instant::now();
    let reference = design_fixed::<f64>(reference_bins(), 1e-3, &DesignOptions::default()).expect("L=33 design");
    let criteria: Vec<Criterion> = vec![
        ("1 reference design loop", Box::new(criterion_1)),
        ("2 order and FFT length estimates", Box::new(criterion_2)),
        ("3 stopband of every H_n below -60 dB", Box::new(|| criterion_3(&reference))),
        ("4 complexity figures", Box::new(|| criterion_4(&reference))),
        ("5 engine / naive / LPTV agreement", Box::new(|| criterion_5(&reference))),
        ("6 classical overlap-save", Box::new(criterion_6)),
        ("7 PTVIR consistency", Box::new(|| criterion_7(&reference))),
        ("8 zero-arithmetic retuning", Box::new(|| criterion_8(&reference))),
        ("9 full-band design", Box::new(criterion_9)),
        ("10 exchange vs dense LP", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let t = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] criterion {name}: {detail} ({:.1?})", t.elapsed());
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1?}",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
