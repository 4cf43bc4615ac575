//! Acceptance criteria, one pass/fail line each.
//!
//! Failures are reported but do not abort `cargo test` unless
//! `ACCEPTANCE_STRICT` is set, so the remaining test targets still run.

use std::f64::consts::PI;
use std::time::Instant;

use dressed_cascade::cli::suites::full_gkls_checks;
use dressed_cascade::dressing::{dress, DressingConfig};
use dressed_cascade::hamiltonian::standard_spec;
use dressed_cascade::perturbation::{multiplet_scalings, ratio_lowfreq_vs_mollow, PerturbativeInput};
use dressed_cascade::pipeline::{flat_variant, run_point, PipelineConfig};
use dressed_cascade::rates::{ChannelRates, FormFactor, RateSet};
use dressed_cascade::spectrum::{build_lines, multiplet_ratio, LineKind, PRUNE};
use dressed_cascade::Level;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn cubic() -> FormFactor {
    FormFactor::power_law(1e-4, 1.0, 3.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn mollow_limit() -> Verdict {
    let g0 = 1e-3;
    let p = run_point(
        &standard_spec(1.0, 1.0, 0.2, 0.0, false, 50),
        &FormFactor::flat(g0),
        &PipelineConfig::default(),
    )
    .unwrap();
    let r = &p.rates;
    let s = &p.spectrum;
    let plus = s.line(1, LineKind::SidebandPlus).unwrap();
    let minus = s.line(1, LineKind::SidebandMinus).unwrap();
    let central = s.line(1, LineKind::CentralLorentzian).unwrap();
    let height = |l: &dressed_cascade::spectrum::SpectralLine| l.weight / (PI * l.width);
    let errs = [
        rel(r.gamma_coh, 0.75 * g0),
        rel(r.gamma_pop, 0.5 * g0),
        rel(r.pi_1, 0.5),
        rel(r.pi_2, 0.5),
        rel(minus.weight, plus.weight),
        rel(s.central_weight(1), 2.0 * plus.weight),
        rel(height(central), 3.0 * height(plus)),
    ];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    verdict(
        worst <= 1e-6,
        format!(
            "Γcoh/Γ0={:.9} Γpop/Γ0={:.9} Π1={:.9} weights {:.6}:{:.6}:1 heights {:.6}:1, worst rel err {worst:.1e} (tol 1e-6)",
            r.gamma_coh / g0,
            r.gamma_pop / g0,
            r.pi_1,
            minus.weight / plus.weight,
            s.central_weight(1) / plus.weight,
            height(central) / height(plus),
        ),
    )
}

fn ratio_convergence() -> Verdict {
    let mut errs = Vec::new();
    let mut ok = true;
    let mut parts = Vec::new();
    for (rabi, tol) in [(0.02, 0.3), (0.05, 0.2), (0.1, 0.2)] {
        let asym = rabi / 2.0;
        let p = run_point(&standard_spec(1.0, 1.0, rabi, asym, true, 50), &cubic(), &PipelineConfig::default())
            .unwrap();
        let numeric = multiplet_ratio(&p.spectrum, 0, 1).unwrap();
        let closed = ratio_lowfreq_vs_mollow(&PerturbativeInput::resonant(rabi, asym), &cubic()).unwrap();
        let e = rel(numeric, closed);
        ok &= e <= tol;
        parts.push(format!("ΩR={rabi}: {numeric:.4e} vs {closed:.4e} ({:.1}% ≤ {}%)", 100.0 * e, 100.0 * tol));
        errs.push(e);
    }
    let decreasing = errs.windows(2).all(|w| w[0] <= w[1]);
    verdict(
        ok && decreasing,
        format!("{}; error shrinks with coupling: {decreasing}", parts.join("; ")),
    )
}

fn form_factor_discrepancy() -> Verdict {
    let cfg = PipelineConfig::default();
    let mut worst = (0.0, 0.0, 0.0, 0.0);
    let mut points = 0;
    let mut at_tenth = None;
    for rabi in [0.1, 0.2, 0.3] {
        for k in 1..16 {
            let asym = 0.02 * k as f64;
            let p = run_point(&standard_spec(1.0, 1.0, rabi, asym, true, 50), &cubic(), &cfg).unwrap();
            let flat = flat_variant(&p, &cubic(), &cfg).unwrap();
            let q = multiplet_ratio(&p.spectrum, 0, 1).unwrap() / multiplet_ratio(&flat, 0, 1).unwrap();
            let om = p.omega_gap();
            let dev = rel(q, om.powi(3));
            points += 1;
            if dev > worst.0 {
                worst = (dev, rabi, asym, q / om.powi(3));
            }
            if rabi == 0.1 && k == 1 {
                at_tenth = Some((q, om));
            }
        }
    }
    let (q, om) = at_tenth.unwrap();
    verdict(
        worst.0 <= 0.05,
        format!(
            "{points} points; at ΩR=0.1 true/flat = {q:.3e} vs (Ω/ωL)³ = {:.3e}; worst ratio/(Ω/ωL)³ = {:.3} at ΩR={}, ΩAS={:.2} (tol 5%)",
            om.powi(3),
            worst.3,
            worst.1,
            worst.2
        ),
    )
}

fn multiplet_flatness() -> Verdict {
    let rabi = 0.1;
    let cfg = PipelineConfig::default();
    let mut scaled: [Vec<f64>; 3] = Default::default();
    let mut q3_worst = (0.0f64, 0.0);
    for k in 0..10 {
        let asym = 0.01 + 0.01 * k as f64;
        let p = run_point(&standard_spec(1.0, 1.0, rabi, asym, true, 50), &cubic(), &cfg).unwrap();
        let rows = multiplet_scalings(&PerturbativeInput::resonant(rabi, asym), 3.0).unwrap();
        for q in 0..3 {
            scaled[q].push(p.spectrum.multiplet_weight(q as i64) / rows[q].scaling);
        }
        let om = p.omega_gap();
        let bound = 10.0 * (rabi * om).powi(2) * p.spectrum.multiplet_weight(1);
        let used = p.spectrum.multiplet_weight(3) / bound;
        if used > q3_worst.0 {
            q3_worst = (used, asym);
        }
    }
    let spread: Vec<f64> = scaled
        .iter()
        .map(|v| {
            let max = v.iter().copied().fold(f64::MIN, f64::max);
            let min = v.iter().copied().fold(f64::MAX, f64::min);
            max / min
        })
        .collect();
    let flat = spread.iter().all(|&s| s <= 2.0);
    let bounded = q3_worst.0 <= 1.0;
    verdict(
        flat && bounded,
        format!(
            "max/min of weight/scaling q=0: {:.3}, q=1: {:.3}, q=2: {:.3} (≤ 2); I^(3) / 10(ΩRΩ)²I^(1) peaks at {:.3} for ΩAS={:.2} (≤ 1)",
            spread[0], spread[1], spread[2], q3_worst.0, q3_worst.1
        ),
    )
}

fn gap_reduction() -> Verdict {
    let cfg = DressingConfig::default();
    let mut monotone = true;
    let mut below_one = true;
    let mut truncation = 0.0f64;
    let mut ends = Vec::new();
    for rabi in [0.1, 0.2, 0.3] {
        let gap = |asym: f64, n: usize| dress(&standard_spec(1.0, 1.0, rabi, asym, true, n), &cfg).unwrap().omega_gap;
        let g0 = gap(0.0, 50);
        let mut prev = f64::INFINITY;
        for k in 0..16 {
            let asym = 0.3 * k as f64 / 15.0;
            let g = gap(asym, 50);
            let ratio = g / g0;
            monotone &= ratio <= prev;
            below_one &= ratio <= 1.0;
            prev = ratio;
            truncation = truncation.max(rel(gap(asym, 80), g));
            if k == 15 {
                ends.push(format!("ΩR={rabi}: {ratio:.4}"));
            }
        }
    }
    verdict(
        monotone && below_one && truncation <= 1e-6,
        format!(
            "non-increasing: {monotone}, ≤ 1: {below_one}, Ω/Ω0 at ΩAS=0.3 {}, 50 vs 80 levels max rel diff {truncation:.1e} (tol 1e-6)",
            ends.join(", ")
        ),
    )
}

fn full_gkls() -> Verdict {
    let checks = full_gkls_checks(50, 30, &PipelineConfig::default()).unwrap();
    let pass = checks.iter().all(|c| c.pass);
    let detail = checks
        .iter()
        .map(|c| format!("{} residual {:.1e} (tol {:.0e})", c.name, c.residual, c.tolerance))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(pass, format!("30-band window: {detail}"))
}

fn invariant_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let cfg = PipelineConfig::default();
    let mut worst = [0.0f64; 6];
    for _ in 0..200 {
        let omega_0 = rng.gen_range(0.85..1.15);
        let rabi = rng.gen_range(0.02..0.3);
        let asym = rng.gen_range(0.0..0.3);
        let cr = rng.gen_bool(0.5);
        let exponent = [0.0, 1.0, 3.0][rng.gen_range(0..3)];
        let spec = standard_spec(omega_0, 1.0, rabi, asym, cr, 50);
        let ff = FormFactor::power_law(1e-4, omega_0, exponent);
        let p = run_point(&spec, &ff, &cfg).unwrap();
        let t = &p.table;
        for j in Level::BOTH {
            worst[0] = worst[0].max((t.norm(j) - 1.0).abs());
            worst[1] = worst[1].max(t.overlap().abs());
            worst[2] = worst[2]
                .max((p.coefficients.row_weight(j) - t.excited_weight(j)).abs())
                .max((p.coefficients.column_weight(j) - t.ground_weight(j)).abs());
        }
        let r = &p.rates;
        let emitted = r.emission_rate();
        worst[3] = worst[3].max(rel(p.spectrum.total_weight(), emitted));
        let zeroed: Vec<ChannelRates> = r.channels.iter().map(|c| ChannelRates { k_12: 0.0, ..*c }).collect();
        let no_k = build_lines(&RateSet::from_channels(zeroed, r.omega_l, r.omega_gap, 1e-4, 0.1)).unwrap();
        for c in &r.channels {
            let expected = c.gamma_11 * r.pi_1 + c.gamma_22 * r.pi_2;
            // pruned lines may remove up to PRUNE · emission each
            let excess = |w: f64| ((w - expected).abs() - 4.0 * PRUNE * emitted).max(0.0) / expected.max(1e-300);
            worst[4] = worst[4]
                .max(excess(p.spectrum.central_weight(c.q)))
                .max(excess(no_k.central_weight(c.q)));
        }
        let big = run_point(&spec, &ff.scaled(7.3), &cfg).unwrap();
        worst[5] = worst[5].max((big.rates.pi_1 - r.pi_1).abs());
        for q in [0, 2, 3] {
            if let (Ok(a), Ok(b)) = (multiplet_ratio(&p.spectrum, q, 1), multiplet_ratio(&big.spectrum, q, 1)) {
                if a != 0.0 {
                    worst[5] = worst[5].max(rel(b, a));
                }
            }
        }
    }
    let tol = [1e-9, 1e-9, 1e-9, 1e-9, 1e-9, 1e-10];
    let names = ["normalization", "orthogonality", "sum rule", "flux", "K12 erasure", "rescaling"];
    let pass = worst.iter().zip(&tol).all(|(w, t)| w <= t);
    let detail = names
        .iter()
        .zip(worst.iter().zip(&tol))
        .map(|(n, (w, t))| format!("{n} {w:.1e} (≤ {t:.0e})"))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(pass, format!("200 random points: {detail}"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Verdict, Option<f64>);
    let criteria: [Criterion; 7] = [
        ("Mollow limit", mollow_limit, Some(1.0)),
        ("low-frequency ratio convergence", ratio_convergence, Some(10.0)),
        ("form-factor discrepancy", form_factor_discrepancy, None),
        ("multiplet scaling flatness", multiplet_flatness, None),
        ("gap reduction", gap_reduction, None),
        ("full GKLS oracle equivalence", full_gkls, Some(60.0)),
        ("invariant suite", invariant_suite, None),
    ];
    let mut failed = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        let in_time = budget.is_none_or(|b| secs < b);
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = budget.map_or(String::new(), |b| format!(" < {b} s"));
        println!(
            "criterion {} {}: {name}: {} [{secs:.2} s{budget}]",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
