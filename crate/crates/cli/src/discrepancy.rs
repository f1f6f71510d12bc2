//! Checklist of published numeric claims against recomputed values.

use serde::Serialize;
use serde_json::json;

use cloudmap::dynamics::{
    bifurcation_scan, characteristic_coeffs, claimed_fixed_point, hopf_alpha, lyapunov_spectrum,
    published_stability_window, residual, routh_classify, RouthVerdict, ScanSettings, Sweep,
    SweepParameter,
};
use cloudmap::failure_sim::{exhaustive_loss_probability, mc_estimate, verify_coefficients, LossMode};
use cloudmap::ledger::{allocation_report, state_from_allocations};
use cloudmap::replication::{prob_data_loss, LossMethod, BASE_COEFFS};
use cloudmap::{step_general, step_two_user, ModelParams, SystemState};

use crate::args::DiscrepancyArgs;
use crate::output::{CliError, Document, Table};

/// Published loss probabilities at p = 0.01.
pub const TABLE3: [(usize, f64); 7] = [
    (10, 0.12120e-4),
    (20, 0.22220e-4),
    (40, 0.42419e-4),
    (80, 0.82817e-4),
    (100, 1.0301e-4),
    (140, 1.4341e-4),
    (200, 2.04e-4),
];

/// Published allocations in bytes: (stage, owner, user 1, user 2).
pub const TABLE1: [(u64, f64, f64, f64); 5] = [
    (1, 480e6, 12.29e6, 13e6),
    (10, 369e6, 103e6, 102.76e6),
    (20, 3.5e9, 1.16e9, 1.169e9),
    (200, 10.45e9, 1.73e9, 5.03e9),
    (365, 7.07e9, 4.02e9, 123.5e6),
];

pub const TABLE3_TOLERANCE: f64 = 0.25;

#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub id: String,
    pub claim: String,
    pub published: String,
    pub computed: String,
    pub verdict: String,
}

fn finding(id: &str, claim: &str, published: impl ToString, computed: impl ToString, verdict: &str) -> Finding {
    Finding {
        id: id.into(),
        claim: claim.into(),
        published: published.to_string(),
        computed: computed.to_string(),
        verdict: verdict.into(),
    }
}

fn verdict(ok: bool, yes: &'static str, no: &'static str) -> &'static str {
    if ok {
        yes
    } else {
        no
    }
}

fn fixed_points(out: &mut Vec<Finding>) -> Result<(), CliError> {
    let p = ModelParams::two_user(0.6, 1.25, 1.28)?;
    let origin = residual(&p, [0.0; 3])?;
    out.push(finding(
        "origin-fixed-point",
        "the origin is a fixed point",
        "fixed",
        format!("residual {origin:e}"),
        verdict(origin < 1e-12, "confirmed", "refuted"),
    ));
    let claimed = claimed_fixed_point(&p)?;
    let r = residual(&p, claimed)?;
    out.push(finding(
        "claimed-fixed-point",
        "(1, -a/2xi1, a/2xi2) is a fixed point at a=0.6 xi1=1.25 xi2=1.28",
        "fixed",
        format!("residual {r}"),
        verdict(r < 1e-9, "confirmed", "refuted"),
    ));
    Ok(())
}

fn routh(out: &mut Vec<Finding>) -> Result<(), CliError> {
    let mut total = 0usize;
    let mut stable = 0usize;
    let mut window = 0usize;
    let mut both_positive = 0usize;
    for ia in 1..=50 {
        for i1 in 0..=40 {
            for i2 in 0..=40 {
                let p = ModelParams::two_user(ia as f64 / 50.0, i1 as f64 / 20.0, i2 as f64 / 20.0)?;
                let c = characteristic_coeffs(&p)?;
                total += 1;
                stable += usize::from(routh_classify(c) == RouthVerdict::Stable);
                window += usize::from(published_stability_window(&p)?);
                both_positive += usize::from(c.p > 0.0 && c.q > 0.0);
            }
        }
    }
    out.push(finding(
        "routh-region",
        "Routh conditions give stability for 0 < a < xi2 - xi1 <= 1",
        format!("window non-empty ({window} of {total} grid points inside)"),
        format!("{stable} Routh-stable points; P>0 and Q>0 together at {both_positive} points"),
        verdict(stable > 0, "consistent", "refuted"),
    ));
    Ok(())
}

fn hopf(out: &mut Vec<Finding>) -> Result<(), CliError> {
    let mut hits = 0usize;
    let mut total = 0usize;
    for i1 in 1..=100 {
        for i2 in 1..=100 {
            if i1 == i2 {
                continue;
            }
            total += 1;
            let a = hopf_alpha(i1 as f64 / 50.0, i2 as f64 / 50.0)?;
            hits += usize::from(a > 0.0 && a <= 1.0);
        }
    }
    let example = hopf_alpha(0.51, 0.01)?;
    out.push(finding(
        "hopf-alpha",
        "the Hopf condition forces |a| > 1, so no Hopf bifurcation for 0 < a <= 1",
        "|a| > 1",
        format!("{hits} of {total} (xi1, xi2) grid points give a in (0, 1]; xi1=0.51 xi2=0.01 gives a={example:.6}"),
        verdict(hits == 0, "confirmed", "refuted"),
    ));
    Ok(())
}

fn general_vs_two_user(out: &mut Vec<Finding>) -> Result<(), CliError> {
    let mut checked = 0usize;
    let mut agree = 0usize;
    for (alpha, xi1, xi2) in [(0.6, 1.28, 1.23), (0.96, 0.2, 1.18), (0.9, 1.4, 0.8), (0.5, 1.0, 1.0)] {
        let p = ModelParams::two_user(alpha, xi1, xi2)?;
        for k in 0..25 {
            let t = k as f64;
            let s = SystemState::new((0.7 * t).sin(), vec![(1.3 * t).cos() * 0.5, (0.4 * t).sin() - 0.2]);
            let a = step_general(&p, &s)?;
            let b = step_two_user(&p, &s)?;
            checked += 1;
            agree += usize::from(
                a.v.to_bits() == b.v.to_bits() && a.x.iter().zip(&b.x).all(|(x, y)| x.to_bits() == y.to_bits()),
            );
        }
    }
    out.push(finding(
        "general-vs-two-user",
        "the n-user map with (-1)^i signs reduces to the two-user map",
        "same map",
        format!("{agree} of {checked} states agree bit for bit"),
        verdict(agree == checked, "consistent", "inconsistent"),
    ));
    Ok(())
}

fn lyapunov(out: &mut Vec<Finding>, iters: usize) -> Result<(), CliError> {
    let s0 = SystemState::new(0.01, vec![0.01, -0.01]);
    let cases: [(&str, &str, (f64, f64, f64), fn(&[f64; 3]) -> bool); 3] = [
        ("lyapunov-negative", "a=0.96 xi1=0.2 xi2=1.18: all exponents negative", (0.96, 0.2, 1.18), |e| {
            e.iter().all(|&x| x < 0.0)
        }),
        ("lyapunov-zero", "a=0.9 xi1=1.4 xi2=0.8: largest exponent zero (torus)", (0.9, 1.4, 0.8), |e| {
            e[0].abs() <= 0.01
        }),
        ("lyapunov-positive", "a=0.6 xi1=1.28 xi2=1.23: positive exponent (chaos)", (0.6, 1.28, 1.23), |e| {
            e[0] > 0.01
        }),
    ];
    for (id, claim, (a, x1, x2), check) in cases {
        let spec = lyapunov_spectrum(&ModelParams::two_user(a, x1, x2)?, &s0, iters)?;
        let e = spec.exponents;
        out.push(finding(
            id,
            claim,
            "qualitative",
            format!("({:.6}, {:.6}, {:.6})", e[0], e[1], e[2]),
            verdict(check(&e), "reproduced", "not reproduced"),
        ));
    }
    Ok(())
}

fn alpha_sweep(out: &mut Vec<Finding>) -> Result<(), CliError> {
    let base = ModelParams::two_user(0.5, 1.28, 1.23)?;
    let sweep = Sweep { parameter: SweepParameter::Alpha, lo: 0.01, hi: 1.0, points: 100 };
    let scan = bifurcation_scan(
        &base,
        sweep,
        &SystemState::new(0.01, vec![0.01, -0.01]),
        ScanSettings::default(),
    )?;
    let bounded: Vec<(f64, f64)> = scan
        .samples
        .iter()
        .filter_map(|s| s.largest_exponent.map(|l| (s.value, l)))
        .collect();
    let last_chaotic = bounded.iter().filter(|(_, l)| *l > 0.01).map(|(a, _)| *a).reduce(f64::max);
    let tail_ordered = bounded.iter().filter(|(a, _)| *a > 0.9).all(|(_, l)| *l <= 0.01);
    out.push(finding(
        "alpha-sweep",
        "sweeping a at xi1=1.28 xi2=1.23 goes from chaos to order as a grows",
        "chaos to order",
        format!(
            "{} of 100 points bounded; last a with exponent > 0.01: {}",
            bounded.len(),
            last_chaotic.map_or("none".into(), |a| format!("{a:.4}"))
        ),
        verdict(last_chaotic.is_some_and(|a| a < 0.9) && tail_ordered, "reproduced", "not reproduced"),
    ));
    Ok(())
}

fn table1(out: &mut Vec<Finding>) -> Result<(), CliError> {
    let p = ModelParams::two_user(0.6, 1.25, 1.28)?;
    let s0 = state_from_allocations(&p, 1e9, 1e8, 1e9);
    let stages: Vec<u64> = TABLE1.iter().map(|r| r.0).collect();
    let records = allocation_report(&p, &s0, &stages, 1e9)?;
    for (rec, (l, owner, u1, u2)) in records.iter().zip(TABLE1) {
        let computed = [rec.owner_alloc, rec.user_alloc[0].signed(), rec.user_alloc[1].signed()];
        let published = [owner, u1, u2];
        let close = computed.iter().zip(published).all(|(c, p)| (c.abs() - p).abs() <= 0.05 * p);
        out.push(finding(
            &format!("table1-l{l}"),
            &format!("allocations (owner, user 1, user 2) at stage {l} from 1 Gb / 0.1 Gb"),
            format!("{owner:e} {u1:e} {u2:e} B"),
            format!("{:.4e} {:.4e} {:.4e} B", computed[0], computed[1], computed[2]),
            verdict(close, "reproduced", "not reproduced"),
        ));
    }
    Ok(())
}

fn coefficients(out: &mut Vec<Finding>) {
    let counts = verify_coefficients();
    let ok = counts[..6] == BASE_COEFFS && counts[6..] == [0, 0];
    out.push(finding(
        "coefficients",
        "survival coefficients a0..a5 = 1, 7, 21, 34, 30, 12",
        format!("{BASE_COEFFS:?}"),
        format!("{counts:?} (non-fatal subsets by size, all four owner or all three user machines fatal)"),
        verdict(ok, "confirmed", "refuted"),
    ));
}

fn table3(out: &mut Vec<Finding>) -> Result<(), CliError> {
    for (n, published) in TABLE3 {
        let exact = prob_data_loss(n, 0.01, LossMethod::ExactBigint)?.p_loss;
        let ratio = exact / published;
        out.push(finding(
            &format!("table3-n{n}"),
            &format!("loss probability for n={n}, p=0.01"),
            format!("{published:e}"),
            format!("{exact:.6e} (ratio {ratio:.4})"),
            verdict((ratio - 1.0).abs() <= TABLE3_TOLERANCE, "within 25%", "outside 25%"),
        ));
    }
    Ok(())
}

fn placement_modes(out: &mut Vec<Finding>, trials: u64, seed: u64) -> Result<(), CliError> {
    let p = 0.1;
    let group = exhaustive_loss_probability(3, p, LossMode::Group)?;
    let structural = exhaustive_loss_probability(3, p, LossMode::Structural)?;
    out.push(finding(
        "structural-n3",
        "group model describes the cyclic placement (n=3, p=0.1, exhaustive)",
        format!("{group:.6e} (group model)"),
        format!("{structural:.6e} (structural)"),
        verdict((group - structural).abs() <= 1e-12 * group, "consistent", "differs"),
    ));
    let g = mc_estimate(10, p, trials, seed, LossMode::Group)?;
    let s = mc_estimate(10, p, trials, seed, LossMode::Structural)?;
    out.push(finding(
        "structural-n10",
        "group model describes the cyclic placement (n=10, p=0.1, Monte Carlo)",
        format!("{:.6e} +/- {:.1e} (group model)", g.p_hat, g.half_width_95),
        format!("{:.6e} +/- {:.1e} (structural)", s.p_hat, s.half_width_95),
        verdict(
            (g.p_hat - s.p_hat).abs() <= 3.0 * (g.half_width_95 + s.half_width_95),
            "consistent",
            "differs",
        ),
    ));
    Ok(())
}

pub fn collect(a: &DiscrepancyArgs) -> Result<Vec<Finding>, CliError> {
    let mut out = Vec::new();
    fixed_points(&mut out)?;
    routh(&mut out)?;
    hopf(&mut out)?;
    general_vs_two_user(&mut out)?;
    lyapunov(&mut out, a.lyap_iters)?;
    alpha_sweep(&mut out)?;
    table1(&mut out)?;
    coefficients(&mut out);
    table3(&mut out)?;
    placement_modes(&mut out, a.trials, a.seed)?;
    Ok(out)
}

pub fn discrepancy_cmd(a: &DiscrepancyArgs) -> Result<Document, CliError> {
    let findings = collect(a)?;
    let mut table = Table::new(&["id", "claim", "published", "computed", "verdict"]);
    for f in &findings {
        table.push(vec![f.id.clone(), f.claim.clone(), f.published.clone(), f.computed.clone(), f.verdict.clone()]);
    }
    Ok(Document {
        json: json!({ "findings": findings }),
        table: Some(table),
    })
}
