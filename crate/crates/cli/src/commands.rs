use serde_json::json;

use cloudmap::dynamics::{
    bifurcation_scan, characteristic_coeffs, claimed_fixed_point, classify_attractor,
    find_fixed_points, hopf_alpha, lyapunov_spectrum, published_stability_window, routh_classify,
    stability_report, ScanSettings, Sweep, SweepParameter,
};
use cloudmap::failure_sim::{mc_estimate, verify_coefficients};
use cloudmap::ledger::{allocation_report, state_from_allocations};
use cloudmap::replication::{
    build_placement, closed_form_loss, loss_curve, prob_data_loss, LossMethod, BASE_COEFFS,
};
use cloudmap::{iterate, ModelParams, SystemState};

use crate::args::*;
use crate::output::{num, opt, CliError, Document, Table};

type Outcome = Result<Document, CliError>;

fn params(m: &MapArgs) -> Result<ModelParams, CliError> {
    Ok(ModelParams::two_user(m.alpha, m.xi1, m.xi2)?)
}

fn state(s: &StateArgs) -> SystemState {
    SystemState::new(s.v0, vec![s.x1, s.x2])
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("plain data serializes")
}

pub fn iterate_cmd(a: &IterateArgs) -> Outcome {
    let traj = iterate(&params(&a.map)?, &state(&a.state), a.steps, a.transient)?;
    let mut table = Table::new(&["l", "v", "x1", "x2"]);
    for s in &traj.states {
        table.push(vec![s.l.to_string(), num(s.v), num(s.x[0]), num(s.x[1])]);
    }
    Ok(Document {
        json: json!({ "states": to_json(&traj.states) }),
        table: Some(table),
    })
}

pub fn fixed_points_cmd(a: &FixedPointArgs) -> Outcome {
    let p = params(&a.map)?;
    let mut seeds = vec![[0.0; 3], claimed_fixed_point(&p)?];
    seeds.extend(a.seed_points.iter().copied());
    let found = find_fixed_points(&p, &seeds)?;

    let mut table = Table::new(&[
        "seed_v", "seed_x1", "seed_x2", "v", "x1", "x2", "residual", "converged", "spectral_radius", "modulus_verdict",
    ]);
    let mut reports = Vec::new();
    for fp in &found {
        let report = stability_report(&p, fp.point)?;
        let radius = report.eigenvalues.iter().map(|e| e.modulus()).fold(0.0, f64::max);
        table.push(vec![
            num(fp.seed[0]),
            num(fp.seed[1]),
            num(fp.seed[2]),
            num(fp.point[0]),
            num(fp.point[1]),
            num(fp.point[2]),
            num(fp.residual),
            fp.converged.to_string(),
            num(radius),
            to_json(&report.modulus_verdict).as_str().unwrap_or_default().to_string(),
        ]);
        reports.push(json!({ "fixed_point": to_json(fp), "stability": to_json(&report) }));
    }

    let coeffs = characteristic_coeffs(&p)?;
    let claimed = claimed_fixed_point(&p)?;
    Ok(Document {
        json: json!({
            "fixed_points": reports,
            "claimed_point": claimed,
            "claimed_point_residual": cloudmap::dynamics::residual(&p, claimed)?,
            "char_coeffs": to_json(&coeffs),
            "routh_verdict": to_json(&routh_classify(coeffs)),
            "published_window": published_stability_window(&p)?,
            "hopf_alpha": hopf_alpha(a.map.xi1, a.map.xi2).ok(),
        }),
        table: Some(table),
    })
}

pub fn lyapunov_cmd(a: &LyapunovArgs) -> Outcome {
    let spec = lyapunov_spectrum(&params(&a.map)?, &state(&a.state), a.iters)?;
    let kind = classify_attractor(&spec, a.zero_band)?;
    let mut table = Table::new(&["iteration", "lambda1", "lambda2", "lambda3"]);
    for h in &spec.history {
        table.push(vec![
            h.iteration.to_string(),
            num(h.exponents[0]),
            num(h.exponents[1]),
            num(h.exponents[2]),
        ]);
    }
    Ok(Document {
        json: json!({
            "exponents": spec.exponents,
            "sum": spec.sum(),
            "iterations": spec.iterations,
            "classification": to_json(&kind),
            "history": to_json(&spec.history),
        }),
        table: Some(table),
    })
}

pub fn bifurcate_cmd(a: &BifurcateArgs) -> Outcome {
    let need = |v: Option<f64>, name: &str, swept: bool| match (v, swept) {
        (_, true) => Ok(v.unwrap_or(1.0)),
        (Some(x), false) => Ok(x),
        (None, false) => Err(CliError::Usage(format!("--{name} is required unless it is swept"))),
    };
    let alpha = need(a.alpha, "alpha", a.param == SweepParameter::Alpha)?;
    let xi1 = need(a.xi1, "xi1", a.param == SweepParameter::Xi1)?;
    let xi2 = need(a.xi2, "xi2", a.param == SweepParameter::Xi2)?;
    let base = ModelParams { alpha, xi: vec![xi1, xi2], v_max: 1.0 };
    let sweep = Sweep { parameter: a.param, lo: a.lo, hi: a.hi, points: a.points };
    let settings = ScanSettings {
        transient: a.transient,
        samples: a.samples,
        lyapunov_iterations: a.lyap_iters,
    };
    let scan = bifurcation_scan(&base, sweep, &state(&a.state), settings)?;

    let mut table = Table::new(&["value", "largest_exponent", "divergent_at", "sample", "v"]);
    for s in &scan.samples {
        if s.v_samples.is_empty() {
            table.push(vec![num(s.value), opt(s.largest_exponent), opt(s.divergent_at), String::new(), String::new()]);
        }
        for (k, v) in s.v_samples.iter().enumerate() {
            table.push(vec![num(s.value), opt(s.largest_exponent), opt(s.divergent_at), k.to_string(), num(*v)]);
        }
    }
    Ok(Document { json: to_json(&scan), table: Some(table) })
}

pub fn storage_cmd(a: &StorageArgs) -> Outcome {
    let p = params(&a.map)?;
    if !(a.unit_scale > 0.0) {
        return Err(CliError::Usage("--unit-scale must be positive".into()));
    }
    let s0 = state_from_allocations(&p, a.owner_bytes, a.user_bytes, a.unit_scale);
    let records = allocation_report(&p, &s0, &a.stages, a.unit_scale)?;
    let mut table = Table::new(&[
        "l", "owner_alloc_bytes", "user1_alloc_bytes", "user1_sign", "user2_alloc_bytes", "user2_sign",
    ]);
    for r in &records {
        table.push(vec![
            r.l.to_string(),
            num(r.owner_alloc),
            num(r.user_alloc[0].magnitude),
            r.user_alloc[0].sign_char().to_string(),
            num(r.user_alloc[1].magnitude),
            r.user_alloc[1].sign_char().to_string(),
        ]);
    }
    Ok(Document {
        json: json!({ "initial_state": to_json(&s0), "records": to_json(&records) }),
        table: Some(table),
    })
}

pub fn placement_cmd(a: &PlacementArgs) -> Outcome {
    let plan = build_placement(a.nodes)?;
    let mut table = Table::new(&["kind", "index", "members", "machines"]);
    for b in plan.owner_blocks.iter().chain(&plan.user_blocks) {
        let members: Vec<String> = b.members.iter().map(ToString::to_string).collect();
        let machines: Vec<String> = b.machines.iter().map(ToString::to_string).collect();
        table.push(vec![b.rack.to_string(), b.index.to_string(), members.join(" "), machines.join(" ")]);
    }
    Ok(Document { json: to_json(&plan), table: Some(table) })
}

pub fn loss_exact_cmd(a: &LossExactArgs) -> Outcome {
    let mut result = prob_data_loss(a.nodes, a.p, a.method)?;
    if !a.terms {
        result.per_f_terms = None;
    }
    let exact = match a.method {
        LossMethod::ExactBigint => result.p_loss,
        _ => prob_data_loss(a.nodes, a.p, LossMethod::ExactBigint)?.p_loss,
    };
    Ok(Document {
        json: json!({
            "n": a.nodes,
            "machines": 7 * a.nodes,
            "p": a.p,
            "method": to_json(&result.method),
            "p_loss": result.p_loss,
            "p_loss_exact": exact,
            "p_loss_closed_form": closed_form_loss(a.nodes, a.p),
            "per_f_terms": result.per_f_terms,
        }),
        table: None,
    })
}

pub fn loss_curve_cmd(a: &LossCurveArgs) -> Outcome {
    let rows = loss_curve(&a.nodes, a.p)?;
    let mut table = Table::new(&["n", "p", "p_loss_exact", "p_loss_closed_form"]);
    for r in &rows {
        table.push(vec![r.n.to_string(), num(r.p), num(r.p_loss_exact), num(r.p_loss_closed_form)]);
    }
    Ok(Document { json: json!({ "rows": to_json(&rows) }), table: Some(table) })
}

pub fn loss_mc_cmd(a: &LossMcArgs) -> Outcome {
    let est = mc_estimate(a.nodes, a.p, a.trials, a.seed, a.mode)?;
    Ok(Document { json: to_json(&est), table: None })
}

pub fn verify_cmd() -> Outcome {
    let counts = verify_coefficients();
    let mut expected = [0u64; 8];
    expected[..BASE_COEFFS.len()].copy_from_slice(&BASE_COEFFS);
    let mut table = Table::new(&["size", "non_fatal", "coefficient"]);
    for (k, (c, e)) in counts.iter().zip(expected).enumerate() {
        table.push(vec![k.to_string(), c.to_string(), e.to_string()]);
    }
    Ok(Document {
        json: json!({ "non_fatal_by_size": counts, "coefficients": expected, "matches": counts == expected }),
        table: Some(table),
    })
}
