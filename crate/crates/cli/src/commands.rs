//! One runner per subcommand. Each returns the CSV body and the JSON body; the
//! caller adds the version, command and seed.

use std::fmt::Write as _;

use planar_gravity::acceptance::{self, Level, Options};
use planar_gravity::boundary::{self, GrowthConfig, GrowthMode};
use planar_gravity::enumeration::{self, fit_growth_big, fit_growth_ln, ln_rational, FitConfig};
use planar_gravity::gf;
use planar_gravity::internal::{self, Firing, InternalConfig};
use planar_gravity::nonlinear::{self, ProcessParams};
use planar_gravity::one_dim::{self, QueueConfig};
use planar_gravity::stats::{total_variation, Estimate};
use planar_gravity::trees::{self, BulkSelector};
use serde_json::{json, Value};

use crate::config::Params;
use crate::CliError;

pub struct Artifact {
    pub csv: String,
    pub body: Value,
    /// Set by `reproduce`: false when a criterion failed.
    pub pass: Option<bool>,
}

/// A fitted quantity with its 95% interval, serialized the same way everywhere.
fn fit(value: f64, half_width: f64) -> Value {
    json!({ "value": value, "ci_low": value - half_width, "ci_high": value + half_width })
}

fn est(e: &Estimate) -> Value {
    fit(e.value, e.half_width)
}

/// `quantity,value,ci_low,ci_high` rows from a JSON object of fits.
fn fits_csv(fits: &Value) -> String {
    let mut s = String::from("quantity,value,ci_low,ci_high\n");
    if let Some(map) = fits.as_object() {
        for (k, v) in map {
            let f = |key: &str| v.get(key).map(|x| x.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{k},{},{},{}", f("value"), f("ci_low"), f("ci_high"));
        }
    }
    s
}

fn exact(value: f64) -> Value {
    fit(value, 0.0)
}

pub const ENUMERATE_KEYS: &[(&str, &str)] = &[("nmax", "20"), ("mmax", ""), ("source", "recurrence"), ("cell_cap", "10000000")];

pub fn enumerate(p: &Params) -> Result<Artifact, CliError> {
    let n_max: usize = p.get("nmax")?;
    let m_max: usize = if p.raw("mmax").is_empty() { n_max + 2 } else { p.get("mmax")? };
    let table = match p.raw("source") {
        "recurrence" => enumeration::tutte_table_capped(n_max, m_max, p.get("cell_cap")?)?,
        "brute" => enumeration::brute_force_counts(n_max)?.window(n_max, m_max),
        s => return Err(CliError::Usage(format!("source must be recurrence or brute, got {s:?}"))),
    };
    let mut fits = serde_json::Map::new();
    let column: Vec<_> = table.column(2);
    if let Ok(f) = fit_growth_big(&column, &FitConfig::default()) {
        fits.insert("growth_constant".into(), fit(f.growth_constant, 1.96 * f.growth_stderr));
        fits.insert("exponent".into(), fit(f.exponent, 1.96 * f.exponent_stderr));
    }
    let bounds = enumeration::exponential_bounds(&table);
    let rows: Vec<Value> =
        table.nonzero().into_iter().map(|(n, m, c)| json!({ "N": n, "m": m, "count": c.to_string() })).collect();
    Ok(Artifact {
        csv: table.to_csv(),
        body: json!({
            "counts": rows,
            "exponential_bounds": { "gamma_low": bounds.gamma_low, "gamma_high": bounds.gamma_high },
            "fits": fits,
        }),
        pass: None,
    })
}

pub const GF_KEYS: &[(&str, &str)] = &[("beta", "1"), ("order", "50"), ("residuals", "true")];

pub fn gf(p: &Params) -> Result<Artifact, CliError> {
    let beta = gf::parse_rational(p.raw("beta"))?;
    let order: usize = p.get("order")?;
    let s = gf::s_series(&beta, order)?;
    let crit = gf::critical_data(&beta)?;
    let residuals = if p.get::<bool>("residuals")? { Some(gf::functional_residuals(&beta, order)?) } else { None };
    let mut fits = serde_json::Map::new();
    fits.insert("x1".into(), exact(crit.x1));
    let pts: Vec<(usize, f64)> = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| (n, ln_rational(c)))
        .filter(|(_, l)| l.is_finite())
        .collect();
    if let Ok(f) = fit_growth_ln(&pts, &FitConfig::default()) {
        fits.insert("growth_constant".into(), fit(f.growth_constant, 1.96 * f.growth_stderr));
        fits.insert("exponent".into(), fit(f.exponent, 1.96 * f.exponent_stderr));
    }
    let coeffs: Vec<String> = s.coeffs.iter().map(|c| c.to_string()).collect();
    Ok(Artifact {
        csv: s.to_csv(),
        body: json!({
            "critical": crit,
            "residuals": residuals,
            "residuals_zero": residuals.as_ref().map(|r| r.all_zero()),
            "s_coefficients": coeffs,
            "fits": fits,
        }),
        pass: None,
    })
}

pub const BOUNDARY_KEYS: &[(&str, &str)] = &[
    ("lambda1", "1"),
    ("lambda2", "2"),
    ("mu", "0"),
    ("events", "100000"),
    ("mode", "full"),
    ("replicas", "1"),
    ("tail_n", "200"),
];

pub fn boundary(p: &Params, seed: u64) -> Result<Artifact, CliError> {
    let (l1, l2): (f64, f64) = (p.get("lambda1")?, p.get("lambda2")?);
    let mut cfg = GrowthConfig::new(l1, l2, p.get("events")?, seed);
    cfg.mu = p.get("mu")?;
    cfg.mode = match p.raw("mode") {
        "full" => GrowthMode::FullMap,
        "boundary" => GrowthMode::BoundaryOnly,
        m => return Err(CliError::Usage(format!("mode must be full or boundary, got {m:?}"))),
    };
    let replicas: usize = p.get("replicas")?;
    let stats = boundary::simulate_replicas(&cfg, replicas.max(1))?;
    let occ = stats.occupation_law();
    let mut fits = serde_json::Map::new();
    let mut csv = String::from("m,simulated,stationary\n");
    let mut stationary = Value::Null;
    if l1 < l2 && cfg.mu == 0.0 {
        let law = boundary::stationary_boundary_law(l1, l2, occ.len().max(64) + 64)?;
        let by_m = law.by_m();
        fits.insert("tv_to_stationary".into(), exact(total_variation(&occ, &by_m)));
        for m in 3..occ.len().max(by_m.len()) {
            let _ = writeln!(csv, "{m},{},{}", occ.get(m).copied().unwrap_or(0.0), by_m.get(m).copied().unwrap_or(0.0));
        }
        stationary = json!(law);
    } else {
        for (m, v) in occ.iter().enumerate().skip(3) {
            let _ = writeln!(csv, "{m},{v},");
        }
    }
    let tail_n: usize = p.get("tail_n")?;
    let rt = boundary::return_time_distribution(l1, l2, tail_n)?;
    if tail_n >= 2 {
        fits.insert("return_time_tail_ratio".into(), exact(rt[tail_n] / rt[tail_n - 1]));
    }
    Ok(Artifact {
        csv,
        body: json!({
            "events": stats.events,
            "time": stats.time,
            "final_counts": stats.final_counts,
            "euler_violations": stats.euler_violations,
            "occupation": occ,
            "stationary": stationary,
            "fits": fits,
        }),
        pass: None,
    })
}

pub const NONLINEAR_KEYS: &[(&str, &str)] = &[
    ("r1", "0.2"),
    ("r2", "0.2"),
    ("nmax", "20"),
    ("tol", "1e-12"),
    ("max_iter", "10000"),
    ("replicas", "1000"),
];

pub fn nonlinear(p: &Params, seed: u64) -> Result<Artifact, CliError> {
    let pp = ProcessParams::new(p.get("r1")?, p.get("r2")?)?;
    let n_max: usize = p.get("nmax")?;
    let fp = nonlinear::fixed_point(&pp, p.get("tol")?, n_max, n_max + 2, p.get("max_iter")?)?;
    let contraction = nonlinear::contraction_estimate(&pp, p.get("replicas")?, seed);
    let mut csv = String::from("N,m,value\n");
    for n in 0..=n_max {
        for m in 2..=n_max + 2 {
            let v = fp.grid.get(n, m);
            if v != 0.0 {
                let _ = writeln!(csv, "{n},{m},{v:e}");
            }
        }
    }
    let mut fits = serde_json::Map::new();
    fits.insert("q_0_2".into(), exact(fp.grid.get(0, 2)));
    fits.insert("total_mass".into(), exact(fp.grid.total()));
    if let Ok(d) = nonlinear::scaling_deviation(&fp.grid, &pp, n_max) {
        fits.insert("scaling_deviation".into(), exact(d));
    }
    fits.insert("contraction_factor".into(), fit(contraction.mean_factor, 0.0));
    Ok(Artifact {
        csv,
        body: json!({
            "params": pp,
            "beta": pp.beta(),
            "iterations": fp.iterations,
            "last_change": fp.last_change,
            "residual": fp.residual,
            "contraction": contraction,
            "fits": fits,
        }),
        pass: None,
    })
}

pub const TREES_KEYS: &[(&str, &str)] = &[("n", "41"), ("m", "3"), ("replicas", "100"), ("distances", "2,4,8")];

pub fn trees(p: &Params, seed: u64) -> Result<Artifact, CliError> {
    let (n, m, count): (usize, usize, usize) = (p.get("n")?, p.get("m")?, p.get("replicas")?);
    let distances: Vec<usize> = p
        .raw("distances")
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|e| CliError::Usage(format!("bad distance {s:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    let batch = trees::sample_uniform_batch(n, m, count, seed)?;
    let mut csv = String::from("index,tree,code\n");
    for (i, t) in batch.iter().enumerate() {
        let code = trees::decode(t)?.canonical_code();
        let _ = writeln!(csv, "{i},{t},{code}");
    }
    let report = trees::degree_statistics(&batch, &BulkSelector::default(), &distances)?;
    let mut fits = serde_json::Map::new();
    if let Some(t) = &report.tail {
        fits.insert("tail_rate".into(), json!({ "value": t.rate, "ci_low": t.ci_low, "ci_high": t.ci_high }));
    }
    for c in &report.covariances {
        fits.insert(format!("covariance_{}", c.distance), est(&c.value));
    }
    let p_k: Vec<Value> = report.p.iter().map(est).collect();
    Ok(Artifact {
        csv,
        body: json!({
            "trees": report.trees,
            "samples": report.samples,
            "p": p_k,
            "total": report.total,
            "fits": fits,
        }),
        pass: None,
    })
}

pub const INTERNAL_KEYS: &[(&str, &str)] = &[
    ("lambda", "1"),
    ("mu", "2"),
    ("horizon", "1000"),
    ("replicas", "100"),
    ("threshold", "100"),
    ("firing", "local"),
];

pub fn internal(p: &Params, seed: u64) -> Result<Artifact, CliError> {
    let mut cfg = InternalConfig::new(p.get("lambda")?, p.get("mu")?, p.get("horizon")?, seed);
    cfg.firing = match p.raw("firing") {
        "local" => Firing::Local,
        "global" => Firing::Global,
        f => return Err(CliError::Usage(format!("firing must be local or global, got {f:?}"))),
    };
    let r = internal::dichotomy(&cfg, p.get("replicas")?, p.get("threshold")?)?;
    let mut fits = serde_json::Map::new();
    fits.insert("disappeared_fraction".into(), est(&r.disappeared_fraction));
    fits.insert("exceeded_fraction".into(), est(&r.exceeded_fraction));
    fits.insert("mean_increment".into(), est(&r.mean_increment));
    fits.insert("mean_final_degree".into(), exact(r.mean_final_degree));
    let fits = Value::Object(fits);
    Ok(Artifact { csv: fits_csv(&fits), body: json!({ "report": r, "fits": fits }), pass: None })
}

pub const ONEDIM_KEYS: &[(&str, &str)] = &[
    ("d", "2"),
    ("gap", "0.1"),
    ("lambda", "1"),
    ("nu", "2"),
    ("horizon", "100000"),
    ("t", "1000"),
    ("replicas", "1000"),
];

pub fn onedim(p: &Params, seed: u64) -> Result<Artifact, CliError> {
    let d: usize = p.get("d")?;
    let gap: f64 = p.get("gap")?;
    let mc = one_dim::mu_critical(d);
    let chi = one_dim::susceptibility(mc + gap, mc)?;
    let (slope, slope_se) = one_dim::gamma_slope(1e-3, 1e-1, 41)?;
    let (lambda, nu): (f64, f64) = (p.get("lambda")?, p.get("nu")?);
    let q = one_dim::lifo_queue_sim(&QueueConfig { lambda, nu, d, horizon: p.get("horizon")?, seed }, 0)?;
    let clt = one_dim::critical_queue_clt(lambda, d, p.get("t")?, p.get("replicas")?, seed)?;
    let mut fits = serde_json::Map::new();
    fits.insert("mu_critical".into(), exact(mc));
    fits.insert("susceptibility".into(), exact(chi));
    fits.insert("gamma_slope".into(), fit(slope, 1.96 * slope_se));
    if let Some(r) = &q.decay_rate {
        fits.insert("queue_decay_rate".into(), est(r));
    }
    fits.insert("predicted_decay_rate".into(), exact((nu / lambda).ln()));
    fits.insert("critical_ks_half_normal".into(), exact(clt.ks_half_normal));
    fits.insert("critical_scale".into(), exact(clt.scale));
    let fits = Value::Object(fits);
    Ok(Artifact {
        csv: fits_csv(&fits),
        body: json!({ "queue_final_length": q.final_length, "queue_events": q.events, "critical": clt, "fits": fits }),
        pass: None,
    })
}

pub const REPRODUCE_KEYS: &[(&str, &str)] = &[("level", "fast"), ("criteria", "all"), ("fixture", "")];

pub fn reproduce(p: &Params) -> Result<Artifact, CliError> {
    let level: Level = p.get("level")?;
    let ids: Vec<usize> = match p.raw("criteria") {
        "all" => (1..=15).collect(),
        list => list
            .split(',')
            .map(|s| match s.trim().trim_start_matches(['C', 'c']).parse::<usize>() {
                Ok(id) if (1..=15).contains(&id) => Ok(id),
                _ => Err(CliError::Usage(format!("criteria are 1..=15, got {s:?}"))),
            })
            .collect::<Result<_, _>>()?,
    };
    let mut opts = Options::new(level);
    let fixture = p.raw("fixture");
    if !fixture.is_empty() {
        let text = std::fs::read_to_string(fixture).map_err(|e| CliError::Io(format!("{fixture}: {e}")))?;
        opts.counts_fixture = Some(text);
    }
    let mut csv = String::from("criterion,title,pass,detail\n");
    let mut results = Vec::new();
    let mut all = true;
    for id in ids {
        let r = acceptance::run_criterion(id, &opts);
        eprintln!("{}", r.line());
        all &= r.pass;
        let detail: Vec<String> = r.checks.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        let _ = writeln!(csv, "C{:02},{},{},\"{}\"", r.id, r.title, if r.pass { "PASS" } else { "FAIL" }, detail.join("; ").replace('"', "'"));
        results.push(json!({ "id": format!("C{:02}", r.id), "title": r.title, "pass": r.pass, "checks": r.checks }));
    }
    Ok(Artifact { csv, body: json!({ "level": level, "all_pass": all, "criteria": results }), pass: Some(all) })
}
