use gluing_orbit::classify::{classify, ClassifyConfig};
use gluing_orbit::entropy::{dichotomy_construction, entropy_estimate, periodic_counts, sft_entropy_oracle};
use gluing_orbit::gluing::{
    decide_gluing_sft, gluing_profile_with_bases, specification_bound, specification_profile_sft, substitution_profile,
};
use gluing_orbit::shadowing::{find_gap_and_shadow, CandidatePool, find_shadow_sft, schedule, verify_shadow, OrbitSequence};
use gluing_orbit::systems::{PointSpec, SystemKind};
use gluing_orbit::{Distance, Error, Point};
use serde_json::{json, Value};

use crate::job::{Command, Invalid, Job};

/// Everything a command produces.
pub struct Artifacts {
    pub report: Value,
    /// `(file name, csv)` pairs written under `tables/`.
    pub tables: Vec<(String, String)>,
    /// Cross-check failures; fatal under `--ci`.
    pub failures: Vec<String>,
}

pub enum Failure {
    Invalid(Invalid),
    Internal(String),
}

impl From<Invalid> for Failure {
    fn from(e: Invalid) -> Self {
        Failure::Invalid(e)
    }
}

fn lib(field: &str) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::Invalid(Invalid::new(field, e.to_string()))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<Value, Failure> {
    serde_json::to_value(value).map_err(|e| Failure::Internal(format!("serializing the report: {e}")))
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

const DEFAULT_EPS: Distance = Distance::pow2(1);

pub fn run(job: &Job) -> Result<Artifacts, Failure> {
    match job.config.command {
        Command::Classify => run_classify(job),
        Command::Entropy => run_entropy(job),
        Command::Gluing => run_gluing(job),
        Command::Dichotomy => run_dichotomy(job),
        Command::Shadow => run_shadow(job),
        Command::Periodic => run_periodic(job),
    }
}

fn run_classify(job: &Job) -> Result<Artifacts, Failure> {
    let p = &job.config.params;
    let d = ClassifyConfig::default();
    let config = ClassifyConfig {
        eps: p.eps.unwrap_or(d.eps),
        eps_list: p.eps_list.clone().unwrap_or(d.eps_list),
        n_max: p.n_max.unwrap_or(d.n_max),
        horizon: p.horizon.unwrap_or(d.horizon),
        max_length: p.max_length,
        max_rank: p.max_rank.unwrap_or(d.max_rank),
        m_max: p.m_max.unwrap_or(d.m_max),
        periodic_n_max: p.periodic_n_max.unwrap_or(d.periodic_n_max),
        dichotomy_n: p.n.unwrap_or(d.dichotomy_n),
        language_cap: p.language_cap.unwrap_or(d.language_cap),
        birkhoff_samples: p.birkhoff_samples.unwrap_or(d.birkhoff_samples),
        birkhoff_n: p.birkhoff_n.unwrap_or(d.birkhoff_n),
        seed: job.config.seed,
        pool: match p.pool {
            Some(_) => Some(job.pool()?),
            None => None,
        },
        bases: job.bases()?,
    };
    let report = classify(&job.system, &config);
    let failures = report.failures().iter().map(|c| format!("{}: {}", c.id, c.details)).collect();
    let checks = csv_table(
        &["id", "status", "details"],
        report.checks.iter().map(|c| vec![c.id.to_string(), c.status.to_string(), c.details.clone()]),
    );
    let scales = csv_table(
        &["eps", "m_required", "exact"],
        report.gluing_scales.iter().map(|s| vec![s.eps.to_string(), s.m_required.to_string(), s.exact.to_string()]),
    );
    let covering = csv_table(
        &["eps", "covering_time"],
        report.covering_times.iter().map(|(e, n)| vec![e.to_string(), n.to_string()]),
    );
    Ok(Artifacts {
        report: json!({ "classification": to_json(&report)?, "table": report.table() }),
        tables: vec![
            ("checks.csv".into(), checks),
            ("gluing_scales.csv".into(), scales),
            ("covering_times.csv".into(), covering),
        ],
        failures,
    })
}

fn run_entropy(job: &Job) -> Result<Artifacts, Failure> {
    let p = &job.config.params;
    let eps = p.eps_list.clone().unwrap_or_else(|| vec![p.eps.unwrap_or(DEFAULT_EPS)]);
    let rep = entropy_estimate(&job.system, &eps, p.n_max.unwrap_or(12)).map_err(lib("params"))?;
    let mut failures = Vec::new();
    for r in &rep.rows {
        let next_n = rep.s(r.n + 1, r.eps);
        if next_n.is_some_and(|s| s < r.s) {
            failures.push(format!("s({}, {}) decreases in n", r.n, r.eps));
        }
        if let Some(finer) = eps.iter().find(|e| **e < r.eps).and_then(|e| rep.s(r.n, *e)) {
            if finer < r.s {
                failures.push(format!("s({}, {}) exceeds the value at a smaller eps", r.n, r.eps));
            }
        }
    }
    Ok(Artifacts { report: to_json(&rep)?, tables: vec![("entropy.csv".into(), rep.csv())], failures })
}

fn run_periodic(job: &Job) -> Result<Artifacts, Failure> {
    let rep = periodic_counts(&job.system, job.config.params.n_max.unwrap_or(12)).map_err(lib("params"))?;
    let failures = if rep.traces_agree { Vec::new() } else { vec!["cycle counts disagree with tr(A^n)".into()] };
    Ok(Artifacts { report: to_json(&rep)?, tables: vec![("periodic.csv".into(), rep.csv())], failures })
}

fn run_gluing(job: &Job) -> Result<Artifacts, Failure> {
    let p = &job.config.params;
    let eps = p.eps.unwrap_or(DEFAULT_EPS);
    let k = p.max_rank.unwrap_or(2);
    let m_max = p.m_max.unwrap_or(64);
    let mut report = serde_json::Map::new();
    let profile = match &job.system.kind {
        SystemKind::Sft(sft) => {
            let r = eps.shadow_radius().ok_or_else(|| Invalid::new("params.eps", "eps must be at most 1"))?;
            let l = p.max_length.unwrap_or(2 * r as usize + 3);
            let profile = decide_gluing_sft(&job.system, r, l, k).map_err(lib("params"))?;
            if p.specification.unwrap_or(false) {
                let bound = p.m_max.unwrap_or_else(|| specification_bound(sft, r));
                let spec = specification_profile_sft(&job.system, r, l, k, bound, p.slack.unwrap_or(4))
                    .map_err(lib("params"))?;
                report.insert("specification".into(), to_json(&spec)?);
            }
            profile
        }
        SystemKind::Grid(_) => {
            let pool = job.pool()?;
            let bases = job.bases()?;
            gluing_profile_with_bases(&job.system, eps, p.max_length.unwrap_or(4), k, &pool, bases.as_deref(), m_max)
                .map_err(lib("params"))?
        }
        SystemKind::Substitution(_) => {
            substitution_profile(&job.system, eps, p.max_length.unwrap_or(8), m_max).map_err(lib("params"))?
        }
    };
    let tables = vec![
        ("instances.csv".into(), profile.instances_csv()),
        ("per_length.csv".into(), profile.per_length_csv()),
    ];
    report.insert("profile".into(), to_json(&profile)?);
    Ok(Artifacts { report: Value::Object(report), tables, failures: Vec::new() })
}

fn run_dichotomy(job: &Job) -> Result<Artifacts, Failure> {
    let p = &job.config.params;
    let eps = p.eps.unwrap_or(DEFAULT_EPS);
    let pool = job.pool()?;
    let (x, y) = match (&p.x, &p.y) {
        (None, None) => match gluing_orbit::classify::stay_away_pair(&job.system, eps, &pool) {
            Ok(Some(pair)) => (pair.x, pair.y),
            // the construction still decides gluing first, so a negative
            // answer is reported from the first two pool points
            Ok(None) if pool.points.len() >= 2 => (pool.points[0].clone(), pool.points[1].clone()),
            Ok(None) => {
                return Ok(Artifacts {
                    report: json!({ "outcome": "no_stay_away_pair", "pool": pool.descriptor }),
                    tables: Vec::new(),
                    failures: Vec::new(),
                })
            }
            Err(e) => return Err(lib("params")(e)),
        },
        _ => (job.point("x", p.x.as_ref())?, job.point("y", p.y.as_ref())?),
    };
    let result = dichotomy_construction(
        &job.system,
        &x,
        &y,
        eps,
        p.n.unwrap_or(3),
        p.m_max.unwrap_or(64),
        &pool,
        p.require_stay_away.unwrap_or(true),
    );
    let d = match result {
        Ok(d) => d,
        // an expected negative result is still a successful run
        Err(e @ (Error::GluingFailed(_) | Error::StayAwayViolated(_))) => {
            let outcome = if matches!(e, Error::GluingFailed(_)) { "gluing_failed" } else { "stay_away_violated" };
            return Ok(Artifacts {
                report: json!({ "outcome": outcome, "message": e.to_string(), "x": to_json(&x)?, "y": to_json(&y)? }),
                tables: Vec::new(),
                failures: Vec::new(),
            });
        }
        Err(e) => return Err(lib("params")(e)),
    };
    let mut failures = Vec::new();
    if !d.separated {
        failures.push(format!("witnesses {:?} are not separated", d.unseparated_pair));
    }
    if let Some(sft) = job.system.as_sft() {
        let hi = sft_entropy_oracle(sft).hi;
        if d.bound > hi + 1e-9 {
            failures.push(format!("bound {} exceeds the entropy oracle {hi}", d.bound));
        }
    }
    let rows = d.witnesses.points.iter().zip(&d.gaps).enumerate().map(|(i, (z, g))| {
        let word: String = (0..d.n).map(|k| if i >> (d.n - 1 - k) & 1 == 0 { 'x' } else { 'y' }).collect();
        vec![i.to_string(), word, format!("{g:?}"), z.to_string()]
    });
    let table = csv_table(&["index", "word", "gap", "witness"], rows);
    Ok(Artifacts {
        report: json!({ "outcome": "constructed", "dichotomy": to_json(&d)? }),
        tables: vec![("witnesses.csv".into(), table)],
        failures,
    })
}

fn run_shadow(job: &Job) -> Result<Artifacts, Failure> {
    let p = &job.config.params;
    let eps = p.eps.unwrap_or(DEFAULT_EPS);
    let segs = p.segments.as_ref().ok_or_else(|| Invalid::new("params.segments", "segments is required"))?;
    let mut pairs = Vec::with_capacity(segs.len());
    for (i, s) in segs.iter().enumerate() {
        let pt = s
            .point
            .resolve(&job.system)
            .map_err(|e| Invalid::new(format!("params.segments[{i}].point"), e.to_string()))?;
        pairs.push((pt, s.length));
    }
    let c = OrbitSequence::from_pairs(pairs).map_err(lib("params.segments"))?;
    let found: Option<(Vec<usize>, Point)> = match (&p.gap, &job.system.kind) {
        (Some(gap), SystemKind::Sft(sft)) => {
            let r = eps.shadow_radius().ok_or_else(|| Invalid::new("params.eps", "eps must be at most 1"))?;
            if Distance::pow2(r) != eps {
                return Err(Invalid::new("params.eps", "the exact search on a shift needs eps = 2^-r").into());
            }
            find_shadow_sft(sft, &c, gap, r)
                .map_err(lib("params"))?
                .into_witness()
                .map(|z| (gap.clone(), Point::Symbolic(z)))
        }
        (Some(gap), _) => {
            let pool = job.pool()?;
            let mut hit = None;
            for z in &pool.points {
                if verify_shadow(&job.system, &c, gap, z, eps).map_err(lib("params"))?.is_accepted() {
                    hit = Some((gap.clone(), z.clone()));
                    break;
                }
            }
            hit
        }
        (None, _) => {
            let pool = if job.system.as_sft().is_some() { CandidatePool::empty() } else { job.pool()? };
            find_gap_and_shadow(&job.system, &c, eps, p.m_max.unwrap_or(64), &pool).map_err(lib("params"))?
        }
    };
    let mut failures = Vec::new();
    let (report, rows) = match &found {
        Some((gap, z)) => {
            let verdict = verify_shadow(&job.system, &c, gap, z, eps).map_err(lib("params"))?;
            if !verdict.is_accepted() {
                failures.push(format!("witness rejected by verification: {verdict:?}"));
            }
            let s = schedule(&c, gap).map_err(lib("params.gap"))?;
            let rows: Vec<Vec<String>> = c
                .segments()
                .iter()
                .enumerate()
                .map(|(j, seg)| vec![(j + 1).to_string(), s[j].to_string(), seg.length.to_string(), seg.point.to_string()])
                .collect();
            let report = json!({
                "outcome": "shadowed",
                "epsilon": eps,
                "gap": gap,
                "schedule": s,
                "z": PointSpec::from_point(z),
                "verification": to_json(&verdict)?,
            });
            (report, rows)
        }
        None => (json!({ "outcome": "not_shadowed", "epsilon": eps, "gap": p.gap }), Vec::new()),
    };
    let table = csv_table(&["segment", "start", "length", "point"], rows);
    Ok(Artifacts { report, tables: vec![("schedule.csv".into(), table)], failures })
}
