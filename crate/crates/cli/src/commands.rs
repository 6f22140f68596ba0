use crate::params::Params;
use crate::{BoundCmd, Cli, Command, Format, PqArgs, ProtoSource, ProtocolCmd, ScanCmd, SlackArgs, SmoothCmd, StructureCmd, TwoPartyArgs};
use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};
use skconverse::bounds::{
    bc_bound, bc_capacity_bound, cit_bound, cit_bound_best, ot_bounds, ot_capacity_bound, sc_necessary_check,
    secure_transmission_check, sk_capacity_formula, ComputeSlacks,
};
use skconverse::hyptest::{scan_csv, stein_scan, ScanRow, STEIN_HEADER};
use skconverse::prob::DistFile;
use skconverse::protosim::{
    check_bc_reduction, check_converse, check_ot_reduction, eval_sk_security, fuzz, ideal_ot_protocol, lemma1_test,
    measure_bc, measure_ot, reduce_bc_to_sk, reduce_ot_to_sk, FuzzConfig, OtVariant, ProtocolFile, Reduction,
};
use skconverse::smooth::{d_max_smooth, dmax_convergence_scan, h_min_smooth, DMAX_HEADER};
use skconverse::structure::{enum_partitions, mcf, mss, Labeling, MSS_TOL};
use skconverse::{beta_epsilon, JointDist, MassFunction, Partition, VERSION};
use std::path::{Path, PathBuf};

pub const CAPACITY_HEADER: &str = "n,cit_bound_over_n,capacity";
pub const THREADS_ENV: &str = "SKCONVERSE_THREADS";

/// Runs one command. `Ok(false)` marks a failed assertion (exit status 2).
pub fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    let mut params = Params::load(cli.params.as_deref())?;
    let out = Output { path: cli.out, format: cli.format };
    match cli.command {
        Command::Beta(a) => beta(&mut params, &out, a.pq),
        Command::Smooth(c) => smooth(&mut params, &out, c),
        Command::Structure(c) => structure(&mut params, &out, c),
        Command::Bound(c) => bound(&mut params, &out, c),
        Command::Scan(c) => scan(&mut params, &out, c),
        Command::Protocol(c) => protocol(&mut params, &out, c),
    }
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).with_context(|| format!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

struct Output {
    path: Option<PathBuf>,
    format: Option<Format>,
}

impl Output {
    fn write(&self, text: &str) -> Result<()> {
        match &self.path {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing report to {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn json(&self, command: &str, params: &Params, result: Value) -> Result<()> {
        if self.format == Some(Format::Csv) {
            bail!("csv output is only available for scans");
        }
        let report = json!({ "version": VERSION, "command": command, "params": params.resolved(), "result": result });
        self.write(&(serde_json::to_string_pretty(&report)? + "\n"))
    }

    /// CSV with the header first; version and resolved parameters trail as a comment line.
    fn scan(&self, command: &str, params: &Params, header: &str, rows: &[ScanRow]) -> Result<()> {
        match self.format.unwrap_or(Format::Csv) {
            Format::Json => self.json(command, params, json!({ "header": header, "rows": rows })),
            Format::Csv => {
                let mut text = scan_csv(header, rows);
                text.push_str(&format!("# skconverse {VERSION} {command} {}\n", Value::Object(params.resolved().clone())));
                self.write(&text)
            }
        }
    }
}

fn real(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn load_dist(path: &str) -> Result<(JointDist, Option<String>)> {
    let f = DistFile::read(path).with_context(|| format!("reading distribution {path}"))?;
    let j = f.dist().with_context(|| format!("invalid distribution in {path}"))?;
    Ok((j, f.eve().map(str::to_string)))
}

fn load_pq(params: &mut Params, a: PqArgs) -> Result<(JointDist, JointDist, f64)> {
    let (p, _) = load_dist(&params.str("p", a.p)?)?;
    let (q, _) = load_dist(&params.str("q", a.q)?)?;
    Ok((p, q, params.f64("eps", a.eps)?))
}

fn beta(params: &mut Params, out: &Output, a: PqArgs) -> Result<bool> {
    let (p, q, eps) = load_pq(params, a)?;
    let c = beta_epsilon(&p, &q, eps)?;
    out.json("beta", params, json!({ "beta": real(c.beta), "neg_log2_beta": real(c.neg_log2()), "certificate": c }))?;
    Ok(true)
}

fn smooth(params: &mut Params, out: &Output, c: SmoothCmd) -> Result<bool> {
    match c {
        SmoothCmd::Hmin { p, eps } => {
            let (p, _) = load_dist(&params.str("p", p)?)?;
            let r = h_min_smooth(&p, params.f64("eps", eps)?)?;
            out.json("smooth hmin", params, serde_json::to_value(r.summary())?)?;
        }
        SmoothCmd::Dmax(a) => {
            let (p, q, eps) = load_pq(params, a)?;
            let r = d_max_smooth(&p, &q, eps)?;
            out.json("smooth dmax", params, serde_json::to_value(r.summary())?)?;
        }
    }
    Ok(true)
}

/// Labeling with a `symbol → label` table alongside the raw label vector.
fn label_table(j: &JointDist, l: &Labeling) -> Result<Value> {
    let symbols = j.var(&l.var)?.alphabet.symbols();
    let table: serde_json::Map<String, Value> = symbols.iter().zip(&l.labels).map(|(s, &v)| (s.clone(), json!(v))).collect();
    let mut v = serde_json::to_value(l)?;
    v["table"] = Value::Object(table);
    Ok(v)
}

fn structure(params: &mut Params, out: &Output, c: StructureCmd) -> Result<bool> {
    match c {
        StructureCmd::Mcf { dist, x1, x2 } => {
            let (j, _) = load_dist(&params.str("dist", dist)?)?;
            let x1 = params.str_or("x1", x1, "X1")?;
            let x2 = params.str_or("x2", x2, "X2")?;
            let (l1, l2) = mcf(&j, &x1, &x2)?;
            out.json("structure mcf", params, json!({ "x1": label_table(&j, &l1)?, "x2": label_table(&j, &l2)? }))?;
        }
        StructureCmd::Mss { dist, given, target, tol } => {
            let (j, _) = load_dist(&params.str("dist", dist)?)?;
            let given = params.str_or("given", given, "X1")?;
            let target = params.str_or("target", target, "X2")?;
            let tol = params.f64_or("tol", tol, MSS_TOL)?;
            let l = mss(&j, &given, &target, tol)?;
            out.json("structure mss", params, label_table(&j, &l)?)?;
        }
    }
    Ok(true)
}

/// A function table, either a bare list of labels or `{outputs, table}`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FunctionFile {
    Table(Vec<usize>),
    Sized { outputs: usize, table: Vec<usize> },
}

fn load_function(path: &str) -> Result<(Vec<usize>, usize)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading function table {path}"))?;
    let f: FunctionFile = serde_json::from_str(&text).with_context(|| format!("malformed function table in {path}"))?;
    Ok(match f {
        FunctionFile::Table(t) => {
            let n = t.iter().max().map_or(1, |m| m + 1);
            (t, n)
        }
        FunctionFile::Sized { outputs, table } => (table, outputs),
    })
}

fn slacks(params: &mut Params, a: SlackArgs) -> Result<ComputeSlacks> {
    let eps = params.f64_or("eps", a.eps, 0.0)?;
    let delta = params.f64_or("delta", a.delta, 0.0)?;
    match (params.opt_f64("xi", a.xi)?, params.opt_f64("zeta", a.zeta)?, params.opt_f64("eta", a.eta)?) {
        (Some(xi), Some(zeta), Some(eta)) => Ok(ComputeSlacks { eps, delta, xi, zeta, eta }),
        (None, None, None) => {
            let s = ComputeSlacks::even(eps, delta, params.f64("mu", a.mu)?);
            for (k, v) in [("xi", s.xi), ("zeta", s.zeta), ("eta", s.eta)] {
                params.f64_or(k, None, v)?;
            }
            Ok(s)
        }
        _ => bail!("give all of xi, zeta and eta, or none of them together with mu"),
    }
}

fn two_party(params: &mut Params, a: TwoPartyArgs) -> Result<(JointDist, String, String, [f64; 4])> {
    let (j, _) = load_dist(&params.str("dist", a.dist)?)?;
    let x1 = params.str_or("x1", a.x1, "X1")?;
    let x2 = params.str_or("x2", a.x2, "X2")?;
    let v = [params.f64("eps", a.eps)?, params.f64("delta1", a.delta1)?, params.f64("delta2", a.delta2)?, params.f64("xi", a.xi)?];
    Ok((j, x1, x2, v))
}

fn bound(params: &mut Params, out: &Output, c: BoundCmd) -> Result<bool> {
    match c {
        BoundCmd::Sk { dist, eps, eta, partition, all_partitions, q } => {
            let (j, eve) = load_dist(&params.str("dist", dist)?)?;
            let z: Vec<&str> = eve.iter().map(String::as_str).collect();
            let eps = params.f64("eps", eps)?;
            let eta = params.f64("eta", eta)?;
            let partition = params.opt_str("partition", partition)?;
            let all = params.flag("all_partitions", all_partitions || partition.is_none())?;
            let q = params.opt_str("q", q)?;
            let report = match partition {
                Some(_) if all => bail!("partition and all_partitions are exclusive"),
                Some(text) => {
                    let pi = Partition::parse(&text)?;
                    let q = q.map(|path| load_dist(&path).map(|d| d.0)).transpose()?;
                    cit_bound(&j, &pi, &z, eps, eta, q.as_ref())?
                }
                None if q.is_some() => bail!("a custom q needs a fixed --partition"),
                None => cit_bound_best(&j, &z, eps, eta)?,
            };
            out.json("bound sk", params, serde_json::to_value(report)?)?;
        }
        BoundCmd::Ot(a) => {
            let (j, x1, x2, [e, d1, d2, xi]) = two_party(params, a)?;
            let b = ot_bounds(&j, &x1, &x2, e, d1, d2, xi)?;
            let cap = ot_capacity_bound(&j, &x1, &x2)?;
            out.json("bound ot", params, json!({ "bound": b, "capacity_bound": real(cap) }))?;
        }
        BoundCmd::Bc(a) => {
            let (j, x1, x2, [e, d1, d2, xi]) = two_party(params, a)?;
            let b = bc_bound(&j, &x1, &x2, e, d1, d2, xi)?;
            let cap = bc_capacity_bound(&j, &x1, &x2)?;
            out.json("bound bc", params, json!({ "bound": b, "capacity_bound": real(cap) }))?;
        }
        BoundCmd::Compute { dist, function, partition, slacks: s } => {
            let (j, _) = load_dist(&params.str("dist", dist)?)?;
            let (g, outputs) = load_function(&params.str("function", function)?)?;
            let pi = params.opt_str("partition", partition)?.map(|t| Partition::parse(&t)).transpose()?;
            let s = slacks(params, s)?;
            let r = sc_necessary_check(&j, &g, outputs, s, pi.as_ref())?;
            out.json("bound compute", params, serde_json::to_value(r)?)?;
        }
        BoundCmd::Transmit { dist, kappa, slacks: s } => {
            let (j, _) = load_dist(&params.str("dist", dist)?)?;
            let kappa = params.f64("kappa", kappa)?;
            let s = slacks(params, s)?;
            let r = secure_transmission_check(&j, kappa, s)?;
            out.json("bound transmit", params, serde_json::to_value(r)?)?;
        }
    }
    Ok(true)
}

/// `n` IID copies with each variable's copies grouped back into one tuple variable.
fn grouped_power(j: &JointDist, n: u64) -> Result<JointDist> {
    let jn = j.iid_extend(usize::try_from(n)?)?;
    let names: Vec<(String, Vec<String>)> =
        j.vars().iter().map(|v| (v.name.clone(), (1..=n).map(|t| format!("{}_{t}", v.name)).collect())).collect();
    let groups: Vec<(&str, Vec<&str>)> = names.iter().map(|(k, m)| (k.as_str(), m.iter().map(String::as_str).collect())).collect();
    Ok(jn.project(&groups)?)
}

fn scan(params: &mut Params, out: &Output, c: ScanCmd) -> Result<bool> {
    match c {
        ScanCmd::Stein { pq, n } => {
            let (p, q, eps) = load_pq(params, pq)?;
            let ns = params.n_list("n", Some(n))?;
            out.scan("scan stein", params, STEIN_HEADER, &stein_scan(&p, &q, eps, &ns)?)?;
        }
        ScanCmd::Dmax { pq, n } => {
            let (p, q, eps) = load_pq(params, pq)?;
            let ns = params.n_list("n", Some(n))?;
            out.scan("scan dmax", params, DMAX_HEADER, &dmax_convergence_scan(&p, &q, eps, &ns)?)?;
        }
        ScanCmd::Capacity { dist, eps, eta, n } => {
            let (j, eve) = load_dist(&params.str("dist", dist)?)?;
            if eve.is_some() {
                bail!("capacity scan needs a source without an eve variable");
            }
            let eps = params.f64("eps", eps)?;
            let eta = params.f64("eta", eta)?;
            let ns = params.n_list("n", Some(n))?;
            let (cap, _) = sk_capacity_formula(&j, &[])?;
            let rows = ns
                .par_iter()
                .map(|&n| {
                    let b = cit_bound_best(&grouped_power(&j, n)?, &[], eps, eta)?;
                    Ok(ScanRow { n, value: b.value / n as f64, limit: cap })
                })
                .collect::<Result<Vec<_>>>()?;
            out.scan("scan capacity", params, CAPACITY_HEADER, &rows)?;
        }
    }
    Ok(true)
}

fn load_protocol(params: &mut Params, src: ProtoSource) -> Result<(JointDist, ProtocolFile)> {
    let path = params.str("proto", src.proto)?;
    let pf = ProtocolFile::read(&path).with_context(|| format!("reading protocol {path}"))?;
    let j = match params.opt_str("dist", src.dist)? {
        Some(d) => load_dist(&d)?.0,
        None => pf.source()?.with_context(|| format!("protocol {path} embeds no source; pass --dist"))?,
    };
    Ok((j, pf))
}

fn protocol(params: &mut Params, out: &Output, c: ProtocolCmd) -> Result<bool> {
    match c {
        ProtocolCmd::Eval { src, eta } => eval(params, out, src, eta),
        ProtocolCmd::Reduce { src, ideal_ot, variant, emit } => reduce(params, out, src, ideal_ot, variant, emit),
        ProtocolCmd::Fuzz { count, seed, eta, independence_count } => {
            let d = FuzzConfig::default();
            let cfg = FuzzConfig {
                count: params.u64_or("count", count, d.count as u64)? as usize,
                seed: params.u64_or("seed", seed, d.seed)?,
                eta: params.f64_or("eta", eta, d.eta)?,
                independence_count: params.u64_or("independence_count", independence_count, d.independence_count as u64)? as usize,
            };
            let s = fuzz(&cfg)?;
            let clean = s.clean();
            out.json("protocol fuzz", params, json!({ "clean": clean, "summary": s }))?;
            Ok(clean)
        }
    }
}

fn eval(params: &mut Params, out: &Output, src: ProtoSource, eta: Option<f64>) -> Result<bool> {
    let (j, pf) = load_protocol(params, src)?;
    if pf.ot.is_some() {
        let ot = pf.ot(&j)?;
        out.json("protocol eval", params, json!({ "kind": "ot", "measurement": measure_ot(&j, &ot)? }))?;
        return Ok(true);
    }
    if pf.bc.is_some() {
        let bc = pf.bc(&j)?;
        out.json("protocol eval", params, json!({ "kind": "bc", "measurement": measure_bc(&j, &bc)? }))?;
        return Ok(true);
    }
    let p = pf.protocol(&j)?;
    let sec = eval_sk_security(&j, &p)?;
    let mut ok = sec.prop1_holds(1e-12);
    let mut result = json!({ "kind": "sk", "security": sec, "prop1": ok });
    if let Some(eta) = params.opt_f64("eta", eta)? {
        let conv = check_converse(&j, &p, eta)?;
        let lemmas = enum_partitions(p.num_parties(), 2)?
            .iter()
            .map(|pi| lemma1_test(&j, &p, pi, eta))
            .collect::<skconverse::Result<Vec<_>>>()?;
        ok &= conv.pass && lemmas.iter().all(|l| l.pass);
        result["converse"] = serde_json::to_value(conv)?;
        result["lemma1"] = serde_json::to_value(lemmas)?;
    }
    out.json("protocol eval", params, result)?;
    Ok(ok)
}

fn parse_variants(s: &str) -> Result<Vec<OtVariant>> {
    Ok(match s {
        "one" | "1" => vec![OtVariant::One],
        "two" | "2" => vec![OtVariant::Two],
        "both" => vec![OtVariant::One, OtVariant::Two],
        _ => bail!("variant must be one, two or both, got `{s}`"),
    })
}

fn emit_reduction(path: &Path, red: &Reduction) -> Result<()> {
    let pf = ProtocolFile::from_protocol(&red.dist, &red.protocol)?.with_source(&red.dist);
    std::fs::write(path, pf.to_json()? + "\n").with_context(|| format!("writing reduced protocol to {}", path.display()))
}

fn suffixed(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "reduced".into(), |s| s.to_string_lossy().into_owned());
    let ext = path.extension().map_or_else(|| "json".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}-{tag}.{ext}"))
}

fn reduce(
    params: &mut Params,
    out: &Output,
    src: ProtoSource,
    ideal_ot: Option<u32>,
    variant: Option<String>,
    emit: Option<PathBuf>,
) -> Result<bool> {
    let emit = params.opt_str("emit", emit.map(|p| p.to_string_lossy().into_owned()))?.map(PathBuf::from);
    let ideal = params.opt_u64("ideal_ot", ideal_ot.map(u64::from))?;
    let (j, ot, bc) = match ideal {
        Some(l) => {
            let (j, ot) = ideal_ot_protocol(u32::try_from(l)?)?;
            (j, Some(ot), None)
        }
        None => {
            let (j, pf) = load_protocol(params, src)?;
            match (&pf.ot, &pf.bc) {
                (Some(_), _) => (j.clone(), Some(pf.ot(&j)?), None),
                (None, Some(_)) => (j.clone(), None, Some(pf.bc(&j)?)),
                (None, None) => bail!("protocol file has neither an `ot` nor a `bc` section to reduce"),
            }
        }
    };
    if let Some(ot) = ot {
        let variants = parse_variants(&params.str_or("variant", variant, "both")?)?;
        let mut reports = Vec::new();
        for v in variants {
            if let Some(path) = &emit {
                emit_reduction(&suffixed(path, &format!("{v:?}").to_lowercase()), &reduce_ot_to_sk(&j, &ot, v)?)?;
            }
            reports.push(check_ot_reduction(&j, &ot, v)?);
        }
        let ok = reports.iter().all(|r| r.pass);
        out.json("protocol reduce", params, json!({ "kind": "ot", "pass": ok, "reports": reports }))?;
        return Ok(ok);
    }
    let bc = bc.expect("one interface is present");
    if let Some(path) = &emit {
        emit_reduction(path, &reduce_bc_to_sk(&j, &bc)?)?;
    }
    let r = check_bc_reduction(&j, &bc)?;
    let ok = r.pass;
    out.json("protocol reduce", params, json!({ "kind": "bc", "pass": ok, "report": r }))?;
    Ok(ok)
}
