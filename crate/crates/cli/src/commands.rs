use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use sigma_vqls::decomposer::{decompose_heat, heat_term_count, pauli_decompose, pauli_matrix, DEFAULT_PRUNE_TOL};
use sigma_vqls::heat::{assemble_dense, build_system, classical_solve, fidelity};
use sigma_vqls::matrix::DEFAULT_ORACLE_LIMIT;
use sigma_vqls::sigma::decomposition_matrix;
use sigma_vqls::verify::run_all;
use sigma_vqls::vqls::{extract_solution, optimize, AnsatzSpec, ProblemInstance, Status, MERGE_TOL};

use crate::config::{Command, RunConfig};

const SIGMA_TOL: f64 = 1e-12;
const PAULI_TOL: f64 = 1e-9;

#[derive(Debug)]
pub enum Failure {
    /// Malformed or invalid configuration; exit code 2.
    Config(String),
    /// Anything that went wrong while running; exit code 1.
    Runtime(String),
}

impl From<sigma_vqls::Error> for Failure {
    fn from(e: sigma_vqls::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Whether the command's own checks passed.
pub type Verdict = bool;

pub fn execute(cfg: &RunConfig) -> Result<Verdict, Failure> {
    cfg.validate().map_err(Failure::Config)?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out)?;
    let (verdict, files) = match cfg.command {
        Command::Decompose => decompose(cfg, out)?,
        Command::Compare => compare(cfg, out)?,
        Command::Verify => verify(cfg, out)?,
        Command::Solve => solve(cfg, out)?,
    };
    write_manifest(cfg, out, &files, verdict)?;
    Ok(verdict)
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Runtime(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// SHA-256 of the effective configuration, ignoring where outputs go.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let Value::Object(m) = &mut v {
        m.remove("output_dir");
    }
    let digest = Sha256::digest(v.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_manifest(cfg: &RunConfig, out: &Path, files: &[&str], passed: Verdict) -> Result<(), Failure> {
    let manifest = json!({
        "command": cfg.command.name(),
        "passed": passed,
        "seed": cfg.seed,
        "shots": cfg.optimizer.shots,
        "config_sha256": config_hash(cfg),
        "config": cfg,
        "versions": {
            "sigma-vqls": sigma_vqls::VERSION,
            "sigma-vqls-cli": env!("CARGO_PKG_VERSION"),
        },
        "outputs": files,
    });
    write_json(&out.join("manifest.json"), &manifest)
}

fn decompose(cfg: &RunConfig, out: &Path) -> Result<(Verdict, Vec<&'static str>), Failure> {
    let p = cfg.heat.params();
    let raw = decompose_heat(&p)?;
    let merged = raw.merged(MERGE_TOL);
    fs::write(out.join("terms.txt"), merged.to_text())?;
    fs::write(out.join("terms_raw.txt"), raw.to_text())?;
    let residual = if p.num_qubits() <= DEFAULT_ORACLE_LIMIT {
        let dense = assemble_dense(&p)?;
        let r = decomposition_matrix(&raw)?
            .max_abs_diff(&dense)
            .max(decomposition_matrix(&merged)?.max_abs_diff(&dense));
        Some(r)
    } else {
        None
    };
    let summary = json!({
        "n_x": p.n_x,
        "n_t": p.n_t,
        "num_qubits": p.num_qubits(),
        "sigma_count": merged.len(),
        "sigma_count_merged": merged.len(),
        "sigma_count_raw": raw.len(),
        "closed_form_count": heat_term_count(p.s(), p.t()),
        "residual": residual,
    });
    write_json(&out.join("summary.json"), &summary)?;
    match residual {
        Some(r) => println!(
            "decompose: {} merged / {} raw terms, residual {r:.1e}",
            merged.len(),
            raw.len()
        ),
        None => println!(
            "decompose: {} merged / {} raw terms, residual skipped beyond {DEFAULT_ORACLE_LIMIT} qubits",
            merged.len(),
            raw.len()
        ),
    }
    let ok = residual.is_none_or(|r| r <= SIGMA_TOL);
    Ok((ok, vec!["terms.txt", "terms_raw.txt", "summary.json"]))
}

fn compare(cfg: &RunConfig, out: &Path) -> Result<(Verdict, Vec<&'static str>), Failure> {
    let mut csv = String::from("N,n_x,n_t,pauli_count,sigma_count_merged,sigma_count_raw\n");
    let mut rows = Vec::new();
    let mut ok = true;
    for &[nx, nt] in &cfg.compare.sizes {
        let p = cfg.heat.params_for(nx, nt);
        let dense = assemble_dense(&p)?;
        let pauli = pauli_decompose(&dense, DEFAULT_PRUNE_TOL)?;
        let raw = decompose_heat(&p)?;
        let merged = raw.merged(MERGE_TOL);
        let pauli_res = pauli_matrix(&pauli)?.max_abs_diff(&dense);
        let sigma_res = decomposition_matrix(&raw)?
            .max_abs_diff(&dense)
            .max(decomposition_matrix(&merged)?.max_abs_diff(&dense));
        ok &= pauli_res <= PAULI_TOL && sigma_res <= SIGMA_TOL;
        let n = nx * nt;
        writeln!(csv, "{n},{nx},{nt},{},{},{}", pauli.len(), merged.len(), raw.len()).unwrap();
        println!(
            "compare: N={n:<4} pauli {:<4} sigma {} merged / {} raw",
            pauli.len(),
            merged.len(),
            raw.len()
        );
        rows.push(json!({
            "N": n,
            "n_x": nx,
            "n_t": nt,
            "pauli_count": pauli.len(),
            "sigma_count_merged": merged.len(),
            "sigma_count_raw": raw.len(),
            "closed_form_count": heat_term_count(p.s(), p.t()),
            "pauli_residual": pauli_res,
            "sigma_residual": sigma_res,
        }));
    }
    fs::write(out.join("compare.csv"), csv)?;
    write_json(&out.join("compare.json"), &json!({ "passed": ok, "rows": rows }))?;
    Ok((ok, vec!["compare.csv", "compare.json"]))
}

fn verify(cfg: &RunConfig, out: &Path) -> Result<(Verdict, Vec<&'static str>), Failure> {
    let report = run_all(&cfg.verify)?;
    for s in &report.suites {
        let state = match (&s.skipped, s.passed) {
            (Some(_), _) => "SKIP",
            (None, true) => "PASS",
            (None, false) => "FAIL",
        };
        println!("verify: {state} {} ({} checks)", s.name, s.checks);
        if let Some(why) = &s.skipped {
            println!("  {why}");
        }
        for f in &s.failures {
            println!("  {f}");
        }
    }
    write_json(&out.join("verify.json"), &report)?;
    Ok((report.passed, vec!["verify.json"]))
}

fn solve(cfg: &RunConfig, out: &Path) -> Result<(Verdict, Vec<&'static str>), Failure> {
    let hp = cfg.heat.params();
    let problem = ProblemInstance::heat(&hp)?;
    let spec = AnsatzSpec::new(problem.num_qubits(), cfg.ansatz.layers, cfg.ansatz.entangler)?;
    let ocfg = cfg.optimizer_config();
    let opt = optimize(&problem, &spec, &ocfg)?;
    let sol = extract_solution(&problem, &spec, &opt.theta)?;
    let x = classical_solve(&build_system(&hp)?)?;
    let fid = fidelity(&x, &sol.state()?)?;

    let mut trace = String::from("iteration,cost,c_global,c_local\n");
    for (i, r) in opt.trace.iter().enumerate() {
        writeln!(trace, "{},{:e},{:e},{:e}", i + 1, r.cost(ocfg.cost_kind), r.c_global, r.c_local).unwrap();
    }
    fs::write(out.join("trace.csv"), trace)?;

    let mut solution = String::from("block,index,classical,vqls\n");
    for (k, (xc, xq)) in x.iter().zip(sol.scaled()).enumerate() {
        writeln!(solution, "{},{},{:e},{:e}", k / hp.n_x, k % hp.n_x, xc, xq.re).unwrap();
    }
    fs::write(out.join("solution.csv"), solution)?;

    let result = json!({
        "cost_kind": ocfg.cost_kind,
        "final_cost": opt.best.cost(ocfg.cost_kind),
        "c_global": opt.best.c_global,
        "c_local": opt.best.c_local,
        "iterations": opt.trace.len(),
        "evaluations": opt.evaluations,
        "status": opt.status,
        "fidelity": fid,
        "overlap": fid.sqrt(),
        "residual": sol.residual,
        "scale": { "re": sol.scale.re, "im": sol.scale.im },
        "theta": opt.theta,
    });
    write_json(&out.join("solve.json"), &result)?;
    println!(
        "solve: {:?} after {} iterations, cost {:.3e}, fidelity {fid:.6}, residual {:.3e}",
        opt.status,
        opt.trace.len(),
        opt.best.cost(ocfg.cost_kind),
        sol.residual
    );
    Ok((opt.status == Status::Converged, vec!["solve.json", "trace.csv", "solution.csv"]))
}
