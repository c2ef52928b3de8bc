use std::fs;
use std::path::PathBuf;

use melan::{
    check_uniqueness_conditions, solve_batch, solve_full, sweep_gamma_map, Execution, ExtremumKind, LcMode, Mesh,
    ModelVariant, SolveReport, VariantComparison,
};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{write_report, Header, Table};
use crate::reference::{RefValue, Reference};

/// A validated configuration with the command-line overrides applied.
pub struct Context {
    pub cfg: RunConfig,
    pub out_dir: PathBuf,
    pub format: Format,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self, CliError> {
        cfg.validate()?;
        Ok(Self {
            out_dir: cfg.output.dir.clone(),
            format: cfg.output.format,
            cfg,
        })
    }

    /// Creates the output directory and stores the resolved configuration in it.
    fn prepare_output(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.out_dir)?;
        fs::write(self.out_dir.join("config.toml"), self.cfg.to_toml())?;
        Ok(())
    }

    fn header(&self, command: &'static str) -> Header {
        Header::new(command, &self.cfg)
    }
}

fn solution_table(report: &SolveReport, length: f64) -> Table {
    let mut t = Table::new(&["s", "x", "z", "z1", "z2", "z3"]);
    t.meta(
        "derivatives",
        "z1, z2, z3 are d^k z / ds^k with s = x / L; z and x in m",
    );
    t.meta("variant", report.variant);
    t.meta("gamma_fix", report.gamma_fix);
    let w = &report.solution;
    let mesh = w.mesh();
    for i in 0..mesh.len() {
        let s = mesh.node(i);
        t.push(vec![
            s.into(),
            (s * length).into(),
            w.z()[i].into(),
            w.z1()[i].into(),
            w.z2()[i].into(),
            w.z3()[i].into(),
        ]);
    }
    t
}

fn count(report: &SolveReport, kind: ExtremumKind) -> usize {
    report.extrema.iter().filter(|e| e.kind == kind).count()
}

pub fn solve(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let report = solve_full(&cfg.bridge, cfg.variant, &cfg.load, &cfg.solver, cfg.lc_mode)?;
    ctx.prepare_output()?;
    let header = ctx.header("solve");
    solution_table(&report, cfg.bridge.length).write(&ctx.out_dir, "solution", ctx.format, &header)?;
    write_report(&ctx.out_dir, "report.json", "solve", cfg, &report)?;
    println!(
        "{}: gamma_fix = {:.6} m, max displacement = {:.5} m, {} maxima, {} minima, converged = {}",
        report.variant,
        report.gamma_fix,
        report.max_displacement,
        count(&report, ExtremumKind::Max),
        count(&report, ExtremumKind::Min),
        report.converged
    );
    if report.converged {
        Ok(())
    } else {
        Err(CliError::Solver(format!(
            "not converged: fixed-point defect {:.3e}, collocation defect {:.3e}",
            report.fixed_point_defect, report.residual
        )))
    }
}

pub fn gamma_map(ctx: &Context, range: Option<(f64, f64)>, points: usize) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let range = range.unwrap_or(cfg.solver.gamma_bracket);
    if points < 3 {
        return Err(CliError::Config(format!("--points must be at least 3, got {points}")));
    }
    if !(range.0.is_finite() && range.1.is_finite() && range.0 < range.1) {
        return Err(CliError::Config(format!("--range needs lo < hi, got {range:?}")));
    }
    let table = sweep_gamma_map(
        &cfg.bridge,
        cfg.variant,
        &cfg.load,
        range,
        points,
        &cfg.solver,
        cfg.lc_mode,
        Execution::default(),
    )?;
    ctx.prepare_output()?;
    let mut t = Table::new(&["gamma_in", "gamma_out", "newton_iters", "converged"]);
    t.meta("variant", table.variant);
    t.meta("range", format!("{},{}", range.0, range.1));
    t.meta("points", points);
    t.meta("n_intervals", table.n_intervals);
    t.meta("sign_changes", table.crossings.len());
    for (k, c) in table.crossings.iter().enumerate() {
        let slope = c.slope.map_or("n/a".to_string(), |s| s.to_string());
        t.meta(
            &format!("crossing_{}", k + 1),
            format!("lo={} hi={} estimate={} slope={slope}", c.lo, c.hi, c.estimate),
        );
    }
    for (k, r) in table.rows.iter().enumerate() {
        if let Some(e) = &r.error {
            t.meta(&format!("row_error_{k}"), format!("gamma_in={}: {e}", r.gamma_in));
        }
        t.push(vec![
            r.gamma_in.into(),
            r.gamma_out.into(),
            r.newton_iters.into(),
            r.converged.into(),
        ]);
    }
    t.write(&ctx.out_dir, "gamma_map", ctx.format, &ctx.header("gamma-map"))?;
    let failed = table.rows.iter().filter(|r| !r.converged).count();
    println!(
        "{} rows over [{}, {}], {} sign change(s), {failed} unconverged",
        table.rows.len(),
        range.0,
        range.1,
        table.crossings.len()
    );
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Solver(format!(
            "{failed} of {} rows did not converge",
            table.rows.len()
        )))
    }
}

#[derive(Debug, Serialize)]
struct CellCheck {
    quantity: &'static str,
    computed: Option<f64>,
    reference: f64,
    tolerance: f64,
    cell: String,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct Table1Row {
    label: String,
    status: &'static str,
    converged: bool,
    gamma_fix: Option<f64>,
    max_displacement: Option<f64>,
    gap: Option<f64>,
    checks: Vec<CellCheck>,
    error: Option<String>,
}

fn cell_check(quantity: &'static str, computed: Option<f64>, r: &RefValue) -> CellCheck {
    CellCheck {
        quantity,
        computed,
        reference: r.value,
        tolerance: r.tolerance(),
        cell: r.cell.clone(),
        pass: computed.is_some_and(|x| r.accepts(x)),
    }
}

fn show(x: Option<f64>) -> String {
    x.map_or("-".to_string(), |v| format!("{v:.6}"))
}

pub fn table1(ctx: &Context) -> Result<(), CliError> {
    let reference = Reference::embedded();
    let cfg = &ctx.cfg;
    let lc_mode: LcMode = reference.lc_mode;
    let with_reference = reference.applies_to(&cfg.bridge);
    let cases: Vec<_> = reference
        .case
        .iter()
        .map(|c| (ModelVariant::Full, c.load.clone()))
        .collect();
    let results = solve_batch(&cfg.bridge, &cases, &cfg.solver, lc_mode, Execution::default());
    let rows: Vec<Table1Row> = reference
        .case
        .iter()
        .zip(&results)
        .map(|(case, r)| {
            let (gamma_fix, max_displacement, gap, converged, error) = match r {
                Ok(rep) => (
                    Some(rep.gamma_fix),
                    Some(rep.max_displacement),
                    rep.gap,
                    rep.converged,
                    None,
                ),
                Err(e) => (None, None, None, false, Some(e.to_string())),
            };
            let checks = if with_reference {
                vec![
                    cell_check("gamma_fix", gamma_fix, &case.gamma_fix),
                    cell_check("max_displacement", max_displacement, &case.max_displacement),
                    cell_check("gap", gap, &case.gap),
                ]
            } else {
                Vec::new()
            };
            let status = match (&error, with_reference) {
                (Some(_), _) => "error",
                (None, false) => "no reference",
                (None, true) if converged && checks.iter().all(|c| c.pass) => "pass",
                (None, true) => "fail",
            };
            Table1Row {
                label: case.label.clone(),
                status,
                converged,
                gamma_fix,
                max_displacement,
                gap,
                checks,
                error,
            }
        })
        .collect();
    println!("{:<18} {:>10} {:>10} {:>10}  status", "case", "gamma_fix", "M", "G");
    for row in &rows {
        println!(
            "{:<18} {:>10} {:>10} {:>10}  {}",
            row.label,
            show(row.gamma_fix),
            show(row.max_displacement),
            show(row.gap),
            row.status
        );
        for c in &row.checks {
            println!(
                "    {:<17} computed {:>10} reference {:<9} +- {:<9.4e} {} [{}]",
                c.quantity,
                show(c.computed),
                c.reference,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" },
                c.cell
            );
        }
        if let Some(e) = &row.error {
            println!("    error: {e}");
        }
    }
    ctx.prepare_output()?;
    #[derive(Serialize)]
    struct Doc<'a> {
        reference_version: u32,
        lc_mode: LcMode,
        n_intervals: usize,
        rows: &'a [Table1Row],
    }
    let doc = Doc {
        reference_version: reference.version,
        lc_mode,
        n_intervals: cfg.solver.n_intervals,
        rows: &rows,
    };
    write_report(&ctx.out_dir, "table1.json", "table1", cfg, &doc)?;
    let errors = rows.iter().filter(|r| r.status == "error").count();
    let failures = rows.iter().filter(|r| r.status == "fail").count();
    let unconverged = rows.iter().filter(|r| r.error.is_none() && !r.converged).count();
    if errors > 0 {
        Err(CliError::Solver(format!("{errors} case(s) failed to solve")))
    } else if failures > 0 {
        Err(CliError::Tolerance(format!(
            "{failures} of {} case(s) outside tolerance",
            rows.len()
        )))
    } else if unconverged > 0 {
        Err(CliError::Solver(format!("{unconverged} case(s) did not converge")))
    } else {
        Ok(())
    }
}

pub fn check(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let mesh = Mesh::aligned(cfg.solver.n_intervals, &cfg.load.breakpoints(cfg.bridge.length))
        .map_err(|e| CliError::Config(e.to_string()))?;
    let report = check_uniqueness_conditions(&cfg.bridge, &cfg.load, &mesh, cfg.lc_mode)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    ctx.prepare_output()?;
    write_report(&ctx.out_dir, "check.json", "check", cfg, &report)?;
    Ok(())
}

pub fn compare(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let cases: Vec<_> = ModelVariant::ALL.iter().map(|&v| (v, cfg.load.clone())).collect();
    let results = solve_batch(&cfg.bridge, &cases, &cfg.solver, cfg.lc_mode, Execution::default());
    ctx.prepare_output()?;
    let header = ctx.header("compare");
    let mut t = Table::new(&[
        "variant",
        "gamma_fix",
        "max_displacement",
        "gap",
        "n_maxima",
        "n_minima",
        "converged",
    ]);
    let mut rows = Vec::new();
    for (&variant, r) in ModelVariant::ALL.iter().zip(&results) {
        let row = VariantComparison::from_result(variant, r);
        if let Some(e) = &row.error {
            t.meta(&format!("error_{}", variant.name()), e);
        }
        t.push(vec![
            variant.name().into(),
            row.gamma_fix.into(),
            row.max_displacement.into(),
            row.gap.into(),
            row.n_maxima.into(),
            row.n_minima.into(),
            row.converged.into(),
        ]);
        if let Ok(rep) = r {
            solution_table(rep, cfg.bridge.length).write(
                &ctx.out_dir,
                &format!("solution_{}", variant.name().replace('-', "_")),
                ctx.format,
                &header,
            )?;
        }
        println!(
            "{:<17} gamma_fix {:>10} M {:>10} maxima {} minima {}{}",
            variant.name(),
            show(row.gamma_fix),
            show(row.max_displacement),
            row.n_maxima,
            row.n_minima,
            row.error.as_ref().map_or(String::new(), |e| format!("  error: {e}"))
        );
        rows.push(row);
    }
    t.write(&ctx.out_dir, "compare", ctx.format, &header)?;
    write_report(&ctx.out_dir, "compare_report.json", "compare", cfg, &rows)?;
    let failed: Vec<_> = rows.iter().filter(|r| !r.converged).map(|r| r.variant.name()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Solver(format!(
            "variants without a converged solution: {}",
            failed.join(", ")
        )))
    }
}
