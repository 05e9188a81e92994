//! Command-line front end: classify designs, plot singularity curves and
//! workspace cross-sections, sweep the design plane, and run the
//! brute-force agreement suite.

mod json;
mod svg;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use json::Json;
use ortho3r::classification::{
    c1_variant, classify_domain, distance_to_nearest_surface, is_cuspidal, surfaces,
    topology_report_with, AnalyticLabel, DomainId,
};
use ortho3r::oracle::{cusp_brute, empirical_domain, transition_bisect_between, GridSpec};
use ortho3r::singularity::{
    analyze_singularities, BoundaryRole, BranchKind, SingularityAnalysis, DEFAULT_SAMPLES,
};
use ortho3r::DhParams64;

/// Exit codes: 0 ok, 1 usage error, 2 non-generic design, 3 validation
/// failure.
const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_NON_GENERIC: i32 = 2;
const EXIT_VALIDATION: i32 = 3;

#[derive(Parser)]
#[command(
    name = "ortho3r",
    version,
    about = "Workspace-topology analysis of orthogonal 3R positioning manipulators"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify one design: domain D1..D5, cusp count, cuspidality.
    Classify(ClassifyArgs),
    /// Singularity curves in the (theta2, theta3) joint torus (SVG + CSV).
    PlotJointspace(PlotArgs),
    /// Workspace half cross-section with boundaries, cusps and isolated
    /// points (SVG + CSV).
    PlotWorkspace(PlotArgs),
    /// Domain map over a (d3, d4) grid at fixed r2 (CSV + SVG heatmap).
    Sweep(SweepArgs),
    /// Brute-force agreement suite on seeded random designs.
    Check(CheckArgs),
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// First link length (the normalization unit).
    #[arg(long, default_value_t = 1.0)]
    d2: f64,
    /// Second link length.
    #[arg(long)]
    d3: f64,
    /// Third link length.
    #[arg(long)]
    d4: f64,
    /// Second joint offset.
    #[arg(long)]
    r2: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<DhParams64> {
        DhParams64::new(self.d2, self.d3, self.d4, self.r2)
            .context("invalid design parameters")
    }
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Also run the slow brute-force labelling and report agreement.
    #[arg(long)]
    empirical: bool,
    /// Oracle grid resolution (>= 64).
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// Curve sampling density.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Report angles in degrees instead of radians.
    #[arg(long)]
    degrees: bool,
    /// Random seed echoed into the report.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Output base path; writes <out>.svg and <out>.csv.
    #[arg(long)]
    out: PathBuf,
    /// Curve sampling density.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Restrict output: svg or csv (default: both).
    #[arg(long)]
    format: Option<String>,
    /// CSV angles in degrees instead of radians.
    #[arg(long)]
    degrees: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    /// Fixed second joint offset.
    #[arg(long, default_value_t = 1.0)]
    r2: f64,
    /// Normalization unit.
    #[arg(long, default_value_t = 1.0)]
    d2: f64,
    /// Upper end of the d3 range (cells cover (0, d3-max]).
    #[arg(long = "d3-max", default_value_t = 4.0)]
    d3_max: f64,
    /// Upper end of the d4 range.
    #[arg(long = "d4-max", default_value_t = 4.0)]
    d4_max: f64,
    /// Grid resolution per axis (>= 32).
    #[arg(long, default_value_t = 200)]
    resolution: usize,
    /// Label cells with the brute-force oracle instead of the surfaces
    /// (orders of magnitude slower).
    #[arg(long)]
    empirical: bool,
    /// Output base path; writes <out>.csv and <out>.svg.
    #[arg(long)]
    out: PathBuf,
    /// Restrict output: svg or csv (default: both).
    #[arg(long)]
    format: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CheckArgs {
    /// Number of random designs.
    #[arg(long, default_value_t = 50)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Oracle grid resolution.
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// Run the full empirical labelling on every n-th draw.
    #[arg(long = "empirical-every", default_value_t = 5)]
    empirical_every: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path too.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let outcome = match cli.cmd {
        Cmd::Classify(args) => cmd_classify(args),
        Cmd::PlotJointspace(args) => cmd_plot_jointspace(args),
        Cmd::PlotWorkspace(args) => cmd_plot_workspace(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Check(args) => cmd_check(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(EXIT_USAGE);
        }
    }
}

fn angle_out(theta: f64, degrees: bool) -> f64 {
    if degrees {
        theta.to_degrees()
    } else {
        theta
    }
}

fn domain_str(label: &AnalyticLabel<f64>) -> String {
    match label {
        AnalyticLabel::Domain(d) => d.as_str().to_string(),
        AnalyticLabel::NonGeneric { .. } => "NonGeneric".to_string(),
    }
}

fn surfaces_json(p: DhParams64) -> Json {
    let s = surfaces(p.d2(), p.d3(), p.r2());
    let mut o = Json::obj();
    o.push("c1", Json::Num(s.c1));
    o.push("c2", Json::Num(s.c2));
    if let Some(c3) = s.c3 {
        o.push("c3", Json::Num(c3));
    }
    if let Some(c4) = s.c4 {
        o.push("c4", Json::Num(c4));
    }
    o
}

fn report_header(command: &str, seed: u64) -> Json {
    let mut o = Json::obj();
    o.push("command", Json::Str(command.to_string()));
    o.push("version", Json::Str(env!("CARGO_PKG_VERSION").to_string()));
    o.push("seed", Json::Int(seed as i64));
    o
}

fn params_json(p: DhParams64) -> Json {
    let mut o = Json::obj();
    o.push("d2", Json::Num(p.d2()));
    o.push("d3", Json::Num(p.d3()));
    o.push("d4", Json::Num(p.d4()));
    o.push("r2", Json::Num(p.r2()));
    o
}

fn emit_report(report: &Json, out: Option<&PathBuf>, wall: Instant) -> Result<()> {
    // wall_time_ms is the one field that varies between identical runs.
    let mut full = report.clone();
    full.push("wall_time_ms", Json::Int(wall.elapsed().as_millis() as i64));
    let text = full.render();
    match out {
        Some(path) => std::fs::write(path, &text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

fn cmd_classify(args: ClassifyArgs) -> Result<i32> {
    let t0 = Instant::now();
    if args.samples < ortho3r::singularity::MIN_SAMPLES {
        anyhow::bail!("--samples must be at least {}", ortho3r::singularity::MIN_SAMPLES);
    }
    let p = args.params.params()?;

    let mut report = report_header("classify", args.seed);
    report.push("params", params_json(p));

    let topology = topology_report_with(p, args.samples);
    let generic;
    match topology {
        Ok(mut rep) => {
            if args.empirical {
                let grid = GridSpec::new(args.resolution).context("invalid resolution")?;
                match empirical_domain(p, &grid) {
                    Ok(e) => rep.attach_empirical(e.domain),
                    Err(e) => {
                        report.push("empirical_error", Json::Str(e.to_string()));
                    }
                }
            }
            generic = rep.generic && rep.domain_analytic.domain().is_some();
            report.push("domain_analytic", Json::Str(domain_str(&rep.domain_analytic)));
            if let Some(d) = rep.domain_empirical {
                report.push("domain_empirical", Json::Str(d.as_str().to_string()));
            }
            report.push("cuspidal", Json::Bool(rep.cuspidal));
            report.push("cusp_count", Json::Int(rep.cusp_count() as i64));
            report.push("cusps_split", Json::Bool(rep.cusps_split));
            let arr = rep
                .cusps
                .iter()
                .map(|c| {
                    let mut o = Json::obj();
                    o.push("rho", Json::Num(c.location.rho));
                    o.push("z", Json::Num(c.location.z));
                    o.push("theta3", Json::Num(angle_out(c.theta3, args.degrees)));
                    o.push(
                        "boundary",
                        Json::Str(
                            match c.boundary {
                                BoundaryRole::Internal => "internal",
                                BoundaryRole::External => "external",
                            }
                            .to_string(),
                        ),
                    );
                    o
                })
                .collect();
            report.push("cusps", Json::Arr(arr));
            report.push("surfaces", surfaces_json(p));
            let (id, gap) = rep.nearest_surface;
            let mut nearest = Json::obj();
            nearest.push("id", Json::Str(id.as_str().to_string()));
            nearest.push("gap", Json::Num(gap));
            report.push("nearest_surface", nearest);
            report.push("generic", Json::Bool(generic));
            if let Some(agree) = rep.agreement {
                report.push("agreement", Json::Bool(agree));
            }
            if rep.certification_failures > 0 {
                report.push(
                    "certification_failures",
                    Json::Int(rep.certification_failures as i64),
                );
            }
        }
        Err(err) => {
            // Non-generic geometry: report what the surfaces alone say.
            generic = false;
            report.push("domain_analytic", Json::Str(domain_str(&classify_domain(p))));
            report.push("cuspidal", Json::Bool(is_cuspidal(p)));
            report.push("surfaces", surfaces_json(p));
            let (id, gap) = distance_to_nearest_surface(p);
            let mut nearest = Json::obj();
            nearest.push("id", Json::Str(id.as_str().to_string()));
            nearest.push("gap", Json::Num(gap));
            report.push("nearest_surface", nearest);
            report.push("generic", Json::Bool(false));
            report.push("singularity_error", Json::Str(err.to_string()));
        }
    }
    report.push("artifacts", Json::Arr(vec![]));

    emit_report(&report, args.out.as_ref(), t0)?;
    Ok(if generic { EXIT_OK } else { EXIT_NON_GENERIC })
}

// ---------------------------------------------------------------------------
// plots
// ---------------------------------------------------------------------------

fn want(format: &Option<String>, what: &str) -> bool {
    match format.as_deref() {
        None => true,
        Some(f) => f.eq_ignore_ascii_case(what),
    }
}

fn cmd_plot_jointspace(args: PlotArgs) -> Result<i32> {
    let t0 = Instant::now();
    if args.samples < ortho3r::singularity::MIN_SAMPLES {
        anyhow::bail!("--samples must be at least {}", ortho3r::singularity::MIN_SAMPLES);
    }
    let p = args.params.params()?;
    let branches = match ortho3r::singularity::trace_singularity_curves(p, args.samples) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_NON_GENERIC);
        }
    };

    let mut artifacts = Vec::new();
    if want(&args.format, "csv") {
        let path = args.out.with_extension("csv");
        let mut csv = String::from("theta2,theta3,branch_kind\n");
        for b in &branches {
            for &(t2, t3) in &b.samples {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    json::fmt_f64(angle_out(t2, args.degrees)),
                    json::fmt_f64(angle_out(t3, args.degrees)),
                    b.kind.as_str()
                ));
            }
        }
        std::fs::write(&path, csv)?;
        artifacts.push(path);
    }
    if want(&args.format, "svg") {
        let pi = std::f64::consts::PI;
        let frame = svg::Frame { x_min: -pi, x_max: pi, y_min: -pi, y_max: pi };
        let mut doc = svg::SvgDoc::new(frame);
        for b in &branches {
            // x axis: theta2, y axis: theta3.
            let pts: Vec<(f64, f64)> = b.samples.iter().map(|&(t2, t3)| (t2, t3)).collect();
            let (stroke, dash) = match b.kind {
                BranchKind::CurvePlus => ("#1f6fb2", None),
                BranchKind::CurveMinus => ("#1fa05a", None),
                BranchKind::LinePlus => ("#c9452c", Some("10,6")),
                BranchKind::LineMinus => ("#8e44ad", Some("10,6")),
            };
            for chunk in svg::split_at_seams(&pts, pi, pi) {
                doc.polyline(&chunk, stroke, 3.0, dash);
            }
        }
        doc.axes("theta2 [rad]", "theta3 [rad]");
        let path = args.out.with_extension("svg");
        std::fs::write(&path, doc.render())?;
        artifacts.push(path);
    }

    let mut report = report_header("plot-jointspace", args.seed);
    report.push("params", params_json(p));
    report.push("branches", Json::Int(branches.len() as i64));
    report.push(
        "artifacts",
        Json::Arr(artifacts.iter().map(|p| Json::Str(p.display().to_string())).collect()),
    );
    emit_report(&report, None, t0)?;
    Ok(EXIT_OK)
}

fn analysis_or_exit(p: DhParams64, samples: usize) -> Result<SingularityAnalysis<f64>, i32> {
    match analyze_singularities(p, samples) {
        Ok(a) => Ok(a),
        Err(e) => {
            eprintln!("error: {e}");
            Err(EXIT_NON_GENERIC)
        }
    }
}

fn cmd_plot_workspace(args: PlotArgs) -> Result<i32> {
    let t0 = Instant::now();
    if args.samples < ortho3r::singularity::MIN_SAMPLES {
        anyhow::bail!("--samples must be at least {}", ortho3r::singularity::MIN_SAMPLES);
    }
    let p = args.params.params()?;
    let analysis = match analysis_or_exit(p, args.samples) {
        Ok(a) => a,
        Err(code) => return Ok(code),
    };
    let b = &analysis.boundaries;

    let mut rows: Vec<(f64, f64, &str)> = Vec::new();
    for poly in &b.internal {
        rows.extend(poly.iter().map(|q| (q.rho, q.z, "internal")));
    }
    for poly in &b.external {
        rows.extend(poly.iter().map(|q| (q.rho, q.z, "external")));
    }
    for q in &b.isolated_points {
        rows.push((q.rho, q.z, "isolated_point"));
    }
    for c in &analysis.cusps {
        rows.push((c.location.rho, c.location.z, "cusp"));
    }

    let mut artifacts = Vec::new();
    if want(&args.format, "csv") {
        let path = args.out.with_extension("csv");
        let mut csv = String::from("rho,z,role\n");
        for (rho, z, role) in &rows {
            csv.push_str(&format!("{},{},{role}\n", json::fmt_f64(*rho), json::fmt_f64(*z)));
        }
        std::fs::write(&path, csv)?;
        artifacts.push(path);
    }
    if want(&args.format, "svg") {
        let reach = p.reach();
        let frame = svg::Frame { x_min: 0.0, x_max: 1.05 * reach, y_min: -1.05 * reach, y_max: 1.05 * reach };
        let mut doc = svg::SvgDoc::new(frame);
        for poly in &b.internal {
            let pts: Vec<(f64, f64)> = poly.iter().map(|q| (q.rho, q.z)).collect();
            let mut closed = pts.clone();
            if let Some(&first) = pts.first() {
                closed.push(first);
            }
            doc.polyline(&closed, "#1f6fb2", 3.0, None);
        }
        for poly in &b.external {
            let pts: Vec<(f64, f64)> = poly.iter().map(|q| (q.rho, q.z)).collect();
            let mut closed = pts.clone();
            if let Some(&first) = pts.first() {
                closed.push(first);
            }
            doc.polyline(&closed, "#c9452c", 3.0, None);
        }
        for q in &b.isolated_points {
            doc.cross(q.rho, q.z, 9.0, "#1fa05a");
        }
        for c in &analysis.cusps {
            doc.circle(c.location.rho, c.location.z, 7.0, "#e8a117");
        }
        doc.axes("rho", "z");
        let path = args.out.with_extension("svg");
        std::fs::write(&path, doc.render())?;
        artifacts.push(path);
    }

    let mut report = report_header("plot-workspace", args.seed);
    report.push("params", params_json(p));
    report.push("cusp_count", Json::Int(analysis.cusps.len() as i64));
    report.push("isolated_points", Json::Int(b.isolated_points.len() as i64));
    report.push(
        "artifacts",
        Json::Arr(artifacts.iter().map(|p| Json::Str(p.display().to_string())).collect()),
    );
    emit_report(&report, None, t0)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn domain_color(d: Option<DomainId>) -> &'static str {
    match d {
        Some(DomainId::D1) => "#4e79a7",
        Some(DomainId::D2) => "#f28e2b",
        Some(DomainId::D3) => "#59a14f",
        Some(DomainId::D4) => "#e15759",
        Some(DomainId::D5) => "#b07aa1",
        None => "#bbbbbb",
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    let t0 = Instant::now();
    if args.resolution < 32 {
        anyhow::bail!("resolution must be at least 32");
    }
    if !(args.r2 > 0.0 && args.d2 > 0.0 && args.d3_max > 0.0 && args.d4_max > 0.0) {
        anyhow::bail!("r2, d2 and the range maxima must be positive");
    }
    let res = args.resolution;
    let grid = GridSpec::new(256).expect("fixed oracle grid");

    let cell = |k: usize, max: f64| (k as f64 + 1.0) * max / res as f64;
    let mut labels: Vec<Option<DomainId>> = Vec::with_capacity(res * res);
    let mut csv = String::from("d3,d4,domain,cuspidal\n");
    for i in 0..res {
        let d3 = cell(i, args.d3_max);
        for j in 0..res {
            let d4 = cell(j, args.d4_max);
            let p = DhParams64::new(args.d2, d3, d4, args.r2).expect("positive grid cell");
            let label = if args.empirical {
                empirical_domain(p, &grid).ok().map(|e| e.domain)
            } else {
                classify_domain(p).domain()
            };
            labels.push(label);
            csv.push_str(&format!(
                "{},{},{},{}\n",
                json::fmt_f64(d3),
                json::fmt_f64(d4),
                label.map(|d| d.as_str()).unwrap_or("NonGeneric"),
                is_cuspidal(p)
            ));
        }
    }

    let mut artifacts = Vec::new();
    if want(&args.format, "csv") {
        let path = args.out.with_extension("csv");
        std::fs::write(&path, &csv)?;
        artifacts.push(path);
    }
    if want(&args.format, "svg") {
        let frame = svg::Frame { x_min: 0.0, x_max: args.d3_max, y_min: 0.0, y_max: args.d4_max };
        let mut doc = svg::SvgDoc::new(frame);
        let (dx, dy) = (args.d3_max / res as f64, args.d4_max / res as f64);
        for i in 0..res {
            for j in 0..res {
                let d3 = cell(i, args.d3_max);
                let d4 = cell(j, args.d4_max);
                doc.rect_data(d3 - dx, d4 - dy, d3, d4, domain_color(labels[i * res + j]));
            }
        }
        // Overlay the separating surfaces.
        let n_ov = 600;
        let mut c1_pts = Vec::new();
        let mut c2_pts = Vec::new();
        let mut c3_pts = Vec::new();
        let mut c4_pts = Vec::new();
        for k in 1..=n_ov {
            let d3 = k as f64 * args.d3_max / n_ov as f64;
            let s = surfaces(args.d2, d3, args.r2);
            c1_pts.push((d3, s.c1));
            c2_pts.push((d3, s.c2));
            if let Some(c3) = s.c3 {
                if c3 <= args.d4_max * 1.2 {
                    c3_pts.push((d3, c3));
                }
            }
            if let Some(c4) = s.c4 {
                if c4 <= args.d4_max * 1.2 {
                    c4_pts.push((d3, c4));
                }
            }
        }
        for (pts, label) in [(&c1_pts, "C1"), (&c2_pts, "C2"), (&c3_pts, "C3"), (&c4_pts, "C4")] {
            doc.polyline(pts, "#111111", 2.5, Some("7,5"));
            if let Some(&(x, y)) = pts.iter().filter(|(_, y)| *y < args.d4_max * 0.97).last() {
                let f = doc.frame();
                let (px, py) = (f.x(x).min(svg::MARGIN + svg::PLOT - 24.0), f.y(y) - 8.0);
                doc.text(px, py, 22.0, label, "end");
            }
        }
        for (k, d) in [DomainId::D1, DomainId::D2, DomainId::D3, DomainId::D4, DomainId::D5]
            .iter()
            .enumerate()
        {
            let y = svg::MARGIN + 20.0 + 30.0 * k as f64;
            doc.rect_abs(svg::MARGIN + svg::PLOT - 96.0, y, 20.0, 20.0, domain_color(Some(*d)));
            doc.text(svg::MARGIN + svg::PLOT - 68.0, y + 17.0, 22.0, d.as_str(), "start");
        }
        doc.axes("d3", "d4");
        let path = args.out.with_extension("svg");
        std::fs::write(&path, doc.render())?;
        artifacts.push(path);
    }

    let mut seen: Vec<&str> = labels.iter().map(|l| l.map(|d| d.as_str()).unwrap_or("NonGeneric")).collect();
    seen.sort_unstable();
    seen.dedup();

    let mut report = report_header("sweep", args.seed);
    let mut ranges = Json::obj();
    ranges.push("d2", Json::Num(args.d2));
    ranges.push("r2", Json::Num(args.r2));
    ranges.push("d3_max", Json::Num(args.d3_max));
    ranges.push("d4_max", Json::Num(args.d4_max));
    ranges.push("resolution", Json::Int(res as i64));
    report.push("grid", ranges);
    report.push("empirical", Json::Bool(args.empirical));
    report.push(
        "domains_present",
        Json::Arr(seen.iter().map(|s| Json::Str(s.to_string())).collect()),
    );
    report.push(
        "artifacts",
        Json::Arr(artifacts.iter().map(|p| Json::Str(p.display().to_string())).collect()),
    );
    emit_report(&report, None, t0)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

fn cmd_check(args: CheckArgs) -> Result<i32> {
    use rand::{Rng, SeedableRng};
    let t0 = Instant::now();
    let grid = GridSpec::new(args.resolution).context("invalid resolution")?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);

    let mut failures: Vec<Json> = Vec::new();
    let mut non_generic = 0usize;
    let mut empirical_checked = 0usize;

    for i in 0..args.draws {
        let d3 = rng.gen_range(0.1..=4.0);
        let d4 = rng.gen_range(0.1..=4.0);
        let r2 = rng.gen_range(0.1..=4.0);
        let p = DhParams64::new(1.0, d3, d4, r2).expect("positive draw");
        let Some(domain) = classify_domain(p).domain() else {
            non_generic += 1;
            continue;
        };
        let mut problems: Vec<String> = Vec::new();

        let cusps = match analyze_singularities(p, DEFAULT_SAMPLES) {
            Ok(a) => {
                if !a.certification_failures.is_empty() {
                    problems.push(format!(
                        "{} cusp certification failures",
                        a.certification_failures.len()
                    ));
                }
                let split = a.cusps.iter().any(|c| c.boundary == BoundaryRole::External)
                    && a.cusps.iter().any(|c| c.boundary == BoundaryRole::Internal);
                let expect = domain.semantics();
                if a.cusps.len() != expect.cusp_count {
                    problems.push(format!(
                        "cusp count {} but domain {domain:?} expects {}",
                        a.cusps.len(),
                        expect.cusp_count
                    ));
                }
                if !a.cusps.is_empty() && split != expect.cusps_split {
                    problems.push(format!("boundary split {split} unexpected"));
                }
                Some(a.cusps.len())
            }
            Err(e) => {
                problems.push(format!("singularity analysis failed: {e}"));
                None
            }
        };

        if let Some(n) = cusps {
            if is_cuspidal(p) != (n >= 1) {
                problems.push(format!(
                    "cuspidality condition says {} but {n} cusps found",
                    is_cuspidal(p)
                ));
            }
            match cusp_brute(p, &grid) {
                Ok(b) => {
                    if b.count() != n {
                        problems.push(format!("brute cusp count {} vs analytic {n}", b.count()));
                    }
                }
                Err(e) => problems.push(format!("brute cusp scan failed: {e}")),
            }
        }

        if args.empirical_every > 0 && i % args.empirical_every == 0 {
            empirical_checked += 1;
            match empirical_domain(p, &grid) {
                Ok(e) => {
                    if e.domain != domain {
                        problems.push(format!(
                            "empirical domain {:?} vs analytic {domain:?}",
                            e.domain
                        ));
                    }
                }
                Err(e) => problems.push(format!("empirical labelling failed: {e}")),
            }
        }

        if !problems.is_empty() {
            let mut o = Json::obj();
            o.push("draw", Json::Int(i as i64));
            o.push("params", params_json(p));
            o.push("domain", Json::Str(domain.as_str().to_string()));
            o.push(
                "problems",
                Json::Arr(problems.into_iter().map(Json::Str).collect()),
            );
            failures.push(o);
        }
    }

    // Which sign of the binary/quaternary surface radicand matches the
    // empirically bisected cusp-birth transition.
    let shipped_c1 = surfaces(1.0, 2.0, 1.0).c1;
    let variant_c1 = c1_variant(1.0, 2.0, 1.0);
    let c1_check = transition_bisect_between(1.0, 2.0, 1.0, (0.1, 0.9), &grid);
    let mut c1_json = Json::obj();
    c1_json.push("shipped_c1", Json::Num(shipped_c1));
    c1_json.push("variant_c1", Json::Num(variant_c1));
    let mut c1_ok = false;
    match c1_check {
        Ok(d4_star) => {
            let to_shipped = (d4_star - shipped_c1).abs();
            let to_variant = (d4_star - variant_c1).abs();
            let verdict = if to_shipped < to_variant { "shipped" } else { "variant" };
            c1_ok = verdict == "shipped" && to_shipped < 1e-3 * shipped_c1.max(1.0);
            c1_json.push("empirical_d4", Json::Num(d4_star));
            c1_json.push("verdict", Json::Str(verdict.to_string()));
        }
        Err(e) => {
            c1_json.push("error", Json::Str(e.to_string()));
        }
    }
    if !c1_ok {
        let mut o = Json::obj();
        o.push("check", Json::Str("c1_transition".to_string()));
        o.push(
            "problems",
            Json::Arr(vec![Json::Str(
                "empirical cusp-birth transition does not match the shipped c1 form".to_string(),
            )]),
        );
        failures.push(o);
    }

    let pass = failures.is_empty();
    let mut report = report_header("check", args.seed);
    report.push("draws", Json::Int(args.draws as i64));
    report.push("non_generic", Json::Int(non_generic as i64));
    report.push("empirical_checked", Json::Int(empirical_checked as i64));
    report.push("c1_transition", c1_json);
    report.push("pass", Json::Bool(pass));
    report.push("failures", Json::Arr(failures));
    report.push("artifacts", Json::Arr(vec![]));
    emit_report(&report, args.out.as_ref(), t0)?;
    Ok(if pass { EXIT_OK } else { EXIT_VALIDATION })
}
