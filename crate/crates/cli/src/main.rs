//! Command-line surface for the norm-angle library.
//!
//! Subcommands: `gfunc`, `angle`, `scan`, `probe`, `polar`, `extremes`,
//! `convexity`, `paper`. Norms are given in the expression grammar
//! (`lp(1, w=[2,1])`, `quad([[3,0],[0,1]])`, `sum(...)`, `max(...)`,
//! `scale(...)`, `polygon([[x,y],...])`, `dual(...)`); vectors as
//! comma-separated reals. Exit codes: 0 success, 1 reference-suite failure,
//! 2 parse error, 3 math-domain error.

use clap::{Parser, Subcommand, ValueEnum};
use normangle::equiv::{divergence_probe, diverging_verdict, scan_constant, ProbeSchedule, ScanConfig};
use normangle::error::Error;
use normangle::geometry::{compare_extreme_rays, convexity_report, vertex_angles, ConvexityConfig};
use normangle::gfunc::{g_functional_with, norm_angle, GOptions, GPair};
use normangle::norms::{parse_norm, Vector};
use normangle::plane::PolarProfile;
use normangle::regress::{self, RegressOptions};
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Table,
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "normangle", version, about = "g-functionals, norm angles, and angular equivalence of norms on R^n")]
struct Cli {
    /// Seed for all randomized sampling (scans are deterministic per seed).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Smoothness / reporting tolerance.
    #[arg(long, global = true, default_value_t = 1e-6, value_parser = positive_f64)]
    tol: f64,
    /// Angle-grid density for planar scans (>= 8).
    #[arg(long, global = true, default_value_t = 720, value_parser = grid_size)]
    grid: usize,
    /// Local refinement rounds around scan maxima.
    #[arg(long, global = true, default_value_t = 3)]
    refine: usize,
    /// Output format (polar always writes CSV).
    #[arg(long, global = true, value_enum, default_value_t = Output::Table)]
    output: Output,
    /// Start factor for the one-sided limit schedule t_k = t0 * 4^-k.
    #[arg(long, global = true, default_value_t = 0.1, value_parser = positive_f64)]
    t0: f64,
    /// Write the artifact to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// One-sided g-functionals, g, cos(theta), tan^2(theta/2) for a pair.
    Gfunc {
        norm: String,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<String>,
        /// Boundary direction angle for x (radians, 2D).
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        /// Boundary direction angle for y (radians, 2D).
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        /// Skip the analytic fast paths.
        #[arg(long, default_value_t = false)]
        numeric: bool,
    },
    /// Norm angle theta(x, y) and tan(theta/2).
    Angle {
        norm: String,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
    },
    /// Scan the angular-equivalence constant of two norms.
    Scan {
        norm1: String,
        norm2: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Direction-pair count for dim >= 3 scans.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Ratio schedule along the collapsing family y = u + s v.
    Probe {
        norm1: String,
        norm2: String,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, default_value_t = 0.1, value_parser = positive_f64)]
        s0: f64,
        #[arg(long, default_value_t = 0.1, value_parser = positive_f64)]
        factor: f64,
        #[arg(long, default_value_t = 5)]
        steps: usize,
    },
    /// Polar boundary profile CSV: t, r, phi_minus, phi_plus, smooth_flag.
    Polar { norm: String },
    /// Corner rays and flat faces of one ball, or a ray comparison of two.
    Extremes {
        norm1: String,
        norm2: Option<String>,
        /// Corner-jump detection threshold (radians).
        #[arg(long, default_value_t = 1e-3, value_parser = positive_f64)]
        vertex_tol: f64,
    },
    /// Strict-convexity witness search plus sampled convexity moduli.
    Convexity {
        norm: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Comma-separated eps grid in (0, 2].
        #[arg(long, default_value = "0.1,0.25,0.5,1.0,1.5")]
        eps: String,
        #[arg(long, default_value_t = 720)]
        samples: usize,
        #[arg(long, default_value_t = 20_000)]
        witness_samples: usize,
    },
    /// Run the built-in reference suite; nonzero exit if any row fails.
    Paper {
        /// Restrict to one group id (e.g. example-2.7, wielandt).
        #[arg(long)]
        only: Option<String>,
        /// Randomized cases per property row.
        #[arg(long, default_value_t = 10_000)]
        cases: usize,
        /// Seeded SPD pairs for the pencil-bound rows.
        #[arg(long, default_value_t = 20)]
        spd_pairs: usize,
    },
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive and finite, got {v}"))
    }
}

fn grid_size(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 8 {
        Ok(v)
    } else {
        Err(format!("grid must be at least 8, got {v}"))
    }
}

fn parse_vector(text: &str) -> Result<Vector, Error> {
    let coords: Result<Vec<f64>, Error> = text
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Error::Syntax { pos: 0, msg: format!("bad coordinate '{part}'") })
        })
        .collect();
    Vector::new(coords?)
}

/// Resolve either `--x a,b` or the angle form into a vector.
fn resolve_vector(
    name: &str,
    coords: &Option<String>,
    angle: &Option<f64>,
) -> Result<Vector, Error> {
    match (coords, angle) {
        (Some(text), None) => parse_vector(text),
        (None, Some(t)) => Vector::new(vec![t.cos(), t.sin()]),
        _ => Err(Error::Domain(format!("give exactly one of --{name} or its angle form"))),
    }
}

struct Sink {
    out: Option<PathBuf>,
}

impl Sink {
    fn write(&self, content: &str) -> std::io::Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, content),
            None => std::io::stdout().lock().write_all(content.as_bytes()),
        }
    }
}

fn fmt_extended(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn gpair_table(pair: &GPair) -> String {
    let method = match pair.method {
        normangle::gfunc::Method::Analytic => "analytic",
        normangle::gfunc::Method::Numeric => "numeric",
    };
    format!(
        "g_minus        {}\ng_plus         {}\ng              {}\ncos_theta      {}\n\
         tan_half_sq    {}\nbracket_width  {}\nmethod         {method}\n",
        pair.g_minus,
        pair.g_plus,
        pair.g,
        pair.cos_theta,
        fmt_extended(pair.tan_half_sq),
        pair.bracket_width,
    )
}

struct TanHalf(f64);

impl serde::Serialize for TanHalf {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        normangle::equiv::serialize_extended(&self.0, s)
    }
}

fn run(cli: &Cli) -> Result<i32, Error> {
    let sink = Sink { out: cli.out.clone() };
    let g_opts = GOptions { t0_factor: cli.t0, ..GOptions::default() };
    let io_err = |e: std::io::Error| Error::Domain(format!("write failed: {e}"));
    match &cli.cmd {
        Cmd::Gfunc { norm, x, y, alpha, beta, numeric } => {
            let n = parse_norm(norm)?;
            let xv = resolve_vector("x", x, alpha)?;
            let yv = resolve_vector("y", y, beta)?;
            let opts = GOptions { force_numeric: *numeric, ..g_opts };
            let pair = g_functional_with(&n, &xv, &yv, &opts)?;
            let text = match cli.output {
                Output::Json => format!("{}\n", serde_json::to_string_pretty(&pair).unwrap()),
                _ => gpair_table(&pair),
            };
            sink.write(&text).map_err(io_err)?;
            Ok(0)
        }
        Cmd::Angle { norm, x, y, alpha, beta } => {
            let n = parse_norm(norm)?;
            let xv = resolve_vector("x", x, alpha)?;
            let yv = resolve_vector("y", y, beta)?;
            let (theta, tan_half) = norm_angle(&n, &xv, &yv)?;
            let text = match cli.output {
                Output::Json => format!(
                    "{{\n  \"theta\": {theta},\n  \"tan_half\": {}\n}}\n",
                    serde_json::to_string(&TanHalf(tan_half)).unwrap()
                ),
                _ => format!("theta     {theta}\ntan_half  {}\n", fmt_extended(tan_half)),
            };
            sink.write(&text).map_err(io_err)?;
            Ok(0)
        }
        Cmd::Scan { norm1, norm2, dim, samples } => {
            let n1 = parse_norm(norm1)?;
            let n2 = parse_norm(norm2)?;
            let cfg = ScanConfig {
                grid: cli.grid,
                samples: *samples,
                refine_rounds: cli.refine,
                seed: cli.seed,
                smooth_tol: cli.tol,
                g_opts: g_opts.clone(),
            };
            let report = scan_constant(&n1, &n2, *dim, &cfg)?;
            let verdict = if report.diverging {
                "diverging: yes"
            } else if report.c_hat.is_finite() {
                "equivalent-consistent"
            } else {
                "unbounded ratio, not angularly equivalent"
            };
            println!("c_hat ~ {}, {verdict}", fmt_extended(report.c_hat));
            let json = format!("{}\n", serde_json::to_string_pretty(&report).unwrap());
            sink.write(&json).map_err(io_err)?;
            Ok(0)
        }
        Cmd::Probe { norm1, norm2, u, v, s0, factor, steps } => {
            let n1 = parse_norm(norm1)?;
            let n2 = parse_norm(norm2)?;
            let uv = parse_vector(u)?;
            let vv = parse_vector(v)?;
            let schedule = ProbeSchedule { s0: *s0, factor: *factor, steps: *steps };
            let ratios = divergence_probe(&n1, &n2, &uv, &vv, &schedule)?;
            let verdict = diverging_verdict(&ratios);
            let text = match cli.output {
                Output::Json => {
                    let rows: Vec<serde_json::Value> = ratios
                        .iter()
                        .map(|&(s, r)| {
                            let ratio = if r.is_finite() {
                                serde_json::json!(r)
                            } else {
                                serde_json::json!("inf")
                            };
                            serde_json::json!([s, ratio])
                        })
                        .collect();
                    format!(
                        "{}\n",
                        serde_json::to_string_pretty(&serde_json::json!({
                            "schedule": rows,
                            "diverging": verdict,
                        }))
                        .unwrap()
                    )
                }
                _ => {
                    let mut t = String::from("s,ratio\n");
                    for &(s, r) in &ratios {
                        t.push_str(&format!("{s},{}\n", fmt_extended(r)));
                    }
                    t.push_str(&format!("diverging: {}\n", if verdict { "yes" } else { "no" }));
                    t
                }
            };
            sink.write(&text).map_err(io_err)?;
            Ok(0)
        }
        Cmd::Polar { norm } => {
            let n = parse_norm(norm)?;
            let profile = PolarProfile::sample(&n, cli.grid)?;
            let mut buf = Vec::new();
            profile.write_csv(&mut buf, cli.tol).map_err(io_err)?;
            sink.write(&String::from_utf8(buf).unwrap()).map_err(io_err)?;
            Ok(0)
        }
        Cmd::Extremes { norm1, norm2, vertex_tol } => {
            let n1 = parse_norm(norm1)?;
            match norm2 {
                Some(norm2) => {
                    let n2 = parse_norm(norm2)?;
                    let cmp = compare_extreme_rays(&n1, &n2, *vertex_tol)?;
                    println!(
                        "{}",
                        if cmp.consistent {
                            "rays match: consistent with angular equivalence"
                        } else {
                            "ray mismatch: not angularly equivalent"
                        }
                    );
                    let json = format!("{}\n", serde_json::to_string_pretty(&cmp).unwrap());
                    sink.write(&json).map_err(io_err)?;
                }
                None => {
                    let rays = vertex_angles(&n1, *vertex_tol)?;
                    let json = format!("{}\n", serde_json::to_string_pretty(&rays).unwrap());
                    sink.write(&json).map_err(io_err)?;
                }
            }
            Ok(0)
        }
        Cmd::Convexity { norm, dim, eps, samples, witness_samples } => {
            let n = parse_norm(norm)?;
            let eps_grid: Result<Vec<f64>, Error> = eps
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Syntax { pos: 0, msg: format!("bad eps '{p}'") })
                })
                .collect();
            let cfg = ConvexityConfig {
                eps_grid: eps_grid?,
                samples: *samples,
                witness_samples: *witness_samples,
                witness_tol: 1e-9,
                seed: cli.seed,
            };
            let report = convexity_report(&n, *dim, &cfg)?;
            println!(
                "strictly_convex = {}{}",
                report.strictly_convex,
                if report.witness.is_some() { " (witness found)" } else { "" }
            );
            let json = format!("{}\n", serde_json::to_string_pretty(&report).unwrap());
            sink.write(&json).map_err(io_err)?;
            Ok(0)
        }
        Cmd::Paper { only, cases, spd_pairs } => {
            let opts = RegressOptions {
                seed: cli.seed,
                grid: cli.grid,
                samples: 10_000,
                refine_rounds: cli.refine,
                cases: *cases,
                spd_pairs: *spd_pairs,
            };
            if let Some(id) = only {
                if !regress::GROUP_IDS.contains(&id.as_str()) {
                    return Err(Error::Domain(format!(
                        "unknown group '{id}'; available: {}",
                        regress::GROUP_IDS.join(", ")
                    )));
                }
            }
            let rows = regress::run(only.as_deref(), &opts)?;
            let mut failures = 0usize;
            let mut text = String::new();
            text.push_str(&format!(
                "{:<16} {:<58} {:>14} {:>26} {:>6}\n",
                "id", "check", "value", "accepted range", "status"
            ));
            for r in &rows {
                if !r.pass {
                    failures += 1;
                }
                text.push_str(&format!(
                    "{:<16} {:<58} {:>14} {:>26} {:>6}\n",
                    r.id,
                    r.label,
                    format!("{:.6e}", r.value),
                    format!("[{:.3e}, {:.3e}]", r.lo, r.hi),
                    if r.pass { "PASS" } else { "FAIL" }
                ));
            }
            text.push_str(&format!("{} rows, {} failures\n", rows.len(), failures));
            match cli.output {
                Output::Json => {
                    sink.write(&format!("{}\n", serde_json::to_string_pretty(&rows).unwrap()))
                        .map_err(io_err)?;
                }
                _ => sink.write(&text).map_err(io_err)?,
            }
            Ok(if failures == 0 { 0 } else { 1 })
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_parse() {
                2
            } else {
                3
            }
        }
    };
    std::process::exit(code);
}
