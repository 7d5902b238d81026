use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, CommandFactory, Parser, Subcommand};
use serde_json::{json, Value};

use sbm_embed::empirical::{fit_embeddings, gap_report, read_edge_list, sample_graph, write_edge_list, FitOptions};
use sbm_embed::linkpred::density_from_average_degree;
use sbm_embed::sweep::{sweep, with_jobs, write_csv, AxisRange, SweepSpec, DEFAULT_H};
use sbm_embed::{
    classify, densest_member, densify_rates, eta_alt, eta_of, family_of, member_at, predict_baseline,
    predict_interpolated, recover_from_density, sample_members, solve_gram, Error, Family, Gram, Graphon, Options,
    RegionTag, Solution,
};

#[derive(Parser)]
#[command(name = "sbm-embed", version, about = "Limiting embedding grams of two-block SBM graphons")]
struct Cli {
    /// Relabel communities so that community 1 is the larger one (a >= 1/2) before computing.
    #[arg(long, global = true)]
    normalize: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regime of (p, q, r): dense, sparse or middle.
    Classify {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Solve for the gram of a graphon and report its KKT certificate.
    Embed {
        #[command(flatten)]
        g: GraphonArgs,
        /// Certificate tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Equivalence class of a gram, given directly or through a graphon.
    Family {
        #[command(flatten)]
        src: FamilySource,
        #[arg(long, default_value_t = 5)]
        samples: usize,
    },
    /// Single family member at a given delta.
    MemberAt {
        #[command(flatten)]
        src: FamilySource,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
    },
    /// Sample a graph, fit embeddings and compare with the analytic gram.
    Verify {
        #[command(flatten)]
        g: GraphonArgs,
        #[arg(long, required_unless_present = "graph_in")]
        n: Option<usize>,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        /// Write the sampled graph as an edge list.
        #[arg(long, conflicts_with = "graph_in")]
        graph_out: Option<PathBuf>,
        /// Fit on this edge list instead of sampling.
        #[arg(long)]
        graph_in: Option<PathBuf>,
    },
    /// Link prediction from the embedding of a graphon.
    #[command(group(ArgGroup::new("mode").required(true).args(["baseline", "interp", "density", "avg_degree"])))]
    Linkpred {
        #[command(flatten)]
        g: GraphonArgs,
        #[arg(long)]
        baseline: bool,
        /// Interpolate from the graphon (0) to the densest member (1).
        #[arg(long)]
        interp: Option<f64>,
        #[arg(long)]
        density: Option<f64>,
        #[arg(long, requires = "n")]
        avg_degree: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Sweep eta over a (p, r) grid and write a CSV.
    EtaSweep {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, value_parser = parse_range)]
        p_range: (f64, f64),
        #[arg(long, value_parser = parse_range)]
        r_range: (f64, f64),
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        partials: bool,
        #[arg(long, requires = "partials")]
        h: Option<f64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone, Copy)]
struct GraphonArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    r: f64,
}

#[derive(Args, Clone, Copy)]
struct FamilySource {
    #[arg(long)]
    a: f64,
    #[arg(long, requires_all = ["q", "r"], conflicts_with_all = ["k1", "k2", "k3"])]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["k2", "k3"])]
    k1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    k2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    k3: Option<f64>,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(lo)?, num(hi)?))
}

fn usage_error(msg: &str) -> ! {
    Cli::command().error(ErrorKind::ArgumentConflict, msg).exit()
}

fn graphon(args: GraphonArgs, normalize: bool) -> Result<Graphon, Error> {
    let g = Graphon::new(args.a, args.p, args.q, args.r)?;
    Ok(if normalize && g.a < 0.5 { g.swapped() } else { g })
}

fn solve(g: &Graphon, tol: Option<f64>) -> Result<Solution, Error> {
    let mut opts = Options::default();
    if let Some(t) = tol {
        opts.certificate_tol = t;
    }
    solve_gram(g, &opts)
}

/// The gram to build a family from, plus the community fraction to use.
fn family_gram(src: FamilySource, normalize: bool) -> Result<(Gram, f64), Error> {
    match (src.p, src.q, src.r, src.k1, src.k2, src.k3) {
        (Some(p), Some(q), Some(r), None, None, None) => {
            let g = graphon(GraphonArgs { a: src.a, p, q, r }, normalize)?;
            Ok((solve(&g, None)?.gram, g.a))
        }
        (None, None, None, Some(k1), Some(k2), Some(k3)) => {
            let k = Gram::new(k1, k2, k3);
            Ok(if normalize && src.a < 0.5 { (k.swapped(), 1.0 - src.a) } else { (k, src.a) })
        }
        _ => usage_error("give either --p --q --r or --k1 --k2 --k3"),
    }
}

fn gram_json(k: &Gram) -> Value {
    json!([k.k1, k.k2, k.k3])
}

fn family_json(f: &Family) -> Value {
    json!({
        "K": gram_json(&f.gram),
        "eta": f.eta,
        "s_fam": f.s_fam,
        "anchor": [f.anchor.p, f.anchor.q, f.anchor.r],
        "delta_min": f.delta_min,
        "binding_constraint": f.binding.as_str(),
    })
}

fn rates_json(f: &Family) -> Value {
    let rates = densify_rates(f);
    json!({
        "community1": rates.community1,
        "community2": rates.community2,
        "balance": rates.balance.as_str(),
    })
}

fn run(cli: Cli) -> Result<Value, Error> {
    let normalize = cli.normalize;
    let mut out = match cli.command {
        Command::Classify { p, q, r, tol } => {
            let reg = classify(p, q, r, tol)?;
            json!({
                "region": reg.tag.as_str(),
                "boundary_dense": reg.boundary_dense,
                "boundary_sparse": reg.boundary_sparse,
            })
        }
        Command::Embed { g, tol } => {
            let g = graphon(g, normalize)?;
            let region = classify(g.p, g.q, g.r, 1e-9)?;
            let sol = solve(&g, tol)?;
            let c = &sol.certificate;
            let (eta, densest) = if region.tag == RegionTag::Middle {
                let eta = match eta_of(&sol.gram, g.a) {
                    Err(Error::EtaUndefined(_)) => eta_alt(&sol.gram, &g).ok(),
                    other => other.ok(),
                };
                (eta, densest_member(&sol.gram).ok())
            } else {
                (None, None)
            };
            json!({
                "region": region.tag.as_str(),
                "K": gram_json(&sol.gram),
                "mu": c.duals(),
                "kkt_residual_max": c.max_residual(),
                "eta": eta,
                "densest": densest,
            })
        }
        Command::Family { src, samples } => {
            let (k, a) = family_gram(src, normalize)?;
            let f = family_of(&k, a)?;
            let members: Vec<Value> = sample_members(&f, samples)?
                .into_iter()
                .map(|(delta, m)| json!({"delta": delta, "p": m.p, "q": m.q, "r": m.r}))
                .collect();
            let mut v = family_json(&f);
            v["members"] = Value::Array(members);
            v
        }
        Command::MemberAt { src, delta } => {
            let (k, a) = family_gram(src, normalize)?;
            let f = family_of(&k, a)?;
            let m = member_at(&f, delta)?;
            json!({"delta": delta, "p": m.p, "q": m.q, "r": m.r})
        }
        Command::Verify {
            g,
            n,
            d,
            seed,
            epochs,
            lr,
            graph_out,
            graph_in,
        } => {
            let g = graphon(g, normalize)?;
            let k = solve(&g, None)?.gram;
            let graph = match graph_in {
                Some(path) => read_edge_list(BufReader::new(File::open(path)?))?,
                None => sample_graph(&g, n.expect("clap enforces --n"), seed)?,
            };
            if let Some(path) = graph_out {
                write_edge_list(&graph, BufWriter::new(File::create(path)?))?;
            }
            let defaults = FitOptions::default();
            let opts = FitOptions {
                seed,
                epochs: epochs.unwrap_or(defaults.epochs),
                learning_rate: lr,
                ..defaults
            };
            let fit = fit_embeddings(&graph, d, &opts)?;
            let report = gap_report(&fit, &graph, &k);
            json!({
                "analytic_K": gram_json(&k),
                "empirical_block_gram": gram_json(&report.block_gram),
                "gap": report.gap,
                "epochs_run": fit.epochs_run,
                "final_loss": fit.final_loss(),
            })
        }
        Command::Linkpred {
            g,
            baseline,
            interp,
            density,
            avg_degree,
            n,
        } => {
            let g = graphon(g, normalize)?;
            let k = solve(&g, None)?.gram;
            let family = family_of(&k, g.a).ok();
            let (predicted, delta) = if baseline {
                let delta = family.as_ref().map(|_| 0.0);
                (predict_baseline(&k), delta)
            } else {
                let (m, delta) = match (interp, density, avg_degree) {
                    (Some(t), _, _) => predict_interpolated(&k, g.a, &g, t)?,
                    (_, Some(rho), _) => recover_from_density(&k, g.a, rho)?,
                    (_, _, Some(deg)) => {
                        let rho = density_from_average_degree(deg, n.expect("clap enforces --n"))?;
                        recover_from_density(&k, g.a, rho)?
                    }
                    _ => unreachable!("clap requires one mode"),
                };
                ([m.p, m.q, m.r], Some(delta))
            };
            json!({
                "predicted": predicted,
                "delta": delta,
                "rates": family.as_ref().map(rates_json),
            })
        }
        Command::EtaSweep {
            a,
            q,
            p_range,
            r_range,
            steps,
            partials,
            h,
            jobs,
            out,
        } => {
            let spec = SweepSpec {
                a,
                q,
                p_axis: AxisRange::new(p_range.0, p_range.1, steps)?,
                r_axis: AxisRange::new(r_range.0, r_range.1, steps)?,
                partials_h: partials.then(|| h.unwrap_or(DEFAULT_H)),
            };
            let grid = with_jobs(jobs, || sweep(&spec))??;
            write_csv(&grid, BufWriter::new(File::create(&out)?))?;
            json!({
                "cells": grid.cells.len(),
                "middle_cells": grid.middle_cells().count(),
                "out": out.display().to_string(),
            })
        }
    };
    if normalize {
        out["normalized"] = Value::Bool(true);
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json values serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
