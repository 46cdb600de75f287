//! The four subcommands. Each returns what it wrote so tests can inspect it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use log::{info, warn};
use rayon::prelude::*;

use rpdc::{fit_linear_rate, kkt_residual, Problem, Rcd, RcdParams, Saddle};

use crate::config::{Algorithm, ExperimentConfig};
use crate::instance::Instance;
use crate::plot::LogPlot;
use crate::run::{cells, run_cell, Cell, CellResult};

pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub jobs: usize,
    pub seed_offset: u64,
}

impl Context {
    fn saddle_dir(&self) -> PathBuf {
        self.out.join("saddles")
    }

    fn prepare(&self) -> Result<Instance> {
        self.cfg.validate()?;
        std::fs::create_dir_all(&self.out)
            .with_context(|| format!("cannot create output directory {}", self.out.display()))?;
        Instance::load(&self.cfg.problem)
    }

    /// Runs `cells` on at most `jobs` threads; results keep the cell order.
    fn run_all(&self, inst: &Instance, saddle: Option<&Saddle>, cells: &[Cell]) -> Result<Vec<CellResult>> {
        let mut problems: BTreeMap<usize, Problem> = BTreeMap::new();
        for c in cells {
            if let std::collections::btree_map::Entry::Vacant(slot) = problems.entry(c.blocks) {
                slot.insert(inst.with_blocks(c.blocks)?);
            }
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .context("cannot start worker pool")?;
        let results: Vec<Result<CellResult>> = pool.install(|| {
            cells
                .par_iter()
                .map(|&cell| {
                    info!("running {}", cell.file_name(inst.label));
                    run_cell(&problems[&cell.blocks], inst.label, saddle, &self.cfg, cell, &self.out)
                        .with_context(|| format!("{} with N={} seed {}", cell.algorithm, cell.blocks, cell.seed))
                })
                .collect()
        });
        results.into_iter().collect()
    }
}

pub fn solve(ctx: &Context) -> Result<Vec<CellResult>> {
    let inst = ctx.prepare()?;
    let saddle = inst.saddle(&ctx.saddle_dir(), false)?;
    let cells = cells(&ctx.cfg, &ctx.cfg.algorithms, ctx.seed_offset);
    let results = ctx.run_all(&inst, saddle.as_ref(), &cells)?;
    println!(
        "{:<34} {:>22} {:>12} {:>12} {:>9}",
        "run", "F(u)", "||Au-b||", "kkt", "iters"
    );
    for r in &results {
        println!(
            "{:<34} {:>22.15e} {:>12.4e} {:>12.4e} {:>9}",
            r.cell.file_name(inst.label).trim_end_matches(".csv"),
            r.objective,
            r.feas,
            r.kkt,
            r.iterations
        );
    }
    Ok(results)
}

pub struct CompareOutput {
    pub results: Vec<CellResult>,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
}

fn metric(r: &rpdc::TraceRecord<f64>) -> f64 {
    r.subopt.abs() + r.feas
}

pub fn compare(ctx: &Context) -> Result<CompareOutput> {
    let inst = ctx.prepare()?;
    let saddle = inst
        .saddle(&ctx.saddle_dir(), true)?
        .expect("oracle either succeeds or errors");
    let mut algorithms = Algorithm::ALL.to_vec();
    if let Err(e) = Rcd::new(&inst.base, RcdParams::default()) {
        warn!("skipping rcd: {e}");
        algorithms.retain(|&a| a != Algorithm::Rcd);
    }
    let cells = cells(&ctx.cfg, &algorithms, ctx.seed_offset);
    let results = ctx.run_all(&inst, Some(&saddle), &cells)?;

    let target = ctx.cfg.target;
    let mut summary = String::from(
        "algorithm,blocks,seed,iterations,iters_to_target,time_to_target_ms,final_metric,mean_step_us\n",
    );
    let mut curves = String::from("algorithm,blocks,seed,iter,time_ms,metric\n");
    for r in &results {
        let hit = r.trace.records.iter().find(|rec| metric(rec) <= target);
        let last = r.trace.last().map_or(f64::NAN, metric);
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{},{}",
            r.cell.algorithm,
            r.cell.blocks,
            r.cell.seed,
            r.iterations,
            hit.map_or(String::new(), |h| h.iter.to_string()),
            hit.map_or(String::new(), |h| h.time_ms.to_string()),
            last,
            r.mean_step_us
        );
        for rec in &r.trace.records {
            let _ = writeln!(
                curves,
                "{},{},{},{},{},{}",
                r.cell.algorithm, r.cell.blocks, r.cell.seed, rec.iter, rec.time_ms, metric(rec)
            );
        }
    }
    let summary_path = ctx.out.join(format!("{}_compare_summary.csv", inst.label));
    write_text(&summary_path, &summary)?;
    write_text(&ctx.out.join(format!("{}_compare_curves.csv", inst.label)), &curves)?;

    println!("target metric |F - F*| + ||Au - b|| <= {target:e}, F* = {:.15e}", saddle.f_star);
    println!(
        "{:<8} {:>3} {:>12} {:>18} {:>16}",
        "alg", "N", "runs", "median iters", "mean step (us)"
    );
    let mut plots = Vec::new();
    for &blocks in &ctx.cfg.blocks {
        let mut by_iter = LogPlot::new(
            format!("{} N={blocks}", inst.label),
            "iteration",
            "|F(u) - F*| + ||Au - b||",
        );
        let mut by_time = LogPlot::new(
            format!("{} N={blocks}", inst.label),
            "wall time (ms)",
            "|F(u) - F*| + ||Au - b||",
        );
        for &alg in &algorithms {
            let group: Vec<&CellResult> = results
                .iter()
                .filter(|r| r.cell.blocks == blocks && r.cell.algorithm == alg)
                .collect();
            let Some(first) = group.first() else { continue };
            let hits: Vec<f64> = group
                .iter()
                .map(|r| {
                    r.trace
                        .records
                        .iter()
                        .find(|rec| metric(rec) <= target)
                        .map_or(f64::INFINITY, |h| h.iter as f64)
                })
                .collect();
            let step = group.iter().map(|r| r.mean_step_us).sum::<f64>() / group.len() as f64;
            println!(
                "{:<8} {:>3} {:>12} {:>18} {:>16.3}",
                alg.name(),
                blocks,
                group.len(),
                median(hits),
                step
            );
            let name = if alg.is_randomized() {
                format!("{alg} (seed {})", first.cell.seed)
            } else {
                alg.to_string()
            };
            let recs = &first.trace.records;
            by_iter.add(name.clone(), recs.iter().map(|r| (r.iter as f64, metric(r))).collect());
            by_time.add(name, recs.iter().map(|r| (r.time_ms, metric(r))).collect());
        }
        for (plot, kind) in [(by_iter, "iter"), (by_time, "time")] {
            let path = ctx.out.join(format!("{}_compare_N{blocks}_{kind}.svg", inst.label));
            write_text(&path, &plot.render())?;
            plots.push(path);
        }
    }
    Ok(CompareOutput {
        results,
        summary: summary_path,
        plots,
    })
}

#[derive(Clone, Debug)]
pub struct RateRow {
    pub algorithm: Algorithm,
    pub blocks: usize,
    pub alpha_hat: f64,
    pub r_squared: f64,
    pub points: usize,
    pub failed: bool,
}

pub struct SweepOutput {
    pub results: Vec<CellResult>,
    pub rates: Vec<RateRow>,
    pub rate_table: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Seed-averaged columns over the common recorded prefix.
struct Averaged {
    iters: Vec<usize>,
    dist: Vec<f64>,
    subopt: Vec<f64>,
    feas: Vec<f64>,
    phi: Vec<f64>,
}

fn average(group: &[&CellResult]) -> Result<Averaged> {
    let len = group.iter().map(|r| r.trace.records.len()).min().unwrap_or(0);
    let iters: Vec<usize> = group[0].trace.records[..len].iter().map(|r| r.iter).collect();
    for r in group {
        if r.trace.records[..len].iter().map(|x| x.iter).ne(iters.iter().copied()) {
            bail!("traces of {} N={} are recorded at different iterations", r.cell.algorithm, r.cell.blocks);
        }
    }
    let col = |f: fn(&rpdc::TraceRecord<f64>) -> f64| -> Vec<f64> {
        (0..len)
            .map(|i| group.iter().map(|r| f(&r.trace.records[i])).sum::<f64>() / group.len() as f64)
            .collect()
    };
    Ok(Averaged {
        iters,
        dist: col(|r| r.dist_w),
        subopt: col(|r| r.subopt.abs()),
        feas: col(|r| r.feas),
        phi: col(|r| r.phi),
    })
}

pub fn sweep(ctx: &Context) -> Result<SweepOutput> {
    let inst = ctx.prepare()?;
    let saddle = inst
        .saddle(&ctx.saddle_dir(), true)?
        .expect("oracle either succeeds or errors");
    let cells = cells(&ctx.cfg, &ctx.cfg.algorithms, ctx.seed_offset);
    let results = ctx.run_all(&inst, Some(&saddle), &cells)?;

    let titles = [("dist", "||w - w*||"), ("subopt", "|F(u) - F*|"), ("feas", "||Au - b||")];
    let mut plots: Vec<LogPlot> = titles
        .iter()
        .map(|(_, y)| LogPlot::new(format!("{} block sweep (seed mean)", inst.label), "iteration", *y))
        .collect();
    let mut curves = String::from("algorithm,blocks,iter,dist_w,subopt,feas,phi\n");
    let mut rates = Vec::new();
    for &alg in &ctx.cfg.algorithms {
        for &blocks in &ctx.cfg.blocks {
            let group: Vec<&CellResult> = results
                .iter()
                .filter(|r| r.cell.blocks == blocks && r.cell.algorithm == alg)
                .collect();
            if group.is_empty() {
                continue;
            }
            let avg = average(&group)?;
            for i in 0..avg.iters.len() {
                let _ = writeln!(
                    curves,
                    "{alg},{blocks},{},{},{},{},{}",
                    avg.iters[i], avg.dist[i], avg.subopt[i], avg.feas[i], avg.phi[i]
                );
            }
            let xs: Vec<f64> = avg.iters.iter().map(|&k| k as f64).collect();
            for (plot, ys) in plots.iter_mut().zip([&avg.dist, &avg.subopt, &avg.feas]) {
                plot.add(format!("{alg} N={blocks}"), xs.iter().copied().zip(ys.iter().copied()).collect());
            }
            let row = match fit_linear_rate(&avg.iters, &avg.phi) {
                Ok(fit) => RateRow {
                    algorithm: alg,
                    blocks,
                    alpha_hat: fit.alpha,
                    r_squared: fit.r_squared,
                    points: fit.points,
                    failed: fit.failed,
                },
                Err(e) => {
                    warn!("no rate fit for {alg} N={blocks}: {e}");
                    RateRow {
                        algorithm: alg,
                        blocks,
                        alpha_hat: f64::NAN,
                        r_squared: f64::NAN,
                        points: 0,
                        failed: true,
                    }
                }
            };
            rates.push(row);
        }
    }
    let mut table = String::from("algorithm,blocks,alpha_hat,r_squared,points,fit_failed\n");
    println!("{:<8} {:>3} {:>12} {:>10} {:>7}", "alg", "N", "alpha_hat", "R^2", "points");
    for r in &rates {
        let _ = writeln!(
            table,
            "{},{},{},{},{},{}",
            r.algorithm, r.blocks, r.alpha_hat, r.r_squared, r.points, r.failed
        );
        println!(
            "{:<8} {:>3} {:>12.6} {:>10.6} {:>7}{}",
            r.algorithm.name(),
            r.blocks,
            r.alpha_hat,
            r.r_squared,
            r.points,
            if r.failed { "  (fit failed)" } else { "" }
        );
    }
    let rate_table = ctx.out.join(format!("{}_sweep_rates.csv", inst.label));
    write_text(&rate_table, &table)?;
    write_text(&ctx.out.join(format!("{}_sweep_curves.csv", inst.label)), &curves)?;
    let mut plot_paths = Vec::new();
    for (plot, (kind, _)) in plots.iter().zip(titles) {
        let path = ctx.out.join(format!("{}_sweep_{kind}.svg", inst.label));
        write_text(&path, &plot.render())?;
        plot_paths.push(path);
    }
    Ok(SweepOutput {
        results,
        rates,
        rate_table,
        plots: plot_paths,
    })
}

pub fn oracle(ctx: &Context) -> Result<PathBuf> {
    let inst = ctx.prepare()?;
    let dir = ctx.saddle_dir();
    let saddle = inst.saddle(&dir, true)?.expect("oracle either succeeds or errors");
    let path = inst.saddle_path(&dir);
    if inst.planted.is_some() {
        rpdc::dataio::write_saddle_csv(&saddle, &path)?;
    }
    let kkt = kkt_residual(&inst.base, &(saddle.u_star.clone(), saddle.p_star.clone()));
    println!("problem  {} ({} variables, {} constraints)", inst.base.name(), inst.base.dim_primal(), inst.base.dim_dual());
    println!("F*       {:.15e}", saddle.f_star);
    println!("kkt      {kkt:.3e}");
    println!("p*       {:?}", saddle.p_star.to_vec());
    println!("saved    {}", path.display());
    Ok(path)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Write-temp-then-rename next to the destination.
fn write_text(path: &Path, text: &str) -> Result<()> {
    use std::io::Write;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write in {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
