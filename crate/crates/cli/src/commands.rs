use crate::config::{BaseCover, RunConfig};
use anyhow::{bail, Context, Result};
use cxcdim::antenna::{antenna_scan_with, box_counting_dim, ScanOptions};
use cxcdim::chebyshev::chebyshev_report;
use cxcdim::cxc_cover::{
    build_hierarchy_truncating, check_degree, check_distortion, check_expansion, check_irreducibility, default_base_cover,
    homothety_check, tiled_base_cover, visual_metric_estimate, DiameterKind, Euclidean,
};
use cxcdim::dynamics::{julia_set_with, JuliaOptions, JuliaSet, PolynomialMap};
use cxcdim::geometry::{
    classify, read_continuum, write_continuum, write_png, write_png_with_overlay, CellSet, GridContinuum, Witness,
};
use serde_json::{json, Value};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

/// Report of a run whose inputs were fine but whose result violates a
/// contract (a disconnected Julia set, say). Exit status 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ContractViolation(pub String);

pub struct Ctx {
    pub cfg: RunConfig,
    pub command: &'static str,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        let p = self.path(name);
        std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    /// Writes `{version, command, config, result}` with sorted keys.
    fn write_json(&self, name: &str, result: Value) -> Result<PathBuf> {
        let doc = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": serde_json::to_value(&self.cfg)?,
            "result": result,
        });
        self.write_text(name, &(serde_json::to_string_pretty(&doc)? + "\n"))
    }

    fn map(&self) -> Result<PolynomialMap> {
        Ok(PolynomialMap::parse(&self.cfg.map)?)
    }

    fn julia(&self) -> Result<JuliaSet> {
        Ok(julia_set_with(&self.map()?, &JuliaOptions::new(self.cfg.resolution, self.cfg.max_iter))?)
    }

    fn continuum(&self) -> Result<GridContinuum> {
        match &self.cfg.input {
            Some(p) => {
                let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
                Ok(read_continuum(BufReader::new(f))?)
            }
            None => {
                let j = self.julia()?;
                if j.component_count > 1 {
                    bail!(ContractViolation(format!(
                        "Julia band has {} components at resolution {}",
                        j.component_count, self.cfg.resolution
                    )));
                }
                Ok(j.continuum)
            }
        }
    }
}

pub fn julia(ctx: &Ctx) -> Result<()> {
    let j = ctx.julia()?;
    let s = &j.continuum;
    let bin = ctx.path("continuum.bin");
    write_continuum(s, BufWriter::new(File::create(&bin).with_context(|| format!("creating {}", bin.display()))?))?;
    write_png(s, &ctx.path("continuum.png"))?;
    let connected = j.component_count == 1;
    let (x0, y0, x1, y1) = s.bounds();
    ctx.write_json(
        "julia.json",
        json!({
            "cells": s.len(),
            "cell_width": s.cell_width(),
            "diameter": s.diameter(),
            "component_count": j.component_count,
            "connected": connected,
            "window_center": [j.window_center.re, j.window_center.im],
            "window_half_width": j.window_half_width,
            "bounds": [x0, y0, x1, y1],
        }),
    )?;
    println!("cells {}  diameter {:.6}  components {}", s.len(), s.diameter(), j.component_count);
    if !connected {
        bail!(ContractViolation(format!(
            "Julia band has {} components (largest kept in continuum.bin); connectivity not resolved at resolution {}",
            j.component_count, ctx.cfg.resolution
        )));
    }
    Ok(())
}

pub fn classify_cmd(ctx: &Ctx) -> Result<()> {
    let s = ctx.continuum()?;
    let class = classify(&s, ctx.cfg.prune_cells * s.cell_width());
    match &class.witness {
        Some(Witness::Ytree(y)) => {
            ctx.write_text("witness.json", &(y.to_json() + "\n"))?;
        }
        Some(w @ Witness::Cycle(_)) => {
            ctx.write_text("witness.json", &(serde_json::to_string_pretty(w)? + "\n"))?;
        }
        None => {}
    }
    ctx.write_json("classify.json", serde_json::to_value(&class)?)?;
    println!(
        "{:?}  branch vertices {}  leaves {}  cycle rank {}",
        class.kind, class.branch_vertices, class.leaves, class.cycle_rank
    );
    Ok(())
}

pub fn antenna(ctx: &Ctx) -> Result<()> {
    let s = ctx.continuum()?;
    let opts = ScanOptions {
        n_scales: ctx.cfg.scales,
        n_centers: ctx.cfg.centers,
        c_min: ctx.cfg.c_min,
        min_radius_cells: ctx.cfg.min_radius_cells,
        seed: ctx.cfg.seed,
    };
    let report = antenna_scan_with(&s, &opts)?;
    ctx.write_json("antenna.json", serde_json::to_value(&report)?)?;
    ctx.write_text("antenna.csv", &report.to_csv())?;
    write_png_with_overlay(&s, &report.overlay_polylines(), &ctx.path("antenna.png"))?;
    println!("{}", report.verdict);
    for f in &report.failures {
        println!("  not found: scale {} radius {:.5} center {}", f.scale_index, f.radius, f.center);
    }
    Ok(())
}

pub fn dim(ctx: &Ctx) -> Result<()> {
    let s = ctx.continuum()?;
    let d = box_counting_dim(&s, ctx.cfg.box_min, ctx.cfg.box_max)?;
    ctx.write_json("dim.json", serde_json::to_value(&d)?)?;
    println!("box dimension {:.4}  r² {:.5}  scales {}", d.estimate, d.r_squared, d.scales.len());
    Ok(())
}

pub fn cheb(ctx: &Ctx) -> Result<()> {
    let mut rows = Vec::new();
    let mut csv = String::from("d,pattern,growth_number,expanding,pl_model_max_error,projection_max_error\n");
    let opt = |v: Option<f64>| v.map(|e| format!("{e:e}")).unwrap_or_default();
    for d in ctx.cfg.d_min..=ctx.cfg.d_max {
        let r = chebyshev_report(d, ctx.cfg.cheb_samples, ctx.cfg.seed)?;
        let pattern = serde_json::to_value(r.pattern)?;
        csv += &format!(
            "{},{},{:?},{},{},{}\n",
            d,
            pattern.as_str().unwrap_or_default(),
            r.growth_number,
            r.expanding,
            opt(r.pl_model_max_error),
            opt(r.projection.as_ref().map(|p| p.max_error)),
        );
        println!(
            "d={d}  growth {:.10}{}",
            r.growth_number,
            if r.expanding { "" } else { "  (non-expanding)" }
        );
        rows.push(r);
    }
    ctx.write_text("cheb.csv", &csv)?;
    ctx.write_json("cheb.json", serde_json::to_value(&rows)?)?;
    Ok(())
}

/// The `patch_cells` cells of `s` nearest a seeded cell.
fn patch(s: &GridContinuum, n: usize, seed: u64) -> CellSet {
    let cells: Vec<_> = s.cells().iter().copied().collect();
    let c0 = s.center(cells[(seed as usize).wrapping_mul(2654435761) % cells.len()]);
    let mut by_dist = cells;
    by_dist.sort_by(|a, b| (s.center(*a) - c0).norm().total_cmp(&(s.center(*b) - c0).norm()).then(a.cmp(b)));
    by_dist.into_iter().take(n).collect()
}

pub fn cover(ctx: &Ctx) -> Result<()> {
    let map = ctx.map()?;
    let s = ctx.continuum()?;
    let u0 = match ctx.cfg.base {
        BaseCover::HalfPlanes => default_base_cover(&s),
        BaseCover::Tiles(k) => tiled_base_cover(&s, k)?,
    };
    let h = build_hierarchy_truncating(&map, &s, u0, ctx.cfg.depth)?;
    let seed = ctx.cfg.seed;
    let expansion = check_expansion(&h, DiameterKind::Euclidean);
    let expansion_intrinsic = check_expansion(&h, DiameterKind::Intrinsic);
    let degree = check_degree(&h);
    let irreducibility = check_irreducibility(&map, &s, &patch(&s, ctx.cfg.patch_cells, seed), 4 * ctx.cfg.depth.max(10))?;
    let homothety = homothety_check(&map, &s, &Euclidean, ctx.cfg.samples, None, seed).ok();
    let distortion = match check_distortion(&h, &Euclidean, ctx.cfg.tuples, seed) {
        Ok(d) => {
            ctx.write_text("distortion.csv", &d.to_csv())?;
            json!({
                "maxima_shallow": d.maxima_shallow,
                "maxima_full": d.maxima_full,
                "verdict": d.verdict,
                "roundness_pairs": d.roundness_pairs.len(),
                "diameter_pairs": d.diameter_pairs.len(),
            })
        }
        Err(e) => json!({ "verdict": e.to_string() }),
    };
    let visual = match visual_metric_estimate(&h, ctx.cfg.epsilon, ctx.cfg.samples, seed) {
        Ok(v) => json!({ "c": v.c, "r1": v.r1, "quasi_metric_k": v.quasi_metric_k, "samples": v.samples.len() }),
        Err(e) => json!({ "verdict": e.to_string() }),
    };
    ctx.write_json("cover_hierarchy.json", h.to_json())?;
    ctx.write_json(
        "cover.json",
        json!({
            "resolved_depth": h.depth(),
            "truncated_by": h.truncated_by,
            "level_sizes": h.levels.iter().map(Vec::len).collect::<Vec<_>>(),
            "dropped_fragments": h.dropped_fragments,
            "expansion": expansion,
            "expansion_intrinsic": expansion_intrinsic,
            "degree": degree,
            "irreducibility": irreducibility,
            "homothety": homothety,
            "distortion": distortion,
            "visual_metric": visual,
        }),
    )?;
    println!("resolved depth {} of {}", h.depth(), ctx.cfg.depth);
    if let Some(t) = &h.truncated_by {
        println!("  truncated: {t}");
    }
    println!("expansion {} (intrinsic {})", expansion.verdict, expansion_intrinsic.verdict);
    println!("degree {} {:?}", degree.verdict, degree.max_chain_degree);
    match irreducibility.n {
        Some(n) => println!("irreducibility n = {n}"),
        None => println!("irreducibility: patch does not cover within the iteration cap"),
    }
    Ok(())
}
