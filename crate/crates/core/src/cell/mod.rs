//! Auxiliary cell problems on the unit cell, tabulated over temperature.

mod cache;
mod functions;
mod grid;
mod solver;

pub use cache::{sha256_hex, CellCache, Manifest, ManifestEntry};
pub use functions::{sym_index, CellFn, CellFunctionSet, FIRST_ORDER_SLOTS, SLOT_COUNT, SYM_PAIRS};
pub use grid::{temperature_sensitivity, Bracket, TemperatureGrid};
pub use solver::{
    sample_sensitivities, solve_first_order, solve_sample, solve_second_order, solves_per_temperature, CellOptions,
    CellOrder, SampleTables, Sensitivity, XDerivativeMode,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::material::Constituents;
use crate::microgen::{build_mesh, RveGeometry};

/// Cell tables of all samples plus bookkeeping.
#[derive(Clone, Debug)]
pub struct CellTables {
    pub samples: Vec<SampleTables>,
    /// Linear solves performed in this call (zero on a full cache hit).
    pub solves: usize,
    /// Entries read from the cache.
    pub loaded: usize,
}

impl CellTables {
    pub fn grid(&self) -> &TemperatureGrid {
        &self.samples[0].grid
    }
}

#[derive(Serialize)]
struct Context<'a> {
    geometry: String,
    n: usize,
    laws: &'a Constituents,
    grid: &'a TemperatureGrid,
    options: &'a CellOptions,
}

/// Hash of everything a sample's tables depend on.
pub fn context_hash(geometry: &RveGeometry, n: usize, laws: &Constituents, grid: &TemperatureGrid, options: &CellOptions) -> String {
    let ctx = Context { geometry: geometry.to_text(), n, laws, grid, options };
    sha256_hex(serde_json::to_string(&ctx).expect("context serialises").as_bytes())
}

/// Solves (or loads) the cell tables of every sample on an `n`-by-`n` cell
/// mesh. With a cache, a sample is loaded when all of its temperature
/// entries are present and intact; `force` recomputes regardless.
pub fn build_cell_tables(
    geometries: &[RveGeometry],
    n: usize,
    laws: &Constituents,
    grid: &TemperatureGrid,
    options: &CellOptions,
    cache: Option<&CellCache>,
    force: bool,
) -> Result<CellTables> {
    let results: Vec<(SampleTables, usize, usize, Vec<ManifestEntry>)> = geometries
        .par_iter()
        .map(|geometry| {
            let mesh = build_mesh(geometry, n);
            let seed = geometry.seed;
            let ctx = context_hash(geometry, n, laws, grid, options);
            if let (Some(cache), false) = (cache, force) {
                let mut loaded = Vec::with_capacity(grid.len());
                for s in 0..grid.len() {
                    match cache.load(seed, n, &ctx, s)? {
                        Some(entry) => loaded.push(entry),
                        None => break,
                    }
                }
                if loaded.len() == grid.len() {
                    let (functions, effective) = loaded.into_iter().unzip();
                    let tables = SampleTables { seed, mesh, grid: grid.clone(), functions, effective };
                    return Ok((tables, 0, grid.len(), Vec::new()));
                }
            }
            let (tables, solves) = solve_sample(seed, mesh, laws, grid, options)?;
            let mut entries = Vec::new();
            if let Some(cache) = cache {
                for (s, (set, eff)) in tables.functions.iter().zip(&tables.effective).enumerate() {
                    let path = cache.store(seed, n, &ctx, s, set, eff)?;
                    let file = path.strip_prefix(cache.root()).unwrap_or(&path).to_string_lossy().into_owned();
                    entries.push(ManifestEntry { seed, n, temperature_index: s, temperature: eff.temperature, file });
                }
            }
            Ok((tables, solves, 0, entries))
        })
        .collect::<Result<_>>()?;

    let mut out = CellTables { samples: Vec::with_capacity(results.len()), solves: 0, loaded: 0 };
    let mut entries = Vec::new();
    for (tables, solves, loaded, e) in results {
        out.samples.push(tables);
        out.solves += solves;
        out.loaded += loaded;
        entries.extend(e);
    }
    if let (Some(cache), false) = (cache, entries.is_empty()) {
        cache.record(entries)?;
    }
    log::info!("cell tables: {} samples, {} solves, {} cached entries loaded", out.samples.len(), out.solves, out.loaded);
    Ok(out)
}
