//! Reflection censuses over seeded entry samples, deviation grids, scatter
//! exports, and the closed-form constants of the double-parabola analysis.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::billiard::{trace_exit, DEFAULT_MAX_REFLECTIONS};
use crate::resistance::{Grid, QuadratureConfig, ResistanceError};
use crate::sampling::map_batches;
use crate::shapes::Cavity;

/// Margin added to the critical angle before a sample is held to the
/// three-bounce statement.
pub const THEOREM_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremConstants {
    /// Critical entry angle `arctan(√2/4)`, radians.
    pub phi0: f64,
    pub two_phi0: f64,
    /// Lower bounds on the heights of the four bounces.
    pub y_star: [f64; 4],
}

pub fn constants() -> TheoremConstants {
    let s2 = 2f64.sqrt();
    let s79 = 79f64.sqrt();
    let phi0 = (s2 / 4.0).atan();
    let inner = (-51.0 + 6.0 * s79).sqrt();
    let y2 = 8.0 / 9.0 * inner;
    let cube = (54.0 * s2 + 6.0 * 546f64.sqrt()).cbrt();
    let y3 = cube / 3.0 - 8.0 / cube;
    let y1 = 2.3 * s2 - (444_498.0 - 33_120.0 * s2 * inner - 38_400.0 * s79).sqrt() / 90.0;
    TheoremConstants {
        phi0,
        two_phi0: 2.0 * phi0,
        y_star: [y1, y2, y3, 0.0],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleExit {
    pub phi_plus: f64,
    pub nc: usize,
    pub y_max: f64,
    pub corner_hit: bool,
    pub alternating: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusRecord {
    pub x: f64,
    pub phi: f64,
    /// `None` when the trace failed; see `failure`.
    pub exit: Option<SampleExit>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Violations {
    /// `|φ| > φ₀`: not exactly three alternating bounces.
    pub thm1: u64,
    /// Fewer than three bounces.
    pub thm2: u64,
    /// Four or more bounces outside `|φ|, |φ⁺| < φ₀`, `|φ − φ⁺| < 2φ₀`.
    pub corollary: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusSummary {
    pub n_samples: usize,
    pub seed: u64,
    /// Reflection-count histogram; together with `failed` it sums to `n_samples`.
    pub histogram: BTreeMap<usize, u64>,
    pub failed: u64,
    pub corner_hits: u64,
    /// Largest `|φ − φ⁺|` per reflection count, degrees.
    pub max_deviation_deg: BTreeMap<usize, f64>,
    pub violations: Violations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusReport {
    pub records: Vec<CensusRecord>,
    pub summary: CensusSummary,
}

/// Traces `n_samples` seeded uniform entries and tallies the outcome.
pub fn census(cavity: &Cavity, n_samples: usize, seed: u64) -> CensusReport {
    let records: Vec<CensusRecord> = map_batches(seed, n_samples, |entries| {
        entries
            .iter()
            .map(|e| match trace_exit(cavity, *e, DEFAULT_MAX_REFLECTIONS) {
                Ok(s) => CensusRecord {
                    x: e.x(),
                    phi: e.phi(),
                    exit: Some(SampleExit {
                        phi_plus: s.exit_phi,
                        nc: s.nc,
                        y_max: s.y_max,
                        corner_hit: s.corner_hit,
                        alternating: s.alternating,
                    }),
                    failure: None,
                },
                Err(err) => CensusRecord {
                    x: e.x(),
                    phi: e.phi(),
                    exit: None,
                    failure: Some(err.to_string()),
                },
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let summary = summarize(&records, seed);
    CensusReport { records, summary }
}

fn summarize(records: &[CensusRecord], seed: u64) -> CensusSummary {
    let phi0 = constants().phi0;
    let mut s = CensusSummary {
        n_samples: records.len(),
        seed,
        histogram: BTreeMap::new(),
        failed: 0,
        corner_hits: 0,
        max_deviation_deg: BTreeMap::new(),
        violations: Violations::default(),
    };
    for r in records {
        let Some(e) = r.exit else {
            s.failed += 1;
            continue;
        };
        *s.histogram.entry(e.nc).or_default() += 1;
        s.corner_hits += e.corner_hit as u64;
        let dev = (r.phi - e.phi_plus).abs();
        let slot = s.max_deviation_deg.entry(e.nc).or_insert(0.0);
        *slot = slot.max(dev.to_degrees());

        if r.phi.abs() > phi0 + THEOREM_MARGIN && !(e.nc == 3 && e.alternating) {
            s.violations.thm1 += 1;
        }
        if e.nc < 3 {
            s.violations.thm2 += 1;
        }
        if e.nc >= 4 && !(r.phi.abs() < phi0 && e.phi_plus.abs() < phi0 && dev < 2.0 * phi0) {
            s.violations.corollary += 1;
        }
    }
    s
}

impl CensusReport {
    /// Columns `x,phi_deg,phiplus_deg,nc,y_max,corner`; failed samples leave
    /// the exit columns empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,phi_deg,phiplus_deg,nc,y_max,corner")?;
        for r in &self.records {
            match r.exit {
                Some(e) => writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.x,
                    r.phi.to_degrees(),
                    e.phi_plus.to_degrees(),
                    e.nc,
                    e.y_max,
                    e.corner_hit as u8
                )?,
                None => writeln!(out, "{},{},,,,", r.x, r.phi.to_degrees())?,
            }
        }
        Ok(())
    }

    /// Mean peak height per `|φ|` bin over `[lo_deg, hi_deg)`, as
    /// `(bin centre in degrees, mean y_max, count)`.
    pub fn ymax_binned_means(&self, lo_deg: f64, hi_deg: f64, bins: usize) -> Vec<(f64, f64, u64)> {
        let width = (hi_deg - lo_deg) / bins as f64;
        let mut acc = vec![(0.0, 0u64); bins];
        for r in &self.records {
            let (Some(e), a) = (r.exit, r.phi.abs().to_degrees()) else {
                continue;
            };
            if a >= lo_deg && a < hi_deg {
                let b = (((a - lo_deg) / width) as usize).min(bins - 1);
                acc[b].0 += e.y_max;
                acc[b].1 += 1;
            }
        }
        acc.into_iter()
            .enumerate()
            .map(|(b, (sum, n))| {
                let centre = lo_deg + (b as f64 + 0.5) * width;
                (centre, if n > 0 { sum / n as f64 } else { f64::NAN }, n)
            })
            .collect()
    }
}

/// `φ − φ⁺` on the nodes of `cfg`, radians.
pub fn deviation_grid(cavity: &Cavity, cfg: &QuadratureConfig) -> Result<Grid, ResistanceError> {
    let max = cfg.max_reflections();
    Grid::evaluate(cfg, |x, phi| {
        let wrap = |source| ResistanceError::Trace { x, phi, source };
        let entry = crate::billiard::EntryState::new(x, phi).map_err(wrap)?;
        let exit = trace_exit(cavity, entry, max).map_err(wrap)?;
        Ok(phi - exit.exit_phi)
    })
}

/// Node layout used for deviation maps: 100 values per axis.
pub fn default_deviation_config() -> QuadratureConfig {
    QuadratureConfig::midpoint(100, 100).expect("valid grid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterKind {
    PhiPhiPlus,
    PhiYmax,
    PhiNc,
}

impl ScatterKind {
    pub fn header(self) -> &'static str {
        match self {
            ScatterKind::PhiPhiPlus => "phi_deg,phiplus_deg,nc_ge4",
            ScatterKind::PhiYmax => "phi_deg,y_max,nc_ge4",
            ScatterKind::PhiNc => "phi_deg,nc,nc_ge4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterRow {
    pub phi_deg: f64,
    pub value: f64,
    /// Four or more reflections.
    pub many_reflections: bool,
}

/// Pairs for the scatter plots; failed samples are skipped.
pub fn scatter_export(report: &CensusReport, kind: ScatterKind) -> Vec<ScatterRow> {
    report
        .records
        .iter()
        .filter_map(|r| {
            let e = r.exit?;
            let value = match kind {
                ScatterKind::PhiPhiPlus => e.phi_plus.to_degrees(),
                ScatterKind::PhiYmax => e.y_max,
                ScatterKind::PhiNc => e.nc as f64,
            };
            Some(ScatterRow {
                phi_deg: r.phi.to_degrees(),
                value,
                many_reflections: e.nc >= 4,
            })
        })
        .collect()
}

pub fn write_scatter_csv<W: Write>(
    rows: &[ScatterRow],
    kind: ScatterKind,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{}", kind.header())?;
    for r in rows {
        writeln!(out, "{},{},{}", r.phi_deg, r.value, r.many_reflections as u8)?;
    }
    Ok(())
}
