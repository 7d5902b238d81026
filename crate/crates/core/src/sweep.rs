//! Grid sweeps of the densifying rate `eta` over `(p, r)` planes, finite-difference
//! partials, and densification maps.
//!
//! Cells are evaluated in parallel and merged by index, so output is independent of the
//! worker count.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::eta_of;
use crate::family::eta_alt;
use crate::graphon::{classify, RegionTag, SbmGraphon, CLASSIFY_TOL};
use crate::scalar::Scalar;
use crate::solver::embed;

/// Default finite-difference step.
pub const DEFAULT_H: f64 = 1e-4;
/// `|eta - 1|` below this counts as balanced in densification maps.
pub const MAP_BALANCE_TOL: f64 = 1e-6;

/// Evenly spaced closed interval `[lo, hi]` with `steps >= 2` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange<T> {
    pub lo: T,
    pub hi: T,
    pub steps: usize,
}

impl<T: Scalar> AxisRange<T> {
    pub fn new(lo: T, hi: T, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidParameter {
                name: "steps",
                value: steps as f64,
                reason: "need at least two grid points per axis",
            });
        }
        for (name, v) in [("range lo", lo), ("range hi", hi)] {
            if !(v > T::zero() && v < T::one()) {
                return Err(Error::OutOfRange {
                    name,
                    value: v.as_f64(),
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        if !(lo <= hi) {
            return Err(Error::InvalidParameter {
                name: "range",
                value: lo.as_f64(),
                reason: "lower end exceeds upper end",
            });
        }
        Ok(Self { lo, hi, steps })
    }

    pub fn value(&self, i: usize) -> T {
        let t = T::from_usize(i).expect("index fits scalar") / T::from_usize(self.steps - 1).expect("steps fit scalar");
        self.lo + (self.hi - self.lo) * t
    }
}

/// Which community a representation-preserving link predictor densifies faster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensifyLabel {
    /// The favored community is the strictly sparser one.
    SparserFavored,
    /// The favored community is the smaller one and is not sparser.
    SmallerDenserFavored,
    /// The favored community is at least as large and not sparser.
    DenserFavored,
    Balanced,
}

impl DensifyLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            DensifyLabel::SparserFavored => "sparser-favored",
            DensifyLabel::SmallerDenserFavored => "smaller-denser-favored",
            DensifyLabel::DenserFavored => "denser-favored",
            DensifyLabel::Balanced => "balanced",
        }
    }
}

/// Labels a middle-regime cell from `eta`, the block densities and the size split.
pub fn densify_label<T: Scalar>(eta: T, p: T, r: T, a: T) -> DensifyLabel {
    let tol = T::lit(MAP_BALANCE_TOL);
    if (eta - T::one()).abs() <= tol {
        return DensifyLabel::Balanced;
    }
    let first_favored = eta > T::one();
    let (mine, other, smaller) = if first_favored { (p, r, a < T::half()) } else { (r, p, a > T::half()) };
    if mine < other {
        DensifyLabel::SparserFavored
    } else if smaller {
        DensifyLabel::SmallerDenserFavored
    } else {
        DensifyLabel::DenserFavored
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell<T> {
    /// Index along the `p` axis.
    pub i: usize,
    /// Index along the `r` axis.
    pub j: usize,
    pub p: T,
    pub r: T,
    /// `None` only for degenerate points the classifier rejects.
    pub region: Option<RegionTag>,
    pub eta: Option<T>,
    /// `(d/dp, d/dq, d/dr, d/da)`.
    pub partials: Option<[T; 4]>,
    pub label: Option<DensifyLabel>,
    /// Why `eta` or the partials are missing on a middle cell.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid<T> {
    pub a: T,
    pub q: T,
    pub p_axis: AxisRange<T>,
    pub r_axis: AxisRange<T>,
    /// Row-major in `(i, j)`.
    pub cells: Vec<SweepCell<T>>,
}

impl<T: Scalar> SweepGrid<T> {
    pub fn cell(&self, i: usize, j: usize) -> &SweepCell<T> {
        &self.cells[i * self.r_axis.steps + j]
    }

    pub fn middle_cells(&self) -> impl Iterator<Item = &SweepCell<T>> {
        self.cells.iter().filter(|c| c.region == Some(RegionTag::Middle))
    }
}

/// What to compute per middle cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec<T> {
    pub a: T,
    pub q: T,
    pub p_axis: AxisRange<T>,
    pub r_axis: AxisRange<T>,
    /// Finite-difference step; `None` skips partials.
    pub partials_h: Option<T>,
}

/// `eta` of the graphon's gram, re-solving from scratch.
pub fn eta_at<T: Scalar>(g: &SbmGraphon<T>) -> Result<T> {
    let sol = embed(g)?;
    match eta_of(&sol.gram, g.a) {
        Err(Error::EtaUndefined(_)) => eta_alt(&sol.gram, g),
        other => other,
    }
}

fn is_middle<T: Scalar>(p: T, q: T, r: T) -> bool {
    matches!(classify(p, q, r, T::lit(CLASSIFY_TOL)), Ok(reg) if reg.tag == RegionTag::Middle)
}

/// Central differences of `eta` in `(p, q, r, a)` with step `h`.
pub fn eta_partials<T: Scalar>(g: &SbmGraphon<T>, h: T) -> Result<[T; 4]> {
    if !(h > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h.as_f64(),
            reason: "step must be positive",
        });
    }
    let (a, p, q, r) = (g.a, g.p, g.q, g.r);
    let axes: [(&'static str, [T; 4]); 4] = [
        ("p", [T::zero(), h, T::zero(), T::zero()]),
        ("q", [T::zero(), T::zero(), h, T::zero()]),
        ("r", [T::zero(), T::zero(), T::zero(), h]),
        ("a", [h, T::zero(), T::zero(), T::zero()]),
    ];
    if !is_middle(p, q, r) {
        return Err(Error::LeavesRegion { axis: "base point", h: h.as_f64() });
    }
    let mut out = [T::zero(); 4];
    for (slot, (axis, d)) in out.iter_mut().zip(axes) {
        let eval = |sign: T| -> Result<T> {
            let pt = [a + sign * d[0], p + sign * d[1], q + sign * d[2], r + sign * d[3]];
            let inside = pt.iter().all(|&x| x > T::zero() && x < T::one());
            if !inside || !is_middle(pt[1], pt[2], pt[3]) {
                return Err(Error::LeavesRegion { axis, h: h.as_f64() });
            }
            eta_at(&SbmGraphon::new(pt[0], pt[1], pt[2], pt[3])?)
        };
        let hi = eval(T::one())?;
        let lo = eval(-T::one())?;
        *slot = (hi - lo) / (T::two() * h);
    }
    Ok(out)
}

fn evaluate_cell<T: Scalar>(spec: &SweepSpec<T>, i: usize, j: usize) -> SweepCell<T> {
    let (p, r) = (spec.p_axis.value(i), spec.r_axis.value(j));
    let mut cell = SweepCell {
        i,
        j,
        p,
        r,
        region: None,
        eta: None,
        partials: None,
        label: None,
        note: None,
    };
    match classify(p, spec.q, r, T::lit(CLASSIFY_TOL)) {
        Ok(reg) => cell.region = Some(reg.tag),
        Err(e) => {
            cell.note = Some(e.to_string());
            return cell;
        }
    }
    if cell.region != Some(RegionTag::Middle) {
        return cell;
    }
    let g = match SbmGraphon::new(spec.a, p, spec.q, r) {
        Ok(g) => g,
        Err(e) => {
            cell.note = Some(e.to_string());
            return cell;
        }
    };
    match eta_at(&g) {
        Ok(eta) => {
            cell.eta = Some(eta);
            cell.label = Some(densify_label(eta, p, r, spec.a));
        }
        Err(e) => {
            cell.note = Some(e.to_string());
            return cell;
        }
    }
    if let Some(h) = spec.partials_h {
        match eta_partials(&g, h) {
            Ok(d) => cell.partials = Some(d),
            Err(e) => cell.note = Some(e.to_string()),
        }
    }
    cell
}

/// Evaluates every cell of the grid. Per-cell failures are recorded in [`SweepCell::note`].
pub fn sweep<T: Scalar>(spec: &SweepSpec<T>) -> Result<SweepGrid<T>> {
    for (name, v) in [("a", spec.a), ("q", spec.q)] {
        if !(v > T::zero() && v < T::one()) {
            return Err(Error::OutOfRange {
                name,
                value: v.as_f64(),
                lo: 0.0,
                hi: 1.0,
            });
        }
    }
    let (np, nr) = (spec.p_axis.steps, spec.r_axis.steps);
    let cells = (0..np * nr)
        .into_par_iter()
        .map(|idx| evaluate_cell(spec, idx / nr, idx % nr))
        .collect();
    Ok(SweepGrid {
        a: spec.a,
        q: spec.q,
        p_axis: spec.p_axis,
        r_axis: spec.r_axis,
        cells,
    })
}

/// `eta` over a `steps x steps` grid of `(p, r)`; no partials.
pub fn eta_surface<T: Scalar>(a: T, q: T, p_range: (T, T), r_range: (T, T), steps: usize) -> Result<SweepGrid<T>> {
    sweep(&SweepSpec {
        a,
        q,
        p_axis: AxisRange::new(p_range.0, p_range.1, steps)?,
        r_axis: AxisRange::new(r_range.0, r_range.1, steps)?,
        partials_h: None,
    })
}

/// Same grid as [`eta_surface`]; each middle cell carries a [`DensifyLabel`].
pub fn densification_map<T: Scalar>(a: T, q: T, p_range: (T, T), r_range: (T, T), steps: usize) -> Result<SweepGrid<T>> {
    eta_surface(a, q, p_range, r_range, steps)
}

/// Runs `f` on a dedicated pool of `jobs` workers; `None` uses the global pool.
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Degenerate(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Sign counts of the partials over middle cells that carry them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCensus {
    /// Middle cells with all four partials.
    pub cells: usize,
    /// Middle cells skipped because a neighbour left the regime or a solve failed.
    pub excluded: usize,
    pub dp_negative: usize,
    pub dr_positive: usize,
    pub da_negative: usize,
    pub dq_positive: usize,
    pub dq_negative: usize,
}

impl SignCensus {
    pub fn fraction(&self, count: usize) -> f64 {
        if self.cells == 0 {
            0.0
        } else {
            count as f64 / self.cells as f64
        }
    }
}

pub fn sign_census<T: Scalar>(grid: &SweepGrid<T>) -> SignCensus {
    let mut c = SignCensus {
        cells: 0,
        excluded: 0,
        dp_negative: 0,
        dr_positive: 0,
        da_negative: 0,
        dq_positive: 0,
        dq_negative: 0,
    };
    for cell in grid.middle_cells() {
        let Some([dp, dq, dr, da]) = cell.partials else {
            c.excluded += 1;
            continue;
        };
        c.cells += 1;
        c.dp_negative += (dp < T::zero()) as usize;
        c.dr_positive += (dr > T::zero()) as usize;
        c.da_negative += (da < T::zero()) as usize;
        c.dq_positive += (dq > T::zero()) as usize;
        c.dq_negative += (dq < T::zero()) as usize;
    }
    c
}

pub const CSV_HEADER: [&str; 8] = ["p", "r", "region", "eta", "deta_dp", "deta_dq", "deta_dr", "deta_da"];

/// One row per cell in index order; undefined values are empty fields.
pub fn write_csv<T: Scalar, W: Write>(grid: &SweepGrid<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(crate::error::IoError(e.to_string()));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let fmt = |x: Option<T>| x.map(|v| v.to_string()).unwrap_or_default();
    for c in &grid.cells {
        let d = c.partials;
        let region = c.region.map(|t| t.as_str()).unwrap_or("");
        w.write_record([
            c.p.to_string(),
            c.r.to_string(),
            region.to_string(),
            fmt(c.eta),
            fmt(d.map(|d| d[0])),
            fmt(d.map(|d| d[1])),
            fmt(d.map(|d| d[2])),
            fmt(d.map(|d| d[3])),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
