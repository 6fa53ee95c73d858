use serde::{Deserialize, Serialize};

use super::scan::{GridAxis, ScanCell, ScanResult};
use super::{disorder_average, McEstimate, McParams};
use crate::couplings::{beta_j_from_q, check_p, check_q};
use crate::error::{check_domain, Error, Result};
use crate::lattice::{Boundary, Lattice2D};
use crate::rng::derive_seed;

/// The one-parameter family a Binder curve runs along.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveAxis {
    /// `x = βJ` at fixed disorder `p`.
    BetaJ { p: f64 },
    /// `x = p = q`.
    Nishimori,
    /// `x = q` at fixed disorder `p`.
    Q { p: f64 },
}

impl CurveAxis {
    /// `(p, βJ)` at coordinate `x`.
    pub fn point(self, x: f64) -> Result<(f64, f64)> {
        match self {
            CurveAxis::BetaJ { p } => {
                check_domain("beta_J", x, x >= 0.0, "[0, inf)")?;
                Ok((p, x))
            }
            CurveAxis::Nishimori => {
                check_q(x)?;
                Ok((x, beta_j_from_q(x)))
            }
            CurveAxis::Q { p } => {
                check_q(x)?;
                Ok((p, beta_j_from_q(x)))
            }
        }
    }

    /// Whether the ordered phase lies at large `x`.
    pub fn ordered_at_high_x(self) -> bool {
        matches!(self, CurveAxis::BetaJ { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinderPoint {
    pub x: f64,
    pub binder: f64,
    pub binder_error: f64,
    /// Disorder-averaged `|m|`.
    pub order: McEstimate,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinderCurve {
    pub linear_size: usize,
    pub axis: CurveAxis,
    pub n_disorder: usize,
    pub sweeps: usize,
    pub points: Vec<BinderPoint>,
}

impl BinderCurve {
    /// The `|m|` estimates as a scan; `βJ` curves are reported against `T`.
    pub fn to_scan_result(&self) -> ScanResult {
        let (grid, cell): (GridAxis, fn(CurveAxis, f64) -> (f64, f64)) = match self.axis {
            CurveAxis::BetaJ { .. } => (GridAxis::T, |a, x| match a {
                CurveAxis::BetaJ { p } => (p, 1.0 / x),
                _ => unreachable!(),
            }),
            _ => (GridAxis::Q, |a, x| match a {
                CurveAxis::Q { p } => (p, x),
                _ => (x, x),
            }),
        };
        ScanResult {
            axis: grid,
            linear_size: self.linear_size,
            boundary: Boundary::Torus,
            cells: self
                .points
                .iter()
                .map(|pt| {
                    let (p, x) = cell(self.axis, pt.x);
                    ScanCell {
                        p,
                        x,
                        estimate: Some(pt.order),
                        n_disorder: self.n_disorder,
                        sweeps: self.sweeps,
                        seed: pt.seed,
                        failure: None,
                    }
                })
                .collect(),
        }
    }
}

/// Binder cumulant and `|m|` along `xs` on an `L × L` torus. Point `k` uses
/// the master seed `derive_seed(params.seed, L, k)`; the size, boundary,
/// `p` and `βJ` fields of `params` are overridden.
pub fn binder_curve(linear_size: usize, axis: CurveAxis, xs: &[f64], params: &McParams) -> Result<BinderCurve> {
    let lattice = Lattice2D::new(linear_size, linear_size, Boundary::Torus)?;
    let mut points = Vec::with_capacity(xs.len());
    for (k, &x) in xs.iter().enumerate() {
        let (p, beta_j) = axis.point(x)?;
        check_p(p)?;
        let seed = derive_seed(params.seed, linear_size as u64, k as u64);
        let cell = McParams {
            linear_size,
            boundary: Boundary::Torus,
            beta_j,
            disorder_p: p,
            seed,
            ..params.clone()
        };
        let avg = disorder_average(&lattice, &cell)?;
        let (binder, binder_error) = avg.binder();
        log::debug!("L={linear_size} x={x}: U={binder:.4}±{binder_error:.4} |m|={:.4}", avg.estimate.mean);
        points.push(BinderPoint {
            x,
            binder,
            binder_error,
            order: avg.estimate,
            seed,
        });
    }
    Ok(BinderCurve {
        linear_size,
        axis,
        n_disorder: params.n_disorder,
        sweeps: params.total_sweeps(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub small: usize,
    pub large: usize,
    pub x: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Average over size pairs.
    pub x: f64,
    pub std_error: f64,
    pub pairs: Vec<PairCrossing>,
}

/// Crossing of two curves sampled on the same grid.
///
/// `D = U_large - U_small` is negative in the disordered phase and positive
/// in the ordered one. Among the grid intervals where `D` changes sign in
/// that sense, the one with the most significant change is interpolated
/// linearly; its error comes from propagating both endpoint errors.
fn pair_crossing(a: &BinderCurve, b: &BinderCurve) -> Result<PairCrossing> {
    let (small, large) = if a.linear_size <= b.linear_size { (a, b) } else { (b, a) };
    if small.points.len() != large.points.len()
        || small.points.iter().zip(&large.points).any(|(s, l)| s.x != l.x)
    {
        return Err(Error::NotBracketed("curves are sampled on different grids".into()));
    }
    let mut pts: Vec<(f64, f64, f64)> = small
        .points
        .iter()
        .zip(&large.points)
        .map(|(s, l)| (s.x, l.binder - s.binder, l.binder_error.hypot(s.binder_error)))
        .collect();
    pts.sort_by(|u, v| u.0.total_cmp(&v.0));
    let high = small.axis.ordered_at_high_x();
    let mut best: Option<(f64, PairCrossing)> = None;
    for w in pts.windows(2) {
        let ((xa, da, sa), (xb, db, sb)) = (w[0], w[1]);
        let sense = if high { da < 0.0 && db >= 0.0 } else { da >= 0.0 && db < 0.0 };
        if !sense {
            continue;
        }
        let delta = da - db;
        let x = xa + (xb - xa) * da / delta;
        let ga = (xb - xa) * (-db) / (delta * delta);
        let gb = (xb - xa) * da / (delta * delta);
        let std_error = (ga * sa).hypot(gb * sb);
        let significance = delta.abs() / sa.hypot(sb).max(f64::MIN_POSITIVE);
        if best.as_ref().is_none_or(|(s, _)| significance > *s) {
            best = Some((
                significance,
                PairCrossing {
                    small: small.linear_size,
                    large: large.linear_size,
                    x,
                    std_error,
                },
            ));
        }
    }
    best.map(|(_, c)| c).ok_or_else(|| {
        Error::NotBracketed(format!(
            "Binder curves for L={} and L={} do not cross in [{}, {}]",
            small.linear_size,
            large.linear_size,
            pts.first().map_or(f64::NAN, |p| p.0),
            pts.last().map_or(f64::NAN, |p| p.0),
        ))
    })
}

/// Pairwise crossings of all size pairs, averaged.
pub fn find_crossing(curves: &[BinderCurve]) -> Result<Crossing> {
    if curves.len() < 2 {
        return Err(Error::InvalidDimension {
            what: "number of sizes",
            min: 2,
            got: curves.len(),
        });
    }
    let mut pairs = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            pairs.push(pair_crossing(&curves[i], &curves[j])?);
        }
    }
    let n = pairs.len() as f64;
    let x = pairs.iter().map(|c| c.x).sum::<f64>() / n;
    let std_error = pairs.iter().map(|c| c.std_error * c.std_error).sum::<f64>().sqrt() / n;
    Ok(Crossing { x, std_error, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingAnalysis {
    pub curves: Vec<BinderCurve>,
    pub crossing: Crossing,
}

fn analyse(sizes: &[usize], axis: CurveAxis, xs: &[f64], params: &McParams) -> Result<CrossingAnalysis> {
    if sizes.len() < 2 {
        return Err(Error::InvalidDimension {
            what: "number of sizes",
            min: 2,
            got: sizes.len(),
        });
    }
    let curves = sizes
        .iter()
        .map(|&l| binder_curve(l, axis, xs, params))
        .collect::<Result<Vec<_>>>()?;
    let crossing = find_crossing(&curves)?;
    Ok(CrossingAnalysis { curves, crossing })
}

/// Critical `βJ` at disorder `p` from Binder crossings over `beta_js`.
pub fn binder_crossing(sizes: &[usize], p: f64, beta_js: &[f64], params: &McParams) -> Result<CrossingAnalysis> {
    check_p(p)?;
    analyse(sizes, CurveAxis::BetaJ { p }, beta_js, params)
}

/// Critical point along `p = q` from Binder crossings over `ps`.
pub fn nishimori_scan(sizes: &[usize], ps: &[f64], params: &McParams) -> Result<CrossingAnalysis> {
    for &p in ps {
        check_domain("p", p, p > 0.0 && p < 0.5, "(0, 1/2)")?;
    }
    analyse(sizes, CurveAxis::Nishimori, ps, params)
}

/// Threshold `q_th(p)` of the annealed noise at quenched disorder `p`.
pub fn q_threshold(sizes: &[usize], p: f64, qs: &[f64], params: &McParams) -> Result<CrossingAnalysis> {
    check_p(p)?;
    analyse(sizes, CurveAxis::Q { p }, qs, params)
}
