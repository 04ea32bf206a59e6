//! Run configuration read from JSON.

use std::fs;
use std::path::{Path, PathBuf};

use momentot::conic::SolverOptions;
use momentot::formulations::{FixedPointOptions, GwCost};
use momentot::moments::{descriptor_moments, MaskGrid, MeasureDescriptor, TruncatedMomentSequence, Univariate};
use momentot::polyalg::{Polynomial, SemialgebraicSet};
use momentot::postprocess::DEFAULT_ETA;
use momentot::relaxation::RelaxationOptions;
use momentot::shapes::{rotate, Smiley};
use momentot::{io, Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    /// Domain shared by all marginals unless `sets` is given.
    pub set: Option<SetSpec>,
    /// One domain per marginal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<SetSpec>>,
    pub marginals: Vec<MarginalSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orders: Option<OrderRange>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub schmudgen: bool,
    #[serde(default)]
    pub fixed_point: FixedPointSpec,
    #[serde(default)]
    pub postprocess: PostprocessSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderRange {
    pub min: usize,
    pub max: usize,
}

impl std::str::FromStr for OrderRange {
    type Err = String;

    /// `a..b` (inclusive) or a single order.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad order {t:?}: {e}"));
        let (min, max) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => (parse(s)?, parse(s)?),
        };
        if min > max {
            return Err(format!("empty order range {s:?}"));
        }
        Ok(Self { min, max })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `W_p^p` between two marginals.
    Wasserstein { p: u32 },
    /// Multi-marginal transport with a polynomial cost in the concatenated
    /// variables of all marginals.
    Multimarginal { cost: String },
    /// `min_nu sum_i w_i W_p^p(nu, mu_i)`, once per weight vector.
    Barycenter { p: u32, weights: Vec<Vec<f64>> },
    /// Gromov-Wasserstein discrepancy with intra-space costs.
    GromovWasserstein {
        p: u32,
        #[serde(default = "default_gw_cost")]
        cost_x: CostSpec,
        #[serde(default = "default_gw_cost")]
        cost_y: CostSpec,
    },
    /// Gromov-Wasserstein barycenter with `p = q = 2`, once per weight
    /// vector. The barycenter lives on the first set.
    GwBarycenter { weights: Vec<Vec<f64>> },
}

fn default_gw_cost() -> CostSpec {
    CostSpec::Lq { q: 2 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CostSpec {
    /// `sum_i |x_i - x'_i|^q`, `q` even.
    Lq { q: u32 },
    /// Polynomial text in `x1..x2n`, the first `n` for `x` and the rest for `x'`.
    Polynomial { expr: String },
}

impl CostSpec {
    pub fn to_cost(&self, dim: usize) -> Result<GwCost> {
        match self {
            CostSpec::Lq { q } => Ok(GwCost::Lq(*q)),
            CostSpec::Polynomial { expr } => Ok(GwCost::Polynomial(Polynomial::parse(expr, 2 * dim)?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `{x : g_j(x) >= 0}` intersected with the given ball.
    Polynomial {
        dim: usize,
        inequalities: Vec<String>,
        center: Vec<f64>,
        radius: f64,
    },
}

impl SetSpec {
    pub fn build(&self) -> Result<SemialgebraicSet> {
        match self {
            SetSpec::Box { lo, hi } => SemialgebraicSet::boxed(lo, hi),
            SetSpec::Ball { center, radius } => SemialgebraicSet::ball(center.clone(), *radius),
            SetSpec::Polynomial { dim, inequalities, center, radius } => {
                let g = inequalities.iter().map(|s| Polynomial::parse(s, *dim)).collect::<Result<Vec<_>>>()?;
                SemialgebraicSet::with_ball(*dim, g, center.clone(), *radius)
            }
        }
    }

    /// Axis-aligned bounding box, used as the default plotting window.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            SetSpec::Box { lo, hi } => (lo.clone(), hi.clone()),
            SetSpec::Ball { center, radius } | SetSpec::Polynomial { center, radius, .. } => {
                (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
        }
    }
}

/// Where a marginal's moments come from. Relative paths are resolved
/// against the directory of the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MarginalSource {
    /// `x1,...,xn[,w]` rows.
    PointsCsv { path: PathBuf },
    /// `alpha_1,...,alpha_n,value` rows.
    MomentsCsv { path: PathBuf },
    /// Uniform measure on the bright (or, with `invert`, dark) pixels.
    MaskPgm {
        path: PathBuf,
        origin: [f64; 2],
        extent: [f64; 2],
        #[serde(default = "half")]
        threshold: f64,
        #[serde(default)]
        invert: bool,
    },
    /// Uniform measure on the cells marked `1`.
    MaskCsv { path: PathBuf, origin: [f64; 2], extent: [f64; 2] },
    Empirical {
        points: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    /// Product of one-dimensional laws.
    ClosedForm { factors: Vec<Univariate> },
    /// Uniform measure on a rasterized smiley face covering the unit square.
    SmileyMask {
        center: [f64; 2],
        radius: f64,
        resolution: usize,
        #[serde(default)]
        translate: [f64; 2],
    },
    /// `n` seeded samples from the eyes and mouth of a smiley face,
    /// optionally rotated about its center.
    SmileySamples {
        center: [f64; 2],
        radius: f64,
        n: usize,
        #[serde(default)]
        rotate: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

fn half() -> f64 {
    0.5
}

impl MarginalSource {
    fn descriptor(&self, base: &Path, seed: u64, dim: usize) -> Result<DescriptorOrMoments> {
        let path = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let mask = |m: MaskGrid| Ok(DescriptorOrMoments::Descriptor(MeasureDescriptor::UniformMask(m)));
        match self {
            MarginalSource::PointsCsv { path: p } => {
                let (points, weights) = io::read_points_csv(&path(p), dim)?;
                Ok(DescriptorOrMoments::Descriptor(MeasureDescriptor::Empirical { points, weights }))
            }
            MarginalSource::MomentsCsv { path: p } => Ok(DescriptorOrMoments::Moments(io::read_moments_csv(&path(p))?)),
            MarginalSource::MaskPgm { path: p, origin, extent, threshold, invert } => {
                mask(io::read_pgm(&path(p))?.to_mask(*origin, *extent, *threshold, *invert)?)
            }
            MarginalSource::MaskCsv { path: p, origin, extent } => mask(io::read_mask_csv(&path(p), *origin, *extent)?),
            MarginalSource::Empirical { points, weights } => {
                Ok(DescriptorOrMoments::Descriptor(MeasureDescriptor::Empirical {
                    points: points.clone(),
                    weights: weights.clone(),
                }))
            }
            MarginalSource::ClosedForm { factors } => {
                Ok(DescriptorOrMoments::Descriptor(MeasureDescriptor::ClosedForm(factors.clone())))
            }
            MarginalSource::SmileyMask { center, radius, resolution, translate } => {
                if *resolution == 0 {
                    return Err(Error::InvalidArgument("mask resolution must be positive".into()));
                }
                mask(Smiley::new(*center, *radius).mask(*resolution).translated(*translate))
            }
            MarginalSource::SmileySamples { center, radius, n, rotate: angle, seed: s } => {
                let pts = Smiley::new(*center, *radius).sample_features(*n, s.unwrap_or(seed));
                let points = rotate(&pts, *center, *angle);
                Ok(DescriptorOrMoments::Descriptor(MeasureDescriptor::Empirical { points, weights: None }))
            }
        }
    }
}

enum DescriptorOrMoments {
    Descriptor(MeasureDescriptor),
    Moments(TruncatedMomentSequence),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedPointSpec {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for FixedPointSpec {
    fn default() -> Self {
        let d = FixedPointOptions::default();
        Self { tol: d.tol, max_iter: d.max_iter, damping: d.damping }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostprocessSpec {
    pub eta: f64,
    /// Grid points per axis.
    pub grid: Vec<usize>,
    /// Plotting window; defaults to the bounding box of the first set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_lo: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_hi: Option<Vec<f64>>,
    /// Order of the Christoffel function; defaults to the relaxation order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub christoffel_order: Option<usize>,
    /// Moments to analyze with `support`; when absent the problem is solved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moments: Option<PathBuf>,
    /// Also render two-dimensional label grids as PGM.
    pub pgm: bool,
}

impl Default for PostprocessSpec {
    fn default() -> Self {
        Self {
            eta: DEFAULT_ETA,
            grid: vec![100, 100],
            grid_lo: None,
            grid_hi: None,
            christoffel_order: None,
            moments: None,
            pgm: true,
        }
    }
}

/// Marginal moments and domains ready for the problem builders.
pub struct LoadedData {
    pub marginals: Vec<TruncatedMomentSequence>,
    pub sets: Vec<SemialgebraicSet>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { offset: e.line(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn relaxation_options(&self) -> RelaxationOptions {
        RelaxationOptions { solver: self.solver.clone(), schmudgen: self.schmudgen }
    }

    pub fn fixed_point_options(&self) -> FixedPointOptions {
        FixedPointOptions {
            tol: self.fixed_point.tol,
            max_iter: self.fixed_point.max_iter,
            damping: self.fixed_point.damping,
            relaxation: self.relaxation_options(),
        }
    }

    pub fn set_specs(&self) -> Result<Vec<SetSpec>> {
        let n = self.marginals.len();
        match (&self.set, &self.sets) {
            (_, Some(s)) if s.len() == n => Ok(s.clone()),
            (_, Some(s)) => Err(Error::DimensionMismatch { expected: n, found: s.len() }),
            (Some(s), None) => Ok(vec![s.clone(); n]),
            (None, None) => Err(Error::InvalidArgument("config needs `set` or `sets`".into())),
        }
    }

    /// Reads every marginal and computes its moments up to `order`.
    pub fn load_data(&self, base: &Path, order: usize) -> Result<LoadedData> {
        if self.marginals.is_empty() {
            return Err(Error::InvalidArgument("no marginals given".into()));
        }
        let sets = self.set_specs()?.iter().map(SetSpec::build).collect::<Result<Vec<_>>>()?;
        let mut marginals = Vec::with_capacity(sets.len());
        for (i, (m, set)) in self.marginals.iter().zip(&sets).enumerate() {
            let seed = self.seed.wrapping_add(i as u64);
            let y = match m.descriptor(base, seed, set.dim())? {
                DescriptorOrMoments::Descriptor(d) => descriptor_moments(&d, set, order)?,
                DescriptorOrMoments::Moments(y) => {
                    if y.dim() != set.dim() {
                        return Err(Error::DimensionMismatch { expected: set.dim(), found: y.dim() });
                    }
                    if y.order() < order {
                        return Err(Error::DegreeOverflow { needed: order, available: y.order() });
                    }
                    y.truncate(order)?
                }
            };
            marginals.push(y);
        }
        Ok(LoadedData { marginals, sets })
    }
}
