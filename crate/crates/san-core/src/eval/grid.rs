//! Hyperparameter grids and deterministic grid search.
//!
//! A [`GridSpec`] lists finite candidate values per hyperparameter;
//! [`ScorerTemplate::points_for`] expands the values a scorer family
//! actually consumes into [`GridPoint`]s in a canonical order. Search is
//! a strict argmax over that order, so ties resolve toward smaller rank
//! and larger restart/regularization values no matter how the caller
//! enumerated the grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scorers::{RwwrParams, ScorerSpec};
use crate::supervised::DEFAULT_LAMBDA_GRID;

/// Finite hyperparameter value lists. Scorer families read only the
/// lists they need: the low-rank family reads `ranks`, the restarting
/// walk reads `alphas`, the supervised pipelines read `lambdas`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub ranks: Vec<usize>,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            ranks: vec![100, 1000],
            alphas: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            lambdas: DEFAULT_LAMBDA_GRID.to_vec(),
        }
    }
}

impl GridSpec {
    /// Validate values and put each list in canonical search order:
    /// ranks ascending, restart and regularization weights descending,
    /// duplicates removed.
    pub fn canonical(&self) -> Result<GridSpec> {
        if self.ranks.iter().any(|&r| r == 0) {
            return Err(Error::precondition("ranks must be at least 1"));
        }
        if self.alphas.iter().any(|a| !(a.is_finite() && *a > 0.0 && *a <= 1.0)) {
            return Err(Error::precondition(
                "restart probabilities must lie in (0, 1]",
            ));
        }
        if self.lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::precondition(
                "regularization weights must be finite and nonnegative",
            ));
        }
        let mut ranks = self.ranks.clone();
        ranks.sort_unstable();
        ranks.dedup();
        let mut alphas = self.alphas.clone();
        alphas.sort_unstable_by(|a, b| b.total_cmp(a));
        alphas.dedup();
        let mut lambdas = self.lambdas.clone();
        lambdas.sort_unstable_by(|a, b| b.total_cmp(a));
        lambdas.dedup();
        Ok(GridSpec {
            ranks,
            alphas,
            lambdas,
        })
    }
}

/// One assignment of the hyperparameters a scorer family consumes;
/// unneeded fields stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GridPoint {
    pub rank: Option<usize>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
}

impl std::fmt::Display for GridPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if let Some(r) = self.rank {
            parts.push(format!("rank={r}"));
        }
        if let Some(a) = self.alpha {
            parts.push(format!("alpha={a}"));
        }
        if let Some(l) = self.lambda {
            parts.push(format!("lambda={l}"));
        }
        if parts.is_empty() {
            f.write_str("-")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// A scorer family whose concrete instance is fixed by a [`GridPoint`]
/// and a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerTemplate {
    Random,
    CommonNeighbors,
    AdamicAdar,
    LowRank,
    CnLowRank,
    AaLowRank,
    RandomWalkRestart,
    AttributeFrequency,
}

impl ScorerTemplate {
    /// The seven scorer families of the link-prediction tables, in row
    /// order.
    pub const LINK_TABLE: [ScorerTemplate; 7] = [
        ScorerTemplate::Random,
        ScorerTemplate::CommonNeighbors,
        ScorerTemplate::AdamicAdar,
        ScorerTemplate::LowRank,
        ScorerTemplate::CnLowRank,
        ScorerTemplate::AaLowRank,
        ScorerTemplate::RandomWalkRestart,
    ];

    fn needs_rank(self) -> bool {
        matches!(
            self,
            ScorerTemplate::LowRank | ScorerTemplate::CnLowRank | ScorerTemplate::AaLowRank
        )
    }

    fn needs_alpha(self) -> bool {
        self == ScorerTemplate::RandomWalkRestart
    }

    /// The grid points this family searches, in canonical order. A family
    /// without hyperparameters gets a single empty point.
    pub fn points_for(self, grid: &GridSpec) -> Result<Vec<GridPoint>> {
        let grid = grid.canonical()?;
        if self.needs_rank() {
            if grid.ranks.is_empty() {
                return Err(Error::precondition(format!("{self} needs a rank grid")));
            }
            return Ok(grid
                .ranks
                .iter()
                .map(|&r| GridPoint {
                    rank: Some(r),
                    ..GridPoint::default()
                })
                .collect());
        }
        if self.needs_alpha() {
            if grid.alphas.is_empty() {
                return Err(Error::precondition(format!(
                    "{self} needs a restart-probability grid"
                )));
            }
            return Ok(grid
                .alphas
                .iter()
                .map(|&a| GridPoint {
                    alpha: Some(a),
                    ..GridPoint::default()
                })
                .collect());
        }
        Ok(vec![GridPoint::default()])
    }

    /// Fix a concrete scorer from a grid point. The seed feeds the
    /// seeded scorers (random baseline, factorizations) and is ignored by
    /// the rest.
    pub fn instantiate(self, point: &GridPoint, seed: u64) -> Result<ScorerSpec> {
        let rank = || {
            point.rank.ok_or_else(|| {
                Error::precondition(format!("{self} needs a rank in its grid point"))
            })
        };
        Ok(match self {
            ScorerTemplate::Random => ScorerSpec::Random { seed },
            ScorerTemplate::CommonNeighbors => ScorerSpec::CommonNeighbors,
            ScorerTemplate::AdamicAdar => ScorerSpec::AdamicAdar,
            ScorerTemplate::LowRank => ScorerSpec::LowRank { rank: rank()?, seed },
            ScorerTemplate::CnLowRank => ScorerSpec::CnLowRank { rank: rank()?, seed },
            ScorerTemplate::AaLowRank => ScorerSpec::AaLowRank { rank: rank()?, seed },
            ScorerTemplate::RandomWalkRestart => {
                let alpha = point.alpha.ok_or_else(|| {
                    Error::precondition(format!(
                        "{self} needs a restart probability in its grid point"
                    ))
                })?;
                ScorerSpec::RandomWalkRestart {
                    params: RwwrParams {
                        alpha,
                        ..RwwrParams::default()
                    },
                }
            }
            ScorerTemplate::AttributeFrequency => ScorerSpec::AttributeFrequency,
        })
    }
}

impl std::fmt::Display for ScorerTemplate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScorerTemplate::Random => "random",
            ScorerTemplate::CommonNeighbors => "common_neighbors",
            ScorerTemplate::AdamicAdar => "adamic_adar",
            ScorerTemplate::LowRank => "low_rank",
            ScorerTemplate::CnLowRank => "cn_low_rank",
            ScorerTemplate::AaLowRank => "aa_low_rank",
            ScorerTemplate::RandomWalkRestart => "random_walk_restart",
            ScorerTemplate::AttributeFrequency => "attribute_frequency",
        })
    }
}

impl std::str::FromStr for ScorerTemplate {
    type Err = Error;

    fn from_str(s: &str) -> Result<ScorerTemplate> {
        Ok(match s {
            "random" => ScorerTemplate::Random,
            "common_neighbors" | "cn" => ScorerTemplate::CommonNeighbors,
            "adamic_adar" | "aa" => ScorerTemplate::AdamicAdar,
            "low_rank" | "lra" => ScorerTemplate::LowRank,
            "cn_low_rank" | "cn_lra" => ScorerTemplate::CnLowRank,
            "aa_low_rank" | "aa_lra" => ScorerTemplate::AaLowRank,
            "random_walk_restart" | "rwwr" => ScorerTemplate::RandomWalkRestart,
            "attribute_frequency" | "baseline" => ScorerTemplate::AttributeFrequency,
            other => {
                return Err(Error::parse(
                    "scorer",
                    None,
                    format!("unknown scorer {other:?}"),
                ))
            }
        })
    }
}

/// Strict argmax of `eval` over `points`, in order: a later point must
/// strictly beat the incumbent, so with canonically ordered points the
/// tie-break prefers smaller ranks and larger restart probabilities.
pub fn grid_search(
    points: &[GridPoint],
    mut eval: impl FnMut(&GridPoint) -> Result<f64>,
) -> Result<(GridPoint, f64)> {
    if points.is_empty() {
        return Err(Error::precondition("grid search needs at least one point"));
    }
    let mut best: Option<(GridPoint, f64)> = None;
    for point in points {
        let value = eval(point)?;
        if !value.is_finite() {
            return Err(Error::precondition(format!(
                "grid point {point} evaluated to non-finite {value}"
            )));
        }
        if best.map_or(true, |(_, incumbent)| value > incumbent) {
            best = Some((*point, value));
        }
    }
    Ok(best.expect("non-empty grid"))
}
