//! Semantic-versus-bit rate regions: grid sweeps over allocations, Pareto
//! frontier extraction and region containment under time-sharing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::access::{
    evaluate_oma, semi_noma_rates, validate_allocation, Allocation, DownlinkScenario, RatePair, SchemeKind,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionSweepConfig {
    /// Number of shared-band fractions sampled on `[0, 1]`.
    pub band_grid: usize,
    /// Number of samples per power-split dimension on `[0, 1]`.
    pub power_grid: usize,
    /// Ceiling on `band_grid * power_grid^2`.
    pub max_points: u64,
}

impl Default for RegionSweepConfig {
    fn default() -> Self {
        RegionSweepConfig {
            band_grid: 101,
            power_grid: 101,
            max_points: 10_000_000,
        }
    }
}

impl RegionSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.band_grid < 2 || self.power_grid < 2 {
            return Err(Error::Config(format!(
                "region grids need at least 2 samples, got band_grid={}, power_grid={}",
                self.band_grid, self.power_grid
            )));
        }
        let points = (self.band_grid as u64)
            .checked_mul(self.power_grid as u64)
            .and_then(|x| x.checked_mul(self.power_grid as u64));
        match points {
            Some(p) if p <= self.max_points => Ok(()),
            _ => Err(Error::Config(format!(
                "region grid {}x{}x{} exceeds the ceiling of {} points",
                self.band_grid, self.power_grid, self.power_grid, self.max_points
            ))),
        }
    }

    /// Rate step corresponding to one grid cell on a region of the given extent.
    pub fn cell_step(&self, max_semantic: f64, max_bit: f64) -> RateTolerance {
        let cells = (self.band_grid.min(self.power_grid) - 1) as f64;
        RateTolerance {
            semantic: max_semantic / cells,
            bit: max_bit / cells,
        }
    }
}

#[inline]
fn grid(i: usize, n: usize) -> f64 {
    i as f64 / (n - 1) as f64
}

/// Evaluates every admissible grid allocation of `scheme`, in grid-index order.
///
/// * OMA: `alpha` x power split `(t P, (1 - t) P)`.
/// * NOMA: power split only.
/// * Semi-NOMA: `alpha` x `(a, b)` with `P_s = a P`, `P_bn = b (1 - a) P` and the
///   remainder on the orthogonal sub-band. Points that would put power on a
///   zero-width sub-band are skipped.
pub fn sweep_region(
    scenario: &DownlinkScenario,
    scheme: SchemeKind,
    config: &RegionSweepConfig,
) -> Result<Vec<RatePair>> {
    config.validate()?;
    scenario.validate()?;
    let (nb, np) = (config.band_grid, config.power_grid);
    let p = scenario.total_power;
    match scheme {
        SchemeKind::Oma => (0..nb)
            .into_par_iter()
            .map(|i| {
                (0..np)
                    .map(|j| {
                        let t = grid(j, np);
                        evaluate_oma(scenario, grid(i, nb), t * p, (1.0 - t) * p)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map(|rows| rows.into_iter().flatten().collect()),
        SchemeKind::Noma => Ok((0..np)
            .into_par_iter()
            .map(|j| {
                let t = grid(j, np);
                semi_noma_rates(scenario, &Allocation::noma(t * p, (1.0 - t) * p)).pair()
            })
            .collect()),
        SchemeKind::SemiNoma => Ok((0..nb)
            .into_par_iter()
            .map(|i| {
                let alpha = grid(i, nb);
                let mut row = Vec::with_capacity(np * np);
                for j in 0..np {
                    let a = grid(j, np);
                    for l in 0..np {
                        let b = grid(l, np);
                        let alloc = Allocation {
                            shared_band_fraction: alpha,
                            semantic_power: a * p,
                            bit_power_shared: b * (1.0 - a) * p,
                            bit_power_orth: (1.0 - b) * (1.0 - a) * p,
                        };
                        if validate_allocation(scenario, &alloc, SchemeKind::SemiNoma).is_ok() {
                            row.push(semi_noma_rates(scenario, &alloc).pair());
                        }
                    }
                }
                row
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()),
    }
}

/// Additive slack for containment tests.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateTolerance {
    pub semantic: f64,
    pub bit: f64,
}

impl RateTolerance {
    pub const ZERO: RateTolerance = RateTolerance {
        semantic: 0.0,
        bit: 0.0,
    };
}

/// Non-dominated rate pairs, sorted by semantic rate ascending (so bit rate is
/// strictly descending).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFrontier {
    pub scheme: Option<SchemeKind>,
    points: Vec<RatePair>,
}

impl ParetoFrontier {
    pub fn points(&self) -> &[RatePair] {
        &self.points
    }

    pub fn with_scheme(mut self, scheme: SchemeKind) -> Self {
        self.scheme = Some(scheme);
        self
    }

    pub fn max_semantic(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.semantic)
    }

    pub fn max_bit(&self) -> f64 {
        self.points.first().map_or(0.0, |p| p.bit)
    }

    /// Largest bit rate achievable, by time-sharing adjacent frontier points,
    /// together with at least `semantic` suts/s. `None` beyond the region.
    pub fn max_bit_at(&self, semantic: f64) -> Option<f64> {
        let pts = &self.points;
        let first = pts.first()?;
        if semantic <= first.semantic {
            return Some(first.bit);
        }
        let k = pts.partition_point(|p| p.semantic < semantic);
        let hi = pts.get(k)?;
        if hi.semantic == semantic {
            return Some(hi.bit);
        }
        let lo = &pts[k - 1];
        let t = (semantic - lo.semantic) / (hi.semantic - lo.semantic);
        Some(lo.bit + t * (hi.bit - lo.bit))
    }

    /// Mirror of [`max_bit_at`](Self::max_bit_at) along the other axis.
    pub fn max_semantic_at(&self, bit: f64) -> Option<f64> {
        let pts = &self.points;
        let last = pts.last()?;
        if bit <= last.bit {
            return Some(last.semantic);
        }
        // Bits are strictly descending: count the points with bit > target.
        let k = pts.partition_point(|p| p.bit > bit);
        if k == 0 {
            return if pts[0].bit == bit {
                Some(pts[0].semantic)
            } else {
                None
            };
        }
        let lo = &pts[k - 1];
        let hi = &pts[k];
        if hi.bit == bit {
            return Some(hi.semantic);
        }
        let t = (lo.bit - bit) / (lo.bit - hi.bit);
        Some(lo.semantic + t * (hi.semantic - lo.semantic))
    }

    /// How far `point` sticks out of this region along each axis: the semantic
    /// gap at the point's bit rate and the bit gap at its semantic rate.
    /// Infinite when the point lies beyond the region's extent on that axis.
    pub fn excess(&self, point: &RatePair) -> (f64, f64) {
        let s_gap = self
            .max_semantic_at(point.bit)
            .map_or(f64::INFINITY, |s| point.semantic - s);
        let b_gap = self
            .max_bit_at(point.semantic)
            .map_or(f64::INFINITY, |b| point.bit - b);
        (s_gap, b_gap)
    }
}

/// Sort-and-scan maximal-set extraction, `O(n log n)`.
pub fn pareto_frontier(points: &[RatePair]) -> Result<ParetoFrontier> {
    if points.is_empty() {
        return Err(Error::invalid("cannot build a frontier from zero points"));
    }
    if let Some(p) = points
        .iter()
        .find(|p| !(p.semantic.is_finite() && p.bit.is_finite()))
    {
        return Err(Error::invalid(format!("non-finite rate pair {p:?}")));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| b.semantic.total_cmp(&a.semantic).then(b.bit.total_cmp(&a.bit)));
    let mut frontier = Vec::new();
    let mut best_bit = f64::NEG_INFINITY;
    for p in sorted {
        if p.bit > best_bit {
            best_bit = p.bit;
            frontier.push(p);
        }
    }
    frontier.reverse();
    Ok(ParetoFrontier {
        scheme: None,
        points: frontier,
    })
}

pub fn sweep_frontier(
    scenario: &DownlinkScenario,
    scheme: SchemeKind,
    config: &RegionSweepConfig,
) -> Result<ParetoFrontier> {
    let points = sweep_region(scenario, scheme, config)?;
    Ok(pareto_frontier(&points)?.with_scheme(scheme))
}

/// True iff every inner frontier point lies in the outer region (downward and
/// time-sharing closure of the outer frontier) after relaxing by `tolerance`.
pub fn region_dominates(outer: &ParetoFrontier, inner: &ParetoFrontier, tolerance: RateTolerance) -> bool {
    inner.points.iter().all(|q| {
        let probe = (q.semantic - tolerance.semantic).max(0.0);
        outer
            .max_bit_at(probe)
            .is_some_and(|b| b >= q.bit - tolerance.bit)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{LinkGain, NoiseModel};
    use crate::rates::SemanticTextModel;
    use proptest::prelude::*;

    fn rp(s: f64, b: f64) -> RatePair {
        RatePair::new(s, b)
    }

    fn scenario(gs: f64) -> DownlinkScenario {
        DownlinkScenario::new(
            LinkGain::new(gs).unwrap(),
            LinkGain::new(1.0).unwrap(),
            1.0,
            1e6,
            NoiseModel::new(1e-9).unwrap(),
            SemanticTextModel::default(),
        )
        .unwrap()
    }

    fn brute_force(points: &[RatePair]) -> Vec<RatePair> {
        let mut out: Vec<RatePair> = points
            .iter()
            .filter(|q| !points.iter().any(|p| p.dominates(q)))
            .copied()
            .collect();
        out.sort_by(|a, b| a.semantic.total_cmp(&b.semantic));
        out.dedup();
        out
    }

    #[test]
    fn frontier_examples() {
        let f = pareto_frontier(&[rp(1.0, 1.0), rp(2.0, 0.5), rp(0.5, 2.0)]).unwrap();
        assert_eq!(f.points(), &[rp(0.5, 2.0), rp(1.0, 1.0), rp(2.0, 0.5)]);
        let f = pareto_frontier(&[rp(1.0, 1.0), rp(1.0, 2.0)]).unwrap();
        assert_eq!(f.points(), &[rp(1.0, 2.0)]);
        let f = pareto_frontier(&[rp(1.0, 1.0), rp(1.0, 1.0)]).unwrap();
        assert_eq!(f.points(), &[rp(1.0, 1.0)]);
        assert!(pareto_frontier(&[]).is_err());
        assert!(pareto_frontier(&[rp(f64::NAN, 1.0)]).is_err());
    }

    #[test]
    fn config_validation() {
        let c = RegionSweepConfig {
            band_grid: 1,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = RegionSweepConfig {
            band_grid: 1000,
            power_grid: 1000,
            max_points: 10_000_000,
        };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        RegionSweepConfig::default().validate().unwrap();
    }

    #[test]
    fn oma_two_by_two_is_the_corners() {
        let scn = scenario(1.0);
        let cfg = RegionSweepConfig {
            band_grid: 2,
            power_grid: 2,
            ..Default::default()
        };
        let pts = sweep_region(&scn, SchemeKind::Oma, &cfg).unwrap();
        let mut expect = Vec::new();
        for alpha in [0.0, 1.0] {
            for t in [0.0, 1.0] {
                expect.push(evaluate_oma(&scn, alpha, t, 1.0 - t).unwrap());
            }
        }
        assert_eq!(pts, expect);
    }

    #[test]
    fn noma_sweep_contains_b_only_corner() {
        let scn = scenario(4.0);
        let cfg = RegionSweepConfig {
            band_grid: 3,
            power_grid: 11,
            ..Default::default()
        };
        let pts = sweep_region(&scn, SchemeKind::Noma, &cfg).unwrap();
        assert_eq!(pts.len(), 11);
        assert!(pts.contains(&rp(0.0, scn.interference_free_bit_rate())));
    }

    #[test]
    fn semi_noma_sweep_contains_other_schemes() {
        let scn = scenario(0.25);
        let cfg = RegionSweepConfig {
            band_grid: 6,
            power_grid: 7,
            ..Default::default()
        };
        let semi = sweep_region(&scn, SchemeKind::SemiNoma, &cfg).unwrap();
        let frontier = pareto_frontier(&semi).unwrap();
        for scheme in [SchemeKind::Oma, SchemeKind::Noma] {
            for q in sweep_region(&scn, scheme, &cfg).unwrap() {
                // Either the identical point exists or it is weakly dominated by
                // a semi-NOMA grid point (OMA power on a zero-width band).
                let covered = semi.iter().any(|p| p.semantic >= q.semantic && p.bit >= q.bit);
                assert!(covered, "{scheme}: {q:?} not covered");
            }
            let other = sweep_frontier(&scn, scheme, &cfg).unwrap();
            assert!(region_dominates(&frontier, &other, RateTolerance::ZERO));
        }
    }

    #[test]
    fn dominance_examples() {
        let f = pareto_frontier(&[rp(0.0, 3.0), rp(1.0, 2.0), rp(2.0, 0.0)]).unwrap();
        assert!(region_dominates(&f, &f, RateTolerance::ZERO));
        let scaled = pareto_frontier(
            &f.points()
                .iter()
                .map(|p| rp(1.1 * p.semantic, 1.1 * p.bit))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert!(region_dominates(&scaled, &f, RateTolerance::ZERO));
        assert!(!region_dominates(&f, &scaled, RateTolerance::ZERO));
        // Time-sharing: midpoint of (0,3)-(1,2) is inside.
        let mid = pareto_frontier(&[rp(0.5, 2.5)]).unwrap();
        assert!(region_dominates(&f, &mid, RateTolerance::ZERO));
        let out = pareto_frontier(&[rp(0.5, 2.6)]).unwrap();
        assert!(!region_dominates(&f, &out, RateTolerance::ZERO));
        assert!(region_dominates(
            &f,
            &out,
            RateTolerance {
                semantic: 0.0,
                bit: 0.1
            }
        ));
        assert!(region_dominates(
            &f,
            &out,
            RateTolerance {
                semantic: 0.1,
                bit: 0.0
            }
        ));
        let far = pareto_frontier(&[rp(2.5, 0.0)]).unwrap();
        assert!(!region_dominates(&f, &far, RateTolerance::ZERO));
    }

    #[test]
    fn boundary_queries() {
        let f = pareto_frontier(&[rp(1.0, 4.0), rp(2.0, 2.0), rp(4.0, 1.0)]).unwrap();
        assert_eq!(f.max_bit_at(0.0), Some(4.0));
        assert_eq!(f.max_bit_at(1.5), Some(3.0));
        assert_eq!(f.max_bit_at(4.0), Some(1.0));
        assert_eq!(f.max_bit_at(4.1), None);
        assert_eq!(f.max_semantic_at(0.0), Some(4.0));
        assert_eq!(f.max_semantic_at(1.5), Some(3.0));
        assert_eq!(f.max_semantic_at(3.0), Some(1.5));
        assert_eq!(f.max_semantic_at(4.0), Some(1.0));
        assert_eq!(f.max_semantic_at(4.5), None);
        let (s_gap, b_gap) = f.excess(&rp(3.0, 2.5));
        assert_eq!(s_gap, 3.0 - 1.75);
        assert_eq!(b_gap, 2.5 - 1.5);
    }

    #[test]
    fn refining_the_grid_never_shrinks() {
        let scn = scenario(1.0);
        for scheme in SchemeKind::ALL {
            let coarse = sweep_frontier(
                &scn,
                scheme,
                &RegionSweepConfig {
                    band_grid: 6,
                    power_grid: 6,
                    ..Default::default()
                },
            )
            .unwrap();
            let fine = sweep_frontier(
                &scn,
                scheme,
                &RegionSweepConfig {
                    band_grid: 11,
                    power_grid: 11,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(region_dominates(&fine, &coarse, RateTolerance::ZERO), "{scheme}");
        }
    }

    proptest! {
        #[test]
        fn matches_brute_force(raw in prop::collection::vec((0u8..20, 0u8..20), 1..200)) {
            // Small integer lattice forces ties and duplicates.
            let pts: Vec<RatePair> = raw.iter().map(|&(s, b)| rp(s as f64, b as f64)).collect();
            let f = pareto_frontier(&pts).unwrap();
            let expected = brute_force(&pts);
            prop_assert_eq!(f.points(), expected.as_slice());
            for w in f.points().windows(2) {
                prop_assert!(w[0].semantic < w[1].semantic && w[0].bit > w[1].bit);
            }
            let again = pareto_frontier(f.points()).unwrap();
            prop_assert_eq!(again, f);
        }

        #[test]
        fn dominance_is_transitive(
            a in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..30),
            b in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..30),
            c in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..30),
        ) {
            let mk = |v: &Vec<(f64, f64)>| pareto_frontier(&v.iter().map(|&(s, b)| rp(s, b)).collect::<Vec<_>>()).unwrap();
            let (fa, fb, fc) = (mk(&a), mk(&b), mk(&c));
            let z = RateTolerance::ZERO;
            if region_dominates(&fa, &fb, z) && region_dominates(&fb, &fc, z) {
                // Interpolation rounding can misplace a point by an ulp.
                let eps = RateTolerance { semantic: 1e-9, bit: 1e-9 };
                prop_assert!(region_dominates(&fa, &fc, eps));
            }
        }
    }
}
