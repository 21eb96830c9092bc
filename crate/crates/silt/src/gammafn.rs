//! The generalized gamma function of a multigraph.
//!
//! For a connected multigraph `G` with `E` edges and loop number `L`,
//! define
//!
//! ```text
//! Gamma_G(n) = Gamma(E + (n-1)L) / Gamma(E) * E[ P_G(u)^(n-1) ]
//! ```
//!
//! where `P_G` is the Kirchhoff-Symanzik polynomial and `u` is uniform
//! on the standard simplex of edge weights.  Special values anchor the
//! whole family: `Gamma_G(1) = 1` for every graph, `Gamma_G(2)` is the
//! number of spanning trees, and the `n = 0` values are the building
//! blocks of the moment integrals.
//!
//! Two independent Monte Carlo estimators are provided.  The plain
//! simplex average is unbiased but heavy-tailed near `n = 0`, where
//! `P^(n-1)` blows up on the simplex boundary; the ordered-sector
//! estimator decomposes the simplex by the coordinate ordering and
//! integrates each sector's exponential-tilt analytically, leaving a
//! bounded integrand with finite variance for all `n >= 0`.  Their
//! agreement is a strong end-to-end check, and two closed recurrences
//! ([`gamma_f1_recurrence`], [`gamma_f2_recurrence`]) pin the integer-
//! `n` ladders of the two smallest graphs exactly.

use crate::multigraph::{MultiGraph, MultiGraphError};
use crate::quad::{
    mc_expectation_with, ErrorMode, IntegralEstimate, McOptions, QuadError, Sampler,
};
use crate::specfun::{gamma_fn, zeta3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GammaError {
    #[error("order n must be nonnegative, got {0}")]
    NegativeOrder(f64),
    #[error("order n must be finite, got {0}")]
    NonFiniteOrder(f64),
    #[error("Monte Carlo evaluation supports at most {limit} edges, graph has {got}")]
    TooManyEdges { got: usize, limit: usize },
    #[error("Gamma_G({n}) diverges: exponent E + (n-1)L = {exponent} is not positive")]
    Pole { n: f64, exponent: f64 },
    #[error("exact evaluation only covers n = 1 and n = 2, got n = {0}")]
    ExactUnsupported(f64),
    #[error(transparent)]
    Graph(#[from] MultiGraphError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

const MAX_MC_EDGES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaMethod {
    /// Average `P^(n-1)` over uniform simplex points.
    SimplexMc,
    /// Ordered-sector decomposition with bounded weights.
    SectorMc,
    /// Closed values at `n = 1` and `n = 2` only.
    ExactTreeCount,
}

/// What to evaluate: `Gamma_graph(n)` by `method`.
#[derive(Debug, Clone)]
pub struct GammaQuery {
    pub graph: MultiGraph,
    pub n: f64,
    pub method: GammaMethod,
}

/// Evaluate a [`GammaQuery`] from `n_samples` Monte Carlo samples.
///
/// `Gamma_G(1) = 1` exactly, so `n = 1` short-circuits to an exact
/// result for every method; [`GammaMethod::ExactTreeCount`] also
/// returns the spanning-tree count exactly at `n = 2` and rejects
/// other orders.
///
/// ```
/// use silt::gammafn::{gamma_value, GammaMethod, GammaQuery};
/// use silt::multigraph::MultiGraph;
///
/// let triangle = MultiGraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
/// let q = GammaQuery { graph: triangle, n: 2.0, method: GammaMethod::ExactTreeCount };
/// assert_eq!(gamma_value(&q, 0, 0).unwrap().value, 3.0);
/// ```
///
/// Stochastic results are reproducible: equal queries,
/// sample counts and seeds give bit-identical estimates regardless of
/// thread count.
pub fn gamma_value(
    query: &GammaQuery,
    n_samples: u64,
    seed: u64,
) -> Result<IntegralEstimate, GammaError> {
    let n = query.n;
    if !n.is_finite() {
        return Err(GammaError::NonFiniteOrder(n));
    }
    if n < 0.0 {
        return Err(GammaError::NegativeOrder(n));
    }
    let e = query.graph.edge_count();
    let l = query.graph.loop_number();
    let exponent = e as f64 + (n - 1.0) * l as f64;
    if exponent <= 0.0 {
        return Err(GammaError::Pole { n, exponent });
    }
    if n == 1.0 {
        return Ok(IntegralEstimate::exact(1.0));
    }
    match query.method {
        GammaMethod::ExactTreeCount => {
            if n == 2.0 {
                let trees = query.graph.spanning_trees()?.len();
                Ok(IntegralEstimate::exact(trees as f64))
            } else {
                Err(GammaError::ExactUnsupported(n))
            }
        }
        GammaMethod::SimplexMc => simplex_mc(query, n_samples, seed),
        GammaMethod::SectorMc => sector_mc(query, n_samples, seed),
    }
}

fn simplex_mc(
    query: &GammaQuery,
    n_samples: u64,
    seed: u64,
) -> Result<IntegralEstimate, GammaError> {
    let graph = &query.graph;
    let e = graph.edge_count();
    if e > MAX_MC_EDGES {
        return Err(GammaError::TooManyEdges {
            got: e,
            limit: MAX_MC_EDGES,
        });
    }
    let n = query.n;
    let l = graph.loop_number() as f64;
    let poly = graph.symanzik()?;
    let prefactor = gamma_fn(e as f64 + (n - 1.0) * l).expect("pole checked")
        / gamma_fn(e as f64).expect("edge count is positive");
    // P^(n-1) with exact fast paths at the two integer orders used most.
    let g = move |u: &[f64]| -> f64 {
        let p = poly.eval(u);
        if n == 0.0 {
            1.0 / p
        } else if n == 2.0 {
            p
        } else {
            p.powf(n - 1.0)
        }
    };
    let mut est = mc_expectation_with(
        g,
        e,
        Sampler::DirichletSimplex,
        n_samples,
        seed,
        McOptions {
            error_mode: ErrorMode::Auto,
        },
    )?;
    est.value *= prefactor;
    est.error *= prefactor;
    Ok(est)
}

/// Per-sector data laid out for the fixed-size fast path.
struct SectorPlan {
    e: usize,
    exponent: f64,
    n_minus_1: f64,
    /// `E! * Gamma(E + (n-1)L)`.
    front: f64,
    /// Edge lists of all spanning trees.
    trees: Vec<Vec<usize>>,
}

fn sector_mc(
    query: &GammaQuery,
    n_samples: u64,
    seed: u64,
) -> Result<IntegralEstimate, GammaError> {
    let graph = &query.graph;
    let e = graph.edge_count();
    if e > MAX_MC_EDGES {
        return Err(GammaError::TooManyEdges {
            got: e,
            limit: MAX_MC_EDGES,
        });
    }
    let n = query.n;
    let l = graph.loop_number() as f64;
    let exponent = e as f64 + (n - 1.0) * l;
    let plan = SectorPlan {
        e,
        exponent,
        n_minus_1: n - 1.0,
        front: gamma_fn(e as f64 + 1.0).expect("integer")
            * gamma_fn(exponent).expect("pole checked"),
        trees: graph.spanning_trees()?,
    };
    let edges: Vec<(usize, usize)> = graph.edges().to_vec();
    let v = graph.vertex_count();
    let g = move |x: &[f64]| sector_sample(&plan, &edges, v, x);
    // Sector weights are bounded above and below, so the plain standard
    // error is already trustworthy; Auto will keep it.
    let est = mc_expectation_with(
        g,
        2 * e - 1,
        Sampler::IidExponential,
        n_samples,
        seed,
        McOptions {
            error_mode: ErrorMode::Auto,
        },
    )?;
    Ok(est)
}

/// One ordered-sector draw.  `x` holds `2E - 1` unit exponentials: the
/// first `E` rank the edges into a uniform random sector, the rest
/// drive the within-sector ratio variables.
///
/// Writing the simplex integral over the sector `u_(1) >= ... >= u_(E)`
/// in terms of the successive ratios `beta_j = u_(j+1)/u_(j)` turns the
/// polynomial `P` into `u_(1)^L * (tree monomials in beta prefixes)`
/// and the sector volume element into independent powers `beta_j^a_j`.
/// Sampling `beta_j` from that exact power law leaves the bounded
/// weight computed here; its expectation over sectors and ratios is
/// `Gamma_G(n)`.
fn sector_sample(plan: &SectorPlan, edges: &[(usize, usize)], v: usize, x: &[f64]) -> f64 {
    let e = plan.e;
    // Positions sorted by rank exponential, descending: position 0
    // carries the largest coordinate.
    let mut perm = [0usize; MAX_MC_EDGES];
    for (i, slot) in perm.iter_mut().enumerate().take(e) {
        *slot = i;
    }
    let keys = &x[..e];
    perm[..e]
        .sort_unstable_by(|&a, &b| keys[b].partial_cmp(&keys[a]).expect("finite exponentials"));

    // Greedy spanning tree scanning positions from the end, so the
    // tree prefers late (small-coordinate) edges and the maximal
    // monomial complement is attained by this tree.
    let mut parent = [0u8; MAX_MC_EDGES];
    for (i, p) in parent.iter_mut().enumerate().take(v) {
        *p = i as u8;
    }
    fn find(parent: &mut [u8; MAX_MC_EDGES], mut a: u8) -> u8 {
        while parent[a as usize] != a {
            parent[a as usize] = parent[parent[a as usize] as usize];
            a = parent[a as usize];
        }
        a
    }
    let mut in_tree = [false; MAX_MC_EDGES];
    for p in (0..e).rev() {
        let (a, b) = edges[perm[p]];
        let (ra, rb) = (find(&mut parent, a as u8), find(&mut parent, b as u8));
        if ra != rb {
            parent[ra as usize] = rb;
            in_tree[p] = true;
        }
    }

    // Suffix counts of non-tree positions give the beta exponents:
    // a_j + 1 = (E - j) + (n - 1) * m_j, positive for all n >= 0.
    let mut ln_beta_prefix = [0.0f64; MAX_MC_EDGES];
    let mut inv_a_product = 1.0;
    let mut m = 0usize; // non-tree positions at index >= j, built downward
    let mut suffix_m = [0usize; MAX_MC_EDGES];
    for p in (1..e).rev() {
        if !in_tree[p] {
            m += 1;
        }
        suffix_m[p] = m;
    }
    let mut acc = 0.0;
    for j in 1..e {
        let a_plus_1 = (e - j) as f64 + plan.n_minus_1 * suffix_m[j] as f64;
        inv_a_product /= a_plus_1;
        acc -= x[e + j - 1] / a_plus_1;
        ln_beta_prefix[j] = acc;
    }

    // S = sum over positions of the running beta product, in [1, E].
    let s: f64 = ln_beta_prefix[..e].iter().map(|&t| t.exp()).sum();

    // Monomial sums relative to the maximal (greedy-tree) monomial.
    let mut pos_of_edge = [0usize; MAX_MC_EDGES];
    for p in 0..e {
        pos_of_edge[perm[p]] = p;
    }
    let total: f64 = ln_beta_prefix[..e].iter().sum();
    let tree_sum = |tree: &[usize]| -> f64 {
        total
            - tree
                .iter()
                .map(|&ed| ln_beta_prefix[pos_of_edge[ed]])
                .sum::<f64>()
    };
    // The greedy tree attains the maximal monomial, whose beta powers
    // were absorbed into the sampling exponents above; H collects the
    // remaining tree terms relative to it and lies in [1, #trees].
    let mut s_star = f64::NEG_INFINITY;
    for t in &plan.trees {
        s_star = s_star.max(tree_sum(t));
    }
    let mut h = 0.0;
    for t in &plan.trees {
        let d = tree_sum(t) - s_star;
        // exp(-40) is below the f64 relative precision of a sum whose
        // leading term is 1, so deeper terms cannot move H.
        if d > -40.0 {
            h += d.exp();
        }
    }

    plan.front * inv_a_product * (-plan.exponent * s.ln() + plan.n_minus_1 * h.ln()).exp()
}

/// Integer-order ladder for the two-vertex, four-edge graph:
/// `y(n+1) = 3(3n+2)(3n+1)(2n+1)n / (32(n+1)) * y(n)
///           + (11n+8) / (8(n+1)) * n!^3`,
/// seeded by `y(0) = 7 zeta(3)`.  Returns `y(0..=n_max)`.
pub fn gamma_f1_recurrence(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(7.0 * zeta3());
    let mut factorial = 1.0f64; // n! as the loop enters step n
    for n in 0..n_max {
        let nf = n as f64;
        let y = out[n];
        let next = 3.0 * (3.0 * nf + 2.0) * (3.0 * nf + 1.0) * (2.0 * nf + 1.0) * nf
            / (32.0 * (nf + 1.0))
            * y
            + (11.0 * nf + 8.0) / (8.0 * (nf + 1.0)) * factorial.powi(3);
        out.push(next);
        factorial *= nf + 1.0;
    }
    out
}

/// Integer-order ladder for the doubled triangle, coupled to the
/// [`gamma_f1_recurrence`] ladder and seeded by `y(0) = 3 zeta(3)`.
/// Returns `y(0..=n_max)`.
pub fn gamma_f2_recurrence(n_max: usize) -> Vec<f64> {
    let f1 = gamma_f1_recurrence(n_max.saturating_sub(1));
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(3.0 * zeta3());
    let mut factorial = 1.0f64; // n! entering step n
    for n in 0..n_max {
        let nf = n as f64;
        let y = out[n];
        let c_self = 4.0
            * nf
            * (15.0
                + 137.0 * nf
                + 510.0 * nf * nf
                + 988.0 * nf.powi(3)
                + 1048.0 * nf.powi(4)
                + 576.0 * nf.powi(5)
                + 128.0 * nf.powi(6))
            / 3.0;
        let c_cross = nf
            * (810.0
                + 6905.0 * nf
                + 22363.0 * nf * nf
                + 34450.0 * nf.powi(3)
                + 25268.0 * nf.powi(4)
                + 7080.0 * nf.powi(5))
            / 32.0;
        let c_pure = (840.0 + 2893.0 * nf + 3228.0 * nf * nf + 1172.0 * nf.powi(3)) / 8.0;
        let denom = 105.0 + 286.0 * nf + 252.0 * nf * nf + 72.0 * nf.powi(3);
        let gamma_np1 = factorial; // Gamma(n+1) = n!
        let next = (c_self * y + c_cross * gamma_np1 * f1[n] + c_pure * gamma_np1.powi(4)) / denom;
        out.push(next);
        factorial *= nf + 1.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::ClassId;
    use crate::multigraph::graph_from_matrix;
    use crate::specfun::zeta3;

    fn dumbbell() -> MultiGraph {
        graph_from_matrix(&ClassId::F1.reference())
    }

    fn doubled_triangle() -> MultiGraph {
        graph_from_matrix(&ClassId::F2.reference())
    }

    #[test]
    fn recurrences_hit_the_exact_anchor_values() {
        let f1 = gamma_f1_recurrence(3);
        assert_eq!(f1[0], 7.0 * zeta3());
        assert_eq!(f1[1], 1.0);
        assert_eq!(f1[2], 4.0);
        assert_eq!(f1[3], 80.0);
        let f2 = gamma_f2_recurrence(2);
        assert_eq!(f2[0], 3.0 * zeta3());
        assert_eq!(f2[1], 1.0);
        assert_eq!(f2[2], 12.0);
    }

    #[test]
    fn order_one_is_exact_for_every_method() {
        for method in [
            GammaMethod::SimplexMc,
            GammaMethod::SectorMc,
            GammaMethod::ExactTreeCount,
        ] {
            let est = gamma_value(
                &GammaQuery {
                    graph: dumbbell(),
                    n: 1.0,
                    method,
                },
                100,
                7,
            )
            .unwrap();
            assert_eq!(est.value, 1.0);
            assert_eq!(est.error, 0.0);
        }
    }

    #[test]
    fn exact_method_returns_tree_counts_and_rejects_the_rest() {
        let est = gamma_value(
            &GammaQuery {
                graph: doubled_triangle(),
                n: 2.0,
                method: GammaMethod::ExactTreeCount,
            },
            10,
            0,
        )
        .unwrap();
        assert_eq!(est.value, 12.0);
        assert!(matches!(
            gamma_value(
                &GammaQuery {
                    graph: doubled_triangle(),
                    n: 0.0,
                    method: GammaMethod::ExactTreeCount,
                },
                10,
                0,
            ),
            Err(GammaError::ExactUnsupported(_))
        ));
    }

    #[test]
    fn both_estimators_recover_tree_counts_at_order_two() {
        for (graph, trees) in [(dumbbell(), 4.0), (doubled_triangle(), 12.0)] {
            for method in [GammaMethod::SimplexMc, GammaMethod::SectorMc] {
                let est = gamma_value(
                    &GammaQuery {
                        graph: graph.clone(),
                        n: 2.0,
                        method,
                    },
                    1 << 16,
                    42,
                )
                .unwrap();
                assert!(
                    (est.value - trees).abs() < 4.0 * est.error,
                    "{method:?}: {} vs {trees} +- {}",
                    est.value,
                    est.error
                );
                assert!(est.error > 0.0);
            }
        }
    }

    #[test]
    fn sector_estimator_matches_closed_zero_order_values() {
        // Gamma(0) of the two smallest graphs: 7 zeta(3), 3 zeta(3).
        for (graph, truth) in [
            (dumbbell(), 7.0 * zeta3()),
            (doubled_triangle(), 3.0 * zeta3()),
        ] {
            let est = gamma_value(
                &GammaQuery {
                    graph,
                    n: 0.0,
                    method: GammaMethod::SectorMc,
                },
                1 << 17,
                1,
            )
            .unwrap();
            assert!(
                (est.value - truth).abs() < 4.0 * est.error,
                "{} vs {truth} +- {}",
                est.value,
                est.error
            );
        }
    }

    #[test]
    fn estimators_agree_at_fractional_order() {
        // n = 1/2 exercises the generic powf paths of both methods.
        let q = |method| GammaQuery {
            graph: dumbbell(),
            n: 0.5,
            method,
        };
        let simplex = gamma_value(&q(GammaMethod::SimplexMc), 1 << 17, 5).unwrap();
        let sector = gamma_value(&q(GammaMethod::SectorMc), 1 << 17, 6).unwrap();
        assert!(
            simplex.agrees_within(&sector, 4.0),
            "{} +- {} vs {} +- {}",
            simplex.value,
            simplex.error,
            sector.value,
            sector.error
        );
    }

    #[test]
    fn simplex_estimator_confirms_sector_at_zero_order() {
        // At n = 0 the simplex integrand 1/P is heavy-tailed; Auto
        // falls back to median-of-means, which still brackets the
        // sector value.
        let simplex = gamma_value(
            &GammaQuery {
                graph: dumbbell(),
                n: 0.0,
                method: GammaMethod::SimplexMc,
            },
            1 << 17,
            9,
        )
        .unwrap();
        let truth = 7.0 * zeta3();
        assert!(
            (simplex.value - truth).abs() < 4.0 * simplex.error,
            "{} vs {truth} +- {}",
            simplex.value,
            simplex.error
        );
    }

    #[test]
    fn estimates_are_invariant_under_vertex_relabeling() {
        let g6 = graph_from_matrix(&ClassId::F6.reference());
        let relabeled = MultiGraph::new(
            4,
            &g6.edges()
                .iter()
                .map(|&(a, b)| (3 - a, 3 - b))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let q = |graph| GammaQuery {
            graph,
            n: 0.0,
            method: GammaMethod::SectorMc,
        };
        let a = gamma_value(&q(g6), 1 << 16, 11).unwrap();
        let b = gamma_value(&q(relabeled), 1 << 16, 11).unwrap();
        assert!(
            a.agrees_within(&b, 4.0),
            "{} +- {} vs {} +- {}",
            a.value,
            a.error,
            b.value,
            b.error
        );
    }

    #[test]
    fn domain_errors() {
        let q = GammaQuery {
            graph: dumbbell(),
            n: -1.0,
            method: GammaMethod::SectorMc,
        };
        assert!(matches!(
            gamma_value(&q, 100, 0),
            Err(GammaError::NegativeOrder(_))
        ));
        // For connected graphs the exponent E + (n-1)L = V - 1 + nL
        // stays positive at every n >= 0 except for the edgeless
        // single-vertex graph, the one genuine pole.
        let point = MultiGraph::new(1, &[]).unwrap();
        assert!(matches!(
            gamma_value(
                &GammaQuery {
                    graph: point,
                    n: 0.0,
                    method: GammaMethod::SectorMc,
                },
                100,
                0,
            ),
            Err(GammaError::Pole { .. })
        ));
        let nine = MultiGraph::new(2, &[(0, 1); 9]).unwrap();
        assert!(matches!(
            gamma_value(
                &GammaQuery {
                    graph: nine,
                    n: 2.0,
                    method: GammaMethod::SimplexMc,
                },
                100,
                0,
            ),
            Err(GammaError::TooManyEdges { got: 9, limit: 8 })
        ));
    }

    #[test]
    fn sector_estimate_is_thread_and_rerun_deterministic() {
        let q = GammaQuery {
            graph: dumbbell(),
            n: 0.0,
            method: GammaMethod::SectorMc,
        };
        let a = gamma_value(&q, 1 << 15, 3).unwrap();
        let b = gamma_value(&q, 1 << 15, 3).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error.to_bits(), b.error.to_bits());
    }
}
