//! Spectral analysis of max-plus matrices.
//!
//! The maximal eigenvalue of `A` is the maximum cycle mean of its precedence
//! graph. It is computed here with Karp's recurrence, one strongly connected
//! component at a time, in exact arithmetic. The cyclicity comes from the
//! critical graph (gcd of cycle lengths per critical component, lcm across
//! components), and the transient is found by comparing matrix powers.

use num_integer::Integer;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::matrix::MaxPlusMatrix;
use crate::scalar::{MaxPlusScalar, Rational};

/// Largest dimension accepted by the trace-formula eigenvalue.
pub const TRACE_FORMULA_MAX_DIM: usize = 12;

/// Largest dimension accepted by [`elementary_cycles`].
pub const CYCLE_ENUMERATION_MAX_DIM: usize = 12;

/// Weighted edge `from → to` of a precedence graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: Rational,
}

/// Precedence graph `G(A)`: an edge `j → i` with weight `A_ij` for every
/// finite entry. Nodes are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceGraph {
    pub node_count: usize,
    pub edges: Vec<Edge>,
}

impl PrecedenceGraph {
    fn to_petgraph(&self) -> DiGraph<(), ()> {
        let mut g = DiGraph::with_capacity(self.node_count, self.edges.len());
        for _ in 0..self.node_count {
            g.add_node(());
        }
        for e in &self.edges {
            g.add_edge(NodeIndex::new(e.from), NodeIndex::new(e.to), ());
        }
        g
    }
}

pub fn precedence_graph(a: &MaxPlusMatrix) -> Result<PrecedenceGraph> {
    let n = a.require_square("precedence_graph")?;
    let mut edges = Vec::with_capacity(a.finite_count());
    // Edge (i, j) exists iff A_ji is finite.
    for from in 0..n {
        for to in 0..n {
            if let Some(w) = a.get(to, from).as_finite() {
                edges.push(Edge {
                    from,
                    to,
                    weight: w.clone(),
                });
            }
        }
    }
    Ok(PrecedenceGraph {
        node_count: n,
        edges,
    })
}

/// Strongly connected components of `G(A)`, each sorted ascending, ordered by
/// their smallest node.
pub fn strongly_connected_components(a: &MaxPlusMatrix) -> Result<Vec<Vec<usize>>> {
    let g = precedence_graph(a)?.to_petgraph();
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    comps.sort_unstable_by_key(|c| c[0]);
    Ok(comps)
}

/// True iff `G(A)` is strongly connected. A 1×1 matrix is irreducible.
pub fn is_irreducible(a: &MaxPlusMatrix) -> Result<bool> {
    Ok(strongly_connected_components(a)?.len() == 1)
}

fn has_cycle(a: &MaxPlusMatrix, comp: &[usize]) -> bool {
    comp.len() > 1 || a.get(comp[0], comp[0]).is_finite()
}

/// Maximum cycle mean of one strongly connected component via Karp's
/// recurrence: `max_v min_k (D_s(v) - D_k(v)) / (s - k)`, where `D_k(v)` is the
/// heaviest walk of exactly `k` edges from a fixed source to `v`.
fn karp_component(a: &MaxPlusMatrix, comp: &[usize]) -> MaxPlusScalar {
    if !has_cycle(a, comp) {
        return MaxPlusScalar::Bottom;
    }
    let s = comp.len();
    let sub = a.submatrix(comp);
    let mut d = vec![vec![MaxPlusScalar::Bottom; s]; s + 1];
    d[0][0] = MaxPlusScalar::unit();
    for k in 1..=s {
        for v in 0..s {
            // D_k(v) = ⊕_u A_vu ⊗ D_{k-1}(u)
            let best = (0..s)
                .map(|u| sub.get(v, u).otimes(&d[k - 1][u]))
                .max()
                .unwrap_or(MaxPlusScalar::Bottom);
            d[k][v] = best;
        }
    }
    let mut lambda = MaxPlusScalar::Bottom;
    for v in 0..s {
        let Some(ds) = d[s][v].as_finite() else {
            continue;
        };
        let worst = (0..s)
            .filter_map(|k| {
                d[k][v]
                    .as_finite()
                    .map(|dk| (ds - dk) / Rational::from_integer((s - k).into()))
            })
            .min()
            .expect("D_0(source) is finite, so some k qualifies");
        lambda = lambda.oplus(&MaxPlusScalar::Finite(worst));
    }
    lambda
}

/// Maximal eigenvalue (maximum cycle mean over all components); bottom iff
/// the precedence graph is acyclic.
pub fn max_cycle_mean_karp(a: &MaxPlusMatrix) -> Result<MaxPlusScalar> {
    Ok(strongly_connected_components(a)?
        .iter()
        .map(|c| karp_component(a, c))
        .fold(MaxPlusScalar::Bottom, |acc, l| acc.oplus(&l)))
}

/// Maximum cycle mean of every strongly connected component that contains a
/// cycle, paired with its node set.
pub fn component_cycle_means(a: &MaxPlusMatrix) -> Result<Vec<(Vec<usize>, Rational)>> {
    Ok(strongly_connected_components(a)?
        .into_iter()
        .filter_map(|c| {
            let l = karp_component(a, &c).into_finite()?;
            Some((c, l))
        })
        .collect())
}

/// Trace formula: `⊕_{k=1..n} Tr(A^k) / k`.
pub fn max_cycle_mean_oracle(a: &MaxPlusMatrix) -> Result<MaxPlusScalar> {
    let n = a.require_square("max_cycle_mean_oracle")?;
    if n > TRACE_FORMULA_MAX_DIM {
        return Err(Error::TooLarge {
            op: "max_cycle_mean_oracle",
            dim: n,
            limit: TRACE_FORMULA_MAX_DIM,
        });
    }
    let mut lambda = MaxPlusScalar::Bottom;
    for (k, p) in a.powers(n)?.iter().enumerate() {
        lambda = lambda.oplus(&p.trace()?.div_int(k as u64 + 1));
    }
    Ok(lambda)
}

/// An elementary cycle of the precedence graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    /// Nodes in traversal order, starting at the smallest index.
    pub nodes: Vec<usize>,
    pub weight: Rational,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mean(&self) -> Rational {
        &self.weight / Rational::from_integer(self.nodes.len().into())
    }
}

/// Enumerates every elementary cycle of `G(A)` (exponential; small matrices only).
pub fn elementary_cycles(a: &MaxPlusMatrix) -> Result<Vec<Cycle>> {
    let n = a.require_square("elementary_cycles")?;
    if n > CYCLE_ENUMERATION_MAX_DIM {
        return Err(Error::TooLarge {
            op: "elementary_cycles",
            dim: n,
            limit: CYCLE_ENUMERATION_MAX_DIM,
        });
    }
    // succ(u) = { v : edge u → v } = { v : A_vu finite }
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|u| (0..n).filter(|&v| a.get(v, u).is_finite()).collect())
        .collect();
    let weight = |u: usize, v: usize| a.get(v, u).as_finite().cloned().expect("edge");

    fn walk(
        start: usize,
        u: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        succ: &[Vec<usize>],
        out: &mut Vec<Vec<usize>>,
    ) {
        for &v in &succ[u] {
            if v == start {
                out.push(path.clone());
            } else if v > start && !on_path[v] {
                on_path[v] = true;
                path.push(v);
                walk(start, v, path, on_path, succ, out);
                path.pop();
                on_path[v] = false;
            }
        }
    }

    let mut node_lists = Vec::new();
    for start in 0..n {
        let mut on_path = vec![false; n];
        on_path[start] = true;
        walk(
            start,
            start,
            &mut vec![start],
            &mut on_path,
            &succ,
            &mut node_lists,
        );
    }
    Ok(node_lists
        .into_iter()
        .map(|nodes| {
            let w = nodes
                .iter()
                .zip(nodes.iter().cycle().skip(1))
                .map(|(&u, &v)| weight(u, v))
                .sum();
            Cycle { nodes, weight: w }
        })
        .collect())
}

fn require_irreducible(a: &MaxPlusMatrix, op: &'static str) -> Result<()> {
    if is_irreducible(a)? {
        Ok(())
    } else {
        Err(Error::Reducible { op })
    }
}

/// Edges `(i, j)` meaning `A_ij` lies on a cycle whose mean equals λ.
/// `A` must be irreducible with finite λ.
pub fn critical_edges(a: &MaxPlusMatrix, lambda: &Rational) -> Vec<(usize, usize)> {
    let n = a.rows();
    // Normalized matrix B = A - λ has no positive cycles, so the heaviest
    // path closure is well defined.
    let normalized: Vec<Vec<Option<Rational>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a.get(i, j).as_finite().map(|w| w - lambda))
                .collect()
        })
        .collect();
    let mut best = normalized.clone();
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = best[i][k].clone() else {
                continue;
            };
            for j in 0..n {
                if let Some(kj) = &best[k][j] {
                    let cand = &ik + kj;
                    if best[i][j].as_ref().is_none_or(|cur| cand > *cur) {
                        best[i][j] = Some(cand);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let Some(w) = &normalized[i][j] else {
                continue;
            };
            // A_ij closes a critical cycle iff w + (heaviest path j ~> i) = 0.
            let back = if i == j {
                Some(Rational::from_integer(0.into()))
            } else {
                best[j][i].clone()
            };
            if back.is_some_and(|b| (w + b) == Rational::from_integer(0.into())) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Cyclicity `c(A)`: the eventual period of `A^k` up to the λ-shift.
pub fn cyclicity(a: &MaxPlusMatrix) -> Result<usize> {
    require_irreducible(a, "cyclicity")?;
    let Some(lambda) = max_cycle_mean_karp(a)?.into_finite() else {
        // 1×1 bottom matrix: every power is bottom.
        return Ok(1);
    };
    let n = a.rows();
    let edges = critical_edges(a, &lambda);
    let mut g: DiGraph<(), ()> = DiGraph::new();
    for _ in 0..n {
        g.add_node(());
    }
    let mut adj = vec![Vec::new(); n];
    let mut touched = vec![false; n];
    for &(i, j) in &edges {
        g.add_edge(NodeIndex::new(i), NodeIndex::new(j), ());
        adj[i].push(j);
        touched[i] = true;
        touched[j] = true;
    }
    let mut result = 1usize;
    for comp in tarjan_scc(&g) {
        let nodes: Vec<usize> = comp.iter().map(|x| x.index()).collect();
        if !touched[nodes[0]] {
            continue;
        }
        let mut in_comp = vec![false; n];
        for &v in &nodes {
            in_comp[v] = true;
        }
        // BFS depths; the gcd of depth(u) + 1 - depth(v) over component edges
        // is the gcd of its cycle lengths.
        let mut depth: Vec<Option<i64>> = vec![None; n];
        depth[nodes[0]] = Some(0);
        let mut queue = VecDeque::from([nodes[0]]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if in_comp[v] && depth[v].is_none() {
                    depth[v] = Some(depth[u].expect("visited") + 1);
                    queue.push_back(v);
                }
            }
        }
        let mut g_len = 0i64;
        for &u in &nodes {
            for &v in &adj[u] {
                if in_comp[v] {
                    let du = depth[u].expect("component is strongly connected");
                    let dv = depth[v].expect("component is strongly connected");
                    g_len = g_len.gcd(&(du + 1 - dv));
                }
            }
        }
        result = result.lcm(&(g_len as usize));
    }
    Ok(result)
}

/// Outcome of the transient search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transient {
    /// `A^{k+c} = λ^c ⊗ A^k` for every `k` in `[M, k_max - c]`.
    Found(usize),
    /// No such `M` within the search bound.
    NotFound { k_max: usize },
}

impl Transient {
    pub fn value(self) -> Option<usize> {
        match self {
            Transient::Found(m) => Some(m),
            Transient::NotFound { .. } => None,
        }
    }
}

/// Smallest `M >= 1` from which the cyclicity relation holds up to `k_max`.
pub fn transient(a: &MaxPlusMatrix, k_max: usize) -> Result<Transient> {
    let c = cyclicity(a)?;
    let lambda = max_cycle_mean_karp(a)?;
    transient_with(a, c, &lambda, k_max)
}

fn transient_with(
    a: &MaxPlusMatrix,
    c: usize,
    lambda: &MaxPlusScalar,
    k_max: usize,
) -> Result<Transient> {
    if k_max <= c {
        return Ok(Transient::NotFound { k_max });
    }
    let powers = a.powers(k_max)?;
    let shift = lambda.pow(c as u64);
    let holds = |k: usize| powers[k + c - 1] == powers[k - 1].scale(&shift);
    let last = k_max - c;
    if !holds(last) {
        return Ok(Transient::NotFound { k_max });
    }
    let mut m = last;
    while m > 1 && holds(m - 1) {
        m -= 1;
    }
    Ok(Transient::Found(m))
}

/// Eigenvalue, irreducibility and (for irreducible input) cyclicity and transient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralSummary {
    pub lambda: MaxPlusScalar,
    pub irreducible: bool,
    pub cyclicity: Option<usize>,
    pub transient: Option<Transient>,
}

pub fn spectral_summary(a: &MaxPlusMatrix, k_max: usize) -> Result<SpectralSummary> {
    let lambda = max_cycle_mean_karp(a)?;
    let irreducible = is_irreducible(a)?;
    let (cyclicity, transient) = if irreducible {
        let c = cyclicity(a)?;
        (Some(c), Some(transient_with(a, c, &lambda, k_max)?))
    } else {
        (None, None)
    };
    Ok(SpectralSummary {
        lambda,
        irreducible,
        cyclicity,
        transient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::mat;
    use crate::scalar::ratio;

    const NEG: &str = "-inf";

    fn q(v: &str) -> MaxPlusScalar {
        v.parse().unwrap()
    }

    fn p1_example() -> MaxPlusMatrix {
        mat(&[&["3", "16/3", NEG], &[NEG, NEG, "3"], &["3", NEG, NEG]])
    }

    #[test]
    fn precedence_graph_disconnected() {
        let g = precedence_graph(&mat(&[&["3", NEG], &[NEG, "26/3"]])).unwrap();
        assert_eq!(g.node_count, 2);
        assert_eq!(
            g.edges,
            vec![
                Edge {
                    from: 0,
                    to: 0,
                    weight: ratio(3, 1)
                },
                Edge {
                    from: 1,
                    to: 1,
                    weight: ratio(26, 3)
                },
            ]
        );
        let empty = precedence_graph(&mat(&[&[NEG, NEG], &[NEG, NEG]])).unwrap();
        assert!(empty.edges.is_empty());
    }

    #[test]
    fn precedence_graph_transposes() {
        let g = precedence_graph(&p1_example()).unwrap();
        let mut got: Vec<(usize, usize, Rational)> = g
            .edges
            .into_iter()
            .map(|e| (e.from, e.to, e.weight))
            .collect();
        got.sort();
        let mut want = vec![
            (0, 0, ratio(3, 1)),
            (1, 0, ratio(16, 3)),
            (2, 1, ratio(3, 1)),
            (0, 2, ratio(3, 1)),
        ];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn irreducibility() {
        assert!(!is_irreducible(&mat(&[&["3", NEG], &[NEG, "26/3"]])).unwrap());
        assert!(is_irreducible(&mat(&[&["3", "26/3"], &["3", "26/3"]])).unwrap());
        assert!(is_irreducible(&mat(&[&["5"]])).unwrap());
        assert!(is_irreducible(&mat(&[&["1", "2"]])).is_err());
    }

    #[test]
    fn karp_examples() {
        let m2 = mat(&[&["3", "26/3"], &["3", "26/3"]]);
        assert_eq!(max_cycle_mean_karp(&m2).unwrap(), q("26/3"));
        let upper = mat(&[&[NEG, "1", "2"], &[NEG, NEG, "3"], &[NEG, NEG, NEG]]);
        assert_eq!(max_cycle_mean_karp(&upper).unwrap(), MaxPlusScalar::Bottom);
        assert_eq!(max_cycle_mean_karp(&p1_example()).unwrap(), q("34/9"));
    }

    #[test]
    fn oracle_examples() {
        let a = mat(&[&["3", "-1"], &["0", "5"]]);
        assert_eq!(max_cycle_mean_oracle(&a).unwrap(), q("5"));
        let d = mat(&[&["3", NEG], &[NEG, "26/3"]]);
        assert_eq!(max_cycle_mean_oracle(&d).unwrap(), q("26/3"));
        let two = mat(&[&[NEG, "2"], &["4", NEG]]);
        assert_eq!(max_cycle_mean_oracle(&two).unwrap(), q("3"));
        assert!(matches!(
            max_cycle_mean_oracle(&MaxPlusMatrix::bottom(13, 13)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn cycle_enumeration() {
        let m2 = mat(&[&["3", "26/3"], &["3", "26/3"]]);
        let mut means: Vec<Rational> = elementary_cycles(&m2)
            .unwrap()
            .iter()
            .map(Cycle::mean)
            .collect();
        means.sort();
        assert_eq!(means, vec![ratio(3, 1), ratio(35, 6), ratio(26, 3)]);
        let cycles = elementary_cycles(&p1_example()).unwrap();
        assert_eq!(cycles.len(), 2);
        assert_eq!(cycles.iter().map(Cycle::mean).max().unwrap(), ratio(34, 9));
    }

    #[test]
    fn cyclicity_examples() {
        let m2 = mat(&[&["3", "26/3"], &["3", "26/3"]]);
        assert_eq!(cyclicity(&m2).unwrap(), 1);
        let swap = mat(&[&[NEG, "0"], &["0", NEG]]);
        assert_eq!(cyclicity(&swap).unwrap(), 2);
        // P2 with T1 = 3, r = 7/3, l = 2: the only critical cycle has length 3.
        assert_eq!(cyclicity(&p1_example()).unwrap(), 3);
        assert!(matches!(
            cyclicity(&mat(&[&["3", NEG], &[NEG, "4"]])),
            Err(Error::Reducible { .. })
        ));
        assert_eq!(cyclicity(&mat(&[&[NEG]])).unwrap(), 1);
    }

    #[test]
    fn cyclicity_lcm_over_critical_components() {
        // Two critical cycles of mean 1 and lengths 2 and 3, joined by
        // lighter edges.
        let m = mat(&[
            &[NEG, "1", "-5", NEG, NEG],
            &["1", NEG, NEG, NEG, NEG],
            &[NEG, NEG, NEG, "1", NEG],
            &[NEG, NEG, NEG, NEG, "1"],
            &["-5", NEG, "1", NEG, NEG],
        ]);
        assert!(is_irreducible(&m).unwrap());
        assert_eq!(max_cycle_mean_karp(&m).unwrap(), q("1"));
        assert_eq!(cyclicity(&m).unwrap(), 6);
    }

    #[test]
    fn transient_examples() {
        let swap = mat(&[&[NEG, "0"], &["0", NEG]]);
        assert_eq!(transient(&swap, 10).unwrap(), Transient::Found(1));
        let m2 = mat(&[&["3", "5"], &["3", "5"]]);
        let t = transient(&m2, 10).unwrap().value().unwrap();
        assert!(t <= 3);
        assert_eq!(t, 1);
        assert_eq!(transient(&mat(&[&["4"]]), 5).unwrap(), Transient::Found(1));
        assert_eq!(
            transient(&swap, 2).unwrap(),
            Transient::NotFound { k_max: 2 }
        );
        assert!(transient(&mat(&[&["3", NEG], &[NEG, "4"]]), 10).is_err());
    }

    #[test]
    fn transient_can_exceed_bound() {
        // Second cycle mean close to λ makes the transient long.
        let m = mat(&[&["0", "-30"], &["-30", "-1"]]);
        assert!(is_irreducible(&m).unwrap());
        assert_eq!(
            transient(&m, 10).unwrap(),
            Transient::NotFound { k_max: 10 }
        );
        assert!(matches!(transient(&m, 200).unwrap(), Transient::Found(_)));
    }

    #[test]
    fn summaries() {
        let m1 = mat(&[&["3", NEG], &[NEG, "26/3"]]);
        let s = spectral_summary(&m1, 64).unwrap();
        assert_eq!(s.lambda, q("26/3"));
        assert!(!s.irreducible);
        assert_eq!((s.cyclicity, s.transient), (None, None));

        let m2 = mat(&[&["3", "26/3"], &["3", "26/3"]]);
        let s = spectral_summary(&m2, 64).unwrap();
        assert_eq!(s.lambda, q("26/3"));
        assert!(s.irreducible);
        assert_eq!(s.cyclicity, Some(1));

        let swap = mat(&[&[NEG, "0"], &["0", NEG]]);
        let s = spectral_summary(&swap, 64).unwrap();
        assert_eq!(s.lambda, q("0"));
        assert_eq!(s.cyclicity, Some(2));
        assert_eq!(s.transient, Some(Transient::Found(1)));
    }

    #[test]
    fn component_means() {
        let m1 = mat(&[&["3", NEG], &[NEG, "26/3"]]);
        let means = component_cycle_means(&m1).unwrap();
        assert_eq!(means, vec![(vec![0], ratio(3, 1)), (vec![1], ratio(26, 3))]);
    }
}
