//! Claims, inferences and the hexagram contextuality structure.
//!
//! Three claims each forbid one property of the pre- and postselected photon:
//! being on path 2, being `V`-polarised, or carrying the `Φ` correlation
//! between `H1` and `V2`. Every pair of claims singles out one product state;
//! all three together leave none. The orthogonality graph of the nine states
//! involved has exactly three measurement contexts, and no noncontextual 0/1
//! assignment survives once all six hexagon states are forbidden.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::catalog;
use crate::error::{Error, Result};
use crate::optics::{build_protocol, detection_probabilities, InjectionPoint, Input, Variant};
use crate::qcore::{inner_product, Ket, Operator, TOLERANCE};

/// The four product states of the `(H/V) ⊗ (1/2)` basis.
pub const PRODUCT_STATES: [&str; 4] = ["H1", "H2", "V1", "V2"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ClaimId {
    /// No particle on path 2.
    Path2 = 1,
    /// No `V`-polarised particle.
    Vertical = 2,
    /// No `Φ` correlation of path and polarisation.
    Phi = 3,
}

impl ClaimId {
    pub const ALL: [ClaimId; 3] = [ClaimId::Path2, ClaimId::Vertical, ClaimId::Phi];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(ClaimId::Path2),
            2 => Ok(ClaimId::Vertical),
            3 => Ok(ClaimId::Phi),
            _ => Err(Error::InvalidParameter(format!("claim {n} (expected 1, 2 or 3)"))),
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Claim {
    pub id: ClaimId,
    pub statement: &'static str,
    pub prohibited_property: &'static str,
    /// The two hexagon states sharing the prohibited property.
    pub hexagon_pair: [&'static str; 2],
    /// `(bra, ket)` overlaps that vanish and establish the claim.
    pub zero_overlaps: [(&'static str, &'static str); 2],
    pub eliminated_product_states: [&'static str; 2],
    /// Detector whose count would violate the claim, and the variant holding it.
    pub witness: (Variant, &'static str),
}

impl Claim {
    /// Evaluates both zero overlaps against the catalog.
    pub fn overlaps(&self) -> [f64; 2] {
        self.zero_overlaps.map(|(bra, ket)| {
            let bra = catalog::state(bra).expect("catalog state");
            let ket = catalog::state(ket).expect("catalog state");
            inner_product(&bra, &ket).expect("canonical").norm()
        })
    }

    pub fn holds(&self) -> bool {
        self.overlaps().iter().all(|x| *x < TOLERANCE)
    }
}

pub fn claim(id: ClaimId) -> Claim {
    match id {
        ClaimId::Path2 => Claim {
            id,
            statement: "No particle on path 2.",
            prohibited_property: "{2}",
            hexagon_pair: ["D2", "A2"],
            zero_overlaps: [("D2", "E_CC"), ("D+", "A2")],
            eliminated_product_states: ["H2", "V2"],
            witness: (Variant::A, "D2"),
        },
        ClaimId::Vertical => Claim {
            id,
            statement: "No V-polarised particle.",
            prohibited_property: "{V}",
            hexagon_pair: ["V+", "V-"],
            zero_overlaps: [("V+", "E_CC"), ("D+", "V-")],
            eliminated_product_states: ["V1", "V2"],
            witness: (Variant::B, "V+"),
        },
        ClaimId::Phi => Claim {
            id,
            statement: "No Phi-correlation of path and polarisation.",
            prohibited_property: "{Phi}",
            hexagon_pair: ["Phi+", "Phi-"],
            zero_overlaps: [("Phi+", "E_CC"), ("D+", "Phi-")],
            eliminated_product_states: ["H1", "V2"],
            witness: (Variant::C, "Phi+"),
        },
    }
}

pub fn claims() -> [Claim; 3] {
    ClaimId::ALL.map(claim)
}

/// Product states compatible with every claim in `ids`.
pub fn infer(ids: &[ClaimId]) -> BTreeSet<&'static str> {
    let mut remaining: BTreeSet<&'static str> = PRODUCT_STATES.into_iter().collect();
    for id in ids {
        for s in claim(*id).eliminated_product_states {
            remaining.remove(s);
        }
    }
    remaining
}

/// The nine hexagram states: inner triangle first, then the hexagon.
pub const HEXAGRAM_STATES: [&str; 9] = ["H1", "H2", "V1", "D2", "A2", "V+", "V-", "Phi+", "Phi-"];
/// Number of inner-triangle states at the front of [`HEXAGRAM_STATES`].
pub const INNER_TRIANGLE: usize = 3;

/// Orthogonality graph with its discovered measurement contexts.
#[derive(Clone, Debug)]
pub struct ContextGraph {
    names: Vec<&'static str>,
    kets: Vec<Ket>,
    edges: BTreeSet<(usize, usize)>,
    contexts: Vec<[usize; 4]>,
    subsets_examined: usize,
}

fn are_orthogonal(a: &Ket, b: &Ket) -> bool {
    inner_product(a, b).expect("canonical").norm() < TOLERANCE
}

/// Builds the graph over [`HEXAGRAM_STATES`], discovering contexts by checking
/// all 126 four-element subsets for pairwise orthogonality.
pub fn build_context_graph() -> ContextGraph {
    let names = HEXAGRAM_STATES.to_vec();
    let kets: Vec<Ket> = names
        .iter()
        .map(|n| catalog::state(n).expect("catalog state"))
        .collect();
    let n = names.len();
    let mut edges = BTreeSet::new();
    for a in 0..n {
        for b in a + 1..n {
            if are_orthogonal(&kets[a], &kets[b]) {
                edges.insert((a, b));
            }
        }
    }
    let mut contexts = Vec::new();
    let mut subsets_examined = 0;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let set = [a, b, c, d];
                    subsets_examined += 1;
                    let clique = set
                        .iter()
                        .enumerate()
                        .all(|(i, x)| set[i + 1..].iter().all(|y| edges.contains(&(*x, *y))));
                    if clique {
                        contexts.push(set);
                    }
                }
            }
        }
    }
    ContextGraph {
        names,
        kets,
        edges,
        contexts,
        subsets_examined,
    }
}

impl ContextGraph {
    pub fn names(&self) -> &[&'static str] {
        &self.names
    }

    pub fn kets(&self) -> &[Ket] {
        &self.kets
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| *n == name)
    }

    /// Orthogonal pairs `(a, b)` with `a < b`.
    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn contexts(&self) -> &[[usize; 4]] {
        &self.contexts
    }

    /// Number of four-element subsets checked during discovery.
    pub fn subsets_examined(&self) -> usize {
        self.subsets_examined
    }

    pub fn context_names(&self) -> Vec<[&'static str; 4]> {
        self.contexts
            .iter()
            .map(|c| c.map(|i| self.names[i]))
            .collect()
    }

    pub fn is_orthogonal(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Number of contexts containing each state.
    pub fn context_multiplicity(&self) -> Vec<usize> {
        (0..self.names.len())
            .map(|i| self.contexts.iter().filter(|c| c.contains(&i)).count())
            .collect()
    }

    /// `true` when every context's projectors sum to the identity.
    pub fn contexts_are_complete(&self) -> bool {
        self.contexts.iter().all(|c| {
            let sum = c
                .iter()
                .fold(Operator::zero(), |acc, i| &acc + &self.kets[*i].projector());
            sum.approx_eq(&Operator::identity(), TOLERANCE)
        })
    }

    /// Checks exclusivity and per-context completeness of a 0/1 assignment,
    /// given as a bitmask over [`ContextGraph::names`].
    pub fn is_valid_assignment(&self, mask: u32) -> bool {
        let on = |i: usize| mask & (1 << i) != 0;
        let exclusive = self.edges.iter().all(|(a, b)| !(on(*a) && on(*b)));
        exclusive
            && self
                .contexts
                .iter()
                .all(|c| c.iter().filter(|i| on(**i)).count() == 1)
    }
}

/// A noncontextual 0/1 value assignment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Assignment {
    /// States valued 1, in graph order.
    pub true_states: Vec<&'static str>,
    pub mask: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssignmentSearch {
    pub candidates: usize,
    pub forced_zero: Vec<&'static str>,
    pub assignments: Vec<Assignment>,
}

impl AssignmentSearch {
    pub fn count(&self) -> usize {
        self.assignments.len()
    }
}

/// Enumerates all `2^9` assignments; each claim in `forbidden` forces both its
/// hexagon states to 0. Results are ordered by bitmask.
pub fn search_assignments_with(graph: &ContextGraph, forbidden: &[ClaimId]) -> AssignmentSearch {
    let forced_zero: Vec<&'static str> = forbidden
        .iter()
        .flat_map(|id| claim(*id).hexagon_pair)
        .collect();
    let zero_mask = forced_zero
        .iter()
        .map(|n| 1u32 << graph.index_of(n).expect("hexagon state in graph"))
        .fold(0, |a, b| a | b);
    let candidates = 1usize << graph.names.len();
    let assignments = (0..candidates as u32)
        .filter(|m| m & zero_mask == 0 && graph.is_valid_assignment(*m))
        .map(|mask| Assignment {
            true_states: (0..graph.names.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| graph.names[i])
                .collect(),
            mask,
        })
        .collect();
    AssignmentSearch {
        candidates,
        forced_zero,
        assignments,
    }
}

/// Exhaustive search, optionally forbidding all six hexagon states.
pub fn search_assignments(graph: &ContextGraph, forbid_hexagon: bool) -> AssignmentSearch {
    let forbidden: &[ClaimId] = if forbid_hexagon { &ClaimId::ALL } else { &[] };
    search_assignments_with(graph, forbidden)
}

/// `(1 − p)|E_CC⟩⟨E_CC| + p·1/4`.
pub fn depolarized_state(p: f64) -> Result<Operator> {
    check_noise(p)?;
    let pure = catalog::state("E_CC")?.projector();
    let mixed = Operator::diagonal([0.25; 4]);
    Ok(&pure.scale((1.0 - p).into()) + &mixed.scale(p.into()))
}

fn check_noise(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("noise p = {p} outside [0, 1]")))
    }
}

/// The four probabilities entering the noncontextuality inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClaimProbabilities {
    /// `P(D2)` from variant a.
    pub d2: f64,
    /// `P(V+)` from variant b.
    pub v_plus: f64,
    /// Inferred `P(Φ+)`, twice the raw variant c count rate.
    pub phi_plus: f64,
    /// `P(D+)` from the baseline protocol.
    pub d_plus: f64,
}

impl ClaimProbabilities {
    /// `[P(V+) + P(D2) + P(Φ+)] − P(D+)`; negative means violation.
    pub fn margin(&self) -> f64 {
        self.v_plus + self.d2 + self.phi_plus - self.d_plus
    }
}

/// Claim probabilities for a state prepared at the preselection point.
pub fn claims_probabilities(input: &Input) -> Result<ClaimProbabilities> {
    let run = |v| detection_probabilities(&build_protocol(v), input, InjectionPoint::Preselection);
    let a = run(Variant::A)?;
    let b = run(Variant::B)?;
    let c = run(Variant::C)?;
    let base = run(Variant::Baseline)?;
    Ok(ClaimProbabilities {
        d2: a.probabilities["D2"],
        v_plus: b.probabilities["V+"],
        phi_plus: c.inferred["Phi+"],
        d_plus: base.probabilities["D+"],
    })
}

/// Inequality margin on the depolarised state `ρ_p`.
pub fn inequality_margin(p: f64) -> Result<f64> {
    Ok(claims_probabilities(&Input::Mixed(depolarized_state(p)?))?.margin())
}

/// Bisection tolerance for [`violation_threshold`].
pub const THRESHOLD_TOLERANCE: f64 = 1e-10;

/// Noise level where the margin crosses zero, by bisection on `[0, 1]`.
pub fn violation_threshold() -> Result<f64> {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if inequality_margin(lo)? >= 0.0 || inequality_margin(hi)? <= 0.0 {
        return Err(Error::InvalidState("margin does not change sign on [0, 1]".into()));
    }
    while hi - lo > THRESHOLD_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if inequality_margin(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One row of a noise sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub p: f64,
    pub probabilities: ClaimProbabilities,
    pub margin: f64,
}

/// `points` evenly spaced noise levels from 0 to 1 inclusive.
pub fn inequality_sweep(points: usize) -> Result<Vec<SweepPoint>> {
    if points < 2 {
        return Err(Error::InvalidParameter("a sweep needs at least 2 points".into()));
    }
    (0..points)
        .map(|k| {
            let p = k as f64 / (points - 1) as f64;
            let probabilities = claims_probabilities(&Input::Mixed(depolarized_state(p)?))?;
            Ok(SweepPoint {
                p,
                probabilities,
                margin: probabilities.margin(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claims_hold_and_eliminate() {
        for c in claims() {
            assert!(c.holds(), "claim {}", c.id);
        }
        assert_eq!(claim(ClaimId::Path2).eliminated_product_states, ["H2", "V2"]);
        assert_eq!(claim(ClaimId::Vertical).eliminated_product_states, ["V1", "V2"]);
        assert_eq!(claim(ClaimId::Phi).eliminated_product_states, ["H1", "V2"]);
    }

    #[test]
    fn claim_numbers() {
        assert_eq!(ClaimId::from_number(2).unwrap(), ClaimId::Vertical);
        assert!(ClaimId::from_number(4).is_err());
    }

    #[test]
    fn inferences() {
        use ClaimId::*;
        let set = |v: &[&'static str]| v.iter().copied().collect::<BTreeSet<_>>();
        assert_eq!(infer(&[Path2, Vertical]), set(&["H1"]));
        assert_eq!(infer(&[Vertical, Phi]), set(&["H2"]));
        assert_eq!(infer(&[Path2, Phi]), set(&["V1"]));
        assert!(infer(&ClaimId::ALL).is_empty());
        assert_eq!(infer(&[]), set(&PRODUCT_STATES));
    }

    #[test]
    fn graph_edges_match_overlaps() {
        let g = build_context_graph();
        for a in 0..9 {
            for b in a + 1..9 {
                let ip = inner_product(&g.kets()[a], &g.kets()[b]).unwrap().norm();
                assert_eq!(g.is_orthogonal(a, b), ip < TOLERANCE);
            }
        }
        assert!(g.contexts_are_complete());
    }

    #[test]
    fn triangle_and_hexagon_multiplicity() {
        let g = build_context_graph();
        let mult = g.context_multiplicity();
        assert_eq!(&mult[..INNER_TRIANGLE], &[2, 2, 2]);
        assert!(mult[INNER_TRIANGLE..].iter().all(|m| *m == 1));
    }

    #[test]
    fn depolarized_claim_probabilities() {
        let p = claims_probabilities(&Input::Mixed(depolarized_state(0.2).unwrap())).unwrap();
        for x in [p.d2, p.v_plus, p.phi_plus] {
            assert!((x - 0.05).abs() < TOLERANCE);
        }
        assert!((p.d_plus - 0.25).abs() < TOLERANCE);
        let full = claims_probabilities(&Input::Mixed(depolarized_state(1.0).unwrap())).unwrap();
        for x in [full.d2, full.v_plus, full.phi_plus, full.d_plus] {
            assert!((x - 0.25).abs() < TOLERANCE);
        }
    }

    #[test]
    fn noise_out_of_range() {
        assert!(inequality_margin(-0.1).is_err());
        assert!(inequality_margin(1.5).is_err());
        assert!(inequality_margin(f64::NAN).is_err());
        assert!(inequality_sweep(1).is_err());
    }

    #[test]
    fn margin_endpoints() {
        assert!((inequality_margin(0.0).unwrap() + 0.25).abs() < TOLERANCE);
        assert!(inequality_margin(1.0 / 3.0).unwrap().abs() < TOLERANCE);
        assert!((inequality_margin(1.0).unwrap() - 0.5).abs() < TOLERANCE);
    }

    #[test]
    fn threshold_brackets_sign_change() {
        let t = violation_threshold().unwrap();
        assert!(inequality_margin(t - 0.01).unwrap() < 0.0);
        assert!(inequality_margin(t + 0.01).unwrap() > 0.0);
    }

    #[test]
    fn sweep_grid() {
        let s = inequality_sweep(5).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s[0].p, 0.0);
        assert_eq!(s[4].p, 1.0);
        assert!((s[2].margin - (0.75 * 0.5 - 0.25)).abs() < TOLERANCE);
    }
}
