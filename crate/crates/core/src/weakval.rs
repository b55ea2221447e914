//! Weak values under pre- and postselection.
//!
//! For preselection `|i⟩` and postselection `|f⟩` the weak value of `O` is
//! `⟨f|O|i⟩ / ⟨f|i⟩ = Tr(O T)` with the transition operator
//! `T = |i⟩⟨f| / ⟨f|i⟩`. In any orthonormal basis `{|n⟩}`,
//! `T = Σ_{n,m} ⟨|m⟩⟨n|⟩_w |n⟩⟨m|`, so the coefficient table of `T` lists the
//! weak values of all coherences of that basis.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{
    inner_product, outer_product, Amplitude, Basis, ChangeBasis, Ket, Operator, DIM, TOLERANCE,
};

/// A non-orthogonal pair of pre- and postselected states.
#[derive(Clone, Debug)]
pub struct PrePostSelection {
    pre: Ket,
    post: Ket,
    overlap: Amplitude,
}

impl PrePostSelection {
    /// Fails with [`Error::OrthogonalSelection`] when `|⟨f|i⟩| ≤ 1e-12`.
    pub fn new(pre: Ket, post: Ket) -> Result<Self> {
        let overlap = inner_product(&post, &pre)?;
        if overlap.norm() <= TOLERANCE {
            return Err(Error::OrthogonalSelection {
                overlap: overlap.norm(),
            });
        }
        Ok(Self { pre, post, overlap })
    }

    pub fn pre(&self) -> &Ket {
        &self.pre
    }

    pub fn post(&self) -> &Ket {
        &self.post
    }

    /// `⟨f|i⟩`.
    pub fn overlap(&self) -> Amplitude {
        self.overlap
    }
}

/// `⟨f|op|i⟩ / ⟨f|i⟩`.
pub fn weak_value(op: &Operator, sel: &PrePostSelection) -> Result<Amplitude> {
    let image = crate::qcore::apply(op, &sel.pre)?;
    Ok(inner_product(&sel.post, &image)? / sel.overlap)
}

/// Weak value of the coherence `|m⟩⟨n|`.
pub fn coherence_weak_value(m: &Ket, n: &Ket, sel: &PrePostSelection) -> Result<Amplitude> {
    Ok(inner_product(&sel.post, m)? * inner_product(n, &sel.pre)? / sel.overlap)
}

/// The rank-1, trace-1 operator representing a pre- and postselection.
#[derive(Clone, Debug)]
pub struct TransitionOperator {
    matrix: Operator,
    selection: PrePostSelection,
}

impl TransitionOperator {
    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn selection(&self) -> &PrePostSelection {
        &self.selection
    }

    /// `Tr(op · T)`; agrees with [`weak_value`].
    pub fn expectation(&self, op: &Operator) -> Amplitude {
        (op * &self.matrix).trace()
    }
}

/// `T = |i⟩⟨f| / ⟨f|i⟩`.
pub fn transition_operator(sel: &PrePostSelection) -> Result<TransitionOperator> {
    let matrix = outer_product(&sel.pre, &sel.post)?.scale(sel.overlap.inv());
    Ok(TransitionOperator {
        matrix,
        selection: sel.clone(),
    })
}

/// A single nonzero entry of a coherence table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub ket: String,
    pub bra: String,
    pub coefficient: Amplitude,
}

/// Expansion coefficients of an operator in a labelled basis.
///
/// Entry `(n, m)` multiplies `|n⟩⟨m|`; for a transition operator it equals the
/// weak value of `|m⟩⟨n|`.
#[derive(Clone, Debug)]
pub struct CoherenceTable {
    basis: Basis,
    coefficients: [[Amplitude; DIM]; DIM],
}

impl CoherenceTable {
    /// Coefficients of an arbitrary operator in `basis`.
    pub fn of_operator(op: &Operator, basis: &Basis) -> Self {
        let rebased = op.change_basis(basis);
        Self {
            basis: basis.clone(),
            coefficients: rebased.rows(),
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn coefficients(&self) -> &[[Amplitude; DIM]; DIM] {
        &self.coefficients
    }

    /// Coefficient of `|ket⟩⟨bra|`, by basis label.
    pub fn get(&self, ket: &str, bra: &str) -> Option<Amplitude> {
        Some(self.coefficients[self.basis.index_of(ket)?][self.basis.index_of(bra)?])
    }

    /// Sum of diagonal coefficients.
    pub fn diagonal_sum(&self) -> Amplitude {
        (0..DIM).map(|n| self.coefficients[n][n]).sum()
    }

    /// Entries with `|coefficient| > tol`, in row-major order.
    pub fn nonzero_terms(&self, tol: f64) -> Vec<Term> {
        let labels = self.basis.labels();
        let mut out = Vec::new();
        for (n, row) in self.coefficients.iter().enumerate() {
            for (m, z) in row.iter().enumerate() {
                if z.norm() > tol {
                    out.push(Term {
                        ket: labels[n].clone(),
                        bra: labels[m].clone(),
                        coefficient: *z,
                    });
                }
            }
        }
        out
    }

    /// `Σ coeff(n,m) |n⟩⟨m|` in canonical coordinates.
    pub fn reconstruct(&self) -> Operator {
        let kets = self.basis.kets();
        let mut acc = Operator::zero();
        for (n, row) in self.coefficients.iter().enumerate() {
            for (m, z) in row.iter().enumerate() {
                let term = outer_product(&kets[n], &kets[m]).expect("canonical kets");
                acc = &acc + &term.scale(*z);
            }
        }
        acc
    }

    /// Table of the adjoint operator: entry `(n, m)` is `conj(coeff(m, n))`.
    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis.clone(),
            coefficients: std::array::from_fn(|n| {
                std::array::from_fn(|m| self.coefficients[m][n].conj())
            }),
        }
    }
}

/// Coherence table of `T` in `basis`: entry `(n, m) = ⟨n|i⟩⟨f|m⟩ / ⟨f|i⟩`.
pub fn decompose(t: &TransitionOperator, basis: &Basis) -> CoherenceTable {
    let sel = &t.selection;
    let kets = basis.kets();
    let coefficients = std::array::from_fn(|n| {
        std::array::from_fn(|m| {
            coherence_weak_value(&kets[m], &kets[n], sel).expect("canonical kets")
        })
    });
    CoherenceTable {
        basis: basis.clone(),
        coefficients,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, basis, operator, state};
    use crate::qcore::r;

    fn sel() -> PrePostSelection {
        PrePostSelection::new(state("E_CC").unwrap(), state("D+").unwrap()).unwrap()
    }

    fn wv(name: &str) -> Amplitude {
        weak_value(&operator(name).unwrap(), &sel()).unwrap()
    }

    fn near(z: Amplitude, x: f64) -> bool {
        (z - r(x)).norm() < TOLERANCE
    }

    #[test]
    fn path_and_compound_weak_values() {
        assert!(near(wv("Pi(1)"), 1.0));
        assert!(near(wv("Pi(2)"), 0.0));
        assert!(near(wv("sigma_HV(1)"), 0.0));
        assert!(near(wv("sigma_HV(2)"), 1.0));
        assert!(near(wv("I"), 1.0));
        assert!(near(wv("Pi(V)"), 0.0));
        assert!(near(wv("Pi(Phi)"), 0.0));
    }

    #[test]
    fn projector_table() {
        for (name, x) in [("H1", 0.5), ("H2", 0.5), ("V1", 0.5), ("V2", -0.5)] {
            assert!(near(wv(&format!("proj({name})")), x), "{name}");
        }
    }

    #[test]
    fn bias_operators_from_projector_differences() {
        let p = |n: &str| wv(&format!("proj({n})"));
        let v_bias = p("V1") - p("V2");
        let phi_bias = p("H1") - p("V2");
        assert!(near(v_bias, 1.0) && near(phi_bias, 1.0));
        assert!((wv("sigma_pm(V)") - v_bias).norm() < TOLERANCE);
        assert!((wv("B_Phi") - phi_bias).norm() < TOLERANCE);
    }

    #[test]
    fn plus_minus_difference_has_no_v_bias() {
        // |V⟩⟨V| ⊗ (|+⟩⟨+| − |−⟩⟨−|) only sees V+ and V−, both absent.
        let plus = &operator("proj(V+)").unwrap() - &operator("proj(V-)").unwrap();
        assert!(near(weak_value(&plus, &sel()).unwrap(), 0.0));
    }

    #[test]
    fn orthogonal_selection_rejected() {
        let err = PrePostSelection::new(state("E_CC").unwrap(), state("Phi+").unwrap());
        assert!(matches!(err, Err(Error::OrthogonalSelection { .. })));
    }

    #[test]
    fn transition_operator_of_the_scenario() {
        let t = transition_operator(&sel()).unwrap();
        let expected = catalog::coherence("E_CC", "D+").unwrap().scale(r(2.0));
        assert!(t.matrix().approx_eq(&expected, TOLERANCE));
        assert!(near(t.matrix().trace(), 1.0));
        assert_eq!(t.matrix().rank(1e-9), 1);
    }

    #[test]
    fn coherence_between_prohibited_states() {
        let s = sel();
        let d2a2 = coherence_weak_value(&state("D2").unwrap(), &state("A2").unwrap(), &s).unwrap();
        assert!(near(d2a2, 1.0));
        let direct = weak_value(&catalog::coherence("D2", "A2").unwrap(), &s).unwrap();
        assert!((direct - d2a2).norm() < TOLERANCE);
        assert!((wv("proj(H2)") - d2a2 * 0.5).norm() < TOLERANCE);
        assert!((wv("proj(V2)") + d2a2 * 0.5).norm() < TOLERANCE);
    }

    #[test]
    fn catalog_projector_weak_values_are_real() {
        for name in catalog::state_names() {
            let z = wv(&format!("proj({name})"));
            assert!(z.im.abs() < TOLERANCE, "{name}: {z}");
        }
    }

    #[test]
    fn decompositions_have_four_unit_terms() {
        let t = transition_operator(&sel()).unwrap();
        let cases = [
            ("DA12", [("D1", "D1"), ("D1", "D2"), ("A2", "D1"), ("A2", "D2")]),
            ("HVpm", [("H+", "H+"), ("H+", "V+"), ("V-", "H+"), ("V-", "V+")]),
            ("Bell", [("Phi-", "Phi+"), ("Phi-", "Psi+"), ("Psi+", "Phi+"), ("Psi+", "Psi+")]),
        ];
        for (name, positions) in cases {
            let b = basis(name).unwrap();
            let table = decompose(&t, &b);
            let terms = table.nonzero_terms(TOLERANCE);
            assert_eq!(terms.len(), 4, "{name}");
            for (ket, bra) in positions {
                assert!(near(table.get(ket, bra).unwrap(), 1.0), "{name}: |{ket}><{bra}|");
            }
            assert!(near(table.diagonal_sum(), 1.0));
            assert!(table.reconstruct().approx_eq(t.matrix(), TOLERANCE));
            let via_op = CoherenceTable::of_operator(t.matrix(), &b);
            for n in 0..DIM {
                for m in 0..DIM {
                    let d = via_op.coefficients()[n][m] - table.coefficients()[n][m];
                    assert!(d.norm() < TOLERANCE);
                }
            }
        }
    }

    #[test]
    fn adjoint_tables_match_displayed_expansions() {
        let t = transition_operator(&sel()).unwrap();
        let displayed = [
            ("DA12", [("D1", "D1"), ("D1", "A2"), ("D2", "D1"), ("D2", "A2")]),
            ("HVpm", [("H+", "H+"), ("H+", "V-"), ("V+", "H+"), ("V+", "V-")]),
            ("Bell", [("Psi+", "Psi+"), ("Phi+", "Psi+"), ("Psi+", "Phi-"), ("Phi+", "Phi-")]),
        ];
        for (name, positions) in displayed {
            let adj = decompose(&t, &basis(name).unwrap()).adjoint();
            assert_eq!(adj.nonzero_terms(TOLERANCE).len(), 4);
            for (ket, bra) in positions {
                assert!(near(adj.get(ket, bra).unwrap(), 1.0), "{name}: |{ket}><{bra}|");
            }
            assert!(adj.reconstruct().approx_eq(&t.matrix().adjoint(), TOLERANCE));
        }
    }
}
