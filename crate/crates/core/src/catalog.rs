//! Named states, bases and operators of the Cheshire cat scenario.
//!
//! All amplitudes are built from the exact values `0, ±1/2, ±1/√2, 1`.
//!
//! Bell states follow `Φ± = (H1 ± V2)/√2` and `Ψ± = (H2 ± V1)/√2`. The `Ψ±`
//! phase convention is a choice; it makes the Bell-basis expansion of the
//! transition operator contain exactly four unit terms.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::qcore::{outer_product, r, tensor_product, Amplitude, Basis, Ket, Operator};

const S: f64 = FRAC_1_SQRT_2;

/// Polarisation letters, in the order `H, V, D, A`.
pub const POLARISATIONS: [char; 4] = ['H', 'V', 'D', 'A'];
/// Path letters: the two arms and their `±` superpositions.
pub const PATHS: [char; 4] = ['1', '2', '+', '-'];

/// Bell-state names.
pub const BELL_STATES: [&str; 4] = ["Phi+", "Phi-", "Psi+", "Psi-"];

/// Basis names accepted by [`basis`].
pub const BASIS_NAMES: [&str; 4] = ["HV12", "DA12", "HVpm", "Bell"];

/// Fixed operator names accepted by [`operator`]. `proj(X)` for any state
/// name `X` is accepted as well.
pub const OPERATOR_NAMES: [&str; 12] = [
    "I",
    "Pi(1)",
    "Pi(2)",
    "Pi(H)",
    "Pi(V)",
    "Pi(Phi)",
    "sigma_HV",
    "sigma_pm",
    "sigma_HV(1)",
    "sigma_HV(2)",
    "sigma_pm(V)",
    "B_Phi",
];

fn polarisation(p: char) -> Option<[Amplitude; 2]> {
    Some(match p {
        'H' => [r(1.0), r(0.0)],
        'V' => [r(0.0), r(1.0)],
        'D' => [r(S), r(S)],
        'A' => [r(S), r(-S)],
        _ => return None,
    })
}

fn path(p: char) -> Option<[Amplitude; 2]> {
    Some(match p {
        '1' => [r(1.0), r(0.0)],
        '2' => [r(0.0), r(1.0)],
        '+' => [r(S), r(S)],
        '-' => [r(S), r(-S)],
        _ => return None,
    })
}

fn product_state(name: &str) -> Option<Ket> {
    let mut chars = name.chars();
    let (p, q) = (chars.next()?, chars.next()?);
    if chars.next().is_some() {
        return None;
    }
    Some(tensor_product(polarisation(p)?, path(q)?))
}

fn real(amps: [f64; 4]) -> Ket {
    Ket::real(amps).expect("finite literal")
}

/// Every state name known to [`state`]: the sixteen product states followed by
/// `E_CC` and the Bell states.
pub fn state_names() -> Vec<String> {
    let mut names: Vec<String> = POLARISATIONS
        .iter()
        .flat_map(|p| PATHS.iter().map(move |q| format!("{p}{q}")))
        .collect();
    names.push("E_CC".into());
    names.extend(BELL_STATES.iter().map(|s| s.to_string()));
    names
}

/// Looks up a named state, in canonical coordinates.
pub fn state(name: &str) -> Result<Ket> {
    let ket = match name {
        "E_CC" => real([0.5, 0.5, 0.5, -0.5]),
        "Phi+" => real([S, 0.0, 0.0, S]),
        "Phi-" => real([S, 0.0, 0.0, -S]),
        "Psi+" => real([0.0, S, S, 0.0]),
        "Psi-" => real([0.0, S, -S, 0.0]),
        _ => product_state(name).ok_or_else(|| Error::UnknownName {
            kind: "state",
            name: name.to_string(),
        })?,
    };
    Ok(ket)
}

fn basis_of(name: &str, labels: [&str; 4]) -> Result<Basis> {
    let kets = [
        state(labels[0])?,
        state(labels[1])?,
        state(labels[2])?,
        state(labels[3])?,
    ];
    Basis::new(name, labels, kets)
}

/// Looks up one of the four analysis bases.
pub fn basis(name: &str) -> Result<Basis> {
    match name {
        "HV12" => Ok(Basis::canonical()),
        "DA12" => basis_of(name, ["D1", "D2", "A1", "A2"]),
        "HVpm" => basis_of(name, ["H+", "H-", "V+", "V-"]),
        "Bell" => basis_of(name, BELL_STATES),
        _ => Err(Error::UnknownName {
            kind: "basis",
            name: name.to_string(),
        }),
    }
}

fn q1(rows: [[f64; 2]; 2]) -> [[Amplitude; 2]; 2] {
    rows.map(|row| row.map(r))
}

const ID2: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];
const P_FIRST: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 0.0]];
const P_SECOND: [[f64; 2]; 2] = [[0.0, 0.0], [0.0, 1.0]];
/// `|H⟩⟨H| − |V⟩⟨V| = |D⟩⟨A| + |A⟩⟨D|` on polarisation; on path,
/// `|1⟩⟨1| − |2⟩⟨2| = |+⟩⟨−| + |−⟩⟨+|`.
const SIGMA_Z: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, -1.0]];

fn kron(pol: [[f64; 2]; 2], path: [[f64; 2]; 2]) -> Operator {
    Operator::kron(q1(pol), q1(path))
}

/// Looks up a named operator, in canonical coordinates.
///
/// `proj(X)` yields `|X⟩⟨X|` for any catalog state `X`.
pub fn operator(name: &str) -> Result<Operator> {
    if let Some(inner) = name.strip_prefix("proj(").and_then(|s| s.strip_suffix(')')) {
        return Ok(state(inner)?.projector());
    }
    let op = match name {
        "I" => Operator::identity(),
        "Pi(1)" => kron(ID2, P_FIRST),
        "Pi(2)" => kron(ID2, P_SECOND),
        "Pi(H)" => kron(P_FIRST, ID2),
        "Pi(V)" => kron(P_SECOND, ID2),
        "Pi(Phi)" => Operator::diagonal([1.0, 0.0, 0.0, 1.0]),
        "sigma_HV" => kron(SIGMA_Z, ID2),
        // Path analogue of σ_HV: the path-1/path-2 difference, so that
        // ⟨|V⟩⟨V| ⊗ σ±⟩_w = ⟨V1⟩_w − ⟨V2⟩_w.
        "sigma_pm" => kron(ID2, SIGMA_Z),
        "sigma_HV(1)" => kron(SIGMA_Z, P_FIRST),
        "sigma_HV(2)" => kron(SIGMA_Z, P_SECOND),
        "sigma_pm(V)" => kron(P_SECOND, SIGMA_Z),
        "B_Phi" => Operator::diagonal([1.0, 0.0, 0.0, -1.0]),
        _ => {
            return Err(Error::UnknownName {
                kind: "operator",
                name: name.to_string(),
            })
        }
    };
    Ok(op)
}

/// `|ket⟩⟨bra|` for two catalog state names.
pub fn coherence(ket: &str, bra: &str) -> Result<Operator> {
    outer_product(&state(ket)?, &state(bra)?)
}

/// Anything the catalog can name.
#[derive(Clone, Debug)]
pub enum Entity {
    State(Ket),
    Operator(Operator),
    Basis(Basis),
}

/// Resolves a name against states, then operators, then bases.
pub fn lookup(name: &str) -> Result<Entity> {
    if let Ok(k) = state(name) {
        return Ok(Entity::State(k));
    }
    if let Ok(op) = operator(name) {
        return Ok(Entity::Operator(op));
    }
    basis(name).map(Entity::Basis).map_err(|_| Error::UnknownName {
        kind: "catalog entry",
        name: name.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{inner_product, ChangeBasis, TOLERANCE};

    fn ip(bra: &str, ket: &str) -> Amplitude {
        inner_product(&state(bra).unwrap(), &state(ket).unwrap()).unwrap()
    }

    #[test]
    fn named_states() {
        assert!(state("E_CC").unwrap().approx_eq(&real([0.5, 0.5, 0.5, -0.5]), TOLERANCE));
        assert!(state("D+").unwrap().approx_eq(&real([0.5; 4]), TOLERANCE));
        assert!(state("Phi+").unwrap().approx_eq(&real([S, 0.0, 0.0, S]), TOLERANCE));
        assert!(state("Psi+").unwrap().approx_eq(&real([0.0, S, S, 0.0]), TOLERANCE));
        for name in state_names() {
            assert!(state(&name).unwrap().is_normalized(), "{name}");
        }
    }

    #[test]
    fn unknown_names() {
        for bad in ["X1", "H3", "H", "E_cc", "H12"] {
            assert!(matches!(state(bad), Err(Error::UnknownName { kind: "state", .. })));
        }
        assert!(basis("DA+-").is_err());
        assert!(operator("Pi(3)").is_err());
        assert!(operator("proj(Q1)").is_err());
        assert!(lookup("nope").is_err());
    }

    #[test]
    fn bases_resolve() {
        for name in BASIS_NAMES {
            let b = basis(name).unwrap();
            assert_eq!(b.name(), name);
        }
        let bell = basis("Bell").unwrap();
        assert_eq!(bell.labels(), &BELL_STATES.map(String::from));
        assert_eq!(basis("DA12").unwrap().labels()[3], "A2");
        assert!(basis("HV12").unwrap().tag().is_canonical());
    }

    #[test]
    fn psi_orthogonal_to_phi() {
        for psi in ["Psi+", "Psi-"] {
            for phi in ["Phi+", "Phi-"] {
                assert!(ip(psi, phi).norm() < TOLERANCE);
            }
        }
    }

    #[test]
    fn claim_zero_overlaps() {
        for (bra, ket) in [
            ("D2", "E_CC"),
            ("D+", "A2"),
            ("V+", "E_CC"),
            ("D+", "V-"),
            ("Phi+", "E_CC"),
            ("D+", "Phi-"),
        ] {
            assert!(ip(bra, ket).norm() < TOLERANCE, "<{bra}|{ket}>");
        }
        assert!((ip("D+", "E_CC") - r(0.5)).norm() < TOLERANCE);
    }

    #[test]
    fn postselection_through_phi_filter() {
        // ⟨D+|Π(Φ) = ⟨Φ+|/√2, i.e. Π(Φ)|D+⟩ = |Φ+⟩/√2 since Π(Φ) is Hermitian.
        let lhs = &operator("Pi(Phi)").unwrap() * &state("D+").unwrap();
        let rhs = state("Phi+").unwrap().scale(r(S));
        assert!(lhs.approx_eq(&rhs, TOLERANCE));
    }

    #[test]
    fn e_cc_in_other_bases() {
        let e = state("E_CC").unwrap();
        let in_da = e.change_basis(&basis("DA12").unwrap());
        assert!((in_da.amplitude(0) - r(S)).norm() < TOLERANCE);
        assert!((in_da.amplitude(3) - r(S)).norm() < TOLERANCE);
        assert!(in_da.amplitude(1).norm() < TOLERANCE);
        let in_pm = e.change_basis(&basis("HVpm").unwrap());
        let [hp, hm, vp, vm] = in_pm.amplitudes();
        assert!((hp - r(S)).norm() < TOLERANCE && (vm - r(S)).norm() < TOLERANCE);
        assert!(hm.norm() < TOLERANCE && vp.norm() < TOLERANCE);
    }

    #[test]
    fn projectors_and_completeness() {
        for name in ["Pi(1)", "Pi(2)", "Pi(H)", "Pi(V)", "Pi(Phi)", "proj(E_CC)", "proj(Psi-)"] {
            assert!(operator(name).unwrap().is_projector(), "{name}");
        }
        let id = Operator::identity();
        let p12 = &operator("Pi(1)").unwrap() + &operator("Pi(2)").unwrap();
        assert!(p12.approx_eq(&id, TOLERANCE));
        let phi = &(&operator("Pi(Phi)").unwrap() + &operator("proj(V1)").unwrap())
            + &operator("proj(H2)").unwrap();
        assert!(phi.approx_eq(&id, TOLERANCE));
        assert!(operator("Pi(2)")
            .unwrap()
            .approx_eq(&Operator::diagonal([0.0, 1.0, 0.0, 1.0]), TOLERANCE));
    }

    #[test]
    fn sigma_operators() {
        // σ_HV = |D⟩⟨A| + |A⟩⟨D| on polarisation.
        let da = &coherence("D1", "A1").unwrap() + &coherence("A1", "D1").unwrap();
        let da = &da + &(&coherence("D2", "A2").unwrap() + &coherence("A2", "D2").unwrap());
        assert!(operator("sigma_HV").unwrap().approx_eq(&da, TOLERANCE));
        // σ± = |+⟩⟨−| + |−⟩⟨+| on path.
        let pm = &(&coherence("H+", "H-").unwrap() + &coherence("H-", "H+").unwrap())
            + &(&coherence("V+", "V-").unwrap() + &coherence("V-", "V+").unwrap());
        assert!(operator("sigma_pm").unwrap().approx_eq(&pm, TOLERANCE));
        let diff = &operator("Pi(1)").unwrap() - &operator("Pi(2)").unwrap();
        assert!(operator("sigma_pm").unwrap().approx_eq(&diff, TOLERANCE));
        for name in ["sigma_HV(1)", "sigma_HV(2)", "sigma_pm(V)", "B_Phi"] {
            let op = operator(name).unwrap();
            assert!(op.is_hermitian());
            let ev = op.hermitian_eigenvalues().map(|x| (x * 1e9).round() / 1e9);
            assert_eq!(ev, [-1.0, 0.0, 0.0, 1.0], "{name}");
        }
        let s2 = operator("sigma_HV(2)").unwrap();
        let expected = &operator("proj(H2)").unwrap() - &operator("proj(V2)").unwrap();
        assert!(s2.approx_eq(&expected, TOLERANCE));
    }
}
