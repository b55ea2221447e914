use cheshire_core::catalog::{self, BASIS_NAMES};
use cheshire_core::optics::{
    build_protocol, detection_probabilities, element_unitary, InjectionPoint, Input, Variant,
};
use cheshire_core::qcore::{apply, inner_product, outer_product, Amplitude};
use cheshire_core::weakval::{decompose, transition_operator, weak_value, PrePostSelection};
use cheshire_core::{ChangeBasis, Ket, Operator, TOLERANCE};
use proptest::prelude::*;

fn amp() -> impl Strategy<Value = Amplitude> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Amplitude::new(re, im))
}

fn raw_vector() -> impl Strategy<Value = [Amplitude; 4]> {
    prop::array::uniform4(amp()).prop_filter("nonzero", |a| {
        a.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3
    })
}

fn unit_ket() -> impl Strategy<Value = Ket> {
    raw_vector().prop_map(|a| Ket::new(a).unwrap().normalized().unwrap())
}

fn operator() -> impl Strategy<Value = Operator> {
    prop::array::uniform4(prop::array::uniform4(amp()))
        .prop_map(|rows| Operator::from_rows(rows).unwrap())
}

fn hermitian() -> impl Strategy<Value = Operator> {
    operator().prop_map(|a| &a + &a.adjoint())
}

/// Random unitaries built as products of catalog unitaries and random phases.
fn unitary() -> impl Strategy<Value = Operator> {
    let generators = [
        element_unitary(&build_protocol(Variant::A).stages()[0]).unwrap(),
        element_unitary(&build_protocol(Variant::A).stages()[1]).unwrap(),
        catalog::operator("sigma_HV").unwrap(),
        catalog::operator("sigma_pm").unwrap(),
        Operator::real_rows([
            [0.0, 0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 1.0, 0.0, 0.0],
        ])
        .unwrap(),
    ];
    (
        prop::collection::vec(0..generators.len(), 1..6),
        prop::array::uniform4(0.0f64..std::f64::consts::TAU),
    )
        .prop_map(move |(picks, phases)| {
            let d = Operator::from_rows(std::array::from_fn(|j| {
                std::array::from_fn(|k| {
                    if j == k {
                        Amplitude::from_polar(1.0, phases[j])
                    } else {
                        Amplitude::new(0.0, 0.0)
                    }
                })
            }))
            .unwrap();
            picks.iter().fold(d, |acc, i| &generators[*i] * &acc)
        })
}

fn selection() -> impl Strategy<Value = PrePostSelection> {
    (unit_ket(), unit_ket())
        .prop_filter_map("non-orthogonal", |(i, f)| {
            (inner_product(&f, &i).unwrap().norm() > 1e-2)
                .then(|| PrePostSelection::new(i, f).unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn unitaries_preserve_inner_products(u in unitary(), a in unit_ket(), b in unit_ket()) {
        prop_assert!(u.is_unitary());
        let before = inner_product(&a, &b).unwrap();
        let after = inner_product(&apply(&u, &a).unwrap(), &apply(&u, &b).unwrap()).unwrap();
        prop_assert!((before - after).norm() < TOLERANCE);
    }

    #[test]
    fn change_basis_round_trip(k in unit_ket(), op in operator(), which in 0..4usize) {
        let target = catalog::basis(BASIS_NAMES[which]).unwrap();
        let canonical = catalog::basis("HV12").unwrap();
        let moved = k.change_basis(&target);
        prop_assert!((moved.norm_sqr() - k.norm_sqr()).abs() < TOLERANCE);
        prop_assert!(moved.change_basis(&canonical).approx_eq(&k, TOLERANCE));
        let op_moved = op.change_basis(&target);
        prop_assert!((op_moved.trace() - op.trace()).norm() < TOLERANCE);
        prop_assert!(op_moved.change_basis(&canonical).approx_eq(&op, TOLERANCE));
    }

    #[test]
    fn outer_product_action(a in unit_ket(), b in unit_ket(), c in unit_ket()) {
        let lhs = apply(&outer_product(&a, &b).unwrap(), &c).unwrap();
        let rhs = a.scale(inner_product(&b, &c).unwrap());
        prop_assert!(lhs.approx_eq(&rhs, TOLERANCE));
    }

    #[test]
    fn weak_value_is_linear(
        sel in selection(),
        x in operator(),
        y in operator(),
        alpha in amp(),
        beta in amp(),
    ) {
        let combo = &x.scale(alpha) + &y.scale(beta);
        let lhs = weak_value(&combo, &sel).unwrap();
        let rhs = alpha * weak_value(&x, &sel).unwrap() + beta * weak_value(&y, &sel).unwrap();
        // Weak values scale with 1/|<f|i>| ≤ 100 here.
        prop_assert!((lhs - rhs).norm() < TOLERANCE * 100.0);
    }

    #[test]
    fn weak_value_matches_trace_formula(sel in selection(), h in hermitian()) {
        let t = transition_operator(&sel).unwrap();
        let direct = weak_value(&h, &sel).unwrap();
        prop_assert!((direct - t.expectation(&h)).norm() < TOLERANCE * 100.0);
    }

    #[test]
    fn decomposition_reconstructs(sel in selection(), which in 0..4usize) {
        let t = transition_operator(&sel).unwrap();
        prop_assert!((t.matrix().trace() - Amplitude::new(1.0, 0.0)).norm() < TOLERANCE);
        prop_assert_eq!(t.matrix().rank(1e-9), 1);
        let table = decompose(&t, &catalog::basis(BASIS_NAMES[which]).unwrap());
        let scale = 1.0 / sel.overlap().norm();
        prop_assert!((table.diagonal_sum() - Amplitude::new(1.0, 0.0)).norm() < TOLERANCE * scale);
        let err = table.reconstruct().distance(t.matrix()).unwrap();
        prop_assert!(err < TOLERANCE * scale, "reconstruction error {}", err);
    }

    #[test]
    fn detection_matches_amplitude_oracle(psi in unit_ket(), which in 0..4usize) {
        let variant = Variant::ALL[which];
        let rep = detection_probabilities(
            &build_protocol(variant),
            &Input::Pure(psi.clone()),
            InjectionPoint::Source,
        )
        .unwrap();
        let oracle = oracle::detect(variant, psi.amplitudes());
        for (label, p) in &oracle {
            prop_assert!((rep.probabilities[*label] - p).abs() < TOLERANCE, "{}", label);
        }
        let total: f64 = rep.probabilities.values().sum::<f64>() + rep.undetected;
        prop_assert!((total - 1.0).abs() < TOLERANCE);
        prop_assert!(rep.probabilities.values().all(|p| *p >= 0.0));
    }
}

/// Hand-written mode arithmetic for the interferometer, independent of the
/// stage compiler. Amplitudes are indexed `[H1, H2, V1, V2]`.
mod oracle {
    use cheshire_core::qcore::Amplitude;
    use cheshire_core::optics::Variant;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn beamsplitter(a: &mut [Amplitude; 4]) {
        for (one, two) in [(0, 1), (2, 3)] {
            let (x, y) = (a[one], a[two]);
            a[one] = (x + y) * S;
            a[two] = (x - y) * S;
        }
    }

    /// |D⟩⟨A| + |A⟩⟨D| equals diag(1, −1) in H/V.
    fn half_wave_plate_path2(a: &mut [Amplitude; 4]) {
        a[3] = -a[3];
    }

    fn d_amp(h: Amplitude, v: Amplitude) -> Amplitude {
        (h + v) * S
    }

    pub fn detect(variant: Variant, input: [Amplitude; 4]) -> Vec<(&'static str, f64)> {
        let mut a = input;
        beamsplitter(&mut a);
        half_wave_plate_path2(&mut a);
        let mut out = Vec::new();
        match variant {
            Variant::Baseline => beamsplitter(&mut a),
            Variant::A => {
                // Remove the D component of path 2.
                let d = d_amp(a[1], a[3]);
                out.push(("D2", d.norm_sqr()));
                a[1] -= d * S;
                a[3] -= d * S;
                beamsplitter(&mut a);
            }
            Variant::B => {
                beamsplitter(&mut a);
                out.push(("V+", a[2].norm_sqr()));
                a[2] = Amplitude::new(0.0, 0.0);
            }
            Variant::C => {
                a[2] = Amplitude::new(0.0, 0.0);
                a[1] = Amplitude::new(0.0, 0.0);
                beamsplitter(&mut a);
            }
        }
        out.push(("D+", d_amp(a[0], a[2]).norm_sqr()));
        out
    }
}

#[test]
fn catalog_states_round_trip_all_bases() {
    let canonical = catalog::basis("HV12").unwrap();
    for name in catalog::state_names() {
        let k = catalog::state(&name).unwrap();
        for b in BASIS_NAMES {
            let there = k.change_basis(&catalog::basis(b).unwrap());
            assert!(there.change_basis(&canonical).approx_eq(&k, TOLERANCE), "{name} via {b}");
        }
    }
}

#[test]
fn e_cc_preparation_from_source_oracle() {
    // Oracle: propagate the |D1⟩ source through BS1 and HWP(2) by hand.
    let s = Amplitude::new(S, 0.0);
    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;
    let mut a = [s, Amplitude::new(0.0, 0.0), s, Amplitude::new(0.0, 0.0)];
    for (one, two) in [(0, 1), (2, 3)] {
        let (x, y) = (a[one], a[two]);
        a[one] = (x + y) * S;
        a[two] = (x - y) * S;
    }
    a[3] = -a[3];
    let e = catalog::state("E_CC").unwrap();
    assert!(Ket::new(a).unwrap().approx_eq(&e, TOLERANCE));
}
