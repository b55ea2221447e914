//! The interferometer and its three modified experiments.
//!
//! A [`DetectionModel`] is an ordered list of [`CircuitElement`]s acting on the
//! polarisation ⊗ path space. The two leading stages (BS1 and the HWP) prepare
//! the preselected state; taps and detectors remove amplitude into named accumulators without
//! renormalising what remains. Propagating each canonical basis ket through
//! the stages yields, for every detector, a linear map `A_d` from the input to
//! detected amplitudes and hence an effect `M_d = A_d† A_d`.
//!
//! Beamsplitters use the real symmetric convention `|1⟩ → |+⟩`, `|2⟩ → |−⟩`,
//! so the prepared state is `|E_CC⟩` literally. The output port 1 of BS2
//! therefore collects the interferometer's `+` superposition.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::catalog;
use crate::error::{Error, Result};
use crate::qcore::{apply, r, Ket, Operator, DIM, TOLERANCE};

/// One of the two arms (or, after BS2, output ports).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Path {
    One,
    Two,
}

impl Path {
    fn letter(self) -> char {
        match self {
            Path::One => '1',
            Path::Two => '2',
        }
    }
}

/// A single polarisation state used by a tap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Polarisation {
    H,
    V,
    D,
    A,
}

impl Polarisation {
    fn letter(self) -> char {
        match self {
            Polarisation::H => 'H',
            Polarisation::V => 'V',
            Polarisation::D => 'D',
            Polarisation::A => 'A',
        }
    }

    /// The polarising beamsplitter basis pair this state belongs to.
    pub fn pair(self) -> &'static str {
        match self {
            Polarisation::H | Polarisation::V => "H/V",
            Polarisation::D | Polarisation::A => "D/A",
        }
    }
}

/// Projector `|pol⟩⟨pol| ⊗ |path⟩⟨path|`.
fn mode_projector(pol: Polarisation, path: Path) -> Operator {
    let name = format!("proj({}{})", pol.letter(), path.letter());
    catalog::operator(&name).expect("product-state projector")
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum CircuitElement {
    /// Balanced beamsplitter acting on the path qubit.
    BeamSplitter { name: &'static str },
    /// Half-wave plate exchanging `D` and `A` on one path.
    HalfWavePlate { path: Path },
    /// Polarising beamsplitter that routes the `routed` polarisation on `path`
    /// out of the interferometer. `label == None` sends it to a beam dump.
    PolarizingTap {
        routed: Polarisation,
        path: Path,
        label: Option<String>,
    },
    /// Terminal detector with an arbitrary projector.
    FinalDetector { label: String, projector: Operator },
}

impl CircuitElement {
    /// Projector removed by a tap or detector.
    pub fn tap_projector(&self) -> Option<Operator> {
        match self {
            CircuitElement::PolarizingTap { routed, path, .. } => {
                Some(mode_projector(*routed, *path))
            }
            CircuitElement::FinalDetector { projector, .. } => Some(projector.clone()),
            _ => None,
        }
    }

    fn describe(&self) -> String {
        match self {
            CircuitElement::BeamSplitter { name } => (*name).to_string(),
            CircuitElement::HalfWavePlate { path } => format!("HWP({})", path.letter()),
            CircuitElement::PolarizingTap {
                routed,
                path,
                label,
            } => format!(
                "PBS[{}]({}{} -> {})",
                routed.pair(),
                routed.letter(),
                path.letter(),
                label.as_deref().unwrap_or("dump")
            ),
            CircuitElement::FinalDetector { label, .. } => format!("detector({label})"),
        }
    }
}

impl fmt::Display for CircuitElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Unitary of a beamsplitter or half-wave plate.
pub fn element_unitary(element: &CircuitElement) -> Result<Operator> {
    match element {
        CircuitElement::BeamSplitter { .. } => {
            let s = r(std::f64::consts::FRAC_1_SQRT_2);
            let id = [[r(1.0), r(0.0)], [r(0.0), r(1.0)]];
            Ok(Operator::kron(id, [[s, s], [s, -s]]))
        }
        CircuitElement::HalfWavePlate { path } => {
            let sigma = catalog::operator("sigma_HV")?;
            let (on, off) = match path {
                Path::One => ("Pi(1)", "Pi(2)"),
                Path::Two => ("Pi(2)", "Pi(1)"),
            };
            let flip = &sigma * &catalog::operator(on)?;
            Ok(&flip + &catalog::operator(off)?)
        }
        other => Err(Error::WrongKind(other.describe())),
    }
}

/// Protocol variant: the plain protocol or one of the three modified
/// experiments that test each claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Baseline,
    A,
    B,
    C,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Baseline, Variant::A, Variant::B, Variant::C];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::A => "a",
            Variant::B => "b",
            Variant::C => "c",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Variant::Baseline),
            "a" => Ok(Variant::A),
            "b" => Ok(Variant::B),
            "c" => Ok(Variant::C),
            _ => Err(Error::UnknownName {
                kind: "variant",
                name: s.to_string(),
            }),
        }
    }
}

/// Rescales a raw detector probability into the inferred probability of a
/// state that cannot be detected directly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Inference {
    pub detector: String,
    pub inferred: String,
    pub factor: f64,
}

#[derive(Clone, Debug)]
pub struct DetectionModel {
    variant: Variant,
    stages: Vec<CircuitElement>,
    preparation_len: usize,
    detector_labels: Vec<String>,
    inference: Option<Inference>,
}

/// Detector label of the postselected output.
pub const POSTSELECTED: &str = "D+";

/// The `|D⟩`-polarised photon entering BS1 through input port 1.
pub fn source_state() -> Ket {
    catalog::state("D1").expect("catalog state")
}

fn tap(routed: Polarisation, path: Path, label: Option<&str>) -> CircuitElement {
    CircuitElement::PolarizingTap {
        routed,
        path,
        label: label.map(String::from),
    }
}

/// Builds the detection model for a variant.
///
/// * `baseline`: BS1, HWP(2), BS2, then a `D/A` PBS on the `+` port feeding
///   detector `D+`.
/// * `a`: a `D/A` tap on path 2 after the HWP routes `D2` to detector `D2`.
/// * `b`: an `H/V` tap on the `+` port routes `V+` to detector `V+`.
/// * `c`: taps remove `V1` and `H2` before BS2, projecting onto `Π(Φ)`;
///   detector `D+` then measures `Φ+` with probability factor 1/2.
pub fn build_protocol(variant: Variant) -> DetectionModel {
    let final_detector = CircuitElement::FinalDetector {
        label: POSTSELECTED.to_string(),
        projector: mode_projector(Polarisation::D, Path::One),
    };
    let mut stages = vec![
        CircuitElement::BeamSplitter { name: "BS1" },
        CircuitElement::HalfWavePlate { path: Path::Two },
    ];
    let mut inference = None;
    match variant {
        Variant::Baseline => {
            stages.push(CircuitElement::BeamSplitter { name: "BS2" });
        }
        Variant::A => {
            stages.push(tap(Polarisation::D, Path::Two, Some("D2")));
            stages.push(CircuitElement::BeamSplitter { name: "BS2" });
        }
        Variant::B => {
            stages.push(CircuitElement::BeamSplitter { name: "BS2" });
            stages.push(tap(Polarisation::V, Path::One, Some("V+")));
        }
        Variant::C => {
            stages.push(tap(Polarisation::V, Path::One, None));
            stages.push(tap(Polarisation::H, Path::Two, None));
            stages.push(CircuitElement::BeamSplitter { name: "BS2" });
            inference = Some(Inference {
                detector: POSTSELECTED.to_string(),
                inferred: "Phi+".to_string(),
                factor: 2.0,
            });
        }
    }
    stages.push(final_detector);
    DetectionModel::new(variant, stages, 2, inference)
}

impl DetectionModel {
    /// `preparation_len` leading stages prepare the preselected state; they
    /// must be unitary.
    pub fn new(
        variant: Variant,
        stages: Vec<CircuitElement>,
        preparation_len: usize,
        inference: Option<Inference>,
    ) -> Self {
        assert!(
            stages[..preparation_len]
                .iter()
                .all(|s| element_unitary(s).is_ok()),
            "preparation stages must be unitary"
        );
        let mut detector_labels: Vec<String> = stages
            .iter()
            .filter_map(|s| match s {
                CircuitElement::PolarizingTap { label: Some(l), .. } => Some(l.clone()),
                CircuitElement::FinalDetector { label, .. } => Some(label.clone()),
                _ => None,
            })
            .collect();
        detector_labels.sort();
        detector_labels.dedup();
        Self {
            variant,
            stages,
            preparation_len,
            detector_labels,
            inference,
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn stages(&self) -> &[CircuitElement] {
        &self.stages
    }

    /// Detector labels, sorted.
    pub fn detector_labels(&self) -> &[String] {
        &self.detector_labels
    }

    pub fn inference(&self) -> Option<&Inference> {
        self.inference.as_ref()
    }

    /// Product of the preparation stages.
    ///
    /// Applied to [`source_state`] this gives the preselected state.
    pub fn preparation_unitary(&self) -> Operator {
        self.stages[..self.preparation_len]
            .iter()
            .filter_map(|s| element_unitary(s).ok())
            .fold(Operator::identity(), |acc, u| &u * &acc)
    }
}

/// A detector's measurement effect on the input space.
#[derive(Clone, Debug)]
pub struct Effect {
    pub label: String,
    pub operator: Operator,
}

impl Effect {
    pub fn probability(&self, input: &Input) -> f64 {
        input.expectation(&self.operator)
    }
}

/// Effects of every detector plus the undetected remainder.
#[derive(Clone, Debug)]
pub struct EffectSet {
    pub effects: BTreeMap<String, Effect>,
    /// Everything that never reaches a labelled detector.
    pub remainder: Operator,
}

impl EffectSet {
    /// `Σ_d M_d + remainder`; the identity for a valid model.
    pub fn total(&self) -> Operator {
        self.effects
            .values()
            .fold(self.remainder.clone(), |acc, e| &acc + &e.operator)
    }

    /// Checks the completeness and effect invariants.
    pub fn validate(&self) -> Result<()> {
        if !self.total().approx_eq(&Operator::identity(), TOLERANCE) {
            return Err(Error::InvalidState("detector effects are not complete".into()));
        }
        for (label, e) in &self.effects {
            if !e.operator.is_effect() {
                return Err(Error::InvalidState(format!("`{label}` is not a valid effect")));
            }
        }
        Ok(())
    }

    /// Conjugates every effect by `u`, i.e. `M ↦ u M u†`.
    ///
    /// With `u` the preparation unitary this moves effects from the source
    /// input to the preselected state.
    fn conjugated(&self, u: &Operator) -> Self {
        let conj = |m: &Operator| &(u * m) * &u.adjoint();
        Self {
            effects: self
                .effects
                .iter()
                .map(|(k, e)| {
                    (
                        k.clone(),
                        Effect {
                            label: e.label.clone(),
                            operator: conj(&e.operator),
                        },
                    )
                })
                .collect(),
            remainder: conj(&self.remainder),
        }
    }
}

/// `A†A`, where column `k` of `A` is `images[k]`.
fn gram(images: &[Ket; DIM]) -> Operator {
    let rows = std::array::from_fn(|j| {
        std::array::from_fn(|k| {
            crate::qcore::inner_product(&images[j], &images[k]).expect("canonical kets")
        })
    });
    Operator::from_rows(rows).expect("finite")
}

/// Effects on the source input (before BS1).
pub fn detection_effects(model: &DetectionModel) -> EffectSet {
    let mut state: [Ket; DIM] = std::array::from_fn(Ket::unit);
    let mut taps: BTreeMap<String, Operator> = BTreeMap::new();
    let mut dumped = Operator::zero();
    for stage in &model.stages {
        if let Ok(u) = element_unitary(stage) {
            state = state.map(|k| &u * &k);
            continue;
        }
        let p = stage.tap_projector().expect("tap or detector");
        let tapped = state.clone().map(|k| &p * &k);
        state = std::array::from_fn(|k| &state[k] - &tapped[k]);
        let m = gram(&tapped);
        match stage {
            CircuitElement::PolarizingTap { label: None, .. } => dumped = &dumped + &m,
            CircuitElement::PolarizingTap { label: Some(l), .. }
            | CircuitElement::FinalDetector { label: l, .. } => {
                let entry = taps.entry(l.clone()).or_insert_with(Operator::zero);
                *entry = &*entry + &m;
            }
            _ => unreachable!(),
        }
    }
    let remainder = &dumped + &gram(&state);
    EffectSet {
        effects: taps
            .into_iter()
            .map(|(label, operator)| (label.clone(), Effect { label, operator }))
            .collect(),
        remainder,
    }
}

/// Effects expressed on the preselected state, i.e. after the preparation
/// stages.
pub fn preselection_effects(model: &DetectionModel) -> EffectSet {
    detection_effects(model).conjugated(&model.preparation_unitary())
}

/// Pure or mixed input state.
#[derive(Clone, Debug)]
pub enum Input {
    Pure(Ket),
    Mixed(Operator),
}

impl Input {
    /// Validates normalisation (pure) or the density-operator invariants (mixed).
    pub fn validate(&self) -> Result<()> {
        match self {
            Input::Pure(k) if !k.tag().is_canonical() => Err(Error::InvalidState(
                "pure input must be in canonical coordinates".into(),
            )),
            Input::Pure(k) if !k.is_normalized() => Err(Error::InvalidState(format!(
                "pure input has squared norm {}",
                k.norm_sqr()
            ))),
            Input::Mixed(rho) if !rho.tag().is_canonical() || !rho.is_density() => Err(
                Error::InvalidState("mixed input is not a canonical density operator".into()),
            ),
            _ => Ok(()),
        }
    }

    /// `⟨ψ|M|ψ⟩` or `Tr(Mρ)`, real part.
    pub fn expectation(&self, m: &Operator) -> f64 {
        match self {
            Input::Pure(k) => crate::qcore::inner_product(k, &apply(m, k).expect("canonical"))
                .expect("canonical")
                .re,
            Input::Mixed(rho) => (m * rho).trace().re,
        }
    }
}

impl From<Ket> for Input {
    fn from(k: Ket) -> Self {
        Input::Pure(k)
    }
}

impl From<Operator> for Input {
    fn from(rho: Operator) -> Self {
        Input::Mixed(rho)
    }
}

/// Where the input state enters the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InjectionPoint {
    /// Before BS1; the physical source is [`source_state`].
    Source,
    /// After the preparation stages; the physical input is `|E_CC⟩`.
    Preselection,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilityReport {
    pub variant: Variant,
    pub probabilities: BTreeMap<String, f64>,
    pub undetected: f64,
    /// Inferred probabilities (variant `c`: `P(Φ+) = 2 · P(D+)`).
    pub inferred: BTreeMap<String, f64>,
}

impl ProbabilityReport {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.probabilities.get(label).copied()
    }
}

/// Detection probabilities for an input at the given injection point.
pub fn detection_probabilities(
    model: &DetectionModel,
    input: &Input,
    at: InjectionPoint,
) -> Result<ProbabilityReport> {
    input.validate()?;
    let effects = match at {
        InjectionPoint::Source => detection_effects(model),
        InjectionPoint::Preselection => preselection_effects(model),
    };
    effects.validate()?;
    // Clipping only removes rounding noise of order 1e-16.
    let clip = |p: f64| p.clamp(0.0, 1.0);
    let probabilities: BTreeMap<String, f64> = effects
        .effects
        .iter()
        .map(|(label, e)| (label.clone(), clip(e.probability(input))))
        .collect();
    let undetected = clip(input.expectation(&effects.remainder));
    let inferred = model
        .inference
        .iter()
        .map(|inf| {
            let raw = probabilities[&inf.detector];
            (inf.inferred.clone(), raw * inf.factor)
        })
        .collect();
    Ok(ProbabilityReport {
        variant: model.variant,
        probabilities,
        undetected,
        inferred,
    })
}
