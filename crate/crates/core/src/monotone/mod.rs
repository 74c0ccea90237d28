//! Orthant monotonicity certificates and incidence-graph analysis.

mod incidence;
mod pattern;

pub use incidence::{build_incidence_graph, excitability_transparency, ChannelFlags, IncidenceEdge, IncidenceGraph, Vertex};
pub use pattern::{certify_sign_pattern, CertificateKind, SignPattern};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Assumption1Evidence, CellModel, Characteristic, Restriction};

/// Sampling settings for certification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig {
    pub samples: usize,
    pub seed: u32,
    /// Partials with `|v| <= sign_tol` count as zero.
    pub sign_tol: f64,
    /// Inputs checked for steady-state evidence.
    pub evidence_inputs: usize,
    /// Relaxation probes per checked input.
    pub evidence_probes: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            samples: 4096,
            seed: 0,
            sign_tol: 1e-12,
            evidence_inputs: 8,
            evidence_probes: 4,
        }
    }
}

/// Outcome of one certification step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Certification<T> {
    Certified(T),
    Failed { code: String, error: String },
    /// Not attempted because a prerequisite failed.
    Skipped { reason: String },
}

impl<T> Certification<T> {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified(_))
    }

    pub fn certified(&self) -> Option<&T> {
        match self {
            Certification::Certified(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assumption3Report {
    pub incidence: IncidenceGraph,
    pub channels: Vec<ChannelFlags>,
    pub chosen_channel: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Steady-state evidence (local Hurwitz plus relaxation probes).
    pub assumption1: Certification<Assumption1Evidence>,
    pub assumption2: Certification<SignPattern>,
    pub assumption3: Certification<Assumption3Report>,
}

impl AssumptionReport {
    pub fn all_satisfied(&self) -> bool {
        self.assumption1.certified().is_some_and(|e| e.holds)
            && self.assumption2.is_certified()
            && self
                .assumption3
                .certified()
                .is_some_and(|a| a.chosen_channel.is_some())
    }
}

/// Runs steady-state evidence, sign-pattern certification and the
/// incidence analysis (on the restricted state domain when given).
pub fn assumption_report(
    model: &dyn CellModel,
    restriction: Option<&Restriction>,
    config: &CertifyConfig,
) -> Result<AssumptionReport> {
    let c = Characteristic::new(model);
    let assumption1 = match c.assumption1_evidence(config.evidence_inputs, config.evidence_probes, config.seed as u64) {
        Ok(e) => Certification::Certified(e),
        Err(e) => Certification::Failed { code: e.code().into(), error: e.to_string() },
    };
    let assumption2 = match certify_sign_pattern(model, config) {
        Ok(p) => Certification::Certified(p),
        Err(e) => Certification::Failed { code: e.code().into(), error: e.to_string() },
    };
    let assumption3 = if assumption2.is_certified() {
        let state = match restriction {
            Some(r) => model.state_domain().restrict(r)?,
            None => model.state_domain().clone(),
        };
        match build_incidence_graph(model, &state, config) {
            Ok(ig) => Certification::Certified(Assumption3Report {
                channels: ig.channels(),
                chosen_channel: ig.chosen_channel(),
                incidence: ig,
            }),
            Err(e) => Certification::Failed { code: e.code().into(), error: e.to_string() },
        }
    } else {
        Certification::Skipped {
            reason: "sign pattern not certified".into(),
        }
    };
    Ok(AssumptionReport {
        assumption1,
        assumption2,
        assumption3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::model::{Cascade, CoordBound, CoordPin, HillParams, NotchMimo, Stage};

    fn cfg() -> CertifyConfig {
        CertifyConfig {
            samples: 512,
            ..CertifyConfig::default()
        }
    }

    fn notch() -> NotchMimo {
        NotchMimo::new(1.0, 1.0, 1.0, HillParams::inhibiting(1.0, 1.0, 2.0).unwrap()).unwrap()
    }

    fn notch_restriction(m: &NotchMimo) -> Restriction {
        Restriction {
            bounds: vec![
                CoordBound { index: 0, lo: Some(0.0), hi: Some(m.x3_star()), lo_open: true, hi_open: true },
                CoordBound { index: 1, lo: Some(0.0), hi: None, lo_open: true, hi_open: false },
            ],
            pins: vec![CoordPin { index: 2, value: m.x3_star() }],
        }
    }

    #[test]
    fn cascade_sign_pattern() {
        let m = Cascade::new(
            vec![1.0, 1.0],
            vec![
                Stage::Hill(HillParams::inhibiting(2.0, 1.0, 2.0).unwrap()),
                Stage::Hill(HillParams::activating(1.0, 1.0, 2.0).unwrap()),
            ],
        )
        .unwrap();
        let p = certify_sign_pattern(&m, &cfg()).unwrap();
        assert_eq!((p.epsilon, p.delta, p.mu), (vec![1, 0], vec![0], vec![1]));
        assert_eq!(p.kind, CertificateKind::Exact);
    }

    #[test]
    fn notch_sign_pattern_and_incidence() {
        let m = notch();
        let p = certify_sign_pattern(&m, &cfg()).unwrap();
        assert_eq!((p.epsilon.clone(), p.delta.clone(), p.mu.clone()), (vec![1, 1, 0], vec![0, 0], vec![1, 1]));
        assert!(p.min_signed_partial(&m, 1024, 99) >= -1e-9);

        let full = build_incidence_graph(&m, m.state_domain(), &cfg()).unwrap_err();
        let Error::MixedSign(entries) = full else { panic!("expected MixedSign") };
        assert!(entries.iter().any(|e| e.entry == "df0/du0"));

        let restricted = m.state_domain().restrict(&notch_restriction(&m)).unwrap();
        let ig = build_incidence_graph(&m, &restricted, &cfg()).unwrap();
        let expect = vec![
            (Vertex::X(0), Vertex::X(1)),
            (Vertex::X(0), Vertex::Y(1)),
            (Vertex::X(1), Vertex::Y(0)),
            (Vertex::U(0), Vertex::X(0)),
            (Vertex::U(1), Vertex::X(1)),
        ];
        let mut expect_sorted = expect.clone();
        expect_sorted.sort();
        assert_eq!(ig.edge_pairs(), expect_sorted);
        let ch = ig.channels();
        assert!(ch[0].excitable && ch[0].transparent);
        assert!(!ch[1].excitable);
        assert_eq!(ig.chosen_channel(), Some(0));
    }

    #[test]
    fn even_inhibition_violates_gauge() {
        let m = Cascade::new(
            vec![1.0, 1.0],
            vec![
                Stage::Hill(HillParams::inhibiting(2.0, 1.0, 2.0).unwrap()),
                Stage::Hill(HillParams::inhibiting(1.0, 1.0, 2.0).unwrap()),
            ],
        )
        .unwrap();
        assert!(matches!(certify_sign_pattern(&m, &cfg()), Err(Error::GaugeViolation(_))));
    }

    #[test]
    fn reports_for_builtin_models() {
        let m = notch();
        let r = assumption_report(&m, Some(&notch_restriction(&m)), &cfg()).unwrap();
        assert!(r.all_satisfied(), "{r:?}");

        let strict = Cascade::new(
            vec![1.0, 2.0],
            vec![
                Stage::Hill(HillParams::inhibiting(3.0, 1.0, 1.0).unwrap()),
                Stage::Hill(HillParams::activating(2.0, 1.0, 1.0).unwrap()),
            ],
        )
        .unwrap();
        assert!(assumption_report(&strict, None, &cfg()).unwrap().all_satisfied());

        let flat = Cascade::new(
            vec![1.0, 1.0],
            vec![Stage::Hill(HillParams::inhibiting(3.0, 1.0, 1.0).unwrap()), Stage::Constant { value: 1.0 }],
        )
        .unwrap();
        let r = assumption_report(&flat, None, &cfg()).unwrap();
        assert!(r.assumption2.is_certified());
        assert_eq!(r.assumption3.certified().unwrap().chosen_channel, None);
    }

    #[test]
    fn certification_is_deterministic() {
        let m = notch();
        assert_eq!(certify_sign_pattern(&m, &cfg()).unwrap(), certify_sign_pattern(&m, &cfg()).unwrap());
    }
}
