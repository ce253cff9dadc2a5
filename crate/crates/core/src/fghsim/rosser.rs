use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::witness::Pos;
use super::{CheckReport, CheckStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Phi,
    NotPhi,
    /// `f_T(A)`; treated like any other sentence by the Rosser stages.
    Fa,
    Other(u32),
}

impl Tag {
    fn is_phi_like(self) -> bool {
        matches!(self, Tag::Phi | Tag::NotPhi)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Phi => f.write_str("PHI"),
            Tag::NotPhi => f.write_str("NOT_PHI"),
            Tag::Fa => f.write_str("FA"),
            Tag::Other(k) => write!(f, "OTHER({k})"),
        }
    }
}

impl FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PHI" => Ok(Tag::Phi),
            "NOT_PHI" => Ok(Tag::NotPhi),
            "FA" => Ok(Tag::Fa),
            _ => s
                .strip_prefix("OTHER(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|k| k.parse().ok())
                .map(Tag::Other)
                .ok_or_else(|| format!("unknown sentence tag `{s}`")),
        }
    }
}

impl Serialize for Tag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RosserError {
    #[error("both tau positions are finite; the sigma sentences must exclude each other")]
    BothSigmaTrue,
    #[error("event at stage {stage} is outside horizon {horizon}")]
    StageOutOfRange { stage: u64, horizon: u64 },
    #[error("infinite-proofs mode is on but {0} has no proof in the second half of the stream")]
    Discipline(Tag),
}

/// Proof events at stages `0..horizon`, at most one per stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StreamFile", into = "StreamFile")]
pub struct ProofStream {
    horizon: u64,
    events: BTreeMap<u64, Tag>,
    infinite_proofs: bool,
}

#[derive(Serialize, Deserialize)]
struct StreamFile {
    horizon: u64,
    events: BTreeMap<u64, Tag>,
    #[serde(default)]
    infinite_proofs: bool,
}

impl TryFrom<StreamFile> for ProofStream {
    type Error = RosserError;

    fn try_from(f: StreamFile) -> Result<Self, Self::Error> {
        ProofStream::new(f.horizon, f.events, f.infinite_proofs)
    }
}

impl From<ProofStream> for StreamFile {
    fn from(p: ProofStream) -> Self {
        StreamFile {
            horizon: p.horizon,
            events: p.events,
            infinite_proofs: p.infinite_proofs,
        }
    }
}

impl ProofStream {
    /// With `infinite_proofs` on, every tag proved before the midpoint
    /// `horizon / 2` must be proved again at or after it: the finite stand-in
    /// for "every theorem has infinitely many proofs".
    pub fn new(horizon: u64, events: BTreeMap<u64, Tag>, infinite_proofs: bool) -> Result<Self, RosserError> {
        if let Some(&stage) = events.keys().find(|&&m| m >= horizon) {
            return Err(RosserError::StageOutOfRange { stage, horizon });
        }
        let s = ProofStream {
            horizon,
            events,
            infinite_proofs,
        };
        if infinite_proofs {
            if let Some(t) = s.discipline_violation() {
                return Err(RosserError::Discipline(t));
            }
        }
        Ok(s)
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn events(&self) -> &BTreeMap<u64, Tag> {
        &self.events
    }

    pub fn infinite_proofs(&self) -> bool {
        self.infinite_proofs
    }

    pub fn midpoint(&self) -> u64 {
        self.horizon / 2
    }

    fn discipline_violation(&self) -> Option<Tag> {
        let mid = self.midpoint();
        let late: BTreeSet<Tag> = self.events.range(mid..).map(|(_, &t)| t).collect();
        self.events.range(..mid).map(|(_, &t)| t).find(|t| !late.contains(t))
    }

    pub fn satisfies_discipline(&self) -> bool {
        self.discipline_violation().is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RosserRun {
    /// `h(k_0), h(k_1), …` in order.
    pub outputs: Vec<Tag>,
    /// The stage that produced each output.
    pub output_stages: Vec<u64>,
    /// Stage at which case (a) or (b) released the first PHI / NOT_PHI.
    pub gate: Option<u64>,
    pub pr_rosser_phi: bool,
    pub pr_rosser_not_phi: bool,
}

fn witnessed_by(pos: Pos, m: u64) -> bool {
    pos.is_some_and(|p| p <= m)
}

/// Replays the stage-by-stage definition of `h`.
pub fn rosser_run(stream: &ProofStream, tau0_pos: Pos, tau1_pos: Pos) -> Result<RosserRun, RosserError> {
    if tau0_pos.is_some() && tau1_pos.is_some() {
        return Err(RosserError::BothSigmaTrue);
    }
    let mut outputs = Vec::new();
    let mut output_stages = Vec::new();
    let mut gate = None;
    let mut released = false;
    for (&m, &tag) in &stream.events {
        let out = if !tag.is_phi_like() || released {
            Some(tag)
        } else if witnessed_by(tau0_pos, m) {
            Some(Tag::Phi)
        } else if witnessed_by(tau1_pos, m) {
            Some(Tag::NotPhi)
        } else {
            None
        };
        if let Some(t) = out {
            if tag.is_phi_like() && !released {
                released = true;
                gate = Some(m);
            }
            outputs.push(t);
            output_stages.push(m);
        }
    }
    let first = outputs.iter().copied().find(|t| t.is_phi_like());
    Ok(RosserRun {
        pr_rosser_phi: first == Some(Tag::Phi),
        pr_rosser_not_phi: first == Some(Tag::NotPhi),
        outputs,
        output_stages,
        gate,
    })
}

/// Checks a run against the Rosser equivalences and the theorem-set lemma.
///
/// `sigma_i` counts as true when `tau_i_pos` is finite. A true `sigma_i`
/// with no PHI / NOT_PHI proof at or after its witness cannot be told apart
/// from a false one inside the stream, so that case is inconclusive.
pub fn mtr_check(run: &RosserRun, stream: &ProofStream, tau0_pos: Pos, tau1_pos: Pos) -> CheckReport {
    let mut r = CheckReport::default();
    let phi_proof_from = |p: u64| stream.events.range(p..).any(|(_, t)| t.is_phi_like());

    for (name, pos, bit) in [
        ("sigma0_iff_phi", tau0_pos, run.pr_rosser_phi),
        ("sigma1_iff_not_phi", tau1_pos, run.pr_rosser_not_phi),
    ] {
        let (status, detail) = match (pos, bit) {
            (Some(_), true) | (None, false) => (CheckStatus::Pass, String::new()),
            (None, true) => (CheckStatus::Fail, "bit set but sigma false".to_string()),
            (Some(p), false) if phi_proof_from(p) => {
                (CheckStatus::Fail, format!("sigma witnessed at {p} but bit unset"))
            }
            (Some(p), false) => (
                CheckStatus::Inconclusive,
                format!("no PHI or NOT_PHI proof at or after the witness {p}"),
            ),
        };
        r.push(name, status, detail);
    }

    let unjustified: Vec<u64> = run
        .outputs
        .iter()
        .zip(&run.output_stages)
        .filter(|&(t, m)| stream.events.get(m) != Some(t) && run.gate != Some(*m))
        .map(|(_, &m)| m)
        .collect();
    if unjustified.is_empty() {
        r.push("output_sound", CheckStatus::Pass, String::new());
    } else {
        r.push("output_sound", CheckStatus::Fail, format!("unjustified outputs at stages {unjustified:?}"));
    }

    let (status, detail) = if !stream.infinite_proofs {
        (CheckStatus::Inconclusive, "infinite-proofs mode off".to_string())
    } else {
        match run.gate {
            None => (CheckStatus::Inconclusive, String::from("no gate stage")),
            Some(g) if g >= stream.midpoint() => (
                CheckStatus::Inconclusive,
                format!("gate {g} is not before the midpoint {}", stream.midpoint()),
            ),
            Some(_) => {
                let output: BTreeSet<Tag> = run.outputs.iter().copied().collect();
                let missing: Vec<String> = stream
                    .events
                    .values()
                    .filter(|t| !output.contains(t))
                    .map(|t| t.to_string())
                    .collect();
                if missing.is_empty() {
                    (CheckStatus::Pass, String::new())
                } else {
                    (CheckStatus::Fail, format!("proved but never output: {}", missing.join(", ")))
                }
            }
        }
    };
    r.push("output_complete", status, detail);

    let status = if run.pr_rosser_phi && run.pr_rosser_not_phi {
        CheckStatus::Fail
    } else {
        CheckStatus::Pass
    };
    r.push("exclusive", status, String::new());
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(horizon: u64, ev: &[(u64, Tag)], inf: bool) -> ProofStream {
        ProofStream::new(horizon, ev.iter().copied().collect(), inf).unwrap()
    }

    #[test]
    fn case_a_run() {
        let s = stream(12, &[(1, Tag::Other(0)), (4, Tag::NotPhi), (9, Tag::NotPhi)], false);
        let run = rosser_run(&s, Some(3), None).unwrap();
        assert_eq!(run.outputs, vec![Tag::Other(0), Tag::Phi, Tag::NotPhi]);
        assert_eq!(run.gate, Some(4));
        assert!(run.pr_rosser_phi && !run.pr_rosser_not_phi);
        let report = mtr_check(&run, &s, Some(3), None);
        assert_eq!(report.status("sigma0_iff_phi"), Some(CheckStatus::Pass));
        assert_eq!(report.status("sigma1_iff_not_phi"), Some(CheckStatus::Pass));
        assert_eq!(report.status("output_sound"), Some(CheckStatus::Pass));
        assert_eq!(report.status("exclusive"), Some(CheckStatus::Pass));
    }

    #[test]
    fn deferred_forever() {
        let s = stream(10, &[(2, Tag::Phi)], false);
        let run = rosser_run(&s, None, None).unwrap();
        assert!(run.outputs.is_empty());
        assert!(!run.pr_rosser_phi && !run.pr_rosser_not_phi);
        assert!(!mtr_check(&run, &s, None, None).has_failures());
    }

    #[test]
    fn both_sigma_rejected() {
        let s = stream(4, &[], false);
        assert_eq!(rosser_run(&s, Some(1), Some(2)), Err(RosserError::BothSigmaTrue));
    }

    #[test]
    fn case_b_and_passthrough() {
        let s = stream(8, &[(0, Tag::Phi), (2, Tag::Phi), (3, Tag::Fa), (5, Tag::Phi)], false);
        let run = rosser_run(&s, None, Some(1)).unwrap();
        assert_eq!(run.outputs, vec![Tag::NotPhi, Tag::Fa, Tag::Phi]);
        assert!(run.pr_rosser_not_phi && !run.pr_rosser_phi);
    }

    #[test]
    fn unwitnessed_sigma_is_inconclusive() {
        let s = stream(6, &[(1, Tag::Phi)], false);
        let run = rosser_run(&s, Some(3), None).unwrap();
        assert_eq!(
            mtr_check(&run, &s, Some(3), None).status("sigma0_iff_phi"),
            Some(CheckStatus::Inconclusive)
        );
    }

    #[test]
    fn discipline() {
        assert!(ProofStream::new(8, [(1, Tag::Phi)].into_iter().collect(), true).is_err());
        let s = stream(8, &[(1, Tag::Phi), (2, Tag::NotPhi), (5, Tag::Phi), (6, Tag::NotPhi)], true);
        let run = rosser_run(&s, Some(0), None).unwrap();
        let report = mtr_check(&run, &s, Some(0), None);
        assert_eq!(report.status("output_complete"), Some(CheckStatus::Pass));
        let off = stream(8, &[(1, Tag::Phi)], false);
        let run = rosser_run(&off, Some(0), None).unwrap();
        assert_eq!(
            mtr_check(&run, &off, Some(0), None).status("output_complete"),
            Some(CheckStatus::Inconclusive)
        );
        assert!(ProofStream::new(3, [(3, Tag::Phi)].into_iter().collect(), false).is_err());
    }

    // σ ∨ ¬Con_T paired with 0=1: the second sentence never has a witness
    #[test]
    fn rosser_counterpart_of_fgh() {
        let s = stream(10, &[(2, Tag::NotPhi), (6, Tag::Phi)], false);
        for tau in [None, Some(0), Some(4)] {
            let run = rosser_run(&s, tau, None).unwrap();
            assert_eq!(run.pr_rosser_phi, tau.is_some());
            assert!(!run.pr_rosser_not_phi);
        }
    }

    // a Δ1 sentence: exactly one side has a witness
    #[test]
    fn delta1_representation() {
        let s = stream(10, &[(3, Tag::Phi), (7, Tag::NotPhi)], false);
        for (t0, t1) in [(Some(1), None), (None, Some(1)), (Some(5), None), (None, Some(6))] {
            let run = rosser_run(&s, t0, t1).unwrap();
            assert_eq!(run.pr_rosser_phi, t0.is_some());
            assert_eq!(run.pr_rosser_not_phi, t1.is_some());
            assert!(!mtr_check(&run, &s, t0, t1).has_failures());
        }
    }

    #[test]
    fn tags_round_trip() {
        for t in [Tag::Phi, Tag::NotPhi, Tag::Fa, Tag::Other(12)] {
            assert_eq!(t.to_string().parse::<Tag>().unwrap(), t);
        }
        assert!("OTHER(x)".parse::<Tag>().is_err());
        let s = stream(5, &[(1, Tag::Other(0)), (4, Tag::NotPhi)], false);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"horizon":5,"events":{"1":"OTHER(0)","4":"NOT_PHI"},"infinite_proofs":false}"#);
        assert_eq!(serde_json::from_str::<ProofStream>(&text).unwrap(), s);
    }
}
