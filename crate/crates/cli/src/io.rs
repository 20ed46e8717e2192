//! JSON and CSV file formats.

use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use stringinv_core::ddf::DdfModes;
use stringinv_core::numerics::modes::sigma;
use stringinv_core::{Chirality, FieldGrid, InvariantSpec, StringState};

use crate::error::CliError;

pub const STATE_FORMAT: &str = "stringstate-v1";
pub const DDF_FORMAT: &str = "ddfmodes-v1";

type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub format: String,
    pub dim: usize,
    pub tension: f64,
    #[serde(rename = "M")]
    pub modes: usize,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub left: Vec<Vec<Pair>>,
    pub right: Vec<Vec<Pair>>,
}

fn pairs(v: &[Vec<Complex<f64>>]) -> Vec<Vec<Pair>> {
    v.iter()
        .map(|m| m.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn complexes(v: &[Vec<Pair>]) -> Vec<Vec<Complex<f64>>> {
    v.iter()
        .map(|m| m.iter().map(|z| Complex::new(z[0], z[1])).collect())
        .collect()
}

impl StateFile {
    pub fn from_state(state: &StringState<f64>) -> Self {
        Self {
            format: STATE_FORMAT.into(),
            dim: state.dim(),
            tension: state.tension(),
            modes: state.truncation(),
            x: state.x().to_vec(),
            p: state.p().to_vec(),
            left: pairs(state.oscillators(Chirality::Minus)),
            right: pairs(state.oscillators(Chirality::Plus)),
        }
    }

    pub fn into_state(self) -> Result<StringState<f64>, CliError> {
        if self.format != STATE_FORMAT {
            return Err(CliError::Format(format!(
                "expected format {STATE_FORMAT}, found {}",
                self.format
            )));
        }
        if self.x.len() != self.dim
            || self.left.len() != self.modes
            || self.right.len() != self.modes
        {
            return Err(CliError::Format(
                "state header disagrees with array sizes".into(),
            ));
        }
        Ok(StringState::new(
            self.tension,
            self.x,
            self.p,
            complexes(&self.left),
            complexes(&self.right),
        )?)
    }
}

pub fn state_to_json(state: &StringState<f64>) -> String {
    let mut s =
        serde_json::to_string_pretty(&StateFile::from_state(state)).expect("state serializes");
    s.push('\n');
    s
}

pub fn state_from_json(text: &str) -> Result<StringState<f64>, CliError> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| CliError::Format(e.to_string()))?;
    file.into_state()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdfModesFile {
    pub format: String,
    pub chirality: String,
    pub m_max: usize,
    pub k: Vec<f64>,
    pub modes: Vec<Vec<Pair>>,
}

impl DdfModesFile {
    pub fn from_modes(modes: &DdfModes<f64>) -> Self {
        Self {
            format: DDF_FORMAT.into(),
            chirality: modes.chirality().symbol().into(),
            m_max: modes.m_max(),
            k: modes.k().to_vec(),
            modes: pairs(modes.all()),
        }
    }

    pub fn into_modes(self) -> Result<DdfModes<f64>, CliError> {
        if self.format != DDF_FORMAT {
            return Err(CliError::Format(format!(
                "expected format {DDF_FORMAT}, found {}",
                self.format
            )));
        }
        if self.modes.len() != 2 * self.m_max + 1 {
            return Err(CliError::Format("mode count disagrees with m_max".into()));
        }
        Ok(DdfModes::new(
            parse_chirality(&self.chirality)?,
            self.k,
            complexes(&self.modes),
        )?)
    }
}

/// `{"chirality":"-","indices":[0,1,2],"symmetrized":false}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantRequest {
    pub chirality: String,
    pub indices: Vec<usize>,
    #[serde(default)]
    pub symmetrized: bool,
}

impl InvariantRequest {
    pub fn to_spec(&self) -> Result<InvariantSpec, CliError> {
        Ok(InvariantSpec::new(
            parse_chirality(&self.chirality)?,
            self.indices.clone(),
            self.symmetrized,
        )?)
    }
}

/// A single request or a list of them.
pub fn parse_requests(text: &str) -> Result<Vec<InvariantRequest>, CliError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(InvariantRequest),
        Many(Vec<InvariantRequest>),
    }
    match serde_json::from_str(text).map_err(|e| CliError::Format(e.to_string()))? {
        OneOrMany::One(r) => Ok(vec![r]),
        OneOrMany::Many(v) => Ok(v),
    }
}

pub fn parse_chirality(s: &str) -> Result<Chirality, CliError> {
    match s {
        "-" | "minus" | "left" => Ok(Chirality::Minus),
        "+" | "plus" | "right" => Ok(Chirality::Plus),
        other => Err(CliError::Usage(format!(
            "unknown chirality '{other}' (use minus/plus)"
        ))),
    }
}

/// `sigma,value0,…` rows, one per sample.
pub fn field_csv(field: &FieldGrid<f64>) -> String {
    let n = field.n_samples();
    let mut out = String::from("sigma");
    for c in 0..field.n_components() {
        let _ = write!(out, ",value{c}");
    }
    out.push('\n');
    for j in 0..n {
        let _ = write!(out, "{:?}", sigma(j, n));
        for c in field.components() {
            let _ = write!(out, ",{:?}", c[j]);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use stringinv_core::{random_state, LightlikeFrame, RandomStateParams};

    #[test]
    fn state_round_trip_is_exact() {
        let s = random_state(
            &RandomStateParams {
                seed: 9,
                ..Default::default()
            },
            &LightlikeFrame::standard(4),
        )
        .unwrap();
        assert_eq!(state_from_json(&state_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn wrong_format_tag_rejected() {
        let s = random_state(&RandomStateParams::default(), &LightlikeFrame::standard(4)).unwrap();
        let text = state_to_json(&s).replace(STATE_FORMAT, "stringstate-v0");
        assert!(matches!(state_from_json(&text), Err(CliError::Format(_))));
    }

    #[test]
    fn requests_accept_one_or_many() {
        let one =
            parse_requests(r#"{"chirality":"-","indices":[0,1,2],"symmetrized":false}"#).unwrap();
        assert_eq!(one.len(), 1);
        let many = parse_requests(
            r#"[{"chirality":"+","indices":[1]},{"chirality":"-","indices":[0,2]}]"#,
        )
        .unwrap();
        assert_eq!(many[0].to_spec().unwrap().chirality, Chirality::Plus);
        assert!(!many[1].symmetrized);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn state_json_round_trip(seed in proptest::prelude::any::<u64>(), modes in 1usize..12, dim in 2usize..6) {
            let s = random_state(&RandomStateParams { seed, modes, dim, ..Default::default() }, &LightlikeFrame::standard(dim)).unwrap();
            proptest::prop_assert_eq!(state_from_json(&state_to_json(&s)).unwrap(), s);
        }
    }

    #[test]
    fn csv_header() {
        let f = FieldGrid::new(vec![vec![1.0; 4], vec![2.0; 4]]).unwrap();
        let csv = field_csv(&f);
        assert!(csv.starts_with("sigma,value0,value1\n0.0,1.0,2.0\n"));
        assert_eq!(csv.lines().count(), 5);
    }
}
