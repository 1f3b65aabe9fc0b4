//! JSON documents for actions, vector fields and polynomial maps.
//!
//! ```json
//! { "format": 1, "n": 2, "fixed_point": [[0, 0], [0, 0]], "kind": "closed_form",
//!   "coords": [ { "terms": [ { "alpha": [1, 0], "laurent": [ {"k": 1, "re": 1, "im": 0} ] } ] }, … ] }
//! ```
//!
//! `vector_field` and `map` documents carry `"coeff": [re, im]` per term instead of `"laurent"`.

use std::collections::BTreeSet;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::action::{ActionKind, ActionSpec};
use crate::error::{Error, Result};
use crate::poly::{ActionPoly, LaurentPoly, MultiIndex, Poly, PolyMap};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentKind {
    ClosedForm,
    VectorField,
    Map,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub format: u32,
    pub n: usize,
    pub fixed_point: Vec<[f64; 2]>,
    pub kind: DocumentKind,
    pub coords: Vec<CoordDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordDoc {
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub alpha: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laurent: Option<Vec<LaurentTermDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaurentTermDoc {
    pub k: i32,
    pub re: f64,
    pub im: f64,
}

fn complex([re, im]: [f64; 2]) -> Complex64 {
    Complex64::new(re, im)
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

fn finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Input(format!("non-finite number in {what}")))
    }
}

impl Document {
    /// Parses JSON text; syntax errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text).map_err(|e| {
            Error::Input(format!("line {}, column {}: {}", e.line(), e.column(), e))
        })?;
        doc.check_shape()?;
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        Document::parse(&text).map_err(|e| match e {
            Error::Input(msg) => Error::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    fn check_shape(&self) -> Result<()> {
        if self.format != FORMAT_VERSION {
            return Err(Error::Input(format!(
                "unsupported format {}, expected {FORMAT_VERSION}",
                self.format
            )));
        }
        if self.n == 0 {
            return Err(Error::Input("n must be positive".into()));
        }
        if self.fixed_point.len() != self.n || self.coords.len() != self.n {
            return Err(Error::Input(format!(
                "n = {} but fixed_point has {} entries and coords has {}",
                self.n,
                self.fixed_point.len(),
                self.coords.len()
            )));
        }
        finite(&self.fixed_point.concat(), "fixed_point")?;
        for (i, coord) in self.coords.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for term in &coord.terms {
                if term.alpha.len() != self.n {
                    return Err(Error::Input(format!(
                        "coordinate {i}: exponent {:?} has length {}, expected {}",
                        term.alpha,
                        term.alpha.len(),
                        self.n
                    )));
                }
                if !seen.insert(term.alpha.clone()) {
                    return Err(Error::Input(format!("coordinate {i}: repeated exponent {:?}", term.alpha)));
                }
                match (self.kind, &term.laurent, &term.coeff) {
                    (DocumentKind::ClosedForm, Some(laurent), None) => {
                        let mut ks = BTreeSet::new();
                        for t in laurent {
                            if !ks.insert(t.k) {
                                return Err(Error::Input(format!(
                                    "coordinate {i}, exponent {:?}: repeated frequency {}",
                                    term.alpha, t.k
                                )));
                            }
                            finite(&[t.re, t.im], "a Laurent coefficient")?;
                        }
                    }
                    (DocumentKind::VectorField | DocumentKind::Map, None, Some(c)) => finite(c, "a coefficient")?,
                    (DocumentKind::ClosedForm, _, _) => {
                        return Err(Error::Input(format!(
                            "coordinate {i}: closed_form terms need \"laurent\" and no \"coeff\""
                        )))
                    }
                    _ => {
                        return Err(Error::Input(format!(
                            "coordinate {i}: terms need \"coeff\" and no \"laurent\""
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn fixed_point(&self) -> Vec<Complex64> {
        self.fixed_point.iter().copied().map(complex).collect()
    }

    fn poly_coords(&self) -> Vec<Poly<Complex64>> {
        self.coords
            .iter()
            .map(|coord| {
                Poly::from_terms(
                    self.n,
                    coord
                        .terms
                        .iter()
                        .map(|t| (MultiIndex::new(t.alpha.clone()), complex(t.coeff.unwrap_or([0.0, 0.0])))),
                )
            })
            .collect()
    }

    pub fn to_spec(&self) -> Result<ActionSpec> {
        self.check_shape()?;
        match self.kind {
            DocumentKind::ClosedForm => {
                let coords = self
                    .coords
                    .iter()
                    .map(|coord| {
                        Poly::from_terms(
                            self.n,
                            coord.terms.iter().map(|t| {
                                let laurent = t
                                    .laurent
                                    .iter()
                                    .flatten()
                                    .map(|l| (l.k, Complex64::new(l.re, l.im)));
                                (MultiIndex::new(t.alpha.clone()), LaurentPoly::from_terms(laurent))
                            }),
                        )
                    })
                    .collect();
                ActionSpec::closed_form(ActionPoly::new(coords)?, self.fixed_point())
            }
            DocumentKind::VectorField => ActionSpec::vector_field(PolyMap::new(self.poly_coords())?, self.fixed_point()),
            DocumentKind::Map => Err(Error::Input("expected an action or vector field, found a map".into())),
        }
    }

    /// A `map` document as a polynomial map and its base point.
    pub fn to_polymap(&self) -> Result<(PolyMap, Vec<Complex64>)> {
        self.check_shape()?;
        if self.kind != DocumentKind::Map {
            return Err(Error::Input("expected a map document".into()));
        }
        Ok((PolyMap::new(self.poly_coords())?, self.fixed_point()))
    }

    pub fn from_spec(spec: &ActionSpec) -> Self {
        let n = spec.dimension();
        let fixed_point = spec.fixed_point().iter().copied().map(pair).collect();
        match spec.kind() {
            ActionKind::ClosedForm(action) => Document {
                format: FORMAT_VERSION,
                n,
                fixed_point,
                kind: DocumentKind::ClosedForm,
                coords: action
                    .coords()
                    .iter()
                    .map(|coord| CoordDoc {
                        terms: coord
                            .terms()
                            .map(|(alpha, l)| TermDoc {
                                alpha: alpha.exponents().to_vec(),
                                laurent: Some(
                                    l.terms()
                                        .map(|(k, c)| LaurentTermDoc { k, re: c.re, im: c.im })
                                        .collect(),
                                ),
                                coeff: None,
                            })
                            .collect(),
                    })
                    .collect(),
            },
            ActionKind::VectorField(field) => {
                let mut doc = Document::from_polymap(field, spec.fixed_point());
                doc.kind = DocumentKind::VectorField;
                doc
            }
        }
    }

    pub fn from_polymap(map: &PolyMap, fixed_point: &[Complex64]) -> Self {
        Document {
            format: FORMAT_VERSION,
            n: map.dimension(),
            fixed_point: fixed_point.iter().copied().map(pair).collect(),
            kind: DocumentKind::Map,
            coords: map
                .coords()
                .iter()
                .map(|coord| CoordDoc {
                    terms: coord
                        .terms()
                        .map(|(alpha, c)| TermDoc {
                            alpha: alpha.exponents().to_vec(),
                            laurent: None,
                            coeff: Some(pair(*c)),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Reads a JSON list of points, each a list of `[re, im]` pairs.
pub fn read_points(path: &Path, n: usize) -> Result<Vec<Vec<Complex64>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let raw: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text).map_err(|e| {
        Error::Input(format!("{}: line {}, column {}: {}", path.display(), e.line(), e.column(), e))
    })?;
    raw.into_iter()
        .enumerate()
        .map(|(i, p)| {
            if p.len() != n {
                return Err(Error::Input(format!("point {i} has {} coordinates, expected {n}", p.len())));
            }
            finite(&p.concat(), "a point")?;
            Ok(p.into_iter().map(complex).collect())
        })
        .collect()
}

/// Parses `re,im,re,im,…` into complex numbers.
pub fn parse_complex_list(text: &str) -> Result<Vec<Complex64>> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Input(format!("bad number list {text:?}: {e}")))?;
    if !parts.len().is_multiple_of(2) {
        return Err(Error::Input(format!("{text:?} has an odd number of entries")));
    }
    finite(&parts, "a number list")?;
    Ok(parts.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{e1_action, euler_cubic_field, e1_linearizer};

    fn origin() -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); 2]
    }

    #[test]
    fn round_trips() {
        let specs = [
            ActionSpec::closed_form(e1_action(), origin()).unwrap(),
            ActionSpec::vector_field(euler_cubic_field(), vec![Complex64::new(0.25, -1.5), Complex64::new(1e-300, 3.0)])
                .unwrap(),
        ];
        for spec in specs {
            let doc = Document::from_spec(&spec);
            let again = Document::parse(&doc.to_json()).unwrap();
            assert_eq!(again, doc);
            assert_eq!(Document::from_spec(&again.to_spec().unwrap()), doc);
        }
        let doc = Document::from_polymap(&e1_linearizer(), &origin());
        let (map, p) = Document::parse(&doc.to_json()).unwrap().to_polymap().unwrap();
        assert_eq!(map, e1_linearizer());
        assert_eq!(p, origin());
    }

    #[test]
    fn syntax_errors_have_positions() {
        let text = Document::from_spec(&ActionSpec::closed_form(e1_action(), origin()).unwrap()).to_json();
        let truncated = &text[..text.len() / 2];
        match Document::parse(truncated) {
            Err(Error::Input(msg)) => assert!(msg.starts_with("line "), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shape_errors() {
        let good = r#"{"format":1,"n":1,"fixed_point":[[0,0]],"kind":"vector_field","coords":[{"terms":[{"alpha":[1],"coeff":[0,6.283185307179586]}]}]}"#;
        assert!(Document::parse(good).unwrap().to_spec().is_ok());
        for bad in [
            good.replace("\"format\":1", "\"format\":2"),
            good.replace("\"n\":1", "\"n\":2"),
            good.replace("[{\"alpha\"", "[{\"extra\":0,\"alpha\""),
            good.replace("\"alpha\":[1]", "\"alpha\":[1,0]"),
            good.replace("\"coeff\":[0,6.283185307179586]", "\"laurent\":[]"),
            good.replace("vector_field", "closed_form"),
            good.replace("vector_field", "spline"),
        ] {
            assert!(matches!(Document::parse(&bad), Err(Error::Input(_))), "{bad}");
        }
    }

    #[test]
    fn number_lists() {
        assert_eq!(
            parse_complex_list("1, 2,-0.5,0").unwrap(),
            vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0)]
        );
        assert!(parse_complex_list("1,2,3").is_err());
        assert!(parse_complex_list("1,x").is_err());
    }
}
