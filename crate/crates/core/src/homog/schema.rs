//! JSON documents for maps and families.
//!
//! ```json
//! {"sublinear": {"subdiff": {"ball": {"center": [0, 0], "radius": 1}}, "label": "s"}}
//! {"family": {"kind": "usc", "maps": [{"sublinear": {...}}, ...]}}
//! {"family": {"kind": "lsc", "maps": {"builtin": "example-7.2"}}}
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{builtin, sphere, Family, PhFunction, Representation, SublinearMap, SuperlinearMap};
use crate::error::{Error, Result};
use crate::json::{self, schema};

const OP: &str = "load_family";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapSpec {
    Sublinear(SublinearMap),
    Superlinear(SuperlinearMap),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindTag {
    Usc,
    Lsc,
    Cts,
}

/// `{"family": {"kind": ..., "maps": ..., "name": ...}}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDocument {
    family: FamilyBody,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyBody {
    kind: KindTag,
    maps: Value,
    #[serde(default)]
    name: Option<String>,
}

impl FamilyDocument {
    pub fn parse(text: &str) -> Result<PhFunction> {
        json::from_str::<FamilyDocument>(OP, text)?.into_function()
    }

    pub fn into_function(self) -> Result<PhFunction> {
        let FamilyBody { kind, maps, name } = self.family;
        let function = match maps {
            Value::Object(obj) if obj.contains_key("builtin") => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct BuiltinRef {
                    builtin: String,
                }
                let r: BuiltinRef = json::from_value(OP, "family.maps", Value::Object(obj))?;
                let h = builtin(&r.builtin)?;
                let actual = h.representation().tag();
                if actual != kind {
                    return Err(schema(
                        OP,
                        "family.kind",
                        format!("built-in {:?} is {actual:?}, not {kind:?}", r.builtin),
                    ));
                }
                h
            }
            Value::Array(items) => {
                let mut subs = Vec::new();
                let mut sups = Vec::new();
                for (i, item) in items.into_iter().enumerate() {
                    let path = format!("family.maps[{i}]");
                    match json::from_value::<MapSpec>(OP, &path, item)? {
                        MapSpec::Sublinear(m) if kind != KindTag::Lsc => subs.push(m),
                        MapSpec::Superlinear(m) if kind != KindTag::Usc => sups.push(m),
                        _ => {
                            return Err(schema(
                                OP,
                                path,
                                format!("map type not allowed in a {kind:?} family"),
                            ))
                        }
                    }
                }
                let repr = match kind {
                    KindTag::Usc => Representation::Usc(Family::Finite(subs)),
                    KindTag::Lsc => Representation::Lsc(Family::Finite(sups)),
                    KindTag::Cts => {
                        if subs.is_empty() || sups.is_empty() {
                            return Err(schema(
                                OP,
                                "family.maps",
                                "a cts family needs both sublinear and superlinear maps",
                            ));
                        }
                        Representation::Continuous {
                            inf: Family::Finite(subs),
                            sup: Family::Finite(sups),
                        }
                    }
                };
                let label = name.clone().unwrap_or_else(|| "family".to_string());
                PhFunction::new(label, repr).map_err(|e| match e {
                    Error::EmptyFamily { .. } => schema(OP, "family.maps", "family is empty"),
                    other => schema(OP, "family.maps", other.to_string()),
                })?
            }
            _ => {
                return Err(schema(
                    OP,
                    "family.maps",
                    "expected an array of maps or {\"builtin\": name}",
                ))
            }
        };
        // Reject anything that does not stay finite on the sphere.
        function.sphere_bounds(sphere::default_density(function.dim()).min(256))?;
        Ok(match name {
            Some(n) if function.name() != n => rename(function, n),
            _ => function,
        })
    }
}

fn rename(h: PhFunction, name: String) -> PhFunction {
    PhFunction { name, ..h }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sublinear_map() {
        let text = r#"{"sublinear": {"subdiff": {"ball": {"center": [0, 0], "radius": 1}}, "label": "s"}}"#;
        let m: MapSpec = serde_json::from_str(text).unwrap();
        match m {
            MapSpec::Sublinear(s) => assert_eq!(s.eval(&[3.0, 4.0]).unwrap(), 5.0),
            _ => panic!("wrong variant"),
        }
    }

    #[test]
    fn parses_finite_family() {
        let text = r#"{"family": {"kind": "usc", "maps": [
            {"sublinear": {"subdiff": {"polytope": {"vertices": [[1, 1], [0, 0]]}}}},
            {"sublinear": {"subdiff": {"polytope": {"vertices": [[2, 1], [0, 0]]}}}}
        ]}}"#;
        let h = FamilyDocument::parse(text).unwrap();
        assert_eq!(h.dim(), 2);
        assert_eq!(h.eval_family(&[1.0, 1.0], 1e-9).unwrap().value, 2.0);
        assert_eq!(h.eval_family(&[-1.0, 1.5], 1e-9).unwrap().value, 0.0);
    }

    #[test]
    fn parses_builtin_reference() {
        let h = FamilyDocument::parse(
            r#"{"family": {"kind": "lsc", "maps": {"builtin": "example-7.2"}}}"#,
        )
        .unwrap();
        assert_eq!(h.name(), "example-7.2");
        let err = FamilyDocument::parse(
            r#"{"family": {"kind": "usc", "maps": {"builtin": "example-7.2"}}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Schema { ref path, .. } if path == "family.kind"));
    }

    #[test]
    fn reports_path_of_bad_radius() {
        let text = r#"{"family": {"kind": "usc", "maps": [
            {"sublinear": {"subdiff": {"ball": {"center": [0, 0], "radius": -1}}}}
        ]}}"#;
        match FamilyDocument::parse(text).unwrap_err() {
            Error::Schema { path, reason, .. } => {
                assert!(path.starts_with("family.maps[0]"), "{path}");
                assert!(reason.contains("radius"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_map_kind_and_empty() {
        let text = r#"{"family": {"kind": "usc", "maps": [
            {"superlinear": {"superdiff": {"polytope": {"vertices": [[1, 0]]}}}}
        ]}}"#;
        assert!(matches!(
            FamilyDocument::parse(text),
            Err(Error::Schema { .. })
        ));
        let text = r#"{"family": {"kind": "lsc", "maps": []}}"#;
        assert!(matches!(
            FamilyDocument::parse(text),
            Err(Error::Schema { .. })
        ));
        let text = r#"{"family": {"kind": "xyz", "maps": []}}"#;
        match FamilyDocument::parse(text).unwrap_err() {
            Error::Schema { path, .. } => assert_eq!(path, "family.kind"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let text = r#"{"family": {"kind": "usc", "maps": [
            {"sublinear": {"subdiff": {"polytope": {"vertices": [[1, 0]]}}}},
            {"sublinear": {"subdiff": {"polytope": {"vertices": [[1, 0, 2]]}}}}
        ]}}"#;
        assert!(FamilyDocument::parse(text).is_err());
    }
}
