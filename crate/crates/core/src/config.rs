//! XML case descriptions.
//!
//! A case file has a `laplace` root holding one `case` element (attributes
//! `name`, `dimension`, `force`) followed by one `mesh` element per direction:
//!
//! ```xml
//! <laplace>
//!   <case name="l1d_16_dd" dimension="1" force="1.0"></case>
//!   <mesh direction="x">
//!     <length>1.0</length> <ntotal>16</ntotal> <nclust>6</nclust>
//!     <cltype>2</cltype> <cratio>1.2</cratio>
//!     <btype>D, D</btype> <bvalue>0.0, 0.0</bvalue> <degfix>8</degfix>
//!   </mesh>
//! </laplace>
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
    Repeat,
    Symmetry,
}

impl BoundaryKind {
    pub fn letter(self) -> char {
        match self {
            BoundaryKind::Dirichlet => 'D',
            BoundaryKind::Neumann => 'N',
            BoundaryKind::Repeat => 'R',
            BoundaryKind::Symmetry => 'S',
        }
    }

    /// Rank used at edges and corners where several boundaries meet; lower wins.
    /// Repeat never owns a boundary row.
    pub(crate) fn precedence(self) -> Option<u8> {
        match self {
            BoundaryKind::Dirichlet => Some(0),
            BoundaryKind::Neumann => Some(1),
            BoundaryKind::Symmetry => Some(2),
            BoundaryKind::Repeat => None,
        }
    }
}

impl FromStr for BoundaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D" => Ok(BoundaryKind::Dirichlet),
            "N" => Ok(BoundaryKind::Neumann),
            "R" => Ok(BoundaryKind::Repeat),
            "S" => Ok(BoundaryKind::Symmetry),
            other => Err(invalid("btype", other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(invalid("direction", other)),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Clustering and boundary parameters for one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec {
    pub direction: Axis,
    pub length: f64,
    pub ntotal: usize,
    /// Points per clustered region. Values below 2 mean no clustering.
    pub nclust: usize,
    /// Number of clustered ends: 2 for both, 1 for the low end only.
    pub cltype: u8,
    pub cratio: f64,
    pub btype: [BoundaryKind; 2],
    pub bvalue: [f64; 2],
    pub degfix: usize,
}

impl MeshSpec {
    /// Uniform spec with both ends of the given kind, handy in tests.
    pub fn uniform(direction: Axis, length: f64, ntotal: usize, kind: BoundaryKind) -> Self {
        MeshSpec {
            direction,
            length,
            ntotal,
            nclust: 1,
            cltype: 2,
            cratio: 1.0,
            btype: [kind; 2],
            bvalue: [0.0; 2],
            degfix: ntotal / 2,
        }
    }

    pub fn sides(&self) -> usize {
        self.cltype as usize
    }

    /// Points in the uniform region.
    pub fn n_uniform(&self) -> i64 {
        let nt = self.ntotal as i64;
        let nc = self.nclust.max(1) as i64;
        match self.cltype {
            1 => nt - nc + 1,
            _ => nt - 2 * nc + 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(invalid("length", self.length));
        }
        if self.ntotal < 2 {
            return Err(invalid("ntotal", self.ntotal));
        }
        if !matches!(self.cltype, 1 | 2) {
            return Err(invalid("cltype", self.cltype));
        }
        if !(self.cratio.is_finite() && self.cratio >= 1.0) {
            return Err(invalid("cratio", self.cratio));
        }
        if self.n_uniform() < 2 {
            return Err(invalid("nclust", self.nclust));
        }
        let repeats = self.btype.iter().filter(|&&b| b == BoundaryKind::Repeat).count();
        if repeats == 1 {
            return Err(invalid("btype", "R must appear on both ends"));
        }
        if self.degfix >= self.ntotal {
            return Err(invalid("degfix", self.degfix));
        }
        if self.bvalue.iter().any(|v| !v.is_finite()) {
            return Err(invalid("bvalue", format!("{:?}", self.bvalue)));
        }
        Ok(())
    }

    pub fn is_repeat(&self) -> bool {
        self.btype[0] == BoundaryKind::Repeat
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    pub name: String,
    pub dimension: usize,
    pub force: f64,
    pub meshes: Vec<MeshSpec>,
}

impl CaseConfig {
    /// True when no boundary pins the solution value.
    pub fn is_degenerate(&self) -> bool {
        self.meshes
            .iter()
            .flat_map(|m| m.btype.iter())
            .all(|&b| b != BoundaryKind::Dirichlet)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || self.name.contains(['/', '\\', '\0'])
            || self.name == "."
            || self.name == ".."
        {
            return Err(invalid("name", &self.name));
        }
        if !(1..=3).contains(&self.dimension) {
            return Err(invalid("dimension", self.dimension));
        }
        if !self.force.is_finite() {
            return Err(invalid("force", self.force));
        }
        if self.meshes.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: self.meshes.len(),
            });
        }
        for m in &self.meshes {
            m.validate()?;
        }
        Ok(())
    }

    /// Serialize back to the case-file format. Reals use the shortest
    /// representation that parses back to the same value.
    pub fn to_xml(&self) -> String {
        let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<laplace>\n");
        s.push_str(&format!(
            "  <case name=\"{}\" dimension=\"{}\" force=\"{:?}\"></case>\n",
            escape(&self.name),
            self.dimension,
            self.force
        ));
        for m in &self.meshes {
            s.push_str(&format!("  <mesh direction=\"{}\">\n", m.direction));
            s.push_str(&format!("    <length>{:?}</length>\n", m.length));
            s.push_str(&format!("    <ntotal>{}</ntotal>\n", m.ntotal));
            s.push_str(&format!("    <nclust>{}</nclust>\n", m.nclust));
            s.push_str(&format!("    <cltype>{}</cltype>\n", m.cltype));
            s.push_str(&format!("    <cratio>{:?}</cratio>\n", m.cratio));
            s.push_str(&format!(
                "    <btype>{}, {}</btype>\n",
                m.btype[0].letter(),
                m.btype[1].letter()
            ));
            s.push_str(&format!("    <bvalue>{:?}, {:?}</bvalue>\n", m.bvalue[0], m.bvalue[1]));
            s.push_str(&format!("    <degfix>{}</degfix>\n", m.degfix));
            s.push_str("  </mesh>\n");
        }
        s.push_str("</laplace>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn invalid(field: &str, value: impl fmt::Display) -> Error {
    Error::InvalidValue {
        field: field.to_string(),
        value: value.to_string(),
    }
}

fn parse_num<T: FromStr>(field: &str, text: &str) -> Result<T> {
    text.trim().parse().map_err(|_| invalid(field, text.trim()))
}

fn child_text<'a>(node: roxmltree::Node<'a, '_>, tag: &str) -> Option<&'a str> {
    node.children()
        .find(|c| c.has_tag_name(tag))
        .map(|c| c.text().unwrap_or(""))
}

fn required<'a>(node: roxmltree::Node<'a, '_>, tag: &str) -> Result<&'a str> {
    child_text(node, tag).ok_or_else(|| Error::MissingField(tag.to_string()))
}

/// Split a two-entry comma list; a single entry is reported as missing.
fn pair<'a>(field: &str, text: &'a str) -> Result<[&'a str; 2]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] if !a.is_empty() && !b.is_empty() => Ok([a, b]),
        [_] => Err(Error::MissingField(format!("{field} (second entry)"))),
        _ => Err(invalid(field, text)),
    }
}

fn parse_mesh(node: roxmltree::Node<'_, '_>) -> Result<MeshSpec> {
    let direction: Axis = node
        .attribute("direction")
        .ok_or_else(|| Error::MissingField("mesh direction".into()))?
        .trim()
        .parse()?;
    let bt = pair("btype", required(node, "btype")?)?;
    let bv = pair("bvalue", required(node, "bvalue")?)?;
    let degfix = match child_text(node, "degfix") {
        Some(t) => parse_num("degfix", t)?,
        None => 0,
    };
    Ok(MeshSpec {
        direction,
        length: parse_num("length", required(node, "length")?)?,
        ntotal: parse_num("ntotal", required(node, "ntotal")?)?,
        nclust: parse_num("nclust", required(node, "nclust")?)?,
        cltype: parse_num("cltype", required(node, "cltype")?)?,
        cratio: parse_num("cratio", required(node, "cratio")?)?,
        btype: [bt[0].parse()?, bt[1].parse()?],
        bvalue: [parse_num("bvalue", bv[0])?, parse_num("bvalue", bv[1])?],
        degfix,
    })
}

/// Parse and validate a case description.
pub fn parse_case(xml_text: &str) -> Result<CaseConfig> {
    let doc = roxmltree::Document::parse(xml_text).map_err(|e| Error::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    if !root.has_tag_name("laplace") {
        return Err(Error::MalformedXml(format!(
            "root element is <{}>, expected <laplace>",
            root.tag_name().name()
        )));
    }
    let case = root
        .children()
        .find(|c| c.has_tag_name("case"))
        .ok_or_else(|| Error::MissingField("case".into()))?;
    let attr = |k: &str| {
        case.attribute(k)
            .ok_or_else(|| Error::MissingField(format!("case {k}")))
    };
    let cfg = CaseConfig {
        name: attr("name")?.trim().to_string(),
        dimension: parse_num("dimension", attr("dimension")?)?,
        force: parse_num("force", attr("force")?)?,
        meshes: root
            .children()
            .filter(|c| c.has_tag_name("mesh"))
            .map(parse_mesh)
            .collect::<Result<_>>()?,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) const SAMPLE: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<laplace>
  <case name="l1d_16_dd" dimension="1" force="1.0"></case>
  <mesh direction="x">
    <length>1.0</length>
    <ntotal>16</ntotal>
    <nclust>6</nclust>
    <cltype>2</cltype>
    <cratio>1.2</cratio>
    <btype>D, D</btype>
    <bvalue>0.0, 0.0</bvalue>
    <degfix>8</degfix>
  </mesh>
</laplace>
"#;

    #[test]
    fn sample_parses() {
        let c = parse_case(SAMPLE).unwrap();
        assert_eq!(c.name, "l1d_16_dd");
        assert_eq!(c.dimension, 1);
        assert_eq!(c.force, 1.0);
        let m = &c.meshes[0];
        assert_eq!(m.direction, Axis::X);
        assert_eq!((m.length, m.ntotal, m.nclust, m.cltype, m.cratio), (1.0, 16, 6, 2, 1.2));
        assert_eq!(m.btype, [BoundaryKind::Dirichlet; 2]);
        assert_eq!(m.bvalue, [0.0, 0.0]);
        assert_eq!(m.degfix, 8);
        assert!(!c.is_degenerate());
    }

    #[test]
    fn repeat_letters() {
        let c = parse_case(&SAMPLE.replace("D, D", "R,   R")).unwrap();
        assert_eq!(c.meshes[0].btype, [BoundaryKind::Repeat; 2]);
        assert!(c.is_degenerate());
    }

    #[test]
    fn single_btype_is_missing_field() {
        let e = parse_case(&SAMPLE.replace("D, D", "D")).unwrap_err();
        assert!(matches!(e, Error::MissingField(_)), "{e:?}");
    }

    #[test]
    fn unpaired_repeat_rejected() {
        let e = parse_case(&SAMPLE.replace("D, D", "R, D")).unwrap_err();
        assert!(matches!(e, Error::InvalidValue { .. }));
    }

    #[test]
    fn malformed_tag_rejected() {
        let bad = SAMPLE.replace("<cltype>2</cltype>", "<cltype>2</cltype");
        assert!(matches!(parse_case(&bad), Err(Error::MalformedXml(_))));
    }

    #[test]
    fn value_errors() {
        for (from, to) in [
            ("<ntotal>16</ntotal>", "<ntotal>1</ntotal>"),
            ("<cratio>1.2</cratio>", "<cratio>0.9</cratio>"),
            ("D, D", "D, Q"),
            ("dimension=\"1\"", "dimension=\"4\""),
            ("<nclust>6</nclust>", "<nclust>9</nclust>"),
            ("<degfix>8</degfix>", "<degfix>16</degfix>"),
        ] {
            let e = parse_case(&SAMPLE.replace(from, to)).unwrap_err();
            assert!(matches!(e, Error::InvalidValue { .. }), "{to}: {e:?}");
        }
        let e = parse_case(&SAMPLE.replace("dimension=\"1\"", "dimension=\"2\"")).unwrap_err();
        assert!(matches!(e, Error::DimensionMismatch { expected: 2, found: 1 }));
        let e = parse_case(&SAMPLE.replace("<length>1.0</length>", "")).unwrap_err();
        assert!(matches!(e, Error::MissingField(_)));
    }

    #[test]
    fn degfix_optional() {
        let c = parse_case(&SAMPLE.replace("<degfix>8</degfix>", "")).unwrap();
        assert_eq!(c.meshes[0].degfix, 0);
    }

    fn kind() -> impl Strategy<Value = [BoundaryKind; 2]> {
        use BoundaryKind::*;
        prop_oneof![
            Just([Repeat, Repeat]),
            (prop_oneof![Just(Dirichlet), Just(Neumann), Just(Symmetry)],
             prop_oneof![Just(Dirichlet), Just(Neumann), Just(Symmetry)])
                .prop_map(|(a, b)| [a, b]),
        ]
    }

    fn spec(direction: Axis) -> impl Strategy<Value = MeshSpec> {
        (4usize..40, 1u8..=2, 1.0f64..2.5, kind(), -5.0f64..5.0, -5.0f64..5.0, 0.1f64..10.0)
            .prop_flat_map(move |(nt, ct, r, bt, v0, v1, len)| {
                let max_nc = if ct == 2 { nt / 2 } else { nt - 1 };
                (2..=max_nc, 0..nt).prop_map(move |(nc, fix)| MeshSpec {
                    direction,
                    length: len,
                    ntotal: nt,
                    nclust: nc,
                    cltype: ct,
                    cratio: r,
                    btype: bt,
                    bvalue: [v0, v1],
                    degfix: fix,
                })
            })
    }

    proptest! {
        #[test]
        fn xml_round_trip(
            name in "[a-z][a-z0-9_]{0,12}",
            force in -10.0f64..10.0,
            mx in spec(Axis::X), my in spec(Axis::Y), mz in spec(Axis::Z),
            dim in 1usize..=3,
        ) {
            let meshes: Vec<_> = [mx, my, mz].into_iter().take(dim).collect();
            let c = CaseConfig { name, dimension: dim, force, meshes };
            c.validate().unwrap();
            let back = parse_case(&c.to_xml()).unwrap();
            prop_assert_eq!(back, c);
        }

        #[test]
        fn list_whitespace_insensitive(a in "[ \t]{0,3}", b in "[ \t\n]{0,3}") {
            let text = SAMPLE.replace("D, D", &format!("{a}D{b},{a}N{b}"));
            let c = parse_case(&text).unwrap();
            prop_assert_eq!(c.meshes[0].btype, [BoundaryKind::Dirichlet, BoundaryKind::Neumann]);
        }
    }
}
