use std::fmt::Write as _;
use std::path::Path;

use super::XlabError;
use crate::group::{Group, GroupElement};
use crate::wreath_paths::{
    dilute_paths, synthetic_family, verify_disjointness, CaseTag, DisjointnessReport, Dilution, PairFamily,
    PathContext,
};

/// A family description file:
///
/// ```text
/// group = Z2wrZ          # optional, this is the default
/// case = 1
/// n = 3
/// pair = ((1);{(0):1}) -> ((0);{(-2):1})
/// pair = hex:0a01... -> hex:...
/// ```
///
/// Instead of `pair` lines, `synthetic = COUNT` (with optional `seed = S`) draws a
/// deterministic synthetic family over base `ℤ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub group: String,
    pub case: CaseTag,
    pub n: u32,
    pub pairs: Vec<(String, String)>,
    pub synthetic: Option<(usize, u64)>,
}

fn parse_element(group: &Group, text: &str) -> Result<GroupElement, String> {
    match text.strip_prefix("hex:") {
        Some(h) => {
            if h.len() % 2 != 0 || !h.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(format!("bad hex encoding {h:?}"));
            }
            let bytes: Vec<u8> = (0..h.len())
                .step_by(2)
                .map(|i| u8::from_str_radix(&h[i..i + 2], 16).expect("checked hex"))
                .collect();
            group.decode(&bytes).map_err(|e| e.to_string())
        }
        None => group.parse_element(text).map_err(|e| e.to_string()),
    }
}

impl FamilySpec {
    pub fn load(path: &Path) -> Result<Self, XlabError> {
        let text = std::fs::read_to_string(path).map_err(|source| XlabError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, XlabError> {
        let mut group = "Z2wrZ".to_string();
        let (mut case, mut n, mut count, mut seed) = (None, None, None, 0u64);
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| XlabError::Config { line, msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {content:?}")))?;
            let v = v.trim();
            let num = |v: &str| v.parse::<u64>().map_err(|e| err(format!("{}: {e}", k.trim())));
            match k.trim() {
                "group" => group = v.to_string(),
                "case" => {
                    let c = u8::try_from(num(v)?).ok().and_then(CaseTag::from_number);
                    case = Some(c.ok_or_else(|| err(format!("case must be 1-4, got {v}")))?);
                }
                "n" => n = Some(u32::try_from(num(v)?).map_err(|e| err(e.to_string()))?),
                "synthetic" => count = Some(num(v)? as usize),
                "seed" => seed = num(v)?,
                "pair" => {
                    let (a, b) = v
                        .split_once("->")
                        .ok_or_else(|| err(format!("expected `a -> b`, got {v:?}")))?;
                    pairs.push((a.trim().to_string(), b.trim().to_string()));
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        let missing = |k: &str| XlabError::Config {
            line: 0,
            msg: format!("missing {k}"),
        };
        let spec = FamilySpec {
            group,
            case: case.ok_or_else(|| missing("case"))?,
            n: n.ok_or_else(|| missing("n"))?,
            synthetic: count.map(|c| (c, seed)),
            pairs,
        };
        if spec.synthetic.is_some() == !spec.pairs.is_empty() {
            return Err(XlabError::Config {
                line: 0,
                msg: "give either pair lines or synthetic = COUNT".into(),
            });
        }
        Ok(spec)
    }
}

/// One compiled path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathRow {
    pub index: usize,
    pub length: usize,
    pub bound: usize,
    /// Folding the word from the start reaches the declared end.
    pub endpoint_ok: bool,
    /// Number of other paths sharing a vertex.
    pub intersections: usize,
}

#[derive(Clone, Debug)]
pub struct PathsReport {
    pub spec: FamilySpec,
    pub rows: Vec<PathRow>,
    pub dropped: Vec<usize>,
    pub census: DisjointnessReport,
    pub dilution: Dilution,
}

impl PathsReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.endpoint_ok && r.length <= r.bound) && self.census.acceptable()
    }

    /// `index,length,bound,endpoint_ok,intersections`, one row per path.
    pub fn csv(&self) -> String {
        let mut s = String::from("index,length,bound,endpoint_ok,intersections\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{}", r.index, r.length, r.bound, r.endpoint_ok, r.intersections);
        }
        s
    }
}

pub fn run_paths(spec: &FamilySpec) -> Result<PathsReport, XlabError> {
    let group = Group::parse(&spec.group)?;
    let ctx = PathContext::new(&group, spec.n)?;
    let family = match spec.synthetic {
        Some((count, seed)) => synthetic_family(&ctx, spec.case, count, seed)?,
        None => {
            let mut a = Vec::new();
            let mut b = Vec::new();
            for (x, y) in &spec.pairs {
                for (text, out) in [(x, &mut a), (y, &mut b)] {
                    out.push(parse_element(&group, text).map_err(|msg| XlabError::Spec {
                        spec: text.clone(),
                        msg,
                    })?);
                }
            }
            PairFamily::new(&ctx, a, b, spec.case)?
        }
    };
    let set = ctx.construct_connecting_paths(&family)?;
    let census = verify_disjointness(&group, &set.paths, spec.case, spec.n);
    let bound = 100 * spec.n as usize;
    let rows = set
        .paths
        .iter()
        .zip(&set.indices)
        .enumerate()
        .map(|(k, (p, &i))| PathRow {
            index: i,
            length: p.len(),
            bound,
            endpoint_ok: p.verify(&group) && group.apply_word(&family.a[i], &p.word) == family.b[i],
            intersections: census.counts[k],
        })
        .collect();
    Ok(PathsReport {
        spec: spec.clone(),
        rows,
        dropped: set.dropped,
        dilution: dilute_paths(&census),
        census,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_pairs() {
        let spec = FamilySpec::parse(
            "case = 1\nn = 2\npair = ((1);{(0):1}) -> ((0);{(-2):1})\npair = ((0);{(1):1}) -> ((2);{(2):1})\n",
        )
        .unwrap();
        let rep = run_paths(&spec).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.rows.len(), 2);
        let csv = rep.csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().ends_with(",200,true,0"));
    }

    #[test]
    fn hex_elements_and_synthetic() {
        let g = Group::parse("Z2wrZ").unwrap();
        let e = g.parse_element("((1);{(0):1})").unwrap();
        let hex: String = g.encode(&e).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(parse_element(&g, &format!("hex:{hex}")).unwrap(), e);
        assert!(parse_element(&g, "hex:0").is_err());
        let spec = FamilySpec::parse("case = 2\nn = 2\nsynthetic = 6\nseed = 4\n").unwrap();
        let rep = run_paths(&spec).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.rows.len(), 6);
    }

    #[test]
    fn malformed_files() {
        for bad in [
            "n = 2\nsynthetic = 3",
            "case = 5\nn = 2\nsynthetic = 3",
            "case = 1\nsynthetic = 3",
            "case = 1\nn = 2",
            "case = 1\nn = 2\npair = a b",
            "case = 1\nn = 2\ncolour = red",
        ] {
            assert!(FamilySpec::parse(bad).is_err(), "{bad}");
        }
    }
}
