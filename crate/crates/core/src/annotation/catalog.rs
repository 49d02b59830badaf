//! Closed class catalog: tools, tool combinations and the idle class.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_IDLE_NAME: &str = "no tool in contact";

/// Index of a class in a [`ClassCatalog`]. Index 0 is always the idle class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub u32);

impl ClassId {
    pub const IDLE: ClassId = ClassId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_idle(self) -> bool {
        self == Self::IDLE
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tool {
    pub index: usize,
    pub name: String,
    pub phase: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassInfo {
    pub id: ClassId,
    pub name: String,
    pub phase: Option<String>,
    /// Constituent tool indices, sorted ascending. Empty only for the idle class.
    pub tools: Vec<usize>,
}

/// On-disk catalog layout (TOML).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idle: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phases: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub starts: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub finals: Vec<String>,
    #[serde(default)]
    pub tools: Vec<ToolEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub combos: Vec<ComboEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComboEntry {
    pub tools: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<String>,
}

/// The closed set of classes a label track may use.
///
/// Class 0 is the idle class, classes `1..=T` are the single tools in
/// declaration order, and declared combinations follow.
#[derive(Debug, Clone)]
pub struct ClassCatalog {
    tools: Vec<Tool>,
    classes: Vec<ClassInfo>,
    phases: Vec<String>,
    combo_map: HashMap<Vec<usize>, ClassId>,
    tool_by_name: HashMap<String, usize>,
    class_by_name: HashMap<String, ClassId>,
    starts: Vec<ClassId>,
    finals: Vec<ClassId>,
}

impl ClassCatalog {
    pub fn from_file_struct(file: &CatalogFile) -> Result<Self> {
        if file.tools.is_empty() {
            return Err(Error::Catalog("catalog declares no tools".into()));
        }
        let idle_name = file.idle.clone().unwrap_or_else(|| DEFAULT_IDLE_NAME.to_string());
        let mut tools = Vec::with_capacity(file.tools.len());
        let mut tool_by_name = HashMap::new();
        for (index, t) in file.tools.iter().enumerate() {
            if t.name.trim().is_empty() {
                return Err(Error::Catalog(format!("tool {index} has an empty name")));
            }
            if tool_by_name.insert(t.name.clone(), index).is_some() {
                return Err(Error::Catalog(format!("duplicate tool name {:?}", t.name)));
            }
            tools.push(Tool { index, name: t.name.clone(), phase: t.phase.clone() });
        }

        let mut classes = vec![ClassInfo {
            id: ClassId::IDLE,
            name: idle_name,
            phase: None,
            tools: Vec::new(),
        }];
        let mut combo_map = HashMap::new();
        for t in &tools {
            let id = ClassId(classes.len() as u32);
            combo_map.insert(vec![t.index], id);
            classes.push(ClassInfo {
                id,
                name: t.name.clone(),
                phase: t.phase.clone(),
                tools: vec![t.index],
            });
        }
        for c in &file.combos {
            if c.tools.len() < 2 {
                return Err(Error::Catalog(format!(
                    "combination {:?} must list at least two tools",
                    c.tools
                )));
            }
            let mut set = BTreeSet::new();
            for name in &c.tools {
                let idx = *tool_by_name
                    .get(name)
                    .ok_or_else(|| Error::Catalog(format!("combination uses unknown tool {name:?}")))?;
                if !set.insert(idx) {
                    return Err(Error::Catalog(format!("combination repeats tool {name:?}")));
                }
            }
            let key: Vec<usize> = set.into_iter().collect();
            let id = ClassId(classes.len() as u32);
            if combo_map.insert(key.clone(), id).is_some() {
                return Err(Error::Catalog(format!("combination {:?} declared twice", c.tools)));
            }
            let name = c.name.clone().unwrap_or_else(|| c.tools.join(" & "));
            classes.push(ClassInfo { id, name, phase: c.phase.clone(), tools: key });
        }

        let mut class_by_name = HashMap::new();
        for c in &classes {
            if class_by_name.insert(c.name.clone(), c.id).is_some() {
                return Err(Error::Catalog(format!("duplicate class name {:?}", c.name)));
            }
        }

        let mut phases = file.phases.clone();
        for p in classes.iter().filter_map(|c| c.phase.as_ref()) {
            if !phases.contains(p) {
                phases.push(p.clone());
            }
        }

        let mut catalog = ClassCatalog {
            tools,
            classes,
            phases,
            combo_map,
            tool_by_name,
            class_by_name,
            starts: Vec::new(),
            finals: Vec::new(),
        };
        catalog.starts = catalog.resolve_names(&file.starts)?;
        catalog.finals = catalog.resolve_names(&file.finals)?;
        Ok(catalog)
    }

    fn resolve_names(&self, names: &[String]) -> Result<Vec<ClassId>> {
        names
            .iter()
            .map(|n| {
                self.class_by_name(n)
                    .ok_or_else(|| Error::Catalog(format!("unknown class name {n:?}")))
            })
            .collect()
    }

    pub fn parse_toml(text: &str) -> Result<Self> {
        let file: CatalogFile =
            toml::from_str(text).map_err(|e| Error::Catalog(e.to_string()))?;
        Self::from_file_struct(&file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_toml(&text).map_err(|e| match e {
            Error::Catalog(msg) => Error::Catalog(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Rebuilds the on-disk representation.
    pub fn to_file_struct(&self) -> CatalogFile {
        let name = |id: &ClassId| self.class(*id).name.clone();
        CatalogFile {
            idle: Some(self.classes[0].name.clone()),
            phases: self.phases.clone(),
            starts: self.starts.iter().map(name).collect(),
            finals: self.finals.iter().map(name).collect(),
            tools: self
                .tools
                .iter()
                .map(|t| ToolEntry { name: t.name.clone(), phase: t.phase.clone() })
                .collect(),
            combos: self.classes[1 + self.tools.len()..]
                .iter()
                .map(|c| ComboEntry {
                    tools: c.tools.iter().map(|&t| self.tools[t].name.clone()).collect(),
                    name: Some(c.name.clone()),
                    phase: c.phase.clone(),
                })
                .collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file_struct()).expect("catalog serializes")
    }

    pub fn tools(&self) -> &[Tool] {
        &self.tools
    }

    pub fn tool_count(&self) -> usize {
        self.tools.len()
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn phases(&self) -> &[String] {
        &self.phases
    }

    /// Declared start classes, if the catalog lists any.
    pub fn starts(&self) -> &[ClassId] {
        &self.starts
    }

    pub fn finals(&self) -> &[ClassId] {
        &self.finals
    }

    /// Panics if `id` is not from this catalog.
    pub fn class(&self, id: ClassId) -> &ClassInfo {
        &self.classes[id.index()]
    }

    pub fn contains(&self, id: ClassId) -> bool {
        id.index() < self.classes.len()
    }

    pub fn class_name(&self, id: ClassId) -> &str {
        &self.class(id).name
    }

    pub fn phase_of(&self, id: ClassId) -> Option<&str> {
        self.class(id).phase.as_deref()
    }

    pub fn class_by_name(&self, name: &str) -> Option<ClassId> {
        self.class_by_name.get(name).copied()
    }

    pub fn tool_by_name(&self, name: &str) -> Option<usize> {
        self.tool_by_name.get(name).copied()
    }

    pub fn idle(&self) -> ClassId {
        ClassId::IDLE
    }

    /// Looks up the class for a set of active tools given as a boolean mask.
    /// The empty set maps to the idle class.
    pub fn class_for_mask(&self, mask: &[bool]) -> Option<ClassId> {
        let key: Vec<usize> = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &on)| on.then_some(i))
            .collect();
        self.class_for_tools(&key)
    }

    /// `tools` must be sorted ascending.
    pub fn class_for_tools(&self, tools: &[usize]) -> Option<ClassId> {
        if tools.is_empty() {
            return Some(ClassId::IDLE);
        }
        self.combo_map.get(tools).copied()
    }

    /// Expands a class back into its tool mask.
    pub fn mask_of(&self, id: ClassId) -> Vec<bool> {
        let mut mask = vec![false; self.tools.len()];
        for &t in &self.class(id).tools {
            mask[t] = true;
        }
        mask
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = r#"
phases = ["cutting", "phaco"]
starts = ["knife"]
finals = ["cannula"]

[[tools]]
name = "knife"
phase = "cutting"

[[tools]]
name = "phacoemulsifier handpiece"
phase = "phaco"

[[tools]]
name = "micromanipulator"
phase = "phaco"

[[tools]]
name = "cannula"

[[combos]]
tools = ["phacoemulsifier handpiece", "micromanipulator"]
phase = "phaco"
"#;

    pub(crate) fn sample() -> ClassCatalog {
        ClassCatalog::parse_toml(SAMPLE).unwrap()
    }

    #[test]
    fn layout_is_idle_tools_combos() {
        let c = sample();
        assert_eq!(c.class_count(), 6);
        assert_eq!(c.class_name(ClassId(0)), DEFAULT_IDLE_NAME);
        assert_eq!(c.class_name(ClassId(1)), "knife");
        assert_eq!(
            c.class_name(ClassId(5)),
            "phacoemulsifier handpiece & micromanipulator"
        );
        assert_eq!(c.class(ClassId(5)).tools, vec![1, 2]);
        assert_eq!(c.starts(), &[ClassId(1)]);
        assert_eq!(c.finals(), &[ClassId(4)]);
    }

    #[test]
    fn mask_lookup() {
        let c = sample();
        assert_eq!(c.class_for_mask(&[false; 4]), Some(ClassId::IDLE));
        assert_eq!(c.class_for_mask(&[false, true, true, false]), Some(ClassId(5)));
        assert_eq!(c.class_for_mask(&[true, true, true, false]), None);
        for class in c.classes() {
            assert_eq!(c.class_for_mask(&c.mask_of(class.id)), Some(class.id));
        }
    }

    #[test]
    fn rejects_bad_catalogs() {
        assert!(ClassCatalog::parse_toml("tools = []").is_err());
        let dup = "[[tools]]\nname = \"a\"\n[[tools]]\nname = \"a\"\n";
        assert!(ClassCatalog::parse_toml(dup).is_err());
        let unknown = "[[tools]]\nname = \"a\"\n[[combos]]\ntools = [\"a\", \"b\"]\n";
        assert!(ClassCatalog::parse_toml(unknown).is_err());
        let twice = "[[tools]]\nname = \"a\"\n[[tools]]\nname = \"b\"\n\
                     [[combos]]\ntools = [\"a\", \"b\"]\n[[combos]]\ntools = [\"b\", \"a\"]\n";
        assert!(ClassCatalog::parse_toml(twice).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = sample();
        let again = ClassCatalog::parse_toml(&c.to_toml()).unwrap();
        assert_eq!(again.classes(), c.classes());
        assert_eq!(again.starts(), c.starts());
    }
}
