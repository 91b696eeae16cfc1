use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use super::{Interpretation, LogicError, MAX_ATOMS};

pub type AtomId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: AtomId,
    pub negated: bool,
}

/// `head :- body.`; a fact has an empty body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: AtomId,
    pub body: Vec<Literal>,
}

/// A ground normal program over a finite Herbrand base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundProgram {
    atoms: Vec<String>,
    clauses: Vec<Clause>,
    declared_strata: Option<Vec<u32>>,
}

impl GroundProgram {
    /// Parses one clause per line: `head :- lit, ..., lit.` or `head.`, with
    /// `not a` for negation and `%` comments. A `% strata: {a: 0, b: 1}`
    /// comment supplies the stratification explicitly.
    pub fn parse(text: &str) -> Result<Self, LogicError> {
        let mut atoms: Vec<String> = Vec::new();
        let mut index: HashMap<String, AtomId> = HashMap::new();
        let mut intern = |name: &str, line: usize| -> Result<AtomId, LogicError> {
            if name.is_empty()
                || !name
                    .chars()
                    .all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
            {
                return Err(LogicError::Syntax {
                    line,
                    message: format!("bad atom name {name:?}"),
                });
            }
            if let Some(&a) = index.get(name) {
                return Ok(a);
            }
            atoms.push(name.to_string());
            index.insert(name.to_string(), atoms.len() - 1);
            Ok(atoms.len() - 1)
        };
        let mut clauses = Vec::new();
        let mut pragma: Option<(usize, Vec<(String, u32)>)> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let (code, comment) = match raw.find('%') {
                Some(at) => (&raw[..at], Some(&raw[at + 1..])),
                None => (raw, None),
            };
            if let Some(rest) = comment.and_then(|c| c.trim().strip_prefix("strata:")) {
                pragma = Some((line, parse_strata_pragma(rest, line)?));
            }
            let code = code.trim();
            if code.is_empty() {
                continue;
            }
            let code = code.strip_suffix('.').ok_or_else(|| LogicError::Syntax {
                line,
                message: "clause must end with '.'".into(),
            })?;
            let (head, body) = match code.split_once(":-") {
                Some((h, b)) => (h.trim(), Some(b)),
                None => (code.trim(), None),
            };
            let head = intern(head, line)?;
            let mut lits = Vec::new();
            if let Some(body) = body {
                for lit in body.split(',').map(str::trim) {
                    let (negated, name) = match lit.strip_prefix("not ") {
                        Some(rest) => (true, rest.trim()),
                        None => (false, lit),
                    };
                    lits.push(Literal {
                        atom: intern(name, line)?,
                        negated,
                    });
                }
            }
            clauses.push(Clause { head, body: lits });
        }
        if atoms.len() > MAX_ATOMS {
            return Err(LogicError::TooManyAtoms(atoms.len()));
        }
        let declared_strata = match pragma {
            None => None,
            Some((line, entries)) => {
                let mut levels = vec![None; atoms.len()];
                for (name, level) in entries {
                    let a = *index.get(&name).ok_or_else(|| LogicError::Syntax {
                        line,
                        message: format!("strata pragma names unknown atom {name:?}"),
                    })?;
                    levels[a] = Some(level);
                }
                let levels = levels
                    .into_iter()
                    .enumerate()
                    .map(|(a, l)| {
                        l.ok_or_else(|| LogicError::Syntax {
                            line,
                            message: format!("strata pragma misses atom {:?}", atoms[a]),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Some(levels)
            }
        };
        Ok(Self {
            atoms,
            clauses,
            declared_strata,
        })
    }

    pub fn load(path: &Path) -> Result<Self, LogicError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The Herbrand base, in order of first appearance.
    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom(&self, name: &str) -> Option<AtomId> {
        self.atoms.iter().position(|a| a == name)
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn declared_strata(&self) -> Option<&[u32]> {
        self.declared_strata.as_deref()
    }

    /// Builds an interpretation from atom names; unknown names are an error.
    pub fn interpretation(&self, names: &[&str]) -> Result<Interpretation, LogicError> {
        let mut i = Interpretation::EMPTY;
        for n in names {
            i.insert(
                self.atom(n)
                    .ok_or_else(|| LogicError::UnknownAtom(n.to_string()))?,
            );
        }
        Ok(i)
    }

    pub fn format(&self, i: Interpretation) -> String {
        let names: Vec<&str> = i.iter().map(|a| self.atoms[a].as_str()).collect();
        format!("{{{}}}", names.join(", "))
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            write!(f, "{}", self.atoms[c.head])?;
            if !c.body.is_empty() {
                let body: Vec<String> = c
                    .body
                    .iter()
                    .map(|l| {
                        format!(
                            "{}{}",
                            if l.negated { "not " } else { "" },
                            self.atoms[l.atom]
                        )
                    })
                    .collect();
                write!(f, " :- {}", body.join(", "))?;
            }
            writeln!(f, ".")?;
        }
        Ok(())
    }
}

fn parse_strata_pragma(text: &str, line: usize) -> Result<Vec<(String, u32)>, LogicError> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| LogicError::Syntax {
            line,
            message: "strata pragma must be {atom: level, ...}".into(),
        })?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|entry| {
            let (name, level) = entry.split_once(':').ok_or_else(|| LogicError::Syntax {
                line,
                message: format!("bad strata entry {entry:?}"),
            })?;
            let level = level.trim().parse().map_err(|_| LogicError::Syntax {
                line,
                message: format!("bad level in {entry:?}"),
            })?;
            Ok((name.trim().to_string(), level))
        })
        .collect()
}
