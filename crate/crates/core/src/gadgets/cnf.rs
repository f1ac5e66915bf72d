use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `p cnf <vars> <clauses>` header")]
    MissingHeader,
    #[error("clause {clause} has {got} literals, expected 3")]
    Arity { clause: usize, got: usize },
    #[error("literal {literal} out of range for {vars} variables")]
    OutOfRange { literal: i32, vars: usize },
    #[error("header announces {expected} clauses, found {got}")]
    ClauseCount { expected: usize, got: usize },
    #[error("formula needs at least one variable and one clause")]
    Empty,
}

/// A 3-CNF formula. Literal `k` is variable `k`, `-k` its negation;
/// variables are numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<[i32; 3]>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<[i32; 3]>) -> Result<Self, CnfError> {
        if num_vars == 0 || clauses.is_empty() {
            return Err(CnfError::Empty);
        }
        for c in &clauses {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > num_vars {
                    return Err(CnfError::OutOfRange {
                        literal: l,
                        vars: num_vars,
                    });
                }
            }
        }
        Ok(Self { num_vars, clauses })
    }

    /// DIMACS text: `c` comment lines, a `p cnf N M` header, then clauses
    /// as literal lists each terminated by `0`.
    pub fn parse(text: &str) -> Result<Self, CnfError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current: Vec<i32> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: &str| CnfError::Syntax {
                line: i + 1,
                msg: msg.to_string(),
            };
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if line.starts_with('p') {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if header.is_some() || parts.len() != 4 || parts[1] != "cnf" {
                    return Err(err("malformed header"));
                }
                let n = parts[2].parse().map_err(|_| err("bad variable count"))?;
                let m = parts[3].parse().map_err(|_| err("bad clause count"))?;
                header = Some((n, m));
                continue;
            }
            let Some((n, _)) = header else {
                return Err(CnfError::MissingHeader);
            };
            for tok in line.split_whitespace() {
                let l: i32 = tok.parse().map_err(|_| err("bad literal"))?;
                if l == 0 {
                    let got = current.len();
                    let clause: [i32; 3] =
                        std::mem::take(&mut current)
                            .try_into()
                            .map_err(|_| CnfError::Arity {
                                clause: clauses.len() + 1,
                                got,
                            })?;
                    clauses.push(clause);
                } else {
                    if l.unsigned_abs() as usize > n {
                        return Err(CnfError::OutOfRange {
                            literal: l,
                            vars: n,
                        });
                    }
                    current.push(l);
                }
            }
        }
        let (n, m) = header.ok_or(CnfError::MissingHeader)?;
        if !current.is_empty() {
            return Err(CnfError::Arity {
                clause: clauses.len() + 1,
                got: current.len(),
            });
        }
        if clauses.len() != m {
            return Err(CnfError::ClauseCount {
                expected: m,
                got: clauses.len(),
            });
        }
        Self::new(n, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[[i32; 3]] {
        &self.clauses
    }

    /// `assignment[i]` is the value of variable `i + 1`.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }

    /// Every satisfying assignment, by truth table. Variable 1 is the most
    /// significant position.
    pub fn satisfying_assignments(&self) -> Vec<Vec<bool>> {
        let n = self.num_vars;
        (0..1u64 << n)
            .map(|bits| {
                (0..n)
                    .map(|i| bits >> (n - 1 - i) & 1 == 1)
                    .collect::<Vec<_>>()
            })
            .filter(|a| self.eval(a))
            .collect()
    }

    pub fn is_satisfiable(&self) -> bool {
        !self.satisfying_assignments().is_empty()
    }
}

impl fmt::Display for CnfFormula {
    /// DIMACS form; parses back to the same formula.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for c in &self.clauses {
            writeln!(f, "{} {} {} 0", c[0], c[1], c[2])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_headers_and_clauses() {
        let f = CnfFormula::parse("c x\np cnf 1 1\n1 -1 1 0\n").unwrap();
        assert_eq!((f.num_vars(), f.clauses().len()), (1, 1));
        let f = CnfFormula::parse("p cnf 3 1\n1 2 3 0\n").unwrap();
        assert_eq!(f.num_vars(), 3);
        let f = CnfFormula::parse("p cnf 2 2\n1 2\n -1 0 2 2 2 0\n").unwrap();
        assert_eq!(f.clauses(), &[[1, 2, -1], [2, 2, 2]]);
        assert_eq!(CnfFormula::parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            CnfFormula::parse("p cnf 2 1\n1 2 0\n"),
            Err(CnfError::Arity { clause: 1, got: 2 })
        );
        assert!(matches!(
            CnfFormula::parse("p cnf 2 1\n1 2 3 0\n"),
            Err(CnfError::OutOfRange { literal: 3, .. })
        ));
        assert_eq!(CnfFormula::parse("1 2 3 0\n"), Err(CnfError::MissingHeader));
        assert!(matches!(
            CnfFormula::parse("p dnf 1 1\n"),
            Err(CnfError::Syntax { .. })
        ));
        assert!(matches!(
            CnfFormula::parse("p cnf 1 2\n1 1 1 0\n"),
            Err(CnfError::ClauseCount {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn truth_tables() {
        let f = CnfFormula::new(1, vec![[1, 1, 1]]).unwrap();
        assert_eq!(f.satisfying_assignments(), vec![vec![true]]);
        let f = CnfFormula::new(1, vec![[1, 1, 1], [-1, -1, -1]]).unwrap();
        assert!(!f.is_satisfiable());
        let f = CnfFormula::new(2, vec![[1, 2, 2]]).unwrap();
        assert_eq!(f.satisfying_assignments().len(), 3);
    }
}
