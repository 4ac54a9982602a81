//! The four generated grammars: abstract word grammar, its tree grammar, the
//! concrete (parenthesized, mark-respecting) word grammar, and its tree grammar.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::grammar::{LanguageDefinition, NtRef, Rhs};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    T(String),
    N(String),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::T(t) => write!(f, "'{t}'"),
            Symbol::N(n) => f.write_str(n),
        }
    }
}

/// Where a generated CFG production came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Label(String),
    /// Helper introduced by the regex translation (alternation or star).
    Helper,
    Grouping,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CfgProduction {
    pub lhs: String,
    pub rhs: Vec<Symbol>,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    pub start: String,
    pub nonterminals: Vec<String>,
    pub terminals: Vec<String>,
    pub productions: Vec<CfgProduction>,
}

impl Cfg {
    pub fn productions_of<'a>(
        &'a self,
        lhs: &'a str,
    ) -> impl Iterator<Item = &'a CfgProduction> + 'a {
        self.productions.iter().filter(move |p| p.lhs == lhs)
    }

    /// Helper non-terminals (those with only helper productions).
    pub fn helpers(&self) -> BTreeSet<&str> {
        self.productions
            .iter()
            .filter(|p| p.origin == Origin::Helper)
            .map(|p| p.lhs.as_str())
            .collect()
    }
}

impl fmt::Display for Cfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .nonterminals
            .iter()
            .map(|n| n.chars().count())
            .max()
            .unwrap_or(0);
        for nt in &self.nonterminals {
            for p in self.productions_of(nt) {
                let rhs: Vec<String> = p.rhs.iter().map(ToString::to_string).collect();
                let rhs = if rhs.is_empty() {
                    "ε".to_string()
                } else {
                    rhs.join(" ")
                };
                writeln!(f, "{:<width$} -> {rhs}", p.lhs)?;
            }
        }
        Ok(())
    }
}

/// Unranked tree grammar: productions `N -> label(horizontal regex)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeGrammar {
    pub start: String,
    pub nonterminals: Vec<String>,
    pub leaf_terminals: Vec<String>,
    pub node_terminals: Vec<String>,
    pub productions: Vec<(String, String, Rhs)>,
}

impl fmt::Display for TreeGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .nonterminals
            .iter()
            .map(|n| n.chars().count())
            .max()
            .unwrap_or(0);
        for (lhs, label, rhs) in &self.productions {
            writeln!(f, "{lhs:<width$} -> {label}( {rhs} )")?;
        }
        Ok(())
    }
}

/// Label used for grouping nodes in the concrete tree grammar.
pub const GROUP_LABEL: &str = "g";

/// Name of the concrete non-terminal for `nt` under `mark`.
pub fn marked_name(nt: &str, mark: &BTreeSet<String>) -> String {
    if mark.is_empty() {
        nt.to_string()
    } else {
        let labels: Vec<&str> = mark.iter().map(String::as_str).collect();
        format!("{nt}{{{}}}", labels.join(","))
    }
}

struct Translator<'a> {
    label: &'a str,
    counter: usize,
    out: Vec<CfgProduction>,
    rename: &'a dyn Fn(&NtRef) -> String,
}

impl Translator<'_> {
    fn helper(&mut self) -> String {
        self.counter += 1;
        format!("{}_{}", self.label, self.counter)
    }

    fn translate(&mut self, r: &Rhs) -> Vec<Symbol> {
        match r {
            Rhs::Terminal(t) => vec![Symbol::T(t.clone())],
            Rhs::NonTerminal(n) => vec![Symbol::N((self.rename)(n))],
            Rhs::Epsilon => vec![],
            Rhs::Seq(xs) => xs.iter().flat_map(|x| self.translate(x)).collect(),
            Rhs::Alt(xs) => {
                let h = self.helper();
                for x in xs {
                    let rhs = self.translate(x);
                    self.out.push(CfgProduction {
                        lhs: h.clone(),
                        rhs,
                        origin: Origin::Helper,
                    });
                }
                vec![Symbol::N(h)]
            }
            Rhs::Star(x) => {
                let h = self.helper();
                self.out.push(CfgProduction {
                    lhs: h.clone(),
                    rhs: vec![],
                    origin: Origin::Helper,
                });
                let mut rhs = self.translate(x);
                rhs.push(Symbol::N(h.clone()));
                self.out.push(CfgProduction {
                    lhs: h.clone(),
                    rhs,
                    origin: Origin::Helper,
                });
                vec![Symbol::N(h)]
            }
        }
    }
}

/// Translates one production body; returns the top-level symbols and helper productions.
fn lower(
    label: &str,
    rhs: &Rhs,
    rename: &dyn Fn(&NtRef) -> String,
) -> (Vec<Symbol>, Vec<CfgProduction>) {
    let mut t = Translator {
        label,
        counter: 0,
        out: Vec::new(),
        rename,
    };
    let top = t.translate(rhs);
    (top, t.out)
}

fn collect_nonterminals(start: &str, prods: &[CfgProduction]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    std::iter::once(start.to_string())
        .chain(prods.iter().map(|p| p.lhs.clone()))
        .filter(|n| seen.insert(n.clone()))
        .collect()
}

fn terminal_names(defn: &LanguageDefinition, include_grouping: bool) -> Vec<String> {
    defn.terminals
        .iter()
        .map(|t| t.name.clone())
        .filter(|t| {
            include_grouping
                || defn
                    .productions
                    .iter()
                    .any(|p| p.rhs.terminals().contains(&t.as_str()))
        })
        .collect()
}

/// `G_D`: marks ignored, regexes lowered with helper non-terminals `<label>_<k>`.
pub fn gen_abstract(defn: &LanguageDefinition) -> Cfg {
    let mut productions = Vec::new();
    let mut helpers = Vec::new();
    let plain = |n: &NtRef| n.name.clone();
    for p in &defn.productions {
        let (top, hs) = lower(&p.label, &p.rhs, &plain);
        productions.push(CfgProduction {
            lhs: p.lhs.clone(),
            rhs: top,
            origin: Origin::Label(p.label.clone()),
        });
        helpers.extend(hs);
    }
    productions.extend(helpers);
    Cfg {
        start: defn.start.clone(),
        nonterminals: collect_nonterminals(&defn.start, &productions),
        terminals: terminal_names(defn, false),
        productions,
    }
}

/// The `(non-terminal, mark)` pairs reachable from the start symbol in the
/// concrete grammar, in discovery order.
pub fn reachable_marked(defn: &LanguageDefinition) -> Vec<(String, BTreeSet<String>)> {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    let mut work = vec![(defn.start.clone(), BTreeSet::new())];
    while let Some(pair) = work.pop() {
        if !seen.insert(pair.clone()) {
            continue;
        }
        order.push(pair.clone());
        let (nt, mark) = &pair;
        let mut next = Vec::new();
        for p in defn.productions_of(nt).filter(|p| !mark.contains(&p.label)) {
            for n in p.rhs.nonterminals() {
                next.push((n.name.clone(), n.mark.clone()));
            }
        }
        if defn.is_grouped(nt) {
            next.push((nt.clone(), BTreeSet::new()));
        }
        next.reverse();
        work.extend(next);
    }
    order
}

/// `G'_D`: one non-terminal per reachable `(N, mark)` pair, each with the
/// productions of `N` not in the mark, plus `N_m -> open N close`.
pub fn gen_concrete(defn: &LanguageDefinition) -> Cfg {
    let pairs = reachable_marked(defn);
    let rename = |n: &NtRef| marked_name(&n.name, &n.mark);
    let mut lowered: BTreeMap<&str, (Vec<Symbol>, Vec<CfgProduction>)> = BTreeMap::new();
    let mut productions = Vec::new();
    let mut helpers = Vec::new();
    for (nt, mark) in &pairs {
        let name = marked_name(nt, mark);
        for p in defn.productions_of(nt).filter(|p| !mark.contains(&p.label)) {
            let entry = lowered.entry(p.label.as_str()).or_insert_with(|| {
                let (top, hs) = lower(&p.label, &p.rhs, &rename);
                helpers.extend(hs.clone());
                (top, hs)
            });
            productions.push(CfgProduction {
                lhs: name.clone(),
                rhs: entry.0.clone(),
                origin: Origin::Label(p.label.clone()),
            });
        }
        if defn.is_grouped(nt) {
            productions.push(CfgProduction {
                lhs: name.clone(),
                rhs: vec![
                    Symbol::T(defn.grouping.open.clone()),
                    Symbol::N(nt.clone()),
                    Symbol::T(defn.grouping.close.clone()),
                ],
                origin: Origin::Grouping,
            });
        }
    }
    productions.extend(helpers);
    Cfg {
        start: defn.start.clone(),
        nonterminals: collect_nonterminals(&defn.start, &productions),
        terminals: terminal_names(defn, true),
        productions,
    }
}

/// `(T_D, T'_D)`.
pub fn gen_tree_grammars(defn: &LanguageDefinition) -> (TreeGrammar, TreeGrammar) {
    let labels: Vec<String> = defn.productions.iter().map(|p| p.label.clone()).collect();
    let abstract_prods: Vec<(String, String, Rhs)> = defn
        .productions
        .iter()
        .map(|p| {
            let mut rhs = p.rhs.clone();
            rhs.strip_marks();
            (p.lhs.clone(), p.label.clone(), rhs)
        })
        .collect();
    let t = TreeGrammar {
        start: defn.start.clone(),
        nonterminals: defn.nonterminals(),
        leaf_terminals: terminal_names(defn, false),
        node_terminals: labels.clone(),
        productions: abstract_prods,
    };

    let mut concrete = Vec::new();
    let mut nts = Vec::new();
    for (nt, mark) in reachable_marked(defn) {
        let name = marked_name(&nt, &mark);
        nts.push(name.clone());
        for p in defn
            .productions_of(&nt)
            .filter(|p| !mark.contains(&p.label))
        {
            let mut rhs = p.rhs.clone();
            rhs.walk_mut(&mut |r| {
                if let Rhs::NonTerminal(n) = r {
                    n.name = marked_name(&n.name, &n.mark);
                    n.mark.clear();
                }
            });
            concrete.push((name.clone(), p.label.clone(), rhs));
        }
        if defn.is_grouped(&nt) {
            concrete.push((
                name.clone(),
                GROUP_LABEL.to_string(),
                Rhs::seq([
                    Rhs::t(defn.grouping.open.clone()),
                    Rhs::nt(nt.clone()),
                    Rhs::t(defn.grouping.close.clone()),
                ]),
            ));
        }
    }
    let mut node_terminals = labels;
    node_terminals.push(GROUP_LABEL.to_string());
    let t_prime = TreeGrammar {
        start: defn.start.clone(),
        nonterminals: nts,
        leaf_terminals: terminal_names(defn, true),
        node_terminals,
        productions: concrete,
    };
    (t, t_prime)
}

/// Plain-text dump of all four grammars.
pub fn dump(defn: &LanguageDefinition) -> String {
    let (t, tp) = gen_tree_grammars(defn);
    format!(
        "T_D:\n{t}\nT'_D:\n{tp}\nG_D:\n{}\nG'_D:\n{}",
        gen_abstract(defn),
        gen_concrete(defn)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::tests::running_example;

    fn lines(c: &Cfg) -> BTreeSet<String> {
        c.productions
            .iter()
            .map(|p| {
                let rhs: Vec<String> = p.rhs.iter().map(ToString::to_string).collect();
                format!("{} -> {}", p.lhs, rhs.join(" "))
            })
            .collect()
    }

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn abstract_grammar_matches_running_example() {
        let g = gen_abstract(&running_example());
        assert_eq!(
            lines(&g),
            set(&[
                "E -> '[' l_1 ']'",
                "E -> E '+' E",
                "E -> E '*' E",
                "E -> 'I'",
                "l_1 -> E l_2",
                "l_1 -> ",
                "l_2 -> ",
                "l_2 -> ';' E l_2",
            ])
        );
    }

    #[test]
    fn concrete_grammar_matches_running_example() {
        let g = gen_concrete(&running_example());
        assert_eq!(
            lines(&g),
            set(&[
                "E -> '[' l_1 ']'",
                "E -> E '+' E",
                "E -> E{a} '*' E{a}",
                "E -> 'I'",
                "E -> '(' E ')'",
                "E{a} -> '[' l_1 ']'",
                "E{a} -> E{a} '*' E{a}",
                "E{a} -> 'I'",
                "E{a} -> '(' E ')'",
                "l_1 -> E l_2",
                "l_1 -> ",
                "l_2 -> ",
                "l_2 -> ';' E l_2",
            ])
        );
    }

    #[test]
    fn single_production() {
        let d = LanguageDefinition::builder("E")
            .token("I", "[0-9]+")
            .production("E", "n", Rhs::t("I"))
            .build();
        assert_eq!(lines(&gen_abstract(&d)), set(&["E -> 'I'"]));
        assert_eq!(
            lines(&gen_concrete(&d)),
            set(&["E -> 'I'", "E -> '(' E ')'"])
        );
    }

    #[test]
    fn static_example_lowering() {
        let d = LanguageDefinition::builder("S")
            .production("S", "a", Rhs::seq([Rhs::nt("E"), Rhs::opt(Rhs::t(";"))]))
            .production("E", "b", Rhs::seq([Rhs::nt("E"), Rhs::t("s")]))
            .production("E", "c", Rhs::t("z"))
            .build();
        assert_eq!(
            lines(&gen_abstract(&d)),
            set(&[
                "S -> E a_1",
                "a_1 -> ';'",
                "a_1 -> ",
                "E -> E 's'",
                "E -> 'z'"
            ])
        );
    }

    #[test]
    fn tree_grammars_have_grouping_only_when_primed() {
        let (t, tp) = gen_tree_grammars(&running_example());
        assert_eq!(t.productions.len(), 4);
        assert_eq!(tp.productions.len(), 9);
        assert!(tp
            .productions
            .iter()
            .any(|(l, lab, _)| l == "E{a}" && lab == "g"));
        assert!(!tp
            .productions
            .iter()
            .any(|(l, lab, _)| l == "E{a}" && lab == "a"));
        assert!(!t.node_terminals.contains(&"g".to_string()));
    }
}
