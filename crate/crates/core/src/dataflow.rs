//! Variable dependency ("comesFrom") graphs and the data-flow match.
//!
//! One item is produced per variable occurrence that either defines the
//! variable or reads it with at least one reaching definition:
//!
//! * parameters and declarations without initializer come from nothing;
//! * declarations with initializer and assignments come from the variable
//!   reads on the right-hand side (compound assignments and `++`/`--` also
//!   from the variable's own reaching definitions);
//! * a read comes from every definition that reaches it, so both arms of a
//!   conditional reach the join and loop bodies are iterated to a fixed point;
//! * reads of variables that were never defined produce nothing.
//!
//! Field and element accesses (`a.b`, `a[i]`) count only the base identifier.
//! Writes through them add a definition without killing earlier ones.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use tree_sitter::Node;

use crate::error::{Error, Result};
use crate::lexer::LanguageId;
use crate::parse::{parse_snippet, ParsedSnippet};

/// Upper bound on loop iterations; reaching sets converge far sooner.
const MAX_LOOP_PASSES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlowItem {
    pub target: String,
    pub sources: Vec<String>,
    /// Byte offset of the target occurrence.
    pub position: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DataFlowGraph {
    items: Vec<FlowItem>,
}

impl DataFlowGraph {
    pub fn from_items(mut items: Vec<FlowItem>) -> Self {
        items.sort_by_key(|i| i.position);
        DataFlowGraph { items }
    }

    pub fn items(&self) -> &[FlowItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl fmt::Display for DataFlowGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            writeln!(f, "{} comesFrom [{}]", item.target, item.sources.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalizedItem {
    pub target: usize,
    pub sources: Vec<usize>,
}

impl fmt::Display for NormalizedItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "var_{} comesFrom [", self.target)?;
        for (i, s) in self.sources.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "var_{s}")?;
        }
        f.write_str("]")
    }
}

/// Triples with names replaced by `var_i`, `i` being the order of first
/// appearance across all items.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalizedDfg {
    items: Vec<NormalizedItem>,
}

impl NormalizedDfg {
    pub fn from_items(items: Vec<NormalizedItem>) -> Self {
        NormalizedDfg { items }
    }

    pub fn items(&self) -> &[NormalizedItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn counts(&self) -> HashMap<&NormalizedItem, usize> {
        let mut map = HashMap::new();
        for item in &self.items {
            *map.entry(item).or_default() += 1;
        }
        map
    }

    /// `sum_item min(self[item], reference[item])`.
    pub fn clipped_against(&self, reference: &NormalizedDfg) -> usize {
        let refs = reference.counts();
        self.counts()
            .into_iter()
            .map(|(item, c)| c.min(refs.get(item).copied().unwrap_or(0)))
            .sum()
    }
}

impl fmt::Display for NormalizedDfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            writeln!(f, "{item}")?;
        }
        Ok(())
    }
}

pub fn normalize(graph: &DataFlowGraph) -> NormalizedDfg {
    let mut items = Vec::with_capacity(graph.items.len());
    let mut table: HashMap<&str, usize> = HashMap::new();
    for item in &graph.items {
        let next = table.len();
        let target = *table.entry(item.target.as_str()).or_insert(next);
        let sources = item
            .sources
            .iter()
            .map(|s| {
                let next = table.len();
                *table.entry(s.as_str()).or_insert(next)
            })
            .collect();
        items.push(NormalizedItem { target, sources });
    }
    NormalizedDfg { items }
}

pub fn extract_dfg(source: &str, lang: LanguageId) -> Result<DataFlowGraph> {
    let parsed = parse_snippet(source, lang)?;
    Ok(dfg_of(&parsed))
}

pub(crate) fn dfg_of(parsed: &ParsedSnippet) -> DataFlowGraph {
    let mut walker = Walker {
        p: parsed,
        vars: HashMap::new(),
        scopes: vec![Vec::new()],
        items: BTreeMap::new(),
        names: HashMap::new(),
    };
    walker.visit(parsed.root());
    let items = walker
        .items
        .iter()
        .map(|(&position, entry)| FlowItem {
            target: entry.name.clone(),
            sources: entry
                .sources
                .iter()
                .map(|p| walker.names[p].clone())
                .collect(),
            position: position.saturating_sub(parsed.start),
        })
        .collect();
    DataFlowGraph { items }
}

/// Clipped item count and reference total for the best-matching reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct DataflowCounts {
    pub clipped: usize,
    pub total: usize,
}

impl DataflowCounts {
    pub fn ratio(self) -> f64 {
        self.clipped as f64 / self.total as f64
    }
}

/// Max over non-empty references; `None` when every reference graph is empty.
pub fn best_match(cand: &NormalizedDfg, refs: &[NormalizedDfg]) -> Option<(f64, DataflowCounts)> {
    refs.iter()
        .filter(|r| !r.is_empty())
        .map(|r| {
            let counts = DataflowCounts {
                clipped: cand.clipped_against(r),
                total: r.len(),
            };
            (counts.ratio(), counts)
        })
        .fold(
            None,
            |best: Option<(f64, DataflowCounts)>, cur| match best {
                Some(b) if b.0 >= cur.0 => Some(b),
                _ => Some(cur),
            },
        )
}

/// Data-flow match, or `None` when no reference has any data flow.
pub fn dataflow_match(cand_src: &str, ref_srcs: &[&str], lang: LanguageId) -> Result<Option<f64>> {
    if ref_srcs.is_empty() {
        return Err(Error::InvalidInput(
            "at least one reference is required".into(),
        ));
    }
    let cand = normalize(&extract_dfg(cand_src, lang)?);
    let refs = ref_srcs
        .iter()
        .map(|r| extract_dfg(r, lang).map(|g| normalize(&g)))
        .collect::<Result<Vec<_>>>()?;
    Ok(best_match(&cand, &refs).map(|(r, _)| r))
}

type Env = HashMap<String, BTreeSet<usize>>;

struct Entry {
    name: String,
    sources: BTreeSet<usize>,
}

struct Walker<'t> {
    p: &'t ParsedSnippet,
    /// Reaching definitions (byte offsets) per variable name.
    vars: Env,
    /// Per scope, names declared in it with the binding they shadowed.
    scopes: Vec<Vec<(String, Option<BTreeSet<usize>>)>>,
    items: BTreeMap<usize, Entry>,
    /// Name at every recorded definition or read offset.
    names: HashMap<usize, String>,
}

const SKIPPED_FIELDS: &[&str] = &[
    "name",
    "type",
    "returns",
    "field",
    "type_arguments",
    "type_parameters",
    "dimensions",
];

const SKIPPED_KINDS: &[&str] = &[
    // Java
    "type_identifier",
    "generic_type",
    "scoped_type_identifier",
    "integral_type",
    "floating_point_type",
    "boolean_type",
    "void_type",
    "array_type",
    "annotation",
    "marker_annotation",
    "package_declaration",
    "import_declaration",
    "scoped_identifier",
    "method_reference",
    // C#
    "predefined_type",
    "implicit_type",
    "generic_name",
    "qualified_name",
    "nullable_type",
    "pointer_type",
    "type_argument_list",
    "type_parameter_list",
    "attribute_list",
    "using_directive",
    "base_list",
    // both
    "line_comment",
    "block_comment",
    "comment",
];

/// Parents whose identifier children are labels or names, never variables.
const NON_VARIABLE_PARENTS: &[&str] = &[
    "labeled_statement",
    "break_statement",
    "continue_statement",
    "goto_statement",
    "enum_constant",
    "element_value_pair",
    "name_equals",
    "name_colon",
];

fn merge(into: &mut Env, other: &Env) {
    for (name, defs) in other {
        into.entry(name.clone())
            .or_default()
            .extend(defs.iter().copied());
    }
}

impl<'t> Walker<'t> {
    fn text(&self, node: Node<'_>) -> String {
        self.p.node_text(node).to_string()
    }

    fn push_scope(&mut self) {
        self.scopes.push(Vec::new());
    }

    fn pop_scope(&mut self) {
        if let Some(scope) = self.scopes.pop() {
            for (name, prev) in scope.into_iter().rev() {
                match prev {
                    Some(defs) => {
                        self.vars.insert(name, defs);
                    }
                    None => {
                        self.vars.remove(&name);
                    }
                }
            }
        }
    }

    fn scoped(&mut self, f: impl FnOnce(&mut Self)) {
        self.push_scope();
        f(self);
        self.pop_scope();
    }

    fn add_item(&mut self, pos: usize, name: &str, sources: impl IntoIterator<Item = usize>) {
        self.names.insert(pos, name.to_string());
        self.items
            .entry(pos)
            .or_insert_with(|| Entry {
                name: name.to_string(),
                sources: BTreeSet::new(),
            })
            .sources
            .extend(sources);
    }

    /// Introduces `name_node` in the current scope, defined by `sources`.
    fn declare(&mut self, name_node: Node<'_>, sources: Vec<usize>) {
        if name_node.kind() != "identifier" && name_node.kind() != "implicit_parameter" {
            return;
        }
        let name = self.text(name_node);
        let pos = name_node.start_byte();
        let prev = self.vars.insert(name.clone(), BTreeSet::from([pos]));
        if let Some(scope) = self.scopes.last_mut() {
            if !scope.iter().any(|(n, _)| n == &name) {
                scope.push((name.clone(), prev));
            }
        }
        self.add_item(pos, &name, sources);
    }

    /// Overwrites `name` (kill and gen) at `pos`.
    fn assign(&mut self, name: &str, pos: usize, sources: Vec<usize>) {
        self.add_item(pos, name, sources);
        self.vars.insert(name.to_string(), BTreeSet::from([pos]));
    }

    fn reaching(&self, name: &str) -> Vec<usize> {
        self.vars
            .get(name)
            .map(|d| d.iter().copied().collect())
            .unwrap_or_default()
    }

    fn read(&mut self, ident: Node<'_>) -> Option<usize> {
        let name = self.text(ident);
        let defs = self.reaching(&name);
        if defs.is_empty() {
            return None;
        }
        let pos = ident.start_byte();
        self.add_item(pos, &name, defs);
        Some(pos)
    }

    fn field<'a>(&self, node: Node<'a>, field: &str) -> Option<Node<'a>> {
        node.child_by_field_name(field)
    }

    fn fields<'a>(&self, node: Node<'a>, field: &str) -> Vec<Node<'a>> {
        let mut cursor = node.walk();
        node.children_by_field_name(field, &mut cursor).collect()
    }

    fn visit_opt(&mut self, node: Option<Node<'_>>) -> Vec<usize> {
        node.map(|n| self.visit(n)).unwrap_or_default()
    }

    fn visit_children(&mut self, node: Node<'_>) -> Vec<usize> {
        let mut reads = Vec::new();
        for i in 0..node.child_count() {
            if let Some(f) = node.field_name_for_child(i) {
                if SKIPPED_FIELDS.contains(&f) {
                    continue;
                }
            }
            if let Some(child) = node.child(i) {
                reads.extend(self.visit(child));
            }
        }
        reads
    }

    fn is_variable(&self, ident: Node<'_>) -> bool {
        match ident.parent() {
            Some(parent) => !NON_VARIABLE_PARENTS.contains(&parent.kind()),
            None => true,
        }
    }

    /// Visits `node`, returning the offsets of resolvable variable reads whose
    /// values flow into its result.
    fn visit(&mut self, node: Node<'_>) -> Vec<usize> {
        let kind = node.kind();
        if SKIPPED_KINDS.contains(&kind) {
            return Vec::new();
        }
        match kind {
            "identifier" => {
                if self.is_variable(node) {
                    self.read(node).into_iter().collect()
                } else {
                    Vec::new()
                }
            }
            "implicit_parameter" => {
                self.declare(node, Vec::new());
                Vec::new()
            }
            "block"
            | "constructor_body"
            | "class_body"
            | "declaration_list"
            | "method_declaration"
            | "constructor_declaration"
            | "local_function_statement"
            | "catch_clause"
            | "class_declaration"
            | "interface_declaration"
            | "struct_declaration"
            | "record_declaration"
            | "enum_declaration"
            | "anonymous_method_expression" => {
                self.scoped(|w| {
                    w.visit_children(node);
                });
                Vec::new()
            }
            "lambda_expression" => {
                let mut reads = Vec::new();
                self.scoped(|w| {
                    if let Some(params) = w.field(node, "parameters") {
                        if params.kind() == "identifier" {
                            w.declare(params, Vec::new());
                        } else {
                            w.visit(params);
                        }
                    }
                    reads = w.visit_opt(w.field(node, "body"));
                });
                reads
            }
            "inferred_parameters" => {
                let mut cursor = node.walk();
                let idents: Vec<_> = node
                    .named_children(&mut cursor)
                    .filter(|c| c.kind() == "identifier")
                    .collect();
                for ident in idents {
                    self.declare(ident, Vec::new());
                }
                Vec::new()
            }
            "formal_parameter"
            | "catch_formal_parameter"
            | "parameter"
            | "catch_declaration"
            | "declaration_expression"
            | "declaration_pattern" => {
                // C# parameters may carry a default value.
                self.visit_children(node);
                if let Some(name) = self.field(node, "name") {
                    self.declare(name, Vec::new());
                }
                Vec::new()
            }
            "type_pattern" => {
                let mut cursor = node.walk();
                let ident = node
                    .named_children(&mut cursor)
                    .filter(|c| c.kind() == "identifier")
                    .last();
                if let Some(ident) = ident {
                    self.declare(ident, Vec::new());
                }
                Vec::new()
            }
            "variable_declarator" | "resource" => {
                let init = match self.p.lang {
                    LanguageId::Java => self.field(node, "value"),
                    LanguageId::CSharp => initializer_after_eq(node),
                };
                let sources = self.visit_opt(init);
                if let Some(name) = self.field(node, "name") {
                    self.declare(name, sources);
                } else if kind == "resource" {
                    self.visit_children(node);
                }
                Vec::new()
            }
            "assignment_expression" => self.visit_assignment(node),
            "update_expression" => self.visit_update(node),
            "prefix_unary_expression" | "postfix_unary_expression" => {
                if has_token(node, &["++", "--"]) {
                    self.visit_update(node)
                } else {
                    self.visit_children(node)
                }
            }
            "if_statement" => {
                self.visit_opt(self.field(node, "condition"));
                let consequence = self.field(node, "consequence");
                let alternative = self.field(node, "alternative");
                self.branches(&[consequence, alternative], false);
                Vec::new()
            }
            "ternary_expression" | "conditional_expression" => {
                let mut reads = self.visit_opt(self.field(node, "condition"));
                let consequence = self.field(node, "consequence");
                let alternative = self.field(node, "alternative");
                reads.extend(self.branches(&[consequence, alternative], false));
                reads
            }
            "while_statement" => {
                let cond = self.field(node, "condition");
                let body = self.field(node, "body");
                self.run_loop(true, |w| {
                    w.visit_opt(cond);
                    w.visit_opt(body);
                });
                Vec::new()
            }
            "do_statement" => {
                let cond = self.field(node, "condition");
                let body = self.field(node, "body");
                self.run_loop(false, |w| {
                    w.visit_opt(body);
                    w.visit_opt(cond);
                });
                Vec::new()
            }
            "for_statement" => {
                let (init_field, cond, body) = match self.p.lang {
                    LanguageId::Java => (
                        "init",
                        self.field(node, "condition"),
                        self.field(node, "body"),
                    ),
                    LanguageId::CSharp => (
                        "initializer",
                        self.field(node, "condition"),
                        self.field(node, "body"),
                    ),
                };
                let inits = self.fields(node, init_field);
                let updates = self.fields(node, "update");
                self.scoped(|w| {
                    for init in inits {
                        w.visit(init);
                    }
                    w.run_loop(true, |w| {
                        w.visit_opt(cond);
                        w.visit_opt(body);
                        for update in &updates {
                            w.visit(*update);
                        }
                    });
                });
                Vec::new()
            }
            "enhanced_for_statement" | "foreach_statement" => {
                let (name_field, value_field) = match kind {
                    "enhanced_for_statement" => ("name", "value"),
                    _ => ("left", "right"),
                };
                let name = self.field(node, name_field);
                let value = self.field(node, value_field);
                let body = self.field(node, "body");
                self.scoped(|w| {
                    let sources = w.visit_opt(value);
                    w.run_loop(true, |w| {
                        if let Some(name) = name {
                            w.declare(name, sources.clone());
                        }
                        w.visit_opt(body);
                    });
                });
                Vec::new()
            }
            "switch_expression" | "switch_statement" => {
                let subject = match self.p.lang {
                    LanguageId::Java => self.field(node, "condition"),
                    LanguageId::CSharp => self.field(node, "value"),
                };
                let mut reads = self.visit_opt(subject);
                if let Some(body) = self.field(node, "body") {
                    let mut cursor = body.walk();
                    let arms: Vec<_> = body.named_children(&mut cursor).map(Some).collect();
                    self.scoped(|w| {
                        reads.extend(w.branches(&arms, true));
                    });
                }
                reads
            }
            "try_statement" | "try_with_resources_statement" => {
                self.visit_try(node);
                Vec::new()
            }
            "instanceof_expression" => {
                let reads = self.visit_opt(self.field(node, "left"));
                if let Some(name) = self.field(node, "name") {
                    self.declare(name, Vec::new());
                } else if let Some(pattern) = self.field(node, "pattern") {
                    self.visit(pattern);
                }
                reads
            }
            _ => self.visit_children(node),
        }
    }

    fn visit_assignment(&mut self, node: Node<'_>) -> Vec<usize> {
        let compound = self
            .field(node, "operator")
            .is_some_and(|op| self.p.node_text(op) != "=");
        let mut sources = self.visit_opt(self.field(node, "right"));
        let Some(left) = self.field(node, "left") else {
            return Vec::new();
        };
        if left.kind() == "identifier" {
            let name = self.text(left);
            if compound {
                sources.extend(self.reaching(&name));
            }
            let pos = left.start_byte();
            self.assign(&name, pos, sources);
            return vec![pos];
        }
        // Writes through a field or element: index expressions are reads,
        // the base identifier gains a definition.
        let mut base = None;
        let mut cur = left;
        loop {
            let next = cur
                .child_by_field_name("object")
                .or_else(|| cur.child_by_field_name("array"))
                .or_else(|| cur.child_by_field_name("expression"));
            for field in ["index", "subscript"] {
                if let Some(idx) = cur.child_by_field_name(field) {
                    self.visit(idx);
                }
            }
            match next {
                Some(n) if n.kind() == "identifier" => {
                    base = Some(n);
                    break;
                }
                Some(n) => cur = n,
                None => break,
            }
        }
        if let Some(base) = base {
            let name = self.text(base);
            if compound {
                sources.extend(self.reaching(&name));
            }
            let pos = base.start_byte();
            self.add_item(pos, &name, sources);
            self.vars.entry(name).or_default().insert(pos);
        }
        Vec::new()
    }

    fn visit_update(&mut self, node: Node<'_>) -> Vec<usize> {
        let mut cursor = node.walk();
        let operand = node.named_children(&mut cursor).next();
        match operand {
            Some(ident) if ident.kind() == "identifier" => {
                let name = self.text(ident);
                let defs = self.reaching(&name);
                let pos = ident.start_byte();
                self.assign(&name, pos, defs);
                vec![pos]
            }
            _ => self.visit_children(node),
        }
    }

    /// Runs each arm from the current environment and joins the results.
    /// With `may_skip`, the entry environment also reaches the join.
    fn branches(&mut self, arms: &[Option<Node<'_>>], may_skip: bool) -> Vec<usize> {
        let entry = self.vars.clone();
        let mut joined: Option<Env> = may_skip.then(|| entry.clone());
        let mut reads = Vec::new();
        // A missing arm (`if` without `else`) leaves the entry state unchanged.
        for arm in arms {
            self.vars = entry.clone();
            if let Some(n) = arm {
                reads.extend(self.visit(*n));
            }
            match joined.as_mut() {
                Some(j) => merge(j, &self.vars),
                None => joined = Some(self.vars.clone()),
            }
        }
        self.vars = joined.unwrap_or(entry);
        reads
    }

    fn run_loop(&mut self, exit_at_head: bool, mut step: impl FnMut(&mut Self)) {
        let entry = self.vars.clone();
        let mut head = entry.clone();
        for _ in 0..MAX_LOOP_PASSES {
            self.vars = head.clone();
            step(self);
            let mut next = head.clone();
            merge(&mut next, &self.vars);
            if next == head {
                break;
            }
            head = next;
        }
        if exit_at_head {
            self.vars = head;
        }
    }

    fn visit_try(&mut self, node: Node<'_>) {
        self.scoped(|w| {
            if let Some(resources) = w.field(node, "resources") {
                w.visit(resources);
            }
            let entry = w.vars.clone();
            w.visit_opt(w.field(node, "body"));
            let mut after_body = w.vars.clone();
            let mut handler_entry = entry;
            merge(&mut handler_entry, &after_body);
            let mut cursor = node.walk();
            let clauses: Vec<_> = node.named_children(&mut cursor).collect();
            let mut finally = None;
            for clause in clauses {
                match clause.kind() {
                    "catch_clause" => {
                        w.vars = handler_entry.clone();
                        w.visit(clause);
                        merge(&mut after_body, &w.vars);
                    }
                    "finally_clause" => finally = Some(clause),
                    _ => {}
                }
            }
            w.vars = after_body;
            w.visit_opt(finally);
        });
    }
}

fn has_token(node: Node<'_>, tokens: &[&str]) -> bool {
    let mut cursor = node.walk();
    let found = node
        .children(&mut cursor)
        .any(|c| !c.is_named() && tokens.contains(&c.kind()));
    found
}

/// C# declarators hold their initializer as the named child after `=`.
fn initializer_after_eq(node: Node<'_>) -> Option<Node<'_>> {
    let mut cursor = node.walk();
    let mut seen_eq = false;
    for child in node.children(&mut cursor) {
        if seen_eq && child.is_named() {
            return Some(child);
        }
        if !child.is_named() && child.kind() == "=" {
            seen_eq = true;
        }
    }
    None
}
