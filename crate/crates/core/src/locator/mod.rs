//! Login-screen locator over an abstract app model.
//!
//! Android apps name their authentication screens inconsistently, so plain
//! keyword matching misses them. This module instead searches an app's
//! call-dependency structure: it parses a declarative [`AppModel`] file,
//! builds one [`DependencyGraph`] per activity ([`build_dependency_graphs`]),
//! and runs a feedback-driven loop ([`locate_login`]) that mutates a
//! [`TestActivity`] — seeded from a list of known authentication-flow
//! [`Candidate`]s — until some activity graph embeds it
//! ([`match_graph`]). Name similarity is measured by longest-common-substring
//! length ([`lcs_len`]). [`find_sms_widgets`] separately flags the
//! EditText/Button widgets whose text suggests an SMS code entry screen.


use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prng::{GeneratorState, PrngSpec};

/// Search iterations before a model is declared login-free.
pub const DEFAULT_MAX_ITERATIONS: u32 = 1000;

/// Two names count as similar when their longest common substring covers at
/// least this fraction of the shorter name.
pub const DEFAULT_LCS_THRESH: f64 = 0.5;

/// Utility calls stripped from dependency graphs: they appear everywhere and
/// carry no intent.
pub const DEFAULT_REDUNDANT: &[&str] = &["nextLine", "toString", "printStackTrace"];

/// Widget-text keywords that suggest an SMS code entry screen.
pub const DEFAULT_WIDGET_KEYWORDS: &[&str] = &["sms", "mobilephone", "verification", "otp", "code"];

/// Errors from model/candidate parsing and locator configuration.
#[derive(Debug, Error)]
pub enum LocatorError {
    /// The model file is not well-formed JSON.
    #[error("model syntax: {message}")]
    Syntax { line: usize, message: String },
    /// The model file parsed but breaks a structural rule.
    #[error("model line {line}: {message}")]
    Schema { line: usize, message: String },
    /// A line of the candidate file could not be parsed.
    #[error("candidates line {line}: {message}")]
    BadCandidate { line: usize, message: String },
    /// The candidate list is empty.
    #[error("no candidates provided")]
    NoCandidates,
    #[error("locator config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

// --- app model ---

/// Widget classes that matter for SMS-login detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WidgetType {
    EditText,
    Button,
    #[serde(rename = "other")]
    Other,
}

/// One UI widget; `layout` names the activity whose screen hosts it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Widget {
    #[serde(rename = "type")]
    pub widget_type: WidgetType,
    pub text: String,
    pub layout: String,
}

/// An activity and the methods declared on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Activity {
    pub name: String,
    #[serde(default)]
    pub methods: Vec<String>,
}

/// A method body: its argument names and the functions it invokes, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodDef {
    pub name: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default)]
    pub invokes: Vec<String>,
}

/// Declarative description of one app: activities, method bodies, extra
/// caller→callee edges, and UI widgets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppModel {
    #[serde(default)]
    pub activities: Vec<Activity>,
    #[serde(default)]
    pub methods: Vec<MethodDef>,
    #[serde(default, rename = "edges")]
    pub call_edges: Vec<(String, String)>,
    #[serde(default)]
    pub widgets: Vec<Widget>,
}

impl AppModel {
    fn method(&self, name: &str) -> Option<&MethodDef> {
        self.methods.iter().find(|m| m.name == name)
    }
}

/// 1-based line of the `occurrence`-th appearance of `token` (quoted) in
/// `text`. The token was parsed out of `text`, so it is always found.
fn line_of(text: &str, token: &str, occurrence: usize) -> usize {
    let needle = format!("\"{token}\"");
    let mut from = 0;
    let mut seen = 0;
    while let Some(pos) = text[from..].find(&needle) {
        let at = from + pos;
        seen += 1;
        if seen == occurrence {
            return text[..at].bytes().filter(|&b| b == b'\n').count() + 1;
        }
        from = at + 1;
    }
    1
}

fn schema_err(text: &str, token: &str, occurrence: usize, message: String) -> LocatorError {
    LocatorError::Schema {
        line: line_of(text, token, occurrence),
        message,
    }
}

/// Parses and validates an app-model file.
///
/// Structural rules: activity and method names are unique and non-empty;
/// activity method lists must reference declared methods; both ends of an
/// edge must be known names — declared methods or external functions that
/// some method body invokes — so an edge cannot dangle on a name the model
/// never mentions; widget layouts must name a declared activity.
pub fn parse_app_model(text: &str) -> Result<AppModel, LocatorError> {
    let model: AppModel = serde_json::from_str(text).map_err(|e| LocatorError::Syntax {
        line: e.line(),
        message: e.to_string(),
    })?;

    let mut activity_names = BTreeSet::new();
    for activity in &model.activities {
        if activity.name.is_empty() {
            return Err(schema_err(text, "", 1, "empty activity name".into()));
        }
        if !activity_names.insert(activity.name.as_str()) {
            return Err(schema_err(
                text,
                &activity.name,
                2,
                format!("duplicate activity name {:?}", activity.name),
            ));
        }
    }
    let mut method_names = BTreeSet::new();
    for method in &model.methods {
        if method.name.is_empty() {
            return Err(schema_err(text, "", 1, "empty method name".into()));
        }
        if !method_names.insert(method.name.as_str()) {
            return Err(schema_err(
                text,
                &method.name,
                2,
                format!("duplicate method name {:?}", method.name),
            ));
        }
    }
    for activity in &model.activities {
        for m in &activity.methods {
            if !method_names.contains(m.as_str()) {
                return Err(schema_err(
                    text,
                    m,
                    1,
                    format!(
                        "activity {:?} lists undeclared method {m:?}",
                        activity.name
                    ),
                ));
            }
        }
    }
    let known_names: BTreeSet<&str> = method_names
        .iter()
        .copied()
        .chain(model.methods.iter().flat_map(|m| m.invokes.iter().map(String::as_str)))
        .collect();
    for (caller, callee) in &model.call_edges {
        for end in [caller, callee] {
            if !known_names.contains(end.as_str()) {
                return Err(schema_err(
                    text,
                    end,
                    1,
                    format!("dangling edge: {end:?} is neither declared nor invoked anywhere"),
                ));
            }
        }
    }
    for widget in &model.widgets {
        if !activity_names.contains(widget.layout.as_str()) {
            return Err(schema_err(
                text,
                &widget.layout,
                1,
                format!("widget layout {:?} names no declared activity", widget.layout),
            ));
        }
    }
    Ok(model)
}

/// Reads and parses an app-model file from disk.
pub fn load_app_model(path: impl AsRef<Path>) -> Result<AppModel, LocatorError> {
    parse_app_model(&std::fs::read_to_string(path)?)
}

// --- candidates ---

/// A known authentication flow: a method name and the functions it invokes,
/// optionally with the arguments it takes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
    #[serde(default)]
    pub args: Vec<String>,
    pub functions: Vec<String>,
}

/// Parses a candidate file: one flow per line as `name: fn1,fn2,…` or
/// `name(arg1,arg2): fn1,fn2,…`; blank lines and `#` comments are skipped.
pub fn parse_candidates(text: &str) -> Result<Vec<Candidate>, LocatorError> {
    let bad = |line: usize, message: String| LocatorError::BadCandidate { line, message };
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, tail) = line
            .split_once(':')
            .ok_or_else(|| bad(line_no, "expected `name: fn1,fn2,…`".into()))?;
        let head = head.trim();
        let (name, args) = match head.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| bad(line_no, "unclosed `(` in candidate name".into()))?;
                let args: Vec<String> = inner
                    .split(',')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .map(String::from)
                    .collect();
                (name.trim(), args)
            }
            None => (head, Vec::new()),
        };
        if name.is_empty() {
            return Err(bad(line_no, "empty candidate name".into()));
        }
        let functions: Vec<String> = tail
            .split(',')
            .map(str::trim)
            .map(String::from)
            .collect();
        if functions.is_empty() || functions.iter().any(String::is_empty) {
            return Err(bad(line_no, "candidate needs a non-empty function list".into()));
        }
        out.push(Candidate {
            name: name.to_string(),
            args,
            functions,
        });
    }
    Ok(out)
}

/// Reads and parses a candidate file from disk.
pub fn load_candidates(path: impl AsRef<Path>) -> Result<Vec<Candidate>, LocatorError> {
    parse_candidates(&std::fs::read_to_string(path)?)
}

// --- test activity ---

/// The probe the locator mutates: a name, argument names, and an ordered
/// function sequence that a login screen is expected to exhibit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TestActivity {
    pub name: String,
    pub args: Vec<String>,
    pub functions: Vec<String>,
}

impl TestActivity {
    pub fn from_candidate(candidate: &Candidate) -> Self {
        TestActivity {
            name: candidate.name.clone(),
            args: candidate.args.clone(),
            functions: candidate.functions.clone(),
        }
    }
}

// --- dependency graphs ---

/// Caller→callee dependency graph of one activity. `nodes` keeps
/// first-appearance order, which every search below iterates in, making all
/// results deterministic.
#[derive(Debug, Clone)]
pub struct DependencyGraph {
    pub activity: String,
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
    index: BTreeMap<String, usize>,
    /// reach[i][j]: a directed path of length ≥ 1 leads from node i to j.
    reach: Vec<Vec<bool>>,
}

impl DependencyGraph {
    /// Builds a graph from explicit parts; edge endpoints must be listed in
    /// `nodes` and node names must be unique.
    pub fn from_parts(
        activity: impl Into<String>,
        nodes: Vec<String>,
        edges: Vec<(String, String)>,
    ) -> Self {
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            let previous = index.insert(n.clone(), i);
            assert!(previous.is_none(), "duplicate node {n:?}");
        }
        for (a, b) in &edges {
            assert!(index.contains_key(a), "edge endpoint {a:?} is not a node");
            assert!(index.contains_key(b), "edge endpoint {b:?} is not a node");
        }
        let reach = reachability(nodes.len(), &edges, &index);
        DependencyGraph {
            activity: activity.into(),
            nodes,
            edges,
            index,
            reach,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges.iter().any(|(a, b)| a == from && b == to)
    }

    /// True when a directed path of one or more edges leads `from` → `to`.
    pub fn has_path(&self, from: &str, to: &str) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&i), Some(&j)) => self.reach[i][j],
            _ => false,
        }
    }
}

fn reachability(
    n: usize,
    edges: &[(String, String)],
    index: &BTreeMap<String, usize>,
) -> Vec<Vec<bool>> {
    let mut adjacency = vec![Vec::new(); n];
    for (a, b) in edges {
        adjacency[index[a]].push(index[b]);
    }
    let mut reach = vec![vec![false; n]; n];
    for (start, row) in reach.iter_mut().enumerate() {
        let mut queue: VecDeque<usize> = adjacency[start].iter().copied().collect();
        while let Some(node) = queue.pop_front() {
            if !row[node] {
                row[node] = true;
                queue.extend(adjacency[node].iter().copied());
            }
        }
    }
    reach
}

/// Builds one dependency graph per activity, in model order.
///
/// Each declared method of the activity is expanded in order: every invoked
/// function becomes a node, and app-defined callees are additionally inlined
/// (their own invocations follow them), so dependencies reach through helper
/// methods. Consecutive survivors of the expansion are joined by
/// caller→callee edges; names on the `redundant` list are dropped entirely,
/// with the sequence closing over the gap. Model-level `edges` entries are
/// merged in when both endpoints already appear in the activity's graph.
pub fn build_dependency_graphs(model: &AppModel, redundant: &[String]) -> Vec<DependencyGraph> {
    let redundant: BTreeSet<&str> = redundant.iter().map(String::as_str).collect();
    model
        .activities
        .iter()
        .map(|activity| {
            let mut sequence: Vec<String> = Vec::new();
            for root in &activity.methods {
                let mut chain: Vec<String> = Vec::new();
                if let Some(def) = model.method(root) {
                    let mut stack = vec![root.as_str()];
                    expand_method(model, def, &redundant, &mut stack, &mut chain);
                }
                // Roots are entry points, not invoked functions: their own
                // names stay out, and separate roots stay unchained.
                if !chain.is_empty() {
                    if !sequence.is_empty() {
                        sequence.push(String::new()); // chain break marker
                    }
                    sequence.append(&mut chain);
                }
            }

            let mut nodes: Vec<String> = Vec::new();
            let mut index: BTreeMap<String, usize> = BTreeMap::new();
            for name in sequence.iter().filter(|n| !n.is_empty()) {
                if !index.contains_key(name) {
                    index.insert(name.clone(), nodes.len());
                    nodes.push(name.clone());
                }
            }
            let mut edges: Vec<(String, String)> = Vec::new();
            let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
            for pair in sequence.windows(2) {
                if pair[0].is_empty() || pair[1].is_empty() || pair[0] == pair[1] {
                    continue;
                }
                if seen.insert((index[&pair[0]], index[&pair[1]])) {
                    edges.push((pair[0].clone(), pair[1].clone()));
                }
            }
            for (caller, callee) in &model.call_edges {
                if let (Some(&a), Some(&b)) = (index.get(caller), index.get(callee)) {
                    if a != b && seen.insert((a, b)) {
                        edges.push((caller.clone(), callee.clone()));
                    }
                }
            }
            let reach = reachability(nodes.len(), &edges, &index);
            DependencyGraph {
                activity: activity.name.clone(),
                nodes,
                edges,
                index,
                reach,
            }
        })
        .collect()
}

fn expand_method<'m>(
    model: &'m AppModel,
    def: &'m MethodDef,
    redundant: &BTreeSet<&str>,
    stack: &mut Vec<&'m str>,
    out: &mut Vec<String>,
) {
    for invoked in &def.invokes {
        if redundant.contains(invoked.as_str()) {
            continue;
        }
        out.push(invoked.clone());
        if let Some(callee) = model.method(invoked) {
            if !stack.contains(&invoked.as_str()) {
                stack.push(invoked);
                expand_method(model, callee, redundant, stack, out);
                stack.pop();
            }
        }
    }
}

// --- name similarity ---

/// Length of the longest common contiguous substring of `a` and `b`,
/// case-insensitive.
pub fn lcs_len(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.to_lowercase().chars().collect();
    let b: Vec<char> = b.to_lowercase().chars().collect();
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut best = 0;
    let mut prev = vec![0usize; b.len() + 1];
    let mut current = vec![0usize; b.len() + 1];
    for ca in &a {
        for (j, cb) in b.iter().enumerate() {
            current[j + 1] = if ca == cb { prev[j] + 1 } else { 0 };
            best = best.max(current[j + 1]);
        }
        std::mem::swap(&mut prev, &mut current);
    }
    best
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Two names are similar when their longest common substring covers at least
/// `thresh` of the shorter name.
fn similar(a: &str, b: &str, thresh: f64) -> bool {
    let shorter = char_len(a).min(char_len(b));
    if shorter == 0 {
        return false;
    }
    lcs_len(a, b) as f64 >= thresh * shorter as f64
}

// --- candidate selection ---

/// Result of picking the reference flow closest to the probe's name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    /// Index into the candidate list.
    pub index: usize,
    /// Longest-common-substring length between the two names.
    pub score: usize,
    /// Set when no candidate shares any substring with the probe's name.
    pub warning: Option<String>,
}

/// Picks the candidate whose name is most similar to the probe's name;
/// ties go to the earliest candidate in file order.
pub fn select_candidate(
    activity: &TestActivity,
    candidates: &[Candidate],
) -> Result<Selection, LocatorError> {
    if candidates.is_empty() {
        return Err(LocatorError::NoCandidates);
    }
    let mut index = 0;
    let mut score = 0;
    for (i, candidate) in candidates.iter().enumerate() {
        let s = lcs_len(&activity.name, &candidate.name);
        if s > score {
            score = s;
            index = i;
        }
    }
    let warning = (score == 0).then(|| {
        format!(
            "no candidate name shares a substring with {:?}; falling back to the first",
            activity.name
        )
    });
    Ok(Selection { index, score, warning })
}

// --- mutation ---

/// Rewrites one function of the probe from the reference flow: a position
/// valid in both sequences is drawn uniformly from `rng` and the reference's
/// function at that position is copied in. Arguments the reference declares
/// but the probe lacks are appended.
pub fn mutate_activity(
    activity: &TestActivity,
    reference: &Candidate,
    rng: &mut GeneratorState,
) -> TestActivity {
    let mut out = activity.clone();
    let valid = activity.functions.len().min(reference.functions.len());
    if valid > 0 {
        let j = rng.next_raw() as usize % valid;
        out.functions[j] = reference.functions[j].clone();
    }
    for arg in &reference.args {
        if !out.args.contains(arg) {
            out.args.push(arg.clone());
        }
    }
    out
}

// --- graph matching ---

/// Looks for an ordered embedding of the probe's function sequence into the
/// graph: node images must be pairwise name-similar to their functions
/// (`thresh` of the shorter name) and each consecutive image pair must be
/// joined by a directed path. Returns the first embedding in node order — the
/// witness — or `None`.
pub fn match_graph(
    graph: &DependencyGraph,
    activity: &TestActivity,
    thresh: f64,
) -> Option<Vec<String>> {
    if activity.functions.is_empty() || graph.is_empty() {
        return None;
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(activity.functions.len());
    if embed(graph, &activity.functions, thresh, &mut chosen) {
        Some(chosen.iter().map(|&i| graph.nodes[i].clone()).collect())
    } else {
        None
    }
}

fn embed(
    graph: &DependencyGraph,
    functions: &[String],
    thresh: f64,
    chosen: &mut Vec<usize>,
) -> bool {
    let depth = chosen.len();
    if depth == functions.len() {
        return true;
    }
    for (i, node) in graph.nodes.iter().enumerate() {
        if !similar(&functions[depth], node, thresh) {
            continue;
        }
        if let Some(&previous) = chosen.last() {
            if !graph.reach[previous][i] {
                continue;
            }
        }
        chosen.push(i);
        if embed(graph, functions, thresh, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

// --- feedback ---

/// Scores the probe against every graph and names the weakest position.
///
/// Per graph, each function is greedily aligned to its best name-similar
/// node at or after the previous alignment (dependency order); unaligned
/// functions score zero. The per-graph score set with the highest total
/// wins, and the index of its lowest-scoring function — earliest on ties —
/// is returned as the position to rewrite next.
pub fn feedback_optimize(
    activity: &TestActivity,
    graphs: &[DependencyGraph],
    thresh: f64,
) -> (usize, Option<String>) {
    if graphs.is_empty() {
        return (0, Some("no activity graphs to score against".to_string()));
    }
    let mut best_scores: Option<Vec<usize>> = None;
    let mut best_total = 0;
    for graph in graphs {
        let mut scores = Vec::with_capacity(activity.functions.len());
        let mut cursor = 0;
        for function in &activity.functions {
            let mut aligned: Option<(usize, usize)> = None; // (node index, score)
            for (i, node) in graph.nodes.iter().enumerate().skip(cursor) {
                if !similar(function, node, thresh) {
                    continue;
                }
                let s = lcs_len(function, node);
                if aligned.map_or(true, |(_, prior)| s > prior) {
                    aligned = Some((i, s));
                }
            }
            match aligned {
                Some((i, s)) => {
                    scores.push(s);
                    cursor = i + 1;
                }
                None => scores.push(0),
            }
        }
        let total: usize = scores.iter().sum();
        if best_scores.is_none() || total > best_total {
            best_total = total;
            best_scores = Some(scores);
        }
    }
    let scores = best_scores.unwrap_or_default();
    let position = scores
        .iter()
        .enumerate()
        .min_by_key(|(_, s)| **s)
        .map(|(i, _)| i)
        .unwrap_or(0);
    (position, None)
}

// --- the search loop ---

/// Locator tuning knobs; [`LocatorConfig::default`] matches the documented
/// defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocatorConfig {
    /// Search iterations before giving up on a model.
    pub max_iterations: u32,
    /// Similarity threshold as a fraction of the shorter name, in (0, 1].
    pub lcs_thresh: f64,
    /// Function names stripped from dependency graphs.
    pub redundant: Vec<String>,
    /// Widget-text keywords for SMS-screen detection.
    pub keywords: Vec<String>,
    /// Seed for candidate choice and mutation (lower 32 bits are used).
    pub seed: u64,
}

impl Default for LocatorConfig {
    fn default() -> Self {
        LocatorConfig {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            lcs_thresh: DEFAULT_LCS_THRESH,
            redundant: DEFAULT_REDUNDANT.iter().map(|s| s.to_string()).collect(),
            keywords: DEFAULT_WIDGET_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            seed: 0,
        }
    }
}

impl LocatorConfig {
    pub fn validate(&self) -> Result<(), LocatorError> {
        if self.max_iterations < 1 {
            return Err(LocatorError::BadConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.lcs_thresh > 0.0 && self.lcs_thresh <= 1.0) {
            return Err(LocatorError::BadConfig(format!(
                "lcs_thresh must be in (0, 1], got {}",
                self.lcs_thresh
            )));
        }
        Ok(())
    }

    fn rng(&self) -> GeneratorState {
        PrngSpec::mt19937(u64::from(self.seed as u32))
            .make_generator()
            .expect("32-bit seeds are always accepted")
    }
}

/// A successful location: which activity matched, the witness embedding, the
/// probe that matched, and the iteration that found it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Located {
    pub activity: String,
    /// Node image of each probe function, in order; consecutive images are
    /// joined by directed paths in the activity's graph.
    pub witness: Vec<String>,
    pub iterations: u32,
    pub test_activity: TestActivity,
}

/// Outcome of a full search over one model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocateOutcome {
    pub located: Option<Located>,
    /// Iterations actually run: the finding iteration, or the cap.
    pub iterations_run: u32,
    pub warnings: Vec<String>,
}

/// Searches a model for a login activity.
///
/// A seeded RNG picks the initial probe from the candidate list; each
/// iteration then re-selects the closest reference flow, mutates one probe
/// position from it, tries to embed the probe into every activity graph, and
/// on failure rewrites the weakest-scoring position the feedback pass names.
/// Identical inputs (model, candidates, config incl. seed) give identical
/// outcomes and iteration counts.
pub fn locate_login(
    model: &AppModel,
    candidates: &[Candidate],
    config: &LocatorConfig,
) -> Result<LocateOutcome, LocatorError> {
    config.validate()?;
    if candidates.is_empty() {
        return Err(LocatorError::NoCandidates);
    }
    let mut rng = config.rng();
    let graphs = build_dependency_graphs(model, &config.redundant);
    let mut warnings: Vec<String> = Vec::new();
    let warn = |warnings: &mut Vec<String>, w: String| {
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    };
    if graphs.is_empty() {
        warn(&mut warnings, "model declares no activities".to_string());
    }

    let initial = rng.next_raw() as usize % candidates.len();
    let mut probe = TestActivity::from_candidate(&candidates[initial]);

    for iteration in 1..=config.max_iterations {
        let selection = select_candidate(&probe, candidates)?;
        if let Some(w) = selection.warning {
            warn(&mut warnings, w);
        }
        let reference = &candidates[selection.index];
        probe = mutate_activity(&probe, reference, &mut rng);

        for graph in &graphs {
            if let Some(witness) = match_graph(graph, &probe, config.lcs_thresh) {
                return Ok(LocateOutcome {
                    located: Some(Located {
                        activity: graph.activity.clone(),
                        witness,
                        iterations: iteration,
                        test_activity: probe,
                    }),
                    iterations_run: iteration,
                    warnings,
                });
            }
        }

        let (position, feedback_warning) = feedback_optimize(&probe, &graphs, config.lcs_thresh);
        if let Some(w) = feedback_warning {
            warn(&mut warnings, w);
        }
        if position < reference.functions.len() {
            probe.functions[position] = reference.functions[position].clone();
        }
    }

    Ok(LocateOutcome {
        located: None,
        iterations_run: config.max_iterations,
        warnings,
    })
}

// --- widget scanning ---

/// One widget whose text contains a keyword.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WidgetMatch {
    pub widget: Widget,
    /// The first keyword (in list order) found in the widget text.
    pub keyword: String,
}

/// Flags every widget whose text contains one of the keywords,
/// case-insensitively, in model order.
pub fn find_sms_widgets(model: &AppModel, keywords: &[String]) -> Vec<WidgetMatch> {
    model
        .widgets
        .iter()
        .filter_map(|widget| {
            let text = widget.text.to_lowercase();
            keywords
                .iter()
                .find(|k| text.contains(&k.to_lowercase()))
                .map(|k| WidgetMatch {
                    widget: widget.clone(),
                    keyword: k.clone(),
                })
        })
        .collect()
}

/// Names the activities that present an SMS code entry screen: at least one
/// EditText whose text matches a keyword, plus at least one Button.
pub fn sms_otp_activities(model: &AppModel, keywords: &[String]) -> Vec<String> {
    let matches = find_sms_widgets(model, keywords);
    model
        .activities
        .iter()
        .filter(|activity| {
            let has_matching_edit = matches.iter().any(|m| {
                m.widget.layout == activity.name && m.widget.widget_type == WidgetType::EditText
            });
            let has_button = model
                .widgets
                .iter()
                .any(|w| w.layout == activity.name && w.widget_type == WidgetType::Button);
            has_matching_edit && has_button
        })
        .map(|activity| activity.name.clone())
        .collect()
}
