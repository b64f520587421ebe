//! Admissibility of a seed: non-intersection (i), non-spiral (ii), the
//! momentum/energy/mass rank test, and the one-dimensional analysis.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::characteristics::{
    cube_points, diff_class_member, resonance_graph, Branch, CharClass, DiffVerdict,
    SiteBox,
};
use crate::error::{Error, Result};
use crate::intlin::{determinant, integer_kernel, mat_vec, solve_linear_diophantine};
use crate::lattice::{conv_power, convolve, linear_solution, ProblemSpec, SiteIndex, SparseSeries};
use crate::symbols::Symbols;

/// Default walk depth for the non-spiral check.
pub const DEFAULT_MAX_DEPTH: usize = 8;
/// Hard cap on automaton states explored per start state.
const MAX_WALK_STATES: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    UnknownAtDepth,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::UnknownAtDepth => "unknown-at-depth",
        })
    }
}

/// A walk through the branch automaton: from `(start_branch, start_j)`, each
/// step `(branch, g)` moves the site `x` to `x - g` on `branch`.
#[derive(Debug, Clone, PartialEq)]
pub struct Walk {
    pub start_branch: Branch,
    pub start_j: Vec<i64>,
    pub steps: Vec<(Branch, SiteIndex)>,
}

impl Walk {
    /// `Σ g`, the displacement between the first and last site.
    pub fn displacement(&self) -> Option<SiteIndex> {
        let mut it = self.steps.iter();
        let (_, first) = it.next()?;
        Some(it.fold(first.clone(), |acc, (_, g)| &acc + g))
    }

    pub fn end_branch(&self) -> Branch {
        self.steps.last().map(|s| s.0).unwrap_or(self.start_branch)
    }
}

impl fmt::Display for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{:?}", self.start_branch, self.start_j)?;
        for (b, g) in &self.steps {
            write!(f, " -[{g}]-> {b:?}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// A site of the error support outside the seed support whose row diagonal vanishes.
    Site { site: SiteIndex, class: CharClass },
    /// A closed walk with displacement `(n, 0)`, `n != 0`.
    Walk(Walk),
    /// Two same-branch vertices of one graph component with equal `j`.
    SpiralPair {
        branch: Branch,
        first: SiteIndex,
        second: SiteIndex,
    },
    /// A pure time shift in `Γ+ ∪ Γ-`.
    TimeShift(SiteIndex),
    /// A connected pair `(j, j + Δj)` outside `{±j_k}` from the given difference.
    NonCubicPair { j: i64, dj: i64, diff: SiteIndex },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Site { site, class } => write!(f, "site {site} on {class:?}"),
            Witness::Walk(w) => write!(f, "walk {w}"),
            Witness::SpiralPair {
                branch,
                first,
                second,
            } => write!(f, "{branch:?} pair {first} ~ {second}"),
            Witness::TimeShift(s) => write!(f, "time shift {s}"),
            Witness::NonCubicPair { j, dj, diff } => {
                write!(f, "pair ({j}, {}) from {diff}", j + dj)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub name: String,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    /// Scale at which the verdict was reached (depth, box, radii).
    pub parameters: Vec<(String, String)>,
    pub notes: Vec<String>,
    /// Sub-checks contributing to the verdict.
    pub parts: Vec<ConditionReport>,
}

impl ConditionReport {
    fn new(name: &str, verdict: Verdict) -> Self {
        Self {
            name: name.to_string(),
            verdict,
            witnesses: Vec::new(),
            parameters: Vec::new(),
            notes: Vec::new(),
            parts: Vec::new(),
        }
    }

    fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.push((key.to_string(), value.to_string()));
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Supports of `(u*v)^{*p}*u` and `(u*v)^{*p}*v`.
pub fn error_support(
    u0: &SparseSeries,
    v0: &SparseSeries,
    p: u32,
) -> Result<(BTreeSet<SiteIndex>, BTreeSet<SiteIndex>)> {
    let w = conv_power(&convolve(u0, v0)?, p)?;
    let fu = convolve(&w, u0)?;
    let fv = convolve(&w, v0)?;
    Ok((
        fu.support().cloned().collect(),
        fv.support().cloned().collect(),
    ))
}

/// Non-intersection: no site of `supp F` outside `S` has a vanishing diagonal
/// on the row it feeds (`U` rows for the `u` component, `V` rows for `v`).
pub fn check_condition_i(spec: &ProblemSpec) -> Result<ConditionReport> {
    let (u0, v0) = linear_solution(spec)?;
    let omega0 = spec.omega0_int();
    let (fu, fv) = error_support(&u0, &v0, spec.p)?;
    let mut report = ConditionReport::new("non-intersection", Verdict::Pass)
        .param("error_support_size", fu.len() + fv.len());
    for (branch, set) in [(Branch::Plus, &fu), (Branch::Minus, &fv)] {
        for s in set {
            if u0.contains(s) || v0.contains(s) {
                continue;
            }
            if branch.sign() * s.n_dot(&omega0) + s.j_sq() == 0 {
                report.verdict = Verdict::Fail;
                report.witnesses.push(Witness::Site {
                    site: s.clone(),
                    class: branch.class(),
                });
            }
        }
    }
    Ok(report)
}

/// Symbol supports restricted to the difference classes of `C`.
///
/// `gpp`/`gmm` restrict `supp (u*v)^{*p}`; `gpm` restricts the `U`-row,
/// `V`-column block `supp (u*v)^{*(p-1)}*u*u`; `gmp` the `V`-row, `U`-column
/// block `supp (u*v)^{*(p-1)}*v*v`. Undecided memberships are kept.
#[derive(Debug, Clone, Default)]
pub struct SymbolSupports {
    pub gpp: BTreeSet<SiteIndex>,
    pub gpm: BTreeSet<SiteIndex>,
    pub gmm: BTreeSet<SiteIndex>,
    pub gmp: BTreeSet<SiteIndex>,
    /// Elements kept only because membership was undecided.
    pub unknown: Vec<(Branch, Branch, SiteIndex)>,
}

impl SymbolSupports {
    pub fn get(&self, from: Branch, to: Branch) -> &BTreeSet<SiteIndex> {
        match (from, to) {
            (Branch::Plus, Branch::Plus) => &self.gpp,
            (Branch::Plus, Branch::Minus) => &self.gpm,
            (Branch::Minus, Branch::Minus) => &self.gmm,
            (Branch::Minus, Branch::Plus) => &self.gmp,
        }
    }

    pub fn get_mut(&mut self, from: Branch, to: Branch) -> &mut BTreeSet<SiteIndex> {
        match (from, to) {
            (Branch::Plus, Branch::Plus) => &mut self.gpp,
            (Branch::Plus, Branch::Minus) => &mut self.gpm,
            (Branch::Minus, Branch::Minus) => &mut self.gmm,
            (Branch::Minus, Branch::Plus) => &mut self.gmp,
        }
    }

    pub fn total(&self) -> usize {
        self.gpp.len() + self.gpm.len() + self.gmm.len() + self.gmp.len()
    }
}

/// `x - y = g` with `x` on the `from` rows and `y` on the `to` rows, where `x`
/// or `y` is a `j = 0` site whose two diagonals both vanish.
fn zero_j_member(g: &SiteIndex, omega0: &[i64], from: Branch, to: Branch) -> bool {
    let dn_w = g.n_dot(omega0);
    let dj2 = g.j_sq();
    // y = (n, 0) with n.ω = 0; x = y + g needs x.n.ω = -σ |Δj|²
    if dn_w == -from.sign() * dj2 {
        return true;
    }
    // x = (n, 0); y = x - g has j = -Δj and y.n.ω = -σ' |Δj|²
    let t = -to.sign() * dj2;
    dn_w == -t && solve_linear_diophantine(omega0, t).is_some()
}

pub fn symbol_supports(spec: &ProblemSpec, search_radius: i64) -> Result<SymbolSupports> {
    let (u0, v0) = linear_solution(spec)?;
    let sym = Symbols::new(&u0, &v0, spec.p)?;
    let omega0 = spec.omega0_int();
    let mut out = SymbolSupports::default();
    for from in [Branch::Plus, Branch::Minus] {
        for to in [Branch::Plus, Branch::Minus] {
            let raw = sym.series(from.comp(), to.comp());
            for g in raw.support() {
                let keep = match diff_class_member(g, &omega0, (from, to), search_radius) {
                    DiffVerdict::Yes { .. } => true,
                    DiffVerdict::Unknown => {
                        out.unknown.push((from, to, g.clone()));
                        true
                    }
                    DiffVerdict::No => zero_j_member(g, &omega0, from, to),
                };
                if keep {
                    out.get_mut(from, to).insert(g.clone());
                }
            }
        }
    }
    Ok(out)
}

/// Whether stepping from `(from, j)` by `g` lands on the `to` branch:
/// `σ|j|² - σ'|j - Δj|² = Δn.ω`.
fn step_allowed(from: Branch, j: &[i64], to: Branch, g: &SiteIndex, omega0: &[i64]) -> bool {
    let j2: i64 = j.iter().map(|x| x * x).sum();
    let y2: i64 = j.iter().zip(&g.j).map(|(a, b)| (a - b).pow(2)).sum();
    to.sign() * y2 - from.sign() * j2 == g.n_dot(omega0)
}

/// Re-checks a walk: every step is supported and allowed, and the walk is a
/// closed loop in `j` and branch with nonzero time displacement.
pub fn verify_walk(walk: &Walk, supports: &SymbolSupports, omega0: &[i64]) -> bool {
    let mut branch = walk.start_branch;
    let mut j = walk.start_j.clone();
    for (to, g) in &walk.steps {
        if !supports.get(branch, *to).contains(g) || !step_allowed(branch, &j, *to, g, omega0) {
            return false;
        }
        j = j.iter().zip(&g.j).map(|(a, b)| a - b).collect();
        branch = *to;
    }
    match walk.displacement() {
        Some(total) => {
            branch == walk.start_branch
                && total.j.iter().all(|&x| x == 0)
                && total.n.iter().any(|&x| x != 0)
        }
        None => false,
    }
}

type State = (Branch, Vec<i64>);

struct Visit {
    /// `n` relative to the start site.
    n: Vec<i64>,
    parent: Option<(State, SiteIndex)>,
    depth: usize,
}

enum WalkOutcome {
    Exhausted,
    Truncated,
    Violation(Walk),
}

fn path_to(visited: &HashMap<State, Visit>, state: &State) -> Vec<(Branch, SiteIndex)> {
    let mut steps = Vec::new();
    let mut cur = state.clone();
    while let Some((prev, g)) = &visited[&cur].parent {
        steps.push((cur.0, g.clone()));
        cur = prev.clone();
    }
    steps.reverse();
    steps
}

fn explore(
    start: &State,
    supports: &SymbolSupports,
    omega0: &[i64],
    max_depth: usize,
    seen: &mut BTreeSet<State>,
) -> WalkOutcome {
    let b = omega0.len();
    let mut visited: HashMap<State, Visit> = HashMap::new();
    visited.insert(
        start.clone(),
        Visit {
            n: vec![0; b],
            parent: None,
            depth: 0,
        },
    );
    let mut queue = VecDeque::from([start.clone()]);
    let mut truncated = false;
    while let Some(state) = queue.pop_front() {
        let (depth, n) = {
            let v = &visited[&state];
            (v.depth, v.n.clone())
        };
        for to in [Branch::Plus, Branch::Minus] {
            for g in supports.get(state.0, to) {
                if to == state.0 && g.is_zero() {
                    continue;
                }
                if !step_allowed(state.0, &state.1, to, g, omega0) {
                    continue;
                }
                let next: State = (to, state.1.iter().zip(&g.j).map(|(a, c)| a - c).collect());
                let next_n: Vec<i64> = n.iter().zip(&g.n).map(|(a, c)| a - c).collect();
                if let Some(prev) = visited.get(&next) {
                    if prev.n != next_n {
                        // two routes to one state: go out along the new route,
                        // come back along the old one reversed
                        let mut steps = path_to(&visited, &state);
                        steps.push((to, g.clone()));
                        let back = path_to(&visited, &next);
                        let mut branch_after = vec![start.0];
                        branch_after.extend(back.iter().map(|s| s.0));
                        for (i, (_, h)) in back.iter().enumerate().rev() {
                            steps.push((branch_after[i], -h));
                        }
                        return WalkOutcome::Violation(Walk {
                            start_branch: start.0,
                            start_j: start.1.clone(),
                            steps,
                        });
                    }
                    continue;
                }
                if depth + 1 > max_depth || visited.len() >= MAX_WALK_STATES {
                    truncated = true;
                    continue;
                }
                visited.insert(
                    next.clone(),
                    Visit {
                        n: next_n,
                        parent: Some((state.clone(), g.clone())),
                        depth: depth + 1,
                    },
                );
                queue.push_back(next);
            }
        }
    }
    if truncated {
        WalkOutcome::Truncated
    } else {
        seen.extend(visited.into_keys());
        WalkOutcome::Exhausted
    }
}

/// Walk check on the branch automaton from every state `(σ, j)`, `|j|_∞ <= j_radius`.
pub fn walk_check(
    supports: &SymbolSupports,
    omega0: &[i64],
    d: usize,
    j_radius: i64,
    max_depth: usize,
) -> ConditionReport {
    let mut report = ConditionReport::new("non-spiral walk", Verdict::Pass)
        .param("max_depth", max_depth)
        .param("start_j_radius", j_radius);
    let mut seen = BTreeSet::new();
    let mut truncated = 0usize;
    let mut starts = 0usize;
    for j in cube_points(d, j_radius) {
        for branch in [Branch::Plus, Branch::Minus] {
            let state = (branch, j.clone());
            if seen.contains(&state) {
                continue;
            }
            let has_step = [Branch::Plus, Branch::Minus].iter().any(|&to| {
                supports.get(branch, to).iter().any(|g| {
                    !(to == branch && g.is_zero()) && step_allowed(branch, &j, to, g, omega0)
                })
            });
            if !has_step {
                continue;
            }
            starts += 1;
            match explore(&state, supports, omega0, max_depth, &mut seen) {
                WalkOutcome::Exhausted => {}
                WalkOutcome::Truncated => truncated += 1,
                WalkOutcome::Violation(w) => {
                    report.verdict = Verdict::Fail;
                    report.witnesses.push(Witness::Walk(w));
                    return report.param("start_states", starts);
                }
            }
        }
    }
    if truncated > 0 {
        report.verdict = Verdict::UnknownAtDepth;
        report
            .notes
            .push(format!("{truncated} start states still growing at depth {max_depth}"));
    }
    report.param("start_states", starts)
}

/// Graph check on the resonance graph of a box.
pub fn graph_check(spec: &ProblemSpec, sbox: SiteBox) -> Result<ConditionReport> {
    let (u0, v0) = linear_solution(spec)?;
    let g = resonance_graph(&u0, &v0, spec, &spec.omega0_int(), sbox)?;
    let mut report = ConditionReport::new("non-spiral graph", Verdict::Pass)
        .param("n_radius", sbox.n_radius)
        .param("j_radius", sbox.j_radius)
        .param("vertices", g.vertices.len())
        .param("max_component", g.max_component_size());
    for c in &g.components {
        if let Some((a, b)) = c.spiral_pair {
            report.verdict = Verdict::Fail;
            report.witnesses.push(Witness::SpiralPair {
                branch: g.vertices[a].branch,
                first: g.vertices[a].site.clone(),
                second: g.vertices[b].site.clone(),
            });
        }
    }
    Ok(report)
}

/// Non-spiral check: walk check on the automaton and graph check on the box.
pub fn check_condition_ii(
    spec: &ProblemSpec,
    max_depth: usize,
    sbox: SiteBox,
    search_radius: i64,
) -> Result<ConditionReport> {
    if max_depth == 0 {
        return Err(Error::InvalidSpec("walk depth M_max must be >= 1".into()));
    }
    let supports = symbol_supports(spec, search_radius)?;
    let omega0 = spec.omega0_int();
    let mut walk = walk_check(&supports, &omega0, spec.d, sbox.j_radius, max_depth);
    if !supports.unknown.is_empty() {
        walk.notes.push(format!(
            "{} symbol elements kept with undecided membership",
            supports.unknown.len()
        ));
    }
    if walk.verdict == Verdict::UnknownAtDepth {
        if let RankVerdict::Pass { .. } = rank_check_momenta(&spec.j_list(), spec.d) {
            walk.verdict = Verdict::Pass;
            walk.notes
                .push("growing walks certified by the momentum/energy/mass rank test".into());
        }
    }
    let graph = graph_check(spec, sbox)?;
    let verdict = if walk.verdict == Verdict::Fail || graph.verdict == Verdict::Fail {
        Verdict::Fail
    } else if walk.verdict == Verdict::UnknownAtDepth {
        Verdict::UnknownAtDepth
    } else {
        Verdict::Pass
    };
    let mut report = ConditionReport::new("non-spiral", verdict)
        .param("max_depth", max_depth)
        .param("search_radius", search_radius);
    report.witnesses = walk
        .witnesses
        .iter()
        .chain(&graph.witnesses)
        .cloned()
        .collect();
    report.parts = vec![walk, graph];
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RankVerdict {
    /// Trivial integer kernel; `det` is reported for square matrices.
    Pass { det: Option<i128> },
    Inconclusive { kernel: Vec<i64> },
}

/// Rows `(1..1)`, the coordinates of the `j_k`, and `|j_k|²`.
pub fn momentum_matrix(j_list: &[Vec<i64>], d: usize) -> Vec<Vec<i64>> {
    let mut m = vec![vec![1; j_list.len()]];
    for c in 0..d {
        m.push(j_list.iter().map(|j| j[c]).collect());
    }
    m.push(j_list.iter().map(|j| j.iter().map(|x| x * x).sum()).collect());
    m
}

pub fn rank_check_momenta(j_list: &[Vec<i64>], d: usize) -> RankVerdict {
    let m = momentum_matrix(j_list, d);
    let b = j_list.len();
    match integer_kernel(&m, b).into_iter().next() {
        Some(kernel) => {
            debug_assert!(mat_vec(&m, &kernel).iter().all(|&x| x == 0));
            RankVerdict::Inconclusive { kernel }
        }
        None => RankVerdict::Pass {
            det: (b == d + 2).then(|| determinant(&m)),
        },
    }
}

/// A connection `(j, j + Δj)` between characteristic sites in one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectedPair {
    pub j: i64,
    pub dj: i64,
    pub diff: SiteIndex,
    /// `true` for `Γ+` (equal branches), `false` for `Γ-`.
    pub same_branch: bool,
    pub cubic_type: bool,
}

/// Integer roots of `a j² + b j + c = 0` (with `a = 0` allowed).
fn integer_roots(a: i64, b: i64, c: i64) -> Vec<i64> {
    let (a, b, c) = (a as i128, b as i128, c as i128);
    if a == 0 {
        if b == 0 {
            return Vec::new();
        }
        return if c % b == 0 {
            vec![(-c / b) as i64]
        } else {
            Vec::new()
        };
    }
    let disc = b * b - 4 * a * c;
    if disc < 0 {
        return Vec::new();
    }
    let r = (disc as f64).sqrt().round() as i128;
    let r = [r - 1, r, r + 1]
        .into_iter()
        .find(|x| *x >= 0 && x * x == disc);
    let Some(r) = r else { return Vec::new() };
    let mut out: Vec<i64> = [-b + r, -b - r]
        .into_iter()
        .filter(|num| num % (2 * a) == 0)
        .map(|num| (num / (2 * a)) as i64)
        .collect();
    out.sort();
    out.dedup();
    out
}

/// One-dimensional analysis of `Γ±` and their connection equations.
pub fn oned_check(spec: &ProblemSpec) -> Result<(ConditionReport, Vec<ConnectedPair>)> {
    if spec.d != 1 {
        return Err(Error::InvalidSpec(format!(
            "the one-dimensional check needs d = 1, got d = {}",
            spec.d
        )));
    }
    let (u0, v0) = linear_solution(spec)?;
    let sym = Symbols::new(&u0, &v0, spec.p)?;
    let omega0 = spec.omega0_int();
    let js: BTreeSet<i64> = spec.modes.iter().flat_map(|m| [m.j[0], -m.j[0]]).collect();
    let gamma_plus = sym.same.support_vec();
    let gamma_minus = sym.vv.support_vec();
    let mut report = ConditionReport::new("one-dimensional", Verdict::Pass)
        .param("gamma_plus", gamma_plus.len())
        .param("gamma_minus", gamma_minus.len());
    let mut pairs = Vec::new();
    for (same, set) in [(true, &gamma_plus), (false, &gamma_minus)] {
        for g in set {
            let (dj, w) = (g.j[0], g.n_dot(&omega0));
            if dj == 0 && g.n.iter().any(|&x| x != 0) {
                report.verdict = Verdict::Fail;
                report.witnesses.push(Witness::TimeShift(g.clone()));
                continue;
            }
            if same && g.is_zero() {
                continue;
            }
            let roots = if same {
                // 2 j Δj + Δj² + Δn.ω = 0
                integer_roots(0, 2 * dj, dj * dj + w)
            } else {
                // 2 j² + 2 j Δj + Δj² - Δn.ω = 0
                integer_roots(2, 2 * dj, dj * dj - w)
            };
            for j in roots {
                let cubic_type = js.contains(&j) && js.contains(&(j + dj));
                if !cubic_type {
                    report.verdict = Verdict::Fail;
                    report.witnesses.push(Witness::NonCubicPair {
                        j,
                        dj,
                        diff: g.clone(),
                    });
                }
                pairs.push(ConnectedPair {
                    j,
                    dj,
                    diff: g.clone(),
                    same_branch: same,
                    cubic_type,
                });
            }
        }
    }
    Ok((report.param("connected_pairs", pairs.len()), pairs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceCase {
    /// `(j_k - j_k').(j + j_k) = 0`, `k != k'`.
    Reflected,
    /// `(j - j_k).(j - j_k') = 0`.
    Sphere,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonancePair {
    pub j: Vec<i64>,
    pub case: ResonanceCase,
    pub k: usize,
    pub k2: usize,
}

/// Lattice points of the cubic resonance sets inside `|j|_∞ <= j_radius`.
pub fn cubic_resonance_pairs(j_list: &[Vec<i64>], d: usize, j_radius: i64) -> Vec<ResonancePair> {
    let dot = |a: &[i64], b: &[i64]| -> i64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let mut out = Vec::new();
    for j in cube_points(d, j_radius) {
        for (k, jk) in j_list.iter().enumerate() {
            for (k2, jk2) in j_list.iter().enumerate() {
                if k != k2 {
                    let diff: Vec<i64> = jk.iter().zip(jk2).map(|(a, b)| a - b).collect();
                    let shifted: Vec<i64> = j.iter().zip(jk).map(|(a, b)| a + b).collect();
                    if dot(&diff, &shifted) == 0 {
                        out.push(ResonancePair {
                            j: j.clone(),
                            case: ResonanceCase::Reflected,
                            k,
                            k2,
                        });
                    }
                }
                if k <= k2 {
                    let a: Vec<i64> = j.iter().zip(jk).map(|(x, y)| x - y).collect();
                    let b: Vec<i64> = j.iter().zip(jk2).map(|(x, y)| x - y).collect();
                    if dot(&a, &b) == 0 {
                        out.push(ResonancePair {
                            j: j.clone(),
                            case: ResonanceCase::Sphere,
                            k,
                            k2,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Distinct `j` of `cubic_resonance_pairs`.
pub fn cubic_resonance_points(j_list: &[Vec<i64>], d: usize, j_radius: i64) -> BTreeSet<Vec<i64>> {
    cubic_resonance_pairs(j_list, d, j_radius)
        .into_iter()
        .map(|p| p.j)
        .collect()
}
