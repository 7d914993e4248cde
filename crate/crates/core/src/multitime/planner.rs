//! Assigns each operator factor to a positive-P or doubled-Q snapshot.
//!
//! Factors are consumed from the outside of the time-ordered product inward.
//! A factor multiplied onto the density matrix from the right (left block) is
//! estimable from positive-P samples when it is a creation operator and from
//! doubled-Q samples when it is an annihilation operator; the right block is
//! the mirror image. Positive-P factors must all precede the single switch to
//! doubled-Q. Equal-time factors may be reordered with `[a_j, a+_k] = delta_jk`,
//! each commutator contributing a lower-order term planned under the same schedule.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use super::spec::{time_ordered, CorrelationSpec, Ladder, OperatorFactor};

/// Largest product for which equal-time reordering is attempted.
pub const MAX_REWRITE_FACTORS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Positive-P sample: `alpha` for `a`, `beta` for `a+`.
    Normal,
    /// Doubled-Q sample after the switch: `alpha'`, `beta'`.
    AntiNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannedFactor {
    pub factor: OperatorFactor,
    pub phase: Phase,
}

impl PlannedFactor {
    pub fn variable_name(&self) -> String {
        let base = match self.factor.op {
            Ladder::Annihilate => "alpha",
            Ladder::Create => "beta",
        };
        let prime = if self.phase == Phase::AntiNormal { "'" } else { "" };
        let mut s = String::new();
        let _ = write!(s, "{base}{prime}_{}(t{})", self.factor.mode + 1, self.factor.time);
        s
    }
}

/// `weight * <product of stochastic variables>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanTerm {
    pub weight: i64,
    pub factors: Vec<PlannedFactor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    SingleTime,
    Normal,
    AntiNormal,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Infeasibility {
    NotTimeOrdered,
    /// Would need a conversion back from doubled-Q to positive-P.
    RequiresQToP,
    /// Longer than `MAX_REWRITE_FACTORS` and not directly estimable.
    RewriteLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub spec: CorrelationSpec,
    pub outcome: core::result::Result<Schedule, Infeasibility>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub category: Category,
    /// Time label at which positive-P samples are converted to doubled-Q (after recording the positive-P snapshot).
    pub switch: Option<usize>,
    pub terms: Vec<PlanTerm>,
}

impl Plan {
    pub fn is_feasible(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn schedule(&self) -> Option<&Schedule> {
        self.outcome.as_ref().ok()
    }

    /// Distinct `(time label, phase)` snapshots the estimator reads.
    pub fn required_snapshots(&self) -> Vec<(usize, Phase)> {
        let mut out: Vec<(usize, Phase)> = Vec::new();
        if let Some(s) = self.schedule() {
            for f in s.terms.iter().flat_map(|t| &t.factors) {
                if !out.contains(&(f.factor.time, f.phase)) {
                    out.push((f.factor.time, f.phase));
                }
            }
        }
        out.sort_by_key(|&(t, p)| (t, p == Phase::AntiNormal));
        out
    }

    /// Human-readable schedule and factor map.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "product: {}", self.spec);
        match &self.outcome {
            Err(reason) => {
                let _ = writeln!(s, "infeasible: {}", match reason {
                    Infeasibility::NotTimeOrdered => "not-time-ordered",
                    Infeasibility::RequiresQToP => "requires-Q-to-P",
                    Infeasibility::RewriteLimit => "rewrite-limit",
                });
            }
            Ok(sch) => {
                let cat = match sch.category {
                    Category::SingleTime => "single-time",
                    Category::Normal => "normal (positive-P only)",
                    Category::AntiNormal => "anti-normal (doubled-Q only)",
                    Category::Mixed => "mixed",
                };
                let _ = writeln!(s, "category: {cat}");
                match sch.switch {
                    None => {
                        let _ = writeln!(s, "schedule: positive-P throughout");
                    }
                    Some(k) => {
                        let _ = writeln!(s, "schedule: positive-P until t{k}, switch to doubled-Q at t{k}, doubled-Q after");
                    }
                }
                for t in &sch.terms {
                    let vars: Vec<String> = t.factors.iter().map(|f| f.variable_name()).collect();
                    let body = if vars.is_empty() { String::from("1") } else { vars.join(" ") };
                    let _ = writeln!(s, "term: {:+} * <{}>", t.weight, body);
                }
            }
        }
        s
    }
}

/// Options indexed by phase usage bits: 1 = uses positive-P, 2 = uses doubled-Q.
type Options = [Option<Vec<PlanTerm>>; 4];

fn phase_bits(phases: &[Phase]) -> usize {
    phases.iter().fold(0, |b, p| b | if *p == Phase::Normal { 1 } else { 2 })
}

fn compatible(f: &OperatorFactor, phase: Phase, switch: Option<usize>) -> bool {
    match (switch, phase) {
        (None, Phase::Normal) => true,
        (None, Phase::AntiNormal) => false,
        (Some(s), Phase::Normal) => f.time <= s,
        (Some(s), Phase::AntiNormal) => f.time >= s,
    }
}

/// Direct phase assignments for a product in its written order.
fn assignments(seq: &[OperatorFactor], switch: Option<usize>) -> Vec<Vec<Phase>> {
    let n = seq.len();
    let mut out: Vec<Vec<Phase>> = Vec::new();
    for k in 0..=n {
        let left: Vec<usize> = (0..k).collect();
        let right: Vec<usize> = (k..n).rev().collect();
        let nondecreasing = |idx: &[usize]| idx.windows(2).all(|w| seq[w[0]].time <= seq[w[1]].time);
        if !nondecreasing(&left) || !nondecreasing(&right) {
            continue;
        }
        for pl in 0..=left.len() {
            for pr in 0..=right.len() {
                let mut phases = vec![Phase::Normal; n];
                let mut ok = true;
                for (pos, &i) in left.iter().enumerate() {
                    let ph = if pos < pl { Phase::Normal } else { Phase::AntiNormal };
                    let want = if ph == Phase::Normal { Ladder::Create } else { Ladder::Annihilate };
                    ok &= seq[i].op == want && compatible(&seq[i], ph, switch);
                    phases[i] = ph;
                }
                for (pos, &i) in right.iter().enumerate() {
                    let ph = if pos < pr { Phase::Normal } else { Phase::AntiNormal };
                    let want = if ph == Phase::Normal { Ladder::Annihilate } else { Ladder::Create };
                    ok &= seq[i].op == want && compatible(&seq[i], ph, switch);
                    phases[i] = ph;
                }
                if ok && !out.contains(&phases) {
                    out.push(phases);
                }
            }
        }
    }
    out
}

/// Reorders `seq` into `target` (a permutation) by adjacent swaps, returning
/// the reordered product and the commutator terms `(weight, product)` it shed.
fn reorder(seq: &[OperatorFactor], target: &[usize]) -> (Vec<OperatorFactor>, Vec<(i64, Vec<OperatorFactor>)>) {
    let mut pos = vec![0; seq.len()];
    for (p, &i) in target.iter().enumerate() {
        pos[i] = p;
    }
    let mut arr: Vec<(OperatorFactor, usize)> = seq.iter().copied().zip(0..).collect();
    let mut shed = Vec::new();
    let mut changed = true;
    while changed {
        changed = false;
        for j in 0..arr.len().saturating_sub(1) {
            if pos[arr[j].1] > pos[arr[j + 1].1] {
                let (x, y) = (arr[j].0, arr[j + 1].0);
                if x.mode == y.mode && x.op != y.op {
                    // xy = yx + [x, y], [a, a+] = 1
                    let w = if x.op == Ladder::Annihilate { 1 } else { -1 };
                    let rest: Vec<OperatorFactor> = arr[..j].iter().chain(&arr[j + 2..]).map(|e| e.0).collect();
                    shed.push((w, rest));
                }
                arr.swap(j, j + 1);
                changed = true;
            }
        }
    }
    (arr.into_iter().map(|e| e.0).collect(), shed)
}

/// Orderings obtained by permuting each maximal run of equal-time factors.
fn run_permutations(seq: &[OperatorFactor]) -> Vec<Vec<usize>> {
    let mut runs: Vec<Vec<usize>> = Vec::new();
    for (i, f) in seq.iter().enumerate() {
        match runs.last_mut() {
            Some(r) if seq[r[0]].time == f.time => r.push(i),
            _ => runs.push(vec![i]),
        }
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for run in &runs {
        let perms = permutations(run);
        let mut next = Vec::with_capacity(out.len() * perms.len());
        for prefix in &out {
            for p in &perms {
                let mut v = prefix.clone();
                v.extend_from_slice(p);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn term_count(terms: &[PlanTerm]) -> usize {
    terms.len()
}

fn offer(options: &mut Options, bits: usize, terms: Vec<PlanTerm>) {
    let better = options[bits].as_ref().is_none_or(|cur| term_count(&terms) < term_count(cur));
    if better {
        options[bits] = Some(terms);
    }
}

fn options_for(seq: &[OperatorFactor], switch: Option<usize>, rewrite: bool) -> Options {
    let mut options: Options = [None, None, None, None];
    if seq.is_empty() {
        options[0] = Some(vec![PlanTerm { weight: 1, factors: Vec::new() }]);
        return options;
    }
    let orders = if rewrite { run_permutations(seq) } else { vec![(0..seq.len()).collect()] };
    for order in orders {
        let (main, shed) = reorder(seq, &order);
        let mains = assignments(&main, switch);
        if mains.is_empty() {
            continue;
        }
        let subs: Vec<(i64, Options)> = shed.iter().map(|(w, s)| (*w, options_for(s, switch, rewrite))).collect();
        if subs.iter().any(|(_, o)| o.iter().all(Option::is_none)) {
            continue;
        }
        for phases in &mains {
            let head = PlanTerm { weight: 1, factors: main.iter().zip(phases).map(|(&factor, &phase)| PlannedFactor { factor, phase }).collect() };
            // every combination of one option per shed term
            let mut partial: Vec<(usize, Vec<PlanTerm>)> = vec![(phase_bits(phases), vec![head])];
            for (w, sub) in &subs {
                let mut next = Vec::new();
                for (bits, terms) in &partial {
                    for (b, opt) in sub.iter().enumerate() {
                        if let Some(sub_terms) = opt {
                            let mut t = terms.clone();
                            t.extend(sub_terms.iter().map(|x| PlanTerm { weight: x.weight * w, factors: x.factors.clone() }));
                            next.push((bits | b, t));
                        }
                    }
                }
                partial = next;
            }
            for (bits, terms) in partial {
                offer(&mut options, bits, terms);
            }
        }
    }
    options
}

/// Finds an estimator for `spec`, preferring positive-P only, then doubled-Q only, then mixed.
pub fn plan(spec: &CorrelationSpec) -> Plan {
    let outcome = schedule_for(spec);
    Plan { spec: spec.clone(), outcome }
}

fn schedule_for(spec: &CorrelationSpec) -> core::result::Result<Schedule, Infeasibility> {
    let seq = spec.factors();
    if !time_ordered(seq) {
        return Err(Infeasibility::NotTimeOrdered);
    }
    let rewrite = seq.len() <= MAX_REWRITE_FACTORS;
    let single = spec.time_count() == 1;
    let normal = options_for(seq, None, rewrite);
    let category = |c| if single { Category::SingleTime } else { c };
    if let Some(terms) = normal[1].clone().or_else(|| normal[0].clone()) {
        return Ok(Schedule { category: category(Category::Normal), switch: None, terms });
    }
    let at_start = options_for(seq, Some(0), rewrite);
    if let Some(terms) = at_start[2].clone() {
        return Ok(Schedule { category: category(Category::AntiNormal), switch: Some(0), terms });
    }
    let mut best: Option<Vec<PlanTerm>> = None;
    for s in 0..spec.time_count() {
        if let Some(terms) = options_for(seq, Some(s), rewrite)[3].clone() {
            if best.as_ref().is_none_or(|b| terms.len() < b.len()) {
                best = Some(terms);
            }
        }
    }
    match best {
        Some(terms) => {
            let switch = terms.iter().flat_map(|t| &t.factors).filter(|f| f.phase == Phase::Normal).map(|f| f.factor.time).max();
            Ok(Schedule { category: category(Category::Mixed), switch, terms })
        }
        None if !rewrite => Err(Infeasibility::RewriteLimit),
        None => Err(Infeasibility::RequiresQToP),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use OperatorFactor as F;

    fn spec(f: Vec<OperatorFactor>) -> CorrelationSpec {
        CorrelationSpec::new(f).unwrap()
    }

    fn vars(p: &Plan) -> Vec<Vec<String>> {
        p.schedule().unwrap().terms.iter().map(|t| t.factors.iter().map(|f| f.variable_name()).collect()).collect()
    }

    #[test]
    fn delayed_intensity_correlation_is_normal() {
        let p = plan(&spec(vec![F::create(0, 0), F::create(0, 1), F::annihilate(0, 1), F::annihilate(0, 0)]));
        let s = p.schedule().unwrap();
        assert_eq!(s.category, Category::Normal);
        assert_eq!(s.switch, None);
        assert_eq!(s.terms.len(), 1);
    }

    #[test]
    fn mixed_needs_switch_at_first_time() {
        // a(t1) a+(t1) a+(t0) a(t0)
        let p = plan(&spec(vec![F::annihilate(1, 1), F::create(1, 1), F::create(1, 0), F::annihilate(1, 0)]));
        let s = p.schedule().unwrap();
        assert_eq!(s.category, Category::Mixed);
        assert_eq!(s.switch, Some(0));
        assert_eq!(vars(&p), vec![vec!["alpha'_2(t1)", "beta'_2(t1)", "beta'_2(t0)", "alpha_2(t0)"]]);
        assert_eq!(p.required_snapshots(), vec![(0, Phase::Normal), (0, Phase::AntiNormal), (1, Phase::AntiNormal)]);
    }

    #[test]
    fn single_time_antinormal_gets_commutator_term() {
        // a a+ = a+ a + 1
        let p = plan(&spec(vec![F::annihilate(0, 0), F::create(0, 0)]));
        let s = p.schedule().unwrap();
        assert_eq!(s.category, Category::SingleTime);
        assert_eq!(s.terms.len(), 2);
        assert_eq!(s.terms[1], PlanTerm { weight: 1, factors: vec![] });
    }

    #[test]
    fn infeasible_and_unordered() {
        // a(t0) a+(t1) a(t2): earliest factor needs Q, the next one P
        let p = plan(&spec(vec![F::annihilate(0, 0), F::create(0, 1), F::annihilate(0, 2)]));
        assert_eq!(p.outcome, Err(Infeasibility::RequiresQToP));
        let p = plan(&spec(vec![F::create(0, 1), F::create(0, 0), F::annihilate(0, 1)]));
        assert_eq!(p.outcome, Err(Infeasibility::NotTimeOrdered));
    }

    #[test]
    fn different_modes_commute_without_terms() {
        let p = plan(&spec(vec![F::annihilate(0, 0), F::create(1, 0)]));
        assert_eq!(p.schedule().unwrap().terms.len(), 1);
    }
}
