use alloc::vec;
use alloc::vec::Vec;

use super::planner::{plan, Category, Infeasibility};
use super::spec::{CorrelationSpec, Ladder, OperatorFactor};

/// Classification counts over all single-mode products of `factors` ladder
/// operators at up to `times` distinct times.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub total: usize,
    pub single_time: usize,
    pub normal: usize,
    pub antinormal: usize,
    pub mixed: usize,
    pub not_time_ordered: usize,
    /// Time-ordered but not estimable with one positive-P to doubled-Q switch.
    pub infeasible: Vec<CorrelationSpec>,
}

impl Tally {
    pub fn doable(&self) -> usize {
        self.single_time + self.normal + self.antinormal + self.mixed
    }

    pub fn time_ordered_not_doable(&self) -> usize {
        self.infeasible.len()
    }
}

/// Surjective time labellings onto `0..k` for `k <= max_times`.
fn labellings(n: usize, max_times: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for k in 1..=max_times.min(n) {
        let mut cur = vec![0; n];
        loop {
            if (0..k).all(|t| cur.contains(&t)) {
                out.push(cur.clone());
            }
            let mut i = n;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < k {
                    break;
                }
                cur[i] = 0;
            }
            if cur.iter().all(|&x| x == 0) {
                break;
            }
        }
    }
    out
}

pub fn tally(factors: usize, times: usize) -> Tally {
    let mut t = Tally::default();
    for labels in labellings(factors, times) {
        for kinds in 0..(1u32 << factors) {
            let f: Vec<OperatorFactor> = labels
                .iter()
                .enumerate()
                .map(|(i, &time)| OperatorFactor { op: if kinds >> i & 1 == 1 { Ladder::Create } else { Ladder::Annihilate }, mode: 0, time })
                .collect();
            let spec = CorrelationSpec::new(f).expect("labellings are surjective");
            t.total += 1;
            match plan(&spec).outcome {
                Ok(s) => match s.category {
                    Category::SingleTime => t.single_time += 1,
                    Category::Normal => t.normal += 1,
                    Category::AntiNormal => t.antinormal += 1,
                    Category::Mixed => t.mixed += 1,
                },
                Err(Infeasibility::NotTimeOrdered) => t.not_time_ordered += 1,
                Err(_) => t.infeasible.push(spec),
            }
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labelling_counts_are_ordered_bell_numbers() {
        assert_eq!(labellings(3, 3).len(), 13);
        assert_eq!(labellings(4, 4).len(), 75);
        assert_eq!(labellings(4, 2).len(), 15);
    }

    #[test]
    fn two_factor_two_time() {
        let t = tally(2, 2);
        assert_eq!((t.total, t.single_time, t.normal, t.antinormal, t.mixed, t.not_time_ordered), (12, 4, 4, 4, 0, 0));
    }
}
