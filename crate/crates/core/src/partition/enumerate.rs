//! Exhaustive enumeration of set partitions as restricted growth strings.

use super::SetPartition;

/// Iterator over every partition of `{0, .., n-1}` in lexicographic order of
/// their canonical label arrays. Yields Bell(n) items.
#[derive(Debug, Clone)]
pub struct AllPartitions {
    labels: Vec<u32>,
    // prefix_max[i] = max(labels[0..=i])
    prefix_max: Vec<u32>,
    done: bool,
}

pub fn all_partitions(n: usize) -> AllPartitions {
    AllPartitions {
        labels: vec![0; n],
        prefix_max: vec![0; n],
        done: n == 0,
    }
}

impl Iterator for AllPartitions {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.done {
            return None;
        }
        let n = self.labels.len();
        let blocks = self.prefix_max[n - 1] as usize + 1;
        let current = SetPartition::from_canonical(self.labels.clone(), blocks);

        // advance to the next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            if self.labels[i] <= self.prefix_max[i - 1] {
                self.labels[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.labels[i]);
                for j in i + 1..n {
                    self.labels[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                break;
            }
            i -= 1;
        }
        Some(current)
    }
}
