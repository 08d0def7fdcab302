//! Splitting a labeled dataset across federated clients.

use rand::seq::SliceRandom;
use rand::Rng;

use super::LabeledDataset;
use crate::error::{Error, Result};

/// Per-class sample counts for one client.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientAllocation {
    pub counts: Vec<(usize, usize)>,
}

impl ClientAllocation {
    pub fn total(&self) -> usize {
        self.counts.iter().map(|&(_, n)| n).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionSpec {
    /// Class-stratified split of the whole dataset.
    Iid,
    /// Exact per-client class counts, one allocation per client in order.
    Explicit(Vec<ClientAllocation>),
}

impl PartitionSpec {
    /// Client 1 holds `minority_count` of the minority class, every other
    /// client `majority_count` of the majority class.
    pub fn single_minority(
        minority: usize,
        majority: usize,
        minority_count: usize,
        majority_count: usize,
        clients: usize,
    ) -> Self {
        Self::multi_minority(&[minority], &[majority], minority_count, majority_count, clients)
    }

    /// Client 1 holds `count` minority samples; `count` majority samples are
    /// spread over the remaining clients, earlier clients taking the remainder.
    pub fn equal_total(minority: usize, majority: usize, count: usize, clients: usize) -> Self {
        let mut allocs = vec![ClientAllocation {
            counts: vec![(minority, count)],
        }];
        let others = clients.saturating_sub(1);
        for k in 0..others {
            let n = count / others + usize::from(k < count % others);
            allocs.push(ClientAllocation {
                counts: vec![(majority, n)],
            });
        }
        Self::Explicit(allocs)
    }

    /// Client 1 holds `minority_per_class` of each minority class; every other
    /// client holds `majority_per_class` of each majority class.
    pub fn multi_minority(
        minority: &[usize],
        majority: &[usize],
        minority_per_class: usize,
        majority_per_class: usize,
        clients: usize,
    ) -> Self {
        let mut allocs = vec![ClientAllocation {
            counts: minority.iter().map(|&c| (c, minority_per_class)).collect(),
        }];
        for _ in 1..clients {
            allocs.push(ClientAllocation {
                counts: majority.iter().map(|&c| (c, majority_per_class)).collect(),
            });
        }
        Self::Explicit(allocs)
    }
}

/// Row indices assigned to each client. Outputs are pairwise disjoint.
pub fn partition_indices<R: Rng + ?Sized>(
    ds: &LabeledDataset,
    spec: &PartitionSpec,
    clients: usize,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    if clients == 0 {
        return Err(Error::Partition("need at least one client".into()));
    }
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); ds.num_classes];
    for (i, &l) in ds.labels.iter().enumerate() {
        pools[l].push(i);
    }
    for p in &mut pools {
        p.shuffle(rng);
    }

    let out = match spec {
        PartitionSpec::Iid => {
            // Every client takes floor(n_c / M) of each class. The n_c mod M
            // leftovers are dealt class by class, largest remainder first, to
            // the clients holding the fewest leftovers so far.
            let mut out = vec![Vec::new(); clients];
            let mut extras = vec![0usize; clients];
            let mut classes: Vec<usize> = (0..pools.len()).collect();
            classes.sort_by_key(|&c| (std::cmp::Reverse(pools[c].len() % clients), c));
            for c in classes {
                let pool = &pools[c];
                let base = pool.len() / clients;
                let rem = pool.len() % clients;
                let mut order: Vec<usize> = (0..clients).collect();
                order.sort_by_key(|&j| (extras[j], j));
                let mut next = 0;
                for (rank, &j) in order.iter().enumerate() {
                    let take = base + usize::from(rank < rem);
                    out[j].extend_from_slice(&pool[next..next + take]);
                    next += take;
                    if rank < rem {
                        extras[j] += 1;
                    }
                }
            }
            out
        }
        PartitionSpec::Explicit(allocs) => {
            if allocs.len() != clients {
                return Err(Error::Partition(format!(
                    "{} client allocations for {clients} clients",
                    allocs.len()
                )));
            }
            let mut demand = vec![0usize; ds.num_classes];
            for a in allocs {
                for &(class, n) in &a.counts {
                    if class >= ds.num_classes {
                        return Err(Error::Partition(format!(
                            "class {class} does not exist ({} classes)",
                            ds.num_classes
                        )));
                    }
                    demand[class] += n;
                }
            }
            let deficits: Vec<String> = demand
                .iter()
                .zip(&pools)
                .enumerate()
                .filter(|(_, (&d, p))| d > p.len())
                .map(|(c, (&d, p))| {
                    format!("class {c}: requested {d}, available {}, short by {}", p.len(), d - p.len())
                })
                .collect();
            if !deficits.is_empty() {
                return Err(Error::Partition(deficits.join("; ")));
            }
            let mut cursor = vec![0usize; ds.num_classes];
            allocs
                .iter()
                .map(|a| {
                    let mut rows = Vec::with_capacity(a.total());
                    for &(class, n) in &a.counts {
                        rows.extend_from_slice(&pools[class][cursor[class]..cursor[class] + n]);
                        cursor[class] += n;
                    }
                    rows
                })
                .collect()
        }
    };
    if let Some(i) = out.iter().position(Vec::is_empty) {
        return Err(Error::Partition(format!("client {} would receive no samples", i + 1)));
    }
    Ok(out)
}

pub fn partition<R: Rng + ?Sized>(
    ds: &LabeledDataset,
    spec: &PartitionSpec,
    clients: usize,
    rng: &mut R,
) -> Result<Vec<LabeledDataset>> {
    Ok(partition_indices(ds, spec, clients, rng)?
        .iter()
        .map(|rows| ds.subset(rows))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn labeled(counts: &[usize]) -> LabeledDataset {
        let labels: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
            .collect();
        let samples = Matrix::new(labels.len(), 1, labels.iter().map(|&l| l as f64).collect()).unwrap();
        LabeledDataset::new(samples, labels, counts.len()).unwrap()
    }

    #[test]
    fn equal_total_sizes() {
        let ds = labeled(&[10_000, 10_000]);
        let spec = PartitionSpec::equal_total(0, 1, 10_000, 5);
        let parts = partition(&ds, &spec, 5, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let sizes: Vec<usize> = parts.iter().map(LabeledDataset::len).collect();
        assert_eq!(sizes, vec![10_000, 2500, 2500, 2500, 2500]);
        assert!(parts[0].labels.iter().all(|&l| l == 0));
        assert!(parts[1..].iter().all(|p| p.labels.iter().all(|&l| l == 1)));

        let PartitionSpec::Explicit(a) = PartitionSpec::equal_total(0, 1, 2000, 4) else {
            unreachable!()
        };
        let totals: Vec<usize> = a.iter().map(ClientAllocation::total).collect();
        assert_eq!(totals, vec![2000, 667, 667, 666]);
    }

    #[test]
    fn iid_is_stratified() {
        let ds = labeled(&[500, 500]);
        let parts = partition(&ds, &PartitionSpec::Iid, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for p in parts {
            let c = p.class_counts();
            assert!(c.iter().all(|&n| n.abs_diff(100) <= 1), "{c:?}");
        }
    }

    #[test]
    fn oversubscription_names_class_and_shortfall() {
        let ds = labeled(&[100, 50]);
        let spec = PartitionSpec::single_minority(1, 0, 80, 30, 3);
        let err = partition(&ds, &spec, 3, &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("class 1: requested 80, available 50, short by 30"), "{msg}");
        assert!(!msg.contains("class 0"), "{msg}");
    }

    #[test]
    fn empty_client_rejected() {
        let ds = labeled(&[2]);
        assert!(partition(&ds, &PartitionSpec::Iid, 3, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        let spec = PartitionSpec::single_minority(0, 0, 1, 0, 2);
        assert!(partition(&ds, &spec, 2, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    proptest! {
        #[test]
        fn outputs_are_disjoint_and_tv_bounded(
            counts in proptest::collection::vec(1usize..300, 1..8),
            clients in 1usize..11,
            seed in any::<u64>(),
        ) {
            let ds = labeled(&counts);
            prop_assume!(ds.len() >= clients);
            let parts = partition_indices(&ds, &PartitionSpec::Iid, clients, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let all: Vec<usize> = parts.iter().flatten().copied().collect();
            let unique: HashSet<usize> = all.iter().copied().collect();
            prop_assert_eq!(unique.len(), all.len());
            prop_assert_eq!(all.len(), ds.len());

            let n = ds.len() as f64;
            for p in &parts {
                let size = p.len() as f64;
                let mut local = vec![0usize; counts.len()];
                for &i in p { local[ds.labels[i]] += 1; }
                for (c, &k) in local.iter().enumerate() {
                    let ideal = counts[c] as f64 / clients as f64;
                    prop_assert!((k as f64 - ideal).abs() < 1.0 + 1e-9);
                }
                let tv: f64 = local.iter().zip(&counts)
                    .map(|(&k, &g)| (k as f64 / size - g as f64 / n).abs())
                    .sum::<f64>() / 2.0;
                // Exact for up to two classes; with more classes a +-1
                // stratified split cannot always reach 1/size.
                if counts.len() <= 2 {
                    prop_assert!(tv <= 1.0 / size + 1e-12, "tv {} size {}", tv, size);
                } else {
                    prop_assert!(tv * size < (counts.len() as f64 + 1.0) / 2.0, "tv {} size {}", tv, size);
                }
            }
        }

        #[test]
        fn explicit_counts_are_exact(a in 1usize..40, b in 0usize..20, clients in 2usize..5, seed in any::<u64>()) {
            let ds = labeled(&[a, b * (clients - 1)]);
            let spec = PartitionSpec::single_minority(0, 1, a, b, clients);
            let parts = partition_indices(&ds, &spec, clients, &mut ChaCha8Rng::seed_from_u64(seed));
            if b == 0 {
                prop_assert!(parts.is_err());
            } else {
                let parts = parts.unwrap();
                prop_assert_eq!(parts[0].len(), a);
                for p in &parts[1..] { prop_assert_eq!(p.len(), b); }
                let unique: HashSet<usize> = parts.iter().flatten().copied().collect();
                prop_assert_eq!(unique.len(), a + b * (clients - 1));
            }
        }
    }
}
