use idm::oracle::{oracle_bankruptcy_min, SearchBudget};
use idm::reductions::{brute, gen_bankmin_fixed32_ecp, NumberMultiset};
use idm::validity::{validate, Variant};

fn fixed32_min(values: Vec<u64>) -> (usize, usize) {
    let s = NumberMultiset::new(values.clone(), None).unwrap();
    let (x, k) = gen_bankmin_fixed32_ecp(&s).unwrap();
    let a = oracle_bankruptcy_min(&x, Variant::PP, &SearchBudget::default()).unwrap();
    assert!(a.exhausted, "{values:?}: search budget ran out");
    let w = a.witness.expect("minimum comes with a schedule");
    let rep = validate(&x, &w, Variant::PP, None);
    assert!(rep.valid);
    assert_eq!(rep.bankrupt.len(), a.value);
    (a.value, k)
}

#[test]
fn fixed32_yes_instance_meets_threshold() {
    assert!(brute::equal_cardinality_partition(&[1, 1]));
    let (min, k) = fixed32_min(vec![1, 1]);
    assert!(min <= k, "minimum {min} above threshold {k}");
}

#[test]
fn fixed32_no_instance_misses_threshold() {
    assert!(!brute::equal_cardinality_partition(&[1, 3]));
    let (min, k) = fixed32_min(vec![1, 3]);
    assert!(min > k, "minimum {min} within threshold {k}");
}
