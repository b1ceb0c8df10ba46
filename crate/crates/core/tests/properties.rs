use proptest::prelude::*;

use lrcforge::code::DEFAULT_BUDGET;
use lrcforge::families::{build_family_a, build_family_c, FamilyAParams, FamilyCParams};
use lrcforge::galois::GaloisField;
use lrcforge::locality::{candidate_profiles, is_optimal_lrc, rd_bound, search_locality, verify_candidates, verify_locality};
use lrcforge::{Duality, Field, LinearCode, Mat};

const LARGE: [(u32, u32); 6] = [(2, 8), (2, 10), (3, 5), (5, 3), (7, 3), (251, 1)];
const QUADRATIC: [(u32, u32); 6] = [(2, 8), (3, 4), (5, 4), (2, 10), (17, 2), (31, 2)];
const SMALL_QS: [u32; 6] = [2, 3, 4, 5, 7, 9];

fn field(p: u32, e: u32) -> Field {
    GaloisField::new(p, e).unwrap()
}

fn random_code(q: u32, k: usize, n: usize, seed: Vec<u32>) -> LinearCode {
    let f = GaloisField::with_order(q).unwrap();
    LinearCode::from_generator(&Mat::from_fn(&f, k, n, |i, j| seed[i * n + j] % q))
}

fn code_strategy(max_n: usize, max_k: usize) -> impl Strategy<Value = LinearCode> {
    (0..SMALL_QS.len(), 2..=max_n)
        .prop_flat_map(move |(qi, n)| {
            let k = 1..=max_k.min(n - 1);
            (Just(SMALL_QS[qi]), Just(n), k)
        })
        .prop_flat_map(|(q, n, k)| (Just(q), Just(n), Just(k), prop::collection::vec(any::<u32>(), k * n)))
        .prop_map(|(q, n, k, seed)| random_code(q, k, n, seed))
        .prop_filter("nonzero code", |c| c.dim() > 0)
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    go(0, n, size, &mut cur, &mut out);
    out
}

fn family_a_strategy() -> impl Strategy<Value = FamilyAParams> {
    (prop::sample::select(vec![5usize, 7, 8, 9]), 1..=3usize, 1..9usize, 0..9usize)
        .prop_map(|(q, t, u, v)| FamilyAParams::new(q, u.min(q - 2), v.min(u.min(q - 2)), t))
        .prop_filter("admissible", |p| p.check().is_ok())
}

fn family_c_strategy() -> impl Strategy<Value = FamilyCParams> {
    (prop::sample::select(vec![(7usize, 3usize), (7, 6), (9, 4), (11, 5), (13, 4), (13, 6)]), 1..=3usize, 1..6usize, 0..6usize)
        .prop_map(|((q, m), t, u, v)| {
            let u = u.min(m - 1);
            FamilyCParams::new(q, u, v.min(u), t, m)
        })
        .prop_filter("admissible", |p| p.check().is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn field_axioms_on_large_fields(fi in 0..LARGE.len(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let (p, e) = LARGE[fi];
        let f = field(p, e);
        let q = f.order();
        let (a, b, c) = (a % q, b % q, c % q);
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        if b != 0 {
            prop_assert_eq!(f.mul(f.div(a, b).unwrap(), b), a);
        }
    }

    #[test]
    fn conjugation_is_a_field_automorphism(fi in 0..QUADRATIC.len(), x in any::<u32>(), y in any::<u32>()) {
        let (p, e) = QUADRATIC[fi];
        let f = field(p, e);
        let q0 = p.pow(e / 2);
        let (x, y) = (x % f.order(), y % f.order());
        let c = |a: u32| f.conjugate(a, q0).unwrap();
        prop_assert_eq!(c(f.add(x, y)), f.add(c(x), c(y)));
        prop_assert_eq!(c(f.mul(x, y)), f.mul(c(x), c(y)));
        prop_assert_eq!(c(c(x)), x);
        prop_assert_eq!(c(x) == x, f.in_subfield(x, q0).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn root_of_unity_has_exact_order(fi in 0..LARGE.len(), pick in any::<usize>()) {
        let (p, e) = LARGE[fi];
        let f = field(p, e);
        let m = f.order() - 1;
        let divisors: Vec<u32> = (1..=m).filter(|d| m.is_multiple_of(*d)).collect();
        let n = divisors[pick % divisors.len()];
        let z = f.root_of_unity(n).unwrap();
        prop_assert_eq!(f.element_order(z), Some(n));
        prop_assert!(f.root_of_unity(m + 1).is_err());
    }

    #[test]
    fn dual_dimension_and_orthogonality(c in code_strategy(10, 6)) {
        let f = c.field().clone();
        let mut kinds = vec![Duality::Euclidean];
        if f.degree() % 2 == 0 {
            kinds.push(Duality::Hermitian);
        }
        for kind in kinds {
            let d = c.dual(kind).unwrap();
            prop_assert_eq!(c.dim() + d.dim(), c.len());
            let other = match kind {
                Duality::Euclidean => d.generator().transpose(),
                Duality::Hermitian => d.generator().conj_transpose(f.characteristic().pow(f.degree() / 2)).unwrap(),
            };
            prop_assert!(c.generator().mul(&other).unwrap().is_zero());
        }
    }

    #[test]
    fn punctured_codewords_are_restrictions(c in code_strategy(10, 5), mask in any::<u16>(), msg in prop::collection::vec(any::<u32>(), 5)) {
        let keep: Vec<usize> = (0..c.len()).filter(|i| mask >> i & 1 == 1).collect();
        prop_assume!(!keep.is_empty());
        let q = c.field().order();
        let msg: Vec<u32> = msg[..c.dim()].iter().map(|m| m % q).collect();
        let word = c.encode(&msg);
        let restricted: Vec<u32> = keep.iter().map(|&i| word[i]).collect();
        let p = c.puncture(&keep).unwrap();
        prop_assert!(p.contains_word(&restricted));
        prop_assert!(p.dim() <= c.dim());
        let s = c.shorten(&keep).unwrap();
        prop_assert!(p.contains(&s).unwrap());
    }

    #[test]
    fn distance_matches_column_independence(c in code_strategy(8, 4)) {
        let d = c.distance_by_enumeration(u64::MAX).exact_value().unwrap();
        let h = c.parity_check();
        for delta in 2..=c.len() {
            let all_independent = subsets(c.len(), delta - 1)
                .iter()
                .all(|s| h.select_cols(s).rank() == delta - 1);
            prop_assert_eq!(d >= delta, all_independent, "d = {}, δ = {}", d, delta);
        }
    }

    #[test]
    fn found_locality_respects_the_bound(c in code_strategy(8, 4), r in 1..5usize, delta in 2..4usize) {
        if let Some(profile) = search_locality(&c, r, delta, 200_000) {
            prop_assert!(verify_locality(&c, &profile, DEFAULT_BUDGET).verified);
            let d = c.distance_by_enumeration(u64::MAX).exact_value().unwrap() as i64;
            prop_assert!(d <= rd_bound(c.len(), c.dim(), r, delta).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn locality_is_monotone_in_delta(p in family_a_strategy()) {
        let c = build_family_a(&p).unwrap();
        let e = p.expected();
        let profile = verify_candidates(&c, &candidate_profiles(&p.construction(), e.r, e.delta).unwrap(), DEFAULT_BUDGET).0.unwrap();
        for smaller in 2..e.delta {
            let weaker = profile.with_params(e.r + e.delta - smaller, smaller).unwrap();
            prop_assert!(verify_locality(&c, &weaker, DEFAULT_BUDGET).verified);
        }
    }

    #[test]
    fn optimal_family_a_codes_meet_the_redundancy_bound(p in family_a_strategy()) {
        let c = build_family_a(&p).unwrap();
        let e = p.expected();
        let profile = verify_candidates(&c, &candidate_profiles(&p.construction(), e.r, e.delta).unwrap(), DEFAULT_BUDGET).0.unwrap();
        let v = is_optimal_lrc(&c, &profile, DEFAULT_BUDGET);
        prop_assert!(v.optimal);
        prop_assert!(e.n - e.k >= e.k.div_ceil(e.r) * (e.delta - 1));
        prop_assert_eq!(v.distance.exact_value().map(|d| d as i64), v.bound);
    }

    #[test]
    fn optimal_family_c_codes_meet_the_redundancy_bound(p in family_c_strategy()) {
        let c = build_family_c(&p).unwrap();
        let e = p.expected();
        prop_assert_eq!((c.len(), c.dim()), (e.n, e.k));
        let profile = verify_candidates(&c, &candidate_profiles(&p.construction(), e.r, e.delta).unwrap(), DEFAULT_BUDGET).0.unwrap();
        prop_assert!(is_optimal_lrc(&c, &profile, DEFAULT_BUDGET).optimal);
        prop_assert!(e.n - e.k >= e.k.div_ceil(e.r) * (e.delta - 1));
    }
}
