use msr_core::cube::{h_entry, intersection_score, plane_group};
use msr_core::{
    check_parity, CodeParams, ErasureState, Field, Gf, GfMatrix, MsrCode, NodeId, NodeSet,
    PlaneIndex,
};
use proptest::prelude::*;
use proptest::sample::subsequence;

const DESK_SETS: [(usize, usize, usize); 9] = [
    (4, 2, 3),
    (4, 1, 2),
    (5, 2, 3),
    (6, 3, 4),
    (6, 2, 3),
    (6, 3, 5),
    (7, 3, 5),
    (8, 4, 7),
    (8, 3, 6),
];

fn triple() -> impl Strategy<Value = (usize, usize, usize)> {
    (3usize..=14)
        .prop_flat_map(|n| (Just(n), 1usize..n - 1))
        .prop_flat_map(|(n, k)| (Just(n), Just(k), (k + 1)..=(k + 3).min(n - 1)))
}

fn desk_code() -> impl Strategy<Value = MsrCode> {
    prop::sample::select(DESK_SETS.to_vec()).prop_map(|(n, k, d)| MsrCode::new(n, k, d).unwrap())
}

fn message(code: &MsrCode, seed: &[u16]) -> Vec<Gf> {
    let size = code.field().size() as u16;
    (0..code.params().message_len())
        .map(|i| Gf(seed[i % seed.len()].wrapping_mul(i as u16 + 1) % size))
        .collect()
}

proptest! {
    #[test]
    fn derived_parameters_are_consistent((n, k, d) in triple()) {
        let p = CodeParams::derive(n, k, d).unwrap();
        prop_assert_eq!(p, CodeParams::derive(n, k, d).unwrap());
        let q = d - k + 1;
        let t = n.div_ceil(q);
        prop_assert_eq!(p.alpha, q.pow(t as u32));
        prop_assert_eq!(p.alpha, q * p.beta);
        prop_assert_eq!(p.message_len(), k * p.alpha);
        prop_assert_eq!(p.n_base, n + p.delta);
        if k >= 2 {
            prop_assert!(p.repair_bandwidth() < p.message_len());
        }
    }

    #[test]
    fn node_and_plane_indices_round_trip(q in 2usize..=4, t in 1usize..=6, seed in any::<u64>()) {
        for id in 0..q * t {
            let node = NodeId::from_id(id, q);
            prop_assert_eq!(node.id(q), id);
            prop_assert_eq!(node.y, id / q);
        }
        let alpha = q.pow(t as u32);
        let z = PlaneIndex(seed as usize % alpha);
        let digits = z.digits(q, t);
        prop_assert!(digits.iter().all(|&d| d < q));
        prop_assert_eq!(PlaneIndex::from_digits(&digits, q), z);
    }

    #[test]
    fn scores_and_groups(q in 2usize..=4, t in 1usize..=4, mask in any::<u32>(), zseed in any::<u32>()) {
        let nodes: Vec<NodeId> = (0..q * t)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| NodeId::from_id(i, q))
            .collect();
        let erased = NodeSet::from_nodes(q, t, nodes.iter().copied());
        let z = PlaneIndex(zseed as usize % q.pow(t as u32));
        let score = intersection_score(&erased, z, t);

        // only nodes matching the plane digit matter
        let matching = NodeSet::from_nodes(q, t, nodes.iter().copied().filter(|n| z.digit(n.y, q) == n.x));
        prop_assert_eq!(intersection_score(&matching, z, t), score);

        let group = plane_group(&erased, z, q, t);
        let expected: usize = (0..t)
            .map(|y| if erased.contains(z.digit(y, q), y) { erased.section(y).len() } else { 1 })
            .product();
        prop_assert_eq!(group.len(), expected);
        prop_assert!(group.planes.contains(&z));
        for &p in &group.planes {
            prop_assert_eq!(intersection_score(&erased, p, t), score);
        }
    }

    #[test]
    fn in_plane_entries_of_first_row_are_one(idx in 0usize..DESK_SETS.len(), x in 0usize..4, y in 0usize..4, zs in any::<u16>()) {
        let (n, k, d) = DESK_SETS[idx];
        let code = MsrCode::new(n, k, d).unwrap();
        let p = code.params();
        let (x, y) = (x % p.q, y % p.t);
        let z = PlaneIndex(zs as usize % p.alpha);
        prop_assert_eq!(h_entry(code.thetas(), 0, z, x, y, z), Gf::ONE);
    }

    #[test]
    fn solve_multiplies_back(m in prop::sample::select(vec![4u32, 8]), size in 1usize..6,
                             raw in prop::collection::vec(any::<u16>(), 42)) {
        let f = Field::new(m).unwrap();
        let mask = (f.size() - 1) as u16;
        let rows: Vec<Vec<Gf>> = (0..size)
            .map(|i| (0..size).map(|j| Gf(raw[i * size + j] & mask)).collect())
            .collect();
        let b: Vec<Gf> = (0..size).map(|i| Gf(raw[36 + i] & mask)).collect();
        let a = GfMatrix::from_rows(rows).unwrap();
        let det = a.determinant(&f).unwrap();
        match a.solve(&f, &b) {
            Ok(x) => {
                prop_assert!(!det.is_zero());
                prop_assert_eq!(a.mul_vec(&f, &x).unwrap(), b);
                let inv = a.inverse(&f).unwrap();
                prop_assert_eq!(a.mul(&f, &inv).unwrap(), GfMatrix::identity(size));
            }
            Err(_) => prop_assert!(det.is_zero()),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn encoded_words_satisfy_parity(code in desk_code(), seed in prop::collection::vec(any::<u16>(), 1..8)) {
        let cw = code.encode(&message(&code, &seed)).unwrap();
        prop_assert!(check_parity(&cw, code.thetas()));
        for v in code.virtual_nodes() {
            prop_assert!(cw.node(v).iter().all(|s| s.is_zero()));
        }
        prop_assert_eq!(code.message(&cw), message(&code, &seed));
    }

    #[test]
    fn decode_inverts_erasure(code in desk_code(), seed in prop::collection::vec(any::<u16>(), 1..8),
                              pick in subsequence((0usize..8).collect::<Vec<_>>(), 1..=5)) {
        let p = *code.params();
        let erased: Vec<NodeId> = pick.iter().copied().filter(|&i| i < p.n).take(p.r).map(|i| code.node(i)).collect();
        let cw = code.encode(&message(&code, &seed)).unwrap();
        let state = ErasureState::new(cw.clone(), erased);
        let seq = code.decode(&state).unwrap();
        prop_assert_eq!(&seq, &cw);
        prop_assert_eq!(code.decode_naive(&state).unwrap(), seq);
    }

    #[test]
    fn repair_reads_only_stored_symbols(code in desk_code(), seed in prop::collection::vec(any::<u16>(), 1..8),
                                        failed in 0usize..8, order in Just((0usize..8).collect::<Vec<_>>()).prop_shuffle()) {
        let p = *code.params();
        let failed = code.node(failed % p.n);
        let helpers: Vec<NodeId> = order
            .into_iter()
            .filter(|&i| i < p.n && code.node(i) != failed)
            .take(p.d)
            .map(|i| code.node(i))
            .collect();
        let cw = code.encode(&message(&code, &seed)).unwrap();
        let mut lost = cw.clone();
        lost.erase([failed]);
        let (rebuilt, trace) = code.repair(&lost, failed, &helpers).unwrap();
        prop_assert_eq!(rebuilt.as_slice(), cw.node(failed));
        prop_assert_eq!(trace.downloaded(), p.repair_bandwidth());
        prop_assert_eq!(trace.aloof.len(), p.n - p.d - 1);
        for hp in &trace.payload {
            prop_assert_eq!(hp.symbols.len(), p.beta);
            for &(z, v) in &hp.symbols {
                prop_assert_eq!(z.digit(failed.y, p.q), failed.x);
                prop_assert_eq!(v, cw.get(hp.helper, z));
            }
        }
    }
}
