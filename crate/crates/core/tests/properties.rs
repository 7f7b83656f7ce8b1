use nalgebra::DMatrix;
use proptest::prelude::*;
use skewca::divergence::calibration_constant;
use skewca::matched::Component;
use skewca::{
    asymmetry_measure, build_matched, confidence_regions, decompose, matched_coordinates,
    origin_distances, power_divergence_statistic, run_analyze, AnalysisConfig, AnalysisReport,
    ContingencyTable, Metric, SkewMatrix,
};

const LAMBDAS: [f64; 8] = [-0.9, -0.5, 0.0, 0.5, 2.0 / 3.0, 1.0, 2.0, 5.0];

fn counts_strategy(sizes: std::ops::RangeInclusive<usize>, max: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    sizes.prop_flat_map(move |r| {
        prop::collection::vec(
            prop::collection::vec(prop_oneof![1 => Just(0i64), 4 => 0..max], r),
            r,
        )
    })
}

fn asymmetric(counts: Vec<Vec<i64>>) -> Option<ContingencyTable> {
    let t = ContingencyTable::unlabeled(counts).ok()?;
    (t.total() > t.diagonal_total()).then_some(t)
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn large_tables_reconstruct(counts in counts_strategy(2..=25, 60), li in 0usize..8) {
        let Some(t) = asymmetric(counts) else { return Ok(()) };
        let lambda = LAMBDAS[li];
        let p = t.probabilities();
        let prof = asymmetry_measure(&p, lambda).unwrap();
        let s = SkewMatrix::from_profile(&p, &prof);
        prop_assert_eq!(s.s.transpose(), -&s.s);
        prop_assert!(((s.s.transpose() * &s.s).trace() - prof.phi_total).abs() < 1e-12);
        let dec = decompose(&s, &p, Metric::Averaged).unwrap();
        let recon = dec.left() * DMatrix::from_diagonal(dec.singular_values()) * dec.right().transpose();
        prop_assert!((recon - &s.s).amax() < 1e-10);
        let m = dec.dims();
        let eye = DMatrix::<f64>::identity(m, m);
        prop_assert!((dec.right().transpose() * dec.right() - eye).amax() < 1e-10);
        // F = D^(-1/2) S B
        let expanded = DMatrix::from_diagonal(&dec.weights) * &s.s * dec.right();
        prop_assert!((expanded - &dec.row_coords).amax() < 1e-10);
        // F = G J
        prop_assert!((&dec.col_coords * dec.rotation() - &dec.row_coords).amax() < 1e-10);
        if !dec.fully_symmetric {
            prop_assert!((dec.contributions.iter().sum::<f64>() - 100.0).abs() < 1e-8);
        }
    }

    #[test]
    fn decomposition_is_deterministic(counts in counts_strategy(3..=8, 30)) {
        let Some(t) = asymmetric(counts) else { return Ok(()) };
        let p = t.probabilities();
        let s = SkewMatrix::from_profile(&p, &asymmetry_measure(&p, 0.5).unwrap());
        let a = decompose(&s, &p, Metric::Averaged).unwrap();
        let b = decompose(&s, &p, Metric::Averaged).unwrap();
        prop_assert_eq!(a.row_coords, b.row_coords);
    }

    #[test]
    fn origin_distance_zero_iff_symmetric_category(counts in counts_strategy(3..=6, 20)) {
        let Some(t) = asymmetric(counts) else { return Ok(()) };
        let p = t.probabilities();
        let s = SkewMatrix::from_profile(&p, &asymmetry_measure(&p, 1.0).unwrap());
        let dec = decompose(&s, &p, Metric::Averaged).unwrap();
        let dist = origin_distances(&dec);
        for i in 0..t.size() {
            let symmetric = (0..t.size()).all(|j| t.count(i, j) == t.count(j, i));
            prop_assert_eq!(dist.rows[i] < 1e-12, symmetric, "category {}", i);
        }
    }

    #[test]
    fn region_properties(counts in counts_strategy(3..=6, 50), li in 0usize..8) {
        let Some(t) = asymmetric(counts) else { return Ok(()) };
        let lambda = LAMBDAS[li];
        let p = t.probabilities();
        let prof = asymmetry_measure(&p, lambda).unwrap();
        prop_assume!(!prof.is_fully_symmetric());
        let dec = decompose(&SkewMatrix::from_profile(&p, &prof), &p, Metric::Averaged).unwrap();
        let wide = confidence_regions(&dec, &t, &prof, 0.01).unwrap();
        let narrow = confidence_regions(&dec, &t, &prof, 0.2).unwrap();
        for (w, n) in wide.iter().zip(&narrow) {
            prop_assert!((w.radius_x - w.radius_y).abs() < 1e-10);
            let vectors = if w.axis == skewca::Axis::Row { dec.left() } else { dec.right() };
            let share = vectors[(w.category, 0)].powi(2) + vectors[(w.category, 1)].powi(2);
            if share > 1e-12 && dec.weights[w.category] > 0.0 {
                prop_assert!(w.radius_x > 0.0);
                prop_assert!(w.radius_x > n.radius_x);
            }
            if w.radius_x > 0.0 {
                let inside = (w.center.0 / w.radius_x).powi(2) + (w.center.1 / w.radius_y).powi(2) <= 1.0;
                prop_assert_eq!(inside, w.contains_origin);
            }
        }
        // the statistic and the measure are tied by the same calibration constant
        let stat = power_divergence_statistic(&t, lambda).unwrap();
        let via = 2.0 * t.total() as f64 * prof.delta / calibration_constant(lambda) * prof.phi_total;
        prop_assert!((stat - via).abs() < 1e-10 * stat.max(1.0));
    }

    #[test]
    fn report_json_round_trip(counts in counts_strategy(2..=5, 30), li in 0usize..8) {
        let Some(t) = asymmetric(counts) else { return Ok(()) };
        let mut config = AnalysisConfig::default();
        config.lambda = LAMBDAS[li];
        let report = run_analyze(&config, &t).unwrap();
        let back: AnalysisReport = serde_json::from_str(&report.to_json()).unwrap();
        prop_assert_eq!(back, report);
    }
}

fn pair_strategy() -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    (3usize..=5).prop_flat_map(|r| {
        let one = prop::collection::vec(prop::collection::vec(prop_oneof![1 => Just(0i64), 4 => 0i64..40], r), r);
        (one.clone(), one)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matched_union_and_swap((c1, c2) in pair_strategy(), li in 0usize..8) {
        let (Some(t1), Some(t2)) = (asymmetric(c1), asymmetric(c2)) else { return Ok(()) };
        let lambda = LAMBDAS[li];
        let m = build_matched(&t1, &t2, lambda).unwrap();
        prop_assert_eq!(m.s_plus.transpose(), -&m.s_plus);
        prop_assert_eq!(m.s_minus.transpose(), -&m.s_minus);
        prop_assert_eq!(m.block.transpose(), -&m.block);

        // union of component singular values, independently via nalgebra
        let sv = |x: &DMatrix<f64>| -> Vec<f64> { x.clone().svd(false, false).singular_values.iter().copied().collect() };
        let union = sorted_desc(sv(&m.s_plus).into_iter().chain(sv(&m.s_minus)).collect());
        let block = sorted_desc(sv(&m.block));
        let ours = m.block_singular_values();
        for k in 0..ours.len() {
            prop_assert!((ours[k] - block[k]).abs() < 1e-9);
            prop_assert!((union[k] - block[k]).abs() < 1e-9);
        }
        for w in ours.as_slice().windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * ours[0].max(1.0));
        }
        let plus = m.svd_plus.singular_values.as_slice();
        let minus = m.svd_minus.singular_values.as_slice();
        for (k, class) in m.dim_class.iter().enumerate() {
            let source = match class.component {
                Component::Sum => plus,
                Component::Difference => minus,
            };
            prop_assert_eq!(source[class.source_dim - 1], ours[k]);
        }

        // skew closure
        let n1 = (m.s_first.transpose() * &m.s_first).trace();
        let n2 = (m.s_second.transpose() * &m.s_second).trace();
        let cross = (m.s_first.transpose() * &m.s_second).trace();
        prop_assert!(((m.s_plus.transpose() * &m.s_plus).trace() - (n1 + n2 + 2.0 * cross)).abs() < 1e-12);
        prop_assert!(((m.s_minus.transpose() * &m.s_minus).trace() - (n1 + n2 - 2.0 * cross)).abs() < 1e-12);

        // swapping the tables keeps the sum and negates the difference
        let swapped = build_matched(&t2, &t1, lambda).unwrap();
        prop_assert_eq!(&swapped.s_plus, &m.s_plus);
        prop_assert_eq!(&swapped.s_minus, &(-&m.s_minus));
        let a = matched_coordinates(&m, Metric::Identity);
        let b = matched_coordinates(&swapped, Metric::Identity);
        prop_assert_eq!(&a.sum.row_coords, &b.sum.row_coords);
        for i in 0..t1.size() {
            let da = a.difference.row_coords.row(i).norm();
            let db = b.difference.row_coords.row(i).norm();
            prop_assert!((da - db).abs() < 1e-10);
        }

        // scaling each table separately changes nothing
        let scaled = build_matched(&t1.scaled(5), &t2.scaled(7), lambda).unwrap();
        prop_assert!((scaled.block_singular_values() - ours).amax() < 1e-12);
        for metric in [Metric::Identity, Metric::Averaged] {
            let x = matched_coordinates(&m, metric);
            let y = matched_coordinates(&scaled, metric);
            prop_assert!((&x.sum.row_coords - &y.sum.row_coords).amax() < 1e-12);
            prop_assert!((&x.difference.row_coords - &y.difference.row_coords).amax() < 1e-12);
        }
    }
}
