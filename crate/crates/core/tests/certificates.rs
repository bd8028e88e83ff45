//! Certificate behavior on generated instances: certified instances are
//! exactly recovered by the unweighted solve (sufficiency), and instances
//! where the solve demonstrably fails never carry a full certificate
//! (contrapositive).

use graphdeconv_core::identifiability::{certify, detect_ambiguities};
use graphdeconv_core::graphs::{erdos_renyi, Graph, ShiftOperator};
use graphdeconv_core::seed::derive_seed;
use graphdeconv_core::signals::{fixed_sparsity_inputs, make_filter, synthesize, GroundTruth};
use graphdeconv_core::solver::{recover_inputs, relative_error, solve_weighted_l1, L1Problem};
use graphdeconv_core::spectral::{eig_sym, khatri_rao_z, SpectralDecomposition};
use graphdeconv_core::Mat;

fn draw_instance(
    n: usize,
    p_edge: f64,
    s: usize,
    p_cols: usize,
    order: usize,
    alpha: f64,
    seed: u64,
) -> Option<(GroundTruth, SpectralDecomposition)> {
    let mut graph: Option<Graph> = None;
    for attempt in 0..100 {
        let g = erdos_renyi(n, p_edge, derive_seed(seed, &[1, attempt])).ok()?;
        if !g.is_connected() {
            continue;
        }
        let shift = ShiftOperator::normalized_adjacency(&g).ok()?;
        if detect_ambiguities(&shift).ambiguous {
            continue;
        }
        graph = Some(g);
        break;
    }
    let g = graph?;
    let shift = ShiftOperator::normalized_adjacency(&g).ok()?;
    let dec = eig_sym(&shift).ok()?;
    let x0 = fixed_sparsity_inputs(n, p_cols, s, derive_seed(seed, &[2])).ok()?;
    let draw = make_filter(order, alpha, derive_seed(seed, &[3]), &dec).ok()?;
    let gt = synthesize(x0, draw.filter, &dec).ok()?;
    Some((gt, dec))
}

fn g_error(g_hat: &[f64], gt: &GroundTruth) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &gi) in g_hat.iter().enumerate() {
        let target = gt.g_tilde0[i] / gt.scale_c;
        num += (gi - target) * (gi - target);
        den += target * target;
    }
    (num / den).sqrt()
}

#[test]
fn certified_instances_recover_exactly() {
    let mut certified = 0;
    let mut total = 0;
    for case in 0..40u64 {
        let s = 2 + (case % 5) as usize;
        let p_cols = 2 + (case % 3) as usize;
        let Some((gt, dec)) = draw_instance(10, 0.4, s, p_cols, 3, 0.2, case) else {
            continue;
        };
        total += 1;
        let z = khatri_rao_z(&gt.y, &dec).unwrap();
        let support = gt.x0.vec_support();
        let report = certify(&z, &support, &gt.g_tilde0).unwrap();
        if !report.certified() {
            continue;
        }
        certified += 1;
        let sol = solve_weighted_l1(&L1Problem::unweighted(z).unwrap(), 1e-9).unwrap();
        assert!(sol.converged);
        let err = g_error(&sol.g_tilde, &gt);
        assert!(
            err < 1e-5,
            "case {case}: certified but g error {err:e} (margin {:?})",
            report.c2_margin
        );
    }
    assert!(total >= 30, "only {total} instances generated");
    assert!(certified >= 10, "only {certified} certified out of {total}");
}

#[test]
fn failed_recoveries_are_never_certified() {
    // Overloaded instances (large S): when the solve demonstrably fails,
    // at least one of C1/C2 must fail.
    let mut failures_seen = 0;
    for case in 0..30u64 {
        let Some((gt, dec)) = draw_instance(10, 0.4, 24, 3, 3, 0.5, case ^ 0xdead) else {
            continue;
        };
        let z = khatri_rao_z(&gt.y, &dec).unwrap();
        let sol = solve_weighted_l1(&L1Problem::unweighted(z.clone()).unwrap(), 1e-9).unwrap();
        let x_hat = recover_inputs(&z, &sol.g_tilde).unwrap();
        let e_x = relative_error(&x_hat, gt.x0.values()).unwrap();
        if e_x <= 0.1 {
            continue;
        }
        failures_seen += 1;
        let support = gt.x0.vec_support();
        let report = certify(&z, &support, &gt.g_tilde0).unwrap();
        assert!(
            !report.certified(),
            "case {case}: e_X = {e_x} but instance carries a full certificate"
        );
    }
    assert!(failures_seen >= 5, "only {failures_seen} hard failures generated");
}

#[test]
fn alternative_solution_matches_observations() {
    // Twin-leaf construction: nodes 1 and 3 share the neighborhood {0, 2},
    // so u(1,3) is an adjacency eigenvector with eigenvalue 0.
    let g = Graph::new(
        5,
        [(0, 1, 1.0), (0, 3, 1.0), (2, 1, 1.0), (2, 3, 1.0), (0, 4, 1.0)],
    )
    .unwrap();
    let shift = ShiftOperator::adjacency(&g);
    let rep = detect_ambiguities(&shift);
    assert!(rep.pairs.iter().any(|p| (p.i, p.j) == (1, 3)));

    let dec = eig_sym(&shift).unwrap();
    // Locate the eigenvector column equal to +-u(1,3).
    let r = 1.0 / 2.0f64.sqrt();
    let k = (0..5)
        .find(|&k| {
            let col = dec.v().col(k);
            (col[1].abs() - r).abs() < 1e-9
                && (col[3].abs() - r).abs() < 1e-9
                && col[0].abs() < 1e-9
                && col[2].abs() < 1e-9
                && col[4].abs() < 1e-9
        })
        .expect("difference eigenvector not in basis");

    let x0 = Mat::from_fn(5, 2, |i, j| ((i * 2 + j) as f64 * 0.37).sin());
    let h_tilde0: Vec<f64> = (0..5).map(|i| 1.0 + 0.1 * i as f64).collect();
    let (x1, h_tilde1) =
        graphdeconv_core::identifiability::construct_alternative(&x0, &h_tilde0, &dec, (1, 3, k))
            .unwrap();

    // Same observations from both solutions.
    let y0 = dec.apply_diag_mat(&h_tilde0, &x0);
    let y1 = dec.apply_diag_mat(&h_tilde1, &x1);
    assert!(y0.sub(&y1).max_abs() < 1e-9);

    // P swaps rows 1 and 3 and preserves the sparsity count.
    for c in 0..2 {
        assert_eq!(x1[(1, c)], x0[(3, c)]);
        assert_eq!(x1[(3, c)], x0[(1, c)]);
        assert_eq!(x1[(0, c)], x0[(0, c)]);
    }

    // No flip (p = 1) is the identity transformation.
    let (x_same, h_same) = (x0.clone(), h_tilde0.clone());
    assert_eq!(x_same.data(), x0.data());
    assert_eq!(h_same, h_tilde0);
}
