mod common;

use nalgebra::{DMatrix, DVector};
use noticescope::domquery::{BannerMatch, DomDocument, NodeId};
use noticescope::filterlist::{parse_rule, DomainPattern, FilterRule, ParsedLine, RuleKind, Scope};
use noticescope::inference::{
    aic, build_design_matrix, fit_design, fit_logit, group_stats, odds_ratio, parse_formula,
    spearman, FitOptions, GroupBy, GroupCell, InferenceError, ObservationRow,
};
use noticescope::noticemetrics::{consolidate, count_words};
use noticescope::report::{heatmap_csv, heatmap_spec, parse_heatmap_csv, sig4, HeatmapMetric};
use proptest::prelude::*;
use rand::Rng;

fn logit_data(seed: u64, n: usize, k: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut r = common::rng(seed);
    let beta: Vec<f64> = (0..k).map(|_| r.random_range(-1.0..1.0)).collect();
    let x = DMatrix::from_fn(n, k, |_, j| {
        if j == 0 {
            1.0
        } else {
            r.random_range(-2.0..2.0)
        }
    });
    let y = DVector::from_fn(n, |i, _| {
        let eta: f64 = (0..k).map(|j| x[(i, j)] * beta[j]).sum();
        f64::from(u8::from(r.random_bool(1.0 / (1.0 + (-eta).exp()))))
    });
    (x, y)
}

fn fit_or_partial(x: &DMatrix<f64>, y: &DVector<f64>, opts: FitOptions) -> Option<f64> {
    match fit_logit(x, y, opts) {
        Ok(f) => Some(f.log_likelihood),
        Err(InferenceError::NotConverged(f)) => Some(f.log_likelihood),
        Err(_) => None,
    }
}

fn banner_match(id: u32, height: Option<u32>, words: usize, links: usize) -> BannerMatch {
    let text = vec!["word"; words].join(" ");
    let links: String = (0..links)
        .map(|i| format!("<a href=\"/{i}\">l</a>"))
        .collect();
    BannerMatch {
        node_id: NodeId(id),
        selector_text: "#cookieNotice".into(),
        height_px: height,
        width_px: None,
        offset_x: None,
        offset_y: None,
        inner_html: format!("<p>{text}</p>{links}"),
        has_hidden_ancestor_hint: false,
    }
}

fn arb_matches() -> impl Strategy<Value = Vec<BannerMatch>> {
    prop::collection::vec((prop::option::of(1u32..800), 0usize..40, 0usize..4), 1..6).prop_map(
        |v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (h, w, l))| banner_match(i as u32 + 1, h, w, l))
                .collect()
        },
    )
}

fn arb_domain() -> impl Strategy<Value = String> {
    "[a-z]{1,8}(\\.[a-z]{2,5}){1,2}"
}

fn arb_rule() -> impl Strategy<Value = FilterRule> {
    let scope = prop_oneof![
        Just(Scope::Generic),
        prop::collection::vec((arb_domain(), any::<bool>()), 1..4).prop_map(|v| {
            Scope::DomainScoped(
                v.into_iter()
                    .map(|(domain, negated)| DomainPattern { domain, negated })
                    .collect(),
            )
        }),
    ];
    let selector = prop_oneof![
        "#[a-zA-Z][a-zA-Z0-9_-]{0,12}",
        "\\.[a-zA-Z][a-zA-Z0-9_-]{0,12}",
        "div\\[id\\^=\"[a-z]{1,6}\"\\]",
        "[a-z]{1,6} > \\.[a-z]{1,6}",
    ];
    let kind = prop_oneof![Just(RuleKind::Hide), Just(RuleKind::Exception)];
    (scope, selector, kind).prop_map(|(scope, selector_text, kind)| FilterRule {
        scope,
        selector_text,
        kind,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filter_rule_round_trips(rule in arb_rule()) {
        let text = rule.to_string();
        prop_assert_eq!(parse_rule(&text), ParsedLine::Rule(rule));
    }

    #[test]
    fn html_serialization_is_a_fixed_point(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let html = common::selector_oracle::random_dom(&mut r);
        let once = DomDocument::parse(&html).to_html();
        let twice = DomDocument::parse(&once).to_html();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn consolidation_ignores_order(mut ms in arb_matches(), rot in 0usize..6) {
        let a = consolidate(&ms);
        let len = ms.len();
        ms.rotate_left(rot % len);
        ms.reverse();
        prop_assert_eq!(consolidate(&ms), a);
    }

    #[test]
    fn taller_match_never_lowers_height(ms in arb_matches(), extra in 1u32..1000) {
        let before = consolidate(&ms);
        let mut more = ms.clone();
        more.push(banner_match(99, Some(extra), 1, 0));
        let after = consolidate(&more);
        prop_assert!(after.height_px >= before.height_px);
        let max = ms.iter().filter_map(|m| m.height_px).max();
        prop_assert_eq!(before.height_px, max);
        prop_assert!(after.match_count > before.match_count);
    }

    #[test]
    fn word_counts_add(a in "[a-z ]{0,30}[a-z]", b in "[a-z][a-z \t\n]{0,30}") {
        prop_assert_eq!(count_words(&format!("{a} {b}")), count_words(&a) + count_words(&b));
    }

    #[test]
    fn log_likelihood_rises_with_iterations(seed in any::<u64>()) {
        let (x, y) = logit_data(seed, 80, 3);
        let mut prev = f64::NEG_INFINITY;
        for max_iter in 0..8 {
            let Some(ll) = fit_or_partial(&x, &y, FitOptions { tol: 1e-8, max_iter }) else {
                return Ok(());
            };
            prop_assert!(ll >= prev - 1e-12 * (1.0 + prev.abs()), "{} after {}", ll, prev);
            prev = ll;
        }
    }

    #[test]
    fn fit_score_vanishes(seed in any::<u64>()) {
        let (x, y) = logit_data(seed, 120, 3);
        if let Ok(fit) = fit_logit(&x, &y, FitOptions::default()) {
            let beta = DVector::from_vec(fit.coefficients.clone());
            let p = (&x * &beta).map(|e| 1.0 / (1.0 + (-e).exp()));
            let score = x.transpose() * (&y - p);
            prop_assert!(score.amax() <= 1e-8);
            prop_assert!(fit.log_likelihood >= fit.null_log_likelihood - 1e-9);
        }
    }

    #[test]
    fn rescaling_a_column_rescales_its_coefficient(seed in any::<u64>(), c in prop_oneof![-5.0..-0.2f64, 0.2..5.0f64]) {
        let (x, y) = logit_data(seed, 120, 3);
        let Ok(base) = fit_logit(&x, &y, FitOptions::default()) else { return Ok(()) };
        let mut xs = x.clone();
        xs.column_mut(2).scale_mut(c);
        let scaled = fit_logit(&xs, &y, FitOptions::default()).unwrap();
        prop_assert!((scaled.coefficients[2] - base.coefficients[2] / c).abs() <= 1e-6);
        prop_assert!((scaled.coefficients[0] - base.coefficients[0]).abs() <= 1e-6);
        prop_assert!((scaled.coefficients[1] - base.coefficients[1]).abs() <= 1e-6);
        prop_assert!((scaled.log_likelihood - base.log_likelihood).abs() <= 1e-6);
        prop_assert!((aic(&scaled) - aic(&base)).abs() <= 1e-6);
        let p = |x: &DMatrix<f64>, b: &[f64]| (x * DVector::from_column_slice(b)).map(|e| 1.0 / (1.0 + (-e).exp()));
        prop_assert!((p(&xs, &scaled.coefficients) - p(&x, &base.coefficients)).amax() <= 1e-6);
    }

    #[test]
    fn odds_ratio_is_monotone(a in -10.0..10.0f64, b in -10.0..10.0f64, se in 0.0..2.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(odds_ratio(lo, se).pct_change <= odds_ratio(hi, se).pct_change);
        let or = odds_ratio(a, se);
        prop_assert!(or.ci_low_pct <= or.pct_change && or.pct_change <= or.ci_high_pct);
    }

    #[test]
    fn spearman_ignores_monotone_transforms(v in prop::collection::vec((-50i32..50, -50i32..50), 4..40)) {
        let xs: Vec<f64> = v.iter().map(|p| f64::from(p.0)).collect();
        let ys: Vec<f64> = v.iter().map(|p| f64::from(p.1)).collect();
        let Ok(base) = spearman(&xs, &ys) else { return Ok(()) };
        let tx: Vec<f64> = xs.iter().map(|x| (x / 10.0).exp()).collect();
        let ty: Vec<f64> = ys.iter().map(|y| y * y * y + 3.0 * y).collect();
        let moved = spearman(&tx, &ty).unwrap();
        prop_assert!((moved.rho - base.rho).abs() <= 1e-12);
        let flipped: Vec<f64> = ys.iter().map(|y| -y).collect();
        prop_assert!((spearman(&xs, &flipped).unwrap().rho + base.rho).abs() <= 1e-12);
    }

    #[test]
    fn prevalence_is_exact_per_group(v in prop::collection::vec((0usize..4, 0usize..3, any::<bool>()), 1..200)) {
        let rows: Vec<ObservationRow> = v.iter().map(|&(t, g, b)| ObservationRow {
            banner_exists: b,
            tld: ["at", "be", "nl", "com"][t].into(),
            vpn: ["DE", "NL", "US"][g].into(),
            vpn_eu: g != 2,
            height: None,
            words: None,
            links: None,
        }).collect();
        let cells = group_stats(&rows, GroupBy::TldVantage);
        let total: usize = cells.iter().map(|c| c.n).sum();
        let banners: usize = cells.iter().map(|c| c.with_banner).sum();
        prop_assert_eq!(total, rows.len());
        prop_assert_eq!(banners, rows.iter().filter(|r| r.banner_exists).count());
        for c in &cells {
            prop_assert_eq!(c.prevalence, c.with_banner as f64 / c.n as f64);
        }
    }

    #[test]
    fn heatmap_csv_round_trips(vals in prop::collection::vec(prop::option::of(-1e6..1e6f64), 1..30)) {
        let cells: Vec<GroupCell> = vals.iter().enumerate().map(|(i, v)| GroupCell {
            tld: format!("t{}", i % 5),
            vantage: format!("V{}", i / 5),
            n: 1,
            with_banner: 0,
            prevalence: 0.0,
            median_height: *v,
            median_words: None,
            median_links: None,
            height_known_n: 0,
        }).collect();
        let spec = heatmap_spec(&cells, HeatmapMetric::MedianHeight).unwrap();
        let (rows, cols, parsed) = parse_heatmap_csv(&heatmap_csv(&spec)).unwrap();
        prop_assert_eq!(&rows, &spec.rows);
        prop_assert_eq!(&cols, &spec.cols);
        let expected: Vec<Vec<Option<f64>>> = spec.cells.iter()
            .map(|r| r.iter().map(|v| v.map(|x| sig4(x).parse().unwrap())).collect())
            .collect();
        prop_assert_eq!(&parsed, &expected);
        let again = heatmap_spec(
            &cells.iter().map(|c| GroupCell { median_height: c.median_height.map(|x| sig4(x).parse().unwrap()), ..c.clone() }).collect::<Vec<_>>(),
            HeatmapMetric::MedianHeight,
        ).unwrap();
        prop_assert_eq!(heatmap_csv(&again), heatmap_csv(&spec));
    }
}

#[test]
fn odds_ratio_of_zero_is_zero() {
    assert_eq!(odds_ratio(0.0, 0.3).pct_change, 0.0);
}

/// Effect-free data over 6 TLDs and 18 vantages: the 17 extra vantage columns
/// should lose on AIC nearly always.
#[test]
fn aic_prefers_the_smaller_nested_model() {
    let small = parse_formula("banner_exists ~ TLD").unwrap();
    let big = parse_formula("banner_exists ~ TLD + VPN").unwrap();
    let tlds = ["at", "be", "de", "fr", "nl", "com"];
    let mut wins = 0;
    for seed in 0..100 {
        let mut r = common::rng(1000 + seed);
        let rows: Vec<ObservationRow> = (0..1800)
            .map(|i| {
                let tld = tlds[i % tlds.len()];
                let p = 0.3 + 0.05 * (i % tlds.len()) as f64;
                ObservationRow {
                    banner_exists: r.random_bool(p),
                    tld: tld.into(),
                    vpn: format!("V{:02}", (i / tlds.len()) % 18),
                    vpn_eu: true,
                    height: None,
                    words: None,
                    links: None,
                }
            })
            .collect();
        let fit = |spec| {
            fit_design(
                &build_design_matrix(&rows, spec).unwrap(),
                FitOptions::default(),
            )
            .unwrap()
        };
        let (a, b) = (fit(&small), fit(&big));
        assert!(
            b.log_likelihood >= a.log_likelihood - 1e-9,
            "adding predictors lowered the likelihood"
        );
        if aic(&a) < aic(&b) {
            wins += 1;
        }
    }
    assert!(wins >= 90, "smaller model won {wins}/100");
}
