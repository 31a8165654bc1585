use std::path::PathBuf;

use empathy_core::empathy_data::{
    experiment_report, pearson, published_report, read_records_path, score_iri, IriKey, PublishedAggregates,
    ReportOptions, ReportSource, Subscale,
};

fn cohort() -> Vec<empathy_core::empathy_data::IriRecord> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_cohort.csv");
    read_records_path(&path).unwrap()
}

#[test]
fn hand_scored_records() {
    let key = IriKey::davis();
    let records = cohort();
    let find = |id: &str| records.iter().find(|r| r.id == id).unwrap();
    // s01 PT items 3*,8,11,15*,21,25,28 answered 3,1,4,2,3,4,0 -> 1+1+4+2+3+4+0
    let s01 = score_iri(find("s01"), &key).unwrap();
    assert_eq!((s01.pt, s01.ec, s01.fs, s01.pd, s01.missing), (15, 17, 18, 20, 0));
    // s06 skipped item 11
    let s06 = score_iri(find("s06"), &key).unwrap();
    assert_eq!((s06.pt, s06.ec, s06.fs, s06.pd, s06.missing), (10, 7, 19, 14, 1));
    let s05 = score_iri(find("s05"), &key).unwrap();
    assert_eq!((s05.pt, s05.ec, s05.fs, s05.pd), (22, 14, 11, 18));
}

#[test]
fn cohort_outcomes_sum_to_participants() {
    let report = experiment_report(&cohort(), &IriKey::davis(), &ReportOptions::default()).unwrap();
    assert_eq!(report.source, ReportSource::Computed);
    let women = report.gender("women").unwrap();
    assert_eq!(women.outcomes.as_array(), [2, 0, 1, 4]);
    let men = report.gender("men").unwrap();
    assert_eq!(men.outcomes.as_array(), [1, 0, 0, 3]);
    assert_eq!(men.unpaired, 1);
    for g in &report.genders {
        assert_eq!(g.outcomes.total() + g.unpaired, g.participants);
    }
    assert!(report.warnings.iter().any(|w| w.contains("men: 1")));
}

#[test]
fn total_probability_collapses_to_the_high_group_share() {
    // only the three participants with PT >= 18 forward
    let report = experiment_report(&cohort(), &IriKey::davis(), &ReportOptions::default()).unwrap();
    let tp = report.total_probability.unwrap();
    assert_eq!(tp.p_f_given_condition, Some(1.0));
    assert_eq!(tp.p_f_given_not, Some(0.0));
    assert!((tp.p_f - tp.p_condition).abs() < 1e-15);
    assert!((tp.p_condition - 0.25).abs() < 1e-15);
}

#[test]
fn cohort_correlations_match_the_textbook_formula() {
    let key = IriKey::davis();
    let records = cohort();
    let mut seen = std::collections::BTreeSet::new();
    let scores: Vec<_> = records
        .iter()
        .filter(|r| seen.insert(r.id.clone()))
        .map(|r| score_iri(r, &key).unwrap())
        .collect();
    let column = |s: Subscale| scores.iter().map(|x| f64::from(x.get(s))).collect::<Vec<_>>();
    // r = (n sxy - sx sy) / sqrt((n sxx - sx^2)(n syy - sy^2))
    let textbook = |x: &[f64], y: &[f64]| {
        let n = x.len() as f64;
        let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|b| b * b).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt()
    };
    let report = experiment_report(&records, &key, &ReportOptions::default()).unwrap();
    for (a, b) in [(Subscale::PT, Subscale::EC), (Subscale::EC, Subscale::PD), (Subscale::FS, Subscale::PD)] {
        let (x, y) = (column(a), column(b));
        let expected = textbook(&x, &y);
        assert!((pearson(&x, &y).unwrap() - expected).abs() < 1e-12);
        assert!((report.correlation(a, b).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn published_tables_are_reported_verbatim() {
    let report = published_report(&PublishedAggregates::bundled());
    assert_eq!(report.source, ReportSource::PublishedAggregate);
    assert_eq!(report.gender("women").unwrap().refined.unwrap().as_array(), [10, 1, 5, 13]);
    let level = |a, b| {
        report
            .cooperation
            .iter()
            .find(|c| c.scales == vec![a, b])
            .and_then(|c| c.level)
            .unwrap()
    };
    assert_eq!(level(Subscale::PT, Subscale::FS), 0.625);
    assert_eq!(level(Subscale::EC, Subscale::FS), 0.75);
    assert_eq!(report.correlation(Subscale::PT, Subscale::PD), Some(0.2796));
    let text = report.render_text();
    assert!(text.contains("PublishedAggregate") && text.contains("(44)"));
}
