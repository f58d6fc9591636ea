use fashion_parser::dep::{labels_to_tree, OpLabel};
use fashion_parser::metrics::compute_metrics;

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// 20 tokens over three labels with the confusion matrix
/// `[[6,1,1],[1,5,1],[0,1,4]]` (rows gold, columns predicted).
fn fixture() -> (Vec<usize>, Vec<usize>) {
    let confusion = [[6, 1, 1], [1, 5, 1], [0, 1, 4]];
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    // interleave so the fixture is not sorted by label
    for (g, row) in confusion.iter().enumerate() {
        for (p, &count) in row.iter().enumerate() {
            for _ in 0..count {
                gold.push(g);
                pred.push(p);
            }
        }
    }
    let n = gold.len();
    let order: Vec<usize> = (0..n).map(|i| (i * 7) % n).collect();
    (
        order.iter().map(|&i| gold[i]).collect(),
        order.iter().map(|&i| pred[i]).collect(),
    )
}

#[test]
fn fixture_matches_hand_counted_scores() {
    let (gold, pred) = fixture();
    assert_eq!(gold.len(), 20);
    let m = compute_metrics(&gold, &pred, &labels(&["A", "B", "C"])).unwrap();
    assert_eq!(m.confusion, vec![vec![6, 1, 1], vec![1, 5, 1], vec![0, 1, 4]]);
    assert_eq!(m.accuracy, 0.75);
    // F1 = 2 tp / (predicted + support): 12/15, 10/14, 8/11
    let f1 = [12.0 / 15.0, 10.0 / 14.0, 8.0 / 11.0];
    let weighted = (8.0 * f1[0] + 7.0 * f1[1] + 5.0 * f1[2]) / 20.0;
    assert!((m.f1_weighted - weighted).abs() < 1e-12);
    assert!((m.f1_weighted - 0.751_818_181_818_181_8).abs() < 1e-12);
    assert!((m.f1_macro - f1.iter().sum::<f64>() / 3.0).abs() < 1e-12);
    let supports: Vec<u64> = m.per_label.iter().map(|l| l.support).collect();
    assert_eq!(supports, [8, 7, 5]);
    assert!((m.per_label[0].precision - 6.0 / 7.0).abs() < 1e-12);
    assert!((m.per_label[2].recall - 0.8).abs() < 1e-12);
}

#[test]
fn all_shift_predictions_score_one_in_five() {
    let gold = [
        OpLabel::LeftArc,
        OpLabel::LeftArc,
        OpLabel::Shift,
        OpLabel::RightArc,
        OpLabel::RightArc,
    ];
    let g: Vec<usize> = gold.iter().map(|l| l.index()).collect();
    let p = vec![OpLabel::Shift.index(); 5];
    let m = compute_metrics(&g, &p, &OpLabel::names()).unwrap();
    assert!((m.accuracy - 0.2).abs() < 1e-12);
    assert_eq!(labels_to_tree(&gold).heads, [1, 2, -1, 2, 2]);
}

#[test]
fn all_unknown_predictions_score_the_unknown_share() {
    use fashion_parser::corpus::NerTag;
    let gold: Vec<usize> = (0..50)
        .map(|i| if i % 5 < 2 { NerTag::Unknown } else { NerTag::ALL[i % 4] })
        .map(|t| t.index())
        .collect();
    let pred = vec![NerTag::Unknown.index(); 50];
    let m = compute_metrics(&gold, &pred, &NerTag::names()).unwrap();
    assert!((m.accuracy - 0.4).abs() < 1e-12);
}

#[test]
fn perfect_predictions_score_one() {
    let g: Vec<usize> = [0, 0, 1, 2, 2].to_vec();
    let m = compute_metrics(&g, &g, &OpLabel::names()).unwrap();
    assert_eq!(m.accuracy, 1.0);
    assert_eq!(m.f1_weighted, 1.0);
}
