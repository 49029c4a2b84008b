use asgld_web::{escape_curve, mle_path, trace_sum_curves};

#[test]
fn mle_path_rows_and_progress() {
    let rows = mle_path("ASGLD", 0.1, 1.0, 100.0, 10, 5000, 100, 1).unwrap();
    assert_eq!(rows.len() % 4, 0);
    assert_eq!(rows.len() / 4, 51);
    assert_eq!(&rows[..3], &[0.0, 1.0, 1.0]);
    let first_err = rows[3];
    let last_err = rows[rows.len() - 1];
    assert!(last_err < first_err);
    assert_eq!(rows[rows.len() - 4], 5000.0);
}

#[test]
fn mle_path_rejects_bad_input() {
    assert!(mle_path("ADAM", 0.1, 1.0, 1.0, 1, 10, 1, 0).is_err());
    assert!(mle_path("ASG", -0.1, 1.0, 1.0, 1, 10, 1, 0).is_err());
    assert!(mle_path("ASG", 0.1, 1.0, 1.0, 1, 0, 1, 0).is_err());
}

#[test]
fn escape_curve_escapes() {
    let f = escape_curve("ASGLD", 8, 0.5, 0.5, 1.0, 0.0, 0.1, 2000, 3).unwrap();
    assert_eq!(f.len(), 2002);
    let k = *f.last().unwrap();
    assert!(k >= 1.0);
    assert!(f[k as usize] <= -0.1);
    assert!(escape_curve("AGLD", 8, 0.5, 0.0, 1.0, 0.0, 0.1, 10, 3).is_err());
    assert!(escape_curve("ASG", 8, 0.5, 0.0, 1.0, 0.0, 0.1, 10, 3).is_err());
    assert!(escape_curve("ASG", 8, 0.5, 0.0, 1.0, 0.5, 0.1, 10, 3).is_ok());
}

#[test]
fn trace_sum_blocks() {
    let s = trace_sum_curves(0.1, 100.0, 400, 3).unwrap();
    assert_eq!(s.len(), 1200);
    for block in s.chunks(400) {
        assert!(block.windows(2).all(|w| w[1] > w[0]));
    }
    // Larger powers shrink every term.
    assert!(s[399] > s[799] && s[799] > s[1199]);
}
