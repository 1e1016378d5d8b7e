use squid_gate_web::{ita_line_impl, levels_scan_impl, rabi_trace_impl};

#[test]
fn levels_rows_have_seven_columns() {
    let v = levels_scan_impl(1.2, 0.499, 5e-4, 0.4985, 0.5, 4).unwrap();
    assert_eq!(v.len(), 4 * 7);
    assert_eq!(v[0], 0.4985);
    assert!(v[1..7].iter().all(|d| d.is_finite() && *d >= 0.0));
}

#[test]
fn ita_line_orders_points_a_and_b() {
    let v = ita_line_impl(1.2, 0.499, 5e-4, 2e-4, 0.49897, 0.49985, 2).unwrap();
    assert!(v[3] < v[1], "eta(A) = {} eta(B) = {}", v[3], v[1]);
}

#[test]
fn rejects_bad_ranges() {
    assert!(levels_scan_impl(1.2, 0.499, 5e-4, 0.5, 0.4, 4).is_err());
    assert!(ita_line_impl(1.2, 0.499, 5e-4, 2e-4, 0.49, 0.5, 1).is_err());
    assert!(rabi_trace_impl(1.2, 0.499, 0.49985, 5e-4, 2e-4, 7).is_err());
}

#[test]
fn rabi_trace_inverts_target() {
    let v = rabi_trace_impl(1.2, 0.499, 0.49985, 5e-4, 2e-4, 2).unwrap();
    assert_eq!(v.len() % 6, 0);
    let last = &v[v.len() - 6..];
    assert!(last[4] > 0.99, "p11 = {}", last[4]);
    for row in v.chunks(6) {
        let total: f64 = row[1..].iter().sum();
        assert!((total - 1.0).abs() < 1e-6);
    }
}
