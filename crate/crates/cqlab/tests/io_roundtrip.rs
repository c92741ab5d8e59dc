//! CSV artifacts preserve every bit of the numbers written.

use cqlab::io::{number, read_csv, write_csv, Cell, GridInfo, Header, Table};
use proptest::prelude::*;

fn header() -> Header {
    Header {
        tool: "cqlab".into(),
        version: "0".into(),
        config_hash: "0".repeat(64),
        grid: GridInfo { grid_n: Some(16), r_max: None, tol_b: 1e-15, dt: 1e-3 },
    }
}

proptest! {
    #[test]
    fn numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(number(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec((any::<f64>(), -1e300f64..1e300), 1..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["x", "y"]);
        for &(x, y) in &rows {
            t.push(vec![Cell::Num(x), Cell::Num(y)]);
        }
        write_csv(&path, &header(), &t).unwrap();
        let (cols, back) = read_csv(&path).unwrap();
        prop_assert_eq!(cols, vec!["x".to_string(), "y".to_string()]);
        for (&(x, y), row) in rows.iter().zip(&back) {
            let bx: f64 = row[0].parse().unwrap();
            prop_assert!(bx.to_bits() == x.to_bits() || (x.is_nan() && bx.is_nan()));
            prop_assert_eq!(row[1].parse::<f64>().unwrap(), y);
        }
    }
}
